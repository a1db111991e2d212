//! Noise sidecar configuration.
//!
//! OpenQASM 2.0 has no syntax for noise, so noise is supplied as a JSON file
//! next to the circuit:
//!
//! ```json
//! {
//!   "global": { "kind": "depolarizing", "epsilon": 0.05 },
//!   "overrides": [
//!     { "instruction": 3, "slot": 0, "kind": "dephasing", "epsilon": 0.2 },
//!     { "instruction": 3, "slot": 1, "kind": "none" }
//!   ]
//! }
//! ```
//!
//! `instruction` indexes the flattened instruction list (after whole-register
//! expansion). An override starts from the global channel on every slot of
//! that gate and replaces the named slot; `"none"` leaves the slot noiseless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Circuit, Error, NoiseChannel, NoiseKind, NoiseSpec, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub global: Option<NoiseChannel>,
    #[serde(default)]
    pub overrides: Vec<NoiseOverride>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseOverride {
    pub instruction: usize,
    pub slot: usize,
    pub kind: String,
    #[serde(default)]
    pub epsilon: f64,
}

impl NoiseOverride {
    fn channel(&self) -> Result<Option<NoiseChannel>> {
        if self.kind.eq_ignore_ascii_case("none") {
            return Ok(None);
        }
        let kind: NoiseKind = self.kind.parse()?;
        NoiseChannel::named(kind, self.epsilon).map(Some)
    }
}

impl NoiseConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Returns a copy of `circuit` with this noise attached.
    pub fn apply(&self, circuit: &Circuit) -> Result<Circuit> {
        let mut noisy = circuit.clone();
        noisy.set_global_noise(self.global.clone());
        for o in &self.overrides {
            let Some(instruction) = circuit.instructions().get(o.instruction) else {
                return Err(Error::InvalidConfig(format!(
                    "override targets instruction {} but the circuit has {}",
                    o.instruction,
                    circuit.len()
                )));
            };
            let Some(app) = instruction.as_gate() else {
                return Err(Error::InvalidConfig(format!(
                    "instruction {} is a measurement; noise attaches to gates only",
                    o.instruction
                )));
            };
            if o.slot >= app.gate.arity() {
                return Err(Error::NoiseArity { slots: o.slot + 1, arity: app.gate.arity() });
            }
            let mut spec = noisy.effective_noise(o.instruction).unwrap_or_else(NoiseSpec::new);
            spec.set_slot(o.slot, o.channel()?)?;
            noisy.set_noise(o.instruction, Some(spec))?;
        }
        Ok(noisy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::make_gate;

    fn bell() -> Circuit {
        let mut c = Circuit::new(2, 0).unwrap();
        c.gate(make_gate("H", &[]).unwrap(), &[0]).unwrap();
        c.gate(make_gate("CX", &[]).unwrap(), &[0, 1]).unwrap();
        c
    }

    #[test]
    fn overrides_layer_over_global() {
        let cfg = NoiseConfig::from_json(
            r#"{"global":{"kind":"depolarizing","epsilon":0.05},
                "overrides":[{"instruction":1,"slot":1,"kind":"dephasing","epsilon":0.2},
                             {"instruction":0,"slot":0,"kind":"none"}]}"#,
        )
        .unwrap();
        let noisy = cfg.apply(&bell()).unwrap();
        let global = NoiseChannel::depolarizing(0.05).unwrap();
        assert_eq!(noisy.global_noise(), Some(&global));
        let cx = noisy.effective_noise(1).unwrap();
        assert_eq!(cx.slot(0), Some(&global));
        assert_eq!(cx.slot(1), Some(&NoiseChannel::dephasing(0.2).unwrap()));
        assert!(noisy.effective_noise(0).unwrap().is_empty());
    }

    #[test]
    fn bad_overrides() {
        let slot = r#"{"overrides":[{"instruction":0,"slot":1,"kind":"dephasing","epsilon":0.2}]}"#;
        assert!(NoiseConfig::from_json(slot).unwrap().apply(&bell()).is_err());
        let index = r#"{"overrides":[{"instruction":5,"slot":0,"kind":"dephasing","epsilon":0.2}]}"#;
        assert!(NoiseConfig::from_json(index).unwrap().apply(&bell()).is_err());
        let kind = r#"{"overrides":[{"instruction":0,"slot":0,"kind":"bitflip","epsilon":0.2}]}"#;
        assert!(NoiseConfig::from_json(kind).unwrap().apply(&bell()).is_err());
        assert!(NoiseConfig::from_json(r#"{"globl":null}"#).is_err());
    }
}
