//! Timing and fidelity sweeps over random circuits, with CSV serialization.

use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::engines::{self, EngineKind, Representation, RunConfig};
use crate::{derive_seed, fidelity, random_circuit, Circuit, Error, NoiseChannel, NoiseKind, Result};

pub const TIMING_HEADER: [&str; 5] = ["engine", "num_qubits", "depth", "seed", "wall_time_seconds"];
pub const FIDELITY_HEADER: [&str; 6] = ["noise", "epsilon", "num_qubits", "depth", "seed", "fidelity"];

/// Median wall time of one engine on one random circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingPoint {
    pub engine: EngineKind,
    pub num_qubits: usize,
    pub depth: usize,
    pub wall_time_seconds: f64,
    /// Seed the circuit was generated from.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityPoint {
    pub noise_kind: NoiseKind,
    pub epsilon: f64,
    pub fidelity: f64,
    pub num_qubits: usize,
    pub depth: usize,
    pub seed: u64,
}

/// Seed of the benchmark circuit for `depth`.
pub fn depth_seed(seed: u64, depth: usize) -> u64 {
    derive_seed(seed, depth as u64)
}

/// Times `engine` on `random_circuit(num_qubits, depth, depth_seed(seed, depth))`
/// for each depth: one warm-up run, then the median of `repetitions` runs.
pub fn bench_depth_sweep(
    num_qubits: usize,
    depths: &[usize],
    engine: EngineKind,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<TimingPoint>> {
    let config = RunConfig::new(engine, Representation::WaveFunction);
    bench_depth_sweep_with(num_qubits, depths, engine, repetitions, seed, |c| {
        engines::run(c, &config).map(|_| ())
    })
}

/// Like [`bench_depth_sweep`], but times an arbitrary runner.
pub fn bench_depth_sweep_with<F>(
    num_qubits: usize,
    depths: &[usize],
    engine: EngineKind,
    repetitions: usize,
    seed: u64,
    mut runner: F,
) -> Result<Vec<TimingPoint>>
where
    F: FnMut(&Circuit) -> Result<()>,
{
    if repetitions == 0 {
        return Err(Error::InvalidConfig("benchmark repetitions must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(depths.len());
    for &depth in depths {
        let circuit_seed = depth_seed(seed, depth);
        let circuit = random_circuit(num_qubits, depth, circuit_seed)?;
        runner(&circuit)?;
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let start = Instant::now();
            runner(&circuit)?;
            times.push(start.elapsed().as_secs_f64());
        }
        points.push(TimingPoint {
            engine,
            num_qubits,
            depth,
            wall_time_seconds: median(&mut times).max(f64::MIN_POSITIVE),
            seed: circuit_seed,
        });
    }
    Ok(points)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fidelity between the noiseless density-matrix output of `circuit` and its
/// output under global `kind` noise, for each strength in `epsilons`.
pub fn noise_fidelities(circuit: &Circuit, kind: NoiseKind, epsilons: &[f64]) -> Result<Vec<f64>> {
    if kind == NoiseKind::Custom {
        return Err(Error::InvalidNoise("a sweep needs a named channel".into()));
    }
    let channels = epsilons
        .iter()
        .map(|&e| NoiseChannel::named(kind, e))
        .collect::<Result<Vec<_>>>()?;
    let config = RunConfig::new(EngineKind::Simple, Representation::Density);
    let mut clean = circuit.clone();
    clean.set_global_noise(None);
    let reference = engines::run(&clean, &config)?.final_state.to_density();
    channels
        .into_par_iter()
        .map(|channel| {
            let noisy = clean.clone().with_global_noise(channel);
            let rho = engines::run(&noisy, &config)?.final_state.to_density();
            fidelity(&reference, &rho)
        })
        .collect()
}

/// Generates one random circuit from `seed` and records its fidelity curve
/// under `kind` noise.
pub fn fidelity_sweep(
    num_qubits: usize,
    depth: usize,
    kind: NoiseKind,
    epsilons: &[f64],
    seed: u64,
) -> Result<Vec<FidelityPoint>> {
    let circuit = random_circuit(num_qubits, depth, seed)?;
    let values = noise_fidelities(&circuit, kind, epsilons)?;
    Ok(epsilons
        .iter()
        .zip(values)
        .map(|(&epsilon, fidelity)| FidelityPoint {
            noise_kind: kind,
            epsilon,
            fidelity,
            num_qubits,
            depth,
            seed,
        })
        .collect())
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_timing_csv<W: Write>(out: W, points: &[TimingPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMING_HEADER)?;
    for p in points {
        w.write_record([
            p.engine.name().to_string(),
            p.num_qubits.to_string(),
            p.depth.to_string(),
            p.seed.to_string(),
            real(p.wall_time_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fidelity_csv<W: Write>(out: W, points: &[FidelityPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIDELITY_HEADER)?;
    for p in points {
        w.write_record([
            p.noise_kind.name().to_string(),
            real(p.epsilon),
            p.num_qubits.to_string(),
            p.depth.to_string(),
            p.seed.to_string(),
            real(p.fidelity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, index: usize, name: &str) -> Result<T> {
    record
        .get(index)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::InvalidConfig(format!("bad `{name}` field in CSV row {:?}", record)))
}

fn check_header(reader: &mut csv::Reader<impl Read>, want: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(want.iter().copied()) {
        return Err(Error::InvalidConfig(format!("unexpected CSV header {:?}", header)));
    }
    Ok(())
}

pub fn read_timing_csv<R: Read>(input: R) -> Result<Vec<TimingPoint>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &TIMING_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(TimingPoint {
                engine: field::<String>(&rec, 0, "engine")?.parse()?,
                num_qubits: field(&rec, 1, "num_qubits")?,
                depth: field(&rec, 2, "depth")?,
                seed: field(&rec, 3, "seed")?,
                wall_time_seconds: field(&rec, 4, "wall_time_seconds")?,
            })
        })
        .collect()
}

pub fn read_fidelity_csv<R: Read>(input: R) -> Result<Vec<FidelityPoint>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &FIDELITY_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(FidelityPoint {
                noise_kind: field::<String>(&rec, 0, "noise")?.parse()?,
                epsilon: field(&rec, 1, "epsilon")?,
                num_qubits: field(&rec, 2, "num_qubits")?,
                depth: field(&rec, 3, "depth")?,
                seed: field(&rec, 4, "seed")?,
                fidelity: field(&rec, 5, "fidelity")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::make_gate;
    use proptest::prelude::*;

    #[test]
    fn stub_runner_gives_one_point() {
        let mut calls = 0;
        let pts = bench_depth_sweep_with(3, &[5], EngineKind::Simple, 3, 1, |_| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(calls, 4);
        assert!(pts[0].wall_time_seconds > 0.0);
    }

    #[test]
    fn zero_repetitions_rejected() {
        assert!(bench_depth_sweep(2, &[1], EngineKind::Simple, 0, 0).is_err());
    }

    #[test]
    fn sweep_circuits_grow_and_are_reproducible() {
        let depths = [5, 10, 15, 20, 25, 30];
        let mut seen = Vec::new();
        let pts = bench_depth_sweep_with(10, &depths, EngineKind::Mps, 1, 9, |c| {
            seen.push(c.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(pts.len(), 6);
        let sizes: Vec<usize> = seen.iter().step_by(2).map(Circuit::len).collect();
        assert!(sizes.windows(2).all(|w| w[0] < w[1]));
        let mut again = Vec::new();
        bench_depth_sweep_with(10, &depths, EngineKind::Mps, 1, 9, |c| {
            again.push(c.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, again);
    }

    #[test]
    fn real_engines_produce_positive_times() {
        for engine in EngineKind::ALL {
            let pts = bench_depth_sweep(4, &[2, 4], engine, 3, 5).unwrap();
            assert!(pts.iter().all(|p| p.wall_time_seconds > 0.0 && p.engine == engine));
        }
    }

    #[test]
    fn zero_noise_has_unit_fidelity() {
        for kind in NoiseKind::NAMED {
            let pts = fidelity_sweep(4, 8, kind, &[0.0], 3).unwrap();
            assert!((pts[0].fidelity - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn amplitude_damping_closed_form() {
        // RY(a) then RX(b) on one qubit; damping acts before each gate, and
        // only the state before RX is excited
        let (a, b, eps) = (1.1f64, 0.7f64, 0.35f64);
        let mut c = Circuit::new(1, 0).unwrap();
        c.gate(make_gate("RY", &[a]).unwrap(), &[0]).unwrap();
        c.gate(make_gate("RX", &[b]).unwrap(), &[0]).unwrap();
        let got = noise_fidelities(&c, NoiseKind::AmplitudeDamping, &[eps]).unwrap()[0];

        // Bloch vector after RY(a): (sin a, 0, cos a)
        // damping: x -> sqrt(1-eps) x, z -> eps + (1-eps) z
        // rotating both by RX(b) preserves their overlap, so F = (1 + r·r') / 2
        let (x, z) = (a.sin(), a.cos());
        let (xd, zd) = ((1.0 - eps).sqrt() * x, eps + (1.0 - eps) * z);
        let want = 0.5 * (1.0 + x * xd + z * zd);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn custom_kind_rejected() {
        assert!(fidelity_sweep(2, 2, NoiseKind::Custom, &[0.1], 0).is_err());
    }

    #[test]
    fn csv_header_and_digits() {
        let p = TimingPoint {
            engine: EngineKind::Mps,
            num_qubits: 10,
            depth: 5,
            wall_time_seconds: 0.1,
            seed: 7,
        };
        let mut buf = Vec::new();
        write_timing_csv(&mut buf, &[p]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "engine,num_qubits,depth,seed,wall_time_seconds\nmps,10,5,7,1.0000000000000001e-1\n");
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_timing_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn timing_csv_round_trips(
            rows in prop::collection::vec((0usize..3, 1usize..30, 0usize..100, any::<u64>(), 1e-9f64..1e3), 0..8)
        ) {
            let points: Vec<TimingPoint> = rows
                .into_iter()
                .map(|(e, n, d, s, t)| TimingPoint {
                    engine: EngineKind::ALL[e],
                    num_qubits: n,
                    depth: d,
                    wall_time_seconds: t,
                    seed: s,
                })
                .collect();
            let mut buf = Vec::new();
            write_timing_csv(&mut buf, &points).unwrap();
            prop_assert_eq!(read_timing_csv(buf.as_slice()).unwrap(), points);
        }

        #[test]
        fn fidelity_csv_round_trips(
            rows in prop::collection::vec((0usize..3, 0.0f64..=1.0, 1usize..9, 0usize..40, any::<u64>(), 0.0f64..=1.0), 0..8)
        ) {
            let points: Vec<FidelityPoint> = rows
                .into_iter()
                .map(|(k, e, n, d, s, f)| FidelityPoint {
                    noise_kind: NoiseKind::NAMED[k],
                    epsilon: e,
                    fidelity: f,
                    num_qubits: n,
                    depth: d,
                    seed: s,
                })
                .collect();
            let mut buf = Vec::new();
            write_fidelity_csv(&mut buf, &points).unwrap();
            prop_assert_eq!(read_fidelity_csv(buf.as_slice()).unwrap(), points);
        }
    }
}
