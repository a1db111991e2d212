use std::f64::consts::{FRAC_PI_2, PI};

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind, Pos};
use crate::circuit::{Condition, GateApp, Instruction, Register};
use crate::{Circuit, Gate, GateKind};

type PResult<T> = Result<T, ParseError>;

/// How a source-level gate name maps onto the gate set.
#[derive(Clone, Copy)]
enum Lowering {
    Direct(GateKind),
    /// `u1(λ) = U3(0, 0, λ)`
    U1,
    /// `u2(φ, λ) = U3(π/2, φ, λ)`
    U2,
}

impl Lowering {
    fn param_count(self) -> usize {
        match self {
            Lowering::Direct(k) => k.param_count(),
            Lowering::U1 => 1,
            Lowering::U2 => 2,
        }
    }

    fn arity(self) -> usize {
        match self {
            Lowering::Direct(k) => k.arity(),
            _ => 1,
        }
    }

    fn lower(self, p: &[f64]) -> (GateKind, Vec<f64>) {
        match self {
            Lowering::Direct(k) => (k, p.to_vec()),
            Lowering::U1 => (GateKind::U3, vec![0.0, 0.0, p[0]]),
            Lowering::U2 => (GateKind::U3, vec![FRAC_PI_2, p[0], p[1]]),
        }
    }
}

fn builtin_gate(name: &str) -> Option<Lowering> {
    match name {
        "U" => Some(Lowering::Direct(GateKind::U3)),
        "CX" => Some(Lowering::Direct(GateKind::CX)),
        _ => None,
    }
}

fn qelib_gate(name: &str) -> Option<Lowering> {
    use GateKind::*;
    Some(Lowering::Direct(match name {
        "id" => I,
        "x" => X,
        "y" => Y,
        "z" => Z,
        "h" => H,
        "s" => S,
        "sdg" => Sdg,
        "t" => T,
        "tdg" => Tdg,
        "rx" => RX,
        "ry" => RY,
        "rz" => RZ,
        "u3" | "u" => U3,
        "cx" => CX,
        "cz" => CZ,
        "swap" => SWAP,
        "u1" => return Some(Lowering::U1),
        "u2" => return Some(Lowering::U2),
        _ => return None,
    }))
}

/// Known `qelib1.inc` gates outside the supported set.
const UNSUPPORTED_QELIB: &[&str] = &[
    "ccx", "cswap", "cy", "ch", "crz", "cu1", "cu3", "rzz", "rxx", "sx", "sxdg", "cp", "p",
];

/// A register operand: either one element or the whole register.
#[derive(Clone, Copy)]
struct Operand {
    offset: usize,
    size: usize,
    index: Option<usize>,
    pos: Pos,
}

impl Operand {
    fn width(&self) -> usize {
        if self.index.is_some() {
            1
        } else {
            self.size
        }
    }

    fn element(&self, k: usize) -> usize {
        self.offset + self.index.unwrap_or(k)
    }
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    qelib: bool,
    instructions: Vec<Instruction>,
}

fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::Syntax, pos, message)
}

fn semantic(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::Semantic, pos, message)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<Pos> {
        let t = self.next();
        if t.tok == want {
            Ok(t.pos)
        } else {
            Err(syntax(t.pos, format!("expected {}, found {}", want.describe(), t.tok.describe())))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(syntax(t.pos, format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn int(&mut self) -> PResult<(u64, Pos)> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => Ok((v, t.pos)),
            other => Err(syntax(t.pos, format!("expected integer, found {}", other.describe()))),
        }
    }

    fn program(&mut self) -> PResult<()> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            self.header()?;
        }
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        Ok(())
    }

    fn header(&mut self) -> PResult<()> {
        self.next();
        let t = self.next();
        let version = match t.tok {
            Tok::Real(v) => v,
            Tok::Int(v) => v as f64,
            other => {
                return Err(syntax(t.pos, format!("expected version number, found {}", other.describe())))
            }
        };
        if version.trunc() != 2.0 {
            return Err(semantic(
                t.pos,
                format!("OpenQASM {version} is not supported; only version 2.0 is accepted"),
            ));
        }
        self.expect(Tok::Semi)?;
        Ok(())
    }

    fn statement(&mut self) -> PResult<()> {
        let t = self.peek().clone();
        let Tok::Ident(word) = &t.tok else {
            return Err(syntax(t.pos, format!("expected a statement, found {}", t.tok.describe())));
        };
        match word.as_str() {
            "OPENQASM" => Err(semantic(t.pos, "the OPENQASM header must come first")),
            "include" => self.include(),
            "qreg" | "creg" => self.declaration(word == "qreg"),
            "measure" => {
                self.next();
                self.measure()
            }
            "barrier" => {
                self.next();
                self.operand_list(true)?;
                self.expect(Tok::Semi)?;
                Ok(())
            }
            "if" => self.conditional(),
            "gate" | "opaque" => {
                Err(semantic(t.pos, format!("`{word}` definitions are not supported")))
            }
            "reset" => Err(semantic(t.pos, "`reset` is not supported")),
            _ => self.gate_application(None),
        }
    }

    fn include(&mut self) -> PResult<()> {
        self.next();
        let t = self.next();
        let Tok::Str(file) = t.tok else {
            return Err(syntax(t.pos, format!("expected file name, found {}", t.tok.describe())));
        };
        if file != "qelib1.inc" {
            return Err(semantic(t.pos, format!("cannot include `{file}`; only qelib1.inc is known")));
        }
        self.qelib = true;
        self.expect(Tok::Semi)?;
        Ok(())
    }

    fn declaration(&mut self, quantum: bool) -> PResult<()> {
        self.next();
        let (name, pos) = self.ident()?;
        self.expect(Tok::LBracket)?;
        let (size, size_pos) = self.int()?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::Semi)?;
        if size == 0 {
            return Err(semantic(size_pos, format!("register `{name}` has size 0")));
        }
        if self.qregs.iter().chain(&self.cregs).any(|r| r.name == name) {
            return Err(semantic(pos, format!("register `{name}` is already declared")));
        }
        let regs = if quantum { &mut self.qregs } else { &mut self.cregs };
        let offset = regs.iter().map(|r| r.size).sum::<usize>();
        let size = usize::try_from(size)
            .ok()
            .filter(|s| offset.checked_add(*s).is_some_and(|t| t <= 1 << 20))
            .ok_or_else(|| semantic(size_pos, "register is too large"))?;
        regs.push(Register { name, offset, size });
        Ok(())
    }

    /// `name` or `name[index]` referring to a declared register.
    fn operand(&mut self, quantum: bool) -> PResult<Operand> {
        let (name, pos) = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let Some(reg) = regs.iter().find(|r| r.name == name) else {
            let what = if quantum { "qreg" } else { "creg" };
            return Err(semantic(pos, format!("`{name}` is not a declared {what}")));
        };
        let (offset, size) = (reg.offset, reg.size);
        let mut index = None;
        if self.peek().tok == Tok::LBracket {
            self.next();
            let (i, ipos) = self.int()?;
            self.expect(Tok::RBracket)?;
            if i >= size as u64 {
                return Err(semantic(ipos, format!("index {i} out of range for `{name}[{size}]`")));
            }
            index = Some(i as usize);
        }
        Ok(Operand { offset, size, index, pos })
    }

    fn operand_list(&mut self, quantum: bool) -> PResult<Vec<Operand>> {
        let mut ops = vec![self.operand(quantum)?];
        while self.peek().tok == Tok::Comma {
            self.next();
            ops.push(self.operand(quantum)?);
        }
        Ok(ops)
    }

    fn measure(&mut self) -> PResult<()> {
        let q = self.operand(true)?;
        self.expect(Tok::Arrow)?;
        let c = self.operand(false)?;
        self.expect(Tok::Semi)?;
        if q.width() != c.width() {
            return Err(semantic(
                q.pos,
                format!("cannot measure {} qubit(s) into {} bit(s)", q.width(), c.width()),
            ));
        }
        for k in 0..q.width() {
            self.instructions.push(Instruction::Measure { qubit: q.element(k), clbit: c.element(k) });
        }
        Ok(())
    }

    fn conditional(&mut self) -> PResult<()> {
        let if_pos = self.next().pos;
        self.expect(Tok::LParen)?;
        let (name, pos) = self.ident()?;
        self.expect(Tok::EqEq)?;
        let (value, vpos) = self.int()?;
        self.expect(Tok::RParen)?;
        let Some(reg) = self.cregs.iter().find(|r| r.name == name) else {
            return Err(semantic(pos, format!("`{name}` is not a declared creg")));
        };
        if reg.size != 1 {
            return Err(semantic(
                pos,
                format!("multi-bit comparison on `{name}[{}]` is not supported", reg.size),
            ));
        }
        if value > 1 {
            return Err(semantic(vpos, format!("a 1-bit register cannot equal {value}")));
        }
        let condition = Condition { clbit: reg.offset, value: value as u8 };
        match &self.peek().tok {
            Tok::Ident(w) if matches!(w.as_str(), "measure" | "barrier" | "reset" | "if") => {
                Err(semantic(self.peek().pos, format!("`{w}` cannot be conditioned")))
            }
            Tok::Ident(_) => self.gate_application(Some(condition)),
            other => Err(syntax(if_pos, format!("expected a gate after `if`, found {}", other.describe()))),
        }
    }

    fn lookup_gate(&self, name: &str, pos: Pos) -> PResult<Lowering> {
        if let Some(g) = builtin_gate(name) {
            return Ok(g);
        }
        match qelib_gate(name) {
            Some(g) if self.qelib => Ok(g),
            Some(_) => Err(semantic(pos, format!("gate `{name}` requires `include \"qelib1.inc\";`"))),
            None if UNSUPPORTED_QELIB.contains(&name) => {
                Err(semantic(pos, format!("gate `{name}` is not supported")))
            }
            None => Err(semantic(pos, format!("unknown gate `{name}`"))),
        }
    }

    fn gate_application(&mut self, condition: Option<Condition>) -> PResult<()> {
        let (name, pos) = self.ident()?;
        let lowering = self.lookup_gate(&name, pos)?;
        let mut params = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            if self.peek().tok != Tok::RParen {
                params.push(self.expr()?);
                while self.peek().tok == Tok::Comma {
                    self.next();
                    params.push(self.expr()?);
                }
            }
            self.expect(Tok::RParen)?;
        }
        let operands = self.operand_list(true)?;
        self.expect(Tok::Semi)?;

        if params.len() != lowering.param_count() {
            return Err(semantic(
                pos,
                format!("`{name}` takes {} parameter(s), got {}", lowering.param_count(), params.len()),
            ));
        }
        if operands.len() != lowering.arity() {
            return Err(semantic(
                pos,
                format!("`{name}` acts on {} qubit(s), got {}", lowering.arity(), operands.len()),
            ));
        }
        let (kind, params) = lowering.lower(&params);
        let gate = Gate::new(kind, &params).map_err(|e| semantic(pos, e.to_string()))?;

        // whole-register operands broadcast; all of them must agree in size
        let widths: Vec<usize> =
            operands.iter().filter(|o| o.index.is_none()).map(|o| o.size).collect();
        let reps = widths.first().copied().unwrap_or(1);
        if widths.iter().any(|&w| w != reps) {
            return Err(semantic(pos, "register operands have different sizes"));
        }
        for k in 0..reps {
            let targets: Vec<usize> = operands.iter().map(|o| o.element(k)).collect();
            if targets.len() == 2 && targets[0] == targets[1] {
                return Err(semantic(operands[1].pos, "a gate cannot act twice on the same qubit"));
            }
            self.instructions.push(Instruction::Gate(GateApp {
                gate: gate.clone(),
                targets,
                condition,
                noise: None,
            }));
        }
        Ok(())
    }

    fn expr(&mut self) -> PResult<f64> {
        let mut v = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    v += self.term()?;
                }
                Tok::Minus => {
                    self.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> PResult<f64> {
        let mut v = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    v *= self.unary()?;
                }
                Tok::Slash => {
                    self.next();
                    v /= self.unary()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> PResult<f64> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.next();
                self.unary()
            }
            _ => {
                let base = self.primary()?;
                if self.peek().tok == Tok::Caret {
                    self.next();
                    Ok(base.powf(self.unary()?))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn primary(&mut self) -> PResult<f64> {
        let t = self.next();
        match t.tok {
            Tok::Real(v) => Ok(v),
            Tok::Int(v) => Ok(v as f64),
            Tok::Ident(s) if s == "pi" => Ok(PI),
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Tok::Ident(s) => Err(semantic(t.pos, format!("unsupported identifier `{s}` in expression"))),
            other => Err(syntax(t.pos, format!("expected an expression, found {}", other.describe()))),
        }
    }
}

/// Parses an OpenQASM 2.0 program into a circuit.
pub fn parse_qasm(source: &str) -> Result<Circuit, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        at: 0,
        qregs: Vec::new(),
        cregs: Vec::new(),
        qelib: false,
        instructions: Vec::new(),
    };
    p.program()?;
    let eof = p.peek().pos;
    let num_qubits: usize = p.qregs.iter().map(|r| r.size).sum();
    let num_clbits: usize = p.cregs.iter().map(|r| r.size).sum();
    let internal = |e: crate::Error| semantic(eof, e.to_string());
    if num_qubits == 0 {
        return Err(semantic(eof, "program declares no qubits"));
    }
    let mut circuit = Circuit::new(num_qubits, num_clbits).map_err(internal)?;
    circuit.set_registers(p.qregs, p.cregs).map_err(internal)?;
    for instruction in p.instructions {
        circuit.push(instruction).map_err(internal)?;
    }
    Ok(circuit)
}
