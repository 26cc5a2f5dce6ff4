//! AIGER circuit model: parsing, validation, printing and simulation.
//!
//! Both the ASCII (`aag`) and binary (`aig`) formats are supported, including
//! the newer `b` (bad state) section. Justice, fairness and invariant
//! constraint sections are rejected: the checker handles a single safety
//! property. In the binary format the AND section is delta-encoded with
//! 7-bit variable-length integers, decoded here exactly as specified by the
//! AIGER format documents.

use crate::lits::{Cube, Lit, Var};
use std::fmt::Write as _;
use thiserror::Error;

/// A latch: current-state literal, next-state function literal, reset value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Latch {
    pub state: u32,
    pub next: u32,
    pub reset: bool,
}

/// An AND gate `lhs = rhs0 & rhs1` over AIGER literals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct And {
    pub lhs: u32,
    pub rhs0: u32,
    pub rhs1: u32,
}

/// A parsed and validated AIGER circuit with a single safety property.
///
/// All fields hold raw AIGER literals: `2*var + sign`, literal 0 is constant
/// false and literal 1 constant true. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AigModel {
    pub max_var: u32,
    pub inputs: Vec<u32>,
    pub latches: Vec<Latch>,
    pub ands: Vec<And>,
    /// The bad-state literal: from the single `b` entry, or from the single
    /// output of a format-1.0 file.
    pub bad: u32,
    /// Raw symbol table lines, kept for labeling only.
    pub symbols: Vec<String>,
}

/// How the property decides before any reachability work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    /// Bad literal is constant false: nothing to reach.
    ConstFalse,
    /// Bad literal is constant true: violated at step 0.
    ConstTrue,
    /// Bad literal over a circuit variable.
    Lit(Lit),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed header: {0}")]
    Header(String),
    #[error("{0} sections are not supported (single safety property only)")]
    Unsupported(&'static str),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: literal {lit} out of range for max variable {max_var}")]
    LiteralRange { line: usize, lit: u64, max_var: u32 },
    #[error("line {line}: AND gates must be topologically ordered (lhs > rhs0 >= rhs1)")]
    NotTopological { line: usize },
    #[error("variable {0} defined more than once")]
    Redefined(u32),
    #[error("variable {0} is neither an input, a latch nor an AND gate")]
    Undefined(u32),
    #[error("no property: the file declares neither a bad entry nor a single output")]
    NoProperty,
    #[error("multiple properties: {0} bad entries / outputs; exactly one is required")]
    MultipleProperties(usize),
    #[error("line {line}: latch reset must be 0 or 1")]
    BadReset { line: usize },
    #[error("unexpected end of file")]
    Eof,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0, line: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    /// Next text line, without the terminator. `\r\n` is tolerated.
    fn next_line(&mut self) -> Result<&'a str, ParseError> {
        if self.at_end() {
            return Err(ParseError::Eof);
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
            self.pos += 1;
        }
        let mut end = self.pos;
        if self.pos < self.bytes.len() {
            self.pos += 1;
        }
        if end > start && self.bytes[end - 1] == b'\r' {
            end -= 1;
        }
        self.line += 1;
        std::str::from_utf8(&self.bytes[start..end]).map_err(|_| ParseError::Syntax {
            line: self.line,
            msg: "invalid UTF-8".into(),
        })
    }

    fn next_byte(&mut self) -> Result<u8, ParseError> {
        if self.at_end() {
            return Err(ParseError::Eof);
        }
        let b = self.bytes[self.pos];
        self.pos += 1;
        Ok(b)
    }

    /// Variable-length 7-bit delta used by the binary AND section.
    fn next_delta(&mut self) -> Result<u64, ParseError> {
        let mut x = 0u64;
        let mut shift = 0u32;
        loop {
            let b = self.next_byte()?;
            if shift >= 63 {
                return Err(ParseError::Syntax {
                    line: self.line,
                    msg: "binary delta overflows".into(),
                });
            }
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
            shift += 7;
        }
    }
}

fn parse_fields(line: &str, want: usize, lineno: usize) -> Result<Vec<u64>, ParseError> {
    let fields: Result<Vec<u64>, _> = line.split_whitespace().map(str::parse).collect();
    let fields = fields.map_err(|_| ParseError::Syntax {
        line: lineno,
        msg: format!("expected {want} number(s), got `{line}`"),
    })?;
    if fields.len() != want {
        return Err(ParseError::Syntax {
            line: lineno,
            msg: format!("expected {want} number(s), got {}", fields.len()),
        });
    }
    Ok(fields)
}

struct Header {
    binary: bool,
    m: u64,
    i: u64,
    l: u64,
    o: u64,
    a: u64,
    b: u64,
}

fn parse_header(line: &str) -> Result<Header, ParseError> {
    let mut words = line.split_whitespace();
    let magic = words.next().ok_or_else(|| ParseError::Header("empty".into()))?;
    let binary = match magic {
        "aag" => false,
        "aig" => true,
        other => return Err(ParseError::Header(format!("unknown magic `{other}`"))),
    };
    let nums: Result<Vec<u64>, _> = words.map(str::parse).collect();
    let nums = nums.map_err(|_| ParseError::Header(format!("non-numeric field in `{line}`")))?;
    if nums.len() < 5 || nums.len() > 9 {
        return Err(ParseError::Header(format!(
            "expected 5 to 9 size fields, got {}",
            nums.len()
        )));
    }
    let get = |idx: usize| nums.get(idx).copied().unwrap_or(0);
    if get(6) > 0 {
        return Err(ParseError::Unsupported("invariant constraint"));
    }
    if get(7) > 0 {
        return Err(ParseError::Unsupported("justice"));
    }
    if get(8) > 0 {
        return Err(ParseError::Unsupported("fairness"));
    }
    Ok(Header {
        binary,
        m: nums[0],
        i: nums[1],
        l: nums[2],
        o: nums[3],
        a: nums[4],
        b: get(5),
    })
}

impl AigModel {
    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_latches(&self) -> usize {
        self.latches.len()
    }

    /// Parses an `aag` or `aig` file and validates every model invariant.
    pub fn parse(bytes: &[u8]) -> Result<AigModel, ParseError> {
        let mut cur = Cursor::new(bytes);
        let header = parse_header(cur.next_line()?)?;
        let h = &header;
        if h.m > u32::MAX as u64 / 2 - 1 {
            return Err(ParseError::Header("max variable too large".into()));
        }
        // Inputs, latches and gates partition 1..=M, so the sizes must add
        // up; this also bounds every allocation below.
        if h.i + h.l + h.a != h.m {
            return Err(ParseError::Header(format!(
                "size fields inconsistent: {} inputs + {} latches + {} gates != {} variables",
                h.i, h.l, h.a, h.m
            )));
        }
        let max_var = h.m as u32;
        let max_lit = u64::from(max_var) * 2 + 1;
        let check_lit = |lit: u64, line: usize| -> Result<u32, ParseError> {
            if lit > max_lit {
                Err(ParseError::LiteralRange { line, lit, max_var })
            } else {
                Ok(lit as u32)
            }
        };

        let mut inputs = Vec::with_capacity(h.i as usize);
        let mut latches = Vec::with_capacity(h.l as usize);
        if h.binary {
            for k in 0..h.i {
                inputs.push(2 * (k as u32 + 1));
            }
        } else {
            for _ in 0..h.i {
                let lineno = cur.line + 1;
                let f = parse_fields(cur.next_line()?, 1, lineno)?;
                let lit = check_lit(f[0], lineno)?;
                if lit < 2 || lit & 1 == 1 {
                    return Err(ParseError::Syntax {
                        line: lineno,
                        msg: format!("input literal {lit} must be positive and non-constant"),
                    });
                }
                inputs.push(lit);
            }
        }
        for k in 0..h.l {
            let lineno = cur.line + 1;
            let line = cur.next_line()?;
            let nfields = line.split_whitespace().count();
            let (state, rest) = if h.binary {
                (2 * (h.i as u32 + k as u32 + 1), line)
            } else {
                let mut words = line.splitn(2, char::is_whitespace);
                let s: u64 = words
                    .next()
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| ParseError::Syntax {
                        line: lineno,
                        msg: format!("bad latch line `{line}`"),
                    })?;
                let s = check_lit(s, lineno)?;
                if s < 2 || s & 1 == 1 {
                    return Err(ParseError::Syntax {
                        line: lineno,
                        msg: format!("latch literal {s} must be positive and non-constant"),
                    });
                }
                (s, words.next().unwrap_or(""))
            };
            let want = if h.binary { nfields } else { nfields - 1 };
            if !(1..=2).contains(&want) {
                return Err(ParseError::Syntax {
                    line: lineno,
                    msg: format!("bad latch line `{line}`"),
                });
            }
            let f = parse_fields(rest, want, lineno)?;
            let next = check_lit(f[0], lineno)?;
            let reset = match f.get(1).copied().unwrap_or(0) {
                0 => false,
                1 => true,
                _ => return Err(ParseError::BadReset { line: lineno }),
            };
            latches.push(Latch { state, next, reset });
        }

        // The o/b counts are only bounded by the file itself; reading hits
        // end-of-file long before any oversized claim matters.
        let mut outputs = Vec::with_capacity(h.o.min(1024) as usize);
        for _ in 0..h.o {
            let lineno = cur.line + 1;
            let f = parse_fields(cur.next_line()?, 1, lineno)?;
            outputs.push(check_lit(f[0], lineno)?);
        }
        let mut bads = Vec::with_capacity(h.b.min(1024) as usize);
        for _ in 0..h.b {
            let lineno = cur.line + 1;
            let f = parse_fields(cur.next_line()?, 1, lineno)?;
            bads.push(check_lit(f[0], lineno)?);
        }

        let mut ands = Vec::with_capacity(h.a as usize);
        if h.binary {
            for k in 0..h.a {
                let lhs = 2 * (h.i + h.l + k + 1);
                let lineno = cur.line;
                let delta0 = cur.next_delta()?;
                if delta0 == 0 || delta0 > lhs {
                    return Err(ParseError::NotTopological { line: lineno });
                }
                let rhs0 = lhs - delta0;
                let delta1 = cur.next_delta()?;
                if delta1 > rhs0 {
                    return Err(ParseError::NotTopological { line: lineno });
                }
                let rhs1 = rhs0 - delta1;
                ands.push(And {
                    lhs: check_lit(lhs, lineno)?,
                    rhs0: rhs0 as u32,
                    rhs1: rhs1 as u32,
                });
            }
        } else {
            for _ in 0..h.a {
                let lineno = cur.line + 1;
                let f = parse_fields(cur.next_line()?, 3, lineno)?;
                let (lhs, rhs0, rhs1) = (
                    check_lit(f[0], lineno)?,
                    check_lit(f[1], lineno)?,
                    check_lit(f[2], lineno)?,
                );
                if lhs < 2 || lhs & 1 == 1 || lhs <= rhs0 || rhs0 < rhs1 {
                    return Err(ParseError::NotTopological { line: lineno });
                }
                ands.push(And { lhs, rhs0, rhs1 });
            }
        }

        // Symbol table; a line consisting of `c` starts the comment section.
        let mut symbols = Vec::new();
        while !cur.at_end() {
            let lineno = cur.line + 1;
            let line = cur.next_line()?;
            if line == "c" {
                break;
            }
            if line.is_empty() && cur.at_end() {
                break;
            }
            let ok = line
                .strip_prefix(['i', 'l', 'o', 'b'])
                .map(|rest| {
                    let digits = rest.chars().take_while(char::is_ascii_digit).count();
                    digits > 0 && rest[digits..].starts_with(' ')
                })
                .unwrap_or(false);
            if !ok {
                return Err(ParseError::Syntax {
                    line: lineno,
                    msg: format!("unexpected trailing line `{line}`"),
                });
            }
            symbols.push(line.to_string());
        }

        let bad = match (bads.len(), outputs.len()) {
            (1, _) => bads[0],
            (0, 1) => outputs[0],
            (0, 0) => return Err(ParseError::NoProperty),
            (0, n) => return Err(ParseError::MultipleProperties(n)),
            (n, _) => return Err(ParseError::MultipleProperties(n)),
        };

        let model = AigModel {
            max_var,
            inputs,
            latches,
            ands,
            bad,
            symbols,
        };
        model.validate_cover()?;
        Ok(model)
    }

    /// Inputs, latches and AND gates must define pairwise disjoint variables
    /// that jointly cover `1..=max_var`.
    fn validate_cover(&self) -> Result<(), ParseError> {
        let mut defined = vec![false; self.max_var as usize + 1];
        let mut define = |lit: u32| -> Result<(), ParseError> {
            let var = lit >> 1;
            if var == 0 || var > self.max_var {
                return Err(ParseError::Undefined(var));
            }
            if defined[var as usize] {
                return Err(ParseError::Redefined(var));
            }
            defined[var as usize] = true;
            Ok(())
        };
        for &i in &self.inputs {
            define(i)?;
        }
        for l in &self.latches {
            define(l.state)?;
        }
        for a in &self.ands {
            define(a.lhs)?;
        }
        if let Some(var) = (1..=self.max_var).find(|&v| !defined[v as usize]) {
            return Err(ParseError::Undefined(var));
        }
        Ok(())
    }

    /// Canonical ASCII form; parsing it back yields an equal model.
    pub fn to_aag(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "aag {} {} {} 0 {} 1",
            self.max_var,
            self.inputs.len(),
            self.latches.len(),
            self.ands.len()
        );
        for &i in &self.inputs {
            let _ = writeln!(out, "{i}");
        }
        for l in &self.latches {
            if l.reset {
                let _ = writeln!(out, "{} {} 1", l.state, l.next);
            } else {
                let _ = writeln!(out, "{} {}", l.state, l.next);
            }
        }
        let _ = writeln!(out, "{}", self.bad);
        for a in &self.ands {
            let _ = writeln!(out, "{} {} {}", a.lhs, a.rhs0, a.rhs1);
        }
        for s in &self.symbols {
            let _ = writeln!(out, "{s}");
        }
        out
    }

    /// The single initial state: one literal per latch, polarity from reset.
    pub fn initial_cube(&self) -> Cube {
        self.latches
            .iter()
            .map(|l| Lit::new(Var(l.state >> 1), !l.reset))
            .collect()
    }

    /// The property in checker variable space.
    pub fn property(&self) -> Property {
        match self.bad {
            0 => Property::ConstFalse,
            1 => Property::ConstTrue,
            lit => Property::Lit(Lit::new(Var(lit >> 1), lit & 1 == 1)),
        }
    }

    /// One step of concrete simulation: gate evaluation plus latch update.
    pub fn eval(&self, latches: &[bool], inputs: &[bool]) -> SimStep {
        assert_eq!(latches.len(), self.latches.len(), "latch arity mismatch");
        assert_eq!(inputs.len(), self.inputs.len(), "input arity mismatch");
        let mut values = vec![false; self.max_var as usize + 1];
        for (k, &lit) in self.inputs.iter().enumerate() {
            values[(lit >> 1) as usize] = inputs[k];
        }
        for (k, l) in self.latches.iter().enumerate() {
            values[(l.state >> 1) as usize] = latches[k];
        }
        let lit_val = |values: &[bool], lit: u32| values[(lit >> 1) as usize] ^ (lit & 1 == 1);
        for a in &self.ands {
            values[(a.lhs >> 1) as usize] =
                lit_val(&values, a.rhs0) && lit_val(&values, a.rhs1);
        }
        SimStep {
            bad: lit_val(&values, self.bad),
            next: self
                .latches
                .iter()
                .map(|l| lit_val(&values, l.next))
                .collect(),
        }
    }

    /// Reset values of all latches as a bit vector.
    pub fn reset_state(&self) -> Vec<bool> {
        self.latches.iter().map(|l| l.reset).collect()
    }
}

/// Result of evaluating the circuit for one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimStep {
    pub bad: bool,
    pub next: Vec<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOGGLER: &str = "aag 1 0 1 1 0\n2 3\n2\n";

    #[test]
    fn parse_constant_false_output() {
        let m = AigModel::parse(b"aag 0 0 0 1 0\n0\n").unwrap();
        assert_eq!(m.max_var, 0);
        assert_eq!(m.bad, 0);
        assert_eq!(m.property(), Property::ConstFalse);
        assert_eq!(m.initial_cube().len(), 0);
    }

    #[test]
    fn parse_toggler() {
        let m = AigModel::parse(TOGGLER.as_bytes()).unwrap();
        assert_eq!(m.max_var, 1);
        assert_eq!(
            m.latches,
            vec![Latch { state: 2, next: 3, reset: false }]
        );
        assert_eq!(m.bad, 2);
        assert_eq!(m.initial_cube(), Cube::from_dimacs(&[-1]));
        assert_eq!(m.property(), Property::Lit(Lit::from_dimacs(1)));
    }

    #[test]
    fn binary_toggler_equals_ascii() {
        // aig 1 0 1 1 0: implicit latch literal 2, next 3, one output 2,
        // empty AND section. Hand-assembled from the format definition.
        let bin = b"aig 1 0 1 1 0\n3\n2\n";
        let from_bin = AigModel::parse(bin).unwrap();
        let from_ascii = AigModel::parse(TOGGLER.as_bytes()).unwrap();
        assert_eq!(from_bin, from_ascii);
    }

    #[test]
    fn binary_and_section_decodes_exactly() {
        // aig 3 2 0 1 1 with gate 6 = 4 & 2: deltas 2 and 2.
        let mut bytes = b"aig 3 2 0 1 1\n6\n".to_vec();
        bytes.extend_from_slice(&[2, 2]);
        let m = AigModel::parse(&bytes).unwrap();
        assert_eq!(m.ands, vec![And { lhs: 6, rhs0: 4, rhs1: 2 }]);
        assert_eq!(m.inputs, vec![2, 4]);
        assert_eq!(m.bad, 6);
    }

    #[test]
    fn multi_byte_delta() {
        // Gate literal 514 = 2*(256+1) needs a two-byte delta for rhs0 = 2:
        // delta0 = 512 = 0x80 0x04.
        let mut bytes = b"aig 257 256 0 1 1\n514\n".to_vec();
        bytes.extend_from_slice(&[0x80, 0x04, 0x00]);
        let m = AigModel::parse(&bytes).unwrap();
        assert_eq!(m.ands, vec![And { lhs: 514, rhs0: 2, rhs1: 2 }]);
    }

    #[test]
    fn reset_values_read_back() {
        let m = AigModel::parse(b"aag 2 0 2 0 0 1\n2 2\n4 4 1\n2\n").unwrap();
        assert_eq!(m.initial_cube(), Cube::from_dimacs(&[-1, 2]));
        assert_eq!(m.reset_state(), vec![false, true]);
    }

    #[test]
    fn bad_line_takes_priority_and_multiple_error() {
        let m = AigModel::parse(b"aag 1 0 1 0 0 1\n2 3\n2\n").unwrap();
        assert_eq!(m.bad, 2);
        let err = AigModel::parse(b"aag 1 0 1 2 0\n2 3\n2\n3\n").unwrap_err();
        assert!(matches!(err, ParseError::MultipleProperties(2)));
        let err = AigModel::parse(b"aag 1 0 1 0 0\n2 3\n").unwrap_err();
        assert!(matches!(err, ParseError::NoProperty));
        let err = AigModel::parse(b"aag 1 0 1 0 0 2\n2 3\n2\n3\n").unwrap_err();
        assert!(matches!(err, ParseError::MultipleProperties(2)));
    }

    #[test]
    fn rejects_unsupported_sections() {
        let err = AigModel::parse(b"aag 1 0 1 1 0 0 1\n2 3\n2\n2\n").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported("invariant constraint")));
        let err = AigModel::parse(b"aag 1 0 1 1 0 0 0 1\n2 3\n2\n2\n").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported("justice")));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            AigModel::parse(b"agg 0 0 0 1 0\n0\n").unwrap_err(),
            ParseError::Header(_)
        ));
        assert!(matches!(
            AigModel::parse(b"aag 1 0 1 1 0\n2 9\n2\n").unwrap_err(),
            ParseError::LiteralRange { lit: 9, .. }
        ));
        // Gate referencing itself: lhs must exceed rhs0.
        assert!(matches!(
            AigModel::parse(b"aag 2 1 0 1 1\n2\n4\n4 4 2\n").unwrap_err(),
            ParseError::NotTopological { .. }
        ));
        // Operands swapped: rhs0 must be >= rhs1.
        assert!(matches!(
            AigModel::parse(b"aag 2 1 0 1 1\n2\n4\n4 2 4\n").unwrap_err(),
            ParseError::NotTopological { .. }
        ));
        // Variable 2 never defined: the size fields cannot add up.
        assert!(matches!(
            AigModel::parse(b"aag 2 1 0 1 0\n2\n2\n").unwrap_err(),
            ParseError::Header(_)
        ));
        // Same literal defined as two inputs.
        assert!(matches!(
            AigModel::parse(b"aag 2 2 0 1 0\n2\n2\n4\n").unwrap_err(),
            ParseError::Redefined(1)
        ));
        // Uninitialized latch reset (reset literal = state literal).
        assert!(matches!(
            AigModel::parse(b"aag 1 0 1 1 0\n2 3 2\n2\n").unwrap_err(),
            ParseError::BadReset { .. }
        ));
    }

    #[test]
    fn aag_roundtrip_is_fixpoint() {
        let src = b"aag 3 1 1 1 1\n2\n4 6 1\n6\n6 4 2\ni0 in\nl0 reg\n";
        let m1 = AigModel::parse(src).unwrap();
        let m2 = AigModel::parse(m1.to_aag().as_bytes()).unwrap();
        assert_eq!(m1, m2);
        let m3 = AigModel::parse(m2.to_aag().as_bytes()).unwrap();
        assert_eq!(m2, m3);
    }

    #[test]
    fn toggler_simulation() {
        let m = AigModel::parse(TOGGLER.as_bytes()).unwrap();
        let s0 = m.reset_state();
        let step = m.eval(&s0, &[]);
        assert!(!step.bad);
        assert_eq!(step.next, vec![true]);
        let step2 = m.eval(&step.next, &[]);
        assert!(step2.bad);
        assert_eq!(step2.next, vec![false]);
    }
}
