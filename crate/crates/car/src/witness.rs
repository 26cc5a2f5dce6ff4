//! Counterexample traces and AIGER-style witness text.
//!
//! A trace is a sequence of (latch state, input vector) steps: each input
//! vector drives the transition to the following state, and the final
//! step's inputs are the ones under which the bad literal holds there (all
//! zeros when the property does not depend on inputs at that point).
//!
//! The witness text is `1`, the property line `b0`, the initial latch
//! values, one input line per frame and a terminating `.`. The final
//! frame's input line is omitted when it is all zeros; the simulator
//! defaults missing input bits to zero.

use crate::aig::AigModel;
use std::fmt::Write as _;
use thiserror::Error;

/// One step of a counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CexStep {
    pub latches: Vec<bool>,
    pub inputs: Vec<bool>,
}

/// A counterexample: starts at the initial state, each step replays through
/// the transition relation, and the bad literal holds at the last step under
/// its inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CexTrace {
    pub steps: Vec<CexStep>,
}

impl CexTrace {
    pub fn depth(&self) -> usize {
        self.steps.len() - 1
    }
}

/// Replays a trace through the circuit: every transition must match and the
/// final step must satisfy the bad literal.
pub fn trace_is_valid(model: &AigModel, trace: &CexTrace) -> bool {
    let Some(first) = trace.steps.first() else { return false };
    if first.latches != model.reset_state() {
        return false;
    }
    for w in trace.steps.windows(2) {
        let step = model.eval(&w[0].latches, &w[0].inputs);
        if step.next != w[1].latches {
            return false;
        }
    }
    let last = trace.steps.last().unwrap();
    model.eval(&last.latches, &last.inputs).bad
}

/// Parsed witness: initial latch assignment plus per-frame input vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessTrace {
    pub initial: Vec<bool>,
    pub inputs: Vec<Vec<bool>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error("witness must start with status line `1`")]
    BadStatus,
    #[error("expected property line `b0`, got `{0}`")]
    BadProperty(String),
    #[error("line {line}: expected {expected} bits, got {got}")]
    Arity { line: usize, expected: usize, got: usize },
    #[error("line {line}: invalid bit character")]
    BadBit { line: usize },
    #[error("witness not terminated by `.`")]
    Unterminated,
}

fn parse_bits(line: &str, expected: usize, lineno: usize) -> Result<Vec<bool>, WitnessError> {
    if line.len() != expected {
        return Err(WitnessError::Arity { line: lineno, expected, got: line.len() });
    }
    line.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(WitnessError::BadBit { line: lineno }),
        })
        .collect()
}

/// Renders a trace in witness format. Transition inputs are emitted per
/// frame; the final frame's inputs appear only when some bit is set.
pub fn emit_witness(model: &AigModel, trace: &CexTrace) -> String {
    let wt = witness_from_trace(trace);
    let mut out = String::from("1\nb0\n");
    for &b in &wt.initial {
        out.push(if b { '1' } else { '0' });
    }
    out.push('\n');
    for frame in &wt.inputs {
        for &b in frame {
            out.push(if b { '1' } else { '0' });
        }
        out.push('\n');
    }
    let _ = writeln!(out, ".");
    let _ = model;
    out
}

pub fn witness_from_trace(trace: &CexTrace) -> WitnessTrace {
    let initial = trace.steps[0].latches.clone();
    let mut inputs: Vec<Vec<bool>> = trace
        .steps
        .iter()
        .take(trace.steps.len() - 1)
        .map(|s| s.inputs.clone())
        .collect();
    let last = trace.steps.last().unwrap();
    if last.inputs.iter().any(|&b| b) {
        inputs.push(last.inputs.clone());
    }
    WitnessTrace { initial, inputs }
}

/// Parses witness text back into a trace skeleton.
pub fn parse_witness(model: &AigModel, text: &str) -> Result<WitnessTrace, WitnessError> {
    let mut lines = text.lines().enumerate();
    let (_, status) = lines.next().ok_or(WitnessError::BadStatus)?;
    if status != "1" {
        return Err(WitnessError::BadStatus);
    }
    let (_, prop) = lines.next().ok_or_else(|| WitnessError::BadProperty(String::new()))?;
    if prop != "b0" {
        return Err(WitnessError::BadProperty(prop.to_string()));
    }
    let (n, state) = lines.next().ok_or(WitnessError::Unterminated)?;
    let initial = parse_bits(state, model.num_latches(), n + 1)?;
    let mut inputs = Vec::new();
    for (n, line) in lines {
        if line == "." {
            return Ok(WitnessTrace { initial, inputs });
        }
        inputs.push(parse_bits(line, model.num_inputs(), n + 1)?);
    }
    Err(WitnessError::Unterminated)
}

/// True iff stepping the circuit from the witness's initial state under its
/// input vectors reaches the bad literal at or before the final frame.
/// Frames past the recorded input lines read all-zero inputs.
pub fn simulate(model: &AigModel, w: &WitnessTrace) -> Result<bool, WitnessError> {
    if w.initial.len() != model.num_latches() {
        return Err(WitnessError::Arity {
            line: 0,
            expected: model.num_latches(),
            got: w.initial.len(),
        });
    }
    for (k, frame) in w.inputs.iter().enumerate() {
        if frame.len() != model.num_inputs() {
            return Err(WitnessError::Arity {
                line: k + 1,
                expected: model.num_inputs(),
                got: frame.len(),
            });
        }
    }
    let zeros = vec![false; model.num_inputs()];
    let mut state = w.initial.clone();
    for t in 0..=w.inputs.len() {
        let inputs = w.inputs.get(t).unwrap_or(&zeros);
        let step = model.eval(&state, inputs);
        if step.bad {
            return Ok(true);
        }
        state = step.next;
    }
    Ok(false)
}
