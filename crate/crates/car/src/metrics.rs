//! Run instrumentation: query timings, core lengths, proof and round
//! accounting, restart events.
//!
//! A "proof" is one full pick-state episode that discharged all of its
//! obligations (the state was shown unable to reach any frame). Episodes cut
//! short by a restart or ended by a counterexample are tagged and excluded
//! from proof averages, which would otherwise be biased by truncation.
//! Timestamps come from the monotonic clock; empty samples are reported as
//! absent rather than zero.

use serde::Serialize;
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryOutcome {
    Sat,
    Unsat,
}

/// How a pick-state episode ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofEnd {
    /// All obligations discharged: a completed proof.
    Discharged,
    /// A counterexample surfaced mid-episode.
    FoundBad,
    /// A restart abandoned the episode.
    Interrupted,
}

#[derive(Clone, Copy, Debug, Default)]
struct ProofRecord {
    queries: u64,
    time: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundRow {
    pub round: u64,
    pub time_s: f64,
    pub u_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartRow {
    pub i_limit: u32,
    pub u_size_after: usize,
    pub frames_fingerprint_before: u64,
    pub frames_fingerprint_after: u64,
}

#[derive(Default)]
pub struct RunStats {
    sat_queries: u64,
    unsat_queries: u64,
    sat_time: Duration,
    unsat_time: Duration,
    uc_lengths: Vec<u32>,
    proofs: Vec<ProofRecord>,
    interrupted_proofs: u64,
    open_proof: Option<ProofRecord>,
    rounds: Vec<RoundRow>,
    restarts: Vec<RestartRow>,
    verdict: Option<String>,
    total_time: Duration,
}

impl RunStats {
    pub fn new() -> Self {
        RunStats::default()
    }

    pub fn record_query(&mut self, outcome: QueryOutcome, wall: Duration, uc_len: Option<usize>) {
        match outcome {
            QueryOutcome::Sat => {
                self.sat_queries += 1;
                self.sat_time += wall;
                debug_assert!(uc_len.is_none());
            }
            QueryOutcome::Unsat => {
                self.unsat_queries += 1;
                self.unsat_time += wall;
                self.uc_lengths
                    .push(uc_len.expect("unsat query without core length") as u32);
            }
        }
        if let Some(p) = self.open_proof.as_mut() {
            p.queries += 1;
            p.time += wall;
        }
    }

    pub fn begin_proof(&mut self) {
        debug_assert!(self.open_proof.is_none());
        self.open_proof = Some(ProofRecord::default());
    }

    pub fn end_proof(&mut self, end: ProofEnd) {
        let Some(p) = self.open_proof.take() else { return };
        match end {
            ProofEnd::Discharged => self.proofs.push(p),
            ProofEnd::Interrupted => self.interrupted_proofs += 1,
            ProofEnd::FoundBad => {}
        }
    }

    pub fn record_round(&mut self, round: u64, time: Duration, u_size: usize) {
        self.rounds.push(RoundRow { round, time_s: time.as_secs_f64(), u_size });
    }

    pub fn record_restart(&mut self, row: RestartRow) {
        self.restarts.push(row);
    }

    pub fn set_verdict(&mut self, verdict: impl Into<String>) {
        self.verdict = Some(verdict.into());
    }

    pub fn set_total_time(&mut self, t: Duration) {
        self.total_time = t;
    }

    pub fn queries(&self) -> u64 {
        self.sat_queries + self.unsat_queries
    }

    pub fn sat_queries(&self) -> u64 {
        self.sat_queries
    }

    pub fn unsat_queries(&self) -> u64 {
        self.unsat_queries
    }

    pub fn restart_rows(&self) -> &[RestartRow] {
        &self.restarts
    }

    pub fn rounds(&self) -> &[RoundRow] {
        &self.rounds
    }

    pub fn avg_uc_length(&self) -> Option<f64> {
        mean(self.uc_lengths.iter().map(|&n| n as f64))
    }

    pub fn avg_sat_calls_per_proof(&self) -> Option<f64> {
        mean(self.proofs.iter().map(|p| p.queries as f64))
    }

    pub fn avg_proof_time_s(&self) -> Option<f64> {
        mean(self.proofs.iter().map(|p| p.time.as_secs_f64()))
    }

    pub fn summarize(&self, meta: &ReportMeta) -> Summary {
        let avg_t = |total: Duration, n: u64| {
            (n > 0).then(|| total.as_secs_f64() / n as f64)
        };
        Summary {
            schema_version: SCHEMA_VERSION,
            clock: "monotonic-ns".to_string(),
            strategy: meta.strategy.clone(),
            model: meta.model.clone(),
            seed: meta.seed,
            verdict: self.verdict.clone().unwrap_or_else(|| "unknown".into()),
            total_time_s: self.total_time.as_secs_f64(),
            queries: self.queries(),
            sat_queries: self.sat_queries,
            unsat_queries: self.unsat_queries,
            avg_sat_time_s: avg_t(self.sat_time, self.sat_queries),
            avg_unsat_time_s: avg_t(self.unsat_time, self.unsat_queries),
            proofs: self.proofs.len() as u64,
            interrupted_proofs: self.interrupted_proofs,
            avg_sat_calls_per_proof: self.avg_sat_calls_per_proof(),
            avg_proof_time_s: self.avg_proof_time_s(),
            avg_uc_length: self.avg_uc_length(),
            restarts: self.restarts.len() as u64,
            rounds: self.rounds.clone(),
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0u64;
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

pub const SCHEMA_VERSION: u32 = 1;

/// Identifies one strategy-on-model run in reports.
#[derive(Clone, Debug, Default)]
pub struct ReportMeta {
    pub strategy: String,
    pub model: String,
    pub seed: u64,
}

/// The quantities one run contributes to the comparison tables.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub clock: String,
    pub strategy: String,
    pub model: String,
    pub seed: u64,
    pub verdict: String,
    pub total_time_s: f64,
    pub queries: u64,
    pub sat_queries: u64,
    pub unsat_queries: u64,
    pub avg_sat_time_s: Option<f64>,
    pub avg_unsat_time_s: Option<f64>,
    pub proofs: u64,
    pub interrupted_proofs: u64,
    pub avg_sat_calls_per_proof: Option<f64>,
    pub avg_proof_time_s: Option<f64>,
    pub avg_uc_length: Option<f64>,
    pub restarts: u64,
    pub rounds: Vec<RoundRow>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Two-section CSV: one summary row, then the per-round table with the
    /// columns (round, time for this round, size of U).
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::new();
        out.push_str(
            "schema_version,clock,strategy,model,seed,verdict,total_time_s,queries,\
             sat_queries,unsat_queries,avg_sat_time_s,avg_unsat_time_s,proofs,\
             interrupted_proofs,avg_sat_calls_per_proof,avg_proof_time_s,avg_uc_length,restarts\n",
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.schema_version,
            self.clock,
            self.strategy,
            self.model,
            self.seed,
            self.verdict,
            self.total_time_s,
            self.queries,
            self.sat_queries,
            self.unsat_queries,
            opt(self.avg_sat_time_s),
            opt(self.avg_unsat_time_s),
            self.proofs,
            self.interrupted_proofs,
            opt(self.avg_sat_calls_per_proof),
            opt(self.avg_proof_time_s),
            opt(self.avg_uc_length),
            self.restarts,
        ));
        out.push_str("round,time_s,u_size\n");
        for r in &self.rounds {
            out.push_str(&format!("{},{},{}\n", r.round, r.time_s, r.u_size));
        }
        out
    }
}
