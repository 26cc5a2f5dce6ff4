//! Command-line front end: parse an AIGER file, run the checker, report the
//! verdict and optionally a witness and metrics.
//!
//! Output follows competition conventions: a single verdict line `0` (safe),
//! `1` (unsafe) or `2` (unknown) on stdout; exit code 20 for safe, 10 for
//! unsafe, 0 for unknown, and 64+ for usage or input errors.

use car::engine::{Budget, CheckOptions, Checker, HybridOptions, Verdict};
use car::frames::PickOrder;
use car::metrics::{ReportMeta, Summary};
use car::witness;
use car::{AigModel, OrderingConfig, Strategy};
use clap::{Parser, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Duration;

const EXIT_SAFE: u8 = 20;
const EXIT_UNSAFE: u8 = 10;
const EXIT_UNKNOWN: u8 = 0;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 66;
const EXIT_INTERNAL: u8 = 70;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Natural,
    Intersection,
    Rotation,
    Combination,
    Local,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Natural => Strategy::Natural,
            StrategyArg::Intersection => Strategy::Intersection,
            StrategyArg::Rotation => Strategy::Rotation,
            StrategyArg::Combination => Strategy::Combination,
            StrategyArg::Local => Strategy::Local,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OnOff {
    On,
    Off,
}

fn parse_duration(s: &str) -> Result<Duration, String> {
    let (num, scale) = if let Some(v) = s.strip_suffix("ms") {
        (v, 1e-3)
    } else if let Some(v) = s.strip_suffix('s') {
        (v, 1.0)
    } else if let Some(v) = s.strip_suffix("min") {
        (v, 60.0)
    } else if let Some(v) = s.strip_suffix('m') {
        (v, 60.0)
    } else if let Some(v) = s.strip_suffix('h') {
        (v, 3600.0)
    } else {
        (s, 1.0)
    };
    let x: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("invalid duration `{s}`"))?;
    if !x.is_finite() || x < 0.0 {
        return Err(format!("invalid duration `{s}`"));
    }
    Ok(Duration::from_secs_f64(x * scale))
}

#[derive(Parser, Debug)]
#[command(
    name = "car",
    version,
    about = "SAT-based safety model checker for AIGER circuits"
)]
struct Cli {
    /// Input circuit, ASCII (`aag`) or binary (`aig`).
    input: PathBuf,

    /// Assumption-ordering strategy.
    #[arg(long, value_enum, default_value_t = StrategyArg::Combination)]
    strategy: StrategyArg,

    /// Recent-core window for the local strategy (>= 1).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    ilimit: u32,

    /// Move each core's conflict literal to its front.
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    promote_conflict: OnOff,

    /// Switch ordering configurations at runtime via restarts.
    #[arg(long)]
    hybrid: bool,

    /// Per-configuration time limit in hybrid mode (e.g. 500ms, 2s).
    #[arg(long, value_parser = parse_duration, default_value = "1s")]
    time_limit: Duration,

    /// Factor applied to the hybrid time limit at every restart (>= 1).
    #[arg(long, default_value_t = 2.0)]
    growth: f64,

    /// Overall wall-clock budget (e.g. 30s, 5min).
    #[arg(long, value_parser = parse_duration)]
    timeout: Option<Duration>,

    /// Memory cap in megabytes (coarse accounting).
    #[arg(long)]
    memory_mb: Option<u64>,

    /// Write the witness here on an unsafe verdict (`-` for stdout).
    #[arg(long)]
    witness: Option<PathBuf>,

    /// Write a metrics report here (`.csv` for CSV, JSON otherwise).
    #[arg(long)]
    metrics: Option<PathBuf>,

    /// Re-parse and simulate the emitted witness before reporting.
    #[arg(long)]
    verify: bool,

    /// Seed recorded in reports; the search itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Run the strategy portfolio concurrently; first definitive verdict
    /// wins and cancels the rest.
    #[arg(long)]
    portfolio: bool,

    /// Try stored states oldest-first within a level.
    #[arg(long)]
    oldest_first: bool,

    /// Validate every blocked cube by exhaustive enumeration (small models).
    #[arg(long)]
    validate: bool,

    /// Print progress lines (key=value) to stderr.
    #[arg(long)]
    diag: bool,

    /// Dump the transition relation as DIMACS and continue.
    #[arg(long)]
    dump_cnf: Option<PathBuf>,

    /// Dump the final frames as DIMACS-like text.
    #[arg(long)]
    dump_frames: Option<PathBuf>,
}

impl Cli {
    fn ordering(&self) -> OrderingConfig {
        OrderingConfig {
            strategy: self.strategy.into(),
            i_limit: self.ilimit,
            promote_conflict: matches!(self.promote_conflict, OnOff::On),
            ..OrderingConfig::default()
        }
    }

    fn budget(&self) -> Budget {
        Budget {
            timeout: self.timeout,
            memory_bytes: self.memory_mb.map(|mb| mb * 1024 * 1024),
        }
    }

    fn strategy_label(&self) -> String {
        if self.hybrid {
            format!("hybrid(local,{})", self.ilimit)
        } else if matches!(self.strategy, StrategyArg::Local) {
            format!("local({})", self.ilimit)
        } else {
            Strategy::from(self.strategy).name().to_string()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    if cli.growth < 1.0 {
        return Err(fail(EXIT_USAGE, "--growth must be at least 1"));
    }
    let bytes = std::fs::read(&cli.input)
        .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", cli.input.display())))?;
    let model = Arc::new(
        AigModel::parse(&bytes)
            .map_err(|e| fail(EXIT_DATA, format!("{}: {e}", cli.input.display())))?,
    );

    if let Some(path) = &cli.dump_cnf {
        let enc = car::encode::encode(&model);
        let mut buf = Vec::new();
        enc.write_dimacs(&mut buf)
            .map_err(|e| fail(EXIT_IO, e.to_string()))?;
        std::fs::write(path, buf).map_err(|e| fail(EXIT_IO, e.to_string()))?;
    }

    let (verdict, summary) = if cli.portfolio {
        run_portfolio(cli, &model)?
    } else {
        run_single(cli, &model, cli.ordering(), cli.hybrid, None)?
    };

    println!(
        "{}",
        match verdict {
            Verdict::Safe { .. } => "0",
            Verdict::Unsafe { .. } => "1",
            Verdict::Unknown { .. } => "2",
        }
    );

    if let Verdict::Unsafe { trace } = &verdict {
        let text = witness::emit_witness(&model, trace);
        if cli.verify {
            let parsed = witness::parse_witness(&model, &text)
                .map_err(|e| fail(EXIT_INTERNAL, format!("witness verification: {e}")))?;
            if witness::simulate(&model, &parsed) != Ok(true) {
                return Err(fail(EXIT_INTERNAL, "witness verification: simulation failed"));
            }
        }
        match &cli.witness {
            Some(p) if p == Path::new("-") => {
                print!("{text}");
            }
            Some(p) => {
                std::fs::write(p, &text).map_err(|e| fail(EXIT_IO, e.to_string()))?;
            }
            None => {}
        }
    }

    if let Some(path) = &cli.metrics {
        let body = if path.extension().is_some_and(|e| e == "csv") {
            summary.to_csv()
        } else {
            summary.to_json()
        };
        std::fs::write(path, body).map_err(|e| fail(EXIT_IO, e.to_string()))?;
    }

    Ok(ExitCode::from(match verdict {
        Verdict::Safe { .. } => EXIT_SAFE,
        Verdict::Unsafe { .. } => EXIT_UNSAFE,
        Verdict::Unknown { .. } => EXIT_UNKNOWN,
    }))
}

fn run_single(
    cli: &Cli,
    model: &Arc<AigModel>,
    ordering: OrderingConfig,
    hybrid: bool,
    cancel: Option<Arc<AtomicBool>>,
) -> Result<(Verdict, Summary), Failure> {
    let opts = CheckOptions {
        ordering,
        hybrid: hybrid.then_some(HybridOptions {
            time_limit: cli.time_limit,
            growth: cli.growth,
        }),
        budget: cli.budget(),
        pick_order: if cli.oldest_first {
            PickOrder::OldestFirst
        } else {
            PickOrder::NewestFirst
        },
        validate_blocks: cli.validate,
        cancel,
        diag: cli.diag.then(|| Box::new(std::io::stderr()) as Box<dyn Write + Send>),
    };
    let mut checker = Checker::new(model.clone(), opts);
    let verdict = checker
        .run()
        .map_err(|e| fail(EXIT_INTERNAL, e.to_string()))?;
    if let Some(path) = &cli.dump_frames {
        let mut buf = Vec::new();
        checker
            .frames()
            .dump(&mut buf)
            .map_err(|e| fail(EXIT_IO, e.to_string()))?;
        std::fs::write(path, buf).map_err(|e| fail(EXIT_IO, e.to_string()))?;
    }
    let meta = ReportMeta {
        strategy: cli.strategy_label(),
        model: cli.input.display().to_string(),
        seed: cli.seed,
    };
    Ok((verdict, checker.stats().summarize(&meta)))
}

/// Independent engines, one per portfolio entry; the first safe or unsafe
/// verdict cancels the rest.
fn run_portfolio(cli: &Cli, model: &Arc<AigModel>) -> Result<(Verdict, Summary), Failure> {
    let entries: Vec<(OrderingConfig, bool, String)> = vec![
        (OrderingConfig::with_strategy(Strategy::Combination), false, "combination".into()),
        (OrderingConfig::with_strategy(Strategy::Natural), false, "natural".into()),
        (OrderingConfig::with_strategy(Strategy::Intersection), false, "intersection".into()),
        (OrderingConfig::with_strategy(Strategy::Rotation), false, "rotation".into()),
        (
            OrderingConfig { i_limit: 2, ..OrderingConfig::with_strategy(Strategy::Local) },
            false,
            "local(2)".into(),
        ),
        (
            OrderingConfig { i_limit: 3, ..OrderingConfig::with_strategy(Strategy::Local) },
            false,
            "local(3)".into(),
        ),
        (OrderingConfig::with_strategy(Strategy::Combination), true, "hybrid".into()),
    ];
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let mut handles = Vec::new();
    for (ordering, hybrid, label) in entries {
        let tx = tx.clone();
        let cancel = cancel.clone();
        let model = model.clone();
        let opts = CheckOptions {
            ordering,
            hybrid: hybrid.then_some(HybridOptions {
                time_limit: cli.time_limit,
                growth: cli.growth,
            }),
            budget: cli.budget(),
            cancel: Some(cancel.clone()),
            ..Default::default()
        };
        let meta = ReportMeta {
            strategy: label,
            model: cli.input.display().to_string(),
            seed: cli.seed,
        };
        handles.push(std::thread::spawn(move || {
            let mut checker = Checker::new(model, opts);
            let outcome = checker.run();
            let summary = checker.stats().summarize(&meta);
            let _ = tx.send(outcome.map(|v| (v, summary)));
        }));
    }
    drop(tx);
    let mut fallback: Option<(Verdict, Summary)> = None;
    let mut winner: Option<(Verdict, Summary)> = None;
    for msg in rx {
        let (verdict, summary) = msg.map_err(|e| fail(EXIT_INTERNAL, e.to_string()))?;
        if matches!(verdict, Verdict::Safe { .. } | Verdict::Unsafe { .. }) {
            cancel.store(true, Ordering::Relaxed);
            winner = Some((verdict, summary));
            break;
        }
        fallback = Some((verdict, summary));
    }
    for h in handles {
        let _ = h.join();
    }
    winner
        .or(fallback)
        .ok_or_else(|| fail(EXIT_INTERNAL, "portfolio produced no verdict"))
}
