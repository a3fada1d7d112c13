use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use radiosync::birthday::{estimate_events, BirthdayParams};
use radiosync::detsched::{build_two_proc_schedule_with, first_uncovered_shift, Rounding};
use radiosync::harness::acceptance::pack_trial;
use radiosync::harness::{run_acceptance, run_sweep, write_csv, ConfigFile, ExperimentSpec};
use radiosync::netsim::{RadioEvent, Reception, SimConfig};
use radiosync::protocol::{estimate_n, measure_radio_cost, run_pipeline};
use radiosync::randsched::OffsetPattern;
use radiosync::seed::derive;
use radiosync::BitSchedule;

#[derive(Parser)]
#[command(name = "radiosync", version, about = "Radio-efficient clock synchronization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic two-processor schedules.
    #[command(subcommand)]
    Sched(SchedCommand),
    /// Pack random sparse strings at non-overlapping shifts.
    Pack(PackArgs),
    /// Monte Carlo estimate of a balls-into-bins event.
    Birthday(BirthdayArgs),
    /// Randomized multi-node synchronization.
    #[command(subcommand)]
    Sync(SyncCommand),
    /// Run a grid of synchronization experiments.
    Sweep(SweepArgs),
    /// Run every acceptance criterion.
    Accept(AcceptArgs),
}

#[derive(Subcommand)]
enum SchedCommand {
    /// Print the schedule in text form.
    Gen {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = RoundingArg::IntegerSlope)]
        rounding: RoundingArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a schedule file meets itself at every shift up to d.
    Verify {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    IntegerSlope,
    CeilReal,
}

impl From<RoundingArg> for Rounding {
    fn from(r: RoundingArg) -> Self {
        match r {
            RoundingArg::IntegerSlope => Rounding::IntegerSlope,
            RoundingArg::CeilReal => Rounding::CeilReal,
        }
    }
}

#[derive(Args)]
struct PackArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BirthdayArgs {
    /// 1 estimates a shared bin, 2 an exclusive pair bin.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    lemma: u8,
    #[arg(long = "L")]
    bins: usize,
    #[arg(long = "C")]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SyncCommand {
    /// Build the schedule and run max-ID synchronization.
    Run(SyncRunArgs),
    /// Estimate n when only d is known.
    EstimateN(EstimateArgs),
}

/// Flags that map onto config keys; anything set here beats the file.
#[derive(Args)]
struct SimFlags {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    exclusive: bool,
    /// Drift bound c; enables the drift model.
    #[arg(long = "drift")]
    drift_c: Option<f64>,
    #[arg(long)]
    tau_trans: Option<f64>,
    #[arg(long)]
    offsets: Option<OffsetPattern>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key = value file with SimConfig field names.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SimFlags {
    fn resolve(&self) -> Result<(SimConfig, Option<usize>)> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            d: self.d,
            beta: self.beta,
            n: self.n,
            exclusive: self.exclusive.then_some(true),
            drift_c: self.drift_c,
            tau_trans: self.tau_trans,
            offsets: self.offsets,
            seed: self.seed,
            ..ConfigFile::default()
        };
        let merged = file.merged(&flags);
        let cfg = merged.apply(SimConfig::default());
        cfg.validate()?;
        Ok((cfg, merged.trials))
    }
}

#[derive(Args)]
struct SyncRunArgs {
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-node cost CSV of the first run.
    #[arg(long)]
    per_node: Option<PathBuf>,
    /// Slot-by-slot event CSV of the first run.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long)]
    true_n: usize,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,1024")]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    beta: Vec<f64>,
    /// Media to run: `false` for broadcast, `true` for interference.
    #[arg(long, value_delimiter = ',', default_value = "false")]
    exclusive: Vec<bool>,
    /// Drift bounds; `none` runs without drift.
    #[arg(long, value_delimiter = ',', default_value = "none")]
    drift: Vec<String>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep wall-clock times in the output.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct AcceptArgs {
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn trial_seed(seed: u64, trials: usize, k: usize) -> u64 {
    if trials == 1 {
        seed
    } else {
        derive(seed, &[k as u64])
    }
}

fn sched(cmd: SchedCommand) -> Result<bool> {
    match cmd {
        SchedCommand::Gen { d, rounding, out } => {
            if d == 0 {
                bail!("d must be at least 1");
            }
            let s = build_two_proc_schedule_with(d, rounding.into());
            write!(open_out(out.as_deref())?, "{s}")?;
            Ok(true)
        }
        SchedCommand::Verify { d, file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let s: BitSchedule = text.parse().with_context(|| format!("parsing {}", file.display()))?;
            if s.density() == 0 {
                println!("FAIL: schedule has no ones");
                return Ok(false);
            }
            match first_uncovered_shift(&s, d) {
                None => {
                    println!("PASS: length {}, {} ones, every shift 1..={d} covered", s.length(), s.density());
                    Ok(true)
                }
                Some(shift) => {
                    println!("FAIL: shift {shift} uncovered");
                    Ok(false)
                }
            }
        }
    }
}

fn pack(a: PackArgs) -> Result<bool> {
    if a.d == 0 || !(a.beta > 0.0 && a.beta <= 1.0) {
        bail!("need d >= 1 and beta in (0, 1]");
    }
    let mut w = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    w.write_record(["seed", "d", "beta", "strings", "ones", "length", "bound", "success", "max_shift", "error"])?;
    let mut all = true;
    for k in 0..a.trials {
        let seed = trial_seed(a.seed, a.trials, k);
        let t = pack_trial(a.d, a.beta, seed);
        let (ok, max_shift, err) = match &t.result {
            Ok(shifts) => (true, shifts.iter().max().copied().unwrap_or(0).to_string(), String::new()),
            Err(e) => (false, String::new(), e.clone()),
        };
        all &= ok;
        w.write_record([
            seed.to_string(),
            a.d.to_string(),
            a.beta.to_string(),
            t.count.to_string(),
            t.ones.to_string(),
            t.length.to_string(),
            t.bound.to_string(),
            ok.to_string(),
            max_shift,
            err,
        ])?;
    }
    w.flush()?;
    Ok(all)
}

fn birthday(a: BirthdayArgs) -> Result<bool> {
    let p = BirthdayParams::new(a.bins, a.s, a.c)?;
    let (h, t) = estimate_events(&p, a.trials, a.seed)?;
    let est = if a.lemma == 1 { h } else { t };
    let mut w = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    w.write_record(["lemma", "L", "s", "C", "red", "blue", "trials", "estimate", "half_width"])?;
    w.write_record([
        a.lemma.to_string(),
        a.bins.to_string(),
        a.s.to_string(),
        a.c.to_string(),
        p.red.to_string(),
        p.blue.to_string(),
        a.trials.to_string(),
        format!("{:.6}", est.p),
        format!("{:.6}", est.half_width),
    ])?;
    w.flush()?;
    Ok(true)
}

fn write_trace(path: &Path, events: &[RadioEvent]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["global_t", "slot", "awake", "transmitters", "heard", "noise"])?;
    for e in events {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let heard: Vec<usize> =
            e.delivered.iter().filter(|(_, r)| matches!(r, Reception::Heard(_))).map(|(v, _)| *v).collect();
        let noise: Vec<usize> =
            e.delivered.iter().filter(|(_, r)| matches!(r, Reception::Noise)).map(|(v, _)| *v).collect();
        w.write_record([
            e.global_t.to_string(),
            e.slot.to_string(),
            join(&e.awake),
            join(&e.transmitters),
            join(&heard),
            join(&noise),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn sync_run(a: SyncRunArgs) -> Result<bool> {
    let (base, file_trials) = a.sim.resolve()?;
    let trials = a.trials.or(file_trials).unwrap_or(1);
    let mut w = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    w.write_record(["seed", "d", "n", "beta", "exclusive", "success", "max_radio_cost", "rounds", "diameter"])?;
    let mut all = true;
    for k in 0..trials {
        let cfg = SimConfig { seed: trial_seed(base.seed, trials, k), ..base.clone() };
        let mut events = Vec::new();
        let mut record = |e: &RadioEvent| events.push(e.clone());
        let tracing = k == 0 && a.trace.is_some();
        let r = run_pipeline(&cfg, if tracing { Some(&mut record) } else { None })?;
        all &= r.success();
        w.write_record([
            cfg.seed.to_string(),
            cfg.d.to_string(),
            r.params.n.to_string(),
            format!("{:.6}", cfg.resolve_beta()?),
            cfg.exclusive.to_string(),
            r.success().to_string(),
            measure_radio_cost(&r).max.to_string(),
            r.rounds_used().to_string(),
            r.stats.diameter.map_or(String::new(), |x| x.to_string()),
        ])?;
        if k == 0 {
            if let Some(path) = &a.per_node {
                let mut pw = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
                pw.write_record(["node", "id", "radio_cost", "synchronized"])?;
                for (v, (s, c)) in r.states.iter().zip(r.per_node_radio_cost()).enumerate() {
                    pw.write_record([v.to_string(), s.id.to_string(), c.to_string(), s.synchronized.to_string()])?;
                }
                pw.flush()?;
            }
            if let Some(path) = &a.trace {
                write_trace(path, &events)?;
            }
        }
    }
    w.flush()?;
    Ok(all)
}

fn sync_estimate(a: EstimateArgs) -> Result<bool> {
    let (base, file_trials) = a.sim.resolve()?;
    let trials = a.trials.or(file_trials).unwrap_or(1);
    let mut w = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    w.write_record([
        "seed",
        "d",
        "true_n",
        "estimate",
        "accepted_epoch",
        "epochs",
        "synchronized_fraction",
        "total_max_cost",
        "final_epoch_cost",
    ])?;
    let mut all = true;
    for k in 0..trials {
        let cfg = SimConfig { seed: trial_seed(base.seed, trials, k), ..base.clone() };
        let r = estimate_n(&cfg, a.true_n)?;
        all &= r.estimate * 2 >= a.true_n && r.estimate <= 2 * a.true_n;
        w.write_record([
            cfg.seed.to_string(),
            cfg.d.to_string(),
            a.true_n.to_string(),
            r.estimate.to_string(),
            r.accepted_epoch.to_string(),
            r.epochs.len().to_string(),
            format!("{:.6}", r.synchronized_fraction),
            r.total_max_cost().to_string(),
            r.final_epoch_cost().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(all)
}

fn sweep(a: SweepArgs) -> Result<bool> {
    let file = match &a.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let drift_c = a
        .drift
        .iter()
        .map(|s| match s.as_str() {
            "none" => Ok(None),
            v => v.parse().map(Some).with_context(|| format!("bad drift value {v:?}")),
        })
        .collect::<Result<_>>()?;
    let spec = ExperimentSpec {
        d: a.d,
        beta: a.beta,
        exclusive: a.exclusive,
        drift_c,
        trials: a.trials,
        seed: a.seed,
        base: file.apply(SimConfig::default()),
    };
    let records = run_sweep(&spec)?;
    write_csv(&records, open_out(a.out.as_deref())?, a.timing)?;
    Ok(records.iter().all(|r| r.success_rate == 1.0))
}

fn accept(a: AcceptArgs) -> Result<bool> {
    let reports = run_acceptance(a.seed);
    let mut out = open_out(a.out.as_deref())?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(reports.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sched(c) => sched(c),
        Command::Pack(a) => pack(a),
        Command::Birthday(a) => birthday(a),
        Command::Sync(SyncCommand::Run(a)) => sync_run(a),
        Command::Sync(SyncCommand::EstimateN(a)) => sync_estimate(a),
        Command::Sweep(a) => sweep(a),
        Command::Accept(a) => accept(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
