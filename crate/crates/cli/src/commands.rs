//! Subcommand definitions and their implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use txmotif_core::{Engine, FeatureRow, RowFlag, Transaction};

use crate::error::Result;
use crate::gen::{GenConfig, Pattern};
use crate::io::{FeatureWriter, TimeFormat, TransactionReader};
use crate::manifest::{empty_flag_counts, LatencySummary, RunManifest, Timing};
use crate::{config, snapshot};

#[derive(Debug, Parser)]
#[command(name = "txmotif", version, about = "Streaming graph features for transaction data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build engine state from historical transactions.
    Fit(FitArgs),
    /// Stream transactions through the engine and write feature rows.
    Transform(TransformArgs),
    /// Measure per-batch latency and throughput.
    Bench(BenchArgs),
    /// Generate a synthetic stream with planted motifs.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Transaction CSV, `-` for stdin.
    #[arg(long)]
    pub input: PathBuf,
    /// Parse timestamps as ISO-8601 instead of epoch seconds.
    #[arg(long)]
    pub iso_timestamps: bool,
    /// Mining worker threads.
    #[arg(long, env = "TXMOTIF_THREADS", default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: u16,
}

impl InputArgs {
    fn time_format(&self) -> TimeFormat {
        if self.iso_timestamps {
            TimeFormat::Iso
        } else {
            TimeFormat::Epoch
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Engine configuration (TOML); defaults apply when omitted.
    #[arg(long, env = "TXMOTIF_CONFIG")]
    pub config: Option<PathBuf>,
    /// Where to write the state snapshot.
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// State snapshot produced by `fit`.
    #[arg(long, conflicts_with = "config")]
    pub state: Option<PathBuf>,
    /// Engine configuration for a cold start.
    #[arg(long, env = "TXMOTIF_CONFIG")]
    pub config: Option<PathBuf>,
    /// Transactions per batch.
    #[arg(long, default_value_t = 2048, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    /// Write the final state here.
    #[arg(long)]
    pub save_state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    /// Feature CSV, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub output: PathBuf,
    /// Write a run manifest (JSON).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    /// Manifest destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub pattern: Pattern,
    #[arg(long)]
    pub edges: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transaction CSV; the ground truth goes to `<output>.truth.json`.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => fit(&args),
        Command::Transform(args) => {
            let manifest = stream("transform", &args.stream, Some(&args.output))?;
            match &args.manifest {
                Some(path) => manifest.write(path),
                None => Ok(()),
            }
        }
        Command::Bench(args) => stream("bench", &args.stream, None)?.write(&args.report),
        Command::Gen(args) => {
            let cfg = GenConfig::new(args.pattern, args.edges, args.seed);
            crate::gen::write(&cfg, &args.output).map(drop)
        }
    }
}

fn fit(args: &FitArgs) -> Result<()> {
    let config = config::load_or_default(args.config.as_deref())?;
    let mut engine = Engine::new(config)?;
    engine.set_worker_count(args.input.threads.into())?;
    let mut reader = TransactionReader::open(&args.input.input, &engine.config().schema, args.input.time_format())?;
    let flags = engine.fit(reader.read_all()?)?;
    let errors = flags.iter().filter(|f| f.is_error()).count();
    if errors > 0 {
        log::warn!("{errors} of {} history rows were rejected", flags.len());
    }
    snapshot::save(&engine, &args.state)
}

fn open_engine(args: &StreamArgs) -> Result<Engine> {
    let mut engine = match &args.state {
        Some(path) => snapshot::load(path)?,
        None => Engine::new(config::load_or_default(args.config.as_deref())?)?,
    };
    engine.set_worker_count(args.input.threads.into())?;
    Ok(engine)
}

/// Batches in flight between pipeline stages.
const PIPELINE_DEPTH: usize = 2;

/// Per-run counters filled in batch by batch.
struct Tally {
    latencies: Vec<Duration>,
    flags: BTreeMap<String, u64>,
    rows_in: u64,
    rows_out: u64,
}

impl Tally {
    fn transform(&mut self, engine: &mut Engine, batch: Vec<Transaction>) -> Result<Vec<FeatureRow>> {
        self.rows_in += batch.len() as u64;
        let t0 = Instant::now();
        let out = engine.transform(batch)?;
        self.latencies.push(t0.elapsed());
        self.rows_out += out.rows.len() as u64;
        for f in &out.flags {
            *self.flags.entry(f.name().to_string()).or_insert(0) += 1;
        }
        Ok(out.rows)
    }
}

fn run_inline(
    engine: &mut Engine,
    mut reader: TransactionReader,
    mut writer: Option<FeatureWriter>,
    batch_size: usize,
    tally: &mut Tally,
) -> Result<()> {
    loop {
        let batch = reader.next_batch(batch_size)?;
        if batch.is_empty() {
            break;
        }
        let rows = tally.transform(engine, batch)?;
        if let Some(w) = writer.as_mut() {
            w.write_rows(&rows)?;
        }
    }
    writer.map_or(Ok(()), FeatureWriter::finish)
}

/// Reader and writer on their own threads so CSV work overlaps mining.
fn run_pipelined(
    engine: &mut Engine,
    mut reader: TransactionReader,
    writer: Option<FeatureWriter>,
    batch_size: usize,
    tally: &mut Tally,
) -> Result<()> {
    thread::scope(|scope| {
        let (batch_tx, batch_rx) = mpsc::sync_channel::<Result<Vec<Transaction>>>(PIPELINE_DEPTH);
        scope.spawn(move || loop {
            let batch = reader.next_batch(batch_size);
            let done = batch.as_ref().map_or(true, Vec::is_empty);
            if batch_tx.send(batch).is_err() || done {
                break;
            }
        });
        let (rows_tx, rows_rx) = mpsc::sync_channel::<Vec<FeatureRow>>(PIPELINE_DEPTH);
        let written = writer.map(|mut w| {
            scope.spawn(move || -> Result<()> {
                for rows in rows_rx {
                    w.write_rows(&rows)?;
                }
                w.finish()
            })
        });

        for batch in batch_rx {
            let batch = batch?;
            if batch.is_empty() {
                break;
            }
            let rows = tally.transform(engine, batch)?;
            // a closed channel means the writer failed; its error is reported below
            if written.is_some() && rows_tx.send(rows).is_err() {
                break;
            }
        }
        drop(rows_tx);
        written.map_or(Ok(()), |h| h.join().expect("writer thread panicked"))
    })
}

/// Reads batches, transforms them and optionally writes the features.
fn stream(command: &str, args: &StreamArgs, output: Option<&Path>) -> Result<RunManifest> {
    let mut engine = open_engine(args)?;
    let reader = TransactionReader::open(&args.input.input, &engine.config().schema, args.input.time_format())?;
    let writer = output.map(|p| FeatureWriter::create(p, engine.schema())).transpose()?;
    let batch_size = args.batch_size as usize;

    let started_at = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let mut tally = Tally { latencies: Vec::new(), flags: empty_flag_counts(), rows_in: 0, rows_out: 0 };
    // on a single core the extra threads only add switching
    if thread::available_parallelism().is_ok_and(|n| n.get() > 1) {
        run_pipelined(&mut engine, reader, writer, batch_size, &mut tally)?;
    } else {
        run_inline(&mut engine, reader, writer, batch_size, &mut tally)?;
    }
    let Tally { latencies, flags, rows_in, rows_out } = tally;
    let elapsed = clock.elapsed().as_secs_f64();
    if let Some(path) = &args.save_state {
        snapshot::save(&engine, path)?;
    }
    let rejected: u64 = RowFlag::ALL.iter().filter(|f| f.is_error()).map(|f| flags[f.name()]).sum();
    if rejected > 0 {
        log::warn!("{rejected} of {rows_in} rows were flagged as errors");
    }

    Ok(RunManifest {
        tool: "txmotif".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: engine.get_params(),
        input: args.input.input.clone(),
        output: output.map(Path::to_path_buf),
        state: args.state.clone(),
        batch_size,
        threads: args.input.threads.into(),
        rows_in,
        rows_out,
        batches: latencies.len() as u64,
        row_flags: flags,
        timing: Timing {
            started_at,
            elapsed_s: elapsed,
            latency_ms: LatencySummary::from_durations(&latencies),
            throughput_rows_per_s: if elapsed > 0.0 { rows_in as f64 / elapsed } else { 0.0 },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use txmotif_core::{EngineConfig, InputSchema};

    fn features(dir: &Path, input: &Path, pipelined: bool) -> (Vec<u8>, u64, u64) {
        let out = dir.join(if pipelined { "p.csv" } else { "i.csv" });
        let mut engine = Engine::new(EngineConfig::default()).unwrap();
        let reader = TransactionReader::open(input, &InputSchema::default(), TimeFormat::Epoch).unwrap();
        let writer = Some(FeatureWriter::create(&out, engine.schema()).unwrap());
        let mut tally = Tally { latencies: Vec::new(), flags: empty_flag_counts(), rows_in: 0, rows_out: 0 };
        let run = if pipelined { run_pipelined } else { run_inline };
        run(&mut engine, reader, writer, 64, &mut tally).unwrap();
        (std::fs::read(out).unwrap(), tally.rows_in, tally.latencies.len() as u64)
    }

    #[test]
    fn pipelined_matches_inline() {
        let dir = tempfile::TempDir::new().unwrap();
        let input = dir.path().join("in.csv");
        gen::write(&GenConfig::new(Pattern::Mixed, 1_000, 3), &input).unwrap();
        let inline = features(dir.path(), &input, false);
        assert_eq!(inline.1, 1_000);
        assert_eq!(inline.2, 16);
        assert_eq!(features(dir.path(), &input, true), inline);
    }

    #[test]
    fn pipelined_reports_reader_errors() {
        let dir = tempfile::TempDir::new().unwrap();
        let input = dir.path().join("bad.csv");
        std::fs::write(&input, "EdgeID,SourceAccountId,DestAccountId,Timestamp,Amount\n1,a,b,1,1\n2,a,b,x,1\n").unwrap();
        let mut engine = Engine::new(EngineConfig::default()).unwrap();
        let reader = TransactionReader::open(&input, &InputSchema::default(), TimeFormat::Epoch).unwrap();
        let mut tally = Tally { latencies: Vec::new(), flags: empty_flag_counts(), rows_in: 0, rows_out: 0 };
        let err = run_pipelined(&mut engine, reader, None, 1, &mut tally).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert_eq!(tally.rows_in, 1);
    }
}
