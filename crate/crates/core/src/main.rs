use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use hamorient::harness::{dump_trial_logs, run_sweep, write_sweep, Format, SweepOptions, TrialConfig};
use hamorient::process::{Mode, Preset, ProcessConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Edge,
    Graph,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
    Desk,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

/// Seeded sweeps of the orientation and Hamilton cycle pipeline.
#[derive(Debug, Parser)]
#[command(name = "hamorient", version)]
struct Cli {
    /// Vertex counts; repeat or comma-separate.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// First seed; trial k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "graph")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
    #[arg(long)]
    sat_threshold: Option<usize>,
    /// Size of each OUT and IN set.
    #[arg(long)]
    fan: Option<usize>,
    #[arg(long)]
    step1_multiplier: Option<f64>,
    /// Step II length in units of n ln n; negative disables Step II.
    #[arg(long, allow_negative_numbers = true)]
    step2_multiplier: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, default_value_t = 12)]
    oracle_max_n: usize,
    /// Print one line per trial with the stage reached.
    #[arg(long)]
    verbose_stage: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Also run the random-orientation baseline on every seed.
    #[arg(long)]
    baseline: bool,
    /// Record wall-clock per stage (output is then not byte-reproducible).
    #[arg(long)]
    timing: bool,
    /// Write the event log and orientation of every trial as JSON lines.
    #[arg(long)]
    dump_logs: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = match cli.mode {
        ModeArg::Edge => Mode::Edge,
        ModeArg::Graph => Mode::Graph,
    };
    let preset = match cli.preset {
        PresetArg::Paper => Preset::Paper,
        PresetArg::Desk => Preset::Desk,
    };
    let mut pc = ProcessConfig::new(cli.n[0], mode, preset, cli.seed);
    if let Some(s) = cli.sat_threshold {
        pc.sat_threshold = s;
    }
    if let Some(f) = cli.fan {
        pc.fan = f;
    }
    if let Some(c) = cli.step1_multiplier {
        pc.step1_multiplier = c;
    }
    if let Some(c) = cli.step2_multiplier {
        pc.step2_multiplier = (c >= 0.0).then_some(c);
    }
    let mut template = TrialConfig::new(pc);
    template.oracle_max_n = cli.oracle_max_n;
    template.timing = cli.timing;
    let opts = SweepOptions { ns: cli.n.clone(), trials: cli.trials, base_seed: cli.seed, template, baseline: cli.baseline };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let sweep = match pool.install(|| run_sweep(&opts)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.verbose_stage {
        for r in &sweep.results {
            let why = r.failure.as_ref().map(|f| format!(" {f:?}")).unwrap_or_default();
            eprintln!("n={} seed={} m*={} stage={}{}", r.n, r.seed, r.m_star, r.stage, why);
        }
    }
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Jsonl => Format::Jsonl,
    };
    match write_sweep(&cli.out_dir, &sweep, format) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if cli.dump_logs {
        for &n in &opts.ns {
            for k in 0..opts.trials as u64 {
                let mut c = opts.template.with_seed(opts.base_seed.wrapping_add(k));
                c.process.n = n;
                if let Err(e) = dump_trial_logs(&cli.out_dir.join("logs"), &c) {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    for row in &sweep.summary {
        let base = row.baseline_success_rate.map(|b| format!(" baseline={b:.3}")).unwrap_or_default();
        println!("n={} trials={} success={:.3}{} stages={:?}", row.n, row.trials, row.success_rate, base, row.stage_histogram);
    }
    ExitCode::SUCCESS
}
