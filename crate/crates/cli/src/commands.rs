use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use qot_core::analysis::{
    brute_force_success, ck_monte_carlo, format_sig, monte_carlo_success, simulate_sessions, sweep, trial_seeds,
    SessionStats, SweepGrid, DEFAULT_GRID_STEP,
};
use qot_core::stats::{binomial_std_error, MC_SIGMAS};
use qot_core::{run_session, ChannelConfig, MeasurementAxis, Strategy};
use thiserror::Error;

use crate::args::{AttackArgs, CkArgs, Cli, Command, RunArgs, StrategyArgs, StrategyKind, SweepArgs};
use crate::verify;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Protocol(qot_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("verification failed: {}", .0.join(", "))]
    VerificationFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::VerificationFailed(_) => 1,
            Self::Usage(_) => 2,
            Self::Protocol(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}

impl From<qot_core::Error> for CliError {
    fn from(err: qot_core::Error) -> Self {
        match err {
            qot_core::Error::RoundLimitExceeded { .. } => Self::Protocol(err),
            other => Self::Usage(other.to_string()),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn stdout_error(source: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => verify::cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Attack(args) => cmd_attack(args),
        Command::CkCompare(args) => cmd_ck_compare(args),
    }
}

fn require_trials(trials: u64) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(())
}

fn build_strategy(args: &StrategyArgs) -> Result<Strategy, CliError> {
    match args.strategy {
        StrategyKind::Fixed => {
            let (Some(alpha), Some(beta)) = (args.alpha, args.beta) else {
                return Err(CliError::Usage("--strategy fixed needs --alpha and --beta".into()));
            };
            Ok(Strategy::fixed(alpha, beta)?)
        }
        _ if args.alpha.is_some() || args.beta.is_some() => {
            Err(CliError::Usage("--alpha/--beta only apply to --strategy fixed".into()))
        }
        StrategyKind::Honest => Ok(Strategy::Honest),
        StrategyKind::Storage => Ok(Strategy::Storage),
    }
}

/// Buffered writer to a file, or to stdout for `-`.
fn open_output(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if path == Path::new("-") {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(path).map_err(io_error(path))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    require_trials(args.trials)?;
    let strategy = build_strategy(&args.strategy)?;
    let channel = ChannelConfig::new(args.loss, args.max_rounds)?;

    let per_session = args.trials <= 10;
    let stats = if per_session || args.dump_transcript.is_some() {
        run_sequential(&args, strategy, channel, per_session)?
    } else {
        simulate_sessions(args.lambda, strategy, channel, args.trials, args.seed)?
    };

    let summary = render_run_summary(&args, strategy, &stats);
    let transcript_on_stdout = args.dump_transcript.as_deref() == Some(Path::new("-"));
    if transcript_on_stdout {
        eprint!("{summary}");
    } else {
        print!("{summary}");
    }
    Ok(())
}

fn run_sequential(
    args: &RunArgs,
    strategy: Strategy,
    channel: ChannelConfig,
    print_sessions: bool,
) -> Result<SessionStats, CliError> {
    let mut dump = args.dump_transcript.as_deref().map(open_output).transpose()?;
    let dump_path = args.dump_transcript.clone().unwrap_or_else(|| PathBuf::from("-"));
    let mut stats = SessionStats::default();
    let mut lines = Vec::new();

    for i in 0..args.trials {
        let (alice, bob) = trial_seeds(args.seed, i);
        let result = run_session(args.lambda, strategy, channel, alice, bob)?;
        stats.record(&result);
        if print_sessions {
            lines.push(format!(
                "session {i}: basis={} bob_axis={} knows={} inferred={} correct={} rounds={}",
                result.basis,
                result.bob_axis.map_or_else(|| "-".to_string(), |a| a.to_string()),
                result.bob_knows,
                result.bob_inferred.map_or_else(|| "-".to_string(), |b| b.to_string()),
                result.guessed_correctly(),
                result.rounds_used
            ));
        }
        if let Some(out) = dump.as_mut() {
            write!(out, "# session {i} alice_seed={alice} bob_seed={bob}\n{}", result.transcript)
                .map_err(io_error(&dump_path))?;
        }
    }
    if let Some(mut out) = dump {
        out.flush().map_err(io_error(&dump_path))?;
    }
    let target_stderr = args.dump_transcript.as_deref() == Some(Path::new("-"));
    for line in lines {
        if target_stderr {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
    Ok(stats)
}

fn render_run_summary(args: &RunArgs, strategy: Strategy, stats: &SessionStats) -> String {
    let n = stats.sessions;
    let knows = stats.knows_rate();
    let not_knows = n - stats.knows;
    let mut out = String::new();
    let mut line = |key: &str, value: String| out.push_str(&format!("{key:<22}{value}\n"));
    line("strategy", strategy.to_string());
    line("lambda", args.lambda.to_string());
    line("loss", args.loss.to_string());
    line("seed", args.seed.to_string());
    line("sessions", n.to_string());
    line("bob_knows_rate", format!("{knows:.6} (s.e. {:.6})", binomial_std_error(knows, n)));
    line("accuracy", format!("{:.6} (s.e. {:.6})", stats.accuracy(), binomial_std_error(stats.accuracy(), n)));
    line(
        "accuracy_if_knows",
        if stats.knows > 0 { format!("{:.6} over {}", stats.accuracy_when_knows(), stats.knows) } else { "n/a".into() },
    );
    line(
        "accuracy_if_not_knows",
        if not_knows > 0 { format!("{:.6} over {not_knows}", stats.accuracy_when_not_knows()) } else { "n/a".into() },
    );
    line("mean_rounds", format!("{:.6} (s.e. {:.6})", stats.mean_rounds(), stats.rounds_std_error()));
    out
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    require_trials(args.trials)?;
    let grid = SweepGrid::uniform(args.grid_step.unwrap_or(DEFAULT_GRID_STEP), args.lambda)?;
    let table = sweep(&grid, args.trials, args.seed)?;

    let path = args.output.clone().unwrap_or_else(|| PathBuf::from("-"));
    let mut out = open_output(&path)?;
    table.write_csv(&mut out).map_err(io_error(&path))?;
    out.flush().map_err(io_error(&path))?;
    drop(out);

    let mut summary = format!(
        "cells {}\nmax_analytic {}\nargmax_cells {}\n",
        table.rows.len(),
        format_sig(table.max_analytic()),
        table.argmax.len()
    );
    let all_diagonal = table.argmax.iter().all(|&i| table.rows[i].alpha == table.rows[i].beta);
    summary.push_str(&format!("argmax_on_diagonal {all_diagonal}\n"));
    for &i in &table.argmax {
        let row = &table.rows[i];
        summary.push_str(&format!(
            "argmax alpha={} beta={}\n",
            format_sig(row.alpha.radians()),
            format_sig(row.beta.radians())
        ));
    }
    if args.output.is_none() {
        eprint!("{summary}");
    } else {
        print!("{summary}");
    }
    Ok(())
}

fn cmd_attack(args: AttackArgs) -> Result<(), CliError> {
    require_trials(args.trials)?;
    let strategy = build_strategy(&args.strategy)?;
    let report = monte_carlo_success(strategy, args.lambda, args.trials, args.seed)?;
    let mut out = io::stdout().lock();
    writeln!(out, "strategy     {strategy}").map_err(stdout_error)?;
    writeln!(out, "lambda       {}", args.lambda).map_err(stdout_error)?;
    writeln!(out, "analytic     {}", format_sig(report.analytic)).map_err(stdout_error)?;
    writeln!(out, "brute_force  {}", format_sig(report.brute_force)).map_err(stdout_error)?;
    writeln!(out, "monte_carlo  {}", format_sig(report.monte_carlo)).map_err(stdout_error)?;
    writeln!(out, "std_error    {}", format_sig(report.mc_std_error)).map_err(stdout_error)?;
    writeln!(out, "trials       {}", report.trials).map_err(stdout_error)?;
    writeln!(
        out,
        "agreement    {} (|monte_carlo - analytic| <= {MC_SIGMAS} sigma)",
        if report.monte_carlo_agrees() { "yes" } else { "no" }
    )
    .map_err(stdout_error)?;
    Ok(())
}

/// Largest enumerated two-particle success over a 32×32 grid on [0, 2π)².
pub fn two_particle_ceiling() -> f64 {
    let step = std::f64::consts::TAU / 32.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..32 {
        for j in 0..32 {
            let a = MeasurementAxis::new(i as f64 * step).expect("finite");
            let b = MeasurementAxis::new(j as f64 * step).expect("finite");
            for lambda in qot_core::OtBit::ALL {
                best = best.max(brute_force_success(a, b, lambda));
            }
        }
    }
    best
}

fn cmd_ck_compare(args: CkArgs) -> Result<(), CliError> {
    require_trials(args.trials)?;
    let axis = MeasurementAxis::new(args.alpha)?;
    let report = ck_monte_carlo(axis, args.trials, args.seed)?;
    let ceiling = two_particle_ceiling();
    let mut out = io::stdout().lock();
    writeln!(out, "measure_axis              {}", format_sig(axis.radians())).map_err(stdout_error)?;
    writeln!(out, "single_particle_exact     {}", format_sig(report.brute_force)).map_err(stdout_error)?;
    writeln!(out, "single_particle_closed    {}", format_sig(report.analytic)).map_err(stdout_error)?;
    writeln!(
        out,
        "single_particle_mc        {} (s.e. {}, {} trials)",
        format_sig(report.monte_carlo),
        format_sig(report.mc_std_error),
        report.trials
    )
    .map_err(stdout_error)?;
    writeln!(out, "two_particle_ceiling      {}", format_sig(ceiling)).map_err(stdout_error)?;
    writeln!(out, "single_particle_advantage {:+.10}", report.brute_force - ceiling).map_err(stdout_error)?;
    Ok(())
}
