use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::io::{self, Write};

use qot_core::adversary::storage_attack;
use qot_core::analysis::{
    analytic_success, ck_monte_carlo, monte_carlo_success, outcome_distribution_with, simulate_sessions,
    MeasurementRule,
};
use qot_core::encoding::ParticlePair;
use qot_core::qstate::aligned_probability;
use qot_core::stats::{binomial_std_error, within_binomial_band, MC_SIGMAS};
use qot_core::{ChannelConfig, MeasurementAxis, OtBit, RandomStream, Strategy};

use crate::args::{Fault, VerifyArgs};
use crate::commands::{two_particle_ceiling, CliError};

const GRID: usize = 32;
const EXACT: f64 = 1e-12;
const RETRY_SESSIONS: u64 = 10_000;
const COS2_PI_8: f64 = 0.853_553_390_593_273_7;

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn flipped(theta: f64, alpha: MeasurementAxis) -> f64 {
    1.0 - aligned_probability(theta, alpha)
}

fn grid_axis(i: usize) -> MeasurementAxis {
    MeasurementAxis::new(i as f64 * TAU / GRID as f64).expect("finite")
}

pub fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let checks = run_battery(&args)?;

    let mut out = io::stdout().lock();
    let write = |out: &mut io::StdoutLock, line: String| {
        writeln!(out, "{line}").map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
    };
    write(&mut out, format!("{:<28}{:<8}detail", "check", "result"))?;
    for c in &checks {
        write(&mut out, format!("{:<28}{:<8}{}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail))?;
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    write(&mut out, format!("summary: {}/{} checks passed", checks.len() - failed.len(), checks.len()))?;
    drop(out);

    if failed.is_empty() {
        Ok(())
    } else {
        eprintln!("verification failed: {}", failed.join(", "));
        Err(CliError::VerificationFailed(failed))
    }
}

fn run_battery(args: &VerifyArgs) -> Result<Vec<Check>, CliError> {
    let first_rule: MeasurementRule = match args.inject_fault {
        Some(Fault::FlipFirstParticle) => flipped,
        None => aligned_probability,
    };
    let oracle = |a: MeasurementAxis, b: MeasurementAxis, lambda: OtBit| {
        outcome_distribution_with(a, b, lambda, first_rule, aligned_probability)
    };
    let success = |dist: [f64; 2], lambda: OtBit| if lambda == OtBit::Plus { dist[0] } else { dist[1] };
    let n = args.trials;
    let seed = |k: u64| qot_core::qstate::derive_seed(args.seed, k);
    let mut checks = Vec::new();

    // exact routes over the 32×32 grid
    let mut max_diff: f64 = 0.0;
    let mut max_total_err: f64 = 0.0;
    let mut max_sym: f64 = 0.0;
    let mut argmax_ok = true;
    let mut argmin_ok = true;
    for lambda in OtBit::ALL {
        for i in 0..GRID {
            for j in 0..GRID {
                let (a, b) = (grid_axis(i), grid_axis(j));
                let dist = oracle(a, b, lambda);
                let exact = success(dist, lambda);
                let closed = analytic_success(a, b, lambda);
                max_diff = max_diff.max((exact - closed).abs());
                max_total_err = max_total_err.max((dist[0] + dist[1] - 1.0).abs());
                max_sym = max_sym.max((closed - analytic_success(a, b, lambda.opposite())).abs());

                let offset = (i + GRID - j) % GRID;
                let at_max = (exact - 0.75).abs() < EXACT && (closed - 0.75).abs() < EXACT;
                let at_min = (exact - 0.25).abs() < EXACT && (closed - 0.25).abs() < EXACT;
                argmax_ok &= at_max == (offset == 0) && exact <= 0.75 + EXACT;
                argmin_ok &= at_min == (offset == GRID / 2) && exact >= 0.25 - EXACT;
            }
        }
    }
    checks.push(Check {
        name: "oracle-vs-analytic",
        passed: max_diff < EXACT,
        detail: format!("max |enumeration - closed form| = {max_diff:.3e} over {} cells", 2 * GRID * GRID),
    });
    checks.push(Check {
        name: "complement",
        passed: max_total_err < EXACT,
        detail: format!("max |P(+1) + P(-1) - 1| = {max_total_err:.3e}"),
    });
    checks.push(Check {
        name: "lambda-symmetry",
        passed: max_sym < EXACT,
        detail: format!("max |p(+1) - p(-1)| = {max_sym:.3e}"),
    });
    checks.push(Check {
        name: "cheating-optimum",
        passed: argmax_ok && argmin_ok,
        detail: format!("argmax 0.75 exactly on alpha = beta: {argmax_ok}; argmin 0.25 exactly on alpha - beta = pi: {argmin_ok}"),
    });

    for (name, beta, k) in [
        ("mc-equal-axes", 0.0, 1),
        ("mc-orthogonal-axes", FRAC_PI_2, 2),
        ("mc-opposite-axes", PI, 3),
    ] {
        let strategy = Strategy::fixed(0.0, beta)?;
        let r = monte_carlo_success(strategy, OtBit::Plus, n, seed(k))?;
        checks.push(Check {
            name,
            passed: r.monte_carlo_agrees(),
            detail: format!(
                "estimate {:.6} vs {:.6} +/- {:.6}",
                r.monte_carlo,
                r.analytic,
                MC_SIGMAS * binomial_std_error(r.analytic, n)
            ),
        });
    }

    let honest = simulate_sessions(OtBit::Plus, Strategy::Honest, ChannelConfig::lossless(), n, seed(4))?;
    let not_knows = honest.sessions - honest.knows;
    let knows_ok = within_binomial_band(honest.knows_rate(), 0.5, n);
    let certain_ok = honest.correct_when_knows == honest.knows;
    let blind_ok = not_knows > 0 && within_binomial_band(honest.accuracy_when_not_knows(), 0.5, not_knows);
    checks.push(Check {
        name: "honest-ot",
        passed: knows_ok && certain_ok && blind_ok,
        detail: format!(
            "knows {:.6}, accuracy|knows {:.6}, accuracy|not {:.6}",
            honest.knows_rate(),
            honest.accuracy_when_knows(),
            honest.accuracy_when_not_knows()
        ),
    });

    let best_cheater = monte_carlo_success(Strategy::fixed(0.0, 0.0)?, OtBit::Minus, n, seed(5))?;
    let honest_ok = within_binomial_band(honest.accuracy(), 0.75, n);
    checks.push(Check {
        name: "honest-equals-ceiling",
        passed: honest_ok && best_cheater.monte_carlo_agrees() && best_cheater.analytic == 0.75,
        detail: format!(
            "honest {:.6}, best cheater {:.6}, target 0.75 +/- {:.6}",
            honest.accuracy(),
            best_cheater.monte_carlo,
            MC_SIGMAS * binomial_std_error(0.75, n)
        ),
    });

    let mut rng = RandomStream::new(seed(6));
    let exhaustive_ok = ParticlePair::all_valid()
        .into_iter()
        .all(|pair| storage_attack(pair.seal(), pair.basis(), &mut rng) == pair.encoded_bit());
    let storage = monte_carlo_success(Strategy::Storage, OtBit::Plus, n, seed(7))?;
    checks.push(Check {
        name: "storage-control",
        passed: exhaustive_ok && storage.monte_carlo == 1.0,
        detail: format!("8 preparations: {exhaustive_ok}; sessions {:.6}", storage.monte_carlo),
    });

    let ck = ck_monte_carlo(MeasurementAxis::new(FRAC_PI_4)?, n, seed(8))?;
    let ceiling = two_particle_ceiling();
    let exact_ok = (ck.brute_force - COS2_PI_8).abs() < EXACT;
    checks.push(Check {
        name: "ck-comparison",
        passed: exact_ok && ck.monte_carlo_agrees() && ck.brute_force > 0.75 + 0.10 && (ceiling - 0.75).abs() < EXACT,
        detail: format!(
            "single particle {:.6} (mc {:.6}) vs two-particle ceiling {:.6}",
            ck.brute_force, ck.monte_carlo, ceiling
        ),
    });

    let lossy = ChannelConfig::new(0.5, 64)?;
    let retry = simulate_sessions(OtBit::Minus, Strategy::Honest, lossy, RETRY_SESSIONS, seed(9))?;
    // geometric with per-round success 1/4: mean 4, sd sqrt(0.75)/0.25
    let retry_sigma = 0.75f64.sqrt() / 0.25 / (RETRY_SESSIONS as f64).sqrt();
    checks.push(Check {
        name: "retry-rounds",
        passed: (retry.mean_rounds() - 4.0).abs() <= MC_SIGMAS * retry_sigma,
        detail: format!("mean rounds {:.4} vs 4 +/- {:.4}", retry.mean_rounds(), MC_SIGMAS * retry_sigma),
    });

    Ok(checks)
}
