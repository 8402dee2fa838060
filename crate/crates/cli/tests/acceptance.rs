//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.
//!
//! Run with `cargo test -p qot-cli --test acceptance`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::process::Command;
use std::time::{Duration, Instant};

use qot_core::adversary::storage_attack;
use qot_core::analysis::{
    analytic_success, brute_force_success, ck_monte_carlo, ck_success_probability, monte_carlo_success,
    simulate_sessions,
};
use qot_core::encoding::ParticlePair;
use qot_core::protocol::honest_bob_strategy;
use qot_core::stats::{binomial_std_error, MC_SIGMAS};
use qot_core::{ChannelConfig, MeasurementAxis, OtBit, RandomStream, Strategy};

const GRID: usize = 32;
const EXACT: f64 = 1e-12;
const SEED: u64 = 20_240_601;
/// cos²(π/8), evaluated independently at 30 digits.
const COS2_PI_8: f64 = 0.853_553_390_593_273_7;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn grid_axis(i: usize) -> MeasurementAxis {
    MeasurementAxis::new(i as f64 * TAU / GRID as f64).unwrap()
}

fn within(estimate: f64, target: f64, half_width: f64) -> bool {
    (estimate - target).abs() <= half_width
}

fn closed_form_reproduction() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in OtBit::ALL {
        for i in 0..GRID {
            for j in 0..GRID {
                let (a, b) = (grid_axis(i), grid_axis(j));
                let expected = 0.5 + 0.25 * (a.radians() - b.radians()).cos();
                worst = worst.max((brute_force_success(a, b, lambda) - expected).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(
        worst < EXACT && elapsed < Duration::from_secs(1),
        format!("max deviation {worst:.2e} (< 1e-12), {elapsed:.2?} (< 1 s)"),
    )
}

fn cheating_optimum() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut ok = true;
    for lambda in OtBit::ALL {
        for (column, f) in [
            ("analytic", analytic_success as fn(MeasurementAxis, MeasurementAxis, OtBit) -> f64),
            ("oracle", brute_force_success),
        ] {
            let values: Vec<((usize, usize), f64)> = (0..GRID)
                .flat_map(|i| (0..GRID).map(move |j| (i, j)))
                .map(|(i, j)| ((i, j), f(grid_axis(i), grid_axis(j), lambda)))
                .collect();
            let max = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
            let argmax: Vec<_> = values.iter().filter(|v| max - v.1 <= EXACT).map(|v| v.0).collect();
            let argmin: Vec<_> = values.iter().filter(|v| v.1 - min <= EXACT).map(|v| v.0).collect();
            let max_set_ok = argmax.len() == GRID && argmax.iter().all(|&(i, j)| i == j);
            let min_set_ok = argmin.len() == GRID && argmin.iter().all(|&(i, j)| (i + GRID - j) % GRID == GRID / 2);
            let values_ok = (max - 0.75).abs() < EXACT && (min - 0.25).abs() < EXACT;
            ok &= max_set_ok && min_set_ok && values_ok;
            detail.push(format!("{column}[{lambda}] max {max:.12} min {min:.12}"));
        }
    }
    let elapsed = start.elapsed();
    ensure(ok && elapsed < Duration::from_secs(1), format!("{}; {elapsed:.2?}", detail.join(", ")))
}

fn monte_carlo_agreement() -> Outcome {
    let start = Instant::now();
    let n = 1_000_000;
    let equal = monte_carlo_success(Strategy::fixed(0.0, 0.0).unwrap(), OtBit::Plus, n, SEED).map_err(|e| e.to_string())?;
    let orthogonal =
        monte_carlo_success(Strategy::fixed(0.0, FRAC_PI_2).unwrap(), OtBit::Plus, n, SEED + 1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let equal_band = 5.0 * (0.1875f64 / 1e6).sqrt();
    ensure(
        within(equal.monte_carlo, 0.75, equal_band)
            && within(orthogonal.monte_carlo, 0.5, 0.0025)
            && elapsed < Duration::from_secs(60),
        format!(
            "(0,0): {:.6} in 0.75 +/- {equal_band:.5}; (0,pi/2): {:.6} in 0.5 +/- 0.0025; {elapsed:.2?}",
            equal.monte_carlo, orthogonal.monte_carlo
        ),
    )
}

fn honest_ot_semantics() -> Outcome {
    let n = 100_000;
    let stats = simulate_sessions(OtBit::Plus, honest_bob_strategy(), ChannelConfig::lossless(), n, SEED + 2)
        .map_err(|e| e.to_string())?;
    let not_knows = n - stats.knows;
    let blind_band = MC_SIGMAS * binomial_std_error(0.5, not_knows);
    ensure(
        within(stats.knows_rate(), 0.5, 0.0079)
            && stats.correct_when_knows == stats.knows
            && within(stats.accuracy_when_not_knows(), 0.5, blind_band),
        format!(
            "knows {:.5} in 0.5 +/- 0.0079; correct|knows {}/{}; correct|not {:.5} in 0.5 +/- {blind_band:.5}",
            stats.knows_rate(),
            stats.correct_when_knows,
            stats.knows,
            stats.accuracy_when_not_knows()
        ),
    )
}

fn ceiling_equals_honest() -> Outcome {
    let n = 1_000_000;
    let band = MC_SIGMAS * binomial_std_error(0.75, n);
    let honest = monte_carlo_success(Strategy::Honest, OtBit::Plus, n, SEED + 3).map_err(|e| e.to_string())?;
    let cheater = monte_carlo_success(Strategy::fixed(0.0, 0.0).unwrap(), OtBit::Minus, n, SEED + 4).map_err(|e| e.to_string())?;
    ensure(
        within(honest.monte_carlo, 0.75, band) && within(cheater.monte_carlo, 0.75, band),
        format!("honest {:.6}, best cheater {:.6}, both in 0.75 +/- {band:.5}", honest.monte_carlo, cheater.monte_carlo),
    )
}

fn storage_attack_wins() -> Outcome {
    let mut rng = RandomStream::new(SEED + 5);
    let pairs = ParticlePair::all_valid();
    let exhaustive = pairs
        .iter()
        .filter(|p| storage_attack(p.seal(), p.basis(), &mut rng) == p.encoded_bit())
        .count();
    let mut session_rates = Vec::new();
    for lambda in OtBit::ALL {
        let r = monte_carlo_success(Strategy::Storage, lambda, 10_000, SEED + 6).map_err(|e| e.to_string())?;
        session_rates.push(r.monte_carlo);
    }
    ensure(
        exhaustive == 8 && session_rates.iter().all(|&r| r == 1.0),
        format!("exhaustive {exhaustive}/8; session success {session_rates:?}"),
    )
}

fn ck_comparison() -> Outcome {
    let diag = MeasurementAxis::new(FRAC_PI_4).unwrap();
    let exact = ck_success_probability(diag);
    let n = 1_000_000;
    let mc = ck_monte_carlo(diag, n, SEED + 7).map_err(|e| e.to_string())?;
    let band = MC_SIGMAS * binomial_std_error(COS2_PI_8, n);
    let ceiling = (0..GRID)
        .flat_map(|i| (0..GRID).map(move |j| (i, j)))
        .flat_map(|(i, j)| OtBit::ALL.map(|l| brute_force_success(grid_axis(i), grid_axis(j), l)))
        .fold(f64::NEG_INFINITY, f64::max);
    ensure(
        (exact - COS2_PI_8).abs() < EXACT && within(mc.monte_carlo, COS2_PI_8, band) && exact > 0.75 && (ceiling - 0.75).abs() < EXACT,
        format!("single particle {exact:.12} (mc {:.6} +/- {band:.5}) vs two-particle max {ceiling:.12}", mc.monte_carlo),
    )
}

fn retry_statistics() -> Outcome {
    let n = 10_000;
    let channel = ChannelConfig::new(0.5, 64).unwrap();
    let stats = simulate_sessions(OtBit::Minus, honest_bob_strategy(), channel, n, SEED + 8).map_err(|e| e.to_string())?;
    // geometric, per-round success 1/4: sd sqrt(0.75)/0.25
    let band = MC_SIGMAS * 0.75f64.sqrt() / 0.25 / (n as f64).sqrt();
    ensure(
        within(stats.mean_rounds(), 4.0, band),
        format!("mean rounds {:.4} in 4 +/- {band:.4}", stats.mean_rounds()),
    )
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qot"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("qot {args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let seed = SEED.to_string();
    let verify_a = run_cli(&["verify", "--seed", &seed])?;
    let verify_b = run_cli(&["verify", "--seed", &seed])?;

    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let sweep = |path: &std::path::Path| {
        run_cli(&["sweep", "--seed", &seed, "--trials", "2000", "--output", path.to_str().unwrap()])
    };
    let summary_a = sweep(&csv_a)?;
    let summary_b = sweep(&csv_b)?;
    let bytes_a = std::fs::read(&csv_a).map_err(|e| e.to_string())?;
    let bytes_b = std::fs::read(&csv_b).map_err(|e| e.to_string())?;
    ensure(
        verify_a == verify_b && summary_a == summary_b && bytes_a == bytes_b && !bytes_a.is_empty(),
        format!(
            "verify stdout {} bytes identical: {}; sweep csv {} bytes identical: {}",
            verify_a.len(),
            verify_a == verify_b,
            bytes_a.len(),
            bytes_a == bytes_b
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 closed-form reproduction", closed_form_reproduction),
        ("2 cheating optimum", cheating_optimum),
        ("3 monte-carlo agreement", monte_carlo_agreement),
        ("4 honest OT semantics", honest_ot_semantics),
        ("5 cheating ceiling equals honest", ceiling_equals_honest),
        ("6 storage attack", storage_attack_wins),
        ("7 single-particle comparison", ck_comparison),
        ("8 retry-loop statistics", retry_statistics),
        ("9 determinism", determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name:<36} {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name:<36} {detail}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", 9 - failures, 9);
    if failures > 0 {
        std::process::exit(1);
    }
}
