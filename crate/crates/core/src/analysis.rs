//! Success probabilities of the receiver's strategies, computed three ways:
//! the closed form, an exact enumeration over every preparation and outcome,
//! and Monte Carlo over full protocol sessions.
//!
//! The enumeration only shares [`aligned_probability`] with the rest of the
//! crate, so agreement between it and the closed form is a real check.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::adversary::{ck_optimal_guess, ck_run, CkProtocolInstance, Strategy};
use crate::encoding::{spin_sign, Basis, OtBit, ParticlePair, SpinSign};
use crate::error::{Error, Result};
use crate::protocol::{run_session, ChannelConfig};
use crate::qstate::{aligned_probability, derive_seed, MeasurementAxis, Outcome, RandomStream};
use crate::stats::{binomial_std_error, within_binomial_band};

/// Default sweep spacing: π/16, i.e. 17 points on `[0, π]`.
pub const DEFAULT_GRID_STEP: f64 = PI / 16.0;

/// Cells whose analytic value is within this of the extremum count as extremal.
pub const ARGMAX_TOLERANCE: f64 = 1e-12;

/// Probability rule `(theta, axis) -> P(aligned)` used by the enumeration.
pub type MeasurementRule = fn(f64, MeasurementAxis) -> f64;

/// Probability that a fixed-angle cheater outputs the right bit:
/// `1/2 + cos(α − β)/4`, the same for both values of the bit.
pub fn analytic_success(alpha: MeasurementAxis, beta: MeasurementAxis, _lambda: OtBit) -> f64 {
    0.5 + 0.25 * (alpha.radians() - beta.radians()).cos()
}

/// `[P(λ′ = +1), P(λ′ = −1)]` for a fixed-angle cheater, by enumerating
/// 2 bases × 2 sign patterns × 4 outcome pairs with explicit probability rules
/// for the first and second particle.
pub fn outcome_distribution_with(
    alpha: MeasurementAxis,
    beta: MeasurementAxis,
    lambda: OtBit,
    first_rule: MeasurementRule,
    second_rule: MeasurementRule,
) -> [f64; 2] {
    let mut dist = [0.0; 2];
    for pair in ParticlePair::all_valid().into_iter().filter(|p| p.encoded_bit() == lambda) {
        // each basis w.p. 1/2, each of its two patterns w.p. 1/2
        let weight = 0.25;
        let p1 = first_rule(pair.theta1.radians(), alpha);
        let p2 = second_rule(pair.theta2.radians(), beta);
        for (o1, q1) in [(1i8, p1), (-1, 1.0 - p1)] {
            for (o2, q2) in [(1i8, p2), (-1, 1.0 - p2)] {
                let slot = if o1 * o2 == 1 { 0 } else { 1 };
                dist[slot] += weight * q1 * q2;
            }
        }
    }
    dist
}

pub fn brute_force_distribution(alpha: MeasurementAxis, beta: MeasurementAxis, lambda: OtBit) -> [f64; 2] {
    outcome_distribution_with(alpha, beta, lambda, aligned_probability, aligned_probability)
}

/// Exact probability that the fixed-angle cheater's guess equals `lambda`.
pub fn brute_force_success(alpha: MeasurementAxis, beta: MeasurementAxis, lambda: OtBit) -> f64 {
    success_from(brute_force_distribution(alpha, beta, lambda), lambda)
}

fn success_from(dist: [f64; 2], lambda: OtBit) -> f64 {
    match lambda {
        OtBit::Plus => dist[0],
        OtBit::Minus => dist[1],
    }
}

/// Closed-form success probability of any strategy.
pub fn analytic_strategy_success(strategy: Strategy, lambda: OtBit) -> f64 {
    match strategy {
        // learns the bit when the axis matches, coin flip otherwise
        Strategy::Honest => 0.75,
        Strategy::FixedAngles { alpha, beta } => analytic_success(alpha, beta, lambda),
        Strategy::Storage => 1.0,
    }
}

/// Exact success probability of any strategy by enumeration.
pub fn brute_force_strategy_success(strategy: Strategy, lambda: OtBit) -> f64 {
    match strategy {
        Strategy::FixedAngles { alpha, beta } => brute_force_success(alpha, beta, lambda),
        Strategy::Honest => {
            let mut total = 0.0;
            for choice in Basis::ALL {
                let axis = choice.zero_direction();
                for pair in ParticlePair::all_valid().into_iter().filter(|p| p.encoded_bit() == lambda) {
                    // 1/2 axis choice × 1/2 basis × 1/2 pattern
                    let weight = 0.125;
                    if choice != pair.basis() {
                        total += weight * 0.5;
                        continue;
                    }
                    total += weight * product_success(pair, axis, axis, lambda);
                }
            }
            total
        }
        Strategy::Storage => ParticlePair::all_valid()
            .into_iter()
            .filter(|p| p.encoded_bit() == lambda)
            .map(|pair| {
                let axis = pair.basis().zero_direction();
                0.25 * product_success(pair, axis, axis, lambda)
            })
            .sum(),
    }
}

fn product_success(pair: ParticlePair, a1: MeasurementAxis, a2: MeasurementAxis, lambda: OtBit) -> f64 {
    let p1 = aligned_probability(pair.theta1.radians(), a1);
    let p2 = aligned_probability(pair.theta2.radians(), a2);
    let same = p1 * p2 + (1.0 - p1) * (1.0 - p2);
    match lambda {
        OtBit::Plus => same,
        OtBit::Minus => 1.0 - same,
    }
}

/// One strategy's success probability from all three routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessReport {
    pub analytic: f64,
    pub brute_force: f64,
    pub monte_carlo: f64,
    /// `sqrt(p̂(1 − p̂)/trials)` with `p̂` the Monte Carlo estimate.
    pub mc_std_error: f64,
    pub trials: u64,
}

impl SuccessReport {
    /// `|analytic − brute_force| < 1e-12`.
    pub fn exact_routes_agree(&self) -> bool {
        (self.analytic - self.brute_force).abs() < 1e-12
    }

    /// Monte Carlo estimate within five standard errors of the analytic value
    /// (σ from the analytic proportion, so a deterministic strategy must hit
    /// it exactly).
    pub fn monte_carlo_agrees(&self) -> bool {
        within_binomial_band(self.monte_carlo, self.analytic, self.trials)
    }
}

/// Counts gathered over a batch of sessions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub sessions: u64,
    pub knows: u64,
    pub correct: u64,
    pub correct_when_knows: u64,
    pub correct_when_not_knows: u64,
    pub axis_x: u64,
    pub rounds_sum: u64,
    pub rounds_sq_sum: u64,
}

impl SessionStats {
    fn add(mut self, other: Self) -> Self {
        self.sessions += other.sessions;
        self.knows += other.knows;
        self.correct += other.correct;
        self.correct_when_knows += other.correct_when_knows;
        self.correct_when_not_knows += other.correct_when_not_knows;
        self.axis_x += other.axis_x;
        self.rounds_sum += other.rounds_sum;
        self.rounds_sq_sum += other.rounds_sq_sum;
        self
    }

    pub fn record(&mut self, result: &crate::protocol::SessionResult) {
        let correct = result.guessed_correctly() as u64;
        let rounds = result.rounds_used as u64;
        self.sessions += 1;
        self.correct += correct;
        if result.bob_knows {
            self.knows += 1;
            self.correct_when_knows += correct;
        } else {
            self.correct_when_not_knows += correct;
        }
        self.axis_x += (result.bob_axis == Some(Basis::H)) as u64;
        self.rounds_sum += rounds;
        self.rounds_sq_sum += rounds * rounds;
    }

    pub fn knows_rate(&self) -> f64 {
        ratio(self.knows, self.sessions)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct, self.sessions)
    }

    pub fn accuracy_when_knows(&self) -> f64 {
        ratio(self.correct_when_knows, self.knows)
    }

    pub fn accuracy_when_not_knows(&self) -> f64 {
        ratio(self.correct_when_not_knows, self.sessions - self.knows)
    }

    pub fn mean_rounds(&self) -> f64 {
        ratio(self.rounds_sum, self.sessions)
    }

    /// Standard error of [`SessionStats::mean_rounds`].
    pub fn rounds_std_error(&self) -> f64 {
        if self.sessions < 2 {
            return 0.0;
        }
        let n = self.sessions as f64;
        let mean = self.mean_rounds();
        let var = (self.rounds_sq_sum as f64 - n * mean * mean) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

/// Seeds for trial `index` of a batch keyed by `seed`: `(alice, bob)`.
pub fn trial_seeds(seed: u64, index: u64) -> (u64, u64) {
    (derive_seed(seed, 2 * index), derive_seed(seed, 2 * index + 1))
}

/// Runs `trials` independent sessions in parallel and aggregates them.
/// The result depends only on the arguments, not on the thread count.
pub fn simulate_sessions(
    lambda: OtBit,
    strategy: Strategy,
    channel: ChannelConfig,
    trials: u64,
    seed: u64,
) -> Result<SessionStats> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let (alice, bob) = trial_seeds(seed, i);
            let result = run_session(lambda, strategy, channel, alice, bob)?;
            let mut stats = SessionStats::default();
            stats.record(&result);
            Ok(stats)
        })
        .try_reduce(SessionStats::default, |a, b| Ok(a.add(b)))
}

/// Estimates a strategy's success rate over lossless sessions.
pub fn monte_carlo_success(strategy: Strategy, lambda: OtBit, trials: u64, seed: u64) -> Result<SuccessReport> {
    let stats = simulate_sessions(lambda, strategy, ChannelConfig::lossless(), trials, seed)?;
    let estimate = stats.accuracy();
    Ok(SuccessReport {
        analytic: analytic_strategy_success(strategy, lambda),
        brute_force: brute_force_strategy_success(strategy, lambda),
        monte_carlo: estimate,
        mc_std_error: binomial_std_error(estimate, trials),
        trials,
    })
}

/// Cartesian grid of measurement angle pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub alpha_values: Vec<MeasurementAxis>,
    pub beta_values: Vec<MeasurementAxis>,
    pub lambda: OtBit,
}

impl SweepGrid {
    pub fn new(alpha_values: Vec<MeasurementAxis>, beta_values: Vec<MeasurementAxis>, lambda: OtBit) -> Result<Self> {
        if alpha_values.is_empty() || beta_values.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(Self {
            alpha_values,
            beta_values,
            lambda,
        })
    }

    /// Points `0, step, 2·step, …` up to π (inclusive, to within 1e-9 steps)
    /// on both axes.
    pub fn uniform(step: f64, lambda: OtBit) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::NonFiniteAngle(step));
        }
        let count = (PI / step + 1e-9).floor() as usize + 1;
        let values = (0..count)
            .map(|k| MeasurementAxis::new(k as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values.clone(), values, lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: MeasurementAxis,
    pub beta: MeasurementAxis,
    pub lambda: OtBit,
    pub report: SuccessReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// Row-major: alpha outer, beta inner.
    pub rows: Vec<SweepRow>,
    /// Indices of rows attaining the maximum analytic value.
    pub argmax: Vec<usize>,
}

pub const CSV_HEADER: &str = "alpha,beta,lambda,analytic,brute_force,monte_carlo,std_error,trials";

impl SweepTable {
    pub fn max_analytic(&self) -> f64 {
        self.rows.iter().map(|r| r.report.analytic).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes the table as CSV (LF line endings, 10 significant digits).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            let r = &row.report;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                format_sig(row.alpha.radians()),
                format_sig(row.beta.radians()),
                row.lambda,
                format_sig(r.analytic),
                format_sig(r.brute_force),
                format_sig(r.monte_carlo),
                format_sig(r.mc_std_error),
                r.trials
            )?;
        }
        Ok(())
    }
}

/// Fixed-point rendering with 10 significant digits.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (DIGITS - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One Monte Carlo report per grid cell, seeded per cell.
pub fn sweep(grid: &SweepGrid, trials_per_cell: u64, seed: u64) -> Result<SweepTable> {
    let mut rows = Vec::with_capacity(grid.alpha_values.len() * grid.beta_values.len());
    for &alpha in &grid.alpha_values {
        for &beta in &grid.beta_values {
            let cell_seed = derive_seed(seed, rows.len() as u64);
            let report = monte_carlo_success(Strategy::FixedAngles { alpha, beta }, grid.lambda, trials_per_cell, cell_seed)?;
            rows.push(SweepRow {
                alpha,
                beta,
                lambda: grid.lambda,
                report,
            });
        }
    }
    let max = rows.iter().map(|r| r.report.analytic).fold(f64::NEG_INFINITY, f64::max);
    let argmax = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| max - r.report.analytic <= ARGMAX_TOLERANCE)
        .map(|(i, _)| i)
        .collect();
    Ok(SweepTable { rows, argmax })
}

/// Exact probability that the Bayes-optimal guess is right in the
/// single-particle protocol when measuring along `measure_axis`, by
/// enumerating basis × sign × outcome.
pub fn ck_success_probability(measure_axis: MeasurementAxis) -> f64 {
    let mut total = 0.0;
    for basis in Basis::ALL {
        for sign in [SpinSign::Plus, SpinSign::Minus] {
            let theta = basis.angle_for(sign);
            let bit = OtBit::from_sign(spin_sign(theta).value());
            let p = aligned_probability(theta.radians(), measure_axis);
            for (outcome, q) in [(Outcome::Aligned, p), (Outcome::AntiAligned, 1.0 - p)] {
                if ck_optimal_guess(outcome, measure_axis, basis) == bit {
                    total += 0.25 * q;
                }
            }
        }
    }
    total
}

/// Closed form of [`ck_success_probability`]: `1/2 + (|cos a| + |sin a|)/4`.
pub fn ck_analytic_success(measure_axis: MeasurementAxis) -> f64 {
    let a = measure_axis.radians();
    0.5 + 0.25 * (a.cos().abs() + a.sin().abs())
}

/// Monte Carlo over single-particle runs with a uniformly random bit and basis.
pub fn ck_monte_carlo(measure_axis: MeasurementAxis, trials: u64, seed: u64) -> Result<SuccessReport> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let correct: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::new(derive_seed(seed, i));
            let instance = CkProtocolInstance::random(&mut rng);
            let outcome = ck_run(&instance, measure_axis, &mut rng);
            (ck_optimal_guess(outcome, measure_axis, instance.basis) == instance.bit) as u64
        })
        .sum();
    let estimate = correct as f64 / trials as f64;
    Ok(SuccessReport {
        analytic: ck_analytic_success(measure_axis),
        brute_force: ck_success_probability(measure_axis),
        monte_carlo: estimate,
        mc_std_error: binomial_std_error(estimate, trials),
        trials,
    })
}
