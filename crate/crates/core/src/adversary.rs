//! Receiver-side strategies, honest and cheating, and the single-particle
//! comparison protocol.
//!
//! Strategies only ever touch particles through [`Particle::measure`]; none
//! of them can read a preparation angle.

use std::fmt;

use crate::encoding::{decode, spin_sign, Basis, OtBit, SealedPair};
use crate::qstate::{aligned_probability, MeasurementAxis, Outcome, Particle, PreparationAngle, RandomStream};

/// How Bob handles the two particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Pick x or y at random and measure both particles along it.
    Honest,
    /// Measure particle 1 along `alpha` and particle 2 along `beta` on
    /// arrival, then output the outcome product.
    FixedAngles { alpha: MeasurementAxis, beta: MeasurementAxis },
    /// Keep both particles unmeasured until the basis is revealed, then
    /// measure along it.
    Storage,
}

impl Strategy {
    pub fn fixed(alpha: f64, beta: f64) -> Result<Self, crate::Error> {
        Ok(Self::FixedAngles {
            alpha: MeasurementAxis::new(alpha)?,
            beta: MeasurementAxis::new(beta)?,
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Honest => f.write_str("honest"),
            Self::FixedAngles { alpha, beta } => {
                write!(f, "fixed(alpha={:.10}, beta={:.10})", alpha.radians(), beta.radians())
            }
            Self::Storage => f.write_str("storage"),
        }
    }
}

/// Bit guessed from two outcomes: the product of their signs.
pub fn cheating_inference(outcome1: Outcome, outcome2: Outcome) -> OtBit {
    decode(outcome1.into(), outcome2.into())
}

/// Measures both stored particles along the revealed basis and decodes.
/// Always recovers the encoded bit.
pub fn storage_attack(pair: SealedPair, revealed: Basis, rng: &mut RandomStream) -> OtBit {
    let axis = revealed.zero_direction();
    let first = pair.first.measure(axis, rng);
    let second = pair.second.measure(axis, rng);
    cheating_inference(first, second)
}

/// One run of the single-particle protocol: the bit is the spin sign of a
/// lone particle prepared on a random axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CkProtocolInstance {
    pub bit: OtBit,
    pub basis: Basis,
    pub theta: PreparationAngle,
}

impl CkProtocolInstance {
    pub fn new(bit: OtBit, basis: Basis) -> Self {
        let sign = match bit {
            OtBit::Plus => crate::encoding::SpinSign::Plus,
            OtBit::Minus => crate::encoding::SpinSign::Minus,
        };
        let theta = basis.angle_for(sign);
        debug_assert_eq!(spin_sign(theta), sign);
        Self { bit, basis, theta }
    }

    /// Random bit then random basis, two draws.
    pub fn random(rng: &mut RandomStream) -> Self {
        let bit = OtBit::random(rng);
        let basis = Basis::random(rng);
        Self::new(bit, basis)
    }
}

/// Bob's single measurement in the single-particle protocol.
pub fn ck_run(instance: &CkProtocolInstance, measure_axis: MeasurementAxis, rng: &mut RandomStream) -> Outcome {
    Particle::new(instance.theta).measure(measure_axis, rng)
}

/// Posterior probability that the bit is `+1`, given the outcome, the axis
/// it was measured on and the basis Alice later revealed. Uniform prior.
pub fn ck_posterior_plus(outcome: Outcome, measure_axis: MeasurementAxis, revealed: Basis) -> f64 {
    let likelihood = |bit: OtBit| {
        let theta = CkProtocolInstance::new(bit, revealed).theta.radians();
        let p = aligned_probability(theta, measure_axis);
        match outcome {
            Outcome::Aligned => p,
            Outcome::AntiAligned => 1.0 - p,
        }
    };
    let plus = likelihood(OtBit::Plus);
    let minus = likelihood(OtBit::Minus);
    plus / (plus + minus)
}

/// Maximum-posterior guess of the bit. Ties (posterior within `1e-12` of
/// one half) go to `+1`.
pub fn ck_optimal_guess(outcome: Outcome, measure_axis: MeasurementAxis, revealed: Basis) -> OtBit {
    if ck_posterior_plus(outcome, measure_axis, revealed) >= 0.5 - 1e-12 {
        OtBit::Plus
    } else {
        OtBit::Minus
    }
}
