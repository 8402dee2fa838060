//! Measurement statistics for spin-½ particles polarized in the equatorial
//! (x–y) plane.
//!
//! Every state and every measurement axis used by the protocol lies in this
//! plane, so a particle is fully described by the angle of its spin with
//! respect to the x axis. Measuring along an axis at angle `alpha` yields
//! "aligned" with probability `cos²((alpha − theta)/2)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

pub(crate) const THREE_FRAC_PI_2: f64 = PI + FRAC_PI_2;

/// One of the four spin directions Alice may prepare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreparationAngle {
    /// Along +x.
    Zero,
    /// Along +y.
    HalfPi,
    /// Along −x.
    Pi,
    /// Along −y.
    ThreeHalfPi,
}

impl PreparationAngle {
    pub const ALL: [PreparationAngle; 4] = [Self::Zero, Self::HalfPi, Self::Pi, Self::ThreeHalfPi];

    pub fn radians(self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::HalfPi => FRAC_PI_2,
            Self::Pi => PI,
            Self::ThreeHalfPi => THREE_FRAC_PI_2,
        }
    }
}

impl TryFrom<f64> for PreparationAngle {
    type Error = Error;

    /// Accepts only the exact constants returned by [`PreparationAngle::radians`].
    fn try_from(theta: f64) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|a| a.radians() == theta)
            .ok_or(Error::InvalidPreparationAngle(theta))
    }
}

impl fmt::Display for PreparationAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zero => "0",
            Self::HalfPi => "pi/2",
            Self::Pi => "pi",
            Self::ThreeHalfPi => "3pi/2",
        })
    }
}

/// A measurement direction in the x–y plane, normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeasurementAxis(f64);

impl MeasurementAxis {
    pub const X: MeasurementAxis = MeasurementAxis(0.0);
    pub const Y: MeasurementAxis = MeasurementAxis(FRAC_PI_2);

    /// Builds an axis from any finite angle, reducing it modulo 2π.
    pub fn new(alpha: f64) -> Result<Self, Error> {
        if !alpha.is_finite() {
            return Err(Error::NonFiniteAngle(alpha));
        }
        let mut reduced = alpha.rem_euclid(TAU);
        // rem_euclid of a tiny negative value rounds up to exactly TAU
        if reduced >= TAU {
            reduced = 0.0;
        }
        Ok(Self(reduced))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Result of a single spin measurement relative to the measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Spin found along the axis (`+1`).
    Aligned,
    /// Spin found opposite the axis (`−1`).
    AntiAligned,
}

impl Outcome {
    pub fn sign(self) -> i8 {
        match self {
            Self::Aligned => 1,
            Self::AntiAligned => -1,
        }
    }
}

/// Probability that a particle with spin angle `theta` is found aligned with
/// an axis at angle `alpha`: `cos²((alpha − theta)/2)`.
///
/// Evaluated as `(1 + cos(alpha − theta))/2`, which is the same quantity but
/// lands exactly on 0 and 1 for parallel and antiparallel directions.
pub fn aligned_probability(theta: f64, alpha: MeasurementAxis) -> f64 {
    0.5 * (1.0 + (alpha.radians() - theta).cos())
}

/// Draws one measurement outcome. Consumes exactly one value from `rng`.
pub fn sample_measurement(theta: PreparationAngle, alpha: MeasurementAxis, rng: &mut RandomStream) -> Outcome {
    sample_with_probability(aligned_probability(theta.radians(), alpha), rng)
}

pub(crate) fn sample_with_probability(p_aligned: f64, rng: &mut RandomStream) -> Outcome {
    if rng.next_unit() < p_aligned {
        Outcome::Aligned
    } else {
        Outcome::AntiAligned
    }
}

/// A prepared particle in flight.
///
/// The spin angle is private: the only thing a holder can do with a particle
/// is measure it, which consumes it. There is intentionally no `Clone`.
#[derive(Debug)]
pub struct Particle {
    angle: PreparationAngle,
}

impl Particle {
    pub(crate) fn new(angle: PreparationAngle) -> Self {
        Self { angle }
    }

    pub fn measure(self, alpha: MeasurementAxis, rng: &mut RandomStream) -> Outcome {
        sample_measurement(self.angle, alpha, rng)
    }
}

/// Reproducible random stream backed by the ChaCha8 block function.
///
/// ChaCha is counter based, so a single seed supports 2⁶⁴ independent
/// streams; [`RandomStream::with_stream`] selects one. Every draw consumes
/// one 64-bit word.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Fair coin, one draw.
    pub fn coin(&mut self) -> bool {
        self.next_unit() < 0.5
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Derives the seed for the `index`-th child of `master` (SplitMix64 finalizer).
///
/// Used to hand every Monte Carlo trial its own seeds so that results do not
/// depend on how trials are distributed over worker threads.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
