//! Encoding of the transferred bit into the sign product of two particles.
//!
//! Alice picks an axis (horizontal or vertical) and prepares two particles
//! along that axis whose spin signs multiply to the bit. A spin along 0 or
//! π/2 has sign `+1`; along π or 3π/2 it has sign `−1`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::qstate::{MeasurementAxis, Outcome, Particle, PreparationAngle, RandomStream};

/// The transferred bit. `Minus` plays the role of the classical bit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OtBit {
    Plus,
    Minus,
}

impl OtBit {
    pub const ALL: [OtBit; 2] = [OtBit::Plus, OtBit::Minus];

    pub fn from_sign(value: i8) -> Self {
        if value >= 0 {
            Self::Plus
        } else {
            Self::Minus
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Self::Plus => 1,
            Self::Minus => -1,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }

    pub fn random(rng: &mut RandomStream) -> Self {
        if rng.coin() {
            Self::Plus
        } else {
            Self::Minus
        }
    }
}

impl fmt::Display for OtBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "+1",
            Self::Minus => "-1",
        })
    }
}

impl FromStr for OtBit {
    type Err = String;

    /// Accepts `+1`/`1` and `-1`/`0`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "+1" | "1" => Ok(Self::Plus),
            "-1" | "0" => Ok(Self::Minus),
            other => Err(format!("invalid bit `{other}`: expected +1, -1, 1 or 0")),
        }
    }
}

/// Sign of one particle's spin along the encoding axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinSign {
    Plus,
    Minus,
}

impl SpinSign {
    pub fn value(self) -> i8 {
        match self {
            Self::Plus => 1,
            Self::Minus => -1,
        }
    }

    fn times(self, bit: OtBit) -> SpinSign {
        if self.value() * bit.value() > 0 {
            SpinSign::Plus
        } else {
            SpinSign::Minus
        }
    }
}

impl From<Outcome> for SpinSign {
    fn from(outcome: Outcome) -> Self {
        match outcome {
            Outcome::Aligned => SpinSign::Plus,
            Outcome::AntiAligned => SpinSign::Minus,
        }
    }
}

/// Encoding axis: horizontal (0, π) or vertical (π/2, 3π/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    H,
    V,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::H, Basis::V];

    /// Uniform choice, one draw.
    pub fn random(rng: &mut RandomStream) -> Self {
        if rng.coin() {
            Self::H
        } else {
            Self::V
        }
    }

    /// The `+1` direction of this axis (0 for H, π/2 for V).
    pub fn zero_direction(self) -> MeasurementAxis {
        match self {
            Self::H => MeasurementAxis::X,
            Self::V => MeasurementAxis::Y,
        }
    }

    pub fn angle_for(self, sign: SpinSign) -> PreparationAngle {
        match (self, sign) {
            (Self::H, SpinSign::Plus) => PreparationAngle::Zero,
            (Self::H, SpinSign::Minus) => PreparationAngle::Pi,
            (Self::V, SpinSign::Plus) => PreparationAngle::HalfPi,
            (Self::V, SpinSign::Minus) => PreparationAngle::ThreeHalfPi,
        }
    }

    pub fn of(angle: PreparationAngle) -> Self {
        match angle {
            PreparationAngle::Zero | PreparationAngle::Pi => Self::H,
            PreparationAngle::HalfPi | PreparationAngle::ThreeHalfPi => Self::V,
        }
    }

    /// Which way `axis` points along this basis line, within `1e-12` rad:
    /// `Plus` for the zero direction, `Minus` for its opposite, `None` if the
    /// axis is off the line.
    pub fn orientation(self, axis: MeasurementAxis) -> Option<SpinSign> {
        let offset = (axis.radians() - self.zero_direction().radians()).rem_euclid(TAU);
        let near = |target: f64| (offset - target).abs() < 1e-12;
        if near(0.0) || near(TAU) {
            Some(SpinSign::Plus)
        } else if near(PI) {
            Some(SpinSign::Minus)
        } else {
            None
        }
    }

    /// Whether `axis` lies on this basis line, in either direction.
    pub fn contains(self, axis: MeasurementAxis) -> bool {
        self.orientation(axis).is_some()
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::H => "H",
            Self::V => "V",
        })
    }
}

impl FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "H" => Ok(Self::H),
            "V" => Ok(Self::V),
            other => Err(format!("invalid basis `{other}`")),
        }
    }
}

/// Sign of a prepared spin: `+1` for 0 and π/2, `−1` for π and 3π/2.
pub fn spin_sign(theta: PreparationAngle) -> SpinSign {
    match theta {
        PreparationAngle::Zero | PreparationAngle::HalfPi => SpinSign::Plus,
        PreparationAngle::Pi | PreparationAngle::ThreeHalfPi => SpinSign::Minus,
    }
}

/// Bob's inferred bit: the product of the two observed signs.
pub fn decode(b1: SpinSign, b2: SpinSign) -> OtBit {
    OtBit::from_sign(b1.value() * b2.value())
}

/// Alice's record of the two particles she prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParticlePair {
    pub theta1: PreparationAngle,
    pub theta2: PreparationAngle,
}

impl ParticlePair {
    pub fn basis(&self) -> Basis {
        Basis::of(self.theta1)
    }

    pub fn encoded_bit(&self) -> OtBit {
        decode(spin_sign(self.theta1), spin_sign(self.theta2))
    }

    /// Produces the physical particles. Their angles are not observable
    /// through the returned value.
    pub fn seal(&self) -> SealedPair {
        SealedPair {
            first: Particle::new(self.theta1),
            second: Particle::new(self.theta2),
        }
    }

    /// All eight pairs the encoder can produce.
    pub fn all_valid() -> Vec<ParticlePair> {
        let mut pairs = Vec::with_capacity(8);
        for lambda in OtBit::ALL {
            for basis in Basis::ALL {
                for first in [SpinSign::Plus, SpinSign::Minus] {
                    pairs.push(ParticlePair {
                        theta1: basis.angle_for(first),
                        theta2: basis.angle_for(first.times(lambda)),
                    });
                }
            }
        }
        pairs
    }
}

/// Two particles as seen by the receiver: they can only be measured.
#[derive(Debug)]
pub struct SealedPair {
    pub first: Particle,
    pub second: Particle,
}

/// Prepares a pair on `basis` whose sign product is `lambda`.
///
/// Draws once from `rng` to pick the first particle's sign; the second sign
/// is then forced. Callers choosing the basis at random draw it before
/// calling this.
pub fn prepare(lambda: OtBit, basis: Basis, rng: &mut RandomStream) -> ParticlePair {
    let first = if rng.coin() { SpinSign::Plus } else { SpinSign::Minus };
    ParticlePair {
        theta1: basis.angle_for(first),
        theta2: basis.angle_for(first.times(lambda)),
    }
}
