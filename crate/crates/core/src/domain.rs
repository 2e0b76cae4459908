//! Domain types shared by every model: angles, polarizer settings, the
//! hidden charge, outcomes and the four-cell joint distribution algebra.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for analytic probability identities.
pub const PROB_TOL: f64 = 1e-12;

/// A plane angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn from_radians(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Angle(value))
        } else {
            Err(Error::NonFiniteAngle(value))
        }
    }

    pub fn from_degrees(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Angle(value.to_radians()))
        } else {
            Err(Error::NonFiniteAngle(value))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Equivalent angle in [-pi, pi).
    pub fn canonical(self) -> Angle {
        let mut v = self.0 - TAU * ((self.0 + PI) / TAU).floor();
        // floor() can leave v == pi after rounding
        if v >= PI {
            v -= TAU;
        }
        if v < -PI {
            v += TAU;
        }
        Angle(v)
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    /// cos^2 via the half-angle form, exact at multiples of 90 degrees.
    pub fn cos_sq(self) -> f64 {
        0.5 * (1.0 + (2.0 * self.0).cos())
    }

    /// sin^2 via the half-angle form, exact at multiples of 90 degrees.
    pub fn sin_sq(self) -> f64 {
        0.5 * (1.0 - (2.0 * self.0).cos())
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Angle::from_radians(value)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle(self.0 - rhs.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}

/// Optical-axis orientations of the two polarizers (or boxes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizerSettings {
    pub theta_a: Angle,
    pub theta_b: Angle,
}

impl PolarizerSettings {
    pub fn new(theta_a: Angle, theta_b: Angle) -> Self {
        PolarizerSettings { theta_a, theta_b }
    }

    pub fn from_degrees(theta_a: f64, theta_b: f64) -> Result<Self> {
        Ok(PolarizerSettings::new(
            Angle::from_degrees(theta_a)?,
            Angle::from_degrees(theta_b)?,
        ))
    }

    /// theta_a - theta_b, canonicalized.
    pub fn relative_angle(&self) -> Angle {
        relative_angle(self)
    }
}

pub fn relative_angle(s: &PolarizerSettings) -> Angle {
    (s.theta_a - s.theta_b).canonical()
}

/// Hidden two-valued variable carried by each emitted pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhotonCharge {
    Positive,
    Negative,
}

impl PhotonCharge {
    pub const ALL: [PhotonCharge; 2] = [PhotonCharge::Positive, PhotonCharge::Negative];

    pub fn index(self) -> usize {
        match self {
            PhotonCharge::Positive => 0,
            PhotonCharge::Negative => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PhotonCharge::Positive => "positive",
            PhotonCharge::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Yes,
    No,
}

impl Outcome {
    pub fn from_pass(passed: bool) -> Self {
        if passed {
            Outcome::Yes
        } else {
            Outcome::No
        }
    }
}

/// Index of the joint cell (a, b) in YY, YN, NY, NN order.
pub fn cell_index(a: Outcome, b: Outcome) -> usize {
    let row = usize::from(a == Outcome::No);
    let col = usize::from(b == Outcome::No);
    2 * row + col
}

pub const CELL_LABELS: [&str; 4] = ["yy", "yn", "ny", "nn"];

/// Probabilities of the four joint outcomes (A, B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct JointDistribution {
    p_yy: f64,
    p_yn: f64,
    p_ny: f64,
    p_nn: f64,
}

#[derive(Deserialize)]
struct RawDistribution {
    p_yy: f64,
    p_yn: f64,
    p_ny: f64,
    p_nn: f64,
}

impl TryFrom<RawDistribution> for JointDistribution {
    type Error = Error;

    fn try_from(r: RawDistribution) -> Result<Self> {
        JointDistribution::new(r.p_yy, r.p_yn, r.p_ny, r.p_nn)
    }
}

impl JointDistribution {
    pub fn new(p_yy: f64, p_yn: f64, p_ny: f64, p_nn: f64) -> Result<Self> {
        Self::from_cells([p_yy, p_yn, p_ny, p_nn])
    }

    pub fn from_cells(cells: [f64; 4]) -> Result<Self> {
        for (label, &p) in CELL_LABELS.iter().zip(cells.iter()) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange { cell: label, value: p });
            }
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(JointDistribution {
            p_yy: cells[0],
            p_yn: cells[1],
            p_ny: cells[2],
            p_nn: cells[3],
        })
    }

    /// Product distribution of two conditionally independent pass events.
    pub fn independent(pass_a: f64, pass_b: f64) -> Result<Self> {
        let fail_a = 1.0 - pass_a;
        let fail_b = 1.0 - pass_b;
        Self::new(pass_a * pass_b, pass_a * fail_b, fail_a * pass_b, fail_a * fail_b)
    }

    pub fn p_yy(&self) -> f64 {
        self.p_yy
    }

    pub fn p_yn(&self) -> f64 {
        self.p_yn
    }

    pub fn p_ny(&self) -> f64 {
        self.p_ny
    }

    pub fn p_nn(&self) -> f64 {
        self.p_nn
    }

    pub fn cells(&self) -> [f64; 4] {
        [self.p_yy, self.p_yn, self.p_ny, self.p_nn]
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.cells()[cell_index(a, b)]
    }

    /// Probability that both sides record the same result.
    pub fn p_agree(&self) -> f64 {
        self.p_yy + self.p_nn
    }

    pub fn max_abs_diff(&self, other: &JointDistribution) -> f64 {
        self.cells()
            .iter()
            .zip(other.cells().iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Swap the roles of the two sides.
    pub fn transposed(&self) -> JointDistribution {
        JointDistribution {
            p_yy: self.p_yy,
            p_yn: self.p_ny,
            p_ny: self.p_yn,
            p_nn: self.p_nn,
        }
    }

    pub fn marginals(&self) -> Result<Marginals> {
        marginals(self)
    }
}

/// Single-side pass probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub p_a_yes: f64,
    pub p_b_yes: f64,
}

impl Marginals {
    pub fn p_a_no(&self) -> f64 {
        1.0 - self.p_a_yes
    }

    pub fn p_b_no(&self) -> f64 {
        1.0 - self.p_b_yes
    }
}

pub fn marginals(d: &JointDistribution) -> Result<Marginals> {
    let total: f64 = d.cells().iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(Marginals {
        p_a_yes: d.p_yy + d.p_yn,
        p_b_yes: d.p_yy + d.p_ny,
    })
}

/// A conditional distribution together with the probability of its condition.
///
/// Per-charge predictions keep the emission weight explicit rather than
/// pre-multiplying it into the cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedDistribution {
    pub weight: f64,
    pub distribution: JointDistribution,
}

impl WeightedDistribution {
    pub fn new(weight: f64, distribution: JointDistribution) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::WeightMismatch(weight));
        }
        Ok(WeightedDistribution { weight, distribution })
    }

    /// Cells multiplied by the weight.
    pub fn scaled_cells(&self) -> [f64; 4] {
        self.distribution.cells().map(|p| self.weight * p)
    }
}

/// Weighted sum of two conditional distributions whose weights total 1.
pub fn sum_distributions(
    a: &WeightedDistribution,
    b: &WeightedDistribution,
) -> Result<JointDistribution> {
    let total = a.weight + b.weight;
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::WeightMismatch(total));
    }
    let sa = a.scaled_cells();
    let sb = b.scaled_cells();
    JointDistribution::from_cells([sa[0] + sb[0], sa[1] + sb[1], sa[2] + sb[2], sa[3] + sb[3]])
}
