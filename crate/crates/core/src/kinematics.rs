//! Relativistic and anisotropic-geometry formulas used by the models.
//!
//! Velocities are fractions of the speed of light (c = 1). Four-vectors use
//! the (+, -, -, -) signature so that (1, nu) is null for any unit nu.

use serde::{Deserialize, Serialize};

use crate::domain::Angle;
use crate::error::{Error, Result};

/// Tolerance for unit-length and null-interval checks.
pub const GEOMETRY_TOL: f64 = 1e-12;

/// Relative speed as a fraction of c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Velocity {
    beta: f64,
}

impl Velocity {
    /// |beta| = 1 is accepted as the limiting case of full contraction.
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta.abs() > 1.0 {
            return Err(Error::SuperluminalVelocity(beta.abs()));
        }
        Ok(Velocity { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// 1 / gamma, i.e. sqrt(1 - beta^2).
    pub fn inverse_gamma(&self) -> f64 {
        let b = self.beta.abs();
        ((1.0 - b) * (1.0 + b)).sqrt()
    }
}

/// Velocity at which a box whose index sits at relative angle `theta` moves.
///
/// The sign of the velocity for negative angles carries no meaning, so the
/// magnitude |sin theta| is returned.
pub fn angle_to_velocity(theta: Angle) -> Velocity {
    let beta = theta.sin().abs().min(1.0);
    Velocity { beta }
}

/// Length of a moving rod along the direction of motion.
pub fn lorentz_contract(dy_proper: f64, v: Velocity) -> Result<f64> {
    if !(dy_proper.is_finite() && dy_proper >= 0.0) {
        return Err(Error::InvalidAperture(format!("proper length {dy_proper} must be non-negative")));
    }
    // re-validate: Velocity may have been deserialized
    let v = Velocity::new(v.beta)?;
    Ok(dy_proper * v.inverse_gamma())
}

/// Aperture of the other box as measured from the reference box.
pub fn observed_aperture(dy_max: f64, theta: Angle) -> Result<f64> {
    if !(dy_max.is_finite() && dy_max > 0.0) {
        return Err(Error::InvalidAperture(format!("maximal aperture {dy_max} must be positive")));
    }
    Ok(dy_max * theta.cos().abs())
}

/// Tube opening `dy` of a box whose maximal opening is `dy_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    dy: f64,
    dy_max: f64,
}

impl Aperture {
    pub fn new(dy: f64, dy_max: f64) -> Result<Self> {
        if !(dy_max.is_finite() && dy_max > 0.0) {
            return Err(Error::InvalidAperture(format!("maximal aperture {dy_max} must be positive")));
        }
        if !(dy.is_finite() && (0.0..=dy_max).contains(&dy)) {
            return Err(Error::InvalidAperture(format!("aperture {dy} outside [0, {dy_max}]")));
        }
        Ok(Aperture { dy, dy_max })
    }

    /// A box seen in its own rest frame.
    pub fn full(dy_max: f64) -> Result<Self> {
        Self::new(dy_max, dy_max)
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn dy_max(&self) -> f64 {
        self.dy_max
    }

    /// Probability that a positively charged ball passes: (dy / dy_max)^2.
    /// The same number is the probability that a negative ball is absorbed.
    pub fn pass_probability(&self) -> f64 {
        let ratio = self.dy / self.dy_max;
        ratio * ratio
    }
}

/// Unit spatial direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferredDirection {
    nu: [f64; 3],
}

impl PreferredDirection {
    pub fn new(nu: [f64; 3]) -> Result<Self> {
        let norm = euclidean_norm(&nu);
        if !norm.is_finite() || (norm - 1.0).abs() > GEOMETRY_TOL {
            return Err(Error::NotUnitVector(norm));
        }
        Ok(PreferredDirection { nu })
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn along(v: [f64; 3]) -> Result<Self> {
        let norm = euclidean_norm(&v);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotUnitVector(norm));
        }
        Self::new(v.map(|c| c / norm))
    }

    /// Optical axis at `angle` in the polarization plane, measured from the y axis.
    pub fn in_plane(angle: Angle) -> Self {
        let (s, c) = angle.radians().sin_cos();
        PreferredDirection { nu: [s, c, 0.0] }
    }

    /// In-plane direction rotated 90 degrees from this one.
    pub fn perpendicular_in_plane(&self) -> Self {
        let [x, y, _] = self.nu;
        PreferredDirection { nu: [y, -x, 0.0] }
    }

    pub fn components(&self) -> [f64; 3] {
        self.nu
    }

    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        dot3(&self.nu, v)
    }

    /// Null four-vector (1, nu).
    pub fn null_four_vector(&self) -> FourVector {
        FourVector::new(1.0, self.nu[0], self.nu[1], self.nu[2])
    }
}

/// Squared overlap of two preferred directions, (nu_a . nu_b)^2.
pub fn direction_overlap_sq(a: &PreferredDirection, b: &PreferredDirection) -> f64 {
    let d = a.dot(&b.nu);
    d * d
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn euclidean_norm(v: &[f64; 3]) -> f64 {
    dot3(v, v).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector { t, x, y, z }
    }

    /// Minkowski product with signature (+, -, -, -).
    pub fn minkowski_dot(&self, other: &FourVector) -> f64 {
        self.t * other.t - self.x * other.x - self.y * other.y - self.z * other.z
    }

    pub fn interval(&self) -> f64 {
        self.minkowski_dot(self)
    }

    pub fn scaled(&self, k: f64) -> FourVector {
        FourVector::new(k * self.t, k * self.x, k * self.y, k * self.z)
    }
}

/// Magnitude of spacetime anisotropy, |r| < 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AnisotropyParameter(f64);

impl AnisotropyParameter {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r.abs() >= 1.0 {
            return Err(Error::AnisotropyOutOfRange(r));
        }
        Ok(AnisotropyParameter(r))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AnisotropyParameter {
    type Error = Error;
    fn try_from(r: f64) -> Result<Self> {
        AnisotropyParameter::new(r)
    }
}

impl From<AnisotropyParameter> for f64 {
    fn from(r: AnisotropyParameter) -> f64 {
        r.0
    }
}

/// Electric field 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub e: [f64; 3],
}

impl FieldVector {
    pub fn new(e: [f64; 3]) -> Self {
        FieldVector { e }
    }

    /// Field of the given magnitude pointing along `direction`.
    pub fn along(direction: &PreferredDirection, magnitude: f64) -> Self {
        FieldVector { e: direction.components().map(|c| magnitude * c) }
    }

    pub fn magnitude(&self) -> f64 {
        euclidean_norm(&self.e)
    }
}

/// Direction-dependent length of a timelike four-vector:
/// ((nu_i x^i)^2 / (x^i x_i))^(r/2) * sqrt(x^i x_i).
pub fn bogoslovsky_norm_4(x: &FourVector, nu: &FourVector, r: AnisotropyParameter) -> Result<f64> {
    let nu_sq = nu.interval();
    if nu_sq.abs() > GEOMETRY_TOL {
        return Err(Error::NotNullVector(nu_sq));
    }
    let x_sq = x.interval();
    if !(x_sq > 0.0) {
        return Err(Error::NotTimelike(x_sq));
    }
    let proj = nu.minkowski_dot(x);
    let r = r.value();
    if proj == 0.0 && r < 0.0 {
        return Err(Error::SingularNorm);
    }
    Ok((proj * proj / x_sq).powf(r / 2.0) * x_sq.sqrt())
}

/// Three-dimensional form of the anisotropic norm: (|nu.e| / |e|)^r * |e|.
///
/// The absolute value keeps the result real for anti-aligned fields.
pub fn bogoslovsky_norm_3(e: &FieldVector, nu: &PreferredDirection, r: AnisotropyParameter) -> Result<f64> {
    let mag = e.magnitude();
    if !(mag > 0.0) {
        return Err(Error::ZeroField);
    }
    let cosine = (nu.dot(&e.e).abs() / mag).min(1.0);
    let r = r.value();
    if cosine == 0.0 && r < 0.0 {
        return Err(Error::SingularNorm);
    }
    Ok(cosine.powf(r) * mag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn deg(d: f64) -> Angle {
        Angle::from_degrees(d).unwrap()
    }

    fn r(v: f64) -> AnisotropyParameter {
        AnisotropyParameter::new(v).unwrap()
    }

    #[test]
    fn velocity_from_angle() {
        assert_eq!(angle_to_velocity(deg(0.0)).beta(), 0.0);
        assert_abs_diff_eq!(angle_to_velocity(deg(30.0)).beta(), 0.5, epsilon = 1e-15);
        assert_eq!(angle_to_velocity(deg(90.0)).beta(), 1.0);
        assert_abs_diff_eq!(angle_to_velocity(deg(-30.0)).beta(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn contraction_examples() {
        let v0 = Velocity::new(0.0).unwrap();
        assert_eq!(lorentz_contract(3.5, v0).unwrap(), 3.5);
        let half = Velocity::new(0.5).unwrap();
        assert_abs_diff_eq!(lorentz_contract(1.0, half).unwrap(), 0.75f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(lorentz_contract(1.0, half).unwrap(), 0.8660254, epsilon = 1e-7);
        assert_eq!(lorentz_contract(1.0, Velocity::new(1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn superluminal_rejected() {
        assert!(matches!(Velocity::new(1.0 + 1e-9), Err(Error::SuperluminalVelocity(_))));
        let forged: Velocity = serde_json::from_str(r#"{"beta":1.5}"#).unwrap();
        assert!(lorentz_contract(1.0, forged).is_err());
    }

    #[test]
    fn observed_aperture_examples() {
        assert_eq!(observed_aperture(1.0, deg(0.0)).unwrap(), 1.0);
        assert_abs_diff_eq!(observed_aperture(1.0, deg(60.0)).unwrap(), 0.5, epsilon = 1e-15);

        let via_contraction = lorentz_contract(2.0, angle_to_velocity(deg(45.0))).unwrap();
        let direct = observed_aperture(2.0, deg(45.0)).unwrap();
        assert_abs_diff_eq!(direct, std::f64::consts::SQRT_2, epsilon = 1e-7);
        assert_abs_diff_eq!(direct, via_contraction, epsilon = 1e-12);

        assert!(observed_aperture(0.0, deg(10.0)).is_err());
    }

    #[test]
    fn composition_identity_on_half_degree_grid() {
        for k in -180..=180 {
            let theta = deg(0.5 * k as f64);
            for dy_max in [0.1, 1.0, 7.3] {
                let direct = observed_aperture(dy_max, theta).unwrap();
                let contracted = lorentz_contract(dy_max, angle_to_velocity(theta)).unwrap();
                assert!((direct - contracted).abs() <= 1e-12, "theta={theta} dy={dy_max}");
            }
        }
    }

    #[test]
    fn aperture_pass_probability() {
        let full = Aperture::full(2.0).unwrap();
        assert_eq!(full.pass_probability(), 1.0);
        let half = Aperture::new(1.0, 2.0).unwrap();
        assert_eq!(half.pass_probability(), 0.25);
        assert!(Aperture::new(2.5, 2.0).is_err());
        assert!(Aperture::new(0.5, 0.0).is_err());
    }

    #[test]
    fn null_direction_is_null() {
        let nu = PreferredDirection::along([0.3, -1.2, 0.7]).unwrap();
        assert!(nu.null_four_vector().interval().abs() <= 1e-12);
        assert!(PreferredDirection::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn norm4_examples() {
        let x = FourVector::new(1.0, 0.0, 0.0, 0.0);
        let nu = FourVector::new(1.0, 0.0, 1.0, 0.0);
        assert_abs_diff_eq!(bogoslovsky_norm_4(&x, &nu, r(0.5)).unwrap(), 1.0, epsilon = 1e-15);

        let x = FourVector::new(3.0, 1.0, 0.5, -0.2);
        assert_abs_diff_eq!(
            bogoslovsky_norm_4(&x, &nu, r(0.0)).unwrap(),
            x.interval().sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn norm4_errors() {
        let nu = FourVector::new(1.0, 0.0, 1.0, 0.0);
        let spacelike = FourVector::new(0.5, 1.0, 0.0, 0.0);
        assert!(matches!(bogoslovsky_norm_4(&spacelike, &nu, r(0.5)), Err(Error::NotTimelike(_))));
        let lightlike = FourVector::new(1.0, 1.0, 0.0, 0.0);
        assert!(matches!(bogoslovsky_norm_4(&lightlike, &nu, r(0.5)), Err(Error::NotTimelike(_))));
        let not_null = FourVector::new(1.0, 0.5, 0.0, 0.0);
        let x = FourVector::new(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(bogoslovsky_norm_4(&x, &not_null, r(0.5)), Err(Error::NotNullVector(_))));
        assert!(AnisotropyParameter::new(1.0).is_err());
        assert!(AnisotropyParameter::new(-1.0).is_err());
    }

    #[test]
    fn norm3_examples() {
        let nu = PreferredDirection::in_plane(deg(20.0));
        let aligned = FieldVector::along(&nu, 2.5);
        for rv in [-0.9, -0.3, 0.1, 0.5, 0.9] {
            assert_abs_diff_eq!(bogoslovsky_norm_3(&aligned, &nu, r(rv)).unwrap(), 2.5, epsilon = 1e-12);
        }

        let ortho = FieldVector::along(&nu.perpendicular_in_plane(), 1.0);
        assert_abs_diff_eq!(bogoslovsky_norm_3(&ortho, &nu, r(0.5)).unwrap(), 0.0, epsilon = 1e-8);

        let e = FieldVector::along(&PreferredDirection::in_plane(deg(80.0)), 1.0);
        assert_abs_diff_eq!(
            bogoslovsky_norm_3(&e, &nu, r(0.5)).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(bogoslovsky_norm_3(&e, &nu, r(0.5)).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-7);
    }

    #[test]
    fn norm3_errors() {
        let nu = PreferredDirection::in_plane(deg(0.0));
        assert!(matches!(
            bogoslovsky_norm_3(&FieldVector::new([0.0; 3]), &nu, r(0.5)),
            Err(Error::ZeroField)
        ));
        let ortho = FieldVector::new([1.0, 0.0, 0.0]);
        assert!(matches!(bogoslovsky_norm_3(&ortho, &nu, r(-0.5)), Err(Error::SingularNorm)));
    }

    fn unit_strategy() -> impl Strategy<Value = PreferredDirection> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| PreferredDirection::along([x, y, z]).unwrap())
    }

    proptest! {
        #[test]
        fn norm3_is_homogeneous(
            nu in unit_strategy(),
            e in prop::array::uniform3(-5.0f64..5.0),
            lambda in 0.01f64..100.0,
            rv in -0.95f64..0.95,
        ) {
            let f = FieldVector::new(e);
            prop_assume!(f.magnitude() > 1e-3 && nu.dot(&e).abs() > 1e-6);
            let base = bogoslovsky_norm_3(&f, &nu, r(rv)).unwrap();
            let scaled = bogoslovsky_norm_3(&FieldVector::new(e.map(|c| lambda * c)), &nu, r(rv)).unwrap();
            prop_assert!((scaled - lambda * base).abs() <= 1e-10 * (1.0 + lambda * base));
        }

        #[test]
        fn norm4_is_homogeneous(
            nu in unit_strategy(),
            t in 2.0f64..10.0,
            s in prop::array::uniform3(-1.0f64..1.0),
            lambda in 0.01f64..100.0,
            rv in -0.95f64..0.95,
        ) {
            let x = FourVector::new(t, s[0], s[1], s[2]);
            let n = nu.null_four_vector();
            let base = bogoslovsky_norm_4(&x, &n, r(rv)).unwrap();
            let scaled = bogoslovsky_norm_4(&x.scaled(lambda), &n, r(rv)).unwrap();
            prop_assert!((scaled - lambda * base).abs() <= 1e-10 * (1.0 + lambda * base));
        }

        #[test]
        fn isotropic_limit(
            nu in unit_strategy(),
            e in prop::array::uniform3(-5.0f64..5.0),
            t in 2.0f64..10.0,
        ) {
            let f = FieldVector::new(e);
            prop_assume!(f.magnitude() > 1e-3);
            prop_assert!((bogoslovsky_norm_3(&f, &nu, r(0.0)).unwrap() - f.magnitude()).abs() <= 1e-12 * f.magnitude().max(1.0));
            let x = FourVector::new(t, e[0] / 5.0, e[1] / 5.0, e[2] / 5.0);
            let n4 = bogoslovsky_norm_4(&x, &nu.null_four_vector(), r(0.0)).unwrap();
            prop_assert!((n4 - x.interval().sqrt()).abs() <= 1e-12 * t);
        }

        #[test]
        fn norm3_nonincreasing_in_angle(rv in 0.01f64..0.99, a1 in 0.0f64..90.0, a2 in 0.0f64..90.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let nu = PreferredDirection::in_plane(deg(0.0));
            let n_lo = bogoslovsky_norm_3(&FieldVector::along(&PreferredDirection::in_plane(deg(lo)), 1.0), &nu, r(rv)).unwrap();
            let n_hi = bogoslovsky_norm_3(&FieldVector::along(&PreferredDirection::in_plane(deg(hi)), 1.0), &nu, r(rv)).unwrap();
            prop_assert!(n_hi <= n_lo + 1e-15);
        }
    }
}
