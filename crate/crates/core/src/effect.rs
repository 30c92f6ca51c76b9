//! Coordinate algebra of qubit effects.
//!
//! Every operator is carried as a real pair `(alpha, a)` standing for
//! `½(alpha·I + a·σ)`. Explicit 2×2 matrices live only in [`crate::oracle`].

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Absolute tolerance on the eigenvalue deficit accepted (and clamped) by
/// effect constructors.
pub const EFFECT_TOL: f64 = 1e-12;

/// Tolerance on `‖u‖ = 1` for [`UnitVector3`].
pub const UNIT_TOL: f64 = 1e-12;

/// Raw Bloch coordinates `(alpha, a)` of the selfadjoint operator
/// `½(alpha·I + a·σ)`, with no positivity requirement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochOperator {
    pub alpha: f64,
    pub a: Vec3,
}

impl BlochOperator {
    pub fn new(alpha: f64, a: Vec3) -> Self {
        Self { alpha, a }
    }

    /// Smallest eigenvalue `½(alpha − ‖a‖)`.
    pub fn min_eigenvalue(&self) -> f64 {
        0.5 * (self.alpha - self.a.norm())
    }

    pub fn max_eigenvalue(&self) -> f64 {
        0.5 * (self.alpha + self.a.norm())
    }

    /// Operator norm `½(|alpha| + ‖a‖)`.
    pub fn operator_norm(&self) -> f64 {
        0.5 * (self.alpha.abs() + self.a.norm())
    }

    pub fn is_effect(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol && self.max_eigenvalue() <= 1.0 + tol
    }

    pub fn add(&self, other: &BlochOperator) -> BlochOperator {
        BlochOperator::new(self.alpha + other.alpha, self.a + other.a)
    }

    pub fn sub(&self, other: &BlochOperator) -> BlochOperator {
        BlochOperator::new(self.alpha - other.alpha, self.a - other.a)
    }

    pub fn scale(&self, s: f64) -> BlochOperator {
        BlochOperator::new(s * self.alpha, s * self.a)
    }

    pub fn identity() -> BlochOperator {
        BlochOperator::new(2.0, Vec3::zeros())
    }

    /// `U A U` for `U = u·σ`.
    pub fn reflect(&self, u: &UnitVector3) -> BlochOperator {
        let u = u.into_inner();
        BlochOperator::new(self.alpha, 2.0 * u.dot(&self.a) * u - self.a)
    }
}

/// A qubit effect `½(alpha·I + a·σ)` with `‖a‖ ≤ alpha ≤ 2 − ‖a‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EffectRepr", into = "EffectRepr")]
pub struct Effect {
    alpha: f64,
    a: Vec3,
}

#[derive(Serialize, Deserialize)]
struct EffectRepr {
    alpha: f64,
    a: [f64; 3],
}

impl TryFrom<EffectRepr> for Effect {
    type Error = Error;

    fn try_from(r: EffectRepr) -> Result<Self> {
        Effect::new(r.alpha, Vec3::from(r.a))
    }
}

impl From<Effect> for EffectRepr {
    fn from(e: Effect) -> Self {
        EffectRepr {
            alpha: e.alpha,
            a: [e.a.x, e.a.y, e.a.z],
        }
    }
}

/// Eigen-data of an effect with a nonzero Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDecomposition {
    pub weight_plus: f64,
    pub weight_minus: f64,
    pub axis: UnitVector3,
}

impl SpectralDecomposition {
    /// `weight_plus·A(1, axis) + weight_minus·A(1, −axis)`.
    pub fn reconstruct(&self) -> BlochOperator {
        let u = self.axis.into_inner();
        BlochOperator::new(
            self.weight_plus + self.weight_minus,
            (self.weight_plus - self.weight_minus) * u,
        )
    }
}

impl Effect {
    /// Validates `(alpha, a)` as an effect. Inputs whose eigenvalue deficit is
    /// within [`EFFECT_TOL`] are clamped onto the boundary of the effect set.
    pub fn new(alpha: f64, a: Vec3) -> Result<Self> {
        if !alpha.is_finite() || !a.iter().all(|x| x.is_finite()) {
            return Err(Error::NotAnEffect {
                deficit: f64::INFINITY,
            });
        }
        let norm = a.norm();
        let lower = 0.5 * (norm - alpha);
        let upper = 0.5 * (alpha + norm - 2.0);
        let deficit = lower.max(upper);
        if deficit > EFFECT_TOL {
            return Err(Error::NotAnEffect { deficit });
        }
        if deficit <= 0.0 {
            return Ok(Self { alpha, a });
        }
        // Clamp onto the boundary.
        let (alpha, a) = if norm > 1.0 {
            (1.0, a / norm)
        } else if lower > 0.0 {
            (norm, a)
        } else {
            (2.0 - norm, a)
        };
        Ok(Self { alpha, a })
    }

    pub fn from_operator(op: &BlochOperator) -> Result<Self> {
        Self::new(op.alpha, op.a)
    }

    pub fn zero() -> Self {
        Self {
            alpha: 0.0,
            a: Vec3::zeros(),
        }
    }

    pub fn identity() -> Self {
        Self {
            alpha: 2.0,
            a: Vec3::zeros(),
        }
    }

    /// Rank-one projection `A(1, u)`.
    pub fn projection(u: &UnitVector3) -> Self {
        Self {
            alpha: 1.0,
            a: u.into_inner(),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> Vec3 {
        self.a
    }

    pub fn operator(&self) -> BlochOperator {
        BlochOperator::new(self.alpha, self.a)
    }

    /// `I − E = (2 − alpha, −a)`.
    pub fn complement(&self) -> Self {
        Self {
            alpha: 2.0 - self.alpha,
            a: -self.a,
        }
    }

    /// `(min, max)` eigenvalues `½(alpha ∓ ‖a‖)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let n = self.a.norm();
        (0.5 * (self.alpha - n), 0.5 * (self.alpha + n))
    }

    pub fn spectral_decomposition(&self) -> Result<SpectralDecomposition> {
        let n = self.a.norm();
        if n == 0.0 {
            return Err(Error::DegenerateAxis);
        }
        Ok(SpectralDecomposition {
            weight_plus: 0.5 * (self.alpha + n),
            weight_minus: 0.5 * (self.alpha - n),
            axis: UnitVector3::new_normalize(self.a)?,
        })
    }

    /// Conjugation `U E U` by `U = u·σ`: the Bloch vector is reflected
    /// through the axis `u`.
    pub fn reflect(&self, u: &UnitVector3) -> Self {
        let u = u.into_inner();
        Self {
            alpha: self.alpha,
            a: 2.0 * u.dot(&self.a) * u - self.a,
        }
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        let (lo, hi) = self.eigenvalues();
        (lo.abs() <= tol || (lo - 1.0).abs() <= tol) && (hi.abs() <= tol || (hi - 1.0).abs() <= tol)
    }

    /// Componentwise closeness of the coordinates.
    pub fn approx_eq(&self, other: &Effect, tol: f64) -> bool {
        (self.alpha - other.alpha).abs() <= tol && (self.a - other.a).amax() <= tol
    }
}

/// Operator norm of the commutator `[A(α,a), A(β,b)]`, i.e. `½‖a × b‖`.
pub fn commutator_norm(e: &Effect, f: &Effect) -> f64 {
    0.5 * e.a.cross(&f.a).norm()
}

/// A unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVector3(Vec3);

impl TryFrom<[f64; 3]> for UnitVector3 {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        UnitVector3::new(Vec3::from(v))
    }
}

impl From<UnitVector3> for [f64; 3] {
    fn from(u: UnitVector3) -> Self {
        [u.0.x, u.0.y, u.0.z]
    }
}

impl UnitVector3 {
    /// Checks `‖v‖ = 1` within [`UNIT_TOL`]; the stored vector is renormalized.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self(v / norm))
    }

    pub fn new_normalize(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateAxis);
        }
        Ok(Self(v / norm))
    }

    pub fn x() -> Self {
        Self(Vec3::x())
    }

    pub fn y() -> Self {
        Self(Vec3::y())
    }

    pub fn z() -> Self {
        Self(Vec3::z())
    }

    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    /// A deterministic unit vector orthogonal to every nonzero vector in `vs`
    /// (which must span at most a plane). Uses the normalized cross product
    /// when two independent directions are present; otherwise the coordinate
    /// axis least aligned with the single direction is projected onto its
    /// orthogonal complement.
    pub fn orthogonal_to(a: &Vec3, b: &Vec3) -> Self {
        let c = a.cross(b);
        let scale = a.norm().max(b.norm()).max(1.0);
        if c.norm() > 1e-12 * scale * scale {
            return Self(c.normalize());
        }
        let dir = if a.norm() >= b.norm() { *a } else { *b };
        if dir.norm() == 0.0 {
            return Self::z();
        }
        let d = dir.normalize();
        let idx = d.iamin();
        let mut e = Vec3::zeros();
        e[idx] = 1.0;
        let w = e - d.dot(&e) * d;
        Self(w.normalize())
    }
}

/// A two-outcome observable `E^{α,a}` given by its "+" effect; the "−"
/// effect is the complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleObservable {
    pub plus: Effect,
}

impl SimpleObservable {
    pub fn new(plus: Effect) -> Self {
        Self { plus }
    }

    pub fn from_coords(alpha: f64, a: Vec3) -> Result<Self> {
        Ok(Self::new(Effect::new(alpha, a)?))
    }

    /// The sharp observable `E^{1,u}`.
    pub fn sharp(u: &UnitVector3) -> Self {
        Self::new(Effect::projection(u))
    }

    /// The trivial observable `E^{α,0}`.
    pub fn trivial(alpha: f64) -> Result<Self> {
        Self::from_coords(alpha, Vec3::zeros())
    }

    pub fn minus(&self) -> Effect {
        self.plus.complement()
    }

    /// Effect for outcome `+` (`true`) or `−` (`false`).
    pub fn outcome(&self, plus: bool) -> Effect {
        if plus {
            self.plus
        } else {
            self.minus()
        }
    }

    pub fn alpha(&self) -> f64 {
        self.plus.alpha()
    }

    pub fn a(&self) -> Vec3 {
        self.plus.a()
    }

    pub fn is_sharp(&self, tol: f64) -> bool {
        (self.alpha() - 1.0).abs() <= tol && (self.a().norm() - 1.0).abs() <= tol
    }

    /// `t·O1 + (1 − t)·O2`.
    pub fn mix(o1: &SimpleObservable, o2: &SimpleObservable, t: f64) -> Result<SimpleObservable> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParamOutOfRange {
                name: "t",
                value: t,
                range: "[0, 1]".into(),
            });
        }
        let alpha = t * o1.alpha() + (1.0 - t) * o2.alpha();
        let a = t * o1.a() + (1.0 - t) * o2.a();
        SimpleObservable::from_coords(alpha, a)
    }
}
