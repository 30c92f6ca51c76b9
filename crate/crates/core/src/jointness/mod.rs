//! Joint measurability of pairs of simple qubit observables.
//!
//! Criteria (necessary, sufficient, exact for `alpha = beta = 1`), the
//! numerical decision procedure, explicit joint-observable constructions and
//! the coarse-graining machinery.

mod construct;
mod decide;
mod smearing;

pub use construct::{
    covariant_joint, informational_completeness, jordan_joint, product_joint, skewed_joint,
    symmetrize_joint, trivial_joint, coordinate_rank, CovariantParams, TrivialCase, TrivialJoint,
};
pub use decide::{
    decide_jm, feasibility_value, minimize_feasibility, witness_operators, FeasibilityMinimum,
    JmStatus, JmVerdict, DEFAULT_DECISION_TOL,
};
pub use smearing::{coarse_grain, smeared_joint, smearing_jm_threshold, StochasticMatrix2};

use serde::{Deserialize, Serialize};

use crate::effect::{commutator_norm, BlochOperator, Effect, SimpleObservable, Vec3};
use crate::error::{Error, Result};
use crate::measures::unsharpness_value;

/// Slack granted to closed-form inequality tests for floating-point rounding.
pub const CLOSED_FORM_TOL: f64 = 1e-12;

/// Tolerance on `Σ G_ij = I` for joint observables.
pub const JOINT_SUM_TOL: f64 = 1e-10;

/// A four-outcome observable with outcomes `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointObservable {
    pub gpp: Effect,
    pub gpm: Effect,
    pub gmp: Effect,
    pub gmm: Effect,
}

impl JointObservable {
    /// Checks that the four effects sum to the identity.
    pub fn new(gpp: Effect, gpm: Effect, gmp: Effect, gmm: Effect) -> Result<Self> {
        let g = Self { gpp, gpm, gmp, gmm };
        let r = g.normalization_residual();
        if r > JOINT_SUM_TOL {
            return Err(Error::InvalidJoint(format!(
                "effects sum to identity only within {r:e}"
            )));
        }
        Ok(g)
    }

    /// Completes a witness `G++` to the joint observable
    /// `G+- = E1+ − G++`, `G-+ = E2+ − G++`, `G-- = I − E1+ − E2+ + G++`.
    pub fn from_witness(
        o1: &SimpleObservable,
        o2: &SimpleObservable,
        gpp: &BlochOperator,
    ) -> Result<Self> {
        let e1 = o1.plus.operator();
        let e2 = o2.plus.operator();
        let gpm = e1.sub(gpp);
        let gmp = e2.sub(gpp);
        let gmm = BlochOperator::identity().sub(&e1).sub(&e2).add(gpp);
        let wrap = |op: &BlochOperator, name: &str| {
            Effect::from_operator(op)
                .map_err(|e| Error::InvalidJoint(format!("{name} is not an effect: {e}")))
        };
        Self::new(
            wrap(gpp, "G++")?,
            wrap(&gpm, "G+-")?,
            wrap(&gmp, "G-+")?,
            wrap(&gmm, "G--")?,
        )
    }

    pub fn components(&self) -> [Effect; 4] {
        [self.gpp, self.gpm, self.gmp, self.gmm]
    }

    /// Largest coordinate deviation of `Σ G_ij` from `(2, 0)`.
    pub fn normalization_residual(&self) -> f64 {
        let alpha: f64 = self.components().iter().map(|e| e.alpha()).sum();
        let a: Vec3 = self.components().iter().map(|e| e.a()).sum();
        (alpha - 2.0).abs().max(a.amax())
    }

    /// Plus effects of the two marginals, `G++ + G+-` and `G++ + G-+`.
    pub fn marginals(&self) -> (BlochOperator, BlochOperator) {
        (
            self.gpp.operator().add(&self.gpm.operator()),
            self.gpp.operator().add(&self.gmp.operator()),
        )
    }

    /// Largest coordinate deviation of the marginals from `(o1, o2)`.
    pub fn marginal_residual(&self, o1: &SimpleObservable, o2: &SimpleObservable) -> f64 {
        let (m1, m2) = self.marginals();
        let d1 = m1.sub(&o1.plus.operator());
        let d2 = m2.sub(&o2.plus.operator());
        d1.alpha
            .abs()
            .max(d1.a.amax())
            .max(d2.alpha.abs())
            .max(d2.a.amax())
    }

    /// Covariance under `U = u·σ`: `U G++ U = G--` and `U G+- U = G-+`.
    pub fn covariance_residual(&self, u: &crate::effect::UnitVector3) -> f64 {
        let diff = |x: &Effect, y: &Effect| {
            let r = x.reflect(u);
            (r.alpha() - y.alpha()).abs().max((r.a() - y.a()).amax())
        };
        diff(&self.gpp, &self.gmm).max(diff(&self.gpm, &self.gmp))
    }

    /// `t·G + (1 − t)·H`.
    pub fn mix(g: &JointObservable, h: &JointObservable, t: f64) -> Result<JointObservable> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParamOutOfRange {
                name: "t",
                value: t,
                range: "[0, 1]".into(),
            });
        }
        let m = |x: &Effect, y: &Effect| {
            Effect::from_operator(&x.operator().scale(t).add(&y.operator().scale(1.0 - t)))
        };
        Self::new(
            m(&g.gpp, &h.gpp)?,
            m(&g.gpm, &h.gpm)?,
            m(&g.gmp, &h.gmp)?,
            m(&g.gmm, &h.gmm)?,
        )
    }
}

/// Endpoints of the interval that `gamma` (the trace parameter of `G++`) must
/// lie in for the diagonally opposite balls to meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaInterval {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl GammaInterval {
    pub fn is_empty(&self) -> bool {
        self.gamma1 > self.gamma2 + CLOSED_FORM_TOL
    }
}

pub fn gamma_interval(o1: &SimpleObservable, o2: &SimpleObservable) -> GammaInterval {
    let (alpha, a, beta, b) = (o1.alpha(), o1.a(), o2.alpha(), o2.a());
    GammaInterval {
        gamma1: 0.5 * (a + b).norm() + 0.5 * (alpha + beta - 2.0),
        gamma2: 0.5 * (alpha + beta) - 0.5 * (a - b).norm(),
    }
}

fn ellipsoid_sum(a: &Vec3, b: &Vec3) -> f64 {
    (a + b).norm() + (a - b).norm()
}

/// `‖a + b‖ + ‖a − b‖ ≤ 2`. A `false` result rules out joint measurability.
pub fn necessary_jm(o1: &SimpleObservable, o2: &SimpleObservable) -> bool {
    ellipsoid_sum(&o1.a(), &o2.a()) <= 2.0 + CLOSED_FORM_TOL
}

/// Exact criterion for the unbiased pair `E^{1,a}`, `E^{1,b}`.
pub fn covariant_jm(a: &Vec3, b: &Vec3) -> bool {
    ellipsoid_sum(a, b) <= 2.0 + CLOSED_FORM_TOL
}

/// The covariant criterion in three algebraically equivalent forms:
/// `‖a+b‖ + ‖a−b‖ ≤ 2`, `‖a‖² + ‖b‖² ≤ 1 + (a·b)²` and
/// `‖a×b‖² ≤ (1 − ‖a‖²)(1 − ‖b‖²)`.
pub fn equivalent_forms_jm(a: &Vec3, b: &Vec3) -> (bool, bool, bool) {
    let ab = a.dot(b);
    let (na2, nb2) = (a.norm_squared(), b.norm_squared());
    (
        covariant_jm(a, b),
        na2 + nb2 <= 1.0 + ab * ab + CLOSED_FORM_TOL,
        a.cross(b).norm_squared() <= (1.0 - na2) * (1.0 - nb2) + CLOSED_FORM_TOL,
    )
}

/// Outcome of the test `A1 ≤ A2` between the two distinguished operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientReport {
    pub holds: bool,
    /// Left side of the criterion normalized so that it is compared with 1.
    pub lhs: f64,
    /// `A1 = A(gamma1, g1)`: lowest-trace element above `0` and `E1+ + E2+ − I`.
    pub a1: BlochOperator,
    /// `A2 = A(gamma2, g2)`: highest-trace element below `E1+` and `E2+`.
    pub a2: BlochOperator,
}

pub fn sufficient_jm(o1: &SimpleObservable, o2: &SimpleObservable) -> Result<SufficientReport> {
    let (alpha, a, beta, b) = (o1.alpha(), o1.a(), o2.alpha(), o2.a());
    let s = a + b;
    let d = a - b;
    let (ns, nd) = (s.norm(), d.norm());
    if ns == 0.0 {
        return Err(Error::DegenerateDirection("a + b = 0"));
    }
    if nd == 0.0 {
        return Err(Error::DegenerateDirection("a − b = 0"));
    }
    let gi = gamma_interval(o1, o2);
    let g1 = 0.5 * (1.0 - (2.0 - alpha - beta) / ns) * s;
    let g2 = 0.5 * s - 0.5 * (alpha - beta) / nd * d;
    let cross = ((2.0 - alpha - beta) / ns) * s - ((alpha - beta) / nd) * d;
    let lhs = 0.5 * (ns + nd + cross.norm());
    Ok(SufficientReport {
        holds: lhs <= 1.0 + CLOSED_FORM_TOL,
        lhs,
        a1: BlochOperator::new(gi.gamma1, g1),
        a2: BlochOperator::new(gi.gamma2, g2),
    })
}

/// `‖a+b‖ + ‖a−b‖ + |2−α−β| + |α−β| ≤ 2`, i.e.
/// `‖E1+ − E2+‖ + ‖E1+ − E2−‖ ≤ 1`.
pub fn strong_sufficient_jm(o1: &SimpleObservable, o2: &SimpleObservable) -> bool {
    let (alpha, beta) = (o1.alpha(), o2.alpha());
    ellipsoid_sum(&o1.a(), &o2.a()) + (2.0 - alpha - beta).abs() + (alpha - beta).abs()
        <= 2.0 + CLOSED_FORM_TOL
}

/// Neither `E1+` and `E2+` nor `E1+` and `E2−` are ordered.
pub fn is_nontrivial_pair(o1: &SimpleObservable, o2: &SimpleObservable) -> bool {
    let (alpha, a, beta, b) = (o1.alpha(), o1.a(), o2.alpha(), o2.a());
    (alpha - beta).abs() < (a - b).norm() && (2.0 - alpha - beta).abs() < (a + b).norm()
}

/// `𝔘(O1)·𝔘(O2) − 4‖[E1+, E2+]‖²`, nonnegative for jointly measurable pairs.
pub fn unsharpness_product_residual(o1: &SimpleObservable, o2: &SimpleObservable) -> f64 {
    let c = commutator_norm(&o1.plus, &o2.plus);
    unsharpness_value(o1) * unsharpness_value(o2) - 4.0 * c * c
}
