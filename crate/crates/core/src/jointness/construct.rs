//! Explicit joint observables: order-based, product, covariant, Jordan,
//! symmetrized and skewed constructions.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::{covariant_jm, JointObservable, CLOSED_FORM_TOL, JOINT_SUM_TOL};
use crate::effect::{BlochOperator, Effect, SimpleObservable, UnitVector3, Vec3};
use crate::error::{Error, Result};

/// Which of the four order relations produced a [`TrivialJoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrivialCase {
    /// `E1+ ≥ E2+`
    A,
    /// `E1+ ≤ E2+`
    B,
    /// `E1+ ≥ E2−`
    C,
    /// `E1+ ≤ E2−`
    D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrivialJoint {
    pub case: TrivialCase,
    pub joint: JointObservable,
}

fn is_psd(op: &BlochOperator) -> bool {
    op.min_eigenvalue() >= -CLOSED_FORM_TOL
}

fn joint_from_ops(ops: [BlochOperator; 4]) -> Result<JointObservable> {
    let [pp, pm, mp, mm] = ops.map(|op| Effect::from_operator(&op));
    JointObservable::new(pp?, pm?, mp?, mm?)
}

/// Joint observable for an ordered pair, trying `E1+ ≥ E2+`, `E1+ ≤ E2+`,
/// `E1+ ≥ E2−`, `E1+ ≤ E2−` in that order.
pub fn trivial_joint(o1: &SimpleObservable, o2: &SimpleObservable) -> Option<TrivialJoint> {
    let id = BlochOperator::identity();
    let zero = BlochOperator::new(0.0, Vec3::zeros());
    let e1 = o1.plus.operator();
    let e2 = o2.plus.operator();
    let e1m = id.sub(&e1);
    let e2m = id.sub(&e2);
    let candidates = [
        (TrivialCase::A, e1.sub(&e2), [e2, e1.sub(&e2), zero, e1m]),
        (TrivialCase::B, e2.sub(&e1), [e1, zero, e2.sub(&e1), e2m]),
        (TrivialCase::C, e1.sub(&e2m), [e1.add(&e2).sub(&id), e2m, e1m, zero]),
        (TrivialCase::D, e2m.sub(&e1), [zero, e1, e2, id.sub(&e1).sub(&e2)]),
    ];
    candidates.into_iter().find_map(|(case, diff, ops)| {
        if !is_psd(&diff) {
            return None;
        }
        joint_from_ops(ops).ok().map(|joint| TrivialJoint { case, joint })
    })
}

/// `G_ij = E1_i E2_j` for commuting effects (`a × b = 0`). The product of
/// commuting `A(α,a)` and `A(β,b)` is `A(½(αβ + a·b), ½(αb + βa))`.
pub fn product_joint(o1: &SimpleObservable, o2: &SimpleObservable) -> Option<JointObservable> {
    if o1.a().cross(&o2.a()).norm() > CLOSED_FORM_TOL {
        return None;
    }
    let prod = |x: &Effect, y: &Effect| {
        BlochOperator::new(
            0.5 * (x.alpha() * y.alpha() + x.a().dot(&y.a())),
            0.5 * (x.alpha() * y.a() + y.alpha() * x.a()),
        )
    };
    let (p1, m1) = (o1.plus, o1.minus());
    let (p2, m2) = (o2.plus, o2.minus());
    joint_from_ops([prod(&p1, &p2), prod(&p1, &m2), prod(&m1, &p2), prod(&m1, &m2)]).ok()
}

/// Parameters `(gamma, p, u)` of a `U`-covariant joint observable of
/// `E^{1,a}` and `E^{1,b}`, validated against the vectors they belong to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariantParams {
    pub gamma: f64,
    pub p: f64,
    pub u: UnitVector3,
}

impl CovariantParams {
    pub fn new(a: &Vec3, b: &Vec3, gamma: f64, p: f64, u: UnitVector3) -> Result<Self> {
        let params = Self { gamma, p, u };
        params.validate(a, b)?;
        Ok(params)
    }

    /// Uses the deterministic axis from [`UnitVector3::orthogonal_to`].
    pub fn with_default_axis(a: &Vec3, b: &Vec3, gamma: f64, p: f64) -> Result<Self> {
        Self::new(a, b, gamma, p, UnitVector3::orthogonal_to(a, b))
    }

    pub fn validate(&self, a: &Vec3, b: &Vec3) -> Result<()> {
        let u = self.u.as_vec();
        let (ua, ub) = (u.dot(a).abs(), u.dot(b).abs());
        if ua > 1e-10 || ub > 1e-10 {
            return Err(Error::ParamsInfeasible {
                constraint: format!("u must be orthogonal to a and b (u·a = {ua:e}, u·b = {ub:e})"),
            });
        }
        let lo = (0.25 * (a + b).norm_squared() + self.p * self.p).sqrt();
        let hi = 1.0 - (0.25 * (a - b).norm_squared() + self.p * self.p).sqrt();
        if self.gamma < lo - CLOSED_FORM_TOL || self.gamma > hi + CLOSED_FORM_TOL {
            return Err(Error::ParamsInfeasible {
                constraint: format!(
                    "√(¼‖a+b‖² + p²) ≤ gamma ≤ 1 − √(¼‖a−b‖² + p²) requires {lo} ≤ {} ≤ {hi}",
                    self.gamma
                ),
            });
        }
        Ok(())
    }

    /// Allowed range of `gamma` at `p = 0`: `[½‖a+b‖, 1 − ½‖a−b‖]`.
    pub fn gamma_range(a: &Vec3, b: &Vec3) -> (f64, f64) {
        (0.5 * (a + b).norm(), 1.0 - 0.5 * (a - b).norm())
    }

    /// Largest feasible `|p|` at the given `gamma`, if any.
    pub fn p_bound(a: &Vec3, b: &Vec3, gamma: f64) -> Option<f64> {
        let r1 = gamma * gamma - 0.25 * (a + b).norm_squared();
        let r2 = (1.0 - gamma).powi(2) - 0.25 * (a - b).norm_squared();
        if !(0.0..=1.0).contains(&gamma) {
            return None;
        }
        let r = r1.min(r2);
        (r >= -CLOSED_FORM_TOL).then(|| r.max(0.0).sqrt())
    }
}

/// The covariant joint observable
/// `G++ = (γ, ½(a+b) + pu)`, `G+- = (1−γ, ½(a−b) − pu)`,
/// `G-+ = (1−γ, −½(a−b) − pu)`, `G-- = (γ, −½(a+b) + pu)`.
pub fn covariant_joint(a: &Vec3, b: &Vec3, params: &CovariantParams) -> Result<JointObservable> {
    params.validate(a, b)?;
    let (g, pu) = (params.gamma, params.p * params.u.into_inner());
    let s = 0.5 * (a + b);
    let d = 0.5 * (a - b);
    let ops = [
        BlochOperator::new(g, s + pu),
        BlochOperator::new(1.0 - g, d - pu),
        BlochOperator::new(1.0 - g, -d - pu),
        BlochOperator::new(g, -s + pu),
    ];
    joint_from_ops(ops).map_err(|e| Error::ParamsInfeasible {
        constraint: e.to_string(),
    })
}

/// The symmetrized product `½(E1_i E2_j + E2_j E1_i)`, i.e. the covariant
/// joint observable at `gamma = ½(1 + a·b)`, `p = 0`.
pub fn jordan_joint(a: &Vec3, b: &Vec3) -> Result<JointObservable> {
    if a.norm() > 1.0 + CLOSED_FORM_TOL || b.norm() > 1.0 + CLOSED_FORM_TOL || !covariant_jm(a, b) {
        return Err(Error::NotJointlyMeasurable);
    }
    let params = CovariantParams {
        gamma: 0.5 * (1.0 + a.dot(b)),
        p: 0.0,
        u: UnitVector3::orthogonal_to(a, b),
    };
    covariant_joint(a, b, &params)
}

/// `G̃_ij = ½(G_ij + U G_{−i,−j} U)` with `U = u·σ`.
pub fn symmetrize_joint(g: &JointObservable, u: &UnitVector3) -> Result<JointObservable> {
    let (m1, m2) = g.marginals();
    let id = BlochOperator::identity();
    let residual = |m: &BlochOperator| {
        let d = m.reflect(u).sub(&id.sub(m));
        d.alpha.abs().max(d.a.amax())
    };
    let residual = residual(&m1).max(residual(&m2));
    if residual > JOINT_SUM_TOL {
        return Err(Error::MarginalsNotCovariant { residual });
    }
    let avg = |x: &Effect, y: &Effect| x.operator().add(&y.operator().reflect(u)).scale(0.5);
    joint_from_ops([
        avg(&g.gpp, &g.gmm),
        avg(&g.gpm, &g.gmp),
        avg(&g.gmp, &g.gpm),
        avg(&g.gmm, &g.gpp),
    ])
}

/// A non-covariant joint observable of `E^{1,a}`, `E^{1,b}`, defined for
/// `a·b ≥ 0`, `‖a+b‖ < 1` and `0 < t ≤ 1/‖a+b‖ − 1`.
pub fn skewed_joint(a: &Vec3, b: &Vec3, t: f64) -> Result<JointObservable> {
    let s = a + b;
    let ns = s.norm();
    if a.dot(b) < -CLOSED_FORM_TOL {
        return Err(Error::ParamOutOfRange {
            name: "a·b",
            value: a.dot(b),
            range: "a·b ≥ 0".into(),
        });
    }
    if ns >= 1.0 {
        return Err(Error::ParamOutOfRange {
            name: "‖a+b‖",
            value: ns,
            range: "‖a+b‖ < 1".into(),
        });
    }
    let t_max = 1.0 / ns - 1.0;
    if !(t > 0.0 && t <= t_max + CLOSED_FORM_TOL) {
        return Err(Error::ParamOutOfRange {
            name: "t",
            value: t,
            range: format!("0 < t ≤ 1/‖a+b‖ − 1 = {t_max}"),
        });
    }
    let ops = [
        BlochOperator::new(0.5, 0.5 * (1.0 + t) * s),
        BlochOperator::new(0.5, 0.5 * ((1.0 - t) * a - (1.0 + t) * b)),
        BlochOperator::new(0.5, 0.5 * ((1.0 - t) * b - (1.0 + t) * a)),
        BlochOperator::new(0.5, -0.5 * (1.0 - t) * s),
    ];
    joint_from_ops(ops)
}

/// Rank of the 4×4 matrix whose rows are the coordinates `(α, a)` of the
/// components, counting singular values above `1e-10`.
pub fn coordinate_rank(g: &JointObservable) -> usize {
    let rows = g.components().map(|e| {
        let a = e.a();
        [e.alpha(), a.x, a.y, a.z]
    });
    let m = Matrix4::from_fn(|i, j| rows[i][j]);
    m.singular_values().iter().filter(|&&s| s > 1e-10).count()
}

/// Whether the four components span the whole operator space.
pub fn informational_completeness(g: &JointObservable) -> bool {
    coordinate_rank(g) == 4
}
