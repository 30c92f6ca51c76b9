//! Numerical decision of joint measurability.
//!
//! A pair is jointly measurable iff some `(γ, g)` makes
//! `F(γ, g) = max{‖g‖ − γ, ‖a − g‖ − (α − γ), ‖b − g‖ − (β − γ),
//! ‖a + b − g‖ − (2 + γ − α − β)}` nonpositive. The four centers
//! `0, a, b, a + b` are coplanar and projecting `g` onto their plane shrinks
//! every distance, so the search runs over `g ∈ R²`.
//!
//! For fixed `γ` the inner problem `min_g max_l (‖g − c_l‖ − r_l)` is solved
//! exactly: at an optimum the active unit vectors `(g − c_l)/‖g − c_l‖` have
//! zero in their convex hull, so the optimum is a center, the balancing
//! point on a segment between two centers, or an additively weighted
//! circumcenter of three. All such candidates are enumerated. The outer
//! function `γ ↦ min_g F` is convex and 1-Lipschitz and is minimized by
//! golden-section search; the final bracket width bounds the remaining
//! error from below.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::{product_joint, sufficient_jm, trivial_joint, JointObservable};
use crate::effect::{BlochOperator, Effect, SimpleObservable, UnitVector3, Vec3};
use crate::error::{Error, Result};

pub const DEFAULT_DECISION_TOL: f64 = 1e-9;

const GOLDEN_MAX_ITER: usize = 200;
const GOLDEN_WIDTH: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JmStatus {
    JointlyMeasurable,
    NotJointlyMeasurable,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JmVerdict {
    pub status: JmStatus,
    /// Smallest value of `F` found; nonpositive means feasible.
    pub margin: f64,
    /// A feasible `G++` when the pair is jointly measurable.
    pub witness: Option<Effect>,
}

impl JmVerdict {
    /// The joint observable generated by the witness, if any.
    pub fn joint(&self, o1: &SimpleObservable, o2: &SimpleObservable) -> Option<JointObservable> {
        let w = self.witness?;
        JointObservable::from_witness(o1, o2, &w.operator()).ok()
    }
}

/// `F(γ, g)` for the pair, in Bloch-vector units.
pub fn feasibility_value(o1: &SimpleObservable, o2: &SimpleObservable, gamma: f64, g: &Vec3) -> f64 {
    let (alpha, a, beta, b) = (o1.alpha(), o1.a(), o2.alpha(), o2.a());
    let f0 = g.norm() - gamma;
    let f1 = (a - g).norm() - (alpha - gamma);
    let f2 = (b - g).norm() - (beta - gamma);
    let f3 = (a + b - g).norm() - (2.0 + gamma - alpha - beta);
    f0.max(f1).max(f2).max(f3)
}

/// Result of minimizing `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityMinimum {
    pub value: f64,
    /// Certified lower bound on `min F` (up to rounding in the inner step).
    pub lower_bound: f64,
    pub gamma: f64,
    pub g: Vec3,
}

type P2 = Vector2<f64>;

struct PlaneProblem {
    e1: Vec3,
    e2: Vec3,
    centers: [P2; 4],
    /// Radii are `base[l] + sign[l]·γ`.
    base: [f64; 4],
}

const SIGN: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

impl PlaneProblem {
    fn new(o1: &SimpleObservable, o2: &SimpleObservable) -> Self {
        let (a, b) = (o1.a(), o2.a());
        let (long, short) = if a.norm() >= b.norm() { (a, b) } else { (b, a) };
        let e1 = if long.norm() > 0.0 {
            long.normalize()
        } else {
            Vec3::x()
        };
        let mut w = short - e1 * e1.dot(&short);
        w -= e1 * e1.dot(&w);
        let e2 = if w.norm() > 0.0 {
            w.normalize()
        } else {
            UnitVector3::orthogonal_to(&e1, &e1).into_inner()
        };
        let proj = |v: &Vec3| P2::new(v.dot(&e1), v.dot(&e2));
        let (pa, pb) = (proj(&a), proj(&b));
        let (alpha, beta) = (o1.alpha(), o2.alpha());
        Self {
            e1,
            e2,
            centers: [P2::zeros(), pa, pb, pa + pb],
            base: [0.0, alpha, beta, 2.0 - alpha - beta],
        }
    }

    fn radii(&self, gamma: f64) -> [f64; 4] {
        std::array::from_fn(|l| self.base[l] + SIGN[l] * gamma)
    }

    fn lift(&self, g: &P2) -> Vec3 {
        g.x * self.e1 + g.y * self.e2
    }
}

fn objective(c: &[P2; 4], r: &[f64; 4], g: &P2) -> f64 {
    (0..4).fold(f64::NEG_INFINITY, |m, l| m.max((g - c[l]).norm() - r[l]))
}

/// Exact `min_g max_l (‖g − c_l‖ − r_l)` by candidate enumeration.
fn inner_minimax(c: &[P2; 4], r: &[f64; 4]) -> (f64, P2) {
    let mut best = (f64::INFINITY, P2::zeros());
    let mut consider = |g: P2| {
        let v = objective(c, r, &g);
        if v < best.0 {
            best = (v, g);
        }
    };
    for ci in c {
        consider(*ci);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = (c[j] - c[i]).norm();
            if d > 0.0 {
                let tau = ((d + r[i] - r[j]) / (2.0 * d)).clamp(0.0, 1.0);
                consider(c[i] + tau * (c[j] - c[i]));
            }
        }
    }
    for skip in 0..4 {
        let idx: Vec<usize> = (0..4).filter(|&l| l != skip).collect();
        for g in weighted_circumcenters(c, r, [idx[0], idx[1], idx[2]]) {
            consider(g);
            consider(newton_polish(c, r, [idx[0], idx[1], idx[2]], g));
        }
    }
    best
}

/// Points `g` with `‖g − c_l‖ − r_l` equal for the three given indices.
fn weighted_circumcenters(c: &[P2; 4], r: &[f64; 4], idx: [usize; 3]) -> Vec<P2> {
    let [i, j, k] = idx;
    // Differences of squared equations are linear in (g, v):
    // 2(c_l − c_i)·g + 2(r_l − r_i)v = |c_l|² − |c_i|² − r_l² + r_i².
    let m = Matrix2::new(
        2.0 * (c[j].x - c[i].x),
        2.0 * (c[j].y - c[i].y),
        2.0 * (c[k].x - c[i].x),
        2.0 * (c[k].y - c[i].y),
    );
    let Some(minv) = m.try_inverse() else {
        return Vec::new();
    };
    let rhs = |l: usize| c[l].norm_squared() - c[i].norm_squared() - r[l] * r[l] + r[i] * r[i];
    let g0 = minv * P2::new(rhs(j), rhs(k));
    let g1 = minv * P2::new(-2.0 * (r[j] - r[i]), -2.0 * (r[k] - r[i]));
    // ‖g0 − c_i + v·g1‖² = (r_i + v)².
    let h = g0 - c[i];
    let qa = g1.norm_squared() - 1.0;
    let qb = h.dot(&g1) - r[i];
    let qc = h.norm_squared() - r[i] * r[i];
    let mut roots = Vec::with_capacity(2);
    if qa.abs() < 1e-14 {
        if qb != 0.0 {
            roots.push(-qc / (2.0 * qb));
        }
    } else {
        let disc = (qb * qb - qa * qc).max(0.0);
        let q = -(qb + qb.signum() * disc.sqrt());
        if q != 0.0 {
            roots.push(q / qa);
            roots.push(qc / q);
        } else {
            roots.push(0.0);
        }
    }
    roots
        .into_iter()
        .filter(|v| v.is_finite())
        .map(|v| g0 + v * g1)
        .collect()
}

/// A few Newton steps on `‖g − c_l‖ − r_l − v = 0` for the three indices.
fn newton_polish(c: &[P2; 4], r: &[f64; 4], idx: [usize; 3], start: P2) -> P2 {
    let mut g = start;
    let mut v = idx
        .iter()
        .map(|&l| (g - c[l]).norm() - r[l])
        .fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..3 {
        let mut jac = Matrix3::zeros();
        let mut res = Vector3::zeros();
        for (row, &l) in idx.iter().enumerate() {
            let d = g - c[l];
            let n = d.norm();
            if n == 0.0 {
                return g;
            }
            jac[(row, 0)] = d.x / n;
            jac[(row, 1)] = d.y / n;
            jac[(row, 2)] = -1.0;
            res[row] = n - r[l] - v;
        }
        let Some(step) = jac.lu().solve(&res) else {
            return g;
        };
        g -= P2::new(step[0], step[1]);
        v -= step[2];
    }
    g
}

/// Minimizes `F` over `γ` and `g`.
pub fn minimize_feasibility(o1: &SimpleObservable, o2: &SimpleObservable) -> Result<FeasibilityMinimum> {
    let plane = PlaneProblem::new(o1, o2);
    let eval = |gamma: f64| inner_minimax(&plane.centers, &plane.radii(gamma));

    let gi = super::gamma_interval(o1, o2);
    let cap = o1.alpha().min(o2.alpha());
    let start = (0.5 * (gi.gamma1 + gi.gamma2)).clamp(0.0, cap.max(0.0));
    let (u, _) = eval(start);
    if !u.is_finite() {
        return Err(Error::SolverDidNotConverge(format!("non-finite objective {u}")));
    }
    // F(γ, ·) ≥ max(−γ, γ − min(α, β)), so the minimizer lies where that
    // bound stays below the value already attained.
    let (mut lo, mut hi) = (-u, cap + u);
    let mut best = (u, start, eval(start).1);
    let record = |gamma: f64, best: &mut (f64, f64, P2)| -> f64 {
        let (v, g) = eval(gamma);
        if v < best.0 {
            *best = (v, gamma, g);
        }
        v
    };

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = record(x1, &mut best);
    let mut f2 = record(x2, &mut best);
    for _ in 0..GOLDEN_MAX_ITER {
        if hi - lo <= GOLDEN_WIDTH {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = record(x1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = record(x2, &mut best);
        }
    }
    let (value, gamma, g) = best;
    if !value.is_finite() {
        return Err(Error::SolverDidNotConverge(format!("non-finite objective {value}")));
    }
    // The minimizer stays in [lo, hi] and the outer function is 1-Lipschitz.
    let dist = if gamma < lo {
        hi - gamma
    } else if gamma > hi {
        gamma - lo
    } else {
        hi - lo
    };
    Ok(FeasibilityMinimum {
        value,
        lower_bound: value - dist - 4.0 * f64::EPSILON,
        gamma,
        g: plane.lift(&g),
    })
}

/// Witnesses built from closed-form constructions, when one applies.
fn exact_witness(o1: &SimpleObservable, o2: &SimpleObservable) -> Option<Effect> {
    if let Some(g) = product_joint(o1, o2) {
        return Some(g.gpp);
    }
    if let Some(t) = trivial_joint(o1, o2) {
        return Some(t.joint.gpp);
    }
    // When A1 ≤ A2, A1 lies below both plus effects and above 0 and E1+ + E2+ − I.
    if let Ok(rep) = sufficient_jm(o1, o2) {
        if rep.holds {
            let w = Effect::from_operator(&rep.a1).ok()?;
            return JointObservable::from_witness(o1, o2, &w.operator())
                .ok()
                .map(|_| w);
        }
    }
    None
}

/// Decides joint measurability with decision tolerance `tol`.
///
/// A closed-form witness or a numerical witness with `F ≤ 0` gives
/// `JointlyMeasurable`. `NotJointlyMeasurable` requires the certified lower
/// bound on `min F` to reach `tol`. Anything in between is `Undetermined`.
pub fn decide_jm(o1: &SimpleObservable, o2: &SimpleObservable, tol: f64) -> Result<JmVerdict> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "tol",
            value: tol,
            range: "tol > 0".into(),
        });
    }
    let min = minimize_feasibility(o1, o2)?;
    let mut margin = min.value;

    let exact = exact_witness(o1, o2);
    if let Some(w) = exact {
        margin = margin.min(feasibility_value(o1, o2, w.alpha(), &w.a()));
    }
    let numeric = (min.value <= 0.0)
        .then(|| Effect::new(min.gamma, min.g).ok())
        .flatten()
        .filter(|w| JointObservable::from_witness(o1, o2, &w.operator()).is_ok());

    let (status, witness) = if let Some(w) = exact.or(numeric) {
        (JmStatus::JointlyMeasurable, Some(w))
    } else if min.lower_bound >= tol {
        (JmStatus::NotJointlyMeasurable, None)
    } else {
        (JmStatus::Undetermined, None)
    };
    Ok(JmVerdict {
        status,
        margin,
        witness,
    })
}

/// The four operators built from a witness `(γ, g)` without validation.
pub fn witness_operators(
    o1: &SimpleObservable,
    o2: &SimpleObservable,
    gamma: f64,
    g: &Vec3,
) -> [BlochOperator; 4] {
    let gpp = BlochOperator::new(gamma, *g);
    let e1 = o1.plus.operator();
    let e2 = o2.plus.operator();
    [
        gpp,
        e1.sub(&gpp),
        e2.sub(&gpp),
        BlochOperator::identity().sub(&e1).sub(&e2).add(&gpp),
    ]
}
