//! Brute-force cross-checks built on explicit 2×2 complex matrices.
//!
//! Nothing here reuses the coordinate formulas of the other modules for the
//! quantity being checked: effects become Pauli sums, positivity is read off
//! matrix eigenvalues and the optimization problems are solved by
//! exhaustive grids. The results are resolution dependent and serve only as
//! references for tests and for `coexist boundary --verify`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approximation::{BoundaryCurve, TargetPair};
use crate::effect::{Effect, SimpleObservable, Vec3};
use crate::error::{Error, Result};
use crate::jointness::{JmStatus, JmVerdict};

pub type CMatrix2 = Matrix2<Complex64>;

/// Slack allowed on eigenvalues when testing `M ≥ 0` on grid points.
const PSD_SLACK: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The identity and the Pauli matrices `σ₁, σ₂, σ₃`.
pub fn pauli() -> [CMatrix2; 4] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [
        CMatrix2::new(l, o, o, l),
        CMatrix2::new(o, l, l, o),
        CMatrix2::new(o, -i, i, o),
        CMatrix2::new(l, o, o, -l),
    ]
}

/// A 2×2 Hermitian matrix `[[d0, re − i·im], [re + i·im, d1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix2 {
    pub d0: f64,
    pub d1: f64,
    pub re: f64,
    pub im: f64,
}

impl HermitianMatrix2 {
    /// Reads the diagonal and the lower off-diagonal entry; the upper one is
    /// assumed to be its conjugate.
    pub fn from_complex(m: &CMatrix2) -> Self {
        Self {
            d0: m[(0, 0)].re,
            d1: m[(1, 1)].re,
            re: m[(1, 0)].re,
            im: m[(1, 0)].im,
        }
    }

    pub fn to_complex(&self) -> CMatrix2 {
        CMatrix2::new(
            c(self.d0, 0.0),
            c(self.re, -self.im),
            c(self.re, self.im),
            c(self.d1, 0.0),
        )
    }

    pub fn trace(&self) -> f64 {
        self.d0 + self.d1
    }

    pub fn determinant(&self) -> f64 {
        self.d0 * self.d1 - self.re * self.re - self.im * self.im
    }

    /// `t/2 − √(t²/4 − det)`, with the discriminant expanded as
    /// `((d0 − d1)/2)² + |off|²` to avoid cancellation.
    pub fn min_eigenvalue(&self) -> f64 {
        0.5 * self.trace() - self.half_gap()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        0.5 * self.trace() + self.half_gap()
    }

    fn half_gap(&self) -> f64 {
        let h = 0.5 * (self.d0 - self.d1);
        (h * h + self.re * self.re + self.im * self.im).sqrt()
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            d0: self.d0 - o.d0,
            d1: self.d1 - o.d1,
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

/// `½(αI + a₁σ₁ + a₂σ₂ + a₃σ₃)` for arbitrary coordinates, valid effect or
/// not.
pub fn bloch_matrix(alpha: f64, a: &Vec3) -> HermitianMatrix2 {
    let [id, s1, s2, s3] = pauli();
    let m = (id * c(alpha, 0.0) + s1 * c(a.x, 0.0) + s2 * c(a.y, 0.0) + s3 * c(a.z, 0.0))
        * c(0.5, 0.0);
    HermitianMatrix2::from_complex(&m)
}

pub fn effect_matrix(e: &Effect) -> HermitianMatrix2 {
    bloch_matrix(e.alpha(), &e.a())
}

pub fn min_eigenvalue(m: &HermitianMatrix2) -> f64 {
    m.min_eigenvalue()
}

/// Largest minus smallest eigenvalue of the matrix of `e`.
pub fn matrix_spectral_width(e: &Effect) -> f64 {
    let m = effect_matrix(e);
    m.max_eigenvalue() - m.min_eigenvalue()
}

/// Spectral width of `M(I − M)` formed as a matrix product.
pub fn matrix_product_width(e: &Effect) -> f64 {
    let m = effect_matrix(e).to_complex();
    let p = HermitianMatrix2::from_complex(&(m * (CMatrix2::identity() - m)));
    p.max_eigenvalue() - p.min_eigenvalue()
}

/// A qubit state with Bloch vector `r`, `‖r‖ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    r: Vec3,
}

impl BlochState {
    pub fn new(r: Vec3) -> Result<Self> {
        let norm = r.norm();
        if !norm.is_finite() || norm > 1.0 + 1e-12 {
            return Err(Error::ParamOutOfRange {
                name: "r",
                value: norm,
                range: "‖r‖ ≤ 1".into(),
            });
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> Vec3 {
        self.r
    }

    /// `T_r = ½(I + r·σ)`.
    pub fn density_matrix(&self) -> CMatrix2 {
        bloch_matrix(1.0, &self.r).to_complex()
    }
}

/// `tr[T_r A]` from the matrix product.
pub fn probability(e: &Effect, state: &BlochState) -> f64 {
    (state.density_matrix() * effect_matrix(e).to_complex()).trace().re
}

fn sphere_point(u: f64, phi: f64) -> Vec3 {
    let s = (1.0 - u * u).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), u)
}

/// Largest `|p₁ − p₂|` of the "+" outcome over pure states: `samples`
/// random states followed by a shrinking-step local search around the best.
/// Always a lower bound on the distance of the observables.
pub fn sampled_distance(o1: &SimpleObservable, o2: &SimpleObservable, samples: usize, seed: u64) -> f64 {
    let gap = |r: &Vec3| {
        let state = BlochState { r: *r };
        (probability(&o1.plus, &state) - probability(&o2.plus, &state)).abs()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (Vec3::z(), gap(&Vec3::z()));
    for _ in 0..samples {
        let r = sphere_point(rng.random_range(-1.0..=1.0), rng.random_range(0.0..2.0 * PI));
        let v = gap(&r);
        if v > best.1 {
            best = (r, v);
        }
    }
    let mut step = 0.25;
    while step > 1e-9 {
        let mut improved = false;
        for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
            for sign in [-1.0, 1.0] {
                let r = (best.0 + sign * step * axis).normalize();
                let v = gap(&r);
                if v > best.1 {
                    best = (r, v);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.1
}

/// Grid search for `G++ = ½(γI + g·σ)` making the four operators
/// `G++`, `E1+ − G++`, `E2+ − G++`, `I − E1+ − E2+ + G++` positive.
///
/// `γ` runs over `resolution` points of the trace bounds
/// `[max(0, α + β − 2), min(α, β)]` and `g` over a grid of
/// `(2⌊resolution/2⌋ + 1)²` points of the square `[−γ, γ]²` in the plane of
/// `a` and `b` (components of `g` orthogonal to that plane only increase
/// every norm involved). The margin
/// is the least value over the grid of `max(−2λ_min)` across the four
/// matrices; it is nonpositive exactly for feasible grid points.
pub fn brute_force_jm(o1: &SimpleObservable, o2: &SimpleObservable, resolution: usize) -> Result<JmVerdict> {
    if resolution < 8 {
        return Err(Error::ParamOutOfRange {
            name: "resolution",
            value: resolution as f64,
            range: "≥ 8".into(),
        });
    }
    let e1 = effect_matrix(&o1.plus);
    let e2 = effect_matrix(&o2.plus);
    let id = bloch_matrix(2.0, &Vec3::zeros());
    let rest = id.sub(&e1).sub(&e2);
    let (alpha, beta) = (e1.trace(), e2.trace());
    let lo = 0.0f64.max(alpha + beta - 2.0);
    let hi = alpha.min(beta);
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    let (u, v) = plane_basis(&o1.a(), &o2.a());

    let mut best = (f64::INFINITY, 0.0, Vec3::zeros());
    let steps = resolution - 1;
    // An odd number of points per side keeps the axes on the g grid.
    let half = resolution / 2;
    for i in 0..resolution {
        let gamma = lo + (hi - lo) * i as f64 / steps as f64;
        for j in 0..=2 * half {
            let x = gamma * (j as f64 / half as f64 - 1.0);
            for k in 0..=2 * half {
                let y = gamma * (k as f64 / half as f64 - 1.0);
                let g = x * u + y * v;
                let gpp = bloch_matrix(gamma, &g);
                let worst = [
                    gpp,
                    e1.sub(&gpp),
                    e2.sub(&gpp),
                    HermitianMatrix2 {
                        d0: rest.d0 + gpp.d0,
                        d1: rest.d1 + gpp.d1,
                        re: rest.re + gpp.re,
                        im: rest.im + gpp.im,
                    },
                ]
                .iter()
                .map(|m| -2.0 * m.min_eigenvalue())
                .fold(f64::NEG_INFINITY, f64::max);
                if worst < best.0 {
                    best = (worst, gamma, g);
                }
                if worst <= 2.0 * PSD_SLACK {
                    return Ok(JmVerdict {
                        status: JmStatus::JointlyMeasurable,
                        margin: worst,
                        witness: Effect::new(gamma, g).ok(),
                    });
                }
            }
        }
    }
    Ok(JmVerdict {
        status: JmStatus::NotJointlyMeasurable,
        margin: best.0,
        witness: None,
    })
}

/// Orthonormal pair spanning a plane that contains `a` and `b`.
fn plane_basis(a: &Vec3, b: &Vec3) -> (Vec3, Vec3) {
    let first = if a.norm() > 1e-14 {
        *a
    } else if b.norm() > 1e-14 {
        *b
    } else {
        Vec3::x()
    };
    let u = first.normalize();
    let mut w = b - b.dot(&u) * u;
    if w.norm() <= 1e-12 {
        let trial = if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        w = trial - trial.dot(&u) * u;
    }
    (u, w.normalize())
}

/// The condition `‖a + b‖ + ‖a − b‖ ≤ 2` for a fixed planar `a`, squared
/// out into `b⊥² ≤ (1 − ‖a‖)(1 + ‖a‖)(1 − b∥²)` with components taken
/// along `a`. Unlike the sum of norms this form does not admit spurious
/// points of size `√ε` when `‖a‖` rounds to 1.
struct JmConstraint {
    dir: (f64, f64),
    slack: f64,
}

impl JmConstraint {
    fn new(a: (f64, f64)) -> Self {
        let s = a.0.hypot(a.1);
        let dir = if s > 0.0 { (a.0 / s, a.1 / s) } else { (1.0, 0.0) };
        let s = if s >= 1.0 - 4.0 * f64::EPSILON { 1.0 } else { s };
        Self {
            dir,
            slack: (1.0 - s) * (1.0 + s),
        }
    }

    fn admits(&self, x: f64, y: f64) -> bool {
        let par = x * self.dir.0 + y * self.dir.1;
        let perp = y * self.dir.0 - x * self.dir.1;
        let room = 1.0 - par * par;
        room >= 0.0 && perp * perp <= self.slack * room
    }
}

/// Grid estimate of the smallest `½‖b − m‖` over planar `a`, `b` with
/// `‖a + b‖ + ‖a − b‖ ≤ 2` and `½‖a − n‖ ≤ d1`.
///
/// Candidates for `a` are `n` and `4·resolution` points on the circle of
/// radius `2d1` about `n`, pulled into the unit disk. (The optimum lies on
/// that circle whenever the boundary is strictly decreasing.) For
/// each `a`, `b` is searched along `8·resolution` rays from the origin and
/// along `±â`; on
/// each ray the feasible segment is found by bisection and the point of the
/// segment nearest to `m` is taken. Only feasible points are evaluated, so
/// the result never lies below the true minimum.
pub fn brute_force_min_d2(target: &TargetPair, d1: f64, resolution: usize) -> Result<f64> {
    if resolution < 16 {
        return Err(Error::ParamOutOfRange {
            name: "resolution",
            value: resolution as f64,
            range: "≥ 16".into(),
        });
    }
    if !(0.0..=0.5).contains(&d1) {
        return Err(Error::ParamOutOfRange {
            name: "d1",
            value: d1,
            range: "[0, 1/2]".into(),
        });
    }
    let n3 = target.n().into_inner();
    let m3 = target.m().into_inner();
    let (u, v) = plane_basis(&n3, &m3);
    let to_plane = |x: &Vec3| (x.dot(&u), x.dot(&v));
    let (n, m) = (to_plane(&n3), to_plane(&m3));
    let m_angle = m.1.atan2(m.0);

    let n_angles = 4 * resolution;
    let n_rays = 8 * resolution;
    let ray_step = 2.0 * PI / n_rays as f64;
    let mut best = 1.0f64; // b = 0 is always feasible and sits at distance 1
    let candidates = std::iter::once(n).chain((0..n_angles).map(|j| {
        let phi = 2.0 * PI * j as f64 / n_angles as f64;
        (n.0 + 2.0 * d1 * phi.cos(), n.1 + 2.0 * d1 * phi.sin())
    }));
    for mut a in candidates {
        let na = a.0.hypot(a.1);
        if na > 1.0 {
            a = (a.0 / na, a.1 / na);
        }
        let constraint = JmConstraint::new(a);
        // Rays at angle ψ from m cannot come closer than |sin ψ|.
        let half_window = best.min(1.0).asin();
        let k_max = (half_window / ray_step).ceil() as i64;
        // The major axis ±â is added so the degenerate case ‖a‖ = 1, where
        // only that segment is feasible, is not missed by the sweep.
        let sweep = (-k_max..=k_max).map(|k| {
            let psi = m_angle + k as f64 * ray_step;
            (psi.cos(), psi.sin())
        });
        let axis = [constraint.dir, (-constraint.dir.0, -constraint.dir.1)];
        for e in sweep.chain(axis) {
            let foot = (e.0 * m.0 + e.1 * m.1).max(0.0);
            let rho = if constraint.admits(foot * e.0, foot * e.1) {
                foot
            } else {
                let (mut lo, mut hi) = (0.0, foot);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if constraint.admits(mid * e.0, mid * e.1) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            best = best.min((rho * e.0 - m.0).hypot(rho * e.1 - m.1));
        }
    }
    Ok(0.5 * best)
}

/// Comparison of one boundary sample with [`brute_force_min_d2`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SampleCheck {
    pub index: usize,
    pub d1: f64,
    pub d2min: f64,
    pub oracle: f64,
    /// `oracle ≥ d2min − solver_tolerance` and `oracle − d2min < 2/resolution`.
    pub agrees: bool,
}

/// Re-checks every `stride`-th sample of `curve` (and the last one) against
/// the grid oracle.
pub fn verify_curve(
    curve: &BoundaryCurve,
    target: &TargetPair,
    stride: usize,
    resolution: usize,
) -> Result<Vec<SampleCheck>> {
    let stride = stride.max(1);
    let last = curve.samples.len().saturating_sub(1);
    let slack = curve.solver_meta.tolerance;
    curve
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| k % stride == 0 || *k == last)
        .map(|(index, s)| {
            let oracle = brute_force_min_d2(target, s.d1.min(0.5), resolution)?;
            let gap = oracle - s.d2min;
            Ok(SampleCheck {
                index,
                d1: s.d1,
                d2min: s.d2min,
                oracle,
                agrees: gap >= -slack && gap < 2.0 / resolution as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effect::UnitVector3;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn eff(alpha: f64, x: f64, y: f64, z: f64) -> Effect {
        Effect::new(alpha, Vec3::new(x, y, z)).unwrap()
    }

    fn obs(alpha: f64, a: Vec3) -> SimpleObservable {
        SimpleObservable::from_coords(alpha, a).unwrap()
    }

    #[test]
    fn effect_matrix_examples() {
        let m = effect_matrix(&eff(1.0, 0.0, 0.0, 1.0));
        assert_eq!((m.d0, m.d1, m.re, m.im), (1.0, 0.0, 0.0, 0.0));
        let m = effect_matrix(&eff(1.0, 1.0, 0.0, 0.0));
        assert_eq!((m.d0, m.d1, m.re, m.im), (0.5, 0.5, 0.5, 0.0));
        let m = effect_matrix(&eff(1.0, 0.0, 1.0, 0.0)).to_complex();
        assert_eq!(m[(0, 1)], c(0.0, -0.5));
        assert_eq!(m[(1, 0)], c(0.0, 0.5));
    }

    #[test]
    fn min_eigenvalue_examples() {
        let diag = HermitianMatrix2 { d0: 1.0, d1: 0.0, re: 0.0, im: 0.0 };
        assert_eq!(min_eigenvalue(&diag), 0.0);
        let half = HermitianMatrix2 { d0: 0.5, d1: 0.5, re: 0.0, im: 0.0 };
        assert_eq!(min_eigenvalue(&half), 0.5);
        let m = bloch_matrix(0.5, &Vec3::new(0.0, 0.0, 0.6));
        assert!((min_eigenvalue(&m) + 0.05).abs() < 1e-15);
        // Trace/determinant form for a generic matrix.
        let m = bloch_matrix(0.9, &Vec3::new(0.3, -0.2, 0.4));
        let (t, d) = (m.trace(), m.determinant());
        assert!((m.min_eigenvalue() - (0.5 * t - (0.25 * t * t - d).sqrt())).abs() < 1e-14);
    }

    #[test]
    fn probability_examples() {
        let any = BlochState::new(Vec3::new(0.3, -0.1, 0.5)).unwrap();
        assert!((probability(&eff(1.0, 0.0, 0.0, 0.0), &any) - 0.5).abs() < 1e-15);
        let up = BlochState::new(Vec3::z()).unwrap();
        assert!((probability(&eff(1.0, 0.0, 0.0, 1.0), &up) - 1.0).abs() < 1e-15);
        let down = BlochState::new(-Vec3::z()).unwrap();
        assert!((probability(&eff(1.0, 0.0, 0.0, 0.4), &down) - 0.3).abs() < 1e-15);
        assert!(BlochState::new(Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn widths_from_matrices() {
        let e = eff(0.6, 0.2, 0.3, -0.1);
        let n = e.a().norm();
        assert!((matrix_spectral_width(&e) - n).abs() < 1e-15);
        assert!((matrix_product_width(&e) - n * 0.4).abs() < 1e-15);
    }

    #[test]
    fn sampled_distance_examples() {
        let o1 = obs(1.0, Vec3::new(0.6, 0.0, 0.0));
        let o2 = obs(0.8, Vec3::new(0.0, 0.3, 0.1));
        let exact = 0.5 * (o1.a() - o2.a()).norm() + 0.1;
        let est = sampled_distance(&o1, &o2, 2000, 7);
        assert!(est <= exact + 1e-12 && exact - est < 1e-6);
    }

    #[test]
    fn brute_force_jm_examples() {
        let x = Vec3::x();
        let sharp = obs(1.0, x);
        let v = brute_force_jm(&sharp, &sharp, 8).unwrap();
        assert_eq!(v.status, JmStatus::JointlyMeasurable);
        let w = v.witness.unwrap();
        assert!((w.alpha() - 1.0).abs() < 1e-12 && (w.a() - x).norm() < 1e-12);

        for res in [8, 16, 33] {
            let v = brute_force_jm(&sharp, &obs(1.0, Vec3::y()), res).unwrap();
            assert_eq!(v.status, JmStatus::NotJointlyMeasurable);
            assert!(v.margin > 0.0);
        }
        let s = FRAC_1_SQRT_2;
        let v = brute_force_jm(&obs(s, s * x), &obs(s, s * Vec3::y()), 32).unwrap();
        assert_eq!(v.status, JmStatus::NotJointlyMeasurable);
        let v = brute_force_jm(&obs(1.0, 0.5 * x), &obs(1.0, 0.5 * Vec3::y()), 16).unwrap();
        assert_eq!(v.status, JmStatus::JointlyMeasurable);
        assert!(brute_force_jm(&sharp, &sharp, 7).is_err());
    }

    #[test]
    fn brute_force_min_d2_examples() {
        let res = 256;
        let tol = 2.0 / res as f64;
        let t = TargetPair::symmetric(FRAC_PI_2).unwrap();
        let v = brute_force_min_d2(&t, 0.0, res).unwrap();
        assert!((v - 0.5).abs() < tol && v >= 0.5 - 1e-12);
        let d0 = (1.0 - FRAC_1_SQRT_2) / 2.0;
        let v = brute_force_min_d2(&t, d0, res).unwrap();
        assert!((v - d0).abs() < tol && v >= d0 - 1e-9);
        let t = TargetPair::symmetric(PI / 3.0).unwrap();
        let v = brute_force_min_d2(&t, 0.0, res).unwrap();
        assert!((v - 0.5 * (PI / 3.0).sin()).abs() < tol);
        assert!(brute_force_min_d2(&t, 0.1, 15).is_err());
        // Independent of how the targets are embedded.
        let t2 = TargetPair::new(
            UnitVector3::z(),
            UnitVector3::new_normalize(Vec3::new(0.0, (PI / 3.0).sin(), 0.5)).unwrap(),
        )
        .unwrap();
        let a = brute_force_min_d2(&t, 0.05, 32).unwrap();
        let b = brute_force_min_d2(&t2, 0.05, 32).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn verify_curve_strides() {
        use crate::approximation::{boundary_curve, SolverOptions};
        let t = TargetPair::symmetric(1.2).unwrap();
        let curve = boundary_curve(&t, 10, &SolverOptions::default()).unwrap();
        let checks = verify_curve(&curve, &t, 4, 64).unwrap();
        let idx: Vec<usize> = checks.iter().map(|c| c.index).collect();
        assert_eq!(idx, vec![0, 4, 8, 9]);
        assert!(checks.iter().all(|c| c.agrees));
    }
}
