//! Approximate joint measurements of two noncommuting sharp observables
//! `E^{1,n}` and `E^{1,m}`.
//!
//! A point `(d1, d2)` is admissible when some jointly measurable pair lies
//! within distance `d1` of the first target and `d2` of the second. The
//! lower boundary of that region is traced numerically by
//! [`boundary_curve`]. For the planar, unbiased approximators that suffice
//! here, joint measurability of `E^{1,a}`, `E^{1,b}` means `b` lies in the
//! filled ellipse with foci `±a`, semi-major axis 1 and semi-minor axis
//! `√(1 − ‖a‖²)`. The inner minimization over `b` is thus a point-to-ellipse
//! projection; the outer search over `a` uses a polar grid followed by
//! Nelder–Mead.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::effect::{SimpleObservable, UnitVector3, Vec3};
use crate::error::{Error, Result};
use crate::jointness::{covariant_jm, decide_jm, JmStatus, DEFAULT_DECISION_TOL};
use crate::measures::distance_to_sharp;

pub type P2 = Vector2<f64>;

/// Two sharp target directions with `0 < θ ≤ π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetPair {
    n: UnitVector3,
    m: UnitVector3,
    theta: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= FRAC_PI_2 + 1e-12 {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name: "theta",
            value: theta,
            range: "(0, π/2] radians".into(),
        })
    }
}

impl TargetPair {
    pub fn new(n: UnitVector3, m: UnitVector3) -> Result<Self> {
        let (nv, mv) = (n.into_inner(), m.into_inner());
        if nv.cross(&mv).norm() <= 1e-12 {
            return Err(Error::DegenerateTargets);
        }
        let theta = nv.dot(&mv).clamp(-1.0, 1.0).acos();
        check_theta(theta)?;
        Ok(Self {
            n,
            m,
            theta: theta.min(FRAC_PI_2),
        })
    }

    /// Targets in the xy-plane placed symmetrically about the y-axis:
    /// `n = (sin θ/2, cos θ/2, 0)`, `m = (−sin θ/2, cos θ/2, 0)`.
    pub fn symmetric(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let theta = theta.min(FRAC_PI_2);
        let (s, c) = (0.5 * theta).sin_cos();
        Ok(Self {
            n: UnitVector3::new_normalize(Vec3::new(s, c, 0.0))?,
            m: UnitVector3::new_normalize(Vec3::new(-s, c, 0.0))?,
            theta,
        })
    }

    pub fn n(&self) -> UnitVector3 {
        self.n
    }

    pub fn m(&self) -> UnitVector3 {
        self.m
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Orthonormal frame of the target plane: `x ∝ n − m`, `y ∝ n + m`.
    fn frame(&self) -> Result<(Vec3, Vec3)> {
        let (n, m) = (self.n.into_inner(), self.m.into_inner());
        let (d, s) = (n - m, n + m);
        if n.cross(&m).norm() <= 1e-12 || d.norm() == 0.0 || s.norm() == 0.0 {
            return Err(Error::DegenerateTargets);
        }
        Ok((d.normalize(), s.normalize()))
    }

    /// Maps planar coordinates in the symmetric frame to R³.
    pub fn embed(&self, p: &P2) -> Vec3 {
        let (x, y) = self.frame().expect("validated targets span a plane");
        p.x * x + p.y * y
    }

    /// Planar coordinates of the orthogonal projection of `v`.
    pub fn project(&self, v: &Vec3) -> P2 {
        let (x, y) = self.frame().expect("validated targets span a plane");
        P2::new(v.dot(&x), v.dot(&y))
    }

    fn planar_targets(&self) -> (P2, P2) {
        let (s, c) = (0.5 * self.theta).sin_cos();
        (P2::new(s, c), P2::new(-s, c))
    }
}

/// The symmetric optimum `D₀(θ) = (cos θ/2 + sin θ/2 − 1)/(2√2)`.
pub fn d0(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let (s, c) = (0.5 * theta).sin_cos();
    Ok((c + s - 1.0) / (2.0 * std::f64::consts::SQRT_2))
}

/// `D₀` written through distances between the targets:
/// `(D(Eⁿ, Eᵐ) + D(Eⁿ, E⁻ᵐ) − 1)/(2√2)`.
pub fn d0_from_distances(target: &TargetPair) -> f64 {
    let n = SimpleObservable::sharp(&target.n);
    let m = target.m.into_inner();
    let minus_m = UnitVector3::new_normalize(-m).expect("unit vector");
    let d_plus = distance_to_sharp(&n, &target.m);
    let d_minus = distance_to_sharp(&n, &minus_m);
    (d_plus + d_minus - 1.0) / (2.0 * std::f64::consts::SQRT_2)
}

/// Best common distance `½(1 − √(1 − sin θ)/cos θ)` reachable by smearing
/// both targets with the same stochastic matrix. Evaluated in the
/// equivalent form `½(1 − 1/√(1 + sin θ))`, which stays finite at `π/2`
/// where it equals [`d0`].
pub fn d0_coarse(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(0.5 * (1.0 - 1.0 / (1.0 + theta.sin()).sqrt()))
}

/// `½ sin θ`: the smallest `d2` admissible with `d1 = 0`.
pub fn axis_intercept(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(0.5 * theta.sin())
}

/// `D(O1, Eⁿ) + D(O2, Eᵐ) − 2D₀(θ)`. With `check` the pair is first
/// verified to be jointly measurable.
pub fn tradeoff_margin(
    o1: &SimpleObservable,
    o2: &SimpleObservable,
    target: &TargetPair,
    check: bool,
) -> Result<f64> {
    if check && decide_jm(o1, o2, DEFAULT_DECISION_TOL)?.status != JmStatus::JointlyMeasurable {
        return Err(Error::NotJointlyMeasurable);
    }
    Ok(distance_to_sharp(o1, &target.n) + distance_to_sharp(o2, &target.m)
        - 2.0 * d0(target.theta)?)
}

/// Replaces `(α, a)` and `(β, b)` by `(1, a₀)` and `(1, b₀)`, where `a₀`,
/// `b₀` are the projections onto the target plane.
pub fn project_pair_to_plane(
    o1: &SimpleObservable,
    o2: &SimpleObservable,
    target: &TargetPair,
) -> Result<(SimpleObservable, SimpleObservable)> {
    target.frame()?;
    let a0 = target.embed(&target.project(&o1.a()));
    let b0 = target.embed(&target.project(&o2.a()));
    Ok((
        SimpleObservable::from_coords(1.0, a0)?,
        SimpleObservable::from_coords(1.0, b0)?,
    ))
}

/// Realizes the mirrored point `(d2, d1)`: both vectors are reflected in
/// the plane that exchanges `n` and `m`, and the roles are swapped.
pub fn swap_realization(
    o1: &SimpleObservable,
    o2: &SimpleObservable,
    target: &TargetPair,
) -> Result<(SimpleObservable, SimpleObservable)> {
    let (x, _) = target.frame()?;
    let reflect = |v: Vec3| v - 2.0 * v.dot(&x) * x;
    Ok((
        SimpleObservable::from_coords(o2.alpha(), reflect(o2.a()))?,
        SimpleObservable::from_coords(o1.alpha(), reflect(o1.a()))?,
    ))
}

/// A pair of trivially jointly measurable observables realizing `(d1, d2)`
/// when `max(d1, d2) ≥ ½`.
pub fn trivial_admissible_witness(
    target: &TargetPair,
    d1: f64,
    d2: f64,
) -> Option<(SimpleObservable, SimpleObservable)> {
    if !(0.0..=1.0).contains(&d1) || !(0.0..=1.0).contains(&d2) {
        return None;
    }
    let (n, m) = (target.n.into_inner(), target.m.into_inner());
    if d1 >= 0.5 {
        let o1 = SimpleObservable::trivial(2.0 * d1).ok()?;
        let o2 = SimpleObservable::from_coords(1.0, (1.0 - 2.0 * d2) * m).ok()?;
        Some((o1, o2))
    } else if d2 >= 0.5 {
        let o1 = SimpleObservable::from_coords(1.0, (1.0 - 2.0 * d1) * n).ok()?;
        let o2 = SimpleObservable::trivial(2.0 * d2).ok()?;
        Some((o1, o2))
    } else {
        None
    }
}

/// Settings for [`min_d2_given_d1`] and [`boundary_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Points per axis of the polar grid in the first stage.
    pub grid_resolution: usize,
    /// Termination tolerance of the simplex polish on `d2`.
    pub tolerance: f64,
    /// Extra randomly perturbed simplex starts.
    pub restarts: usize,
    pub seed: u64,
    /// Worker threads for [`boundary_curve`].
    pub jobs: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_resolution: 96,
            tolerance: 1e-6,
            restarts: 4,
            seed: 0,
            jobs: 1,
        }
    }
}

/// Optimal `d2` for a given `d1` with the approximators that attain it,
/// in the planar coordinates of [`TargetPair::embed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinD2 {
    pub d1: f64,
    pub d2: f64,
    pub a: P2,
    pub b: P2,
}

/// Closest point of the ellipse `x²/e0² + y²/e1² ≤ 1` (`e0 ≥ e1 > 0`) to a
/// point `(y0, y1)` with nonnegative coordinates outside it. Robust
/// bisection on the Lagrange multiplier.
fn closest_on_ellipse_quadrant(e0: f64, e1: f64, y0: f64, y1: f64) -> (f64, f64) {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g <= 0.0 {
                return (y0, y1);
            }
            let r0 = (e0 / e1) * (e0 / e1);
            let n0 = r0 * z0;
            let mut s0 = z1 - 1.0;
            let mut s1 = n0.hypot(z1) - 1.0;
            let mut s = 0.0;
            for _ in 0..200 {
                s = 0.5 * (s0 + s1);
                if s == s0 || s == s1 {
                    break;
                }
                let ratio0 = n0 / (s + r0);
                let ratio1 = z1 / (s + 1.0);
                let g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
                if g > 0.0 {
                    s0 = s;
                } else if g < 0.0 {
                    s1 = s;
                } else {
                    break;
                }
            }
            (r0 * y0 / (s + r0), y1 / (s + 1.0))
        } else {
            // On the minor axis the closest boundary point is the covertex.
            (0.0, e1)
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            (e0 * xde0, e1 * (1.0 - xde0 * xde0).max(0.0).sqrt())
        } else {
            (e0, 0.0)
        }
    }
}

/// Closest point to `p` of the set `{b : ‖b + a‖ + ‖b − a‖ ≤ 2}`.
fn closest_jm_partner(a: &P2, p: &P2) -> P2 {
    if (p + a).norm() + (p - a).norm() <= 2.0 {
        return *p;
    }
    let na = a.norm();
    let u = if na > 0.0 { a / na } else { P2::x() };
    let v = P2::new(-u.y, u.x);
    let (pu, pv) = (p.dot(&u), p.dot(&v));
    let e1sq = 1.0 - na * na;
    if e1sq <= 4.0 * f64::EPSILON {
        // Degenerate ellipse (up to rounding of ‖a‖ = 1): the segment
        // between the foci ±u.
        return pu.clamp(-1.0, 1.0) * u;
    }
    let (x0, x1) = closest_on_ellipse_quadrant(1.0, e1sq.sqrt(), pu.abs(), pv.abs());
    x0.copysign(pu) * u + x1.copysign(pv) * v
}

struct Stage<'a> {
    n: P2,
    m: P2,
    radius: f64,
    evals: &'a AtomicUsize,
}

impl Stage<'_> {
    /// Maps any planar point into the feasible set for `a`: radial
    /// projection onto the disk around `n`, then onto the unit disk.
    fn retract(&self, x: &P2) -> P2 {
        let d = x - self.n;
        let dn = d.norm();
        let mut a = if dn > self.radius {
            self.n + d * (self.radius / dn)
        } else {
            *x
        };
        let na = a.norm();
        if na > 1.0 {
            a /= na;
        }
        a
    }

    /// `‖b* − m‖` for the best partner `b*` of `a`.
    fn objective(&self, a: &P2) -> (f64, P2) {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let b = closest_jm_partner(a, &self.m);
        ((b - self.m).norm(), b)
    }
}

fn nelder_mead<F: Fn(&P2) -> f64>(f: &F, start: P2, step: f64, ftol: f64) -> (P2, f64) {
    let mut pts = [start, start + P2::new(step, 0.0), start + P2::new(0.0, step)];
    let mut vals = pts.map(|p| f(&p));
    for _ in 0..4000 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);
        let diam = (pts[1] - pts[0]).norm().max((pts[2] - pts[0]).norm());
        if vals[2] - vals[0] <= ftol && diam <= 1e-12_f64.max(ftol) {
            break;
        }
        let centroid = 0.5 * (pts[0] + pts[1]);
        let xr = centroid + (centroid - pts[2]);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = centroid + 2.0 * (centroid - pts[2]);
            let fe = f(&xe);
            if fe < fr {
                pts[2] = xe;
                vals[2] = fe;
            } else {
                pts[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = xr;
            vals[2] = fr;
        } else {
            let (xc, fc) = if fr < vals[2] {
                let xc = centroid + 0.5 * (xr - centroid);
                (xc, f(&xc))
            } else {
                let xc = centroid + 0.5 * (pts[2] - centroid);
                (xc, f(&xc))
            };
            if fc < vals[2].min(fr) {
                pts[2] = xc;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = pts[0] + 0.5 * (pts[k] - pts[0]);
                    vals[k] = f(&pts[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    (pts[best], vals[best])
}

/// Smallest `d2` such that `(d1, d2)` is admissible, i.e. the minimum of
/// `½‖b − m‖` over planar `a`, `b` with `‖a + b‖ + ‖a − b‖ ≤ 2` and
/// `½‖a − n‖ ≤ d1`.
pub fn min_d2_given_d1(target: &TargetPair, d1: f64, opts: &SolverOptions) -> Result<MinD2> {
    min_d2_seeded(target, d1, opts, opts.seed)
}

fn min_d2_seeded(target: &TargetPair, d1: f64, opts: &SolverOptions, seed: u64) -> Result<MinD2> {
    if !(0.0..=0.5).contains(&d1) {
        return Err(Error::ParamOutOfRange {
            name: "d1",
            value: d1,
            range: "[0, 1/2]".into(),
        });
    }
    if opts.grid_resolution < 2 {
        return Err(Error::ParamOutOfRange {
            name: "grid_resolution",
            value: opts.grid_resolution as f64,
            range: "≥ 2".into(),
        });
    }
    let (n, m) = target.planar_targets();
    let evals = AtomicUsize::new(0);
    let stage = Stage {
        n,
        m,
        radius: 2.0 * d1,
        evals: &evals,
    };
    let finish = |a: P2| {
        let (dist, b) = stage.objective(&a);
        MinD2 {
            d1,
            d2: 0.5 * dist,
            a,
            b,
        }
    };
    if d1 == 0.0 {
        return Ok(finish(n));
    }

    // Stage 1: polar grid over the admissible disk for `a`.
    let g = opts.grid_resolution;
    let mut grid: Vec<(f64, P2)> = Vec::with_capacity(g * g);
    for i in 0..g {
        let r = stage.radius * i as f64 / (g - 1) as f64;
        let count = if i == 0 { 1 } else { g };
        for j in 0..count {
            let phi = 2.0 * PI * j as f64 / g as f64;
            let a = stage.retract(&(n + r * P2::new(phi.cos(), phi.sin())));
            grid.push((stage.objective(&a).0, a));
        }
    }
    grid.sort_by(|x, y| x.0.total_cmp(&y.0));
    if grid[0].0 == 0.0 {
        return Ok(finish(grid[0].1));
    }

    // Stage 2: simplex polish from the best grid points and jittered copies.
    let f = |x: &P2| stage.objective(&stage.retract(x)).0;
    let step = (stage.radius / g as f64).max(1e-6);
    let ftol = (2.0 * opts.tolerance * 1e-6).max(1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<P2> = grid.iter().take(3).map(|(_, a)| *a).collect();
    for _ in 0..opts.restarts {
        let jitter = P2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        starts.push(grid[0].1 + 4.0 * step * jitter);
    }
    let mut best = (grid[0].1, grid[0].0);
    for s in starts {
        let first = nelder_mead(&f, s, step, ftol);
        // A second pass from the result resets a possibly collapsed simplex.
        let second = nelder_mead(&f, first.0, 0.1 * step, ftol);
        for (x, v) in [first, second] {
            if v < best.1 {
                best = (stage.retract(&x), v);
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::SolverDidNotConverge(format!("d1 = {d1}: non-finite objective")));
    }
    Ok(finish(best.0))
}

/// One point of a [`BoundaryCurve`] with its witness approximators
/// `E^{1,a}`, `E^{1,b}` in planar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub d1: f64,
    pub d2min: f64,
    pub witness_ax: f64,
    pub witness_ay: f64,
    pub witness_bx: f64,
    pub witness_by: f64,
}

impl BoundarySample {
    pub fn a(&self) -> P2 {
        P2::new(self.witness_ax, self.witness_ay)
    }

    pub fn b(&self) -> P2 {
        P2::new(self.witness_bx, self.witness_by)
    }

    fn from_min(d1: f64, r: &MinD2) -> Self {
        Self {
            d1,
            d2min: r.d2,
            witness_ax: r.a.x,
            witness_ay: r.a.y,
            witness_bx: r.b.x,
            witness_by: r.b.y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub grid_resolution: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Samples replaced by the witness of a smaller `d1`.
    pub monotone_fills: usize,
    pub monotone: bool,
    /// Second differences are all at least `-1e-4`.
    pub convex: bool,
    /// Every sample satisfies `d1 + d2 ≥ 2D₀ − 1e-4`.
    pub above_line: bool,
    /// Every witness pair passes the joint-measurability criterion.
    pub witnesses_valid: bool,
}

/// Sampled lower boundary `d1 ↦ d2min(d1)` on `[0, ½ sin θ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub theta: f64,
    pub samples: Vec<BoundarySample>,
    pub solver_meta: SolverMeta,
}

impl BoundaryCurve {
    /// CSV with a `# theta=` comment line followed by one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# theta={}\n", self.theta);
        out.push_str("d1,d2min,witness_ax,witness_ay,witness_bx,witness_by\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.d1, s.d2min, s.witness_ax, s.witness_ay, s.witness_bx, s.witness_by
            );
        }
        out
    }

    /// Linear interpolation of `d2min` at `d1` within the sampled range.
    pub fn interpolate(&self, d1: f64) -> Option<f64> {
        let s = &self.samples;
        let k = s.windows(2).position(|w| w[0].d1 <= d1 && d1 <= w[1].d1)?;
        let (p, q) = (&s[k], &s[k + 1]);
        let t = if q.d1 > p.d1 { (d1 - p.d1) / (q.d1 - p.d1) } else { 0.0 };
        Some(p.d2min + t * (q.d2min - p.d2min))
    }
}

/// Traces the boundary on a uniform grid of `grid` values of `d1`.
/// Samples are computed in parallel on `opts.jobs` threads, each with its
/// own deterministic seed, and merged in `d1` order.
pub fn boundary_curve(target: &TargetPair, grid: usize, opts: &SolverOptions) -> Result<BoundaryCurve> {
    if grid < 2 {
        return Err(Error::ParamOutOfRange {
            name: "grid",
            value: grid as f64,
            range: "≥ 2".into(),
        });
    }
    let d1_max = axis_intercept(target.theta)?;
    let d1s: Vec<f64> = (0..grid)
        .map(|k| d1_max * k as f64 / (grid - 1) as f64)
        .collect();
    let results: Mutex<Vec<Option<Result<MinD2>>>> = Mutex::new(vec![None; grid]);
    let next = AtomicUsize::new(0);
    let jobs = opts.jobs.clamp(1, grid);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= grid {
                    break;
                }
                let seed = opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64);
                let r = min_d2_seeded(target, d1s[k].min(0.5), opts, seed);
                results.lock().expect("result lock")[k] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("result lock");

    let mut samples = Vec::with_capacity(grid);
    let mut fills = 0;
    for (k, r) in results.into_iter().enumerate() {
        let r = r.ok_or_else(|| Error::SolverDidNotConverge(format!("sample {k} missing")))??;
        let mut s = BoundarySample::from_min(d1s[k], &r);
        if let Some(prev) = samples.last() {
            let prev: &BoundarySample = prev;
            // A witness for a smaller d1 stays admissible for a larger one.
            if prev.d2min < s.d2min {
                s = BoundarySample { d1: d1s[k], ..*prev };
                fills += 1;
            }
        }
        samples.push(s);
    }

    let line = 2.0 * d0(target.theta)?;
    let monotone = samples.windows(2).all(|w| w[1].d2min <= w[0].d2min);
    let convex = samples
        .windows(3)
        .all(|w| w[0].d2min - 2.0 * w[1].d2min + w[2].d2min >= -1e-4);
    let above_line = samples.iter().all(|s| s.d1 + s.d2min >= line - 1e-4);
    let witnesses_valid = samples.iter().all(|s| {
        let (a, b) = (target.embed(&s.a()), target.embed(&s.b()));
        a.norm() <= 1.0 + 1e-12 && b.norm() <= 1.0 + 1e-12 && covariant_jm(&a, &b)
    });
    Ok(BoundaryCurve {
        theta: target.theta,
        samples,
        solver_meta: SolverMeta {
            grid_resolution: opts.grid_resolution,
            tolerance: opts.tolerance,
            seed: opts.seed,
            monotone_fills: fills,
            monotone,
            convex,
            above_line,
            witnesses_valid,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::distance;
    use proptest::prelude::*;

    const RIGHT: f64 = FRAC_PI_2;

    #[test]
    fn d0_examples() {
        assert!((d0(RIGHT).unwrap() - (1.0 - 0.5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((d0(RIGHT).unwrap() - 0.146447).abs() < 1e-6);
        assert!((d0(PI / 3.0).unwrap() - 0.129410).abs() < 1e-6);
        assert!(d0(1e-9).unwrap() < 1e-9);
        assert!(d0(0.0).is_err() && d0(2.0).is_err());
    }

    #[test]
    fn d0_coarse_examples() {
        let t = PI / 3.0;
        let raw = 0.5 * (1.0 - (1.0 - t.sin()).sqrt() / t.cos());
        assert!((d0_coarse(t).unwrap() - raw).abs() < 1e-15);
        assert!((d0_coarse(t).unwrap() - 0.133975).abs() < 1e-6);
        assert!(d0_coarse(t).unwrap() > d0(t).unwrap());
        assert!((d0_coarse(RIGHT).unwrap() - d0(RIGHT).unwrap()).abs() < 1e-15);
        assert!(d0_coarse(1e-9).unwrap() < 1e-9);
    }

    #[test]
    fn axis_intercept_examples() {
        assert!((axis_intercept(RIGHT).unwrap() - 0.5).abs() < 1e-15);
        assert!((axis_intercept(PI / 6.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(axis_intercept(-0.1).is_err());
    }

    #[test]
    fn target_pair_validation() {
        let t = TargetPair::symmetric(1.0).unwrap();
        assert!((t.n().as_vec().dot(t.m().as_vec()) - 1f64.cos()).abs() < 1e-15);
        assert!(TargetPair::symmetric(0.0).is_err());
        assert!(TargetPair::symmetric(1.6).is_err());
        assert_eq!(
            TargetPair::new(UnitVector3::x(), UnitVector3::x()),
            Err(Error::DegenerateTargets)
        );
        let obtuse = UnitVector3::new_normalize(Vec3::new(-1.0, 1.0, 0.0)).unwrap();
        assert!(TargetPair::new(UnitVector3::x(), obtuse).is_err());
        let t = TargetPair::new(UnitVector3::x(), UnitVector3::y()).unwrap();
        assert!((t.theta() - RIGHT).abs() < 1e-15);
        let p = t.project(t.n().as_vec());
        assert!((t.embed(&p) - t.n().into_inner()).norm() < 1e-15);
    }

    #[test]
    fn d0_forms_agree() {
        for k in 1..=1000 {
            let theta = RIGHT * k as f64 / 1000.0;
            let t = TargetPair::symmetric(theta).unwrap();
            assert!((d0_from_distances(&t) - d0(theta).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn tradeoff_margin_examples() {
        let theta = 1.1;
        let t = TargetPair::symmetric(theta).unwrap();
        let (n, m) = (t.n().into_inner(), t.m().into_inner());
        let o1 = SimpleObservable::sharp(&t.n());
        let o2 = SimpleObservable::from_coords(1.0, n.dot(&m) * n).unwrap();
        let r = tradeoff_margin(&o1, &o2, &t, true).unwrap();
        assert!((r - (0.5 * theta.sin() - 2.0 * d0(theta).unwrap())).abs() < 1e-12);
        assert!(r >= 0.0);

        let triv = SimpleObservable::trivial(1.0).unwrap();
        let r = tradeoff_margin(&triv, &triv, &t, true).unwrap();
        assert!((r - (1.0 - 2.0 * d0(theta).unwrap())).abs() < 1e-12);

        let o2 = SimpleObservable::sharp(&t.m());
        assert_eq!(tradeoff_margin(&o1, &o2, &t, true), Err(Error::NotJointlyMeasurable));
    }

    #[test]
    fn optimal_symmetric_pair_sits_on_the_line() {
        // a = n − μ(1, 0) and its mirror image, on the line u + v = 1 in the
        // frame spanned by (n ± m)/‖n ± m‖.
        for theta in [0.3, 0.9, RIGHT] {
            let t = TargetPair::symmetric(theta).unwrap();
            let d = d0(theta).unwrap();
            let (s, c) = (0.5 * theta).sin_cos();
            // Solve u + v = 1 with u = s − 2d·cos45°, v = c − 2d·sin45° per axis.
            let u = s - d * 2f64.sqrt();
            let v = c - d * 2f64.sqrt();
            assert!((u + v - 1.0).abs() < 1e-12);
            let a = t.embed(&P2::new(u, v));
            let b = t.embed(&P2::new(-u, v));
            let (o1, o2) = (
                SimpleObservable::from_coords(1.0, a).unwrap(),
                SimpleObservable::from_coords(1.0, b).unwrap(),
            );
            let r = tradeoff_margin(&o1, &o2, &t, false).unwrap();
            assert!(r.abs() < 1e-12, "theta {theta}: {r}");
            assert!(covariant_jm(&a, &b));
        }
    }

    #[test]
    fn swap_examples() {
        let theta = 0.8;
        let t = TargetPair::symmetric(theta).unwrap();
        let (n, m) = (t.n().into_inner(), t.m().into_inner());
        let o1 = SimpleObservable::sharp(&t.n());
        let o2 = SimpleObservable::from_coords(1.0, n.dot(&m) * n).unwrap();
        let (p1, p2) = swap_realization(&o1, &o2, &t).unwrap();
        assert!((distance_to_sharp(&p1, &t.n()) - 0.5 * theta.sin()).abs() < 1e-12);
        assert!(distance_to_sharp(&p2, &t.m()) < 1e-12);

        let a = t.embed(&P2::new(0.3, 0.5));
        let b = t.embed(&P2::new(-0.3, 0.5));
        let (q1, q2) = (
            SimpleObservable::from_coords(1.0, a).unwrap(),
            SimpleObservable::from_coords(1.0, b).unwrap(),
        );
        let (r1, r2) = swap_realization(&q1, &q2, &t).unwrap();
        assert!(distance(&r1, &q1) < 1e-15 && distance(&r2, &q2) < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let t = TargetPair::symmetric(1.2).unwrap();
        let a = t.embed(&P2::new(0.2, 0.4));
        let b = t.embed(&P2::new(-0.1, 0.5));
        let (o1, o2) = (
            SimpleObservable::from_coords(1.0, a).unwrap(),
            SimpleObservable::from_coords(1.0, b).unwrap(),
        );
        let (p1, p2) = project_pair_to_plane(&o1, &o2, &t).unwrap();
        assert!(distance(&p1, &o1) < 1e-15 && distance(&p2, &o2) < 1e-15);

        let c = 0.3;
        let o1 = SimpleObservable::from_coords(0.8, a + c * Vec3::z()).unwrap();
        let (p1, _) = project_pair_to_plane(&o1, &o2, &t).unwrap();
        assert!((p1.a().norm_squared() - (o1.a().norm_squared() - c * c)).abs() < 1e-15);
        assert_eq!(p1.alpha(), 1.0);
        assert!(distance_to_sharp(&p1, &t.n()) <= distance_to_sharp(&o1, &t.n()));
    }

    #[test]
    fn trivial_witnesses() {
        let t = TargetPair::symmetric(1.0).unwrap();
        for (d1, d2) in [(0.5, 0.1), (0.9, 0.0), (0.2, 0.75), (1.0, 1.0)] {
            let (o1, o2) = trivial_admissible_witness(&t, d1, d2).unwrap();
            assert!((distance_to_sharp(&o1, &t.n()) - d1).abs() < 1e-15);
            assert!((distance_to_sharp(&o2, &t.m()) - d2).abs() < 1e-15);
            let v = decide_jm(&o1, &o2, DEFAULT_DECISION_TOL).unwrap();
            assert_eq!(v.status, JmStatus::JointlyMeasurable);
        }
        assert!(trivial_admissible_witness(&t, 0.4, 0.4).is_none());
    }

    #[test]
    fn ellipse_projection_matches_dense_search() {
        let a = P2::new(0.5, 0.3);
        for p in [P2::new(1.0, 1.0), P2::new(-0.2, 0.95), P2::new(0.0, -2.0), P2::new(1.5, 0.9)] {
            let b = closest_jm_partner(&a, &p);
            assert!((b + a).norm() + (b - a).norm() <= 2.0 + 1e-12);
            let mut best = f64::INFINITY;
            for k in 0..200_000 {
                let phi = 2.0 * PI * k as f64 / 200_000.0;
                let (na, e1) = (a.norm(), (1.0 - a.norm_squared()).sqrt());
                let u = a / na;
                let v = P2::new(-u.y, u.x);
                let q = phi.cos() * u + e1 * phi.sin() * v;
                best = best.min((q - p).norm());
            }
            assert!((b - p).norm() <= best + 1e-12);
            assert!(best - (b - p).norm() < 1e-9);
        }
        // Segment case and interior case.
        let a = P2::new(1.0, 0.0);
        assert!((closest_jm_partner(&a, &P2::new(0.3, 0.4)) - P2::new(0.3, 0.0)).norm() < 1e-15);
        let inside = P2::new(0.1, 0.1);
        assert_eq!(closest_jm_partner(&P2::new(0.2, 0.0), &inside), inside);
    }

    #[test]
    fn min_d2_examples() {
        let opts = SolverOptions::default();
        for theta in [0.5, 1.0, RIGHT] {
            let t = TargetPair::symmetric(theta).unwrap();
            let r = min_d2_given_d1(&t, 0.0, &opts).unwrap();
            assert!((r.d2 - 0.5 * theta.sin()).abs() < 1e-12);
            let d = d0(theta).unwrap();
            let r = min_d2_given_d1(&t, d, &opts).unwrap();
            assert!((r.d2 - d).abs() < 1e-6, "theta {theta}: {} vs {d}", r.d2);
            let r = min_d2_given_d1(&t, 0.5 * theta.sin(), &opts).unwrap();
            assert!(r.d2 < 1e-9);
        }
        let t = TargetPair::symmetric(1.0).unwrap();
        assert!(min_d2_given_d1(&t, 0.6, &opts).is_err());
    }

    #[test]
    fn boundary_curve_properties() {
        let t = TargetPair::symmetric(1.0).unwrap();
        let opts = SolverOptions {
            jobs: 3,
            ..SolverOptions::default()
        };
        let c = boundary_curve(&t, 11, &opts).unwrap();
        assert_eq!(c.samples.len(), 11);
        let meta = c.solver_meta;
        assert!(meta.monotone && meta.convex && meta.above_line && meta.witnesses_valid);
        assert!((c.samples[0].d2min - 0.5 * 1f64.sin()).abs() < 1e-6);
        assert!(c.samples[10].d2min < 1e-6);
        // Parallel and serial runs coincide.
        let serial = boundary_curve(&t, 11, &SolverOptions::default()).unwrap();
        assert_eq!(serial.to_csv(), c.to_csv());
        let csv = c.to_csv();
        assert!(csv.starts_with("# theta=1\n"));
        assert_eq!(csv.lines().count(), 13);
        assert!(boundary_curve(&t, 1, &opts).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn projection_to_plane_only_helps(
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in -1.0..1.0f64,
            bx in -1.0..1.0f64, by in -1.0..1.0f64, bz in -1.0..1.0f64,
            s in 0.0..1.0f64, q in 0.0..1.0f64, theta in 0.05..RIGHT
        ) {
            let (a, b) = (Vec3::new(ax, ay, az), Vec3::new(bx, by, bz));
            prop_assume!(a.norm() <= 1.0 && b.norm() <= 1.0);
            let alpha = a.norm() + s * (2.0 - 2.0 * a.norm());
            let beta = b.norm() + q * (2.0 - 2.0 * b.norm());
            let o1 = SimpleObservable::from_coords(alpha, a).unwrap();
            let o2 = SimpleObservable::from_coords(beta, b).unwrap();
            let t = TargetPair::symmetric(theta).unwrap();
            let (p1, p2) = project_pair_to_plane(&o1, &o2, &t).unwrap();
            prop_assert!(distance_to_sharp(&p1, &t.n()) <= distance_to_sharp(&o1, &t.n()) + 1e-15);
            prop_assert!(distance_to_sharp(&p2, &t.m()) <= distance_to_sharp(&o2, &t.m()) + 1e-15);
            if covariant_jm(&a, &b) {
                prop_assert!(covariant_jm(&p1.a(), &p2.a()));
            }
        }

        #[test]
        fn swap_exchanges_distances(
            ax in -0.7..0.7f64, ay in -0.7..0.7f64, az in -0.7..0.7f64,
            bx in -0.7..0.7f64, by in -0.7..0.7f64, bz in -0.7..0.7f64,
            alpha in 0.9..1.1f64, beta in 0.9..1.1f64, theta in 0.05..RIGHT
        ) {
            let o1 = SimpleObservable::from_coords(alpha, 0.8 * Vec3::new(ax, ay, az)).unwrap();
            let o2 = SimpleObservable::from_coords(beta, 0.8 * Vec3::new(bx, by, bz)).unwrap();
            let t = TargetPair::symmetric(theta).unwrap();
            let (p1, p2) = swap_realization(&o1, &o2, &t).unwrap();
            prop_assert!((distance_to_sharp(&p1, &t.n()) - distance_to_sharp(&o2, &t.m())).abs() < 1e-12);
            prop_assert!((distance_to_sharp(&p2, &t.m()) - distance_to_sharp(&o1, &t.n())).abs() < 1e-12);
            prop_assert_eq!(covariant_jm(&o1.a(), &o2.a()), covariant_jm(&p1.a(), &p2.a()));
        }
    }
}
