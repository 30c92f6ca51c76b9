use std::fs;
use std::io::Write;

use anyhow::Context;
use coexist_core::approximation::{boundary_curve, SolverOptions, TargetPair};
use coexist_core::jointness::{
    covariant_joint, decide_jm, informational_completeness, jordan_joint, necessary_jm, product_joint,
    skewed_joint, strong_sufficient_jm, sufficient_jm, symmetrize_joint, trivial_joint, coordinate_rank,
    is_nontrivial_pair, unsharpness_product_residual, CovariantParams, JmStatus,
};
use coexist_core::measures::{distance, distance_to_nearest_sharp, distance_to_sharp, sharpness};
use coexist_core::oracle::{brute_force_jm, verify_curve};
use coexist_core::{Error, JointObservable, SimpleObservable, UnitVector3, Vec3};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{self, usage};
use crate::{BoundaryArgs, CheckArgs, Construction, Format, MeasuresArgs, VerifyArgs};

/// Joint observables must reproduce their marginals to this accuracy
/// before they are printed.
const EMIT_TOL: f64 = 1e-10;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_JM: u8 = 1;
pub const EXIT_UNDETERMINED: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_VERIFY: u8 = 3;

fn print_json(v: &impl Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn opt<T>(r: Result<T, Error>) -> Option<T> {
    r.ok()
}

pub fn check(args: &CheckArgs) -> anyhow::Result<u8> {
    let o1 = input::observable("--o1", &args.o1)?;
    let o2 = input::observable("--o2", &args.o2)?;
    if args.tol <= 0.0 {
        return usage("--tol must be positive");
    }
    let v = decide_jm(&o1, &o2, args.tol)?;
    let suff = opt(sufficient_jm(&o1, &o2));
    let report = json!({
        "verdict": v.status,
        "margin": v.margin,
        "witness": v.witness,
        "joint": v.joint(&o1, &o2),
        "necessary": necessary_jm(&o1, &o2),
        "sufficient": suff.map(|s| s.holds),
        "sufficient_lhs": suff.map(|s| s.lhs),
        "strong_sufficient": strong_sufficient_jm(&o1, &o2),
        "nontrivial": is_nontrivial_pair(&o1, &o2),
        "unsharpness_residual": unsharpness_product_residual(&o1, &o2),
    });
    print_json(&report)?;
    Ok(match v.status {
        JmStatus::JointlyMeasurable => EXIT_OK,
        JmStatus::NotJointlyMeasurable => EXIT_NOT_JM,
        JmStatus::Undetermined => EXIT_UNDETERMINED,
    })
}

/// Outcome of a construction: the joint observable, the marginals it must
/// reproduce and the axis used for the covariance test.
struct Built {
    name: &'static str,
    joint: JointObservable,
    marginals: (SimpleObservable, SimpleObservable),
    axis: UnitVector3,
}

fn unbiased(flag: &str, v: &[f64; 3]) -> anyhow::Result<(Vec3, SimpleObservable)> {
    let a = input::bloch_vector(flag, v)?;
    Ok((a, SimpleObservable::from_coords(1.0, a)?))
}

fn build(c: &Construction) -> anyhow::Result<Result<Built, String>> {
    let infeasible = |e: Error| Ok(Err(e.to_string()));
    Ok(Ok(match c {
        Construction::Jordan { a, b } => {
            let ((a, o1), (b, o2)) = (unbiased("--a", a)?, unbiased("--b", b)?);
            match jordan_joint(&a, &b) {
                Ok(g) => Built {
                    name: "jordan",
                    joint: g,
                    marginals: (o1, o2),
                    axis: UnitVector3::orthogonal_to(&a, &b),
                },
                Err(e) => return infeasible(e),
            }
        }
        Construction::Covariant { a, b, gamma, p, u } => {
            let ((a, o1), (b, o2)) = (unbiased("--a", a)?, unbiased("--b", b)?);
            let u = match u {
                Some(u) => match UnitVector3::new_normalize(Vec3::from(*u)) {
                    Ok(u) => u,
                    Err(e) => return usage(format!("--u: {e}")),
                },
                None => UnitVector3::orthogonal_to(&a, &b),
            };
            let params = match CovariantParams::new(&a, &b, *gamma, *p, u) {
                Ok(p) => p,
                Err(e) => return infeasible(e),
            };
            match covariant_joint(&a, &b, &params) {
                Ok(g) => Built {
                    name: "covariant",
                    joint: g,
                    marginals: (o1, o2),
                    axis: u,
                },
                Err(e) => return infeasible(e),
            }
        }
        Construction::Skewed { a, b, t } => {
            let ((a, o1), (b, o2)) = (unbiased("--a", a)?, unbiased("--b", b)?);
            match skewed_joint(&a, &b, *t) {
                Ok(g) => Built {
                    name: "skewed",
                    joint: g,
                    marginals: (o1, o2),
                    axis: UnitVector3::orthogonal_to(&a, &b),
                },
                Err(e) => return infeasible(e),
            }
        }
        Construction::Symmetrize { joint, a, b, t, u } => {
            let (g, default_axis) = match (joint, a, b, t) {
                (Some(j), _, _, _) => {
                    let g = input::joint("--joint", j)?;
                    let (m1, m2) = g.marginals();
                    (g, UnitVector3::orthogonal_to(&m1.a, &m2.a))
                }
                (None, Some(a), Some(b), Some(t)) => {
                    let ((a, _), (b, _)) = (unbiased("--a", a)?, unbiased("--b", b)?);
                    match skewed_joint(&a, &b, *t) {
                        Ok(g) => (g, UnitVector3::orthogonal_to(&a, &b)),
                        Err(e) => return infeasible(e),
                    }
                }
                _ => return usage("symmetrize needs --joint, or --a, --b and --t"),
            };
            let u = match u {
                Some(u) => match UnitVector3::new_normalize(Vec3::from(*u)) {
                    Ok(u) => u,
                    Err(e) => return usage(format!("--u: {e}")),
                },
                None => default_axis,
            };
            let (m1, m2) = g.marginals();
            let marginals = (
                SimpleObservable::new(coexist_core::Effect::from_operator(&m1)?),
                SimpleObservable::new(coexist_core::Effect::from_operator(&m2)?),
            );
            match symmetrize_joint(&g, &u) {
                Ok(s) => Built {
                    name: "symmetrize",
                    joint: s,
                    marginals,
                    axis: u,
                },
                Err(e) => return infeasible(e),
            }
        }
        Construction::Product { o1, o2 } | Construction::Trivial { o1, o2 } => {
            let p1 = input::observable("--o1", o1)?;
            let p2 = input::observable("--o2", o2)?;
            let axis = UnitVector3::orthogonal_to(&p1.a(), &p2.a());
            let (name, g) = if matches!(c, Construction::Product { .. }) {
                let g = product_joint(&p1, &p2)
                    .ok_or("product construction needs commuting effects (a × b = 0)".to_owned());
                ("product", g)
            } else {
                let g = trivial_joint(&p1, &p2).map(|t| t.joint).ok_or(
                    "trivial construction needs one of E1+ ≤ E2+, E2+ ≤ E1+, E1+ ≤ E2−, E2− ≤ E1+".to_owned(),
                );
                ("trivial", g)
            };
            match g {
                Ok(g) => Built {
                    name,
                    joint: g,
                    marginals: (p1, p2),
                    axis,
                },
                Err(e) => return Ok(Err(e)),
            }
        }
    }))
}

pub fn construct(c: &Construction) -> anyhow::Result<u8> {
    let built = match build(c)? {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("infeasible: {msg}");
            return Ok(EXIT_INFEASIBLE);
        }
    };
    let g = &built.joint;
    let marginal_residual = g.marginal_residual(&built.marginals.0, &built.marginals.1);
    let normalization_residual = g.normalization_residual();
    if marginal_residual > EMIT_TOL || normalization_residual > EMIT_TOL {
        anyhow::bail!(
            "internal check failed for {}: marginal residual {marginal_residual:e}, normalization residual {normalization_residual:e}",
            built.name
        );
    }
    let covariance_residual = g.covariance_residual(&built.axis);
    let report = json!({
        "construction": built.name,
        "joint": g,
        "verification": {
            "marginal_residual": marginal_residual,
            "normalization_residual": normalization_residual,
            "valid": true,
            "covariance_axis": built.axis,
            "covariance_residual": covariance_residual,
            "covariant": covariance_residual <= EMIT_TOL,
            "rank": coordinate_rank(g),
            "informationally_complete": informational_completeness(g),
        },
    });
    print_json(&report)?;
    Ok(EXIT_OK)
}

pub fn measures(args: &MeasuresArgs) -> anyhow::Result<u8> {
    let o = input::observable("--o", &args.o)?;
    let mut report = json!({
        "observable": o.plus,
        "sharpness": sharpness(&o),
        "nearest_sharp": distance_to_nearest_sharp(&o)
            .ok()
            .map(|(d, axis)| json!({"distance": d, "axis": axis})),
    });
    if let Some(n) = &args.n {
        let n = match UnitVector3::new_normalize(Vec3::from(*n)) {
            Ok(n) => n,
            Err(e) => return usage(format!("--n: {e}")),
        };
        report["distance_to_sharp"] = json!({"axis": n, "distance": distance_to_sharp(&o, &n)});
    }
    if let Some(other) = &args.other {
        let o2 = input::observable("--other", other)?;
        report["distance"] = Value::from(distance(&o, &o2));
    }
    print_json(&report)?;
    Ok(EXIT_OK)
}

pub fn boundary(args: &BoundaryArgs) -> anyhow::Result<u8> {
    if args.grid < 2 {
        return usage(format!("--grid must be at least 2, got {}", args.grid));
    }
    if args.resolution < 16 {
        return usage(format!("--resolution must be at least 16, got {}", args.resolution));
    }
    let target = match TargetPair::symmetric(args.theta) {
        Ok(t) => t,
        Err(e) => return usage(format!("--theta: {e}")),
    };
    let opts = SolverOptions {
        grid_resolution: args.solver_grid,
        tolerance: args.tolerance,
        seed: args.seed,
        jobs: args.jobs.max(1),
        ..SolverOptions::default()
    };
    let curve = match boundary_curve(&target, args.grid, &opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("solver failure: {e}");
            return Ok(EXIT_VERIFY);
        }
    };
    let checks = if args.verify {
        Some(verify_curve(&curve, &target, args.stride, args.resolution)?)
    } else {
        None
    };
    let body = match args.format {
        Format::Csv => curve.to_csv(),
        Format::Json => {
            let mut v = serde_json::to_value(&curve)?;
            if let Some(c) = &checks {
                v["verification"] = serde_json::to_value(c)?;
            }
            serde_json::to_string_pretty(&v)? + "\n"
        }
    };
    match &args.output {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    let mut code = EXIT_OK;
    if let Some(checks) = checks {
        for c in checks.iter().filter(|c| !c.agrees) {
            eprintln!(
                "sample {} (d1 = {}): solver {} vs oracle {}",
                c.index, c.d1, c.d2min, c.oracle
            );
            code = EXIT_VERIFY;
        }
    }
    Ok(code)
}

pub fn verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let o1 = input::observable("--o1", &args.o1)?;
    let o2 = input::observable("--o2", &args.o2)?;
    if args.resolution < 8 {
        return usage(format!("--resolution must be at least 8, got {}", args.resolution));
    }
    let solver = decide_jm(&o1, &o2, args.tol)?;
    let oracle = brute_force_jm(&o1, &o2, args.resolution)?;
    let band = 3.0 / args.resolution as f64;
    let in_band = solver.margin.abs() <= band;
    let agree = solver.status == oracle.status;
    print_json(&json!({
        "solver": solver,
        "oracle": oracle,
        "band": band,
        "in_band": in_band,
        "agree": agree,
    }))?;
    Ok(if agree || in_band { EXIT_OK } else { EXIT_VERIFY })
}
