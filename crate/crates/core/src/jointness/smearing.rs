//! Coarse-graining of simple observables by 2×2 stochastic matrices.

use serde::{Deserialize, Serialize};

use super::JointObservable;
use crate::effect::{BlochOperator, Effect, SimpleObservable, Vec3};
use crate::error::{Error, Result};

/// Stochastic matrix with columns `(lpp, 1 − lpp)` and `(lpm, 1 − lpm)`.
/// Entry `lpp` is the probability of reporting `+` on a `+` outcome and
/// `lpm` that of reporting `+` on a `−` outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix2 {
    pub lpp: f64,
    pub lpm: f64,
}

impl StochasticMatrix2 {
    pub fn new(lpp: f64, lpm: f64) -> Result<Self> {
        for (name, value) in [("lpp", lpp), ("lpm", lpm)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ParamOutOfRange {
                    name,
                    value,
                    range: "[0, 1]".into(),
                });
            }
        }
        Ok(Self { lpp, lpm })
    }

    pub fn identity() -> Self {
        Self { lpp: 1.0, lpm: 0.0 }
    }
}

/// The observable with plus effect `lpp·E+ + lpm·E−`.
pub fn coarse_grain(o: &SimpleObservable, l: &StochasticMatrix2) -> SimpleObservable {
    let alpha = l.lpp * o.alpha() + l.lpm * (2.0 - o.alpha());
    let a = (l.lpp - l.lpm) * o.a();
    // A convex combination of effects is an effect; only rounding can fail.
    let plus = Effect::new(alpha, a).unwrap_or_else(|_| {
        Effect::new(alpha.clamp(0.0, 2.0), a).unwrap_or(Effect::zero())
    });
    SimpleObservable::new(plus)
}

/// `λ++ + μ++ ≤ 1 + min{λ+-, μ+-}` under the ordering `λ++ ≥ λ+-`,
/// `μ++ ≥ μ+-`. When it holds, every pair of coarse-grainings by `l1`, `l2`
/// is jointly measurable.
pub fn smearing_jm_threshold(l1: &StochasticMatrix2, l2: &StochasticMatrix2) -> Result<bool> {
    if l1.lpp < l1.lpm || l2.lpp < l2.lpm {
        return Err(Error::OrderingViolated);
    }
    Ok(l1.lpp + l2.lpp <= 1.0 + l1.lpm.min(l2.lpm) + 1e-12)
}

/// Joint observable of the coarse-grainings with the constant
/// `G++ = min{λ+-, μ+-}·I`.
pub fn smeared_joint(
    o1: &SimpleObservable,
    o2: &SimpleObservable,
    l1: &StochasticMatrix2,
    l2: &StochasticMatrix2,
) -> Result<JointObservable> {
    if !smearing_jm_threshold(l1, l2)? {
        return Err(Error::NotJointlyMeasurable);
    }
    let c = l1.lpm.min(l2.lpm);
    JointObservable::from_witness(
        &coarse_grain(o1, l1),
        &coarse_grain(o2, l2),
        &BlochOperator::new(2.0 * c, Vec3::zeros()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effect::UnitVector3;
    use crate::measures::distance;
    use proptest::prelude::*;

    fn sm(lpp: f64, lpm: f64) -> StochasticMatrix2 {
        StochasticMatrix2::new(lpp, lpm).unwrap()
    }

    #[test]
    fn coarse_grain_examples() {
        let o = SimpleObservable::from_coords(0.8, Vec3::new(0.1, 0.5, 0.0)).unwrap();
        assert_eq!(coarse_grain(&o, &StochasticMatrix2::identity()), o);

        let sharp = SimpleObservable::sharp(&UnitVector3::z());
        let c = coarse_grain(&sharp, &sm(2.0 / 3.0, 1.0 / 3.0));
        assert!((distance(&c, &sharp) - 1.0 / 3.0).abs() < 1e-15);

        let c = coarse_grain(&sharp, &sm(0.5, 0.5));
        assert!((c.alpha() - 1.0).abs() < 1e-15 && c.a() == Vec3::zeros());
    }

    #[test]
    fn threshold_examples() {
        assert!(smearing_jm_threshold(&sm(2.0 / 3.0, 1.0 / 3.0), &sm(2.0 / 3.0, 1.0 / 3.0)).unwrap());
        assert!(!smearing_jm_threshold(&sm(1.0, 0.0), &sm(1.0, 0.0)).unwrap());
        assert!(!smearing_jm_threshold(&sm(0.9, 0.5), &sm(0.6, 0.1)).unwrap());
        assert_eq!(
            smearing_jm_threshold(&sm(0.2, 0.5), &sm(0.6, 0.1)),
            Err(Error::OrderingViolated)
        );
    }

    #[test]
    fn rejects_non_stochastic_entries() {
        assert!(StochasticMatrix2::new(1.1, 0.0).is_err());
        assert!(StochasticMatrix2::new(0.5, -0.1).is_err());
    }

    fn unit() -> impl Strategy<Value = UnitVector3> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-4)
            .prop_map(|(x, y, z)| UnitVector3::new_normalize(Vec3::new(x, y, z)).unwrap())
    }

    proptest! {
        #[test]
        fn sharp_distance_after_smearing(u in unit(), lpp in 0.0..1.0f64, lpm in 0.0..1.0f64) {
            let o = SimpleObservable::sharp(&u);
            let d = distance(&coarse_grain(&o, &sm(lpp, lpm)), &o);
            prop_assert!((d - (1.0 - lpp).max(lpm)).abs() < 1e-12);
        }

        #[test]
        fn threshold_yields_joint_observable(
            u in unit(), w in unit(), l1 in 0.0..1.0f64, m1 in 0.0..1.0f64,
            l2 in 0.0..1.0f64, m2 in 0.0..1.0f64
        ) {
            let (a, b) = (sm(l1.max(m1), l1.min(m1)), sm(l2.max(m2), l2.min(m2)));
            if smearing_jm_threshold(&a, &b).unwrap() {
                let (o1, o2) = (SimpleObservable::sharp(&u), SimpleObservable::sharp(&w));
                let g = smeared_joint(&o1, &o2, &a, &b).unwrap();
                prop_assert!(g.marginal_residual(&coarse_grain(&o1, &a), &coarse_grain(&o2, &b)) < 1e-12);
            }
        }
    }
}
