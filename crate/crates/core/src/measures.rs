//! Sharpness, unsharpness and the distance between simple observables.

use serde::{Deserialize, Serialize};

use crate::effect::{Effect, SimpleObservable, UnitVector3};
use crate::error::Result;

/// Spectral widths of an effect `A` and of `AA′ = A(I − A)`, together with
/// the derived sharpness and unsharpness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    #[serde(rename = "width")]
    pub width_a: f64,
    #[serde(rename = "product_width")]
    pub width_aa: f64,
    pub sharpness: f64,
    pub unsharpness: f64,
}

/// Difference between the largest and smallest eigenvalue, `‖a‖`.
pub fn spectral_width(e: &Effect) -> f64 {
    e.a().norm()
}

/// Spectral width of `A(I − A)`. The two factors commute, so the spectrum is
/// `{λ(1 − λ)}` over the eigenvalues of `A`, whose spread is `‖a‖·|1 − alpha|`.
pub fn product_width(e: &Effect) -> f64 {
    e.a().norm() * (1.0 - e.alpha()).abs()
}

/// Closed form `‖a‖·min{alpha, 2 − alpha}`.
pub fn sharpness_value(o: &SimpleObservable) -> f64 {
    let alpha = o.alpha();
    o.a().norm() * alpha.min(2.0 - alpha)
}

pub fn unsharpness_value(o: &SimpleObservable) -> f64 {
    let s = sharpness_value(o);
    1.0 - s * s
}

pub fn sharpness(o: &SimpleObservable) -> SharpnessReport {
    let s = sharpness_value(o);
    SharpnessReport {
        width_a: spectral_width(&o.plus),
        width_aa: product_width(&o.plus),
        sharpness: s,
        unsharpness: 1.0 - s * s,
    }
}

/// `½‖a − b‖ + ½|alpha − beta|`: the largest difference of outcome
/// probabilities over all states.
pub fn distance(o1: &SimpleObservable, o2: &SimpleObservable) -> f64 {
    0.5 * (o1.a() - o2.a()).norm() + 0.5 * (o1.alpha() - o2.alpha()).abs()
}

/// Distance to the sharp observable `E^{1,u}`.
pub fn distance_to_sharp(o: &SimpleObservable, u: &UnitVector3) -> f64 {
    distance(o, &SimpleObservable::sharp(u))
}

/// The closest sharp observable is the one along `â`; returns the distance
/// `½(1 − ‖a‖) + ½|1 − alpha|` and that axis.
pub fn distance_to_nearest_sharp(o: &SimpleObservable) -> Result<(f64, UnitVector3)> {
    let axis = UnitVector3::new_normalize(o.a())?;
    let d = 0.5 * (1.0 - o.a().norm()) + 0.5 * (1.0 - o.alpha()).abs();
    Ok((d, axis))
}
