//! Parsing of observables, vectors and angles given on the command line.

use std::fmt;
use std::fs;

use anyhow::Context;
use coexist_core::{Effect, JointObservable, SimpleObservable, Vec3};
use serde::de::DeserializeOwned;

/// An input problem reported with exit status 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn json_arg<T: DeserializeOwned>(flag: &str, arg: &str) -> anyhow::Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        match fs::read_to_string(arg).with_context(|| format!("reading {flag} from {arg}")) {
            Ok(t) => t,
            Err(e) => return usage(format!("{e:#}")),
        }
    };
    match serde_json::from_str(&text) {
        Ok(v) => Ok(v),
        Err(e) => usage(format!("{flag}: {e}")),
    }
}

/// An observable given by its "+" effect `{"alpha": .., "a": [x, y, z]}`.
pub fn observable(flag: &str, arg: &str) -> anyhow::Result<SimpleObservable> {
    json_arg::<Effect>(flag, arg).map(SimpleObservable::new)
}

pub fn joint(flag: &str, arg: &str) -> anyhow::Result<JointObservable> {
    let g: JointObservable = json_arg(flag, arg)?;
    // Deserialization validates each component; the sum is checked here.
    match JointObservable::new(g.gpp, g.gpm, g.gmp, g.gmm) {
        Ok(g) => Ok(g),
        Err(e) => usage(format!("{flag}: {e}")),
    }
}

/// `x,y,z` as a vector of norm at most 1.
pub fn bloch_vector(flag: &str, v: &[f64; 3]) -> anyhow::Result<Vec3> {
    let v = Vec3::from(*v);
    if !v.iter().all(|x| x.is_finite()) || v.norm() > 1.0 + 1e-12 {
        return usage(format!("{flag}: Bloch vector must have norm at most 1, got {}", v.norm()));
    }
    Ok(v)
}

/// clap value parser for `x,y,z`.
pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("not a number: {p:?}"))?;
    }
    Ok(out)
}

/// clap value parser for angles. Only plain numbers (radians) are accepted.
pub fn parse_radians(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if t.ends_with('°') || t.to_ascii_lowercase().ends_with("deg") {
        return Err("angles are given in radians; degree units are not accepted".into());
    }
    t.parse().map_err(|_| format!("not a number: {t:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples() {
        assert_eq!(parse_triple("0.5, 0,-1"), Ok([0.5, 0.0, -1.0]));
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,x,2").is_err());
    }

    #[test]
    fn radians_only() {
        assert_eq!(parse_radians("1.25"), Ok(1.25));
        assert!(parse_radians("90deg").is_err());
        assert!(parse_radians("90°").is_err());
    }

    #[test]
    fn inline_observables() {
        let o = observable("--o1", r#"{"alpha":1,"a":[0.5,0,0]}"#).unwrap();
        assert_eq!(o.a(), Vec3::new(0.5, 0.0, 0.0));
        let err = observable("--o1", r#"{"alpha":0.2,"a":[0.5,0,0]}"#).unwrap_err();
        assert!(err.is::<UsageError>());
        let err = observable("--o1", "/nonexistent/file.json").unwrap_err();
        assert!(err.is::<UsageError>());
    }
}
