//! Unitarily invariant norms as symmetric gauge functions of singular
//! values: the Schatten family (operator, trace, Frobenius, general p)
//! and the Ky Fan family.

use crate::mat::CMat;
use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// A unitarily invariant norm, parsed from a compact grammar:
///
/// * `schatten:p` with p in [1, inf) as a decimal, or `schatten:inf`
/// * `kyfan:k` with k a positive integer
/// * aliases `op` (= `schatten:inf`), `tr` (= `schatten:1`),
///   `fro` (= `schatten:2`)
///
/// `Display` renders the canonical text, aliases included.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    Schatten(f64),
    KyFan(usize),
}

impl NormSpec {
    pub fn operator() -> Self {
        NormSpec::Schatten(f64::INFINITY)
    }

    pub fn trace_norm() -> Self {
        NormSpec::Schatten(1.0)
    }

    pub fn frobenius() -> Self {
        NormSpec::Schatten(2.0)
    }

    /// The default grid exercised by verification suites.
    pub fn default_grid() -> Vec<NormSpec> {
        vec![
            NormSpec::operator(),
            NormSpec::trace_norm(),
            NormSpec::frobenius(),
            NormSpec::Schatten(3.0),
            NormSpec::KyFan(2),
        ]
    }

    /// Applies the gauge function to a descending list of singular
    /// values.
    fn gauge(&self, sv: &[f64]) -> Result<f64> {
        match *self {
            NormSpec::Schatten(p) if p.is_infinite() => {
                Ok(sv.first().copied().unwrap_or(0.0))
            }
            NormSpec::Schatten(p) => {
                let sum: f64 = sv.iter().map(|s| s.powf(p)).sum();
                Ok(sum.powf(1.0 / p))
            }
            NormSpec::KyFan(k) => {
                if k == 0 || k > sv.len() {
                    return Err(Error::InvalidInput(format!(
                        "kyfan:{k} undefined for dimension {}",
                        sv.len()
                    )));
                }
                Ok(sv[..k].iter().sum())
            }
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "op" => return Ok(NormSpec::operator()),
            "tr" => return Ok(NormSpec::trace_norm()),
            "fro" => return Ok(NormSpec::frobenius()),
            _ => {}
        }
        if let Some(arg) = s.strip_prefix("schatten:") {
            if arg == "inf" {
                return Ok(NormSpec::operator());
            }
            let p: f64 = arg
                .parse()
                .map_err(|_| Error::Parse(format!("bad Schatten exponent {arg:?}")))?;
            if !p.is_finite() || p < 1.0 {
                return Err(Error::Parse(format!(
                    "Schatten exponent must be in [1, inf), got {arg:?}"
                )));
            }
            return Ok(NormSpec::Schatten(p));
        }
        if let Some(arg) = s.strip_prefix("kyfan:") {
            let k: usize = arg
                .parse()
                .map_err(|_| Error::Parse(format!("bad Ky Fan index {arg:?}")))?;
            if k == 0 {
                return Err(Error::Parse("Ky Fan index must be positive".into()));
            }
            return Ok(NormSpec::KyFan(k));
        }
        Err(Error::Parse(format!("unrecognized norm {s:?}")))
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NormSpec::Schatten(p) if p.is_infinite() => write!(f, "op"),
            NormSpec::Schatten(1.0) => write!(f, "tr"),
            NormSpec::Schatten(2.0) => write!(f, "fro"),
            NormSpec::Schatten(p) => write!(f, "schatten:{p}"),
            NormSpec::KyFan(k) => write!(f, "kyfan:{k}"),
        }
    }
}

/// The norm of `a` under `spec`, computed through singular values.
pub fn ui_norm(a: &CMat, spec: &NormSpec) -> Result<f64> {
    spec.gauge(&a.singular_values()?)
}

/// Norm of diag(1, -1, 0, ..., 0) in dimension n: the scale constant
/// relating commutator norms to the closed forms in [`crate::measures`].
/// Computed, never tabulated, so any gauge function stays consistent.
pub fn norm_constant(spec: &NormSpec, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "norm constant needs dimension >= 2, got {n}"
        )));
    }
    let mut entries = vec![crate::C64::new(0.0, 0.0); n];
    entries[0] = crate::C64::new(1.0, 0.0);
    entries[1] = crate::C64::new(-1.0, 0.0);
    ui_norm(&CMat::diag(&entries), spec)
}
