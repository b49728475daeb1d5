//! The commutator measure and its closed forms.
//!
//! The central quantity is the norm of a commutator, `|||[A, B]|||`,
//! under a unitarily invariant norm. For structured operands this
//! collapses to closed expressions, each scaled by the constant
//! [`crate::norms::norm_constant`]:
//!
//! * two Hermitian 2x2 operands: c * sqrt(det [A, B])
//! * a density operator against a rank-one projection x x*:
//!   c * sqrt(<A^2 x, x> - <A x, x>^2)
//! * a unitary against a rank-one projection: c * sqrt(1 - |<V x, x>|^2)
//! * two rank-one projections: c * sqrt(t - t^2) with t = tr(P Q)
//!
//! `star_property_check` tests the overlap condition that characterizes
//! maps preserving the projection-pair measure: every output overlap
//! must equal the input overlap or its complement to 1.

use crate::mat::{inner, CMat, UnitVec, C64};
use crate::norms::{norm_constant, ui_norm, NormSpec};
use crate::{tol, Error, Result};

/// Tolerance for the overlap condition in [`star_property_check`].
pub const STAR_TOL: f64 = 1e-8;

/// Rank-one orthogonal projection, validated on construction:
/// Hermitian, idempotent within 1e-10 (Frobenius), trace 1 within 1e-10.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    mat: CMat,
}

impl Projection {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_hermitian(tol::STRUCT) {
            return Err(Error::NotProjection(format!(
                "Hermitian defect {:.3e}",
                mat.herm_defect()
            )));
        }
        let idem = mat
            .matmul(&mat)
            .expect("square")
            .sub(&mat)
            .expect("square")
            .frobenius_norm();
        if idem > tol::STRUCT {
            return Err(Error::NotProjection(format!("idempotency defect {idem:.3e}")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol::STRUCT || tr.im.abs() > tol::STRUCT {
            return Err(Error::NotProjection(format!(
                "trace {tr} differs from 1, so the rank is not one"
            )));
        }
        Ok(Projection { mat })
    }

    pub fn from_unit_vector(x: &UnitVec) -> Self {
        Projection { mat: x.projector() }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// A unit vector spanning the range, phase-normalized.
    pub fn range_vector(&self) -> Result<UnitVec> {
        let eig = self.mat.herm_eigen()?;
        UnitVec::normalized(eig.vector(0))
    }
}

/// Density operator: Hermitian, trace 1 within 1e-10, eigenvalues
/// >= -1e-10.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    mat: CMat,
}

impl Density {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_hermitian(tol::STRUCT) {
            return Err(Error::NotDensity(format!(
                "Hermitian defect {:.3e}",
                mat.herm_defect()
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol::STRUCT || tr.im.abs() > tol::STRUCT {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let eig = mat.herm_eigen()?;
        if let Some(&lmin) = eig.values.last() {
            if lmin < -tol::STRUCT {
                return Err(Error::NotDensity(format!(
                    "negative eigenvalue {lmin:.3e}"
                )));
            }
        }
        Ok(Density { mat })
    }

    pub fn from_projection(p: &Projection) -> Self {
        Density { mat: p.matrix().clone() }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }
}

/// |||[A, B]||| under the given norm. Operands must share a dimension;
/// no further structure is assumed.
pub fn comm_measure(a: &CMat, b: &CMat, spec: &NormSpec) -> Result<f64> {
    ui_norm(&a.commutator(b)?, spec)
}

/// Closed form for two Hermitian 2x2 operands:
/// c * sqrt(det [A, B]).
///
/// The commutator of Hermitians is skew-Hermitian and traceless, so in
/// dimension 2 its determinant is real and nonnegative; both facts are
/// asserted (imaginary part within 1e-10, real part >= -1e-10, clamped).
pub fn det_formula_2d(a: &CMat, b: &CMat, spec: &NormSpec) -> Result<f64> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "closed determinant form is 2x2 only, got {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    for (name, m) in [("first", a), ("second", b)] {
        if !m.is_hermitian(tol::STRUCT) {
            return Err(Error::NotHermitian(format!(
                "{name} operand, defect {:.3e}",
                m.herm_defect()
            )));
        }
    }
    let d = a.commutator(b)?.det();
    let scale = (a.frobenius_norm() * b.frobenius_norm()).powi(2).max(1.0);
    if d.im.abs() > tol::STRUCT * scale || d.re < -tol::STRUCT * scale {
        return Err(Error::Inconsistency(format!(
            "commutator determinant {d} should be real and nonnegative"
        )));
    }
    Ok(norm_constant(spec, 2)? * d.re.max(0.0).sqrt())
}

/// Overlap tr(P Q) of two projections; real in [0, 1] up to round-off.
pub fn overlap(p: &Projection, q: &Projection) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "projections of dimension {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let t = p.matrix().matmul(q.matrix())?.trace();
    if t.im.abs() > tol::STRUCT || t.re < -tol::STRUCT || t.re > 1.0 + tol::STRUCT {
        return Err(Error::Inconsistency(format!(
            "projection overlap {t} outside [0, 1]"
        )));
    }
    Ok(t.re.clamp(0.0, 1.0))
}

/// Closed form for two rank-one projections:
/// c * sqrt(t - t^2) with t = tr(P Q).
pub fn proj_pair_measure(p: &Projection, q: &Projection, spec: &NormSpec) -> Result<f64> {
    let t = overlap(p, q)?;
    Ok(norm_constant(spec, p.dim())? * (t - t * t).max(0.0).sqrt())
}

/// Closed form for a density operator against the projection onto x:
/// c * sqrt(<A^2 x, x> - <A x, x>^2).
pub fn density_proj_measure(a: &Density, x: &UnitVec, spec: &NormSpec) -> Result<f64> {
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "density of dimension {}, vector of dimension {}",
            a.dim(),
            x.dim()
        )));
    }
    let ax = a.matrix().matvec(x.coords())?;
    let mean = inner(&ax, x.coords());
    if mean.im.abs() > tol::STRUCT {
        return Err(Error::Inconsistency(format!(
            "first moment of a Hermitian operator came out complex: {mean}"
        )));
    }
    // Centered form ||(A - mean) x||^2 of the variance: nonnegative by
    // construction, no cancellation where the variance vanishes.
    let centered: Vec<C64> = ax
        .iter()
        .zip(x.coords())
        .map(|(axi, xi)| axi - xi * mean.re)
        .collect();
    let var = inner(&centered, &centered).re;
    Ok(norm_constant(spec, a.dim())? * var.sqrt())
}

/// Closed form for a unitary against the projection onto x:
/// c * sqrt(1 - |<V x, x>|^2).
pub fn unitary_proj_measure(v: &CMat, x: &UnitVec, spec: &NormSpec) -> Result<f64> {
    if v.dim() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "unitary of dimension {}, vector of dimension {}",
            v.dim(),
            x.dim()
        )));
    }
    if !v.is_unitary(tol::UNITARY_IN) {
        return Err(Error::NotUnitary(format!(
            "defect {:.3e} exceeds {:.0e}",
            v.unitary_defect(),
            tol::UNITARY_IN
        )));
    }
    let vx = v.matvec(x.coords())?;
    let m = inner(&vx, x.coords()).norm_sqr();
    Ok(norm_constant(spec, v.dim())? * (1.0 - m).max(0.0).sqrt())
}

/// One observation for [`star_property_check`]: a pair of input
/// projections and the corresponding pair of images.
#[derive(Clone, Debug)]
pub struct StarPair {
    pub input: (Projection, Projection),
    pub output: (Projection, Projection),
}

/// Outcome of the overlap condition over a batch of pairs.
///
/// `failures` lists offending pair indices in input order regardless of
/// how the batch was scheduled; `worst_deviation` is the largest
/// distance from the allowed overlap set across all pairs.
#[derive(Clone, Debug)]
pub struct StarReport {
    pub pass: bool,
    pub worst_deviation: f64,
    pub worst_index: Option<usize>,
    pub failures: Vec<usize>,
}

/// Checks that every output overlap equals the input overlap or its
/// complement to 1, within [`STAR_TOL`].
pub fn star_property_check(pairs: &[StarPair]) -> Result<StarReport> {
    let deviations: Vec<f64> = crate::exec::map_indexed(pairs.len(), |i| {
        let pair = &pairs[i];
        let t_in = overlap(&pair.input.0, &pair.input.1)?;
        let t_out = overlap(&pair.output.0, &pair.output.1)?;
        Ok((t_out - t_in).abs().min((t_out - (1.0 - t_in)).abs()))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut report = StarReport {
        pass: true,
        worst_deviation: 0.0,
        worst_index: None,
        failures: Vec::new(),
    };
    for (i, &d) in deviations.iter().enumerate() {
        if d > report.worst_deviation {
            report.worst_deviation = d;
            report.worst_index = Some(i);
        }
        if d > STAR_TOL {
            report.pass = false;
            report.failures.push(i);
        }
    }
    Ok(report)
}
