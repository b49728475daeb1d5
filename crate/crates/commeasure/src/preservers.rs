//! Canonical forms of maps preserving commutator measures.
//!
//! Four families are covered, each applied as an executable transform:
//!
//! * [`SelfAdjointPreserver`]: A -> sign * S(A) + tr(F A) I on
//!   Hermitians, with S a symmetry and F a Hermitian representer.
//! * [`ProjectionPreserver`]: P -> S(P) or S(P_perp), the complement
//!   chosen pointwise by a [`ChoiceRule`] (dimension 2).
//! * [`UnitaryPreserver`]: V -> tau(V) * S(V) or tau(V) * S(V*), with a
//!   unimodular phase function tau.
//! * [`DensityPreserver`]: A -> S(A) or (2/n) I - S(A).
//!
//! A [`Symmetry`] is a unitary with a linearity flag; the conjugate
//! flag models antiunitary conjugation, acting on matrices as
//! U conj(A) U*.
//!
//! Dimension 2 carries a gauge subtlety this module owns: the adjugate
//! identity sy conj(P) sy = I - P makes the conjugate symmetry with
//! U = sy act as the global orthocomplement on rank-one projections.
//! Every bit-carrying projection preserver therefore has exactly two
//! representations, (U, linear, bits) and (U sy, conjugate, flipped
//! bits), and the analogous pairing for Hermitian preservers flips sign
//! and flag together while shifting F by sign * I. The `canonical`
//! methods pick a fixed representative so recovered and generated maps
//! can be compared field by field.

use crate::mat::{CMat, C64};
use crate::measures::{Density, Projection};
use crate::{tol, Error, Result};
use std::collections::BTreeMap;

/// Grid step for quantized rule keys.
pub const QUANT_STEP: f64 = 1e-6;

/// Domain separators keeping seeded rules in different slots
/// uncorrelated even under equal seeds.
const DOMAIN_CHOICE: u64 = 1;
const DOMAIN_BRANCH: u64 = 2;
const DOMAIN_PHASE: u64 = 3;

/// Whether a symmetry acts linearly or conjugate-linearly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearityFlag {
    Linear,
    Conjugate,
}

impl LinearityFlag {
    pub fn flipped(self) -> Self {
        match self {
            LinearityFlag::Linear => LinearityFlag::Conjugate,
            LinearityFlag::Conjugate => LinearityFlag::Linear,
        }
    }
}

/// Sign of the leading term of a Hermitian preserver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Unitary-or-antiunitary conjugation: A -> U A U* when linear,
/// A -> U conj(A) U* when conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct Symmetry {
    u: CMat,
    flag: LinearityFlag,
}

impl Symmetry {
    /// The unitary must have defect at most 1e-8.
    pub fn new(u: CMat, flag: LinearityFlag) -> Result<Self> {
        if !u.is_unitary(tol::UNITARY_IN) {
            return Err(Error::NotUnitary(format!(
                "symmetry matrix defect {:.3e}",
                u.unitary_defect()
            )));
        }
        Ok(Symmetry { u, flag })
    }

    pub fn identity(n: usize) -> Self {
        Symmetry { u: CMat::identity(n), flag: LinearityFlag::Linear }
    }

    pub fn u(&self) -> &CMat {
        &self.u
    }

    pub fn flag(&self) -> LinearityFlag {
        self.flag
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn apply(&self, a: &CMat) -> Result<CMat> {
        apply_symmetry(self, a)
    }
}

/// Applies a symmetry to a matrix of matching dimension.
pub fn apply_symmetry(s: &Symmetry, a: &CMat) -> Result<CMat> {
    if a.dim() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "symmetry of dimension {}, operand of dimension {}",
            s.dim(),
            a.dim()
        )));
    }
    let core = match s.flag {
        LinearityFlag::Linear => a.clone(),
        LinearityFlag::Conjugate => a.entrywise_conj(),
    };
    s.u.matmul(&core)?.matmul(&s.u.adjoint())
}

/// Key identifying a matrix (or a dim-2 projection through its Bloch
/// vector) on a 1e-6 grid; the basis for table and seeded rules.
pub type QuantKey = Vec<i64>;

fn quantize(x: f64) -> i64 {
    (x / QUANT_STEP).round() as i64
}

/// Bloch-vector key of a dim-2 projection.
pub fn quant_key_projection(p: &Projection) -> Result<QuantKey> {
    let n = crate::ensembles::bloch_from_projection(p)?;
    Ok(n.iter().map(|&x| quantize(x)).collect())
}

/// Entrywise key of an arbitrary matrix.
pub fn quant_key_matrix(m: &CMat) -> QuantKey {
    let n = m.dim();
    let mut key = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let z = m.at(i, j);
            key.push(quantize(z.re));
            key.push(quantize(z.im));
        }
    }
    key
}

fn key_hash(seed: u64, domain: u64, key: &QuantKey) -> u64 {
    let mut h = crate::ensembles::derive_seed(seed, domain);
    for &k in key {
        h = crate::ensembles::derive_seed(h, k as u64);
    }
    h
}

/// Deterministic bit-valued function of a quantized key.
#[derive(Clone, Debug, PartialEq)]
pub enum ChoiceRule {
    /// The same bit everywhere.
    Const(bool),
    /// Explicit table; querying a missing key is an error, never a guess.
    Table(BTreeMap<QuantKey, bool>),
    /// Pseudorandom but reproducible bit derived from the key.
    Seeded(u64),
}

impl ChoiceRule {
    fn bit(&self, domain: u64, key: &QuantKey) -> Result<bool> {
        match self {
            ChoiceRule::Const(b) => Ok(*b),
            ChoiceRule::Table(t) => t.get(key).copied().ok_or_else(|| {
                Error::InvalidInput(format!("choice table has no entry for key {key:?}"))
            }),
            ChoiceRule::Seeded(s) => Ok(key_hash(*s, domain, key) & 1 == 1),
        }
    }
}

/// Deterministic unimodular-valued function of a quantized key.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseRule {
    Const(C64),
    Table(BTreeMap<QuantKey, C64>),
    Seeded(u64),
}

impl PhaseRule {
    fn phase(&self, key: &QuantKey) -> Result<C64> {
        let z = match self {
            PhaseRule::Const(z) => *z,
            PhaseRule::Table(t) => *t.get(key).ok_or_else(|| {
                Error::InvalidInput(format!("phase table has no entry for key {key:?}"))
            })?,
            PhaseRule::Seeded(s) => {
                let h = key_hash(*s, DOMAIN_PHASE, key);
                let theta = (h >> 11) as f64 / (1u64 << 53) as f64
                    * std::f64::consts::TAU;
                C64::new(theta.cos(), theta.sin())
            }
        };
        if (z.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "phase value {z} is not unimodular"
            )));
        }
        Ok(z)
    }
}

fn sigma_y() -> CMat {
    crate::ensembles::pauli_y()
}

/// Multiplies a matrix by the global phase making the first
/// significant entry of its first column real positive: the shared
/// convention for comparing and serializing recovered unitaries.
pub fn phase_normalized(u: &CMat) -> CMat {
    // Unitary columns always have an entry above the threshold.
    let n = u.dim();
    let mut first_col: Vec<C64> = (0..n).map(|i| u.at(i, 0)).collect();
    let before = first_col.clone();
    crate::mat::phase_normalize(&mut first_col, 1e-8);
    let phase = first_col
        .iter()
        .zip(&before)
        .find(|(_, b)| b.norm() > 1e-8)
        .map(|(a, b)| a / b)
        .unwrap_or(C64::new(1.0, 0.0));
    u.scale(phase)
}

/// A -> sign * S(A) + tr(F A) I on Hermitian matrices.
#[derive(Clone, Debug)]
pub struct SelfAdjointPreserver {
    sym: Symmetry,
    sign: Sign,
    representer: CMat,
}

impl SelfAdjointPreserver {
    /// `representer` must be Hermitian and match the symmetry dimension.
    pub fn new(sym: Symmetry, sign: Sign, representer: CMat) -> Result<Self> {
        if representer.dim() != sym.dim() {
            return Err(Error::DimensionMismatch(format!(
                "representer of dimension {}, symmetry of dimension {}",
                representer.dim(),
                sym.dim()
            )));
        }
        if !representer.is_hermitian(tol::STRUCT) {
            return Err(Error::NotHermitian(format!(
                "representer defect {:.3e}",
                representer.herm_defect()
            )));
        }
        Ok(SelfAdjointPreserver { sym, sign, representer })
    }

    pub fn sym(&self) -> &Symmetry {
        &self.sym
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn representer(&self) -> &CMat {
        &self.representer
    }

    /// The additive part tr(F A), real for Hermitian input.
    pub fn functional(&self, a: &CMat) -> Result<f64> {
        Ok(self.representer.matmul(a)?.trace().re)
    }

    pub fn apply(&self, a: &CMat) -> Result<CMat> {
        if !a.is_hermitian(tol::UNITARY_IN) {
            return Err(Error::NotHermitian(format!(
                "operand defect {:.3e}",
                a.herm_defect()
            )));
        }
        let f = self.functional(a)?;
        let core = apply_symmetry(&self.sym, a)?.scale(C64::new(self.sign.as_f64(), 0.0));
        core.add(&CMat::identity(a.dim()).scale(C64::new(f, 0.0)))
    }

    /// The equivalent dim-2 representation with opposite sign and flag:
    /// (sign, U, flag, F) -> (-sign, U sy, flag', F + sign I).
    pub fn gauge_partner(&self) -> Result<Self> {
        if self.sym.dim() != 2 {
            return Err(Error::DimensionMismatch(
                "gauge pairing exists only in dimension 2".into(),
            ));
        }
        let u = self.sym.u.matmul(&sigma_y())?;
        let f = self
            .representer
            .add(&CMat::identity(2).scale(C64::new(self.sign.as_f64(), 0.0)))?;
        SelfAdjointPreserver::new(
            Symmetry::new(u, self.sym.flag.flipped())?,
            self.sign.flipped(),
            f,
        )
    }

    /// Canonical representative: in dimension 2 the gauge partner with
    /// the smaller |tr F| (ties broken toward sign +), the unitary
    /// phase-normalized; unchanged in other dimensions apart from the
    /// phase normalization.
    pub fn canonical(&self) -> Result<Self> {
        let chosen = if self.sym.dim() == 2 {
            let partner = self.gauge_partner()?;
            let tr_self = self.representer.trace().re.abs();
            let tr_partner = partner.representer.trace().re.abs();
            if (tr_self - tr_partner).abs() <= 1e-9 {
                if self.sign == Sign::Plus {
                    self.clone()
                } else {
                    partner
                }
            } else if tr_self < tr_partner {
                self.clone()
            } else {
                partner
            }
        } else {
            self.clone()
        };
        let u = phase_normalized(&chosen.sym.u);
        SelfAdjointPreserver::new(
            Symmetry::new(u, chosen.sym.flag)?,
            chosen.sign,
            chosen.representer,
        )
    }
}

/// P -> S(P) or S(P_perp) on dim-2 rank-one projections, the complement
/// bit chosen pointwise.
#[derive(Clone, Debug)]
pub struct ProjectionPreserver {
    sym: Symmetry,
    choice: ChoiceRule,
}

impl ProjectionPreserver {
    pub fn new(sym: Symmetry, choice: ChoiceRule) -> Result<Self> {
        if sym.dim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "projection preservers act in dimension 2, got {}",
                sym.dim()
            )));
        }
        Ok(ProjectionPreserver { sym, choice })
    }

    /// Locally measure-preserving map: identity symmetry, bits only.
    pub fn lpm(choice: ChoiceRule) -> Self {
        ProjectionPreserver { sym: Symmetry::identity(2), choice }
    }

    pub fn sym(&self) -> &Symmetry {
        &self.sym
    }

    pub fn choice(&self) -> &ChoiceRule {
        &self.choice
    }

    /// The complement bit this preserver assigns to `p`.
    pub fn bit_for(&self, p: &Projection) -> Result<bool> {
        self.choice.bit(DOMAIN_CHOICE, &quant_key_projection(p)?)
    }

    pub fn apply(&self, p: &Projection) -> Result<Projection> {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "projection of dimension {}, expected 2",
                p.dim()
            )));
        }
        let q = if self.bit_for(p)? { orthocomplement(p)? } else { p.clone() };
        Projection::new(apply_symmetry(&self.sym, q.matrix())?)
    }

    /// Canonical (linear) gauge of the symmetry: returns the unitary of
    /// the proper representative, phase-normalized, together with a flag
    /// that is true when the canonical per-point bits are the stored
    /// rule's bits negated.
    pub fn canonical_symmetry(&self) -> Result<(CMat, bool)> {
        match self.sym.flag {
            LinearityFlag::Linear => Ok((phase_normalized(&self.sym.u), false)),
            LinearityFlag::Conjugate => {
                Ok((phase_normalized(&self.sym.u.matmul(&sigma_y())?), true))
            }
        }
    }

    /// Bit of the canonical representation at `p`.
    pub fn canonical_bit_for(&self, p: &Projection) -> Result<bool> {
        let (_, flip) = self.canonical_symmetry()?;
        Ok(self.bit_for(p)? != flip)
    }
}

/// V -> tau(V) S(V) or tau(V) S(V*) on unitaries.
///
/// Pointwise branch bits are accepted, but only a constant branch
/// preserves commutator measures of pairs; generators emit constants.
#[derive(Clone, Debug)]
pub struct UnitaryPreserver {
    sym: Symmetry,
    phase: PhaseRule,
    branch: ChoiceRule,
}

impl UnitaryPreserver {
    pub fn new(sym: Symmetry, phase: PhaseRule, branch: ChoiceRule) -> Self {
        UnitaryPreserver { sym, phase, branch }
    }

    pub fn sym(&self) -> &Symmetry {
        &self.sym
    }

    pub fn phase_rule(&self) -> &PhaseRule {
        &self.phase
    }

    pub fn branch_rule(&self) -> &ChoiceRule {
        &self.branch
    }

    pub fn apply(&self, v: &CMat) -> Result<CMat> {
        if !v.is_unitary(tol::UNITARY_IN) {
            return Err(Error::NotUnitary(format!(
                "operand defect {:.3e}",
                v.unitary_defect()
            )));
        }
        let key = quant_key_matrix(v);
        let tau = self.phase.phase(&key)?;
        let branch_adjoint = self.branch.bit(DOMAIN_BRANCH, &key)?;
        let w = if branch_adjoint { v.adjoint() } else { v.clone() };
        let out = apply_symmetry(&self.sym, &w)?.scale(tau);
        if !out.is_unitary(tol::UNITARY_IN) {
            return Err(Error::Inconsistency(format!(
                "image defect {:.3e} for a unitary input",
                out.unitary_defect()
            )));
        }
        Ok(out)
    }
}

/// A -> S(A) or (2/n) I - S(A) on density operators.
#[derive(Clone, Debug)]
pub struct DensityPreserver {
    sym: Symmetry,
    branch: ChoiceRule,
}

impl DensityPreserver {
    pub fn new(sym: Symmetry, branch: ChoiceRule) -> Self {
        DensityPreserver { sym, branch }
    }

    pub fn sym(&self) -> &Symmetry {
        &self.sym
    }

    pub fn branch_rule(&self) -> &ChoiceRule {
        &self.branch
    }

    /// Applies the map. The complement branch keeps trace and
    /// Hermiticity in any dimension but can violate positivity for
    /// n > 2; that surfaces as a `NotDensity` error naming the
    /// offending eigenvalue.
    pub fn apply(&self, a: &Density) -> Result<Density> {
        let key = quant_key_matrix(a.matrix());
        let complement = self.branch.bit(DOMAIN_BRANCH, &key)?;
        let s = apply_symmetry(&self.sym, a.matrix())?;
        let out = if complement {
            let n = a.dim() as f64;
            CMat::identity(a.dim())
                .scale(C64::new(2.0 / n, 0.0))
                .sub(&s)?
        } else {
            s
        };
        Density::new(out)
    }
}

/// I - P for a dim-2 rank-one projection.
pub fn orthocomplement(p: &Projection) -> Result<Projection> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "orthocomplement of a rank-one projection is rank-one only in \
             dimension 2, got {}",
            p.dim()
        )));
    }
    Projection::new(CMat::identity(2).sub(p.matrix())?)
}

/// xi (2P - I): the trace-zero unitary family attached to a dim-2
/// projection; xi must be unimodular.
pub fn trace_zero_unitary(p: &Projection, xi: C64) -> Result<CMat> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "trace-zero unitaries live in dimension 2, got {}",
            p.dim()
        )));
    }
    if (xi.norm() - 1.0).abs() > tol::ABS {
        return Err(Error::InvalidInput(format!(
            "xi must be unimodular, |xi| = {}",
            xi.norm()
        )));
    }
    p.matrix()
        .scale(C64::new(2.0, 0.0))
        .sub(&CMat::identity(2))
        .map(|m| m.scale(xi))
}
