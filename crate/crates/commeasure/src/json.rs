//! JSON wire formats.
//!
//! All serialization lives here so the rest of the library stays
//! wire-agnostic. Matrices travel as `{"dim": n, "re": [[..]],
//! "im": [[..]]}` with row-major arrays. Preserver specifications are
//! tagged by the catalog kinds `thm1` .. `thm4` and `lpm`; probe sets
//! and reconstruction results mirror the corresponding domain types
//! field by field. Readers validate domain invariants on conversion,
//! so a parsed object is always a constructed domain value, never raw
//! data.

use crate::mat::{CMat, UnitVec, C64};
use crate::preservers::{
    ChoiceRule, DensityPreserver, LinearityFlag, PhaseRule, ProjectionPreserver,
    SelfAdjointPreserver, Sign, Symmetry, UnitaryPreserver,
};
use crate::reconstruct::{
    Extras, McViolation, PairVerdict, ProbeKind, ProbeSet, ReconstructionResult,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Row-major dense matrix: real and imaginary parts as n x n arrays.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixDto {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDto {
    pub fn from_matrix(m: &CMat) -> Self {
        let n = m.dim();
        let grab = |part: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| part(m.at(i, j))).collect())
                .collect()
        };
        MatrixDto { dim: n, re: grab(|z| z.re), im: grab(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::InvalidInput("matrix dimension 0".into()));
        }
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != n || part.iter().any(|row| row.len() != n) {
                return Err(Error::Parse(format!(
                    "matrix field \"{name}\" is not a {n}x{n} array"
                )));
            }
            if part.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Parse(format!(
                    "matrix field \"{name}\" contains a non-finite entry"
                )));
            }
        }
        Ok(CMat::from_fn(n, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }
}

use crate::{Error, Result};

/// A single complex scalar.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComplexDto {
    pub re: f64,
    pub im: f64,
}

impl ComplexDto {
    pub fn from_c(z: C64) -> Self {
        ComplexDto { re: z.re, im: z.im }
    }

    pub fn to_c(self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// A complex vector, component arrays in order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VectorDto {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorDto {
    pub fn from_coords(v: &[C64]) -> Self {
        VectorDto {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_coords(&self) -> Result<Vec<C64>> {
        if self.re.len() != self.im.len() {
            return Err(Error::Parse(format!(
                "vector parts have lengths {} and {}",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect())
    }

    pub fn to_unit_vector(&self) -> Result<UnitVec> {
        UnitVec::new(self.to_coords()?)
    }
}

/// Wire token for a linearity flag.
pub fn flag_token(flag: LinearityFlag) -> &'static str {
    match flag {
        LinearityFlag::Linear => "linear",
        LinearityFlag::Conjugate => "conj",
    }
}

/// Parses a linearity flag wire token.
pub fn flag_from_token(token: &str) -> Result<LinearityFlag> {
    match token {
        "linear" => Ok(LinearityFlag::Linear),
        "conj" => Ok(LinearityFlag::Conjugate),
        other => Err(Error::Parse(format!(
            "unknown flag token {other:?}, expected \"linear\" or \"conj\""
        ))),
    }
}

fn sign_token(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn sign_from_token(token: &str) -> Result<Sign> {
    match token {
        "plus" => Ok(Sign::Plus),
        "minus" => Ok(Sign::Minus),
        other => Err(Error::Parse(format!(
            "unknown sign token {other:?}, expected \"plus\" or \"minus\""
        ))),
    }
}

/// One table entry of a bit-valued rule.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BitEntryDto {
    pub key: Vec<i64>,
    pub value: bool,
}

/// Bit-valued pointwise rule on the wire.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RuleDto {
    Const { value: bool },
    Table { entries: Vec<BitEntryDto> },
    Seeded { seed: u64 },
}

impl RuleDto {
    pub fn from_rule(rule: &ChoiceRule) -> Self {
        match rule {
            ChoiceRule::Const(b) => RuleDto::Const { value: *b },
            ChoiceRule::Table(t) => RuleDto::Table {
                entries: t
                    .iter()
                    .map(|(key, &value)| BitEntryDto { key: key.clone(), value })
                    .collect(),
            },
            ChoiceRule::Seeded(s) => RuleDto::Seeded { seed: *s },
        }
    }

    pub fn to_rule(&self) -> ChoiceRule {
        match self {
            RuleDto::Const { value } => ChoiceRule::Const(*value),
            RuleDto::Table { entries } => ChoiceRule::Table(
                entries
                    .iter()
                    .map(|e| (e.key.clone(), e.value))
                    .collect::<BTreeMap<_, _>>(),
            ),
            RuleDto::Seeded { seed } => ChoiceRule::Seeded(*seed),
        }
    }
}

/// One table entry of a phase-valued rule.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PhaseEntryDto {
    pub key: Vec<i64>,
    pub value: ComplexDto,
}

/// Unimodular-valued pointwise rule on the wire.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PhaseRuleDto {
    Const { value: ComplexDto },
    Table { entries: Vec<PhaseEntryDto> },
    Seeded { seed: u64 },
}

impl PhaseRuleDto {
    pub fn from_rule(rule: &PhaseRule) -> Self {
        match rule {
            PhaseRule::Const(z) => PhaseRuleDto::Const { value: ComplexDto::from_c(*z) },
            PhaseRule::Table(t) => PhaseRuleDto::Table {
                entries: t
                    .iter()
                    .map(|(key, &value)| PhaseEntryDto {
                        key: key.clone(),
                        value: ComplexDto::from_c(value),
                    })
                    .collect(),
            },
            PhaseRule::Seeded(s) => PhaseRuleDto::Seeded { seed: *s },
        }
    }

    pub fn to_rule(&self) -> PhaseRule {
        match self {
            PhaseRuleDto::Const { value } => PhaseRule::Const(value.to_c()),
            PhaseRuleDto::Table { entries } => PhaseRule::Table(
                entries
                    .iter()
                    .map(|e| (e.key.clone(), e.value.to_c()))
                    .collect::<BTreeMap<_, _>>(),
            ),
            PhaseRuleDto::Seeded { seed } => PhaseRule::Seeded(*seed),
        }
    }
}

/// Preserver specification on the wire, tagged by catalog kind.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind")]
pub enum PreserverDto {
    /// Signed conjugation plus a functional term on Hermitian matrices.
    #[serde(rename = "thm1")]
    SelfAdjointLinear {
        #[serde(rename = "U")]
        u: MatrixDto,
        flag: String,
        sign: String,
        #[serde(rename = "F")]
        representer: MatrixDto,
    },
    /// Dim-2 projection map: symmetry plus pointwise complement bits.
    #[serde(rename = "thm2")]
    ProjectionChoice {
        #[serde(rename = "U")]
        u: MatrixDto,
        flag: String,
        choice: RuleDto,
    },
    /// Unitary map: symmetry, pointwise phase, adjoint branch.
    #[serde(rename = "thm3")]
    UnitaryConjugation {
        #[serde(rename = "U")]
        u: MatrixDto,
        flag: String,
        phase: PhaseRuleDto,
        branch: RuleDto,
    },
    /// Density map: symmetry plus complement branch.
    #[serde(rename = "thm4")]
    DensityConjugation {
        #[serde(rename = "U")]
        u: MatrixDto,
        flag: String,
        branch: RuleDto,
    },
    /// Identity-symmetry projection map: complement bits only.
    #[serde(rename = "lpm")]
    LocalChoice { choice: RuleDto },
}

/// A constructed preserver of any catalog kind.
#[derive(Clone, Debug)]
pub enum AnyPreserver {
    SelfAdjoint(SelfAdjointPreserver),
    Projection(ProjectionPreserver),
    Unitary(UnitaryPreserver),
    Density(DensityPreserver),
}

impl PreserverDto {
    pub fn from_selfadjoint(p: &SelfAdjointPreserver) -> Self {
        PreserverDto::SelfAdjointLinear {
            u: MatrixDto::from_matrix(p.sym().u()),
            flag: flag_token(p.sym().flag()).into(),
            sign: sign_token(p.sign()).into(),
            representer: MatrixDto::from_matrix(p.representer()),
        }
    }

    pub fn from_projection(p: &ProjectionPreserver) -> Self {
        PreserverDto::ProjectionChoice {
            u: MatrixDto::from_matrix(p.sym().u()),
            flag: flag_token(p.sym().flag()).into(),
            choice: RuleDto::from_rule(p.choice()),
        }
    }

    pub fn from_unitary(p: &UnitaryPreserver) -> Self {
        PreserverDto::UnitaryConjugation {
            u: MatrixDto::from_matrix(p.sym().u()),
            flag: flag_token(p.sym().flag()).into(),
            phase: PhaseRuleDto::from_rule(p.phase_rule()),
            branch: RuleDto::from_rule(p.branch_rule()),
        }
    }

    pub fn from_density(p: &DensityPreserver) -> Self {
        PreserverDto::DensityConjugation {
            u: MatrixDto::from_matrix(p.sym().u()),
            flag: flag_token(p.sym().flag()).into(),
            branch: RuleDto::from_rule(p.branch_rule()),
        }
    }

    pub fn from_local_choice(choice: &ChoiceRule) -> Self {
        PreserverDto::LocalChoice { choice: RuleDto::from_rule(choice) }
    }

    /// Builds the domain preserver, validating symmetry invariants.
    pub fn build(&self) -> Result<AnyPreserver> {
        let sym = |u: &MatrixDto, flag: &str| -> Result<Symmetry> {
            Symmetry::new(u.to_matrix()?, flag_from_token(flag)?)
        };
        match self {
            PreserverDto::SelfAdjointLinear { u, flag, sign, representer } => {
                Ok(AnyPreserver::SelfAdjoint(SelfAdjointPreserver::new(
                    sym(u, flag)?,
                    sign_from_token(sign)?,
                    representer.to_matrix()?,
                )?))
            }
            PreserverDto::ProjectionChoice { u, flag, choice } => Ok(AnyPreserver::Projection(
                ProjectionPreserver::new(sym(u, flag)?, choice.to_rule())?,
            )),
            PreserverDto::UnitaryConjugation { u, flag, phase, branch } => {
                Ok(AnyPreserver::Unitary(UnitaryPreserver::new(
                    sym(u, flag)?,
                    phase.to_rule(),
                    branch.to_rule(),
                )))
            }
            PreserverDto::DensityConjugation { u, flag, branch } => Ok(AnyPreserver::Density(
                DensityPreserver::new(sym(u, flag)?, branch.to_rule()),
            )),
            PreserverDto::LocalChoice { choice } => {
                Ok(AnyPreserver::Projection(ProjectionPreserver::lpm(choice.to_rule())))
            }
        }
    }
}

fn probe_kind_token(kind: ProbeKind) -> &'static str {
    match kind {
        ProbeKind::ProjectionMap => "projection-map",
        ProbeKind::HermitianLinearMap => "hermitian-linear-map",
        ProbeKind::UnitaryPair => "unitary-pair",
    }
}

fn probe_kind_from_token(token: &str) -> Result<ProbeKind> {
    match token {
        "projection-map" => Ok(ProbeKind::ProjectionMap),
        "hermitian-linear-map" => Ok(ProbeKind::HermitianLinearMap),
        "unitary-pair" => Ok(ProbeKind::UnitaryPair),
        other => Err(Error::Parse(format!(
            "unknown probe-set kind {other:?}, expected \"projection-map\", \
             \"hermitian-linear-map\" or \"unitary-pair\""
        ))),
    }
}

/// One input/output sample of a sampled map.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SampleDto {
    #[serde(rename = "in")]
    pub input: MatrixDto,
    #[serde(rename = "out")]
    pub output: MatrixDto,
}

/// Sampled map on the wire.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeSetDto {
    pub kind: String,
    pub dim: usize,
    pub samples: Vec<SampleDto>,
}

impl ProbeSetDto {
    pub fn from_probe_set(set: &ProbeSet) -> Self {
        ProbeSetDto {
            kind: probe_kind_token(set.kind).into(),
            dim: set.dim,
            samples: set
                .samples
                .iter()
                .map(|(input, output)| SampleDto {
                    input: MatrixDto::from_matrix(input),
                    output: MatrixDto::from_matrix(output),
                })
                .collect(),
        }
    }

    /// Converts and validates: the result satisfies the class
    /// invariants of its kind.
    pub fn to_probe_set(&self) -> Result<ProbeSet> {
        let kind = probe_kind_from_token(&self.kind)?;
        let samples = self
            .samples
            .iter()
            .map(|s| Ok((s.input.to_matrix()?, s.output.to_matrix()?)))
            .collect::<Result<Vec<_>>>()?;
        ProbeSet::new(kind, self.dim, samples)
    }
}

/// Reconstruction extras on the wire; the variant is inferred from the
/// fields present.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ExtrasDto {
    Bits { bits: Vec<bool> },
    SelfAdjoint {
        sign: String,
        #[serde(rename = "F")]
        representer: MatrixDto,
    },
    Empty {},
}

/// Reconstruction outcome on the wire.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReconstructionDto {
    #[serde(rename = "U")]
    pub u: MatrixDto,
    pub flag: String,
    pub extras: ExtrasDto,
    pub residual: f64,
    pub margin: f64,
    pub queries: usize,
}

impl ReconstructionDto {
    pub fn from_result(res: &ReconstructionResult) -> Self {
        let extras = match &res.extras {
            Extras::ProjectionBits { bits } => ExtrasDto::Bits { bits: bits.clone() },
            Extras::SelfAdjoint { sign, representer } => ExtrasDto::SelfAdjoint {
                sign: sign_token(*sign).into(),
                representer: MatrixDto::from_matrix(representer),
            },
            Extras::None => ExtrasDto::Empty {},
        };
        ReconstructionDto {
            u: MatrixDto::from_matrix(res.sym.u()),
            flag: flag_token(res.sym.flag()).into(),
            extras,
            residual: res.residual,
            margin: res.margin,
            queries: res.queries,
        }
    }

    pub fn to_result(&self) -> Result<ReconstructionResult> {
        let sym = Symmetry::new(self.u.to_matrix()?, flag_from_token(&self.flag)?)?;
        let extras = match &self.extras {
            ExtrasDto::Bits { bits } => Extras::ProjectionBits { bits: bits.clone() },
            ExtrasDto::SelfAdjoint { sign, representer } => Extras::SelfAdjoint {
                sign: sign_from_token(sign)?,
                representer: representer.to_matrix()?,
            },
            ExtrasDto::Empty {} => Extras::None,
        };
        Ok(ReconstructionResult {
            sym,
            extras,
            residual: self.residual,
            margin: self.margin,
            queries: self.queries,
        })
    }
}

/// Measure-gap witness on the wire.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ViolationDto {
    pub witness: VectorDto,
    pub lhs: f64,
    pub rhs: f64,
}

impl ViolationDto {
    pub fn from_violation(v: &McViolation) -> Self {
        ViolationDto {
            witness: VectorDto::from_coords(v.witness.coords()),
            lhs: v.lhs,
            rhs: v.rhs,
        }
    }
}

/// Unitary-pair classification on the wire.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PairVerdictDto {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<ComplexDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<ViolationDto>,
}

impl PairVerdictDto {
    pub fn from_verdict(verdict: &PairVerdict, violation: Option<&McViolation>) -> Self {
        let (token, z) = match verdict {
            PairVerdict::ScalarMultiple(z) => ("scalar-multiple", Some(ComplexDto::from_c(*z))),
            PairVerdict::ScalarMultipleOfAdjoint(z) => {
                ("scalar-multiple-of-adjoint", Some(ComplexDto::from_c(*z)))
            }
            PairVerdict::Neither => ("neither", None),
        };
        PairVerdictDto {
            verdict: token.into(),
            z,
            violation: violation.map(ViolationDto::from_violation),
        }
    }
}

/// Extremal comparison on the wire: closed form, sampled estimate, the
/// maximizing witness, and their gap.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExtremalDto {
    pub closed: f64,
    pub oracle: f64,
    pub witness: WitnessDto,
    pub gap: f64,
}

/// Witness payload: a full operator or a unit vector.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum WitnessDto {
    Operator(MatrixDto),
    Vector(VectorDto),
}

impl WitnessDto {
    pub fn from_witness(w: &crate::extremal::Witness) -> Self {
        match w {
            crate::extremal::Witness::Operator(m) => {
                WitnessDto::Operator(MatrixDto::from_matrix(m))
            }
            crate::extremal::Witness::Vector(v) => {
                WitnessDto::Vector(VectorDto::from_coords(v.coords()))
            }
        }
    }
}

fn parse_error(what: &str, err: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {err}"))
}

/// Serializes any wire DTO with stable field order and a trailing
/// newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_matrix(m: &CMat) -> Result<String> {
    to_json(&MatrixDto::from_matrix(m))
}

pub fn read_matrix(text: &str) -> Result<CMat> {
    let dto: MatrixDto =
        serde_json::from_str(text).map_err(|e| parse_error("matrix JSON", e))?;
    dto.to_matrix()
}

pub fn write_probe_set(set: &ProbeSet) -> Result<String> {
    to_json(&ProbeSetDto::from_probe_set(set))
}

pub fn read_probe_set(text: &str) -> Result<ProbeSet> {
    let dto: ProbeSetDto =
        serde_json::from_str(text).map_err(|e| parse_error("probe-set JSON", e))?;
    dto.to_probe_set()
}

pub fn write_preserver(dto: &PreserverDto) -> Result<String> {
    to_json(dto)
}

pub fn read_preserver(text: &str) -> Result<PreserverDto> {
    serde_json::from_str(text).map_err(|e| parse_error("preserver JSON", e))
}

pub fn write_reconstruction(res: &ReconstructionResult) -> Result<String> {
    to_json(&ReconstructionDto::from_result(res))
}

pub fn read_reconstruction(text: &str) -> Result<ReconstructionResult> {
    let dto: ReconstructionDto =
        serde_json::from_str(text).map_err(|e| parse_error("reconstruction JSON", e))?;
    dto.to_result()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{haar_unitary, random_hermitian, random_projection, task_rng};
    use crate::preservers::orthocomplement;

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = random_hermitian(4, &mut task_rng(40, 0));
        let text = write_matrix(&m).unwrap();
        let back = read_matrix(&text).unwrap();
        assert_eq!(back.sub(&m).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn matrix_reader_rejects_ragged_and_nonfinite_data() {
        let err = read_matrix(r#"{"dim": 2, "re": [[1.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("2x2"));
        let err = read_matrix(
            r#"{"dim": 1, "re": [[1e999]], "im": [[0.0]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("matrix JSON"));
        let err = read_matrix("not json").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn preserver_round_trips_every_kind() {
        let mut rng = task_rng(41, 0);
        let dtos = vec![
            PreserverDto::from_selfadjoint(
                &SelfAdjointPreserver::new(
                    Symmetry::new(haar_unitary(2, &mut rng), LinearityFlag::Conjugate).unwrap(),
                    Sign::Minus,
                    random_hermitian(2, &mut rng),
                )
                .unwrap(),
            ),
            PreserverDto::from_projection(
                &ProjectionPreserver::new(
                    Symmetry::new(haar_unitary(2, &mut rng), LinearityFlag::Linear).unwrap(),
                    ChoiceRule::Seeded(7),
                )
                .unwrap(),
            ),
            PreserverDto::from_unitary(&UnitaryPreserver::new(
                Symmetry::new(haar_unitary(3, &mut rng), LinearityFlag::Linear).unwrap(),
                PhaseRule::Const(C64::new(0.0, 1.0)),
                ChoiceRule::Const(true),
            )),
            PreserverDto::from_density(&DensityPreserver::new(
                Symmetry::new(haar_unitary(3, &mut rng), LinearityFlag::Conjugate).unwrap(),
                ChoiceRule::Const(false),
            )),
            PreserverDto::from_local_choice(&ChoiceRule::Table(
                [(vec![0i64, 0, 1_000_000], true)].into_iter().collect(),
            )),
        ];
        for dto in dtos {
            let text = write_preserver(&dto).unwrap();
            let back = read_preserver(&text).unwrap();
            assert_eq!(back, dto);
            back.build().unwrap();
        }
    }

    #[test]
    fn preserver_kind_tokens_are_stable() {
        let dto = PreserverDto::from_local_choice(&ChoiceRule::Const(false));
        let text = write_preserver(&dto).unwrap();
        assert!(text.contains("\"kind\": \"lpm\""));
        let dto = PreserverDto::from_density(&DensityPreserver::new(
            Symmetry::identity(2),
            ChoiceRule::Const(false),
        ));
        let text = write_preserver(&dto).unwrap();
        assert!(text.contains("\"kind\": \"thm4\""));
        assert!(text.contains("\"flag\": \"linear\""));
        let err = read_preserver(r#"{"kind": "thm9"}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn probe_set_round_trip_and_kind_validation() {
        let mut rng = task_rng(42, 0);
        let mut samples = Vec::new();
        for _ in 0..5 {
            let p = random_projection(2, &mut rng);
            let q = orthocomplement(&p).unwrap();
            samples.push((p.matrix().clone(), q.matrix().clone()));
        }
        let set = ProbeSet::new(ProbeKind::ProjectionMap, 2, samples).unwrap();
        let text = write_probe_set(&set).unwrap();
        assert!(text.contains("\"kind\": \"projection-map\""));
        assert!(text.contains("\"in\""));
        assert!(text.contains("\"out\""));
        let back = read_probe_set(&text).unwrap();
        assert_eq!(back.samples.len(), 5);

        let err = read_probe_set(&text.replace("projection-map", "mystery-map")).unwrap_err();
        assert!(err.to_string().contains("mystery-map"));
    }

    #[test]
    fn probe_set_reader_enforces_class_invariants() {
        let text = r#"{
            "kind": "projection-map",
            "dim": 2,
            "samples": [{
                "in": {"dim": 2, "re": [[1.0, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]},
                "out": {"dim": 2, "re": [[0.5, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}
            }]
        }"#;
        let err = read_probe_set(text).unwrap_err();
        assert!(err.to_string().contains("sample 0"));
    }

    #[test]
    fn reconstruction_round_trips_every_extras_shape() {
        let mut rng = task_rng(43, 0);
        let cases = vec![
            ReconstructionResult {
                sym: Symmetry::new(haar_unitary(2, &mut rng), LinearityFlag::Linear).unwrap(),
                extras: Extras::ProjectionBits { bits: vec![true, false, true] },
                residual: 1e-12,
                margin: 0.3,
                queries: 9,
            },
            ReconstructionResult {
                sym: Symmetry::new(haar_unitary(2, &mut rng), LinearityFlag::Conjugate).unwrap(),
                extras: Extras::SelfAdjoint {
                    sign: Sign::Minus,
                    representer: random_hermitian(2, &mut rng),
                },
                residual: 0.0,
                margin: 1.0,
                queries: 4,
            },
            ReconstructionResult {
                sym: Symmetry::new(haar_unitary(3, &mut rng), LinearityFlag::Linear).unwrap(),
                extras: Extras::None,
                residual: 2e-9,
                margin: 1.9,
                queries: 7,
            },
        ];
        for case in cases {
            let text = write_reconstruction(&case).unwrap();
            let back = read_reconstruction(&text).unwrap();
            assert_eq!(back.queries, case.queries);
            assert_eq!(back.residual, case.residual);
            assert_eq!(back.sym.flag(), case.sym.flag());
            assert_eq!(back.sym.u().sub(case.sym.u()).unwrap().max_abs(), 0.0);
            match (&back.extras, &case.extras) {
                (Extras::ProjectionBits { bits: a }, Extras::ProjectionBits { bits: b }) => {
                    assert_eq!(a, b)
                }
                (
                    Extras::SelfAdjoint { sign: sa, representer: ra },
                    Extras::SelfAdjoint { sign: sb, representer: rb },
                ) => {
                    assert_eq!(sa, sb);
                    assert_eq!(ra.sub(rb).unwrap().max_abs(), 0.0);
                }
                (Extras::None, Extras::None) => {}
                other => panic!("extras shape changed in transit: {other:?}"),
            }
        }
    }

    #[test]
    fn verdict_and_extremal_payloads_serialize_stably() {
        let dto = PairVerdictDto::from_verdict(
            &PairVerdict::ScalarMultiple(C64::new(0.0, 1.0)),
            None,
        );
        let text = to_json(&dto).unwrap();
        assert!(text.contains("scalar-multiple"));
        assert!(!text.contains("violation"));
        let back: PairVerdictDto = serde_json::from_str(&text).unwrap();
        assert_eq!(back, dto);

        let witness = WitnessDto::Vector(VectorDto {
            re: vec![1.0, 0.0],
            im: vec![0.0, 0.0],
        });
        let dto = ExtremalDto { closed: 2.0, oracle: 1.9995, witness, gap: 5e-4 };
        let text = to_json(&dto).unwrap();
        assert!(text.contains("\"vector\""));
        let back: ExtremalDto = serde_json::from_str(&text).unwrap();
        assert_eq!(back, dto);
    }
}
