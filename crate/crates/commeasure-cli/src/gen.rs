//! Seeded emitters behind the `gen` subcommand.
//!
//! Everything here is deterministic in the seed: the hidden map is
//! drawn from `task_rng(seed, 0)` and probe `i` from
//! `task_rng(seed, 1 + i)`, so a probe file can be regenerated without
//! replaying the whole set.

use std::str::FromStr;

use commeasure::ensembles::{
    haar_unitary, random_density, random_hermitian, random_projection, task_rng,
};
use commeasure::json::{flag_token, MatrixDto, PreserverDto};
use commeasure::mat::{CMat, UnitVec, C64};
use commeasure::preservers::{
    ChoiceRule, DensityPreserver, LinearityFlag, PhaseRule, ProjectionPreserver,
    SelfAdjointPreserver, Sign, Symmetry, UnitaryPreserver,
};
use commeasure::reconstruct::{anchor_projections, herm_basis, ProbeKind, ProbeSet};
use commeasure::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Matrix classes the generator can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Unitary,
    Hermitian,
    Density,
    Projection,
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" => Ok(MatrixKind::Unitary),
            "hermitian" => Ok(MatrixKind::Hermitian),
            "density" => Ok(MatrixKind::Density),
            "projection" => Ok(MatrixKind::Projection),
            other => Err(Error::Parse(format!(
                "unknown matrix kind {other:?}, expected one of \
                 unitary, hermitian, density, projection"
            ))),
        }
    }
}

/// One seeded random matrix of the requested class.
pub fn gen_matrix(kind: MatrixKind, dim: usize, seed: u64) -> Result<CMat> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!(
            "generation needs dimension at least 2, got {dim}"
        )));
    }
    let mut rng = task_rng(seed, 0);
    Ok(match kind {
        MatrixKind::Unitary => haar_unitary(dim, &mut rng),
        MatrixKind::Hermitian => random_hermitian(dim, &mut rng),
        MatrixKind::Density => random_density(dim, &mut rng).into_matrix(),
        MatrixKind::Projection => random_projection(dim, &mut rng).into_matrix(),
    })
}

/// Preserver families the generator can sample. The `FromStr` tokens
/// match the wire tags of [`PreserverDto`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreserverKind {
    SelfAdjointLinear,
    ProjectionChoice,
    UnitaryConjugation,
    DensityConjugation,
    LocalChoice,
}

impl FromStr for PreserverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1" => Ok(PreserverKind::SelfAdjointLinear),
            "thm2" => Ok(PreserverKind::ProjectionChoice),
            "thm3" => Ok(PreserverKind::UnitaryConjugation),
            "thm4" => Ok(PreserverKind::DensityConjugation),
            "lpm" => Ok(PreserverKind::LocalChoice),
            other => Err(Error::Parse(format!(
                "unknown preserver kind {other:?}, expected one of \
                 thm1, thm2, thm3, thm4, lpm"
            ))),
        }
    }
}

impl PreserverKind {
    /// Default ambient dimension when the caller does not pick one.
    pub fn default_dim(self) -> usize {
        match self {
            PreserverKind::SelfAdjointLinear
            | PreserverKind::ProjectionChoice
            | PreserverKind::LocalChoice => 2,
            PreserverKind::UnitaryConjugation | PreserverKind::DensityConjugation => 3,
        }
    }
}

/// A sampled probe table together with the hidden map that produced it.
#[derive(Clone, Debug)]
pub struct GeneratedProbes {
    /// The hidden map, for the sidecar file.
    pub spec: PreserverDto,
    /// Input/output samples drawn from it.
    pub set: ProbeSet,
}

fn random_flag(rng: &mut impl Rng) -> LinearityFlag {
    if rng.random::<bool>() {
        LinearityFlag::Conjugate
    } else {
        LinearityFlag::Linear
    }
}

fn check_gen_args(kind: PreserverKind, dim: usize, probes: usize) -> Result<()> {
    if probes == 0 {
        return Err(Error::InvalidInput(
            "at least one random probe is required".into(),
        ));
    }
    match kind {
        PreserverKind::SelfAdjointLinear
        | PreserverKind::ProjectionChoice
        | PreserverKind::LocalChoice => {
            if dim != 2 {
                return Err(Error::InvalidInput(format!(
                    "this preserver family acts in dimension 2, got {dim}"
                )));
            }
        }
        PreserverKind::UnitaryConjugation | PreserverKind::DensityConjugation => {
            if dim < 2 {
                return Err(Error::InvalidInput(format!(
                    "generation needs dimension at least 2, got {dim}"
                )));
            }
        }
    }
    Ok(())
}

/// Samples a hidden preserver of the requested family and tabulates it.
///
/// The probe table lists the reconstruction anchors first (the four
/// Hermitian basis elements for the linear family, the six anchor
/// projections for the projection families, none for the unitary and
/// density families) followed by `probes` random inputs.
pub fn gen_preserver(
    kind: PreserverKind,
    dim: usize,
    seed: u64,
    probes: usize,
) -> Result<GeneratedProbes> {
    check_gen_args(kind, dim, probes)?;
    let mut rng = task_rng(seed, 0);
    match kind {
        PreserverKind::SelfAdjointLinear => {
            let sym = Symmetry::new(haar_unitary(2, &mut rng), random_flag(&mut rng))?;
            let sign = if rng.random::<bool>() { Sign::Minus } else { Sign::Plus };
            let rep = random_hermitian(2, &mut rng);
            let map = SelfAdjointPreserver::new(sym, sign, rep)?;
            let mut samples = Vec::with_capacity(4 + probes);
            for b in herm_basis() {
                let image = map.apply(&b)?;
                samples.push((b, image));
            }
            for i in 0..probes {
                let a = random_hermitian(2, &mut task_rng(seed, 1 + i as u64));
                let image = map.apply(&a)?;
                samples.push((a, image));
            }
            Ok(GeneratedProbes {
                spec: PreserverDto::from_selfadjoint(&map),
                set: ProbeSet::new(ProbeKind::HermitianLinearMap, 2, samples)?,
            })
        }
        PreserverKind::ProjectionChoice | PreserverKind::LocalChoice => {
            let map = if kind == PreserverKind::ProjectionChoice {
                let sym = Symmetry::new(haar_unitary(2, &mut rng), random_flag(&mut rng))?;
                ProjectionPreserver::new(sym, ChoiceRule::Seeded(rng.random()))?
            } else {
                ProjectionPreserver::lpm(ChoiceRule::Seeded(rng.random()))
            };
            let spec = if kind == PreserverKind::ProjectionChoice {
                PreserverDto::from_projection(&map)
            } else {
                PreserverDto::from_local_choice(map.choice())
            };
            let mut samples = Vec::with_capacity(6 + probes);
            for p in anchor_projections()? {
                let image = map.apply(&p)?;
                samples.push((p.into_matrix(), image.into_matrix()));
            }
            for i in 0..probes {
                let p = random_projection(2, &mut task_rng(seed, 1 + i as u64));
                let image = map.apply(&p)?;
                samples.push((p.into_matrix(), image.into_matrix()));
            }
            Ok(GeneratedProbes {
                spec,
                set: ProbeSet::new(ProbeKind::ProjectionMap, 2, samples)?,
            })
        }
        PreserverKind::UnitaryConjugation => {
            // A unitary-pair table samples the relation the classifier
            // decides: rows (V, z V) and (V, z V*). Conjugating by a
            // hidden unitary would break that pairwise relation, so
            // the symmetry is pinned to the identity; the phase varies
            // per sample and the adjoint branch flips per sample.
            let map = UnitaryPreserver::new(
                Symmetry::identity(dim),
                PhaseRule::Seeded(rng.random()),
                ChoiceRule::Seeded(rng.random()),
            );
            let mut samples = Vec::with_capacity(probes);
            for i in 0..probes {
                let v = haar_unitary(dim, &mut task_rng(seed, 1 + i as u64));
                let image = map.apply(&v)?;
                samples.push((v, image));
            }
            Ok(GeneratedProbes {
                spec: PreserverDto::from_unitary(&map),
                set: ProbeSet::new(ProbeKind::UnitaryPair, dim, samples)?,
            })
        }
        PreserverKind::DensityConjugation => {
            let sym = Symmetry::new(haar_unitary(dim, &mut rng), random_flag(&mut rng))?;
            // The complement branch needs the image spectrum inside
            // [0, 2/n]; only dimension 2 guarantees that for every
            // density, so higher dimensions pin the branch off.
            let branch = if dim == 2 {
                ChoiceRule::Seeded(rng.random())
            } else {
                ChoiceRule::Const(false)
            };
            let map = DensityPreserver::new(sym, branch);
            let mut samples = Vec::with_capacity(probes);
            for i in 0..probes {
                let a = random_density(dim, &mut task_rng(seed, 1 + i as u64));
                let image = map.apply(&a)?;
                samples.push((a.into_matrix(), image.into_matrix()));
            }
            Ok(GeneratedProbes {
                spec: PreserverDto::from_density(&map),
                set: ProbeSet::new(ProbeKind::HermitianLinearMap, dim, samples)?,
            })
        }
    }
}

/// Hidden symmetry written next to a generated rank-one probe table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WignerSidecar {
    #[serde(rename = "U")]
    pub u: MatrixDto,
    pub flag: String,
}

/// A rank-one probe table with the hidden symmetry that produced it.
#[derive(Clone, Debug)]
pub struct GeneratedWigner {
    pub sidecar: WignerSidecar,
    pub set: ProbeSet,
}

/// Samples a hidden symmetry in dimension `dim` and tabulates it on
/// the 3n - 2 rank-one probes its reconstruction queries (the basis
/// projections, then the two mixing families over the first axis),
/// followed by `probes` random rank-one projections.
pub fn gen_wigner(dim: usize, seed: u64, probes: usize) -> Result<GeneratedWigner> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!(
            "generation needs dimension at least 2, got {dim}"
        )));
    }
    if probes == 0 {
        return Err(Error::InvalidInput(
            "at least one random probe is required".into(),
        ));
    }
    let mut rng = task_rng(seed, 0);
    let sym = Symmetry::new(haar_unitary(dim, &mut rng), random_flag(&mut rng))?;

    let basis = |j: usize| -> Result<UnitVec> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[j] = C64::new(1.0, 0.0);
        UnitVec::new(v)
    };
    let mix = |j: usize, z: C64| -> Result<UnitVec> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = C64::new(1.0, 0.0);
        v[j] = z;
        UnitVec::normalized(v)
    };
    let mut inputs = Vec::with_capacity(3 * dim - 2 + probes);
    for j in 0..dim {
        inputs.push(basis(j)?);
    }
    for j in 1..dim {
        inputs.push(mix(j, C64::new(1.0, 0.0))?);
    }
    for j in 1..dim {
        inputs.push(mix(j, C64::new(0.0, 1.0))?);
    }

    let mut samples = Vec::with_capacity(inputs.len() + probes);
    for x in &inputs {
        let p = x.projector();
        let image = sym.apply(&p)?;
        samples.push((p, image));
    }
    for i in 0..probes {
        let p = random_projection(dim, &mut task_rng(seed, 1 + i as u64));
        let image = sym.apply(p.matrix())?;
        samples.push((p.into_matrix(), image));
    }
    Ok(GeneratedWigner {
        sidecar: WignerSidecar {
            u: MatrixDto::from_matrix(sym.u()),
            flag: flag_token(sym.flag()).into(),
        },
        set: ProbeSet::new(ProbeKind::ProjectionMap, dim, samples)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use commeasure::json::AnyPreserver;
    use commeasure::measures::Projection;
    use commeasure::reconstruct::{
        reconstruct_projection_symmetry, reconstruct_wigner, TableOracle, RESIDUAL_TOL,
    };
    use commeasure::tol;

    #[test]
    fn matrix_kinds_have_their_invariants() {
        let u = gen_matrix(MatrixKind::Unitary, 3, 1).unwrap();
        assert!(u.unitary_defect() <= tol::UNITARY_IN);
        let h = gen_matrix(MatrixKind::Hermitian, 3, 1).unwrap();
        assert!(h.is_hermitian(tol::STRUCT));
        let d = gen_matrix(MatrixKind::Density, 3, 1).unwrap();
        assert!((d.trace().re - 1.0).abs() <= 1e-10);
        let p = gen_matrix(MatrixKind::Projection, 3, 1).unwrap();
        assert!(Projection::new(p).is_ok());
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = gen_matrix(MatrixKind::Unitary, 4, 7).unwrap();
        let b = gen_matrix(MatrixKind::Unitary, 4, 7).unwrap();
        assert_eq!(a.sub(&b).unwrap().max_abs(), 0.0);
        let g1 = gen_preserver(PreserverKind::ProjectionChoice, 2, 9, 8).unwrap();
        let g2 = gen_preserver(PreserverKind::ProjectionChoice, 2, 9, 8).unwrap();
        assert_eq!(g1.spec, g2.spec);
        assert_eq!(g1.set.samples.len(), g2.set.samples.len());
    }

    #[test]
    fn kind_tokens_round_trip() {
        for token in ["thm1", "thm2", "thm3", "thm4", "lpm"] {
            let kind: PreserverKind = token.parse().unwrap();
            check_gen_args(kind, kind.default_dim(), 1).unwrap();
        }
        assert!("thm9".parse::<PreserverKind>().is_err());
        assert!("unitary".parse::<MatrixKind>().is_ok());
        assert!("spooky".parse::<MatrixKind>().is_err());
    }

    #[test]
    fn generated_projection_table_reconstructs() {
        let g = gen_preserver(PreserverKind::ProjectionChoice, 2, 5, 16).unwrap();
        let oracle = TableOracle::new(&g.set).unwrap();
        let res = reconstruct_projection_symmetry(&oracle, 123).unwrap();
        assert!(res.residual <= RESIDUAL_TOL);
        let hidden = match g.spec.build().unwrap() {
            AnyPreserver::Projection(p) => p,
            other => panic!("unexpected preserver {other:?}"),
        };
        let (u_canon, flip) = hidden.canonical_symmetry().unwrap();
        assert_eq!(res.sym.flag(), LinearityFlag::Linear);
        let dist = commeasure::reconstruct::phase_aligned_distance(res.sym.u(), &u_canon).unwrap();
        assert!(dist <= 1e-7, "distance {dist:.3e}");
        let _ = flip;
    }

    #[test]
    fn generated_wigner_table_reconstructs() {
        for dim in [2, 4] {
            let g = gen_wigner(dim, 11, 6).unwrap();
            let oracle = TableOracle::new(&g.set).unwrap();
            let res = reconstruct_wigner(&oracle, dim, 55).unwrap();
            assert!(res.residual <= RESIDUAL_TOL);
            assert_eq!(flag_token(res.sym.flag()), g.sidecar.flag);
            let u_hidden = g.sidecar.u.to_matrix().unwrap();
            let dist =
                commeasure::reconstruct::phase_aligned_distance(res.sym.u(), &u_hidden).unwrap();
            assert!(dist <= 1e-7, "dim {dim} distance {dist:.3e}");
        }
    }

    #[test]
    fn generated_unitary_pairs_classify_cleanly() {
        use commeasure::reconstruct::{classify_unitary_pair, PairVerdict};
        let g = gen_preserver(PreserverKind::UnitaryConjugation, 3, 21, 10).unwrap();
        let mut saw_adjoint = false;
        for (v, w) in &g.set.samples {
            match classify_unitary_pair(v, w).unwrap() {
                PairVerdict::Neither => panic!("generated pair classified as unrelated"),
                PairVerdict::ScalarMultipleOfAdjoint(_) => saw_adjoint = true,
                PairVerdict::ScalarMultiple(_) => {}
            }
        }
        let _ = saw_adjoint;
    }

    #[test]
    fn generated_tables_validate_per_kind() {
        let g = gen_preserver(PreserverKind::SelfAdjointLinear, 2, 3, 4).unwrap();
        assert_eq!(g.set.samples.len(), 8);
        g.set.validate().unwrap();
        let g = gen_preserver(PreserverKind::UnitaryConjugation, 3, 3, 4).unwrap();
        assert_eq!(g.set.samples.len(), 4);
        g.set.validate().unwrap();
        let g = gen_preserver(PreserverKind::DensityConjugation, 3, 3, 4).unwrap();
        g.set.validate().unwrap();
        let g = gen_preserver(PreserverKind::LocalChoice, 2, 3, 4).unwrap();
        assert_eq!(g.set.samples.len(), 10);
        g.set.validate().unwrap();
        assert!(gen_preserver(PreserverKind::SelfAdjointLinear, 3, 3, 4).is_err());
        assert!(gen_preserver(PreserverKind::ProjectionChoice, 2, 3, 0).is_err());
    }
}
