//! Verification suites: every library invariant the binary can check,
//! organized as named, seeded, individually tolerated checks.
//!
//! Check seeds are derived from the master seed and the check name, so
//! adding or reordering checks never shifts the random streams of the
//! others. Within a check, trial i draws from `task_rng(check_seed, i)`
//! regardless of scheduling, making reports reproducible word for word.

use crate::{CheckRecord, CheckStatus, Report};
use commeasure::ensembles::{
    derive_seed, haar_unitary, random_density, random_hermitian, random_projection,
    random_unit_vector, task_rng,
};
use commeasure::extremal::{omega_closed, omega_oracle, theta_closed, theta_oracle};
use commeasure::mat::{CMat, C64};
use commeasure::measures::{
    comm_measure, density_proj_measure, det_formula_2d, proj_pair_measure, star_property_check,
    unitary_proj_measure, Projection, StarPair, STAR_TOL,
};
use commeasure::norms::{norm_constant, ui_norm, NormSpec};
use commeasure::preservers::{
    ChoiceRule, DensityPreserver, LinearityFlag, PhaseRule, ProjectionPreserver,
    SelfAdjointPreserver, Sign, Symmetry,
};
use commeasure::reconstruct::{
    anchor_projections, classify_unitary_pair, find_mc_violation, phase_aligned_distance,
    reconstruct_projection_symmetry, reconstruct_selfadjoint_linear, reconstruct_wigner,
    validation_projections, CountingOracle, PairVerdict, RESIDUAL_TOL,
};
use commeasure::{exec, Error, Result};
use rand::Rng;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Named verification suites; `All` additionally runs the
/// reconstruction round trips and the unitary-pair classifier checks,
/// which have no standalone suite token.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Det2d,
    Mcd,
    Mcp,
    Star,
    Preservers,
    Extremal,
    Norms,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "det2d" => Ok(Suite::Det2d),
            "mcd" => Ok(Suite::Mcd),
            "mcp" => Ok(Suite::Mcp),
            "star" => Ok(Suite::Star),
            "preservers" => Ok(Suite::Preservers),
            "extremal" => Ok(Suite::Extremal),
            "norms" => Ok(Suite::Norms),
            other => Err(Error::Parse(format!(
                "unknown suite {other:?}; expected one of all, det2d, mcd, mcp, \
                 star, preservers, extremal, norms"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            Suite::All => "all",
            Suite::Det2d => "det2d",
            Suite::Mcd => "mcd",
            Suite::Mcp => "mcp",
            Suite::Star => "star",
            Suite::Preservers => "preservers",
            Suite::Extremal => "extremal",
            Suite::Norms => "norms",
        };
        write!(f, "{token}")
    }
}

/// The default norm grid: qualitatively distinct symmetric gauges at
/// small dimension.
pub fn default_norm_grid() -> Vec<NormSpec> {
    ["op", "tr", "fro", "schatten:3", "kyfan:2"]
        .iter()
        .map(|s| s.parse().expect("static grid tokens parse"))
        .collect()
}

/// Full configuration of a verification run. `new` fills every scale
/// with its default; tests override individual fields.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub norms: Vec<NormSpec>,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Sample budget of each extremal oracle run.
    pub budget: usize,
    /// Instances per extremal check.
    pub extremal_instances: usize,
    /// Repetitions per reconstruction round-trip check.
    pub reconstruct_reps: usize,
    /// Sampled maps in the positive overlap-law check.
    pub star_maps: usize,
    /// Perturbed maps in the negative overlap-law check.
    pub star_perturbed: usize,
    /// Pairs per classifier check.
    pub classify_pairs: usize,
    /// Test hook: scales every closed-form constant by 1.01 so the
    /// comparison checks must fail; proves the harness cannot pass
    /// vacuously.
    pub corrupt_norm_constant: bool,
}

impl VerifyConfig {
    pub fn new(suite: Suite, seed: u64) -> Self {
        VerifyConfig {
            suite,
            norms: default_norm_grid(),
            trials: 1000,
            dims: vec![2, 3, 4, 5],
            seed,
            budget: 20_000,
            extremal_instances: 100,
            reconstruct_reps: 50,
            star_maps: 500,
            star_perturbed: 100,
            classify_pairs: 100,
            corrupt_norm_constant: false,
        }
    }

    fn factor(&self) -> f64 {
        if self.corrupt_norm_constant {
            1.01
        } else {
            1.0
        }
    }
}

/// Outcome of one check body: the worst deviation with its witness,
/// plus an optional structural failure that no tolerance can excuse.
struct Outcome {
    worst: f64,
    witness: Option<String>,
    structural: Option<String>,
}

impl Outcome {
    fn measured(worst: f64, witness: Option<String>) -> Self {
        Outcome { worst, witness, structural: None }
    }
}

fn check_seed(master: u64, name: &str) -> u64 {
    name.bytes()
        .fold(derive_seed(master, name.len() as u64), |h, b| derive_seed(h, b as u64))
}

/// Folds per-trial deviations into (worst, index of worst).
fn fold_worst(evals: Vec<Result<f64>>) -> Result<(f64, Option<usize>)> {
    let mut worst = 0.0f64;
    let mut at = None;
    for (i, eval) in evals.into_iter().enumerate() {
        let v = eval?;
        if v > worst {
            worst = v;
            at = Some(i);
        }
    }
    Ok((worst, at))
}

/// Runs the configured suites and assembles the report.
pub fn run_verify(cfg: &VerifyConfig) -> Result<Report> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    if cfg.norms.is_empty() {
        return Err(Error::InvalidInput("norm grid is empty".into()));
    }
    if cfg.dims.is_empty() || cfg.dims.iter().any(|&n| n < 2) {
        return Err(Error::InvalidInput(
            "dimension list must be nonempty with every entry at least 2".into(),
        ));
    }
    let started = Instant::now();
    let mut checks: Vec<CheckRecord> = Vec::new();
    let mut run = |name: String, tolerance: f64, body: &mut dyn FnMut(u64) -> Result<Outcome>| {
        let seed = check_seed(cfg.seed, &name);
        let record = match body(seed) {
            Ok(outcome) => {
                let status = if outcome.structural.is_some() || outcome.worst > tolerance {
                    CheckStatus::Fail
                } else {
                    CheckStatus::Pass
                };
                CheckRecord {
                    name,
                    status,
                    worst: Some(outcome.worst),
                    tolerance,
                    witness: outcome.structural.or(outcome.witness),
                }
            }
            Err(e) => CheckRecord {
                name,
                status: CheckStatus::Error,
                worst: None,
                tolerance,
                witness: Some(e.to_string()),
            },
        };
        checks.push(record);
    };

    let on = |s: Suite| cfg.suite == Suite::All || cfg.suite == s;

    if on(Suite::Det2d) {
        det2d_section(cfg, &mut run);
    }
    if on(Suite::Norms) {
        norms_section(cfg, &mut run);
    }
    if on(Suite::Mcd) {
        mcd_section(cfg, &mut run);
    }
    if on(Suite::Mcp) {
        mcp_section(cfg, &mut run);
    }
    if on(Suite::Star) {
        star_section(cfg, &mut run);
    }
    if on(Suite::Preservers) {
        preservers_section(cfg, &mut run);
    }
    if on(Suite::Extremal) {
        extremal_section(cfg, &mut run);
    }
    if cfg.suite == Suite::All {
        reconstruct_section(cfg, &mut run);
        classify_section(cfg, &mut run);
    }

    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let verdict = if checks.iter().all(|c| c.status == CheckStatus::Pass) {
        "pass"
    } else {
        "fail"
    };
    Ok(Report {
        suite: cfg.suite.to_string(),
        norm_grid: cfg.norms.iter().map(|s| s.to_string()).collect(),
        trials: cfg.trials,
        dims: cfg.dims.clone(),
        seed: cfg.seed,
        checks,
        verdict: verdict.into(),
        duration_ms: started.elapsed().as_millis() as u64,
    })
}

type Runner<'a> = dyn FnMut(String, f64, &mut dyn FnMut(u64) -> Result<Outcome>) + 'a;

fn det2d_section(cfg: &VerifyConfig, run: &mut Runner) {
    let factor = cfg.factor();
    for spec in cfg.norms.clone() {
        let trials = cfg.trials;
        run(format!("det2d/{spec}"), 1e-8, &mut |seed| {
            let evals = exec::map_indexed(trials, |i| {
                let mut rng = task_rng(seed, i as u64);
                let a = random_hermitian(2, &mut rng);
                let b = random_hermitian(2, &mut rng);
                let direct = comm_measure(&a, &b, &spec)?;
                let closed = det_formula_2d(&a, &b, &spec)? * factor;
                Ok((direct - closed).abs())
            });
            let (worst, at) = fold_worst(evals)?;
            Ok(Outcome::measured(worst, at.map(|i| format!("pair {i}"))))
        });
    }
    let norms = cfg.norms.clone();
    run("det2d/anchors".into(), 1e-12, &mut |_| {
        let x = commeasure::ensembles::pauli_x();
        let y = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, 1.0),
            (1, 0) => C64::new(0.0, -1.0),
            _ => C64::new(0.0, 0.0),
        });
        let a5 = CMat::from_fn(2, |i, j| {
            if i == 1 && j == 1 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        });
        let mut worst = 0.0f64;
        let mut witness = None;
        for spec in &norms {
            let c = norm_constant(spec, 2)? * factor;
            for (label, a, det) in [("det 4", &x, 4.0f64), ("det 5", &a5, 5.0)] {
                let direct = comm_measure(a, &y, spec)?;
                let dev = (direct - c * det.sqrt()).abs();
                if dev > worst {
                    worst = dev;
                    witness = Some(format!("{label} under {spec}"));
                }
            }
        }
        Ok(Outcome { worst, witness, structural: None })
    });
}

fn norms_section(cfg: &VerifyConfig, run: &mut Runner) {
    let factor = cfg.factor();
    for spec in cfg.norms.clone() {
        for n in cfg.dims.clone() {
            let trials = cfg.trials;
            run(format!("norms/constant/{spec}/dim{n}"), 1e-10, &mut |seed| {
                let expected = norm_constant(&spec, n)? * factor;
                let evals = exec::map_indexed(trials, |i| {
                    let mut rng = task_rng(seed, i as u64);
                    let u = haar_unitary(n, &mut rng);
                    let mut diag = vec![C64::new(0.0, 0.0); n];
                    diag[0] = C64::new(1.0, 0.0);
                    diag[1] = C64::new(-1.0, 0.0);
                    let element = u.matmul(&CMat::diag(&diag))?.matmul(&u.adjoint())?;
                    Ok((ui_norm(&element, &spec)? - expected).abs())
                });
                let (worst, at) = fold_worst(evals)?;
                Ok(Outcome::measured(worst, at.map(|i| format!("element {i}"))))
            });
        }
    }
}

fn mcd_section(cfg: &VerifyConfig, run: &mut Runner) {
    let factor = cfg.factor();
    for spec in cfg.norms.clone() {
        for n in cfg.dims.clone() {
            let trials = cfg.trials;
            run(format!("mcd/{spec}/dim{n}"), 1e-9, &mut |seed| {
                let evals = exec::map_indexed(trials, |i| {
                    let mut rng = task_rng(seed, i as u64);
                    let a = random_density(n, &mut rng);
                    let x = random_unit_vector(n, &mut rng);
                    let closed = density_proj_measure(&a, &x, &spec)? * factor;
                    let direct = comm_measure(a.matrix(), &x.projector(), &spec)?;
                    Ok((closed - direct).abs())
                });
                let (worst, at) = fold_worst(evals)?;
                Ok(Outcome::measured(worst, at.map(|i| format!("pair {i}"))))
            });
        }
    }
}

fn mcp_section(cfg: &VerifyConfig, run: &mut Runner) {
    let factor = cfg.factor();
    for spec in cfg.norms.clone() {
        for n in cfg.dims.clone() {
            let trials = cfg.trials;
            run(format!("mcp/{spec}/dim{n}"), 1e-9, &mut |seed| {
                let evals = exec::map_indexed(trials, |i| {
                    let mut rng = task_rng(seed, i as u64);
                    let v = haar_unitary(n, &mut rng);
                    let x = random_unit_vector(n, &mut rng);
                    let closed = unitary_proj_measure(&v, &x, &spec)? * factor;
                    let direct = comm_measure(&v, &x.projector(), &spec)?;
                    Ok((closed - direct).abs())
                });
                let (worst, at) = fold_worst(evals)?;
                Ok(Outcome::measured(worst, at.map(|i| format!("pair {i}"))))
            });
        }
    }
}

const STAR_SAMPLES_PER_MAP: usize = 12;

/// Inputs and outputs of one sampled dim-2 projection map; when
/// `perturb`, one output is replaced by an unrelated projection.
fn sampled_projection_map(
    seed: u64,
    index: usize,
    perturb: bool,
) -> Result<(Vec<Projection>, Vec<Projection>)> {
    let mut rng = task_rng(seed, index as u64);
    let flag = if rng.random::<bool>() {
        LinearityFlag::Conjugate
    } else {
        LinearityFlag::Linear
    };
    let sym = Symmetry::new(haar_unitary(2, &mut rng), flag)?;
    let hidden = ProjectionPreserver::new(sym, ChoiceRule::Seeded(rng.random::<u64>()))?;
    let inputs: Vec<Projection> = (0..STAR_SAMPLES_PER_MAP)
        .map(|_| random_projection(2, &mut rng))
        .collect();
    let mut outputs = inputs
        .iter()
        .map(|p| hidden.apply(p))
        .collect::<Result<Vec<_>>>()?;
    if perturb {
        let victim = rng.random_range(0..STAR_SAMPLES_PER_MAP);
        outputs[victim] = random_projection(2, &mut rng);
    }
    Ok((inputs, outputs))
}

fn star_pairs(inputs: &[Projection], outputs: &[Projection]) -> Vec<StarPair> {
    let mut pairs = Vec::new();
    for i in 0..inputs.len() {
        for j in (i + 1)..inputs.len() {
            pairs.push(StarPair {
                input: (inputs[i].clone(), inputs[j].clone()),
                output: (outputs[i].clone(), outputs[j].clone()),
            });
        }
    }
    pairs
}

/// Worst per-pair measure deviation of a sampled map over the grid.
fn norm_equality_worst(
    inputs: &[Projection],
    outputs: &[Projection],
    norms: &[NormSpec],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..inputs.len() {
        for j in (i + 1)..inputs.len() {
            for spec in norms {
                let m_in = proj_pair_measure(&inputs[i], &inputs[j], spec)?;
                let m_out = proj_pair_measure(&outputs[i], &outputs[j], spec)?;
                worst = worst.max((m_in - m_out).abs());
            }
        }
    }
    Ok(worst)
}

fn star_section(cfg: &VerifyConfig, run: &mut Runner) {
    let norms = cfg.norms.clone();
    let maps = cfg.star_maps;
    run("star/sampled-maps-pass".into(), STAR_TOL, &mut |seed| {
        let evals = exec::map_indexed(maps, |k| {
            let (inputs, outputs) = sampled_projection_map(seed, k, false)?;
            let star = star_property_check(&star_pairs(&inputs, &outputs))?;
            let norm_dev = norm_equality_worst(&inputs, &outputs, &norms)?;
            Ok(star.worst_deviation.max(norm_dev))
        });
        let (worst, at) = fold_worst(evals)?;
        Ok(Outcome::measured(worst, at.map(|k| format!("map {k}"))))
    });

    let norms = cfg.norms.clone();
    let perturbed = cfg.star_perturbed;
    run("star/perturbed-maps-fail".into(), 0.0, &mut |seed| {
        let evals = exec::map_indexed(perturbed, |k| {
            let (inputs, outputs) = sampled_projection_map(seed, k, true)?;
            let star = star_property_check(&star_pairs(&inputs, &outputs))?;
            let norm_dev = norm_equality_worst(&inputs, &outputs, &norms)?;
            // A perturbed map must fail the overlap law and the norm
            // equality alike; count it when either slips through.
            Ok(if star.pass || norm_dev <= STAR_TOL { 1.0 } else { 0.0 })
        });
        let mut slipped = 0.0f64;
        let mut witness = None;
        for (k, eval) in evals.into_iter().enumerate() {
            if eval? > 0.0 {
                slipped += 1.0;
                witness.get_or_insert_with(|| format!("map {k} escaped rejection"));
            }
        }
        Ok(Outcome { worst: slipped, witness, structural: None })
    });
}

fn random_selfadjoint_preserver(rng: &mut impl Rng) -> Result<SelfAdjointPreserver> {
    let flag = if rng.random::<bool>() {
        LinearityFlag::Conjugate
    } else {
        LinearityFlag::Linear
    };
    let sign = if rng.random::<bool>() { Sign::Minus } else { Sign::Plus };
    SelfAdjointPreserver::new(
        Symmetry::new(haar_unitary(2, rng), flag)?,
        sign,
        random_hermitian(2, rng),
    )
}

fn random_flag(rng: &mut impl Rng) -> LinearityFlag {
    if rng.random::<bool>() {
        LinearityFlag::Conjugate
    } else {
        LinearityFlag::Linear
    }
}

fn preservers_section(cfg: &VerifyConfig, run: &mut Runner) {
    for spec in cfg.norms.clone() {
        let trials = cfg.trials;
        run(format!("preservers/selfadjoint-linear/{spec}"), 1e-8, &mut |seed| {
            let evals = exec::map_indexed(trials, |i| {
                let mut rng = task_rng(seed, i as u64);
                let p = random_selfadjoint_preserver(&mut rng)?;
                let a = random_hermitian(2, &mut rng);
                let b = random_hermitian(2, &mut rng);
                let before = comm_measure(&a, &b, &spec)?;
                let after = comm_measure(&p.apply(&a)?, &p.apply(&b)?, &spec)?;
                Ok((before - after).abs())
            });
            let (worst, at) = fold_worst(evals)?;
            Ok(Outcome::measured(worst, at.map(|i| format!("pair {i}"))))
        });

        let trials = cfg.trials;
        run(format!("preservers/projection-choice/{spec}"), 1e-8, &mut |seed| {
            let evals = exec::map_indexed(trials, |i| {
                let mut rng = task_rng(seed, i as u64);
                let flag = random_flag(&mut rng);
                let sym = Symmetry::new(haar_unitary(2, &mut rng), flag)?;
                let p = ProjectionPreserver::new(sym, ChoiceRule::Seeded(rng.random::<u64>()))?;
                let a = random_projection(2, &mut rng);
                let b = random_projection(2, &mut rng);
                let before = comm_measure(a.matrix(), b.matrix(), &spec)?;
                let after =
                    comm_measure(p.apply(&a)?.matrix(), p.apply(&b)?.matrix(), &spec)?;
                Ok((before - after).abs())
            });
            let (worst, at) = fold_worst(evals)?;
            Ok(Outcome::measured(worst, at.map(|i| format!("pair {i}"))))
        });

        let trials = cfg.trials;
        let dims = cfg.dims.clone();
        run(format!("preservers/unitary-conjugation/{spec}"), 1e-8, &mut |seed| {
            let evals = exec::map_indexed(trials, |i| {
                let mut rng = task_rng(seed, i as u64);
                let n = dims[i % dims.len()];
                let sym = Symmetry::new(haar_unitary(n, &mut rng), random_flag(&mut rng))?;
                let p = commeasure::preservers::UnitaryPreserver::new(
                    sym,
                    PhaseRule::Seeded(rng.random::<u64>()),
                    ChoiceRule::Const(rng.random::<bool>()),
                );
                let v = haar_unitary(n, &mut rng);
                let w = haar_unitary(n, &mut rng);
                let before = comm_measure(&v, &w, &spec)?;
                let after = comm_measure(&p.apply(&v)?, &p.apply(&w)?, &spec)?;
                Ok((before - after).abs())
            });
            let (worst, at) = fold_worst(evals)?;
            Ok(Outcome::measured(worst, at.map(|i| format!("pair {i}"))))
        });

        let trials = cfg.trials;
        let dims = cfg.dims.clone();
        run(format!("preservers/density-conjugation/{spec}"), 1e-8, &mut |seed| {
            let evals = exec::map_indexed(trials, |i| {
                let mut rng = task_rng(seed, i as u64);
                let n = dims[i % dims.len()];
                let sym = Symmetry::new(haar_unitary(n, &mut rng), random_flag(&mut rng))?;
                // The complement branch needs spectrum within [0, 2/n];
                // only dimension 2 guarantees that for every density.
                let branch = if n == 2 {
                    ChoiceRule::Seeded(rng.random::<u64>())
                } else {
                    ChoiceRule::Const(false)
                };
                let p = DensityPreserver::new(sym, branch);
                let a = random_density(n, &mut rng);
                let b = random_density(n, &mut rng);
                let before = comm_measure(a.matrix(), b.matrix(), &spec)?;
                let after =
                    comm_measure(p.apply(&a)?.matrix(), p.apply(&b)?.matrix(), &spec)?;
                Ok((before - after).abs())
            });
            let (worst, at) = fold_worst(evals)?;
            Ok(Outcome::measured(worst, at.map(|i| format!("pair {i}"))))
        });
    }

    let trials = cfg.trials;
    let dims = cfg.dims.clone();
    run("preservers/trace-invariance".into(), 1e-10, &mut |seed| {
        let evals = exec::map_indexed(trials, |i| {
            let mut rng = task_rng(seed, i as u64);
            let n = dims[i % dims.len()];
            let sym = Symmetry::new(haar_unitary(n, &mut rng), random_flag(&mut rng))?;
            let p = commeasure::preservers::UnitaryPreserver::new(
                sym,
                PhaseRule::Seeded(rng.random::<u64>()),
                ChoiceRule::Const(rng.random::<bool>()),
            );
            let v = haar_unitary(n, &mut rng);
            Ok((p.apply(&v)?.trace().norm() - v.trace().norm()).abs())
        });
        let (worst, at) = fold_worst(evals)?;
        Ok(Outcome::measured(worst, at.map(|i| format!("operand {i}"))))
    });

    let trials = cfg.trials;
    let dims = cfg.dims.clone();
    run("preservers/diameter-invariance".into(), 1e-10, &mut |seed| {
        let evals = exec::map_indexed(trials, |i| {
            let mut rng = task_rng(seed, i as u64);
            let n = dims[i % dims.len()];
            let sym = Symmetry::new(haar_unitary(n, &mut rng), random_flag(&mut rng))?;
            let branch = if n == 2 {
                ChoiceRule::Seeded(rng.random::<u64>())
            } else {
                ChoiceRule::Const(false)
            };
            let p = DensityPreserver::new(sym, branch);
            let a = random_density(n, &mut rng);
            let before = commeasure::extremal::diam_spectrum(a.matrix())?;
            let after = commeasure::extremal::diam_spectrum(p.apply(&a)?.matrix())?;
            Ok((before - after).abs())
        });
        let (worst, at) = fold_worst(evals)?;
        Ok(Outcome::measured(worst, at.map(|i| format!("operand {i}"))))
    });
}

fn extremal_section(cfg: &VerifyConfig, run: &mut Runner) {
    let norms = cfg.norms.clone();
    let (instances, budget) = (cfg.extremal_instances, cfg.budget);
    let theta_runs = |seed: u64| -> Vec<Result<(f64, f64)>> {
        exec::map_indexed(instances, |i| {
            let spec = &norms[i % norms.len()];
            let v = haar_unitary(2, &mut task_rng(seed, i as u64));
            let closed = theta_closed(&v, spec)?;
            let est = theta_oracle(&v, spec, budget, derive_seed(seed, i as u64))?;
            Ok(((closed - est.value).abs(), est.value - closed))
        })
    };
    run("extremal/theta-gap".into(), 1e-3, &mut |seed| {
        let (worst, at) =
            fold_worst(theta_runs(seed).into_iter().map(|r| r.map(|x| x.0)).collect())?;
        Ok(Outcome::measured(worst, at.map(|i| format!("instance {i}"))))
    });
    run("extremal/theta-excess".into(), 1e-9, &mut |seed| {
        let (worst, at) =
            fold_worst(theta_runs(seed).into_iter().map(|r| r.map(|x| x.1.max(0.0))).collect())?;
        Ok(Outcome::measured(worst, at.map(|i| format!("instance {i}"))))
    });

    let dims = cfg.dims.clone();
    let omega_runs = |seed: u64| -> Vec<Result<(f64, f64)>> {
        exec::map_indexed(instances, |i| {
            let spec = &norms[i % norms.len()];
            let n = dims[i % dims.len()];
            let a = random_density(n, &mut task_rng(seed, i as u64));
            let closed = omega_closed(&a, spec)?;
            let est = omega_oracle(&a, spec, budget, derive_seed(seed, i as u64))?;
            Ok(((closed - est.value).abs(), est.value - closed))
        })
    };
    run("extremal/omega-gap".into(), 1e-3, &mut |seed| {
        let (worst, at) =
            fold_worst(omega_runs(seed).into_iter().map(|r| r.map(|x| x.0)).collect())?;
        Ok(Outcome::measured(worst, at.map(|i| format!("instance {i}"))))
    });
    run("extremal/omega-excess".into(), 1e-9, &mut |seed| {
        let (worst, at) =
            fold_worst(omega_runs(seed).into_iter().map(|r| r.map(|x| x.1.max(0.0))).collect())?;
        Ok(Outcome::measured(worst, at.map(|i| format!("instance {i}"))))
    });
}

fn reconstruct_section(cfg: &VerifyConfig, run: &mut Runner) {
    let reps = cfg.reconstruct_reps;
    run("reconstruct/projection-roundtrip".into(), RESIDUAL_TOL, &mut |seed| {
        let evals: Vec<Result<(f64, Option<String>)>> = exec::map_indexed(reps, |rep| {
            let mut rng = task_rng(seed, rep as u64);
            let flag = if rep % 2 == 0 { LinearityFlag::Linear } else { LinearityFlag::Conjugate };
            let hidden = ProjectionPreserver::new(
                Symmetry::new(haar_unitary(2, &mut rng), flag)?,
                ChoiceRule::Seeded(rng.random::<u64>()),
            )?;
            let h = hidden.clone();
            let oracle = CountingOracle::new(move |p: &Projection| h.apply(p));
            let recon_seed = derive_seed(seed, (1_000_000 + rep) as u64);
            let res = reconstruct_projection_symmetry(&oracle, recon_seed)?;
            if res.queries > 12 {
                return Ok((res.residual, Some(format!("rep {rep}: {} queries", res.queries))));
            }
            if res.sym.flag() != LinearityFlag::Linear {
                return Ok((res.residual, Some(format!("rep {rep}: non-canonical flag"))));
            }
            let (u_hidden, _) = hidden.canonical_symmetry()?;
            let u_dist = phase_aligned_distance(res.sym.u(), &u_hidden)?;
            let bits = match &res.extras {
                commeasure::reconstruct::Extras::ProjectionBits { bits } => bits.clone(),
                _ => return Ok((res.residual, Some(format!("rep {rep}: missing bits")))),
            };
            let mut expected = Vec::new();
            for p in anchor_projections()? {
                expected.push(hidden.canonical_bit_for(&p)?);
            }
            for p in validation_projections(2, recon_seed) {
                expected.push(hidden.canonical_bit_for(&p)?);
            }
            if bits != expected {
                return Ok((res.residual, Some(format!("rep {rep}: bit mismatch"))));
            }
            Ok((res.residual.max(u_dist), None))
        });
        fold_roundtrip(evals)
    });

    let reps = cfg.reconstruct_reps;
    let dims = cfg.dims.clone();
    run("reconstruct/wigner-roundtrip".into(), RESIDUAL_TOL, &mut |seed| {
        let evals: Vec<Result<(f64, Option<String>)>> = exec::map_indexed(reps, |rep| {
            let mut rng = task_rng(seed, rep as u64);
            let n = dims[rep % dims.len()];
            let flag = if (rep / dims.len()).is_multiple_of(2) {
                LinearityFlag::Linear
            } else {
                LinearityFlag::Conjugate
            };
            let u = haar_unitary(n, &mut rng);
            let sym = Symmetry::new(u.clone(), flag)?;
            let s = sym.clone();
            let oracle = CountingOracle::new(move |p: &Projection| {
                Projection::new(commeasure::preservers::apply_symmetry(&s, p.matrix())?)
            });
            let res = reconstruct_wigner(&oracle, n, derive_seed(seed, (1_000_000 + rep) as u64))?;
            if res.queries > 3 * n - 2 {
                return Ok((res.residual, Some(format!("rep {rep}: {} queries", res.queries))));
            }
            if res.sym.flag() != flag {
                return Ok((res.residual, Some(format!("rep {rep}: flag mismatch"))));
            }
            let u_dist = phase_aligned_distance(res.sym.u(), &u)?;
            Ok((res.residual.max(u_dist), None))
        });
        fold_roundtrip(evals)
    });

    let reps = cfg.reconstruct_reps;
    run("reconstruct/linear-roundtrip".into(), RESIDUAL_TOL, &mut |seed| {
        let evals: Vec<Result<(f64, Option<String>)>> = exec::map_indexed(reps, |rep| {
            let mut rng = task_rng(seed, rep as u64);
            let sign = if rep % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let flag = if (rep / 2) % 2 == 0 {
                LinearityFlag::Linear
            } else {
                LinearityFlag::Conjugate
            };
            let hidden = SelfAdjointPreserver::new(
                Symmetry::new(haar_unitary(2, &mut rng), flag)?,
                sign,
                random_hermitian(2, &mut rng),
            )?;
            let basis = commeasure::reconstruct::herm_basis();
            let images = [
                hidden.apply(&basis[0])?,
                hidden.apply(&basis[1])?,
                hidden.apply(&basis[2])?,
                hidden.apply(&basis[3])?,
            ];
            let res =
                reconstruct_selfadjoint_linear(&images, derive_seed(seed, (1_000_000 + rep) as u64))?;
            let canon = hidden.canonical()?;
            let (sign_rec, f_rec) = match &res.extras {
                commeasure::reconstruct::Extras::SelfAdjoint { sign, representer } => {
                    (*sign, representer.clone())
                }
                _ => return Ok((res.residual, Some(format!("rep {rep}: missing extras")))),
            };
            if res.sym.flag() != canon.sym().flag() || sign_rec != canon.sign() {
                return Ok((res.residual, Some(format!("rep {rep}: flag or sign mismatch"))));
            }
            let u_dist = phase_aligned_distance(res.sym.u(), canon.sym().u())?;
            let f_dist = f_rec.sub(canon.representer())?.frobenius_norm();
            Ok((res.residual.max(u_dist).max(f_dist), None))
        });
        fold_roundtrip(evals)
    });
}

fn fold_roundtrip(evals: Vec<Result<(f64, Option<String>)>>) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut at = None;
    let mut structural = None;
    for (i, eval) in evals.into_iter().enumerate() {
        let (v, s) = eval?;
        if v > worst {
            worst = v;
            at = Some(i);
        }
        if structural.is_none() {
            structural = s;
        }
    }
    Ok(Outcome { worst, witness: at.map(|i| format!("rep {i}")), structural })
}

fn classify_section(cfg: &VerifyConfig, run: &mut Runner) {
    let pairs = cfg.classify_pairs;
    let dims = cfg.dims.clone();
    run("classify/scalar-pairs".into(), 1e-9, &mut |seed| {
        let evals = exec::map_indexed(pairs, |k| {
            let mut rng = task_rng(seed, k as u64);
            let n = dims[k % dims.len()];
            let v = haar_unitary(n, &mut rng);
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let z = C64::new(theta.cos(), theta.sin());
            match classify_unitary_pair(&v, &v.scale(z))? {
                PairVerdict::ScalarMultiple(z_rec) => Ok((z_rec - z).norm()),
                other => Err(Error::Inconsistency(format!(
                    "pair {k}: expected a scalar-multiple verdict, got {other:?}"
                ))),
            }
        });
        let (worst, at) = fold_worst(evals)?;
        Ok(Outcome::measured(worst, at.map(|k| format!("pair {k}"))))
    });

    let pairs = cfg.classify_pairs;
    let dims = cfg.dims.clone();
    run("classify/adjoint-pairs".into(), 1e-9, &mut |seed| {
        let evals = exec::map_indexed(pairs, |k| {
            let mut rng = task_rng(seed, k as u64);
            let n = dims[k % dims.len()];
            let v = haar_unitary(n, &mut rng);
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let z = C64::new(theta.cos(), theta.sin());
            match classify_unitary_pair(&v, &v.adjoint().scale(z))? {
                PairVerdict::ScalarMultipleOfAdjoint(z_rec) => Ok((z_rec - z).norm()),
                other => Err(Error::Inconsistency(format!(
                    "pair {k}: expected an adjoint-multiple verdict, got {other:?}"
                ))),
            }
        });
        let (worst, at) = fold_worst(evals)?;
        Ok(Outcome::measured(worst, at.map(|k| format!("pair {k}"))))
    });

    let pairs = cfg.classify_pairs;
    let dims = cfg.dims.clone();
    let spec = cfg.norms[0].clone();
    run("classify/unrelated-pairs".into(), 0.0, &mut |seed| {
        let evals = exec::map_indexed(pairs, |k| {
            let mut rng = task_rng(seed, k as u64);
            let n = dims[k % dims.len()];
            let v1 = haar_unitary(n, &mut rng);
            let v2 = haar_unitary(n, &mut rng);
            let verdict = classify_unitary_pair(&v1, &v2)?;
            if verdict != PairVerdict::Neither {
                return Ok(1.0);
            }
            let witness = find_mc_violation(&v1, &v2, &spec, 1000, derive_seed(seed, k as u64))?;
            Ok(if witness.is_some() { 0.0 } else { 1.0 })
        });
        let mut slipped = 0.0f64;
        let mut witness = None;
        for (k, eval) in evals.into_iter().enumerate() {
            if eval? > 0.0 {
                slipped += 1.0;
                witness.get_or_insert_with(|| {
                    format!("pair {k}: related verdict or no violating probe")
                });
            }
        }
        Ok(Outcome { worst: slipped, witness, structural: None })
    });
}
