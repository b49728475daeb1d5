//! The `commeasure` binary.
//!
//! Four entry points: `verify` runs seeded invariant suites and prints
//! a JSON report, `reconstruct` recovers a hidden symmetry from a probe
//! table or a live hidden-map file, `extremal` compares a closed form
//! against its sampling oracle, and `gen` emits seeded matrices and
//! probe tables.
//!
//! Exit codes, exhaustively: 0 success, 1 a verification or
//! classification verdict of "fail"/"rejected", 2 malformed input or
//! usage.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use commeasure::ensembles::derive_seed;
use commeasure::extremal::{omega_closed, omega_oracle, theta_closed, theta_oracle};
use commeasure::json::{
    self, flag_from_token, AnyPreserver, ExtremalDto, PairVerdictDto, WitnessDto,
};
use commeasure::mat::CMat;
use commeasure::measures::{Density, Projection};
use commeasure::norms::NormSpec;
use commeasure::preservers::Symmetry;
use commeasure::reconstruct::{
    classify_unitary_pair, find_mc_violation, herm_basis, reconstruct_projection_symmetry,
    reconstruct_selfadjoint_linear, reconstruct_wigner, CountingOracle, Extras, PairVerdict,
    ProbeKind, ProbeSet, TableOracle, ANCHOR_MATCH_TOL, RESIDUAL_TOL,
};
use commeasure::{Error, Result};
use commeasure_cli::gen::{
    gen_matrix, gen_preserver, gen_wigner, MatrixKind, PreserverKind, WignerSidecar,
};
use commeasure_cli::suites::{default_norm_grid, run_verify, Suite, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "commeasure",
    version,
    about = "Measures of operator commutativity: verification suites, \
             symmetry recovery, extremal estimates, seeded generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded invariant suites and print the report as JSON.
    Verify(VerifyArgs),
    /// Recover a hidden symmetry from probe data.
    Reconstruct(ReconstructArgs),
    /// Compare an extremal closed form against its sampling oracle.
    Extremal(ExtremalArgs),
    /// Emit seeded matrices and probe tables as JSON.
    #[command(subcommand)]
    Gen(GenCommand),
}

/// Inclusive dimension list: "2..5" or "2,3,4".
#[derive(Clone, Debug)]
struct DimList(Vec<usize>);

impl FromStr for DimList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: &str| {
            Error::Parse(format!(
                "invalid dimension list {s:?} ({detail}); \
                 expected \"lo..hi\" (inclusive) or a comma list like \"2,3,4\""
            ))
        };
        let dims = if let Some((lo, hi)) = s.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| bad("bad lower bound"))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad("bad upper bound"))?;
            if lo > hi {
                return Err(bad("empty range"));
            }
            (lo..=hi).collect()
        } else {
            s.split(',')
                .map(|tok| tok.trim().parse::<usize>().map_err(|_| bad("bad entry")))
                .collect::<Result<Vec<_>>>()?
        };
        if dims.is_empty() {
            return Err(bad("empty"));
        }
        Ok(DimList(dims))
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: all, det2d, mcd, mcp, star, preservers, extremal, norms.
    #[arg(long, default_value = "all")]
    suite: Suite,
    /// Norm tokens, comma separated or repeated; defaults to the grid
    /// op,tr,fro,schatten:3,kyfan:2.
    #[arg(long = "norm", value_delimiter = ',')]
    norms: Vec<NormSpec>,
    /// Random trials per check.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Ambient dimensions, "lo..hi" inclusive or a comma list.
    #[arg(long, default_value = "2..5")]
    dims: DimList,
    /// Master seed; fixed seed means byte-identical report modulo duration.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report JSON to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Test hook: scale the closed-form constants by 1.01 so every
    /// comparison check must fail; proves the harness is not vacuous.
    #[arg(long, hide = true)]
    corrupt_norm_constant: bool,
}

/// Reconstruction targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ReconKind {
    Projection,
    Wigner,
    Linear,
    UnitaryPair,
}

impl FromStr for ReconKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(ReconKind::Projection),
            "wigner" => Ok(ReconKind::Wigner),
            "linear" => Ok(ReconKind::Linear),
            "unitary-pair" => Ok(ReconKind::UnitaryPair),
            other => Err(Error::Parse(format!(
                "unknown reconstruction kind {other:?}, expected one of \
                 projection, wigner, linear, unitary-pair"
            ))),
        }
    }
}

#[derive(Args)]
struct ReconstructArgs {
    /// What to recover: projection, wigner, linear, unitary-pair.
    kind: ReconKind,
    /// Probe table JSON file ("-" reads stdin).
    #[arg(long)]
    probes: Option<String>,
    /// Hidden-map JSON file queried as a live oracle
    /// (projection and linear kinds).
    #[arg(long, conflicts_with = "probes")]
    preserver: Option<String>,
    /// Hidden symmetry JSON file {"U", "flag"} queried as a live
    /// oracle (wigner kind).
    #[arg(long, conflicts_with_all = ["probes", "preserver"])]
    symmetry: Option<String>,
    /// Validation seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Norm for the violation search (unitary-pair only).
    #[arg(long, default_value = "op")]
    norm: NormSpec,
    /// Violation-search trials per unclassified pair (unitary-pair only).
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

/// Extremal quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ExtremalKind {
    Theta,
    Omega,
}

impl FromStr for ExtremalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(ExtremalKind::Theta),
            "omega" => Ok(ExtremalKind::Omega),
            other => Err(Error::Parse(format!(
                "unknown extremal kind {other:?}, expected theta or omega"
            ))),
        }
    }
}

#[derive(Args)]
struct ExtremalArgs {
    /// Which supremum: theta (against a unitary) or omega (against a
    /// density).
    kind: ExtremalKind,
    /// Matrix JSON file ("-" reads stdin).
    #[arg(long)]
    matrix: String,
    #[arg(long, default_value = "op")]
    norm: NormSpec,
    /// Oracle sample budget.
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum GenCommand {
    /// A Haar-distributed unitary matrix.
    Unitary(GenMatrixArgs),
    /// A Gaussian Hermitian matrix.
    Hermitian(GenMatrixArgs),
    /// A random density operator.
    Density(GenMatrixArgs),
    /// A random rank-one projection.
    Projection(GenMatrixArgs),
    /// A probe table sampled from a hidden preserver, with the hidden
    /// map written to a sidecar file.
    Preserver(GenPreserverArgs),
    /// A rank-one probe table sampled from a hidden symmetry, with the
    /// symmetry written to a sidecar file.
    Wigner(GenWignerArgs),
}

#[derive(Args)]
struct GenMatrixArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the matrix JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenPreserverArgs {
    /// Preserver family: thm1, thm2, thm3, thm4, lpm.
    #[arg(long)]
    kind: PreserverKind,
    /// Ambient dimension; defaults to the family's natural dimension.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random probes appended after the reconstruction anchors.
    #[arg(long, default_value_t = 32)]
    probes: usize,
    /// Also write the probe table JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the hidden map here; defaults to <out>.hidden.json when
    /// --out is given, otherwise the hidden map is not written.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct GenWignerArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random probes appended after the 3n - 2 reconstruction probes.
    #[arg(long, default_value_t = 32)]
    probes: usize,
    /// Also write the probe table JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the hidden symmetry here; defaults to <out>.hidden.json
    /// when --out is given, otherwise it is not written.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NotPreserver(_) | Error::AmbiguousBranch(_) | Error::Inconsistency(_) => 1,
                _ => 2,
            })
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Extremal(args) => cmd_extremal(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

/// Reads a file, or stdin when the path is "-".
fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}")))
    }
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

/// Prints the payload and mirrors it to `out` when given.
fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    print!("{text}");
    if let Some(path) = out {
        write_output(path, text)?;
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let mut cfg = VerifyConfig::new(args.suite, args.seed);
    if !args.norms.is_empty() {
        cfg.norms = args.norms;
    } else {
        cfg.norms = default_norm_grid();
    }
    cfg.trials = args.trials;
    cfg.dims = args.dims.0;
    cfg.corrupt_norm_constant = args.corrupt_norm_constant;
    let report = run_verify(&cfg)?;
    let text = report.to_json()?;
    emit(&text, args.json.as_deref())?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<ExitCode> {
    match args.kind {
        ReconKind::Projection => {
            let res = if let Some(path) = &args.probes {
                let set = json::read_probe_set(&read_input(path)?)?;
                let oracle = TableOracle::new(&set)?;
                reconstruct_projection_symmetry(&oracle, args.seed)?
            } else if let Some(path) = &args.preserver {
                let dto = json::read_preserver(&read_input(path)?)?;
                let map = match dto.build()? {
                    AnyPreserver::Projection(p) => p,
                    _ => {
                        return Err(Error::InvalidInput(
                            "the hidden map is not a projection-map preserver".into(),
                        ))
                    }
                };
                let oracle = CountingOracle::new(|p: &Projection| map.apply(p));
                reconstruct_projection_symmetry(&oracle, args.seed)?
            } else {
                return Err(Error::InvalidInput(
                    "provide --probes or --preserver".into(),
                ));
            };
            print!("{}", json::write_reconstruction(&res)?);
            Ok(ExitCode::SUCCESS)
        }
        ReconKind::Wigner => {
            let res = if let Some(path) = &args.probes {
                let set = json::read_probe_set(&read_input(path)?)?;
                let dim = set.dim;
                let oracle = TableOracle::new(&set)?;
                reconstruct_wigner(&oracle, dim, args.seed)?
            } else if let Some(path) = &args.symmetry {
                let text = read_input(path)?;
                let sidecar: WignerSidecar = serde_json::from_str(&text)
                    .map_err(|e| Error::Parse(format!("hidden symmetry file: {e}")))?;
                let sym =
                    Symmetry::new(sidecar.u.to_matrix()?, flag_from_token(&sidecar.flag)?)?;
                let dim = sym.dim();
                let oracle =
                    CountingOracle::new(|p: &Projection| Projection::new(sym.apply(p.matrix())?));
                reconstruct_wigner(&oracle, dim, args.seed)?
            } else {
                return Err(Error::InvalidInput(
                    "provide --probes or --symmetry".into(),
                ));
            };
            print!("{}", json::write_reconstruction(&res)?);
            Ok(ExitCode::SUCCESS)
        }
        ReconKind::Linear => {
            let res = if let Some(path) = &args.probes {
                let set = json::read_probe_set(&read_input(path)?)?;
                reconstruct_linear_from_table(&set, args.seed)?
            } else if let Some(path) = &args.preserver {
                let dto = json::read_preserver(&read_input(path)?)?;
                let map = match dto.build()? {
                    AnyPreserver::SelfAdjoint(p) => p,
                    _ => {
                        return Err(Error::InvalidInput(
                            "the hidden map is not a Hermitian-map preserver".into(),
                        ))
                    }
                };
                let basis = herm_basis();
                let images = [
                    map.apply(&basis[0])?,
                    map.apply(&basis[1])?,
                    map.apply(&basis[2])?,
                    map.apply(&basis[3])?,
                ];
                reconstruct_selfadjoint_linear(&images, args.seed)?
            } else {
                return Err(Error::InvalidInput(
                    "provide --probes or --preserver".into(),
                ));
            };
            print!("{}", json::write_reconstruction(&res)?);
            Ok(ExitCode::SUCCESS)
        }
        ReconKind::UnitaryPair => {
            let path = args.probes.as_ref().ok_or_else(|| {
                Error::InvalidInput("provide --probes with a unitary-pair table".into())
            })?;
            let set = json::read_probe_set(&read_input(path)?)?;
            if set.kind != ProbeKind::UnitaryPair {
                return Err(Error::InvalidInput(format!(
                    "expected a unitary-pair probe set, got {:?}",
                    set.kind
                )));
            }
            let mut verdicts = Vec::with_capacity(set.samples.len());
            let mut rejected = false;
            for (idx, (v, w)) in set.samples.iter().enumerate() {
                let verdict = classify_unitary_pair(v, w)?;
                let violation = if verdict == PairVerdict::Neither {
                    rejected = true;
                    find_mc_violation(v, w, &args.norm, args.trials, derive_seed(args.seed, idx as u64))?
                } else {
                    None
                };
                verdicts.push(PairVerdictDto::from_verdict(&verdict, violation.as_ref()));
            }
            print!("{}", json::to_json(&verdicts)?);
            Ok(if rejected { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
    }
}

/// Descriptions of the four Hermitian basis probes a linear-map table
/// must contain, in order.
const HERM_BASIS_NAMES: [&str; 4] = [
    "diag(1, 0)",
    "diag(0, 1)",
    "the real off-diagonal unit [[0, 1], [1, 0]]",
    "the imaginary off-diagonal unit [[0, i], [-i, 0]]",
];

/// Locates the four basis images in a sampled Hermitian-map table,
/// reconstructs, then replays every remaining sample through the
/// recovered map and folds the worst deviation into the residual.
fn reconstruct_linear_from_table(
    set: &ProbeSet,
    seed: u64,
) -> Result<commeasure::reconstruct::ReconstructionResult> {
    if set.kind != ProbeKind::HermitianLinearMap {
        return Err(Error::InvalidInput(format!(
            "expected a hermitian-linear-map probe set, got {:?}",
            set.kind
        )));
    }
    if set.dim != 2 {
        return Err(Error::DimensionMismatch(format!(
            "linear reconstruction works in dimension 2, got {}",
            set.dim
        )));
    }
    let basis = herm_basis();
    let mut images: Vec<CMat> = Vec::with_capacity(4);
    for (b, name) in basis.iter().zip(HERM_BASIS_NAMES) {
        let hit = set
            .samples
            .iter()
            .find(|(input, _)| input.sub(b).map(|d| d.max_abs()).unwrap_or(f64::MAX) <= ANCHOR_MATCH_TOL);
        match hit {
            Some((_, output)) => images.push(output.clone()),
            None => {
                return Err(Error::InvalidInput(format!(
                    "probe table lacks the basis sample {name}; the four required \
                     probes are {}",
                    HERM_BASIS_NAMES.join(", ")
                )))
            }
        }
    }
    let images: [CMat; 4] = [
        images[0].clone(),
        images[1].clone(),
        images[2].clone(),
        images[3].clone(),
    ];
    let mut res = reconstruct_selfadjoint_linear(&images, seed)?;

    // The recovered map must reproduce every tabulated sample, not
    // just the basis probes it was read off from.
    let (sign, representer) = match &res.extras {
        Extras::SelfAdjoint { sign, representer } => (*sign, representer.clone()),
        _ => {
            return Err(Error::Inconsistency(
                "linear reconstruction returned no sign/representer".into(),
            ))
        }
    };
    let map =
        commeasure::preservers::SelfAdjointPreserver::new(res.sym.clone(), sign, representer)?;
    let mut worst = res.residual;
    for (idx, (input, output)) in set.samples.iter().enumerate() {
        let dev = map.apply(input)?.sub(output)?.max_abs();
        if dev > worst {
            worst = dev;
        }
        if dev > RESIDUAL_TOL {
            return Err(Error::NotPreserver(format!(
                "sample {idx} deviates from the recovered map by {dev:.3e}"
            )));
        }
    }
    res.residual = worst;
    Ok(res)
}

fn cmd_extremal(args: ExtremalArgs) -> Result<ExitCode> {
    let m = json::read_matrix(&read_input(&args.matrix)?)?;
    let (closed, est) = match args.kind {
        ExtremalKind::Theta => (
            theta_closed(&m, &args.norm)?,
            theta_oracle(&m, &args.norm, args.budget, args.seed)?,
        ),
        ExtremalKind::Omega => {
            let a = Density::new(m)?;
            (
                omega_closed(&a, &args.norm)?,
                omega_oracle(&a, &args.norm, args.budget, args.seed)?,
            )
        }
    };
    let dto = ExtremalDto {
        closed,
        oracle: est.value,
        witness: WitnessDto::from_witness(&est.witness),
        gap: (closed - est.value).abs(),
    };
    print!("{}", json::to_json(&dto)?);
    Ok(ExitCode::SUCCESS)
}

fn sidecar_path(out: Option<&Path>, sidecar: Option<PathBuf>) -> Option<PathBuf> {
    sidecar.or_else(|| {
        out.map(|p| {
            let mut name = p.as_os_str().to_owned();
            name.push(".hidden.json");
            PathBuf::from(name)
        })
    })
}

fn cmd_gen(command: GenCommand) -> Result<ExitCode> {
    match command {
        GenCommand::Unitary(a) => gen_matrix_cmd(MatrixKind::Unitary, a),
        GenCommand::Hermitian(a) => gen_matrix_cmd(MatrixKind::Hermitian, a),
        GenCommand::Density(a) => gen_matrix_cmd(MatrixKind::Density, a),
        GenCommand::Projection(a) => gen_matrix_cmd(MatrixKind::Projection, a),
        GenCommand::Preserver(a) => {
            let dim = a.dim.unwrap_or_else(|| a.kind.default_dim());
            let g = gen_preserver(a.kind, dim, a.seed, a.probes)?;
            emit(&json::write_probe_set(&g.set)?, a.out.as_deref())?;
            if let Some(path) = sidecar_path(a.out.as_deref(), a.sidecar) {
                write_output(&path, &json::write_preserver(&g.spec)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        GenCommand::Wigner(a) => {
            let g = gen_wigner(a.dim, a.seed, a.probes)?;
            emit(&json::write_probe_set(&g.set)?, a.out.as_deref())?;
            if let Some(path) = sidecar_path(a.out.as_deref(), a.sidecar) {
                write_output(&path, &json::to_json(&g.sidecar)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn gen_matrix_cmd(kind: MatrixKind, args: GenMatrixArgs) -> Result<ExitCode> {
    let m = gen_matrix(kind, args.dim, args.seed)?;
    emit(&json::write_matrix(&m)?, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
