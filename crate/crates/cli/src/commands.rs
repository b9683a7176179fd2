use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use interlace::frames::{
    bt_partition, split_frame_feichtinger, split_riesz_eps, system_bounds, GramSplit, SplitOptions, SystemKind,
    VectorSystem,
};
use interlace::io::{self, GraphFile};
use interlace::linalg::CMatrix;
use interlace::mixed::{
    derandomized_realization, expected_char_poly, expected_root_bound_check, mixed_char_with_budget,
    rank1_oracle_check,
};
use interlace::partition::{
    pave_general, pave_projector, pave_selfadjoint, weaver_partition, RankOneFactor, SearchOptions, WeaverMethod,
};
use interlace::ramanujan::{
    build_ramanujan_family, is_ramanujan, matching_polynomial_with_budget, two_lift, SigningMethod,
};
use interlace::stable::probe_real_stability;
use interlace::{Error, HermitianMatrix};

use crate::report::{read_input, CliError, CliResult};

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Mixed characteristic polynomial of a PSD family, or expected
    /// characteristic polynomial of a set of random rank-one matrices
    MixedChar(MixedCharArgs),
    /// Partition rank-one matrices into r parts of small norm
    Weaver(WeaverArgs),
    /// Pave a projector, a zero-diagonal Hermitian or a zero-diagonal matrix
    Pave(PaveArgs),
    /// Riesz and frame bounds, and splitting of vector systems
    Frames(FramesArgs),
    /// Bipartite Ramanujan families by 2-lifts, or certificates for a graph file
    Ramanujan(RamanujanArgs),
    /// Sample real lines through a determinantal polynomial and test each
    /// restriction for real-rootedness
    StableProbe(ProbeArgs),
    /// Re-run a saved report and compare its results
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::MixedChar(_) => "mixed-char",
            Command::Weaver(_) => "weaver",
            Command::Pave(_) => "pave",
            Command::Frames(_) => "frames",
            Command::Ramanujan(_) => "ramanujan",
            Command::StableProbe(_) => "stable-probe",
            Command::Verify(_) => "verify",
        }
    }

    pub fn input(&self) -> Option<&std::path::Path> {
        match self {
            Command::MixedChar(a) => a.input.as_deref().or(a.variables.as_deref()),
            Command::Weaver(a) => Some(&a.input),
            Command::Pave(a) => Some(&a.input),
            Command::Frames(FramesArgs { action: FramesAction::Split(a) }) => Some(&a.input),
            Command::Frames(FramesArgs { action: FramesAction::Bounds(a) }) => Some(&a.input),
            Command::Ramanujan(a) => a.input.as_deref(),
            Command::StableProbe(a) => Some(&a.input),
            Command::Verify(a) => Some(&a.report),
        }
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct MixedCharArgs {
    /// Matrix family, in the determinantal instance format
    #[arg(long, required_unless_present = "variables", conflicts_with = "variables")]
    pub input: Option<PathBuf>,
    /// Variable-set file of random rank-one matrices
    #[arg(long)]
    pub variables: Option<PathBuf>,
    /// Also run the greedy conditional-expectation pass
    #[arg(long, requires = "variables")]
    pub derandomize: bool,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct WeaverArgs {
    /// Vector file, one vector per line as interleaved real/imaginary parts
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// exhaustive | derandomized | random | auto
    #[arg(long, default_value = "auto")]
    pub method: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct PaveArgs {
    /// Matrix file
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// projector | selfadjoint | general | auto
    #[arg(long, default_value = "auto")]
    pub mode: String,
    /// Search method for the underlying Weaver partitions
    #[arg(long, default_value = "auto")]
    pub method: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FramesArgs {
    #[command(subcommand)]
    pub action: FramesAction,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FramesAction {
    /// Split a unit-norm system into well-conditioned parts
    Split(SplitArgs),
    /// Lower and upper Riesz or frame bounds
    Bounds(BoundsArgs),
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// repsilon | feichtinger | bt
    #[arg(long)]
    pub mode: String,
    /// Target Gram deviation for repsilon
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of parts per paving step; chosen from the target when absent
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// riesz | frame
    #[arg(long, default_value = "riesz")]
    pub kind: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct RamanujanArgs {
    /// Degree of the family, starting from K_{d,d}
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// exhaustive | random | greedy | auto
    #[arg(long, default_value = "auto")]
    pub method: String,
    /// Graph file to certify instead of building a family
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ProbeArgs {
    /// Determinantal instance file
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub lines: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Report written by an earlier run
    #[arg(long)]
    pub report: PathBuf,
}

/// Parameters shared by all commands that influence results.
#[derive(Args, Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RunParams {
    /// Seed for every stochastic step
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cap on enumerated partitions, signings or polynomial evaluations
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub budget: u64,
    /// Root extraction tolerance, and numeric slack for verify
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,
}

/// Result of a command before it is wrapped into a report.
pub struct Outcome {
    pub results: Value,
    pub pass: bool,
    pub digest: Option<String>,
    /// JSON pointer of the default plottable sequence.
    pub plot_field: Option<String>,
    /// Files written to the output directory, as `(name, contents)`.
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn new(results: Value, pass: bool, digest: Option<String>, plot_field: &str) -> Self {
        Self { results, pass, digest, plot_field: Some(plot_field.into()), artifacts: Vec::new() }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn parse_method<T: std::str::FromStr<Err = Error>>(s: &str) -> CliResult<T> {
    s.parse().map_err(|e: Error| CliError::usage(e.to_string()))
}

fn in_file(path: &std::path::Path, e: Error) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{}: {}", path.display(), err.message);
    err
}

pub fn run(cmd: &Command, p: &RunParams) -> CliResult<Outcome> {
    match cmd {
        Command::MixedChar(a) => mixed_char(a, p),
        Command::Weaver(a) => weaver(a, p),
        Command::Pave(a) => pave(a, p),
        Command::Frames(FramesArgs { action: FramesAction::Split(a) }) => frames_split(a, p),
        Command::Frames(FramesArgs { action: FramesAction::Bounds(a) }) => frames_bounds(a),
        Command::Ramanujan(a) => ramanujan(a, p),
        Command::StableProbe(a) => stable_probe(a, p),
        Command::Verify(_) => unreachable!("verify is dispatched by the caller"),
    }
}

fn mixed_char(a: &MixedCharArgs, p: &RunParams) -> CliResult<Outcome> {
    if let Some(path) = &a.input {
        let (text, digest) = read_input(path)?;
        let family = io::parse_determinantal(&text).map_err(|e| in_file(path, e))?;
        let mats = family.matrices();
        let mu = mixed_char_with_budget(mats, p.budget)?;
        let roots = mu.real_roots_tol(p.tol)?;
        let rank_one = family.is_rank_one();
        let check = if rank_one { Some(rank1_oracle_check(mats)?) } else { None };
        let pass = check.as_ref().is_none_or(|c| c.pass);
        let results = json!({
            "m": family.m(),
            "d": family.d(),
            "rank_one": rank_one,
            "coefficients": mu.coeffs(),
            "polynomial": io::polynomial_to_text(&mu),
            "roots": roots,
            "largest_root": roots.last(),
            "rank_one_check": check.map(|c| json!({"max_error": c.max_error, "tolerance": c.tolerance, "pass": c.pass})),
        });
        return Ok(Outcome::new(results, pass, Some(digest), "/roots"));
    }
    let path = a.variables.as_ref().expect("clap enforces input or variables");
    let (text, digest) = read_input(path)?;
    let vars = io::parse_variable_set(&text).map_err(|e| in_file(path, e))?;
    let expected = expected_char_poly(&vars)?;
    let roots = expected.poly.real_roots_tol(p.tol)?;
    let (root_bound, note) = match expected_root_bound_check(&vars) {
        Ok(r) => (Some(r), None),
        Err(Error::Precondition(msg)) => (None, Some(msg)),
        Err(e) => return Err(e.into()),
    };
    let derandomization = if a.derandomize { Some(derandomized_realization(&vars, p.budget)?) } else { None };
    let pass = root_bound.as_ref().is_none_or(|r| r.pass) && derandomization.as_ref().is_none_or(|d| d.pass);
    let results = json!({
        "variables": vars.len(),
        "coefficients": expected.poly.coeffs(),
        "polynomial": io::polynomial_to_text(&expected.poly),
        "roots": roots,
        "largest_root": roots.last(),
        "enumeration_error": expected.enumeration_error,
        "root_bound": root_bound,
        "root_bound_skipped": note,
        "derandomization": derandomization,
    });
    let plot = if a.derandomize { "/derandomization/chain" } else { "/roots" };
    Ok(Outcome::new(results, pass, Some(digest), plot))
}

fn weaver(a: &WeaverArgs, p: &RunParams) -> CliResult<Outcome> {
    let (text, digest) = read_input(&a.input)?;
    let vectors = io::parse_vectors(&text).map_err(|e| in_file(&a.input, e))?;
    let factors: Vec<RankOneFactor> = vectors.into_iter().map(RankOneFactor::new).collect();
    let opts = SearchOptions { method: parse_method::<WeaverMethod>(&a.method)?, seed: p.seed, budget: p.budget };
    let solution = weaver_partition(&factors, a.r, opts)?;
    let pass = solution.certificate.pass;
    Ok(Outcome::new(to_value(&solution), pass, Some(digest), "/certificate/part_norms"))
}

fn pave(a: &PaveArgs, p: &RunParams) -> CliResult<Outcome> {
    let (text, digest) = read_input(&a.input)?;
    let m = io::parse_matrix(&text).map_err(|e| in_file(&a.input, e))?;
    let opts = SearchOptions { method: parse_method::<WeaverMethod>(&a.method)?, seed: p.seed, budget: p.budget };
    let hermitian = HermitianMatrix::new(m.clone()).ok();
    let mode = match a.mode.as_str() {
        "auto" => match &hermitian {
            Some(h) if is_projector(h) => "projector",
            Some(_) => "selfadjoint",
            None => "general",
        },
        "projector" | "selfadjoint" | "general" => a.mode.as_str(),
        other => return Err(CliError::usage(format!("unknown paving mode {other:?}"))),
    };
    let need_hermitian = || hermitian.clone().ok_or_else(|| CliError::usage("matrix is not Hermitian"));
    let (mut results, pass) = match mode {
        "projector" => {
            let r = pave_projector(&need_hermitian()?, a.r, opts)?;
            (to_value(&r), r.pass)
        }
        "selfadjoint" => {
            let r = pave_selfadjoint(&need_hermitian()?, a.r, opts)?;
            (to_value(&r), r.pass)
        }
        _ => {
            let r = pave_general(&m, a.r, opts)?;
            (to_value(&r), r.pass)
        }
    };
    results["mode"] = json!(mode);
    Ok(Outcome::new(results, pass, Some(digest), "/norms"))
}

fn is_projector(h: &HermitianMatrix) -> bool {
    HermitianMatrix::new(h.as_matrix() * h.as_matrix()).is_ok_and(|sq| sq.max_abs_diff(h) <= 1e-8)
}

fn split_results(split: &GramSplit) -> Value {
    let mut v = to_value(split);
    v["part_lower"] = json!(split.parts.iter().map(|q| q.lower).collect::<Vec<_>>());
    v["part_upper"] = json!(split.parts.iter().map(|q| q.upper).collect::<Vec<_>>());
    v
}

fn frames_split(a: &SplitArgs, p: &RunParams) -> CliResult<Outcome> {
    let (text, digest) = read_input(&a.input)?;
    let vectors = io::parse_vectors(&text).map_err(|e| in_file(&a.input, e))?;
    let opts = SplitOptions {
        r: a.r,
        recursive: true,
        search: SearchOptions { method: WeaverMethod::Auto, seed: p.seed, budget: p.budget },
    };
    let (mut results, pass) = match a.mode.as_str() {
        "repsilon" => {
            let eps = a.epsilon.ok_or_else(|| CliError::usage("--epsilon is required for repsilon"))?;
            let split = split_riesz_eps(&VectorSystem::new(vectors, SystemKind::Riesz)?, eps, opts)?;
            (split_results(&split), split.pass)
        }
        "feichtinger" => {
            let s = split_frame_feichtinger(&VectorSystem::new(vectors, SystemKind::Frame)?, opts)?;
            let mut v = to_value(&s);
            v["part_lower"] = split_results(&s.split)["part_lower"].clone();
            v["part_upper"] = split_results(&s.split)["part_upper"].clone();
            (v, s.pass)
        }
        "bt" => {
            let dim = vectors.first().map_or(0, |v| v.len());
            let t = CMatrix::from_fn(dim, vectors.len(), |i, k| vectors[k][i]);
            let s = bt_partition(&t, opts)?;
            (to_value(&s), s.pass)
        }
        other => return Err(CliError::usage(format!("unknown split mode {other:?}"))),
    };
    results["mode"] = json!(a.mode);
    let plot = if a.mode == "bt" { "/part_lower" } else { "/part_upper" };
    Ok(Outcome::new(results, pass, Some(digest), plot))
}

fn frames_bounds(a: &BoundsArgs) -> CliResult<Outcome> {
    let (text, digest) = read_input(&a.input)?;
    let vectors = io::parse_vectors(&text).map_err(|e| in_file(&a.input, e))?;
    let kind = match a.kind.as_str() {
        "riesz" => SystemKind::Riesz,
        "frame" => SystemKind::Frame,
        other => return Err(CliError::usage(format!("unknown system kind {other:?}"))),
    };
    let system = VectorSystem::new(vectors, kind)?;
    let bounds = system_bounds(&system)?;
    let spectrum = match kind {
        SystemKind::Riesz => system.gram().eigenvalues(),
        SystemKind::Frame => system.frame_operator().eigenvalues(),
    };
    let results = json!({
        "kind": a.kind,
        "vectors": system.len(),
        "dim": system.dim(),
        "lower": bounds.lower,
        "upper": bounds.upper,
        "spectrum": spectrum,
    });
    Ok(Outcome::new(results, true, Some(digest), "/spectrum"))
}

fn ramanujan(a: &RamanujanArgs, p: &RunParams) -> CliResult<Outcome> {
    let method = parse_method::<SigningMethod>(&a.method)?;
    if let Some(path) = &a.input {
        return certify_graph(path, p);
    }
    let d = a.degree.expect("clap enforces degree or input");
    let family = build_ramanujan_family(d, a.levels, method, p.seed, p.budget)?;
    let pass = family.pass();
    let mut results = to_value(&family);
    results["search_or_resource"] = json!(family.failure.as_ref().is_some_and(|f| f.search_or_resource));
    results["sizes"] = json!(family.graphs.iter().map(|g| g.n()).collect::<Vec<_>>());
    let last = family.certificates.len().saturating_sub(1);
    let mut outcome = Outcome::new(results, pass, None, &format!("/certificates/{last}/eigenvalues"));
    for (k, g) in family.graphs.iter().enumerate() {
        outcome.artifacts.push((format!("level{k}.graph"), io::graph_to_text(g)));
    }
    for (k, s) in family.signings.iter().enumerate() {
        outcome.artifacts.push((format!("level{k}.signing"), io::signed_graph_to_text(&s.signed)));
    }
    Ok(outcome)
}

fn certify_graph(path: &std::path::Path, p: &RunParams) -> CliResult<Outcome> {
    let (text, digest) = read_input(path)?;
    let file = io::parse_graph(&text).map_err(|e| in_file(path, e))?;
    let (results, pass) = match file {
        GraphFile::Plain(g) => {
            let certificate = is_ramanujan(&g)?;
            let matching_roots = matching_polynomial_with_budget(&g, p.budget)?.real_roots_tol(p.tol)?;
            let matching_max = matching_roots.iter().map(|r| r.abs()).fold(0.0, f64::max);
            let matching_pass = matching_max <= certificate.bound + 1e-8;
            let pass = certificate.pass && matching_pass;
            let results = json!({
                "certificate": certificate,
                "matching_roots": matching_roots,
                "matching_root_max": matching_max,
                "matching_pass": matching_pass,
            });
            (results, pass)
        }
        GraphFile::Signed(sg) => {
            let lift = two_lift(&sg)?;
            let certificate = match is_ramanujan(&lift.graph) {
                Ok(c) => Some(c),
                Err(Error::Domain(_) | Error::Precondition(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let pass = lift.report.pass() && certificate.as_ref().is_none_or(|c| c.pass);
            let results = json!({
                "lift": lift.report,
                "lift_edges": lift.graph.edges(),
                "certificate": certificate,
            });
            (results, pass)
        }
    };
    let plot = if results["certificate"].is_null() { "/lift/lift_spectrum" } else { "/certificate/eigenvalues" };
    Ok(Outcome::new(results, pass, Some(digest), plot))
}

fn stable_probe(a: &ProbeArgs, p: &RunParams) -> CliResult<Outcome> {
    let (text, digest) = read_input(&a.input)?;
    let poly = io::parse_determinantal(&text).map_err(|e| in_file(&a.input, e))?;
    let probe = probe_real_stability(&poly, a.lines, p.seed)?;
    let pass = probe.passed;
    let mut outcome = Outcome::new(to_value(&probe), pass, Some(digest), "");
    outcome.plot_field = None;
    Ok(outcome)
}
