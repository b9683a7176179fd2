//! Weaver partitions of rank-one decompositions of the identity, paving of
//! projectors by diagonal projectors, and Anderson paving of zero-diagonal
//! matrices.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, DiagonalProjector, HermitianMatrix};
use crate::mixed::{derandomization_cost, derandomized_realization, DiscreteMatrixVariable, MAX_GENERAL_VARS};

/// Default cap on enumeration work (partitions scanned, samples drawn,
/// characteristic polynomials evaluated).
pub const DEFAULT_BUDGET: u64 = 1 << 20;
/// Slack on the partition bounds.
pub const BOUND_TOL: f64 = 1e-8;
/// Tolerance on `Σ A_i = I`.
pub const IDENTITY_TOL: f64 = 1e-8;

/// A rank-one PSD matrix `v v*`.
#[derive(Clone, Debug)]
pub struct RankOneFactor {
    v: CVector,
}

impl RankOneFactor {
    pub fn new(v: CVector) -> Self {
        Self { v }
    }

    pub fn vector(&self) -> &CVector {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// `‖v v*‖ = ‖v‖²`.
    pub fn norm(&self) -> f64 {
        self.v.norm_squared()
    }

    pub fn matrix(&self) -> HermitianMatrix {
        HermitianMatrix::rank_one(&self.v)
    }
}

/// Ordered list of disjoint index sets covering `0..d`. Empty parts are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut parts: Vec<Vec<usize>>, d: usize) -> Result<Self> {
        let mut seen = vec![false; d];
        for part in &mut parts {
            part.sort_unstable();
            for &i in part.iter() {
                if i >= d {
                    return Err(Error::Validation(format!("index {i} out of range for d = {d}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Validation(format!("index {i} appears twice")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("index {i} is not covered")));
        }
        Ok(Self { parts })
    }

    /// Part `assignment[i]` receives index `i`; there are `r` parts.
    pub fn from_assignment(assignment: &[usize], r: usize) -> Result<Self> {
        let mut parts = vec![Vec::new(); r];
        for (i, &j) in assignment.iter().enumerate() {
            parts
                .get_mut(j)
                .ok_or_else(|| Error::Validation(format!("part {j} out of range for r = {r}")))?
                .push(i);
        }
        Self::new(parts, assignment.len())
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn d(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.d()];
        for (j, part) in self.parts.iter().enumerate() {
            for &i in part {
                out[i] = j;
            }
        }
        out
    }

    /// Re-validates disjointness and coverage.
    pub fn is_valid(&self) -> bool {
        Self::new(self.parts.clone(), self.d()).is_ok()
    }

    pub fn projectors(&self) -> Vec<DiagonalProjector> {
        let d = self.d();
        self.parts.iter().map(|p| DiagonalProjector::new(d, p.clone()).expect("valid partition")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeaverMethod {
    Exhaustive,
    Derandomized,
    Random,
    Auto,
}

impl FromStr for WeaverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "derandomized" => Ok(Self::Derandomized),
            "random" => Ok(Self::Random),
            "auto" => Ok(Self::Auto),
            _ => Err(Error::Validation(format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for WeaverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::Derandomized => "derandomized",
            Self::Random => "random",
            Self::Auto => "auto",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub method: WeaverMethod,
    pub seed: u64,
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { method: WeaverMethod::Auto, seed: 0, budget: DEFAULT_BUDGET }
    }
}

impl SearchOptions {
    pub fn with_method(method: WeaverMethod) -> Self {
        Self { method, ..Self::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeaverCertificate {
    pub r: usize,
    /// `max ‖A_i‖`.
    pub c: f64,
    /// `(√(1/r) + √C)²`.
    pub bound: f64,
    pub part_norms: Vec<f64>,
    pub max_norm: f64,
    pub pass: bool,
    pub method: WeaverMethod,
    /// Partitions visited, samples drawn or polynomials evaluated.
    pub work: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeaverSolution {
    pub partition: Partition,
    pub certificate: WeaverCertificate,
}

pub fn weaver_bound(r: usize, c: f64) -> f64 {
    ((1.0 / r as f64).sqrt() + c.sqrt()).powi(2)
}

fn lambda_max(h: &HermitianMatrix) -> f64 {
    if h.dim() == 1 {
        h.get(0, 0).re
    } else {
        h.max_eigenvalue()
    }
}

/// `‖Σ_{i∈S} A_i‖` for each part.
pub fn part_norms(mats: &[HermitianMatrix], partition: &Partition) -> Vec<f64> {
    let m = mats.first().map_or(0, HermitianMatrix::dim);
    partition
        .parts()
        .iter()
        .map(|part| {
            let sum = part.iter().fold(HermitianMatrix::zeros(m), |acc, &i| acc.add(&mats[i]));
            sum.operator_norm()
        })
        .collect()
}

fn exhaustive_cost(d: usize, r: usize) -> u64 {
    (r as u64).checked_pow(d.saturating_sub(1) as u32).unwrap_or(u64::MAX)
}

struct BranchAndBound<'a> {
    mats: &'a [HermitianMatrix],
    r: usize,
    lower: f64,
    sums: Vec<HermitianMatrix>,
    norms: Vec<f64>,
    assignment: Vec<usize>,
    best: f64,
    best_assignment: Vec<usize>,
    visited: u64,
}

impl BranchAndBound<'_> {
    /// Depth-first search over canonical assignments (index `i` may only open
    /// part `used`), pruning any branch whose current max part norm already
    /// matches the best complete value.
    fn search(&mut self, i: usize, used: usize) {
        if self.best <= self.lower + 1e-12 {
            return;
        }
        if i == self.mats.len() {
            self.visited += 1;
            let value = self.norms.iter().copied().fold(0.0, f64::max);
            if value < self.best {
                self.best = value;
                self.best_assignment = self.assignment.clone();
            }
            return;
        }
        let current = self.norms.iter().copied().fold(0.0, f64::max);
        // least loaded part first, so the first leaf is the best-fit greedy split
        let mut order: Vec<usize> = (0..self.r.min(used + 1)).collect();
        order.sort_by(|&a, &b| self.norms[a].total_cmp(&self.norms[b]));
        for j in order {
            let sum = self.sums[j].add(&self.mats[i]);
            let norm = lambda_max(&sum);
            if norm.max(current) >= self.best {
                continue;
            }
            let saved_sum = std::mem::replace(&mut self.sums[j], sum);
            let saved_norm = std::mem::replace(&mut self.norms[j], norm);
            self.assignment[i] = j;
            self.search(i + 1, used.max(j + 1));
            self.sums[j] = saved_sum;
            self.norms[j] = saved_norm;
        }
    }
}

fn weaver_exhaustive(mats: &[HermitianMatrix], r: usize, c: f64) -> (Vec<usize>, u64) {
    let m = mats[0].dim();
    let mut bb = BranchAndBound {
        mats,
        r,
        lower: (1.0 / r as f64).max(c),
        sums: vec![HermitianMatrix::zeros(m); r],
        norms: vec![0.0; r],
        assignment: vec![0; mats.len()],
        best: f64::INFINITY,
        best_assignment: vec![0; mats.len()],
        visited: 0,
    };
    bb.search(0, 0);
    (bb.best_assignment, bb.visited)
}

/// Tensor-lifted variables `Ã_i = r (A_i ⊗ E_j)`, `E_j` uniform over the
/// coordinate projectors of `C^r`.
pub fn tensor_lift(factors: &[RankOneFactor], r: usize) -> Result<Vec<DiscreteMatrixVariable>> {
    factors
        .iter()
        .map(|f| {
            let a = f.matrix().scale(r as f64);
            let outcomes = (0..r)
                .map(|j| {
                    let mut e = vec![0.0; r];
                    e[j] = 1.0;
                    a.kronecker(&HermitianMatrix::from_diagonal(&e))
                })
                .collect();
            DiscreteMatrixVariable::new(outcomes, None)
        })
        .collect()
}

fn derandomized_feasible(lifted: &[DiscreteMatrixVariable], budget: u64) -> bool {
    lifted.len() <= MAX_GENERAL_VARS + 1 && derandomization_cost(lifted) <= budget
}

/// Finds a partition `S_1..S_r` with `‖Σ_{i∈S_j} A_i‖ ≤ (√(1/r) + √C)²` for
/// `A_i = v_i v_i*` summing to the identity.
pub fn weaver_partition(factors: &[RankOneFactor], r: usize, opts: SearchOptions) -> Result<WeaverSolution> {
    if r < 2 {
        return Err(Error::Domain(format!("r = {r} must be at least 2")));
    }
    let Some(first) = factors.first() else {
        return Err(Error::Domain("no factors".into()));
    };
    let m = first.dim();
    if let Some(i) = factors.iter().position(|f| f.dim() != m) {
        return Err(Error::Domain(format!("factor {i} has dimension {}, expected {m}", factors[i].dim())));
    }
    let mats: Vec<HermitianMatrix> = factors.iter().map(RankOneFactor::matrix).collect();
    let gap = HermitianMatrix::sum(&mats).max_abs_diff(&HermitianMatrix::identity(m));
    if gap > IDENTITY_TOL {
        return Err(Error::Precondition(format!("Σ A_i differs from the identity by {gap:e}")));
    }
    let d = factors.len();
    let c = factors.iter().map(RankOneFactor::norm).fold(0.0, f64::max);
    let bound = weaver_bound(r, c);

    let method = match opts.method {
        WeaverMethod::Auto => {
            if exhaustive_cost(d, r) <= opts.budget {
                WeaverMethod::Exhaustive
            } else if derandomized_feasible(&tensor_lift(factors, r)?, opts.budget) {
                WeaverMethod::Derandomized
            } else {
                WeaverMethod::Random
            }
        }
        other => other,
    };

    let (assignment, work) = match method {
        WeaverMethod::Exhaustive => {
            let cost = exhaustive_cost(d, r);
            if cost > opts.budget {
                return Err(Error::Resource(format!(
                    "exhaustive search over {r}^{} = {cost} partitions exceeds the budget of {}; use the random method or raise the budget",
                    d - 1,
                    opts.budget
                )));
            }
            weaver_exhaustive(&mats, r, c)
        }
        WeaverMethod::Derandomized => {
            let lifted = tensor_lift(factors, r)?;
            let result = derandomized_realization(&lifted, opts.budget)?;
            (result.assignment.choices, derandomization_cost(&lifted))
        }
        WeaverMethod::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut best = (f64::INFINITY, vec![0; d]);
            let mut drawn = 0;
            while drawn < opts.budget.max(1) {
                drawn += 1;
                let assignment: Vec<usize> = (0..d).map(|_| rng.random_range(0..r)).collect();
                let partition = Partition::from_assignment(&assignment, r)?;
                let value = part_norms(&mats, &partition).into_iter().fold(0.0, f64::max);
                if value < best.0 {
                    best = (value, assignment);
                }
                if best.0 <= bound + BOUND_TOL {
                    break;
                }
            }
            if best.0 > bound + BOUND_TOL {
                return Err(Error::PartitionSearchFailed {
                    best: Partition::from_assignment(&best.1, r)?,
                    best_value: best.0,
                    bound,
                });
            }
            (best.1, drawn)
        }
        WeaverMethod::Auto => unreachable!("resolved above"),
    };

    let partition = Partition::from_assignment(&assignment, r)?;
    let norms = part_norms(&mats, &partition);
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    Ok(WeaverSolution {
        partition,
        certificate: WeaverCertificate {
            r,
            c,
            bound,
            part_norms: norms,
            max_norm,
            pass: max_norm <= bound + BOUND_TOL,
            method,
            work,
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorPaving {
    pub partition: Partition,
    pub norms: Vec<f64>,
    /// `max_i P_ii`.
    pub diag_max: f64,
    /// `(√(1/r) + √(max_i P_ii))²`.
    pub bound: f64,
    pub pass: bool,
    pub method: WeaverMethod,
}

impl ProjectorPaving {
    pub fn projectors(&self) -> Vec<DiagonalProjector> {
        self.partition.projectors()
    }
}

/// Paves an orthogonal projector: diagonal projectors `Q_1..Q_r` summing to
/// the identity with `‖Q_i P Q_i‖ ≤ (√(1/r) + √(max P_ii))²`.
pub fn pave_projector(p: &HermitianMatrix, r: usize, opts: SearchOptions) -> Result<ProjectorPaving> {
    let n = p.dim();
    let square = HermitianMatrix::new(p.as_matrix() * p.as_matrix())?;
    let gap = square.max_abs_diff(p);
    if gap > 1e-8 {
        return Err(Error::Precondition(format!("matrix is not a projector (‖P² − P‖_max = {gap:e})")));
    }
    let eig = p.eigen();
    let range: Vec<usize> = (0..n).filter(|&k| eig.values[k] > 0.5).collect();
    let diag_max = p.diagonal().into_iter().fold(0.0, f64::max);
    let bound = weaver_bound(r, diag_max);
    let (partition, method) = if range.is_empty() {
        let mut parts = vec![Vec::new(); r];
        parts[0] = (0..n).collect();
        (Partition::new(parts, n)?, opts.method)
    } else {
        // w_i = U* e_i for an orthonormal basis U of the range
        let factors: Vec<RankOneFactor> = (0..n)
            .map(|i| {
                RankOneFactor::new(CVector::from_iterator(
                    range.len(),
                    range.iter().map(|&k| eig.vectors[(i, k)].conj()),
                ))
            })
            .collect();
        let sol = weaver_partition(&factors, r, opts)?;
        (sol.partition, sol.certificate.method)
    };
    let norms: Vec<f64> = partition.projectors().iter().map(|q| q.compression_norm(p)).collect();
    let pass = norms.iter().all(|&v| v <= bound + BOUND_TOL);
    Ok(ProjectorPaving { partition, norms, diag_max, bound, pass, method })
}

/// `2 (√(1/r) + √(1/2))² − 1`.
pub fn anderson_epsilon(r: usize) -> f64 {
    2.0 * weaver_bound(r, 0.5) - 1.0
}

/// Smallest `r` with `anderson_epsilon(r) ≤ eps`.
pub fn r_for_epsilon(eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("epsilon = {eps} must be positive")));
    }
    let gap = ((1.0 + eps) / 2.0).sqrt() - 0.5f64.sqrt();
    let mut r = (1.0 / (gap * gap)).ceil().max(1.0) as usize;
    while r > 1 && anderson_epsilon(r - 1) <= eps {
        r -= 1;
    }
    while anderson_epsilon(r) > eps {
        r += 1;
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct AndersonPaving {
    /// Nonempty blocks, as a partition of `0..n`.
    pub partition: Partition,
    pub empty_blocks: usize,
    /// `‖Q T Q‖` per block.
    pub norms: Vec<f64>,
    pub t_norm: f64,
    pub eps_achieved: f64,
    pub eps_theory: f64,
    /// `eps_achieved ≤ eps_theory`, required only when `eps_theory ≤ 1`.
    pub pass: bool,
}

impl AndersonPaving {
    pub fn projectors(&self) -> Vec<DiagonalProjector> {
        self.partition.projectors()
    }
}

fn check_zero_diagonal(m: &CMatrix, norm: f64) -> Result<()> {
    for i in 0..m.nrows() {
        if m[(i, i)].norm() > 1e-10 * norm {
            return Err(Error::Precondition(format!("diagonal entry {i} is {} (expected zero)", m[(i, i)])));
        }
    }
    Ok(())
}

fn intersect(a: &Partition, b: &Partition, n: usize) -> (Partition, usize) {
    let mut blocks = Vec::new();
    let mut empty = 0;
    for pa in a.parts() {
        for pb in b.parts() {
            let block: Vec<usize> = pa.iter().copied().filter(|i| pb.binary_search(i).is_ok()).collect();
            if block.is_empty() {
                empty += 1;
            } else {
                blocks.push(block);
            }
        }
    }
    (Partition::new(blocks, n).expect("intersection of partitions"), empty)
}

/// Paves a Hermitian zero-diagonal `T` into at most `r²` blocks with
/// `‖Q T Q‖ ≤ ε ‖T‖`, via the projector
/// `P = [[(I + T)/2, S/2], [S/2, (I − T)/2]]`, `S = √(I − T²)`, `‖T‖ = 1`.
pub fn pave_selfadjoint(t: &HermitianMatrix, r: usize, opts: SearchOptions) -> Result<AndersonPaving> {
    let n = t.dim();
    let t_norm = t.operator_norm();
    check_zero_diagonal(t.as_matrix(), t_norm)?;
    let eps_theory = anderson_epsilon(r);
    if t_norm == 0.0 {
        let partition = Partition::new(vec![(0..n).collect()], n)?;
        return Ok(AndersonPaving {
            partition,
            empty_blocks: 0,
            norms: vec![0.0],
            t_norm,
            eps_achieved: 0.0,
            eps_theory,
            pass: true,
        });
    }
    let unit = t.scale(1.0 / t_norm);
    let eye = HermitianMatrix::identity(n);
    let s = unit.eigen().map_spectrum(|l| (1.0 - l * l).max(0.0).sqrt());
    let plus = eye.add(&unit).scale(0.5);
    let minus = eye.sub(&unit).scale(0.5);
    let half_s = s.scale(0.5);
    let big = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => plus.get(i, j),
        (true, false) => half_s.get(i, j - n),
        (false, true) => half_s.get(i - n, j),
        (false, false) => minus.get(i - n, j - n),
    });
    let p = HermitianMatrix::new(big)?;
    let paving = pave_projector(&p, r, opts)?;
    let rows = Partition::new(
        paving.partition.parts().iter().map(|part| part.iter().copied().filter(|&i| i < n).collect()).collect(),
        n,
    )?;
    let cols = Partition::new(
        paving.partition.parts().iter().map(|part| part.iter().filter(|&&i| i >= n).map(|i| i - n).collect()).collect(),
        n,
    )?;
    let (partition, empty_blocks) = intersect(&rows, &cols, n);
    let norms: Vec<f64> = partition.projectors().iter().map(|q| q.compression_norm(t)).collect();
    let eps_achieved = norms.iter().copied().fold(0.0, f64::max) / t_norm;
    let pass = eps_theory > 1.0 || eps_achieved <= eps_theory + BOUND_TOL;
    Ok(AndersonPaving { partition, empty_blocks, norms, t_norm, eps_achieved, eps_theory, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralPaving {
    pub partition: Partition,
    pub empty_blocks: usize,
    pub norms: Vec<f64>,
    pub t_norm: f64,
    pub eps_achieved: f64,
    /// Twice the self-adjoint bound: real and imaginary parts are paved separately.
    pub eps_theory: f64,
    pub pass: bool,
}

/// Paves an arbitrary zero-diagonal square matrix into at most `r⁴` blocks by
/// paving its Hermitian parts `(T + T*)/2` and `(T − T*)/(2i)` and intersecting.
pub fn pave_general(t: &CMatrix, r: usize, opts: SearchOptions) -> Result<GeneralPaving> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(Error::Validation(format!("matrix is {}×{}, expected square", n, t.ncols())));
    }
    let t_norm = crate::linalg::operator_norm_general(t);
    check_zero_diagonal(t, t_norm)?;
    let adj = t.adjoint();
    let re = HermitianMatrix::new((t + &adj) * Complex64::new(0.5, 0.0))?;
    let im = HermitianMatrix::new((t - &adj) * Complex64::new(0.0, -0.5))?;
    let a = pave_selfadjoint(&re, r, opts)?;
    let b = pave_selfadjoint(&im, r, opts)?;
    let (partition, extra_empty) = intersect(&a.partition, &b.partition, n);
    let norms: Vec<f64> = partition.projectors().iter().map(|q| q.compression_norm_general(t)).collect();
    let eps_achieved = if t_norm == 0.0 { 0.0 } else { norms.iter().copied().fold(0.0, f64::max) / t_norm };
    let eps_theory = 2.0 * anderson_epsilon(r);
    let pass = eps_theory > 1.0 || eps_achieved <= eps_theory + BOUND_TOL;
    Ok(GeneralPaving {
        partition,
        empty_blocks: a.empty_blocks + b.empty_blocks + extra_empty,
        norms,
        t_norm,
        eps_achieved,
        eps_theory,
        pass,
    })
}
