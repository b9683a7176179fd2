//! Graphs, edge signings, 2-lifts, matching polynomials and the iterated
//! construction of bipartite Ramanujan graphs from `K_{d,d}`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rvector, HermitianMatrix};
use crate::realpoly::RealPoly;

/// Largest vertex count handled by the matching polynomial recursion.
pub const MAX_MATCHING_VERTICES: usize = 48;
/// Largest edge count for which all signings are enumerated.
pub const MAX_ENUMERATED_EDGES: usize = 22;
/// Edge count up to which `auto` signing search is exhaustive.
pub const AUTO_EXHAUSTIVE_EDGES: usize = 16;
pub const DEFAULT_BUDGET: u64 = 1 << 20;
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Simple undirected graph; edges are stored as sorted pairs `u < v`, in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::Validation(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Validation(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self { n, edges: norm })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::new(n, edges).expect("complete graph is simple")
    }

    /// `K_{a,b}` with parts `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let edges = (0..a).flat_map(|u| (0..b).map(move |v| (u, a + v))).collect();
        Self::new(a + b, edges).expect("complete bipartite graph is simple")
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("a cycle needs at least 3 vertices, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::new(10, edges).expect("Petersen graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors().iter().map(Vec::len).collect()
    }

    /// `Some(d)` if every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let deg = self.degrees();
        let first = *deg.first()?;
        deg.iter().all(|&x| x == first).then_some(first)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Two-coloring if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let adj = self.neighbors();
        let mut color = vec![u8::MAX; self.n];
        for start in 0..self.n {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    pub fn adjacency_real(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    pub fn adjacency(&self) -> HermitianMatrix {
        HermitianMatrix::from_real(self.adjacency_real()).expect("adjacency is symmetric")
    }

    /// Adjacency eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        real_spectrum(self.adjacency_real())
    }
}

fn real_spectrum(a: DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// A graph with a sign `±1` on every edge, aligned with `base.edges()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignedGraph {
    base: Graph,
    signs: Vec<i8>,
}

impl SignedGraph {
    pub fn new(base: Graph, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != base.num_edges() {
            return Err(Error::Validation(format!("{} signs for {} edges", signs.len(), base.num_edges())));
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Validation(format!("sign {s} is not ±1")));
        }
        Ok(Self { base, signs })
    }

    pub fn all_positive(base: Graph) -> Self {
        let signs = vec![1; base.num_edges()];
        Self { base, signs }
    }

    /// Signs from the bits of `mask`: bit `k` set means edge `k` is negative.
    pub fn from_mask(base: Graph, mask: u64) -> Self {
        let signs = (0..base.num_edges()).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
        Self { base, signs }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn adjacency_real(&self) -> DMatrix<f64> {
        signed_adjacency(&self.base, &self.signs)
    }

    pub fn adjacency(&self) -> HermitianMatrix {
        HermitianMatrix::from_real(self.adjacency_real()).expect("adjacency is symmetric")
    }

    pub fn spectrum(&self) -> Vec<f64> {
        real_spectrum(self.adjacency_real())
    }

    /// Exact `det(z·I − A^{(s)})`, ascending integer coefficients.
    pub fn char_poly_exact(&self) -> Result<Vec<i128>> {
        let n = self.base.n;
        let mut a = vec![vec![0i128; n]; n];
        for (&(u, v), &s) in self.base.edges.iter().zip(&self.signs) {
            a[u][v] = s as i128;
            a[v][u] = s as i128;
        }
        berkowitz(&a).ok_or_else(|| Error::Resource("integer overflow in characteristic polynomial".into()))
    }

    /// `A_e = (δ_u + s δ_v)(δ_u + s δ_v)*` for every edge, so that
    /// `Σ_e A_e = D + A^{(s)}` with `D` the degree matrix.
    pub fn edge_operators(&self) -> Vec<HermitianMatrix> {
        self.base
            .edges
            .iter()
            .zip(&self.signs)
            .map(|(&(u, v), &s)| edge_operator(self.base.n, u, v, s))
            .collect()
    }
}

pub fn edge_operator(n: usize, u: usize, v: usize, sign: i8) -> HermitianMatrix {
    let mut x = vec![0.0; n];
    x[u] = 1.0;
    x[v] = sign as f64;
    HermitianMatrix::rank_one(&rvector(&x))
}

fn signed_adjacency(g: &Graph, signs: &[i8]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(g.n, g.n);
    for (&(u, v), &s) in g.edges.iter().zip(signs) {
        a[(u, v)] = s as f64;
        a[(v, u)] = s as f64;
    }
    a
}

/// Division-free characteristic polynomial `det(z·I − A)` (ascending
/// coefficients), exact over the integers. `None` on overflow.
pub fn berkowitz(a: &[Vec<i128>]) -> Option<Vec<i128>> {
    let n = a.len();
    if n == 0 {
        return Some(vec![1]);
    }
    // descending coefficients of the leading r×r block
    let mut vect = vec![1i128, -a[0][0]];
    for r in 1..n {
        let mut q = vec![0i128; r + 2];
        q[0] = 1;
        q[1] = -a[r][r];
        let mut w: Vec<i128> = (0..r).map(|i| a[i][r]).collect();
        for k in 0..r {
            let mut dot = 0i128;
            for (j, wj) in w.iter().enumerate() {
                dot = dot.checked_add(a[r][j].checked_mul(*wj)?)?;
            }
            q[k + 2] = dot.checked_neg()?;
            if k + 1 < r {
                let mut next = vec![0i128; r];
                for (i, slot) in next.iter_mut().enumerate() {
                    let mut acc = 0i128;
                    for (j, wj) in w.iter().enumerate() {
                        acc = acc.checked_add(a[i][j].checked_mul(*wj)?)?;
                    }
                    *slot = acc;
                }
                w = next;
            }
        }
        let mut next = vec![0i128; r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = 0i128;
            for j in 0..=i.min(r) {
                acc = acc.checked_add(q[i - j].checked_mul(vect[j])?)?;
            }
            *slot = acc;
        }
        vect = next;
    }
    vect.reverse();
    Some(vect)
}

struct MatchingCounter {
    nbr: Vec<u64>,
    memo: HashMap<u64, Vec<u128>>,
    budget: u64,
}

fn poly_mul(a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl MatchingCounter {
    fn component(&self, mask: u64) -> u64 {
        let start = mask & mask.wrapping_neg();
        let mut comp = start;
        let mut frontier = start;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = self.nbr[v] & mask & !comp;
            comp |= new;
            frontier |= new;
        }
        comp
    }

    /// Number of `r`-matchings of the induced subgraph, indexed by `r`.
    fn counts(&mut self, mask: u64) -> Result<Vec<u128>> {
        if mask.count_ones() < 2 {
            return Ok(vec![1]);
        }
        if let Some(c) = self.memo.get(&mask) {
            return Ok(c.clone());
        }
        if self.memo.len() as u64 >= self.budget {
            return Err(Error::Resource(format!(
                "matching recursion exceeded the budget of {} subgraphs",
                self.budget
            )));
        }
        let comp = self.component(mask);
        let result = if comp != mask {
            let a = self.counts(comp)?;
            let b = self.counts(mask & !comp)?;
            poly_mul(&a, &b)
        } else {
            let v = mask.trailing_zeros() as usize;
            let rest = mask & !(1u64 << v);
            let mut result = self.counts(rest)?;
            let mut nb = self.nbr[v] & rest;
            while nb != 0 {
                let u = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                let sub = self.counts(rest & !(1u64 << u))?;
                if result.len() < sub.len() + 1 {
                    result.resize(sub.len() + 1, 0);
                }
                for (k, c) in sub.iter().enumerate() {
                    result[k + 1] += c;
                }
            }
            result
        };
        self.memo.insert(mask, result.clone());
        Ok(result)
    }
}

/// Number of `r`-edge matchings `p_r` for `r = 0, 1, ..`.
pub fn matching_counts(g: &Graph, budget: u64) -> Result<Vec<u128>> {
    if g.n > MAX_MATCHING_VERTICES {
        return Err(Error::Resource(format!("{} vertices exceed the cap of {MAX_MATCHING_VERTICES}", g.n)));
    }
    // relabel in breadth-first order so that removed vertices form a prefix
    let adj = g.neighbors();
    let mut order = Vec::with_capacity(g.n);
    let mut seen = vec![false; g.n];
    for s in 0..g.n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    let mut label = vec![0; g.n];
    for (i, &v) in order.iter().enumerate() {
        label[v] = i;
    }
    let mut nbr = vec![0u64; g.n];
    for &(u, v) in &g.edges {
        nbr[label[u]] |= 1 << label[v];
        nbr[label[v]] |= 1 << label[u];
    }
    let full = if g.n == 64 { u64::MAX } else { (1u64 << g.n) - 1 };
    let mut counter = MatchingCounter { nbr, memo: HashMap::new(), budget };
    counter.counts(full)
}

/// `μ_X(z) = Σ_r (−1)^r p_r z^{n−2r}`.
pub fn matching_polynomial(g: &Graph) -> Result<RealPoly> {
    matching_polynomial_with_budget(g, DEFAULT_BUDGET)
}

pub fn matching_polynomial_with_budget(g: &Graph, budget: u64) -> Result<RealPoly> {
    let counts = matching_counts(g, budget)?;
    let mut coeffs = vec![0.0; g.n + 1];
    for (r, &c) in counts.iter().enumerate() {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[g.n - 2 * r] = sign * c as f64;
    }
    Ok(RealPoly::new(coeffs))
}

#[derive(Clone, Debug, Serialize)]
pub struct GodsilGutman {
    pub average: RealPoly,
    pub matching: RealPoly,
    pub max_error: f64,
    pub pass: bool,
}

/// Averages the characteristic polynomials of all `2^|E|` signed adjacency
/// matrices and compares with the matching polynomial.
pub fn godsil_gutman_check(g: &Graph) -> Result<GodsilGutman> {
    let e = g.num_edges();
    if e > MAX_ENUMERATED_EDGES {
        return Err(Error::Resource(format!("{e} edges exceed the enumeration cap of {MAX_ENUMERATED_EDGES}")));
    }
    let mut total = vec![0i128; g.n + 1];
    for mask in 0..(1u64 << e) {
        let cp = SignedGraph::from_mask(g.clone(), mask).char_poly_exact()?;
        for (t, c) in total.iter_mut().zip(cp) {
            *t = t.checked_add(c).ok_or_else(|| Error::Resource("integer overflow".into()))?;
        }
    }
    let scale = (1u64 << e) as f64;
    let average = RealPoly::new(total.iter().map(|&t| t as f64 / scale).collect());
    let matching = matching_polynomial(g)?;
    let max_error = average.max_coeff_diff(&matching);
    Ok(GodsilGutman { average, matching, max_error, pass: max_error <= SPECTRAL_TOL })
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().chain(b).copied().collect();
    out.sort_by(f64::total_cmp);
    out
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftReport {
    pub base_spectrum: Vec<f64>,
    pub signed_spectrum: Vec<f64>,
    pub lift_spectrum: Vec<f64>,
    pub union_error: f64,
    pub spectrum_union: bool,
    pub regular_preserved: bool,
    pub bipartite_preserved: bool,
    pub simple: bool,
}

impl LiftReport {
    pub fn pass(&self) -> bool {
        self.spectrum_union && self.regular_preserved && self.bipartite_preserved && self.simple
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoLift {
    pub graph: Graph,
    pub report: LiftReport,
}

/// Double cover on `2n` vertices (`x` and `x + n`): a positive edge `xy`
/// lifts to `x₁y₁, x₂y₂`, a negative one to `x₁y₂, x₂y₁`.
pub fn two_lift(s: &SignedGraph) -> Result<TwoLift> {
    let g = &s.base;
    let n = g.n;
    let mut edges = Vec::with_capacity(2 * g.num_edges());
    for (&(u, v), &sign) in g.edges.iter().zip(&s.signs) {
        if sign > 0 {
            edges.push((u, v));
            edges.push((u + n, v + n));
        } else {
            edges.push((u, v + n));
            edges.push((u + n, v));
        }
    }
    let expected_edges = edges.len();
    let graph = Graph::new(2 * n, edges)?;
    let base_spectrum = g.spectrum();
    let signed_spectrum = s.spectrum();
    let lift_spectrum = graph.spectrum();
    let union_error = max_gap(&lift_spectrum, &merge_sorted(&base_spectrum, &signed_spectrum));
    let regular_preserved = match g.regular_degree() {
        Some(d) => graph.regular_degree() == Some(d),
        None => true,
    };
    let bipartite_preserved = !g.is_bipartite() || graph.is_bipartite();
    let report = LiftReport {
        base_spectrum,
        signed_spectrum,
        lift_spectrum,
        union_error,
        spectrum_union: union_error <= SPECTRAL_TOL,
        regular_preserved,
        bipartite_preserved,
        simple: graph.num_edges() == expected_edges,
    };
    Ok(TwoLift { graph, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigningMethod {
    Exhaustive,
    Random,
    Greedy,
    Auto,
}

impl FromStr for SigningMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "random" => Ok(Self::Random),
            "greedy" => Ok(Self::Greedy),
            "auto" => Ok(Self::Auto),
            _ => Err(Error::Validation(format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for SigningMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::Random => "random",
            Self::Greedy => "greedy",
            Self::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SigningReport {
    pub signed: SignedGraph,
    pub method: SigningMethod,
    pub d: usize,
    pub lambda_max: f64,
    /// `2√(d − 1)`.
    pub bound: f64,
    pub bipartite: bool,
    /// For bipartite graphs: whether the signed spectrum is symmetric, so
    /// that `λ_max` also bounds `|λ|`.
    pub spectrum_symmetric: Option<bool>,
    pub pass: bool,
    pub warning: Option<String>,
    /// Signings examined (exhaustive, random) or characteristic polynomials
    /// evaluated (greedy).
    pub work: u64,
}

fn lambda_max(g: &Graph, signs: &[i8]) -> f64 {
    *real_spectrum(signed_adjacency(g, signs)).last().unwrap_or(&0.0)
}

fn ramanujan_bound(d: usize) -> f64 {
    2.0 * ((d as f64) - 1.0).sqrt()
}

fn check_regular_connected(g: &Graph) -> Result<usize> {
    let d = g
        .regular_degree()
        .ok_or_else(|| Error::Domain("graph is not regular".into()))?;
    if !g.is_connected() {
        return Err(Error::Domain("graph is not connected".into()));
    }
    Ok(d)
}

fn signs_from_mask(e: usize, mask: u64) -> Vec<i8> {
    (0..e).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect()
}

/// Searches for a signing with `λ_max(A^{(s)}) ≤ 2√(d − 1)`.
pub fn find_signing(g: &Graph, method: SigningMethod, seed: u64, budget: u64) -> Result<SigningReport> {
    let d = check_regular_connected(g)?;
    if d < 2 {
        return Err(Error::Precondition(format!("degree {d} < 2: the bound 2√(d−1) is not attainable")));
    }
    let e = g.num_edges();
    let bound = ramanujan_bound(d);
    let bipartite = g.is_bipartite();
    let exhaustive_fits = e <= MAX_ENUMERATED_EDGES && (1u64 << e) <= budget;
    let method = match method {
        SigningMethod::Auto if e <= AUTO_EXHAUSTIVE_EDGES && exhaustive_fits => SigningMethod::Exhaustive,
        SigningMethod::Auto => SigningMethod::Random,
        m => m,
    };
    let (signs, work) = match method {
        SigningMethod::Exhaustive => {
            if !exhaustive_fits {
                return Err(Error::Resource(format!(
                    "exhaustive search over 2^{e} signings exceeds the budget of {budget} (or the cap of 2^{MAX_ENUMERATED_EDGES}); use the random method"
                )));
            }
            let mut best = (f64::INFINITY, 0u64);
            for mask in 0..(1u64 << e) {
                let l = lambda_max(g, &signs_from_mask(e, mask));
                if l < best.0 {
                    best = (l, mask);
                }
            }
            (signs_from_mask(e, best.1), 1u64 << e)
        }
        SigningMethod::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = (f64::INFINITY, vec![1i8; e]);
            let mut drawn = 0;
            while drawn < budget.max(1) {
                drawn += 1;
                let signs: Vec<i8> = (0..e).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
                let l = lambda_max(g, &signs);
                if l < best.0 {
                    best = (l, signs);
                }
                if best.0 <= bound + SPECTRAL_TOL {
                    break;
                }
            }
            if best.0 > bound + SPECTRAL_TOL {
                return Err(Error::SigningSearchFailed { best_signs: best.1, best_lambda_max: best.0, bound });
            }
            (best.1, drawn)
        }
        SigningMethod::Greedy => greedy_signing(g, budget)?,
        SigningMethod::Auto => unreachable!("resolved above"),
    };
    let signed = SignedGraph::new(g.clone(), signs)?;
    let spectrum = signed.spectrum();
    let lambda_max = *spectrum.last().unwrap_or(&0.0);
    let spectrum_symmetric = bipartite.then(|| {
        let neg: Vec<f64> = spectrum.iter().rev().map(|l| -l).collect();
        max_gap(&spectrum, &neg) <= SPECTRAL_TOL
    });
    let warning = (!bipartite)
        .then(|| "graph is not bipartite: only the largest eigenvalue is controlled, not the smallest".to_string());
    Ok(SigningReport {
        signed,
        method,
        d,
        lambda_max,
        bound,
        bipartite,
        spectrum_symmetric,
        pass: lambda_max <= bound + SPECTRAL_TOL,
        warning,
        work,
    })
}

/// Fixes signs edge by edge, each time choosing the sign whose conditional
/// expected characteristic polynomial (averaged over all unfixed signs) has
/// the smaller largest root. Ties keep `+1`.
fn greedy_signing(g: &Graph, budget: u64) -> Result<(Vec<i8>, u64)> {
    let e = g.num_edges();
    let mut fixed: Vec<i8> = Vec::with_capacity(e);
    let mut work = 0u64;
    for k in 0..e {
        let free = e - k - 1;
        if free > 63 || (1u64 << free) > budget {
            return Err(Error::Resource(format!(
                "greedy step {k} would enumerate 2^{free} signings, budget is {budget}; use the random method"
            )));
        }
        let mut best: Option<(i8, f64)> = None;
        for s in [1i8, -1] {
            let mut total = vec![0i128; g.n + 1];
            for mask in 0..(1u64 << free) {
                let mut signs = fixed.clone();
                signs.push(s);
                signs.extend(signs_from_mask(free, mask));
                let cp = SignedGraph::new(g.clone(), signs)?.char_poly_exact()?;
                for (t, c) in total.iter_mut().zip(cp) {
                    *t += c;
                }
                work += 1;
            }
            let scale = (1u64 << free) as f64;
            let avg = RealPoly::new(total.iter().map(|&t| t as f64 / scale).collect());
            let zm = avg.max_real_root()?;
            if best.is_none_or(|(_, b)| zm < b) {
                best = Some((s, zm));
            }
        }
        fixed.push(best.expect("two candidates").0);
    }
    Ok((fixed, work))
}

#[derive(Clone, Debug, Serialize)]
pub struct RamanujanCertificate {
    pub n: usize,
    pub d: usize,
    pub eigenvalues: Vec<f64>,
    /// `max{|λ| : |λ| < d}`.
    pub nontrivial_max: f64,
    pub bound: f64,
    pub bipartite: bool,
    pub pass: bool,
}

pub fn is_ramanujan(g: &Graph) -> Result<RamanujanCertificate> {
    let d = check_regular_connected(g)?;
    let eigenvalues = g.spectrum();
    let nontrivial_max = eigenvalues
        .iter()
        .map(|l| l.abs())
        .filter(|&a| a < d as f64 - SPECTRAL_TOL)
        .fold(0.0, f64::max);
    let bound = ramanujan_bound(d);
    Ok(RamanujanCertificate {
        n: g.n,
        d,
        nontrivial_max,
        bound,
        bipartite: g.is_bipartite(),
        pass: nontrivial_max <= bound + SPECTRAL_TOL,
        eigenvalues,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyFailure {
    pub level: usize,
    pub message: String,
    /// A budget or unlucky search rather than a violated bound.
    pub search_or_resource: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RamanujanFamily {
    pub graphs: Vec<Graph>,
    pub certificates: Vec<RamanujanCertificate>,
    pub signings: Vec<SigningReport>,
    pub lifts: Vec<LiftReport>,
    pub failure: Option<FamilyFailure>,
}

impl RamanujanFamily {
    pub fn pass(&self) -> bool {
        self.failure.is_none()
            && self.certificates.iter().all(|c| c.pass)
            && self.lifts.iter().all(LiftReport::pass)
    }
}

/// `X_0 = K_{d,d}`, `X_{k+1}` = 2-lift of `X_k` along a good signing. Level
/// `k` uses seed `seed + k`. A failed search ends the family early and is
/// recorded in `failure`.
pub fn build_ramanujan_family(
    d: usize,
    levels: usize,
    method: SigningMethod,
    seed: u64,
    budget: u64,
) -> Result<RamanujanFamily> {
    if d < 3 {
        return Err(Error::Domain(format!("degree {d} < 3")));
    }
    let mut graph = Graph::complete_bipartite(d, d);
    let mut family = RamanujanFamily {
        graphs: Vec::new(),
        certificates: Vec::new(),
        signings: Vec::new(),
        lifts: Vec::new(),
        failure: None,
    };
    for level in 0..=levels {
        family.certificates.push(is_ramanujan(&graph)?);
        family.graphs.push(graph.clone());
        if level == levels {
            break;
        }
        let signing = match find_signing(&graph, method, seed.wrapping_add(level as u64), budget) {
            Ok(s) if s.pass => s,
            Ok(s) => {
                family.failure = Some(FamilyFailure {
                    level,
                    message: format!("best signing has λ_max {} > {}", s.lambda_max, s.bound),
                    search_or_resource: false,
                });
                family.signings.push(s);
                break;
            }
            Err(e) => {
                family.failure =
                    Some(FamilyFailure { level, message: e.to_string(), search_or_resource: e.is_search_or_resource() });
                break;
            }
        };
        let lift = two_lift(&signing.signed)?;
        family.signings.push(signing);
        family.lifts.push(lift.report);
        graph = lift.graph;
    }
    Ok(family)
}
