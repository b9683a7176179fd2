//! Riesz sequences and frames in finite dimension, and their splitting into
//! well-conditioned subsystems by paving the off-diagonal part of the Gram
//! matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianMatrix};
use crate::partition::{pave_selfadjoint, r_for_epsilon, Partition, SearchOptions};

/// Tolerance on unit norms and on certificate bounds.
pub const FRAME_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Riesz,
    Frame,
}

#[derive(Clone, Debug)]
pub struct VectorSystem {
    vectors: Vec<CVector>,
    kind: SystemKind,
}

impl VectorSystem {
    pub fn new(vectors: Vec<CVector>, kind: SystemKind) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Domain("empty vector system".into()));
        };
        let n = first.len();
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != n {
                return Err(Error::Validation(format!("vector {i} has dimension {}, expected {n}", v.len())));
            }
            if kind == SystemKind::Riesz && v.norm() == 0.0 {
                return Err(Error::Validation(format!("vector {i} is zero")));
            }
        }
        Ok(Self { vectors, kind })
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Synthesis matrix with the vectors as columns.
    pub fn synthesis(&self) -> CMatrix {
        CMatrix::from_columns(&self.vectors)
    }

    /// `G_ij = ⟨φ_j, φ_i⟩`.
    pub fn gram(&self) -> HermitianMatrix {
        let phi = self.synthesis();
        HermitianMatrix::new(phi.adjoint() * &phi).expect("Gram matrices are Hermitian")
    }

    /// `Σ φ_i φ_i*`.
    pub fn frame_operator(&self) -> HermitianMatrix {
        let phi = self.synthesis();
        HermitianMatrix::new(&phi * phi.adjoint()).expect("frame operators are Hermitian")
    }

    pub fn check_unit_norm(&self) -> Result<()> {
        for (i, v) in self.vectors.iter().enumerate() {
            let norm = v.norm();
            if (norm - 1.0).abs() > FRAME_TOL {
                return Err(Error::Precondition(format!("vector {i} has norm {norm}, expected 1")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RieszBounds {
    pub lower: f64,
    pub upper: f64,
}

impl RieszBounds {
    fn from_spectrum(h: &HermitianMatrix) -> Self {
        let ev = h.eigenvalues();
        let lower = ev[0].max(0.0);
        Self { lower, upper: ev[ev.len() - 1].max(lower) }
    }
}

/// Riesz bounds from the Gram spectrum, or frame bounds from the frame
/// operator spectrum, depending on the system kind.
pub fn system_bounds(s: &VectorSystem) -> Result<RieszBounds> {
    if s.is_empty() {
        return Err(Error::Domain("empty vector system".into()));
    }
    Ok(match s.kind {
        SystemKind::Riesz => RieszBounds::from_spectrum(&s.gram()),
        SystemKind::Frame => RieszBounds::from_spectrum(&s.frame_operator()),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SplitOptions {
    /// Number of paving parts; `None` picks the smallest `r` whose paving
    /// bound meets the target.
    pub r: Option<usize>,
    /// Re-pave blocks that miss the target until every block meets it.
    pub recursive: bool,
    pub search: SearchOptions,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self { r: None, recursive: true, search: SearchOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartCertificate {
    pub indices: Vec<usize>,
    pub lower: f64,
    pub upper: f64,
    /// `‖G_S − I‖`.
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GramSplit {
    pub partition: Partition,
    pub target: f64,
    pub eps_achieved: f64,
    pub parts: Vec<PartCertificate>,
    /// `r` used for the first paving (0 when no paving was needed).
    pub r: usize,
    pub pavings: usize,
    pub pass: bool,
}

fn choose_r(requested: Option<usize>, target: f64, deviation: f64, size: usize) -> Result<usize> {
    match requested {
        Some(r) if r >= 2 => Ok(r),
        Some(r) => Err(Error::Domain(format!("r = {r} must be at least 2"))),
        None => Ok(r_for_epsilon(target / deviation)?.clamp(2, size.max(2))),
    }
}

/// Splits indices so that each part's Gram matrix lies within `target` of
/// the identity in operator norm. `gram` must have unit diagonal.
pub fn split_gram(gram: &HermitianMatrix, target: f64, opts: SplitOptions) -> Result<GramSplit> {
    if !(target > 0.0) {
        return Err(Error::Domain(format!("target epsilon = {target} must be positive")));
    }
    let d = gram.dim();
    let offdiag = gram.sub(&HermitianMatrix::identity(d));
    let mut done: Vec<Vec<usize>> = Vec::new();
    let mut queue: Vec<Vec<usize>> = vec![(0..d).collect()];
    let mut first_r = 0;
    let mut pavings = 0;
    while let Some(set) = queue.pop() {
        let block = offdiag.principal_submatrix(&set);
        let deviation = block.operator_norm();
        if deviation <= target || set.len() == 1 || (pavings > 0 && !opts.recursive) {
            done.push(set);
            continue;
        }
        let r = choose_r(opts.r, target, deviation, set.len())?;
        if pavings == 0 {
            first_r = r;
        }
        pavings += 1;
        let blocks: Vec<Vec<usize>> = match pave_selfadjoint(&block, r, opts.search) {
            Ok(paving) if paving.partition.num_parts() > 1 => {
                paving.partition.parts().iter().map(|p| p.iter().map(|&k| set[k]).collect()).collect()
            }
            Ok(_) => halve(&set),
            Err(e) if e.is_search_or_resource() => halve(&set),
            Err(e) => return Err(e),
        };
        queue.extend(blocks.into_iter().rev());
    }
    done.sort_by_key(|p| p[0]);
    let parts: Vec<PartCertificate> = done
        .iter()
        .map(|set| {
            let g = gram.principal_submatrix(set);
            let ev = g.eigenvalues();
            PartCertificate {
                indices: set.clone(),
                lower: ev[0],
                upper: ev[ev.len() - 1],
                deviation: offdiag.principal_submatrix(set).operator_norm(),
            }
        })
        .collect();
    let eps_achieved = parts.iter().map(|p| p.deviation).fold(0.0, f64::max);
    Ok(GramSplit {
        partition: Partition::new(done, d)?,
        target,
        eps_achieved,
        parts,
        r: first_r,
        pavings,
        pass: eps_achieved <= target + FRAME_TOL,
    })
}

fn halve(set: &[usize]) -> Vec<Vec<usize>> {
    let (a, b) = set.split_at(set.len() / 2);
    vec![a.to_vec(), b.to_vec()]
}

/// Splits a unit-norm system into `ε`-Riesz subsystems: each part's Gram
/// spectrum lies in `[1 − ε, 1 + ε]`.
pub fn split_riesz_eps(s: &VectorSystem, eps: f64, opts: SplitOptions) -> Result<GramSplit> {
    s.check_unit_norm()?;
    split_gram(&s.gram(), eps, opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct FeichtingerSplit {
    /// Upper frame bound `B`.
    pub frame_upper: f64,
    /// `1 / (2 (1 + B))`, the paving accuracy relative to `‖G − I‖ ≤ 1 + B`.
    pub paving_epsilon: f64,
    pub split: GramSplit,
    /// Every part has Gram spectrum in `[1/2, 3/2]`.
    pub pass: bool,
}

/// Splits a unit-norm frame into Riesz sequences with bounds `1/2` and `3/2`.
pub fn split_frame_feichtinger(s: &VectorSystem, opts: SplitOptions) -> Result<FeichtingerSplit> {
    s.check_unit_norm()?;
    let frame_upper = s.frame_operator().max_eigenvalue();
    let split = split_gram(&s.gram(), 0.5, opts)?;
    let pass = split.parts.iter().all(|p| p.lower >= 0.5 - FRAME_TOL && p.upper <= 1.5 + FRAME_TOL);
    Ok(FeichtingerSplit { frame_upper, paving_epsilon: 1.0 / (2.0 * (1.0 + frame_upper)), split, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct BtSplit {
    pub partition: Partition,
    /// Smallest eigenvalue of each part's column Gram matrix of `T`.
    pub part_lower: Vec<f64>,
    pub bound: f64,
    pub split: GramSplit,
    pub pass: bool,
}

/// `φ_k = (4/5 · T e_k, 3/5 · e_k)`: unit vectors whose Gram matrix is
/// `(16/25) T*T + (9/25) I`.
pub fn bt_embedding(t: &CMatrix) -> Result<VectorSystem> {
    let (n, d) = t.shape();
    let vectors = (0..d)
        .map(|k| {
            let mut v = CVector::zeros(n + d);
            for i in 0..n {
                v[i] = t[(i, k)] * 0.8;
            }
            v[n + k] = 0.6.into();
            v
        })
        .collect();
    VectorSystem::new(vectors, SystemKind::Riesz)
}

/// Partitions the columns of `T` (unit norm) so that on each part
/// `‖Σ a_i T e_i‖² ≥ (7/16) Σ |a_i|²`.
pub fn bt_partition(t: &CMatrix, opts: SplitOptions) -> Result<BtSplit> {
    for k in 0..t.ncols() {
        let norm = t.column(k).norm();
        if (norm - 1.0).abs() > FRAME_TOL {
            return Err(Error::Precondition(format!("column {k} has norm {norm}, expected 1")));
        }
    }
    let phi = bt_embedding(t)?;
    let split = split_gram(&phi.gram(), 9.0 / 25.0, opts)?;
    let gram_t = HermitianMatrix::new(t.adjoint() * t)?;
    let part_lower: Vec<f64> = split
        .partition
        .parts()
        .iter()
        .map(|p| gram_t.principal_submatrix(p).min_eigenvalue())
        .collect();
    let bound = 7.0 / 16.0;
    let pass = part_lower.iter().all(|&l| l >= bound - FRAME_TOL);
    Ok(BtSplit { partition: split.partition.clone(), part_lower, bound, split, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rvector;

    fn basis(n: usize) -> Vec<CVector> {
        (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                rvector(&v)
            })
            .collect()
    }

    #[test]
    fn bounds_examples() {
        let s = VectorSystem::new(basis(3), SystemKind::Riesz).unwrap();
        assert_eq!(system_bounds(&s).unwrap(), RieszBounds { lower: 1.0, upper: 1.0 });
        let mut twice = basis(3);
        twice.extend(basis(3));
        let s = VectorSystem::new(twice, SystemKind::Frame).unwrap();
        let b = system_bounds(&s).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-12 && (b.upper - 2.0).abs() < 1e-12);
        let h = 0.5f64.sqrt();
        let s = VectorSystem::new(vec![rvector(&[1.0, 0.0]), rvector(&[h, h])], SystemKind::Riesz).unwrap();
        let b = system_bounds(&s).unwrap();
        assert!((b.lower - (1.0 - h)).abs() < 1e-12 && (b.upper - (1.0 + h)).abs() < 1e-12);
        assert!(VectorSystem::new(vec![], SystemKind::Frame).is_err());
    }

    #[test]
    fn orthonormal_system_is_one_part() {
        let s = VectorSystem::new(basis(4), SystemKind::Riesz).unwrap();
        let split = split_riesz_eps(&s, 0.1, SplitOptions::default()).unwrap();
        assert_eq!(split.partition.num_parts(), 1);
        assert_eq!(split.eps_achieved, 0.0);
    }

    #[test]
    fn three_vectors_in_the_plane() {
        let h = 0.5f64.sqrt();
        let s = VectorSystem::new(vec![rvector(&[1.0, 0.0]), rvector(&[0.0, 1.0]), rvector(&[h, h])], SystemKind::Riesz)
            .unwrap();
        let split = split_riesz_eps(&s, 0.1, SplitOptions::default()).unwrap();
        assert!(split.pass && split.eps_achieved < 1e-12);
        assert_eq!(split.partition.num_parts(), 2);
    }

    #[test]
    fn feichtinger_on_doubled_basis() {
        let mut twice = basis(3);
        twice.extend(basis(3));
        let s = VectorSystem::new(twice, SystemKind::Frame).unwrap();
        let split = split_frame_feichtinger(&s, SplitOptions::default()).unwrap();
        assert!(split.pass);
        assert!(split.split.parts.iter().all(|p| p.deviation < 1e-12));
        assert!((split.frame_upper - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_norm_is_required() {
        let s = VectorSystem::new(vec![rvector(&[2.0, 0.0])], SystemKind::Riesz).unwrap();
        assert!(matches!(split_riesz_eps(&s, 0.5, SplitOptions::default()), Err(Error::Precondition(_))));
        let t = CMatrix::from_fn(2, 2, |i, j| if i == j { 2.0.into() } else { 0.0.into() });
        assert!(matches!(bt_partition(&t, SplitOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn bt_examples() {
        let id = CMatrix::identity(4, 4);
        let split = bt_partition(&id, SplitOptions::default()).unwrap();
        assert_eq!(split.partition.num_parts(), 1);
        assert!(split.pass && (split.part_lower[0] - 1.0).abs() < 1e-12);
        let swap = CMatrix::from_fn(2, 2, |i, j| if i != j { 1.0.into() } else { 0.0.into() });
        let split = bt_partition(&swap, SplitOptions::default()).unwrap();
        assert_eq!(split.partition.num_parts(), 1);
    }

    #[test]
    fn bt_embedding_gram_identity() {
        let h = 0.5f64.sqrt();
        let t = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => 1.0.into(),
            (1, 0) => 0.0.into(),
            _ => h.into(),
        });
        let g = bt_embedding(&t).unwrap().gram();
        let want = HermitianMatrix::new(t.adjoint() * &t).unwrap().scale(16.0 / 25.0).add(&HermitianMatrix::identity(2).scale(9.0 / 25.0));
        assert!(g.max_abs_diff(&want) < 1e-14);
    }
}
