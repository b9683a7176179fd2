//! Multivariate real stable polynomials in determinantal and multi-affine form.
//!
//! A [`DeterminantalPoly`] represents `det(B + z·I + Σ z_i A_i)` with PSD
//! `A_i`, where the constant offset `B` (zero unless produced by
//! specialization) and the `z·I` term are optional. When every `A_i` has
//! rank at most one the polynomial is affine in each `z_i` and can be
//! expanded into a [`MultiAffinePoly`] coefficient table, on which the
//! operators `1 + t·∂_i` act exactly.
//!
//! Variable indices are 0-based throughout. For polynomials carrying the
//! `z` variable, evaluation points list `z` first.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix};
use crate::realpoly::{RealPoly, DEFAULT_ROOT_TOL};

/// Relative threshold for "rank at most one": second eigenvalue ≤ this · ‖A‖.
pub const RANK_ONE_TOL: f64 = 1e-8;
/// Largest number of variables expanded into a multi-affine table.
pub const MAX_MULTIAFFINE_VARS: usize = 20;
/// Relative singularity threshold for the barrier function.
pub const SINGULAR_TOL: f64 = 1e-10;
/// Tolerance on the sign conditions of the barrier function.
pub const BARRIER_SIGN_TOL: f64 = 1e-9;
/// Slack allowed in the barrier monotonicity inequality after a `1 − ∂_j` step.
pub const BARRIER_STEP_TOL: f64 = 1e-8;

/// Something that can be evaluated at a complex point.
pub trait Evaluable {
    fn nvars(&self) -> usize;
    /// Upper bound on the total degree.
    fn total_degree(&self) -> usize;
    fn eval(&self, point: &[Complex64]) -> Result<Complex64>;

    /// Value together with an estimate of its absolute rounding error.
    fn eval_with_error(&self, point: &[Complex64]) -> Result<(Complex64, f64)> {
        let v = self.eval(point)?;
        Ok((v, 64.0 * f64::EPSILON * (1.0 + self.total_degree() as f64) * v.norm()))
    }
}

fn check_len(point: &[Complex64], n: usize) -> Result<()> {
    if point.len() != n {
        return Err(Error::Domain(format!("expected {n} coordinates, got {}", point.len())));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct DeterminantalPoly {
    m: usize,
    matrices: Vec<HermitianMatrix>,
    include_z_identity: bool,
    offset: Option<HermitianMatrix>,
}

impl DeterminantalPoly {
    pub fn new(matrices: Vec<HermitianMatrix>, include_z_identity: bool) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::Validation("determinantal polynomial needs at least one matrix".into()));
        };
        let m = first.dim();
        for (i, a) in matrices.iter().enumerate() {
            if a.dim() != m {
                return Err(Error::Domain(format!("matrix {i} has dimension {}, expected {m}", a.dim())));
            }
            a.check_psd()?;
        }
        Ok(Self { m, matrices, include_z_identity, offset: None })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of `z_i` variables (excluding `z`).
    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[HermitianMatrix] {
        &self.matrices
    }

    pub fn include_z_identity(&self) -> bool {
        self.include_z_identity
    }

    pub fn offset(&self) -> Option<&HermitianMatrix> {
        self.offset.as_ref()
    }

    /// `B + Σ x_i A_i` for a real point.
    pub fn assemble(&self, x: &[f64]) -> Result<HermitianMatrix> {
        if x.len() != self.d() {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.d(), x.len())));
        }
        let base = HermitianMatrix::linear_combination(x, &self.matrices);
        Ok(match &self.offset {
            Some(b) => base.add(b),
            None => base,
        })
    }

    fn assemble_complex(&self, z: Complex64, zs: &[Complex64]) -> CMatrix {
        let mut out = match &self.offset {
            Some(b) => b.as_matrix().clone(),
            None => CMatrix::zeros(self.m, self.m),
        };
        for i in 0..self.m {
            out[(i, i)] += z;
        }
        for (c, a) in zs.iter().zip(&self.matrices) {
            out += a.as_matrix() * *c;
        }
        out
    }

    /// Determinant at `(z, z_1..z_d)`; `z` must be given iff the `z·I` term is present.
    pub fn evaluate(&self, point: &[Complex64], z: Option<Complex64>) -> Result<Complex64> {
        check_len(point, self.d())?;
        let z = match (self.include_z_identity, z) {
            (true, Some(z)) => z,
            (false, None) => Complex64::new(0.0, 0.0),
            (true, None) => return Err(Error::Domain("missing value for z".into())),
            (false, Some(_)) => return Err(Error::Domain("polynomial has no z variable".into())),
        };
        Ok(self.assemble_complex(z, point).determinant())
    }

    /// Univariate polynomial in `z` of `det(z·I + M)` for Hermitian `M`.
    fn z_polynomial(&self, m: &HermitianMatrix) -> RealPoly {
        let eig = m.eigenvalues();
        if self.include_z_identity {
            RealPoly::from_roots(&eig.iter().map(|l| -l).collect::<Vec<_>>())
        } else {
            RealPoly::constant(eig.iter().product())
        }
    }

    /// Whether every `A_i` has numerical rank at most one.
    pub fn is_rank_one(&self) -> bool {
        self.matrices.iter().all(rank_at_most_one)
    }
}

pub(crate) fn rank_at_most_one(a: &HermitianMatrix) -> bool {
    let e = a.eigenvalues();
    let norm = e.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    e.len() < 2 || e[e.len() - 2].abs() <= RANK_ONE_TOL * norm
}

impl Evaluable for DeterminantalPoly {
    fn nvars(&self) -> usize {
        self.d() + usize::from(self.include_z_identity)
    }

    fn total_degree(&self) -> usize {
        self.m
    }

    fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        check_len(point, self.nvars())?;
        if self.include_z_identity {
            self.evaluate(&point[1..], Some(point[0]))
        } else {
            self.evaluate(point, None)
        }
    }

    /// Error relative to the Hadamard bound `∏ ‖row_i‖` rather than to the
    /// (possibly tiny) determinant itself.
    fn eval_with_error(&self, point: &[Complex64]) -> Result<(Complex64, f64)> {
        check_len(point, self.nvars())?;
        let (z, zs) = if self.include_z_identity {
            (point[0], &point[1..])
        } else {
            (Complex64::new(0.0, 0.0), point)
        };
        let a = self.assemble_complex(z, zs);
        let hadamard: f64 = a.row_iter().map(|r| r.norm()).product();
        Ok((a.determinant(), 32.0 * self.m as f64 * f64::EPSILON * hadamard))
    }
}

/// Polynomial affine in each of `z_1..z_d`, with coefficients that are
/// univariate polynomials in `z` (constants when `has_z` is false).
/// Subsets are bit masks: bit `i` set means `z_i` is present.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiAffinePoly {
    d: usize,
    has_z: bool,
    coeffs: BTreeMap<u32, RealPoly>,
}

impl MultiAffinePoly {
    pub fn new(d: usize, has_z: bool, coeffs: BTreeMap<u32, RealPoly>) -> Result<Self> {
        if d > 31 {
            return Err(Error::Resource(format!("{d} variables exceed the mask width")));
        }
        for (&mask, c) in &coeffs {
            if mask >> d != 0 {
                return Err(Error::Validation(format!("subset mask {mask:#b} uses more than {d} variables")));
            }
            if !has_z && c.degree().unwrap_or(0) > 0 {
                return Err(Error::Validation("coefficient depends on z but has_z is false".into()));
            }
        }
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Self { d, has_z, coeffs })
    }

    /// Builds a constant-coefficient table from `(subset, value)` pairs.
    pub fn from_terms(d: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (vars, c) in terms {
            let mut mask = 0u32;
            for &v in *vars {
                if v >= d {
                    return Err(Error::Domain(format!("variable {v} out of range for d = {d}")));
                }
                mask |= 1 << v;
            }
            let entry = coeffs.entry(mask).or_insert_with(RealPoly::zero);
            *entry = entry.add(&RealPoly::constant(*c));
        }
        Self::new(d, false, coeffs)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn has_z(&self) -> bool {
        self.has_z
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, RealPoly> {
        &self.coeffs
    }

    pub fn coeff(&self, mask: u32) -> RealPoly {
        self.coeffs.get(&mask).cloned().unwrap_or_else(RealPoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let masks: std::collections::BTreeSet<u32> =
            self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        masks
            .into_iter()
            .map(|s| self.coeff(s).max_coeff_diff(&other.coeff(s)))
            .fold(0.0, f64::max)
    }

    /// `(1 + t·∂_i) p`: the coefficient of `S ∋ i` moves to `S ∖ {i}`.
    pub fn shift_operator(&self, i: usize, t: f64) -> Result<Self> {
        if i >= self.d {
            return Err(Error::Domain(format!("variable {i} out of range for d = {}", self.d)));
        }
        let bit = 1u32 << i;
        let mut out = self.coeffs.clone();
        for (&mask, c) in &self.coeffs {
            if mask & bit != 0 {
                let entry = out.entry(mask & !bit).or_insert_with(RealPoly::zero);
                *entry = entry.add(&c.scale(t));
            }
        }
        Self::new(self.d, self.has_z, out)
    }

    /// `∏_i (1 − ∂_i) p` over all `z_i`.
    pub fn one_minus_all_partials(&self) -> Self {
        (0..self.d).fold(self.clone(), |p, i| p.shift_operator(i, -1.0).expect("index in range"))
    }

    /// Value at a real point `(z_1..z_d)` for constant-coefficient tables, or at
    /// `(z_1..z_d)` with `z` given separately.
    pub fn eval_real(&self, x: &[f64], z: f64) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.d, x.len())));
        }
        Ok(self
            .coeffs
            .iter()
            .map(|(&mask, c)| {
                let mono: f64 = (0..self.d).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).product();
                c.eval(z) * mono
            })
            .sum())
    }

    /// `∂_i p` at a real point.
    pub fn partial_real(&self, i: usize, x: &[f64], z: f64) -> Result<f64> {
        if i >= self.d {
            return Err(Error::Domain(format!("variable {i} out of range for d = {}", self.d)));
        }
        let bit = 1u32 << i;
        let mut y = x.to_vec();
        y[i] = 1.0;
        let mut sum = 0.0;
        for (&mask, c) in &self.coeffs {
            if mask & bit != 0 {
                let mono: f64 = (0..self.d).filter(|k| mask >> k & 1 == 1 && *k != i).map(|k| y[k]).product();
                sum += c.eval(z) * mono;
            }
        }
        Ok(sum)
    }

    /// Barrier value `∂_i p / p` at a real point.
    pub fn barrier_phi(&self, i: usize, x: &[f64]) -> Result<f64> {
        let p = self.eval_real(x, 0.0)?;
        if p == 0.0 {
            return Err(Error::Singular { min_abs_eigenvalue: 0.0 });
        }
        Ok(self.partial_real(i, x, 0.0)? / p)
    }

    fn specialize_last_table(&self, t: f64) -> BTreeMap<u32, RealPoly> {
        let bit = 1u32 << (self.d - 1);
        let mut out: BTreeMap<u32, RealPoly> = BTreeMap::new();
        for (&mask, c) in &self.coeffs {
            let (key, val) = if mask & bit != 0 { (mask & !bit, c.scale(t)) } else { (mask, c.clone()) };
            let entry = out.entry(key).or_insert_with(RealPoly::zero);
            *entry = entry.add(&val);
        }
        let scale = self.coeffs.values().map(RealPoly::max_abs_coeff).fold(0.0, f64::max) * (1.0 + t.abs());
        out.into_iter()
            .map(|(k, c)| (k, c.chop(0.0)))
            .filter(|(_, c)| c.max_abs_coeff() > 1e-14 * scale)
            .collect()
    }
}

impl Evaluable for MultiAffinePoly {
    fn nvars(&self) -> usize {
        self.d + usize::from(self.has_z)
    }

    fn total_degree(&self) -> usize {
        self.coeffs
            .iter()
            .map(|(m, c)| m.count_ones() as usize + c.degree().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        check_len(point, self.nvars())?;
        let (z, zs) = if self.has_z { (point[0], &point[1..]) } else { (Complex64::new(0.0, 0.0), point) };
        let mut sum = Complex64::new(0.0, 0.0);
        for (&mask, c) in &self.coeffs {
            let mut term = c.eval_complex(z);
            for (i, zi) in zs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    term *= zi;
                }
            }
            sum += term;
        }
        Ok(sum)
    }

    fn eval_with_error(&self, point: &[Complex64]) -> Result<(Complex64, f64)> {
        check_len(point, self.nvars())?;
        let (z, zs) = if self.has_z { (point[0], &point[1..]) } else { (Complex64::new(0.0, 0.0), point) };
        let (mut sum, mut mag) = (Complex64::new(0.0, 0.0), 0.0);
        for (&mask, c) in &self.coeffs {
            let mut term = c.eval_complex(z);
            for (i, zi) in zs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    term *= zi;
                }
            }
            sum += term;
            mag += term.norm();
        }
        Ok((sum, 8.0 * (1.0 + self.total_degree() as f64) * f64::EPSILON * mag))
    }
}

impl Evaluable for RealPoly {
    fn nvars(&self) -> usize {
        1
    }

    fn total_degree(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        check_len(point, 1)?;
        Ok(self.eval_complex(point[0]))
    }
}

/// Result of fixing the last variable.
#[derive(Clone, Debug)]
pub enum Specialized {
    Determinantal(DeterminantalPoly),
    MultiAffine(MultiAffinePoly),
    /// Only `z` (or nothing) remains.
    Univariate(RealPoly),
    /// The specialization vanishes identically; the result is not stable.
    IdenticallyZero,
}

impl Specialized {
    pub fn is_identically_zero(&self) -> bool {
        matches!(self, Specialized::IdenticallyZero)
    }
}

/// Sets the last `z_i` to the real value `t`.
pub fn specialize_last_determinantal(p: &DeterminantalPoly, t: f64) -> Result<Specialized> {
    if p.nvars() <= 1 {
        return Err(Error::Domain("specialization needs at least two variables".into()));
    }
    let mut matrices = p.matrices.clone();
    let last = matrices.pop().expect("d >= 1");
    let shifted = last.scale(t);
    let offset = match &p.offset {
        Some(b) => b.add(&shifted),
        None => shifted,
    };
    if matrices.is_empty() {
        let poly = p.z_polynomial(&offset);
        let scale = 1.0 + offset.operator_norm().powi(p.m as i32);
        if poly.is_zero() || poly.max_abs_coeff() <= 1e-12 * scale {
            return Ok(Specialized::IdenticallyZero);
        }
        return Ok(Specialized::Univariate(poly));
    }
    let q = DeterminantalPoly { m: p.m, matrices, include_z_identity: p.include_z_identity, offset: Some(offset) };
    if !q.include_z_identity && determinantal_vanishes(&q) {
        return Ok(Specialized::IdenticallyZero);
    }
    Ok(Specialized::Determinantal(q))
}

/// Randomized identity test: a nonzero polynomial of degree `m` vanishes at a
/// few generic complex points with probability zero.
fn determinantal_vanishes(q: &DeterminantalPoly) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let scale = q.matrices.iter().chain(q.offset.iter()).map(|a| a.operator_norm()).fold(0.0, f64::max);
    let tol = 1e-12 * (1.0 + 2.0 * scale * q.d() as f64).powi(q.m as i32);
    (0..3).all(|_| {
        let pt: Vec<Complex64> =
            (0..q.d()).map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        q.evaluate(&pt, None).map(|v| v.norm() <= tol).unwrap_or(false)
    })
}

pub fn specialize_last_multiaffine(p: &MultiAffinePoly, t: f64) -> Result<Specialized> {
    if p.nvars() <= 1 {
        return Err(Error::Domain("specialization needs at least two variables".into()));
    }
    let table = p.specialize_last_table(t);
    if table.is_empty() {
        return Ok(Specialized::IdenticallyZero);
    }
    if p.d == 1 {
        return Ok(Specialized::Univariate(table.get(&0).cloned().unwrap_or_else(RealPoly::zero)));
    }
    Ok(Specialized::MultiAffine(MultiAffinePoly::new(p.d - 1, p.has_z, table)?))
}

/// Expands a rank-one determinantal polynomial into its multi-affine table by
/// evaluating at all `0/1` points and applying Möbius inversion.
pub fn to_multiaffine(p: &DeterminantalPoly) -> Result<MultiAffinePoly> {
    for (i, a) in p.matrices.iter().enumerate() {
        if !rank_at_most_one(a) {
            return Err(Error::Domain(format!("matrix {i} has rank greater than one")));
        }
    }
    let d = p.d();
    if d > MAX_MULTIAFFINE_VARS {
        return Err(Error::Resource(format!(
            "{d} variables exceed the multi-affine cap of {MAX_MULTIAFFINE_VARS}"
        )));
    }
    let width = p.m + 1;
    let mut table = vec![0.0; width << d];
    for mask in 0..(1usize << d) {
        let x: Vec<f64> = (0..d).map(|i| (mask >> i & 1) as f64).collect();
        let poly = p.z_polynomial(&p.assemble(&x)?);
        table[mask * width..mask * width + poly.coeffs().len()].copy_from_slice(poly.coeffs());
    }
    // subset-difference transform: f(S) = Σ_{T⊆S} (−1)^{|S∖T|} g(T)
    for i in 0..d {
        let bit = 1usize << i;
        for mask in 0..(1usize << d) {
            if mask & bit != 0 {
                for k in 0..width {
                    table[mask * width + k] -= table[(mask ^ bit) * width + k];
                }
            }
        }
    }
    let scale = table.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let cut = 1e-11 * scale.max(1.0);
    let mut coeffs = BTreeMap::new();
    for mask in 0..(1usize << d) {
        let c: Vec<f64> =
            table[mask * width..(mask + 1) * width].iter().map(|&c| if c.abs() <= cut { 0.0 } else { c }).collect();
        let poly = RealPoly::new(c);
        if !poly.is_zero() {
            coeffs.insert(mask as u32, poly);
        }
    }
    MultiAffinePoly::new(d, p.include_z_identity, coeffs)
}

/// One failing line restriction found by the stability probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeWitness {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub restriction: RealPoly,
    pub root_re: f64,
    pub root_im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityProbe {
    /// No failing restriction was found. This is evidence, not a proof.
    pub passed: bool,
    pub lines_checked: usize,
    pub witness: Option<ProbeWitness>,
}

/// Coefficients of `t ↦ f(t)` (degree ≤ `degree`) by sampling on a circle,
/// with absolute error estimates per coefficient.
fn interpolate_on_circle(
    degree: usize,
    radius: f64,
    f: impl Fn(Complex64) -> Result<(Complex64, f64)>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = degree + 1;
    let evaluated: Vec<(Complex64, f64)> = (0..n)
        .map(|k| f(Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)))
        .collect::<Result<_>>()?;
    let sample_err = evaluated.iter().map(|&(v, e)| e + 4.0 * n as f64 * f64::EPSILON * v.norm()).fold(0.0, f64::max);
    let errors = (0..n).map(|j| sample_err / radius.powi(j as i32)).collect();
    let samples: Vec<Complex64> = evaluated.into_iter().map(|(v, _)| v).collect();
    let coeffs = (0..n)
        .map(|j| {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                .sum();
            s.re / n as f64 / radius.powi(j as i32)
        })
        .collect();
    Ok((coeffs, errors))
}

/// Samples random real lines `t ↦ P(x + t·e)` with `x ∈ [−2,2]^d`,
/// `e ∈ (0,1]^d` scaled to `max e_i = 1`, and checks each restriction for
/// real-rootedness.
pub fn probe_real_stability(p: &dyn Evaluable, lines: usize, seed: u64) -> Result<StabilityProbe> {
    if lines == 0 {
        return Err(Error::Domain("at least one probe line is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.nvars();
    let degree = p.total_degree();
    for line in 0..lines {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let mut e: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
        let top = e.iter().copied().fold(0.0, f64::max);
        e.iter_mut().for_each(|v| *v /= top);
        let (mut coeffs, errors) = interpolate_on_circle(degree, 1.0, |t| {
            let pt: Vec<Complex64> = x.iter().zip(&e).map(|(xi, ei)| t * ei + xi).collect();
            p.eval_with_error(&pt)
        })?;
        let reversed: Vec<f64> = coeffs.iter().rev().copied().collect();
        let reversed_err: Vec<f64> = errors.iter().rev().copied().collect();
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1].abs() <= 4.0 * errors[coeffs.len() - 1] {
            coeffs.pop();
        }
        let restriction = RealPoly::new(coeffs);
        if restriction.degree().unwrap_or(0) < 1 {
            continue;
        }
        let mut check = restriction.is_real_rooted_within(DEFAULT_ROOT_TOL, &errors)?;
        // Roots escaping to infinity show up as a cluster at zero of the
        // reversed polynomial, where the error-aware test applies.
        if !check.real_rooted && reversed[degree].abs() > 4.0 * reversed_err[degree] {
            let rev = RealPoly::new(reversed);
            if rev.degree().unwrap_or(0) >= 1 && rev.is_real_rooted_within(DEFAULT_ROOT_TOL, &reversed_err)?.real_rooted {
                check.real_rooted = true;
            }
        }
        if !check.real_rooted {
            let root = check.witness.expect("witness on failure");
            return Ok(StabilityProbe {
                passed: false,
                lines_checked: line + 1,
                witness: Some(ProbeWitness { base: x, direction: e, restriction, root_re: root.re, root_im: root.im }),
            });
        }
    }
    Ok(StabilityProbe { passed: true, lines_checked: lines, witness: None })
}

fn require_no_z(p: &DeterminantalPoly) -> Result<()> {
    if p.include_z_identity {
        return Err(Error::Domain("barrier functions are defined for det(Σ z_i A_i) without the z·I term".into()));
    }
    Ok(())
}

/// `Φ^j(x) = ∂_j log p(x) = tr((Σ x_i A_i)^{-1} A_j)`.
pub fn barrier_phi(p: &DeterminantalPoly, x: &[f64], j: usize) -> Result<f64> {
    require_no_z(p)?;
    if j >= p.d() {
        return Err(Error::Domain(format!("variable {j} out of range for d = {}", p.d())));
    }
    let m = p.assemble(x)?;
    let eig = m.eigen();
    let norm = eig.values.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let min_abs = eig.values.iter().fold(f64::INFINITY, |a, l| a.min(l.abs()));
    if min_abs <= SINGULAR_TOL * norm || norm == 0.0 {
        return Err(Error::Singular { min_abs_eigenvalue: min_abs });
    }
    let a = p.matrices[j].as_matrix();
    let mut phi = 0.0;
    for (k, lambda) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(k);
        phi += (v.adjoint() * a * v)[(0, 0)].re / lambda;
    }
    Ok(phi)
}

/// Sampled shape of `t ↦ Φ^i(x + t·e_j)` and, for rank-one inputs, the
/// one-step barrier inequality after applying `1 − ∂_j`.
#[derive(Clone, Debug, Serialize)]
pub struct BarrierReport {
    pub i: usize,
    pub j: usize,
    pub h: f64,
    pub values: Vec<f64>,
    pub positive: bool,
    pub decreasing: bool,
    pub convex: bool,
    pub step: Option<BarrierStep>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierStep {
    pub delta: f64,
    pub phi_before: f64,
    pub phi_after: f64,
    pub holds: bool,
}

impl BarrierReport {
    pub fn pass(&self) -> bool {
        self.positive && self.decreasing && self.convex && self.step.as_ref().is_none_or(|s| s.holds)
    }
}

fn check_orthant(p: &DeterminantalPoly, x: &[f64]) -> Result<()> {
    let m = p.assemble(x)?;
    let lo = m.min_eigenvalue();
    if lo <= SINGULAR_TOL * m.operator_norm() {
        return Err(Error::Precondition(format!(
            "Σ x_i A_i is not positive definite at the corner (min eigenvalue {lo:e})"
        )));
    }
    Ok(())
}

pub fn barrier_diagnostics(
    p: &DeterminantalPoly,
    x: &[f64],
    j: usize,
    i: usize,
    steps: usize,
    h: f64,
) -> Result<BarrierReport> {
    require_no_z(p)?;
    if i >= p.d() || j >= p.d() {
        return Err(Error::Domain(format!("variable index out of range for d = {}", p.d())));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step h = {h} must be positive")));
    }
    check_orthant(p, x)?;
    let values = (0..=steps)
        .map(|k| {
            let mut y = x.to_vec();
            y[j] += k as f64 * h;
            barrier_phi(p, &y, i)
        })
        .collect::<Result<Vec<_>>>()?;
    let positive = values.iter().all(|&v| v >= -BARRIER_SIGN_TOL);
    let decreasing = values.windows(2).all(|w| w[1] - w[0] <= BARRIER_SIGN_TOL);
    let convex = values.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] >= -BARRIER_SIGN_TOL);

    let phi_j = barrier_phi(p, x, j)?;
    let step = if phi_j < 1.0 && p.is_rank_one() && p.d() <= MAX_MULTIAFFINE_VARS {
        let delta = 1.0 / (1.0 - phi_j);
        let table = to_multiaffine(p)?.shift_operator(j, -1.0)?;
        let mut y = x.to_vec();
        y[j] += delta;
        let phi_after = table.barrier_phi(i, &y)?;
        Some(BarrierStep { delta, phi_before: values[0], phi_after, holds: phi_after <= values[0] + BARRIER_STEP_TOL })
    } else {
        None
    };
    Ok(BarrierReport { i, j, h, values, positive, decreasing, convex, step })
}

/// Nodes and weights with `Σ w_k f(y + n_k) = f(y) − f'(y)` for every
/// polynomial `f` of degree ≤ `degree`.
pub fn one_minus_derivative_rule(degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match degree {
        0 => return Ok((vec![0.0], vec![1.0])),
        1 => return Ok((vec![-1.0], vec![1.0])),
        _ => {}
    }
    let n = degree + 1;
    let nodes: Vec<f64> = (0..n).map(|k| (PI * (k as f64 + 0.5) / n as f64).cos()).collect();
    let v = DMatrix::from_fn(n, n, |row, col| nodes[col].powi(row as i32));
    let mut rhs = DVector::zeros(n);
    rhs[0] = 1.0;
    rhs[1] = -1.0;
    let w = v
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Verification("singular interpolation system".into()))?;
    Ok((nodes, w.iter().copied().collect()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroFreeReport {
    pub delta: f64,
    pub phi: Vec<f64>,
    pub corner: Vec<f64>,
    pub corner_value: f64,
    pub probes: usize,
    pub min_value: f64,
    pub argmin: Vec<f64>,
    pub positive: bool,
    pub used_multiaffine: bool,
}

/// Value of `∏_i (1 − ∂_i) p` at `y`, evaluated with per-variable node rules.
fn one_minus_partials_at(p: &DeterminantalPoly, rules: &[(Vec<f64>, Vec<f64>)], y: &[f64]) -> Result<f64> {
    let d = y.len();
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        let pt: Vec<f64> = (0..d)
            .map(|i| {
                weight *= rules[i].1[idx[i]];
                y[i] + rules[i].0[idx[i]]
            })
            .collect();
        let m = p.assemble(&pt)?;
        total += weight * m.eigenvalues().iter().product::<f64>();
        let mut k = 0;
        loop {
            if k == d {
                return Ok(total);
            }
            idx[k] += 1;
            if idx[k] < rules[k].0.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Checks that `∏(1 − ∂_i) p` is positive on the orthant `{y ≥ x + δ·1}`.
pub fn one_minus_partials_zero_free(
    p: &DeterminantalPoly,
    x: &[f64],
    delta: f64,
    probes: usize,
    seed: u64,
) -> Result<ZeroFreeReport> {
    require_no_z(p)?;
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    check_orthant(p, x)?;
    let phi = (0..p.d()).map(|j| barrier_phi(p, x, j)).collect::<Result<Vec<_>>>()?;
    let offending: Vec<usize> = phi.iter().enumerate().filter(|(_, &v)| v + 1.0 / delta > 1.0 + 1e-12).map(|(j, _)| j).collect();
    if !offending.is_empty() {
        return Err(Error::Precondition(format!("Φ^j(x) + 1/δ > 1 for j in {offending:?}")));
    }

    let used_multiaffine = p.is_rank_one() && p.d() <= MAX_MULTIAFFINE_VARS;
    let table = if used_multiaffine { Some(to_multiaffine(p)?.one_minus_all_partials()) } else { None };
    let rules = if used_multiaffine {
        Vec::new()
    } else {
        p.matrices
            .iter()
            .map(|a| one_minus_derivative_rule(a.numerical_rank(RANK_ONE_TOL)))
            .collect::<Result<Vec<_>>>()?
    };
    let value = |y: &[f64]| match &table {
        Some(t) => t.eval_real(y, 0.0),
        None => one_minus_partials_at(p, &rules, y),
    };

    let corner: Vec<f64> = x.iter().map(|v| v + delta).collect();
    let corner_value = value(&corner)?;
    let (mut min_value, mut argmin) = (corner_value, corner.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        let y: Vec<f64> = corner.iter().map(|c| c + rng.random_range(0.0..=4.0 * (1.0 + c.abs()))).collect();
        let v = value(&y)?;
        if v < min_value {
            min_value = v;
            argmin = y;
        }
    }
    Ok(ZeroFreeReport {
        delta,
        phi,
        corner,
        corner_value,
        probes,
        min_value,
        argmin,
        positive: min_value > 0.0,
        used_multiaffine,
    })
}

/// Barrier parameters `(t, δ)` for `ε`: `t = ε + √ε`, `δ = 1 + √ε`, so that
/// `ε/t + 1/δ = 1` and `t + δ = (1 + √ε)²`.
pub fn canonical_barrier_params(eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("epsilon = {eps} must be positive")));
    }
    let s = eps.sqrt();
    Ok((eps + s, 1.0 + s))
}
