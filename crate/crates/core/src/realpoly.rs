//! Univariate polynomials with real coefficients.
//!
//! Coefficients are stored in ascending degree order; the zero polynomial is
//! the empty sequence. Root finding combines two routes:
//!
//! - an interlacing solver that recursively locates the critical points
//!   (roots of `p'`) and brackets exactly one root of `p` between
//!   consecutive critical points. It succeeds precisely when `p` is
//!   real-rooted (up to tolerance) and resolves multiple roots exactly.
//! - eigenvalues of the balanced companion matrix, used for polynomials that
//!   are not real-rooted and to produce complex witnesses.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance on imaginary parts when deciding real-rootedness.
pub const DEFAULT_ROOT_TOL: f64 = 1e-7;
/// Degree cap for root finding and parsing.
pub const MAX_DEGREE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealPoly {
    coeffs: Vec<f64>,
}

/// Outcome of a real-rootedness test.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRootedness {
    pub real_rooted: bool,
    /// An offending complex root when `real_rooted` is false.
    pub witness: Option<Complex64>,
}

impl RealPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c · z^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `∏ (z − r_i)`, expanded one linear factor at a time.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= r * a;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Coefficient of `z^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    /// `(1 + t·d/dz) p`.
    pub fn shift_operator(&self, t: f64) -> Self {
        self.add(&self.derivative().scale(t))
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("zero polynomial has no monic normalization".into()));
        }
        Ok(self.scale(1.0 / self.leading()))
    }

    /// Largest coefficient-wise difference.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|k| (self.coeff(k) - other.coeff(k)).abs()).fold(0.0, f64::max)
    }

    /// Zeroes coefficients with `|c| ≤ rel · max|c|` and trims.
    pub fn chop(&self, rel: f64) -> Self {
        let cut = rel * self.max_abs_coeff();
        Self::new(self.coeffs.iter().map(|&c| if c.abs() <= cut { 0.0 } else { c }).collect())
    }

    fn check_rootable(&self) -> Result<usize> {
        match self.degree() {
            None => Err(Error::Domain("zero polynomial has no well-defined roots".into())),
            Some(d) if d > MAX_DEGREE => {
                Err(Error::Resource(format!("degree {d} exceeds the cap of {MAX_DEGREE}")))
            }
            Some(d) => Ok(d),
        }
    }

    /// All complex roots, from the spectrum of the balanced companion matrix.
    /// Exact zero roots (vanishing low-order coefficients) are split off first.
    pub fn complex_roots(&self) -> Result<Vec<Complex64>> {
        self.check_rootable()?;
        let zeros = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let reduced: Vec<f64> = self.coeffs[zeros..].to_vec();
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        roots.extend(companion_roots(&reduced));
        Ok(roots)
    }

    /// Real-rootedness test with relative imaginary tolerance `tol`.
    pub fn is_real_rooted(&self, tol: f64) -> Result<RealRootedness> {
        self.is_real_rooted_within(tol, &[])
    }

    /// Real-rootedness when each coefficient `a_k` is only known up to an
    /// absolute error `coeff_err[k]` (missing entries count as zero). Root
    /// clusters that such perturbations can split off the real axis are
    /// accepted as multiple real roots.
    pub fn is_real_rooted_within(&self, tol: f64, coeff_err: &[f64]) -> Result<RealRootedness> {
        let degree = self.check_rootable()?;
        let lead = self.leading().abs();
        let err: Vec<f64> = (0..=degree).map(|k| coeff_err.get(k).copied().unwrap_or(0.0) / lead).collect();
        if degree == 0 || interlacing_roots(&self.monic()?.coeffs, tol, &err).is_some() {
            return Ok(RealRootedness { real_rooted: true, witness: None });
        }
        let roots = self.complex_roots()?;
        let worst = roots
            .iter()
            .copied()
            .max_by(|a, b| {
                let ra = a.im.abs() / (1.0 + a.norm());
                let rb = b.im.abs() / (1.0 + b.norm());
                ra.total_cmp(&rb)
            })
            .unwrap();
        if worst.im.abs() <= tol * (1.0 + worst.norm()) {
            return Ok(RealRootedness { real_rooted: true, witness: None });
        }
        Ok(RealRootedness { real_rooted: false, witness: Some(worst) })
    }

    /// Real roots with multiplicity, ascending, at the default tolerance.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        self.real_roots_tol(DEFAULT_ROOT_TOL)
    }

    /// Roots whose imaginary part is at most `tol · (1 + |root|)`, sorted
    /// ascending. For real-rooted input this is all `degree` roots.
    pub fn real_roots_tol(&self, tol: f64) -> Result<Vec<f64>> {
        let degree = self.check_rootable()?;
        if degree == 0 {
            return Ok(Vec::new());
        }
        if let Some(roots) = interlacing_roots(&self.monic()?.coeffs, tol, &[]) {
            return Ok(roots);
        }
        let mut real: Vec<f64> = self
            .complex_roots()?
            .into_iter()
            .filter(|r| r.im.abs() <= tol * (1.0 + r.norm()))
            .map(|r| r.re)
            .collect();
        real.sort_by(f64::total_cmp);
        Ok(real)
    }

    /// Largest real root (`ZM`). Errors if there is none.
    pub fn max_real_root(&self) -> Result<f64> {
        self.max_real_root_tol(DEFAULT_ROOT_TOL)
    }

    pub fn max_real_root_tol(&self, tol: f64) -> Result<f64> {
        self.real_roots_tol(tol)?
            .last()
            .copied()
            .ok_or_else(|| Error::Domain("polynomial has no real root".into()))
    }

    /// Ascending coefficients separated by single spaces, shortest round-trip form.
    pub fn to_text(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        self.coeffs.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(" ")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let line = text.trim();
        if line.lines().count() > 1 {
            return Err(Error::Validation("polynomial text must be a single line".into()));
        }
        let coeffs = line
            .split_whitespace()
            .enumerate()
            .map(|(k, tok)| {
                tok.parse::<f64>()
                    .map_err(|e| Error::Validation(format!("coefficient {k} ({tok:?}): {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = Self::new(coeffs);
        if p.degree().unwrap_or(0) > MAX_DEGREE {
            return Err(Error::Resource(format!("degree exceeds the cap of {MAX_DEGREE}")));
        }
        Ok(p)
    }
}

impl fmt::Display for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Companion-matrix eigenvalues of a polynomial with nonzero constant term.
fn companion_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    if n == 1 {
        return vec![Complex64::new(-coeffs[0] / lead, 0.0)];
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -coeffs[i] / lead;
    }
    balance(&mut c);
    c.complex_eigenvalues().iter().copied().collect()
}

/// Parlett–Reinsch balancing by powers of two; preserves the spectrum exactly.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].abs();
                    row += m[(i, j)].abs();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut c = col;
            while c < row / radix {
                c *= radix;
                f *= radix;
            }
            while c >= row * radix {
                c /= radix;
                f /= radix;
            }
            let _ = c;
            if (col * f + row / f) < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Running-error bound scale for Horner evaluation: `Σ |a_i| |x|^i`.
fn abs_horner(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &a| acc * ax + a.abs())
}

/// Roots of a monic polynomial via the critical-point interlacing test.
///
/// A monic degree-`n` polynomial is real-rooted iff `p'` is, and at the
/// `k`-th critical point `c_k` (ascending) the value `p(c_k)` has sign
/// `(−1)^(n−k)` or vanishes. A wrong-sign value no larger than what a
/// complex pair with imaginary part `tol·(1+|c|)` would produce is accepted
/// as a multiple root at `c_k`, as is one within the coefficient
/// uncertainty `err` (absolute, per coefficient; may be empty). Returns
/// `None` if `p` is not real-rooted.
fn interlacing_roots(monic: &[f64], tol: f64, err: &[f64]) -> Option<Vec<f64>> {
    let n = monic.len() - 1;
    match n {
        0 => return Some(Vec::new()),
        1 => return Some(vec![-monic[0]]),
        _ => {}
    }
    let deriv: Vec<f64> = (1..=n).map(|k| k as f64 * monic[k] / n as f64).collect();
    let deriv_err: Vec<f64> = (1..err.len().min(n + 1)).map(|k| k as f64 * err[k] / n as f64).collect();
    let crit = interlacing_roots(&deriv, tol, &deriv_err)?;
    let second: Vec<f64> = (2..=n).map(|k| (k * (k - 1)) as f64 * monic[k]).collect();

    let eps = f64::EPSILON;
    let bound = 1.0 + monic[..n].iter().fold(0.0f64, |m, a| m.max(a.abs()));
    // touch[k]: p has a (multiple) root at crit[k]
    let mut touch = vec![false; n - 1];
    let mut values = vec![0.0; n - 1];
    for (k, &c) in crit.iter().enumerate() {
        let v = horner(monic, c);
        let expected = if (n - (k + 1)).is_multiple_of(2) { 1.0 } else { -1.0 };
        let rounding = 16.0 * n as f64 * eps * abs_horner(monic, c) + abs_horner(err, c);
        let pair = tol * tol * (1.0 + c.abs()).powi(2) * horner(&second, c).abs() * 0.5;
        let signed = expected * v;
        if signed < -(rounding + pair) {
            return None;
        }
        touch[k] = signed <= 0.0;
        values[k] = v;
    }

    let mut roots = Vec::with_capacity(n);
    for k in 0..n {
        // interval k lies between crit[k-1] and crit[k]
        let left = if k == 0 { None } else { Some(k - 1) };
        let right = if k == n - 1 { None } else { Some(k) };
        if let Some(l) = left {
            if touch[l] {
                roots.push(crit[l]);
                continue;
            }
        }
        if let Some(r) = right {
            if touch[r] {
                roots.push(crit[r]);
                continue;
            }
        }
        let (mut lo, mut flo) = match left {
            Some(l) => (crit[l], values[l]),
            None => {
                let x = -bound.max(crit[0].abs() + 1.0);
                (x, horner(monic, x))
            }
        };
        let (mut hi, mut fhi) = match right {
            Some(r) => (crit[r], values[r]),
            None => {
                let x = bound.max(crit[n - 2].abs() + 1.0);
                (x, horner(monic, x))
            }
        };
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if fhi == 0.0 {
            roots.push(hi);
            continue;
        }
        if flo.signum() == fhi.signum() {
            // no sign change: only possible through rounding at a touching pair
            roots.push(if flo.abs() < fhi.abs() { lo } else { hi });
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = horner(monic, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
        }
        let _ = fhi;
        roots.push(0.5 * (lo + hi));
    }
    roots.sort_by(f64::total_cmp);
    Some(roots)
}

/// `(1 − t) p + t q`, coefficient by coefficient.
pub fn convex_combination(p: &RealPoly, q: &RealPoly, t: f64) -> Result<RealPoly> {
    check_monic_pair(p, q)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    let n = p.coeffs.len();
    Ok(RealPoly::new((0..n).map(|k| (1.0 - t) * p.coeff(k) + t * q.coeff(k)).collect()))
}

fn check_monic_pair(p: &RealPoly, q: &RealPoly) -> Result<()> {
    if p.degree() != q.degree() {
        return Err(Error::Domain(format!(
            "degree mismatch: {:?} vs {:?}",
            p.degree(),
            q.degree()
        )));
    }
    for (name, poly) in [("p", p), ("q", q)] {
        if poly.is_zero() || (poly.leading() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("{name} is not monic")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketSample {
    pub t: f64,
    pub real_rooted: bool,
    pub zm: Option<f64>,
    pub in_bracket: bool,
}

/// Sampled check that `ZM((1−t)p + tq)` stays between `ZM(p)` and `ZM(q)`.
#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    pub zm_p: f64,
    pub zm_q: f64,
    pub samples: Vec<BracketSample>,
    /// `t` values where the combination was real-rooted but left the bracket.
    pub violations: Vec<f64>,
    /// `t` values where the combination was not real-rooted.
    pub precondition_failures: Vec<f64>,
}

impl BracketReport {
    pub fn precondition_holds(&self) -> bool {
        self.precondition_failures.is_empty()
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const BRACKET_TOL: f64 = 1e-8;

pub fn zm_bracket_check(p: &RealPoly, q: &RealPoly, samples: usize) -> Result<BracketReport> {
    check_monic_pair(p, q)?;
    if samples < 2 {
        return Err(Error::Domain("bracket check needs at least 2 samples".into()));
    }
    let zm_p = p.max_real_root()?;
    let zm_q = q.max_real_root()?;
    let (lo, hi) = (zm_p.min(zm_q), zm_p.max(zm_q));
    let mut report = BracketReport {
        zm_p,
        zm_q,
        samples: Vec::with_capacity(samples),
        violations: Vec::new(),
        precondition_failures: Vec::new(),
    };
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let r = convex_combination(p, q, t)?;
        let real_rooted = r.is_real_rooted(DEFAULT_ROOT_TOL)?.real_rooted;
        let zm = if real_rooted { r.max_real_root().ok() } else { None };
        let in_bracket = zm.is_some_and(|z| {
            let slack = BRACKET_TOL * (1.0 + z.abs());
            z >= lo - slack && z <= hi + slack
        });
        if !real_rooted {
            report.precondition_failures.push(t);
        } else if !in_bracket {
            report.violations.push(t);
        }
        report.samples.push(BracketSample { t, real_rooted, zm, in_bracket });
    }
    Ok(report)
}
