//! Mixed characteristic polynomials and expected characteristic polynomials
//! of sums of independent random rank-one matrices.
//!
//! `μ[A_1..A_d](z) = ∏(1 − ∂_i) det(z·I + Σ z_i A_i) |_{z_i = 0}`.
//!
//! Two evaluation routes are provided:
//!
//! - rank-one families `A_i = u_i u_i*`: by Cauchy–Binet,
//!   `μ = Σ_{S ⊆ [d]} (−1)^{|S|} z^{m−|S|} det G_S` with `G` the Gram matrix
//!   of the `u_i`, an exact alternating sum over subsets of size at most `m`.
//! - general PSD families: `1 − ∂_i` at `z_i = 0` is a linear functional on
//!   polynomials of degree `rank(A_i)` in `z_i`, realized by a quadrature rule
//!   on `rank(A_i) + 1` nodes. For rank-one variables the rule is the single
//!   node `z_i = −1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianMatrix};
use crate::Complex64;
use crate::realpoly::{RealPoly, DEFAULT_ROOT_TOL};
use crate::stable::{one_minus_derivative_rule, rank_at_most_one, RANK_ONE_TOL};

/// Largest family handled by the alternating-sum route.
pub const MAX_RANK_ONE_VARS: usize = 20;
/// Largest number of rank > 1 variables handled by the general route.
pub const MAX_GENERAL_VARS: usize = 10;
/// Default cap on characteristic-polynomial evaluations.
pub const DEFAULT_BUDGET: u64 = 1 << 20;
/// Tolerance used when comparing against enumerated expectations.
pub const ENUMERATION_TOL: f64 = 1e-7;
/// Slack on the root bounds and on the monotonicity of the greedy chain.
pub const BOUND_TOL: f64 = 1e-8;

fn check_family(matrices: &[HermitianMatrix]) -> Result<usize> {
    let Some(first) = matrices.first() else {
        return Err(Error::Domain("empty matrix family".into()));
    };
    let m = first.dim();
    for (i, a) in matrices.iter().enumerate() {
        if a.dim() != m {
            return Err(Error::Domain(format!("matrix {i} has dimension {}, expected {m}", a.dim())));
        }
        a.check_psd()?;
    }
    Ok(m)
}

/// `det(z·I + M)` as a polynomial in `z`, with absolute coefficient error
/// bounds from a backward-stable eigensolver.
fn shifted_det(m: &HermitianMatrix) -> (RealPoly, Vec<f64>) {
    let eigs = m.eigenvalues();
    let n = eigs.len();
    let scale = eigs.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let delta = 8.0 * n as f64 * f64::EPSILON * scale;
    let roots: Vec<f64> = eigs.iter().map(|l| -l).collect();
    let exact = RealPoly::from_roots(&eigs.iter().map(|l| -l.abs()).collect::<Vec<_>>());
    let widened = RealPoly::from_roots(&eigs.iter().map(|l| -(l.abs() + delta)).collect::<Vec<_>>());
    let err = widened.coeffs().iter().zip(exact.coeffs()).map(|(w, e)| (w - e).abs() + 4.0 * n as f64 * f64::EPSILON * e.abs()).collect();
    (RealPoly::from_roots(&roots), err)
}

/// `A = u u*` with `u = √λ v` for the top eigenpair; `None` for `A = 0`.
fn rank_one_factor(a: &HermitianMatrix) -> Option<CVector> {
    let eig = a.eigen();
    let k = eig.values.len() - 1;
    let lambda = eig.values[k];
    (lambda > 0.0).then(|| eig.vectors.column(k) * Complex64::new(lambda.sqrt(), 0.0))
}

/// Rank-one route: with `A_i = u_i u_i*`, Cauchy–Binet gives the
/// multi-affine expansion `det(zI + Σ x_i A_i) = Σ_S z^{m−|S|} x^S det G_S`
/// (`G` the Gram matrix of the `u_i`), and `∏(1 − ∂_i)` at `x = 0` turns it
/// into the alternating sum `Σ_S (−1)^{|S|} z^{m−|S|} det G_S`.
fn alternating_sum(matrices: &[HermitianMatrix], m: usize) -> (RealPoly, Vec<f64>) {
    let factors: Vec<CVector> = matrices.iter().filter_map(rank_one_factor).collect();
    let d = factors.len();
    let gram = CMatrix::from_fn(d, d, |i, j| factors[i].dotc(&factors[j]));
    let mut acc = vec![0.0; m + 1];
    let mut err = vec![0.0; m + 1];
    for mask in 0u32..(1u32 << d) {
        let k = mask.count_ones() as usize;
        if k > m {
            continue;
        }
        let idx: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let minor = CMatrix::from_fn(k, k, |a, b| gram[(idx[a], idx[b])]);
        let det = if k == 0 { 1.0 } else { minor.determinant().re };
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        acc[m - k] += sign * det;
        let hadamard: f64 = idx.iter().map(|&i| factors[i].norm_squared()).product();
        err[m - k] += (32.0 * (k + 1) as f64 + d as f64) * f64::EPSILON * hadamard;
    }
    (RealPoly::new(acc), err)
}

/// Number of characteristic polynomials the general route evaluates.
pub fn general_route_cost(ranks: &[usize]) -> u64 {
    ranks.iter().fold(1u64, |acc, &k| if k <= 1 { acc } else { acc.saturating_mul(k as u64 + 1) })
}

fn general_route(matrices: &[HermitianMatrix], m: usize, budget: u64) -> Result<(RealPoly, Vec<f64>)> {
    let ranks: Vec<usize> = matrices.iter().map(|a| a.numerical_rank(RANK_ONE_TOL)).collect();
    let heavy = ranks.iter().filter(|&&k| k > 1).count();
    if heavy > MAX_GENERAL_VARS {
        return Err(Error::Resource(format!(
            "{heavy} matrices of rank > 1 exceed the cap of {MAX_GENERAL_VARS}"
        )));
    }
    let cost = general_route_cost(&ranks);
    if cost > budget {
        return Err(Error::Resource(format!("{cost} evaluations exceed the budget of {budget}")));
    }
    let rules = ranks.iter().map(|&k| one_minus_derivative_rule(k)).collect::<Result<Vec<_>>>()?;
    let d = matrices.len();
    let mut idx = vec![0usize; d];
    let mut acc = vec![0.0; m + 1];
    let mut err = vec![0.0; m + 1];
    loop {
        let mut weight = 1.0;
        let coeffs: Vec<f64> = (0..d)
            .map(|i| {
                weight *= rules[i].1[idx[i]];
                rules[i].0[idx[i]]
            })
            .collect();
        let (poly, poly_err) = shifted_det(&HermitianMatrix::linear_combination(&coeffs, matrices));
        for ((a, e), (c, ce)) in acc.iter_mut().zip(err.iter_mut()).zip(poly.coeffs().iter().zip(&poly_err)) {
            *a += weight * c;
            *e += weight.abs() * (ce + 2.0 * d as f64 * f64::EPSILON * c.abs());
        }
        let mut k = 0;
        loop {
            if k == d {
                return Ok((RealPoly::new(acc), err));
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

fn assert_real_rooted((p, err): (RealPoly, Vec<f64>)) -> Result<RealPoly> {
    let check = p.is_real_rooted_within(DEFAULT_ROOT_TOL, &err)?;
    if !check.real_rooted {
        return Err(Error::Verification(format!(
            "mixed characteristic polynomial is not real-rooted (root {:?})",
            check.witness
        )));
    }
    Ok(p)
}

/// Mixed characteristic polynomial of a PSD family. The result is checked
/// to be real-rooted.
pub fn mixed_char(matrices: &[HermitianMatrix]) -> Result<RealPoly> {
    mixed_char_with_budget(matrices, DEFAULT_BUDGET)
}

pub fn mixed_char_with_budget(matrices: &[HermitianMatrix], budget: u64) -> Result<RealPoly> {
    let m = check_family(matrices)?;
    let rank_one = matrices.iter().all(rank_at_most_one);
    let poly = if rank_one && matrices.len() <= MAX_RANK_ONE_VARS {
        alternating_sum(matrices, m)
    } else {
        general_route(matrices, m, budget)?
    };
    assert_real_rooted(poly)
}

/// Forces the general route, for cross-validation against the alternating sum.
pub fn mixed_char_general(matrices: &[HermitianMatrix], budget: u64) -> Result<RealPoly> {
    let m = check_family(matrices)?;
    assert_real_rooted(general_route(matrices, m, budget)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct Rank1Check {
    pub pass: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub mixed: RealPoly,
    pub char_poly: RealPoly,
}

/// Compares `μ[A_1..A_d]` with the characteristic polynomial of `Σ A_i`.
pub fn rank1_oracle_check(matrices: &[HermitianMatrix]) -> Result<Rank1Check> {
    check_family(matrices)?;
    if let Some(i) = matrices.iter().position(|a| !rank_at_most_one(a)) {
        return Err(Error::Domain(format!("matrix {i} has rank greater than one")));
    }
    if matrices.len() > MAX_RANK_ONE_VARS {
        return Err(Error::Resource(format!("{} matrices exceed the cap of {MAX_RANK_ONE_VARS}", matrices.len())));
    }
    let mixed = mixed_char(matrices)?;
    let char_poly = HermitianMatrix::sum(matrices).characteristic_polynomial();
    let max_error = mixed.max_coeff_diff(&char_poly);
    let tolerance = 1e-8 * (1.0 + char_poly.max_abs_coeff());
    Ok(Rank1Check { pass: max_error <= tolerance, max_error, tolerance, mixed, char_poly })
}

/// A random PSD rank-one matrix with finitely many outcomes.
#[derive(Clone, Debug)]
pub struct DiscreteMatrixVariable {
    outcomes: Vec<HermitianMatrix>,
    weights: Vec<f64>,
    mean: HermitianMatrix,
}

impl DiscreteMatrixVariable {
    /// Weights default to uniform.
    pub fn new(outcomes: Vec<HermitianMatrix>, weights: Option<Vec<f64>>) -> Result<Self> {
        let m = check_family(&outcomes)?;
        if let Some(i) = outcomes.iter().position(|a| !rank_at_most_one(a)) {
            return Err(Error::Domain(format!("outcome {i} has rank greater than one")));
        }
        let k = outcomes.len();
        let weights = weights.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        if weights.len() != k {
            return Err(Error::Validation(format!("{} weights for {k} outcomes", weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Validation(format!("weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("weights sum to {total}, not 1")));
        }
        let mean = HermitianMatrix::linear_combination(&weights, &outcomes);
        debug_assert_eq!(mean.dim(), m);
        Ok(Self { outcomes, weights, mean })
    }

    pub fn deterministic(value: HermitianMatrix) -> Result<Self> {
        Self::new(vec![value], None)
    }

    pub fn outcomes(&self) -> &[HermitianMatrix] {
        &self.outcomes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> &HermitianMatrix {
        &self.mean
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    /// `E‖A‖`.
    pub fn expected_norm(&self) -> f64 {
        self.outcomes.iter().zip(&self.weights).map(|(a, w)| w * a.operator_norm()).sum()
    }
}

/// One outcome index per variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizationAssignment {
    pub choices: Vec<usize>,
}

impl RealizationAssignment {
    pub fn new(choices: Vec<usize>, vars: &[DiscreteMatrixVariable]) -> Result<Self> {
        if choices.len() != vars.len() {
            return Err(Error::Validation(format!("{} choices for {} variables", choices.len(), vars.len())));
        }
        for (i, (&c, v)) in choices.iter().zip(vars).enumerate() {
            if c >= v.outcomes.len() {
                return Err(Error::Validation(format!("choice {c} out of range for variable {i}")));
            }
        }
        Ok(Self { choices })
    }

    pub fn realize(&self, vars: &[DiscreteMatrixVariable]) -> HermitianMatrix {
        let mats: Vec<HermitianMatrix> =
            self.choices.iter().zip(vars).map(|(&c, v)| v.outcomes[c].clone()).collect();
        HermitianMatrix::sum(&mats)
    }
}

fn check_vars(vars: &[DiscreteMatrixVariable]) -> Result<usize> {
    let Some(first) = vars.first() else {
        return Err(Error::Domain("no random variables".into()));
    };
    let m = first.dim();
    if let Some(i) = vars.iter().position(|v| v.dim() != m) {
        return Err(Error::Domain(format!("variable {i} has dimension {}, expected {m}", vars[i].dim())));
    }
    Ok(m)
}

/// Number of joint realizations, saturating.
pub fn realization_count(vars: &[DiscreteMatrixVariable]) -> u64 {
    vars.iter().fold(1u64, |acc, v| acc.saturating_mul(v.outcomes.len() as u64))
}

/// `Σ_realizations P(realization) · p_{ΣA_i}` by explicit enumeration.
pub fn enumerate_expected_char_poly(vars: &[DiscreteMatrixVariable], budget: u64) -> Result<RealPoly> {
    let m = check_vars(vars)?;
    let count = realization_count(vars);
    if count > budget {
        return Err(Error::Resource(format!("{count} realizations exceed the budget of {budget}")));
    }
    let mut acc = vec![0.0; m + 1];
    let mut idx = vec![0usize; vars.len()];
    loop {
        let prob: f64 = idx.iter().zip(vars).map(|(&k, v)| v.weights[k]).product();
        let sum = RealizationAssignment { choices: idx.clone() }.realize(vars);
        for (a, c) in acc.iter_mut().zip(sum.characteristic_polynomial().coeffs()) {
            *a += prob * c;
        }
        let mut k = 0;
        loop {
            if k == vars.len() {
                return Ok(RealPoly::new(acc));
            }
            idx[k] += 1;
            if idx[k] < vars[k].outcomes.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectedCharPoly {
    pub poly: RealPoly,
    /// Largest coefficient gap to the enumerated expectation, when enumerated.
    pub enumeration_error: Option<f64>,
}

/// `E p_{ΣA_i} = μ[E A_1, .., E A_d]`, cross-checked by enumeration when
/// there are at most [`DEFAULT_BUDGET`] realizations.
pub fn expected_char_poly(vars: &[DiscreteMatrixVariable]) -> Result<ExpectedCharPoly> {
    check_vars(vars)?;
    let means: Vec<HermitianMatrix> = vars.iter().map(|v| v.mean.clone()).collect();
    let poly = mixed_char(&means)?;
    let enumeration_error = if realization_count(vars) <= DEFAULT_BUDGET {
        let direct = enumerate_expected_char_poly(vars, DEFAULT_BUDGET)?;
        let err = poly.max_coeff_diff(&direct);
        if err > ENUMERATION_TOL * (1.0 + direct.max_abs_coeff()) {
            return Err(Error::Verification(format!(
                "mixed characteristic polynomial of the means differs from the enumerated expectation by {err:e}"
            )));
        }
        Some(err)
    } else {
        None
    };
    Ok(ExpectedCharPoly { poly, enumeration_error })
}

#[derive(Clone, Debug, Serialize)]
pub struct RootBoundReport {
    pub epsilon: f64,
    pub zm: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `ZM(E p_A) ≤ (1 + √ε)²` for isotropic families, `ε = max E‖A_i‖`.
pub fn expected_root_bound_check(vars: &[DiscreteMatrixVariable]) -> Result<RootBoundReport> {
    let m = check_vars(vars)?;
    let means: Vec<HermitianMatrix> = vars.iter().map(|v| v.mean.clone()).collect();
    let gap = HermitianMatrix::sum(&means).max_abs_diff(&HermitianMatrix::identity(m));
    if gap > 1e-8 {
        return Err(Error::Precondition(format!("Σ E A_i differs from the identity by {gap:e}")));
    }
    let epsilon = vars.iter().map(DiscreteMatrixVariable::expected_norm).fold(0.0, f64::max);
    let zm = expected_char_poly(vars)?.poly.max_real_root()?;
    let bound = (1.0 + epsilon.sqrt()).powi(2);
    Ok(RootBoundReport { epsilon, zm, bound, pass: zm <= bound + BOUND_TOL })
}

#[derive(Clone, Debug, Serialize)]
pub struct DerandomizedRealization {
    pub assignment: RealizationAssignment,
    /// `ZM` of the partially averaged polynomial before and after each choice.
    pub chain: Vec<f64>,
    pub expected_zm: f64,
    pub final_zm: f64,
    pub chain_nonincreasing: bool,
    pub pass: bool,
}

/// Evaluations needed by the greedy pass.
pub fn derandomization_cost(vars: &[DiscreteMatrixVariable]) -> u64 {
    let ranks: Vec<usize> = vars.iter().map(|v| v.mean.numerical_rank(RANK_ONE_TOL)).collect();
    let mut total = general_route_cost(&ranks);
    for j in 0..vars.len() {
        let rest = general_route_cost(&ranks[j + 1..]);
        total = total.saturating_add(rest.saturating_mul(vars[j].outcomes.len() as u64));
    }
    total
}

/// Greedy conditional-expectation pass: variable by variable, fix the outcome
/// minimizing the largest root of `μ[A_1..A_j, E A_{j+1}..E A_d]`. Ties go to
/// the lowest outcome index.
pub fn derandomized_realization(vars: &[DiscreteMatrixVariable], budget: u64) -> Result<DerandomizedRealization> {
    let m = check_vars(vars)?;
    let cost = derandomization_cost(vars);
    if cost > budget {
        return Err(Error::Resource(format!(
            "greedy derandomization needs {cost} evaluations, budget is {budget}; sample realizations at random instead"
        )));
    }
    let heavy = vars.iter().filter(|v| v.mean.numerical_rank(RANK_ONE_TOL) > 1).count();
    if heavy > MAX_GENERAL_VARS {
        return Err(Error::Resource(format!(
            "{heavy} means of rank > 1 exceed the cap of {MAX_GENERAL_VARS}; sample realizations at random instead"
        )));
    }
    let mut current: Vec<HermitianMatrix> = vars.iter().map(|v| v.mean.clone()).collect();
    let expected_zm = general_route(&current, m, budget)?.0.max_real_root()?;
    let mut chain = vec![expected_zm];
    let mut choices = Vec::with_capacity(vars.len());
    for (j, var) in vars.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (k, outcome) in var.outcomes.iter().enumerate() {
            current[j] = outcome.clone();
            let zm = general_route(&current, m, budget)?.0.max_real_root()?;
            if best.is_none_or(|(_, b)| zm < b) {
                best = Some((k, zm));
            }
        }
        let (k, zm) = best.expect("variables have outcomes");
        current[j] = var.outcomes[k].clone();
        choices.push(k);
        chain.push(zm);
    }
    let assignment = RealizationAssignment { choices };
    let final_zm = assignment.realize(vars).max_eigenvalue();
    let chain_nonincreasing = chain.windows(2).all(|w| w[1] <= w[0] + BOUND_TOL);
    let pass = chain_nonincreasing && final_zm <= expected_zm + BOUND_TOL;
    Ok(DerandomizedRealization { assignment, chain, expected_zm, final_zm, chain_nonincreasing, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rvector;

    fn diag(d: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_diagonal(d)
    }

    fn scalar_var(values: &[f64]) -> DiscreteMatrixVariable {
        DiscreteMatrixVariable::new(values.iter().map(|&v| diag(&[v])).collect(), None).unwrap()
    }

    #[test]
    fn mixed_char_examples() {
        let p = mixed_char(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        assert!(p.max_coeff_diff(&RealPoly::new(vec![1.0, -2.0, 1.0])) < 1e-12);
        let p = mixed_char(&[HermitianMatrix::identity(2)]).unwrap();
        assert!(p.max_coeff_diff(&RealPoly::new(vec![0.0, -2.0, 1.0])) < 1e-12);
        let half = HermitianMatrix::identity(2).scale(0.5);
        let p = mixed_char(&[half.clone(), half]).unwrap();
        assert!(p.max_coeff_diff(&RealPoly::new(vec![0.5, -2.0, 1.0])) < 1e-12);
        let roots = p.real_roots().unwrap();
        assert!((roots[0] - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!((roots[1] - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn mixed_dimensions_are_rejected() {
        assert!(matches!(mixed_char(&[diag(&[1.0]), diag(&[1.0, 0.0])]), Err(Error::Domain(_))));
    }

    #[test]
    fn routes_agree_on_rank_one_families() {
        let vs = [rvector(&[1.0, 0.5, 0.0]), rvector(&[0.0, 1.0, -1.0]), rvector(&[0.3, 0.3, 0.3]), rvector(&[2.0, 0.0, 1.0])];
        let mats: Vec<_> = vs.iter().map(HermitianMatrix::rank_one).collect();
        let a = mixed_char(&mats).unwrap();
        let b = mixed_char_general(&mats, DEFAULT_BUDGET).unwrap();
        assert!(a.max_coeff_diff(&b) < 1e-10 * (1.0 + a.max_abs_coeff()));
    }

    #[test]
    fn rank1_oracle_examples() {
        assert!(rank1_oracle_check(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap().pass);
        assert!(matches!(rank1_oracle_check(&[HermitianMatrix::identity(2)]), Err(Error::Domain(_))));
    }

    #[test]
    fn expected_char_poly_examples() {
        let vars = vec![scalar_var(&[0.5, 1.5]), scalar_var(&[0.5, 1.5])];
        let e = expected_char_poly(&vars).unwrap();
        assert!(e.poly.max_coeff_diff(&RealPoly::new(vec![-2.0, 1.0])) < 1e-12);
        assert!(e.enumeration_error.unwrap() < 1e-12);

        let det = vec![
            DiscreteMatrixVariable::deterministic(diag(&[1.0, 0.0])).unwrap(),
            DiscreteMatrixVariable::deterministic(diag(&[0.0, 1.0])).unwrap(),
        ];
        let e = expected_char_poly(&det).unwrap();
        assert!(e.poly.max_coeff_diff(&RealPoly::new(vec![1.0, -2.0, 1.0])) < 1e-12);
    }

    #[test]
    fn root_bound_examples() {
        let vars: Vec<_> = (0..3)
            .map(|i| {
                let mut d = vec![0.0; 3];
                d[i] = 1.0;
                DiscreteMatrixVariable::deterministic(diag(&d)).unwrap()
            })
            .collect();
        let r = expected_root_bound_check(&vars).unwrap();
        assert!(r.pass && (r.zm - 1.0).abs() < 1e-9 && (r.bound - 4.0).abs() < 1e-12);

        let vars: Vec<_> = (0..8).map(|_| scalar_var(&[0.125])).collect();
        let r = expected_root_bound_check(&vars).unwrap();
        assert!(r.pass && (r.zm - 1.0).abs() < 1e-9);
        assert!((r.bound - (1.0 + 0.125f64.sqrt()).powi(2)).abs() < 1e-12);

        let vars = vec![scalar_var(&[0.5])];
        assert!(matches!(expected_root_bound_check(&vars), Err(Error::Precondition(_))));
    }

    #[test]
    fn derandomization_example() {
        let vars = vec![scalar_var(&[0.5, 1.5]), scalar_var(&[0.5, 1.5])];
        let r = derandomized_realization(&vars, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.assignment.choices, vec![0, 0]);
        let want = [2.0, 1.5, 1.0];
        assert!(r.chain.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(r.pass && (r.final_zm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derandomization_respects_budget() {
        let vars: Vec<_> = (0..6).map(|_| scalar_var(&[0.5, 1.5])).collect();
        assert!(matches!(derandomized_realization(&vars, 4), Err(Error::Resource(_))));
    }

    #[test]
    fn weights_are_validated() {
        assert!(DiscreteMatrixVariable::new(vec![diag(&[1.0])], Some(vec![0.5])).is_err());
        assert!(DiscreteMatrixVariable::new(vec![diag(&[1.0]), diag(&[2.0])], Some(vec![1.5, -0.5])).is_err());
        assert!(DiscreteMatrixVariable::new(vec![HermitianMatrix::identity(2)], None).is_err());
    }
}
