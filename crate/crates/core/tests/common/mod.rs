//! Random instance generators and independent reference computations shared
//! by the integration tests.
#![allow(dead_code)]

use interlace::linalg::{CMatrix, CVector};
use interlace::ramanujan::Graph;
use interlace::{Complex64, HermitianMatrix, RealPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_cvec(rng: &mut ChaCha8Rng, m: usize) -> CVector {
    CVector::from_fn(m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn rand_cmatrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn rand_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let a = rand_cmatrix(rng, n, n);
    HermitianMatrix::new((&a + a.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

pub fn rand_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> HermitianMatrix {
    let b = rand_cmatrix(rng, n, rank);
    HermitianMatrix::new(&b * b.adjoint()).unwrap()
}

pub fn rand_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    rand_cmatrix(rng, n, n).qr().q()
}

/// Unit-norm tight frame of `d` vectors in `C^n`: `n` random rows of the
/// `d`-point DFT, scaled by `1/√n`, then rotated by a random unitary.
pub fn rand_tight_frame(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<CVector> {
    let mut rows: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        rows.swap(i, rng.random_range(0..=i));
    }
    let f = CMatrix::from_fn(n, d, |i, k| {
        let angle = 2.0 * std::f64::consts::PI * (rows[i] * k) as f64 / d as f64;
        Complex64::from_polar(1.0 / (n as f64).sqrt(), angle)
    });
    let uf = rand_unitary(rng, n) * f;
    (0..d).map(|k| uf.column(k).into_owned()).collect()
}

/// `det(z·I − A)` by the Faddeev–LeVerrier recursion, ascending real parts.
pub fn faddeev_leverrier(a: &CMatrix) -> RealPoly {
    let n = a.nrows();
    let eye = CMatrix::identity(n, n);
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &eye * c[n + 1 - k];
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    RealPoly::new(c.iter().map(|z| z.re).collect())
}

/// Largest eigenvalue of a Hermitian matrix from its characteristic
/// polynomial coefficients, independently of the library eigen-solver.
pub fn zm_of(a: &CMatrix) -> f64 {
    faddeev_leverrier(a).max_real_root().unwrap()
}

/// Number of `r`-matchings by enumerating all edge subsets.
pub fn brute_matching_counts(g: &Graph) -> Vec<u128> {
    let e = g.edges();
    let mut counts = vec![0u128; g.n() / 2 + 1];
    for mask in 0u64..(1 << e.len()) {
        let mut used = 0u64;
        let mut ok = true;
        for (k, &(u, v)) in e.iter().enumerate() {
            if mask >> k & 1 == 1 {
                if used >> u & 1 == 1 || used >> v & 1 == 1 {
                    ok = false;
                    break;
                }
                used |= 1 << u | 1 << v;
            }
        }
        if ok {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

pub fn brute_matching_poly(g: &Graph) -> RealPoly {
    let n = g.n();
    let mut c = vec![0.0; n + 1];
    for (r, &k) in brute_matching_counts(g).iter().enumerate() {
        c[n - 2 * r] = if r % 2 == 0 { k as f64 } else { -(k as f64) };
    }
    RealPoly::new(c)
}

pub fn sorted_eigs(h: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn compression_norm(a: &CMatrix, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let sub = CMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
    sub.singular_values().iter().copied().fold(0.0, f64::max)
}
