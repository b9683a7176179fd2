mod common;

use common::*;
use interlace::linalg::CMatrix;
use interlace::stable::{
    barrier_phi, probe_real_stability, specialize_last_multiaffine, to_multiaffine, DeterminantalPoly, Specialized,
};
use interlace::{Complex64, HermitianMatrix};
use proptest::prelude::*;
use rand::Rng;

fn log_abs_det(mats: &[HermitianMatrix], x: &[f64]) -> f64 {
    let m = mats[0].dim();
    let mut s = CMatrix::zeros(m, m);
    for (a, xi) in mats.iter().zip(x) {
        s += a.as_matrix() * Complex64::new(*xi, 0.0);
    }
    s.determinant().norm().ln()
}

fn positive_family(rng: &mut rand_chacha::ChaCha8Rng, m: usize, d: usize) -> Vec<HermitianMatrix> {
    let mut mats: Vec<HermitianMatrix> = (0..d)
        .map(|_| {
            let rank = rng.random_range(1..=m);
            rand_psd(rng, m, rank)
        })
        .collect();
    mats[0] = mats[0].add(&HermitianMatrix::identity(m).scale(0.2));
    mats
}

fn fd_phi(mats: &[HermitianMatrix], x: &[f64], j: usize, h: f64) -> f64 {
    let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
    xp[j] += h;
    xm[j] -= h;
    (log_abs_det(mats, &xp) - log_abs_det(mats, &xm)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn determinantal_instances_pass_the_probe(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (m, d) = (rng.random_range(1..=5), rng.random_range(1..=4));
        let mats: Vec<HermitianMatrix> = (0..d)
            .map(|_| {
                let rank = rng.random_range(1..=m);
                rand_psd(&mut rng, m, rank)
            })
            .collect();
        let p = DeterminantalPoly::new(mats, true).unwrap();
        let probe = probe_real_stability(&p, 200, seed).unwrap();
        prop_assert!(probe.passed, "{:?}", probe.witness);
    }

    #[test]
    fn shifted_rank_one_specializations_are_real_rooted(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (m, d) = (rng.random_range(1..=4), rng.random_range(1..=5));
        let mats: Vec<HermitianMatrix> = (0..d).map(|_| HermitianMatrix::rank_one(&rand_cvec(&mut rng, m))).collect();
        let p = to_multiaffine(&DeterminantalPoly::new(mats, true).unwrap()).unwrap();
        let i = rng.random_range(0..d);
        let mut q = Specialized::MultiAffine(p.shift_operator(i, rng.random_range(-2.0..2.0)).unwrap());
        while let Specialized::MultiAffine(t) = &q {
            q = specialize_last_multiaffine(t, rng.random_range(-3.0..3.0)).unwrap();
        }
        let ok = match &q {
            Specialized::Univariate(u) => u.is_zero() || u.is_real_rooted(1e-7).unwrap().real_rooted,
            Specialized::IdenticallyZero => true,
            Specialized::Determinantal(_) | Specialized::MultiAffine(_) => false,
        };
        prop_assert!(ok, "{:?}", q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn barrier_matches_log_derivative(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (m, d) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let mats = positive_family(&mut rng, m, d);
        let p = DeterminantalPoly::new(mats.clone(), false).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..3.0)).collect();
        let j = rng.random_range(0..d);
        let phi = barrier_phi(&p, &x, j).unwrap();
        let fd = fd_phi(&mats, &x, j, 1e-5);
        prop_assert!((phi - fd).abs() <= 1e-4 * fd.abs().max(1e-3), "Φ {} vs finite difference {}", phi, fd);
    }

    #[test]
    fn mixed_partials_of_log_det_are_symmetric(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (m, d) = (rng.random_range(1..=4), rng.random_range(2..=4));
        let mats = positive_family(&mut rng, m, d);
        let p = DeterminantalPoly::new(mats, false).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..3.0)).collect();
        let (i, j) = (rng.random_range(0..d), rng.random_range(0..d));
        let h = 1e-4;
        let d_i_phi_j = {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            (barrier_phi(&p, &xp, j).unwrap() - barrier_phi(&p, &xm, j).unwrap()) / (2.0 * h)
        };
        let d_j_phi_i = {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += h;
            xm[j] -= h;
            (barrier_phi(&p, &xp, i).unwrap() - barrier_phi(&p, &xm, i).unwrap()) / (2.0 * h)
        };
        prop_assert!((d_i_phi_j - d_j_phi_i).abs() <= 1e-4 * (1.0 + d_i_phi_j.abs()));
    }
}

#[test]
fn non_stable_polynomials_are_caught() {
    use interlace::stable::MultiAffinePoly;
    // z1 z2 + 1 has the zero (i, i)
    let q = MultiAffinePoly::from_terms(2, &[(&[0, 1], 1.0), (&[], 1.0)]).unwrap();
    let probe = probe_real_stability(&q, 200, 1).unwrap();
    assert!(!probe.passed && probe.witness.is_some());
}
