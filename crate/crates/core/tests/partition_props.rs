mod common;

use common::*;
use interlace::linalg::{isotropic_normalize, CVector};
use interlace::partition::{
    pave_projector, pave_selfadjoint, tensor_lift, weaver_bound, weaver_partition, Partition, RankOneFactor,
    SearchOptions, WeaverMethod,
};
use interlace::{Complex64, HermitianMatrix};
use proptest::prelude::*;
use rand::Rng;

fn isotropic_factors(rng: &mut rand_chacha::ChaCha8Rng, m: usize, d: usize) -> Vec<CVector> {
    let raw: Vec<CVector> = (0..d).map(|_| rand_cvec(rng, m)).collect();
    isotropic_normalize(&raw).unwrap()
}

fn max_part_norm(vecs: &[CVector], assignment: &[usize], r: usize) -> f64 {
    let m = vecs[0].len();
    (0..r)
        .map(|j| {
            let mut s = interlace::linalg::CMatrix::zeros(m, m);
            for (v, &a) in vecs.iter().zip(assignment) {
                if a == j {
                    s += v * v.adjoint();
                }
            }
            *sorted_eigs(&s).last().unwrap()
        })
        .fold(0.0, f64::max)
}

fn brute_force_minimum(vecs: &[CVector], r: usize) -> f64 {
    let d = vecs.len();
    let total = r.pow(d as u32);
    let mut best = f64::INFINITY;
    let mut assignment = vec![0usize; d];
    for code in 0..total {
        let mut c = code;
        for a in assignment.iter_mut() {
            *a = c % r;
            c /= r;
        }
        best = best.min(max_part_norm(vecs, &assignment, r));
    }
    best
}

fn covers(p: &Partition, d: usize) -> bool {
    let mut seen = vec![0; d];
    p.parts().iter().flatten().for_each(|&i| seen[i] += 1);
    seen.iter().all(|&c| c == 1) && p.is_valid()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exhaustive_is_optimal_and_derandomized_meets_the_bound(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let m = rng.random_range(1..=3);
        let r = rng.random_range(2..=3);
        let max_d = if r == 2 { 10 } else { 6 };
        let d = rng.random_range(m.max(2)..=max_d);
        let vecs = isotropic_factors(&mut rng, m, d);
        let factors: Vec<RankOneFactor> = vecs.iter().cloned().map(RankOneFactor::new).collect();
        let optimum = brute_force_minimum(&vecs, r);
        let ex = weaver_partition(&factors, r, SearchOptions::with_method(WeaverMethod::Exhaustive)).unwrap();
        prop_assert!(covers(&ex.partition, d));
        prop_assert!((ex.certificate.max_norm - optimum).abs() <= 1e-9);
        let c = vecs.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
        let bound = weaver_bound(r, c);
        match weaver_partition(&factors, r, SearchOptions::with_method(WeaverMethod::Derandomized)) {
            Ok(de) => {
                prop_assert!(covers(&de.partition, d));
                let achieved = max_part_norm(&vecs, &de.partition.assignment(), r);
                prop_assert!(achieved >= optimum - 1e-9 && achieved <= bound + 1e-8);
            }
            Err(e) => prop_assert!(e.is_search_or_resource(), "{}", e),
        }
        match weaver_partition(&factors, r, SearchOptions { method: WeaverMethod::Random, seed, budget: 1 << 16 }) {
            Ok(ra) => prop_assert!(covers(&ra.partition, d) && ra.certificate.max_norm <= bound + 1e-8),
            Err(e) => prop_assert!(e.is_search_or_resource(), "{}", e),
        }
    }

    #[test]
    fn tensor_lift_means_sum_to_identity(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (m, d, r) = (rng.random_range(1..=3), rng.random_range(3..=6), rng.random_range(2..=4));
        let factors: Vec<RankOneFactor> = isotropic_factors(&mut rng, m, d).into_iter().map(RankOneFactor::new).collect();
        let lifted = tensor_lift(&factors, r).unwrap();
        let means: Vec<HermitianMatrix> = lifted.iter().map(|v| v.mean().clone()).collect();
        prop_assert!(HermitianMatrix::sum(&means).max_abs_diff(&HermitianMatrix::identity(m * r)) <= 1e-10);
    }

    #[test]
    fn projector_paving_norms_recompute(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(2..=8);
        let k = rng.random_range(1..=n);
        let u = rand_unitary(&mut rng, n);
        let cols = u.columns(0, k);
        let p = HermitianMatrix::new(cols * cols.adjoint()).unwrap();
        let r = rng.random_range(2..=4);
        let paving = pave_projector(&p, r, SearchOptions::default()).unwrap();
        prop_assert!(covers(&paving.partition, n));
        for (part, norm) in paving.partition.parts().iter().zip(&paving.norms) {
            prop_assert!((compression_norm(p.as_matrix(), part) - norm).abs() <= 1e-10);
        }
        prop_assert!(paving.norms.iter().all(|&x| x <= paving.bound + 1e-8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn anderson_bound_holds_in_the_nonvacuous_regime(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(2..=6);
        let mut t = rand_hermitian(&mut rng, n).into_matrix();
        for i in 0..n {
            t[(i, i)] = Complex64::new(0.0, 0.0);
        }
        let t = HermitianMatrix::new(t).unwrap();
        let paving = pave_selfadjoint(&t, 14, SearchOptions { seed, ..SearchOptions::default() }).unwrap();
        prop_assert!(paving.eps_theory <= 1.0);
        prop_assert!(covers(&paving.partition, n));
        prop_assert!(paving.eps_achieved <= paving.eps_theory + 1e-8 && paving.pass);
    }
}
