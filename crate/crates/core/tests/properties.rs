mod common;

use nilstrat::catalog;
use nilstrat::minnorm::{min_norm_point, PointSet};
use nilstrat::moment::{flow_to_critical, ricci_moment, FlowParams};
use nilstrat::solv::{rank_one_extension, MetricSolvableAlgebra, EINSTEIN_TOL};
use nilstrat::strata::DiagonalWeight;
use nilstrat::{BracketTensor, LinearMap, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_gap(a: &LinearMap<f64>, b: &LinearMap<f64>) -> f64 {
    (a - b).max_abs()
}

/// Block-diagonal orthogonal map preserving the `a ⊕ n` splitting.
fn split_orthogonal<R: Rng>(rng: &mut R, m: usize, n: usize) -> LinearMap<f64> {
    let qa = common::random_orthogonal(rng, m);
    let qn = common::random_orthogonal(rng, n);
    LinearMap::from_fn(m + n, |i, j| match (i < m, j < m) {
        (true, true) => *qa.get(i, j),
        (false, false) => *qn.get(i - m, j - m),
        _ => 0.0,
    })
}

fn moved(s: &MetricSolvableAlgebra<f64>, q: &LinearMap<f64>) -> MetricSolvableAlgebra<f64> {
    let bracket = s.bracket().act(q).unwrap();
    MetricSolvableAlgebra::new(s.dim_a(), s.dim_n(), bracket, 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_is_a_group_action(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let mu = common::random_bracket(&mut r, n);
        let g = common::unitriangular(&mut r, n);
        let h = common::unitriangular(&mut r, n);
        let lhs = mu.act(&(&g * &h)).unwrap();
        let rhs = mu.act(&h).unwrap().act(&g).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_adjoint_is_transpose(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let mu = common::random_bracket(&mut r, n);
        let lambda = common::random_bracket(&mut r, n);
        let alpha = LinearMap::from_fn(n, |_, _| common::small_rational(&mut r));
        let lhs = mu.rep(&alpha).unwrap().inner(&lambda).unwrap();
        let rhs = mu.inner(&lambda.rep(&alpha.transpose()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn exact_and_float_moment_agree(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let mu = common::random_bracket(&mut r, n);
        let exact = ricci_moment(&mu);
        let float = ricci_moment(&mu.to_f64());
        prop_assert!(max_gap(&exact.ric.to_f64(), &float.ric) < 1e-12);
        prop_assert!(max_gap(&exact.m_normalized.to_f64(), &float.m_normalized) < 1e-12);
    }

    #[test]
    fn ricci_is_orthogonally_equivariant(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let mu = common::random_bracket(&mut r, n).to_f64();
        let q = common::random_orthogonal(&mut r, n);
        let moved = ricci_moment(&mu.act(&q).unwrap()).ric;
        let expected = &(&q * &ricci_moment(&mu).ric) * &q.transpose();
        prop_assert!(max_gap(&moved, &expected) < 1e-10);
    }

    #[test]
    fn min_norm_point_is_permutation_equivariant(
        seed in any::<u64>(),
        dim in 1usize..6,
        count in 1usize..9,
    ) {
        let mut r = rng(seed);
        let points: Vec<Vec<Rational>> = (0..count)
            .map(|_| (0..dim).map(|_| common::small_rational(&mut r)).collect())
            .collect();
        let ps = PointSet::deduplicated(dim, points).unwrap();
        let sigma = common::random_permutation(&mut r, dim);
        let x = min_norm_point(&ps).unwrap();
        let y = min_norm_point(&ps.permute_coordinates(&sigma).unwrap()).unwrap();
        let permuted = DiagonalWeight::new(x.point.clone()).permuted(&sigma).unwrap();
        prop_assert_eq!(y.point, permuted.entries().to_vec());
        prop_assert!(x.verify(&ps));
    }

    #[test]
    fn min_norm_point_ignores_point_order(seed in any::<u64>(), dim in 1usize..5, count in 2usize..8) {
        let mut r = rng(seed);
        let points: Vec<Vec<Rational>> = (0..count)
            .map(|_| (0..dim).map(|_| common::small_rational(&mut r)).collect())
            .collect();
        let ps = PointSet::deduplicated(dim, points.clone()).unwrap();
        let mut reversed = points;
        reversed.reverse();
        let qs = PointSet::deduplicated(dim, reversed).unwrap();
        prop_assert_eq!(min_norm_point(&ps).unwrap().point, min_norm_point(&qs).unwrap().point);
    }

    #[test]
    fn trace_identity_on_random_solvable_algebras(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = common::random_solvable(&mut r);
        let e = LinearMap::from_fn(s.dim(), |_, _| r.gen_range(-1.0..1.0));
        prop_assert!(s.trace_identity_check(&e).unwrap().abs() < 1e-10);
    }

    #[test]
    fn curvature_verdicts_are_basis_independent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = common::random_solvable(&mut r);
        let q = split_orthogonal(&mut r, s.dim_a(), s.dim_n());
        let t = moved(&s, &q);
        let (a, b) = (s.einstein_check(EINSTEIN_TOL), t.einstein_check(EINSTEIN_TOL));
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert!((a.c - b.c).abs() < 1e-9);
        prop_assert_eq!(s.is_standard(1e-9).verdict, t.is_standard(1e-9).verdict);
    }

    #[test]
    fn flow_objective_never_increases(seed in any::<u64>(), n in 3usize..6) {
        let mut r = rng(seed);
        let mu = common::random_nilpotent(&mut r, n).to_f64();
        let params = FlowParams { record_trace: true, max_iter: 2000, ..FlowParams::default() };
        let flow = flow_to_critical(&mu, &params).unwrap();
        let trace = flow.step_trace.unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1].objective <= w[0].objective + 1e-12);
        }
        prop_assert!(flow.limit.jacobi_residual() < 1e-9);
    }
}

#[test]
fn rank_one_extension_is_einstein_in_every_rotated_basis() {
    let h3 = catalog::heisenberg3().to_f64();
    let s = rank_one_extension(&h3, &ricci_moment(&h3), None, 1e-12).unwrap();
    let mut r = rng(11);
    for _ in 0..20 {
        let t = moved(&s, &split_orthogonal(&mut r, 1, 3));
        let v = t.einstein_check(EINSTEIN_TOL);
        assert!(v.verdict && (v.c + 1.5).abs() < 1e-9);
        assert!(t.is_standard(1e-9).verdict);
    }
}

#[test]
fn nilsoliton_derivation_at_flow_limits() {
    // At a critical point β + ‖β‖²I is a derivation of the limit.
    let mut r = rng(12);
    for _ in 0..20 {
        let n = r.gen_range(3..=6);
        let mu = common::random_nilpotent(&mut r, n).to_f64();
        let flow = flow_to_critical(&mu, &FlowParams::default()).unwrap();
        assert!(flow.converged);
        let m = &flow.moment.m_normalized;
        let shifted = m + &LinearMap::identity(n).scale(&m.norm_sq());
        let lambda: &BracketTensor<f64> = &flow.limit;
        assert!(lambda.rep(&shifted).unwrap().norm_sq().sqrt() < 1e-8);
    }
}
