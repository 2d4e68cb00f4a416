use proptest::prelude::*;
use qriopt_core::matcore::haar_unitary;
use qriopt_core::mera::ascend;
use qriopt_core::optim::{Manifold, Method, Optimizer, Schedule};
use qriopt_core::pdcone::{from_chart, to_chart, PdCone, PdGeometry, PdPoint};
use qriopt_core::quantum::tfi_local_terms;
use qriopt_core::rng::{stream, Rng};
use qriopt_core::stiefel::{self, Retraction, Stiefel, StiefelMetric, StiefelPoint};
use qriopt_core::ComplexMatrix;
use rand::Rng as _;

fn metric() -> impl Strategy<Value = StiefelMetric> {
    prop_oneof![Just(StiefelMetric::Euclidean), Just(StiefelMetric::Canonical)]
}

fn retraction() -> impl Strategy<Value = Retraction> {
    prop_oneof![Just(Retraction::Cayley), Just(Retraction::Svd)]
}

fn geometry() -> impl Strategy<Value = PdGeometry> {
    prop_oneof![Just(PdGeometry::LogEuclidean), Just(PdGeometry::LogCholesky)]
}

fn method() -> impl Strategy<Value = Method> {
    prop_oneof![Just(Method::Gd), Just(Method::MOMENTUM), Just(Method::ADAM), Just(Method::AMSGRAD)]
}

/// (n, p) with 1 ≤ p ≤ n ≤ 7.
fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=7).prop_flat_map(|n| (Just(n), 1..=n))
}

fn pd_point(n: usize, rng: &mut Rng) -> PdPoint {
    let u = haar_unitary(n, rng);
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
    PdPoint::new((&u * ComplexMatrix::from_real_diagonal(&d) * u.adjoint()).hermitian_part()).unwrap()
}

fn euclidean_pairing(g: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    2.0 * g.dot(v).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stiefel_projection_is_tangent_and_idempotent(seed: u64, (n, p) in shape()) {
        let mut rng = stream(seed, 0);
        let x = stiefel::random_point(n, p, &mut rng).unwrap();
        let y = ComplexMatrix::ginibre(n, p, &mut rng);
        let w = stiefel::project_tangent(&x, &y);
        prop_assert!(stiefel::tangent_residual(&x, &w) < 1e-12 * (1.0 + y.frobenius_norm()));
        let again = stiefel::project_tangent(&x, &w);
        prop_assert!((&again - &w).frobenius_norm() < 1e-12 * (1.0 + w.frobenius_norm()));
    }

    #[test]
    fn riemannian_gradient_represents_the_differential(
        seed: u64, (n, p) in shape(), metric in metric(), geometry in geometry(),
    ) {
        let mut rng = stream(seed, 1);
        let st = Stiefel { metric, retraction: Retraction::Svd };
        let x = stiefel::random_point(n, p, &mut rng).unwrap();
        let g = ComplexMatrix::ginibre(n, p, &mut rng);
        let v = stiefel::random_tangent(&x, &mut rng);
        let rg = st.riemannian_gradient(&x, &g).unwrap();
        let (lhs, rhs) = (st.inner(&x, &rg, &v), euclidean_pairing(&g, &v));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "stiefel {lhs} vs {rhs}");

        let cone = PdCone { geometry };
        let s = pd_point(n, &mut rng);
        let g = ComplexMatrix::ginibre(n, n, &mut rng);
        let v = ComplexMatrix::random_hermitian(n, &mut rng);
        let rg = cone.riemannian_gradient(&s, &g).unwrap();
        let (lhs, rhs) = (cone.inner(&s, &rg, &v), euclidean_pairing(&g, &v));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "cone {lhs} vs {rhs}");
    }

    #[test]
    fn stiefel_iterates_stay_on_the_manifold(
        seed: u64, (n, p) in shape(), metric in metric(), retraction in retraction(),
        method in method(), lr in 0.01f64..2.0,
    ) {
        let mut rng = stream(seed, 2);
        let st = Stiefel { metric, retraction };
        let mut points = vec![stiefel::random_point(n, p, &mut rng).unwrap()];
        let mut opt = Optimizer::new(method);
        for _ in 0..10 {
            let g = ComplexMatrix::ginibre(n, p, &mut rng);
            opt.step(&st, &mut points, &[g], lr).unwrap();
        }
        prop_assert!(points[0].residual() < 1e-10);
    }

    #[test]
    fn cone_iterates_stay_hermitian_positive(
        seed: u64, n in 1usize..=5, geometry in geometry(), method in method(), lr in 0.01f64..0.5,
    ) {
        let mut rng = stream(seed, 3);
        let cone = PdCone { geometry };
        let mut points = vec![pd_point(n, &mut rng)];
        let mut opt = Optimizer::new(method);
        for _ in 0..10 {
            // unit Riemannian norm keeps the walk bounded
            let g = ComplexMatrix::random_hermitian(n, &mut rng);
            let rg = cone.riemannian_gradient(&points[0], &g).unwrap();
            let g = g.scale_real(1.0 / cone.inner(&points[0], &rg, &rg).sqrt());
            opt.step(&cone, &mut points, &[g], lr).unwrap();
        }
        let s = points[0].matrix();
        prop_assert!(s.hermitian_residual() < 1e-10 * s.frobenius_norm());
        let eig = points[0].eig().unwrap();
        prop_assert!(eig.eigenvalues.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn chart_round_trip(seed: u64, n in 1usize..=6, geometry in geometry()) {
        let mut rng = stream(seed, 4);
        let s = pd_point(n, &mut rng);
        let back = from_chart(&to_chart(&s, geometry).unwrap(), geometry).unwrap();
        prop_assert!((back.matrix() - s.matrix()).frobenius_norm() < 1e-11 * s.matrix().frobenius_norm());
    }

    #[test]
    fn momentum_without_memory_is_gradient_descent(seed: u64, (n, p) in shape(), lr in 0.01f64..1.0) {
        let mut rng = stream(seed, 5);
        let st = Stiefel::default();
        let start = stiefel::random_point(n, p, &mut rng).unwrap();
        let grads: Vec<ComplexMatrix> = (0..5).map(|_| ComplexMatrix::ginibre(n, p, &mut rng)).collect();
        let walk = |method| {
            let mut pts: Vec<StiefelPoint> = vec![start.clone()];
            let mut opt = Optimizer::new(method);
            for g in &grads {
                opt.step(&st, &mut pts, std::slice::from_ref(g), lr).unwrap();
            }
            pts.remove(0).into_matrix()
        };
        let (a, b) = (walk(Method::Momentum { beta: 0.0 }), walk(Method::Gd));
        prop_assert!((&a - &b).frobenius_norm() < 1e-13);
    }

    #[test]
    fn exponential_schedule_stays_between_endpoints(
        a in 1e-4f64..10.0, b in 1e-4f64..10.0, total in 1usize..5000, frac in 0.0f64..1.0,
    ) {
        let s = Schedule::Exponential { initial: a, last: b };
        let t = ((total - 1) as f64 * frac) as usize;
        let lr = s.at(t, total);
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(lr >= lo * (1.0 - 1e-12) && lr <= hi * (1.0 + 1e-12));
        prop_assert!((s.at(0, total) - a).abs() <= 1e-12 * a);
        if total > 1 {
            prop_assert!((s.at(total - 1, total) - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn ascended_terms_are_hermitian(seed: u64, hx in 0.0f64..3.0, chi in 1usize..=8) {
        let mut rng = stream(seed, 6);
        let u = haar_unitary(4, &mut rng);
        let z = stiefel::random_point(8, chi, &mut rng).unwrap().into_matrix();
        let h = tfi_local_terms(hx);
        let up = ascend(&h, &u, &z).unwrap();
        prop_assert_eq!(up.shape(), (chi * chi, chi * chi));
        prop_assert!(up.hermitian_residual() < 1e-12 * (1.0 + up.frobenius_norm()));
    }
}
