use heatlab_core::bounds::{commutator_lemma_check, delta_e_default, evaluate_bounds};
use heatlab_core::master::{Engine, Generator};
use heatlab_core::numcore::{hermitian_eig, ComplexMatrix, DensityMatrix, HermitianOperator, Rk4Config};
use heatlab_core::operators::{collective_j, m_body_noise, CollectiveAxis};
use heatlab_core::scaling::fit_exponent;
use heatlab_core::spectral::{BathSpec, Channel, SpectralModel, SystemSpec};
use heatlab_core::thermo::ergotropy;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn symmetric(n: usize, entries: &[f64]) -> HermitianOperator {
    let mut k = 0;
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            m[i][j] = entries[k];
            m[j][i] = entries[k];
            k += 1;
        }
    }
    HermitianOperator::new(ComplexMatrix::from_fn(n, n, |i, j| C64::new(m[i][j], 0.0))).unwrap()
}

fn system(n: usize, h: &[f64], a: &[f64], gamma0: f64, beta: f64) -> SystemSpec {
    let model = SpectralModel::flat_thermal(gamma0, beta).unwrap();
    let bath = BathSpec::new(
        "B",
        beta,
        vec![Channel {
            operator: symmetric(n, a),
            model,
        }],
    )
    .unwrap();
    SystemSpec::new(symmetric(n, h), vec![bath]).unwrap()
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * (n + 1) / 2)
}

fn random_system() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, f64, f64)> {
    (2usize..=5).prop_flat_map(|n| (Just(n), entries(n), entries(n), 0.1f64..2.0, 0.0f64..3.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn currents_respect_bounds((n, h, a, gamma0, beta) in random_system(), seed in 0usize..5) {
        let sys = system(n, &h, &a, gamma0, beta);
        let rho = DensityMatrix::basis_state(n, seed % n);
        for engine in [Engine::Gksl, Engine::Redfield] {
            let g = Generator::new(&sys, engine).unwrap();
            let j = g.heat_currents(&rho).unwrap()[0];
            let report = evaluate_bounds(sys.hamiltonian(), &sys.baths()[0], j).unwrap();
            let slack = 1e-9 * report.bound1 + 1e-12;
            prop_assert!(j.abs() <= report.bound2 + slack, "{j} > {}", report.bound2);
            prop_assert!(report.bound2 <= report.bound1 + slack);
            prop_assert!(report.bound_commutator <= report.bound1 + slack);
        }
    }

    #[test]
    fn commutator_lemma((n, h, a, ..) in random_system()) {
        let hop = symmetric(n, &h);
        let aop = symmetric(n, &a);
        let basis = hermitian_eig(&hop, 1e-12);
        let de = delta_e_default(&aop, &basis).unwrap();
        prop_assert!(commutator_lemma_check(&aop, &hop, de.value).unwrap().holds);
    }

    #[test]
    fn gksl_keeps_trace_and_positivity((n, h, a, gamma0, beta) in random_system()) {
        let sys = system(n, &h, &a, gamma0, beta);
        let g = Generator::new(&sys, Engine::Gksl).unwrap();
        let traj = g.evolve(&DensityMatrix::basis_state(n, 0), &Rk4Config::new(0.01, 1.0).record_every(20)).unwrap();
        for p in &traj {
            prop_assert!((p.state.matrix().trace().re - 1.0).abs() < 1e-10);
            prop_assert!(p.state.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn fit_recovers_power_law(k in -3.0f64..4.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (2..20).map(|l| (l as f64, c * (l as f64).powf(k))).collect();
        let fit = fit_exponent(&pts).unwrap();
        prop_assert!((fit.exponent - k).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn gibbs_states_are_passive(diag in prop::collection::vec(-2.0f64..2.0, 2..6), beta in 0.0f64..5.0) {
        let h = HermitianOperator::from_real_diagonal(&diag);
        let w: Vec<f64> = diag.iter().map(|e| (-beta * e).exp()).collect();
        let z: f64 = w.iter().sum();
        let rho = DensityMatrix::from_populations(&w.iter().map(|x| x / z).collect::<Vec<_>>()).unwrap();
        prop_assert!(ergotropy(&h, &rho).unwrap().abs() < 1e-12);
    }
}

#[test]
fn collective_algebra() {
    for l in 1..=4 {
        let jx = collective_j(CollectiveAxis::X, l).unwrap();
        let jy = collective_j(CollectiveAxis::Y, l).unwrap();
        let jz = collective_j(CollectiveAxis::Z, l).unwrap();
        let lhs = jx.commutator(&jy);
        let rhs = jz.scale(C64::new(0.0, 1.0));
        assert!((&lhs - &rhs).max_abs() < 1e-12, "L = {l}");
    }
}

#[test]
fn m_body_norm_is_extensive() {
    for (l, m, g) in [(3, 3, 1.0), (3, 3, 2.0), (5, 2, 0.5), (6, 6, 1.0)] {
        let a = m_body_noise(l, m, g).unwrap();
        let norm = heatlab_core::numcore::operator_norm(a.matrix()).unwrap();
        assert!((norm - g * l as f64).abs() < 1e-10 * norm, "L = {l}, m = {m}: {norm}");
    }
}
