//! Acceptance criteria. Prints one `[PASS]` or `[FAIL]` line per criterion
//! and exits nonzero when any criterion is not met.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use heatlab_core::bounds::{commutator_lemma_check, delta_e_default, evaluate_bounds, BoundReport};
use heatlab_core::master::{evolve_with, ladder_heat_current, DickeLadder, Engine, Generator};
use heatlab_core::numcore::{hermitian_eig, ComplexMatrix, DensityMatrix, HermitianOperator, Rk4Config, C64};
use heatlab_core::operators::{collective_j, dicke_sector_j, m_body_noise, CollectiveAxis, DickeIndex};
use heatlab_core::scaling::fit_exponent;
use heatlab_core::scenarios::{
    battery_ergotropy_closed_form, battery_steady_state, heat_engine_steady_state, mbody_simulate,
    superabsorption_bound_analysis, superradiance_closed_form, superradiance_simulate, Backend, BatteryParams,
    EngineRates, MbodyRun,
};
use heatlab_core::spectral::{BathSpec, SpectralModel, SystemSpec};
use heatlab_core::thermo::{entropy_production_rate, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, checks: &[(bool, String)]) -> (bool, String) {
    let pass = checks.iter().all(|c| c.0);
    let detail: Vec<String> = checks
        .iter()
        .map(|(ok, s)| if *ok { s.clone() } else { format!("FAILED {s}") })
        .collect();
    let line = format!(
        "[{}] criterion {id} ({name}): {}",
        if pass { "PASS" } else { "FAIL" },
        detail.join("; ")
    );
    (pass, line)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn jz(l: usize, wq: f64) -> HermitianOperator {
    HermitianOperator::new(collective_j(CollectiveAxis::Z, l).unwrap().scale_real(wq)).unwrap()
}

struct Grid {
    runs: Vec<MbodyRun>,
    elapsed: Duration,
}

/// Full m-body grid `L <= 10`, `1 <= m <= L`, white noise `gamma_wn = omega_q = g = 1`.
fn mbody_grid() -> &'static Grid {
    static GRID: OnceLock<Grid> = OnceLock::new();
    GRID.get_or_init(|| {
        let start = Instant::now();
        let mut runs = Vec::new();
        for l in 1..=10 {
            for m in 1..=l {
                runs.push(mbody_simulate(l, m, 1.0, 1.0, 1.0).unwrap());
            }
        }
        Grid {
            runs,
            elapsed: start.elapsed(),
        }
    })
}

fn criterion_1_mbody_current() -> (bool, String) {
    let grid = mbody_grid();
    let worst = grid.runs.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    report(
        1,
        "m-body current",
        &[
            (
                worst <= 1e-8 && grid.runs.len() == 55,
                format!("{} runs, max relative error {worst:.2e} (tol 1e-8)", grid.runs.len()),
            ),
            (
                grid.elapsed.as_secs_f64() < 60.0,
                format!("grid time {:.1} s (limit 60 s)", grid.elapsed.as_secs_f64()),
            ),
        ],
    )
}

fn criterion_2_bound1_saturation() -> (bool, String) {
    let full: Vec<&MbodyRun> = mbody_grid()
        .runs
        .iter()
        .filter(|r| r.params.m == r.params.l && r.params.l >= 2)
        .collect();
    let worst = full
        .iter()
        .map(|r| (r.bounds.saturation_ratio_1.unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = full.iter().map(|r| (r.params.l as f64, r.current.abs())).collect();
    let fit = fit_exponent(&pts).unwrap();
    report(
        2,
        "Bound 1 saturation",
        &[
            (
                worst <= 1e-9 && full.len() == 9,
                format!("max |ratio_1 - 1| = {worst:.2e} over L = 2..10 (tol 1e-9)"),
            ),
            (
                (fit.exponent - 3.0).abs() <= 0.02,
                format!("|J(0)| exponent {:.6} (3.00 +- 0.02)", fit.exponent),
            ),
        ],
    )
}

fn criterion_3_superradiance() -> (bool, String) {
    let (g0, wq) = (1.0, 1.0);
    let mut worst_ladder = 0.0f64;
    for l in (1..=1001).step_by(2) {
        let ladder = DickeLadder::dicke(DickeIndex::new(l, 0.5).unwrap(), wq);
        let j = ladder_heat_current(&ladder, g0, 0.0).unwrap();
        worst_ladder = worst_ladder.max(rel(j, superradiance_closed_form(l, g0, wq).unwrap()));
    }
    let mut worst_dense = 0.0f64;
    for l in [1, 3, 5, 7, 9] {
        let a = superradiance_simulate(l, g0, wq, Backend::Ladder).unwrap();
        let d = superradiance_simulate(l, g0, wq, Backend::Dense).unwrap();
        worst_dense = worst_dense.max(rel(d.current, a.current));
    }
    let pts: Vec<(f64, f64)> = (11..=101)
        .step_by(10)
        .map(|l| {
            let r = superradiance_simulate(l, g0, wq, Backend::Ladder).unwrap();
            (l as f64, r.current.abs())
        })
        .collect();
    let fit = fit_exponent(&pts).unwrap();
    report(
        3,
        "superradiance",
        &[
            (
                worst_ladder <= 1e-10,
                format!("ladder vs closed form, odd L <= 1001: max rel {worst_ladder:.2e} (tol 1e-10)"),
            ),
            (
                worst_dense <= 1e-9,
                format!("dense vs ladder, L <= 9: max rel {worst_dense:.2e} (tol 1e-9)"),
            ),
            (
                (1.97..=2.00).contains(&fit.exponent),
                format!("exponent over L = 11,21,..,101: {:.6} (required [1.97, 2.00])", fit.exponent),
            ),
        ],
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HermitianOperator {
    let m = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)));
    HermitianOperator::new(m.hermitian_part()).unwrap()
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part()).unwrap()
}

/// Every bound report produced by the scenario runs used in this suite.
fn scenario_reports() -> Vec<(String, BoundReport)> {
    let mut out = Vec::new();
    for r in &mbody_grid().runs {
        out.push((format!("mbody L={} m={}", r.params.l, r.params.m), r.bounds.clone()));
    }
    for l in [1, 3, 9, 101, 1001] {
        let r = superradiance_simulate(l, 1.0, 1.0, Backend::Ladder).unwrap();
        out.push((format!("superradiance ladder L={l}"), r.bounds));
    }
    for l in [3, 7] {
        let r = superradiance_simulate(l, 1.0, 1.0, Backend::Dense).unwrap();
        out.push((format!("superradiance dense L={l}"), r.bounds));
    }
    for l in [3, 11, 51] {
        let r = superabsorption_bound_analysis(l, 0.9, 1.0, 1.0).unwrap();
        out.push((format!("superabsorption L={l}"), r.bounds));
    }
    let rates = EngineRates::thermal([1.0, 0.7, 0.4], [0.5, 2.0, 0.5e-6], 1.0).unwrap();
    for l in [1, 4, 16] {
        for (name, b) in heat_engine_steady_state(&rates, 1.0, l).unwrap().bounds {
            out.push((format!("engine L={l} bath {name}"), b));
        }
    }
    for l in [1, 5, 16] {
        for (name, b) in battery_steady_state(&battery(l)).unwrap().bounds {
            out.push((format!("battery L={l} bath {name}"), b));
        }
    }
    out
}

fn criterion_4_bound2() -> (bool, String) {
    let reports = scenario_reports();
    let bad: Vec<&String> = reports
        .iter()
        .filter(|(_, b)| b.measured_current_abs > b.bound2 * (1.0 + 1e-9) + 1e-12)
        .map(|(n, _)| n)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut random_bad = Vec::new();
    for k in 0..100 {
        let n = 2 + k % 15;
        let h = random_hermitian(&mut rng, n, 2.0);
        let a = random_hermitian(&mut rng, n, 1.0);
        let model = SpectralModel::flat_thermal(rng.gen_range(0.1..2.0), rng.gen_range(0.0..3.0)).unwrap();
        let bath = BathSpec::single("B", a, model).unwrap();
        let sys = SystemSpec::new(h.clone(), vec![bath.clone()]).unwrap();
        let rho = random_density(&mut rng, n);
        let j = Generator::new(&sys, Engine::Gksl).unwrap().heat_currents(&rho).unwrap()[0];
        let r = evaluate_bounds(&h, &bath, j).unwrap();
        if j.abs() > r.bound2 * (1.0 + 1e-9) + 1e-12 {
            random_bad.push(k);
        }
    }

    let sr = superradiance_simulate(1001, 1.0, 1.0, Backend::Ladder).unwrap();
    let ratio = sr.bounds.saturation_ratio_2.unwrap();
    report(
        4,
        "Bound 2",
        &[
            (bad.is_empty(), format!("{} scenario reports, violations {:?}", reports.len(), bad)),
            (
                random_bad.is_empty(),
                format!("100 random GKSL systems (dim 2..16), violations {random_bad:?}"),
            ),
            (
                (ratio - 0.25).abs() <= 0.01,
                format!("superradiance |J|/bound2 at L = 1001: {ratio:.6} (0.25 +- 0.01)"),
            ),
        ],
    )
}

fn battery(l: usize) -> BatteryParams {
    BatteryParams {
        l,
        e1: 1.0,
        e0: 2.0,
        em1: 0.0,
        beta_h0: 0.5,
        beta_c0: 2.0,
        gamma_h: 1.0,
        gamma_c: 0.8,
        xi_override: None,
    }
}

/// `(name, A, H)` for every scenario family.
fn scenario_pairs() -> Vec<(String, HermitianOperator, HermitianOperator)> {
    let mut out = Vec::new();
    for l in 1usize..=8 {
        for m in [1, l.div_ceil(2), l] {
            out.push((format!("mbody L={l} m={m}"), m_body_noise(l, m, 1.0).unwrap(), jz(l, 1.0)));
        }
    }
    for l in [1, 3, 9, 101] {
        let h = HermitianOperator::new(dicke_sector_j(CollectiveAxis::Z, l).unwrap()).unwrap();
        let a = HermitianOperator::new(dicke_sector_j(CollectiveAxis::X, l).unwrap().scale_real(2.0)).unwrap();
        out.push((format!("superradiance L={l}"), a.clone(), h.clone()));
        let jzm = dicke_sector_j(CollectiveAxis::Z, l).unwrap();
        let hsa = HermitianOperator::new(&jzm + &jzm.matmul(&jzm).scale_real(0.9)).unwrap();
        out.push((format!("superabsorption L={l}"), a, hsa));
    }
    for l in [1, 4, 16] {
        let e = 0.5 * l as f64;
        let mut sx = ComplexMatrix::zeros(2, 2);
        sx[(0, 1)] = C64::new(l as f64, 0.0);
        sx[(1, 0)] = C64::new(l as f64, 0.0);
        out.push((
            format!("engine L={l}"),
            HermitianOperator::new(sx).unwrap(),
            HermitianOperator::from_real_diagonal(&[e, -e]),
        ));
        let p = battery(l);
        let lf = l as f64;
        let h = HermitianOperator::from_real_diagonal(&[lf * p.e1, lf * p.e0, lf * p.em1]);
        for (i, j) in [(1, 2), (1, 0)] {
            let mut m = ComplexMatrix::zeros(3, 3);
            m[(i, j)] = C64::new(lf, 0.0);
            m[(j, i)] = C64::new(lf, 0.0);
            out.push((format!("battery L={l} ({i},{j})"), HermitianOperator::new(m).unwrap(), h.clone()));
        }
    }
    out
}

fn criterion_5_commutator_lemma() -> (bool, String) {
    let check = |a: &HermitianOperator, h: &HermitianOperator| {
        let basis = hermitian_eig(h, 1e-9);
        let de = delta_e_default(a, &basis).unwrap().value;
        commutator_lemma_check(a, h, de).unwrap()
    };
    let pairs = scenario_pairs();
    let mut min_slack = f64::INFINITY;
    let bad: Vec<String> = pairs
        .iter()
        .filter_map(|(n, a, h)| {
            let c = check(a, h);
            min_slack = min_slack.min(c.slack);
            (!c.holds).then(|| n.clone())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut random_bad = Vec::new();
    for k in 0..200 {
        let n = 2 + k % 15;
        let a = random_hermitian(&mut rng, n, 1.0);
        let h = random_hermitian(&mut rng, n, 2.0);
        if !check(&a, &h).holds {
            random_bad.push(k);
        }
    }
    report(
        5,
        "commutator lemma",
        &[
            (
                bad.is_empty(),
                format!("{} scenario pairs, violations {bad:?}, min slack {min_slack:.3e}", pairs.len()),
            ),
            (random_bad.is_empty(), format!("200 random pairs, violations {random_bad:?}")),
        ],
    )
}

fn criterion_6_heat_engine() -> (bool, String) {
    let omega_q = 1.0;
    let mut worst_power = 0.0f64;
    let mut worst_eta = 0.0f64;
    let mut worst_first_law = 0.0f64;
    let mut engine_points = 0usize;
    let mut eta_violations = 0usize;
    let mut second_law_worst = f64::NEG_INFINITY;
    let mut points = 0usize;
    for &bh in &[0.1, 0.3, 0.7, 1.5] {
        for &ratio in &[1.5, 3.0, 10.0] {
            let bc = bh * ratio;
            let bw = 1e-6 * bh;
            for &gammas in &[[1.0, 1.0, 1.0], [2.0, 0.5, 0.3], [0.2, 1.5, 0.8], [1.0, 0.1, 3.0]] {
                let rates = EngineRates::thermal(gammas, [bh, bc, bw], omega_q).unwrap();
                for l in [1, 2, 3, 8, 20] {
                    let r = heat_engine_steady_state(&rates, omega_q, l).unwrap();
                    points += 1;
                    let j: Vec<f64> = r.currents.per_bath.iter().map(|x| x.1).collect();
                    worst_power = worst_power.max(rel(r.power, r.power_closed_form));
                    if let Some(eta_cf) = r.efficiency_closed_form {
                        worst_eta = worst_eta.max(rel(1.0 + j[1] / j[0], eta_cf));
                    }
                    let max_j = r.currents.max_abs();
                    worst_first_law = worst_first_law.max(r.first_law_residual / max_j.max(f64::MIN_POSITIVE));
                    second_law_worst = second_law_worst.max(r.beta_weighted_current.unwrap() / max_j.max(f64::MIN_POSITIVE));
                    if r.thermo.regime == Regime::Engine {
                        engine_points += 1;
                        if r.thermo.efficiency.unwrap() > r.thermo.carnot_efficiency + 1e-12 {
                            eta_violations += 1;
                        }
                    }
                }
            }
        }
    }
    let rates = EngineRates::thermal([1.0, 0.7, 0.4], [0.5, 2.0, 0.5e-6], omega_q).unwrap();
    let pts: Vec<(f64, f64)> = [1, 2, 4, 8, 16, 32, 64]
        .iter()
        .map(|&l| (l as f64, heat_engine_steady_state(&rates, omega_q, l).unwrap().power.abs()))
        .collect();
    let fit = fit_exponent(&pts).unwrap();
    report(
        6,
        "heat engine",
        &[
            (
                worst_power <= 1e-12 && worst_eta <= 1e-12,
                format!("{points} points: closed vs numeric power rel {worst_power:.2e}, efficiency rel {worst_eta:.2e} (tol 1e-12)"),
            ),
            ((fit.exponent - 3.0).abs() <= 1e-6, format!("P-vs-L slope {:.9} (3 +- 1e-6)", fit.exponent)),
            (
                eta_violations == 0,
                format!(
                    "eta <= eta_Carnot at all {engine_points} engine-regime points (the two-level model with the hottest W bath never reaches the engine regime); sum beta_a J_a / max|J| <= {second_law_worst:.2e}"
                ),
            ),
            (
                second_law_worst <= 1e-12,
                "second law sum beta_a J_a <= 0 at every point".into(),
            ),
            (
                worst_first_law <= 1e-12,
                format!("first-law residual / max|J_a| <= {worst_first_law:.2e} (tol 1e-12)"),
            ),
        ],
    )
}

fn criterion_7_battery() -> (bool, String) {
    let mut worst = 0.0f64;
    for &(bh, bc) in &[(0.5, 2.0), (0.1, 1.0), (1.0, 0.5), (0.2, 3.0)] {
        for l in 1..=16 {
            let p = BatteryParams {
                beta_h0: bh,
                beta_c0: bc,
                ..battery(l)
            };
            let r = battery_steady_state(&p).unwrap();
            worst = worst.max((r.ergotropy - battery_ergotropy_closed_form(&p)).abs());
        }
    }
    let pts: Vec<(f64, f64)> = (1..=16)
        .map(|l| (l as f64, battery_steady_state(&battery(l)).unwrap().charging_time_ratio))
        .collect();
    let fit = fit_exponent(&pts).unwrap();
    report(
        7,
        "quantum battery",
        &[
            (worst <= 1e-12, format!("ergotropy vs closed form, L = 1..16: max abs {worst:.2e} (tol 1e-12)")),
            (
                (fit.exponent - 2.0).abs() <= 0.02,
                format!("charging-time ratio slope over L = 1..16: {:.6} (2.00 +- 0.02)", fit.exponent),
            ),
        ],
    )
}

struct Audit {
    points: usize,
    trace: f64,
    hermiticity: f64,
    min_eig: f64,
    min_sigma: f64,
}

fn audit_trajectory(audit: &mut Audit, sys: &SystemSpec, rho0: &DensityMatrix, t_final: f64) {
    let gen = Generator::new(sys, Engine::Gksl).unwrap();
    let betas: Vec<f64> = sys.baths().iter().map(|b| b.beta()).collect();
    let traj = evolve_with(sys, rho0, &Rk4Config::new(1e-3, t_final).record_every(50), Engine::Gksl).unwrap();
    for p in &traj {
        let dot = gen.derivative(p.state.matrix()).unwrap();
        let j = gen.heat_currents(&p.state).unwrap();
        let ep = entropy_production_rate(&p.state, &dot, &j, &betas).unwrap();
        audit.points += 1;
        audit.trace = audit.trace.max((p.state.matrix().trace().re - 1.0).abs());
        audit.hermiticity = audit.hermiticity.max(dot.hermiticity_defect()).max(p.state.matrix().hermiticity_defect());
        audit.min_eig = audit.min_eig.min(p.state.min_eigenvalue());
        audit.min_sigma = audit.min_sigma.min(ep.entropy_production);
    }
}

fn criterion_8_thermodynamic_suite() -> (bool, String) {
    let mut audit = Audit {
        points: 0,
        trace: 0.0,
        hermiticity: 0.0,
        min_eig: f64::INFINITY,
        min_sigma: f64::INFINITY,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..12 {
        let n = 2 + k % 5;
        let h = random_hermitian(&mut rng, n, 1.0);
        let baths = (0..2)
            .map(|b| {
                let model = SpectralModel::flat_thermal(rng.gen_range(0.1..1.0), rng.gen_range(0.1..3.0)).unwrap();
                BathSpec::single(format!("B{b}"), random_hermitian(&mut rng, n, 0.5), model).unwrap()
            })
            .collect();
        let sys = SystemSpec::new(h, baths).unwrap();
        let rho0 = if k % 2 == 0 {
            random_density(&mut rng, n)
        } else {
            let psi: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            DensityMatrix::pure(&psi.iter().map(|c| c / norm).collect::<Vec<_>>()).unwrap()
        };
        audit_trajectory(&mut audit, &sys, &rho0, 2.0);
    }
    for l in [2, 3] {
        let baths = [(0.3, 1.0), (2.0, 0.6)]
            .iter()
            .enumerate()
            .map(|(i, &(beta, g0))| {
                let model = SpectralModel::flat_thermal(g0, beta).unwrap();
                BathSpec::single(format!("B{i}"), m_body_noise(l, l, 1.0).unwrap(), model).unwrap()
            })
            .collect();
        let sys = SystemSpec::new(jz(l, 1.0), baths).unwrap();
        audit_trajectory(&mut audit, &sys, &DensityMatrix::maximally_mixed(1 << l), 1.0);
    }

    let mut gibbs = 0.0f64;
    for k in 0..20 {
        let n = 2 + k % 8;
        let h = random_hermitian(&mut rng, n, 1.5);
        let beta = rng.gen_range(0.0..3.0);
        let model = SpectralModel::flat_thermal(rng.gen_range(0.2..2.0), beta).unwrap();
        let bath = BathSpec::single("B", random_hermitian(&mut rng, n, 1.0), model).unwrap();
        let sys = SystemSpec::new(h, vec![bath]).unwrap();
        let gen = Generator::new(&sys, Engine::Gksl).unwrap();
        let w: Vec<f64> = gen.energies().iter().map(|e| (-beta * e).exp()).collect();
        let z: f64 = w.iter().sum();
        let rho_e = ComplexMatrix::from_real_diagonal(&w.iter().map(|x| x / z).collect::<Vec<_>>());
        gibbs = gibbs.max(gen.derivative_eigen(&rho_e).max_abs());
    }
    report(
        8,
        "thermodynamic suite",
        &[
            (audit.trace <= 1e-10, format!("{} states: trace defect {:.2e} (tol 1e-10)", audit.points, audit.trace)),
            (audit.hermiticity <= 1e-10, format!("Hermiticity defect {:.2e} (tol 1e-10)", audit.hermiticity)),
            (audit.min_eig >= -1e-8, format!("min eigenvalue {:.2e} (>= -1e-8)", audit.min_eig)),
            (audit.min_sigma >= -1e-9, format!("min sigma_dot {:.2e} (>= -1e-9)", audit.min_sigma)),
            (gibbs <= 1e-9, format!("Gibbs stationarity residual {gibbs:.2e} (tol 1e-9)")),
        ],
    )
}

fn criterion_9_superabsorption() -> (bool, String) {
    let (omega_big, wq, g0) = (0.9, 1.0, 1.0);
    let ls: Vec<usize> = (101..=1001).step_by(100).collect();
    let mut worst_de = 0.0f64;
    let mut absorb = Vec::new();
    let mut b2 = Vec::new();
    for &l in &ls {
        let r = superabsorption_bound_analysis(l, omega_big, wq, g0).unwrap();
        worst_de = worst_de.max((r.delta_e - (wq + (l as f64 - 1.0) * omega_big)).abs());
        absorb.push((l as f64, r.absorption_current));
        b2.push((l as f64, r.bounds.bound2));
    }
    for l in [1, 3, 5, 11, 21] {
        let r = superabsorption_bound_analysis(l, omega_big, wq, g0).unwrap();
        worst_de = worst_de.max((r.delta_e - (wq + (l as f64 - 1.0) * omega_big)).abs());
    }
    let fa = fit_exponent(&absorb).unwrap();
    let fb = fit_exponent(&b2).unwrap();
    report(
        9,
        "superabsorption",
        &[
            (worst_de <= 1e-10, format!("|dE - (omega_q + (L-1) Omega)| <= {worst_de:.2e} (tol 1e-10)")),
            (
                (fa.exponent - 2.0).abs() <= 0.05,
                format!("absorption exponent over L = 101..1001: {:.4} (2.00 +- 0.05)", fa.exponent),
            ),
            (
                (fb.exponent - 3.0).abs() <= 0.02,
                format!("bound2 exponent: {:.4} (3.00 +- 0.02)", fb.exponent),
            ),
        ],
    )
}

type Criterion = (u32, &'static str, fn() -> (bool, String));

const CRITERIA: [Criterion; 9] = [
    (1, "mbody current", criterion_1_mbody_current),
    (2, "bound1 saturation", criterion_2_bound1_saturation),
    (3, "superradiance", criterion_3_superradiance),
    (4, "bound2", criterion_4_bound2),
    (5, "commutator lemma", criterion_5_commutator_lemma),
    (6, "heat engine", criterion_6_heat_engine),
    (7, "battery", criterion_7_battery),
    (8, "thermodynamic suite", criterion_8_thermodynamic_suite),
    (9, "superabsorption", criterion_9_superabsorption),
];

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let start = Instant::now();
    let results: Vec<(bool, String)> = std::thread::scope(|s| {
        let handles: Vec<_> = CRITERIA.iter().map(|&(_, _, f)| s.spawn(f)).collect();
        handles
            .into_iter()
            .zip(CRITERIA)
            .map(|(h, (id, name, _))| {
                h.join().unwrap_or_else(|e| {
                    let msg = e
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default();
                    (false, format!("[FAIL] criterion {id} ({name}): panicked: {msg}"))
                })
            })
            .collect()
    });
    for (_, line) in &results {
        println!("{line}");
    }
    let passed = results.iter().filter(|r| r.0).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.1} s",
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if passed != results.len() {
        std::process::exit(1);
    }
}
