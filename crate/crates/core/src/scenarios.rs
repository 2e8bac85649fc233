//! The five collective systems: m-body coupling, superradiance,
//! superabsorption, a three-bath heat engine and a three-level quantum
//! battery. Each comes with its closed form and a simulation path, and reports
//! its heat currents against the bounds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds::{evaluate_bounds, evaluate_bounds_with_basis, BoundReport};
use crate::error::{Error, Result};
use crate::master::{evolve_ladder, ladder_derivative, ladder_heat_current, DickeLadder, Engine, Generator, LadderPoint};
use crate::numcore::{ComplexMatrix, DensityMatrix, HermitianOperator, C64, ONE};
use crate::operators::{
    binomial, collective_j, dicke_sector_j, dicke_state, m_body_noise, CollectiveAxis, DickeIndex,
};
use crate::spectral::{BathSpec, SpectralModel, SystemSpec};
use crate::thermo::{
    efficiency_and_cop, entropy_production_rate, ergotropy, steady_entropy_production, HeatCurrentRecord,
    ThermoReport, ENTROPY_FLOOR,
};

fn with_xi(model: SpectralModel, xi_override: Option<f64>) -> Result<SpectralModel> {
    match xi_override {
        Some(x) => model.with_xi(x),
        None => Ok(model),
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

fn check_nonnegative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("{name} must be nonnegative, got {x}")));
    }
    Ok(())
}

fn relative_error(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}

fn diag_operator(values: &[f64]) -> HermitianOperator {
    HermitianOperator::from_real_diagonal(values)
}

// ---------------------------------------------------------------------------
// State audits

/// First-law and entropy bookkeeping of one state under a generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateAudit {
    pub energy_rate: f64,
    pub total_current: f64,
    /// `|dE/dt - sum_a J_a|`
    pub first_law_residual: f64,
    pub entropy_rate: f64,
    /// `dS/dt - sum_a beta_a J_a`; `None` when infinite (a zero-temperature
    /// bath exchanging heat).
    pub entropy_production: Option<f64>,
    pub regularized: bool,
}

pub fn audit_state(generator: &Generator, rho: &DensityMatrix) -> Result<StateAudit> {
    let rho_e = generator.to_eigenbasis(rho.matrix());
    let dot_e = generator.derivative_eigen(&rho_e);
    let energy_rate: f64 = generator
        .energies()
        .iter()
        .enumerate()
        .map(|(i, e)| e * dot_e[(i, i)].re)
        .sum();
    let currents = generator.heat_currents_eigen(&rho_e);
    let total_current: f64 = currents.iter().sum();
    let betas: Vec<f64> = (0..generator.bath_count()).map(|b| generator.bath_beta(b)).collect();
    let ep = entropy_production_rate(rho, &generator.from_eigenbasis(&dot_e), &currents, &betas)?;
    Ok(StateAudit {
        energy_rate,
        total_current,
        first_law_residual: (energy_rate - total_current).abs(),
        entropy_rate: ep.entropy_rate,
        entropy_production: ep.entropy_production.is_finite().then_some(ep.entropy_production),
        regularized: ep.regularized,
    })
}

/// As [`audit_state`] for ladder populations coupled to one bath at `beta`.
pub fn audit_ladder(ladder: &DickeLadder, gamma_down: f64, gamma_up: f64, beta: f64) -> Result<StateAudit> {
    let dp = ladder_derivative(ladder, gamma_down, gamma_up)?;
    let energy_rate: f64 = ladder.energies().iter().zip(&dp).map(|(e, d)| e * d).sum();
    let j = ladder_heat_current(ladder, gamma_down, gamma_up)?;
    let scale = dp.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut regularized = false;
    let mut entropy_rate = 0.0;
    for (p, d) in ladder.populations().iter().zip(&dp) {
        if *p < 1e-12 && d.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE) {
            regularized = true;
        }
        entropy_rate -= d * p.max(ENTROPY_FLOOR).ln();
    }
    let flux = if j == 0.0 { 0.0 } else { beta * j };
    let production = entropy_rate - flux;
    Ok(StateAudit {
        energy_rate,
        total_current: j,
        first_law_residual: (energy_rate - j).abs(),
        entropy_rate,
        entropy_production: production.is_finite().then_some(production),
        regularized,
    })
}

// ---------------------------------------------------------------------------
// Rate networks

/// Classical population dynamics `dp/dt = sum_a M_a p` on a few energy levels;
/// every bath contributes its own rate matrix so per-bath currents are exact.
#[derive(Clone, Debug, PartialEq)]
pub struct RateNetwork {
    labels: Vec<String>,
    energies: Vec<f64>,
    baths: Vec<(String, DMatrix<f64>)>,
}

impl RateNetwork {
    pub fn new(labels: Vec<String>, energies: Vec<f64>, baths: Vec<(String, DMatrix<f64>)>) -> Result<Self> {
        let n = energies.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                context: "rate network labels",
                expected: n,
                found: labels.len(),
            });
        }
        for (name, m) in &baths {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "rate matrix",
                    expected: n,
                    found: m.nrows(),
                });
            }
            let scale = m.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            for j in 0..n {
                for i in 0..n {
                    if i != j && !(m[(i, j)] >= 0.0) {
                        return Err(Error::InvalidGenerator(format!(
                            "bath {name}: negative rate {} at ({i}, {j})",
                            m[(i, j)]
                        )));
                    }
                }
                let col: f64 = m.column(j).sum();
                if col.abs() > 1e-12 * scale {
                    return Err(Error::InvalidGenerator(format!("bath {name}: column {j} sums to {col}")));
                }
            }
        }
        Ok(Self { labels, energies, baths })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn bath_labels(&self) -> Vec<String> {
        self.baths.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn bath_matrix(&self, index: usize) -> &DMatrix<f64> {
        &self.baths[index].1
    }

    pub fn rate_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.baths.iter().fold(DMatrix::zeros(n, n), |acc, (_, m)| acc + m)
    }

    pub fn derivative(&self, p: &[f64]) -> Vec<f64> {
        (self.rate_matrix() * DVector::from_column_slice(p)).iter().copied().collect()
    }

    /// Null vector of the rate matrix normalized to unit sum.
    pub fn steady_state(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut a = self.rate_matrix();
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let p = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidGenerator("rate matrix has no unique steady state".into()))?;
        Ok(p.iter().copied().collect())
    }

    /// `J_a = sum_i E_i (M_a p)_i`.
    pub fn currents(&self, p: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(p);
        self.baths
            .iter()
            .map(|(_, m)| {
                let flow = m * &v;
                flow.iter().zip(&self.energies).map(|(f, e)| f * e).sum()
            })
            .collect()
    }

    pub fn current_record(&self, time: f64, p: &[f64]) -> HeatCurrentRecord {
        HeatCurrentRecord::new(time, self.bath_labels().into_iter().zip(self.currents(p)).collect())
    }

    /// `exp(M t) p0`
    pub fn propagate(&self, p0: &[f64], t: f64) -> Vec<f64> {
        let m = self.rate_matrix() * t;
        (m.exp() * DVector::from_column_slice(p0)).iter().copied().collect()
    }

    /// First time at which the L1 distance to the steady state has dropped to
    /// `fraction` of its initial value (bisection on the exact propagator).
    pub fn relaxation_time(&self, p0: &[f64], fraction: f64) -> Result<f64> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::invalid(format!("fraction must lie in (0, 1), got {fraction}")));
        }
        let ss = self.steady_state()?;
        let dist = |p: &[f64]| p.iter().zip(&ss).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let d0 = dist(p0);
        if d0 == 0.0 {
            return Ok(0.0);
        }
        let target = fraction * d0;
        let fastest = self.rate_matrix().diagonal().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if fastest == 0.0 {
            return Err(Error::InvalidGenerator("rate matrix is zero".into()));
        }
        let (mut lo, mut hi) = (0.0, 1.0 / fastest);
        let mut guard = 0;
        while dist(&self.propagate(p0, hi)) > target {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::InvalidGenerator("no relaxation within 2^200 time units".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dist(&self.propagate(p0, mid)) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(hi)
    }
}

// ---------------------------------------------------------------------------
// m-body coupling

fn ln_binomial(n: u64, k: u64) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `J(0) = -gamma_wn omega_q L^2 m / C(L, m)`.
pub fn mbody_current_closed_form(l: usize, m: usize, gamma_wn: f64, omega_q: f64) -> Result<f64> {
    if l == 0 || m == 0 || m > l {
        return Err(Error::invalid(format!("need 1 <= m <= L, got L = {l}, m = {m}")));
    }
    let lf = l as f64;
    let mf = m as f64;
    let value = if l <= 60 {
        let c = binomial(l as u64, m as u64).expect("exact for L <= 60") as f64;
        -gamma_wn * omega_q * lf * lf * mf / c
    } else {
        -gamma_wn * omega_q * (2.0 * lf.ln() + mf.ln() - ln_binomial(l as u64, m as u64)).exp()
    };
    Ok(value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbodyParams {
    pub l: usize,
    pub m: usize,
    pub gamma_wn: f64,
    pub omega_q: f64,
    pub g: f64,
    pub xi_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbodyRun {
    pub params: MbodyParams,
    pub current: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    pub parallel_current: f64,
    pub bounds: BoundReport,
    pub audit: StateAudit,
}

/// Dense Redfield heat current at `t = 0` from the all-excited state, with
/// `H = omega_q J_z`, the m-body noise operator and white noise of strength
/// `gamma_wn`.
pub fn mbody_simulate(l: usize, m: usize, gamma_wn: f64, omega_q: f64, g: f64) -> Result<MbodyRun> {
    mbody_run(&MbodyParams {
        l,
        m,
        gamma_wn,
        omega_q,
        g,
        xi_override: None,
    })
}

/// `H = omega_q J_z` with one white-noise bath on the m-body operator, and the
/// all-excited initial state.
pub fn m_body_system(p: &MbodyParams) -> Result<(SystemSpec, DensityMatrix)> {
    check_nonnegative("gamma_wn", p.gamma_wn)?;
    check_positive("g", p.g)?;
    let a = m_body_noise(p.l, p.m, p.g)?;
    let h = HermitianOperator::new(collective_j(CollectiveAxis::Z, p.l)?.scale_real(p.omega_q))?;
    let model = with_xi(SpectralModel::white_noise(p.gamma_wn, p.g)?, p.xi_override)?;
    let bath = BathSpec::single("wn", a, model)?;
    Ok((SystemSpec::new(h, vec![bath])?, DensityMatrix::basis_state(1 << p.l, 0)))
}

pub fn mbody_run(p: &MbodyParams) -> Result<MbodyRun> {
    check_nonnegative("gamma_wn", p.gamma_wn)?;
    check_positive("g", p.g)?;
    let closed_form = mbody_current_closed_form(p.l, p.m, p.gamma_wn, p.omega_q)?;
    let (system, rho) = m_body_system(p)?;
    let h = system.hamiltonian().clone();
    let bath = system.baths()[0].clone();
    let generator = Generator::new(&system, Engine::Redfield)?;
    let current = generator.heat_currents(&rho)?[0];
    let bounds = evaluate_bounds_with_basis(&h, generator.basis(), &bath, current)?;
    let audit = audit_state(&generator, &rho)?;
    Ok(MbodyRun {
        audit,
        params: *p,
        current,
        closed_form,
        relative_error: relative_error(current, closed_form),
        parallel_current: -(p.l as f64) * p.gamma_wn * p.omega_q,
        bounds,
    })
}

// ---------------------------------------------------------------------------
// Superradiance

fn check_odd(l: usize) -> Result<()> {
    if l.is_multiple_of(2) {
        return Err(Error::invalid(format!("the |1/2> cascade needs odd L, got {l}")));
    }
    Ok(())
}

/// `J(0) = -(1/4) gamma0 omega_q (L + 1)^2` from `|1/2>`, odd `L`.
pub fn superradiance_closed_form(l: usize, gamma0: f64, omega_q: f64) -> Result<f64> {
    check_odd(l)?;
    let lp = l as f64 + 1.0;
    Ok(-0.25 * gamma0 * omega_q * lp * lp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Ladder,
    Dense,
}

/// Largest `L` accepted by the ladder backend.
pub const MAX_LADDER_PARTICLES: usize = 10001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperradianceParams {
    pub l: usize,
    pub gamma0: f64,
    pub omega_q: f64,
    pub backend: Backend,
    pub xi_override: Option<f64>,
    pub cascade: Option<CascadeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperradianceRun {
    pub params: SuperradianceParams,
    pub current: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    pub parallel_current: f64,
    /// Population cascade from the ladder rate equations.
    pub cascade: Option<Vec<LadderPoint>>,
    /// `E(0) - E(t_final)` of the cascade.
    pub emitted_energy: Option<f64>,
    pub bounds: BoundReport,
    pub audit: StateAudit,
}

/// `|1/2>` at zero temperature with `A = 2 J_x`; `gamma0` is the physical
/// decay rate.
pub fn superradiance_simulate(l: usize, gamma0: f64, omega_q: f64, backend: Backend) -> Result<SuperradianceRun> {
    superradiance_run(&SuperradianceParams {
        l,
        gamma0,
        omega_q,
        backend,
        xi_override: None,
        cascade: None,
    })
}

fn superradiance_sector(l: usize, omega_q: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    let h = HermitianOperator::new(dicke_sector_j(CollectiveAxis::Z, l)?.scale_real(omega_q))?;
    let a = HermitianOperator::new(dicke_sector_j(CollectiveAxis::X, l)?.scale_real(2.0))?;
    Ok((h, a))
}

pub fn superradiance_run(p: &SuperradianceParams) -> Result<SuperradianceRun> {
    check_nonnegative("gamma0", p.gamma0)?;
    let closed_form = superradiance_closed_form(p.l, p.gamma0, p.omega_q)?;
    let model = with_xi(SpectralModel::flat_zero_temperature(p.gamma0)?, p.xi_override)?;
    let start = DickeIndex::new(p.l, 0.5)?;
    let (current, bounds, audit) = match p.backend {
        Backend::Ladder => {
            if p.l > MAX_LADDER_PARTICLES {
                return Err(Error::DimensionOverflow {
                    particles: p.l,
                    max: MAX_LADDER_PARTICLES,
                });
            }
            let ladder = DickeLadder::dicke(start, p.omega_q);
            let current = ladder_heat_current(&ladder, p.gamma0, 0.0)?;
            let (h, a) = superradiance_sector(p.l, p.omega_q)?;
            let bath = BathSpec::single("C", a, model)?;
            let audit = audit_ladder(&ladder, p.gamma0, 0.0, f64::INFINITY)?;
            (current, evaluate_bounds(&h, &bath, current)?, audit)
        }
        Backend::Dense => {
            let h = HermitianOperator::new(collective_j(CollectiveAxis::Z, p.l)?.scale_real(p.omega_q))?;
            let a = HermitianOperator::new(collective_j(CollectiveAxis::X, p.l)?.scale_real(2.0))?;
            let bath = BathSpec::single("C", a, model)?;
            let system = SystemSpec::new(h.clone(), vec![bath.clone()])?;
            let generator = Generator::new(&system, Engine::Redfield)?;
            let rho = DensityMatrix::pure(&dicke_state(start)?)?;
            let current = generator.heat_currents(&rho)?[0];
            let audit = audit_state(&generator, &rho)?;
            (current, evaluate_bounds_with_basis(&h, generator.basis(), &bath, current)?, audit)
        }
    };
    let (cascade, emitted_energy) = match p.cascade {
        Some(c) => {
            let ladder = DickeLadder::dicke(start, p.omega_q);
            let traj = evolve_ladder(&ladder, p.gamma0, 0.0, c.dt, c.t_final, c.record_every)?;
            let emitted = ladder.energy() - traj.last().expect("nonempty").ladder.energy();
            (Some(traj), Some(emitted))
        }
        None => (None, None),
    };
    Ok(SuperradianceRun {
        params: *p,
        current,
        closed_form,
        relative_error: relative_error(current, closed_form),
        parallel_current: -(p.l as f64) * p.gamma0 * p.omega_q,
        cascade,
        emitted_energy,
        bounds,
        audit,
    })
}

// ---------------------------------------------------------------------------
// Superabsorption

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperabsorptionParams {
    pub l: usize,
    pub omega_big: f64,
    pub omega_q: f64,
    pub gamma0: f64,
    pub xi_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperabsorptionRun {
    pub params: SuperabsorptionParams,
    pub delta_e: f64,
    pub delta_e_closed_form: f64,
    /// Pass band of the filtered bath, centred on the `|-1/2> -> |1/2>` line.
    pub window: (f64, f64),
    pub absorption_current: f64,
    pub absorption_closed_form: f64,
    pub relative_error: f64,
    pub parallel_current: f64,
    /// `bound2 / J`: grows linearly in `L`, so Bound 2 is never saturated.
    pub bound2_over_current: f64,
    pub bounds: BoundReport,
    pub audit: StateAudit,
    pub note: String,
}

/// `H = omega_q J_z + Omega J_z^2`, `A = 2 J_x`, a band-pass bath that only
/// drives `|-1/2> -> |1/2>`, evaluated from `|-1/2>` on the Dicke sector.
pub fn superabsorption_bound_analysis(l: usize, omega_big: f64, omega_q: f64, gamma0: f64) -> Result<SuperabsorptionRun> {
    superabsorption_run(&SuperabsorptionParams {
        l,
        omega_big,
        omega_q,
        gamma0,
        xi_override: None,
    })
}

pub fn superabsorption_run(p: &SuperabsorptionParams) -> Result<SuperabsorptionRun> {
    check_odd(p.l)?;
    check_positive("gamma0", p.gamma0)?;
    check_nonnegative("Omega", p.omega_big)?;
    let jz = dicke_sector_j(CollectiveAxis::Z, p.l)?;
    let h = HermitianOperator::new(&jz.scale_real(p.omega_q) + &jz.matmul(&jz).scale_real(p.omega_big))?;
    let a = HermitianOperator::new(dicke_sector_j(CollectiveAxis::X, p.l)?.scale_real(2.0))?;
    let energy = |m: f64| p.omega_q * m + p.omega_big * m * m;
    // absorbing |-1/2> -> |1/2> lowers the system energy by -target
    let target = energy(-0.5) - energy(0.5);
    let lt = p.l as f64 / 2.0;
    let mut gap = f64::INFINITY;
    let mut k = -lt;
    while k < lt - 0.5 {
        let w = energy(k + 1.0) - energy(k);
        for cand in [w, -w] {
            if (cand - target).abs() > 1e-12 * target.abs().max(1.0) {
                gap = gap.min((cand - target).abs());
            }
        }
        k += 1.0;
    }
    let half = if gap.is_finite() { 0.5 * gap } else { 0.5 * target.abs() };
    if !(half > 0.0) {
        return Err(Error::invalid("absorption line is not resolvable from its neighbours"));
    }
    let window = (target - half, target + half);
    let model = with_xi(SpectralModel::band_pass(p.gamma0, window.0, window.1)?, p.xi_override)?;
    let bath = BathSpec::single("SA", a, model)?;
    let system = SystemSpec::new(h.clone(), vec![bath.clone()])?;
    let generator = Generator::new(&system, Engine::Redfield)?;
    let start = DickeIndex::new(p.l, -0.5)?;
    let rho = DensityMatrix::basis_state(p.l + 1, start.ladder_position());
    let current = generator.heat_currents(&rho)?[0];
    let bounds = evaluate_bounds_with_basis(&h, generator.basis(), &bath, current)?;
    let audit = audit_state(&generator, &rho)?;
    let delta_e = bounds.delta_e_per_channel[0];
    let lp = p.l as f64 + 1.0;
    let absorption_closed_form = 0.25 * p.gamma0 * p.omega_q * lp * lp;
    Ok(SuperabsorptionRun {
        params: *p,
        delta_e,
        delta_e_closed_form: p.omega_q + (p.l as f64 - 1.0) * p.omega_big,
        window,
        absorption_current: current,
        absorption_closed_form,
        relative_error: relative_error(current, absorption_closed_form),
        parallel_current: p.l as f64 * p.gamma0 * p.omega_q,
        bound2_over_current: if current != 0.0 { bounds.bound2 / current.abs() } else { f64::INFINITY },
        bounds,
        audit,
        note: "absorption grows as L^2 while Bound 2 grows as L^3 through dE = omega_q + (L-1) Omega".into(),
    })
}

// ---------------------------------------------------------------------------
// Heat engine

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathRates {
    pub up: f64,
    pub down: f64,
}

impl BathRates {
    pub fn new(up: f64, down: f64) -> Result<Self> {
        check_nonnegative("rate", up)?;
        check_nonnegative("rate", down)?;
        Ok(Self { up, down })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineRates {
    pub hot: BathRates,
    pub cold: BathRates,
    pub work: BathRates,
    /// `(beta_H0, beta_C0, beta_W0)` when the rates come from thermal baths.
    pub betas0: Option<[f64; 3]>,
}

impl EngineRates {
    pub fn new(hot: BathRates, cold: BathRates, work: BathRates) -> Self {
        Self {
            hot,
            cold,
            work,
            betas0: None,
        }
    }

    /// White-noise baths with `beta_X = beta_X0 / L`: `gamma_down = gamma_X`
    /// and `gamma_up = gamma_X exp(-beta_X0 omega_q)`, independent of `L`.
    pub fn thermal(gammas: [f64; 3], betas0: [f64; 3], omega_q: f64) -> Result<Self> {
        let mk = |g: f64, b: f64| -> Result<BathRates> {
            check_nonnegative("beta0", b)?;
            BathRates::new(g * (-b * omega_q).exp(), g)
        };
        Ok(Self {
            hot: mk(gammas[0], betas0[0])?,
            cold: mk(gammas[1], betas0[1])?,
            work: mk(gammas[2], betas0[2])?,
            betas0: Some(betas0),
        })
    }

    pub fn as_array(&self) -> [BathRates; 3] {
        [self.hot, self.cold, self.work]
    }

    pub fn total_up(&self) -> f64 {
        self.hot.up + self.cold.up + self.work.up
    }

    pub fn total_down(&self) -> f64 {
        self.hot.down + self.cold.down + self.work.down
    }
}

pub const ENGINE_BATHS: [&str; 3] = ["H", "C", "W"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineRun {
    pub l: usize,
    pub omega_q: f64,
    pub rates: EngineRates,
    /// `(p_{L/2}, p_{-L/2})`
    pub populations: [f64; 2],
    pub closed_form_populations: [f64; 2],
    pub steady_residual: f64,
    pub currents: HeatCurrentRecord,
    pub closed_form_currents: [f64; 3],
    pub power: f64,
    pub power_closed_form: f64,
    pub efficiency_closed_form: Option<f64>,
    pub efficiency_deficit: Option<f64>,
    pub thermo: ThermoReport,
    pub first_law_residual: f64,
    /// `sum_a beta_a J_a` (nonpositive by the second law), when temperatures are known.
    pub beta_weighted_current: Option<f64>,
    pub parallel_power: f64,
    pub bounds: Vec<(String, BoundReport)>,
}

/// The `{|L/2>, |-L/2>}` network with generator `L^2 sum_a M_a`.
pub fn engine_network(rates: &EngineRates, omega_q: f64, l: usize) -> Result<RateNetwork> {
    if l == 0 {
        return Err(Error::invalid("L must be at least 1"));
    }
    let l2 = (l * l) as f64;
    let e = 0.5 * l as f64 * omega_q;
    let baths = ENGINE_BATHS
        .iter()
        .zip(rates.as_array())
        .map(|(name, r)| {
            let m = DMatrix::from_row_slice(2, 2, &[-r.down, r.up, r.down, -r.up]) * l2;
            (name.to_string(), m)
        })
        .collect();
    RateNetwork::new(vec!["L/2".into(), "-L/2".into()], vec![e, -e], baths)
}

fn engine_closed_form(rates: &EngineRates, omega_q: f64, l: usize) -> ([f64; 2], [f64; 3]) {
    let (gu, gd) = (rates.total_up(), rates.total_down());
    let total = gu + gd;
    let l3 = (l as f64).powi(3);
    let j = rates
        .as_array()
        .map(|r| omega_q * l3 * (r.up * gd - r.down * gu) / total);
    ([gu / total, gd / total], j)
}

/// Steady state, currents, power, efficiency and bounds of the L-body engine.
pub fn heat_engine_steady_state(rates: &EngineRates, omega_q: f64, l: usize) -> Result<EngineRun> {
    for r in rates.as_array() {
        BathRates::new(r.up, r.down)?;
    }
    if !(rates.total_up() + rates.total_down() > 0.0) {
        return Err(Error::invalid("all engine rates vanish"));
    }
    let net = engine_network(rates, omega_q, l)?;
    let p = net.steady_state()?;
    let residual = net.derivative(&p).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let currents = net.current_record(f64::INFINITY, &p);
    let j: Vec<f64> = currents.per_bath.iter().map(|(_, j)| *j).collect();
    let (pops_cf, j_cf) = engine_closed_form(rates, omega_q, l);

    let denom = j_cf[0];
    let efficiency_closed_form = (denom != 0.0).then(|| 1.0 + j_cf[1] / denom);

    let lf = l as f64;
    let (thermo, beta_weighted) = match rates.betas0 {
        Some(b0) => {
            let betas = b0.map(|b| b / lf);
            let report = efficiency_and_cop(j[0], j[1], j[2], betas[0], betas[1]);
            let weighted = -steady_entropy_production(&j, &betas);
            (report, Some(weighted))
        }
        None => {
            let mut report = efficiency_and_cop(j[0], j[1], j[2], f64::NAN, f64::NAN);
            report.notes.push("bath temperatures unknown; Carnot limits undefined".into());
            (report, None)
        }
    };
    let efficiency_deficit = thermo
        .efficiency
        .filter(|_| thermo.carnot_efficiency.is_finite())
        .map(|eta| thermo.carnot_efficiency - eta);

    let single = engine_closed_form(rates, omega_q, 1).1;

    // bounds on the two-level reduction: H = diag(E, -E), A = L sigma_x
    let e = 0.5 * lf * omega_q;
    let h = diag_operator(&[e, -e]);
    let mut sx = ComplexMatrix::zeros(2, 2);
    sx[(0, 1)] = ONE;
    sx[(1, 0)] = ONE;
    let a = HermitianOperator::new(sx.scale_real(lf))?;
    let mut bounds = Vec::with_capacity(3);
    for ((name, r), jj) in ENGINE_BATHS.iter().zip(rates.as_array()).zip(&j) {
        let gamma_max = r.up.max(r.down);
        let beta_eff = if r.up > 0.0 && r.down > r.up {
            (r.down / r.up).ln() / (2.0 * e)
        } else if r.up == 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let model = SpectralModel::flat_thermal(gamma_max, beta_eff)?;
        let bath = BathSpec::single(*name, a.clone(), model)?;
        bounds.push((name.to_string(), evaluate_bounds(&h, &bath, *jj)?));
    }

    Ok(EngineRun {
        l,
        omega_q,
        rates: *rates,
        populations: [p[0], p[1]],
        closed_form_populations: pops_cf,
        steady_residual: residual,
        first_law_residual: currents.first_law_residual(),
        power: -j[2],
        power_closed_form: -j_cf[2],
        closed_form_currents: j_cf,
        currents,
        efficiency_closed_form,
        efficiency_deficit,
        thermo,
        beta_weighted_current: beta_weighted,
        parallel_power: -lf * single[2],
        bounds,
    })
}

// ---------------------------------------------------------------------------
// Quantum battery

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    pub l: usize,
    pub e1: f64,
    pub e0: f64,
    pub em1: f64,
    pub beta_h0: f64,
    pub beta_c0: f64,
    /// Downward rates `gamma_down^(H)`, `gamma_down^(C)`.
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub xi_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryRun {
    pub params: BatteryParams,
    /// `beta_H omega_H`, `beta_C omega_C`
    pub beta_omega_h: f64,
    pub beta_omega_c: f64,
    pub rates_h: BathRates,
    pub rates_c: BathRates,
    /// Populations of `(|1>^L, |0>^L, |-1>^L)`.
    pub populations: [f64; 3],
    pub closed_form_populations: [f64; 3],
    pub steady_residual: f64,
    pub inversion: bool,
    pub ergotropy: f64,
    pub ergotropy_closed_form: f64,
    pub ergotropy_parallel: f64,
    pub charging_time_collective: f64,
    pub charging_time_parallel: f64,
    /// `t_parallel / t_collective`; with equal stored ergotropy this is the
    /// ratio of charging powers.
    pub charging_time_ratio: f64,
    /// Currents at the start of charging from `|-1>^L`.
    pub initial_currents: HeatCurrentRecord,
    pub bounds: Vec<(String, BoundReport)>,
    pub notes: Vec<String>,
}

/// Fraction of the initial distance to the steady state that defines
/// "charged".
pub const CHARGING_FRACTION: f64 = 0.1;

pub fn battery_network(p: &BatteryParams, collective_factor: f64) -> Result<(RateNetwork, BathRates, BathRates)> {
    let bw_h = p.beta_h0 * (p.e0 - p.em1);
    let bw_c = p.beta_c0 * (p.e0 - p.e1);
    let rh = BathRates::new(p.gamma_h * (-bw_h).exp(), p.gamma_h)?;
    let rc = BathRates::new(p.gamma_c * (-bw_c).exp(), p.gamma_c)?;
    let k = collective_factor;
    // order (|1>, |0>, |-1>)
    let mh = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, -rh.down, rh.up, 0.0, rh.down, -rh.up]) * k;
    let mc = DMatrix::from_row_slice(3, 3, &[-rc.up, rc.down, 0.0, rc.up, -rc.down, 0.0, 0.0, 0.0, 0.0]) * k;
    let lf = p.l as f64;
    let net = RateNetwork::new(
        vec!["1".into(), "0".into(), "-1".into()],
        vec![lf * p.e1, lf * p.e0, lf * p.em1],
        vec![("H".into(), mh), ("C".into(), mc)],
    )?;
    Ok((net, rh, rc))
}

/// Closed-form steady-state ergotropy `L (a - b)(E_1 - E_-1) / (1 + a + b)`,
/// `a = e^{beta_C omega_C}`, `b = e^{beta_H omega_H}`; zero without inversion.
pub fn battery_ergotropy_closed_form(p: &BatteryParams) -> f64 {
    let a = (p.beta_c0 * (p.e0 - p.e1)).exp();
    let b = (p.beta_h0 * (p.e0 - p.em1)).exp();
    if a > b {
        p.l as f64 * (a - b) * (p.e1 - p.em1) / (1.0 + a + b)
    } else {
        0.0
    }
}

pub fn battery_steady_state(p: &BatteryParams) -> Result<BatteryRun> {
    if p.l == 0 {
        return Err(Error::invalid("L must be at least 1"));
    }
    if !(p.em1 < p.e1 && p.e1 < p.e0) {
        return Err(Error::invalid(format!(
            "battery levels need E_-1 < E_1 < E_0, got ({}, {}, {})",
            p.e1, p.e0, p.em1
        )));
    }
    check_nonnegative("beta_H0", p.beta_h0)?;
    check_nonnegative("beta_C0", p.beta_c0)?;
    check_positive("gamma_H", p.gamma_h)?;
    check_positive("gamma_C", p.gamma_c)?;
    let lf = p.l as f64;
    let (net, rh, rc) = battery_network(p, lf * lf)?;
    let (single, _, _) = battery_network(&BatteryParams { l: 1, ..*p }, 1.0)?;
    let ss = net.steady_state()?;
    let residual = net.derivative(&ss).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bw_h = p.beta_h0 * (p.e0 - p.em1);
    let bw_c = p.beta_c0 * (p.e0 - p.e1);
    let (a, b) = (bw_c.exp(), bw_h.exp());
    let z = 1.0 + a + b;
    let inversion = bw_h < bw_c;
    let mut notes = Vec::new();
    if !inversion {
        notes.push("no population inversion (beta_H omega_H >= beta_C omega_C): ergotropy vanishes".into());
    }
    notes.push("ergotropy evaluated on the span of |1>^L, |0>^L, |-1>^L".into());

    let h_sub = diag_operator(net.energies());
    let rho = DensityMatrix::from_populations(&ss)?;
    let erg = ergotropy(&h_sub, &rho)?.max(0.0);
    let single_ss = single.steady_state()?;
    let erg_single = ergotropy(&diag_operator(single.energies()), &DensityMatrix::from_populations(&single_ss)?)?.max(0.0);

    let start = [0.0, 0.0, 1.0];
    let t_coll = net.relaxation_time(&start, CHARGING_FRACTION)?;
    let t_par = single.relaxation_time(&start, CHARGING_FRACTION)?;
    let initial_currents = net.current_record(0.0, &start);

    // bounds on the three-state reduction at the start of charging
    let mut bounds = Vec::with_capacity(2);
    let pairs = [("H", 1usize, 2usize, rh, bw_h, p.e0 - p.em1), ("C", 1, 0, rc, bw_c, p.e0 - p.e1)];
    for ((name, i, j, r, bw, gap), current) in pairs.into_iter().zip(initial_currents.per_bath.iter().map(|x| x.1)) {
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(i, j)] = C64::new(lf, 0.0);
        m[(j, i)] = C64::new(lf, 0.0);
        let a_op = HermitianOperator::new(m)?;
        let beta = bw / (lf * gap);
        let model = with_xi(SpectralModel::flat_thermal(r.down, beta)?, p.xi_override)?;
        let bath = BathSpec::single(name, a_op, model)?;
        bounds.push((name.to_string(), evaluate_bounds(&h_sub, &bath, current)?));
    }

    Ok(BatteryRun {
        params: *p,
        beta_omega_h: bw_h,
        beta_omega_c: bw_c,
        rates_h: rh,
        rates_c: rc,
        populations: [ss[0], ss[1], ss[2]],
        closed_form_populations: [a / z, 1.0 / z, b / z],
        steady_residual: residual,
        inversion,
        ergotropy: erg,
        ergotropy_closed_form: battery_ergotropy_closed_form(p),
        ergotropy_parallel: lf * erg_single,
        charging_time_collective: t_coll,
        charging_time_parallel: t_par,
        charging_time_ratio: t_par / t_coll,
        initial_currents,
        bounds,
        notes,
    })
}

/// Basis index of `|j>^L` (`j` = 0, 1, 2 for `|1>, |0>, |-1>`) in `3^L`.
pub fn battery_uniform_index(l: usize, level: usize) -> usize {
    (0..l).fold(0, |acc, _| acc * 3 + level)
}

/// Energy eigenbasis index helper for callers building dense battery systems.
pub fn dense_eigen_current(system: &SystemSpec, rho: &DensityMatrix, engine: Engine) -> Result<Vec<f64>> {
    Generator::new(system, engine)?.heat_currents(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{battery_operators, site_sum, tensor_power};

    #[test]
    fn mbody_closed_form_examples() {
        assert_eq!(mbody_current_closed_form(4, 4, 0.5, 2.0).unwrap(), -64.0);
        assert_eq!(mbody_current_closed_form(4, 1, 1.0, 1.0).unwrap(), -4.0);
        assert_eq!(mbody_current_closed_form(1, 1, 1.0, 1.0).unwrap(), -1.0);
        assert!(mbody_current_closed_form(3, 4, 1.0, 1.0).is_err());
        let big = mbody_current_closed_form(80, 2, 1.0, 1.0).unwrap();
        let want = -(80.0f64 * 80.0 * 2.0) / 3160.0;
        assert!((big - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn mbody_simulation_examples() {
        let r = mbody_simulate(6, 6, 1.0, 1.0, 1.0).unwrap();
        assert!((r.current + 216.0).abs() < 1e-8 * 216.0);
        let r = mbody_simulate(6, 1, 1.3, 0.7, 0.5).unwrap();
        assert!((r.current + 6.0 * 1.3 * 0.7).abs() < 1e-8 * 6.0);
        let r = mbody_simulate(2, 2, 1.0, 1.0, 1.0).unwrap();
        assert!((r.current + 8.0).abs() < 1e-12);
        assert_eq!(r.parallel_current, -2.0);
        assert!(r.bounds.holds());
        assert!((r.bounds.saturation_ratio_1.unwrap() - 1.0).abs() < 1e-9);
        assert!(mbody_simulate(13, 1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn superradiance_examples() {
        assert_eq!(superradiance_closed_form(1, 1.0, 1.0).unwrap(), -1.0);
        assert_eq!(superradiance_closed_form(3, 1.0, 1.0).unwrap(), -4.0);
        assert_eq!(superradiance_closed_form(101, 1.0, 1.0).unwrap(), -2601.0);
        assert!(superradiance_closed_form(4, 1.0, 1.0).is_err());
        let r = superradiance_simulate(3, 1.0, 1.0, Backend::Ladder).unwrap();
        assert_eq!(r.current, -4.0);
        assert!(r.bounds.holds());
        let l = 99;
        let r = superradiance_simulate(l, 1.0, 1.0, Backend::Ladder).unwrap();
        let want = 100.0 * 100.0 / (4.0 * 99.0 * 99.0);
        assert!((r.bounds.saturation_ratio_2.unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn superradiance_dense_matches_ladder() {
        for l in [1, 3, 5, 7] {
            let lad = superradiance_simulate(l, 1.2, 0.8, Backend::Ladder).unwrap();
            let den = superradiance_simulate(l, 1.2, 0.8, Backend::Dense).unwrap();
            assert!((lad.current - den.current).abs() <= 1e-9 * lad.current.abs(), "L={l}");
            assert!((lad.bounds.bound1 - den.bounds.bound1).abs() <= 1e-9 * lad.bounds.bound1);
            assert!((lad.bounds.bound2 - den.bounds.bound2).abs() <= 1e-9 * lad.bounds.bound2);
        }
    }

    #[test]
    fn superradiance_cascade_energy() {
        let l = 7;
        let r = superradiance_run(&SuperradianceParams {
            l,
            gamma0: 1.0,
            omega_q: 1.0,
            backend: Backend::Ladder,
            xi_override: None,
            cascade: Some(CascadeSpec {
                dt: 1e-3,
                t_final: 5.0,
                record_every: 100,
            }),
        })
        .unwrap();
        assert!((r.emitted_energy.unwrap() - (l as f64 + 1.0) / 2.0).abs() < 1e-6);
        for p in r.cascade.as_ref().unwrap() {
            assert!((p.ladder.populations().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn superabsorption_examples() {
        let r = superabsorption_bound_analysis(5, 0.1, 1.0, 1.0).unwrap();
        assert!((r.delta_e - 1.4).abs() < 1e-10);
        assert!((r.absorption_current - 9.0).abs() < 1e-10);
        assert!(r.bounds.holds());
        let r = superabsorption_bound_analysis(5, 0.0, 1.0, 1.0).unwrap();
        assert!((r.delta_e - 1.0).abs() < 1e-12);
        for l in [3, 7, 11] {
            let r = superabsorption_bound_analysis(l, 0.9, 1.0, 0.7).unwrap();
            assert!(r.relative_error < 1e-10, "L={l}");
            assert!((r.delta_e - r.delta_e_closed_form).abs() < 1e-10);
        }
    }

    #[test]
    fn engine_examples() {
        let eq = BathRates::new(0.5, 0.5).unwrap();
        let r = heat_engine_steady_state(&EngineRates::new(eq, eq, eq), 1.0, 3).unwrap();
        assert!(r.power.abs() < 1e-12);

        let rates = EngineRates::new(
            BathRates::new(0.8, 0.2).unwrap(),
            BathRates::new(0.1, 0.9).unwrap(),
            BathRates::new(0.6, 0.4).unwrap(),
        );
        let r = heat_engine_steady_state(&rates, 1.0, 4).unwrap();
        assert!((r.power - r.power_closed_form).abs() <= 1e-12 * r.power_closed_form.abs());
        // Gamma_up = Gamma_down = 1.5: P = -64 (0.6*1.5 - 0.4*1.5)/3
        assert!((r.power_closed_form + 6.4).abs() < 1e-12);
        assert!(r.first_law_residual <= 1e-12);
        for (p, q) in r.populations.iter().zip(r.closed_form_populations) {
            assert!((p - q).abs() < 1e-12);
        }
        for (_, b) in &r.bounds {
            assert!(b.holds());
        }
    }

    #[test]
    fn engine_power_scales_cubically() {
        let rates = EngineRates::thermal([1.0, 0.7, 0.4], [0.5, 2.0, 1e-3], 1.0).unwrap();
        let p2 = heat_engine_steady_state(&rates, 1.0, 2).unwrap().power;
        let p32 = heat_engine_steady_state(&rates, 1.0, 32).unwrap().power;
        assert!((p32 / p2 - 4096.0).abs() < 1e-9 * 4096.0);
    }

    #[test]
    fn engine_second_law_with_thermal_rates() {
        let rates = EngineRates::thermal([1.0, 0.7, 0.4], [0.5, 2.0, 1e-3], 1.3).unwrap();
        for l in [1, 2, 5] {
            let r = heat_engine_steady_state(&rates, 1.3, l).unwrap();
            assert!(r.beta_weighted_current.unwrap() <= 1e-12);
        }
    }

    fn engine_dense_currents(rates: &EngineRates, gammas: [f64; 3], betas0: [f64; 3], omega_q: f64, l: usize, g: f64) -> Vec<f64> {
        let h = HermitianOperator::new(collective_j(CollectiveAxis::Z, l).unwrap().scale_real(omega_q)).unwrap();
        let baths = ENGINE_BATHS
            .iter()
            .zip(gammas.iter().zip(betas0))
            .map(|(name, (gam, b0))| {
                let model = SpectralModel::flat_thermal(gam / (g * g), b0 / l as f64).unwrap();
                BathSpec::single(*name, m_body_noise(l, l, g).unwrap(), model).unwrap()
            })
            .collect();
        let sys = SystemSpec::new(h, baths).unwrap();
        let net = engine_network(rates, omega_q, l).unwrap();
        let p = net.steady_state().unwrap();
        let mut pops = vec![0.0; 1 << l];
        pops[0] = p[0];
        pops[(1 << l) - 1] = p[1];
        let rho = DensityMatrix::from_populations(&pops).unwrap();
        dense_eigen_current(&sys, &rho, Engine::Gksl).unwrap()
    }

    #[test]
    fn engine_matches_dense_gksl() {
        let gammas = [1.0, 0.7, 0.4];
        let betas0 = [0.5, 2.0, 1e-3];
        let omega_q = 1.1;
        let rates = EngineRates::thermal(gammas, betas0, omega_q).unwrap();
        for l in 1..=6 {
            let dense = engine_dense_currents(&rates, gammas, betas0, omega_q, l, 0.6);
            let r = heat_engine_steady_state(&rates, omega_q, l).unwrap();
            for (d, (_, j)) in dense.iter().zip(&r.currents.per_bath) {
                assert!((d - j).abs() <= 1e-10 * r.currents.max_abs(), "L={l}: {d} vs {j}");
            }
        }
    }

    fn battery_params(l: usize) -> BatteryParams {
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

    #[test]
    fn battery_examples() {
        // beta_C omega_C = 2, beta_H omega_H = 1, E_1 - E_-1 = 1
        let p = BatteryParams { l: 5, ..battery_params(5) };
        let r = battery_steady_state(&p).unwrap();
        assert!((r.beta_omega_c - 2.0).abs() < 1e-15 && (r.beta_omega_h - 1.0).abs() < 1e-15);
        assert!((r.ergotropy - r.ergotropy_closed_form).abs() < 1e-12);
        assert!((r.ergotropy - 2.1026).abs() < 1e-4);
        assert!((r.ergotropy_parallel - r.ergotropy).abs() < 1e-12);
        for (x, y) in r.populations.iter().zip(r.closed_form_populations) {
            assert!((x - y).abs() < 1e-12);
        }
        for (_, b) in &r.bounds {
            assert!(b.holds());
        }

        let flat = BatteryParams {
            beta_c0: 1.0,
            beta_h0: 0.5,
            ..battery_params(3)
        };
        let r = battery_steady_state(&flat).unwrap();
        assert!(!r.inversion);
        assert!(r.ergotropy.abs() < 1e-12);
        assert_eq!(r.ergotropy_closed_form, 0.0);
    }

    #[test]
    fn battery_charging_is_l_squared_faster() {
        let r1 = battery_steady_state(&battery_params(1)).unwrap();
        let r8 = battery_steady_state(&battery_params(8)).unwrap();
        assert!((r1.charging_time_collective / r8.charging_time_collective - 64.0).abs() < 1e-6);
        assert!((r8.charging_time_ratio - 64.0).abs() < 1e-6);
    }

    #[test]
    fn battery_matches_dense_gksl() {
        let g = 0.7;
        for l in [1, 2, 3] {
            let p = battery_params(l);
            let ops = battery_operators(p.e1, p.e0, p.em1).unwrap();
            let h = HermitianOperator::new(site_sum(ops.hamiltonian.matrix(), l)).unwrap();
            let lg = l as f64 * g;
            let a_h = HermitianOperator::new(tensor_power(ops.sigma_minus_x.matrix(), l).scale_real(lg)).unwrap();
            let a_c = HermitianOperator::new(tensor_power(ops.sigma_plus_x.matrix(), l).scale_real(lg)).unwrap();
            let lf = l as f64;
            let mh = SpectralModel::flat_thermal(p.gamma_h / (g * g), p.beta_h0 / lf).unwrap();
            let mc = SpectralModel::flat_thermal(p.gamma_c / (g * g), p.beta_c0 / lf).unwrap();
            let sys = SystemSpec::new(
                h,
                vec![
                    BathSpec::single("H", a_h, mh).unwrap(),
                    BathSpec::single("C", a_c, mc).unwrap(),
                ],
            )
            .unwrap();
            let (net, _, _) = battery_network(&p, lf * lf).unwrap();
            let dim = 3usize.pow(l as u32);
            for probe in [[0.0, 0.0, 1.0], [0.2, 0.5, 0.3]] {
                let mut pops = vec![0.0; dim];
                for (level, x) in probe.iter().enumerate() {
                    pops[battery_uniform_index(l, level)] = *x;
                }
                let rho = DensityMatrix::from_populations(&pops).unwrap();
                let dense = dense_eigen_current(&sys, &rho, Engine::Gksl).unwrap();
                let want = net.currents(&probe);
                for (d, w) in dense.iter().zip(&want) {
                    assert!((d - w).abs() <= 1e-10 * w.abs().max(1.0), "L={l}: {d} vs {w}");
                }
            }
        }
    }

    #[test]
    fn rate_network_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.5, 0.0]);
        assert!(RateNetwork::new(vec!["a".into(), "b".into()], vec![0.0, 1.0], vec![("x".into(), bad)]).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        assert!(RateNetwork::new(vec!["a".into(), "b".into()], vec![0.0, 1.0], vec![("x".into(), neg)]).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 1.0, -2.0]);
        let net = RateNetwork::new(vec!["a".into(), "b".into()], vec![0.0, 1.0], vec![("x".into(), ok)]).unwrap();
        let ss = net.steady_state().unwrap();
        assert!((ss[0] - 2.0 / 3.0).abs() < 1e-15);
        let t = net.relaxation_time(&[0.0, 1.0], 0.1).unwrap();
        assert!((t - 10f64.ln() / 3.0).abs() < 1e-12);
    }
}
