//! Master-equation engines: secular (Bohr-frequency) decomposition of noise
//! operators, the Redfield and GKSL dissipators, time evolution, and the
//! population dynamics on the maximal-`l` Dicke ladder.
//!
//! All dissipators work in the eigenbasis of the system Hamiltonian, where
//! every Bohr component `A_omega` is a sparse matrix; states are transformed in
//! and out once per call. The Lamb shift is dropped: the one-sided transform
//! of the correlation function is `Gamma(omega) = gamma(omega) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{
    evolve_rk4_with, hermitian_eig, rk4_step, step_grid, ComplexMatrix, DensityMatrix, EnergyBasis,
    HermitianOperator, Rk4Config, SparseMatrix, Trajectory, TrajectoryPoint, C64,
    DEFAULT_DEGENERACY_TOLERANCE,
};
use crate::operators::{ladder_coefficient_sq, DickeIndex, LadderSign};
use crate::spectral::{SpectralModel, SystemSpec};

/// Bohr frequencies are binned with `DEFAULT_FREQUENCY_TOLERANCE * |H|`.
pub const DEFAULT_FREQUENCY_TOLERANCE: f64 = 1e-9;

/// Eigenbasis matrix elements below this fraction of `max |A|` are rounding
/// residue of the basis change and are dropped.
const NUMERICAL_ZERO: f64 = 1e-14;

/// Frequencies merged into one bin although they differ by more than rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMerge {
    pub frequency: f64,
    pub spread: f64,
}

/// `A = sum_omega A_omega` with `[H, A_omega] = -omega A_omega`, stored in the
/// energy eigenbasis. The frequency `0` is always present, possibly empty.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpDecomposition {
    frequencies: Vec<f64>,
    components: Vec<SparseMatrix>,
    operator: SparseMatrix,
    frequency_bin_tolerance: f64,
    merges: Vec<FrequencyMerge>,
}

impl JumpDecomposition {
    /// Sorted ascending.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// `A_omega` in the energy eigenbasis, aligned with [`Self::frequencies`].
    pub fn components(&self) -> &[SparseMatrix] {
        &self.components
    }

    /// The decomposed operator in the energy eigenbasis.
    pub fn operator(&self) -> &SparseMatrix {
        &self.operator
    }

    pub fn frequency_bin_tolerance(&self) -> f64 {
        self.frequency_bin_tolerance
    }

    pub fn merges(&self) -> &[FrequencyMerge] {
        &self.merges
    }

    /// Frequencies whose component has at least one entry.
    pub fn active_frequencies(&self) -> Vec<f64> {
        self.frequencies
            .iter()
            .zip(&self.components)
            .filter(|(_, c)| c.nnz() > 0)
            .map(|(w, _)| *w)
            .collect()
    }

    /// Bin index of `omega`, if a bin lies within the tolerance.
    pub fn find(&self, omega: f64) -> Option<usize> {
        let tol = self.frequency_bin_tolerance.max(f64::EPSILON * omega.abs());
        self.frequencies.iter().position(|w| (w - omega).abs() <= tol)
    }

    /// `A_omega` in the original basis.
    pub fn component_in(&self, basis: &EnergyBasis, index: usize) -> ComplexMatrix {
        basis.from_eigenbasis(&self.components[index].to_dense())
    }
}

pub fn default_frequency_tolerance(basis: &EnergyBasis) -> f64 {
    let scale = basis.eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    DEFAULT_FREQUENCY_TOLERANCE * scale
}

/// Splits `a` into Bohr-frequency components of the Hamiltonian whose
/// eigenbasis is `basis`. Element `(i, j)` carries `omega = E_j - E_i`.
pub fn secular_decompose(
    a: &HermitianOperator,
    basis: &EnergyBasis,
    freq_tol: f64,
) -> Result<JumpDecomposition> {
    let n = basis.dim();
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "noise operator vs energy basis",
            expected: n,
            found: a.dim(),
        });
    }
    if !(freq_tol >= 0.0) {
        return Err(Error::invalid(format!("frequency tolerance must be nonnegative, got {freq_tol}")));
    }
    let energies = basis.eigenvalues();
    let a_e = basis.to_eigenbasis(a.matrix());
    let cut = NUMERICAL_ZERO * a_e.max_abs();

    let snap = |w: f64| if w.abs() <= freq_tol { 0.0 } else { w };
    let mut entries = Vec::new();
    for i in 0..n {
        for (j, &v) in a_e.row(i).iter().enumerate() {
            if v.norm() > cut {
                entries.push((i, j, v, snap(energies[j] - energies[i])));
            }
        }
    }

    let mut values: Vec<f64> = entries.iter().map(|e| e.3).collect();
    values.push(0.0);
    values.sort_by(f64::total_cmp);
    values.dedup();

    // single-linkage clusters of consecutive values within the tolerance
    let mut cluster_of = vec![0usize; values.len()];
    let mut bounds: Vec<(f64, f64)> = vec![(values[0], values[0])];
    for k in 1..values.len() {
        if values[k] - values[k - 1] > freq_tol {
            bounds.push((values[k], values[k]));
        } else {
            bounds.last_mut().unwrap().1 = values[k];
        }
        cluster_of[k] = bounds.len() - 1;
    }
    let mut merges = Vec::new();
    let frequencies: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| {
            let spread = hi - lo;
            if spread > 1e-3 * freq_tol && spread > 0.0 {
                merges.push(FrequencyMerge {
                    frequency: 0.5 * (lo + hi),
                    spread,
                });
            }
            if lo <= 0.0 && hi >= 0.0 {
                0.0
            } else {
                0.5 * (lo + hi)
            }
        })
        .collect();

    let mut triplets: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); frequencies.len()];
    let mut all = Vec::with_capacity(entries.len());
    for (i, j, v, w) in entries {
        let k = values.binary_search_by(|x| x.total_cmp(&w)).expect("value present");
        triplets[cluster_of[k]].push((i, j, v));
        all.push((i, j, v));
    }
    Ok(JumpDecomposition {
        frequencies,
        components: triplets
            .into_iter()
            .map(|t| SparseMatrix::from_triplets(n, n, t))
            .collect(),
        operator: SparseMatrix::from_triplets(n, n, all),
        frequency_bin_tolerance: freq_tol,
        merges,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Redfield,
    Gksl,
}

#[derive(Clone, Debug)]
struct PreparedChannel {
    decomposition: JumpDecomposition,
    /// Redfield: `sum_omega Gamma(omega) A_omega`
    a_tilde: Option<SparseMatrix>,
    /// GKSL: `(gamma, A_omega, A_omega^dag)` for every positive rate
    jumps: Vec<(f64, SparseMatrix, SparseMatrix)>,
    /// GKSL: `sum_omega gamma(omega) A_omega^dag A_omega`
    k: Option<SparseMatrix>,
}

#[derive(Clone, Debug)]
struct PreparedBath {
    label: String,
    beta: f64,
    channels: Vec<PreparedChannel>,
}

/// A system prepared for repeated dissipator evaluation with one engine.
#[derive(Clone, Debug)]
pub struct Generator {
    engine: Engine,
    basis: EnergyBasis,
    baths: Vec<PreparedBath>,
}

fn prepare_channel(
    engine: Engine,
    decomposition: JumpDecomposition,
    model: &SpectralModel,
) -> PreparedChannel {
    let n = decomposition.operator.rows();
    match engine {
        Engine::Redfield => {
            let triplets = decomposition
                .frequencies
                .iter()
                .zip(&decomposition.components)
                .flat_map(|(&w, c)| {
                    let g = 0.5 * model.rate(w);
                    c.iter().map(move |(i, j, v)| (i, j, v * g))
                })
                .filter(|t| t.2 != C64::new(0.0, 0.0))
                .collect();
            PreparedChannel {
                a_tilde: Some(SparseMatrix::from_triplets(n, n, triplets)),
                jumps: Vec::new(),
                k: None,
                decomposition,
            }
        }
        Engine::Gksl => {
            let mut jumps = Vec::new();
            let mut k_triplets = Vec::new();
            for (&w, c) in decomposition.frequencies.iter().zip(&decomposition.components) {
                let g = model.rate(w);
                if g > 0.0 && c.nnz() > 0 {
                    let adj = c.adjoint();
                    let ata = adj.mul_sparse(c);
                    k_triplets.extend(ata.iter().map(|(i, j, v)| (i, j, v * g)));
                    jumps.push((g, c.clone(), adj));
                }
            }
            PreparedChannel {
                a_tilde: None,
                jumps,
                k: Some(SparseMatrix::from_triplets(n, n, k_triplets)),
                decomposition,
            }
        }
    }
}

impl Generator {
    pub fn new(system: &SystemSpec, engine: Engine) -> Result<Self> {
        let basis = hermitian_eig(system.hamiltonian(), DEFAULT_DEGENERACY_TOLERANCE);
        let tol = default_frequency_tolerance(&basis);
        Self::with_basis(system, engine, basis, tol)
    }

    pub fn with_frequency_tolerance(system: &SystemSpec, engine: Engine, freq_tol: f64) -> Result<Self> {
        let basis = hermitian_eig(system.hamiltonian(), DEFAULT_DEGENERACY_TOLERANCE);
        Self::with_basis(system, engine, basis, freq_tol)
    }

    fn with_basis(system: &SystemSpec, engine: Engine, basis: EnergyBasis, freq_tol: f64) -> Result<Self> {
        let mut baths = Vec::with_capacity(system.baths().len());
        for bath in system.baths() {
            let mut channels = Vec::with_capacity(bath.channels().len());
            for ch in bath.channels() {
                let dec = secular_decompose(&ch.operator, &basis, freq_tol)?;
                channels.push(prepare_channel(engine, dec, &ch.model));
            }
            baths.push(PreparedBath {
                label: bath.label().to_string(),
                beta: bath.beta(),
                channels,
            });
        }
        Ok(Self { engine, basis, baths })
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn basis(&self) -> &EnergyBasis {
        &self.basis
    }

    pub fn energies(&self) -> &[f64] {
        self.basis.eigenvalues()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn bath_count(&self) -> usize {
        self.baths.len()
    }

    pub fn bath_label(&self, bath: usize) -> &str {
        &self.baths[bath].label
    }

    pub fn bath_beta(&self, bath: usize) -> f64 {
        self.baths[bath].beta
    }

    pub fn decomposition(&self, bath: usize, channel: usize) -> &JumpDecomposition {
        &self.baths[bath].channels[channel].decomposition
    }

    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.basis.to_eigenbasis(m)
    }

    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.basis.from_eigenbasis(m)
    }

    fn check_bath(&self, bath: usize) -> Result<()> {
        if bath >= self.baths.len() {
            return Err(Error::invalid(format!(
                "bath index {bath} out of range ({} baths)",
                self.baths.len()
            )));
        }
        Ok(())
    }

    fn check_dim(&self, m: &ComplexMatrix) -> Result<()> {
        if m.rows() != self.dim() || m.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "state vs Hamiltonian",
                expected: self.dim(),
                found: m.rows(),
            });
        }
        Ok(())
    }

    /// `D_a[rho]` with `rho` and the result in the energy eigenbasis.
    pub fn dissipator_eigen(&self, bath: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let mut d = ComplexMatrix::zeros(n, n);
        for ch in &self.baths[bath].channels {
            match self.engine {
                Engine::Redfield => {
                    let a = &ch.decomposition.operator;
                    let x = ch.a_tilde.as_ref().expect("redfield channel").mul_dense(rho);
                    let mut y = a.left_mul_dense(&x);
                    y -= &a.mul_dense(&x);
                    d += &y;
                    d += &y.adjoint();
                }
                Engine::Gksl => {
                    for (g, a, adj) in &ch.jumps {
                        let t = a.mul_dense(rho);
                        d.axpy(C64::new(*g, 0.0), &adj.left_mul_dense(&t));
                    }
                    let k = ch.k.as_ref().expect("gksl channel");
                    let half = C64::new(-0.5, 0.0);
                    d.axpy(half, &k.mul_dense(rho));
                    d.axpy(half, &k.left_mul_dense(rho));
                }
            }
        }
        d
    }

    /// `D_a[rho]` in the original basis.
    pub fn dissipator(&self, bath: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_bath(bath)?;
        self.check_dim(rho)?;
        let rho_e = self.basis.to_eigenbasis(rho);
        Ok(self.basis.from_eigenbasis(&self.dissipator_eigen(bath, &rho_e)))
    }

    /// `-i[H, rho] + sum_a D_a[rho]`, eigenbasis in and out.
    pub fn derivative_eigen(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let e = self.energies();
        let mut d = ComplexMatrix::from_fn(rho.rows(), rho.cols(), |i, j| {
            rho[(i, j)] * C64::new(0.0, -(e[i] - e[j]))
        });
        for bath in 0..self.baths.len() {
            d += &self.dissipator_eigen(bath, rho);
        }
        d
    }

    pub fn derivative(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(rho)?;
        let rho_e = self.basis.to_eigenbasis(rho);
        Ok(self.basis.from_eigenbasis(&self.derivative_eigen(&rho_e)))
    }

    /// `Re Tr(H D)` for an eigenbasis dissipator output.
    pub fn energy_flow_eigen(&self, d: &ComplexMatrix) -> f64 {
        self.energies()
            .iter()
            .enumerate()
            .map(|(i, e)| e * d[(i, i)].re)
            .sum()
    }

    /// Per-bath heat currents for an eigenbasis state.
    pub fn heat_currents_eigen(&self, rho: &ComplexMatrix) -> Vec<f64> {
        (0..self.baths.len())
            .map(|b| self.energy_flow_eigen(&self.dissipator_eigen(b, rho)))
            .collect()
    }

    pub fn heat_currents(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.check_dim(rho.matrix())?;
        Ok(self.heat_currents_eigen(&self.basis.to_eigenbasis(rho.matrix())))
    }

    /// RK4 evolution; integrates in the eigenbasis and returns states in the
    /// original basis.
    pub fn evolve(&self, rho0: &DensityMatrix, config: &Rk4Config) -> Result<Trajectory> {
        self.check_dim(rho0.matrix())?;
        let tol = config.positivity_tolerance;
        let start = DensityMatrix::new_unchecked(self.basis.to_eigenbasis(rho0.matrix()).hermitian_part(), tol);
        let traj = evolve_rk4_with(|r| self.derivative_eigen(r), &start, config)?;
        Ok(traj
            .into_iter()
            .map(|p| TrajectoryPoint {
                time: p.time,
                state: DensityMatrix::new_unchecked(self.basis.from_eigenbasis(p.state.matrix()).hermitian_part(), tol),
            })
            .collect())
    }
}

/// `D_a[rho]` of the Redfield equation in the original basis.
pub fn redfield_dissipator(system: &SystemSpec, bath_index: usize, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    system.bath(bath_index)?;
    Generator::new(system, Engine::Redfield)?.dissipator(bath_index, rho.matrix())
}

/// `D_a[rho]` of the secular GKSL equation in the original basis.
pub fn gksl_dissipator(system: &SystemSpec, bath_index: usize, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    system.bath(bath_index)?;
    Generator::new(system, Engine::Gksl)?.dissipator(bath_index, rho.matrix())
}

pub fn evolve(
    system: &SystemSpec,
    rho0: &DensityMatrix,
    dt: f64,
    t_final: f64,
    engine: Engine,
) -> Result<Trajectory> {
    evolve_with(system, rho0, &Rk4Config::new(dt, t_final), engine)
}

pub fn evolve_with(system: &SystemSpec, rho0: &DensityMatrix, config: &Rk4Config, engine: Engine) -> Result<Trajectory> {
    Generator::new(system, engine)?.evolve(rho0, config)
}

/// Populations on `|L/2>, |L/2 - 1>, ..., |-L/2>` under `H = omega_q J_z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeLadder {
    particles: usize,
    populations: Vec<f64>,
    omega_q: f64,
}

impl DickeLadder {
    pub fn new(particles: usize, populations: Vec<f64>, omega_q: f64) -> Result<Self> {
        if particles == 0 {
            return Err(Error::invalid("particle count must be at least 1"));
        }
        if populations.len() != particles + 1 {
            return Err(Error::DimensionMismatch {
                context: "ladder populations",
                expected: particles + 1,
                found: populations.len(),
            });
        }
        if let Some(p) = populations.iter().find(|p| !(**p >= -1e-12) || !p.is_finite()) {
            return Err(Error::InvalidDensity(format!("ladder population {p}")));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("ladder populations sum to {total}")));
        }
        Ok(Self {
            particles,
            populations,
            omega_q,
        })
    }

    /// All weight on one Dicke state.
    pub fn dicke(index: DickeIndex, omega_q: f64) -> Self {
        let mut p = vec![0.0; index.particles() + 1];
        p[index.ladder_position()] = 1.0;
        Self {
            particles: index.particles(),
            populations: p,
            omega_q,
        }
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn omega_q(&self) -> f64 {
        self.omega_q
    }

    /// `E_m = m omega_q` in ladder order.
    pub fn energies(&self) -> Vec<f64> {
        (0..=self.particles)
            .map(|p| 0.5 * (self.particles as f64 - 2.0 * p as f64) * self.omega_q)
            .collect()
    }

    pub fn energy(&self) -> f64 {
        self.energies().iter().zip(&self.populations).map(|(e, p)| e * p).sum()
    }

    fn twice_m(&self, position: usize) -> i64 {
        self.particles as i64 - 2 * position as i64
    }

    /// Net downward flow across each rung `m -> m - 1`.
    fn rung_flows(&self, gamma_down: f64, gamma_up: f64) -> Vec<f64> {
        (0..self.particles)
            .map(|p| {
                let c2 = ladder_coefficient_sq(self.particles, self.twice_m(p), LadderSign::Lower);
                c2 * (gamma_down * self.populations[p] - gamma_up * self.populations[p + 1])
            })
            .collect()
    }
}

/// Population rate equations of the collective ladder:
/// `dp_m = gd [C2_{m+1,-} p_{m+1} - C2_{m,-} p_m] + gu [C2_{m-1,+} p_{m-1} - C2_{m,+} p_m]`.
pub fn ladder_derivative(ladder: &DickeLadder, gamma_down: f64, gamma_up: f64) -> Result<Vec<f64>> {
    check_rates(gamma_down, gamma_up)?;
    let mut dp = vec![0.0; ladder.populations.len()];
    for (p, f) in ladder.rung_flows(gamma_down, gamma_up).into_iter().enumerate() {
        dp[p] -= f;
        dp[p + 1] += f;
    }
    Ok(dp)
}

/// `sum_m E_m dp_m / dt`, accumulated rung by rung.
pub fn ladder_heat_current(ladder: &DickeLadder, gamma_down: f64, gamma_up: f64) -> Result<f64> {
    check_rates(gamma_down, gamma_up)?;
    let flows = ladder.rung_flows(gamma_down, gamma_up);
    Ok(-ladder.omega_q * flows.iter().sum::<f64>())
}

fn check_rates(gamma_down: f64, gamma_up: f64) -> Result<()> {
    if !(gamma_down >= 0.0) || !(gamma_up >= 0.0) {
        return Err(Error::invalid(format!(
            "ladder rates must be nonnegative, got ({gamma_down}, {gamma_up})"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub time: f64,
    pub ladder: DickeLadder,
    pub heat_current: f64,
}

/// RK4 integration of the ladder rate equations.
pub fn evolve_ladder(
    ladder: &DickeLadder,
    gamma_down: f64,
    gamma_up: f64,
    dt: f64,
    t_final: f64,
    record_every: usize,
) -> Result<Vec<LadderPoint>> {
    check_rates(gamma_down, gamma_up)?;
    let (steps, h) = step_grid(dt, t_final)?;
    let record_every = record_every.max(1);
    let point = |time: f64, l: DickeLadder| -> Result<LadderPoint> {
        let heat_current = ladder_heat_current(&l, gamma_down, gamma_up)?;
        Ok(LadderPoint {
            time,
            ladder: l,
            heat_current,
        })
    };
    let mut out = vec![point(0.0, ladder.clone())?];
    let mut state = ladder.clone();
    let f = |p: &Vec<f64>| {
        let l = DickeLadder {
            particles: ladder.particles,
            populations: p.clone(),
            omega_q: ladder.omega_q,
        };
        ladder_derivative(&l, gamma_down, gamma_up).expect("rates checked")
    };
    for step in 1..=steps {
        let next = rk4_step(&f, &state.populations, h);
        let time = if step == steps { t_final } else { step as f64 * h };
        state = DickeLadder::new(state.particles, next, state.omega_q).map_err(|e| match e {
            Error::InvalidDensity(msg) => Error::InvalidDensity(format!("{msg} at t = {time}")),
            other => other,
        })?;
        if step % record_every == 0 || step == steps {
            out.push(point(time, state.clone())?);
        }
    }
    Ok(out)
}
