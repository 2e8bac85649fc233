//! Thermodynamic observables: heat currents, von Neumann entropy, entropy
//! production, efficiency and coefficient of performance, ergotropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{hermitian_eig, ComplexMatrix, DensityMatrix, HermitianOperator, DEFAULT_DEGENERACY_TOLERANCE};

/// Eigenvalues of `rho` below this are treated as zero in `ln rho`.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Currents smaller than this in magnitude count as zero for regime detection.
pub const REGIME_DEAD_BAND: f64 = 1e-15;

/// Per-bath heat currents at one time; `total` is their sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatCurrentRecord {
    pub time: f64,
    pub per_bath: Vec<(String, f64)>,
    pub total: f64,
}

impl HeatCurrentRecord {
    pub fn new(time: f64, per_bath: Vec<(String, f64)>) -> Self {
        let total = per_bath.iter().map(|(_, j)| j).sum();
        Self { time, per_bath, total }
    }

    /// `|total - sum_a J_a|`
    pub fn additivity_residual(&self) -> f64 {
        (self.total - self.per_bath.iter().map(|(_, j)| j).sum::<f64>()).abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.per_bath.iter().fold(0.0, |m, (_, j)| m.max(j.abs()))
    }

    /// `|sum_a J_a| / max_a |J_a|`, zero when every current vanishes.
    pub fn first_law_residual(&self) -> f64 {
        first_law_residual(&self.per_bath.iter().map(|(_, j)| *j).collect::<Vec<_>>())
    }
}

pub fn first_law_residual(currents: &[f64]) -> f64 {
    let max = currents.iter().fold(0.0f64, |m, j| m.max(j.abs()));
    if max == 0.0 {
        0.0
    } else {
        currents.iter().sum::<f64>().abs() / max
    }
}

/// `J = Re Tr(H D)`.
pub fn heat_current(h: &HermitianOperator, dissipator_output: &ComplexMatrix) -> Result<f64> {
    if dissipator_output.rows() != h.dim() || dissipator_output.cols() != h.dim() {
        return Err(Error::DimensionMismatch {
            context: "heat current",
            expected: h.dim(),
            found: dissipator_output.rows(),
        });
    }
    let z = h.matrix().trace_product(dissipator_output);
    let scale = h.matrix().max_abs() * dissipator_output.max_abs() * h.dim() as f64;
    if z.im.abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::invalid(format!("Tr(H D) has imaginary part {:e}", z.im)));
    }
    Ok(z.re)
}

/// `S = -Tr rho ln rho` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let basis = hermitian_eig(rho.as_hermitian(), DEFAULT_DEGENERACY_TOLERANCE);
    let s: f64 = basis
        .eigenvalues()
        .iter()
        .filter(|&&p| p > ENTROPY_FLOOR)
        .map(|&p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// `dS/dt = -Tr(rho_dot ln rho)`, together with whether the logarithm floor
/// was needed (an eigenvalue below `1e-12` with nonzero `rho_dot` weight).
pub fn entropy_rate(rho: &DensityMatrix, rho_dot: &ComplexMatrix) -> Result<(f64, bool)> {
    if rho_dot.rows() != rho.dim() || rho_dot.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "entropy rate",
            expected: rho.dim(),
            found: rho_dot.rows(),
        });
    }
    let basis = hermitian_eig(rho.as_hermitian(), DEFAULT_DEGENERACY_TOLERANCE);
    let dot_e = basis.to_eigenbasis(rho_dot);
    let scale = rho_dot.max_abs();
    let mut regularized = false;
    let mut rate = 0.0;
    for (i, &p) in basis.eigenvalues().iter().enumerate() {
        let w = dot_e[(i, i)].re;
        if p < 1e-12 && w.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE) {
            regularized = true;
        }
        rate -= w * p.max(ENTROPY_FLOOR).ln();
    }
    Ok((rate, regularized))
}

/// `beta J`, with `inf * 0 = 0`.
fn beta_times(beta: f64, current: f64) -> f64 {
    if current == 0.0 {
        0.0
    } else {
        beta * current
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyProduction {
    pub entropy_rate: f64,
    pub entropy_production: f64,
    pub regularized: bool,
}

/// `sigma_dot = dS/dt - sum_a beta_a J_a`.
pub fn entropy_production_rate(
    rho: &DensityMatrix,
    rho_dot: &ComplexMatrix,
    currents: &[f64],
    betas: &[f64],
) -> Result<EntropyProduction> {
    if currents.len() != betas.len() {
        return Err(Error::DimensionMismatch {
            context: "currents vs inverse temperatures",
            expected: betas.len(),
            found: currents.len(),
        });
    }
    let (ds, regularized) = entropy_rate(rho, rho_dot)?;
    let flux: f64 = currents.iter().zip(betas).map(|(j, b)| beta_times(*b, *j)).sum();
    Ok(EntropyProduction {
        entropy_rate: ds,
        entropy_production: ds - flux,
        regularized,
    })
}

/// `-sum_a beta_a J_a`: the steady-state entropy production.
pub fn steady_entropy_production(currents: &[f64], betas: &[f64]) -> f64 {
    -currents.iter().zip(betas).map(|(j, b)| beta_times(*b, *j)).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Engine,
    Refrigerator,
    Other,
}

/// Efficiency and COP of a three-terminal (H, C, W) machine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub regime: Regime,
    pub efficiency: Option<f64>,
    pub cop: Option<f64>,
    pub carnot_efficiency: f64,
    pub carnot_cop: f64,
    pub entropy_rate: Option<f64>,
    pub entropy_production: Option<f64>,
    pub notes: Vec<String>,
}

/// Classifies the current signs and evaluates `eta = 1 + J_C/J_H` (engine) or
/// `eps = J_C/J_W` (refrigerator) with their Carnot limits.
pub fn efficiency_and_cop(j_h: f64, j_c: f64, j_w: f64, beta_h: f64, beta_c: f64) -> ThermoReport {
    let nonneg = |x: f64| x >= -REGIME_DEAD_BAND;
    let nonpos = |x: f64| x <= REGIME_DEAD_BAND;
    let carnot_efficiency = 1.0 - beta_h / beta_c;
    let carnot_cop = beta_h / (beta_c - beta_h);
    let mut notes = Vec::new();
    let mut efficiency = None;
    let mut cop = None;
    let all_zero = [j_h, j_c, j_w].iter().all(|j| j.abs() <= REGIME_DEAD_BAND);
    let regime = if !all_zero && nonneg(j_h) && nonpos(j_c) && nonpos(j_w) {
        if j_h.abs() < REGIME_DEAD_BAND {
            notes.push("efficiency undefined: J_H vanishes".to_string());
        } else {
            let eta = 1.0 + j_c / j_h;
            if eta > carnot_efficiency + 1e-12 {
                notes.push(format!(
                    "regime inconsistency: efficiency {eta} exceeds the Carnot value {carnot_efficiency}"
                ));
            }
            efficiency = Some(eta);
        }
        Regime::Engine
    } else if !all_zero && nonpos(j_h) && nonneg(j_c) && nonneg(j_w) {
        if j_w.abs() < REGIME_DEAD_BAND {
            notes.push("COP undefined: J_W vanishes".to_string());
        } else {
            cop = Some(j_c / j_w);
        }
        Regime::Refrigerator
    } else {
        notes.push("currents match neither the engine nor the refrigerator sign pattern".to_string());
        Regime::Other
    };
    ThermoReport {
        regime,
        efficiency,
        cop,
        carnot_efficiency,
        carnot_cop,
        entropy_rate: None,
        entropy_production: None,
        notes,
    }
}

/// `Tr(H rho)` minus the energy of the passive state (eigenvalues of `rho`
/// descending paired with energies ascending).
pub fn ergotropy(h: &HermitianOperator, rho: &DensityMatrix) -> Result<f64> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "ergotropy",
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    let energies = hermitian_eig(h, DEFAULT_DEGENERACY_TOLERANCE);
    let pops = hermitian_eig(rho.as_hermitian(), DEFAULT_DEGENERACY_TOLERANCE);
    let passive: f64 = energies
        .eigenvalues()
        .iter()
        .zip(pops.eigenvalues().iter().rev())
        .map(|(e, p)| e * p)
        .sum();
    let energy = h.matrix().trace_product(rho.matrix()).re;
    Ok(energy - passive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::{evolve_with, Engine, Generator};
    use crate::numcore::{Rk4Config, C64};
    use crate::operators::{pauli, Axis};
    use crate::spectral::{BathSpec, SpectralModel, SystemSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heat_current_examples() {
        let h = HermitianOperator::from_real_diagonal(&[0.5, -0.5]);
        assert_eq!(heat_current(&h, &ComplexMatrix::zeros(2, 2)).unwrap(), 0.0);
        let d = ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]);
        assert_eq!(heat_current(&h, &d).unwrap(), -1.0);
        assert!(heat_current(&h, &ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn qubit_current_oracle() {
        let (g, gamma0, wq) = (0.7, 1.4, 2.0);
        let h = pauli(Axis::Z, 1, 1).unwrap().scaled(0.5 * wq);
        let a = pauli(Axis::X, 1, 1).unwrap().scaled(g);
        let bath = BathSpec::single("C", a, SpectralModel::flat_zero_temperature(gamma0).unwrap()).unwrap();
        let sys = SystemSpec::new(h.clone(), vec![bath]).unwrap();
        let rho = DensityMatrix::basis_state(2, 0);
        let d = crate::master::redfield_dissipator(&sys, 0, &rho).unwrap();
        let j = heat_current(&h, &d).unwrap();
        assert!((j + g * g * gamma0 * wq).abs() < 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let s = 0.5f64.sqrt();
        let pure = DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(0.0, s)]).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((von_neumann_entropy(&mixed) - 4f64.ln()).abs() < 1e-14);
        let rho = DensityMatrix::from_populations(&[0.75, 0.25]).unwrap();
        let want = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert!((von_neumann_entropy(&rho) - want).abs() < 1e-15);
        assert!((want - 0.5623).abs() < 1e-4);
    }

    #[test]
    fn efficiency_examples() {
        let r = efficiency_and_cop(1.0, 0.0, -1.0, 1.0, 2.0);
        assert_eq!(r.regime, Regime::Engine);
        assert_eq!(r.efficiency, Some(1.0));
        assert!(r.notes.iter().any(|n| n.contains("inconsistency")));
        assert_eq!(r.carnot_efficiency, 0.5);
        assert_eq!(r.carnot_cop, 1.0);
        let r = efficiency_and_cop(1.0, -0.6, -0.4, 1.0, 2.0);
        assert!((r.efficiency.unwrap() - 0.4).abs() < 1e-15);
        assert!(r.notes.is_empty());
        let r = efficiency_and_cop(-1.0, 0.3, 0.7, 1.0, 2.0);
        assert_eq!(r.regime, Regime::Refrigerator);
        assert!((r.cop.unwrap() - 0.3 / 0.7).abs() < 1e-15);
        let r = efficiency_and_cop(1.0, 1.0, -2.0, 1.0, 2.0);
        assert_eq!(r.regime, Regime::Other);
        assert!(r.efficiency.is_none() && r.cop.is_none());
    }

    #[test]
    fn ergotropy_examples() {
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let rho = DensityMatrix::from_populations(&[0.3, 0.7]).unwrap();
        assert!((ergotropy(&h, &rho).unwrap() - 0.4).abs() < 1e-15);
        let beta = 0.7;
        let h = HermitianOperator::from_real_diagonal(&[0.3, -1.0, 2.0]);
        let w: Vec<f64> = [0.3f64, -1.0, 2.0].iter().map(|e| (-beta * e).exp()).collect();
        let z: f64 = w.iter().sum();
        let gibbs = DensityMatrix::from_populations(&w.iter().map(|x| x / z).collect::<Vec<_>>()).unwrap();
        assert!(ergotropy(&h, &gibbs).unwrap().abs() < 1e-14);
        let (a, b) = (2f64.exp(), 1f64.exp());
        let z = 1.0 + a + b;
        let h = HermitianOperator::from_real_diagonal(&[5.0 * 1.0, 5.0 * 2.0, 0.0]);
        let rho = DensityMatrix::from_populations(&[a / z, 1.0 / z, b / z]).unwrap();
        let e = ergotropy(&h, &rho).unwrap();
        assert!((e - 5.0 * (a - b) / z).abs() < 1e-12);
        assert!((e - 2.1026).abs() < 1e-4);
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = HermitianOperator::new(g.hermitian_part()).unwrap();
        let basis = hermitian_eig(&h, 1e-9);
        basis.eigenvectors().clone()
    }

    #[test]
    fn no_unitary_beats_passive_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let g = ComplexMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let m = g.matmul(&g.adjoint());
            let tr = m.trace().re;
            let rho = DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part()).unwrap();
            let h = HermitianOperator::new(
                ComplexMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .hermitian_part(),
            )
            .unwrap();
            let erg = ergotropy(&h, &rho).unwrap();
            assert!(erg >= -1e-12);
            let energy = h.matrix().trace_product(rho.matrix()).re;
            for _ in 0..100 {
                let u = random_unitary(&mut rng, 4);
                let rotated = u.matmul(rho.matrix()).matmul(&u.adjoint());
                let e = h.matrix().trace_product(&rotated).re;
                assert!(e >= energy - erg - 1e-12);
            }
        }
    }

    #[test]
    fn second_law_along_qubit_decay() {
        let h = pauli(Axis::Z, 1, 1).unwrap().scaled(0.5);
        let a = pauli(Axis::X, 1, 1).unwrap();
        let bath = BathSpec::single("C", a, SpectralModel::flat_zero_temperature(1.0).unwrap()).unwrap();
        let sys = SystemSpec::new(h, vec![bath]).unwrap();
        let s = 0.6f64.sqrt();
        let rho0 = DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(0.0, (0.4f64).sqrt())]).unwrap();
        let traj = evolve_with(&sys, &rho0, &Rk4Config::new(1e-3, 3.0).record_every(100), Engine::Gksl).unwrap();
        let gen = Generator::new(&sys, Engine::Gksl).unwrap();
        for p in &traj {
            let dot = gen.derivative(p.state.matrix()).unwrap();
            let j = gen.heat_currents(&p.state).unwrap();
            let ep = entropy_production_rate(&p.state, &dot, &j, &[f64::INFINITY]).unwrap();
            assert!(ep.entropy_production >= -1e-9, "t={} {ep:?}", p.time);
        }
    }

    #[test]
    fn gibbs_state_has_zero_entropy_production() {
        let beta = 0.9;
        let h = pauli(Axis::Z, 1, 1).unwrap().scaled(0.5);
        let a = pauli(Axis::X, 1, 1).unwrap();
        let bath = BathSpec::single("C", a, SpectralModel::flat_thermal(1.0, beta).unwrap()).unwrap();
        let sys = SystemSpec::new(h, vec![bath]).unwrap();
        let gen = Generator::new(&sys, Engine::Gksl).unwrap();
        let w = [(-beta * 0.5f64).exp(), (beta * 0.5f64).exp()];
        let z = w[0] + w[1];
        let rho = DensityMatrix::from_populations(&[w[0] / z, w[1] / z]).unwrap();
        let dot = gen.derivative(rho.matrix()).unwrap();
        let j = gen.heat_currents(&rho).unwrap();
        let ep = entropy_production_rate(&rho, &dot, &j, &[beta]).unwrap();
        assert!(ep.entropy_production.abs() < 1e-9);
        assert!(!ep.regularized);
    }

    #[test]
    fn entropy_floor_is_flagged() {
        let rho = DensityMatrix::basis_state(2, 0);
        let dot = ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]);
        let (rate, flagged) = entropy_rate(&rho, &dot).unwrap();
        assert!(flagged);
        assert!(rate > 0.0);
        let ep = entropy_production_rate(&rho, &ComplexMatrix::zeros(2, 2), &[0.0], &[f64::INFINITY]).unwrap();
        assert_eq!(ep.entropy_production, 0.0);
    }

    #[test]
    fn records_are_additive() {
        let r = HeatCurrentRecord::new(0.0, vec![("H".into(), 0.3), ("C".into(), -0.1), ("W".into(), -0.2)]);
        assert!(r.additivity_residual() <= 1e-12);
        assert!(r.first_law_residual() < 1e-15);
        assert_eq!(first_law_residual(&[0.0, 0.0]), 0.0);
        assert_eq!(steady_entropy_production(&[1.0, -1.0], &[1.0, 2.0]), 1.0);
    }
}
