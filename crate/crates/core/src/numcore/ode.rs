use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{ComplexMatrix, C64};
use super::operators::{DensityMatrix, DEFAULT_POSITIVITY_TOLERANCE};
use crate::error::{Error, Result};

/// State vector types the fixed-step integrator can advance.
pub trait OdeState: Clone {
    /// `self += alpha * x`
    fn axpy(&mut self, alpha: f64, x: &Self);
}

impl OdeState for ComplexMatrix {
    fn axpy(&mut self, alpha: f64, x: &Self) {
        ComplexMatrix::axpy(self, C64::new(alpha, 0.0), x);
    }
}

impl OdeState for Vec<f64> {
    fn axpy(&mut self, alpha: f64, x: &Self) {
        for (a, b) in self.iter_mut().zip(x) {
            *a += alpha * b;
        }
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<S: OdeState>(f: &impl Fn(&S) -> S, y: &S, dt: f64) -> S {
    let k1 = f(y);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * dt, &k1);
    let k2 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * dt, &k2);
    let k3 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(dt, &k3);
    let k4 = f(&tmp);
    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out
}

/// Uniform grid covering `[0, t_final]` with spacing at most `dt`.
pub fn step_grid(dt: f64, t_final: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::invalid(format!("final time must be nonnegative, got {t_final}")));
    }
    if t_final == 0.0 {
        return Ok((0, dt));
    }
    let ratio = t_final / dt;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    } as usize;
    let steps = steps.max(1);
    Ok((steps, t_final / steps as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk4Config {
    pub dt: f64,
    pub t_final: f64,
    /// Keep every n-th step (the final time is always kept).
    pub record_every: usize,
    pub positivity_tolerance: f64,
}

impl Rk4Config {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            record_every: 1,
            positivity_tolerance: DEFAULT_POSITIVITY_TOLERANCE,
        }
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }

    pub fn positivity_tolerance(mut self, tol: f64) -> Self {
        self.positivity_tolerance = tol;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub state: DensityMatrix,
}

pub type Trajectory = Vec<TrajectoryPoint>;

/// Fixed-step RK4 integration of `d rho / dt = derivative(rho)`.
pub fn evolve_rk4(
    derivative: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    rho0: &DensityMatrix,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory> {
    evolve_rk4_with(derivative, rho0, &Rk4Config::new(dt, t_final))
}

/// As [`evolve_rk4`] with recording stride and positivity tolerance.
///
/// Every state is checked against the density-matrix invariants. A negative
/// eigenvalue below `-positivity_tolerance` aborts with the offending time;
/// states are never clamped.
pub fn evolve_rk4_with(
    derivative: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    rho0: &DensityMatrix,
    config: &Rk4Config,
) -> Result<Trajectory> {
    let (steps, h) = step_grid(config.dt, config.t_final)?;
    probe_generator(&derivative, rho0)?;

    let mut trajectory = vec![TrajectoryPoint {
        time: 0.0,
        state: rho0.clone(),
    }];
    let mut rho = rho0.matrix().clone();
    for step in 1..=steps {
        rho = rk4_step(&derivative, &rho, h).hermitian_part();
        let time = if step == steps { config.t_final } else { step as f64 * h };
        let state = DensityMatrix::with_tolerance(rho.clone(), config.positivity_tolerance)
            .map_err(|e| match e {
                Error::PositivityViolation {
                    min_eigenvalue,
                    tolerance,
                    ..
                } => Error::PositivityViolation {
                    time,
                    min_eigenvalue,
                    tolerance,
                },
                other => other,
            })?;
        if step % config.record_every == 0 || step == steps {
            trajectory.push(TrajectoryPoint { time, state });
        }
    }
    Ok(trajectory)
}

/// Checks trace-freeness and Hermiticity preservation of the generator on the
/// initial state and two seeded random states.
fn probe_generator(
    derivative: &impl Fn(&ComplexMatrix) -> ComplexMatrix,
    rho0: &DensityMatrix,
) -> Result<()> {
    let n = rho0.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ce);
    let mut probes = vec![rho0.matrix().clone()];
    for _ in 0..2 {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        m = m.scale_real(1.0 / tr).hermitian_part();
        probes.push(m);
    }
    for probe in &probes {
        let d = derivative(probe);
        if d.rows() != n || d.cols() != n {
            return Err(Error::InvalidGenerator(format!(
                "derivative has shape {}x{}, expected {n}x{n}",
                d.rows(),
                d.cols()
            )));
        }
        let scale = d.max_abs().max(1.0) * n as f64;
        let tr = d.trace();
        if tr.norm() > 1e-9 * scale {
            return Err(Error::InvalidGenerator(format!("trace {tr} of derivative")));
        }
        let defect = d.hermiticity_defect();
        if defect > 1e-9 * scale {
            return Err(Error::InvalidGenerator(format!("Hermiticity defect {defect:e}")));
        }
    }
    Ok(())
}
