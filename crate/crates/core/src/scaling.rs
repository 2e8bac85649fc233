//! Sweeps a scenario family over particle numbers and fits power laws on
//! log-log axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenarios::{
    battery_steady_state, heat_engine_steady_state, mbody_run, superabsorption_run, superradiance_run, Backend,
    BatteryParams, EngineRates, MbodyParams, SuperabsorptionParams, SuperradianceParams,
};

/// Noise order of the m-body family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MbodyOrder {
    Fixed(usize),
    /// `m = L`
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioFamily {
    Mbody {
        order: MbodyOrder,
        gamma_wn: f64,
        omega_q: f64,
        g: f64,
        xi_override: Option<f64>,
    },
    Superradiance {
        gamma0: f64,
        omega_q: f64,
        backend: Backend,
        xi_override: Option<f64>,
    },
    Superabsorption {
        omega_big: f64,
        omega_q: f64,
        gamma0: f64,
        xi_override: Option<f64>,
    },
    /// Fitted value is the output power.
    Engine { rates: EngineRates, omega_q: f64 },
    /// Fitted value is the parallel/collective charging-time ratio; `params.l`
    /// is replaced by each swept `L`.
    Battery { params: BatteryParams },
    /// `L` independent emitters of rate `gamma0`.
    Parallel { gamma0: f64, omega_q: f64 },
}

impl ScenarioFamily {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Mbody { .. } => "mbody",
            Self::Superradiance { .. } => "superradiance",
            Self::Superabsorption { .. } => "superabsorption",
            Self::Engine { .. } => "engine",
            Self::Battery { .. } => "battery",
            Self::Parallel { .. } => "parallel",
        }
    }

    /// One sample at particle number `l`.
    pub fn sample(&self, l: usize) -> Result<Sample> {
        match *self {
            Self::Mbody {
                order,
                gamma_wn,
                omega_q,
                g,
                xi_override,
            } => {
                let m = match order {
                    MbodyOrder::Fixed(m) => m,
                    MbodyOrder::Full => l,
                };
                let r = mbody_run(&MbodyParams {
                    l,
                    m,
                    gamma_wn,
                    omega_q,
                    g,
                    xi_override,
                })?;
                Ok(Sample::new(l, r.current.abs(), r.current.abs(), r.bounds.bound1, r.bounds.bound2, r.parallel_current.abs()))
            }
            Self::Superradiance {
                gamma0,
                omega_q,
                backend,
                xi_override,
            } => {
                let r = superradiance_run(&SuperradianceParams {
                    l,
                    gamma0,
                    omega_q,
                    backend,
                    xi_override,
                    cascade: None,
                })?;
                Ok(Sample::new(l, r.current.abs(), r.current.abs(), r.bounds.bound1, r.bounds.bound2, r.parallel_current.abs()))
            }
            Self::Superabsorption {
                omega_big,
                omega_q,
                gamma0,
                xi_override,
            } => {
                let r = superabsorption_run(&SuperabsorptionParams {
                    l,
                    omega_big,
                    omega_q,
                    gamma0,
                    xi_override,
                })?;
                let j = r.absorption_current.abs();
                Ok(Sample::new(l, j, j, r.bounds.bound1, r.bounds.bound2, r.parallel_current.abs()))
            }
            Self::Engine { rates, omega_q } => {
                let r = heat_engine_steady_state(&rates, omega_q, l)?;
                let w = &r.bounds[2].1;
                Ok(Sample::new(l, r.power.abs(), r.power.abs(), w.bound1, w.bound2, r.parallel_power.abs()))
            }
            Self::Battery { params } => {
                let r = battery_steady_state(&BatteryParams { l, ..params })?;
                let (_, h) = &r.bounds[0];
                let j = r.initial_currents.per_bath[0].1.abs();
                Ok(Sample::new(l, r.charging_time_ratio, j, h.bound1, h.bound2, 1.0))
            }
            Self::Parallel { gamma0, omega_q } => {
                if l == 0 {
                    return Err(Error::invalid("L must be at least 1"));
                }
                let j = l as f64 * gamma0 * omega_q;
                // each emitter: 4 (omega_q/2) (gamma0/2) and 2 (gamma0/2) omega_q
                let b1 = l as f64 * gamma0 * omega_q;
                Ok(Sample::new(l, j, j, b1, j, j))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub l: usize,
    /// Fitted quantity: `|J|` for current families, `|P|` for the engine and
    /// the charging-time ratio for the battery.
    pub value: f64,
    pub current_abs: f64,
    pub bound1: f64,
    pub bound2: f64,
    pub parallel: f64,
}

impl Sample {
    fn new(l: usize, value: f64, current_abs: f64, bound1: f64, bound2: f64, parallel: f64) -> Self {
        Self {
            l,
            value,
            current_abs,
            bound1,
            bound2,
            parallel,
        }
    }

    pub fn bounds_hold(&self) -> bool {
        let slack = |b: f64| crate::bounds::BOUND_SLACK * b + crate::bounds::BOUND_ABS_SLACK;
        self.current_abs <= self.bound1 + slack(self.bound1) && self.current_abs <= self.bound2 + slack(self.bound2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ln value` on `ln L`.
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < 2 {
        return Err(Error::invalid("a power-law fit needs at least two samples"));
    }
    for (index, &(l, v)) in samples.iter().enumerate() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::NonPositiveSample { index, value: l });
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveSample { index, value: v });
        }
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("a power-law fit needs at least two distinct L values"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit {
        exponent,
        intercept,
        r2: r2.clamp(0.0, 1.0),
    })
}

fn fit_column(samples: &[Sample], f: impl Fn(&Sample) -> f64) -> Option<PowerLawFit> {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.l as f64, f(s))).collect();
    fit_exponent(&pts).ok()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub scenario: String,
    pub samples: Vec<Sample>,
    pub fitted_exponent: f64,
    pub intercept: f64,
    pub fit_r2: f64,
    pub fit_range: (usize, usize),
    pub bound1_exponent: Option<f64>,
    pub bound2_exponent: Option<f64>,
    pub parallel_exponent: Option<f64>,
}

impl ScalingReport {
    pub fn bounds_hold(&self) -> bool {
        self.samples.iter().all(Sample::bounds_hold)
    }
}

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "HEATLAB_THREADS";

#[cfg(feature = "parallel")]
fn run_samples(family: &ScenarioFamily, ls: &[usize]) -> Vec<Result<Sample>> {
    use rayon::prelude::*;
    let work = || ls.par_iter().map(|&l| family.sample(l)).collect::<Vec<_>>();
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        _ => work(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_samples(family: &ScenarioFamily, ls: &[usize]) -> Vec<Result<Sample>> {
    ls.iter().map(|&l| family.sample(l)).collect()
}

/// Evaluates `family` at every `L` (deduplicated, sorted) and fits the
/// sampled values.
pub fn sweep(family: &ScenarioFamily, l_values: &[usize]) -> Result<ScalingReport> {
    let mut ls = l_values.to_vec();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 3 {
        return Err(Error::invalid(format!(
            "a sweep needs at least 3 distinct L values, got {}",
            ls.len()
        )));
    }
    let mut samples = Vec::with_capacity(ls.len());
    for (l, r) in ls.iter().zip(run_samples(family, &ls)) {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => {
                return Err(Error::SweepFailure {
                    l: *l,
                    source: Box::new(e),
                })
            }
        }
    }
    let main = fit_column(&samples, |s| s.value);
    let fit = match main {
        Some(f) => f,
        None => {
            let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.l as f64, s.value)).collect();
            fit_exponent(&pts)?
        }
    };
    Ok(ScalingReport {
        scenario: family.id().to_string(),
        fitted_exponent: fit.exponent,
        intercept: fit.intercept,
        fit_r2: fit.r2,
        fit_range: (ls[0], *ls.last().expect("nonempty")),
        bound1_exponent: fit_column(&samples, |s| s.bound1).map(|f| f.exponent),
        bound2_exponent: fit_column(&samples, |s| s.bound2).map(|f| f.exponent),
        parallel_exponent: fit_column(&samples, |s| s.parallel).map(|f| f.exponent),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_examples() {
        let sq: Vec<_> = (1..=10).map(|l| (l as f64, (l * l) as f64)).collect();
        let f = fit_exponent(&sq).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let cube: Vec<_> = (2..=9).map(|l| (l as f64, 3.0 * (l as f64).powi(3))).collect();
        let f = fit_exponent(&cube).unwrap();
        assert!((f.exponent - 3.0).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        let sr: Vec<_> = (11..=101)
            .step_by(10)
            .map(|l| (l as f64, 0.25 * (l as f64 + 1.0).powi(2)))
            .collect();
        let f = fit_exponent(&sr).unwrap();
        // local slope 2L/(L+1) runs from 1.83 to 1.98 over this range
        assert!((f.exponent - 1.935_735_52).abs() < 1e-8, "{}", f.exponent);
        match fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 2.0)]) {
            Err(Error::NonPositiveSample { index: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_examples() {
        let sr = ScenarioFamily::Superradiance {
            gamma0: 1.0,
            omega_q: 1.0,
            backend: Backend::Ladder,
            xi_override: None,
        };
        let ls: Vec<usize> = (11..=101).step_by(10).collect();
        let r = sweep(&sr, &ls).unwrap();
        assert!((r.fitted_exponent - 1.935_735_52).abs() < 1e-8);
        assert!((r.bound2_exponent.unwrap() - 2.0).abs() < 1e-9);
        assert!((r.parallel_exponent.unwrap() - 1.0).abs() < 1e-6);
        assert!(r.bounds_hold());
        assert_eq!(r.fit_range, (11, 101));
        for (s, l) in r.samples.iter().zip(&ls) {
            let single = sr.sample(*l).unwrap();
            assert_eq!(*s, single);
        }

        let mb = ScenarioFamily::Mbody {
            order: MbodyOrder::Full,
            gamma_wn: 1.0,
            omega_q: 1.0,
            g: 1.0,
            xi_override: None,
        };
        let r = sweep(&mb, &[2, 3, 4, 5, 6]).unwrap();
        assert!((r.fitted_exponent - 3.0).abs() < 0.02);
        assert!((r.bound1_exponent.unwrap() - 3.0).abs() < 1e-9);

        let par = ScenarioFamily::Parallel { gamma0: 0.3, omega_q: 2.0 };
        let r = sweep(&par, &[1, 2, 4, 8]).unwrap();
        assert!((r.fitted_exponent - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sweep_errors() {
        let sr = ScenarioFamily::Superradiance {
            gamma0: 1.0,
            omega_q: 1.0,
            backend: Backend::Ladder,
            xi_override: None,
        };
        assert!(sweep(&sr, &[3, 5, 5]).is_err());
        match sweep(&sr, &[3, 4, 5]) {
            Err(Error::SweepFailure { l: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
