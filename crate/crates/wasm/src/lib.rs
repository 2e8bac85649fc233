//! Browser bindings for the `www/` demo. Every export takes plain numbers
//! and returns a JSON string; the `*_data` functions are the same
//! computations for native callers.

use heatlab_core::scaling::{sweep, MbodyOrder, ScalingReport, ScenarioFamily};
use heatlab_core::scenarios::{
    battery_network, battery_steady_state, superradiance_run, Backend, BatteryParams, CascadeSpec,
    SuperradianceParams,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest `L` the demo accepts for dense m-body samples.
pub const MAX_DENSE_L: usize = 8;
/// Largest `L` for ladder and rate-network computations.
pub const MAX_L: usize = 2001;
const MAX_POINTS: usize = 2000;

#[derive(Debug, Serialize)]
pub struct Cascade {
    pub l: usize,
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub current: Vec<f64>,
    /// `L` independent emitters starting excited.
    pub parallel_current: Vec<f64>,
    pub j0: f64,
    pub j0_closed_form: f64,
    pub bound1: f64,
    pub bound2: f64,
    pub emitted_energy: f64,
}

#[derive(Debug, Serialize)]
pub struct Charging {
    pub l: usize,
    pub t: Vec<f64>,
    /// Energy stored above `|-1>^L` under collective coupling.
    pub collective: Vec<f64>,
    /// Same for independent particles.
    pub parallel: Vec<f64>,
    pub steady_energy: f64,
    pub ergotropy: f64,
    pub charging_time_collective: f64,
    pub charging_time_parallel: f64,
    pub charging_time_ratio: f64,
}

fn check_l(l: usize, max: usize) -> Result<(), String> {
    if l == 0 || l > max {
        return Err(format!("L must be in 1..={max}, got {l}"));
    }
    Ok(())
}

fn check_points(points: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be in 2..={MAX_POINTS}, got {points}"));
    }
    Ok(())
}

/// Superradiant cascade from `|1/2>` (odd `L`) on the Dicke ladder.
pub fn cascade_data(l: usize, gamma0: f64, omega_q: f64, t_final: f64, points: usize) -> Result<Cascade, String> {
    check_l(l, MAX_L)?;
    check_points(points)?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(format!("t_final must be positive, got {t_final}"));
    }
    // keep dt times the fastest ladder rate at or below 1/4
    let max_rate = gamma0 * ((l + 1) * (l + 1)) as f64 / 4.0;
    let intervals = points - 1;
    let every = ((4.0 * t_final * max_rate / intervals as f64).ceil() as usize).max(1);
    let dt = t_final / (intervals * every) as f64;
    let run = superradiance_run(&SuperradianceParams {
        l,
        gamma0,
        omega_q,
        backend: Backend::Ladder,
        xi_override: None,
        cascade: Some(CascadeSpec {
            dt,
            t_final,
            record_every: every,
        }),
    })
    .map_err(|e| e.to_string())?;
    let traj = run.cascade.unwrap_or_default();
    let lf = l as f64;
    Ok(Cascade {
        l,
        t: traj.iter().map(|p| p.time).collect(),
        energy: traj.iter().map(|p| p.ladder.energy()).collect(),
        current: traj.iter().map(|p| p.heat_current).collect(),
        parallel_current: traj.iter().map(|p| -lf * gamma0 * omega_q * (-gamma0 * p.time).exp()).collect(),
        j0: run.current,
        j0_closed_form: run.closed_form,
        bound1: run.bounds.bound1,
        bound2: run.bounds.bound2,
        emitted_energy: run.emitted_energy.unwrap_or(0.0),
    })
}

/// Current and both bounds over `L = l_min, l_min + step, ..., <= l_max`.
pub fn scaling_data(scenario: &str, l_min: usize, l_max: usize, step: usize) -> Result<ScalingReport, String> {
    let (family, max) = match scenario {
        "mbody" => (
            ScenarioFamily::Mbody {
                order: MbodyOrder::Full,
                gamma_wn: 1.0,
                omega_q: 1.0,
                g: 1.0,
                xi_override: None,
            },
            MAX_DENSE_L,
        ),
        "superradiance" => (
            ScenarioFamily::Superradiance {
                gamma0: 1.0,
                omega_q: 1.0,
                backend: Backend::Ladder,
                xi_override: None,
            },
            MAX_L,
        ),
        "superabsorption" => (
            ScenarioFamily::Superabsorption {
                omega_big: 0.9,
                omega_q: 1.0,
                gamma0: 1.0,
                xi_override: None,
            },
            MAX_L,
        ),
        other => return Err(format!("unknown scenario `{other}`")),
    };
    check_l(l_min, max)?;
    check_l(l_max, max)?;
    let ls: Vec<usize> = (l_min..=l_max).step_by(step.max(1)).collect();
    sweep(&family, &ls).map_err(|e| e.to_string())
}

fn battery_params(l: usize, beta_h0: f64, beta_c0: f64) -> BatteryParams {
    BatteryParams {
        l,
        e1: 1.0,
        e0: 2.0,
        em1: 0.0,
        beta_h0,
        beta_c0,
        gamma_h: 1.0,
        gamma_c: 1.0,
        xi_override: None,
    }
}

/// Charging of the three-level battery from `|-1>^L`, collective against
/// independent coupling.
pub fn charging_data(l: usize, beta_h0: f64, beta_c0: f64, t_final: f64, points: usize) -> Result<Charging, String> {
    check_l(l, MAX_L)?;
    check_points(points)?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(format!("t_final must be positive, got {t_final}"));
    }
    let p = battery_params(l, beta_h0, beta_c0);
    let run = battery_steady_state(&p).map_err(|e| e.to_string())?;
    let lf = l as f64;
    let (collective, ..) = battery_network(&p, lf * lf).map_err(|e| e.to_string())?;
    let (parallel, ..) = battery_network(&p, 1.0).map_err(|e| e.to_string())?;
    let ground = lf * p.em1;
    let stored = |net: &heatlab_core::scenarios::RateNetwork, t: f64| {
        let pop = net.propagate(&[0.0, 0.0, 1.0], t);
        pop.iter().zip(net.energies()).map(|(q, e)| q * e).sum::<f64>() - ground
    };
    let t: Vec<f64> = (0..points).map(|i| t_final * i as f64 / (points - 1) as f64).collect();
    Ok(Charging {
        l,
        collective: t.iter().map(|&s| stored(&collective, s)).collect(),
        parallel: t.iter().map(|&s| stored(&parallel, s)).collect(),
        t,
        steady_energy: run.populations.iter().zip([p.e1, p.e0, p.em1]).map(|(q, e)| q * e * lf).sum::<f64>() - ground,
        ergotropy: run.ergotropy,
        charging_time_collective: run.charging_time_collective,
        charging_time_parallel: run.charging_time_parallel,
        charging_time_ratio: run.charging_time_ratio,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn superradiance_cascade(l: usize, gamma0: f64, omega_q: f64, t_final: f64, points: usize) -> Result<String, JsValue> {
    to_js(cascade_data(l, gamma0, omega_q, t_final, points))
}

#[wasm_bindgen]
pub fn scaling_curve(scenario: &str, l_min: usize, l_max: usize, step: usize) -> Result<String, JsValue> {
    to_js(scaling_data(scenario, l_min, l_max, step))
}

#[wasm_bindgen]
pub fn battery_charging(l: usize, beta_h0: f64, beta_c0: f64, t_final: f64, points: usize) -> Result<String, JsValue> {
    to_js(charging_data(l, beta_h0, beta_c0, t_final, points))
}
