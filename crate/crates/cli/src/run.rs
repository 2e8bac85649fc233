//! Executes a validated configuration and assembles the JSON report and
//! optional CSV table.

use heatlab_core::bounds::{commutator_lemma_check, evaluate_bounds_with_tolerance, BoundReport};
use heatlab_core::master::{Engine, Generator};
use heatlab_core::numcore::{ComplexMatrix, DensityMatrix, HermitianOperator, Rk4Config, DEFAULT_POSITIVITY_TOLERANCE};
use heatlab_core::operators::{dicke_sector_j, CollectiveAxis, DickeIndex};
use heatlab_core::scaling::{sweep, MbodyOrder, ScenarioFamily};
use heatlab_core::scenarios::{
    audit_state, battery_network, battery_steady_state, engine_network, heat_engine_steady_state, m_body_system,
    mbody_run, superabsorption_run, superradiance_run, Backend, BathRates, BatteryParams, CascadeSpec, EngineRates,
    MbodyParams, RateNetwork, SuperabsorptionParams, SuperradianceParams,
};
use heatlab_core::spectral::{BathSpec, SpectralKind, SpectralModel, SystemSpec, XI_CONVENTION_NOTE};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{require, ConfigError, RunConfig, ScenarioKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Scenario,
    Sweep,
    Evolve,
    Bounds,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] heatlab_core::Error),
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Everything a run produces. `failures` lists violated bounds and
/// invariants; the process exit status is nonzero iff it is nonempty.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub failures: Vec<String>,
}

/// Tolerance of the first-law audits relative to the largest current.
pub const FIRST_LAW_TOLERANCE: f64 = 1e-9;
/// Allowed negative entropy production.
pub const SECOND_LAW_TOLERANCE: f64 = 1e-9;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

pub fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_table(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|x| csv_number(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

struct Collector {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Collector {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: vec![XI_CONVENTION_NOTE.to_string()],
        }
    }

    fn bounds(&mut self, name: &str, report: &BoundReport) {
        for (bound, lhs, rhs) in report.violations() {
            self.failures.push(format!("{name}: {bound} violated ({lhs} > {rhs})"));
        }
    }

    fn first_law(&mut self, name: &str, residual: f64, scale: f64) {
        if residual > FIRST_LAW_TOLERANCE * scale.max(1.0) {
            self.failures.push(format!("{name}: first-law residual {residual}"));
        }
    }

    fn second_law(&mut self, name: &str, production: Option<f64>) {
        if let Some(p) = production {
            if p < -SECOND_LAW_TOLERANCE {
                self.failures.push(format!("{name}: negative entropy production {p}"));
            }
        }
    }

    fn finish(self, inputs: &RunConfig, currents: Value, bounds: Value, thermo: Value, scaling: Option<Value>, csv: Option<String>) -> Outcome {
        let mut notes = self.notes;
        notes.extend(self.failures.iter().map(|f| format!("violation: {f}")));
        let mut report = json!({
            "inputs": to_value(inputs),
            "currents": currents,
            "bounds": bounds,
            "thermo": thermo,
            "notes": notes,
        });
        if let Some(s) = scaling {
            report["scaling"] = s;
        }
        Outcome {
            report,
            csv,
            failures: self.failures,
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> RunResult<Outcome> {
    match command {
        Command::Scenario => run_scenario(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Evolve => run_evolve(cfg),
        Command::Bounds => {
            if cfg.hamiltonian.is_some() || cfg.noise.is_some() {
                run_custom_bounds(cfg)
            } else {
                run_scenario(cfg)
            }
        }
    }
}

fn mbody_params(cfg: &RunConfig, l: usize) -> RunResult<MbodyParams> {
    Ok(MbodyParams {
        l,
        m: cfg.m_order()?.unwrap_or(l),
        gamma_wn: cfg.gamma0.unwrap_or(1.0),
        omega_q: cfg.omega_q.unwrap_or(1.0),
        g: cfg.g.unwrap_or(1.0),
        xi_override: cfg.xi_override,
    })
}

fn superradiance_params(cfg: &RunConfig, l: usize) -> RunResult<SuperradianceParams> {
    Ok(SuperradianceParams {
        l,
        gamma0: cfg.gamma0.unwrap_or(1.0),
        omega_q: cfg.omega_q.unwrap_or(1.0),
        backend: cfg.backend.unwrap_or(Backend::Ladder),
        xi_override: cfg.xi_override,
        cascade: None,
    })
}

fn superabsorption_params(cfg: &RunConfig, l: usize) -> RunResult<SuperabsorptionParams> {
    Ok(SuperabsorptionParams {
        l,
        omega_big: require(&cfg.omega_big, "Omega", "scenario superabsorption")?,
        omega_q: cfg.omega_q.unwrap_or(1.0),
        gamma0: cfg.gamma0.unwrap_or(1.0),
        xi_override: cfg.xi_override,
    })
}

fn engine_rates(cfg: &RunConfig) -> RunResult<EngineRates> {
    let omega_q = cfg.omega_q.unwrap_or(1.0);
    if cfg.up_h.is_some() || cfg.down_h.is_some() {
        let r = |u: Option<f64>, d: Option<f64>, ku: &'static str, kd: &'static str| -> RunResult<BathRates> {
            Ok(BathRates::new(require(&u, ku, "scenario engine")?, require(&d, kd, "scenario engine")?)?)
        };
        return Ok(EngineRates::new(
            r(cfg.up_h, cfg.down_h, "up_H", "down_H")?,
            r(cfg.up_c, cfg.down_c, "up_C", "down_C")?,
            r(cfg.up_w, cfg.down_w, "up_W", "down_W")?,
        ));
    }
    let bh = require(&cfg.beta_h0, "beta_H0", "scenario engine")?;
    let bc = require(&cfg.beta_c0, "beta_C0", "scenario engine")?;
    let bw = cfg.beta_w0.unwrap_or(1e-6 * bh);
    let gammas = [
        require(&cfg.gamma_h, "gamma_H", "scenario engine")?,
        require(&cfg.gamma_c, "gamma_C", "scenario engine")?,
        require(&cfg.gamma_w, "gamma_W", "scenario engine")?,
    ];
    Ok(EngineRates::thermal(gammas, [bh, bc, bw], omega_q)?)
}

fn battery_params(cfg: &RunConfig, l: usize) -> RunResult<BatteryParams> {
    let c = "scenario battery";
    Ok(BatteryParams {
        l,
        e1: require(&cfg.e1, "E1", c)?,
        e0: require(&cfg.e0, "E0", c)?,
        em1: require(&cfg.em1, "Em1", c)?,
        beta_h0: require(&cfg.beta_h0, "beta_H0", c)?,
        beta_c0: require(&cfg.beta_c0, "beta_C0", c)?,
        gamma_h: require(&cfg.gamma_h, "gamma_H", c)?,
        gamma_c: require(&cfg.gamma_c, "gamma_C", c)?,
        xi_override: cfg.xi_override,
    })
}

fn bounds_rows(reports: &[(String, BoundReport)]) -> Vec<(String, f64)> {
    let mut rows = Vec::new();
    for (name, b) in reports {
        rows.push((format!("bound1_{name}"), b.bound1));
        rows.push((format!("bound_commutator_{name}"), b.bound_commutator));
        rows.push((format!("bound2_{name}"), b.bound2));
    }
    rows
}

fn key_value_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{}\n", csv_number(*v)));
    }
    out
}

fn run_scenario(cfg: &RunConfig) -> RunResult<Outcome> {
    let kind = cfg.scenario()?;
    cfg.validate_scenario(kind)?;
    let l = cfg.single_l(match kind {
        ScenarioKind::Mbody => "scenario mbody",
        ScenarioKind::Superradiance => "scenario superradiance",
        ScenarioKind::Superabsorption => "scenario superabsorption",
        ScenarioKind::Engine => "scenario engine",
        ScenarioKind::Battery => "scenario battery",
    })?;
    let mut c = Collector::new();
    let (currents, bounds, thermo, rows): (Value, Value, Value, Vec<(String, f64)>) = match kind {
        ScenarioKind::Mbody => {
            let r = mbody_run(&mbody_params(cfg, l)?)?;
            c.bounds("noise", &r.bounds);
            c.first_law("mbody", r.audit.first_law_residual, r.current.abs());
            c.second_law("mbody", r.audit.entropy_production);
            let mut rows = vec![
                ("J0".to_string(), r.current),
                ("closed_form".to_string(), r.closed_form),
                ("parallel".to_string(), r.parallel_current),
            ];
            rows.extend(bounds_rows(&[("noise".to_string(), r.bounds.clone())]));
            (
                json!({"J0": r.current, "closed_form": r.closed_form, "relative_error": r.relative_error, "parallel": r.parallel_current}),
                json!({"noise": to_value(&r.bounds)}),
                to_value(&r.audit),
                rows,
            )
        }
        ScenarioKind::Superradiance => {
            let r = superradiance_run(&superradiance_params(cfg, l)?)?;
            c.bounds("C", &r.bounds);
            c.first_law("superradiance", r.audit.first_law_residual, r.current.abs());
            c.second_law("superradiance", r.audit.entropy_production);
            let mut rows = vec![
                ("J0".to_string(), r.current),
                ("closed_form".to_string(), r.closed_form),
                ("parallel".to_string(), r.parallel_current),
            ];
            rows.extend(bounds_rows(&[("C".to_string(), r.bounds.clone())]));
            (
                json!({"J0": r.current, "closed_form": r.closed_form, "relative_error": r.relative_error, "parallel": r.parallel_current}),
                json!({"C": to_value(&r.bounds)}),
                to_value(&r.audit),
                rows,
            )
        }
        ScenarioKind::Superabsorption => {
            let r = superabsorption_run(&superabsorption_params(cfg, l)?)?;
            c.bounds("SA", &r.bounds);
            c.first_law("superabsorption", r.audit.first_law_residual, r.absorption_current.abs());
            c.notes.push(NON_THERMAL_NOTE.into());
            c.notes.push(r.note.clone());
            let mut rows = vec![
                ("J0".to_string(), r.absorption_current),
                ("closed_form".to_string(), r.absorption_closed_form),
                ("delta_e".to_string(), r.delta_e),
                ("parallel".to_string(), r.parallel_current),
            ];
            rows.extend(bounds_rows(&[("SA".to_string(), r.bounds.clone())]));
            (
                json!({
                    "J0": r.absorption_current,
                    "closed_form": r.absorption_closed_form,
                    "relative_error": r.relative_error,
                    "parallel": r.parallel_current,
                    "window": [r.window.0, r.window.1],
                }),
                json!({
                    "SA": to_value(&r.bounds),
                    "delta_e": r.delta_e,
                    "delta_e_closed_form": r.delta_e_closed_form,
                    "bound2_over_current": r.bound2_over_current,
                }),
                to_value(&r.audit),
                rows,
            )
        }
        ScenarioKind::Engine => {
            let omega_q = cfg.omega_q.unwrap_or(1.0);
            let r = heat_engine_steady_state(&engine_rates(cfg)?, omega_q, l)?;
            for (name, b) in &r.bounds {
                c.bounds(name, b);
            }
            c.first_law("engine", r.first_law_residual, r.currents.max_abs());
            if let Some(w) = r.beta_weighted_current {
                if w > SECOND_LAW_TOLERANCE * r.currents.max_abs().max(1.0) {
                    c.failures.push(format!("engine: sum beta_a J_a = {w} > 0"));
                }
            }
            c.notes.extend(r.thermo.notes.iter().cloned());
            let mut rows: Vec<(String, f64)> = r.currents.per_bath.iter().map(|(n, j)| (format!("J_{n}"), *j)).collect();
            rows.push(("power".to_string(), r.power));
            rows.push(("power_closed_form".to_string(), r.power_closed_form));
            rows.extend(bounds_rows(&r.bounds));
            let bounds: serde_json::Map<String, Value> = r.bounds.iter().map(|(n, b)| (n.clone(), to_value(b))).collect();
            (
                json!({
                    "per_bath": to_value(&r.currents.per_bath),
                    "closed_form": r.closed_form_currents,
                    "power": r.power,
                    "power_closed_form": r.power_closed_form,
                    "parallel_power": r.parallel_power,
                    "populations": r.populations,
                    "closed_form_populations": r.closed_form_populations,
                    "steady_residual": r.steady_residual,
                }),
                Value::Object(bounds),
                json!({
                    "first_law_residual": r.first_law_residual,
                    "beta_weighted_current": r.beta_weighted_current,
                    "efficiency_closed_form": r.efficiency_closed_form,
                    "efficiency_deficit": r.efficiency_deficit,
                    "report": to_value(&r.thermo),
                }),
                rows,
            )
        }
        ScenarioKind::Battery => {
            let r = battery_steady_state(&battery_params(cfg, l)?)?;
            for (name, b) in &r.bounds {
                c.bounds(name, b);
            }
            c.first_law("battery", r.initial_currents.first_law_residual(), r.initial_currents.max_abs());
            c.notes.extend(r.notes.iter().cloned());
            let mut rows = vec![
                ("ergotropy".to_string(), r.ergotropy),
                ("ergotropy_closed_form".to_string(), r.ergotropy_closed_form),
                ("charging_time_collective".to_string(), r.charging_time_collective),
                ("charging_time_parallel".to_string(), r.charging_time_parallel),
                ("charging_time_ratio".to_string(), r.charging_time_ratio),
            ];
            rows.extend(r.initial_currents.per_bath.iter().map(|(n, j)| (format!("J_{n}_initial"), *j)));
            rows.extend(bounds_rows(&r.bounds));
            let bounds: serde_json::Map<String, Value> = r.bounds.iter().map(|(n, b)| (n.clone(), to_value(b))).collect();
            (
                json!({
                    "initial_per_bath": to_value(&r.initial_currents.per_bath),
                    "populations": r.populations,
                    "closed_form_populations": r.closed_form_populations,
                    "steady_residual": r.steady_residual,
                    "rates_H": to_value(&r.rates_h),
                    "rates_C": to_value(&r.rates_c),
                }),
                Value::Object(bounds),
                json!({
                    "first_law_residual": r.initial_currents.first_law_residual(),
                    "beta_omega_H": r.beta_omega_h,
                    "beta_omega_C": r.beta_omega_c,
                    "inversion": r.inversion,
                    "ergotropy": r.ergotropy,
                    "ergotropy_closed_form": r.ergotropy_closed_form,
                    "ergotropy_parallel": r.ergotropy_parallel,
                    "charging_time_collective": r.charging_time_collective,
                    "charging_time_parallel": r.charging_time_parallel,
                    "charging_time_ratio": r.charging_time_ratio,
                }),
                rows,
            )
        }
    };
    Ok(c.finish(cfg, currents, bounds, thermo, None, Some(key_value_csv(&rows))))
}

fn family(cfg: &RunConfig, kind: ScenarioKind) -> RunResult<ScenarioFamily> {
    cfg.validate_scenario(kind)?;
    Ok(match kind {
        ScenarioKind::Mbody => ScenarioFamily::Mbody {
            order: match cfg.m_order()? {
                Some(m) => MbodyOrder::Fixed(m),
                None => MbodyOrder::Full,
            },
            gamma_wn: cfg.gamma0.unwrap_or(1.0),
            omega_q: cfg.omega_q.unwrap_or(1.0),
            g: cfg.g.unwrap_or(1.0),
            xi_override: cfg.xi_override,
        },
        ScenarioKind::Superradiance => ScenarioFamily::Superradiance {
            gamma0: cfg.gamma0.unwrap_or(1.0),
            omega_q: cfg.omega_q.unwrap_or(1.0),
            backend: cfg.backend.unwrap_or(Backend::Ladder),
            xi_override: cfg.xi_override,
        },
        ScenarioKind::Superabsorption => {
            let p = superabsorption_params(cfg, 1)?;
            ScenarioFamily::Superabsorption {
                omega_big: p.omega_big,
                omega_q: p.omega_q,
                gamma0: p.gamma0,
                xi_override: p.xi_override,
            }
        }
        ScenarioKind::Engine => ScenarioFamily::Engine {
            rates: engine_rates(cfg)?,
            omega_q: cfg.omega_q.unwrap_or(1.0),
        },
        ScenarioKind::Battery => ScenarioFamily::Battery {
            params: battery_params(cfg, 1)?,
        },
    })
}

fn run_sweep(cfg: &RunConfig) -> RunResult<Outcome> {
    let kind = cfg.scenario()?;
    let fam = family(cfg, kind)?;
    let ls = cfg.sweep_ls()?;
    let report = sweep(&fam, &ls)?;
    let mut c = Collector::new();
    for s in &report.samples {
        if !s.bounds_hold() {
            c.failures.push(format!(
                "L = {}: |J| = {} exceeds bound1 = {} or bound2 = {}",
                s.l, s.current_abs, s.bound1, s.bound2
            ));
        }
    }
    match kind {
        ScenarioKind::Engine => c.notes.push("value column: |P| (output power)".into()),
        ScenarioKind::Battery => c.notes.push("value column: parallel/collective charging-time ratio".into()),
        _ => c.notes.push("value column: |J(0)|".into()),
    }
    let header: Vec<String> = ["L", "value", "current_abs", "bound1", "bound2", "parallel"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<f64>> = report
        .samples
        .iter()
        .map(|s| vec![s.l as f64, s.value, s.current_abs, s.bound1, s.bound2, s.parallel])
        .collect();
    let currents = json!(report.samples.iter().map(|s| json!({"L": s.l, "value": s.value, "current_abs": s.current_abs, "parallel": s.parallel})).collect::<Vec<_>>());
    let bounds = json!(report.samples.iter().map(|s| json!({"L": s.l, "bound1": s.bound1, "bound2": s.bound2, "holds": s.bounds_hold()})).collect::<Vec<_>>());
    let scaling = to_value(&report);
    Ok(c.finish(cfg, currents, bounds, json!({}), Some(scaling), Some(csv_table(&header, &rows))))
}

fn rk4_config(cfg: &RunConfig, context: &'static str) -> RunResult<(Rk4Config, usize)> {
    let dt = require(&cfg.dt, "dt", context)?;
    let t_final = require(&cfg.t_final, "t_final", context)?;
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let every = cfg.record_every.unwrap_or((steps / 1000).max(1)).max(1);
    let config = Rk4Config::new(dt, t_final)
        .record_every(every)
        .positivity_tolerance(cfg.positivity_tol.unwrap_or(DEFAULT_POSITIVITY_TOLERANCE));
    Ok((config, every))
}

/// Band-pass baths obey no detailed balance, so the Clausius form of the
/// second law does not apply to them.
fn all_thermal(system: &SystemSpec) -> bool {
    system
        .baths()
        .iter()
        .flat_map(|b| b.channels())
        .all(|ch| ch.model.kind() != SpectralKind::BandPass)
}

const NON_THERMAL_NOTE: &str = "band-pass bath has no temperature; entropy production is reported but not asserted";

/// Dense evolution of `system` from `rho0`, with per-point audits.
fn evolve_dense(cfg: &RunConfig, system: &SystemSpec, rho0: &DensityMatrix, engine: Engine, context: &'static str) -> RunResult<Outcome> {
    let (config, _) = rk4_config(cfg, context)?;
    let generator = match cfg.freq_tol {
        Some(tol) => Generator::with_frequency_tolerance(system, engine, tol)?,
        None => Generator::new(system, engine)?,
    };
    let traj = generator.evolve(rho0, &config)?;
    let mut c = Collector::new();
    let thermal = all_thermal(system);
    let asserted = engine == Engine::Gksl && thermal;
    if !thermal {
        c.notes.push(NON_THERMAL_NOTE.into());
    }
    let labels: Vec<String> = (0..generator.bath_count()).map(|b| generator.bath_label(b).to_string()).collect();
    let mut header = vec!["t".to_string(), "energy".to_string()];
    header.extend(labels.iter().map(|l| format!("J_{l}")));
    header.extend(["trace_defect", "min_eigenvalue", "first_law_residual", "entropy_production"].map(String::from));
    let mut rows = Vec::with_capacity(traj.len());
    let mut worst_first = 0.0f64;
    let mut min_sigma = f64::INFINITY;
    let mut max_trace = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for p in &traj {
        let audit = audit_state(&generator, &p.state)?;
        let rho_e = generator.to_eigenbasis(p.state.matrix());
        let currents = generator.heat_currents_eigen(&rho_e);
        let energy: f64 = generator.energies().iter().enumerate().map(|(i, e)| e * rho_e[(i, i)].re).sum();
        let trace = (p.state.matrix().trace().re - 1.0).abs();
        let eig = p.state.min_eigenvalue();
        let scale = currents.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        c.first_law(&format!("t = {}", p.time), audit.first_law_residual, scale);
        c.second_law(&format!("t = {}", p.time), audit.entropy_production.filter(|_| asserted));
        worst_first = worst_first.max(audit.first_law_residual);
        if let Some(s) = audit.entropy_production {
            min_sigma = min_sigma.min(s);
        }
        max_trace = max_trace.max(trace);
        min_eig = min_eig.min(eig);
        let mut row = vec![p.time, energy];
        row.extend(&currents);
        row.extend([trace, eig, audit.first_law_residual, audit.entropy_production.unwrap_or(f64::NAN)]);
        rows.push(row);
    }
    if max_trace > 1e-10 {
        c.failures.push(format!("trace defect {max_trace}"));
    }
    if engine == Engine::Redfield {
        c.notes.push("Redfield dynamics is not guaranteed completely positive; entropy production is reported but not asserted".into());
    }
    let first = traj.first().expect("nonempty");
    let last = traj.last().expect("nonempty");
    let j0 = generator.heat_currents(&first.state)?;
    let j1 = generator.heat_currents(&last.state)?;
    let mut bounds = serde_json::Map::new();
    for (b, bath) in system.baths().iter().enumerate() {
        let report = evaluate_bounds_with_tolerance(system.hamiltonian(), generator.basis(), bath, j0[b], cfg.element_tol)?;
        c.bounds(bath.label(), &report);
        bounds.insert(bath.label().to_string(), to_value(&report));
    }
    Ok(c.finish(
        cfg,
        json!({"labels": labels, "initial": j0, "final": j1, "t_final": last.time}),
        Value::Object(bounds),
        json!({
            "max_first_law_residual": worst_first,
            "min_entropy_production": if min_sigma.is_finite() { Some(min_sigma) } else { None },
            "max_trace_defect": max_trace,
            "min_eigenvalue": min_eig,
        }),
        None,
        Some(csv_table(&header, &rows)),
    ))
}

fn evolve_network(cfg: &RunConfig, net: &RateNetwork, p0: &[f64], context: &'static str) -> RunResult<Outcome> {
    let dt = require(&cfg.dt, "dt", context)?;
    let t_final = require(&cfg.t_final, "t_final", context)?;
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let every = cfg.record_every.unwrap_or((steps / 1000).max(1)).max(1);
    let mut c = Collector::new();
    let mut header = vec!["t".to_string()];
    header.extend(net.labels().iter().map(|l| format!("p_{l}")));
    header.extend(net.bath_labels().iter().map(|l| format!("J_{l}")));
    let mut rows = Vec::new();
    let mut worst_first = 0.0f64;
    let mut step = 0;
    while step <= steps {
        let t = if step == steps { t_final } else { step as f64 * dt };
        let p = net.propagate(p0, t);
        let rec = net.current_record(t, &p);
        let de: f64 = net.derivative(&p).iter().zip(net.energies()).map(|(d, e)| d * e).sum();
        let residual = (de - rec.total).abs();
        worst_first = worst_first.max(residual);
        c.first_law(&format!("t = {t}"), residual, rec.max_abs());
        let mut row = vec![t];
        row.extend(&p);
        row.extend(rec.per_bath.iter().map(|x| x.1));
        rows.push(row);
        if step == steps {
            break;
        }
        step = (step + every).min(steps);
    }
    let ss = net.steady_state()?;
    Ok(c.finish(
        cfg,
        json!({
            "labels": net.bath_labels(),
            "initial": net.currents(p0),
            "steady": net.currents(&ss),
            "steady_populations": ss,
        }),
        json!({}),
        json!({"max_first_law_residual": worst_first}),
        None,
        Some(csv_table(&header, &rows)),
    ))
}

fn custom_system(cfg: &RunConfig) -> RunResult<(SystemSpec, DensityMatrix)> {
    let to_matrix = |rows: &Vec<Vec<f64>>, key: &'static str| -> RunResult<HermitianOperator> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(ConfigError::Invalid {
                key,
                message: "must be a nonempty square matrix".into(),
            }
            .into());
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].into());
        Ok(HermitianOperator::new(m)?)
    };
    let h = to_matrix(&require(&cfg.hamiltonian, "hamiltonian", "custom system")?, "hamiltonian")?;
    let a = to_matrix(&require(&cfg.noise, "noise", "custom system")?, "noise")?;
    let gamma0 = cfg.gamma0.unwrap_or(1.0);
    let model = match cfg.beta {
        Some(b) => SpectralModel::flat_thermal(gamma0, b)?,
        None => SpectralModel::flat_zero_temperature(gamma0)?,
    };
    let model = match cfg.xi_override {
        Some(x) => model.with_xi(x)?,
        None => model,
    };
    let n = h.dim();
    let pops = cfg.populations.clone().unwrap_or_else(|| {
        let mut p = vec![0.0; n];
        p[0] = 1.0;
        p
    });
    let rho = DensityMatrix::from_populations(&pops)?;
    let system = SystemSpec::new(h, vec![BathSpec::single("B", a, model)?])?;
    Ok((system, rho))
}

fn run_custom_bounds(cfg: &RunConfig) -> RunResult<Outcome> {
    let (system, rho) = custom_system(cfg)?;
    let engine = cfg.engine.unwrap_or(Engine::Gksl);
    let generator = match cfg.freq_tol {
        Some(tol) => Generator::with_frequency_tolerance(&system, engine, tol)?,
        None => Generator::new(&system, engine)?,
    };
    let j = generator.heat_currents(&rho)?[0];
    let bath = &system.baths()[0];
    let report = evaluate_bounds_with_tolerance(system.hamiltonian(), generator.basis(), bath, j, cfg.element_tol)?;
    let lemma = commutator_lemma_check(&bath.channels()[0].operator, system.hamiltonian(), report.delta_e_per_channel[0])?;
    let audit = audit_state(&generator, &rho)?;
    let mut c = Collector::new();
    c.bounds("B", &report);
    c.first_law("custom", audit.first_law_residual, j.abs());
    if engine == Engine::Gksl {
        c.second_law("custom", audit.entropy_production);
    }
    if !lemma.holds {
        c.failures.push(format!("commutator lemma violated: {lemma:?}"));
    }
    let mut rows = vec![("J".to_string(), j)];
    rows.extend(bounds_rows(&[("B".to_string(), report.clone())]));
    Ok(c.finish(
        cfg,
        json!({"J": j, "engine": to_value(&engine)}),
        json!({"B": to_value(&report), "commutator_lemma": to_value(&lemma)}),
        to_value(&audit),
        None,
        Some(key_value_csv(&rows)),
    ))
}

fn run_evolve(cfg: &RunConfig) -> RunResult<Outcome> {
    if cfg.hamiltonian.is_some() || cfg.noise.is_some() {
        let (system, rho) = custom_system(cfg)?;
        return evolve_dense(cfg, &system, &rho, cfg.engine.unwrap_or(Engine::Gksl), "evolve");
    }
    let kind = cfg.scenario()?;
    cfg.validate_scenario(kind)?;
    let l = cfg.single_l("evolve")?;
    match kind {
        ScenarioKind::Superradiance => {
            let mut p = superradiance_params(cfg, l)?;
            let (config, every) = rk4_config(cfg, "evolve superradiance")?;
            p.cascade = Some(CascadeSpec {
                dt: config.dt,
                t_final: config.t_final,
                record_every: every,
            });
            let r = superradiance_run(&p)?;
            let mut c = Collector::new();
            c.bounds("C", &r.bounds);
            c.notes.push("cascade from the Dicke-ladder rate equations".into());
            let traj = r.cascade.as_ref().expect("cascade requested");
            let rows: Vec<Vec<f64>> = traj.iter().map(|p| vec![p.time, p.ladder.energy(), p.heat_current]).collect();
            let header: Vec<String> = ["t", "energy", "heat_current"].iter().map(|s| s.to_string()).collect();
            let peak = traj.iter().map(|p| p.heat_current.abs()).fold(0.0, f64::max);
            Ok(c.finish(
                cfg,
                json!({"J0": r.current, "closed_form": r.closed_form, "peak_abs": peak, "emitted_energy": r.emitted_energy}),
                json!({"C": to_value(&r.bounds)}),
                to_value(&r.audit),
                None,
                Some(csv_table(&header, &rows)),
            ))
        }
        ScenarioKind::Mbody => {
            let p = mbody_params(cfg, l)?;
            let (system, rho) = m_body_system(&p)?;
            evolve_dense(cfg, &system, &rho, cfg.engine.unwrap_or(Engine::Redfield), "evolve mbody")
        }
        ScenarioKind::Superabsorption => {
            let p = superabsorption_params(cfg, l)?;
            let probe = superabsorption_run(&p)?;
            let jz = dicke_sector_j(CollectiveAxis::Z, l)?;
            let h = HermitianOperator::new(&jz.scale_real(p.omega_q) + &jz.matmul(&jz).scale_real(p.omega_big))?;
            let a = HermitianOperator::new(dicke_sector_j(CollectiveAxis::X, l)?.scale_real(2.0))?;
            let model = SpectralModel::band_pass(p.gamma0, probe.window.0, probe.window.1)?;
            let model = match p.xi_override {
                Some(x) => model.with_xi(x)?,
                None => model,
            };
            let system = SystemSpec::new(h, vec![BathSpec::single("SA", a, model)?])?;
            let start = DickeIndex::new(l, -0.5)?;
            let rho = DensityMatrix::basis_state(l + 1, start.ladder_position());
            evolve_dense(cfg, &system, &rho, cfg.engine.unwrap_or(Engine::Redfield), "evolve superabsorption")
        }
        ScenarioKind::Engine => {
            let omega_q = cfg.omega_q.unwrap_or(1.0);
            let net = engine_network(&engine_rates(cfg)?, omega_q, l)?;
            evolve_network(cfg, &net, &[0.0, 1.0], "evolve engine")
        }
        ScenarioKind::Battery => {
            let p = battery_params(cfg, l)?;
            let lf = l as f64;
            let (net, _, _) = battery_network(&p, lf * lf)?;
            evolve_network(cfg, &net, &[0.0, 0.0, 1.0], "evolve battery")
        }
    }
}

