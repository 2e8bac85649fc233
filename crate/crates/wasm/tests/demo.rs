use heatlab_wasm::{cascade_data, charging_data, scaling_data};

#[test]
fn cascade_starts_at_closed_form() {
    let c = cascade_data(3, 1.0, 1.0, 5.0, 101).unwrap();
    assert_eq!(c.t.len(), 101);
    assert!((c.t[100] - 5.0).abs() < 1e-12);
    assert!((c.j0 + 4.0).abs() < 1e-12);
    assert!((c.current[0] + 4.0).abs() < 1e-12);
    assert!((c.parallel_current[0] + 3.0).abs() < 1e-12);
    assert!(c.j0.abs() <= c.bound2 && c.bound2 <= c.bound1);
    let drop = c.energy[0] - c.energy[100];
    assert!((drop - c.emitted_energy).abs() < 1e-9);
    // trapezoid integral of the current matches the energy change
    let integral: f64 = c.t.windows(2).zip(c.current.windows(2)).map(|(t, j)| 0.5 * (t[1] - t[0]) * (j[0] + j[1])).sum();
    assert!((integral + drop).abs() < 1e-2 * drop);
}

#[test]
fn scaling_exponents() {
    let m = scaling_data("mbody", 2, 6, 1).unwrap();
    assert!((m.fitted_exponent - 3.0).abs() < 1e-9);
    let s = scaling_data("superradiance", 101, 1001, 100).unwrap();
    assert!((s.fitted_exponent - 2.0).abs() < 0.01);
    assert!(s.samples.iter().all(|x| x.bounds_hold()));
}

#[test]
fn charging_ratio_is_l_squared() {
    let c = charging_data(4, 0.5, 2.0, 6.0, 50).unwrap();
    assert!((c.charging_time_ratio - 16.0).abs() < 1e-6 * 16.0);
    assert!(c.collective[1] > c.parallel[1]);
    assert!((c.collective[49] - c.steady_energy).abs() < 1e-6 * c.steady_energy, "{} {}", c.collective[49], c.steady_energy);
    assert_eq!(c.collective[0], 0.0);
}

#[test]
fn rejects_bad_input() {
    assert!(cascade_data(0, 1.0, 1.0, 1.0, 10).is_err());
    assert!(cascade_data(3, 1.0, 1.0, -1.0, 10).is_err());
    assert!(scaling_data("mbody", 2, 20, 1).is_err());
    assert!(scaling_data("nope", 2, 5, 1).is_err());
    assert!(charging_data(3, 0.5, 2.0, 1.0, 1).is_err());
}
