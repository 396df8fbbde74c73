use approx::assert_relative_eq;
use nsflab::thermodynamics::*;
use proptest::prelude::*;

fn gas2() -> GasModel {
    GasModel::new(2.0, 1.0).unwrap()
}

fn st(rho: f64, theta: f64) -> ThermoState {
    ThermoState::new(rho, theta).unwrap()
}

#[test]
fn rejects_bad_parameters() {
    assert!(GasModel::new(1.0, 1.0).is_err());
    assert!(GasModel::new(0.5, 1.0).is_err());
    assert!(GasModel::new(1.4, 0.0).is_err());
    assert!(GasModel::new(1.4, -2.0).is_err());
    assert!(gas2().with_radiation(-1.0).is_err());
    assert!(ThermoState::new(0.0, 1.0).is_err());
    assert!(ThermoState::new(1.0, -1.0).is_err());
}

#[test]
fn structure_function_values() {
    let g = gas2();
    assert_eq!(g.structure_p(0.5), 0.5);
    assert_relative_eq!(g.structure_p(2.0), 2.5, max_relative = 1e-15);
    // both branches give S(1) = 1
    assert_eq!(1.0 - 1.0_f64.ln(), 1.0);
    assert_relative_eq!(g.structure_s(1.0), 1.0);
    assert_relative_eq!(g.structure_s(1.0 + 1e-12), 1.0, max_relative = 1e-11);
    assert_eq!(g.structure_p(0.0), 0.0);
}

#[test]
fn identity_branch_holds_for_any_threshold() {
    for &zt in &[0.1, 1.0, 4.0, 25.0] {
        let g = GasModel::new(1.4, zt).unwrap();
        for k in 1..=10 {
            let z = zt * k as f64 / 10.0;
            assert_relative_eq!(g.structure_p(z), z, max_relative = 1e-14);
        }
    }
}

#[test]
fn seam_is_c1() {
    for &gamma in &[1.4, 5.0 / 3.0, 2.0] {
        for &zt in &[0.5, 1.0, 3.0] {
            let g = GasModel::new(gamma, zt).unwrap();
            let lo = zt * (1.0 - 1e-12);
            let hi = zt * (1.0 + 1e-12);
            assert_relative_eq!(g.structure_p(lo), g.structure_p(hi), max_relative = 1e-10);
            assert_relative_eq!(g.structure_dp(lo), 1.0, max_relative = 1e-10);
            assert_relative_eq!(g.structure_dp(hi), 1.0, max_relative = 1e-10);
            assert_relative_eq!(g.structure_s(lo), g.structure_s(hi), max_relative = 1e-10);
            assert_relative_eq!(g.structure_ds(lo), g.structure_ds(hi), max_relative = 1e-10);
        }
    }
}

#[test]
fn pressure_examples() {
    let g = gas2();
    assert_eq!(g.pressure(st(0.5, 1.0)), 0.5);
    assert_relative_eq!(g.pressure(st(2.0, 1.0)), 2.5, max_relative = 1e-14);
    assert!(g.pressure(st(1e-300, 1.0)) < 1e-299);
}

#[test]
fn energy_examples() {
    let g = gas2();
    assert_relative_eq!(g.internal_energy(st(0.3, 0.7)), 0.7, max_relative = 1e-15);
    let e = g.internal_energy(st(2.0, 1.0));
    assert_relative_eq!(e, 1.25, max_relative = 1e-14);
    assert_relative_eq!((g.gamma() - 1.0) * 2.0 * e, 2.5, max_relative = 1e-14);
}

#[test]
fn entropy_examples() {
    let g = gas2();
    assert_relative_eq!(g.entropy(st(1.0, 4.0)), 1.0 + 4.0_f64.ln(), max_relative = 1e-14);
    assert_relative_eq!(g.entropy(st(1.0, 4.0)), 2.386294361, max_relative = 1e-9);
    assert_relative_eq!(g.entropy(st(2.0, 1.0)), 0.5, max_relative = 1e-14);
    let mut prev = f64::INFINITY;
    for k in 0..40 {
        let theta = 2.0_f64.powi(-k);
        let s = g.entropy(st(1.0, theta));
        assert!(s > 0.0 && s < prev);
        prev = s;
    }
    assert!(prev < 1e-10);
}

#[test]
fn radiation_examples() {
    let s = st(1.0, 1.0);
    let r = radiation_components(0.0, st(3.0, 7.0)).unwrap();
    assert_eq!((r.pressure, r.energy, r.entropy), (0.0, 0.0, 0.0));
    let r = radiation_components(3.0, s).unwrap();
    assert_relative_eq!(r.pressure, 1.0);
    assert_relative_eq!(r.energy, 3.0);
    assert_relative_eq!(r.entropy, 4.0);
    let r = radiation_components(1.0, st(2.0, 2.0)).unwrap();
    assert_relative_eq!(r.pressure, 16.0 / 3.0, max_relative = 1e-15);
    assert_relative_eq!(r.energy, 8.0, max_relative = 1e-15);
    // 4aθ³/(3ρ) = 32/6
    assert_relative_eq!(r.entropy, 16.0 / 3.0, max_relative = 1e-15);
    assert!(radiation_components(-1.0, s).is_err());
}

#[test]
fn gibbs_examples() {
    let g = gas2();
    let (r1, r2) = gibbs_residual(&g, st(0.5, 1.0), 1e-4).unwrap();
    assert!(r1.abs() < 1e-6 && r2.abs() < 1e-6, "{r1} {r2}");
    let (r1, r2) = gibbs_residual(&g, st(4.0, 1.0), 1e-4).unwrap();
    assert!(r1.abs() < 1e-6 && r2.abs() < 1e-6, "{r1} {r2}");
    assert!(gibbs_residual(&g, st(1e-5, 1.0), 1e-4).is_err());
}

#[test]
fn gibbs_second_order() {
    let g = gas2();
    for s in [st(0.5, 1.0), st(4.0, 1.0), st(0.2, 3.0)] {
        let (a1, a2) = gibbs_residual(&g, s, 2e-2).unwrap();
        let (b1, b2) = gibbs_residual(&g, s, 1e-2).unwrap();
        let big = if a1.abs() > a2.abs() { (a1, b1) } else { (a2, b2) };
        let ratio = big.0 / big.1;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio} at {s:?}");
    }
}

#[test]
fn stability_examples() {
    let g = gas2();
    let zs = log_spaced(0.1, 10.0, 50);
    let rep = stability_check(&g, &zs).unwrap();
    assert_relative_eq!(rep.observed_bound, 1.0, max_relative = 1e-14);
    assert!(rep.min_dp > 0.0 && rep.min_margin > 0.0);
    assert!(rep.max_entropy_slope_deviation < 1e-12);
    // Z > Z̲: γP − P'Z = γ − 1 and S' = −1/Z²
    for z in [1.5, 3.0, 9.0] {
        assert_relative_eq!(g.stability_margin(z), 1.0, max_relative = 1e-13);
        assert_relative_eq!(g.structure_ds(z), -1.0 / (z * z), max_relative = 1e-14);
    }
    assert!(stability_check(&g, &[]).is_err());
    assert!(stability_check(&g, &[0.0]).is_err());
}

#[test]
fn partials_match_finite_differences() {
    for &(gamma, zt) in &[(1.4, 2.0), (2.0, 1.0), (5.0 / 3.0, 0.3)] {
        let g = GasModel::new(gamma, zt).unwrap();
        for &(rho, theta) in &[(0.25, 1.0), (1.0, 0.5), (5.0, 0.7), (20.0, 2.0)] {
            let s = st(rho, theta);
            let d = g.partials(s);
            let h = 1e-6;
            let fd =
                |f: &dyn Fn(ThermoState) -> f64, dr: f64, dt: f64| (f(st(rho + dr, theta + dt)) - f(st(rho - dr, theta - dt))) / (2.0 * h);
            let p = |x| g.pressure(x);
            let e = |x| g.internal_energy(x);
            let sf = |x| g.entropy(x);
            assert_relative_eq!(d.p, g.pressure(s), max_relative = 1e-13);
            assert_relative_eq!(d.e, g.internal_energy(s), max_relative = 1e-13);
            assert_relative_eq!(d.p_rho, fd(&p, h, 0.0), max_relative = 1e-6);
            assert_relative_eq!(d.p_theta, fd(&p, 0.0, h), max_relative = 1e-6);
            assert_relative_eq!(d.e_theta, fd(&e, 0.0, h), max_relative = 1e-6);
            assert_relative_eq!(d.s_rho, fd(&sf, h, 0.0), max_relative = 1e-6);
            assert_relative_eq!(d.s_theta, fd(&sf, 0.0, h), max_relative = 1e-6);
            assert!(
                (d.e_rho - fd(&e, h, 0.0)).abs() < 1e-6 * (1.0 + d.e_rho.abs()),
                "{gamma} {zt} {rho} {theta} {} {}",
                d.e_rho,
                fd(&e, h, 0.0)
            );
        }
    }
}

#[test]
fn ideal_sound_speed() {
    let g = GasModel::new(2.0, 10.0).unwrap();
    assert_relative_eq!(g.sound_speed(st(1.0, 1.0)), 2.0_f64.sqrt(), max_relative = 1e-14);
}

#[test]
fn inversions_round_trip() {
    let g = GasModel::new(1.4, 2.0).unwrap().with_radiation(0.3).unwrap();
    for &(rho, theta) in &[(0.5, 1.0), (1.0, 0.2), (8.0, 0.5), (0.01, 30.0)] {
        let s = st(rho, theta);
        let re = rho * g.total_internal_energy(s);
        let t = g.temperature_from_energy(rho, re, 1.0).unwrap();
        assert_relative_eq!(t, theta, max_relative = 1e-12);
        let t = g.temperature_from_pressure(rho, g.total_pressure(s), 0.1).unwrap();
        assert_relative_eq!(t, theta, max_relative = 1e-12);
    }
    assert!(g.temperature_from_energy(1.0, 0.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn closure_identity(gamma in 1.05f64..3.0, zt in 0.1f64..10.0, rho in 1e-3f64..1e3, theta in 1e-3f64..1e3) {
        let g = GasModel::new(gamma, zt).unwrap();
        let s = st(rho, theta);
        let p = g.pressure(s);
        let e = g.internal_energy(s);
        prop_assert!(((p - (gamma - 1.0) * rho * e) / p).abs() < 1e-13);
        prop_assert!(p > 0.0 && e > 0.0 && g.entropy(s) > 0.0);
    }

    #[test]
    fn radiation_gap_nonnegative(a in 0.0f64..10.0, t in 0.0f64..10.0, big_t in 0.0f64..10.0) {
        let gap = a * (t.powi(4) - big_t.powi(4)) + 4.0 * a / 3.0 * big_t * (big_t.powi(3) - t.powi(3));
        prop_assert!(gap >= -1e-12 * (1.0 + a * (t.powi(4) + big_t.powi(4))));
    }
}
