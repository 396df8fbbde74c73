use approx::assert_relative_eq;
use nsflab::nsf_solver::{
    entropy_production_integral, run, BoundaryKind, Dissipation, FluidField, Grid, Monitor, Primitive, RunConfig, SchemeOptions, Solver,
    StepView,
};
use nsflab::relative_energy::*;
use nsflab::thermodynamics::{GasModel, ThermoState};
use nsflab::transport::TransportModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn st(rho: f64, theta: f64) -> ThermoState {
    ThermoState { rho, theta }
}

fn base(r: f64, theta: f64, u: [f64; 2]) -> BaseState {
    BaseState { r, theta, u }
}

/// Second differences of `(ρ, θ) ↦ H_Θ(ρ, θ)` at the base point.
fn hessian_oracle(gas: &GasModel, r: f64, big_theta: f64) -> [[f64; 2]; 2] {
    let h = 1e-4;
    let f = |dr: f64, dt: f64| ballistic_free_energy(gas, st(r + dr, big_theta + dt), big_theta);
    let hrr = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
    let htt = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
    let hrt = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
    [[hrr, hrt], [hrt, htt]]
}

#[test]
fn free_energy_at_coinciding_temperature() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    let s = st(1.3, 0.8);
    let expected = s.rho * (gas.internal_energy(s) - s.theta * gas.entropy(s));
    assert_relative_eq!(ballistic_free_energy(&gas, s, s.theta), expected, max_relative = 1e-15);
}

#[test]
fn free_energy_gamma_two_example() {
    // γ = 2, Z̲ = 1, ρ = 0.5, θ = 1: e = θ = 1 and s = −log ρ + 1.
    let gas = GasModel::new(2.0, 1.0).unwrap();
    let s = 0.5_f64.ln().abs() + 1.0;
    assert_relative_eq!(ballistic_free_energy(&gas, st(0.5, 1.0), 1.0), 0.5 * (1.0 - s), max_relative = 1e-14);
}

#[test]
fn radiation_augmentation_is_additive() {
    let a = 0.7;
    let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(a).unwrap();
    let (s, big) = (st(1.2, 1.5), 0.9);
    let th3 = s.theta.powi(3);
    let radiation = a * th3 * s.theta - big * 4.0 * a * th3 / 3.0;
    let diff = augmented_ballistic_free_energy(&gas, s, big) - ballistic_free_energy(&gas, s, big);
    assert_relative_eq!(diff, radiation, max_relative = 1e-13);
}

#[test]
fn relative_energy_vanishes_at_base_point() {
    let gas = GasModel::new(5.0 / 3.0, 2.0).unwrap();
    for &(r, t) in &[(0.5, 2.0), (1.0, 1.0), (3.0, 0.2)] {
        let b = base(r, t, [0.3, -0.1]);
        assert!(relative_energy(&gas, st(r, t), b.u, &b).abs() < 1e-13);
    }
}

#[test]
fn relative_energy_velocity_only() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    let b = base(1.2, 0.7, [0.1, 0.2]);
    let e = relative_energy(&gas, st(1.2, 0.7), [0.4, -0.2], &b);
    assert_relative_eq!(e, 0.5 * 1.2 * (0.09 + 0.16), max_relative = 1e-12);
}

#[test]
fn relative_energy_matches_hessian_quadratic_form() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    for &(r, t) in &[(1.0, 1.0), (0.8, 1.7), (2.0, 0.9)] {
        let hs = hessian_oracle(&gas, r, t);
        let (dr, dt) = (0.01, 0.01);
        let quad = 0.5 * (hs[0][0] * dr * dr + 2.0 * hs[0][1] * dr * dt + hs[1][1] * dt * dt);
        let e = relative_energy(&gas, st(r + dr, t + dt), [0.0, 0.0], &base(r, t, [0.0, 0.0]));
        assert!(e > 0.0);
        assert_relative_eq!(e, quad, max_relative = 0.03);
    }
}

#[test]
fn radiation_gap_examples() {
    assert_eq!(radiation_gap(0.0, 2.0, 1.0), 0.0);
    assert_eq!(radiation_gap(1.3, 0.7, 0.7), 0.0);
    assert_relative_eq!(radiation_gap(1.0, 2.0, 1.0), 17.0 / 3.0, max_relative = 1e-15);
    let gas = GasModel::new(1.4, 3.0).unwrap();
    let b = base(1.0, 1.0, [0.0; 2]);
    let s = st(1.1, 1.2);
    assert_eq!(augmented_relative_energy(&gas, s, [0.0; 2], &b), relative_energy(&gas, s, [0.0; 2], &b));
}

#[test]
fn augmented_relative_energy_is_the_total_bregman_distance() {
    let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(0.4).unwrap();
    let (r, big) = (1.1, 0.9);
    let h = 1e-6;
    let hb = |rho: f64| augmented_ballistic_free_energy(&gas, st(rho, big), big);
    let dh = (hb(r + h) - hb(r - h)) / (2.0 * h);
    let s = st(1.4, 1.3);
    let oracle = augmented_ballistic_free_energy(&gas, s, big) - dh * (s.rho - r) - hb(r);
    let value = augmented_relative_energy(&gas, s, [0.0; 2], &base(r, big, [0.0; 2]));
    assert_relative_eq!(value, oracle, max_relative = 1e-8);
}

#[test]
fn density_derivative_matches_finite_difference() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    for &(r, t) in &[(1.0, 0.5), (0.3, 2.0), (4.0, 0.3)] {
        let h = 1e-6 * r;
        let f = |rho: f64| ballistic_free_energy(&gas, st(rho, t), 0.8);
        let fd = (f(r + h) - f(r - h)) / (2.0 * h);
        assert_relative_eq!(free_energy_density_derivative(&gas, st(r, t), 0.8), fd, max_relative = 1e-7, epsilon = 1e-8);
    }
}

#[test]
fn cutoff_partition() {
    let c = EssResCutoff::with_box(0.5, 2.0, 0.5, 2.0).unwrap();
    let inside = c.split(st(1.0, 1.0), 3.5);
    assert_eq!(inside, (3.5, 0.0));
    let far = c.split(st(10.0, 1.0), 3.5);
    assert_eq!(far, (0.0, 3.5));
    for &s in &[st(0.3, 1.0), st(2.5, 3.0), st(1.0, 0.26)] {
        let (e, r) = c.split(s, 1.7);
        assert_eq!(e + r, 1.7);
        assert!(e > 0.0 && r > 0.0);
    }
    assert!(EssResCutoff::with_box(2.0, 1.0, 0.5, 1.0).is_err());
}

fn cloud(n: usize, seed: u64, spread: f64) -> Vec<CoercivitySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let b = base(rng.gen_range(0.8..1.5), rng.gen_range(0.8..1.5), [rng.gen_range(-0.5..0.5), 0.0]);
            let state = st(b.r * (1.0 + spread * rng.gen_range(-0.5..0.5)), b.theta * (1.0 + spread * rng.gen_range(-0.5..0.5)));
            let u = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            CoercivitySample { state, u, base: b }
        })
        .collect()
}

#[test]
fn coercivity_inside_the_box() {
    let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(0.1).unwrap();
    let cutoff = EssResCutoff::with_box(0.5, 2.0, 0.5, 2.0).unwrap();
    let rep = coercivity_check(&gas, &cutoff, &cloud(5000, 7, 0.8)).unwrap();
    assert!(rep.quadratic > 0.0 && rep.quadratic_samples == 5000, "{rep:?}");
}

#[test]
fn coercivity_limit_at_base_point() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    let cutoff = EssResCutoff::with_box(0.5, 2.0, 0.5, 2.0).unwrap();
    let (r, t) = (1.2, 0.9);
    let hs = hessian_oracle(&gas, r, t);
    // Hessian of H_Θ plus the kinetic block r I, halved; it is diagonal at θ = Θ.
    assert!(hs[0][1].abs() < 1e-5 * hs[0][0].abs());
    let oracle = (0.5 * hs[0][0]).min(0.5 * hs[1][1]).min(0.5 * r);
    let b = base(r, t, [0.0; 2]);
    assert_relative_eq!(quadratic_coercivity_limit(&gas, &b), oracle, max_relative = 1e-6);
    let eps = 1e-4;
    let samples: Vec<_> = [(eps, 0.0, 0.0), (0.0, eps, 0.0), (0.0, 0.0, eps)]
        .iter()
        .map(|&(dr, dt, du)| CoercivitySample { state: st(r + dr, t + dt), u: [du, 0.0], base: b })
        .collect();
    let rep = coercivity_check(&gas, &cutoff, &samples).unwrap();
    assert_relative_eq!(rep.quadratic, oracle, max_relative = 1e-3);
}

#[test]
fn coercivity_residual_sample() {
    let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(0.1).unwrap();
    let cutoff = EssResCutoff::with_box(0.5, 2.0, 0.5, 2.0).unwrap();
    let b = base(1.0, 1.0, [0.0; 2]);
    let huge = CoercivitySample { state: st(1e3, 1.0), u: [0.0; 2], base: b };
    let rep = coercivity_check(&gas, &cutoff, &[huge]).unwrap();
    assert_eq!(rep.residual_samples, 1);
    assert!(rep.residual > 0.0 && rep.residual_augmented > 0.0);
    let s = huge.state;
    let e = relative_energy(&gas, s, [0.0; 2], &b);
    let rho_e = s.rho * gas.internal_energy(s);
    assert!(e >= rep.residual * rho_e);
}

#[test]
fn basic_estimates_hold_with_finite_constants() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let states: Vec<_> = (0..2000).map(|_| st(10f64.powf(rng.gen_range(-3.0..3.0)), 10f64.powf(rng.gen_range(-2.0..2.0)))).collect();
    let est = basic_estimates(&gas, &states);
    assert!(est.energy_constant.is_finite() && est.energy_constant > 0.0);
    assert!(est.entropy_constant.is_finite());
    assert!(est.min_entropy >= 0.0, "{est:?}");
}

fn uniform_field(gas: &GasModel, n: usize, theta: f64, u: [f64; 2]) -> FluidField {
    let grid = Grid::channel(n, n).unwrap();
    FluidField::initialize(gas, grid, BoundaryKind::Slip, |_, _| Primitive { rho: 1.0, u, theta }).unwrap()
}

#[test]
fn total_energy_uniform_example() {
    // ρ = θ = 1, u = 0, a = 1, γ = 2 on the unit square: e = 1, ℰ = 1 + 1.
    let gas = GasModel::new(2.0, 1.0).unwrap().with_radiation(1.0).unwrap();
    let f = uniform_field(&gas, 8, 1.0, [0.0; 2]);
    assert_relative_eq!(total_energy(&gas, &f), 2.0, max_relative = 1e-14);
    let cold = GasModel::new(2.0, 1.0).unwrap();
    let g = uniform_field(&cold, 8, 1.0, [0.0; 2]);
    assert_relative_eq!(total_energy(&cold, &g), 1.0, max_relative = 1e-14);
}

#[test]
fn dissipation_of_a_pure_shear() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    let transport = TransportModel::new(0.5).unwrap();
    let (n, c, theta) = (8usize, 0.6, 1.3);
    let grid = Grid::channel(n, n).unwrap();
    let f = FluidField::initialize(&gas, grid, BoundaryKind::Slip, |_, y| Primitive { rho: 1.0, u: [c * y, 0.0], theta }).unwrap();
    let mu = 0.01;
    // |∇u + ∇uᵀ − div I|² = 2g² with g = c inside and c/2 in wall rows (mirrored ghosts).
    let h2 = grid.cell_area();
    let per_cell = |g: f64| mu * transport.shear_viscosity(theta) / theta * 2.0 * g * g * h2;
    let expected = (n * (n - 2)) as f64 * per_cell(c) + (2 * n) as f64 * per_cell(0.5 * c);
    let d = dissipation_functional(&transport, &f, Dissipation { mu, kappa: 0.0 });
    assert_relative_eq!(d, expected, max_relative = 1e-12);
    let d2 = dissipation_functional(&transport, &f, Dissipation { mu: 2.0 * mu, kappa: 0.5 });
    assert_relative_eq!(d2, 2.0 * d, max_relative = 1e-12);
    assert_eq!(dissipation_functional(&transport, &uniform_field(&gas, 8, 1.0, [0.0; 2]), Dissipation { mu: 1.0, kappa: 1.0 }), 0.0);
}

#[test]
fn consistency_terms_uniform_example() {
    let transport = TransportModel::new(1.0).unwrap();
    let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(3.0).unwrap();
    let f = uniform_field(&gas, 8, 1.0, [0.0; 2]);
    let t = consistency_terms(&gas, &transport, &f, Dissipation { mu: 0.1, kappa: 0.1 });
    assert_relative_eq!(t.norms[0], 1.0, max_relative = 1e-14);
    assert_relative_eq!(t.norms[2], 4.0, max_relative = 1e-14);
    assert_relative_eq!(t.norms[5], 3.0, max_relative = 1e-14);
    assert_eq!(t.norms[1], 0.0);
    assert_eq!(t.norms[3], 0.0);
    assert_eq!(t.norms[4], 0.0);

    let cold = GasModel::new(1.4, 3.0).unwrap();
    let g = FluidField::initialize(&cold, *f.grid(), BoundaryKind::Slip, |x, y| Primitive {
        rho: 1.0 + 0.2 * x,
        u: [y, x],
        theta: 1.0 + 0.1 * y,
    })
    .unwrap();
    let z = consistency_terms(&cold, &transport, &g, Dissipation::NONE);
    assert!(z.norms.iter().all(|&v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sixth_term_is_three_times_the_first(a in 0.0..5.0_f64, amp in 0.0..0.5_f64, k in 1u32..3) {
        let transport = TransportModel::new(1.0).unwrap();
        let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(a).unwrap();
        let grid = Grid::channel(8, 8).unwrap();
        let f = FluidField::initialize(&gas, grid, BoundaryKind::Slip, |x, y| Primitive {
            rho: 1.0,
            u: [0.0, 0.0],
            theta: 1.0 + amp * (std::f64::consts::PI * k as f64 * (x + y)).sin(),
        }).unwrap();
        let t = consistency_terms(&gas, &transport, &f, Dissipation::NONE);
        prop_assert!((t.norms[5] - 3.0 * t.norms[0]).abs() <= 1e-13 * t.norms[5].max(1e-300));
    }

    #[test]
    fn bregman_positivity(r in 0.1..5.0_f64, big in 0.1..5.0_f64, rho in 0.01..20.0_f64, theta in 0.01..20.0_f64,
                          a in 0.0..2.0_f64, gamma in prop::sample::select(vec![1.4, 5.0 / 3.0, 2.0])) {
        let gas = GasModel::new(gamma, 2.0).unwrap().with_radiation(a).unwrap();
        let b = base(r, big, [0.1, 0.0]);
        let e = relative_energy(&gas, st(rho, theta), [0.3, 0.2], &b);
        let scale = 1.0 + ballistic_free_energy(&gas, st(rho, theta), big).abs();
        prop_assert!(e >= -1e-12 * scale);
        prop_assert!(augmented_relative_energy(&gas, st(rho, theta), [0.3, 0.2], &b) >= e - 1e-12 * scale);
    }

    #[test]
    fn radiation_gap_nonnegative(a in 0.0..10.0_f64, theta in 1e-3..10.0_f64, big in 1e-3..10.0_f64) {
        let g = radiation_gap(a, theta, big);
        prop_assert!(g >= -1e-12 * a * (theta.powi(4) + big.powi(4)));
    }
}

struct ConstantTrio(TrioPoint);

impl TestTrio for ConstantTrio {
    fn eval(&self, _: f64, _: f64, _: f64) -> TrioPoint {
        self.0
    }
}

/// Accumulates `Σ dt · ∫σ/θ` at step midpoints.
struct ProductionOracle {
    transport: TransportModel,
    coeffs: Dissipation,
    total: f64,
}

impl Monitor for ProductionOracle {
    fn step(&mut self, v: &StepView<'_>) -> nsflab::Result<()> {
        self.total += v.dt() * entropy_production_integral(&self.transport, v.mid, self.coeffs);
        Ok(())
    }
}

#[test]
fn constant_trio_gap_reduces_to_entropy_balance() {
    let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(0.05).unwrap();
    let transport = TransportModel::new(1.0).unwrap();
    let coeffs = Dissipation { mu: 0.02, kappa: 0.02 };
    let grid = Grid::channel(16, 8).unwrap();
    let data = |x: f64, y: f64| Primitive {
        rho: 1.0 + 0.2 * (std::f64::consts::PI * x).cos(),
        u: [0.2 * (2.0 * std::f64::consts::PI * y).sin(), 0.0],
        theta: 1.0 + 0.1 * (std::f64::consts::PI * y).cos(),
    };
    let field = FluidField::initialize(&gas, grid, BoundaryKind::Slip, data).unwrap();
    let (r, big) = (1.1, 0.95);
    let trio = ConstantTrio(TrioPoint::constant(r, big, [0.0; 2]));
    let mut ineq = InequalityMonitor::new(gas, transport, coeffs, trio);
    let mut oracle = ProductionOracle { transport, coeffs, total: 0.0 };
    let mut solver = Solver::new(gas, transport, coeffs, SchemeOptions::default()).unwrap();
    let e0 = field.total_energy();
    let s0 = field.total_entropy(&gas);
    let m0 = field.total_mass();
    let out = run(&mut solver, field, &RunConfig::uniform(0.1, 2), &mut [&mut ineq, &mut oracle]).unwrap();
    let f = &out.field;
    let dh = free_energy_density_derivative(&gas, st(r, big), big);
    let expected = -(f.total_energy() - e0) + big * (f.total_entropy(&gas) - s0 - oracle.total) + dh * (f.total_mass() - m0);
    let last = ineq.samples().last().unwrap();
    assert_eq!(last.rhs, 0.0);
    assert!((last.gap - expected).abs() < 1e-12, "{} vs {}", last.gap, expected);
}

#[test]
fn two_grid_tolerance_pairs_samples_by_time() {
    let mk = |t: f64, gap: f64| GapSample {
        t,
        rel_energy: 0.0,
        dissipation: 0.0,
        lhs: 0.0,
        rhs: gap,
        gap,
        terms: RhsTerms::default(),
        scale: 1.0,
    };
    let tol = two_grid_tolerance(&[mk(0.5, 1e-3), mk(1.0, 2e-3)], &[mk(0.5, 4e-3), mk(1.0, -1e-3)]);
    assert_relative_eq!(tol[0], 3e-3 + 1e-10 + 1e-14, max_relative = 1e-12);
    assert_relative_eq!(tol[1], 3e-3 + 1e-10 + 1e-14, max_relative = 1e-12);
}

#[test]
fn trivial_run_passes_the_bound_check() {
    let gas = GasModel::new(1.4, 3.0).unwrap();
    let transport = TransportModel::new(1.0).unwrap();
    let mut mon = ConsistencyMonitor::new(gas, transport, Dissipation::NONE);
    let field = uniform_field(&gas, 8, 1.0, [0.0; 2]);
    let mut solver = Solver::new(gas, transport, Dissipation::NONE, SchemeOptions::default()).unwrap();
    run(&mut solver, field, &RunConfig::uniform(0.05, 1), &mut [&mut mon]).unwrap();
    let verdict = consistency_bound_check(&[mon.into_report()], 0.5).unwrap();
    assert!(verdict.passed());
    assert!(verdict.chains.is_empty());
    assert!(verdict.terms.iter().all(|t| t.constants.iter().all(|&c| c == 0.0)));
}

#[test]
fn heat_chain_holds_term_by_term() {
    let alpha = 1.0;
    let transport = TransportModel::new(alpha).unwrap();
    let mut reports = Vec::new();
    for n in 0..3 {
        let mu: f64 = 0.1 * 0.5f64.powi(n);
        let a = mu.powf(4.0 / (1.0 + alpha));
        let kappa = a.powf(0.75) * mu.sqrt();
        let gas = GasModel::new(1.4, 3.0).unwrap().with_radiation(a).unwrap();
        let coeffs = Dissipation { mu, kappa };
        let grid = Grid::channel(16, 8).unwrap();
        let field = FluidField::initialize(&gas, grid, BoundaryKind::Slip, |x, y| Primitive {
            rho: 1.0 + 0.2 * (std::f64::consts::PI * x).cos(),
            u: [0.2 * (std::f64::consts::PI * y).cos(), 0.0],
            theta: 1.0 + 0.3 * (std::f64::consts::PI * y).cos(),
        })
        .unwrap();
        let mut mon = ConsistencyMonitor::new(gas, transport, coeffs);
        let mut solver = Solver::new(gas, transport, coeffs, SchemeOptions::default()).unwrap();
        run(&mut solver, field, &RunConfig::uniform(0.05, 1), &mut [&mut mon]).unwrap();
        reports.push(mon.into_report());
    }
    let verdict = consistency_bound_check(&reports, 0.5).unwrap();
    let heat: Vec<_> = verdict.chains.iter().filter(|c| c.chain == "heat").collect();
    assert_eq!(heat.len(), 9);
    for step in &heat {
        assert!(step.holds(), "{step:?}");
    }
    assert!(verdict.chains.iter().all(ChainStep::holds));
    assert!(verdict.max_identity_mismatch < 1e-10, "{}", verdict.max_identity_mismatch);
    let r = &reports[0];
    // first heat step recomputed from the report
    let lhs = r.norms[4];
    let rhs = 0.5 * r.dissipation_heat + r.kappa / 2.0 * r.int_kappa;
    assert!(lhs <= rhs);
}
