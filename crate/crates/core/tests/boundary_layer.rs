use std::f64::consts::PI;

use approx::assert_relative_eq;
use nsflab::boundary_layer::*;
use nsflab::euler_reference::{CosineProfile, EulerSolution};
use nsflab::nsf_solver::{BoundaryKind, FluidField, Grid, Primitive};
use nsflab::relative_energy::TestTrio;
use nsflab::thermodynamics::GasModel;
use nsflab::transport::TransportModel;
use nsflab::Error;
use proptest::prelude::*;

const T: f64 = 0.5;

fn traveling(speed: f64) -> EulerSolution {
    EulerSolution::traveling(2.0, 1.0, speed, CosineProfile::new(0.2, 1).unwrap()).unwrap()
}

fn field(bc: BoundaryKind, data: impl Fn(f64, f64) -> Primitive) -> FluidField {
    let gas = GasModel::new(1.4, 50.0).unwrap();
    FluidField::initialize(&gas, Grid::channel(64, 32).unwrap(), bc, data).unwrap()
}

fn at_rest(_: f64, _: f64) -> Primitive {
    Primitive { rho: 1.0, u: [0.0, 0.0], theta: 1.0 }
}

fn transport(alpha: f64) -> TransportModel {
    TransportModel::new(alpha).unwrap()
}

fn accumulated(kind: KatoCriterion, alpha: f64, mu: f64, delta: f64, f: &FluidField) -> Vec<f64> {
    let mut m = KatoMonitor::new(kind, transport(alpha), mu, delta, f.grid()).unwrap();
    m.accumulate(f, T);
    m.into_report().values
}

#[test]
fn split_examples() {
    let g = BoundaryGeometry;
    assert_eq!(g.split(0.3, 0.1, [1.0, 0.0]), ([0.0, 0.0], [1.0, 0.0]));
    assert_eq!(g.split(0.3, 0.1, [0.0, 1.0]), ([0.0, 1.0], [0.0, 0.0]));
    assert_eq!(g.distance_gradient(0.0, 0.9), [0.0, -1.0]);
    assert_eq!(g.outer_normal(0.0, 0.1), [0.0, -1.0]);
    assert_eq!(g.projection(0.7, 0.8), (0.7, 1.0));
    assert_eq!(g.distance(0.7, 0.8), 1.0 - 0.8);
}

#[test]
fn field_split_recomposes() {
    let f = field(BoundaryKind::Slip, |x, y| Primitive { rho: 1.0, u: [x.sin(), y.cos()], theta: 1.0 });
    let (n, t) = normal_tangential_split(&BoundaryGeometry, &f);
    let grid = *f.grid();
    for (c, (i, j)) in grid.cells().enumerate() {
        let k = grid.idx(i, j);
        assert_eq!(n[c][0] + t[c][0], f.u[k]);
        assert_eq!(n[c][1] + t[c][1], f.v[k]);
        assert_eq!(n[c][0] * t[c][0] + n[c][1] * t[c][1], 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn split_is_orthogonal_projection(x in 0.0..2.0f64, y in 0.0..1.0f64, w0 in -10.0..10.0f64, w1 in -10.0..10.0f64) {
        let g = BoundaryGeometry;
        let (wn, wt) = g.split(x, y, [w0, w1]);
        prop_assert!((wn[0] * wt[0] + wn[1] * wt[1]).abs() < 1e-14);
        prop_assert_eq!(wn[0] + wt[0], w0);
        prop_assert_eq!(wn[1] + wt[1], w1);
        let (nn, nt) = g.split(x, y, wn);
        prop_assert_eq!(nn, wn);
        prop_assert_eq!(nt, [0.0, 0.0]);
    }
}

#[test]
fn corrector_matches_euler_on_walls() {
    let c = Corrector::new(BoundaryGeometry, traveling(0.5), 0.1).unwrap();
    for y in [0.0, 1.0] {
        assert_eq!(c.eval(0.3, 0.4, y).v, [0.5, 0.0]);
    }
    let trio = CorrectedTrio { corrector: c };
    let p = trio.eval(0.3, 0.4, 0.0);
    assert_eq!(p.u, [0.0, 0.0]);
    assert_relative_eq!(p.r, traveling(0.5).eval(0.3, 0.4, 0.0).r);
}

#[test]
fn corrector_vanishes_outside_layer() {
    let delta = 0.1;
    let c = Corrector::new(BoundaryGeometry, traveling(0.5), delta).unwrap();
    for y in [2.0 * delta, 1.0 - 2.0 * delta, 0.5] {
        let v = c.eval(0.1, 0.2, y);
        assert_eq!(v.v, [0.0, 0.0]);
        assert_eq!(v.grad_v, [[0.0; 2]; 2]);
    }
    let trio = CorrectedTrio { corrector: c };
    assert_eq!(trio.eval(0.1, 0.2, 0.5).u, [0.5, 0.0]);
}

#[test]
fn corrector_of_resting_flow_is_zero() {
    let rest = EulerSolution::stationary(2.0, 1.0, CosineProfile::new(0.2, 1).unwrap()).unwrap();
    let c = Corrector::new(BoundaryGeometry, rest, 0.2).unwrap();
    let grid = Grid::channel(32, 16).unwrap();
    for (i, j) in grid.cells() {
        let (x, y) = grid.center(i, j);
        let v = c.eval(0.0, x, y);
        assert_eq!(v.v, [0.0, 0.0]);
        assert_eq!(v.grad_v, [[0.0; 2]; 2]);
    }
}

#[test]
fn corrector_rejects_bad_thickness() {
    for d in [0.0, -0.1, 0.5, 0.7, f64::NAN] {
        assert!(matches!(Corrector::new(BoundaryGeometry, traveling(0.5), d), Err(Error::InvalidDelta(_))));
    }
}

#[test]
fn corrector_is_divergence_free_and_tangential() {
    let c = Corrector::new(BoundaryGeometry, traveling(0.25), 0.15).unwrap();
    let est = corrector_estimates(&c, &Grid::channel(128, 64).unwrap(), &[0.0, 0.25, 0.5]);
    assert_eq!(est.divergence, 0.0);
    assert_eq!(est.normal_component, 0.0);
    assert_eq!(est.tangential_gradient, 0.0);
    assert_relative_eq!(est.time_and_value, 0.25, max_relative = 1e-2);
}

#[test]
fn corrector_gradient_matches_differences() {
    let c = Corrector::new(BoundaryGeometry, traveling(0.5), 0.2).unwrap();
    let h = 1e-6;
    for (x, y) in [(0.3, 0.05), (0.9, 0.93), (1.4, 0.11)] {
        let g = c.eval(0.2, x, y).grad_v;
        let dy = (c.eval(0.2, x, y + h).v[0] - c.eval(0.2, x, y - h).v[0]) / (2.0 * h);
        assert!((g[0][1] - dy).abs() < 1e-7, "{} {}", g[0][1], dy);
    }
}

#[test]
fn corrector_sweep_scalings() {
    let grid = Grid::channel(256, 128).unwrap();
    let sweep = corrector_sweep(&traveling(0.25), &grid, &[0.2, 0.1, 0.05], &[0.0, 0.5]).unwrap();
    assert!(sweep.passed(), "{sweep:?}");
    assert!(sweep.ratios.iter().all(|&r| r < 2.0));
    assert!((-1.2..=-0.8).contains(&sweep.normal_exponent), "{}", sweep.normal_exponent);
    let products: Vec<f64> = sweep.estimates.iter().map(|e| e.normal_gradient * e.delta).collect();
    for p in &products {
        assert_relative_eq!(*p, products[0], max_relative = 0.1);
    }
}

#[test]
fn kato_vanishes_at_rest() {
    let f = field(BoundaryKind::NoSlip, at_rest);
    assert_eq!(accumulated(KatoCriterion::Gradient, 1.0, 0.1, 0.25, &f), vec![0.0, 0.0]);
    assert_eq!(accumulated(KatoCriterion::Alpha1, 1.0, 0.1, 0.25, &f)[2], 0.0);
    assert_eq!(accumulated(KatoCriterion::Conditional, 1.0 / 3.0, 0.1, 0.25, &f)[2], 0.0);
}

#[test]
fn kato_uniform_temperature_gives_layer_area() {
    let f = field(BoundaryKind::NoSlip, at_rest);
    let lx = f.grid().lx();
    for delta in [0.2, 0.25, 0.31] {
        let a1 = accumulated(KatoCriterion::Alpha1, 1.0, 0.1, delta, &f);
        assert_relative_eq!(a1[0], 0.1 / delta);
        assert_relative_eq!(a1[1], 2.0 * T * lx, max_relative = 1e-13);
        let c = accumulated(KatoCriterion::Conditional, 1.0 / 3.0, 0.1, delta, &f);
        assert_relative_eq!(c[1], 2.0 * T * lx, max_relative = 1e-13);
    }
}

#[test]
fn kato_third_scalar_scales_with_inverse_viscosity() {
    let f =
        field(BoundaryKind::NoSlip, |x, y| Primitive { rho: 1.0 + 0.1 * (2.0 * PI * x).cos(), u: [0.3, 0.2 * (PI * y).sin()], theta: 1.2 });
    let a = accumulated(KatoCriterion::Alpha1, 1.0, 0.1, 0.25, &f);
    let b = accumulated(KatoCriterion::Alpha1, 1.0, 0.2, 0.25, &f);
    assert!(a[2] > 0.0);
    assert_relative_eq!(b[2], 0.5 * a[2], max_relative = 1e-14);
    assert_relative_eq!(b[0], 2.0 * a[0]);
    assert_eq!(a[1], b[1]);
}

#[test]
fn kato_gradient_linear_shear_oracle() {
    let mu = 0.1;
    let f = field(BoundaryKind::NoSlip, |_, y| Primitive { rho: 1.0, u: [y.min(1.0 - y) / mu, 0.0], theta: 1.0 });
    let lx = f.grid().lx();
    let tr = transport(1.0);
    let visc = tr.shear_viscosity(1.0);
    let v = accumulated(KatoCriterion::Gradient, 1.0, mu, 0.25, &f);
    assert_relative_eq!(v[0], 4.0 * visc * visc * T * lx, max_relative = 1e-12);
    assert_relative_eq!(v[1], 2.0 * T * lx, max_relative = 1e-12);
}

#[test]
fn lebesgue_exponents() {
    assert_relative_eq!(momentum_exponent(1.0 / 3.0), 4.0 / 3.0, max_relative = 1e-15);
    assert_relative_eq!(temperature_exponent(1.0 / 3.0), 12.0, max_relative = 1e-14);
    let grid = Grid::channel(4, 4).unwrap();
    let q = 4.0 / 3.0;
    let norm = layer_norm(&grid, &[1.0, 0.5], &[2.0, -3.0], q);
    let oracle = ((2.0f64.powf(q) + 0.5 * 3.0f64.powf(q)) / 16.0).powf(0.75);
    assert_relative_eq!(norm, oracle, max_relative = 1e-14);
    let twelve = layer_norm(&grid, &[1.0, 1.0], &[1.0, 1.0], 12.0);
    assert_relative_eq!(twelve, (2.0f64 / 16.0).powf(1.0 / 12.0), max_relative = 1e-14);
}

#[test]
fn kato_flags_unresolved_layers() {
    let grid = Grid::channel(64, 32).unwrap();
    let h = grid.h();
    let tr = transport(1.0);
    let err = KatoMonitor::new(KatoCriterion::Gradient, tr, 1.5 * h, 0.25, &grid).unwrap_err();
    assert!(matches!(err, Error::UnresolvedLayer { cells, .. } if cells == 2.0));
    assert!(KatoMonitor::new(KatoCriterion::Gradient, tr, 2.0 * h, 0.25, &grid).is_ok());
    let err = KatoMonitor::new(KatoCriterion::Alpha1, tr, 0.1, 3.0 * h, &grid).unwrap_err();
    assert!(matches!(err, Error::UnresolvedLayer { cells, .. } if cells == 4.0));
    assert!(matches!(KatoMonitor::new(KatoCriterion::Alpha1, tr, 0.1, 0.6, &grid), Err(Error::InvalidDelta(_))));
    assert!(KatoMonitor::new(KatoCriterion::Conditional, tr, 0.1, 0.25, &grid).is_err());
}

#[test]
fn history_quadrature_matches_monitor() {
    let f = field(BoundaryKind::NoSlip, |_, y| Primitive { rho: 1.1, u: [0.2, 0.1 * (PI * y).sin()], theta: 0.9 });
    let history = vec![(0.0, f.clone()), (0.2, f.clone()), (T, f.clone())];
    let tr = transport(1.0);
    let h = kato_alpha1_criterion(&tr, 0.1, 0.25, &history).unwrap();
    let m = accumulated(KatoCriterion::Alpha1, 1.0, 0.1, 0.25, &f);
    for (a, b) in h.values.iter().zip(&m) {
        assert_relative_eq!(*a, *b, max_relative = 1e-13);
    }
    assert_relative_eq!(h.duration, T);
    let g = kato_gradient_criterion(&tr, 0.1, &history).unwrap();
    assert_eq!(g.values.len(), 2);
    let c = kato_conditional_criterion(&transport(0.5), 0.1, 0.25, &history).unwrap();
    assert!(c.values.iter().all(|v| v.is_finite() && *v >= 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kato_functionals_nonnegative(a in -1.0..1.0f64, b in -1.0..1.0f64, th in 0.3..3.0f64, alpha in 0.34..0.99f64) {
        let f = field(BoundaryKind::NoSlip, move |x, y| Primitive {
            rho: 1.0 + 0.3 * (2.0 * PI * x).sin(),
            u: [a * (3.0 * y).cos(), b * (PI * y).sin()],
            theta: th * (1.0 + 0.2 * (PI * x).cos()),
        });
        for kind in [KatoCriterion::Gradient, KatoCriterion::Alpha1, KatoCriterion::Conditional] {
            let al = if kind == KatoCriterion::Conditional { alpha } else { 1.0 };
            let v = accumulated(kind, al, 0.1, 0.2, &f);
            prop_assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
        }
    }
}
