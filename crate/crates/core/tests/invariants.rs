use proptest::prelude::*;

use relgeneric::generic::{
    apply_dissipative, apply_poisson, degeneracy_scale, gradient_energy, log_mean, pairing, CotangentVector,
    Dissipation, KineticOperator, State,
};
use relgeneric::grid::PhaseGrid;
use relgeneric::heat::{heat_fluxes, saturation_ratio, stable_dt, step_heat, HeatGrid, HeatState};
use relgeneric::kfp::{kfp_rhs, stability_bound, step_kfp};
use relgeneric::model::{diffusion_matrix, grad_p_hamiltonian, ModelParams, Potential, SpeedOfLight, Variant};

fn params_strategy() -> impl Strategy<Value = ModelParams<f64>> {
    (0.5..2.0f64, 0.5..3.0f64, 0.1..2.0f64, 0.3..2.0f64).prop_map(|(m, c, gamma, theta)| ModelParams {
        m,
        c: SpeedOfLight::Finite(c),
        gamma,
        theta,
        nu: 1.0,
        d: 1,
    })
}

fn variant_strategy() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Dmr), Just(Variant::Dh)]
}

fn operator(params: ModelParams<f64>, variant: Variant, stiffness: f64) -> KineticOperator<f64> {
    let grid = PhaseGrid::new(8, 12, 4.0, 4.0).unwrap();
    KineticOperator::new(grid, params, Potential::Harmonic { stiffness }, variant, Dissipation::default()).unwrap()
}

fn cells(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dissipative_operator_is_symmetric_and_nonnegative(
        params in params_strategy(),
        variant in variant_strategy(),
        k in 0.0..2.0f64,
        rho in cells(96, 0.01, 2.0),
        a in cells(96, -1.0, 1.0),
        b in cells(96, -1.0, 1.0),
        ra in -1.0..1.0f64,
        rb in -1.0..1.0f64,
    ) {
        let op = operator(params, variant, k);
        let s = State::new(rho, 0.0);
        let va = CotangentVector { xi: a, r: ra };
        let vb = CotangentVector { xi: b, r: rb };
        let ab = pairing(&op.grid, &va, &apply_dissipative(&op, &s, &vb));
        let ba = pairing(&op.grid, &vb, &apply_dissipative(&op, &s, &va));
        let aa = pairing(&op.grid, &va, &apply_dissipative(&op, &s, &va));
        let bb = pairing(&op.grid, &vb, &apply_dissipative(&op, &s, &vb));
        prop_assert!((ab - ba).abs() <= 1e-12 * (aa.abs() + bb.abs() + 1e-300).max(ab.abs()));
        prop_assert!(aa >= -1e-14 * aa.abs().max(1.0));
    }

    #[test]
    fn poisson_operator_is_antisymmetric(
        rho in cells(96, 0.0, 2.0),
        a in cells(96, -1.0, 1.0),
        b in cells(96, -1.0, 1.0),
    ) {
        let grid = PhaseGrid::new(8, 12, 4.0, 4.0).unwrap();
        let s = State::new(rho, 0.0);
        let va = CotangentVector { xi: a, r: 0.3 };
        let vb = CotangentVector { xi: b, r: -0.7 };
        let ab = pairing(&grid, &va, &apply_poisson(&grid, &s, &vb));
        let ba = pairing(&grid, &vb, &apply_poisson(&grid, &s, &va));
        prop_assert!((ab + ba).abs() <= 1e-12 * (ab.abs() + 1.0));
        let aa = pairing(&grid, &va, &apply_poisson(&grid, &s, &va));
        prop_assert!(aa.abs() <= 1e-13);
    }

    #[test]
    fn dissipation_annihilates_energy_gradient(
        params in params_strategy(),
        variant in variant_strategy(),
        rho in cells(96, 0.01, 2.0),
    ) {
        let op = operator(params, variant, 1.0);
        let s = State::new(rho, 0.0);
        let m = apply_dissipative(&op, &s, &gradient_energy(&op));
        prop_assert!(m.max_abs() <= 1e-12 * degeneracy_scale(&op, &s));
    }

    #[test]
    fn kinetic_tendency_conserves_mass_and_energy(
        params in params_strategy(),
        variant in variant_strategy(),
        rho in cells(96, 0.0, 2.0),
    ) {
        let op = operator(params, variant, 0.5);
        let s = State::new(rho, 0.0);
        let rhs = kfp_rhs(&op, &s);
        let size = rhs.max_abs() * op.grid.len() as f64 * op.grid.cell_volume();
        prop_assert!(op.grid.integrate(&rhs.rho).abs() <= 1e-12 * size.max(1e-300));
        let dh = op.grid.inner(op.hamiltonian_cells(), &rhs.rho);
        prop_assert!((dh + rhs.e).abs() <= 1e-11 * (dh.abs() + size).max(1e-300));
    }

    #[test]
    fn step_at_the_bound_keeps_density_nonnegative(
        params in params_strategy(),
        variant in variant_strategy(),
        rho in cells(96, 0.0, 1.0),
    ) {
        let op = operator(params, variant, 1.0);
        let s = State::new(rho, 0.0);
        let next = step_kfp(&op, &s, stability_bound(&op)).unwrap();
        prop_assert!(next.rho.iter().all(|&x| x >= -1e-12));
        let before = op.grid.integrate(&s.rho);
        prop_assert!((op.grid.integrate(&next.rho) - before).abs() <= 1e-12 * before.max(1.0));
    }

    #[test]
    fn heat_step_conserves_and_saturates(
        rho in cells(32, 0.0, 3.0),
        c in 0.2..5.0f64,
        nu in 0.2..3.0f64,
    ) {
        let grid = HeatGrid::new(32, 1.0).unwrap();
        let params = ModelParams { c: SpeedOfLight::Finite(c), nu, ..ModelParams::unit() };
        let s = HeatState { rho, t: 0.0 };
        let flux = heat_fluxes(&grid, &s, &params);
        prop_assert!(saturation_ratio(&grid, &s, &flux, c) <= 1.0 + 1e-12);
        let next = step_heat(&grid, &s, stable_dt(&grid, &params), &params).unwrap();
        prop_assert!(next.rho.iter().all(|&x| x >= -1e-14));
        let m0 = grid.integrate(&s.rho);
        prop_assert!((grid.integrate(&next.rho) - m0).abs() <= 1e-13 * m0.max(1.0));
    }

    #[test]
    fn model_is_bounded_and_positive(p in -1e3..1e3f64, c in 0.1..10.0f64, m in 0.1..10.0f64, x in -1.0..1.0f64) {
        let params = ModelParams { m, c: SpeedOfLight::Finite(c), ..ModelParams::unit() };
        let v = grad_p_hamiltonian(&[p], &params).unwrap()[0];
        prop_assert!(v.abs() < c);
        for variant in [Variant::Dmr, Variant::Dh] {
            let d = diffusion_matrix(&[p], variant, &params).unwrap();
            prop_assert!(d.quadratic_form(&[x]) >= 0.0);
        }
    }

    #[test]
    fn log_mean_lies_between_geometric_and_arithmetic(a in 1e-8..1e3f64, b in 1e-8..1e3f64) {
        let l = log_mean(a, b);
        prop_assert_eq!(l, log_mean(b, a));
        let (g, m) = ((a * b).sqrt(), (a + b) / 2.0);
        prop_assert!(l >= g * (1.0 - 1e-14) && l <= m * (1.0 + 1e-14));
    }
}

#[test]
fn single_precision_solver_runs() {
    let grid = PhaseGrid::<f32>::new(8, 16, 4.0, 6.0).unwrap();
    let params = ModelParams::<f32> { gamma: 0.5, ..ModelParams::unit() };
    let op = KineticOperator::new(grid, params, Potential::Harmonic { stiffness: 1.0 }, Variant::Dh, Dissipation::default())
        .unwrap();
    let mut s = State::new(grid.sample(|q, p| (-(q * q + p * p) / 2.0).exp()), 0.0f32);
    let m0 = grid.integrate(&s.rho);
    let dt = stability_bound(&op);
    for _ in 0..50 {
        s = step_kfp(&op, &s, dt).unwrap();
    }
    assert!(((grid.integrate(&s.rho) - m0) / m0).abs() < 1e-5);
    assert!(s.rho.iter().all(|&x| x >= -1e-6));
}
