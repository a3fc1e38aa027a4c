//! Kinetic Fokker-Planck solver on the `(q, p)` grid.
//!
//! The right-hand side is assembled directly in flux form (transport fluxes
//! plus exponentially fitted friction fluxes), independently of the operator
//! route `L δE + M δS` in [`crate::generic`]; the two agree to round-off.
//! Time stepping is classical RK4 on `(ρ, e)`.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::generic::{
    apply_dissipative, apply_poisson, energy_functional, entropy_functional, gradient_energy, pairing,
    tangent_norm, CotangentVector, Dissipation, KineticOperator, State, Tangent, LOG_FLOOR,
};
use crate::grid::PhaseGrid;
use crate::model::{
    div_mobility_drift, maxwellian, maxwellian_unchecked, mobility_drift, grad_p_hamiltonian, ModelParams,
    Potential, Variant,
};
use crate::scalar::Real;

/// Initial densities; all are normalised to unit mass on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KfpInit<T> {
    Uniform,
    /// `exp(−(K(p − p₀) + V(q))/θ)`: an equilibrium profile with a momentum offset.
    ShiftedMaxwellian { p0: T },
    /// `exp(−(q − q₀)²/2σ_q² − (p − p₀)²/2σ_p²)`.
    ProductGaussian { q0: T, sigma_q: T, p0: T, sigma_p: T },
    /// The grid Maxwellian itself.
    Maxwellian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KfpConfig<T> {
    pub grid: PhaseGrid<T>,
    pub params: ModelParams<T>,
    pub potential: Potential<T>,
    pub variant: Variant,
    pub dissipation: Dissipation,
    /// Requested step; the run uses `T / ceil(T / dt)`.
    pub dt: T,
    pub t_final: T,
    pub record_every: usize,
    pub init: KfpInit<T>,
}

impl<T: Real> KfpConfig<T> {
    pub fn operator(&self) -> Result<KineticOperator<T>> {
        KineticOperator::new(self.grid, self.params, self.potential, self.variant, self.dissipation)
    }

    /// Replaces `dt` by the stability bound of this configuration.
    pub fn with_stable_dt(mut self) -> Result<Self> {
        self.dt = stability_bound(&self.operator()?);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > T::zero()) {
            return Err(Error::invalid("t_final", "final time must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return Err(Error::invalid("dt", "time step must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be at least 1"));
        }
        Ok(())
    }
}

/// Normalised initial density.
pub fn initial_state<T: Real>(op: &KineticOperator<T>, init: &KfpInit<T>) -> State<T> {
    let g = &op.grid;
    let p = &op.params;
    let mut rho = match *init {
        KfpInit::Uniform => vec![T::one(); g.len()],
        KfpInit::Maxwellian => maxwellian_unchecked(g, p, &op.potential).density,
        KfpInit::ShiftedMaxwellian { p0 } => {
            let k0 = p.kinetic(T::zero());
            g.sample(|q, pm| {
                let dp = pm - p0;
                (-(p.kinetic(dp * dp) - k0 + op.potential.value1(q)) / p.theta).exp()
            })
        }
        KfpInit::ProductGaussian { q0, sigma_q, p0, sigma_p } => g.sample(|q, pm| {
            let a = (q - q0) / sigma_q;
            let b = (pm - p0) / sigma_p;
            (-(a * a + b * b) / T::lit(2.0)).exp()
        }),
    };
    let mass = g.integrate(&rho);
    rho.iter_mut().for_each(|x| *x /= mass);
    State::new(rho, T::zero())
}

/// Momentum-face transport weight: `1` in the two boundary cells, `½` elsewhere.
#[inline]
fn alpha<T: Real>(j: usize, np: usize) -> T {
    if j == 0 || j + 1 == np {
        T::one()
    } else {
        T::lit(0.5)
    }
}

/// Density and excess-energy tendencies of the coupled system.
pub fn kfp_rhs<T: Real>(op: &KineticOperator<T>, state: &State<T>) -> Tangent<T> {
    let g = &op.grid;
    let theta = op.params.theta;
    let rho = &state.rho;
    let mut out = vec![T::zero(); g.len()];
    let mut e = T::zero();

    // Position faces: centred transport flux plus fitted viscosity.
    let mut qflux = vec![T::zero(); g.len()];
    for i in 0..g.nq {
        let ip = if i + 1 == g.nq { 0 } else { i + 1 };
        for j in 0..g.np {
            let (k, kp) = (g.index(i, j), g.index(ip, j));
            let transport = (rho[k] * op.velocity[k] + rho[kp] * op.velocity[kp]) / T::lit(2.0);
            let visc = op.kappa_q[k] * theta * (rho[kp] * op.wq_plus[k] - rho[k] * op.wq_minus[k]) / g.hq;
            qflux[k] = visc - transport;
            e += op.dh_q[k] / g.hq * visc;
        }
    }
    g.add_div_q(&qflux, &mut out);

    // Momentum faces: force transport plus friction-diffusion flux.
    let mut pflux = Vec::with_capacity(g.p_faces());
    for i in 0..g.nq {
        for j in 0..g.np - 1 {
            let (k, kp) = (g.index(i, j), g.index(i, j + 1));
            let f = g.p_face_index(i, j);
            let transport = alpha::<T>(j, g.np) * rho[k] * op.force[k] + alpha::<T>(j + 1, g.np) * rho[kp] * op.force[kp];
            let fric = op.kappa_p[f] * theta * (rho[kp] * op.wp_plus[f] - rho[k] * op.wp_minus[f]) / g.hp;
            pflux.push(transport + fric);
            e += op.dh_p[f] / g.hp * fric;
        }
    }
    g.add_div_p(&pflux, &mut out);
    Tangent { rho: out, e: e * g.cell_volume() }
}

/// Excess-energy tendency `de/dt`, equal to `−d/dt Σ H ρ · cellVolume` of the
/// discrete system.
pub fn excess_rhs<T: Real>(op: &KineticOperator<T>, state: &State<T>) -> T {
    kfp_rhs(op, state).e
}

/// Cell quadrature of `γ ∫ (𝔻∇ₚH·∇ₚH − θ divₚ(𝔻∇ₚH)) ρ` using the pointwise
/// model formulas (physical friction only).
pub fn excess_rhs_continuum<T: Real>(op: &KineticOperator<T>, state: &State<T>) -> Result<T> {
    let g = &op.grid;
    let mut sum = T::zero();
    for j in 0..g.np {
        let p = [g.p(j)];
        let drift = mobility_drift(&p, op.variant, &op.params)?[0];
        let vel = grad_p_hamiltonian(&p, &op.params)?[0];
        let div = div_mobility_drift(&p, op.variant, &op.params)?;
        let w = drift * vel - op.params.theta * div;
        for i in 0..g.nq {
            sum += w * state.rho[g.index(i, j)];
        }
    }
    Ok(op.params.gamma * sum * g.cell_volume())
}

/// Largest magnitude of a diagonal entry of the (linear) density generator.
fn max_diagonal<T: Real>(op: &KineticOperator<T>) -> T {
    let g = &op.grid;
    let theta = op.params.theta;
    let mut diag = vec![T::zero(); g.len()];
    for i in 0..g.nq {
        let ip = if i + 1 == g.nq { 0 } else { i + 1 };
        for j in 0..g.np {
            let k = g.index(i, j);
            diag[k] -= op.kappa_q[k] * theta * op.wq_minus[k] / (g.hq * g.hq);
            diag[g.index(ip, j)] -= op.kappa_q[k] * theta * op.wq_plus[k] / (g.hq * g.hq);
        }
        for j in 0..g.np - 1 {
            let f = g.p_face_index(i, j);
            diag[g.index(i, j)] -= op.kappa_p[f] * theta * op.wp_minus[f] / (g.hp * g.hp);
            diag[g.index(i, j + 1)] -= op.kappa_p[f] * theta * op.wp_plus[f] / (g.hp * g.hp);
        }
        diag[g.index(i, 0)] += op.force[g.index(i, 0)] / g.hp;
        diag[g.index(i, g.np - 1)] -= op.force[g.index(i, g.np - 1)] / g.hp;
    }
    diag.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Largest admissible RK4 step:
/// `min(0.4 hq/max|∂ₚH|, 0.4 hp/max|∂_qH|, 0.25 hp²/(θ max κₚ), 0.25 hq²/(θ max κ_q), 1/max|diag|)`.
/// The last term keeps RK4 positivity preserving for the monotone generator.
pub fn stability_bound<T: Real>(op: &KineticOperator<T>) -> T {
    let g = &op.grid;
    let theta = op.params.theta;
    let maxabs = |v: &[T]| v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let mut bound = T::infinity();
    let mut limit = |num: T, den: T| {
        if den > T::zero() {
            bound = bound.min(num / den);
        }
    };
    limit(T::lit(0.4) * g.hq, maxabs(&op.velocity));
    limit(T::lit(0.4) * g.hp, maxabs(&op.force));
    limit(T::lit(0.25) * g.hp * g.hp, theta * maxabs(&op.kappa_p));
    limit(T::lit(0.25) * g.hq * g.hq, theta * maxabs(&op.kappa_q));
    limit(T::one(), max_diagonal(op));
    bound
}

/// One RK4 step of the coupled system.
pub fn step_kfp<T: Real>(op: &KineticOperator<T>, state: &State<T>, dt: T) -> Result<State<T>> {
    let bound = stability_bound(op);
    if dt > bound * (T::one() + T::lit(1e-12)) || dt < T::zero() {
        return Err(Error::StepTooLarge { dt: dt.as_f64(), bound: bound.as_f64() });
    }
    if dt == T::zero() {
        return Ok(state.clone());
    }
    let half = dt / T::lit(2.0);
    let k1 = kfp_rhs(op, state);
    let k2 = kfp_rhs(op, &state.axpy(half, &k1));
    let k3 = kfp_rhs(op, &state.axpy(half, &k2));
    let k4 = kfp_rhs(op, &state.axpy(dt, &k3));
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let rho: Vec<T> = (0..state.rho.len())
        .map(|k| state.rho[k] + sixth * (k1.rho[k] + two * k2.rho[k] + two * k3.rho[k] + k4.rho[k]))
        .collect();
    let e = state.e + sixth * (k1.e + two * k2.e + two * k3.e + k4.e);
    if let Some((cell, &value)) = rho.iter().enumerate().find(|(_, &x)| x < T::lit(-1e-12)) {
        return Err(Error::NegativeDensity { cell, value: value.as_f64() });
    }
    Ok(State::new(rho, e))
}

/// `Σ ρ log(ρ/ρ∞) · cellVolume` with `0 log 0 = 0`.
pub fn relative_entropy<T: Real>(rho: &[T], rho_inf: &[T], grid: &PhaseGrid<T>) -> T {
    let s: T = rho
        .iter()
        .zip(rho_inf)
        .map(|(&r, &ri)| if r > T::zero() { r * (r / ri).ln() } else { T::zero() })
        .sum();
    s * grid.cell_volume()
}

/// `Σ |a − b| · cellVolume`.
pub fn l1_distance<T: Real>(a: &[T], b: &[T], grid: &PhaseGrid<T>) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<T>() * grid.cell_volume()
}

fn floored_entropy_gradient<T: Real>(params: &ModelParams<T>, rho: &[T]) -> CotangentVector<T> {
    let floor = T::lit(LOG_FLOOR);
    CotangentVector { xi: rho.iter().map(|&x| -params.theta * (x.max(floor).ln() + T::one())).collect(), r: T::one() }
}

/// Diagnostics of a phase-space state.
pub fn kfp_diagnostics<T: Real>(
    op: &KineticOperator<T>,
    state: &State<T>,
    t: T,
    rho_inf: Option<&[T]>,
) -> DiagnosticsRecord<T> {
    let g = &op.grid;
    let ds = floored_entropy_gradient(&op.params, &state.rho);
    let rhs = kfp_rhs(op, state);
    DiagnosticsRecord {
        t,
        energy: energy_functional(op, state),
        entropy: entropy_functional(g, &op.params, state),
        mass: g.integrate(&state.rho),
        dsdt: pairing(g, &ds, &rhs),
        deg_l: tangent_norm(g, &apply_poisson(g, state, &ds)),
        deg_m: tangent_norm(g, &apply_dissipative(op, state, &gradient_energy(op))),
        rel_ent: rho_inf.map(|ri| relative_entropy(&state.rho, ri, g)),
        e: state.e,
    }
}

/// Result of [`run_kfp`].
#[derive(Debug, Clone)]
pub struct KfpRun<T> {
    pub records: Vec<DiagnosticsRecord<T>>,
    /// `d/dt Σ Hρ · cellVolume` at each record.
    pub energy_rate: Vec<T>,
    pub state: State<T>,
    pub steps: usize,
    pub dt: T,
    pub min_density: T,
}

fn step_count<T: Real>(t_final: T, dt: T) -> (usize, T) {
    let n = (t_final / dt).ceil().to_usize().unwrap_or(1).max(1);
    (n, t_final / T::from_usize_lossy(n))
}

/// Integrates a configuration up to `t_final`, sampling every `record_every`
/// steps and at the final time.
pub fn run_kfp<T: Real>(cfg: &KfpConfig<T>) -> Result<KfpRun<T>> {
    run_kfp_with(cfg, |_, _| Ok(()))
}

/// [`run_kfp`] with a callback invoked on every recorded state.
pub fn run_kfp_with<T: Real>(
    cfg: &KfpConfig<T>,
    mut on_record: impl FnMut(&State<T>, T) -> Result<()>,
) -> Result<KfpRun<T>> {
    cfg.validate()?;
    let op = cfg.operator()?;
    let rho_inf = maxwellian_unchecked(&op.grid, &op.params, &op.potential).density;
    let mut state = initial_state(&op, &cfg.init);
    let (n, dt) = step_count(cfg.t_final, cfg.dt);
    let mut records = vec![kfp_diagnostics(&op, &state, T::zero(), Some(&rho_inf))];
    let mut energy_rate = vec![-excess_rhs(&op, &state)];
    on_record(&state, T::zero())?;
    let mut min_density = state.rho.iter().copied().fold(T::infinity(), T::min);
    for s in 1..=n {
        state = step_kfp(&op, &state, dt)?;
        min_density = state.rho.iter().copied().fold(min_density, T::min);
        if s % cfg.record_every == 0 || s == n {
            let t = dt * T::from_usize_lossy(s);
            records.push(kfp_diagnostics(&op, &state, t, Some(&rho_inf)));
            energy_rate.push(-excess_rhs(&op, &state));
            on_record(&state, t)?;
        }
    }
    Ok(KfpRun { records, energy_rate, state, steps: n, dt, min_density })
}

/// Result of [`run_to_stationarity`].
#[derive(Debug, Clone)]
pub struct StationarityReport<T> {
    pub records: Vec<DiagnosticsRecord<T>>,
    pub state: State<T>,
    /// Time at which the run stopped.
    pub t: T,
    /// Final `L¹` distance to the grid Maxwellian.
    pub l1: T,
    pub converged: bool,
    pub maxwellian: Vec<T>,
    /// `E₀ − Σ H ρ∞ · cellVolume`.
    pub e_inf: T,
    /// Initial total energy `E₀`.
    pub energy0: T,
}

/// Integrates until the `L¹` distance to the Maxwellian drops to `tol` or
/// `t_final` is reached.
///
/// Fails with [`Error::NonConvergence`] if the distance at `t_final` still
/// exceeds `10 · tol`.
pub fn run_to_stationarity<T: Real>(cfg: &KfpConfig<T>, tol: T) -> Result<StationarityReport<T>> {
    cfg.validate()?;
    let op = cfg.operator()?;
    let mx = maxwellian(&op.grid, &op.params, &op.potential)?;
    let mut state = initial_state(&op, &cfg.init);
    let energy0 = energy_functional(&op, &state);
    let e_inf = energy0 - op.grid.inner(op.hamiltonian_cells(), &mx.density);
    let (n, dt) = step_count(cfg.t_final, cfg.dt);
    let mut records = vec![kfp_diagnostics(&op, &state, T::zero(), Some(&mx.density))];
    let mut l1 = l1_distance(&state.rho, &mx.density, &op.grid);
    let mut t = T::zero();
    let mut s = 0;
    while l1 > tol && s < n {
        s += 1;
        state = step_kfp(&op, &state, dt)?;
        t = dt * T::from_usize_lossy(s);
        l1 = l1_distance(&state.rho, &mx.density, &op.grid);
        if s % cfg.record_every == 0 || s == n || l1 <= tol {
            records.push(kfp_diagnostics(&op, &state, t, Some(&mx.density)));
        }
    }
    if l1 > T::lit(10.0) * tol {
        return Err(Error::NonConvergence { l1: l1.as_f64(), t: t.as_f64() });
    }
    Ok(StationarityReport {
        records,
        state,
        t,
        l1,
        converged: l1 <= tol,
        maxwellian: mx.density,
        e_inf,
        energy0,
    })
}

/// Entropy production `Σ_f κ_f ρ_f g_f² · cellVolume` of the current state.
pub fn entropy_production<T: Real>(op: &KineticOperator<T>, state: &State<T>) -> T {
    let ds = floored_entropy_gradient(&op.params, &state.rho);
    crate::generic::dissipative_bracket_faces(op, state, &ds, &ds)
}
