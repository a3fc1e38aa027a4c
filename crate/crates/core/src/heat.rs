//! Relativistic heat equation `∂ₜρ = ν div(ρ∇ρ / sqrt(ρ² + (ν/c)²|∇ρ|²))`
//! on a periodic 1-D grid, written as a generalized gradient flow
//! `∂ₜρ = ∂_ξ K(ρ; δS/δρ)` with `K(ρ; ξ) = ν ∫ ρ φ*(∇ξ)`.
//!
//! Face mobilities are logarithmic means of the neighbouring cells, so the
//! flux `ν ρ_f g / sqrt(ρ_f² + (ν/c)² g²)` with `g = Δρ/h` coincides with
//! `ν ρ_f ∇φ*(−Δ log ρ / h)` up to round-off, and `|F| ≤ c ρ_f ≤ c ρ̄`.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::generic::{log_mean, xlogx, LOG_FLOOR};
use crate::model::{ModelParams, SpeedOfLight};
use crate::scalar::{norm2, Real};

/// Periodic 1-D grid on `[0, L)` with `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatGrid<T> {
    pub n: usize,
    pub length: T,
    pub h: T,
}

impl<T: Real> HeatGrid<T> {
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 cells, got {n}")));
        }
        if !(length.is_finite() && length > T::zero()) {
            return Err(Error::invalid("length", format!("must be positive, got {length}")));
        }
        Ok(HeatGrid { n, length, h: length / T::from_usize_lossy(n) })
    }

    /// Centre of cell `i`.
    pub fn x(&self, i: usize) -> T {
        (T::from_usize_lossy(i) + T::lit(0.5)) * self.h
    }

    pub fn integrate(&self, a: &[T]) -> T {
        a.iter().copied().sum::<T>() * self.h
    }

    #[inline]
    fn next(&self, i: usize) -> usize {
        if i + 1 == self.n {
            0
        } else {
            i + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatState<T> {
    pub rho: Vec<T>,
    pub t: T,
}

/// Initial profiles, centred at cell `n/2` and normalised to unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeatInit<T> {
    Uniform,
    Gaussian { sigma: T },
    /// Compactly supported `(1 − (x/w)²)²` on `|x| < w`.
    Bump { width: T },
}

pub fn initial_heat_state<T: Real>(grid: &HeatGrid<T>, init: &HeatInit<T>) -> HeatState<T> {
    let xc = grid.x(grid.n / 2);
    let mut rho: Vec<T> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i) - xc;
            match *init {
                HeatInit::Uniform => T::one(),
                HeatInit::Gaussian { sigma } => (-(x * x) / (T::lit(2.0) * sigma * sigma)).exp(),
                HeatInit::Bump { width } => {
                    let u = x / width;
                    if u.abs() < T::one() {
                        let a = T::one() - u * u;
                        a * a
                    } else {
                        T::zero()
                    }
                }
            }
        })
        .collect();
    let mass = grid.integrate(&rho);
    rho.iter_mut().for_each(|x| *x /= mass);
    HeatState { rho, t: T::zero() }
}

fn finite_c<T: Real>(params: &ModelParams<T>) -> Result<T> {
    params.c.value().ok_or(Error::RequiresFiniteC)
}

/// `φ*(z) = (c²/ν²)(sqrt(1 + (ν²/c²)|z|²) − 1)`.
pub fn phi_star<T: Real>(z: &[T], params: &ModelParams<T>) -> Result<T> {
    let c = finite_c(params)?;
    let k = params.nu / c;
    let n = norm2(z);
    // Rewritten as |z|² / (sqrt(1 + k²|z|²) + 1) to avoid cancellation.
    Ok(n * n / ((T::one() + k * k * n * n).sqrt() + T::one()))
}

/// `∇φ*(z) = z / sqrt(1 + (ν²/c²)|z|²)`; its norm stays below `c/ν`.
pub fn grad_phi_star<T: Real>(z: &[T], params: &ModelParams<T>) -> Result<Vec<T>> {
    let c = finite_c(params)?;
    let k = params.nu / c;
    let n = norm2(z);
    let s = (T::one() + k * k * n * n).sqrt();
    Ok(z.iter().map(|&x| x / s).collect())
}

fn phi_star_scalar<T: Real>(z: T, params: &ModelParams<T>) -> T {
    match params.c {
        SpeedOfLight::Finite(c) => {
            let k = params.nu / c;
            z * z / ((T::one() + k * k * z * z).sqrt() + T::one())
        }
        SpeedOfLight::Infinite => z * z / T::lit(2.0),
    }
}

fn grad_phi_star_scalar<T: Real>(z: T, params: &ModelParams<T>) -> T {
    match params.c {
        SpeedOfLight::Finite(c) => {
            let k = params.nu / c;
            z / (T::one() + k * k * z * z).sqrt()
        }
        SpeedOfLight::Infinite => z,
    }
}

fn face_mobilities<T: Real>(grid: &HeatGrid<T>, rho: &[T]) -> Vec<T> {
    (0..grid.n).map(|i| log_mean(rho[i], rho[grid.next(i)])).collect()
}

/// `K(ρ; ξ) = ν Σ_f ρ_f φ*(Δξ/h) h`, face quadrature with the same face
/// mobilities as the flux. Classical mode uses `φ*(z) = z²/2`.
pub fn dissipation_potential<T: Real>(
    grid: &HeatGrid<T>,
    state: &HeatState<T>,
    xi: &[T],
    params: &ModelParams<T>,
) -> T {
    let mob = face_mobilities(grid, &state.rho);
    let mut sum = T::zero();
    for i in 0..grid.n {
        let z = (xi[grid.next(i)] - xi[i]) / grid.h;
        sum += mob[i] * phi_star_scalar(z, params);
    }
    params.nu * sum * grid.h
}

/// Flux through the face between `i` and `i + 1` (positive means mass moves
/// from `i + 1` into `i`).
pub fn heat_fluxes<T: Real>(grid: &HeatGrid<T>, state: &HeatState<T>, params: &ModelParams<T>) -> Vec<T> {
    let rho = &state.rho;
    (0..grid.n)
        .map(|i| {
            let g = (rho[grid.next(i)] - rho[i]) / grid.h;
            match params.c {
                SpeedOfLight::Infinite => params.nu * g,
                SpeedOfLight::Finite(c) => {
                    let rf = log_mean(rho[i], rho[grid.next(i)]);
                    let k = params.nu / c;
                    let den = (rf * rf + k * k * g * g).sqrt();
                    if den > T::zero() {
                        params.nu * rf * g / den
                    } else {
                        T::zero()
                    }
                }
            }
        })
        .collect()
}

fn divergence<T: Real>(grid: &HeatGrid<T>, flux: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); grid.n];
    for i in 0..grid.n {
        out[i] += flux[i] / grid.h;
        out[grid.next(i)] -= flux[i] / grid.h;
    }
    out
}

/// Conservation-form tendency of the heat equation.
pub fn heat_rhs<T: Real>(grid: &HeatGrid<T>, state: &HeatState<T>, params: &ModelParams<T>) -> Vec<T> {
    divergence(grid, &heat_fluxes(grid, state, params))
}

/// `∂_ξ K(ρ; ξ) = −div(ν ρ_f ∇φ*(Δξ/h))`.
pub fn generalized_generic_rhs<T: Real>(
    grid: &HeatGrid<T>,
    state: &HeatState<T>,
    xi: &[T],
    params: &ModelParams<T>,
) -> Vec<T> {
    let mob = face_mobilities(grid, &state.rho);
    let flux: Vec<T> = (0..grid.n)
        .map(|i| {
            let z = (xi[grid.next(i)] - xi[i]) / grid.h;
            -params.nu * mob[i] * grad_phi_star_scalar(z, params)
        })
        .collect();
    divergence(grid, &flux)
}

/// `δS/δρ = −(log ρ + 1)` for the Boltzmann entropy, logarithm floored.
pub fn heat_entropy_gradient<T: Real>(state: &HeatState<T>) -> Vec<T> {
    let floor = T::lit(LOG_FLOOR);
    state.rho.iter().map(|&x| -(x.max(floor).ln() + T::one())).collect()
}

/// `0.25 min(h²/ν, h/c)`; the `h/c` guard is dropped in classical mode.
pub fn stable_dt<T: Real>(grid: &HeatGrid<T>, params: &ModelParams<T>) -> T {
    let diff = grid.h * grid.h / params.nu;
    let bound = match params.c {
        SpeedOfLight::Finite(c) => diff.min(grid.h / c),
        SpeedOfLight::Infinite => diff,
    };
    T::lit(0.25) * bound
}

/// Largest `|F| / (c ρ̄)` over the faces, `ρ̄` the arithmetic face mean.
pub fn saturation_ratio<T: Real>(grid: &HeatGrid<T>, state: &HeatState<T>, flux: &[T], c: T) -> T {
    let mut worst = T::zero();
    for i in 0..grid.n {
        let avg = (state.rho[i] + state.rho[grid.next(i)]) / T::lit(2.0);
        let f = flux[i].abs();
        if f > T::zero() {
            worst = worst.max(f / (c * avg));
        }
    }
    worst
}

/// One forward-Euler step.
pub fn step_heat<T: Real>(
    grid: &HeatGrid<T>,
    state: &HeatState<T>,
    dt: T,
    params: &ModelParams<T>,
) -> Result<HeatState<T>> {
    let bound = stable_dt(grid, params);
    if dt < T::zero() || dt > bound * (T::one() + T::lit(1e-12)) {
        return Err(Error::StepTooLarge { dt: dt.as_f64(), bound: bound.as_f64() });
    }
    if dt == T::zero() {
        return Ok(state.clone());
    }
    let rhs = heat_rhs(grid, state, params);
    let rho: Vec<T> = state.rho.iter().zip(&rhs).map(|(&r, &d)| r + dt * d).collect();
    if let Some((cell, &value)) = rho.iter().enumerate().find(|(_, &x)| x < T::lit(-1e-14)) {
        return Err(Error::NegativeDensity { cell, value: value.as_f64() });
    }
    Ok(HeatState { rho, t: state.t + dt })
}

/// Half-width of the smallest interval centred at cell `n/2` that covers
/// every cell with `ρ > threshold` (cells counted whole).
pub fn support_radius<T: Real>(grid: &HeatGrid<T>, state: &HeatState<T>, threshold: T) -> T {
    let xc = grid.x(grid.n / 2);
    let mut r = T::zero();
    for (i, &x) in state.rho.iter().enumerate() {
        if x > threshold {
            r = r.max((grid.x(i) - xc).abs() + grid.h / T::lit(2.0));
        }
    }
    r
}

/// `−Σ ρ log ρ · h` with `0 log 0 = 0`.
pub fn boltzmann_entropy<T: Real>(grid: &HeatGrid<T>, state: &HeatState<T>) -> T {
    -state.rho.iter().map(|&x| xlogx(x)).sum::<T>() * grid.h
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatConfig<T> {
    pub grid: HeatGrid<T>,
    pub params: ModelParams<T>,
    pub dt: T,
    pub t_final: T,
    pub record_every: usize,
    pub init: HeatInit<T>,
}

impl<T: Real> HeatConfig<T> {
    pub fn with_stable_dt(mut self) -> Self {
        self.dt = stable_dt(&self.grid, &self.params);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
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

/// Result of [`run_heat`].
#[derive(Debug, Clone)]
pub struct HeatRun<T> {
    pub records: Vec<DiagnosticsRecord<T>>,
    pub state: HeatState<T>,
    pub steps: usize,
    pub dt: T,
    /// Largest `|F|/(c ρ̄)` seen over all steps (zero in classical mode).
    pub max_saturation: T,
    /// Most negative per-step entropy change.
    pub worst_entropy_step: T,
    pub min_density: T,
}

pub fn heat_diagnostics<T: Real>(grid: &HeatGrid<T>, state: &HeatState<T>, params: &ModelParams<T>) -> DiagnosticsRecord<T> {
    let flux = heat_fluxes(grid, state, params);
    let floor = T::lit(LOG_FLOOR);
    // Entropy production Σ_f F_f Δlog ρ_f.
    let dsdt = (0..grid.n)
        .map(|i| flux[i] * (state.rho[grid.next(i)].max(floor).ln() - state.rho[i].max(floor).ln()))
        .sum();
    DiagnosticsRecord {
        t: state.t,
        energy: T::zero(),
        entropy: boltzmann_entropy(grid, state),
        mass: grid.integrate(&state.rho),
        dsdt,
        deg_l: T::zero(),
        deg_m: T::zero(),
        rel_ent: None,
        e: T::zero(),
    }
}

pub fn run_heat<T: Real>(cfg: &HeatConfig<T>) -> Result<HeatRun<T>> {
    run_heat_with(cfg, |_| Ok(()))
}

/// [`run_heat`] with a callback invoked on every recorded state.
pub fn run_heat_with<T: Real>(
    cfg: &HeatConfig<T>,
    mut on_record: impl FnMut(&HeatState<T>) -> Result<()>,
) -> Result<HeatRun<T>> {
    cfg.validate()?;
    let grid = &cfg.grid;
    let mut state = initial_heat_state(grid, &cfg.init);
    let n = (cfg.t_final / cfg.dt).ceil().to_usize().unwrap_or(1).max(1);
    let dt = cfg.t_final / T::from_usize_lossy(n);
    let mut records = vec![heat_diagnostics(grid, &state, &cfg.params)];
    on_record(&state)?;
    let mut max_saturation = T::zero();
    let mut worst_entropy_step = T::zero();
    let mut min_density = state.rho.iter().copied().fold(T::infinity(), T::min);
    let mut entropy = boltzmann_entropy(grid, &state);
    for s in 1..=n {
        if let SpeedOfLight::Finite(c) = cfg.params.c {
            let flux = heat_fluxes(grid, &state, &cfg.params);
            let ratio = saturation_ratio(grid, &state, &flux, c);
            if ratio > T::one() + T::lit(1e-12) {
                let face = (0..grid.n)
                    .max_by(|&a, &b| flux[a].abs().partial_cmp(&flux[b].abs()).unwrap())
                    .unwrap_or(0);
                return Err(Error::Saturation {
                    face,
                    flux: flux[face].as_f64(),
                    bound: (c * (state.rho[face] + state.rho[grid.next(face)]) / T::lit(2.0)).as_f64(),
                });
            }
            max_saturation = max_saturation.max(ratio);
        }
        state = step_heat(grid, &state, dt, &cfg.params)?;
        state.t = dt * T::from_usize_lossy(s);
        let next = boltzmann_entropy(grid, &state);
        worst_entropy_step = worst_entropy_step.min(next - entropy);
        entropy = next;
        min_density = state.rho.iter().copied().fold(min_density, T::min);
        if s % cfg.record_every == 0 || s == n {
            records.push(heat_diagnostics(grid, &state, &cfg.params));
            on_record(&state)?;
        }
    }
    Ok(HeatRun { records, state, steps: n, dt, max_saturation, worst_entropy_step, min_density })
}
