//! GENERIC building blocks on a phase grid: state, energy and entropy
//! functionals, the Poisson operator `L` and the friction operator `M`.
//!
//! `L(ρ)ξ = div(ρ J ∇ξ)` with `J = [[0, −1], [1, 0]]` uses centred
//! gradients and their exact transposes, so `⟨η, Lξ⟩ = −⟨ξ, Lη⟩` holds to
//! round-off.
//!
//! `M` lives on cell faces. For a cotangent `(ξ, r)` the face "force" is
//! `g_f = (Δξ − r ΔH) / h`, and
//!
//! ```text
//! (M(ξ, r))_ρ = −div(κ_f ρ_f g_f)
//! (M(ξ, r))_e = −Σ_f κ_f ρ_f (ΔH/h) g_f · cellVolume
//! ```
//!
//! so `⟨v₁, M v₂⟩ = Σ_f κ_f ρ_f g₁ g₂ · cellVolume` is symmetric and
//! non-negative, and `M (H, 1) = 0` bit for bit because `g_f` vanishes.
//! The face density is the exponentially fitted logarithmic mean
//! `ρ_f = Λ(ρ_j e^{−δ/2}, ρ_{j+1} e^{δ/2})`, `δ = ΔH/θ`; with it
//! `ρ_f Δ(log ρ + H/θ)` equals the linear flux `ρ_{j+1}e^{δ/2} − ρ_j e^{−δ/2}`,
//! which is what the solver integrates.
//!
//! Momentum faces carry the physical coefficient `γ𝔻_f`. With
//! stabilisation enabled both directions also carry a numerical viscosity
//! just large enough to keep the semi-discrete generator monotone in the
//! presence of the centred transport; it enters `M` in the same form, so
//! symmetry, positivity and `M δE = 0` are unaffected.

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::model::{ModelParams, Potential, SpeedOfLight, Variant};
use crate::scalar::Real;

/// Floor applied inside logarithms.
pub const LOG_FLOOR: f64 = 1e-300;
/// Cells below this density are considered empty by [`gradient_entropy`].
pub const DENSITY_FLOOR: f64 = 1e-30;

/// GENERIC state `z = (ρ, e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub rho: Vec<T>,
    pub e: T,
}

/// Cotangent vector `(ξ, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentVector<T> {
    pub xi: Vec<T>,
    pub r: T,
}

/// Tangent vector `(δρ, δe)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent<T> {
    pub rho: Vec<T>,
    pub e: T,
}

impl<T: Real> State<T> {
    pub fn new(rho: Vec<T>, e: T) -> Self {
        State { rho, e }
    }

    pub fn validate(&self, grid: &PhaseGrid<T>) -> Result<()> {
        if self.rho.len() != grid.len() {
            return Err(Error::Dimension { expected: grid.len(), found: self.rho.len() });
        }
        if !self.e.is_finite() || self.rho.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        if let Some((cell, &value)) = self.rho.iter().enumerate().find(|(_, &x)| x < T::zero()) {
            return Err(Error::NegativeDensity { cell, value: value.as_f64() });
        }
        Ok(())
    }

    /// `self + s · t`.
    pub fn axpy(&self, s: T, t: &Tangent<T>) -> State<T> {
        State {
            rho: self.rho.iter().zip(&t.rho).map(|(&a, &b)| a + s * b).collect(),
            e: self.e + s * t.e,
        }
    }
}

impl<T: Real> Tangent<T> {
    pub fn zeros(n: usize) -> Self {
        Tangent { rho: vec![T::zero(); n], e: T::zero() }
    }

    pub fn add(&self, other: &Tangent<T>) -> Tangent<T> {
        Tangent {
            rho: self.rho.iter().zip(&other.rho).map(|(&a, &b)| a + b).collect(),
            e: self.e + other.e,
        }
    }

    pub fn sub(&self, other: &Tangent<T>) -> Tangent<T> {
        Tangent {
            rho: self.rho.iter().zip(&other.rho).map(|(&a, &b)| a - b).collect(),
            e: self.e - other.e,
        }
    }

    pub fn max_abs(&self) -> T {
        self.rho.iter().fold(self.e.abs(), |m, x| m.max(x.abs()))
    }
}

/// Pairing `⟨(ξ, r), (δρ, δe)⟩ = Σ ξ δρ · cellVolume + r δe`.
pub fn pairing<T: Real>(grid: &PhaseGrid<T>, v: &CotangentVector<T>, t: &Tangent<T>) -> T {
    grid.inner(&v.xi, &t.rho) + v.r * t.e
}

/// Norm of a tangent under the grid inner product (plus `|δe|²`).
pub fn tangent_norm<T: Real>(grid: &PhaseGrid<T>, t: &Tangent<T>) -> T {
    (grid.inner(&t.rho, &t.rho) + t.e * t.e).sqrt()
}

/// Norm of a cotangent under the grid inner product (plus `r²`).
pub fn cotangent_norm<T: Real>(grid: &PhaseGrid<T>, v: &CotangentVector<T>) -> T {
    (grid.inner(&v.xi, &v.xi) + v.r * v.r).sqrt()
}

/// `ρ log ρ` with `0 log 0 = 0`.
#[inline]
pub fn xlogx<T: Real>(x: T) -> T {
    if x > T::zero() {
        x * x.ln()
    } else {
        T::zero()
    }
}

/// Logarithmic mean `(b − a) / (ln b − ln a)` with both logarithms floored at
/// [`LOG_FLOOR`]. Equals `sqrt(ab) sinh(x)/x`, `x = (ln b − ln a)/2`, which is
/// used near the diagonal.
#[inline]
pub fn log_mean<T: Real>(a: T, b: T) -> T {
    let floor = T::lit(LOG_FLOOR);
    let (fa, fb) = (a.max(floor), b.max(floor));
    let d = fb.ln() - fa.ln();
    if d.abs() < T::lit(1e-2) {
        let x = d * T::lit(0.5);
        let x2 = x * x;
        let series = T::one() + x2 / T::lit(6.0) * (T::one() + x2 / T::lit(20.0) * (T::one() + x2 / T::lit(42.0)));
        (a.max(T::zero()) * b.max(T::zero())).sqrt() * series
    } else {
        (b - a) / d
    }
}

/// Dissipation settings of the phase-space operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dissipation {
    /// Add the monotonicity-preserving numerical viscosity.
    pub stabilized: bool,
}

impl Default for Dissipation {
    fn default() -> Self {
        Dissipation { stabilized: true }
    }
}

/// Phase-space GENERIC system: grid, physics and precomputed face data.
#[derive(Debug, Clone)]
pub struct KineticOperator<T> {
    pub grid: PhaseGrid<T>,
    pub params: ModelParams<T>,
    pub potential: Potential<T>,
    pub variant: Variant,
    pub dissipation: Dissipation,
    /// `H` at cell centres.
    pub(crate) h: Vec<T>,
    /// Centred `∂ₚH` (position velocity) at cells.
    pub(crate) velocity: Vec<T>,
    /// Centred `∂_qH` at cells.
    pub(crate) force: Vec<T>,
    /// Undivided `ΔH` on momentum faces.
    pub(crate) dh_p: Vec<T>,
    /// Undivided `ΔH` on position faces.
    pub(crate) dh_q: Vec<T>,
    /// `e^{∓ΔH/2θ}` on momentum faces.
    pub(crate) wp_minus: Vec<T>,
    pub(crate) wp_plus: Vec<T>,
    /// `e^{∓ΔH/2θ}` on position faces.
    pub(crate) wq_minus: Vec<T>,
    pub(crate) wq_plus: Vec<T>,
    /// Total momentum-face coefficient.
    pub(crate) kappa_p: Vec<T>,
    /// Position-face coefficient (numerical viscosity only).
    pub(crate) kappa_q: Vec<T>,
    drift_perturbation: T,
}

impl<T: Real> KineticOperator<T> {
    pub fn new(
        grid: PhaseGrid<T>,
        params: ModelParams<T>,
        potential: Potential<T>,
        variant: Variant,
        dissipation: Dissipation,
    ) -> Result<Self> {
        params.validate()?;
        potential.validate()?;
        variant.check(&params)?;
        if params.d != 1 {
            return Err(Error::invalid("d", "phase-space solvers require d = 1"));
        }
        let g = grid;
        let h: Vec<T> = (0..g.len())
            .map(|k| {
                let (i, j) = g.split(k);
                params.kinetic(g.p(j) * g.p(j)) + potential.value1(g.q(i))
            })
            .collect();
        let velocity = g.grad_p(&h);
        let force = g.grad_q(&h);
        let dh_p = g.face_diff_p(&h);
        let dh_q = g.face_diff_q(&h);
        let half_theta = T::lit(2.0) * params.theta;
        let wp_minus: Vec<T> = dh_p.iter().map(|&d| (-d / half_theta).exp()).collect();
        let wp_plus: Vec<T> = dh_p.iter().map(|&d| (d / half_theta).exp()).collect();
        let wq_minus: Vec<T> = dh_q.iter().map(|&d| (-d / half_theta).exp()).collect();
        let wq_plus: Vec<T> = dh_q.iter().map(|&d| (d / half_theta).exp()).collect();

        let face_mobility: Vec<T> = (0..g.np - 1)
            .map(|j| match (variant, params.c) {
                (Variant::Dh, SpeedOfLight::Finite(c)) => {
                    let mc = params.m * c;
                    let s = |p: T| (mc * mc + p * p).sqrt();
                    (s(g.p(j)) + s(g.p(j + 1))) / (T::lit(2.0) * mc)
                }
                _ => T::one(),
            })
            .collect();
        let mut kappa_p_phys = Vec::with_capacity(g.p_faces());
        for _ in 0..g.nq {
            for &d in &face_mobility {
                kappa_p_phys.push(params.gamma * d);
            }
        }

        let mut kappa_p = kappa_p_phys.clone();
        let mut kappa_q = vec![T::zero(); g.len()];
        if dissipation.stabilized {
            let theta = params.theta;
            for i in 0..g.nq {
                for j in 0..g.np - 1 {
                    let f = g.p_face_index(i, j);
                    let alpha = if j == 0 || j + 1 == g.np - 1 { T::one() } else { T::lit(0.5) };
                    let w = force[g.index(i, j)].abs();
                    let need = g.hp * alpha * w * (dh_p[f].abs() / half_theta).exp() / theta;
                    kappa_p[f] = kappa_p_phys[f].max(need);
                }
                for j in 0..g.np {
                    let k = g.index(i, j);
                    kappa_q[k] = g.hq * velocity[k].abs() * (dh_q[k].abs() / half_theta).exp() / (T::lit(2.0) * theta);
                }
            }
        }

        Ok(KineticOperator {
            grid,
            params,
            potential,
            variant,
            dissipation,
            h,
            velocity,
            force,
            dh_p,
            dh_q,
            wp_minus,
            wp_plus,
            wq_minus,
            wq_plus,
            kappa_p,
            kappa_q,
            drift_perturbation: T::zero(),
        })
    }

    /// Scales the `r`-column of `M` in the density equation by `1 + eps`.
    /// Exists only to show that the degeneracy check notices a broken operator.
    #[doc(hidden)]
    pub fn set_drift_perturbation(&mut self, eps: T) {
        self.drift_perturbation = eps;
    }

    /// Hamiltonian sampled at cell centres.
    pub fn hamiltonian_cells(&self) -> &[T] {
        &self.h
    }

    /// Exponentially fitted face densities on momentum and position faces.
    pub fn face_densities(&self, rho: &[T]) -> (Vec<T>, Vec<T>) {
        let g = &self.grid;
        let mut fp = Vec::with_capacity(g.p_faces());
        for i in 0..g.nq {
            for j in 0..g.np - 1 {
                let f = g.p_face_index(i, j);
                let a = rho[g.index(i, j)] * self.wp_minus[f];
                let b = rho[g.index(i, j + 1)] * self.wp_plus[f];
                fp.push(log_mean(a, b));
            }
        }
        let mut fq = vec![T::zero(); g.len()];
        if self.dissipation.stabilized {
            for i in 0..g.nq {
                let ip = if i + 1 == g.nq { 0 } else { i + 1 };
                for j in 0..g.np {
                    let k = g.index(i, j);
                    let a = rho[k] * self.wq_minus[k];
                    let b = rho[g.index(ip, j)] * self.wq_plus[k];
                    fq[k] = log_mean(a, b);
                }
            }
        }
        (fp, fq)
    }
}

/// `E(ρ, e) = Σ H ρ · cellVolume + e`.
pub fn energy_functional<T: Real>(op: &KineticOperator<T>, state: &State<T>) -> T {
    op.grid.inner(&op.h, &state.rho) + state.e
}

/// `S(ρ, e) = −θ Σ ρ log ρ · cellVolume + e` with `0 log 0 = 0`.
pub fn entropy_functional<T: Real>(grid: &PhaseGrid<T>, params: &ModelParams<T>, state: &State<T>) -> T {
    let s: T = state.rho.iter().map(|&x| xlogx(x)).sum();
    -params.theta * s * grid.cell_volume() + state.e
}

/// `δE/δz = (H, 1)`.
pub fn gradient_energy<T: Real>(op: &KineticOperator<T>) -> CotangentVector<T> {
    CotangentVector { xi: op.h.clone(), r: T::one() }
}

/// `δS/δz = (−θ(log ρ + 1), 1)`, logarithm floored at [`LOG_FLOOR`].
///
/// Fails when more than half of the cells are below [`DENSITY_FLOOR`].
pub fn gradient_entropy<T: Real>(params: &ModelParams<T>, state: &State<T>) -> Result<CotangentVector<T>> {
    let floor = T::lit(LOG_FLOOR);
    let below = state.rho.iter().filter(|&&x| !(x >= T::lit(DENSITY_FLOOR))).count();
    if 2 * below > state.rho.len() {
        return Err(Error::DegenerateState { below, total: state.rho.len() });
    }
    let xi = state
        .rho
        .iter()
        .map(|&x| -params.theta * (x.max(floor).ln() + T::one()))
        .collect();
    Ok(CotangentVector { xi, r: T::one() })
}

/// `L(z)(ξ, r) = (div(ρ J ∇ξ), 0)`.
pub fn apply_poisson<T: Real>(grid: &PhaseGrid<T>, state: &State<T>, v: &CotangentVector<T>) -> Tangent<T> {
    let dq: Vec<T> = grid.grad_q(&v.xi);
    let dp: Vec<T> = grid.grad_p(&v.xi);
    let a: Vec<T> = state.rho.iter().zip(&dp).map(|(&r, &x)| r * x).collect();
    let b: Vec<T> = state.rho.iter().zip(&dq).map(|(&r, &x)| r * x).collect();
    let ta = grid.grad_q_adjoint(&a);
    let tb = grid.grad_p_adjoint(&b);
    Tangent { rho: ta.iter().zip(&tb).map(|(&x, &y)| x - y).collect(), e: T::zero() }
}

/// `M(z)(ξ, r)`; see the module documentation for the discrete form.
pub fn apply_dissipative<T: Real>(op: &KineticOperator<T>, state: &State<T>, v: &CotangentVector<T>) -> Tangent<T> {
    let g = &op.grid;
    let (fp, fq) = op.face_densities(&state.rho);
    let dxi_p = g.face_diff_p(&v.xi);
    let r_drift = v.r * (T::one() + op.drift_perturbation);
    let mut out = vec![T::zero(); g.len()];
    let mut e = T::zero();

    let mut flux = Vec::with_capacity(g.p_faces());
    for f in 0..g.p_faces() {
        let w = op.kappa_p[f] * fp[f];
        flux.push(-w * (dxi_p[f] - r_drift * op.dh_p[f]) / g.hp);
        e -= w * (op.dh_p[f] / g.hp) * (dxi_p[f] - v.r * op.dh_p[f]) / g.hp;
    }
    g.add_div_p(&flux, &mut out);

    if op.dissipation.stabilized {
        let dxi_q = g.face_diff_q(&v.xi);
        let mut flux = Vec::with_capacity(g.len());
        for f in 0..g.len() {
            let w = op.kappa_q[f] * fq[f];
            flux.push(-w * (dxi_q[f] - r_drift * op.dh_q[f]) / g.hq);
            e -= w * (op.dh_q[f] / g.hq) * (dxi_q[f] - v.r * op.dh_q[f]) / g.hq;
        }
        g.add_div_q(&flux, &mut out);
    }
    Tangent { rho: out, e: e * g.cell_volume() }
}

/// `{F, G} = ⟨v₁, L v₂⟩`.
pub fn poisson_bracket<T: Real>(
    grid: &PhaseGrid<T>,
    state: &State<T>,
    v1: &CotangentVector<T>,
    v2: &CotangentVector<T>,
) -> T {
    pairing(grid, v1, &apply_poisson(grid, state, v2))
}

/// `[F, G] = ⟨v₁, M v₂⟩`.
pub fn dissipative_bracket<T: Real>(
    op: &KineticOperator<T>,
    state: &State<T>,
    v1: &CotangentVector<T>,
    v2: &CotangentVector<T>,
) -> T {
    pairing(&op.grid, v1, &apply_dissipative(op, state, v2))
}

/// Face-quadrature form `Σ_f κ_f ρ_f g₁ g₂ · cellVolume` of the dissipative bracket.
pub fn dissipative_bracket_faces<T: Real>(
    op: &KineticOperator<T>,
    state: &State<T>,
    v1: &CotangentVector<T>,
    v2: &CotangentVector<T>,
) -> T {
    let g = &op.grid;
    let (fp, fq) = op.face_densities(&state.rho);
    let (a, b) = (g.face_diff_p(&v1.xi), g.face_diff_p(&v2.xi));
    let mut sum = T::zero();
    for f in 0..g.p_faces() {
        let g1 = (a[f] - v1.r * op.dh_p[f]) / g.hp;
        let g2 = (b[f] - v2.r * op.dh_p[f]) / g.hp;
        sum += op.kappa_p[f] * fp[f] * g1 * g2;
    }
    if op.dissipation.stabilized {
        let (a, b) = (g.face_diff_q(&v1.xi), g.face_diff_q(&v2.xi));
        for f in 0..g.len() {
            let g1 = (a[f] - v1.r * op.dh_q[f]) / g.hq;
            let g2 = (b[f] - v2.r * op.dh_q[f]) / g.hq;
            sum += op.kappa_q[f] * fq[f] * g1 * g2;
        }
    }
    sum * g.cell_volume()
}

/// Degeneracy residuals `(‖L δS‖, ‖M δE‖)` in the grid norm.
pub fn degeneracy_residuals<T: Real>(op: &KineticOperator<T>, state: &State<T>) -> Result<(T, T)> {
    let ds = gradient_entropy(&op.params, state)?;
    let de = gradient_energy(op);
    let l = apply_poisson(&op.grid, state, &ds);
    let m = apply_dissipative(op, state, &de);
    Ok((tangent_norm(&op.grid, &l), tangent_norm(&op.grid, &m)))
}

/// Size of the two cancelling columns in `M δE`: `‖M(H, 0)‖ + ‖M(0, 1)‖`.
pub fn degeneracy_scale<T: Real>(op: &KineticOperator<T>, state: &State<T>) -> T {
    let n = op.grid.len();
    let a = apply_dissipative(op, state, &CotangentVector { xi: op.h.clone(), r: T::zero() });
    let b = apply_dissipative(op, state, &CotangentVector { xi: vec![T::zero(); n], r: T::one() });
    tangent_norm(&op.grid, &a) + tangent_norm(&op.grid, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn operator(variant: Variant, stabilized: bool) -> KineticOperator<f64> {
        let grid = PhaseGrid::new(16, 16, 6.0, 5.0).unwrap();
        let params = ModelParams { gamma: 0.5, ..ModelParams::unit() };
        KineticOperator::new(grid, params, Potential::Harmonic { stiffness: 1.0 }, variant, Dissipation { stabilized })
            .unwrap()
    }

    fn random_state(op: &KineticOperator<f64>, rng: &mut SplitMix64) -> State<f64> {
        let mut rho: Vec<f64> = (0..op.grid.len()).map(|_| rng.uniform(0.1, 1.0)).collect();
        let mass = op.grid.integrate(&rho);
        rho.iter_mut().for_each(|x| *x /= mass);
        State::new(rho, rng.uniform(-1.0, 1.0))
    }

    fn random_cotangent(n: usize, rng: &mut SplitMix64) -> CotangentVector<f64> {
        CotangentVector { xi: (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect(), r: rng.uniform(-1.0, 1.0) }
    }

    #[test]
    fn log_mean_basics() {
        assert_eq!(log_mean(0.0f64, 0.0), 0.0);
        assert!((log_mean(2.0f64, 2.0) - 2.0).abs() < 1e-15);
        let (a, b) = (1.0f64, 1.0 + 1e-4);
        let exact = (b - a) / (b.ln() - a.ln());
        assert!((log_mean(a, b) / exact - 1.0).abs() < 1e-10);
        let (a, b) = (0.3f64, 2.0);
        assert!((log_mean(a, b) * (b.ln() - a.ln()) - (b - a)).abs() < 1e-15);
        assert!(log_mean(0.0f64, 1.0) > 0.0);
        assert!(log_mean(1.0f64, 3.0) <= 2.0);
    }

    #[test]
    fn log_mean_series_times_log_difference() {
        for d in [1e-9f64, 1e-5, 3e-3, 9e-3] {
            let (a, b) = (0.7f64, 0.7 * d.exp());
            let lhs = log_mean(a, b) * (b.ln() - a.ln());
            assert!((lhs - (b - a)).abs() <= 1e-15 * b, "{d}: {lhs} vs {}", b - a);
        }
    }

    #[test]
    fn energy_and_entropy_linear_in_e() {
        let op = operator(Variant::Dh, true);
        let mut rng = SplitMix64::new(1);
        let s = random_state(&op, &mut rng);
        let shifted = State::new(s.rho.clone(), s.e + 5.0);
        assert!((energy_functional(&op, &shifted) - energy_functional(&op, &s) - 5.0).abs() < 1e-12);
        let shifted = State::new(s.rho.clone(), s.e + 2.0);
        let d = entropy_functional(&op.grid, &op.params, &shifted) - entropy_functional(&op.grid, &op.params, &s);
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_uniform_density() {
        let op = operator(Variant::Dh, true);
        let area = op.grid.lq * 2.0 * op.grid.pmax;
        let s = State::new(vec![1.0 / area; op.grid.len()], 0.0);
        assert!((entropy_functional(&op.grid, &op.params, &s) - area.ln()).abs() < 1e-12);
        let mut rho = s.rho.clone();
        rho[3] = 0.0;
        assert!(entropy_functional(&op.grid, &op.params, &State::new(rho, 0.0)).is_finite());
    }

    #[test]
    fn point_mass_energy() {
        let op = operator(Variant::Dmr, true);
        let k = op.grid.index(3, 11);
        let mut rho = vec![0.0; op.grid.len()];
        rho[k] = 1.0 / op.grid.cell_volume();
        let e = energy_functional(&op, &State::new(rho, 0.0));
        assert!((e - op.h[k]).abs() < 1e-12 * op.h[k]);
    }

    #[test]
    fn entropy_gradient_examples() {
        let op = operator(Variant::Dh, true);
        let s = State::new(vec![(-1.0f64).exp(); op.grid.len()], 0.0);
        let g = gradient_entropy(&op.params, &s).unwrap();
        assert!(g.xi.iter().all(|x| x.abs() < 1e-15));
        assert_eq!(g.r, 1.0);
        let mut rho = vec![0.0; op.grid.len()];
        rho[0] = 1.0;
        assert!(matches!(gradient_entropy(&op.params, &State::new(rho, 0.0)), Err(Error::DegenerateState { .. })));
    }

    #[test]
    fn energy_gradient_rest_energy_row() {
        let grid = PhaseGrid::<f64>::new(8, 8, 1.0, 1.0).unwrap();
        let params = ModelParams { m: 2.0, ..ModelParams::unit() }.with_c(SpeedOfLight::Finite(3.0));
        let op = KineticOperator::new(grid, params, Potential::Zero, Variant::Dh, Dissipation::default()).unwrap();
        let g = gradient_energy(&op);
        assert_eq!(g.r, 1.0);
        for i in 0..8 {
            // Cells adjacent to p = 0 carry c·sqrt(m²c² + p²) ≈ mc².
            let h = g.xi[grid.index(i, 4)];
            let expected = 3.0 * (36.0f64 + grid.p(4).powi(2)).sqrt();
            assert!((h - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_symmetries() {
        for variant in [Variant::Dh, Variant::Dmr] {
            for stabilized in [false, true] {
                let op = operator(variant, stabilized);
                let mut rng = SplitMix64::new(5);
                let s = random_state(&op, &mut rng);
                for _ in 0..20 {
                    let v1 = random_cotangent(op.grid.len(), &mut rng);
                    let v2 = random_cotangent(op.grid.len(), &mut rng);
                    let a = poisson_bracket(&op.grid, &s, &v1, &v2) + poisson_bracket(&op.grid, &s, &v2, &v1);
                    assert!(a.abs() < 1e-12, "{a}");
                    let m12 = dissipative_bracket(&op, &s, &v1, &v2);
                    let m21 = dissipative_bracket(&op, &s, &v2, &v1);
                    assert!((m12 - m21).abs() < 1e-12 * (1.0 + m12.abs()));
                    let faces = dissipative_bracket_faces(&op, &s, &v1, &v2);
                    assert!((m12 - faces).abs() < 1e-11 * (1.0 + m12.abs()));
                    assert!(dissipative_bracket(&op, &s, &v1, &v1) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn friction_kills_energy_gradient() {
        let op = operator(Variant::Dh, true);
        let mut rng = SplitMix64::new(9);
        let s = random_state(&op, &mut rng);
        let t = apply_dissipative(&op, &s, &gradient_energy(&op));
        assert!(t.max_abs() == 0.0);
        let mut broken = op.clone();
        broken.set_drift_perturbation(1e-6);
        let t = apply_dissipative(&broken, &s, &gradient_energy(&broken));
        assert!(tangent_norm(&op.grid, &t) > 1e-9 * degeneracy_scale(&op, &s));
    }

    #[test]
    fn poisson_of_constant_vanishes_and_conserves_mass() {
        let op = operator(Variant::Dh, true);
        let mut rng = SplitMix64::new(2);
        let s = random_state(&op, &mut rng);
        let c = CotangentVector { xi: vec![3.0; op.grid.len()], r: 0.7 };
        assert!(apply_poisson(&op.grid, &s, &c).max_abs() == 0.0);
        let v = random_cotangent(op.grid.len(), &mut rng);
        let t = apply_poisson(&op.grid, &s, &v);
        assert!(op.grid.integrate(&t.rho).abs() < 1e-12);
        let t = apply_dissipative(&op, &s, &v);
        assert!(op.grid.integrate(&t.rho).abs() < 1e-12);
    }

    #[test]
    fn uniform_state_without_potential_is_degenerate() {
        let grid = PhaseGrid::new(16, 16, 4.0, 4.0).unwrap();
        let op = KineticOperator::new(grid, ModelParams::unit(), Potential::Zero, Variant::Dh, Dissipation::default())
            .unwrap();
        let s = State::new(vec![1.0 / 32.0; grid.len()], 0.0);
        let (l, m) = degeneracy_residuals(&op, &s).unwrap();
        assert!(l <= 1e-12);
        assert!(m == 0.0);
    }
}
