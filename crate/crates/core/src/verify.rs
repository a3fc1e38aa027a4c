//! Randomized structural checks of the discrete operators and the model.
//!
//! Every check draws its samples from one seeded [`SplitMix64`] stream, so a
//! report is reproducible from `(config, seed)`.

use std::fmt;

use crate::error::Result;
use crate::generic::{
    apply_dissipative, apply_poisson, cotangent_norm, degeneracy_scale, energy_functional, entropy_functional,
    gradient_energy, gradient_entropy, pairing, tangent_norm, CotangentVector, Dissipation, KineticOperator, State,
    Tangent,
};
use crate::grid::PhaseGrid;
use crate::heat::{generalized_generic_rhs, heat_entropy_gradient, heat_rhs, HeatGrid, HeatState};
use crate::jacobi::{jacobi_residual_fd, DenseMatrix};
use crate::kfp::kfp_rhs;
use crate::model::{
    diffusion_matrix, div_mobility_drift, grad_p_hamiltonian, hamiltonian, ModelParams, Potential, SpeedOfLight,
    Variant,
};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub grid: PhaseGrid<f64>,
    pub params: ModelParams<f64>,
    pub potential: Potential<f64>,
    pub seed: u64,
    /// Sample count for the positivity and pointwise model checks.
    pub samples: usize,
    /// Pairs per symmetry check and states per identity check.
    pub pairs: usize,
    /// Extra relative change in the density equation's `r`-column of `M`.
    #[doc(hidden)]
    pub drift_perturbation: f64,
}

impl VerifyConfig {
    pub fn new(grid: PhaseGrid<f64>, params: ModelParams<f64>, potential: Potential<f64>, seed: u64) -> Self {
        VerifyConfig { grid, params, potential, seed, samples: 10_000, pairs: 100, drift_perturbation: 0.0 }
    }

    /// 32×32 grid on `[−4, 4) × [−6, 6]`, harmonic potential, unit constants, `γ = ½`.
    pub fn standard(seed: u64) -> Self {
        let grid = PhaseGrid::new(32, 32, 8.0, 6.0).expect("valid grid");
        let params = ModelParams { gamma: 0.5, ..ModelParams::unit() };
        Self::new(grid, params, Potential::Harmonic { stiffness: 1.0 }, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// Pass when `measured ≤ tol`.
    AtMost(f64),
    /// Pass when `measured ≥ tol`.
    AtLeast(f64),
    /// Pass when `measured < tol`.
    Below(f64),
    /// Reported only.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(t) => self.measured <= t,
            Bound::AtLeast(t) => self.measured >= t,
            Bound::Below(t) => self.measured < t,
            Bound::Info => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verification suite, seed {}", self.seed)?;
        for c in &self.checks {
            let (status, bound) = match c.bound {
                Bound::AtMost(t) => (if c.passed() { "PASS" } else { "FAIL" }, format!("<= {t:.1e}")),
                Bound::AtLeast(t) => (if c.passed() { "PASS" } else { "FAIL" }, format!(">= {t:.1e}")),
                Bound::Below(t) => (if c.passed() { "PASS" } else { "FAIL" }, format!("<  {t:.1e}")),
                Bound::Info => ("INFO", String::new()),
            };
            writeln!(f, "{status}  {:<34} {:>12.4e}  {bound}", c.name, c.measured)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn random_state(grid: &PhaseGrid<f64>, rng: &mut SplitMix64) -> State<f64> {
    let mut rho: Vec<f64> = (0..grid.len()).map(|_| rng.uniform(0.1, 1.0)).collect();
    let mass = grid.integrate(&rho);
    rho.iter_mut().for_each(|x| *x /= mass);
    State::new(rho, rng.uniform(-1.0, 1.0))
}

/// Smooth positive density, periodic in `q`, with random centre, widths and
/// a `q`-dependent momentum offset.
fn smooth_state(grid: &PhaseGrid<f64>, rng: &mut SplitMix64) -> State<f64> {
    let q0 = rng.uniform(-0.5, 0.5) * grid.lq;
    let p0 = rng.uniform(-0.2, 0.2) * grid.pmax;
    let a = rng.uniform(0.5, 1.5);
    let sp = rng.uniform(0.15, 0.3) * grid.pmax;
    let shift = rng.uniform(0.0, 0.1) * grid.pmax;
    let k = 2.0 * std::f64::consts::PI / grid.lq;
    let mut rho = grid.sample(|q, p| {
        let b = (p - p0 - shift * (k * q).sin()) / sp;
        (a * (k * (q - q0)).cos() - b * b / 2.0).exp()
    });
    let mass = grid.integrate(&rho);
    rho.iter_mut().for_each(|x| *x /= mass);
    State::new(rho, rng.uniform(-1.0, 1.0))
}

fn random_cotangent(grid: &PhaseGrid<f64>, rng: &mut SplitMix64) -> CotangentVector<f64> {
    CotangentVector { xi: (0..grid.len()).map(|_| rng.uniform(-1.0, 1.0)).collect(), r: rng.uniform(-1.0, 1.0) }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num.abs()
    }
}

fn random_momentum(params: &ModelParams<f64>, rng: &mut SplitMix64) -> f64 {
    let c = params.c.value().unwrap_or(1.0);
    rng.uniform(-10.0, 10.0) * params.m * c
}

/// Runs every check. Variants are `{DMR, DH}` for finite `c` and `{Classical}` otherwise.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut rng = SplitMix64::new(cfg.seed);
    let grid = &cfg.grid;
    let mut checks = Vec::new();
    let mut push = |name: String, measured: f64, bound: Bound| checks.push(Check { name, measured, bound });

    let variants: &[Variant] =
        if cfg.params.c.is_finite() { &[Variant::Dmr, Variant::Dh] } else { &[Variant::Classical] };
    let states: Vec<State<f64>> = (0..5).map(|_| random_state(grid, &mut rng)).collect();

    // Antisymmetry of L.
    let mut worst: f64 = 0.0;
    for s in 0..cfg.pairs {
        let state = &states[s % states.len()];
        let (a, b) = (random_cotangent(grid, &mut rng), random_cotangent(grid, &mut rng));
        let (la, lb) = (apply_poisson(grid, state, &a), apply_poisson(grid, state, &b));
        let sum = pairing(grid, &a, &lb) + pairing(grid, &b, &la);
        let scale = cotangent_norm(grid, &a) * tangent_norm(grid, &lb) + cotangent_norm(grid, &b) * tangent_norm(grid, &la);
        worst = worst.max(ratio(sum.abs(), scale));
    }
    push("L antisymmetry".into(), worst, Bound::AtMost(1e-12));

    for &variant in variants {
        let mut op = KineticOperator::new(*grid, cfg.params, cfg.potential, variant, Dissipation::default())?;
        op.set_drift_perturbation(cfg.drift_perturbation);
        let tag = variant.name();

        let mut worst: f64 = 0.0;
        for s in 0..cfg.pairs {
            let state = &states[s % states.len()];
            let (a, b) = (random_cotangent(grid, &mut rng), random_cotangent(grid, &mut rng));
            let (ma, mb) = (apply_dissipative(&op, state, &a), apply_dissipative(&op, state, &b));
            let diff = pairing(grid, &a, &mb) - pairing(grid, &b, &ma);
            let scale =
                cotangent_norm(grid, &a) * tangent_norm(grid, &mb) + cotangent_norm(grid, &b) * tangent_norm(grid, &ma);
            worst = worst.max(ratio(diff.abs(), scale));
        }
        push(format!("M symmetry ({tag})"), worst, Bound::AtMost(1e-12));

        let mut least = f64::INFINITY;
        for s in 0..cfg.samples {
            let state = &states[s % states.len()];
            let v = random_cotangent(grid, &mut rng);
            let mv = apply_dissipative(&op, state, &v);
            least = least.min(ratio(pairing(grid, &v, &mv), cotangent_norm(grid, &v) * tangent_norm(grid, &mv)));
        }
        push(format!("M positive semidefinite ({tag})"), least, Bound::AtLeast(-1e-14));

        let de = gradient_energy(&op);
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.pairs / 5 {
            let state = smooth_state(grid, &mut rng);
            let m = tangent_norm(grid, &apply_dissipative(&op, &state, &de));
            worst = worst.max(ratio(m, degeneracy_scale(&op, &state)));
        }
        push(format!("M dE degeneracy ({tag})"), worst, Bound::AtMost(1e-12));

        let mut worst: f64 = 0.0;
        for _ in 0..cfg.pairs / 5 {
            let state = random_state(grid, &mut rng);
            let ds = gradient_entropy(&op.params, &state)?;
            let l = apply_poisson(grid, &state, &de);
            let m = apply_dissipative(&op, &state, &ds);
            let direct = kfp_rhs(&op, &state);
            let diff = direct.sub(&l.add(&m)).max_abs();
            worst = worst.max(ratio(diff, l.max_abs() + m.max_abs()));
        }
        push(format!("assembly identity ({tag})"), worst, Bound::AtMost(1e-10));

        let state = smooth_state(grid, &mut rng);
        let ds = gradient_entropy(&op.params, &state)?;
        let lds = tangent_norm(grid, &apply_poisson(grid, &state, &ds));
        push(format!("L dS residual ({tag})"), lds, Bound::Info);
    }

    // Pointwise model checks.
    let p = &cfg.params;
    let potential = &cfg.potential;
    for &variant in variants {
        let tag = variant.name();
        let (mut fdr, mut psd, mut speed, mut div) = (0.0f64, f64::INFINITY, 0.0f64, f64::NEG_INFINITY);
        for _ in 0..cfg.samples {
            let pm = random_momentum(p, &mut rng);
            let v = grad_p_hamiltonian(&[pm], p)?[0];
            let d = diffusion_matrix(&[pm], variant, p)?;
            if variant != Variant::Dmr {
                let err = (d.apply(&[v])[0] * p.m - pm).abs() / p.m;
                fdr = fdr.max(err / (1.0 + pm.abs() / p.m));
            }
            let x = rng.uniform(-1.0, 1.0);
            psd = psd.min(ratio(d.quadratic_form(&[x]), x * x));
            if let SpeedOfLight::Finite(c) = p.c {
                speed = speed.max(v.abs() / c);
            }
            if variant == Variant::Dmr {
                div = div.max(div_mobility_drift(&[pm], variant, p)? - p.d as f64 / p.m);
            }
        }
        if variant != Variant::Dmr {
            push(format!("fluctuation-dissipation ({tag})"), fdr, Bound::AtMost(1e-12));
        }
        push(format!("diffusion PSD ({tag})"), psd, Bound::AtLeast(-1e-14));
        if p.c.is_finite() {
            push(format!("velocity below c ({tag})"), speed, Bound::Below(1.0));
        }
        if variant == Variant::Dmr {
            push("DMR drift divergence bound".into(), div, Bound::AtMost(1e-14));
        }
    }

    // Classical limit. The rest energy m c² is subtracted from H, which
    // cancels about log10(c²) digits, so the energy comparison uses c = 1e4.
    let cl = p.with_c(SpeedOfLight::Infinite);
    let fast = p.with_c(SpeedOfLight::Finite(1e6));
    let medium = p.with_c(SpeedOfLight::Finite(1e4));
    let (mut err_v, mut err_h) = (0.0f64, 0.0f64);
    for _ in 0..cfg.pairs {
        let (q, pm) = (rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0) * p.m);
        let v_rel = grad_p_hamiltonian(&[pm], &fast)?[0];
        let v_cl = grad_p_hamiltonian(&[pm], &cl)?[0];
        err_v = err_v.max((v_rel - v_cl).abs() / (1.0 + v_cl.abs()));
        let h_rel = hamiltonian(&[q], &[pm], &medium, potential)? - p.m * 1e8;
        let h_cl = hamiltonian(&[q], &[pm], &cl, potential)?;
        err_h = err_h.max((h_rel - h_cl).abs() / (1.0 + h_cl.abs()));
    }
    push("classical limit, velocity (c = 1e6)".into(), err_v, Bound::AtMost(1e-6));
    push("classical limit, energy (c = 1e4)".into(), err_h, Bound::AtMost(1e-6));

    let mut worst: f64 = 0.0;
    let step = 1e-6;
    for _ in 0..cfg.pairs {
        let q = rng.uniform(-2.0, 2.0);
        let fd = (potential.evaluate(&[q + step]) - potential.evaluate(&[q - step])) / (2.0 * step);
        let g = potential.gradient(&[q])[0];
        worst = worst.max((fd - g).abs() / (1.0 + g.abs()));
    }
    push("potential gradient".into(), worst, Bound::AtMost(1e-6));

    // Jacobi identity.
    let j = DenseMatrix::<f64>::canonical(1);
    let z = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
    let c: Vec<f64> = (0..9).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let q1 = |x: &[f64]| Some(c[0] * x[0] * x[0] + c[1] * x[0] * x[1] + c[2] * x[1] * x[1]);
    let q2 = |x: &[f64]| Some(c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1]);
    let q3 = |x: &[f64]| Some(c[6] * x[0] * x[1] + c[7] * x[1] * x[1] + c[8] * x[0]);
    let r = jacobi_residual_fd(&j, &q1, &q2, &q3, &z, 1e-4)?;
    push("Jacobi identity, quadratics".into(), r.residual, Bound::AtMost(1e-10));
    let constant = |_: &[f64]| Some(3.0);
    let r = jacobi_residual_fd(&j, &q1, &q2, &constant, &z, 1e-4)?;
    push("Jacobi identity, constant".into(), r.residual, Bound::AtMost(1e-12));

    let n = 4;
    let mut entries = vec![0.0; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let x = rng.uniform(-1.0, 1.0);
            entries[a * n + b] = x;
            entries[b * n + a] = -x;
        }
    }
    let l4 = DenseMatrix::new(n, entries)?;
    let cubic = |coef: Vec<f64>| {
        move |x: &[f64]| {
            let mut s = 0.0;
            let mut k = 0;
            for a in 0..4 {
                s += coef[k] * x[a];
                k += 1;
                for b in a..4 {
                    s += coef[k] * x[a] * x[b];
                    k += 1;
                    for d in b..4 {
                        s += coef[k] * x[a] * x[b] * x[d];
                        k += 1;
                    }
                }
            }
            Some(s)
        }
    };
    let mut coefs = || (0..34).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<_>>();
    let (f1, f2, f3) = (cubic(coefs()), cubic(coefs()), cubic(coefs()));
    let z4: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let r = jacobi_residual_fd(&l4, &f1, &f2, &f3, &z4, 1e-4)?;
    push("Jacobi identity, cubics (n = 4)".into(), r.residual / r.scale, Bound::AtMost(1e-4));

    // Heat assembly identity.
    if p.c.is_finite() {
        let hg = HeatGrid::new(64, 1.0)?;
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.pairs / 5 {
            let state = HeatState { rho: (0..hg.n).map(|_| rng.uniform(0.1, 2.0)).collect(), t: 0.0 };
            let direct = heat_rhs(&hg, &state, p);
            let assembled = generalized_generic_rhs(&hg, &state, &heat_entropy_gradient(&state), p);
            let diff = direct.iter().zip(&assembled).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let scale = direct.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            worst = worst.max(ratio(diff, scale));
        }
        push("heat assembly identity".into(), worst, Bound::AtMost(1e-12));
    }

    // Directional derivatives of E and S against their gradients.
    let op = KineticOperator::new(*grid, cfg.params, cfg.potential, variants[0], Dissipation::default())?;
    let de = gradient_energy(&op);
    let (mut err_e, mut err_s) = (0.0f64, 0.0f64);
    let eps = 1e-6;
    for _ in 0..10 {
        let state = random_state(grid, &mut rng);
        let dir = Tangent {
            rho: state.rho.iter().map(|&x| 0.5 * x * rng.uniform(-1.0, 1.0)).collect(),
            e: rng.uniform(-1.0, 1.0),
        };
        let plus = state.axpy(eps, &dir);
        let minus = state.axpy(-eps, &dir);
        let fd_e = (energy_functional(&op, &plus) - energy_functional(&op, &minus)) / (2.0 * eps);
        let an_e = pairing(grid, &de, &dir);
        err_e = err_e.max((fd_e - an_e).abs() / (1.0 + an_e.abs()));
        let ds = gradient_entropy(p, &state)?;
        let fd_s = (entropy_functional(grid, p, &plus) - entropy_functional(grid, p, &minus)) / (2.0 * eps);
        let an_s = pairing(grid, &ds, &dir);
        err_s = err_s.max((fd_s - an_s).abs() / (1.0 + an_s.abs()));
    }
    push("energy gradient".into(), err_e, Bound::AtMost(1e-6));
    push("entropy gradient".into(), err_s, Bound::AtMost(1e-6));

    Ok(VerifyReport { seed: cfg.seed, checks })
}
