//! Physical model: parameters, potentials, Hamiltonians, diffusion matrices
//! and the stationary Maxwellian.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::scalar::{all_finite, Real};

/// Speed of light; `Infinite` selects the classical (Newtonian) formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedOfLight<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> SpeedOfLight<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, SpeedOfLight::Finite(_))
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            SpeedOfLight::Finite(c) => Some(c),
            SpeedOfLight::Infinite => None,
        }
    }
}

impl<T: Real> fmt::Display for SpeedOfLight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeedOfLight::Finite(c) => write!(f, "{c}"),
            SpeedOfLight::Infinite => write!(f, "inf"),
        }
    }
}

/// Physical constants shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub m: T,
    pub c: SpeedOfLight<T>,
    pub gamma: T,
    pub theta: T,
    pub nu: T,
    pub d: usize,
}

impl<T: Real> ModelParams<T> {
    pub fn new(m: T, c: SpeedOfLight<T>, gamma: T, theta: T, nu: T, d: usize) -> Result<Self> {
        let p = ModelParams { m, c, gamma, theta, nu, d };
        p.validate()?;
        Ok(p)
    }

    /// All constants equal to one, `d = 1`, finite `c`.
    pub fn unit() -> Self {
        ModelParams {
            m: T::one(),
            c: SpeedOfLight::Finite(T::one()),
            gamma: T::one(),
            theta: T::one(),
            nu: T::one(),
            d: 1,
        }
    }

    pub fn with_c(mut self, c: SpeedOfLight<T>) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn positive<T: Real>(name: &'static str, x: T) -> Result<()> {
            if x.is_finite() && x > T::zero() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {x}")))
            }
        }
        positive("m", self.m)?;
        positive("gamma", self.gamma)?;
        positive("theta", self.theta)?;
        positive("nu", self.nu)?;
        if let SpeedOfLight::Finite(c) = self.c {
            positive("c", c)?;
        }
        if self.d == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        Ok(())
    }

    pub fn is_classical(&self) -> bool {
        !self.c.is_finite()
    }

    /// Kinetic part of the Hamiltonian for a momentum of squared norm `p2`.
    #[inline]
    pub(crate) fn kinetic(&self, p2: T) -> T {
        match self.c {
            SpeedOfLight::Finite(c) => c * (self.m * self.m * c * c + p2).sqrt(),
            SpeedOfLight::Infinite => p2 / (T::lit(2.0) * self.m),
        }
    }
}

/// External potential `V(q) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential<T> {
    Zero,
    /// `V(q) = k |q|² / 2`.
    Harmonic { stiffness: T },
    /// `V(q) = a Σᵢ (1 − cos(κ qᵢ))`.
    Cosine { amplitude: T, wavenumber: T },
}

impl<T: Real> Potential<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Zero => Ok(()),
            Potential::Harmonic { stiffness } => {
                if stiffness.is_finite() && stiffness >= T::zero() {
                    Ok(())
                } else {
                    Err(Error::invalid("stiffness", format!("must be >= 0, got {stiffness}")))
                }
            }
            Potential::Cosine { amplitude, wavenumber } => {
                if !(amplitude.is_finite() && amplitude >= T::zero()) {
                    Err(Error::invalid("amplitude", format!("must be >= 0, got {amplitude}")))
                } else if !wavenumber.is_finite() {
                    Err(Error::invalid("wavenumber", "must be finite"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn evaluate(&self, q: &[T]) -> T {
        match *self {
            Potential::Zero => T::zero(),
            Potential::Harmonic { stiffness } => {
                T::lit(0.5) * stiffness * q.iter().fold(T::zero(), |a, &x| a + x * x)
            }
            Potential::Cosine { amplitude, wavenumber } => {
                q.iter().fold(T::zero(), |a, &x| a + amplitude * (T::one() - (wavenumber * x).cos()))
            }
        }
    }

    pub fn gradient(&self, q: &[T]) -> Vec<T> {
        match *self {
            Potential::Zero => vec![T::zero(); q.len()],
            Potential::Harmonic { stiffness } => q.iter().map(|&x| stiffness * x).collect(),
            Potential::Cosine { amplitude, wavenumber } => {
                q.iter().map(|&x| amplitude * wavenumber * (wavenumber * x).sin()).collect()
            }
        }
    }

    #[inline]
    pub(crate) fn value1(&self, q: T) -> T {
        self.evaluate(std::slice::from_ref(&q))
    }
}

/// Which kinetic Fokker-Planck model is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Diffusion matrix equal to the identity.
    Dmr,
    /// Momentum-dependent diffusion matrix with `D ∇ₚH = p/m`.
    Dh,
    /// Newtonian Kramers equation (`c` infinite).
    Classical,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Dmr => "dmr",
            Variant::Dh => "dh",
            Variant::Classical => "classical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dmr" => Some(Variant::Dmr),
            "dh" => Some(Variant::Dh),
            "classical" => Some(Variant::Classical),
            _ => None,
        }
    }

    pub fn check<T: Real>(&self, params: &ModelParams<T>) -> Result<()> {
        let ok = match self {
            Variant::Dmr | Variant::Dh => params.c.is_finite(),
            Variant::Classical => !params.c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::VariantMismatch { variant: self.name().into(), c: params.c.to_string() })
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense symmetric `d × d` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    pub dim: usize,
    pub entries: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![T::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = T::one();
        }
        SymMatrix { dim, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.dim + j]
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| (0..self.dim).fold(T::zero(), |a, j| a + self.get(i, j) * x[j]))
            .collect()
    }

    pub fn quadratic_form(&self, x: &[T]) -> T {
        let y = self.apply(x);
        x.iter().zip(&y).fold(T::zero(), |a, (&u, &v)| a + u * v)
    }
}

fn check_vec<T: Real>(v: &[T], what: &'static str) -> Result<()> {
    if all_finite(v) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn sq<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |a, &x| a + x * x)
}

/// `H(q, p) = c sqrt(m²c² + |p|²) + V(q)`, or `|p|²/2m + V(q)` when `c` is infinite.
pub fn hamiltonian<T: Real>(q: &[T], p: &[T], params: &ModelParams<T>, potential: &Potential<T>) -> Result<T> {
    check_vec(q, "hamiltonian")?;
    check_vec(p, "hamiltonian")?;
    if q.len() != p.len() {
        return Err(Error::Dimension { expected: q.len(), found: p.len() });
    }
    Ok(params.kinetic(sq(p)) + potential.evaluate(q))
}

/// Relativistic velocity `c p / sqrt(m²c² + |p|²)`; `p/m` in the classical case.
pub fn grad_p_hamiltonian<T: Real>(p: &[T], params: &ModelParams<T>) -> Result<Vec<T>> {
    check_vec(p, "grad_p_hamiltonian")?;
    let scale = match params.c {
        SpeedOfLight::Finite(c) => c / (params.m * params.m * c * c + sq(p)).sqrt(),
        SpeedOfLight::Infinite => T::one() / params.m,
    };
    Ok(p.iter().map(|&x| x * scale).collect())
}

/// Diffusion matrix: identity for DMR and Classical,
/// `(mc/s)(I + p⊗p/(m²c²))` with `s = sqrt(m²c² + |p|²)` for DH.
pub fn diffusion_matrix<T: Real>(p: &[T], variant: Variant, params: &ModelParams<T>) -> Result<SymMatrix<T>> {
    check_vec(p, "diffusion_matrix")?;
    variant.check(params)?;
    let d = p.len();
    match (variant, params.c) {
        (Variant::Dh, SpeedOfLight::Finite(c)) => {
            let mc = params.m * c;
            let s = (mc * mc + sq(p)).sqrt();
            let pre = mc / s;
            let mut m = SymMatrix::identity(d);
            for i in 0..d {
                for j in 0..d {
                    m.entries[i * d + j] = pre * (m.entries[i * d + j] + p[i] * p[j] / (mc * mc));
                }
            }
            Ok(m)
        }
        _ => Ok(SymMatrix::identity(d)),
    }
}

/// Drift `𝔻 ∇ₚH`.
pub fn mobility_drift<T: Real>(p: &[T], variant: Variant, params: &ModelParams<T>) -> Result<Vec<T>> {
    variant.check(params)?;
    match variant {
        Variant::Dh => {
            check_vec(p, "mobility_drift")?;
            Ok(p.iter().map(|&x| x / params.m).collect())
        }
        Variant::Dmr | Variant::Classical => grad_p_hamiltonian(p, params),
    }
}

/// `divₚ(𝔻 ∇ₚH)`.
pub fn div_mobility_drift<T: Real>(p: &[T], variant: Variant, params: &ModelParams<T>) -> Result<T> {
    check_vec(p, "div_mobility_drift")?;
    variant.check(params)?;
    let d = T::from_usize_lossy(p.len());
    match (variant, params.c) {
        (Variant::Dmr, SpeedOfLight::Finite(c)) => {
            let s2 = params.m * params.m * c * c + sq(p);
            let s = s2.sqrt();
            Ok(c * (d / s - sq(p) / (s2 * s)))
        }
        _ => Ok(d / params.m),
    }
}

/// Discrete stationary density on a phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Maxwellian<T> {
    /// Cell values of `Z⁻¹ exp(−H/θ)`, discrete mass one.
    pub density: Vec<T>,
    /// `log Z` (the partition value itself may over- or underflow).
    pub log_partition: T,
}

impl<T: Real> Maxwellian<T> {
    pub fn partition(&self) -> T {
        self.log_partition.exp()
    }
}

/// Tail ratio `exp(−(K(Pmax) − K(0))/θ)` of the momentum truncation.
pub fn truncation_ratio<T: Real>(pmax: T, params: &ModelParams<T>) -> T {
    (-(params.kinetic(pmax * pmax) - params.kinetic(T::zero())) / params.theta).exp()
}

/// Relativistic (or classical) Maxwellian sampled at cell centres and
/// normalised by the grid quadrature.
///
/// Fails when the momentum window is too narrow for the tail to fall below
/// `1e-14` of the peak.
pub fn maxwellian<T: Real>(grid: &PhaseGrid<T>, params: &ModelParams<T>, potential: &Potential<T>) -> Result<Maxwellian<T>> {
    params.validate()?;
    let ratio = truncation_ratio(grid.pmax, params);
    if !(ratio < T::lit(1e-14)) {
        return Err(Error::Truncation { pmax: grid.pmax.as_f64(), ratio: ratio.as_f64() });
    }
    Ok(maxwellian_unchecked(grid, params, potential))
}

/// Same as [`maxwellian`] without the truncation check.
pub fn maxwellian_unchecked<T: Real>(grid: &PhaseGrid<T>, params: &ModelParams<T>, potential: &Potential<T>) -> Maxwellian<T> {
    let h: Vec<T> = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.split(k);
            params.kinetic(grid.p(j) * grid.p(j)) + potential.value1(grid.q(i))
        })
        .collect();
    let hmin = h.iter().copied().fold(T::infinity(), T::min);
    let mut density: Vec<T> = h.iter().map(|&x| (-(x - hmin) / params.theta).exp()).collect();
    let z_shifted = grid.integrate(&density);
    for r in density.iter_mut() {
        *r /= z_shifted;
    }
    Maxwellian { density, log_partition: z_shifted.ln() - hmin / params.theta }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ModelParams<f64> {
        ModelParams::unit()
    }

    #[test]
    fn hamiltonian_examples() {
        let p = unit();
        assert_eq!(hamiltonian(&[0.3], &[0.0], &p, &Potential::Zero).unwrap(), 1.0);
        let h = hamiltonian(&[0.0, 0.0], &[3.0, 4.0], &p, &Potential::Zero).unwrap();
        assert!((h - 26f64.sqrt()).abs() < 1e-15);
        let cl = ModelParams { m: 2.0, ..unit() }.with_c(SpeedOfLight::Infinite);
        assert_eq!(hamiltonian(&[0.0, 0.0], &[2.0, 0.0], &cl, &Potential::Zero).unwrap(), 1.0);
        assert!(hamiltonian(&[f64::NAN], &[0.0], &p, &Potential::Zero).is_err());
    }

    #[test]
    fn velocity_examples() {
        let p = unit();
        assert_eq!(grad_p_hamiltonian(&[0.0], &p).unwrap(), vec![0.0]);
        let v = grad_p_hamiltonian(&[1.0], &p).unwrap()[0];
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        let v = grad_p_hamiltonian(&[1e6], &p).unwrap()[0];
        assert!(v < 1.0);
        assert!((v - 1e6 / (1.0f64 + 1e12).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn diffusion_examples() {
        let p = unit();
        let d = diffusion_matrix(&[0.0, 0.0], Variant::Dh, &p).unwrap();
        assert_eq!(d, SymMatrix::identity(2));
        let d = diffusion_matrix(&[1.0], Variant::Dh, &p).unwrap();
        // Eigenvalue along p is s/(mc).
        assert!((d.get(0, 0) - 2f64.sqrt()).abs() < 1e-15);
        let d = diffusion_matrix(&[5.0, -2.0], Variant::Dmr, &p).unwrap();
        assert_eq!(d, SymMatrix::identity(2));
        assert!(diffusion_matrix(&[1.0], Variant::Classical, &p).is_err());
    }

    #[test]
    fn dh_eigenvalues() {
        let p = unit();
        let mom = [0.6, -0.8];
        let d = diffusion_matrix(&mom, Variant::Dh, &p).unwrap();
        let s = (1.0f64 + 1.0).sqrt();
        let along = d.quadratic_form(&mom) / 1.0;
        assert!((along - s).abs() < 1e-14);
        let orth = d.quadratic_form(&[0.8, 0.6]);
        assert!((orth - 1.0 / s).abs() < 1e-14);
    }

    #[test]
    fn drift_examples() {
        let p = ModelParams { m: 2.0, ..unit() }.with_c(SpeedOfLight::Finite(3.0));
        let v = mobility_drift(&[4.0, 0.0], Variant::Dh, &p).unwrap();
        assert_eq!(v, vec![2.0, 0.0]);
        for var in [Variant::Dh, Variant::Dmr] {
            assert_eq!(mobility_drift(&[0.0], var, &unit()).unwrap(), vec![0.0]);
        }
        let v = mobility_drift(&[1.0], Variant::Dmr, &unit()).unwrap()[0];
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn divergence_examples() {
        let p = ModelParams { m: 4.0, ..unit() };
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(div_mobility_drift(&[x], Variant::Dh, &p).unwrap(), 0.25);
        }
        assert!((div_mobility_drift(&[0.0], Variant::Dmr, &unit()).unwrap() - 1.0).abs() < 1e-15);
        let v = div_mobility_drift(&[1.0], Variant::Dmr, &unit()).unwrap();
        assert!((v - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        let h = 1e-5;
        let fd = (mobility_drift(&[1.0 + h], Variant::Dmr, &unit()).unwrap()[0]
            - mobility_drift(&[1.0 - h], Variant::Dmr, &unit()).unwrap()[0])
            / (2.0 * h);
        assert!((fd - v).abs() < 1e-6);
    }

    #[test]
    fn potential_gradients_match_fd() {
        let pots = [
            Potential::<f64>::Harmonic { stiffness: 1.7 },
            Potential::Cosine { amplitude: 0.4, wavenumber: 2.0 },
        ];
        for pot in pots {
            for q in [-1.3, 0.2, 0.9] {
                let h = 1e-5;
                let fd = (pot.evaluate(&[q + h]) - pot.evaluate(&[q - h])) / (2.0 * h);
                let g = pot.gradient(&[q])[0];
                assert!((fd - g).abs() <= 1e-6 * g.abs().max(1e-3), "{pot:?} {q}");
                assert!(pot.evaluate(&[q]) >= 0.0);
            }
        }
    }

    #[test]
    fn validation() {
        let p = ModelParams { theta: -1.0, ..unit() };
        assert!(p.validate().is_err());
        assert!(ModelParams::new(1.0, SpeedOfLight::Finite(0.0), 1.0, 1.0, 1.0, 1).is_err());
        assert!(Potential::Harmonic { stiffness: -1.0 }.validate().is_err());
        assert!(Variant::Dh.check(&unit().with_c(SpeedOfLight::Infinite)).is_err());
        assert!(Variant::Classical.check(&unit()).is_err());
    }

    #[test]
    fn maxwellian_properties() {
        let grid = PhaseGrid::new(16, 64, 8.0, 34.0).unwrap();
        let pot = Potential::Harmonic { stiffness: 1.0 };
        let mx = maxwellian(&grid, &unit(), &pot).unwrap();
        assert!((grid.integrate(&mx.density) - 1.0).abs() < 1e-14);
        let (k, _) = mx
            .density
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
        let (i, j) = grid.split(k);
        assert!((grid.q(i).abs() - grid.hq / 2.0).abs() < 1e-12);
        assert!((grid.p(j).abs() - grid.hp / 2.0).abs() < 1e-12);
        // Ratio identity at a fixed q.
        let i = 5;
        for (j1, j2) in [(10, 33), (31, 32), (0, 63)] {
            let h = |j: usize| hamiltonian(&[grid.q(i)], &[grid.p(j)], &unit(), &pot).unwrap();
            let expected = (-(h(j1) - h(j2))).exp();
            let got = mx.density[grid.index(i, j1)] / mx.density[grid.index(i, j2)];
            assert!((got / expected - 1.0).abs() < 1e-12);
        }
        let narrow = PhaseGrid::new(16, 64, 8.0, 10.0).unwrap();
        assert!(matches!(maxwellian(&narrow, &unit(), &pot), Err(Error::Truncation { .. })));
    }
}
