//! Finite-difference Jacobi-identity residual for constant Poisson matrices
//! on `ℝⁿ`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub entries: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn new(n: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension { expected: n * n, found: entries.len() });
        }
        Ok(DenseMatrix { n, entries })
    }

    /// Canonical symplectic matrix `[[0, −I], [I, 0]]` of size `2k`.
    pub fn canonical(k: usize) -> Self {
        let n = 2 * k;
        let mut entries = vec![T::zero(); n * n];
        for i in 0..k {
            entries[i * n + k + i] = -T::one();
            entries[(k + i) * n + i] = T::one();
        }
        DenseMatrix { n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    /// Largest `|Lᵢⱼ + Lⱼᵢ|`.
    pub fn antisymmetry_defect(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        m
    }

    fn bilinear(&self, a: &[T], b: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                s += a[i] * self.get(i, j) * b[j];
            }
        }
        s
    }
}

/// Outcome of [`jacobi_residual_fd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiResidual<T> {
    /// `|{{F1,F2},F3} + {{F2,F3},F1} + {{F3,F1},F2}|`.
    pub residual: T,
    /// `1 + Σ |cyclic terms|`, the natural size of the sum.
    pub scale: T,
}

type Func<'a, T> = &'a dyn Fn(&[T]) -> Option<T>;

fn fd_gradient<T: Real>(f: &dyn Fn(&[T]) -> Result<T>, z: &[T], step: T) -> Result<Vec<T>> {
    let mut x = z.to_vec();
    let mut g = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        let orig = x[i];
        x[i] = orig + step;
        let fp = f(&x)?;
        x[i] = orig - step;
        let fm = f(&x)?;
        x[i] = orig;
        g.push((fp - fm) / (step + step));
    }
    Ok(g)
}

/// Jacobi residual of the bracket `{F, G}(z) = ∇F(z)ᵀ L ∇G(z)` at `z`,
/// computed with nested central differences of width `step`.
///
/// The functions return `None` outside the region where they can be
/// evaluated; hitting such a point is reported as [`Error::OutsideDomain`].
pub fn jacobi_residual_fd<T: Real>(
    l: &DenseMatrix<T>,
    f1: Func<'_, T>,
    f2: Func<'_, T>,
    f3: Func<'_, T>,
    z: &[T],
    step: T,
) -> Result<JacobiResidual<T>> {
    if z.len() != l.n {
        return Err(Error::Dimension { expected: l.n, found: z.len() });
    }
    if !(step > T::zero()) {
        return Err(Error::invalid("step", "finite-difference step must be positive"));
    }
    let bracket = |a: Func<'_, T>, b: Func<'_, T>, x: &[T]| -> Result<T> {
        let ga = fd_gradient(&|y: &[T]| a(y).ok_or(Error::OutsideDomain), x, step)?;
        let gb = fd_gradient(&|y: &[T]| b(y).ok_or(Error::OutsideDomain), x, step)?;
        Ok(l.bilinear(&ga, &gb))
    };
    let outer = |a: Func<'_, T>, b: Func<'_, T>, c: Func<'_, T>| -> Result<T> {
        let gi = fd_gradient(&|x: &[T]| bracket(a, b, x), z, step)?;
        let gc = fd_gradient(&|y: &[T]| c(y).ok_or(Error::OutsideDomain), z, step)?;
        Ok(l.bilinear(&gi, &gc))
    };
    let t1 = outer(f1, f2, f3)?;
    let t2 = outer(f2, f3, f1)?;
    let t3 = outer(f3, f1, f2)?;
    Ok(JacobiResidual { residual: (t1 + t2 + t3).abs(), scale: T::one() + t1.abs() + t2.abs() + t3.abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratics_with_canonical_matrix() {
        let j = DenseMatrix::<f64>::canonical(1);
        let f1 = |x: &[f64]| Some(x[0] * x[0] + 0.5 * x[0] * x[1]);
        let f2 = |x: &[f64]| Some(x[1] * x[1] - x[0]);
        let f3 = |x: &[f64]| Some(0.25 * x[0] * x[1] + x[1]);
        let r = jacobi_residual_fd(&j, &f1, &f2, &f3, &[0.3, -0.7], 1e-4).unwrap();
        assert!(r.residual <= 1e-10, "{r:?}");
    }

    #[test]
    fn constant_function_gives_zero() {
        let j = DenseMatrix::<f64>::canonical(1);
        let f1 = |x: &[f64]| Some(x[0].powi(3) + x[1]);
        let f2 = |x: &[f64]| Some(x[0] * x[1]);
        let f3 = |_: &[f64]| Some(4.0);
        let r = jacobi_residual_fd(&j, &f1, &f2, &f3, &[0.3, -0.7], 1e-4).unwrap();
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn leaving_domain_is_an_error() {
        let j = DenseMatrix::<f64>::canonical(1);
        let f1 = |x: &[f64]| if x[0] > 0.0 { Some(x[0].ln()) } else { None };
        let f2 = |x: &[f64]| Some(x[1]);
        let r = jacobi_residual_fd(&j, &f1, &f2, &f2, &[5e-5, 0.0], 1e-4);
        assert_eq!(r, Err(Error::OutsideDomain));
    }

    #[test]
    fn canonical_is_antisymmetric() {
        assert_eq!(DenseMatrix::<f64>::canonical(3).antisymmetry_defect(), 0.0);
    }
}
