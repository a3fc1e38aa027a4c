//! Uniform phase-space grid and its discrete calculus.
//!
//! Cells are stored row-major with the momentum index fastest:
//! `k = i * np + j` for position cell `i` and momentum cell `j`.
//! The position axis is periodic; the momentum axis is closed with
//! zero-flux faces at `±Pmax`.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid<T> {
    pub nq: usize,
    pub np: usize,
    pub lq: T,
    pub pmax: T,
    pub hq: T,
    pub hp: T,
}

impl<T: Real> PhaseGrid<T> {
    pub fn new(nq: usize, np: usize, lq: T, pmax: T) -> Result<Self> {
        for (name, n) in [("nq", nq), ("np", np)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::invalid(name, format!("cell count must be even and >= 8, got {n}")));
            }
        }
        if !(lq.is_finite() && lq > T::zero()) {
            return Err(Error::invalid("lq", format!("must be positive, got {lq}")));
        }
        if !(pmax.is_finite() && pmax > T::zero()) {
            return Err(Error::invalid("pmax", format!("must be positive, got {pmax}")));
        }
        Ok(PhaseGrid {
            nq,
            np,
            lq,
            pmax,
            hq: lq / T::from_usize_lossy(nq),
            hp: T::lit(2.0) * pmax / T::from_usize_lossy(np),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.np + j
    }

    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.np, k % self.np)
    }

    /// Position of the centre of cell `i` in `[−Lq/2, Lq/2)`.
    #[inline]
    pub fn q(&self, i: usize) -> T {
        -self.lq / T::lit(2.0) + (T::from_usize_lossy(i) + T::lit(0.5)) * self.hq
    }

    /// Momentum of the centre of cell `j`.
    #[inline]
    pub fn p(&self, j: usize) -> T {
        -self.pmax + (T::from_usize_lossy(j) + T::lit(0.5)) * self.hp
    }

    /// Momentum at the face between cells `j` and `j + 1`.
    #[inline]
    pub fn p_face(&self, j: usize) -> T {
        -self.pmax + T::from_usize_lossy(j + 1) * self.hp
    }

    #[inline]
    pub fn cell_volume(&self) -> T {
        self.hq * self.hp
    }

    /// Number of interior momentum faces.
    #[inline]
    pub fn p_faces(&self) -> usize {
        self.nq * (self.np - 1)
    }

    #[inline]
    pub fn p_face_index(&self, i: usize, j: usize) -> usize {
        i * (self.np - 1) + j
    }

    #[inline]
    fn next_q(&self, i: usize) -> usize {
        if i + 1 == self.nq {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    fn prev_q(&self, i: usize) -> usize {
        if i == 0 {
            self.nq - 1
        } else {
            i - 1
        }
    }

    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.split(k);
                f(self.q(i), self.p(j))
            })
            .collect()
    }

    /// `Σ a · cellVolume`, summed in cell order.
    pub fn integrate(&self, a: &[T]) -> T {
        a.iter().copied().sum::<T>() * self.cell_volume()
    }

    /// Grid inner product `Σ a b · cellVolume`.
    pub fn inner(&self, a: &[T], b: &[T]) -> T {
        a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>() * self.cell_volume()
    }

    pub fn norm(&self, a: &[T]) -> T {
        self.inner(a, a).sqrt()
    }

    /// Centred periodic difference in `q`.
    pub fn grad_q(&self, a: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        let two_h = T::lit(2.0) * self.hq;
        for i in 0..self.nq {
            let (ip, im) = (self.next_q(i), self.prev_q(i));
            for j in 0..self.np {
                out[self.index(i, j)] = (a[self.index(ip, j)] - a[self.index(im, j)]) / two_h;
            }
        }
        out
    }

    /// Transpose of [`grad_q`](Self::grad_q) under the plain cell sum.
    pub fn grad_q_adjoint(&self, b: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        let two_h = T::lit(2.0) * self.hq;
        for i in 0..self.nq {
            let (ip, im) = (self.next_q(i), self.prev_q(i));
            for j in 0..self.np {
                out[self.index(i, j)] = (b[self.index(im, j)] - b[self.index(ip, j)]) / two_h;
            }
        }
        out
    }

    /// Centred difference in `p`, one-sided in the two boundary cells.
    pub fn grad_p(&self, a: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        let h = self.hp;
        let two_h = T::lit(2.0) * h;
        let n = self.np;
        for i in 0..self.nq {
            let row = &a[i * n..(i + 1) * n];
            let o = &mut out[i * n..(i + 1) * n];
            o[0] = (row[1] - row[0]) / h;
            for j in 1..n - 1 {
                o[j] = (row[j + 1] - row[j - 1]) / two_h;
            }
            o[n - 1] = (row[n - 1] - row[n - 2]) / h;
        }
        out
    }

    /// Transpose of [`grad_p`](Self::grad_p) under the plain cell sum.
    pub fn grad_p_adjoint(&self, b: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        let h = self.hp;
        let two_h = T::lit(2.0) * h;
        let n = self.np;
        for i in 0..self.nq {
            let row = &b[i * n..(i + 1) * n];
            let o = &mut out[i * n..(i + 1) * n];
            o[0] -= row[0] / h;
            o[1] += row[0] / h;
            for l in 1..n - 1 {
                o[l - 1] -= row[l] / two_h;
                o[l + 1] += row[l] / two_h;
            }
            o[n - 1] += row[n - 1] / h;
            o[n - 2] -= row[n - 1] / h;
        }
        out
    }

    /// Undivided differences `a[i, j+1] − a[i, j]` on interior momentum faces.
    pub fn face_diff_p(&self, a: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.p_faces());
        for i in 0..self.nq {
            for j in 0..self.np - 1 {
                out.push(a[self.index(i, j + 1)] - a[self.index(i, j)]);
            }
        }
        out
    }

    /// Undivided periodic differences `a[i+1, j] − a[i, j]`; the face between
    /// `i` and `i + 1` is stored at `index(i, j)`.
    pub fn face_diff_q(&self, a: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        for i in 0..self.nq {
            let ip = self.next_q(i);
            for j in 0..self.np {
                out[self.index(i, j)] = a[self.index(ip, j)] - a[self.index(i, j)];
            }
        }
        out
    }

    /// Adds the divergence `(F_{j+½} − F_{j−½}) / hp` of momentum-face fluxes to `out`.
    pub fn add_div_p(&self, flux: &[T], out: &mut [T]) {
        for i in 0..self.nq {
            for j in 0..self.np - 1 {
                let f = flux[self.p_face_index(i, j)] / self.hp;
                out[self.index(i, j)] += f;
                out[self.index(i, j + 1)] -= f;
            }
        }
    }

    /// Adds the divergence `(G_{i+½} − G_{i−½}) / hq` of periodic position-face fluxes to `out`.
    pub fn add_div_q(&self, flux: &[T], out: &mut [T]) {
        for i in 0..self.nq {
            let ip = self.next_q(i);
            for j in 0..self.np {
                let g = flux[self.index(i, j)] / self.hq;
                out[self.index(i, j)] += g;
                out[self.index(ip, j)] -= g;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random(n: usize, rng: &mut SplitMix64) -> Vec<f64> {
        (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(PhaseGrid::new(6, 8, 1.0, 1.0).is_err());
        assert!(PhaseGrid::new(8, 9, 1.0, 1.0).is_err());
        assert!(PhaseGrid::new(8, 8, -1.0, 1.0).is_err());
        assert!(PhaseGrid::new(8, 8, 1.0, 1.0).is_ok());
    }

    #[test]
    fn centres_are_midpoints() {
        let g = PhaseGrid::<f64>::new(8, 10, 4.0, 5.0).unwrap();
        assert!((g.q(0) + 1.75).abs() < 1e-15);
        assert!((g.p(0) + 4.5).abs() < 1e-15);
        assert!((g.p(9) - 4.5).abs() < 1e-15);
        assert!((g.p_face(4)).abs() < 1e-15);
    }

    #[test]
    fn adjoints_are_transposes() {
        let g = PhaseGrid::new(8, 12, 3.0, 2.0).unwrap();
        let mut rng = SplitMix64::new(3);
        for _ in 0..10 {
            let a = random(g.len(), &mut rng);
            let b = random(g.len(), &mut rng);
            let lhs: f64 = g.grad_q(&a).iter().zip(&b).map(|(x, y)| x * y).sum();
            let rhs: f64 = a.iter().zip(g.grad_q_adjoint(&b)).map(|(x, y)| x * y).sum();
            assert!((lhs - rhs).abs() < 1e-12);
            let lhs: f64 = g.grad_p(&a).iter().zip(&b).map(|(x, y)| x * y).sum();
            let rhs: f64 = a.iter().zip(g.grad_p_adjoint(&b)).map(|(x, y)| x * y).sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn face_divergence_is_negative_adjoint_of_face_difference() {
        let g = PhaseGrid::new(8, 10, 3.0, 2.0).unwrap();
        let mut rng = SplitMix64::new(11);
        let a = random(g.len(), &mut rng);
        let fp = random(g.p_faces(), &mut rng);
        let fq = random(g.len(), &mut rng);
        let mut div = vec![0.0; g.len()];
        g.add_div_p(&fp, &mut div);
        let lhs: f64 = a.iter().zip(&div).map(|(x, y)| x * y).sum::<f64>() * g.hp;
        let rhs: f64 = -g.face_diff_p(&a).iter().zip(&fp).map(|(x, y)| x * y).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12);
        let mut div = vec![0.0; g.len()];
        g.add_div_q(&fq, &mut div);
        let lhs: f64 = a.iter().zip(&div).map(|(x, y)| x * y).sum::<f64>() * g.hq;
        let rhs: f64 = -g.face_diff_q(&a).iter().zip(&fq).map(|(x, y)| x * y).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(div.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn gradients_of_constants_vanish() {
        let g = PhaseGrid::new(8, 8, 1.0, 1.0).unwrap();
        let a = vec![2.5; g.len()];
        assert!(g.grad_q(&a).iter().all(|&x| x == 0.0));
        assert!(g.grad_p(&a).iter().all(|&x| x == 0.0));
    }
}
