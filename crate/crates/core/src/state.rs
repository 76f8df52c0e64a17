use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralGrid;

/// Fourier coefficients of the interface deviation `zeta` and velocity `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub zeta: Vec<Complex64>,
    pub u: Vec<Complex64>,
}

impl StatePair {
    pub fn zeros(n: usize) -> Self {
        StatePair {
            zeta: vec![Complex64::new(0.0, 0.0); n],
            u: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn new(zeta: Vec<Complex64>, u: Vec<Complex64>) -> Result<Self> {
        if zeta.len() != u.len() {
            return Err(Error::LengthMismatch {
                expected: zeta.len(),
                actual: u.len(),
            });
        }
        Ok(StatePair { zeta, u })
    }

    pub fn from_nodal(grid: &SpectralGrid, zeta: &[f64], u: &[f64]) -> Result<Self> {
        Ok(StatePair {
            zeta: grid.to_coefficients(zeta)?,
            u: grid.to_coefficients(u)?,
        })
    }

    /// Samples `zeta(x)`, `u(x)` on the grid nodes.
    pub fn from_fn<F, G>(grid: &SpectralGrid, zeta: F, u: G) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let xs = grid.nodes();
        let z: Vec<f64> = xs.iter().map(|&x| zeta(x)).collect();
        let v: Vec<f64> = xs.iter().map(|&x| u(x)).collect();
        Self::from_nodal(grid, &z, &v)
    }

    pub fn to_nodal(&self, grid: &SpectralGrid) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((grid.to_nodal(&self.zeta)?, grid.to_nodal(&self.u)?))
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn check_grid(&self, grid: &SpectralGrid) -> Result<()> {
        if self.zeta.len() != grid.len() || self.u.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: self.zeta.len(),
                right: grid.len(),
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.components().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn components(&self) -> impl Iterator<Item = &Complex64> {
        self.zeta.iter().chain(self.u.iter())
    }

    pub fn scaled(&self, s: f64) -> Self {
        StatePair {
            zeta: self.zeta.iter().map(|c| c * s).collect(),
            u: self.u.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: f64, other: &StatePair) -> Self {
        StatePair {
            zeta: self.zeta.iter().zip(&other.zeta).map(|(a, b)| a + b * s).collect(),
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + b * s).collect(),
        }
    }

    pub fn sub(&self, other: &StatePair) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn symmetrize(&mut self, grid: &SpectralGrid) {
        grid.symmetrize(&mut self.zeta);
        grid.symmetrize(&mut self.u);
    }

    pub fn project(&mut self, grid: &SpectralGrid) {
        grid.project(&mut self.zeta);
        grid.project(&mut self.u);
    }

    pub fn hermitian_defect(&self, grid: &SpectralGrid) -> f64 {
        grid.hermitian_defect(&self.zeta).max(grid.hermitian_defect(&self.u))
    }

    /// Euclidean inner product over all `2N` nodal components.
    pub fn nodal_inner(&self, other: &StatePair, grid: &SpectralGrid) -> f64 {
        grid.nodal_inner(&self.zeta, &other.zeta) + grid.nodal_inner(&self.u, &other.u)
    }

    pub fn nodal_norm(&self, grid: &SpectralGrid) -> f64 {
        self.nodal_inner(self, grid).max(0.0).sqrt()
    }

    /// `||zeta||^2 + ||u||^2` in the discrete L2 norm on the period, square-rooted.
    pub fn l2_norm(&self, grid: &SpectralGrid) -> f64 {
        let z = grid.l2_norm(&self.zeta);
        let u = grid.l2_norm(&self.u);
        (z * z + u * u).sqrt()
    }

    pub fn translate(&self, grid: &SpectralGrid, shift: f64) -> Result<Self> {
        Ok(StatePair {
            zeta: grid.translate(&self.zeta, shift)?,
            u: grid.translate(&self.u, shift)?,
        })
    }

    /// Real components `[Re zeta, Im zeta, Re u, Im u]` concatenated.
    pub fn to_real_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.len());
        for field in [&self.zeta, &self.u] {
            out.extend(field.iter().map(|c| c.re));
            out.extend(field.iter().map(|c| c.im));
        }
        out
    }

    pub fn from_real_vector(v: &[f64]) -> Result<Self> {
        if !v.len().is_multiple_of(4) {
            return Err(Error::LengthMismatch {
                expected: 4 * (v.len() / 4),
                actual: v.len(),
            });
        }
        let n = v.len() / 4;
        let field = |offset: usize| -> Vec<Complex64> {
            (0..n)
                .map(|i| Complex64::new(v[offset + i], v[offset + n + i]))
                .collect()
        };
        Ok(StatePair {
            zeta: field(0),
            u: field(2 * n),
        })
    }

    /// The `k = 0` coefficients `(zeta_0, u_0)`.
    pub fn zero_modes(&self) -> (Complex64, Complex64) {
        (self.zeta[0], self.u[0])
    }
}
