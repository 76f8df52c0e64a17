//! Periodic spectral infrastructure on `[-l, l]`.
//!
//! Coefficients are stored in the usual FFT order: storage index `i` holds the
//! integer mode `k = i` for `i < N/2` and `k = i - N` otherwise, so the
//! Nyquist mode `k = -N/2` sits at index `N/2`. [`SpectralGrid::centered_order`]
//! gives the permutation to the ascending order `-N/2..N/2-1`.
//!
//! Normalization: `f(x) = sum_k f_k exp(i k~ x)` with `k~ = pi k / l`, and
//! `f_k = (1/N) sum_j f(x_j) exp(-i k~ x_j)`. The forward transform divides by
//! `N` and the phase is taken relative to `x` (not to the first node), so the
//! coefficients approximate the continuous Fourier coefficients of `f` on the
//! period.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const COTH_SERIES_CUTOFF: f64 = 1e-8;
const COTH_ASYMPTOTE_CUTOFF: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Intermediate long wave: `|D| coth |D|`.
    #[serde(rename = "ilw", alias = "ILW")]
    Ilw,
    /// Benjamin-Ono: `|D|`.
    #[serde(rename = "bo", alias = "BO", alias = "B-O")]
    Bo,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Ilw => f.write_str("ILW"),
            Regime::Bo => f.write_str("B-O"),
        }
    }
}

/// Physical constants of the two-layer model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub regime: Regime,
    /// Density ratio `rho_1 / rho_2`, in `(0, 1)`.
    pub gamma: f64,
    /// Modelling parameter, `> 1`.
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(regime: Regime, gamma: f64, alpha: f64) -> Result<Self> {
        let params = ModelParams {
            regime,
            gamma,
            alpha,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::param("gamma", format!("{} not in (0, 1)", self.gamma)));
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha", format!("{} must exceed 1", self.alpha)));
        }
        Ok(())
    }

    /// Symbol of the nonlocal operator `g(D)`.
    pub fn symbol_g(&self, k: f64) -> f64 {
        let scale = self.alpha / self.gamma;
        let ak = k.abs();
        match self.regime {
            Regime::Bo => scale * ak,
            Regime::Ilw => {
                if ak < COTH_SERIES_CUTOFF {
                    scale * (1.0 + k * k / 3.0)
                } else if ak > COTH_ASYMPTOTE_CUTOFF {
                    scale * ak
                } else {
                    scale * ak / ak.tanh()
                }
            }
        }
    }

    /// Symbol of `T = (1 + g(D))^-1`.
    pub fn symbol_t(&self, k: f64) -> f64 {
        1.0 / (1.0 + self.symbol_g(k))
    }

    /// Symbol of `J = (1 + g(D))^-1 (1 + (alpha-1)/alpha g(D))`, evaluated through
    /// the partial-fraction form `(alpha-1)/alpha + T/alpha`.
    pub fn symbol_j(&self, k: f64) -> f64 {
        (self.alpha - 1.0) / self.alpha + self.symbol_t(k) / self.alpha
    }

    /// Phase speed bound of the linearized system at wavenumber `k`:
    /// spectral radius of the per-mode linear matrix divided by `|k|`.
    pub fn linear_phase_speed(&self, k: f64) -> f64 {
        (self.symbol_j(k) * (1.0 - self.gamma) / self.gamma).sqrt()
    }
}

/// Uniform periodic grid on `[-l, l)` with `N` nodes and cached FFT plans.
#[derive(Clone)]
pub struct SpectralGrid {
    half_length: f64,
    n: usize,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded_len: usize,
    padded_forward: Arc<dyn Fft<f64>>,
    padded_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_length", &self.half_length)
            .field("n", &self.n)
            .field("padded_len", &self.padded_len)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

impl SpectralGrid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::param("l", format!("half length {half_length} must be positive")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::param("n", format!("{n} must be even and at least 8")));
        }
        let mut planner = FftPlanner::new();
        let padded_len = 3 * n / 2;
        let wavenumbers = (0..n)
            .map(|i| PI * mode_of(i, n) as f64 / half_length)
            .collect();
        Ok(SpectralGrid {
            half_length,
            n,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            padded_len,
            padded_forward: planner.plan_fft_forward(padded_len),
            padded_inverse: planner.plan_fft_inverse(padded_len),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Period `2l`.
    pub fn period(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Integer mode number stored at index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        mode_of(i, self.n)
    }

    /// Scaled wavenumber `pi k / l` stored at index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.wavenumbers[i]
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Storage index of the mode `-k` for the mode stored at `i`.
    pub fn mirror_index(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Storage indices in ascending mode order `-N/2, ..., N/2 - 1`.
    pub fn centered_order(&self) -> Vec<usize> {
        let half = self.n / 2;
        (half..self.n).chain(0..half).collect()
    }

    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }

    /// Nodal values to Fourier coefficients.
    pub fn to_coefficients(&self, nodal: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(nodal.len())?;
        let mut buf: Vec<Complex64> = nodal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            // exp(i k~ l) = (-1)^k shifts the phase origin from x_0 = -l to x = 0
            *c *= scale * parity(self.mode(i));
        }
        Ok(buf)
    }

    pub fn to_coefficients_complex(&self, nodal: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(nodal.len())?;
        let mut buf = nodal.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            *c *= scale * parity(self.mode(i));
        }
        Ok(buf)
    }

    /// Coefficients to complex nodal values; the imaginary parts vanish up to
    /// rounding for Hermitian input.
    pub fn to_nodal_complex(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(coeffs.len())?;
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * parity(self.mode(i)))
            .collect();
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    /// Coefficients to real nodal values (real part of the synthesis).
    pub fn to_nodal(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        Ok(self
            .to_nodal_complex(coeffs)?
            .into_iter()
            .map(|c| c.re)
            .collect())
    }

    /// Multiplies the coefficient at `k~` by `symbol(k~)`.
    ///
    /// The Nyquist mode is its own conjugate partner, so it is multiplied by the
    /// real part of the symbol; odd symbols such as `i k~` annihilate it.
    pub fn apply_multiplier<S>(&self, coeffs: &[Complex64], symbol: S) -> Result<Vec<Complex64>>
    where
        S: Fn(f64) -> Complex64,
    {
        self.check_len(coeffs.len())?;
        let nyq = self.nyquist_index();
        Ok(coeffs
            .iter()
            .zip(&self.wavenumbers)
            .enumerate()
            .map(|(i, (&c, &k))| {
                let s = symbol(k);
                if i == nyq {
                    c * s.re
                } else {
                    c * s
                }
            })
            .collect())
    }

    pub fn differentiate(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_multiplier(coeffs, |k| Complex64::new(0.0, k))
    }

    /// `P_N(f g)`: truncation of the exact product of the two trigonometric
    /// polynomials to the retained modes `|k| < N/2`.
    ///
    /// Inputs are zero-padded to `3N/2` points, multiplied pointwise and
    /// transformed back, so no aliased mode lands in the retained band. The
    /// Nyquist coefficients of the inputs are ignored and that of the output
    /// is zero.
    pub fn projected_product(&self, f: &[Complex64], g: &[Complex64]) -> Result<Vec<Complex64>> {
        if f.len() != g.len() {
            return Err(Error::GridMismatch {
                left: f.len(),
                right: g.len(),
            });
        }
        self.check_len(f.len())?;
        let m = self.padded_len;
        let mut fp = vec![Complex64::new(0.0, 0.0); m];
        let mut gp = vec![Complex64::new(0.0, 0.0); m];
        let nyq = self.nyquist_index();
        for i in (0..self.n).filter(|&i| i != nyq) {
            let slot = self.mode(i).rem_euclid(m as i64) as usize;
            fp[slot] = f[i];
            gp[slot] = g[i];
        }
        // Convolution is shift invariant, so the (-1)^k phase convention can be
        // skipped on the padded grid.
        self.padded_inverse.process(&mut fp);
        self.padded_inverse.process(&mut gp);
        for (a, b) in fp.iter_mut().zip(&gp) {
            *a *= *b;
        }
        self.padded_forward.process(&mut fp);
        let scale = 1.0 / m as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for i in (0..self.n).filter(|&i| i != nyq) {
            let slot = self.mode(i).rem_euclid(m as i64) as usize;
            out[i] = fp[slot] * scale;
        }
        Ok(out)
    }

    /// Replaces `c` by its Hermitian part, `(c_k + conj(c_-k)) / 2`.
    pub fn symmetrize(&self, coeffs: &mut [Complex64]) {
        for i in 0..=self.n / 2 {
            let j = self.mirror_index(i);
            let avg = 0.5 * (coeffs[i] + coeffs[j].conj());
            coeffs[i] = avg;
            coeffs[j] = avg.conj();
        }
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self, coeffs: &[Complex64]) -> f64 {
        (0..self.n)
            .map(|i| (coeffs[i] - coeffs[self.mirror_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Zeroes the Nyquist coefficient, projecting onto the symmetric band `|k| < N/2`.
    pub fn project(&self, coeffs: &mut [Complex64]) {
        coeffs[self.nyquist_index()] = Complex64::new(0.0, 0.0);
    }

    /// Euclidean inner product of the nodal vectors, evaluated from
    /// coefficients via Parseval: `N * Re sum conj(a_k) b_k`.
    pub fn nodal_inner(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        self.n as f64 * a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>()
    }

    /// Discrete L2 norm on the period, `sqrt(2l sum |c_k|^2)`.
    pub fn l2_norm(&self, coeffs: &[Complex64]) -> f64 {
        (self.period() * coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Coefficients of `f(x - shift)`.
    pub fn translate(&self, coeffs: &[Complex64], shift: f64) -> Result<Vec<Complex64>> {
        self.apply_multiplier(coeffs, |k| Complex64::from_polar(1.0, -k * shift))
    }
}

fn mode_of(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}
