//! Periodic spectral representation of fields on a truncated copy of R^n.
//!
//! The whole space is replaced by the box `[-L, L)^n` sampled at `N` points
//! per axis. Fourier coefficients follow the symmetric convention
//!
//! ```text
//! û(ξ) ≈ (2π)^{-n/2} h^n Σ_j exp(-i x_j·ξ) u(x_j),   ξ_k = π k / L,
//! ```
//!
//! so that closed-form transforms (the Gaussian, |ξ|^β symbols, the amplitude
//! limit û(ξ)/|ξ|^β) carry over without extra factors. Coefficients are stored
//! in FFT order: mode index `m` corresponds to `k = m` for `m < N/2` and
//! `k = m - N` otherwise, so `m = N/2` is the unpaired Nyquist mode `k = -N/2`.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Tolerance on the relative Hermitian defect accepted by [`inverse_transform`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Periodic truncation of R^n (n = 1 or 2) with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not in {{1, 2}}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width {half_width} must be positive"
            )));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per dimension {points} must be a power of two >= 16"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points,
        })
    }

    pub fn line(half_width: f64, points: usize) -> Result<Self> {
        Self::new(1, half_width, points)
    }

    pub fn square(half_width: f64, points: usize) -> Result<Self> {
        Self::new(2, half_width, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_dim(&self) -> usize {
        self.points
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = 2L / N` (exact, since `N` is a power of two).
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Volume element `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Same box, `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.dim, self.half_width, self.points * factor)
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Signed mode number `k` of FFT index `m`.
    pub fn mode_number(&self, m: usize) -> i64 {
        let n = self.points as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        self.mode_number(m) as f64 * PI / self.half_width
    }

    /// Largest resolved wavenumber `πN / (2L)`.
    pub fn max_wavenumber(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_width)
    }

    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.points / 2
    }

    /// Per-axis indices of a flat (row-major) index; unused axes are 0.
    pub fn axes(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points, flat % self.points],
        }
    }

    pub fn flat(&self, axes: [usize; 2]) -> usize {
        match self.dim {
            1 => axes[0],
            _ => axes[0] * self.points + axes[1],
        }
    }

    /// Physical coordinates of a sample (unused component is 0).
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.axes(flat);
        match self.dim {
            1 => [self.coordinate(i), 0.0],
            _ => [self.coordinate(i), self.coordinate(j)],
        }
    }

    /// Wavevector of a mode (unused component is 0).
    pub fn wavevector(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.axes(flat);
        match self.dim {
            1 => [self.wavenumber(i), 0.0],
            _ => [self.wavenumber(i), self.wavenumber(j)],
        }
    }

    /// Flat index of the mode `-k`.
    pub fn partner(&self, flat: usize) -> usize {
        let n = self.points;
        let [i, j] = self.axes(flat);
        self.flat([(n - i) % n, (n - j) % n])
    }

    /// Whether any axis of this mode sits on the Nyquist index.
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let [i, j] = self.axes(flat);
        self.is_nyquist(i) || (self.dim == 2 && self.is_nyquist(j))
    }

    /// Largest time at which the diffusion length stays within a quarter box.
    pub fn validity_horizon(&self) -> f64 {
        (self.half_width / 4.0).powi(2)
    }

    pub fn within_window(&self, t: f64) -> bool {
        t <= self.validity_horizon() * (1.0 + 1e-12)
    }

    pub(crate) fn normalization(&self) -> f64 {
        (2.0 * PI).powf(-(self.dim as f64) / 2.0) * self.cell_volume()
    }

    /// `(-1)^{m_1 + m_2}`: the phase from placing sample 0 at `x = -L`.
    pub(crate) fn phase(&self, flat: usize) -> f64 {
        let [i, j] = self.axes(flat);
        if (i + j) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Symbol evaluated with the Nyquist convention: for modes on the Nyquist
    /// index, the symbol is averaged over the sign of the Nyquist components.
    /// Even symbols are unchanged; odd ones (gradients) vanish there, which
    /// keeps real fields real.
    pub(crate) fn symbol_at<F>(&self, flat: usize, symbol: &F) -> Complex64
    where
        F: Fn(&[f64]) -> Complex64 + ?Sized,
    {
        let xi = self.wavevector(flat);
        let xi = &xi[..self.dim];
        if !self.touches_nyquist(flat) {
            return symbol(xi);
        }
        let [i, j] = self.axes(flat);
        let flip0 = self.is_nyquist(i);
        let flip1 = self.dim == 2 && self.is_nyquist(j);
        let mut total = Complex64::new(0.0, 0.0);
        let mut count = 0.0;
        for s0 in [1.0, -1.0] {
            if s0 < 0.0 && !flip0 {
                continue;
            }
            for s1 in [1.0, -1.0] {
                if s1 < 0.0 && !flip1 {
                    continue;
                }
                let mut v = [xi[0] * s0, 0.0];
                if self.dim == 2 {
                    v[1] = xi[1] * s1;
                }
                total += symbol(&v[..self.dim]);
                count += 1.0;
            }
        }
        total / count
    }
}

/// A real function sampled on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every grid point; `f` receives a slice of length `n`.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: GridSpec, f: F) -> Result<Self> {
        let values = (0..grid.len())
            .map(|idx| {
                let x = grid.point(idx);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<RealField> {
        RealField::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &RealField, f: F) -> Result<RealField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        RealField::new(self.grid, values)
    }
}

/// Fourier coefficients of a field in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at signed mode numbers `k` (one per axis).
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        let n = self.grid.points_per_dim() as i64;
        let wrap = |k: i64| k.rem_euclid(n) as usize;
        let axes = match self.grid.dim() {
            1 => [wrap(k[0]), 0],
            _ => [wrap(k[0]), wrap(k[1])],
        };
        self.coeffs[self.grid.flat(axes)]
    }

    /// `max |û(ξ) - conj(û(-ξ))| / max |û|`, or 0 for the zero field.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let defect = (0..self.coeffs.len()).fold(0.0_f64, |m, idx| {
            let p = self.grid.partner(idx);
            m.max((self.coeffs[idx] - self.coeffs[p].conj()).norm())
        });
        defect / scale
    }

    /// Multiplies every coefficient by `symbol(ξ)` (Nyquist convention applied).
    pub fn apply_symbol<F>(&self, symbol: F) -> SpectralField
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * self.grid.symbol_at(idx, &symbol))
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    /// Multiplies every coefficient by a real symbol of `|ξ|²`.
    pub fn apply_radial<F>(&self, symbol: F) -> SpectralField
    where
        F: Fn(f64) -> f64,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let xi = self.grid.wavevector(idx);
                c * symbol(xi[0] * xi[0] + xi[1] * xi[1])
            })
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let mut planner = planner().lock().unwrap_or_else(|e| e.into_inner());
    planner.plan_fft(len, direction)
}

/// In-place unnormalized DFT over every axis of an `N^dim` row-major array.
pub(crate) fn fft_nd(points: usize, dim: usize, data: &mut [Complex64], direction: FftDirection) {
    let fft = plan(points, direction);
    fft.process(data);
    if dim == 2 {
        let mut scratch = data.to_vec();
        transpose(data, &mut scratch, points);
        fft.process(&mut scratch);
        transpose(&scratch, data, points);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

/// Converts physical-convention coefficients to raw DFT values.
pub(crate) fn to_dft(grid: &GridSpec, coeffs: &[Complex64]) -> Vec<Complex64> {
    let norm = grid.normalization();
    coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| c * (grid.phase(idx) / norm))
        .collect()
}

pub(crate) fn from_dft(grid: &GridSpec, dft: &[Complex64]) -> Vec<Complex64> {
    let norm = grid.normalization();
    dft.iter()
        .enumerate()
        .map(|(idx, c)| c * (grid.phase(idx) * norm))
        .collect()
}

pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = f.grid;
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(grid.points, grid.dim, &mut data, FftDirection::Forward);
    SpectralField {
        grid,
        coeffs: from_dft(&grid, &data),
    }
}

/// Inverse of [`forward_transform`]; the imaginary residue is discarded after
/// the Hermitian symmetry check.
pub fn inverse_transform(f: &SpectralField) -> Result<RealField> {
    let defect = f.hermitian_defect();
    if defect > SYMMETRY_TOLERANCE {
        return Err(Error::SymmetryViolation { defect });
    }
    Ok(inverse_unchecked(f))
}

pub(crate) fn inverse_unchecked(f: &SpectralField) -> RealField {
    let grid = f.grid;
    let mut data = to_dft(&grid, &f.coeffs);
    fft_nd(grid.points, grid.dim, &mut data, FftDirection::Inverse);
    let scale = 1.0 / grid.len() as f64;
    RealField {
        grid,
        values: data.iter().map(|c| c.re * scale).collect(),
    }
}

/// Mass functional `h^n Σ f(x_j)`.
pub fn integrate(f: &RealField) -> f64 {
    f.grid.cell_volume() * f.values.iter().sum::<f64>()
}

/// Discrete `L^p` norm; `p = f64::INFINITY` gives the maximum norm.
pub fn lp_norm(f: &RealField, p: f64) -> Result<f64> {
    lp_norm_of(f.grid.cell_volume(), &f.values, p)
}

pub(crate) fn lp_norm_of(volume: f64, values: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent { p });
    }
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if p.is_infinite() {
        return Ok(max);
    }
    if max == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(volume * values.iter().map(|v| v.abs()).sum::<f64>());
    }
    // scaled by the max to keep large p from overflowing
    let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    Ok(max * (volume * sum).powf(1.0 / p))
}

/// Spectral interpolation onto a finer grid, pointwise map, spectral
/// restriction back; the map is applied on the fine grid, so products up to
/// degree `factor` are alias-free.
pub(crate) struct Dealiaser {
    grid: GridSpec,
    fine_points: usize,
    targets: Vec<Vec<(usize, f64)>>,
    phase_norm: Vec<f64>,
    scratch: Vec<Complex64>,
    dft: Vec<Complex64>,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
    transpose_buf: Vec<Complex64>,
}

impl Dealiaser {
    pub(crate) fn new(grid: GridSpec, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::InvalidPadFactor(factor));
        }
        Ok(Self::with_factor(grid, factor))
    }

    fn with_factor(grid: GridSpec, factor: usize) -> Self {
        let n = grid.points_per_dim();
        let m = n * factor;
        let axis_targets = |i: usize| -> Vec<(usize, f64)> {
            if i == n / 2 {
                vec![(m - n / 2, 0.5), (n / 2, 0.5)]
            } else if i < n / 2 {
                vec![(i, 1.0)]
            } else {
                vec![(m - (n - i), 1.0)]
            }
        };
        let targets = (0..grid.len())
            .map(|idx| {
                let [i, j] = grid.axes(idx);
                match grid.dim() {
                    1 => axis_targets(i),
                    _ => {
                        let mut out = Vec::with_capacity(4);
                        for (a, wa) in axis_targets(i) {
                            for (b, wb) in axis_targets(j) {
                                out.push((a * m + b, wa * wb));
                            }
                        }
                        out
                    }
                }
            })
            .collect();
        let norm = grid.normalization();
        let phase_norm = (0..grid.len()).map(|idx| grid.phase(idx) * norm).collect();
        let fine_len = m.pow(grid.dim() as u32);
        Self {
            grid,
            fine_points: m,
            targets,
            phase_norm,
            scratch: vec![Complex64::new(0.0, 0.0); fine_len],
            dft: vec![Complex64::new(0.0, 0.0); grid.len()],
            inverse: plan(m, FftDirection::Inverse),
            forward: plan(m, FftDirection::Forward),
            transpose_buf: if grid.dim() == 2 {
                vec![Complex64::new(0.0, 0.0); fine_len]
            } else {
                Vec::new()
            },
        }
    }

    fn fine_fft(&mut self, inverse: bool) {
        let fft = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        fft.process(&mut self.scratch);
        if self.grid.dim() == 2 {
            transpose(&self.scratch, &mut self.transpose_buf, self.fine_points);
            fft.process(&mut self.transpose_buf);
            transpose(&self.transpose_buf, &mut self.scratch, self.fine_points);
        }
    }

    /// Interpolates physical coefficients onto the fine grid, leaving real
    /// sample values in `scratch`.
    fn load(&mut self, coeffs: &[Complex64]) {
        let inv_len = 1.0 / self.grid.len() as f64;
        self.scratch
            .iter_mut()
            .for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (idx, c) in coeffs.iter().enumerate() {
            let raw = c / self.phase_norm[idx] * inv_len;
            for &(t, w) in &self.targets[idx] {
                self.scratch[t] += raw * w;
            }
        }
        self.fine_fft(true);
    }

    /// Applies `phi` on the fine grid to the field with physical coefficients
    /// `coeffs`; writes the restricted coefficients of `phi(u)` into `out` and
    /// returns the fine-grid maximum of `|u|`.
    pub(crate) fn apply<F: Fn(f64) -> f64>(
        &mut self,
        coeffs: &[Complex64],
        phi: F,
        out: &mut [Complex64],
    ) -> f64 {
        self.load(coeffs);
        let mut sup = 0.0_f64;
        for c in self.scratch.iter_mut() {
            let v = c.re;
            sup = sup.max(v.abs());
            *c = Complex64::new(phi(v), 0.0);
        }
        if sup.is_nan() {
            sup = f64::INFINITY;
        }
        self.fine_fft(false);
        let restrict = (self.grid.points_per_dim() as f64 / self.fine_points as f64)
            .powi(self.grid.dim() as i32);
        for idx in 0..self.grid.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(t, _) in &self.targets[idx] {
                acc += self.scratch[t];
            }
            self.dft[idx] = acc * restrict;
        }
        for (idx, o) in out.iter_mut().enumerate() {
            *o = self.dft[idx] * self.phase_norm[idx];
        }
        sup
    }

    /// Fine-grid sample values of the band-limited interpolant.
    pub(crate) fn interpolate(&mut self, coeffs: &[Complex64]) -> Vec<f64> {
        self.load(coeffs);
        self.scratch.iter().map(|c| c.re).collect()
    }
}

/// Evaluates `phi(f)` alias-free up to polynomial degree `factor`: spectral
/// interpolation onto a `factor`-times finer grid, pointwise `phi`, then
/// spectral truncation back to the original grid.
pub fn pad_pointwise_apply<F: Fn(f64) -> f64>(
    f: &RealField,
    phi: F,
    factor: usize,
) -> Result<RealField> {
    let mut dealiaser = Dealiaser::new(f.grid, factor)?;
    let spectral = forward_transform(f);
    let mut out = vec![Complex64::new(0.0, 0.0); f.grid.len()];
    dealiaser.apply(spectral.coeffs(), phi, &mut out);
    let restricted = inverse_unchecked(&SpectralField {
        grid: f.grid,
        coeffs: out,
    });
    RealField::new(f.grid, restricted.values)
}

/// Band-limited (trigonometric) interpolation of `f` onto the same box with
/// `factor` times as many points per axis.
pub fn refine(f: &RealField, factor: usize) -> Result<RealField> {
    if factor == 1 {
        return Ok(f.clone());
    }
    let fine = f.grid.refined(factor)?;
    let mut dealiaser = Dealiaser::new(f.grid, factor)?;
    let values = dealiaser.interpolate(forward_transform(f).coeffs());
    RealField::new(fine, values)
}
