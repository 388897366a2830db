//! Fourier-multiplier operators: heat semigroup, derivatives, D^β, I_β,
//! the Gauss–Weierstrass kernel and the self-similar profiles ∂^γ D^β G.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{
    forward_transform, integrate, inverse_transform, lp_norm, GridSpec, RealField, SpectralField,
};

/// Highest derivative order accepted by [`partial_derivative`].
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Relative mass tolerance for the zero-mass precondition.
pub const ZERO_MASS_TOLERANCE: f64 = 1e-10;

/// Multi-index γ = (γ₁, …, γ_n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    dim: usize,
    components: [usize; 2],
}

impl MultiIndex {
    pub fn new(components: &[usize]) -> Result<Self> {
        match components.len() {
            1 => Ok(Self {
                dim: 1,
                components: [components[0], 0],
            }),
            2 => Ok(Self {
                dim: 2,
                components: [components[0], components[1]],
            }),
            d => Err(Error::DimensionMismatch {
                expected: 2,
                got: d,
            }),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            components: [0, 0],
        }
    }

    /// First derivative along `axis`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut components = [0, 0];
        components[axis] = 1;
        Self { dim, components }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[usize] {
        &self.components[..self.dim]
    }

    /// `|γ| = Σ γ_i`.
    pub fn order(&self) -> usize {
        self.components().iter().sum()
    }

    /// `(iξ)^γ`.
    pub fn symbol(&self, xi: &[f64]) -> Complex64 {
        self.components()
            .iter()
            .zip(xi)
            .fold(Complex64::new(1.0, 0.0), |acc, (&g, &x)| {
                acc * Complex64::new(0.0, x).powu(g as u32)
            })
    }
}

type SymbolFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A Fourier symbol ℓ(ξ), positively homogeneous of degree β > 0.
///
/// Homogeneity is checked by sampling at construction.
#[derive(Clone)]
pub struct MultiplierSymbol {
    dim: usize,
    degree: f64,
    eval: Arc<SymbolFn>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .finish_non_exhaustive()
    }
}

impl MultiplierSymbol {
    pub fn new<F>(dim: usize, degree: f64, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        if !(degree.is_finite() && degree > 0.0) {
            return Err(Error::InvalidBeta { beta: degree });
        }
        if dim != 1 && dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: dim,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let scale = 2f64.powf(degree);
        let mut worst = 0.0_f64;
        for _ in 0..64 {
            let mut xi = [0.0; 2];
            loop {
                for v in xi.iter_mut().take(dim) {
                    *v = rng.gen_range(-3.0..3.0);
                }
                if xi[..dim].iter().map(|v| v * v).sum::<f64>() > 1e-2 {
                    break;
                }
            }
            let base = eval(&xi[..dim]);
            let doubled = [2.0 * xi[0], 2.0 * xi[1]];
            let defect = (eval(&doubled[..dim]) - base * scale).norm();
            if !defect.is_finite() {
                return Err(Error::NotHomogeneous { degree, defect });
            }
            if base.norm() > 0.0 {
                worst = worst.max(defect / base.norm());
            } else if defect > 0.0 {
                worst = f64::INFINITY;
            }
        }
        if worst > 1e-10 {
            return Err(Error::NotHomogeneous {
                degree,
                defect: worst,
            });
        }
        Ok(Self {
            dim,
            degree,
            eval: Arc::new(eval),
        })
    }

    /// `|ξ|^β`.
    pub fn fractional(dim: usize, beta: f64) -> Result<Self> {
        Self::new(dim, beta, move |xi| {
            Complex64::new(xi.iter().map(|v| v * v).sum::<f64>().powf(beta / 2.0), 0.0)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.eval)(xi)
    }

    /// `c·ℓ`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        Self {
            dim: self.dim,
            degree: self.degree,
            eval: Arc::new(move |xi| inner(xi) * c),
        }
    }
}

fn norm2(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum()
}

fn check_dim(grid: &GridSpec, dim: usize) -> Result<()> {
    if grid.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: dim,
        });
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidBeta { beta });
    }
    Ok(())
}

/// Fails with [`Error::NonZeroMass`] unless `|∫f| <= 1e-10 ‖f‖₁`.
pub fn require_zero_mass(f: &RealField) -> Result<()> {
    let mass = integrate(f);
    let l1 = lp_norm(f, 1.0)?;
    if mass.abs() > ZERO_MASS_TOLERANCE * l1 {
        return Err(Error::NonZeroMass { mass, l1 });
    }
    Ok(())
}

/// `e^{tΔ}f`: multiplies û(ξ) by `exp(-t|ξ|²)`.
pub fn heat_semigroup(f: &RealField, t: f64) -> Result<RealField> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime { t });
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    inverse_transform(&heat_spectral(&forward_transform(f), t))
}

pub(crate) fn heat_spectral(f: &SpectralField, t: f64) -> SpectralField {
    f.apply_radial(|k2| (-t * k2).exp())
}

/// `∂^γ f`: multiplies by `(iξ)^γ`.
pub fn partial_derivative(f: &RealField, gamma: &MultiIndex) -> Result<RealField> {
    check_dim(f.grid(), gamma.dim())?;
    if gamma.order() > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderTooHigh {
            order: gamma.order(),
        });
    }
    if gamma.order() == 0 {
        return Ok(f.clone());
    }
    inverse_transform(&forward_transform(f).apply_symbol(|xi| gamma.symbol(xi)))
}

/// `D^β f`: multiplies by `|ξ|^β`, with the zero mode sent to 0.
pub fn fractional_derivative(f: &RealField, beta: f64) -> Result<RealField> {
    check_beta(beta)?;
    inverse_transform(&fractional_spectral(&forward_transform(f), beta))
}

pub(crate) fn fractional_spectral(f: &SpectralField, beta: f64) -> SpectralField {
    f.apply_radial(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(beta / 2.0) })
}

/// `I_β f`: divides by `|ξ|^β` away from the origin; requires zero mass.
pub fn riesz_potential(f: &RealField, beta: f64) -> Result<RealField> {
    let n = f.grid().dim() as f64;
    if !(beta.is_finite() && beta > 0.0 && beta < n) {
        return Err(Error::InvalidBeta { beta });
    }
    require_zero_mass(f)?;
    let spec =
        forward_transform(f).apply_radial(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(-beta / 2.0) });
    inverse_transform(&spec)
}

/// Samples `G(x, t) = (4πt)^{-n/2} exp(-|x|²/(4t))`.
pub fn gauss_kernel(grid: &GridSpec, t: f64) -> Result<RealField> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let n = grid.dim() as f64;
    let peak = (4.0 * PI * t).powf(-n / 2.0);
    RealField::from_fn(*grid, |x| peak * (-norm2(x) / (4.0 * t)).exp())
}

/// Coefficients of `∂^γ D^β G(·, t)`: `(iξ)^γ |ξ|^β (2π)^{-n/2} e^{-t|ξ|²}`.
pub(crate) fn profile_spectral(
    grid: &GridSpec,
    beta: f64,
    gamma: &MultiIndex,
    t: f64,
) -> SpectralField {
    let norm = (2.0 * PI).powf(-(grid.dim() as f64) / 2.0);
    let one = SpectralField::new(*grid, vec![Complex64::new(norm, 0.0); grid.len()])
        .expect("length matches grid");
    one.apply_symbol(|xi| {
        let k2 = norm2(xi);
        let radial = if beta == 0.0 {
            1.0
        } else if k2 == 0.0 {
            0.0
        } else {
            k2.powf(beta / 2.0)
        };
        gamma.symbol(xi) * (radial * (-t * k2).exp())
    })
}

/// `∂^γ D^β G(·, t)`, synthesized spectrally. `β = 0` gives `∂^γ G(·, t)`.
///
/// The result satisfies the exact scaling
/// `∂^γ D^β G(x, t) = t^{-(n+β+|γ|)/2} (∂^γ D^β G)(x/√t, 1)` up to the
/// periodization of the box.
pub fn self_similar_profile(
    grid: &GridSpec,
    beta: f64,
    gamma: &MultiIndex,
    t: f64,
) -> Result<RealField> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidBeta { beta });
    }
    check_dim(grid, gamma.dim())?;
    inverse_transform(&profile_spectral(grid, beta, gamma, t))
}

/// `𝓛f` with `(𝓛f)^(ξ) = ℓ(ξ) f̂(ξ)` and the zero mode sent to 0.
pub fn multiplier_apply(f: &RealField, symbol: &MultiplierSymbol) -> Result<RealField> {
    let grid = f.grid();
    check_dim(grid, symbol.dim())?;
    let mut worst = 0.0_f64;
    for idx in 0..grid.len() {
        if grid.touches_nyquist(idx) {
            continue;
        }
        let xi = grid.wavevector(idx);
        let xi = &xi[..grid.dim()];
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let value = symbol.eval(xi);
        let defect = (symbol.eval(&neg) - value.conj()).norm();
        if value.norm() > 0.0 {
            worst = worst.max(defect / value.norm());
        } else if defect > 0.0 {
            worst = f64::INFINITY;
        }
    }
    if worst > 1e-10 {
        return Err(Error::SymmetryViolation { defect: worst });
    }
    let spec = forward_transform(f).apply_symbol(|xi| {
        if norm2(xi) == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            symbol.eval(xi)
        }
    });
    inverse_transform(&spec)
}

/// `a·∇f = Σ a_j ∂_j f`.
pub fn advection_divergence(f: &RealField, a: &[f64]) -> Result<RealField> {
    check_dim(f.grid(), a.len())?;
    let spec = forward_transform(f).apply_symbol(|xi| advection_symbol(a, xi));
    inverse_transform(&spec)
}

/// `i a·ξ`.
pub(crate) fn advection_symbol(a: &[f64], xi: &[f64]) -> Complex64 {
    Complex64::new(0.0, a.iter().zip(xi).map(|(a, x)| a * x).sum())
}
