//! Zero-mass initial data with a prescribed low-frequency order β, and the
//! quantities that characterize them: the amplitude A, the Besov norm
//! `sup_s s^{β/2}‖e^{sΔ}v‖₁` and the moment `∫|x|^β|u₀|`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::operators::{heat_spectral, profile_spectral, require_zero_mass, MultiIndex};
use crate::spectral::{
    forward_transform, inverse_transform, lp_norm, GridSpec, RealField, SpectralField,
};

/// How a datum was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    FractionalBump,
    Dipole,
    CompactMiyakawa,
    Custom,
}

impl Construction {
    pub fn tag(&self) -> &'static str {
        match self {
            Construction::FractionalBump => "fractional_bump",
            Construction::Dipole => "dipole",
            Construction::CompactMiyakawa => "compact_miyakawa",
            Construction::Custom => "custom",
        }
    }
}

/// A zero-mass field together with its declared order β and amplitude A.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum {
    field: RealField,
    beta: f64,
    amplitude: Option<f64>,
    construction: Construction,
}

impl InitialDatum {
    pub fn new(
        field: RealField,
        beta: f64,
        amplitude: Option<f64>,
        construction: Construction,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidBeta { beta });
        }
        require_zero_mass(&field)?;
        Ok(Self {
            field,
            beta,
            amplitude,
            construction,
        })
    }

    pub fn custom(field: RealField, beta: f64) -> Result<Self> {
        Self::new(field, beta, None, Construction::Custom)
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn amplitude(&self) -> Option<f64> {
        self.amplitude
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// `c·u₀`; the amplitude scales with it.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            field: self.field.scale(c),
            beta: self.beta,
            amplitude: self.amplitude.map(|a| a * c),
            construction: self.construction,
        }
    }

    /// `u₀ + v₀`. The sum carries the lower order; a higher-order summand
    /// contributes nothing to the amplitude.
    pub fn superpose(&self, other: &InitialDatum) -> Result<Self> {
        let field = self.field.add(&other.field)?;
        let (beta, amplitude) = if (self.beta - other.beta).abs() < 1e-12 {
            let a = match (self.amplitude, other.amplitude) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
            (self.beta, a)
        } else if self.beta < other.beta {
            (self.beta, self.amplitude)
        } else {
            (other.beta, other.amplitude)
        };
        Ok(Self {
            field,
            beta,
            amplitude,
            construction: Construction::Custom,
        })
    }
}

fn check_open_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidBeta { beta });
    }
    Ok(())
}

fn check_width(grid: &GridSpec, width: f64) -> Result<()> {
    let limit = grid.half_width() / 8.0;
    if !(width > 0.0 && width <= limit) {
        return Err(Error::WidthTooLarge { width, limit });
    }
    Ok(())
}

/// `u₀ = D^β φ` with `φ = m·G(·, w²)`, so that `I_β u₀ = φ` and
/// `A = m(2π)^{-n/2}`.
pub fn make_fractional_bump(
    grid: &GridSpec,
    beta: f64,
    mass: f64,
    width: f64,
) -> Result<InitialDatum> {
    check_open_beta(beta)?;
    check_width(grid, width)?;
    let spec = scale_spectral(
        profile_spectral(grid, beta, &MultiIndex::zero(grid.dim()), width * width),
        mass,
    );
    let field = inverse_transform(&spec)?;
    let amplitude = mass * (2.0 * PI).powf(-(grid.dim() as f64) / 2.0);
    InitialDatum::new(field, beta, Some(amplitude), Construction::FractionalBump)
}

/// `u₀ = D^β φ` with `φ` a compactly supported C^∞ bump of mass `m` and
/// support radius `radius`.
pub fn make_compact_fractional_bump(
    grid: &GridSpec,
    beta: f64,
    mass: f64,
    radius: f64,
) -> Result<InitialDatum> {
    check_open_beta(beta)?;
    let limit = grid.half_width() / 4.0;
    if !(radius > 0.0 && radius <= limit) {
        return Err(Error::SupportTooLarge { radius, limit });
    }
    let phi = unit_bump(grid, [0.0, 0.0], radius)?.scale(mass);
    let spec =
        forward_transform(&phi)
            .apply_radial(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(beta / 2.0) });
    let field = inverse_transform(&spec)?;
    let amplitude = mass * (2.0 * PI).powf(-(grid.dim() as f64) / 2.0);
    InitialDatum::new(field, beta, Some(amplitude), Construction::FractionalBump)
}

/// `u₀ = ∂_j ψ` with `ψ = m·G(·, w²)`: order β = 1, amplitude undeclared.
pub fn make_dipole(grid: &GridSpec, axis: usize, mass: f64, width: f64) -> Result<InitialDatum> {
    if axis >= grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: axis + 1,
        });
    }
    check_width(grid, width)?;
    let gamma = MultiIndex::axis(grid.dim(), axis);
    let spec = scale_spectral(profile_spectral(grid, 0.0, &gamma, width * width), mass);
    let field = inverse_transform(&spec)?;
    InitialDatum::new(field, 1.0, None, Construction::Dipole)
}

fn scale_spectral(f: SpectralField, c: f64) -> SpectralField {
    let grid = *f.grid();
    let coeffs = f.into_coeffs().into_iter().map(|v| v * c).collect();
    SpectralField::new(grid, coeffs).expect("length preserved")
}

fn bump_profile(rho2: f64) -> f64 {
    if rho2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - rho2)).exp()
    }
}

/// The C^∞ bump `exp(-1/(1-ρ²))` centred at `center`, normalized to unit
/// discrete mass.
fn unit_bump(grid: &GridSpec, center: [f64; 2], radius: f64) -> Result<RealField> {
    let raw = RealField::from_fn(*grid, |x| {
        let rho2: f64 = x
            .iter()
            .zip(center.iter())
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            / (radius * radius);
        bump_profile(rho2)
    })?;
    let total: f64 = raw.values().iter().sum::<f64>() * grid.cell_volume();
    if total <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bump of radius {radius} is not resolved by the grid"
        )));
    }
    Ok(raw.scale(1.0 / total))
}

/// One compact bump: `weight · b((x - center)/radius)` with unit-mass `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub weight: f64,
}

/// Parameters of a compactly supported zero-mass datum
/// `s^n Σ w_i b((s x - c_i)/r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiyakawaParams {
    pub bumps: Vec<Bump>,
    pub dilation: f64,
}

impl MiyakawaParams {
    /// Two bumps of opposite weight `±mass` at `±separation/2` on the first axis.
    pub fn opposite_pair(separation: f64, radius: f64, mass: f64) -> Self {
        let half = separation / 2.0;
        Self {
            bumps: vec![
                Bump {
                    center: [-half, 0.0],
                    radius,
                    weight: mass,
                },
                Bump {
                    center: [half, 0.0],
                    radius,
                    weight: -mass,
                },
            ],
            dilation: 1.0,
        }
    }

    /// 2 to 4 bumps with centres in `[-support/2, support/2]^n`, radii in
    /// `[support/8, support/4]` and weights shifted to sum to zero.
    pub fn random(dim: usize, support: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.gen_range(2..=4);
        let mut bumps: Vec<Bump> = (0..count)
            .map(|_| {
                let mut center = [0.0; 2];
                for c in center.iter_mut().take(dim) {
                    *c = rng.gen_range(-support / 2.0..support / 2.0);
                }
                Bump {
                    center,
                    radius: rng.gen_range(support / 8.0..support / 4.0),
                    weight: rng.gen_range(-1.0..1.0),
                }
            })
            .collect();
        let mean = bumps.iter().map(|b| b.weight).sum::<f64>() / count as f64;
        bumps.iter_mut().for_each(|b| b.weight -= mean);
        Self {
            bumps,
            dilation: 1.0,
        }
    }

    /// The mass-preserving dilation `u₀ ↦ s^n u₀(s·)`.
    pub fn dilated(&self, s: f64) -> Self {
        Self {
            bumps: self.bumps.clone(),
            dilation: self.dilation * s,
        }
    }

    /// Radius of a ball about the origin containing the support.
    pub fn support_radius(&self) -> f64 {
        self.bumps
            .iter()
            .map(|b| (b.center[0].hypot(b.center[1]) + b.radius) / self.dilation)
            .fold(0.0, f64::max)
    }
}

/// Compactly supported zero-mass data satisfying the moment condition
/// `∫|x|^β|u₀| < ∞` for every β.
pub fn make_miyakawa(grid: &GridSpec, beta: f64, params: &MiyakawaParams) -> Result<InitialDatum> {
    check_open_beta(beta)?;
    if !(params.dilation > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dilation {}",
            params.dilation
        )));
    }
    let limit = grid.half_width() / 4.0;
    let radius = params.support_radius();
    if radius > limit {
        return Err(Error::SupportTooLarge { radius, limit });
    }
    let s = params.dilation;
    let mut field = RealField::zeros(*grid);
    for b in &params.bumps {
        let center = [b.center[0] / s, b.center[1] / s];
        let bump = unit_bump(grid, center, b.radius / s)?;
        field = field.add(&bump.scale(b.weight))?;
    }
    InitialDatum::new(field, beta, None, Construction::CompactMiyakawa)
}

/// Estimate of `A = lim û₀(ξ)/|ξ|^β` with its error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeEstimate {
    pub value: f64,
    pub error_bar: f64,
    /// Shell averages of `Re û₀/|ξ|^β`, innermost first.
    pub shells: [f64; 3],
}

/// Averages `Re û₀(ξ)/|ξ|^β` over the three smallest nonzero wavevector
/// shells and extrapolates linearly in `|ξ|` to the origin.
pub fn compute_a(u0: &InitialDatum, beta: f64) -> Result<AmplitudeEstimate> {
    if !(beta > 0.0) {
        return Err(Error::InvalidBeta { beta });
    }
    let field = u0.field();
    require_zero_mass(field)?;
    let grid = field.grid();
    let spec = forward_transform(field);
    let n = grid.points_per_dim();
    let mut shells: Vec<(i64, f64, f64, usize)> = Vec::new();
    let mut scale = 0.0_f64;
    for idx in 0..grid.len() {
        let axes = grid.axes(idx);
        let k2: i64 = axes[..grid.dim()]
            .iter()
            .map(|&m| grid.mode_number(m).pow(2))
            .sum();
        if k2 == 0 || k2 > 16 || grid.touches_nyquist(idx) || n < 16 {
            continue;
        }
        let xi = grid.wavevector(idx);
        let r = xi[..grid.dim()].iter().map(|v| v * v).sum::<f64>().sqrt();
        let ratio = spec.coeffs()[idx] / r.powf(beta);
        scale = scale.max(ratio.norm());
        match shells.iter_mut().find(|s| s.0 == k2) {
            Some(s) => {
                s.2 += ratio.re;
                s.3 += 1;
            }
            None => shells.push((k2, r, ratio.re, 1)),
        }
    }
    shells.sort_by_key(|s| s.0);
    let points: Vec<(f64, f64)> = shells
        .iter()
        .take(3)
        .map(|s| (s.1, s.2 / s.3 as f64))
        .collect();
    let values = [points[0].1, points[1].1, points[2].1];
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    let magnitude = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if magnitude <= 1e-10 * scale || magnitude == 0.0 {
        return Ok(AmplitudeEstimate {
            value: 0.0,
            error_bar: spread,
            shells: values,
        });
    }
    if spread > 0.5 * magnitude {
        return Err(Error::InconsistentShells {
            spread: 100.0 * spread / magnitude,
        });
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let value = my - sxy / sxx * mx;
    Ok(AmplitudeEstimate {
        value,
        error_bar: spread,
        shells: values,
    })
}

/// Result of the windowed Besov supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovEstimate {
    pub value: f64,
    pub argmax: f64,
    /// The supremum was attained at an end of the time window.
    pub at_endpoint: bool,
}

/// 40 log-uniform times on `[1e-2, (L/4)²]`.
pub fn default_besov_times(grid: &GridSpec) -> Vec<f64> {
    log_times(1e-2, grid.validity_horizon(), 40)
}

/// `count` log-uniform times from `lo` to `hi` inclusive.
pub fn log_times(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// `max_{s ∈ times} s^{β/2}‖e^{sΔ}v‖₁`.
pub fn besov_norm(v: &RealField, beta: f64, times: &[f64]) -> Result<BesovEstimate> {
    if times.is_empty() || times.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidTimeGrid("times must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid(
            "times must be strictly increasing".into(),
        ));
    }
    let horizon = v.grid().validity_horizon();
    if times.len() < 30 || times[0] > 1e-2 * (1.0 + 1e-12) || *times.last().unwrap() < horizon * (1.0 - 1e-12) {
        log::warn!(
            "Besov window [{}, {}] with {} points is narrower than [1e-2, {horizon}] x 30",
            times[0],
            times.last().unwrap(),
            times.len()
        );
    }
    let spec = forward_transform(v);
    let mut best = BesovEstimate {
        value: 0.0,
        argmax: times[0],
        at_endpoint: false,
    };
    let mut best_index = 0;
    for (i, &s) in times.iter().enumerate() {
        let evolved = inverse_transform(&heat_spectral(&spec, s))?;
        let value = s.powf(beta / 2.0) * lp_norm(&evolved, 1.0)?;
        if value > best.value {
            best = BesovEstimate {
                value,
                argmax: s,
                at_endpoint: false,
            };
            best_index = i;
        }
    }
    if best.value > 0.0 && (best_index == 0 || best_index + 1 == times.len()) {
        best.at_endpoint = true;
        log::warn!(
            "Besov supremum attained at window endpoint s = {}",
            best.argmax
        );
    }
    Ok(best)
}

/// `∫|x|^β|u(x)| dx`. In one dimension the `|x|^β` singularity at the
/// node `x = 0` is corrected to leading order.
pub fn moment_beta(u: &RealField, beta: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta { beta });
    }
    let grid = u.grid();
    let mut sum = 0.0;
    for (idx, v) in u.values().iter().enumerate() {
        let x = grid.point(idx);
        let r = x[..grid.dim()].iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > 0.0 {
            sum += r.powf(beta) * v.abs();
        } else if beta == 0.0 {
            sum += v.abs();
        }
    }
    let mut total = sum * grid.cell_volume();
    if grid.dim() == 1 && beta > 0.0 {
        let origin = u.values()[grid.points_per_dim() / 2].abs();
        let h = grid.spacing();
        total -= 2.0 * zeta_negative(beta) * h.powf(1.0 + beta) * origin;
    }
    Ok(total)
}

/// `ζ(-β)` for `β > 0` via the functional equation.
fn zeta_negative(beta: f64) -> f64 {
    let s = 1.0 + beta;
    2.0 * (2.0 * PI).powf(-s) * (PI * s / 2.0).cos() * gamma(s) * zeta(s)
}

/// Riemann zeta for `s > 1` by Euler–Maclaurin summation.
fn zeta(s: f64) -> f64 {
    const K: usize = 12;
    const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
    let kf = K as f64;
    let mut total: f64 = (1..K).map(|k| (k as f64).powf(-s)).sum();
    total += kf.powf(1.0 - s) / (s - 1.0) + 0.5 * kf.powf(-s);
    let mut rising = s;
    let mut factorial = 2.0;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let order = 2 * j + 1;
        total += b / factorial * rising * kf.powf(-s - order as f64);
        rising *= (s + order as f64) * (s + order as f64 + 1.0);
        factorial *= ((2 * j + 3) * (2 * j + 4)) as f64;
    }
    total
}
