//! Independent reference solutions: Cole–Hopf for one-dimensional viscous
//! Burgers, closed-form heat flows, and a real-space Riesz kernel.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::operators::{
    gauss_kernel, heat_spectral, require_zero_mass, riesz_potential, self_similar_profile,
    MultiIndex,
};
use crate::spectral::{forward_transform, inverse_transform, lp_norm, refine, GridSpec, RealField};

/// Quadrature rule for the heat-kernel integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Gauss–Hermite in `z` with `y = x + 2√t z`.
    GaussHermite,
    /// Composite trapezoid in `y` over `[-R, R]`.
    TrapezoidRefined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub node_count: usize,
    pub rule: QuadratureRule,
    pub truncation_radius: f64,
}

impl QuadratureSpec {
    pub fn new(node_count: usize, rule: QuadratureRule, truncation_radius: f64) -> Result<Self> {
        if node_count < 64 {
            return Err(Error::InvalidParameter(format!(
                "node_count {node_count} is below the minimum of 64"
            )));
        }
        if !(truncation_radius > 0.0 && truncation_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "truncation radius {truncation_radius}"
            )));
        }
        Ok(Self {
            node_count,
            rule,
            truncation_radius,
        })
    }

    fn doubled(&self) -> Self {
        let node_count = match self.rule {
            QuadratureRule::TrapezoidRefined => 2 * self.node_count - 1,
            QuadratureRule::GaussHermite => 2 * self.node_count,
        };
        Self {
            node_count,
            ..*self
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial datum for `u_t - u_xx + a(u²)_x = 0` in Cole–Hopf form:
/// `u = -(1/a) φ_x/φ` with `φ₀ = exp(-a ∫_{-∞}^x u₀)`.
#[derive(Clone)]
pub struct ColeHopfDatum {
    a: f64,
    support: f64,
    l1: f64,
    density: ScalarFn,
    primitive: ScalarFn,
}

impl std::fmt::Debug for ColeHopfDatum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ColeHopfDatum")
            .field("a", &self.a)
            .field("support", &self.support)
            .field("l1", &self.l1)
            .finish_non_exhaustive()
    }
}

impl ColeHopfDatum {
    /// From a closed-form density and its primitive `∫_{-∞}^x u₀`, both
    /// vanishing outside `[-support, support]`.
    pub fn from_closed_form<F, P>(a: f64, support: f64, density: F, primitive: P) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a != 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "convection coefficient {a}"
            )));
        }
        let nodes = 20_001;
        let h = 2.0 * support / (nodes - 1) as f64;
        let (mut mass, mut l1) = (0.0, 0.0);
        for j in 0..nodes {
            let w = if j == 0 || j + 1 == nodes { 0.5 * h } else { h };
            let v = density(-support + j as f64 * h);
            mass += w * v;
            l1 += w * v.abs();
        }
        if mass.abs() > 1e-10 * l1.max(f64::MIN_POSITIVE) {
            return Err(Error::NonZeroMass { mass, l1 });
        }
        Ok(Self {
            a,
            support,
            l1,
            density: Arc::new(density),
            primitive: Arc::new(primitive),
        })
    }

    /// From grid samples, through their band-limited interpolant refined
    /// 16-fold and cubic interpolation in between. The datum must vanish
    /// outside `[-support, support]`.
    pub fn from_field(field: &RealField, a: f64, support: f64) -> Result<Self> {
        let grid = *field.grid();
        if grid.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: grid.dim(),
            });
        }
        require_zero_mass(field)?;
        let primitive = periodic_primitive(field)?;
        let offset = primitive.values()[0];
        let fine_u = refine(field, 16)?;
        let fine_p = refine(&primitive.map(|v| v - offset)?, 16)?;
        let fine_grid = *fine_u.grid();
        let u_vals = Arc::new(fine_u.into_values());
        let p_vals = Arc::new(fine_p.into_values());
        let l = grid.half_width();
        let h = fine_grid.spacing();
        let interp = move |vals: &Arc<Vec<f64>>, x: f64| -> f64 {
            if x.abs() > support {
                return 0.0;
            }
            cubic_uniform(vals, -l, h, x)
        };
        let (uv, pv) = (Arc::clone(&u_vals), Arc::clone(&p_vals));
        let density = move |x: f64| interp(&uv, x);
        let primitive = move |x: f64| interp(&pv, x);
        let l1 = lp_norm(field, 1.0)?;
        Ok(Self {
            a,
            support,
            l1,
            density: Arc::new(density),
            primitive: Arc::new(primitive),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// `φ₀(y) = exp(-a P(y))`.
    pub fn phi0(&self, y: f64) -> f64 {
        (-self.a * (self.primitive)(y)).exp()
    }

    /// Lower bound `exp(-|a|‖u₀‖₁)` of the heat-evolved `φ`.
    pub fn denominator_bound(&self) -> f64 {
        (-self.a.abs() * self.l1).exp()
    }
}

fn cubic_uniform(vals: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = vals.len();
    let s = (x - x0) / h;
    let i = (s.floor() as isize).clamp(1, n as isize - 3) as usize;
    let r = s - i as f64;
    let (p0, p1, p2, p3) = (vals[i - 1], vals[i], vals[i + 1], vals[i + 2]);
    let w0 = -r * (r - 1.0) * (r - 2.0) / 6.0;
    let w1 = (r + 1.0) * (r - 1.0) * (r - 2.0) / 2.0;
    let w2 = -(r + 1.0) * r * (r - 2.0) / 2.0;
    let w3 = (r + 1.0) * r * (r - 1.0) / 6.0;
    w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
}

/// `∫ u` as the periodic primitive of a zero-mass field (up to a constant).
fn periodic_primitive(field: &RealField) -> Result<RealField> {
    let spec = forward_transform(field).apply_symbol(|xi| {
        if xi[0] == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / xi[0])
        }
    });
    inverse_transform(&spec)
}

/// Nodes and weights of the `n`-point Gauss–Hermite rule for `e^{-z²}`,
/// from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e: Vec<f64> = (1..=n)
        .map(|k| if k < n { (k as f64 / 2.0).sqrt() } else { 0.0 })
        .collect();
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiagonal_ql(&mut d, &mut e, &mut first);
    let mut pairs: Vec<(f64, f64)> = d
        .into_iter()
        .zip(first)
        .map(|(z, v)| (z, PI.sqrt() * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Implicit QL on a symmetric tridiagonal matrix with diagonal `d` and
/// couplings `e[i]` between `i` and `i + 1`; `d` receives the eigenvalues
/// and `first` the first components of the eigenvectors.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], first: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l || iterations == 100 {
                break;
            }
            iterations += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let f = first[i + 1];
                first[i + 1] = s * first[i] + c * f;
                first[i] = c * first[i] - s * f;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

fn cole_hopf_raw(
    datum: &ColeHopfDatum,
    t: f64,
    xs: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let bound = datum.denominator_bound();
    let pairs: Vec<(f64, f64)> = match spec.rule {
        QuadratureRule::TrapezoidRefined => {
            let r = spec.truncation_radius.max(datum.support);
            let n = spec.node_count;
            let h = 2.0 * r / (n - 1) as f64;
            let nodes: Vec<(f64, f64, f64)> = (0..n)
                .map(|j| {
                    let y = -r + j as f64 * h;
                    let phi = datum.phi0(y);
                    let w = if j == 0 || j + 1 == n { 0.5 * h } else { h };
                    (y, w * (phi - 1.0), w * datum.density(y) * phi)
                })
                .collect();
            let norm = (4.0 * PI * t).powf(-0.5);
            xs.par_iter()
                .map(|&x| {
                    let (mut den, mut num) = (0.0, 0.0);
                    for &(y, g1, g2) in &nodes {
                        let k = (-(x - y) * (x - y) / (4.0 * t)).exp();
                        den += k * g1;
                        num += k * g2;
                    }
                    (1.0 + norm * den, norm * num)
                })
                .collect()
        }
        QuadratureRule::GaussHermite => {
            let (z, w) = gauss_hermite(spec.node_count);
            let scale = 2.0 * t.sqrt();
            let norm = PI.powf(-0.5);
            xs.par_iter()
                .map(|&x| {
                    let (mut den, mut num) = (0.0, 0.0);
                    for (zk, wk) in z.iter().zip(&w) {
                        let y = x + scale * zk;
                        let phi = datum.phi0(y);
                        den += wk * phi;
                        num += wk * datum.density(y) * phi;
                    }
                    (norm * den, norm * num)
                })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(xs.len());
    for (&x, (den, num)) in xs.iter().zip(pairs) {
        if den < bound * (1.0 - 1e-6) || !den.is_finite() {
            return Err(Error::DenominatorBreach {
                x,
                value: den,
                bound,
            });
        }
        // u = -(1/a) φ_x/φ and φ_x = e^{tΔ}(-a u₀ φ₀)
        out.push(num / den);
    }
    Ok(out)
}

/// Cole–Hopf solution at time `t` and points `xs`. The quadrature is
/// repeated with twice the nodes; the result is returned only if the two
/// agree to `1e-8` relative to `max|u|`.
pub fn cole_hopf_solution(
    datum: &ColeHopfDatum,
    t: f64,
    xs: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let coarse = cole_hopf_raw(datum, t, xs, spec)?;
    let fine = cole_hopf_raw(datum, t, xs, &spec.doubled())?;
    let scale = fine.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let change = coarse
        .iter()
        .zip(&fine)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if change > 1e-8 * scale.max(f64::MIN_POSITIVE) && change > 0.0 {
        return Err(Error::QuadratureUnconverged {
            change: change / scale.max(f64::MIN_POSITIVE),
        });
    }
    Ok(fine)
}

/// Exact Burgers evolution on the periodic box: `φ₀ = exp(-a P)` with `P`
/// the periodic primitive of the zero-mass `u₀`, `φ(t) = e^{tΔ}φ₀` spectrally
/// and `u = -(1/a) φ_x/φ`.
pub fn cole_hopf_periodic(u0: &RealField, a: f64, times: &[f64]) -> Result<Vec<RealField>> {
    let grid = *u0.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: grid.dim(),
        });
    }
    if !(a != 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "convection coefficient {a}"
        )));
    }
    require_zero_mass(u0)?;
    let primitive = periodic_primitive(u0)?;
    let phi0 = primitive.map(|p| (-a * p).exp())?;
    let spec = forward_transform(&phi0);
    // maximum principle: φ(t) stays above min φ₀
    let bound = phi0.values().iter().cloned().fold(f64::INFINITY, f64::min);
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::NegativeTime { t });
            }
            let evolved = heat_spectral(&spec, t);
            let phi = inverse_transform(&evolved)?;
            let dphi = inverse_transform(&evolved.apply_symbol(|xi| Complex64::new(0.0, xi[0])))?;
            let mut values = Vec::with_capacity(grid.len());
            for (j, (p, dp)) in phi.values().iter().zip(dphi.values()).enumerate() {
                if !(*p >= bound * (1.0 - 1e-6)) {
                    return Err(Error::DenominatorBreach {
                        x: grid.coordinate(j),
                        value: *p,
                        bound,
                    });
                }
                values.push(-dp / (a * p));
            }
            RealField::new(grid, values)
        })
        .collect()
}

/// Families with a closed-form heat flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeatKind {
    /// `m·G(·, s)`.
    Gaussian { s: f64, mass: f64 },
    /// `m·∂_j G(·, s)`.
    GaussianDerivative { s: f64, mass: f64, axis: usize },
    /// `D^β G(·, s)`.
    FractionalProfile { s: f64, beta: f64 },
}

impl FromStr for HeatKind {
    type Err = Error;

    /// Parses a family name with default parameters (`s = 1`, unit mass,
    /// first axis, `β = 1/2`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(HeatKind::Gaussian { s: 1.0, mass: 1.0 }),
            "gaussian_derivative" => Ok(HeatKind::GaussianDerivative {
                s: 1.0,
                mass: 1.0,
                axis: 0,
            }),
            "fractional_profile" => Ok(HeatKind::FractionalProfile { s: 1.0, beta: 0.5 }),
            other => Err(Error::UnsupportedKind(other.to_string())),
        }
    }
}

/// `e^{tΔ}u₀` for the listed families, evaluated in closed form (Gaussian
/// families, sampled directly) or by the time-shifted spectral profile.
pub fn heat_exact(grid: &GridSpec, kind: HeatKind, t: f64) -> Result<RealField> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    match kind {
        HeatKind::Gaussian { s, mass } => Ok(gauss_kernel(grid, s + t)?.scale(mass)),
        HeatKind::GaussianDerivative { s, mass, axis } => {
            if axis >= grid.dim() {
                return Err(Error::UnsupportedKind(format!(
                    "derivative along axis {axis}"
                )));
            }
            let total = s + t;
            let n = grid.dim() as f64;
            let peak = mass * (4.0 * PI * total).powf(-n / 2.0);
            RealField::from_fn(*grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                -x[axis] / (2.0 * total) * peak * (-r2 / (4.0 * total)).exp()
            })
        }
        HeatKind::FractionalProfile { s, beta } => {
            self_similar_profile(grid, beta, &MultiIndex::zero(grid.dim()), s + t)
        }
    }
}

/// `C(β,1) = Γ((1-β)/2) / (2^β √π Γ(β/2))`, the constant for which
/// `C|x|^{β-1}` has Fourier symbol `|ξ|^{-β}` in one dimension.
pub fn riesz_constant(beta: f64) -> f64 {
    gamma((1.0 - beta) / 2.0) / (2f64.powf(beta) * PI.sqrt() * gamma(beta / 2.0))
}

fn calibration_ratio(beta: f64) -> Result<f64> {
    let grid = GridSpec::line(30.0, 512)?;
    let u = self_similar_profile(&grid, 0.0, &MultiIndex::axis(1, 0), 1.0)?;
    let spectral = riesz_potential(&u, beta)?;
    let kernel = riesz_direct(&u, beta, riesz_constant(beta))?;
    let dot = |a: &RealField, b: &RealField| -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
    };
    Ok(dot(&kernel, &spectral) / dot(&spectral, &spectral))
}

fn calibrated_constant(beta: f64) -> Result<f64> {
    static CHECKED: OnceLock<std::sync::Mutex<Vec<(u64, f64)>>> = OnceLock::new();
    let cache = CHECKED.get_or_init(Default::default);
    let key = beta.to_bits();
    if let Some((_, r)) = cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .iter()
        .find(|(k, _)| *k == key)
    {
        return check_ratio(*r).map(|_| riesz_constant(beta));
    }
    let ratio = calibration_ratio(beta)?;
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .push((key, ratio));
    check_ratio(ratio).map(|_| riesz_constant(beta))
}

fn check_ratio(ratio: f64) -> Result<()> {
    if (ratio - 1.0).abs() > 1e-3 || !ratio.is_finite() {
        return Err(Error::RieszCalibration { ratio });
    }
    Ok(())
}

/// `I_β u₀` by direct quadrature of `C(β,1)|x-y|^{β-1}` against the
/// 4-fold refined interpolant of `u₀`, with product integration of the
/// singular kernel against hat functions and the periodic images summed in
/// closed form. The result is returned with zero mean, matching the
/// periodic potential whose zero mode is undefined.
pub fn riesz_kernel_oracle(u0: &RealField, beta: f64) -> Result<RealField> {
    let grid = u0.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: grid.dim(),
        });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidBeta { beta });
    }
    require_zero_mass(u0)?;
    let c = calibrated_constant(beta)?;
    riesz_direct(u0, beta, c)
}

fn riesz_direct(u0: &RealField, beta: f64, constant: f64) -> Result<RealField> {
    const REFINE: usize = 4;
    const IMAGES: usize = 2000;
    let grid = *u0.grid();
    let fine = refine(u0, REFINE)?;
    let fvals = fine.values();
    let nf = fvals.len();
    let hf = fine.grid().spacing();
    let period = 2.0 * grid.half_width();
    let alpha = beta - 1.0;
    let p = |z: f64| z.abs().powf(alpha + 2.0) / ((alpha + 1.0) * (alpha + 2.0));
    // weights for offsets 0..nf
    let scale = hf.powf(alpha + 1.0);
    let near: Vec<f64> = (0..nf)
        .map(|d| {
            let d = d as f64;
            scale * (p(d + 1.0) - 2.0 * p(d) + p(d - 1.0))
        })
        .collect();
    // image correction for offsets k·hf, k in (-nf, nf)
    let tail_sum = (IMAGES as f64).powf(alpha - 1.0) / (1.0 - alpha);
    let image = |dist: f64| -> f64 {
        let mut s = 0.0;
        for m in 1..=IMAGES {
            let shift = period * m as f64;
            s += (dist + shift).abs().powf(alpha) + (dist - shift).abs().powf(alpha)
                - 2.0 * shift.powf(alpha);
        }
        s + alpha * (alpha - 1.0) * dist * dist * period.powf(alpha - 2.0) * tail_sum
    };
    let images: Vec<f64> = (0..2 * nf - 1)
        .into_par_iter()
        .map(|k| image((k as f64 - (nf as f64 - 1.0)).abs() * hf) * hf)
        .collect();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let fi = i * REFINE;
            let mut acc = 0.0;
            for (j, v) in fvals.iter().enumerate() {
                let d = fi.abs_diff(j);
                acc += v * (near[d] + images[fi + nf - 1 - j]);
            }
            constant * acc
        })
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    RealField::new(grid, values.into_iter().map(|v| v - mean).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{make_dipole, make_fractional_bump};
    use crate::operators::heat_semigroup;
    use crate::spectral::integrate;

    fn gaussian_datum(amplitude: f64, width: f64, a: f64) -> ColeHopfDatum {
        // u₀ = ψ' with ψ = A exp(-(x/w)²)
        let w2 = width * width;
        ColeHopfDatum::from_closed_form(
            a,
            12.0 * width,
            move |x| -2.0 * x / w2 * amplitude * (-x * x / w2).exp(),
            move |x| amplitude * (-x * x / w2).exp(),
        )
        .unwrap()
    }

    #[test]
    fn riesz_constant_closed_form() {
        for beta in [0.2, 0.5, 0.8] {
            let alt = 1.0 / (2.0 * gamma(beta) * (PI * beta / 2.0).cos());
            assert!((riesz_constant(beta) - alt).abs() <= 1e-12);
        }
        assert!((riesz_constant(0.5) - 0.398_942_280_401_432_7).abs() <= 1e-12);
    }

    #[test]
    fn gauss_hermite_integrates_polynomials() {
        let (z, w) = gauss_hermite(64);
        let total: f64 = w.iter().sum();
        assert!((total - PI.sqrt()).abs() <= 1e-12);
        let second: f64 = z.iter().zip(&w).map(|(z, w)| w * z * z).sum();
        assert!((second - PI.sqrt() / 2.0).abs() <= 1e-12);
        let fourth: f64 = z.iter().zip(&w).map(|(z, w)| w * z.powi(4)).sum();
        assert!((fourth - 0.75 * PI.sqrt()).abs() <= 1e-11);
    }

    #[test]
    fn quadrature_spec_requires_nodes() {
        assert!(QuadratureSpec::new(32, QuadratureRule::GaussHermite, 10.0).is_err());
        assert!(QuadratureSpec::new(64, QuadratureRule::GaussHermite, 10.0).is_ok());
    }

    #[test]
    fn zero_datum_gives_zero() {
        let d = ColeHopfDatum::from_closed_form(0.5, 5.0, |_| 0.0, |_| 0.0).unwrap();
        let spec = QuadratureSpec::new(2001, QuadratureRule::TrapezoidRefined, 5.0).unwrap();
        let u = cole_hopf_solution(&d, 1.0, &[-1.0, 0.0, 2.0], &spec).unwrap();
        assert!(u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn small_amplitude_matches_heat_flow() {
        let grid = GridSpec::line(30.0, 1024).unwrap();
        let c = 1e-4;
        let datum = gaussian_datum(c, 1.0, 0.5);
        let spec = QuadratureSpec::new(4001, QuadratureRule::TrapezoidRefined, 12.0).unwrap();
        let xs: Vec<f64> = (0..grid.len())
            .step_by(8)
            .map(|j| grid.coordinate(j))
            .collect();
        let u = cole_hopf_solution(&datum, 1.0, &xs, &spec).unwrap();
        let linear = heat_exact(
            &grid,
            HeatKind::GaussianDerivative {
                s: 0.25,
                mass: c * PI.sqrt(),
                axis: 0,
            },
            1.0,
        )
        .unwrap();
        for (k, v) in u.iter().enumerate() {
            assert!((v - linear.values()[8 * k]).abs() <= 1e-7);
        }
    }

    #[test]
    fn nonlinear_correction_is_quadratic() {
        let grid = GridSpec::line(30.0, 512).unwrap();
        let spec = QuadratureSpec::new(4001, QuadratureRule::TrapezoidRefined, 12.0).unwrap();
        let xs: Vec<f64> = (0..grid.len())
            .step_by(4)
            .map(|j| grid.coordinate(j))
            .collect();
        let defect = |c: f64| -> f64 {
            let u = cole_hopf_solution(&gaussian_datum(c, 1.0, 0.5), 1.0, &xs, &spec).unwrap();
            let lin = heat_exact(
                &grid,
                HeatKind::GaussianDerivative {
                    s: 0.25,
                    mass: c * PI.sqrt(),
                    axis: 0,
                },
                1.0,
            )
            .unwrap();
            u.iter()
                .enumerate()
                .map(|(k, v)| (v - lin.values()[4 * k]).abs())
                .fold(0.0, f64::max)
        };
        let ratio = defect(2e-3) / defect(1e-3);
        assert!((ratio - 4.0).abs() <= 0.01, "{ratio}");
    }

    #[test]
    fn gauss_hermite_and_trapezoid_agree() {
        let datum = gaussian_datum(1.0, 1.0, 0.5);
        let xs = [-3.0, -0.5, 0.0, 1.0, 4.0];
        let trap = QuadratureSpec::new(4001, QuadratureRule::TrapezoidRefined, 12.0).unwrap();
        let gh = QuadratureSpec::new(200, QuadratureRule::GaussHermite, 12.0).unwrap();
        let a = cole_hopf_solution(&datum, 0.5, &xs, &trap).unwrap();
        let b = cole_hopf_solution(&datum, 0.5, &xs, &gh).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn under_resolved_quadrature_fails_the_gate() {
        let datum = gaussian_datum(10.0, 0.3, 0.5);
        let spec = QuadratureSpec::new(64, QuadratureRule::TrapezoidRefined, 4.0).unwrap();
        let r = cole_hopf_solution(&datum, 1e-3, &[0.0, 0.1, 0.2], &spec);
        assert!(matches!(
            r,
            Err(Error::QuadratureUnconverged { .. }) | Err(Error::DenominatorBreach { .. })
        ));
    }

    #[test]
    fn sampled_datum_matches_closed_form() {
        let grid = GridSpec::line(20.0, 1024).unwrap();
        let closed = gaussian_datum(2.0, 1.0, 0.5);
        let field = RealField::from_fn(grid, |x| closed.density(x[0])).unwrap();
        let sampled = ColeHopfDatum::from_field(&field, 0.5, 12.0).unwrap();
        let spec = QuadratureSpec::new(4001, QuadratureRule::TrapezoidRefined, 12.0).unwrap();
        let xs = [-2.0, 0.0, 0.7, 3.0];
        let a = cole_hopf_solution(&closed, 1.0, &xs, &spec).unwrap();
        let b = cole_hopf_solution(&sampled, 1.0, &xs, &spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn periodic_cole_hopf_agrees_with_whole_line() {
        let grid = GridSpec::line(40.0, 2048).unwrap();
        let closed = gaussian_datum(2.0, 1.0, 0.5);
        let field = RealField::from_fn(grid, |x| closed.density(x[0])).unwrap();
        let periodic = cole_hopf_periodic(&field, 0.5, &[0.0, 2.0]).unwrap();
        assert!(periodic[0].sub(&field).unwrap().max_abs() <= 1e-12);
        let spec = QuadratureSpec::new(4001, QuadratureRule::TrapezoidRefined, 12.0).unwrap();
        let xs: Vec<f64> = (0..grid.len()).map(|j| grid.coordinate(j)).collect();
        let line = cole_hopf_solution(&closed, 2.0, &xs, &spec).unwrap();
        let err = periodic[1]
            .values()
            .iter()
            .zip(&line)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn heat_exact_families() {
        let g = GridSpec::line(40.0, 1024).unwrap();
        let base = gauss_kernel(&g, 1.0).unwrap();
        let evolved = heat_semigroup(&base, 2.0).unwrap();
        let exact = heat_exact(&g, HeatKind::Gaussian { s: 1.0, mass: 1.0 }, 2.0).unwrap();
        assert!(evolved.sub(&exact).unwrap().max_abs() <= 1e-12);

        let d = make_dipole(&g, 0, 1.0, 1.0).unwrap();
        let evolved = heat_semigroup(d.field(), 2.0).unwrap();
        let exact = heat_exact(&g, "gaussian_derivative".parse().unwrap(), 2.0).unwrap();
        assert!(evolved.sub(&exact).unwrap().max_abs() <= 1e-12);

        let u = make_fractional_bump(&g, 0.5, 1.0, 1.0).unwrap();
        let evolved = heat_semigroup(u.field(), 3.0).unwrap();
        let exact = heat_exact(&g, HeatKind::FractionalProfile { s: 1.0, beta: 0.5 }, 3.0).unwrap();
        assert!(evolved.sub(&exact).unwrap().max_abs() <= 1e-12);

        assert!(matches!(
            "levy".parse::<HeatKind>(),
            Err(Error::UnsupportedKind(_))
        ));
    }

    #[test]
    fn riesz_oracle_recovers_gaussian() {
        let g = GridSpec::line(60.0, 2048).unwrap();
        let u = make_fractional_bump(&g, 0.5, 1.0, 1.0).unwrap();
        let oracle = riesz_kernel_oracle(u.field(), 0.5).unwrap();
        let phi = gauss_kernel(&g, 1.0).unwrap();
        let mean = integrate(&phi) / 120.0;
        let sup = phi.max_abs();
        for j in g.len() / 4..3 * g.len() / 4 {
            let err = (oracle.values()[j] - (phi.values()[j] - mean)).abs();
            assert!(err <= 1e-4 * sup, "x = {}: {err}", g.coordinate(j));
        }
    }

    #[test]
    fn riesz_oracle_preserves_oddness() {
        let g = GridSpec::line(30.0, 512).unwrap();
        let d = make_dipole(&g, 0, 1.0, 1.0).unwrap();
        let v = riesz_kernel_oracle(d.field(), 0.3).unwrap();
        let n = g.len();
        for j in 1..n / 2 {
            let (a, b) = (v.values()[n / 2 + j], v.values()[n / 2 - j]);
            assert!((a + b).abs() <= 1e-10 * v.max_abs());
        }
    }
}
