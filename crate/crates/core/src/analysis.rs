//! Asymptotics instrumentation: norm time series, decay-exponent fits,
//! profile distances, scaling collapse, the g-functional and related checks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::initial_data::InitialDatum;
use crate::operators::{heat_semigroup, profile_spectral, MultiIndex};
use crate::spectral::{
    forward_transform, integrate, inverse_transform, lp_norm, lp_norm_of, RealField,
};

/// Norms of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRecord {
    pub t: f64,
    /// Exponent of the `lq` column.
    pub q: f64,
    pub l1: f64,
    pub lq: f64,
    pub linf: f64,
    pub mass: f64,
    pub lp_extra: Vec<(f64, f64)>,
}

impl NormRecord {
    /// `‖u‖_p` if recorded.
    pub fn norm(&self, p: f64) -> Option<f64> {
        if p == 1.0 {
            Some(self.l1)
        } else if p.is_infinite() {
            Some(self.linf)
        } else if p == self.q {
            Some(self.lq)
        } else {
            self.lp_extra.iter().find(|(e, _)| *e == p).map(|(_, v)| *v)
        }
    }
}

pub fn record_norms(u: &RealField, t: f64, q: f64, p_list: &[f64]) -> Result<NormRecord> {
    let lp_extra = p_list
        .iter()
        .map(|&p| Ok((p, lp_norm(u, p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormRecord {
        t,
        q,
        l1: lp_norm(u, 1.0)?,
        lq: lp_norm(u, q)?,
        linf: lp_norm(u, f64::INFINITY)?,
        mass: integrate(u),
        lp_extra,
    })
}

/// Which norm of a [`NormRecord`] to fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKey {
    L1,
    Lq,
    Linf,
    Lp(f64),
}

impl NormKey {
    pub fn value(&self, r: &NormRecord) -> Option<f64> {
        match self {
            NormKey::L1 => Some(r.l1),
            NormKey::Lq => Some(r.lq),
            NormKey::Linf => Some(r.linf),
            NormKey::Lp(p) => r.norm(*p),
        }
    }
}

impl fmt::Display for NormKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKey::L1 => write!(f, "l1"),
            NormKey::Lq => write!(f, "lq"),
            NormKey::Linf => write!(f, "linf"),
            NormKey::Lp(p) => write!(f, "l{p}"),
        }
    }
}

impl FromStr for NormKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(NormKey::L1),
            "lq" => Ok(NormKey::Lq),
            "linf" => Ok(NormKey::Linf),
            other => other
                .strip_prefix('l')
                .and_then(|p| p.parse::<f64>().ok())
                .filter(|p| *p >= 1.0)
                .map(NormKey::Lp)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown norm key {s:?}"))),
        }
    }
}

/// Least-squares power law `value ≈ prefactor · t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    /// RMS deviation in natural-log space.
    pub residual: f64,
    pub points: usize,
}

/// Fits a line to `(ln t, ln v)` over `window` (default: the shortest
/// window of samples covering the last decade).
/// Needs at least 8 points spanning a factor of 10.
pub fn fit_power_law(
    times: &[f64],
    values: &[f64],
    window: Option<(f64, f64)>,
) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    let t_max = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-9;
    let (lo, hi) = window.unwrap_or_else(|| {
        let decade = t_max / 10.0;
        let lo = times
            .iter()
            .cloned()
            .filter(|t| *t > 0.0 && *t <= decade * (1.0 + slack))
            .reduce(f64::max)
            .unwrap_or(decade);
        (lo, t_max)
    });
    let selected: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo * (1.0 - slack) && **t <= hi * (1.0 + slack) && **t > 0.0)
        .map(|(t, v)| (*t, *v))
        .collect();
    let span = match (selected.first(), selected.last()) {
        (Some(a), Some(b)) => b.0 / a.0,
        _ => 0.0,
    };
    if selected.len() < 8 || span < 10.0 * (1.0 - slack) {
        return Err(Error::WindowTooNarrow {
            points: selected.len(),
            span,
        });
    }
    if let Some((t, _)) = selected.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonPositiveSeries { t: *t });
    }
    let xs: Vec<f64> = selected.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = selected.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        exponent: slope,
        prefactor: intercept.exp(),
        window: (selected[0].0, selected[selected.len() - 1].0),
        residual,
        points: selected.len(),
    })
}

pub fn fit_decay(
    records: &[NormRecord],
    key: NormKey,
    window: Option<(f64, f64)>,
) -> Result<DecayFit> {
    let mut times = Vec::with_capacity(records.len());
    let mut values = Vec::with_capacity(records.len());
    for r in records {
        let v = key
            .value(r)
            .ok_or_else(|| Error::InvalidParameter(format!("norm {key} not recorded")))?;
        times.push(r.t);
        values.push(v);
    }
    fit_power_law(&times, &values, window)
}

/// Scaled distance to the self-similar profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDistance {
    pub t: f64,
    pub p: f64,
    pub value: f64,
}

/// `(2π)^{n/2} A · D^β G(·, t)`: the profile whose Fourier coefficients are
/// `A |ξ|^β e^{-t|ξ|²}`.
pub fn asymptotic_profile(
    grid: &crate::GridSpec,
    amplitude: f64,
    beta: f64,
    t: f64,
) -> Result<RealField> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let n = grid.dim() as f64;
    let spec = profile_spectral(grid, beta, &MultiIndex::zero(grid.dim()), t);
    let c = amplitude * (2.0 * PI).powf(n / 2.0);
    let coeffs: Vec<Complex64> = spec.coeffs().iter().map(|v| v * c).collect();
    inverse_transform(&crate::SpectralField::new(*grid, coeffs)?)
}

/// `t^{(n/2)(1-1/p)+β/2} ‖u - (2π)^{n/2} A D^βG(·,t)‖_p`.
pub fn profile_distance(
    u: &RealField,
    t: f64,
    amplitude: f64,
    beta: f64,
    p: f64,
) -> Result<ProfileDistance> {
    let profile = asymptotic_profile(u.grid(), amplitude, beta, t)?;
    let d = lp_norm(&u.sub(&profile)?, p)?;
    let value = scale_weight(u.grid().dim(), p, beta, t) * d;
    Ok(ProfileDistance { t, p, value })
}

/// `t^{(n/2)(1-1/p)+β/2}`.
pub fn scale_weight(dim: usize, p: f64, beta: f64, t: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    t.powf(dim as f64 / 2.0 * (1.0 - inv) + beta / 2.0)
}

/// Relative L¹ distance between `u_{t1}(x)` and `λ^{n+β} u_{t2}(λx)`,
/// `λ = √(t2/t1)`.
///
/// When `u2` lives on the same grid the comparison covers the central region
/// `|x_i| < L/λ`; integer `λ` is handled by exact striding, other factors by
/// trigonometric interpolation (one dimension only). When `u2` lives on the
/// box of half width `λL` with the same number of points, node `j` of one
/// grid maps to node `j` of the other and the whole box is compared, which
/// removes the mismatch between periodic images of the two boxes.
pub fn scaling_collapse(
    u1: &RealField,
    u2: &RealField,
    t1: f64,
    t2: f64,
    beta: f64,
) -> Result<f64> {
    let grid = *u1.grid();
    if !(t1 > 0.0 && t2 >= t1) {
        return Err(Error::UnsupportedScale { t1, t2 });
    }
    let lambda = (t2 / t1).sqrt();
    let n = grid.points_per_dim();
    let l = grid.half_width();
    let dim = grid.dim();
    let factor = lambda.powf(dim as f64 + beta);
    let other = *u2.grid();
    let box_scaled = other.dim() == dim
        && other.points_per_dim() == n
        && (other.half_width() - lambda * l).abs() <= 1e-12 * lambda * l;
    if other != grid && !box_scaled {
        return Err(Error::GridMismatch);
    }
    let central = |x: f64| x.abs() < l / lambda * (1.0 - 1e-12);
    let stride = lambda.round();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    if box_scaled && lambda != 1.0 {
        pairs.extend(
            u1.values()
                .iter()
                .zip(u2.values())
                .map(|(a, b)| (*a, factor * b)),
        );
    } else if (lambda - stride).abs() <= 1e-12 * lambda {
        let s = stride as usize;
        let shift = (s - 1) * n / 2;
        for idx in 0..grid.len() {
            let axes = grid.axes(idx);
            let x = grid.point(idx);
            if !x[..dim].iter().all(|&c| central(c)) {
                continue;
            }
            let mut target = [0usize; 2];
            for d in 0..dim {
                target[d] = s * axes[d] - shift;
            }
            pairs.push((u1.values()[idx], factor * u2.values()[grid.flat(target)]));
        }
    } else if dim == 1 {
        let spec = forward_transform(u2);
        for j in 0..n {
            let x = grid.coordinate(j);
            if !central(x) {
                continue;
            }
            let y = lambda * x;
            let mut acc = 0.0;
            for (m, c) in spec.coeffs().iter().enumerate() {
                let xi = grid.wavenumber(m);
                acc += if grid.is_nyquist(m) {
                    c.re * (xi * y).cos()
                } else {
                    (c * Complex64::from_polar(1.0, xi * y)).re
                };
            }
            let value = acc * (2.0 * PI).powf(-0.5) * PI / l;
            pairs.push((u1.values()[j], factor * value));
        }
    } else {
        return Err(Error::UnsupportedScale { t1, t2 });
    }
    let (mut diff, mut a, mut b) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        diff += (x - y).abs();
        a += x.abs();
        b += y.abs();
    }
    let mean = (a + b) / 2.0;
    Ok(if mean == 0.0 { 0.0 } else { diff / mean })
}

/// Running suprema `g(t) = sup_{τ≤t} τ^{β/2}‖u‖₁ + sup_{τ≤t} τ^{(1/2+β/2)/q*}‖u‖_{q*}`.
pub fn g_functional(records: &[NormRecord], beta: f64, q_star: f64) -> Result<Vec<f64>> {
    let (mut s1, mut s2) = (0.0_f64, 0.0_f64);
    let e2 = (0.5 + beta / 2.0) / q_star;
    records
        .iter()
        .map(|r| {
            let lq = if (r.q - q_star).abs() <= 1e-9 {
                r.lq
            } else {
                r.lp_extra
                    .iter()
                    .find(|(p, _)| (p - q_star).abs() <= 1e-9)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!("L^{q_star} norm not recorded"))
                    })?
            };
            s1 = s1.max(r.t.powf(beta / 2.0) * r.l1);
            s2 = s2.max(r.t.powf(e2) * lq);
            Ok(s1 + s2)
        })
        .collect()
}

/// `‖u‖_q^q / (‖u‖_{q*}^{q*} ‖u‖_∞^{q-q*})`, which never exceeds 1.
pub fn holder_interpolation_check(u: &RealField, q: f64, q_star: f64) -> Result<f64> {
    if !(q_star >= 1.0 && q >= q_star) {
        return Err(Error::InvalidQ { q });
    }
    let sup = u.max_abs();
    let lhs: f64 = u.values().iter().map(|v| v.abs().powf(q)).sum();
    let rhs: f64 =
        u.values().iter().map(|v| v.abs().powf(q_star)).sum::<f64>() * sup.powf(q - q_star);
    Ok(if rhs == 0.0 { 0.0 } else { lhs / rhs })
}

/// `‖u - e^{tΔ}u₀‖_p`, `t` being the time elapsed since the datum.
pub fn linearization_distance(u: &RealField, u0: &InitialDatum, t: f64, p: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let linear = heat_semigroup(u0.field(), t)?;
    lp_norm(&u.sub(&linear)?, p)
}

/// `max ‖u(t)‖_∞ t^{n/2} / ‖u₀‖₁` over records with `t ≥ t_lo`.
pub fn carlen_loss_ratio(
    records: &[NormRecord],
    initial_l1: f64,
    dim: usize,
    t_lo: f64,
) -> Result<f64> {
    if !(initial_l1 > 0.0) {
        return Err(Error::InvalidParameter(
            "initial L1 norm must be positive".into(),
        ));
    }
    let mut best = 0.0_f64;
    let mut any = false;
    for r in records.iter().filter(|r| r.t >= t_lo && r.t > 0.0) {
        best = best.max(r.linf * r.t.powf(dim as f64 / 2.0) / initial_l1);
        any = true;
    }
    if !any {
        return Err(Error::InvalidTimeGrid(format!("no records at t >= {t_lo}")));
    }
    Ok(best)
}

/// Direct-sum `L^p` norm helper for callers holding raw samples.
pub fn lp_norm_samples(volume: f64, values: &[f64], p: f64) -> Result<f64> {
    lp_norm_of(volume, values, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{gauss_kernel, self_similar_profile};
    use crate::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(l: f64, n: usize) -> GridSpec {
        GridSpec::line(l, n).unwrap()
    }

    fn random_field(grid: GridSpec, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = grid.half_width();
        let modes: Vec<(f64, f64, f64)> = (1..=8)
            .map(|k| {
                (
                    k as f64 * PI / l,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        RealField::from_fn(grid, |x| {
            modes
                .iter()
                .map(|(k, a, b)| a * (k * x[0]).cos() + b * (k * x[0]).sin())
                .sum()
        })
        .unwrap()
    }

    #[test]
    fn norms_of_gaussian_and_zero() {
        let g = line(40.0, 1024);
        let r = record_norms(&gauss_kernel(&g, 1.0).unwrap(), 1.0, 2.0, &[3.0]).unwrap();
        assert!((r.l1 - 1.0).abs() <= 1e-12);
        assert!((r.linf - (4.0 * PI).powf(-0.5)).abs() <= 1e-14);
        assert!(r.norm(3.0).is_some() && r.norm(4.0).is_none());
        let z = record_norms(&RealField::zeros(g), 0.0, 2.0, &[]).unwrap();
        assert_eq!((z.l1, z.lq, z.linf, z.mass), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn recorded_norms_interpolate() {
        let g = line(10.0, 256);
        for seed in 0..50 {
            let r = record_norms(&random_field(g, seed), 1.0, 2.0, &[]).unwrap();
            assert!(r.lq <= (r.l1 * r.linf).sqrt() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn fit_recovers_synthetic_power_laws() {
        let times: Vec<f64> = (0..30).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        for alpha in [0.1, 0.25, 0.5, 1.0, 1.7, 2.0] {
            let values: Vec<f64> = times.iter().map(|t| 3.0 * t.powf(-alpha)).collect();
            let fit = fit_power_law(&times, &values, Some((1.0, 100.0))).unwrap();
            assert!((fit.exponent + alpha).abs() <= 1e-10);
            assert!((fit.prefactor - 3.0).abs() <= 1e-9);
            assert!(fit.residual <= 1e-10);
        }
    }

    #[test]
    fn default_window_is_last_decade() {
        let times: Vec<f64> = (0..40).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let values: Vec<f64> = times.iter().map(|t| t.powf(-0.5)).collect();
        let fit = fit_power_law(&times, &values, None).unwrap();
        let t_max = times[39];
        assert!((fit.window.0 - t_max / 10.0).abs() <= 1e-9 * t_max);
        assert_eq!(fit.window.1, t_max);
    }

    #[test]
    fn narrow_windows_and_nonpositive_series_are_rejected() {
        let times: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.1).collect();
        let values = vec![1.0; 30];
        assert!(matches!(
            fit_power_law(&times, &values, None),
            Err(Error::WindowTooNarrow { .. })
        ));
        let times: Vec<f64> = (0..30).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let mut values = vec![1.0; 30];
        values[25] = 0.0;
        assert!(matches!(
            fit_power_law(&times, &values, Some((1.0, 1000.0))),
            Err(Error::NonPositiveSeries { .. })
        ));
        assert!(fit_power_law(&times[..5], &values[..5], Some((1.0, 100.0))).is_err());
    }

    #[test]
    fn norm_keys_parse() {
        assert_eq!("l1".parse::<NormKey>().unwrap(), NormKey::L1);
        assert_eq!("l2.5".parse::<NormKey>().unwrap(), NormKey::Lp(2.5));
        assert!("lx".parse::<NormKey>().is_err());
        assert_eq!(NormKey::Lp(3.0).to_string(), "l3");
    }

    #[test]
    fn profile_distance_vanishes_on_the_profile() {
        let g = line(40.0, 1024);
        let a = 0.37;
        let t = 2.0;
        let u = self_similar_profile(&g, 0.5, &MultiIndex::zero(1), t)
            .unwrap()
            .scale(a * (2.0 * PI).sqrt());
        let d = profile_distance(&u, t, a, 0.5, 1.0).unwrap();
        assert!(d.value <= 1e-14);
    }

    #[test]
    fn profile_distance_triangle() {
        let g = line(20.0, 256);
        for seed in 0..20 {
            let u = random_field(g, seed);
            let v = random_field(g, seed + 100);
            let (t, beta, p) = (1.5, 0.5, 2.0);
            let du = profile_distance(&u, t, 0.3, beta, p).unwrap().value;
            let dv = profile_distance(&v, t, 0.3, beta, p).unwrap().value;
            let gap = scale_weight(1, p, beta, t) * lp_norm(&u.sub(&v).unwrap(), p).unwrap();
            assert!(du <= dv + gap + 1e-12);
        }
    }

    #[test]
    fn self_collapse_is_zero() {
        let g = line(40.0, 512);
        let u = random_field(g, 1);
        assert_eq!(scaling_collapse(&u, &u, 3.0, 3.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn collapse_checks_grids() {
        let u = RealField::zeros(line(40.0, 512));
        let v = RealField::zeros(line(40.0, 256));
        assert!(matches!(
            scaling_collapse(&u, &v, 1.0, 4.0, 0.5),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn interpolated_collapse_agrees_with_striding() {
        let g = line(40.0, 512);
        let u1 = gauss_kernel(&g, 1.0).unwrap();
        let u4 = gauss_kernel(&g, 4.0).unwrap();
        let exact = scaling_collapse(&u1, &u4, 1.0, 4.0, 0.0).unwrap();
        assert!(exact <= 1e-12);
        let u2 = gauss_kernel(&g, 2.0).unwrap();
        let interp = scaling_collapse(&u1, &u2, 1.0, 2.0, 0.0).unwrap();
        assert!(interp <= 1e-10, "{interp}");
    }

    #[test]
    fn fractional_profile_collapses_across_scaled_boxes() {
        let beta = 0.5;
        let zero = MultiIndex::zero(1);
        let u1 = self_similar_profile(&line(50.0, 1024), beta, &zero, 1.0).unwrap();
        let u4 = self_similar_profile(&line(100.0, 1024), beta, &zero, 4.0).unwrap();
        let d = scaling_collapse(&u1, &u4, 1.0, 4.0, beta).unwrap();
        assert!(d <= 1e-6, "{d}");
        let same = self_similar_profile(&line(50.0, 1024), beta, &zero, 4.0).unwrap();
        // heavy |x|^{-1-β} tails make same-box images differ
        assert!(scaling_collapse(&u1, &same, 1.0, 4.0, beta).unwrap() > 1e-3);
        let wrong = self_similar_profile(&line(80.0, 1024), beta, &zero, 4.0).unwrap();
        assert!(matches!(
            scaling_collapse(&u1, &wrong, 1.0, 4.0, beta),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn g_functional_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let records: Vec<NormRecord> = (1..50)
            .map(|i| NormRecord {
                t: i as f64,
                q: 1.6,
                l1: rng.gen_range(0.0..1.0),
                lq: rng.gen_range(0.0..1.0),
                linf: 1.0,
                mass: 0.0,
                lp_extra: vec![],
            })
            .collect();
        let g = g_functional(&records, 0.5, 1.6).unwrap();
        assert!(g.windows(2).all(|w| w[1] >= w[0]));
        let zero: Vec<NormRecord> = records
            .iter()
            .map(|r| NormRecord {
                l1: 0.0,
                lq: 0.0,
                ..r.clone()
            })
            .collect();
        assert!(g_functional(&zero, 0.5, 1.6)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        assert!(g_functional(&records, 0.5, 1.7).is_err());
    }

    #[test]
    fn holder_ratio_never_exceeds_one() {
        let g = line(10.0, 256);
        for seed in 0..100 {
            let u = random_field(g, seed);
            let r = holder_interpolation_check(&u, 2.5, 5.0 / 3.0).unwrap();
            assert!(r <= 1.0 + 1e-10, "{r}");
        }
        let bump = RealField::from_fn(g, |x| (-(x[0].powi(8))).exp()).unwrap();
        assert!(holder_interpolation_check(&bump, 3.0, 1.5).unwrap() <= 1.0);
        let gauss = gauss_kernel(&g, 1.0).unwrap().scale(4.0);
        assert!(holder_interpolation_check(&gauss, 2.0, 1.5).unwrap() <= 1.0);
        assert!(holder_interpolation_check(&gauss, 1.2, 1.5).is_err());
    }

    #[test]
    fn carlen_loss_of_heat_kernel() {
        let g = line(40.0, 1024);
        let records: Vec<NormRecord> = [0.5, 1.0, 4.0, 16.0]
            .iter()
            .map(|&t| record_norms(&gauss_kernel(&g, t).unwrap(), t, 2.0, &[]).unwrap())
            .collect();
        let c = carlen_loss_ratio(&records, 1.0, 1, 0.1).unwrap();
        assert!((c - (4.0 * PI).powf(-0.5)).abs() <= 1e-6);
    }
}
