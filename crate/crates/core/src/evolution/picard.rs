//! Successive substitution on the Duhamel operator
//! `𝒩(u)(t) = e^{tΔ}u₀ - ∫₀ᵗ a·∇e^{(t-τ)Δ}(u|u|^{q-1})(τ) dτ`.

use num_complex::Complex64;

use super::{Rhs, SimConfig};
use crate::analysis::scale_weight;
use crate::error::{Error, Result};
use crate::initial_data::{besov_norm, default_besov_times, InitialDatum};
use crate::operators::advection_symbol;
use crate::spectral::{forward_transform, inverse_unchecked, lp_norm, RealField, SpectralField};

/// Knobs of [`picard_iterate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    pub k_max: usize,
    /// Uniform nodes of the `σ = √(t-τ)` quadrature.
    pub sigma_nodes: usize,
    /// Besov smallness gate; `None` skips it.
    pub epsilon: Option<f64>,
    /// Allows `q ≠ q*`.
    pub waive_balance: bool,
    /// Stop once the X-norm increment falls below this multiple of `‖u⁰‖_X`.
    pub tolerance: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            k_max: 12,
            sigma_nodes: 64,
            epsilon: None,
            waive_balance: false,
            tolerance: 1e-13,
        }
    }
}

/// Contraction bookkeeping of a Picard run.
#[derive(Debug, Clone)]
pub struct PicardReport {
    /// `sup_t t^{(n/2)(1-1/q)+β/2}‖u^{k+1} - u^k‖_q` per iteration.
    pub iterate_norms: Vec<f64>,
    /// Successive quotients of `iterate_norms`.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    pub times: Vec<f64>,
    /// Last iterate at every node of `times`.
    pub solution: Vec<RealField>,
}

/// `t_i = T (i/M)²`, `i = 0..=M`.
pub fn graded_time_grid(horizon: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|i| horizon * (i as f64 / intervals as f64).powi(2))
        .collect()
}

fn lagrange_weights(times: &[f64], tau: f64) -> ([usize; 4], [f64; 4]) {
    let last = times.len() - 1;
    let upper = times.partition_point(|&t| t < tau).clamp(1, last);
    let start = upper.saturating_sub(2).min(last.saturating_sub(3));
    let nodes = [start, start + 1, start + 2, start + 3];
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (tau - times[nodes[b]]) / (times[nodes[a]] - times[nodes[b]]);
            }
        }
    }
    (nodes, w)
}

fn validate_grid(times: &[f64]) -> Result<()> {
    if times.len() < 4 {
        return Err(Error::InvalidTimeGrid("need at least 4 nodes".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidTimeGrid("grid must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidTimeGrid(
            "nodes must increase strictly".into(),
        ));
    }
    Ok(())
}

/// Iterates `u^{k+1} = 𝒩(u^k)` from `u⁰(t) = e^{tΔ}u₀` on `time_grid`.
///
/// The Duhamel integral is evaluated with `τ = t - σ²` on a uniform σ grid
/// (trapezoid rule) and cubic Lagrange interpolation of the flux in time.
pub fn picard_iterate(
    u0: &InitialDatum,
    config: &SimConfig,
    options: &PicardOptions,
    time_grid: &[f64],
) -> Result<PicardReport> {
    validate_grid(time_grid)?;
    if u0.grid() != &config.grid {
        return Err(Error::GridMismatch);
    }
    let grid = config.grid;
    let dim = grid.dim();
    let q_star = crate::critical_exponent(dim, config.beta);
    if !options.waive_balance && (config.q - q_star).abs() > 1e-9 {
        return Err(Error::NotBalanced {
            q: config.q,
            q_star,
        });
    }
    if options.sigma_nodes < 2 {
        return Err(Error::InvalidParameter(
            "sigma_nodes must be at least 2".into(),
        ));
    }
    if let Some(epsilon) = options.epsilon {
        let norm = besov_norm(u0.field(), config.beta, &default_besov_times(&grid))?.value;
        if !(norm < epsilon) {
            return Err(Error::DataTooLarge { norm, epsilon });
        }
    }

    let k2: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let xi = grid.wavevector(idx);
            xi[0] * xi[0] + xi[1] * xi[1]
        })
        .collect();
    let advect: Vec<Complex64> = (0..grid.len())
        .map(|idx| -grid.symbol_at(idx, &|xi: &[f64]| advection_symbol(&config.a, xi)))
        .collect();
    let hat0 = forward_transform(u0.field()).into_coeffs();
    let linear: Vec<Vec<Complex64>> = time_grid
        .iter()
        .map(|&t| {
            hat0.iter()
                .zip(&k2)
                .map(|(c, k)| c * (-t * k).exp())
                .collect()
        })
        .collect();

    let mut rhs = Rhs::new(grid, config.q, &config.a, config.pad_factor, config.flux)?;
    let weights: Vec<f64> = time_grid
        .iter()
        .map(|&t| scale_weight(dim, config.q, config.beta, t))
        .collect();
    let x_norm = |a: &[Vec<Complex64>], b: &[Vec<Complex64>]| -> Result<f64> {
        let mut best = 0.0_f64;
        for i in 1..a.len() {
            let diff: Vec<Complex64> = a[i].iter().zip(&b[i]).map(|(x, y)| x - y).collect();
            let field = inverse_unchecked(&SpectralField::new(grid, diff)?);
            let v = weights[i] * lp_norm(&field, config.q).unwrap_or(f64::INFINITY);
            best = if v.is_nan() {
                f64::INFINITY
            } else {
                best.max(v)
            };
        }
        Ok(best)
    };
    let zero = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; time_grid.len()];
    let base = x_norm(&linear, &zero)?;

    let mut current = linear.clone();
    let mut flux = zero.clone();
    let mut iterate_norms = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    let mut converged = false;
    let s_nodes = options.sigma_nodes;
    for iteration in 0..options.k_max {
        for (f, u) in flux.iter_mut().zip(&current) {
            rhs.flux_only(u, f);
        }
        let mut next = linear.clone();
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (i, &t) in time_grid.iter().enumerate().skip(1) {
            let root = t.sqrt();
            let h = root / (s_nodes - 1) as f64;
            for j in 1..s_nodes {
                let sigma = j as f64 * h;
                let weight = if j + 1 == s_nodes { 0.5 * h } else { h } * 2.0 * sigma;
                let tau = (t - sigma * sigma).max(0.0);
                let (nodes, w) = lagrange_weights(time_grid, tau);
                for (m, a) in acc.iter_mut().enumerate() {
                    let f = flux[nodes[0]][m] * w[0]
                        + flux[nodes[1]][m] * w[1]
                        + flux[nodes[2]][m] * w[2]
                        + flux[nodes[3]][m] * w[3];
                    *a += f * (weight * (-sigma * sigma * k2[m]).exp());
                }
            }
            for ((n, a), m) in next[i].iter_mut().zip(acc.iter_mut()).zip(&advect) {
                *n += *a * m;
                *a = Complex64::new(0.0, 0.0);
            }
        }
        let d = x_norm(&next, &current)?;
        current = next;
        if let Some(prev) = iterate_norms.last() {
            let ratio = if *prev > 0.0 { d / prev } else { f64::INFINITY };
            ratios.push(ratio);
        }
        iterate_norms.push(d);
        log::debug!("picard iteration {iteration}: increment {d:.3e}");
        let n = ratios.len();
        if !d.is_finite() || (n >= 2 && ratios[n - 1] > 1.0 && ratios[n - 2] > 1.0) {
            return Err(Error::NoContraction { iteration, ratios });
        }
        if d <= options.tolerance * base {
            converged = true;
            break;
        }
    }
    if !converged {
        converged = ratios.last().is_some_and(|r| *r <= 0.9);
    }
    let solution = current
        .into_iter()
        .map(|c| SpectralField::new(grid, c).map(|s| inverse_unchecked(&s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PicardReport {
        iterate_norms,
        contraction_ratios: ratios,
        converged,
        times: time_grid.to_vec(),
        solution,
    })
}
