//! Paired evolutions with shared stepping, for stability experiments.

use super::{evolve, SimConfig, Trajectory};
use crate::analysis::scale_weight;
use crate::error::Result;
use crate::initial_data::InitialDatum;
use crate::spectral::lp_norm;

/// Weighted difference norms at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceRecord {
    pub t: f64,
    /// `t^{(n/2)(1-1/q)+β/2}‖u - v‖_q`.
    pub f: f64,
    /// `t^{β/2}‖u - v‖₁`.
    pub weighted_l1: f64,
    pub lq: f64,
    pub l1: f64,
}

#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub u: Trajectory,
    pub v: Trajectory,
    pub differences: Vec<DifferenceRecord>,
}

/// Evolves `u₀` and `v₀` concurrently with identical configuration and
/// records their weighted difference at every sample time.
pub fn pair_evolve(
    u0: &InitialDatum,
    v0: &InitialDatum,
    config: &SimConfig,
) -> Result<PairOutcome> {
    let mut config = config.clone();
    config.store_snapshots = true;
    let (u, v) = rayon::join(
        || evolve(&config, u0, &mut []),
        || evolve(&config, v0, &mut []),
    );
    let (u, v) = (u?, v?);
    let dim = config.grid.dim();
    let differences = u
        .sample_times
        .iter()
        .zip(u.snapshots.iter().zip(&v.snapshots))
        .map(|(&t, (a, b))| {
            let diff = a.sub(b)?;
            let lq = lp_norm(&diff, config.q)?;
            let l1 = lp_norm(&diff, 1.0)?;
            Ok(DifferenceRecord {
                t,
                f: scale_weight(dim, config.q, config.beta, t) * lq,
                weighted_l1: t.powf(config.beta / 2.0) * l1,
                lq,
                l1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairOutcome { u, v, differences })
}
