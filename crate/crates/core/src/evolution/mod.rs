//! Time integration of the mild formulation
//! `u(t) = e^{tΔ}u₀ - ∫₀ᵗ a·∇e^{(t-τ)Δ}(u|u|^{q-1})(τ) dτ`.
//!
//! The linear part is propagated exactly; the flux is treated with a
//! fourth-order integrating-factor Runge–Kutta scheme or with second-order
//! exponential time differencing.

mod pair;
mod picard;

pub use pair::{pair_evolve, DifferenceRecord, PairOutcome};
pub use picard::{graded_time_grid, picard_iterate, PicardOptions, PicardReport};

use num_complex::Complex64;

use crate::analysis::{record_norms, NormRecord};
use crate::error::{Error, Result};
use crate::initial_data::{log_times, InitialDatum};
use crate::operators::advection_symbol;
use crate::spectral::{
    forward_transform, inverse_unchecked, Dealiaser, GridSpec, RealField, SpectralField,
};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Ifrk4,
    Etdrk2,
}

/// Pointwise form of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// `u|u|^{q-1}`, evaluated as `sign(u)|u|^q`.
    OddPower,
    /// `u^q` for integer `q`; `q = 2` gives viscous Burgers.
    Power,
}

impl FluxKind {
    pub fn eval(&self, q: f64, u: f64) -> f64 {
        match self {
            FluxKind::OddPower => u.signum() * u.abs().powf(q),
            FluxKind::Power => u.powi(q as i32),
        }
    }
}

/// Full specification of one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub q: f64,
    pub beta: f64,
    pub a: Vec<f64>,
    pub grid: GridSpec,
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub pad_factor: usize,
    /// Defaults to `1e6·‖u₀‖_∞` when unset.
    pub blowup_threshold: Option<f64>,
    pub flux: FluxKind,
    /// Allows `√T > L/4`.
    pub window_waiver: bool,
    /// Number of log-spaced sample times after the initial one.
    pub sample_count: usize,
    /// First log-spaced sample; defaults to `t0`, or `T/1000` when `t0 = 0`.
    pub first_sample: Option<f64>,
    pub store_snapshots: bool,
    /// Extra Lebesgue exponents recorded at every sample.
    pub extra_p: Vec<f64>,
}

impl SimConfig {
    /// IFRK4 with padding 2, 40 samples and the odd-power flux.
    pub fn new(grid: GridSpec, q: f64, beta: f64, a: Vec<f64>, horizon: f64, dt: f64) -> Self {
        Self {
            q,
            beta,
            a,
            grid,
            t0: 0.0,
            horizon,
            dt,
            scheme: Scheme::Ifrk4,
            pad_factor: 2,
            blowup_threshold: None,
            flux: FluxKind::OddPower,
            window_waiver: false,
            sample_count: 40,
            first_sample: None,
            store_snapshots: false,
            extra_p: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(Error::InvalidQ { q: self.q });
        }
        if self.flux == FluxKind::Power && self.q.fract() != 0.0 {
            return Err(Error::InvalidQ { q: self.q });
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidBeta { beta: self.beta });
        }
        if self.a.len() != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                got: self.a.len(),
            });
        }
        if self.a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "convection vector must be finite".into(),
            ));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(Error::NegativeTime { t: self.t0 });
        }
        if !(self.horizon > self.t0 && self.horizon.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!(
                "horizon {} must exceed t0 = {}",
                self.horizon, self.t0
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::NonPositiveTime { t: self.dt });
        }
        if self.pad_factor < 2 {
            return Err(Error::InvalidPadFactor(self.pad_factor));
        }
        if !self.window_waiver && !self.grid.within_window(self.horizon) {
            return Err(Error::InvalidTimeGrid(format!(
                "horizon {} exceeds (L/4)^2 = {} without waiver",
                self.horizon,
                self.grid.validity_horizon()
            )));
        }
        if let Some(first) = self.first_sample {
            if !(first >= self.t0 && first < self.horizon) {
                return Err(Error::InvalidTimeGrid(format!("first sample {first}")));
            }
        }
        if self.extra_p.iter().any(|p| !(*p >= 1.0)) {
            return Err(Error::InvalidParameter(
                "extra exponents must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// `[t0]` followed by `sample_count` log-spaced times ending at `T`.
    pub fn sample_times(&self) -> Vec<f64> {
        let first = self.first_sample.unwrap_or(if self.t0 > 0.0 {
            self.t0
        } else {
            self.horizon * 1e-3
        });
        let mut times = vec![self.t0];
        if self.sample_count > 0 {
            for t in log_times(
                first.max(f64::MIN_POSITIVE),
                self.horizon,
                self.sample_count,
            ) {
                if t > *times.last().unwrap() {
                    times.push(t);
                }
            }
        }
        times
    }

    /// Advective step guidance `0.5 h / (q ‖a‖ max|u₀|^{q-1})`.
    pub fn dt_max(&self, u0_sup: f64) -> f64 {
        let speed =
            self.q * self.a.iter().map(|v| v * v).sum::<f64>().sqrt() * u0_sup.powf(self.q - 1.0);
        if speed == 0.0 {
            f64::INFINITY
        } else {
            0.5 * self.grid.spacing() / speed
        }
    }
}

/// Called at every sample time.
pub trait Observer {
    fn observe(&mut self, t: f64, u: &RealField) -> Result<()>;
}

/// Recorded output of one evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    pub sample_times: Vec<f64>,
    pub snapshots: Vec<RealField>,
    pub records: Vec<NormRecord>,
    pub final_field: RealField,
    pub steps: usize,
    pub cfl_exceeded: bool,
}

/// `a·∇(f|f|^{q-1})`, with the power evaluated on a grid padded by `pad`.
pub fn nonlinear_flux_divergence(
    f: &RealField,
    q: f64,
    a: &[f64],
    pad: usize,
) -> Result<RealField> {
    flux_divergence_with(f, q, a, pad, FluxKind::OddPower)
}

/// As [`nonlinear_flux_divergence`] with an explicit flux form.
pub fn flux_divergence_with(
    f: &RealField,
    q: f64,
    a: &[f64],
    pad: usize,
    flux: FluxKind,
) -> Result<RealField> {
    if !(q > 1.0) {
        return Err(Error::InvalidQ { q });
    }
    let grid = *f.grid();
    if a.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: a.len(),
        });
    }
    let mut rhs = Rhs::new(grid, q, a, pad, flux)?;
    let spec = forward_transform(f);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    rhs.eval(spec.coeffs(), &mut out);
    // rhs is -a·∇F; flip the sign back
    out.iter_mut().for_each(|c| *c = -*c);
    RealField::new(
        grid,
        inverse_unchecked(&SpectralField::new(grid, out)?).into_values(),
    )
}

/// Spectral right-hand side `N(û) = -(i a·ξ) F̂(u)`.
pub(crate) struct Rhs {
    q: f64,
    flux: FluxKind,
    advect: Vec<Complex64>,
    dealiaser: Dealiaser,
    scratch: Vec<Complex64>,
    pub(crate) last_sup: f64,
}

impl Rhs {
    pub(crate) fn new(
        grid: GridSpec,
        q: f64,
        a: &[f64],
        pad: usize,
        flux: FluxKind,
    ) -> Result<Self> {
        let advect = (0..grid.len())
            .map(|idx| -grid.symbol_at(idx, &|xi: &[f64]| advection_symbol(a, xi)))
            .collect();
        Ok(Self {
            q,
            flux,
            advect,
            dealiaser: Dealiaser::new(grid, pad)?,
            scratch: vec![Complex64::new(0.0, 0.0); grid.len()],
            last_sup: 0.0,
        })
    }

    /// Writes `N(û)` into `out`.
    pub(crate) fn eval(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        let (q, flux) = (self.q, self.flux);
        self.last_sup = self
            .dealiaser
            .apply(u, |v| flux.eval(q, v), &mut self.scratch);
        for ((o, s), m) in out.iter_mut().zip(&self.scratch).zip(&self.advect) {
            *o = s * m;
        }
    }

    /// Writes the dealiased `F̂(u)` (without the divergence) into `out`.
    pub(crate) fn flux_only(&mut self, u: &[Complex64], out: &mut [Complex64]) -> f64 {
        let (q, flux) = (self.q, self.flux);
        self.dealiaser.apply(u, |v| flux.eval(q, v), out)
    }
}

/// Exponential-integrator stepper over spectral coefficients.
pub(crate) struct Stepper {
    scheme: Scheme,
    k2: Vec<f64>,
    rhs: Rhs,
    cached_dt: f64,
    half: Vec<f64>,
    full: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
    stages: [Vec<Complex64>; 5],
}

fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

impl Stepper {
    pub(crate) fn new(config: &SimConfig) -> Result<Self> {
        let grid = config.grid;
        let k2 = (0..grid.len())
            .map(|idx| {
                let xi = grid.wavevector(idx);
                xi[0] * xi[0] + xi[1] * xi[1]
            })
            .collect();
        let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
        Ok(Self {
            scheme: config.scheme,
            k2,
            rhs: Rhs::new(grid, config.q, &config.a, config.pad_factor, config.flux)?,
            cached_dt: f64::NAN,
            half: Vec::new(),
            full: Vec::new(),
            phi1: Vec::new(),
            phi2: Vec::new(),
            stages: [zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero],
        })
    }

    fn prepare(&mut self, dt: f64) {
        if dt == self.cached_dt {
            return;
        }
        self.cached_dt = dt;
        self.half = self.k2.iter().map(|k| (-0.5 * dt * k).exp()).collect();
        self.full = self.k2.iter().map(|k| (-dt * k).exp()).collect();
        if self.scheme == Scheme::Etdrk2 {
            self.phi1 = self.k2.iter().map(|k| phi1(-dt * k)).collect();
            self.phi2 = self.k2.iter().map(|k| phi2(-dt * k)).collect();
        }
    }

    /// Advances `u` by `dt`; returns the largest `|u|` seen on the padded grid.
    pub(crate) fn step(&mut self, u: &mut [Complex64], dt: f64) -> f64 {
        self.prepare(dt);
        match self.scheme {
            Scheme::Ifrk4 => self.ifrk4(u, dt),
            Scheme::Etdrk2 => self.etdrk2(u, dt),
        }
    }

    fn ifrk4(&mut self, u: &mut [Complex64], dt: f64) -> f64 {
        let [k1, k2, k3, k4, w] = &mut self.stages;
        let (e, e2) = (&self.half, &self.full);
        self.rhs.eval(u, k1);
        let sup = self.rhs.last_sup;
        for i in 0..u.len() {
            w[i] = e[i] * (u[i] + 0.5 * dt * k1[i]);
        }
        self.rhs.eval(w, k2);
        for i in 0..u.len() {
            w[i] = e[i] * u[i] + 0.5 * dt * k2[i];
        }
        self.rhs.eval(w, k3);
        for i in 0..u.len() {
            w[i] = e2[i] * u[i] + dt * e[i] * k3[i];
        }
        self.rhs.eval(w, k4);
        for i in 0..u.len() {
            u[i] = e2[i] * u[i] + dt / 6.0 * (e2[i] * k1[i] + 2.0 * e[i] * (k2[i] + k3[i]) + k4[i]);
        }
        sup
    }

    fn etdrk2(&mut self, u: &mut [Complex64], dt: f64) -> f64 {
        let [n0, n1, w, _, _] = &mut self.stages;
        self.rhs.eval(u, n0);
        let sup = self.rhs.last_sup;
        for i in 0..u.len() {
            w[i] = self.full[i] * u[i] + dt * self.phi1[i] * n0[i];
        }
        self.rhs.eval(w, n1);
        for i in 0..u.len() {
            u[i] = w[i] + dt * self.phi2[i] * (n1[i] - n0[i]);
        }
        sup
    }
}

/// Integrates the equation from `u₀` at `t0` to `T`, recording norms (and
/// optionally snapshots) at the sample times and invoking every observer
/// there.
pub fn evolve(
    config: &SimConfig,
    u0: &InitialDatum,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    config.validate()?;
    if u0.grid() != &config.grid {
        return Err(Error::GridMismatch);
    }
    let u0_sup = u0.field().max_abs();
    let threshold = config.blowup_threshold.unwrap_or(1e6 * u0_sup);
    let dt_max = config.dt_max(u0_sup);
    let cfl_exceeded = config.dt > dt_max;
    if cfl_exceeded {
        log::warn!("dt = {} exceeds advective guidance {dt_max:.3e}", config.dt);
    }
    let grid = config.grid;
    let times = config.sample_times();
    let mut stepper = Stepper::new(config)?;
    let mut u = forward_transform(u0.field()).into_coeffs();
    let mut records = Vec::with_capacity(times.len());
    let mut snapshots = Vec::new();
    let mut t = config.t0;
    let mut steps = 0usize;
    let mut current = u0.field().clone();

    for (k, &target) in times.iter().enumerate() {
        if k > 0 {
            while t < target {
                let remaining = target - t;
                let h = if remaining <= config.dt * (1.0 + 1e-9) {
                    remaining
                } else {
                    config.dt
                };
                let sup = stepper.step(&mut u, h);
                steps += 1;
                t = if h == remaining { target } else { t + h };
                if !(sup <= threshold) {
                    return Err(Error::Blowup { t, sup });
                }
            }
            current = inverse_unchecked(&SpectralField::new(grid, u.clone())?);
            let sup = current.max_abs();
            if !(sup <= threshold) || current.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::Blowup { t, sup });
            }
        }
        records.push(record_norms(&current, target, config.q, &config.extra_p)?);
        for obs in observers.iter_mut() {
            obs.observe(target, &current)?;
        }
        if config.store_snapshots {
            snapshots.push(current.clone());
        }
    }
    Ok(Trajectory {
        config: config.clone(),
        sample_times: times,
        snapshots,
        records,
        final_field: current,
        steps,
        cfl_exceeded,
    })
}
