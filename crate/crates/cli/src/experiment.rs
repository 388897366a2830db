//! The experiment suite behind the `zml` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use zml_core::analysis::{
    fit_decay, fit_power_law, g_functional, profile_distance, scaling_collapse, DecayFit, NormKey,
};
use zml_core::evolution::{
    evolve, graded_time_grid, pair_evolve, picard_iterate, FluxKind, Observer, PicardOptions,
    SimConfig,
};
use zml_core::initial_data::{
    besov_norm, compute_a, default_besov_times, make_compact_fractional_bump, make_dipole,
    make_fractional_bump, make_miyakawa, InitialDatum, MiyakawaParams,
};
use zml_core::oracles::{cole_hopf_solution, ColeHopfDatum, QuadratureRule, QuadratureSpec};
use zml_core::spectral::lp_norm;
use zml_core::{critical_exponent, RealField};

use crate::config::{Config, DataKind};
use crate::output::{cell, write_meta, write_plot_script, CsvOut, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Sweep,
    Fit,
    ProfileCompare,
    OracleCheck,
    Picard,
    Stability,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Fit => "fit",
            Command::ProfileCompare => "profile-compare",
            Command::OracleCheck => "oracle-check",
            Command::Picard => "picard",
            Command::Stability => "stability",
        }
    }
}

impl FromStr for Command {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, false).map_err(|e| anyhow!(e))
    }
}

/// One invocation of the front end.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

/// Parses the config, runs the command and writes its artifacts; on failure
/// also writes `error.txt` into the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<()> {
    fs::create_dir_all(&spec.output_dir)
        .with_context(|| format!("creating {}", spec.output_dir.display()))?;
    let result = Config::from_path(&spec.config_path)
        .with_context(|| format!("reading {}", spec.config_path.display()))
        .and_then(|config| dispatch(spec, config));
    if let Err(err) = &result {
        let _ = fs::write(spec.output_dir.join("error.txt"), format!("{err:#}\n"));
    }
    result
}

fn dispatch(spec: &ExperimentSpec, config: Config) -> Result<()> {
    let start = Instant::now();
    let provenance = Provenance {
        command: spec.command.name().to_string(),
        seed: spec.seed,
        config,
    };
    let dir = spec.output_dir.as_path();
    let extra = match spec.command {
        Command::Simulate => simulate(&provenance, dir)?,
        Command::Sweep => sweep(&provenance, dir, spec.threads)?,
        Command::Fit => fit(&provenance, dir, &spec.config_path)?,
        Command::ProfileCompare => profile_compare(&provenance, dir)?,
        Command::OracleCheck => oracle_check(&provenance, dir)?,
        Command::Picard => picard(&provenance, dir)?,
        Command::Stability => stability(&provenance, dir)?,
    };
    write_meta(dir, &provenance, start.elapsed(), &extra)
}

type Report = Vec<(String, String)>;

pub fn build_datum(config: &Config, seed: u64) -> Result<InitialDatum> {
    let grid = config.grid_spec();
    let d = &config.data;
    let beta = config.pde.beta;
    let datum = match d.kind {
        DataKind::FractionalBump => make_fractional_bump(&grid, beta, d.mass, d.width)?,
        DataKind::CompactBump => make_compact_fractional_bump(&grid, beta, d.mass, d.radius)?,
        DataKind::Dipole => make_dipole(&grid, d.axis, d.mass, d.width)?,
        DataKind::Miyakawa => {
            let params = MiyakawaParams::random(grid.dim(), d.radius, seed);
            make_miyakawa(&grid, beta, &params)?.scaled(d.mass)
        }
    };
    Ok(datum)
}

pub fn sim_config(config: &Config) -> SimConfig {
    let r = &config.run;
    let mut c = SimConfig::new(
        config.grid_spec(),
        config.pde.q,
        config.pde.beta,
        config.pde.a.clone(),
        r.horizon,
        r.dt,
    );
    c.t0 = r.t0;
    c.scheme = r.scheme;
    c.pad_factor = r.pad;
    c.sample_count = r.samples;
    c.first_sample = r.first_sample;
    c.window_waiver = r.waiver;
    c.blowup_threshold = r.blowup;
    c.flux = config.pde.flux;
    c.extra_p = config.analysis.extra_p.clone();
    let q_star = critical_exponent(config.grid.dim, config.pde.beta);
    if (c.q - q_star).abs() > 1e-9 && !c.extra_p.iter().any(|p| (p - q_star).abs() <= 1e-9) {
        c.extra_p.push(q_star);
    }
    c
}

fn fit_window(config: &Config) -> Option<(f64, f64)> {
    let a = &config.analysis;
    match (a.fit_lo, a.fit_hi) {
        (None, None) => None,
        (lo, hi) => {
            let hi = hi.unwrap_or(config.run.horizon);
            Some((lo.unwrap_or(hi / 10.0), hi))
        }
    }
}

/// Besov proxy and profile distance at every sample.
struct Diagnostics {
    beta: f64,
    amplitude: Option<f64>,
    besov_times: Vec<f64>,
    rows: Vec<(f64, Option<f64>)>,
}

impl Observer for Diagnostics {
    fn observe(&mut self, t: f64, u: &RealField) -> zml_core::Result<()> {
        let besov = besov_norm(u, self.beta, &self.besov_times)?.value;
        let distance = match self.amplitude {
            Some(a) if t > 0.0 => Some(profile_distance(u, t, a, self.beta, 1.0)?.value),
            _ => None,
        };
        self.rows.push((besov, distance));
        Ok(())
    }
}

pub struct SimulationOutcome {
    pub l1_fit: Option<DecayFit>,
}

fn simulate(provenance: &Provenance, dir: &Path) -> Result<Report> {
    let outcome = run_simulation(provenance, dir)?;
    let mut report = Report::new();
    if let Some(fit) = outcome.l1_fit {
        report.push(("l1_exponent".into(), fit.exponent.to_string()));
        report.push(("l1_residual".into(), fit.residual.to_string()));
    }
    Ok(report)
}

/// Evolves the configured datum and writes `norms.csv`, `fit.csv` and
/// `plot.gp` into `dir`.
pub fn run_simulation(provenance: &Provenance, dir: &Path) -> Result<SimulationOutcome> {
    let config = &provenance.config;
    let datum = build_datum(config, provenance.seed)?;
    let sim = sim_config(config);
    let amplitude = match datum.amplitude() {
        Some(a) => Some(a),
        None => compute_a(&datum, config.pde.beta).ok().map(|e| e.value),
    };
    let mut diagnostics = Diagnostics {
        beta: config.pde.beta,
        amplitude,
        besov_times: default_besov_times(&sim.grid),
        rows: Vec::new(),
    };
    let trajectory = evolve(&sim, &datum, &mut [&mut diagnostics])?;
    let q_star = critical_exponent(config.grid.dim, config.pde.beta);
    let g = g_functional(&trajectory.records, config.pde.beta, q_star)?;

    let mut norms = CsvOut::create(
        &dir.join("norms.csv"),
        provenance,
        &[
            "t",
            "l1",
            "lq",
            "linf",
            "mass",
            "besov_proxy",
            "profile_distance_p1",
            "g_functional",
        ],
    )?;
    for ((r, (besov, distance)), g) in trajectory.records.iter().zip(&diagnostics.rows).zip(&g) {
        norms.row([
            r.t.to_string(),
            r.l1.to_string(),
            r.lq.to_string(),
            r.linf.to_string(),
            r.mass.to_string(),
            besov.to_string(),
            cell(*distance),
            g.to_string(),
        ])?;
    }
    norms.finish()?;

    let window = fit_window(config);
    let mut fits = CsvOut::create(
        &dir.join("fit.csv"),
        provenance,
        &["norm_key", "exponent", "prefactor", "window_lo", "window_hi", "residual"],
    )?;
    let mut l1_fit = None;
    for key in [NormKey::L1, NormKey::Lq, NormKey::Linf] {
        match fit_decay(&trajectory.records, key, window) {
            Ok(fit) => {
                fits.row([
                    key.to_string(),
                    fit.exponent.to_string(),
                    fit.prefactor.to_string(),
                    fit.window.0.to_string(),
                    fit.window.1.to_string(),
                    fit.residual.to_string(),
                ])?;
                if key == NormKey::L1 {
                    l1_fit = Some(fit);
                }
            }
            Err(err) => log::warn!("no {key} fit: {err}"),
        }
    }
    fits.finish()?;
    write_plot_script(dir, provenance)?;
    Ok(SimulationOutcome { l1_fit })
}

fn sweep(provenance: &Provenance, dir: &Path, threads: usize) -> Result<Report> {
    let base = &provenance.config;
    let points: Vec<(f64, f64)> = base
        .analysis
        .sweep_q
        .iter()
        .flat_map(|&q| base.analysis.sweep_beta.iter().map(move |&b| (q, b)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?;
    let results: Vec<Result<SimulationOutcome>> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, &(q, beta))| {
                let mut config = base.clone();
                config.pde.q = q;
                config.pde.beta = beta;
                config.analysis.sweep_q.clear();
                config.analysis.sweep_beta.clear();
                let run_dir = dir.join(format!("run_{index:03}"));
                fs::create_dir_all(&run_dir)?;
                let child = Provenance {
                    command: "simulate".into(),
                    seed: provenance.seed + index as u64,
                    config,
                };
                let start = Instant::now();
                let outcome = run_simulation(&child, &run_dir);
                if let Err(err) = &outcome {
                    fs::write(run_dir.join("error.txt"), format!("{err:#}\n"))?;
                }
                write_meta(&run_dir, &child, start.elapsed(), &[])?;
                outcome
            })
            .collect()
    });

    let mut summary = CsvOut::create(
        &dir.join("summary.csv"),
        provenance,
        &["index", "q", "beta", "seed", "status", "l1_exponent", "residual", "message"],
    )?;
    let mut failures = 0usize;
    for (index, ((q, beta), result)) in points.iter().zip(&results).enumerate() {
        let seed = (provenance.seed + index as u64).to_string();
        let (status, exponent, residual, message) = match result {
            Ok(SimulationOutcome { l1_fit: Some(fit) }) => (
                "ok",
                fit.exponent.to_string(),
                fit.residual.to_string(),
                String::new(),
            ),
            Ok(SimulationOutcome { l1_fit: None }) => {
                ("ok", String::new(), String::new(), "no L1 fit".to_string())
            }
            Err(err) => {
                failures += 1;
                ("failed", String::new(), String::new(), format!("{err:#}"))
            }
        };
        summary.row([
            index.to_string(),
            q.to_string(),
            beta.to_string(),
            seed,
            status.to_string(),
            exponent,
            residual,
            message,
        ])?;
    }
    summary.finish()?;
    Ok(vec![
        ("runs".into(), points.len().to_string()),
        ("failures".into(), failures.to_string()),
    ])
}

fn fit(provenance: &Provenance, dir: &Path, config_path: &Path) -> Result<Report> {
    let config = &provenance.config;
    let input = config
        .analysis
        .input
        .as_ref()
        .ok_or_else(|| anyhow!("fit needs `input` in [analysis]"))?;
    let input = if input.is_relative() {
        config_path.parent().unwrap_or(Path::new(".")).join(input)
    } else {
        input.clone()
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&input)
        .with_context(|| format!("reading {}", input.display()))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no `{name}` column", input.display()))
    };
    let keys = ["l1", "lq", "linf"];
    let t_col = column("t")?;
    let cols = keys.iter().map(|k| column(k)).collect::<Result<Vec<_>>>()?;
    let mut times = Vec::new();
    let mut series = vec![Vec::new(); keys.len()];
    for record in reader.records() {
        let record = record?;
        times.push(record[t_col].parse::<f64>()?);
        for (s, &c) in series.iter_mut().zip(&cols) {
            s.push(record[c].parse::<f64>()?);
        }
    }
    let window = fit_window(config);
    let mut out = CsvOut::create(
        &dir.join("fit.csv"),
        provenance,
        &["norm_key", "exponent", "prefactor", "window_lo", "window_hi", "residual"],
    )?;
    for (key, values) in keys.iter().zip(&series) {
        let f = fit_power_law(&times, values, window)?;
        out.row([
            key.to_string(),
            f.exponent.to_string(),
            f.prefactor.to_string(),
            f.window.0.to_string(),
            f.window.1.to_string(),
            f.residual.to_string(),
        ])?;
    }
    out.finish()?;
    Ok(vec![("input".into(), input.display().to_string())])
}

fn profile_compare(provenance: &Provenance, dir: &Path) -> Result<Report> {
    let config = &provenance.config;
    let datum = build_datum(config, provenance.seed)?;
    let mut sim = sim_config(config);
    sim.store_snapshots = true;
    let amplitude = match datum.amplitude() {
        Some(a) => a,
        None => compute_a(&datum, config.pde.beta)?.value,
    };
    let trajectory = evolve(&sim, &datum, &mut [])?;
    let beta = config.pde.beta;
    let mut profile = CsvOut::create(
        &dir.join("profile.csv"),
        provenance,
        &["t", "distance_p1", "distance_p2", "distance_pinf"],
    )?;
    for (&t, u) in trajectory.sample_times.iter().zip(&trajectory.snapshots) {
        if t <= 0.0 {
            continue;
        }
        let d = |p: f64| profile_distance(u, t, amplitude, beta, p).map(|d| d.value);
        profile.row([
            t.to_string(),
            d(1.0)?.to_string(),
            d(2.0)?.to_string(),
            d(f64::INFINITY)?.to_string(),
        ])?;
    }
    profile.finish()?;

    let (t_end, u_end) = (
        *trajectory.sample_times.last().unwrap(),
        trajectory.snapshots.last().unwrap(),
    );
    let mut collapse = CsvOut::create(
        &dir.join("collapse.csv"),
        provenance,
        &["t1", "t2", "lambda", "distance"],
    )?;
    for (&t, u) in trajectory.sample_times.iter().zip(&trajectory.snapshots) {
        if t <= 0.0 || t >= t_end || t_end / t > 16.0 {
            continue;
        }
        let value = scaling_collapse(u, u_end, t, t_end, beta).ok();
        collapse.row([
            t.to_string(),
            t_end.to_string(),
            (t_end / t).sqrt().to_string(),
            cell(value),
        ])?;
    }
    collapse.finish()?;
    Ok(vec![("amplitude".into(), amplitude.to_string())])
}

fn oracle_check(provenance: &Provenance, dir: &Path) -> Result<Report> {
    let config = &provenance.config;
    if config.grid.dim != 1 || config.pde.q != 2.0 {
        bail!("oracle-check compares against viscous Burgers: needs n = 1 and q = 2");
    }
    let datum = build_datum(config, provenance.seed)?;
    let mut sim = sim_config(config);
    sim.flux = FluxKind::Power;
    sim.sample_count = 2;
    sim.first_sample = Some((sim.t0 + config.run.horizon) / 2.0);
    let trajectory = evolve(&sim, &datum, &mut [])?;
    let t = config.run.horizon;
    let grid = sim.grid;
    let a = config.pde.a[0];
    let support = grid.half_width() / 2.0;
    let oracle_datum = ColeHopfDatum::from_field(datum.field(), a, support)?;
    let quadrature = QuadratureSpec::new(
        config.analysis.oracle_nodes,
        QuadratureRule::TrapezoidRefined,
        support,
    )?;
    let xs: Vec<f64> = (0..grid.len()).map(|j| grid.coordinate(j)).collect();
    let exact = cole_hopf_solution(&oracle_datum, t, &xs, &quadrature)?;
    let scale = exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let error = trajectory
        .final_field
        .values()
        .iter()
        .zip(&exact)
        .fold(0.0_f64, |m, (u, e)| m.max((u - e).abs()));
    let relative = error / scale;
    let mut out = CsvOut::create(
        &dir.join("oracle.csv"),
        provenance,
        &["t", "max_abs_error", "max_rel_error", "tolerance", "pass"],
    )?;
    let pass = relative <= config.analysis.oracle_tolerance;
    out.row([
        t.to_string(),
        error.to_string(),
        relative.to_string(),
        config.analysis.oracle_tolerance.to_string(),
        pass.to_string(),
    ])?;
    out.finish()?;
    if !pass {
        bail!(
            "Cole-Hopf oracle gate failed: relative L-infinity error {relative:e} > {:e}",
            config.analysis.oracle_tolerance
        );
    }
    Ok(vec![("max_rel_error".into(), relative.to_string())])
}

fn picard(provenance: &Provenance, dir: &Path) -> Result<Report> {
    let config = &provenance.config;
    let datum = build_datum(config, provenance.seed)?;
    let sim = sim_config(config);
    let a = &config.analysis;
    let options = PicardOptions {
        k_max: a.picard_kmax,
        sigma_nodes: a.picard_sigma,
        epsilon: a.picard_epsilon,
        waive_balance: a.waive_balance,
        ..PicardOptions::default()
    };
    let times = graded_time_grid(config.run.horizon, a.picard_intervals);
    let report = picard_iterate(&datum, &sim, &options, &times)?;
    let mut out = CsvOut::create(
        &dir.join("picard.csv"),
        provenance,
        &["iteration", "iterate_norm", "contraction_ratio"],
    )?;
    for (k, norm) in report.iterate_norms.iter().enumerate() {
        let ratio = if k == 0 {
            None
        } else {
            report.contraction_ratios.get(k - 1).copied()
        };
        out.row([(k + 1).to_string(), norm.to_string(), cell(ratio)])?;
    }
    out.finish()?;

    let evolved = evolve(&sim, &datum, &mut [])?;
    let fixed_point = report.solution.last().unwrap();
    let diff = lp_norm(&fixed_point.sub(&evolved.final_field)?, 1.0)?;
    let agreement = diff / lp_norm(&evolved.final_field, 1.0)?;
    Ok(vec![
        ("converged".into(), report.converged.to_string()),
        ("evolve_agreement_l1".into(), agreement.to_string()),
    ])
}

fn stability(provenance: &Provenance, dir: &Path) -> Result<Report> {
    let config = &provenance.config;
    let u0 = build_datum(config, provenance.seed)?;
    let sim = sim_config(config);
    let grid = sim.grid;
    let width = config.data.width.min(grid.half_width() / 8.0);
    let dipole = make_dipole(&grid, 0, config.analysis.perturbation, width)?;
    let v0 = u0.superpose(&dipole)?;
    let mut report = Report::new();
    let mut runs = vec![("stability.csv", v0)];
    if config.analysis.control {
        runs.push(("stability_control.csv", u0.scaled(2.0)));
    }
    for (name, v0) in runs {
        let outcome = pair_evolve(&u0, &v0, &sim)?;
        let mut out = CsvOut::create(
            &dir.join(name),
            provenance,
            &["t", "f", "weighted_l1", "lq", "l1"],
        )?;
        for d in &outcome.differences {
            out.row([
                d.t.to_string(),
                d.f.to_string(),
                d.weighted_l1.to_string(),
                d.lq.to_string(),
                d.l1.to_string(),
            ])?;
        }
        out.finish()?;
        let positive: Vec<_> = outcome.differences.iter().filter(|d| d.t > 0.0).collect();
        if let (Some(first), Some(last)) = (positive.first(), positive.last()) {
            report.push((
                format!("{}_decrease_factor", name.trim_end_matches(".csv")),
                (first.f / last.f).to_string(),
            ));
        }
    }
    Ok(report)
}
