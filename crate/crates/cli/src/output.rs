//! CSV, metadata and plot-script emission.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};

use crate::config::Config;

/// Reproducibility header shared by every artifact of a run.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config: Config,
}

impl Provenance {
    /// `# `-prefixed lines: command, seed, version and the normalized config.
    pub fn comment_block(&self) -> String {
        let mut s = format!(
            "# zml {} {}\n# seed = {}\n",
            self.command,
            env!("CARGO_PKG_VERSION"),
            self.seed
        );
        for line in self.config.dump().lines().filter(|l| !l.is_empty()) {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

/// A CSV file that starts with the provenance block and a header row.
pub struct CsvOut {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, provenance: &Provenance, header: &[&str]) -> Result<Self> {
        let mut file = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        file.write_all(provenance.comment_block().as_bytes())?;
        let mut writer = csv::WriterBuilder::new().from_writer(file);
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, cells: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal, or an empty cell.
pub fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_meta(
    dir: &Path,
    provenance: &Provenance,
    wall: Duration,
    extra: &[(String, String)],
) -> Result<()> {
    let mut s = String::new();
    s.push_str(&format!("command: {}\n", provenance.command));
    s.push_str(&format!("version: {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("seed: {}\n", provenance.seed));
    s.push_str(&format!("wall_time_s: {:.3}\n", wall.as_secs_f64()));
    for (k, v) in extra {
        s.push_str(&format!("{k}: {v}\n"));
    }
    let mut section = String::new();
    for line in provenance.config.dump().lines() {
        let line = line.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.to_string();
        } else if let Some((k, v)) = line.split_once('=') {
            s.push_str(&format!("config.{section}.{}: {}\n", k.trim(), v.trim()));
        }
    }
    fs::write(dir.join("meta.txt"), s)?;
    Ok(())
}

/// Gnuplot script drawing the norm histories and fitted exponents.
pub fn write_plot_script(dir: &Path, provenance: &Provenance) -> Result<()> {
    let script = format!(
        "{}\
set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set logscale xy
set xlabel 't'
set ylabel 'norm'
set terminal pngcairo size 900,600
set output 'norms.png'
plot 'norms.csv' using 1:2 with linespoints title 'L1', \\
     'norms.csv' using 1:3 with linespoints title 'Lq', \\
     'norms.csv' using 1:4 with linespoints title 'Linf', \\
     'norms.csv' using 1:7 with lines title 'profile distance'
",
        provenance.comment_block()
    );
    fs::write(dir.join("plot.gp"), script)?;
    Ok(())
}
