//! Experiment runner behind the `qwalk` binary: presets, config-file runs,
//! CSV/JSON/SVG emission and run manifests.

pub mod config;
pub mod error;
pub mod presets;
pub mod svg;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qwalk_core::{run_ensemble, EnsembleStats, ExperimentConfig, SeriesStats, Workers};
use serde::{Deserialize, Serialize};

pub use config::{ConfigFile, OutputFormat};
pub use error::CliError;
pub use presets::{Overrides, PRESETS};
pub use svg::{emit_svg, SvgStyle};
pub use table::{Column, SeriesTable};

/// What a run executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RunSource {
    Preset { name: String },
    /// The full config document is kept so the manifest alone can replay it.
    Config { path: String, document: String },
}

/// Provenance of one run, written as `manifest.json` beside the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub source: RunSource,
    pub overrides: Overrides,
    pub experiments: Vec<ExperimentConfig>,
    pub outdir: String,
    /// File names relative to `outdir`, in emission order.
    pub files: Vec<String>,
    pub workers: usize,
    pub seed_derivation: String,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

const SEED_DERIVATION: &str = "realization i uses ChaCha8Rng::seed_from_u64(splitmix64_output(master_seed, i + 1)); \
two unit draws (selector, angle) per disordered slot; u = (next_u64 >> 11) * 2^-53";

struct Emitter {
    outdir: PathBuf,
    files: Vec<String>,
}

impl Emitter {
    fn new(outdir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(outdir).map_err(|e| CliError::io(outdir, e))?;
        Ok(Emitter {
            outdir: outdir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.outdir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn table(&mut self, stem: &str, table: &SeriesTable, svg: bool) -> Result<(), CliError> {
        self.write(&format!("{stem}.csv"), &table.to_csv()?)?;
        if svg {
            self.write(&format!("{stem}.svg"), emit_svg(table, &SvgStyle::default())?.as_bytes())?;
        }
        Ok(())
    }

    fn finish(
        self,
        source: RunSource,
        overrides: Overrides,
        experiments: Vec<ExperimentConfig>,
        workers: Workers,
        started: (SystemTime, Instant),
    ) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            tool: "qwalk".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            source,
            overrides,
            experiments,
            outdir: self.outdir.display().to_string(),
            files: self.files,
            workers: workers.0,
            seed_derivation: SEED_DERIVATION.into(),
            started_unix_seconds: started.0.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            wall_clock_seconds: started.1.elapsed().as_secs_f64(),
        };
        let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
        let path = self.outdir.join(MANIFEST_FILE);
        std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

fn now() -> (SystemTime, Instant) {
    (SystemTime::now(), Instant::now())
}

/// Runs preset `name` and writes its CSVs (and SVGs with `overrides.svg`)
/// plus `manifest.json` into `outdir`.
pub fn run_preset(
    name: &str,
    outdir: &Path,
    overrides: &Overrides,
    workers: Workers,
) -> Result<RunManifest, CliError> {
    let started = now();
    let out = presets::build(name, overrides, workers)?;
    let mut em = Emitter::new(outdir)?;
    for (stem, table) in &out.tables {
        em.table(stem, table, overrides.svg)?;
    }
    em.finish(
        RunSource::Preset { name: name.into() },
        overrides.clone(),
        out.experiments,
        workers,
        started,
    )
}

/// Runs the experiment described by the TOML file at `path`.
pub fn run_config(
    path: &Path,
    outdir: &Path,
    overrides: &Overrides,
    workers: Workers,
) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    run_config_document(&text, &path.display().to_string(), outdir, overrides, workers)
}

pub fn run_config_document(
    text: &str,
    origin: &str,
    outdir: &Path,
    overrides: &Overrides,
    workers: Workers,
) -> Result<RunManifest, CliError> {
    let started = now();
    let mut cfg = ConfigFile::parse(text)?;
    cfg.apply(overrides)?;
    let exp = cfg.experiment()?;
    let stats = run_ensemble::<f64>(&exp, workers)?;
    let mut em = Emitter::new(outdir)?;
    let formats = &cfg.output.formats;
    let svg = formats.contains(&OutputFormat::Svg);

    let series = series_table(&exp, &stats);
    if !series.columns.is_empty() {
        em.table("series", &series, svg)?;
    }
    if let Some(b) = &stats.blp {
        let mut t = SeriesTable::new("scalars", "realizations", vec![stats.realizations as f64], "N").integer_x();
        t.push(Column::with_error("N", vec![b.mean], vec![b.stderr]));
        em.table("scalars", &t, false)?;
    }
    if let Some(d) = &stats.distribution {
        let sites = (-(exp.steps as i64)..=exp.steps as i64).map(|x| x as f64).collect();
        let mut t = SeriesTable::new("distribution", "x", sites, "P(x)").integer_x();
        t.push(Column::with_error("P", d.mean.clone(), d.stderr.clone()));
        em.table("distribution", &t, svg)?;
    }
    if formats.contains(&OutputFormat::Json) {
        let json = serde_json::to_vec_pretty(&stats).map_err(|e| CliError::Runtime(e.to_string()))?;
        em.write("stats.json", &json)?;
    }
    em.finish(
        RunSource::Config {
            path: origin.into(),
            document: text.into(),
        },
        overrides.clone(),
        vec![exp],
        workers,
        started,
    )
}

/// Per-step series of a config run: S, I, sigma, D and the running
/// backflow N, each as mean and standard error.
pub fn series_table(exp: &ExperimentConfig, stats: &EnsembleStats) -> SeriesTable {
    let axis = (0..=exp.steps).map(|t| t as f64).collect();
    let mut t = SeriesTable::new("series", "t", axis, "value").integer_x();
    let named: [(&str, &Option<SeriesStats>); 5] = [
        ("S", &stats.entropy),
        ("I", &stats.coherence),
        ("sigma", &stats.std_dev),
        ("D", &stats.trace_distance),
        ("N", &stats.backflow),
    ];
    for (name, s) in named {
        if let Some(s) = s {
            t.push(Column::with_error(name, s.mean.clone(), s.stderr.clone()));
        }
    }
    t
}

/// Re-executes the run recorded in a manifest into `outdir`.
pub fn replay(manifest_path: &Path, outdir: &Path, workers: Workers) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", manifest_path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", manifest_path.display())))?;
    match &manifest.source {
        RunSource::Preset { name } => run_preset(name, outdir, &manifest.overrides, workers),
        RunSource::Config { path, document } => run_config_document(document, path, outdir, &manifest.overrides, workers),
    }
}
