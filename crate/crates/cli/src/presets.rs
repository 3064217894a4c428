//! Canned experiments behind `qwalk run <preset>`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use qwalk_core::{
    run_ensemble, strength_grid, sweep, theta_grid, DisorderConfig, DisorderKind, EnsembleStats,
    ExperimentConfig, MeasureKind, SeriesStats, Workers,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::table::{Column, SeriesTable};

pub const DEFAULT_STEPS: usize = 200;
pub const DEFAULT_REALIZATIONS: usize = 1000;
pub const DEFAULT_SEED: u64 = 0;

pub const PRESETS: [(&str, &str); 8] = [
    ("fig1a", "ordered walk: S(t), I(t) for psi(pi/4, 0) and D(t) for psi(±pi/4, 0)"),
    ("fig1b", "ordered walk: S(t), I(t) for psi(pi/4, pi/2) and D(t) for psi(±pi/4, pi/2)"),
    ("fig2", "ordered walk: backflow N and coherence I at the last step versus theta"),
    ("fig3a", "running backflow N(t), ordered vs temporal vs spatial disorder, pair psi(±pi/4, 0)"),
    ("fig3b", "running backflow N(t), ordered vs temporal vs spatial disorder, pair psi(±pi/4, pi/2)"),
    ("fig4", "position spread and backflow at the last step versus disorder strength"),
    ("fig5", "coin-position entropy at the last step versus disorder strength"),
    ("pdist", "final position distributions at strengths 0.5 and 1.0 plus coin-angle histograms"),
];

/// Command-line overrides. Worker count is deliberately absent: it never
/// changes results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
    pub theta: Option<f64>,
    pub strength: Option<f64>,
    #[serde(default)]
    pub svg: bool,
}

impl Overrides {
    /// Range checks shared by presets and config runs.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |flag: &str, why: &str| Err(CliError::Usage(format!("invalid {flag}: {why}")));
        if self.steps == Some(0) {
            return bad("--steps", "must be at least 1");
        }
        if self.realizations == Some(0) {
            return bad("--realizations", "must be at least 1");
        }
        if let Some(th) = self.theta {
            if !(0.0..=FRAC_PI_2).contains(&th) {
                return bad("--theta", "must lie in [0, pi/2]");
            }
        }
        if let Some(p) = self.strength {
            if !(0.0..=1.0).contains(&p) {
                return bad("--strength", "must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

/// Tables to write, keyed by file stem, and the configs that produced them.
#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub experiments: Vec<ExperimentConfig>,
    pub tables: Vec<(String, SeriesTable)>,
}

struct Ctx {
    steps: usize,
    realizations: usize,
    seed: u64,
    theta: f64,
    workers: Workers,
}

impl Ctx {
    fn config(&self, kind: DisorderKind, strength: f64, eta: f64, measures: &[MeasureKind]) -> ExperimentConfig {
        let disorder = DisorderConfig {
            base_theta: self.theta,
            ..DisorderConfig::new(kind, strength)
        };
        let deterministic = kind == DisorderKind::None;
        ExperimentConfig {
            steps: self.steps,
            realizations: if deterministic { 1 } else { self.realizations },
            master_seed: self.seed,
            measures: measures.iter().copied().collect(),
            ..ExperimentConfig::new(disorder).with_eta(eta)
        }
    }

    fn steps_axis(&self) -> Vec<f64> {
        (0..=self.steps).map(|t| t as f64).collect()
    }
}

fn missing(what: &str) -> CliError {
    CliError::Runtime(format!("ensemble did not record {what}"))
}

fn series(s: &Option<SeriesStats>, what: &str) -> Result<SeriesStats, CliError> {
    s.clone().ok_or_else(|| missing(what))
}

pub fn is_preset(name: &str) -> bool {
    PRESETS.iter().any(|(n, _)| *n == name)
}

fn reject(name: &str, flag: &str) -> CliError {
    CliError::Usage(format!("preset `{name}` does not accept {flag}"))
}

/// Runs preset `name` with `overrides`.
pub fn build(name: &str, overrides: &Overrides, workers: Workers) -> Result<PresetOutput, CliError> {
    if !is_preset(name) {
        let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        return Err(CliError::Usage(format!(
            "unknown preset `{name}` (known: {})",
            known.join(", ")
        )));
    }
    match name {
        "fig2" if overrides.theta.is_some() => return Err(reject(name, "--theta")),
        "fig1a" | "fig1b" | "fig2" | "fig4" | "fig5" if overrides.strength.is_some() => {
            return Err(reject(name, "--strength"))
        }
        _ => {}
    }
    overrides.validate()?;
    let ctx = Ctx {
        steps: overrides.steps.unwrap_or(DEFAULT_STEPS),
        realizations: overrides.realizations.unwrap_or(DEFAULT_REALIZATIONS),
        seed: overrides.seed.unwrap_or(DEFAULT_SEED),
        theta: overrides.theta.unwrap_or(FRAC_PI_4),
        workers,
    };
    let strength = overrides.strength;
    match name {
        "fig1a" => fig1(&ctx, "fig1a", 0.0),
        "fig1b" => fig1(&ctx, "fig1b", FRAC_PI_2),
        "fig2" => fig2(&ctx),
        "fig3a" => fig3(&ctx, "fig3a", 0.0, strength.unwrap_or(1.0)),
        "fig3b" => fig3(&ctx, "fig3b", FRAC_PI_2, strength.unwrap_or(1.0)),
        "fig4" => fig4(&ctx),
        "fig5" => fig5(&ctx),
        "pdist" => pdist(&ctx, strength),
        _ => unreachable!(),
    }
}

fn fig1(ctx: &Ctx, name: &str, eta: f64) -> Result<PresetOutput, CliError> {
    use MeasureKind::*;
    let cfg = ctx.config(DisorderKind::None, 0.0, eta, &[Entropy, Coherence, TraceDistance]);
    let stats = run_ensemble::<f64>(&cfg, ctx.workers)?;
    let mut t = SeriesTable::new(name, "t", ctx.steps_axis(), "value").integer_x();
    t.push(Column::plain("S", series(&stats.entropy, "entropy")?.mean));
    t.push(Column::plain("I", series(&stats.coherence, "coherence")?.mean));
    t.push(Column::plain("D", series(&stats.trace_distance, "trace distance")?.mean));
    Ok(PresetOutput {
        experiments: vec![cfg],
        tables: vec![(name.to_string(), t)],
    })
}

/// Default coin-angle grid: `k pi/24` for `k = 2..=10`.
pub fn fig2_thetas() -> Vec<f64> {
    (2..=10).map(|k| k as f64 * PI / 24.0).collect()
}

fn fig2(ctx: &Ctx) -> Result<PresetOutput, CliError> {
    let base = ctx.config(DisorderKind::None, 0.0, 0.0, &[MeasureKind::Blp, MeasureKind::Coherence]);
    let grid = theta_grid(&base, &fig2_thetas());
    let rows = sweep::<f64>(&grid, ctx.workers)?;
    let mut t = SeriesTable::new("fig2", "theta", fig2_thetas(), "value");
    let n = rows
        .iter()
        .map(|r| r.stats.blp.as_ref().map(|b| b.mean).ok_or_else(|| missing("blp")))
        .collect::<Result<_, _>>()?;
    let i = rows
        .iter()
        .map(|r| Ok(series(&r.stats.coherence, "coherence")?.last().unwrap().mean))
        .collect::<Result<_, CliError>>()?;
    t.push(Column::plain("N", n));
    t.push(Column::plain("I", i));
    Ok(PresetOutput {
        experiments: grid.into_iter().map(|p| p.config).collect(),
        tables: vec![("fig2".into(), t)],
    })
}

fn fig3(ctx: &Ctx, name: &str, eta: f64, strength: f64) -> Result<PresetOutput, CliError> {
    let m = [MeasureKind::Blp];
    let ordered = ctx.config(DisorderKind::None, 0.0, eta, &m);
    let temporal = ctx.config(DisorderKind::Temporal, strength, eta, &m);
    let spatial = ctx.config(DisorderKind::Spatial, strength, eta, &m);
    let mut t = SeriesTable::new(name, "t", ctx.steps_axis(), "backflow N(t)").integer_x();
    let o = run_ensemble::<f64>(&ordered, ctx.workers)?;
    t.push(Column::plain("ordered", series(&o.backflow, "backflow")?.mean));
    for (label, cfg) in [("temporal", &temporal), ("spatial", &spatial)] {
        let s = series(&run_ensemble::<f64>(cfg, ctx.workers)?.backflow, "backflow")?;
        t.push(Column::with_error(label, s.mean, s.stderr));
    }
    Ok(PresetOutput {
        experiments: vec![ordered, temporal, spatial],
        tables: vec![(name.to_string(), t)],
    })
}

/// Strength grid `0, 0.1, ..., 1.0`.
pub fn strength_axis() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// For each disorder kind, the ensemble at every strength of the grid.
fn strength_sweeps(
    ctx: &Ctx,
    measures: &[MeasureKind],
) -> Result<(Vec<ExperimentConfig>, Vec<(&'static str, Vec<EnsembleStats>)>), CliError> {
    let mut experiments = Vec::new();
    let mut out = Vec::new();
    for kind in [DisorderKind::Temporal, DisorderKind::Spatial] {
        let base = ctx.config(kind, 0.0, FRAC_PI_2, measures);
        let grid = strength_grid(&base, &strength_axis());
        let rows = sweep::<f64>(&grid, ctx.workers)?;
        experiments.extend(grid.into_iter().map(|p| p.config));
        out.push((kind.label(), rows.into_iter().map(|r| r.stats).collect()));
    }
    Ok((experiments, out))
}

fn last_of(
    name: &str,
    y_label: &str,
    sweeps: &[(&str, Vec<EnsembleStats>)],
    pick: impl Fn(&EnsembleStats) -> Option<(f64, f64)>,
) -> Result<SeriesTable, CliError> {
    let mut t = SeriesTable::new(name, "p", strength_axis(), y_label);
    for (label, rows) in sweeps {
        let (mean, err): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .map(|s| pick(s).ok_or_else(|| missing(name)))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        t.push(Column::with_error(label, mean, err));
    }
    Ok(t)
}

fn final_point(s: &Option<SeriesStats>) -> Option<(f64, f64)> {
    s.as_ref().and_then(|s| s.last()).map(|l| (l.mean, l.stderr))
}

fn fig4(ctx: &Ctx) -> Result<PresetOutput, CliError> {
    let (experiments, sweeps) = strength_sweeps(ctx, &[MeasureKind::StdDev, MeasureKind::Blp])?;
    let sigma = last_of("fig4_sigma", "sigma", &sweeps, |s| final_point(&s.std_dev))?;
    let blp = last_of("fig4_blp", "N", &sweeps, |s| s.blp.as_ref().map(|b| (b.mean, b.stderr)))?;
    Ok(PresetOutput {
        experiments,
        tables: vec![("fig4_sigma".into(), sigma), ("fig4_blp".into(), blp)],
    })
}

fn fig5(ctx: &Ctx) -> Result<PresetOutput, CliError> {
    let (experiments, sweeps) = strength_sweeps(ctx, &[MeasureKind::Entropy])?;
    let t = last_of("fig5_entropy", "S", &sweeps, |s| final_point(&s.entropy))?;
    Ok(PresetOutput {
        experiments,
        tables: vec![("fig5_entropy".into(), t)],
    })
}

pub const HISTOGRAM_BINS: usize = 15;

fn strength_tag(p: f64) -> String {
    format!("p{:03}", (p * 100.0).round() as i64)
}

fn pdist(ctx: &Ctx, strength: Option<f64>) -> Result<PresetOutput, CliError> {
    let strengths = strength.map_or_else(|| vec![0.5, 1.0], |p| vec![p]);
    let m = [MeasureKind::Distribution];
    let ordered = ctx.config(DisorderKind::None, 0.0, FRAC_PI_2, &m);
    let o = series(&run_ensemble::<f64>(&ordered, ctx.workers)?.distribution, "distribution")?;
    let sites: Vec<f64> = (-(ctx.steps as i64)..=ctx.steps as i64).map(|x| x as f64).collect();

    let width = FRAC_PI_2 / HISTOGRAM_BINS as f64;
    let edges: Vec<f64> = (0..HISTOGRAM_BINS).map(|b| b as f64 * width).collect();
    let mut hist = SeriesTable::new("pdist_theta_hist", "theta_low", edges, "count");

    let mut experiments = vec![ordered];
    let mut tables = Vec::new();
    for &p in &strengths {
        let tag = strength_tag(p);
        let name = format!("pdist_{tag}");
        let mut t = SeriesTable::new(&name, "x", sites.clone(), "P(x)").integer_x();
        t.push(Column::plain("ordered", o.mean.clone()));
        for kind in [DisorderKind::Temporal, DisorderKind::Spatial] {
            let cfg = ctx.config(kind, p, FRAC_PI_2, &m);
            let s = series(&run_ensemble::<f64>(&cfg, ctx.workers)?.distribution, "distribution")?;
            t.push(Column::with_error(kind.label(), s.mean, s.stderr));

            let mut counts = vec![0.0; HISTOGRAM_BINS];
            for i in 0..cfg.realizations {
                for &a in cfg.realization_field(i)?.angles() {
                    let bin = ((a / width) as usize).min(HISTOGRAM_BINS - 1);
                    counts[bin] += 1.0;
                }
            }
            hist.push(Column::plain(&format!("{}_{tag}", kind.label()), counts));
            experiments.push(cfg);
        }
        tables.push((name, t));
    }
    tables.push(("pdist_theta_hist".into(), hist));
    Ok(PresetOutput { experiments, tables })
}
