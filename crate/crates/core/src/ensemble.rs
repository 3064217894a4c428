//! Ensembles of disorder realizations and parameter sweeps.
//!
//! Realization `i` of an experiment draws its coin field from
//! `WalkRng::for_realization(master_seed, i)`, so every realization can run
//! on any worker. Results are reduced in index order with Welford updates,
//! which makes the statistics independent of the worker count.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::evolution::{sample_angles, CoinField, DisorderConfig, DisorderKind, Walker};
use crate::measures::{cumulative_backflow, MeasureRecorder};
use crate::rng::WalkRng;
use crate::scalar::Real;
use crate::state::InitialStateSpec;

/// A diagnostic an experiment can record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Entropy,
    Coherence,
    TraceDistance,
    Blp,
    StdDev,
    Distribution,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::Entropy,
        MeasureKind::Coherence,
        MeasureKind::TraceDistance,
        MeasureKind::Blp,
        MeasureKind::StdDev,
        MeasureKind::Distribution,
    ];

    /// True for measures defined on the pair of initial states.
    pub fn needs_pair(self) -> bool {
        matches!(self, MeasureKind::TraceDistance | MeasureKind::Blp)
    }
}

/// One experiment: a pair of initial coin states driven by a shared coin
/// field, repeated over `realizations` independent fields.
///
/// Single-state measures are taken on `initial`. The `seed` inside
/// `disorder` is ignored here; realization seeds derive from `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub initial: InitialStateSpec,
    pub partner: InitialStateSpec,
    pub disorder: DisorderConfig,
    pub steps: usize,
    pub realizations: usize,
    pub master_seed: u64,
    pub measures: BTreeSet<MeasureKind>,
}

impl ExperimentConfig {
    /// Defaults: pair `psi(±pi/4, pi/2)`, 200 steps, 1000 realizations,
    /// every measure.
    pub fn new(disorder: DisorderConfig) -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        ExperimentConfig {
            initial: InitialStateSpec::new(FRAC_PI_4, FRAC_PI_2),
            partner: InitialStateSpec::new(-FRAC_PI_4, FRAC_PI_2),
            disorder,
            steps: 200,
            realizations: 1000,
            master_seed: 0,
            measures: MeasureKind::ALL.into_iter().collect(),
        }
    }

    /// Sets the pair to `psi(±pi/4, eta)`.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.initial = InitialStateSpec::new(std::f64::consts::FRAC_PI_4, eta);
        self.partner = InitialStateSpec::new(-std::f64::consts::FRAC_PI_4, eta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations < 1 {
            return Err(WalkError::config("realizations", "must be at least 1"));
        }
        if self.steps < 1 {
            return Err(WalkError::config("steps", "must be at least 1"));
        }
        if self.measures.is_empty() {
            return Err(WalkError::config("measures", "select at least one measure"));
        }
        for (key, spec) in [("initial", &self.initial), ("initial2", &self.partner)] {
            if !spec.delta.is_finite() || !spec.eta.is_finite() {
                return Err(WalkError::config(key, "angles must be finite"));
            }
            if spec.origin.unsigned_abs() > self.steps as u64 {
                return Err(WalkError::config(&format!("{key}.origin"), "outside the lattice"));
            }
        }
        self.disorder.validate()
    }

    fn wants(&self, m: MeasureKind) -> bool {
        self.measures.contains(&m)
    }

    fn paired(&self) -> bool {
        self.measures.iter().any(|m| m.needs_pair())
    }

    /// Coin field of realization `index`.
    pub fn realization_field(&self, index: usize) -> Result<CoinField<f64>> {
        let mut rng = WalkRng::for_realization(self.master_seed, index as u64);
        sample_angles(&self.disorder, self.steps, &mut rng)
    }
}

/// Everything selected in the config, for one realization, in `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationMeasures {
    pub index: usize,
    pub field: CoinField<f64>,
    pub entropy: Option<Vec<f64>>,
    pub coherence: Option<Vec<f64>>,
    pub std_dev: Option<Vec<f64>>,
    pub trace_distance: Option<Vec<f64>>,
    /// Running backflow up to each step; its last entry is `blp`.
    pub backflow: Option<Vec<f64>>,
    pub blp: Option<f64>,
    pub distribution: Option<Vec<f64>>,
}

fn to_f64<T: Real>(v: Vec<T>) -> Vec<f64> {
    v.into_iter().map(|x| x.to_f64().unwrap()).collect()
}

/// Runs realization `index`: one coin field, both initial states under it.
pub fn run_trajectory_pair<T: Real>(cfg: &ExperimentConfig, index: usize) -> Result<RealizationMeasures> {
    if index >= cfg.realizations {
        return Err(WalkError::Domain(format!(
            "realization {index} out of range for {}",
            cfg.realizations
        )));
    }
    cfg.validate()?;
    let field = cfg.realization_field(index)?;
    let typed: CoinField<T> = field.cast();
    let paired = cfg.paired();

    let mut walker = Walker::new(&cfg.initial, &typed, cfg.steps)?;
    let mut partner = if paired {
        Some(Walker::new(&cfg.partner, &typed, cfg.steps)?)
    } else {
        None
    };
    let mut rec = MeasureRecorder::new(paired, cfg.steps + 1);
    loop {
        rec.record(walker.state(), partner.as_ref().map(|p| p.state()))?;
        if !walker.advance()? {
            break;
        }
        if let Some(p) = partner.as_mut() {
            p.advance()?;
        }
    }
    let m = rec.finish()?;
    let distance = m.trace_distance.map(|d| to_f64(d.values));
    let backflow = if cfg.wants(MeasureKind::Blp) {
        distance.as_deref().map(cumulative_backflow)
    } else {
        None
    };
    let pick = |kind: MeasureKind, v: Vec<T>| cfg.wants(kind).then(|| to_f64(v));
    Ok(RealizationMeasures {
        index,
        field,
        entropy: pick(MeasureKind::Entropy, m.entropy.values),
        coherence: pick(MeasureKind::Coherence, m.coherence.values),
        std_dev: pick(MeasureKind::StdDev, m.std_dev.values),
        blp: backflow.as_ref().and_then(|b| b.last().copied()),
        backflow,
        trace_distance: distance.filter(|_| cfg.wants(MeasureKind::TraceDistance)),
        distribution: pick(MeasureKind::Distribution, m.final_distribution.probabilities),
    })
}

/// Mean and standard error (sample standard deviation over `sqrt(R)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarStats {
    pub mean: f64,
    pub stderr: f64,
}

/// Pointwise mean and standard error of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl SeriesStats {
    pub fn last(&self) -> Option<ScalarStats> {
        Some(ScalarStats {
            mean: *self.mean.last()?,
            stderr: *self.stderr.last()?,
        })
    }

    pub fn at(&self, i: usize) -> ScalarStats {
        ScalarStats {
            mean: self.mean[i],
            stderr: self.stderr[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub realizations: usize,
    pub entropy: Option<SeriesStats>,
    pub coherence: Option<SeriesStats>,
    pub std_dev: Option<SeriesStats>,
    pub trace_distance: Option<SeriesStats>,
    /// Ensemble mean of each realization's running backflow.
    pub backflow: Option<SeriesStats>,
    pub blp: Option<ScalarStats>,
    pub distribution: Option<SeriesStats>,
}

/// Welford accumulator over equal-length series. Identical inputs leave the
/// mean bit-exact and the spread exactly zero.
#[derive(Debug, Clone)]
struct Welford {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new() -> Self {
        Welford {
            count: 0,
            mean: Vec::new(),
            m2: Vec::new(),
        }
    }

    fn push(&mut self, x: &[f64]) -> Result<()> {
        if self.count == 0 {
            self.mean = vec![0.0; x.len()];
            self.m2 = vec![0.0; x.len()];
        } else if x.len() != self.mean.len() {
            return Err(WalkError::Domain("series lengths differ across realizations".into()));
        }
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *mean;
            *mean += delta / n;
            *m2 += delta * (v - *mean);
        }
        Ok(())
    }

    fn finish(self) -> SeriesStats {
        let n = self.count as f64;
        let stderr = self
            .m2
            .iter()
            .map(|&m2| {
                if self.count < 2 {
                    0.0
                } else {
                    (m2.max(0.0) / (n - 1.0)).sqrt() / n.sqrt()
                }
            })
            .collect();
        SeriesStats {
            mean: self.mean,
            stderr,
        }
    }
}

#[derive(Debug)]
struct Aggregator {
    slots: [Option<Welford>; 7],
}

impl Aggregator {
    fn new() -> Self {
        Aggregator {
            slots: Default::default(),
        }
    }

    fn push(&mut self, r: &RealizationMeasures) -> Result<()> {
        let blp = r.blp.map(|b| vec![b]);
        let fields = [
            r.entropy.as_deref(),
            r.coherence.as_deref(),
            r.std_dev.as_deref(),
            r.trace_distance.as_deref(),
            r.backflow.as_deref(),
            blp.as_deref(),
            r.distribution.as_deref(),
        ];
        for (slot, v) in self.slots.iter_mut().zip(fields) {
            if let Some(v) = v {
                slot.get_or_insert_with(Welford::new).push(v)?;
            }
        }
        Ok(())
    }

    fn finish(self, realizations: usize) -> EnsembleStats {
        let [entropy, coherence, std_dev, trace_distance, backflow, blp, distribution] =
            self.slots.map(|w| w.map(Welford::finish));
        EnsembleStats {
            realizations,
            entropy,
            coherence,
            std_dev,
            trace_distance,
            backflow,
            blp: blp.and_then(|s| s.last()),
            distribution,
        }
    }
}

/// Worker count from an explicit value, the `QWALK_WORKERS` environment
/// variable, or the number of logical CPUs, in that order.
pub fn default_workers() -> usize {
    std::env::var("QWALK_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Execution settings that never change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(pub usize);

impl Workers {
    pub fn from_env() -> Self {
        Workers(default_workers())
    }

    fn run<R: Send>(self, f: impl FnOnce() -> R + Send) -> Result<R> {
        if self.0 <= 1 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.0)
            .build()
            .map_err(|e| WalkError::Numerical(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

/// Runs every realization of `cfg` and reduces them in index order.
pub fn run_ensemble<T: Real>(cfg: &ExperimentConfig, workers: Workers) -> Result<EnsembleStats> {
    cfg.validate()?;
    workers.run(|| ensemble_inner::<T>(cfg, workers.0 > 1))?
}

/// Ensemble statistics together with the per-realization records.
pub fn run_ensemble_with_samples<T: Real>(
    cfg: &ExperimentConfig,
    workers: Workers,
) -> Result<(EnsembleStats, Vec<RealizationMeasures>)> {
    cfg.validate()?;
    let samples = workers.run(|| collect::<T>(cfg, workers.0 > 1))??;
    let mut agg = Aggregator::new();
    for s in &samples {
        agg.push(s)?;
    }
    Ok((agg.finish(cfg.realizations), samples))
}

fn collect<T: Real>(cfg: &ExperimentConfig, parallel: bool) -> Result<Vec<RealizationMeasures>> {
    let one = |i: usize| {
        run_trajectory_pair::<T>(cfg, i)
            .map_err(|e| WalkError::Numerical(format!("realization {i} failed: {e}")))
    };
    if parallel {
        (0..cfg.realizations).into_par_iter().map(one).collect()
    } else {
        (0..cfg.realizations).map(one).collect()
    }
}

fn ensemble_inner<T: Real>(cfg: &ExperimentConfig, parallel: bool) -> Result<EnsembleStats> {
    // Deterministic dynamics: one realization stands for all of them.
    if cfg.disorder.kind == DisorderKind::None || cfg.disorder.strength == 0.0 {
        let r = run_trajectory_pair::<T>(cfg, 0)?;
        let mut agg = Aggregator::new();
        for _ in 0..cfg.realizations {
            agg.push(&r)?;
        }
        return Ok(agg.finish(cfg.realizations));
    }
    // Chunked so memory stays bounded for large R while the reduction order
    // stays fixed.
    const CHUNK: usize = 256;
    let mut agg = Aggregator::new();
    let mut start = 0;
    while start < cfg.realizations {
        let end = (start + CHUNK).min(cfg.realizations);
        let one = |i: usize| {
            run_trajectory_pair::<T>(cfg, i)
                .map_err(|e| WalkError::Numerical(format!("realization {i} failed: {e}")))
        };
        let chunk: Vec<RealizationMeasures> = if parallel {
            (start..end).into_par_iter().map(one).collect::<Result<_>>()?
        } else {
            (start..end).map(one).collect::<Result<_>>()?
        };
        for r in &chunk {
            agg.push(r)?;
        }
        start = end;
    }
    Ok(agg.finish(cfg.realizations))
}

/// One grid point: the parameters that vary, by name, and the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: Vec<(String, f64)>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: Vec<(String, f64)>,
    pub stats: EnsembleStats,
}

/// Runs each grid point as an independent ensemble.
pub fn sweep<T: Real>(grid: &[SweepPoint], workers: Workers) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(WalkError::Domain("empty sweep grid".into()));
    }
    grid.iter()
        .map(|p| {
            Ok(SweepRow {
                params: p.params.clone(),
                stats: run_ensemble::<T>(&p.config, workers)?,
            })
        })
        .collect()
}

/// Grid over the ordered-walk coin angle.
pub fn theta_grid(base: &ExperimentConfig, thetas: &[f64]) -> Vec<SweepPoint> {
    thetas
        .iter()
        .map(|&theta| {
            let mut config = base.clone();
            config.disorder.base_theta = theta;
            SweepPoint {
                params: vec![("theta".into(), theta)],
                config,
            }
        })
        .collect()
}

/// Grid over disorder strength.
pub fn strength_grid(base: &ExperimentConfig, strengths: &[f64]) -> Vec<SweepPoint> {
    strengths
        .iter()
        .map(|&p| {
            let mut config = base.clone();
            config.disorder.strength = p;
            SweepPoint {
                params: vec![("p".into(), p)],
                config,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: DisorderKind, p: f64) -> ExperimentConfig {
        ExperimentConfig {
            steps: 20,
            realizations: 8,
            master_seed: 17,
            ..ExperimentConfig::new(DisorderConfig::new(kind, p))
        }
    }

    #[test]
    fn welford_identical_inputs_have_zero_spread() {
        let mut w = Welford::new();
        for _ in 0..100 {
            w.push(&[0.1, 1.0 / 3.0]).unwrap();
        }
        let s = w.finish();
        assert_eq!(s.mean, vec![0.1, 1.0 / 3.0]);
        assert_eq!(s.stderr, vec![0.0, 0.0]);
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let mut w = Welford::new();
        for x in xs {
            w.push(&[x]).unwrap();
        }
        let s = w.finish();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean[0] - mean).abs() < 1e-14);
        assert!((s.stderr[0] - (var / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ordered_realizations_are_identical() {
        let cfg = small(DisorderKind::None, 0.0);
        let a = run_trajectory_pair::<f64>(&cfg, 0).unwrap();
        let b = run_trajectory_pair::<f64>(&cfg, 5).unwrap();
        assert_eq!(a.blp, b.blp);
        assert_eq!(a.entropy, b.entropy);
    }

    #[test]
    fn index_out_of_range() {
        let cfg = small(DisorderKind::Spatial, 1.0);
        assert!(matches!(run_trajectory_pair::<f64>(&cfg, 8), Err(WalkError::Domain(_))));
    }

    #[test]
    fn single_realization_has_zero_error() {
        let cfg = ExperimentConfig {
            realizations: 1,
            ..small(DisorderKind::Temporal, 1.0)
        };
        let stats = run_ensemble::<f64>(&cfg, Workers(1)).unwrap();
        let r = run_trajectory_pair::<f64>(&cfg, 0).unwrap();
        assert_eq!(stats.blp.as_ref().unwrap().mean, r.blp.unwrap());
        assert_eq!(stats.blp.unwrap().stderr, 0.0);
        assert_eq!(stats.entropy.unwrap().mean, r.entropy.unwrap());
    }

    #[test]
    fn zero_strength_matches_ordered() {
        let cfg = ExperimentConfig {
            realizations: 100,
            ..small(DisorderKind::Spatial, 0.0)
        };
        let stats = run_ensemble::<f64>(&cfg, Workers(1)).unwrap();
        let ordered = run_trajectory_pair::<f64>(&small(DisorderKind::None, 0.0), 0).unwrap();
        assert_eq!(stats.std_dev.as_ref().unwrap().mean, ordered.std_dev.unwrap());
        assert!(stats.std_dev.unwrap().stderr.iter().all(|&e| e == 0.0));
        assert_eq!(stats.blp.unwrap().mean, ordered.blp.unwrap());
    }

    #[test]
    fn measure_selection_is_respected() {
        let mut cfg = small(DisorderKind::Temporal, 0.5);
        cfg.measures = [MeasureKind::StdDev].into_iter().collect();
        let r = run_trajectory_pair::<f64>(&cfg, 0).unwrap();
        assert!(r.std_dev.is_some());
        assert!(r.entropy.is_none() && r.trace_distance.is_none() && r.blp.is_none());
        cfg.measures.clear();
        assert!(matches!(cfg.validate(), Err(WalkError::Config { .. })));
    }

    #[test]
    fn schedule_independence() {
        let cfg = small(DisorderKind::Spatial, 0.6);
        let a = run_ensemble::<f64>(&cfg, Workers(1)).unwrap();
        let b = run_ensemble::<f64>(&cfg, Workers(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_single_point_equals_ensemble() {
        let cfg = small(DisorderKind::Temporal, 1.0);
        let rows = sweep::<f64>(&strength_grid(&cfg, &[1.0]), Workers(1)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].stats, run_ensemble::<f64>(&cfg, Workers(1)).unwrap());
        assert!(sweep::<f64>(&[], Workers(1)).is_err());
    }
}
