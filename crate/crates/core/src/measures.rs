//! Scalar diagnostics of the reduced coin dynamics and of the position
//! distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::scalar::Real;
use crate::state::{partial_trace_coin, Coin, ReducedCoinState, WalkState};

/// A named series indexed by step `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSeries<T> {
    pub name: String,
    pub values: Vec<T>,
}

impl<T: Real> MeasureSeries<T> {
    pub fn new(name: impl Into<String>, values: Vec<T>) -> Self {
        MeasureSeries {
            name: name.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<T> {
        self.values.last().copied()
    }
}

fn clamp_eigen<T: Real>(lambda: T) -> Result<T> {
    if lambda < -T::eigen_reject() {
        return Err(WalkError::Validation(format!(
            "eigenvalue {lambda:?} is negative: not a density matrix"
        )));
    }
    Ok(if lambda < T::zero() { T::zero() } else { lambda })
}

/// Von Neumann entropy `-tr(rho log2 rho)` in bits, with `0 log 0 = 0`.
pub fn entropy<T: Real>(rho: &ReducedCoinState<T>) -> Result<T> {
    let (l1, l2) = rho.eigenvalues();
    let h = |l: T| {
        if l > T::zero() {
            -l * l.log2()
        } else {
            T::zero()
        }
    };
    let s = h(clamp_eigen(l1)?) + h(clamp_eigen(l2)?);
    Ok(s.max(T::zero()).min(T::one()))
}

/// l1 coherence: the summed moduli of the off-diagonal entries.
pub fn coherence<T: Real>(rho: &ReducedCoinState<T>) -> T {
    rho.get(Coin::Up, Coin::Down).norm() + rho.get(Coin::Down, Coin::Up).norm()
}

/// `½ tr|rho1 - rho2|`. The difference of two unit-trace Hermitian 2x2
/// matrices is `[[a, b], [b*, -a]]` with eigenvalues `±sqrt(a² + |b|²)`.
pub fn trace_distance<T: Real>(rho1: &ReducedCoinState<T>, rho2: &ReducedCoinState<T>) -> T {
    let m1 = rho1.matrix();
    let m2 = rho2.matrix();
    let two = T::lit(2.0);
    let a = ((m1[0][0].re - m2[0][0].re) - (m1[1][1].re - m2[1][1].re)) / two;
    let b = (m1[0][1] - m2[0][1] + (m1[1][0] - m2[1][0]).conj()).unscale(two);
    a.hypot(b.norm())
}

/// Running information backflow `sum_{t' < t} max(0, D(t'+1) - D(t'))`,
/// zero at `t = 0`.
pub fn cumulative_backflow<T: Real>(distance: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    std::iter::once(T::zero())
        .chain(distance.windows(2).map(|w| {
            let inc = w[1] - w[0];
            if inc > T::zero() {
                acc = acc + inc;
            }
            acc
        }))
        .take(distance.len())
        .collect()
}

/// Discrete non-Markovianity: the summed positive increments of a
/// trace-distance series.
pub fn blp_measure<T: Real>(distance: &[T]) -> Result<T> {
    if distance.len() < 2 {
        return Err(WalkError::Domain(format!(
            "backflow needs at least 2 samples, got {}",
            distance.len()
        )));
    }
    Ok(*cumulative_backflow(distance).last().unwrap())
}

/// Probability of each lattice site, `x` from `-T` to `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution<T> {
    pub steps_capacity: usize,
    pub probabilities: Vec<T>,
}

impl<T: Real> PositionDistribution<T> {
    /// Wraps per-site probabilities; the length must be odd.
    pub fn new(probabilities: Vec<T>) -> Result<Self> {
        if probabilities.len() % 2 == 0 {
            return Err(WalkError::Domain(format!(
                "distribution needs 2T+1 sites, got {}",
                probabilities.len()
            )));
        }
        Ok(PositionDistribution {
            steps_capacity: probabilities.len() / 2,
            probabilities,
        })
    }

    /// `(x, P(x))` pairs in ascending `x`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        let t = self.steps_capacity as i64;
        self.probabilities.iter().enumerate().map(move |(i, &p)| (i as i64 - t, p))
    }

    pub fn at(&self, x: i64) -> T {
        let t = self.steps_capacity as i64;
        if x.abs() > t {
            T::zero()
        } else {
            self.probabilities[(x + t) as usize]
        }
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().fold(T::zero(), |a, &p| a + p)
    }
}

/// `P(x) = |psi(up, x)|² + |psi(down, x)|²`.
pub fn position_distribution<T: Real>(state: &WalkState<T>) -> PositionDistribution<T> {
    let probabilities = state
        .coin_slice(Coin::Up)
        .iter()
        .zip(state.coin_slice(Coin::Down))
        .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
        .collect();
    PositionDistribution {
        steps_capacity: state.steps_capacity(),
        probabilities,
    }
}

/// Spread of the walker, `sqrt(<x²> - <x>²)` in lattice units.
pub fn std_dev<T: Real>(dist: &PositionDistribution<T>) -> Result<T> {
    let total = dist.total();
    if (total - T::one()).abs() > T::probability_tolerance() || !total.is_finite() {
        return Err(WalkError::Validation(format!(
            "distribution sums to {total:?}, not 1"
        )));
    }
    let (m1, m2) = dist.iter().fold((T::zero(), T::zero()), |(m1, m2), (x, p)| {
        let x = T::lit(x as f64);
        (m1 + x * p, m2 + x * x * p)
    });
    let var = m2 - m1 * m1;
    if var < -T::variance_floor() {
        return Err(WalkError::Numerical(format!("negative variance {var:?}")));
    }
    Ok(var.max(T::zero()).sqrt())
}

/// Series extracted from one trajectory, plus the pair-based trace distance
/// and backflow when a partner trajectory is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeasures<T> {
    pub entropy: MeasureSeries<T>,
    pub coherence: MeasureSeries<T>,
    pub std_dev: MeasureSeries<T>,
    pub final_distribution: PositionDistribution<T>,
    pub trace_distance: Option<MeasureSeries<T>>,
    pub blp: Option<T>,
}

/// Incremental form of [`measure_trajectory`], fed one state (or state pair)
/// per step.
#[derive(Debug, Clone)]
pub struct MeasureRecorder<T> {
    entropy: Vec<T>,
    coherence: Vec<T>,
    std_dev: Vec<T>,
    distance: Option<Vec<T>>,
    last: Option<PositionDistribution<T>>,
}

impl<T: Real> MeasureRecorder<T> {
    pub fn new(paired: bool, capacity: usize) -> Self {
        MeasureRecorder {
            entropy: Vec::with_capacity(capacity),
            coherence: Vec::with_capacity(capacity),
            std_dev: Vec::with_capacity(capacity),
            distance: paired.then(|| Vec::with_capacity(capacity)),
            last: None,
        }
    }

    pub fn record(&mut self, state: &WalkState<T>, partner: Option<&WalkState<T>>) -> Result<()> {
        let rho = partial_trace_coin(state)?;
        self.entropy.push(entropy(&rho)?);
        self.coherence.push(coherence(&rho));
        let dist = position_distribution(state);
        self.std_dev.push(std_dev(&dist)?);
        self.last = Some(dist);
        match (&mut self.distance, partner) {
            (Some(d), Some(p)) => d.push(trace_distance(&rho, &partial_trace_coin(p)?)),
            (None, None) => {}
            _ => {
                return Err(WalkError::Domain(
                    "partner state must be supplied at every step or never".into(),
                ))
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<TrajectoryMeasures<T>> {
        let final_distribution = self
            .last
            .ok_or_else(|| WalkError::Domain("empty trajectory".into()))?;
        let blp = match &self.distance {
            Some(d) => Some(blp_measure(d)?),
            None => None,
        };
        Ok(TrajectoryMeasures {
            entropy: MeasureSeries::new("S", self.entropy),
            coherence: MeasureSeries::new("I", self.coherence),
            std_dev: MeasureSeries::new("sigma", self.std_dev),
            final_distribution,
            trace_distance: self.distance.map(|d| MeasureSeries::new("D", d)),
            blp,
        })
    }
}

/// S(t), I(t), sigma(t) and the final distribution of `traj`; D(t) and the
/// backflow N when `partner` (evolved under the same coin field) is given.
pub fn measure_trajectory<T: Real>(
    traj: &[WalkState<T>],
    partner: Option<&[WalkState<T>]>,
) -> Result<TrajectoryMeasures<T>> {
    if let Some(p) = partner {
        if p.len() != traj.len() {
            return Err(WalkError::Domain(format!(
                "trajectory lengths differ: {} vs {}",
                traj.len(),
                p.len()
            )));
        }
    }
    let mut rec = MeasureRecorder::new(partner.is_some(), traj.len());
    for (t, state) in traj.iter().enumerate() {
        rec.record(state, partner.map(|p| &p[t]))?;
    }
    rec.finish()
}
