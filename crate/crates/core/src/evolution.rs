//! Coin and shift operators, disorder sampling and trajectory evolution.
//!
//! One step is `U = S (C ⊗ I)`: the coin `C(θ) = exp(-iθσx)` rotates the
//! internal state at every site, then the shift moves up amplitudes one site
//! right and down amplitudes one site left.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::rng::WalkRng;
use crate::scalar::Real;
use crate::state::{make_initial_state, Coin, InitialStateSpec, WalkState};

/// Coin angles for one disorder realization.
///
/// `Temporal` holds one angle per step, shared by every site (annealed).
/// `Spatial` holds one angle per lattice site, `x` at index `x + T`, reused
/// at every step (quenched).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinField<T> {
    Uniform(T),
    Temporal(Vec<T>),
    Spatial(Vec<T>),
}

fn check_angle<T: Real>(theta: T) -> Result<()> {
    if theta >= T::zero() && theta <= T::FRAC_PI_2() {
        Ok(())
    } else {
        Err(WalkError::Domain(format!("coin angle {theta:?} outside [0, pi/2]")))
    }
}

impl<T: Real> CoinField<T> {
    pub fn uniform(theta: T) -> Result<Self> {
        check_angle(theta)?;
        Ok(CoinField::Uniform(theta))
    }

    pub fn temporal(angles: Vec<T>) -> Result<Self> {
        angles.iter().try_for_each(|&a| check_angle(a))?;
        Ok(CoinField::Temporal(angles))
    }

    /// Per-site angles; the length must be odd (`2T + 1`).
    pub fn spatial(angles: Vec<T>) -> Result<Self> {
        if angles.len() % 2 == 0 {
            return Err(WalkError::Domain(format!(
                "spatial field needs 2T+1 sites, got {}",
                angles.len()
            )));
        }
        angles.iter().try_for_each(|&a| check_angle(a))?;
        Ok(CoinField::Spatial(angles))
    }

    /// The angle acting on site `x` at step `t`.
    pub fn angle(&self, x: i64, t: usize) -> Result<T> {
        match self {
            CoinField::Uniform(theta) => Ok(*theta),
            CoinField::Temporal(angles) => angles.get(t).copied().ok_or_else(|| {
                WalkError::Domain(format!("step {t} beyond temporal field of {} steps", angles.len()))
            }),
            CoinField::Spatial(angles) => {
                let radius = (angles.len() / 2) as i64;
                if x.abs() > radius {
                    return Err(WalkError::Domain(format!(
                        "site {x} outside spatial field [-{radius}, {radius}]"
                    )));
                }
                Ok(angles[(x + radius) as usize])
            }
        }
    }

    /// Every stored angle, in storage order.
    pub fn angles(&self) -> &[T] {
        match self {
            CoinField::Uniform(theta) => std::slice::from_ref(theta),
            CoinField::Temporal(a) | CoinField::Spatial(a) => a,
        }
    }

    pub fn cast<U: Real>(&self) -> CoinField<U> {
        let conv = |a: &T| U::lit(a.to_f64().unwrap());
        match self {
            CoinField::Uniform(theta) => CoinField::Uniform(conv(theta)),
            CoinField::Temporal(a) => CoinField::Temporal(a.iter().map(conv).collect()),
            CoinField::Spatial(a) => CoinField::Spatial(a.iter().map(conv).collect()),
        }
    }

    fn check_lattice(&self, state: &WalkState<T>) -> Result<()> {
        match self {
            CoinField::Spatial(a) if a.len() != state.lattice_len() => Err(WalkError::Domain(format!(
                "spatial field has {} sites, lattice has {}",
                a.len(),
                state.lattice_len()
            ))),
            _ => Ok(()),
        }
    }
}

/// `(cos θ, sin θ)` tables so repeated steps skip the trigonometry.
#[derive(Debug, Clone)]
enum Rotations<T> {
    PerStep(Vec<(T, T)>),
    Uniform((T, T)),
    PerSite(Vec<(T, T)>),
}

impl<T: Real> Rotations<T> {
    fn new(field: &CoinField<T>) -> Self {
        let cs = |a: &T| (a.cos(), a.sin());
        match field {
            CoinField::Uniform(theta) => Rotations::Uniform(cs(theta)),
            CoinField::Temporal(a) => Rotations::PerStep(a.iter().map(cs).collect()),
            CoinField::Spatial(a) => Rotations::PerSite(a.iter().map(cs).collect()),
        }
    }
}

#[inline]
fn rotate<T: Real>(up: &mut Complex<T>, down: &mut Complex<T>, c: T, s: T) {
    // (-i s) * z = s * im(z) - i s * re(z)
    let u = *up;
    let d = *down;
    *up = Complex::new(c * u.re + s * d.im, c * u.im - s * d.re);
    *down = Complex::new(s * u.im + c * d.re, c * d.im - s * u.re);
}

/// Applies the step-`t` coin to sites with offsets in `range`.
fn coin_kernel<T: Real>(
    state: &mut WalkState<T>,
    rot: &Rotations<T>,
    t: usize,
    range: std::ops::Range<usize>,
) -> Result<()> {
    let (up, down) = state.split_mut();
    let global = match rot {
        Rotations::Uniform(cs) => Some(*cs),
        Rotations::PerStep(table) => Some(*table.get(t).ok_or_else(|| {
            WalkError::Domain(format!("step {t} beyond temporal field of {} steps", table.len()))
        })?),
        Rotations::PerSite(_) => None,
    };
    match (global, rot) {
        (Some((c, s)), _) => {
            for (u, d) in up[range.clone()].iter_mut().zip(&mut down[range]) {
                rotate(u, d, c, s);
            }
        }
        (None, Rotations::PerSite(table)) => {
            for ((u, d), &(c, s)) in up[range.clone()]
                .iter_mut()
                .zip(&mut down[range.clone()])
                .zip(&table[range])
            {
                rotate(u, d, c, s);
            }
        }
        (None, _) => unreachable!(),
    }
    Ok(())
}

/// Shifts up amplitudes right and down amplitudes left, both restricted to
/// the offsets in `range` (the current support).
fn shift_kernel<T: Real>(state: &mut WalkState<T>, range: std::ops::Range<usize>) -> Result<()> {
    let n = state.lattice_len();
    let zero = Complex::new(T::zero(), T::zero());
    {
        let up = state.coin_slice(Coin::Up);
        let down = state.coin_slice(Coin::Down);
        if up[0] != zero || up[n - 1] != zero || down[0] != zero || down[n - 1] != zero {
            return Err(WalkError::Overflow(format!(
                "support touches the edge of a {}-step lattice",
                state.steps_capacity()
            )));
        }
    }
    let lo = range.start.max(1);
    let hi = range.end.min(n - 1);
    if lo >= hi {
        return Ok(());
    }
    let (up, down) = state.split_mut();
    up.copy_within(lo..hi, lo + 1);
    up[lo] = zero;
    down.copy_within(lo..hi, lo - 1);
    down[hi - 1] = zero;
    Ok(())
}

/// `(C_field(t) ⊗ I)|state>`.
pub fn apply_coin<T: Real>(state: &WalkState<T>, field: &CoinField<T>, t: usize) -> Result<WalkState<T>> {
    field.check_lattice(state)?;
    let mut out = state.clone();
    let n = out.lattice_len();
    coin_kernel(&mut out, &Rotations::new(field), t, 0..n)?;
    Ok(out)
}

/// `S|state>`. Fails with an overflow error if any amplitude sits on the
/// lattice edge.
pub fn apply_shift<T: Real>(state: &WalkState<T>) -> Result<WalkState<T>> {
    let mut out = state.clone();
    let n = out.lattice_len();
    shift_kernel(&mut out, 0..n)?;
    Ok(out)
}

/// One walk step, `S (C_field(t) ⊗ I)`.
pub fn step<T: Real>(state: &WalkState<T>, field: &CoinField<T>, t: usize) -> Result<WalkState<T>> {
    apply_shift(&apply_coin(state, field, t)?)
}

/// Kind of coin disorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    None,
    Temporal,
    Spatial,
}

impl DisorderKind {
    pub fn label(self) -> &'static str {
        match self {
            DisorderKind::None => "none",
            DisorderKind::Temporal => "temporal",
            DisorderKind::Spatial => "spatial",
        }
    }
}

/// Distribution of the randomly drawn angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngleDistribution {
    /// Uniform on `[low, high]`, a sub-interval of `[0, pi/2]`.
    Uniform { low: f64, high: f64 },
}

impl Default for AngleDistribution {
    fn default() -> Self {
        AngleDistribution::Uniform {
            low: 0.0,
            high: std::f64::consts::FRAC_PI_2,
        }
    }
}

impl AngleDistribution {
    fn sample(&self, rng: &mut WalkRng) -> f64 {
        match *self {
            AngleDistribution::Uniform { low, high } => low + rng.next_unit() * (high - low),
        }
    }
}

fn default_base_theta() -> f64 {
    std::f64::consts::FRAC_PI_4
}

/// Disorder model: each step (temporal) or site (spatial) independently
/// takes a fresh random angle with probability `strength`, otherwise
/// `base_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub kind: DisorderKind,
    #[serde(default)]
    pub strength: f64,
    #[serde(default = "default_base_theta")]
    pub base_theta: f64,
    #[serde(default)]
    pub distribution: AngleDistribution,
    #[serde(default)]
    pub seed: u64,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        DisorderConfig::ordered(default_base_theta())
    }
}

impl DisorderConfig {
    /// Homogeneous walk with coin angle `theta`.
    pub fn ordered(theta: f64) -> Self {
        DisorderConfig {
            kind: DisorderKind::None,
            strength: 0.0,
            base_theta: theta,
            distribution: AngleDistribution::default(),
            seed: 0,
        }
    }

    pub fn new(kind: DisorderKind, strength: f64) -> Self {
        DisorderConfig {
            kind,
            strength,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        use std::f64::consts::FRAC_PI_2;
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(WalkError::config(
                "disorder.strength",
                format!("{} not in [0, 1]", self.strength),
            ));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.base_theta) {
            return Err(WalkError::config(
                "disorder.base_theta",
                format!("{} not in [0, pi/2]", self.base_theta),
            ));
        }
        match self.distribution {
            AngleDistribution::Uniform { low, high } => {
                if !(0.0 <= low && low <= high && high <= FRAC_PI_2) {
                    return Err(WalkError::config(
                        "disorder.distribution",
                        format!("need 0 <= low <= high <= pi/2, got [{low}, {high}]"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Draws one realization of coin angles in double precision.
///
/// Every temporal step or spatial site consumes exactly two unit draws, the
/// selector `u` and the candidate angle, whether or not the slot ends up
/// disordered. Slot `k` therefore sees the same random numbers for every
/// strength, and realizations at different strengths are coupled.
pub fn sample_angles(cfg: &DisorderConfig, steps: usize, rng: &mut WalkRng) -> Result<CoinField<f64>> {
    cfg.validate()?;
    let slots = match cfg.kind {
        DisorderKind::None => return CoinField::uniform(cfg.base_theta),
        DisorderKind::Temporal => steps,
        DisorderKind::Spatial => 2 * steps + 1,
    };
    let angles = (0..slots)
        .map(|_| {
            let select = rng.next_unit();
            let candidate = cfg.distribution.sample(rng);
            if select < cfg.strength {
                candidate
            } else {
                cfg.base_theta
            }
        })
        .collect();
    match cfg.kind {
        DisorderKind::Temporal => CoinField::temporal(angles),
        _ => CoinField::spatial(angles),
    }
}

pub fn sample_coin_field<T: Real>(cfg: &DisorderConfig, steps: usize, rng: &mut WalkRng) -> Result<CoinField<T>> {
    Ok(sample_angles(cfg, steps, rng)?.cast())
}

/// Streams a trajectory one state at a time, restricting work to the light
/// cone of the origin.
#[derive(Debug, Clone)]
pub struct Walker<T> {
    rotations: Rotations<T>,
    state: WalkState<T>,
    origin_offset: usize,
    t: usize,
    steps: usize,
}

impl<T: Real> Walker<T> {
    pub fn new(spec: &InitialStateSpec, field: &CoinField<T>, steps: usize) -> Result<Self> {
        let state = make_initial_state(spec, steps)?;
        field.check_lattice(&state)?;
        if let CoinField::Temporal(a) = field {
            if a.len() < steps {
                return Err(WalkError::Domain(format!(
                    "temporal field of {} steps cannot drive {steps} steps",
                    a.len()
                )));
            }
        }
        Ok(Walker {
            rotations: Rotations::new(field),
            origin_offset: (spec.origin + steps as i64) as usize,
            state,
            t: 0,
            steps,
        })
    }

    pub fn state(&self) -> &WalkState<T> {
        &self.state
    }

    pub fn into_state(self) -> WalkState<T> {
        self.state
    }

    /// Steps taken so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.steps
    }

    /// Advances one step; `Ok(false)` once all steps are taken.
    pub fn advance(&mut self) -> Result<bool> {
        if self.is_done() {
            return Ok(false);
        }
        let n = self.state.lattice_len();
        let lo = self.origin_offset.saturating_sub(self.t);
        let hi = (self.origin_offset + self.t + 1).min(n);
        coin_kernel(&mut self.state, &self.rotations, self.t, lo..hi)?;
        shift_kernel(&mut self.state, lo..hi)?;
        self.t += 1;
        Ok(true)
    }
}

/// All `steps + 1` states driven by one fixed coin field.
pub fn evolve_with_field<T: Real>(
    spec: &InitialStateSpec,
    field: &CoinField<T>,
    steps: usize,
) -> Result<Vec<WalkState<T>>> {
    let mut walker = Walker::new(spec, field, steps)?;
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(walker.state().clone());
    while walker.advance()? {
        traj.push(walker.state().clone());
    }
    Ok(traj)
}

/// Samples one coin field from `cfg` and evolves `spec` under it.
pub fn evolve<T: Real>(
    spec: &InitialStateSpec,
    cfg: &DisorderConfig,
    steps: usize,
    rng: &mut WalkRng,
) -> Result<Vec<WalkState<T>>> {
    let field = sample_coin_field(cfg, steps, rng)?;
    evolve_with_field(spec, &field, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::make_initial_state;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn up0(steps: usize) -> WalkState<f64> {
        make_initial_state(&InitialStateSpec::new(0.0, 0.0), steps).unwrap()
    }

    fn assert_amp(s: &WalkState<f64>, coin: Coin, x: i64, want: Complex<f64>) {
        let got = s.amplitude(coin, x).unwrap();
        assert!((got - want).norm() < 1e-15, "{coin:?}@{x}: {got} != {want}");
    }

    #[test]
    fn coin_identity_at_zero() {
        let s = make_initial_state::<f64>(&InitialStateSpec::new(0.4, 1.1), 2).unwrap();
        let out = apply_coin(&s, &CoinField::uniform(0.0).unwrap(), 0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn coin_quarter_turn_flips() {
        let out = apply_coin(&up0(2), &CoinField::uniform(FRAC_PI_2).unwrap(), 0).unwrap();
        assert_amp(&out, Coin::Up, 0, c(0.0, 0.0));
        assert_amp(&out, Coin::Down, 0, c(0.0, -1.0));
    }

    #[test]
    fn coin_eighth_turn() {
        let out = apply_coin(&up0(2), &CoinField::uniform(FRAC_PI_4).unwrap(), 0).unwrap();
        assert_amp(&out, Coin::Up, 0, c(FRAC_1_SQRT_2, 0.0));
        assert_amp(&out, Coin::Down, 0, c(0.0, -FRAC_1_SQRT_2));
    }

    #[test]
    fn temporal_coin_out_of_range() {
        let field = CoinField::temporal(vec![0.1, 0.2]).unwrap();
        assert!(matches!(apply_coin(&up0(2), &field, 2), Err(WalkError::Domain(_))));
    }

    #[test]
    fn spatial_field_must_match_lattice() {
        let field = CoinField::spatial(vec![0.1; 3]).unwrap();
        assert!(apply_coin(&up0(2), &field, 0).is_err());
        assert!(CoinField::spatial(vec![0.1; 4]).is_err());
    }

    #[test]
    fn field_rejects_out_of_range_angles() {
        assert!(CoinField::uniform(-0.1).is_err());
        assert!(CoinField::temporal(vec![0.1, 1.6]).is_err());
        assert!(CoinField::uniform(FRAC_PI_2).is_ok());
    }

    #[test]
    fn shift_moves_each_component() {
        let out = apply_shift(&up0(2)).unwrap();
        assert_amp(&out, Coin::Up, 1, c(1.0, 0.0));
        assert_amp(&out, Coin::Up, 0, c(0.0, 0.0));

        let mut s = WalkState::<f64>::zeros(2);
        s.set_amplitude(Coin::Down, 0, c(1.0, 0.0)).unwrap();
        let out = apply_shift(&s).unwrap();
        assert_amp(&out, Coin::Down, -1, c(1.0, 0.0));
        assert_amp(&out, Coin::Down, 0, c(0.0, 0.0));
    }

    #[test]
    fn shift_is_linear() {
        let s = make_initial_state::<f64>(&InitialStateSpec::new(FRAC_PI_4, 0.0), 2).unwrap();
        let out = apply_shift(&s).unwrap();
        assert_amp(&out, Coin::Up, 1, c(FRAC_1_SQRT_2, 0.0));
        assert_amp(&out, Coin::Down, -1, c(FRAC_1_SQRT_2, 0.0));
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_overflow_at_edge() {
        let mut s = WalkState::<f64>::zeros(1);
        s.set_amplitude(Coin::Up, 1, c(1.0, 0.0)).unwrap();
        assert!(matches!(apply_shift(&s), Err(WalkError::Overflow(_))));
        assert!(apply_shift(&up0(0)).is_err());
    }

    #[test]
    fn step_composes_coin_and_shift() {
        let field = CoinField::uniform(FRAC_PI_4).unwrap();
        let out = step(&up0(2), &field, 0).unwrap();
        assert_amp(&out, Coin::Up, 1, c(FRAC_1_SQRT_2, 0.0));
        assert_amp(&out, Coin::Down, -1, c(0.0, -FRAC_1_SQRT_2));

        let out = step(&up0(2), &CoinField::uniform(0.0).unwrap(), 0).unwrap();
        assert_amp(&out, Coin::Up, 1, c(1.0, 0.0));
    }

    #[test]
    fn walker_matches_stepwise_composition() {
        let spec = InitialStateSpec::new(0.7, 0.3);
        let field = CoinField::spatial((0..13).map(|i| 0.1 * i as f64).collect()).unwrap();
        let traj = evolve_with_field(&spec, &field, 6).unwrap();
        let mut s = make_initial_state::<f64>(&spec, 6).unwrap();
        for (t, expected) in traj.iter().enumerate() {
            assert_eq!(&s, expected);
            if t < 6 {
                s = step(&s, &field, t).unwrap();
            }
        }
    }

    #[test]
    fn ballistic_walk() {
        let traj = evolve::<f64>(
            &InitialStateSpec::new(0.0, 0.0),
            &DisorderConfig::ordered(0.0),
            5,
            &mut WalkRng::from_seed(1),
        )
        .unwrap();
        assert_eq!(traj.len(), 6);
        assert_amp(&traj[5], Coin::Up, 5, c(1.0, 0.0));
    }

    #[test]
    fn ordered_trajectory_is_unitary() {
        let traj = evolve::<f64>(
            &InitialStateSpec::new(FRAC_PI_4, FRAC_PI_2),
            &DisorderConfig::default(),
            3,
            &mut WalkRng::from_seed(0),
        )
        .unwrap();
        assert_eq!(traj.len(), 4);
        for s in &traj {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spatial_evolution_is_reproducible() {
        let spec = InitialStateSpec::new(FRAC_PI_4, FRAC_PI_2);
        let cfg = DisorderConfig::new(DisorderKind::Spatial, 1.0);
        let a = evolve::<f64>(&spec, &cfg, 4, &mut WalkRng::from_seed(99)).unwrap();
        let b = evolve::<f64>(&spec, &cfg, 4, &mut WalkRng::from_seed(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_none_is_uniform_base() {
        let cfg = DisorderConfig {
            strength: 0.7,
            ..DisorderConfig::default()
        };
        let f = sample_angles(&cfg, 10, &mut WalkRng::from_seed(3)).unwrap();
        assert_eq!(f, CoinField::Uniform(FRAC_PI_4));
    }

    #[test]
    fn sampling_zero_strength_spatial() {
        let cfg = DisorderConfig::new(DisorderKind::Spatial, 0.0);
        let f = sample_angles(&cfg, 200, &mut WalkRng::from_seed(3)).unwrap();
        assert_eq!(f.angles().len(), 401);
        assert!(f.angles().iter().all(|&a| a == FRAC_PI_4));
    }

    #[test]
    fn sampling_full_strength_temporal_mean() {
        let cfg = DisorderConfig::new(DisorderKind::Temporal, 1.0);
        let f = sample_angles(&cfg, 200, &mut WalkRng::from_seed(11)).unwrap();
        let a = f.angles();
        assert_eq!(a.len(), 200);
        assert!(a.iter().all(|&x| (0.0..=FRAC_PI_2).contains(&x)));
        let mean = a.iter().sum::<f64>() / 200.0;
        // sd of U[0, pi/2] is pi/sqrt(48)
        let tol = 3.0 * std::f64::consts::PI / (48.0f64 * 200.0).sqrt();
        assert!((mean - FRAC_PI_4).abs() < tol, "mean {mean}");
    }

    #[test]
    fn invalid_strength_names_key() {
        let cfg = DisorderConfig::new(DisorderKind::Temporal, 1.5);
        match sample_angles(&cfg, 3, &mut WalkRng::from_seed(0)) {
            Err(WalkError::Config { key, .. }) => assert_eq!(key, "disorder.strength"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quenched_and_annealed_accessors() {
        let mut rng = WalkRng::from_seed(5);
        let spatial = sample_angles(&DisorderConfig::new(DisorderKind::Spatial, 1.0), 4, &mut rng).unwrap();
        for x in -4..=4 {
            let first = spatial.angle(x, 0).unwrap();
            assert!((0..4).all(|t| spatial.angle(x, t).unwrap() == first));
        }
        let temporal = sample_angles(&DisorderConfig::new(DisorderKind::Temporal, 1.0), 4, &mut rng).unwrap();
        for t in 0..4 {
            let first = temporal.angle(-4, t).unwrap();
            assert!((-4..=4).all(|x| temporal.angle(x, t).unwrap() == first));
        }
    }

    #[test]
    fn single_precision_walk_stays_normalized() {
        let field = CoinField::<f32>::uniform(std::f32::consts::FRAC_PI_4).unwrap();
        let traj = evolve_with_field(&InitialStateSpec::new(FRAC_PI_4, FRAC_PI_2), &field, 200).unwrap();
        assert!((traj[200].norm_sqr() - 1.0).abs() < 1e-4);
    }
}
