//! Walker state on the light-cone lattice, the reduced coin state and the
//! closed-form 2x2 Hermitian eigensolver.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::scalar::Real;

/// Internal (coin) basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coin {
    Up = 0,
    Down = 1,
}

/// A 2x2 complex matrix in row-major order.
pub type Matrix2<T> = [[Complex<T>; 2]; 2];

/// Pure state of the walker over `coin x site`, sites `x in [-T, T]`.
///
/// Storage is dense and coin-major: all up amplitudes for sites `-T..=T`
/// followed by all down amplitudes, site `x` at offset `x + T`. The lattice
/// is exactly as wide as the light cone of `T` steps, so a walk of at most
/// `T` steps never reaches an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState<T> {
    steps_capacity: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> WalkState<T> {
    /// All-zero amplitudes on the lattice for `steps_capacity` steps.
    /// Not a valid state until amplitudes are set.
    pub fn zeros(steps_capacity: usize) -> Self {
        let len = 2 * (2 * steps_capacity + 1);
        WalkState {
            steps_capacity,
            amps: vec![Complex::new(T::zero(), T::zero()); len],
        }
    }

    pub fn steps_capacity(&self) -> usize {
        self.steps_capacity
    }

    /// Number of lattice sites, `2T + 1`.
    pub fn lattice_len(&self) -> usize {
        2 * self.steps_capacity + 1
    }

    pub fn contains_site(&self, x: i64) -> bool {
        x.unsigned_abs() <= self.steps_capacity as u64
    }

    /// Sites `-T..=T` in storage order.
    pub fn sites(&self) -> impl Iterator<Item = i64> {
        let t = self.steps_capacity as i64;
        -t..=t
    }

    fn offset(&self, x: i64) -> Result<usize> {
        if !self.contains_site(x) {
            return Err(WalkError::Domain(format!(
                "site {x} outside lattice [-{t}, {t}]",
                t = self.steps_capacity
            )));
        }
        Ok((x + self.steps_capacity as i64) as usize)
    }

    pub fn amplitude(&self, coin: Coin, x: i64) -> Result<Complex<T>> {
        let off = self.offset(x)?;
        Ok(self.coin_slice(coin)[off])
    }

    pub fn set_amplitude(&mut self, coin: Coin, x: i64, value: Complex<T>) -> Result<()> {
        let off = self.offset(x)?;
        self.coin_slice_mut(coin)[off] = value;
        Ok(())
    }

    /// Amplitudes of one coin component over all sites.
    pub fn coin_slice(&self, coin: Coin) -> &[Complex<T>] {
        let n = self.lattice_len();
        match coin {
            Coin::Up => &self.amps[..n],
            Coin::Down => &self.amps[n..],
        }
    }

    pub fn coin_slice_mut(&mut self, coin: Coin) -> &mut [Complex<T>] {
        let n = self.lattice_len();
        match coin {
            Coin::Up => &mut self.amps[..n],
            Coin::Down => &mut self.amps[n..],
        }
    }

    pub(crate) fn split_mut(&mut self) -> (&mut [Complex<T>], &mut [Complex<T>]) {
        let n = self.lattice_len();
        self.amps.split_at_mut(n)
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    /// Squared l2 norm over every amplitude.
    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.steps_capacity != other.steps_capacity {
            return Err(WalkError::Domain(format!(
                "lattice mismatch: {} vs {} steps",
                self.steps_capacity, other.steps_capacity
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Largest `|x|` carrying a non-zero amplitude, `None` for the zero vector.
    pub fn support_radius(&self) -> Option<u64> {
        let zero = Complex::new(T::zero(), T::zero());
        let n = self.lattice_len();
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != zero)
            .map(|(i, _)| ((i % n) as i64 - self.steps_capacity as i64).unsigned_abs())
            .max()
    }

    /// Returns a validation error unless the squared norm is one within the
    /// precision's norm tolerance.
    pub fn check_normalized(&self) -> Result<T> {
        let n = self.norm_sqr();
        if (n - T::one()).abs() > T::norm_tolerance() || !n.is_finite() {
            return Err(WalkError::Validation(format!(
                "state not normalized: squared norm {:?}",
                n
            )));
        }
        Ok(n)
    }

    /// Converts every amplitude to another precision.
    pub fn cast<U: Real>(&self) -> WalkState<U> {
        WalkState {
            steps_capacity: self.steps_capacity,
            amps: self
                .amps
                .iter()
                .map(|a| Complex::new(U::lit(a.re.to_f64().unwrap()), U::lit(a.im.to_f64().unwrap())))
                .collect(),
        }
    }
}

/// Coin preparation `cos(delta)|up> + e^{-i eta} sin(delta)|down>` at site
/// `origin`. Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    pub delta: f64,
    pub eta: f64,
    #[serde(default)]
    pub origin: i64,
}

impl InitialStateSpec {
    pub fn new(delta: f64, eta: f64) -> Self {
        InitialStateSpec {
            delta,
            eta,
            origin: 0,
        }
    }

    /// The coin amplitudes `(up, down)`.
    pub fn coin_amplitudes<T: Real>(&self) -> (Complex<T>, Complex<T>) {
        let delta = T::lit(self.delta);
        let eta = T::lit(self.eta);
        let up = Complex::new(delta.cos(), T::zero());
        let down = Complex::from_polar(delta.sin(), -eta);
        (up, down)
    }
}

pub fn make_initial_state<T: Real>(spec: &InitialStateSpec, steps: usize) -> Result<WalkState<T>> {
    if !spec.delta.is_finite() || !spec.eta.is_finite() {
        return Err(WalkError::Domain("initial angles must be finite".into()));
    }
    let mut state = WalkState::zeros(steps);
    if !state.contains_site(spec.origin) {
        return Err(WalkError::Domain(format!(
            "origin {} outside lattice [-{steps}, {steps}]",
            spec.origin
        )));
    }
    let (up, down) = spec.coin_amplitudes::<T>();
    state.set_amplitude(Coin::Up, spec.origin, up)?;
    state.set_amplitude(Coin::Down, spec.origin, down)?;
    debug_assert!((state.norm_sqr() - T::one()).abs() <= T::norm_tolerance());
    Ok(state)
}

/// Density matrix of the coin alone: Hermitian, unit trace, positive
/// semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoinState<T> {
    rho: Matrix2<T>,
}

impl<T: Real> ReducedCoinState<T> {
    /// Validates the density-matrix invariants at the precision's tolerances.
    pub fn new(rho: Matrix2<T>) -> Result<Self> {
        let state = ReducedCoinState { rho };
        state.check(T::hermitian_tolerance(), T::norm_tolerance(), T::eigen_reject())?;
        Ok(state)
    }

    /// `|psi><psi|` for a normalized coin vector `(up, down)`.
    pub fn pure(up: Complex<T>, down: Complex<T>) -> Result<Self> {
        Self::new([[up * up.conj(), up * down.conj()], [down * up.conj(), down * down.conj()]])
    }

    pub fn matrix(&self) -> &Matrix2<T> {
        &self.rho
    }

    pub fn get(&self, row: Coin, col: Coin) -> Complex<T> {
        self.rho[row as usize][col as usize]
    }

    pub fn trace(&self) -> Complex<T> {
        self.rho[0][0] + self.rho[1][1]
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> (T, T) {
        eig_hermitian_unchecked(&self.rho)
    }

    /// Checks Hermiticity, unit trace and positivity against explicit
    /// tolerances.
    pub fn check(&self, hermitian_tol: T, trace_tol: T, psd_tol: T) -> Result<()> {
        let r = &self.rho;
        let asym = (r[1][0] - r[0][1].conj()).norm();
        if asym > hermitian_tol
            || r[0][0].im.abs() > hermitian_tol
            || r[1][1].im.abs() > hermitian_tol
            || !asym.is_finite()
        {
            return Err(WalkError::Validation(format!("matrix not Hermitian: {r:?}")));
        }
        let tr = self.trace();
        if (tr.re - T::one()).abs() > trace_tol {
            return Err(WalkError::Validation(format!("trace {:?} differs from one", tr.re)));
        }
        let (_, low) = self.eigenvalues();
        if low < -psd_tol {
            return Err(WalkError::Validation(format!(
                "negative eigenvalue {low:?}: not positive semidefinite"
            )));
        }
        Ok(())
    }
}

/// `rho_{cc'} = sum_x psi(c, x) conj(psi(c', x))`, traced over position.
///
/// The result is divided by the squared norm so its trace is one to
/// rounding even when the input norm has drifted within tolerance.
pub fn partial_trace_coin<T: Real>(state: &WalkState<T>) -> Result<ReducedCoinState<T>> {
    let norm = state.check_normalized()?;
    let up = state.coin_slice(Coin::Up);
    let down = state.coin_slice(Coin::Down);
    let mut r00 = T::zero();
    let mut r11 = T::zero();
    let mut r01 = Complex::new(T::zero(), T::zero());
    for (u, d) in up.iter().zip(down) {
        r00 = r00 + u.norm_sqr();
        r11 = r11 + d.norm_sqr();
        r01 = r01 + u * d.conj();
    }
    let zero = T::zero();
    let r00 = r00 / norm;
    let r11 = r11 / norm;
    let r01 = r01.unscale(norm);
    Ok(ReducedCoinState {
        rho: [[Complex::new(r00, zero), r01], [r01.conj(), Complex::new(r11, zero)]],
    })
}

/// Eigenvalues `(tr +- sqrt(tr^2 - 4 det)) / 2` of a Hermitian 2x2 matrix,
/// descending.
pub fn eig_hermitian_2x2<T: Real>(m: &Matrix2<T>) -> Result<(T, T)> {
    let tol = T::hermitian_tolerance();
    let asym = (m[1][0] - m[0][1].conj()).norm();
    if !(asym <= tol && m[0][0].im.abs() <= tol && m[1][1].im.abs() <= tol) {
        return Err(WalkError::Validation(format!("matrix not Hermitian: {m:?}")));
    }
    Ok(eig_hermitian_unchecked(m))
}

fn eig_hermitian_unchecked<T: Real>(m: &Matrix2<T>) -> (T, T) {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1];
    let two = T::lit(2.0);
    // tr^2 - 4 det = (a - d)^2 + 4|b|^2, which cannot go negative.
    let half_gap = ((a - d) / two).hypot(b.norm());
    let mid = (a + d) / two;
    (mid + half_gap, mid - half_gap)
}
