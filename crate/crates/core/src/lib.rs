//! One-dimensional discrete-time quantum walks with static or dynamic coin
//! disorder.
//!
//! The walker lives on `coin ⊗ position`. Each step applies the coin
//! rotation `exp(-iθσx)` site by site and then the coin-conditioned shift.
//! The diagnostics look at the coin alone after tracing out position:
//! von Neumann entropy, l1 coherence, trace distance between two initial
//! states and the resulting information backflow, plus the spread of the
//! position distribution.
//!
//! The kernels are generic over the scalar ([`Real`], implemented for `f32`
//! and `f64`); the aliases below fix double precision, which is what the
//! ensemble layer and the CLI use.

pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod measures;
pub mod rng;
pub mod scalar;
pub mod state;

pub use ensemble::{
    run_ensemble, run_ensemble_with_samples, run_trajectory_pair, strength_grid, sweep, theta_grid,
    EnsembleStats, ExperimentConfig, MeasureKind, RealizationMeasures, ScalarStats, SeriesStats,
    SweepPoint, SweepRow, Workers,
};
pub use error::{Result, WalkError};
pub use evolution::{
    apply_coin, apply_shift, evolve, evolve_with_field, sample_angles, sample_coin_field, step,
    AngleDistribution, CoinField, DisorderConfig, DisorderKind, Walker,
};
pub use measures::{
    blp_measure, coherence, cumulative_backflow, entropy, measure_trajectory, position_distribution,
    std_dev, trace_distance, MeasureRecorder, MeasureSeries, PositionDistribution,
    TrajectoryMeasures,
};
pub use rng::{split_seed, WalkRng};
pub use scalar::Real;
pub use state::{
    eig_hermitian_2x2, make_initial_state, partial_trace_coin, Coin, InitialStateSpec, Matrix2,
    ReducedCoinState, WalkState,
};

pub type WalkState64 = WalkState<f64>;
pub type WalkState32 = WalkState<f32>;
pub type ReducedCoinState64 = ReducedCoinState<f64>;
pub type ReducedCoinState32 = ReducedCoinState<f32>;
pub type CoinField64 = CoinField<f64>;
pub type CoinField32 = CoinField<f32>;
pub type Walker64 = Walker<f64>;
pub type MeasureSeries64 = MeasureSeries<f64>;
pub type PositionDistribution64 = PositionDistribution<f64>;
pub type TrajectoryMeasures64 = TrajectoryMeasures<f64>;
