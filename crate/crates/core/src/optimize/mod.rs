//! Gradient descent, finite differences and the bright-state optimizer.

pub mod adam;
pub mod anneal;
pub mod bright_state;
pub mod fd_sweep;
pub mod finite_diff;
pub mod linear_fit;

pub use adam::{adam_step, AdamState};
pub use anneal::{annealed_utility, samples_at, AnnealSchedule};
pub use bright_state::{optimize_bright_states, BrightStateConfig, BrightStateResult};
pub use finite_diff::{finite_difference, FiniteDiffResult, Scheme};
pub use linear_fit::{derivative_root_by_linear_fit, fit_line, LinearFit};
pub use fd_sweep::{position_sweep, SweepConfig, SweepRow};
