//! Recovering recurrences and differential equations from exact data.

pub mod linsolve;
pub mod multistep;
pub mod multivariate;
pub mod univariate;

pub use multistep::{multi_step_pipeline, MultistepOptions, MultistepResult, Shape};
pub use multivariate::{guess_multivariate_recurrence, MultivariateRecurrence};
pub use univariate::{guess_ode, guess_recurrence, GuessOptions, SearchStrategy};
