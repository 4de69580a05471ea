//! Optimal taxation with mandatory bailouts for spectrally negative Lévy
//! risk processes.
//!
//! The crate has two halves that check each other:
//!
//! * an analytic layer — exact q-scale functions for Erlang-mixture models
//!   ([`ScaleEvaluator`]), the auxiliary functions `R_γ`, `C`, `Q`, the
//!   optimal tax threshold `b*` and the closed-form value function
//!   ([`tax_optimizer`]);
//! * a pathwise layer — simulation of the Lévy process, the tax-reflection
//!   transform combining loss-carryforward taxation at the running maximum
//!   with Skorokhod reflection at zero ([`path_engine`]), and Monte Carlo
//!   estimation of discounted taxes minus bailout costs ([`monte_carlo`]).
//!
//! Agreement between the two layers, at tolerances driven by explicit
//! truncation and discretisation bounds, is the crate's acceptance story.

pub mod error;
pub mod levy_model;
pub mod monte_carlo;
pub mod path_engine;
pub mod poly;
pub mod quadrature;
pub mod scale_functions;
pub mod tax_optimizer;

pub use error::{Error, Result};
pub use levy_model::{JumpComponent, LevyModel, VariationClass};
pub use monte_carlo::{McConfig, McEstimate, Strategy, SweepVar};
pub use path_engine::{ControlledPath, SamplePath};
pub use scale_functions::ScaleEvaluator;
pub use tax_optimizer::{QuadratureSpec, TaxParams};
