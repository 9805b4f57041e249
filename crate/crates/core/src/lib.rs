//! Interaction-complexity toolkit.
//!
//! * [`symexpr`]: exact polynomial engine shared by every other module
//! * [`concept`]: interaction-concept model and its line-oriented DSL
//! * [`bigi`]: step functions, summation, normalization to interaction steps,
//!   simplification and classification, instantiation
//! * [`klm`]: keystroke-level-model operator times and formulas
//! * [`speed`]: interaction-speed models and time estimates
//! * [`logs`]: event-log loading, IQR filtering and speed tables
//! * [`synth`]: brute-force action-counting oracle and seeded log generator
//! * [`cli`]: the `ixcomplex` command-line front end
//! * [`movie_booking`]: the two movie-booking reference concepts with their
//!   published formulas and measured speed table

pub mod bigi;
pub mod cli;
pub mod concept;
pub mod klm;
pub mod logs;
pub mod movie_booking;
pub mod speed;
pub mod symexpr;
pub mod synth;
mod util;

pub use util::{fmt2, round2};

pub use bigi::{analyze, ActionVector, ComplexityClass, ComplexityReport};
pub use concept::{parse_concept, serialize_concept, ActionKind, InteractionConcept, UserStep};
pub use symexpr::{parse_expr, Binding, Expression};
