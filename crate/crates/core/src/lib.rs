//! Numerical KAM machinery for quasi-periodic motions on symplectic tori.
//!
//! The crate is organised bottom-up:
//!
//! * [`arithmetic`]: small divisors `σ_k`, Bruno sums, arithmetic classes.
//! * [`torus`]: Fourier algebra, 1-forms and scale norms on `T^{2n}`.
//! * [`symplectic`]: the `δ`-symplectic form, Hamiltonian fields, Lie derivatives.
//! * [`homological`]: the Hadamard operator `ρ` and its truncated quasi-inverses.
//! * [`engine`]: the Newton-type iteration conjugating `α + tβ` back to `α`.
//! * [`diagnostics`]: locality constants and tamedness verdicts.
//! * [`report`]: JSON / CSV emission of iteration reports.

pub mod arithmetic;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod homological;
pub mod report;
pub mod symplectic;
pub mod torus;

pub use error::{KamError, Result};
