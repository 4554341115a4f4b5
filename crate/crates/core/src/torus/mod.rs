//! Finite Fourier algebra on the torus `T^{2n}`: trigonometric polynomials,
//! relative 1-forms, the exterior derivative and the scale-indexed norms of
//! the annuli `U_s`.

mod form;
mod index;
mod norm;
mod poly;

pub use form::{exterior_derivative, ClosednessDefect, RelativeOneForm, TwoForm};
pub use index::MultiIndex;
pub use norm::{annulus_moment, l2_norm, Majorant, Scale};
pub use poly::{TrigPolynomial, PRUNE_THRESHOLD};
