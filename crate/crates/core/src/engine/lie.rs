use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::symplectic::{hamiltonian_field, lie_derivative_truncated, SymplecticParameters};
use crate::torus::{Majorant, RelativeOneForm, Scale, TrigPolynomial};

/// Consecutive growing terms after which a Lie series is declared divergent.
const GROWTH_LIMIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieSeriesOptions {
    pub tol: f64,
    pub max_order: usize,
    pub degree_cap: u64,
}

/// Result of `e^{L_{X_g}} γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiePullback {
    pub form: RelativeOneForm,
    /// Highest order `m` whose term `L^m γ / m!` was added.
    pub order: usize,
    /// Majorant norm at the target scale of everything discarded by the
    /// degree cap, summed over orders.
    pub dropped_tail: f64,
}

/// `Σ_{m>=1} L_{X_g}^m γ / m!`, the change of `γ` under the time-one flow.
pub fn lie_series_increment(
    g: &TrigPolynomial,
    delta: &SymplecticParameters,
    gamma: &RelativeOneForm,
    s_target: Scale,
    opts: &LieSeriesOptions,
) -> Result<LiePullback> {
    let mut total = RelativeOneForm::zero(gamma.dim())?;
    if g.is_zero() {
        return Ok(LiePullback {
            form: total,
            order: 0,
            dropped_tail: 0.0,
        });
    }
    let field = hamiltonian_field(g, delta)?;
    let mut term = gamma.clone();
    let mut previous_norm = term.majorant_norm(s_target);
    let mut growth = 0;
    let mut dropped_tail = 0.0;

    for m in 1..=opts.max_order {
        let (next, dropped) = lie_derivative_truncated(&field, &term, opts.degree_cap)?;
        let inv_m = Complex64::new(1.0 / m as f64, 0.0);
        term = next.scaled(inv_m);
        dropped_tail += dropped.majorant_norm(s_target) / m as f64;
        let norm = term.majorant_norm(s_target);
        total = total.checked_add(&term)?;

        if norm < opts.tol {
            return Ok(LiePullback {
                form: total,
                order: m,
                dropped_tail,
            });
        }
        if norm > previous_norm {
            growth += 1;
            if growth >= GROWTH_LIMIT {
                return Err(KamError::LieSeriesDivergence {
                    consecutive: growth,
                    last_norm: norm,
                });
            }
        } else {
            growth = 0;
        }
        previous_norm = norm;
    }
    Err(KamError::LieSeriesNonConvergence {
        max_order: opts.max_order,
        last_norm: previous_norm,
    })
}

/// Lie series `Σ_m L_{X_g}^m γ / m!` with products truncated at the degree
/// cap, stopped once a term falls below `opts.tol` at `s_target`.
pub fn exp_lie_pullback(
    g: &TrigPolynomial,
    delta: &SymplecticParameters,
    gamma: &RelativeOneForm,
    s_target: Scale,
    opts: &LieSeriesOptions,
) -> Result<LiePullback> {
    let inc = lie_series_increment(g, delta, gamma, s_target, opts)?;
    Ok(LiePullback {
        form: gamma.checked_add(&inc.form)?,
        ..inc
    })
}
