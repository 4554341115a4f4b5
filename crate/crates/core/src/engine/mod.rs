//! Newton-type KAM iteration conjugating the deformed form `α + tβ` back to
//! a standard form `Σ τ'_k dx_k`.
//!
//! Each step at level `n` solves the homological equation truncated at
//! `|I|_1 <= 2^n`, absorbs the mean of the defect into `τ`, and pulls the
//! form back along the time-one flow of the Hamiltonian field of the
//! (negated) potential. Norms shrink from `s_0` towards `s_∞` along
//! `s_n = s_∞ + (s_0 - s_∞) 2^{-n}`.

mod lie;

pub use lie::{exp_lie_pullback, lie_series_increment, LiePullback, LieSeriesOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{
    class_membership, frequency_map, ArithmeticClassSpec, BrunoSequence, FrequencyVector, IndexConvention,
    ParameterPoint, SigmaOptions,
};
use crate::error::{KamError, Result};
use crate::homological::{solve, DEFAULT_DIVISOR_FLOOR};
use crate::symplectic::SymplecticParameters;
use crate::torus::{Majorant, MultiIndex, RelativeOneForm, Scale, TrigPolynomial};

/// Default tolerance for the closedness checks inside the iteration.
pub const DEFAULT_CLOSED_TOL: f64 = 1e-10;

fn default_degree_cap() -> u64 {
    64
}
fn default_max_lie_order() -> usize {
    60
}
fn default_closed_tol() -> f64 {
    DEFAULT_CLOSED_TOL
}
fn default_divisor_floor() -> f64 {
    DEFAULT_DIVISOR_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub delta: Vec<f64>,
    pub tau: Vec<f64>,
    pub bruno: BrunoSequence,
    #[serde(default)]
    pub convention: IndexConvention,
    pub perturbation: RelativeOneForm,
    pub t: f64,
    pub s0: f64,
    pub s_inf: f64,
    pub max_iterations: u32,
    #[serde(default = "default_degree_cap")]
    pub degree_cap: u64,
    pub lie_tol: f64,
    pub convergence_tol: f64,
    #[serde(default = "default_max_lie_order")]
    pub max_lie_order: usize,
    #[serde(default = "default_closed_tol")]
    pub closed_tol: f64,
    #[serde(default = "default_divisor_floor")]
    pub divisor_floor: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KamError::InvalidParameter(msg));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if self.delta.len() != self.n {
            return bad(format!("delta must have n = {} entries, got {}", self.n, self.delta.len()));
        }
        ParameterPoint::new(self.delta.clone(), self.tau.clone())?;
        if self.perturbation.dim() != 2 * self.n {
            return bad(format!(
                "perturbation has dimension {}, expected {}",
                self.perturbation.dim(),
                2 * self.n
            ));
        }
        if !self.perturbation.is_closed(self.closed_tol) {
            return bad("perturbation is not a closed form".into());
        }
        if self.perturbation.mean().iter().any(|m| m.im.abs() > self.closed_tol) {
            return bad("perturbation mean must be real".into());
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return bad(format!("t = {} must be finite and >= 0", self.t));
        }
        if !(0.0 < self.s_inf && self.s_inf < self.s0 && self.s0 < 1.0) {
            return bad(format!("scales must satisfy 0 < s_inf < s0 < 1, got s_inf = {}, s0 = {}", self.s_inf, self.s0));
        }
        for (name, v) in [
            ("lie_tol", self.lie_tol),
            ("convergence_tol", self.convergence_tol),
            ("closed_tol", self.closed_tol),
            ("divisor_floor", self.divisor_floor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if self.max_lie_order == 0 {
            return bad("max_lie_order must be >= 1".into());
        }
        self.bruno.validate()
    }

    pub fn symplectic(&self) -> Result<SymplecticParameters> {
        SymplecticParameters::new(self.delta.clone())
    }

    /// `s_n = s_∞ + (s_0 - s_∞) 2^{-n}`.
    pub fn scale_at(&self, level: u32) -> Scale {
        let s = self.s_inf + (self.s0 - self.s_inf) * 0.5f64.powi(level as i32);
        Scale::new(s).expect("validated scales stay inside (s_inf, s0]")
    }

    pub fn lie_options(&self) -> LieSeriesOptions {
        LieSeriesOptions {
            tol: self.lie_tol,
            max_order: self.max_lie_order,
            degree_cap: self.degree_cap,
        }
    }

    /// `α + tβ` at the initial parameters.
    pub fn initial_form(&self) -> Result<RelativeOneForm> {
        RelativeOneForm::constant_real(&self.tau)?.checked_add(&self.perturbation.scaled(Complex64::new(self.t, 0.0)))
    }
}

/// Iterate `(τ_n, D_n)` with current form `Σ τ_n dx + D_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub tau: Vec<f64>,
    pub defect: RelativeOneForm,
    pub level: u32,
    pub scale: Scale,
    pub cumulative_shift: Vec<f64>,
    /// Dropped-tail slack inherited from the step that produced `defect`.
    pub slack: f64,
}

impl IterationState {
    pub fn initial(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(IterationState {
            tau: config.tau.clone(),
            defect: config.perturbation.scaled(Complex64::new(config.t, 0.0)),
            level: 0,
            scale: config.scale_at(0),
            cumulative_shift: vec![0.0; config.tau.len()],
            slack: 0.0,
        })
    }

    pub fn current_form(&self) -> Result<RelativeOneForm> {
        RelativeOneForm::constant_real(&self.tau)?.checked_add(&self.defect)
    }

    /// Defect norm at the current scale plus inherited slack.
    pub fn defect_norm(&self) -> f64 {
        self.defect.majorant_norm(self.scale) + self.slack
    }

    pub fn frequency(&self, delta: &[f64]) -> Result<FrequencyVector> {
        Ok(frequency_map(&ParameterPoint::new(delta.to_vec(), self.tau.clone())?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub level: u32,
    pub scale: f64,
    pub next_scale: f64,
    pub truncation: u64,
    pub defect_before: f64,
    pub defect_after: f64,
    pub potential_norm: f64,
    pub counterterm: Vec<f64>,
    pub lie_order: usize,
    pub dropped_tail: f64,
    /// Norm at `next_scale` of the non-closed rounding residue removed
    /// from the defect.
    #[serde(default)]
    pub closure_correction: f64,
    /// Potential whose Hamiltonian flow was applied in this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<TrigPolynomial>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    MaxIterations,
    Diverged,
    Resonant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceInfo {
    pub level: u32,
    pub witness: MultiIndex,
    pub divisor: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub verdict: Verdict,
    pub steps: Vec<StepRecord>,
    pub final_level: u32,
    pub final_scale: f64,
    pub final_defect: f64,
    pub final_tau: Vec<f64>,
    pub total_shift: Vec<f64>,
    pub fitted_exponent: Option<f64>,
    pub resonance: Option<ResonanceInfo>,
    pub message: Option<String>,
}

/// One Newton step from `state`.
pub fn kam_step(state: &IterationState, config: &RunConfig) -> Result<(IterationState, StepRecord)> {
    let delta = config.symplectic()?;
    let phi = state.frequency(&config.delta)?;
    let defect_before = state.defect_norm();
    let next_scale = config.scale_at(state.level + 1);

    let sol = solve(&state.defect, state.level, &phi, &delta, config.closed_tol, config.divisor_floor)?;
    let shift: Vec<f64> = sol.decomposition.counterterm.iter().map(|m| m.re).collect();

    // counterterm first: τ ← τ + m, D ← D - m
    let tau: Vec<f64> = state.tau.iter().zip(&shift).map(|(a, b)| a + b).collect();
    let cumulative_shift: Vec<f64> = state.cumulative_shift.iter().zip(&shift).map(|(a, b)| a + b).collect();
    let defect = state.defect.checked_sub(&RelativeOneForm::constant_real(&shift)?)?;

    // L_{X_g} α + m = R to first order, so the flow of X_{-g} removes R.
    let applied = sol.decomposition.potential.scaled(Complex64::new(-1.0, 0.0));
    let form = RelativeOneForm::constant_real(&tau)?.checked_add(&defect)?;
    let inc = lie_series_increment(&applied, &delta, &form, next_scale, &config.lie_options())?;
    // rounding leaves a non-closed residue that no later solve can reach
    let (defect, residue) = defect.checked_add(&inc.form)?.closed_projection();

    let next = IterationState {
        tau,
        defect,
        level: state.level + 1,
        scale: next_scale,
        cumulative_shift,
        slack: inc.dropped_tail,
    };
    let record = StepRecord {
        level: state.level,
        scale: state.scale.value(),
        next_scale: next_scale.value(),
        truncation: 1u64 << state.level,
        defect_before,
        defect_after: next.defect_norm(),
        potential_norm: applied.majorant_norm(state.scale),
        counterterm: shift,
        lie_order: inc.order,
        dropped_tail: inc.dropped_tail,
        closure_correction: residue.majorant_norm(next_scale),
        potential: Some(applied),
    };
    Ok((next, record))
}

/// Least-squares slope of `ln d_{j+1}` against `ln d_j` over the last
/// (up to) four consecutive pairs of positive defects.
pub fn fitted_exponent(defects: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = defects
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    let tail = &pairs[pairs.len().saturating_sub(4)..];
    if tail.len() < 2 {
        return None;
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Number of consecutive defect increases that ends a run as diverged.
const DIVERGENCE_STREAK: usize = 3;

/// Runs the iteration until the defect drops below `convergence_tol` or a
/// terminal condition is hit. Only invalid configurations and resource
/// limits of the class check are returned as errors; every other outcome
/// is encoded in the verdict.
pub fn run(config: &RunConfig) -> Result<IterationReport> {
    let mut state = IterationState::initial(config)?;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut increases = 0;
    let sigma_opts = SigmaOptions::default();

    let (verdict, resonance, message) = loop {
        let defect = state.defect_norm();
        if defect < config.convergence_tol {
            break (Verdict::Converged, None, None);
        }
        if let Some(prev) = steps.last() {
            if defect > prev.defect_before {
                increases += 1;
                if increases >= DIVERGENCE_STREAK {
                    break (Verdict::Diverged, None, Some(format!("defect grew {increases} times in a row")));
                }
            } else {
                increases = 0;
            }
        }
        if steps.len() as u32 >= config.max_iterations {
            break (Verdict::MaxIterations, None, None);
        }

        let phi = state.frequency(&config.delta)?;
        let spec = ArithmeticClassSpec::new(config.bruno.clone(), state.level, config.convention);
        let membership = class_membership(&phi, &spec, &sigma_opts)?;
        if let Some(f) = membership.failure {
            let info = ResonanceInfo {
                level: state.level,
                divisor: f.witness.dot(phi.entries()),
                witness: f.witness,
                bound: f.bound,
            };
            let msg = format!("σ_{} = {:e} does not exceed a_{} = {:e}", f.j, f.sigma, f.j, f.bound);
            break (Verdict::Resonant, Some(info), Some(msg));
        }

        match kam_step(&state, config) {
            Ok((next, record)) => {
                steps.push(record);
                state = next;
            }
            Err(KamError::Resonance { witness, divisor, floor }) => {
                let info = ResonanceInfo {
                    level: state.level,
                    witness,
                    divisor,
                    bound: floor,
                };
                break (Verdict::Resonant, Some(info), Some("small divisor below floor".into()));
            }
            Err(e @ (KamError::LieSeriesDivergence { .. } | KamError::LieSeriesNonConvergence { .. })) => {
                break (Verdict::Diverged, None, Some(e.to_string()));
            }
            Err(KamError::NotClosed { defect, .. }) => {
                break (Verdict::Diverged, None, Some(format!("defect lost closedness ({defect:e})")));
            }
            Err(e) => return Err(e),
        }
    };

    let mut defects: Vec<f64> = steps.iter().map(|s| s.defect_before).collect();
    let final_defect = state.defect_norm();
    defects.push(final_defect);
    Ok(IterationReport {
        verdict,
        fitted_exponent: if verdict == Verdict::Converged { fitted_exponent(&defects) } else { None },
        steps,
        final_level: state.level,
        final_scale: state.scale.value(),
        final_defect,
        final_tau: state.tau,
        total_shift: state.cumulative_shift,
        resonance,
        message,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyCheck {
    pub defect: f64,
    pub pass: bool,
}

/// Replays the stored flows on a fresh `α + tβ` and measures the distance
/// to `Σ τ_final dx` at the report's final scale.
pub fn verify_conjugacy(report: &IterationReport, config: &RunConfig, tol: f64) -> Result<ConjugacyCheck> {
    if report.verdict != Verdict::Converged {
        return Err(KamError::InvalidReport(format!("verdict is {:?}, not converged", report.verdict)));
    }
    let delta = config.symplectic()?;
    let mut form = config.initial_form()?;
    for step in &report.steps {
        let potential = step
            .potential
            .as_ref()
            .ok_or_else(|| KamError::InvalidReport(format!("step {} has no stored potential", step.level)))?;
        let inc = lie_series_increment(potential, &delta, &form, Scale::new(step.next_scale)?, &config.lie_options())?;
        form = form.checked_add(&inc.form)?;
    }
    let target = RelativeOneForm::constant_real(&report.final_tau)?;
    let defect = form.checked_sub(&target)?.majorant_norm(Scale::new(report.final_scale)?);
    Ok(ConjugacyCheck {
        defect,
        pass: defect <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::exterior_derivative;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn golden_config(t: f64) -> RunConfig {
        let g = TrigPolynomial::from_terms(
            2,
            [
                (MultiIndex::from([1, 0]), c(1.0, 0.0)),
                (MultiIndex::from([0, 1]), c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let beta = exterior_derivative(&g)
            .checked_add(&RelativeOneForm::constant_real(&[0.3, 0.0]).unwrap())
            .unwrap();
        RunConfig {
            n: 1,
            delta: vec![1.0],
            tau: vec![-1.6180339887, 1.0],
            bruno: BrunoSequence::geometric(0.01, 0.5).unwrap(),
            convention: IndexConvention::PerLevel,
            perturbation: beta,
            t,
            s0: 0.4,
            s_inf: 0.2,
            max_iterations: 8,
            degree_cap: 64,
            lie_tol: 1e-30,
            convergence_tol: 1e-20,
            max_lie_order: 60,
            closed_tol: DEFAULT_CLOSED_TOL,
            divisor_floor: DEFAULT_DIVISOR_FLOOR,
        }
    }

    #[test]
    fn scale_schedule() {
        let cfg = golden_config(1e-3);
        assert_eq!(cfg.scale_at(0).value(), 0.4);
        assert!((cfg.scale_at(1).value() - 0.3).abs() < 1e-15);
        assert!(cfg.scale_at(30).value() > 0.2);
    }

    #[test]
    fn trivial_deformation_converges_immediately() {
        let report = run(&golden_config(0.0)).unwrap();
        assert_eq!(report.verdict, Verdict::Converged);
        assert!(report.steps.is_empty());
        assert_eq!(report.final_defect, 0.0);
        assert_eq!(report.total_shift, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_defect_step_only_advances_level() {
        let cfg = golden_config(0.0);
        let state = IterationState::initial(&cfg).unwrap();
        let (next, rec) = kam_step(&state, &cfg).unwrap();
        assert_eq!(next.tau, state.tau);
        assert!(next.defect.is_zero());
        assert_eq!(next.level, 1);
        assert!(next.scale.value() < state.scale.value());
        assert_eq!(rec.lie_order, 0);
    }

    #[test]
    fn pure_mean_defect_is_absorbed() {
        let mut cfg = golden_config(1e-3);
        cfg.perturbation = RelativeOneForm::constant_real(&[0.3, -0.1]).unwrap();
        let state = IterationState::initial(&cfg).unwrap();
        let (next, _) = kam_step(&state, &cfg).unwrap();
        assert!(next.defect.is_zero());
        assert_eq!(next.cumulative_shift, vec![0.3 * 1e-3, -0.1 * 1e-3]);
    }

    #[test]
    fn single_mode_step_is_quadratic() {
        // post-step defect / pre-step defect² stays put when t shrinks 10x
        let ratio = |t: f64| {
            let mut cfg = golden_config(t);
            cfg.perturbation = cfg.perturbation.without_mean();
            let state = IterationState::initial(&cfg).unwrap();
            let (_, rec) = kam_step(&state, &cfg).unwrap();
            assert!(rec.defect_after > 0.0);
            rec.defect_after / rec.defect_before.powi(2)
        };
        let (a, b) = (ratio(1e-3), ratio(1e-4));
        assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
    }

    #[test]
    fn resonant_frequency_is_rejected_when_mode_enters_range() {
        let mut cfg = golden_config(1e-3);
        // φ = (τ_2/δ, -τ_1/δ) = (1, 1)
        cfg.tau = vec![-1.0, 1.0];
        cfg.perturbation = exterior_derivative(
            &TrigPolynomial::from_terms(
                2,
                [
                    (MultiIndex::from([1, 0]), c(1.0, 0.0)),
                    (MultiIndex::from([0, 2]), c(1.0, 0.0)),
                ],
            )
            .unwrap(),
        );
        let report = run(&cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Resonant);
        let info = report.resonance.unwrap();
        assert_eq!(info.level, 1);
        assert_eq!(info.witness.l1_norm(), 2);
        assert_eq!(info.divisor, 0.0);
    }

    #[test]
    fn golden_run_converges_and_replays() {
        let cfg = golden_config(1e-3);
        let report = run(&cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Converged, "{report:?}");
        assert!(report.final_defect <= 1e-9);
        assert!(report.steps.len() >= 4);
        assert!(report.fitted_exponent.unwrap() >= 1.5, "{:?}", report.fitted_exponent);
        let check = verify_conjugacy(&report, &cfg, 1e-8).unwrap();
        assert!(check.pass, "{check:?}");

        let mut tampered = report.clone();
        tampered.steps[0].potential = Some(TrigPolynomial::zero(2).unwrap());
        assert!(!verify_conjugacy(&tampered, &cfg, 1e-8).unwrap().pass);

        let mut stripped = report;
        stripped.steps[0].potential = None;
        assert!(matches!(verify_conjugacy(&stripped, &cfg, 1e-8), Err(KamError::InvalidReport(_))));
    }

    #[test]
    fn fitted_exponent_of_exact_quadratic_sequence() {
        let d: Vec<f64> = (0..5).map(|j| 1e-2f64.powi(1 << j)).collect();
        assert!((fitted_exponent(&d).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(fitted_exponent(&[1e-3, 1e-6]), None);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = golden_config(1e-3);
        cfg.s_inf = 0.5;
        assert!(run(&cfg).is_err());
        let mut cfg = golden_config(1e-3);
        cfg.perturbation = RelativeOneForm::from_components(vec![
            TrigPolynomial::monomial([0, 1].into(), c(1.0, 0.0)).unwrap(),
            TrigPolynomial::zero(2).unwrap(),
        ])
        .unwrap();
        assert!(run(&cfg).is_err());
        let mut cfg = golden_config(1e-3);
        cfg.delta = vec![0.0];
        assert!(run(&cfg).is_err());
    }
}
