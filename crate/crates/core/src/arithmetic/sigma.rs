use serde::{Deserialize, Serialize};

use super::lattice::{ball_size, for_each_in_ball, LatticeNorm};
use super::FrequencyVector;
use crate::error::{KamError, Result};
use crate::torus::MultiIndex;

/// Default cap on the number of lattice points a single σ computation visits.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaOptions {
    pub norm: LatticeNorm,
    pub budget: u128,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        SigmaOptions {
            norm: LatticeNorm::L1,
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// `σ_k(ω)` together with a lattice vector attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaValue {
    pub k: u32,
    pub value: f64,
    pub witness: MultiIndex,
}

fn radius_for_level(k: u32) -> Result<u64> {
    if k >= 62 {
        return Err(KamError::InvalidParameter(format!("level {k} is too large")));
    }
    Ok(1u64 << k)
}

/// `σ_k(ω) = min |<ω, i>|` over nonzero `i ∈ Z^{2n}` with `‖i‖ <= 2^k`.
pub fn sigma(omega: &FrequencyVector, k: u32, opts: &SigmaOptions) -> Result<SigmaValue> {
    let mut profile = sigma_profile(omega, k, opts)?;
    Ok(profile.pop().expect("profile has kmax + 1 entries"))
}

/// `σ_0, …, σ_kmax` from one enumeration.
///
/// Only the first `2n - 1` coordinates are enumerated, restricted to the
/// half-space `i ~ -i`; for each prefix the last coordinate is chosen by
/// rounding, since `|p + ω_last c|` is unimodal in `c`.
pub fn sigma_profile(omega: &FrequencyVector, kmax: u32, opts: &SigmaOptions) -> Result<Vec<SigmaValue>> {
    let w = omega.entries();
    let dim = w.len();
    let radius = radius_for_level(kmax)?;
    let required = ball_size(dim - 1, radius, opts.norm);
    if required > opts.budget {
        return Err(KamError::ResourceExceeded {
            radius,
            required,
            budget: opts.budget,
        });
    }

    let radii: Vec<u64> = (0..=kmax).map(|k| 1u64 << k).collect();
    let last = w[dim - 1];
    let mut best: Vec<(f64, Vec<i32>)> = vec![(f64::INFINITY, Vec::new()); radii.len()];

    for_each_in_ball(dim - 1, radius, opts.norm, |prefix, _| {
        let leading = prefix.iter().copied().find(|&x| x != 0);
        if leading.is_some_and(|x| x < 0) {
            return;
        }
        let prefix_zero = leading.is_none();
        let p = prefix
            .iter()
            .zip(w)
            .fold(0.0, |acc, (&i, &x)| acc + x * i as f64);
        let pnorm = opts.norm.of(prefix);

        for (slot, &r) in best.iter_mut().zip(&radii) {
            if pnorm > r {
                continue;
            }
            let room = match opts.norm {
                LatticeNorm::L1 => r - pnorm,
                LatticeNorm::LInf => r,
            } as i64;
            let lo = if prefix_zero { 1 } else { -room };
            let hi = room;
            if lo > hi {
                continue;
            }
            let centre = if last == 0.0 {
                0
            } else {
                (-p / last).round().clamp(lo as f64 - 1.0, hi as f64 + 1.0) as i64
            };
            for c in [centre - 1, centre, centre + 1] {
                let c = c.clamp(lo, hi);
                let v = (p + last * c as f64).abs();
                if v < slot.0 {
                    let mut witness = prefix.to_vec();
                    witness.push(c as i32);
                    *slot = (v, witness);
                }
            }
        }
    });

    Ok(best
        .into_iter()
        .enumerate()
        .map(|(k, (value, witness))| SigmaValue {
            k: k as u32,
            value,
            witness: MultiIndex::new(witness),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(w: &[f64], k: u32) -> f64 {
        let r = 1i32 << k;
        let mut best = f64::INFINITY;
        // odometer over the cube [-r, r]^dim
        let dim = w.len();
        let mut i = vec![-r; dim];
        loop {
            let l1: i32 = i.iter().map(|x| x.abs()).sum();
            if l1 <= r && i.iter().any(|&x| x != 0) {
                let v = i.iter().zip(w).fold(0.0, |acc, (&a, &b)| acc + b * a as f64).abs();
                best = best.min(v);
            }
            let mut d = 0;
            while d < dim {
                i[d] += 1;
                if i[d] <= r {
                    break;
                }
                i[d] = -r;
                d += 1;
            }
            if d == dim {
                break;
            }
        }
        best
    }

    #[test]
    fn resonant_vector_has_zero_sigma() {
        let w = FrequencyVector::new(vec![1.0, 1.0]).unwrap();
        for k in 0..4 {
            let s = sigma(&w, k, &SigmaOptions::default()).unwrap();
            if k == 0 {
                assert_eq!(s.value, 1.0);
            } else {
                assert_eq!(s.value, 0.0);
                assert_eq!(s.witness.dot(w.entries()).abs(), 0.0);
            }
        }
    }

    #[test]
    fn golden_ratio_values() {
        let w = FrequencyVector::new(vec![1.0, 1.6180339887]).unwrap();
        let p = sigma_profile(&w, 2, &SigmaOptions::default()).unwrap();
        for s in &p {
            assert_eq!(s.value, brute_force(w.entries(), s.k));
        }
        assert_eq!(p[0].value, 1.0);
        assert!((p[1].value - 0.6180339887).abs() < 1e-9);
        assert!((p[2].value - 0.3819660113).abs() < 1e-9);
    }

    #[test]
    fn frequency_map_example() {
        let w = FrequencyVector::new(vec![2.0 / 3.0, -1.0 / 3.0]).unwrap();
        let s = sigma(&w, 0, &SigmaOptions::default()).unwrap();
        assert_eq!(s.value, 1.0 / 3.0);
        assert_eq!(s.witness, MultiIndex::from([0, 1]));
    }

    #[test]
    fn linf_variant_matches_brute_force() {
        let w = FrequencyVector::new(vec![0.3, 1.7]).unwrap();
        let opts = SigmaOptions {
            norm: LatticeNorm::LInf,
            ..Default::default()
        };
        // ℓ∞ ball of radius 2^k: min over |i_j| <= 2^k
        for k in 0..4 {
            let r = 1i32 << k;
            let mut best = f64::INFINITY;
            for a in -r..=r {
                for b in -r..=r {
                    if (a, b) != (0, 0) {
                        best = best.min((0.0 + 0.3 * a as f64 + 1.7 * b as f64).abs());
                    }
                }
            }
            assert_eq!(sigma(&w, k, &opts).unwrap().value, best);
        }
    }

    #[test]
    fn budget_guard_names_the_bound() {
        let w = FrequencyVector::new(vec![1.0, 2.0f64.sqrt(), 3.0f64.sqrt(), 5.0f64.sqrt()]).unwrap();
        let opts = SigmaOptions {
            budget: 1000,
            ..Default::default()
        };
        match sigma(&w, 5, &opts) {
            Err(KamError::ResourceExceeded { radius, budget, .. }) => {
                assert_eq!(radius, 32);
                assert_eq!(budget, 1000);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }
}
