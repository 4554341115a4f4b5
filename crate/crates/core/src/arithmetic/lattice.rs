use serde::{Deserialize, Serialize};

/// Norm used to bound lattice vectors in `σ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeNorm {
    #[default]
    L1,
    LInf,
}

impl LatticeNorm {
    pub fn of(self, v: &[i32]) -> u64 {
        let abs = v.iter().map(|x| x.unsigned_abs() as u64);
        match self {
            LatticeNorm::L1 => abs.sum(),
            LatticeNorm::LInf => abs.max().unwrap_or(0),
        }
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = match acc.checked_mul((n - j) as u128) {
            Some(v) => v / (j + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of integer points (origin included) with norm `<= radius` in `Z^dim`.
pub fn ball_size(dim: usize, radius: u64, norm: LatticeNorm) -> u128 {
    match norm {
        LatticeNorm::L1 => (0..=dim.min(radius as usize) as u64)
            .map(|k| {
                (1u128 << k)
                    .saturating_mul(binomial(dim as u64, k))
                    .saturating_mul(binomial(radius, k))
            })
            .fold(0u128, u128::saturating_add),
        LatticeNorm::LInf => (2 * radius as u128 + 1).saturating_pow(dim as u32),
    }
}

/// Visits every point of the ball in lexicographic order, passing the
/// remaining norm budget for a further coordinate (ℓ1) or the radius (ℓ∞).
pub(crate) fn for_each_in_ball<F>(dim: usize, radius: u64, norm: LatticeNorm, mut visit: F)
where
    F: FnMut(&[i32], u64),
{
    let mut point = vec![0i32; dim];
    recurse(&mut point, 0, radius, norm, &mut visit);
}

fn recurse<F>(point: &mut [i32], depth: usize, budget: u64, norm: LatticeNorm, visit: &mut F)
where
    F: FnMut(&[i32], u64),
{
    if depth == point.len() {
        visit(point, budget);
        return;
    }
    let r = budget as i64;
    for x in -r..=r {
        point[depth] = x as i32;
        let rest = match norm {
            LatticeNorm::L1 => budget - x.unsigned_abs(),
            LatticeNorm::LInf => budget,
        };
        recurse(point, depth + 1, rest, norm, visit);
    }
    point[depth] = 0;
}
