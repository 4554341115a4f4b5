#![allow(dead_code)]

use kamtorus::arithmetic::FrequencyVector;
use kamtorus::torus::{MultiIndex, RelativeOneForm, TrigPolynomial};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sparse polynomial on `T^dim` with modes `|I|_1 <= degree`.
pub fn poly(dim: usize, degree: i32, max_terms: usize) -> impl Strategy<Value = TrigPolynomial> {
    prop::collection::vec(
        (prop::collection::vec(-degree..=degree, dim), -1.0..1.0f64, -1.0..1.0f64),
        0..=max_terms,
    )
    .prop_map(move |raw| {
        let terms = raw
            .into_iter()
            .filter(|(i, _, _)| i.iter().map(|e| e.abs()).sum::<i32>() <= degree)
            .map(|(i, re, im)| (MultiIndex::new(i), c(re, im)));
        TrigPolynomial::from_terms(dim, terms).unwrap()
    })
}

pub fn nonzero_poly(dim: usize, degree: i32, max_terms: usize) -> impl Strategy<Value = TrigPolynomial> {
    poly(dim, degree, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

/// `m + dG` with real mean `m`.
pub fn closed_form(dim: usize, degree: i32, max_terms: usize) -> impl Strategy<Value = RelativeOneForm> {
    (poly(dim, degree, max_terms), prop::collection::vec(-1.0..1.0f64, dim)).prop_map(|(g, m)| {
        kamtorus::torus::exterior_derivative(&g)
            .checked_add(&RelativeOneForm::constant_real(&m).unwrap())
            .unwrap()
    })
}

pub fn frequency(dim: usize) -> impl Strategy<Value = FrequencyVector> {
    prop::collection::vec((0.05..3.0f64, any::<bool>()), dim)
        .prop_map(|v| FrequencyVector::new(v.into_iter().map(|(x, neg)| if neg { -x } else { x }).collect()).unwrap())
}

fn dot(w: &[f64], i: &[i32]) -> f64 {
    w.iter().zip(i).fold(0.0, |acc, (w, i)| acc + w * *i as f64)
}

/// Exhaustive σ_0..σ_kmax: every point of the cube `[-R, R]^dim`,
/// `R = 2^kmax`, is visited and charged to each level whose ball holds it.
pub fn brute_sigma(omega: &[f64], kmax: u32) -> Vec<f64> {
    let r = 1i32 << kmax;
    let dim = omega.len();
    let mut best = vec![f64::INFINITY; kmax as usize + 1];
    let mut i = vec![-r; dim];
    loop {
        let l1: i32 = i.iter().map(|e| e.abs()).sum();
        if l1 > 0 && l1 <= r {
            let v = dot(omega, &i).abs();
            for (k, b) in best.iter_mut().enumerate() {
                if l1 <= 1 << k && v < *b {
                    *b = v;
                }
            }
        }
        let mut p = 0;
        loop {
            if p == dim {
                return best;
            }
            if i[p] < r {
                i[p] += 1;
                break;
            }
            i[p] = -r;
            p += 1;
        }
    }
}
