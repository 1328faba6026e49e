//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Angular frequency of a sampled oscillation from its zero crossings.
///
/// Crossings are located by linear interpolation between samples; successive
/// crossings are half a period apart.
pub fn zero_crossing_frequency(samples: &[f64], dt: f64) -> Option<f64> {
    let mut crossings = Vec::new();
    for (i, w) in samples.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if a == 0.0 {
            crossings.push(i as f64 * dt);
        } else if a * b < 0.0 {
            crossings.push((i as f64 + a / (a - b)) * dt);
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(PI * (crossings.len() - 1) as f64 / span)
}

/// `X_j = Σ_l x_l e^{-2πi jl/N}`, computed term by term.
pub fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(l, &v)| {
                    let phase = -2.0 * PI * ((j * l) % n) as f64 / n as f64;
                    Complex64::from_polar(v, phase)
                })
                .sum()
        })
        .collect()
}

/// Chain frequency for label `n` on `n_sites` sites.
pub fn omega_label(n: i64, n_sites: usize, kappa: f64, m: f64) -> f64 {
    2.0 * (kappa / m).sqrt() * (PI * n as f64 / n_sites as f64).sin().abs()
}

/// Every `(n1, n2, n3, g)` with `n1 ≤ n2`, no zero mode, `n1 + n2 = n3 + gN`
/// and `|ω1 + ω2 − ω3| ≤ tol`, by exhaustive search over label triples.
pub fn brute_force_triples(
    n_sites: usize,
    kappa: f64,
    m: f64,
    tol: f64,
) -> BTreeSet<(i64, i64, i64, i64)> {
    let n = n_sites as i64;
    let labels: Vec<i64> = (-((n - 1) / 2)..=n / 2).filter(|&l| l != 0).collect();
    let mut out = BTreeSet::new();
    for &n1 in &labels {
        for &n2 in &labels {
            if n2 < n1 {
                continue;
            }
            for &n3 in &labels {
                let diff = n1 + n2 - n3;
                if diff % n != 0 {
                    continue;
                }
                let d = omega_label(n1, n_sites, kappa, m) + omega_label(n2, n_sites, kappa, m)
                    - omega_label(n3, n_sites, kappa, m);
                if d.abs() <= tol {
                    out.insert((n1, n2, n3, diff / n));
                }
            }
        }
    }
    out
}

/// Random basis in `dim` dimensions with `|det| ≥ 0.2`.
pub fn random_basis(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    loop {
        let v: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.5..0.5))
                    .collect()
            })
            .collect();
        if det(&v).abs() >= 0.2 {
            return v;
        }
    }
}

pub fn det(v: &[Vec<f64>]) -> f64 {
    match v.len() {
        1 => v[0][0],
        2 => v[0][0] * v[1][1] - v[0][1] * v[1][0],
        3 => {
            v[0][0] * (v[1][1] * v[2][2] - v[1][2] * v[2][1])
                - v[0][1] * (v[1][0] * v[2][2] - v[1][2] * v[2][0])
                + v[0][2] * (v[1][0] * v[2][1] - v[1][1] * v[2][0])
        }
        _ => panic!("dimension {}", v.len()),
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
