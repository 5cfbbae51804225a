//! Weighted discrepancy with its Erdős–Turán bound, and the power-sum scan
//! over the gap sequence f(n)·conj f(n+1).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::Sieve;
use crate::error::{config, domain, Result};
use crate::multfun::MultFunc;
use crate::sum::{ComplexSum, Neumaier};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub n: usize,
    pub weighted_discrepancy: f64,
    /// (m, bound) for each tested m.
    pub et_bounds: Vec<(usize, f64)>,
    /// |W⁻¹ Σ w_n e(hθ_n)| for h = 1..=max m.
    pub exponential_sums: Vec<f64>,
    pub holds: bool,
}

/// 6/(m+1) + (4/π) Σ_{h ≤ m} (1/h − 1/(m+1)) |S_h| from |S_1|, |S_2|, ….
pub fn et_bound(m: usize, sums: &[f64]) -> f64 {
    assert!(sums.len() >= m);
    let m1 = (m + 1) as f64;
    let tail: Neumaier = (1..=m)
        .map(|h| (1.0 / h as f64 - 1.0 / m1) * sums[h - 1])
        .collect();
    6.0 / m1 + 4.0 / PI * tail.value()
}

/// sup over [a, b) ⊂ [0, 1) of |W⁻¹ Σ_{θ_n ∈ [a,b)} w_n − (b − a)|, computed
/// exactly at the data points, together with the Erdős–Turán bounds.
pub fn weighted_discrepancy(theta: &[f64], w: &[f64], m_list: &[usize]) -> Result<DiscrepancyReport> {
    if theta.is_empty() {
        return Err(domain("empty sequence"));
    }
    if theta.len() != w.len() {
        return Err(domain("sequence and weights differ in length"));
    }
    if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(domain("weights must be positive and finite"));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(domain("non-finite sequence value"));
    }
    let theta: Vec<f64> = theta
        .iter()
        .map(|&t| {
            let r = t.rem_euclid(1.0);
            if r >= 1.0 {
                0.0
            } else {
                r
            }
        })
        .collect();
    let total: Neumaier = w.iter().copied().collect();
    let total = total.value();

    let mut order: Vec<usize> = (0..theta.len()).collect();
    order.sort_by(|&i, &j| theta[i].total_cmp(&theta[j]));
    // G(x) = W⁻¹ W(θ < x) − x; sup |G(b) − G(a)| = max G − min G over the
    // values at and just after each data point, plus G(0) = G(1) = 0.
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut below = Neumaier::new();
    let mut i = 0;
    while i < order.len() {
        let v = theta[order[i]];
        let before = below.value() / total - v;
        let mut j = i;
        while j < order.len() && theta[order[j]] == v {
            below.add(w[order[j]]);
            j += 1;
        }
        let after = below.value() / total - v;
        lo = lo.min(before).min(after);
        hi = hi.max(before).max(after);
        i = j;
    }
    let disc = (hi - lo).clamp(0.0, 1.0);

    let m_max = m_list.iter().copied().max().unwrap_or(0);
    let mut sums = vec![ComplexSum::new(); m_max];
    for (&t, &wn) in theta.iter().zip(w) {
        let z = Complex64::from_polar(1.0, 2.0 * PI * t);
        let mut zk = z;
        for acc in sums.iter_mut() {
            acc.add(wn * zk);
            zk *= z;
        }
    }
    let exponential_sums: Vec<f64> = sums.iter().map(|s| s.value().norm() / total).collect();
    let et_bounds: Vec<(usize, f64)> = m_list
        .iter()
        .map(|&m| (m, et_bound(m, &exponential_sums)))
        .collect();
    let holds = et_bounds.iter().all(|&(_, b)| disc <= b);
    Ok(DiscrepancyReport {
        n: theta.len(),
        weighted_discrepancy: disc,
        et_bounds,
        exponential_sums,
        holds,
    })
}

/// θ_n = arg(f(n)·conj f(n+1))/2π in [0, 1) and w_n = 1/n for n ≤ x.
pub fn gap_angles(f: &MultFunc, x: u64, sieve: &Sieve) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = f.tabulate(sieve, x + 1)?;
    let mut theta = Vec::with_capacity(x as usize);
    let mut w = Vec::with_capacity(x as usize);
    for n in 1..=x as usize {
        let z = table[n] * table[n + 1].conj();
        let a = z
            .angle()
            .ok_or_else(|| domain(format!("f vanishes at {} or {}", n, n + 1)))?;
        theta.push(a);
        w.push(1.0 / n as f64);
    }
    Ok((theta, w))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeLogReport {
    pub epsilon: f64,
    pub x: u64,
    pub n_cap: u64,
    pub delta: f64,
    pub best_k: u64,
    pub best_value: f64,
    /// δ log x.
    pub threshold: f64,
    pub exceeds: bool,
}

/// N = ⌈12π(⌊2/ε⌋ + 1)⌉ and δ = ε / (18 log N).
pub fn largelog_constants(epsilon: f64) -> Result<(u64, f64)> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(config(format!("epsilon must lie in (0, 2], got {epsilon}")));
    }
    let n = (12.0 * PI * ((2.0 / epsilon).floor() + 1.0)).ceil() as u64;
    Ok((n, epsilon / (18.0 * (n as f64).ln())))
}

/// max over 1 ≤ k ≤ N of |Σ_{n ≤ x} (f(n) conj f(n+1))^k / n|; ties go to the smallest k.
pub fn largelog_scan(f: &MultFunc, epsilon: f64, x: u64, sieve: &Sieve) -> Result<LargeLogReport> {
    let (n_cap, delta) = largelog_constants(epsilon)?;
    if x < 2 {
        return Err(config("cutoff must be at least 2"));
    }
    let table = f.tabulate_complex(sieve, x + 1)?;
    let mut sums = vec![ComplexSum::new(); n_cap as usize];
    for n in 1..=x as usize {
        let z = table[n] * table[n + 1].conj();
        let inv = 1.0 / n as f64;
        let mut zk = z;
        for acc in sums.iter_mut() {
            acc.add(zk * inv);
            zk *= z;
        }
    }
    let (mut best_k, mut best_value) = (1u64, -1.0f64);
    for (i, s) in sums.iter().enumerate() {
        let v = s.value().norm();
        if v > best_value {
            best_value = v;
            best_k = i as u64 + 1;
        }
    }
    let threshold = delta * (x as f64).ln();
    Ok(LargeLogReport {
        epsilon,
        x,
        n_cap,
        delta,
        best_k,
        best_value,
        threshold,
        exceeds: best_value >= threshold,
    })
}
