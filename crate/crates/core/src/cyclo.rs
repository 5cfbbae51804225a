//! Exact integer combinations of E-th roots of unity, reduced modulo the
//! cyclotomic polynomial Φ_E to a canonical form.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::arith::Factorization;
use crate::unit::UnitValue;

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division by a monic polynomial; panics if not exact.
fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0i64; num.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c != 0 {
            q[i - dd] = c;
            for (j, &d) in den.iter().enumerate() {
                rem[i - dd + j] -= c * d;
            }
        }
    }
    assert!(rem.iter().all(|&c| c == 0), "inexact polynomial division");
    q
}

fn compute_cyclotomic(n: u64) -> Vec<i64> {
    // Φ_n = Π_{d | n} (x^d − 1)^{μ(n/d)}
    let f = Factorization::trial(n);
    let mut num = vec![1i64];
    let mut den = vec![1i64];
    for d in f.divisors() {
        let mu = Factorization::trial(n / d).mobius();
        if mu == 0 {
            continue;
        }
        let mut p = vec![0i64; d as usize + 1];
        p[0] = -1;
        p[d as usize] = 1;
        if mu == 1 {
            num = poly_mul(&num, &p);
        } else {
            den = poly_mul(&den, &p);
        }
    }
    poly_div_exact(&num, &den)
}

/// Coefficients of Φ_n, lowest degree first; cached.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let p = Arc::new(compute_cyclotomic(n));
    cache.lock().unwrap().insert(n, p.clone());
    p
}

/// Σ c_j ζ_E^j in canonical form (degree < φ(E)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloInt {
    order: u64,
    coeffs: Vec<i64>,
}

impl CycloInt {
    /// Builds Σ counts[j]·ζ_E^j for counts of length E.
    pub fn from_counts(order: u64, counts: &[i64]) -> Self {
        assert_eq!(counts.len() as u64, order);
        let phi = cyclotomic_polynomial(order);
        let deg = phi.len() - 1;
        let mut rem = counts.to_vec();
        for i in (deg..rem.len()).rev() {
            let c = rem[i];
            if c != 0 {
                for (j, &d) in phi.iter().enumerate() {
                    rem[i - deg + j] -= c * d;
                }
            }
        }
        rem.truncate(deg);
        CycloInt { order, coeffs: rem }
    }

    /// Accumulates exact unit values whose denominators divide `order`.
    pub fn from_values(order: u64, values: impl IntoIterator<Item = UnitValue>) -> Option<Self> {
        let mut counts = vec![0i64; order as usize];
        for v in values {
            match v {
                UnitValue::Zero => {}
                UnitValue::Root { a, b } => {
                    if order % b != 0 {
                        return None;
                    }
                    counts[(a * (order / b)) as usize] += 1;
                }
                UnitValue::Approx { .. } => return None,
            }
        }
        Some(Self::from_counts(order, &counts))
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// The rational integer this element equals, if it is one.
    pub fn as_integer(&self) -> Option<i64> {
        if self.coeffs.iter().skip(1).all(|&c| c == 0) {
            Some(self.coeffs.first().copied().unwrap_or(0))
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * UnitValue::root(j as i64, self.order).to_complex())
            .sum()
    }
}
