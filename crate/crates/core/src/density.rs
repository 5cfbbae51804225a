//! Logarithmic densities of doubly-rough integers in progressions, of the set
//! where g(n) = g((2q)^T n + 1), thin-set divisor sums and a longest-AP finder.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, PrimeSet, Sieve};
use crate::error::{config, domain, Error, Result};
use crate::multfun::MultFunc;
use crate::sum::{prefix_sums, Neumaier};
use crate::unit::UnitValue;

/// Largest π(N) accepted, so that 4^{π(N)} stays desk-sized.
pub const MAX_SIEVED_PRIMES: usize = 12;
/// Members listed in a report.
pub const SAMPLE_LEN: usize = 20;
/// Largest input to [`longest_ap`].
pub const MAX_AP_INPUT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub constraint: String,
    pub x: u64,
    /// Σ 1/n over members n ≤ x.
    pub log_sum: f64,
    /// log_sum / log x.
    pub empirical: f64,
    /// Main-term coefficient of log x.
    pub predicted: f64,
    pub ratio: Option<f64>,
    /// 4^{π(N)} / log x, the error term relative to log x.
    pub slack: f64,
    /// Exact product of local residue densities (divided by mk for the structured set).
    pub local_density: f64,
    pub local_ratio: Option<f64>,
    pub member_count: u64,
    pub sample: Vec<u64>,
    /// (checkpoint, Σ 1/n / log checkpoint).
    pub profile: Vec<(u64, f64)>,
}

struct Params {
    d: u64,
    primes: Vec<u64>,
}

fn sieved_primes(n_max: u64) -> Result<Vec<u64>> {
    let primes: Vec<u64> = (2..=n_max)
        .filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .collect();
    if primes.len() > MAX_SIEVED_PRIMES {
        return Err(config(format!(
            "N = {n_max} gives pi(N) = {} > {MAX_SIEVED_PRIMES}",
            primes.len()
        )));
    }
    Ok(primes)
}

fn params(q: u64, t: u32, n_max: u64, x: u64, sieve: &Sieve) -> Result<Params> {
    if q == 0 {
        return Err(config("q must be positive"));
    }
    if x < 2 {
        return Err(config("x must be at least 2"));
    }
    let primes = sieved_primes(n_max)?;
    let d = (2 * q)
        .checked_pow(t)
        .ok_or_else(|| config("(2q)^T overflows"))?;
    let top = d
        .checked_mul(x)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| config("(2q)^T x + 1 overflows"))?;
    if top > sieve.limit() {
        return Err(Error::Range {
            what: "(2q)^T x + 1",
            value: top,
            limit: sieve.limit(),
        });
    }
    Ok(Params { d, primes })
}

fn rough(sieve: &Sieve, n: u64, n_max: u64) -> bool {
    n == 1 || sieve.spf_raw(n) > n_max
}

fn checkpoints_for(x: u64, checkpoints: &[u64]) -> Vec<u64> {
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c >= 2 && c < x).collect();
    cps.push(x);
    cps.sort_unstable();
    cps.dedup();
    cps
}

fn scan(
    x: u64,
    checkpoints: &[u64],
    member: impl Fn(u64) -> bool + Sync,
) -> Result<(Vec<(u64, f64)>, f64, u64, Vec<u64>)> {
    let cps = checkpoints_for(x, checkpoints);
    // real part: Σ 1/n, imaginary part: count
    let sums = prefix_sums(&cps, |n| {
        if member(n) {
            Complex64::new(1.0 / n as f64, 1.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let profile = cps
        .iter()
        .zip(&sums)
        .map(|(&c, s)| (c, s.re / (c as f64).ln()))
        .collect();
    let last = sums.last().copied().unwrap_or_default();
    let sample = (1..=x).filter(|&n| member(n)).take(SAMPLE_LEN).collect();
    Ok((profile, last.re, last.im.round() as u64, sample))
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then_some(a / b)
}

/// Density of n mod p with p ∤ n(Dn + 1): 1 − 2/p, or 1 − 1/p when p | D.
fn local_factor(p: u64, d: u64) -> f64 {
    let roots = if d % p == 0 { 1.0 } else { 2.0 };
    1.0 - roots / p as f64
}

/// Σ_{n ≤ x, n ≡ a (q), P⁻(n((2q)^T n + 1)) > N} 1/n against
/// (3/4)(log x / q) Π_{3 ≤ p ≤ N, p ∤ q}(1 − 2/p).
#[allow(clippy::too_many_arguments)]
pub fn rough_ap_density(
    q: u64,
    a: u64,
    t: u32,
    n_max: u64,
    x: u64,
    checkpoints: &[u64],
    sieve: &Sieve,
) -> Result<DensityReport> {
    let Params { d, primes } = params(q, t, n_max, x, sieve)?;
    let a = a % q;
    let shifted = ((d % q) as u128 * a as u128 + 1) % q as u128;
    if q > 1 && (gcd(a, q) != 1 || gcd(shifted as u64, q) != 1) {
        return Err(domain(format!(
            "gcd(a((2q)^T a + 1), q) must be 1 (q = {q}, a = {a}, T = {t})"
        )));
    }
    let (profile, log_sum, count, sample) = scan(x, checkpoints, |n| {
        n % q == a && rough(sieve, n, n_max) && rough(sieve, d * n + 1, n_max)
    })?;
    let predicted = 0.75 / q as f64
        * primes
            .iter()
            .filter(|&&p| p >= 3 && q % p != 0)
            .map(|&p| 1.0 - 2.0 / p as f64)
            .product::<f64>();
    // primes dividing q are settled by the hypothesis
    let local = primes
        .iter()
        .filter(|&&p| q % p != 0)
        .map(|&p| local_factor(p, d))
        .product::<f64>()
        / q as f64;
    let lx = (x as f64).ln();
    let empirical = log_sum / lx;
    Ok(DensityReport {
        constraint: format!("n = {a} mod {q}, P-(n({d}n + 1)) > {n_max}"),
        x,
        log_sum,
        empirical,
        predicted,
        ratio: ratio(empirical, predicted),
        slack: 4f64.powi(primes.len() as i32) / lx,
        local_density: local,
        local_ratio: ratio(empirical, local),
        member_count: count,
        sample,
        profile,
    })
}

fn check_finite_order(g: &MultFunc, mk: u32, upto: u64, sieve: &Sieve) -> Result<()> {
    if g.twist_exponent() != 0.0 {
        return Err(domain("a twisted function is not of finite order"));
    }
    for p in sieve.primes_up_to(upto) {
        let mut pk = p;
        let mut k = 1;
        loop {
            let v = g.at_prime_power(p, k);
            if !v.is_exact() || v.pow(mk) != UnitValue::ONE {
                return Err(domain(format!("g(p^k)^{mk} != 1 at p = {p}, k = {k}")));
            }
            if g.is_completely_multiplicative() {
                break;
            }
            match pk.checked_mul(p) {
                Some(v) if v <= upto => pk = v,
                _ => break,
            }
            k += 1;
        }
    }
    Ok(())
}

/// Logarithmic density of 𝒜_{g,T}(N) = {n : P⁻(n((2q)^T n + 1)) > N, g(n) = g((2q)^T n + 1)}
/// against (3/(4mk)) Π_{3 ≤ p ≤ N}(1 − 2/p). The order data m, k come from the caller.
#[allow(clippy::too_many_arguments)]
pub fn structured_set_density(
    g: &MultFunc,
    m: u32,
    k: u32,
    q: u64,
    t: u32,
    n_max: u64,
    x: u64,
    checkpoints: &[u64],
    sieve: &Sieve,
) -> Result<DensityReport> {
    if m == 0 || k == 0 {
        return Err(config("m and k must be positive"));
    }
    let Params { d, primes } = params(q, t, n_max, x, sieve)?;
    let mk = m * k;
    check_finite_order(g, mk, d * x + 1, sieve)?;
    let (profile, log_sum, count, sample) = scan(x, checkpoints, |n| {
        let s = d * n + 1;
        rough(sieve, n, n_max)
            && rough(sieve, s, n_max)
            && g.evaluate(sieve, n).ok() == g.evaluate(sieve, s).ok()
    })?;
    let predicted = 0.75 / mk as f64
        * primes
            .iter()
            .filter(|&&p| p >= 3)
            .map(|&p| 1.0 - 2.0 / p as f64)
            .product::<f64>();
    let local = primes.iter().map(|&p| local_factor(p, d)).product::<f64>() / mk as f64;
    let lx = (x as f64).ln();
    let empirical = log_sum / lx;
    Ok(DensityReport {
        constraint: format!(
            "P-(n({d}n + 1)) > {n_max}, g(n) = g({d}n + 1), g = {}, mk = {mk}",
            g.name()
        ),
        x,
        log_sum,
        empirical,
        predicted,
        ratio: ratio(empirical, predicted),
        slack: 4f64.powi(primes.len() as i32) / lx,
        local_density: local,
        local_ratio: ratio(empirical, local),
        member_count: count,
        sample,
        profile,
    })
}

/// Members of 𝒜_{g,T}(N) up to x, in increasing order.
pub fn structured_set_members(
    g: &MultFunc,
    q: u64,
    t: u32,
    n_max: u64,
    x: u64,
    sieve: &Sieve,
) -> Result<Vec<u64>> {
    let Params { d, .. } = params(q, t, n_max, x, sieve)?;
    let mut out = Vec::new();
    for n in 1..=x {
        let s = d * n + 1;
        if rough(sieve, n, n_max)
            && rough(sieve, s, n_max)
            && g.evaluate(sieve, n)? == g.evaluate(sieve, s)?
        {
            out.push(n);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinPoint {
    pub x: u64,
    /// Σ_{n ≤ x, n ∈ ⟨S⟩} τ_S(n)/n.
    pub sum_tau: f64,
    /// Σ_{n ≤ x, n ∈ ⟨S⟩} τ_S(n) log n / n, divided by log x.
    pub sum_tau_log_over_logx: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinSums {
    pub x: u64,
    pub sum_tau: f64,
    pub sum_tau_log_over_logx: f64,
    pub member_count: usize,
    pub profile: Vec<ThinPoint>,
}

/// Divisor sums over the monoid generated by S, at each checkpoint ≤ x.
///
/// Explicit prime lists need no sieve; other sets are enumerated from `sieve`.
pub fn thin_set_sums(s: &PrimeSet, x: u64, checkpoints: &[u64], sieve: Option<&Sieve>) -> Result<ThinSums> {
    if x == 0 {
        return Err(config("x must be positive"));
    }
    let primes: Vec<u64> = match s {
        PrimeSet::Listed(list) => list.iter().copied().filter(|&p| p <= x).collect(),
        _ => {
            let sieve = sieve.ok_or_else(|| config("this prime set needs a sieve"))?;
            if x > sieve.limit() {
                return Err(Error::Range {
                    what: "x",
                    value: x,
                    limit: sieve.limit(),
                });
            }
            sieve.primes_up_to(x).filter(|&p| s.contains(p)).collect()
        }
    };
    // (n, τ_S(n)) for n ∈ ⟨S⟩ ∩ [1, x]
    let mut members: Vec<(u64, u64)> = vec![(1, 1)];
    let mut stack: Vec<(u64, u64, usize)> = vec![(1, 1, 0)];
    while let Some((n, tau, from)) = stack.pop() {
        for (i, &p) in primes.iter().enumerate().skip(from) {
            let Some(mut m) = n.checked_mul(p).filter(|&m| m <= x) else {
                break;
            };
            let mut e = 1;
            loop {
                // τ grows from tau·1 to tau·(e+1) as the new prime's exponent rises
                let t = tau * (e + 1);
                members.push((m, t));
                stack.push((m, t, i + 1));
                match m.checked_mul(p) {
                    Some(v) if v <= x => m = v,
                    _ => break,
                }
                e += 1;
            }
        }
    }
    members.sort_unstable();
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c >= 1 && c < x).collect();
    cps.push(x);
    cps.sort_unstable();
    cps.dedup();
    let mut first = Neumaier::new();
    let mut second = Neumaier::new();
    let mut profile = Vec::with_capacity(cps.len());
    let mut it = members.iter().peekable();
    for &c in &cps {
        while let Some(&&(n, tau)) = it.peek() {
            if n > c {
                break;
            }
            let nf = n as f64;
            first.add(tau as f64 / nf);
            second.add(tau as f64 * nf.ln() / nf);
            it.next();
        }
        let lc = (c as f64).ln();
        profile.push(ThinPoint {
            x: c,
            sum_tau: first.value(),
            sum_tau_log_over_logx: if lc > 0.0 { second.value() / lc } else { 0.0 },
        });
    }
    let last = *profile.last().expect("x is always a checkpoint");
    Ok(ThinSums {
        x,
        sum_tau: last.sum_tau,
        sum_tau_log_over_logx: last.sum_tau_log_over_logx,
        member_count: members.len(),
        profile,
    })
}

/// A longest arithmetic progression inside a set, as (start, step, length).
///
/// Ties go to the smallest step, then the smallest start. A single member gives
/// step 0 and the empty set gives (0, 0, 0).
pub fn longest_ap(members: &[u64]) -> Result<(u64, u64, usize)> {
    if members.len() > MAX_AP_INPUT {
        return Err(Error::Size {
            len: members.len(),
            max: MAX_AP_INPUT,
        });
    }
    let mut v = members.to_vec();
    v.sort_unstable();
    v.dedup();
    match v.len() {
        0 => return Ok((0, 0, 0)),
        1 => return Ok((v[0], 0, 1)),
        _ => {}
    }
    let set: HashSet<u64> = v.iter().copied().collect();
    let top = *v.last().unwrap();
    // best = (length, step, start)
    let mut best = (1usize, 0u64, v[0]);
    for (i, &a) in v.iter().enumerate() {
        for &b in &v[i + 1..] {
            let step = b - a;
            let room = ((top - a) / step) as usize + 1;
            if room < best.0 {
                break;
            }
            if a >= step && set.contains(&(a - step)) {
                continue;
            }
            let mut len = 2;
            let mut next = b;
            while let Some(n) = next.checked_add(step).filter(|n| set.contains(n)) {
                next = n;
                len += 1;
            }
            if len > best.0 || (len == best.0 && (step, a) < (best.1, best.2)) {
                best = (len, step, a);
            }
        }
    }
    if best.0 == 1 {
        return Ok((v[0], 0, 1));
    }
    Ok((best.2, best.1, best.0))
}
