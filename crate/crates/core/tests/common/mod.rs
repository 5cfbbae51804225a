#![allow(dead_code)]

use std::sync::OnceLock;

use multlab_core::arith::Sieve;

/// Sieve to 2·10^6, enough for every exhaustive scan at x = 10^6.
pub fn small() -> &'static Sieve {
    static S: OnceLock<Sieve> = OnceLock::new();
    S.get_or_init(|| Sieve::new(2_000_000).unwrap())
}

/// Sieve to 10^7 + 10^3, for summation scans at x = 10^7 with small shifts.
pub fn large() -> &'static Sieve {
    static S: OnceLock<Sieve> = OnceLock::new();
    S.get_or_init(|| Sieve::new(10_001_000).unwrap())
}

/// Smallest prime factor by trial division.
pub fn trial_spf(n: u64) -> u64 {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

pub fn trial_is_prime(n: u64) -> bool {
    n >= 2 && trial_spf(n) == n
}

/// Prime factorization by trial division.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
