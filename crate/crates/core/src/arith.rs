//! Smallest-prime-factor sieve, factorizations and the classical arithmetic
//! functions derived from them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

/// Default upper bound on the sieve limit.
pub const DEFAULT_SIEVE_CAP: u64 = 1 << 31;

/// Smallest-prime-factor table for 2 ≤ n ≤ limit.
#[derive(Clone)]
pub struct Sieve {
    limit: u32,
    spf: Vec<u32>,
}

impl fmt::Debug for Sieve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sieve").field("limit", &self.limit).finish()
    }
}

impl Sieve {
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_cap(limit, DEFAULT_SIEVE_CAP)
    }

    pub fn with_cap(limit: u64, cap: u64) -> Result<Self> {
        if limit < 2 {
            return Err(config(format!("sieve limit {limit} is below 2")));
        }
        if limit > cap.min(u32::MAX as u64) {
            return Err(config(format!("sieve limit {limit} exceeds the cap {cap}")));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for j in (2..=n).step_by(2) {
            spf[j] = 2;
        }
        let mut i = 3usize;
        while i <= n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                let sq = (i as u64) * (i as u64);
                if sq <= limit {
                    let mut j = sq as usize;
                    while j <= n {
                        if spf[j] == 0 {
                            spf[j] = i as u32;
                        }
                        j += 2 * i;
                    }
                }
            }
            i += 2;
        }
        Ok(Sieve {
            limit: limit as u32,
            spf,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit as u64
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit as u64 {
            return Err(Error::Range {
                what: "n",
                value: n,
                limit: self.limit as u64,
            });
        }
        Ok(())
    }

    /// Smallest prime factor of n, or `None` for n = 1.
    pub fn spf(&self, n: u64) -> Result<Option<u64>> {
        self.check(n)?;
        Ok(if n == 1 {
            None
        } else {
            Some(self.spf[n as usize] as u64)
        })
    }

    /// Unchecked smallest prime factor for 2 ≤ n ≤ limit.
    #[inline]
    pub(crate) fn spf_raw(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit as u64 && self.spf[n as usize] as u64 == n
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes_up_to(self.limit as u64)
    }

    pub fn primes_up_to(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        let x = x.min(self.limit as u64);
        (2..=x).filter(move |&n| self.spf[n as usize] as u64 == n)
    }

    pub fn prime_count(&self, x: u64) -> usize {
        self.primes_up_to(x).count()
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check(n)?;
        let mut factors = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        Ok(Factorization { value: n, factors })
    }
}

/// Prime factorization of a positive integer; primes strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Factorization by trial division, for moduli and other small inputs.
    pub fn trial(n: u64) -> Self {
        assert!(n >= 1, "factorization of 0");
        let mut factors = Vec::new();
        let mut m = n;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if m > 1 {
            factors.push((m, 1));
        }
        Factorization { value: n, factors }
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn mobius(&self) -> i8 {
        if self.factors.iter().any(|&(_, e)| e >= 2) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    pub fn totient(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn valuation(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// The classical arithmetic functions of one integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArithFns {
    pub omega: u32,
    pub big_omega: u32,
    pub mu: i8,
    pub rad: u64,
    pub phi: u64,
    pub tau: u64,
}

pub fn arith_fns(f: &Factorization) -> ArithFns {
    ArithFns {
        omega: f.omega(),
        big_omega: f.big_omega(),
        mu: f.mobius(),
        rad: f.radical(),
        phi: f.totient(),
        tau: f.divisor_count(),
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Modular exponentiation.
pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    let mut b = (base % m) as u128;
    let m128 = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Inverse of a modulo m, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// A set of primes: explicit, by congruence rule, or by an arbitrary predicate.
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeSet {
    All,
    Listed(BTreeSet<u64>),
    Residues {
        modulus: u64,
        residues: Vec<u64>,
        /// Primes must exceed this bound.
        #[serde(default)]
        above: u64,
        /// Primes must not exceed this bound.
        #[serde(default)]
        up_to: Option<u64>,
    },
    #[serde(skip)]
    Predicate(Arc<dyn Fn(u64) -> bool + Send + Sync>),
}

impl fmt::Debug for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeSet::All => write!(f, "All"),
            PrimeSet::Listed(s) => f.debug_tuple("Listed").field(s).finish(),
            PrimeSet::Residues {
                modulus,
                residues,
                above,
                up_to,
            } => f
                .debug_struct("Residues")
                .field("modulus", modulus)
                .field("residues", residues)
                .field("above", above)
                .field("up_to", up_to)
                .finish(),
            PrimeSet::Predicate(_) => write!(f, "Predicate(..)"),
        }
    }
}

impl PrimeSet {
    pub fn empty() -> Self {
        PrimeSet::Listed(BTreeSet::new())
    }

    pub fn listed(primes: impl IntoIterator<Item = u64>) -> Self {
        PrimeSet::Listed(primes.into_iter().collect())
    }

    pub fn predicate(f: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        PrimeSet::Predicate(Arc::new(f))
    }

    /// Membership for a prime p (non-primes are not checked).
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeSet::All => true,
            PrimeSet::Listed(s) => s.contains(&p),
            PrimeSet::Residues {
                modulus,
                residues,
                above,
                up_to,
            } => {
                p > *above
                    && up_to.is_none_or(|u| p <= u)
                    && *modulus > 0
                    && residues.iter().any(|&r| p % modulus == r % modulus)
            }
            PrimeSet::Predicate(f) => f(p),
        }
    }
}

/// Ω_S, τ_S and π_S of one integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedFns {
    pub omega_s: u32,
    pub tau_s: u64,
    pub pi_s: u64,
}

pub fn restricted_fns(f: &Factorization, s: &PrimeSet) -> RestrictedFns {
    let mut out = RestrictedFns {
        omega_s: 0,
        tau_s: 1,
        pi_s: 1,
    };
    for &(p, e) in &f.factors {
        if s.contains(p) {
            out.omega_s += e;
            out.tau_s *= e as u64 + 1;
            out.pi_s *= p.pow(e);
        }
    }
    out
}
