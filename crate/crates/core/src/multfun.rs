//! Multiplicative functions given by their values on prime powers.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{Factorization, Sieve};
use crate::error::{config, domain, Result};
use crate::unit::UnitValue;

/// Value rule on prime powers p^k (k ≥ 1).
pub type PrimePowerRule = Arc<dyn Fn(u64, u32) -> UnitValue + Send + Sync>;

/// A 1-bounded multiplicative function, optionally twisted by n^{it}.
#[derive(Clone)]
pub struct MultFunc {
    name: String,
    completely_multiplicative: bool,
    t: f64,
    rule: PrimePowerRule,
}

impl fmt::Debug for MultFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultFunc")
            .field("name", &self.name)
            .field("completely_multiplicative", &self.completely_multiplicative)
            .field("t", &self.t)
            .finish()
    }
}

/// Ways of building a new function from one or two old ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    Product,
    Conjugate,
    Power(u32),
    Twist(f64),
    TruncateRough(u64),
}

impl MultFunc {
    /// Multiplicative function with values `rule(p, k)` on p^k.
    pub fn new(
        name: impl Into<String>,
        rule: impl Fn(u64, u32) -> UnitValue + Send + Sync + 'static,
    ) -> Self {
        MultFunc {
            name: name.into(),
            completely_multiplicative: false,
            t: 0.0,
            rule: Arc::new(rule),
        }
    }

    /// Completely multiplicative function with values `prime_rule(p)` on primes.
    pub fn completely(
        name: impl Into<String>,
        prime_rule: impl Fn(u64) -> UnitValue + Send + Sync + 'static,
    ) -> Self {
        MultFunc {
            name: name.into(),
            completely_multiplicative: true,
            t: 0.0,
            rule: Arc::new(move |p, _| prime_rule(p)),
        }
    }

    pub fn one() -> Self {
        Self::completely("one", |_| UnitValue::ONE)
    }

    /// λ(n) = (−1)^Ω(n).
    pub fn liouville() -> Self {
        Self::completely("liouville", |_| UnitValue::MINUS_ONE)
    }

    /// (−1)^{n−1}: −1 on powers of 2, 1 on odd prime powers.
    pub fn alternating() -> Self {
        Self::new("alternating", |p, _| {
            if p == 2 {
                UnitValue::MINUS_ONE
            } else {
                UnitValue::ONE
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_completely_multiplicative(&self) -> bool {
        self.completely_multiplicative
    }

    /// Exponent t of the n^{it} twist.
    pub fn twist_exponent(&self) -> f64 {
        self.t
    }

    /// Untwisted value on p^k.
    pub fn prime_power(&self, p: u64, k: u32) -> UnitValue {
        if k == 0 {
            UnitValue::ONE
        } else if self.completely_multiplicative {
            (self.rule)(p, 1).pow(k)
        } else {
            (self.rule)(p, k)
        }
    }

    /// Value on p^k including the twist.
    pub fn at_prime_power(&self, p: u64, k: u32) -> UnitValue {
        let v = self.prime_power(p, k);
        if self.t == 0.0 || v.is_zero() {
            v
        } else {
            v * twist_factor(self.t, k as f64 * (p as f64).ln())
        }
    }

    pub fn at_prime(&self, p: u64) -> UnitValue {
        self.at_prime_power(p, 1)
    }

    pub fn evaluate_factored(&self, f: &Factorization) -> UnitValue {
        let mut v = UnitValue::ONE;
        for &(p, k) in &f.factors {
            v = v * self.prime_power(p, k);
            if v.is_zero() {
                return v;
            }
        }
        if self.t != 0.0 {
            v = v * twist_factor(self.t, (f.value as f64).ln());
        }
        v
    }

    pub fn evaluate(&self, sieve: &Sieve, n: u64) -> Result<UnitValue> {
        Ok(self.evaluate_factored(&sieve.factorize(n)?))
    }

    fn check_range(sieve: &Sieve, upto: u64) -> Result<()> {
        if upto > sieve.limit() {
            return Err(crate::error::Error::Range {
                what: "tabulation bound",
                value: upto,
                limit: sieve.limit(),
            });
        }
        Ok(())
    }

    /// Values f(0..=upto) (index 0 holds zero), exact when possible.
    pub fn tabulate(&self, sieve: &Sieve, upto: u64) -> Result<Vec<UnitValue>> {
        Self::check_range(sieve, upto)?;
        let mut vals = vec![UnitValue::Zero; upto as usize + 1];
        if upto >= 1 {
            vals[1] = UnitValue::ONE;
        }
        for n in 2..=upto {
            let (m, p, k) = split_spf(sieve, n);
            vals[n as usize] = vals[m as usize] * self.prime_power(p, k);
        }
        if self.t != 0.0 {
            for (n, v) in vals.iter_mut().enumerate().skip(1) {
                if !v.is_zero() {
                    *v = *v * twist_factor(self.t, (n as f64).ln());
                }
            }
        }
        Ok(vals)
    }

    /// Floating values f(0..=upto) (index 0 holds zero).
    pub fn tabulate_complex(&self, sieve: &Sieve, upto: u64) -> Result<Vec<Complex64>> {
        Self::check_range(sieve, upto)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut vals = vec![zero; upto as usize + 1];
        if upto >= 1 {
            vals[1] = Complex64::new(1.0, 0.0);
        }
        for n in 2..=upto {
            let (m, p, k) = split_spf(sieve, n);
            let prev = vals[m as usize];
            vals[n as usize] = if prev == zero {
                zero
            } else {
                prev * self.prime_power(p, k).to_complex()
            };
        }
        if self.t != 0.0 {
            for (n, v) in vals.iter_mut().enumerate().skip(1) {
                *v *= Complex64::from_polar(1.0, self.t * (n as f64).ln());
            }
        }
        Ok(vals)
    }

    pub fn product(&self, g: &MultFunc) -> MultFunc {
        let (f1, f2) = (self.clone(), g.clone());
        let complete = self.completely_multiplicative && g.completely_multiplicative;
        MultFunc {
            name: format!("({})*({})", self.name, g.name),
            completely_multiplicative: complete,
            t: self.t + g.t,
            rule: Arc::new(move |p, k| f1.prime_power(p, k) * f2.prime_power(p, k)),
        }
    }

    pub fn conjugate(&self) -> MultFunc {
        let f = self.clone();
        MultFunc {
            name: format!("conj({})", self.name),
            completely_multiplicative: self.completely_multiplicative,
            t: -self.t,
            rule: Arc::new(move |p, k| f.prime_power(p, k).conj()),
        }
    }

    pub fn power(&self, e: u32) -> MultFunc {
        let f = self.clone();
        MultFunc {
            name: format!("({})^{e}", self.name),
            completely_multiplicative: self.completely_multiplicative,
            t: self.t * e as f64,
            rule: Arc::new(move |p, k| f.prime_power(p, k).pow(e)),
        }
    }

    pub fn twist(&self, t: f64) -> MultFunc {
        let mut g = self.clone();
        g.name = format!("({})*n^(i{t})", self.name);
        g.t += t;
        g
    }

    /// f · 1_{P⁻(n) > N}.
    pub fn truncate_rough(&self, n_max: u64) -> MultFunc {
        let f = self.clone();
        MultFunc {
            name: format!("({})*1[P-(n)>{n_max}]", self.name),
            completely_multiplicative: self.completely_multiplicative,
            t: self.t,
            rule: Arc::new(move |p, k| {
                if p <= n_max {
                    UnitValue::Zero
                } else {
                    f.prime_power(p, k)
                }
            }),
        }
    }
}

/// Applies `mode` to f (and g for products).
pub fn combine(f: &MultFunc, g: Option<&MultFunc>, mode: CombineMode) -> Result<MultFunc> {
    Ok(match mode {
        CombineMode::Product => {
            f.product(g.ok_or_else(|| config("product needs a second function"))?)
        }
        CombineMode::Conjugate => f.conjugate(),
        CombineMode::Power(k) => {
            if k == 0 {
                return Err(config("power exponent must be at least 1"));
            }
            f.power(k)
        }
        CombineMode::Twist(t) => f.twist(t),
        CombineMode::TruncateRough(n) => {
            if n < 2 {
                return Err(config("rough truncation needs N >= 2"));
            }
            f.truncate_rough(n)
        }
    })
}

/// e(u(n)) for the completely additive u with the given rational values on primes.
pub fn from_additive(
    name: impl Into<String>,
    u: impl Fn(u64) -> Ratio<i64> + Send + Sync + 'static,
) -> MultFunc {
    MultFunc::completely(name, move |p| {
        let r = u(p);
        UnitValue::root(*r.numer(), (*r.denom()).unsigned_abs())
    })
}

/// Completely multiplicative g with g(p) the K-th root of unity closest to f(p)p^{-it}.
///
/// Ties go to the root with the smaller numerator.
pub fn nearest_root_projection(f: &MultFunc, order: u32, t: f64, sieve: &Sieve) -> Result<MultFunc> {
    if order == 0 {
        return Err(config("projection order must be at least 1"));
    }
    for p in sieve.primes() {
        if f.at_prime(p).is_zero() {
            return Err(domain(format!("f vanishes at the prime {p}")));
        }
    }
    let f = f.clone();
    let k = order as u64;
    let name = format!("nearest_root({}, K={order}, t={t})", f.name());
    Ok(MultFunc::completely(name, move |p| {
        let v = f.at_prime(p);
        let j = match v {
            UnitValue::Root { a, b } if t == 0.0 => {
                let num = a as u128 * k as u128;
                let (j, r) = ((num / b as u128) as u64, (num % b as u128) as u64);
                let (r2, b) = (2 * r as u128, b as u128);
                if r2 < b {
                    j
                } else if r2 > b {
                    (j + 1) % k
                } else {
                    j.min((j + 1) % k)
                }
            }
            _ => {
                let theta = match v.angle() {
                    Some(a) => a,
                    None => return UnitValue::Zero,
                };
                let target = (theta - t * (p as f64).ln() / std::f64::consts::TAU).rem_euclid(1.0);
                let s = target * k as f64;
                let j = s.floor();
                let frac = s - j;
                let j = j as u64 % k;
                if (frac - 0.5).abs() <= 1e-12 {
                    j.min((j + 1) % k)
                } else if frac < 0.5 {
                    j
                } else {
                    (j + 1) % k
                }
            }
        };
        UnitValue::root(j as i64, k)
    }))
}

#[inline]
pub(crate) fn split_spf(sieve: &Sieve, n: u64) -> (u64, u64, u32) {
    let p = sieve.spf_raw(n);
    let mut m = n / p;
    let mut k = 1;
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (m, p, k)
}

fn twist_factor(t: f64, log_n: f64) -> UnitValue {
    let z = Complex64::from_polar(1.0, t * log_n);
    UnitValue::Approx { re: z.re, im: z.im }
}

/// Which exponents a rule applies to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Exact(u32),
    Keyword(String),
}

impl Default for ExponentSpec {
    fn default() -> Self {
        ExponentSpec::Keyword("all".into())
    }
}

/// Class of primes a rule applies to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrimeClass {
    Congruence { modulus: u64, residue: u64 },
    Listed {
        #[serde(rename = "in")]
        primes: Vec<u64>,
    },
    /// Text form "p ≡ a mod q".
    Text(String),
}

impl PrimeClass {
    fn resolve(&self) -> Result<Matcher> {
        match self {
            PrimeClass::Congruence { modulus, residue } => {
                if *modulus == 0 {
                    return Err(config("prime class modulus must be positive"));
                }
                Ok(Matcher::Congruence(*modulus, residue % modulus))
            }
            PrimeClass::Listed { primes } => Ok(Matcher::Listed(primes.clone())),
            PrimeClass::Text(s) => {
                let (q, a) = parse_congruence(s)
                    .ok_or_else(|| config(format!("cannot parse prime class {s:?}")))?;
                Ok(Matcher::Congruence(q, a % q))
            }
        }
    }
}

fn parse_congruence(s: &str) -> Option<(u64, u64)> {
    let s = s.trim();
    let s = s.strip_prefix('p').unwrap_or(s).trim_start();
    let s = s
        .strip_prefix('≡')
        .or_else(|| s.strip_prefix('='))
        .unwrap_or(s)
        .trim();
    let s = s.trim_start_matches('(').trim_end_matches(')');
    let (a, q) = s.split_once("mod")?;
    let q: u64 = q.trim().trim_end_matches(')').trim().parse().ok()?;
    let a: u64 = a.trim().trim_end_matches('(').trim().parse().ok()?;
    (q > 0).then_some((q, a))
}

#[derive(Clone, Debug)]
enum Matcher {
    Prime(u64),
    Congruence(u64, u64),
    Listed(Vec<u64>),
}

impl Matcher {
    fn matches(&self, p: u64) -> bool {
        match self {
            Matcher::Prime(q) => *q == p,
            Matcher::Congruence(q, a) => p % q == *a,
            Matcher::Listed(v) => v.contains(&p),
        }
    }
}

/// One rule of a JSON function definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_class: Option<PrimeClass>,
    #[serde(default)]
    pub k: ExponentSpec,
    pub value: UnitValue,
}

/// JSON function definition; the first matching rule wins, unmatched prime
/// powers take `default` (1 if absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub name: String,
    #[serde(default)]
    pub completely_multiplicative: bool,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub rules: Vec<RuleDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<UnitValue>,
}

impl FunctionDef {
    pub fn build(&self) -> Result<MultFunc> {
        let mut compiled = Vec::with_capacity(self.rules.len());
        for (i, r) in self.rules.iter().enumerate() {
            let matcher = match (&r.p, &r.p_class) {
                (Some(p), None) => Matcher::Prime(*p),
                (None, Some(c)) => c.resolve()?,
                _ => {
                    return Err(config(format!(
                        "rule {i} must give exactly one of p and p_class"
                    )))
                }
            };
            let k = match &r.k {
                ExponentSpec::Exact(0) => return Err(config(format!("rule {i} has k = 0"))),
                ExponentSpec::Exact(k) => Some(*k),
                ExponentSpec::Keyword(w) if w == "all" => None,
                ExponentSpec::Keyword(w) => {
                    return Err(config(format!("rule {i} has unknown exponent {w:?}")))
                }
            };
            if self.completely_multiplicative && k.is_some_and(|k| k != 1) {
                return Err(config(format!(
                    "rule {i}: completely multiplicative functions take values on primes only"
                )));
            }
            compiled.push((matcher, k, r.value));
        }
        if !self.t.is_finite() {
            return Err(config("twist exponent must be finite"));
        }
        let default = self.default.unwrap_or(UnitValue::ONE);
        let lookup = move |p: u64, k: u32| {
            compiled
                .iter()
                .find(|(m, rk, _)| m.matches(p) && rk.is_none_or(|rk| rk == k))
                .map_or(default, |(_, _, v)| *v)
        };
        let f = if self.completely_multiplicative {
            MultFunc::completely(self.name.clone(), move |p| lookup(p, 1))
        } else {
            MultFunc::new(self.name.clone(), lookup)
        };
        Ok(if self.t != 0.0 {
            f.twist(self.t).with_name(self.name.clone())
        } else {
            f
        })
    }
}
