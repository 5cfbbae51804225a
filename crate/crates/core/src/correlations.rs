//! Binary correlation sums, short-interval moments, and the identities
//! relating the two.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::Sieve;
use crate::error::{config, Error, Result};
use crate::multfun::MultFunc;
use crate::sum::{prefix_sums, ComplexSum};

pub use crate::discrepancy::{
    et_bound, gap_angles, largelog_constants, largelog_scan, weighted_discrepancy,
    DiscrepancyReport, LargeLogReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Natural,
    Logarithmic,
}

/// Linear forms a₁n + b₁ and a₂n + b₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forms {
    pub a1: u64,
    pub b1: i64,
    pub a2: u64,
    pub b2: i64,
}

impl Forms {
    pub fn new(a1: u64, b1: i64, a2: u64, b2: i64) -> Self {
        Forms { a1, b1, a2, b2 }
    }

    /// The shift pair n, n + h.
    pub fn shift(h: i64) -> Self {
        Forms::new(1, 0, 1, h)
    }

    /// a₁b₂ − a₂b₁.
    pub fn determinant(&self) -> i128 {
        self.a1 as i128 * self.b2 as i128 - self.a2 as i128 * self.b1 as i128
    }

    fn validate(&self, x: u64, sieve: &Sieve) -> Result<(u64, u64)> {
        if self.a1 == 0 || self.a2 == 0 {
            return Err(config("leading coefficients must be positive"));
        }
        if self.a1 as i64 + self.b1 < 1 || self.a2 as i64 + self.b2 < 1 {
            return Err(config("forms must be positive at n = 1"));
        }
        let top1 = (self.a1 as i128 * x as i128 + self.b1 as i128) as u64;
        let top2 = (self.a2 as i128 * x as i128 + self.b2 as i128) as u64;
        let top = top1.max(top2);
        if top > sieve.limit() {
            return Err(Error::Range {
                what: "largest form value",
                value: top,
                limit: sieve.limit(),
            });
        }
        Ok((top1, top2))
    }
}

/// Checkpoint layouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointSpec {
    /// Only the final cutoff.
    Final,
    /// k points x^{i/k}, i = 1..k.
    Geometric(u32),
    /// k points i·x/k.
    Linear(u32),
    List(Vec<u64>),
}

impl Default for CheckpointSpec {
    fn default() -> Self {
        CheckpointSpec::Geometric(6)
    }
}

impl CheckpointSpec {
    /// Parses "geometric:10", "linear:5", "list:10,100,1000" or "final".
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "final" {
            return Ok(CheckpointSpec::Final);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| config(format!("cannot parse checkpoints {s:?}")))?;
        let count = || -> Result<u32> {
            arg.trim()
                .parse()
                .map_err(|_| config(format!("bad checkpoint count {arg:?}")))
        };
        match kind.trim() {
            "geometric" => Ok(CheckpointSpec::Geometric(count()?)),
            "linear" => Ok(CheckpointSpec::Linear(count()?)),
            "list" => arg
                .split(',')
                .map(|v| parse_count(v))
                .collect::<Result<Vec<_>>>()
                .map(CheckpointSpec::List),
            other => Err(config(format!("unknown checkpoint layout {other:?}"))),
        }
    }

    /// Strictly increasing checkpoints ending at x.
    pub fn resolve(&self, x: u64) -> Result<Vec<u64>> {
        if x == 0 {
            return Err(config("cutoff must be at least 1"));
        }
        let mut pts: Vec<u64> = match self {
            CheckpointSpec::Final => vec![x],
            CheckpointSpec::Geometric(k) | CheckpointSpec::Linear(k) if *k == 0 => {
                return Err(config("checkpoint count must be positive"))
            }
            CheckpointSpec::Geometric(k) => (1..=*k)
                .map(|i| ((x as f64).powf(i as f64 / *k as f64).round() as u64).clamp(1, x))
                .collect(),
            CheckpointSpec::Linear(k) => (1..=*k as u64).map(|i| (x * i / *k as u64).max(1)).collect(),
            CheckpointSpec::List(v) => {
                if v.iter().any(|&c| c == 0 || c > x) {
                    return Err(config("listed checkpoints must lie in 1..=x"));
                }
                let mut v = v.clone();
                v.push(x);
                v
            }
        };
        pts.sort_unstable();
        pts.dedup();
        Ok(pts)
    }
}

/// Parses counts such as "1e7", "10000000" or "2^20".
pub fn parse_count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.trim().parse().map_err(|_| config(format!("bad number {s:?}")))?;
        let e: u32 = e.trim().parse().map_err(|_| config(format!("bad number {s:?}")))?;
        return b.checked_pow(e).ok_or_else(|| config(format!("{s} overflows")));
    }
    let v: f64 = s.parse().map_err(|_| config(format!("bad number {s:?}")))?;
    if !(v >= 0.0) || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(config(format!("{s} is not a nonnegative integer")));
    }
    Ok(v as u64)
}

fn check_checkpoints(cps: &[u64]) -> Result<u64> {
    let Some(&x) = cps.last() else {
        return Err(config("at least one checkpoint is required"));
    };
    if cps[0] == 0 || cps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config("checkpoints must be positive and strictly increasing"));
    }
    Ok(x)
}

/// A correlation or partial-sum scan at several cutoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub kind: Weighting,
    pub forms: Forms,
    pub checkpoints: Vec<u64>,
    /// Raw sums at each checkpoint.
    pub values: Vec<Complex64>,
    /// x (natural) or log x (logarithmic) at each checkpoint.
    pub normalization: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Complex64>,
    /// |value/normalization − target| at each checkpoint, when a target is set.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<f64>,
}

impl CorrelationReport {
    pub fn normalized(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .zip(&self.normalization)
            .map(|(v, n)| v / n)
            .collect()
    }

    pub fn last_normalized(&self) -> Complex64 {
        *self.normalized().last().expect("nonempty report")
    }

    pub fn with_target(mut self, target: Complex64) -> Self {
        self.errors = self.normalized().iter().map(|v| (v - target).norm()).collect();
        self.target = Some(target);
        self
    }
}

fn normalization(kind: Weighting, cps: &[u64]) -> Vec<f64> {
    cps.iter()
        .map(|&c| match kind {
            Weighting::Natural => c as f64,
            Weighting::Logarithmic => (c as f64).ln(),
        })
        .collect()
}

/// Σ_{n ≤ x} f₁(a₁n+b₁)·f₂(a₂n+b₂)/n at each checkpoint (no conjugation).
pub fn log_correlation(
    f1: &MultFunc,
    f2: &MultFunc,
    forms: Forms,
    checkpoints: &[u64],
    sieve: &Sieve,
) -> Result<CorrelationReport> {
    let x = check_checkpoints(checkpoints)?;
    let (top1, top2) = forms.validate(x, sieve)?;
    let t1 = f1.tabulate_complex(sieve, top1)?;
    let t2 = f2.tabulate_complex(sieve, top2)?;
    let values = prefix_sums(checkpoints, |n| {
        let i1 = (forms.a1 * n) as i64 + forms.b1;
        let i2 = (forms.a2 * n) as i64 + forms.b2;
        t1[i1 as usize] * t2[i2 as usize] / n as f64
    });
    Ok(CorrelationReport {
        kind: Weighting::Logarithmic,
        forms,
        checkpoints: checkpoints.to_vec(),
        values,
        normalization: normalization(Weighting::Logarithmic, checkpoints),
        target: None,
        errors: Vec::new(),
    })
}

/// Σ_{n ≤ x} f(n)·conj f(n+d), reported with divisor x.
pub fn natural_correlation(
    f: &MultFunc,
    d: u64,
    checkpoints: &[u64],
    sieve: &Sieve,
) -> Result<CorrelationReport> {
    Ok(natural_correlations(f, &[d], checkpoints, sieve)?.remove(0))
}

/// Natural correlations at several shifts from one tabulation.
pub fn natural_correlations(
    f: &MultFunc,
    shifts: &[u64],
    checkpoints: &[u64],
    sieve: &Sieve,
) -> Result<Vec<CorrelationReport>> {
    let x = check_checkpoints(checkpoints)?;
    let dmax = shifts.iter().copied().max().unwrap_or(0);
    Forms::shift(dmax as i64).validate(x, sieve)?;
    let table = f.tabulate_complex(sieve, x + dmax)?;
    Ok(shifts
        .iter()
        .map(|&d| natural_correlation_table(&table, d, checkpoints))
        .collect())
}

/// Natural correlation from a tabulated function (index n holds f(n)).
pub fn natural_correlation_table(table: &[Complex64], d: u64, checkpoints: &[u64]) -> CorrelationReport {
    let values = prefix_sums(checkpoints, |n| {
        table[n as usize] * table[(n + d) as usize].conj()
    });
    CorrelationReport {
        kind: Weighting::Natural,
        forms: Forms::shift(d as i64),
        checkpoints: checkpoints.to_vec(),
        values,
        normalization: normalization(Weighting::Natural, checkpoints),
        target: None,
        errors: Vec::new(),
    }
}

/// Partial sums Σ_{n ≤ c} f(n) at the checkpoints, with the running sup of
/// |Σ_{n ≤ y} f(n)| over y ≤ c.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSumProfile {
    pub checkpoints: Vec<u64>,
    pub sums: Vec<Complex64>,
    pub running_sup: Vec<f64>,
    /// First y attaining the running sup.
    pub argsup: Vec<u64>,
}

pub fn partial_sum_profile(f: &MultFunc, checkpoints: &[u64], sieve: &Sieve) -> Result<PartialSumProfile> {
    let x = check_checkpoints(checkpoints)?;
    let table = f.tabulate_complex(sieve, x)?;
    Ok(partial_sum_profile_table(&table, checkpoints))
}

pub fn partial_sum_profile_table(table: &[Complex64], checkpoints: &[u64]) -> PartialSumProfile {
    let mut acc = ComplexSum::new();
    let mut sup = 0.0f64;
    let mut arg = 0;
    let mut out = PartialSumProfile {
        checkpoints: checkpoints.to_vec(),
        sums: Vec::with_capacity(checkpoints.len()),
        running_sup: Vec::with_capacity(checkpoints.len()),
        argsup: Vec::with_capacity(checkpoints.len()),
    };
    let mut next = 0;
    let x = *checkpoints.last().unwrap_or(&0);
    for n in 1..=x {
        acc.add(table[n as usize]);
        let m = acc.value().norm();
        if m > sup {
            sup = m;
            arg = n;
        }
        if checkpoints[next] == n {
            out.sums.push(acc.value());
            out.running_sup.push(sup);
            out.argsup.push(arg);
            next += 1;
        }
    }
    out
}

fn window_sums(table: &[Complex64], h: usize, x: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
    (1..=x).map(move |m| {
        let s: Complex64 = table[m + 1..=m + h].iter().sum();
        (m, s)
    })
}

/// Raw Σ_{m ≤ x} w_m |Σ_{m < n ≤ m+H} f(n)|² with w_m = 1 or 1/m.
pub fn short_interval_moment_raw(
    f: &MultFunc,
    h: u64,
    x: u64,
    weighting: Weighting,
    sieve: &Sieve,
) -> Result<f64> {
    if h == 0 || x == 0 {
        return Err(config("window and cutoff must be positive"));
    }
    let table = f.tabulate_complex(sieve, x + h)?;
    Ok(moment_from_table(&table, h, x, weighting))
}

fn moment_from_table(table: &[Complex64], h: u64, x: u64, weighting: Weighting) -> f64 {
    let mut acc = crate::sum::Neumaier::new();
    for (m, s) in window_sums(table, h as usize, x as usize) {
        let w = match weighting {
            Weighting::Natural => 1.0,
            Weighting::Logarithmic => 1.0 / m as f64,
        };
        acc.add(w * s.norm_sqr());
    }
    acc.value()
}

/// Second moment of the H-window sums: x⁻¹Σ|S|² (natural) or Σ m⁻¹|S|² (logarithmic).
pub fn short_interval_moment(
    f: &MultFunc,
    h: u64,
    x: u64,
    weighting: Weighting,
    sieve: &Sieve,
) -> Result<f64> {
    let raw = short_interval_moment_raw(f, h, x, weighting, sieve)?;
    Ok(match weighting {
        Weighting::Natural => raw / x as f64,
        Weighting::Logarithmic => raw,
    })
}

/// Both sides of the moment-versus-correlation identity at window H.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub window: u64,
    pub x: u64,
    pub weighting: Weighting,
    pub moment: f64,
    /// Σ_{|h| ≤ H} (H − |h|) Σ_{n ≤ x} w_n f(n) conj f(n+h), with f(k) = 0 for k ≤ 0.
    pub correlation_side: Complex64,
    pub residual: f64,
    /// residual / H³.
    pub scaled_residual: f64,
}

pub fn moment_identity(
    f: &MultFunc,
    h: u64,
    x: u64,
    weighting: Weighting,
    sieve: &Sieve,
) -> Result<IdentityCheck> {
    if h == 0 || x == 0 {
        return Err(config("window and cutoff must be positive"));
    }
    let table = f.tabulate_complex(sieve, x + h)?;
    let moment = moment_from_table(&table, h, x, weighting);
    let mut side = ComplexSum::new();
    let hh = h as i64;
    for shift in -hh..=hh {
        let mut c = ComplexSum::new();
        for n in 1..=x as i64 {
            let k = n + shift;
            if k < 1 {
                continue;
            }
            let w = match weighting {
                Weighting::Natural => 1.0,
                Weighting::Logarithmic => 1.0 / n as f64,
            };
            c.add(w * table[n as usize] * table[k as usize].conj());
        }
        side.add((hh - shift.abs()) as f64 * c.value());
    }
    let side = side.value();
    let residual = (moment - side).norm();
    Ok(IdentityCheck {
        window: h,
        x,
        weighting,
        moment,
        correlation_side: side,
        residual,
        scaled_residual: residual / (h as f64).powi(3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character;

    #[test]
    fn harmonic_numbers_from_constant_function() {
        let s = Sieve::new(100_001).unwrap();
        let r = log_correlation(&MultFunc::one(), &MultFunc::one(), Forms::shift(1), &[10, 100_000], &s).unwrap();
        let h10: f64 = (1..=10).map(|n| 1.0 / n as f64).sum();
        assert!((r.values[0].re - h10).abs() < 1e-14);
        let hx: f64 = (1..=100_000).map(|n| 1.0 / n as f64).sum();
        assert!((r.values[1].re - hx).abs() < 1e-11);
    }

    #[test]
    fn character_correlation_matches_direct_sum() {
        let s = Sieve::new(100_001).unwrap();
        let chi = character(3, 1).unwrap();
        let f = chi.to_multfunc();
        let r = log_correlation(&f, &f.conjugate(), Forms::shift(1), &[100_000], &s).unwrap();
        let direct: f64 = (1..=100_000i64)
            .map(|n| (chi.value(n) * chi.value(n + 1).conj()).to_complex().re / n as f64)
            .sum();
        assert!((r.values[0].re - direct).abs() < 1e-10);
    }

    #[test]
    fn natural_correlation_examples() {
        let s = Sieve::new(1_000_010).unwrap();
        let f = MultFunc::liouville();
        let r = natural_correlation(&f, 0, &[1000], &s).unwrap();
        assert_eq!(r.last_normalized(), Complex64::new(1.0, 0.0));
        let chi = character(5, 1).unwrap();
        let r = natural_correlation(&chi.to_multfunc(), 5, &[1000], &s).unwrap();
        assert!((r.last_normalized().re - 0.8).abs() < 1e-12);
        let prim = character(5, 1).unwrap().to_multfunc();
        let r = natural_correlation(&prim, 1, &[1_000_000], &s).unwrap();
        assert!((r.last_normalized().re + 0.2).abs() < 0.01);
    }

    #[test]
    fn checkpoints_are_bitwise_stable() {
        let s = Sieve::new(300_001).unwrap();
        let f = MultFunc::liouville();
        let cps = CheckpointSpec::Geometric(5).resolve(300_000).unwrap();
        let r = log_correlation(&f, &f, Forms::shift(1), &cps, &s).unwrap();
        for (i, &c) in cps.iter().enumerate() {
            let fresh = log_correlation(&f, &f, Forms::shift(1), &[c], &s).unwrap();
            assert_eq!(fresh.values[0], r.values[i]);
        }
    }

    #[test]
    fn window_moments() {
        let s = Sieve::new(10_000).unwrap();
        let m = short_interval_moment(&MultFunc::one(), 3, 1000, Weighting::Natural, &s).unwrap();
        assert_eq!(m, 9.0);
        // quadratic character mod 5 is real, so full-period windows cancel exactly
        let quad = character(5, 2).unwrap();
        assert_eq!(quad.order(), 2);
        let m = short_interval_moment(&quad.to_multfunc(), 5, 1000, Weighting::Natural, &s).unwrap();
        assert_eq!(m, 0.0);
        let quartic = character(5, 1).unwrap().to_multfunc();
        let m = short_interval_moment(&quartic, 5, 1000, Weighting::Natural, &s).unwrap();
        assert!(m < 1e-28);
    }

    #[test]
    fn checkpoint_parsing() {
        assert_eq!(CheckpointSpec::parse("geometric:3").unwrap().resolve(1000).unwrap(), vec![10, 100, 1000]);
        assert_eq!(CheckpointSpec::parse("list:5,50").unwrap().resolve(100).unwrap(), vec![5, 50, 100]);
        assert_eq!(CheckpointSpec::parse("linear:2").unwrap().resolve(10).unwrap(), vec![5, 10]);
        assert!(CheckpointSpec::parse("spiral:3").is_err());
        assert_eq!(parse_count("1e7").unwrap(), 10_000_000);
        assert_eq!(parse_count("2^20").unwrap(), 1 << 20);
        assert!(parse_count("1.5").is_err());
    }

    #[test]
    fn sieve_overflow_is_a_range_error() {
        let s = Sieve::new(1000).unwrap();
        let e = log_correlation(&MultFunc::one(), &MultFunc::one(), Forms::new(2, 0, 1, 1), &[600], &s);
        assert!(matches!(e, Err(Error::Range { .. })));
    }
}
