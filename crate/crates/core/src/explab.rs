//! Experiment runners: each takes a serializable config and returns a report
//! with verdicts, the config itself and the library source hash.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, Factorization, PrimeSet, Sieve};
use crate::closedform::{
    correlation_formula, g_table, poscoeffs_truncation, poscoeffs_witness_h, QpsReport,
};
use crate::correlations::{natural_correlations, partial_sum_profile, CheckpointSpec};
use crate::discrepancy::{gap_angles, largelog_scan, weighted_discrepancy, DiscrepancyReport, LargeLogReport};
use crate::error::{config, Error, Result};
use crate::fixtures::{CharacterRef, FunctionSpec, SetupSpec};
use crate::multfun::MultFunc;
use crate::pretentious::{pretender_scan, ScanEntry, StepSpec};
use crate::unit::UnitValue;

pub const SCHEMA_VERSION: u32 = 1;
/// SHA-256 of the library sources, fixed at build time.
pub const SOURCE_HASH: &str = env!("MULTLAB_SOURCE_HASH");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, verdict: Verdict, tolerance: Option<f64>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict,
            tolerance,
            detail: detail.into(),
        }
    }

    fn pass_fail(name: impl Into<String>, ok: bool, tolerance: Option<f64>, detail: impl Into<String>) -> Self {
        let v = if ok {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        };
        Check::new(name, v, tolerance, detail)
    }
}

/// A named (checkpoint, value) series for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(u64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Gap(GapConfig),
    Ks(KsConfig),
    Arith(ArithConfig),
    Chudakov(ChudakovConfig),
    Cohn(CohnConfig),
}

impl ExperimentConfig {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentConfig::Gap(_) => "gap",
            ExperimentConfig::Ks(_) => "ks",
            ExperimentConfig::Arith(_) => "arith",
            ExperimentConfig::Chudakov(_) => "chudakov",
            ExperimentConfig::Cohn(_) => "cohn",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Outcome {
    Gap(GapReport),
    Ks(KsReport),
    Arith(ArithReport),
    Chudakov(ChudakovReport),
    Cohn(CohnReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub source_hash: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
    pub series: Vec<Series>,
}

impl Report {
    /// Inconsistent if any check is, otherwise consistent (inconclusive checks allowed).
    pub fn verdict(&self) -> Verdict {
        if self.checks.iter().any(|c| c.verdict == Verdict::Inconsistent) {
            Verdict::Inconsistent
        } else if self.checks.iter().all(|c| c.verdict == Verdict::Consistent) {
            Verdict::Consistent
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict() {
            Verdict::Inconsistent => 1,
            _ => 0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Rows "series,checkpoint,value".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,checkpoint,value\n");
        for s in &self.series {
            for (c, v) in &s.points {
                out.push_str(&format!("{},{c},{v}\n", s.name));
            }
        }
        out
    }
}

fn sieve_for(limit: u64, given: Option<&Sieve>) -> Result<SieveRef<'_>> {
    match given {
        Some(s) if s.limit() >= limit => Ok(SieveRef::Borrowed(s)),
        _ => Ok(SieveRef::Owned(Sieve::new(limit.max(2))?)),
    }
}

enum SieveRef<'a> {
    Borrowed(&'a Sieve),
    Owned(Sieve),
}

impl std::ops::Deref for SieveRef<'_> {
    type Target = Sieve;
    fn deref(&self) -> &Sieve {
        match self {
            SieveRef::Borrowed(s) => s,
            SieveRef::Owned(s) => s,
        }
    }
}

/// Runs an experiment, reusing `sieve` when it is large enough.
pub fn run(cfg: &ExperimentConfig, sieve: Option<&Sieve>) -> Result<Report> {
    let (checks, outcome, series) = match cfg {
        ExperimentConfig::Gap(c) => run_gap_experiment(c, sieve)?,
        ExperimentConfig::Ks(c) => run_ks_experiment(c, sieve)?,
        ExperimentConfig::Arith(c) => run_arith_corollary(c, sieve)?,
        ExperimentConfig::Chudakov(c) => run_chudakov_experiment(c, sieve)?,
        ExperimentConfig::Cohn(c) => run_cohn_experiment(c, sieve)?,
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        source_hash: SOURCE_HASH.to_string(),
        config: cfg.clone(),
        checks,
        outcome,
        series,
    })
}

type Parts = (Vec<Check>, Outcome, Vec<Series>);

fn default_exhaustive_x() -> u64 {
    1_000_000
}

fn default_summation_x() -> u64 {
    10_000_000
}

// ---------------------------------------------------------------- gaps

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Running minimum of |f(n+1) − f(n)|.
    #[default]
    Folk,
    /// Adds the orbit f((2q)^l)(2q)^{−ilt} and a pretender scan.
    Epsthm,
    /// Adds the power-sum scan and the weighted discrepancy of the gap angles.
    Scan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapConfig {
    pub f: FunctionSpec,
    #[serde(default)]
    pub mode: GapMode,
    #[serde(default = "default_exhaustive_x")]
    pub x: u64,
    #[serde(default)]
    pub checkpoints: CheckpointSpec,
    /// The running minimum should fall to or below this (folk mode, hypothesis met).
    #[serde(default = "default_gap_threshold")]
    pub threshold: f64,
    /// If set, the running minimum must stay at or above this at every checkpoint.
    #[serde(default)]
    pub lower_bound: Option<f64>,
    #[serde(default)]
    pub epsthm: Option<EpsthmParams>,
    #[serde(default)]
    pub scan: Option<ScanParams>,
}

fn default_gap_threshold() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsthmParams {
    pub q: u64,
    #[serde(default)]
    pub t: f64,
    #[serde(default = "default_orbit_len")]
    pub orbit_len: u32,
    #[serde(default = "default_scan_q")]
    pub max_modulus: u64,
    #[serde(default)]
    pub t_max: f64,
}

fn default_orbit_len() -> u32 {
    20
}

fn default_scan_q() -> u64 {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    pub epsilon: f64,
    #[serde(default = "default_m_list")]
    pub m_list: Vec<usize>,
}

fn default_m_list() -> Vec<usize> {
    vec![10, 100, 1000]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub f: String,
    pub completely_multiplicative: bool,
    /// |f(p)| = 1 for every p ≤ x + 1.
    pub unimodular: bool,
    pub checkpoints: Vec<u64>,
    pub running_min: Vec<f64>,
    pub argmin: Vec<u64>,
    /// First n with f(n) = f(n+1) exactly.
    pub first_zero_gap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_min_distance_to_one: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pretender: Option<ScanEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub largelog: Option<LargeLogReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<DiscrepancyReport>,
}

/// Running minimum of |f(n+1) − f(n)| over n ≤ c at each checkpoint c.
pub fn gap_profile(f: &MultFunc, checkpoints: &[u64], sieve: &Sieve) -> Result<(Vec<f64>, Vec<u64>, Option<u64>)> {
    let x = *checkpoints.last().ok_or_else(|| config("no checkpoints"))?;
    let table = f.tabulate(sieve, x + 1)?;
    let mut min = f64::INFINITY;
    let mut arg = 0;
    let mut first_zero = None;
    let mut mins = Vec::with_capacity(checkpoints.len());
    let mut args = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 1..=x as usize {
        let (a, b) = (table[n], table[n + 1]);
        let gap = if a.is_exact() && b.is_exact() && a == b {
            0.0
        } else {
            a.distance(&b)
        };
        if gap == 0.0 && first_zero.is_none() {
            first_zero = Some(n as u64);
        }
        if gap < min {
            min = gap;
            arg = n as u64;
        }
        while next < checkpoints.len() && checkpoints[next] == n as u64 {
            mins.push(min);
            args.push(arg);
            next += 1;
        }
    }
    Ok((mins, args, first_zero))
}

fn is_unimodular_on_primes(f: &MultFunc, x: u64, sieve: &Sieve) -> bool {
    sieve
        .primes_up_to(x)
        .all(|p| (f.at_prime(p).modulus() - 1.0).abs() < 1e-12)
}

pub fn run_gap_experiment(cfg: &GapConfig, sieve: Option<&Sieve>) -> Result<Parts> {
    let f = cfg.f.build()?;
    let cps = cfg.checkpoints.resolve(cfg.x)?;
    let s = sieve_for(cfg.x + 2, sieve)?;
    let (running_min, argmin, first_zero) = gap_profile(&f, &cps, &s)?;
    let complete = f.is_completely_multiplicative();
    let unimodular = is_unimodular_on_primes(&f, cfg.x + 1, &s);
    let mut checks = vec![Check::pass_fail(
        "running minimum is nonincreasing",
        running_min.windows(2).all(|w| w[1] <= w[0]),
        None,
        format!("{} checkpoints", cps.len()),
    )];
    let last = *running_min.last().unwrap_or(&f64::INFINITY);
    if complete && unimodular {
        checks.push(Check::pass_fail(
            "running minimum decays below threshold",
            last <= cfg.threshold,
            Some(cfg.threshold),
            format!("min gap {last} at n = {}", argmin.last().copied().unwrap_or(0)),
        ));
    } else {
        checks.push(Check::new(
            "running minimum decays below threshold",
            Verdict::Inconclusive,
            Some(cfg.threshold),
            format!(
                "hypothesis not met (completely multiplicative: {complete}, unimodular: {unimodular}); min gap {last}"
            ),
        ));
    }
    if let Some(lb) = cfg.lower_bound {
        let ok = running_min.iter().all(|&m| m >= lb - 1e-12);
        checks.push(Check::pass_fail(
            "running minimum stays above lower bound",
            ok,
            Some(lb),
            format!("min gap {last}"),
        ));
    }
    let mut report = GapReport {
        f: f.name().to_string(),
        completely_multiplicative: complete,
        unimodular,
        checkpoints: cps.clone(),
        running_min: running_min.clone(),
        argmin,
        first_zero_gap: first_zero,
        orbit: None,
        orbit_min_distance_to_one: None,
        pretender: None,
        largelog: None,
        discrepancy: None,
    };
    match cfg.mode {
        GapMode::Folk => {}
        GapMode::Epsthm => {
            let p = cfg
                .epsthm
                .as_ref()
                .ok_or_else(|| config("epsthm mode needs an \"epsthm\" block"))?;
            let orbit = epsthm_orbit(&f, p.q, p.t, p.orbit_len)?;
            let dist = orbit
                .iter()
                .skip(1)
                .map(|z| (z - 1.0).norm())
                .fold(f64::INFINITY, f64::min);
            let scan = pretender_scan(&f, cfg.x, p.max_modulus, p.t_max, StepSpec::Auto, &s)?;
            checks.push(Check::new(
                "orbit and pretender signals",
                Verdict::Inconclusive,
                None,
                format!(
                    "min |f((2q)^l)(2q)^(-ilt) - 1| over 1 <= l <= {} is {dist}; nearest chi = {} mod {} at t = {}, distance {}",
                    p.orbit_len, scan.best.index, scan.best.modulus, scan.best.t, scan.best.distance
                ),
            ));
            report.orbit = Some(orbit);
            report.orbit_min_distance_to_one = Some(dist);
            report.pretender = Some(scan.best);
        }
        GapMode::Scan => {
            let p = cfg
                .scan
                .as_ref()
                .ok_or_else(|| config("scan mode needs a \"scan\" block"))?;
            let ll = largelog_scan(&f, p.epsilon, cfg.x, &s)?;
            let hypothesis = last >= p.epsilon;
            checks.push(if hypothesis {
                Check::pass_fail(
                    "power sum exceeds delta log x",
                    ll.exceeds,
                    Some(ll.threshold),
                    format!("max at k = {}: {}", ll.best_k, ll.best_value),
                )
            } else {
                Check::new(
                    "power sum exceeds delta log x",
                    Verdict::Inconclusive,
                    Some(ll.threshold),
                    format!("gap hypothesis fails (min gap {last}); max at k = {}: {}", ll.best_k, ll.best_value),
                )
            });
            match gap_angles(&f, cfg.x, &s) {
                Ok((theta, w)) => {
                    let d = weighted_discrepancy(&theta, &w, &p.m_list)?;
                    checks.push(Check::pass_fail(
                        "weighted discrepancy within Erdos-Turan bound",
                        d.holds,
                        None,
                        format!("D = {}, bounds {:?}", d.weighted_discrepancy, d.et_bounds),
                    ));
                    report.discrepancy = Some(d);
                }
                Err(Error::Domain(msg)) => checks.push(Check::new(
                    "weighted discrepancy within Erdos-Turan bound",
                    Verdict::Inconclusive,
                    None,
                    msg,
                )),
                Err(e) => return Err(e),
            }
            report.largelog = Some(ll);
        }
    }
    let series = vec![Series {
        name: "running_min".into(),
        points: cps.iter().copied().zip(running_min).collect(),
    }];
    Ok((checks, Outcome::Gap(report), series))
}

/// f((2q)^l)·(2q)^{−ilt} for l = 0..=L.
pub fn epsthm_orbit(f: &MultFunc, q: u64, t: f64, len: u32) -> Result<Vec<Complex64>> {
    if q == 0 {
        return Err(config("q must be positive"));
    }
    let base = Factorization::trial(2 * q);
    let log2q = ((2 * q) as f64).ln();
    Ok((0..=len)
        .map(|l| {
            let mut v = Complex64::new(1.0, 0.0);
            for &(p, e) in &base.factors {
                if l > 0 {
                    v *= f.at_prime_power(p, e * l).to_complex();
                }
            }
            v * Complex64::from_polar(1.0, -(l as f64) * t * log2q)
        })
        .collect())
}

// ---------------------------------------------------------------- limit points

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KsConfig {
    pub f: FunctionSpec,
    #[serde(default = "default_exhaustive_x")]
    pub x: u64,
    #[serde(default = "default_targets")]
    pub targets: Vec<UnitValue>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub min_coverage: Option<f64>,
    #[serde(default)]
    pub max_coverage: Option<f64>,
}

fn default_targets() -> Vec<UnitValue> {
    vec![UnitValue::ONE]
}

fn default_bins() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetGap {
    pub target: UnitValue,
    /// min over n ≤ x of |f(n) − z f(n+1)|.
    pub min_gap: f64,
    pub argmin: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub f: String,
    pub x: u64,
    pub samples: u64,
    pub histogram: Vec<u64>,
    pub coverage: f64,
    pub targets: Vec<TargetGap>,
}

pub fn run_ks_experiment(cfg: &KsConfig, sieve: Option<&Sieve>) -> Result<Parts> {
    if cfg.bins == 0 {
        return Err(config("bins must be positive"));
    }
    let f = cfg.f.build()?;
    let s = sieve_for(cfg.x + 2, sieve)?;
    let table = f.tabulate(&s, cfg.x + 1)?;
    let mut hist = vec![0u64; cfg.bins];
    let mut samples = 0;
    let mut gaps: Vec<TargetGap> = cfg
        .targets
        .iter()
        .map(|&z| TargetGap {
            target: z,
            min_gap: f64::INFINITY,
            argmin: 0,
        })
        .collect();
    for n in 1..=cfg.x as usize {
        let (a, b) = (table[n], table[n + 1]);
        if let Some(theta) = (a * b.conj()).angle() {
            let bin = ((theta * cfg.bins as f64) as usize).min(cfg.bins - 1);
            hist[bin] += 1;
            samples += 1;
        }
        for g in gaps.iter_mut() {
            let zb = g.target * b;
            let d = if a.is_exact() && zb.is_exact() && a == zb {
                0.0
            } else {
                (a.to_complex() - zb.to_complex()).norm()
            };
            if d < g.min_gap {
                g.min_gap = d;
                g.argmin = n as u64;
            }
        }
    }
    let hit = hist.iter().filter(|&&c| c > 0).count();
    let coverage = hit as f64 / cfg.bins as f64;
    let mut checks = vec![Check::pass_fail(
        "histogram counts sum to samples",
        hist.iter().sum::<u64>() == samples,
        None,
        format!("{samples} samples"),
    )];
    if let Some(c) = cfg.min_coverage {
        checks.push(Check::pass_fail(
            "coverage at least",
            coverage >= c,
            Some(c),
            format!("coverage {coverage}"),
        ));
    }
    if let Some(c) = cfg.max_coverage {
        checks.push(Check::pass_fail(
            "coverage at most",
            coverage <= c,
            Some(c),
            format!("coverage {coverage}"),
        ));
    }
    let series = vec![Series {
        name: "histogram".into(),
        points: hist.iter().enumerate().map(|(i, &c)| (i as u64, c as f64)).collect(),
    }];
    Ok((
        checks,
        Outcome::Ks(KsReport {
            f: f.name().to_string(),
            x: cfg.x,
            samples,
            histogram: hist,
            coverage,
            targets: gaps,
        }),
        series,
    ))
}

// ---------------------------------------------------------------- Ω_A congruences

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimeClassModulus {
    pub set: PrimeSet,
    pub modulus: u64,
}

impl PartialEq for PrimeClassModulus {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && format!("{:?}", self.set) == format!("{:?}", other.set)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArithConfig {
    pub classes: Vec<PrimeClassModulus>,
    #[serde(default = "default_exhaustive_x")]
    pub x: u64,
    #[serde(default)]
    pub checkpoints: CheckpointSpec,
    /// How many witnesses to list.
    #[serde(default = "default_list_limit")]
    pub list_limit: usize,
}

fn default_list_limit() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArithReport {
    pub x: u64,
    pub count: u64,
    pub first_witness: Option<u64>,
    pub witnesses: Vec<u64>,
    /// (checkpoint, witnesses ≤ checkpoint).
    pub counts: Vec<(u64, u64)>,
}

/// All n ≤ x with Ω_{A_j}(n+1) ≡ Ω_{A_j}(n) (mod q_j) for every j.
pub fn arith_witnesses(classes: &[PrimeClassModulus], x: u64, sieve: &Sieve) -> Result<Vec<u64>> {
    if classes.is_empty() {
        return Err(config("at least one prime class is needed"));
    }
    for (i, a) in classes.iter().enumerate() {
        if a.modulus == 0 {
            return Err(config("moduli must be positive"));
        }
        for b in &classes[i + 1..] {
            if gcd(a.modulus, b.modulus) != 1 {
                return Err(config(format!("moduli {} and {} are not coprime", a.modulus, b.modulus)));
            }
        }
    }
    if x + 1 > sieve.limit() {
        return Err(Error::Range {
            what: "x + 1",
            value: x + 1,
            limit: sieve.limit(),
        });
    }
    let primes: Vec<u64> = sieve.primes_up_to(x + 1).collect();
    // class index of each prime, checking disjointness
    let mut owner = vec![u8::MAX; (x + 2) as usize];
    for &p in &primes {
        let mut hit = None;
        for (j, c) in classes.iter().enumerate() {
            if c.set.contains(p) {
                if let Some(k) = hit {
                    return Err(crate::error::domain(format!(
                        "prime {p} lies in classes {k} and {j}"
                    )));
                }
                hit = Some(j);
            }
        }
        if let Some(j) = hit {
            owner[p as usize] = j as u8;
        }
    }
    let k = classes.len();
    // Ω_{A_j}(n) mod q_j, row-major by n
    let mut omega = vec![0u32; (x as usize + 2) * k];
    for n in 2..=(x + 1) as usize {
        let p = sieve.spf_raw(n as u64) as usize;
        let m = n / p;
        for j in 0..k {
            omega[n * k + j] = omega[m * k + j];
        }
        if owner[p] != u8::MAX {
            let j = owner[p] as usize;
            omega[n * k + j] = (omega[n * k + j] + 1) % classes[j].modulus as u32;
        }
    }
    Ok((1..=x as usize)
        .filter(|&n| (0..k).all(|j| omega[n * k + j] == omega[(n + 1) * k + j]))
        .map(|n| n as u64)
        .collect())
}

pub fn run_arith_corollary(cfg: &ArithConfig, sieve: Option<&Sieve>) -> Result<Parts> {
    let s = sieve_for(cfg.x + 2, sieve)?;
    let w = arith_witnesses(&cfg.classes, cfg.x, &s)?;
    let cps = cfg.checkpoints.resolve(cfg.x)?;
    let counts: Vec<(u64, u64)> = cps
        .iter()
        .map(|&c| (c, w.partition_point(|&n| n <= c) as u64))
        .collect();
    let check = if w.is_empty() {
        Check::new(
            "witnesses exist",
            Verdict::Inconclusive,
            None,
            format!("none up to {}", cfg.x),
        )
    } else {
        Check::pass_fail("witnesses exist", true, None, format!("{} up to {}", w.len(), cfg.x))
    };
    let series = vec![Series {
        name: "witness_count".into(),
        points: counts.iter().map(|&(c, n)| (c, n as f64)).collect(),
    }];
    Ok((
        vec![check],
        Outcome::Arith(ArithReport {
            x: cfg.x,
            count: w.len() as u64,
            first_witness: w.first().copied(),
            witnesses: w.iter().copied().take(cfg.list_limit).collect(),
            counts,
        }),
        series,
    ))
}

// ---------------------------------------------------------------- partial sums and closed forms

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChudakovConfig {
    /// Either a setup (character times perturbation) or a plain function.
    #[serde(default)]
    pub setup: Option<SetupSpec>,
    #[serde(default)]
    pub f: Option<FunctionSpec>,
    #[serde(default = "default_summation_x")]
    pub x: u64,
    #[serde(default)]
    pub checkpoints: CheckpointSpec,
    /// Partial sums must stay within this; defaults to q for unperturbed characters.
    #[serde(default)]
    pub bound: Option<f64>,
    /// Growth check: sup at x against sup at this checkpoint.
    #[serde(default)]
    pub growth_from: Option<u64>,
    #[serde(default = "default_growth_factor")]
    pub growth_factor: f64,
    #[serde(default = "default_dmax")]
    pub dmax: u64,
    /// Cutoff for the correlation comparison; defaults to x.
    #[serde(default)]
    pub correlation_x: Option<u64>,
    #[serde(default = "default_formula_tolerance")]
    pub formula_tolerance: f64,
    #[serde(default = "default_e_max")]
    pub e_max: u64,
    #[serde(default = "default_truncations")]
    pub poscoeffs_truncations: Vec<u64>,
}

fn default_growth_factor() -> f64 {
    10.0
}

fn default_dmax() -> u64 {
    12
}

fn default_formula_tolerance() -> f64 {
    0.02
}

fn default_e_max() -> u64 {
    10_000
}

fn default_truncations() -> Vec<u64> {
    vec![10, 100, 1000]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaComparison {
    pub d: u64,
    pub formula: Complex64,
    pub empirical: Complex64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosCoeffsPoint {
    pub truncation: u64,
    pub h: f64,
    pub value: f64,
    pub all_nonnegative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChudakovReport {
    pub f: String,
    pub checkpoints: Vec<u64>,
    pub running_sup: Vec<f64>,
    pub final_sum: Complex64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formula: Vec<FormulaComparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qps: Option<QpsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poscoeffs: Vec<PosCoeffsPoint>,
}

pub fn run_chudakov_experiment(cfg: &ChudakovConfig, sieve: Option<&Sieve>) -> Result<Parts> {
    let setup = cfg.setup.as_ref().map(|s| s.build()).transpose()?;
    let f = match (&setup, &cfg.f) {
        (Some(s), None) => s.f(),
        (None, Some(spec)) => spec.build()?,
        _ => return Err(config("give exactly one of \"setup\" and \"f\"")),
    };
    let mut cps = cfg.checkpoints.resolve(cfg.x)?;
    if let Some(g) = cfg.growth_from {
        if g == 0 || g > cfg.x {
            return Err(config("growth_from must lie in 1..=x"));
        }
        cps.push(g);
        cps.sort_unstable();
        cps.dedup();
    }
    let cx = cfg.correlation_x.unwrap_or(cfg.x);
    let s = sieve_for(cfg.x.max(cx + cfg.dmax) + 1, sieve)?;
    let profile = partial_sum_profile(&f, &cps, &s)?;
    let sup = *profile.running_sup.last().unwrap_or(&0.0);
    let mut checks = Vec::new();
    let bound = cfg.bound.or_else(|| {
        setup
            .as_ref()
            .filter(|s| s.perturbed_primes().next().is_none())
            .map(|s| s.modulus() as f64)
    });
    if let Some(b) = bound {
        checks.push(Check::pass_fail(
            "partial sums bounded",
            sup <= b,
            Some(b),
            format!("sup |S(y)| over y <= {} is {sup}", cfg.x),
        ));
    }
    if let Some(g) = cfg.growth_from {
        let i = cps.iter().position(|&c| c == g).expect("inserted above");
        let early = profile.running_sup[i];
        checks.push(Check::pass_fail(
            "partial sums grow",
            sup > cfg.growth_factor * early,
            Some(cfg.growth_factor),
            format!("sup at {} is {sup}, at {g} is {early}, ratio {}", cfg.x, sup / early),
        ));
    }
    let mut report = ChudakovReport {
        f: f.name().to_string(),
        checkpoints: cps.clone(),
        running_sup: profile.running_sup.clone(),
        final_sum: *profile.sums.last().unwrap_or(&Complex64::new(0.0, 0.0)),
        formula: Vec::new(),
        qps: None,
        g1: None,
        poscoeffs: Vec::new(),
    };
    if let Some(setup) = &setup {
        let shifts: Vec<u64> = (0..=cfg.dmax).collect();
        let emp = natural_correlations(&f, &shifts, &[cx], &s)?;
        let mut worst = 0.0f64;
        for (d, r) in shifts.iter().zip(&emp) {
            let formula = correlation_formula(setup, *d).value;
            let empirical = r.last_normalized();
            let error = (formula - empirical).norm();
            worst = worst.max(error);
            report.formula.push(FormulaComparison {
                d: *d,
                formula,
                empirical,
                error,
            });
        }
        checks.push(Check::pass_fail(
            "correlation formula matches direct sums",
            worst <= cfg.formula_tolerance,
            Some(cfg.formula_tolerance),
            format!("max error {worst} over 0 <= d <= {} at x = {cx}", cfg.dmax),
        ));
        match g_table(setup, cfg.e_max) {
            Ok(table) => {
                let q = table.qps(setup.modulus());
                checks.push(Check::pass_fail("G vanishes off units", q.vanishes_off_units, None, ""));
                checks.push(Check::pass_fail(
                    "normalized G nonnegative on odd units",
                    q.nonnegative_on_odd_units,
                    None,
                    "",
                ));
                checks.push(Check::pass_fail(
                    "unit series positive",
                    q.unit_series_positive,
                    None,
                    format!("sum over d <= {} is {}", cfg.e_max, q.unit_series),
                ));
                checks.push(match q.negative_two_exceeds_one {
                    Some(ok) => Check::pass_fail(
                        "negative normalized G(2) exceeds 1 in size",
                        ok,
                        None,
                        format!("G~(2) = {}", q.g_tilde_2),
                    ),
                    None => Check::new(
                        "negative normalized G(2) exceeds 1 in size",
                        Verdict::Consistent,
                        None,
                        format!("G~(2) = {} is not negative", q.g_tilde_2),
                    ),
                });
                report.g1 = Some(table.g1);
                report.qps = Some(q);
                let kappa = u8::from(setup.modulus() % 2 == 0);
                let tau = u8::from(table.g_tilde[2] < 0.0);
                let mut values = Vec::new();
                for &m in &cfg.poscoeffs_truncations {
                    let h = poscoeffs_witness_h(setup, m)?;
                    let r = poscoeffs_truncation(setup, h, m, tau, kappa)?;
                    values.push(PosCoeffsPoint {
                        truncation: m,
                        h,
                        value: r.value,
                        all_nonnegative: r.all_nonnegative,
                    });
                }
                checks.push(Check::pass_fail(
                    "positivity sum terms nonnegative",
                    values.iter().all(|v| v.all_nonnegative),
                    None,
                    format!("{:?}", values.iter().map(|v| v.value).collect::<Vec<_>>()),
                ));
                report.poscoeffs = values;
            }
            Err(Error::Degenerate(msg)) => {
                checks.push(Check::new("normalized G checks", Verdict::Inconclusive, None, msg));
            }
            Err(e) => return Err(e),
        }
    }
    let series = vec![Series {
        name: "running_sup".into(),
        points: cps.iter().copied().zip(profile.running_sup).collect(),
    }];
    Ok((checks, Outcome::Chudakov(report), series))
}

// ---------------------------------------------------------------- correlations against a character

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohnExpectation {
    /// Every ratio within tolerance of 1.
    Match,
    /// Some h outside tolerance.
    Differ,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohnConfig {
    pub f: FunctionSpec,
    pub chi: CharacterRef,
    pub h_max: u64,
    #[serde(default = "default_summation_x")]
    pub x: u64,
    #[serde(default = "default_cohn_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub expect: Option<CohnExpectation>,
}

fn default_cohn_tolerance() -> f64 {
    0.05
}

/// Below this size a character correlation counts as zero.
pub const COHN_ZERO_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohnRow {
    pub h: u64,
    pub f_corr: Complex64,
    pub chi_corr: Complex64,
    /// f_corr / chi_corr, absent when chi_corr is below the zero floor.
    pub ratio: Option<Complex64>,
    /// |ratio − 1|, or |f_corr − chi_corr| when the ratio is absent.
    pub deviation: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohnReport {
    pub f: String,
    pub chi: String,
    pub x: u64,
    pub rows: Vec<CohnRow>,
}

pub fn run_cohn_experiment(cfg: &CohnConfig, sieve: Option<&Sieve>) -> Result<Parts> {
    let chi = cfg.chi.build()?;
    let q = chi.modulus();
    if q % 2 == 0 {
        return Err(config("the character modulus must be odd"));
    }
    if !chi.is_primitive() {
        return Err(config("the character must be primitive"));
    }
    if cfg.h_max < q {
        return Err(config(format!("H = {} must be at least q = {q}", cfg.h_max)));
    }
    let f = cfg.f.build()?;
    let s = sieve_for(cfg.x + cfg.h_max + 1, sieve)?;
    let shifts: Vec<u64> = (1..=cfg.h_max).collect();
    let fr = natural_correlations(&f, &shifts, &[cfg.x], &s)?;
    let cr = natural_correlations(&chi.to_multfunc(), &shifts, &[cfg.x], &s)?;
    let rows: Vec<CohnRow> = shifts
        .iter()
        .zip(fr.iter().zip(&cr))
        .map(|(&h, (a, b))| {
            let fv = a.last_normalized();
            let cv = b.last_normalized();
            let (ratio, deviation) = if cv.norm() >= COHN_ZERO_FLOOR {
                let r = fv / cv;
                (Some(r), (r - 1.0).norm())
            } else {
                (None, (fv - cv).norm())
            };
            CohnRow {
                h,
                f_corr: fv,
                chi_corr: cv,
                ratio,
                deviation,
                within: deviation <= cfg.tolerance,
            }
        })
        .collect();
    let all_within = rows.iter().all(|r| r.within);
    let worst = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let detail = format!("max deviation {worst} over 1 <= h <= {}", cfg.h_max);
    let check = match cfg.expect {
        Some(CohnExpectation::Match) => Check::pass_fail("ratios near 1", all_within, Some(cfg.tolerance), detail),
        Some(CohnExpectation::Differ) => {
            Check::pass_fail("some ratio away from 1", !all_within, Some(cfg.tolerance), detail)
        }
        None => Check::new("ratio table", Verdict::Inconclusive, Some(cfg.tolerance), detail),
    };
    let series = vec![Series {
        name: "deviation".into(),
        points: rows.iter().map(|r| (r.h, r.deviation)).collect(),
    }];
    Ok((
        vec![check],
        Outcome::Cohn(CohnReport {
            f: f.name().to_string(),
            chi: chi.label(),
            x: cfg.x,
            rows,
        }),
        series,
    ))
}

/// |e(a) − e(b)| for angles in turns.
pub fn chord(a: f64, b: f64) -> f64 {
    2.0 * (PI * (a - b)).sin().abs()
}
