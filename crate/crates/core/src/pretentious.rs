//! Pretentious distance and scans for the nearest χ(n)n^{it}.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::Sieve;
use crate::characters::{enumerate_characters, DirichletCharacter};
use crate::error::{config, Error, Result};
use crate::multfun::MultFunc;
use crate::sum::Neumaier;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub x: u64,
    pub value: f64,
    pub squared: f64,
    pub summand_count: usize,
}

fn check_cutoff(sieve: &Sieve, x: u64) -> Result<()> {
    if x > sieve.limit() {
        return Err(Error::Range {
            what: "x",
            value: x,
            limit: sieve.limit(),
        });
    }
    Ok(())
}

/// 𝔻(f, g; x)² = Σ_{p ≤ x} (1 − Re f(p)·conj g(p)) / p, summed in prime order.
pub fn distance(f: &MultFunc, g: &MultFunc, x: u64, sieve: &Sieve) -> Result<DistanceResult> {
    check_cutoff(sieve, x)?;
    let mut acc = Neumaier::new();
    let mut count = 0;
    for p in sieve.primes_up_to(x) {
        let z = f.at_prime(p).to_complex() * g.at_prime(p).to_complex().conj();
        acc.add((1.0 - z.re) / p as f64);
        count += 1;
    }
    let squared = acc.value().max(0.0);
    Ok(DistanceResult {
        x,
        value: squared.sqrt(),
        squared,
        summand_count: count,
    })
}

/// Spacing of the t-grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSpec {
    /// 1 / log x.
    Auto,
    Fixed(f64),
}

impl StepSpec {
    pub fn resolve(self, x: u64) -> Result<f64> {
        let step = match self {
            StepSpec::Auto => 1.0 / (x.max(3) as f64).ln(),
            StepSpec::Fixed(s) => s,
        };
        if !(step > 0.0) || !step.is_finite() {
            return Err(config(format!("t-grid step must be positive, got {step}")));
        }
        Ok(step)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub modulus: u64,
    pub index: usize,
    pub order: u64,
    pub conductor: u64,
    pub t: f64,
    pub distance: f64,
    pub distance_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretenderScan {
    pub x: u64,
    pub max_modulus: u64,
    pub t_max: f64,
    pub t_grid_step: f64,
    pub best: ScanEntry,
    /// All scanned pairs, nearest first.
    pub table: Vec<ScanEntry>,
}

/// Grid points j·step for |j·step| ≤ T, in increasing order.
pub fn t_grid(t_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(config(format!("T must be a nonnegative real, got {t_max}")));
    }
    if !(step > 0.0) {
        return Err(config("t-grid step must be positive"));
    }
    let j = (t_max / step + 1e-9).floor() as i64;
    Ok((-j..=j).map(|i| i as f64 * step).collect())
}

/// Distances from f to χ·n^{it} for every character of modulus ≤ Q and t on the grid.
pub fn pretender_scan(
    f: &MultFunc,
    x: u64,
    max_modulus: u64,
    t_max: f64,
    step: StepSpec,
    sieve: &Sieve,
) -> Result<PretenderScan> {
    check_cutoff(sieve, x)?;
    if max_modulus == 0 {
        return Err(config("Q must be at least 1"));
    }
    let step = step.resolve(x)?;
    let grid = t_grid(t_max, step)?;
    if grid.is_empty() {
        return Err(config("empty t-grid"));
    }
    let primes: Vec<u64> = sieve.primes_up_to(x).collect();
    let fp: Vec<Complex64> = primes.iter().map(|&p| f.at_prime(p).to_complex()).collect();
    let logs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let mut chars: Vec<DirichletCharacter> = Vec::new();
    for q in 1..=max_modulus {
        chars.extend(enumerate_characters(q)?);
    }
    let tables: Vec<Vec<Complex64>> = chars
        .iter()
        .map(|c| c.values().iter().map(|v| v.to_complex().conj()).collect())
        .collect();

    let per_t: Vec<Vec<ScanEntry>> = grid
        .par_iter()
        .map(|&t| {
            // f(p)·p^{-it}
            let base: Vec<Complex64> = fp
                .iter()
                .zip(&logs)
                .map(|(z, l)| z * Complex64::from_polar(1.0, -t * l))
                .collect();
            chars
                .iter()
                .zip(&tables)
                .map(|(c, tab)| {
                    let q = c.modulus();
                    let mut acc = Neumaier::new();
                    for (i, &p) in primes.iter().enumerate() {
                        let z = base[i] * tab[(p % q) as usize];
                        acc.add((1.0 - z.re) / p as f64);
                    }
                    let sq = acc.value().max(0.0);
                    ScanEntry {
                        modulus: q,
                        index: c.index().unwrap_or(0),
                        order: c.order(),
                        conductor: c.conductor(),
                        t,
                        distance: sq.sqrt(),
                        distance_squared: sq,
                    }
                })
                .collect()
        })
        .collect();
    let mut table: Vec<ScanEntry> = per_t.into_iter().flatten().collect();
    table.sort_by(rank);
    Ok(PretenderScan {
        x,
        max_modulus,
        t_max,
        t_grid_step: step,
        best: table[0].clone(),
        table,
    })
}

fn rank(a: &ScanEntry, b: &ScanEntry) -> Ordering {
    a.distance_squared
        .total_cmp(&b.distance_squared)
        .then(a.modulus.cmp(&b.modulus))
        .then(a.index.cmp(&b.index))
        .then(a.t.total_cmp(&b.t))
}

impl PretenderScan {
    /// The ranked table as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,modulus,index,order,conductor,t,distance,distance_squared\n");
        for (i, e) in self.table.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                i + 1,
                e.modulus,
                e.index,
                e.order,
                e.conductor,
                e.t,
                e.distance,
                e.distance_squared
            ));
        }
        out
    }
}
