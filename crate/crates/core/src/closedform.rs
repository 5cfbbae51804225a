//! Local factors G(e), G̃(e), the correlation formula for χ·F, the
//! fractional-part identities and the positivity sums built from them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, Factorization, Sieve};
use crate::characters::{character_sum_from_locals, DirichletCharacter};
use crate::error::{config, domain, Error, Result};
use crate::multfun::MultFunc;
use crate::sum::Neumaier;
use crate::unit::UnitValue;

/// Tolerance for agreement between the two G̃ routes.
pub const ROUTE_TOLERANCE: f64 = 1e-9;

/// f = χ·F on integers coprime to q, with F perturbed at finitely many primes
/// and prescribed values of f at the primes dividing q.
#[derive(Clone, Debug)]
pub struct ChudakovSetup {
    name: String,
    chi: DirichletCharacter,
    perturbations: BTreeMap<u64, UnitValue>,
    at_modulus: BTreeMap<u64, UnitValue>,
}

impl ChudakovSetup {
    /// `perturbations` gives F(p) for primes p ∤ q (default 1); `at_modulus`
    /// gives f(p) for p | q (default 0).
    pub fn new(
        name: impl Into<String>,
        chi: DirichletCharacter,
        perturbations: impl IntoIterator<Item = (u64, UnitValue)>,
        at_modulus: impl IntoIterator<Item = (u64, UnitValue)>,
    ) -> Result<Self> {
        let q = chi.modulus();
        let mut pert = BTreeMap::new();
        for (p, v) in perturbations {
            if !is_prime(p) {
                return Err(domain(format!("{p} is not prime")));
            }
            if q % p == 0 {
                return Err(domain(format!("F is fixed to 1 at {p}, which divides q = {q}")));
            }
            if !v.is_exact() {
                return Err(domain("values of F must be roots of unity or zero"));
            }
            if v != UnitValue::ONE {
                pert.insert(p, v);
            }
        }
        let mut at_q = BTreeMap::new();
        for (p, v) in at_modulus {
            if !is_prime(p) || q % p != 0 {
                return Err(domain(format!("{p} is not a prime divisor of q = {q}")));
            }
            if !v.is_exact() {
                return Err(domain("values of f must be roots of unity or zero"));
            }
            at_q.insert(p, v);
        }
        Ok(ChudakovSetup {
            name: name.into(),
            chi,
            perturbations: pert,
            at_modulus: at_q,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modulus(&self) -> u64 {
        self.chi.modulus()
    }

    pub fn chi(&self) -> &DirichletCharacter {
        &self.chi
    }

    /// Primes with F(p) ≠ 1.
    pub fn perturbed_primes(&self) -> impl Iterator<Item = (u64, UnitValue)> + '_ {
        self.perturbations.iter().map(|(&p, &v)| (p, v))
    }

    pub fn big_f_at(&self, p: u64) -> UnitValue {
        self.perturbations.get(&p).copied().unwrap_or(UnitValue::ONE)
    }

    pub fn f_at(&self, p: u64) -> UnitValue {
        if self.modulus() % p == 0 {
            self.at_modulus.get(&p).copied().unwrap_or(UnitValue::Zero)
        } else {
            self.chi.value(p as i64) * self.big_f_at(p)
        }
    }

    /// The completely multiplicative f.
    pub fn f(&self) -> MultFunc {
        let s = self.clone();
        MultFunc::completely(self.name.clone(), move |p| s.f_at(p))
    }

    /// The completely multiplicative F.
    pub fn big_f(&self) -> MultFunc {
        let pert = self.perturbations.clone();
        MultFunc::completely(format!("F[{}]", self.name), move |p| {
            pert.get(&p).copied().unwrap_or(UnitValue::ONE)
        })
    }

    /// Primes where f vanishes.
    pub fn zero_primes(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Factorization::trial(self.modulus())
            .primes()
            .filter(|&p| self.f_at(p).is_zero())
            .collect();
        out.extend(self.perturbations.iter().filter(|(_, v)| v.is_zero()).map(|(&p, _)| p));
        out.sort_unstable();
        out
    }

    /// φ(P)/P for P the product of the zero primes.
    pub fn nonzero_density(&self) -> f64 {
        self.zero_primes().iter().map(|&p| 1.0 - 1.0 / p as f64).product()
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && Factorization::trial(n).factors == vec![(n, 1)]
}

/// Closed-form G̃ local factor at p^k (k ≥ 1; k = 0 gives 1).
pub fn local_factor(f_p: UnitValue, p: u64, k: u32) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let pf = p as f64;
    if f_p.is_zero() {
        if p == 2 {
            return Err(Error::Singularity {
                p,
                reason: "(1 - 2/p) vanishes".into(),
            });
        }
        return Ok(if k == 1 { 1.0 / (1.0 - 2.0 / pf) } else { 0.0 });
    }
    let z = f_p.to_complex();
    let num = (z - 1.0).norm_sqr();
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = (pf - 1.0).powi(2) - 2.0 * (1.0 - z.re);
    if den <= 1e-12 {
        return Err(Error::Singularity {
            p,
            reason: format!("denominator (p-1)^2 - 2(1 - Re F(p)) = {den}"),
        });
    }
    Ok(num * (pf * pf - 1.0) / den)
}

/// A local factor of G from its defining series, with a bound on the dropped tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// |μ∗F(p^k)|² + 2 Re Σ_{i > k} μ∗F(p^i)·conj μ∗F(p^k) / p^{i−k}.
pub fn defining_factor(f_p: UnitValue, p: u64, k: u32) -> SeriesValue {
    let z = f_p.to_complex();
    let one = Complex64::new(1.0, 0.0);
    // μ∗F(p^i) = F^{i−1}(F − 1) for i ≥ 1
    let h = |i: u32| -> Complex64 {
        if i == 0 {
            one
        } else {
            z.powu(i - 1) * (z - one)
        }
    };
    let hk = h(k);
    let pf = p as f64;
    let terms = ((8e18 / (pf - 1.0)).ln() / pf.ln()).ceil() as u32;
    let mut acc = Neumaier::new();
    let mut scale = 1.0;
    for j in 1..=terms {
        scale /= pf;
        acc.add((h(k + j) * hk.conj()).re * scale);
    }
    SeriesValue {
        value: hk.norm_sqr() + 2.0 * acc.value(),
        tail_bound: 2.0 * 4.0 * scale / (pf - 1.0),
    }
}

impl ChudakovSetup {
    /// G(e) from the defining product over all primes with F(p) ≠ 1 or p | e.
    pub fn g_defining(&self, e: u64) -> SeriesValue {
        let fe = Factorization::trial(e);
        let mut value = 1.0;
        let mut tail = 0.0;
        let mut seen = Vec::new();
        for &(p, k) in &fe.factors {
            let s = defining_factor(self.big_f_at(p), p, k);
            value *= s.value;
            tail += s.tail_bound;
            seen.push(p);
        }
        for (&p, &v) in &self.perturbations {
            if seen.contains(&p) {
                continue;
            }
            let s = defining_factor(v, p, 0);
            value *= s.value;
            tail += s.tail_bound;
        }
        SeriesValue { value, tail_bound: tail }
    }

    /// G̃(e) from the closed form, using the defining series at p = 2.
    pub fn g_tilde_closed(&self, e: u64) -> Result<f64> {
        let mut v = 1.0;
        for &(p, k) in &Factorization::trial(e).factors {
            let fp = self.big_f_at(p);
            v *= if p == 2 {
                let base = defining_factor(fp, 2, 0).value;
                if base.abs() < 1e-14 {
                    return Err(Error::Degenerate("G(1) = 0 at p = 2".into()));
                }
                defining_factor(fp, 2, k).value / base
            } else {
                local_factor(fp, p, k)?
            };
        }
        Ok(v)
    }
}

/// G and G̃ up to a bound, computed by both routes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GTable {
    pub e_max: u64,
    pub g1: f64,
    /// g[e] = G(e) for 1 ≤ e ≤ e_max (index 0 unused).
    pub g: Vec<f64>,
    /// G̃(e) from the closed form.
    pub g_tilde: Vec<f64>,
    /// max |G(e)/G(1) − G̃(e)| over the table.
    pub max_route_gap: f64,
}

pub fn g_table(setup: &ChudakovSetup, e_max: u64) -> Result<GTable> {
    if e_max == 0 {
        return Err(config("e_max must be at least 1"));
    }
    let g1 = setup.g_defining(1).value;
    if g1.abs() < 1e-12 {
        return Err(Error::Degenerate(format!(
            "G(1) = {g1} vanishes for setup {}",
            setup.name()
        )));
    }
    let mut g = vec![0.0; e_max as usize + 1];
    let mut gt = vec![0.0; e_max as usize + 1];
    let mut gap = 0.0f64;
    for e in 1..=e_max {
        let def = setup.g_defining(e).value;
        let closed = setup.g_tilde_closed(e)?;
        let d = (def / g1 - closed).abs() / closed.abs().max(1.0);
        gap = gap.max(d);
        g[e as usize] = def;
        gt[e as usize] = closed;
    }
    if gap > ROUTE_TOLERANCE {
        return Err(domain(format!(
            "closed form and defining product disagree by {gap:e}"
        )));
    }
    Ok(GTable {
        e_max,
        g1,
        g,
        g_tilde: gt,
        max_route_gap: gap,
    })
}

/// Outcome of the checks (i)–(iv) on a G table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpsReport {
    /// G(d) = 0 whenever gcd(d, q) > 1.
    pub vanishes_off_units: bool,
    /// G̃(d) ≥ 0 whenever gcd(d, 2q) = 1.
    pub nonnegative_on_odd_units: bool,
    /// Σ_{d ≤ e_max, (d,q)=1} G(d)/d.
    pub unit_series: f64,
    pub unit_series_positive: bool,
    pub g_tilde_2: f64,
    /// Some(|G̃(2)| > 1) when G̃(2) < 0.
    pub negative_two_exceeds_one: Option<bool>,
}

impl GTable {
    pub fn qps(&self, q: u64) -> QpsReport {
        let mut i_ok = true;
        let mut ii_ok = true;
        let mut series = Neumaier::new();
        for e in 1..=self.e_max {
            let g = self.g[e as usize];
            if gcd(e, q) > 1 {
                i_ok &= g == 0.0;
            } else {
                series.add(g / e as f64);
                if e % 2 == 1 {
                    ii_ok &= self.g_tilde[e as usize] >= -1e-15;
                }
            }
        }
        let g2 = if self.e_max >= 2 { self.g_tilde[2] } else { 0.0 };
        QpsReport {
            vanishes_off_units: i_ok,
            nonnegative_on_odd_units: ii_ok,
            unit_series: series.value(),
            unit_series_positive: series.value() > 0.0,
            g_tilde_2: g2,
            negative_two_exceeds_one: (g2 < 0.0).then_some(g2.abs() > 1.0),
        }
    }
}

/// A value of the correlation formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaValue {
    pub d: u64,
    pub value: Complex64,
    pub tail_bound: f64,
}

/// G_f(d) = (1/q) Σ_{R | d, rad(R) | q} |f(R)|²/R · S_χ(d/R) · Σ_{e | d/R} G(e)/e;
/// d = 0 gives the density φ(P)/P of n with f(n) ≠ 0.
pub fn correlation_formula(setup: &ChudakovSetup, d: u64) -> FormulaValue {
    if d == 0 {
        return FormulaValue {
            d,
            value: Complex64::new(setup.nonzero_density(), 0.0),
            tail_bound: 0.0,
        };
    }
    let q = setup.modulus();
    let locals = setup.chi().local_conductors();
    let df = Factorization::trial(d);
    let mut total = Neumaier::new();
    let mut tail = 0.0;
    for r in df.divisors() {
        let rf = Factorization::trial(r);
        if rf.primes().any(|p| q % p != 0) {
            continue;
        }
        let mut fr2 = 1.0;
        for &(p, k) in &rf.factors {
            fr2 *= setup.f_at(p).modulus().powi(2 * k as i32);
        }
        if fr2 == 0.0 {
            continue;
        }
        let shift = d / r;
        let s = character_sum_from_locals(&locals, q, shift as i64);
        if s == 0 {
            continue;
        }
        let mut inner = Neumaier::new();
        for e in Factorization::trial(shift).divisors() {
            let ef = Factorization::trial(e);
            // G vanishes at e unless every prime of e is perturbed
            if ef.primes().any(|p| setup.big_f_at(p) == UnitValue::ONE) {
                continue;
            }
            let g = setup.g_defining(e);
            inner.add(g.value / e as f64);
            tail += g.tail_bound / e as f64;
        }
        total.add(fr2 / r as f64 * s as f64 * inner.value());
    }
    FormulaValue {
        d,
        value: Complex64::new(total.value() / q as f64, 0.0),
        tail_bound: tail,
    }
}

/// Δ(t), ‖t‖ and the residual of 4Δ(t) − Δ(2t) = 2‖t‖.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracIdentity {
    pub t: f64,
    pub frac: f64,
    pub delta: f64,
    pub delta_double: f64,
    pub dist: f64,
    pub check: f64,
}

fn frac(t: f64) -> f64 {
    let f = t - t.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn delta(t: f64) -> f64 {
    let f = frac(t);
    f - f * f
}

/// Distance from t to the nearest integer.
pub fn dist_to_integer(t: f64) -> f64 {
    let f = frac(t);
    f.min(1.0 - f)
}

pub fn frac_identities(t: f64) -> FracIdentity {
    let d = delta(t);
    let d2 = delta(2.0 * t);
    let n = dist_to_integer(t);
    FracIdentity {
        t,
        frac: frac(t),
        delta: d,
        delta_double: d2,
        dist: n,
        check: (4.0 * d - d2 - 2.0 * n).abs(),
    }
}

fn sum_primes(q: u64, kappa: u8) -> Result<Vec<u64>> {
    if kappa > 1 {
        return Err(config("kappa must be 0 or 1"));
    }
    if q == 0 {
        return Err(config("q must be positive"));
    }
    if (q % 2 == 0) != (kappa == 1) {
        return Err(domain(format!("kappa must be 1 exactly when q is even (q = {q}, kappa = {kappa})")));
    }
    Ok(Factorization::trial(q)
        .primes()
        .filter(|&p| !(kappa == 1 && p == 2))
        .collect())
}

/// Σ_{g | rad(q)/2^κ} μ(g) g⁻² ‖g t‖.
pub fn mobius_frac_sum(q: u64, kappa: u8, t: f64) -> Result<f64> {
    let primes = sum_primes(q, kappa)?;
    let mut acc = Neumaier::new();
    for mask in 0u32..(1 << primes.len()) {
        let mut g = 1u64;
        let mut sign = 1.0;
        for (i, &p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g *= p;
                sign = -sign;
            }
        }
        let gf = g as f64;
        acc.add(sign / (gf * gf) * dist_to_integer(gf * t));
    }
    Ok(acc.value())
}

/// Truncated Fourier expansion of [`mobius_frac_sum`] with its truncation bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierValue {
    pub value: f64,
    pub terms: u64,
    pub truncation_bound: f64,
}

/// (1/4)Π(1 − p⁻²) − π⁻² Σ_{0 < |k| ≤ K, (k, 2q) = 1} e(kt)/k².
pub fn mobius_frac_sum_fourier(q: u64, kappa: u8, t: f64, terms: u64) -> Result<FourierValue> {
    let primes = sum_primes(q, kappa)?;
    let main: f64 = primes.iter().map(|&p| 1.0 - 1.0 / (p * p) as f64).product::<f64>() / 4.0;
    let theta = 2.0 * PI * frac(t);
    let z = Complex64::from_polar(1.0, theta);
    let step = z * z;
    let mut zk = z;
    let mut acc = Neumaier::new();
    let mut k = 1u64;
    while k <= terms {
        if primes.iter().all(|&p| k % p != 0) {
            acc.add(2.0 * zk.re / (k * k) as f64);
        }
        zk *= step;
        k += 2;
    }
    Ok(FourierValue {
        value: main - acc.value() / (PI * PI),
        terms,
        truncation_bound: 2.0 / (PI * PI * terms.max(1) as f64),
    })
}

/// The truncated positivity sum and its termwise check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosCoeffsReport {
    pub h: f64,
    pub truncation: u64,
    pub tau: u8,
    pub kappa: u8,
    pub value: f64,
    pub terms: usize,
    pub min_term: f64,
    pub all_nonnegative: bool,
}

/// Σ_{d ≤ M, (d, 2^τ q) = 1} G̃(d) Σ_{R ≤ M, rad(R) | q} |f(R)|² Σ_g μ(g) g⁻² ‖Hg/(dR)‖.
pub fn poscoeffs_truncation(
    setup: &ChudakovSetup,
    h: f64,
    truncation: u64,
    tau: u8,
    kappa: u8,
) -> Result<PosCoeffsReport> {
    let q = setup.modulus();
    sum_primes(q, kappa)?;
    if tau > 1 {
        return Err(config("tau must be 0 or 1"));
    }
    if truncation == 0 {
        return Err(config("truncation must be at least 1"));
    }
    let table = g_table(setup, truncation.max(2))?;
    let expected_tau = u8::from(table.g_tilde[2] < 0.0);
    if tau != expected_tau {
        return Err(domain(format!(
            "tau must be {expected_tau} since G~(2) = {}",
            table.g_tilde[2]
        )));
    }
    let q_primes: Vec<u64> = Factorization::trial(q).primes().collect();
    let mut rs = vec![(1u64, 1.0f64)];
    for &p in &q_primes {
        let fp2 = setup.f_at(p).modulus().powi(2);
        let len = rs.len();
        for i in 0..len {
            let (mut r, mut w) = rs[i];
            loop {
                r = match r.checked_mul(p) {
                    Some(v) if v <= truncation => v,
                    _ => break,
                };
                w *= fp2;
                rs.push((r, w));
            }
        }
    }
    rs.sort_by_key(|&(r, _)| r);
    let guard = if tau == 1 { 2 * q } else { q };
    let mut acc = Neumaier::new();
    let mut terms = 0;
    let mut min_term = f64::INFINITY;
    for d in 1..=truncation {
        if gcd(d, guard) != 1 {
            continue;
        }
        let gt = table.g_tilde[d as usize];
        if gt == 0.0 {
            continue;
        }
        for &(r, w) in &rs {
            if w == 0.0 {
                continue;
            }
            let term = gt * w * mobius_frac_sum(q, kappa, h / (d as f64 * r as f64))?;
            acc.add(term);
            terms += 1;
            min_term = min_term.min(term);
        }
    }
    Ok(PosCoeffsReport {
        h,
        truncation,
        tau,
        kappa,
        value: acc.value(),
        terms,
        min_term: if terms == 0 { 0.0 } else { min_term },
        all_nonnegative: terms == 0 || min_term >= -1e-14,
    })
}

/// ½·lcm{d ≤ M : G̃(d) ≠ 0, gcd(d, 2q) = 1}, the H that makes every term large.
pub fn poscoeffs_witness_h(setup: &ChudakovSetup, truncation: u64) -> Result<f64> {
    let table = g_table(setup, truncation.max(2))?;
    let q = setup.modulus();
    let mut l = 1u128;
    for d in 1..=truncation {
        if gcd(d, 2 * q) == 1 && table.g_tilde[d as usize] != 0.0 {
            let g = gcd_u128(l, d as u128);
            l = l / g * d as u128;
        }
    }
    Ok(l as f64 / 2.0)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A linear form d·n + a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    pub d: u64,
    pub a: i64,
}

impl LinearForm {
    pub fn new(d: u64, a: i64) -> Self {
        LinearForm { d, a }
    }
}

/// M_p(f; L₁, L₂) with the weight that the discarded deep classes carry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMean {
    pub value: Complex64,
    pub tail_bound: f64,
}

const LOCAL_MEAN_CUTOFF: f64 = 1e-13;

/// Σ_{ν₁,ν₂} dens{n : p^{ν₁} ‖ L₁(n), p^{ν₂} ‖ L₂(n)} · f(p^{ν₁}) conj f(p^{ν₂}),
/// by refining residue classes of n modulo powers of p.
pub fn local_mean(f: &MultFunc, l1: LinearForm, l2: LinearForm, p: u64) -> Result<LocalMean> {
    if l1.d == 0 || l2.d == 0 {
        return Err(domain("linear forms need nonzero leading coefficients"));
    }
    if !is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    let mut values: Vec<Complex64> = Vec::new();
    let mut fv = |nu: u32| -> Complex64 {
        while values.len() <= nu as usize {
            let k = values.len() as u32;
            values.push(f.at_prime_power(p, k).to_complex());
        }
        values[nu as usize]
    };
    let pf = p as f64;
    // Σ_{i ≥ 0} (1 − 1/p) p^{−i} f(p^{s+i})
    let tail_mean = |s: u32, fv: &mut dyn FnMut(u32) -> Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut w = 1.0 - 1.0 / pf;
        let mut i = 0;
        while w > 1e-18 {
            acc += w * fv(s + i);
            w /= pf;
            i += 1;
        }
        acc
    };
    let v1 = crate::arith::valuation(l1.d, p);
    let v2 = crate::arith::valuation(l2.d, p);
    let mut total = Complex64::new(0.0, 0.0);
    let mut dropped = 0.0;
    // (residue r mod p^j, j, weight p^{−j})
    let mut stack: Vec<(i128, u32, f64)> = vec![(0, 0, 1.0)];
    let pi = p as i128;
    while let Some((r, j, weight)) = stack.pop() {
        let state = |form: LinearForm, v: u32| -> Determined {
            let c = form.d as i128 * r + form.a as i128;
            let s = v + j;
            if c != 0 {
                let vc = val_i128(c, pi);
                if vc < s {
                    return Determined::Exact(vc);
                }
            }
            Determined::Open(s)
        };
        match (state(l1, v1), state(l2, v2)) {
            (Determined::Exact(a), Determined::Exact(b)) => {
                total += weight * fv(a) * fv(b).conj();
            }
            (Determined::Exact(a), Determined::Open(s)) => {
                let m = tail_mean(s, &mut fv);
                total += weight * fv(a) * m.conj();
            }
            (Determined::Open(s), Determined::Exact(b)) => {
                let m = tail_mean(s, &mut fv);
                total += weight * m * fv(b).conj();
            }
            (Determined::Open(_), Determined::Open(_)) => {
                if weight < LOCAL_MEAN_CUTOFF {
                    dropped += weight;
                    continue;
                }
                let pj = pi.pow(j);
                for t in 0..pi {
                    stack.push((r + t * pj, j + 1, weight / pf));
                }
            }
        }
    }
    Ok(LocalMean {
        value: total,
        tail_bound: dropped,
    })
}

enum Determined {
    Exact(u32),
    Open(u32),
}

fn val_i128(mut c: i128, p: i128) -> u32 {
    let mut v = 0;
    while c % p == 0 {
        c /= p;
        v += 1;
    }
    v
}

/// Uses the sieve to check a setup's f against χ·F on n ≤ limit.
pub fn check_setup_factorization(setup: &ChudakovSetup, sieve: &Sieve, upto: u64) -> Result<bool> {
    let f = setup.f();
    let chi = setup.chi().to_multfunc();
    let big_f = setup.big_f();
    let q = setup.modulus();
    for n in 1..=upto {
        if gcd(n, q) != 1 {
            continue;
        }
        let lhs = f.evaluate(sieve, n)?;
        let rhs = chi.evaluate(sieve, n)? * big_f.evaluate(sieve, n)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;

    fn chi_mod(q: u64, order: u64) -> DirichletCharacter {
        enumerate_characters(q)
            .unwrap()
            .into_iter()
            .find(|c| c.order() == order && c.is_primitive())
            .unwrap()
    }

    #[test]
    fn local_factor_examples() {
        assert_eq!(local_factor(UnitValue::ONE, 7, 1).unwrap(), 0.0);
        assert!((local_factor(UnitValue::MINUS_ONE, 5, 1).unwrap() - 8.0).abs() < 1e-12);
        let w = local_factor(UnitValue::root(1, 3), 7, 1).unwrap();
        assert!((w - 3.0 * 48.0 / 33.0).abs() < 1e-12);
        assert!((local_factor(UnitValue::Zero, 5, 1).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(local_factor(UnitValue::Zero, 5, 2).unwrap(), 0.0);
        assert!(matches!(local_factor(UnitValue::MINUS_ONE, 3, 1), Err(Error::Singularity { .. })));
        assert!(matches!(local_factor(UnitValue::Zero, 2, 1), Err(Error::Singularity { .. })));
    }

    #[test]
    fn defining_series_matches_closed_form() {
        for (v, p) in [(UnitValue::MINUS_ONE, 5u64), (UnitValue::root(1, 3), 7), (UnitValue::Zero, 11), (UnitValue::root(2, 5), 13)] {
            let base = defining_factor(v, p, 0).value;
            for k in 1..4 {
                let ratio = defining_factor(v, p, k).value / base;
                assert!((ratio - local_factor(v, p, k).unwrap()).abs() < 1e-12, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn unperturbed_character_tables() {
        let chi = chi_mod(9, 6);
        let s = ChudakovSetup::new("chi9", chi, [], []).unwrap();
        let t = g_table(&s, 200).unwrap();
        assert_eq!(t.g1, 1.0);
        assert!((2..=200).all(|d| t.g_tilde[d] == 0.0));
        let qps = t.qps(9);
        assert!(qps.vanishes_off_units && qps.nonnegative_on_odd_units && qps.unit_series_positive);
        let v = correlation_formula(&s, 1).value.re;
        // μ(9)/9 = 0
        assert!(v.abs() < 1e-15);
        let s5 = ChudakovSetup::new("chi5", chi_mod(5, 4), [], []).unwrap();
        assert!((correlation_formula(&s5, 1).value.re + 0.2).abs() < 1e-15);
        assert!((correlation_formula(&s5, 0).value.re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn strongly_multiplicative_perturbation() {
        let s = ChudakovSetup::new("chi3_F5", chi_mod(3, 2), [(5, UnitValue::MINUS_ONE)], []).unwrap();
        let t = g_table(&s, 700).unwrap();
        for k in [5usize, 25, 125, 625] {
            assert!((t.g_tilde[k] - 8.0).abs() < 1e-9);
        }
        assert_eq!(t.g_tilde[7], 0.0);
        assert_eq!(t.g[3], 0.0);
    }

    #[test]
    fn degenerate_setup_is_reported() {
        let s = ChudakovSetup::new("chi5_F3", chi_mod(5, 4), [(3, UnitValue::MINUS_ONE)], []).unwrap();
        assert!(matches!(g_table(&s, 10), Err(Error::Degenerate(_))));
        assert!(s.g_defining(1).value.abs() < 1e-15);
        assert!((s.g_defining(9).value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn setup_validation() {
        let chi = chi_mod(5, 4);
        assert!(ChudakovSetup::new("x", chi.clone(), [(5, UnitValue::MINUS_ONE)], []).is_err());
        assert!(ChudakovSetup::new("x", chi.clone(), [(4, UnitValue::MINUS_ONE)], []).is_err());
        assert!(ChudakovSetup::new("x", chi.clone(), [(3, UnitValue::from_angle(0.1))], []).is_err());
        assert!(ChudakovSetup::new("x", chi, [], [(3, UnitValue::ONE)]).is_err());
    }

    #[test]
    fn frac_identity_examples() {
        let z = frac_identities(0.0);
        assert_eq!((z.delta, z.dist, z.check), (0.0, 0.0, 0.0));
        let h = frac_identities(0.5);
        assert_eq!((h.delta, h.delta_double, h.dist), (0.25, 0.0, 0.5));
        assert!(frac_identities(0.3).check < 1e-15);
        assert!(frac_identities(-2.7).check < 1e-14);
    }

    #[test]
    fn mobius_frac_sum_examples() {
        assert_eq!(mobius_frac_sum(1, 0, 0.3).unwrap(), dist_to_integer(0.3));
        let v = mobius_frac_sum(15, 0, 0.5).unwrap();
        assert!((v - (0.5 - 1.0 / 18.0 - 1.0 / 50.0 + 1.0 / 450.0)).abs() < 1e-15);
        assert!(mobius_frac_sum(6, 0, 0.1).is_err());
        assert!(mobius_frac_sum(5, 1, 0.1).is_err());
        for t in [0.0, 0.1, 0.37, 0.5, 2.25] {
            let direct = mobius_frac_sum(30, 1, t).unwrap();
            let four = mobius_frac_sum_fourier(30, 1, t, 200_000).unwrap();
            assert!((direct - four.value).abs() <= four.truncation_bound, "t={t}");
        }
    }

    #[test]
    fn poscoeffs_examples() {
        let chi = ChudakovSetup::new("chi5", chi_mod(5, 4), [], []).unwrap();
        for h in [3.3, 10.0, 123.7] {
            let r = poscoeffs_truncation(&chi, h, 1, 0, 0).unwrap();
            assert!((r.value - mobius_frac_sum(5, 0, h).unwrap()).abs() < 1e-15);
            let r = poscoeffs_truncation(&chi, h, 100, 0, 0).unwrap();
            assert!((r.value - mobius_frac_sum(5, 0, h).unwrap()).abs() < 1e-15);
        }
        let pert = ChudakovSetup::new("chi3_F5", chi_mod(3, 2), [(5, UnitValue::MINUS_ONE)], []).unwrap();
        let mut last = 0.0;
        for m in [10, 100, 1000] {
            let h = poscoeffs_witness_h(&pert, m).unwrap();
            let r = poscoeffs_truncation(&pert, h, m, 0, 0).unwrap();
            assert!(r.all_nonnegative);
            assert!(r.value > last);
            last = r.value;
        }
        assert!(poscoeffs_truncation(&pert, 1.0, 10, 1, 0).is_err());
    }

    #[test]
    fn local_mean_examples() {
        let one = MultFunc::one();
        let m = local_mean(&one, LinearForm::new(1, 0), LinearForm::new(1, 1), 3).unwrap();
        assert!((m.value.re - 1.0).abs() < 1e-12);
        let rough = MultFunc::one().truncate_rough(7);
        // 3 never divides 6n + 1; f is 1 on powers of 11
        for (p, want) in [(3u64, 2.0 / 3.0), (5, 3.0 / 5.0), (7, 5.0 / 7.0), (11, 1.0)] {
            let m = local_mean(&rough, LinearForm::new(1, 0), LinearForm::new(6, 1), p).unwrap();
            assert!((m.value.re - want).abs() < 1e-12, "p={p}");
        }
        // n and n + 1 are never both even
        let m = local_mean(&rough, LinearForm::new(1, 0), LinearForm::new(1, 1), 2).unwrap();
        assert!(m.value.re.abs() < 1e-12);
        let m = local_mean(&MultFunc::liouville(), LinearForm::new(1, 0), LinearForm::new(1, 1), 2).unwrap();
        assert!((m.value.re + 1.0 / 3.0).abs() < 1e-12);
    }
}
