mod common;

use common::{gcd, large, small, trial_factor, trial_is_prime, trial_spf};
use multlab_core::arith::PrimeSet;
use multlab_core::density::{
    longest_ap, rough_ap_density, structured_set_density, structured_set_members, thin_set_sums,
};
use multlab_core::fixtures::function;
use multlab_core::multfun::MultFunc;
use multlab_core::Error;
use proptest::prelude::*;

fn rough(n: u64, n_max: u64) -> bool {
    n == 1 || trial_spf(n) > n_max
}

fn eval(f: &MultFunc, n: u64) -> multlab_core::unit::UnitValue {
    trial_factor(n)
        .into_iter()
        .fold(multlab_core::unit::UnitValue::ONE, |acc, (p, k)| acc * f.at_prime_power(p, k))
}

/// (count, Σ 1/n) over members found by trial division.
fn oracle_scan(x: u64, member: impl Fn(u64) -> bool) -> (u64, f64) {
    let mut count = 0;
    let mut sum = 0.0;
    for n in 1..=x {
        if member(n) {
            count += 1;
            sum += 1.0 / n as f64;
        }
    }
    (count, sum)
}

const ROUGH_FIXTURES: [(u64, u64, u32, u64); 3] = [(3, 1, 1, 7), (3, 2, 1, 5), (1, 0, 1, 5)];

#[test]
fn rough_density_matches_trial_division_scan() {
    let x = 100_000;
    for (q, a, t, n_max) in ROUGH_FIXTURES.into_iter().chain([(7, 3, 1, 11), (5, 1, 1, 7), (1, 0, 0, 3)]) {
        let d = (2 * q).pow(t);
        let r = rough_ap_density(q, a, t, n_max, x, &[x], small()).unwrap();
        let (count, sum) = oracle_scan(x, |n| n % q == a % q && rough(n, n_max) && rough(d * n + 1, n_max));
        assert_eq!(r.member_count, count, "({q}, {a}, {t}, {n_max})");
        assert!((r.log_sum - sum).abs() < 1e-12 * sum.max(1.0));
        let sample: Vec<u64> = (1..=x)
            .filter(|&n| n % q == a % q && rough(n, n_max) && rough(d * n + 1, n_max))
            .take(r.sample.len())
            .collect();
        assert_eq!(r.sample, sample);
    }
}

#[test]
fn consecutive_integers_are_never_rough() {
    for n_max in [2u64, 3, 7] {
        let r = rough_ap_density(1, 0, 0, n_max, 100_000, &[100_000], small()).unwrap();
        assert_eq!(r.member_count, 0);
        assert_eq!(r.empirical, 0.0);
    }
}

#[test]
fn local_density_oracle() {
    // density of residues n mod Π p with n ≡ a (q) and p ∤ n(Dn+1), counted directly
    for (q, a, t, n_max) in ROUGH_FIXTURES {
        let d = (2 * q).pow(t);
        let primes: Vec<u64> = (2..=n_max).filter(|&p| trial_is_prime(p)).collect();
        let mut m = q;
        for &p in &primes {
            if m % p != 0 {
                m *= p;
            }
        }
        let good = (0..m)
            .filter(|&n| n % q == a % q && primes.iter().all(|&p| n % p != 0 && (d * n + 1) % p != 0))
            .count();
        let r = rough_ap_density(q, a, t, n_max, 1_000, &[1_000], small()).unwrap();
        assert!((r.local_density - good as f64 / m as f64).abs() < 1e-12, "({q}, {a}, {t}, {n_max})");
    }
}

#[test]
fn ratios_trend_toward_one() {
    let (x1, x2) = (1_000u64, 1_000_000u64);
    for (q, a, t, n_max) in ROUGH_FIXTURES {
        let r1 = rough_ap_density(q, a, t, n_max, x1, &[x1], large()).unwrap();
        let r2 = rough_ap_density(q, a, t, n_max, x2, &[x2], large()).unwrap();
        let (p1, p2) = (r1.ratio.unwrap(), r2.ratio.unwrap());
        assert!((p2 - 1.0).abs() < (p1 - 1.0).abs(), "({q}, {a}, {t}, {n_max}): {p1} -> {p2}");
        let (l1, l2) = (r1.local_ratio.unwrap(), r2.local_ratio.unwrap());
        assert!((l2 - 1.0).abs() < (l1 - 1.0).abs(), "({q}, {a}, {t}, {n_max}): {l1} -> {l2}");
    }
}

#[test]
fn hypothesis_violation_is_a_domain_error() {
    // a = 3 shares a factor with q = 3
    assert!(matches!(
        rough_ap_density(3, 0, 1, 7, 1_000, &[1_000], small()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn structured_set_members_match_trial_division() {
    let x = 10_000;
    for (name, q, t, n_max) in [("chi9_cubic", 9u64, 1u32, 7u64), ("liouville", 1, 1, 5), ("one", 3, 1, 7)] {
        let g = function(name).unwrap();
        let d = (2 * q).pow(t);
        let members = structured_set_members(&g, q, t, n_max, x, small()).unwrap();
        let oracle: Vec<u64> = (1..=x)
            .filter(|&n| rough(n, n_max) && rough(d * n + 1, n_max) && eval(&g, n) == eval(&g, d * n + 1))
            .collect();
        assert_eq!(members, oracle, "{name}");
    }
}

#[test]
fn structured_set_with_trivial_g_is_the_rough_set() {
    let g = MultFunc::one();
    let x = 100_000;
    let s = structured_set_density(&g, 1, 1, 3, 1, 7, x, &[x], small()).unwrap();
    let (count, _) = oracle_scan(x, |n| rough(n, 7) && rough(6 * n + 1, 7));
    assert_eq!(s.member_count, count);
    // main term (3/4)Π(1 − 2/p) for 3 ≤ p ≤ 7
    assert!((s.predicted - 0.75 * (1.0 / 3.0) * (3.0 / 5.0) * (5.0 / 7.0)).abs() < 1e-15);
}

#[test]
fn structured_set_rejects_infinite_order() {
    let g = function("irrational_rotation").unwrap();
    assert!(matches!(
        structured_set_density(&g, 1, 1, 3, 1, 7, 1_000, &[1_000], small()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn cubic_structured_set_contains_long_progressions() {
    let g = function("chi9_cubic").unwrap();
    let members = structured_set_members(&g, 9, 1, 7, 10_000, small()).unwrap();
    let (start, step, len) = longest_ap(&members).unwrap();
    assert!(len >= 4);
    for i in 0..len as u64 {
        assert!(members.binary_search(&(start + i * step)).is_ok());
    }
}

#[test]
fn thin_sums_examples() {
    let empty = thin_set_sums(&PrimeSet::empty(), 1_000, &[1_000], None).unwrap();
    assert_eq!((empty.sum_tau, empty.sum_tau_log_over_logx), (1.0, 0.0));

    let x = 1u64 << 20;
    let two = thin_set_sums(&PrimeSet::listed([2]), x, &[x], None).unwrap();
    let partial: f64 = (0..=20).map(|k| (k + 1) as f64 / 2f64.powi(k)).sum();
    assert!((two.sum_tau - partial).abs() < 1e-12);
    assert!((two.sum_tau - 4.0).abs() < 1e-4);
}

fn thin_fixture() -> PrimeSet {
    PrimeSet::listed((101..=10_000).filter(|&p| p % 8 == 1 && trial_is_prime(p)))
}

#[test]
fn thin_sums_match_trial_division() {
    let x = 200_000;
    for s in [thin_fixture(), PrimeSet::listed([2, 3]), PrimeSet::listed([3, 5, 7, 11])] {
        let r = thin_set_sums(&s, x, &[x], None).unwrap();
        let mut sum = 0.0;
        let mut log_sum = 0.0;
        let mut count = 0;
        for n in 1..=x {
            let f = trial_factor(n);
            if f.iter().all(|&(p, _)| s.contains(p)) {
                let tau: u32 = f.iter().map(|&(_, e)| e + 1).product();
                sum += tau as f64 / n as f64;
                log_sum += tau as f64 * (n as f64).ln() / n as f64;
                count += 1;
            }
        }
        assert_eq!(r.member_count, count);
        assert!((r.sum_tau - sum).abs() < 1e-12);
        assert!((r.sum_tau_log_over_logx - log_sum / (x as f64).ln()).abs() < 1e-12);
    }
}

#[test]
fn thin_sums_stabilize() {
    // products of two primes near 10^3 keep adding mass until x passes about 10^8
    let s = thin_fixture();
    let mut last = 0.0;
    for x in [1_000_000u64, 10_000_000, 100_000_000, 1_000_000_000] {
        let r = thin_set_sums(&s, 2 * x, &[x, 2 * x], None).unwrap();
        let d = r.profile[1].sum_tau - r.profile[0].sum_tau;
        assert!(d >= 0.0 && r.profile[0].sum_tau >= last && r.sum_tau < 2.0);
        if x >= 100_000_000 {
            assert!(d < 1e-3, "x = {x}: {d}");
        }
        last = r.profile[1].sum_tau;
    }
}

#[test]
fn sieved_sets_need_a_sieve_but_agree_with_lists() {
    let rule = PrimeSet::Residues { modulus: 8, residues: vec![1], above: 100, up_to: Some(10_000) };
    assert!(thin_set_sums(&rule, 1_000_000, &[1_000_000], None).is_err());
    let a = thin_set_sums(&rule, 1_000_000, &[1_000_000], Some(small())).unwrap();
    let b = thin_set_sums(&thin_fixture(), 1_000_000, &[1_000_000], None).unwrap();
    assert_eq!(a.member_count, b.member_count);
    assert!((a.sum_tau - b.sum_tau).abs() < 1e-12);
}

#[test]
fn longest_ap_examples() {
    assert_eq!(longest_ap(&[1, 2, 3, 4, 5]).unwrap(), (1, 1, 5));
    assert_eq!(longest_ap(&[1, 3, 5, 9, 11]).unwrap(), (1, 2, 3));
    assert!(matches!(longest_ap(&(0..100_001).collect::<Vec<_>>()), Err(Error::Size { .. })));
}

/// Longest progression by checking every (start, step) pair.
fn oracle_ap(set: &[u64]) -> (u64, u64, usize) {
    if set.is_empty() {
        return (0, 0, 0);
    }
    let mut best = (set[0], 0, 1);
    let max = *set.last().unwrap();
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            let step = b - a;
            let mut len = 1;
            let mut v = a;
            while v + step <= max && set.binary_search(&(v + step)).is_ok() {
                v += step;
                len += 1;
            }
            let better = len > best.2 || (len == best.2 && (step < best.1 || (step == best.1 && a < best.0)));
            if better {
                best = (a, step, len);
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn longest_ap_matches_exhaustive_search(set in prop::collection::btree_set(0u64..300, 0..60)) {
        let v: Vec<u64> = set.into_iter().collect();
        prop_assert_eq!(longest_ap(&v).unwrap(), oracle_ap(&v));
    }

    #[test]
    fn rough_density_oracle_random(q in 1u64..12, a in 0u64..12, n_max in 2u64..12) {
        let a = a % q;
        let d = 2 * q;
        prop_assume!(gcd(a * (d * a + 1), q) == 1);
        let x = 20_000;
        let r = rough_ap_density(q, a, 1, n_max, x, &[x], small()).unwrap();
        let (count, sum) = oracle_scan(x, |n| n % q == a && rough(n, n_max) && rough(d * n + 1, n_max));
        prop_assert_eq!(r.member_count, count);
        prop_assert!((r.log_sum - sum).abs() < 1e-12 * sum.max(1.0));
    }
}
