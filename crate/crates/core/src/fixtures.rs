//! Named functions and setups, and the JSON forms that refer to them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::{character, enumerate_characters, DirichletCharacter};
use crate::closedform::ChudakovSetup;
use crate::error::{config, Result};
use crate::multfun::{FunctionDef, MultFunc};
use crate::unit::UnitValue;

/// Names accepted by [`function`].
pub const FUNCTION_NAMES: &[&str] = &[
    "one",
    "liouville",
    "alternating",
    "chi3",
    "chi5",
    "chi9",
    "chi9_gap",
    "chi9_cubic",
    "chi9_flip2",
    "chi9_root2",
    "chi9_root6",
    "chi9_root6_twist",
    "chi9_thin",
    "cubic_const",
    "irrational_rotation",
    "random_unimodular",
];

/// Names accepted by [`setup`].
pub const SETUP_NAMES: &[&str] = &["chi5_F3neg", "chi9", "chi9_F7_e13"];

/// Seed of the `random_unimodular` fixture.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// The first character mod q with χ(n) = v.
pub fn character_with_value(q: u64, n: i64, v: UnitValue) -> Result<DirichletCharacter> {
    enumerate_characters(q)?
        .into_iter()
        .find(|c| c.value(n) == v)
        .ok_or_else(|| config(format!("no character mod {q} has chi({n}) = {v}")))
}

/// The order-6 character mod 9 with χ(2) = e(1/6); |χ(n) − χ(n+1)| ≥ 1 for all n.
pub fn chi9_gap() -> DirichletCharacter {
    character_with_value(9, 2, UnitValue::root(1, 6)).expect("mod 9 has an order-6 character")
}

/// The cubic character mod 9 with χ(2) = e(1/3).
pub fn chi9_cubic_character() -> DirichletCharacter {
    character_with_value(9, 2, UnitValue::root(1, 3)).expect("mod 9 has a cubic character")
}

/// The quartic character mod 5 with χ(2) = i.
pub fn chi5() -> DirichletCharacter {
    character_with_value(5, 2, UnitValue::root(1, 4)).expect("mod 5 has a quartic character")
}

pub fn chi3() -> DirichletCharacter {
    character(3, 1).expect("mod 3 has two characters")
}

/// Completely multiplicative g with g(p)^k = χ9(p): the angle of χ9(p) divided by k, g(3) = 1.
pub fn chi9_root(k: u64) -> MultFunc {
    let chi = chi9_gap();
    MultFunc::completely(format!("chi9_root{k}"), move |p| match chi.value(p as i64) {
        UnitValue::Root { a, b } => UnitValue::root(a as i64, b * k),
        _ => UnitValue::ONE,
    })
}

/// [`chi9_root`] with k = 6 changed on a finite set of primes r ≡ 1 mod 9 to e(1/(ℓk)), ℓ = 5.
pub fn chi9_thin() -> MultFunc {
    const K: u64 = 6;
    const ELL: u64 = 5;
    let g = chi9_root(K);
    MultFunc::completely("chi9_thin", move |p| {
        if THIN_PRIMES.contains(&p) {
            UnitValue::root(1, ELL * K)
        } else {
            g.at_prime(p)
        }
    })
}

/// Primes r ≡ 1 mod 9 used by [`chi9_thin`].
pub const THIN_PRIMES: &[u64] = &[19, 37, 73, 109, 127, 163, 181, 199];

pub fn random_unimodular(seed: u64) -> MultFunc {
    MultFunc::completely(format!("random_unimodular[{seed}]"), move |p| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(p);
        UnitValue::from_angle(rng.gen::<f64>())
    })
}

/// Completely multiplicative with f(p) = e(α) for every p.
pub fn rotation(name: &str, value: UnitValue) -> MultFunc {
    MultFunc::completely(name.to_string(), move |_| value)
}

pub fn function(name: &str) -> Result<MultFunc> {
    let f = match name {
        "one" => MultFunc::one(),
        "liouville" => MultFunc::liouville(),
        "alternating" => MultFunc::alternating(),
        "chi3" => chi3().to_multfunc().with_name("chi3"),
        "chi5" => chi5().to_multfunc().with_name("chi5"),
        "chi9" | "chi9_gap" => chi9_gap().to_multfunc().with_name(name),
        "chi9_cubic" => {
            let chi = chi9_cubic_character();
            MultFunc::completely("chi9_cubic", move |p| {
                if p == 3 {
                    UnitValue::ONE
                } else {
                    chi.value(p as i64)
                }
            })
        }
        "chi9_flip2" => {
            let chi = chi9_gap();
            MultFunc::completely("chi9_flip2", move |p| {
                let v = chi.value(p as i64);
                if p == 2 {
                    v.conj()
                } else {
                    v
                }
            })
        }
        "chi9_root2" => chi9_root(2),
        "chi9_root6" => chi9_root(6),
        "chi9_root6_twist" => chi9_root(6).twist(1.0).with_name("chi9_root6_twist"),
        "chi9_thin" => chi9_thin(),
        "cubic_const" => rotation("cubic_const", UnitValue::root(1, 3)),
        "irrational_rotation" => rotation(
            "irrational_rotation",
            UnitValue::from_angle(std::f64::consts::SQRT_2 - 1.0),
        ),
        "random_unimodular" => random_unimodular(DEFAULT_SEED),
        other => {
            return Err(config(format!(
                "unknown function fixture {other:?}; known: {}",
                FUNCTION_NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}

/// Order data (m, k) with g^{mk} = 1, for the fixtures that have finite order.
pub fn order_data(name: &str) -> Option<(u32, u32)> {
    match name {
        "one" => Some((1, 1)),
        "liouville" | "alternating" => Some((2, 1)),
        "chi9_cubic" | "cubic_const" => Some((3, 1)),
        "chi9" | "chi9_gap" | "chi9_flip2" => Some((6, 1)),
        "chi5" => Some((4, 1)),
        "chi3" => Some((2, 1)),
        "chi9_root2" => Some((6, 2)),
        "chi9_root6" => Some((6, 6)),
        _ => None,
    }
}

pub fn setup(name: &str) -> Result<ChudakovSetup> {
    match name {
        "chi5_F3neg" => ChudakovSetup::new(name, chi5(), [(3, UnitValue::MINUS_ONE)], []),
        "chi9" => ChudakovSetup::new(name, chi9_gap(), [], []),
        "chi9_F7_e13" => ChudakovSetup::new(name, chi9_gap(), [(7, UnitValue::root(1, 3))], []),
        other => Err(config(format!(
            "unknown setup fixture {other:?}; known: {}",
            SETUP_NAMES.join(", ")
        ))),
    }
}

/// A function given in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Fixture { name: String },
    Character { q: u64, index: usize },
    CharacterTable { q: u64, values: Vec<UnitValue> },
    Definition(FunctionDef),
    RandomUnimodular { seed: u64 },
    Rotation { value: UnitValue },
    Conjugate { of: Box<FunctionSpec> },
    Power { of: Box<FunctionSpec>, e: u32 },
    Twist { of: Box<FunctionSpec>, t: f64 },
    TruncateRough { of: Box<FunctionSpec>, n: u64 },
    Product { f: Box<FunctionSpec>, g: Box<FunctionSpec> },
}

impl FunctionSpec {
    pub fn fixture(name: &str) -> Self {
        FunctionSpec::Fixture { name: name.into() }
    }

    pub fn build(&self) -> Result<MultFunc> {
        use crate::multfun::{combine, CombineMode};
        Ok(match self {
            FunctionSpec::Fixture { name } => function(name)?,
            FunctionSpec::Character { q, index } => character(*q, *index)?.to_multfunc(),
            FunctionSpec::CharacterTable { q, values } => {
                DirichletCharacter::from_value_table(*q, values.clone())?.to_multfunc()
            }
            FunctionSpec::Definition(def) => def.build()?,
            FunctionSpec::RandomUnimodular { seed } => random_unimodular(*seed),
            FunctionSpec::Rotation { value } => rotation(&format!("rotation[{value}]"), *value),
            FunctionSpec::Conjugate { of } => combine(&of.build()?, None, CombineMode::Conjugate)?,
            FunctionSpec::Power { of, e } => combine(&of.build()?, None, CombineMode::Power(*e))?,
            FunctionSpec::Twist { of, t } => combine(&of.build()?, None, CombineMode::Twist(*t))?,
            FunctionSpec::TruncateRough { of, n } => {
                combine(&of.build()?, None, CombineMode::TruncateRough(*n))?
            }
            FunctionSpec::Product { f, g } => {
                combine(&f.build()?, Some(&g.build()?), CombineMode::Product)?
            }
        })
    }

    /// Order data of a named fixture, if known.
    pub fn order_data(&self) -> Option<(u32, u32)> {
        match self {
            FunctionSpec::Fixture { name } => order_data(name),
            _ => None,
        }
    }
}

/// A character given by (q, index) or by its value table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CharacterRef {
    Indexed { q: u64, index: usize },
    Table { q: u64, values: Vec<UnitValue> },
}

impl CharacterRef {
    pub fn build(&self) -> Result<DirichletCharacter> {
        match self {
            CharacterRef::Indexed { q, index } => character(*q, *index),
            CharacterRef::Table { q, values } => DirichletCharacter::from_value_table(*q, values.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeValue {
    pub p: u64,
    pub value: UnitValue,
}

/// A setup f = χ·F given in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetupSpec {
    Fixture {
        name: String,
    },
    Definition {
        name: String,
        character: CharacterRef,
        #[serde(default)]
        perturbations: Vec<PrimeValue>,
        /// f(p) for p | q; unlisted primes give 0.
        #[serde(default)]
        modulus_prime_values: Vec<PrimeValue>,
    },
}

impl SetupSpec {
    pub fn build(&self) -> Result<ChudakovSetup> {
        match self {
            SetupSpec::Fixture { name } => setup(name),
            SetupSpec::Definition {
                name,
                character,
                perturbations,
                modulus_prime_values,
            } => ChudakovSetup::new(
                name.clone(),
                character.build()?,
                perturbations.iter().map(|v| (v.p, v.value)),
                modulus_prime_values.iter().map(|v| (v.p, v.value)),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Sieve;

    #[test]
    fn every_fixture_builds() {
        for name in FUNCTION_NAMES {
            function(name).unwrap();
        }
        for name in SETUP_NAMES {
            setup(name).unwrap();
        }
        assert!(function("nope").is_err());
    }

    #[test]
    fn chi9_values() {
        let chi = chi9_gap();
        assert!(chi.is_primitive());
        assert_eq!(chi.order(), 6);
        for n in 0..9 {
            let d = chi.value(n).distance(&chi.value(n + 1));
            assert!(d >= 1.0 - 1e-12, "n={n}");
        }
        // χ² is the cubic character
        assert_eq!(chi9_cubic_character().value(2), chi.value(2).pow(2));
    }

    #[test]
    fn root_lift_has_kth_power_chi() {
        let s = Sieve::new(1000).unwrap();
        let g = chi9_root(6);
        let chi = chi9_gap();
        for n in (1..1000u64).filter(|n| n % 3 != 0) {
            assert_eq!(g.evaluate(&s, n).unwrap().pow(6), chi.value(n as i64));
        }
    }

    #[test]
    fn random_fixture_is_deterministic() {
        let a = random_unimodular(7);
        let b = random_unimodular(7);
        let c = random_unimodular(8);
        assert_eq!(a.at_prime(101), b.at_prime(101));
        assert_ne!(a.at_prime(101), c.at_prime(101));
        assert!((a.at_prime(13).modulus() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn specs_round_trip() {
        let spec: FunctionSpec = serde_json::from_str(
            r#"{"kind": "twist", "t": 0.5, "of": {"kind": "character", "q": 5, "index": 1}}"#,
        )
        .unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.twist_exponent(), 0.5);
        let def: FunctionSpec = serde_json::from_str(
            r#"{"kind": "definition", "name": "flip3", "completely_multiplicative": true,
                "rules": [{"p": 3, "value": {"type": "root", "a": 1, "b": 2}}]}"#,
        )
        .unwrap();
        assert_eq!(def.build().unwrap().at_prime(3), UnitValue::MINUS_ONE);
        let s: SetupSpec = serde_json::from_str(
            r#"{"kind": "definition", "name": "x", "character": {"q": 5, "index": 1},
                "perturbations": [{"p": 7, "value": {"type": "root", "a": 1, "b": 2}}]}"#,
        )
        .unwrap();
        assert_eq!(s.build().unwrap().big_f_at(7), UnitValue::MINUS_ONE);
        let text = serde_json::to_string(&FunctionSpec::fixture("chi5")).unwrap();
        assert_eq!(text, r#"{"kind":"fixture","name":"chi5"}"#);
    }
}
