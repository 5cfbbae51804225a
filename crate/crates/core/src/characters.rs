//! Dirichlet characters with exact values, built from a generator
//! decomposition of (Z/qZ)^*.

use serde::Serialize;

use crate::arith::{gcd, inv_mod, lcm, pow_mod, valuation, Factorization};
use crate::cyclo::CycloInt;
use crate::error::{config, domain, Result};
use crate::multfun::MultFunc;
use crate::unit::UnitValue;

/// Largest supported modulus.
pub const MAX_MODULUS: u64 = 1_000_000;

/// One cyclic factor of (Z/qZ)^*: a generator modulo a prime power and a
/// discrete-log table on residues modulo that prime power.
#[derive(Clone, Debug)]
struct Generator {
    prime_power: u64,
    element: u64,
    order: u64,
    /// log[r] for r mod prime_power; u32::MAX marks residues outside the unit group.
    log: Vec<u32>,
}

/// The character group of (Z/qZ)^*.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    modulus: u64,
    gens: Vec<Generator>,
    exponent: u64,
}

fn primitive_root_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let f = Factorization::trial(p - 1);
    (2..p)
        .find(|&g| f.primes().all(|r| pow_mod(g, (p - 1) / r, p) != 1))
        .expect("primitive root exists")
}

fn cyclic_log(pp: u64, g: u64, order: u64) -> Vec<u32> {
    let mut log = vec![u32::MAX; pp as usize];
    let mut x = 1u64;
    for k in 0..order {
        log[x as usize] = k as u32;
        x = x * g % pp;
    }
    log
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 || q > MAX_MODULUS {
            return Err(config(format!("modulus {q} outside 1..={MAX_MODULUS}")));
        }
        let mut gens = Vec::new();
        for &(p, e) in &Factorization::trial(q).factors {
            let pp = p.pow(e);
            if p == 2 {
                match e {
                    1 => {}
                    2 => gens.push(Generator {
                        prime_power: 4,
                        element: 3,
                        order: 2,
                        log: cyclic_log(4, 3, 2),
                    }),
                    _ => {
                        // a ≡ (−1)^s 5^t mod 2^e
                        let half = pp / 4;
                        let mut log_s = vec![u32::MAX; pp as usize];
                        let mut log_t = vec![u32::MAX; pp as usize];
                        let mut x = 1u64;
                        for t in 0..half {
                            log_s[x as usize] = 0;
                            log_t[x as usize] = t as u32;
                            let y = pp - x;
                            log_s[y as usize] = 1;
                            log_t[y as usize] = t as u32;
                            x = x * 5 % pp;
                        }
                        gens.push(Generator { prime_power: pp, element: pp - 1, order: 2, log: log_s });
                        gens.push(Generator { prime_power: pp, element: 5, order: half, log: log_t });
                    }
                }
            } else {
                let mut g = primitive_root_prime(p);
                if e >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                    g += p;
                }
                let order = pp / p * (p - 1);
                gens.push(Generator {
                    prime_power: pp,
                    element: g % pp,
                    order,
                    log: cyclic_log(pp, g % pp, order),
                });
            }
        }
        let exponent = gens.iter().fold(1, |acc, g| lcm(acc, g.order));
        Ok(CharacterGroup { modulus: q, gens, exponent })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of characters, φ(q).
    pub fn size(&self) -> usize {
        self.gens.iter().map(|g| g.order as usize).product()
    }

    fn exponents(&self, index: usize) -> Vec<u64> {
        let mut rest = index;
        let mut out = vec![0u64; self.gens.len()];
        for (i, g) in self.gens.iter().enumerate().rev() {
            out[i] = (rest % g.order as usize) as u64;
            rest /= g.order as usize;
        }
        out
    }

    pub fn character(&self, index: usize) -> Result<DirichletCharacter> {
        if index >= self.size() {
            return Err(config(format!(
                "character index {index} out of range for modulus {} ({} characters)",
                self.modulus,
                self.size()
            )));
        }
        let c = self.exponents(index);
        let q = self.modulus;
        let e = self.exponent;
        let mut values = vec![UnitValue::Zero; q as usize];
        for a in 0..q {
            if gcd(a, q) != 1 {
                continue;
            }
            let mut num = 0u64;
            for (g, &ci) in self.gens.iter().zip(&c) {
                let l = g.log[(a % g.prime_power) as usize] as u64;
                num = (num + ci * l % g.order * (e / g.order)) % e;
            }
            values[a as usize] = UnitValue::root(num as i64, e);
        }
        if q == 1 {
            values[0] = UnitValue::ONE;
        }
        let mut chi = DirichletCharacter::assemble(q, values)?;
        chi.index = Some(index);
        Ok(chi)
    }

    pub fn characters(&self) -> Result<Vec<DirichletCharacter>> {
        (0..self.size()).map(|i| self.character(i)).collect()
    }
}

/// All characters mod q in the deterministic enumeration order; index 0 is principal.
pub fn enumerate_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    CharacterGroup::new(q)?.characters()
}

/// The character with the given index mod q.
pub fn character(q: u64, index: usize) -> Result<DirichletCharacter> {
    CharacterGroup::new(q)?.character(index)
}

/// A Dirichlet character with its exact value table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletCharacter {
    modulus: u64,
    index: Option<usize>,
    order: u64,
    conductor: u64,
    primitive: bool,
    values: Vec<UnitValue>,
}

impl DirichletCharacter {
    fn assemble(q: u64, values: Vec<UnitValue>) -> Result<Self> {
        let mut order = 1;
        for v in &values {
            match v {
                UnitValue::Zero => {}
                UnitValue::Root { b, .. } => order = lcm(order, *b),
                UnitValue::Approx { .. } => {
                    return Err(domain("character values must be exact roots of unity"))
                }
            }
        }
        let mut chi = DirichletCharacter {
            modulus: q,
            index: None,
            order,
            conductor: q,
            primitive: true,
            values,
        };
        chi.conductor = chi.compute_conductor();
        chi.primitive = chi.conductor == q;
        Ok(chi)
    }

    fn compute_conductor(&self) -> u64 {
        let q = self.modulus;
        for d in Factorization::trial(q).divisors() {
            let trivial = (1..=q)
                .step_by(d as usize)
                .map(|a| a % q)
                .filter(|&a| gcd(a, q) == 1)
                .all(|a| self.values[a as usize] == UnitValue::ONE);
            if trivial {
                return d;
            }
        }
        q
    }

    /// Builds a character from its value table on 0..q, checking the axioms.
    pub fn from_value_table(q: u64, values: Vec<UnitValue>) -> Result<Self> {
        if q == 0 || q > MAX_MODULUS {
            return Err(config(format!("modulus {q} outside 1..={MAX_MODULUS}")));
        }
        if values.len() as u64 != q {
            return Err(domain(format!("expected {q} values, got {}", values.len())));
        }
        for (a, v) in values.iter().enumerate() {
            let unit = gcd(a as u64, q) == 1;
            if unit == v.is_zero() {
                return Err(domain(format!(
                    "value at {a} must be {} since gcd({a}, {q}) {} 1",
                    if unit { "nonzero" } else { "zero" },
                    if unit { "=" } else { ">" }
                )));
            }
        }
        if values[1 % q as usize] != UnitValue::ONE {
            return Err(domain("chi(1) must be 1"));
        }
        let group = CharacterGroup::new(q)?;
        // Generators lifted to residues mod q by the CRT.
        for g in &group.gens {
            let lifted = crt(g.element, g.prime_power, 1, q / g.prime_power);
            for a in 0..q {
                let lhs = values[(a * lifted % q) as usize];
                let rhs = values[a as usize] * values[lifted as usize];
                if lhs != rhs {
                    return Err(domain(format!("value table is not multiplicative at {a}·{lifted}")));
                }
            }
        }
        Self::assemble(q, values)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn index(&self) -> Option<usize> {
        self.index
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    pub fn values(&self) -> &[UnitValue] {
        &self.values
    }

    pub fn value(&self, n: i64) -> UnitValue {
        self.values[n.rem_euclid(self.modulus as i64) as usize]
    }

    pub fn label(&self) -> String {
        match self.index {
            Some(i) => format!("chi_{}_{}", self.modulus, i),
            None => format!("chi_{}_table", self.modulus),
        }
    }

    pub fn to_multfunc(&self) -> MultFunc {
        let values = self.values.clone();
        let q = self.modulus;
        MultFunc::completely(self.label(), move |p| values[(p % q) as usize])
    }

    /// The character mod q_new agreeing with this one on integers coprime to q_new.
    pub fn induce(&self, q_new: u64) -> Result<DirichletCharacter> {
        let c = self.conductor;
        if q_new == 0 || q_new % c != 0 {
            return Err(domain(format!("conductor {c} does not divide {q_new}")));
        }
        if q_new > MAX_MODULUS {
            return Err(config(format!("modulus {q_new} outside 1..={MAX_MODULUS}")));
        }
        let q = self.modulus;
        // Primitive values on residues mod the conductor.
        let mut prim = vec![UnitValue::Zero; c as usize];
        for r in 0..c {
            if gcd(r, c) != 1 {
                continue;
            }
            let a = (0..q)
                .map(|j| r + j * c)
                .find(|&a| gcd(a, q) == 1)
                .expect("unit lift exists");
            prim[r as usize] = self.values[(a % q) as usize];
        }
        if c == 1 {
            prim[0] = UnitValue::ONE;
        }
        let values = (0..q_new)
            .map(|a| {
                if gcd(a, q_new) == 1 {
                    prim[(a % c) as usize]
                } else {
                    UnitValue::Zero
                }
            })
            .collect();
        Self::assemble(q_new, values)
    }

    /// Local components: (p, k, j) for each p^k ‖ q with local conductor p^j.
    pub fn local_conductors(&self) -> Vec<(u64, u32, u32)> {
        let q = self.modulus;
        let mut out = Vec::new();
        for &(p, k) in &Factorization::trial(q).factors {
            let pk = p.pow(k);
            let rest = q / pk;
            let local = |r: u64| self.values[crt(r, pk, 1, rest) as usize];
            let j = (0..=k)
                .find(|&j| {
                    let pj = p.pow(j);
                    (1..pk)
                        .step_by(pj as usize)
                        .filter(|&a| a % p != 0)
                        .all(|a| local(a) == UnitValue::ONE)
                })
                .unwrap_or(k);
            out.push((p, k, j));
        }
        out
    }
}

/// The residue mod m1·m2 congruent to r1 mod m1 and r2 mod m2 (coprime moduli).
pub fn crt(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    if m2 == 1 {
        return r1 % m1;
    }
    if m1 == 1 {
        return r2 % m2;
    }
    let m = m1 as u128 * m2 as u128;
    let inv = inv_mod(m1 % m2, m2).expect("coprime moduli") as u128;
    let t = ((r2 as u128 + m2 as u128 - (r1 % m2) as u128) % m2 as u128) * inv % m2 as u128;
    ((r1 as u128 % m1 as u128 + m1 as u128 * t) % m) as u64
}

/// S_χ(h) = Σ_{a mod q} χ(a)·conj χ(a+h), by direct summation in exact arithmetic.
pub fn character_sum(chi: &DirichletCharacter, h: i64) -> CycloInt {
    let q = chi.modulus as i64;
    let terms = (0..q).map(|a| chi.value(a) * chi.value(a + h).conj());
    CycloInt::from_values(chi.order, terms).expect("character values have denominators dividing the order")
}

/// S_χ(h) from the local case formula, multiplied over prime powers of q.
pub fn character_sum_closed_form(chi: &DirichletCharacter, h: i64) -> i64 {
    character_sum_from_locals(&chi.local_conductors(), chi.modulus, h)
}

/// As [`character_sum_closed_form`] with precomputed local conductors.
pub fn character_sum_from_locals(locals: &[(u64, u32, u32)], q: u64, h: i64) -> i64 {
    let h = h.rem_euclid(q as i64) as u64;
    let mut total = 1i64;
    for &(p, k, j) in locals {
        let pk = p.pow(k);
        // ν_p(h) capped at k; h ≡ 0 mod p^k behaves like l = ∞
        let l = if h % pk == 0 { k } else { valuation(h, p) };
        let local = if j == 0 {
            let base = p.pow(k - 1) as i64;
            if l >= 1 {
                base * (p as i64 - 1)
            } else {
                base * (p as i64 - 2)
            }
        } else {
            let scale = p.pow(k - j) as i64;
            if l + 2 <= j {
                0
            } else if l + 1 == j {
                -scale * p.pow(j - 1) as i64
            } else {
                scale * (p.pow(j - 1) * (p - 1)) as i64
            }
        };
        total *= local;
        if total == 0 {
            break;
        }
    }
    total
}
