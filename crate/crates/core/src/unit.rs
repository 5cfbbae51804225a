//! Values of 1-bounded functions: exact roots of unity e(a/b), exact zero, or
//! a floating complex number.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::error::{domain, Error, Result};

/// Largest denominator kept exact; bigger angles fall back to floats.
pub const ROOT_DENOMINATOR_CAP: u64 = 1_000_000;

/// Allowed excess of |z| over 1 for approximate values.
pub const MODULUS_SLACK: f64 = 1e-12;

/// e(a/b) with 0 ≤ a < b and gcd(a, b) = 1, zero, or an approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawUnitValue")]
pub enum UnitValue {
    Zero,
    Root { a: u64, b: u64 },
    Approx { re: f64, im: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawUnitValue {
    Zero,
    Root { a: i64, b: u64 },
    Approx { re: f64, im: f64 },
}

impl TryFrom<RawUnitValue> for UnitValue {
    type Error = Error;

    fn try_from(raw: RawUnitValue) -> Result<Self> {
        match raw {
            RawUnitValue::Zero => Ok(UnitValue::Zero),
            RawUnitValue::Root { a, b } => UnitValue::try_root(a, b),
            RawUnitValue::Approx { re, im } => UnitValue::approx(re, im),
        }
    }
}

impl UnitValue {
    pub const ONE: UnitValue = UnitValue::Root { a: 0, b: 1 };
    pub const MINUS_ONE: UnitValue = UnitValue::Root { a: 1, b: 2 };

    /// e(a/b), reduced; b = 0 is rejected.
    pub fn try_root(a: i64, b: u64) -> Result<Self> {
        if b == 0 {
            return Err(domain("root of unity with denominator 0"));
        }
        let a = (a as i128).rem_euclid(b as i128) as u64;
        Ok(Self::reduced(a as u128, b as u128))
    }

    /// e(a/b); panics on b = 0.
    pub fn root(a: i64, b: u64) -> Self {
        Self::try_root(a, b).expect("nonzero denominator")
    }

    fn reduced(a: u128, b: u128) -> Self {
        let a = a % b;
        let g = gcd_u128(a, b);
        let (a, b) = (a / g, b / g);
        if b > ROOT_DENOMINATOR_CAP as u128 {
            log::warn!("root of unity with denominator {b} exceeds the cap; using floats");
            let theta = TAU * (a as f64 / b as f64);
            return UnitValue::Approx {
                re: theta.cos(),
                im: theta.sin(),
            };
        }
        UnitValue::Root {
            a: a as u64,
            b: b as u64,
        }
    }

    /// Floating value; modulus above 1 + slack is rejected.
    pub fn approx(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(domain("non-finite value"));
        }
        if re.hypot(im) > 1.0 + MODULUS_SLACK {
            return Err(domain(format!("value {re}+{im}i has modulus above 1")));
        }
        Ok(UnitValue::Approx { re, im })
    }

    /// e(θ) as a floating value.
    pub fn from_angle(theta: f64) -> Self {
        let t = TAU * theta;
        UnitValue::Approx {
            re: t.cos(),
            im: t.sin(),
        }
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::approx(z.re, z.im)
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            UnitValue::Zero => true,
            UnitValue::Root { .. } => false,
            UnitValue::Approx { re, im } => re == 0.0 && im == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, UnitValue::Approx { .. })
    }

    pub fn conj(self) -> Self {
        match self {
            UnitValue::Zero => UnitValue::Zero,
            UnitValue::Root { a, b } => UnitValue::Root { a: (b - a) % b, b },
            UnitValue::Approx { re, im } => UnitValue::Approx { re, im: -im },
        }
    }

    pub fn pow(self, k: u32) -> Self {
        if k == 0 {
            return UnitValue::ONE;
        }
        match self {
            UnitValue::Zero => UnitValue::Zero,
            UnitValue::Root { a, b } => Self::reduced(a as u128 * k as u128, b as u128),
            UnitValue::Approx { re, im } => {
                let z = Complex64::new(re, im).powu(k);
                UnitValue::Approx { re: z.re, im: z.im }
            }
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            UnitValue::Zero => Complex64::new(0.0, 0.0),
            UnitValue::Root { a, b } => {
                if a == 0 {
                    return Complex64::new(1.0, 0.0);
                }
                // Exact values at the quarter points avoid cos(π/2) ≠ 0 noise.
                match (4 * a).checked_rem(b) {
                    Some(0) => match 4 * a / b {
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    },
                    _ => {
                        let t = TAU * (a as f64 / b as f64);
                        Complex64::new(t.cos(), t.sin())
                    }
                }
            }
            UnitValue::Approx { re, im } => Complex64::new(re, im),
        }
    }

    pub fn modulus(&self) -> f64 {
        match *self {
            UnitValue::Zero => 0.0,
            UnitValue::Root { .. } => 1.0,
            UnitValue::Approx { re, im } => re.hypot(im),
        }
    }

    /// Argument divided by 2π, in [0, 1); `None` for zero.
    pub fn angle(&self) -> Option<f64> {
        match *self {
            UnitValue::Zero => None,
            UnitValue::Root { a, b } => Some(a as f64 / b as f64),
            UnitValue::Approx { re, im } => {
                if re == 0.0 && im == 0.0 {
                    None
                } else {
                    let t = im.atan2(re) / TAU;
                    let t = t.rem_euclid(1.0);
                    Some(if t >= 1.0 { 0.0 } else { t })
                }
            }
        }
    }

    /// Exact equality when both sides are exact; `None` otherwise.
    pub fn exact_eq(&self, other: &UnitValue) -> Option<bool> {
        match (self, other) {
            (UnitValue::Approx { .. }, _) | (_, UnitValue::Approx { .. }) => None,
            _ => Some(self == other),
        }
    }

    /// |self − other|, exactly 0 when both are exact and equal.
    pub fn distance(&self, other: &UnitValue) -> f64 {
        if self.exact_eq(other) == Some(true) {
            return 0.0;
        }
        (self.to_complex() - other.to_complex()).norm()
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Mul for UnitValue {
    type Output = UnitValue;

    fn mul(self, rhs: UnitValue) -> UnitValue {
        match (self, rhs) {
            (UnitValue::Zero, _) | (_, UnitValue::Zero) => UnitValue::Zero,
            (UnitValue::Root { a: a1, b: b1 }, UnitValue::Root { a: a2, b: b2 }) => {
                let g = gcd(b1, b2) as u128;
                let (b1, b2) = (b1 as u128, b2 as u128);
                let num = a1 as u128 * (b2 / g) + a2 as u128 * (b1 / g);
                UnitValue::reduced(num, b1 / g * b2)
            }
            (x, y) => {
                let z = x.to_complex() * y.to_complex();
                UnitValue::Approx { re: z.re, im: z.im }
            }
        }
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitValue::Zero => write!(f, "0"),
            UnitValue::Root { a: 0, .. } => write!(f, "1"),
            UnitValue::Root { a, b } => write!(f, "e({a}/{b})"),
            UnitValue::Approx { re, im } => write!(f, "{re}{im:+}i"),
        }
    }
}
