//! Wigner 3j and 6j symbols over exactly-represented (half-)integer angular
//! momenta, evaluated with the Racah single-sum formulas.
//!
//! Angular momenta are stored as doubled integers so that parity and
//! selection-rule checks are exact. Factorial ratios are evaluated through a
//! precomputed log-factorial table with explicit sign tracking of the
//! alternating sum, which keeps absolute accuracy at the 1e-12 level or
//! better for all arguments up to `J_MAX`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported angular momentum magnitude.
pub const J_MAX: i32 = 50;

/// Log-factorial table size: 6j sums reach factorial arguments up to
/// 4*j_max + 1.
const LOG_FACT_LEN: usize = (4 * J_MAX as usize) + 2;

/// An integer or half-integer angular momentum, stored as `2j`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };

    /// Build from a doubled value: `from_twice(3)` is 3/2.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    /// Build from a plain integer value.
    pub const fn from_int(value: i32) -> Self {
        HalfInt { twice: 2 * value }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt {
            twice: self.twice.abs(),
        }
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    /// True when `m` is a valid projection of this magnitude: |m| <= j and
    /// 2m = 2j (mod 2).
    pub fn admits_projection(self, m: HalfInt) -> bool {
        m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }

    /// 2j+1, the multiplicity of the corresponding multiplet.
    pub fn multiplicity(self) -> f64 {
        (self.twice + 1) as f64
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"2"`, `"-1"`, `"3/2"`, `"-1/2"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| {
            t.parse::<i32>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse '{s}' as a half-integer")))
        };
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(Error::InvalidInput(format!(
                    "half-integer denominator must be 2, got '{s}'"
                )));
            }
            Ok(HalfInt::from_twice(parse_int(num.trim())?))
        } else {
            Ok(HalfInt::from_int(parse_int(s)?))
        }
    }
}

/// True iff (j1, j2, j3) satisfy the triangle rule and sum to an integer.
pub fn triangle_ok(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.twice, j2.twice, j3.twice);
    if a < 0 || b < 0 || c < 0 {
        return false;
    }
    (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

fn log_factorials() -> &'static [f64; LOG_FACT_LEN] {
    static TABLE: OnceLock<[f64; LOG_FACT_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0_f64; LOG_FACT_LEN];
        for n in 1..LOG_FACT_LEN {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// ln(n!) for n within the table bound. Callers guarantee n >= 0.
fn ln_fact(n: i32) -> f64 {
    log_factorials()[n as usize]
}

fn check_magnitude(name: &str, j: HalfInt) -> Result<()> {
    if j.is_negative() {
        return Err(Error::InvalidInput(format!(
            "{name} = {j} is negative; angular momentum magnitudes must be >= 0"
        )));
    }
    if j.twice > 2 * J_MAX {
        return Err(Error::InvalidInput(format!(
            "{name} = {j} exceeds the supported maximum j = {J_MAX}"
        )));
    }
    Ok(())
}

/// ln of the triangle coefficient Delta^2(a,b,c) =
/// (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!. Assumes `triangle_ok` holds.
fn ln_delta_sq(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> f64 {
    let (a, b, c) = (j1.twice, j2.twice, j3.twice);
    ln_fact((a + b - c) / 2) + ln_fact((a - b + c) / 2) + ln_fact((-a + b + c) / 2)
        - ln_fact((a + b + c) / 2 + 1)
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3).
///
/// Selection-rule failures (m1+m2+m3 != 0 or a broken triangle) return an
/// exact 0.0. Projections that are not valid for their magnitudes are an
/// input error, as are magnitudes above `J_MAX`.
pub fn wigner3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64> {
    check_magnitude("j1", j1)?;
    check_magnitude("j2", j2)?;
    check_magnitude("j3", j3)?;
    for (j, m, name) in [(j1, m1, "m1"), (j2, m2, "m2"), (j3, m3, "m3")] {
        if !j.admits_projection(m) {
            return Err(Error::InvalidInput(format!(
                "{name} = {m} is not a valid projection of j = {j}"
            )));
        }
    }

    if m1.twice + m2.twice + m3.twice != 0 || !triangle_ok(j1, j2, j3) {
        return Ok(0.0);
    }

    // Racah's single-sum formula, everything in halved (integer) units.
    let jjj = (j1.twice + j2.twice - j3.twice) / 2; // j1+j2-j3
    let j1m = (j1.twice - m1.twice) / 2; // j1-m1
    let j2p = (j2.twice + m2.twice) / 2; // j2+m2
    let t_lo1 = (j2.twice - j3.twice - m1.twice) / 2; // j2-j3-m1
    let t_lo2 = (j1.twice - j3.twice + m2.twice) / 2; // j1-j3+m2

    let t_min = 0.max(t_lo1).max(t_lo2);
    let t_max = jjj.min(j1m).min(j2p);
    if t_min > t_max {
        return Ok(0.0);
    }

    let ln_pref = 0.5
        * (ln_delta_sq(j1, j2, j3)
            + ln_fact((j1.twice + m1.twice) / 2)
            + ln_fact(j1m)
            + ln_fact(j2p)
            + ln_fact((j2.twice - m2.twice) / 2)
            + ln_fact((j3.twice + m3.twice) / 2)
            + ln_fact((j3.twice - m3.twice) / 2));

    let mut sum = 0.0_f64;
    for t in t_min..=t_max {
        let ln_den = ln_fact(t)
            + ln_fact(jjj - t)
            + ln_fact(j1m - t)
            + ln_fact(j2p - t)
            + ln_fact(t - t_lo1)
            + ln_fact(t - t_lo2);
        let term = (ln_pref - ln_den).exp();
        sum += if t % 2 == 0 { term } else { -term };
    }

    // Overall phase (-1)^(j1-j2-m3); the exponent is an exact integer here.
    let phase_exp = (j1.twice - j2.twice - m3.twice) / 2;
    Ok(if phase_exp.rem_euclid(2) == 0 { sum } else { -sum })
}

/// Wigner 6j symbol {j1 j2 j3; l1 l2 l3}.
///
/// Returns an exact 0.0 when any of the four triads {j1 j2 j3}, {j1 l2 l3},
/// {l1 j2 l3}, {l1 l2 j3} violates the triangle rule.
pub fn wigner6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    l1: HalfInt,
    l2: HalfInt,
    l3: HalfInt,
) -> Result<f64> {
    for (name, j) in [
        ("j1", j1),
        ("j2", j2),
        ("j3", j3),
        ("l1", l1),
        ("l2", l2),
        ("l3", l3),
    ] {
        check_magnitude(name, j)?;
    }

    let triads = [(j1, j2, j3), (j1, l2, l3), (l1, j2, l3), (l1, l2, j3)];
    if triads.iter().any(|&(a, b, c)| !triangle_ok(a, b, c)) {
        return Ok(0.0);
    }

    // Triad sums and opposite-pair sums, in halved units.
    let s: Vec<i32> = triads
        .iter()
        .map(|&(a, b, c)| (a.twice + b.twice + c.twice) / 2)
        .collect();
    let p = [
        (j1.twice + j2.twice + l1.twice + l2.twice) / 2,
        (j2.twice + j3.twice + l2.twice + l3.twice) / 2,
        (j3.twice + j1.twice + l3.twice + l1.twice) / 2,
    ];

    let t_min = *s.iter().max().unwrap();
    let t_max = *p.iter().min().unwrap();
    if t_min > t_max {
        return Ok(0.0);
    }

    let ln_pref = 0.5
        * (ln_delta_sq(j1, j2, j3)
            + ln_delta_sq(j1, l2, l3)
            + ln_delta_sq(l1, j2, l3)
            + ln_delta_sq(l1, l2, j3));

    let mut sum = 0.0_f64;
    for t in t_min..=t_max {
        let ln_term = ln_fact(t + 1)
            - s.iter().map(|&si| ln_fact(t - si)).sum::<f64>()
            - p.iter().map(|&pi| ln_fact(pi - t)).sum::<f64>();
        let term = (ln_pref + ln_term).exp();
        sum += if t % 2 == 0 { term } else { -term };
    }
    Ok(sum)
}
