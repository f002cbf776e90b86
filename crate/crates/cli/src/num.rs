use std::fmt;
use std::str::FromStr;

use condexp::{Exact, Scalar};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A non-negative number written as `a/b`, an integer, or a decimal. Kept as
/// a ratio so exact-mode runs see the value that was typed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Num {
    pub num: u64,
    pub den: u64,
}

impl Num {
    pub fn to<T: Scalar>(self) -> T {
        T::from_ratio(self.num, self.den)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact `t`-th root, when numerator and denominator are perfect powers.
    pub fn root(self, t: u32) -> Option<Num> {
        Some(Num { num: int_root(self.num, t)?, den: int_root(self.den, t)? })
    }
}

fn int_root(x: u64, t: u32) -> Option<u64> {
    let guess = (x as f64).powf(1.0 / t as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|r| r.checked_pow(t) == Some(x))
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Num {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("`{s}` is not a number of the form a/b or a decimal");
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num = a.trim().parse().map_err(|_| bad())?;
            let den: u64 = b.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(format!("`{s}` has a zero denominator"));
            }
            return Ok(Num { num, den });
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let digits = format!("{int}{frac}");
        let num = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
        Ok(Num { num, den })
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Num { num: n, den: 1 }),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Float(x) => x.to_string().parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Exact text for rational scalars; floats carry no extra text.
pub trait Render: Scalar {
    fn exact_text(&self) -> Option<String>;
}

impl Render for f64 {
    fn exact_text(&self) -> Option<String> {
        None
    }
}

impl Render for Exact {
    fn exact_text(&self) -> Option<String> {
        Some(self.to_string())
    }
}
