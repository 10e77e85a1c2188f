//! Flip parameters `p_α` and the named presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};

/// The sequence `p_0, p_1, ..., p_Nmax` with `p_0 = 0`, `p_1 = 1`,
/// non-increasing, and `p_α = 0` for every `α > N_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipParams<T = f64> {
    p: Vec<T>,
}

impl<T: Scalar> FlipParams<T> {
    /// Builds parameters from `p_1, ..., p_Nmax`. Fails unless `p_1 = 1`,
    /// every entry is non-negative and the sequence is non-increasing.
    pub fn new(tail: Vec<T>) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::InvalidParams("at least p_1 must be given".into()));
        }
        if tail[0] != T::one() {
            return Err(Error::InvalidParams(format!("p_1 must equal 1, got {:?}", tail[0])));
        }
        for (i, value) in tail.iter().enumerate() {
            if value.below_zero() {
                return Err(Error::InvalidParams(format!("p_{} is negative", i + 1)));
            }
            if i > 0 && *value > tail[i - 1] {
                return Err(Error::InvalidParams(format!("p_{} exceeds p_{}", i + 1, i)));
            }
        }
        let mut p = Vec::with_capacity(tail.len() + 1);
        p.push(T::zero());
        p.extend(tail);
        Ok(Self { p })
    }

    /// Glauber-like parameters: `p_1 = 1` and nothing larger flips.
    pub fn single_site() -> Self {
        Self { p: vec![T::zero(), T::one()] }
    }

    /// `p_α`, zero outside `1..=N_max`.
    pub fn get(&self, alpha: usize) -> T {
        self.p.get(alpha).cloned().unwrap_or_else(T::zero)
    }

    /// Borrowing access to `p_α` for `α ≤ N_max`.
    pub fn get_ref(&self, alpha: usize) -> Option<&T> {
        self.p.get(alpha)
    }

    /// The cutoff `N_max` (index of the last stored entry).
    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    /// The stored values `p_0..p_Nmax`.
    pub fn values(&self) -> &[T] {
        &self.p
    }

    /// Converts to floating point.
    pub fn to_f64(&self) -> FlipParams<f64> {
        FlipParams { p: self.p.iter().map(Scalar::to_f64).collect() }
    }
}

impl FlipParams<f64> {
    /// Acceptance probability `p_α / α` used by the anchor formulation.
    #[inline]
    pub fn acceptance(&self, alpha: usize) -> f64 {
        if alpha == 0 {
            0.0
        } else {
            self.get(alpha) / alpha as f64
        }
    }
}

impl FlipParams<Rational> {
    /// Parses the text format: one `α p_α` pair per line, `p_α` given as an
    /// integer, a decimal or `a/b`. Missing entries below the largest listed
    /// `α` are an error; `p_1` may be omitted and then defaults to 1.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, Rational)> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            let alpha = parts
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse { line, message: "expected `alpha p_alpha`".into() })?;
            let value = parts
                .next()
                .and_then(parse_rational)
                .ok_or_else(|| Error::Parse { line, message: "unreadable p_alpha".into() })?;
            if parts.next().is_some() {
                return Err(Error::Parse { line, message: "expected exactly two fields".into() });
            }
            entries.push((alpha, value));
        }
        entries.sort_by_key(|(a, _)| *a);
        let max_alpha = entries.last().map_or(1, |(a, _)| *a).max(1);
        let mut tail: Vec<Option<Rational>> = vec![None; max_alpha];
        for (alpha, value) in entries {
            if alpha == 0 {
                if !value.is_negligible() {
                    return Err(Error::InvalidParams("p_0 must be 0".into()));
                }
                continue;
            }
            tail[alpha - 1] = Some(value);
        }
        if tail[0].is_none() {
            tail[0] = Some(<Rational as num_traits::One>::one());
        }
        let tail = tail
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::InvalidParams(format!("p_{} is missing", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tail)
    }

    /// Converts exact parameters to any scalar type.
    pub fn convert<T: Scalar>(&self) -> FlipParams<T> {
        FlipParams { p: self.p.iter().map(T::from_rational).collect() }
    }
}

impl<T: Scalar> fmt::Display for FlipParams<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for alpha in 1..=self.n_max() {
            writeln!(f, "{alpha} {}", self.get(alpha).to_f64())?;
        }
        Ok(())
    }
}

/// Named parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `p = (1, 13/42, 1/6, 2/21, 1/21, 1/84)`.
    VigodaEq11,
    /// Decimal parameters that solve the mixed coupling LP.
    CmEq12,
    /// `p = (1, 185/616, 1/6, 47/462, 9/154, 2/77)`.
    DppObs51,
}

impl Preset {
    /// All presets.
    pub const ALL: [Preset; 3] = [Preset::VigodaEq11, Preset::CmEq12, Preset::DppObs51];

    /// The preset's textual name.
    pub fn name(self) -> &'static str {
        match self {
            Preset::VigodaEq11 => "vigoda_eq11",
            Preset::CmEq12 => "cm_eq12",
            Preset::DppObs51 => "dpp_obs51",
        }
    }

    fn literals(self) -> &'static [&'static str] {
        match self {
            Preset::VigodaEq11 => &["1", "13/42", "1/6", "2/21", "1/21", "1/84"],
            Preset::CmEq12 => &["1", "0.296706", "0.166762", "0.101790", "0.058475", "0.025989"],
            Preset::DppObs51 => &["1", "185/616", "1/6", "47/462", "9/154", "2/77"],
        }
    }

    /// Exact parameters (decimal presets are read as exact decimals).
    pub fn exact(self) -> FlipParams<Rational> {
        let tail = self.literals().iter().map(|t| parse_rational(t).expect("preset literal")).collect();
        FlipParams::new(tail).expect("presets are valid")
    }

    /// Parameters in any scalar type.
    pub fn params<T: Scalar>(self) -> FlipParams<T> {
        self.exact().convert()
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset `{s}`")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
