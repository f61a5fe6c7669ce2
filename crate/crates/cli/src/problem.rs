//! TOML problem files.
//!
//! ```toml
//! N = 1
//! b = ["1", "0", "1"]          # b_{-N} .. b_N, integers or "p/q"
//! k = 0
//! target = "generalized"       # optional: generalized | interval | full
//! f1 = ["0"]                   # optional, coefficients in global t
//! f2 = ["0"]
//!
//! [[f0]]
//! interval = ["0", "2"]
//! coeffs = ["1"]
//! basis = "local"              # coefficients in (t - interval start)
//!
//! [oracle]                     # optional
//! n_values = [32, 64, 128]
//! ```

use std::fmt;
use std::path::Path;

use ddbvp::rational::{int, parse};
use ddbvp::solver::{BvpProblem, SmoothnessTarget};
use ddbvp::{PiecewisePoly, Poly, Rational, Stencil};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A rational written as an integer or a `"p/q"` string. Floats are refused.
#[derive(Debug, Clone, PartialEq)]
pub struct RatText(pub String);

impl Serialize for RatText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for RatText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RatText;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as an integer or a \"p/q\" string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RatText, E> {
                Ok(RatText(v.to_string()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RatText, E> {
                Ok(RatText(v.to_string()))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<RatText, E> {
                Ok(RatText(v.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetName {
    Generalized,
    Interval,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    #[default]
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub interval: [RatText; 2],
    pub coeffs: Vec<RatText>,
    #[serde(default)]
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_values: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<PieceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub b: Vec<RatText>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<Vec<RatText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<Vec<RatText>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f0: Vec<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

/// Parse or validation failure, located by field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn bad(field: impl fmt::Display, msg: impl fmt::Display) -> ParseError {
    ParseError(format!("{field}: {msg}"))
}

fn rational(field: impl fmt::Display, t: &RatText) -> Result<Rational, ParseError> {
    parse(&t.0).ok_or_else(|| bad(field, format!("cannot parse {:?} as a rational", t.0)))
}

fn rationals(field: &str, ts: &[RatText]) -> Result<Vec<Rational>, ParseError> {
    ts.iter()
        .enumerate()
        .map(|(i, t)| rational(format!("{field}[{i}]"), t))
        .collect()
}

/// Pieces covering `(0, end)` without gaps.
fn pieces(field: &str, specs: &[PieceSpec], end: &Rational) -> Result<PiecewisePoly, ParseError> {
    if specs.is_empty() {
        return PiecewisePoly::zero(int(0), end.clone()).map_err(|e| bad(field, e));
    }
    let mut breaks = Vec::new();
    let mut polys = Vec::new();
    for (i, p) in specs.iter().enumerate() {
        let at = format!("{field}[{i}]");
        let a = rational(format!("{at}.interval[0]"), &p.interval[0])?;
        let b = rational(format!("{at}.interval[1]"), &p.interval[1])?;
        if a >= b {
            return Err(bad(format!("{at}.interval"), format!("empty interval ({a}, {b})")));
        }
        match breaks.last() {
            None if a != int(0) => {
                return Err(bad(format!("{at}.interval"), format!("pieces must start at 0, found {a}")))
            }
            Some(prev) if *prev != a => {
                return Err(bad(
                    format!("{at}.interval"),
                    format!("starts at {a} but the previous piece ends at {prev}"),
                ))
            }
            None => breaks.push(a.clone()),
            _ => {}
        }
        breaks.push(b);
        let poly = Poly::new(rationals(&format!("{at}.coeffs"), &p.coeffs)?);
        polys.push(match p.basis {
            Basis::Local => poly,
            Basis::Global => poly.shift(&a),
        });
    }
    let last = breaks.last().expect("nonempty");
    if last != end {
        return Err(bad(field, format!("pieces must end at N+1 = {end}, found {last}")));
    }
    PiecewisePoly::new(breaks, polys).map_err(|e| bad(field, e))
}

/// Validated contents of a problem file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: ProblemFile,
    pub problem: BvpProblem,
    pub n_values: Vec<usize>,
    pub a: Option<PiecewisePoly>,
}

impl ProblemFile {
    pub fn from_toml(text: &str) -> Result<Self, ParseError> {
        toml::from_str(text).map_err(|e| ParseError(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files serialize")
    }

    pub fn validate(self) -> Result<Loaded, ParseError> {
        if self.n == 0 {
            return Err(bad("N", "must be at least 1"));
        }
        if self.b.len() != 2 * self.n + 1 {
            return Err(bad(
                "b",
                format!("expected 2N+1 = {} coefficients, found {}", 2 * self.n + 1, self.b.len()),
            ));
        }
        let stencil = Stencil::new(rationals("b", &self.b)?).map_err(|e| bad("b", e))?;
        let end = int(self.n as i64 + 1);
        let f0 = pieces("f0", &self.f0, &end)?;
        let boundary = |field: &str, c: &Option<Vec<RatText>>| -> Result<Poly, ParseError> {
            Ok(c.as_ref()
                .map(|c| rationals(field, c))
                .transpose()?
                .map(Poly::new)
                .unwrap_or_else(Poly::zero))
        };
        let f1 = boundary("f1", &self.f1)?;
        let f2 = boundary("f2", &self.f2)?;
        let target = match self.target.unwrap_or(TargetName::Generalized) {
            TargetName::Generalized => SmoothnessTarget::Generalized,
            TargetName::Interval => SmoothnessTarget::Interval,
            TargetName::Full => SmoothnessTarget::Full,
        };
        let mut problem = BvpProblem::new(stencil, self.k, f0)
            .map_err(|e| bad("f0", e))?
            .with_boundary(f1, f2)
            .with_target(target);
        if let Some(cap) = self.degree_cap {
            problem = problem.with_degree_cap(cap);
        }
        let (n_values, a) = match &self.oracle {
            None => (Vec::new(), None),
            Some(o) => {
                if let Some(bad_n) = o.n_values.iter().find(|&&n| n < 4) {
                    return Err(bad("oracle.n_values", format!("grid size {bad_n} is below the minimum 4")));
                }
                let a = if o.a.is_empty() { None } else { Some(pieces("oracle.a", &o.a, &end)?) };
                (o.n_values.clone(), a)
            }
        };
        Ok(Loaded {
            file: self,
            problem,
            n_values,
            a,
        })
    }
}

pub fn load(path: &Path) -> Result<Loaded, ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseError(format!("{}: {e}", path.display())))?;
    ProblemFile::from_toml(&text)
        .and_then(ProblemFile::validate)
        .map_err(|e| ParseError(format!("{}: {e}", path.display())))
}
