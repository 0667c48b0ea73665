//! Exact exponent arithmetic.
//!
//! Integrability exponents are stored as reciprocals `u = 1/p`, so `p = ∞`
//! is the ordinary value `u = 0` and every relation of the catalog is
//! multi-affine in the stored variables. A relation with one unknown is
//! solved from its values at 0 and 1.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = Rational64;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Parses `"3"`, `"8/3"`, `"-0.25"` or `"1e-1"`-free decimals exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse exact number '{s}'"));
    if let Some((a, b)) = t.split_once('/') {
        let n: i64 = a.trim().parse().map_err(|_| bad())?;
        let d: i64 = b.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(q(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 15 {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n: i64 = digits.parse().map_err(|_| bad())?;
    let d = 10i64.pow(frac.len() as u32);
    let v = q(n, d);
    Ok(if neg { -v } else { v })
}

fn to_f64(v: Q) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

/// Exponent value; integrability exponents may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ext {
    Fin(Q),
    Inf,
}

impl Ext {
    pub fn int(n: i64) -> Self {
        Ext::Fin(Q::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Ext::Fin(q(n, d))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Ext::Fin(v) => to_f64(v),
            Ext::Inf => f64::INFINITY,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Ext::Inf),
            _ => Ok(Ext::Fin(parse_q(s)?)),
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Ext::Fin(v) if v.is_integer() => write!(f, "{}", v.numer()),
            Ext::Fin(v) => write!(f, "{}/{}", v.numer(), v.denom()),
            Ext::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Var {
    Alpha0,
    Alpha1,
    Alpha2,
    Sigma,
    S,
    Theta,
    P0,
    P1,
    P2,
    /// The Lebesgue exponent `r` (called `q` in the classical form).
    R,
}

impl Var {
    pub const ALL: [Var; 10] = [
        Var::Alpha0,
        Var::Alpha1,
        Var::Alpha2,
        Var::Sigma,
        Var::S,
        Var::Theta,
        Var::P0,
        Var::P1,
        Var::P2,
        Var::R,
    ];

    pub fn is_integrability(self) -> bool {
        matches!(self, Var::P0 | Var::P1 | Var::P2 | Var::R)
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Alpha0 => "alpha0",
            Var::Alpha1 => "alpha1",
            Var::Alpha2 => "alpha2",
            Var::Sigma => "sigma",
            Var::S => "s",
            Var::Theta => "theta",
            Var::P0 => "p0",
            Var::P1 => "p1",
            Var::P2 => "p2",
            Var::R => "r",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = if s == "q" { "r" } else { s };
        Var::ALL
            .into_iter()
            .find(|v| v.name() == t)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown exponent '{s}'")))
    }
}

/// A partial or complete assignment of exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExponentSet {
    // integrability variables hold 1/p
    vals: BTreeMap<Var, Q>,
}

impl ExponentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder form of [`ExponentSet::set`].
    pub fn with(mut self, var: Var, value: Ext) -> Result<Self> {
        self.set(var, value)?;
        Ok(self)
    }

    pub fn set(&mut self, var: Var, value: Ext) -> Result<()> {
        let stored = match (var.is_integrability(), value) {
            (true, Ext::Inf) => Q::zero(),
            (true, Ext::Fin(p)) => {
                if p < Q::one() {
                    return Err(Error::InvalidArgument(format!("{} must be >= 1, got {p}", var.name())));
                }
                p.recip()
            }
            (false, Ext::Fin(v)) => v,
            (false, Ext::Inf) => {
                return Err(Error::InvalidArgument(format!("{} cannot be infinite", var.name())));
            }
        };
        self.vals.insert(var, stored);
        Ok(())
    }

    pub fn get(&self, var: Var) -> Option<Ext> {
        self.vals.get(&var).map(|&v| {
            if !var.is_integrability() {
                Ext::Fin(v)
            } else if v.is_zero() {
                Ext::Inf
            } else {
                Ext::Fin(v.recip())
            }
        })
    }

    pub fn get_f64(&self, var: Var) -> Option<f64> {
        self.get(var).map(Ext::to_f64)
    }

    /// Stored value: the exponent itself, or `1/p` for integrability.
    pub fn raw(&self, var: Var) -> Option<Q> {
        self.vals.get(&var).copied()
    }

    fn put_raw(&mut self, var: Var, v: Q) {
        self.vals.insert(var, v);
    }

    pub fn contains(&self, var: Var) -> bool {
        self.vals.contains_key(&var)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.vals.keys().copied()
    }

    /// Exact textual form, `name -> "a/b" | "inf"`.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.vals
            .keys()
            .map(|&v| (v.name().to_string(), self.get(v).map(|e| e.to_string()).unwrap_or_default()))
            .collect()
    }

    pub fn from_map(m: &BTreeMap<String, String>) -> Result<Self> {
        let mut out = ExponentSet::new();
        for (k, v) in m {
            out.set(Var::parse(k)?, Ext::parse(v)?)?;
        }
        Ok(out)
    }
}

impl Serialize for ExponentSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExponentSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, String>::deserialize(d)?;
        ExponentSet::from_map(&m).map_err(serde::de::Error::custom)
    }
}

/// Lookup into stored values during relation evaluation.
pub type Get<'a> = &'a dyn Fn(Var) -> Q;

/// A multi-affine relation `F(vars) = 0` over stored values.
pub struct Relation {
    pub name: &'static str,
    pub vars: &'static [Var],
    pub f: fn(Get) -> Q,
}

/// A side condition over stored values.
pub struct Condition {
    pub name: &'static str,
    pub holds: fn(Get) -> bool,
}

fn eval(set: &ExponentSet, f: fn(Get) -> Q) -> Q {
    let get = |v: Var| set.raw(v).unwrap_or_else(Q::zero);
    f(&get)
}

fn eval_with(set: &ExponentSet, f: fn(Get) -> Q, var: Var, value: Q) -> Q {
    let get = |v: Var| if v == var { value } else { set.raw(v).unwrap_or_else(Q::zero) };
    f(&get)
}

/// Propagates `relations` until no relation has exactly one unknown.
/// Fully known relations must hold exactly.
pub fn solve(set: &mut ExponentSet, relations: &[Relation]) -> Result<()> {
    loop {
        let mut progressed = false;
        for rel in relations {
            let unknown: Vec<Var> = rel.vars.iter().copied().filter(|v| !set.contains(*v)).collect();
            match unknown.len() {
                0 => {
                    let r = eval(set, rel.f);
                    if !r.is_zero() {
                        return Err(Error::ExponentMismatch(format!("relation {} violated by {r}", rel.name)));
                    }
                }
                1 => {
                    let v = unknown[0];
                    let f0 = eval_with(set, rel.f, v, Q::zero());
                    let f1 = eval_with(set, rel.f, v, Q::one());
                    let slope = f1 - f0;
                    if slope.is_zero() {
                        continue;
                    }
                    set.put_raw(v, -f0 / slope);
                    progressed = true;
                }
                _ => {}
            }
        }
        if !progressed {
            return Ok(());
        }
    }
}

pub fn check_conditions(set: &ExponentSet, conditions: &[Condition]) -> Vec<&'static str> {
    let get = |v: Var| set.raw(v).unwrap_or_else(Q::zero);
    conditions.iter().filter(|c| !(c.holds)(&get)).map(|c| c.name).collect()
}

/// Every stored integrability value must be a valid `1/p` in `[0, 1]`.
pub fn check_ranges(set: &ExponentSet) -> Result<()> {
    for v in set.vars() {
        let raw = set.raw(v).unwrap_or_else(Q::zero);
        if v.is_integrability() && (raw.is_negative() || raw > Q::one()) {
            return Err(Error::ConditionViolated(format!("{} must lie in [1, inf], derived 1/{0} = {raw}", v.name())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_decimals() {
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_q("8/3").unwrap(), q(8, 3));
        assert_eq!(parse_q("2").unwrap(), q(2, 1));
        assert!(parse_q("1e3").is_err());
        assert!(parse_q("1/0").is_err());
        assert_eq!(Ext::parse("inf").unwrap(), Ext::Inf);
    }

    #[test]
    fn integrability_stored_as_reciprocal() {
        let s = ExponentSet::new().with(Var::P1, Ext::int(4)).unwrap().with(Var::P2, Ext::Inf).unwrap();
        assert_eq!(s.raw(Var::P1), Some(q(1, 4)));
        assert_eq!(s.get(Var::P2), Some(Ext::Inf));
        assert!(ExponentSet::new().with(Var::P1, Ext::ratio(1, 2)).is_err());
        assert!(ExponentSet::new().with(Var::Alpha1, Ext::Inf).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = ExponentSet::new()
            .with(Var::P1, Ext::ratio(14, 5))
            .unwrap()
            .with(Var::Alpha1, Ext::ratio(1, 4))
            .unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"alpha1":"1/4","p1":"14/5"}"#);
        assert_eq!(serde_json::from_str::<ExponentSet>(&j).unwrap(), s);
    }

    #[test]
    fn solves_affine_chain() {
        const RELS: [Relation; 2] = [
            Relation {
                name: "a",
                vars: &[Var::Alpha1, Var::Alpha2],
                f: |g| g(Var::Alpha2) - g(Var::Alpha1) * 2,
            },
            Relation {
                name: "b",
                vars: &[Var::Alpha2, Var::Sigma],
                f: |g| g(Var::Sigma) * g(Var::Alpha2) - Q::one(),
            },
        ];
        let mut s = ExponentSet::new().with(Var::Alpha1, Ext::ratio(1, 3)).unwrap();
        solve(&mut s, &RELS).unwrap();
        assert_eq!(s.raw(Var::Alpha2), Some(q(2, 3)));
        assert_eq!(s.raw(Var::Sigma), Some(q(3, 2)));
        let mut bad = ExponentSet::new()
            .with(Var::Alpha1, Ext::int(1))
            .unwrap()
            .with(Var::Alpha2, Ext::int(1))
            .unwrap();
        assert_eq!(solve(&mut bad, &RELS).unwrap_err().code(), "exponent-mismatch");
    }
}
