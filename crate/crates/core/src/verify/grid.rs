//! Parameter grids.
//!
//! Grammar, one assignment per line, `#` starts a comment:
//!
//! ```text
//! name = value
//! name = [v1, v2, ...]
//! name = start..end          # inclusive, step 1
//! name = start..end..step
//! ```
//!
//! Values are integers, fractions `p/q`, decimals (read exactly) or bare
//! identifiers such as `exact` or `pac`. Ranges take numbers only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::rational_to_f64;
use crate::error::{Error, Result};

pub const MAX_AXIS_LEN: usize = 100_000;
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GridValue {
    Num(BigRational),
    Sym(String),
}

impl GridValue {
    pub fn int(x: i64) -> Self {
        GridValue::Num(BigRational::from_integer(x.into()))
    }
}

impl fmt::Display for GridValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridValue::Num(q) if q.is_integer() => write!(f, "{}", q.numer()),
            GridValue::Num(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            GridValue::Sym(s) => f.write_str(s),
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_number(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{whole_digits}{frac}");
        let mut num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(num, den));
    }
    BigInt::from_str(s).ok().map(BigRational::from_integer)
}

/// Integer, `p/q` or terminating decimal, read exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    parse_number(s).ok_or_else(|| usage(format!("cannot read `{}` as an exact number", s.trim())))
}

impl FromStr for GridValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_value(s)
    }
}

fn parse_value(s: &str) -> Result<GridValue> {
    let s = s.trim();
    if let Some(q) = parse_number(s) {
        return Ok(GridValue::Num(q));
    }
    let ident = !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ident {
        Ok(GridValue::Sym(s.to_string()))
    } else {
        Err(usage(format!("cannot read grid value `{s}`")))
    }
}

fn parse_range(s: &str) -> Result<Vec<GridValue>> {
    let parts: Vec<&str> = s.split("..").collect();
    let nums = parts
        .iter()
        .map(|p| parse_number(p).ok_or_else(|| usage(format!("bad range bound `{}`", p.trim()))))
        .collect::<Result<Vec<_>>>()?;
    let (start, end, step) = match nums.as_slice() {
        [a, b] => (a.clone(), b.clone(), BigRational::one()),
        [a, b, c] => (a.clone(), b.clone(), c.clone()),
        _ => return Err(usage(format!("range `{s}` needs the form start..end[..step]"))),
    };
    if !step.is_positive() {
        return Err(usage(format!("range `{s}` needs a positive step")));
    }
    let count = ((&end - &start) / &step).floor();
    if count.is_negative() {
        return Err(usage(format!("range `{s}` is empty")));
    }
    let count = count.to_integer().to_usize().filter(|&c| c < MAX_AXIS_LEN).ok_or_else(|| {
        usage(format!("range `{s}` has more than {MAX_AXIS_LEN} values"))
    })?;
    Ok((0..=count)
        .map(|i| GridValue::Num(&start + &step * BigInt::from(i)))
        .collect())
}

/// Axes in declaration order; points are their cartesian product.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridSpec {
    axes: Vec<(String, Vec<GridValue>)>,
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut spec = GridSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, rhs) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("line {}: expected `name = value`", lineno + 1)))?;
            let name = name.trim();
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(usage(format!("line {}: bad parameter name `{name}`", lineno + 1)));
            }
            let rhs = rhs.trim();
            let values = if let Some(inner) = rhs.strip_prefix('[') {
                let inner = inner
                    .strip_suffix(']')
                    .ok_or_else(|| usage(format!("line {}: unclosed list", lineno + 1)))?;
                inner
                    .split(',')
                    .filter(|v| !v.trim().is_empty())
                    .map(parse_value)
                    .collect::<Result<Vec<_>>>()?
            } else if rhs.contains("..") {
                parse_range(rhs)?
            } else {
                vec![parse_value(rhs)?]
            };
            if values.is_empty() {
                return Err(usage(format!("line {}: `{name}` has no values", lineno + 1)));
            }
            spec.set(name, values)?;
        }
        Ok(spec)
    }
}

impl GridSpec {
    pub fn set(&mut self, name: &str, values: Vec<GridValue>) -> Result<()> {
        if self.axes.iter().any(|(n, _)| n == name) {
            return Err(usage(format!("parameter `{name}` given twice")));
        }
        self.axes.push((name.to_string(), values));
        Ok(())
    }

    /// Like [`GridSpec::set`], but overwrites an existing axis in place.
    pub fn replace(&mut self, name: &str, values: Vec<GridValue>) {
        match self.axes.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = values,
            None => self.axes.push((name.to_string(), values)),
        }
    }

    pub fn axes(&self) -> &[(String, Vec<GridValue>)] {
        &self.axes
    }

    pub fn get(&self, name: &str) -> Option<&[GridValue]> {
        self.axes.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Cartesian product over the named axes that are present, in the order
    /// given; absent axes are simply left out of the points.
    pub fn product(&self, names: &[&str]) -> Result<Vec<Point>> {
        let mut points = vec![Point::default()];
        for name in names {
            let Some(values) = self.get(name) else { continue };
            if points.len().saturating_mul(values.len()) > MAX_GRID_POINTS {
                return Err(usage(format!("grid exceeds {MAX_GRID_POINTS} points")));
            }
            points = points
                .into_iter()
                .flat_map(|p| values.iter().map(move |v| p.with(name, v.clone())))
                .collect();
        }
        Ok(points)
    }

    /// One-line description, e.g. `n=3..12 (10); t=50`.
    pub fn summary(&self) -> String {
        self.axes
            .iter()
            .map(|(name, vals)| match vals.as_slice() {
                [one] => format!("{name}={one}"),
                [first, .., last] => format!("{name}={first}..{last} ({})", vals.len()),
                [] => format!("{name}=[]"),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// One grid point: named values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    values: BTreeMap<String, GridValue>,
}

impl Point {
    pub fn with(&self, name: &str, value: GridValue) -> Self {
        let mut out = self.clone();
        out.values.insert(name.to_string(), value);
        out
    }

    pub fn with_int(&self, name: &str, value: i64) -> Self {
        self.with(name, GridValue::int(value))
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn values(&self) -> &BTreeMap<String, GridValue> {
        &self.values
    }

    fn raw(&self, name: &str) -> Result<&GridValue> {
        self.values
            .get(name)
            .ok_or_else(|| usage(format!("grid point {self} lacks `{name}`")))
    }

    pub fn rational(&self, name: &str) -> Result<BigRational> {
        match self.raw(name)? {
            GridValue::Num(q) => Ok(q.clone()),
            GridValue::Sym(s) => Err(usage(format!("`{name}` must be numeric, got `{s}`"))),
        }
    }

    pub fn real(&self, name: &str) -> Result<f64> {
        Ok(rational_to_f64(&self.rational(name)?))
    }

    pub fn uint(&self, name: &str) -> Result<usize> {
        let q = self.rational(name)?;
        if !q.is_integer() || q.is_negative() {
            return Err(usage(format!("`{name}` must be a nonnegative integer, got {q}")));
        }
        q.to_integer()
            .to_usize()
            .ok_or_else(|| usage(format!("`{name}` is too large")))
    }

    pub fn uint_or(&self, name: &str, default: usize) -> Result<usize> {
        if self.has(name) {
            self.uint(name)
        } else {
            Ok(default)
        }
    }

    pub fn symbol(&self, name: &str) -> Result<&str> {
        match self.raw(name)? {
            GridValue::Sym(s) => Ok(s),
            GridValue::Num(q) => Err(usage(format!("`{name}` must be a name, got {q}"))),
        }
    }

    pub fn symbol_or<'a>(&'a self, name: &str, default: &'a str) -> Result<&'a str> {
        if self.has(name) {
            self.symbol(name)
        } else {
            Ok(default)
        }
    }

    pub fn to_strings(&self) -> BTreeMap<String, String> {
        self.values.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
