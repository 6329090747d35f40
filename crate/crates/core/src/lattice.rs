//! Exact rationals, rank-two lattice vectors and continued fractions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// A reduced rational number with positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rat(Ratio<i64>);

impl Rat {
    pub fn new(num: i64, den: i64) -> Result<Rat> {
        if den == 0 {
            return invalid("zero denominator");
        }
        Ok(Rat(Ratio::new(num, den)))
    }

    pub fn int(n: i64) -> Rat {
        Rat(Ratio::from_integer(n))
    }

    pub fn zero() -> Rat {
        Rat::int(0)
    }

    pub fn num(&self) -> i64 {
        *self.0.numer()
    }

    pub fn den(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.den() == 1
    }

    pub fn is_zero(&self) -> bool {
        self.num() == 0
    }

    pub fn floor(&self) -> i64 {
        self.num().div_euclid(self.den())
    }

    pub fn ceil(&self) -> i64 {
        -(-self.num()).div_euclid(self.den())
    }

    pub fn abs(&self) -> Rat {
        if self.num() < 0 {
            -*self
        } else {
            *self
        }
    }

    pub fn recip(&self) -> Option<Rat> {
        if self.is_zero() {
            None
        } else {
            Some(Rat(self.0.recip()))
        }
    }

    /// The lattice point `(num, den)` spanning the ray through `(v, 1)`.
    pub fn ray_up(&self) -> Vec2 {
        Vec2::new(self.num(), self.den())
    }

    /// The lattice point spanning the ray through `(v, -1)`.
    pub fn ray_down(&self) -> Vec2 {
        Vec2::new(self.num(), -self.den())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den() == 1 {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", self.num(), self.den())
        }
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidInput(format!("bad rational '{s}'")))
        };
        match s.split_once('/') {
            Some((n, d)) => Rat::new(parse(n)?, parse(d)?),
            None => Ok(Rat::int(parse(s)?)),
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::int(n)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for Rat {
            type Output = Rat;
            fn $f(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
    };
}
rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(self.0 / rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

/// A vector in the lattice N = Z^2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: i64,
    pub y: i64,
}

impl Vec2 {
    pub const fn new(x: i64, y: i64) -> Vec2 {
        Vec2 { x, y }
    }

    pub fn det(self, other: Vec2) -> i64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Vec2) -> i64 {
        self.x * other.x + self.y * other.y
    }

    pub fn scale(self, k: i64) -> Vec2 {
        Vec2::new(k * self.x, k * self.y)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Index of the half-plane used for angular sorting: 0 for angles in [0, pi), 1 otherwise.
    fn half(self) -> u8 {
        if self.y > 0 || (self.y == 0 && self.x > 0) {
            0
        } else {
            1
        }
    }

    /// Counterclockwise angular order starting at the positive x-axis.
    pub fn angle_cmp(self, other: Vec2) -> Ordering {
        self.half()
            .cmp(&other.half())
            .then_with(|| 0.cmp(&self.det(other)))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

pub fn primitive(v: Vec2) -> Result<Vec2> {
    if v.is_zero() {
        return invalid("zero vector has no primitive generator");
    }
    let g = v.x.gcd(&v.y);
    Ok(Vec2::new(v.x / g, v.y / g))
}

/// Smallest positive integer `m` with `m * v` integral.
pub fn mu(v: Rat) -> i64 {
    v.den()
}

/// Value of a continued fraction; `Undefined` when a division by zero occurs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CfValue {
    Value(Rat),
    Undefined,
}

impl CfValue {
    pub fn value(self) -> Option<Rat> {
        match self {
            CfValue::Value(v) => Some(v),
            CfValue::Undefined => None,
        }
    }
}

/// Evaluates `[c_1, ..., c_k] = c_1 - 1/[c_2, ..., c_k]`.
pub fn cf_eval(c: &[i64]) -> Result<CfValue> {
    let Some((&last, rest)) = c.split_last() else {
        return invalid("empty continued fraction");
    };
    let mut acc = Rat::int(last);
    for &ci in rest.iter().rev() {
        match acc.recip() {
            Some(inv) => acc = Rat::int(ci) - inv,
            None => return Ok(CfValue::Undefined),
        }
    }
    Ok(CfValue::Value(acc))
}

/// Strictly increasing nonempty list of vertices of a subdivision of Q.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rat>", into = "Vec<Rat>")]
pub struct Subdivision {
    vertices: Vec<Rat>,
}

impl Subdivision {
    pub fn new(vertices: Vec<Rat>) -> Result<Subdivision> {
        if vertices.is_empty() {
            return invalid("subdivision needs at least one vertex");
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("subdivision vertices must be strictly increasing");
        }
        Ok(Subdivision { vertices })
    }

    pub fn trivial() -> Subdivision {
        Subdivision { vertices: vec![Rat::zero()] }
    }

    pub fn is_trivial(&self) -> bool {
        self.vertices.len() == 1 && self.vertices[0].is_zero()
    }

    pub fn vertices(&self) -> &[Rat] {
        &self.vertices
    }

    pub fn min(&self) -> Rat {
        self.vertices[0]
    }

    pub fn max(&self) -> Rat {
        *self.vertices.last().expect("nonempty")
    }

    pub fn contains(&self, v: Rat) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Compact intervals between consecutive vertices.
    pub fn intervals(&self) -> impl Iterator<Item = (Rat, Rat)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn with_vertex(&self, v: Rat) -> Subdivision {
        let mut vs = self.vertices.clone();
        if let Err(pos) = vs.binary_search(&v) {
            vs.insert(pos, v);
        }
        Subdivision { vertices: vs }
    }

    pub fn without_vertex(&self, v: Rat) -> Result<Subdivision> {
        let vs: Vec<Rat> = self.vertices.iter().copied().filter(|&w| w != v).collect();
        if vs.len() == self.vertices.len() {
            return invalid(format!("vertex {v} not in subdivision"));
        }
        Subdivision::new(vs)
    }

    pub fn translate(&self, k: Rat) -> Subdivision {
        Subdivision { vertices: self.vertices.iter().map(|&v| v + k).collect() }
    }
}

impl TryFrom<Vec<Rat>> for Subdivision {
    type Error = Error;
    fn try_from(v: Vec<Rat>) -> Result<Subdivision> {
        Subdivision::new(v)
    }
}

impl From<Subdivision> for Vec<Rat> {
    fn from(s: Subdivision) -> Vec<Rat> {
        s.vertices
    }
}

/// The index `alpha` with `rho_alpha = -rho_0` and the integer `gamma`, for a b-sequence with `b_0 < 0`.
pub fn alpha_gamma(b: &[i64]) -> Result<(usize, i64)> {
    if b.len() < 4 {
        return Err(Error::Precondition("alpha_gamma needs at least four rays".into()));
    }
    if b[0] >= 0 {
        return Err(Error::Precondition("alpha_gamma needs b_0 < 0".into()));
    }
    let rays = crate::surface::rays_from_b(b)?;
    let l = b.len() - 1;
    let opposite: Vec<usize> = (1..=l).filter(|&i| rays[i] == -rays[0]).collect();
    let [alpha] = opposite[..] else {
        return Err(Error::Internal(format!("expected exactly one ray opposite to rho_0, found {:?}", opposite)));
    };
    if !(1 < alpha && alpha < l) {
        return Err(Error::Internal(format!("alpha = {alpha} outside (1, {l})")));
    }
    for k in 2..=alpha {
        let zero = cf_eval(&b[1..k])? == CfValue::Value(Rat::zero());
        if zero != (k == alpha) {
            return Err(Error::Internal(format!(
                "continued fraction cross-check disagrees with ray reconstruction at k = {k}"
            )));
        }
    }
    let gamma = b[1..alpha].iter().map(|&bi| 3 - bi).sum::<i64>() - 3;
    Ok((alpha, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d).unwrap()
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive(Vec2::new(2, 4)).unwrap(), Vec2::new(1, 2));
        assert_eq!(primitive(Vec2::new(0, -3)).unwrap(), Vec2::new(0, -1));
        assert_eq!(primitive(Vec2::new(1, 1)).unwrap(), Vec2::new(1, 1));
        assert!(primitive(Vec2::new(0, 0)).is_err());
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(r(1, 2)), 2);
        assert_eq!(mu(Rat::int(-3)), 1);
        assert_eq!(mu(r(5, 6)), 6);
    }

    #[test]
    fn cf_examples() {
        assert_eq!(cf_eval(&[5]).unwrap(), CfValue::Value(Rat::int(5)));
        assert_eq!(cf_eval(&[0]).unwrap(), CfValue::Value(Rat::zero()));
        assert_eq!(cf_eval(&[1, 2, 2]).unwrap(), CfValue::Value(r(1, 3)));
        assert_eq!(cf_eval(&[3, 0]).unwrap(), CfValue::Undefined);
        assert!(cf_eval(&[]).is_err());
    }

    #[test]
    fn rat_strings() {
        assert_eq!(r(-1, 2).to_string(), "-1/2");
        assert_eq!(Rat::int(4).to_string(), "4");
        assert_eq!("6/-4".parse::<Rat>().unwrap(), r(-3, 2));
        assert!("1/0".parse::<Rat>().is_err());
        let s = serde_json::to_string(&r(2, 3)).unwrap();
        assert_eq!(s, "\"2/3\"");
        assert_eq!(serde_json::from_str::<Rat>(&s).unwrap(), r(2, 3));
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(r(-1, 2).floor(), -1);
        assert_eq!(r(-1, 2).ceil(), 0);
        assert_eq!(r(7, 3).floor(), 2);
        assert_eq!(Rat::int(2).ceil(), 2);
    }

    #[test]
    fn alpha_gamma_examples() {
        assert_eq!(alpha_gamma(&[-2, 0, 2, 0]).unwrap(), (2, 0));
        assert_eq!(alpha_gamma(&[-1, 0, 2, 1, 1]).unwrap(), (2, 0));
        assert!(alpha_gamma(&[2, 0, -2, 0]).is_err());
    }

    #[test]
    fn alpha_three() {
        // rotation of X_3 = (3,1,1,-2,0) starting at the -2 entry, read backwards
        let b = [-2, 1, 1, 3, 0];
        let (alpha, gamma) = alpha_gamma(&b).unwrap();
        assert_eq!(alpha, 3);
        assert_eq!(gamma, 1);
    }

    #[test]
    fn angular_order() {
        let mut v = vec![Vec2::new(0, -1), Vec2::new(-1, 0), Vec2::new(1, 1), Vec2::new(1, 0)];
        v.sort_by(|a, b| a.angle_cmp(*b));
        assert_eq!(v, vec![Vec2::new(1, 0), Vec2::new(1, 1), Vec2::new(-1, 0), Vec2::new(0, -1)]);
    }
}
