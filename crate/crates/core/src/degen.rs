//! C*-surfaces given by multidivisors over P^1, degeneration diagrams and the induced
//! maps on Picard groups.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::{alpha_gamma, mu, Rat, Subdivision, Vec2};
use crate::matrix::{self, IMatrix};
use crate::surface::{dihedral_perms, normal_form, rays_from_b, Blowup, DivisorClass, ToricSurface};

pub const ZERO: &str = "0";
pub const S: &str = "s";
pub const INF: &str = "inf";

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marker {
    Dot,
    Circ,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Deserialize)]
struct RawMultidivisor {
    #[serde(default)]
    slices: BTreeMap<String, Subdivision>,
    m_minus: Marker,
    m_plus: Marker,
}

/// Slices over points of P^1 plus the two markers. Only nontrivial slices are stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawMultidivisor")]
pub struct Multidivisor {
    slices: BTreeMap<String, Subdivision>,
    m_minus: Marker,
    m_plus: Marker,
}

impl TryFrom<RawMultidivisor> for Multidivisor {
    type Error = Error;
    fn try_from(r: RawMultidivisor) -> Result<Multidivisor> {
        Multidivisor::new(r.slices, r.m_minus, r.m_plus)
    }
}

impl Multidivisor {
    pub fn new(slices: BTreeMap<String, Subdivision>, m_minus: Marker, m_plus: Marker) -> Result<Multidivisor> {
        let slices: BTreeMap<String, Subdivision> =
            slices.into_iter().filter(|(_, s)| !s.is_trivial()).collect();
        let m = Multidivisor { slices, m_minus, m_plus };
        if m_minus == Marker::Circ && m.min_sum() >= Rat::zero() {
            return Err(Error::InvalidInput("m_minus is circ but the minima do not sum to a negative number".into()));
        }
        if m_plus == Marker::Circ && m.max_sum() <= Rat::zero() {
            return Err(Error::InvalidInput("m_plus is circ but the maxima do not sum to a positive number".into()));
        }
        Ok(m)
    }

    /// Convenience constructor from `(label, vertices)` pairs.
    pub fn from_slices(slices: &[(&str, Vec<Rat>)], m_minus: Marker, m_plus: Marker) -> Result<Multidivisor> {
        let mut map = BTreeMap::new();
        for (label, vs) in slices {
            map.insert(label.to_string(), Subdivision::new(vs.clone())?);
        }
        Multidivisor::new(map, m_minus, m_plus)
    }

    pub fn slices(&self) -> &BTreeMap<String, Subdivision> {
        &self.slices
    }

    /// The slice over `label`, trivial when not stored.
    pub fn slice(&self, label: &str) -> Subdivision {
        self.slices.get(label).cloned().unwrap_or_else(Subdivision::trivial)
    }

    pub fn marker(&self, side: Side) -> Marker {
        match side {
            Side::Minus => self.m_minus,
            Side::Plus => self.m_plus,
        }
    }

    pub fn m_minus(&self) -> Marker {
        self.m_minus
    }

    pub fn m_plus(&self) -> Marker {
        self.m_plus
    }

    pub fn with_marker(&self, side: Side, mk: Marker) -> Result<Multidivisor> {
        let (mut lo, mut hi) = (self.m_minus, self.m_plus);
        match side {
            Side::Minus => lo = mk,
            Side::Plus => hi = mk,
        }
        Multidivisor::new(self.slices.clone(), lo, hi)
    }

    pub fn with_slice(&self, label: &str, s: Subdivision) -> Result<Multidivisor> {
        let mut slices = self.slices.clone();
        slices.insert(label.to_string(), s);
        Multidivisor::new(slices, self.m_minus, self.m_plus)
    }

    pub fn nontrivial_count(&self) -> usize {
        self.slices.len()
    }

    pub fn min_sum(&self) -> Rat {
        self.slices.values().fold(Rat::zero(), |a, s| a + s.min())
    }

    pub fn max_sum(&self) -> Rat {
        self.slices.values().fold(Rat::zero(), |a, s| a + s.max())
    }

    fn relabeled(&self, renames: &[(String, String)]) -> Result<Multidivisor> {
        let mut slices = BTreeMap::new();
        for (label, s) in &self.slices {
            let new = renames.iter().find(|(f, _)| f == label).map_or(label.clone(), |(_, t)| t.clone());
            if slices.insert(new.clone(), s.clone()).is_some() {
                return Err(Error::Internal(format!("relabeling collides at {new}")));
            }
        }
        Multidivisor::new(slices, self.m_minus, self.m_plus)
    }
}

fn unimodular(a: Rat, b: Rat) -> bool {
    (a.num() * b.den() - b.num() * a.den()).abs() == 1
}

/// Smoothness of one side, given the extremal vertex of every nontrivial slice, oriented so
/// that the relevant sum is positive for a circ marker.
fn side_smooth(marker: Marker, extremes: &[Rat]) -> bool {
    let fractional: Vec<Rat> = extremes.iter().copied().filter(|v| !v.is_integer()).collect();
    match marker {
        Marker::Dot => fractional.is_empty(),
        Marker::Circ => {
            if fractional.len() > 2 {
                return false;
            }
            let sum = extremes.iter().fold(Rat::zero(), |a, &v| a + v);
            let dens: i64 = fractional.iter().map(|v| v.den()).product();
            sum * Rat::int(dens) == Rat::int(1)
        }
    }
}

pub fn is_smooth(m: &Multidivisor) -> bool {
    let middle = m.slices.values().all(|s| s.intervals().all(|(a, b)| unimodular(a, b)));
    let maxima: Vec<Rat> = m.slices.values().map(|s| s.max()).collect();
    let minima: Vec<Rat> = m.slices.values().map(|s| -s.min()).collect();
    middle && side_smooth(m.m_plus, &maxima) && side_smooth(m.m_minus, &minima)
}

/// A C*-invariant prime divisor.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum DivisorId {
    Minus,
    Plus,
    Slice(String, Rat),
}

impl fmt::Display for DivisorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivisorId::Minus => write!(f, "-"),
            DivisorId::Plus => write!(f, "+"),
            DivisorId::Slice(p, v) => write!(f, "{p}:{v}"),
        }
    }
}

impl FromStr for DivisorId {
    type Err = Error;
    fn from_str(s: &str) -> Result<DivisorId> {
        match s.trim() {
            "-" => Ok(DivisorId::Minus),
            "+" => Ok(DivisorId::Plus),
            t => {
                let (p, v) = t
                    .rsplit_once(':')
                    .ok_or_else(|| Error::InvalidInput(format!("divisor id '{t}' is not '+', '-' or 'label:vertex'")))?;
                Ok(DivisorId::Slice(p.to_string(), v.parse()?))
            }
        }
    }
}

impl Serialize for DivisorId {
    fn serialize<Se: Serializer>(&self, ser: Se) -> std::result::Result<Se::Ok, Se::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DivisorId {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<DivisorId, D::Error> {
        String::deserialize(de)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Integer combination of invariant prime divisors.
pub type CstarDivisor = BTreeMap<DivisorId, i64>;

/// A multidivisor with at most two nontrivial slices, viewed as a toric surface. The rays are
/// `(v, 1)` over `up`, `(v, -1)` over `down` and `(+-1, 0)` for dot markers, in counterclockwise
/// order starting at the smallest angle; `surface` indexes them in that order.
#[derive(Clone, Debug)]
pub struct ToricFiber {
    pub multidivisor: Multidivisor,
    pub up: String,
    pub down: String,
    pub surface: ToricSurface,
    pub ids: Vec<DivisorId>,
    pub rays: Vec<Vec2>,
}

impl ToricFiber {
    pub fn new(m: &Multidivisor, up: &str, down: &str) -> Result<ToricFiber> {
        if let Some(extra) = m.slices.keys().find(|k| *k != up && *k != down) {
            return Err(Error::FiberNotToric(format!(
                "slice {extra} is nontrivial besides {up} and {down}"
            )));
        }
        if !is_smooth(m) {
            return Err(Error::NotSmoothComplete(format!("multidivisor {m:?} is not smooth")));
        }
        let mut pairs: Vec<(Vec2, DivisorId)> = Vec::new();
        for &v in m.slice(up).vertices() {
            pairs.push((v.ray_up(), DivisorId::Slice(up.to_string(), v)));
        }
        for &v in m.slice(down).vertices() {
            pairs.push((v.ray_down(), DivisorId::Slice(down.to_string(), v)));
        }
        if m.m_plus == Marker::Dot {
            pairs.push((Vec2::new(1, 0), DivisorId::Plus));
        }
        if m.m_minus == Marker::Dot {
            pairs.push((Vec2::new(-1, 0), DivisorId::Minus));
        }
        pairs.sort_by(|a, b| a.0.angle_cmp(b.0));
        let n = pairs.len();
        let rays: Vec<Vec2> = pairs.iter().map(|p| p.0).collect();
        if n < 3 || (0..n).any(|i| rays[i].det(rays[(i + 1) % n]) != 1) {
            return Err(Error::NotSmoothComplete(format!("fan {rays:?} is not smooth and complete")));
        }
        let b: Vec<i64> = (0..n).map(|i| rays[(i + n - 1) % n].det(rays[(i + 1) % n])).collect();
        let surface = ToricSurface::from_b(&b)?;
        Ok(ToricFiber {
            multidivisor: m.clone(),
            up: up.to_string(),
            down: down.to_string(),
            surface,
            ids: pairs.into_iter().map(|p| p.1).collect(),
            rays,
        })
    }

    pub fn index_of(&self, id: &DivisorId) -> Option<usize> {
        self.ids.iter().position(|d| d == id)
    }

    pub fn class_of(&self, d: &CstarDivisor) -> Result<DivisorClass> {
        let mut a = vec![0; self.ids.len()];
        for (id, &c) in d {
            let i = self
                .index_of(id)
                .ok_or_else(|| Error::InvalidInput(format!("{id} is not a divisor on this fiber")))?;
            a[i] += c;
        }
        Ok(self.surface.class_of(&a))
    }

    pub fn prime(&self, i: usize) -> CstarDivisor {
        BTreeMap::from([(self.ids[i].clone(), 1)])
    }

    /// Principal divisor of the character `m` in the fiber's own lattice coordinates.
    pub fn principal(&self, m: Vec2) -> CstarDivisor {
        self.ids.iter().zip(&self.rays).map(|(id, r)| (id.clone(), r.dot(m))).filter(|p| p.1 != 0).collect()
    }
}

/// Normal form of the toric surface of a multidivisor with at most two nontrivial slices.
pub fn fiber_surface(m: &Multidivisor) -> Result<ToricSurface> {
    let labels: Vec<&String> = m.slices.keys().collect();
    if labels.len() > 2 {
        return Err(Error::FiberNotToric(format!("{} nontrivial slices", labels.len())));
    }
    let up = labels.first().map_or(ZERO, |s| s.as_str());
    let down = labels.get(1).map_or(if up == S { ZERO } else { S }, |s| s.as_str());
    let f = ToricFiber::new(m, up, down)?;
    ToricSurface::from_b(&f.surface.normal_form())
}

#[derive(Deserialize)]
struct RawDiagram {
    #[serde(flatten)]
    m: Multidivisor,
    edges: Vec<(Rat, Rat)>,
}

/// A multidivisor with a bipartite graph between the slices over `0` and `s`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawDiagram")]
pub struct DegenerationDiagram {
    #[serde(flatten)]
    m: Multidivisor,
    edges: Vec<(Rat, Rat)>,
}

impl TryFrom<RawDiagram> for DegenerationDiagram {
    type Error = Error;
    fn try_from(r: RawDiagram) -> Result<DegenerationDiagram> {
        DegenerationDiagram::new(r.m, r.edges)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidDiagram(msg.into())
}

impl DegenerationDiagram {
    pub fn new(m: Multidivisor, mut edges: Vec<(Rat, Rat)>) -> Result<DegenerationDiagram> {
        edges.sort();
        edges.dedup();
        let d = DegenerationDiagram { m, edges };
        d.check()?;
        Ok(d)
    }

    fn check(&self) -> Result<()> {
        let (m0, ms) = (self.m.slice(ZERO), self.m.slice(S));
        if self.edges.is_empty() {
            return Err(bad("no edges"));
        }
        for &(v, w) in &self.edges {
            if !m0.contains(v) || !ms.contains(w) {
                return Err(bad(format!("edge ({v}, {w}) has an endpoint outside the slices")));
            }
        }
        for (label, s, pick) in [(ZERO, &m0, 0), (S, &ms, 1)] {
            for &v in s.vertices() {
                let val = self.valency(pick, v);
                if val == 0 {
                    return Err(bad(format!("vertex {v} of slice {label} has no edge")));
                }
                if val >= 2 && !v.is_integer() {
                    return Err(bad(format!("vertex {v} of slice {label} has valency {val} but is not integral")));
                }
            }
        }
        for (i, a) in self.edges.iter().enumerate() {
            for b in &self.edges[i + 1..] {
                if (a.0 - b.0) * (a.1 - b.1) < Rat::zero() {
                    return Err(bad(format!("edges {a:?} and {b:?} cross")));
                }
            }
        }
        // Sorted non-crossing edges form a path exactly when consecutive ones share an endpoint.
        for w in self.edges.windows(2) {
            if w[0].0 != w[1].0 && w[0].1 != w[1].1 {
                return Err(bad("graph is not connected"));
            }
        }
        if !is_smooth(&self.m) {
            return Err(bad("general fiber is not smooth"));
        }
        if !is_smooth(&self.special_multidivisor()?) {
            return Err(bad("special fiber is not smooth"));
        }
        Ok(())
    }

    pub fn multidivisor(&self) -> &Multidivisor {
        &self.m
    }

    pub fn edges(&self) -> &[(Rat, Rat)] {
        &self.edges
    }

    /// Number of edges at `v`; `side` 0 is the slice over `0`, 1 the slice over `s`.
    pub fn valency(&self, side: usize, v: Rat) -> usize {
        self.edges.iter().filter(|e| if side == 0 { e.0 == v } else { e.1 == v }).count()
    }

    fn special_multidivisor(&self) -> Result<Multidivisor> {
        let sums: Vec<Rat> = self.edges.iter().map(|&(v, w)| v + w).collect();
        let mut slices = self.m.slices.clone();
        slices.remove(S);
        slices.insert(ZERO.to_string(), Subdivision::new(sums)?);
        Multidivisor::new(slices, self.m.m_minus, self.m.m_plus)
    }

    pub fn special_fiber(&self) -> Multidivisor {
        self.special_multidivisor().expect("validated diagram has a valid special fiber")
    }

    pub fn general_fiber(&self) -> Result<ToricFiber> {
        ToricFiber::new(&self.m, ZERO, S)
    }

    pub fn special_toric_fiber(&self) -> Result<ToricFiber> {
        ToricFiber::new(&self.special_fiber(), ZERO, S)
    }

    /// Translates the slice over `0` by `k` and the one over `s` by `-k`.
    pub fn shifted(&self, k: i64) -> Result<DegenerationDiagram> {
        let k = Rat::int(k);
        let mut slices = self.m.slices().clone();
        for (label, t) in [(ZERO, k), (S, -k)] {
            slices.insert(label.to_string(), self.m.slice(label).translate(t));
        }
        let m = Multidivisor::new(slices, self.m.m_minus(), self.m.m_plus())?;
        DegenerationDiagram::new(m, self.edges.iter().map(|&(v, w)| (v + k, w - k)).collect())
    }
}

/// Image of an invariant divisor of the general fiber on the special fiber.
pub fn pi_circ_divisor(d: &DegenerationDiagram, div: &CstarDivisor) -> Result<CstarDivisor> {
    let mut b0: HashMap<Rat, i64> = HashMap::new();
    let mut bs: HashMap<Rat, i64> = HashMap::new();
    let mut out = CstarDivisor::new();
    for (id, &c) in div {
        match id {
            DivisorId::Slice(p, v) if p == ZERO => {
                if !d.m.slice(ZERO).contains(*v) {
                    return Err(Error::InvalidInput(format!("{id} is not a divisor on the general fiber")));
                }
                *b0.entry(*v).or_default() += c;
            }
            DivisorId::Slice(p, v) if p == S => {
                if !d.m.slice(S).contains(*v) {
                    return Err(Error::InvalidInput(format!("{id} is not a divisor on the general fiber")));
                }
                *bs.entry(*v).or_default() += c;
            }
            _ => *out.entry(id.clone()).or_default() += c,
        }
    }
    for &(v0, vs) in &d.edges {
        let (c0, cs) = (b0.get(&v0).copied().unwrap_or(0), bs.get(&vs).copied().unwrap_or(0));
        let coeff = Rat::int(mu(v0 + vs)) * (Rat::new(c0, mu(v0))? + Rat::new(cs, mu(vs))?);
        if !coeff.is_integer() {
            return Err(Error::Internal(format!("non-integral coefficient {coeff} at edge ({v0}, {vs})")));
        }
        *out.entry(DivisorId::Slice(ZERO.to_string(), v0 + vs)).or_default() += coeff.num();
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

/// Matrix of the relabeling isomorphism `from -> to` in class coordinates.
pub fn relabel_matrix(from: &ToricSurface, to: &ToricSurface) -> Result<IMatrix> {
    let perm = from
        .relabeling_to(to)
        .ok_or_else(|| Error::InvalidInput(format!("{from:?} and {to:?} are not isomorphic")))?;
    let cols: Vec<Vec<i64>> = (0..from.rank())
        .map(|k| {
            let mut e = vec![0; from.rank()];
            e[k] = 1;
            from.transfer_to(to, &perm, &DivisorClass(e)).0
        })
        .collect();
    Ok(matrix::from_columns(&cols))
}

/// The map on Picard groups, in class coordinates of the two fiber surfaces.
#[derive(Clone, Debug)]
pub struct PiCircMap {
    pub diagram: DegenerationDiagram,
    pub general: ToricFiber,
    pub special: ToricFiber,
    pub matrix: IMatrix,
    pub inverse: IMatrix,
}

impl PiCircMap {
    pub fn apply(&self, c: &DivisorClass) -> DivisorClass {
        DivisorClass(matrix::apply(&self.matrix, &c.0))
    }

    pub fn apply_inverse(&self, c: &DivisorClass) -> DivisorClass {
        DivisorClass(matrix::apply(&self.inverse, &c.0))
    }

    /// The same map read between surfaces isomorphic to the two fibers.
    pub fn between(&self, from: &ToricSurface, to: &ToricSurface) -> Result<IMatrix> {
        let a = relabel_matrix(from, &self.general.surface)?;
        let b = relabel_matrix(&self.special.surface, to)?;
        Ok(matrix::mul(&b, &matrix::mul(&self.matrix, &a)))
    }
}

pub fn pi_circ(d: &DegenerationDiagram) -> Result<PiCircMap> {
    let general = d.general_fiber().map_err(|e| match e {
        Error::FiberNotToric(s) => Error::FiberNotToric(format!("divisor-level only: {s}")),
        e => e,
    })?;
    let special = d.special_toric_fiber().map_err(|e| match e {
        Error::FiberNotToric(s) => Error::FiberNotToric(format!("divisor-level only: {s}")),
        e => e,
    })?;
    let n = general.ids.len();
    let cols: Vec<Vec<i64>> = (2..n)
        .map(|k| Ok(special.class_of(&pi_circ_divisor(d, &general.prime(k))?)?.0))
        .collect::<Result<_>>()?;
    let m = matrix::from_columns(&cols);
    for e in [Vec2::new(1, 0), Vec2::new(0, 1)] {
        let img = special.class_of(&pi_circ_divisor(d, &general.principal(e))?)?;
        if !img.is_zero() {
            return Err(Error::Internal(format!("principal divisor maps to {img:?}")));
        }
    }
    let inverse = matrix::inverse(&m).ok_or_else(|| Error::Internal(format!("pi map {m:?} is not invertible")))?;
    Ok(PiCircMap { diagram: d.clone(), general, special, matrix: m, inverse })
}

/// The multidivisor `M(r, alpha)` with the graph `G`, or with the other graph for `r = 0, alpha = 1`.
pub fn hirzebruch_diagram(r: i64, alpha: i64, tilde: bool) -> Result<DegenerationDiagram> {
    if r < 0 || alpha <= 0 {
        return Err(Error::Precondition(format!("need r >= 0 and alpha > 0, got ({r}, {alpha})")));
    }
    if tilde && (r, alpha) != (0, 1) {
        return Err(Error::Precondition("the second graph exists only for r = 0, alpha = 1".into()));
    }
    let lo = Rat::new(-1, r + alpha)?;
    let hi = Rat::new(1, alpha)?;
    let z = Rat::zero();
    let m = Multidivisor::from_slices(&[(ZERO, vec![lo, z]), (S, vec![z, hi])], Marker::Circ, Marker::Circ)?;
    let edges = if tilde { vec![(lo, z), (lo, hi), (z, hi)] } else { vec![(lo, z), (z, z), (z, hi)] };
    DegenerationDiagram::new(m, edges)
}

/// `pi` for `M(r, alpha)` as a matrix from `F_r` to `F_{r + 2 alpha}` in standard coordinates.
pub fn hirzebruch_pi(r: i64, alpha: i64, tilde: bool) -> Result<IMatrix> {
    let d = hirzebruch_diagram(r, alpha, tilde)?;
    let pi = pi_circ(&d)?;
    pi.between(&ToricSurface::hirzebruch(r), &ToricSurface::hirzebruch(r + 2 * alpha))
}

/// Result of the deformation construction for a surface with `b_0 < 0`.
#[derive(Clone, Debug)]
pub struct ToricDef {
    pub diagram: DegenerationDiagram,
    pub general_b: Vec<i64>,
}

pub fn toricdef(b: &[i64], r: i64) -> Result<ToricDef> {
    let n = b.len();
    if n < 4 || b[0] >= 0 || r < 0 || r > -b[0] {
        return Err(Error::Precondition(format!("toricdef needs b_0 < 0, n >= 4, 0 <= r <= -b_0; got {b:?}, r = {r}")));
    }
    let (alpha, gamma) = alpha_gamma(b)?;
    let rays = rays_from_b(b)?;
    let g = |v: Vec2| Vec2::new(v.y, -v.x + r * v.y);
    let img: Vec<Vec2> = rays.iter().map(|&v| g(v)).collect();
    if img[1..].iter().any(|v| v.y < 0) {
        return Err(Error::Internal("a ray other than rho_0 lies below the axis".into()));
    }
    if img[alpha - 1].y != r + gamma {
        return Err(Error::Internal(format!("height of rho_(alpha-1) is {}, expected {}", img[alpha - 1].y, r + gamma)));
    }
    let slopes: Vec<Rat> = img
        .iter()
        .filter(|v| v.y > 0)
        .map(|v| Rat::new(v.x, v.y))
        .collect::<Result<_>>()?;
    let mut slopes = slopes;
    slopes.sort();
    let z = Rat::zero();
    let m0: Vec<Rat> = slopes.iter().copied().filter(|&v| v <= z).collect();
    let ms: Vec<Rat> = slopes.iter().copied().filter(|&v| v >= z).collect();
    let dot = |p: bool| if p { Marker::Dot } else { Marker::Circ };
    let m = Multidivisor::from_slices(
        &[(ZERO, m0.clone()), (S, ms.clone())],
        dot(img.contains(&Vec2::new(-1, 0))),
        dot(img.contains(&Vec2::new(1, 0))),
    )?;
    let mut edges: Vec<(Rat, Rat)> = m0.iter().map(|&v| (v, z)).collect();
    edges.extend(ms.iter().map(|&w| (z, w)));
    let diagram = DegenerationDiagram::new(m, edges)?;

    let mut general_b = vec![b[0] + gamma + 2 * r];
    general_b.extend((1..alpha).rev().map(|i| b[i]));
    general_b.push(b[alpha] - gamma - 2 * r);
    general_b.extend_from_slice(&b[alpha + 1..]);

    let gen = diagram.general_fiber()?;
    if gen.surface.normal_form() != normal_form(&general_b) {
        return Err(Error::Internal(format!(
            "general fiber {:?} disagrees with the formula {general_b:?}",
            gen.surface.b()
        )));
    }
    let sp = diagram.special_toric_fiber()?;
    if !(0..n).any(|s| (0..n).all(|j| sp.surface.b()[j] == b[(j + s) % n])) {
        return Err(Error::Internal(format!("special fiber {:?} is not a rotation of {b:?}", sp.surface.b())));
    }
    Ok(ToricDef { diagram, general_b })
}

/// Where a new ray goes: a marker flip or a new vertex in a slice.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlowupSpec {
    Marker { side: Side },
    Vertex { slice: String, v: Rat },
}

/// A diagram blowup with the induced blowups of both fibers.
#[derive(Clone, Debug)]
pub struct DiagramBlowup {
    pub coarse: DegenerationDiagram,
    pub fine: DegenerationDiagram,
    pub general: Blowup,
    pub special: Blowup,
    pub general_exceptional: DivisorId,
    pub special_exceptional: DivisorId,
}

pub fn blowup_diagram(d: &DegenerationDiagram, spec: &BlowupSpec) -> Result<DegenerationDiagram> {
    let m = &d.m;
    match spec {
        BlowupSpec::Marker { side } => {
            if m.marker(*side) != Marker::Circ {
                return Err(bad(format!("marker {side:?} is already a dot")));
            }
            DegenerationDiagram::new(m.with_marker(*side, Marker::Dot)?, d.edges.clone())
        }
        BlowupSpec::Vertex { slice, v } if slice == ZERO || slice == S => {
            let own = m.slice(slice);
            if own.contains(*v) {
                return Err(bad(format!("{v} is already a vertex of {slice}")));
            }
            let in_zero = slice == ZERO;
            let other = m.slice(if in_zero { S } else { ZERO });
            let mine = |e: &(Rat, Rat)| if in_zero { e.0 } else { e.1 };
            let theirs = |e: &(Rat, Rat)| if in_zero { e.1 } else { e.0 };
            let left = own.vertices().iter().copied().filter(|&u| u < *v).max();
            let right = own.vertices().iter().copied().filter(|&u| u > *v).min();
            let partner = match (left, right) {
                (Some(l), Some(r)) => {
                    let nl: BTreeSet<Rat> = d.edges.iter().filter(|e| mine(e) == l).map(theirs).collect();
                    let common: Vec<Rat> =
                        d.edges.iter().filter(|e| mine(e) == r).map(theirs).filter(|w| nl.contains(w)).collect();
                    match common[..] {
                        [w] => w,
                        _ => return Err(bad("neighbors of the new vertex have no unique common neighbor")),
                    }
                }
                (Some(_), None) => Subdivision::max(&other),
                (None, Some(_)) => Subdivision::min(&other),
                (None, None) => unreachable!("subdivisions are nonempty"),
            };
            let new_m = m.with_slice(slice, own.with_vertex(*v))?;
            let mut edges = d.edges.clone();
            edges.push(if in_zero { (*v, partner) } else { (partner, *v) });
            DegenerationDiagram::new(new_m, edges)
        }
        BlowupSpec::Vertex { slice, v } => {
            let s = m.slice(slice);
            if s.contains(*v) {
                return Err(bad(format!("{v} is already a vertex of {slice}")));
            }
            DegenerationDiagram::new(m.with_slice(slice, s.with_vertex(*v))?, d.edges.clone())
        }
    }
}

/// A blowup of toric surfaces read off from fibers with one more ray on the fine side.
pub fn fiber_blowup(coarse: &ToricFiber, fine: &ToricFiber, new: &DivisorId) -> Result<Blowup> {
    let e = fine
        .index_of(new)
        .ok_or_else(|| Error::Internal(format!("{new} is not a ray of the fine fiber")))?;
    if coarse.ids.len() + 1 != fine.ids.len() {
        return Err(Error::Internal("fibers differ by more than one ray".into()));
    }
    let index_map: Vec<usize> = coarse
        .ids
        .iter()
        .map(|id| fine.index_of(id).ok_or_else(|| Error::Internal(format!("{id} vanished in the blowup"))))
        .collect::<Result<_>>()?;
    let n = fine.ids.len();
    let (l, r) = ((e + n - 1) % n, (e + 1) % n);
    let li = index_map.iter().position(|&k| k == l);
    let ri = index_map.iter().position(|&k| k == r);
    let m = coarse.ids.len();
    let adjacent = matches!((li, ri), (Some(a), Some(b)) if (a + 1) % m == b);
    if !adjacent || fine.rays[e] != fine.rays[l] + fine.rays[r] {
        return Err(Error::NotMinusOne(format!("{new} is not the blowup of a fixed point")));
    }
    for (k, &fk) in index_map.iter().enumerate() {
        if coarse.rays[k] != fine.rays[fk] {
            return Err(Error::Internal(format!("ray of {} moved", coarse.ids[k])));
        }
    }
    Ok(Blowup { fine: fine.surface.clone(), coarse: coarse.surface.clone(), exceptional: e, index_map })
}

fn special_new_id(coarse: &DegenerationDiagram, fine: &DegenerationDiagram) -> Result<DivisorId> {
    if coarse.m.m_minus != fine.m.m_minus {
        return Ok(DivisorId::Minus);
    }
    if coarse.m.m_plus != fine.m.m_plus {
        return Ok(DivisorId::Plus);
    }
    let old: BTreeSet<Rat> = coarse.edges.iter().map(|&(v, w)| v + w).collect();
    fine.edges
        .iter()
        .map(|&(v, w)| v + w)
        .find(|s| !old.contains(s))
        .map(|s| DivisorId::Slice(ZERO.to_string(), s))
        .ok_or_else(|| Error::Internal("special fiber unchanged by blowup".into()))
}

fn general_new_id(spec: &BlowupSpec) -> DivisorId {
    match spec {
        BlowupSpec::Marker { side: Side::Plus } => DivisorId::Plus,
        BlowupSpec::Marker { side: Side::Minus } => DivisorId::Minus,
        BlowupSpec::Vertex { slice, v } => DivisorId::Slice(slice.clone(), *v),
    }
}

fn pair(coarse: &DegenerationDiagram, fine: &DegenerationDiagram, gen_id: DivisorId) -> Result<DiagramBlowup> {
    let general = fiber_blowup(&coarse.general_fiber()?, &fine.general_fiber()?, &gen_id)?;
    let sp_id = special_new_id(coarse, fine)?;
    let special = fiber_blowup(&coarse.special_toric_fiber()?, &fine.special_toric_fiber()?, &sp_id)?;
    Ok(DiagramBlowup {
        coarse: coarse.clone(),
        fine: fine.clone(),
        general,
        special,
        general_exceptional: gen_id,
        special_exceptional: sp_id,
    })
}

/// Blowup of a diagram with toric fibers, together with the blowups of both fibers.
pub fn blowup_with_fibers(d: &DegenerationDiagram, spec: &BlowupSpec) -> Result<DiagramBlowup> {
    let fine = blowup_diagram(d, spec)?;
    pair(d, &fine, general_new_id(spec))
}

/// Specs for blowing up each torus fixed point of the general fiber.
pub fn general_blowup_specs(d: &DegenerationDiagram) -> Result<Vec<BlowupSpec>> {
    let f = d.general_fiber()?;
    let n = f.rays.len();
    let mut out = Vec::new();
    for i in 0..n {
        let s = f.rays[i] + f.rays[(i + 1) % n];
        out.push(match s.y.signum() {
            1 => BlowupSpec::Vertex { slice: ZERO.to_string(), v: Rat::new(s.x, s.y)? },
            -1 => BlowupSpec::Vertex { slice: S.to_string(), v: Rat::new(s.x, -s.y)? },
            _ => BlowupSpec::Marker { side: if s.x > 0 { Side::Plus } else { Side::Minus } },
        });
    }
    Ok(out)
}

/// All blowups of `d` over fixed points of the general fiber that stay valid diagrams.
pub fn diagram_blowups(d: &DegenerationDiagram) -> Result<Vec<DiagramBlowup>> {
    Ok(general_blowup_specs(d)?.iter().filter_map(|s| blowup_with_fibers(d, s).ok()).collect())
}

/// Blowdown along an invariant curve of the special fiber.
pub fn blowdown_diagram(d: &DegenerationDiagram, curve: &DivisorId) -> Result<DegenerationDiagram> {
    if let Ok(sp) = d.special_toric_fiber() {
        let i = sp
            .index_of(curve)
            .ok_or_else(|| Error::InvalidInput(format!("{curve} is not a curve on the special fiber")))?;
        if sp.surface.b()[i] != 1 {
            return Err(Error::NotMinusOne(format!("{curve} has self-intersection {}", -sp.surface.b()[i])));
        }
    }
    let m = &d.m;
    match curve {
        DivisorId::Plus | DivisorId::Minus => {
            let side = if *curve == DivisorId::Plus { Side::Plus } else { Side::Minus };
            if m.marker(side) != Marker::Dot {
                return Err(Error::InvalidInput(format!("{curve} is not a curve of the special fiber")));
            }
            DegenerationDiagram::new(m.with_marker(side, Marker::Circ)?, d.edges.clone())
        }
        DivisorId::Slice(p, v) if p == ZERO => {
            let e = *d
                .edges
                .iter()
                .find(|&&(a, b)| a + b == *v)
                .ok_or_else(|| Error::InvalidInput(format!("no edge sums to {v}")))?;
            let (va, vb) = (d.valency(0, e.0), d.valency(1, e.1));
            let mut edges = d.edges.clone();
            edges.retain(|x| *x != e);
            let new_m = match (va, vb) {
                (1, 1) => return Err(Error::Internal("edge with two valency-one endpoints".into())),
                (1, _) => m.with_slice(ZERO, m.slice(ZERO).without_vertex(e.0)?)?,
                (_, 1) => m.with_slice(S, m.slice(S).without_vertex(e.1)?)?,
                _ => return Err(Error::Internal(format!("both endpoints of ({}, {}) have valency >= 2", e.0, e.1))),
            };
            DegenerationDiagram::new(new_m, edges)
        }
        DivisorId::Slice(p, v) => {
            if p == S {
                return Err(Error::InvalidInput("the slice over s is trivial on the special fiber".into()));
            }
            DegenerationDiagram::new(m.with_slice(p, m.slice(p).without_vertex(*v)?)?, d.edges.clone())
        }
    }
}

/// All blowdowns of `d` along general-fiber curves whose diagram vertex has valency one (or a
/// dot marker), such that both fibers blow down.
pub fn diagram_blowdowns(d: &DegenerationDiagram) -> Result<Vec<DiagramBlowup>> {
    let gen = d.general_fiber()?;
    let mut out = Vec::new();
    for (i, id) in gen.ids.iter().enumerate() {
        if gen.surface.b()[i] != 1 {
            continue;
        }
        let coarse = match id {
            DivisorId::Plus => d.m.with_marker(Side::Plus, Marker::Circ).and_then(|m| DegenerationDiagram::new(m, d.edges.clone())),
            DivisorId::Minus => d.m.with_marker(Side::Minus, Marker::Circ).and_then(|m| DegenerationDiagram::new(m, d.edges.clone())),
            DivisorId::Slice(p, v) => {
                let side = if p == ZERO { 0 } else { 1 };
                if d.valency(side, *v) != 1 {
                    continue;
                }
                let s = d.m.slice(p);
                let edges: Vec<(Rat, Rat)> =
                    d.edges.iter().copied().filter(|e| if side == 0 { e.0 != *v } else { e.1 != *v }).collect();
                s.without_vertex(*v)
                    .and_then(|s| d.m.with_slice(p, s))
                    .and_then(|m| DegenerationDiagram::new(m, edges))
            }
        };
        if let Ok(c) = coarse {
            if let Ok(bu) = pair(&c, d, id.clone()) {
                out.push(bu);
            }
        }
    }
    Ok(out)
}

/// Chain of diagrams reducing the number of nontrivial slices to at most two.
pub fn degenerate_to_toric(m: &Multidivisor) -> Result<Vec<DegenerationDiagram>> {
    if !is_smooth(m) {
        return Err(Error::Precondition("degenerate_to_toric needs a smooth multidivisor".into()));
    }
    let mut chain = Vec::new();
    let mut cur = m.clone();
    while cur.nontrivial_count() > 2 {
        let labels: Vec<String> = cur.slices.keys().cloned().collect();
        let choice = labels.iter().find_map(|p| {
            let sp = &cur.slices[p];
            if !sp.min().is_integer() {
                return None;
            }
            labels.iter().find(|q| *q != p && Subdivision::max(&cur.slices[*q]).is_integer()).map(|q| (p.clone(), q.clone()))
        });
        let (p, q) = choice.ok_or_else(|| Error::Internal("no slice pair with integral extremal vertices".into()))?;
        let mut renames = vec![(p.clone(), ZERO.to_string()), (q.clone(), S.to_string())];
        let mut fresh = 0;
        for l in &labels {
            if (l == ZERO || l == S) && *l != p && *l != q {
                while labels.contains(&format!("p{fresh}")) {
                    fresh += 1;
                }
                renames.push((l.clone(), format!("p{fresh}")));
                fresh += 1;
            }
        }
        let rel = cur.relabeled(&renames)?;
        let (mp, mq) = (rel.slice(ZERO), rel.slice(S));
        let (wp, wq) = (Subdivision::min(&mp), Subdivision::max(&mq));
        let mut edges: Vec<(Rat, Rat)> = mp.vertices().iter().map(|&v| (v, wq)).collect();
        edges.extend(mq.vertices().iter().map(|&w| (wp, w)));
        let d = DegenerationDiagram::new(rel, edges)
            .map_err(|e| Error::Internal(format!("slice-merging diagram is invalid: {e}")))?;
        cur = d.special_fiber();
        chain.push(d);
    }
    Ok(chain)
}

fn fractions_in_unit(bound: i64) -> Vec<Rat> {
    let mut out: BTreeSet<Rat> = BTreeSet::new();
    for q in 1..=bound {
        for p in 0..q {
            out.insert(Rat::new(p, q).expect("positive denominator"));
        }
    }
    out.into_iter().collect()
}

fn within(v: Rat, bound: i64) -> bool {
    v.num().abs() <= bound && v.den() <= bound
}

/// Candidate special-fiber multidivisors for `x0`: one per ray sent to `(0, -1)` with a choice
/// of shear, in both orientations.
fn special_presentations(x0: &ToricSurface) -> Vec<(Vec<Rat>, Marker, Marker)> {
    let mut out = BTreeSet::new();
    let n = x0.n();
    let mut orient = vec![x0.b().to_vec()];
    orient.push(x0.b().iter().rev().copied().collect());
    for b in orient {
        for j in 0..n {
            if b[j] > 0 {
                continue;
            }
            let rot: Vec<i64> = (0..n).map(|k| b[(j + k) % n]).collect();
            let rays = rays_from_b(&rot).expect("rotation of a smooth sequence");
            for c in 0..=-b[j] {
                let g = |v: Vec2| Vec2::new(v.y, -v.x + c * v.y);
                let img: Vec<Vec2> = rays.iter().map(|&v| g(v)).collect();
                if img[1..].iter().any(|v| v.y < 0 || (v.y == 0 && v.x.abs() != 1)) {
                    continue;
                }
                let mut slopes: Vec<Rat> =
                    img.iter().filter(|v| v.y > 0).map(|v| Rat::new(v.x, v.y).expect("positive height")).collect();
                slopes.sort();
                let dot = |p: bool| if p { Marker::Dot } else { Marker::Circ };
                out.insert((
                    slopes,
                    dot(img.contains(&Vec2::new(-1, 0))),
                    dot(img.contains(&Vec2::new(1, 0))),
                ));
            }
        }
    }
    out.into_iter().collect()
}

/// Diagrams with slices over `0` and `s` only, whose special fiber is `sums` with the given
/// markers, vertices bounded by `vbound`, normalized by `0 <= min M_s < 1`.
fn caterpillars(sums: &[Rat], lo: Marker, hi: Marker, vbound: i64) -> Vec<DegenerationDiagram> {
    let k = sums.len();
    let mut out = Vec::new();
    if k < 2 {
        return out;
    }
    for w1 in fractions_in_unit(vbound) {
        for mask in 0..(1u64 << (k - 1)) {
            let mut edges = vec![(sums[0] - w1, w1)];
            for step in 0..k - 1 {
                let (v, w) = *edges.last().expect("nonempty");
                edges.push(if mask >> step & 1 == 1 { (v, sums[step + 1] - v) } else { (sums[step + 1] - w, w) });
            }
            if edges.iter().any(|&(v, w)| !within(v, vbound) || !within(w, vbound)) {
                continue;
            }
            let m0: BTreeSet<Rat> = edges.iter().map(|e| e.0).collect();
            let ms: BTreeSet<Rat> = edges.iter().map(|e| e.1).collect();
            if m0.len() < 2 && m0.iter().all(|v| v.is_zero()) || ms.len() < 2 && ms.iter().all(|v| v.is_zero()) {
                continue;
            }
            let Ok(m) = Multidivisor::from_slices(
                &[(ZERO, m0.into_iter().collect()), (S, ms.into_iter().collect())],
                lo,
                hi,
            ) else {
                continue;
            };
            if m.nontrivial_count() < 2 {
                continue;
            }
            if let Ok(d) = DegenerationDiagram::new(m, edges) {
                out.push(d);
            }
        }
    }
    out
}

/// Every general fiber of a bounded diagram degenerating to `x0`, keyed by diagram.
pub fn degenerations_from(x0: &ToricSurface, vbound: i64) -> Vec<DegenerationDiagram> {
    let nf0 = x0.normal_form();
    let mut found: BTreeSet<DegenerationDiagram> = BTreeSet::new();
    for (sums, lo, hi) in special_presentations(x0) {
        for d in caterpillars(&sums, lo, hi, vbound) {
            let ok = d.general_fiber().is_ok()
                && d.special_toric_fiber().map_or(false, |f| f.surface.normal_form() == nf0);
            if ok {
                found.insert(d);
            }
        }
    }
    found.into_iter().collect()
}

pub fn find_toric_degenerations(xs: &ToricSurface, x0: &ToricSurface, vbound: i64) -> Vec<DegenerationDiagram> {
    if xs.rank() != x0.rank() {
        return Vec::new();
    }
    let nfs = xs.normal_form();
    degenerations_from(x0, vbound)
        .into_iter()
        .filter(|d| d.general_fiber().map_or(false, |f| f.surface.normal_form() == nfs))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// From the general fiber to the special fiber.
    Degenerate,
    /// From the special fiber to the general fiber.
    Deform,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectStep {
    pub diagram: DegenerationDiagram,
    pub direction: Direction,
    pub from: ToricSurface,
    pub to: ToricSurface,
    pub matrix: IMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Connection {
    pub steps: Vec<ConnectStep>,
    /// Composite isomorphism `Pic(X) -> Pic(X')` in class coordinates.
    pub matrix: IMatrix,
}

#[derive(Clone, Copy, Debug)]
pub struct ConnectBounds {
    /// Bound on `|b_i|` for intermediate normal forms.
    pub bbound: i64,
    /// Vertex bound for the diagram search fallback.
    pub vbound: i64,
}

impl Default for ConnectBounds {
    fn default() -> Self {
        ConnectBounds { bbound: 3, vbound: 6 }
    }
}

type Edge = (Vec<i64>, DegenerationDiagram, Direction);

fn toricdef_edges(nodes: &BTreeSet<Vec<i64>>) -> Vec<(Vec<i64>, Edge)> {
    let mut out = Vec::new();
    for nf in nodes {
        let n = nf.len();
        let mut seen = BTreeSet::new();
        for p in dihedral_perms(n) {
            let b: Vec<i64> = p.iter().map(|&i| nf[i]).collect();
            if b[0] >= 0 || !seen.insert(b.clone()) {
                continue;
            }
            for r in 0..=-b[0] {
                let Ok(t) = toricdef(&b, r) else { continue };
                let gen = normal_form(&t.general_b);
                if gen != *nf && nodes.contains(&gen) {
                    out.push((nf.clone(), (gen.clone(), t.diagram.clone(), Direction::Deform)));
                    out.push((gen, (nf.clone(), t.diagram, Direction::Degenerate)));
                }
            }
        }
    }
    out
}

fn search_edges(nodes: &BTreeSet<Vec<i64>>, vbound: i64) -> Vec<(Vec<i64>, Edge)> {
    let mut out = Vec::new();
    for nf in nodes {
        let x0 = ToricSurface::from_b(nf).expect("normal form is smooth");
        for d in degenerations_from(&x0, vbound) {
            let gen = d.general_fiber().expect("search keeps toric fibers").surface.normal_form();
            if gen != *nf && nodes.contains(&gen) {
                out.push((nf.clone(), (gen.clone(), d.clone(), Direction::Deform)));
                out.push((gen, (nf.clone(), d, Direction::Degenerate)));
            }
        }
    }
    out
}

fn bfs(adj: &BTreeMap<Vec<i64>, Vec<Edge>>, from: &[i64], to: &[i64]) -> Option<Vec<(Vec<i64>, Edge)>> {
    let mut prev: HashMap<Vec<i64>, (Vec<i64>, Edge)> = HashMap::new();
    let mut queue = VecDeque::from([from.to_vec()]);
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::from([from.to_vec()]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = Vec::new();
            let mut cur = u;
            while let Some((p, e)) = prev.get(&cur) {
                path.push((p.clone(), e.clone()));
                cur = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        for e in adj.get(&u).into_iter().flatten() {
            if seen.insert(e.0.clone()) {
                prev.insert(e.0.clone(), (u.clone(), e.clone()));
                queue.push_back(e.0.clone());
            }
        }
    }
    None
}

fn step_matrix(from: &ToricSurface, to: &ToricSurface, d: &DegenerationDiagram, dir: Direction) -> Result<IMatrix> {
    let pi = pi_circ(d)?;
    Ok(match dir {
        Direction::Degenerate => pi.between(from, to)?,
        Direction::Deform => {
            let a = relabel_matrix(from, &pi.special.surface)?;
            let b = relabel_matrix(&pi.general.surface, to)?;
            matrix::mul(&b, &matrix::mul(&pi.inverse, &a))
        }
    })
}

/// Path of homogeneous degenerations and deformations between two toric surfaces of equal rank.
pub fn connect(x: &ToricSurface, y: &ToricSurface, bounds: ConnectBounds) -> Result<Connection> {
    if x.rank() != y.rank() {
        return Err(Error::Precondition("connect needs surfaces of equal rank".into()));
    }
    let rank = x.rank();
    let (nx, ny) = (x.normal_form(), y.normal_form());
    let mut nodes: BTreeSet<Vec<i64>> = crate::surface::enumerate_surfaces(rank, bounds.bbound)
        .into_iter()
        .map(|s| s.b().to_vec())
        .collect();
    nodes.insert(nx.clone());
    nodes.insert(ny.clone());
    let mut adj: BTreeMap<Vec<i64>, Vec<Edge>> = BTreeMap::new();
    for (u, e) in toricdef_edges(&nodes) {
        adj.entry(u).or_default().push(e);
    }
    let path = match bfs(&adj, &nx, &ny) {
        Some(p) => p,
        None => {
            for (u, e) in search_edges(&nodes, bounds.vbound) {
                adj.entry(u).or_default().push(e);
            }
            bfs(&adj, &nx, &ny).ok_or_else(|| {
                Error::BoundTooSmall(format!(
                    "no path between {nx:?} and {ny:?} with |b| <= {} and vbound {}; try larger bounds",
                    bounds.bbound, bounds.vbound
                ))
            })?
        }
    };
    let mut total = relabel_matrix(x, &ToricSurface::from_b(&nx)?)?;
    let mut steps = Vec::new();
    for (u, (v, d, dir)) in path {
        let (from, to) = (ToricSurface::from_b(&u)?, ToricSurface::from_b(&v)?);
        let m = step_matrix(&from, &to, &d, dir)?;
        total = matrix::mul(&m, &total);
        steps.push(ConnectStep { diagram: d, direction: dir, from, to, matrix: m });
    }
    total = matrix::mul(&relabel_matrix(&ToricSurface::from_b(&ny)?, y)?, &total);
    Ok(Connection { steps, matrix: total })
}
