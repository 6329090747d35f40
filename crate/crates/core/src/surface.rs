//! Smooth complete toric surfaces given by b-sequences.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::Vec2;

/// Divisor class in the quotient basis: coordinate `k` is the coefficient of `D_{k+2}`
/// after eliminating `D_0` and `D_1` with the principal divisors of `e_1` and `e_2`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DivisorClass(pub Vec<i64>);

impl DivisorClass {
    pub fn zero(rank: usize) -> DivisorClass {
        DivisorClass(vec![0; rank])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn scaled(&self, k: i64) -> DivisorClass {
        DivisorClass(self.0.iter().map(|c| k * c).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl fmt::Debug for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, o: &DivisorClass) -> DivisorClass {
        assert_eq!(self.0.len(), o.0.len(), "classes on different surfaces");
        DivisorClass(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, o: &DivisorClass) -> DivisorClass {
        assert_eq!(self.0.len(), o.0.len(), "classes on different surfaces");
        DivisorClass(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for DivisorClass {
    type Output = DivisorClass;
    fn add(self, o: DivisorClass) -> DivisorClass {
        &self + &o
    }
}

impl Sub for DivisorClass {
    type Output = DivisorClass;
    fn sub(self, o: DivisorClass) -> DivisorClass {
        &self - &o
    }
}

impl Neg for DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        self.scaled(-1)
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        self.scaled(-1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Cohomology {
    pub h0: i64,
    pub h1: i64,
    pub h2: i64,
}

impl Cohomology {
    pub fn vanishes(&self) -> bool {
        self.h0 == 0 && self.h1 == 0 && self.h2 == 0
    }

    pub fn euler(&self) -> i64 {
        self.h0 - self.h1 + self.h2
    }
}

/// Rays `rho_0 = (1,0)`, `rho_1 = (0,1)`, `rho_{i+1} = b_i rho_i - rho_{i-1}`, checked to close
/// up into a smooth complete fan winding once around the origin.
pub fn rays_from_b(b: &[i64]) -> Result<Vec<Vec2>> {
    let n = b.len();
    if n < 3 {
        return Err(Error::NotSmoothComplete(format!("need at least 3 rays, got {n}")));
    }
    let mut rays = vec![Vec2::new(1, 0), Vec2::new(0, 1)];
    for i in 1..=n {
        let next = rays[i].scale(b[i % n]) - rays[i - 1];
        rays.push(next);
    }
    if rays[n] != rays[0] || rays[n + 1] != rays[1] {
        return Err(Error::NotSmoothComplete(format!("recurrence for {b:?} does not close up")));
    }
    rays.truncate(n);
    let wraps = (0..n)
        .filter(|&i| rays[i].angle_cmp(rays[(i + 1) % n]) != std::cmp::Ordering::Less)
        .count();
    if wraps != 1 {
        return Err(Error::NotSmoothComplete(format!("rays of {b:?} wind {wraps} times")));
    }
    let sum: i64 = b.iter().sum();
    if sum != 3 * n as i64 - 12 {
        return Err(Error::NotSmoothComplete(format!("sum {sum} != {}", 3 * n as i64 - 12)));
    }
    Ok(rays)
}

/// Lexicographically minimal rotation or reflection.
pub fn normal_form(b: &[i64]) -> Vec<i64> {
    dihedral_perms(b.len())
        .map(|p| p.iter().map(|&i| b[i]).collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// All rotations followed by all reflections, as maps `target index -> source index`.
pub fn dihedral_perms(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let rot = (0..n).map(move |s| (0..n).map(|j| (s + j) % n).collect::<Vec<_>>());
    let refl = (0..n).map(move |s| (0..n).map(|j| (s + n - j) % n).collect::<Vec<_>>());
    rot.chain(refl)
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "RawSurface", into = "RawSurface")]
pub struct ToricSurface {
    b: Vec<i64>,
    rays: Vec<Vec2>,
    gram: Vec<Vec<i64>>,
    canonical: DivisorClass,
}

/// JSON form `{"b": [...]}`.
#[derive(Serialize, Deserialize)]
struct RawSurface {
    b: Vec<i64>,
}

impl TryFrom<RawSurface> for ToricSurface {
    type Error = Error;
    fn try_from(r: RawSurface) -> Result<ToricSurface> {
        ToricSurface::from_b(&r.b)
    }
}

impl From<ToricSurface> for RawSurface {
    fn from(x: ToricSurface) -> RawSurface {
        RawSurface { b: x.b }
    }
}

impl PartialEq for ToricSurface {
    fn eq(&self, o: &ToricSurface) -> bool {
        self.b == o.b
    }
}
impl Eq for ToricSurface {}

impl std::hash::Hash for ToricSurface {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.b.hash(h)
    }
}

impl fmt::Debug for ToricSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TV{:?}", self.b)
    }
}

impl ToricSurface {
    pub fn from_b(b: &[i64]) -> Result<ToricSurface> {
        let rays = rays_from_b(b)?;
        let n = b.len();
        let t = |i: usize, j: usize| -> i64 {
            if i == j {
                -b[i]
            } else if (i + 1) % n == j || (j + 1) % n == i {
                1
            } else {
                0
            }
        };
        let gram = (2..n).map(|i| (2..n).map(|j| t(i, j)).collect()).collect();
        let mut s = ToricSurface { b: b.to_vec(), rays, gram, canonical: DivisorClass(vec![]) };
        s.canonical = s.class_of(&vec![-1; n]);
        Ok(s)
    }

    pub fn hirzebruch(r: i64) -> ToricSurface {
        ToricSurface::from_b(&[r, 0, -r, 0]).expect("Hirzebruch b-sequence")
    }

    pub fn b(&self) -> &[i64] {
        &self.b
    }

    pub fn rays(&self) -> &[Vec2] {
        &self.rays
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn rank(&self) -> usize {
        self.b.len() - 2
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn normal_form(&self) -> Vec<i64> {
        normal_form(&self.b)
    }

    pub fn is_isomorphic(&self, other: &ToricSurface) -> bool {
        self.n() == other.n() && self.normal_form() == other.normal_form()
    }

    /// `Some(r)` when the surface is the Hirzebruch surface F_r.
    pub fn hirzebruch_index(&self) -> Option<i64> {
        (self.n() == 4).then(|| self.b.iter().map(|x| x.abs()).max().unwrap_or(0))
    }

    pub fn zero_class(&self) -> DivisorClass {
        DivisorClass::zero(self.rank())
    }

    /// Class of the torus-invariant divisor with coefficients `a` on the rays.
    pub fn class_of(&self, a: &[i64]) -> DivisorClass {
        assert_eq!(a.len(), self.n(), "coefficient vector has wrong length");
        DivisorClass(
            (2..self.n())
                .map(|i| a[i] - a[0] * self.rays[i].x - a[1] * self.rays[i].y)
                .collect(),
        )
    }

    /// Class of `D_i`.
    pub fn ray_class(&self, i: usize) -> DivisorClass {
        let mut a = vec![0; self.n()];
        a[i] = 1;
        self.class_of(&a)
    }

    /// A torus-invariant representative with zero coefficients on `D_0` and `D_1`.
    pub fn representative(&self, c: &DivisorClass) -> Vec<i64> {
        self.check(c);
        let mut a = vec![0, 0];
        a.extend_from_slice(&c.0);
        a
    }

    /// Coefficients of the principal divisor of the character `m`.
    pub fn principal(&self, m: Vec2) -> Vec<i64> {
        self.rays.iter().map(|r| r.dot(m)).collect()
    }

    fn check(&self, c: &DivisorClass) {
        assert_eq!(c.0.len(), self.rank(), "class does not live on {self:?}");
    }

    pub fn intersect(&self, c: &DivisorClass, d: &DivisorClass) -> i64 {
        self.check(c);
        self.check(d);
        let mut s = 0;
        for (i, ci) in c.0.iter().enumerate() {
            if *ci != 0 {
                s += ci * self.gram[i].iter().zip(&d.0).map(|(g, dj)| g * dj).sum::<i64>();
            }
        }
        s
    }

    pub fn canonical_class(&self) -> &DivisorClass {
        &self.canonical
    }

    pub fn euler_char(&self, d: &DivisorClass) -> i64 {
        let twice = self.intersect(d, d) - self.intersect(&self.canonical, d);
        assert!(twice % 2 == 0, "D^2 - K.D must be even");
        1 + twice / 2
    }

    /// Number of lattice points of `{m : <rho_i, m> >= -a_i}` for the representative of `d`.
    pub fn h0(&self, d: &DivisorClass) -> i64 {
        count_sections(&self.rays, &self.representative(d))
    }

    pub fn cohomology(&self, d: &DivisorClass) -> Cohomology {
        let h0 = self.h0(d);
        let h2 = self.h0(&(&self.canonical - d));
        let h1 = h0 + h2 - self.euler_char(d);
        assert!(h1 >= 0, "negative h1 for {d:?} on {self:?}");
        Cohomology { h0, h1, h2 }
    }

    pub fn is_effective(&self, d: &DivisorClass) -> bool {
        self.h0(d) > 0
    }

    pub fn minus_one_rays(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.b[i] == 1).collect()
    }

    /// Blows up the torus fixed point between rays `j` and `j + 1`; the new ray gets index `j + 1`.
    pub fn blowup_at(&self, j: usize) -> Blowup {
        let n = self.n();
        assert!(j < n, "position out of range");
        let mut fine = Vec::with_capacity(n + 1);
        for k in 0..n {
            let bump = (k == j || k == (j + 1) % n) as i64;
            fine.push(self.b[k] + bump);
            if k == j {
                fine.push(1);
            }
        }
        let fine = ToricSurface::from_b(&fine).expect("blowup of a smooth surface is smooth");
        let index_map = (0..n).map(|k| if k <= j { k } else { k + 1 }).collect();
        Blowup { fine, coarse: self.clone(), exceptional: j + 1, index_map }
    }

    /// Contracts the invariant curve `D_i`, which must have self-intersection -1.
    pub fn blowdown_at(&self, i: usize) -> Result<Blowup> {
        let n = self.n();
        if i >= n {
            return invalid(format!("ray index {i} out of range"));
        }
        if self.b[i] != 1 {
            return Err(Error::NotMinusOne(format!("D_{i} on {self:?} has b = {}", self.b[i])));
        }
        if n < 4 {
            return Err(Error::Precondition("cannot blow down a surface with three rays".into()));
        }
        let index_map: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let coarse_b: Vec<i64> = index_map
            .iter()
            .map(|&k| self.b[k] - ((k + 1) % n == i || (i + 1) % n == k) as i64)
            .collect();
        let coarse = ToricSurface::from_b(&coarse_b)?;
        Ok(Blowup { fine: self.clone(), coarse, exceptional: i, index_map })
    }

    /// Transfers a class along a relabeling `target index -> source index` of b-sequences.
    pub fn transfer_to(&self, target: &ToricSurface, perm: &[usize], c: &DivisorClass) -> DivisorClass {
        assert_eq!(perm.len(), self.n());
        let a = self.representative(c);
        let moved: Vec<i64> = perm.iter().map(|&src| a[src]).collect();
        target.class_of(&moved)
    }

    /// First rotation or reflection matching the b-sequence of `target`, identity preferred.
    pub fn relabeling_to(&self, target: &ToricSurface) -> Option<Vec<usize>> {
        if self.n() != target.n() {
            return None;
        }
        dihedral_perms(self.n()).find(|p| p.iter().enumerate().all(|(j, &s)| target.b[j] == self.b[s]))
    }
}

/// Lattice points of `{m : <rho_i, m> >= -a_i}`.
pub fn count_sections(rays: &[Vec2], a: &[i64]) -> i64 {
    let n = rays.len();
    let feasible = |x: i64, y: i64, d: i64| rays.iter().zip(a).all(|(r, &ai)| r.x * x + r.y * y >= -ai * d);
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for i in 0..n {
        for j in i + 1..n {
            let (ri, rj) = (rays[i], rays[j]);
            let mut d = ri.det(rj);
            if d == 0 {
                continue;
            }
            let mut x = -a[i] * rj.y + a[j] * ri.y;
            let mut y = -a[j] * ri.x + a[i] * rj.x;
            if d < 0 {
                d = -d;
                x = -x;
                y = -y;
            }
            if feasible(x, y, d) {
                lo_x = lo_x.min(x.div_euclid(d));
                hi_x = hi_x.max(-(-x).div_euclid(d));
                lo_y = lo_y.min(y.div_euclid(d));
                hi_y = hi_y.max(-(-y).div_euclid(d));
            }
        }
    }
    if lo_x > hi_x {
        return 0;
    }
    let mut count = 0;
    for x in lo_x..=hi_x {
        for y in lo_y..=hi_y {
            if feasible(x, y, 1) {
                count += 1;
            }
        }
    }
    count
}

/// A blowup `fine -> coarse` of one torus fixed point.
#[derive(Clone, Debug)]
pub struct Blowup {
    pub fine: ToricSurface,
    pub coarse: ToricSurface,
    /// Index of the exceptional ray in `fine`.
    pub exceptional: usize,
    /// Coarse ray index to fine ray index.
    pub index_map: Vec<usize>,
}

impl Blowup {
    pub fn exceptional_class(&self) -> DivisorClass {
        self.fine.ray_class(self.exceptional)
    }

    pub fn pullback(&self, c: &DivisorClass) -> DivisorClass {
        let a = self.coarse.representative(c);
        let n = self.fine.n();
        let mut fa = vec![0; n];
        for (k, &fk) in self.index_map.iter().enumerate() {
            fa[fk] = a[k];
        }
        let e = self.exceptional;
        fa[e] = fa[(e + n - 1) % n] + fa[(e + 1) % n];
        self.fine.class_of(&fa)
    }

    /// The class `C'` with `pullback(C') = C + (C.E) E`.
    pub fn pushforward(&self, c: &DivisorClass) -> DivisorClass {
        let fa = self.fine.representative(c);
        let a: Vec<i64> = self.index_map.iter().map(|&fk| fa[fk]).collect();
        self.coarse.class_of(&a)
    }
}

/// All normal forms of smooth complete surfaces with `rank + 2` rays and entries bounded by `bound`.
pub fn enumerate_surfaces(rank: usize, bound: i64) -> Vec<ToricSurface> {
    assert!(rank >= 2, "enumeration starts at Hirzebruch surfaces");
    let slack = |k: usize| (rank - k) as i64;
    let mut level: std::collections::BTreeSet<Vec<i64>> =
        (0..=bound + slack(2)).map(|r| normal_form(&[r, 0, -r, 0])).collect();
    for k in 3..=rank {
        let mut next = std::collections::BTreeSet::new();
        for b in &level {
            let x = ToricSurface::from_b(b).expect("enumerated sequence is smooth");
            for j in 0..x.n() {
                let up = x.blowup_at(j).fine;
                if up.b.iter().all(|&v| v <= bound && v >= -bound - slack(k)) {
                    next.insert(up.normal_form());
                }
            }
        }
        level = next;
    }
    level
        .into_iter()
        .filter(|b| b.iter().all(|v| v.abs() <= bound))
        .map(|b| ToricSurface::from_b(&b).expect("normal form is smooth"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_surfaces() {
        let f2 = ToricSurface::from_b(&[2, 0, -2, 0]).unwrap();
        assert_eq!(f2.rank(), 2);
        let dp7 = ToricSurface::from_b(&[1, 1, 1, 0, 0]).unwrap();
        assert_eq!(dp7.rank(), 3);
        assert!(matches!(ToricSurface::from_b(&[1, 1, 1, 1]), Err(Error::NotSmoothComplete(_))));
        assert!(ToricSurface::from_b(&[1, 1]).is_err());
    }

    #[test]
    fn winding_twice_rejected() {
        // closes up but winds twice around the origin
        assert!(ToricSurface::from_b(&[1, 1, 1, 1, 1, 1, 1, 1, 1]).is_err());
    }

    #[test]
    fn hirzebruch_intersections() {
        for r in 0..5 {
            let f = ToricSurface::hirzebruch(r);
            let p = f.ray_class(1);
            let q = f.ray_class(2);
            assert_eq!(f.intersect(&p, &q), 1);
            assert_eq!(f.intersect(&q, &q), r);
            assert_eq!(f.intersect(&p, &p), 0);
            assert_eq!(f.ray_class(3), p);
            // -K = (2 - r) P + 2 Q
            let minus_k = &p.scaled(2 - r) + &q.scaled(2);
            assert_eq!(-f.canonical_class(), minus_k);
        }
    }

    #[test]
    fn p2_canonical() {
        let p2 = ToricSurface::from_b(&[-1, -1, -1]).unwrap();
        let h = p2.ray_class(0);
        assert_eq!(p2.ray_class(1), h);
        assert_eq!(-p2.canonical_class(), h.scaled(3));
        assert_eq!(p2.intersect(&h, &h), 1);
    }

    #[test]
    fn euler_examples() {
        let f = ToricSurface::hirzebruch(3);
        assert_eq!(f.euler_char(&f.zero_class()), 1);
        let p = f.ray_class(1);
        let q = f.ray_class(2);
        for i in -3..4 {
            assert_eq!(f.euler_char(&(&p.scaled(i) + &q)), 2 * i + 3 + 2);
        }
    }

    #[test]
    fn h0_examples() {
        let f1 = ToricSurface::hirzebruch(1);
        let p = f1.ray_class(1);
        let q = f1.ray_class(2);
        assert_eq!(f1.h0(&f1.zero_class()), 1);
        assert_eq!(f1.h0(&(&p + &q)), 5);
        for r in 0..4 {
            let f = ToricSurface::hirzebruch(r);
            let minus_p = -f.ray_class(1);
            assert_eq!(f.h0(&minus_p), 0);
            assert_eq!(f.cohomology(&minus_p), Cohomology { h0: 0, h1: 0, h2: 0 });
            assert!(!f.is_effective(&minus_p));
        }
    }

    #[test]
    fn f0_minus_two_minus_two() {
        let f0 = ToricSurface::hirzebruch(0);
        let d = (&f0.ray_class(1) + &f0.ray_class(2)).scaled(-2);
        // K = -2P - 2Q, so K - D = 0 and chi(K) = 1
        assert_eq!(f0.cohomology(&d), Cohomology { h0: 0, h1: 0, h2: 1 });
    }

    #[test]
    fn minus_one_examples() {
        let dp6 = ToricSurface::from_b(&[1; 6]).unwrap();
        assert_eq!(dp6.minus_one_rays(), vec![0, 1, 2, 3, 4, 5]);
        assert!(ToricSurface::hirzebruch(2).minus_one_rays().is_empty());
        assert_eq!(ToricSurface::hirzebruch(1).minus_one_rays(), vec![0]);
        assert!(ToricSurface::from_b(&[-1, -1, -1]).unwrap().minus_one_rays().is_empty());
    }

    #[test]
    fn normal_forms() {
        assert_eq!(normal_form(&[0, 1, 1, 1, 0]), vec![0, 0, 1, 1, 1]);
        assert_eq!(normal_form(&[2, 1, 1, -1, 0]), normal_form(&[-1, 0, 2, 1, 1]));
        assert_eq!(normal_form(&[3, 0, -3, 0]), normal_form(&[-3, 0, 3, 0]));
    }

    #[test]
    fn blowdown_dp7() {
        let dp7 = ToricSurface::from_b(&[1, 1, 1, 0, 0]).unwrap();
        let bd = dp7.blowdown_at(0).unwrap();
        assert_eq!(bd.coarse.b(), &[0, 1, 0, -1]);
        assert_eq!(bd.coarse.normal_form(), ToricSurface::hirzebruch(1).normal_form());
        let e = bd.exceptional_class();
        assert_eq!(dp7.intersect(&e, &e), -1);
        assert!(bd.pushforward(&e).is_zero());
        assert!(bd.pullback(&bd.coarse.zero_class()).is_zero());
        assert!(matches!(dp7.blowdown_at(3), Err(Error::NotMinusOne(_))));
    }

    #[test]
    fn blowup_then_blowdown() {
        let x = ToricSurface::from_b(&[2, 1, 1, -1, 0]).unwrap();
        for j in 0..x.n() {
            let up = x.blowup_at(j);
            let down = up.fine.blowdown_at(up.exceptional).unwrap();
            assert_eq!(down.coarse.b(), x.b());
            assert_eq!(down.index_map, up.index_map);
            for k in 0..x.n() {
                let c = x.ray_class(k);
                assert_eq!(up.pushforward(&up.pullback(&c)), c);
                assert_eq!(up.fine.intersect(&up.pullback(&c), &up.exceptional_class()), 0);
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let r2 = enumerate_surfaces(2, 3);
        assert_eq!(r2.len(), 4);
        let r3: Vec<Vec<i64>> = enumerate_surfaces(3, 2).iter().map(|s| s.b().to_vec()).collect();
        let expected: std::collections::BTreeSet<Vec<i64>> =
            (0..=2).map(|r| normal_form(&[r, 1, 1, 1 - r, 0])).collect();
        assert_eq!(r3, expected.into_iter().collect::<Vec<_>>());
        let r4 = enumerate_surfaces(4, 1);
        assert!(r4.iter().any(|s| s.b() == [1, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn relabeling_transfers_classes() {
        let x = ToricSurface::from_b(&[2, 1, 1, -1, 0]).unwrap();
        let y = ToricSurface::from_b(&[-1, 0, 2, 1, 1]).unwrap();
        let perm = x.relabeling_to(&y).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let (ci, cj) = (x.ray_class(i), x.ray_class(j));
                let (di, dj) = (x.transfer_to(&y, &perm, &ci), x.transfer_to(&y, &perm, &cj));
                assert_eq!(x.intersect(&ci, &cj), y.intersect(&di, &dj));
            }
        }
        assert_eq!(&x.transfer_to(&y, &perm, x.canonical_class()), y.canonical_class());
    }
}
