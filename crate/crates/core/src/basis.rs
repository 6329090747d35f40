//! Bases `(H, R_1, ..., R_{rho-1})` diagonalizing the intersection form, and isometries of Pic.

use crate::error::{Error, Result};
use crate::matrix::{self, IMatrix};
use crate::surface::{Blowup, DivisorClass, ToricSurface};

#[derive(Clone, Debug)]
pub struct SpecialBasis {
    surface: ToricSurface,
    classes: Vec<DivisorClass>,
}

fn blowdown_chain(x: &ToricSurface) -> Option<Vec<Blowup>> {
    if x.rank() == 2 {
        return (x.hirzebruch_index()? % 2 == 1).then(Vec::new);
    }
    for e in x.minus_one_rays() {
        let bd = x.blowdown_at(e).ok()?;
        if let Some(mut rest) = blowdown_chain(&bd.coarse) {
            rest.insert(0, bd);
            return Some(rest);
        }
    }
    None
}

impl SpecialBasis {
    /// Built along the first blowdown chain to an odd Hirzebruch surface, exceptional classes
    /// appended in blowup order.
    pub fn new(x: &ToricSurface) -> Result<SpecialBasis> {
        if x.rank() == 1 {
            return SpecialBasis::from_classes(x, vec![x.ray_class(0)]);
        }
        let chain = blowdown_chain(x).ok_or_else(|| {
            Error::Precondition(format!("{x:?} has no blowdown to an odd Hirzebruch surface"))
        })?;
        let base = chain.last().map_or(x, |b| &b.coarse);
        let r = base.hirzebruch_index().expect("chain ends at a Hirzebruch surface");
        let a = (r - 1) / 2;
        let qi = base.b().iter().position(|&v| v == -r).expect("ray with D^2 = r");
        let pi = base.b().iter().position(|&v| v == 0).expect("fiber ray");
        let (p, q) = (base.ray_class(pi), base.ray_class(qi));
        let mut classes = vec![&q - &p.scaled(a), &q - &p.scaled(a + 1)];
        for bu in chain.iter().rev() {
            classes = classes.iter().map(|c| bu.pullback(c)).collect();
            classes.push(bu.exceptional_class());
        }
        SpecialBasis::from_classes(x, classes)
    }

    pub fn from_classes(x: &ToricSurface, classes: Vec<DivisorClass>) -> Result<SpecialBasis> {
        if classes.len() != x.rank() {
            return Err(Error::InvalidInput(format!("need {} classes, got {}", x.rank(), classes.len())));
        }
        for (i, c) in classes.iter().enumerate() {
            for (j, d) in classes.iter().enumerate() {
                let want = if i != j { 0 } else if i == 0 { 1 } else { -1 };
                if x.intersect(c, d) != want {
                    return Err(Error::InvalidInput(format!("basis product ({i},{j}) is not {want}")));
                }
            }
        }
        let k = classes[1..].iter().fold(classes[0].scaled(-3), |s, r| &s + r);
        if &k != x.canonical_class() {
            return Err(Error::InvalidInput("K is not -3H + sum R_i in this basis".into()));
        }
        Ok(SpecialBasis { surface: x.clone(), classes })
    }

    pub fn surface(&self) -> &ToricSurface {
        &self.surface
    }

    pub fn classes(&self) -> &[DivisorClass] {
        &self.classes
    }

    pub fn h(&self) -> &DivisorClass {
        &self.classes[0]
    }

    /// `R_k` for `k >= 1`.
    pub fn r(&self, k: usize) -> &DivisorClass {
        &self.classes[k]
    }

    /// Coefficients of `c` in the basis.
    pub fn coords(&self, c: &DivisorClass) -> Vec<i64> {
        let x = &self.surface;
        let mut s = vec![x.intersect(c, &self.classes[0])];
        s.extend(self.classes[1..].iter().map(|r| -x.intersect(c, r)));
        s
    }

    pub fn class(&self, s: &[i64]) -> DivisorClass {
        assert_eq!(s.len(), self.classes.len());
        s.iter()
            .zip(&self.classes)
            .fold(self.surface.zero_class(), |acc, (k, c)| &acc + &c.scaled(*k))
    }

    /// New basis whose `j`-th element has old coordinates given by column `j` of `m`.
    pub fn transformed(&self, m: &IMatrix) -> Result<SpecialBasis> {
        let cols = matrix::transpose(m);
        SpecialBasis::from_classes(&self.surface, cols.iter().map(|c| self.class(c)).collect())
    }

    /// Image of a class under an isometry given in basis coordinates.
    pub fn act(&self, m: &IMatrix, c: &DivisorClass) -> DivisorClass {
        self.class(&matrix::apply(m, &self.coords(c)))
    }
}

fn pairing(v: &[i64], w: &[i64]) -> i64 {
    v[0] * w[0] - v[1..].iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<i64>()
}

fn canonical_coords(rank: usize) -> Vec<i64> {
    let mut k = vec![1; rank];
    k[0] = -3;
    k
}

fn box_vectors(rank: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Integer matrices with entries in `[-bound, bound]` preserving the form and `K`, in basis
/// coordinates; the set is checked to be closed under composition.
pub fn pic_isometries(basis: &SpecialBasis, bound: i64) -> Result<Vec<IMatrix>> {
    isometries_of_rank(basis.classes.len(), bound)
}

pub fn isometries_of_rank(rank: usize, bound: i64) -> Result<Vec<IMatrix>> {
    let k = canonical_coords(rank);
    let cand = box_vectors(rank, bound);
    let h_images: Vec<&Vec<i64>> =
        cand.iter().filter(|v| pairing(v, v) == 1 && pairing(v, &k) == -3).collect();
    let r_images: Vec<&Vec<i64>> =
        cand.iter().filter(|v| pairing(v, v) == -1 && pairing(v, &k) == -1).collect();
    let mut out = Vec::new();
    for h in &h_images {
        let mut cols = vec![(*h).clone()];
        extend_columns(rank, &r_images, &mut cols, &mut out);
    }
    let out: Vec<IMatrix> = out
        .into_iter()
        .filter(|m| matrix::apply(m, &k) == k && matrix::inverse(m).is_some())
        .collect();
    let set: std::collections::HashSet<&IMatrix> = out.iter().collect();
    for a in &out {
        for b in &out {
            if !set.contains(&matrix::mul(a, b)) {
                return Err(Error::BoundTooSmall(format!(
                    "isometries with entries <= {bound} are not closed under composition; raise the bound"
                )));
            }
        }
    }
    let mut out = out;
    out.sort();
    Ok(out)
}

fn extend_columns(rank: usize, r_images: &[&Vec<i64>], cols: &mut Vec<Vec<i64>>, out: &mut Vec<IMatrix>) {
    if cols.len() == rank {
        out.push(matrix::from_columns(cols));
        return;
    }
    for w in r_images {
        if cols.iter().all(|c| pairing(c, w) == 0) {
            cols.push((*w).clone());
            extend_columns(rank, r_images, cols, out);
            cols.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::enumerate_surfaces;

    #[test]
    fn f1_basis() {
        let f1 = ToricSurface::hirzebruch(1);
        let b = SpecialBasis::new(&f1).unwrap();
        let (p, q) = (f1.ray_class(1), f1.ray_class(2));
        assert_eq!(b.classes(), &[q.clone(), &q - &p]);
    }

    #[test]
    fn even_hirzebruch_rejected() {
        assert!(SpecialBasis::new(&ToricSurface::hirzebruch(2)).is_err());
        assert!(SpecialBasis::new(&ToricSurface::hirzebruch(0)).is_err());
        assert!(SpecialBasis::new(&ToricSurface::hirzebruch(3)).is_ok());
    }

    #[test]
    fn bases_on_small_surfaces() {
        for rank in 3..=4 {
            for x in enumerate_surfaces(rank, 3) {
                let b = SpecialBasis::new(&x).unwrap();
                for i in 0..x.n() {
                    let c = x.ray_class(i);
                    assert_eq!(b.class(&b.coords(&c)), c);
                }
            }
        }
        let p2 = ToricSurface::from_b(&[-1, -1, -1]).unwrap();
        assert!(SpecialBasis::new(&p2).is_ok());
    }

    #[test]
    fn isometry_counts() {
        let dp7 = SpecialBasis::new(&ToricSurface::from_b(&[1, 1, 1, 0, 0]).unwrap()).unwrap();
        let dp6 = SpecialBasis::new(&ToricSurface::from_b(&[1; 6]).unwrap()).unwrap();
        let p2 = SpecialBasis::new(&ToricSurface::from_b(&[-1, -1, -1]).unwrap()).unwrap();
        assert_eq!(pic_isometries(&dp7, 2).unwrap().len(), 2);
        assert_eq!(pic_isometries(&dp6, 2).unwrap().len(), 12);
        assert_eq!(pic_isometries(&p2, 2).unwrap(), vec![matrix::identity(1)]);
        assert!(pic_isometries(&dp6, 2).unwrap().contains(&matrix::identity(4)));
        for m in pic_isometries(&dp6, 2).unwrap() {
            assert!(dp6.transformed(&m).is_ok());
        }
    }
}
