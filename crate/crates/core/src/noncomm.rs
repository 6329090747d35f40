//! Dimensions of endomorphism algebras of strongly exceptional toric systems, and the quiver
//! family over the Hirzebruch degenerations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::ToricSurface;
use crate::system::{hirzebruch_pq, hirzebruch_system, HirzebruchVariant, ToricSystem};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EndoEntry {
    pub j: usize,
    pub k: usize,
    pub dim: i64,
}

/// `h0(A_j + ... + A_k)` for `j <= k < n - 1`.
pub fn endo_dims(a: &ToricSystem) -> Result<Vec<EndoEntry>> {
    if !a.is_strongly_exceptional() {
        return Err(Error::Precondition("endomorphism dimensions need a strongly exceptional system".into()));
    }
    Ok(a.interval_sums()
        .into_iter()
        .map(|((j, k), s)| EndoEntry { j, k, dim: a.surface().h0(&s) })
        .collect())
}

/// Total dimension, counting the identities at the vertices.
pub fn endo_total(a: &ToricSystem, dims: &[EndoEntry]) -> i64 {
    dims.iter().map(|e| e.dim).sum::<i64>() + a.n() as i64
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct IndexRange {
    pub first: i64,
    pub last: i64,
}

impl IndexRange {
    pub fn len(&self) -> i64 {
        (self.last - self.first + 1).max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FamilyDims {
    pub r: i64,
    pub i: i64,
    pub alpha: i64,
    pub b: IndexRange,
    pub c: IndexRange,
    pub d: IndexRange,
    pub total: i64,
    pub h0_general: i64,
    pub h0_special: i64,
}

fn family_check(r: i64, i: i64, alpha: i64) -> Result<()> {
    if r < 0 || alpha <= 0 || alpha >= i {
        return Err(Error::Precondition(format!("need r >= 0 and 0 < alpha < i, got r = {r}, i = {i}, alpha = {alpha}")));
    }
    Ok(())
}

pub fn family_dims(r: i64, i: i64, alpha: i64) -> Result<FamilyDims> {
    family_check(r, i, alpha)?;
    let b = IndexRange { first: -i, last: 0 };
    let c = IndexRange { first: -i + alpha, last: 0 };
    let d = IndexRange { first: 1, last: r + alpha };
    let total = b.len() + c.len() + d.len();
    let h0 = |s: i64, a: i64| {
        let (p, q) = hirzebruch_pq(s);
        ToricSurface::hirzebruch(s).h0(&(&p.scaled(a) + &q))
    };
    let out = FamilyDims {
        r,
        i,
        alpha,
        b,
        c,
        d,
        total,
        h0_general: h0(r, i),
        h0_special: h0(r + 2 * alpha, i - alpha),
    };
    if out.total != 2 * i + r + 2 || out.h0_general != total || out.h0_special != total {
        return Err(Error::Internal(format!("section counts disagree: {out:?}")));
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Arrow {
    pub name: String,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Quiver {
    pub r: i64,
    pub i: i64,
    pub alpha: i64,
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub relations: Vec<String>,
}

impl Quiver {
    /// Number of arrows from vertex `j` to vertex `j + 1`.
    pub fn arrow_count(&self, j: usize) -> usize {
        self.arrows.iter().filter(|a| a.from == j && a.to == j + 1).count()
    }

    pub fn to_dot(&self) -> String {
        let mut s = format!("digraph quiver_r{}_i{}_alpha{} {{\n", self.r, self.i, self.alpha);
        for v in &self.vertices {
            s.push_str(&format!("  {v};\n"));
        }
        for a in &self.arrows {
            s.push_str(&format!(
                "  {} -> {} [label=\"{}\"];\n",
                self.vertices[a.from], self.vertices[a.to], a.name
            ));
        }
        for rel in &self.relations {
            s.push_str(&format!("  // {rel}\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Arrows `E0 -> E1` and `E2 -> E3` come from the two sections of `O(P)`; the middle arrows
/// from the `b`, `c`, `d` sections of `O(iP + Q)`.
pub fn emit_quiver(r: i64, i: i64, alpha: i64) -> Result<Quiver> {
    let f = family_dims(r, i, alpha)?;
    let mut arrows = Vec::new();
    for (prefix, from) in [("aL", 0), ("aR", 2)] {
        for k in 1..=2 {
            arrows.push(Arrow { name: format!("{prefix}{k}"), from, to: from + 1 });
        }
    }
    for (prefix, range) in [("b", f.b), ("c", f.c), ("d", f.d)] {
        for j in range.first..=range.last {
            arrows.push(Arrow { name: format!("{prefix}_{j}"), from: 1, to: 2 });
        }
    }
    let relations = vec![
        format!("t != 0: c_j = (d_j - b_j)/t for j in {}..{}", f.c.first, f.c.last),
        format!("t = 0: b_j = d_j for j in {}..{}", f.c.first, f.c.last),
    ];
    Ok(Quiver { r, i, alpha, vertices: (0..4).map(|k| format!("E{k}")).collect(), arrows, relations })
}

/// General and special toric systems of the family, for comparing endomorphism dimensions.
pub fn family_systems(r: i64, i: i64, alpha: i64) -> Result<(ToricSystem, ToricSystem)> {
    family_check(r, i, alpha)?;
    Ok((
        hirzebruch_system(r, i, HirzebruchVariant::Plain)?,
        hirzebruch_system(r + 2 * alpha, i - alpha, HirzebruchVariant::Plain)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_endo() {
        let a = hirzebruch_system(1, 1, HirzebruchVariant::Plain).unwrap();
        let d = endo_dims(&a).unwrap();
        let dims: Vec<i64> = d.iter().map(|e| e.dim).collect();
        assert_eq!(dims, vec![2, 7, 9, 5, 7, 2]);
        assert_eq!(endo_total(&a, &d), 36);
    }

    #[test]
    fn family_examples() {
        assert_eq!(family_dims(1, 2, 1).unwrap().total, 7);
        assert_eq!(family_dims(0, 2, 1).unwrap().total, 6);
        assert!(family_dims(0, 2, 2).is_err());
        let q = emit_quiver(1, 2, 1).unwrap();
        assert_eq!(q.arrow_count(0), 2);
        assert_eq!(q.arrow_count(1), 7);
        assert!(q.to_dot().contains("E1 -> E2 [label=\"c_-1\"]"));
    }
}
