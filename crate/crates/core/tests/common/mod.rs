//! Oracles shared by the integration tests. Nothing here calls the library's cohomology code.
#![allow(dead_code)]

use exsys::surface::{dihedral_perms, enumerate_surfaces};
use exsys::DivisorClass;

/// Rays from a b-sequence, recomputed here rather than taken from the surface.
pub fn rays(b: &[i64]) -> Vec<(i64, i64)> {
    let mut r = vec![(1, 0), (0, 1)];
    for i in 1..b.len() - 1 {
        let (p, q) = (r[i], r[i - 1]);
        r.push((b[i] * p.0 - q.0, b[i] * p.1 - q.1));
    }
    r
}

/// Torus-invariant divisor for a class: zero on `D_0`, `D_1`, the class coordinates on the rest.
pub fn divisor(c: &DivisorClass) -> Vec<i64> {
    let mut a = vec![0, 0];
    a.extend_from_slice(&c.0);
    a
}

/// `(h0, h1, h2)` summed over characters `m`: the contribution of `m` is the reduced cohomology
/// of the set of rays with `<rho_i, m> < -a_i`, as a subcomplex of the fan's cycle of rays.
///
/// Only characters where two non-parallel rays satisfy `|<rho, m>| <= |a|` can contribute, which
/// gives the bounding box.
pub fn cech(b: &[i64], a: &[i64]) -> (i64, i64, i64) {
    let r = rays(b);
    let n = r.len();
    let norm = |v: (i64, i64)| v.0.abs().max(v.1.abs());
    let mut bound = 0;
    for i in 0..n {
        for j in 0..n {
            bound = bound.max(a[i].abs() * norm(r[j]) + a[j].abs() * norm(r[i]));
        }
    }
    let mut h = (0, 0, 0);
    for x in -bound..=bound {
        for y in -bound..=bound {
            let neg: Vec<bool> = (0..n).map(|i| r[i].0 * x + r[i].1 * y < -a[i]).collect();
            let count = neg.iter().filter(|&&v| v).count();
            if count == 0 {
                h.0 += 1;
            } else if count == n {
                h.2 += 1;
            } else {
                let components = (0..n).filter(|&i| neg[i] && !neg[(i + n - 1) % n]).count() as i64;
                h.1 += components - 1;
            }
        }
    }
    h
}

pub fn box_classes(rank: usize, bound: i64) -> Vec<DivisorClass> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (-bound..=bound).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(DivisorClass).collect()
}

/// Every labeling with `b_0 < 0` of every surface of rank `2..=max_rank` with `|b_i| <= bound`.
pub fn negative_start_sequences(max_rank: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut seqs = std::collections::BTreeSet::new();
    for rank in 2..=max_rank {
        for x in enumerate_surfaces(rank, bound) {
            for p in dihedral_perms(x.n()) {
                let b: Vec<i64> = p.iter().map(|&s| x.b()[s]).collect();
                if b[0] < 0 && b.iter().all(|v| v.abs() <= bound) {
                    seqs.insert(b);
                }
            }
        }
    }
    seqs.into_iter().collect()
}

pub fn is_rotation(a: &[i64], b: &[i64]) -> bool {
    let n = a.len();
    n == b.len() && (0..n).any(|s| (0..n).all(|j| a[j] == b[(j + s) % n]))
}
