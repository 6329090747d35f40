//! Small dense integer matrices.

use crate::lattice::Rat;

pub type IMatrix = Vec<Vec<i64>>;

pub fn identity(n: usize) -> IMatrix {
    (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
}

pub fn mul(a: &IMatrix, b: &IMatrix) -> IMatrix {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..m).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

pub fn apply(a: &IMatrix, v: &[i64]) -> Vec<i64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn transpose(a: &IMatrix) -> IMatrix {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(cols: &[Vec<i64>]) -> IMatrix {
    transpose(&cols.to_vec())
}

/// Inverse over the integers, if it exists.
pub fn inverse(a: &IMatrix) -> Option<IMatrix> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Rat> = row.iter().map(|&x| Rat::int(x)).collect();
            r.extend((0..n).map(|j| Rat::int((i == j) as i64)));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col];
        for x in m[col].iter_mut() {
            *x = *x / p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row) {
                    *x = *x - f * y;
                }
            }
        }
    }
    m.into_iter()
        .map(|row| row[n..].iter().map(|x| x.is_integer().then(|| x.num())).collect())
        .collect()
}
