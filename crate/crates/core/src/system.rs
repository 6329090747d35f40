//! Toric systems, augmentation and constructibility.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::surface::{dihedral_perms, normal_form, Blowup, DivisorClass, ToricSurface};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub struct ToricSystem {
    surface: ToricSurface,
    entries: Vec<DivisorClass>,
}

/// JSON form `{"surface": {"b": [...]}, "entries": [[...], ...]}`, validated on input.
#[derive(Serialize, Deserialize)]
struct RawSystem {
    surface: ToricSurface,
    entries: Vec<DivisorClass>,
}

impl TryFrom<RawSystem> for ToricSystem {
    type Error = Error;
    fn try_from(r: RawSystem) -> Result<ToricSystem> {
        ToricSystem::validate(&r.surface, r.entries)
    }
}

impl From<ToricSystem> for RawSystem {
    fn from(a: ToricSystem) -> RawSystem {
        RawSystem { surface: a.surface, entries: a.entries }
    }
}

impl std::hash::Hash for ToricSystem {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.surface.hash(h);
        self.entries.hash(h);
    }
}

impl ToricSystem {
    pub fn validate(surface: &ToricSurface, entries: Vec<DivisorClass>) -> Result<ToricSystem> {
        let n = surface.n();
        if entries.len() != n {
            return Err(Error::NotToricSystem(format!("expected {n} entries, got {}", entries.len())));
        }
        if let Some(e) = entries.iter().find(|e| e.0.len() != surface.rank()) {
            return invalid(format!("class {e:?} has wrong rank for {surface:?}"));
        }
        for i in 0..n {
            for j in i + 1..n {
                let want = if j == i + 1 || (i == 0 && j == n - 1) { 1 } else { 0 };
                let got = surface.intersect(&entries[i], &entries[j]);
                if got != want {
                    return Err(Error::NotToricSystem(format!(
                        "A_{i}.A_{j} = {got}, expected {want}"
                    )));
                }
            }
        }
        let sum = entries.iter().fold(surface.zero_class(), |s, e| &s + e);
        if sum != -surface.canonical_class() {
            return Err(Error::NotToricSystem(format!("entries sum to {sum:?}, not -K")));
        }
        Ok(ToricSystem { surface: surface.clone(), entries })
    }

    /// `(D_0, ..., D_{n-1})`.
    pub fn canonical(surface: &ToricSurface) -> ToricSystem {
        let entries = (0..surface.n()).map(|i| surface.ray_class(i)).collect();
        ToricSystem::validate(surface, entries).expect("invariant divisors form a toric system")
    }

    pub fn surface(&self) -> &ToricSurface {
        &self.surface
    }

    pub fn entries(&self) -> &[DivisorClass] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// `b_i = 2 - chi(A_i)`.
    pub fn b_sequence(&self) -> Vec<i64> {
        self.entries.iter().map(|a| 2 - self.surface.euler_char(a)).collect()
    }

    pub fn tv(&self) -> Result<ToricSurface> {
        ToricSurface::from_b(&self.b_sequence())
            .map_err(|e| Error::Internal(format!("associated surface of a toric system: {e}")))
    }

    /// Partial sums `sum_{i=j}^{k} A_i` for `j <= k < n - 1`, keyed by `(j, k)`.
    pub fn interval_sums(&self) -> Vec<((usize, usize), DivisorClass)> {
        let mut out = Vec::new();
        for j in 0..self.n() - 1 {
            let mut s = self.surface.zero_class();
            for k in j..self.n() - 1 {
                s = &s + &self.entries[k];
                out.push(((j, k), s.clone()));
            }
        }
        out
    }

    pub fn is_exceptional(&self) -> bool {
        self.interval_sums().iter().all(|(_, s)| self.surface.cohomology(&-s).vanishes())
    }

    pub fn is_strongly_exceptional(&self) -> bool {
        self.is_exceptional()
            && self.interval_sums().iter().all(|(_, s)| {
                let c = self.surface.cohomology(s);
                c.h1 == 0 && c.h2 == 0
            })
    }

    /// `(0, A_1, A_1 + A_2, ...)`.
    pub fn exceptional_sequence(&self) -> Vec<DivisorClass> {
        let mut out = vec![self.surface.zero_class()];
        for a in &self.entries[..self.n() - 1] {
            let next = out.last().expect("nonempty") + a;
            out.push(next);
        }
        out
    }

    /// Entries reordered by `new[j] = old[perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> ToricSystem {
        ToricSystem {
            surface: self.surface.clone(),
            entries: perm.iter().map(|&p| self.entries[p].clone()).collect(),
        }
    }

    pub fn rotated(&self, s: usize) -> ToricSystem {
        let n = self.n();
        self.permuted(&(0..n).map(|j| (j + s) % n).collect::<Vec<_>>())
    }

    pub fn reflected(&self) -> ToricSystem {
        let n = self.n();
        self.permuted(&(0..n).map(|j| (n - j) % n).collect::<Vec<_>>())
    }

    /// Same system up to rotation and reflection of the entries.
    pub fn dihedral_eq(&self, other: &ToricSystem) -> bool {
        self.surface == other.surface && self.dihedral_key() == other.dihedral_key()
    }

    pub fn dihedral_key(&self) -> Vec<Vec<i64>> {
        min_dihedral(&self.entries)
    }

    /// Key invariant under surface relabelings and dihedral reordering of the entries.
    pub fn canonical_key(&self) -> (Vec<i64>, Vec<Vec<i64>>) {
        let nf = normal_form(self.surface.b());
        let target = ToricSurface::from_b(&nf).expect("normal form is smooth");
        let mut best: Option<Vec<Vec<i64>>> = None;
        for perm in dihedral_perms(self.surface.n()) {
            if perm.iter().enumerate().any(|(j, &s)| nf[j] != self.surface.b()[s]) {
                continue;
            }
            let moved: Vec<DivisorClass> =
                self.entries.iter().map(|e| self.surface.transfer_to(&target, &perm, e)).collect();
            let k = min_dihedral(&moved);
            if best.as_ref().map_or(true, |b| k < *b) {
                best = Some(k);
            }
        }
        (nf, best.expect("identity relabeling of the normal form exists"))
    }

    /// Moves the system along a relabeling of the surface.
    pub fn transfer(&self, target: &ToricSurface, perm: &[usize]) -> Result<ToricSystem> {
        let entries = self.entries.iter().map(|e| self.surface.transfer_to(target, perm, e)).collect();
        ToricSystem::validate(target, entries)
    }

    /// `(..., A_i - R, R, A_{i+1} - R, ...)` on the blowup; `R` sits at index `i + 1`.
    pub fn augment(&self, blowup: &Blowup, i: usize) -> Result<ToricSystem> {
        if blowup.coarse.b() != self.surface.b() {
            return invalid(format!("blowup of {:?} applied to a system on {:?}", blowup.coarse, self.surface));
        }
        let n = self.n();
        if i >= n {
            return invalid(format!("augmentation position {i} out of range"));
        }
        let r = blowup.exceptional_class();
        let mut entries: Vec<DivisorClass> = self.entries.iter().map(|e| blowup.pullback(e)).collect();
        entries[i] = &entries[i] - &r;
        entries[(i + 1) % n] = &entries[(i + 1) % n] - &r;
        entries.insert(i + 1, r);
        ToricSystem::validate(&blowup.fine, entries)
    }

    /// Inverse augmentations along invariant minus-one curves.
    pub fn deaugment_candidates(&self) -> Vec<Deaugmentation> {
        if self.surface.rank() < 3 {
            return Vec::new();
        }
        self.surface
            .minus_one_rays()
            .into_iter()
            .flat_map(|e| self.deaugment_along(&self.surface.blowdown_at(e).expect("minus-one ray contracts")))
            .collect()
    }

    /// Inverse augmentations with respect to a given blowup onto this system's surface.
    pub fn deaugment_along(&self, blowup: &Blowup) -> Vec<Deaugmentation> {
        assert_eq!(blowup.fine.b(), self.surface.b(), "blowup does not end at this surface");
        let n = self.n();
        let r = blowup.exceptional_class();
        let mut out = Vec::new();
        for j in 0..n {
            if self.entries[j] != r {
                continue;
            }
            let mut fine = self.entries.clone();
            fine[(j + n - 1) % n] = &fine[(j + n - 1) % n] + &r;
            fine[(j + 1) % n] = &fine[(j + 1) % n] + &r;
            fine.remove(j);
            let coarse: Vec<DivisorClass> = fine.iter().map(|c| blowup.pushforward(c)).collect();
            let system = ToricSystem::validate(&blowup.coarse, coarse)
                .expect("deaugmentation of a toric system is a toric system");
            let (aug_position, rotation) = if j == 0 { (n - 2, n - 1) } else { (j - 1, 0) };
            out.push(Deaugmentation {
                ray: blowup.exceptional,
                position: j,
                blowup: blowup.clone(),
                system,
                aug_position,
                rotation,
            });
        }
        out
    }
}

fn min_dihedral(entries: &[DivisorClass]) -> Vec<Vec<i64>> {
    dihedral_perms(entries.len())
        .map(|p| p.iter().map(|&i| entries[i].0.clone()).collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

#[derive(Clone, Debug)]
pub struct Deaugmentation {
    /// Minus-one ray on the finer surface.
    pub ray: usize,
    /// Entry index equal to the exceptional class.
    pub position: usize,
    pub blowup: Blowup,
    pub system: ToricSystem,
    pub aug_position: usize,
    pub rotation: usize,
}

impl Deaugmentation {
    /// Augments back and rotates; reproduces the original system exactly.
    pub fn replay(&self) -> ToricSystem {
        self.system
            .augment(&self.blowup, self.aug_position)
            .expect("replayed augmentation validates")
            .rotated(self.rotation)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ChainStep {
    /// b-sequence of the finer surface.
    pub surface: Vec<i64>,
    pub ray: usize,
    pub aug_position: usize,
    pub rotation: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Augmentations applied to `base` in order.
    Chain { base_surface: Vec<i64>, base_entries: Vec<Vec<i64>>, steps: Vec<ChainStep> },
    /// Every de-augmentation branch was explored without reaching a Hirzebruch base.
    Refutation { explored: usize, exceptional: bool },
}

impl Certificate {
    pub fn replay(&self) -> Result<ToricSystem> {
        let Certificate::Chain { base_surface, base_entries, steps } = self else {
            return Err(Error::Precondition("refutations cannot be replayed".into()));
        };
        let x = ToricSurface::from_b(base_surface)?;
        let mut a = ToricSystem::validate(&x, base_entries.iter().cloned().map(DivisorClass).collect())?;
        for s in steps {
            let fine = ToricSurface::from_b(&s.surface)?;
            let blowup = fine.blowdown_at(s.ray)?;
            a = a.augment(&blowup, s.aug_position)?.rotated(s.rotation);
        }
        Ok(a)
    }
}

/// Search state; negative results are remembered by canonical key.
#[derive(Default)]
pub struct ConstructibilitySearch {
    refuted: HashSet<(Vec<i64>, Vec<Vec<i64>>)>,
    explored: usize,
}

impl ConstructibilitySearch {
    pub fn new() -> ConstructibilitySearch {
        ConstructibilitySearch::default()
    }

    pub fn check(&mut self, a: &ToricSystem) -> (bool, Certificate) {
        if a.surface.rank() < 2 || !a.is_exceptional() {
            return (false, Certificate::Refutation { explored: 0, exceptional: a.is_exceptional() });
        }
        self.explored = 0;
        let mut steps = Vec::new();
        match self.dfs(a, &mut steps) {
            Some(base) => {
                steps.reverse();
                let cert = Certificate::Chain {
                    base_surface: base.surface.b().to_vec(),
                    base_entries: base.entries.iter().map(|e| e.0.clone()).collect(),
                    steps,
                };
                (true, cert)
            }
            None => (false, Certificate::Refutation { explored: self.explored, exceptional: true }),
        }
    }

    fn dfs(&mut self, a: &ToricSystem, steps: &mut Vec<ChainStep>) -> Option<ToricSystem> {
        if a.surface.rank() == 2 {
            self.explored += 1;
            return a.is_exceptional().then(|| a.clone());
        }
        let key = a.canonical_key();
        if self.refuted.contains(&key) {
            return None;
        }
        self.explored += 1;
        for d in a.deaugment_candidates() {
            steps.push(ChainStep {
                surface: a.surface.b().to_vec(),
                ray: d.ray,
                aug_position: d.aug_position,
                rotation: d.rotation,
            });
            if let Some(base) = self.dfs(&d.system, steps) {
                return Some(base);
            }
            steps.pop();
        }
        self.refuted.insert(key);
        None
    }
}

pub fn is_constructible(a: &ToricSystem) -> (bool, Certificate) {
    ConstructibilitySearch::new().check(a)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HirzebruchVariant {
    Plain,
    Tilde,
}

/// `P` and `Q` on the standard `F_r = TV(r, 0, -r, 0)`.
pub fn hirzebruch_pq(r: i64) -> (DivisorClass, DivisorClass) {
    let f = ToricSurface::hirzebruch(r);
    (f.ray_class(1), f.ray_class(2))
}

pub fn hirzebruch_system(r: i64, i: i64, variant: HirzebruchVariant) -> Result<ToricSystem> {
    if r < 0 {
        return invalid(format!("Hirzebruch index {r} must be nonnegative"));
    }
    let f = ToricSurface::hirzebruch(r);
    let (p, q) = hirzebruch_pq(r);
    let entries = match variant {
        HirzebruchVariant::Plain => vec![
            p.clone(),
            &p.scaled(i) + &q,
            p.clone(),
            &p.scaled(-(r + i)) + &q,
        ],
        HirzebruchVariant::Tilde => {
            if r % 2 != 0 {
                return invalid(format!("tilde family needs even r, got {r}"));
            }
            let t = &p.scaled(-r / 2) + &q;
            vec![t.clone(), &p + &t.scaled(i), t.clone(), &p - &t.scaled(i)]
        }
    };
    ToricSystem::validate(&f, entries)
}

/// `L_1^alpha` on the family `A_{r,i}`, which must be given in its exact standard form.
pub fn mutate_l1(a: &ToricSystem, alpha: i64) -> Result<ToricSystem> {
    let b = a.surface.b();
    if b.len() != 4 || b[0] < 0 || b != [b[0], 0, -b[0], 0] {
        return Err(Error::Precondition(format!("{:?} is not a standard Hirzebruch surface", a.surface)));
    }
    let r = b[0];
    let (p, q) = hirzebruch_pq(r);
    let second = &a.entries[1] - &q;
    let i = second.0[1];
    if second != p.scaled(i) {
        return Err(Error::Precondition("system is not of the form A_{r,i}".into()));
    }
    if *a != hirzebruch_system(r, i, HirzebruchVariant::Plain)? {
        return Err(Error::Precondition("system is not of the form A_{r,i}".into()));
    }
    hirzebruch_system(r, i + alpha, HirzebruchVariant::Plain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use HirzebruchVariant::*;

    #[test]
    fn canonical_system_valid() {
        for b in [vec![1, 1, 1, 0, 0], vec![2, 1, 1, -1, 0], vec![1, 1, 1, 1, 1, 1], vec![-1, -1, -1]] {
            let x = ToricSurface::from_b(&b).unwrap();
            let a = ToricSystem::canonical(&x);
            assert_eq!(a.b_sequence(), b);
            assert!(a.is_exceptional());
        }
    }

    #[test]
    fn invalid_system_names_pair() {
        let f0 = ToricSurface::hirzebruch(0);
        let p = f0.ray_class(1);
        let err = ToricSystem::validate(&f0, vec![p.clone(); 4]).unwrap_err();
        assert!(matches!(err, Error::NotToricSystem(ref m) if m.contains("A_0.A_1")));
    }

    #[test]
    fn hirzebruch_examples() {
        let a = hirzebruch_system(1, 0, Plain).unwrap();
        let (p, q) = hirzebruch_pq(1);
        assert_eq!(a.entries(), &[p.clone(), q.clone(), p.clone(), &q - &p]);
        let intro = hirzebruch_system(2, -1, Plain).unwrap();
        let (p2, q2) = hirzebruch_pq(2);
        assert_eq!(intro.entries(), &[p2.clone(), &q2 - &p2, p2.clone(), &q2 - &p2]);
        assert_eq!(intro.tv().unwrap().normal_form(), vec![0, 0, 0, 0]);
        assert!(hirzebruch_system(3, 0, Tilde).is_err());
        let t = hirzebruch_system(2, 0, Tilde).unwrap();
        assert_eq!(t.entries()[0], &q2 - &p2);
    }

    #[test]
    fn tv_of_hirzebruch_families() {
        for r in 0..4i64 {
            for i in -3..4i64 {
                let a = hirzebruch_system(r, i, Plain).unwrap();
                assert_eq!(a.tv().unwrap().normal_form(), ToricSurface::hirzebruch((r + 2 * i).abs()).normal_form());
                if r % 2 == 0 {
                    let t = hirzebruch_system(r, i, Tilde).unwrap();
                    assert_eq!(t.tv().unwrap().normal_form(), ToricSurface::hirzebruch((2 * i).abs()).normal_form());
                }
            }
        }
    }

    #[test]
    fn mutation() {
        let a = hirzebruch_system(1, 0, Plain).unwrap();
        assert_eq!(mutate_l1(&a, 1).unwrap(), hirzebruch_system(1, 1, Plain).unwrap());
        assert_eq!(mutate_l1(&mutate_l1(&a, 1).unwrap(), -1).unwrap(), a);
        for alpha in -3..4 {
            let m = mutate_l1(&hirzebruch_system(2, 0, Plain).unwrap(), alpha).unwrap();
            let (p, q) = hirzebruch_pq(2);
            assert_eq!(m.entries()[3], &p.scaled(-(2 + alpha)) + &q);
        }
        assert!(mutate_l1(&hirzebruch_system(2, 0, Tilde).unwrap(), 1).is_err());
    }

    #[test]
    fn augment_dp7_and_back() {
        let a = hirzebruch_system(1, 2, Plain).unwrap();
        let f1 = a.surface().clone();
        for j in 0..4 {
            let up = f1.blowup_at(j);
            for i in 0..4 {
                let aug = a.augment(&up, i).unwrap();
                assert!(aug.is_exceptional());
                let back: Vec<_> = aug.deaugment_candidates().into_iter().filter(|d| d.ray == up.exceptional).collect();
                assert!(back.iter().any(|d| d.system == a));
                for d in aug.deaugment_candidates() {
                    assert_eq!(d.replay(), aug);
                }
            }
        }
    }

    #[test]
    fn augment_blows_up_tv_at_position() {
        let a = hirzebruch_system(1, 1, Plain).unwrap();
        let f1 = a.surface().clone();
        let b = a.b_sequence();
        let n = b.len();
        for i in 0..n {
            let aug = a.augment(&f1.blowup_at(0), i).unwrap();
            let mut want = b.clone();
            want[i] += 1;
            want[(i + 1) % n] += 1;
            want.insert(i + 1, 1);
            assert_eq!(aug.b_sequence(), want);
        }
    }

    #[test]
    fn dp6_canonical_deaugments_six_ways() {
        let x = ToricSurface::from_b(&[1; 6]).unwrap();
        let c = ToricSystem::canonical(&x);
        let d = c.deaugment_candidates();
        assert_eq!(d.len(), 6);
        assert!(hirzebruch_system(1, 0, Plain).unwrap().deaugment_candidates().is_empty());
    }

    #[test]
    fn constructibility_certificates_replay() {
        let x = ToricSurface::from_b(&[1; 6]).unwrap();
        let c = ToricSystem::canonical(&x);
        let (ok, cert) = is_constructible(&c);
        assert!(ok);
        assert_eq!(cert.replay().unwrap(), c);
        let bad = hirzebruch_system(2, 1, Tilde).unwrap();
        let (ok, cert) = is_constructible(&bad);
        assert!(!ok);
        assert!(matches!(cert, Certificate::Refutation { exceptional: false, .. }));
    }

    #[test]
    fn canonical_key_invariance() {
        let a = hirzebruch_system(1, 1, Plain).unwrap();
        let aug = a.augment(&a.surface().blowup_at(1), 2).unwrap();
        let k = aug.canonical_key();
        assert_eq!(aug.rotated(3).canonical_key(), k);
        assert_eq!(aug.reflected().canonical_key(), k);
        let x = aug.surface();
        let y = ToricSurface::from_b(&normal_form(x.b())).unwrap();
        let perm = x.relabeling_to(&y).unwrap();
        assert_eq!(aug.transfer(&y, &perm).unwrap().canonical_key(), k);
    }
}
