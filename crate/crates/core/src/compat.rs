//! Transport of toric systems along degeneration diagrams and compatibility.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::degen::{diagram_blowdowns, pi_circ, DegenerationDiagram, PiCircMap};
use crate::error::{Error, Result};
use crate::matrix;
use crate::surface::{DivisorClass, ToricSurface};
use crate::system::{is_constructible, ToricSystem};

fn on_general(a: &ToricSystem, pi: &PiCircMap) -> Result<()> {
    if a.surface().b() != pi.general.surface.b() {
        return Err(Error::InvalidInput(format!(
            "system lives on {:?}, general fiber is {:?}",
            a.surface(),
            pi.general.surface
        )));
    }
    Ok(())
}

/// Entrywise image on the special fiber surface.
pub fn transport(a: &ToricSystem, d: &DegenerationDiagram) -> Result<ToricSystem> {
    let pi = pi_circ(d)?;
    transport_with(a, &pi)
}

pub fn transport_with(a: &ToricSystem, pi: &PiCircMap) -> Result<ToricSystem> {
    on_general(a, pi)?;
    let entries = a.entries().iter().map(|e| pi.apply(e)).collect();
    ToricSystem::validate(&pi.special.surface, entries)
        .map_err(|e| Error::Internal(format!("image of a toric system is not a toric system: {e}")))
}

/// Entrywise preimage of a system on the special fiber surface.
pub fn transport_inverse(a: &ToricSystem, d: &DegenerationDiagram) -> Result<ToricSystem> {
    let pi = pi_circ(d)?;
    if a.surface().b() != pi.special.surface.b() {
        return Err(Error::InvalidInput(format!(
            "system lives on {:?}, special fiber is {:?}",
            a.surface(),
            pi.special.surface
        )));
    }
    let entries = a.entries().iter().map(|e| pi.apply_inverse(e)).collect();
    ToricSystem::validate(&pi.general.surface, entries)
        .map_err(|e| Error::Internal(format!("preimage of a toric system is not a toric system: {e}")))
}

/// Transport between surfaces isomorphic to the fibers, through the first relabelings found.
pub fn transport_between(a: &ToricSystem, d: &DegenerationDiagram, target: &ToricSurface) -> Result<ToricSystem> {
    let m = pi_circ(d)?.between(a.surface(), target)?;
    let entries = a.entries().iter().map(|e| DivisorClass(matrix::apply(&m, &e.0))).collect();
    ToricSystem::validate(target, entries)
}

/// Recursive compatibility test with memoization on `(diagram, entries)`.
#[derive(Default)]
pub struct CompatSearch {
    memo: HashMap<(DegenerationDiagram, Vec<DivisorClass>), bool>,
}

impl CompatSearch {
    pub fn new() -> CompatSearch {
        CompatSearch::default()
    }

    pub fn is_compatible(&mut self, a: &ToricSystem, d: &DegenerationDiagram) -> Result<bool> {
        if !is_constructible(a).0 {
            return Err(Error::Precondition("compatibility is defined for constructible systems".into()));
        }
        self.rec(a, d)
    }

    fn rec(&mut self, a: &ToricSystem, d: &DegenerationDiagram) -> Result<bool> {
        let key = (d.clone(), a.entries().to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let pi = pi_circ(d)?;
        on_general(a, &pi)?;
        let v = if a.surface().rank() == 2 {
            transport_with(a, &pi)?.is_exceptional()
        } else {
            let mut found = false;
            'outer: for bd in diagram_blowdowns(d)? {
                for de in a.deaugment_along(&bd.general) {
                    if is_constructible(&de.system).0 && self.rec(&de.system, &bd.coarse)? {
                        found = true;
                        break 'outer;
                    }
                }
            }
            found
        };
        self.memo.insert(key, v);
        Ok(v)
    }
}

pub fn is_compatible(a: &ToricSystem, d: &DegenerationDiagram) -> Result<bool> {
    CompatSearch::new().is_compatible(a, d)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PairVerdict {
    pub general_b: Vec<i64>,
    pub entries: Vec<Vec<i64>>,
    pub compatible: bool,
    pub image_constructible: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct CompatReport {
    pub pairs: Vec<PairVerdict>,
    pub discrepancies: Vec<PairVerdict>,
}

/// Compares compatibility with constructibility of the image on every pair.
pub fn check_compat_theorem(corpus: &[(DegenerationDiagram, ToricSystem)]) -> Result<CompatReport> {
    let mut search = CompatSearch::new();
    let mut report = CompatReport::default();
    for (d, a) in corpus {
        let compatible = search.is_compatible(a, d)?;
        let image_constructible = is_constructible(&transport(a, d)?).0;
        let v = PairVerdict {
            general_b: a.surface().b().to_vec(),
            entries: a.entries().iter().map(|e| e.0.clone()).collect(),
            compatible,
            image_constructible,
        };
        if compatible != image_constructible {
            report.discrepancies.push(v.clone());
        }
        report.pairs.push(v);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degen::hirzebruch_diagram;
    use crate::system::{hirzebruch_system, HirzebruchVariant::*};

    #[test]
    fn plain_hirzebruch_transport() {
        for r in 1..3 {
            for alpha in 1..3 {
                let d = hirzebruch_diagram(r, alpha, false).unwrap();
                let target = ToricSurface::hirzebruch(r + 2 * alpha);
                for i in -2..3 {
                    let a = hirzebruch_system(r, i, Plain).unwrap();
                    let img = transport_between(&a, &d, &target).unwrap();
                    assert_eq!(img, hirzebruch_system(r + 2 * alpha, i - alpha, Plain).unwrap());
                    assert_eq!(img.tv().unwrap().normal_form(), a.tv().unwrap().normal_form());
                    let t = transport(&a, &d).unwrap();
                    assert_eq!(transport_inverse(&t, &d).unwrap(), a);
                }
            }
        }
    }

    #[test]
    fn compatible_plain() {
        let d = hirzebruch_diagram(1, 1, false).unwrap();
        for i in -1..3 {
            let a = hirzebruch_system(1, i, Plain).unwrap();
            assert!(is_compatible(&a, &d).unwrap());
        }
    }

    #[test]
    fn dp7_blowdowns_recurse() {
        let d = hirzebruch_diagram(1, 1, false).unwrap();
        let a = hirzebruch_system(1, 1, Plain).unwrap();
        let ups = crate::degen::diagram_blowups(&d).unwrap();
        assert!(!ups.is_empty());
        for bu in ups {
            for i in 0..4 {
                let aug = a.augment(&bu.general, i).unwrap();
                let c = is_compatible(&aug, &bu.fine).unwrap();
                let img = transport(&aug, &bu.fine).unwrap();
                assert_eq!(c, is_constructible(&img).0);
            }
        }
    }
}
