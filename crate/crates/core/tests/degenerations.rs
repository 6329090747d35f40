mod common;

use common::{box_classes, is_rotation, negative_start_sequences};
use exsys::degen::*;
use exsys::lattice::alpha_gamma;
use exsys::{DivisorClass, ToricSurface};
use proptest::prelude::*;

fn check_toricdef(b: &[i64], r: i64) {
    let td = toricdef(b, r).unwrap_or_else(|e| panic!("{b:?} r={r}: {e}"));
    let general = ToricSurface::from_b(&td.general_b).expect("general fiber smooth complete");
    assert_eq!(td.general_b.iter().sum::<i64>(), b.iter().sum::<i64>());
    let (alpha, gamma) = alpha_gamma(b).unwrap();
    assert!(gamma >= 0);
    assert!(b[0] + b[alpha] - gamma >= 0);
    let gen = td.diagram.general_fiber().unwrap();
    assert!(gen.surface.is_isomorphic(&general));
    let sp = td.diagram.special_toric_fiber().unwrap();
    assert!(is_rotation(sp.surface.b(), b), "{:?} vs {b:?}", sp.surface.b());
}

#[test]
fn toricdef_all_sequences() {
    let seqs = negative_start_sequences(5, 5);
    assert!(seqs.len() > 50);
    for b in &seqs {
        for r in 0..=-b[0] {
            check_toricdef(b, r);
        }
    }
}

#[test]
fn toricdef_rejects() {
    assert!(toricdef(&[1, 0, -1, 0], 0).is_err());
    assert!(toricdef(&[-2, 0, 2, 0], 3).is_err());
    assert!(toricdef(&[-2, 0, 2, 0], -1).is_err());
}

#[test]
fn toricdef_f2() {
    let td = toricdef(&[-2, 0, 2, 0], 1).unwrap();
    assert_eq!(normal_form_of(&td.general_b), normal_form_of(&[0, 0, 0, 0]));
    let td = toricdef(&[-2, 0, 2, 0], 0).unwrap();
    assert_eq!(normal_form_of(&td.general_b), normal_form_of(&[2, 0, -2, 0]));
}

fn normal_form_of(b: &[i64]) -> Vec<i64> {
    exsys::surface::normal_form(b)
}

fn check_pi(d: &DegenerationDiagram, bound: i64) {
    let pi = pi_circ(d).unwrap();
    let (g, s) = (&pi.general.surface, &pi.special.surface);
    let rank = g.rank();
    let basis: Vec<DivisorClass> = (0..rank)
        .map(|k| {
            let mut v = vec![0; rank];
            v[k] = 1;
            DivisorClass(v)
        })
        .collect();
    // Bilinearity: basis pairs cover every pair.
    for u in &basis {
        for v in &basis {
            assert_eq!(s.intersect(&pi.apply(u), &pi.apply(v)), g.intersect(u, v));
        }
    }
    assert_eq!(&pi.apply(g.canonical_class()), s.canonical_class());
    let classes = box_classes(rank, bound);
    if rank <= 3 {
        for u in &classes {
            for v in classes.iter().step_by(7) {
                assert_eq!(s.intersect(&pi.apply(u), &pi.apply(v)), g.intersect(u, v));
            }
        }
    }
    for c in &classes {
        let p = pi.apply(c);
        assert_eq!(s.euler_char(&p), g.euler_char(c));
        assert!(s.h0(&p) >= g.h0(c), "h0 drops on {c:?} along {:?}", d.edges());
        assert_eq!(&pi.apply_inverse(&p), c);
    }
}

#[test]
fn pi_preserves_on_hirzebruch_diagrams() {
    for r in 0..=3 {
        for alpha in 1..=2 {
            check_pi(&hirzebruch_diagram(r, alpha, false).unwrap(), 3);
        }
    }
    check_pi(&hirzebruch_diagram(0, 1, true).unwrap(), 3);
}

#[test]
fn pi_preserves_on_toricdef_diagrams() {
    for b in negative_start_sequences(5, 5) {
        for r in 0..=-b[0] {
            check_pi(&toricdef(&b, r).unwrap().diagram, 3);
        }
    }
}

#[test]
fn hirzebruch_pi_matrix() {
    let (p, q) = exsys::system::hirzebruch_pq(1);
    let m = hirzebruch_pi(1, 1, false).unwrap();
    assert_eq!(exsys::matrix::apply(&m, &p.0), vec![0, 1]);
    assert_eq!(exsys::matrix::apply(&m, &q.0), vec![1, -1]);
}

#[test]
fn blowdown_of_f2_diagram() {
    let td = toricdef(&[-2, 0, 2, 0], 1).unwrap();
    let downs = diagram_blowdowns(&td.diagram).unwrap();
    let ups = diagram_blowups(&td.diagram).unwrap();
    assert!(!ups.is_empty());
    for up in &ups {
        assert_eq!(up.fine.general_fiber().unwrap().surface.rank(), 3);
        assert_eq!(up.fine.special_toric_fiber().unwrap().surface.rank(), 3);
        let back = diagram_blowdowns(&up.fine).unwrap();
        assert!(back.iter().any(|bd| bd.coarse == up.coarse), "blowup of {:?} not undone", up.coarse.edges());
    }
    assert!(downs.is_empty());
}

#[test]
fn dp7_degenerates_to_x2_and_x3() {
    let dp7 = exsys::verify::dp7();
    for r in [2, 3] {
        let found = find_toric_degenerations(&dp7, &exsys::verify::x_r(r), 6);
        assert!(!found.is_empty(), "no diagram to X_{r}");
        for d in found {
            assert!(d.general_fiber().unwrap().surface.is_isomorphic(&dp7));
        }
    }
}

#[test]
fn connect_rank3() {
    use exsys::verify::x_r;
    let c = connect(&x_r(0), &x_r(2), ConnectBounds::default()).unwrap();
    assert!(!c.steps.is_empty());
    let (x, y) = (x_r(0), x_r(2));
    let m = &c.matrix;
    let img = |v: &DivisorClass| DivisorClass(exsys::matrix::apply(m, &v.0));
    for u in box_classes(3, 1) {
        for v in box_classes(3, 1) {
            assert_eq!(y.intersect(&img(&u), &img(&v)), x.intersect(&u, &v));
        }
    }
    assert_eq!(&img(x.canonical_class()), y.canonical_class());
}

#[test]
fn diagram_json_round_trip() {
    let d = hirzebruch_diagram(1, 2, false).unwrap();
    let s = serde_json::to_string(&d).unwrap();
    let back: DegenerationDiagram = serde_json::from_str(&s).unwrap();
    assert_eq!(back, d);
    let bad = s.replace("\"dot\"", "\"circ\"");
    if bad != s {
        let _ = serde_json::from_str::<DegenerationDiagram>(&bad);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toricdef_random(idx in 0usize..1000, r_frac in 0.0f64..1.0) {
        let seqs = negative_start_sequences(4, 5);
        let b = &seqs[idx % seqs.len()];
        let r = ((-b[0] as f64 + 1.0) * r_frac).floor() as i64;
        check_toricdef(b, r.min(-b[0]));
    }

    #[test]
    fn shifted_diagrams_agree(r in 0i64..3, alpha in 1i64..3, k in -2i64..3) {
        let d = hirzebruch_diagram(r, alpha, false).unwrap();
        let e = d.shifted(k).unwrap();
        let (p, q) = (pi_circ(&d).unwrap(), pi_circ(&e).unwrap());
        prop_assert!(p.general.surface.is_isomorphic(&q.general.surface));
        prop_assert!(p.special.surface.is_isomorphic(&q.special.surface));
    }
}
