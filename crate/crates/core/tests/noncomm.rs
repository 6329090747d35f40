use exsys::noncomm::*;

#[test]
fn family_dimensions_constant() {
    for r in 0..=3 {
        for i in 2..=4 {
            for alpha in 1..i {
                let f = family_dims(r, i, alpha).unwrap();
                assert_eq!(f.total, 2 * i + r + 2);
                assert_eq!((f.h0_general, f.h0_special), (f.total, f.total));
                let (g, s) = family_systems(r, i, alpha).unwrap();
                assert!(g.is_strongly_exceptional() && s.is_strongly_exceptional());
                let (dg, ds) = (endo_dims(&g).unwrap(), endo_dims(&s).unwrap());
                assert_eq!(dg, ds, "(r,i,alpha)=({r},{i},{alpha})");
                let q = emit_quiver(r, i, alpha).unwrap();
                for j in 0..3 {
                    let diag = dg.iter().find(|e| e.j == j && e.k == j).unwrap();
                    assert_eq!(q.arrow_count(j) as i64, diag.dim);
                }
            }
        }
    }
}

#[test]
fn quiver_json_round_trip() {
    let q = emit_quiver(1, 2, 1).unwrap();
    let s = serde_json::to_string(&q).unwrap();
    assert_eq!(serde_json::from_str::<Quiver>(&s).unwrap(), q);
    assert!(q.relations.iter().any(|r| r.starts_with("t = 0: b_j = d_j")));
}

#[test]
fn endo_needs_strong() {
    let a = exsys::system::hirzebruch_system(1, -2, exsys::HirzebruchVariant::Plain).unwrap();
    assert!(endo_dims(&a).is_err());
}
