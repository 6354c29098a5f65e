use std::collections::BTreeSet;

use heistheta::finite_heisenberg::{
    enumerate_maximal_isotropic_2torsion, CyclotomicScalar, GroupPoint, HeisenbergElement, HeisenbergGroup,
    PolarizationType,
};
use heistheta::schrodinger::{eigenspace_dims, iota_eigenspace_formula, represent, represent_iota};
use proptest::prelude::*;

fn delta(s: &str) -> PolarizationType {
    PolarizationType::parse(s).unwrap()
}

fn all_elements(g: &HeisenbergGroup) -> Vec<HeisenbergElement> {
    let n = g.scalar_order();
    g.delta()
        .group_points()
        .into_iter()
        .flat_map(|p| (0..n).map(move |e| HeisenbergElement { scalar: CyclotomicScalar::new(e as i64, n), point: p.clone() }))
        .collect()
}

#[test]
fn group_axioms_by_brute_force() {
    for ds in ["2", "2,2"] {
        let g = HeisenbergGroup::new(delta(ds));
        let els = all_elements(&g);
        let id = g.identity();
        for a in &els {
            assert_eq!(g.multiply(a, &id).unwrap(), *a);
            assert_eq!(g.multiply(&id, a).unwrap(), *a);
            assert_eq!(g.multiply(a, &g.inverse(a)).unwrap(), id);
            for b in &els {
                let ab = g.multiply(a, b).unwrap();
                for c in &els {
                    assert_eq!(g.multiply(&ab, c).unwrap(), g.multiply(a, &g.multiply(b, c).unwrap()).unwrap());
                }
            }
        }
        // centre = scalars
        let centre: Vec<_> = els.iter().filter(|a| els.iter().all(|b| g.commutator(a, b) == id)).collect();
        assert!(centre.iter().all(|z| z.point.is_zero()));
        assert_eq!(centre.len(), g.scalar_order() as usize);
    }
}

#[test]
fn weil_pairing_bimultiplicative_and_alternating_on_two_four() {
    let d = delta("2,4");
    let g = HeisenbergGroup::new(d.clone());
    let pts = d.group_points();
    for u in &pts {
        assert!(g.weil_pairing(u, u).is_one());
        for v in &pts {
            assert_eq!(g.weil_pairing(u, v), g.weil_pairing(v, u).inv());
            let lifted = g.commutator(&g.lift(u.clone()), &g.lift(v.clone()));
            assert!(lifted.point.is_zero());
            assert_eq!(lifted.scalar, g.weil_pairing(u, v));
            for w in &pts {
                assert_eq!(g.weil_pairing(&u.add(v, &d), w), g.weil_pairing(u, w).mul(&g.weil_pairing(v, w)));
            }
        }
    }
    // nondegenerate
    for u in pts.iter().filter(|u| !u.is_zero()) {
        assert!(pts.iter().any(|v| !g.weil_pairing(u, v).is_one()));
    }
}

/// Independent oracle: close every set of at most g+1 two-torsion points, keep isotropic subgroups,
/// and take those maximal under inclusion.
fn brute_force_maximal_isotropic(d: &PolarizationType) -> BTreeSet<Vec<GroupPoint>> {
    let g = HeisenbergGroup::new(d.clone());
    let tors = d.torsion_points(2);
    let close = |gens: &[&GroupPoint]| -> Vec<GroupPoint> {
        let mut set: BTreeSet<GroupPoint> = BTreeSet::from([GroupPoint::zero(d)]);
        for x in gens {
            let more: Vec<GroupPoint> = set.iter().map(|s| s.add(x, d)).collect();
            set.extend(more);
        }
        set.into_iter().collect()
    };
    let mut subgroups: BTreeSet<Vec<GroupPoint>> = BTreeSet::new();
    let k = tors.len();
    for i in 0..k {
        for j in i..k {
            for l in j..k {
                let h = close(&[&tors[i], &tors[j], &tors[l]]);
                if h.iter().all(|a| h.iter().all(|b| g.weil_pairing(a, b).is_one())) {
                    subgroups.insert(h);
                }
            }
        }
    }
    let all: Vec<Vec<GroupPoint>> = subgroups.iter().cloned().collect();
    all.iter()
        .filter(|h| !all.iter().any(|k| k.len() > h.len() && h.iter().all(|x| k.contains(x))))
        .cloned()
        .collect()
}

#[test]
fn maximal_isotropic_counts() {
    for (ds, count, order) in [("2", 3, 2), ("4", 1, 4), ("2,2", 15, 4), ("2,4", 3, 8), ("1,2,4", 3, 8)] {
        let d = delta(ds);
        let subs = enumerate_maximal_isotropic_2torsion(&d);
        assert_eq!(subs.len(), count, "{ds}");
        assert!(subs.iter().all(|s| s.order() == order), "{ds}");
        let ours: BTreeSet<Vec<GroupPoint>> = subs.into_iter().map(|s| s.elements).collect();
        assert_eq!(ours, brute_force_maximal_isotropic(&d), "{ds}");
    }
}

#[test]
fn iota_eigenspaces_match_closed_form() {
    for ds in ["2", "4", "2,2", "2,4", "1,2,4", "4,4", "2,2,2"] {
        let d = delta(ds);
        let dims = eigenspace_dims(&represent_iota(&d)).unwrap();
        assert_eq!(Some(dims), iota_eigenspace_formula(&d), "{ds}");
    }
}

fn element_strategy(ds: &'static str) -> impl Strategy<Value = HeisenbergElement> {
    let d = delta(ds);
    let n = d.scalar_order();
    let divs = d.divisors().to_vec();
    let coords = divs.iter().map(|&di| 0..di).collect::<Vec<_>>();
    (0..n, coords.clone(), coords).prop_map(move |(e, x, l)| HeisenbergElement {
        scalar: CyclotomicScalar::new(e as i64, n),
        point: GroupPoint::new(x, l),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn representation_is_a_homomorphism(a in element_strategy("2,4"), b in element_strategy("2,4")) {
        let g = HeisenbergGroup::new(delta("2,4"));
        let ab = g.multiply(&a, &b).unwrap();
        prop_assert_eq!(represent(&g, &ab), represent(&g, &a).mul(&represent(&g, &b)));
    }

    #[test]
    fn representation_homomorphism_one_two_four(a in element_strategy("1,2,4"), b in element_strategy("1,2,4")) {
        let g = HeisenbergGroup::new(delta("1,2,4"));
        let ab = g.multiply(&a, &b).unwrap();
        prop_assert_eq!(represent(&g, &ab), represent(&g, &a).mul(&represent(&g, &b)));
    }

    #[test]
    fn symmetric_involution_is_an_automorphism(a in element_strategy("2,4"), b in element_strategy("2,4")) {
        let g = HeisenbergGroup::new(delta("2,4"));
        let lhs = g.symmetric_involution(&g.multiply(&a, &b).unwrap());
        let rhs = g.multiply(&g.symmetric_involution(&a), &g.symmetric_involution(&b)).unwrap();
        prop_assert_eq!(lhs, rhs);
        let iota = represent_iota(g.delta());
        prop_assert_eq!(iota.mul(&represent(&g, &a)).mul(&iota), represent(&g, &g.symmetric_involution(&a)));
    }

    #[test]
    fn symmetric_lifts_are_inverted_by_the_involution(a in element_strategy("4,4")) {
        let g = HeisenbergGroup::new(delta("4,4"));
        if let Ok(h) = g.symmetric_lift(&a.point) {
            prop_assert_eq!(g.symmetric_involution(&h), g.inverse(&h));
        }
    }
}
