use std::collections::HashSet;

use num_complex::Complex64;
use proptest::prelude::*;
use qmem_core::dense::pauli_matrix;
use qmem_core::pauli::in_group;
use qmem_core::routing::{optimal_routes, prefix_operators};
use qmem_core::{catalog_get, optimize_route, score_route, ErrorClass, PauliString, StabilizerCode, Strategy as RouteStrategy};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    let mask = (1u64 << n) - 1;
    (any::<u64>(), any::<u64>(), 0u8..4)
        .prop_map(move |(x, z, ph)| PauliString::from_masks(n, x & mask, z & mask, ph).unwrap())
}

proptest! {
    #[test]
    fn product_matches_matrix_product(a in pauli(3), b in pauli(3)) {
        let ab = a.multiply(&b).unwrap();
        let dense = pauli_matrix(&a).mul(&pauli_matrix(&b));
        prop_assert!(pauli_matrix(&ab).max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn product_is_associative(a in pauli(6), b in pauli(6), c in pauli(6)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn unsigned_strings_square_to_identity(a in pauli(8)) {
        let u = a.unsigned();
        prop_assert_eq!(u.multiply(&u).unwrap(), PauliString::identity(8).unwrap());
    }

    #[test]
    fn commutation_is_symmetric_and_matches_products(a in pauli(6), b in pauli(6)) {
        let c = a.commutes(&b).unwrap();
        prop_assert_eq!(c, b.commutes(&a).unwrap());
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        prop_assert_eq!(c, ab == ba);
        if !c {
            prop_assert_eq!(ab, ba.negated());
        }
    }

    #[test]
    fn text_round_trip(a in pauli(9)) {
        let u = a.unsigned();
        prop_assert_eq!(PauliString::parse(&u.to_string(), 9).unwrap(), u);
    }

    #[test]
    fn membership_matches_enumeration(
        gens in proptest::collection::vec(pauli(4), 0..5),
        p in pauli(4),
    ) {
        let mut span: HashSet<(u64, u64)> = HashSet::new();
        for subset in 0u32..(1 << gens.len()) {
            let mut acc = PauliString::identity(4).unwrap();
            for (i, g) in gens.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    acc = acc.multiply(g).unwrap();
                }
            }
            span.insert((acc.x_bits(), acc.z_bits()));
        }
        prop_assert_eq!(in_group(&p, &gens).unwrap(), span.contains(&(p.x_bits(), p.z_bits())));
    }
}

fn gauge_group(code: &StabilizerCode) -> HashSet<(u64, u64)> {
    let mut group = HashSet::new();
    group.insert((0u64, 0u64));
    let gens: Vec<&PauliString> = code.stabilizers.iter().chain(&code.gauge_generators).collect();
    loop {
        let mut grown = group.clone();
        for &(x, z) in &group {
            for g in &gens {
                grown.insert((x ^ g.x_bits(), z ^ g.z_bits()));
            }
        }
        if grown.len() == group.len() {
            return group;
        }
        group = grown;
    }
}

fn brute_class(code: &StabilizerCode, group: &HashSet<(u64, u64)>, p: &PauliString) -> &'static str {
    if group.contains(&(p.x_bits(), p.z_bits())) {
        return "HARMLESS";
    }
    let fixable = code
        .correctable_errors
        .iter()
        .any(|e| group.contains(&(p.x_bits() ^ e.x_bits(), p.z_bits() ^ e.z_bits())));
    if fixable {
        "CORRECTABLE"
    } else {
        "UNCORRECTABLE"
    }
}

fn low_weight(n: usize, max_weight: usize, f: &mut impl FnMut(PauliString)) {
    fn rec(n: usize, q: usize, left: usize, x: u64, z: u64, f: &mut impl FnMut(PauliString)) {
        if q == n {
            f(PauliString::from_masks(n, x, z, 0).unwrap());
            return;
        }
        rec(n, q + 1, left, x, z, f);
        if left > 0 {
            let b = 1u64 << q;
            rec(n, q + 1, left - 1, x | b, z, f);
            rec(n, q + 1, left - 1, x, z | b, f);
            rec(n, q + 1, left - 1, x | b, z | b, f);
        }
    }
    rec(n, 0, max_weight, 0, 0, f);
}

#[test]
fn bacon_shor_gauge_group_has_4096_elements() {
    let code = catalog_get("bacon_shor_nine").unwrap();
    assert_eq!(gauge_group(&code).len(), 1 << 12);
}

#[test]
fn classification_matches_brute_force() {
    for name in ["bacon_shor_nine", "five_qubit", "bitflip_three"] {
        let code = catalog_get(name).unwrap();
        let group = gauge_group(&code);
        let mut checked = 0;
        low_weight(code.n_qubits, 4, &mut |p| {
            let got = code.classify_operator(&p).unwrap();
            assert_eq!(got.tag(), brute_class(&code, &group, &p), "{name} {p}");
            if let ErrorClass::Correctable { error, remainder } = got {
                let back = error.multiply(&remainder).unwrap();
                assert_eq!((back.x_bits(), back.z_bits()), (p.x_bits(), p.z_bits()));
            }
            checked += 1;
        });
        assert!(checked > 0);
    }
}

#[test]
fn reversal_keeps_the_full_generator_harmless() {
    let code = catalog_get("bacon_shor_nine").unwrap();
    for m in &code.stabilizers {
        let order = m.support();
        let fwd = prefix_operators(m, &order).unwrap();
        let mut rev_order = order.clone();
        rev_order.reverse();
        let rev = prefix_operators(m, &rev_order).unwrap();
        // Prefix j of the reversed order is the complement of prefix (w - j) of
        // the forward order within the generator.
        let w = order.len();
        for j in 1..w {
            let comp = fwd[w - j - 1].multiply(&rev[j - 1]).unwrap();
            assert_eq!(comp.unsigned(), m.unsigned());
        }
        assert_eq!(fwd[w - 1].unsigned(), m.unsigned());
        assert_eq!(rev[w - 1].unsigned(), m.unsigned());
    }
}

#[test]
fn exhaustive_beats_random_orders_and_greedy() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["five_qubit", "steane_seven", "bacon_shor_nine"] {
        let code = catalog_get(name).unwrap();
        for m in &code.stabilizers {
            let best = optimize_route(&code, m, RouteStrategy::Exhaustive).unwrap();
            let greedy = optimize_route(&code, m, RouteStrategy::Greedy).unwrap();
            assert!(best.counts.cost() <= greedy.counts.cost(), "{name} {m}");
            assert_eq!(score_route(&code, m, &best.order).unwrap().counts, best.counts);
            let mut order = m.support();
            for _ in 0..100 {
                order.shuffle(&mut rng);
                let r = score_route(&code, m, &order).unwrap();
                assert!(best.counts.cost() <= r.counts.cost(), "{name} {m} {order:?}");
            }
        }
    }
}

#[test]
fn last_prefix_is_always_harmless() {
    for name in qmem_core::CATALOG {
        let code = catalog_get(name).unwrap();
        let routes = optimal_routes(&code, RouteStrategy::Exhaustive).unwrap();
        for (m, order) in code.stabilizers.iter().zip(&routes) {
            let r = score_route(&code, m, order).unwrap();
            assert_eq!(r.per_prefix.last().unwrap().1, ErrorClass::Harmless);
            assert!(r.counts.harmless >= 1);
        }
    }
}

#[test]
fn pauli_matrix_is_unitary() {
    let p = PauliString::parse("X1Y2Z3", 3).unwrap().with_phase(1);
    let m = pauli_matrix(&p);
    let id = qmem_core::dense::DenseMatrix::identity(8);
    assert!(m.mul(&m.adjoint()).max_abs_diff(&id) < 1e-12);
    assert_eq!(m.trace(), Complex64::new(0.0, 0.0));
}
