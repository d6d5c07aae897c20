use std::collections::BTreeMap;

use proptest::prelude::*;
use yamabe_core::algebra::{GradedElement, Generator, RingContext};
use yamabe_core::charclass::{ahat_genus, ahat_polynomials, Partition, PontryaginData};
use yamabe_core::rational::{int, Rational};

fn numbers(d: u32) -> impl Strategy<Value = BTreeMap<Partition, i64>> {
    let parts = Partition::all_of(d);
    prop::collection::vec(-200i64..=200, parts.len()).prop_map(move |vals| parts.iter().cloned().zip(vals).collect())
}

/// Pontryagin numbers of `B1 × B2` from those of the factors, via
/// `p(B1×B2) = p(B1)·p(B2)` expanded in classes `p_i` (first factor) and
/// `q_i` (second factor).
fn product_numbers(b1: &PontryaginData, b2: &PontryaginData) -> BTreeMap<Partition, i64> {
    let (d1, d2) = (b1.quaternionic_degree(), b2.quaternionic_degree());
    let d = d1 + d2;
    let gens = (1..=d1)
        .map(|i| Generator::new(format!("p{i}"), 4 * i))
        .chain((1..=d2).map(|i| Generator::new(format!("q{i}"), 4 * i)));
    let ctx = RingContext::new(gens, 4 * d).unwrap();
    let class = |prefix: &str, i: u32, max: u32| -> GradedElement {
        if i == 0 {
            GradedElement::one(&ctx)
        } else if i > max {
            GradedElement::zero(&ctx)
        } else {
            GradedElement::generator(&ctx, &format!("{prefix}{i}")).unwrap()
        }
    };
    let mut out = BTreeMap::new();
    for part in Partition::all_of(d) {
        let mut prod = GradedElement::one(&ctx);
        for &i in part.parts() {
            let mut total = GradedElement::zero(&ctx);
            for a in 0..=i {
                total = total.add(&class("p", a, d1).mul(&class("q", i - a, d2)).unwrap()).unwrap();
            }
            prod = prod.mul(&total).unwrap();
        }
        let mut value = Rational::from_integer(0.into());
        for (m, c) in prod.terms() {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for (e, g) in m.exponents().iter().zip(ctx.generators()) {
                let idx: u32 = g.name[1..].parse().unwrap();
                let target = if g.name.starts_with('p') { &mut left } else { &mut right };
                target.extend(std::iter::repeat_n(idx, *e as usize));
            }
            let (l, r) = (Partition::new(left), Partition::new(right));
            if l.weight() != d1 || r.weight() != d2 {
                continue;
            }
            let n1 = if d1 == 0 { 1 } else { b1.number(&l).unwrap() };
            let n2 = if d2 == 0 { 1 } else { b2.number(&r).unwrap() };
            value += c * int(n1 * n2);
        }
        assert!(value.is_integer());
        out.insert(part, value.to_integer().try_into().unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ahat_is_multiplicative(
        (d1, d2, n1, n2) in (1u32..=2, 1u32..=2)
            .prop_flat_map(|(d1, d2)| (Just(d1), Just(d2), numbers(d1), numbers(d2)))
    ) {
        let b1 = PontryaginData::new(4 * d1, true, n1).unwrap();
        let b2 = PontryaginData::new(4 * d2, true, n2).unwrap();
        let prod = PontryaginData::new(4 * (d1 + d2), true, product_numbers(&b1, &b2)).unwrap();
        let lhs = ahat_genus(&prod).unwrap().value;
        let rhs = ahat_genus(&b1).unwrap().value * ahat_genus(&b2).unwrap().value;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ahat_is_linear_in_numbers(
        (d, n) in (1u32..=3).prop_flat_map(|d| (Just(d), numbers(d))),
        k in -5i64..=5,
    ) {
        let base = PontryaginData::new(4 * d, true, n).unwrap();
        prop_assert_eq!(
            ahat_genus(&base.scaled(k)).unwrap().value,
            ahat_genus(&base).unwrap().value * int(k)
        );
    }

    #[test]
    fn partition_keys_round_trip(parts in prop::collection::vec(1u32..=4, 1..5)) {
        let p = Partition::new(parts);
        let back: Partition = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn k3_squared_is_four() {
    let k3: PontryaginData = "4:spin:p1=-48".parse().unwrap();
    let prod = PontryaginData::new(8, true, product_numbers(&k3, &k3)).unwrap();
    assert_eq!(prod.number(&"p1^2".parse().unwrap()), Some(2 * 48 * 48));
    assert_eq!(prod.number(&"p2".parse().unwrap()), Some(48 * 48));
    assert_eq!(ahat_genus(&prod).unwrap().value, int(4));
}

#[test]
fn tables_are_stable_under_extension() {
    let small = ahat_polynomials(3);
    let large = ahat_polynomials(5);
    for (p, c) in small.coefficients() {
        assert_eq!(&large.coefficient(p), c);
    }
}
