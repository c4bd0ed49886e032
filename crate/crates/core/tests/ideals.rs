use newform_core::coefficients::IdealTable;
use newform_core::error::Error;
use newform_core::field::{FieldElement, NumberField};
use newform_core::ideal::{crt_solve, parse_ideal, Ideal};
use newform_core::oracle;
use proptest::prelude::*;

const FIELDS: [i64; 4] = [1, 2, 5, 13];

fn field_and_ideal() -> impl Strategy<Value = (NumberField, Ideal)> {
    (prop::sample::select(FIELDS.to_vec()), -40i128..40, -40i128..40, -40i128..40, -40i128..40)
        .prop_filter_map("zero ideal", |(d, a, b, c, e)| {
            let k = NumberField::new(d).unwrap();
            let r = k.ring();
            let (b, e) = if r.degree() == 1 { (0, 0) } else { (b, e) };
            let i = Ideal::from_int_generators(r, &[(a, b), (c, e)]).ok()?;
            Some((k, i))
        })
}

fn ideal_in(k: &NumberField) -> impl Strategy<Value = Ideal> {
    let r = k.ring();
    (-40i128..40, -40i128..40).prop_filter_map("zero ideal", move |(a, b)| {
        let b = if r.degree() == 1 { 0 } else { b };
        Ideal::from_int_generators(r, &[(a, b)]).ok()
    })
}

#[test]
fn field_constructor_errors() {
    assert!(matches!(NumberField::new(3), Err(Error::NarrowClassNumberNotOne(3))));
    assert!(matches!(NumberField::new(4), Err(Error::NotSquarefree(4))));
    for d in FIELDS {
        let k = NumberField::new(d).unwrap();
        assert_eq!(k.different().norm(), k.discriminant() as i128, "d = {d}");
        if let Some(u) = k.fundamental_unit() {
            assert_eq!(u.norm().numer().to_string(), "-1");
        }
    }
}

#[test]
fn ideal_enumeration_matches_oracle() {
    for d in FIELDS {
        let k = NumberField::new(d).unwrap();
        let table = IdealTable::new(&k, 300);
        assert_eq!(table.ideals(), oracle::ideals_up_to(k.ring(), 300).as_slice(), "d = {d}");
    }
}

#[test]
fn zero_ideal_has_no_generator() {
    let k = NumberField::new(5).unwrap();
    assert!(matches!(
        Ideal::from_generators(k.ring(), &[FieldElement::zero(k.ring())]),
        Err(Error::ZeroIdeal)
    ));
}

#[test]
fn crt_golden_membership() {
    let k = NumberField::new(5).unwrap();
    let r = k.ring();
    let two = parse_ideal(r, "(2)").unwrap();
    let s5 = parse_ideal(r, "(sqrt5)").unwrap();
    let x = crt_solve(&[(FieldElement::from_ints(r, 0, 1), two.clone()), (FieldElement::zero(r), s5.clone())]).unwrap();
    assert!(two.contains_element(&x.sub(&FieldElement::from_ints(r, 0, 1))));
    assert!(s5.contains_element(&x));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_is_multiplicative((k, i) in field_and_ideal(), (a, b) in (-30i128..30, -30i128..30)) {
        let b = if k.degree() == 1 { 0 } else { b };
        prop_assume!((a, b) != (0, 0));
        let j = Ideal::from_int_generators(k.ring(), &[(a, b)]).unwrap();
        prop_assert_eq!(i.mul(&j).norm(), i.norm() * j.norm());
        prop_assert_eq!(i.add(&j).mul(&i.intersect(&j)), i.mul(&j));
    }

    #[test]
    fn factorisation_recomposes((_k, i) in field_and_ideal()) {
        let fac = i.factor().unwrap();
        let mut prod = Ideal::unit(i.ring());
        for (p, e) in &fac {
            prop_assert!(p.is_prime());
            prop_assert!(*e >= 1);
            prop_assert_eq!(i.ord(p).unwrap(), *e as i32);
            prod = prod.mul(&p.pow(*e));
        }
        prop_assert_eq!(prod, i);
    }

    #[test]
    fn totally_positive_generator_generates((k, i) in field_and_ideal()) {
        let g = i.totally_positive_generator(&k).unwrap();
        prop_assert!(g.is_totally_positive());
        prop_assert_eq!(&Ideal::principal(&g), &i);
        prop_assert_eq!(i.totally_positive_generator(&k).unwrap(), g);
    }

    #[test]
    fn text_form_round_trips((k, i) in field_and_ideal(), (a, b) in (1i128..20, 0i128..5)) {
        prop_assert_eq!(parse_ideal(k.ring(), &i.to_string()).unwrap(), i.clone());
        // fractional ideals too
        let j = Ideal::from_int(k.ring(), a).inv().mul(&i.pow(b as u32));
        prop_assert_eq!(parse_ideal(k.ring(), &j.to_string()).unwrap(), j);
    }

    #[test]
    fn crt_solution_satisfies_residues(
        (k, i) in field_and_ideal(),
        r1 in (-50i128..50, -50i128..50),
        r2 in (-50i128..50, -50i128..50),
        (a, b) in (-30i128..30, -30i128..30),
    ) {
        let ring = k.ring();
        let deg1 = ring.degree() == 1;
        let b = if deg1 { 0 } else { b };
        prop_assume!((a, b) != (0, 0));
        let j = Ideal::from_int_generators(ring, &[(a, b)]).unwrap();
        prop_assume!(i.is_coprime(&j));
        let e = |(x, y): (i128, i128)| FieldElement::from_ints(ring, x, if deg1 { 0 } else { y });
        let x = crt_solve(&[(e(r1), i.clone()), (e(r2), j.clone())]).unwrap();
        prop_assert!(i.contains_element(&x.sub(&e(r1))));
        prop_assert!(j.contains_element(&x.sub(&e(r2))));
    }

    #[test]
    fn gcd_and_divisibility(k in prop::sample::select(FIELDS.to_vec()).prop_map(|d| NumberField::new(d).unwrap()), seed in 0u64..1000) {
        let table = IdealTable::new(&k, 60);
        let ideals = table.ideals();
        let i = &ideals[(seed as usize) % ideals.len()];
        let j = &ideals[(seed as usize * 7 + 3) % ideals.len()];
        let g = i.add(j);
        prop_assert!(g.divides(i) && g.divides(j));
        prop_assert_eq!(i.divides(j), j.div_exact(i).is_some());
        for d in i.divisors().unwrap() {
            prop_assert!(d.divides(i));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ord_matches_factorisation_in_golden_field(i in ideal_in(&NumberField::new(5).unwrap())) {
        for (p, e) in i.factor().unwrap() {
            prop_assert_eq!(i.ord(&p).unwrap(), e as i32);
        }
    }
}
