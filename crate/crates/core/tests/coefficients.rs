use num_complex::Complex64;
use proptest::prelude::*;

use newform_core::characters::{enumerate_characters, HeckeCharacter};
use newform_core::coefficients::{
    apply_a, apply_b, apply_b_to, apply_t, sample_newform, twist_coefficients, FormalNewform, IdealTable,
};
use newform_core::error::Error;
use newform_core::field::NumberField;
use newform_core::ideal::{parse_ideal, Ideal};
use newform_core::oracle;

fn k(d: i64) -> NumberField {
    NumberField::new(d).unwrap()
}

fn id(field: &NumberField, s: &str) -> Ideal {
    parse_ideal(field.ring(), s).unwrap()
}

fn primitive_char(field: &NumberField, m: &Ideal, pick: usize) -> HeckeCharacter {
    let mut cs = enumerate_characters(field, m, Some(m), true).unwrap();
    HeckeCharacter::new(cs.remove(pick % cs.len())).unwrap()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

#[test]
fn degree_two_expansion_with_character() {
    let field = k(5);
    let n = id(&field, "(sqrt5)");
    let phi = primitive_char(&field, &n, 0);
    let f = sample_newform(&n, &phi, 3, 11).unwrap();
    assert_eq!(f.coefficient(&Ideal::unit(field.ring())).unwrap(), Complex64::new(1.0, 0.0));
    for q in IdealTable::new(&field, 60).primes() {
        if q.divides(&n) {
            continue;
        }
        let lam = f.eigenvalue(q).unwrap();
        let want = lam * lam - f.character().ideal_value_complex(q) * (q.norm() as f64).powi(2);
        assert!(close(f.coefficient(&q.pow(2)).unwrap(), want, 1e-12), "{q}");
    }
}

#[test]
fn euler_product_oracle_golden_field() {
    let field = k(5);
    let x = 2000;
    let table = IdealTable::new(&field, x);
    for (level, seed) in [("(1)", 1u64), ("(2)", 2), ("(11, w-4)", 3)] {
        let n = id(&field, level);
        let f = sample_newform(&n, &HeckeCharacter::trivial(&field), 2, seed).unwrap();
        let v = f.truncate(&table, x).unwrap();
        let series = oracle::euler_product_coefficients(&f, x);
        assert_eq!(series.len(), v.len());
        for (m, c) in v.entries() {
            assert!(close(c, series[m], 1e-9), "level {level} at {m}: {c} vs {}", series[m]);
        }
    }
}

#[test]
fn truncation_keys_match_enumeration() {
    for d in [1, 2, 5, 13] {
        let field = k(d);
        let table = IdealTable::new(&field, 300);
        let f = sample_newform(&Ideal::unit(field.ring()), &HeckeCharacter::trivial(&field), 2, 0).unwrap();
        for x in [1, 5, 100, 300] {
            let keys: Vec<Ideal> = f.truncate(&table, x).unwrap().entries().map(|(m, _)| m.clone()).collect();
            let mut want = oracle::ideals_up_to(field.ring(), x);
            let mut got = keys.clone();
            want.sort();
            got.sort();
            assert_eq!(got, want, "d = {d}, x = {x}");
        }
    }
    let five = k(5);
    let t = IdealTable::new(&five, 5);
    let norms: Vec<i128> = t.ideals().iter().map(|i| i.norm()).collect();
    assert_eq!(norms, vec![1, 4, 5]);
}

#[test]
fn shift_by_own_index() {
    let field = k(5);
    let table = IdealTable::new(&field, 400);
    let f = sample_newform(&id(&field, "(2)"), &HeckeCharacter::trivial(&field), 2, 8).unwrap();
    let v = f.truncate(&table, 400).unwrap();
    for r in ["(1)", "(2)", "(sqrt5)", "(11, w-4)", "(3)"] {
        let r = id(&field, r);
        let b = apply_b(&v, &r).unwrap();
        assert_eq!(b.get(&r), Some(Complex64::new(1.0, 0.0)));
        for (m, c) in b.entries() {
            match m.div_exact(&r) {
                Some(q) => assert_eq!(c, v.get(&q).unwrap()),
                None => assert_eq!(c, Complex64::new(0.0, 0.0)),
            }
        }
    }
    // B_r reads entries up to x / N(r), so a short input can feed a longer output
    assert!(apply_b_to(&v.truncated(100), &id(&field, "(2)"), 400).is_ok());
    assert!(matches!(
        apply_b_to(&v.truncated(50), &id(&field, "(sqrt5)"), 400),
        Err(Error::InsufficientTruncation { .. })
    ));
}

#[test]
fn annihilator_is_identity_when_coefficient_vanishes() {
    let q = k(1);
    let n = id(&q, "(9)");
    let p = id(&q, "(3)");
    let f = sample_newform(&n, &HeckeCharacter::trivial(&q), 2, 4).unwrap();
    assert_eq!(f.eigenvalue(&p).unwrap(), Complex64::new(0.0, 0.0));
    let table = IdealTable::new(&q, 600);
    let v = f.truncate(&table, 600).unwrap();
    let a = apply_a(&v, &p, f.character(), 2).unwrap();
    assert!(a.max_diff(&v) < 1e-12);
}

#[test]
fn annihilator_zeroes_p_divisible_entries() {
    for (d, level, p) in [(1, "(7)", "(7)"), (5, "(sqrt5)", "(sqrt5)"), (5, "(22)", "(11, w-4)")] {
        let field = k(d);
        let n = id(&field, level);
        let p = id(&field, p);
        let phi = primitive_char(&field, &p, 0).induce(&n).unwrap();
        let f = sample_newform(&n, &phi, 2, 6).unwrap();
        let lam = f.eigenvalue(&p).unwrap();
        assert!(lam.norm() > 0.5);
        let table = IdealTable::new(&field, 800);
        let v = f.truncate(&table, 800).unwrap();
        let a = apply_a(&v, &p, f.character(), 2).unwrap();
        assert_eq!(a.get(&p).unwrap().norm(), 0.0);
        for (m, c) in a.entries() {
            if p.divides(m) {
                assert!(c.norm() < 1e-9, "{m}: {c}");
            } else {
                assert!((c - v.get(m).unwrap()).norm() < 1e-12, "{m}");
            }
        }
    }
}

#[test]
fn twist_round_trip_is_annihilator() {
    let field = k(5);
    let table = IdealTable::new(&field, 800);
    let level = id(&field, "(2)");
    let f = sample_newform(&level, &HeckeCharacter::trivial(&field), 2, 17).unwrap();
    let v = f.truncate(&table, 800).unwrap();
    // (5) carries no primitive extendable character
    let mut seen = 0;
    for m in ["(sqrt5)", "(3)", "(9)", "(7)", "(4)", "(11, w-4)", "(29, w-6)"] {
        let m = id(&field, m);
        for num in enumerate_characters(&field, &m, Some(&m), true).unwrap().into_iter().take(3) {
            let psi = HeckeCharacter::new(num).unwrap();
            let back = twist_coefficients(&twist_coefficients(&v, &psi), &psi.conj());
            let p = &psi.conductor().factor().unwrap()[0].0;
            let lift = f.character().primitive().induce(&level.lcm(psi.conductor())).unwrap();
            let a = apply_a(&v, p, &lift, 2).unwrap();
            assert!(back.max_diff(&a) < 1e-12, "twist by conductor {}", psi.conductor());
            seen += 1;
        }
    }
    assert!(seen >= 12, "{seen}");
}

#[test]
fn eigentwist_commutes() {
    let q = k(1);
    let table = IdealTable::new(&q, 800);
    let n = id(&q, "(3)");
    let phi = primitive_char(&q, &n, 0);
    let f = sample_newform(&n, &phi, 2, 2).unwrap();
    let v = f.truncate(&table, 800).unwrap();
    let psi = primitive_char(&q, &id(&q, "(5)"), 1);
    let w = twist_coefficients(&v, &psi);
    let chi2 = psi.pow(2).mul(f.character()).unwrap();
    for r in [2, 3, 7, 11, 13] {
        let r = Ideal::from_int(q.ring(), r);
        let y = 800 / r.norm() as u64;
        let lhs = apply_t(&w, &r, &chi2, 2, y).unwrap();
        let rhs = twist_coefficients(&apply_t(&v, &r, f.character(), 2, y).unwrap(), &psi)
            .scale(psi.ideal_value_complex(&r));
        assert!(lhs.max_diff(&rhs) < 1e-12);
    }
}

#[test]
fn explicit_eigenvalues_are_required() {
    let q = k(1);
    let n = id(&q, "(5)");
    let f = FormalNewform::new(&n, &HeckeCharacter::trivial(&q), 2, Default::default()).unwrap();
    assert!(matches!(f.coefficient(&id(&q, "(2)")), Err(Error::MissingEigenvalue(_))));
    assert!(matches!(
        FormalNewform::new(&n, &HeckeCharacter::trivial(&q), 1, Default::default()),
        Err(Error::InvalidInput(_))
    ));
}

fn arb_form() -> impl Strategy<Value = (i64, usize, usize, u64)> {
    (prop::sample::select(vec![1i64, 2, 5, 13]), 0usize..40, 0usize..1000, any::<u64>())
}

fn build(d: i64, li: usize, ci: usize, seed: u64) -> FormalNewform {
    let field = k(d);
    let levels = IdealTable::new(&field, 40);
    let n = levels.ideals()[li % levels.ideals().len()].clone();
    let cs = enumerate_characters(&field, &n, None, true).unwrap();
    let phi = HeckeCharacter::new(cs[ci % cs.len()].clone()).unwrap();
    sample_newform(&n, &phi, 2, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplicative_on_coprime_pairs((d, li, ci, seed) in arb_form(), i in 0usize..500, j in 0usize..500) {
        let f = build(d, li, ci, seed);
        let t = IdealTable::new(f.field(), 2000);
        let v = f.truncate(&t, 2000).unwrap();
        let ids = IdealTable::new(f.field(), 45);
        let a = &ids.ideals()[i % ids.ideals().len()];
        let b = &ids.ideals()[j % ids.ideals().len()];
        prop_assume!(a.is_coprime(b));
        let ab = v.get(&a.mul(b)).unwrap();
        let want = v.get(a).unwrap() * v.get(b).unwrap();
        prop_assert!((ab - want).norm() < 1e-9, "{} {} {}", a, b, (ab - want).norm());
    }

    #[test]
    fn eigen_property((d, li, ci, seed) in arb_form(), qi in 0usize..100) {
        let f = build(d, li, ci, seed);
        let t = IdealTable::new(f.field(), 1000);
        let v = f.truncate(&t, 1000).unwrap();
        let ps = IdealTable::new(f.field(), 50);
        let q = &ps.primes()[qi % ps.primes().len()];
        let y = 1000 / q.norm() as u64;
        let tq = apply_t(&v, q, f.character(), 2, y).unwrap();
        let want = v.truncated(y).scale(f.eigenvalue(q).unwrap());
        prop_assert!(tq.max_diff(&want) < 1e-9);
    }

    #[test]
    fn bad_primes_reverified((d, li, ci, seed) in arb_form(), k0 in 2u32..6) {
        let f = build(d, li, ci, seed);
        let g = sample_newform(f.level(), f.character(), k0, seed).unwrap();
        prop_assert!(g.check_bad_primes(1e-9).unwrap().is_empty());
        for q in IdealTable::new(f.field(), 200).primes() {
            if !q.divides(f.level()) {
                let bound = 2.0 * (q.norm() as f64).powf((k0 as f64 - 1.0) / 2.0);
                prop_assert!(g.eigenvalue(q).unwrap().norm() <= bound + 1e-9);
            }
        }
    }
}
