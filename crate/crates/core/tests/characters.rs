use std::collections::HashSet;

use newform_core::characters::{
    angle_to_complex, conductor_exponent, decompose_character, enumerate_characters, gauss_sum, Angle,
    HeckeCharacter, UnitGroup,
};
use newform_core::coefficients::IdealTable;
use newform_core::field::{FieldElement, NumberField};
use newform_core::ideal::{parse_ideal, Ideal};
use newform_core::oracle;
use proptest::prelude::*;

fn k(d: i64) -> NumberField {
    NumberField::new(d).unwrap()
}

fn small_moduli(field: &NumberField, x: u64) -> Vec<Ideal> {
    IdealTable::new(field, x).ideals().to_vec()
}

#[test]
fn generator_orders_are_exact() {
    for d in [1, 2, 5, 13] {
        let field = k(d);
        let ring = field.ring();
        for m in small_moduli(&field, 80) {
            let g = UnitGroup::new(&field, &m).unwrap();
            for (x, &o) in g.generator_coords().iter().zip(g.orders()) {
                assert_eq!(oracle::order_mod(ring, &m, *x), o, "generator {x:?} mod {m}");
            }
        }
    }
}

#[test]
fn products_stay_in_the_dual_group() {
    for d in [1, 5] {
        let field = k(d);
        for m in small_moduli(&field, 40) {
            let chars = enumerate_characters(&field, &m, None, false).unwrap();
            let set: HashSet<_> = chars.iter().cloned().collect();
            assert_eq!(set.len(), chars.len());
            for a in &chars {
                for b in chars.iter().take(6) {
                    assert!(set.contains(&a.mul(b).unwrap()), "mod {m}");
                }
            }
        }
    }
}

#[test]
fn conductor_restriction_is_primitive() {
    for d in [1, 5] {
        let field = k(d);
        for m in small_moduli(&field, 100) {
            for chi in enumerate_characters(&field, &m, None, false).unwrap() {
                let c = chi.conductor();
                assert!(c.divides(&m));
                let p = chi.primitive();
                assert_eq!(p.modulus(), &c);
                assert!(p.is_primitive());
                assert_eq!(p.induce(&m).unwrap(), chi);
                for mid in m.divisors().unwrap() {
                    match chi.restrict(&mid) {
                        Ok(r) => {
                            assert!(c.divides(&mid));
                            assert_eq!(r.induce(&m).unwrap(), chi);
                        }
                        Err(_) => assert!(!c.divides(&mid)),
                    }
                }
            }
        }
    }
}

/// `e(Psi^2 Phi) <= max(e(Psi^2), e(Phi))`, with equality when the two differ.
#[test]
fn conductor_exponent_of_products() {
    for d in [1, 5] {
        let field = k(d);
        for p in IdealTable::new(&field, 13).primes() {
            for nu in 1..=3u32 {
                let m = p.pow(nu);
                if m.norm() > 400 {
                    continue;
                }
                let chars = enumerate_characters(&field, &m, None, false).unwrap();
                for psi in &chars {
                    let e_psi2 = psi.pow(2).exponential_conductor(p);
                    assert!(e_psi2 <= psi.exponential_conductor(p));
                    for phi in &chars {
                        let e_phi = phi.exponential_conductor(p);
                        assert_eq!(phi.conj().exponential_conductor(p), e_phi);
                        let e = psi.pow(2).mul(phi).unwrap().exponential_conductor(p);
                        assert!(e <= e_psi2.max(e_phi));
                        if e_psi2 != e_phi {
                            assert_eq!(e, e_psi2.max(e_phi), "mod {m}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn golden_field_mod_two_times_root_five() {
    let field = k(5);
    let r = field.ring();
    let two = parse_ideal(r, "(2)").unwrap();
    let s5 = parse_ideal(r, "(sqrt5)").unwrap();
    let m = two.mul(&s5);
    let units = oracle::units(&m);
    for chi in enumerate_characters(&field, &m, None, false).unwrap() {
        let (a, b) = decompose_character(&chi, &two, &s5).unwrap();
        for &x in &units {
            let s = a.value(x).unwrap() + b.value(x).unwrap() - chi.value(x).unwrap();
            assert!(s.is_integer());
        }
    }
}

#[test]
fn extendable_counts_match_oracle() {
    for d in [1, 2, 5, 13] {
        let field = k(d);
        for p in IdealTable::new(&field, 30).primes() {
            for e in 1..=3u32 {
                let m = p.pow(e);
                if m.norm() > 2000 {
                    continue;
                }
                let n = enumerate_characters(&field, &m, Some(&m), true).unwrap().len();
                assert_eq!(n, oracle::extendable_exact_count(&field, p, e), "d = {d}, modulus {m}");
            }
        }
    }
}

#[test]
fn gauss_sums_over_q_match_classical_sums() {
    let field = k(1);
    for f in [3i128, 4, 7, 8, 9, 16, 25, 27, 49] {
        let m = Ideal::from_int(field.ring(), f);
        for chi in enumerate_characters(&field, &m, Some(&m), true).unwrap() {
            let want = oracle::dirichlet_gauss_sum(f as i64, |a| chi.value((a as i128, 0)));
            let got = gauss_sum(&HeckeCharacter::new(chi).unwrap()).unwrap().value();
            assert!((want - got).norm() < 1e-9, "mod {f}");
        }
    }
}

#[test]
fn legendre_sums_over_q() {
    for p in [3i64, 5, 7, 11, 13] {
        let tau = oracle::dirichlet_gauss_sum(p, |a| oracle::legendre(a, p));
        let m = Ideal::from_int(k(1).ring(), p as i128);
        let chi = enumerate_characters(&k(1), &m, Some(&m), true)
            .unwrap()
            .into_iter()
            .find(|c| c.order() == 2)
            .unwrap();
        let got = gauss_sum(&HeckeCharacter::new(chi).unwrap()).unwrap().value();
        assert!((tau - got).norm() < 1e-9, "p = {p}");
    }
}

fn hecke_characters(field: &NumberField, x: u64) -> Vec<HeckeCharacter> {
    let mut out = Vec::new();
    for m in small_moduli(field, x) {
        for chi in enumerate_characters(field, &m, None, true).unwrap() {
            out.push(HeckeCharacter::new(chi).unwrap());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// `Phi^*((alpha)) = conj(phi(alpha))` for totally positive `alpha`, and the
    /// value does not change under `alpha -> alpha eps^2`.
    #[test]
    fn ideal_value_is_generator_independent(
        d in prop::sample::select(vec![2i64, 5, 13]),
        idx in 0usize..10_000,
        (a, b) in (-25i128..25, -25i128..25),
    ) {
        let field = k(d);
        let chars = hecke_characters(&field, 30);
        let phi = &chars[idx % chars.len()];
        let r = field.ring();
        let alpha = FieldElement::from_ints(r, a, b);
        prop_assume!(!alpha.is_zero());
        let alpha = alpha.mul(&alpha);
        let u2 = field.totally_positive_unit();
        let beta = alpha.mul(&u2);
        let i = Ideal::principal(&alpha);
        prop_assert_eq!(&Ideal::principal(&beta), &i);
        let v = phi.ideal_value(&i);
        match phi.numerical().value_of(&alpha) {
            None => prop_assert!(v.is_none()),
            Some(x) => {
                let y = phi.numerical().value_of(&beta).unwrap();
                prop_assert!((x - y).is_integer());
                prop_assert!((v.unwrap() + x).is_integer());
            }
        }
    }

    #[test]
    fn ideal_character_is_multiplicative(
        d in prop::sample::select(vec![1i64, 5]),
        idx in 0usize..10_000,
        i in 0usize..200,
        j in 0usize..200,
    ) {
        let field = k(d);
        let chars = hecke_characters(&field, 25);
        let phi = &chars[idx % chars.len()];
        let t = IdealTable::new(&field, 60);
        let (a, b) = (&t.ideals()[i % t.ideals().len()], &t.ideals()[j % t.ideals().len()]);
        let lhs = phi.ideal_value(&a.mul(b));
        match (phi.ideal_value(a), phi.ideal_value(b)) {
            (Some(x), Some(y)) => prop_assert!((lhs.unwrap() - x - y).is_integer()),
            _ => prop_assert!(lhs.is_none()),
        }
        let z = angle_to_complex(lhs.unwrap_or(Angle::new(0, 1)));
        prop_assert!((z.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn primitive_gauss_magnitude(d in prop::sample::select(vec![1i64, 2, 5, 13]), idx in 0usize..10_000) {
        let field = k(d);
        let mut chars = Vec::new();
        for p in IdealTable::new(&field, 50).primes() {
            for e in 1..=2 {
                let m = p.pow(e);
                if m.norm() <= 200 {
                    chars.extend(enumerate_characters(&field, &m, Some(&m), true).unwrap());
                }
            }
        }
        let psi = HeckeCharacter::new(chars[idx % chars.len()].clone()).unwrap();
        let g = gauss_sum(&psi).unwrap();
        prop_assert!((g.value().norm_sqr() - psi.conductor().norm() as f64).abs() < 1e-9);
        prop_assert_eq!(conductor_exponent(psi.conductor(), &psi.conductor().factor().unwrap()[0].0) as usize >= 1, true);
    }
}
