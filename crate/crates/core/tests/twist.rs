use proptest::prelude::*;

use newform_core::characters::{enumerate_characters, HeckeCharacter};
use newform_core::coefficients::{sample_newform, twist_coefficients, IdealTable};
use newform_core::error::Error;
use newform_core::field::NumberField;
use newform_core::ideal::{parse_ideal, Ideal};
use newform_core::oracle;
use newform_core::twist::{
    classify_characters, classify_regime, decompose_primitive, p_primitivity_report, separating_ideal,
    LevelExactness, NewformStatus, Regime, RegimeInput,
};

fn k(d: i64) -> NumberField {
    NumberField::new(d).unwrap()
}

fn id(field: &NumberField, s: &str) -> Ideal {
    parse_ideal(field.ring(), s).unwrap()
}

fn input(p: &Ideal, n0: &Ideal, nu: u32, e_phi: u32, e_psi: u32, conjugate: bool, coprime: bool) -> RegimeInput {
    RegimeInput { p: p.clone(), nu, e_phi, e_psi, n0: n0.clone(), conjugate, coprime }
}

/// A character modulo `level` with exact exponent `e` at `p` and trivial elsewhere.
fn char_with_exponent(field: &NumberField, level: &Ideal, p: &Ideal, e: u32) -> Option<HeckeCharacter> {
    let m = p.pow(e);
    let num = enumerate_characters(field, &m, Some(&m), true).ok()?.into_iter().next()?;
    HeckeCharacter::new(num).ok()?.induce(level).ok()
}

#[test]
fn regime_examples() {
    let q = k(1);
    let p = id(&q, "(5)");
    let one = Ideal::unit(q.ring());
    let r = classify_regime(&input(&p, &one, 3, 1, 1, false, false)).unwrap();
    assert_eq!(r.regime, Regime::SmallTwist);
    assert_eq!((r.predicted_level.clone(), r.level_exactness, r.newform_status), (p.pow(3), LevelExactness::Exact, NewformStatus::Newform));

    let n0 = id(&q, "(6)");
    let r = classify_regime(&input(&p, &n0, 2, 2, 2, true, false)).unwrap();
    assert_eq!(r.predicted_level, p.pow(3).mul(&n0));
    assert_eq!(r.newform_status, NewformStatus::NotNewform);

    let r = classify_regime(&input(&p, &n0, 4, 2, 0, false, true)).unwrap();
    assert_eq!(r.predicted_level, r.level);
    assert_eq!(r.level_exactness, LevelExactness::Exact);

    // the boundary e(Psi) = nu/2 gets only the lcm bound
    let r = classify_regime(&input(&p, &one, 4, 1, 2, false, false)).unwrap();
    assert_eq!(r.regime, Regime::LcmBoundOnly);
    assert_eq!(r.predicted_level, r.lcm_bound);
    assert_eq!(r.newform_status, NewformStatus::Undetermined);

    assert!(matches!(
        classify_regime(&input(&p, &id(&q, "(10)"), 2, 1, 1, false, false)),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn concrete_characters_classify_consistently() {
    let field = k(5);
    let p = id(&field, "(11, w-4)");
    let n0 = id(&field, "(2)");
    for nu in 1..=3u32 {
        let level = p.pow(nu).mul(&n0);
        for phi in enumerate_characters(&field, &level, None, true).unwrap().into_iter().take(12) {
            let phi = HeckeCharacter::new(phi).unwrap();
            for e in 0..=nu {
                let m = p.pow(e);
                for psi in enumerate_characters(&field, &m, Some(&m), true).unwrap().into_iter().take(3) {
                    let psi = HeckeCharacter::new(psi).unwrap();
                    let r = classify_characters(&phi, &psi, &p).unwrap();
                    r.check().unwrap();
                    let c = r.predicted_character.conductor.clone().unwrap();
                    let e_chi = c.ord(&p).unwrap() as u32;
                    assert!(e_chi >= r.predicted_character.e_p_min && e_chi <= r.predicted_character.e_p_max);
                    if r.regime == Regime::SmallTwist {
                        // the twist has the predicted level, so C(p) must vanish there
                        let f = sample_newform(&level, &phi, 2, nu as u64).unwrap();
                        let t = IdealTable::new(&field, 300);
                        let w = twist_coefficients(&f.truncate(&t, 300).unwrap(), &psi);
                        assert!(nu >= 2 && e_chi < nu);
                        assert_eq!(w.get(&p).unwrap().norm(), 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn decomposition_counts_match_enumeration_oracle() {
    for (d, p) in [(1, "(5)"), (1, "(7)"), (5, "(11, w-4)"), (5, "(2)"), (2, "(7, w-3)")] {
        let field = k(d);
        let p = id(&field, p);
        for nu in 3..=4u32 {
            let level = p.pow(nu);
            if level.norm() > 20_000 {
                continue;
            }
            let e_phi = nu - 1;
            let Some(phi) = char_with_exponent(&field, &level, &p, e_phi) else { continue };
            let s = decompose_primitive(&level, &phi, &p).unwrap();
            assert_eq!(s.len(), oracle::extendable_exact_count(&field, &p, 1), "d = {d}, {p}^{nu}");
            for (i, a) in s.iter().enumerate() {
                assert!(a.p_primitive);
                assert_eq!(a.psi.conductor(), &p);
                assert!(a.inner_level.divides(&level) && a.inner_level != level);
                for b in &s[i + 1..] {
                    assert_ne!(a.psi, b.psi);
                    let bound = p.pow(nu).norm() as u64;
                    assert!(separating_ideal(&a.psi, &b.psi, &field, bound).is_some());
                }
            }
        }
    }
}

#[test]
fn decomposition_over_q_mod_125() {
    let q = k(1);
    let p = id(&q, "(5)");
    let n0 = id(&q, "(3)");
    let level = p.pow(3).mul(&n0);
    let phi = char_with_exponent(&q, &level, &p, 2).unwrap();
    let s = decompose_primitive(&level, &phi, &p).unwrap();
    assert_eq!(s.len(), 3);
    for x in &s {
        assert_eq!(x.inner_level, p.pow(2).mul(&n0));
        assert_eq!(x.twisting, x.psi.conj());
    }
    let wrong = char_with_exponent(&q, &level, &p, 1).unwrap();
    assert!(matches!(decompose_primitive(&level, &wrong, &p), Err(Error::WrongRegime(_))));
}

#[test]
fn full_conductor_has_nonzero_coefficient() {
    let q = k(1);
    let p = id(&q, "(5)");
    let level = p.pow(2);
    let phi = char_with_exponent(&q, &level, &p, 2).unwrap();
    let f = sample_newform(&level, &phi, 3, 1).unwrap();
    let r = p_primitivity_report(&f, &p, 200).unwrap();
    assert!(!r.c_p_zero && !r.p_sq_divides_and_e_lt_nu && r.conditions_agree);
    assert!((f.eigenvalue(&p).unwrap().norm() - 5.0).abs() < 1e-9);
    assert_eq!(r.is_twist_of_lower_or_equal, Some(false));
}

#[test]
fn witnesses_are_verified() {
    let q = k(1);
    let cases = [
        // (p, nu, e_phi, expected construction)
        ("(5)", 2, 1, "inner-twist"),
        ("(3)", 3, 0, "small-twist"),
        ("(5)", 3, 2, "primitive-decomposition"),
        ("(7)", 3, 2, "primitive-decomposition"),
    ];
    for (p, nu, e_phi, construction) in cases {
        let p = id(&q, p);
        let level = p.pow(nu).mul(&id(&q, "(2)"));
        let phi = if e_phi == 0 {
            HeckeCharacter::trivial(&q).induce(&level).unwrap()
        } else {
            char_with_exponent(&q, &level, &p, e_phi).unwrap()
        };
        let f = sample_newform(&level, &phi, 2, 3).unwrap();
        let r = p_primitivity_report(&f, &p, 600).unwrap();
        assert!(r.c_p_zero && r.p_sq_divides_and_e_lt_nu && r.conditions_agree);
        let w = r.witness.as_ref().unwrap();
        assert_eq!(w.construction, construction);
        assert!(w.verified, "{construction}: {}", w.max_deviation);
        assert_eq!(r.is_twist_of_lower_or_equal, Some(true));
        if construction == "primitive-decomposition" {
            assert!(w.p_primitive);
            assert!((w.g_level.ord(&p).unwrap() as u32) < nu);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_regime_inputs(
        d in prop::sample::select(vec![1i64, 5]),
        pi in 0usize..6,
        nu in 0u32..8,
        e_phi in 0u32..8,
        e_psi in 0u32..8,
        conjugate: bool,
        coprime: bool,
    ) {
        let field = k(d);
        let t = IdealTable::new(&field, 30);
        let p = t.primes()[pi % t.primes().len()].clone();
        let n0 = t.ideals().iter().rev().find(|m| m.is_coprime(&p)).unwrap().clone();
        match classify_regime(&input(&p, &n0, nu, e_phi, e_psi, conjugate, coprime)) {
            Ok(r) => {
                prop_assert!(r.check().is_ok());
                prop_assert!(e_phi <= nu);
                prop_assert!(r.predicted_level.divides(&r.lcm_bound));
                if r.level_exactness == LevelExactness::Exact {
                    prop_assert_ne!(r.newform_status, NewformStatus::Undetermined);
                }
                if r.regime == Regime::SmallTwist {
                    // reverse twist by conj(Psi) starting from Psi^2 Phi
                    let back = input(&p, &n0, nu, r.predicted_character.e_p_max, e_psi, false, false);
                    let rb = classify_regime(&back).unwrap();
                    prop_assert_eq!(rb.predicted_level, r.level);
                    prop_assert_eq!(rb.level_exactness, LevelExactness::Exact);
                }
            }
            Err(Error::InvalidInput(_)) => {
                prop_assert!(e_phi > nu || (conjugate && e_psi != e_phi) || (coprime && e_phi > 0 && e_psi > 0));
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
