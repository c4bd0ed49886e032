//! Twist regimes: which statement about the exact level of a twist applies
//! for given conductor exponents, the primitive decomposition of a newform
//! space, and the p-primitivity equivalences.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{decompose_character, enumerate_characters, HeckeCharacter};
use crate::coefficients::{twist_coefficients, FormalNewform, IdealTable};
use crate::error::{Error, Result};
use crate::field::NumberField;
use crate::ideal::Ideal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    CoprimeConductors,
    ConjugateInnerTwist,
    SmallTwist,
    PrimitiveRange,
    FullConductor,
    LcmBoundOnly,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::CoprimeConductors => "coprime-conductors",
            Regime::ConjugateInnerTwist => "conjugate-inner-twist",
            Regime::SmallTwist => "small-twist",
            Regime::PrimitiveRange => "primitive-range",
            Regime::FullConductor => "full-conductor",
            Regime::LcmBoundOnly => "lcm-bound-only",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelExactness {
    Exact,
    UpperBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NewformStatus {
    Newform,
    NotNewform,
    Undetermined,
}

/// Citation tags attached to regime reports.
pub mod cite {
    pub const LCM_BOUND: &str = "twist-level-lcm-bound";
    pub const CONJUGATE_LEVEL_BOUND: &str = "conjugate-twist-level-bound";
    pub const COPRIME_TWIST: &str = "coprime-conductor-twist-is-newform";
    pub const INNER_TWIST: &str = "inner-twist";
    pub const SMALL_TWIST: &str = "two-characters-small-twist";
    pub const PRIMITIVE_SUM: &str = "primitive-direct-sum";
    pub const NOT_NEWFORM_ANY_LEVEL: &str = "nonvanishing-p-coefficient-twist-not-newform";
    pub const BAD_PRIME_COEFFICIENTS: &str = "bad-prime-coefficient-magnitudes";
}

/// The p-local data of a twist `f -> f_Psi` with `f` of level `p^nu N0` and
/// character `Phi`.
#[derive(Clone, Debug)]
pub struct RegimeInput {
    pub p: Ideal,
    pub nu: u32,
    pub e_phi: u32,
    pub e_psi: u32,
    pub n0: Ideal,
    /// `Psi` is the conjugate of `Phi_P`.
    pub conjugate: bool,
    /// The conductors of `Psi` and `Phi` are coprime.
    pub coprime: bool,
}

/// What is known about `Psi^2 Phi`: the range of its conductor exponent at
/// `p`, a bound for its conductor, and the character itself when the input
/// was concrete.
#[derive(Clone, Debug, Serialize)]
pub struct PredictedCharacter {
    pub description: &'static str,
    pub e_p_min: u32,
    pub e_p_max: u32,
    pub conductor_bound: Ideal,
    pub character: Option<HeckeCharacter>,
    pub conductor: Option<Ideal>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub p: Ideal,
    pub nu: u32,
    pub e_phi: u32,
    pub e_psi: u32,
    pub n0: Ideal,
    pub conjugate: bool,
    pub coprime: bool,
    pub level: Ideal,
    pub predicted_level: Ideal,
    pub level_exactness: LevelExactness,
    pub predicted_character: PredictedCharacter,
    pub newform_status: NewformStatus,
    pub lcm_bound: Ideal,
    pub citations: Vec<&'static str>,
}

impl RegimeReport {
    /// The report's structural invariants: predicted level divides the lcm
    /// bound and the character's conductor divides the predicted level.
    pub fn check(&self) -> std::result::Result<(), String> {
        if !self.predicted_level.divides(&self.lcm_bound) {
            return Err(format!("predicted level {} does not divide {}", self.predicted_level, self.lcm_bound));
        }
        if !self.predicted_character.conductor_bound.divides(&self.predicted_level) {
            return Err(format!(
                "conductor bound {} does not divide level {}",
                self.predicted_character.conductor_bound, self.predicted_level
            ));
        }
        if let Some(c) = &self.predicted_character.conductor {
            if !c.divides(&self.predicted_level) {
                return Err(format!("conductor {c} does not divide level {}", self.predicted_level));
            }
        }
        Ok(())
    }
}

/// Range of `e(Psi^2 Phi_P)` from `e(Phi_P)` and `e(Psi)` alone.
fn psi2phi_range(e_phi: u32, e_psi: u32, conjugate: bool) -> (u32, u32) {
    if conjugate {
        // Psi^2 Phi_P = conj(Phi_P)
        return (e_phi, e_phi);
    }
    let hi = e_phi.max(e_psi);
    // e(Psi^2) <= e(Psi) < e(Phi_P) forces e(Psi^2 Phi_P) = e(Phi_P)
    let lo = if e_phi > e_psi { e_phi } else { 0 };
    (lo, hi)
}

pub fn classify_regime(input: &RegimeInput) -> Result<RegimeReport> {
    let RegimeInput { p, nu, e_phi, e_psi, n0, conjugate, coprime } = input.clone();
    let invalid = |m: String| Err(Error::InvalidInput(m));
    if !p.is_prime() {
        return invalid(format!("{p} is not a prime ideal"));
    }
    if !n0.is_integral() || !p.is_coprime(&n0) {
        return invalid(format!("{n0} must be an integral ideal coprime to {p}"));
    }
    if e_phi > nu {
        return invalid(format!("e(Phi_P) = {e_phi} exceeds nu = {nu}"));
    }
    if conjugate && e_psi != e_phi {
        return invalid(format!("Psi = conj(Phi_P) needs e(Psi) = e(Phi_P), got {e_psi} and {e_phi}"));
    }
    if coprime && e_phi > 0 && e_psi > 0 {
        return invalid("conductors of p-power characters at the same prime are not coprime".into());
    }
    let pp = |k: u32| p.pow(k);
    let level = pp(nu).mul(&n0);
    let lcm_exp = nu.max(e_phi + e_psi).max(2 * e_psi);
    let lcm_bound = pp(lcm_exp).mul(&n0);
    let (lo, hi) = psi2phi_range(e_phi, e_psi, conjugate);
    let predicted_character = PredictedCharacter {
        description: "Psi^2 Phi",
        e_p_min: lo,
        e_p_max: hi,
        conductor_bound: pp(hi).mul(&n0),
        character: None,
        conductor: None,
    };
    let report = |regime, predicted_level: Ideal, exact, status, citations: Vec<&'static str>| RegimeReport {
        regime,
        p: p.clone(),
        nu,
        e_phi,
        e_psi,
        n0: n0.clone(),
        conjugate,
        coprime,
        level: level.clone(),
        predicted_level,
        level_exactness: exact,
        predicted_character: predicted_character.clone(),
        newform_status: status,
        lcm_bound: lcm_bound.clone(),
        citations,
    };
    use LevelExactness::*;
    use NewformStatus::*;

    if e_psi == 0 {
        return Ok(report(Regime::CoprimeConductors, level.clone(), Exact, Newform, vec![cite::COPRIME_TWIST]));
    }
    if nu == 0 {
        // conductor of Psi coprime to the level: exact level f_Psi^2 N
        let l = pp(2 * e_psi).mul(&level);
        return Ok(report(Regime::CoprimeConductors, l, Exact, Newform, vec![cite::COPRIME_TWIST]));
    }
    if conjugate {
        return Ok(if e_phi < nu {
            report(
                Regime::ConjugateInnerTwist,
                level.clone(),
                Exact,
                Newform,
                vec![cite::CONJUGATE_LEVEL_BOUND, cite::INNER_TWIST],
            )
        } else {
            report(
                Regime::FullConductor,
                p.mul(&level),
                UpperBound,
                NotNewform,
                vec![cite::CONJUGATE_LEVEL_BOUND, cite::INNER_TWIST, cite::NOT_NEWFORM_ANY_LEVEL],
            )
        });
    }
    if 2 * e_psi < nu && e_phi + e_psi < nu {
        return Ok(report(Regime::SmallTwist, level.clone(), Exact, Newform, vec![cite::SMALL_TWIST]));
    }
    if nu < 2 * e_phi && e_phi < nu && e_psi == nu - e_phi {
        return Ok(report(
            Regime::PrimitiveRange,
            level.clone(),
            UpperBound,
            Undetermined,
            vec![cite::LCM_BOUND, cite::PRIMITIVE_SUM, cite::BAD_PRIME_COEFFICIENTS],
        ));
    }
    Ok(report(Regime::LcmBoundOnly, lcm_bound.clone(), UpperBound, Undetermined, vec![cite::LCM_BOUND]))
}

/// Split a character modulo `level = P N0` into its `P` and `N0` parts as
/// numerical characters.
fn split_at_prime(
    phi: &HeckeCharacter,
    p: &Ideal,
) -> Result<(u32, Ideal, Ideal, crate::characters::NumericalCharacter, crate::characters::NumericalCharacter)> {
    let level = phi.modulus();
    let nu = level.ord(p)?.max(0) as u32;
    let pp = p.pow(nu);
    let n0 = level.div_exact(&pp).expect("p^nu divides the level");
    let (a, b) = decompose_character(phi.numerical(), &pp, &n0)?;
    Ok((nu, pp, n0, a, b))
}

/// `Phi_P` as a Hecke character (trivial infinite part), when it exists.
pub fn p_part(phi: &HeckeCharacter, p: &Ideal) -> Result<HeckeCharacter> {
    let (_, _, _, a, _) = split_at_prime(phi, p)?;
    HeckeCharacter::new(a)
}

/// Classify concrete characters: `Phi` modulo the level `N`, and `Psi` with
/// conductor a power of `p`.
pub fn classify_characters(phi: &HeckeCharacter, psi: &HeckeCharacter, p: &Ideal) -> Result<RegimeReport> {
    if !p.is_prime() {
        return Err(Error::PNotPrime(p.to_string()));
    }
    let fpsi = psi.conductor();
    let e_psi = psi.exponential_conductor(p);
    if !fpsi.is_unit_ideal() && &p.pow(e_psi) != fpsi {
        return Err(Error::InvalidInput(format!("conductor {fpsi} of Psi is not a power of {p}")));
    }
    let (nu, _pp, n0, phi_p, _) = split_at_prime(phi, p)?;
    let e_phi = phi.exponential_conductor(p);
    let conjugate = e_psi > 0 && psi.numerical().primitive() == phi_p.conj().primitive();
    let coprime = fpsi.is_coprime(phi.conductor());
    let mut report = classify_regime(&RegimeInput { p: p.clone(), nu, e_phi, e_psi, n0, conjugate, coprime })?;
    let chi = psi.pow(2).mul(phi)?.primitive();
    report.predicted_character.conductor = Some(chi.conductor().clone());
    report.predicted_character.character = Some(chi);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionSummand {
    /// `Psi` with `e(Psi) = nu - e(Phi_P)`.
    pub psi: HeckeCharacter,
    /// The twisting character `conj(Psi)`.
    pub twisting: HeckeCharacter,
    pub inner_level: Ideal,
    /// `Psi^2 Phi` modulo the inner level.
    pub inner_character: HeckeCharacter,
    pub inner_conductor: Ideal,
    pub p_primitive: bool,
}

/// The summands of `S(N, Phi) = sum over Psi of S(p^{e(Phi_P)} N0, Psi^2 Phi)^{conj Psi}`,
/// `Psi` running over extendable characters of exact conductor
/// `p^{nu - e(Phi_P)}`.
pub fn decompose_primitive(level: &Ideal, phi: &HeckeCharacter, p: &Ideal) -> Result<Vec<DecompositionSummand>> {
    if !p.is_prime() {
        return Err(Error::PNotPrime(p.to_string()));
    }
    let phi = if phi.modulus() == level { phi.clone() } else { phi.primitive().induce(level)? };
    let nu = level.ord(p)?.max(0) as u32;
    let e_phi = phi.exponential_conductor(p);
    if !(nu < 2 * e_phi && e_phi < nu) {
        return Err(Error::WrongRegime(format!("need nu/2 < e(Phi_P) < nu, have nu = {nu}, e(Phi_P) = {e_phi}")));
    }
    let field = phi.field().clone();
    let n0 = level.div_exact(&p.pow(nu)).unwrap();
    let cond = p.pow(nu - e_phi);
    let inner_level = p.pow(e_phi).mul(&n0);
    let mut out = Vec::new();
    for num in enumerate_characters(&field, &cond, Some(&cond), true)? {
        let psi = HeckeCharacter::new(num)?;
        let full = psi.pow(2).mul(&phi)?;
        let inner_conductor = full.conductor().clone();
        let inner_character = full.restrict(&inner_level)?;
        let p_primitive = inner_character.exponential_conductor(p) == e_phi && inner_level.ord(p)? as u32 == e_phi;
        out.push(DecompositionSummand {
            twisting: psi.conj(),
            psi,
            inner_level: inner_level.clone(),
            inner_character,
            inner_conductor,
            p_primitive,
        });
    }
    Ok(out)
}

/// An ideal of norm at most `bound` on which the two ideal characters differ.
pub fn separating_ideal(a: &HeckeCharacter, b: &HeckeCharacter, field: &NumberField, bound: u64) -> Option<Ideal> {
    let table = IdealTable::new(field, bound);
    table.ideals().iter().find(|m| a.ideal_value(m) != b.ideal_value(m)).cloned()
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub construction: &'static str,
    /// `f = g_Psi`.
    pub psi: HeckeCharacter,
    pub g_level: Ideal,
    pub g_character: HeckeCharacter,
    pub lambda_p_g: (f64, f64),
    pub p_primitive: bool,
    pub bound: u64,
    pub max_deviation: f64,
    pub verified: bool,
    #[serde(skip)]
    pub g: FormalNewform,
}

#[derive(Clone, Debug, Serialize)]
pub struct PPrimitivityReport {
    pub p: Ideal,
    pub nu: u32,
    pub e_phi: u32,
    pub c_p_zero: bool,
    pub p_sq_divides_and_e_lt_nu: bool,
    pub conditions_agree: bool,
    /// `Some(true)` when a twist witness was constructed and verified,
    /// `Some(false)` when conditions (1) and (2) both fail, `None` when no
    /// construction is available.
    pub is_twist_of_lower_or_equal: Option<bool>,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

/// Build `g` with `lambda_q(g) = Chi^*(q) lambda_q(f)` for `q` away from `p`.
fn twisted_form(
    f: &FormalNewform,
    chi: &HeckeCharacter,
    p: &Ideal,
    g_level: &Ideal,
    g_character: &HeckeCharacter,
    lambda_p: Complex64,
) -> Result<FormalNewform> {
    let mut overrides = BTreeMap::new();
    overrides.insert(p.clone(), lambda_p);
    for (q, _) in g_level.factor()? {
        if &q != p {
            overrides.insert(q.clone(), chi.ideal_value_complex(&q) * f.eigenvalue(&q)?);
        }
    }
    FormalNewform::twisted(f, chi, g_level, g_character, overrides)
}

/// Conditions of the p-primitivity equivalence for `f`, with a twist witness
/// verified on coefficients up to norm `bound`.
pub fn p_primitivity_report(f: &FormalNewform, p: &Ideal, bound: u64) -> Result<PPrimitivityReport> {
    if !p.is_prime() {
        return Err(Error::PNotPrime(p.to_string()));
    }
    let level = f.level();
    if !p.divides(level) {
        return Err(Error::PNotDividingLevel { p: p.to_string(), level: level.to_string() });
    }
    let phi = f.character();
    let nu = level.ord(p)? as u32;
    let e_phi = phi.exponential_conductor(p);
    let lam = f.eigenvalue(p)?;
    let c_p_zero = lam.norm() < 1e-12;
    let cond2 = nu >= 2 && e_phi < nu;
    let mut notes = Vec::new();
    let mut witness = None;
    if cond2 {
        let field = f.field().clone();
        let np = p.norm() as f64;
        let k0 = f.k0() as f64;
        let built: Option<(&'static str, HeckeCharacter, FormalNewform, bool)> = if 2 * e_phi > nu {
            let summands = decompose_primitive(level, phi, p)?;
            match summands.into_iter().next() {
                Some(s) => {
                    // f = g_{conj Psi}, lambda_q(g) = Psi^*(q) lambda_q(f)
                    let lam_p = Complex64::from_polar(np.powf((k0 - 1.0) / 2.0), 0.0);
                    let g = twisted_form(f, &s.psi, p, &s.inner_level, &s.inner_character, lam_p)?;
                    Some(("primitive-decomposition", s.twisting.clone(), g, s.p_primitive))
                }
                None => {
                    notes.push("no extendable character of the required conductor".into());
                    None
                }
            }
        } else if e_phi > 0 {
            match p_part(phi, p) {
                Ok(phi_p) => {
                    // f = g_{Phi_P}, lambda_q(g) = conj(Phi_P^*(q)) lambda_q(f)
                    let g_char = phi_p.conj().pow(2).mul(phi)?.induce(level)?;
                    let g = twisted_form(f, &phi_p.conj(), p, level, &g_char, Complex64::new(0.0, 0.0))?;
                    Some(("inner-twist", phi_p, g, false))
                }
                Err(Error::NotExtendable) => {
                    notes.push("Phi_P has no extension with trivial infinite part".into());
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            let mut found = None;
            for e in 1..nu {
                if 2 * e >= nu {
                    break;
                }
                let m = p.pow(e);
                if let Some(num) = enumerate_characters(&field, &m, Some(&m), true)?.into_iter().next() {
                    found = Some(HeckeCharacter::new(num)?);
                    break;
                }
            }
            match found {
                Some(psi) => {
                    // f = g_Psi, lambda_q(g) = conj(Psi^*(q)) lambda_q(f)
                    let g_char = psi.conj().pow(2).mul(phi)?.induce(level)?;
                    let g = twisted_form(f, &psi.conj(), p, level, &g_char, Complex64::new(0.0, 0.0))?;
                    Some(("small-twist", psi, g, false))
                }
                None => {
                    notes.push(format!("no extendable p-primary character with 0 < e(Psi) < {nu}/2"));
                    None
                }
            }
        };
        if let Some((construction, psi, g, p_primitive)) = built {
            let table = IdealTable::new(&field, bound);
            let fv = f.truncate(&table, bound)?;
            let gv = g.truncate(&table, bound)?;
            let dev = twist_coefficients(&gv, &psi).max_diff(&fv);
            let lp = g.eigenvalue(p)?;
            witness = Some(Witness {
                construction,
                psi,
                g_level: g.level().clone(),
                g_character: g.character().clone(),
                lambda_p_g: (lp.re, lp.im),
                p_primitive,
                bound,
                max_deviation: dev,
                verified: dev < 1e-9,
                g,
            });
        }
    }
    let is_twist = match (&witness, cond2) {
        (Some(w), _) => Some(w.verified),
        (None, false) if !c_p_zero => Some(false),
        _ => None,
    };
    Ok(PPrimitivityReport {
        p: p.clone(),
        nu,
        e_phi,
        c_p_zero,
        p_sq_divides_and_e_lt_nu: cond2,
        conditions_agree: c_p_zero == cond2,
        is_twist_of_lower_or_equal: is_twist,
        witness,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::sample_newform;
    use crate::ideal::parse_ideal;

    fn q() -> NumberField {
        NumberField::new(1).unwrap()
    }

    fn input(p: &Ideal, nu: u32, e_phi: u32, e_psi: u32) -> RegimeInput {
        RegimeInput {
            p: p.clone(),
            nu,
            e_phi,
            e_psi,
            n0: Ideal::unit(p.ring()),
            conjugate: false,
            coprime: false,
        }
    }

    #[test]
    fn small_twist_example() {
        let k = q();
        let p = parse_ideal(k.ring(), "(5)").unwrap();
        let r = classify_regime(&input(&p, 3, 1, 1)).unwrap();
        assert_eq!(r.regime, Regime::SmallTwist);
        assert_eq!(r.predicted_level, p.pow(3));
        assert_eq!(r.level_exactness, LevelExactness::Exact);
        assert_eq!(r.newform_status, NewformStatus::Newform);
    }

    #[test]
    fn conjugate_full_conductor() {
        let k = q();
        let p = parse_ideal(k.ring(), "(5)").unwrap();
        let mut i = input(&p, 2, 2, 2);
        i.conjugate = true;
        let r = classify_regime(&i).unwrap();
        assert_eq!(r.regime, Regime::FullConductor);
        assert_eq!(r.predicted_level, p.pow(3));
        assert_eq!(r.level_exactness, LevelExactness::UpperBound);
    }

    #[test]
    fn trivial_twist() {
        let k = q();
        let p = parse_ideal(k.ring(), "(5)").unwrap();
        let r = classify_regime(&input(&p, 2, 1, 0)).unwrap();
        assert_eq!(r.regime, Regime::CoprimeConductors);
        assert_eq!(r.predicted_level, p.pow(2));
    }

    #[test]
    fn invalid_inputs() {
        let k = q();
        let p = parse_ideal(k.ring(), "(5)").unwrap();
        assert!(classify_regime(&input(&p, 1, 2, 0)).is_err());
        let mut i = input(&p, 3, 1, 2);
        i.conjugate = true;
        assert!(classify_regime(&i).is_err());
        let six = parse_ideal(k.ring(), "(6)").unwrap();
        assert!(classify_regime(&input(&six, 1, 0, 0)).is_err());
    }

    #[test]
    fn primitive_decomposition_mod_125() {
        let k = q();
        let p = parse_ideal(k.ring(), "(5)").unwrap();
        let level = p.pow(3);
        let phi = enumerate_characters(&k, &level, Some(&p.pow(2)), true).unwrap().remove(0);
        let phi = HeckeCharacter::new(phi).unwrap();
        let s = decompose_primitive(&level, &phi, &p).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|x| x.p_primitive && x.inner_level == p.pow(2)));
        let triv = HeckeCharacter::trivial(&k).induce(&level).unwrap();
        assert!(matches!(decompose_primitive(&level, &triv, &p), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn p_primitivity_inner_twist() {
        let k = q();
        let p = parse_ideal(k.ring(), "(5)").unwrap();
        let level = p.pow(2);
        let phi = enumerate_characters(&k, &level, Some(&p), true).unwrap().remove(0);
        let f = sample_newform(&level, &HeckeCharacter::new(phi).unwrap(), 2, 11).unwrap();
        let r = p_primitivity_report(&f, &p, 500).unwrap();
        assert!(r.c_p_zero && r.p_sq_divides_and_e_lt_nu && r.conditions_agree);
        let w = r.witness.unwrap();
        assert_eq!(w.construction, "inner-twist");
        assert!(w.verified, "{}", w.max_deviation);
    }

    #[test]
    fn p_primitivity_nu_one() {
        let k = q();
        let p = parse_ideal(k.ring(), "(7)").unwrap();
        let f = sample_newform(&p, &HeckeCharacter::trivial(&k), 2, 1).unwrap();
        let r = p_primitivity_report(&f, &p, 100).unwrap();
        assert!(!r.c_p_zero && !r.p_sq_divides_and_e_lt_nu);
        assert_eq!(r.is_twist_of_lower_or_equal, Some(false));
        let three = parse_ideal(k.ring(), "(3)").unwrap();
        assert!(matches!(p_primitivity_report(&f, &three, 100), Err(Error::PNotDividingLevel { .. })));
    }
}
