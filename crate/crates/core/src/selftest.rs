//! The self-test suite: named property checks over seeded newforms and
//! characters, each compared with a brute-force reference or an identity.

use std::collections::HashSet;
use std::fmt::Display;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::{
    angle_to_complex, decompose_character, enumerate_characters, gauss_sum, HeckeCharacter, NumericalCharacter,
    UnitGroup,
};
use crate::coefficients::{
    apply_a, apply_b, apply_b_to, apply_t, bad_prime_case, sample_newform, twist_coefficients, BadPrimeCase,
    FormalNewform, IdealTable,
};
use crate::error::Result;
use crate::field::NumberField;
use crate::ideal::Ideal;
use crate::oracle;
use crate::twist::{
    classify_regime, decompose_primitive, p_part, separating_ideal, Regime, RegimeInput,
};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub fields: Vec<i64>,
    pub seed: u64,
    /// Norm bound for coefficient vectors.
    pub bound: u64,
    /// Seeded newforms per field in the operator suite.
    pub forms: usize,
}

impl SuiteConfig {
    pub fn new(fields: Vec<i64>, seed: u64, bound: u64) -> SuiteConfig {
        SuiteConfig { fields, seed, bound, forms: 25 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub detail: Vec<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

pub const CHECKS: &[&str] = &[
    "bad-prime-magnitudes",
    "character-oracle",
    "gauss-sums",
    "inner-twist-identity",
    "operator-algebra",
    "primitive-decomposition",
    "regime-grid",
    "twist-laws",
];

const MAX_DETAIL: usize = 8;

struct Tally {
    name: &'static str,
    tol: f64,
    cases: usize,
    failures: usize,
    max_dev: f64,
    detail: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Tally {
        Tally { name, tol, cases: 0, failures: 0, max_dev: 0.0, detail: Vec::new() }
    }

    fn dev(&mut self, what: impl Display, d: f64) {
        self.cases += 1;
        if d.is_nan() || d > self.max_dev {
            self.max_dev = if d.is_nan() { f64::INFINITY } else { d };
        }
        if d.is_nan() || d >= self.tol {
            self.fail(format!("{what}: deviation {d:.3e}"));
        }
    }

    fn check(&mut self, what: impl Display, ok: bool) {
        self.cases += 1;
        if !ok {
            self.fail(what.to_string());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        if self.detail.len() < MAX_DETAIL {
            self.detail.push(msg);
        }
    }

    fn error(&mut self, e: impl Display) {
        self.cases += 1;
        self.fail(format!("error: {e}"));
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            cases: self.cases,
            failures: self.failures,
            max_deviation: self.max_dev,
            tolerance: self.tol,
            detail: self.detail,
        }
    }
}

/// Run one named check.
pub fn run_check(name: &str, cfg: &SuiteConfig) -> Option<CheckResult> {
    let r = match name {
        "bad-prime-magnitudes" => bad_prime_magnitudes(cfg),
        "character-oracle" => character_oracle(cfg),
        "gauss-sums" => gauss_sums(cfg),
        "inner-twist-identity" => inner_twist_identity(cfg),
        "operator-algebra" => operator_algebra(cfg),
        "primitive-decomposition" => primitive_decomposition(cfg),
        "regime-grid" => regime_grid(cfg),
        "twist-laws" => twist_laws(cfg),
        _ => return None,
    };
    Some(r)
}

/// Run every check in parallel; results sorted by name.
pub fn run_all(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let mut out: Vec<CheckResult> = CHECKS.par_iter().map(|n| run_check(n, cfg).unwrap()).collect();
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

fn fields(cfg: &SuiteConfig, t: &mut Tally) -> Vec<NumberField> {
    let mut out = Vec::new();
    for &d in &cfg.fields {
        match NumberField::new(d) {
            Ok(k) => out.push(k),
            Err(e) => t.error(e),
        }
    }
    out
}

fn rng_for(cfg: &SuiteConfig, salt: &str, d: i64) -> ChaCha8Rng {
    let mut h = cfg.seed ^ (d as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in salt.bytes() {
        h = h.rotate_left(5) ^ b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.random_range(0..xs.len())]
}

/// Seeded newforms with random levels of norm at most `max_level` and random
/// extendable characters modulo the level.
fn seeded_forms(
    field: &NumberField,
    rng: &mut ChaCha8Rng,
    n: usize,
    max_level: u64,
    weights: &[u32],
) -> Result<Vec<FormalNewform>> {
    let levels = IdealTable::new(field, max_level).ideals().to_vec();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let level = pick(rng, &levels).clone();
        let chars = enumerate_characters(field, &level, None, true)?;
        let chi = HeckeCharacter::new(pick(rng, &chars).clone())?;
        let k0 = *pick(rng, weights);
        out.push(sample_newform(&level, &chi, k0, rng.random())?);
    }
    Ok(out)
}

fn ideals_in(table: &IdealTable, lo: u64, hi: u64) -> Vec<Ideal> {
    (0..table.count_up_to(hi)).filter(|&i| table.norm_at(i) >= lo).map(|i| table.ideals()[i].clone()).collect()
}

fn primes_up_to_norm(table: &IdealTable, x: u64) -> Vec<Ideal> {
    table.primes().iter().filter(|p| p.norm() as u64 <= x).cloned().collect()
}

fn operator_algebra(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("operator-algebra", 1e-9);
    let x = cfg.bound;
    for field in fields(cfg, &mut t) {
        let mut rng = rng_for(cfg, "operator-algebra", field.d());
        let table = IdealTable::new(&field, x);
        let small = ideals_in(&table, 2, 50.min(x));
        let primes = primes_up_to_norm(&table, 50);
        let forms = match seeded_forms(&field, &mut rng, cfg.forms, 60, &[2]) {
            Ok(f) => f,
            Err(e) => {
                t.error(e);
                continue;
            }
        };
        let draws: Vec<u64> = (0..forms.len()).map(|_| rng.random()).collect();
        let results: Vec<Tally> = forms
            .par_iter()
            .zip(draws)
            .map(|(f, s)| {
                let mut t = Tally::new("operator-algebra", 1e-9);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                if let Err(e) = operator_algebra_one(f, &table, &small, &primes, &mut rng, &mut t) {
                    t.error(e);
                }
                t
            })
            .collect();
        for r in results {
            merge(&mut t, r);
        }
    }
    t.finish()
}

fn merge(t: &mut Tally, r: Tally) {
    t.cases += r.cases;
    t.failures += r.failures;
    t.max_dev = t.max_dev.max(r.max_dev);
    for d in r.detail {
        if t.detail.len() < MAX_DETAIL {
            t.detail.push(d);
        }
    }
}

fn operator_algebra_one(
    f: &FormalNewform,
    table: &Arc<IdealTable>,
    small: &[Ideal],
    primes: &[Ideal],
    rng: &mut ChaCha8Rng,
    t: &mut Tally,
) -> Result<()> {
    let x = table.bound();
    let v = f.truncate(table, x)?;
    let phi = f.character();
    let k0 = f.k0();
    let tag = format!("{} level {}", f.field().d(), f.level());

    // multiplicativity over coprime pairs, products formed in HNF
    let ideals = table.ideals();
    let n = v.len();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for i in 1..n {
        let ni = table.norm_at(i);
        for j in i..n {
            let nj = table.norm_at(j);
            if ni * nj > x {
                break;
            }
            if !ideals[i].is_coprime(&ideals[j]) {
                continue;
            }
            let k = table.index_of(&ideals[i].mul(&ideals[j])).expect("product within bound");
            worst = worst.max((v.values()[k] - v.values()[i] * v.values()[j]).norm());
            pairs += 1;
        }
    }
    t.dev(format!("{tag}: multiplicativity over {pairs} pairs"), worst);

    // series against the formal Euler product
    let xs = x.min(400);
    let series = oracle::euler_product_coefficients(f, xs);
    let worst = series.iter().map(|(m, c)| (v.get(m).unwrap() - c).norm()).fold(0.0, f64::max);
    t.check(format!("{tag}: Euler product covers all ideals"), series.len() == table.count_up_to(xs));
    t.dev(format!("{tag}: Euler product series"), worst);

    // eigen-property at every prime of norm <= 50
    for q in primes {
        let nq = q.norm() as u64;
        let y = x / nq;
        let tq = apply_t(&v, q, phi, k0, y)?;
        let lam = f.eigenvalue(q)?;
        t.dev(format!("{tag}: T{q} eigenvalue"), tq.max_diff(&v.truncated(y).scale(lam)));
        let yd = y.min(60);
        let worst = ideals[..table.count_up_to(yd)]
            .iter()
            .map(|m| {
                let d = oracle::hecke_direct(m, q, phi, k0, |a| v.get(a).unwrap());
                (d - tq.get(m).unwrap()).norm()
            })
            .fold(0.0, f64::max);
        t.dev(format!("{tag}: T{q} divisor sum"), worst);
    }

    // B composition and T/B commutation for random shifts
    for _ in 0..4 {
        let r = pick(rng, small).clone();
        let s = pick(rng, small).clone();
        let bb = apply_b(&apply_b(&v, &r)?, &s)?;
        let b = apply_b(&v, &r.mul(&s))?;
        t.dev(format!("{tag}: B{r} B{s} = B(rs)"), bb.max_diff(&b));
        if r.is_coprime(&s) {
            let y = x / r.norm() as u64;
            let tb = apply_t(&apply_b_to(&v, &s, x)?, &r, phi, k0, y)?;
            let bt = apply_b_to(&apply_t(&v, &r, phi, k0, y)?, &s, y)?;
            t.dev(format!("{tag}: T{r} B{s} = B{s} T{r}"), tb.max_diff(&bt));
        }
    }
    Ok(())
}

/// Prime-power conductor characters of conductor norm at most `x`.
fn conductor_characters(field: &NumberField, x: u64) -> Result<Vec<HeckeCharacter>> {
    let table = IdealTable::new(field, x);
    let mut out = Vec::new();
    for p in table.primes() {
        let mut m = p.clone();
        while m.norm() as u64 <= x {
            for chi in enumerate_characters(field, &m, Some(&m), true)? {
                out.push(HeckeCharacter::new(chi)?);
            }
            m = m.mul(p);
        }
    }
    Ok(out)
}

fn twist_laws(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("twist-laws", 1e-12);
    // coefficients of norm near 2000 reach ~1e3, where 1e-12 is a few ulps
    let x = cfg.bound.min(1000);
    for field in fields(cfg, &mut t) {
        let mut rng = rng_for(cfg, "twist-laws", field.d());
        let table = IdealTable::new(&field, x);
        let primes = primes_up_to_norm(&table, 50);
        let run = |t: &mut Tally, rng: &mut ChaCha8Rng| -> Result<()> {
            let forms = seeded_forms(&field, rng, 10, 30, &[2])?;
            let psis = conductor_characters(&field, 60)?;
            for f in &forms {
                let psi = pick(rng, &psis).clone();
                twist_laws_one(f, &psi, &table, &primes, t)?;
            }
            Ok(())
        };
        if let Err(e) = run(&mut t, &mut rng) {
            t.error(e);
        }
    }
    t.finish()
}

fn twist_laws_one(
    f: &FormalNewform,
    psi: &HeckeCharacter,
    table: &Arc<IdealTable>,
    primes: &[Ideal],
    t: &mut Tally,
) -> Result<()> {
    let x = table.bound();
    let tag = format!("{} level {} twist by {}", f.field().d(), f.level(), psi.conductor());
    let v = f.truncate(table, x)?;
    let w = twist_coefficients(&v, psi);

    // entrywise against direct evaluation of Psi^* on each ideal
    let worst = v
        .entries()
        .zip(w.values())
        .map(|((m, c), tw)| {
            let z = psi.ideal_value(m).map(angle_to_complex).unwrap_or_default();
            (z * c - tw).norm()
        })
        .fold(0.0, f64::max);
    t.dev(format!("{tag}: coefficient law"), worst);

    // f_Psi | T_q = Psi^*(q) (f | T_q)_Psi, with f_Psi carrying Psi^2 Phi
    let phi = f.character();
    let chi2 = psi.pow(2).mul(phi)?;
    for q in primes {
        if q.divides(psi.conductor()) {
            continue;
        }
        let y = x / q.norm() as u64;
        let lhs = apply_t(&w, q, &chi2, f.k0(), y)?;
        let rhs = twist_coefficients(&apply_t(&v, q, phi, f.k0(), y)?, psi).scale(psi.ideal_value_complex(q));
        t.dev(format!("{tag}: eigentwist at {q}"), lhs.max_diff(&rhs));
    }

    // twisting back by the conjugate kills exactly the entries meeting f_Psi
    let back = twist_coefficients(&w, &psi.conj());
    let lift = phi.primitive().induce(&f.level().lcm(psi.conductor()))?;
    let mut chain = v.clone();
    for (p, _) in psi.conductor().factor()? {
        chain = apply_a(&chain, &p, &lift, f.k0())?;
    }
    t.dev(format!("{tag}: conjugate twist = A chain"), back.max_diff(&chain));
    Ok(())
}

fn bad_prime_magnitudes(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("bad-prime-magnitudes", 1e-9);
    for field in fields(cfg, &mut t) {
        let mut rng = rng_for(cfg, "bad-prime-magnitudes", field.d());
        let table = IdealTable::new(&field, 200);
        // levels with a square factor are drawn as often as the rest
        let squareful: Vec<Ideal> = table
            .ideals()
            .iter()
            .filter(|m| m.factor().map(|f| f.iter().any(|&(_, e)| e >= 2)).unwrap_or(false))
            .cloned()
            .collect();
        let all = table.ideals()[1..].to_vec();
        for i in 0..120 {
            let level = if i % 2 == 0 { pick(&mut rng, &squareful) } else { pick(&mut rng, &all) }.clone();
            let k0 = rng.random_range(2..=5);
            let r = (|| -> Result<()> {
                let chars = enumerate_characters(&field, &level, None, true)?;
                let chi = HeckeCharacter::new(pick(&mut rng, &chars).clone())?;
                let f = sample_newform(&level, &chi, k0, rng.random())?;
                let v = f.truncate(&table, level.norm() as u64)?;
                for (p, _) in level.factor()? {
                    let np = p.norm() as f64;
                    let below = level.div_exact(&p).unwrap();
                    let defined_below = chi.conductor().divides(&below);
                    let square = p.pow(2).divides(&level);
                    let want_case = match (defined_below, square) {
                        (false, _) => BadPrimeCase::FullConductor,
                        (true, true) => BadPrimeCase::Vanishing,
                        (true, false) => BadPrimeCase::Exact,
                    };
                    let case = bad_prime_case(&level, chi.conductor(), &p);
                    t.check(format!("{level} at {p}: case {case:?}, expected {want_case:?}"), case == want_case);
                    let c = v.get(&p).expect("prime within bound").norm();
                    let k = k0 as f64;
                    let want = match want_case {
                        BadPrimeCase::FullConductor => np.powf((k - 1.0) / 2.0),
                        BadPrimeCase::Vanishing => 0.0,
                        BadPrimeCase::Exact => np.powf((k - 2.0) / 2.0),
                    };
                    t.dev(format!("{level} at {p} (k0 = {k0}): |C(p)| = {c}, expected {want}"), (c - want).abs());
                }
                for msg in f.check_bad_primes(1e-9)? {
                    t.fail(msg);
                }
                Ok(())
            })();
            if let Err(e) = r {
                t.error(e);
            }
        }
    }
    t.finish()
}

fn gauss_sums(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("gauss-sums", 1e-9);
    for field in fields(cfg, &mut t) {
        let chars = match conductor_characters(&field, 500) {
            Ok(c) => c,
            Err(e) => {
                t.error(e);
                continue;
            }
        };
        let results: Vec<Tally> = chars
            .par_chunks(64)
            .map(|chunk| {
                let mut t = Tally::new("gauss-sums", 1e-9);
                for psi in chunk {
                    match gauss_sum(psi) {
                        Ok(g) => {
                            let n = psi.conductor().norm() as f64;
                            t.dev(format!("|tau|^2 for conductor {}", psi.conductor()), (g.value().norm_sqr() - n).abs());
                            if field.degree() == 1 {
                                let f = psi.conductor().min_integer() as i64;
                                let num = psi.numerical().primitive();
                                let o = oracle::dirichlet_gauss_sum(f, |a| num.value((a as i128, 0)));
                                t.dev(format!("tau against the classical sum mod {f}"), (o - g.value()).norm());
                            }
                        }
                        Err(e) => t.error(e),
                    }
                }
                t
            })
            .collect();
        for r in results {
            merge(&mut t, r);
        }
        if field.d() == 1 {
            let five = Ideal::from_int(field.ring(), 5);
            let quad = oracle::dirichlet_gauss_sum(5, |a| oracle::legendre(a, 5));
            t.dev("classical quadratic sum mod 5", (quad - Complex64::new(5f64.sqrt(), 0.0)).norm());
            let r = (|| -> Result<Complex64> {
                let chi = enumerate_characters(&field, &five, Some(&five), true)?
                    .into_iter()
                    .find(|c| c.order() == 2)
                    .expect("quadratic character mod 5");
                Ok(gauss_sum(&HeckeCharacter::new(chi)?)?.value())
            })();
            match r {
                Ok(z) => t.dev("tau(quadratic mod 5) = sqrt 5", (z - Complex64::new(5f64.sqrt(), 0.0)).norm()),
                Err(e) => t.error(e),
            }
        }
    }
    t.finish()
}

/// Levels with a prime power `P^nu || N` and characters `Phi` with
/// `e(Phi_P) = nu` whose `P`-part extends.
fn full_conductor_instances(field: &NumberField, max_level: u64) -> Result<Vec<(Ideal, Ideal, HeckeCharacter)>> {
    let mut out = Vec::new();
    for level in IdealTable::new(field, max_level).ideals().iter().skip(1) {
        let chars = enumerate_characters(field, level, None, true)?;
        for (p, nu) in level.factor()? {
            for chi in &chars {
                let phi = HeckeCharacter::new(chi.clone())?;
                if phi.exponential_conductor(&p) == nu && p_part(&phi, &p).is_ok() {
                    out.push((level.clone(), p.clone(), phi));
                }
            }
        }
    }
    Ok(out)
}

fn inner_twist_identity(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("inner-twist-identity", 1e-9);
    let x = cfg.bound.min(2000);
    let fs = fields(cfg, &mut t);
    let per_field = 10usize.div_ceil(fs.len().max(1));
    for field in fs {
        let mut rng = rng_for(cfg, "inner-twist-identity", field.d());
        let table = IdealTable::new(&field, x);
        let run = |t: &mut Tally, rng: &mut ChaCha8Rng| -> Result<()> {
            let inst = full_conductor_instances(&field, 50)?;
            if inst.is_empty() {
                t.fail(format!("{}: no full-conductor instance of level norm <= 50", field.d()));
                return Ok(());
            }
            for _ in 0..per_field {
                let (level, p, phi) = pick(rng, &inst).clone();
                let k0 = 2;
                let g = sample_newform(&level, &phi, k0, rng.random())?;
                let phi_p = p_part(&phi, &p)?;
                // lambda_q(f) = conj(Phi_P^*(q)) lambda_q(g) away from P
                let np = p.norm() as f64;
                let mut over = std::collections::BTreeMap::new();
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                over.insert(p.clone(), Complex64::from_polar(np.powf((k0 as f64 - 1.0) / 2.0), phase));
                for (q, _) in level.factor()? {
                    if q != p {
                        over.insert(q.clone(), phi_p.conj().ideal_value_complex(&q) * g.eigenvalue(&q)?);
                    }
                }
                let f_char = phi_p.conj().pow(2).mul(&phi)?;
                let f = FormalNewform::twisted(&g, &phi_p.conj(), &level, &f_char, over)?;
                let tag = format!("{} level {} at {p}", field.d(), level);
                for msg in f.check_bad_primes(1e-9)? {
                    t.fail(format!("{tag}: f violates {msg}"));
                }
                let fv = f.truncate(&table, x)?;
                let gv = g.truncate(&table, x)?;
                let lhs = twist_coefficients(&fv, &phi_p);
                let cp = gv.get(&p).unwrap();
                let rhs = gv.sub(&apply_b(&gv, &p)?.scale(cp));
                t.dev(format!("{tag}: f_(Phi_P) = g - C(p,g) g|B_p"), lhs.max_diff(&rhs));
                let worst = lhs
                    .entries()
                    .zip(rhs.values())
                    .filter(|((m, _), _)| p.divides(m))
                    .map(|((_, a), b)| a.norm().max(b.norm()))
                    .fold(0.0, f64::max);
                t.dev(format!("{tag}: p-divisible entries vanish"), worst);
            }
            Ok(())
        };
        if let Err(e) = run(&mut t, &mut rng) {
            t.error(e);
        }
    }
    t.finish()
}

fn regime_grid(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("regime-grid", 0.5);
    for field in fields(cfg, &mut t) {
        let ring = field.ring();
        let (p, n0s) = if field.degree() == 1 {
            (Ideal::from_int(ring, 5), vec![Ideal::unit(ring), Ideal::from_int(ring, 6)])
        } else {
            let p = Ideal::primes_above(ring, field.discriminant().unsigned_abs() as i128).remove(0);
            (p, vec![Ideal::unit(ring), Ideal::from_int(ring, 3)])
        };
        for n0 in &n0s {
            for nu in 0..=6u32 {
                for e_phi in 0..=nu {
                    for e_psi in 0..=nu {
                        for conjugate in [false, true] {
                            for coprime in [false, true] {
                                let input =
                                    RegimeInput { p: p.clone(), nu, e_phi, e_psi, n0: n0.clone(), conjugate, coprime };
                                regime_case(&input, &mut t);
                            }
                        }
                    }
                }
            }
        }
    }
    t.finish()
}

fn regime_case(input: &RegimeInput, t: &mut Tally) {
    let RegimeInput { nu, e_phi, e_psi, conjugate, coprime, .. } = *input;
    let tag = format!("nu={nu} e_phi={e_phi} e_psi={e_psi} conj={conjugate} coprime={coprime}");
    let consistent = !(conjugate && e_psi != e_phi) && !(coprime && e_phi > 0 && e_psi > 0);
    let report = match classify_regime(input) {
        Ok(r) => r,
        Err(e) => {
            t.check(format!("{tag}: rejected ({e}) although consistent"), !consistent);
            return;
        }
    };
    t.check(format!("{tag}: accepted although inconsistent"), consistent);
    if let Err(e) = report.check() {
        t.fail(format!("{tag}: {e}"));
    }
    t.check(format!("{tag}: predicted level divides the lcm bound"), report.predicted_level.divides(&report.lcm_bound));
    t.check(
        format!("{tag}: conductor bound divides the predicted level"),
        report.predicted_character.conductor_bound.divides(&report.predicted_level),
    );
    let small = 0 < e_psi && 2 * e_psi < nu && e_phi + e_psi < nu && !conjugate;
    if small {
        t.check(format!("{tag}: small-twist preconditions not classified as such"), report.regime == Regime::SmallTwist);
    }
    if report.regime == Regime::SmallTwist {
        let hi = report.predicted_character.e_p_max;
        t.check(format!("{tag}: e(Psi^2 Phi_P) + e(Psi) = {} >= nu", hi + e_psi), hi + e_psi < nu);
        // the reverse twist by conj(Psi) lands back at level N exactly
        for e_back in report.predicted_character.e_p_min..=hi {
            let back = RegimeInput { e_phi: e_back, conjugate: false, coprime: false, ..input.clone() };
            match classify_regime(&back) {
                Ok(r) => t.check(
                    format!("{tag}: reverse twist from e = {e_back} gives {:?}", r.regime),
                    r.predicted_level == report.level
                        && r.level_exactness == crate::twist::LevelExactness::Exact,
                ),
                Err(e) => t.error(e),
            }
        }
    }
}

fn primitive_decomposition(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("primitive-decomposition", 1e-6);
    for field in fields(cfg, &mut t) {
        let mut rng = rng_for(cfg, "primitive-decomposition", field.d());
        if let Err(e) = decomposition_field(&field, cfg.bound.min(2000), &mut rng, &mut t) {
            t.error(e);
        }
    }
    t.finish()
}

fn decomposition_field(field: &NumberField, x: u64, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let ring = field.ring();
    let p = if field.degree() == 1 {
        Ideal::from_int(ring, 5)
    } else {
        Ideal::primes_above(ring, field.discriminant().unsigned_abs() as i128).remove(0)
    };
    let table = IdealTable::new(field, x);
    let mut found = 0;
    for nu in 3..=5u32 {
        for e_phi in (nu / 2 + 1)..nu {
            let level = p.pow(nu);
            let cond = p.pow(e_phi);
            let phis = enumerate_characters(field, &level, Some(&cond), true)?;
            let Some(phi) = phis.first() else { continue };
            let phi = HeckeCharacter::new(phi.clone())?;
            let tag = format!("{} nu={nu} e_phi={e_phi}", field.d());
            let summands = decompose_primitive(&level, &phi, &p)?;
            let want = oracle::extendable_exact_count(field, &p, nu - e_phi);
            t.check(format!("{tag}: {} summands, oracle count {want}", summands.len()), summands.len() == want);
            if field.degree() == 1 && nu == 3 && e_phi == 2 {
                t.check(format!("{tag}: expected 3 summands"), summands.len() == 3);
            }
            found += summands.len();
            let mut vectors = Vec::new();
            for s in &summands {
                t.check(format!("{tag}: summand not flagged p-primitive"), s.p_primitive);
                t.check(format!("{tag}: inner level divides N strictly"), s.inner_level.divides(&level) && s.inner_level != level);
                let g = sample_newform(&s.inner_level, &s.inner_character, 2, rng.random())?;
                let case = bad_prime_case(g.level(), g.character().conductor(), &p);
                let c = g.eigenvalue(&p)?.norm();
                t.check(
                    format!("{tag}: inner form has case {case:?}, |C(p, g)| = {c}"),
                    case == BadPrimeCase::FullConductor && c > 0.5,
                );
                vectors.push(twist_coefficients(&g.truncate(&table, x)?, &s.twisting));
            }
            let bound = (p.norm() as u64).pow(nu);
            for i in 0..summands.len() {
                for j in i + 1..summands.len() {
                    let (a, b) = (&summands[i].psi, &summands[j].psi);
                    match separating_ideal(a, b, field, bound) {
                        Some(m) => t.check(
                            format!("{tag}: witness {m} does not separate"),
                            a.ideal_value(&m) != b.ideal_value(&m),
                        ),
                        None => t.fail(format!("{tag}: no separating ideal of norm <= {bound}")),
                    }
                    let d = vectors[i].max_diff(&vectors[j]);
                    t.check(format!("{tag}: twisted inner forms agree up to {x} ({d:.2e})"), d > t.tol);
                }
            }
        }
    }
    t.check(format!("{}: some decomposition has summands", field.d()), found > 0);
    Ok(())
}

fn character_oracle(cfg: &SuiteConfig) -> CheckResult {
    let mut t = Tally::new("character-oracle", 0.5);
    for field in fields(cfg, &mut t) {
        let moduli = oracle::ideals_up_to(field.ring(), 200);
        let results: Vec<Tally> = moduli
            .par_iter()
            .map(|m| {
                let mut t = Tally::new("character-oracle", 0.5);
                if let Err(e) = character_oracle_one(&field, m, &mut t) {
                    t.error(e);
                }
                t
            })
            .collect();
        for r in results {
            merge(&mut t, r);
        }
    }
    t.finish()
}

fn character_oracle_one(field: &NumberField, m: &Ideal, t: &mut Tally) -> Result<()> {
    let tag = format!("{} mod {m}", field.d());
    let g = UnitGroup::new(field, m)?;
    let units = oracle::units(m);
    t.check(format!("{tag}: unit group size {} vs {}", g.size(), units.len()), g.size() as usize == units.len());
    let chars = enumerate_characters(field, m, None, false)?;
    t.check(format!("{tag}: {} characters", chars.len()), chars.len() == units.len());
    let mut tables = HashSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(m.norm() as u64);
    let ring = field.ring();
    let fac = m.factor()?;
    for chi in &chars {
        let table = oracle::character_table(chi);
        tables.insert(table.values().map(|a| (*a.numer(), *a.denom())).collect::<Vec<_>>());
        for _ in 0..8 {
            let (x, y) = (*pick(&mut rng, &units), *pick(&mut rng, &units));
            let xy = m.reduce(ring.mul(x, y));
            t.check(format!("{tag}: not multiplicative"), (table[&x] + table[&y] - table[&xy]).is_integer());
        }
        let c = chi.conductor();
        match oracle::conductor(chi) {
            Some(o) => t.check(format!("{tag}: conductor {c} vs {o}"), o == c),
            None => t.fail(format!("{tag}: oracle conductor undefined")),
        }
        if fac.len() >= 2 {
            crt_split(chi, &fac, &units, &tag, t)?;
        }
    }
    t.check(format!("{tag}: characters not pairwise distinct"), tables.len() == chars.len());
    Ok(())
}

fn crt_split(
    chi: &NumericalCharacter,
    fac: &[(Ideal, u32)],
    units: &[(i128, i128)],
    tag: &str,
    t: &mut Tally,
) -> Result<()> {
    let pp = fac[0].0.pow(fac[0].1);
    let n0 = chi.modulus().div_exact(&pp).unwrap();
    let (a, b) = decompose_character(chi, &pp, &n0)?;
    let ok = units.iter().all(|&x| (a.value(x).unwrap() + b.value(x).unwrap() - chi.value(x).unwrap()).is_integer());
    t.check(format!("{tag}: CRT split does not recombine"), ok);
    t.check(
        format!("{tag}: conductor not multiplicative over the split"),
        chi.conductor() == a.conductor().mul(&b.conductor()),
    );
    Ok(())
}
