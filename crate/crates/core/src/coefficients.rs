//! Formal newforms as ideal-indexed coefficient systems, and the operators
//! `T_r`, `B_r`, `A_p` and character twists on truncated coefficient vectors.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith;
use crate::characters::{angle_to_complex, Angle, HeckeCharacter};
use crate::error::{Error, Result};
use crate::field::NumberField;
use crate::ideal::Ideal;

/// Sorted `(prime index, exponent)` pairs describing an ideal.
pub type FactorKey = Vec<(u32, u32)>;

fn key_mul(a: &[(u32, u32)], b: &[(u32, u32)]) -> FactorKey {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(p, e)), Some(&(q, f))) if p == q => {
                out.push((p, e + f));
                i += 1;
                j += 1;
            }
            (Some(&(p, e)), Some(&(q, _))) if p < q => {
                out.push((p, e));
                i += 1;
            }
            (Some(&(p, e)), None) => {
                out.push((p, e));
                i += 1;
            }
            (_, Some(&(q, f))) => {
                out.push((q, f));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// `a / b` when `b | a`.
fn key_div(a: &[(u32, u32)], b: &[(u32, u32)]) -> Option<FactorKey> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &(p, e) in a {
        let f = if j < b.len() && b[j].0 == p {
            j += 1;
            b[j - 1].1
        } else {
            0
        };
        if f > e {
            return None;
        }
        if e > f {
            out.push((p, e - f));
        }
    }
    (j == b.len()).then_some(out)
}

fn key_gcd(a: &[(u32, u32)], b: &[(u32, u32)]) -> FactorKey {
    let mut out = Vec::new();
    for &(p, e) in a {
        if let Some(&(_, f)) = b.iter().find(|&&(q, _)| q == p) {
            out.push((p, e.min(f)));
        }
    }
    out
}

fn key_divisors(a: &[(u32, u32)]) -> Vec<FactorKey> {
    let mut out = vec![Vec::new()];
    for &(p, e) in a {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for d in &out {
            for k in 0..=e {
                let mut d2 = d.clone();
                if k > 0 {
                    d2.push((p, k));
                }
                next.push(d2);
            }
        }
        out = next;
    }
    out
}

/// All integral ideals of norm at most `bound`, sorted by `(norm, hnf)`, with
/// their factorisations.
pub struct IdealTable {
    field: NumberField,
    bound: u64,
    primes: Vec<Ideal>,
    prime_index: HashMap<Ideal, u32>,
    ideals: Vec<Ideal>,
    norms: Vec<u64>,
    keys: Vec<FactorKey>,
    index: HashMap<FactorKey, u32>,
}

impl fmt::Debug for IdealTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IdealTable(d={}, bound={}, {} ideals)", self.field.d(), self.bound, self.ideals.len())
    }
}

impl IdealTable {
    pub fn new(field: &NumberField, bound: u64) -> Arc<IdealTable> {
        let ring = field.ring();
        let mut primes = Vec::new();
        for p in arith::primes_up_to(bound) {
            for q in Ideal::primes_above(ring, p as i128) {
                if q.norm() as u64 <= bound {
                    primes.push(q);
                }
            }
        }
        primes.sort();
        let prime_norms: Vec<u64> = primes.iter().map(|p| p.norm() as u64).collect();

        let mut found: Vec<(Ideal, u64, FactorKey)> = Vec::new();
        // depth-first over prime indices in increasing order
        let mut stack: Vec<(usize, Ideal, u64, FactorKey)> = vec![(0, Ideal::unit(ring), 1, Vec::new())];
        while let Some((start, ideal, norm, key)) = stack.pop() {
            found.push((ideal.clone(), norm, key.clone()));
            for (i, &pn) in prime_norms.iter().enumerate().skip(start) {
                if norm * pn > bound {
                    break;
                }
                let mut cur = ideal.clone();
                let mut cn = norm;
                let mut e = 0u32;
                while cn * pn <= bound {
                    cur = cur.mul(&primes[i]);
                    cn *= pn;
                    e += 1;
                    let mut k = key.clone();
                    k.push((i as u32, e));
                    stack.push((i + 1, cur.clone(), cn, k));
                }
            }
        }
        found.sort_by(|a, b| a.0.cmp(&b.0));
        let prime_index = primes.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
        let mut ideals = Vec::with_capacity(found.len());
        let mut norms = Vec::with_capacity(found.len());
        let mut keys = Vec::with_capacity(found.len());
        let mut index = HashMap::with_capacity(found.len());
        for (i, (id, n, k)) in found.into_iter().enumerate() {
            index.insert(k.clone(), i as u32);
            ideals.push(id);
            norms.push(n);
            keys.push(k);
        }
        Arc::new(IdealTable { field: field.clone(), bound, primes, prime_index, ideals, norms, keys, index })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn ideals(&self) -> &[Ideal] {
        &self.ideals
    }

    pub fn primes(&self) -> &[Ideal] {
        &self.primes
    }

    pub fn norm_at(&self, i: usize) -> u64 {
        self.norms[i]
    }

    pub fn key_at(&self, i: usize) -> &FactorKey {
        &self.keys[i]
    }

    /// Number of ideals of norm at most `x`.
    pub fn count_up_to(&self, x: u64) -> usize {
        self.norms.partition_point(|&n| n <= x)
    }

    pub fn index_of(&self, ideal: &Ideal) -> Option<usize> {
        let key = self.key_of(ideal)?;
        self.index.get(&key).map(|&i| i as usize)
    }

    pub fn index_of_key(&self, key: &[(u32, u32)]) -> Option<usize> {
        self.index.get(key).map(|&i| i as usize)
    }

    /// Factor key of an integral ideal whose primes all lie in the table.
    pub fn key_of(&self, ideal: &Ideal) -> Option<FactorKey> {
        if !ideal.is_integral() {
            return None;
        }
        let mut key = Vec::new();
        for (p, e) in ideal.factor().ok()? {
            key.push((*self.prime_index.get(&p)?, e));
        }
        key.sort();
        Some(key)
    }

    pub fn prime_idx(&self, p: &Ideal) -> Option<u32> {
        self.prime_index.get(p).copied()
    }

    /// `Phi^*` on every ideal of norm at most `x`, built multiplicatively from
    /// its values at primes with exact angle sums.
    pub fn character_values(&self, phi: &HeckeCharacter, x: u64) -> Vec<Complex64> {
        let n = self.count_up_to(x);
        let prime_vals: Vec<Option<Angle>> = self
            .primes
            .iter()
            .map(|p| if p.norm() as u64 <= x { phi.ideal_value(p) } else { None })
            .collect();
        (0..n)
            .map(|i| {
                let mut a = Angle::zero();
                for &(p, e) in &self.keys[i] {
                    match prime_vals[p as usize] {
                        Some(t) => a += t * Angle::from_integer(e as i64),
                        None => return Complex64::new(0.0, 0.0),
                    }
                }
                angle_to_complex(a)
            })
            .collect()
    }
}

/// Coefficients `C(m)` for every integral ideal `m` of norm at most `bound`.
#[derive(Clone, Debug)]
pub struct CoefficientVector {
    table: Arc<IdealTable>,
    bound: u64,
    values: Vec<Complex64>,
    provenance: String,
}

#[derive(Serialize)]
pub struct CoefficientEntry {
    pub ideal: String,
    pub re: f64,
    pub im: f64,
}

impl CoefficientVector {
    pub fn new(table: Arc<IdealTable>, bound: u64, values: Vec<Complex64>, provenance: String) -> Self {
        assert!(bound <= table.bound, "table too small for bound {bound}");
        assert_eq!(values.len(), table.count_up_to(bound));
        CoefficientVector { table, bound, values, provenance }
    }

    pub fn table(&self) -> &Arc<IdealTable> {
        &self.table
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, ideal: &Ideal) -> Option<Complex64> {
        let i = self.table.index_of(ideal)?;
        self.values.get(i).copied()
    }

    /// `(ideal, value)` pairs in table order.
    pub fn entries(&self) -> impl Iterator<Item = (&Ideal, Complex64)> {
        self.table.ideals.iter().zip(self.values.iter().copied())
    }

    /// Restrict to a smaller norm bound.
    pub fn truncated(&self, x: u64) -> CoefficientVector {
        let x = x.min(self.bound);
        let n = self.table.count_up_to(x);
        CoefficientVector {
            table: self.table.clone(),
            bound: x,
            values: self.values[..n].to_vec(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn scale(&self, z: Complex64) -> CoefficientVector {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= z);
        out
    }

    pub fn sub(&self, other: &CoefficientVector) -> CoefficientVector {
        let x = self.bound.min(other.bound);
        let n = self.table.count_up_to(x);
        CoefficientVector {
            table: self.table.clone(),
            bound: x,
            values: (0..n).map(|i| self.values[i] - other.values[i]).collect(),
            provenance: format!("({}) - ({})", self.provenance, other.provenance),
        }
    }

    /// Largest entrywise deviation over the common range.
    pub fn max_diff(&self, other: &CoefficientVector) -> f64 {
        let n = self.values.len().min(other.values.len());
        (0..n).map(|i| (self.values[i] - other.values[i]).norm()).fold(0.0, f64::max)
    }

    pub fn to_entries(&self) -> Vec<CoefficientEntry> {
        self.entries()
            .map(|(id, v)| CoefficientEntry { ideal: id.to_string(), re: v.re, im: v.im })
            .collect()
    }
}

fn ideal_key(table: &IdealTable, r: &Ideal) -> Result<FactorKey> {
    if !r.is_integral() {
        return Err(Error::NotIntegral(r.to_string()));
    }
    table.key_of(r).ok_or(Error::InsufficientTruncation { needed: r.norm() as u64, have: table.bound })
}

/// `C(m, f | T_r) = sum_{a | m + r} Phi^*(a) N(a)^{k0-1} C(m r / a^2, f)` for
/// every `m` of norm at most `x`.
pub fn apply_t(v: &CoefficientVector, r: &Ideal, phi: &HeckeCharacter, k0: u32, x: u64) -> Result<CoefficientVector> {
    let table = &v.table;
    let nr = r.norm() as u64;
    let needed = x.saturating_mul(nr);
    if needed > v.bound {
        return Err(Error::InsufficientTruncation { needed, have: v.bound });
    }
    let rkey = ideal_key(table, r)?;
    // character values on divisors of r
    let divs: Vec<(FactorKey, Complex64)> = key_divisors(&rkey)
        .into_iter()
        .map(|a| {
            let i = table.index_of_key(&a).expect("divisor of r in table");
            let chi = phi.ideal_value_complex(&table.ideals[i]);
            let w = chi * (table.norms[i] as f64).powi(k0 as i32 - 1);
            (a, w)
        })
        .collect();
    let n = table.count_up_to(x);
    let values = (0..n)
        .map(|i| {
            let mkey = &table.keys[i];
            let g = key_gcd(mkey, &rkey);
            let mr = key_mul(mkey, &rkey);
            let mut s = Complex64::new(0.0, 0.0);
            for (a, w) in &divs {
                if key_div(&g, a).is_none() || w.norm() == 0.0 {
                    continue;
                }
                let a2 = key_mul(a, a);
                let q = key_div(&mr, &a2).expect("a^2 divides m r");
                let j = table.index_of_key(&q).expect("quotient within bound");
                s += w * v.values[j];
            }
            s
        })
        .collect();
    Ok(CoefficientVector {
        table: table.clone(),
        bound: x,
        values,
        provenance: format!("{} | T{}", v.provenance, r),
    })
}

/// Output bound `x` with `C(m, f | B_r) = C(m r^{-1}, f)`, needing `x / N(r) <= bound(v)`.
pub fn apply_b_to(v: &CoefficientVector, r: &Ideal, x: u64) -> Result<CoefficientVector> {
    let table = &v.table;
    let rkey = ideal_key(table, r)?;
    let nr = r.norm() as u64;
    if x / nr > v.bound {
        return Err(Error::InsufficientTruncation { needed: x / nr, have: v.bound });
    }
    if x > table.bound {
        return Err(Error::InsufficientTruncation { needed: x, have: table.bound });
    }
    let n = table.count_up_to(x);
    let values = (0..n)
        .map(|i| match key_div(&table.keys[i], &rkey) {
            Some(q) => v.values[table.index_of_key(&q).unwrap()],
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    Ok(CoefficientVector { table: table.clone(), bound: x, values, provenance: format!("{} | B{}", v.provenance, r) })
}

/// `B_r` keeping the bound of the input.
pub fn apply_b(v: &CoefficientVector, r: &Ideal) -> Result<CoefficientVector> {
    apply_b_to(v, r, v.bound)
}

/// `f | A_p = f - f | T_p | B_p`, keeping the bound of the input.
pub fn apply_a(v: &CoefficientVector, p: &Ideal, phi: &HeckeCharacter, k0: u32) -> Result<CoefficientVector> {
    if !p.is_prime() {
        return Err(Error::PNotPrime(p.to_string()));
    }
    let np = p.norm() as u64;
    let t = apply_t(v, p, phi, k0, v.bound / np)?;
    let b = apply_b_to(&t, p, v.bound)?;
    let mut out = v.sub(&b);
    out.provenance = format!("{} | A{}", v.provenance, p);
    Ok(out)
}

/// `C(m, f_Psi) = Psi^*(m) C(m, f)`.
pub fn twist_coefficients(v: &CoefficientVector, psi: &HeckeCharacter) -> CoefficientVector {
    let chi = v.table.character_values(psi, v.bound);
    let values = v.values.iter().zip(chi).map(|(a, b)| a * b).collect();
    CoefficientVector {
        table: v.table.clone(),
        bound: v.bound,
        values,
        provenance: format!("{} twisted by {}", v.provenance, psi.conductor()),
    }
}

/// Which case of the bad-prime constraints applies at a prime `q | N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BadPrimeCase {
    /// The character is not defined modulo `N q^{-1}`: `|C(q)| = N(q)^{(k0-1)/2}`.
    FullConductor,
    /// `q^2 | N` and the character is defined modulo `N q^{-1}`: `C(q) = 0`.
    Vanishing,
    /// `q || N` and the character is defined modulo `N q^{-1}`: `|C(q)|^2 = N(q)^{k0-2}`.
    Exact,
}

impl BadPrimeCase {
    /// Expected `|C(q)|`.
    pub fn magnitude(self, norm_q: f64, k0: u32) -> f64 {
        let k = k0 as f64;
        match self {
            BadPrimeCase::FullConductor => norm_q.powf((k - 1.0) / 2.0),
            BadPrimeCase::Vanishing => 0.0,
            BadPrimeCase::Exact => norm_q.powf((k - 2.0) / 2.0),
        }
    }
}

/// The case at `q | level` for a character with the given conductor.
pub fn bad_prime_case(level: &Ideal, conductor: &Ideal, q: &Ideal) -> BadPrimeCase {
    let nu = level.ord_unchecked(q);
    let e = if conductor.is_unit_ideal() { 0 } else { conductor.ord_unchecked(q) };
    if e == nu {
        BadPrimeCase::FullConductor
    } else if nu >= 2 {
        BadPrimeCase::Vanishing
    } else {
        BadPrimeCase::Exact
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A generator seeded from `seed` and a prime, independent of draw order.
fn prime_rng(seed: u64, q: &Ideal) -> ChaCha8Rng {
    let (a, b, c, _) = q.hnf();
    let mut h = splitmix(seed);
    for x in [q.d() as i128, a, b, c] {
        h = splitmix(h ^ (x as u64));
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn random_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    let t = rng.random::<f64>();
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
}

#[derive(Clone, Debug)]
enum Source {
    /// Eigenvalues at good primes drawn from a per-prime generator.
    Seeded(u64),
    /// `lambda_q = Psi^*(q) lambda_q(base)`.
    Twisted { base: Arc<FormalNewform>, psi: HeckeCharacter },
    Explicit,
}

/// A system of Hecke eigenvalues with its level, weight and character.
#[derive(Clone, Debug)]
pub struct FormalNewform {
    field: NumberField,
    level: Ideal,
    k0: u32,
    character: HeckeCharacter,
    eigenvalues: BTreeMap<Ideal, Complex64>,
    source: Source,
    cache: Arc<Mutex<HashMap<Ideal, Complex64>>>,
}

impl FormalNewform {
    /// Build from explicit eigenvalues; primes missing from the map raise
    /// `MissingEigenvalue` when needed.
    pub fn new(
        level: &Ideal,
        character: &HeckeCharacter,
        k0: u32,
        eigenvalues: BTreeMap<Ideal, Complex64>,
    ) -> Result<FormalNewform> {
        let field = character.field().clone();
        let character = character_at_level(level, character)?;
        if k0 < 2 {
            return Err(Error::InvalidInput("k0 must be at least 2".into()));
        }
        for q in eigenvalues.keys() {
            if !q.is_prime() {
                return Err(Error::PNotPrime(q.to_string()));
            }
        }
        Ok(FormalNewform {
            field,
            level: level.clone(),
            k0,
            character,
            eigenvalues,
            source: Source::Explicit,
            cache: Default::default(),
        })
    }

    /// The form whose eigenvalues are `Psi^*(q) lambda_q(base)` at every prime,
    /// with explicit values taking precedence (required at primes dividing
    /// the conductor of `Psi`).
    pub fn twisted(
        base: &FormalNewform,
        psi: &HeckeCharacter,
        level: &Ideal,
        character: &HeckeCharacter,
        overrides: BTreeMap<Ideal, Complex64>,
    ) -> Result<FormalNewform> {
        let mut f = FormalNewform::new(level, character, base.k0, overrides)?;
        f.source = Source::Twisted { base: Arc::new(base.clone()), psi: psi.clone() };
        Ok(f)
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn level(&self) -> &Ideal {
        &self.level
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    pub fn character(&self) -> &HeckeCharacter {
        &self.character
    }

    /// Explicitly stored eigenvalues (all bad primes for sampled forms).
    pub fn explicit_eigenvalues(&self) -> &BTreeMap<Ideal, Complex64> {
        &self.eigenvalues
    }

    pub fn seed(&self) -> Option<u64> {
        match self.source {
            Source::Seeded(s) => Some(s),
            _ => None,
        }
    }

    /// `lambda_q = C(q, f)` for a prime `q`.
    pub fn eigenvalue(&self, q: &Ideal) -> Result<Complex64> {
        if let Some(&v) = self.eigenvalues.get(q) {
            return Ok(v);
        }
        if let Some(&v) = self.cache.lock().unwrap().get(q) {
            return Ok(v);
        }
        let v = match &self.source {
            Source::Explicit => return Err(Error::MissingEigenvalue(q.to_string())),
            Source::Seeded(seed) => {
                if q.divides(&self.level) {
                    return Err(Error::MissingEigenvalue(q.to_string()));
                }
                // alpha + beta with |alpha| = |beta| = N(q)^{(k0-1)/2} and
                // alpha beta = Phi^*(q) N(q)^{k0-1}
                let mut rng = prime_rng(*seed, q);
                let scale = (q.norm() as f64).powf((self.k0 as f64 - 1.0) / 2.0);
                let chi = self.character.ideal_value(q).expect("q does not divide the level");
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                2.0 * scale * theta.cos() * angle_to_complex(chi / 2)
            }
            Source::Twisted { base, psi } => {
                if q.divides(psi.modulus()) {
                    return Err(Error::MissingEigenvalue(q.to_string()));
                }
                psi.ideal_value_complex(q) * base.eigenvalue(q)?
            }
        };
        self.cache.lock().unwrap().insert(q.clone(), v);
        Ok(v)
    }

    /// `C(q^t)` for `t = 0..=max_t`.
    pub fn prime_power_coefficients(&self, q: &Ideal, max_t: u32) -> Result<Vec<Complex64>> {
        let lam = self.eigenvalue(q)?;
        let mut out = Vec::with_capacity(max_t as usize + 1);
        out.push(Complex64::new(1.0, 0.0));
        if q.divides(&self.level) {
            for t in 1..=max_t {
                out.push(out[t as usize - 1] * lam);
            }
        } else {
            let c = self.character.ideal_value_complex(q) * (q.norm() as f64).powi(self.k0 as i32 - 1);
            for t in 1..=max_t as usize {
                let prev2 = if t >= 2 { out[t - 2] } else { Complex64::new(0.0, 0.0) };
                out.push(lam * out[t - 1] - c * prev2);
            }
        }
        Ok(out)
    }

    /// `C(m, f)` via the Euler product.
    pub fn coefficient(&self, m: &Ideal) -> Result<Complex64> {
        if !m.is_integral() {
            return Err(Error::NotIntegral(m.to_string()));
        }
        let mut v = Complex64::new(1.0, 0.0);
        for (q, e) in m.factor()? {
            v *= self.prime_power_coefficients(&q, e)?[e as usize];
        }
        Ok(v)
    }

    /// All coefficients up to norm `x` on the given table.
    pub fn truncate(&self, table: &Arc<IdealTable>, x: u64) -> Result<CoefficientVector> {
        if x > table.bound {
            return Err(Error::InsufficientTruncation { needed: x, have: table.bound });
        }
        if table.field.ring() != self.field.ring() {
            return Err(Error::MixedFields(self.field.d(), table.field.d()));
        }
        // prime-power coefficients for every prime of norm <= x
        let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(table.primes.len());
        for p in &table.primes {
            let np = p.norm() as u64;
            if np > x {
                break;
            }
            let mut t = 0u32;
            let mut n = 1u64;
            while n.saturating_mul(np) <= x {
                n *= np;
                t += 1;
            }
            powers.push(self.prime_power_coefficients(p, t)?);
        }
        let n = table.count_up_to(x);
        let values = (0..n)
            .map(|i| {
                table.keys[i].iter().fold(Complex64::new(1.0, 0.0), |acc, &(p, e)| acc * powers[p as usize][e as usize])
            })
            .collect();
        Ok(CoefficientVector { table: table.clone(), bound: x, values, provenance: self.describe() })
    }

    fn describe(&self) -> String {
        match &self.source {
            Source::Seeded(s) => format!("newform(level={}, k0={}, seed={s})", self.level, self.k0),
            Source::Twisted { base, psi } => format!("{} twisted by {}", base.describe(), psi.conductor()),
            Source::Explicit => format!("newform(level={}, k0={})", self.level, self.k0),
        }
    }

    /// Re-check the bad-prime magnitude constraints; returns the violations.
    pub fn check_bad_primes(&self, tol: f64) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (q, _) in self.level.factor()? {
            let case = bad_prime_case(&self.level, self.character.conductor(), &q);
            let lam = self.eigenvalue(&q)?;
            let want = case.magnitude(q.norm() as f64, self.k0);
            if (lam.norm() - want).abs() > tol * want.max(1.0) {
                bad.push(format!("{q}: |lambda| = {} but expected {want} ({case:?})", lam.norm()));
            }
        }
        Ok(bad)
    }
}

/// The character induced to modulus `level`, checking that its conductor
/// divides the level.
fn character_at_level(level: &Ideal, character: &HeckeCharacter) -> Result<HeckeCharacter> {
    if !character.conductor().divides(level) {
        return Err(Error::ConductorDoesNotDivideLevel {
            conductor: character.conductor().to_string(),
            level: level.to_string(),
        });
    }
    if character.modulus() == level {
        Ok(character.clone())
    } else {
        character.primitive().induce(level)
    }
}

/// Synthesise a formal newform of the given level, character and weight:
/// bad-prime eigenvalues obey the magnitude constraints (or vanish), good
/// primes get `lambda_q = alpha + beta` with `|alpha| = |beta| = N(q)^{(k0-1)/2}`,
/// so `|lambda_q| <= 2 N(q)^{(k0-1)/2}`; deterministic in `seed`.
pub fn sample_newform(level: &Ideal, character: &HeckeCharacter, k0: u32, seed: u64) -> Result<FormalNewform> {
    let chi = character_at_level(level, character)?;
    let mut eig = BTreeMap::new();
    for (q, _) in level.factor()? {
        let case = bad_prime_case(level, chi.conductor(), &q);
        let mut rng = prime_rng(seed, &q);
        let mag = case.magnitude(q.norm() as f64, k0);
        let v = if case == BadPrimeCase::Vanishing { Complex64::new(0.0, 0.0) } else { mag * random_phase(&mut rng) };
        eig.insert(q, v);
    }
    let mut f = FormalNewform::new(level, &chi, k0, eig)?;
    f.source = Source::Seeded(seed);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;
    use crate::ideal::parse_ideal;

    fn k5() -> NumberField {
        NumberField::new(5).unwrap()
    }

    #[test]
    fn table_small_bounds() {
        let k = k5();
        let t = IdealTable::new(&k, 5);
        let norms: Vec<u64> = (0..t.ideals().len()).map(|i| t.norm_at(i)).collect();
        // (1); (2) of norm 4; (sqrt5) of norm 5
        assert_eq!(norms, vec![1, 4, 5]);
        let t1 = IdealTable::new(&k, 1);
        assert_eq!(t1.ideals(), &[Ideal::unit(k.ring())]);
    }

    #[test]
    fn truncate_one() {
        let k = k5();
        let f = sample_newform(&Ideal::unit(k.ring()), &HeckeCharacter::trivial(&k), 2, 1).unwrap();
        let t = IdealTable::new(&k, 10);
        let v = f.truncate(&t, 1).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.values()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn degree_two_expansion() {
        let k = k5();
        let n = parse_ideal(k.ring(), "(2)").unwrap();
        let f = sample_newform(&n, &HeckeCharacter::trivial(&k), 3, 9).unwrap();
        let q = parse_ideal(k.ring(), "(11, w-4)").unwrap();
        let lam = f.eigenvalue(&q).unwrap();
        let want = lam * lam - Complex64::new(11f64.powi(2), 0.0);
        assert!((f.coefficient(&q.pow(2)).unwrap() - want).norm() < 1e-9);
    }

    #[test]
    fn deterministic_seed() {
        let k = k5();
        let n = parse_ideal(k.ring(), "(11, w-4)").unwrap();
        let a = sample_newform(&n, &HeckeCharacter::trivial(&k), 2, 5).unwrap();
        let b = sample_newform(&n, &HeckeCharacter::trivial(&k), 2, 5).unwrap();
        assert_eq!(a.explicit_eigenvalues(), b.explicit_eigenvalues());
        let t = IdealTable::new(&k, 200);
        assert_eq!(a.truncate(&t, 200).unwrap().values(), b.truncate(&t, 200).unwrap().values());
    }

    #[test]
    fn vanishing_at_p_squared() {
        let q = NumberField::new(1).unwrap();
        let n = parse_ideal(q.ring(), "(9)").unwrap();
        let f = sample_newform(&n, &HeckeCharacter::trivial(&q), 2, 3).unwrap();
        let p = parse_ideal(q.ring(), "(3)").unwrap();
        assert_eq!(f.eigenvalue(&p).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn full_conductor_magnitude() {
        let q = NumberField::new(1).unwrap();
        let n = parse_ideal(q.ring(), "(5)").unwrap();
        let chi = enumerate_characters(&q, &n, Some(&n), true).unwrap().remove(0);
        let f = sample_newform(&n, &HeckeCharacter::new(chi).unwrap(), 4, 3).unwrap();
        assert!((f.eigenvalue(&n).unwrap().norm() - 5f64.powf(1.5)).abs() < 1e-9);
        assert!(f.check_bad_primes(1e-9).unwrap().is_empty());
    }

    #[test]
    fn conductor_must_divide_level() {
        let q = NumberField::new(1).unwrap();
        let m = parse_ideal(q.ring(), "(5)").unwrap();
        let chi = enumerate_characters(&q, &m, Some(&m), true).unwrap().remove(0);
        let n = parse_ideal(q.ring(), "(3)").unwrap();
        assert!(matches!(
            sample_newform(&n, &HeckeCharacter::new(chi).unwrap(), 2, 0),
            Err(Error::ConductorDoesNotDivideLevel { .. })
        ));
    }

    #[test]
    fn operators_identity_cases() {
        let k = k5();
        let t = IdealTable::new(&k, 300);
        let one = Ideal::unit(k.ring());
        let triv = HeckeCharacter::trivial(&k);
        let f = sample_newform(&parse_ideal(k.ring(), "(2)").unwrap(), &triv, 2, 4).unwrap();
        let v = f.truncate(&t, 300).unwrap();
        assert!(apply_t(&v, &one, f.character(), 2, 300).unwrap().max_diff(&v) < 1e-12);
        assert!(apply_b(&v, &one).unwrap().max_diff(&v) < 1e-12);
        assert!(twist_coefficients(&v, &triv).max_diff(&v) < 1e-12);
        assert!(matches!(
            apply_t(&v, &parse_ideal(k.ring(), "(2)").unwrap(), f.character(), 2, 300),
            Err(Error::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn key_arithmetic() {
        let a = vec![(0, 2), (3, 1)];
        let b = vec![(0, 1), (2, 4)];
        assert_eq!(key_mul(&a, &b), vec![(0, 3), (2, 4), (3, 1)]);
        assert_eq!(key_div(&key_mul(&a, &b), &b), Some(a.clone()));
        assert_eq!(key_div(&a, &b), None);
        assert_eq!(key_gcd(&a, &b), vec![(0, 1)]);
        assert_eq!(key_divisors(&a).len(), 6);
    }
}
