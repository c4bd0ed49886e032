//! Unit groups of `O/N`, numerical characters, Hecke ideal characters and
//! Gauss sums.
//!
//! Character values are exact angles in `Q/Z`: the value at `x` is
//! `exp(2*pi*i*angle)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField, Ring};
use crate::ideal::{crt_solve, Ideal};

/// Largest modulus norm for which unit groups are enumerated.
pub const UNIT_GROUP_BOUND: i128 = 100_000;

pub type Angle = Ratio<i64>;

/// Reduce an angle into `[0, 1)`.
pub fn reduce_angle(a: Angle) -> Angle {
    a - a.floor()
}

/// `e(a) = exp(2 pi i a)`, exact at multiples of 1/4 and with
/// `e(-a) = conj(e(a))` holding bitwise.
pub fn angle_to_complex(a: Angle) -> Complex64 {
    let r = reduce_angle(a);
    let half = Angle::new(1, 2);
    if r > half {
        return angle_to_complex(Angle::from_integer(1) - r).conj();
    }
    match (*r.numer(), *r.denom()) {
        (0, _) => Complex64::new(1.0, 0.0),
        (1, 2) => Complex64::new(-1.0, 0.0),
        (1, 4) => Complex64::new(0.0, 1.0),
        (n, d) => {
            let (s, c) = (2.0 * std::f64::consts::PI * (n as f64 / d as f64)).sin_cos();
            Complex64::new(c, s)
        }
    }
}

pub fn format_angle(a: &Angle) -> String {
    format!("{}/{}", a.numer(), a.denom())
}

pub fn parse_angle(s: &str) -> Result<Angle> {
    let err = || Error::Parse(format!("bad angle {s:?}"));
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| err())?;
            let q: i64 = q.trim().parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            Ratio::new(p, q)
        }
        None => Ratio::from_integer(s.parse().map_err(|_| err())?),
    };
    Ok(reduce_angle(r))
}

fn mul_mod(ring: Ring, m: &Ideal, u: (i128, i128), v: (i128, i128)) -> (i128, i128) {
    m.reduce(ring.mul(u, v))
}

fn pow_mod(ring: Ring, m: &Ideal, mut base: (i128, i128), mut e: u64) -> (i128, i128) {
    let mut acc = m.reduce((1, 0));
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(ring, m, acc, base);
        }
        base = mul_mod(ring, m, base, base);
        e >>= 1;
    }
    acc
}

/// `(O/P^e)^x` with an invariant-factor basis and a discrete-log table.
#[derive(Debug)]
struct Component {
    prime: Ideal,
    exp: u32,
    modulus: Ideal,
    gens: Vec<(i128, i128)>,
    orders: Vec<u64>,
    /// `dlog[index]` is the exponent vector of the residue with that index.
    dlog: Vec<Option<Vec<u64>>>,
    /// For `f = 1..exp`, a generating set (as exponent vectors) of the units
    /// congruent to 1 mod `P^f`; entry `f - 1`.
    kernels: Vec<Vec<Vec<u64>>>,
}

impl Component {
    fn index(&self, (x, y): (i128, i128)) -> usize {
        let (a, _, _, _) = self.modulus.hnf();
        (y * a + x) as usize
    }

    fn new(ring: Ring, prime: Ideal, exp: u32) -> Component {
        let modulus = prime.pow(exp);
        let (a, _, c, _) = modulus.hnf();
        let c = if ring.degree() == 1 { 1 } else { c };
        let n = (a * c) as usize;
        let mut units = Vec::new();
        for y in 0..c {
            for x in 0..a {
                if !prime.contains_int((x, y)) {
                    units.push((x, y));
                }
            }
        }
        let size = units.len() as u64;
        let index = |(x, y): (i128, i128)| (y * a + x) as usize;
        let one = modulus.reduce((1, 0));
        let order_of = |u: (i128, i128)| -> u64 {
            let mut ord = size;
            for (l, _) in arith::factor(size as i128) {
                let l = l as u64;
                while ord.is_multiple_of(l) && pow_mod(ring, &modulus, u, ord / l) == one {
                    ord /= l;
                }
            }
            ord
        };

        // Sylow bases: for each l | size pick elements of maximal order in the
        // quotient by what is already generated, then adjust within the coset
        // to an element of exactly that order.
        let mut sylow: Vec<Vec<((i128, i128), u64)>> = Vec::new();
        for (l, _) in arith::factor(size.max(1) as i128) {
            if size == 1 {
                break;
            }
            let l = l as u64;
            let mut lpart = 1u64;
            while size.is_multiple_of(lpart * l) {
                lpart *= l;
            }
            let cof = size / lpart;
            let mut h: Vec<(i128, i128)> = units.iter().map(|&u| pow_mod(ring, &modulus, u, cof)).collect();
            h.sort_by_key(|&u| index(u));
            h.dedup();
            let mut sub: HashSet<(i128, i128)> = HashSet::from([one]);
            let mut basis = Vec::new();
            while (sub.len() as u64) < lpart {
                let mut best = (one, 1u64);
                for &x in &h {
                    let mut m = 1u64;
                    let mut y = x;
                    while !sub.contains(&y) {
                        y = pow_mod(ring, &modulus, y, l);
                        m *= l;
                    }
                    if m > best.1 {
                        best = (x, m);
                    }
                }
                let (x, m) = best;
                let mut sorted_sub: Vec<_> = sub.iter().copied().collect();
                sorted_sub.sort_by_key(|&u| index(u));
                let g = sorted_sub
                    .into_iter()
                    .map(|s| mul_mod(ring, &modulus, x, s))
                    .find(|&g| pow_mod(ring, &modulus, g, m) == one)
                    .expect("coset contains an element of exact order");
                let mut next = HashSet::new();
                let mut p = one;
                for _ in 0..m {
                    for &s in &sub {
                        next.insert(mul_mod(ring, &modulus, s, p));
                    }
                    p = mul_mod(ring, &modulus, p, g);
                }
                sub = next;
                basis.push((g, m));
            }
            sylow.push(basis);
        }
        // Merge Sylow bases into invariant factors.
        let rank = sylow.iter().map(Vec::len).max().unwrap_or(0);
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        for i in 0..rank {
            let mut g = one;
            let mut o = 1u64;
            for b in &sylow {
                if let Some(&(x, m)) = b.get(i) {
                    g = mul_mod(ring, &modulus, g, x);
                    o *= m;
                }
            }
            debug_assert_eq!(order_of(g), o);
            gens.push(g);
            orders.push(o);
        }
        // Discrete logarithms by enumerating all exponent vectors.
        let mut dlog: Vec<Option<Vec<u64>>> = vec![None; n];
        let mut layer: Vec<((i128, i128), Vec<u64>)> = vec![(one, vec![0; gens.len()])];
        for (j, (&g, &o)) in gens.iter().zip(&orders).enumerate() {
            let mut next = Vec::with_capacity(layer.len() * o as usize);
            for (e, v) in &layer {
                let mut cur = *e;
                for k in 0..o {
                    let mut w = v.clone();
                    w[j] = k;
                    next.push((cur, w));
                    cur = mul_mod(ring, &modulus, cur, g);
                }
            }
            layer = next;
        }
        assert_eq!(layer.len() as u64, size, "basis does not span the unit group");
        for (e, v) in layer {
            let i = index(e);
            assert!(dlog[i].is_none(), "basis is not independent");
            dlog[i] = Some(v);
        }

        let mut comp = Component { prime, exp, modulus, gens, orders, dlog, kernels: Vec::new() };
        for f in 1..exp {
            let pf = comp.prime.pow(f);
            let mut sub: HashSet<Vec<u64>> = HashSet::from([vec![0; comp.gens.len()]]);
            let mut kgens = Vec::new();
            for &u in &units {
                if !pf.contains_int((u.0 - 1, u.1)) {
                    continue;
                }
                let v = comp.dlog[index(u)].clone().unwrap();
                if sub.contains(&v) {
                    continue;
                }
                let mut next = sub.clone();
                let mut frontier: Vec<Vec<u64>> = sub.iter().cloned().collect();
                while let Some(s) = frontier.pop() {
                    let t: Vec<u64> =
                        s.iter().zip(&v).zip(&comp.orders).map(|((a, b), o)| (a + b) % o).collect();
                    if next.insert(t.clone()) {
                        frontier.push(t);
                    }
                }
                sub = next;
                kgens.push(v);
            }
            comp.kernels.push(kgens);
        }
        comp
    }
}

/// The unit group of `O/N`.
#[derive(Debug)]
pub struct UnitGroup {
    field: NumberField,
    modulus: Ideal,
    components: Vec<Component>,
    generators: Vec<(i128, i128)>,
    orders: Vec<u64>,
}

fn cache() -> &'static Mutex<HashMap<Ideal, Arc<UnitGroup>>> {
    static CACHE: OnceLock<Mutex<HashMap<Ideal, Arc<UnitGroup>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl UnitGroup {
    /// The unit group of `O/N` (memoised per modulus).
    pub fn new(field: &NumberField, modulus: &Ideal) -> Result<Arc<UnitGroup>> {
        if modulus.ring() != field.ring() {
            return Err(Error::MixedFields(field.d(), modulus.d()));
        }
        if !modulus.is_integral() {
            return Err(Error::NotIntegral(modulus.to_string()));
        }
        if modulus.norm() > UNIT_GROUP_BOUND {
            return Err(Error::NormTooLarge { norm: modulus.norm(), bound: UNIT_GROUP_BOUND });
        }
        if let Some(g) = cache().lock().unwrap().get(modulus) {
            return Ok(g.clone());
        }
        let g = Arc::new(UnitGroup::build(field, modulus)?);
        cache().lock().unwrap().insert(modulus.clone(), g.clone());
        Ok(g)
    }

    fn build(field: &NumberField, modulus: &Ideal) -> Result<UnitGroup> {
        let ring = field.ring();
        let fac = modulus.factor()?;
        let components: Vec<Component> = fac.into_iter().map(|(p, e)| Component::new(ring, p, e)).collect();
        let mut generators = Vec::new();
        let mut orders = Vec::new();
        for (i, comp) in components.iter().enumerate() {
            let rest = components
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(Ideal::unit(ring), |acc, (_, c)| acc.mul(&c.modulus));
            for (&g, &o) in comp.gens.iter().zip(&comp.orders) {
                let lift = if rest.is_unit_ideal() {
                    g
                } else {
                    let x = crt_solve(&[
                        (FieldElement::from_ints(ring, g.0, g.1), comp.modulus.clone()),
                        (FieldElement::one(ring), rest.clone()),
                    ])?;
                    x.to_ints().unwrap()
                };
                generators.push(modulus.reduce(lift));
                orders.push(o);
            }
        }
        Ok(UnitGroup { field: field.clone(), modulus: modulus.clone(), components, generators, orders })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn modulus(&self) -> &Ideal {
        &self.modulus
    }

    pub fn ring(&self) -> Ring {
        self.field.ring()
    }

    pub fn generators(&self) -> Vec<FieldElement> {
        self.generators.iter().map(|&(x, y)| FieldElement::from_ints(self.ring(), x, y)).collect()
    }

    pub fn generator_coords(&self) -> &[(i128, i128)] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn size(&self) -> u64 {
        self.orders.iter().product()
    }

    /// `(P, e)` for each prime-power component, in order.
    pub fn components(&self) -> Vec<(Ideal, u32)> {
        self.components.iter().map(|c| (c.prime.clone(), c.exp)).collect()
    }

    pub fn is_unit(&self, x: (i128, i128)) -> bool {
        self.components.iter().all(|c| !c.prime.contains_int(x))
    }

    /// Exponent vector of `x` in terms of the generators, or `None` if `x` is
    /// not a unit modulo `N`.
    pub fn dlog(&self, x: (i128, i128)) -> Option<Vec<u64>> {
        let mut out = Vec::with_capacity(self.generators.len());
        for c in &self.components {
            let r = c.modulus.reduce(x);
            out.extend(c.dlog[c.index(r)].as_ref()?.iter().copied());
        }
        Some(out)
    }

    /// Residues coprime to the modulus, in index order.
    pub fn units(&self) -> Vec<(i128, i128)> {
        let (a, _, c, _) = self.modulus.hnf();
        let c = if self.ring().degree() == 1 { 1 } else { c };
        let mut out = Vec::new();
        for y in 0..c {
            for x in 0..a {
                if self.is_unit((x, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    fn component_range(&self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.components[..i].iter().map(|c| c.gens.len()).sum();
        start..start + self.components[i].gens.len()
    }
}

/// A character of `(O/N)^x`, given by its angles on the unit group generators.
#[derive(Clone)]
pub struct NumericalCharacter {
    group: Arc<UnitGroup>,
    angles: Vec<Angle>,
}

impl fmt::Debug for NumericalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericalCharacter")
            .field("modulus", &self.group.modulus.to_string())
            .field("angles", &self.angles.iter().map(format_angle).collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for NumericalCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.angles == other.angles
    }
}

impl Eq for NumericalCharacter {}

impl std::hash::Hash for NumericalCharacter {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.group.modulus.hash(state);
        self.angles.hash(state);
    }
}

#[derive(Serialize)]
struct CharacterJson {
    modulus: String,
    angles: Vec<String>,
}

impl Serialize for NumericalCharacter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CharacterJson {
            modulus: self.group.modulus.to_string(),
            angles: self.angles.iter().map(format_angle).collect(),
        }
        .serialize(s)
    }
}

impl NumericalCharacter {
    pub fn trivial(field: &NumberField, modulus: &Ideal) -> Result<NumericalCharacter> {
        let group = UnitGroup::new(field, modulus)?;
        let angles = vec![Angle::zero(); group.orders.len()];
        Ok(NumericalCharacter { group, angles })
    }

    /// Build from angles on the generators; each angle times the generator
    /// order must be an integer.
    pub fn from_angles(group: Arc<UnitGroup>, angles: Vec<Angle>) -> Result<NumericalCharacter> {
        if angles.len() != group.orders.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} angles, got {}",
                group.orders.len(),
                angles.len()
            )));
        }
        let angles: Vec<Angle> = angles.into_iter().map(reduce_angle).collect();
        for (a, &o) in angles.iter().zip(&group.orders) {
            if !(*a * Angle::from_integer(o as i64)).is_integer() {
                return Err(Error::InvalidInput(format!(
                    "angle {} incompatible with generator of order {o}",
                    format_angle(a)
                )));
            }
        }
        Ok(NumericalCharacter { group, angles })
    }

    /// The character determined by its value on each generator.
    fn from_fn(group: Arc<UnitGroup>, f: impl Fn((i128, i128)) -> Angle) -> NumericalCharacter {
        let angles = group.generators.iter().map(|&g| reduce_angle(f(g))).collect();
        NumericalCharacter { group, angles }
    }

    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }

    pub fn field(&self) -> &NumberField {
        &self.group.field
    }

    pub fn modulus(&self) -> &Ideal {
        &self.group.modulus
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn is_trivial(&self) -> bool {
        self.angles.iter().all(Zero::is_zero)
    }

    /// Order of the character in the dual group.
    pub fn order(&self) -> u64 {
        self.angles.iter().fold(1u64, |acc, a| num_integer::Integer::lcm(&acc, &(*a.denom() as u64)))
    }

    /// `chi(x)` as an angle, `None` when `x` is not a unit mod N.
    pub fn value(&self, x: (i128, i128)) -> Option<Angle> {
        let v = self.group.dlog(x)?;
        Some(self.angle_of(&v))
    }

    pub fn value_of(&self, x: &FieldElement) -> Option<Angle> {
        let v = x.to_ints()?;
        self.value(v)
    }

    fn angle_of(&self, exps: &[u64]) -> Angle {
        let mut s = Angle::zero();
        for (a, &e) in self.angles.iter().zip(exps) {
            s += *a * Angle::from_integer(e as i64);
        }
        reduce_angle(s)
    }

    pub fn conj(&self) -> NumericalCharacter {
        NumericalCharacter {
            group: self.group.clone(),
            angles: self.angles.iter().map(|a| reduce_angle(-*a)).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> NumericalCharacter {
        NumericalCharacter {
            group: self.group.clone(),
            angles: self.angles.iter().map(|a| reduce_angle(*a * Angle::from_integer(k))).collect(),
        }
    }

    /// The character `x -> chi(x mod N)` modulo a multiple `M` of `N`.
    pub fn induce(&self, m: &Ideal) -> Result<NumericalCharacter> {
        if !self.modulus().divides(m) {
            return Err(Error::ModulusMismatch { expected: self.modulus().to_string(), found: m.to_string() });
        }
        if m == self.modulus() {
            return Ok(self.clone());
        }
        let group = UnitGroup::new(self.field(), m)?;
        Ok(NumericalCharacter::from_fn(group, |g| self.value(g).expect("unit mod N")))
    }

    /// Pointwise product, modulo the lcm of the two moduli.
    pub fn mul(&self, other: &NumericalCharacter) -> Result<NumericalCharacter> {
        if self.field().ring() != other.field().ring() {
            return Err(Error::MixedFields(self.field().d(), other.field().d()));
        }
        let m = self.modulus().lcm(other.modulus());
        let a = self.induce(&m)?;
        let b = other.induce(&m)?;
        let angles = a.angles.iter().zip(&b.angles).map(|(x, y)| reduce_angle(x + y)).collect();
        Ok(NumericalCharacter { group: a.group, angles })
    }

    /// Whether the character is trivial on the units congruent to 1 modulo
    /// `P_i^{f_i}` in each component (`f_i` given per component).
    fn trivial_on_kernel(&self, comp: usize, f: u32) -> bool {
        let c = &self.group.components[comp];
        let range = self.group.component_range(comp);
        let local = &self.angles[range];
        let check = |v: &Vec<u64>| {
            let mut s = Angle::zero();
            for (a, &e) in local.iter().zip(v) {
                s += *a * Angle::from_integer(e as i64);
            }
            reduce_angle(s).is_zero()
        };
        if f == 0 {
            local.iter().all(Zero::is_zero)
        } else if f >= c.exp {
            true
        } else {
            c.kernels[f as usize - 1].iter().all(check)
        }
    }

    /// Exponents of the conductor, one per component of the modulus.
    fn conductor_exponents(&self) -> Vec<u32> {
        (0..self.group.components.len())
            .map(|i| {
                let mut f = self.group.components[i].exp;
                while f > 0 && self.trivial_on_kernel(i, f - 1) {
                    f -= 1;
                }
                f
            })
            .collect()
    }

    /// The smallest modulus through which the character factors.
    pub fn conductor(&self) -> Ideal {
        let ring = self.field().ring();
        self.group
            .components
            .iter()
            .zip(self.conductor_exponents())
            .fold(Ideal::unit(ring), |acc, (c, f)| acc.mul(&c.prime.pow(f)))
    }

    /// Exponent of the conductor at a prime (zero if the prime does not divide
    /// the modulus).
    pub fn exponential_conductor(&self, p: &Ideal) -> u32 {
        let exps = self.conductor_exponents();
        self.group.components.iter().zip(exps).find(|(c, _)| &c.prime == p).map(|(_, f)| f).unwrap_or(0)
    }

    /// The character modulo a divisor `M` of `N` through which it factors.
    pub fn restrict(&self, m: &Ideal) -> Result<NumericalCharacter> {
        if !m.divides(self.modulus()) {
            return Err(Error::ModulusMismatch { expected: self.modulus().to_string(), found: m.to_string() });
        }
        if !self.conductor().divides(m) {
            return Err(Error::InvalidInput(format!(
                "character mod {} does not factor through {m}",
                self.modulus()
            )));
        }
        if m == self.modulus() {
            return Ok(self.clone());
        }
        let ring = self.field().ring();
        let group = UnitGroup::new(self.field(), m)?;
        // lift units mod M to units mod N: keep the residue at primes dividing
        // M and use 1 at the others
        let rest = self
            .group
            .components
            .iter()
            .filter(|c| !c.prime.divides(m))
            .fold(Ideal::unit(ring), |acc, c| acc.mul(&c.modulus));
        let mut lifts = HashMap::new();
        for &g in &group.generators {
            let lift = if rest.is_unit_ideal() {
                g
            } else {
                crt_solve(&[
                    (FieldElement::from_ints(ring, g.0, g.1), m.clone()),
                    (FieldElement::one(ring), rest.clone()),
                ])?
                .to_ints()
                .unwrap()
            };
            lifts.insert(g, lift);
        }
        Ok(NumericalCharacter::from_fn(group, |g| self.value(lifts[&g]).expect("lift is a unit")))
    }

    /// The primitive character inducing this one.
    pub fn primitive(&self) -> NumericalCharacter {
        self.restrict(&self.conductor()).expect("conductor divides modulus")
    }

    pub fn is_primitive(&self) -> bool {
        &self.conductor() == self.modulus()
    }

    /// Trivial on the totally positive units, i.e. extends to a Hecke
    /// character of finite type with trivial infinity type on `O^x_+`.
    pub fn is_extendable(&self) -> bool {
        let u = self.field().totally_positive_unit();
        let v = self.group.modulus.reduce(u.to_ints().unwrap());
        self.value(v).map(|a| a.is_zero()).unwrap_or(false)
    }

    /// The sign type `l` (entries 0 or 1 per real embedding) with
    /// `chi(u) = prod sgn(u_i)^{l_i}` for every global unit `u`.
    pub fn sign_type(&self) -> Option<Vec<u8>> {
        let half = Angle::new(1, 2);
        let bit = |a: Angle| -> Option<u8> {
            if a.is_zero() {
                Some(0)
            } else if a == half {
                Some(1)
            } else {
                None
            }
        };
        let minus_one = self.value(self.modulus().reduce((-1, 0)))?;
        match self.field().fundamental_unit() {
            None => Some(vec![bit(minus_one)?]),
            Some(eps) => {
                // eps has signs (+, -); -1 has signs (-, -)
                let e = self.value(self.modulus().reduce(eps.to_ints().unwrap()))?;
                let l2 = bit(e)?;
                let l1 = bit(reduce_angle(minus_one + e))?;
                Some(vec![l1, l2])
            }
        }
    }
}

/// All characters mod `N` in lexicographic order of their angle numerators,
/// optionally filtered by exact conductor and by extendability.
pub fn enumerate_characters(
    field: &NumberField,
    modulus: &Ideal,
    conductor: Option<&Ideal>,
    extendable_only: bool,
) -> Result<Vec<NumericalCharacter>> {
    let group = UnitGroup::new(field, modulus)?;
    let orders = group.orders.clone();
    let total: u64 = orders.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    let mut ks = vec![0u64; orders.len()];
    for _ in 0..total {
        let angles = ks
            .iter()
            .zip(&orders)
            .map(|(&k, &o)| Angle::new(k as i64, o as i64))
            .collect();
        let chi = NumericalCharacter { group: group.clone(), angles };
        let keep = (!extendable_only || chi.is_extendable())
            && conductor.map(|c| &chi.conductor() == c).unwrap_or(true);
        if keep {
            out.push(chi);
        }
        for j in (0..ks.len()).rev() {
            ks[j] += 1;
            if ks[j] < orders[j] {
                break;
            }
            ks[j] = 0;
        }
    }
    Ok(out)
}

/// Split a character mod `P * N0` into its parts mod `P` and mod `N0`.
pub fn decompose_character(
    chi: &NumericalCharacter,
    p: &Ideal,
    n0: &Ideal,
) -> Result<(NumericalCharacter, NumericalCharacter)> {
    if !p.is_coprime(n0) {
        return Err(Error::NotCoprime(p.to_string(), n0.to_string()));
    }
    let prod = p.mul(n0);
    if &prod != chi.modulus() {
        return Err(Error::ModulusMismatch { expected: chi.modulus().to_string(), found: prod.to_string() });
    }
    let ring = chi.field().ring();
    let part = |m: &Ideal, other: &Ideal| -> Result<NumericalCharacter> {
        let group = UnitGroup::new(chi.field(), m)?;
        let mut lifts = HashMap::new();
        for &g in &group.generators {
            let lift = if other.is_unit_ideal() {
                g
            } else {
                crt_solve(&[
                    (FieldElement::from_ints(ring, g.0, g.1), m.clone()),
                    (FieldElement::one(ring), other.clone()),
                ])?
                .to_ints()
                .unwrap()
            };
            lifts.insert(g, lift);
        }
        Ok(NumericalCharacter::from_fn(group, |g| chi.value(lifts[&g]).unwrap()))
    };
    Ok((part(p, n0)?, part(n0, p)?))
}

/// A Hecke character with trivial infinity type on totally positive units,
/// represented by its numerical character.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeckeCharacter {
    numerical: NumericalCharacter,
    sign_type: Vec<u8>,
    conductor: Ideal,
}

impl Serialize for HeckeCharacter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            modulus: String,
            angles: Vec<String>,
            conductor: String,
            sign_type: &'a [u8],
        }
        Repr {
            modulus: self.modulus().to_string(),
            angles: self.numerical.angles.iter().map(format_angle).collect(),
            conductor: self.conductor.to_string(),
            sign_type: &self.sign_type,
        }
        .serialize(s)
    }
}

impl HeckeCharacter {
    pub fn new(numerical: NumericalCharacter) -> Result<HeckeCharacter> {
        if !numerical.is_extendable() {
            return Err(Error::NotExtendable);
        }
        let sign_type = numerical.sign_type().ok_or(Error::NotExtendable)?;
        let conductor = numerical.conductor();
        Ok(HeckeCharacter { numerical, sign_type, conductor })
    }

    pub fn trivial(field: &NumberField) -> HeckeCharacter {
        let unit = Ideal::unit(field.ring());
        HeckeCharacter::new(NumericalCharacter::trivial(field, &unit).unwrap()).unwrap()
    }

    pub fn numerical(&self) -> &NumericalCharacter {
        &self.numerical
    }

    pub fn field(&self) -> &NumberField {
        self.numerical.field()
    }

    pub fn modulus(&self) -> &Ideal {
        self.numerical.modulus()
    }

    pub fn conductor(&self) -> &Ideal {
        &self.conductor
    }

    pub fn sign_type(&self) -> &[u8] {
        &self.sign_type
    }

    pub fn is_trivial(&self) -> bool {
        self.numerical.is_trivial()
    }

    /// Exponent of the conductor at the prime `p`.
    pub fn exponential_conductor(&self, p: &Ideal) -> u32 {
        self.numerical.exponential_conductor(p)
    }

    pub fn conj(&self) -> HeckeCharacter {
        HeckeCharacter::new(self.numerical.conj()).expect("conjugate stays extendable")
    }

    pub fn mul(&self, other: &HeckeCharacter) -> Result<HeckeCharacter> {
        HeckeCharacter::new(self.numerical.mul(&other.numerical)?)
    }

    pub fn pow(&self, k: i64) -> HeckeCharacter {
        HeckeCharacter::new(self.numerical.pow(k)).expect("powers stay extendable")
    }

    pub fn primitive(&self) -> HeckeCharacter {
        HeckeCharacter::new(self.numerical.primitive()).expect("primitive stays extendable")
    }

    pub fn induce(&self, m: &Ideal) -> Result<HeckeCharacter> {
        HeckeCharacter::new(self.numerical.induce(m)?)
    }

    /// Restrict to a divisor of the modulus that the conductor divides.
    pub fn restrict(&self, m: &Ideal) -> Result<HeckeCharacter> {
        HeckeCharacter::new(self.numerical.restrict(m)?)
    }

    /// `Phi^*(a)` for an ideal `a`: `None` (the value 0) unless `a` is coprime
    /// to the modulus, else the conjugate of `phi` at a totally positive
    /// generator.
    pub fn ideal_value(&self, a: &Ideal) -> Option<Angle> {
        let field = self.field();
        let m = self.modulus();
        let (_, _, _, den) = a.hnf();
        if den > 1 {
            let (x, y, z, _) = a.hnf();
            let num = Ideal::from_hnf(a.ring(), x, y, z, 1).expect("lattice of an ideal");
            let d = Ideal::from_int(a.ring(), den);
            let vn = self.ideal_value(&num)?;
            let vd = self.ideal_value(&d)?;
            return Some(reduce_angle(vn - vd));
        }
        if m.is_unit_ideal() {
            return Some(Angle::zero());
        }
        if !a.is_coprime(m) {
            return None;
        }
        let alpha = a.totally_positive_generator_int(field);
        let v = self.numerical.value(m.reduce(alpha)).expect("coprime generator is a unit");
        Some(reduce_angle(-v))
    }

    /// `Phi^*(a)` as a complex number (0 when not coprime).
    pub fn ideal_value_complex(&self, a: &Ideal) -> Complex64 {
        self.ideal_value(a).map(angle_to_complex).unwrap_or_else(Complex64::zero)
    }
}

/// Gauss sum of a character whose conductor is a prime power.
#[derive(Clone, Debug, Serialize)]
pub struct GaussSum {
    pub character: HeckeCharacter,
    pub conductor: Ideal,
    pub re: f64,
    pub im: f64,
    pub modulus_norm: i128,
}

impl GaussSum {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `tau(Psi) = sum_x conj(psi(x)) e(Tr(x / gamma))` over `x` in `(O/f)^x`, with
/// `gamma` the totally positive generator of `f * different` and `psi` the
/// primitive numerical character.
pub fn gauss_sum(psi: &HeckeCharacter) -> Result<GaussSum> {
    let prim = psi.primitive();
    let f = prim.modulus().clone();
    let field = psi.field();
    let ring = field.ring();
    if f.is_unit_ideal() {
        return Ok(GaussSum { character: psi.clone(), conductor: f, re: 1.0, im: 0.0, modulus_norm: 1 });
    }
    let fac = f.factor()?;
    if fac.len() != 1 {
        return Err(Error::NonPrimaryConductor(f.to_string()));
    }
    let nf = f.norm();
    if nf.saturating_mul(field.different().norm()) > UNIT_GROUP_BOUND {
        return Err(Error::EnumerationTooLarge(nf));
    }
    let fd = f.mul(field.different());
    let gamma = fd.totally_positive_generator_int(field);
    let ng = ring.norm(gamma);
    // x / gamma = x * gbar / N(gamma)
    let gbar = if ring.degree() == 1 { (1, 0) } else { ring.conj(gamma) };
    let mut total = Complex64::zero();
    for x in prim.numerical.group.units() {
        let chi = prim.numerical.value(x).unwrap();
        // Tr(x / gamma) = Tr(x * conj(gamma)) / N(gamma)
        let tr = ring.trace(ring.mul(x, gbar));
        let phase = Angle::new((tr.rem_euclid(ng)) as i64, ng as i64);
        total += angle_to_complex(reduce_angle(phase - chi));
    }
    Ok(GaussSum { character: psi.clone(), conductor: f, re: total.re, im: total.im, modulus_norm: nf })
}

/// Parse a character given as JSON `{"modulus": ..., "angles": [...]}`, as a
/// comma-separated angle list, as `trivial`, or as `index:i` into the
/// enumeration order.
pub fn parse_character(field: &NumberField, modulus: &Ideal, spec: &str) -> Result<NumericalCharacter> {
    let s = spec.trim();
    if s == "trivial" {
        return NumericalCharacter::trivial(field, modulus);
    }
    if let Some(i) = s.strip_prefix("index:") {
        let i: usize = i.trim().parse().map_err(|_| Error::Parse(format!("bad index {i:?}")))?;
        let all = enumerate_characters(field, modulus, None, false)?;
        let n = all.len();
        return all
            .into_iter()
            .nth(i)
            .ok_or_else(|| Error::InvalidInput(format!("index {i} out of range ({n} characters)")));
    }
    if s.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let m = v
            .get("modulus")
            .and_then(|m| m.as_str())
            .ok_or_else(|| Error::Parse("character JSON needs \"modulus\"".into()))?;
        let m = crate::ideal::parse_ideal(field.ring(), m)?;
        if &m != modulus {
            return Err(Error::ModulusMismatch { expected: modulus.to_string(), found: m.to_string() });
        }
        let angles = v
            .get("angles")
            .and_then(|a| a.as_array())
            .ok_or_else(|| Error::Parse("character JSON needs \"angles\"".into()))?
            .iter()
            .map(|a| match a {
                serde_json::Value::String(t) => parse_angle(t),
                serde_json::Value::Number(n) => parse_angle(&n.to_string()),
                _ => Err(Error::Parse(format!("bad angle {a}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        return NumericalCharacter::from_angles(UnitGroup::new(field, modulus)?, angles);
    }
    let inner = s.trim_start_matches('[').trim_end_matches(']');
    let angles = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|t| parse_angle(t.trim().trim_matches('"'))).collect::<Result<Vec<_>>>()?
    };
    NumericalCharacter::from_angles(UnitGroup::new(field, modulus)?, angles)
}

/// `e(chi)` at `p` for a character given by its conductor.
pub fn conductor_exponent(conductor: &Ideal, p: &Ideal) -> u32 {
    if conductor.is_unit_ideal() {
        0
    } else {
        conductor.ord_unchecked(p).max(0) as u32
    }
}

/// Whether two angles agree, used in tests and reports.
pub fn angles_equal(a: &Angle, b: &Angle) -> bool {
    reduce_angle(a - b).is_zero()
}
