//! Integral and fractional ideals of `Z[w]` in Hermite normal form.
//!
//! An integral ideal is the lattice `a*Z + (b + c*w)*Z` with `a, c > 0`,
//! `0 <= b < a` and `c | a`, `c | b`; its norm is `a*c`. Over Q the lattice is
//! just `a*Z` and we store `b = 0, c = 1`. A fractional ideal is an integral
//! lattice together with a positive denominator, reduced so that the two share
//! no common factor.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{self, gcd, xgcd};
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField, Ring};

/// Norms above this are refused by [`Ideal::factor`].
pub const DEFAULT_FACTOR_BOUND: i128 = 1_000_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ideal {
    ring: Ring,
    a: i128,
    b: i128,
    c: i128,
    den: i128,
}

/// HNF `(a, b, c)` of the lattice spanned by `vecs` (coordinates over `{1, w}`).
fn hnf2(vecs: &[(i128, i128)]) -> (i128, i128, i128) {
    let (mut a, mut b, mut c) = (0i128, 0i128, 0i128);
    for &(x, y) in vecs {
        if y == 0 {
            a = gcd(a, x);
        } else if c == 0 {
            if y < 0 {
                b = -x;
                c = -y;
            } else {
                b = x;
                c = y;
            }
        } else {
            let (g, s, t) = xgcd(c, y);
            let r = (c / g) * x - (y / g) * b;
            b = s * b + t * x;
            c = g;
            a = gcd(a, r);
        }
        if a != 0 {
            b = b.rem_euclid(a);
        }
    }
    (a, b, c)
}

/// A lattice vector together with its integer combination of the inputs.
#[derive(Clone, Debug)]
struct Tracked {
    v: (i128, i128),
    coeffs: Vec<i128>,
}

impl Tracked {
    fn lin(s: i128, p: &Tracked, t: i128, q: &Tracked) -> Tracked {
        Tracked {
            v: (s * p.v.0 + t * q.v.0, s * p.v.1 + t * q.v.1),
            coeffs: p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| s * x + t * y).collect(),
        }
    }
}

/// Like [`hnf2`] but also returns, for each basis vector, the integer
/// combination of the inputs producing it.
fn hnf2_tracked(vecs: &[(i128, i128)]) -> (Tracked, Tracked) {
    let k = vecs.len();
    let zero = Tracked { v: (0, 0), coeffs: vec![0; k] };
    let mut first = zero.clone(); // (a, 0)
    let mut second = zero; // (b, c)
    for (i, &v) in vecs.iter().enumerate() {
        let mut inp = Tracked { v, coeffs: vec![0; k] };
        inp.coeffs[i] = 1;
        if inp.v.1 != 0 {
            if second.v.1 == 0 {
                if inp.v.1 < 0 {
                    inp = Tracked::lin(-1, &inp, 0, &second);
                }
                // whatever `second` held had y = 0; fold it into `first`
                let old = std::mem::replace(&mut second, inp);
                fold_first(&mut first, old);
            } else {
                let c = second.v.1;
                let y = inp.v.1;
                let (g, s, t) = xgcd(c, y);
                let rest = Tracked::lin(c / g, &inp, -(y / g), &second);
                second = Tracked::lin(s, &second, t, &inp);
                fold_first(&mut first, rest);
            }
        } else {
            fold_first(&mut first, inp);
        }
    }
    if first.v.0 != 0 {
        let q = second.v.0.div_euclid(first.v.0);
        second = Tracked::lin(1, &second, -q, &first);
    }
    (first, second)
}

fn fold_first(first: &mut Tracked, other: Tracked) {
    debug_assert_eq!(other.v.1, 0);
    if other.v.0 == 0 {
        return;
    }
    if first.v.0 == 0 {
        *first = if other.v.0 < 0 { Tracked::lin(-1, &other, 0, &other) } else { other };
        return;
    }
    let (g, s, t) = xgcd(first.v.0, other.v.0);
    *first = Tracked::lin(s, first, t, &other);
    debug_assert_eq!(first.v.0, g);
}

impl Ideal {
    /// Build from an integral lattice (given by spanning vectors) and a denominator.
    fn from_lattice(ring: Ring, vecs: &[(i128, i128)], den: i128) -> Ideal {
        let (a, b, c) = if ring.degree() == 1 {
            (vecs.iter().fold(0, |g, v| gcd(g, v.0)), 0, 1)
        } else {
            hnf2(vecs)
        };
        assert!(a > 0 && c > 0, "lattice is not of full rank");
        Ideal { ring, a, b, c, den }.normalized()
    }

    fn normalized(mut self) -> Ideal {
        let content = if self.ring.degree() == 1 {
            self.a
        } else {
            gcd(gcd(self.a, self.b), self.c)
        };
        let g = gcd(content, self.den);
        if g > 1 {
            self.a /= g;
            self.b /= g;
            if self.ring.degree() == 2 {
                self.c /= g;
            }
            self.den /= g;
        }
        if self.ring.degree() == 2 {
            self.b = self.b.rem_euclid(self.a);
        }
        self
    }

    pub fn unit(ring: Ring) -> Ideal {
        Ideal { ring, a: 1, b: 0, c: 1, den: 1 }
    }

    /// The principal ideal `(n)` for a positive rational integer `n`.
    pub fn from_int(ring: Ring, n: i128) -> Ideal {
        assert!(n != 0, "zero ideal");
        let n = n.abs();
        if ring.degree() == 1 {
            Ideal { ring, a: n, b: 0, c: 1, den: 1 }
        } else {
            Ideal { ring, a: n, b: 0, c: n, den: 1 }
        }
    }

    /// Ideal generated by the given (nonzero) field elements.
    pub fn from_generators(ring: Ring, gens: &[FieldElement]) -> Result<Ideal> {
        if gens.iter().all(|g| g.is_zero()) {
            return Err(Error::ZeroIdeal);
        }
        let mut den = BigInt::from(1);
        for g in gens {
            den = num_integer::Integer::lcm(&den, g.a.denom());
            den = num_integer::Integer::lcm(&den, g.b.denom());
        }
        let scale = BigRational::from_integer(den.clone());
        let mut vecs = Vec::new();
        for g in gens {
            let s = g.scale(&scale);
            let (x, y) = s
                .to_ints()
                .ok_or_else(|| Error::InvalidInput(format!("generator {g} too large")))?;
            vecs.push((x, y));
            if ring.degree() == 2 {
                vecs.push(ring.mul((x, y), (0, 1)));
            }
        }
        let den = den.to_i128().ok_or_else(|| Error::InvalidInput("denominator too large".into()))?;
        Ok(Ideal::from_lattice(ring, &vecs, den))
    }

    pub fn principal(g: &FieldElement) -> Ideal {
        Ideal::from_generators(g.ring(), std::slice::from_ref(g)).expect("nonzero generator")
    }

    /// Ideal generated by integral elements given in coordinates.
    pub fn from_int_generators(ring: Ring, gens: &[(i128, i128)]) -> Result<Ideal> {
        let mut vecs = Vec::new();
        for &g in gens {
            vecs.push(g);
            if ring.degree() == 2 {
                vecs.push(ring.mul(g, (0, 1)));
            }
        }
        if vecs.iter().all(|&(x, y)| x == 0 && y == 0) {
            return Err(Error::ZeroIdeal);
        }
        Ok(Ideal::from_lattice(ring, &vecs, 1))
    }

    /// Validate an explicit HNF.
    pub fn from_hnf(ring: Ring, a: i128, b: i128, c: i128, den: i128) -> Result<Ideal> {
        let bad = |why: &str| Error::Parse(format!("[[{a},{b}],[0,{c}]]/{den}: {why}"));
        if a <= 0 || c <= 0 || den <= 0 {
            return Err(bad("entries must be positive"));
        }
        if ring.degree() == 1 {
            if b != 0 || c != 1 {
                return Err(bad("degree one ideals are [[a]]"));
            }
            return Ok(Ideal { ring, a, b, c, den }.normalized());
        }
        if !(0..a).contains(&b) {
            return Err(bad("need 0 <= b < a"));
        }
        let lattice = Ideal { ring, a, b, c, den: 1 };
        let closed = [(a, 0), (b, c)]
            .iter()
            .all(|&v| lattice.contains_int(ring.mul(v, (0, 1))));
        if !closed {
            return Err(bad("lattice is not an ideal"));
        }
        Ok(Ideal { ring, a, b, c, den }.normalized())
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn d(&self) -> i64 {
        self.ring.d
    }

    /// `(a, b, c, den)`.
    pub fn hnf(&self) -> (i128, i128, i128, i128) {
        (self.a, self.b, self.c, self.den)
    }

    /// Smallest positive rational integer in the integral lattice.
    pub fn min_integer(&self) -> i128 {
        self.a
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.a == 1 && self.c == 1 && self.den == 1
    }

    fn lattice_norm(&self) -> i128 {
        if self.ring.degree() == 1 {
            self.a
        } else {
            self.a * self.c
        }
    }

    /// Norm of an integral ideal.
    pub fn norm(&self) -> i128 {
        debug_assert!(self.is_integral(), "norm() of a fractional ideal");
        self.lattice_norm()
    }

    /// Norm as a reduced fraction `(num, den)`.
    pub fn norm_ratio(&self) -> (i128, i128) {
        let den = self.den.pow(self.ring.degree());
        let num = self.lattice_norm();
        let g = gcd(num, den);
        (num / g, den / g)
    }

    fn basis(&self) -> Vec<(i128, i128)> {
        if self.ring.degree() == 1 {
            vec![(self.a, 0)]
        } else {
            vec![(self.a, 0), (self.b, self.c)]
        }
    }

    /// Basis elements of the ideal (including the denominator).
    pub fn basis_elements(&self) -> Vec<FieldElement> {
        let d = BigRational::from_integer(BigInt::from(self.den)).recip();
        self.basis()
            .into_iter()
            .map(|v| FieldElement::from_ints(self.ring, v.0, v.1).scale(&d))
            .collect()
    }

    fn check_same(&self, other: &Ideal) -> Result<()> {
        if self.ring != other.ring {
            Err(Error::MixedFields(self.ring.d, other.ring.d))
        } else {
            Ok(())
        }
    }

    /// Membership of an integral element in the integral lattice (ignores `den`).
    pub(crate) fn contains_int(&self, (x, y): (i128, i128)) -> bool {
        if self.ring.degree() == 1 {
            return y == 0 && x % self.a == 0;
        }
        y % self.c == 0 && (x - self.b * (y / self.c)) % self.a == 0
    }

    /// Membership of an integral element given in coordinates.
    pub fn contains_coords(&self, v: (i128, i128)) -> bool {
        self.contains_int((v.0 * self.den, v.1 * self.den))
    }

    pub fn contains_element(&self, e: &FieldElement) -> bool {
        let scaled = e.scale(&BigRational::from_integer(BigInt::from(self.den)));
        match scaled.to_ints() {
            Some(v) => self.contains_int(v),
            None => false,
        }
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Ideal) -> bool {
        if self.ring != other.ring {
            return false;
        }
        other.basis().into_iter().all(|(x, y)| {
            let (x, y) = (x * self.den, y * self.den);
            x % other.den == 0 && y % other.den == 0 && self.contains_int((x / other.den, y / other.den))
        })
    }

    /// `self | other`, i.e. `other ⊆ self`.
    pub fn divides(&self, other: &Ideal) -> bool {
        self.contains(other)
    }

    pub fn mul(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.ring, other.ring, "ideals from different fields");
        if self.ring.degree() == 1 {
            return Ideal { ring: self.ring, a: self.a * other.a, b: 0, c: 1, den: self.den * other.den }
                .normalized();
        }
        let mut vecs = Vec::with_capacity(4);
        for u in self.basis() {
            for v in other.basis() {
                vecs.push(self.ring.mul(u, v));
            }
        }
        Ideal::from_lattice(self.ring, &vecs, self.den * other.den)
    }

    pub fn try_mul(&self, other: &Ideal) -> Result<Ideal> {
        self.check_same(other)?;
        Ok(self.mul(other))
    }

    pub fn pow(&self, e: u32) -> Ideal {
        let mut acc = Ideal::unit(self.ring);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `I + J`, the gcd for integral ideals.
    pub fn add(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.ring, other.ring, "ideals from different fields");
        let den = arith::lcm(self.den, other.den);
        let mut vecs = Vec::new();
        for (id, s) in [(self, den / self.den), (other, den / other.den)] {
            for (x, y) in id.basis() {
                vecs.push((x * s, y * s));
            }
        }
        Ideal::from_lattice(self.ring, &vecs, den)
    }

    pub fn gcd(&self, other: &Ideal) -> Ideal {
        self.add(other)
    }

    /// `I ∩ J`, the lcm for integral ideals, computed directly on the lattices.
    pub fn intersect(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.ring, other.ring, "ideals from different fields");
        let den = arith::lcm(self.den, other.den);
        let scale = |id: &Ideal| -> Ideal {
            let s = den / id.den;
            let (a, b, c) = (id.a * s, id.b * s, id.c * s);
            if id.ring.degree() == 1 {
                Ideal { ring: id.ring, a, b: 0, c: 1, den: 1 }
            } else {
                Ideal { ring: id.ring, a, b, c, den: 1 }
            }
        };
        let (i, j) = (scale(self), scale(other));
        if self.ring.degree() == 1 {
            return Ideal { ring: self.ring, a: arith::lcm(i.a, j.a), b: 0, c: 1, den }.normalized();
        }
        // (x, y) ∈ I iff c_I | y and x ≡ b_I * y / c_I (mod a_I).
        let a = arith::lcm(i.a, j.a);
        let l = arith::lcm(i.c, j.c);
        let g = gcd(i.a, j.a);
        let step_i = i.b * (l / i.c);
        let step_j = j.b * (l / j.c);
        let delta = step_i - step_j;
        let k = g / gcd(g, delta);
        let c = k * l;
        let x = crt_int(k * step_i, i.a, k * step_j, j.a).expect("compatible by choice of k");
        Ideal { ring: self.ring, a, b: x.rem_euclid(a), c, den }.normalized()
    }

    pub fn lcm(&self, other: &Ideal) -> Ideal {
        self.intersect(other)
    }

    pub fn conj(&self) -> Ideal {
        if self.ring.degree() == 1 {
            return self.clone();
        }
        let vecs: Vec<_> = self.basis().into_iter().map(|v| self.ring.conj(v)).collect();
        Ideal::from_lattice(self.ring, &vecs, self.den)
    }

    pub fn inv(&self) -> Ideal {
        if self.ring.degree() == 1 {
            return Ideal { ring: self.ring, a: self.den, b: 0, c: 1, den: self.a }.normalized();
        }
        // (L/den)^{-1} = den * conj(L) / N(L)
        let nl = self.lattice_norm();
        let lattice = Ideal { den: 1, ..self.clone() };
        let c = lattice.conj();
        let vecs: Vec<_> = c.basis().into_iter().map(|(x, y)| (x * self.den, y * self.den)).collect();
        Ideal::from_lattice(self.ring, &vecs, nl)
    }

    /// `self / other` when the quotient is integral.
    pub fn div_exact(&self, other: &Ideal) -> Option<Ideal> {
        let q = self.mul(&other.inv());
        q.is_integral().then_some(q)
    }

    /// Whether `I + J = O`.
    pub fn is_coprime(&self, other: &Ideal) -> bool {
        self.add(other).is_unit_ideal()
    }

    /// Canonical representative of `x + y*w` modulo an integral ideal:
    /// `0 <= x < a`, `0 <= y < c`.
    pub fn reduce(&self, (x, y): (i128, i128)) -> (i128, i128) {
        debug_assert!(self.is_integral());
        if self.ring.degree() == 1 {
            return (x.rem_euclid(self.a), 0);
        }
        let q = y.div_euclid(self.c);
        let y = y - q * self.c;
        let x = (x - q * self.b).rem_euclid(self.a);
        (x, y)
    }

    /// Primes above the rational prime `p`, via the factorisation of the
    /// minimal polynomial of `w` modulo `p`.
    pub fn primes_above(ring: Ring, p: i128) -> Vec<Ideal> {
        if ring.degree() == 1 {
            return vec![Ideal::from_int(ring, p)];
        }
        let (t, n) = (ring.t as i128, ring.n as i128);
        let roots: Vec<i128> = if p == 2 {
            (0..2).filter(|&r| (r * r - t * r + n).rem_euclid(2) == 0).collect()
        } else {
            let disc = t * t - 4 * n;
            match arith::sqrt_mod_prime(disc, p) {
                None => vec![],
                Some(s) => {
                    let inv2 = (p + 1) / 2;
                    let mut rs = vec![((t + s) * inv2).rem_euclid(p), ((t - s) * inv2).rem_euclid(p)];
                    rs.sort();
                    rs.dedup();
                    rs
                }
            }
        };
        if roots.is_empty() {
            return vec![Ideal::from_int(ring, p)];
        }
        let mut out: Vec<Ideal> = roots
            .into_iter()
            .map(|r| Ideal::from_int_generators(ring, &[(p, 0), (-r, 1)]).unwrap())
            .collect();
        out.sort();
        out
    }

    /// Whether this integral ideal is a (nonzero) prime.
    pub fn is_prime(&self) -> bool {
        if !self.is_integral() || self.is_unit_ideal() {
            return false;
        }
        let nm = self.norm();
        let f = arith::factor(nm);
        if f.len() != 1 {
            return false;
        }
        let (p, e) = f[0];
        match e {
            1 => true,
            2 if self.ring.degree() == 2 => {
                let above = Ideal::primes_above(self.ring, p);
                above.len() == 1 && above[0].norm() == p * p && &above[0] == self
            }
            _ => false,
        }
    }

    fn require_prime(&self) -> Result<()> {
        if self.is_prime() {
            Ok(())
        } else {
            Err(Error::PNotPrime(self.to_string()))
        }
    }

    /// `ord_P` of a (possibly fractional) ideal.
    pub fn ord(&self, p: &Ideal) -> Result<i32> {
        self.check_same(p)?;
        p.require_prime()?;
        Ok(self.ord_unchecked(p))
    }

    pub(crate) fn ord_unchecked(&self, p: &Ideal) -> i32 {
        let lattice = Ideal { den: 1, ..self.clone() };
        let mut k = 0;
        let mut cur = lattice;
        let pinv = p.inv();
        while p.divides(&cur) {
            cur = cur.mul(&pinv);
            k += 1;
        }
        if self.den > 1 {
            let den_ideal = Ideal::from_int(self.ring, self.den);
            k -= den_ideal.ord_unchecked(p);
        }
        k
    }

    /// Prime factorisation with the default norm bound.
    pub fn factor(&self) -> Result<Vec<(Ideal, u32)>> {
        self.factor_bounded(DEFAULT_FACTOR_BOUND)
    }

    /// Prime factorisation of an integral ideal, sorted by `(norm, hnf)`.
    pub fn factor_bounded(&self, bound: i128) -> Result<Vec<(Ideal, u32)>> {
        if !self.is_integral() {
            return Err(Error::NotIntegral(self.to_string()));
        }
        let nm = self.norm();
        if nm > bound {
            return Err(Error::NormTooLarge { norm: nm, bound });
        }
        let mut out = Vec::new();
        for (p, _) in arith::factor(nm) {
            for q in Ideal::primes_above(self.ring, p) {
                let e = self.ord_unchecked(&q);
                if e > 0 {
                    out.push((q, e as u32));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// All integral divisors, sorted.
    pub fn divisors(&self) -> Result<Vec<Ideal>> {
        let fac = self.factor()?;
        let mut out = vec![Ideal::unit(self.ring)];
        for (p, e) in fac {
            let mut next = Vec::new();
            for dv in &out {
                let mut cur = dv.clone();
                next.push(cur.clone());
                for _ in 0..e {
                    cur = cur.mul(&p);
                    next.push(cur.clone());
                }
            }
            out = next;
        }
        out.sort();
        Ok(out)
    }

    /// Some generator of this integral ideal, found by enumerating short
    /// lattice vectors under the trace form.
    fn find_generator(&self, field: &NumberField) -> (i128, i128) {
        if self.ring.degree() == 1 {
            return (self.a, 0);
        }
        let nm = self.norm();
        let ring = self.ring;
        let emb = |v: (i128, i128)| ring.embed((v.0 as f64, v.1 as f64));
        let dot = |u: (i128, i128), v: (i128, i128)| {
            let (eu, ev) = (emb(u), emb(v));
            eu[0] * ev[0] + eu[1] * ev[1]
        };
        // Lagrange reduction
        let (mut u, mut v) = ((self.a, 0i128), (self.b, self.c));
        loop {
            if dot(u, u) > dot(v, v) {
                std::mem::swap(&mut u, &mut v);
            }
            let mu = (dot(u, v) / dot(u, u)).round() as i128;
            if mu == 0 {
                break;
            }
            v = (v.0 - mu * u.0, v.1 - mu * u.1);
            if dot(v, v) >= dot(u, u) {
                break;
            }
        }
        let eps = field.fundamental_unit().map(|e| e.embeddings()[0]).unwrap_or(1.0);
        let g11 = dot(u, u);
        let g12 = dot(u, v);
        let g22 = dot(v, v);
        let det = (g11 * g22 - g12 * g12).max(f64::MIN_POSITIVE);
        let mut bound = nm as f64 * (eps + 1.0 / eps) * 1.0001 + 1.0;
        for _ in 0..40 {
            let n_max = (bound * g11 / det).sqrt().ceil() as i128 + 1;
            for n in -n_max..=n_max {
                let nf = n as f64;
                let rem = bound - nf * nf * det / g11;
                if rem < 0.0 {
                    continue;
                }
                let centre = -nf * g12 / g11;
                let half = (rem / g11).sqrt();
                let lo = (centre - half).floor() as i128 - 1;
                let hi = (centre + half).ceil() as i128 + 1;
                for m in lo..=hi {
                    let cand = (m * u.0 + n * v.0, m * u.1 + n * v.1);
                    if ring.norm(cand).abs() == nm {
                        return cand;
                    }
                }
            }
            bound *= 2.0;
        }
        panic!("no generator found for {self}; the field should have class number one");
    }

    /// The totally positive generator of minimal trace (ties: smaller first
    /// coordinate) among all totally positive generators.
    pub fn totally_positive_generator(&self, field: &NumberField) -> Result<FieldElement> {
        assert_eq!(self.ring, field.ring(), "ideal from a different field");
        let (x, y) = self.totally_positive_generator_int(field);
        let den = BigRational::from_integer(BigInt::from(self.den)).recip();
        Ok(FieldElement::from_ints(self.ring, x, y).scale(&den))
    }

    /// Integral coordinates of the canonical totally positive generator of the
    /// integral lattice (the denominator is not applied).
    pub(crate) fn totally_positive_generator_int(&self, field: &NumberField) -> (i128, i128) {
        let ring = self.ring;
        let g = self.find_generator(field);
        if ring.degree() == 1 {
            return (g.0.abs(), 0);
        }
        let eps = field.fundamental_unit().expect("real quadratic").to_ints().unwrap();
        let neg = |v: (i128, i128)| (-v.0, -v.1);
        let mut alpha = match ring.signs(g) {
            [1, 1] => g,
            [-1, -1] => neg(g),
            [1, -1] => ring.mul(g, eps),
            [-1, 1] => ring.mul(g, neg(eps)),
            s => unreachable!("generator with a zero embedding: {s:?}"),
        };
        debug_assert_eq!(ring.signs(alpha), [1, 1]);
        let eps2 = ring.mul(eps, eps);
        let eps2_inv = ring.conj(eps2); // norm(eps^2) = 1
        let tr = |v: (i128, i128)| ring.trace(v);
        loop {
            let up = ring.mul(alpha, eps2);
            if tr(up) < tr(alpha) {
                alpha = up;
                continue;
            }
            let down = ring.mul(alpha, eps2_inv);
            if tr(down) < tr(alpha) {
                alpha = down;
                continue;
            }
            // ties with a neighbour: prefer the smaller first coordinate
            let mut best = alpha;
            for nb in [up, down] {
                if tr(nb) == tr(best) && nb.0 < best.0 {
                    best = nb;
                }
            }
            return best;
        }
    }
}

/// Solve `x ≡ r1 (mod m1)`, `x ≡ r2 (mod m2)` over Z.
fn crt_int(r1: i128, m1: i128, r2: i128, m2: i128) -> Option<i128> {
    let (g, s, _) = xgcd(m1, m2);
    if (r2 - r1) % g != 0 {
        return None;
    }
    let l = m1 / g * m2;
    let k = ((r2 - r1) / g % (m2 / g)) * s % (m2 / g);
    Some((r1 + m1 * k).rem_euclid(l))
}

/// An element `e ∈ m` with `e ≡ 1 (mod i)`, for coprime integral ideals.
fn idempotent(m: &Ideal, i: &Ideal) -> (i128, i128) {
    let mut vecs = m.basis();
    let split = vecs.len();
    vecs.extend(i.basis());
    let (first, second) = hnf2_tracked(&vecs);
    debug_assert_eq!(first.v.0, 1);
    // express (1, 0) = first; its M-part is the element we want
    let _ = second;
    let mb = m.basis();
    let mut e = (0i128, 0i128);
    for (k, v) in mb.iter().enumerate().take(split) {
        e.0 += first.coeffs[k] * v.0;
        e.1 += first.coeffs[k] * v.1;
    }
    e
}

/// Chinese remaindering: `x ≡ r_i (mod I_i)` for pairwise coprime integral
/// moduli and integral residues; the result is reduced modulo the product.
pub fn crt_solve(residues: &[(FieldElement, Ideal)]) -> Result<FieldElement> {
    let Some((r0, m0)) = residues.first() else {
        return Err(Error::InvalidInput("no residues".into()));
    };
    let ring = m0.ring();
    for (r, m) in residues {
        if m.ring() != ring || r.ring() != ring {
            return Err(Error::MixedFields(ring.d, m.ring().d));
        }
        if !m.is_integral() {
            return Err(Error::NotIntegral(m.to_string()));
        }
        if !r.is_integral() {
            return Err(Error::NotIntegral(r.to_string()));
        }
    }
    for (i, (_, mi)) in residues.iter().enumerate() {
        for (_, mj) in &residues[i + 1..] {
            if !mi.is_coprime(mj) {
                return Err(Error::ModuliNotCoprime(mi.to_string(), mj.to_string()));
            }
        }
    }
    if residues.len() == 1 {
        let v = r0.to_ints().ok_or_else(|| Error::NotIntegral(r0.to_string()))?;
        let (x, y) = m0.reduce(v);
        return Ok(FieldElement::from_ints(ring, x, y));
    }
    let product = residues.iter().fold(Ideal::unit(ring), |acc, (_, m)| acc.mul(m));
    let mut x = (0i128, 0i128);
    for (i, (r, mi)) in residues.iter().enumerate() {
        let others = residues
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(Ideal::unit(ring), |acc, (_, (_, m))| acc.mul(m));
        let e = product.reduce(idempotent(&others, mi));
        let rv = mi.reduce(r.to_ints().ok_or_else(|| Error::NotIntegral(r.to_string()))?);
        let term = product.reduce(ring.mul(e, rv));
        x = product.reduce((x.0 + term.0, x.1 + term.1));
    }
    Ok(FieldElement::from_ints(ring, x.0, x.1))
}

impl PartialOrd for Ideal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ideal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (n1, d1) = self.norm_ratio();
        let (n2, d2) = other.norm_ratio();
        (n1 * d2)
            .cmp(&(n2 * d1))
            .then(self.ring.cmp(&other.ring))
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
            .then(self.c.cmp(&other.c))
            .then(self.den.cmp(&other.den))
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ring.degree() == 1 {
            write!(f, "[[{}]]/{}@d={}", self.a, self.den, self.ring.d)
        } else {
            write!(f, "[[{},{}],[0,{}]]/{}@d={}", self.a, self.b, self.c, self.den, self.ring.d)
        }
    }
}

impl Serialize for Ideal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for Ideal {
    type Err = Error;

    /// Parses the canonical form `[[a,b],[0,c]]/den@d=<d>` (or `[[a]]/den@d=1`).
    fn from_str(s: &str) -> Result<Ideal> {
        let err = || Error::Parse(format!("bad ideal {s:?}"));
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (body, d) = s.split_once("@d=").ok_or_else(err)?;
        let d: i64 = d.parse().map_err(|_| err())?;
        let (mat, den) = body.split_once('/').ok_or_else(err)?;
        let den: i128 = den.parse().map_err(|_| err())?;
        let nums: Vec<i128> = mat
            .split(['[', ']', ','])
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i128>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err())?;
        let ring = Ring::new(d);
        match (ring.degree(), nums.as_slice()) {
            (1, [a]) => Ideal::from_hnf(ring, *a, 0, 1, den),
            (2, [a, b, 0, c]) => Ideal::from_hnf(ring, *a, *b, *c, den),
            _ => Err(err()),
        }
    }
}

/// Parse a field element such as `3`, `1+w`, `2-3w`, `sqrt5`, `1/2+1/2*sqrt5`.
pub fn parse_element(ring: Ring, s: &str) -> Result<FieldElement> {
    let err = || Error::Parse(format!("bad field element {s:?}"));
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err());
    }
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut acc = FieldElement::zero(ring);
    let sqrt_name = format!("sqrt{}", ring.d);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1, rest.to_string()),
            None => (1, term.trim_start_matches('+').to_string()),
        };
        let (coef_str, basis) = if let Some(c) = body.strip_suffix(&sqrt_name) {
            (c, FieldElement::sqrt_d(ring))
        } else if let Some(c) = body.strip_suffix('w') {
            if ring.degree() == 1 {
                return Err(err());
            }
            (c, FieldElement::from_ints(ring, 0, 1))
        } else {
            (body.as_str(), FieldElement::one(ring))
        };
        let coef_str = coef_str.trim_end_matches('*');
        let coef = if coef_str.is_empty() {
            BigRational::from_integer(BigInt::from(1))
        } else if let Some((p, q)) = coef_str.split_once('/') {
            let p: BigInt = p.parse().map_err(|_| err())?;
            let q: BigInt = q.parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            BigRational::new(p, q)
        } else {
            BigRational::from_integer(coef_str.parse::<BigInt>().map_err(|_| err())?)
        };
        let coef = if sign < 0 { -coef } else { coef };
        acc = acc.add(&basis.scale(&coef));
    }
    Ok(acc)
}

/// Parse an ideal given either canonically or by generators, e.g. `(5)`,
/// `(2, 1+w)`, `(sqrt5)`, or a bare integer.
pub fn parse_ideal(ring: Ring, s: &str) -> Result<Ideal> {
    let t = s.trim();
    if t.starts_with("[[") {
        let id: Ideal = t.parse()?;
        if id.ring() != ring {
            return Err(Error::MixedFields(ring.d, id.d()));
        }
        return Ok(id);
    }
    let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
    let gens: Vec<FieldElement> = inner
        .split(',')
        .map(|g| parse_element(ring, g))
        .collect::<Result<_>>()?;
    Ideal::from_generators(ring, &gens)
}

/// Summary of the binary ideal operations on a pair of ideals.
#[derive(Clone, Debug, Serialize)]
pub struct IdealOps {
    pub product: Ideal,
    pub gcd: Ideal,
    pub lcm: Ideal,
    pub divides: bool,
    pub norm_i: i128,
    pub norm_j: i128,
}

pub fn ideal_ops(i: &Ideal, j: &Ideal) -> Result<IdealOps> {
    i.check_same(j)?;
    for x in [i, j] {
        if !x.is_integral() {
            return Err(Error::NotIntegral(x.to_string()));
        }
    }
    Ok(IdealOps {
        product: i.mul(j),
        gcd: i.add(j),
        lcm: i.intersect(j),
        divides: i.divides(j),
        norm_i: i.norm(),
        norm_j: j.norm(),
    })
}

/// Sign-magnitude helper used by the display of norms.
pub fn abs_norm(e: &FieldElement) -> BigRational {
    e.norm().abs()
}
