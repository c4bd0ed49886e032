//! The base field: Q or a real quadratic field Q(sqrt d) of narrow class number one.
//!
//! Elements are written over the integral basis `{1, w}` where `w = sqrt d` for
//! `d = 2, 3 (mod 4)` and `w = (1 + sqrt d) / 2` for `d = 1 (mod 4)`. In both
//! cases `w^2 = t*w - n` with small integers `t`, `n`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};
use crate::ideal::Ideal;

/// Fields accepted by [`NumberField::new`]: the narrow class number one fields
/// this crate is exercised on.
pub const DEFAULT_ALLOWED: [i64; 4] = [1, 2, 5, 13];

/// Arithmetic data of the maximal order `Z[w]`: `w^2 = t*w - n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ring {
    pub d: i64,
    pub t: i64,
    pub n: i64,
}

impl Ring {
    pub fn new(d: i64) -> Ring {
        if d == 1 {
            Ring { d, t: 0, n: 0 }
        } else if d.rem_euclid(4) == 1 {
            Ring { d, t: 1, n: (1 - d) / 4 }
        } else {
            Ring { d, t: 0, n: -d }
        }
    }

    pub fn degree(&self) -> u32 {
        if self.d == 1 {
            1
        } else {
            2
        }
    }

    /// Discriminant of the minimal polynomial of `w`, which is the field discriminant.
    pub fn discriminant(&self) -> i64 {
        if self.d == 1 {
            1
        } else {
            self.t * self.t - 4 * self.n
        }
    }

    pub fn mul(&self, (x1, y1): (i128, i128), (x2, y2): (i128, i128)) -> (i128, i128) {
        let (t, n) = (self.t as i128, self.n as i128);
        (x1 * x2 - n * y1 * y2, x1 * y2 + x2 * y1 + t * y1 * y2)
    }

    pub fn conj(&self, (x, y): (i128, i128)) -> (i128, i128) {
        (x + self.t as i128 * y, -y)
    }

    pub fn norm(&self, (x, y): (i128, i128)) -> i128 {
        if self.d == 1 {
            return x;
        }
        x * x + self.t as i128 * x * y + self.n as i128 * y * y
    }

    pub fn trace(&self, (x, y): (i128, i128)) -> i128 {
        if self.d == 1 {
            return x;
        }
        2 * x + self.t as i128 * y
    }

    /// Real embeddings of `w`: the larger root first.
    pub fn omega_embeddings(&self) -> [f64; 2] {
        if self.d == 1 {
            return [0.0, 0.0];
        }
        let root = (self.discriminant() as f64).sqrt();
        let t = self.t as f64;
        [(t + root) / 2.0, (t - root) / 2.0]
    }

    pub fn embed(&self, (x, y): (f64, f64)) -> [f64; 2] {
        let [w1, w2] = self.omega_embeddings();
        [x + y * w1, x + y * w2]
    }

    /// Exact signs of the two real embeddings of `x + y*w` (one sign in degree 1).
    pub fn signs(&self, (x, y): (i128, i128)) -> [i8; 2] {
        // x + y*w = (2x + t*y)/2 + (y/2)*sqrt(D) in embedding one, minus in embedding two.
        let u = 2 * x + self.t as i128 * y;
        let v = y;
        let disc = self.discriminant() as i128;
        let sign_of = |u: i128, v: i128| -> i8 {
            // sign of u + v*sqrt(disc)
            match (u.signum(), v.signum()) {
                (0, 0) => 0,
                (su, 0) => su as i8,
                (0, sv) => sv as i8,
                (su, sv) if su == sv => su as i8,
                (su, _) => match (u * u).cmp(&(v * v * disc)) {
                    Ordering::Greater => su as i8,
                    Ordering::Less => -su as i8,
                    Ordering::Equal => 0,
                },
            }
        };
        if self.d == 1 {
            let s = x.signum() as i8;
            return [s, s];
        }
        [sign_of(u, v), sign_of(u, -v)]
    }
}

/// An element `a + b*w` of the field with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    ring: Ring,
    pub a: BigRational,
    pub b: BigRational,
}

fn rat(n: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl FieldElement {
    pub fn new(ring: Ring, a: BigRational, b: BigRational) -> FieldElement {
        let b = if ring.degree() == 1 { BigRational::zero() } else { b };
        FieldElement { ring, a, b }
    }

    pub fn from_ints(ring: Ring, x: i128, y: i128) -> FieldElement {
        FieldElement::new(ring, rat(x), rat(y))
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn zero(ring: Ring) -> FieldElement {
        FieldElement::from_ints(ring, 0, 0)
    }

    pub fn one(ring: Ring) -> FieldElement {
        FieldElement::from_ints(ring, 1, 0)
    }

    /// `sqrt d` (equal to `2w - 1` or `w` depending on `d mod 4`).
    pub fn sqrt_d(ring: Ring) -> FieldElement {
        if ring.t == 1 {
            FieldElement::from_ints(ring, -1, 2)
        } else {
            FieldElement::from_ints(ring, 0, 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    /// Integer coordinates, if integral and small enough.
    pub fn to_ints(&self) -> Option<(i128, i128)> {
        if !self.is_integral() {
            return None;
        }
        Some((self.a.to_integer().to_i128()?, self.b.to_integer().to_i128()?))
    }

    pub fn add(&self, o: &FieldElement) -> FieldElement {
        FieldElement::new(self.ring, &self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &FieldElement) -> FieldElement {
        FieldElement::new(self.ring, &self.a - &o.a, &self.b - &o.b)
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement::new(self.ring, -&self.a, -&self.b)
    }

    pub fn mul(&self, o: &FieldElement) -> FieldElement {
        let t = rat(self.ring.t as i128);
        let n = rat(self.ring.n as i128);
        let bb = &self.b * &o.b;
        FieldElement::new(
            self.ring,
            &self.a * &o.a - &n * &bb,
            &self.a * &o.b + &self.b * &o.a + &t * &bb,
        )
    }

    pub fn scale(&self, q: &BigRational) -> FieldElement {
        FieldElement::new(self.ring, &self.a * q, &self.b * q)
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut acc = FieldElement::one(self.ring);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn conj(&self) -> FieldElement {
        let t = rat(self.ring.t as i128);
        FieldElement::new(self.ring, &self.a + &t * &self.b, -&self.b)
    }

    pub fn norm(&self) -> BigRational {
        let t = rat(self.ring.t as i128);
        let n = rat(self.ring.n as i128);
        if self.ring.degree() == 1 {
            return self.a.clone();
        }
        &self.a * &self.a + &t * &self.a * &self.b + &n * &self.b * &self.b
    }

    pub fn trace(&self) -> BigRational {
        if self.ring.degree() == 1 {
            return self.a.clone();
        }
        rat(2) * &self.a + rat(self.ring.t as i128) * &self.b
    }

    pub fn inv(&self) -> Option<FieldElement> {
        if self.is_zero() {
            return None;
        }
        let nm = self.norm();
        if self.ring.degree() == 1 {
            return Some(FieldElement::new(self.ring, self.a.recip(), BigRational::zero()));
        }
        Some(self.conj().scale(&nm.recip()))
    }

    /// Real embeddings (one value repeated in degree 1).
    pub fn embeddings(&self) -> [f64; 2] {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        if self.ring.degree() == 1 {
            return [a, a];
        }
        self.ring.embed((a, b))
    }

    /// Exact signs of the real embeddings.
    pub fn signs(&self) -> [i8; 2] {
        let den = num_integer::Integer::lcm(self.a.denom(), self.b.denom());
        let x = (&self.a * BigRational::from_integer(den.clone())).to_integer();
        let y = (&self.b * BigRational::from_integer(den)).to_integer();
        match (x.to_i128(), y.to_i128()) {
            (Some(x), Some(y)) if x.abs() < (1i128 << 60) && y.abs() < (1i128 << 60) => {
                self.ring.signs((x, y))
            }
            _ => big_signs(self.ring, &x, &y),
        }
    }

    pub fn is_totally_positive(&self) -> bool {
        self.signs().iter().all(|&s| s > 0)
    }
}

fn big_signs(ring: Ring, x: &BigInt, y: &BigInt) -> [i8; 2] {
    let u: BigInt = BigInt::from(2) * x + BigInt::from(ring.t) * y;
    let disc = BigInt::from(ring.discriminant());
    let sign_of = |u: &BigInt, v: &BigInt| -> i8 {
        let su = u.signum().to_i8().unwrap();
        let sv = v.signum().to_i8().unwrap();
        if su == sv || sv == 0 {
            return su;
        }
        if su == 0 {
            return sv;
        }
        match (u * u).cmp(&(v * v * &disc)) {
            Ordering::Greater => su,
            Ordering::Less => -su,
            Ordering::Equal => 0,
        }
    };
    if ring.d == 1 {
        let s = x.signum().to_i8().unwrap();
        return [s, s];
    }
    [sign_of(&u, y), sign_of(&u, &-y)]
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let b_str = if self.b.is_one() {
            "w".to_string()
        } else if (-&self.b).is_one() {
            "-w".to_string()
        } else {
            format!("{}*w", self.b)
        };
        if self.a.is_zero() {
            write!(f, "{b_str}")
        } else if self.b.is_negative() {
            write!(f, "{}{}", self.a, b_str)
        } else {
            write!(f, "{}+{}", self.a, b_str)
        }
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Q or a real quadratic field of narrow class number one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    ring: Ring,
    discriminant: i64,
    different: Ideal,
    fundamental_unit: Option<FieldElement>,
}

impl NumberField {
    /// The field with the default whitelist `{1, 2, 5, 13}`.
    pub fn new(d: i64) -> Result<NumberField> {
        NumberField::with_allowed(d, &DEFAULT_ALLOWED)
    }

    pub fn with_allowed(d: i64, allowed: &[i64]) -> Result<NumberField> {
        if !arith::is_squarefree(d) {
            return Err(Error::NotSquarefree(d));
        }
        if !allowed.contains(&d) {
            return Err(Error::NarrowClassNumberNotOne(d));
        }
        let ring = Ring::new(d);
        let fundamental_unit = if ring.degree() == 2 {
            let (x, y) = fundamental_unit(ring);
            // A unit of norm +1 generating the units leaves a totally positive
            // non-square unit, so the narrow class group is nontrivial.
            if ring.norm((x, y)) != -1 {
                return Err(Error::NarrowClassNumberNotOne(d));
            }
            Some(FieldElement::from_ints(ring, x, y))
        } else {
            None
        };
        let different = if ring.degree() == 1 {
            Ideal::unit(ring)
        } else {
            Ideal::principal(&FieldElement::from_ints(ring, -(ring.t as i128), 2))
        };
        Ok(NumberField {
            ring,
            discriminant: ring.discriminant(),
            different,
            fundamental_unit,
        })
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn d(&self) -> i64 {
        self.ring.d
    }

    pub fn degree(&self) -> u32 {
        self.ring.degree()
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn different(&self) -> &Ideal {
        &self.different
    }

    /// The unit `> 1` generating `O^x / {+-1}`; `None` over Q.
    pub fn fundamental_unit(&self) -> Option<&FieldElement> {
        self.fundamental_unit.as_ref()
    }

    /// Generator of the totally positive units (`eps^2`), or 1 over Q.
    pub fn totally_positive_unit(&self) -> FieldElement {
        match &self.fundamental_unit {
            Some(u) => u.mul(u),
            None => FieldElement::one(self.ring),
        }
    }

    pub fn narrow_class_number_one(&self) -> bool {
        true
    }

    /// The integral basis as printable elements.
    pub fn integral_basis(&self) -> Vec<String> {
        if self.degree() == 1 {
            vec!["1".into()]
        } else if self.ring.t == 1 {
            vec!["1".into(), format!("(1+sqrt{})/2", self.d())]
        } else {
            vec!["1".into(), format!("sqrt{}", self.d())]
        }
    }
}

/// Fundamental unit `> 1` of `Z[w]`, from the continued fraction of `w`.
fn fundamental_unit(ring: Ring) -> (i128, i128) {
    let d = ring.d as i128;
    let s = arith::isqrt(d);
    // w = (p + sqrt d)/q with q | d - p^2.
    let (mut p, mut q) = if ring.t == 1 { (1i128, 2i128) } else { (0, 1) };
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    for _ in 0..10_000 {
        let a = if q > 0 {
            num_integer::Integer::div_floor(&(p + s), &q)
        } else {
            num_integer::Integer::div_floor(&(p + s + 1), &q)
        };
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        // convergent h/k of w: test h - k*w
        let cand = (h, -k);
        if ring.norm(cand).abs() == 1 {
            return normalize_unit(ring, cand);
        }
        let p_next = a * q - p;
        let q_next = (d - p_next * p_next) / q;
        p = p_next;
        q = q_next;
    }
    panic!("no unit found in continued fraction of w for d = {}", ring.d);
}

/// Among `+-u, +-u^{-1}` return the one whose first embedding exceeds 1.
fn normalize_unit(ring: Ring, u: (i128, i128)) -> (i128, i128) {
    let nu = ring.norm(u);
    // u^{-1} = conj(u) / N(u)
    let c = ring.conj(u);
    let inv = (c.0 * nu, c.1 * nu);
    for cand in [u, (-u.0, -u.1), inv, (-inv.0, -inv.1)] {
        // first embedding > 1 <=> cand - 1 has positive first sign
        if ring.signs((cand.0 - 1, cand.1))[0] > 0 {
            return cand;
        }
    }
    unreachable!("one of +-u, +-1/u exceeds 1")
}
