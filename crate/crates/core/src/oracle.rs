//! Brute-force reference computations. Each routine avoids the data
//! structures it is meant to check (unit group bases, discrete-log tables,
//! factor keys, Euler recursions) and works from enumeration instead.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::characters::{angle_to_complex, Angle, NumericalCharacter};
use crate::field::{NumberField, Ring};
use crate::ideal::Ideal;

/// All residues `x + y*w` with `0 <= x < a`, `0 <= y < c` for the HNF of `m`.
pub fn residues(m: &Ideal) -> Vec<(i128, i128)> {
    let (a, _, c, _) = m.hnf();
    let c = if m.ring().degree() == 1 { 1 } else { c };
    (0..c).flat_map(|y| (0..a).map(move |x| (x, y))).collect()
}

/// Residues generating the unit ideal together with `m`.
pub fn units(m: &Ideal) -> Vec<(i128, i128)> {
    let ring = m.ring();
    residues(m)
        .into_iter()
        .filter(|&x| {
            x != (0, 0) || m.is_unit_ideal()
        })
        .filter(|&x| {
            m.is_unit_ideal() || Ideal::from_int_generators(ring, &[x]).map(|i| i.is_coprime(m)).unwrap_or(false)
        })
        .collect()
}

pub fn unit_group_size(m: &Ideal) -> usize {
    units(m).len()
}

/// Multiplicative order of `x` modulo `m` by repeated multiplication.
pub fn order_mod(ring: Ring, m: &Ideal, x: (i128, i128)) -> u64 {
    let one = m.reduce((1, 0));
    let x = m.reduce(x);
    let mut cur = x;
    let mut k = 1;
    while cur != one {
        cur = m.reduce(ring.mul(cur, x));
        k += 1;
    }
    k
}

/// Values of a character on every unit, as angles.
pub fn character_table(chi: &NumericalCharacter) -> BTreeMap<(i128, i128), Angle> {
    units(chi.modulus()).into_iter().map(|u| (u, chi.value(u).expect("unit"))).collect()
}

/// Whether `chi(xy) = chi(x) chi(y)` for all pairs of units.
pub fn is_homomorphism(chi: &NumericalCharacter) -> bool {
    let ring = chi.field().ring();
    let m = chi.modulus();
    let t = character_table(chi);
    t.iter().all(|(&x, &a)| {
        t.iter().all(|(&y, &b)| {
            let xy = m.reduce(ring.mul(x, y));
            let c = t[&xy];
            (a + b - c).is_integer()
        })
    })
}

/// Conductor by testing triviality on `{x = 1 mod M}` for every divisor `M`;
/// `None` if the admissible moduli have no common divisor among them.
pub fn conductor(chi: &NumericalCharacter) -> Option<Ideal> {
    let m = chi.modulus();
    let t = character_table(chi);
    let mut good: Vec<Ideal> = m
        .divisors()
        .expect("factorable modulus")
        .into_iter()
        .filter(|d| {
            t.iter().all(|(&(x, y), a)| !d.contains_coords((x - 1, y)) || a.is_integer())
        })
        .collect();
    good.sort();
    let best = good[0].clone();
    good.iter().all(|g| best.divides(g)).then_some(best)
}

/// Number of characters of `(O/p^k)^x` trivial on `eps^2`, minus the same
/// count for `p^{k-1}`: the extendable characters of exact conductor `p^k`.
pub fn extendable_exact_count(field: &NumberField, p: &Ideal, k: u32) -> usize {
    let count = |j: u32| -> usize {
        if j == 0 {
            return 1;
        }
        let m = p.pow(j);
        let g = unit_group_size(&m);
        let u = field.totally_positive_unit().to_ints().unwrap();
        g / order_mod(field.ring(), &m, u) as usize
    };
    count(k) - count(k - 1)
}

/// All integral ideals of norm at most `x`, from HNF triples closed under
/// multiplication by `w`.
pub fn ideals_up_to(ring: Ring, x: u64) -> Vec<Ideal> {
    let mut out = Vec::new();
    for n in 1..=x as i128 {
        if ring.degree() == 1 {
            out.push(Ideal::from_int(ring, n));
            continue;
        }
        for c in 1..=n {
            if n % c != 0 {
                continue;
            }
            let a = n / c;
            if a % c != 0 {
                continue;
            }
            for b in (0..a).step_by(c as usize) {
                if let Ok(i) = Ideal::from_hnf(ring, a, b, c, 1) {
                    if i.hnf() == (a, b, c, 1) {
                        out.push(i);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficient of `T^n` in `(1 - lam T + a T^2)^{-1}`, by the binomial
/// expansion of `sum (lam T - a T^2)^j`.
pub fn euler_local_coefficient(lam: Complex64, a: Complex64, n: u64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..=n / 2 {
        // terms with j factors of (-a T^2) and n - 2j factors of (lam T)
        let r = n - 2 * j;
        s += binom(r + j, j) * lam.powu(r as u32) * (-a).powu(j as u32);
    }
    s
}

/// Coefficients up to norm `x` from the formal product of local factors,
/// multiplying ideals in HNF.
pub fn euler_product_coefficients(
    f: &crate::coefficients::FormalNewform,
    x: u64,
) -> BTreeMap<Ideal, Complex64> {
    let ring = f.field().ring();
    let mut series: BTreeMap<Ideal, Complex64> = BTreeMap::new();
    series.insert(Ideal::unit(ring), Complex64::new(1.0, 0.0));
    let mut primes = Vec::new();
    for p in crate::arith::primes_up_to(x) {
        for q in Ideal::primes_above(ring, p as i128) {
            if q.norm() as u64 <= x {
                primes.push(q);
            }
        }
    }
    for q in primes {
        let nq = q.norm() as u64;
        let lam = f.eigenvalue(&q).expect("eigenvalue");
        let bad = q.divides(f.level());
        let a = if bad {
            Complex64::new(0.0, 0.0)
        } else {
            f.character().ideal_value_complex(&q) * (nq as f64).powi(f.k0() as i32 - 1)
        };
        let mut next = series.clone();
        for (m, v) in &series {
            let nm = m.norm() as u64;
            let mut t = 1u64;
            let mut qt = q.clone();
            while nm * nq.pow(t as u32) <= x {
                let c = euler_local_coefficient(lam, a, t);
                *next.entry(m.mul(&qt)).or_insert(Complex64::new(0.0, 0.0)) += v * c;
                t += 1;
                qt = qt.mul(&q);
            }
        }
        series = next;
    }
    series
}

/// `C(m, f | T_r)` straight from the divisor-sum formula, with coefficients
/// supplied by `c` and divisibility decided by HNF containment.
pub fn hecke_direct(
    m: &Ideal,
    r: &Ideal,
    phi: &crate::characters::HeckeCharacter,
    k0: u32,
    c: impl Fn(&Ideal) -> Complex64,
) -> Complex64 {
    let g = m.add(r);
    let mut s = Complex64::new(0.0, 0.0);
    for a in g.divisors().expect("factorable") {
        let w = phi.ideal_value(&a).map(angle_to_complex);
        let Some(w) = w else { continue };
        let q = m.mul(r).div_exact(&a.mul(&a)).expect("a^2 divides m r");
        s += w * (a.norm() as f64).powi(k0 as i32 - 1) * c(&q);
    }
    s
}

/// The classical Gauss sum of a Dirichlet character given on `(Z/f)^x`.
pub fn dirichlet_gauss_sum(f: i64, chi: impl Fn(i64) -> Option<Angle>) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..f {
        if let Some(v) = chi(a) {
            s += angle_to_complex(-v) * angle_to_complex(Angle::new(a, f));
        }
    }
    s
}

/// Legendre symbol by Euler's criterion, as an angle (0 or 1/2).
pub fn legendre(a: i64, p: i64) -> Option<Angle> {
    let a = a.rem_euclid(p);
    if a == 0 {
        return None;
    }
    let r = crate::arith::mod_pow(a as i128, ((p - 1) / 2) as u128, p as i128);
    Some(if r == 1 { Angle::new(0, 1) } else { Angle::new(1, 2) })
}
