//! Rational-integer helpers: trial division, modular square roots, sieves.

use num_integer::Integer;

/// Largest trial divisor used when factoring norms.
pub const TRIAL_DIVISION_LIMIT: i128 = 1_000_000;

pub fn gcd(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

/// Returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b) >= 0`.
pub fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn lcm(a: i128, b: i128) -> i128 {
    a.lcm(&b)
}

pub fn isqrt(n: i128) -> i128 {
    assert!(n >= 0);
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn mod_pow(mut base: i128, mut exp: u128, m: i128) -> i128 {
    let mut acc = 1i128.rem_euclid(m);
    base = base.rem_euclid(m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Factor `n > 0` by trial division. Fails with the unfactored cofactor when
/// `n` has a composite part beyond `TRIAL_DIVISION_LIMIT`² (never happens for
/// `n <= 10^12`).
pub fn factor(mut n: i128) -> Vec<(i128, u32)> {
    assert!(n > 0, "factor expects a positive integer");
    let mut out = Vec::new();
    let mut p = 2i128;
    while p * p <= n && p <= TRIAL_DIVISION_LIMIT {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: i128) -> bool {
    n >= 2 && factor(n) == vec![(n, 1)]
}

pub fn is_squarefree(n: i64) -> bool {
    n > 0 && factor(n as i128).iter().all(|&(_, e)| e == 1)
}

/// Primes up to `bound` inclusive.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &is_p)| is_p)
        .map(|(k, _)| k as u64)
        .collect()
}

/// A square root of `a` modulo the odd prime `p`, if one exists (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: i128, p: i128) -> Option<i128> {
    let a = a.rem_euclid(p);
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if mod_pow(a, ((p - 1) / 2) as u128, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2i128;
    while mod_pow(z, ((p - 1) / 2) as u128, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q as u128, p);
    let mut t = mod_pow(a, q as u128, p);
    let mut r = mod_pow(a, ((q + 1) / 2) as u128, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = t2 * t2 % p;
            i += 1;
        }
        let b = mod_pow(c, 1u128 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Some(r)
}
