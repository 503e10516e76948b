//! Modular arithmetic and elementary number theory.
//!
//! Everything here works on `u64` residues with `u128` intermediates, which is
//! ample for the moduli this crate handles (factoring is by trial division and
//! is meant for moduli below about 10^7).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of Z_m, kept reduced to `[0, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    pub value: u64,
    pub modulus: u64,
}

impl Residue {
    /// Reduces a signed representative into `[0, modulus)`.
    pub fn new(value: i64, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        Residue {
            value: reduce_signed(value, modulus),
            modulus,
        }
    }

    pub fn from_u64(value: u64, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        Residue {
            value: value % modulus,
            modulus,
        }
    }
}

/// Reduces a signed integer modulo `m` into `[0, m)`.
#[inline]
pub fn reduce_signed(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

#[inline]
pub fn neg_mod(x: u64, m: u64) -> u64 {
    let x = x % m;
    if x == 0 {
        0
    } else {
        m - x
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    add_mod(a % m, neg_mod(b, m), m)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return if m == 1 { Some(0) } else { None };
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing order of the prime.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
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

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Splits `m` into `(p, e)` with `m = p^e`, `p` an odd prime and `e ∈ {1, 2}`.
fn prime_or_prime_square(m: u64) -> Option<(u64, u32)> {
    if m > 2 && m % 2 == 1 && is_prime(m) {
        return Some((m, 1));
    }
    let s = isqrt(m);
    if s * s == m && s > 2 && s % 2 == 1 && is_prime(s) {
        return Some((s, 2));
    }
    None
}

fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    // Tonelli–Shanks for p ≡ 1 (mod 4).
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p)
        .find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)
        .expect("odd prime has a non-residue");
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Square root of `a` modulo `m`, where `m` is an odd prime or the square of
/// one. Returns the smaller of the two roots, or `None` for a non-residue.
pub fn mod_sqrt(a: u64, m: u64) -> Result<Option<u64>> {
    let (p, e) = prime_or_prime_square(m).ok_or(Error::UnsupportedModulus(m))?;
    let a = a % m;
    if a == 0 {
        return Ok(Some(0));
    }
    if a % p == 0 {
        return Err(Error::NotAUnit { x: a, modulus: m });
    }
    let Some(mut r) = sqrt_mod_prime(a, p) else {
        return Ok(None);
    };
    if e == 2 {
        // Hensel: r ← r − (r² − a)/(2r) (mod p²)
        let f = sub_mod(mul_mod(r, r, m), a, m);
        let inv = inv_mod(mul_mod(2, r, m), m).expect("2r is a unit mod p^2");
        r = sub_mod(r, mul_mod(f, inv, m), m);
    }
    debug_assert_eq!(mul_mod(r, r, m), a);
    Ok(Some(r.min(m - r)))
}

/// Both square roots of `a` modulo `m` (smaller first), if `a` is a nonzero
/// residue.
pub fn mod_sqrt_both(a: u64, m: u64) -> Result<Option<(u64, u64)>> {
    Ok(mod_sqrt(a, m)?.map(|r| (r, neg_mod(r, m))))
}

/// The unique residue modulo the product of the moduli that reduces to each
/// given residue.
pub fn crt_lift(residues: &[Residue]) -> Result<Residue> {
    let mut acc = Residue {
        value: 0,
        modulus: 1,
    };
    for r in residues {
        if gcd(acc.modulus, r.modulus) != 1 {
            return Err(Error::NotCoprime {
                a: acc.modulus,
                b: r.modulus,
            });
        }
        let m = acc.modulus * r.modulus;
        // x = acc + acc.modulus * t, with t ≡ (r − acc) / acc.modulus (mod r.modulus)
        let inv = inv_mod(acc.modulus % r.modulus, r.modulus).unwrap_or(0);
        let diff = sub_mod(r.value % r.modulus, acc.value % r.modulus, r.modulus);
        let t = mul_mod(diff, inv, r.modulus);
        acc = Residue {
            value: (acc.value as u128 + acc.modulus as u128 * t as u128) as u64 % m,
            modulus: m,
        };
    }
    Ok(acc)
}

/// Least `t > 0` with `x^t ≡ 1 (mod v)`.
pub fn mult_order(x: u64, v: u64) -> Result<u64> {
    if v == 1 {
        return Ok(1);
    }
    let x = x % v;
    if gcd(x, v) != 1 {
        return Err(Error::NotAUnit { x, modulus: v });
    }
    let phi = euler_phi(v);
    let mut t = phi;
    for (p, _) in factorize(phi) {
        while t % p == 0 && pow_mod(x, t / p, v) == 1 {
            t /= p;
        }
    }
    Ok(t)
}

/// Whether `x` together with `−1` generates the full unit group of Z_v,
/// i.e. whether `x` generates U(v)/{1, −1}.
pub fn generates_mod_pm_one(x: u64, v: u64) -> Result<bool> {
    let ord = mult_order(x, v)?;
    let contains_minus_one = v <= 2 || (ord % 2 == 0 && pow_mod(x, ord / 2, v) == v - 1);
    let size = if contains_minus_one { ord } else { 2 * ord };
    Ok(size == euler_phi(v))
}

/// Smallest primitive root modulo the prime `p`.
pub fn smallest_primitive_root(p: u64) -> Option<u64> {
    if !is_prime(p) {
        return None;
    }
    if p == 2 {
        return Some(1);
    }
    let factors = factorize(p - 1);
    (2..p).find(|&g| {
        factors
            .iter()
            .all(|&(f, _)| pow_mod(g, (p - 1) / f, p) != 1)
    })
}

/// Smallest element of multiplicative order exactly `order` modulo the prime `p`.
pub fn smallest_element_of_order(order: u64, p: u64) -> Option<u64> {
    if !is_prime(p) || order == 0 || (p - 1) % order != 0 {
        return None;
    }
    (1..p).find(|&x| mult_order(x, p).ok() == Some(order))
}

/// Cyclotomic classes of index `d` in F_q for a prime `q ≡ 1 (mod d)`:
/// `C_i = ω^i · C_0` where `C_0` is the subgroup of nonzero `d`-th powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cyclotomy {
    pub d: u64,
    pub q: u64,
    pub omega: u64,
}

impl Cyclotomy {
    /// Uses the smallest primitive root of `q` as `ω`.
    pub fn new(d: u64, q: u64) -> Result<Self> {
        let omega = smallest_primitive_root(q).ok_or(Error::UnsupportedModulus(q))?;
        Self::with_generator(d, q, omega)
    }

    pub fn with_generator(d: u64, q: u64, omega: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::UnsupportedModulus(q));
        }
        if d == 0 || (q - 1) % d != 0 {
            return Err(Error::Precondition(format!("{q} is not 1 mod {d}")));
        }
        if mult_order(omega, q).map_err(|_| Error::NotPrimitive { omega, q })? != q - 1 {
            return Err(Error::NotPrimitive { omega, q });
        }
        Ok(Cyclotomy { d, q, omega })
    }

    /// The class index of a nonzero `x`.
    pub fn index(&self, x: u64) -> Result<u64> {
        let x = x % self.q;
        if x == 0 {
            return Err(Error::NotAUnit { x, modulus: self.q });
        }
        let e = (self.q - 1) / self.d;
        let inv_omega = inv_mod(self.omega, self.q).expect("primitive root is a unit");
        let mut y = x;
        for i in 0..self.d {
            if pow_mod(y, e, self.q) == 1 {
                return Ok(i);
            }
            y = mul_mod(y, inv_omega, self.q);
        }
        unreachable!("every unit lies in some cyclotomic class")
    }

    pub fn contains(&self, class: u64, x: u64) -> bool {
        x % self.q != 0 && self.index(x).ok() == Some(class % self.d)
    }

    /// The elements of `C_class`, sorted.
    pub fn class(&self, class: u64) -> Vec<u64> {
        let mut out: Vec<u64> = (1..self.q).filter(|&x| self.contains(class, x)).collect();
        out.sort_unstable();
        out
    }
}

/// The index `i` with `x ∈ C_i^{d,q}` for the primitive element `omega`.
pub fn cyclotomic_index(x: u64, d: u64, q: u64, omega: u64) -> Result<u64> {
    Cyclotomy::with_generator(d, q, omega)?.index(x)
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The cyclotomic existence bound `Q(d, m) = ¼(U + √(U² + 4 d^{m−1} m))²`
/// with `U = Σ_{h=1}^{m} C(m,h) (d−1)^h (h−1)`. Any prime power `q > Q(d,m)`
/// with `q ≡ 1 (mod d)` admits elements in every prescribed pattern of
/// cyclotomic classes relative to `m` fixed points.
pub fn q_bound(d: u64, m: u64) -> f64 {
    let u: f64 = (1..=m)
        .map(|h| binomial(m, h) * ((d - 1) as f64).powi(h as i32) * (h as f64 - 1.0))
        .sum();
    let inner = u * u + 4.0 * (d as f64).powi(m as i32 - 1) * m as f64;
    0.25 * (u + inner.sqrt()).powi(2)
}
