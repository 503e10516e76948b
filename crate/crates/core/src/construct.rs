//! Direct and recursive PPS constructions.

use crate::error::{Error, Result};
use crate::modarith::{
    crt_lift, gcd, generates_mod_pm_one, is_prime, mod_sqrt, mul_mod, neg_mod, pow_mod, Residue,
};
use crate::pps::{
    exhaustive_search, infer_params, nonexistence_case, verify_pps, Classification,
    ExhaustiveBudget, PairSet, PpsSpec,
};

/// A pair set together with the spec it satisfies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub set: PairSet,
    pub spec: PpsSpec,
}

impl Construction {
    fn checked(set: PairSet, spec: PpsSpec) -> Result<Self> {
        let report = verify_pps(&set, &spec);
        if !report.valid {
            return Err(Error::InvalidInput(format!(
                "construction over Z_{} did not verify: {report:?}",
                spec.v()
            )));
        }
        Ok(Construction { set, spec })
    }
}

/// `θ = 1 + √2` modulo `p` or `p²`, and whether it generates `U/{±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SilverWitness {
    pub p: u64,
    pub modulus: u64,
    pub theta: u64,
    pub generates: bool,
}

impl SilverWitness {
    /// Both choices of `√2`, canonical (smaller) root first.
    pub fn candidates(p: u64, modulus: u64) -> Result<Vec<SilverWitness>> {
        let Some(r) = mod_sqrt(2, modulus)? else {
            return Err(Error::Precondition(format!(
                "2 is not a square mod {modulus}"
            )));
        };
        [r, neg_mod(r, modulus)]
            .into_iter()
            .map(|r| {
                let theta = (1 + r) % modulus;
                Ok(SilverWitness {
                    p,
                    modulus,
                    theta,
                    generates: generates_mod_pm_one(theta, modulus)?,
                })
            })
            .collect()
    }

    /// The first generating candidate.
    pub fn find(p: u64, modulus: u64) -> Result<SilverWitness> {
        let cands = Self::candidates(p, modulus)?;
        cands
            .iter()
            .find(|w| w.generates)
            .copied()
            .ok_or(Error::GenerationFails {
                theta: cands[0].theta,
                modulus,
            })
    }

    /// `θ − 1`, a square root of 2.
    pub fn root(&self) -> u64 {
        (self.theta + self.modulus - 1) % self.modulus
    }
}

fn require_silver_prime(p: u64) -> Result<()> {
    if !is_prime(p) || p % 8 != 7 {
        return Err(Error::Precondition(format!(
            "{p} is not a prime ≡ 7 (mod 8)"
        )));
    }
    Ok(())
}

/// Consecutive powers `{θ^{2i−1}, θ^{2i}}` for `i = 1..=count`, times `scale`.
fn power_chain(theta: u64, count: u64, scale: u64, m: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(count as usize);
    let mut t = theta;
    for _ in 0..count {
        let next = mul_mod(t, theta, m);
        out.push((mul_mod(scale, t, m), mul_mod(scale, next, m)));
        t = mul_mod(next, theta, m);
    }
    out
}

/// The APS(p, 1, θ − 1) made of consecutive powers of `θ = 1 + √2`.
pub fn silver_aps(p: u64) -> Result<(Construction, SilverWitness)> {
    require_silver_prime(p)?;
    let w = SilverWitness::find(p, p)?;
    let set = PairSet::new(p, power_chain(w.theta, (p - 3) / 4, 1, p))?;
    let spec = PpsSpec::aps(p, 1, w.root())?;
    Ok((Construction::checked(set, spec)?, w))
}

/// An APS(p, α, β) from the silver construction, scaled by `α`.
pub fn aps_with_params(p: u64, alpha: u64, beta: u64) -> Result<Construction> {
    require_silver_prime(p)?;
    let (alpha, beta) = (alpha % p, beta % p);
    if alpha == 0 || beta == 0 {
        return Err(Error::InvalidSpec("α and β must be nonzero".into()));
    }
    let spec = PpsSpec::aps(p, alpha, beta)?;
    if !crate::pps::aps_necessary(p, alpha, beta)? {
        return Err(Error::InvalidSpec(format!(
            "2α² − β² ≢ 0 (mod {p}) for α = {alpha}, β = {beta}"
        )));
    }
    let (base, _) = silver_aps(p)?;
    // β/α is a square root of 2, so α(θ − 1) ≡ ±β and the spec matches.
    Construction::checked(base.set.scaled(alpha)?, spec)
}

fn subgroup(v: u64, d: u64) -> Vec<u64> {
    (0..v / d).map(|k| k * d).collect()
}

/// Fills the holes of a PPS(Z_v, dZ_v, dZ_v) with a PPS over `Z_{v/d}`
/// embedded by `x ↦ d·x`.
pub fn fill(
    outer: &PairSet,
    inner: &PairSet,
    inner_spec: &PpsSpec,
    d: u64,
) -> Result<Construction> {
    let v = outer.v();
    if d == 0 || v % d != 0 || v / d != inner.v() || inner_spec.v() != inner.v() {
        return Err(Error::Precondition(format!(
            "index {d} does not match Z_{v} ⊃ Z_{}",
            inner.v()
        )));
    }
    let h = subgroup(v, d);
    let outer_spec = PpsSpec::new(v, h.iter().copied(), h.iter().copied())?;
    if !verify_pps(outer, &outer_spec).valid {
        return Err(Error::InvalidInput(format!(
            "outer set is not a PPS(Z_{v}, {d}Z_{v}, {d}Z_{v})"
        )));
    }
    if !verify_pps(inner, inner_spec).valid {
        return Err(Error::InvalidInput(format!(
            "inner set does not verify over Z_{}",
            inner.v()
        )));
    }
    let embedded = inner.embedded(d, v)?;
    let set = PairSet::union(v, [outer, &embedded])?;
    let spec = PpsSpec::new(
        v,
        inner_spec.a1().iter().map(|a| a * d),
        inner_spec.a2().iter().map(|a| a * d),
    )?;
    Construction::checked(set, spec)
}

/// Lifts a PPS over `Z_v` to one over `Z_{vu}` via `{x + sv, y + 2sv}`,
/// `s ∈ Z_u`.
pub fn inflate(set: &PairSet, spec: &PpsSpec, u: u64) -> Result<Construction> {
    if u == 0 || gcd(u, 6) != 1 {
        return Err(Error::Precondition(format!("gcd({u}, 6) must be 1")));
    }
    let v = set.v();
    if spec.v() != v {
        return Err(Error::Precondition("spec and set moduli differ".into()));
    }
    let n = v * u;
    let mut pairs = Vec::with_capacity(set.len() * u as usize);
    for &(x, y) in set.pairs() {
        for s in 0..u {
            pairs.push(((x + s * v) % n, (y + 2 * s * v) % n));
        }
    }
    let lift = |a: &std::collections::BTreeSet<u64>| -> Vec<u64> {
        a.iter()
            .flat_map(|&a| (0..u).map(move |s| a + s * v))
            .collect()
    };
    let spec = PpsSpec::new(n, lift(spec.a1()), lift(spec.a2()))?;
    Construction::checked(PairSet::from_raw(n, pairs), spec)
}

fn aps_params(set: &PairSet) -> Result<(u64, u64)> {
    match infer_params(set) {
        Classification::Aps { alpha, beta } => Ok((alpha, beta)),
        other => Err(Error::InvalidInput(format!(
            "expected an APS over Z_{}, found {other:?}",
            set.v()
        ))),
    }
}

fn require_ps(set: &PairSet) -> Result<()> {
    if infer_params(set) != Classification::Ps {
        return Err(Error::InvalidInput(format!("not a PS({})", set.v())));
    }
    Ok(())
}

/// PS(v) and APS(u, α, β) with `u ≡ 7, 11 (mod 12)` give APS(vu, vα, vβ).
pub fn compose_ps_aps(ps: &PairSet, aps: &PairSet) -> Result<Construction> {
    let u = aps.v();
    if u % 12 != 7 && u % 12 != 11 {
        return Err(Error::Precondition(format!("{u} is not 7 or 11 mod 12")));
    }
    require_ps(ps)?;
    let (alpha, beta) = aps_params(aps)?;
    let v = ps.v();
    let outer = inflate(ps, &PpsSpec::ps(v)?, u)?;
    let inner_spec = PpsSpec::aps(u, alpha, beta)?;
    fill(&outer.set, aps, &inner_spec, v)
}

/// PS(u) and PS(v) give PS(uv).
pub fn ps_product(su: &PairSet, sv: &PairSet) -> Result<Construction> {
    for s in [su, sv] {
        if s.v() % 4 != 1 {
            return Err(Error::Precondition(format!("{} is not 1 mod 4", s.v())));
        }
        require_ps(s)?;
    }
    // Inflate by whichever factor is prime to 6.
    let (inflated, filler) = if gcd(su.v(), 6) == 1 {
        (sv, su)
    } else if gcd(sv.v(), 6) == 1 {
        (su, sv)
    } else {
        return Err(Error::Precondition("neither order is prime to 6".into()));
    };
    let outer = inflate(inflated, &PpsSpec::ps(inflated.v())?, filler.v())?;
    fill(&outer.set, filler, &PpsSpec::ps(filler.v())?, inflated.v())
}

fn is_qr(x: u64, p: u64) -> bool {
    x % p != 0 && pow_mod(x % p, (p - 1) / 2, p) == 1
}

/// The `(x1, y1)` with `x1, y1, x1 ± y1` all nonzero squares mod `p`,
/// first in lexicographic order.
pub fn square_quadruple_witness(p: u64) -> Option<(u64, u64)> {
    (1..p).find_map(|x| {
        (1..p)
            .find(|&y| is_qr(x, p) && is_qr(y, p) && is_qr(x + y, p) && is_qr(x + p - y, p))
            .map(|y| (x, y))
    })
}

/// The `(x2, y2)` with `x2, x2 + y2` squares and `y2, x2 − y2` non-squares
/// mod `q`, first in lexicographic order.
pub fn mixed_quadruple_witness(q: u64) -> Option<(u64, u64)> {
    let nonsq = |z: u64| z % q != 0 && !is_qr(z, q);
    (1..q).find_map(|x| {
        (1..q)
            .find(|&y| is_qr(x, q) && nonsq(y) && is_qr(x + y, q) && nonsq(x + q - y))
            .map(|y| (x, y))
    })
}

fn crt2(a: u64, p: u64, b: u64, q: u64) -> Result<u64> {
    Ok(crt_lift(&[Residue::from_u64(a, p), Residue::from_u64(b, q)])?.value)
}

fn require_pq(p: u64, q: u64) -> Result<()> {
    if !(is_prime(p) && is_prime(q) && p > q && q > 3 && p % 4 == 3 && q % 4 == 3) {
        return Err(Error::Precondition(format!(
            "need primes p > q > 3, both 3 mod 4 (got p = {p}, q = {q})"
        )));
    }
    Ok(())
}

/// PPS(Z_pq, pZ_pq ∪ qZ_pq, pZ_pq ∪ qZ_pq) from quadratic residues.
pub fn cyclotomic_pps(p: u64, q: u64) -> Result<Construction> {
    require_pq(p, q)?;
    let (x1, y1) = square_quadruple_witness(p)
        .ok_or_else(|| Error::NoWitness(format!("no square quadruple mod {p}")))?;
    let (x2, y2) = mixed_quadruple_witness(q)
        .ok_or_else(|| Error::NoWitness(format!("no mixed quadruple mod {q}")))?;
    let n = p * q;
    let squares = |m: u64| -> Vec<u64> { (1..m).filter(|&s| is_qr(s, m)).collect() };
    let mut pairs = Vec::with_capacity(((p - 1) * (q - 1) / 4) as usize);
    for &s1 in &squares(p) {
        for &s2 in &squares(q) {
            pairs.push((
                crt2(mul_mod(x1, s1, p), p, mul_mod(x2, s2, q), q)?,
                crt2(mul_mod(y1, s1, p), p, mul_mod(y2, s2, q), q)?,
            ));
        }
    }
    let holes: Vec<u64> = (0..n).filter(|z| z % p == 0 || z % q == 0).collect();
    let spec = PpsSpec::new(n, holes.iter().copied(), holes.iter().copied())?;
    Construction::checked(PairSet::new(n, pairs)?, spec)
}

/// The cyclotomic PPS over `Z_pq` together with `q·Sp` and `p·Sq`.
pub fn union_pps_pq(p: u64, q: u64, sp: &PairSet, sq: &PairSet) -> Result<Construction> {
    require_pq(p, q)?;
    if sp.v() != p || sq.v() != q {
        return Err(Error::Precondition("APS moduli must be p and q".into()));
    }
    let (a1, b1) = aps_params(sp)?;
    let (a2, b2) = aps_params(sq)?;
    let base = cyclotomic_pps(p, q)?;
    let n = p * q;
    let set = PairSet::union(n, [&base.set, &sp.embedded(q, n)?, &sq.embedded(p, n)?])?;
    let pm = |a: u64| [a % n, neg_mod(a % n, n)];
    let spec = PpsSpec::new(
        n,
        [0].into_iter().chain(pm(q * a1)).chain(pm(p * a2)),
        [0].into_iter().chain(pm(q * b1)).chain(pm(p * b2)),
    )?;
    Construction::checked(set, spec)
}

/// PPS(Z_{p²}, {0, ±α, ±pα}, {0, ±β, ±pβ}) from powers of `θ = 1 + √2`
/// modulo `p²`.
pub fn silver_pps_p2(p: u64, alpha: u64, beta: u64) -> Result<(Construction, SilverWitness)> {
    require_silver_prime(p)?;
    let m = p * p;
    let (alpha, beta) = (alpha % m, beta % m);
    if gcd(alpha, m) != 1 {
        return Err(Error::NotAUnit {
            x: alpha,
            modulus: m,
        });
    }
    let two_a2 = mul_mod(2, mul_mod(alpha, alpha, m), m);
    if two_a2 != mul_mod(beta, beta, m) {
        return Err(Error::InvalidSpec(format!(
            "2α² − β² ≢ 0 (mod {m}) for α = {alpha}, β = {beta}"
        )));
    }
    let w = SilverWitness::find(p, m)?;
    let mut pairs = power_chain(w.theta, (m - p - 2) / 4, 1, m);
    pairs.extend(power_chain(w.theta % p, (p - 3) / 4, p, m));
    let set = PairSet::new(m, pairs)?.scaled(alpha)?;
    let pm = |a: u64| [a, neg_mod(a, m)];
    let spec = PpsSpec::new(
        m,
        [0].into_iter()
            .chain(pm(alpha))
            .chain(pm(mul_mod(p, alpha, m))),
        [0].into_iter()
            .chain(pm(beta))
            .chain(pm(mul_mod(p, beta, m))),
    )?;
    Ok((Construction::checked(set, spec)?, w))
}

/// Some APS(v, α, β) for the given order: none if a nonexistence argument
/// applies, the silver construction for primes `≡ 7 (mod 8)`, and otherwise
/// a bounded exhaustive search over admissible parameters.
pub fn find_aps(v: u64, budget: ExhaustiveBudget) -> Result<Construction> {
    if v % 4 != 3 {
        return Err(Error::Precondition(format!("{v} is not 3 mod 4")));
    }
    if nonexistence_case(v)?.is_some() {
        return Err(Error::NoAps(v));
    }
    if is_prime(v) && v % 8 == 7 {
        if let Ok((c, _)) = silver_aps(v) {
            return Ok(c);
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for (a, b) in crate::pps::admissible_params(v)? {
        let key = (a.min(v - a), b.min(v - b));
        if !seen.insert(key) {
            continue;
        }
        let spec = PpsSpec::aps(v, key.0, key.1)?;
        if let Some(set) = exhaustive_search(&spec, budget)? {
            return Construction::checked(set, spec);
        }
    }
    Err(Error::NoAps(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(v: u64) -> PairSet {
        exhaustive_search(&PpsSpec::ps(v).unwrap(), ExhaustiveBudget::default())
            .unwrap()
            .unwrap()
    }

    fn aps72() -> PairSet {
        PairSet::new(7, [(1, 4)]).unwrap()
    }

    #[test]
    fn silver_small() {
        let (c, w) = silver_aps(7).unwrap();
        assert_eq!(w.theta, 4);
        assert_eq!(c.set.pairs(), &[(4, 2)]);
        assert_eq!(c.spec, PpsSpec::aps(7, 1, 3).unwrap());
        let (c, _) = silver_aps(23).unwrap();
        assert_eq!(c.set.len(), 5);
        assert!(silver_aps(17).is_err());
    }

    #[test]
    fn silver_chain_identity() {
        for p in [7, 23, 31, 47, 71] {
            let (c, w) = silver_aps(p).unwrap();
            for &(x, y) in c.set.pairs() {
                assert_eq!(y, mul_mod(x, w.theta, p));
            }
        }
    }

    #[test]
    fn silver_fails_where_theta_does_not_generate() {
        assert!(matches!(silver_aps(79), Err(Error::GenerationFails { .. })));
    }

    #[test]
    fn aps_with_params_examples() {
        assert!(
            verify_pps(
                &aps_with_params(7, 2, 1).unwrap().set,
                &PpsSpec::aps(7, 2, 1).unwrap()
            )
            .valid
        );
        assert_eq!(
            aps_with_params(7, 1, 4).unwrap().spec,
            PpsSpec::aps(7, 1, 4).unwrap()
        );
        assert!(aps_with_params(7, 1, 2).is_err());
    }

    #[test]
    fn fill_and_inflate() {
        let ps5 = ps(5);
        let outer = inflate(&ps5, &PpsSpec::ps(5).unwrap(), 7).unwrap();
        assert_eq!(outer.set.len(), 7);
        assert_eq!(outer.spec.a1().len(), 7);
        let c = fill(&outer.set, &aps72(), &PpsSpec::aps(7, 2, 1).unwrap(), 5).unwrap();
        assert_eq!(c.spec, PpsSpec::aps(35, 10, 5).unwrap());
        assert!(fill(&outer.set, &aps72(), &PpsSpec::aps(7, 2, 1).unwrap(), 7).is_err());
        let same = inflate(&ps5, &PpsSpec::ps(5).unwrap(), 1).unwrap();
        assert_eq!(same.set, ps5);
        assert!(inflate(&ps5, &PpsSpec::ps(5).unwrap(), 3).is_err());
    }

    #[test]
    fn fill_with_ps_gives_ps() {
        let outer = inflate(&ps(5), &PpsSpec::ps(5).unwrap(), 13).unwrap();
        let c = fill(&outer.set, &ps(13), &PpsSpec::ps(13).unwrap(), 5).unwrap();
        assert_eq!(c.spec, PpsSpec::ps(65).unwrap());
    }

    #[test]
    fn compose_examples() {
        let c = compose_ps_aps(&ps(5), &aps72()).unwrap();
        assert_eq!(c.spec, PpsSpec::aps(35, 10, 5).unwrap());
        let c = compose_ps_aps(&ps(13), &aps72()).unwrap();
        assert_eq!(c.spec, PpsSpec::aps(91, 26, 13).unwrap());
        let aps27 = PairSet::new(27, [(1, 4), (2, 12), (5, 13), (6, 10), (7, 8), (9, 11)]).unwrap();
        assert!(compose_ps_aps(&ps(5), &aps27).is_err());
    }

    #[test]
    fn product_examples() {
        for (u, v) in [(5, 5), (5, 13), (13, 13)] {
            let c = ps_product(&ps(u), &ps(v)).unwrap();
            assert_eq!(c.spec, PpsSpec::ps(u * v).unwrap());
        }
        assert!(ps_product(&ps(5), &aps72()).is_err());
    }

    #[test]
    fn cyclotomic_witnesses_match_table() {
        for (p, w) in [
            (11, (1, 3)),
            (19, (1, 4)),
            (23, (1, 8)),
            (31, (1, 4)),
            (43, (1, 9)),
        ] {
            assert_eq!(square_quadruple_witness(p), Some(w), "p={p}");
        }
        for (q, w) in [
            (7, (1, 3)),
            (11, (1, 2)),
            (19, (1, 8)),
            (23, (1, 5)),
            (31, (1, 3)),
        ] {
            assert_eq!(mixed_quadruple_witness(q), Some(w), "q={q}");
        }
    }

    #[test]
    fn cyclotomic_examples() {
        let c = cyclotomic_pps(11, 7).unwrap();
        assert_eq!(c.set.len(), 15);
        assert!(cyclotomic_pps(23, 7).is_ok());
        assert!(cyclotomic_pps(7, 11).is_err());
    }

    #[test]
    fn union_examples() {
        let sp = aps_with_params(23, 1, 5).unwrap().set;
        let c = union_pps_pq(23, 7, &sp, &aps72()).unwrap();
        assert_eq!(c.set.len(), 39);
        assert_eq!(
            c.spec,
            PpsSpec::new(161, [0, 7, 154, 46, 115], [0, 35, 126, 23, 138]).unwrap()
        );
        let sp = silver_aps(31).unwrap().0.set;
        assert!(union_pps_pq(31, 7, &sp, &aps72()).is_ok());
        assert!(union_pps_pq(23, 3, &sp, &aps72()).is_err());
    }

    #[test]
    fn silver_square_examples() {
        let (c, _) = silver_pps_p2(7, 1, mod_sqrt(2, 49).unwrap().unwrap()).unwrap();
        assert_eq!(c.set.len(), 11);
        assert!(c.spec.a1().contains(&7) && c.spec.a1().contains(&48));
        let r = mod_sqrt(2, 529).unwrap().unwrap();
        let (c, _) = silver_pps_p2(23, 1, r).unwrap();
        assert_eq!(c.set.len(), 131);
        assert!(silver_pps_p2(7, 1, 1).is_err());
        let r7 = mod_sqrt(2, 49).unwrap().unwrap();
        let (c, _) = silver_pps_p2(7, 3, mul_mod(3, 49 - r7, 49)).unwrap();
        assert!(c.spec.a1().contains(&21));
    }

    #[test]
    fn find_aps_small_orders() {
        let b = ExhaustiveBudget::default();
        for v in [7, 23, 27, 31, 35, 39] {
            let c = find_aps(v, b).unwrap();
            assert!(verify_pps(&c.set, &c.spec).valid, "v={v}");
        }
        assert!(matches!(find_aps(11, b), Err(Error::NoAps(11))));
    }
}
