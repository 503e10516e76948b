//! Partial partitionable sets over Z_v.
//!
//! A PPS(Z_v, A1, A2) is a family of `(v − |A1|)/4` unordered pairs `{x, y}`
//! such that the `±{x, y}` cover `Z_v ∖ A1` exactly once and the
//! `±{x − y, x + y}` cover `Z_v ∖ A2` exactly once. A PS(v) is the case
//! `A1 = A2 = {0}` and an APS(v, α, β) the case `A1 = {0, ±α}`,
//! `A2 = {0, ±β}`.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::{add_mod, factorize, gcd, mul_mod, neg_mod, reduce_signed, sub_mod};
use crate::parallel;

/// A modulus and a list of pairs of residues.
///
/// Pairs keep the orientation they were given in. Verification treats them
/// literally; [`PairSet::normalized`] and [`PairSet::class_form`] give the
/// canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPairSet", into = "RawPairSet")]
pub struct PairSet {
    v: u64,
    pairs: Vec<(u64, u64)>,
}

/// The JSON shape of a pair set: `{"v": 13, "pairs": [[1, 5], [2, 3]]}`.
/// Negative entries are reduced modulo `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPairSet {
    pub v: u64,
    pub pairs: Vec<[i64; 2]>,
}

impl TryFrom<RawPairSet> for PairSet {
    type Error = Error;

    fn try_from(raw: RawPairSet) -> Result<Self> {
        PairSet::from_signed(raw.v, raw.pairs.iter().map(|p| (p[0], p[1])))
    }
}

impl From<PairSet> for RawPairSet {
    fn from(s: PairSet) -> Self {
        RawPairSet {
            v: s.v,
            pairs: s.pairs.iter().map(|&(x, y)| [x as i64, y as i64]).collect(),
        }
    }
}

impl RawPairSet {
    /// Converts without rejecting degenerate pairs, for diagnostics.
    pub fn into_unchecked(self) -> Result<PairSet> {
        if self.v == 0 {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        let v = self.v;
        Ok(PairSet::from_raw(
            v,
            self.pairs
                .iter()
                .map(|p| (reduce_signed(p[0], v), reduce_signed(p[1], v))),
        ))
    }
}

impl PairSet {
    /// Builds a pair set, rejecting out-of-range residues and pairs with
    /// `x ≡ ±y`.
    pub fn new(v: u64, pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        if v == 0 {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        let pairs: Vec<(u64, u64)> = pairs.into_iter().collect();
        for &(x, y) in &pairs {
            for z in [x, y] {
                if z >= v {
                    return Err(Error::OutOfRange {
                        value: z,
                        modulus: v,
                    });
                }
            }
            if x == y || x == neg_mod(y, v) {
                return Err(Error::DegeneratePair { x, y, v });
            }
        }
        Ok(PairSet { v, pairs })
    }

    /// Like [`PairSet::new`] but reduces signed representatives first.
    pub fn from_signed(v: u64, pairs: impl IntoIterator<Item = (i64, i64)>) -> Result<Self> {
        if v == 0 {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        Self::new(
            v,
            pairs
                .into_iter()
                .map(|(x, y)| (reduce_signed(x, v), reduce_signed(y, v))),
        )
    }

    /// Reduces entries modulo `v` and accepts anything, degenerate pairs
    /// included. Only meant for feeding the verifier.
    pub fn from_raw(v: u64, pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        PairSet {
            v,
            pairs: pairs.into_iter().map(|(x, y)| (x % v, y % v)).collect(),
        }
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Each pair sorted, then the list sorted.
    pub fn normalized(&self) -> PairSet {
        let mut pairs: Vec<_> = self
            .pairs
            .iter()
            .map(|&(x, y)| (x.min(y), x.max(y)))
            .collect();
        pairs.sort_unstable();
        PairSet { v: self.v, pairs }
    }

    /// Canonical form up to the sign changes `{x, y} ↦ {±x, ±y}`, which
    /// leave both covers unchanged: every entry replaced by `min(z, v − z)`,
    /// then normalized.
    pub fn class_form(&self) -> PairSet {
        let c = |z: u64| z.min(neg_mod(z, self.v));
        PairSet {
            v: self.v,
            pairs: self.pairs.iter().map(|&(x, y)| (c(x), c(y))).collect(),
        }
        .normalized()
    }

    pub fn negated(&self) -> PairSet {
        let v = self.v;
        PairSet {
            v,
            pairs: self
                .pairs
                .iter()
                .map(|&(x, y)| (neg_mod(x, v), neg_mod(y, v)))
                .collect(),
        }
    }

    /// Every pair `{x, y}` replaced by `{λx, λy}`.
    pub fn scaled(&self, lambda: u64) -> Result<PairSet> {
        let v = self.v;
        if gcd(lambda % v, v) != 1 {
            return Err(Error::NotAUnit {
                x: lambda % v,
                modulus: v,
            });
        }
        Ok(PairSet {
            v,
            pairs: self
                .pairs
                .iter()
                .map(|&(x, y)| (mul_mod(x, lambda, v), mul_mod(y, lambda, v)))
                .collect(),
        })
    }

    /// Maps the pairs into `Z_{new_v}` by `x ↦ d·x`. Requires `d · v = new_v`.
    pub fn embedded(&self, d: u64, new_v: u64) -> Result<PairSet> {
        if d.checked_mul(self.v) != Some(new_v) {
            return Err(Error::Precondition(format!(
                "cannot embed Z_{} into Z_{new_v} by multiplication with {d}",
                self.v
            )));
        }
        Ok(PairSet {
            v: new_v,
            pairs: self.pairs.iter().map(|&(x, y)| (x * d, y * d)).collect(),
        })
    }

    /// Concatenates the pair lists of sets over the same modulus.
    pub fn union<'a>(v: u64, parts: impl IntoIterator<Item = &'a PairSet>) -> Result<PairSet> {
        let mut pairs = Vec::new();
        for p in parts {
            if p.v != v {
                return Err(Error::Precondition(format!(
                    "cannot join a set over Z_{} into Z_{v}",
                    p.v
                )));
            }
            pairs.extend_from_slice(&p.pairs);
        }
        Ok(PairSet { v, pairs })
    }

    /// The `±{x, y}` multiset as a count vector of length `v`.
    pub fn element_counts(&self) -> Vec<u32> {
        let v = self.v;
        let mut counts = vec![0u32; v as usize];
        for &(x, y) in &self.pairs {
            for z in [x, neg_mod(x, v), y, neg_mod(y, v)] {
                counts[z as usize] += 1;
            }
        }
        counts
    }

    /// The `±{x − y, x + y}` multiset as a count vector of length `v`.
    pub fn difference_counts(&self) -> Vec<u32> {
        let v = self.v;
        let mut counts = vec![0u32; v as usize];
        for &(x, y) in &self.pairs {
            let d = sub_mod(x, y, v);
            let s = add_mod(x, y, v);
            for z in [d, neg_mod(d, v), s, neg_mod(s, v)] {
                counts[z as usize] += 1;
            }
        }
        counts
    }
}

/// The excluded sets `A1` (elements) and `A2` (sums and differences).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PpsSpec {
    v: u64,
    a1: BTreeSet<u64>,
    a2: BTreeSet<u64>,
}

impl PpsSpec {
    /// Checks `|A1| = |A2|`, `0 ∈ A1 ∩ A2`, closure under negation, and
    /// `v − |A1| ≡ 0 (mod 4)`.
    pub fn new(
        v: u64,
        a1: impl IntoIterator<Item = u64>,
        a2: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        if v == 0 || v % 2 == 0 {
            return Err(Error::InvalidSpec(format!("modulus {v} must be odd")));
        }
        let a1: BTreeSet<u64> = a1.into_iter().map(|a| a % v).collect();
        let a2: BTreeSet<u64> = a2.into_iter().map(|a| a % v).collect();
        if a1.len() != a2.len() {
            return Err(Error::InvalidSpec(format!(
                "|A1| = {} differs from |A2| = {}",
                a1.len(),
                a2.len()
            )));
        }
        for (name, set) in [("A1", &a1), ("A2", &a2)] {
            if !set.contains(&0) {
                return Err(Error::InvalidSpec(format!("{name} must contain 0")));
            }
            if let Some(a) = set.iter().find(|&&a| !set.contains(&neg_mod(a, v))) {
                return Err(Error::InvalidSpec(format!(
                    "{name} is not closed under negation ({a})"
                )));
            }
        }
        if (v - a1.len() as u64) % 4 != 0 {
            return Err(Error::InvalidSpec(format!(
                "v − |A1| = {} is not divisible by 4",
                v - a1.len() as u64
            )));
        }
        Ok(PpsSpec { v, a1, a2 })
    }

    /// PS(v): `A1 = A2 = {0}`.
    pub fn ps(v: u64) -> Result<Self> {
        Self::new(v, [0], [0])
    }

    /// APS(v, α, β): `A1 = {0, ±α}`, `A2 = {0, ±β}`.
    pub fn aps(v: u64, alpha: u64, beta: u64) -> Result<Self> {
        if v == 0 || alpha % v == 0 || beta % v == 0 {
            return Err(Error::InvalidSpec("α and β must be nonzero".into()));
        }
        Self::new(
            v,
            [0, alpha, neg_mod(alpha, v)],
            [0, beta, neg_mod(beta, v)],
        )
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn a1(&self) -> &BTreeSet<u64> {
        &self.a1
    }

    pub fn a2(&self) -> &BTreeSet<u64> {
        &self.a2
    }

    /// Number of pairs a PPS for this spec has.
    pub fn pair_count(&self) -> usize {
        ((self.v - self.a1.len() as u64) / 4) as usize
    }

    /// The spec with both excluded sets multiplied by the unit `λ`.
    pub fn scaled(&self, lambda: u64) -> Result<PpsSpec> {
        let v = self.v;
        if gcd(lambda % v, v) != 1 {
            return Err(Error::NotAUnit {
                x: lambda % v,
                modulus: v,
            });
        }
        Ok(PpsSpec {
            v,
            a1: self.a1.iter().map(|&a| mul_mod(a, lambda, v)).collect(),
            a2: self.a2.iter().map(|&a| mul_mod(a, lambda, v)).collect(),
        })
    }

    pub fn label(&self) -> Classification {
        classify(self.v, &self.a1, &self.a2)
    }
}

/// JSON forms of a spec: explicit sets, or the `PS` / `APS` shorthands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecJson {
    Explicit {
        v: u64,
        #[serde(rename = "A1")]
        a1: Vec<i64>,
        #[serde(rename = "A2")]
        a2: Vec<i64>,
    },
    Shorthand {
        #[serde(rename = "type")]
        kind: String,
        #[serde(default)]
        v: Option<u64>,
        #[serde(default)]
        alpha: Option<i64>,
        #[serde(default)]
        beta: Option<i64>,
    },
}

impl SpecJson {
    /// Resolves against a modulus (used by the shorthands that omit `v`).
    pub fn resolve(&self, v: u64) -> Result<PpsSpec> {
        match self {
            SpecJson::Explicit { v: sv, a1, a2 } => {
                if *sv != v {
                    return Err(Error::InvalidSpec(format!(
                        "spec modulus {sv} but set modulus {v}"
                    )));
                }
                PpsSpec::new(
                    v,
                    a1.iter().map(|&a| reduce_signed(a, v)),
                    a2.iter().map(|&a| reduce_signed(a, v)),
                )
            }
            SpecJson::Shorthand {
                kind,
                v: sv,
                alpha,
                beta,
            } => {
                if let Some(sv) = sv {
                    if *sv != v {
                        return Err(Error::InvalidSpec(format!(
                            "spec modulus {sv} but set modulus {v}"
                        )));
                    }
                }
                match kind.to_ascii_uppercase().as_str() {
                    "PS" => PpsSpec::ps(v),
                    "APS" => {
                        let (Some(a), Some(b)) = (alpha, beta) else {
                            return Err(Error::InvalidSpec("APS needs alpha and beta".into()));
                        };
                        PpsSpec::aps(v, reduce_signed(*a, v), reduce_signed(*b, v))
                    }
                    other => Err(Error::InvalidSpec(format!("unknown spec type {other:?}"))),
                }
            }
        }
    }
}

impl From<&PpsSpec> for SpecJson {
    fn from(s: &PpsSpec) -> Self {
        SpecJson::Explicit {
            v: s.v,
            a1: s.a1.iter().map(|&a| a as i64).collect(),
            a2: s.a2.iter().map(|&a| a as i64).collect(),
        }
    }
}

/// Diagnostics from [`verify_pps`]. A residue is *repeated* when it is
/// covered more often than allowed: twice or more outside the excluded set,
/// or at all inside it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub valid: bool,
    pub cover1_missing: Vec<u64>,
    pub cover1_repeated: Vec<u64>,
    pub cover2_missing: Vec<u64>,
    pub cover2_repeated: Vec<u64>,
}

fn cover_diagnostics(counts: &[u32], excluded: &BTreeSet<u64>) -> (Vec<u64>, Vec<u64>) {
    let mut missing = Vec::new();
    let mut repeated = Vec::new();
    for (z, &c) in counts.iter().enumerate() {
        let z = z as u64;
        let allowed = if excluded.contains(&z) { 0 } else { 1 };
        if c < allowed {
            missing.push(z);
        } else if c > allowed {
            repeated.push(z);
        }
    }
    (missing, repeated)
}

/// Checks both cover conditions literally.
pub fn verify_pps(set: &PairSet, spec: &PpsSpec) -> VerifyReport {
    let (c1, c2) = if set.v == spec.v {
        (set.element_counts(), set.difference_counts())
    } else {
        // Nothing of a set over another modulus counts.
        (vec![0; spec.v as usize], vec![0; spec.v as usize])
    };
    let (cover1_missing, cover1_repeated) = cover_diagnostics(&c1, &spec.a1);
    let (cover2_missing, cover2_repeated) = cover_diagnostics(&c2, &spec.a2);
    let valid = cover1_missing.is_empty()
        && cover1_repeated.is_empty()
        && cover2_missing.is_empty()
        && cover2_repeated.is_empty();
    VerifyReport {
        valid,
        cover1_missing,
        cover1_repeated,
        cover2_missing,
        cover2_repeated,
    }
}

/// What kind of object a pair set is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Classification {
    #[serde(rename = "PS")]
    Ps,
    /// `alpha` and `beta` are the representatives in `[1, v/2]`.
    #[serde(rename = "APS")]
    Aps { alpha: u64, beta: u64 },
    #[serde(rename = "PPS")]
    Pps { a1: Vec<u64>, a2: Vec<u64> },
    #[serde(rename = "invalid")]
    Invalid,
}

fn classify(v: u64, a1: &BTreeSet<u64>, a2: &BTreeSet<u64>) -> Classification {
    let single = |s: &BTreeSet<u64>| -> Option<u64> {
        if s.len() == 3 && s.contains(&0) {
            let c = *s.iter().find(|&&a| a != 0)?;
            Some(c.min(neg_mod(c, v)))
        } else {
            None
        }
    };
    let zero_only = |s: &BTreeSet<u64>| s.len() == 1 && s.contains(&0);
    if zero_only(a1) && zero_only(a2) {
        Classification::Ps
    } else if let (Some(alpha), Some(beta)) = (single(a1), single(a2)) {
        Classification::Aps { alpha, beta }
    } else {
        Classification::Pps {
            a1: a1.iter().copied().collect(),
            a2: a2.iter().copied().collect(),
        }
    }
}

/// Reads off the excluded sets from the two covers.
pub fn infer_params(set: &PairSet) -> Classification {
    let c1 = set.element_counts();
    let c2 = set.difference_counts();
    if c1.iter().chain(&c2).any(|&c| c > 1) {
        return Classification::Invalid;
    }
    let holes = |c: &[u32]| -> BTreeSet<u64> {
        c.iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .map(|(z, _)| z as u64)
            .collect()
    };
    classify(set.v, &holes(&c1), &holes(&c2))
}

/// The value `2α² − β²` must take modulo `v` for an APS(v, α, β) to exist:
/// `v/3` when `v ≡ 3 (mod 12)` and `0` when `v ≡ 7, 11 (mod 12)`.
pub fn aps_target(v: u64) -> Result<u64> {
    if v % 4 != 3 {
        return Err(Error::Precondition(format!("{v} is not 3 mod 4")));
    }
    Ok(if v % 12 == 3 { v / 3 } else { 0 })
}

fn two_a2_minus_b2(v: u64, alpha: u64, beta: u64) -> u64 {
    sub_mod(
        mul_mod(2, mul_mod(alpha, alpha, v), v),
        mul_mod(beta, beta, v),
        v,
    )
}

/// The sum-of-squares necessary condition for an APS(v, α, β).
pub fn aps_necessary(v: u64, alpha: u64, beta: u64) -> Result<bool> {
    let target = aps_target(v)?;
    Ok(two_a2_minus_b2(v, alpha % v, beta % v) == target)
}

/// Why no PS or APS of a given order can exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonexistenceCase {
    /// `v ≡ 3 (mod 12)` and the power of 3 dividing `v` is even.
    EvenPowerOfThree,
    /// `v ≡ 15 (mod 36)` and `v = 3·p1⋯ps` with distinct primes `pi ≡ ±3 (mod 8)`.
    ThreeTimesNonResiduePrimes,
    /// `v ≡ 7, 11 (mod 12)` and `v = p1⋯pt` with distinct primes `pi ≡ ±3 (mod 8)`.
    NonResiduePrimes,
    /// `v ≡ 9 (mod 12)`: no PS(v).
    NoPartitionableSet,
}

fn squarefree_pm3_mod8(n: u64) -> bool {
    factorize(n)
        .iter()
        .all(|&(p, e)| e == 1 && (p % 8 == 3 || p % 8 == 5))
}

/// The nonexistence argument that rules out every PS(v) or APS(v, α, β), if
/// one applies.
pub fn nonexistence_case(v: u64) -> Result<Option<NonexistenceCase>> {
    if v % 2 == 0 {
        return Err(Error::Precondition(format!("{v} is even")));
    }
    if v % 4 == 1 {
        return Ok((v % 12 == 9).then_some(NonexistenceCase::NoPartitionableSet));
    }
    if v % 12 == 3 {
        let mut three_adic = 0;
        let mut rest = v;
        while rest % 3 == 0 {
            rest /= 3;
            three_adic += 1;
        }
        if three_adic % 2 == 0 {
            return Ok(Some(NonexistenceCase::EvenPowerOfThree));
        }
        if v % 36 == 15 && three_adic == 1 && squarefree_pm3_mod8(rest) {
            return Ok(Some(NonexistenceCase::ThreeTimesNonResiduePrimes));
        }
        return Ok(None);
    }
    if squarefree_pm3_mod8(v) {
        return Ok(Some(NonexistenceCase::NonResiduePrimes));
    }
    Ok(None)
}

/// Upper limit for [`admissible_params`]'s full scan.
pub const ADMISSIBLE_SCAN_CUTOFF: u64 = 100_000;

/// All nonzero `(α, β)` satisfying [`aps_necessary`], sorted.
pub fn admissible_params(v: u64) -> Result<Vec<(u64, u64)>> {
    let target = aps_target(v)?;
    if v > ADMISSIBLE_SCAN_CUTOFF {
        return Err(Error::ScanCutoff {
            v,
            cutoff: ADMISSIBLE_SCAN_CUTOFF,
        });
    }
    // (β² mod v, β) sorted by square, so each α needs one range lookup.
    let mut squares: Vec<(u64, u64)> = (1..v).map(|b| (mul_mod(b, b, v), b)).collect();
    squares.sort_unstable();
    let alphas: Vec<u64> = (1..v).collect();
    let per_alpha = parallel::map(&alphas, |&a| {
        let want = sub_mod(mul_mod(2, mul_mod(a, a, v), v), target, v);
        let lo = squares.partition_point(|&(s, _)| s < want);
        let hi = squares.partition_point(|&(s, _)| s <= want);
        let mut betas: Vec<(u64, u64)> = squares[lo..hi].iter().map(|&(_, b)| (a, b)).collect();
        betas.sort_unstable();
        betas
    });
    Ok(per_alpha.into_iter().flatten().collect())
}

/// One admissible `(α, β)` found prime power by prime power and glued with
/// the CRT. Works well past [`ADMISSIBLE_SCAN_CUTOFF`] as long as every prime
/// power dividing `v` is small.
pub fn admissible_witness(v: u64) -> Result<Option<(u64, u64)>> {
    use crate::modarith::{crt_lift, Residue};

    let target = aps_target(v)?;
    // For each prime power: a solution with both coordinates nonzero, one
    // with α nonzero, one with β nonzero, and any solution at all.
    struct Local {
        modulus: u64,
        both: Option<(u64, u64)>,
        alpha: Option<(u64, u64)>,
        beta: Option<(u64, u64)>,
        any: Option<(u64, u64)>,
    }
    let mut locals = Vec::new();
    for (p, e) in factorize(v) {
        let q = p.pow(e);
        let t = target % q;
        let mut root_of = vec![None::<(u64, u64)>; q as usize]; // (some root, a nonzero root)
        for b in (0..q).rev() {
            let s = mul_mod(b, b, q) as usize;
            let entry = root_of[s].get_or_insert((b, 0));
            entry.0 = b;
            if b != 0 {
                entry.1 = b;
            }
        }
        let mut local = Local {
            modulus: q,
            both: None,
            alpha: None,
            beta: None,
            any: None,
        };
        for a in 0..q {
            let want = sub_mod(mul_mod(2, mul_mod(a, a, q), q), t, q);
            let Some((b0, b_nz)) = root_of[want as usize] else {
                continue;
            };
            local.any.get_or_insert((a, b0));
            if b_nz != 0 {
                local.beta.get_or_insert((a, b_nz));
            }
            if a != 0 {
                local.alpha.get_or_insert((a, b0));
                if b_nz != 0 {
                    local.both.get_or_insert((a, b_nz));
                }
            }
        }
        if local.any.is_none() {
            return Ok(None);
        }
        locals.push(local);
    }
    let n = locals.len();
    let mut choice: Option<Vec<(u64, u64)>> = None;
    if let Some(i) = locals.iter().position(|l| l.both.is_some()) {
        choice = Some(
            (0..n)
                .map(|j| {
                    if j == i {
                        locals[j].both
                    } else {
                        locals[j].any
                    }
                    .unwrap()
                })
                .collect(),
        );
    } else {
        'outer: for i in 0..n {
            for j in 0..n {
                if i != j && locals[i].alpha.is_some() && locals[j].beta.is_some() {
                    choice = Some(
                        (0..n)
                            .map(|k| {
                                if k == i {
                                    locals[k].alpha
                                } else if k == j {
                                    locals[k].beta
                                } else {
                                    locals[k].any
                                }
                                .unwrap()
                            })
                            .collect(),
                    );
                    break 'outer;
                }
            }
        }
    }
    let Some(choice) = choice else {
        return Ok(None);
    };
    let lift = |coord: fn(&(u64, u64)) -> u64| -> Result<u64> {
        let rs: Vec<Residue> = locals
            .iter()
            .zip(&choice)
            .map(|(l, c)| Residue::from_u64(coord(c), l.modulus))
            .collect();
        Ok(crt_lift(&rs)?.value)
    };
    Ok(Some((lift(|c| c.0)?, lift(|c| c.1)?)))
}

/// Multiplies every pair by the unit `λ`.
pub fn scale_set(set: &PairSet, lambda: u64) -> Result<PairSet> {
    set.scaled(lambda)
}

/// Size limits for [`exhaustive_search`]. An instance is accepted when it
/// has at most `max_pairs` pairs or `v ≤ max_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveBudget {
    pub max_pairs: usize,
    pub max_v: u64,
    /// Abort after visiting this many search nodes.
    pub max_nodes: u64,
}

impl Default for ExhaustiveBudget {
    fn default() -> Self {
        ExhaustiveBudget {
            max_pairs: 6,
            max_v: 40,
            max_nodes: 2_000_000_000,
        }
    }
}

struct ClassSearch<'a> {
    v: u64,
    /// Element classes that must be covered.
    need_elem: Vec<bool>,
    /// Difference classes that must be covered.
    need_diff: Vec<bool>,
    nodes: &'a AtomicU64,
    max_nodes: u64,
}

impl ClassSearch<'_> {
    fn class(&self, z: u64) -> usize {
        z.min(self.v - z) as usize
    }

    fn diff_classes(&self, z: usize, w: usize) -> (usize, usize) {
        let (z, w) = (z as u64, w as u64);
        (
            self.class(sub_mod(w, z, self.v)),
            self.class(add_mod(z, w, self.v)),
        )
    }

    /// Candidate partners of the smallest open element class `z`.
    fn options(&self, used_e: &[bool], used_d: &[bool], z: usize) -> Vec<(usize, usize, usize)> {
        (z + 1..used_e.len())
            .filter(|&w| self.need_elem[w] && !used_e[w])
            .filter_map(|w| {
                let (d1, d2) = self.diff_classes(z, w);
                (self.need_diff[d1] && self.need_diff[d2] && !used_d[d1] && !used_d[d2])
                    .then_some((w, d1, d2))
            })
            .collect()
    }

    fn first_open(&self, used_e: &[bool]) -> Option<usize> {
        (1..used_e.len()).find(|&c| self.need_elem[c] && !used_e[c])
    }

    fn dfs(
        &self,
        used_e: &mut [bool],
        used_d: &mut [bool],
        chosen: &mut Vec<(u64, u64)>,
    ) -> Result<bool> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.max_nodes {
            return Err(Error::BudgetExceeded);
        }
        let Some(z) = self.first_open(used_e) else {
            return Ok(true);
        };
        for (w, d1, d2) in self.options(used_e, used_d, z) {
            used_e[z] = true;
            used_e[w] = true;
            used_d[d1] = true;
            used_d[d2] = true;
            chosen.push((z as u64, w as u64));
            if self.dfs(used_e, used_d, chosen)? {
                return Ok(true);
            }
            chosen.pop();
            used_e[z] = false;
            used_e[w] = false;
            used_d[d1] = false;
            used_d[d2] = false;
        }
        Ok(false)
    }
}

/// Backtracking search for a PPS, used as an independent oracle.
///
/// The search runs over `±` classes: a pair is determined up to the sign
/// changes `{±x, ±y}` by the classes of `x` and `y`, and is emitted as
/// `{x, y}` with `1 ≤ x < y ≤ (v−1)/2`. The smallest open element class is
/// always paired first, so the result is the lexicographically first
/// solution under that order, with or without the `parallel` feature.
pub fn exhaustive_search(spec: &PpsSpec, budget: ExhaustiveBudget) -> Result<Option<PairSet>> {
    let v = spec.v;
    if spec.pair_count() > budget.max_pairs && v > budget.max_v {
        return Err(Error::BudgetExceeded);
    }
    let half = ((v - 1) / 2) as usize;
    let class = |z: u64| z.min(neg_mod(z, v)) as usize;
    let mut need_elem = vec![true; half + 1];
    let mut need_diff = vec![true; half + 1];
    need_elem[0] = false;
    need_diff[0] = false;
    for &a in &spec.a1 {
        need_elem[class(a)] = false;
    }
    for &a in &spec.a2 {
        need_diff[class(a)] = false;
    }
    let nodes = AtomicU64::new(0);
    let search = ClassSearch {
        v,
        need_elem,
        need_diff,
        nodes: &nodes,
        max_nodes: budget.max_nodes,
    };
    let used_e = vec![false; half + 1];
    let used_d = vec![false; half + 1];
    let Some(z) = search.first_open(&used_e) else {
        return Ok(Some(PairSet {
            v,
            pairs: Vec::new(),
        }));
    };
    let branches = search.options(&used_e, &used_d, z);
    let found = parallel::find_map_first(&branches, |&(w, d1, d2)| {
        let mut ue = used_e.clone();
        let mut ud = used_d.clone();
        ue[z] = true;
        ue[w] = true;
        ud[d1] = true;
        ud[d2] = true;
        let mut chosen = vec![(z as u64, w as u64)];
        match search.dfs(&mut ue, &mut ud, &mut chosen) {
            Ok(true) => Some(Ok(chosen)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    });
    match found {
        Some(Ok(pairs)) => Ok(Some(PairSet { v, pairs })),
        Some(Err(e)) => Err(e),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: u64, pairs: &[(i64, i64)]) -> PairSet {
        PairSet::from_signed(v, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn verify_examples() {
        let s = set(27, &[(1, 4), (2, 12), (5, 13), (6, 10), (7, 8), (9, 11)]);
        assert!(verify_pps(&s, &PpsSpec::aps(27, 3, 6).unwrap()).valid);
        let s = set(13, &[(1, 5), (2, 3), (4, 6)]);
        assert!(verify_pps(&s, &PpsSpec::ps(13).unwrap()).valid);
        let s = set(7, &[(1, 4)]);
        assert!(verify_pps(&s, &PpsSpec::aps(7, 2, 1).unwrap()).valid);
    }

    #[test]
    fn degenerate_pair_is_reported() {
        assert!(matches!(
            PairSet::new(7, [(1, 6)]),
            Err(Error::DegeneratePair { .. })
        ));
        let s = PairSet::from_raw(7, [(1, 6)]);
        for (a, b) in [(1, 1), (2, 1), (3, 2)] {
            let r = verify_pps(&s, &PpsSpec::aps(7, a, b).unwrap());
            assert!(!r.valid);
            assert!(!r.cover1_repeated.is_empty());
        }
        assert_eq!(infer_params(&s), Classification::Invalid);
    }

    #[test]
    fn wrong_modulus_is_invalid() {
        let s = set(13, &[(1, 5), (2, 3), (4, 6)]);
        let r = verify_pps(&s, &PpsSpec::ps(17).unwrap());
        assert!(!r.valid);
        assert_eq!(r.cover1_missing.len(), 16);
    }

    #[test]
    fn infer_examples() {
        assert_eq!(
            infer_params(&set(7, &[(1, 4)])),
            Classification::Aps { alpha: 2, beta: 1 }
        );
        assert_eq!(infer_params(&set(5, &[(1, 2)])), Classification::Ps);
        let s = set(27, &[(1, 4), (2, 12), (5, 13), (6, 10), (7, 8), (9, 11)]);
        assert_eq!(infer_params(&s), Classification::Aps { alpha: 3, beta: 6 });
    }

    #[test]
    fn necessary_condition_examples() {
        assert!(aps_necessary(27, 3, 6).unwrap());
        assert!(aps_necessary(7, 2, 1).unwrap());
        assert!(!aps_necessary(7, 1, 1).unwrap());
        assert!(aps_necessary(13, 1, 1).is_err());
    }

    #[test]
    fn nonexistence_examples() {
        use NonexistenceCase::*;
        assert_eq!(nonexistence_case(63).unwrap(), Some(EvenPowerOfThree));
        assert_eq!(
            nonexistence_case(15).unwrap(),
            Some(ThreeTimesNonResiduePrimes)
        );
        assert_eq!(nonexistence_case(11).unwrap(), Some(NonResiduePrimes));
        assert_eq!(nonexistence_case(27).unwrap(), None);
        assert_eq!(nonexistence_case(21).unwrap(), Some(NoPartitionableSet));
        assert_eq!(nonexistence_case(13).unwrap(), None);
        assert!(nonexistence_case(12).is_err());
    }

    #[test]
    fn nonexistence_lists_below_300() {
        let by_case = |case| -> Vec<u64> {
            (7..300)
                .step_by(4)
                .filter(|&v| nonexistence_case(v).unwrap() == Some(case))
                .collect()
        };
        assert_eq!(
            by_case(NonexistenceCase::EvenPowerOfThree),
            vec![63, 99, 171, 207, 279]
        );
        assert_eq!(
            by_case(NonexistenceCase::ThreeTimesNonResiduePrimes),
            vec![15, 87, 159, 195]
        );
        assert_eq!(
            by_case(NonexistenceCase::NonResiduePrimes),
            vec![
                11, 19, 43, 55, 59, 67, 83, 95, 107, 131, 139, 143, 163, 179, 211, 215, 227, 247,
                251, 283, 295
            ]
        );
        let open: Vec<u64> = (7..300)
            .step_by(4)
            .filter(|&v| nonexistence_case(v).unwrap().is_none())
            .collect();
        assert_eq!(
            open,
            vec![
                7, 23, 27, 31, 35, 39, 47, 51, 71, 75, 79, 91, 103, 111, 115, 119, 123, 127, 135,
                147, 151, 155, 167, 175, 183, 187, 191, 199, 203, 219, 223, 231, 235, 239, 243,
                255, 259, 263, 267, 271, 275, 287, 291, 299
            ]
        );
    }

    #[test]
    fn admissible_examples() {
        let p7 = admissible_params(7).unwrap();
        for ab in [(2, 1), (1, 3), (1, 4)] {
            assert!(p7.contains(&ab));
        }
        assert!(admissible_params(11).unwrap().is_empty());
        let p27 = admissible_params(27).unwrap();
        assert!(p27.contains(&(3, 6)) && p27.contains(&(3, 3)));
        assert!(admissible_params(13).is_err());
        assert!(matches!(
            admissible_params(100_003),
            Err(Error::ScanCutoff { .. })
        ));
    }

    #[test]
    fn admissible_scan_matches_brute_force() {
        for v in (7..200u64).step_by(4) {
            let mut brute = Vec::new();
            for a in 1..v {
                for b in 1..v {
                    if aps_necessary(v, a, b).unwrap() {
                        brute.push((a, b));
                    }
                }
            }
            assert_eq!(admissible_params(v).unwrap(), brute, "v={v}");
        }
    }

    #[test]
    fn admissible_empty_iff_nonexistence() {
        for v in (7..1000u64).step_by(4) {
            let empty = admissible_params(v).unwrap().is_empty();
            let excluded = nonexistence_case(v).unwrap().is_some();
            assert_eq!(empty, excluded, "v={v}");
            let w = admissible_witness(v).unwrap();
            assert_eq!(w.is_none(), empty, "v={v}");
            if let Some((a, b)) = w {
                assert!(a != 0 && b != 0 && aps_necessary(v, a, b).unwrap(), "v={v}");
            }
        }
    }

    #[test]
    fn witness_beyond_scan_cutoff() {
        // 7 ≡ 7 (mod 8) makes 2 a square there.
        let v = 7 * 23 * 1019;
        assert_eq!(v % 4, 3);
        let (a, b) = admissible_witness(v).unwrap().unwrap();
        assert!(aps_necessary(v, a, b).unwrap());
    }

    #[test]
    fn scale_examples() {
        let s = set(7, &[(1, 4)]);
        assert_eq!(s.scaled(3).unwrap().pairs(), &[(3, 5)]);
        assert_eq!(s.scaled(1).unwrap(), s);
        let t = s.scaled(2).unwrap();
        assert!(verify_pps(&t, &PpsSpec::aps(7, 4, 2).unwrap()).valid);
        assert!(s.scaled(7).is_err());
    }

    #[test]
    fn spec_invariants() {
        assert!(PpsSpec::new(13, [0, 1], [0, 12]).is_err());
        assert!(PpsSpec::new(13, [0, 1, 12], [0, 2, 11]).is_err()); // 13 − 3 not divisible by 4
        assert!(PpsSpec::new(7, [1, 6, 2], [0, 1, 6]).is_err());
        assert!(PpsSpec::new(7, [0], [0, 1, 6]).is_err());
        assert_eq!(PpsSpec::aps(27, 3, 6).unwrap().pair_count(), 6);
    }

    #[test]
    fn exhaustive_examples() {
        let b = ExhaustiveBudget::default();
        let ps5 = exhaustive_search(&PpsSpec::ps(5).unwrap(), b)
            .unwrap()
            .unwrap();
        assert_eq!(ps5.pairs(), &[(1, 2)]);
        let spec = PpsSpec::aps(7, 2, 1).unwrap();
        let s = exhaustive_search(&spec, b).unwrap().unwrap();
        assert!(verify_pps(&s, &spec).valid);
        assert_eq!(s.pairs(), &[(1, 3)]);
        assert_eq!(s.class_form(), set(7, &[(1, 4)]).class_form());
        for a in 1..=5 {
            for bb in 1..=5 {
                let spec = PpsSpec::aps(11, a, bb).unwrap();
                assert!(exhaustive_search(&spec, b).unwrap().is_none());
            }
        }
    }

    #[test]
    fn exhaustive_respects_size_budget() {
        let spec = PpsSpec::ps(61).unwrap();
        assert!(matches!(
            exhaustive_search(&spec, ExhaustiveBudget::default()),
            Err(Error::BudgetExceeded)
        ));
        let tiny = ExhaustiveBudget {
            max_pairs: 100,
            max_v: 100,
            max_nodes: 3,
        };
        assert!(matches!(
            exhaustive_search(&spec, tiny),
            Err(Error::BudgetExceeded)
        ));
    }

    #[test]
    fn json_shapes() {
        let s: PairSet =
            serde_json::from_str(r#"{"v": 13, "pairs": [[1, 5], [2, -10], [4, 6]]}"#).unwrap();
        assert_eq!(s.pairs()[1], (2, 3));
        let spec: SpecJson =
            serde_json::from_str(r#"{"type": "APS", "alpha": 3, "beta": 6}"#).unwrap();
        assert_eq!(spec.resolve(27).unwrap(), PpsSpec::aps(27, 3, 6).unwrap());
        let spec: SpecJson = serde_json::from_str(r#"{"type": "PS"}"#).unwrap();
        assert_eq!(spec.resolve(13).unwrap(), PpsSpec::ps(13).unwrap());
        let spec: SpecJson =
            serde_json::from_str(r#"{"v": 7, "A1": [0, 2, -2], "A2": [0, 1, 6]}"#).unwrap();
        assert_eq!(spec.resolve(7).unwrap(), PpsSpec::aps(7, 2, 1).unwrap());
        assert!(serde_json::from_str::<PairSet>(r#"{"v": 7, "pairs": [[1, 6]]}"#).is_err());
    }
}
