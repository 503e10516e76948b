//! Optical orthogonal codes with index 1, built over `Z_m × Z_v ≅ Z_{mv}`
//! from pair sets, and strong difference families.

use serde::{Deserialize, Serialize};

use crate::construct::{silver_pps_p2, union_pps_pq};
use crate::error::{Error, Result};
use crate::modarith::{crt_lift, gcd, mod_sqrt, neg_mod, reduce_signed, sub_mod, Residue};
use crate::parallel;
use crate::pps::{infer_params, Classification, PairSet};

/// A `(n, k, 1)` code: `k`-subsets of `Z_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OoCode {
    pub n: u64,
    pub k: usize,
    pub codewords: Vec<Vec<u64>>,
}

impl OoCode {
    /// Adds `t` to every element of every codeword.
    pub fn translated(&self, t: u64) -> OoCode {
        OoCode {
            n: self.n,
            k: self.k,
            codewords: self
                .codewords
                .iter()
                .map(|c| c.iter().map(|&x| (x + t) % self.n).collect())
                .collect(),
        }
    }

    /// `⌊(n − 1) / (k(k − 1))⌋`, the most codewords an `(n, k, 1)` code can have.
    pub fn max_codewords(&self) -> u64 {
        let kk = (self.k * self.k.saturating_sub(1)) as u64;
        self.n.saturating_sub(1).checked_div(kk).unwrap_or(0)
    }
}

/// An element of `Z_m × Z_v` and its image in `Z_{mv}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixedElement {
    pub i: u64,
    pub x: u64,
    pub m: u64,
    pub v: u64,
    pub embedded: u64,
}

impl MixedElement {
    pub fn new(i: i64, x: i64, m: u64, v: u64) -> Result<Self> {
        if gcd(m, v) != 1 {
            return Err(Error::NotCoprime { a: m, b: v });
        }
        let (i, x) = (reduce_signed(i, m), reduce_signed(x, v));
        let embedded = crt_lift(&[Residue::from_u64(i, m), Residue::from_u64(x, v)])?.value;
        Ok(MixedElement {
            i,
            x,
            m,
            v,
            embedded,
        })
    }

    pub fn from_embedded(z: u64, m: u64, v: u64) -> Self {
        MixedElement {
            i: z % m,
            x: z % v,
            m,
            v,
            embedded: z % (m * v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct OocReport {
    /// Codewords are `k` distinct residues below `n`.
    pub well_formed: bool,
    pub differences_distinct: bool,
    pub repeated_differences: Vec<u64>,
    /// Residues that are no difference of any codeword (0 included).
    pub leave: Vec<u64>,
    pub is_maximum: bool,
    pub codewords: usize,
    pub max_codewords: u64,
}

fn well_formed(code: &OoCode) -> bool {
    code.n > 0
        && code.codewords.iter().all(|c| {
            let mut s = c.clone();
            s.sort_unstable();
            s.dedup();
            c.len() == code.k && s.len() == code.k && s.iter().all(|&x| x < code.n)
        })
}

pub fn verify_ooc(code: &OoCode) -> OocReport {
    let n = code.n;
    let ok = well_formed(code);
    if !ok {
        return OocReport {
            codewords: code.codewords.len(),
            ..Default::default()
        };
    }
    let counts = parallel::tally(&code.codewords, n as usize, |c, acc| {
        for &a in c {
            for &b in c {
                if a != b {
                    acc[sub_mod(a, b, n) as usize] += 1;
                }
            }
        }
    });
    let repeated: Vec<u64> = (0..n).filter(|&z| counts[z as usize] > 1).collect();
    let leave: Vec<u64> = (0..n).filter(|&z| counts[z as usize] == 0).collect();
    let distinct = repeated.is_empty();
    let kk = code.k * code.k.saturating_sub(1);
    OocReport {
        well_formed: true,
        differences_distinct: distinct,
        repeated_differences: repeated,
        is_maximum: distinct && leave.len() <= kk,
        leave,
        codewords: code.codewords.len(),
        max_codewords: code.max_codewords(),
    }
}

/// Verdict of [`is_maximal`]; `witness` is a codeword that could be added.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Maximality {
    pub maximal: bool,
    pub witness: Option<Vec<u64>>,
}

/// Largest leave [`is_maximal`] will search.
pub const MAXIMALITY_LEAVE_LIMIT: usize = 64;

/// Whether no `k`-subset can be added with all its differences in the leave.
///
/// Any such subset can be translated to contain 0, so the search picks the
/// other `k − 1` elements from the nonzero leave, keeping every difference
/// in the leave and all differences distinct.
pub fn is_maximal(code: &OoCode) -> Result<Maximality> {
    let report = verify_ooc(code);
    if !report.well_formed || !report.differences_distinct {
        return Err(Error::Precondition("not an optical orthogonal code".into()));
    }
    if report.leave.len() > MAXIMALITY_LEAVE_LIMIT {
        return Err(Error::BudgetExceeded);
    }
    let n = code.n;
    let k = code.k;
    let in_leave = {
        let mut v = vec![false; n as usize];
        for &z in &report.leave {
            v[z as usize] = true;
        }
        v[0] = false;
        v
    };
    if k < 2 {
        return Ok(Maximality {
            maximal: false,
            witness: Some(vec![0; k]),
        });
    }
    if report.leave.len() - 1 < k * (k - 1) {
        return Ok(Maximality {
            maximal: true,
            witness: None,
        });
    }
    let candidates: Vec<u64> = report
        .leave
        .iter()
        .copied()
        .filter(|&x| x != 0 && in_leave[neg_mod(x, n) as usize])
        .collect();
    let mut chosen = vec![0u64];
    let mut used = vec![false; n as usize];
    let found = extend(&candidates, 0, k, n, &in_leave, &mut chosen, &mut used);
    Ok(match found {
        true => Maximality {
            maximal: false,
            witness: Some(chosen),
        },
        false => Maximality {
            maximal: true,
            witness: None,
        },
    })
}

fn extend(
    cand: &[u64],
    from: usize,
    k: usize,
    n: u64,
    in_leave: &[bool],
    chosen: &mut Vec<u64>,
    used: &mut [bool],
) -> bool {
    if chosen.len() == k {
        return true;
    }
    for idx in from..cand.len() {
        let x = cand[idx];
        let mut new = Vec::with_capacity(2 * chosen.len());
        let mut ok = true;
        for &c in chosen.iter() {
            for d in [sub_mod(x, c, n), sub_mod(c, x, n)] {
                if !in_leave[d as usize] || used[d as usize] || new.contains(&d) {
                    ok = false;
                    break;
                }
                new.push(d);
            }
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        for &d in &new {
            used[d as usize] = true;
        }
        chosen.push(x);
        if extend(cand, idx + 1, k, n, in_leave, chosen, used) {
            return true;
        }
        chosen.pop();
        for &d in &new {
            used[d as usize] = false;
        }
    }
    false
}

/// A family of `k`-multisets over `Z_g` whose differences should cover every
/// element (0 included) exactly `μ` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sdf {
    pub g: u64,
    pub k: usize,
    pub mu: u32,
    pub base_blocks: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SdfReport {
    pub valid: bool,
    /// How often each residue occurs as a difference.
    pub counts: Vec<u32>,
}

pub fn verify_sdf(sdf: &Sdf) -> SdfReport {
    let g = sdf.g;
    if g == 0 {
        return SdfReport {
            valid: false,
            counts: Vec::new(),
        };
    }
    let mut counts = vec![0u32; g as usize];
    let mut shape_ok = true;
    for b in &sdf.base_blocks {
        shape_ok &= b.len() == sdf.k;
        let b: Vec<u64> = b.iter().map(|&x| reduce_signed(x, g)).collect();
        for (i, &x) in b.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if i != j {
                    counts[sub_mod(x, y, g) as usize] += 1;
                }
            }
        }
    }
    let valid = shape_ok && counts.iter().all(|&c| c == sdf.mu);
    SdfReport { valid, counts }
}

/// `[[1, 1, −1, −1]]` over `Z_3`, `μ = 4`.
pub fn sdf_z3() -> Sdf {
    Sdf {
        g: 3,
        k: 4,
        mu: 4,
        base_blocks: vec![vec![1, 1, -1, -1]],
    }
}

/// `[[0, 1, 1, −1, −1]]` over `Z_5`, `μ = 4`.
pub fn sdf_z5() -> Sdf {
    Sdf {
        g: 5,
        k: 5,
        mu: 4,
        base_blocks: vec![vec![0, 1, 1, -1, -1]],
    }
}

/// Nine blocks over `Z_45`, `μ = 4`.
pub fn sdf_z45() -> Sdf {
    let mut base_blocks = vec![vec![0, 1, 1, -1, -1]];
    base_blocks.extend(std::iter::repeat_n(vec![0, 3, 7, 13, 30], 4));
    base_blocks.extend(std::iter::repeat_n(vec![0, 5, 14, 26, 34], 4));
    Sdf {
        g: 45,
        k: 5,
        mu: 4,
        base_blocks,
    }
}

/// Each codeword reduced modulo `m`, as a sorted multiset.
pub fn first_coordinates(code: &OoCode, m: u64) -> Vec<Vec<u64>> {
    code.codewords
        .iter()
        .map(|c| {
            let mut b: Vec<u64> = c.iter().map(|&x| x % m).collect();
            b.sort_unstable();
            b
        })
        .collect()
}

fn embed_all(word: &[(i64, i64)], m: u64, v: u64) -> Result<Vec<u64>> {
    word.iter()
        .map(|&(i, x)| Ok(MixedElement::new(i, x, m, v)?.embedded))
        .collect()
}

/// `{(1, x), (1, −x), (−1, y), (−1, −y)}` for `k = 4` over `Z_3 × Z_v`, or the
/// same plus `(0, 0)` for `k = 5` over `Z_5 × Z_v`, one codeword per pair.
pub fn ooc_from_pair_templates(s: &PairSet, k: usize) -> Result<OoCode> {
    let v = s.v();
    let m = match k {
        4 => 3,
        5 => 5,
        _ => return Err(Error::Precondition(format!("block size {k} is not 4 or 5"))),
    };
    let need = if k == 4 { 6 } else { 10 };
    if gcd(v, need) != 1 {
        return Err(Error::NotCoprime { a: v, b: need });
    }
    let codewords = s
        .pairs()
        .iter()
        .map(|&(x, y)| {
            let (x, y) = (x as i64, y as i64);
            let mut word = vec![(1, x), (1, -x), (-1, y), (-1, -y)];
            if k == 5 {
                word.insert(0, (0, 0));
            }
            embed_all(&word, m, v)
        })
        .collect::<Result<_>>()?;
    Ok(OoCode {
        n: m * v,
        k,
        codewords,
    })
}

/// A maximum `(3v, 4, 1)` or `(5v, 5, 1)` code from a PS(v) or APS(v, α, β).
pub fn maximum_ooc_from_pairs(s: &PairSet, k: usize) -> Result<OoCode> {
    match infer_params(s) {
        Classification::Ps | Classification::Aps { .. } => ooc_from_pair_templates(s, k),
        other => Err(Error::InvalidInput(format!(
            "expected a PS or APS, found {other:?}"
        ))),
    }
}

/// A maximum `(45v, 5, 1)` code from a PS(v) with `gcd(v, 45) = 1`: nine
/// codewords per pair plus two on `Z_45 × {0}`.
pub fn maximum_ooc_45(s: &PairSet) -> Result<OoCode> {
    let v = s.v();
    if v % 4 != 1 || gcd(v, 45) != 1 {
        return Err(Error::Precondition(format!(
            "need v ≡ 1 (mod 4) and gcd(v, 45) = 1, got {v}"
        )));
    }
    if infer_params(s) != Classification::Ps {
        return Err(Error::InvalidInput(format!("not a PS({v})")));
    }
    let mut codewords = Vec::with_capacity(9 * s.len() + 2);
    for &(x, y) in s.pairs() {
        let (x, y) = (x as i64, y as i64);
        codewords.push(embed_all(
            &[(0, 0), (1, x), (1, -x), (-1, y), (-1, -y)],
            45,
            v,
        )?);
        for firsts in [[3, 7, 13, 30], [5, 14, 26, 34]] {
            for z in [x, -x, y, -y] {
                let mut word = vec![(0, 0)];
                word.extend(firsts.iter().zip(1..).map(|(&i, t)| (i, t * z)));
                codewords.push(embed_all(&word, 45, v)?);
            }
        }
    }
    for firsts in [[0, 1, 3, 29, 35], [0, 5, 20, 27, 41]] {
        let word: Vec<(i64, i64)> = firsts.iter().map(|&i| (i, 0)).collect();
        codewords.push(embed_all(&word, 45, v)?);
    }
    Ok(OoCode {
        n: 45 * v,
        k: 5,
        codewords,
    })
}

/// A maximal `(3pq, 4, 1)` or `(5pq, 5, 1)` code, one codeword short of the
/// bound, from the PPS over `Z_pq` joined from `Sp` and `Sq`.
pub fn maximal_ooc_pq(p: u64, q: u64, sp: &PairSet, sq: &PairSet, k: usize) -> Result<OoCode> {
    let pps = union_pps_pq(p, q, sp, sq)?;
    ooc_from_pair_templates(&pps.set, k)
}

/// A maximal `(3p², 4, 1)` or `(5p², 5, 1)` code, one codeword short of the
/// bound, from the silver PPS over `Z_{p²}`.
pub fn maximal_ooc_p_squared(p: u64, k: usize) -> Result<OoCode> {
    let m = p
        .checked_mul(p)
        .ok_or_else(|| Error::Precondition("p too large".into()))?;
    let root =
        mod_sqrt(2, m)?.ok_or_else(|| Error::Precondition(format!("2 is not a square mod {m}")))?;
    let (pps, _) = silver_pps_p2(p, 1, root)?;
    ooc_from_pair_templates(&pps.set, k)
}
