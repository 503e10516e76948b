//! Published witnesses shipped with the crate, re-verified on load.
//!
//! Listings are kept as transcribed; negative residues are normalized into
//! `[0, v)` when an entry is read, never in the data file.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::construct::SilverWitness;
use crate::designs::{
    develop_rounds, pair_set_from_round, verify_whist, Player, Round, WhistChecks, WhistGame,
};
use crate::error::{Error, Result};
use crate::kramer_mesner::{develop, MultiplierGroup};
use crate::modarith::{is_prime, neg_mod, reduce_signed};
use crate::pps::{verify_pps, PairSet, PpsSpec};

const EMBEDDED: &str = include_str!("../data/catalog.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryKind {
    #[serde(rename = "PS")]
    Ps,
    #[serde(rename = "APS")]
    Aps,
    #[serde(rename = "PPS")]
    Pps,
    #[serde(rename = "Wh")]
    Whist,
    #[serde(rename = "OOC")]
    Ooc,
    Primes,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<u64>,
    /// Prime lists: every prime below `bound` congruent to `residue` mod `modulus`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
}

/// A seat as written in a listing: a signed residue or `"inf"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawSeat {
    Int(i64),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub kind: EntryKind,
    pub params: EntryParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[i64; 2]>>,
    /// Orbit representatives marked in the listing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[i64; 2]>>,
    /// Generators of the multiplier group the listing was developed under.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<Vec<[RawSeat; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<u64>>,
    pub provenance: String,
}

/// Outcome of re-verifying one entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryCheck {
    pub id: String,
    pub ok: bool,
    pub detail: String,
}

fn field<'a, T>(x: &'a Option<T>, id: &str, name: &str) -> Result<&'a T> {
    x.as_ref()
        .ok_or_else(|| Error::Catalog(format!("{id}: missing {name}")))
}

impl CatalogEntry {
    fn v(&self) -> Result<u64> {
        self.params
            .v
            .ok_or_else(|| Error::Catalog(format!("{}: missing v", self.id)))
    }

    /// The modulus the listing lives in (`v − 1` for a whist round with `∞`).
    pub fn modulus(&self) -> Result<u64> {
        let v = self.v()?;
        Ok(if self.kind == EntryKind::Whist && v % 4 == 0 {
            v - 1
        } else {
            v
        })
    }

    /// The initial round with residues normalized.
    pub fn whist_round(&self) -> Result<Round> {
        let u = self.modulus()?;
        let seat = |s: &RawSeat| match s {
            RawSeat::Int(x) => Ok(Player::Point(reduce_signed(*x, u))),
            RawSeat::Name(n) if matches!(n.as_str(), "inf" | "∞" | "infinity") => {
                Ok(Player::Infinity)
            }
            RawSeat::Name(n) => Err(Error::Catalog(format!("{}: unknown seat {n:?}", self.id))),
        };
        field(&self.round, &self.id, "round")?
            .iter()
            .map(|g| {
                Ok(WhistGame([
                    seat(&g[0])?,
                    seat(&g[1])?,
                    seat(&g[2])?,
                    seat(&g[3])?,
                ]))
            })
            .collect()
    }

    /// The pair set: the listing itself, or the one read off a whist round.
    pub fn pair_set(&self) -> Result<PairSet> {
        match self.kind {
            EntryKind::Ps | EntryKind::Aps | EntryKind::Pps => {
                let pairs = field(&self.pairs, &self.id, "pairs")?;
                PairSet::from_signed(self.v()?, pairs.iter().map(|p| (p[0], p[1])))
            }
            EntryKind::Whist => Ok(pair_set_from_round(&self.whist_round()?, self.modulus()?)?.0),
            _ => Err(Error::Catalog(format!("{} carries no pair set", self.id))),
        }
    }

    /// The spec the pair set should satisfy.
    pub fn spec(&self) -> Result<PpsSpec> {
        match self.kind {
            EntryKind::Ps => PpsSpec::ps(self.v()?),
            EntryKind::Aps => {
                let a = *field(&self.params.alpha, &self.id, "alpha")?;
                let b = *field(&self.params.beta, &self.id, "beta")?;
                PpsSpec::aps(self.v()?, a, b)
            }
            EntryKind::Whist => {
                let u = self.modulus()?;
                match pair_set_from_round(&self.whist_round()?, u)?.1 {
                    None => PpsSpec::ps(u),
                    Some(a) => PpsSpec::aps(u, a, a),
                }
            }
            _ => Err(Error::Catalog(format!("{} carries no spec", self.id))),
        }
    }

    /// The pairs marked as orbit representatives, normalized.
    pub fn initial_pairs(&self) -> Result<Option<Vec<(u64, u64)>>> {
        let v = self.v()?;
        Ok(self.initial.as_ref().map(|ps| {
            ps.iter()
                .map(|p| (reduce_signed(p[0], v), reduce_signed(p[1], v)))
                .collect()
        }))
    }

    /// Re-verifies the entry against its stated parameters.
    pub fn check(&self) -> EntryCheck {
        let (ok, detail) = match self.check_inner() {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, e.to_string()),
        };
        EntryCheck {
            id: self.id.clone(),
            ok,
            detail,
        }
    }

    fn check_inner(&self) -> Result<std::result::Result<String, String>> {
        match self.kind {
            EntryKind::Ps | EntryKind::Aps | EntryKind::Pps => self.check_pairs(),
            EntryKind::Whist => self.check_whist(),
            EntryKind::Primes => self.check_primes(),
            EntryKind::Ooc => Err(Error::Catalog(format!(
                "{}: no OOC entries are defined",
                self.id
            ))),
        }
    }

    fn check_pairs(&self) -> Result<std::result::Result<String, String>> {
        let set = self.pair_set()?;
        let spec = self.spec()?;
        let report = verify_pps(&set, &spec);
        if !report.valid {
            return Ok(Err(format!(
                "{} pairs do not verify: {report:?}",
                set.len()
            )));
        }
        let mut detail = format!("{} pairs verify", set.len());
        if let (Some(init), Some(gens)) = (self.initial_pairs()?, &self.multiplier) {
            let h = MultiplierGroup::generated_by(set.v(), gens)?;
            let developed = develop(&init, &h)?;
            if sign_classes(&developed) != sign_classes(&set) {
                return Ok(Err(format!(
                    "{} initial pairs under {gens:?} do not develop into the listing",
                    init.len()
                )));
            }
            detail.push_str(&format!(
                "; {} initial pairs develop into it under {gens:?}",
                init.len()
            ));
        }
        Ok(Ok(detail))
    }

    fn check_whist(&self) -> Result<std::result::Result<String, String>> {
        let u = self.modulus()?;
        let r0 = self.whist_round()?;
        let set = self.pair_set()?;
        let spec = self.spec()?;
        if !verify_pps(&set, &spec).valid {
            return Ok(Err("pair set read off the round does not verify".into()));
        }
        let t = develop_rounds(&r0, u);
        let checks = if t.has_infinity() {
            WhistChecks::basic_zcps()
        } else {
            WhistChecks::all()
        };
        let report = verify_whist(&t, checks);
        if !report.passed() {
            return Ok(Err(format!("tournament fails: {report:?}")));
        }
        Ok(Ok(format!(
            "{} games; tournament and {:?} verify",
            r0.len(),
            spec.label()
        )))
    }

    fn check_primes(&self) -> Result<std::result::Result<String, String>> {
        let listed = field(&self.primes, &self.id, "primes")?;
        let bound = *field(&self.params.bound, &self.id, "bound")?;
        let residue = *field(&self.params.residue, &self.id, "residue")?;
        let modulus = *field(&self.params.modulus, &self.id, "modulus")?;
        let square = self.id.contains("square");
        let computed = silver_generating_primes(bound, residue, modulus, square)?;
        if listed != &computed {
            let l: BTreeSet<_> = listed.iter().collect();
            let c: BTreeSet<_> = computed.iter().collect();
            return Ok(Err(format!(
                "listed but failing: {:?}; passing but unlisted: {:?}",
                l.difference(&c).collect::<Vec<_>>(),
                c.difference(&l).collect::<Vec<_>>()
            )));
        }
        Ok(Ok(format!("{} primes match", listed.len())))
    }
}

/// Primes `p < bound`, `p ≡ residue (mod modulus)`, for which `1 + √2`
/// generates the units modulo `p` (or `p²`) up to sign.
pub fn silver_generating_primes(
    bound: u64,
    residue: u64,
    modulus: u64,
    square: bool,
) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for p in (2..bound).filter(|&p| p % modulus == residue && is_prime(p)) {
        let m = if square { p * p } else { p };
        if SilverWitness::candidates(p, m)?.iter().any(|w| w.generates) {
            out.push(p);
        }
    }
    Ok(out)
}

fn sign_classes(s: &PairSet) -> BTreeSet<(u64, u64)> {
    let v = s.v();
    let sorted = |x: u64, y: u64| (x.min(y), x.max(y));
    s.pairs()
        .iter()
        .map(|&(x, y)| sorted(x, y).min(sorted(neg_mod(x, v), neg_mod(y, v))))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// Parses without verifying.
    pub fn parse(text: &str) -> Result<Catalog> {
        let c: Catalog = serde_json::from_str(text)?;
        let mut seen = BTreeSet::new();
        for e in &c.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Catalog(format!("duplicate id {}", e.id)));
            }
        }
        Ok(c)
    }

    /// The shipped catalog; fails if any entry does not re-verify.
    pub fn load() -> Result<Catalog> {
        let c = Catalog::parse(EMBEDDED)?;
        if let Some(bad) = c.check_all().into_iter().find(|r| !r.ok) {
            return Err(Error::Catalog(format!("{}: {}", bad.id, bad.detail)));
        }
        Ok(c)
    }

    /// The shipped catalog as transcribed, unverified.
    pub fn embedded() -> Result<Catalog> {
        Catalog::parse(EMBEDDED)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn get(&self, id: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::Catalog(format!("unknown entry {id:?}")))
    }

    pub fn check_all(&self) -> Vec<EntryCheck> {
        self.entries.iter().map(CatalogEntry::check).collect()
    }
}
