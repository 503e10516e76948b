//! Randomized checks shared by the property and acceptance targets.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use designforge::catalog::Catalog;
use designforge::kramer_mesner::{orbit_cover_counts, orbits, MultiplierGroup};
use designforge::modarith::{add_mod, gcd, neg_mod, sub_mod};
use designforge::{verify_pps, PairSet, PpsSpec};

pub fn catalog_sets() -> Vec<(String, PairSet, PpsSpec)> {
    let c = Catalog::load().expect("catalog loads");
    c.entries
        .iter()
        .filter_map(|e| Some((e.id.clone(), e.pair_set().ok()?, e.spec().ok()?)))
        .collect()
}

pub fn random_unit(rng: &mut impl Rng, v: u64) -> u64 {
    loop {
        let x = rng.random_range(1..v);
        if gcd(x, v) == 1 {
            return x;
        }
    }
}

/// Scales a catalog set by a random unit, flips signs, swaps and shuffles
/// pairs (all must stay valid), then moves one element to a residue other
/// than `±` itself (must be caught). Returns the number of trials run.
pub fn perturbation_trials(trials: usize, seed: u64) -> Result<usize, String> {
    let sets = catalog_sets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let (id, set, spec) = &sets[rng.random_range(0..sets.len())];
        let v = set.v();
        let lambda = random_unit(&mut rng, v);
        let scaled = set.scaled(lambda).map_err(|e| e.to_string())?;
        let sspec = spec.scaled(lambda).map_err(|e| e.to_string())?;
        if !verify_pps(&scaled, &sspec).valid {
            return Err(format!("trial {trial}: {id} scaled by {lambda} fails"));
        }
        let mut pairs: Vec<(u64, u64)> = scaled
            .pairs()
            .iter()
            .map(|&(x, y)| {
                let (x, y) = if rng.random_bool(0.5) {
                    (neg_mod(x, v), neg_mod(y, v))
                } else {
                    (x, y)
                };
                let x = if rng.random_bool(0.5) {
                    neg_mod(x, v)
                } else {
                    x
                };
                if rng.random_bool(0.5) {
                    (y, x)
                } else {
                    (x, y)
                }
            })
            .collect();
        for i in (1..pairs.len()).rev() {
            pairs.swap(i, rng.random_range(0..=i));
        }
        if !verify_pps(&PairSet::from_raw(v, pairs.clone()), &sspec).valid {
            return Err(format!("trial {trial}: sign/order change of {id} fails"));
        }
        let i = rng.random_range(0..pairs.len());
        let old = if rng.random_bool(0.5) {
            &mut pairs[i].0
        } else {
            &mut pairs[i].1
        };
        let was = *old;
        let bad = loop {
            let z = rng.random_range(0..v);
            if z != was && z != neg_mod(was, v) {
                break z;
            }
        };
        *old = bad;
        if verify_pps(&PairSet::from_raw(v, pairs), &sspec).valid {
            return Err(format!(
                "trial {trial}: moving {was} to {bad} in {id} went unnoticed"
            ));
        }
    }
    Ok(trials)
}

/// Cover counts recomputed over every member of a pair orbit: a couple
/// `{B, −B}` contributes once, a self-negating pair its full count.
pub fn oracle_counts(v: u64, orbit: &[(u64, u64)]) -> (BTreeMap<u64, u32>, BTreeMap<u64, u32>) {
    let mut u2 = BTreeMap::new();
    let mut d2 = BTreeMap::new();
    for &(x, y) in orbit {
        let self_neg = BTreeSet::from([x, y]) == BTreeSet::from([neg_mod(x, v), neg_mod(y, v)]);
        let w = if self_neg { 2 } else { 1 };
        for z in [x, neg_mod(x, v), y, neg_mod(y, v)] {
            *u2.entry(z).or_insert(0) += w;
        }
        let (s, t) = (add_mod(x, y, v), sub_mod(x, y, v));
        for z in [s, neg_mod(s, v), t, neg_mod(t, v)] {
            *d2.entry(z).or_insert(0) += w;
        }
    }
    let half = |m: BTreeMap<u64, u32>| m.into_iter().map(|(k, c)| (k, c / 2)).collect();
    (half(u2), half(d2))
}

/// For random odd `v ≤ 200` and `H = <g, −1>`: the column weights agree
/// with the oracle and are constant on every element orbit.
pub fn weight_trials(instances: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..instances {
        let v = rng.random_range(2..=99u64) * 2 + 1;
        let g = random_unit(&mut rng, v);
        let h = MultiplierGroup::with_negation(v, &[g]).map_err(|e| e.to_string())?;
        let idx = orbits(&h);
        for orbit in &idx.pair_orbits {
            let (u, d) = orbit_cover_counts(v, orbit);
            let u: BTreeMap<u64, u32> = u.into_iter().collect();
            let d: BTreeMap<u64, u32> = d.into_iter().collect();
            let (ou, od) = oracle_counts(v, orbit);
            if u != ou || d != od {
                return Err(format!(
                    "v = {v}, H = <{g}>: orbit of {:?} disagrees with recount",
                    orbit[0]
                ));
            }
            for counts in [&u, &d] {
                for eo in &idx.element_orbits {
                    let w0 = counts.get(&eo[0]).copied().unwrap_or(0);
                    if eo.iter().any(|z| counts.get(z).copied().unwrap_or(0) != w0) {
                        return Err(format!(
                            "v = {v}, H = <{g}>: weight varies on orbit of {}",
                            eo[0]
                        ));
                    }
                }
            }
        }
    }
    Ok(instances)
}
