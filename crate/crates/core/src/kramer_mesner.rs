//! Orbit reduction of PPS searches under a multiplier group.
//!
//! A PPS that is invariant under a group `H` of multipliers containing `−1`
//! is a union of `H`-orbits of pairs (one pair from each `{B, −B}`). Picking
//! orbits turns into a 0-1 system `MX = J` with one row per element orbit and
//! cover condition, solved here as an exact cover.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::modarith::{
    add_mod, crt_lift, factorize, gcd, mul_mod, neg_mod, smallest_element_of_order, sub_mod,
    Residue,
};
use crate::parallel;
use crate::pps::{verify_pps, PairSet, PpsSpec};

/// A multiplicative group of units of `Z_v` containing `−1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplierGroup {
    v: u64,
    generators: Vec<u64>,
    elements: Vec<u64>,
}

impl MultiplierGroup {
    /// The closure of `generators` under multiplication. Fails unless every
    /// generator is a unit and `−1` ends up in the group.
    pub fn generated_by(v: u64, generators: &[u64]) -> Result<Self> {
        if v < 2 {
            return Err(Error::Precondition(format!("modulus {v} too small")));
        }
        let generators: Vec<u64> = generators.iter().map(|g| g % v).collect();
        for &g in &generators {
            if gcd(g, v) != 1 {
                return Err(Error::NotAUnit { x: g, modulus: v });
            }
        }
        let mut seen = BTreeSet::from([1 % v]);
        let mut frontier = vec![1 % v];
        while let Some(x) = frontier.pop() {
            for &g in &generators {
                let y = mul_mod(x, g, v);
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        if !seen.contains(&(v - 1)) {
            return Err(Error::Precondition(format!(
                "the group generated by {generators:?} mod {v} does not contain −1"
            )));
        }
        Ok(MultiplierGroup {
            v,
            generators,
            elements: seen.into_iter().collect(),
        })
    }

    /// The group generated by `generators` together with `−1`.
    pub fn with_negation(v: u64, generators: &[u64]) -> Result<Self> {
        let mut g = generators.to_vec();
        g.push(v - 1);
        Self::generated_by(v, &g)
    }

    /// `{1, −1}`.
    pub fn plus_minus(v: u64) -> Result<Self> {
        Self::generated_by(v, &[v - 1])
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// A multiplier suggestion for `v = pq` or `v = 3pq` with primes `p < q` and
/// `p − 1 | q − 1`: the CRT combination of the smallest element of order
/// `p − 1` modulo `p` and modulo `q` (and `−1` modulo 3).
pub fn suggest_multiplier(v: u64) -> Option<u64> {
    let f = factorize(v);
    if f.iter().any(|&(_, e)| e != 1) {
        return None;
    }
    let mut primes: Vec<u64> = f.iter().map(|&(p, _)| p).collect();
    let three = primes.len() == 3 && primes[0] == 3;
    if three {
        primes.remove(0);
    }
    let &[p, q] = primes.as_slice() else {
        return None;
    };
    if p <= 3 || (q - 1) % (p - 1) != 0 {
        return None;
    }
    let mut parts = vec![
        Residue::from_u64(smallest_element_of_order(p - 1, p)?, p),
        Residue::from_u64(smallest_element_of_order(p - 1, q)?, q),
    ];
    if three {
        parts.push(Residue::from_u64(2, 3));
    }
    crt_lift(&parts).ok().map(|r| r.value)
}

/// `H`-orbits on elements and on unordered pairs, each labelled by its
/// smallest member and listed in order of labels.
#[derive(Debug, Clone)]
pub struct OrbitIndex {
    pub v: u64,
    pub element_orbits: Vec<Vec<u64>>,
    pub pair_orbits: Vec<Vec<(u64, u64)>>,
    /// Orbit number of each element.
    element_orbit_of: Vec<usize>,
}

fn sorted_pair(x: u64, y: u64) -> (u64, u64) {
    (x.min(y), x.max(y))
}

impl OrbitIndex {
    pub fn element_reps(&self) -> Vec<u64> {
        self.element_orbits.iter().map(|o| o[0]).collect()
    }

    pub fn pair_reps(&self) -> Vec<(u64, u64)> {
        self.pair_orbits.iter().map(|o| o[0]).collect()
    }

    pub fn orbit_of_element(&self, x: u64) -> usize {
        self.element_orbit_of[x as usize]
    }
}

pub fn orbits(h: &MultiplierGroup) -> OrbitIndex {
    let v = h.v;
    let n = v as usize;
    let mut element_orbit_of = vec![usize::MAX; n];
    let mut element_orbits = Vec::new();
    for x in 0..v {
        if element_orbit_of[x as usize] != usize::MAX {
            continue;
        }
        let orbit: BTreeSet<u64> = h.elements.iter().map(|&g| mul_mod(x, g, v)).collect();
        for &y in &orbit {
            element_orbit_of[y as usize] = element_orbits.len();
        }
        element_orbits.push(orbit.into_iter().collect());
    }
    let mut seen = vec![false; n * n];
    let mut pair_orbits = Vec::new();
    for x in 0..v {
        for y in x + 1..v {
            if seen[(x * v + y) as usize] {
                continue;
            }
            let orbit: BTreeSet<(u64, u64)> = h
                .elements
                .iter()
                .map(|&g| sorted_pair(mul_mod(x, g, v), mul_mod(y, g, v)))
                .collect();
            for &(a, b) in &orbit {
                seen[(a * v + b) as usize] = true;
            }
            pair_orbits.push(orbit.into_iter().collect());
        }
    }
    OrbitIndex {
        v,
        element_orbits,
        pair_orbits,
        element_orbit_of,
    }
}

/// Row condition: element cover or sum/difference cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    U,
    D,
}

/// The system `MX = J`, stored by columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSystem {
    /// `(element-orbit representative, condition)` per row; the `U` rows
    /// come first.
    pub row_labels: Vec<(u64, Condition)>,
    /// Pair-orbit representative per column.
    pub col_labels: Vec<(u64, u64)>,
    /// Nonzero entries of each column as `(row, weight)`, rows increasing.
    pub columns: Vec<Vec<(usize, u32)>>,
    pub j: Vec<u8>,
}

impl CoverSystem {
    pub fn rows(&self) -> usize {
        self.j.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.columns[col]
            .iter()
            .find(|&&(r, _)| r == row)
            .map_or(0, |&(_, w)| w)
    }

    /// Whether `x` (one entry per column) satisfies `MX = J`.
    pub fn satisfies(&self, x: &[u8]) -> bool {
        let mut sums = vec![0u64; self.rows()];
        for (c, col) in self.columns.iter().enumerate() {
            if x[c] != 0 {
                for &(r, w) in col {
                    sums[r] += w as u64 * x[c] as u64;
                }
            }
        }
        sums.iter().zip(&self.j).all(|(&s, &j)| s == j as u64)
    }

    /// A system from explicit columns, for tests and imported data.
    pub fn from_columns(j: Vec<u8>, columns: Vec<Vec<(usize, u32)>>) -> Self {
        CoverSystem {
            row_labels: (0..j.len()).map(|r| (r as u64, Condition::U)).collect(),
            col_labels: (0..columns.len()).map(|c| (c as u64, 0)).collect(),
            columns,
            j,
        }
    }

    /// Sparse text: a `rows cols` header, the `J` vector, then one
    /// `row col value` line per nonzero entry.
    pub fn to_sparse_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows(), self.cols());
        let j: Vec<String> = self.j.iter().map(|b| b.to_string()).collect();
        out.push_str(&j.join(" "));
        out.push('\n');
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, w) in col {
                let _ = writeln!(out, "{r} {c} {w}");
            }
        }
        out
    }

    pub fn from_sparse_text(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidInput(format!("sparse system: {what}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("header")))
            .collect::<Result<_>>()?;
        let &[rows, cols] = header.as_slice() else {
            return Err(bad("header"));
        };
        let j: Vec<u8> = lines
            .next()
            .ok_or_else(|| bad("missing J"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("J entry")))
            .collect::<Result<_>>()?;
        if j.len() != rows {
            return Err(bad("J length"));
        }
        let mut columns = vec![Vec::new(); cols];
        for line in lines {
            let t: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("entry")))
                .collect::<Result<_>>()?;
            let &[r, c, w] = t.as_slice() else {
                return Err(bad("entry"));
            };
            if r as usize >= rows || c as usize >= cols {
                return Err(bad("index out of range"));
            }
            columns[c as usize].push((r as usize, w as u32));
        }
        for col in &mut columns {
            col.sort_unstable();
        }
        Ok(Self::from_columns(j, columns))
    }
}

/// `(element, count)` pairs, sorted by element.
pub type Counts = Vec<(u64, u32)>;

/// The cover counts contributed by one pair orbit: `±B` and
/// `±{x + y, x − y}` summed over one pair `B` from each `{B, −B}`.
/// A pair with `B = −B` is counted once and covers its elements twice.
pub fn orbit_cover_counts(v: u64, orbit: &[(u64, u64)]) -> (Counts, Counts) {
    let members: BTreeSet<(u64, u64)> = orbit.iter().copied().collect();
    let mut u = std::collections::BTreeMap::new();
    let mut d = std::collections::BTreeMap::new();
    for &(x, y) in orbit {
        let neg = sorted_pair(neg_mod(x, v), neg_mod(y, v));
        if neg < (x, y) && members.contains(&neg) {
            continue; // its partner stands for the couple
        }
        let (s, t) = (add_mod(x, y, v), sub_mod(x, y, v));
        for z in [x, neg_mod(x, v), y, neg_mod(y, v)] {
            *u.entry(z).or_insert(0u32) += 1;
        }
        for z in [s, neg_mod(s, v), t, neg_mod(t, v)] {
            *d.entry(z).or_insert(0u32) += 1;
        }
    }
    (u.into_iter().collect(), d.into_iter().collect())
}

/// Builds `MX = J` for `spec`, whose excluded sets must be unions of orbits.
pub fn build_system(idx: &OrbitIndex, spec: &PpsSpec) -> Result<CoverSystem> {
    let v = idx.v;
    if spec.v() != v {
        return Err(Error::Precondition(
            "spec modulus differs from the group's".into(),
        ));
    }
    for (name, set) in [("A1", spec.a1()), ("A2", spec.a2())] {
        for &a in set {
            let o = &idx.element_orbits[idx.orbit_of_element(a)];
            if o.iter().any(|z| !set.contains(z)) {
                return Err(Error::InvalidSpec(format!(
                    "{name} is not a union of orbits ({a})"
                )));
            }
        }
    }
    let n = idx.element_orbits.len();
    let reps = idx.element_reps();
    let mut row_labels: Vec<(u64, Condition)> = reps.iter().map(|&x| (x, Condition::U)).collect();
    row_labels.extend(reps.iter().map(|&x| (x, Condition::D)));
    let mut j: Vec<u8> = reps
        .iter()
        .map(|x| u8::from(!spec.a1().contains(x)))
        .collect();
    j.extend(reps.iter().map(|x| u8::from(!spec.a2().contains(x))));
    let columns = parallel::map(&idx.pair_orbits, |orbit| {
        let (u, d) = orbit_cover_counts(v, orbit);
        let mut col = Vec::new();
        // Weights are read off at the orbit representative only.
        for (z, w) in u {
            if idx.element_orbits[idx.orbit_of_element(z)][0] == z {
                col.push((idx.orbit_of_element(z), w));
            }
        }
        for (z, w) in d {
            if idx.element_orbits[idx.orbit_of_element(z)][0] == z {
                col.push((n + idx.orbit_of_element(z), w));
            }
        }
        col.sort_unstable();
        col
    });
    Ok(CoverSystem {
        row_labels,
        col_labels: idx.pair_reps(),
        columns,
        j,
    })
}

/// Limits for [`solve_binary`] and [`km_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveBudget {
    pub timeout: Option<Duration>,
    pub max_nodes: Option<u64>,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            timeout: Some(Duration::from_secs(600)),
            max_nodes: None,
        }
    }
}

impl SolveBudget {
    pub fn unlimited() -> Self {
        SolveBudget {
            timeout: None,
            max_nodes: None,
        }
    }

    pub fn seconds(s: u64) -> Self {
        SolveBudget {
            timeout: Some(Duration::from_secs(s)),
            max_nodes: None,
        }
    }
}

/// Columns that can appear in some solution: no weight on a `J = 0` row and
/// no weight above 1 anywhere.
pub fn admissible_columns(sys: &CoverSystem) -> Vec<usize> {
    (0..sys.cols())
        .filter(|&c| sys.columns[c].iter().all(|&(r, w)| w == 1 && sys.j[r] == 1))
        .collect()
}

/// Knuth's dancing links over items `1..=n_items` (0 is the root).
#[derive(Clone)]
struct Dlx {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    item: Vec<usize>,
    option: Vec<usize>,
    len: Vec<usize>,
}

impl Dlx {
    fn new(n_items: usize, options: &[Vec<usize>]) -> Self {
        let h = n_items + 1;
        let mut d = Dlx {
            left: (0..h)
                .map(|i| if i == 0 { n_items } else { i - 1 })
                .collect(),
            right: (0..h)
                .map(|i| if i == n_items { 0 } else { i + 1 })
                .collect(),
            up: (0..h).collect(),
            down: (0..h).collect(),
            item: (0..h).collect(),
            option: vec![usize::MAX; h],
            len: vec![0; h],
        };
        for (o, items) in options.iter().enumerate() {
            let first = d.item.len();
            for (k, &it) in items.iter().enumerate() {
                let node = d.item.len();
                let c = it + 1;
                d.item.push(c);
                d.option.push(o);
                d.left.push(if k == 0 {
                    first + items.len() - 1
                } else {
                    node - 1
                });
                d.right.push(if k + 1 == items.len() {
                    first
                } else {
                    node + 1
                });
                d.up.push(d.up[c]);
                d.down.push(c);
                let last = d.up[c];
                d.down[last] = node;
                d.up[c] = node;
                d.len[c] += 1;
            }
        }
        d
    }

    fn cover(&mut self, c: usize) {
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.len[self.item[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                self.len[self.item[j]] += 1;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = c;
        self.left[r] = c;
    }

    /// The open item with fewest options, lowest index on ties.
    fn choose(&self) -> Option<usize> {
        let mut best = None;
        let mut c = self.right[0];
        while c != 0 {
            if best.is_none_or(|b: usize| self.len[c] < self.len[b]) {
                best = Some(c);
            }
            c = self.right[c];
        }
        best
    }

    /// Rows (option nodes) of item `c`, top to bottom.
    fn nodes_of(&self, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut i = self.down[c];
        while i != c {
            out.push(i);
            i = self.down[i];
        }
        out
    }

    fn select(&mut self, node: usize) {
        let mut j = self.right[node];
        while j != node {
            self.cover(self.item[j]);
            j = self.right[j];
        }
    }

    fn deselect(&mut self, node: usize) {
        let mut j = self.left[node];
        while j != node {
            self.uncover(self.item[j]);
            j = self.left[j];
        }
    }
}

struct Limits<'a> {
    start: Instant,
    budget: SolveBudget,
    nodes: &'a AtomicU64,
    aborted: &'a AtomicBool,
}

impl Limits<'_> {
    fn tick(&self) -> Result<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed);
        if self.aborted.load(Ordering::Relaxed) {
            return Err(Error::BudgetExceeded);
        }
        let over = self.budget.max_nodes.is_some_and(|m| n >= m)
            || (n % 1024 == 0
                && self
                    .budget
                    .timeout
                    .is_some_and(|t| self.start.elapsed() > t));
        if over {
            self.aborted.store(true, Ordering::Relaxed);
            return Err(Error::BudgetExceeded);
        }
        Ok(())
    }
}

/// Depth-first search; `found` collects solutions up to `limit`.
fn search(
    d: &mut Dlx,
    chosen: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
    limit: usize,
    lim: &Limits,
) -> Result<()> {
    lim.tick()?;
    let Some(c) = d.choose() else {
        found.push(chosen.clone());
        return Ok(());
    };
    if d.len[c] == 0 {
        return Ok(());
    }
    d.cover(c);
    for node in d.nodes_of(c) {
        chosen.push(d.option[node]);
        d.select(node);
        let r = search(d, chosen, found, limit, lim);
        d.deselect(node);
        chosen.pop();
        r?;
        if found.len() >= limit {
            break;
        }
    }
    d.uncover(c);
    Ok(())
}

/// The exact-cover instance left after pruning: items are the `J = 1` rows,
/// options the admissible columns.
fn reduce(sys: &CoverSystem) -> (Dlx, Vec<usize>, bool) {
    let keep = admissible_columns(sys);
    let item_of: Vec<Option<usize>> = {
        let mut k = 0;
        sys.j
            .iter()
            .map(|&b| {
                (b == 1).then(|| {
                    k += 1;
                    k - 1
                })
            })
            .collect()
    };
    let n_items = item_of.iter().flatten().count();
    let options: Vec<Vec<usize>> = keep
        .iter()
        .map(|&c| {
            sys.columns[c]
                .iter()
                .map(|&(r, _)| item_of[r].unwrap())
                .collect()
        })
        .collect();
    let trivially_feasible = sys.j.iter().all(|&b| b == 0);
    (Dlx::new(n_items, &options), keep, trivially_feasible)
}

fn to_vector(sys: &CoverSystem, keep: &[usize], picked: &[usize]) -> Vec<u8> {
    let mut x = vec![0u8; sys.cols()];
    for &o in picked {
        x[keep[o]] = 1;
    }
    x
}

/// The first 0-1 solution of `MX = J` in branching order, `None` if there is
/// none, or [`Error::BudgetExceeded`]. Columns with no nonzero entry are
/// left at 0.
///
/// Branches at the first level run in parallel; the result is the one the
/// sequential search would find first.
pub fn solve_binary(sys: &CoverSystem, budget: SolveBudget) -> Result<Option<Vec<u8>>> {
    let (mut dlx, keep, trivial) = reduce(sys);
    if trivial {
        return Ok(Some(vec![0; sys.cols()]));
    }
    let nodes = AtomicU64::new(0);
    let aborted = AtomicBool::new(false);
    let lim = Limits {
        start: Instant::now(),
        budget,
        nodes: &nodes,
        aborted: &aborted,
    };
    lim.tick()?;
    let Some(c) = dlx.choose() else {
        unreachable!("items exist")
    };
    dlx.cover(c);
    let branches = dlx.nodes_of(c);
    let found = parallel::find_map_first(&branches, |&node| {
        let mut d = dlx.clone();
        d.select(node);
        let mut chosen = vec![d.option[node]];
        let mut found = Vec::new();
        match search(&mut d, &mut chosen, &mut found, 1, &lim) {
            Err(e) => Some(Err(e)),
            Ok(()) => found.pop().map(Ok),
        }
    });
    match found {
        None => Ok(None),
        Some(Err(e)) => Err(e),
        Some(Ok(picked)) => Ok(Some(to_vector(sys, &keep, &picked))),
    }
}

/// Up to `limit` solutions, in branching order, with empty columns at 0.
/// Single-threaded.
pub fn all_solutions(sys: &CoverSystem, limit: usize, budget: SolveBudget) -> Result<Vec<Vec<u8>>> {
    let (mut dlx, keep, trivial) = reduce(sys);
    if trivial {
        return Ok(vec![vec![0; sys.cols()]]);
    }
    let nodes = AtomicU64::new(0);
    let aborted = AtomicBool::new(false);
    let lim = Limits {
        start: Instant::now(),
        budget,
        nodes: &nodes,
        aborted: &aborted,
    };
    let mut found = Vec::new();
    search(&mut dlx, &mut Vec::new(), &mut found, limit, &lim)?;
    Ok(found.iter().map(|p| to_vector(sys, &keep, p)).collect())
}

/// Expands each pair into its `H`-orbit and keeps, from each `{B, −B}`, the
/// pair whose sorted form is smaller.
pub fn develop(initial: &[(u64, u64)], h: &MultiplierGroup) -> Result<PairSet> {
    let v = h.v;
    let mut out = BTreeSet::new();
    for &(x, y) in initial {
        for &g in &h.elements {
            let b = sorted_pair(mul_mod(x, g, v), mul_mod(y, g, v));
            if b.0 == neg_mod(b.1, v) || b.0 == b.1 {
                return Err(Error::DegeneratePair { x: b.0, y: b.1, v });
            }
            let nb = sorted_pair(neg_mod(b.0, v), neg_mod(b.1, v));
            out.insert(b.min(nb));
        }
    }
    PairSet::new(v, out)
}

/// Searches for an `H`-invariant PPS: orbits, system, solver, development.
/// The result is verified before it is returned.
pub fn km_search(
    h: &MultiplierGroup,
    spec: &PpsSpec,
    budget: SolveBudget,
) -> Result<Option<PairSet>> {
    let idx = orbits(h);
    let sys = build_system(&idx, spec)?;
    let Some(x) = solve_binary(&sys, budget)? else {
        return Ok(None);
    };
    let reps: Vec<(u64, u64)> = (0..sys.cols())
        .filter(|&c| x[c] == 1)
        .map(|c| sys.col_labels[c])
        .collect();
    let set = develop(&reps, h)?;
    let report = verify_pps(&set, spec);
    if !report.valid {
        return Err(Error::InvalidInput(format!(
            "developed set does not verify: {report:?}"
        )));
    }
    Ok(Some(set))
}
