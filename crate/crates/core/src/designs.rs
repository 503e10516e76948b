//! Whist tournaments, cyclic difference matrices and CBSEC verification.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::modarith::{add_mod, neg_mod, sub_mod};
use crate::parallel;
use crate::pps::{verify_pps, PairSet, PpsSpec};

/// A player: a residue, or the fixed point `∞` (with `∞ + 1 = ∞`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    Point(u64),
    Infinity,
}

impl Player {
    pub fn shift(self, j: u64, u: u64) -> Player {
        match self {
            Player::Point(x) => Player::Point(add_mod(x, j % u, u)),
            Player::Infinity => Player::Infinity,
        }
    }

    fn index(self, u: u64) -> usize {
        match self {
            Player::Point(x) => x as usize,
            Player::Infinity => u as usize,
        }
    }

    fn from_index(i: usize, u: u64) -> Player {
        if i as u64 == u {
            Player::Infinity
        } else {
            Player::Point(i as u64)
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Point(x) => write!(f, "{x}"),
            Player::Infinity => f.write_str("∞"),
        }
    }
}

impl Serialize for Player {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Player::Point(x) => s.serialize_u64(*x),
            Player::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Player {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Player;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, x: u64) -> std::result::Result<Player, E> {
                Ok(Player::Point(x))
            }

            fn visit_i64<E: de::Error>(self, x: i64) -> std::result::Result<Player, E> {
                u64::try_from(x)
                    .map(Player::Point)
                    .map_err(|_| E::custom("negative player"))
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Player, E> {
                match s {
                    "inf" | "∞" | "infinity" => Ok(Player::Infinity),
                    _ => Err(E::custom(format!("unknown player {s:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A game `(a, b, c, d)`: partners `{a, c}` and `{b, d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WhistGame(pub [Player; 4]);

impl WhistGame {
    pub fn from_points(a: u64, b: u64, c: u64, d: u64) -> Self {
        WhistGame([a, b, c, d].map(Player::Point))
    }

    pub fn partners(&self) -> [(Player, Player); 2] {
        let [a, b, c, d] = self.0;
        [(a, c), (b, d)]
    }

    pub fn opponents(&self) -> [(Player, Player); 4] {
        let [a, b, c, d] = self.0;
        [(a, b), (c, d), (a, d), (b, c)]
    }

    /// `(a, b), (b, c), (c, d), (d, a)`: each player and the one to its left.
    pub fn directed_pairs(&self) -> [(Player, Player); 4] {
        let [a, b, c, d] = self.0;
        [(a, b), (b, c), (c, d), (d, a)]
    }

    /// `(a, b), (a, d), (c, b), (c, d)`: the pair `{a, c}` against `{b, d}`.
    pub fn ordered_pairs(&self) -> [(Player, Player); 4] {
        let [a, b, c, d] = self.0;
        [(a, b), (a, d), (c, b), (c, d)]
    }

    pub fn shift(&self, j: u64, u: u64) -> WhistGame {
        WhistGame(self.0.map(|p| p.shift(j, u)))
    }

    pub fn has_infinity(&self) -> bool {
        self.0.contains(&Player::Infinity)
    }
}

pub type Round = Vec<WhistGame>;

/// Rounds of games on `v` players: `Z_v`, or `Z_{v−1} ∪ {∞}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhistTournament {
    pub v: u64,
    pub rounds: Vec<Round>,
}

impl WhistTournament {
    pub fn has_infinity(&self) -> bool {
        self.rounds.iter().flatten().any(WhistGame::has_infinity)
    }

    /// The cyclic modulus: `v − 1` when `∞` plays, else `v`.
    pub fn modulus(&self) -> u64 {
        if self.has_infinity() {
            self.v - 1
        } else {
            self.v
        }
    }

    /// No games at all.
    pub fn is_degenerate(&self) -> bool {
        self.rounds.iter().all(Vec::is_empty)
    }

    /// Round `j` is round 0 shifted by `j` for every `j`.
    pub fn is_cyclic(&self) -> bool {
        let u = self.modulus();
        if self.rounds.len() as u64 != u {
            return false;
        }
        let base = &self.rounds[0];
        self.rounds.iter().enumerate().all(|(j, r)| {
            r.len() == base.len()
                && r.iter()
                    .zip(base)
                    .all(|(g, g0)| *g == g0.shift(j as u64, u))
        })
    }
}

/// `(x, y, −x, −y)` for each pair, preceded by `(∞, α, 0, −α)` for an
/// APS(v, α, α).
pub fn initial_round(s: &PairSet, alpha: Option<u64>) -> Result<Round> {
    let v = s.v();
    let spec = match alpha {
        None => PpsSpec::ps(v)?,
        Some(a) => PpsSpec::aps(v, a, a)?,
    };
    if !verify_pps(s, &spec).valid {
        return Err(Error::InvalidInput(match alpha {
            None => format!("not a PS({v})"),
            Some(a) => format!("not an APS({v}, {a}, {a})"),
        }));
    }
    let mut round = Vec::with_capacity(s.len() + 1);
    if let Some(a) = alpha {
        let a = a % v;
        round.push(WhistGame([
            Player::Infinity,
            Player::Point(a),
            Player::Point(0),
            Player::Point(neg_mod(a, v)),
        ]));
    }
    for &(x, y) in s.pairs() {
        round.push(WhistGame::from_points(x, y, neg_mod(x, v), neg_mod(y, v)));
    }
    Ok(round)
}

/// Reads the pair set back off an initial round of the form built by
/// [`initial_round`]; returns `α` if there is an `∞` game.
pub fn pair_set_from_round(r0: &[WhistGame], u: u64) -> Result<(PairSet, Option<u64>)> {
    let mut pairs = Vec::new();
    let mut alpha = None;
    for g in r0 {
        match g.0 {
            [Player::Infinity, Player::Point(a), Player::Point(0), Player::Point(c)]
                if c == neg_mod(a, u) && alpha.is_none() =>
            {
                alpha = Some(a);
            }
            [Player::Point(x), Player::Point(y), Player::Point(z), Player::Point(w)]
                if z == neg_mod(x, u) && w == neg_mod(y, u) =>
            {
                pairs.push((x, y));
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "game {:?} is not of the form (x, y, −x, −y)",
                    g.0
                )))
            }
        }
    }
    Ok((PairSet::new(u, pairs)?, alpha))
}

/// The `u` rounds `R0 + j`, `j ∈ Z_u`.
pub fn develop_rounds(r0: &[WhistGame], u: u64) -> WhistTournament {
    let inf = r0.iter().any(WhistGame::has_infinity);
    WhistTournament {
        v: u + u64::from(inf),
        rounds: (0..u)
            .map(|j| r0.iter().map(|g| g.shift(j, u)).collect())
            .collect(),
    }
}

/// Which properties [`verify_whist`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WhistChecks {
    pub basic: bool,
    pub zcps: bool,
    pub directed: bool,
    pub ordered: bool,
    /// Count seat adjacencies even for cyclic tournaments.
    pub force_tally: bool,
}

impl WhistChecks {
    pub fn all() -> Self {
        WhistChecks {
            basic: true,
            zcps: true,
            directed: true,
            ordered: true,
            force_tally: false,
        }
    }

    pub fn basic_zcps() -> Self {
        WhistChecks {
            basic: true,
            zcps: true,
            ..Default::default()
        }
    }
}

/// One check's verdict with what went wrong.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Player pairs (ordered where it matters) seen the wrong number of times.
    pub pairs: Vec<(Player, Player)>,
    pub notes: Vec<String>,
}

impl CheckOutcome {
    fn from_problems(pairs: Vec<(Player, Player)>, notes: Vec<String>) -> Self {
        CheckOutcome {
            passed: pairs.is_empty() && notes.is_empty(),
            pairs,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct WhistReport {
    pub basic: Option<CheckOutcome>,
    pub zcps: Option<CheckOutcome>,
    pub directed: Option<CheckOutcome>,
    pub ordered: Option<CheckOutcome>,
}

impl WhistReport {
    /// Every requested check passed.
    pub fn passed(&self) -> bool {
        [&self.basic, &self.zcps, &self.directed, &self.ordered]
            .iter()
            .all(|c| c.as_ref().is_none_or(|c| c.passed))
    }
}

const MAX_REPORTED: usize = 16;

/// Counts of each (ordered) pair of player indices produced by `f` over all
/// games.
fn pair_tally<F>(t: &WhistTournament, f: F) -> Vec<u32>
where
    F: Fn(&WhistGame) -> Vec<(Player, Player)> + Sync + Send,
{
    let u = t.modulus();
    let n = t.v as usize;
    let games: Vec<&WhistGame> = t.rounds.iter().flatten().collect();
    parallel::tally(&games, n * n, |g, acc| {
        for (x, y) in f(g) {
            if x != y {
                acc[x.index(u) * n + y.index(u)] += 1;
            }
        }
    })
}

fn players_in_range(t: &WhistTournament) -> Vec<String> {
    let u = t.modulus();
    let mut notes = Vec::new();
    for (j, r) in t.rounds.iter().enumerate() {
        for g in r {
            if g.0.iter().any(|p| matches!(p, Player::Point(x) if *x >= u)) {
                notes.push(format!(
                    "round {j}: game {:?} uses a player outside Z_{u}",
                    g.0
                ));
            }
        }
    }
    notes
}

fn check_basic(t: &WhistTournament) -> CheckOutcome {
    let v = t.v;
    let u = t.modulus();
    let mut notes = players_in_range(t);
    if !notes.is_empty() {
        return CheckOutcome::from_problems(Vec::new(), notes);
    }
    if v % 4 == 2 || v % 4 == 3 {
        notes.push(format!("{v} players is not 0 or 1 mod 4"));
    }
    if t.has_infinity() && v % 4 != 0 {
        notes.push("∞ plays but v is not 0 mod 4".into());
    }
    let want_rounds = if v % 4 == 0 { v.saturating_sub(1) } else { v };
    if t.rounds.len() as u64 != want_rounds {
        notes.push(format!("{} rounds, expected {want_rounds}", t.rounds.len()));
    }
    let n = v as usize;
    let mut sat_out = vec![0u32; n];
    for (j, r) in t.rounds.iter().enumerate() {
        let mut present = vec![false; n];
        for g in r {
            for p in g.0 {
                let i = p.index(u);
                if present[i] {
                    notes.push(format!("round {j}: player {p} plays twice"));
                }
                present[i] = true;
            }
        }
        let absent: Vec<usize> = (0..n).filter(|&i| !present[i]).collect();
        let allowed = if v % 4 == 1 { 1 } else { 0 };
        if absent.len() != allowed {
            notes.push(format!("round {j}: {} players sit out", absent.len()));
        }
        for i in absent {
            sat_out[i] += 1;
        }
    }
    if v % 4 == 1 {
        for (i, &c) in sat_out.iter().enumerate() {
            if c != 1 {
                notes.push(format!(
                    "player {} sits out {c} rounds",
                    Player::from_index(i, u)
                ));
            }
        }
    }
    let partner = pair_tally(t, |g| g.partners().to_vec());
    let opponent = pair_tally(t, |g| g.opponents().to_vec());
    let mut pairs = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let p = partner[x * n + y] + partner[y * n + x];
            let o = opponent[x * n + y] + opponent[y * n + x];
            if p != 1 || o != 2 {
                pairs.push((Player::from_index(x, u), Player::from_index(y, u)));
            }
        }
    }
    if pairs.len() > MAX_REPORTED {
        notes.push(format!(
            "{} pairs partner or oppose the wrong number of times",
            pairs.len()
        ));
        pairs.truncate(MAX_REPORTED);
    }
    notes.truncate(MAX_REPORTED);
    CheckOutcome::from_problems(pairs, notes)
}

fn check_zcps(t: &WhistTournament) -> CheckOutcome {
    let u = t.modulus();
    let mut notes = Vec::new();
    if !t.is_cyclic() {
        notes.push("rounds are not the cyclic development of round 0".into());
    }
    let mut pairs = Vec::new();
    if let Some(r0) = t.rounds.first() {
        for g in r0 {
            for (x, y) in g.partners() {
                let ok = match (x, y) {
                    (Player::Point(x), Player::Point(y)) => x != y && y == neg_mod(x, u),
                    (Player::Infinity, Player::Point(0)) | (Player::Point(0), Player::Infinity) => {
                        true
                    }
                    _ => false,
                };
                if !ok {
                    pairs.push((x, y));
                }
            }
        }
    }
    CheckOutcome::from_problems(pairs, notes)
}

/// Cyclic case: the listed differences of round 0 must be `Z_u ∖ {0}`.
fn difference_check(
    r0: &[WhistGame],
    u: u64,
    f: fn(&WhistGame) -> [(Player, Player); 4],
) -> CheckOutcome {
    let mut count = vec![0u32; u as usize];
    for g in r0 {
        for (x, y) in f(g) {
            if let (Player::Point(x), Player::Point(y)) = (x, y) {
                count[sub_mod(y, x, u) as usize] += 1;
            }
        }
    }
    let mut notes = Vec::new();
    let missing: Vec<u64> = (1..u).filter(|&z| count[z as usize] == 0).collect();
    let repeated: Vec<u64> = (0..u)
        .filter(|&z| count[z as usize] > u32::from(z != 0))
        .collect();
    if !missing.is_empty() {
        notes.push(format!("differences missing: {missing:?}"));
    }
    if !repeated.is_empty() {
        notes.push(format!("differences repeated: {repeated:?}"));
    }
    CheckOutcome::from_problems(Vec::new(), notes)
}

/// General case: every ordered pair of distinct players exactly once.
fn ordered_pair_check(
    t: &WhistTournament,
    f: fn(&WhistGame) -> [(Player, Player); 4],
) -> CheckOutcome {
    let u = t.modulus();
    let n = t.v as usize;
    let counts = pair_tally(t, |g| f(g).to_vec());
    let mut pairs = Vec::new();
    let mut bad = 0usize;
    for x in 0..n {
        for y in 0..n {
            if x != y && counts[x * n + y] != 1 {
                bad += 1;
                if pairs.len() < MAX_REPORTED {
                    pairs.push((Player::from_index(x, u), Player::from_index(y, u)));
                }
            }
        }
    }
    let notes = if bad > pairs.len() {
        vec![format!(
            "{bad} ordered pairs occur the wrong number of times"
        )]
    } else {
        Vec::new()
    };
    CheckOutcome::from_problems(pairs, notes)
}

/// Checks the requested properties. Directed and ordered conditions are read
/// off the differences of round 0 for cyclic tournaments on `Z_v`, and
/// counted over all games otherwise.
pub fn verify_whist(t: &WhistTournament, checks: WhistChecks) -> WhistReport {
    let range_notes = players_in_range(t);
    let cyclic = t.is_cyclic();
    let shortcut = cyclic && !t.has_infinity() && !checks.force_tally;
    let refinement = |f: fn(&WhistGame) -> [(Player, Player); 4], directed: bool| {
        if !range_notes.is_empty() {
            CheckOutcome::from_problems(Vec::new(), range_notes.clone())
        } else if directed && cyclic && t.has_infinity() {
            CheckOutcome::from_problems(
                Vec::new(),
                vec!["a Z-cyclic tournament on 0 mod 4 players is never directed".into()],
            )
        } else if shortcut {
            difference_check(&t.rounds[0], t.modulus(), f)
        } else {
            ordered_pair_check(t, f)
        }
    };
    WhistReport {
        basic: checks.basic.then(|| check_basic(t)),
        zcps: checks.zcps.then(|| check_zcps(t)),
        directed: checks
            .directed
            .then(|| refinement(WhistGame::directed_pairs, true)),
        ordered: checks
            .ordered
            .then(|| refinement(WhistGame::ordered_pairs, false)),
    }
}

/// A `k × v` array over `Z_v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceMatrix {
    pub k: usize,
    pub v: u64,
    pub rows: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CdmReport {
    pub valid: bool,
    /// Row pairs `(r, s)` whose differences `d_r − d_s` miss some residue.
    pub failing_rows: Vec<(usize, usize)>,
}

pub fn verify_cdm(d: &DifferenceMatrix) -> CdmReport {
    let v = d.v;
    let shape_ok = v > 0
        && d.rows.len() == d.k
        && d.rows
            .iter()
            .all(|r| r.len() as u64 == v && r.iter().all(|&x| x < v));
    if !shape_ok {
        return CdmReport {
            valid: false,
            failing_rows: Vec::new(),
        };
    }
    let mut failing_rows = Vec::new();
    for r in 0..d.k {
        for s in r + 1..d.k {
            let mut seen = vec![false; v as usize];
            for (&a, &b) in d.rows[r].iter().zip(&d.rows[s]) {
                seen[sub_mod(a, b, v) as usize] = true;
            }
            if seen.contains(&false) {
                failing_rows.push((r, s));
            }
        }
    }
    CdmReport {
        valid: failing_rows.is_empty(),
        failing_rows,
    }
}

/// The `5 × (4n + 1)` matrix `[O | A_1 | … | A_n]` where `A_i` has rows
/// `0000`, `abcd`, `bcda`, `cdab`, `dabc` for the `i`-th game.
pub fn cdm_from_round(r0: &[WhistGame], v: u64) -> Result<DifferenceMatrix> {
    if v % 4 != 1 || r0.len() as u64 != (v - 1) / 4 {
        return Err(Error::Precondition(format!(
            "a round of {} games does not match Z_{v}",
            r0.len()
        )));
    }
    let mut points = Vec::with_capacity(r0.len());
    for g in r0 {
        let mut pts = [0u64; 4];
        for (k, p) in g.0.iter().enumerate() {
            match *p {
                Player::Point(x) if x < v => pts[k] = x,
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "game {:?} is not over Z_{v}",
                        g.0
                    )))
                }
            }
        }
        points.push(pts);
    }
    if !difference_check(r0, v, WhistGame::directed_pairs).passed {
        return Err(Error::InvalidInput(
            "round is not the initial round of a directed whist tournament".into(),
        ));
    }
    let mut rows = vec![vec![0u64]; 5];
    for pts in &points {
        rows[0].extend([0; 4]);
        for shift in 0..4 {
            rows[shift + 1].extend((0..4).map(|l| pts[(l + shift) % 4]));
        }
    }
    Ok(DifferenceMatrix { k: 5, v, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CbsecReport {
    pub valid: bool,
    pub bad_blocks: Vec<Vec<u64>>,
    pub contiguous_in_block: Vec<(u64, u64)>,
    pub uncovered: Vec<(u64, u64)>,
    pub repeated: Vec<(u64, u64)>,
}

/// Checks that no block contains two cyclically adjacent points and every
/// other pair lies in exactly one block. Cyclic input lists base blocks,
/// developed into their distinct translates.
pub fn verify_cbsec(v: u64, k: usize, blocks: &[Vec<u64>], cyclic: bool) -> CbsecReport {
    let mut report = CbsecReport::default();
    if v < 3 {
        return report;
    }
    let mut all: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut list = Vec::new();
    for b in blocks {
        let set: BTreeSet<u64> = b.iter().copied().collect();
        if set.len() != k || b.len() != k || set.iter().any(|&x| x >= v) {
            report.bad_blocks.push(b.clone());
            continue;
        }
        if cyclic {
            for j in 0..v {
                let mut t: Vec<u64> = set.iter().map(|&x| add_mod(x, j, v)).collect();
                t.sort_unstable();
                if all.insert(t.clone()) {
                    list.push(t);
                }
            }
        } else {
            list.push(set.into_iter().collect());
        }
    }
    let n = v as usize;
    let mut count = vec![0u32; n * n];
    for b in &list {
        for (i, &x) in b.iter().enumerate() {
            for &y in &b[i + 1..] {
                count[x as usize * n + y as usize] += 1;
            }
        }
    }
    for x in 0..v {
        for y in x + 1..v {
            let c = count[(x * v + y) as usize];
            let contiguous = y == x + 1 || (x == 0 && y == v - 1);
            if contiguous {
                if c > 0 {
                    report.contiguous_in_block.push((x, y));
                }
            } else if c == 0 {
                report.uncovered.push((x, y));
            } else if c > 1 {
                report.repeated.push((x, y));
            }
        }
    }
    report.valid = report.bad_blocks.is_empty()
        && report.contiguous_in_block.is_empty()
        && report.uncovered.is_empty()
        && report.repeated.is_empty();
    report
}
