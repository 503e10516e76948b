use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use designforge::catalog::Catalog;
use designforge::construct::{
    aps_with_params, compose_ps_aps, cyclotomic_pps, find_aps, inflate, ps_product, silver_aps,
    silver_pps_p2, union_pps_pq, SilverWitness,
};
use designforge::designs::{
    cdm_from_round, develop_rounds, initial_round, verify_cdm, verify_whist, DifferenceMatrix,
    WhistChecks, WhistTournament,
};
use designforge::kramer_mesner::{km_search, suggest_multiplier, MultiplierGroup, SolveBudget};
use designforge::modarith::{mod_sqrt, mul_mod, reduce_signed};
use designforge::ooc::{
    is_maximal, maximal_ooc_p_squared, maximal_ooc_pq, maximum_ooc_45, maximum_ooc_from_pairs,
    verify_ooc, OoCode,
};
use designforge::pps::{admissible_params, admissible_witness, nonexistence_case, SpecJson};
use designforge::{
    exhaustive_search, infer_params, verify_pps, Classification, ExhaustiveBudget, PairSet, PpsSpec,
};

use crate::io::{
    emit_set, label_of, pair_lines, print_json, read_json, read_pairs, read_wrapped, spec_json,
};
use crate::{
    CatalogArgs, CdmCmd, CheckArgs, Cli, Command, ConstructCmd, OocCmd, Outcome, SearchCmd,
    SpecArgs, SpecKind, VerifyArgs, WhistCmd,
};

pub fn run(cli: &Cli) -> Result<Outcome> {
    let j = cli.json;
    match &cli.command {
        Command::Verify(a) => verify(j, a),
        Command::Search(c) => search(j, c),
        Command::Construct(c) => construct(j, c),
        Command::Whist(c) => whist(j, c),
        Command::Cdm(c) => cdm(j, c),
        Command::Ooc(c) => ooc(j, c),
        Command::Catalog(a) => catalog(j, a),
    }
}

fn resolve_spec(
    v: u64,
    kind: SpecKind,
    alpha: Option<i64>,
    beta: Option<i64>,
    a1: &[i64],
    a2: &[i64],
) -> Result<PpsSpec> {
    Ok(match kind {
        SpecKind::Ps => PpsSpec::ps(v)?,
        SpecKind::Aps => {
            let (Some(a), Some(b)) = (alpha, beta) else {
                bail!("--type aps needs --alpha and --beta");
            };
            PpsSpec::aps(v, reduce_signed(a, v), reduce_signed(b, v))?
        }
        SpecKind::Pps => {
            if a1.is_empty() || a2.is_empty() {
                bail!("--type pps needs --a1 and --a2");
            }
            PpsSpec::new(
                v,
                a1.iter().map(|&a| reduce_signed(a, v)),
                a2.iter().map(|&a| reduce_signed(a, v)),
            )?
        }
    })
}

fn spec_from_args(v: u64, s: &SpecArgs) -> Result<PpsSpec> {
    resolve_spec(v, s.kind, s.alpha, s.beta, &s.a1, &s.a2)
}

fn verify(j: bool, a: &VerifyArgs) -> Result<Outcome> {
    let set = read_pairs(&a.file)?;
    let v = set.v();
    let spec = if let Some(path) = &a.spec_file {
        Some(read_json::<SpecJson>(path)?.resolve(v)?)
    } else if let Some(kind) = a.kind {
        Some(resolve_spec(v, kind, a.alpha, a.beta, &a.a1, &a.a2)?)
    } else {
        None
    };
    let Some(spec) = spec else {
        let label = infer_params(&set);
        let ok = label != Classification::Invalid;
        if j {
            print_json(&json!({ "valid": ok, "inferred": label }));
        } else {
            println!("{}: {label:?}", if ok { "valid" } else { "invalid" });
        }
        return Ok(if ok {
            Outcome::Success
        } else {
            Outcome::Failed
        });
    };
    let report = verify_pps(&set, &spec);
    if j {
        print_json(&json!({ "spec": spec_json(&spec), "report": report }));
    } else {
        println!(
            "{:?} over Z_{v}: {}",
            spec.label(),
            if report.valid { "valid" } else { "invalid" }
        );
        for (name, list) in [
            ("elements missing", &report.cover1_missing),
            ("elements repeated", &report.cover1_repeated),
            ("sums/differences missing", &report.cover2_missing),
            ("sums/differences repeated", &report.cover2_repeated),
        ] {
            if !list.is_empty() {
                println!("  {name}: {list:?}");
            }
        }
    }
    Ok(if report.valid {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn search(j: bool, c: &SearchCmd) -> Result<Outcome> {
    match c {
        SearchCmd::Km {
            v,
            spec,
            multiplier,
            suggest,
            budget_secs,
        } => {
            let spec = spec_from_args(*v, spec)?;
            let gens = if *suggest {
                vec![suggest_multiplier(*v)
                    .ok_or_else(|| anyhow!("no multiplier suggestion for {v}"))?]
            } else {
                multiplier.clone()
            };
            let h = MultiplierGroup::with_negation(*v, &gens)?;
            let found = km_search(&h, &spec, SolveBudget::seconds(*budget_secs))?;
            let extra = json!({ "multiplier": h.generators(), "group_order": h.order() });
            finish_search(j, found, &spec, extra)
        }
        SearchCmd::Exhaustive { v, spec, max_nodes } => {
            let spec = spec_from_args(*v, spec)?;
            let mut budget = ExhaustiveBudget::default();
            if let Some(n) = max_nodes {
                budget.max_nodes = *n;
            }
            let found = exhaustive_search(&spec, budget)?;
            finish_search(j, found, &spec, json!({}))
        }
        SearchCmd::Admissible { v, witness } => {
            let case = nonexistence_case(*v)?;
            let value = if let Some(case) = case {
                json!({ "v": v, "exists": false, "reason": case })
            } else if *witness {
                json!({ "v": v, "witness": admissible_witness(*v)? })
            } else {
                json!({ "v": v, "params": admissible_params(*v)? })
            };
            if j {
                print_json(&value);
            } else if let Some(case) = case {
                println!("no APS({v}): {case:?}");
            } else {
                let params = value
                    .get("params")
                    .or_else(|| value.get("witness"))
                    .cloned()
                    .unwrap_or(Value::Null);
                println!("admissible (α, β) for v = {v}: {params}");
            }
            Ok(
                if case.is_some() || value.get("witness").is_some_and(Value::is_null) {
                    Outcome::Exhausted
                } else {
                    Outcome::Success
                },
            )
        }
    }
}

fn finish_search(j: bool, found: Option<PairSet>, spec: &PpsSpec, extra: Value) -> Result<Outcome> {
    match found {
        Some(set) => {
            emit_set(j, &set, spec, extra);
            Ok(Outcome::Success)
        }
        None => {
            if j {
                print_json(&json!({ "found": false, "spec": spec_json(spec) }));
            } else {
                println!("no {:?} exists within the search space", spec.label());
            }
            Ok(Outcome::Exhausted)
        }
    }
}

fn witness_json(w: &SilverWitness) -> Value {
    json!({ "theta": w.theta, "root": w.root(), "modulus": w.modulus, "generates": w.generates })
}

fn construct(j: bool, c: &ConstructCmd) -> Result<Outcome> {
    let (built, extra) = match c {
        ConstructCmd::Silver { p } => {
            let (c, w) = silver_aps(*p)?;
            (c, json!({ "witness": witness_json(&w) }))
        }
        ConstructCmd::SilverScaled { p, alpha, beta } => {
            (aps_with_params(*p, *alpha, *beta)?, json!({}))
        }
        ConstructCmd::SilverSquare { p, alpha, beta } => {
            let m = p.checked_mul(*p).ok_or_else(|| anyhow!("p too large"))?;
            let beta = match beta {
                Some(b) => *b,
                None => mul_mod(
                    mod_sqrt(2, m)?.ok_or_else(|| anyhow!("2 is not a square mod {m}"))?,
                    *alpha,
                    m,
                ),
            };
            let (c, w) = silver_pps_p2(*p, *alpha, beta)?;
            (c, json!({ "witness": witness_json(&w) }))
        }
        ConstructCmd::Aps { v } => (find_aps(*v, ExhaustiveBudget::default())?, json!({})),
        ConstructCmd::Cyclotomic { p, q } => (cyclotomic_pps(*p, *q)?, json!({})),
        ConstructCmd::Product { left, right } => (
            ps_product(&read_pairs(left)?, &read_pairs(right)?)?,
            json!({}),
        ),
        ConstructCmd::Compose { ps, aps } => (
            compose_ps_aps(&read_pairs(ps)?, &read_pairs(aps)?)?,
            json!({}),
        ),
        ConstructCmd::Inflate { file, u } => {
            let set = read_pairs(file)?;
            let spec = inferred_spec(&set)?;
            (inflate(&set, &spec, *u)?, json!({}))
        }
        ConstructCmd::Union { p, q, left, right } => (
            union_pps_pq(*p, *q, &read_pairs(left)?, &read_pairs(right)?)?,
            json!({}),
        ),
    };
    emit_set(j, &built.set, &built.spec, extra);
    Ok(Outcome::Success)
}

fn inferred_spec(set: &PairSet) -> Result<PpsSpec> {
    Ok(match infer_params(set) {
        Classification::Ps => PpsSpec::ps(set.v())?,
        Classification::Aps { alpha, beta } => PpsSpec::aps(set.v(), alpha, beta)?,
        Classification::Pps { a1, a2 } => PpsSpec::new(set.v(), a1, a2)?,
        Classification::Invalid => bail!("the input set is not a PPS of any kind"),
    })
}

fn checks_from(args: &CheckArgs, base: WhistChecks) -> WhistChecks {
    WhistChecks {
        basic: true,
        zcps: base.zcps || args.zcps,
        directed: base.directed || args.directed,
        ordered: base.ordered || args.ordered,
        force_tally: args.force_tally,
    }
}

fn whist(j: bool, c: &WhistCmd) -> Result<Outcome> {
    let (t, checks, r0) = match c {
        WhistCmd::FromPairs {
            file,
            alpha,
            checks,
            rounds,
        } => {
            let set = read_pairs(file)?;
            let alpha = match (alpha, infer_params(&set)) {
                (Some(a), _) => Some(*a),
                (None, Classification::Ps) => None,
                (None, Classification::Aps { alpha, beta }) if alpha == beta => Some(alpha),
                (None, other) => bail!("need a PS or an APS(v, α, α), found {other:?}"),
            };
            let r0 = initial_round(&set, alpha)?;
            let t = develop_rounds(&r0, set.v());
            let r0 = if *rounds { None } else { Some(r0) };
            (t, checks_from(checks, WhistChecks::basic_zcps()), r0)
        }
        WhistCmd::Verify { file, checks } => {
            let t: WhistTournament = read_wrapped(file, "tournament")?;
            (t, checks_from(checks, WhistChecks::default()), None)
        }
    };
    let report = verify_whist(&t, checks);
    let ok = report.passed();
    if j {
        let shown = match &r0 {
            Some(r0) => json!({ "v": t.v, "initial_round": r0 }),
            None => serde_json::to_value(&t)?,
        };
        print_json(&json!({ "tournament": shown, "passed": ok, "report": report }));
    } else {
        println!(
            "Wh({}) with {} rounds: {}",
            t.v,
            t.rounds.len(),
            if ok { "passed" } else { "failed" }
        );
        for (name, o) in [
            ("basic", &report.basic),
            ("zcps", &report.zcps),
            ("directed", &report.directed),
            ("ordered", &report.ordered),
        ] {
            if let Some(o) = o {
                println!("  {name}: {}", if o.passed { "ok" } else { "FAIL" });
                for n in &o.notes {
                    println!("    {n}");
                }
            }
        }
        let games = r0.as_ref().or(t.rounds.first());
        if let Some(games) = games {
            let shown: Vec<String> = games
                .iter()
                .map(|g| format!("({}, {}, {}, {})", g.0[0], g.0[1], g.0[2], g.0[3]))
                .collect();
            println!("round 0: {}", shown.join(" "));
        }
    }
    Ok(if ok {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn cdm(j: bool, c: &CdmCmd) -> Result<Outcome> {
    let d: DifferenceMatrix = match c {
        CdmCmd::FromPairs { file } => {
            let set = read_pairs(file)?;
            let r0 = initial_round(&set, None)?;
            cdm_from_round(&r0, set.v())?
        }
        CdmCmd::Verify { file } => read_wrapped(file, "matrix")?,
    };
    let report = verify_cdm(&d);
    if j {
        print_json(&json!({ "matrix": d, "report": report }));
    } else {
        println!(
            "({}, {}) difference matrix: {}",
            d.k,
            d.v,
            if report.valid { "valid" } else { "invalid" }
        );
        if !report.failing_rows.is_empty() {
            println!("  failing row pairs: {:?}", report.failing_rows);
        }
        for r in &d.rows {
            println!(
                "  {}",
                r.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
            );
        }
    }
    Ok(if report.valid {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn ooc(j: bool, c: &OocCmd) -> Result<Outcome> {
    let (code, want_maximal) = match c {
        OocCmd::Templates { file, k } => (maximum_ooc_from_pairs(&read_pairs(file)?, *k)?, false),
        OocCmd::FortyFive { file } => (maximum_ooc_45(&read_pairs(file)?)?, false),
        OocCmd::Pq {
            p,
            q,
            left,
            right,
            k,
        } => (
            maximal_ooc_pq(*p, *q, &read_pairs(left)?, &read_pairs(right)?, *k)?,
            true,
        ),
        OocCmd::PSquared { p, k } => (maximal_ooc_p_squared(*p, *k)?, true),
        OocCmd::Verify { file, maximal } => (read_wrapped::<OoCode>(file, "code")?, *maximal),
    };
    let report = verify_ooc(&code);
    let maximality = if want_maximal && report.differences_distinct && report.well_formed {
        Some(is_maximal(&code).context("deciding maximality")?)
    } else {
        None
    };
    let ok = report.well_formed
        && report.differences_distinct
        && maximality.as_ref().is_none_or(|m| m.maximal);
    if j {
        print_json(&json!({ "code": code, "report": report, "maximality": maximality }));
    } else {
        println!(
            "({}, {}, 1) code with {} codewords (bound {}): {}",
            code.n,
            code.k,
            report.codewords,
            report.max_codewords,
            if report.differences_distinct {
                "differences distinct"
            } else {
                "REPEATED differences"
            }
        );
        println!("  leave ({}): {:?}", report.leave.len(), report.leave);
        println!("  maximum: {}", report.is_maximum);
        if let Some(m) = &maximality {
            println!("  maximal: {}", m.maximal);
            if let Some(w) = &m.witness {
                println!("  extendable by {w:?}");
            }
        }
        for w in &code.codewords {
            println!("  {w:?}");
        }
    }
    Ok(if ok {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn catalog(j: bool, a: &CatalogArgs) -> Result<Outcome> {
    let cat = Catalog::embedded()?;
    if a.check {
        let results = cat.check_all();
        let ok = results.iter().all(|r| r.ok);
        if j {
            print_json(&json!({ "passed": ok, "entries": results }));
        } else {
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.ok { "ok  " } else { "FAIL" },
                    r.id,
                    r.detail
                );
            }
        }
        return Ok(if ok {
            Outcome::Success
        } else {
            Outcome::Failed
        });
    }
    if let Some(id) = &a.id {
        let e = cat.get(id)?;
        let check = e.check();
        if j {
            let mut v = serde_json::to_value(e)?;
            if let Ok(set) = e.pair_set() {
                v["set"] = serde_json::to_value(&set)?;
                v["label"] = label_of(&set);
            }
            v["check"] = serde_json::to_value(&check)?;
            print_json(&v);
        } else {
            println!("{} ({:?}): {}", e.id, e.kind, e.provenance);
            println!(
                "{}: {}",
                if check.ok { "verifies" } else { "FAILS" },
                check.detail
            );
            if let Ok(set) = e.pair_set() {
                println!("{}", pair_lines(&set));
            }
            if let Some(p) = &e.primes {
                println!("{p:?}");
            }
        }
        return Ok(if check.ok {
            Outcome::Success
        } else {
            Outcome::Failed
        });
    }
    if j {
        let list: Vec<Value> = cat
            .entries
            .iter()
            .map(|e| json!({ "id": e.id, "kind": e.kind, "params": e.params, "provenance": e.provenance }))
            .collect();
        print_json(&Value::Array(list));
    } else {
        for e in &cat.entries {
            println!(
                "{:<22} {:<7} {}",
                e.id,
                format!("{:?}", e.kind),
                e.provenance
            );
        }
    }
    Ok(Outcome::Success)
}
