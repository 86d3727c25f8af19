//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestRunner};
use serde_json::Value as Json;
use wmog_core::assertion::ViewAtom;
use wmog_core::axioms::{check_all, AxiomId};
use wmog_core::litmus::{run_litmus, DEFAULT_CONFIG_CAP};
use wmog_core::model::{BuildOptions, InterfMode, ModelInstance, ScModel, TsoModel};
use wmog_core::obligations::generate;
use wmog_core::oracle::Oracle;
use wmog_core::parser::{parse_litmus, parse_outline};
use wmog_core::relation::{wlp, Relation, StateSet};
use wmog_core::rules::RuleId;
use wmog_core::soundness::check_soundness;
use wmog_core::syntax::{Atomic, Config, ProofOutline};

const AC1_LIMIT: Duration = Duration::from_secs(5);
const AC2_LIMIT: Duration = Duration::from_secs(60);
const AC4_LIMIT: Duration = Duration::from_secs(10);
const AC4_CASES: u32 = 256;
const AC4_MAX_STATES: usize = 6;
const AC5_LIMIT: Duration = Duration::from_secs(600);

type Verdict = Result<String, String>;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> String {
    std::fs::read_to_string(root().join("corpus").join(name)).unwrap()
}

/// Runs the binary; returns exit code, stdout and wall time.
fn wmog(args: &[&str]) -> (i32, String, Duration) {
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_wmog")).args(args).current_dir(root()).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8(o.stdout).unwrap(), t.elapsed())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn table_rows() -> Vec<BTreeSet<RuleId>> {
    use RuleId::*;
    let rows: [&[RuleId]; 31] = [
        &[True],
        &[Read1, ReadReg, Read3, ConRead1],
        &[True],
        &[ReadReg, ConRead2],
        &[ReadReg, Read3],
        &[Write1, WriteReg, ConWrite1],
        &[Write1, WriteReg],
        &[True],
        &[WriteReg],
        &[WriteReg],
        &[WriteReg],
        &[Read1, Read3],
        &[True],
        &[Read1],
        &[ReadReg],
        &[ReadReg],
        &[Write1, Write4, WriteReg],
        &[True],
        &[WriteReg, ConWrite2],
        &[WriteReg],
        &[WriteReg],
        &[Read1, ReadReg],
        &[True],
        &[Read1, Read2],
        &[Read1, ReadReg, Read2],
        &[True],
        &[Read1, ReadReg],
        &[True],
        &[Read1, ReadReg],
        &[Read1, ReadReg],
        &[True],
    ];
    rows.iter().map(|r| r.iter().copied().collect()).collect()
}

fn ac1() -> Verdict {
    let (code, out, time) = wmog(&["check", "corpus/wrc.outline", "--json", "-"]);
    ensure(code == 0, format!("exit {code}"))?;
    let v: Json = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let c = &v["counts"];
    let counts = (c["local"].as_u64(), c["global"].as_u64(), c["plumbing"].as_u64(), c["entailments"].as_u64());
    ensure(counts == (Some(5), Some(26), Some(0), Some(4)), format!("counts {counts:?}"))?;
    let ok = |x: &Json| x["status"] == "Discharged";
    let triples = v["triples"].as_array().unwrap();
    let ents = v["entailments"].as_array().unwrap();
    ensure(triples.iter().all(ok) && ents.iter().all(ok), "some obligation not discharged")?;
    let union: BTreeSet<AxiomId> =
        v["axiom_union"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().parse().unwrap()).collect();
    use AxiomId::*;
    let expected: BTreeSet<AxiomId> = [C2, C3, C4, SV1, SV2, RW2, RW3, RW5, RW6, RW7, MP].into();
    ensure(union == expected, format!("axiom union {union:?}"))?;
    for (row, want) in triples.iter().zip(table_rows()) {
        let got: BTreeSet<RuleId> = row["rules"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r.as_str().unwrap().parse::<RuleId>().unwrap())
            .filter(|r| !r.is_glue() && !r.is_fact())
            .collect();
        ensure(got.is_superset(&want), format!("{} uses {got:?}, table has {want:?}", row["id"]))?;
    }
    ensure(time < AC1_LIMIT, format!("took {time:?}"))?;
    Ok(format!("31 triples + 4 entailments, union of 11 axioms, table rows covered, {:.2} s < 5 s", time.as_secs_f64()))
}

fn satisfied(out: &str) -> Result<(usize, usize), String> {
    let v: Json = serde_json::from_str(out).map_err(|e| e.to_string())?;
    let r = v["results"].as_array().ok_or("no results")?;
    Ok((r.iter().filter(|x| x["holds"] == true).count(), v["states"].as_u64().unwrap_or(0) as usize))
}

fn ac2() -> Verdict {
    let (code, out, time) =
        wmog(&["axioms", "--model", "sc", "--values", "0,1", "--threads", "3", "--globals", "x,y", "--json", "-"]);
    let (sc, states) = satisfied(&out)?;
    ensure(code == 0 && sc == 15 && states == 32, format!("sc: exit {code}, {sc}/15, {states} states"))?;
    ensure(time < AC2_LIMIT, format!("sc took {time:?}"))?;
    let (code, out, time_tso) = wmog(&["axioms", "--model", "tso", "--buffer-bound", "1", "--json", "-"]);
    let (tso, tso_states) = satisfied(&out)?;
    ensure(code == 0 && tso == 15, format!("tso1: exit {code}, {tso}/15"))?;
    Ok(format!(
        "sc 15/15 over 32 states in {:.2} s < 60 s; tso1 15/15 over {tso_states} states in {:.2} s",
        time.as_secs_f64(),
        time_tso.as_secs_f64()
    ))
}

fn ac3() -> Verdict {
    let (code, out, _) = wmog(&["check", "corpus/wrc.outline", "--json", "-"]);
    ensure(code == 0, "wrc not discharged")?;
    let v: Json = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let discharged: BTreeSet<String> = v["triples"]
        .as_array()
        .unwrap()
        .iter()
        .chain(v["entailments"].as_array().unwrap())
        .filter(|r| r["status"] == "Discharged")
        .map(|r| r["id"].as_str().unwrap().to_string())
        .collect();
    for model in [["--model", "sc", "--buffer-bound", "1"], ["--model", "tso", "--buffer-bound", "1"]] {
        let mut args = vec!["oracle", "corpus/wrc.outline", "--json", "-"];
        args.extend(model);
        let (_, out, _) = wmog(&args);
        let o: Json = serde_json::from_str(&out).map_err(|e| e.to_string())?;
        let rows = o["triples"].as_array().unwrap().iter().chain(o["entailments"].as_array().unwrap());
        let diverging: Vec<&str> = rows
            .filter(|r| discharged.contains(r["id"].as_str().unwrap()) && r["holds"] != true)
            .map(|r| r["id"].as_str().unwrap())
            .collect();
        ensure(diverging.is_empty(), format!("{}: {diverging:?} discharged but semantically false", o["model"]))?;
    }
    let (code, _, _) = wmog(&["check", "corpus/wrc-broken.outline"]);
    ensure(code == 1, format!("wrc-broken check exit {code}"))?;
    let mut witnesses = Vec::new();
    for m in ["sc", "tso"] {
        let (code, out, _) = wmog(&["oracle", "corpus/wrc-broken.outline", "--model", m, "--buffer-bound", "1"]);
        let line = out.lines().find(|l| l.contains("counterexample")).map(str::to_string);
        ensure(code == 1 && line.is_some(), format!("wrc-broken on {m}: exit {code}, no counterexample"))?;
        witnesses.push(line.unwrap());
    }
    Ok(format!("{} discharged rows hold on sc and tso1; wrc-broken fails ({})", discharged.len(), witnesses[0].trim()))
}

fn ac4() -> Verdict {
    let start = Instant::now();
    let rel = |n: usize| {
        proptest::collection::vec(any::<bool>(), n * n)
            .prop_map(move |b| Relation::from_pairs(n, (0..n * n).filter(|&i| b[i]).map(|i| (i / n, i % n))))
    };
    let set = |n: usize| proptest::collection::vec(any::<bool>(), n).prop_map(move |b| StateSet::from_fn(n, |i| b[i]));
    let strategy = (1..=AC4_MAX_STATES).prop_flat_map(move |n| (rel(n), rel(n), set(n), set(n)));
    let mut runner =
        TestRunner::new(RunnerConfig { cases: AC4_CASES, failure_persistence: None, ..RunnerConfig::default() });
    let cases = std::sync::atomic::AtomicU32::new(0);
    let result = runner.run(&strategy, |(r, r2, p, q)| {
        cases.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let n = r.universe();
        let full = StateSet::full(n);
        prop_assert_eq!(wlp(&r, &full), full.clone(), "non-aborting");
        let sub = Relation::from_pairs(n, r.pairs().filter(|&(a, b)| r2.contains(a, b)));
        prop_assert!(wlp(&r, &p).is_subset(&wlp(&sub, &p.union(&q))), "anti-monotonicity");
        prop_assert_eq!(wlp(&r, &wlp(&r2, &p)), wlp(&r.compose(&r2), &p), "composition");
        prop_assert!(r.image(&wlp(&r, &p)).is_subset(&p), "relation application");
        prop_assert_eq!(wlp(&r, &p).intersection(&wlp(&r, &q)), wlp(&r, &p.intersection(&q)), "conjunctivity");
        prop_assert!(wlp(&r, &p).union(&wlp(&r, &q)).is_subset(&wlp(&r, &p.union(&q))), "disjunctivity");
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    let time = start.elapsed();
    let cases = cases.into_inner();
    ensure(cases >= 200, format!("only {cases} cases"))?;
    ensure(time < AC4_LIMIT, format!("took {time:?}"))?;
    Ok(format!("6 laws on {cases} instances (<= {AC4_MAX_STATES} states) in {:.3} s", time.as_secs_f64()))
}

struct Models {
    config: Config,
    sc: ModelInstance,
    tso: ModelInstance,
}

fn ac5(m: &Models) -> Verdict {
    let start = Instant::now();
    let c = &m.config;
    let extra = [
        ModelInstance::build(
            &ScModel::new(c.clone()),
            &BuildOptions { interf: InterfMode::Default, ..Default::default() },
        )
        .unwrap(),
        ModelInstance::build(&TsoModel::with_trivial_vmax(c.clone(), 1).unwrap(), &BuildOptions::default()).unwrap(),
    ];
    let all: Vec<&ModelInstance> = [&m.sc, &m.tso].into_iter().chain(&extra).collect();
    let pairs: Vec<(&ModelInstance, BTreeSet<AxiomId>)> = all.iter().map(|x| (*x, check_all(x).satisfied())).collect();
    let report = check_soundness(c, &pairs);
    let time = start.elapsed();
    ensure(report.uninstantiated.is_empty(), format!("no instances for {:?}", report.uninstantiated))?;
    if let Some(v) = report.violations.first() {
        return Err(format!(
            "{} violations, first: {} on {}: {}",
            report.violations.len(),
            v.rule,
            v.model,
            v.instance
        ));
    }
    ensure(time < AC5_LIMIT, format!("took {time:?}"))?;
    Ok(format!("{} instance checks on 4 models, 0 violations, {:.1} s < 600 s", report.checked, time.as_secs_f64()))
}

fn ac6(m: &Models, wrc: &ProofOutline) -> Verdict {
    let c = &m.config;
    let mut cmds = vec![Atomic::Fence];
    for r in &c.registers {
        for x in &c.globals {
            for sync in [false, true] {
                cmds.push(Atomic::Read { reg: r.name.clone(), var: x.clone(), sync });
            }
        }
    }
    let mut inclusions = 0;
    let mut pairs = 0;
    let set = generate(wrc);
    for inst in [&m.sc, &m.tso] {
        let o = Oracle::new(inst);
        for atom in ViewAtom::enumerate(c) {
            let p = o.atom(&atom);
            for &t in &c.threads {
                for cmd in &cmds {
                    let w = o.wlp_command(t, cmd, &p).map_err(|e| e.to_string())?;
                    ensure(p.is_subset(&w), format!("{atom} not preserved by {cmd} of {t} on {}", inst.name))?;
                    inclusions += 1;
                }
            }
        }
        for g in set.global_triples.iter().filter(|g| matches!(g.command, Atomic::Fence | Atomic::Read { .. })) {
            if g.post.is_global() {
                o.check_triple(&g.pre, g.thread, &g.command, &g.post).map_err(|e| format!("{}: {e}", g.post))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{inclusions} atom inclusions on sc and tso1; {pairs} Global (R, fence/read) suite pairs hold"))
}

fn ac7(m: &Models) -> Verdict {
    ensure(Relation::identity(m.sc.states.len()).is_subset(&m.sc.beta), "identity not in sc beta")?;
    let flush = m.tso.internal.star();
    ensure(flush.is_subset(&m.tso.beta), "flush closure not in tso beta")?;
    for inst in [&m.sc, &m.tso] {
        for &t in &inst.config.threads {
            for a in 0..inst.actions.len() {
                let tr = inst.trans_at(t, a);
                ensure(
                    inst.beta.compose(tr).is_subset(&tr.compose(&inst.beta)),
                    format!("semi-commutation on {}", inst.name),
                )?;
                let v = inst.vmax_at(t, a);
                ensure(v.is_subset(&wlp(&inst.beta, v)), format!("view maximality on {}", inst.name))?;
            }
        }
    }
    // A pair outside beta cannot be added back without breaking a condition.
    let n = m.tso.states.len();
    let (s1, s2) = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .find(|&(a, b)| !m.tso.beta.contains(a, b))
        .ok_or("tso beta is total")?;
    let breaks = m.tso.config.threads.iter().any(|&t| {
        (0..m.tso.actions.len()).any(|a| {
            let tr = m.tso.trans_at(t, a);
            let v = m.tso.vmax_at(t, a);
            (v.contains(s1) && !v.contains(s2))
                || tr.succ(s2).iter().any(|&s3| {
                    !tr.succ(s1)
                        .iter()
                        .any(|&p| m.tso.beta.contains(p as usize, s3 as usize) || (p as usize, s3 as usize) == (s1, s2))
                })
        })
    });
    ensure(breaks, format!("removed pair ({s1},{s2}) is admissible"))?;
    Ok(format!(
        "id <= beta(sc, {} pairs); flush* ({} pairs) <= beta(tso1, {} pairs); both conditions re-checked",
        m.sc.beta.len(),
        flush.len(),
        m.tso.beta.len()
    ))
}

fn ac8(wrc: &ProofOutline) -> Verdict {
    let bad =
        |o: &wmog_core::litmus::Outcome| o.registers["r1"] == 1 && o.registers["r2"] == 1 && o.registers["r3"] != 1;
    let c = &wrc.config;
    for (name, report) in [
        ("sc", run_litmus(wrc, &ScModel::new(c.clone()), DEFAULT_CONFIG_CAP)),
        ("tso2", run_litmus(wrc, &TsoModel::new(c.clone(), 2).unwrap(), DEFAULT_CONFIG_CAP)),
    ] {
        let report = report.map_err(|e| format!("{name}: {e}"))?;
        ensure(!report.outcomes.iter().any(bad), format!("WRC forbidden outcome on {name}"))?;
    }
    let sb = parse_litmus(&corpus("sb.litmus")).map_err(|e| e.message)?;
    let sc = run_litmus(&sb, &ScModel::new(sb.config.clone()), DEFAULT_CONFIG_CAP).map_err(|e| e.to_string())?;
    let tso = run_litmus(&sb, &TsoModel::new(sb.config.clone(), 2).unwrap(), DEFAULT_CONFIG_CAP)
        .map_err(|e| e.to_string())?;
    let zero = [("r1", 0), ("r2", 0)];
    ensure(!sc.reachable(&zero), "SB (0,0) reachable on sc")?;
    ensure(tso.reachable(&zero), "SB (0,0) unreachable on tso")?;
    Ok("WRC r1=1,r2=1,r3!=1 unreachable on sc and tso2; SB (0,0) on tso2 only".into())
}

fn main() {
    let wrc = parse_outline(&corpus("wrc.outline")).expect("wrc parses");
    let models = Models {
        config: wrc.config.clone(),
        sc: ModelInstance::build_sc(&wrc.config).unwrap(),
        tso: ModelInstance::build_tso(&wrc.config, 1).unwrap(),
    };
    let results: Vec<(&str, Verdict)> = vec![
        ("AC1", ac1()),
        ("AC2", ac2()),
        ("AC3", ac3()),
        ("AC4", ac4()),
        ("AC5", ac5(&models)),
        ("AC6", ac6(&models, &wrc)),
        ("AC7", ac7(&models)),
        ("AC8", ac8(&wrc)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("{name} PASS  {detail}"),
            Err(why) => {
                failed += 1;
                println!("{name} FAIL  {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
