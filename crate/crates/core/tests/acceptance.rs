//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smd2cpn::cpn::{explore, Simulator};
use smd2cpn::emit::{parse_cpn_xml, to_cpn_xml};
use smd2cpn::mutate::{mutants, MutationKind};
use smd2cpn::oracle::{check_trace_equivalence, Verdict};
use smd2cpn::smd::{Machine, StateKind};
use smd2cpn::smdl;
use smd2cpn::translate::{check_control_safety, translate, Occurrence, Segment, TranslationConfig};

use common::gen::{hierarchy, machine, Shape};
use common::naive::{labels, Naive};

const CD_PLAYER_LIMIT: Duration = Duration::from_secs(1);
const CORPUS_LIMIT: Duration = Duration::from_secs(1);
const LARGE_LIMIT: Duration = Duration::from_secs(5);
const LARGE_STATES: usize = 1000;
const LARGE_DEPTH: usize = 10;
const LARGE_RUNS: usize = 3;
const MARKING_CAP: usize = 100_000;
const MIN_SAFETY_MODELS: usize = 6;
const EQUIV_DEPTH: usize = 6;
/// Completing `Busy` in the CD player takes more than six moves.
const MUTANT_DEPTH: usize = 8;
const RANDOM_NETS: u64 = 50;
const HIERARCHIES: u64 = 200;
const MAX_HIERARCHY_STATES: usize = 50;
const HIERARCHY_LIMIT: Duration = Duration::from_secs(10);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cd_player() -> Machine {
    let text = std::fs::read_to_string(common::corpus_dir().join("cdplayer.smdl")).unwrap();
    smdl::load(&text).unwrap()
}

fn structure() -> Outcome {
    let m = cd_player();
    let start = Instant::now();
    let (net, map) = translate(&m, &TranslationConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(net.place("P_Busy__F").is_some(), || "no Busy__F place".into())?;
    ensure(net.place("P_Busy__H").is_some(), || "no Busy__H place".into())?;
    let fts_entries = map
        .behaviour_trans
        .iter()
        .filter(|(occ, _)| {
            matches!(occ, Occurrence::Chain { segment: Segment::Shared | Segment::Restore { .. }, .. })
        })
        .filter(|(_, t)| net.transition(t).and_then(|t| t.observable.as_deref()) == Some("FTS"))
        .count();
    ensure(fts_entries > 0, || "no FTS entry transition".into())?;
    let nonplaying: Vec<String> = net
        .places
        .iter()
        .map(|p| format!("{} {}", p.id, p.name))
        .chain(net.transitions.iter().map(|t| format!("{} {}", t.id, t.name)))
        .filter(|s| s.to_lowercase().contains("nonplaying"))
        .collect();
    ensure(nonplaying.is_empty(), || format!("NONPLAYING nodes: {nonplaying:?}"))?;
    ensure(elapsed < CD_PLAYER_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{fts_entries} FTS entry transitions, {elapsed:.2?}"))
}

fn performance() -> Outcome {
    let mut slowest = Duration::ZERO;
    for (name, m) in common::corpus_machines() {
        let start = Instant::now();
        translate(&m, &TranslationConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        let elapsed = start.elapsed();
        ensure(elapsed < CORPUS_LIMIT, || format!("{name} took {elapsed:?}"))?;
        slowest = slowest.max(elapsed);
    }
    let shape = Shape {
        states: LARGE_STATES,
        depth: LARGE_DEPTH,
        transitions: LARGE_STATES,
        events: 8,
        variables: 2,
    };
    let large = Machine::new(machine(1, shape)).map_err(|e| format!("{e:?}"))?;
    let depth = large.state_ids().map(|s| large.depth(s) + 1).max().unwrap_or(0);
    let named = large.state_ids().filter(|&s| large.kind(s) != StateKind::Final).count();
    ensure(named == LARGE_STATES && depth == LARGE_DEPTH, || {
        format!("generated {named} states at depth {depth}")
    })?;
    let mut runs: Vec<Duration> = (0..LARGE_RUNS)
        .map(|_| {
            let start = Instant::now();
            translate(&large, &TranslationConfig::default()).expect("large model translates");
            start.elapsed()
        })
        .collect();
    runs.sort();
    let median = runs[LARGE_RUNS / 2];
    ensure(median < LARGE_LIMIT, || format!("large median {median:?}"))?;
    Ok(format!("slowest corpus model {slowest:.2?}, {LARGE_STATES}-state depth-{LARGE_DEPTH} median {median:.2?}"))
}

fn features(m: &Machine) -> BTreeSet<&'static str> {
    let mut out = BTreeSet::new();
    let model = m.model();
    if m.composites().next().is_none() {
        out.insert("flat");
    }
    if m.state_ids().any(|s| m.depth(s) + 1 >= 3) {
        out.insert("depth 3");
    }
    let parent = |name: &str| m.id(name).ok().and_then(|s| m.parent(s));
    if model.transitions.iter().any(|t| parent(&t.source) != parent(t.target.state_name())) {
        out.insert("inter-level");
    }
    if !model.variables.is_empty() && model.transitions.iter().any(|t| t.guard.is_some()) {
        out.insert("guard+variable");
    }
    if model.transitions.iter().any(Machine::is_history_target) {
        out.insert("history");
    }
    let completion = model
        .transitions
        .iter()
        .any(|t| t.trigger.is_none() && m.id(&t.source).is_ok_and(|s| m.kind(s) == StateKind::Composite));
    if completion && m.state_ids().any(|s| m.kind(s) == StateKind::Final) {
        out.insert("final/completion");
    }
    out
}

fn safety() -> Outcome {
    let mut covered = BTreeSet::new();
    let mut models = 0;
    let mut largest = 0;
    for (name, m) in common::corpus_machines() {
        let (net, map) = translate(&m, &TranslationConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        let sim = Simulator::new(&net).map_err(|e| format!("{name}: {e}"))?;
        let report = check_control_safety(&net, &map, &explore(&sim, &net.initial_marking(), MARKING_CAP));
        ensure(!report.truncated, || format!("{name}: more than {MARKING_CAP} markings"))?;
        if let Some(v) = report.violations.first() {
            return Err(format!(
                "{name}: {} control and {:?} VARS tokens in {}",
                v.control_tokens, v.vars_tokens, v.marking
            ));
        }
        covered.extend(features(&m));
        models += 1;
        largest = largest.max(report.states);
    }
    let wanted = ["flat", "depth 3", "inter-level", "guard+variable", "history", "final/completion"];
    let missing: Vec<_> = wanted.iter().filter(|f| !covered.contains(*f)).collect();
    ensure(missing.is_empty(), || format!("corpus lacks {missing:?}"))?;
    ensure(models >= MIN_SAFETY_MODELS, || format!("only {models} models"))?;
    Ok(format!("{models} models 1-safe, largest state space {largest} markings"))
}

fn equivalence() -> Outcome {
    let config = TranslationConfig::default();
    let mut models = 0;
    for (name, m) in common::corpus_machines() {
        let (net, map) = translate(&m, &config).map_err(|e| format!("{name}: {e}"))?;
        match check_trace_equivalence(&m, &net, &map, EQUIV_DEPTH).map_err(|e| format!("{name}: {e}"))? {
            Verdict::Equivalent { depth } if depth >= EQUIV_DEPTH => models += 1,
            other => return Err(format!("{name}: {other:?}")),
        }
    }
    let m = cd_player();
    let (net, map) = translate(&m, &config).map_err(|e| e.to_string())?;
    let mut killed = Vec::new();
    for kind in MutationKind::ALL {
        let mutant = mutants(&m, &net, &map, kind)
            .into_iter()
            .next()
            .ok_or_else(|| format!("no {kind} mutant"))?;
        match check_trace_equivalence(&m, &mutant.net, &map, MUTANT_DEPTH) {
            Ok(Verdict::Inequivalent(cx)) => killed.push(format!("{kind} at move {}", cx.common.len() + 1)),
            Ok(v) => return Err(format!("{} survived: {v:?}", mutant.description)),
            Err(e) => return Err(format!("{}: no counterexample ({e})", mutant.description)),
        }
    }
    Ok(format!("{models} corpus models equivalent at depth {EQUIV_DEPTH}; killed within depth {MUTANT_DEPTH}: {}", killed.join(", ")))
}

fn round_trips() -> Outcome {
    let config = TranslationConfig::default();
    let mut nets = Vec::new();
    for (name, text) in common::corpus() {
        let model = smdl::parse(&text).map_err(|e| format!("{name}: {e}"))?;
        let back = smdl::parse(&smdl::print(&model)).map_err(|e| format!("{name}: {e}"))?;
        ensure(back == model, || format!("{name}: printer round trip differs"))?;
        let m = Machine::new(model).map_err(|e| format!("{name}: {e:?}"))?;
        nets.push((name, m));
    }
    for seed in 0..RANDOM_NETS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = rng.random_range(1..=20);
        let shape = Shape {
            states,
            depth: rng.random_range(1..=states.min(5)),
            transitions: rng.random_range(0..=20),
            events: rng.random_range(1..=4),
            variables: rng.random_range(0..=3),
        };
        let m = Machine::new(machine(seed, shape)).map_err(|e| format!("seed {seed}: {e:?}"))?;
        nets.push((format!("random {seed}"), m));
    }
    for (name, m) in &nets {
        let (net, _) = translate(m, &config).map_err(|e| format!("{name}: {e}"))?;
        let xml = to_cpn_xml(&net);
        let back = parse_cpn_xml(&xml).map_err(|e| format!("{name}: {e}"))?;
        ensure(back == net, || format!("{name}: XML round trip differs"))?;
        let (again, _) = translate(m, &config).map_err(|e| format!("{name}: {e}"))?;
        ensure(to_cpn_xml(&again) == xml, || format!("{name}: output not byte-identical"))?;
        ensure(to_cpn_xml(&back) == xml, || format!("{name}: re-emitted XML differs"))?;
    }
    Ok(format!("{} nets round-trip byte-identically", nets.len()))
}

fn hierarchy_queries() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for seed in 0..HIERARCHIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = rng.random_range(1..=MAX_HIERARCHY_STATES);
        let shape = Shape {
            states,
            depth: rng.random_range(1..=states.min(10)),
            transitions: 0,
            events: 0,
            variables: 0,
        };
        let model = hierarchy(seed, shape);
        let naive = Naive::new(&model);
        let m = Machine::new(model.clone()).map_err(|e| format!("seed {seed}: {e:?}"))?;
        for a in m.state_ids() {
            let an = m.state_name(a);
            let subs: Vec<&str> = m.substates(a).into_iter().map(|x| m.state_name(x)).collect();
            ensure(subs == naive.substates(an), || format!("seed {seed}: substates({an})"))?;
            for b in m.state_ids() {
                let bn = m.state_name(b);
                ensure(m.exit_chain(a, b).ok().map(labels) == naive.exit_chain(an, bn), || {
                    format!("seed {seed}: exitChain({an}, {bn})")
                })?;
                ensure(m.entry_chain(b, a).ok().map(labels) == naive.entry_chain(bn, an), || {
                    format!("seed {seed}: entryChain({bn}, {an})")
                })?;
                let lca = m.least_common_ancestor(a, b).map(|x| m.state_name(x));
                ensure(lca == naive.lca(an, bn), || format!("seed {seed}: lca({an}, {bn})"))?;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < HIERARCHY_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{HIERARCHIES} hierarchies, {checked} state pairs, {elapsed:.2?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("1 CD player structure", structure),
        ("2 translation time", performance),
        ("3 control 1-safety", safety),
        ("4 trace equivalence and mutants", equivalence),
        ("5 round trips and determinism", round_trips),
        ("6 hierarchy queries", hierarchy_queries),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
