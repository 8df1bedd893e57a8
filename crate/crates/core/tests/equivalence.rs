mod common;

use smd2cpn::mutate::{mutants, MutationKind};
use smd2cpn::oracle::{check_trace_equivalence, Verdict};
use smd2cpn::translate::{translate, TranslationConfig};

#[test]
fn corpus_models_match_their_nets() {
    for (name, m) in common::corpus_machines() {
        let (net, map) = translate(&m, &TranslationConfig::default()).unwrap();
        let v = check_trace_equivalence(&m, &net, &map, 8).unwrap();
        assert_eq!(v, Verdict::Equivalent { depth: 8 }, "{name}");
    }
}

#[test]
fn mutation_score_on_cd_player() {
    let (_, m) = common::corpus_machines().into_iter().find(|(n, _)| n == "cdplayer").unwrap();
    let (net, map) = translate(&m, &TranslationConfig::default()).unwrap();
    for kind in MutationKind::ALL {
        let ms = mutants(&m, &net, &map, kind);
        let killed: Vec<bool> = ms
            .iter()
            .map(|x| !check_trace_equivalence(&m, &x.net, &map, 8).is_ok_and(|v| v.is_equivalent()))
            .collect();
        let survivors: Vec<&str> = ms
            .iter()
            .zip(&killed)
            .filter(|(_, k)| !**k)
            .map(|(x, _)| x.description.as_str())
            .collect();
        println!("{kind}: {}/{} killed; survivors {survivors:?}", killed.iter().filter(|k| **k).count(), ms.len());
    }
}
