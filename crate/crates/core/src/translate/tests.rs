use super::*;
use crate::cpn::{explore, Binding, Simulator};
use crate::smdl;

const CD_PLAYER: &str = include_str!("../../../../corpus/cdplayer.smdl");

fn net_of(src: &str, config: TranslationConfig) -> (ColouredNet, TranslationMap) {
    let m = smdl::load(src).expect("valid model");
    translate(&m, &config).expect("translates")
}

fn fire_only(sim: &Simulator<'_>, m: &crate::cpn::Marking, id: &str) -> crate::cpn::Marking {
    let b = sim.enabled_bindings(m, id);
    assert_eq!(b.len(), 1, "{id} should have one binding, has {}", b.len());
    sim.fire(m, id, &b[0]).unwrap()
}

#[test]
fn single_state_is_one_marked_place() {
    let (n, map) = net_of("machine M { state S initial; }", TranslationConfig::default());
    assert_eq!(n.places.len(), 1);
    assert!(n.transitions.is_empty());
    assert_eq!(map.state_place["S"], "P_S");
    assert_eq!(n.initial_marking().place(0).count(&Value::Unit), 1);
}

#[test]
fn cd_player_matches_hand_translation() {
    let (n, map) = net_of(CD_PLAYER, TranslationConfig::default());
    assert_eq!((n.places.len(), n.transitions.len(), n.arcs.len()), (16, 30, 118));
    assert!(n.place("P_Busy__F").is_some());
    assert!(n.place("P_Busy__H").is_some());
    let fts: Vec<_> = n.transitions.iter().filter(|t| t.observable.as_deref() == Some("FTS")).collect();
    assert_eq!(fts.len(), 2);
    assert!(map.all_nodes().iter().all(|id| !id.to_lowercase().contains("nonplaying")));
    assert!(n.places.iter().all(|p| !p.name.to_lowercase().contains("nonplaying")));
}

#[test]
fn cd_player_state_space_and_safety() {
    let (n, map) = net_of(CD_PLAYER, TranslationConfig::default());
    let sim = Simulator::new(&n).unwrap();
    let g = explore(&sim, &n.initial_marking(), 100_000);
    assert_eq!(g.state_count(), 2528);
    let report = check_control_safety(&n, &map, &g);
    assert!(report.holds(), "{:?}", report.violations.first());
}

#[test]
fn history_restore_returns_to_paused() {
    let (n, _) = net_of(CD_PLAYER, TranslationConfig::default());
    let sim = Simulator::new(&n).unwrap();
    let mut m = n.initial_marking();
    for id in [
        "T_play__produce",
        "T_start__from_Closed",
        "T_start__beh_0",
        "T_pause__produce",
        "T_pause__from_Playing",
        "T_open_close__produce",
        "T_eject__from_Paused",
        "T_play__produce",
        "T_load__from_Open",
        "T_load__exit_Open_0",
        "T_load__beh_0",
        "T_load__restore_Paused",
    ] {
        m = fire_only(&sim, &m, id);
    }
    assert_eq!(n.tokens(&m, "P_Paused").unwrap().len(), 1);
    assert_eq!(
        n.tokens(&m, "P_Busy__H").unwrap().count(&Value::Enum("Paused".into())),
        1
    );
    // FTS ran on re-entry: track is 1 again.
    assert_eq!(n.tokens(&m, "VARS").unwrap().count(&Value::Int(1)), 1);
}

#[test]
fn leaving_through_final_forgets_history() {
    let src = "machine M {
      state A initial history { state X initial; final; };
      state B;
      trans f : X -> A.final;
      trans c : A -> B;
      trans back : B -> A.H;
    }";
    let (n, _) = net_of(src, TranslationConfig::default());
    let sim = Simulator::new(&n).unwrap();
    let mut m = n.initial_marking();
    for id in ["T_f__from_X", "T_c__from_A.final"] {
        m = fire_only(&sim, &m, id);
    }
    assert_eq!(n.tokens(&m, "P_A__H").unwrap().count(&Value::Enum(NONE.into())), 1);
    assert!(sim.enabled_bindings(&m, "T_back__from_B").len() == 1);
}

#[test]
fn composite_without_final_or_history_leaves_no_node() {
    let src = "machine M {
      state Outer initial { state In initial; };
      state Other;
      trans go : Outer -> Other on e;
    }";
    let (n, map) = net_of(src, TranslationConfig::default());
    assert!(n.places.iter().all(|p| !p.id.contains("Outer") && !p.name.contains("Outer")));
    assert!(n.transitions.iter().all(|t| !t.id.contains("Outer")));
    assert_eq!(map.transition_subnet["go"], vec!["T_go__from_In".to_string()]);
}

#[test]
fn sequential_assignments_substitute() {
    let src = "machine M {
      var a : int = 1;
      var b : int = 2;
      state S initial;
      state T;
      trans t : S -> T / swap { a := b, b := a };
    }";
    let (n, _) = net_of(src, TranslationConfig::default());
    let sim = Simulator::new(&n).unwrap();
    let mut m = n.initial_marking();
    for id in ["T_t__from_S", "T_t__beh_0"] {
        m = fire_only(&sim, &m, id);
    }
    let expected = Value::Tuple(vec![Value::Int(2), Value::Int(2)]);
    assert_eq!(n.tokens(&m, "VARS").unwrap().count(&expected), 1);
}

#[test]
fn guard_reads_variables() {
    let src = "machine M {
      var x : int = 0;
      state S initial;
      state T;
      trans t : S -> T on e if (x > 0);
    }";
    let (n, _) = net_of(src, TranslationConfig::default());
    let sim = Simulator::new(&n).unwrap();
    let m = fire_only(&sim, &n.initial_marking(), "T_e__produce");
    assert!(sim.enabled_bindings(&m, "T_t__from_S").is_empty());
}

#[test]
fn environment_can_be_left_out() {
    let config = TranslationConfig {
        event_capacity: 1,
        include_environment: false,
    };
    let (n, map) = net_of(CD_PLAYER, config);
    assert!(map.capacity_place.is_none() && map.producers.is_empty());
    assert!(n.place(EVENTS_CAP).is_none());
    assert!(n.place(EVENTS).is_some());
}

#[test]
fn capacity_multiplies_event_tokens() {
    let config = TranslationConfig {
        event_capacity: 3,
        include_environment: true,
    };
    let (n, _) = net_of(CD_PLAYER, config);
    let cap = n.place(EVENTS_CAP).unwrap();
    assert_eq!(cap.initial.count(&Value::Enum("play".into())), 3);
}

#[test]
fn dispatch_returns_event_capacity() {
    let (n, _) = net_of(CD_PLAYER, TranslationConfig::default());
    let sim = Simulator::new(&n).unwrap();
    let m0 = n.initial_marking();
    let m1 = fire_only(&sim, &m0, "T_open_close__produce");
    let m2 = sim.fire(&m1, "T_open__from_Closed", &Binding::new()).unwrap();
    assert_eq!(n.tokens(&m2, EVENTS_CAP), n.tokens(&m0, EVENTS_CAP));
    assert_eq!(n.tokens(&m2, EVENTS).unwrap().len(), 0);
}

#[test]
fn duplicate_ids_are_reported() {
    let m = smdl::load("machine M { state S initial; }").unwrap();
    let mut t = translate_states(&m, &TranslationConfig::default());
    t.add_place("P_S".into(), "again".into(), UNIT, Multiset::new());
    assert_eq!(t.collision.as_deref(), Some("P_S"));
}

#[test]
fn translation_is_deterministic() {
    let a = net_of(CD_PLAYER, TranslationConfig::default());
    let b = net_of(CD_PLAYER, TranslationConfig::default());
    assert_eq!(a, b);
}
