//! Golden outputs for the media-selection replay and the scenario suite.

mod support;

use flare_core::format::{parse_kb, write_kb};
use flare_core::harness::run_scenario_file;
use flare_core::{learn_as, query, KnowledgeBase, ReasonConfig};
use support::{data, read, media_example, vector};

#[test]
fn replay_matches_golden_adapt_log_and_kb() {
    let (s, vs) = media_example();
    let cfg = ReasonConfig::default();
    let mut kb = KnowledgeBase::new(s);
    let mut log = String::new();
    for (label, v) in &vs {
        let (_, r) = learn_as(&mut kb, v, v.target_value().unwrap(), &cfg, Some(label)).unwrap();
        log.push_str(&r.render());
        log.push('\n');
    }
    assert_eq!(log, read("golden/media.adapt"));
    assert_eq!(write_kb(&kb), read("golden/media-learned.kb"));
}

#[test]
fn repeated_examples_bump_dynamic_priority_and_covers() {
    let (s, vs) = media_example();
    let cfg = ReasonConfig::default();
    let mut kb = KnowledgeBase::new(s);
    for (label, v) in vs.iter().take(13) {
        learn_as(&mut kb, v, v.target_value().unwrap(), &cfg, Some(label)).unwrap();
    }
    let v7 = kb.get("v7").unwrap();
    assert_eq!((v7.dynamic_priority, v7.num_covers), (1, 1));
}

#[test]
fn golden_kb_round_trips() {
    let text = read("golden/media-learned.kb");
    assert_eq!(write_kb(&parse_kb(&text).unwrap()), text);
}

#[test]
fn closing_queries_need_both_priorities() {
    let kb = parse_kb(&read("golden/media-learned.kb")).unwrap();
    let s = kb.schema().clone();
    let cfg = ReasonConfig::default();
    let a = query(&kb, &vector(&s, "1 ? 0 ? 0 1 ?_T"), &cfg).unwrap();
    assert_eq!(a.winner.as_deref(), Some("v7"));
    assert_eq!(a.conflicts, vec![("v7".to_string(), "v8'".to_string())]);
    let b = query(&kb, &vector(&s, "1 ? 2 ? 0 0 ?_T"), &cfg).unwrap();
    assert_eq!(b.winner.as_deref(), Some("v12"));
}

#[test]
fn every_scenario_passes() {
    let dir = data("scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "scn") {
            let r = run_scenario_file(&path, &ReasonConfig::default()).unwrap();
            assert!(r.passed(), "{}", r.render(true));
            n += 1;
        }
    }
    assert!(n >= 13);
}

#[test]
fn nixon_induction_keeps_three_rules() {
    let r = run_scenario_file(&data("scenarios/nixon-induction.scn"), &ReasonConfig::default()).unwrap();
    let kb = &r.final_kb;
    assert_eq!(kb.len(), 3);
    assert_eq!(kb.rules().iter().map(|r| r.dynamic_priority).max(), Some(0));
    let rq = kb.rules().iter().find(|r| r.specificity() == 2 && r.vector.cells[0] == r.vector.cells[1]).unwrap();
    assert_eq!(rq.counters, vec![1, 2]);
}
