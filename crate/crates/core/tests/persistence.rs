use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synthdialog::agent::{Agent, AgentOptions};
use synthdialog::language::LanguageModel;
use synthdialog::persist::{from_log, load, save, to_log, PersistError};
use synthdialog::world::WorldModel;

const REGIONS: &[&str] = &["kibo", "harmony", "columbus"];

/// Random but well-formed human turns, with some noise mixed in.
fn utterance(rng: &mut ChaCha8Rng) -> String {
    let r = |rng: &mut ChaCha8Rng| REGIONS[rng.random_range(0..REGIONS.len())];
    match rng.random_range(0..6) {
        0 => format!("go to the {} capsule", r(rng)),
        1 => format!("the {} capsule is connected to the {} capsule", r(rng), r(rng)),
        2 => format!("is the {} capsule connected to the {} capsule?", r(rng), r(rng)),
        3 => "yes".into(),
        4 => "no".into(),
        _ => "fly to the moon".into(),
    }
}

fn agent(lm: &Arc<LanguageModel>, seed: Option<u64>) -> Agent {
    let w = WorldModel::from_parts(REGIONS, &[], "kibo").unwrap();
    let options = AgentOptions {
        seed,
        ..AgentOptions::default()
    };
    Agent::new("p", w, lm.clone(), options).unwrap()
}

#[test]
fn hundred_turn_sessions_round_trip() {
    let lm = Arc::new(LanguageModel::builtin().unwrap());
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = agent(&lm, Some(seed));
        for _ in 0..100 {
            a.handle(&utterance(&mut rng)).unwrap();
        }
        let humans = a.session().transcript().iter().filter(|t| t.speaker == synthdialog::dialogue::Speaker::Human).count();
        assert_eq!(humans, 100);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        save(&a, &path).unwrap();
        let b = load(&path, lm.clone()).unwrap();
        assert_eq!(b.session().transcript(), a.session().transcript());
        assert_eq!(b.session().world(), a.session().world());
        assert_eq!(b.traces(), a.traces());
        assert_eq!(to_log(&b), to_log(&a));
    }
}

#[test]
fn truncated_last_line_is_reported() {
    let lm = Arc::new(LanguageModel::builtin().unwrap());
    let mut a = agent(&lm, None);
    a.handle("the kibo capsule is connected to the harmony capsule").unwrap();
    a.handle("go to the harmony capsule").unwrap();
    let log = to_log(&a);
    let lines = log.lines().count();
    let cut = &log[..log.trim_end().len() - 5];
    match from_log(cut, lm.clone()) {
        Err(PersistError::CorruptLog { line, .. }) => assert_eq!(line, lines),
        other => panic!("expected CorruptLog, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn tampered_robot_turn_is_reported() {
    let lm = Arc::new(LanguageModel::builtin().unwrap());
    let mut a = agent(&lm, None);
    a.handle("go to the kibo capsule").unwrap();
    let log = to_log(&a).replace("navigating to the kibo capsule", "navigating elsewhere");
    assert!(matches!(from_log(&log, lm), Err(PersistError::CorruptLog { .. })));
}
