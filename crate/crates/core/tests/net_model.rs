use hetnet_core::net_model::{noise_power, validate_scenario};
use hetnet_core::scenario_gen::{generate, worked_example};
use hetnet_core::{Error, GenParams, Link, Scenario, Scenario32, WorkedCase};
use proptest::prelude::*;

fn small(seed: u64) -> Scenario {
    generate(&GenParams { n_ues: 6, n_fixed_sinr: 2, seed, ..GenParams::default() }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>()) {
        let s = small(seed);
        let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn validation_is_idempotent(seed in any::<u64>(), tamper in 0usize..4) {
        let mut s = small(seed);
        match tamper {
            1 => s.ues[0].chan_2 = Some(s.ues[0].chan_1),
            2 => s.channels[0].bandwidth = 0.0,
            3 => s.gains[0].gain = -1.0,
            _ => {}
        }
        let before = s.clone();
        let a = validate_scenario(&s);
        let b = validate_scenario(&s);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(s, before);
        prop_assert_eq!(a.is_empty(), tamper == 0);
    }
}

#[test]
fn noise_is_linear_in_bandwidth() {
    let mut s: Scenario = worked_example(WorkedCase::HighBackhaul);
    let before = noise_power(&s, 1, Link::First).unwrap();
    s.channels[0].bandwidth *= 2.0;
    assert_eq!(noise_power(&s, 1, Link::First).unwrap(), 2.0 * before);
    assert_eq!(before, 1e-19 * 10e6);
}

#[test]
fn noise_lookup_errors() {
    let s = small(1);
    assert!(matches!(noise_power(&s, 99, Link::First), Err(Error::UnknownUe(99))));
    let single = s.ues.iter().find(|u| !u.is_dual()).unwrap().id;
    assert!(matches!(noise_power(&s, single, Link::Second), Err(Error::UnknownLink { .. })));
}

#[test]
fn single_precision_scenarios_load() {
    let s = small(5);
    let s32 = Scenario32::from_json(&s.to_json().unwrap()).unwrap();
    assert!(validate_scenario(&s32).is_empty());
    assert_eq!(s32.ues.len(), s.ues.len());
}

#[test]
fn malformed_json_is_an_error() {
    assert!(matches!(Scenario::<f64>::from_json("{\"poas\": 3}"), Err(Error::Json(_))));
}

#[test]
fn unknown_references_are_reported() {
    let mut s = small(2);
    s.ues[0].poa_1 = 42;
    let v = validate_scenario(&s);
    assert!(v.iter().any(|v| v.rule.contains("unknown PoA 42")), "{v:?}");
}
