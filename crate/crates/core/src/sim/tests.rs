use std::collections::BTreeSet;

use super::*;
use crate::cba::{CbaSystem, Component};
use crate::gen;
use crate::lts::Lts;
use crate::synth::apply_enhancement;

fn script(component: &str, decisions: &[&str]) -> FaultScript {
    FaultScript {
        component: component.to_string(),
        decisions: decisions.iter().map(|d| d.to_string()).collect(),
        exhausted: ExhaustedPolicy::RepeatLast,
    }
}

fn enhanced_client_server() -> CbaSystem {
    apply_enhancement(&gen::client_server(), &gen::retry_spec()).unwrap().0
}

#[test]
fn terminal_system_yields_empty_final_trace() {
    let mut sys = CbaSystem::new();
    let mut idle = Lts::new("A");
    idle.mark_final(0);
    sys.add_component(Component::new("A", false, idle.clone()));
    sys.add_component(Component::new("K", true, idle.with_name("K")));
    let trace = simulate(&sys, &[], 0, 10).unwrap();
    assert!(trace.events.is_empty());
    assert_eq!(trace.terminated, Termination::Final);

    // A component with no bound channels projects to nothing.
    assert!(project_trace(&trace, "A", &sys).unwrap().is_empty());
}

#[test]
fn scripted_error_reaches_the_client() {
    let sys = gen::client_server();
    let trace = simulate(&sys, &[script("Server", &["err"])], 1, 4).unwrap();
    let labels: Vec<String> = trace.events.iter().map(|e| e.label.to_string()).collect();
    assert_eq!(labels, vec!["2.req", "3.req", "3.err:ntf", "2.err:ntf"]);
    let client_view = project_trace(&trace, "Client1", &sys).unwrap();
    assert_eq!(client_view.len(), 2);
    assert_eq!(client_view[1].label.to_string(), "2.err:ntf");
    assert_eq!(trace.terminated, Termination::StepLimit);
}

#[test]
fn participants_are_the_connector_endpoints() {
    let sys = gen::client_server();
    let trace = simulate(&sys, &[script("Server", &["ok"])], 1, 2).unwrap();
    assert_eq!(trace.events[0].participants, vec!["Client1".to_string(), "K1".to_string()]);
    assert_eq!(trace.events[1].participants, vec!["K1".to_string(), "Server".to_string()]);
}

#[test]
fn projections_merge_back_into_the_full_trace() {
    let sys = gen::client_server();
    let trace = simulate(&sys, &[script("Server", &["err", "ok"])], 3, 12).unwrap();
    let mut merged: BTreeSet<usize> = BTreeSet::new();
    for component in sys.component_names() {
        for event in project_trace(&trace, component, &sys).unwrap() {
            merged.insert(event.step);
        }
    }
    assert_eq!(merged.len(), trace.events.len());
}

#[test]
fn runs_are_reproducible() {
    let sys = enhanced_client_server();
    let scripts = [script("Server", &["err", "err", "ok"])];
    let a = simulate(&sys, &scripts, 42, 80).unwrap();
    let b = simulate(&sys, &scripts, 42, 80).unwrap();
    assert_eq!(a, b);
}

#[test]
fn wrapper_hides_up_to_two_errors_from_the_client() {
    let sys = enhanced_client_server();
    for k in 0..=2usize {
        let mut decisions: Vec<&str> = vec!["err"; k];
        decisions.push("ok");
        let trace = simulate(&sys, &[script("Server", &decisions)], 5, 100).unwrap();
        let client_view = project_trace(&trace, "Client1", &sys).unwrap();
        assert!(
            client_view.iter().all(|e| e.label.message() != Some("err")),
            "k={k}: client must never see an error"
        );
        let answers: Vec<&TraceEvent> =
            client_view.iter().filter(|e| e.label.message() != Some("req")).collect();
        assert!(!answers.is_empty());
        assert!(answers.iter().all(|e| e.label.message() == Some("ok")));
    }
}

#[test]
fn three_errors_defeat_the_retry_bound() {
    let sys = enhanced_client_server();
    // Every round errors three times; the wrapper gives up each round.
    let trace = simulate(&sys, &[script("Server", &["err"])], 5, 100).unwrap();
    let client_view = project_trace(&trace, "Client1", &sys).unwrap();
    let answers: Vec<&TraceEvent> =
        client_view.iter().filter(|e| e.label.message() != Some("req")).collect();
    assert!(!answers.is_empty());
    assert!(answers.iter().all(|e| e.label.message() == Some("err")));
}

#[test]
fn first_session_outcome_is_sharp_at_two_retries() {
    let sys = enhanced_client_server();
    for k in 0..=4usize {
        let mut decisions: Vec<&str> = vec!["err"; k];
        decisions.push("ok");
        let trace = simulate(&sys, &[script("Server", &decisions)], 9, 200).unwrap();
        let client_view = project_trace(&trace, "Client1", &sys).unwrap();
        let first_answer = client_view
            .iter()
            .find(|e| e.label.message() != Some("req"))
            .expect("client gets an answer");
        let expected = if k <= 2 { "ok" } else { "err" };
        assert_eq!(first_answer.label.message(), Some(expected), "k={k}");
    }
}

#[test]
fn wrapper_never_sends_more_than_three_requests_per_session() {
    let sys = enhanced_client_server();
    // All server scripts over {ok, err} up to length 5, then repeat-last.
    for bits in 0..64u32 {
        let len = 1 + (bits % 5) as usize;
        let decisions: Vec<&str> =
            (0..len).map(|i| if bits >> i & 1 == 1 { "err" } else { "ok" }).collect();
        let trace = simulate(&sys, &[script("Server", &decisions)], 13, 120).unwrap();
        // Count wrapper sends (channel 6 requests) between client forwards
        // (channel 7 requests).
        let mut consecutive = 0;
        let mut max_consecutive = 0;
        for event in &trace.events {
            match (event.label.channel(), event.label.message()) {
                (Some(c), Some("req")) if c == crate::action::ChannelId(6) => {
                    consecutive += 1;
                    max_consecutive = max_consecutive.max(consecutive);
                }
                (Some(c), _) if c == crate::action::ChannelId(7) => consecutive = 0,
                _ => {}
            }
        }
        assert!(max_consecutive <= 3, "script {decisions:?} led to {max_consecutive} sends");
    }
}

#[test]
fn every_simulated_event_is_a_closed_system_transition() {
    let sys = gen::client_server();
    let closed = sys.close_system().unwrap();
    let trace = simulate(&sys, &[script("Server", &["err", "ok", "err"])], 11, 30).unwrap();
    let mut state = closed.initial();
    for event in &trace.events {
        let next = closed
            .outgoing(state)
            .find(|(l, _)| *l == &event.label)
            .map(|(_, t)| t)
            .expect("event enabled in the model");
        state = next;
    }
}

#[test]
fn script_errors_are_reported() {
    let sys = gen::client_server();
    // `nope` is not in the server's alphabet at all.
    match simulate(&sys, &[script("Server", &["nope"])], 0, 10) {
        Err(SimError::UnknownMessage { component, message }) => {
            assert_eq!(component, "Server");
            assert_eq!(message, "nope");
        }
        other => panic!("expected unknown-message error, got {other:?}"),
    }
    // `req` is in the alphabet but never among the server's enabled choices.
    match simulate(&sys, &[script("Server", &["req"])], 0, 10) {
        Err(SimError::Script { component, directive, .. }) => {
            assert_eq!(component, "Server");
            assert_eq!(directive, "req");
        }
        other => panic!("expected script error, got {other:?}"),
    }
    match simulate(&sys, &[], 0, 0) {
        Err(SimError::InvalidMaxSteps) => {}
        other => panic!("expected max-steps error, got {other:?}"),
    }
}

#[test]
fn default_order_policy_stops_filtering_when_exhausted() {
    let sys = gen::client_server();
    let fault = FaultScript {
        component: "Server".to_string(),
        decisions: vec!["err".to_string()],
        exhausted: ExhaustedPolicy::DefaultOrder,
    };
    let trace = simulate(&sys, &[fault], 17, 40).unwrap();
    // First answer is scripted to err; later answers follow the seed.
    let answers: Vec<&str> = trace
        .events
        .iter()
        .filter(|e| e.label.channel() == Some(crate::action::ChannelId(3)))
        .filter_map(|e| e.label.message())
        .filter(|m| *m != "req")
        .collect();
    assert_eq!(answers[0], "err");
    assert!(answers.len() > 1);
}
