use std::collections::BTreeSet;

use super::*;
use crate::action::{ChannelId, Label};
use crate::gen;
use crate::lts::trace_equivalent;

#[test]
fn client_server_is_well_formed() {
    let sys = gen::client_server();
    assert!(sys.validate_architecture().is_empty());
}

#[test]
fn flipped_port_side_is_reported() {
    let mut sys = gen::client_server();
    // Client1's port on connector 2 claims the same role as K1's bottom port.
    sys.component_mut("Client1").unwrap().bindings[0].side = Side::Bottom;
    let report = sys.validate_architecture();
    assert!(!report.is_empty());
    assert!(report.iter().any(|v| matches!(
        v,
        Violation::RoleConflict { channel: ChannelId(2), .. }
            | Violation::DanglingConnector { channel: ChannelId(2), .. }
    )));
}

#[test]
fn unbound_channel_is_reported() {
    let mut sys = gen::client_server();
    let k1 = sys.component_mut("K1").unwrap();
    let extra = k1.behavior.add_state("x");
    k1.behavior.add_transition(0, Label::parse("9?req").unwrap(), extra);
    let report = sys.validate_architecture();
    assert!(report.iter().any(|v| matches!(
        v,
        Violation::UnboundChannel { channel: ChannelId(9), .. }
    )));
}

#[test]
fn kind_orientation_is_reported() {
    let mut sys = gen::client_server();
    // An output on a top port must be a request, not a notification.
    let client = sys.component_mut("Client1").unwrap();
    client.behavior = Lts::from_text(
        "lts Client1\ninit c0\nc0 2!req:ntf c1\nc1 2?ok:ntf c0\n",
    )
    .unwrap();
    let report = sys.validate_architecture();
    assert!(report.iter().any(|v| matches!(v, Violation::KindOrientation { .. })));
}

#[test]
fn low_fresh_counter_is_reported() {
    let mut sys = gen::client_server();
    sys.set_next_fresh_channel(2);
    let report = sys.validate_architecture();
    assert!(report.iter().any(|v| matches!(v, Violation::FreshCounterTooLow { .. })));
}

#[test]
fn alternation_accepts_canonical_router() {
    let behavior = Lts::from_text("lts r\ninit s0\ns0 2?req s1\ns1 3!req s0\n").unwrap();
    let coord = Component::new("r", true, behavior);
    assert!(check_strict_alternation(&coord).is_ok());
}

#[test]
fn alternation_rejects_input_after_input() {
    let behavior =
        Lts::from_text("lts r\ninit s0\ns0 2?req s1\ns1 2?more s2\ns2 2!more s0\n").unwrap();
    let coord = Component::new("r", true, behavior);
    match check_strict_alternation(&coord) {
        AlternationCheck::Violation(v) => {
            assert_eq!(v.state, "s1");
            assert!(v.reason.contains("outputs"));
        }
        AlternationCheck::Ok => panic!("should reject"),
    }
}

#[test]
fn alternation_rejects_message_renaming() {
    // Entered by `req`, answers `ok`: not the corresponding output.
    let behavior = Lts::from_text("lts r\ninit s0\ns0 2?req s1\ns1 3!ok s0\n").unwrap();
    let coord = Component::new("r", true, behavior);
    match check_strict_alternation(&coord) {
        AlternationCheck::Violation(v) => {
            assert_eq!(v.state, "s1");
            assert!(v.reason.contains("correspond"));
        }
        AlternationCheck::Ok => panic!("should reject"),
    }
}

#[test]
fn alternation_checks_exhaustively_on_two_state_machines() {
    // Enumerate all two-state coordinators with one input entering s1 and one
    // outgoing label; the check must accept exactly the same-message outputs.
    for (label, ok) in [
        ("3!req", true),
        ("3!ok", false),
        ("2!req", true),
        ("3?req", false),
        ("tau", false),
    ] {
        let text = format!("lts r\ninit s0\ns0 2?req s1\ns1 {label} s0\n");
        let coord = Component::new("r", true, Lts::from_text(&text).unwrap());
        assert_eq!(check_strict_alternation(&coord).is_ok(), ok, "{label}");
    }
}

#[test]
fn close_trivial_pair_is_single_state() {
    let mut sys = CbaSystem::new();
    sys.add_component(Component::new("A", false, Lts::new("A")));
    sys.add_component(Component::new("K", true, Lts::new("K")));
    let closed = sys.close_system().unwrap();
    assert_eq!(closed.state_count(), 1);
    assert_eq!(closed.transition_count(), 0);
}

#[test]
fn close_client_server_matches_brute_force_product() {
    let sys = gen::client_server();
    let closed = sys.close_system().unwrap();
    let oracle = brute_force_close(&sys);
    assert!(closed.same_canonical_shape(&oracle));
    assert!(trace_equivalent(&closed, &oracle).is_equivalent());

    // Every trace alternates coordinator-input-side and output-side
    // handshakes, and each input/output pair carries the same message.
    let k1 = &sys.component("K1").unwrap().behavior;
    let receives = |label: &Label| -> bool {
        k1.alphabet().iter().any(|l| match l {
            Label::Act(a) => {
                Some(a.channel) == label.channel()
                    && Some(a.message.as_str()) == label.message()
                    && a.polarity == crate::action::Polarity::Input
            }
            _ => false,
        })
    };
    let mut frontier = vec![(closed.initial(), Vec::<Label>::new())];
    for _ in 0..8 {
        let mut next = Vec::new();
        for (state, trace) in frontier {
            for (label, target) in closed.outgoing(state) {
                let mut extended = trace.clone();
                extended.push(label.clone());
                next.push((target, extended));
            }
        }
        for (_, trace) in &next {
            for (i, label) in trace.iter().enumerate() {
                let expect_input = i % 2 == 0;
                assert_eq!(receives(label), expect_input, "position {i} of {trace:?}");
                if !expect_input {
                    assert_eq!(
                        trace[i - 1].message(),
                        label.message(),
                        "coordinator forwards unrenamed"
                    );
                }
            }
        }
        frontier = next;
    }
}

#[test]
fn close_without_server_reports_open_channel() {
    let sys = gen::client_server();
    let mut open = CbaSystem::new();
    open.add_component(sys.component("Client1").unwrap().clone());
    open.add_component(sys.component("K1").unwrap().clone());
    match open.close_system() {
        Err(CloseError::OpenSystem { channels }) => {
            assert_eq!(channels, BTreeSet::from([ChannelId(3)]));
        }
        other => panic!("expected open-system error, got {other:?}"),
    }
}

#[test]
fn close_is_composition_order_insensitive() {
    let sys = gen::client_server();
    let components: Vec<&Component> = sys.components().collect();
    let reference = compose_all(&components);
    let orders: [[usize; 3]; 5] =
        [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for order in orders {
        let permuted: Vec<&Component> = order.iter().map(|&i| components[i]).collect();
        let composed = compose_all(&permuted);
        assert!(
            trace_equivalent(&reference, &composed).is_equivalent(),
            "order {order:?} changed the closed behavior"
        );
    }
}

#[test]
fn corpus_systems_are_well_formed_and_fully_wired() {
    let corpus = gen::corpus();
    assert!(corpus.len() >= 10);
    for entry in &corpus {
        let report = entry.system.validate_architecture();
        assert!(report.is_empty(), "{}: {report:?}", entry.coordinator);
        for comp in entry.system.components() {
            assert!(comp.behavior.state_count() <= 8, "{} too large", comp.name);
        }
        // Well-formedness implies every behavior channel has exactly one
        // connector with both roles bound.
        for comp in entry.system.components() {
            for channel in comp.action_channels() {
                let endpoints = entry.system.endpoints(channel);
                assert_eq!(endpoints.len(), 2, "channel {channel}");
            }
        }
        for coord in entry.system.coordinators() {
            assert!(check_strict_alternation(coord).is_ok());
        }
        entry.system.close_system().unwrap();
    }
}

#[test]
fn cba_round_trips_through_text() {
    let sys = gen::client_server();
    let parse = |files: &CbaFiles| -> CbaSystem {
        let mut contents: std::collections::BTreeMap<String, String> =
            files.behaviors.iter().cloned().collect();
        parse_cba(&files.system, "sys.cba", &mut |name: &str| {
            contents.remove(name).ok_or_else(|| format!("missing {name}"))
        })
        .unwrap()
    };

    let files = write_cba(&sys);
    let reparsed = parse(&files);
    assert_eq!(write_cba(&reparsed).system, files.system);
    // Behavior semantics survive; state numbering may shift once, after
    // which writing reaches a byte fixpoint.
    for comp in sys.components() {
        let other = reparsed.component(&comp.name).unwrap();
        assert_eq!(comp.is_coordinator, other.is_coordinator);
        assert_eq!(comp.bound_channels(), other.bound_channels());
        assert!(comp.behavior.same_canonical_shape(&other.behavior));
    }
    let files2 = write_cba(&reparsed);
    let files3 = write_cba(&parse(&files2));
    assert_eq!(files3.system, files2.system);
    assert_eq!(files3.behaviors, files2.behaviors);
}

/// Independent product construction: enumerates all global state tuples and
/// applies the synchronization rule directly.
fn brute_force_close(sys: &CbaSystem) -> Lts {
    let comps: Vec<&Component> = sys.components().collect();
    let sizes: Vec<usize> = comps.iter().map(|c| c.behavior.state_count()).collect();
    let total: usize = sizes.iter().product();
    let index = |tuple: &[usize]| -> usize {
        tuple.iter().zip(&sizes).fold(0, |acc, (s, size)| acc * size + s.min(&(size - 1)))
    };
    let mut out = Lts::new("oracle");
    for i in 1..total {
        out.add_state(format!("g{i}"));
    }
    let tuples = {
        let mut all = Vec::new();
        fn rec(sizes: &[usize], prefix: &mut Vec<usize>, all: &mut Vec<Vec<usize>>) {
            if prefix.len() == sizes.len() {
                all.push(prefix.clone());
                return;
            }
            for s in 0..sizes[prefix.len()] {
                prefix.push(s);
                rec(sizes, prefix, all);
                prefix.pop();
            }
        }
        rec(&sizes, &mut Vec::new(), &mut all);
        all
    };
    let initial_tuple: Vec<usize> = comps.iter().map(|c| c.behavior.initial()).collect();
    // Remap so the joint initial state is state 0 of the oracle machine.
    let remap = |tuple: &[usize]| -> usize {
        let raw = index(tuple);
        let init_raw = index(&initial_tuple);
        if raw == init_raw {
            0
        } else if raw == 0 {
            init_raw
        } else {
            raw
        }
    };
    for tuple in &tuples {
        for (i, comp) in comps.iter().enumerate() {
            for (label, target) in comp.behavior.outgoing(tuple[i]) {
                let a = match label {
                    Label::Act(a) => a,
                    _ => continue,
                };
                for (j, other) in comps.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    for (other_label, other_target) in other.behavior.outgoing(tuple[j]) {
                        if let Label::Act(b) = other_label {
                            if a.synchronizes_with(b) && a.polarity == crate::action::Polarity::Output {
                                let mut next = tuple.clone();
                                next[i] = target;
                                next[j] = other_target;
                                out.add_transition(
                                    remap(tuple),
                                    Label::Sync {
                                        channel: a.channel,
                                        message: a.message.clone(),
                                        kind: a.kind,
                                    },
                                    remap(&next),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    out.canonicalize()
}
