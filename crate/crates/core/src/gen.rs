//! Deterministic fixture builders and seeded random generators used by the
//! test suites and benchmarks: the Client-Server system, a two-target
//! variant, a corpus of small request/response architectures with matching
//! identity enhancement specs, and random machines for oracle testing.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::action::{Action, ChannelId, Label, MessageKind, Polarity};
use crate::cba::{CbaSystem, Component, Side};
use crate::lts::Lts;
use crate::msc::{Bmsc, EnhancementSpec, Event, Hmsc};

/// One request/response exchange a coordinator serves on a client channel.
#[derive(Debug, Clone)]
pub struct Session {
    pub channel: u32,
    pub request: String,
    pub notifications: Vec<String>,
}

impl Session {
    pub fn new(channel: u32, request: &str, notifications: &[&str]) -> Self {
        Session {
            channel,
            request: request.to_string(),
            notifications: notifications.iter().map(|n| n.to_string()).collect(),
        }
    }
}

/// A corpus entry: a well-formed system plus the sessions of each client
/// channel, from which identity enhancement specs are derived.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub system: CbaSystem,
    pub coordinator: String,
    pub targets: Vec<String>,
    pub sessions: Vec<Session>,
}

/// The Client-Server system: `Client1` below coordinator `K1` on connector 2,
/// `Server` above on connector 3. The client requests and waits for a
/// successful or erroneous answer; the coordinator routes strictly.
pub fn client_server() -> CbaSystem {
    let client = Lts::from_text(
        "lts Client1\ninit c0\nc0 2!req c1\nc1 2?ok:ntf c0\nc1 2?err:ntf c0\n",
    )
    .unwrap();
    let k1 = Lts::from_text(
        "lts K1\ninit k0\nk0 2?req k1\nk1 3!req k2\nk2 3?ok:ntf k3\nk2 3?err:ntf k4\nk3 2!ok:ntf k0\nk4 2!err:ntf k0\n",
    )
    .unwrap();
    let server = Lts::from_text(
        "lts Server\ninit s0\ns0 3?req s1\ns1 3!ok:ntf s0\ns1 3!err:ntf s0\n",
    )
    .unwrap();

    let mut sys = CbaSystem::new();
    sys.add_component(Component::new("Client1", false, client).bind(Side::Top, 1, 2));
    sys.add_component(
        Component::new("K1", true, k1).bind(Side::Bottom, 1, 2).bind(Side::Top, 1, 3),
    );
    sys.add_component(Component::new("Server", false, server).bind(Side::Bottom, 1, 3));
    sys
}

/// Sessions of [`client_server`]'s single client channel.
pub fn client_server_sessions() -> Vec<Session> {
    vec![Session::new(2, "req", &["ok", "err"])]
}

/// A two-client system: `Ca` (ping/pong on connector 1) and `Cb` (get/val on
/// connector 2) below coordinator `Kd`, with dedicated servers above.
pub fn duo() -> CbaSystem {
    stateless_system(
        "Kd",
        &[Session::new(1, "ping", &["pong"]), Session::new(2, "get", &["val"])],
        &["Ca", "Cb"],
    )
}

pub fn duo_sessions() -> Vec<Session> {
    vec![Session::new(1, "ping", &["pong"]), Session::new(2, "get", &["val"])]
}

/// Builds a system where `coordinator` serves each client session through a
/// dedicated server component. Client `i` speaks connector `sessions[i].channel`;
/// its server speaks connector `channel + offset` where `offset` clears every
/// client channel.
pub fn stateless_system(coordinator: &str, sessions: &[Session], clients: &[&str]) -> CbaSystem {
    assert_eq!(sessions.len(), clients.len());
    let offset = sessions.iter().map(|s| s.channel).max().unwrap_or(0);

    let mut sys = CbaSystem::new();
    let mut coord = Lts::new(coordinator.to_string());
    let mut coord_component = Component::new(coordinator, true, Lts::new("placeholder"));

    for (i, (session, client_name)) in sessions.iter().zip(clients).enumerate() {
        let c = session.channel;
        let s = c + offset;

        let mut client = Lts::new(client_name.to_string());
        let wait = client.add_state("w");
        client.add_transition(0, out(c, &session.request, MessageKind::Request), wait);
        for n in &session.notifications {
            client.add_transition(wait, inp(c, n, MessageKind::Notification), 0);
        }
        sys.add_component(
            Component::new(*client_name, false, client).bind(Side::Top, 1, c),
        );

        let server_name = format!("S{}", client_name);
        let mut server = Lts::new(server_name.clone());
        let busy = server.add_state("b");
        server.add_transition(0, inp(s, &session.request, MessageKind::Request), busy);
        for n in &session.notifications {
            server.add_transition(busy, out(s, n, MessageKind::Notification), 0);
        }
        sys.add_component(
            Component::new(server_name, false, server).bind(Side::Bottom, 1, s),
        );

        // Coordinator session: accept from the client, forward up, route the
        // answer back down.
        let a = coord.add_state(format!("a{i}"));
        let b = coord.add_state(format!("b{i}"));
        coord.add_transition(0, inp(c, &session.request, MessageKind::Request), a);
        coord.add_transition(a, out(s, &session.request, MessageKind::Request), b);
        for n in &session.notifications {
            let back = coord.add_state(format!("c{i}_{n}"));
            coord.add_transition(b, inp(s, n, MessageKind::Notification), back);
            coord.add_transition(back, out(c, n, MessageKind::Notification), 0);
        }

        coord_component = coord_component
            .bind(Side::Bottom, (i + 1) as u32, c)
            .bind(Side::Top, (i + 1) as u32, s);
    }

    coord_component.behavior = coord;
    sys.add_component(coord_component);
    sys
}

/// The identity enhancement: a wrapper that forwards every session of the
/// target channels unchanged, specified against `coordinator`. The wrapper
/// instance is named `W`; use [`identity_spec_named`] when that collides.
pub fn identity_spec(
    name: &str,
    coordinator: &str,
    targets: &[&str],
    sessions: &[Session],
) -> EnhancementSpec {
    identity_spec_named(name, "W", coordinator, targets, sessions)
}

pub fn identity_spec_named(
    name: &str,
    wrapper: &str,
    coordinator: &str,
    targets: &[&str],
    sessions: &[Session],
) -> EnhancementSpec {
    let mut instances: Vec<String> = targets.iter().map(|t| t.to_string()).collect();
    instances.push(wrapper.to_string());
    instances.push(coordinator.to_string());

    let mut bmscs = Vec::new();
    let mut hmsc = Hmsc::new("start");
    let mut node_names = Vec::new();
    for (target, session) in targets.iter().zip(sessions) {
        for n in &session.notifications {
            let bmsc_name = format!("fw_{}_{}", session.channel, n);
            let events = vec![
                Event::new(target, "W", &session.request, session.channel),
                Event::new("W", coordinator, &session.request, session.channel),
                Event::new(coordinator, "W", n, session.channel),
                Event::new("W", target, n, session.channel),
            ];
            bmscs.push(Bmsc { name: bmsc_name.clone(), instances: instances.clone(), events });
            let node = format!("n_{}_{}", session.channel, n);
            hmsc.add_node(&node, &bmsc_name);
            node_names.push(node);
        }
    }
    for node in &node_names {
        hmsc.add_edge("start", node, None);
        for other in &node_names {
            hmsc.add_edge(node, other, None);
        }
    }

    EnhancementSpec {
        name: name.to_string(),
        bmscs,
        hmsc,
        wrapper_instance: "W".to_string(),
        coordinator_instance: coordinator.to_string(),
        target_components: targets.iter().map(|t| t.to_string()).collect(),
        note: String::new(),
    }
}

/// The retry-policy enhancement for [`client_server`]: the wrapper forwards
/// the request, hides up to two erroneous answers by re-sending, and only
/// then propagates the error to the client.
pub fn retry_spec() -> EnhancementSpec {
    let instances =
        vec!["Client1".to_string(), "W".to_string(), "K1".to_string()];
    let bmsc = |name: &str, events: Vec<Event>| Bmsc {
        name: name.to_string(),
        instances: instances.clone(),
        events,
    };
    let bmscs = vec![
        bmsc(
            "attempt",
            vec![Event::new("Client1", "W", "req", 2), Event::new("W", "K1", "req", 2)],
        ),
        bmsc(
            "success",
            vec![Event::new("K1", "W", "ok", 2), Event::new("W", "Client1", "ok", 2)],
        ),
        bmsc("resend", vec![Event::new("K1", "W", "err", 2), Event::new("W", "K1", "req", 2)]),
        bmsc(
            "giveup",
            vec![Event::new("K1", "W", "err", 2), Event::new("W", "Client1", "err", 2)],
        ),
    ];
    let mut hmsc = Hmsc::new("start");
    hmsc.add_node("att", "attempt");
    hmsc.add_node("ok1", "success");
    hmsc.add_node("r1", "resend");
    hmsc.add_node("r2", "resend");
    hmsc.add_node("fail", "giveup");
    hmsc.add_edge("start", "att", None);
    hmsc.add_edge("att", "ok1", None);
    hmsc.add_edge("att", "r1", None);
    hmsc.add_edge("r1", "ok1", None);
    hmsc.add_edge("r1", "r2", None);
    hmsc.add_edge("r2", "ok1", None);
    hmsc.add_edge("r2", "fail", None);
    hmsc.add_edge("ok1", "att", None);
    hmsc.add_edge("fail", "att", None);
    EnhancementSpec {
        name: "retry".to_string(),
        bmscs,
        hmsc,
        wrapper_instance: "W".to_string(),
        coordinator_instance: "K1".to_string(),
        target_components: BTreeSet::from(["Client1".to_string()]),
        note: "wrapper re-sends a rejected request at most twice".to_string(),
    }
}

/// A two-target identity enhancement for [`client_server`]: the wrapper
/// intercepts both sides of `K1` (the client below and the server above) and
/// forwards everything unchanged.
pub fn both_sides_spec() -> EnhancementSpec {
    let instances = vec![
        "Client1".to_string(),
        "Server".to_string(),
        "W".to_string(),
        "K1".to_string(),
    ];
    let bmsc = |name: &str, events: Vec<Event>| Bmsc {
        name: name.to_string(),
        instances: instances.clone(),
        events,
    };
    let bmscs = vec![
        bmsc(
            "take",
            vec![Event::new("Client1", "W", "req", 2), Event::new("W", "K1", "req", 2)],
        ),
        bmsc("relay", vec![Event::new("K1", "W", "req", 3), Event::new("W", "Server", "req", 3)]),
        bmsc("up_ok", vec![Event::new("Server", "W", "ok", 3), Event::new("W", "K1", "ok", 3)]),
        bmsc("up_err", vec![Event::new("Server", "W", "err", 3), Event::new("W", "K1", "err", 3)]),
        bmsc(
            "down_ok",
            vec![Event::new("K1", "W", "ok", 2), Event::new("W", "Client1", "ok", 2)],
        ),
        bmsc(
            "down_err",
            vec![Event::new("K1", "W", "err", 2), Event::new("W", "Client1", "err", 2)],
        ),
    ];
    let mut hmsc = Hmsc::new("start");
    for (node, chart) in [
        ("t", "take"),
        ("r", "relay"),
        ("uo", "up_ok"),
        ("ue", "up_err"),
        ("do", "down_ok"),
        ("de", "down_err"),
    ] {
        hmsc.add_node(node, chart);
    }
    for (from, to) in [
        ("start", "t"),
        ("t", "r"),
        ("r", "uo"),
        ("r", "ue"),
        ("uo", "do"),
        ("ue", "de"),
        ("do", "t"),
        ("de", "t"),
    ] {
        hmsc.add_edge(from, to, None);
    }
    EnhancementSpec {
        name: "bothsides".to_string(),
        bmscs,
        hmsc,
        wrapper_instance: "W".to_string(),
        coordinator_instance: "K1".to_string(),
        target_components: BTreeSet::from(["Client1".to_string(), "Server".to_string()]),
        note: String::new(),
    }
}

/// The fixture corpus: at least ten well-formed systems, each at most eight
/// states per component, paired with the data to build identity specs.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut entries = vec![
        CorpusEntry {
            system: client_server(),
            coordinator: "K1".to_string(),
            targets: vec!["Client1".to_string()],
            sessions: client_server_sessions(),
        },
        CorpusEntry {
            system: duo(),
            coordinator: "Kd".to_string(),
            targets: vec!["Ca".to_string()],
            sessions: vec![duo_sessions()[0].clone()],
        },
    ];

    let singles: Vec<Vec<Session>> = vec![
        vec![Session::new(1, "req", &["ok"])],
        vec![Session::new(1, "req", &["ok", "err", "busy"])],
        vec![Session::new(1, "open", &["opened", "denied"])],
        vec![Session::new(2, "query", &["row", "none"])],
        vec![Session::new(1, "put", &["stored"])],
        vec![Session::new(3, "ping", &["pong", "timeout"])],
    ];
    for (i, sessions) in singles.into_iter().enumerate() {
        let coordinator = format!("K{}", i + 10);
        let client = format!("C{}", i + 10);
        let clients: Vec<&str> = vec![&client];
        entries.push(CorpusEntry {
            system: stateless_system(&coordinator, &sessions, &clients),
            coordinator,
            targets: vec![client.clone()],
            sessions,
        });
    }

    // Two-client systems. The enhancement targets one client each: a
    // session-serializing wrapper in front of two independently requesting
    // clients wedges (the memoryless lower router accepts the second
    // client's request while the wrapper still serves the first), and the
    // deadlock gate rejects such enhancements.
    let pairs: Vec<Vec<Session>> = vec![
        vec![Session::new(1, "lock", &["held"]), Session::new(2, "free", &["done", "late"])],
        vec![Session::new(1, "ask", &["yes", "no"]), Session::new(2, "tell", &["ack"])],
        vec![Session::new(2, "read", &["data"]), Session::new(3, "write", &["ok", "full"])],
    ];
    for (i, sessions) in pairs.into_iter().enumerate() {
        let coordinator = format!("K{}", i + 20);
        let c1 = format!("C{}a", i + 20);
        let c2 = format!("C{}b", i + 20);
        let clients: Vec<&str> = vec![&c1, &c2];
        entries.push(CorpusEntry {
            system: stateless_system(&coordinator, &sessions, &clients),
            coordinator,
            targets: vec![c1.clone()],
            sessions: vec![sessions[0].clone()],
        });
    }

    entries
}

fn out(channel: u32, message: &str, kind: MessageKind) -> Label {
    Label::Act(Action::new(ChannelId(channel), message, Polarity::Output, kind))
}

fn inp(channel: u32, message: &str, kind: MessageKind) -> Label {
    Label::Act(Action::new(ChannelId(channel), message, Polarity::Input, kind))
}

/// A seeded random machine for oracle suites: up to `max_states` states and
/// roughly `2 * states` transitions over a small alphabet, with optional
/// `Tau` steps.
pub fn random_lts(rng: &mut ChaCha8Rng, max_states: usize, with_tau: bool) -> Lts {
    let states = rng.gen_range(1..=max_states);
    let mut l = Lts::new(format!("r{}", rng.gen_range(0..u32::MAX)));
    for i in 1..states {
        l.add_state(format!("s{i}"));
    }
    let letters: Vec<Label> = alphabet_pool();
    let transitions = rng.gen_range(0..=(2 * states));
    for _ in 0..transitions {
        let from = rng.gen_range(0..states);
        let to = rng.gen_range(0..states);
        let label = if with_tau && rng.gen_bool(0.2) {
            Label::Tau
        } else {
            letters[rng.gen_range(0..letters.len())].clone()
        };
        l.add_transition(from, label, to);
    }
    l
}

fn alphabet_pool() -> Vec<Label> {
    vec![
        inp(1, "a", MessageKind::Request),
        out(1, "a", MessageKind::Request),
        inp(2, "b", MessageKind::Request),
        out(2, "b", MessageKind::Notification),
        Label::Sync { channel: ChannelId(3), message: "c".to_string(), kind: MessageKind::Request },
    ]
}

/// Random route-pair fixtures for router synthesis checks: a handful of
/// disjoint (input, output) channel pairs with non-empty message sets.
pub fn random_route_pairs(rng: &mut ChaCha8Rng) -> Vec<crate::synth::RoutePair> {
    let names = ["req", "ok", "err", "get", "val", "ping", "pong", "ack"];
    let pair_count = rng.gen_range(1..=4);
    let mut next_channel = rng.gen_range(1..=5);
    let mut pairs = Vec::new();
    for _ in 0..pair_count {
        let input = next_channel;
        let output = next_channel + 1;
        next_channel += 2;
        let mut messages = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=3) {
            messages.insert(names[rng.gen_range(0..names.len())].to_string());
        }
        let kind =
            if rng.gen_bool(0.5) { MessageKind::Request } else { MessageKind::Notification };
        pairs.push(crate::synth::RoutePair {
            input: ChannelId(input),
            output: ChannelId(output),
            messages,
            kind,
        });
    }
    pairs
}

/// Convenience seeded RNG.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
