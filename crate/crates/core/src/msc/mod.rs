//! Basic and high-level message sequence charts describing coordinator
//! protocol enhancements, and the synthesis of per-instance behavior models
//! from them.

mod parse;

pub use parse::{parse_msc, MscParseError};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::action::{Action, ChannelId, Label, MessageKind, Polarity};
use crate::lts::{determinize, minimize, Lts, StateId};

/// One synchronous interaction of a bMSC: `sender -> receiver : message @ channel`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub sender: String,
    pub receiver: String,
    pub message: String,
    pub channel: ChannelId,
}

impl Event {
    pub fn new(sender: &str, receiver: &str, message: &str, channel: u32) -> Self {
        Event {
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            message: message.to_string(),
            channel: ChannelId(channel),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} : {} @ {}", self.sender, self.receiver, self.message, self.channel)
    }
}

/// A basic MSC: an ordered list of events over declared instances. Because
/// connectors are synchronous, the vertical order is a total order of atomic
/// interactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bmsc {
    pub name: String,
    pub instances: Vec<String>,
    pub events: Vec<Event>,
}

/// A high-level MSC: a graph over bMSC references with one initial node and
/// optional final nodes. `repeat` annotations on self-edges are sugar that
/// [`Hmsc::expand`] unrolls into bounded chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hmsc {
    pub initial: String,
    pub finals: BTreeSet<String>,
    /// node id -> referenced bMSC name
    pub nodes: BTreeMap<String, String>,
    pub edges: BTreeSet<(String, String)>,
    pub repeats: BTreeMap<(String, String), u32>,
}

impl Hmsc {
    pub fn new(initial: &str) -> Self {
        Hmsc {
            initial: initial.to_string(),
            finals: BTreeSet::new(),
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
            repeats: BTreeMap::new(),
        }
    }

    pub fn add_node(&mut self, id: &str, bmsc: &str) {
        self.nodes.insert(id.to_string(), bmsc.to_string());
    }

    pub fn add_final(&mut self, id: &str) {
        self.finals.insert(id.to_string());
    }

    pub fn add_edge(&mut self, from: &str, to: &str, repeat: Option<u32>) {
        self.edges.insert((from.to_string(), to.to_string()));
        if let Some(n) = repeat {
            self.repeats.insert((from.to_string(), to.to_string()), n);
        }
    }

    fn is_node_id(&self, id: &str) -> bool {
        id == self.initial || self.finals.contains(id) || self.nodes.contains_key(id)
    }

    /// Unrolls every `repeat` annotation. A self-edge `a -> a repeat n`
    /// becomes a chain of `n` fresh copies of `a`, each inheriting `a`'s
    /// non-self out-edges, so the node body runs between 1 and `n + 1` times.
    pub fn expand(&self) -> Result<Hmsc, String> {
        let mut out = self.clone();
        out.repeats.clear();
        for (&(ref from, ref to), &n) in &self.repeats {
            if from != to {
                return Err(format!("repeat annotation on non-self edge {from} -> {to}"));
            }
            out.edges.remove(&(from.clone(), to.clone()));
            let exits: Vec<String> = out
                .edges
                .iter()
                .filter(|(a, b)| a == from && b != from)
                .map(|(_, b)| b.clone())
                .collect();
            let mut prev = from.clone();
            for i in 1..=n {
                let copy = format!("{from}__r{i}");
                if out.is_node_id(&copy) {
                    return Err(format!("unrolled node name {copy} collides"));
                }
                out.nodes.insert(copy.clone(), self.nodes[from].clone());
                out.edges.insert((prev.clone(), copy.clone()));
                for exit in &exits {
                    out.edges.insert((copy.clone(), exit.clone()));
                }
                prev = copy;
            }
        }
        Ok(out)
    }

    /// Node ids reachable from the initial node.
    pub fn reachable(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([self.initial.clone()]);
        let mut queue = VecDeque::from([self.initial.clone()]);
        while let Some(node) = queue.pop_front() {
            for (from, to) in &self.edges {
                if *from == node && seen.insert(to.clone()) {
                    queue.push_back(to.clone());
                }
            }
        }
        seen
    }
}

/// A full enhancement specification: the charts, the instance playing the
/// wrapper, the instance standing for the coordinator, and the components
/// whose channels the wrapper intercepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnhancementSpec {
    pub name: String,
    pub bmscs: Vec<Bmsc>,
    pub hmsc: Hmsc,
    pub wrapper_instance: String,
    pub coordinator_instance: String,
    pub target_components: BTreeSet<String>,
    /// Free-text metadata, e.g. a bound note for retry policies.
    pub note: String,
}

impl EnhancementSpec {
    pub fn bmsc(&self, name: &str) -> Option<&Bmsc> {
        self.bmscs.iter().find(|b| b.name == name)
    }

    /// Checks the type invariants; `Err` carries a human-readable reason.
    pub fn validate(&self) -> Result<(), String> {
        if self.target_components.is_empty() {
            return Err("targets must be nonempty".to_string());
        }
        let mut names = BTreeSet::new();
        for b in &self.bmscs {
            if !names.insert(&b.name) {
                return Err(format!("duplicate bMSC `{}`", b.name));
            }
            for required in [&self.wrapper_instance, &self.coordinator_instance] {
                if !b.instances.contains(required) {
                    return Err(format!("bMSC `{}` does not declare instance `{required}`", b.name));
                }
            }
            let mut pair_channel: BTreeMap<(String, String), ChannelId> = BTreeMap::new();
            for e in &b.events {
                if e.sender == e.receiver {
                    return Err(format!("bMSC `{}`: event `{e}` sends to itself", b.name));
                }
                for inst in [&e.sender, &e.receiver] {
                    if !b.instances.contains(inst) {
                        return Err(format!(
                            "bMSC `{}`: event `{e}` uses undeclared instance `{inst}`",
                            b.name
                        ));
                    }
                }
                let key = pair_key(&e.sender, &e.receiver);
                if let Some(prev) = pair_channel.insert(key, e.channel) {
                    if prev != e.channel {
                        return Err(format!(
                            "bMSC `{}`: pair {}/{} uses channels {} and {}",
                            b.name, e.sender, e.receiver, prev, e.channel
                        ));
                    }
                }
            }
        }
        let hmsc = self.hmsc.expand()?;
        if hmsc.nodes.contains_key(&hmsc.initial) || hmsc.finals.contains(&hmsc.initial) {
            return Err("the initial node must be a pure marker".to_string());
        }
        for f in &hmsc.finals {
            if hmsc.nodes.contains_key(f) {
                return Err(format!("final node `{f}` must be a pure marker"));
            }
        }
        for (node, bmsc) in &hmsc.nodes {
            if !names.contains(bmsc) {
                return Err(format!("HMSC node `{node}` references undeclared bMSC `{bmsc}`"));
            }
        }
        for (from, to) in &hmsc.edges {
            for id in [from, to] {
                if !hmsc.is_node_id(id) {
                    return Err(format!("HMSC edge references undeclared node `{id}`"));
                }
            }
            if hmsc.finals.contains(from) {
                return Err(format!("edge leaves final node `{from}`"));
            }
            if to == &hmsc.initial {
                return Err("edges may not target the initial marker".to_string());
            }
        }
        let reachable = hmsc.reachable();
        for node in hmsc.nodes.keys().chain(hmsc.finals.iter()) {
            if !reachable.contains(node) {
                return Err(format!("HMSC node `{node}` is unreachable from the initial node"));
            }
        }
        Ok(())
    }

    fn rank(&self, instance: &str) -> u8 {
        if instance == self.coordinator_instance {
            2
        } else if instance == self.wrapper_instance {
            1
        } else {
            0
        }
    }

    /// Message kind of an event under the component < wrapper < coordinator
    /// ordering: moving toward the coordinator is a request (upward), moving
    /// away a notification. Synthesis normalizes kinds against the actual
    /// port sides afterwards.
    pub fn event_kind(&self, event: &Event) -> MessageKind {
        if self.rank(&event.sender) < self.rank(&event.receiver) {
            MessageKind::Request
        } else {
            MessageKind::Notification
        }
    }
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, Error)]
pub enum MscError {
    #[error("instance `{0}` does not occur in the chart")]
    UnknownInstance(String),
    #[error("invalid enhancement spec: {0}")]
    InvalidSpec(String),
}

/// Projects one bMSC on an instance: a linear machine with one transition
/// per event involving the instance, in event order. Sends become outputs,
/// receives inputs; events not involving the instance are skipped. Kinds
/// default to requests (the chart does not carry them).
pub fn project_instance(b: &Bmsc, instance: &str) -> Result<Lts, MscError> {
    if !b.instances.iter().any(|i| i == instance) {
        return Err(MscError::UnknownInstance(instance.to_string()));
    }
    Ok(project_with(b, instance, &|_| MessageKind::Request, &|e| e.channel))
}

fn project_with(
    b: &Bmsc,
    instance: &str,
    kind_of: &dyn Fn(&Event) -> MessageKind,
    channel_of: &dyn Fn(&Event) -> ChannelId,
) -> Lts {
    let mut l = Lts::new(format!("{}_{}", b.name, instance)).with_name(format!("{}_{}", b.name, instance));
    let mut current: StateId = 0;
    let mut counter = 0;
    for event in &b.events {
        let polarity = if event.sender == instance {
            Polarity::Output
        } else if event.receiver == instance {
            Polarity::Input
        } else {
            continue;
        };
        counter += 1;
        let next = l.add_state(format!("t{counter}"));
        let action = Action::new(channel_of(event), &event.message, polarity, kind_of(event));
        l.add_transition(current, Label::Act(action), next);
        current = next;
    }
    l
}

/// Synthesizes the behavior of `instance` over the whole specification:
/// per-node projections concatenated along the HMSC edges (the end of a
/// node's projection feeds the start of its successors'; branching becomes
/// choice, cycles become loops, HMSC finality marks final states), then
/// determinized and minimized.
pub fn msc_to_lts(spec: &EnhancementSpec, instance: &str) -> Result<Lts, MscError> {
    msc_to_lts_with(spec, instance, &|e| e.channel)
}

/// Like [`msc_to_lts`] with a per-event channel override; the synthesis
/// engine uses it to land wrapper behaviors on fresh channels.
pub fn msc_to_lts_with(
    spec: &EnhancementSpec,
    instance: &str,
    channel_of: &dyn Fn(&Event) -> ChannelId,
) -> Result<Lts, MscError> {
    spec.validate().map_err(MscError::InvalidSpec)?;
    let occurs = spec.bmscs.iter().any(|b| b.instances.iter().any(|i| i == instance));
    if !occurs {
        return Err(MscError::UnknownInstance(instance.to_string()));
    }
    let hmsc = spec.hmsc.expand().map_err(MscError::InvalidSpec)?;

    let mut raw = Lts::new(format!("{}_{}", spec.name, instance));
    // Embed each node's linear projection, remembering entry and exit states.
    let mut entry: BTreeMap<&str, StateId> = BTreeMap::new();
    let mut exit: BTreeMap<&str, StateId> = BTreeMap::new();
    for (node, bmsc_name) in &hmsc.nodes {
        let bmsc = spec.bmsc(bmsc_name).expect("validated");
        let fragment = project_with(bmsc, instance, &|e| spec.event_kind(e), channel_of);
        let offset = raw.state_count();
        for s in fragment.states() {
            raw.add_state(format!("{node}_{s}"));
            let _ = s;
        }
        for (from, label, to) in fragment.transitions() {
            raw.add_transition(offset + from, label.clone(), offset + to);
        }
        entry.insert(node, offset + fragment.initial());
        exit.insert(node, offset + (fragment.state_count() - 1));
    }

    for (from, to) in &hmsc.edges {
        let source = if *from == hmsc.initial { raw.initial() } else { exit[from.as_str()] };
        if hmsc.finals.contains(to) {
            raw.mark_final(source);
        } else {
            raw.add_transition(source, Label::Tau, entry[to.as_str()]);
        }
    }

    let name = raw.name().to_string();
    Ok(minimize(&determinize(&raw)).with_name(name))
}
