//! The architecture metamodel: components and coordinators with top/bottom
//! ports, synchronous connectors, structural well-formedness checks, the
//! coordinator alternation discipline, and whole-system closure.

mod text;

pub use text::{parse_cba, write_cba, CbaFiles};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::action::{ChannelId, Label, MessageKind, Polarity};
use crate::lts::{parallel_compose, Lts};

/// Which side of a component a port sits on. Requests leave through top
/// ports and arrive through bottom ports; notifications flow the other way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Top,
    Bottom,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Top => write!(f, "top"),
            Side::Bottom => write!(f, "bottom"),
        }
    }
}

/// A component's attachment point, identified by owner, side, and index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Port {
    pub owner: String,
    pub side: Side,
    pub index: u32,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}[{}]", self.owner, self.side, self.index)
    }
}

/// Binds one port of a component to a connector. A top port occupies the
/// connector's bottom role and a bottom port its top role.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PortBinding {
    pub side: Side,
    pub index: u32,
    pub channel: ChannelId,
}

/// Derived view of a connector: the two ports occupying its roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connector {
    pub id: ChannelId,
    /// Bound by a bottom port of the upper party.
    pub top_role: Option<Port>,
    /// Bound by a top port of the lower party.
    pub bottom_role: Option<Port>,
}

/// A component (possibly a coordinator) with its port bindings and behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub is_coordinator: bool,
    pub bindings: Vec<PortBinding>,
    pub behavior: Lts,
}

impl Component {
    pub fn new(name: impl Into<String>, is_coordinator: bool, behavior: Lts) -> Self {
        Component { name: name.into(), is_coordinator, bindings: Vec::new(), behavior }
    }

    pub fn bind(mut self, side: Side, index: u32, channel: u32) -> Self {
        self.bindings.push(PortBinding { side, index, channel: ChannelId(channel) });
        self
    }

    pub fn bound_channels(&self) -> BTreeSet<ChannelId> {
        self.bindings.iter().map(|b| b.channel).collect()
    }

    pub fn binding_for_channel(&self, channel: ChannelId) -> Option<&PortBinding> {
        self.bindings.iter().find(|b| b.channel == channel)
    }

    /// Channels of `Act` labels in the behavior (`Sync` and `Tau` excluded).
    pub fn action_channels(&self) -> BTreeSet<ChannelId> {
        self.behavior
            .alphabet()
            .into_iter()
            .filter_map(|l| match l {
                Label::Act(a) => Some(a.channel),
                _ => None,
            })
            .collect()
    }
}

/// A coordinator-based architecture: components wired through synchronous
/// connectors, a fresh-channel counter for decoupling, and the bookkeeping of
/// glue blocks that act as single logical coordinators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbaSystem {
    components: BTreeMap<String, Component>,
    next_fresh: u32,
    glue_groups: BTreeMap<String, BTreeSet<String>>,
}

impl Default for CbaSystem {
    fn default() -> Self {
        Self::new()
    }
}

impl CbaSystem {
    pub fn new() -> Self {
        CbaSystem { components: BTreeMap::new(), next_fresh: 1, glue_groups: BTreeMap::new() }
    }

    /// Reads a `.cba` file, loading referenced behavior files relative to it.
    pub fn load(path: &Path) -> Result<Self, crate::error::ParseError> {
        text::load_cba(path)
    }

    pub fn add_component(&mut self, component: Component) {
        let max = component.bindings.iter().map(|b| b.channel.0).max().unwrap_or(0);
        self.next_fresh = self.next_fresh.max(max + 1);
        self.components.insert(component.name.clone(), component);
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.get(name)
    }

    pub fn component_mut(&mut self, name: &str) -> Option<&mut Component> {
        self.components.get_mut(name)
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.components.values()
    }

    pub fn component_names(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(|s| s.as_str())
    }

    pub fn coordinators(&self) -> impl Iterator<Item = &Component> {
        self.components().filter(|c| c.is_coordinator)
    }

    pub fn next_fresh_channel(&self) -> u32 {
        self.next_fresh
    }

    pub fn set_next_fresh_channel(&mut self, n: u32) {
        self.next_fresh = n;
    }

    /// Hands out the next unused channel identifier.
    pub fn allocate_channel(&mut self) -> ChannelId {
        let c = ChannelId(self.next_fresh);
        self.next_fresh += 1;
        c
    }

    pub fn glue_groups(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.glue_groups
    }

    pub fn add_glue_group(&mut self, name: impl Into<String>, members: BTreeSet<String>) {
        self.glue_groups.insert(name.into(), members);
    }

    /// All channels bound by some port.
    pub fn channels(&self) -> BTreeSet<ChannelId> {
        self.components().flat_map(|c| c.bindings.iter().map(|b| b.channel)).collect()
    }

    /// The components (with binding sides) attached to a channel.
    pub fn endpoints(&self, channel: ChannelId) -> Vec<(&Component, Side)> {
        let mut out = Vec::new();
        for comp in self.components() {
            for binding in &comp.bindings {
                if binding.channel == channel {
                    out.push((comp, binding.side));
                }
            }
        }
        out
    }

    /// Derived connector view for a channel.
    pub fn connector(&self, channel: ChannelId) -> Option<Connector> {
        let endpoints = self.endpoints(channel);
        if endpoints.is_empty() {
            return None;
        }
        let mut connector = Connector { id: channel, top_role: None, bottom_role: None };
        for (comp, side) in endpoints {
            let binding = comp.bindings.iter().find(|b| b.channel == channel && b.side == side);
            let port = Port {
                owner: comp.name.clone(),
                side,
                index: binding.map(|b| b.index).unwrap_or(0),
            };
            match side {
                // A bottom port occupies the connector's top role.
                Side::Bottom if connector.top_role.is_none() => connector.top_role = Some(port),
                Side::Top if connector.bottom_role.is_none() => connector.bottom_role = Some(port),
                _ => {}
            }
        }
        Some(connector)
    }

    /// Channels whose connectors join `a` and `b`.
    pub fn channels_between(&self, a: &str, b: &str) -> BTreeSet<ChannelId> {
        self.channels()
            .into_iter()
            .filter(|&c| {
                let owners: BTreeSet<&str> =
                    self.endpoints(c).into_iter().map(|(comp, _)| comp.name.as_str()).collect();
                owners.contains(a) && owners.contains(b) && a != b
            })
            .collect()
    }

    fn same_glue_group(&self, a: &str, b: &str) -> bool {
        self.glue_groups.values().any(|members| members.contains(a) && members.contains(b))
    }

    /// Structural well-formedness per the architectural style. An empty
    /// report means the system is well-formed.
    pub fn validate_architecture(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        if !self.components.values().any(|c| c.is_coordinator) {
            violations.push(Violation::NoCoordinator);
        }

        // Port uniqueness within each component.
        for comp in self.components() {
            let mut seen = BTreeSet::new();
            for binding in &comp.bindings {
                if !seen.insert((binding.side, binding.index)) {
                    violations.push(Violation::DuplicatePort {
                        port: Port {
                            owner: comp.name.clone(),
                            side: binding.side,
                            index: binding.index,
                        },
                    });
                }
            }
        }

        // Connector role occupancy: each role bound by exactly one port.
        for channel in self.channels() {
            let endpoints = self.endpoints(channel);
            let tops: Vec<Port> = port_list(&endpoints, Side::Bottom);
            let bottoms: Vec<Port> = port_list(&endpoints, Side::Top);
            if tops.len() > 1 {
                violations.push(Violation::RoleConflict { channel, ports: tops.clone() });
            }
            if bottoms.len() > 1 {
                violations.push(Violation::RoleConflict { channel, ports: bottoms.clone() });
            }
            if tops.is_empty() || bottoms.is_empty() {
                violations.push(Violation::DanglingConnector {
                    channel,
                    missing: if tops.is_empty() { Side::Top } else { Side::Bottom },
                });
            } else if tops.len() == 1 && bottoms.len() == 1 {
                let upper = &self.components[&tops[0].owner];
                let lower = &self.components[&bottoms[0].owner];
                if upper.name == lower.name {
                    violations.push(Violation::LayerRule {
                        channel,
                        reason: "connector joins a component to itself".to_string(),
                    });
                } else if !self.same_glue_group(&upper.name, &lower.name)
                    && upper.is_coordinator == lower.is_coordinator
                {
                    let reason = if upper.is_coordinator {
                        "connector joins two coordinators"
                    } else {
                        "connector joins two non-coordinators"
                    };
                    violations.push(Violation::LayerRule { channel, reason: reason.to_string() });
                }
            }
        }

        // Behavior alphabets: action labels only, on bound channels, with
        // the request/notification orientation dictated by the port side.
        for comp in self.components() {
            let bound = comp.bound_channels();
            for label in comp.behavior.alphabet() {
                let action = match &label {
                    Label::Act(a) => a,
                    other => {
                        violations.push(Violation::NonActionLabel {
                            component: comp.name.clone(),
                            label: other.clone(),
                        });
                        continue;
                    }
                };
                if !bound.contains(&action.channel) {
                    violations.push(Violation::UnboundChannel {
                        component: comp.name.clone(),
                        channel: action.channel,
                    });
                    continue;
                }
                let binding = comp.binding_for_channel(action.channel).unwrap();
                let expected = expected_kind(binding.side, action.polarity);
                if action.kind != expected {
                    violations.push(Violation::KindOrientation {
                        component: comp.name.clone(),
                        label: label.clone(),
                        expected,
                    });
                }
            }
        }

        // Fresh-channel counter must clear every declared channel.
        if let Some(max) = self.channels().iter().map(|c| c.0).max() {
            if self.next_fresh <= max {
                violations.push(Violation::FreshCounterTooLow {
                    declared: self.next_fresh,
                    max_channel: max,
                });
            }
        }

        // Glue groups may only list existing components.
        for (group, members) in &self.glue_groups {
            for member in members {
                if !self.components.contains_key(member) {
                    violations.push(Violation::UnknownGroupMember {
                        group: group.clone(),
                        member: member.clone(),
                    });
                }
            }
        }

        violations
    }

    /// Synchronous closure of the whole system: the left-fold of parallel
    /// composition over all component behaviors, synchronizing on every
    /// connector channel. Fails if the architecture is invalid, a coordinator
    /// breaks strict alternation, or some channel ends up one-sided.
    pub fn close_system(&self) -> Result<Lts, CloseError> {
        let report = self.validate_architecture();
        // Half-bound connectors surface as the more precise open-system
        // error after composition; anything else aborts here.
        let dangling_only =
            report.iter().all(|v| matches!(v, Violation::DanglingConnector { .. }));
        if !report.is_empty() && !dangling_only {
            return Err(CloseError::InvalidArchitecture(report));
        }
        for coord in self.coordinators() {
            if let AlternationCheck::Violation(v) = check_strict_alternation(coord) {
                return Err(CloseError::NotAlternating { component: coord.name.clone(), violation: v });
            }
        }
        let behaviors: Vec<&Component> = self.components().collect();
        let closed = compose_all(&behaviors);
        let open: BTreeSet<ChannelId> = closed
            .alphabet()
            .into_iter()
            .filter_map(|l| match l {
                Label::Act(a) => Some(a.channel),
                _ => None,
            })
            .collect();
        if !open.is_empty() {
            return Err(CloseError::OpenSystem { channels: open });
        }
        Ok(closed.with_name("closed"))
    }
}

fn port_list(endpoints: &[(&Component, Side)], side: Side) -> Vec<Port> {
    endpoints
        .iter()
        .filter(|(_, s)| *s == side)
        .map(|(comp, s)| {
            let binding = comp.bindings.iter().find(|b| b.side == *s).map(|b| b.index);
            Port { owner: comp.name.clone(), side: *s, index: binding.unwrap_or(0) }
        })
        .collect()
}

/// Folds `parallel_compose` over component behaviors, synchronizing each step
/// on the channels both sides act on.
pub(crate) fn compose_all(components: &[&Component]) -> Lts {
    let mut iter = components.iter();
    let first = match iter.next() {
        Some(c) => c,
        None => return Lts::new("closed"),
    };
    let mut acc = first.behavior.clone();
    let mut acc_channels = first.action_channels();
    for comp in iter {
        let sync: BTreeSet<ChannelId> =
            acc_channels.intersection(&comp.action_channels()).copied().collect();
        acc = parallel_compose(&acc, &comp.behavior, &sync);
        acc_channels = acc_channels.union(&comp.action_channels()).copied().collect();
    }
    acc
}

fn expected_kind(side: Side, polarity: Polarity) -> MessageKind {
    match (side, polarity) {
        (Side::Top, Polarity::Output) => MessageKind::Request,
        (Side::Top, Polarity::Input) => MessageKind::Notification,
        (Side::Bottom, Polarity::Output) => MessageKind::Notification,
        (Side::Bottom, Polarity::Input) => MessageKind::Request,
    }
}

/// One structural rule violation; the full report is a `Vec<Violation>`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("system has no coordinator")]
    NoCoordinator,
    #[error("port {port} declared more than once")]
    DuplicatePort { port: Port },
    #[error("connector {channel} role bound by more than one port: {ports:?}")]
    RoleConflict { channel: ChannelId, ports: Vec<Port> },
    #[error("connector {channel} is dangling: {missing} role unbound")]
    DanglingConnector { channel: ChannelId, missing: Side },
    #[error("component {component} behavior uses channel {channel} bound to none of its ports")]
    UnboundChannel { component: String, channel: ChannelId },
    #[error("component {component} label {label} should be a {expected}")]
    KindOrientation { component: String, label: Label, expected: MessageKind },
    #[error("channel {channel} violates the single-layer rule: {reason}")]
    LayerRule { channel: ChannelId, reason: String },
    #[error("component {component} behavior carries non-action label {label}")]
    NonActionLabel { component: String, label: Label },
    #[error("freshfrom {declared} does not clear the highest declared channel {max_channel}")]
    FreshCounterTooLow { declared: u32, max_channel: u32 },
    #[error("glue group {group} references unknown component {member}")]
    UnknownGroupMember { group: String, member: String },
}

/// Outcome of the coordinator alternation check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlternationCheck {
    Ok,
    Violation(AlternationViolation),
}

impl AlternationCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, AlternationCheck::Ok)
    }
}

/// A state where the input-output discipline breaks, with the transition
/// pair that witnesses it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("state {state}: {reason} (incoming {incoming:?}, outgoing {outgoing})")]
pub struct AlternationViolation {
    pub state: String,
    pub incoming: Option<Label>,
    pub outgoing: Label,
    pub reason: String,
}

/// Checks the coordinator discipline: every input is strictly followed by a
/// corresponding output with the same message name, and states reached by
/// outputs (as well as the initial state) only accept inputs.
pub fn check_strict_alternation(coord: &Component) -> AlternationCheck {
    let behavior = &coord.behavior;
    let reachable = behavior.reachable();

    // Incoming labels per reachable state.
    let mut incoming: BTreeMap<usize, BTreeSet<Label>> = BTreeMap::new();
    for (from, label, to) in behavior.transitions() {
        if reachable.contains(&from) {
            incoming.entry(to).or_default().insert(label.clone());
        }
    }

    for &state in &reachable {
        let entries = incoming.get(&state);
        let entered_by_output = state == behavior.initial()
            || entries.is_some_and(|ls| {
                ls.iter().any(|l| matches!(l, Label::Act(a) if a.polarity == Polarity::Output))
            });
        let entering_inputs: Vec<&Label> = entries
            .map(|ls| {
                ls.iter()
                    .filter(|l| matches!(l, Label::Act(a) if a.polarity == Polarity::Input))
                    .collect()
            })
            .unwrap_or_default();

        for (label, _) in behavior.outgoing(state) {
            let action = match label {
                Label::Act(a) => a,
                other => {
                    return AlternationCheck::Violation(AlternationViolation {
                        state: behavior.state_name(state).to_string(),
                        incoming: None,
                        outgoing: other.clone(),
                        reason: "coordinator behavior must contain only actions".to_string(),
                    })
                }
            };
            if entered_by_output && action.polarity != Polarity::Input {
                return AlternationCheck::Violation(AlternationViolation {
                    state: behavior.state_name(state).to_string(),
                    incoming: entries.and_then(|ls| ls.iter().next().cloned()),
                    outgoing: label.clone(),
                    reason: "expected only inputs after an output".to_string(),
                });
            }
            for entering in &entering_inputs {
                let entering_msg = entering.message().unwrap_or_default();
                if action.polarity != Polarity::Output {
                    return AlternationCheck::Violation(AlternationViolation {
                        state: behavior.state_name(state).to_string(),
                        incoming: Some((*entering).clone()),
                        outgoing: label.clone(),
                        reason: "expected only outputs after an input".to_string(),
                    });
                }
                if action.message != entering_msg {
                    return AlternationCheck::Violation(AlternationViolation {
                        state: behavior.state_name(state).to_string(),
                        incoming: Some((*entering).clone()),
                        outgoing: label.clone(),
                        reason: "output message does not correspond to the entering input"
                            .to_string(),
                    });
                }
            }
        }
    }
    AlternationCheck::Ok
}

/// Failure modes of [`CbaSystem::close_system`].
#[derive(Debug, Clone, Error)]
pub enum CloseError {
    #[error("architecture is not well-formed: {}", format_report(.0))]
    InvalidArchitecture(Vec<Violation>),
    #[error("coordinator {component} breaks strict alternation: {violation}")]
    NotAlternating { component: String, violation: AlternationViolation },
    #[error("system is open: channels {channels:?} have a single participant")]
    OpenSystem { channels: BTreeSet<ChannelId> },
}

fn format_report(report: &[Violation]) -> String {
    report.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[cfg(test)]
mod tests;
