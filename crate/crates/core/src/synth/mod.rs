//! The enhancement pipeline: extract the sub-coordinator, check the
//! specification against its actual behavior, decouple coordinator and target
//! components, derive the wrapper, synthesize the two router coordinators,
//! and assemble the enhanced glue `(K | K' | K'' | W)`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::action::{Action, ChannelId, Label, MessageKind, Polarity};
use crate::cba::{
    check_strict_alternation, compose_all, AlternationCheck, AlternationViolation, CbaSystem,
    CloseError, Component, PortBinding, Side, Violation,
};
use crate::error::CollisionError;
use crate::lts::{determinize, minimize, trace_equivalent, Lts};
use crate::lts::{Side as EquivSide, TraceEquivalence};
use crate::msc::{msc_to_lts, msc_to_lts_with, EnhancementSpec, MscError};

/// The portion of a coordinator that talks to the selected components: its
/// behavior filtered to the target channels, determinized and minimized.
#[derive(Debug, Clone)]
pub struct SubCoordinator {
    pub source_coordinator: String,
    pub target_channels: BTreeSet<ChannelId>,
    pub behavior: Lts,
}

/// Fresh-channel bookkeeping of one enhancement. For every original target
/// channel `c` four fresh channels are allocated: the coordinator's rebind
/// `c'`, the component's rebind `c''`, and the wrapper's own connectors
/// toward the upper router (`coordinator` side) and the lower router
/// (`component` side).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChannelMap {
    pub coordinator_side: BTreeMap<ChannelId, ChannelId>,
    pub component_side: BTreeMap<ChannelId, ChannelId>,
    pub wrapper_coordinator_side: BTreeMap<ChannelId, ChannelId>,
    pub wrapper_component_side: BTreeMap<ChannelId, ChannelId>,
}

/// One routing obligation: accept each message of `messages` on `input` and
/// immediately re-emit it unchanged on `output`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutePair {
    pub input: ChannelId,
    pub output: ChannelId,
    pub messages: BTreeSet<String>,
    pub kind: MessageKind,
}

/// The synthesized glue block: the old coordinator, the two routers, the
/// wrapper, their composite behavior, and the channel-map provenance.
#[derive(Debug, Clone)]
pub struct EnhancedGlue {
    pub old_coordinator: Component,
    pub router_to_coordinator: Component,
    pub router_to_components: Component,
    pub wrapper: Component,
    pub composite: Lts,
    pub channel_map: ChannelMap,
    /// Name of the glue group in the enhanced system; subsequent
    /// enhancements may target it like a coordinator.
    pub group: String,
}

/// Verdict of [`check_conformance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conformance {
    Ok,
    /// `witness` is a shortest trace in exactly one of the two machines;
    /// `in_actual` tells whether the coordinator (rather than the spec)
    /// exhibits it.
    Mismatch { witness: Vec<Label>, in_actual: bool },
}

impl Conformance {
    pub fn is_ok(&self) -> bool {
        matches!(self, Conformance::Ok)
    }
}

#[derive(Debug, Clone, Error)]
pub enum SynthError {
    #[error("architecture is not well-formed: {0:?}")]
    InvalidArchitecture(Vec<Violation>),
    #[error("coordinator {component} breaks strict alternation: {violation}")]
    NotAlternating { component: String, violation: AlternationViolation },
    #[error("`{0}` names neither a coordinator component nor a glue group")]
    UnknownCoordinator(String),
    #[error("target `{0}` is not a component of the system")]
    UnknownTarget(String),
    #[error("target `{target}` shares no connector with coordinator `{coordinator}`")]
    NotConnected { coordinator: String, target: String },
    #[error("chart uses channel {channel} which is not a target channel")]
    SpecChannel { channel: ChannelId },
    #[error("specification does not reflect the coordinator behavior; witness: {}",
            format_trace(.witness))]
    Conformance { witness: Vec<Label>, in_actual: bool },
    #[error("glue composite deadlocks after {}", format_trace(.trace))]
    Deadlock { trace: Vec<Label> },
    #[error("name `{0}` already exists in the system")]
    NameClash(String),
    #[error(transparent)]
    Collision(#[from] CollisionError),
    #[error(transparent)]
    Msc(#[from] MscError),
    #[error(transparent)]
    Close(#[from] CloseError),
}

pub fn format_trace(trace: &[Label]) -> String {
    if trace.is_empty() {
        "<empty trace>".to_string()
    } else {
        trace.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// A coordinator as the pipeline sees it: either a plain coordinator
/// component or a glue group acting as one, with the composite behavior.
#[derive(Debug, Clone)]
pub struct CoordinatorView {
    pub name: String,
    pub members: BTreeSet<String>,
    pub behavior: Lts,
}

/// Resolves a coordinator name against components and glue groups.
pub fn coordinator_view(sys: &CbaSystem, name: &str) -> Result<CoordinatorView, SynthError> {
    if let Some(members) = sys.glue_groups().get(name) {
        let components: Vec<&Component> =
            members.iter().filter_map(|m| sys.component(m)).collect();
        if components.len() != members.len() {
            return Err(SynthError::UnknownCoordinator(name.to_string()));
        }
        let behavior = compose_all(&components).with_name(name.to_string());
        return Ok(CoordinatorView {
            name: name.to_string(),
            members: members.clone(),
            behavior,
        });
    }
    match sys.component(name) {
        Some(c) if c.is_coordinator => Ok(CoordinatorView {
            name: name.to_string(),
            members: BTreeSet::from([name.to_string()]),
            behavior: c.behavior.clone(),
        }),
        _ => Err(SynthError::UnknownCoordinator(name.to_string())),
    }
}

/// Channels joining the coordinator view to each target, unioned. Errors if
/// some target shares no connector with the view.
fn target_channels(
    sys: &CbaSystem,
    view: &CoordinatorView,
    targets: &BTreeSet<String>,
) -> Result<BTreeSet<ChannelId>, SynthError> {
    let mut channels = BTreeSet::new();
    for target in targets {
        if sys.component(target).is_none() {
            return Err(SynthError::UnknownTarget(target.clone()));
        }
        let mut any = false;
        for member in &view.members {
            let between = sys.channels_between(member, target);
            any |= !between.is_empty();
            channels.extend(between);
        }
        if !any {
            return Err(SynthError::NotConnected {
                coordinator: view.name.clone(),
                target: target.clone(),
            });
        }
    }
    Ok(channels)
}

/// Filters the coordinator behavior to the channels shared with `targets`:
/// `minimize(determinize(hide(behavior, target channels)))`.
///
/// For a glue group the filtering runs in context: the composite alone
/// over-approximates the boundary behavior (its memoryless routers accept
/// requests the inner wrapper is not ready for), so the group is composed
/// with the target components first and the resulting handshakes are read
/// back as the glue-side actions.
pub fn extract_sub_coordinator(
    sys: &CbaSystem,
    coordinator: &str,
    targets: &BTreeSet<String>,
) -> Result<SubCoordinator, SynthError> {
    let view = coordinator_view(sys, coordinator)?;
    let channels = target_channels(sys, &view, targets)?;
    let filtered = if view.members.len() == 1 {
        view.behavior.hide(&channels)
    } else {
        // Glue-side action lookup per (channel, message).
        let mut glue_actions: BTreeMap<(ChannelId, String), (Polarity, MessageKind)> =
            BTreeMap::new();
        for member in &view.members {
            for label in sys.component(member).expect("member exists").behavior.alphabet() {
                if let Label::Act(a) = label {
                    if channels.contains(&a.channel) {
                        glue_actions
                            .entry((a.channel, a.message.clone()))
                            .or_insert((a.polarity, a.kind));
                    }
                }
            }
        }
        let mut participants: Vec<&Component> =
            view.members.iter().map(|m| sys.component(m).expect("member exists")).collect();
        for target in targets {
            participants.push(sys.component(target).expect("target exists"));
        }
        participants.sort_by(|a, b| a.name.cmp(&b.name));
        let in_context = compose_all(&participants).hide(&channels);
        unsync(&in_context, &glue_actions)
    };
    let behavior =
        minimize(&determinize(&filtered)).with_name(format!("{}_kbac", view.name));
    Ok(SubCoordinator {
        source_coordinator: view.name,
        target_channels: channels,
        behavior,
    })
}

/// Rewrites `Sync` labels back into the glue-side actions they stand for.
fn unsync(
    l: &Lts,
    glue_actions: &BTreeMap<(ChannelId, String), (Polarity, MessageKind)>,
) -> Lts {
    let mut out = Lts::new(l.name().to_string());
    for s in l.states().skip(1) {
        out.add_state(l.state_name(s).to_string());
    }
    out.set_state_name(0, l.state_name(0));
    for (from, label, to) in l.transitions() {
        let label = match label {
            Label::Sync { channel, message, .. } => {
                match glue_actions.get(&(*channel, message.clone())) {
                    Some(&(polarity, kind)) => {
                        Label::Act(Action::new(*channel, message, polarity, kind))
                    }
                    None => label.clone(),
                }
            }
            other => other.clone(),
        };
        out.add_transition(from, label, to);
    }
    for s in l.finals() {
        out.mark_final(*s);
    }
    out
}

/// Message kinds per (channel, polarity), read off an existing machine.
fn kind_table(l: &Lts) -> BTreeMap<(ChannelId, Polarity), MessageKind> {
    let mut table = BTreeMap::new();
    for label in l.alphabet() {
        if let Label::Act(a) = label {
            table.entry((a.channel, a.polarity)).or_insert(a.kind);
        }
    }
    table
}

/// Rewrites action kinds to match `table` where it has an entry. Charts do
/// not carry kinds, so machines derived from them are normalized against the
/// system before comparison or insertion.
fn normalize_kinds(l: &Lts, table: &BTreeMap<(ChannelId, Polarity), MessageKind>) -> Lts {
    let mut out = Lts::new(l.name().to_string());
    for s in l.states().skip(1) {
        out.add_state(l.state_name(s).to_string());
    }
    out.set_state_name(0, l.state_name(0));
    for (from, label, to) in l.transitions() {
        let label = match label {
            Label::Act(a) => match table.get(&(a.channel, a.polarity)) {
                Some(kind) => Label::Act(Action { kind: *kind, ..a.clone() }),
                None => label.clone(),
            },
            other => other.clone(),
        };
        out.add_transition(from, label, to);
    }
    for s in l.finals() {
        out.mark_final(*s);
    }
    out
}

/// Compares the coordinator column of the specification against the actual
/// sub-coordinator behavior; the pipeline refuses to proceed on a mismatch.
pub fn check_conformance(
    kbac: &SubCoordinator,
    spec: &EnhancementSpec,
) -> Result<Conformance, SynthError> {
    let expected = msc_to_lts(spec, &spec.coordinator_instance)?;
    for channel in expected.channels() {
        if !kbac.target_channels.contains(&channel) {
            return Err(SynthError::SpecChannel { channel });
        }
    }
    let expected = normalize_kinds(&expected, &kind_table(&kbac.behavior));
    Ok(match trace_equivalent(&kbac.behavior, &expected) {
        TraceEquivalence::Equivalent => Conformance::Ok,
        TraceEquivalence::Differs { witness, only_in } => {
            Conformance::Mismatch { witness, in_actual: only_in == EquivSide::Left }
        }
    })
}

/// Severs the direct synchronization between the coordinator view and the
/// targets: every shared channel `c` is replaced by a fresh `c'` on the
/// coordinator's port and a fresh `c''` on the component's port, with both
/// behaviors relabelled. The resulting connectors stay half-bound until the
/// routers are inserted.
pub fn decouple(
    sys: &CbaSystem,
    coordinator: &str,
    targets: &BTreeSet<String>,
) -> Result<(CbaSystem, ChannelMap), SynthError> {
    let view = coordinator_view(sys, coordinator)?;
    let channels = target_channels(sys, &view, targets)?;
    let mut out = sys.clone();
    let mut map = ChannelMap::default();

    // Per-component relabelling maps, applied in one pass each.
    let mut relabel: BTreeMap<String, BTreeMap<ChannelId, ChannelId>> = BTreeMap::new();

    for &c in &channels {
        let fresh_coord = out.allocate_channel();
        let fresh_comp = out.allocate_channel();
        map.coordinator_side.insert(c, fresh_coord);
        map.component_side.insert(c, fresh_comp);
        for (comp, _) in sys.endpoints(c) {
            let fresh = if view.members.contains(&comp.name) {
                fresh_coord
            } else {
                fresh_comp
            };
            relabel.entry(comp.name.clone()).or_default().insert(c, fresh);
        }
    }

    for (name, channel_map) in relabel {
        let comp = out.component_mut(&name).expect("endpoint exists");
        for binding in &mut comp.bindings {
            if let Some(fresh) = channel_map.get(&binding.channel) {
                binding.channel = *fresh;
            }
        }
        comp.behavior = comp.behavior.relabel_channels(&channel_map)?;
    }

    Ok((out, map))
}

/// Builds a routing-only coordinator: from a single idle state, each message
/// of each pair is accepted on the input channel and immediately re-emitted
/// unchanged on the output channel. Strict alternation holds by
/// construction.
pub fn synthesize_router(name: &str, pairs: &[RoutePair]) -> Component {
    let mut behavior = Lts::new(name.to_string());
    behavior.set_state_name(0, "idle");
    for pair in pairs {
        for message in &pair.messages {
            let mid = behavior.add_state(format!("fw_{}_{}", pair.input, message));
            behavior.add_transition(
                0,
                Label::Act(Action::new(pair.input, message, Polarity::Input, pair.kind)),
                mid,
            );
            behavior.add_transition(
                mid,
                Label::Act(Action::new(pair.output, message, Polarity::Output, pair.kind)),
                0,
            );
        }
    }

    let mut component = Component::new(name, true, behavior);
    // Port sides follow the message orientation: requests are received on
    // bottom ports and sent on top ports, notifications the other way.
    let mut sides: BTreeMap<ChannelId, Side> = BTreeMap::new();
    for pair in pairs {
        let (input_side, output_side) = match pair.kind {
            MessageKind::Request => (Side::Bottom, Side::Top),
            MessageKind::Notification => (Side::Top, Side::Bottom),
        };
        sides.entry(pair.input).or_insert(input_side);
        sides.entry(pair.output).or_insert(output_side);
    }
    let mut top_index = 0;
    let mut bottom_index = 0;
    for (channel, side) in sides {
        let index = match side {
            Side::Top => {
                top_index += 1;
                top_index
            }
            Side::Bottom => {
                bottom_index += 1;
                bottom_index
            }
        };
        component.bindings.push(PortBinding { side, index, channel });
    }
    component
}

/// Per-channel message flow read off the sub-coordinator: `up` messages
/// arrive at the coordinator (sent by the target side), `down` messages
/// leave it.
#[derive(Debug, Clone, Default)]
struct ChannelFlow {
    up: BTreeSet<String>,
    up_kind: Option<MessageKind>,
    down: BTreeSet<String>,
    down_kind: Option<MessageKind>,
}

fn channel_flows(kbac: &SubCoordinator) -> BTreeMap<ChannelId, ChannelFlow> {
    let mut flows: BTreeMap<ChannelId, ChannelFlow> = BTreeMap::new();
    for &c in &kbac.target_channels {
        flows.insert(c, ChannelFlow::default());
    }
    for label in kbac.behavior.alphabet() {
        if let Label::Act(a) = label {
            let flow = flows.entry(a.channel).or_default();
            match a.polarity {
                Polarity::Input => {
                    flow.up.insert(a.message.clone());
                    flow.up_kind.get_or_insert(a.kind);
                }
                Polarity::Output => {
                    flow.down.insert(a.message.clone());
                    flow.down_kind.get_or_insert(a.kind);
                }
            }
        }
    }
    flows
}

/// Derives the wrapper component from the specification: the wrapper-instance
/// column landed on the wrapper's own fresh channels (coordinator-partner
/// events on the `wrapper_coordinator_side` channel, component-partner events
/// on the `wrapper_component_side` one), with kinds and port sides mirroring
/// the intercepted protocol.
pub fn derive_wrapper(
    spec: &EnhancementSpec,
    map: &ChannelMap,
    kbac: &SubCoordinator,
) -> Result<Component, SynthError> {
    // Every charted event that involves the wrapper must live on a target
    // channel; otherwise the fresh-channel maps have no entry for it.
    for bmsc in &spec.bmscs {
        for event in &bmsc.events {
            let involves_wrapper =
                event.sender == spec.wrapper_instance || event.receiver == spec.wrapper_instance;
            if involves_wrapper && !kbac.target_channels.contains(&event.channel) {
                return Err(SynthError::SpecChannel { channel: event.channel });
            }
        }
    }

    let coordinator = spec.coordinator_instance.clone();
    let behavior = msc_to_lts_with(spec, &spec.wrapper_instance, &|event| {
        let partner =
            if event.sender == spec.wrapper_instance { &event.receiver } else { &event.sender };
        if *partner == coordinator {
            map.wrapper_coordinator_side[&event.channel]
        } else {
            map.wrapper_component_side[&event.channel]
        }
    })?;

    // Kind table over the wrapper's fresh channels, transplanted from the
    // intercepted flows: the wrapper re-emits upward messages on the
    // coordinator side and downward messages on the component side.
    let flows = channel_flows(kbac);
    let mut table = BTreeMap::new();
    let mut sides: BTreeMap<ChannelId, Side> = BTreeMap::new();
    for (&c, flow) in &flows {
        let up = flow.up_kind.unwrap_or(MessageKind::Request);
        let down = flow.down_kind.unwrap_or(MessageKind::Notification);
        let toward_coordinator = map.wrapper_coordinator_side[&c];
        let toward_components = map.wrapper_component_side[&c];
        table.insert((toward_coordinator, Polarity::Output), up);
        table.insert((toward_components, Polarity::Input), up);
        table.insert((toward_coordinator, Polarity::Input), down);
        table.insert((toward_components, Polarity::Output), down);
        // Sending `up`-kind messages: requests leave through a top port,
        // notifications through a bottom one. The component side mirrors it.
        let coordinator_side = match up {
            MessageKind::Request => Side::Top,
            MessageKind::Notification => Side::Bottom,
        };
        let component_side = match coordinator_side {
            Side::Top => Side::Bottom,
            Side::Bottom => Side::Top,
        };
        sides.insert(toward_coordinator, coordinator_side);
        sides.insert(toward_components, component_side);
    }

    let behavior = normalize_kinds(&behavior, &table).with_name(spec.wrapper_instance.clone());
    let mut component = Component::new(&spec.wrapper_instance, false, behavior);
    let mut top_index = 0;
    let mut bottom_index = 0;
    for (channel, side) in sides {
        let index = match side {
            Side::Top => {
                top_index += 1;
                top_index
            }
            Side::Bottom => {
                bottom_index += 1;
                bottom_index
            }
        };
        component.bindings.push(PortBinding { side, index, channel });
    }
    Ok(component)
}

fn require_fresh_name(sys: &CbaSystem, name: &str) -> Result<(), SynthError> {
    if sys.component(name).is_some() || sys.glue_groups().contains_key(name) {
        Err(SynthError::NameClash(name.to_string()))
    } else {
        Ok(())
    }
}

/// Runs the whole pipeline on one enhancement and returns the enhanced
/// system together with the glue block. The input system is untouched; on
/// any error the original stands.
pub fn apply_enhancement(
    sys: &CbaSystem,
    spec: &EnhancementSpec,
) -> Result<(CbaSystem, EnhancedGlue), SynthError> {
    let report = sys.validate_architecture();
    if !report.is_empty() {
        return Err(SynthError::InvalidArchitecture(report));
    }
    for coord in sys.coordinators() {
        if let AlternationCheck::Violation(v) = check_strict_alternation(coord) {
            return Err(SynthError::NotAlternating {
                component: coord.name.clone(),
                violation: v,
            });
        }
    }
    spec.validate().map_err(MscError::InvalidSpec)?;

    let view = coordinator_view(sys, &spec.coordinator_instance)?;
    for target in &spec.target_components {
        if view.members.contains(target) {
            return Err(SynthError::UnknownTarget(target.clone()));
        }
    }

    let kbac = extract_sub_coordinator(sys, &spec.coordinator_instance, &spec.target_components)?;
    match check_conformance(&kbac, spec)? {
        Conformance::Ok => {}
        Conformance::Mismatch { witness, in_actual } => {
            return Err(SynthError::Conformance { witness, in_actual })
        }
    }

    let (mut enhanced, mut map) = decouple(sys, &spec.coordinator_instance, &spec.target_components)?;
    for &c in &kbac.target_channels {
        let toward_coordinator = enhanced.allocate_channel();
        let toward_components = enhanced.allocate_channel();
        map.wrapper_coordinator_side.insert(c, toward_coordinator);
        map.wrapper_component_side.insert(c, toward_components);
    }

    let wrapper = derive_wrapper(spec, &map, &kbac)?;

    let flows = channel_flows(&kbac);
    let mut upper_pairs = Vec::new();
    let mut lower_pairs = Vec::new();
    for (&c, flow) in &flows {
        let up_kind = flow.up_kind.unwrap_or(MessageKind::Request);
        let down_kind = flow.down_kind.unwrap_or(MessageKind::Notification);
        if !flow.up.is_empty() {
            upper_pairs.push(RoutePair {
                input: map.wrapper_coordinator_side[&c],
                output: map.coordinator_side[&c],
                messages: flow.up.clone(),
                kind: up_kind,
            });
            lower_pairs.push(RoutePair {
                input: map.component_side[&c],
                output: map.wrapper_component_side[&c],
                messages: flow.up.clone(),
                kind: up_kind,
            });
        }
        if !flow.down.is_empty() {
            upper_pairs.push(RoutePair {
                input: map.coordinator_side[&c],
                output: map.wrapper_coordinator_side[&c],
                messages: flow.down.clone(),
                kind: down_kind,
            });
            lower_pairs.push(RoutePair {
                input: map.wrapper_component_side[&c],
                output: map.component_side[&c],
                messages: flow.down.clone(),
                kind: down_kind,
            });
        }
    }
    let upper_name = format!("{}_upper", spec.name);
    let lower_name = format!("{}_lower", spec.name);
    let group_name = format!("{}_glue", spec.name);
    for name in [&spec.wrapper_instance, &upper_name, &lower_name] {
        require_fresh_name(&enhanced, name)?;
    }
    require_fresh_name(&enhanced, &group_name)?;

    let upper = synthesize_router(&upper_name, &upper_pairs);
    let lower = synthesize_router(&lower_name, &lower_pairs);

    enhanced.add_component(wrapper.clone());
    enhanced.add_component(upper.clone());
    enhanced.add_component(lower.clone());

    let mut members = view.members.clone();
    members.insert(spec.wrapper_instance.clone());
    members.insert(upper_name.clone());
    members.insert(lower_name.clone());
    enhanced.add_glue_group(group_name.clone(), members.clone());

    let glue_components: Vec<&Component> =
        members.iter().map(|m| enhanced.component(m).expect("just inserted")).collect();
    let composite = compose_all(&glue_components).with_name(group_name.clone());

    // Deadlock gate, judged in context: the glue alone is an open system
    // whose boundary actions fire freely, which admits request overruns no
    // strictly alternating component can produce. The closed enhanced
    // system is the semantics the glue must not wedge.
    let closed = enhanced.close_system()?;
    let blocked: BTreeSet<_> =
        closed.deadlock_states().into_iter().filter(|s| !closed.is_final(*s)).collect();
    if !blocked.is_empty() {
        let trace = closed.path_to(|s| blocked.contains(&s)).unwrap_or_default();
        return Err(SynthError::Deadlock { trace });
    }

    let glue = EnhancedGlue {
        old_coordinator: Component::new(&view.name, true, view.behavior.clone()),
        router_to_coordinator: upper,
        router_to_components: lower,
        wrapper,
        composite,
        channel_map: map,
        group: group_name,
    };
    Ok((enhanced, glue))
}

/// Compares the projections of the closed original and enhanced systems on
/// the channels of `untouched` components. Components whose channels were
/// renamed by the enhancement (targets on the component side, the old
/// coordinator on its side) are projected back through the channel map
/// first, so any component of the system may be listed.
pub fn transparency_check(
    original: &CbaSystem,
    enhanced: &CbaSystem,
    map: &ChannelMap,
    untouched: &BTreeSet<String>,
) -> Result<TraceEquivalence, SynthError> {
    let closed_original = original.close_system()?;
    let closed_enhanced = enhanced.close_system()?;

    let mut original_channels = BTreeSet::new();
    let mut enhanced_channels = BTreeSet::new();
    for name in untouched {
        let before = original
            .component(name)
            .ok_or_else(|| SynthError::UnknownTarget(name.clone()))?;
        let after = enhanced
            .component(name)
            .ok_or_else(|| SynthError::UnknownTarget(name.clone()))?;
        original_channels.extend(before.bound_channels());
        enhanced_channels.extend(after.bound_channels());
    }

    let back: BTreeMap<ChannelId, ChannelId> = map
        .component_side
        .iter()
        .chain(map.coordinator_side.iter())
        .filter(|(_, fresh)| enhanced_channels.contains(*fresh))
        .map(|(&c, &fresh)| (fresh, c))
        .collect();

    let original_view = closed_original.hide(&original_channels);
    let enhanced_view = closed_enhanced.hide(&enhanced_channels).relabel_channels(&back)?;
    Ok(trace_equivalent(&original_view, &enhanced_view))
}
