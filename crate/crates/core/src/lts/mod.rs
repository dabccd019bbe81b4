//! Finite labelled transition systems and the operations the synthesis
//! pipeline is built from: parallel composition, hiding, determinization,
//! minimization, trace-equivalence checking, and deadlock detection.
//!
//! All operations are pure functions on immutable values. State identifiers
//! are opaque indices; every derived machine is renumbered breadth-first from
//! the initial state so serialized output is reproducible.

mod compose;
mod dot;
mod equiv;
mod reduce;
mod text;

pub use compose::parallel_compose;
pub use equiv::{trace_equivalent, Side, TraceEquivalence};
pub use reduce::{determinize, minimize};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::action::{ChannelId, Label};
use crate::error::{CollisionError, ParseError};

/// Index of a state inside one [`Lts`].
pub type StateId = usize;

/// A finite labelled transition system. Always has at least one state; the
/// optional final-state set marks legal termination points (sinks that are
/// not deadlocks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    name: String,
    state_names: Vec<String>,
    initial: StateId,
    adjacency: Vec<BTreeSet<(Label, StateId)>>,
    finals: BTreeSet<StateId>,
}

impl Lts {
    /// Creates a machine with a single state named `s0` and no transitions.
    pub fn new(name: impl Into<String>) -> Self {
        Lts {
            name: name.into(),
            state_names: vec!["s0".to_string()],
            initial: 0,
            adjacency: vec![BTreeSet::new()],
            finals: BTreeSet::new(),
        }
    }

    /// Parses the `.lts` textual format.
    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        text::parse_lts(text, "<memory>")
    }

    /// Parses the `.lts` textual format, reporting `file` in errors.
    pub fn from_text_named(text: &str, file: &str) -> Result<Self, ParseError> {
        text::parse_lts(text, file)
    }

    /// Serializes to the `.lts` textual format. Line order is deterministic
    /// and `serialize(parse(serialize(x))) == serialize(x)`.
    pub fn to_text(&self) -> String {
        text::write_lts(self)
    }

    /// GraphViz export with deterministic node ordering.
    pub fn to_dot(&self) -> String {
        dot::write_dot(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.set_name(name);
        self
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.state_count()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    /// Looks a state up by display name.
    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn set_initial(&mut self, s: StateId) {
        assert!(s < self.state_count());
        self.initial = s;
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals.contains(&s)
    }

    pub fn mark_final(&mut self, s: StateId) {
        assert!(s < self.state_count());
        self.finals.insert(s);
    }

    /// Adds a state, returning its identifier.
    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.state_names.push(name.into());
        self.adjacency.push(BTreeSet::new());
        self.state_names.len() - 1
    }

    pub(crate) fn set_state_name(&mut self, s: StateId, name: impl Into<String>) {
        self.state_names[s] = name.into();
    }

    /// Adds a transition. Duplicate `(from, label, to)` triples collapse.
    pub fn add_transition(&mut self, from: StateId, label: Label, to: StateId) {
        assert!(from < self.state_count() && to < self.state_count());
        self.adjacency[from].insert((label, to));
    }

    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = (&Label, StateId)> {
        self.adjacency[s].iter().map(|(l, t)| (l, *t))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &Label, StateId)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(s, out)| out.iter().map(move |(l, t)| (s, l, *t)))
    }

    pub fn transition_count(&self) -> usize {
        self.adjacency.iter().map(|out| out.len()).sum()
    }

    /// The set of non-`Tau` labels occurring on transitions.
    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.transitions().filter(|(_, l, _)| !l.is_tau()).map(|(_, l, _)| l.clone()).collect()
    }

    /// All channels referenced by the alphabet.
    pub fn channels(&self) -> BTreeSet<ChannelId> {
        self.alphabet().iter().filter_map(|l| l.channel()).collect()
    }

    pub fn has_tau(&self) -> bool {
        self.transitions().any(|(_, l, _)| l.is_tau())
    }

    /// True when the machine is `Tau`-free and no state has two outgoing
    /// transitions sharing a label.
    pub fn is_deterministic(&self) -> bool {
        if self.has_tau() {
            return false;
        }
        self.adjacency.iter().all(|out| {
            let mut seen = BTreeSet::new();
            out.iter().all(|(l, _)| seen.insert(l.clone()))
        })
    }

    /// The unique successor under `label`, for deterministic machines.
    pub fn successor(&self, s: StateId, label: &Label) -> Option<StateId> {
        self.outgoing(s).find(|(l, _)| *l == label).map(|(_, t)| t)
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([self.initial]);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.outgoing(s) {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// All reachable states with no outgoing transitions. Final states are
    /// reported too; callers decide whether finality excuses the sink.
    pub fn deadlock_states(&self) -> BTreeSet<StateId> {
        self.reachable().into_iter().filter(|s| self.adjacency[*s].is_empty()).collect()
    }

    /// Shortest label path from the initial state to a state satisfying
    /// `pred`, if one is reachable.
    pub fn path_to(&self, pred: impl Fn(StateId) -> bool) -> Option<Vec<Label>> {
        let mut parent: BTreeMap<StateId, (StateId, Label)> = BTreeMap::new();
        let mut seen = BTreeSet::from([self.initial]);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            if pred(s) {
                let mut path = Vec::new();
                let mut cur = s;
                while let Some((prev, label)) = parent.get(&cur) {
                    path.push(label.clone());
                    cur = *prev;
                }
                path.reverse();
                return Some(path);
            }
            for (l, t) in self.outgoing(s) {
                if seen.insert(t) {
                    parent.insert(t, (s, l.clone()));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Relabels every transition whose channel is outside `keep` to `Tau`.
    /// Structure is otherwise unchanged.
    pub fn hide(&self, keep: &BTreeSet<ChannelId>) -> Lts {
        let mut out = self.clone();
        for adj in &mut out.adjacency {
            let hidden: BTreeSet<(Label, StateId)> = adj
                .iter()
                .map(|(l, t)| match l.channel() {
                    Some(c) if !keep.contains(&c) => (Label::Tau, *t),
                    _ => (l.clone(), *t),
                })
                .collect();
            *adj = hidden;
        }
        out
    }

    /// Rewrites every action on a mapped channel to the image channel. The
    /// map must be injective and image channels must not collide with
    /// unmapped channels present in the machine.
    pub fn relabel_channels(
        &self,
        map: &BTreeMap<ChannelId, ChannelId>,
    ) -> Result<Lts, CollisionError> {
        let mut images = BTreeSet::new();
        for (from, to) in map {
            if !images.insert(*to) {
                return Err(CollisionError {
                    channel: *to,
                    reason: "map is not injective".to_string(),
                });
            }
            let _ = from;
        }
        for c in self.channels() {
            if !map.contains_key(&c) && images.contains(&c) {
                return Err(CollisionError {
                    channel: c,
                    reason: "image channel already occurs unmapped".to_string(),
                });
            }
        }
        let mut out = self.clone();
        for adj in &mut out.adjacency {
            let relabelled: BTreeSet<(Label, StateId)> = adj
                .iter()
                .map(|(l, t)| match l.channel() {
                    Some(c) if map.contains_key(&c) => (l.with_channel(map[&c]), *t),
                    _ => (l.clone(), *t),
                })
                .collect();
            *adj = relabelled;
        }
        Ok(out)
    }

    /// Renumbers states breadth-first from the initial state (transitions
    /// visited in label order), dropping unreachable states and renaming the
    /// survivors `s0`, `s1`, ... in discovery order.
    pub fn canonicalize(&self) -> Lts {
        let mut order: BTreeMap<StateId, StateId> = BTreeMap::from([(self.initial, 0)]);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.outgoing(s) {
                let next = order.len();
                if let std::collections::btree_map::Entry::Vacant(e) = order.entry(t) {
                    e.insert(next);
                    queue.push_back(t);
                }
            }
        }
        let mut out = Lts {
            name: self.name.clone(),
            state_names: (0..order.len()).map(|i| format!("s{i}")).collect(),
            initial: 0,
            adjacency: vec![BTreeSet::new(); order.len()],
            finals: BTreeSet::new(),
        };
        for (&old, &new) in &order {
            for (l, t) in self.outgoing(old) {
                out.adjacency[new].insert((l.clone(), order[&t]));
            }
            if self.finals.contains(&old) {
                out.finals.insert(new);
            }
        }
        out
    }

    /// Structural equality after canonical renumbering, ignoring state and
    /// machine names. Exact for deterministic machines.
    pub fn same_canonical_shape(&self, other: &Lts) -> bool {
        let a = self.canonicalize();
        let b = other.canonicalize();
        a.initial == b.initial && a.adjacency == b.adjacency && a.finals == b.finals
    }
}

impl fmt::Display for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lts {} ({} states, {} transitions)",
            self.name,
            self.state_count(),
            self.transition_count()
        )
    }
}
