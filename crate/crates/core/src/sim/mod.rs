//! Deterministic execution of closed systems with scripted choice
//! resolution: fault scripts steer the nondeterminism of chosen components
//! (e.g. a server answering with errors), remaining ties are broken by a
//! seeded PRNG, and every run yields a replayable trace.

mod script;

pub use script::parse_fault_scripts;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::action::{ChannelId, Label};
use crate::cba::{CbaSystem, CloseError};
use crate::lts::StateId;

/// What a script does once its decision list is exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExhaustedPolicy {
    /// Keep applying the last directive forever.
    #[default]
    RepeatLast,
    /// Stop filtering; remaining choices fall to the seeded default order.
    DefaultOrder,
}

/// Directs one component's nondeterministic choices during simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultScript {
    pub component: String,
    pub decisions: Vec<String>,
    pub exhausted: ExhaustedPolicy,
}

/// One executed event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: usize,
    pub label: Label,
    pub participants: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Final,
    Deadlock,
    StepLimit,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Final => write!(f, "final"),
            Termination::Deadlock => write!(f, "deadlock"),
            Termination::StepLimit => write!(f, "step-limit"),
        }
    }
}

/// A finished run: the events in order, the state reached, and why the run
/// stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub final_state: String,
    pub terminated: Termination,
}

#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error(transparent)]
    Close(#[from] CloseError),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("script for {component} references `{message}`, not in its alphabet")]
    UnknownMessage { component: String, message: String },
    #[error("step {step}: script directive `{directive}` for {component} names a message not enabled at its choice point")]
    Script { component: String, directive: String, step: usize },
    #[error("maxSteps must be at least 1")]
    InvalidMaxSteps,
}

/// Runs the closed system stepwise. At each state the enabled events are
/// filtered by the scripts (a scripted component's next decision selects
/// among its enabled choices); remaining ties are broken by the seeded PRNG.
/// The run stops on a final state, a deadlock, or after `max_steps` events.
pub fn simulate(
    sys: &CbaSystem,
    scripts: &[FaultScript],
    seed: u64,
    max_steps: usize,
) -> Result<Trace, SimError> {
    if max_steps == 0 {
        return Err(SimError::InvalidMaxSteps);
    }
    for script in scripts {
        let comp = sys
            .component(&script.component)
            .ok_or_else(|| SimError::UnknownComponent(script.component.clone()))?;
        let messages: BTreeSet<String> =
            comp.behavior.alphabet().iter().filter_map(|l| l.message().map(str::to_string)).collect();
        for decision in &script.decisions {
            if !messages.contains(decision) {
                return Err(SimError::UnknownMessage {
                    component: script.component.clone(),
                    message: decision.clone(),
                });
            }
        }
    }

    let closed = sys.close_system()?;
    let participants: BTreeMap<ChannelId, Vec<String>> = sys
        .channels()
        .into_iter()
        .map(|c| {
            let mut names: Vec<String> =
                sys.endpoints(c).into_iter().map(|(comp, _)| comp.name.clone()).collect();
            names.sort();
            names.dedup();
            (c, names)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cursors: BTreeMap<&str, usize> = scripts.iter().map(|s| (s.component.as_str(), 0)).collect();
    let mut state: StateId = closed.initial();
    let mut events = Vec::new();
    let mut terminated = Termination::StepLimit;

    for step in 0..max_steps {
        if closed.is_final(state) {
            terminated = Termination::Final;
            break;
        }
        let mut candidates: Vec<(Label, StateId)> =
            closed.outgoing(state).map(|(l, t)| (l.clone(), t)).collect();
        if candidates.is_empty() {
            terminated = Termination::Deadlock;
            break;
        }

        // Scripted filtering, in component name order.
        let mut consumed_if_fired: BTreeSet<&str> = BTreeSet::new();
        for fault in scripts {
            let involves = |label: &Label| -> bool {
                label
                    .channel()
                    .map(|c| participants.get(&c).is_some_and(|p| p.iter().any(|n| *n == fault.component)))
                    .unwrap_or(false)
            };
            let own: Vec<&(Label, StateId)> =
                candidates.iter().filter(|(l, _)| involves(l)).collect();
            let distinct_messages: BTreeSet<&str> =
                own.iter().filter_map(|(l, _)| l.message()).collect();
            if distinct_messages.len() < 2 {
                continue;
            }
            let cursor = cursors[fault.component.as_str()];
            let directive = if cursor < fault.decisions.len() {
                Some(&fault.decisions[cursor])
            } else {
                match fault.exhausted {
                    ExhaustedPolicy::RepeatLast => fault.decisions.last(),
                    ExhaustedPolicy::DefaultOrder => None,
                }
            };
            let Some(directive) = directive else { continue };
            if !own.iter().any(|(l, _)| l.message() == Some(directive)) {
                return Err(SimError::Script {
                    component: fault.component.clone(),
                    directive: directive.clone(),
                    step,
                });
            }
            candidates.retain(|(l, _)| !involves(l) || l.message() == Some(directive.as_str()));
            consumed_if_fired.insert(fault.component.as_str());
        }

        let choice = if candidates.len() == 1 { 0 } else { rng.gen_range(0..candidates.len()) };
        let (label, target) = candidates[choice].clone();
        let event_participants = label
            .channel()
            .and_then(|c| participants.get(&c).cloned())
            .unwrap_or_default();
        for comp in &consumed_if_fired {
            if event_participants.iter().any(|n| n == comp) {
                *cursors.get_mut(comp).unwrap() += 1;
            }
        }
        events.push(TraceEvent { step, label, participants: event_participants });
        state = target;
    }

    if terminated == Termination::StepLimit && closed.is_final(state) {
        terminated = Termination::Final;
    }

    Ok(Trace {
        events,
        final_state: closed.state_name(state).to_string(),
        terminated,
    })
}

/// The subsequence of trace events on channels bound to the component.
pub fn project_trace(
    trace: &Trace,
    component: &str,
    sys: &CbaSystem,
) -> Result<Vec<TraceEvent>, SimError> {
    let comp = sys
        .component(component)
        .ok_or_else(|| SimError::UnknownComponent(component.to_string()))?;
    let channels = comp.bound_channels();
    Ok(trace
        .events
        .iter()
        .filter(|e| e.label.channel().is_some_and(|c| channels.contains(&c)))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests;
