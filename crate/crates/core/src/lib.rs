//! Glue-code synthesis for coordinator-based architectures.
//!
//! The crate models components and coordinators as labelled transition
//! systems wired through synchronous connectors, parses protocol-enhancement
//! specifications given as message sequence charts, and synthesizes the
//! enhanced glue (wrapper plus two router coordinators composed with the old
//! coordinator), verifying conformance, deadlock-freedom, and transparency
//! along the way. A scripted simulator replays scenarios such as retry
//! policies against the closed system.

pub mod action;
pub mod cba;
pub mod error;
pub mod gen;
pub mod lts;
pub mod msc;
pub mod sim;
pub mod synth;

pub use action::{Action, ChannelId, Label, MessageKind, Polarity};
pub use cba::{check_strict_alternation, CbaSystem, Component, Side as PortSide, Violation};
pub use lts::{
    determinize, minimize, parallel_compose, trace_equivalent, Lts, Side, StateId,
    TraceEquivalence,
};
pub use msc::{msc_to_lts, parse_msc, project_instance, EnhancementSpec};
pub use sim::{simulate, FaultScript, Trace};
pub use synth::{
    apply_enhancement, check_conformance, decouple, derive_wrapper, extract_sub_coordinator,
    synthesize_router, transparency_check, ChannelMap, Conformance, EnhancedGlue, SubCoordinator,
    SynthError,
};
