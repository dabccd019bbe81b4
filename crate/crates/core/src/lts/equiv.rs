//! Observable trace-equivalence checking with shortest-witness extraction.

use std::collections::{BTreeSet, VecDeque};

use crate::action::Label;
use crate::lts::reduce::determinize;
use crate::lts::Lts;

/// Which machine exhibits a distinguishing trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Verdict of [`trace_equivalent`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEquivalence {
    Equivalent,
    /// `witness` is a shortest trace in exactly one of the two languages.
    Differs { witness: Vec<Label>, only_in: Side },
}

impl TraceEquivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, TraceEquivalence::Equivalent)
    }
}

/// Compares observable trace sets. Both machines are determinized
/// internally; the traversal is breadth-first, so a reported witness is a
/// shortest distinguishing trace.
pub fn trace_equivalent(a: &Lts, b: &Lts) -> TraceEquivalence {
    let da = determinize(a);
    let db = determinize(b);
    let mut seen = BTreeSet::from([(da.initial(), db.initial())]);
    let mut queue = VecDeque::from([(da.initial(), db.initial(), Vec::new())]);
    while let Some((sa, sb, trace)) = queue.pop_front() {
        let labels: BTreeSet<Label> = da
            .outgoing(sa)
            .map(|(l, _)| l.clone())
            .chain(db.outgoing(sb).map(|(l, _)| l.clone()))
            .collect();
        for label in labels {
            let ta = da.successor(sa, &label);
            let tb = db.successor(sb, &label);
            let mut extended = trace.clone();
            extended.push(label);
            match (ta, tb) {
                (Some(ta), Some(tb)) => {
                    if seen.insert((ta, tb)) {
                        queue.push_back((ta, tb, extended));
                    }
                }
                (Some(_), None) => {
                    return TraceEquivalence::Differs { witness: extended, only_in: Side::Left }
                }
                (None, Some(_)) => {
                    return TraceEquivalence::Differs { witness: extended, only_in: Side::Right }
                }
                (None, None) => unreachable!("label came from one of the two states"),
            }
        }
    }
    TraceEquivalence::Equivalent
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflexive() {
        let l = Lts::from_text("lts l\ninit a\na 2?req b\nb 2!ok:ntf a\n").unwrap();
        assert!(trace_equivalent(&l, &l).is_equivalent());
    }

    #[test]
    fn one_extra_transition_is_detected_with_short_witness() {
        let l = Lts::from_text("lts l\ninit a\na 2?req b\nb 2!ok:ntf a\n").unwrap();
        let bigger =
            Lts::from_text("lts l\ninit a\na 2?req b\nb 2!ok:ntf a\nb 2!err:ntf a\n").unwrap();
        match trace_equivalent(&l, &bigger) {
            TraceEquivalence::Differs { witness, only_in } => {
                assert_eq!(only_in, Side::Right);
                assert!(witness.len() <= l.state_count() + 1);
                assert_eq!(witness.last().unwrap().to_string(), "2!err:ntf");
            }
            TraceEquivalence::Equivalent => panic!("machines differ"),
        }
    }

    #[test]
    fn insensitive_to_representation() {
        // A tau-padded machine against its determinized twin.
        let l = Lts::from_text("lts l\ninit a\na tau b\nb 2?req c\nc 2!ok:ntf a\n").unwrap();
        let other = Lts::from_text("lts r\ninit x\nx 2?req y\ny 2!ok:ntf x\n").unwrap();
        assert!(trace_equivalent(&l, &other).is_equivalent());
    }
}
