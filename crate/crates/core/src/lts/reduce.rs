//! Determinization (subset construction over tau-closures) and
//! language-minimal reduction (partition refinement).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::action::Label;
use crate::lts::{Lts, StateId};

fn tau_closure(l: &Lts, seed: &BTreeSet<StateId>) -> BTreeSet<StateId> {
    let mut closure = seed.clone();
    let mut queue: VecDeque<StateId> = seed.iter().copied().collect();
    while let Some(s) = queue.pop_front() {
        for (label, t) in l.outgoing(s) {
            if label.is_tau() && closure.insert(t) {
                queue.push_back(t);
            }
        }
    }
    closure
}

/// Subset construction: a `Tau`-free deterministic machine with the same
/// observable trace set. A subset state is final when it contains a final
/// state of the input.
pub fn determinize(l: &Lts) -> Lts {
    let start = tau_closure(l, &BTreeSet::from([l.initial()]));
    let mut out = Lts::new(l.name().to_string());
    let mut ids: BTreeMap<BTreeSet<StateId>, StateId> = BTreeMap::new();
    ids.insert(start.clone(), 0);
    if start.iter().any(|s| l.is_final(*s)) {
        out.mark_final(0);
    }
    let mut queue = VecDeque::from([start]);
    while let Some(subset) = queue.pop_front() {
        let source = ids[&subset];
        let mut moves: BTreeMap<Label, BTreeSet<StateId>> = BTreeMap::new();
        for &s in &subset {
            for (label, t) in l.outgoing(s) {
                if !label.is_tau() {
                    moves.entry(label.clone()).or_default().insert(t);
                }
            }
        }
        for (label, targets) in moves {
            let closure = tau_closure(l, &targets);
            let next = ids.len();
            let target = *ids.entry(closure.clone()).or_insert_with(|| {
                queue.push_back(closure.clone());
                let id = out.add_state(format!("q{next}"));
                debug_assert_eq!(id, next);
                id
            });
            if closure.iter().any(|s| l.is_final(*s)) {
                out.mark_final(target);
            }
            out.add_transition(source, label, target);
        }
    }
    out.canonicalize().with_name(l.name().to_string())
}

/// Language-minimal deterministic machine, trace-equivalent to the input.
/// Auto-chains [`determinize`] when the input has `Tau` transitions or is
/// nondeterministic. Final and non-final states are never merged.
pub fn minimize(l: &Lts) -> Lts {
    let det = if l.is_deterministic() { l.canonicalize() } else { determinize(l) };
    let n = det.state_count();

    // Moore refinement: split by finality, then by outgoing signature until
    // stable. Missing transitions distinguish states from total ones.
    let mut block: Vec<usize> = (0..n).map(|s| usize::from(det.is_final(s))).collect();
    loop {
        let mut next_ids: BTreeMap<(usize, Vec<(Label, usize)>), usize> = BTreeMap::new();
        let mut next: Vec<usize> = Vec::with_capacity(n);
        for s in 0..n {
            let signature: Vec<(Label, usize)> =
                det.outgoing(s).map(|(label, t)| (label.clone(), block[t])).collect();
            let fresh = next_ids.len();
            let id = *next_ids.entry((block[s], signature)).or_insert(fresh);
            next.push(id);
        }
        let stable = next == block;
        block = next;
        if stable {
            break;
        }
    }

    let block_count = block.iter().max().map_or(0, |m| m + 1);
    let mut out = Lts::new(det.name().to_string());
    for b in 1..block_count {
        out.add_state(format!("m{b}"));
    }
    // Map block of the initial state onto 0 by swapping identifiers.
    let init_block = block[det.initial()];
    let rename =
        |b: usize| -> StateId {
            if b == init_block {
                0
            } else if b == 0 {
                init_block
            } else {
                b
            }
        };
    for s in 0..n {
        for (label, t) in det.outgoing(s) {
            out.add_transition(rename(block[s]), label.clone(), rename(block[t]));
        }
        if det.is_final(s) {
            out.mark_final(rename(block[s]));
        }
    }
    out.canonicalize().with_name(det.name().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinize_is_identity_on_deterministic_machines() {
        let l = Lts::from_text("lts l\ninit a\na 2?req b\nb 2!ok:ntf a\nb 2!err:ntf a\n").unwrap();
        assert!(l.is_deterministic());
        assert!(determinize(&l).same_canonical_shape(&l));
    }

    #[test]
    fn determinize_merges_tau_closure() {
        let l = Lts::from_text("lts l\ninit s0\ns0 tau s1\ns1 2?req s2\n").unwrap();
        let det = determinize(&l);
        assert_eq!(det.state_count(), 2);
        assert_eq!(det.transition_count(), 1);
        let (_, label, _) = det.transitions().next().unwrap();
        assert_eq!(label.to_string(), "2?req");
        assert!(!det.has_tau());
    }

    #[test]
    fn minimize_is_idempotent() {
        let l = Lts::from_text("lts l\ninit a\na 2?req b\nb 2!ok:ntf a\nb 2!err:ntf a\n").unwrap();
        let once = minimize(&l);
        let twice = minimize(&once);
        assert_eq!(once.state_count(), twice.state_count());
        assert!(once.same_canonical_shape(&twice));
    }

    #[test]
    fn minimize_merges_redundant_states() {
        // b and c are trace-equivalent sinks reached on the same label from
        // distinct predecessors.
        let l = Lts::from_text(
            "lts l\ninit a\na 1!x b\na 1!y c\nb 2!z d\nc 2!z e\n",
        )
        .unwrap();
        let min = minimize(&l);
        assert_eq!(min.state_count(), 3);
    }

    #[test]
    fn minimize_never_merges_final_with_nonfinal() {
        let l = Lts::from_text("lts l\ninit a\na 1!x b\na 1!y c\nfinal b\n").unwrap();
        let min = minimize(&l);
        assert_eq!(min.state_count(), 3);
        assert_eq!(min.finals().len(), 1);
    }
}
