//! Synchronous parallel composition.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::action::{ChannelId, Label, Polarity};
use crate::lts::{Lts, StateId};

/// Synchronous product of two machines. An action on a channel in `sync`
/// fires only jointly with a matching opposite-polarity action of the other
/// operand, producing a `Sync` label whose kind is the output party's.
/// Actions on other channels, `Tau`, and pre-existing `Sync` labels
/// interleave freely. Only reachable state pairs are retained.
pub fn parallel_compose(left: &Lts, right: &Lts, sync: &BTreeSet<ChannelId>) -> Lts {
    let mut out = Lts::new(format!("({}|{})", left.name(), right.name()));
    let mut ids: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
    let start = (left.initial(), right.initial());
    ids.insert(start, 0);
    let mut queue = VecDeque::from([start]);

    fn intern(
        out: &mut Lts,
        ids: &mut BTreeMap<(StateId, StateId), StateId>,
        queue: &mut VecDeque<(StateId, StateId)>,
        pair: (StateId, StateId),
    ) -> StateId {
        if let Some(&id) = ids.get(&pair) {
            return id;
        }
        let id = out.add_state(format!("p{}", ids.len()));
        ids.insert(pair, id);
        queue.push_back(pair);
        id
    }

    while let Some((p, q)) = queue.pop_front() {
        let source = ids[&(p, q)];
        for (ll, lt) in left.outgoing(p) {
            match ll {
                Label::Act(a) if sync.contains(&a.channel) => {
                    for (rl, rt) in right.outgoing(q) {
                        if let Label::Act(b) = rl {
                            if a.synchronizes_with(b) {
                                let kind = if a.polarity == Polarity::Output { a.kind } else { b.kind };
                                let label = Label::Sync {
                                    channel: a.channel,
                                    message: a.message.clone(),
                                    kind,
                                };
                                let target = intern(&mut out, &mut ids, &mut queue, (lt, rt));
                                out.add_transition(source, label, target);
                            }
                        }
                    }
                }
                _ => {
                    let target = intern(&mut out, &mut ids, &mut queue, (lt, q));
                    out.add_transition(source, ll.clone(), target);
                }
            }
        }
        for (rl, rt) in right.outgoing(q) {
            match rl {
                Label::Act(b) if sync.contains(&b.channel) => {
                    // Joint moves were added while scanning the left operand.
                    let _ = b;
                }
                _ => {
                    let target = intern(&mut out, &mut ids, &mut queue, (p, rt));
                    out.add_transition(source, rl.clone(), target);
                }
            }
        }
    }

    // A pair is final when each operand that declares final states is in one.
    // Machines without final states do not constrain finality, but two such
    // machines yield none.
    if !(left.finals().is_empty() && right.finals().is_empty()) {
        for (&(p, q), &id) in &ids {
            let left_ok = left.finals().is_empty() || left.is_final(p);
            let right_ok = right.finals().is_empty() || right.is_final(q);
            if left_ok && right_ok {
                out.mark_final(id);
            }
        }
    }

    out.canonicalize().with_name(out.name().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn composing_with_idle_is_identity_up_to_renaming() {
        let idle = Lts::new("idle");
        let l = Lts::from_text("lts l\ninit a\na 2!req b\nb 2?ok:ntf a\nb 2?err:ntf a\n").unwrap();
        let composed = parallel_compose(&idle, &l, &BTreeSet::new());
        assert!(composed.same_canonical_shape(&l));
    }

    #[test]
    fn forced_handshake() {
        let left = Lts::from_text("lts left\ninit s0\ns0 2!req s1\n").unwrap();
        let right = Lts::from_text("lts right\ninit t0\nt0 2?req t1\n").unwrap();
        let composed = parallel_compose(&left, &right, &BTreeSet::from([ChannelId(2)]));
        assert_eq!(composed.state_count(), 2);
        assert_eq!(composed.transition_count(), 1);
        let (_, label, _) = composed.transitions().next().unwrap();
        assert_eq!(label.to_string(), "2.req");
    }

    #[test]
    fn mismatched_sync_channel_blocks() {
        let left = Lts::from_text("lts left\ninit s0\ns0 2!req s1\n").unwrap();
        let right = Lts::from_text("lts right\ninit t0\nt0 2?other t1\n").unwrap();
        let composed = parallel_compose(&left, &right, &BTreeSet::from([ChannelId(2)]));
        assert_eq!(composed.state_count(), 1);
        assert_eq!(composed.transition_count(), 0);
    }

    #[test]
    fn finals_require_agreement_of_declaring_operands() {
        let l = Lts::from_text("lts l\ninit a\na 1!x b\nfinal b\n").unwrap();
        let r = Lts::from_text("lts r\ninit c\nc 2!y d\n").unwrap();
        let composed = parallel_compose(&l, &r, &BTreeSet::new());
        // Only l declares finals, so finality is decided by l alone.
        let finals: Vec<_> = composed.finals().iter().copied().collect();
        assert_eq!(finals.len(), 2);
        let none = parallel_compose(&r, &r.clone().with_name("r2"), &BTreeSet::new());
        assert!(none.finals().is_empty());
    }
}
