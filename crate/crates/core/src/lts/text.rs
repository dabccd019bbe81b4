//! The line-based `.lts` textual format.
//!
//! ```text
//! # comment
//! lts <name>
//! init <state>
//! <state> <label> <state>
//! final <state> [<state> ...]
//! ```
//!
//! Labels follow the grammar of [`Label::parse`]; states are declared
//! implicitly by use. The `final` line is optional and written last so that
//! parsing preserves state order. Writing a canonically numbered machine
//! (see [`Lts::canonicalize`]) round-trips byte-identically.

use std::collections::BTreeMap;

use crate::action::{is_valid_name, Label};
use crate::error::ParseError;
use crate::lts::{Lts, StateId};

pub fn parse_lts(text: &str, file: &str) -> Result<Lts, ParseError> {
    let mut name: Option<String> = None;
    let mut lts: Option<Lts> = None;
    let mut ids: BTreeMap<String, StateId> = BTreeMap::new();
    let mut pending_finals: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let first = words.next().unwrap();
        match first {
            "lts" => {
                let n = words
                    .next()
                    .ok_or_else(|| ParseError::new(file, lineno, "expected `lts <name>`"))?;
                if name.is_some() {
                    return Err(ParseError::new(file, lineno, "duplicate `lts` line"));
                }
                if !is_valid_name(n) {
                    return Err(ParseError::new(file, lineno, format!("invalid name `{n}`")));
                }
                name = Some(n.to_string());
            }
            "init" => {
                let state = words
                    .next()
                    .ok_or_else(|| ParseError::new(file, lineno, "expected `init <state>`"))?;
                let machine_name = name
                    .clone()
                    .ok_or_else(|| ParseError::new(file, lineno, "`lts <name>` must come first"))?;
                if lts.is_some() {
                    return Err(ParseError::new(file, lineno, "duplicate `init` line"));
                }
                check_state_name(state, file, lineno)?;
                let mut machine = Lts::new(machine_name);
                machine.set_state_name(0, state);
                ids.insert(state.to_string(), 0);
                lts = Some(machine);
            }
            "final" => {
                if lts.is_none() {
                    return Err(ParseError::new(file, lineno, "`init` must come before `final`"));
                }
                let mut any = false;
                for state in words {
                    check_state_name(state, file, lineno)?;
                    pending_finals.push(state.to_string());
                    any = true;
                }
                if !any {
                    return Err(ParseError::new(file, lineno, "expected `final <state> ...`"));
                }
            }
            from => {
                let machine = lts.as_mut().ok_or_else(|| {
                    ParseError::new(file, lineno, "`init <state>` must come before transitions")
                })?;
                check_state_name(from, file, lineno)?;
                let label_text = words.next().ok_or_else(|| {
                    ParseError::new(file, lineno, "expected `<state> <label> <state>`")
                })?;
                let to = words
                    .next()
                    .ok_or_else(|| ParseError::new(file, lineno, "expected target state"))?;
                check_state_name(to, file, lineno)?;
                if let Some(extra) = words.next() {
                    return Err(ParseError::new(file, lineno, format!("unexpected `{extra}`")));
                }
                let label = Label::parse(label_text)
                    .map_err(|e| ParseError::new(file, lineno, e.to_string()))?;
                let from_id = intern(machine, &mut ids, from);
                let to_id = intern(machine, &mut ids, to);
                machine.add_transition(from_id, label, to_id);
            }
        }
    }

    let mut machine = lts.ok_or_else(|| {
        ParseError::new(file, text.lines().count().max(1), "missing `lts`/`init` lines")
    })?;
    for state in pending_finals {
        let id = intern(&mut machine, &mut ids, &state);
        machine.mark_final(id);
    }
    Ok(machine)
}

fn check_state_name(state: &str, file: &str, lineno: usize) -> Result<(), ParseError> {
    if is_valid_name(state) {
        Ok(())
    } else {
        Err(ParseError::new(file, lineno, format!("invalid state name `{state}`")))
    }
}

fn intern(machine: &mut Lts, ids: &mut BTreeMap<String, StateId>, state: &str) -> StateId {
    *ids.entry(state.to_string()).or_insert_with(|| machine.add_state(state.to_string()))
}

pub fn write_lts(l: &Lts) -> String {
    let mut out = String::new();
    out.push_str(&format!("lts {}\n", l.name()));
    out.push_str(&format!("init {}\n", l.state_name(l.initial())));
    for s in l.states() {
        for (label, t) in l.outgoing(s) {
            out.push_str(&format!("{} {} {}\n", l.state_name(s), label, l.state_name(t)));
        }
    }
    if !l.finals().is_empty() {
        let names: Vec<&str> = l.finals().iter().map(|s| l.state_name(*s)).collect();
        out.push_str(&format!("final {}\n", names.join(" ")));
    }
    out
}
