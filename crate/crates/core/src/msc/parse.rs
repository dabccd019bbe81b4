//! The line-based `.msc` textual format.
//!
//! ```text
//! name retry
//! wrapper W
//! coordinator K1
//! targets Client1
//! note wrapper re-sends a rejected request at most twice
//!
//! bmsc attempt
//!   instance Client1 W K1
//!   Client1 -> W : req @ 2
//!   W -> K1 : req @ 2
//! end
//!
//! hmsc
//!   init start
//!   node att = attempt
//!   edge start -> att
//!   edge att -> att repeat 2
//! end
//! ```

use thiserror::Error;

use crate::action::is_valid_name;
use crate::error::ParseError;
use crate::msc::{Bmsc, EnhancementSpec, Event, Hmsc};

/// Parse failure: either malformed text or a chart violating the semantic
/// invariants (undeclared instances or nodes, unreachable nodes, ...).
#[derive(Debug, Clone, Error)]
pub enum MscParseError {
    #[error("syntax error: {0}")]
    Syntax(ParseError),
    #[error("semantic error: {0}")]
    Semantic(ParseError),
}

fn syntax(file: &str, line: usize, message: impl Into<String>) -> MscParseError {
    MscParseError::Syntax(ParseError::new(file, line, message))
}

pub fn parse_msc(text: &str, file: &str) -> Result<EnhancementSpec, MscParseError> {
    enum Block {
        TopLevel,
        Bmsc(Bmsc),
        Hmsc(Hmsc, usize),
    }

    let mut name: Option<String> = None;
    let mut wrapper: Option<String> = None;
    let mut coordinator: Option<String> = None;
    let mut targets: Vec<String> = Vec::new();
    let mut note = String::new();
    let mut bmscs: Vec<Bmsc> = Vec::new();
    let mut hmsc: Option<Hmsc> = None;
    let mut block = Block::TopLevel;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match &mut block {
            Block::TopLevel => match words[0] {
                "name" => name = Some(ident(&words, 1, file, lineno)?),
                "wrapper" => wrapper = Some(ident(&words, 1, file, lineno)?),
                "coordinator" => coordinator = Some(ident(&words, 1, file, lineno)?),
                "targets" => {
                    for word in &words[1..] {
                        for t in word.split(',').filter(|t| !t.is_empty()) {
                            if !is_valid_name(t) {
                                return Err(syntax(file, lineno, format!("invalid target `{t}`")));
                            }
                            targets.push(t.to_string());
                        }
                    }
                    if targets.is_empty() {
                        return Err(syntax(file, lineno, "expected `targets <component,...>`"));
                    }
                }
                "note" => note = line["note".len()..].trim().to_string(),
                "bmsc" => {
                    let bmsc_name = ident(&words, 1, file, lineno)?;
                    block = Block::Bmsc(Bmsc {
                        name: bmsc_name,
                        instances: Vec::new(),
                        events: Vec::new(),
                    });
                }
                "hmsc" => {
                    if hmsc.is_some() {
                        return Err(syntax(file, lineno, "duplicate `hmsc` block"));
                    }
                    block = Block::Hmsc(Hmsc::new(""), lineno);
                }
                other => {
                    return Err(syntax(file, lineno, format!("unknown directive `{other}`")));
                }
            },
            Block::Bmsc(bmsc) => match words[0] {
                "instance" => {
                    for word in &words[1..] {
                        if !is_valid_name(word) {
                            return Err(syntax(file, lineno, format!("invalid instance `{word}`")));
                        }
                        bmsc.instances.push(word.to_string());
                    }
                }
                "end" => {
                    let done = std::mem::replace(
                        bmsc,
                        Bmsc { name: String::new(), instances: Vec::new(), events: Vec::new() },
                    );
                    bmscs.push(done);
                    block = Block::TopLevel;
                }
                _ => bmsc.events.push(parse_event(line, file, lineno)?),
            },
            Block::Hmsc(graph, _) => match words[0] {
                "init" => graph.initial = ident(&words, 1, file, lineno)?,
                "final" => {
                    let id = ident(&words, 1, file, lineno)?;
                    graph.add_final(&id);
                }
                "node" => match words.as_slice() {
                    [_, id, "=", bmsc] if is_valid_name(id) && is_valid_name(bmsc) => {
                        graph.add_node(id, bmsc);
                    }
                    _ => return Err(syntax(file, lineno, "expected `node <id> = <bmsc>`")),
                },
                "edge" => {
                    // `edge a -> b`, optionally `repeat <n>` or `[repeat <n>]`.
                    let cleaned: Vec<&str> = words
                        .iter()
                        .map(|w| w.trim_matches(|c| c == '[' || c == ']'))
                        .filter(|w| !w.is_empty())
                        .collect();
                    match cleaned.as_slice() {
                        [_, from, "->", to] => graph.add_edge(from, to, None),
                        [_, from, "->", to, "repeat", n] => {
                            let n = n.parse::<u32>().map_err(|_| {
                                syntax(file, lineno, format!("invalid repeat count `{n}`"))
                            })?;
                            graph.add_edge(from, to, Some(n));
                        }
                        _ => {
                            return Err(syntax(
                                file,
                                lineno,
                                "expected `edge <id> -> <id> [repeat <n>]`",
                            ))
                        }
                    }
                }
                "end" => {
                    let (done, start_line) = match std::mem::replace(&mut block, Block::TopLevel) {
                        Block::Hmsc(g, l) => (g, l),
                        _ => unreachable!(),
                    };
                    if done.initial.is_empty() {
                        return Err(syntax(file, start_line, "hmsc block has no `init` line"));
                    }
                    hmsc = Some(done);
                }
                other => return Err(syntax(file, lineno, format!("unknown directive `{other}`"))),
            },
        }
    }

    let last = text.lines().count().max(1);
    match block {
        Block::TopLevel => {}
        Block::Bmsc(b) => return Err(syntax(file, last, format!("bmsc `{}` not closed", b.name))),
        Block::Hmsc(..) => return Err(syntax(file, last, "hmsc block not closed")),
    }

    let spec = EnhancementSpec {
        name: name.unwrap_or_else(|| "enhancement".to_string()),
        bmscs,
        hmsc: hmsc.ok_or_else(|| syntax(file, last, "missing `hmsc` block"))?,
        wrapper_instance: wrapper.ok_or_else(|| syntax(file, last, "missing `wrapper` header"))?,
        coordinator_instance: coordinator
            .ok_or_else(|| syntax(file, last, "missing `coordinator` header"))?,
        target_components: targets.into_iter().collect(),
        note,
    };
    spec.validate()
        .map_err(|reason| MscParseError::Semantic(ParseError::new(file, last, reason)))?;
    Ok(spec)
}

fn ident(words: &[&str], at: usize, file: &str, lineno: usize) -> Result<String, MscParseError> {
    match words.get(at) {
        Some(w) if is_valid_name(w) && words.len() == at + 1 => Ok(w.to_string()),
        _ => Err(syntax(file, lineno, format!("expected `{} <name>`", words[0]))),
    }
}

/// `A -> B : msg @ 2`, whitespace-insensitive around the separators.
fn parse_event(line: &str, file: &str, lineno: usize) -> Result<Event, MscParseError> {
    let bad = || syntax(file, lineno, "expected `<sender> -> <receiver> : <msg> @ <chan>`");
    let (sender, rest) = line.split_once("->").ok_or_else(bad)?;
    let (receiver, rest) = rest.split_once(':').ok_or_else(bad)?;
    let (message, channel) = rest.split_once('@').ok_or_else(bad)?;
    let (sender, receiver, message, channel) =
        (sender.trim(), receiver.trim(), message.trim(), channel.trim());
    for part in [sender, receiver, message] {
        if !is_valid_name(part) {
            return Err(syntax(file, lineno, format!("invalid name `{part}`")));
        }
    }
    let channel: u32 = channel
        .parse()
        .map_err(|_| syntax(file, lineno, format!("invalid channel `{channel}`")))?;
    if channel == 0 {
        return Err(syntax(file, lineno, "channel identifiers start at 1"));
    }
    Ok(Event::new(sender, receiver, message, channel))
}
