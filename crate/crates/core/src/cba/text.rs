//! The line-based `.cba` textual format.
//!
//! ```text
//! freshfrom 4
//! component Client1
//!   top 1 -> connector 2
//!   behavior client1.lts
//! component K1 coordinator
//!   bottom 1 -> connector 2
//!   top 1 -> connector 3
//!   behavior k1.lts
//! group retry_glue : K1 W retry_lower retry_upper
//! ```
//!
//! Connectors are implicit from the bindings. `group` lines record glue
//! blocks that act as a single logical coordinator; `freshfrom` persists the
//! fresh-channel counter so repeated enhancements never collide.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::action::{is_valid_name, ChannelId};
use crate::cba::{CbaSystem, Component, PortBinding, Side};
use crate::error::ParseError;
use crate::lts::Lts;

/// Serialized system: the `.cba` text plus one `.lts` file per component.
#[derive(Debug, Clone)]
pub struct CbaFiles {
    pub system: String,
    pub behaviors: Vec<(String, String)>,
}

pub fn parse_cba(
    text: &str,
    file: &str,
    loader: &mut dyn FnMut(&str) -> Result<String, String>,
) -> Result<CbaSystem, ParseError> {
    struct Draft {
        name: String,
        coordinator: bool,
        bindings: Vec<PortBinding>,
        behavior: Option<Lts>,
        line: usize,
    }

    let mut sys = CbaSystem::new();
    let mut freshfrom: Option<u32> = None;
    let mut draft: Option<Draft> = None;

    fn finish(sys: &mut CbaSystem, draft: Option<Draft>, file: &str) -> Result<(), ParseError> {
        if let Some(d) = draft {
            let behavior = d.behavior.ok_or_else(|| {
                ParseError::new(file, d.line, format!("component {} has no `behavior` line", d.name))
            })?;
            let mut component = Component::new(d.name, d.coordinator, behavior);
            component.bindings = d.bindings;
            sys.add_component(component);
        }
        Ok(())
    }

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "freshfrom" => {
                let n = words
                    .get(1)
                    .and_then(|w| w.parse::<u32>().ok())
                    .ok_or_else(|| ParseError::new(file, lineno, "expected `freshfrom <n>`"))?;
                freshfrom = Some(n);
            }
            "component" => {
                finish(&mut sys, draft.take(), file)?;
                let name = words
                    .get(1)
                    .copied()
                    .ok_or_else(|| ParseError::new(file, lineno, "expected `component <name>`"))?;
                if !is_valid_name(name) {
                    return Err(ParseError::new(file, lineno, format!("invalid name `{name}`")));
                }
                if sys.component(name).is_some() {
                    return Err(ParseError::new(file, lineno, format!("duplicate component `{name}`")));
                }
                let coordinator = match words.get(2) {
                    None => false,
                    Some(&"coordinator") => true,
                    Some(extra) => {
                        return Err(ParseError::new(file, lineno, format!("unexpected `{extra}`")))
                    }
                };
                draft = Some(Draft {
                    name: name.to_string(),
                    coordinator,
                    bindings: Vec::new(),
                    behavior: None,
                    line: lineno,
                });
            }
            side @ ("top" | "bottom") => {
                let d = draft.as_mut().ok_or_else(|| {
                    ParseError::new(file, lineno, "port binding outside a component block")
                })?;
                // `top <k> -> connector <c>`
                let (index, channel) = match words.as_slice() {
                    [_, k, "->", "connector", c] => (
                        k.parse::<u32>().map_err(|_| {
                            ParseError::new(file, lineno, format!("invalid port index `{k}`"))
                        })?,
                        c.parse::<u32>().map_err(|_| {
                            ParseError::new(file, lineno, format!("invalid connector id `{c}`"))
                        })?,
                    ),
                    _ => {
                        return Err(ParseError::new(
                            file,
                            lineno,
                            format!("expected `{side} <k> -> connector <c>`"),
                        ))
                    }
                };
                if channel == 0 {
                    return Err(ParseError::new(file, lineno, "connector ids start at 1"));
                }
                let side = if words[0] == "top" { Side::Top } else { Side::Bottom };
                d.bindings.push(PortBinding { side, index, channel: ChannelId(channel) });
            }
            "behavior" => {
                let d = draft.as_mut().ok_or_else(|| {
                    ParseError::new(file, lineno, "`behavior` outside a component block")
                })?;
                let path = words
                    .get(1)
                    .copied()
                    .ok_or_else(|| ParseError::new(file, lineno, "expected `behavior <file>`"))?;
                let content =
                    loader(path).map_err(|e| ParseError::new(file, lineno, e))?;
                d.behavior = Some(Lts::from_text_named(&content, path)?);
            }
            "group" => {
                finish(&mut sys, draft.take(), file)?;
                match words.as_slice() {
                    [_, name, ":", members @ ..] if !members.is_empty() => {
                        if !is_valid_name(name) {
                            return Err(ParseError::new(file, lineno, format!("invalid name `{name}`")));
                        }
                        let members: BTreeSet<String> =
                            members.iter().map(|m| m.to_string()).collect();
                        sys.add_glue_group(name.to_string(), members);
                    }
                    _ => {
                        return Err(ParseError::new(
                            file,
                            lineno,
                            "expected `group <name> : <member> ...`",
                        ))
                    }
                }
            }
            other => {
                return Err(ParseError::new(file, lineno, format!("unknown directive `{other}`")));
            }
        }
    }
    finish(&mut sys, draft.take(), file)?;
    if let Some(n) = freshfrom {
        sys.set_next_fresh_channel(n);
    }
    Ok(sys)
}

pub fn load_cba(path: &Path) -> Result<CbaSystem, ParseError> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|e| ParseError::new(&file, 0, format!("cannot read: {e}")))?;
    let base = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    parse_cba(&text, &file, &mut |behavior: &str| {
        fs::read_to_string(base.join(behavior)).map_err(|e| format!("cannot read `{behavior}`: {e}"))
    })
}

pub fn write_cba(sys: &CbaSystem) -> CbaFiles {
    let mut out = String::new();
    out.push_str(&format!("freshfrom {}\n", sys.next_fresh_channel()));
    let mut behaviors = Vec::new();
    for comp in sys.components() {
        out.push_str(&format!(
            "component {}{}\n",
            comp.name,
            if comp.is_coordinator { " coordinator" } else { "" }
        ));
        let mut bindings = comp.bindings.clone();
        bindings.sort();
        for b in bindings {
            out.push_str(&format!("  {} {} -> connector {}\n", b.side, b.index, b.channel));
        }
        let filename = format!("{}.lts", comp.name);
        out.push_str(&format!("  behavior {filename}\n"));
        behaviors.push((filename, comp.behavior.to_text()));
    }
    for (name, members) in sys.glue_groups() {
        let members: Vec<&str> = members.iter().map(|m| m.as_str()).collect();
        out.push_str(&format!("group {} : {}\n", name, members.join(" ")));
    }
    CbaFiles { system: out, behaviors }
}
