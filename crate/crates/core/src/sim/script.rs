//! The line-based `.fault` script format.
//!
//! ```text
//! component Server
//! decide err, err, ok
//! exhausted repeat-last
//! ```
//!
//! A file may hold several blocks, one per scripted component. `exhausted`
//! defaults to `repeat-last`.

use crate::action::is_valid_name;
use crate::error::ParseError;
use crate::sim::{ExhaustedPolicy, FaultScript};

pub fn parse_fault_scripts(text: &str, file: &str) -> Result<Vec<FaultScript>, ParseError> {
    let mut scripts: Vec<FaultScript> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "component" => match words.as_slice() {
                [_, name] if is_valid_name(name) => scripts.push(FaultScript {
                    component: name.to_string(),
                    decisions: Vec::new(),
                    exhausted: ExhaustedPolicy::default(),
                }),
                _ => return Err(ParseError::new(file, lineno, "expected `component <name>`")),
            },
            "decide" => {
                let script = scripts.last_mut().ok_or_else(|| {
                    ParseError::new(file, lineno, "`decide` before any `component` line")
                })?;
                let mut any = false;
                for word in &words[1..] {
                    for msg in word.split(',').filter(|m| !m.is_empty()) {
                        if !is_valid_name(msg) {
                            return Err(ParseError::new(
                                file,
                                lineno,
                                format!("invalid message `{msg}`"),
                            ));
                        }
                        script.decisions.push(msg.to_string());
                        any = true;
                    }
                }
                if !any {
                    return Err(ParseError::new(file, lineno, "expected `decide <msg>[, <msg>...]`"));
                }
            }
            "exhausted" => {
                let script = scripts.last_mut().ok_or_else(|| {
                    ParseError::new(file, lineno, "`exhausted` before any `component` line")
                })?;
                script.exhausted = match words.get(1) {
                    Some(&"repeat-last") => ExhaustedPolicy::RepeatLast,
                    Some(&"default-order") => ExhaustedPolicy::DefaultOrder,
                    _ => {
                        return Err(ParseError::new(
                            file,
                            lineno,
                            "expected `exhausted repeat-last|default-order`",
                        ))
                    }
                };
            }
            other => {
                return Err(ParseError::new(file, lineno, format!("unknown directive `{other}`")))
            }
        }
    }
    Ok(scripts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_blocks() {
        let text = "# server misbehaves twice\ncomponent Server\ndecide err, err, ok\nexhausted repeat-last\n";
        let scripts = parse_fault_scripts(text, "t").unwrap();
        assert_eq!(scripts.len(), 1);
        assert_eq!(scripts[0].decisions, vec!["err", "err", "ok"]);
        assert_eq!(scripts[0].exhausted, ExhaustedPolicy::RepeatLast);
    }

    #[test]
    fn rejects_orphan_decide() {
        assert!(parse_fault_scripts("decide ok\n", "t").is_err());
    }
}
