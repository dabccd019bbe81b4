//! Error types shared across the crate.

use thiserror::Error;

use crate::action::ChannelId;

/// A label that does not match the textual label grammar.
#[derive(Debug, Clone, Error)]
#[error("bad label `{text}`: {reason}")]
pub struct LabelParseError {
    pub text: String,
    pub reason: String,
}

impl LabelParseError {
    pub fn new(text: &str, reason: impl Into<String>) -> Self {
        LabelParseError { text: text.to_string(), reason: reason.into() }
    }
}

/// Parse failure in one of the line-based file formats, with a position.
#[derive(Debug, Clone, Error)]
#[error("{file}:{line}: {message}")]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(file: &str, line: usize, message: impl Into<String>) -> Self {
        ParseError { file: file.to_string(), line, message: message.into() }
    }
}

/// Channel relabelling failure: the map is not injective or an image channel
/// already occurs unmapped in the machine.
#[derive(Debug, Clone, Error)]
#[error("channel relabelling collision on channel {channel}: {reason}")]
pub struct CollisionError {
    pub channel: ChannelId,
    pub reason: String,
}
