//! Channel-indexed message events and the transition labels built from them.

use std::fmt;

use crate::error::LabelParseError;

/// Identifier of a synchronous connector (a communication channel).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u32);

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Direction of an action from the owning component's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Input,
    Output,
}

impl Polarity {
    pub fn opposite(self) -> Self {
        match self {
            Polarity::Input => Polarity::Output,
            Polarity::Output => Polarity::Input,
        }
    }
}

/// The two message types of the architectural style. Requests travel upward,
/// notifications downward. Synchronization ignores the kind entirely; it is
/// carried for validation and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    Request,
    Notification,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageKind::Request => write!(f, "req"),
            MessageKind::Notification => write!(f, "ntf"),
        }
    }
}

/// Returns true when `name` is a valid symbolic message name
/// (`[A-Za-z_][A-Za-z0-9_]*`).
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A single message event on a channel: `2!req` is an output of message
/// `req` on channel 2, `2?req` the matching input.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub channel: ChannelId,
    pub message: String,
    pub polarity: Polarity,
    pub kind: MessageKind,
}

impl Action {
    pub fn new(
        channel: ChannelId,
        message: impl Into<String>,
        polarity: Polarity,
        kind: MessageKind,
    ) -> Self {
        let message = message.into();
        debug_assert!(is_valid_name(&message), "invalid message name {message:?}");
        Action { channel, message, polarity, kind }
    }

    pub fn input(channel: u32, message: &str, kind: MessageKind) -> Self {
        Action::new(ChannelId(channel), message, Polarity::Input, kind)
    }

    pub fn output(channel: u32, message: &str, kind: MessageKind) -> Self {
        Action::new(ChannelId(channel), message, Polarity::Output, kind)
    }

    /// Two actions synchronize iff channel and message match and the
    /// polarities are opposite; kinds play no role.
    pub fn synchronizes_with(&self, other: &Action) -> bool {
        self.channel == other.channel
            && self.message == other.message
            && self.polarity == other.polarity.opposite()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.polarity {
            Polarity::Input => '?',
            Polarity::Output => '!',
        };
        write!(f, "{}{}{}", self.channel, sep, self.message)?;
        if self.kind == MessageKind::Notification {
            write!(f, ":ntf")?;
        }
        Ok(())
    }
}

/// A transition label: a plain action, a completed handshake, or the
/// internal step. `Sync` labels only arise from parallel composition and
/// `Tau` from hiding or composition closure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Tau,
    Act(Action),
    /// A synchronized event; the kind is the output party's.
    Sync {
        channel: ChannelId,
        message: String,
        kind: MessageKind,
    },
}

impl Label {
    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    /// The channel the label involves, if any.
    pub fn channel(&self) -> Option<ChannelId> {
        match self {
            Label::Tau => None,
            Label::Act(a) => Some(a.channel),
            Label::Sync { channel, .. } => Some(*channel),
        }
    }

    pub fn message(&self) -> Option<&str> {
        match self {
            Label::Tau => None,
            Label::Act(a) => Some(&a.message),
            Label::Sync { message, .. } => Some(message),
        }
    }

    /// Rewrites the channel, leaving everything else alone.
    pub fn with_channel(&self, channel: ChannelId) -> Label {
        match self {
            Label::Tau => Label::Tau,
            Label::Act(a) => Label::Act(Action { channel, ..a.clone() }),
            Label::Sync { message, kind, .. } => {
                Label::Sync { channel, message: clone_msg(message), kind: *kind }
            }
        }
    }

    /// Parses the textual label grammar: `<chan>?<msg>`, `<chan>!<msg>`,
    /// `<chan>.<msg>` (synchronized), or `tau`, with an optional `:req` or
    /// `:ntf` suffix (default `:req`).
    pub fn parse(text: &str) -> Result<Label, LabelParseError> {
        if text == "tau" {
            return Ok(Label::Tau);
        }
        let (body, kind) = match text.rsplit_once(':') {
            Some((body, "req")) => (body, MessageKind::Request),
            Some((body, "ntf")) => (body, MessageKind::Notification),
            Some((_, suffix)) => {
                return Err(LabelParseError::new(text, format!("unknown kind suffix `:{suffix}`")))
            }
            None => (text, MessageKind::Request),
        };
        let sep_pos = body
            .find(['?', '!', '.'])
            .ok_or_else(|| LabelParseError::new(text, "expected `?`, `!` or `.` after channel"))?;
        let (chan_text, rest) = body.split_at(sep_pos);
        let sep = rest.chars().next().unwrap();
        let message = &rest[1..];
        let channel: u32 = chan_text
            .parse()
            .map_err(|_| LabelParseError::new(text, format!("invalid channel `{chan_text}`")))?;
        if channel < 1 {
            return Err(LabelParseError::new(text, "channel identifiers start at 1"));
        }
        if !is_valid_name(message) {
            return Err(LabelParseError::new(text, format!("invalid message name `{message}`")));
        }
        let channel = ChannelId(channel);
        Ok(match sep {
            '?' => Label::Act(Action::new(channel, message, Polarity::Input, kind)),
            '!' => Label::Act(Action::new(channel, message, Polarity::Output, kind)),
            '.' => Label::Sync { channel, message: message.to_string(), kind },
            _ => unreachable!(),
        })
    }
}

fn clone_msg(m: &str) -> String {
    m.to_string()
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => write!(f, "tau"),
            Label::Act(a) => write!(f, "{a}"),
            Label::Sync { channel, message, kind } => {
                write!(f, "{channel}.{message}")?;
                if *kind == MessageKind::Notification {
                    write!(f, ":ntf")?;
                }
                Ok(())
            }
        }
    }
}
