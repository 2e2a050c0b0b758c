//! Line-oriented instance format.
//!
//! ```text
//! version 1
//! component 1
//! entry o
//! exit d z
//! node w
//! box b 2
//! t o 0 w
//! t o 1 b:s
//! t b:x * d
//! ```
//!
//! Ports are written `<box>:<callee entry or exit>`. Nodes not listed by
//! `entry`, `exit` or `node` are inferred from the transitions that mention
//! them. `#` starts a comment.

use std::fmt::Write as _;

use super::{Instance, ValidationReport};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionBits {
    Zero,
    One,
    Both,
}

impl TransitionBits {
    pub fn bits(self) -> impl Iterator<Item = usize> {
        let (lo, hi) = match self {
            TransitionBits::Zero => (0, 0),
            TransitionBits::One => (1, 1),
            TransitionBits::Both => (0, 1),
        };
        lo..=hi
    }

    fn symbol(self) -> &'static str {
        match self {
            TransitionBits::Zero => "0",
            TransitionBits::One => "1",
            TransitionBits::Both => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTransition {
    pub src: String,
    pub bits: TransitionBits,
    pub dst: String,
}

impl RawTransition {
    pub fn new(src: impl Into<String>, bits: TransitionBits, dst: impl Into<String>) -> Self {
        RawTransition {
            src: src.into(),
            bits,
            dst: dst.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawComponent {
    /// 1-based index as declared.
    pub index: usize,
    pub entries: Vec<String>,
    pub exits: Vec<String>,
    pub nodes: Vec<String>,
    /// `(box name, 1-based callee index)`.
    pub boxes: Vec<(String, usize)>,
    pub transitions: Vec<RawTransition>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub components: Vec<RawComponent>,
}

impl RawInstance {
    pub fn to_text(&self) -> String {
        let mut out = String::from("version 1\n");
        for c in &self.components {
            writeln!(out, "component {}", c.index).unwrap();
            for e in &c.entries {
                writeln!(out, "entry {e}").unwrap();
            }
            if !c.exits.is_empty() {
                writeln!(out, "exit {}", c.exits.join(" ")).unwrap();
            }
            if !c.nodes.is_empty() {
                writeln!(out, "node {}", c.nodes.join(" ")).unwrap();
            }
            for (b, callee) in &c.boxes {
                writeln!(out, "box {b} {callee}").unwrap();
            }
            for t in &c.transitions {
                writeln!(out, "t {} {} {}", t.src, t.bits.symbol(), t.dst).unwrap();
            }
        }
        out
    }
}

fn check_ident(name: &str, line: usize, allow_port: bool) -> Result<()> {
    let colons = name.matches(':').count();
    let ok = !name.is_empty()
        && !name.starts_with('#')
        && match colons {
            0 => true,
            1 => allow_port && !name.starts_with(':') && !name.ends_with(':'),
            _ => false,
        };
    if ok {
        Ok(())
    } else {
        Err(Error::Parse {
            line,
            message: format!("bad identifier {name:?}"),
        })
    }
}

/// Parse the text format into an unvalidated [`RawInstance`].
pub fn parse_raw(text: &str) -> Result<RawInstance> {
    let mut raw = RawInstance::default();
    let mut seen_version = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let err = |message: String| Error::Parse { line: lineno, message };
        if !seen_version {
            if fields != ["version", "1"] {
                return Err(err("expected `version 1` header".into()));
            }
            seen_version = true;
            continue;
        }
        if fields[0] == "component" {
            let [_, idx] = fields[..] else {
                return Err(err("usage: component <index>".into()));
            };
            let index: usize = idx.parse().map_err(|_| err(format!("bad component index {idx:?}")))?;
            if index == 0 {
                return Err(err("component indices start at 1".into()));
            }
            raw.components.push(RawComponent {
                index,
                ..Default::default()
            });
            continue;
        }
        let Some(comp) = raw.components.last_mut() else {
            return Err(err(format!("`{}` before any component", fields[0])));
        };
        match fields[0] {
            "entry" | "exit" | "node" => {
                if fields.len() < 2 {
                    return Err(err(format!("`{}` needs at least one name", fields[0])));
                }
                for name in &fields[1..] {
                    check_ident(name, lineno, false)?;
                }
                let names = fields[1..].iter().map(|s| s.to_string());
                match fields[0] {
                    "entry" => comp.entries.extend(names),
                    "exit" => comp.exits.extend(names),
                    _ => comp.nodes.extend(names),
                }
            }
            "box" => {
                let [_, name, callee] = fields[..] else {
                    return Err(err("usage: box <name> <callee-index>".into()));
                };
                check_ident(name, lineno, false)?;
                let callee: usize = callee.parse().map_err(|_| err(format!("bad callee index {callee:?}")))?;
                comp.boxes.push((name.to_string(), callee));
            }
            "t" => {
                let [_, src, bit, dst] = fields[..] else {
                    return Err(err("usage: t <src> <0|1|*> <dst>".into()));
                };
                check_ident(src, lineno, true)?;
                check_ident(dst, lineno, true)?;
                let bits = match bit {
                    "0" => TransitionBits::Zero,
                    "1" => TransitionBits::One,
                    "*" => TransitionBits::Both,
                    other => return Err(err(format!("bad transition label {other:?}"))),
                };
                comp.transitions.push(RawTransition::new(src, bits, dst));
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    if !seen_version {
        return Err(Error::Parse {
            line: 0,
            message: "empty input".into(),
        });
    }
    Ok(raw)
}

/// Parse and validate.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let raw = parse_raw(text)?;
    Instance::from_raw(&raw).map_err(Error::Invalid)
}

impl From<ValidationReport> for Error {
    fn from(r: ValidationReport) -> Self {
        Error::Invalid(r)
    }
}
