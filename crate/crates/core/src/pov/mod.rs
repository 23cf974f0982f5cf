// SPDX-License-Identifier: Apache-2.0

//! POV scripts: a small, declarative, non-Turing-complete language describing
//! one exploitation attempt against a range session.
//!
//! ```text
//! # greeter type 1
//! pov 1
//! negotiate type1 ipmask=7f7f7f7f regmask=7f7f7f7f regnum=5
//! write "1\n"
//! write pad(40,61) var(regvalue) var(ipvalue)
//! waitclose
//! ```
//!
//! One action per line, `#` comments outside string literals. See
//! `docs/pov-format.md` for the full grammar.

pub mod wire;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovType {
    Type1,
    Type2,
}

impl PovType {
    pub fn number(self) -> u32 {
        match self {
            PovType::Type1 => 1,
            PovType::Type2 => 2,
        }
    }
}

/// One piece of a `write` template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    /// `"text"` with C-style escapes.
    Literal(Vec<u8>),
    /// `pad(count, byte)`: `count` (decimal) copies of `byte` (hex).
    Pad { count: u32, byte: u8 },
    /// `var(name)`: the bound 32-bit value, little-endian.
    Var(String),
    /// `hex(c4aaaaba)`: raw bytes.
    Hex(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Template(pub Vec<Token>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Write(Template),
    ReadN { count: u32, capture: Option<String> },
    ReadUntil { delim: u8, capture: Option<String> },
    NegotiateType1 { ipmask: u32, regmask: u32, regnum: u32 },
    NegotiateType2,
    Slice { source: String, offset: u32, len: u32, dest: String },
    SubmitType2 { var: String },
    WaitClose,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PovScript {
    pub pov_type: PovType,
    pub actions: Vec<Action>,
}

/// Names bound by type 1 negotiation.
pub const TYPE1_VARS: [&str; 2] = ["ipvalue", "regvalue"];
/// Names bound by type 2 negotiation.
pub const TYPE2_VARS: [&str; 3] = ["addr", "size", "length"];

#[derive(PartialEq)]
enum Kind {
    Word,
    Bytes,
}

fn bind_capture<'a>(bound: &mut BTreeMap<&'a str, Kind>, name: &'a str, line: usize) -> Result<(), PovError> {
    if is_reserved(name) {
        return Err(PovError::TypeMismatch { line, msg: format!("`{name}` is reserved for negotiation") });
    }
    bound.insert(name, Kind::Bytes);
    Ok(())
}

fn is_reserved(name: &str) -> bool {
    TYPE1_VARS.contains(&name) || TYPE2_VARS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PovError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: variable `{name}` used before it is bound")]
    UnboundVariable { line: usize, name: String },
    #[error("line {line}: a script may negotiate only once")]
    MultipleNegotiations { line: usize },
    #[error("line {line}: {msg}")]
    TypeMismatch { line: usize, msg: String },
    #[error("script never negotiates")]
    MissingNegotiation,
}

fn syntax<T>(line: usize, msg: impl Into<String>) -> Result<T, PovError> {
    Err(PovError::Syntax { line, msg: msg.into() })
}

impl PovScript {
    pub fn negotiation(&self) -> Option<&Action> {
        self.actions.iter().find(|a| matches!(a, Action::NegotiateType1 { .. } | Action::NegotiateType2))
    }

    /// The type 1 negotiation parameters, if any.
    pub fn type1_request(&self) -> Option<(u32, u32, u32)> {
        self.actions.iter().find_map(|a| match *a {
            Action::NegotiateType1 { ipmask, regmask, regnum } => Some((ipmask, regmask, regnum)),
            _ => None,
        })
    }

    /// Checks ordering and typing rules. Line numbers are 1-based action
    /// indices offset by `first_line` (the `pov` header is line `first_line - 1`).
    fn check(&self, lines: &[usize]) -> Result<(), PovError> {
        let mut bound: BTreeMap<&str, Kind> = BTreeMap::new();
        let mut negotiated = false;
        let line_of = |i: usize| lines.get(i).copied().unwrap_or(i + 2);
        for (i, action) in self.actions.iter().enumerate() {
            let line = line_of(i);
            match action {
                Action::NegotiateType1 { .. } | Action::NegotiateType2 => {
                    if negotiated {
                        return Err(PovError::MultipleNegotiations { line });
                    }
                    negotiated = true;
                    let (ty, names): (_, &[&str]) = match action {
                        Action::NegotiateType1 { .. } => (PovType::Type1, &TYPE1_VARS),
                        _ => (PovType::Type2, &TYPE2_VARS),
                    };
                    if ty != self.pov_type {
                        return Err(PovError::TypeMismatch {
                            line,
                            msg: format!("type {} negotiation in a type {} script", ty.number(), self.pov_type.number()),
                        });
                    }
                    for n in names {
                        bound.insert(n, Kind::Word);
                    }
                }
                Action::Write(t) => {
                    for tok in &t.0 {
                        if let Token::Var(name) = tok {
                            match bound.get(name.as_str()) {
                                None => return Err(PovError::UnboundVariable { line, name: name.clone() }),
                                Some(Kind::Bytes) => {
                                    return Err(PovError::TypeMismatch {
                                        line,
                                        msg: format!("var({name}) needs a 32-bit value, `{name}` is a capture"),
                                    })
                                }
                                Some(Kind::Word) => {}
                            }
                        }
                    }
                }
                Action::ReadN { capture, .. } | Action::ReadUntil { capture, .. } => {
                    if let Some(name) = capture {
                        bind_capture(&mut bound, name, line)?;
                    }
                }
                Action::Slice { source, dest, .. } => {
                    if !bound.contains_key(source.as_str()) {
                        return Err(PovError::UnboundVariable { line, name: source.clone() });
                    }
                    bind_capture(&mut bound, dest, line)?;
                }
                Action::SubmitType2 { var } => {
                    if self.pov_type != PovType::Type2 {
                        return Err(PovError::TypeMismatch { line, msg: "submit is only valid in type 2 scripts".into() });
                    }
                    if !bound.contains_key(var.as_str()) {
                        return Err(PovError::UnboundVariable { line, name: var.clone() });
                    }
                }
                Action::WaitClose => {}
            }
        }
        if negotiated {
            Ok(())
        } else {
            Err(PovError::MissingNegotiation)
        }
    }

    /// Validates a script built in code.
    pub fn validate(&self) -> Result<(), PovError> {
        self.check(&[])
    }
}

/// Values a template can reference: 32-bit words from negotiation and byte
/// buffers captured from the challenge's output.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bindings {
    pub words: BTreeMap<String, u32>,
    pub buffers: BTreeMap<String, Vec<u8>>,
}

impl Bindings {
    pub fn set_word(&mut self, name: &str, value: u32) {
        self.words.insert(name.to_string(), value);
    }

    pub fn set_buffer(&mut self, name: &str, value: Vec<u8>) {
        self.buffers.insert(name.to_string(), value);
    }

    /// A buffer, or a word as its 4 little-endian bytes.
    pub fn bytes_of(&self, name: &str) -> Option<Vec<u8>> {
        self.buffers
            .get(name)
            .cloned()
            .or_else(|| self.words.get(name).map(|w| w.to_le_bytes().to_vec()))
    }
}

/// Expands a template. `var` tokens always produce exactly 4 bytes.
pub fn substitute(template: &Template, bindings: &Bindings) -> Result<Vec<u8>, PovError> {
    let mut out = Vec::new();
    for tok in &template.0 {
        match tok {
            Token::Literal(b) | Token::Hex(b) => out.extend_from_slice(b),
            Token::Pad { count, byte } => out.resize(out.len() + *count as usize, *byte),
            Token::Var(name) => {
                let v = bindings
                    .words
                    .get(name)
                    .ok_or_else(|| PovError::UnboundVariable { line: 0, name: name.clone() })?;
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

fn is_name(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn parse_hex_bytes(line: usize, s: &str) -> Result<Vec<u8>, PovError> {
    if s.len() % 2 != 0 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return syntax(line, format!("`{s}` is not an even-length hex string"));
    }
    Ok((0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).expect("hex digits")).collect())
}

fn parse_hex_u32(line: usize, s: &str) -> Result<u32, PovError> {
    if s.is_empty() || s.len() > 8 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return syntax(line, format!("`{s}` is not a 32-bit hex value"));
    }
    Ok(u32::from_str_radix(s, 16).expect("hex digits"))
}

fn parse_u32(line: usize, s: &str) -> Result<u32, PovError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return syntax(line, format!("`{s}` is not a decimal number"));
    }
    s.parse().or_else(|_| syntax(line, format!("`{s}` is out of range")))
}

fn unescape_literal(line: usize, body: &str) -> Result<Vec<u8>, PovError> {
    let mut out = Vec::new();
    let b = body.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if b[i] != b'\\' {
            out.push(b[i]);
            i += 1;
            continue;
        }
        let Some(&e) = b.get(i + 1) else { return syntax(line, "dangling escape") };
        i += 2;
        out.push(match e {
            b'n' => b'\n',
            b't' => b'\t',
            b'r' => b'\r',
            b'0' => 0,
            b'\\' => b'\\',
            b'"' => b'"',
            b'x' => {
                let hex = body.get(i..i + 2).ok_or(PovError::Syntax { line, msg: "\\x needs two hex digits".into() })?;
                i += 2;
                parse_hex_bytes(line, hex)?[0]
            }
            other => return syntax(line, format!("unknown escape `\\{}`", other as char)),
        });
    }
    Ok(out)
}

fn parse_template(line: usize, mut s: &str) -> Result<Template, PovError> {
    let mut toks = Vec::new();
    loop {
        s = s.trim_start();
        if s.is_empty() {
            return Ok(Template(toks));
        }
        if let Some(rest) = s.strip_prefix('"') {
            let mut end = None;
            let mut escaped = false;
            for (i, c) in rest.char_indices() {
                match c {
                    _ if escaped => escaped = false,
                    '\\' => escaped = true,
                    '"' => {
                        end = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let end = end.ok_or(PovError::Syntax { line, msg: "unterminated string literal".into() })?;
            toks.push(Token::Literal(unescape_literal(line, &rest[..end])?));
            s = &rest[end + 1..];
            continue;
        }
        let open = s.find('(').ok_or(PovError::Syntax { line, msg: format!("unexpected `{s}`") })?;
        let close = s.find(')').ok_or(PovError::Syntax { line, msg: "missing `)`".into() })?;
        if close < open {
            return syntax(line, "unbalanced parentheses");
        }
        let func = s[..open].trim();
        let args: Vec<&str> = s[open + 1..close].split(',').map(str::trim).collect();
        let tok = match (func, args.as_slice()) {
            ("pad", [count, byte]) => {
                let byte = parse_hex_bytes(line, byte)?;
                if byte.len() != 1 {
                    return syntax(line, "pad byte must be one hex byte");
                }
                Token::Pad { count: parse_u32(line, count)?, byte: byte[0] }
            }
            ("var", [name]) if is_name(name) => Token::Var(name.to_string()),
            ("hex", [bytes]) => Token::Hex(parse_hex_bytes(line, bytes)?),
            _ => return syntax(line, format!("bad template token `{}`", &s[..=close])),
        };
        toks.push(tok);
        s = &s[close + 1..];
    }
}

/// Strips a `#` comment that is not inside a string literal.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_str => escaped = true,
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_capture(line: usize, words: &[&str]) -> Result<Option<String>, PovError> {
    match words {
        [] => Ok(None),
        ["as", name] if is_name(name) => Ok(Some(name.to_string())),
        _ => syntax(line, "expected `as <name>`"),
    }
}

fn parse_action(line: usize, text: &str) -> Result<Action, PovError> {
    let (cmd, rest) = text.split_once(char::is_whitespace).map_or((text, ""), |(c, r)| (c, r.trim()));
    let words: Vec<&str> = rest.split_whitespace().collect();
    Ok(match cmd {
        "write" => Action::Write(parse_template(line, rest)?),
        "read" => match words.split_first() {
            Some((count, tail)) => Action::ReadN { count: parse_u32(line, count)?, capture: parse_capture(line, tail)? },
            None => return syntax(line, "read needs a byte count"),
        },
        "readuntil" => match words.split_first() {
            Some((delim, tail)) => {
                let d = parse_hex_bytes(line, delim)?;
                if d.len() != 1 {
                    return syntax(line, "readuntil needs a single hex byte delimiter");
                }
                Action::ReadUntil { delim: d[0], capture: parse_capture(line, tail)? }
            }
            None => return syntax(line, "readuntil needs a delimiter"),
        },
        "negotiate" => match words.as_slice() {
            ["type2"] => Action::NegotiateType2,
            ["type1", params @ ..] => {
                let mut fields: [Option<u32>; 3] = [None; 3];
                for p in params {
                    let (k, v) = p.split_once('=').ok_or(PovError::Syntax { line, msg: format!("bad parameter `{p}`") })?;
                    let slot = match k {
                        "ipmask" => 0,
                        "regmask" => 1,
                        "regnum" => 2,
                        _ => return syntax(line, format!("unknown parameter `{k}`")),
                    };
                    if fields[slot].is_some() {
                        return syntax(line, format!("`{k}` given twice"));
                    }
                    fields[slot] = Some(if slot == 2 { parse_u32(line, v)? } else { parse_hex_u32(line, v)? });
                }
                match fields {
                    [Some(ipmask), Some(regmask), Some(regnum)] => Action::NegotiateType1 { ipmask, regmask, regnum },
                    _ => return syntax(line, "type1 needs ipmask=, regmask= and regnum="),
                }
            }
            _ => return syntax(line, "expected `negotiate type1 ...` or `negotiate type2`"),
        },
        "slice" => match words.as_slice() {
            [source, offset, len, "as", dest] if is_name(source) && is_name(dest) => Action::Slice {
                source: source.to_string(),
                offset: parse_u32(line, offset)?,
                len: parse_u32(line, len)?,
                dest: dest.to_string(),
            },
            _ => return syntax(line, "expected `slice <src> <offset> <len> as <dest>`"),
        },
        "submit" => match words.as_slice() {
            [var] if is_name(var) => Action::SubmitType2 { var: var.to_string() },
            _ => return syntax(line, "expected `submit <name>`"),
        },
        "waitclose" if words.is_empty() => Action::WaitClose,
        _ => return syntax(line, format!("unknown action `{cmd}`")),
    })
}

pub fn parse_pov(text: &str) -> Result<PovScript, PovError> {
    let mut pov_type = None;
    let mut actions = Vec::new();
    let mut lines = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let t = strip_comment(raw).trim();
        if t.is_empty() {
            continue;
        }
        match pov_type {
            None => {
                pov_type = Some(match t.split_whitespace().collect::<Vec<_>>().as_slice() {
                    ["pov", "1"] => PovType::Type1,
                    ["pov", "2"] => PovType::Type2,
                    _ => return syntax(line, "script must start with `pov 1` or `pov 2`"),
                });
            }
            Some(_) => {
                actions.push(parse_action(line, t)?);
                lines.push(line);
            }
        }
    }
    let Some(pov_type) = pov_type else {
        return syntax(last_line.max(1), "missing `pov` header");
    };
    let script = PovScript { pov_type, actions };
    script.check(&lines)?;
    Ok(script)
}

fn write_literal(out: &mut String, bytes: &[u8]) {
    out.push('"');
    for &b in bytes {
        match b {
            b'\n' => out.push_str("\\n"),
            b'\t' => out.push_str("\\t"),
            b'\r' => out.push_str("\\r"),
            b'\\' => out.push_str("\\\\"),
            b'"' => out.push_str("\\\""),
            0x20..=0x7E => out.push(b as char),
            _ => {
                let _ = write!(out, "\\x{b:02x}");
            }
        }
    }
    out.push('"');
}

fn write_hex(out: &mut String, bytes: &[u8]) {
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, tok) in self.0.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            match tok {
                Token::Literal(b) => write_literal(&mut out, b),
                Token::Pad { count, byte } => {
                    let _ = write!(out, "pad({count},{byte:02x})");
                }
                Token::Var(n) => {
                    let _ = write!(out, "var({n})");
                }
                Token::Hex(b) => {
                    out.push_str("hex(");
                    write_hex(&mut out, b);
                    out.push(')');
                }
            }
        }
        f.write_str(&out)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let capture = |c: &Option<String>| c.as_ref().map(|n| format!(" as {n}")).unwrap_or_default();
        match self {
            Action::Write(t) if t.0.is_empty() => f.write_str("write"),
            Action::Write(t) => write!(f, "write {t}"),
            Action::ReadN { count, capture: c } => write!(f, "read {count}{}", capture(c)),
            Action::ReadUntil { delim, capture: c } => write!(f, "readuntil {delim:02x}{}", capture(c)),
            Action::NegotiateType1 { ipmask, regmask, regnum } => {
                write!(f, "negotiate type1 ipmask={ipmask:08x} regmask={regmask:08x} regnum={regnum}")
            }
            Action::NegotiateType2 => f.write_str("negotiate type2"),
            Action::Slice { source, offset, len, dest } => write!(f, "slice {source} {offset} {len} as {dest}"),
            Action::SubmitType2 { var } => write!(f, "submit {var}"),
            Action::WaitClose => f.write_str("waitclose"),
        }
    }
}

/// Canonical text form: `pov N` header, one action per line, trailing newline.
impl fmt::Display for PovScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pov {}", self.pov_type.number())?;
        for a in &self.actions {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

pub fn serialize_pov(script: &PovScript) -> String {
    script.to_string()
}
