// SPDX-License-Identifier: Apache-2.0

//! Two-pass assembler and disassembler for pvm32.
//!
//! Source is line oriented. `#` starts a comment (outside string and character
//! literals). A line holds an optional `label:` followed by an instruction or
//! one of the directives:
//!
//! ```text
//! .code / .data            switch section (code is the default)
//! .entry <expr>            entry point (default: start of code)
//! .word <expr>, ...        32-bit little-endian words
//! .byte <expr>, ...        single bytes
//! .ascii "text"            raw string bytes (escapes: \n \t \r \0 \\ \" \xHH)
//! .zero <count>            count zero bytes
//! ```
//!
//! An expression is a number (decimal, `0x` hex, optional leading `-`), a
//! character literal such as `'a'` or `'\n'`, a label, or `label+const` /
//! `label-const`. Registers are `r0`..`r7`; `sp` is accepted for `r7`.
//! Memory operands are written `[rN]`, `[rN+expr]` or `[rN-expr]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::isa::{Form, Instruction, Opcode, Reg};
use crate::pbf::{PandoraBinary, PbfError, Section, SectionKind};

pub const CODE_BASE: u32 = 0x0001_0000;
pub const DATA_BASE: u32 = 0x0020_0000;
const MAX_ZERO: u64 = 16 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsmErrorKind {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unresolved label `{0}`")]
    UnresolvedLabel(String),
    #[error("immediate `{0}` does not fit")]
    ImmediateOverflow(String),
    #[error("{0}")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsmError {
    #[error("line {line}: {kind}")]
    Line { line: usize, kind: AsmErrorKind },
    #[error("assembled image is invalid: {0}")]
    Image(PbfError),
}

impl AsmError {
    pub fn line(&self) -> Option<usize> {
        match self {
            AsmError::Line { line, .. } => Some(*line),
            AsmError::Image(_) => None,
        }
    }

    pub fn kind(&self) -> Option<&AsmErrorKind> {
        match self {
            AsmError::Line { kind, .. } => Some(kind),
            AsmError::Image(_) => None,
        }
    }
}

fn err<T>(line: usize, kind: AsmErrorKind) -> Result<T, AsmError> {
    Err(AsmError::Line { line, kind })
}

fn syntax<T>(line: usize, msg: impl Into<String>) -> Result<T, AsmError> {
    err(line, AsmErrorKind::Syntax(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Expr {
    Num(i64),
    Label(String, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Operand {
    Reg(Reg),
    Expr(Expr),
    /// `[base + offset]`
    Mem(Reg, Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Stmt {
    Insn(Opcode, Vec<Operand>),
    Word(Vec<Expr>),
    Byte(Vec<Expr>),
    Ascii(Vec<u8>),
    Zero(u32),
    Entry(Expr),
    Section(SectionKind),
}

impl Stmt {
    fn size(&self) -> u32 {
        match self {
            Stmt::Insn(..) => 8,
            Stmt::Word(w) => 4 * w.len() as u32,
            Stmt::Byte(b) => b.len() as u32,
            Stmt::Ascii(s) => s.len() as u32,
            Stmt::Zero(n) => *n,
            Stmt::Entry(_) | Stmt::Section(_) => 0,
        }
    }
}

struct Line {
    number: usize,
    labels: Vec<String>,
    stmt: Option<Stmt>,
}

/// Removes a trailing comment, honouring string and character literals.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut in_char = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' if in_str || in_char => escaped = true,
            '"' if !in_char => in_str = !in_str,
            '\'' if !in_str => in_char = !in_char,
            '#' if !in_str && !in_char => return &line[..i],
            _ => {}
        }
    }
    line
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '.')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn parse_reg(s: &str) -> Option<Reg> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("sp") {
        return Reg::new(7);
    }
    let digits = s.strip_prefix('r').or_else(|| s.strip_prefix('R'))?;
    if digits.len() != 1 {
        return None;
    }
    Reg::new(digits.parse().ok()?)
}

fn unescape(line: usize, body: &str) -> Result<Vec<u8>, AsmError> {
    let mut out = Vec::with_capacity(body.len());
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b != b'\\' {
            out.push(b);
            i += 1;
            continue;
        }
        let Some(&e) = bytes.get(i + 1) else {
            return syntax(line, "dangling escape");
        };
        i += 2;
        out.push(match e {
            b'n' => b'\n',
            b't' => b'\t',
            b'r' => b'\r',
            b'0' => 0,
            b'\\' => b'\\',
            b'"' => b'"',
            b'\'' => b'\'',
            b'x' => {
                let hex = body.get(i..i + 2).ok_or(AsmError::Line {
                    line,
                    kind: AsmErrorKind::Syntax("\\x needs two hex digits".into()),
                })?;
                i += 2;
                u8::from_str_radix(hex, 16).map_err(|_| AsmError::Line {
                    line,
                    kind: AsmErrorKind::Syntax(format!("bad hex escape `\\x{hex}`")),
                })?
            }
            other => return syntax(line, format!("unknown escape `\\{}`", other as char)),
        });
    }
    Ok(out)
}

fn parse_number(s: &str) -> Option<i64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let value = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else if body.bytes().all(|b| b.is_ascii_digit()) && !body.is_empty() {
        body.parse().ok()?
    } else {
        return None;
    };
    Some(if neg { -value } else { value })
}

fn parse_expr(line: usize, s: &str) -> Result<Expr, AsmError> {
    let s = s.trim();
    if s.is_empty() {
        return syntax(line, "missing operand");
    }
    if let Some(body) = s.strip_prefix('\'').and_then(|r| r.strip_suffix('\'')) {
        let bytes = unescape(line, body)?;
        return match bytes.as_slice() {
            [b] => Ok(Expr::Num(i64::from(*b))),
            _ => syntax(line, format!("bad character literal {s}")),
        };
    }
    if let Some(n) = parse_number(s) {
        return Ok(Expr::Num(n));
    }
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
        let body = s.trim_start_matches('-');
        let digits_ok = match body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
            Some(hex) => !hex.is_empty() && hex.bytes().all(|b| b.is_ascii_hexdigit()),
            None => body.bytes().all(|b| b.is_ascii_digit()),
        };
        // Well-formed but wider than i64.
        if digits_ok && !body.is_empty() {
            return err(line, AsmErrorKind::ImmediateOverflow(s.to_string()));
        }
        return syntax(line, format!("bad number `{s}`"));
    }
    let (name, offset) = match s.find(['+', '-']) {
        Some(i) => {
            let off = parse_number(s[i + 1..].trim())
                .ok_or(AsmError::Line { line, kind: AsmErrorKind::Syntax(format!("bad offset in `{s}`")) })?;
            (s[..i].trim(), if &s[i..=i] == "-" { -off } else { off })
        }
        None => (s, 0),
    };
    if !is_ident(name) || parse_reg(name).is_some() {
        return syntax(line, format!("expected expression, found `{s}`"));
    }
    Ok(Expr::Label(name.to_string(), offset))
}

fn parse_operand(line: usize, s: &str) -> Result<Operand, AsmError> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or(AsmError::Line { line, kind: AsmErrorKind::Syntax(format!("unclosed `[` in `{s}`")) })?
            .trim();
        let split = inner.find(['+', '-']);
        let (base, offset) = match split {
            Some(i) => {
                let off = parse_expr(line, &inner[i + 1..])?;
                let off = match (&inner[i..=i], off) {
                    ("-", Expr::Num(n)) => Expr::Num(-n),
                    ("-", Expr::Label(..)) => return syntax(line, "cannot negate a label"),
                    (_, e) => e,
                };
                (&inner[..i], off)
            }
            None => (inner, Expr::Num(0)),
        };
        let base = parse_reg(base)
            .ok_or(AsmError::Line { line, kind: AsmErrorKind::Syntax(format!("bad base register in `{s}`")) })?;
        return Ok(Operand::Mem(base, offset));
    }
    if let Some(r) = parse_reg(s) {
        return Ok(Operand::Reg(r));
    }
    parse_expr(line, s).map(Operand::Expr)
}

/// Splits on commas outside quotes and brackets.
fn split_operands(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut in_str, mut in_char, mut escaped, mut start) = (0i32, false, false, false, 0);
    for (i, c) in s.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' if in_str || in_char => escaped = true,
            '"' if !in_char => in_str = !in_str,
            '\'' if !in_str => in_char = !in_char,
            '[' if !in_str && !in_char => depth += 1,
            ']' if !in_str && !in_char => depth -= 1,
            ',' if depth == 0 && !in_str && !in_char => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_stmt(line: usize, text: &str) -> Result<Stmt, AsmError> {
    let (head, rest) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    };
    let exprs = |rest: &str| -> Result<Vec<Expr>, AsmError> {
        if rest.is_empty() {
            return syntax(line, format!("{head} needs at least one value"));
        }
        split_operands(rest).into_iter().map(|p| parse_expr(line, p)).collect()
    };
    let no_args = |stmt: Stmt| if rest.is_empty() { Ok(stmt) } else { syntax(line, format!("{head} takes no operands")) };
    match head.to_ascii_lowercase().as_str() {
        ".code" => no_args(Stmt::Section(SectionKind::Code)),
        ".data" => no_args(Stmt::Section(SectionKind::Data)),
        ".entry" => Ok(Stmt::Entry(parse_expr(line, rest)?)),
        ".word" => Ok(Stmt::Word(exprs(rest)?)),
        ".byte" => Ok(Stmt::Byte(exprs(rest)?)),
        ".ascii" => {
            let body = rest
                .strip_prefix('"')
                .and_then(|r| r.strip_suffix('"'))
                .ok_or(AsmError::Line { line, kind: AsmErrorKind::Syntax(".ascii needs a quoted string".into()) })?;
            Ok(Stmt::Ascii(unescape(line, body)?))
        }
        ".zero" => match parse_expr(line, rest)? {
            Expr::Num(n) if (0..=MAX_ZERO as i64).contains(&n) => Ok(Stmt::Zero(n as u32)),
            Expr::Num(_) => err(line, AsmErrorKind::ImmediateOverflow(rest.to_string())),
            Expr::Label(..) => syntax(line, ".zero needs a constant count"),
        },
        m if m.starts_with('.') => syntax(line, format!("unknown directive `{head}`")),
        _ => {
            let opcode = Opcode::from_mnemonic(head).ok_or(AsmError::Line {
                line,
                kind: AsmErrorKind::UnknownMnemonic(head.to_string()),
            })?;
            let ops = if rest.is_empty() {
                Vec::new()
            } else {
                split_operands(rest).into_iter().map(|p| parse_operand(line, p)).collect::<Result<_, _>>()?
            };
            check_shape(line, opcode, &ops)?;
            Ok(Stmt::Insn(opcode, ops))
        }
    }
}

fn check_shape(line: usize, opcode: Opcode, ops: &[Operand]) -> Result<(), AsmError> {
    use Operand::{Expr as E, Mem as M, Reg as R};
    #[allow(clippy::match_like_matches_macro)]
    let ok = match (opcode.form(), ops) {
        (Form::None, []) => true,
        (Form::RdImm, [R(_), E(_)]) => true,
        (Form::RdRs, [R(_), R(_)]) => true,
        (Form::RdRsRs, [R(_), R(_), R(_)]) => true,
        (Form::RdRsImm, [R(_), R(_), E(_)]) => true,
        (Form::RsRs, [R(_), R(_)]) => true,
        (Form::RsImm, [R(_), E(_)]) => true,
        (Form::Imm, [E(_)]) => true,
        (Form::Rs, [R(_)]) | (Form::Rd, [R(_)]) => true,
        (Form::Load, [R(_), M(..)]) => true,
        (Form::Store, [M(..), R(_)]) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        syntax(line, format!("wrong operands for {}", opcode.mnemonic().to_ascii_uppercase()))
    }
}

fn parse_lines(src: &str) -> Result<Vec<Line>, AsmError> {
    let mut lines = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let number = i + 1;
        let mut text = strip_comment(raw).trim();
        let mut labels = Vec::new();
        // Leading `name:` labels; a colon inside a literal is not a label.
        while let Some(colon) = text.find(':') {
            let candidate = text[..colon].trim();
            if !is_ident(candidate) || parse_reg(candidate).is_some() {
                break;
            }
            labels.push(candidate.to_string());
            text = text[colon + 1..].trim();
        }
        let stmt = if text.is_empty() { None } else { Some(parse_stmt(number, text)?) };
        if !labels.is_empty() || stmt.is_some() {
            lines.push(Line { number, labels, stmt });
        }
    }
    Ok(lines)
}

fn resolve(line: usize, e: &Expr, labels: &BTreeMap<String, u32>) -> Result<i64, AsmError> {
    match e {
        Expr::Num(n) => Ok(*n),
        Expr::Label(name, off) => labels
            .get(name)
            .map(|&addr| i64::from(addr) + off)
            .ok_or(AsmError::Line { line, kind: AsmErrorKind::UnresolvedLabel(name.clone()) }),
    }
}

fn to_u32(line: usize, v: i64) -> Result<u32, AsmError> {
    if (-(1i64 << 31)..(1i64 << 32)).contains(&v) {
        Ok(v as u32)
    } else {
        err(line, AsmErrorKind::ImmediateOverflow(format!("{v}")))
    }
}

/// Assembles `src` into a validated binary.
pub fn assemble(src: &str) -> Result<PandoraBinary, AsmError> {
    let lines = parse_lines(src)?;

    // Pass 1: addresses.
    let mut labels: BTreeMap<String, u32> = BTreeMap::new();
    let mut section = SectionKind::Code;
    let mut cursor = [CODE_BASE, DATA_BASE];
    let idx = |k: SectionKind| if k == SectionKind::Code { 0 } else { 1 };
    for l in &lines {
        for name in &l.labels {
            if labels.insert(name.clone(), cursor[idx(section)]).is_some() {
                return err(l.number, AsmErrorKind::DuplicateLabel(name.clone()));
            }
        }
        if let Some(stmt) = &l.stmt {
            if let Stmt::Section(k) = stmt {
                section = *k;
            }
            let c = &mut cursor[idx(section)];
            *c = c
                .checked_add(stmt.size())
                .ok_or(AsmError::Line { line: l.number, kind: AsmErrorKind::Syntax("section too large".into()) })?;
        }
    }

    // Pass 2: bytes.
    let mut out: [Vec<u8>; 2] = [Vec::new(), Vec::new()];
    let mut entry = None;
    section = SectionKind::Code;
    for l in &lines {
        let Some(stmt) = &l.stmt else { continue };
        let n = l.number;
        let buf = &mut out[idx(section)];
        match stmt {
            Stmt::Section(k) => section = *k,
            Stmt::Entry(e) => entry = Some(to_u32(n, resolve(n, e, &labels)?)?),
            Stmt::Word(ws) => {
                for w in ws {
                    buf.extend_from_slice(&to_u32(n, resolve(n, w, &labels)?)?.to_le_bytes());
                }
            }
            Stmt::Byte(bs) => {
                for b in bs {
                    let v = resolve(n, b, &labels)?;
                    if !(-128..=255).contains(&v) {
                        return err(n, AsmErrorKind::ImmediateOverflow(format!("{v}")));
                    }
                    buf.push(v as u8);
                }
            }
            Stmt::Ascii(s) => buf.extend_from_slice(s),
            Stmt::Zero(count) => buf.resize(buf.len() + *count as usize, 0),
            Stmt::Insn(op, ops) => buf.extend_from_slice(&encode_insn(n, *op, ops, &labels)?.encode()),
        }
    }

    let [code, data] = out;
    let mut sections = Vec::new();
    if !code.is_empty() {
        sections.push(Section::code(CODE_BASE, code));
    }
    if !data.is_empty() {
        let len = data.len() as u32;
        sections.push(Section::data(DATA_BASE, data, len));
    }
    let binary = PandoraBinary::new(entry.unwrap_or(CODE_BASE), sections);
    binary.validate().map_err(AsmError::Image)?;
    Ok(binary)
}

fn encode_insn(line: usize, op: Opcode, ops: &[Operand], labels: &BTreeMap<String, u32>) -> Result<Instruction, AsmError> {
    let z = Reg::new(0).expect("r0");
    let imm = |e: &Expr| resolve(line, e, labels).and_then(|v| to_u32(line, v));
    use Operand::{Expr as E, Mem as M, Reg as R};
    Ok(match ops {
        [] => Instruction::new(op, z, z, z, 0),
        [R(rd), E(e)] if op.form() == Form::RdImm => Instruction::new(op, *rd, z, z, imm(e)?),
        [R(rs), E(e)] => Instruction::new(op, z, *rs, z, imm(e)?),
        [R(rd), R(rs)] if op.form() == Form::RdRs => Instruction::new(op, *rd, *rs, z, 0),
        [R(a), R(b)] => Instruction::new(op, z, *a, *b, 0),
        [R(rd), R(a), R(b)] => Instruction::new(op, *rd, *a, *b, 0),
        [R(rd), R(a), E(e)] => Instruction::new(op, *rd, *a, z, imm(e)?),
        [E(e)] => Instruction::new(op, z, z, z, imm(e)?),
        [R(r)] if op.form() == Form::Rd => Instruction::new(op, *r, z, z, 0),
        [R(r)] => Instruction::new(op, z, *r, z, 0),
        [R(rd), M(base, off)] => Instruction::new(op, *rd, *base, z, imm(off)?),
        [M(base, off), R(src)] => Instruction::new(op, z, *base, *src, imm(off)?),
        _ => return syntax(line, "wrong operands"),
    })
}

/// Renders every section back to source. Code is one line per 8-byte unit;
/// a trailing partial unit and data sections use `.byte`.
pub fn disassemble(b: &PandoraBinary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, ".entry {:#x}", b.entry());
    for s in &b.sections {
        match s.kind {
            SectionKind::Code => {
                let _ = writeln!(out, ".code  # {:#010x}, {} bytes", s.vaddr, s.data.len());
                let mut units = s.data.chunks_exact(8);
                for unit in units.by_ref() {
                    let raw: [u8; 8] = unit.try_into().expect("8-byte chunk");
                    let _ = writeln!(out, "{}", Instruction::decode(raw));
                }
                write_bytes(&mut out, units.remainder());
            }
            SectionKind::Data => {
                let _ = writeln!(out, ".data  # {:#010x}, {} bytes", s.vaddr, s.data.len());
                for chunk in s.data.chunks(16) {
                    write_bytes(&mut out, chunk);
                }
            }
        }
    }
    out
}

fn write_bytes(out: &mut String, bytes: &[u8]) {
    if bytes.is_empty() {
        return;
    }
    out.push_str(".byte ");
    for (i, b) in bytes.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{b:#04x}");
    }
    out.push('\n');
}
