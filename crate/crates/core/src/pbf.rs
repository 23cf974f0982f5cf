// SPDX-License-Identifier: Apache-2.0

//! Pandora Binary Format (PBF).
//!
//! The only executable container the range accepts. Its magic (`7F 'P' 'B' 'F'`)
//! is deliberately distinct from every host executable format, so challenge
//! binaries cannot run outside the VM and host binaries cannot be loaded into it.
//!
//! Layout, all little-endian:
//!
//! ```text
//! header (20 bytes)
//!   0  magic          [u8; 4]  7F 50 42 46
//!   4  version        u16      1
//!   6  arch           u16      1 (pvm32)
//!   8  entry          u32
//!  12  section_count  u16
//!  14  pad            u16      0
//!  16  checksum       u32      CRC-32 (IEEE) over all payloads, in section order
//! descriptor (20 bytes each, section_count of them)
//!   0  kind           u8       1 code, 2 data
//!   1  perms          u8       bit0 read, bit1 write, bit2 execute
//!   2  pad            u16      0
//!   4  file_offset    u32
//!   8  vaddr          u32
//!  12  file_size      u32
//!  16  mem_size       u32
//! payloads
//! ```
//!
//! The canonical image places payloads back to back, in section order,
//! directly after the last descriptor.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub const MAGIC: [u8; 4] = [0x7F, b'P', b'B', b'F'];
pub const VERSION: u16 = 1;
/// The `pvm32` architecture id.
pub const ARCH_PVM32: u16 = 1;
pub const HEADER_LEN: usize = 20;
pub const DESCRIPTOR_LEN: usize = 20;
pub const PAGE_SIZE: u32 = 4096;

/// The message the host shell gives for a file it cannot execute; reused
/// verbatim for any input that is not a PBF image.
pub const EXEC_FORMAT_ERROR: &str = "cannot execute binary file: Exec format error";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PbfError {
    #[error("cannot execute binary file: Exec format error")]
    Format { foreign: ForeignKind },
    #[error("truncated image: need {needed} bytes, have {actual}")]
    Truncated { needed: usize, actual: usize },
    #[error("unsupported PBF version {0}")]
    UnsupportedVersion(u16),
    #[error("unsupported architecture id {0}")]
    UnsupportedArch(u16),
    #[error("checksum mismatch: header says {stored:08x}, payload is {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("sections {first} and {second} overlap")]
    SectionOverlap { first: usize, second: usize },
    #[error("entry point {0:#x} is not inside exactly one code section")]
    BadEntry(u32),
    #[error("section {index}: {reason}")]
    BadSection { index: usize, reason: &'static str },
    #[error("binary violates PBF invariants: {0}")]
    InvariantViolation(Box<PbfError>),
}

/// Executable kinds recognised by their leading magic bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForeignKind {
    Elf,
    Pe,
    MachO,
    Shebang,
    Pbf,
    Unknown,
}

impl ForeignKind {
    /// True for formats a generic host operating system would try to execute.
    pub fn is_host_executable(self) -> bool {
        matches!(self, Self::Elf | Self::Pe | Self::MachO | Self::Shebang)
    }
}

impl fmt::Display for ForeignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Elf => "ELF",
            Self::Pe => "PE",
            Self::MachO => "Mach-O",
            Self::Shebang => "shebang",
            Self::Pbf => "PBF",
            Self::Unknown => "unknown",
        })
    }
}

/// Host executable magics. Mach-O lists the thin 32/64-bit magics, the fat
/// magic, and their byte swaps.
pub const FOREIGN_MAGICS: &[(ForeignKind, &[u8])] = &[
    (ForeignKind::Elf, &[0x7F, b'E', b'L', b'F']),
    (ForeignKind::Pe, b"MZ"),
    (ForeignKind::MachO, &[0xFE, 0xED, 0xFA, 0xCE]),
    (ForeignKind::MachO, &[0xFE, 0xED, 0xFA, 0xCF]),
    (ForeignKind::MachO, &[0xCA, 0xFE, 0xBA, 0xBE]),
    (ForeignKind::MachO, &[0xCE, 0xFA, 0xED, 0xFE]),
    (ForeignKind::MachO, &[0xCF, 0xFA, 0xED, 0xFE]),
    (ForeignKind::MachO, &[0xBE, 0xBA, 0xFE, 0xCA]),
    (ForeignKind::Shebang, b"#!"),
];

pub fn check_foreign_format(bytes: &[u8]) -> ForeignKind {
    if bytes.starts_with(&MAGIC) {
        return ForeignKind::Pbf;
    }
    FOREIGN_MAGICS
        .iter()
        .find(|(_, magic)| bytes.starts_with(magic))
        .map_or(ForeignKind::Unknown, |(kind, _)| *kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    Code,
    Data,
}

impl SectionKind {
    fn to_byte(self) -> u8 {
        match self {
            Self::Code => 1,
            Self::Data => 2,
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(Self::Code),
            2 => Some(Self::Data),
            _ => None,
        }
    }

    /// The only permission set a section of this kind may carry.
    pub fn required_perms(self) -> Perms {
        match self {
            Self::Code => Perms::RX,
            Self::Data => Perms::RW,
        }
    }
}

/// Page / section permission bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Perms(u8);

impl Perms {
    pub const NONE: Perms = Perms(0);
    pub const READ: Perms = Perms(1);
    pub const WRITE: Perms = Perms(2);
    pub const EXEC: Perms = Perms(4);
    pub const RX: Perms = Perms(1 | 4);
    pub const RW: Perms = Perms(1 | 2);

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn from_bits(bits: u8) -> Option<Perms> {
        if bits & !7 == 0 {
            Some(Perms(bits))
        } else {
            None
        }
    }

    pub const fn contains(self, other: Perms) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn readable(self) -> bool {
        self.contains(Self::READ)
    }

    pub fn writable(self) -> bool {
        self.contains(Self::WRITE)
    }

    pub fn executable(self) -> bool {
        self.contains(Self::EXEC)
    }
}

impl fmt::Display for Perms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |p: Perms, c: char| if self.contains(p) { c } else { '-' };
        write!(f, "{}{}{}", flag(Perms::READ, 'r'), flag(Perms::WRITE, 'w'), flag(Perms::EXEC, 'x'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbfHeader {
    pub magic: [u8; 4],
    pub version: u16,
    pub arch: u16,
    pub entry: u32,
    pub section_count: u16,
    pub checksum: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub kind: SectionKind,
    pub perms: Perms,
    pub file_offset: u32,
    pub vaddr: u32,
    pub file_size: u32,
    pub mem_size: u32,
    pub data: Vec<u8>,
}

impl Section {
    pub fn code(vaddr: u32, data: Vec<u8>) -> Self {
        let size = data.len() as u32;
        Self::new(SectionKind::Code, vaddr, data, size)
    }

    /// A data section; `mem_size` is raised to the payload size if smaller.
    pub fn data(vaddr: u32, data: Vec<u8>, mem_size: u32) -> Self {
        let size = data.len() as u32;
        Self::new(SectionKind::Data, vaddr, data, mem_size.max(size))
    }

    fn new(kind: SectionKind, vaddr: u32, data: Vec<u8>, mem_size: u32) -> Self {
        Self {
            kind,
            perms: kind.required_perms(),
            file_offset: 0,
            vaddr,
            file_size: data.len() as u32,
            mem_size,
            data,
        }
    }

    /// Half-open page-rounded address range `[start, end)` as u64.
    pub fn page_span(&self) -> (u64, u64) {
        let start = u64::from(self.vaddr);
        let end = start + u64::from(self.mem_size);
        (start, end.div_ceil(u64::from(PAGE_SIZE)) * u64::from(PAGE_SIZE))
    }

    pub fn contains(&self, addr: u32) -> bool {
        let (start, _) = self.page_span();
        let a = u64::from(addr);
        a >= start && a < start + u64::from(self.mem_size)
    }
}

/// A parsed, validated PBF executable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PandoraBinary {
    pub header: PbfHeader,
    pub sections: Vec<Section>,
}

impl PandoraBinary {
    /// Builds a canonical binary: offsets, count and checksum are computed.
    /// The result is not validated; call [`PandoraBinary::validate`] or
    /// [`serialize_binary`] to check invariants.
    pub fn new(entry: u32, mut sections: Vec<Section>) -> Self {
        let mut offset = (HEADER_LEN + DESCRIPTOR_LEN * sections.len()) as u32;
        for s in &mut sections {
            s.file_offset = offset;
            s.file_size = s.data.len() as u32;
            offset = offset.wrapping_add(s.file_size);
        }
        let checksum = payload_checksum(&sections);
        Self {
            header: PbfHeader {
                magic: MAGIC,
                version: VERSION,
                arch: ARCH_PVM32,
                entry,
                section_count: sections.len() as u16,
                checksum,
            },
            sections,
        }
    }

    pub fn entry(&self) -> u32 {
        self.header.entry
    }

    pub fn code_sections(&self) -> impl Iterator<Item = &Section> {
        self.sections.iter().filter(|s| s.kind == SectionKind::Code)
    }

    pub fn validate(&self) -> Result<(), PbfError> {
        let h = &self.header;
        if h.magic != MAGIC {
            return Err(PbfError::Format { foreign: check_foreign_format(&h.magic) });
        }
        check_version_arch(h.version, h.arch)?;
        if usize::from(h.section_count) != self.sections.len() {
            return Err(PbfError::BadSection { index: self.sections.len(), reason: "section count mismatch" });
        }
        for (i, s) in self.sections.iter().enumerate() {
            check_section_shape(i, s)?;
            if s.data.len() != s.file_size as usize {
                return Err(PbfError::BadSection { index: i, reason: "payload length differs from file_size" });
            }
        }
        check_overlap(&self.sections)?;
        check_entry(h.entry, &self.sections)?;
        let computed = payload_checksum(&self.sections);
        if computed != h.checksum {
            return Err(PbfError::Checksum { stored: h.checksum, computed });
        }
        Ok(())
    }
}

pub fn payload_checksum(sections: &[Section]) -> u32 {
    let mut hasher = crc32fast::Hasher::new();
    for s in sections {
        hasher.update(&s.data);
    }
    hasher.finalize()
}

fn check_version_arch(version: u16, arch: u16) -> Result<(), PbfError> {
    if version != VERSION {
        return Err(PbfError::UnsupportedVersion(version));
    }
    if arch != ARCH_PVM32 {
        return Err(PbfError::UnsupportedArch(arch));
    }
    Ok(())
}

fn check_section_shape(index: usize, s: &Section) -> Result<(), PbfError> {
    let bad = |reason| Err(PbfError::BadSection { index, reason });
    if s.perms != s.kind.required_perms() {
        return match s.kind {
            SectionKind::Code => bad("code sections must be read+execute only"),
            SectionKind::Data => bad("data sections must be read+write only"),
        };
    }
    if s.vaddr % PAGE_SIZE != 0 {
        return bad("vaddr is not 4096-aligned");
    }
    if s.mem_size == 0 {
        return bad("mem_size is zero");
    }
    if s.mem_size < s.file_size {
        return bad("mem_size is smaller than file_size");
    }
    if u64::from(s.vaddr) + u64::from(s.mem_size) > 1 << 32 {
        return bad("section extends past the 32-bit address space");
    }
    Ok(())
}

fn check_overlap(sections: &[Section]) -> Result<(), PbfError> {
    for (i, a) in sections.iter().enumerate() {
        let (a0, a1) = a.page_span();
        for (j, b) in sections.iter().enumerate().skip(i + 1) {
            let (b0, b1) = b.page_span();
            if a0 < b1 && b0 < a1 {
                return Err(PbfError::SectionOverlap { first: i, second: j });
            }
        }
    }
    Ok(())
}

fn check_entry(entry: u32, sections: &[Section]) -> Result<(), PbfError> {
    let hits = sections
        .iter()
        .filter(|s| s.kind == SectionKind::Code && s.contains(entry))
        .count();
    if hits != 1 || entry % 8 != 0 {
        return Err(PbfError::BadEntry(entry));
    }
    Ok(())
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn need(bytes: &[u8], needed: usize) -> Result<(), PbfError> {
    if bytes.len() < needed {
        Err(PbfError::Truncated { needed, actual: bytes.len() })
    } else {
        Ok(())
    }
}

fn parse_header(bytes: &[u8]) -> Result<PbfHeader, PbfError> {
    need(bytes, MAGIC.len())?;
    if bytes[..4] != MAGIC {
        return Err(PbfError::Format { foreign: check_foreign_format(bytes) });
    }
    need(bytes, HEADER_LEN)?;
    let header = PbfHeader {
        magic: MAGIC,
        version: u16_at(bytes, 4),
        arch: u16_at(bytes, 6),
        entry: u32_at(bytes, 8),
        section_count: u16_at(bytes, 12),
        checksum: u32_at(bytes, 16),
    };
    check_version_arch(header.version, header.arch)?;
    Ok(header)
}

/// Decodes descriptors and payloads without cross-section checks.
fn parse_sections(bytes: &[u8], header: &PbfHeader) -> Result<Vec<Section>, PbfError> {
    let count = usize::from(header.section_count);
    need(bytes, HEADER_LEN + DESCRIPTOR_LEN * count)?;
    let mut sections = Vec::with_capacity(count);
    for index in 0..count {
        let d = &bytes[HEADER_LEN + DESCRIPTOR_LEN * index..][..DESCRIPTOR_LEN];
        let kind = SectionKind::from_byte(d[0]).ok_or(PbfError::BadSection { index, reason: "unknown section kind" })?;
        let perms = Perms::from_bits(d[1]).ok_or(PbfError::BadSection { index, reason: "unknown permission bits" })?;
        let file_offset = u32_at(d, 4);
        let file_size = u32_at(d, 12);
        let end = file_offset as usize + file_size as usize;
        need(bytes, end)?;
        let section = Section {
            kind,
            perms,
            file_offset,
            vaddr: u32_at(d, 8),
            file_size,
            mem_size: u32_at(d, 16),
            data: bytes[file_offset as usize..end].to_vec(),
        };
        check_section_shape(index, &section)?;
        sections.push(section);
    }
    Ok(sections)
}

pub fn parse_binary(bytes: &[u8]) -> Result<PandoraBinary, PbfError> {
    let header = parse_header(bytes)?;
    let sections = parse_sections(bytes, &header)?;
    check_overlap(&sections)?;
    check_entry(header.entry, &sections)?;
    let computed = payload_checksum(&sections);
    if computed != header.checksum {
        return Err(PbfError::Checksum { stored: header.checksum, computed });
    }
    Ok(PandoraBinary { header, sections })
}

/// Writes the canonical image of `b`.
pub fn serialize_binary(b: &PandoraBinary) -> Result<Vec<u8>, PbfError> {
    b.validate().map_err(|e| PbfError::InvariantViolation(Box::new(e)))?;
    let payload: usize = b.sections.iter().map(|s| s.data.len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + DESCRIPTOR_LEN * b.sections.len() + payload);
    let h = &b.header;
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&h.version.to_le_bytes());
    out.extend_from_slice(&h.arch.to_le_bytes());
    out.extend_from_slice(&h.entry.to_le_bytes());
    out.extend_from_slice(&h.section_count.to_le_bytes());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&h.checksum.to_le_bytes());
    let mut offset = (HEADER_LEN + DESCRIPTOR_LEN * b.sections.len()) as u32;
    for s in &b.sections {
        out.push(s.kind.to_byte());
        out.push(s.perms.bits());
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&offset.to_le_bytes());
        out.extend_from_slice(&s.vaddr.to_le_bytes());
        out.extend_from_slice(&s.file_size.to_le_bytes());
        out.extend_from_slice(&s.mem_size.to_le_bytes());
        offset += s.file_size;
    }
    for s in &b.sections {
        out.extend_from_slice(&s.data);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not evaluated because an earlier check it depends on failed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub foreign_kind: ForeignKind,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            writeln!(f, "{status:4} {:<16} {}", c.name, c.detail)?;
        }
        write!(f, "{}", if self.passed() { "verified" } else { "NOT verified" })
    }
}

pub const VERIFY_CHECKS: [&str; 7] =
    ["magic", "foreign-magic", "header", "section-bounds", "section-overlap", "entry", "checksum"];

/// Runs every container check independently and reports each outcome.
pub fn verify_binary(bytes: &[u8]) -> VerifyReport {
    let foreign_kind = check_foreign_format(bytes);
    let mut checks = Vec::with_capacity(VERIFY_CHECKS.len());
    let mut push = |name, status, detail: String| checks.push(CheckResult { name, status, detail });
    let result = |r: Result<(), PbfError>| match r {
        Ok(()) => (CheckStatus::Pass, String::from("ok")),
        Err(e) => (CheckStatus::Fail, format!("{e}")),
    };

    if foreign_kind == ForeignKind::Pbf {
        push("magic", CheckStatus::Pass, String::from("7f504246"));
    } else {
        push("magic", CheckStatus::Fail, format!("{EXEC_FORMAT_ERROR} (found {foreign_kind})"));
    }
    if foreign_kind.is_host_executable() {
        push("foreign-magic", CheckStatus::Fail, format!("image is a host {foreign_kind} executable"));
    } else {
        push("foreign-magic", CheckStatus::Pass, format!("not a host executable ({foreign_kind})"));
    }

    let header = match parse_header(bytes) {
        Ok(h) => {
            push("header", CheckStatus::Pass, format!("{} section(s), entry {:#x}", h.section_count, h.entry));
            Some(h)
        }
        Err(e) => {
            push("header", CheckStatus::Fail, format!("{e}"));
            None
        }
    };
    let sections = header.as_ref().map(|h| parse_sections(bytes, h));
    match &sections {
        Some(Ok(s)) => push("section-bounds", CheckStatus::Pass, format!("{} section(s) well-formed", s.len())),
        Some(Err(e)) => push("section-bounds", CheckStatus::Fail, format!("{e}")),
        None => push("section-bounds", CheckStatus::Skipped, String::from("header unreadable")),
    }
    match (&header, &sections) {
        (Some(h), Some(Ok(s))) => {
            let (st, d) = result(check_overlap(s));
            push("section-overlap", st, d);
            let (st, d) = result(check_entry(h.entry, s));
            push("entry", st, d);
            let computed = payload_checksum(s);
            if computed == h.checksum {
                push("checksum", CheckStatus::Pass, format!("{computed:08x}"));
            } else {
                push(
                    "checksum",
                    CheckStatus::Fail,
                    format!("{}", PbfError::Checksum { stored: h.checksum, computed }),
                );
            }
        }
        _ => {
            for name in ["section-overlap", "entry", "checksum"] {
                push(name, CheckStatus::Skipped, String::from("sections unreadable"));
            }
        }
    }
    VerifyReport { foreign_kind, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn minimal() -> PandoraBinary {
        // MOVI r0, 1
        PandoraBinary::new(0x1_0000, vec![Section::code(0x1_0000, vec![0x01, 0, 0, 0, 1, 0, 0, 0])])
    }

    #[test]
    fn minimal_image_parses() {
        let img = serialize_binary(&minimal()).unwrap();
        assert_eq!(img.len(), HEADER_LEN + DESCRIPTOR_LEN + 8);
        let b = parse_binary(&img).unwrap();
        assert_eq!(b.header.section_count, 1);
        assert_eq!(b, minimal());
        assert_eq!(serialize_binary(&b).unwrap(), img);
    }

    #[test]
    fn elf_magic_is_exec_format_error() {
        let err = parse_binary(b"\x7fELF\x02\x01\x01\x00rest of header").unwrap_err();
        assert_eq!(err, PbfError::Format { foreign: ForeignKind::Elf });
        assert_eq!(alloc::string::ToString::to_string(&err), EXEC_FORMAT_ERROR);
    }

    #[test]
    fn short_input_is_truncated() {
        assert!(matches!(parse_binary(b"\x7fPB"), Err(PbfError::Truncated { needed: 4, actual: 3 })));
        let img = serialize_binary(&minimal()).unwrap();
        assert!(matches!(parse_binary(&img[..30]), Err(PbfError::Truncated { .. })));
        assert!(matches!(parse_binary(&img[..img.len() - 1]), Err(PbfError::Truncated { .. })));
    }

    #[test]
    fn overlapping_sections_are_rejected() {
        let b = PandoraBinary::new(
            0x1_0000,
            vec![Section::code(0x1_0000, vec![0x18, 0, 0, 0, 0, 0, 0, 0]), Section::data(0x1_0000, vec![1], 1)],
        );
        assert!(matches!(serialize_binary(&b), Err(PbfError::InvariantViolation(e)) if matches!(*e, PbfError::SectionOverlap { .. })));
        // Same page, different bytes: still an overlap at page granularity.
        let b = PandoraBinary::new(
            0x1_0000,
            vec![Section::code(0x1_0000, vec![0; 8]), Section::data(0x1_1000, vec![1], 0x1000)],
        );
        assert!(serialize_binary(&b).is_ok());
    }

    #[test]
    fn entry_must_be_in_code() {
        let b = PandoraBinary::new(
            0x2_0000,
            vec![Section::code(0x1_0000, vec![0; 8]), Section::data(0x2_0000, vec![0; 8], 8)],
        );
        assert_eq!(b.validate(), Err(PbfError::BadEntry(0x2_0000)));
        let b = PandoraBinary::new(0x1_0004, vec![Section::code(0x1_0000, vec![0; 16])]);
        assert_eq!(b.validate(), Err(PbfError::BadEntry(0x1_0004)));
    }

    #[test]
    fn writable_code_is_rejected() {
        let mut b = minimal();
        b.sections[0].perms = Perms(7);
        assert!(matches!(b.validate(), Err(PbfError::BadSection { index: 0, .. })));
    }

    #[test]
    fn checksum_catches_every_single_byte_corruption() {
        let b = PandoraBinary::new(
            0x1_0000,
            vec![
                Section::code(0x1_0000, (0u8..64).collect()),
                Section::data(0x20_0000, b"hello, range".to_vec(), 0x100),
            ],
        );
        let img = serialize_binary(&b).unwrap();
        let payload_start = HEADER_LEN + 2 * DESCRIPTOR_LEN;
        for i in payload_start..img.len() {
            for flip in [0x01u8, 0x80, 0xFF] {
                let mut bad = img.clone();
                bad[i] ^= flip;
                assert!(matches!(parse_binary(&bad), Err(PbfError::Checksum { .. })), "byte {i} flip {flip:#x}");
            }
        }
    }

    #[test]
    fn foreign_table() {
        assert_eq!(check_foreign_format(b"\x7fELF"), ForeignKind::Elf);
        assert_eq!(check_foreign_format(b"#!/bin/sh"), ForeignKind::Shebang);
        assert_eq!(check_foreign_format(b"\x7fPBF"), ForeignKind::Pbf);
        assert_eq!(check_foreign_format(b"MZ\x90\x00"), ForeignKind::Pe);
        assert_eq!(check_foreign_format(&[0xCF, 0xFA, 0xED, 0xFE]), ForeignKind::MachO);
        assert_eq!(check_foreign_format(&[0xCA, 0xFE, 0xBA, 0xBE]), ForeignKind::MachO);
        assert_eq!(check_foreign_format(b""), ForeignKind::Unknown);
        assert_eq!(check_foreign_format(b"\x00asm"), ForeignKind::Unknown);
    }

    #[test]
    fn pbf_magic_is_prefix_free_against_foreign_table() {
        for (_, m) in FOREIGN_MAGICS {
            assert!(!m.starts_with(&MAGIC) && !MAGIC.starts_with(m), "{m:02x?}");
        }
    }

    #[test]
    fn verify_reports_each_check() {
        let img = serialize_binary(&minimal()).unwrap();
        let report = verify_binary(&img);
        assert!(report.passed(), "{report}");
        assert_eq!(report.checks.len(), VERIFY_CHECKS.len());

        let mut bad = img.clone();
        *bad.last_mut().unwrap() ^= 1;
        let report = verify_binary(&bad);
        for c in &report.checks {
            let expect = if c.name == "checksum" { CheckStatus::Fail } else { CheckStatus::Pass };
            assert_eq!(c.status, expect, "{}", c.name);
        }

        let report = verify_binary(b"\x7fELF\x02\x01\x01\x00");
        assert_eq!(report.foreign_kind, ForeignKind::Elf);
        assert_eq!(report.check("magic").unwrap().status, CheckStatus::Fail);
        assert_eq!(report.check("foreign-magic").unwrap().status, CheckStatus::Fail);
        assert_eq!(report.check("checksum").unwrap().status, CheckStatus::Skipped);
        assert!(!report.passed());
    }
}
