// SPDX-License-Identifier: Apache-2.0

//! The pvm32 instruction set.
//!
//! Every instruction is 8 bytes: `opcode rd rs1 rs2 imm32` with the immediate
//! little-endian. This table is the single source of truth for opcode numbers;
//! the VM decoder, the assembler and the disassembler all go through it.
//!
//! An encoding is canonical when the opcode is known, every register field the
//! opcode uses is below 8, and every field it does not use is zero. Anything
//! else decodes to [`Instruction::Invalid`].

use core::fmt;

pub const INSN_LEN: u32 = 8;
pub const NREGS: usize = 8;
/// Stack pointer by convention; used implicitly by PUSH, POP, CALL and RET.
pub const SP: Reg = Reg(7);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg(u8);

impl Reg {
    pub const fn new(index: u8) -> Option<Reg> {
        if (index as usize) < NREGS {
            Some(Reg(index))
        } else {
            None
        }
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Operand shape of an opcode; drives encoding, decoding and assembly syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// no operands
    None,
    /// `rd, imm`
    RdImm,
    /// `rd, rs1`
    RdRs,
    /// `rd, rs1, rs2`
    RdRsRs,
    /// `rd, rs1, imm`
    RdRsImm,
    /// `rs1, rs2`
    RsRs,
    /// `rs1, imm`
    RsImm,
    /// `imm`
    Imm,
    /// `rs1`
    Rs,
    /// `rd`
    Rd,
    /// `rd, [rs1 + imm]`
    Load,
    /// `[rs1 + imm], rs2`
    Store,
}

macro_rules! opcodes {
    ($($name:ident = $num:literal, $form:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        #[repr(u8)]
        pub enum Opcode {
            $($name = $num,)*
        }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[$(Opcode::$name,)*];

            pub const fn from_byte(b: u8) -> Option<Opcode> {
                match b {
                    $($num => Some(Opcode::$name),)*
                    _ => None,
                }
            }

            pub const fn form(self) -> Form {
                match self {
                    $(Opcode::$name => Form::$form,)*
                }
            }

            pub const fn mnemonic(self) -> &'static str {
                match self {
                    $(Opcode::$name => stringify!($name),)*
                }
            }
        }
    };
}

opcodes! {
    Movi = 0x01, RdImm;
    Mov  = 0x02, RdRs;
    Add  = 0x03, RdRsRs;
    Addi = 0x04, RdRsImm;
    Sub  = 0x05, RdRsRs;
    Xor  = 0x06, RdRsRs;
    And  = 0x07, RdRsRs;
    Or   = 0x08, RdRsRs;
    Cmp  = 0x09, RsRs;
    Cmpi = 0x0A, RsImm;
    Jmp  = 0x0B, Imm;
    Jz   = 0x0C, Imm;
    Jnz  = 0x0D, Imm;
    Jl   = 0x0E, Imm;
    Call = 0x0F, Imm;
    Push = 0x10, Rs;
    Pop  = 0x11, Rd;
    Ret  = 0x12, None;
    Ldw  = 0x13, Load;
    Stw  = 0x14, Store;
    Ldb  = 0x15, Load;
    Stb  = 0x16, Store;
    Sys  = 0x17, None;
    Nop  = 0x18, None;
}

impl Opcode {
    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        Opcode::ALL.iter().copied().find(|op| op.mnemonic().eq_ignore_ascii_case(s))
    }

    fn uses(self) -> (bool, bool, bool, bool) {
        // (rd, rs1, rs2, imm)
        match self.form() {
            Form::None => (false, false, false, false),
            Form::RdImm => (true, false, false, true),
            Form::RdRs => (true, true, false, false),
            Form::RdRsRs => (true, true, true, false),
            Form::RdRsImm => (true, true, false, true),
            Form::RsRs => (false, true, true, false),
            Form::RsImm => (false, true, false, true),
            Form::Imm => (false, false, false, true),
            Form::Rs => (false, true, false, false),
            Form::Rd => (true, false, false, false),
            Form::Load => (true, true, false, true),
            Form::Store => (false, true, true, true),
        }
    }
}

/// A decoded instruction. Unused fields are zero (`Reg(0)`, `imm = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Op { opcode: Opcode, rd: Reg, rs1: Reg, rs2: Reg, imm: u32 },
    Invalid([u8; 8]),
}

impl Instruction {
    /// Builds a canonical instruction, zeroing fields `opcode` does not use.
    pub fn new(opcode: Opcode, rd: Reg, rs1: Reg, rs2: Reg, imm: u32) -> Self {
        let (urd, urs1, urs2, uimm) = opcode.uses();
        let z = Reg(0);
        Instruction::Op {
            opcode,
            rd: if urd { rd } else { z },
            rs1: if urs1 { rs1 } else { z },
            rs2: if urs2 { rs2 } else { z },
            imm: if uimm { imm } else { 0 },
        }
    }

    pub fn encode(&self) -> [u8; 8] {
        match *self {
            Instruction::Op { opcode, rd, rs1, rs2, imm } => {
                let i = imm.to_le_bytes();
                [opcode as u8, rd.0, rs1.0, rs2.0, i[0], i[1], i[2], i[3]]
            }
            Instruction::Invalid(raw) => raw,
        }
    }

    /// Total over 8-byte blocks.
    pub fn decode(raw: [u8; 8]) -> Instruction {
        let Some(opcode) = Opcode::from_byte(raw[0]) else {
            return Instruction::Invalid(raw);
        };
        let imm = u32::from_le_bytes([raw[4], raw[5], raw[6], raw[7]]);
        let (urd, urs1, urs2, uimm) = opcode.uses();
        let field_ok = |used: bool, b: u8| if used { (b as usize) < NREGS } else { b == 0 };
        if !field_ok(urd, raw[1]) || !field_ok(urs1, raw[2]) || !field_ok(urs2, raw[3]) || (!uimm && imm != 0) {
            return Instruction::Invalid(raw);
        }
        Instruction::Op { opcode, rd: Reg(raw[1]), rs1: Reg(raw[2]), rs2: Reg(raw[3]), imm }
    }
}

fn fmt_offset(f: &mut fmt::Formatter<'_>, base: Reg, imm: u32) -> fmt::Result {
    let signed = imm as i32;
    if signed < 0 {
        write!(f, "[{base}-{:#x}]", signed.unsigned_abs())
    } else {
        write!(f, "[{base}+{imm:#x}]")
    }
}

/// Assembler syntax; the assembler parses exactly what this prints.
impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Instruction::Op { opcode, rd, rs1, rs2, imm } = *self else {
            let raw = self.encode();
            let lo = u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]);
            let hi = u32::from_le_bytes([raw[4], raw[5], raw[6], raw[7]]);
            return write!(f, ".word {lo:#x}, {hi:#x}");
        };
        let m = opcode.mnemonic().to_ascii_uppercase();
        match opcode.form() {
            Form::None => write!(f, "{m}"),
            Form::RdImm => write!(f, "{m} {rd}, {imm:#x}"),
            Form::RdRs => write!(f, "{m} {rd}, {rs1}"),
            Form::RdRsRs => write!(f, "{m} {rd}, {rs1}, {rs2}"),
            Form::RdRsImm => write!(f, "{m} {rd}, {rs1}, {imm:#x}"),
            Form::RsRs => write!(f, "{m} {rs1}, {rs2}"),
            Form::RsImm => write!(f, "{m} {rs1}, {imm:#x}"),
            Form::Imm => write!(f, "{m} {imm:#x}"),
            Form::Rs => write!(f, "{m} {rs1}"),
            Form::Rd => write!(f, "{m} {rd}"),
            Form::Load => {
                write!(f, "{m} {rd}, ")?;
                fmt_offset(f, rs1, imm)
            }
            Form::Store => {
                write!(f, "{m} ")?;
                fmt_offset(f, rs1, imm)?;
                write!(f, ", {rs2}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn movi_encoding() {
        let i = Instruction::new(Opcode::Movi, Reg(0), Reg(0), Reg(0), 1);
        assert_eq!(i.encode(), [0x01, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(i.to_string(), "MOVI r0, 0x1");
    }

    #[test]
    fn zero_block_is_invalid() {
        let i = Instruction::decode([0; 8]);
        assert_eq!(i, Instruction::Invalid([0; 8]));
        assert_eq!(i.to_string(), ".word 0x0, 0x0");
    }

    #[test]
    fn non_canonical_fields_are_invalid() {
        // RET with a stray register byte
        assert!(matches!(Instruction::decode([0x12, 1, 0, 0, 0, 0, 0, 0]), Instruction::Invalid(_)));
        // MOV with rs1 = 8
        assert!(matches!(Instruction::decode([0x02, 1, 8, 0, 0, 0, 0, 0]), Instruction::Invalid(_)));
        // CMP with an immediate
        assert!(matches!(Instruction::decode([0x09, 0, 1, 2, 1, 0, 0, 0]), Instruction::Invalid(_)));
    }

    #[test]
    fn decode_encode_roundtrip_on_every_opcode() {
        for &op in Opcode::ALL {
            let i = Instruction::new(op, Reg(3), Reg(4), Reg(5), 0xDEAD_BEEF);
            assert_eq!(Instruction::decode(i.encode()), i, "{op:?}");
            assert_eq!(Opcode::from_mnemonic(op.mnemonic()), Some(op));
        }
    }

    #[test]
    fn load_store_syntax() {
        let l = Instruction::new(Opcode::Ldw, Reg(1), Reg(7), Reg(0), (-4i32) as u32);
        assert_eq!(l.to_string(), "LDW r1, [r7-0x4]");
        let s = Instruction::new(Opcode::Stb, Reg(0), Reg(2), Reg(3), 0x10);
        assert_eq!(s.to_string(), "STB [r2+0x10], r3");
    }
}
