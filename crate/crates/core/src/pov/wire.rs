// SPDX-License-Identifier: Apache-2.0

//! Negotiation messages exchanged on the negotiation channel.
//!
//! All fields are u32 little-endian:
//!
//! | message          | layout                                  |
//! |------------------|-----------------------------------------|
//! | type 1 request   | `1, ipmask, regmask, regnum`            |
//! | type 1 response  | `ipvalue, regvalue`                     |
//! | type 2 request   | `2`                                     |
//! | type 2 response  | `addr, size, length`                    |
//! | type 2 submission| `length` raw bytes                      |
//!
//! Responses and submissions carry no type tag, so decoding needs to know
//! which message is expected next.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Type1Request {
    pub ipmask: u32,
    pub regmask: u32,
    pub regnum: u32,
}

/// A completed type 1 negotiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Type1Negotiation {
    pub ipmask: u32,
    pub regmask: u32,
    pub regnum: u32,
    pub ipvalue: u32,
    pub regvalue: u32,
}

/// The secret region announced by type 2 negotiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Type2Negotiation {
    pub addr: u32,
    pub size: u32,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NegotiationMessage {
    Type1Request(Type1Request),
    Type1Response { ipvalue: u32, regvalue: u32 },
    Type2Request,
    Type2Response(Type2Negotiation),
    Type2Submission(Vec<u8>),
}

/// What the decoder should expect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    Request,
    Type1Response,
    Type2Response,
    Type2Submission,
}

impl NegotiationMessage {
    pub fn kind(&self) -> MessageKind {
        match self {
            Self::Type1Request(_) | Self::Type2Request => MessageKind::Request,
            Self::Type1Response { .. } => MessageKind::Type1Response,
            Self::Type2Response(_) => MessageKind::Type2Response,
            Self::Type2Submission(_) => MessageKind::Type2Submission,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("unknown negotiation type {0}")]
    BadType(u32),
    #[error("negotiation message too short: need {needed} bytes, got {got}")]
    ShortMessage { needed: usize, got: usize },
    #[error("negotiation message has {0} trailing bytes")]
    TrailingBytes(usize),
}

fn words(ws: &[u32]) -> Vec<u8> {
    ws.iter().flat_map(|w| w.to_le_bytes()).collect()
}

pub fn encode_negotiation(m: &NegotiationMessage) -> Vec<u8> {
    match m {
        NegotiationMessage::Type1Request(r) => words(&[1, r.ipmask, r.regmask, r.regnum]),
        NegotiationMessage::Type1Response { ipvalue, regvalue } => words(&[*ipvalue, *regvalue]),
        NegotiationMessage::Type2Request => words(&[2]),
        NegotiationMessage::Type2Response(n) => words(&[n.addr, n.size, n.length]),
        NegotiationMessage::Type2Submission(b) => b.clone(),
    }
}

fn read_words<const N: usize>(b: &[u8]) -> Result<[u32; N], WireError> {
    if b.len() < 4 * N {
        return Err(WireError::ShortMessage { needed: 4 * N, got: b.len() });
    }
    if b.len() > 4 * N {
        return Err(WireError::TrailingBytes(b.len() - 4 * N));
    }
    let mut out = [0; N];
    for (i, w) in out.iter_mut().enumerate() {
        *w = u32::from_le_bytes([b[4 * i], b[4 * i + 1], b[4 * i + 2], b[4 * i + 3]]);
    }
    Ok(out)
}

pub fn decode_negotiation(kind: MessageKind, b: &[u8]) -> Result<NegotiationMessage, WireError> {
    Ok(match kind {
        MessageKind::Request => {
            if b.len() < 4 {
                return Err(WireError::ShortMessage { needed: 4, got: b.len() });
            }
            match u32::from_le_bytes([b[0], b[1], b[2], b[3]]) {
                1 => {
                    let [_, ipmask, regmask, regnum] = read_words::<4>(b)?;
                    NegotiationMessage::Type1Request(Type1Request { ipmask, regmask, regnum })
                }
                2 => {
                    read_words::<1>(b)?;
                    NegotiationMessage::Type2Request
                }
                t => return Err(WireError::BadType(t)),
            }
        }
        MessageKind::Type1Response => {
            let [ipvalue, regvalue] = read_words::<2>(b)?;
            NegotiationMessage::Type1Response { ipvalue, regvalue }
        }
        MessageKind::Type2Response => {
            let [addr, size, length] = read_words::<3>(b)?;
            NegotiationMessage::Type2Response(Type2Negotiation { addr, size, length })
        }
        MessageKind::Type2Submission => NegotiationMessage::Type2Submission(b.to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn type1_request_layout() {
        let m = NegotiationMessage::Type1Request(Type1Request { ipmask: 0x7F7F_7F7F, regmask: 0x7F7F_7F7F, regnum: 5 });
        let b = encode_negotiation(&m);
        assert_eq!(b, vec![1, 0, 0, 0, 0x7f, 0x7f, 0x7f, 0x7f, 0x7f, 0x7f, 0x7f, 0x7f, 5, 0, 0, 0]);
        assert_eq!(decode_negotiation(MessageKind::Request, &b), Ok(m));
    }

    #[test]
    fn short_and_bad_messages() {
        assert_eq!(
            decode_negotiation(MessageKind::Request, &[1, 0, 0]),
            Err(WireError::ShortMessage { needed: 4, got: 3 })
        );
        assert_eq!(
            decode_negotiation(MessageKind::Request, &[1, 0, 0, 0, 1]),
            Err(WireError::ShortMessage { needed: 16, got: 5 })
        );
        assert_eq!(decode_negotiation(MessageKind::Request, &[3, 0, 0, 0]), Err(WireError::BadType(3)));
        assert_eq!(decode_negotiation(MessageKind::Request, &[2, 0, 0, 0, 0]), Err(WireError::TrailingBytes(1)));
        assert!(matches!(
            decode_negotiation(MessageKind::Type2Response, &[0; 11]),
            Err(WireError::ShortMessage { needed: 12, got: 11 })
        ));
    }

    pub(crate) fn arb_message() -> impl Strategy<Value = NegotiationMessage> {
        prop_oneof![
            (any::<u32>(), any::<u32>(), any::<u32>())
                .prop_map(|(ipmask, regmask, regnum)| NegotiationMessage::Type1Request(Type1Request { ipmask, regmask, regnum })),
            (any::<u32>(), any::<u32>()).prop_map(|(ipvalue, regvalue)| NegotiationMessage::Type1Response { ipvalue, regvalue }),
            Just(NegotiationMessage::Type2Request),
            (any::<u32>(), any::<u32>(), any::<u32>())
                .prop_map(|(addr, size, length)| NegotiationMessage::Type2Response(Type2Negotiation { addr, size, length })),
            prop::collection::vec(any::<u8>(), 0..64).prop_map(NegotiationMessage::Type2Submission),
        ]
    }

    proptest! {
        #[test]
        fn roundtrip(m in arb_message()) {
            prop_assert_eq!(decode_negotiation(m.kind(), &encode_negotiation(&m)), Ok(m));
        }
    }
}
