// SPDX-License-Identifier: Apache-2.0

//! The range server's protocol and judging logic: frames, negotiation,
//! verdicts and the per-connection [`Session`] machine. Transport lives in
//! the `pandora` crate.

pub mod frame;
pub mod judge;
pub mod session;
pub mod verdict;

pub use frame::{decode_frame, encode_frame, Channel, Frame, FrameDecoder, FrameError, MAX_FRAME_PAYLOAD};
pub use judge::{
    format_verdict_report, judge_type1, judge_type2, negotiate_type1, negotiate_type2, NegotiationRejected,
    DEFAULT_MASK_FLOOR,
};
pub use session::{run_scripted_session, secret_page, Session, SessionConfig, SessionSeeds};
pub use verdict::{decode_verdict, encode_verdict, NegotiationEcho, Success, Verdict, VerdictError, VmEnd};
