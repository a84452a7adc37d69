//! AMQP 0-9-1 default-credential check.

use std::io::{Read, Write};

use crate::stream::{CountingReader, ReadStop};
use crate::{AccessStatus, AccessVerdict};

/// The stock account major brokers ship enabled out of the box.
const DEFAULT_USER: &str = "guest";
const DEFAULT_PASSWORD: &str = "guest";

const PROTOCOL_HEADER: [u8; 8] = [b'A', b'M', b'Q', b'P', 0, 0, 9, 1];
const FRAME_METHOD: u8 = 1;
const FRAME_END: u8 = 0xCE;
const CLASS_CONNECTION: u16 = 10;
const METHOD_START: u16 = 10;
const METHOD_START_OK: u16 = 11;
const METHOD_TUNE: u16 = 30;
const METHOD_CLOSE: u16 = 50;

/// Replies frames can be read into; anything bigger is not a sane greeting.
const MAX_FRAME: u64 = 1 << 20;

/// Checks whether the broker accepts the well-known default credential pair.
///
/// The flow stops at the earliest conclusive point: protocol header out,
/// `connection.start` in, `connection.start-ok` with a SASL PLAIN response
/// out, and then either `connection.tune` (credentials accepted; the
/// connection is dropped right here, no channel is ever opened) or
/// `connection.close` (credentials refused). Timeouts and connection drops
/// are indeterminate.
pub fn amqp_default_credentials<S: Read + Write>(stream: &mut S) -> AccessVerdict {
    if stream.write_all(&PROTOCOL_HEADER).is_err() || stream.flush().is_err() {
        return AccessVerdict::new(AccessStatus::Indeterminate, "write_failed", 0);
    }
    let mut reader = CountingReader::new(&mut *stream, MAX_FRAME);

    let greeting = match read_reply(&mut reader) {
        Ok(reply) => reply,
        Err(stop) => {
            let consumed = reader.consumed();
            return indeterminate(stop, "no_reply", consumed);
        }
    };
    match greeting {
        Reply::HeaderEcho => {
            return AccessVerdict::new(
                AccessStatus::Indeterminate,
                "amqp:version_negotiation",
                reader.consumed(),
            );
        }
        Reply::Method {
            class: CLASS_CONNECTION,
            method: METHOD_START,
            ..
        } => {}
        Reply::Method { class, method, .. } => {
            return AccessVerdict::new(
                AccessStatus::Indeterminate,
                format!("amqp:unexpected_frame:{class}.{method}"),
                reader.consumed(),
            );
        }
    }

    drop(reader);
    if stream.write_all(&start_ok_frame()).is_err() || stream.flush().is_err() {
        return AccessVerdict::new(AccessStatus::Indeterminate, "write_failed", 0);
    }
    let mut reader = CountingReader::new(&mut *stream, MAX_FRAME);

    match read_reply(&mut reader) {
        Ok(Reply::Method {
            class: CLASS_CONNECTION,
            method: METHOD_TUNE,
            ..
        }) => AccessVerdict::new(
            AccessStatus::DefaultCredentials,
            "amqp:connection.tune",
            reader.consumed(),
        ),
        Ok(Reply::Method {
            class: CLASS_CONNECTION,
            method: METHOD_CLOSE,
            ..
        }) => AccessVerdict::new(
            AccessStatus::Protected,
            "amqp:connection.close",
            reader.consumed(),
        ),
        Ok(Reply::Method { class, method, .. }) => AccessVerdict::new(
            AccessStatus::Indeterminate,
            format!("amqp:unexpected_frame:{class}.{method}"),
            reader.consumed(),
        ),
        Ok(Reply::HeaderEcho) => AccessVerdict::new(
            AccessStatus::Indeterminate,
            "amqp:version_negotiation",
            reader.consumed(),
        ),
        Err(stop) => {
            let consumed = reader.consumed();
            indeterminate(stop, "closed_before_reply", consumed)
        }
    }
}

enum Reply {
    /// The broker answered with a protocol header of its own, refusing our
    /// version instead of starting a connection.
    HeaderEcho,
    Method { class: u16, method: u16 },
}

fn indeterminate(stop: ReadStop, on_eof: &str, consumed: u64) -> AccessVerdict {
    let evidence = match stop {
        ReadStop::Timeout => "timeout",
        ReadStop::Eof => on_eof,
        ReadStop::BudgetExhausted => "oversized_reply",
    };
    AccessVerdict::new(AccessStatus::Indeterminate, evidence, consumed)
}

/// Reads one server reply: either an echoed protocol header or a method
/// frame on any channel. Malformed framing maps to EOF-style stops because
/// nothing further can be parsed from the stream.
fn read_reply<R: Read>(reader: &mut CountingReader<R>) -> Result<Reply, ReadStop> {
    let mut head = [0u8; 7];
    reader.read_exact_or_stop(&mut head)?;
    if &head[0..4] == b"AMQP" {
        let mut last = [0u8; 1];
        let _ = reader.read_exact_or_stop(&mut last);
        return Ok(Reply::HeaderEcho);
    }
    if head[0] != FRAME_METHOD {
        return Err(ReadStop::Eof);
    }
    let size = u32::from_be_bytes([head[3], head[4], head[5], head[6]]) as u64;
    if !(4..=MAX_FRAME).contains(&size) || size > reader.budget_left() {
        return Err(ReadStop::Eof);
    }
    let mut payload = vec![0u8; size as usize + 1];
    reader.read_exact_or_stop(&mut payload)?;
    if payload[size as usize] != FRAME_END {
        return Err(ReadStop::Eof);
    }
    Ok(Reply::Method {
        class: u16::from_be_bytes([payload[0], payload[1]]),
        method: u16::from_be_bytes([payload[2], payload[3]]),
    })
}

/// `connection.start-ok` selecting SASL PLAIN with the default credentials:
/// empty client-properties table, mechanism, response, locale.
fn start_ok_frame() -> Vec<u8> {
    let mut payload = Vec::new();
    payload.extend_from_slice(&CLASS_CONNECTION.to_be_bytes());
    payload.extend_from_slice(&METHOD_START_OK.to_be_bytes());
    payload.extend_from_slice(&0u32.to_be_bytes());
    payload.push(b"PLAIN".len() as u8);
    payload.extend_from_slice(b"PLAIN");
    let mut response = vec![0u8];
    response.extend_from_slice(DEFAULT_USER.as_bytes());
    response.push(0);
    response.extend_from_slice(DEFAULT_PASSWORD.as_bytes());
    payload.extend_from_slice(&(response.len() as u32).to_be_bytes());
    payload.extend_from_slice(&response);
    payload.push(b"en_US".len() as u8);
    payload.extend_from_slice(b"en_US");

    let mut frame = vec![FRAME_METHOD, 0, 0];
    frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    frame.extend_from_slice(&payload);
    frame.push(FRAME_END);
    frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::ScriptedStream;

    fn method_frame(class: u16, method: u16, extra: &[u8]) -> Vec<u8> {
        let mut payload = Vec::new();
        payload.extend_from_slice(&class.to_be_bytes());
        payload.extend_from_slice(&method.to_be_bytes());
        payload.extend_from_slice(extra);
        let mut frame = vec![FRAME_METHOD, 0, 0];
        frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
        frame.extend_from_slice(&payload);
        frame.push(FRAME_END);
        frame
    }

    fn start_then(reply: &[u8]) -> Vec<u8> {
        let mut script = method_frame(CLASS_CONNECTION, METHOD_START, &[0, 9, 0, 0, 0, 0]);
        script.extend_from_slice(reply);
        script
    }

    #[test]
    fn accepting_broker_reports_default_credentials() {
        let script = start_then(&method_frame(CLASS_CONNECTION, METHOD_TUNE, &[0; 6]));
        let mut peer = ScriptedStream::replies(&script);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::DefaultCredentials);
        assert_eq!(verdict.evidence, "amqp:connection.tune");
    }

    #[test]
    fn refusing_broker_reports_protected() {
        let script = start_then(&method_frame(CLASS_CONNECTION, METHOD_CLOSE, &[0x01, 0x93]));
        let mut peer = ScriptedStream::replies(&script);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::Protected);
        assert_eq!(verdict.evidence, "amqp:connection.close");
    }

    #[test]
    fn silence_is_indeterminate() {
        let mut peer = ScriptedStream::replies_then_silence(&[]);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "timeout");
    }

    #[test]
    fn no_reply_at_all_is_indeterminate() {
        let mut peer = ScriptedStream::replies(&[]);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "no_reply");
    }

    #[test]
    fn drop_after_credentials_is_indeterminate_not_protected() {
        let script = start_then(&[]);
        let mut peer = ScriptedStream::replies(&script);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "closed_before_reply");
    }

    #[test]
    fn version_negotiation_header_is_indeterminate() {
        let mut peer = ScriptedStream::replies(&[b'A', b'M', b'Q', b'P', 0, 1, 0, 0]);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "amqp:version_negotiation");
    }

    #[test]
    fn the_outbound_traffic_is_exactly_header_and_start_ok() {
        let script = start_then(&method_frame(CLASS_CONNECTION, METHOD_TUNE, &[0; 6]));
        let mut peer = ScriptedStream::replies(&script);
        amqp_default_credentials(&mut peer);

        let mut expected = PROTOCOL_HEADER.to_vec();
        expected.extend_from_slice(&start_ok_frame());
        assert_eq!(peer.written, expected);
    }

    #[test]
    fn start_ok_encodes_plain_guest_guest_on_channel_zero() {
        let frame = start_ok_frame();
        assert_eq!(frame[0], FRAME_METHOD);
        assert_eq!(&frame[1..3], &[0, 0]);
        assert_eq!(*frame.last().unwrap(), FRAME_END);
        let needle = b"\x00guest\x00guest";
        assert!(frame.windows(needle.len()).any(|w| w == needle));
        let mech = b"\x05PLAIN";
        assert!(frame.windows(mech.len()).any(|w| w == mech));
    }

    #[test]
    fn unexpected_first_frame_is_indeterminate() {
        let script = method_frame(20, 11, &[]);
        let mut peer = ScriptedStream::replies(&script);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "amqp:unexpected_frame:20.11");
    }

    #[test]
    fn garbage_greeting_is_indeterminate() {
        let mut peer = ScriptedStream::replies(&[9, 9, 9, 9, 9, 9, 9, 9, 9, 9]);
        let verdict = amqp_default_credentials(&mut peer);
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
    }
}
