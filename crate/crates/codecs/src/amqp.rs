//! AMQP probe (0-9-1 and 1.0 protocol headers) and response validation.

use crate::{Reason, ValidationVerdict};

pub const HEADER_091: [u8; 8] = [b'A', b'M', b'Q', b'P', 0, 0, 9, 1];
pub const HEADER_10: [u8; 8] = [b'A', b'M', b'Q', b'P', 0, 1, 0, 0];

const FRAME_END: u8 = 0xCE;

/// Probe sequence: the 0-9-1 protocol header first, the 1.0 header as
/// fallback. Brokers answer a bare header either with their own protocol
/// header (version negotiation) or with the first connection frame.
pub fn probes() -> Vec<Vec<u8>> {
    vec![HEADER_091.to_vec(), HEADER_10.to_vec()]
}

/// Accepts a protocol header echo/downgrade, a 0-9-1 Connection.Start
/// frame, or an AMQP 1.0 frame on channel 0.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes.len() >= 8 && &bytes[0..4] == b"AMQP" {
        // Header responses announce the dialect the broker insists on.
        let dialect = if bytes[0..8] == HEADER_10 {
            "1.0"
        } else if bytes[0..8] == HEADER_091 {
            "0-9-1"
        } else {
            return ValidationVerdict::invalid(Reason::Unparsable);
        };
        return ValidationVerdict::ok(Some(format!("amqp_header:{dialect}")));
    }
    if bytes.len() >= 8 && bytes[0] == 1 && bytes[1] == 0 && bytes[2] == 0 {
        return validate_091_frame(bytes);
    }
    if bytes.len() >= 8 {
        return validate_10_frame(bytes);
    }
    ValidationVerdict::invalid(Reason::BadMagic)
}

/// 0-9-1 general frame: type(1) channel(2) size(4) payload size bytes, then
/// the 0xCE frame-end octet. The expected reply to our header is
/// Connection.Start, method class 10 method 10 on channel 0.
fn validate_091_frame(bytes: &[u8]) -> ValidationVerdict {
    let size = u32::from_be_bytes([bytes[3], bytes[4], bytes[5], bytes[6]]) as usize;
    let total = match size.checked_add(8) {
        Some(t) => t,
        None => return ValidationVerdict::invalid(Reason::BadLengthField),
    };
    if bytes.len() < total {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    if bytes[total - 1] != FRAME_END {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    let payload = &bytes[7..7 + size];
    if payload.len() < 4 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let class = u16::from_be_bytes([payload[0], payload[1]]);
    let method = u16::from_be_bytes([payload[2], payload[3]]);
    if class == 10 && method == 10 {
        return ValidationVerdict::ok(Some("amqp:connection.start".to_string()));
    }
    if class == 10 && method == 50 {
        // Connection.Close directly after our header refuses the session.
        return ValidationVerdict::invalid_with(
            Reason::ErrorResponse,
            "amqp:connection.close".to_string(),
        );
    }
    ValidationVerdict::invalid(Reason::Unparsable)
}

/// AMQP 1.0 frame: size(4, includes itself) doff(1, ≥ 2) type(1, 0=AMQP
/// 1=SASL) channel(2).
fn validate_10_frame(bytes: &[u8]) -> ValidationVerdict {
    let size = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    let doff = bytes[4] as usize;
    let frame_type = bytes[5];
    if size < 8 || size > bytes.len() {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    if doff < 2 || doff * 4 > size {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    match frame_type {
        0 => ValidationVerdict::ok(Some("amqp10:frame".to_string())),
        1 => ValidationVerdict::ok(Some("amqp10:sasl".to_string())),
        _ => ValidationVerdict::invalid(Reason::Unparsable),
    }
}

pub fn reparse_probe(bytes: &[u8]) -> bool {
    bytes == HEADER_091 || bytes == HEADER_10
}
