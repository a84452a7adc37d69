//! CoAP confirmable GET probe for `/.well-known/core` and response
//! validation.

use crate::{Reason, ValidationVerdict};

const TYPE_CON: u8 = 0;
const TYPE_NON: u8 = 1;
const TYPE_ACK: u8 = 2;
const TYPE_RST: u8 = 3;

const METHOD_GET: u8 = 0x01;
const OPTION_URI_PATH: u8 = 11;

/// Fixed message ID so probe bytes are identical across runs; responses are
/// matched against it.
pub const PROBE_MESSAGE_ID: u16 = 0x7D20;

/// CON GET /.well-known/core with an empty token.
pub fn get_wellknown_core() -> Vec<u8> {
    let mut msg = vec![
        0x40 | (TYPE_CON << 4), // version 1, CON, token length 0
        METHOD_GET,
    ];
    msg.extend_from_slice(&PROBE_MESSAGE_ID.to_be_bytes());
    // Uri-Path ".well-known": option delta 11, length 11.
    msg.push((OPTION_URI_PATH << 4) | 0x0B);
    msg.extend_from_slice(b".well-known");
    // Uri-Path "core": delta 0 (same option number), length 4.
    msg.push(0x04);
    msg.extend_from_slice(b"core");
    msg
}

/// Accepts piggybacked ACKs matching our message ID and separate CON/NON
/// responses; any response class (2.xx/4.xx/5.xx) proves a CoAP stack and
/// is recorded. An RST explicitly refuses the exchange.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes.len() < 4 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let version = bytes[0] >> 6;
    let msg_type = (bytes[0] >> 4) & 0x03;
    let token_len = (bytes[0] & 0x0F) as usize;
    if version != 1 {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    if token_len > 8 {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    let code = bytes[1];
    let message_id = u16::from_be_bytes([bytes[2], bytes[3]]);

    if msg_type == TYPE_RST {
        if message_id != PROBE_MESSAGE_ID {
            return ValidationVerdict::invalid(Reason::Unparsable);
        }
        return ValidationVerdict::invalid_with(Reason::ErrorResponse, "coap:rst".to_string());
    }
    if msg_type == TYPE_ACK && message_id != PROBE_MESSAGE_ID {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }

    let class = code >> 5;
    let empty_ack = msg_type == TYPE_ACK && code == 0;
    if !empty_ack && !matches!(class, 2 | 4 | 5) {
        // A response must carry a response code; our probe was a request,
        // so another request code is not a plausible reply.
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    if bytes.len() < 4 + token_len {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    if msg_type == TYPE_ACK && token_len != 0 {
        // Piggybacked responses echo the request token, which we sent empty.
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    if !options_parse(&bytes[4 + token_len..]) {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    let detail = format!("coap:{}.{:02}", class, code & 0x1F);
    ValidationVerdict::ok(Some(detail))
}

/// Walks the option list up to the payload marker, checking that extended
/// deltas/lengths and option values stay inside the buffer.
fn options_parse(mut rest: &[u8]) -> bool {
    while let Some(&head) = rest.first() {
        if head == 0xFF {
            // Payload marker must be followed by at least one payload byte.
            return rest.len() > 1;
        }
        rest = &rest[1..];
        let mut delta = (head >> 4) as usize;
        let mut len = (head & 0x0F) as usize;
        for part in [&mut delta, &mut len] {
            match *part {
                13 => {
                    let Some((&ext, tail)) = rest.split_first() else {
                        return false;
                    };
                    *part = ext as usize + 13;
                    rest = tail;
                }
                14 => {
                    if rest.len() < 2 {
                        return false;
                    }
                    *part = u16::from_be_bytes([rest[0], rest[1]]) as usize + 269;
                    rest = &rest[2..];
                }
                15 => return false, // reserved
                _ => {}
            }
        }
        if rest.len() < len {
            return false;
        }
        rest = &rest[len..];
    }
    true
}

pub fn reparse_get(bytes: &[u8]) -> bool {
    if bytes.len() < 4 {
        return false;
    }
    let version = bytes[0] >> 6;
    let msg_type = (bytes[0] >> 4) & 0x03;
    let token_len = (bytes[0] & 0x0F) as usize;
    version == 1
        && matches!(msg_type, TYPE_CON | TYPE_NON)
        && token_len <= 8
        && bytes[1] == METHOD_GET
        && bytes.len() >= 4 + token_len
        && options_parse(&bytes[4 + token_len..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_matches_golden_bytes() {
        let expected: &[u8] = &[
            0x40, 0x01, 0x7D, 0x20, 0xBB, b'.', b'w', b'e', b'l', b'l', b'-', b'k', b'n',
            b'o', b'w', b'n', 0x04, b'c', b'o', b'r', b'e',
        ];
        assert_eq!(get_wellknown_core(), expected);
    }

    #[test]
    fn piggybacked_content_response_is_valid() {
        // ACK, code 2.05 Content, matching message ID, payload "x".
        let msg = [0x60, 0x45, 0x7D, 0x20, 0xFF, b'x'];
        let verdict = validate(&msg);
        assert!(verdict.valid);
        assert_eq!(verdict.detail.as_deref(), Some("coap:2.05"));
    }

    #[test]
    fn not_found_still_proves_coap() {
        // 4.04 = code 0x84.
        let msg = [0x60, 0x84, 0x7D, 0x20];
        let verdict = validate(&msg);
        assert!(verdict.valid);
        assert_eq!(verdict.detail.as_deref(), Some("coap:4.04"));
    }

    #[test]
    fn ack_with_wrong_message_id_is_rejected() {
        let msg = [0x60, 0x45, 0x00, 0x01];
        assert!(!validate(&msg).valid);
    }

    #[test]
    fn reset_is_error_response() {
        let msg = [0x70, 0x00, 0x7D, 0x20];
        let verdict = validate(&msg);
        assert!(!verdict.valid);
        assert_eq!(verdict.reason, Reason::ErrorResponse);
    }

    #[test]
    fn payload_marker_without_payload_is_invalid() {
        let msg = [0x60, 0x45, 0x7D, 0x20, 0xFF];
        assert_eq!(validate(&msg).reason, Reason::Unparsable);
    }

    #[test]
    fn request_code_is_not_a_plausible_response() {
        // A GET (0.01) coming back is a request, not a response.
        let msg = [0x50, 0x01, 0x12, 0x34];
        assert!(!validate(&msg).valid);
    }
}
