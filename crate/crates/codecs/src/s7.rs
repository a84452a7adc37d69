//! S7 transport probe: COTP connection request over TPKT, validated up to
//! the COTP Connection Confirm.

use crate::{Reason, ValidationVerdict};

const TPKT_VERSION: u8 = 0x03;

const COTP_CONNECTION_REQUEST: u8 = 0xE0;
const COTP_CONNECTION_CONFIRM: u8 = 0xD0;
const COTP_DISCONNECT_REQUEST: u8 = 0x80;
const COTP_ERROR: u8 = 0x70;

/// TPKT + COTP CR with the TSAP pair S7 equipment expects (rack/slot
/// addressing 01.00 → 01.02) and a 1024-byte TPDU size proposal.
pub fn cotp_connection_request() -> Vec<u8> {
    let cotp: [u8; 18] = [
        0x11, // length indicator: 17 octets follow
        COTP_CONNECTION_REQUEST,
        0x00, 0x00, // destination reference
        0x00, 0x01, // source reference
        0x00, // class 0
        0xC0, 0x01, 0x0A, // TPDU size 1024
        0xC1, 0x02, 0x01, 0x00, // source TSAP
        0xC2, 0x02, 0x01, 0x02, // destination TSAP
    ];
    let mut frame = vec![TPKT_VERSION, 0x00];
    frame.extend_from_slice(&((4 + cotp.len()) as u16).to_be_bytes());
    frame.extend_from_slice(&cotp);
    frame
}

/// Connection Confirm completes the probe; Disconnect Request or COTP
/// error refuse it explicitly.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes[0] != TPKT_VERSION {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    if bytes.len() < 7 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    if bytes[1] != 0x00 {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    let tpkt_len = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
    if tpkt_len < 7 || tpkt_len > bytes.len() {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let li = bytes[4] as usize;
    if 5 + li > tpkt_len {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    match bytes[5] & 0xF0 {
        x if x == COTP_CONNECTION_CONFIRM => {
            ValidationVerdict::ok(Some("cotp:connection_confirm".to_string()))
        }
        x if x == COTP_DISCONNECT_REQUEST => ValidationVerdict::invalid_with(
            Reason::ErrorResponse,
            "cotp:disconnect_request".to_string(),
        ),
        x if x == COTP_ERROR => {
            ValidationVerdict::invalid_with(Reason::ErrorResponse, "cotp:error".to_string())
        }
        _ => ValidationVerdict::invalid(Reason::Unparsable),
    }
}

pub fn reparse_request(bytes: &[u8]) -> bool {
    bytes == cotp_connection_request()
}
