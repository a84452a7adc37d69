//! DNP3 data-link layer probe (request link status) and frame validation.

use crate::{Reason, ValidationVerdict};

const START: [u8; 2] = [0x05, 0x64];

/// Control octet of the probe: DIR=1, PRM=1, function 9 (request link
/// status). Carries no application-layer fragment at all.
const CTRL_REQUEST_LINK_STATUS: u8 = 0xC9;

const DESTINATION: u16 = 0x0001;
const SOURCE: u16 = 0x0000;

/// Header-only frame: 05 64, length 5, control, destination, source, CRC.
pub fn link_status_request() -> Vec<u8> {
    let mut frame = vec![START[0], START[1], 0x05, CTRL_REQUEST_LINK_STATUS];
    frame.extend_from_slice(&DESTINATION.to_le_bytes());
    frame.extend_from_slice(&SOURCE.to_le_bytes());
    let crc = crc16_dnp(&frame);
    frame.extend_from_slice(&crc.to_le_bytes());
    frame
}

/// Accepts secondary-station replies (PRM=0): link status, ACK/NACK, or
/// not-supported. The header CRC must verify; a primary frame is not a
/// plausible reply to a primary request.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes.len() < 2 || bytes[0..2] != START {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    if bytes.len() < 10 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let length = bytes[2] as usize;
    if length < 5 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let announced = frame_size(length);
    if bytes.len() < announced {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let header_crc = u16::from_le_bytes([bytes[8], bytes[9]]);
    if crc16_dnp(&bytes[0..8]) != header_crc {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    let control = bytes[3];
    let primary = control & 0x40 != 0;
    if primary {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    let function = control & 0x0F;
    match function {
        0x0B => ValidationVerdict::ok(Some("dnp3:link_status".to_string())),
        0x00 | 0x01 => ValidationVerdict::ok(Some(format!("dnp3:ack:{function}"))),
        0x0E | 0x0F => ValidationVerdict::ok(Some(format!("dnp3:not_supported:{function}"))),
        _ => ValidationVerdict::invalid(Reason::Unparsable),
    }
}

/// Total octets on the wire for a frame with the given length field: header
/// block (10) plus user data in 16-byte blocks, each with its own CRC.
fn frame_size(length_field: usize) -> usize {
    let user_data = length_field - 5;
    let blocks = user_data.div_ceil(16);
    10 + user_data + 2 * blocks
}

pub fn reparse_request(bytes: &[u8]) -> bool {
    bytes == link_status_request()
}

/// CRC-16/DNP: reflected polynomial 0x3D65, zero initial value, final
/// complement, transmitted least-significant byte first.
pub fn crc16_dnp(data: &[u8]) -> u16 {
    let mut crc: u16 = 0;
    for &byte in data {
        crc ^= byte as u16;
        for _ in 0..8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0xA6BC
            } else {
                crc >> 1
            };
        }
    }
    !crc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crc_matches_published_check_value() {
        // Standard CRC catalog check input "123456789" → 0xEA82.
        assert_eq!(crc16_dnp(b"123456789"), 0xEA82);
    }

    #[test]
    fn probe_has_valid_crc_and_length() {
        let frame = link_status_request();
        assert_eq!(frame.len(), 10);
        assert_eq!(&frame[0..2], &START);
        assert_eq!(frame[2], 5);
        let crc = u16::from_le_bytes([frame[8], frame[9]]);
        assert_eq!(crc16_dnp(&frame[0..8]), crc);
    }

    fn secondary_frame(control: u8) -> Vec<u8> {
        let mut frame = vec![START[0], START[1], 0x05, control];
        frame.extend_from_slice(&SOURCE.to_le_bytes());
        frame.extend_from_slice(&DESTINATION.to_le_bytes());
        let crc = crc16_dnp(&frame);
        frame.extend_from_slice(&crc.to_le_bytes());
        frame
    }

    #[test]
    fn link_status_reply_is_valid() {
        let verdict = validate(&secondary_frame(0x0B));
        assert!(verdict.valid);
        assert_eq!(verdict.detail.as_deref(), Some("dnp3:link_status"));
    }

    #[test]
    fn ack_reply_is_valid() {
        assert!(validate(&secondary_frame(0x00)).valid);
    }

    #[test]
    fn corrupted_crc_is_rejected() {
        let mut frame = secondary_frame(0x0B);
        frame[8] ^= 0xFF;
        assert_eq!(validate(&frame).reason, Reason::Unparsable);
    }

    #[test]
    fn primary_frame_is_not_a_reply() {
        let verdict = validate(&secondary_frame(0xC9));
        assert_eq!(verdict.reason, Reason::Unparsable);
    }

    #[test]
    fn short_buffer_is_length_error() {
        assert_eq!(validate(&[0x05, 0x64, 0x05]).reason, Reason::BadLengthField);
    }
}
