//! MQTT 3.1.1 CONNECT probe and CONNACK validation.

use crate::{Reason, ValidationVerdict};

/// Packet types by high nibble of the fixed header.
const PKT_CONNECT: u8 = 1;
const PKT_CONNACK: u8 = 2;

const PROTOCOL_NAME: &[u8] = b"MQTT";
const PROTOCOL_LEVEL: u8 = 4;
const CLIENT_ID: &[u8] = b"audit-probe";

/// CONNECT with protocol level 4, clean session, 60 s keep-alive, and a
/// fixed client identifier so probes are byte-identical across runs.
pub fn connect_probe() -> Vec<u8> {
    let mut variable = Vec::new();
    variable.extend_from_slice(&(PROTOCOL_NAME.len() as u16).to_be_bytes());
    variable.extend_from_slice(PROTOCOL_NAME);
    variable.push(PROTOCOL_LEVEL);
    variable.push(0x02); // clean session, no will, no credentials
    variable.extend_from_slice(&60u16.to_be_bytes());
    variable.extend_from_slice(&(CLIENT_ID.len() as u16).to_be_bytes());
    variable.extend_from_slice(CLIENT_ID);

    let mut packet = vec![PKT_CONNECT << 4];
    encode_remaining_length(&mut packet, variable.len());
    packet.extend_from_slice(&variable);
    packet
}

/// Accepts a CONNACK of any return code; the code is recorded because a
/// refusal still proves an MQTT broker is answering.
pub fn validate_connack(bytes: &[u8]) -> ValidationVerdict {
    if bytes[0] >> 4 != PKT_CONNACK || bytes[0] & 0x0F != 0 {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    let (remaining, header_len) = match decode_remaining_length(&bytes[1..]) {
        Some(v) => v,
        None => return ValidationVerdict::invalid(Reason::BadLengthField),
    };
    if remaining != 2 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let body = &bytes[1 + header_len..];
    if body.len() < 2 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let ack_flags = body[0];
    let return_code = body[1];
    if ack_flags & 0xFE != 0 {
        // Bits 7-1 of the acknowledge flags are reserved zero.
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    if return_code > 5 {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    ValidationVerdict::ok(Some(format!("connack:{return_code}")))
}

/// Request-direction grammar for our own CONNECT probe.
pub fn reparse_connect(bytes: &[u8]) -> bool {
    let Some(&first) = bytes.first() else {
        return false;
    };
    if first >> 4 != PKT_CONNECT || first & 0x0F != 0 {
        return false;
    }
    let Some((remaining, header_len)) = decode_remaining_length(&bytes[1..]) else {
        return false;
    };
    let body = &bytes[1 + header_len..];
    if body.len() != remaining {
        return false;
    }
    if body.len() < 10 || &body[0..2] != [0, 4] || &body[2..6] != PROTOCOL_NAME {
        return false;
    }
    body[6] == PROTOCOL_LEVEL
}

fn encode_remaining_length(out: &mut Vec<u8>, mut len: usize) {
    loop {
        let mut byte = (len % 128) as u8;
        len /= 128;
        if len > 0 {
            byte |= 0x80;
        }
        out.push(byte);
        if len == 0 {
            break;
        }
    }
}

/// Decodes the MQTT variable-length field, returning (value, bytes used).
fn decode_remaining_length(bytes: &[u8]) -> Option<(usize, usize)> {
    let mut value = 0usize;
    for (i, &byte) in bytes.iter().enumerate().take(4) {
        value |= ((byte & 0x7F) as usize) << (7 * i);
        if byte & 0x80 == 0 {
            return Some((value, i + 1));
        }
    }
    None
}
