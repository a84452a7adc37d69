//! EtherNet/IP encapsulation probes (ListIdentity, RegisterSession) and
//! response validation.

use crate::{Reason, ValidationVerdict};

const CMD_LIST_IDENTITY: u16 = 0x0063;
const CMD_REGISTER_SESSION: u16 = 0x0065;

/// Eight bytes echoed verbatim by compliant stacks.
pub const SENDER_CONTEXT: [u8; 8] = *b"auditprb";

fn header(command: u16, length: u16) -> Vec<u8> {
    let mut hdr = Vec::with_capacity(24);
    hdr.extend_from_slice(&command.to_le_bytes());
    hdr.extend_from_slice(&length.to_le_bytes());
    hdr.extend_from_slice(&0u32.to_le_bytes()); // session handle
    hdr.extend_from_slice(&0u32.to_le_bytes()); // status
    hdr.extend_from_slice(&SENDER_CONTEXT);
    hdr.extend_from_slice(&0u32.to_le_bytes()); // options
    hdr
}

/// ListIdentity first; RegisterSession as fallback for stacks that only
/// answer session management.
pub fn probes() -> Vec<Vec<u8>> {
    let list_identity = header(CMD_LIST_IDENTITY, 0);
    let mut register = header(CMD_REGISTER_SESSION, 4);
    register.extend_from_slice(&1u16.to_le_bytes()); // protocol version
    register.extend_from_slice(&0u16.to_le_bytes()); // options flags
    vec![list_identity, register]
}

/// Checks command echo, sender-context echo, and that the encapsulation
/// length field matches the bytes on the wire. A nonzero status is still a
/// compliant reply and is recorded.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes.len() < 24 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let command = u16::from_le_bytes([bytes[0], bytes[1]]);
    let length = u16::from_le_bytes([bytes[2], bytes[3]]) as usize;
    let status = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]);
    if command != CMD_LIST_IDENTITY && command != CMD_REGISTER_SESSION {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    if 24 + length > bytes.len() {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    if bytes[12..20] != SENDER_CONTEXT {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    let detail = if status == 0 {
        format!("enip:0x{command:04X}")
    } else {
        format!("enip_status:0x{status:08X}")
    };
    ValidationVerdict::ok(Some(detail))
}

pub fn reparse_request(bytes: &[u8]) -> bool {
    if bytes.len() < 24 {
        return false;
    }
    let command = u16::from_le_bytes([bytes[0], bytes[1]]);
    let length = u16::from_le_bytes([bytes[2], bytes[3]]) as usize;
    (command == CMD_LIST_IDENTITY || command == CMD_REGISTER_SESSION)
        && bytes.len() == 24 + length
        && bytes[12..20] == SENDER_CONTEXT
}
