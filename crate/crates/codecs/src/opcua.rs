//! OPC UA binary transport Hello probe and ACK/ERR validation.

use crate::{Reason, ValidationVerdict};

const ENDPOINT_URL: &[u8] = b"opc.tcp://audit-probe";

/// HEL message: transport header, protocol version 0, 64 KiB buffers,
/// unlimited message/chunk counts, fixed endpoint URL.
pub fn hello_probe() -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&0u32.to_le_bytes()); // protocol version
    body.extend_from_slice(&65_536u32.to_le_bytes()); // receive buffer
    body.extend_from_slice(&65_536u32.to_le_bytes()); // send buffer
    body.extend_from_slice(&0u32.to_le_bytes()); // max message size
    body.extend_from_slice(&0u32.to_le_bytes()); // max chunk count
    body.extend_from_slice(&(ENDPOINT_URL.len() as u32).to_le_bytes());
    body.extend_from_slice(ENDPOINT_URL);

    let mut msg = Vec::with_capacity(8 + body.len());
    msg.extend_from_slice(b"HEL");
    msg.push(b'F');
    msg.extend_from_slice(&((8 + body.len()) as u32).to_le_bytes());
    msg.extend_from_slice(&body);
    msg
}

/// The HEL exchange ends at the server's ACK; an ERR message also proves an
/// OPC UA stack and records its status code.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes.len() < 8 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let msg_type = &bytes[0..3];
    if bytes[3] != b'F' {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    let size = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as usize;
    if size < 8 || size > bytes.len() {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    match msg_type {
        b"ACK" => {
            // Protocol version + four buffer/limit fields.
            if size != 28 {
                return ValidationVerdict::invalid(Reason::BadLengthField);
            }
            let version = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]);
            ValidationVerdict::ok(Some(format!("opcua_ack:v{version}")))
        }
        b"ERR" => {
            if size < 16 {
                return ValidationVerdict::invalid(Reason::BadLengthField);
            }
            let code = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]);
            ValidationVerdict::ok(Some(format!("opcua_err:0x{code:08X}")))
        }
        _ => ValidationVerdict::invalid(Reason::BadMagic),
    }
}

pub fn reparse_hello(bytes: &[u8]) -> bool {
    if bytes.len() < 32 || &bytes[0..3] != b"HEL" || bytes[3] != b'F' {
        return false;
    }
    let size = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as usize;
    if size != bytes.len() {
        return false;
    }
    let url_len =
        u32::from_le_bytes([bytes[28], bytes[29], bytes[30], bytes[31]]) as usize;
    32 + url_len == bytes.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ack() -> Vec<u8> {
        let mut msg = Vec::new();
        msg.extend_from_slice(b"ACKF");
        msg.extend_from_slice(&28u32.to_le_bytes());
        msg.extend_from_slice(&0u32.to_le_bytes());
        msg.extend_from_slice(&65_536u32.to_le_bytes());
        msg.extend_from_slice(&65_536u32.to_le_bytes());
        msg.extend_from_slice(&0u32.to_le_bytes());
        msg.extend_from_slice(&0u32.to_le_bytes());
        msg
    }

    #[test]
    fn ack_is_valid() {
        let verdict = validate(&ack());
        assert!(verdict.valid);
        assert_eq!(verdict.detail.as_deref(), Some("opcua_ack:v0"));
    }

    #[test]
    fn err_records_status_code() {
        let mut msg = Vec::new();
        msg.extend_from_slice(b"ERRF");
        msg.extend_from_slice(&16u32.to_le_bytes());
        msg.extend_from_slice(&0x8002_0000u32.to_le_bytes()); // BadTcpMessageTypeInvalid
        msg.extend_from_slice(&0u32.to_le_bytes()); // empty reason string
        let verdict = validate(&msg);
        assert!(verdict.valid);
        assert_eq!(verdict.detail.as_deref(), Some("opcua_err:0x80020000"));
    }

    #[test]
    fn size_field_longer_than_buffer_is_rejected() {
        let mut msg = ack();
        msg[4] = 200;
        assert_eq!(validate(&msg).reason, Reason::BadLengthField);
    }

    #[test]
    fn wrong_message_type_is_bad_magic() {
        let mut msg = ack();
        msg[0..3].copy_from_slice(b"MSG");
        assert_eq!(validate(&msg).reason, Reason::BadMagic);
    }

    #[test]
    fn hello_probe_reparses() {
        assert!(reparse_hello(&hello_probe()));
    }
}
