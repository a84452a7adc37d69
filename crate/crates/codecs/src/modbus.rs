//! Modbus TCP Read Device Identification probe and MBAP validation.

use crate::{Reason, ValidationVerdict};

const TRANSACTION_ID: u16 = 0x0001;
const FUNC_ENCAPSULATED: u8 = 0x2B;
const MEI_DEVICE_ID: u8 = 0x0E;

/// Read Device Identification (function 0x2B, MEI type 0x0E), basic
/// category, starting at object 0. Purely informational, never a coil or
/// register access.
pub fn read_device_identification() -> Vec<u8> {
    let pdu = [FUNC_ENCAPSULATED, MEI_DEVICE_ID, 0x01, 0x00];
    let mut frame = Vec::with_capacity(7 + pdu.len());
    frame.extend_from_slice(&TRANSACTION_ID.to_be_bytes());
    frame.extend_from_slice(&0u16.to_be_bytes()); // protocol id
    frame.extend_from_slice(&((1 + pdu.len()) as u16).to_be_bytes());
    frame.push(0xFF); // unit id for TCP-only devices
    frame.extend_from_slice(&pdu);
    frame
}

/// The response must echo our transaction and function (or its exception
/// form 0xAB); exceptions still prove a Modbus stack and record the code.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes.len() < 8 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let transaction = u16::from_be_bytes([bytes[0], bytes[1]]);
    let protocol = u16::from_be_bytes([bytes[2], bytes[3]]);
    let length = u16::from_be_bytes([bytes[4], bytes[5]]) as usize;
    if protocol != 0 {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    if length < 2 || 6 + length > bytes.len() {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    if transaction != TRANSACTION_ID {
        return ValidationVerdict::invalid(Reason::Unparsable);
    }
    let function = bytes[7];
    match function {
        FUNC_ENCAPSULATED => {
            if bytes.len() < 9 || bytes[8] != MEI_DEVICE_ID {
                return ValidationVerdict::invalid(Reason::Unparsable);
            }
            ValidationVerdict::ok(Some("modbus:device_id".to_string()))
        }
        f if f == FUNC_ENCAPSULATED | 0x80 => {
            if bytes.len() < 9 {
                return ValidationVerdict::invalid(Reason::BadLengthField);
            }
            ValidationVerdict::ok(Some(format!("modbus_exception:{}", bytes[8])))
        }
        _ => ValidationVerdict::invalid(Reason::Unparsable),
    }
}

pub fn reparse_request(bytes: &[u8]) -> bool {
    bytes == read_device_identification()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_matches_golden_bytes() {
        let expected = [
            0x00, 0x01, 0x00, 0x00, 0x00, 0x05, 0xFF, 0x2B, 0x0E, 0x01, 0x00,
        ];
        assert_eq!(read_device_identification(), expected);
    }

    #[test]
    fn device_id_response_is_valid() {
        // Minimal conformity-level response.
        let frame = [
            0x00, 0x01, 0x00, 0x00, 0x00, 0x08, 0xFF, 0x2B, 0x0E, 0x01, 0x01, 0x00, 0x00,
            0x00,
        ];
        let verdict = validate(&frame);
        assert!(verdict.valid);
        assert_eq!(verdict.detail.as_deref(), Some("modbus:device_id"));
    }

    #[test]
    fn exception_response_is_valid_with_code() {
        let frame = [0x00, 0x01, 0x00, 0x00, 0x00, 0x03, 0xFF, 0xAB, 0x01];
        let verdict = validate(&frame);
        assert!(verdict.valid);
        assert_eq!(verdict.detail.as_deref(), Some("modbus_exception:1"));
    }

    #[test]
    fn wrong_transaction_id_is_rejected() {
        let frame = [0x00, 0x02, 0x00, 0x00, 0x00, 0x03, 0xFF, 0xAB, 0x01];
        assert_eq!(validate(&frame).reason, Reason::Unparsable);
    }

    #[test]
    fn length_field_mismatch_is_rejected() {
        let frame = [0x00, 0x01, 0x00, 0x00, 0x00, 0x20, 0xFF, 0xAB, 0x01];
        assert_eq!(validate(&frame).reason, Reason::BadLengthField);
    }

    #[test]
    fn different_function_echo_is_implausible() {
        let frame = [0x00, 0x01, 0x00, 0x00, 0x00, 0x03, 0xFF, 0x03, 0x00];
        assert_eq!(validate(&frame).reason, Reason::Unparsable);
    }
}
