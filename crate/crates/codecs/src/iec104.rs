//! IEC 60870-5-104 STARTDT probe and APCI validation.

use crate::{Reason, ValidationVerdict};

const START_BYTE: u8 = 0x68;

const STARTDT_ACT: u8 = 0x07;
const STARTDT_CON: u8 = 0x0B;
const TESTFR_ACT: u8 = 0x43;
const TESTFR_CON: u8 = 0x83;

/// STARTDT act U-frame: 68 04 07 00 00 00.
pub fn startdt_act() -> Vec<u8> {
    vec![START_BYTE, 0x04, STARTDT_ACT, 0x00, 0x00, 0x00]
}

/// A compliant peer confirms STARTDT before sending anything else; TESTFR
/// frames are accepted too since some stacks probe the link first.
pub fn validate(bytes: &[u8]) -> ValidationVerdict {
    if bytes[0] != START_BYTE {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    if bytes.len() < 2 {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let apdu_len = bytes[1] as usize;
    if apdu_len < 4 || bytes.len() < 2 + apdu_len {
        return ValidationVerdict::invalid(Reason::BadLengthField);
    }
    let control = &bytes[2..6];
    match control[0] {
        STARTDT_CON if control[1..4] == [0, 0, 0] && apdu_len == 4 => {
            ValidationVerdict::ok(Some("iec104:startdt_con".to_string()))
        }
        TESTFR_ACT | TESTFR_CON if control[1..4] == [0, 0, 0] && apdu_len == 4 => {
            ValidationVerdict::ok(Some("iec104:testfr".to_string()))
        }
        _ => ValidationVerdict::invalid(Reason::Unparsable),
    }
}

pub fn reparse_startdt(bytes: &[u8]) -> bool {
    bytes == startdt_act()
}
