//! Probe construction and response validation for the audited protocols.
//!
//! Each protocol module builds a canonical read-only probe (session setup or
//! an informational read, never a write or function execution) and validates
//! raw response bytes against the protocol grammar: magic bytes, length
//! fields consistent with the buffer, and a response type that is plausible
//! for the probe that was sent. Protocol-level error replies such as an MQTT
//! CONNACK with a nonzero return code still count as valid responses - they
//! prove the protocol is spoken - and the code is recorded on the verdict.
//!
//! All validators operate on plain byte slices and never index past the
//! supplied buffer, so they are safe to run against arbitrary garbage.

use audit_catalog::Protocol;
use serde::{Deserialize, Serialize};

mod amqp;
mod coap;
mod dnp3;
mod enip;
mod fox;
mod iec104;
mod modbus;
mod mqtt;
mod opcua;
mod s7;

/// Why a response was or was not accepted as protocol-compliant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// Response parses and is plausible for the probe.
    Ok,
    /// Structure violates the protocol grammar (bad framing, CRC, or an
    /// implausible response type).
    Unparsable,
    /// A length field disagrees with the bytes actually present.
    BadLengthField,
    /// Magic or start bytes are wrong.
    BadMagic,
    /// Well-formed frame that explicitly refuses the session itself.
    ErrorResponse,
    /// No bytes were received at all.
    Empty,
}

/// Outcome of validating a response buffer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub valid: bool,
    pub reason: Reason,
    /// Protocol-level status recorded for valid responses, such as
    /// `connack:0`, `http:401`, or `coap:4.04`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ValidationVerdict {
    /// A valid response, optionally carrying a protocol-level code.
    pub fn ok(detail: Option<String>) -> ValidationVerdict {
        ValidationVerdict {
            valid: true,
            reason: Reason::Ok,
            detail,
        }
    }

    /// An invalid response; `reason` must not be [`Reason::Ok`].
    pub fn invalid(reason: Reason) -> ValidationVerdict {
        debug_assert!(reason != Reason::Ok);
        ValidationVerdict {
            valid: false,
            reason,
            detail: None,
        }
    }

    fn invalid_with(reason: Reason, detail: String) -> ValidationVerdict {
        debug_assert!(reason != Reason::Ok);
        ValidationVerdict {
            valid: false,
            reason,
            detail: Some(detail),
        }
    }
}

/// One outbound probe message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeMessage {
    pub protocol: Protocol,
    pub payload: Vec<u8>,
    pub expects_reply: bool,
}

/// Builds the canonical probe for a protocol.
///
/// Protocols with several dialects (AMQP 0-9-1 vs 1.0, EtherNet/IP
/// ListIdentity vs RegisterSession) expose their fallbacks through
/// [`build_probes`]; this returns the primary dialect only.
pub fn build_probe(protocol: Protocol) -> ProbeMessage {
    build_probes(protocol)
        .into_iter()
        .next()
        .expect("every protocol has at least one probe")
}

/// Builds the probe sequence for a protocol, primary dialect first.
///
/// Callers try later entries only when the previous one drew no valid
/// response.
pub fn build_probes(protocol: Protocol) -> Vec<ProbeMessage> {
    let payloads: Vec<Vec<u8>> = match protocol {
        Protocol::Mqtt => vec![mqtt::connect_probe()],
        Protocol::Amqp => amqp::probes(),
        Protocol::CoAP => vec![coap::get_wellknown_core()],
        Protocol::OpcUa => vec![opcua::hello_probe()],
        Protocol::Iec104 => vec![iec104::startdt_act()],
        Protocol::Modbus => vec![modbus::read_device_identification()],
        Protocol::EtherNetIP => enip::probes(),
        Protocol::Dnp3 => vec![dnp3::link_status_request()],
        Protocol::S7 => vec![s7::cotp_connection_request()],
        Protocol::TridiumFox => vec![fox::hello_frame()],
        Protocol::FoxPlatform => vec![fox::platform_http_get()],
    };
    payloads
        .into_iter()
        .map(|payload| ProbeMessage {
            protocol,
            payload,
            expects_reply: true,
        })
        .collect()
}

/// Validates a response buffer against the protocol grammar.
pub fn validate_response(protocol: Protocol, bytes: &[u8]) -> ValidationVerdict {
    if bytes.is_empty() {
        return ValidationVerdict::invalid(Reason::Empty);
    }
    match protocol {
        Protocol::Mqtt => mqtt::validate_connack(bytes),
        Protocol::Amqp => amqp::validate(bytes),
        Protocol::CoAP => coap::validate(bytes),
        Protocol::OpcUa => opcua::validate(bytes),
        Protocol::Iec104 => iec104::validate(bytes),
        Protocol::Modbus => modbus::validate(bytes),
        Protocol::EtherNetIP => enip::validate(bytes),
        Protocol::Dnp3 => dnp3::validate(bytes),
        Protocol::S7 => s7::validate(bytes),
        Protocol::TridiumFox => fox::validate_fox(bytes),
        Protocol::FoxPlatform => fox::validate_http(bytes),
    }
}

/// Re-parses one of our own probe payloads under the request-direction
/// grammar. Used to prove that every probe we emit is itself well-formed.
pub fn reparse_probe(protocol: Protocol, bytes: &[u8]) -> bool {
    match protocol {
        Protocol::Mqtt => mqtt::reparse_connect(bytes),
        Protocol::Amqp => amqp::reparse_probe(bytes),
        Protocol::CoAP => coap::reparse_get(bytes),
        Protocol::OpcUa => opcua::reparse_hello(bytes),
        Protocol::Iec104 => iec104::reparse_startdt(bytes),
        Protocol::Modbus => modbus::reparse_request(bytes),
        Protocol::EtherNetIP => enip::reparse_request(bytes),
        Protocol::Dnp3 => dnp3::reparse_request(bytes),
        Protocol::S7 => s7::reparse_request(bytes),
        Protocol::TridiumFox => fox::reparse_fox(bytes),
        Protocol::FoxPlatform => fox::reparse_http(bytes),
    }
}

/// Function codes / opcodes a probe payload may carry, per protocol.
///
/// The allowlist backs the read-only guarantee: a probe never encodes a
/// write or execute operation.
pub fn probe_is_read_only(msg: &ProbeMessage) -> bool {
    match msg.protocol {
        // CONNECT only; PUBLISH (0x3?) must never appear as packet type.
        Protocol::Mqtt => msg.payload.first().map(|b| b >> 4) == Some(1),
        // Bare protocol headers carry no operation at all.
        Protocol::Amqp => msg.payload.starts_with(b"AMQP"),
        // GET (0.01) is the only allowed method code.
        Protocol::CoAP => msg.payload.get(1) == Some(&0x01),
        // HEL message carries no service call.
        Protocol::OpcUa => msg.payload.starts_with(b"HEL"),
        // STARTDT act is a session-control frame, not a command.
        Protocol::Iec104 => msg.payload.get(2) == Some(&0x07),
        // 0x2B/0x0E Read Device Identification; write functions are
        // 0x05/0x06/0x0F/0x10/0x15/0x16.
        Protocol::Modbus => {
            msg.payload.get(7) == Some(&0x2B) && msg.payload.get(8) == Some(&0x0E)
        }
        // ListIdentity (0x63) and RegisterSession (0x65) only.
        Protocol::EtherNetIP => {
            matches!(msg.payload.first(), Some(0x63) | Some(0x65))
                && msg.payload.get(1) == Some(&0x00)
        }
        // Link-status request (secondary function 9), no application data.
        Protocol::Dnp3 => msg.payload.get(3) == Some(&0xC9) && msg.payload.get(2) == Some(&5),
        // COTP connection request, no S7 job.
        Protocol::S7 => msg.payload.get(5) == Some(&0xE0),
        // Text hello, no invocation.
        Protocol::TridiumFox => msg.payload.starts_with(b"fox a"),
        // GET only.
        Protocol::FoxPlatform => msg.payload.starts_with(b"GET "),
    }
}
