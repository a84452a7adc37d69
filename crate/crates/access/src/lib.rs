//! Application-layer access-control checks for broker and web protocols.
//!
//! Three checks answer one question each, against an already-connected
//! stream: does an AMQP broker still accept its stock credentials, does an
//! MQTT broker admit anonymous clients, and does a Fox Platform web
//! interface serve content without asking for a login. Every check is
//! strictly non-intrusive:
//!
//! - no write operation is ever sent: no MQTT PUBLISH, no AMQP
//!   `basic.publish`, no HTTP method other than GET;
//! - successful AMQP logins are torn down immediately, before any channel
//!   is opened;
//! - the opt-in MQTT subscription observes hard byte and wall-clock caps
//!   and the received payload is only surfaced for contact extraction,
//!   never stored.
//!
//! Checks operate on any `Read + Write` stream so they run identically over
//! plain TCP and TLS sessions; callers are expected to arm the stream with a
//! read timeout, which the checks report as an indeterminate outcome rather
//! than an error.

mod amqp;
mod contacts;
mod dns;
mod http;
mod mqtt;
mod stream;

pub use amqp::amqp_default_credentials;
pub use contacts::{extract_contacts, Contact, MxResolver, TableMxResolver};
pub use dns::UdpMxResolver;
pub use http::http_login_check;
pub use mqtt::{mqtt_open_access, SUBSCRIBE_ROOT_TOPIC};

use std::time::Duration;

use audit_catalog::Protocol;
use serde::{Deserialize, Serialize};

/// What an access check concluded about an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessStatus {
    /// The service admitted us without any credentials.
    Open,
    /// The service accepted its well-known stock credentials.
    DefaultCredentials,
    /// The service refused anonymous or default access.
    Protected,
    /// No conclusive protocol-level answer was obtained.
    Indeterminate,
}

/// Outcome of one access check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessVerdict {
    pub status: AccessStatus,
    /// Protocol-level codes backing the status, such as `connack:5` or
    /// `http:401`.
    pub evidence: String,
    /// Bytes read from the peer while the check ran; never exceeds the
    /// configured cap.
    pub payload_bytes_read: u64,
}

impl AccessVerdict {
    fn new(status: AccessStatus, evidence: impl Into<String>, payload_bytes_read: u64) -> Self {
        AccessVerdict {
            status,
            evidence: evidence.into(),
            payload_bytes_read,
        }
    }
}

/// Hard ceilings for the opt-in MQTT subscription phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessLimits {
    /// Maximum bytes read off the stream while subscribed.
    pub max_read_bytes: u64,
    /// Maximum wall-clock time spent subscribed.
    pub max_duration: Duration,
}

impl Default for AccessLimits {
    fn default() -> Self {
        AccessLimits {
            max_read_bytes: 10 * 1024 * 1024,
            max_duration: Duration::from_secs(30 * 60),
        }
    }
}

/// The access check applicable to a protocol, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessCheckKind {
    AmqpDefaultCredentials,
    MqttAnonymous,
    HttpLogin,
}

/// Which access check, if any, a protocol supports.
///
/// Tridium Fox gets none: the platform has no documented stock credential
/// pair and guessing passwords is out of scope. CoAP gets none: judging its
/// access control would require enumerating resource URLs, which is far more
/// traffic than a single-session check. Field protocols without an
/// application-layer login concept (Modbus, DNP3, ...) have nothing to test.
pub fn access_check_kind(protocol: Protocol) -> Option<AccessCheckKind> {
    match protocol {
        Protocol::Amqp => Some(AccessCheckKind::AmqpDefaultCredentials),
        Protocol::Mqtt => Some(AccessCheckKind::MqttAnonymous),
        Protocol::FoxPlatform => Some(AccessCheckKind::HttpLogin),
        _ => None,
    }
}
