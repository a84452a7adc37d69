//! A compact TLS 1.0/1.1/1.2 and DTLS 1.2 engine built for auditing rather
//! than for general-purpose transport security. The client deliberately
//! offers weak and legacy cipher suites so a probe can observe what a peer
//! accepts; the server half powers lab endpoints with configurable quirks.

pub mod alert;
pub mod client;
pub mod crypto;
pub mod kx;
pub mod msgs;
pub mod prf;
pub mod record;
pub mod server;
pub mod session;
pub mod suites;
pub mod wire;

pub use client::{ClientConfig, ClientIdentity, ClientOutcome};
pub use record::{HandshakeChannel, Incoming, RecordLayer};
pub use server::{ClientAuth, ServerConfig, ServerOutcome};
pub use session::Session;

/// Marker a current-generation server plants in the tail of its hello
/// random when it settles for an older protocol version.
pub const DOWNGRADE_SENTINEL: [u8; 8] = *b"DOWNGRD\x01";

/// Protocol versions the engine speaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Version {
    #[serde(rename = "TLS1.0")]
    Tls10,
    #[serde(rename = "TLS1.1")]
    Tls11,
    #[serde(rename = "TLS1.2")]
    Tls12,
    #[serde(rename = "DTLS1.2")]
    Dtls12,
}

impl Version {
    /// Two-byte version field as it appears on the wire.
    pub fn wire(self) -> u16 {
        match self {
            Version::Tls10 => 0x0301,
            Version::Tls11 => 0x0302,
            Version::Tls12 => 0x0303,
            Version::Dtls12 => 0xFEFD,
        }
    }

    pub fn from_wire(value: u16) -> Option<Version> {
        match value {
            0x0301 => Some(Version::Tls10),
            0x0302 => Some(Version::Tls11),
            0x0303 => Some(Version::Tls12),
            0xFEFD => Some(Version::Dtls12),
            _ => None,
        }
    }

    /// Whether the pseudo-random function and Finished computation follow
    /// the modern single-hash scheme.
    pub fn uses_tls12_prf(self) -> bool {
        matches!(self, Version::Tls12 | Version::Dtls12)
    }

    pub fn is_datagram(self) -> bool {
        self == Version::Dtls12
    }

    /// Records carry an explicit per-record IV from TLS 1.1 on.
    pub fn explicit_block_iv(self) -> bool {
        self != Version::Tls10
    }

    pub fn label(self) -> &'static str {
        match self {
            Version::Tls10 => "TLS1.0",
            Version::Tls11 => "TLS1.1",
            Version::Tls12 => "TLS1.2",
            Version::Dtls12 => "DTLS1.2",
        }
    }
}

impl std::fmt::Display for Version {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Errors surfaced by the engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("i/o: {0}")]
    Io(String),
    #[error("timed out")]
    Timeout,
    #[error("peer closed the connection")]
    PeerClosed,
    #[error("peer retransmitted its previous flight")]
    PeerRetransmit,
    #[error("received {} alert: {}", if *.level == crate::alert::LEVEL_FATAL { "fatal" } else { "warning" }, crate::alert::alert_name(*.code))]
    Alert { level: u8, code: u8 },
    #[error("decode: {0}")]
    Decode(String),
    #[error("crypto: {0}")]
    Crypto(String),
    #[error("cipher suite {0:#06x} is not supported by the engine")]
    UnsupportedSuite(u16),
    #[error("handshake refused: {0}")]
    Refused(String),
}
