//! Catalog of industrial and IoT protocols covered by the audit toolkit.
//!
//! The catalog maps each protocol to its standard (plaintext or
//! opportunistic-TLS) port, its secure-variant port, the transport it runs
//! on, and how TLS entered the protocol family: retrofitted onto an older
//! plaintext protocol or required by design. Scanners, probers, and report
//! writers all key off this table, so it ships embedded in the binary and
//! can be overridden with an external JSON file of the same shape.

use std::collections::BTreeMap;
use std::fmt;
use std::net::IpAddr;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Protocols the toolkit can probe and audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Protocol {
    Modbus,
    #[serde(rename = "DNP3")]
    Dnp3,
    #[serde(rename = "IEC104")]
    Iec104,
    EtherNetIP,
    S7,
    TridiumFox,
    FoxPlatform,
    #[serde(rename = "AMQP")]
    Amqp,
    #[serde(rename = "OPCUA")]
    OpcUa,
    #[serde(rename = "MQTT")]
    Mqtt,
    CoAP,
}

impl Protocol {
    /// Every protocol in catalog order.
    pub const ALL: [Protocol; 11] = [
        Protocol::Modbus,
        Protocol::Dnp3,
        Protocol::Iec104,
        Protocol::EtherNetIP,
        Protocol::S7,
        Protocol::TridiumFox,
        Protocol::FoxPlatform,
        Protocol::Amqp,
        Protocol::OpcUa,
        Protocol::Mqtt,
        Protocol::CoAP,
    ];

    /// Canonical display name, also used in report files.
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Modbus => "Modbus",
            Protocol::Dnp3 => "DNP3",
            Protocol::Iec104 => "IEC104",
            Protocol::EtherNetIP => "EtherNetIP",
            Protocol::S7 => "S7",
            Protocol::TridiumFox => "TridiumFox",
            Protocol::FoxPlatform => "FoxPlatform",
            Protocol::Amqp => "AMQP",
            Protocol::OpcUa => "OPCUA",
            Protocol::Mqtt => "MQTT",
            Protocol::CoAP => "CoAP",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown protocol: {0}")]
pub struct UnknownProtocol(String);

impl FromStr for Protocol {
    type Err = UnknownProtocol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let proto = match key.as_str() {
            "modbus" => Protocol::Modbus,
            "dnp3" => Protocol::Dnp3,
            "iec104" | "iec608705104" => Protocol::Iec104,
            "ethernetip" | "enip" => Protocol::EtherNetIP,
            "s7" | "s7comm" => Protocol::S7,
            "tridiumfox" | "fox" | "niagarafox" => Protocol::TridiumFox,
            "foxplatform" | "niagaraplatform" => Protocol::FoxPlatform,
            "amqp" => Protocol::Amqp,
            "opcua" | "opcuabinary" => Protocol::OpcUa,
            "mqtt" => Protocol::Mqtt,
            "coap" => Protocol::CoAP,
            _ => return Err(UnknownProtocol(s.to_string())),
        };
        Ok(proto)
    }
}

/// Which of a protocol's two port flavors an endpoint belongs to.
///
/// A standard-variant endpoint speaks the plaintext protocol by default and
/// may or may not accept TLS opportunistically; a secure-variant endpoint is
/// expected to speak TLS (or DTLS) from the first byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Standard,
    Secure,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Standard => f.write_str("standard"),
            Variant::Secure => f.write_str("secure"),
        }
    }
}

/// Transport protocol an endpoint is reached over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    Tcp,
    Udp,
}

impl fmt::Display for TransportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransportKind::Tcp => f.write_str("tcp"),
            TransportKind::Udp => f.write_str("udp"),
        }
    }
}

/// Interaction style of the application protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionModel {
    ClientServer,
    PubSub,
    Both,
}

/// Whether TLS was retrofitted onto a legacy plaintext protocol or has been
/// part of the protocol family from the start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecurityOrigin {
    Retrofitted,
    ByDesign,
}

/// One catalog row describing a protocol's ports and properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolEntry {
    pub protocol: Protocol,
    /// Port of the standard (plaintext-first) variant.
    pub standard_port: u16,
    /// Additional ports the standard variant is commonly found on.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternate_standard_ports: Vec<u16>,
    /// Port of the secure (TLS- or DTLS-first) variant.
    pub secure_port: u16,
    pub transport: TransportKind,
    pub interaction: InteractionModel,
    pub security_origin: SecurityOrigin,
    /// True when the secure variant runs over DTLS instead of TLS.
    #[serde(default)]
    pub dtls: bool,
}

/// Whole protocol catalog, in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub entries: Vec<ProtocolEntry>,
}

/// Errors raised while loading an external catalog file.
#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("failed to read catalog file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse catalog file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("catalog is missing protocol {0}")]
    MissingProtocol(Protocol),
    #[error("catalog lists protocol {0} more than once")]
    DuplicateProtocol(Protocol),
}

const BUILTIN_CATALOG: &str = include_str!("../data/catalog.json");

impl Catalog {
    /// The catalog shipped with the tool.
    pub fn builtin() -> Catalog {
        serde_json::from_str(BUILTIN_CATALOG).expect("embedded catalog parses")
    }

    /// Loads a catalog override from a JSON file of the embedded shape.
    pub fn from_path(path: &Path) -> Result<Catalog, CatalogError> {
        let text = std::fs::read_to_string(path)?;
        let catalog: Catalog = serde_json::from_str(&text)?;
        catalog.validate()?;
        Ok(catalog)
    }

    /// Checks that every protocol appears exactly once.
    pub fn validate(&self) -> Result<(), CatalogError> {
        let mut seen = BTreeMap::new();
        for entry in &self.entries {
            if seen.insert(entry.protocol, ()).is_some() {
                return Err(CatalogError::DuplicateProtocol(entry.protocol));
            }
        }
        for proto in Protocol::ALL {
            if !seen.contains_key(&proto) {
                return Err(CatalogError::MissingProtocol(proto));
            }
        }
        Ok(())
    }

    /// Returns the catalog row for a protocol.
    pub fn entry(&self, protocol: Protocol) -> &ProtocolEntry {
        self.entries
            .iter()
            .find(|e| e.protocol == protocol)
            .expect("catalog validated to contain every protocol")
    }

    /// Resolves which protocol and variant a port belongs to.
    ///
    /// Secure ports win over standard ports, and primary standard ports win
    /// over alternates, so 3011 resolves to FoxPlatform rather than to the
    /// Fox alternate port.
    pub fn classify_port(&self, port: u16) -> Option<(Protocol, Variant)> {
        for entry in &self.entries {
            if entry.secure_port == port {
                return Some((entry.protocol, Variant::Secure));
            }
        }
        for entry in &self.entries {
            if entry.standard_port == port {
                return Some((entry.protocol, Variant::Standard));
            }
        }
        for entry in &self.entries {
            if entry.alternate_standard_ports.contains(&port) {
                return Some((entry.protocol, Variant::Standard));
            }
        }
        None
    }

    /// Port to scan for a protocol variant (the primary standard port for
    /// [`Variant::Standard`]).
    pub fn port_for(&self, protocol: Protocol, variant: Variant) -> u16 {
        let entry = self.entry(protocol);
        match variant {
            Variant::Standard => entry.standard_port,
            Variant::Secure => entry.secure_port,
        }
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::builtin()
    }
}

/// A single scan target: one protocol variant on one host and port.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub host: IpAddr,
    pub port: u16,
    pub protocol: Protocol,
    pub variant: Variant,
    pub transport: TransportKind,
    /// True when the secure channel is DTLS rather than TLS.
    pub dtls: bool,
}

impl Endpoint {
    /// Builds the endpoint for a protocol variant at its catalog port.
    pub fn from_catalog(
        catalog: &Catalog,
        host: IpAddr,
        protocol: Protocol,
        variant: Variant,
    ) -> Endpoint {
        let entry = catalog.entry(protocol);
        Endpoint {
            host,
            port: catalog.port_for(protocol, variant),
            protocol,
            variant,
            transport: entry.transport,
            dtls: entry.dtls && variant == Variant::Secure,
        }
    }

    /// Same endpoint with an explicit port (alternate or lab-assigned).
    pub fn with_port(mut self, port: u16) -> Endpoint {
        self.port = port;
        self
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}/{} ({} {})",
            self.host, self.port, self.transport, self.protocol, self.variant
        )
    }
}

/// Size class of a protocol's TLS-adopting population, used to pick which
/// protocols deserve per-protocol breakdowns in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdoptionGroup {
    Small,
    Medium,
    Large,
}

/// Buckets a protocol by how much of its population adopted TLS.
///
/// Fewer than 10 TLS deployments is too small to break down further; at
/// least a 10% adoption share counts as large; everything else is medium.
pub fn classify_adoption_group(tls_deployments: u64, pct_tls: f64) -> AdoptionGroup {
    if tls_deployments < 10 {
        AdoptionGroup::Small
    } else if pct_tls >= 10.0 {
        AdoptionGroup::Large
    } else {
        AdoptionGroup::Medium
    }
}
