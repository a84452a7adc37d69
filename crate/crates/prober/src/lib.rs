//! Active TLS and DTLS probing of individual endpoints.
//!
//! For every target the prober first checks transport liveness, then runs a
//! battery of four handshakes, one per cipher-suite set, in a fixed order:
//! REC, noPFS, COMP, INS. Each handshake records what the server negotiated,
//! the certificate chain it presented, and whether it asked for a client
//! certificate, regardless of whether the handshake could be completed.
//! Failures are kept, never retried, so a battery always yields exactly four
//! records and identical lab runs yield identical outcomes.

mod identity;
mod transport;

use std::io::ErrorKind;
use std::net::{SocketAddr, TcpStream};
use std::time::Duration;

use audit_catalog::{Endpoint, TransportKind};
use audit_tlswire::suites::{self, SuiteSetName};
use audit_tlswire::{
    client, ClientConfig, ClientIdentity, ClientOutcome, Session, Version, WireError,
    DOWNGRADE_SENTINEL,
};
use serde::{Deserialize, Serialize};

pub use identity::{
    generate_scanner_identity, load_identity, load_or_generate_identity, save_identity,
};
pub use transport::{probe_transport, udp_elicit, TransportState};

/// Errors from probe plumbing, as opposed to network outcomes, which are
/// data and never errors.
#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error("server random must be 32 bytes, got {0}")]
    RandomLength(usize),
    #[error("scanner identity: {0}")]
    Identity(String),
}

/// Timeout and pacing knobs shared by all probe operations.
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub connect_timeout: Duration,
    pub read_timeout: Duration,
    /// Times a lost datagram flight is re-sent before giving up.
    pub udp_retransmits: u32,
    /// First datagram retransmission delay; doubles per attempt.
    pub initial_retransmit: Duration,
    /// How long an accepted TCP connection is watched for an immediate
    /// close before the port is declared alive.
    pub close_grace: Duration,
}

impl Default for ProbeOptions {
    fn default() -> ProbeOptions {
        ProbeOptions {
            connect_timeout: Duration::from_secs(10),
            read_timeout: Duration::from_secs(5),
            udp_retransmits: 3,
            initial_retransmit: Duration::from_secs(2),
            close_grace: Duration::from_millis(250),
        }
    }
}

impl ProbeOptions {
    /// Short timeouts for loopback lab runs.
    pub fn lab() -> ProbeOptions {
        ProbeOptions {
            connect_timeout: Duration::from_secs(2),
            read_timeout: Duration::from_secs(2),
            udp_retransmits: 2,
            initial_retransmit: Duration::from_millis(200),
            close_grace: Duration::from_millis(80),
        }
    }
}

/// How one handshake attempt ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandshakeOutcome {
    /// The server answered the hello with a valid ServerHello flight.
    Accepted,
    /// The server answered with a fatal alert or closed the connection.
    Denied,
    /// The exchange broke down for any other reason.
    GenericError,
    /// Nothing came back within the probe budget.
    Timeout,
}

/// Everything observed during a single handshake attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandshakeResult {
    pub suite_set: SuiteSetName,
    pub outcome: HandshakeOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negotiated_version: Option<Version>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "suite_by_name")]
    pub negotiated_suite: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "random_hex")]
    pub server_random: Option<[u8; 32]>,
    /// Server certificate chain as presented, leaf first.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "chain_base64")]
    pub chain: Vec<Vec<u8>>,
    pub client_cert_requested: bool,
    pub client_cert_sent: bool,
    /// The server asked for our certificate, got it, and then refused.
    pub rejected_after_client_cert: bool,
    /// Finished messages verified in both directions.
    pub completed: bool,
    /// Set only on version-observation probes: the server picked TLS 1.3
    /// through the version extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_tls13: Option<bool>,
    /// Human-readable reason when something went wrong.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl HandshakeResult {
    /// A blank record for a suite set, useful as a starting point when
    /// synthesizing batteries in tests and fixtures.
    pub fn empty(suite_set: SuiteSetName) -> HandshakeResult {
        HandshakeResult {
            suite_set,
            outcome: HandshakeOutcome::GenericError,
            negotiated_version: None,
            negotiated_suite: None,
            server_random: None,
            chain: Vec::new(),
            client_cert_requested: false,
            client_cert_sent: false,
            rejected_after_client_cert: false,
            completed: false,
            selected_tls13: None,
            detail: None,
        }
    }

    /// One line of JSONL output for this handshake.
    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("handshake records always serialize")
    }
}

/// The four handshake records of one endpoint's battery, in offer order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteBattery {
    pub handshakes: [HandshakeResult; 4],
}

impl SuiteBattery {
    /// The record for one suite set.
    pub fn get(&self, set: SuiteSetName) -> &HandshakeResult {
        self.handshakes
            .iter()
            .find(|h| h.suite_set == set)
            .expect("battery holds all four sets")
    }

    pub fn iter(&self) -> impl Iterator<Item = &HandshakeResult> {
        self.handshakes.iter()
    }

    /// Whether any of the four handshakes got a valid ServerHello.
    pub fn any_accepted(&self) -> bool {
        self.iter().any(|h| h.outcome == HandshakeOutcome::Accepted)
    }

    /// Whether any of the four handshakes ran to verified completion.
    pub fn any_completed(&self) -> bool {
        self.iter().any(|h| h.completed)
    }
}

/// Runs one handshake offering the given suite set and closes the session.
pub fn handshake(
    endpoint: &Endpoint,
    set: SuiteSetName,
    identity: Option<&ClientIdentity>,
    opts: &ProbeOptions,
) -> HandshakeResult {
    let (result, session) = handshake_with_session(endpoint, set, identity, opts);
    if let Some(mut session) = session {
        let _ = session.close();
    }
    result
}

/// Runs one handshake and, when it completes, hands back the live session
/// so an application-layer probe can ride on the encrypted channel.
pub fn handshake_with_session(
    endpoint: &Endpoint,
    set: SuiteSetName,
    identity: Option<&ClientIdentity>,
    opts: &ProbeOptions,
) -> (HandshakeResult, Option<Session>) {
    run_probe(endpoint, set, identity, opts, false)
}

/// The optional extra handshake that offers a current-generation version
/// extension purely to observe whether the server would select it.
pub fn observe_tls13(
    endpoint: &Endpoint,
    identity: Option<&ClientIdentity>,
    opts: &ProbeOptions,
) -> HandshakeResult {
    let (result, session) = run_probe(endpoint, SuiteSetName::Rec, identity, opts, true);
    if let Some(mut session) = session {
        let _ = session.close();
    }
    result
}

fn run_probe(
    endpoint: &Endpoint,
    set: SuiteSetName,
    identity: Option<&ClientIdentity>,
    opts: &ProbeOptions,
    observe: bool,
) -> (HandshakeResult, Option<Session>) {
    let datagram = endpoint.transport == TransportKind::Udp;
    let cfg = ClientConfig {
        offer_version: if datagram { Version::Dtls12 } else { Version::Tls12 },
        min_version: if datagram { Version::Dtls12 } else { Version::Tls10 },
        suites: set.suites().to_vec(),
        identity: identity.cloned(),
        read_timeout: opts.read_timeout,
        retransmits: opts.udp_retransmits,
        initial_retransmit: opts.initial_retransmit,
        tls13_observation: observe,
    };
    let addr = SocketAddr::new(endpoint.host, endpoint.port);
    let attempt = if datagram {
        match transport::connected_udp(addr) {
            Ok(socket) => client::connect_datagram(socket, &cfg),
            Err(e) => Err(WireError::Io(format!("udp socket: {e}"))),
        }
    } else {
        match TcpStream::connect_timeout(&addr, opts.connect_timeout) {
            Ok(stream) => client::connect_stream(stream, &cfg),
            Err(e) if matches!(e.kind(), ErrorKind::TimedOut | ErrorKind::WouldBlock) => {
                Err(WireError::Timeout)
            }
            Err(e) => Err(WireError::Io(format!("connect: {e}"))),
        }
    };
    build_result(set, observe, attempt)
}

fn build_result(
    set: SuiteSetName,
    observe: bool,
    attempt: Result<ClientOutcome, WireError>,
) -> (HandshakeResult, Option<Session>) {
    let mut result = HandshakeResult::empty(set);
    if observe {
        result.selected_tls13 = Some(false);
    }
    match attempt {
        Ok(mut outcome) => {
            result.outcome = HandshakeOutcome::Accepted;
            if outcome.selected_tls13 {
                result.selected_tls13 = Some(true);
                return (result, None);
            }
            result.negotiated_version = Some(outcome.version);
            result.negotiated_suite = Some(outcome.suite);
            result.server_random = Some(outcome.server_random);
            result.chain = std::mem::take(&mut outcome.chain);
            result.client_cert_requested = outcome.client_cert_requested;
            result.client_cert_sent = outcome.client_cert_sent;
            result.completed = outcome.completed;
            result.rejected_after_client_cert = outcome.client_cert_sent
                && !outcome.completed
                && matches!(
                    outcome.failure,
                    Some(WireError::Alert { .. }) | Some(WireError::PeerClosed)
                );
            result.detail = outcome.failure.as_ref().map(|e| e.to_string());
            (result, outcome.session.take())
        }
        Err(err) => {
            result.outcome = match &err {
                WireError::Alert { .. } | WireError::PeerClosed => HandshakeOutcome::Denied,
                WireError::Timeout => HandshakeOutcome::Timeout,
                _ => HandshakeOutcome::GenericError,
            };
            result.detail = Some(err.to_string());
            (result, None)
        }
    }
}

/// Runs the full four-set battery against one endpoint, pausing between
/// handshakes, and never stopping early: failed handshakes are recorded and
/// the battery moves on.
pub fn run_battery(
    endpoint: &Endpoint,
    identity: Option<&ClientIdentity>,
    opts: &ProbeOptions,
    pause: Duration,
) -> SuiteBattery {
    let mut results = Vec::with_capacity(SuiteSetName::ALL.len());
    for (i, set) in SuiteSetName::ALL.into_iter().enumerate() {
        if i > 0 && !pause.is_zero() {
            std::thread::sleep(pause);
        }
        results.push(handshake(endpoint, set, identity, opts));
    }
    SuiteBattery { handshakes: results.try_into().expect("one record per suite set") }
}

/// Whether a server's hello random carries the version-downgrade marker in
/// its final eight bytes. Anything but a 32-byte random is a caller bug.
pub fn detect_downgrade_sentinel(server_random: &[u8]) -> Result<bool, ProbeError> {
    if server_random.len() != 32 {
        return Err(ProbeError::RandomLength(server_random.len()));
    }
    Ok(server_random[24..] == DOWNGRADE_SENTINEL)
}

/// What an endpoint's handshakes said about client-certificate checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClientAuthClass {
    /// No handshake saw a CertificateRequest.
    NotRequested,
    /// The server asked for a certificate yet completed a handshake anyway.
    RequestedAndAccepted,
    /// Every handshake that asked for a certificate then turned us away.
    RequestedAndRejected,
}

/// Classifies client-certificate behavior across an endpoint's handshakes.
pub fn classify_client_auth(results: &[HandshakeResult]) -> ClientAuthClass {
    let mut requested = false;
    for result in results {
        if !result.client_cert_requested {
            continue;
        }
        requested = true;
        if result.completed {
            return ClientAuthClass::RequestedAndAccepted;
        }
    }
    if requested {
        ClientAuthClass::RequestedAndRejected
    } else {
        ClientAuthClass::NotRequested
    }
}

mod chain_base64 {
    use base64::engine::general_purpose::STANDARD as BASE64;
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(chain: &[Vec<u8>], s: S) -> Result<S::Ok, S::Error> {
        chain.iter().map(|der| BASE64.encode(der)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<u8>>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|text| BASE64.decode(text).map_err(serde::de::Error::custom))
            .collect()
    }
}

mod random_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<[u8; 32]>, s: S) -> Result<S::Ok, S::Error> {
        let bytes = r.expect("skipped when absent");
        let mut text = String::with_capacity(64);
        for byte in bytes {
            text.push_str(&format!("{byte:02x}"));
        }
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[u8; 32]>, D::Error> {
        let text = String::deserialize(d)?;
        if text.len() != 64 {
            return Err(serde::de::Error::custom("server random must be 64 hex chars"));
        }
        let mut bytes = [0u8; 32];
        for (i, out) in bytes.iter_mut().enumerate() {
            *out = u8::from_str_radix(&text[2 * i..2 * i + 2], 16)
                .map_err(serde::de::Error::custom)?;
        }
        Ok(Some(bytes))
    }
}

mod suite_by_name {
    use audit_tlswire::suites;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(id: &Option<u16>, s: S) -> Result<S::Ok, S::Error> {
        let id = id.expect("skipped when absent");
        match suites::suite_name(id) {
            Some(name) => s.serialize_str(name),
            None => s.serialize_str(&format!("0x{id:04X}")),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u16>, D::Error> {
        let text = String::deserialize(d)?;
        if let Some(hex) = text.strip_prefix("0x") {
            let id = u16::from_str_radix(hex, 16).map_err(serde::de::Error::custom)?;
            return Ok(Some(id));
        }
        suites::suite_id(&text)
            .map(Some)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown suite name {text}")))
    }
}
