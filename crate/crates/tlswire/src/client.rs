//! Probe-oriented handshake client. It offers whatever suite list the
//! caller provides, records everything the server does, and completes the
//! handshake whenever the engine implements the negotiated suite.

use std::net::{TcpStream, UdpSocket};
use std::time::Duration;

use rand::rngs::OsRng;
use rand::RngCore;

use audit_certs::gen::KeyPair;

use crate::alert::{DECODE_ERROR, LEVEL_FATAL, LEVEL_WARNING};
use crate::crypto::{derive_keys, CipherState};
use crate::kx;
use crate::msgs::{
    client_extensions, CertificateChain, ClientHello, HelloVerifyRequest, ServerHello,
    EXT_SUPPORTED_VERSIONS, HT_CERTIFICATE, HT_CERTIFICATE_REQUEST, HT_CERTIFICATE_VERIFY,
    HT_CLIENT_HELLO, HT_CLIENT_KEY_EXCHANGE, HT_FINISHED, HT_HELLO_VERIFY_REQUEST,
    HT_SERVER_HELLO, HT_SERVER_HELLO_DONE, HT_SERVER_KEY_EXCHANGE,
};
use crate::prf::{finished_verify_data, master_secret};
use crate::record::{HandshakeChannel, Incoming, RecordLayer};
use crate::session::Session;
use crate::suites::{suite_params, BulkCipher, KeyExchange, SuiteParams};
use crate::{Version, WireError};

/// Client certificate presented when a server asks for one.
#[derive(Clone)]
pub struct ClientIdentity {
    pub chain: Vec<Vec<u8>>,
    pub key: KeyPair,
}

/// Handshake parameters for one probe connection.
#[derive(Clone)]
pub struct ClientConfig {
    /// Highest version offered in the hello.
    pub offer_version: Version,
    /// Lowest version the client will accept from the server.
    pub min_version: Version,
    /// Cipher suites, in offered order.
    pub suites: Vec<u16>,
    pub identity: Option<ClientIdentity>,
    pub read_timeout: Duration,
    /// Datagram flights are re-sent this many times before giving up.
    pub retransmits: u32,
    /// First datagram retransmission delay; it doubles per attempt.
    pub initial_retransmit: Duration,
    /// Offer a TLS 1.3-capable hello purely to observe the selection.
    pub tls13_observation: bool,
}

impl Default for ClientConfig {
    fn default() -> ClientConfig {
        ClientConfig {
            offer_version: Version::Tls12,
            min_version: Version::Tls10,
            suites: Vec::new(),
            identity: None,
            read_timeout: Duration::from_secs(5),
            retransmits: 3,
            initial_retransmit: Duration::from_secs(2),
            tls13_observation: false,
        }
    }
}

/// Everything observed in one handshake attempt that got past a valid
/// ServerHello.
pub struct ClientOutcome {
    pub version: Version,
    pub suite: u16,
    pub server_random: [u8; 32],
    /// Server certificate chain, leaf first; empty for anonymous suites.
    pub chain: Vec<Vec<u8>>,
    pub client_cert_requested: bool,
    pub client_cert_sent: bool,
    /// The server selected TLS 1.3 through the version extension; the
    /// engine records that and stops.
    pub selected_tls13: bool,
    /// The handshake ran to verified Finished messages in both directions.
    pub completed: bool,
    /// Why completion stopped, when it did.
    pub failure: Option<WireError>,
    pub session: Option<Session>,
}

impl std::fmt::Debug for ClientOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClientOutcome")
            .field("version", &self.version)
            .field("suite", &format_args!("{:#06x}", self.suite))
            .field("chain_len", &self.chain.len())
            .field("client_cert_requested", &self.client_cert_requested)
            .field("client_cert_sent", &self.client_cert_sent)
            .field("selected_tls13", &self.selected_tls13)
            .field("completed", &self.completed)
            .field("failure", &self.failure)
            .finish_non_exhaustive()
    }
}

struct FlightTimer {
    current: Duration,
    retransmits_left: u32,
    duplicate_budget: u32,
    datagram: bool,
}

impl FlightTimer {
    fn new(cfg: &ClientConfig, datagram: bool) -> FlightTimer {
        FlightTimer {
            current: if datagram { cfg.initial_retransmit } else { cfg.read_timeout },
            retransmits_left: if datagram { cfg.retransmits } else { 0 },
            duplicate_budget: 8,
            datagram,
        }
    }

    /// Receives the next event, re-sending the last flight on datagram
    /// timeouts and on evidence that the peer missed it.
    fn recv(&mut self, hs: &mut HandshakeChannel) -> Result<Incoming, WireError> {
        loop {
            match hs.recv(self.current) {
                Err(WireError::Timeout) if self.datagram && self.retransmits_left > 0 => {
                    self.retransmits_left -= 1;
                    self.current *= 2;
                    hs.rl.retransmit()?;
                }
                Err(WireError::PeerRetransmit) if self.duplicate_budget > 0 => {
                    self.duplicate_budget -= 1;
                    hs.rl.retransmit()?;
                }
                other => return other,
            }
        }
    }
}

/// Runs a handshake over an established TCP connection.
pub fn connect_stream(stream: TcpStream, cfg: &ClientConfig) -> Result<ClientOutcome, WireError> {
    let _ = stream.set_nodelay(true);
    run_client(HandshakeChannel::new(RecordLayer::stream(stream)), cfg)
}

/// Runs a handshake over a connected UDP socket.
pub fn connect_datagram(
    socket: UdpSocket,
    cfg: &ClientConfig,
) -> Result<ClientOutcome, WireError> {
    run_client(HandshakeChannel::new(RecordLayer::datagram(socket, None)), cfg)
}

/// Reduces an event to a handshake message; warning alerts are ignorable
/// and come back as `Ok(None)`.
fn expect_msg(event: Incoming) -> Result<Option<(u8, Vec<u8>)>, WireError> {
    match event {
        Incoming::Msg { handshake_type, body } => Ok(Some((handshake_type, body))),
        Incoming::Alert { level: LEVEL_WARNING, .. } => Ok(None),
        Incoming::Alert { level, code } => Err(WireError::Alert { level, code }),
        Incoming::ChangeCipher => Err(WireError::Decode("cipher change out of order".into())),
        Incoming::AppData(_) => Err(WireError::Decode("application data during handshake".into())),
    }
}

fn run_client(mut hs: HandshakeChannel, cfg: &ClientConfig) -> Result<ClientOutcome, WireError> {
    match drive_client(&mut hs, cfg) {
        Ok(mut outcome) => {
            if outcome.completed {
                outcome.session = Some(Session::new(hs));
            }
            Ok(outcome)
        }
        Err(e) => {
            if matches!(e, WireError::Decode(_) | WireError::Crypto(_)) {
                let _ = hs.send_alert(LEVEL_FATAL, DECODE_ERROR);
            }
            Err(e)
        }
    }
}

fn drive_client(
    hs: &mut HandshakeChannel,
    cfg: &ClientConfig,
) -> Result<ClientOutcome, WireError> {
    let datagram = hs.rl.is_datagram();
    if datagram != cfg.offer_version.is_datagram() {
        return Err(WireError::Decode("version does not match the transport".into()));
    }
    let mut client_random = [0u8; 32];
    OsRng.fill_bytes(&mut client_random);
    let mut hello = ClientHello {
        client_version: cfg.offer_version.wire(),
        random: client_random,
        session_id: Vec::new(),
        cookie: datagram.then(Vec::new),
        suites: cfg.suites.clone(),
        compressions: vec![0],
        extensions: client_extensions(cfg.tls13_observation),
    };
    hs.send_msg(HT_CLIENT_HELLO, &hello.encode(), true);
    hs.rl.flush()?;
    let mut timer = FlightTimer::new(cfg, datagram);

    let mut event = loop {
        if let Some(msg) = expect_msg(timer.recv(hs)?)? {
            break msg;
        }
    };

    if datagram && event.0 == HT_HELLO_VERIFY_REQUEST {
        let hvr = HelloVerifyRequest::decode(&event.1)?;
        hs.reset_transcript();
        hello.cookie = Some(hvr.cookie);
        hs.send_msg(HT_CLIENT_HELLO, &hello.encode(), true);
        hs.rl.flush()?;
        timer = FlightTimer::new(cfg, datagram);
        event = loop {
            if let Some(msg) = expect_msg(timer.recv(hs)?)? {
                break msg;
            }
        };
        if event.0 == HT_HELLO_VERIFY_REQUEST {
            return Err(WireError::Decode("second cookie demand".into()));
        }
    }

    if event.0 != HT_SERVER_HELLO {
        return Err(WireError::Decode("expected ServerHello".into()));
    }
    let sh = ServerHello::decode(&event.1)?;
    if sh.compression != 0 {
        return Err(WireError::Decode("unsupported compression method".into()));
    }

    if cfg.tls13_observation && sh.extension(EXT_SUPPORTED_VERSIONS) == Some(&[0x03, 0x04][..]) {
        return Ok(ClientOutcome {
            version: Version::from_wire(sh.server_version).unwrap_or(cfg.offer_version),
            suite: sh.suite,
            server_random: sh.random,
            chain: Vec::new(),
            client_cert_requested: false,
            client_cert_sent: false,
            selected_tls13: true,
            completed: false,
            failure: Some(WireError::UnsupportedSuite(sh.suite)),
            session: None,
        });
    }

    let version = Version::from_wire(sh.server_version)
        .ok_or_else(|| WireError::Decode(format!("version {:#06x}", sh.server_version)))?;
    if version.is_datagram() != datagram
        || version.wire() > cfg.offer_version.wire()
        || version < cfg.min_version
    {
        return Err(WireError::Decode(format!("server chose {version}")));
    }
    if !cfg.suites.contains(&sh.suite) {
        return Err(WireError::Decode(format!(
            "server chose suite {:#06x} which was not offered",
            sh.suite
        )));
    }
    hs.rl.wire_version = version.wire();

    let mut chain: Vec<Vec<u8>> = Vec::new();
    let mut ske_body: Option<Vec<u8>> = None;
    let mut client_cert_requested = false;
    loop {
        let (handshake_type, body) = loop {
            if let Some(msg) = expect_msg(timer.recv(hs)?)? {
                break msg;
            }
        };
        match handshake_type {
            HT_CERTIFICATE => chain = CertificateChain::decode(&body)?.chain,
            HT_SERVER_KEY_EXCHANGE => ske_body = Some(body),
            HT_CERTIFICATE_REQUEST => {
                crate::msgs::CertificateRequest::decode(&body, version.uses_tls12_prf())?;
                client_cert_requested = true;
            }
            HT_SERVER_HELLO_DONE => {
                if !body.is_empty() {
                    return Err(WireError::Decode("ServerHelloDone with a body".into()));
                }
                break;
            }
            other => {
                return Err(WireError::Decode(format!(
                    "unexpected handshake message {other} before ServerHelloDone"
                )))
            }
        }
    }

    let mut outcome = ClientOutcome {
        version,
        suite: sh.suite,
        server_random: sh.random,
        chain,
        client_cert_requested,
        client_cert_sent: false,
        selected_tls13: false,
        completed: false,
        failure: None,
        session: None,
    };

    match complete(hs, cfg, version, &sh, &client_random, ske_body, &mut outcome) {
        Ok(()) => outcome.completed = true,
        Err(e) => outcome.failure = Some(e),
    }
    Ok(outcome)
}

/// Drives the handshake to completion after ServerHelloDone; any error
/// leaves the outcome marked incomplete rather than invalid.
fn complete(
    hs: &mut HandshakeChannel,
    cfg: &ClientConfig,
    version: Version,
    sh: &ServerHello,
    client_random: &[u8; 32],
    ske_body: Option<Vec<u8>>,
    outcome: &mut ClientOutcome,
) -> Result<(), WireError> {
    let params: &SuiteParams =
        suite_params(sh.suite).ok_or(WireError::UnsupportedSuite(sh.suite))?;
    if params.tls12_only && !version.uses_tls12_prf() {
        return Err(WireError::Decode("suite requires a newer version".into()));
    }
    if version.is_datagram() && params.cipher == BulkCipher::Rc4_128 {
        return Err(WireError::Crypto("stream cipher over a datagram transport".into()));
    }
    if outcome.chain.is_empty() {
        return Err(WireError::Crypto("no server certificate".into()));
    }
    let leaf = kx::leaf_public_key(&outcome.chain[0])?;

    let ske_params = match ske_body.as_deref() {
        Some(body) => {
            let params_len = kx::ske_params_len(params.kx, body)?;
            let (param_bytes, sig_block) = body.split_at(params_len);
            if params.kx.ephemeral() {
                let mut r = crate::wire::Reader::new(sig_block);
                kx::verify_server_params(
                    version,
                    &leaf,
                    client_random,
                    &sh.random,
                    param_bytes,
                    &mut r,
                )?;
            }
            Some(param_bytes.to_vec())
        }
        None => None,
    };
    if params.kx != KeyExchange::Rsa && ske_params.is_none() {
        return Err(WireError::Decode("missing ServerKeyExchange".into()));
    }

    if outcome.client_cert_requested {
        let list = cfg.identity.as_ref().map(|i| i.chain.clone()).unwrap_or_default();
        outcome.client_cert_sent = !list.is_empty();
        hs.send_msg(HT_CERTIFICATE, &CertificateChain { chain: list }.encode(), true);
    }

    let ckx = kx::client_kx(
        params.kx,
        cfg.offer_version.wire(),
        &leaf,
        ske_params.as_deref(),
    )?;
    hs.send_msg(HT_CLIENT_KEY_EXCHANGE, &ckx.cke_body, true);

    if outcome.client_cert_sent {
        let identity = cfg.identity.as_ref().expect("cert was sent");
        let cv = kx::sign_transcript(version, &identity.key, hs.transcript())?;
        hs.send_msg(HT_CERTIFICATE_VERIFY, &cv, true);
    }

    let master = master_secret(version, params.prf, &ckx.premaster, client_random, &sh.random);
    let (client_keys, server_keys) = derive_keys(params, version, &master, client_random, &sh.random);
    hs.send_change_cipher();
    hs.rl.change_write_cipher(CipherState::new(params, version, client_keys));
    let verify = finished_verify_data(version, params.prf, &master, true, hs.transcript());
    hs.send_msg(HT_FINISHED, &verify, true);
    hs.rl.flush()?;

    let mut timer = FlightTimer::new(cfg, hs.rl.is_datagram());
    loop {
        match timer.recv(hs)? {
            Incoming::ChangeCipher => break,
            Incoming::Alert { level: LEVEL_WARNING, .. } => continue,
            Incoming::Alert { level, code } => return Err(WireError::Alert { level, code }),
            _ => return Err(WireError::Decode("expected the cipher change".into())),
        }
    }
    hs.rl.change_read_cipher(CipherState::new(params, version, server_keys));

    let expected_transcript = hs.transcript().to_vec();
    let (handshake_type, body) = loop {
        if let Some(msg) = expect_msg(timer.recv(hs)?)? {
            break msg;
        }
    };
    if handshake_type != HT_FINISHED {
        return Err(WireError::Decode("expected Finished".into()));
    }
    let expected =
        finished_verify_data(version, params.prf, &master, false, &expected_transcript);
    if body != expected {
        return Err(WireError::Crypto("Finished verification failed".into()));
    }
    Ok(())
}
