//! Configurable handshake server backing lab endpoints: version ceilings
//! and floors, suite policies, client-certificate demands, and the
//! downgrade sentinel are all switchable per endpoint.

use std::net::{TcpStream, UdpSocket};
use std::time::Duration;

use rand::rngs::OsRng;
use rand::RngCore;

use audit_certs::gen::KeyPair;
use audit_certs::verify_signed_by;

use crate::alert::{
    BAD_CERTIFICATE, BAD_RECORD_MAC, DECODE_ERROR, DECRYPT_ERROR, HANDSHAKE_FAILURE,
    LEVEL_FATAL, LEVEL_WARNING, PROTOCOL_VERSION, UNEXPECTED_MESSAGE,
};
use crate::crypto::{derive_keys, CipherState};
use crate::kx::{self, ServerEphemeral};
use crate::msgs::{
    CertificateChain, CertificateRequest, ClientHello, HelloVerifyRequest, ServerHello,
    HT_CERTIFICATE, HT_CERTIFICATE_REQUEST, HT_CERTIFICATE_VERIFY, HT_CLIENT_HELLO,
    HT_CLIENT_KEY_EXCHANGE, HT_FINISHED, HT_HELLO_VERIFY_REQUEST, HT_SERVER_HELLO,
    HT_SERVER_HELLO_DONE, HT_SERVER_KEY_EXCHANGE, SIG_ECDSA_SECP256R1_SHA256,
    SIG_ECDSA_SHA1, SIG_RSA_PKCS1_SHA1, SIG_RSA_PKCS1_SHA256,
};
use crate::prf::{finished_verify_data, master_secret};
use crate::record::{HandshakeChannel, Incoming, RecordLayer};
use crate::session::Session;
use crate::suites::{suite_params, BulkCipher, KeyExchange, SuiteParams};
use crate::{Version, WireError, DOWNGRADE_SENTINEL};

/// Client-certificate policy of a server endpoint.
#[derive(Clone)]
pub enum ClientAuth {
    Off,
    /// Request a certificate but accept any answer, including none.
    RequestAcceptAny,
    /// Demand a certificate signed by this CA and reject everything else.
    RequireIssuedBy(Vec<u8>),
}

/// One endpoint's handshake behavior.
#[derive(Clone)]
pub struct ServerConfig {
    pub min_version: Version,
    pub max_version: Version,
    /// Enabled suites in server preference order.
    pub suites: Vec<u16>,
    /// Certificate chain, leaf first.
    pub chain: Vec<Vec<u8>>,
    pub key: KeyPair,
    pub client_auth: ClientAuth,
    /// Stamp the downgrade marker into the hello random when the newest
    /// supported version is negotiated.
    pub downgrade_sentinel: bool,
    pub read_timeout: Duration,
}

/// An accepted connection and what the handshake revealed.
pub struct ServerOutcome {
    pub version: Version,
    pub suite: u16,
    /// Leaf certificate the client presented, when it presented one.
    pub client_cert: Option<Vec<u8>>,
    pub session: Session,
}

/// Accepts one handshake on an established TCP connection.
pub fn accept_stream(stream: TcpStream, cfg: &ServerConfig) -> Result<ServerOutcome, WireError> {
    let _ = stream.set_nodelay(true);
    serve(HandshakeChannel::new(RecordLayer::stream(stream)), cfg)
}

/// Accepts one handshake on a bound UDP socket: waits for the first
/// datagram, locks onto that peer, and serves the handshake.
pub fn accept_datagram(socket: &UdpSocket, cfg: &ServerConfig) -> Result<ServerOutcome, WireError> {
    let mut buf = [0u8; 65536];
    socket.set_read_timeout(None).map_err(|e| WireError::Io(e.to_string()))?;
    let (n, peer) = socket.recv_from(&mut buf).map_err(|e| WireError::Io(e.to_string()))?;
    let conn = socket.try_clone().map_err(|e| WireError::Io(e.to_string()))?;
    serve(
        HandshakeChannel::new(RecordLayer::datagram_to(conn, peer, Some(&buf[..n]))),
        cfg,
    )
}

fn serve(mut hs: HandshakeChannel, cfg: &ServerConfig) -> Result<ServerOutcome, WireError> {
    match drive_server(&mut hs, cfg) {
        Ok((version, suite, client_cert)) => Ok(ServerOutcome {
            version,
            suite,
            client_cert,
            session: Session::new(hs),
        }),
        Err(Refusal { alert, error }) => {
            if let Some(code) = alert {
                let _ = hs.send_alert(LEVEL_FATAL, code);
            }
            Err(error)
        }
    }
}

struct Refusal {
    alert: Option<u8>,
    error: WireError,
}

impl Refusal {
    fn send(alert: u8, error: WireError) -> Refusal {
        Refusal { alert: Some(alert), error }
    }
}

impl From<WireError> for Refusal {
    fn from(error: WireError) -> Refusal {
        let alert = match &error {
            WireError::Decode(_) => Some(DECODE_ERROR),
            WireError::Crypto(msg) if msg.contains("record") => Some(BAD_RECORD_MAC),
            WireError::Crypto(_) => Some(DECRYPT_ERROR),
            WireError::UnsupportedSuite(_) => Some(HANDSHAKE_FAILURE),
            _ => None,
        };
        Refusal { alert, error }
    }
}

fn refused(msg: &str) -> WireError {
    WireError::Refused(msg.to_string())
}

/// Receives the next event, resending the last flight when the peer shows
/// signs of having missed it.
fn recv_event(hs: &mut HandshakeChannel, timeout: Duration) -> Result<Incoming, WireError> {
    let mut duplicate_budget = 8u32;
    loop {
        match hs.recv(timeout) {
            Err(WireError::PeerRetransmit) if duplicate_budget > 0 => {
                duplicate_budget -= 1;
                hs.rl.retransmit()?;
            }
            Ok(Incoming::Alert { level: LEVEL_WARNING, .. }) => continue,
            other => return other,
        }
    }
}

fn recv_msg(hs: &mut HandshakeChannel, timeout: Duration) -> Result<(u8, Vec<u8>), WireError> {
    match recv_event(hs, timeout)? {
        Incoming::Msg { handshake_type, body } => Ok((handshake_type, body)),
        Incoming::Alert { level, code } => Err(WireError::Alert { level, code }),
        Incoming::ChangeCipher => Err(WireError::Decode("cipher change out of order".into())),
        Incoming::AppData(_) => Err(WireError::Decode("application data during handshake".into())),
    }
}

fn negotiate_version(cfg: &ServerConfig, hello: &ClientHello, datagram: bool) -> Option<Version> {
    if datagram {
        let offered = Version::from_wire(hello.client_version)?;
        (offered == Version::Dtls12 && cfg.max_version == Version::Dtls12).then_some(offered)
    } else {
        if hello.client_version < Version::Tls10.wire() {
            return None;
        }
        let ceiling = cfg.max_version.wire().min(hello.client_version);
        let negotiated = Version::from_wire(ceiling)?;
        (negotiated >= cfg.min_version).then_some(negotiated)
    }
}

fn select_suite<'a>(
    cfg: &ServerConfig,
    hello: &ClientHello,
    version: Version,
) -> Option<&'a SuiteParams> {
    cfg.suites.iter().find_map(|&id| {
        if !hello.suites.contains(&id) {
            return None;
        }
        let params = suite_params(id)?;
        if params.tls12_only && !version.uses_tls12_prf() {
            return None;
        }
        if version.is_datagram() && params.cipher == BulkCipher::Rc4_128 {
            return None;
        }
        let key_matches = match (&cfg.key, params.kx) {
            (KeyPair::Rsa(_), KeyExchange::Rsa | KeyExchange::EcdheRsa | KeyExchange::DheRsa) => {
                true
            }
            (KeyPair::EcdsaP256(_), KeyExchange::EcdheEcdsa) => true,
            _ => false,
        };
        key_matches.then_some(params)
    })
}

fn drive_server(
    hs: &mut HandshakeChannel,
    cfg: &ServerConfig,
) -> Result<(Version, u16, Option<Vec<u8>>), Refusal> {
    let datagram = hs.rl.is_datagram();
    let timeout = cfg.read_timeout;

    let (handshake_type, body) = recv_msg(hs, timeout)?;
    if handshake_type != HT_CLIENT_HELLO {
        return Err(WireError::Decode("expected ClientHello".into()).into());
    }
    let mut hello = ClientHello::decode(&body, datagram)?;

    if datagram {
        let mut cookie = vec![0u8; 16];
        OsRng.fill_bytes(&mut cookie);
        let hvr = HelloVerifyRequest { server_version: 0xFEFF, cookie: cookie.clone() };
        hs.send_msg(HT_HELLO_VERIFY_REQUEST, &hvr.encode(), false);
        hs.rl.flush()?;
        hs.reset_transcript();
        let (handshake_type, body) = recv_msg(hs, timeout)?;
        if handshake_type != HT_CLIENT_HELLO {
            return Err(WireError::Decode("expected the repeated ClientHello".into()).into());
        }
        hello = ClientHello::decode(&body, true)?;
        if hello.cookie.as_deref() != Some(&cookie[..]) {
            return Err(WireError::Decode("cookie mismatch".into()).into());
        }
    }

    if !hello.compressions.contains(&0) {
        return Err(Refusal::send(
            HANDSHAKE_FAILURE,
            refused("no common compression method"),
        ));
    }
    let Some(version) = negotiate_version(cfg, &hello, datagram) else {
        return Err(Refusal::send(PROTOCOL_VERSION, refused("no acceptable protocol version")));
    };
    let Some(params) = select_suite(cfg, &hello, version) else {
        return Err(Refusal::send(HANDSHAKE_FAILURE, refused("no cipher suite in common")));
    };

    let mut server_random = [0u8; 32];
    OsRng.fill_bytes(&mut server_random);
    if cfg.downgrade_sentinel && version.uses_tls12_prf() {
        server_random[24..].copy_from_slice(&DOWNGRADE_SENTINEL);
    }

    hs.rl.wire_version = version.wire();
    let sh = ServerHello {
        server_version: version.wire(),
        random: server_random,
        session_id: Vec::new(),
        suite: params.id,
        compression: 0,
        extensions: Vec::new(),
    };
    hs.send_msg(HT_SERVER_HELLO, &sh.encode(), true);
    hs.send_msg(
        HT_CERTIFICATE,
        &CertificateChain { chain: cfg.chain.clone() }.encode(),
        true,
    );

    let server_kx = kx::server_kx(params.kx);
    let ephemeral = match &server_kx {
        Some(state) => {
            let signature = kx::sign_server_params(
                version,
                &cfg.key,
                &hello.random,
                &server_random,
                &state.params,
            )?;
            let mut ske = state.params.clone();
            ske.extend_from_slice(&signature);
            hs.send_msg(HT_SERVER_KEY_EXCHANGE, &ske, true);
            &state.ephemeral
        }
        None => &ServerEphemeral::None,
    };

    let auth_requested = !matches!(cfg.client_auth, ClientAuth::Off);
    if auth_requested {
        let request = CertificateRequest {
            cert_types: vec![1, 64],
            sig_algs: version.uses_tls12_prf().then(|| {
                vec![
                    SIG_RSA_PKCS1_SHA256,
                    SIG_RSA_PKCS1_SHA1,
                    SIG_ECDSA_SECP256R1_SHA256,
                    SIG_ECDSA_SHA1,
                ]
            }),
            ca_names: Vec::new(),
        };
        hs.send_msg(HT_CERTIFICATE_REQUEST, &request.encode(), true);
    }
    hs.send_msg(HT_SERVER_HELLO_DONE, &[], true);
    hs.rl.flush()?;

    let mut client_cert: Option<Vec<u8>> = None;
    if auth_requested {
        let (handshake_type, body) = recv_msg(hs, timeout)?;
        if handshake_type != HT_CERTIFICATE {
            return Err(Refusal::send(
                UNEXPECTED_MESSAGE,
                refused("expected the client certificate"),
            ));
        }
        let presented = CertificateChain::decode(&body)?.chain;
        match (&cfg.client_auth, presented.first()) {
            (ClientAuth::RequireIssuedBy(_), None) => {
                return Err(Refusal::send(
                    HANDSHAKE_FAILURE,
                    refused("client certificate required"),
                ));
            }
            (ClientAuth::RequireIssuedBy(ca), Some(leaf)) => {
                if !verify_signed_by(leaf, ca) {
                    return Err(Refusal::send(
                        BAD_CERTIFICATE,
                        refused("client certificate not issued by the required authority"),
                    ));
                }
                client_cert = Some(leaf.clone());
            }
            (_, Some(leaf)) => client_cert = Some(leaf.clone()),
            (_, None) => {}
        }
    }

    let (handshake_type, body) = recv_msg(hs, timeout)?;
    if handshake_type != HT_CLIENT_KEY_EXCHANGE {
        return Err(WireError::Decode("expected ClientKeyExchange".into()).into());
    }
    let premaster =
        kx::server_consume_cke(params.kx, ephemeral, &cfg.key, hello.client_version, &body)?;
    let master = master_secret(version, params.prf, &premaster, &hello.random, &server_random);

    if let Some(leaf) = &client_cert {
        let pre_verify_transcript = hs.transcript().to_vec();
        let (handshake_type, body) = recv_msg(hs, timeout)?;
        if handshake_type != HT_CERTIFICATE_VERIFY {
            return Err(Refusal::send(
                UNEXPECTED_MESSAGE,
                refused("expected proof of the client key"),
            ));
        }
        let leaf_key = kx::leaf_public_key(leaf)?;
        if kx::verify_transcript_signature(version, &leaf_key, &pre_verify_transcript, &body)
            .is_err()
        {
            return Err(Refusal::send(
                DECRYPT_ERROR,
                refused("client certificate proof failed"),
            ));
        }
    }

    match recv_event(hs, timeout)? {
        Incoming::ChangeCipher => {}
        Incoming::Alert { level, code } => return Err(WireError::Alert { level, code }.into()),
        _ => return Err(WireError::Decode("expected the cipher change".into()).into()),
    }
    let (client_keys, server_keys) =
        derive_keys(params, version, &master, &hello.random, &server_random);
    hs.rl.change_read_cipher(CipherState::new(params, version, client_keys));

    let pre_finished_transcript = hs.transcript().to_vec();
    let (handshake_type, body) = recv_msg(hs, timeout)?;
    if handshake_type != HT_FINISHED {
        return Err(WireError::Decode("expected Finished".into()).into());
    }
    let expected =
        finished_verify_data(version, params.prf, &master, true, &pre_finished_transcript);
    if body != expected {
        return Err(Refusal::send(DECRYPT_ERROR, refused("Finished verification failed")));
    }

    hs.send_change_cipher();
    hs.rl.change_write_cipher(CipherState::new(params, version, server_keys));
    let verify = finished_verify_data(version, params.prf, &master, false, hs.transcript());
    hs.send_msg(HT_FINISHED, &verify, true);
    hs.rl.flush()?;

    Ok((version, params.id, client_cert))
}
