//! Transport-level liveness checks that run before any handshake battery.
//!
//! A TCP port is alive when the three-way handshake completes and the socket
//! survives a short grace window without the peer hanging up; listeners that
//! accept and immediately close are reported as `Reset` so later stages can
//! drop them. A UDP port can only prove liveness by answering, so the check
//! sends a datagram hello and watches for any reply at all.

use std::io::{ErrorKind, Read};
use std::net::{IpAddr, SocketAddr, TcpStream, UdpSocket};

use audit_catalog::{Endpoint, TransportKind};
use audit_tlswire::{client, suites::SuiteSetName, ClientConfig, Version, WireError};

use crate::ProbeOptions;

/// What a liveness check learned about one port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportState {
    /// The port answered and kept the conversation open.
    Alive,
    /// Nothing answered within the probe budget.
    Dead,
    /// The port actively refused: a reset, a refusal, or an accept followed
    /// by an immediate close.
    Reset,
}

/// Checks whether anything is listening at the endpoint's port.
pub fn probe_transport(endpoint: &Endpoint, opts: &ProbeOptions) -> TransportState {
    let addr = SocketAddr::new(endpoint.host, endpoint.port);
    match endpoint.transport {
        TransportKind::Tcp => probe_tcp(addr, opts),
        TransportKind::Udp => probe_udp_hello(addr, opts),
    }
}

fn probe_tcp(addr: SocketAddr, opts: &ProbeOptions) -> TransportState {
    let stream = match TcpStream::connect_timeout(&addr, opts.connect_timeout) {
        Ok(stream) => stream,
        Err(e) => {
            return match e.kind() {
                ErrorKind::TimedOut | ErrorKind::WouldBlock => TransportState::Dead,
                ErrorKind::ConnectionRefused
                | ErrorKind::ConnectionReset
                | ErrorKind::ConnectionAborted => TransportState::Reset,
                _ => TransportState::Dead,
            };
        }
    };
    let _ = stream.set_read_timeout(Some(opts.close_grace));
    let mut stream = stream;
    let mut byte = [0u8; 1];
    match stream.read(&mut byte) {
        Ok(0) => TransportState::Reset,
        Ok(_) => TransportState::Alive,
        Err(e) => match e.kind() {
            ErrorKind::TimedOut | ErrorKind::WouldBlock => TransportState::Alive,
            _ => TransportState::Reset,
        },
    }
}

/// UDP liveness via a datagram hello: any reply, even a refusal or garbage,
/// proves a listener; an ICMP unreachable surfaces as a refused read.
fn probe_udp_hello(addr: SocketAddr, opts: &ProbeOptions) -> TransportState {
    let socket = match connected_udp(addr) {
        Ok(socket) => socket,
        Err(_) => return TransportState::Dead,
    };
    let cfg = ClientConfig {
        offer_version: Version::Dtls12,
        min_version: Version::Dtls12,
        suites: SuiteSetName::Rec.suites().to_vec(),
        read_timeout: opts.read_timeout,
        retransmits: opts.udp_retransmits,
        initial_retransmit: opts.initial_retransmit,
        ..ClientConfig::default()
    };
    match client::connect_datagram(socket, &cfg) {
        Ok(mut outcome) => {
            if let Some(mut session) = outcome.session.take() {
                let _ = session.close();
            }
            TransportState::Alive
        }
        Err(WireError::Timeout) => TransportState::Dead,
        Err(WireError::PeerClosed) => TransportState::Reset,
        Err(_) => TransportState::Alive,
    }
}

/// UDP liveness for plaintext services: sends a caller-supplied probe
/// payload and reports whether anything at all comes back.
pub fn udp_elicit(addr: SocketAddr, payload: &[u8], opts: &ProbeOptions) -> TransportState {
    let socket = match connected_udp(addr) {
        Ok(socket) => socket,
        Err(_) => return TransportState::Dead,
    };
    let _ = socket.set_read_timeout(Some(opts.read_timeout));
    let mut reply = [0u8; 2048];
    for _ in 0..=opts.udp_retransmits {
        if socket.send(payload).is_err() {
            return TransportState::Reset;
        }
        match socket.recv(&mut reply) {
            Ok(_) => return TransportState::Alive,
            Err(e) => match e.kind() {
                ErrorKind::TimedOut | ErrorKind::WouldBlock => continue,
                ErrorKind::ConnectionRefused | ErrorKind::ConnectionReset => {
                    return TransportState::Reset;
                }
                _ => return TransportState::Dead,
            },
        }
    }
    TransportState::Dead
}

pub(crate) fn connected_udp(addr: SocketAddr) -> std::io::Result<UdpSocket> {
    let bind: SocketAddr = match addr.ip() {
        IpAddr::V4(_) => "0.0.0.0:0".parse().expect("literal address"),
        IpAddr::V6(_) => "[::]:0".parse().expect("literal address"),
    };
    let socket = UdpSocket::bind(bind)?;
    socket.connect(addr)?;
    Ok(socket)
}
