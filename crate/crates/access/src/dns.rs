//! Minimal DNS MX-presence lookups over UDP.

use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicU16, Ordering};
use std::time::Duration;

use crate::contacts::MxResolver;

const QTYPE_MX: u16 = 15;
const QCLASS_IN: u16 = 1;
const RCODE_NXDOMAIN: u8 = 3;

static QUERY_ID: AtomicU16 = AtomicU16::new(0x4d58);

/// Asks one DNS server whether a domain has any MX record.
///
/// Only presence is checked, so the answer count in the response header is
/// all that is read. A clean `NOERROR` with zero answers or an `NXDOMAIN`
/// means no record; any other failure (timeout, `SERVFAIL`) is an error so
/// callers can keep the address as unverified rather than dropping it.
#[derive(Debug, Clone)]
pub struct UdpMxResolver {
    server: SocketAddr,
    timeout: Duration,
}

impl UdpMxResolver {
    pub fn new(server: SocketAddr, timeout: Duration) -> Self {
        UdpMxResolver { server, timeout }
    }
}

impl MxResolver for UdpMxResolver {
    fn has_mx(&self, domain: &str) -> std::io::Result<bool> {
        let Some(question) = encode_name(domain) else {
            return Ok(false);
        };
        let bind_addr: SocketAddr = if self.server.is_ipv4() {
            "0.0.0.0:0".parse().unwrap()
        } else {
            "[::]:0".parse().unwrap()
        };
        let socket = UdpSocket::bind(bind_addr)?;
        socket.set_read_timeout(Some(self.timeout))?;
        socket.connect(self.server)?;

        let id = QUERY_ID.fetch_add(1, Ordering::Relaxed);
        let mut query = Vec::with_capacity(17 + question.len());
        query.extend_from_slice(&id.to_be_bytes());
        query.extend_from_slice(&[0x01, 0x00]); // recursion desired
        query.extend_from_slice(&1u16.to_be_bytes()); // one question
        query.extend_from_slice(&[0; 6]); // no answer/authority/additional
        query.extend_from_slice(&question);
        query.extend_from_slice(&QTYPE_MX.to_be_bytes());
        query.extend_from_slice(&QCLASS_IN.to_be_bytes());
        socket.send(&query)?;

        let mut buf = [0u8; 512];
        loop {
            let n = socket.recv(&mut buf)?;
            if n < 12 || buf[0..2] != id.to_be_bytes() {
                continue;
            }
            if buf[2] & 0x80 == 0 {
                // Not a response at all; keep waiting for ours.
                continue;
            }
            let rcode = buf[3] & 0x0F;
            let answers = u16::from_be_bytes([buf[6], buf[7]]);
            return match rcode {
                0 => Ok(answers > 0),
                RCODE_NXDOMAIN => Ok(false),
                other => Err(std::io::Error::other(format!("dns rcode {other}"))),
            };
        }
    }
}

/// DNS wire encoding of a domain name; `None` when a label or the whole
/// name exceeds protocol limits.
fn encode_name(domain: &str) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(domain.len() + 2);
    for label in domain.split('.') {
        if label.is_empty() || label.len() > 63 {
            return None;
        }
        out.push(label.len() as u8);
        out.extend_from_slice(label.as_bytes());
    }
    out.push(0);
    if out.len() > 255 {
        return None;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::SocketAddr;
    use std::thread;

    /// One-shot fixture server: answers every query it receives with the
    /// given rcode and answer count until dropped.
    fn fixture_server(rcode: u8, answers: u16) -> SocketAddr {
        let socket = UdpSocket::bind("127.0.0.1:0").unwrap();
        let addr = socket.local_addr().unwrap();
        thread::spawn(move || {
            let mut buf = [0u8; 512];
            while let Ok((n, peer)) = socket.recv_from(&mut buf) {
                if n < 12 {
                    continue;
                }
                let mut reply = vec![buf[0], buf[1], 0x81, 0x80 | rcode];
                reply.extend_from_slice(&[0, 1]); // question count echo
                reply.extend_from_slice(&answers.to_be_bytes());
                reply.extend_from_slice(&[0; 4]);
                let _ = socket.send_to(&reply, peer);
            }
        });
        addr
    }

    fn resolver(addr: SocketAddr) -> UdpMxResolver {
        UdpMxResolver::new(addr, Duration::from_millis(500))
    }

    #[test]
    fn present_mx_records_resolve_true() {
        let addr = fixture_server(0, 1);
        assert_eq!(resolver(addr).has_mx("example.org").unwrap(), true);
    }

    #[test]
    fn empty_answers_and_nxdomain_resolve_false() {
        let empty = fixture_server(0, 0);
        assert_eq!(resolver(empty).has_mx("example.org").unwrap(), false);
        let nxdomain = fixture_server(RCODE_NXDOMAIN, 0);
        assert_eq!(resolver(nxdomain).has_mx("example.org").unwrap(), false);
    }

    #[test]
    fn server_failure_is_an_error_not_a_filter() {
        let servfail = fixture_server(2, 0);
        assert!(resolver(servfail).has_mx("example.org").is_err());
    }

    #[test]
    fn silence_times_out_as_an_error() {
        let socket = UdpSocket::bind("127.0.0.1:0").unwrap();
        let addr = socket.local_addr().unwrap();
        let quiet = UdpMxResolver::new(addr, Duration::from_millis(100));
        assert!(quiet.has_mx("example.org").is_err());
    }

    #[test]
    fn queries_encode_the_mx_question() {
        let socket = UdpSocket::bind("127.0.0.1:0").unwrap();
        let addr = socket.local_addr().unwrap();
        let handle = thread::spawn(move || {
            let mut buf = [0u8; 512];
            let (n, peer) = socket.recv_from(&mut buf).unwrap();
            let query = buf[..n].to_vec();
            let mut reply = vec![buf[0], buf[1], 0x81, 0x80, 0, 1, 0, 1];
            reply.extend_from_slice(&[0; 4]);
            socket.send_to(&reply, peer).unwrap();
            query
        });
        resolver(addr).has_mx("plant.example").unwrap();
        let query = handle.join().unwrap();

        let mut expected_name = vec![5u8];
        expected_name.extend_from_slice(b"plant");
        expected_name.push(7);
        expected_name.extend_from_slice(b"example");
        expected_name.push(0);
        assert_eq!(&query[12..12 + expected_name.len()], &expected_name[..]);
        let tail = &query[12 + expected_name.len()..];
        assert_eq!(tail, &[0, 15, 0, 1]);
    }

    #[test]
    fn oversized_labels_resolve_false_without_a_query() {
        let resolver = UdpMxResolver::new("127.0.0.1:9".parse().unwrap(), Duration::from_millis(10));
        let long = "a".repeat(64);
        assert_eq!(resolver.has_mx(&format!("{long}.example")).unwrap(), false);
    }
}
