//! Handshake message bodies and their encodings.

use crate::wire::{Reader, Writer};
use crate::WireError;

pub const CT_CHANGE_CIPHER_SPEC: u8 = 20;
pub const CT_ALERT: u8 = 21;
pub const CT_HANDSHAKE: u8 = 22;
pub const CT_APPLICATION_DATA: u8 = 23;

pub const HT_HELLO_REQUEST: u8 = 0;
pub const HT_CLIENT_HELLO: u8 = 1;
pub const HT_SERVER_HELLO: u8 = 2;
pub const HT_HELLO_VERIFY_REQUEST: u8 = 3;
pub const HT_CERTIFICATE: u8 = 11;
pub const HT_SERVER_KEY_EXCHANGE: u8 = 12;
pub const HT_CERTIFICATE_REQUEST: u8 = 13;
pub const HT_SERVER_HELLO_DONE: u8 = 14;
pub const HT_CERTIFICATE_VERIFY: u8 = 15;
pub const HT_CLIENT_KEY_EXCHANGE: u8 = 16;
pub const HT_FINISHED: u8 = 20;

pub const EXT_SUPPORTED_GROUPS: u16 = 0x000A;
pub const EXT_EC_POINT_FORMATS: u16 = 0x000B;
pub const EXT_SIGNATURE_ALGORITHMS: u16 = 0x000D;
pub const EXT_SUPPORTED_VERSIONS: u16 = 0x002B;

pub const NAMED_CURVE_SECP256R1: u16 = 0x0017;

/// hash(8=intrinsic not used here) and signature identifiers from the
/// TLS 1.2 SignatureAndHashAlgorithm registry.
pub const SIG_RSA_PKCS1_SHA1: u16 = 0x0201;
pub const SIG_ECDSA_SHA1: u16 = 0x0203;
pub const SIG_RSA_PKCS1_SHA256: u16 = 0x0401;
pub const SIG_ECDSA_SECP256R1_SHA256: u16 = 0x0403;
pub const SIG_RSA_PKCS1_SHA384: u16 = 0x0501;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub id: u16,
    pub data: Vec<u8>,
}

fn encode_extensions(w: &mut Writer, exts: &[Extension]) {
    if exts.is_empty() {
        return;
    }
    let mut inner = Writer::new();
    for ext in exts {
        inner.u16(ext.id);
        inner.vec16(&ext.data);
    }
    w.vec16(&inner.into_bytes());
}

fn decode_extensions(r: &mut Reader) -> Result<Vec<Extension>, WireError> {
    if r.is_empty() {
        return Ok(Vec::new());
    }
    let block = r.vec16()?;
    let mut inner = Reader::new(block);
    let mut out = Vec::new();
    while !inner.is_empty() {
        let id = inner.u16()?;
        let data = inner.vec16()?.to_vec();
        out.push(Extension { id, data });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ClientHello {
    pub client_version: u16,
    pub random: [u8; 32],
    pub session_id: Vec<u8>,
    /// Present only on datagram transports.
    pub cookie: Option<Vec<u8>>,
    pub suites: Vec<u16>,
    pub compressions: Vec<u8>,
    pub extensions: Vec<Extension>,
}

impl ClientHello {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u16(self.client_version);
        w.bytes(&self.random);
        w.vec8(&self.session_id);
        if let Some(cookie) = &self.cookie {
            w.vec8(cookie);
        }
        let mut suites = Writer::new();
        for &s in &self.suites {
            suites.u16(s);
        }
        w.vec16(&suites.into_bytes());
        w.vec8(&self.compressions);
        encode_extensions(&mut w, &self.extensions);
        w.into_bytes()
    }

    pub fn decode(body: &[u8], datagram: bool) -> Result<ClientHello, WireError> {
        let mut r = Reader::new(body);
        let client_version = r.u16()?;
        let mut random = [0u8; 32];
        random.copy_from_slice(r.take(32)?);
        let session_id = r.vec8()?.to_vec();
        let cookie = if datagram { Some(r.vec8()?.to_vec()) } else { None };
        let suite_bytes = r.vec16()?;
        if suite_bytes.len() % 2 != 0 || suite_bytes.is_empty() {
            return Err(WireError::Decode("bad cipher suite list".into()));
        }
        let suites = suite_bytes
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        let compressions = r.vec8()?.to_vec();
        if compressions.is_empty() {
            return Err(WireError::Decode("empty compression list".into()));
        }
        let extensions = decode_extensions(&mut r)?;
        r.expect_end()?;
        Ok(ClientHello {
            client_version,
            random,
            session_id,
            cookie,
            suites,
            compressions,
            extensions,
        })
    }

    pub fn extension(&self, id: u16) -> Option<&[u8]> {
        self.extensions
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.data.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct ServerHello {
    pub server_version: u16,
    pub random: [u8; 32],
    pub session_id: Vec<u8>,
    pub suite: u16,
    pub compression: u8,
    pub extensions: Vec<Extension>,
}

impl ServerHello {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u16(self.server_version);
        w.bytes(&self.random);
        w.vec8(&self.session_id);
        w.u16(self.suite);
        w.u8(self.compression);
        encode_extensions(&mut w, &self.extensions);
        w.into_bytes()
    }

    pub fn decode(body: &[u8]) -> Result<ServerHello, WireError> {
        let mut r = Reader::new(body);
        let server_version = r.u16()?;
        let mut random = [0u8; 32];
        random.copy_from_slice(r.take(32)?);
        let session_id = r.vec8()?.to_vec();
        let suite = r.u16()?;
        let compression = r.u8()?;
        let extensions = decode_extensions(&mut r)?;
        r.expect_end()?;
        Ok(ServerHello {
            server_version,
            random,
            session_id,
            suite,
            compression,
            extensions,
        })
    }

    pub fn extension(&self, id: u16) -> Option<&[u8]> {
        self.extensions
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.data.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct HelloVerifyRequest {
    pub server_version: u16,
    pub cookie: Vec<u8>,
}

impl HelloVerifyRequest {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u16(self.server_version);
        w.vec8(&self.cookie);
        w.into_bytes()
    }

    pub fn decode(body: &[u8]) -> Result<HelloVerifyRequest, WireError> {
        let mut r = Reader::new(body);
        let server_version = r.u16()?;
        let cookie = r.vec8()?.to_vec();
        r.expect_end()?;
        Ok(HelloVerifyRequest { server_version, cookie })
    }
}

#[derive(Debug, Clone, Default)]
pub struct CertificateChain {
    pub chain: Vec<Vec<u8>>,
}

impl CertificateChain {
    pub fn encode(&self) -> Vec<u8> {
        let mut inner = Writer::new();
        for cert in &self.chain {
            inner.vec24(cert);
        }
        let mut w = Writer::new();
        w.vec24(&inner.into_bytes());
        w.into_bytes()
    }

    pub fn decode(body: &[u8]) -> Result<CertificateChain, WireError> {
        let mut r = Reader::new(body);
        let list = r.vec24()?;
        r.expect_end()?;
        let mut inner = Reader::new(list);
        let mut chain = Vec::new();
        while !inner.is_empty() {
            chain.push(inner.vec24()?.to_vec());
        }
        Ok(CertificateChain { chain })
    }
}

#[derive(Debug, Clone)]
pub struct CertificateRequest {
    pub cert_types: Vec<u8>,
    /// Present iff the negotiated version is TLS 1.2.
    pub sig_algs: Option<Vec<u16>>,
    pub ca_names: Vec<Vec<u8>>,
}

impl CertificateRequest {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.vec8(&self.cert_types);
        if let Some(algs) = &self.sig_algs {
            let mut inner = Writer::new();
            for &a in algs {
                inner.u16(a);
            }
            w.vec16(&inner.into_bytes());
        }
        let mut names = Writer::new();
        for name in &self.ca_names {
            names.vec16(name);
        }
        w.vec16(&names.into_bytes());
        w.into_bytes()
    }

    pub fn decode(body: &[u8], tls12: bool) -> Result<CertificateRequest, WireError> {
        let mut r = Reader::new(body);
        let cert_types = r.vec8()?.to_vec();
        let sig_algs = if tls12 {
            let bytes = r.vec16()?;
            if bytes.len() % 2 != 0 {
                return Err(WireError::Decode("bad signature algorithm list".into()));
            }
            Some(
                bytes
                    .chunks(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]))
                    .collect(),
            )
        } else {
            None
        };
        let names_block = r.vec16()?;
        r.expect_end()?;
        let mut names = Reader::new(names_block);
        let mut ca_names = Vec::new();
        while !names.is_empty() {
            ca_names.push(names.vec16()?.to_vec());
        }
        Ok(CertificateRequest { cert_types, sig_algs, ca_names })
    }
}

/// Builds the standard client extension block: P-256 support, uncompressed
/// points, and (for TLS 1.2 offers) accepted signature algorithms.
pub fn client_extensions(tls13_observation: bool) -> Vec<Extension> {
    let mut groups = Writer::new();
    groups.u16(2);
    groups.u16(NAMED_CURVE_SECP256R1);
    let mut sig_algs = Writer::new();
    let algs = [
        SIG_RSA_PKCS1_SHA256,
        SIG_RSA_PKCS1_SHA384,
        SIG_RSA_PKCS1_SHA1,
        SIG_ECDSA_SECP256R1_SHA256,
        SIG_ECDSA_SHA1,
    ];
    sig_algs.u16(algs.len() as u16 * 2);
    for a in algs {
        sig_algs.u16(a);
    }
    let mut exts = vec![
        Extension { id: EXT_SUPPORTED_GROUPS, data: groups.into_bytes() },
        Extension { id: EXT_EC_POINT_FORMATS, data: vec![1, 0] },
        Extension { id: EXT_SIGNATURE_ALGORITHMS, data: sig_algs.into_bytes() },
    ];
    if tls13_observation {
        exts.push(Extension {
            id: EXT_SUPPORTED_VERSIONS,
            data: vec![4, 0x03, 0x04, 0x03, 0x03],
        });
    }
    exts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_hello_round_trips_with_and_without_cookie() {
        let ch = ClientHello {
            client_version: 0x0303,
            random: [7u8; 32],
            session_id: vec![],
            cookie: None,
            suites: vec![0xC02F, 0x002F],
            compressions: vec![0],
            extensions: client_extensions(false),
        };
        let decoded = ClientHello::decode(&ch.encode(), false).unwrap();
        assert_eq!(decoded.suites, ch.suites);
        assert_eq!(decoded.extensions.len(), 3);

        let dch = ClientHello { cookie: Some(b"cookie".to_vec()), ..ch };
        let decoded = ClientHello::decode(&dch.encode(), true).unwrap();
        assert_eq!(decoded.cookie.as_deref(), Some(b"cookie".as_slice()));
    }

    #[test]
    fn server_hello_round_trips() {
        let sh = ServerHello {
            server_version: 0x0302,
            random: [9u8; 32],
            session_id: vec![1, 2, 3],
            suite: 0x0035,
            compression: 0,
            extensions: vec![],
        };
        let decoded = ServerHello::decode(&sh.encode()).unwrap();
        assert_eq!(decoded.server_version, 0x0302);
        assert_eq!(decoded.suite, 0x0035);
        assert_eq!(decoded.session_id, vec![1, 2, 3]);
    }

    #[test]
    fn certificate_chain_round_trips() {
        let msg = CertificateChain { chain: vec![vec![1, 2, 3], vec![4; 300]] };
        let decoded = CertificateChain::decode(&msg.encode()).unwrap();
        assert_eq!(decoded.chain.len(), 2);
        assert_eq!(decoded.chain[1].len(), 300);
    }

    #[test]
    fn certificate_request_version_shape_differs() {
        let req = CertificateRequest {
            cert_types: vec![1, 64],
            sig_algs: Some(vec![SIG_RSA_PKCS1_SHA256]),
            ca_names: vec![b"der-name".to_vec()],
        };
        let tls12 = CertificateRequest::decode(&req.encode(), true).unwrap();
        assert_eq!(tls12.sig_algs.as_deref(), Some(&[SIG_RSA_PKCS1_SHA256][..]));
        assert_eq!(tls12.ca_names.len(), 1);

        let legacy = CertificateRequest { sig_algs: None, ..req };
        let decoded = CertificateRequest::decode(&legacy.encode(), false).unwrap();
        assert!(decoded.sig_algs.is_none());
    }

    #[test]
    fn truncated_messages_are_rejected() {
        assert!(ClientHello::decode(&[0x03, 0x03, 0x00], false).is_err());
        assert!(ServerHello::decode(&[0x03]).is_err());
        assert!(CertificateChain::decode(&[0x00, 0x00, 0x05, 0x01]).is_err());
    }
}
