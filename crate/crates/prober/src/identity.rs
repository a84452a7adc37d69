//! The scanner's own client certificate.
//!
//! Some endpoints demand a client certificate before they finish a
//! handshake. The scanner answers with a self-signed RSA certificate whose
//! common name is a contact URL, so an operator inspecting their logs can
//! find out who probed them and how to opt out. The identity is minted once
//! per installation and reused across scans, never regenerated per target.

use std::fs;
use std::path::Path;

use audit_certs::{issue, CertSpec, KeyPair, Name, SigAlg};
use audit_tlswire::ClientIdentity;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use chrono::{Duration as ChronoDuration, Utc};
use rsa::pkcs1::{DecodeRsaPrivateKey, EncodeRsaPrivateKey};
use serde::{Deserialize, Serialize};

use crate::ProbeError;

/// Mints a fresh self-signed scanner certificate carrying the contact URL.
pub fn generate_scanner_identity(contact_url: &str) -> ClientIdentity {
    let key = KeyPair::generate_rsa(2048);
    let now = Utc::now();
    let name = Name::common_name(contact_url);
    let spec = CertSpec {
        subject: name.clone(),
        issuer: name,
        serial: rand::random::<u64>() | 1,
        not_before: now - ChronoDuration::days(1),
        not_after: now + ChronoDuration::days(730),
        sig_alg: SigAlg::RsaSha256,
        is_ca: false,
    };
    let cert = issue(&spec, &key, &key);
    ClientIdentity { chain: vec![cert], key }
}

#[derive(Serialize, Deserialize)]
struct StoredIdentity {
    certificate: String,
    rsa_key: String,
}

/// Writes the identity to disk so later scans present the same certificate.
pub fn save_identity(path: &Path, identity: &ClientIdentity) -> Result<(), ProbeError> {
    let KeyPair::Rsa(key) = &identity.key else {
        return Err(ProbeError::Identity("scanner identity must use an RSA key".into()));
    };
    let key_der = key
        .to_pkcs1_der()
        .map_err(|e| ProbeError::Identity(format!("key encoding failed: {e}")))?;
    let stored = StoredIdentity {
        certificate: BASE64.encode(&identity.chain[0]),
        rsa_key: BASE64.encode(key_der.as_bytes()),
    };
    let body = serde_json::to_string_pretty(&stored).expect("plain struct serializes");
    fs::write(path, body).map_err(|e| ProbeError::Identity(e.to_string()))
}

/// Reads a previously saved identity back from disk.
pub fn load_identity(path: &Path) -> Result<ClientIdentity, ProbeError> {
    let body = fs::read_to_string(path).map_err(|e| ProbeError::Identity(e.to_string()))?;
    let stored: StoredIdentity =
        serde_json::from_str(&body).map_err(|e| ProbeError::Identity(e.to_string()))?;
    let cert = BASE64
        .decode(&stored.certificate)
        .map_err(|e| ProbeError::Identity(format!("bad certificate encoding: {e}")))?;
    let key_der = BASE64
        .decode(&stored.rsa_key)
        .map_err(|e| ProbeError::Identity(format!("bad key encoding: {e}")))?;
    let key = rsa::RsaPrivateKey::from_pkcs1_der(&key_der)
        .map_err(|e| ProbeError::Identity(format!("bad key material: {e}")))?;
    Ok(ClientIdentity { chain: vec![cert], key: KeyPair::Rsa(key) })
}

/// Loads the per-installation identity, minting and saving one on first use.
pub fn load_or_generate_identity(
    path: &Path,
    contact_url: &str,
) -> Result<ClientIdentity, ProbeError> {
    if path.exists() {
        return load_identity(path);
    }
    let identity = generate_scanner_identity(contact_url);
    save_identity(path, &identity)?;
    Ok(identity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use audit_certs::CertificateRecord;

    const CONTACT: &str = "https://scan-contact.example.net/why";

    #[test]
    fn identity_is_self_signed_rsa_with_contact_name() {
        let identity = generate_scanner_identity(CONTACT);
        assert_eq!(identity.chain.len(), 1);
        let record = CertificateRecord::from_der(&identity.chain[0]).unwrap();
        assert!(record.subject.contains(CONTACT));
        assert_eq!(record.subject, record.issuer);
        assert_eq!(record.key_type, audit_certs::KeyType::Rsa);
        assert!(record.key_bits >= 2048);
        assert!(audit_certs::verify_signed_by(&identity.chain[0], &identity.chain[0]));
    }

    #[test]
    fn saved_identity_round_trips_and_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scanner-identity.json");
        let first = load_or_generate_identity(&path, CONTACT).unwrap();
        let second = load_or_generate_identity(&path, CONTACT).unwrap();
        assert_eq!(first.chain, second.chain);
        let KeyPair::Rsa(a) = &first.key else { panic!("expected RSA") };
        let KeyPair::Rsa(b) = &second.key else { panic!("expected RSA") };
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_installs_mint_distinct_certificates() {
        let a = generate_scanner_identity(CONTACT);
        let b = generate_scanner_identity(CONTACT);
        assert_ne!(a.chain, b.chain);
    }
}
