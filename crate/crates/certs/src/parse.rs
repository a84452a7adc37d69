//! Certificate parsing into the flat record the assessor grades.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use x509_parser::prelude::*;
use x509_parser::public_key::PublicKey;

/// Public key family of a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyType {
    Rsa,
    Ecdsa,
    Other,
}

/// Hash function inside the certificate signature algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigHash {
    Md5,
    Sha1,
    Sha256,
    Sha384,
    Sha512,
    Other,
}

/// Parsed certificate with the fields the security checks consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    /// Lowercase hex SHA-256 of the DER encoding.
    pub fingerprint: String,
    pub subject: String,
    pub issuer: String,
    pub not_before: DateTime<Utc>,
    pub not_after: DateTime<Utc>,
    pub key_type: KeyType,
    pub key_bits: u32,
    pub sig_hash: SigHash,
    /// Set by trust-anchor classification once stores are consulted.
    pub chain_validates_public: bool,
    /// Key usage flag names, for the template-entropy analysis.
    pub key_usage: Vec<String>,
    pub is_ca: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("certificate DER does not parse: {0}")]
    Der(String),
    #[error("certificate validity timestamps out of range")]
    Time,
}

/// The subject common name of a DER certificate, when one is present.
pub fn subject_common_name(der: &[u8]) -> Option<String> {
    let (_, cert) = X509Certificate::from_der(der).ok()?;
    let cn = cert
        .subject()
        .iter_common_name()
        .next()
        .and_then(|cn| cn.as_str().ok())
        .map(str::to_owned);
    cn
}

/// SHA-256 fingerprint of a DER blob as lowercase hex.
pub fn fingerprint(der: &[u8]) -> String {
    let digest = Sha256::digest(der);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

impl CertificateRecord {
    pub fn from_der(der: &[u8]) -> Result<CertificateRecord, ParseError> {
        let (_, cert) = X509Certificate::from_der(der)
            .map_err(|e| ParseError::Der(e.to_string()))?;

        let not_before = DateTime::<Utc>::from_timestamp(
            cert.validity().not_before.timestamp(),
            0,
        )
        .ok_or(ParseError::Time)?;
        let not_after =
            DateTime::<Utc>::from_timestamp(cert.validity().not_after.timestamp(), 0)
                .ok_or(ParseError::Time)?;

        let (key_type, key_bits) = match cert.public_key().parsed() {
            // Exact modulus bit length; the 1999-vs-2000-bit distinction
            // matters for the short-key rule.
            Ok(PublicKey::RSA(rsa_pub)) => (
                KeyType::Rsa,
                rsa::BigUint::from_bytes_be(rsa_pub.modulus).bits() as u32,
            ),
            Ok(PublicKey::EC(points)) => (KeyType::Ecdsa, points.key_size() as u32),
            _ => (KeyType::Other, 0),
        };

        let sig_hash = match cert.signature_algorithm.algorithm.to_id_string().as_str() {
            "1.2.840.113549.1.1.4" => SigHash::Md5,
            "1.2.840.113549.1.1.5" | "1.2.840.10045.4.1" => SigHash::Sha1,
            "1.2.840.113549.1.1.11" | "1.2.840.10045.4.3.2" => SigHash::Sha256,
            "1.2.840.113549.1.1.12" | "1.2.840.10045.4.3.3" => SigHash::Sha384,
            "1.2.840.113549.1.1.13" | "1.2.840.10045.4.3.4" => SigHash::Sha512,
            _ => SigHash::Other,
        };

        let key_usage = cert
            .key_usage()
            .ok()
            .flatten()
            .map(|ku| key_usage_names(ku.value))
            .unwrap_or_default();
        let is_ca = cert
            .basic_constraints()
            .ok()
            .flatten()
            .map(|bc| bc.value.ca)
            .unwrap_or(false);

        Ok(CertificateRecord {
            fingerprint: fingerprint(der),
            subject: cert.subject().to_string(),
            issuer: cert.issuer().to_string(),
            not_before,
            not_after,
            key_type,
            key_bits,
            sig_hash,
            chain_validates_public: false,
            key_usage,
            is_ca,
        })
    }

    /// Issuer equals subject, the self-signed shape.
    pub fn self_issued(&self) -> bool {
        self.issuer == self.subject
    }
}

fn key_usage_names(ku: &KeyUsage) -> Vec<String> {
    let mut names = Vec::new();
    let flags: [(bool, &str); 7] = [
        (ku.digital_signature(), "digital_signature"),
        (ku.non_repudiation(), "non_repudiation"),
        (ku.key_encipherment(), "key_encipherment"),
        (ku.data_encipherment(), "data_encipherment"),
        (ku.key_agreement(), "key_agreement"),
        (ku.key_cert_sign(), "key_cert_sign"),
        (ku.crl_sign(), "crl_sign"),
    ];
    for (set, name) in flags {
        if set {
            names.push(name.to_string());
        }
    }
    names
}
