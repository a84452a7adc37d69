//! Key-strength and signature-hash grading.

use audit_certs::{CertificateRecord, KeyType, SigHash};

use crate::{Check, Finding};

/// Minimum acceptable RSA modulus length in bits.
const MIN_RSA_BITS: u32 = 2000;

/// Flags RSA keys below 2000 bits and signatures hashed with MD5 or SHA-1.
/// Elliptic-curve keys pass the length rule; their standard sizes are all
/// acceptable.
pub fn check_primitives(deployment: &str, cert: &CertificateRecord) -> Vec<Finding> {
    let mut findings = Vec::new();
    if cert.key_type == KeyType::Rsa && cert.key_bits < MIN_RSA_BITS {
        findings.push(Finding::new(
            deployment,
            Check::ShortKey,
            format!("RSA modulus is {} bits, below {MIN_RSA_BITS}", cert.key_bits),
        ));
    }
    if matches!(cert.sig_hash, SigHash::Md5 | SigHash::Sha1) {
        let hash = match cert.sig_hash {
            SigHash::Md5 => "MD5",
            _ => "SHA1",
        };
        findings.push(Finding::new(
            deployment,
            Check::WeakSigHash,
            format!("certificate signature uses {hash}"),
        ));
    }
    findings
}
