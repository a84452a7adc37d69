//! X.509 utilities for the audit toolkit: a DER writer and certificate
//! minter for lab fixtures, a parser producing flat records for grading,
//! and chain verification against pluggable trust-store bundles.

pub mod der;
pub mod gen;
mod parse;
mod verify;

pub use gen::{issue, CertSpec, DnAttr, KeyPair, Name, SigAlg};
pub use parse::{fingerprint, subject_common_name, CertificateRecord, KeyType, ParseError, SigHash};
pub use verify::{chain_validates, verify_signed_by, TrustStores, STANDARD_SLOTS};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;

/// Renders a DER certificate as a PEM block.
pub fn to_pem(der: &[u8]) -> String {
    let encoded = BASE64.encode(der);
    let mut out = String::from("-----BEGIN CERTIFICATE-----\n");
    for chunk in encoded.as_bytes().chunks(64) {
        out.push_str(std::str::from_utf8(chunk).expect("base64 is ASCII"));
        out.push('\n');
    }
    out.push_str("-----END CERTIFICATE-----\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn pem_round_trips_through_store_loader() {
        let key = KeyPair::generate_rsa(1024);
        let spec = CertSpec {
            subject: Name::common_name("Round Trip Root"),
            issuer: Name::common_name("Round Trip Root"),
            serial: 3,
            not_before: chrono::Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(),
            not_after: chrono::Utc.with_ymd_and_hms(2031, 1, 1, 0, 0, 0).unwrap(),
            sig_alg: SigAlg::RsaSha256,
            is_ca: true,
        };
        let der = issue(&spec, &key, &key);
        let pem = to_pem(&der);

        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("mozilla_nss.pem"), &pem).unwrap();
        let stores = TrustStores::from_dir(dir.path()).unwrap();
        assert_eq!(stores.slot_names(), vec!["mozilla_nss"]);
        assert!(chain_validates(&[der], &stores));
    }
}
