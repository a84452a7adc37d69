//! Chain building and signature verification against trust-store roots.
//!
//! Verification is purely cryptographic plus issuer-name chaining: no
//! revocation and no time-window checks, because trust-anchor
//! classification asks only whether a path of valid signatures reaches a
//! store root (an expired public-CA certificate is still public-CA-issued).

use std::collections::BTreeMap;
use std::path::Path;

use md5::Md5;
use p256::ecdsa::signature::hazmat::PrehashVerifier;
use rsa::{BigUint, Pkcs1v15Sign, RsaPublicKey};
use sha1::Sha1;
use sha2::{Digest, Sha256, Sha384, Sha512};
use x509_parser::prelude::*;
use x509_parser::public_key::PublicKey;

/// Maximum chain depth when walking from leaf toward a root.
const MAX_DEPTH: usize = 4;

/// Named root bundles, mirroring the stock trust stores the grading
/// consults (a certificate is publicly anchored if any one store accepts
/// it).
#[derive(Debug, Default)]
pub struct TrustStores {
    slots: BTreeMap<String, Vec<Vec<u8>>>,
}

/// Store slots consulted by default; loaders accept any file name but
/// reports key off these.
pub const STANDARD_SLOTS: [&str; 6] = [
    "ios_macos",
    "windows",
    "android",
    "openjdk",
    "mozilla_nss",
    "oracle_jdk",
];

impl TrustStores {
    pub fn empty() -> TrustStores {
        TrustStores::default()
    }

    /// Loads every `*.pem` bundle in a directory; the file stem names the
    /// slot.
    pub fn from_dir(dir: &Path) -> std::io::Result<TrustStores> {
        let mut stores = TrustStores::default();
        let mut entries: Vec<_> = std::fs::read_dir(dir)?
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "pem"))
            .collect();
        entries.sort();
        for path in entries {
            let slot = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("unnamed")
                .to_string();
            let pem_text = std::fs::read(&path)?;
            stores.add_slot_pem(&slot, &pem_text);
        }
        Ok(stores)
    }

    /// Adds a slot from PEM bundle bytes, skipping undecodable blocks.
    pub fn add_slot_pem(&mut self, slot: &str, pem_bytes: &[u8]) {
        let roots: Vec<Vec<u8>> = Pem::iter_from_buffer(pem_bytes)
            .filter_map(|block| block.ok())
            .filter(|block| block.label == "CERTIFICATE")
            .map(|block| block.contents)
            .collect();
        self.slots.entry(slot.to_string()).or_default().extend(roots);
    }

    pub fn add_slot_der(&mut self, slot: &str, roots: Vec<Vec<u8>>) {
        self.slots.entry(slot.to_string()).or_default().extend(roots);
    }

    pub fn slot_names(&self) -> Vec<&str> {
        self.slots.keys().map(String::as_str).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.values().all(Vec::is_empty)
    }

    fn all_roots(&self) -> impl Iterator<Item = &Vec<u8>> {
        self.slots.values().flatten()
    }
}

/// True when `child` carries a signature made by the key in `parent`.
pub fn verify_signed_by(child_der: &[u8], parent_der: &[u8]) -> bool {
    let Ok((_, child)) = X509Certificate::from_der(child_der) else {
        return false;
    };
    let Ok((_, parent)) = X509Certificate::from_der(parent_der) else {
        return false;
    };
    if child.issuer() != parent.subject() {
        return false;
    }
    let tbs = child.tbs_certificate.as_ref();
    let signature = &child.signature_value.data;
    let sig_oid = child.signature_algorithm.algorithm.to_id_string();

    match parent.public_key().parsed() {
        Ok(PublicKey::RSA(rsa_key)) => {
            let n = BigUint::from_bytes_be(rsa_key.modulus);
            let e = BigUint::from_bytes_be(rsa_key.exponent);
            let Ok(public) = RsaPublicKey::new(n, e) else {
                return false;
            };
            let (padding, digest): (Pkcs1v15Sign, Vec<u8>) = match sig_oid.as_str() {
                "1.2.840.113549.1.1.4" => {
                    (Pkcs1v15Sign::new::<Md5>(), Md5::digest(tbs).to_vec())
                }
                "1.2.840.113549.1.1.5" => {
                    (Pkcs1v15Sign::new::<Sha1>(), Sha1::digest(tbs).to_vec())
                }
                "1.2.840.113549.1.1.11" => {
                    (Pkcs1v15Sign::new::<Sha256>(), Sha256::digest(tbs).to_vec())
                }
                "1.2.840.113549.1.1.12" => {
                    (Pkcs1v15Sign::new::<Sha384>(), Sha384::digest(tbs).to_vec())
                }
                "1.2.840.113549.1.1.13" => {
                    (Pkcs1v15Sign::new::<Sha512>(), Sha512::digest(tbs).to_vec())
                }
                _ => return false,
            };
            public.verify(padding, &digest, signature).is_ok()
        }
        Ok(PublicKey::EC(point)) => {
            let Ok(key) = p256::ecdsa::VerifyingKey::from_sec1_bytes(point.data()) else {
                return false;
            };
            let Ok(sig) = p256::ecdsa::Signature::from_der(signature) else {
                return false;
            };
            let digest: Vec<u8> = match sig_oid.as_str() {
                "1.2.840.10045.4.3.2" => Sha256::digest(tbs).to_vec(),
                "1.2.840.10045.4.3.3" => Sha384::digest(tbs).to_vec(),
                "1.2.840.10045.4.3.4" => Sha512::digest(tbs).to_vec(),
                "1.2.840.10045.4.1" => Sha1::digest(tbs).to_vec(),
                _ => return false,
            };
            key.verify_prehash(&digest, &sig).is_ok()
        }
        _ => false,
    }
}

/// True when a signature path from `chain[0]` reaches any store root.
///
/// Intermediates may come from the presented chain in any order; the leaf
/// may also be signed by a root directly.
pub fn chain_validates(chain: &[Vec<u8>], stores: &TrustStores) -> bool {
    if chain.is_empty() {
        return false;
    }
    validates_inner(&chain[0], chain, stores, MAX_DEPTH)
}

fn validates_inner(
    current: &[u8],
    chain: &[Vec<u8>],
    stores: &TrustStores,
    depth: usize,
) -> bool {
    if depth == 0 {
        return false;
    }
    for root in stores.all_roots() {
        if verify_signed_by(current, root) {
            return true;
        }
        // The presented chain may include the root itself.
        if current == root.as_slice() {
            return true;
        }
    }
    for candidate in chain {
        if candidate.as_slice() == current {
            continue;
        }
        if verify_signed_by(current, candidate)
            && validates_inner(candidate, chain, stores, depth - 1)
        {
            return true;
        }
    }
    false
}
