//! Pseudorandom functions for key derivation and Finished verification.
//!
//! TLS 1.0 and 1.1 combine HMAC-MD5 and HMAC-SHA1 expansions of the two
//! secret halves with XOR; TLS 1.2 uses a single HMAC-SHA256 or HMAC-SHA384
//! expansion selected by the negotiated suite.

use hmac::{Hmac, Mac};
use md5::Md5;
use sha1::Sha1;
use sha2::{Digest, Sha256, Sha384};

use crate::suites::PrfHash;
use crate::Version;

macro_rules! hmac_fn {
    ($name:ident, $digest:ty) => {
        fn $name(key: &[u8], data: &[u8]) -> Vec<u8> {
            let mut mac =
                <Hmac<$digest> as Mac>::new_from_slice(key).expect("hmac accepts any key size");
            mac.update(data);
            mac.finalize().into_bytes().to_vec()
        }
    };
}

hmac_fn!(hmac_md5, Md5);
hmac_fn!(hmac_sha1, Sha1);
hmac_fn!(hmac_sha256, Sha256);
hmac_fn!(hmac_sha384, Sha384);

fn p_hash(
    hm: fn(&[u8], &[u8]) -> Vec<u8>,
    secret: &[u8],
    seed: &[u8],
    out_len: usize,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(out_len);
    let mut a = hm(secret, seed);
    while out.len() < out_len {
        let mut block_seed = a.clone();
        block_seed.extend_from_slice(seed);
        out.extend_from_slice(&hm(secret, &block_seed));
        a = hm(secret, &a);
    }
    out.truncate(out_len);
    out
}

fn prf_legacy(secret: &[u8], label: &[u8], seed: &[u8], out_len: usize) -> Vec<u8> {
    let half = secret.len().div_ceil(2);
    let s1 = &secret[..half];
    let s2 = &secret[secret.len() - half..];
    let mut label_seed = label.to_vec();
    label_seed.extend_from_slice(seed);
    let md5_part = p_hash(hmac_md5, s1, &label_seed, out_len);
    let sha_part = p_hash(hmac_sha1, s2, &label_seed, out_len);
    md5_part
        .iter()
        .zip(sha_part.iter())
        .map(|(a, b)| a ^ b)
        .collect()
}

fn prf_tls12(hash: PrfHash, secret: &[u8], label: &[u8], seed: &[u8], out_len: usize) -> Vec<u8> {
    let mut label_seed = label.to_vec();
    label_seed.extend_from_slice(seed);
    match hash {
        PrfHash::Sha256 => p_hash(hmac_sha256, secret, &label_seed, out_len),
        PrfHash::Sha384 => p_hash(hmac_sha384, secret, &label_seed, out_len),
    }
}

/// Version-dispatched PRF.
pub fn prf(
    version: Version,
    hash: PrfHash,
    secret: &[u8],
    label: &[u8],
    seed: &[u8],
    out_len: usize,
) -> Vec<u8> {
    if version.uses_tls12_prf() {
        prf_tls12(hash, secret, label, seed, out_len)
    } else {
        prf_legacy(secret, label, seed, out_len)
    }
}

/// Master secret from the premaster secret and both hello randoms.
pub fn master_secret(
    version: Version,
    hash: PrfHash,
    premaster: &[u8],
    client_random: &[u8; 32],
    server_random: &[u8; 32],
) -> Vec<u8> {
    let mut seed = client_random.to_vec();
    seed.extend_from_slice(server_random);
    prf(version, hash, premaster, b"master secret", &seed, 48)
}

/// Key block for record protection; the caller slices it per suite layout.
pub fn key_block(
    version: Version,
    hash: PrfHash,
    master: &[u8],
    client_random: &[u8; 32],
    server_random: &[u8; 32],
    out_len: usize,
) -> Vec<u8> {
    let mut seed = server_random.to_vec();
    seed.extend_from_slice(client_random);
    prf(version, hash, master, b"key expansion", &seed, out_len)
}

/// Hash of the handshake transcript as used in the Finished computation.
pub fn transcript_hash(version: Version, hash: PrfHash, transcript: &[u8]) -> Vec<u8> {
    if version.uses_tls12_prf() {
        match hash {
            PrfHash::Sha256 => Sha256::digest(transcript).to_vec(),
            PrfHash::Sha384 => Sha384::digest(transcript).to_vec(),
        }
    } else {
        let mut out = Md5::digest(transcript).to_vec();
        out.extend_from_slice(&Sha1::digest(transcript));
        out
    }
}

/// Twelve-byte Finished payload for one side of the handshake.
pub fn finished_verify_data(
    version: Version,
    hash: PrfHash,
    master: &[u8],
    from_client: bool,
    transcript: &[u8],
) -> Vec<u8> {
    let label: &[u8] = if from_client {
        b"client finished"
    } else {
        b"server finished"
    };
    let seed = transcript_hash(version, hash, transcript);
    prf(version, hash, master, label, &seed, 12)
}
