//! Key exchange: RSA key transport, ephemeral ECDHE on P-256, and ephemeral
//! DHE over the 2048-bit MODP group, plus ServerKeyExchange signatures in
//! both the current and the legacy styles.

use num_bigint_dig::BigUint;
use p256::ecdsa::signature::hazmat::{PrehashSigner, PrehashVerifier};
use p256::ecdsa::signature::{Signer, Verifier};
use rand::rngs::OsRng;
use rand::RngCore;
use rsa::Pkcs1v15Sign;
use sha1::{Digest, Sha1};
use sha2::Sha256;
use x509_parser::prelude::FromDer;

use audit_certs::gen::KeyPair;

use crate::msgs::{NAMED_CURVE_SECP256R1, SIG_ECDSA_SECP256R1_SHA256, SIG_RSA_PKCS1_SHA256};
use crate::suites::KeyExchange;
use crate::wire::{Reader, Writer};
use crate::{Version, WireError};

/// 2048-bit MODP prime (generator 2) used for ephemeral DHE.
pub const DHE_PRIME_2048: [u8; 256] = [
    0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xC9, 0x0F, 0xDA, 0xA2, 0x21, 0x68, 0xC2,
    0x34, 0xC4, 0xC6, 0x62, 0x8B, 0x80, 0xDC, 0x1C, 0xD1, 0x29, 0x02, 0x4E, 0x08, 0x8A, 0x67,
    0xCC, 0x74, 0x02, 0x0B, 0xBE, 0xA6, 0x3B, 0x13, 0x9B, 0x22, 0x51, 0x4A, 0x08, 0x79, 0x8E,
    0x34, 0x04, 0xDD, 0xEF, 0x95, 0x19, 0xB3, 0xCD, 0x3A, 0x43, 0x1B, 0x30, 0x2B, 0x0A, 0x6D,
    0xF2, 0x5F, 0x14, 0x37, 0x4F, 0xE1, 0x35, 0x6D, 0x6D, 0x51, 0xC2, 0x45, 0xE4, 0x85, 0xB5,
    0x76, 0x62, 0x5E, 0x7E, 0xC6, 0xF4, 0x4C, 0x42, 0xE9, 0xA6, 0x37, 0xED, 0x6B, 0x0B, 0xFF,
    0x5C, 0xB6, 0xF4, 0x06, 0xB7, 0xED, 0xEE, 0x38, 0x6B, 0xFB, 0x5A, 0x89, 0x9F, 0xA5, 0xAE,
    0x9F, 0x24, 0x11, 0x7C, 0x4B, 0x1F, 0xE6, 0x49, 0x28, 0x66, 0x51, 0xEC, 0xE4, 0x5B, 0x3D,
    0xC2, 0x00, 0x7C, 0xB8, 0xA1, 0x63, 0xBF, 0x05, 0x98, 0xDA, 0x48, 0x36, 0x1C, 0x55, 0xD3,
    0x9A, 0x69, 0x16, 0x3F, 0xA8, 0xFD, 0x24, 0xCF, 0x5F, 0x83, 0x65, 0x5D, 0x23, 0xDC, 0xA3,
    0xAD, 0x96, 0x1C, 0x62, 0xF3, 0x56, 0x20, 0x85, 0x52, 0xBB, 0x9E, 0xD5, 0x29, 0x07, 0x70,
    0x96, 0x96, 0x6D, 0x67, 0x0C, 0x35, 0x4E, 0x4A, 0xBC, 0x98, 0x04, 0xF1, 0x74, 0x6C, 0x08,
    0xCA, 0x18, 0x21, 0x7C, 0x32, 0x90, 0x5E, 0x46, 0x2E, 0x36, 0xCE, 0x3B, 0xE3, 0x9E, 0x77,
    0x2C, 0x18, 0x0E, 0x86, 0x03, 0x9B, 0x27, 0x83, 0xA2, 0xEC, 0x07, 0xA2, 0x8F, 0xB5, 0xC5,
    0x5D, 0xF0, 0x6F, 0x4C, 0x52, 0xC9, 0xDE, 0x2B, 0xCB, 0xF6, 0x95, 0x58, 0x17, 0x18, 0x39,
    0x95, 0x49, 0x7C, 0xEA, 0x95, 0x6A, 0xE5, 0x15, 0xD2, 0x26, 0x18, 0x98, 0xFA, 0x05, 0x10,
    0x15, 0x72, 0x8E, 0x5A, 0x8A, 0xAC, 0xAA, 0x68, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF,
    0xFF,
];

/// Leaf certificate public key usable for key exchange or signatures.
pub enum LeafKey {
    Rsa(rsa::RsaPublicKey),
    P256(p256::ecdsa::VerifyingKey),
}

/// Extracts the subject public key from a DER certificate.
pub fn leaf_public_key(cert_der: &[u8]) -> Result<LeafKey, WireError> {
    let (_, cert) = x509_parser::certificate::X509Certificate::from_der(cert_der)
        .map_err(|e| WireError::Decode(format!("certificate: {e}")))?;
    match cert.public_key().parsed() {
        Ok(x509_parser::public_key::PublicKey::RSA(rsa_key)) => {
            let n = BigUint::from_bytes_be(rsa_key.modulus);
            let e = BigUint::from_bytes_be(rsa_key.exponent);
            let key = rsa::RsaPublicKey::new(n, e)
                .map_err(|e| WireError::Crypto(format!("RSA key: {e}")))?;
            Ok(LeafKey::Rsa(key))
        }
        Ok(x509_parser::public_key::PublicKey::EC(point)) => {
            let key = p256::ecdsa::VerifyingKey::from_sec1_bytes(point.data())
                .map_err(|e| WireError::Crypto(format!("EC key: {e}")))?;
            Ok(LeafKey::P256(key))
        }
        Ok(_) => Err(WireError::Crypto("unsupported key type in certificate".into())),
        Err(e) => Err(WireError::Decode(format!("public key: {e}"))),
    }
}

/// Server-side ephemeral state held between ServerKeyExchange and
/// ClientKeyExchange.
pub enum ServerEphemeral {
    None,
    Ecdhe(p256::ecdh::EphemeralSecret),
    Dhe { exponent: BigUint },
}

/// ServerKeyExchange parameter bytes plus the secret needed later.
pub struct ServerKx {
    pub params: Vec<u8>,
    pub ephemeral: ServerEphemeral,
}

/// Builds the key-exchange parameters a server offers, if the suite needs
/// a ServerKeyExchange at all.
pub fn server_kx(kx: KeyExchange) -> Option<ServerKx> {
    match kx {
        KeyExchange::Rsa => None,
        KeyExchange::EcdheRsa | KeyExchange::EcdheEcdsa => {
            let secret = p256::ecdh::EphemeralSecret::random(&mut OsRng);
            let point = secret.public_key().to_sec1_bytes();
            let mut w = Writer::new();
            w.u8(3);
            w.u16(NAMED_CURVE_SECP256R1);
            w.vec8(&point);
            Some(ServerKx { params: w.into_bytes(), ephemeral: ServerEphemeral::Ecdhe(secret) })
        }
        KeyExchange::DheRsa => {
            let p = BigUint::from_bytes_be(&DHE_PRIME_2048);
            let g = BigUint::from(2u32);
            let mut exp_bytes = [0u8; 32];
            OsRng.fill_bytes(&mut exp_bytes);
            let exponent = BigUint::from_bytes_be(&exp_bytes);
            let public = g.modpow(&exponent, &p);
            let mut w = Writer::new();
            w.vec16(&DHE_PRIME_2048);
            w.vec16(&[2]);
            w.vec16(&public.to_bytes_be());
            Some(ServerKx { params: w.into_bytes(), ephemeral: ServerEphemeral::Dhe { exponent } })
        }
    }
}

/// Signs `client_random || server_random || params` in the style the
/// negotiated version expects and returns the signature block for the
/// ServerKeyExchange body.
pub fn sign_server_params(
    version: Version,
    key: &KeyPair,
    client_random: &[u8; 32],
    server_random: &[u8; 32],
    params: &[u8],
) -> Result<Vec<u8>, WireError> {
    let mut data = Vec::with_capacity(64 + params.len());
    data.extend_from_slice(client_random);
    data.extend_from_slice(server_random);
    data.extend_from_slice(params);
    let mut w = Writer::new();
    if version.uses_tls12_prf() {
        match key {
            KeyPair::Rsa(rsa_key) => {
                let digest = Sha256::digest(&data);
                let sig = rsa_key
                    .sign(Pkcs1v15Sign::new::<Sha256>(), &digest)
                    .map_err(|e| WireError::Crypto(format!("RSA sign: {e}")))?;
                w.u16(SIG_RSA_PKCS1_SHA256);
                w.vec16(&sig);
            }
            KeyPair::EcdsaP256(ec_key) => {
                let sig: p256::ecdsa::Signature = ec_key.sign(&data);
                w.u16(SIG_ECDSA_SECP256R1_SHA256);
                w.vec16(sig.to_der().as_bytes());
            }
        }
    } else {
        match key {
            KeyPair::Rsa(rsa_key) => {
                let mut digest = md5::Md5::digest(&data).to_vec();
                digest.extend_from_slice(&Sha1::digest(&data));
                let sig = rsa_key
                    .sign(Pkcs1v15Sign::new_unprefixed(), &digest)
                    .map_err(|e| WireError::Crypto(format!("RSA sign: {e}")))?;
                w.vec16(&sig);
            }
            KeyPair::EcdsaP256(ec_key) => {
                let digest = Sha1::digest(&data);
                let sig: p256::ecdsa::Signature = ec_key
                    .sign_prehash(&digest)
                    .map_err(|e| WireError::Crypto(format!("ECDSA sign: {e}")))?;
                w.vec16(sig.to_der().as_bytes());
            }
        }
    }
    Ok(w.into_bytes())
}

/// Verifies a ServerKeyExchange signature block against the leaf key.
pub fn verify_server_params(
    version: Version,
    leaf: &LeafKey,
    client_random: &[u8; 32],
    server_random: &[u8; 32],
    params: &[u8],
    sig_block: &mut Reader,
) -> Result<(), WireError> {
    let mut data = Vec::with_capacity(64 + params.len());
    data.extend_from_slice(client_random);
    data.extend_from_slice(server_random);
    data.extend_from_slice(params);
    if version.uses_tls12_prf() {
        let alg = sig_block.u16()?;
        let sig = sig_block.vec16()?;
        match (alg, leaf) {
            (SIG_RSA_PKCS1_SHA256, LeafKey::Rsa(key)) => {
                let digest = Sha256::digest(&data);
                key.verify(Pkcs1v15Sign::new::<Sha256>(), &digest, sig)
                    .map_err(|_| WireError::Crypto("bad key-exchange signature".into()))
            }
            (SIG_ECDSA_SECP256R1_SHA256, LeafKey::P256(key)) => {
                let sig = p256::ecdsa::Signature::from_der(sig)
                    .map_err(|_| WireError::Decode("malformed ECDSA signature".into()))?;
                key.verify(&data, &sig)
                    .map_err(|_| WireError::Crypto("bad key-exchange signature".into()))
            }
            _ => Err(WireError::Crypto(format!(
                "signature algorithm {alg:#06x} does not match the certificate key"
            ))),
        }
    } else {
        let sig = sig_block.vec16()?;
        match leaf {
            LeafKey::Rsa(key) => {
                let mut digest = md5::Md5::digest(&data).to_vec();
                digest.extend_from_slice(&Sha1::digest(&data));
                key.verify(Pkcs1v15Sign::new_unprefixed(), &digest, sig)
                    .map_err(|_| WireError::Crypto("bad key-exchange signature".into()))
            }
            LeafKey::P256(key) => {
                let digest = Sha1::digest(&data);
                let sig = p256::ecdsa::Signature::from_der(sig)
                    .map_err(|_| WireError::Decode("malformed ECDSA signature".into()))?;
                key.verify_prehash(&digest, &sig)
                    .map_err(|_| WireError::Crypto("bad key-exchange signature".into()))
            }
        }
    }
}

/// Length of the key-exchange parameter prefix inside a ServerKeyExchange
/// body, so the signature block that follows can be located.
pub fn ske_params_len(kx: KeyExchange, body: &[u8]) -> Result<usize, WireError> {
    let mut r = Reader::new(body);
    match kx {
        KeyExchange::Rsa => {
            return Err(WireError::Decode(
                "RSA key transport has no ServerKeyExchange".into(),
            ))
        }
        KeyExchange::EcdheRsa | KeyExchange::EcdheEcdsa => {
            r.u8()?;
            r.u16()?;
            r.vec8()?;
        }
        KeyExchange::DheRsa => {
            r.vec16()?;
            r.vec16()?;
            r.vec16()?;
        }
    }
    Ok(body.len() - r.remaining())
}

/// Signs the handshake transcript for a CertificateVerify message.
pub fn sign_transcript(
    version: Version,
    key: &KeyPair,
    transcript: &[u8],
) -> Result<Vec<u8>, WireError> {
    let mut w = Writer::new();
    if version.uses_tls12_prf() {
        match key {
            KeyPair::Rsa(rsa_key) => {
                let digest = Sha256::digest(transcript);
                let sig = rsa_key
                    .sign(Pkcs1v15Sign::new::<Sha256>(), &digest)
                    .map_err(|e| WireError::Crypto(format!("RSA sign: {e}")))?;
                w.u16(SIG_RSA_PKCS1_SHA256);
                w.vec16(&sig);
            }
            KeyPair::EcdsaP256(ec_key) => {
                let sig: p256::ecdsa::Signature = ec_key.sign(transcript);
                w.u16(SIG_ECDSA_SECP256R1_SHA256);
                w.vec16(sig.to_der().as_bytes());
            }
        }
    } else {
        match key {
            KeyPair::Rsa(rsa_key) => {
                let mut digest = md5::Md5::digest(transcript).to_vec();
                digest.extend_from_slice(&Sha1::digest(transcript));
                let sig = rsa_key
                    .sign(Pkcs1v15Sign::new_unprefixed(), &digest)
                    .map_err(|e| WireError::Crypto(format!("RSA sign: {e}")))?;
                w.vec16(&sig);
            }
            KeyPair::EcdsaP256(ec_key) => {
                let digest = Sha1::digest(transcript);
                let sig: p256::ecdsa::Signature = ec_key
                    .sign_prehash(&digest)
                    .map_err(|e| WireError::Crypto(format!("ECDSA sign: {e}")))?;
                w.vec16(sig.to_der().as_bytes());
            }
        }
    }
    Ok(w.into_bytes())
}

/// Checks a CertificateVerify signature against the sender's leaf key.
pub fn verify_transcript_signature(
    version: Version,
    leaf: &LeafKey,
    transcript: &[u8],
    body: &[u8],
) -> Result<(), WireError> {
    let mut r = Reader::new(body);
    let result = if version.uses_tls12_prf() {
        let alg = r.u16()?;
        let sig = r.vec16()?;
        match (alg, leaf) {
            (SIG_RSA_PKCS1_SHA256, LeafKey::Rsa(key)) => {
                let digest = Sha256::digest(transcript);
                key.verify(Pkcs1v15Sign::new::<Sha256>(), &digest, sig).is_ok()
            }
            (SIG_ECDSA_SECP256R1_SHA256, LeafKey::P256(key)) => {
                p256::ecdsa::Signature::from_der(sig)
                    .map(|sig| key.verify(transcript, &sig).is_ok())
                    .unwrap_or(false)
            }
            _ => false,
        }
    } else {
        let sig = r.vec16()?;
        match leaf {
            LeafKey::Rsa(key) => {
                let mut digest = md5::Md5::digest(transcript).to_vec();
                digest.extend_from_slice(&Sha1::digest(transcript));
                key.verify(Pkcs1v15Sign::new_unprefixed(), &digest, sig).is_ok()
            }
            LeafKey::P256(key) => {
                let digest = Sha1::digest(transcript);
                p256::ecdsa::Signature::from_der(sig)
                    .map(|sig| key.verify_prehash(&digest, &sig).is_ok())
                    .unwrap_or(false)
            }
        }
    };
    r.expect_end()?;
    if result {
        Ok(())
    } else {
        Err(WireError::Crypto("bad transcript signature".into()))
    }
}

/// Client output of the key-exchange step: the ClientKeyExchange body and
/// the premaster secret.
pub struct ClientKx {
    pub cke_body: Vec<u8>,
    pub premaster: Vec<u8>,
}

/// Runs the client side of the key exchange. For RSA key transport the
/// premaster embeds `offered_version`, the highest version the client
/// claimed in its hello.
pub fn client_kx(
    kx: KeyExchange,
    offered_version: u16,
    leaf: &LeafKey,
    ske_params: Option<&[u8]>,
) -> Result<ClientKx, WireError> {
    match kx {
        KeyExchange::Rsa => {
            let LeafKey::Rsa(key) = leaf else {
                return Err(WireError::Crypto("RSA key transport needs an RSA certificate".into()));
            };
            let mut premaster = vec![0u8; 48];
            premaster[0] = (offered_version >> 8) as u8;
            premaster[1] = offered_version as u8;
            OsRng.fill_bytes(&mut premaster[2..]);
            let sealed = key
                .encrypt(&mut OsRng, rsa::Pkcs1v15Encrypt, &premaster)
                .map_err(|e| WireError::Crypto(format!("RSA encrypt: {e}")))?;
            let mut w = Writer::new();
            w.vec16(&sealed);
            Ok(ClientKx { cke_body: w.into_bytes(), premaster })
        }
        KeyExchange::EcdheRsa | KeyExchange::EcdheEcdsa => {
            let params = ske_params
                .ok_or_else(|| WireError::Decode("missing ServerKeyExchange".into()))?;
            let mut r = Reader::new(params);
            if r.u8()? != 3 || r.u16()? != NAMED_CURVE_SECP256R1 {
                return Err(WireError::Decode("unsupported curve parameters".into()));
            }
            let point = r.vec8()?;
            let peer = p256::PublicKey::from_sec1_bytes(point)
                .map_err(|_| WireError::Decode("malformed EC point".into()))?;
            let secret = p256::ecdh::EphemeralSecret::random(&mut OsRng);
            let own_point = secret.public_key().to_sec1_bytes();
            let shared = secret.diffie_hellman(&peer);
            let mut w = Writer::new();
            w.vec8(&own_point);
            Ok(ClientKx {
                cke_body: w.into_bytes(),
                premaster: shared.raw_secret_bytes().to_vec(),
            })
        }
        KeyExchange::DheRsa => {
            let params = ske_params
                .ok_or_else(|| WireError::Decode("missing ServerKeyExchange".into()))?;
            let mut r = Reader::new(params);
            let p = BigUint::from_bytes_be(r.vec16()?);
            let g = BigUint::from_bytes_be(r.vec16()?);
            let ys = BigUint::from_bytes_be(r.vec16()?);
            if p.bits() < 512 || g < BigUint::from(2u32) || ys <= BigUint::from(1u32) {
                return Err(WireError::Crypto("degenerate DHE parameters".into()));
            }
            let mut exp_bytes = [0u8; 32];
            OsRng.fill_bytes(&mut exp_bytes);
            let exponent = BigUint::from_bytes_be(&exp_bytes);
            let public = g.modpow(&exponent, &p);
            let shared = ys.modpow(&exponent, &p);
            let mut w = Writer::new();
            w.vec16(&public.to_bytes_be());
            Ok(ClientKx { cke_body: w.into_bytes(), premaster: shared.to_bytes_be() })
        }
    }
}

/// Runs the server side: consumes a ClientKeyExchange body and produces the
/// premaster secret. RSA decryption failures yield a random premaster so a
/// forged ciphertext still walks into a Finished mismatch.
pub fn server_consume_cke(
    kx: KeyExchange,
    ephemeral: &ServerEphemeral,
    identity: &KeyPair,
    client_offered_version: u16,
    cke_body: &[u8],
) -> Result<Vec<u8>, WireError> {
    let mut r = Reader::new(cke_body);
    match kx {
        KeyExchange::Rsa => {
            let KeyPair::Rsa(key) = identity else {
                return Err(WireError::Crypto("RSA key transport needs an RSA identity".into()));
            };
            let sealed = r.vec16()?;
            let mut fallback = vec![0u8; 48];
            fallback[0] = (client_offered_version >> 8) as u8;
            fallback[1] = client_offered_version as u8;
            OsRng.fill_bytes(&mut fallback[2..]);
            let premaster = match key.decrypt(rsa::Pkcs1v15Encrypt, sealed) {
                Ok(pms)
                    if pms.len() == 48
                        && pms[0] == (client_offered_version >> 8) as u8
                        && pms[1] == client_offered_version as u8 =>
                {
                    pms
                }
                _ => fallback,
            };
            Ok(premaster)
        }
        KeyExchange::EcdheRsa | KeyExchange::EcdheEcdsa => {
            let ServerEphemeral::Ecdhe(secret) = ephemeral else {
                return Err(WireError::Crypto("no ECDHE state".into()));
            };
            let point = r.vec8()?;
            let peer = p256::PublicKey::from_sec1_bytes(point)
                .map_err(|_| WireError::Decode("malformed EC point".into()))?;
            Ok(secret.diffie_hellman(&peer).raw_secret_bytes().to_vec())
        }
        KeyExchange::DheRsa => {
            let ServerEphemeral::Dhe { exponent } = ephemeral else {
                return Err(WireError::Crypto("no DHE state".into()));
            };
            let p = BigUint::from_bytes_be(&DHE_PRIME_2048);
            let yc = BigUint::from_bytes_be(r.vec16()?);
            if yc <= BigUint::from(1u32) || yc >= p {
                return Err(WireError::Crypto("client DHE share out of range".into()));
            }
            Ok(yc.modpow(exponent, &p).to_bytes_be())
        }
    }
}
