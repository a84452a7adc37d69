//! Per-direction record protection: MAC-then-encrypt for stream and CBC
//! suites, AEAD for GCM suites, and the null state used before the cipher
//! change.

use aes::cipher::{BlockDecrypt, BlockEncrypt, KeyInit};
use aes_gcm::aead::{Aead, Payload};
use aes_gcm::{Aes128Gcm, Aes256Gcm};
use hmac::{Hmac, Mac};
use md5::Md5;
use rand::RngCore;
use rc4::cipher::StreamCipher;
use rc4::{consts::U16, Rc4};
use sha1::Sha1;
use sha2::{Sha256, Sha384};

use crate::prf;
use crate::suites::{BulkCipher, MacAlg, SuiteParams};
use crate::{Version, WireError};

/// Largest permitted protected record body (plaintext limit plus expansion).
pub const MAX_CIPHERTEXT: usize = 16384 + 2048;

/// Key material for one direction of one connection.
#[derive(Clone)]
pub struct DirectionKeys {
    pub mac_key: Vec<u8>,
    pub enc_key: Vec<u8>,
    /// Implicit CBC IV (TLS 1.0) or AEAD salt (GCM); empty otherwise.
    pub fixed_iv: Vec<u8>,
}

/// Bytes the key block must provide for one direction under a suite/version.
fn fixed_iv_len(params: &SuiteParams, version: Version) -> usize {
    if params.cipher.is_aead() {
        4
    } else if version == Version::Tls10 {
        params.cipher.block_len()
    } else {
        0
    }
}

/// Expands the master secret into client and server direction keys.
pub fn derive_keys(
    params: &SuiteParams,
    version: Version,
    master: &[u8],
    client_random: &[u8; 32],
    server_random: &[u8; 32],
) -> (DirectionKeys, DirectionKeys) {
    let mac_len = params.mac.len();
    let key_len = params.cipher.key_len();
    let iv_len = fixed_iv_len(params, version);
    let total = 2 * (mac_len + key_len + iv_len);
    let block = prf::key_block(version, params.prf, master, client_random, server_random, total);
    let mut at = 0;
    let mut take = |n: usize| {
        let out = block[at..at + n].to_vec();
        at += n;
        out
    };
    let client_mac = take(mac_len);
    let server_mac = take(mac_len);
    let client_key = take(key_len);
    let server_key = take(key_len);
    let client_iv = take(iv_len);
    let server_iv = take(iv_len);
    (
        DirectionKeys { mac_key: client_mac, enc_key: client_key, fixed_iv: client_iv },
        DirectionKeys { mac_key: server_mac, enc_key: server_key, fixed_iv: server_iv },
    )
}

fn record_mac(alg: MacAlg, key: &[u8], header: &[u8], payload: &[u8]) -> Vec<u8> {
    macro_rules! run {
        ($digest:ty) => {{
            let mut mac =
                <Hmac<$digest> as Mac>::new_from_slice(key).expect("any key size");
            mac.update(header);
            mac.update(payload);
            mac.finalize().into_bytes().to_vec()
        }};
    }
    match alg {
        MacAlg::Aead => Vec::new(),
        MacAlg::HmacMd5 => run!(Md5),
        MacAlg::HmacSha1 => run!(Sha1),
        MacAlg::HmacSha256 => run!(Sha256),
        MacAlg::HmacSha384 => run!(Sha384),
    }
}

/// seq(8) | type(1) | version(2) | length(2), the MAC and AEAD header.
fn mac_header(seq: u64, content_type: u8, wire_version: u16, len: usize) -> [u8; 13] {
    let mut h = [0u8; 13];
    h[..8].copy_from_slice(&seq.to_be_bytes());
    h[8] = content_type;
    h[9..11].copy_from_slice(&wire_version.to_be_bytes());
    h[11..13].copy_from_slice(&(len as u16).to_be_bytes());
    h
}

enum BlockImpl {
    Aes128(aes::Aes128),
    Aes256(aes::Aes256),
    Des(des::Des),
    TripleDes(des::TdesEde3),
}

impl BlockImpl {
    fn new(cipher: BulkCipher, key: &[u8]) -> Option<BlockImpl> {
        Some(match cipher {
            BulkCipher::Aes128Cbc => BlockImpl::Aes128(aes::Aes128::new_from_slice(key).ok()?),
            BulkCipher::Aes256Cbc => BlockImpl::Aes256(aes::Aes256::new_from_slice(key).ok()?),
            BulkCipher::DesCbc => BlockImpl::Des(des::Des::new_from_slice(key).ok()?),
            BulkCipher::TripleDesCbc => {
                BlockImpl::TripleDes(des::TdesEde3::new_from_slice(key).ok()?)
            }
            _ => return None,
        })
    }

    fn block_len(&self) -> usize {
        match self {
            BlockImpl::Aes128(_) | BlockImpl::Aes256(_) => 16,
            BlockImpl::Des(_) | BlockImpl::TripleDes(_) => 8,
        }
    }

    fn encrypt_block(&self, block: &mut [u8]) {
        match self {
            BlockImpl::Aes128(c) => c.encrypt_block(block.into()),
            BlockImpl::Aes256(c) => c.encrypt_block(block.into()),
            BlockImpl::Des(c) => c.encrypt_block(block.into()),
            BlockImpl::TripleDes(c) => c.encrypt_block(block.into()),
        }
    }

    fn decrypt_block(&self, block: &mut [u8]) {
        match self {
            BlockImpl::Aes128(c) => c.decrypt_block(block.into()),
            BlockImpl::Aes256(c) => c.decrypt_block(block.into()),
            BlockImpl::Des(c) => c.decrypt_block(block.into()),
            BlockImpl::TripleDes(c) => c.decrypt_block(block.into()),
        }
    }

    fn cbc_encrypt(&self, iv: &[u8], data: &mut [u8]) {
        let bl = self.block_len();
        let mut prev = iv.to_vec();
        for chunk in data.chunks_mut(bl) {
            for (b, p) in chunk.iter_mut().zip(prev.iter()) {
                *b ^= p;
            }
            self.encrypt_block(chunk);
            prev.copy_from_slice(chunk);
        }
    }

    fn cbc_decrypt(&self, iv: &[u8], data: &mut [u8]) {
        let bl = self.block_len();
        let mut prev = iv.to_vec();
        for chunk in data.chunks_mut(bl) {
            let this_ct = chunk.to_vec();
            self.decrypt_block(chunk);
            for (b, p) in chunk.iter_mut().zip(prev.iter()) {
                *b ^= p;
            }
            prev = this_ct;
        }
    }
}

enum AeadImpl {
    A128(Box<Aes128Gcm>),
    A256(Box<Aes256Gcm>),
}

impl AeadImpl {
    fn seal(&self, nonce: &[u8], aad: &[u8], msg: &[u8]) -> Vec<u8> {
        let payload = Payload { msg, aad };
        match self {
            AeadImpl::A128(c) => c.encrypt(nonce.into(), payload),
            AeadImpl::A256(c) => c.encrypt(nonce.into(), payload),
        }
        .expect("gcm encryption is infallible for in-range lengths")
    }

    fn open(&self, nonce: &[u8], aad: &[u8], ct: &[u8]) -> Result<Vec<u8>, WireError> {
        let payload = Payload { msg: ct, aad };
        match self {
            AeadImpl::A128(c) => c.decrypt(nonce.into(), payload),
            AeadImpl::A256(c) => c.decrypt(nonce.into(), payload),
        }
        .map_err(|_| WireError::Crypto("record authentication failed".into()))
    }
}

enum CipherImpl {
    Null,
    Rc4(Box<Rc4<U16>>),
    Cbc(BlockImpl),
    Gcm(AeadImpl),
}

/// Record protection for one direction; `plaintext()` is the pre-handshake
/// state.
pub struct CipherState {
    mac: MacAlg,
    mac_key: Vec<u8>,
    fixed_iv: Vec<u8>,
    /// Running implicit IV for TLS 1.0 CBC.
    chained_iv: Option<Vec<u8>>,
    cipher: CipherImpl,
    explicit_iv: bool,
}

impl CipherState {
    /// Null protection used before ChangeCipherSpec.
    pub fn plaintext() -> CipherState {
        CipherState {
            mac: MacAlg::Aead,
            mac_key: Vec::new(),
            fixed_iv: Vec::new(),
            chained_iv: None,
            cipher: CipherImpl::Null,
            explicit_iv: false,
        }
    }

    /// Protection under `params`/`version` with one direction's keys.
    pub fn new(params: &SuiteParams, version: Version, keys: DirectionKeys) -> CipherState {
        let cipher = match params.cipher {
            BulkCipher::Null => CipherImpl::Null,
            BulkCipher::Rc4_128 => CipherImpl::Rc4(Box::new(
                <Rc4<U16> as rc4::KeyInit>::new_from_slice(&keys.enc_key)
                    .expect("key length checked"),
            )),
            BulkCipher::Aes128Gcm => CipherImpl::Gcm(AeadImpl::A128(Box::new(
                Aes128Gcm::new_from_slice(&keys.enc_key).expect("key length checked"),
            ))),
            BulkCipher::Aes256Gcm => CipherImpl::Gcm(AeadImpl::A256(Box::new(
                Aes256Gcm::new_from_slice(&keys.enc_key).expect("key length checked"),
            ))),
            block => CipherImpl::Cbc(
                BlockImpl::new(block, &keys.enc_key).expect("key length checked"),
            ),
        };
        let chained_iv = if matches!(cipher, CipherImpl::Cbc(_)) && version == Version::Tls10 {
            Some(keys.fixed_iv.clone())
        } else {
            None
        };
        CipherState {
            mac: params.mac,
            mac_key: keys.mac_key,
            fixed_iv: keys.fixed_iv,
            chained_iv,
            cipher,
            explicit_iv: version != Version::Tls10,
        }
    }

    /// Protects one record payload; `seq` is the 64-bit record sequence
    /// (for datagram transports the epoch occupies the top 16 bits).
    pub fn seal(
        &mut self,
        seq: u64,
        content_type: u8,
        wire_version: u16,
        payload: &[u8],
    ) -> Vec<u8> {
        match &mut self.cipher {
            CipherImpl::Null if self.mac == MacAlg::Aead => payload.to_vec(),
            CipherImpl::Null => {
                let header = mac_header(seq, content_type, wire_version, payload.len());
                let mut out = payload.to_vec();
                out.extend_from_slice(&record_mac(self.mac, &self.mac_key, &header, payload));
                out
            }
            CipherImpl::Rc4(rc4) => {
                let header = mac_header(seq, content_type, wire_version, payload.len());
                let mut out = payload.to_vec();
                out.extend_from_slice(&record_mac(self.mac, &self.mac_key, &header, payload));
                rc4.apply_keystream(&mut out);
                out
            }
            CipherImpl::Cbc(block) => {
                let header = mac_header(seq, content_type, wire_version, payload.len());
                let mut pt = payload.to_vec();
                pt.extend_from_slice(&record_mac(self.mac, &self.mac_key, &header, payload));
                let bl = block.block_len();
                let pad_len = bl - (pt.len() + 1) % bl;
                let pad_byte = pad_len as u8;
                pt.resize(pt.len() + pad_len + 1, pad_byte);
                let iv = match &self.chained_iv {
                    Some(iv) => iv.clone(),
                    None => {
                        let mut iv = vec![0u8; bl];
                        rand::thread_rng().fill_bytes(&mut iv);
                        iv
                    }
                };
                block.cbc_encrypt(&iv, &mut pt);
                if let Some(chained) = &mut self.chained_iv {
                    chained.copy_from_slice(&pt[pt.len() - bl..]);
                    pt
                } else {
                    let mut out = iv;
                    out.extend_from_slice(&pt);
                    out
                }
            }
            CipherImpl::Gcm(aead) => {
                let aad = mac_header(seq, content_type, wire_version, payload.len());
                let explicit = seq.to_be_bytes();
                let mut nonce = self.fixed_iv.clone();
                nonce.extend_from_slice(&explicit);
                let ct = aead.seal(&nonce, &aad, payload);
                let mut out = explicit.to_vec();
                out.extend_from_slice(&ct);
                out
            }
        }
    }

    /// Reverses `seal`, verifying authenticity.
    pub fn open(
        &mut self,
        seq: u64,
        content_type: u8,
        wire_version: u16,
        data: &[u8],
    ) -> Result<Vec<u8>, WireError> {
        let check_mac = |payload: &[u8], received: &[u8], mac: MacAlg, key: &[u8]| {
            let header = mac_header(seq, content_type, wire_version, payload.len());
            if record_mac(mac, key, &header, payload) == received {
                Ok(())
            } else {
                Err(WireError::Crypto("record authentication failed".into()))
            }
        };
        match &mut self.cipher {
            CipherImpl::Null if self.mac == MacAlg::Aead => Ok(data.to_vec()),
            CipherImpl::Null => {
                let mac_len = self.mac.len();
                if data.len() < mac_len {
                    return Err(WireError::Crypto("record shorter than its MAC".into()));
                }
                let (payload, received) = data.split_at(data.len() - mac_len);
                check_mac(payload, received, self.mac, &self.mac_key)?;
                Ok(payload.to_vec())
            }
            CipherImpl::Rc4(rc4) => {
                let mut pt = data.to_vec();
                rc4.apply_keystream(&mut pt);
                let mac_len = self.mac.len();
                if pt.len() < mac_len {
                    return Err(WireError::Crypto("record shorter than its MAC".into()));
                }
                let (payload, received) = pt.split_at(pt.len() - mac_len);
                check_mac(payload, received, self.mac, &self.mac_key)?;
                Ok(payload.to_vec())
            }
            CipherImpl::Cbc(block) => {
                let bl = block.block_len();
                let (iv, ct) = if self.explicit_iv {
                    if data.len() < bl {
                        return Err(WireError::Crypto("record shorter than its IV".into()));
                    }
                    data.split_at(bl)
                } else {
                    (
                        self.chained_iv.as_deref().expect("implicit IV present"),
                        data,
                    )
                };
                if ct.is_empty() || ct.len() % bl != 0 {
                    return Err(WireError::Crypto("bad CBC record length".into()));
                }
                let iv = iv.to_vec();
                let next_chain = ct[ct.len() - bl..].to_vec();
                let mut pt = ct.to_vec();
                block.cbc_decrypt(&iv, &mut pt);
                if let Some(chained) = &mut self.chained_iv {
                    *chained = next_chain;
                }
                let pad_byte = *pt.last().expect("non-empty checked") as usize;
                let mac_len = self.mac.len();
                if pt.len() < pad_byte + 1 + mac_len {
                    return Err(WireError::Crypto("bad CBC padding".into()));
                }
                let pad_start = pt.len() - pad_byte - 1;
                if pt[pad_start..].iter().any(|&b| b as usize != pad_byte) {
                    return Err(WireError::Crypto("bad CBC padding".into()));
                }
                let (payload, received) = pt[..pad_start].split_at(pad_start - mac_len);
                check_mac(payload, received, self.mac, &self.mac_key)?;
                Ok(payload.to_vec())
            }
            CipherImpl::Gcm(aead) => {
                if data.len() < 8 + 16 {
                    return Err(WireError::Crypto("GCM record too short".into()));
                }
                let (explicit, ct) = data.split_at(8);
                let mut nonce = self.fixed_iv.clone();
                nonce.extend_from_slice(explicit);
                let aad = mac_header(seq, content_type, wire_version, ct.len() - 16);
                aead.open(&nonce, &aad, ct)
            }
        }
    }
}
