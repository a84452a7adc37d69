//! Cipher-suite registry: the four offer batteries, name/identifier mapping,
//! and per-suite negotiation parameters for the suites the engine can run
//! end to end.
//!
//! Identifiers are the 16-bit values from the IANA TLS Cipher Suite registry.
//! Two battery entries have no IANA assignment and are carried under
//! private-use identifiers `0xFF01` and `0xFF02` so the batteries stay
//! complete without colliding with registered suites.

use serde::{Deserialize, Serialize};

/// Names of the four cipher-suite batteries offered to every TLS endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SuiteSetName {
    #[serde(rename = "REC")]
    Rec,
    #[serde(rename = "noPFS")]
    NoPfs,
    #[serde(rename = "COMP")]
    Comp,
    #[serde(rename = "INS")]
    Ins,
}

impl SuiteSetName {
    /// All batteries in the order they are offered to a server.
    pub const ALL: [SuiteSetName; 4] = [
        SuiteSetName::Rec,
        SuiteSetName::NoPfs,
        SuiteSetName::Comp,
        SuiteSetName::Ins,
    ];

    /// Serialized label for reports.
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteSetName::Rec => "REC",
            SuiteSetName::NoPfs => "noPFS",
            SuiteSetName::Comp => "COMP",
            SuiteSetName::Ins => "INS",
        }
    }

    /// The suites this battery offers, in offer order.
    pub fn suites(self) -> &'static [u16] {
        match self {
            SuiteSetName::Rec => REC,
            SuiteSetName::NoPfs => NO_PFS,
            SuiteSetName::Comp => COMP,
            SuiteSetName::Ins => INS,
        }
    }
}

impl std::fmt::Display for SuiteSetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Recommended suites: ephemeral key exchange with AEAD or SHA-2 MACs only.
pub const REC: &[u16] = &[
    0xC02C, 0x00A2, 0xC027, 0xC030, 0xC0AC, 0xC023, 0x009F, 0xC09E, 0xC009,
    0x00A3, 0xC024, 0xC0AF, 0xC0AD, 0xC028, 0xC0A3, 0xC09F, 0x006B, 0xC0AE,
    0xC02B, 0x006A, 0xC0A2, 0xC02F, 0x0067, 0xC00A, 0x009E, 0x0040,
];

/// Recommended suites without forward secrecy: static DH and ECDH variants.
pub const NO_PFS: &[u16] = &[
    0xC02E, 0x00A0, 0xC025, 0xC032, 0x00A4, 0xC029, 0x00A1, 0xC026, 0x003F,
    0x00A5, 0xC02A, 0x003E, 0xC02D, 0xFF01, 0xC031, 0x0068,
];

/// Compatibility suites: the broad default set of a mainstream scanning stack.
pub const COMP: &[u16] = &[
    0xC02F, 0xC009, 0x0035, 0xC02B, 0xC014, 0xC012, 0xC011, 0xC00A, 0x000A,
    0xC007, 0x0005, 0xC013, 0x002F,
];

/// Insecure suites: NULL, export-grade, DES, RC4, RC2, and anonymous variants.
pub const INS: &[u16] = &[
    0x0000, 0x0019, 0xC016, 0x0001, 0x0063, 0x0009, 0x0002, 0x0062, 0x000C,
    0x003B, 0x0017, 0x000F, 0xC001, 0x0060, 0x0012, 0xC006, 0x0064, 0x0015,
    0xC00B, 0x0065, 0x001A, 0xC010, 0x0003, 0x001B, 0xC015, 0xFF02, 0xC017,
    0x0006, 0x0005, 0x006C, 0x0061, 0x0018, 0x006D, 0x0008, 0x0066, 0x00A6,
    0x000E, 0xC002, 0x00A7, 0x000B, 0xC007, 0xC018, 0x0011, 0xC00C, 0xC019,
    0x0014, 0xC011,
];

static NAMES: &[(u16, &str)] = &[
    (0x0000, "NULL_WITH_NULL_NULL"),
    (0x0001, "RSA_WITH_NULL_MD5"),
    (0x0002, "RSA_WITH_NULL_SHA"),
    (0x0003, "RSA_EXPORT_WITH_RC4_40_MD5"),
    (0x0005, "RSA_WITH_RC4_128_SHA"),
    (0x0006, "RSA_EXPORT_WITH_RC2_CBC_40_MD5"),
    (0x0008, "RSA_EXPORT_WITH_DES40_CBC_SHA"),
    (0x0009, "RSA_WITH_DES_CBC_SHA"),
    (0x000A, "RSA_WITH_3DES_EDE_CBC_SHA"),
    (0x000B, "DH_DSS_EXPORT_WITH_DES40_CBC_SHA"),
    (0x000C, "DH_DSS_WITH_DES_CBC_SHA"),
    (0x000E, "DH_RSA_EXPORT_WITH_DES40_CBC_SHA"),
    (0x000F, "DH_RSA_WITH_DES_CBC_SHA"),
    (0x0011, "DHE_DSS_EXPORT_WITH_DES40_CBC_SHA"),
    (0x0012, "DHE_DSS_WITH_DES_CBC_SHA"),
    (0x0014, "DHE_RSA_EXPORT_WITH_DES40_CBC_SHA"),
    (0x0015, "DHE_RSA_WITH_DES_CBC_SHA"),
    (0x0017, "DH_ANON_EXPORT_WITH_RC4_40_MD5"),
    (0x0018, "DH_ANON_WITH_RC4_128_MD5"),
    (0x0019, "DH_ANON_EXPORT_WITH_DES40_CBC_SHA"),
    (0x001A, "DH_ANON_WITH_DES_CBC_SHA"),
    (0x001B, "DH_ANON_WITH_3DES_EDE_CBC_SHA"),
    (0x002F, "RSA_WITH_AES_128_CBC_SHA"),
    (0x0035, "RSA_WITH_AES_256_CBC_SHA"),
    (0x003B, "RSA_WITH_NULL_SHA256"),
    (0x003E, "DH_DSS_WITH_AES_128_CBC_SHA256"),
    (0x003F, "DH_RSA_WITH_AES_128_CBC_SHA256"),
    (0x0040, "DHE_DSS_WITH_AES_128_CBC_SHA256"),
    (0x0060, "RSA_EXPORT1024_WITH_RC4_56_MD5"),
    (0x0061, "RSA_EXPORT1024_WITH_RC2_CBC_56_MD5"),
    (0x0062, "RSA_EXPORT1024_WITH_DES_CBC_SHA"),
    (0x0063, "DHE_DSS_EXPORT1024_WITH_DES_CBC_SHA"),
    (0x0064, "RSA_EXPORT1024_WITH_RC4_56_SHA"),
    (0x0065, "DHE_DSS_EXPORT1024_WITH_RC4_56_SHA"),
    (0x0066, "DHE_DSS_WITH_RC4_128_SHA"),
    (0x0067, "DHE_RSA_WITH_AES_128_CBC_SHA256"),
    (0x0068, "DH_DSS_WITH_AES_256_CBC_SHA256"),
    (0x006A, "DHE_DSS_WITH_AES_256_CBC_SHA256"),
    (0x006B, "DHE_RSA_WITH_AES_256_CBC_SHA256"),
    (0x006C, "DH_ANON_WITH_AES_128_CBC_SHA256"),
    (0x006D, "DH_ANON_WITH_AES_256_CBC_SHA256"),
    (0x009E, "DHE_RSA_WITH_AES_128_GCM_SHA256"),
    (0x009F, "DHE_RSA_WITH_AES_256_GCM_SHA384"),
    (0x00A0, "DH_RSA_WITH_AES_128_GCM_SHA256"),
    (0x00A1, "DH_RSA_WITH_AES_256_GCM_SHA384"),
    (0x00A2, "DHE_DSS_WITH_AES_128_GCM_SHA256"),
    (0x00A3, "DHE_DSS_WITH_AES_256_GCM_SHA384"),
    (0x00A4, "DH_DSS_WITH_AES_128_GCM_SHA256"),
    (0x00A5, "DH_DSS_WITH_AES_256_GCM_SHA384"),
    (0x00A6, "DH_ANON_WITH_AES_128_GCM_SHA256"),
    (0x00A7, "DH_ANON_WITH_AES_256_GCM_SHA384"),
    (0xC001, "ECDH_ECDSA_WITH_NULL_SHA"),
    (0xC002, "ECDH_ECDSA_WITH_RC4_128_SHA"),
    (0xC006, "ECDHE_ECDSA_WITH_NULL_SHA"),
    (0xC007, "ECDHE_ECDSA_WITH_RC4_128_SHA"),
    (0xC009, "ECDHE_ECDSA_WITH_AES_128_CBC_SHA"),
    (0xC00A, "ECDHE_ECDSA_WITH_AES_256_CBC_SHA"),
    (0xC00B, "ECDH_RSA_WITH_NULL_SHA"),
    (0xC00C, "ECDH_RSA_WITH_RC4_128_SHA"),
    (0xC010, "ECDHE_RSA_WITH_NULL_SHA"),
    (0xC011, "ECDHE_RSA_WITH_RC4_128_SHA"),
    (0xC012, "ECDHE_RSA_WITH_3DES_EDE_CBC_SHA"),
    (0xC013, "ECDHE_RSA_WITH_AES_128_CBC_SHA"),
    (0xC014, "ECDHE_RSA_WITH_AES_256_CBC_SHA"),
    (0xC015, "ECDH_ANON_WITH_NULL_SHA"),
    (0xC016, "ECDH_ANON_WITH_RC4_128_SHA"),
    (0xC017, "ECDH_ANON_WITH_3DES_EDE_CBC_SHA"),
    (0xC018, "ECDH_ANON_WITH_AES_128_CBC_SHA"),
    (0xC019, "ECDH_ANON_WITH_AES_256_CBC_SHA"),
    (0xC023, "ECDHE_ECDSA_WITH_AES_128_CBC_SHA256"),
    (0xC024, "ECDHE_ECDSA_WITH_AES_256_CBC_SHA384"),
    (0xC025, "ECDH_ECDSA_WITH_AES_128_CBC_SHA256"),
    (0xC026, "ECDH_ECDSA_WITH_AES_256_CBC_SHA384"),
    (0xC027, "ECDHE_RSA_WITH_AES_128_CBC_SHA256"),
    (0xC028, "ECDHE_RSA_WITH_AES_256_CBC_SHA384"),
    (0xC029, "ECDH_RSA_WITH_AES_128_CBC_SHA256"),
    (0xC02A, "ECDH_RSA_WITH_AES_256_CBC_SHA384"),
    (0xC02B, "ECDHE_ECDSA_WITH_AES_128_GCM_SHA256"),
    (0xC02C, "ECDHE_ECDSA_WITH_AES_256_GCM_SHA384"),
    (0xC02D, "ECDH_ECDSA_WITH_AES_128_GCM_SHA256"),
    (0xC02E, "ECDH_ECDSA_WITH_AES_256_GCM_SHA384"),
    (0xC02F, "ECDHE_RSA_WITH_AES_128_GCM_SHA256"),
    (0xC030, "ECDHE_RSA_WITH_AES_256_GCM_SHA384"),
    (0xC031, "ECDH_RSA_WITH_AES_128_GCM_SHA256"),
    (0xC032, "ECDH_RSA_WITH_AES_256_GCM_SHA384"),
    (0xC09E, "DHE_RSA_WITH_AES_128_CCM"),
    (0xC09F, "DHE_RSA_WITH_AES_256_CCM"),
    (0xC0A2, "DHE_RSA_WITH_AES_128_CCM_8"),
    (0xC0A3, "DHE_RSA_WITH_AES_256_CCM_8"),
    (0xC0AC, "ECDHE_ECDSA_WITH_AES_128_CCM"),
    (0xC0AD, "ECDHE_ECDSA_WITH_AES_256_CCM"),
    (0xC0AE, "ECDHE_ECDSA_WITH_AES_128_CCM_8"),
    (0xC0AF, "ECDHE_ECDSA_WITH_AES_256_CCM_8"),
    (0xFF01, "ECDH_RSA_WITH_AES_256_CBC_SHA256"),
    (0xFF02, "RSA_WITH_RC4_40_MD5"),
];

/// Registry name for a suite identifier, if it belongs to any battery.
pub fn suite_name(id: u16) -> Option<&'static str> {
    NAMES
        .binary_search_by_key(&id, |(i, _)| *i)
        .ok()
        .map(|idx| NAMES[idx].1)
}

/// Suite identifier for a registry name, if it belongs to any battery.
pub fn suite_id(name: &str) -> Option<u16> {
    NAMES.iter().find(|(_, n)| *n == name).map(|(i, _)| *i)
}

/// Key-exchange mechanisms the engine can complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyExchange {
    Rsa,
    EcdheRsa,
    EcdheEcdsa,
    DheRsa,
}

impl KeyExchange {
    /// Whether the server flight carries a ServerKeyExchange message.
    pub fn ephemeral(self) -> bool {
        !matches!(self, KeyExchange::Rsa)
    }

    /// Whether ServerKeyExchange parameters are signed with ECDSA
    /// (as opposed to RSA).
    pub fn ecdsa_signed(self) -> bool {
        matches!(self, KeyExchange::EcdheEcdsa)
    }
}

/// Bulk encryption algorithms the engine can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BulkCipher {
    Null,
    Rc4_128,
    DesCbc,
    TripleDesCbc,
    Aes128Cbc,
    Aes256Cbc,
    Aes128Gcm,
    Aes256Gcm,
}

impl BulkCipher {
    pub fn key_len(self) -> usize {
        match self {
            BulkCipher::Null => 0,
            BulkCipher::Rc4_128 | BulkCipher::Aes128Cbc | BulkCipher::Aes128Gcm => 16,
            BulkCipher::DesCbc => 8,
            BulkCipher::TripleDesCbc => 24,
            BulkCipher::Aes256Cbc | BulkCipher::Aes256Gcm => 32,
        }
    }

    /// Cipher-block size; zero for stream and null ciphers.
    pub fn block_len(self) -> usize {
        match self {
            BulkCipher::DesCbc | BulkCipher::TripleDesCbc => 8,
            BulkCipher::Aes128Cbc | BulkCipher::Aes256Cbc => 16,
            BulkCipher::Aes128Gcm | BulkCipher::Aes256Gcm => 0,
            BulkCipher::Null | BulkCipher::Rc4_128 => 0,
        }
    }

    /// Bytes taken from the key block for this cipher's implicit IV or salt.
    pub fn fixed_iv_len(self) -> usize {
        match self {
            BulkCipher::Aes128Gcm | BulkCipher::Aes256Gcm => 4,
            other => other.block_len(),
        }
    }

    pub fn is_aead(self) -> bool {
        matches!(self, BulkCipher::Aes128Gcm | BulkCipher::Aes256Gcm)
    }
}

/// Record MAC algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacAlg {
    /// AEAD suites carry no separate MAC.
    Aead,
    HmacMd5,
    HmacSha1,
    HmacSha256,
    HmacSha384,
}

impl MacAlg {
    pub fn len(self) -> usize {
        match self {
            MacAlg::Aead => 0,
            MacAlg::HmacMd5 => 16,
            MacAlg::HmacSha1 => 20,
            MacAlg::HmacSha256 => 32,
            MacAlg::HmacSha384 => 48,
        }
    }
}

/// Hash backing the TLS 1.2 pseudorandom function for a suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrfHash {
    Sha256,
    Sha384,
}

/// Negotiation parameters for a suite the engine can complete end to end.
#[derive(Debug, Clone, Copy)]
pub struct SuiteParams {
    pub id: u16,
    pub kx: KeyExchange,
    pub cipher: BulkCipher,
    pub mac: MacAlg,
    pub prf: PrfHash,
    /// True for suites defined only for TLS 1.2 (SHA-2 MACs, AEAD).
    pub tls12_only: bool,
}

static RUNNABLE: &[SuiteParams] = &[
    SuiteParams { id: 0x0001, kx: KeyExchange::Rsa, cipher: BulkCipher::Null, mac: MacAlg::HmacMd5, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0x0002, kx: KeyExchange::Rsa, cipher: BulkCipher::Null, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0x0005, kx: KeyExchange::Rsa, cipher: BulkCipher::Rc4_128, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0x0009, kx: KeyExchange::Rsa, cipher: BulkCipher::DesCbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0x000A, kx: KeyExchange::Rsa, cipher: BulkCipher::TripleDesCbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0x002F, kx: KeyExchange::Rsa, cipher: BulkCipher::Aes128Cbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0x0035, kx: KeyExchange::Rsa, cipher: BulkCipher::Aes256Cbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0x003B, kx: KeyExchange::Rsa, cipher: BulkCipher::Null, mac: MacAlg::HmacSha256, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0x0067, kx: KeyExchange::DheRsa, cipher: BulkCipher::Aes128Cbc, mac: MacAlg::HmacSha256, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0x006B, kx: KeyExchange::DheRsa, cipher: BulkCipher::Aes256Cbc, mac: MacAlg::HmacSha256, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0x009E, kx: KeyExchange::DheRsa, cipher: BulkCipher::Aes128Gcm, mac: MacAlg::Aead, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0x009F, kx: KeyExchange::DheRsa, cipher: BulkCipher::Aes256Gcm, mac: MacAlg::Aead, prf: PrfHash::Sha384, tls12_only: true },
    SuiteParams { id: 0xC007, kx: KeyExchange::EcdheEcdsa, cipher: BulkCipher::Rc4_128, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0xC009, kx: KeyExchange::EcdheEcdsa, cipher: BulkCipher::Aes128Cbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0xC00A, kx: KeyExchange::EcdheEcdsa, cipher: BulkCipher::Aes256Cbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0xC011, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::Rc4_128, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0xC012, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::TripleDesCbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0xC013, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::Aes128Cbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0xC014, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::Aes256Cbc, mac: MacAlg::HmacSha1, prf: PrfHash::Sha256, tls12_only: false },
    SuiteParams { id: 0xC023, kx: KeyExchange::EcdheEcdsa, cipher: BulkCipher::Aes128Cbc, mac: MacAlg::HmacSha256, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0xC024, kx: KeyExchange::EcdheEcdsa, cipher: BulkCipher::Aes256Cbc, mac: MacAlg::HmacSha384, prf: PrfHash::Sha384, tls12_only: true },
    SuiteParams { id: 0xC027, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::Aes128Cbc, mac: MacAlg::HmacSha256, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0xC028, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::Aes256Cbc, mac: MacAlg::HmacSha384, prf: PrfHash::Sha384, tls12_only: true },
    SuiteParams { id: 0xC02B, kx: KeyExchange::EcdheEcdsa, cipher: BulkCipher::Aes128Gcm, mac: MacAlg::Aead, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0xC02C, kx: KeyExchange::EcdheEcdsa, cipher: BulkCipher::Aes256Gcm, mac: MacAlg::Aead, prf: PrfHash::Sha384, tls12_only: true },
    SuiteParams { id: 0xC02F, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::Aes128Gcm, mac: MacAlg::Aead, prf: PrfHash::Sha256, tls12_only: true },
    SuiteParams { id: 0xC030, kx: KeyExchange::EcdheRsa, cipher: BulkCipher::Aes256Gcm, mac: MacAlg::Aead, prf: PrfHash::Sha384, tls12_only: true },
];

/// Parameters for a suite the engine can complete, or `None` for
/// observe-only suites.
/// All suites the engine can complete, ordered by identifier.
pub fn completable_suites() -> &'static [SuiteParams] {
    RUNNABLE
}

pub fn suite_params(id: u16) -> Option<&'static SuiteParams> {
    RUNNABLE
        .binary_search_by_key(&id, |p| p.id)
        .ok()
        .map(|idx| &RUNNABLE[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(ids: &[u16]) -> BTreeSet<u16> {
        ids.iter().copied().collect()
    }

    #[test]
    fn battery_sizes_match_fixed_counts() {
        assert_eq!(REC.len(), 26);
        assert_eq!(NO_PFS.len(), 16);
        assert_eq!(COMP.len(), 13);
        assert_eq!(INS.len(), 47);
    }

    #[test]
    fn batteries_contain_no_duplicates() {
        for battery in [REC, NO_PFS, COMP, INS] {
            assert_eq!(set(battery).len(), battery.len());
        }
    }

    #[test]
    fn recommended_set_is_disjoint_from_insecure_and_static_sets() {
        assert!(set(REC).is_disjoint(&set(INS)));
        assert!(set(REC).is_disjoint(&set(NO_PFS)));
    }

    #[test]
    fn compatibility_set_overlaps_insecure_set_on_rc4_suites() {
        let shared: BTreeSet<u16> = set(COMP).intersection(&set(INS)).copied().collect();
        assert_eq!(shared, set(&[0x0005, 0xC007, 0xC011]));
    }

    #[test]
    fn every_battery_member_has_a_registry_name() {
        for battery in [REC, NO_PFS, COMP, INS] {
            for &id in battery {
                let name = suite_name(id).expect("missing name");
                assert_eq!(suite_id(name), Some(id));
            }
        }
    }

    #[test]
    fn known_identifiers_map_to_expected_names() {
        assert_eq!(suite_name(0xC02C), Some("ECDHE_ECDSA_WITH_AES_256_GCM_SHA384"));
        assert_eq!(suite_name(0x0000), Some("NULL_WITH_NULL_NULL"));
        assert_eq!(suite_name(0x0005), Some("RSA_WITH_RC4_128_SHA"));
        assert_eq!(suite_id("ECDH_RSA_WITH_AES_256_CBC_SHA256"), Some(0xFF01));
        assert_eq!(suite_id("RSA_WITH_RC4_40_MD5"), Some(0xFF02));
        assert_eq!(suite_name(0x0004), None);
    }

    #[test]
    fn private_use_identifiers_do_not_shadow_registered_ones() {
        assert!(NAMES.iter().all(|(id, _)| *id < 0xFF00 || *id >= 0xFF01));
        assert_eq!(suite_name(0xFF01), Some("ECDH_RSA_WITH_AES_256_CBC_SHA256"));
        assert_eq!(suite_name(0xFF02), Some("RSA_WITH_RC4_40_MD5"));
    }

    #[test]
    fn name_table_is_sorted_for_binary_search() {
        assert!(NAMES.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(RUNNABLE.windows(2).all(|w| w[0].id < w[1].id));
    }

    #[test]
    fn whole_compatibility_battery_is_runnable() {
        for &id in COMP {
            assert!(suite_params(id).is_some(), "suite {id:#06x} not runnable");
        }
    }

    #[test]
    fn runnable_parameters_are_consistent() {
        for p in RUNNABLE {
            if p.cipher.is_aead() {
                assert_eq!(p.mac, MacAlg::Aead);
                assert!(p.tls12_only);
            } else {
                assert_ne!(p.mac, MacAlg::Aead);
            }
            if p.mac == MacAlg::HmacSha384 {
                assert_eq!(p.prf, PrfHash::Sha384);
            }
            let name = suite_name(p.id).unwrap();
            if p.kx == KeyExchange::EcdheEcdsa {
                assert!(name.starts_with("ECDHE_ECDSA_"));
            }
        }
    }

    #[test]
    fn battery_name_labels_round_trip() {
        for name in SuiteSetName::ALL {
            let json = serde_json::to_string(&name).unwrap();
            let back: SuiteSetName = serde_json::from_str(&json).unwrap();
            assert_eq!(back, name);
        }
        assert_eq!(serde_json::to_string(&SuiteSetName::NoPfs).unwrap(), "\"noPFS\"");
    }
}
