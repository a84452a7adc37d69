//! Certificate minting for lab fixtures and the scanner's client identity.

use chrono::{DateTime, Utc};
use md5::Md5;
use p256::ecdsa::signature::hazmat::PrehashSigner;
use rsa::traits::PublicKeyParts;
use rsa::Pkcs1v15Sign;
use sha1::Sha1;
use sha2::{Digest, Sha256, Sha384, Sha512};

use crate::der;

/// Signature algorithm stamped on an issued certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigAlg {
    RsaMd5,
    RsaSha1,
    RsaSha256,
    RsaSha384,
    RsaSha512,
    EcdsaSha256,
    EcdsaSha512,
}

impl SigAlg {
    fn oid(self) -> &'static str {
        match self {
            SigAlg::RsaMd5 => "1.2.840.113549.1.1.4",
            SigAlg::RsaSha1 => "1.2.840.113549.1.1.5",
            SigAlg::RsaSha256 => "1.2.840.113549.1.1.11",
            SigAlg::RsaSha384 => "1.2.840.113549.1.1.12",
            SigAlg::RsaSha512 => "1.2.840.113549.1.1.13",
            SigAlg::EcdsaSha256 => "1.2.840.10045.4.3.2",
            SigAlg::EcdsaSha512 => "1.2.840.10045.4.3.4",
        }
    }

    fn is_rsa(self) -> bool {
        !matches!(self, SigAlg::EcdsaSha256 | SigAlg::EcdsaSha512)
    }
}

/// Private key able to sign certificates and TLS handshake transcripts.
#[derive(Debug, Clone)]
pub enum KeyPair {
    Rsa(rsa::RsaPrivateKey),
    EcdsaP256(p256::ecdsa::SigningKey),
}

impl KeyPair {
    pub fn generate_rsa(bits: usize) -> KeyPair {
        let mut rng = rand::thread_rng();
        KeyPair::Rsa(rsa::RsaPrivateKey::new(&mut rng, bits).expect("RSA keygen"))
    }

    pub fn generate_p256() -> KeyPair {
        KeyPair::EcdsaP256(p256::ecdsa::SigningKey::random(&mut rand::thread_rng()))
    }

    /// SubjectPublicKeyInfo for this key.
    pub fn spki_der(&self) -> Vec<u8> {
        match self {
            KeyPair::Rsa(key) => {
                let public = rsa::RsaPublicKey::from(key);
                let rsa_key = der::sequence(&[
                    &der::unsigned_integer(&public.n().to_bytes_be()),
                    &der::unsigned_integer(&public.e().to_bytes_be()),
                ]);
                der::sequence(&[
                    &der::sequence(&[&der::oid("1.2.840.113549.1.1.1"), &der::null()]),
                    &der::bit_string(&rsa_key, 0),
                ])
            }
            KeyPair::EcdsaP256(key) => {
                let point = key.verifying_key().to_encoded_point(false);
                der::sequence(&[
                    &der::sequence(&[
                        &der::oid("1.2.840.10045.2.1"),
                        &der::oid("1.2.840.10045.3.1.7"),
                    ]),
                    &der::bit_string(point.as_bytes(), 0),
                ])
            }
        }
    }

    /// PKCS#1 v1.5 or ECDSA-DER signature over `message` under `alg`.
    pub fn sign(&self, alg: SigAlg, message: &[u8]) -> Vec<u8> {
        match (self, alg) {
            (KeyPair::Rsa(key), _) if alg.is_rsa() => {
                let (padding, digest) = rsa_padding_and_digest(alg, message);
                key.sign(padding, &digest).expect("RSA signing")
            }
            (KeyPair::EcdsaP256(key), SigAlg::EcdsaSha256) => {
                let digest = Sha256::digest(message);
                let sig: p256::ecdsa::Signature =
                    key.sign_prehash(&digest).expect("ECDSA signing");
                sig.to_der().as_bytes().to_vec()
            }
            (KeyPair::EcdsaP256(key), SigAlg::EcdsaSha512) => {
                let digest = Sha512::digest(message);
                let sig: p256::ecdsa::Signature =
                    key.sign_prehash(&digest).expect("ECDSA signing");
                sig.to_der().as_bytes().to_vec()
            }
            _ => panic!("key type does not match signature algorithm {alg:?}"),
        }
    }
}

pub(crate) fn rsa_padding_and_digest(alg: SigAlg, message: &[u8]) -> (Pkcs1v15Sign, Vec<u8>) {
    match alg {
        SigAlg::RsaMd5 => (
            Pkcs1v15Sign::new::<Md5>(),
            Md5::digest(message).to_vec(),
        ),
        SigAlg::RsaSha1 => (
            Pkcs1v15Sign::new::<Sha1>(),
            Sha1::digest(message).to_vec(),
        ),
        SigAlg::RsaSha256 => (
            Pkcs1v15Sign::new::<Sha256>(),
            Sha256::digest(message).to_vec(),
        ),
        SigAlg::RsaSha384 => (
            Pkcs1v15Sign::new::<Sha384>(),
            Sha384::digest(message).to_vec(),
        ),
        SigAlg::RsaSha512 => (
            Pkcs1v15Sign::new::<Sha512>(),
            Sha512::digest(message).to_vec(),
        ),
        _ => panic!("not an RSA algorithm: {alg:?}"),
    }
}

/// Distinguished name as ordered (attribute, value) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Name(pub Vec<(DnAttr, String)>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnAttr {
    CommonName,
    Organization,
    OrganizationalUnit,
    Country,
    Locality,
    State,
    SerialNumber,
}

impl DnAttr {
    fn oid(self) -> &'static str {
        match self {
            DnAttr::CommonName => "2.5.4.3",
            DnAttr::Organization => "2.5.4.10",
            DnAttr::OrganizationalUnit => "2.5.4.11",
            DnAttr::Country => "2.5.4.6",
            DnAttr::Locality => "2.5.4.7",
            DnAttr::State => "2.5.4.8",
            DnAttr::SerialNumber => "2.5.4.5",
        }
    }
}

impl Name {
    pub fn common_name(cn: &str) -> Name {
        Name(vec![(DnAttr::CommonName, cn.to_string())])
    }

    pub fn with(mut self, attr: DnAttr, value: &str) -> Name {
        self.0.push((attr, value.to_string()));
        self
    }

    fn to_der(&self) -> Vec<u8> {
        let rdns: Vec<Vec<u8>> = self
            .0
            .iter()
            .map(|(attr, value)| {
                let string = if *attr == DnAttr::Country {
                    der::printable_string(value)
                } else {
                    der::utf8_string(value)
                };
                der::set(&[&der::sequence(&[&der::oid(attr.oid()), &string])])
            })
            .collect();
        let parts: Vec<&[u8]> = rdns.iter().map(Vec::as_slice).collect();
        der::sequence(&parts)
    }
}

/// Everything needed to issue one certificate.
#[derive(Debug, Clone)]
pub struct CertSpec {
    pub subject: Name,
    pub issuer: Name,
    pub serial: u64,
    pub not_before: DateTime<Utc>,
    pub not_after: DateTime<Utc>,
    pub sig_alg: SigAlg,
    pub is_ca: bool,
}

/// Issues `spec` for `subject_key`, signed by `issuer_key` (self-signed
/// when they are the same key). Returns the certificate DER.
pub fn issue(spec: &CertSpec, subject_key: &KeyPair, issuer_key: &KeyPair) -> Vec<u8> {
    let sig_alg_seq = if spec.sig_alg.is_rsa() {
        der::sequence(&[&der::oid(spec.sig_alg.oid()), &der::null()])
    } else {
        der::sequence(&[&der::oid(spec.sig_alg.oid())])
    };

    let basic_constraints = der::sequence(&[
        &der::oid("2.5.29.19"),
        &der::boolean(true),
        &der::octet_string(&if spec.is_ca {
            der::sequence(&[&der::boolean(true)])
        } else {
            der::sequence(&[])
        }),
    ]);
    let key_usage_bits: (&[u8], u8) = if spec.is_ca {
        (&[0b0000_0110], 1) // keyCertSign, cRLSign
    } else {
        (&[0b1010_0000], 5) // digitalSignature, keyEncipherment
    };
    let key_usage = der::sequence(&[
        &der::oid("2.5.29.15"),
        &der::boolean(true),
        &der::octet_string(&der::bit_string(key_usage_bits.0, key_usage_bits.1)),
    ]);
    let extensions = der::context(3, &der::sequence(&[&basic_constraints, &key_usage]));

    let tbs = der::sequence(&[
        &der::context(0, &der::small_integer(2)), // version v3
        &der::small_integer(spec.serial),
        &sig_alg_seq,
        &spec.issuer.to_der(),
        &der::sequence(&[
            &der::x509_time(spec.not_before),
            &der::x509_time(spec.not_after),
        ]),
        &spec.subject.to_der(),
        &subject_key.spki_der(),
        &extensions,
    ]);

    let signature = issuer_key.sign(spec.sig_alg, &tbs);
    der::sequence(&[&tbs, &sig_alg_seq, &der::bit_string(&signature, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn window() -> (DateTime<Utc>, DateTime<Utc>) {
        (
            Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap(),
            Utc.with_ymd_and_hms(2022, 3, 1, 0, 0, 0).unwrap(),
        )
    }

    #[test]
    fn self_signed_rsa_cert_parses() {
        let key = KeyPair::generate_rsa(1024);
        let (nb, na) = window();
        let spec = CertSpec {
            subject: Name::common_name("device-001").with(DnAttr::Organization, "PlantWorks"),
            issuer: Name::common_name("device-001").with(DnAttr::Organization, "PlantWorks"),
            serial: 7,
            not_before: nb,
            not_after: na,
            sig_alg: SigAlg::RsaSha256,
            is_ca: false,
        };
        let der = issue(&spec, &key, &key);
        let (rest, cert) = x509_parser::parse_x509_certificate(&der).unwrap();
        assert!(rest.is_empty());
        assert_eq!(cert.version(), x509_parser::x509::X509Version::V3);
        assert!(cert.subject().to_string().contains("CN=device-001"));
    }

    #[test]
    fn md5_signed_cert_carries_md5_oid() {
        let key = KeyPair::generate_rsa(1024);
        let (nb, na) = window();
        let spec = CertSpec {
            subject: Name::common_name("legacy"),
            issuer: Name::common_name("legacy"),
            serial: 1,
            not_before: nb,
            not_after: na,
            sig_alg: SigAlg::RsaMd5,
            is_ca: false,
        };
        let der = issue(&spec, &key, &key);
        let (_, cert) = x509_parser::parse_x509_certificate(&der).unwrap();
        assert_eq!(
            cert.signature_algorithm.algorithm.to_id_string(),
            "1.2.840.113549.1.1.4"
        );
    }

    #[test]
    fn ecdsa_cert_parses_with_ec_key() {
        let key = KeyPair::generate_p256();
        let (nb, na) = window();
        let spec = CertSpec {
            subject: Name::common_name("enip-device"),
            issuer: Name::common_name("enip-device"),
            serial: 2,
            not_before: nb,
            not_after: na,
            sig_alg: SigAlg::EcdsaSha512,
            is_ca: false,
        };
        let der = issue(&spec, &key, &key);
        let (_, cert) = x509_parser::parse_x509_certificate(&der).unwrap();
        let spki = cert.public_key();
        assert_eq!(spki.algorithm.algorithm.to_id_string(), "1.2.840.10045.2.1");
    }
}
