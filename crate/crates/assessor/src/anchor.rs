//! Trust-anchor classification for presented certificate chains.

use audit_certs::{chain_validates, CertificateRecord, TrustStores};
use serde::{Deserialize, Serialize};

/// Who vouches for a deployment's certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrustAnchor {
    PublicCa,
    PrivateCa,
    SelfSigned,
}

/// Classifies a presented chain against the loaded trust stores.
///
/// A chain anchored in any one store is publicly trusted, even when the
/// leaf happens to be self-issued (a store root presented directly still
/// counts as public). Otherwise a self-issued leaf is self-signed, and the
/// residual class is a private CA: some other party signed the leaf, but
/// no store vouches for that party. Chains whose leaf does not parse fall
/// through to the residual class as well.
pub fn classify_trust_anchor(chain: &[Vec<u8>], stores: &TrustStores) -> TrustAnchor {
    if chain_validates(chain, stores) {
        return TrustAnchor::PublicCa;
    }
    let self_issued = chain
        .first()
        .and_then(|leaf| CertificateRecord::from_der(leaf).ok())
        .is_some_and(|record| record.self_issued());
    if self_issued {
        TrustAnchor::SelfSigned
    } else {
        TrustAnchor::PrivateCa
    }
}
