//! Security grading for deduplicated deployments.
//!
//! Each check inspects one facet of a deployment's posture: negotiated TLS
//! versions, cipher-battery behavior, certificate trust anchoring,
//! lifetimes, key and signature primitives, and cross-host certificate
//! reuse. Findings carry machine-checkable evidence so report rows can be
//! audited against the raw records. A Mann-Whitney U utility supports
//! comparing observed distributions between populations.

mod anchor;
mod ciphers;
mod lifetime;
mod primitives;
mod reuse;
mod stats;
mod version;

use serde::{Deserialize, Serialize};

pub use anchor::{classify_trust_anchor, TrustAnchor};
pub use ciphers::{check_ciphers, suite_weaknesses};
pub use lifetime::check_lifetime;
pub use primitives::check_primitives;
pub use reuse::{
    classify_reuse, collect_usage, reuse_findings, AllowlistEntry, LoadBalancerAllowlist,
    ReuseClass,
};
pub use stats::mann_whitney_u;
pub use version::check_version;

use audit_certs::{CertificateRecord, TrustStores};
use audit_pipeline::Deployment;
use audit_prober::HandshakeOutcome;
use chrono::{DateTime, Utc};
use std::collections::BTreeSet;

/// What a finding is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    DeprecatedVersion,
    Tls13Capable,
    NoRecSuite,
    WeakCipherAccepted,
    WeakMacAccepted,
    InsecureSuiteAccepted,
    ExpiredCert,
    OverLongLifetime,
    ShortKey,
    WeakSigHash,
    CertReuseIntraAs,
    CertReuseInterAs,
    NoAccessControl,
    DefaultCredentials,
}

impl Check {
    pub fn as_str(self) -> &'static str {
        match self {
            Check::DeprecatedVersion => "deprecated_version",
            Check::Tls13Capable => "tls13_capable",
            Check::NoRecSuite => "no_rec_suite",
            Check::WeakCipherAccepted => "weak_cipher_accepted",
            Check::WeakMacAccepted => "weak_mac_accepted",
            Check::InsecureSuiteAccepted => "insecure_suite_accepted",
            Check::ExpiredCert => "expired_cert",
            Check::OverLongLifetime => "over_long_lifetime",
            Check::ShortKey => "short_key",
            Check::WeakSigHash => "weak_sig_hash",
            Check::CertReuseIntraAs => "cert_reuse_intra_as",
            Check::CertReuseInterAs => "cert_reuse_inter_as",
            Check::NoAccessControl => "no_access_control",
            Check::DefaultCredentials => "default_credentials",
        }
    }

    /// Fixed severity per check: critical marks conditions an attacker can
    /// exploit directly (decryptable suites, factorable keys, shared private
    /// keys across operators, absent access control), warn marks policy
    /// violations, info marks neutral observations.
    pub fn severity(self) -> Severity {
        match self {
            Check::Tls13Capable => Severity::Info,
            Check::DeprecatedVersion
            | Check::NoRecSuite
            | Check::WeakCipherAccepted
            | Check::WeakMacAccepted
            | Check::ExpiredCert
            | Check::OverLongLifetime
            | Check::WeakSigHash
            | Check::CertReuseIntraAs => Severity::Warn,
            Check::InsecureSuiteAccepted
            | Check::ShortKey
            | Check::CertReuseInterAs
            | Check::NoAccessControl
            | Check::DefaultCredentials => Severity::Critical,
        }
    }
}

/// How urgent a finding is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warn,
    Critical,
}

/// One graded observation about one deployment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub deployment: String,
    pub check: Check,
    pub severity: Severity,
    /// Concrete values the check decided on, auditable against raw records.
    pub evidence: String,
}

impl Finding {
    pub fn new(deployment: &str, check: Check, evidence: String) -> Finding {
        Finding {
            deployment: deployment.to_string(),
            check,
            severity: check.severity(),
            evidence,
        }
    }
}

/// Errors from checks whose preconditions can fail.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AssessError {
    #[error("battery is incomplete: expected suite set {expected} at position {position}, found {found}")]
    IncompleteBattery {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("certificate usage set is empty")]
    EmptyUsage,
    #[error("statistical samples must be non-empty")]
    EmptySample,
}

/// Shared inputs for grading a deployment.
pub struct AssessContext<'a> {
    pub trust_stores: &'a TrustStores,
    pub now: DateTime<Utc>,
}

/// Runs every per-deployment check and returns deduplicated findings.
///
/// Cross-deployment reuse checks live in [`reuse_findings`] because they
/// need the whole population. Access-control findings are attached by the
/// caller from probe verdicts. Batteries that fail their shape check yield
/// no cipher findings here; the per-check API surfaces that error.
pub fn assess_deployment(deployment: &Deployment, ctx: &AssessContext) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut seen: BTreeSet<(Check, String)> = BTreeSet::new();
    let mut push = |findings: &mut Vec<Finding>, f: Finding| {
        if seen.insert((f.check, f.evidence.clone())) {
            findings.push(f);
        }
    };

    let mut graded_leaves: BTreeSet<String> = BTreeSet::new();
    for record in &deployment.records {
        let Some(battery) = &record.battery else { continue };
        if !battery.any_accepted() {
            continue;
        }
        if let Some(f) = check_version(&deployment.id, battery) {
            push(&mut findings, f);
        }
        if let Ok(cipher_findings) = check_ciphers(&deployment.id, battery) {
            for f in cipher_findings {
                push(&mut findings, f);
            }
        }
        for handshake in battery.iter() {
            if handshake.outcome != HandshakeOutcome::Accepted || handshake.chain.is_empty() {
                continue;
            }
            let fingerprint = audit_certs::fingerprint(&handshake.chain[0]);
            if !graded_leaves.insert(fingerprint) {
                continue;
            }
            let Ok(mut cert) = CertificateRecord::from_der(&handshake.chain[0]) else {
                continue;
            };
            cert.chain_validates_public = classify_trust_anchor(&handshake.chain, ctx.trust_stores)
                == TrustAnchor::PublicCa;
            for f in check_lifetime(&deployment.id, &cert, ctx.now) {
                push(&mut findings, f);
            }
            for f in check_primitives(&deployment.id, &cert) {
                push(&mut findings, f);
            }
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use audit_catalog::{Catalog, Protocol, Variant};
    use audit_certs::{issue, CertSpec, KeyPair, Name, SigAlg};
    use audit_codecs::ValidationVerdict;
    use audit_pipeline::{dedup, ProbeRecord};
    use audit_prober::{HandshakeResult, SuiteBattery, TransportState};
    use audit_tlswire::suites::SuiteSetName;
    use audit_tlswire::Version;
    use chrono::TimeZone;

    fn bad_posture_battery(chain: Vec<Vec<u8>>) -> SuiteBattery {
        let mut handshakes: Vec<HandshakeResult> = SuiteSetName::ALL
            .into_iter()
            .map(HandshakeResult::empty)
            .collect();
        for h in &mut handshakes {
            h.outcome = HandshakeOutcome::Accepted;
            h.completed = true;
            h.chain = chain.clone();
            h.negotiated_version = Some(Version::Tls10);
        }
        handshakes[0].outcome = HandshakeOutcome::Denied;
        handshakes[2].negotiated_suite = Some(0x0005);
        handshakes[3].negotiated_suite = Some(0xFF02);
        SuiteBattery {
            handshakes: handshakes.try_into().unwrap(),
        }
    }

    #[test]
    fn a_thoroughly_misconfigured_deployment_collects_every_expected_finding() {
        let key = KeyPair::generate_rsa(1024);
        let name = Name::common_name("legacy-plc.internal");
        let spec = CertSpec {
            subject: name.clone(),
            issuer: name,
            serial: 11,
            not_before: Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(),
            not_after: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            sig_alg: SigAlg::RsaMd5,
            is_ca: false,
        };
        let leaf = issue(&spec, &key, &key);

        let catalog = Catalog::builtin();
        let endpoint = audit_catalog::Endpoint::from_catalog(
            &catalog,
            "198.51.100.20".parse().unwrap(),
            Protocol::Mqtt,
            Variant::Secure,
        );
        let record = ProbeRecord::new(
            endpoint,
            TransportState::Alive,
            None,
            Some(bad_posture_battery(vec![leaf])),
            Some(ValidationVerdict::ok(None)),
        );
        let deployments = dedup(vec![record]);
        let ctx = AssessContext {
            trust_stores: &TrustStores::empty(),
            now: Utc.with_ymd_and_hms(2025, 6, 15, 0, 0, 0).unwrap(),
        };
        let findings = assess_deployment(&deployments[0], &ctx);
        let mut checks: Vec<Check> = findings.iter().map(|f| f.check).collect();
        checks.sort();
        assert_eq!(
            checks,
            vec![
                Check::DeprecatedVersion,
                Check::NoRecSuite,
                Check::WeakCipherAccepted,
                Check::WeakMacAccepted,
                Check::InsecureSuiteAccepted,
                Check::ExpiredCert,
                Check::OverLongLifetime,
                Check::ShortKey,
                Check::WeakSigHash,
            ]
        );
        for finding in &findings {
            assert_eq!(finding.deployment, deployments[0].id);
            assert!(!finding.evidence.is_empty());
        }
    }

    #[test]
    fn repeated_records_do_not_duplicate_findings() {
        let key = KeyPair::generate_rsa(1024);
        let name = Name::common_name("dup.internal");
        let spec = CertSpec {
            subject: name.clone(),
            issuer: name,
            serial: 12,
            not_before: Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(),
            not_after: Utc.with_ymd_and_hms(2022, 1, 1, 0, 0, 0).unwrap(),
            sig_alg: SigAlg::RsaSha256,
            is_ca: false,
        };
        let leaf = issue(&spec, &key, &key);
        let catalog = Catalog::builtin();
        let host: std::net::IpAddr = "198.51.100.21".parse().unwrap();
        let secure =
            audit_catalog::Endpoint::from_catalog(&catalog, host, Protocol::Mqtt, Variant::Secure);
        let standard = audit_catalog::Endpoint::from_catalog(
            &catalog,
            host,
            Protocol::Mqtt,
            Variant::Standard,
        );
        let records = vec![
            ProbeRecord::new(
                secure,
                TransportState::Alive,
                None,
                Some(bad_posture_battery(vec![leaf.clone()])),
                Some(ValidationVerdict::ok(None)),
            ),
            ProbeRecord::new(
                standard,
                TransportState::Alive,
                None,
                Some(bad_posture_battery(vec![leaf])),
                Some(ValidationVerdict::ok(None)),
            ),
        ];
        let deployments = dedup(records);
        assert_eq!(deployments.len(), 1);
        let ctx = AssessContext {
            trust_stores: &TrustStores::empty(),
            now: Utc.with_ymd_and_hms(2025, 6, 15, 0, 0, 0).unwrap(),
        };
        let findings = assess_deployment(&deployments[0], &ctx);
        let mut keys: Vec<(Check, &str)> =
            findings.iter().map(|f| (f.check, f.evidence.as_str())).collect();
        let before = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), before);
    }

    #[test]
    fn checks_serialize_with_snake_case_names() {
        let f = Finding::new("h/MQTT", Check::InsecureSuiteAccepted, "x".into());
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"insecure_suite_accepted\""));
        assert!(json.contains("\"critical\""));
        for check in [
            Check::DeprecatedVersion,
            Check::Tls13Capable,
            Check::NoRecSuite,
            Check::WeakCipherAccepted,
            Check::WeakMacAccepted,
            Check::InsecureSuiteAccepted,
            Check::ExpiredCert,
            Check::OverLongLifetime,
            Check::ShortKey,
            Check::WeakSigHash,
            Check::CertReuseIntraAs,
            Check::CertReuseInterAs,
            Check::NoAccessControl,
            Check::DefaultCredentials,
        ] {
            let quoted = serde_json::to_string(&check).unwrap();
            assert_eq!(quoted, format!("\"{}\"", check.as_str()));
        }
    }
}
