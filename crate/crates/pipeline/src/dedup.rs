//! Collapses per-port probe records into per-host deployments.
//!
//! A host that exposes the same service on a standard and a secure port is
//! one deployment, not two. Records for the same host and protocol merge
//! when they present at most one distinct TLS configuration (leaf
//! certificate fingerprint plus cipher-battery outcome vector); hosts whose
//! ports answer with different configurations are treated as distinct
//! deployments behind one address.

use std::collections::{BTreeMap, BTreeSet};
use std::net::IpAddr;

use audit_catalog::Protocol;
use audit_prober::HandshakeOutcome;
use serde::{Deserialize, Serialize};

use crate::{FunnelStage, ProbeRecord, TlsConfig};

/// How a deployment offers its protocol: in plaintext, over TLS, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adoption {
    PlaintextOnly,
    TlsOnly,
    OptionalTls,
}

/// One deduplicated service: a host, a protocol, and every record that
/// contributed to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    /// Stable identifier, `host/protocol` with a `#n` suffix when one host
    /// presents several distinct configurations.
    pub id: String,
    pub host: IpAddr,
    pub protocol: Protocol,
    pub adoption: Adoption,
    pub records: Vec<ProbeRecord>,
    /// Autonomous system of the host, filled in by annotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asn: Option<u32>,
    /// Fingerprints of every leaf certificate served by this deployment.
    pub cert_fingerprints: BTreeSet<String>,
    /// Subject common names of those leaf certificates.
    pub common_names: BTreeSet<String>,
}

impl Deployment {
    /// A deployment counts as a reachable, protocol-speaking service when
    /// any of its records answered the application probe, in plaintext or
    /// over TLS.
    pub fn is_valid_service(&self) -> bool {
        self.records
            .iter()
            .any(|r| r.stage == FunnelStage::Valid || r.plain_valid())
    }

    /// The deployment answered the application probe over TLS.
    pub fn has_valid_tls(&self) -> bool {
        self.records.iter().any(|r| r.stage == FunnelStage::Valid)
    }

    fn build(host: IpAddr, protocol: Protocol, records: Vec<ProbeRecord>) -> Deployment {
        let has_plain = records.iter().any(|r| r.plain_valid());
        let has_tls = records.iter().any(|r| r.stage == FunnelStage::Valid);
        let adoption = match (has_plain, has_tls) {
            (true, true) => Adoption::OptionalTls,
            (false, true) => Adoption::TlsOnly,
            _ => Adoption::PlaintextOnly,
        };

        let mut cert_fingerprints = BTreeSet::new();
        let mut common_names = BTreeSet::new();
        for record in &records {
            let Some(battery) = &record.battery else { continue };
            for handshake in battery.iter() {
                if handshake.outcome != HandshakeOutcome::Accepted {
                    continue;
                }
                let Some(leaf) = handshake.chain.first() else { continue };
                cert_fingerprints.insert(audit_certs::fingerprint(leaf));
                if let Some(cn) = audit_certs::subject_common_name(leaf) {
                    common_names.insert(cn);
                }
            }
        }

        Deployment {
            id: format!("{host}/{protocol}"),
            host,
            protocol,
            adoption,
            records,
            asn: None,
            cert_fingerprints,
            common_names,
        }
    }
}

/// Groups records by host and protocol and merges each group into one or
/// more deployments.
///
/// Within a group, records that accepted at least one handshake are
/// partitioned by their [`TlsConfig`]; records without TLS evidence join
/// the TLS partition when there is exactly one, and otherwise form a
/// plaintext deployment of their own. Every input record lands in exactly
/// one deployment, including records that never validated, so downstream
/// aggregation decides what to count.
pub fn dedup(records: Vec<ProbeRecord>) -> Vec<Deployment> {
    let mut groups: BTreeMap<(IpAddr, Protocol), Vec<ProbeRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.endpoint.host, record.endpoint.protocol))
            .or_default()
            .push(record);
    }

    let mut deployments = Vec::new();
    for ((host, protocol), group) in groups {
        let mut configs: BTreeSet<TlsConfig> = BTreeSet::new();
        for record in &group {
            if let Some(config) = record.tls_config() {
                configs.insert(config);
            }
        }

        if configs.len() <= 1 {
            deployments.push(Deployment::build(host, protocol, group));
            continue;
        }

        let mut partitions: BTreeMap<Option<TlsConfig>, Vec<ProbeRecord>> = BTreeMap::new();
        for record in group {
            partitions.entry(record.tls_config()).or_default().push(record);
        }
        let split: Vec<Deployment> = partitions
            .into_values()
            .enumerate()
            .map(|(i, part)| {
                let mut deployment = Deployment::build(host, protocol, part);
                deployment.id = format!("{host}/{protocol}#{i}");
                deployment
            })
            .collect();
        deployments.extend(split);
    }
    deployments
}
