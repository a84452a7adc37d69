//! Per-protocol rollups: funnel counts over raw records and adoption
//! summaries over deduplicated deployments.

use std::collections::BTreeMap;
use std::net::IpAddr;

use audit_catalog::{classify_adoption_group, AdoptionGroup, Protocol};
use serde::{Deserialize, Serialize};

use crate::{Adoption, Deployment, FunnelStage, ProbeRecord};

/// How many records survived each validation step; counts are cumulative,
/// so `transport >= tls_valid >= ... >= valid` always holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelCounts {
    /// Records probed at all, including ones that never answered.
    pub probed: u64,
    pub transport: u64,
    pub tls_valid: u64,
    pub auth_ok: u64,
    pub tls_success: u64,
    pub valid: u64,
}

impl FunnelCounts {
    pub fn from_stages<I: IntoIterator<Item = FunnelStage>>(stages: I) -> FunnelCounts {
        let mut counts = FunnelCounts::default();
        for stage in stages {
            counts.probed += 1;
            for (slot, step) in [
                (&mut counts.transport, FunnelStage::Transport),
                (&mut counts.tls_valid, FunnelStage::TlsValid),
                (&mut counts.auth_ok, FunnelStage::AuthOk),
                (&mut counts.tls_success, FunnelStage::TlsSuccess),
                (&mut counts.valid, FunnelStage::Valid),
            ] {
                if stage >= step {
                    *slot += 1;
                }
            }
        }
        counts
    }

    /// The five cumulative stage counts in funnel order.
    pub fn steps(&self) -> [u64; 5] {
        [
            self.transport,
            self.tls_valid,
            self.auth_ok,
            self.tls_success,
            self.valid,
        ]
    }
}

/// Funnel counts per protocol over raw probe records.
pub fn funnel_by_protocol(records: &[ProbeRecord]) -> BTreeMap<Protocol, FunnelCounts> {
    let mut stages: BTreeMap<Protocol, Vec<FunnelStage>> = BTreeMap::new();
    for record in records {
        stages
            .entry(record.endpoint.protocol)
            .or_default()
            .push(record.stage);
    }
    stages
        .into_iter()
        .map(|(protocol, list)| (protocol, FunnelCounts::from_stages(list)))
        .collect()
}

/// One protocol's adoption picture over deduplicated deployments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub protocol: Protocol,
    /// Deployments with at least one record that answered the application
    /// probe, plaintext or TLS.
    pub deployments: u64,
    /// Deployments that answered the application probe over TLS.
    pub tls_deployments: u64,
    /// `tls_deployments` as a percentage of `deployments`; zero when there
    /// are no deployments.
    pub pct_tls: f64,
    /// Distinct autonomous systems hosting the TLS deployments, counting
    /// only annotated hosts.
    pub distinct_ases: u64,
    /// Distinct leaf-certificate subject common names across the TLS
    /// deployments.
    pub distinct_common_names: u64,
    pub adoption_group: AdoptionGroup,
}

/// Fills in each deployment's autonomous system from a lookup function.
pub fn annotate_asn<F>(deployments: &mut [Deployment], asn_of: F)
where
    F: Fn(IpAddr) -> Option<u32>,
{
    for deployment in deployments {
        deployment.asn = asn_of(deployment.host);
    }
}

/// Rolls deployments up into one summary row per protocol, in catalog
/// order. Only valid services count toward the totals; TLS columns cover
/// only deployments that spoke the protocol over TLS.
pub fn aggregate(deployments: &[Deployment]) -> Vec<ProtocolSummary> {
    Protocol::ALL
        .into_iter()
        .map(|protocol| {
            let valid: Vec<&Deployment> = deployments
                .iter()
                .filter(|d| d.protocol == protocol && d.is_valid_service())
                .collect();
            let tls: Vec<&&Deployment> = valid
                .iter()
                .filter(|d| d.adoption != Adoption::PlaintextOnly)
                .collect();

            let deployments_count = valid.len() as u64;
            let tls_count = tls.len() as u64;
            let pct_tls = if deployments_count == 0 {
                0.0
            } else {
                tls_count as f64 / deployments_count as f64 * 100.0
            };
            let distinct_ases = tls
                .iter()
                .filter_map(|d| d.asn)
                .collect::<std::collections::BTreeSet<u32>>()
                .len() as u64;
            let distinct_common_names = tls
                .iter()
                .flat_map(|d| d.common_names.iter())
                .collect::<std::collections::BTreeSet<&String>>()
                .len() as u64;

            ProtocolSummary {
                protocol,
                deployments: deployments_count,
                tls_deployments: tls_count,
                pct_tls,
                distinct_ases,
                distinct_common_names,
                adoption_group: classify_adoption_group(tls_count, pct_tls),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedup;
    use crate::fixtures::{accepted_battery, endpoint};
    use audit_catalog::Variant;
    use audit_certs::{issue, CertSpec, KeyPair, Name, SigAlg};
    use audit_codecs::ValidationVerdict;
    use audit_prober::TransportState;
    use chrono::{Duration, Utc};

    fn leaf_with_cn(cn: &str) -> Vec<u8> {
        let key = KeyPair::generate_rsa(2048);
        let name = Name::common_name(cn);
        let spec = CertSpec {
            subject: name.clone(),
            issuer: name,
            serial: 1,
            not_before: Utc::now() - Duration::days(1),
            not_after: Utc::now() + Duration::days(90),
            sig_alg: SigAlg::RsaSha256,
            is_ca: false,
        };
        issue(&spec, &key, &key)
    }

    fn tls_deployment_record(host: &str, port: u16, leaf: &[u8]) -> ProbeRecord {
        ProbeRecord::new(
            endpoint(host, Protocol::Mqtt, Variant::Secure, port),
            TransportState::Alive,
            None,
            Some(accepted_battery(&[leaf.to_vec()])),
            Some(ValidationVerdict::ok(None)),
        )
    }

    #[test]
    fn funnel_counts_are_cumulative_over_stages() {
        let counts = FunnelCounts::from_stages([
            FunnelStage::None,
            FunnelStage::Transport,
            FunnelStage::Transport,
            FunnelStage::TlsValid,
            FunnelStage::AuthOk,
            FunnelStage::TlsSuccess,
            FunnelStage::Valid,
            FunnelStage::Valid,
        ]);
        assert_eq!(counts.probed, 8);
        assert_eq!(counts.steps(), [7, 5, 4, 3, 2]);
        for pair in counts.steps().windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn three_deployments_in_two_ases_with_two_names() {
        let broker = leaf_with_cn("broker.example.net");
        let shared = leaf_with_cn("iot-gw.example.org");
        let mut deployments = dedup(vec![
            tls_deployment_record("198.51.100.1", 8883, &broker),
            tls_deployment_record("198.51.100.2", 8883, &shared),
            tls_deployment_record("203.0.113.5", 8883, &shared),
        ]);
        annotate_asn(&mut deployments, |ip| match ip {
            IpAddr::V4(v4) if v4.octets()[0] == 198 => Some(64500),
            _ => Some(64501),
        });

        let rows = aggregate(&deployments);
        let row = rows.iter().find(|r| r.protocol == Protocol::Mqtt).unwrap();
        assert_eq!(row.deployments, 3);
        assert_eq!(row.tls_deployments, 3);
        assert_eq!(row.pct_tls, 100.0);
        assert_eq!(row.distinct_ases, 2);
        assert_eq!(row.distinct_common_names, 2);
        assert_eq!(row.adoption_group, AdoptionGroup::Small);
    }

    #[test]
    fn protocols_without_deployments_get_zero_rows() {
        let rows = aggregate(&[]);
        assert_eq!(rows.len(), Protocol::ALL.len());
        for (row, protocol) in rows.iter().zip(Protocol::ALL) {
            assert_eq!(row.protocol, protocol);
            assert_eq!(row.deployments, 0);
            assert_eq!(row.pct_tls, 0.0);
            assert_eq!(row.adoption_group, AdoptionGroup::Small);
        }
    }

    #[test]
    fn plaintext_deployments_count_toward_totals_but_not_tls_columns() {
        let leaf = leaf_with_cn("lonely.example.com");
        let plain: Vec<ProbeRecord> = (1..=15)
            .map(|i| {
                ProbeRecord::new(
                    endpoint(
                        &format!("203.0.113.{i}"),
                        Protocol::Mqtt,
                        Variant::Standard,
                        1883,
                    ),
                    TransportState::Alive,
                    Some(ValidationVerdict::ok(None)),
                    None,
                    None,
                )
            })
            .collect();
        let mut records = plain;
        records.push(tls_deployment_record("198.51.100.9", 8883, &leaf));

        let mut deployments = dedup(records);
        annotate_asn(&mut deployments, |_| Some(64512));
        let rows = aggregate(&deployments);
        let row = rows.iter().find(|r| r.protocol == Protocol::Mqtt).unwrap();
        assert_eq!(row.deployments, 16);
        assert_eq!(row.tls_deployments, 1);
        assert!((row.pct_tls - 6.25).abs() < 1e-12);
        assert_eq!(row.distinct_ases, 1);
        assert_eq!(row.distinct_common_names, 1);
    }

    #[test]
    fn invalid_deployments_never_reach_the_totals() {
        let dead = ProbeRecord::new(
            endpoint("198.51.100.77", Protocol::Mqtt, Variant::Secure, 8883),
            TransportState::Dead,
            None,
            None,
            None,
        );
        let deployments = dedup(vec![dead]);
        assert_eq!(deployments.len(), 1);
        let rows = aggregate(&deployments);
        let row = rows.iter().find(|r| r.protocol == Protocol::Mqtt).unwrap();
        assert_eq!(row.deployments, 0);
    }

    #[test]
    fn unannotated_hosts_do_not_inflate_as_counts() {
        let leaf = leaf_with_cn("partial.example.com");
        let mut deployments = dedup(vec![
            tls_deployment_record("198.51.100.1", 8883, &leaf),
            tls_deployment_record("198.51.100.2", 8883, &leaf),
        ]);
        annotate_asn(&mut deployments, |ip| {
            (ip == "198.51.100.1".parse::<IpAddr>().unwrap()).then_some(64500)
        });
        let rows = aggregate(&deployments);
        let row = rows.iter().find(|r| r.protocol == Protocol::Mqtt).unwrap();
        assert_eq!(row.distinct_ases, 1);
        assert_eq!(row.distinct_common_names, 1);
    }
}
