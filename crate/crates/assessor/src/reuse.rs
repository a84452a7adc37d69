//! Cross-host certificate reuse detection.
//!
//! A leaf certificate on one or two addresses is normal operation; dynamic
//! addressing alone moves a host between addresses. Seeing the same leaf on
//! more than two addresses means the private key is shared, which is graded
//! by how far the sharing spreads: within one autonomous system (a fleet
//! under one operator) or across several (unrelated parties can impersonate
//! each other).

use std::collections::{BTreeMap, BTreeSet};
use std::net::IpAddr;

use audit_pipeline::Deployment;
use audit_prober::HandshakeOutcome;
use serde::{Deserialize, Serialize};

use crate::{AssessError, Check, Finding};

/// How widely one certificate is deployed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReuseClass {
    NotReused,
    IntraAs,
    InterAs,
}

/// Classifies one certificate's usage set.
///
/// At most two distinct addresses is never reuse, whatever the AS count,
/// so a dual-homed or re-addressed host is not flagged. More than two
/// addresses inside one AS is intra-AS reuse; spanning several ASes is
/// inter-AS reuse. The three classes partition all non-empty usage sets.
pub fn classify_reuse(usage: &BTreeSet<(IpAddr, u32)>) -> Result<ReuseClass, AssessError> {
    if usage.is_empty() {
        return Err(AssessError::EmptyUsage);
    }
    let ips: BTreeSet<IpAddr> = usage.iter().map(|(ip, _)| *ip).collect();
    let ases: BTreeSet<u32> = usage.iter().map(|(_, asn)| *asn).collect();
    if ips.len() <= 2 {
        Ok(ReuseClass::NotReused)
    } else if ases.len() == 1 {
        Ok(ReuseClass::IntraAs)
    } else {
        Ok(ReuseClass::InterAs)
    }
}

/// One exempted certificate identity; empty fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllowlistEntry {
    pub common_name: String,
    pub organization: String,
}

/// Certificates excused from reuse findings, typically load balancers and
/// CDN frontends that legitimately terminate TLS for many addresses,
/// recognized by subject common name and organization substrings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadBalancerAllowlist {
    pub entries: Vec<AllowlistEntry>,
}

impl LoadBalancerAllowlist {
    pub fn exempts(&self, subject_dn: &str) -> bool {
        let cn = dn_component(subject_dn, "CN").unwrap_or_default();
        let org = dn_component(subject_dn, "O").unwrap_or_default();
        self.entries.iter().any(|entry| {
            (entry.common_name.is_empty() || cn.contains(&entry.common_name))
                && (entry.organization.is_empty() || org.contains(&entry.organization))
        })
    }
}

/// Extracts one attribute value from a `CN=a, O=b` style name string.
fn dn_component(dn: &str, attr: &str) -> Option<String> {
    dn.split(", ")
        .filter_map(|part| part.split_once('='))
        .find(|(key, _)| key.trim() == attr)
        .map(|(_, value)| value.to_string())
}

/// Builds each leaf certificate's usage set over annotated deployments.
///
/// Deployments without an AS annotation are skipped: AS spread cannot be
/// measured without route data, and guessing would fabricate reuse classes.
pub fn collect_usage(
    deployments: &[Deployment],
) -> BTreeMap<String, BTreeSet<(IpAddr, u32)>> {
    let mut usage: BTreeMap<String, BTreeSet<(IpAddr, u32)>> = BTreeMap::new();
    for deployment in deployments {
        let Some(asn) = deployment.asn else { continue };
        for fingerprint in &deployment.cert_fingerprints {
            usage
                .entry(fingerprint.clone())
                .or_default()
                .insert((deployment.host, asn));
        }
    }
    usage
}

/// Emits reuse findings across a whole population of deployments.
///
/// Every deployment serving a reused certificate receives the finding, so
/// report consumers can see all affected services, not just one
/// representative. Allowlisted certificate identities are exempt.
pub fn reuse_findings(
    deployments: &[Deployment],
    allowlist: &LoadBalancerAllowlist,
) -> Vec<Finding> {
    let usage = collect_usage(deployments);
    let subjects = leaf_subjects(deployments);

    let mut findings = Vec::new();
    for (fingerprint, used_at) in &usage {
        let class = classify_reuse(used_at).expect("collect_usage never builds empty sets");
        let check = match class {
            ReuseClass::NotReused => continue,
            ReuseClass::IntraAs => Check::CertReuseIntraAs,
            ReuseClass::InterAs => Check::CertReuseInterAs,
        };
        if let Some(subject) = subjects.get(fingerprint) {
            if allowlist.exempts(subject) {
                continue;
            }
        }
        let ips: BTreeSet<IpAddr> = used_at.iter().map(|(ip, _)| *ip).collect();
        let ases: BTreeSet<u32> = used_at.iter().map(|(_, asn)| *asn).collect();
        let evidence = format!(
            "leaf {} serves {} addresses across {} autonomous systems",
            &fingerprint[..12.min(fingerprint.len())],
            ips.len(),
            ases.len()
        );
        for deployment in deployments {
            if deployment.cert_fingerprints.contains(fingerprint) {
                findings.push(Finding::new(&deployment.id, check, evidence.clone()));
            }
        }
    }
    findings
}

fn leaf_subjects(deployments: &[Deployment]) -> BTreeMap<String, String> {
    let mut subjects = BTreeMap::new();
    for deployment in deployments {
        for record in &deployment.records {
            let Some(battery) = &record.battery else { continue };
            for handshake in battery.iter() {
                if handshake.outcome != HandshakeOutcome::Accepted {
                    continue;
                }
                let Some(leaf) = handshake.chain.first() else { continue };
                let fingerprint = audit_certs::fingerprint(leaf);
                subjects.entry(fingerprint).or_insert_with(|| {
                    audit_certs::CertificateRecord::from_der(leaf)
                        .map(|r| r.subject)
                        .unwrap_or_default()
                });
            }
        }
    }
    subjects
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(last: u8) -> IpAddr {
        IpAddr::from([192, 0, 2, last])
    }

    fn usage(pairs: &[(u8, u32)]) -> BTreeSet<(IpAddr, u32)> {
        pairs.iter().map(|(last, asn)| (ip(*last), *asn)).collect()
    }

    #[test]
    fn one_address_is_not_reuse() {
        assert_eq!(
            classify_reuse(&usage(&[(1, 64500)])).unwrap(),
            ReuseClass::NotReused
        );
    }

    #[test]
    fn three_addresses_in_one_as_is_intra_as() {
        assert_eq!(
            classify_reuse(&usage(&[(1, 64500), (2, 64500), (3, 64500)])).unwrap(),
            ReuseClass::IntraAs
        );
    }

    #[test]
    fn three_addresses_in_three_ases_is_inter_as() {
        assert_eq!(
            classify_reuse(&usage(&[(1, 64500), (2, 64501), (3, 64502)])).unwrap(),
            ReuseClass::InterAs
        );
    }

    #[test]
    fn two_addresses_are_never_reuse_even_across_ases() {
        assert_eq!(
            classify_reuse(&usage(&[(1, 64500), (2, 64501)])).unwrap(),
            ReuseClass::NotReused
        );
    }

    #[test]
    fn one_multihomed_address_is_not_reuse() {
        assert_eq!(
            classify_reuse(&usage(&[(1, 64500), (1, 64501)])).unwrap(),
            ReuseClass::NotReused
        );
    }

    #[test]
    fn empty_usage_is_an_error() {
        assert_eq!(
            classify_reuse(&BTreeSet::new()).unwrap_err(),
            AssessError::EmptyUsage
        );
    }

    #[test]
    fn every_small_usage_set_lands_in_exactly_one_class() {
        // All assignments of up to 4 addresses to up to 3 ASes.
        for host_count in 1usize..=4 {
            for assignment in 0u32..3u32.pow(host_count as u32) {
                let mut pairs = Vec::new();
                let mut rest = assignment;
                for host in 0..host_count {
                    pairs.push((host as u8 + 1, 64500 + rest % 3));
                    rest /= 3;
                }
                let set = usage(&pairs);
                let class = classify_reuse(&set).unwrap();
                let ips: BTreeSet<IpAddr> = set.iter().map(|(i, _)| *i).collect();
                let ases: BTreeSet<u32> = set.iter().map(|(_, a)| *a).collect();
                let expected = if ips.len() <= 2 {
                    ReuseClass::NotReused
                } else if ases.len() == 1 {
                    ReuseClass::IntraAs
                } else {
                    ReuseClass::InterAs
                };
                assert_eq!(class, expected, "hosts={host_count} assignment={assignment}");
            }
        }
    }

    #[test]
    fn allowlist_matches_on_cn_and_organization_substrings() {
        let allowlist = LoadBalancerAllowlist {
            entries: vec![AllowlistEntry {
                common_name: "edge-lb".into(),
                organization: "Cloud".into(),
            }],
        };
        assert!(allowlist.exempts("CN=edge-lb-7.example.net, O=Cloud Frontends Inc"));
        assert!(!allowlist.exempts("CN=edge-lb-7.example.net, O=Factory"));
        assert!(!allowlist.exempts("CN=plc-3, O=Cloud Frontends Inc"));
    }

    #[test]
    fn empty_allowlist_fields_act_as_wildcards() {
        let allowlist = LoadBalancerAllowlist {
            entries: vec![AllowlistEntry {
                common_name: String::new(),
                organization: "Akamai".into(),
            }],
        };
        assert!(allowlist.exempts("CN=anything, O=Akamai Technologies"));
        assert!(!allowlist.exempts("CN=anything, O=Other"));
    }

    mod population {
        use super::*;
        use audit_certs::{issue, CertSpec, DnAttr, KeyPair, Name, SigAlg};
        use audit_codecs::ValidationVerdict;
        use audit_pipeline::{dedup, ProbeRecord};
        use audit_prober::{HandshakeResult, SuiteBattery, TransportState};
        use audit_tlswire::suites::SuiteSetName;
        use chrono::{TimeZone, Utc};

        fn shared_leaf(cn: &str, org: &str) -> Vec<u8> {
            let key = KeyPair::generate_rsa(1024);
            let name = Name::common_name(cn).with(DnAttr::Organization, org);
            let spec = CertSpec {
                subject: name.clone(),
                issuer: name,
                serial: 31,
                not_before: Utc.with_ymd_and_hms(2023, 1, 1, 0, 0, 0).unwrap(),
                not_after: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
                sig_alg: SigAlg::RsaSha256,
                is_ca: false,
            };
            issue(&spec, &key, &key)
        }

        fn serving_deployments(leaf: &[u8], hosts: &[(u8, u32)]) -> Vec<Deployment> {
            let catalog = audit_catalog::Catalog::builtin();
            let records: Vec<ProbeRecord> = hosts
                .iter()
                .map(|(last, _)| {
                    let mut handshakes: Vec<HandshakeResult> = SuiteSetName::ALL
                        .into_iter()
                        .map(HandshakeResult::empty)
                        .collect();
                    handshakes[0].outcome = HandshakeOutcome::Accepted;
                    handshakes[0].completed = true;
                    handshakes[0].chain = vec![leaf.to_vec()];
                    for h in &mut handshakes[1..] {
                        h.outcome = HandshakeOutcome::Denied;
                    }
                    let endpoint = audit_catalog::Endpoint::from_catalog(
                        &catalog,
                        ip(*last),
                        audit_catalog::Protocol::Mqtt,
                        audit_catalog::Variant::Secure,
                    );
                    ProbeRecord::new(
                        endpoint,
                        TransportState::Alive,
                        None,
                        Some(SuiteBattery {
                            handshakes: handshakes.try_into().unwrap(),
                        }),
                        Some(ValidationVerdict::ok(None)),
                    )
                })
                .collect();
            let mut deployments = dedup(records);
            for deployment in &mut deployments {
                deployment.asn = hosts
                    .iter()
                    .find(|(last, _)| ip(*last) == deployment.host)
                    .map(|(_, asn)| *asn);
            }
            deployments
        }

        #[test]
        fn a_key_shared_across_ases_flags_every_serving_deployment() {
            let leaf = shared_leaf("iot-gw", "Factory");
            let deployments =
                serving_deployments(&leaf, &[(1, 64500), (2, 64500), (3, 64501)]);
            let findings = reuse_findings(&deployments, &LoadBalancerAllowlist::default());
            assert_eq!(findings.len(), 3);
            for finding in &findings {
                assert_eq!(finding.check, Check::CertReuseInterAs);
                assert_eq!(finding.severity, crate::Severity::Critical);
                assert!(finding.evidence.contains("3 addresses across 2 autonomous systems"));
            }
        }

        #[test]
        fn a_fleet_inside_one_as_grades_as_intra_as() {
            let leaf = shared_leaf("fleet-node", "Factory");
            let deployments =
                serving_deployments(&leaf, &[(1, 64500), (2, 64500), (3, 64500)]);
            let findings = reuse_findings(&deployments, &LoadBalancerAllowlist::default());
            assert_eq!(findings.len(), 3);
            assert!(findings.iter().all(|f| f.check == Check::CertReuseIntraAs));
        }

        #[test]
        fn two_hosts_sharing_a_certificate_stay_silent() {
            let leaf = shared_leaf("pair", "Factory");
            let deployments = serving_deployments(&leaf, &[(1, 64500), (2, 64501)]);
            assert!(reuse_findings(&deployments, &LoadBalancerAllowlist::default()).is_empty());
        }

        #[test]
        fn allowlisted_load_balancers_are_exempt() {
            let leaf = shared_leaf("edge-lb-3", "Cloud Frontends");
            let deployments =
                serving_deployments(&leaf, &[(1, 64500), (2, 64501), (3, 64502)]);
            let allowlist = LoadBalancerAllowlist {
                entries: vec![AllowlistEntry {
                    common_name: "edge-lb".into(),
                    organization: "Cloud".into(),
                }],
            };
            assert!(reuse_findings(&deployments, &allowlist).is_empty());
            let findings = reuse_findings(&deployments, &LoadBalancerAllowlist::default());
            assert_eq!(findings.len(), 3);
        }
    }

    #[test]
    fn allowlist_round_trips_through_json() {
        let allowlist = LoadBalancerAllowlist {
            entries: vec![AllowlistEntry {
                common_name: "lb".into(),
                organization: "Example".into(),
            }],
        };
        let json = serde_json::to_string(&allowlist).unwrap();
        let back: LoadBalancerAllowlist = serde_json::from_str(&json).unwrap();
        assert_eq!(allowlist, back);
    }
}
