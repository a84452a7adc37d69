//! Per-parameter entropy: how much certificate fields vary inside clusters
//! compared to the corpus at large.

use std::collections::BTreeMap;

use audit_certs::{CertificateRecord, KeyType, SigHash};
use serde::{Deserialize, Serialize};

use crate::dbscan::PointLabel;

/// The certificate parameters the entropy table covers, in report order.
pub const PARAMETERS: [&str; 6] = [
    "issuer",
    "key",
    "key_usage",
    "lifetime_days",
    "not_before_date",
    "signature_hash",
];

/// Entropy of one certificate parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    /// Shannon entropy in bits of the parameter over the whole corpus.
    pub global_entropy: f64,
    /// Cluster-size-weighted normalized entropy in `[0, 1]`: each cluster
    /// contributes its entropy divided by the maximum possible for its size.
    pub weighted_cluster_entropy: f64,
}

fn key_type_label(key_type: KeyType) -> &'static str {
    match key_type {
        KeyType::Rsa => "rsa",
        KeyType::Ecdsa => "ecdsa",
        KeyType::Other => "other",
    }
}

fn sig_hash_label(sig_hash: SigHash) -> &'static str {
    match sig_hash {
        SigHash::Md5 => "md5",
        SigHash::Sha1 => "sha1",
        SigHash::Sha256 => "sha256",
        SigHash::Sha384 => "sha384",
        SigHash::Sha512 => "sha512",
        SigHash::Other => "other",
    }
}

/// The comparable value of `parameter` for one certificate.
fn parameter_value(parameter: &str, record: &CertificateRecord) -> String {
    match parameter {
        "issuer" => record.issuer.clone(),
        "key" => format!("{}-{}", key_type_label(record.key_type), record.key_bits),
        "key_usage" => {
            if record.key_usage.is_empty() {
                "none".into()
            } else {
                record.key_usage.join("+")
            }
        }
        "lifetime_days" => (record.not_after - record.not_before).num_days().to_string(),
        "not_before_date" => record.not_before.format("%Y-%m-%d").to_string(),
        "signature_hash" => sig_hash_label(record.sig_hash).into(),
        other => unreachable!("unknown parameter {other}"),
    }
}

/// Shannon entropy in bits of a value multiset.
fn shannon_bits(values: &[String]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
    for value in values {
        *counts.entry(value).or_insert(0.0) += 1.0;
    }
    let total = values.len() as f64;
    -counts
        .values()
        .map(|count| {
            let p = count / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Normalized entropy of one cluster's values: entropy divided by the
/// maximum for the cluster size, zero for singletons or constant values.
fn normalized_cluster_entropy(values: &[String]) -> f64 {
    if values.len() <= 1 {
        return 0.0;
    }
    let bits = shannon_bits(values);
    if bits == 0.0 {
        return 0.0;
    }
    bits / (values.len() as f64).log2()
}

/// Computes the entropy table for a labeled corpus. `records` and `labels`
/// are index-aligned. Every parameter in [`PARAMETERS`] gets a row; with no
/// clusters the weighted column is zero.
pub fn entropy_analysis(
    records: &[CertificateRecord],
    labels: &[PointLabel],
) -> BTreeMap<String, EntropyRow> {
    assert_eq!(records.len(), labels.len(), "records and labels must align");

    let mut clusters: BTreeMap<usize, Vec<&CertificateRecord>> = BTreeMap::new();
    for (record, label) in records.iter().zip(labels) {
        if let PointLabel::Cluster(id) = label {
            clusters.entry(*id).or_default().push(record);
        }
    }
    let clustered_total: f64 = clusters.values().map(|members| members.len() as f64).sum();

    PARAMETERS
        .iter()
        .map(|&parameter| {
            let corpus_values: Vec<String> = records
                .iter()
                .map(|record| parameter_value(parameter, record))
                .collect();
            let weighted = if clustered_total > 0.0 {
                clusters
                    .values()
                    .map(|members| {
                        let values: Vec<String> = members
                            .iter()
                            .map(|record| parameter_value(parameter, record))
                            .collect();
                        (members.len() as f64 / clustered_total)
                            * normalized_cluster_entropy(&values)
                    })
                    .sum()
            } else {
                0.0
            };
            (
                parameter.to_string(),
                EntropyRow {
                    global_entropy: shannon_bits(&corpus_values),
                    weighted_cluster_entropy: weighted,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone, Utc};
    use proptest::prelude::*;

    fn record(issuer: &str, lifetime_days: i64) -> CertificateRecord {
        let not_before = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
        CertificateRecord {
            fingerprint: format!("fp-{issuer}-{lifetime_days}"),
            subject: "CN=leaf".into(),
            issuer: issuer.into(),
            not_before,
            not_after: not_before + Duration::days(lifetime_days),
            key_type: KeyType::Rsa,
            key_bits: 2048,
            sig_hash: SigHash::Sha256,
            chain_validates_public: false,
            key_usage: vec![],
            is_ca: false,
        }
    }

    #[test]
    fn every_parameter_gets_a_row() {
        let records = vec![record("CN=ca", 365)];
        let rows = entropy_analysis(&records, &[PointLabel::Noise]);
        let keys: Vec<&str> = rows.keys().map(String::as_str).collect();
        assert_eq!(keys, PARAMETERS.to_vec());
    }

    #[test]
    fn an_evenly_split_cluster_of_four_scores_one_half() {
        let records = vec![
            record("CN=alpha", 365),
            record("CN=alpha", 365),
            record("CN=beta", 365),
            record("CN=beta", 365),
        ];
        let labels = vec![PointLabel::Cluster(0); 4];
        let rows = entropy_analysis(&records, &labels);
        let issuer = &rows["issuer"];
        assert!((issuer.global_entropy - 1.0).abs() < 1e-12);
        assert!((issuer.weighted_cluster_entropy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_parameters_score_zero_everywhere() {
        let records = vec![record("CN=only", 365); 6];
        let labels = vec![PointLabel::Cluster(0); 6];
        let rows = entropy_analysis(&records, &labels);
        for row in rows.values() {
            assert_eq!(row.global_entropy, 0.0);
            assert_eq!(row.weighted_cluster_entropy, 0.0);
        }
    }

    #[test]
    fn uniform_parameter_gains_nothing_over_the_corpus_baseline() {
        let records: Vec<CertificateRecord> = (0..8)
            .map(|i| record(&format!("CN=issuer-{i}"), 365))
            .collect();
        let labels = vec![PointLabel::Cluster(0); 8];
        let rows = entropy_analysis(&records, &labels);
        let issuer = &rows["issuer"];
        let normalized_global = issuer.global_entropy / (records.len() as f64).log2();
        assert!((issuer.global_entropy - 3.0).abs() < 1e-12);
        assert!((issuer.weighted_cluster_entropy - normalized_global).abs() < 1e-12);
        assert!((issuer.weighted_cluster_entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_sizes_weight_the_average() {
        let mut records = vec![
            record("CN=alpha", 365),
            record("CN=alpha", 365),
            record("CN=beta", 365),
            record("CN=beta", 365),
        ];
        records.extend(vec![record("CN=gamma", 365); 4]);
        let mut labels = vec![PointLabel::Cluster(0); 4];
        labels.extend(vec![PointLabel::Cluster(1); 4]);
        let rows = entropy_analysis(&records, &labels);
        assert!((rows["issuer"].weighted_cluster_entropy - 0.25).abs() < 1e-12);
    }

    #[test]
    fn singleton_clusters_contribute_zero() {
        let records = vec![record("CN=one", 365)];
        let rows = entropy_analysis(&records, &[PointLabel::Cluster(0)]);
        assert_eq!(rows["issuer"].weighted_cluster_entropy, 0.0);
    }

    #[test]
    fn noise_is_excluded_from_the_weighted_column_but_not_the_global() {
        let records = vec![
            record("CN=alpha", 365),
            record("CN=alpha", 365),
            record("CN=alpha", 365),
            record("CN=odd-one-out", 3650),
        ];
        let mut labels = vec![PointLabel::Cluster(0); 3];
        labels.push(PointLabel::Noise);
        let rows = entropy_analysis(&records, &labels);
        assert!(rows["issuer"].global_entropy > 0.0);
        assert_eq!(rows["issuer"].weighted_cluster_entropy, 0.0);
        assert_eq!(rows["lifetime_days"].weighted_cluster_entropy, 0.0);
        assert!(rows["lifetime_days"].global_entropy > 0.0);
    }

    #[test]
    fn parameter_values_read_the_right_fields() {
        let mut r = record("CN=ca, O=Org", 398);
        r.key_type = KeyType::Ecdsa;
        r.key_bits = 256;
        r.sig_hash = SigHash::Sha384;
        r.key_usage = vec!["digital_signature".into(), "key_agreement".into()];
        assert_eq!(parameter_value("issuer", &r), "CN=ca, O=Org");
        assert_eq!(parameter_value("key", &r), "ecdsa-256");
        assert_eq!(
            parameter_value("key_usage", &r),
            "digital_signature+key_agreement"
        );
        assert_eq!(parameter_value("lifetime_days", &r), "398");
        assert_eq!(parameter_value("not_before_date", &r), "2021-03-01");
        assert_eq!(parameter_value("signature_hash", &r), "sha384");
        r.key_usage.clear();
        assert_eq!(parameter_value("key_usage", &r), "none");
    }

    proptest! {
        #[test]
        fn weighted_scores_stay_normalized(
            issuers in proptest::collection::vec(0u8..4, 3..24),
            cluster_of in proptest::collection::vec(proptest::bool::ANY, 3..24),
        ) {
            let records: Vec<CertificateRecord> = issuers
                .iter()
                .map(|i| record(&format!("CN=issuer-{i}"), 365))
                .collect();
            let labels: Vec<PointLabel> = records
                .iter()
                .zip(cluster_of.iter().cycle())
                .map(|(_, in_cluster)| {
                    if *in_cluster { PointLabel::Cluster(0) } else { PointLabel::Noise }
                })
                .collect();
            let rows = entropy_analysis(&records, &labels);
            for row in rows.values() {
                prop_assert!(row.global_entropy >= 0.0);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&row.weighted_cluster_entropy));
            }
        }
    }
}
