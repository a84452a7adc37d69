//! Certificate lifetime and expiry grading.
//!
//! Maximum lifetimes follow the CA/Browser-forum reductions, keyed by when
//! the certificate's validity starts: from June 2016 at most 39 calendar
//! months, from February 2018 at most 825 days, from September 2020 at most
//! 398 days. Certificates starting earlier carry no cap. Boundaries are UTC
//! month starts, inclusive.

use audit_certs::CertificateRecord;
use chrono::{DateTime, Days, Months, TimeZone, Utc};

use crate::{Check, Finding};

fn era_start(y: i32, m: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, m, 1, 0, 0, 0).unwrap()
}

/// Latest allowed `not_after` for a validity starting at `not_before`, or
/// `None` when no cap applies.
fn cap_end(not_before: DateTime<Utc>) -> Option<DateTime<Utc>> {
    if not_before >= era_start(2020, 9) {
        not_before.checked_add_days(Days::new(398))
    } else if not_before >= era_start(2018, 2) {
        not_before.checked_add_days(Days::new(825))
    } else if not_before >= era_start(2016, 6) {
        not_before.checked_add_months(Months::new(39))
    } else {
        None
    }
}

/// Flags certificates that are expired at `now` and certificates whose
/// validity window exceeds the cap of their issuance era.
pub fn check_lifetime(
    deployment: &str,
    cert: &CertificateRecord,
    now: DateTime<Utc>,
) -> Vec<Finding> {
    let mut findings = Vec::new();
    if now > cert.not_after {
        findings.push(Finding::new(
            deployment,
            Check::ExpiredCert,
            format!(
                "not_after {} is past grading time {}",
                cert.not_after.format("%Y-%m-%dT%H:%M:%SZ"),
                now.format("%Y-%m-%dT%H:%M:%SZ")
            ),
        ));
    }
    if let Some(cap) = cap_end(cert.not_before) {
        if cert.not_after > cap {
            let days = (cert.not_after - cert.not_before).num_days();
            let allowed = (cap - cert.not_before).num_days();
            findings.push(Finding::new(
                deployment,
                Check::OverLongLifetime,
                format!(
                    "lifetime of {days} days from {} exceeds the {allowed}-day cap of its era",
                    cert.not_before.format("%Y-%m-%d")
                ),
            ));
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use audit_certs::{KeyType, SigHash};
    use proptest::prelude::*;

    fn record(not_before: DateTime<Utc>, not_after: DateTime<Utc>) -> CertificateRecord {
        CertificateRecord {
            fingerprint: "00".repeat(32),
            subject: "CN=test".into(),
            issuer: "CN=test".into(),
            not_before,
            not_after,
            key_type: KeyType::Rsa,
            key_bits: 2048,
            sig_hash: SigHash::Sha256,
            chain_validates_public: false,
            key_usage: Vec::new(),
            is_ca: false,
        }
    }

    fn day(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
    }

    fn flags(cert: &CertificateRecord, now: DateTime<Utc>) -> (bool, bool) {
        let findings = check_lifetime("d", cert, now);
        (
            findings.iter().any(|f| f.check == Check::OverLongLifetime),
            findings.iter().any(|f| f.check == Check::ExpiredCert),
        )
    }

    const NOW: (i32, u32, u32) = (2025, 6, 15);

    #[test]
    fn five_years_from_2021_is_over_long() {
        let cert = record(day(2021, 1, 1), day(2026, 1, 1));
        let (over, expired) = flags(&cert, day(NOW.0, NOW.1, NOW.2));
        assert!(over);
        assert!(!expired);
    }

    #[test]
    fn one_year_from_2021_is_fine_while_valid() {
        let cert = record(day(2021, 1, 1), day(2022, 1, 1));
        let findings = check_lifetime("d", &cert, day(2021, 6, 1));
        assert!(findings.is_empty());
    }

    #[test]
    fn yesterday_expiry_is_expired() {
        let cert = record(day(2024, 6, 20), day(2025, 6, 14));
        let (over, expired) = flags(&cert, day(NOW.0, NOW.1, NOW.2));
        assert!(!over);
        assert!(expired);
    }

    #[test]
    fn expiring_exactly_at_grading_time_is_not_expired_yet() {
        let cert = record(day(2024, 6, 20), day(2025, 6, 15));
        let (_, expired) = flags(&cert, day(NOW.0, NOW.1, NOW.2));
        assert!(!expired);
    }

    #[test]
    fn each_era_accepts_its_cap_and_rejects_one_more_day() {
        let cases = [
            (day(2016, 6, 1), day(2019, 9, 1), day(2019, 9, 2)),
            (day(2018, 2, 1), day(2020, 5, 6), day(2020, 5, 7)),
            (day(2020, 9, 1), day(2021, 10, 4), day(2021, 10, 5)),
        ];
        for (nb, at_cap, past_cap) in cases {
            let (over, _) = flags(&record(nb, at_cap), day(NOW.0, NOW.1, NOW.2));
            assert!(!over, "at-cap from {nb} flagged");
            let (over, _) = flags(&record(nb, past_cap), day(NOW.0, NOW.1, NOW.2));
            assert!(over, "past-cap from {nb} not flagged");
        }
    }

    #[test]
    fn month_arithmetic_clamps_at_month_ends() {
        let nb = day(2018, 1, 31);
        let (over, _) = flags(&record(nb, day(2021, 4, 30)), day(NOW.0, NOW.1, NOW.2));
        assert!(!over);
        let (over, _) = flags(&record(nb, day(2021, 5, 1)), day(NOW.0, NOW.1, NOW.2));
        assert!(over);
    }

    #[test]
    fn certificates_predating_every_era_have_no_cap() {
        let cert = record(day(2015, 1, 1), day(2025, 1, 1));
        let (over, _) = flags(&cert, day(2020, 1, 1));
        assert!(!over);
        let cert = record(day(2016, 5, 31), day(2026, 5, 31));
        let (over, _) = flags(&cert, day(2020, 1, 1));
        assert!(!over);
    }

    proptest! {
        /// Extending a certificate's life never clears an over-long flag.
        #[test]
        fn over_long_is_monotone_in_not_after(
            nb_days in 0i64..5000,
            life_days in 1i64..4000,
            extension in 0i64..2000,
        ) {
            let nb = day(2014, 1, 1) + chrono::Duration::days(nb_days);
            let na = nb + chrono::Duration::days(life_days);
            let now = day(2026, 1, 1);
            let (over_before, _) = flags(&record(nb, na), now);
            let (over_after, _) =
                flags(&record(nb, na + chrono::Duration::days(extension)), now);
            if over_before {
                prop_assert!(over_after);
            }
        }
    }
}
