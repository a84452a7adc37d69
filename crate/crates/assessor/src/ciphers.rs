//! Cipher-behavior grading over the four-set battery.

use audit_prober::{HandshakeOutcome, SuiteBattery};
use audit_tlswire::suites::{self, SuiteSetName};

use crate::{AssessError, Check, Finding};

/// Component weaknesses of a negotiated suite: `(weak_cipher, weak_mac)`.
///
/// Weak ciphers are RC4 and 3DES; a weak MAC is HMAC-SHA1, recognizable as
/// a trailing `_SHA` in the registered name. AEAD suites name their PRF
/// hash (`_SHA256`, `_SHA384`) and never match. Unknown suite ids report no
/// weaknesses because nothing can be said about them.
pub fn suite_weaknesses(suite: u16) -> (bool, bool) {
    let Some(name) = suites::suite_name(suite) else {
        return (false, false);
    };
    let weak_cipher = name.contains("RC4") || name.contains("3DES");
    let weak_mac = name.ends_with("_SHA");
    (weak_cipher, weak_mac)
}

fn name_of(suite: u16) -> String {
    suites::suite_name(suite)
        .map(str::to_string)
        .unwrap_or_else(|| format!("0x{suite:04X}"))
}

/// Grades the battery's accept/deny pattern.
///
/// Denying the recommended set means no recommended suite is available at
/// all. Accepting the compatibility set is only a problem when the server's
/// pick has weak components. Accepting anything from the insecure set is
/// always a finding.
pub fn check_ciphers(
    deployment: &str,
    battery: &SuiteBattery,
) -> Result<Vec<Finding>, AssessError> {
    for (position, (handshake, expected)) in
        battery.iter().zip(SuiteSetName::ALL).enumerate()
    {
        if handshake.suite_set != expected {
            return Err(AssessError::IncompleteBattery {
                position,
                expected: expected.as_str().to_string(),
                found: handshake.suite_set.as_str().to_string(),
            });
        }
    }

    let mut findings = Vec::new();
    let rec = battery.get(SuiteSetName::Rec);
    if rec.outcome == HandshakeOutcome::Denied {
        findings.push(Finding::new(
            deployment,
            Check::NoRecSuite,
            "recommended suite offer was denied".to_string(),
        ));
    }

    let comp = battery.get(SuiteSetName::Comp);
    if comp.outcome == HandshakeOutcome::Accepted {
        if let Some(suite) = comp.negotiated_suite {
            let (weak_cipher, weak_mac) = suite_weaknesses(suite);
            if weak_cipher {
                findings.push(Finding::new(
                    deployment,
                    Check::WeakCipherAccepted,
                    format!("compatibility offer negotiated {}", name_of(suite)),
                ));
            }
            if weak_mac {
                findings.push(Finding::new(
                    deployment,
                    Check::WeakMacAccepted,
                    format!("compatibility offer negotiated {}", name_of(suite)),
                ));
            }
        }
    }

    let ins = battery.get(SuiteSetName::Ins);
    if ins.outcome == HandshakeOutcome::Accepted {
        let suite = ins
            .negotiated_suite
            .map(name_of)
            .unwrap_or_else(|| "an unrecorded suite".to_string());
        findings.push(Finding::new(
            deployment,
            Check::InsecureSuiteAccepted,
            format!("insecure offer negotiated {suite}"),
        ));
    }
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use audit_prober::HandshakeResult;

    const A: HandshakeOutcome = HandshakeOutcome::Accepted;
    const D: HandshakeOutcome = HandshakeOutcome::Denied;
    const T: HandshakeOutcome = HandshakeOutcome::Timeout;

    fn battery(outcomes: [HandshakeOutcome; 4], picks: [Option<u16>; 4]) -> SuiteBattery {
        let handshakes: Vec<HandshakeResult> = SuiteSetName::ALL
            .into_iter()
            .zip(outcomes)
            .zip(picks)
            .map(|((set, outcome), pick)| {
                let mut h = HandshakeResult::empty(set);
                h.outcome = outcome;
                h.negotiated_suite = pick;
                h
            })
            .collect();
        SuiteBattery {
            handshakes: handshakes.try_into().unwrap(),
        }
    }

    fn checks(findings: &[Finding]) -> Vec<Check> {
        let mut list: Vec<Check> = findings.iter().map(|f| f.check).collect();
        list.sort();
        list
    }

    #[test]
    fn secure_pattern_yields_no_findings() {
        let b = battery([A, D, A, D], [Some(0xC02F), None, Some(0xC02F), None]);
        assert!(check_ciphers("d", &b).unwrap().is_empty());
    }

    #[test]
    fn rc4_sha_pick_is_weak_cipher_and_weak_mac() {
        let b = battery([A, D, A, D], [Some(0xC02F), None, Some(0x0005), None]);
        let findings = check_ciphers("d", &b).unwrap();
        assert_eq!(
            checks(&findings),
            vec![Check::WeakCipherAccepted, Check::WeakMacAccepted]
        );
        for f in &findings {
            assert!(f.evidence.contains("RSA_WITH_RC4_128_SHA"));
        }
    }

    #[test]
    fn all_denied_reports_only_the_missing_recommended_set() {
        let b = battery([D, D, D, D], [None; 4]);
        let findings = check_ciphers("d", &b).unwrap();
        assert_eq!(checks(&findings), vec![Check::NoRecSuite]);
    }

    #[test]
    fn insecure_acceptance_is_critical() {
        let b = battery([A, D, D, A], [Some(0xC02F), None, None, Some(0xFF02)]);
        let findings = check_ciphers("d", &b).unwrap();
        assert_eq!(checks(&findings), vec![Check::InsecureSuiteAccepted]);
        assert_eq!(findings[0].severity, crate::Severity::Critical);
        assert!(findings[0].evidence.contains("RSA_WITH_RC4_40_MD5"));
    }

    #[test]
    fn rec_timeout_is_not_a_denial() {
        let b = battery([T, D, D, D], [None; 4]);
        assert!(check_ciphers("d", &b).unwrap().is_empty());
    }

    #[test]
    fn out_of_order_battery_is_rejected() {
        let mut b = battery([A, D, A, D], [None; 4]);
        b.handshakes.swap(0, 3);
        let err = check_ciphers("d", &b).unwrap_err();
        assert!(matches!(err, AssessError::IncompleteBattery { position: 0, .. }));
    }

    #[test]
    fn every_compatibility_suite_classifies_as_frozen() {
        let expected: [(u16, bool, bool); 13] = [
            (0xC02F, false, false),
            (0xC009, false, true),
            (0x0035, false, true),
            (0xC02B, false, false),
            (0xC014, false, true),
            (0xC012, true, true),
            (0xC011, true, true),
            (0xC00A, false, true),
            (0x000A, true, true),
            (0xC007, true, true),
            (0x0005, true, true),
            (0xC013, false, true),
            (0x002F, false, true),
        ];
        assert_eq!(
            expected.map(|(id, _, _)| id).as_slice(),
            suites::COMP,
            "classification table must cover exactly the compatibility set"
        );
        for (id, cipher, mac) in expected {
            assert_eq!(
                suite_weaknesses(id),
                (cipher, mac),
                "suite {}",
                name_of(id)
            );
        }
    }

    #[test]
    fn aead_sha2_names_never_read_as_weak_mac() {
        for id in suites::REC {
            let (_, weak_mac) = suite_weaknesses(*id);
            let name = suites::suite_name(*id).unwrap();
            assert_eq!(weak_mac, name.ends_with("_SHA"), "suite {name}");
            if name.contains("GCM") || name.contains("CCM") {
                assert!(!weak_mac, "AEAD suite {name} flagged as weak MAC");
            }
        }
    }
}
