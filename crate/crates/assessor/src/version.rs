//! Protocol-version grading over a cipher battery.

use audit_prober::{detect_downgrade_sentinel, HandshakeOutcome, SuiteBattery};
use audit_tlswire::Version;

use crate::{Check, Finding};

fn rank(version: Version) -> u8 {
    match version {
        Version::Tls10 => 0,
        Version::Tls11 => 1,
        Version::Tls12 | Version::Dtls12 => 2,
    }
}

fn label(version: Version) -> &'static str {
    match version {
        Version::Tls10 => "TLS1.0",
        Version::Tls11 => "TLS1.1",
        Version::Tls12 => "TLS1.2",
        Version::Dtls12 => "DTLS1.2",
    }
}

/// Flags servers whose best negotiated version is below 1.2, and servers
/// that mark their ServerHello random with the downgrade sentinel, which
/// means a 1.3-capable stack deliberately answered a 1.2 offer.
///
/// Returns `None` when the battery has no accepted handshake with a
/// recorded version; there is nothing to grade then.
pub fn check_version(deployment: &str, battery: &SuiteBattery) -> Option<Finding> {
    let accepted: Vec<_> = battery
        .iter()
        .filter(|h| h.outcome == HandshakeOutcome::Accepted)
        .collect();
    let best = accepted
        .iter()
        .filter_map(|h| h.negotiated_version)
        .max_by_key(|v| rank(*v))?;

    if rank(best) < 2 {
        return Some(Finding::new(
            deployment,
            Check::DeprecatedVersion,
            format!("highest negotiated version {} is below TLS1.2", label(best)),
        ));
    }

    let sentinel = accepted.iter().find(|h| {
        h.server_random
            .as_ref()
            .is_some_and(|r| detect_downgrade_sentinel(r).unwrap_or(false))
    });
    if let Some(hit) = sentinel {
        let tail = &hit.server_random.expect("sentinel hit has a random")[24..];
        let hex: String = tail.iter().map(|b| format!("{b:02x}")).collect();
        return Some(Finding::new(
            deployment,
            Check::Tls13Capable,
            format!(
                "ServerHello random ends in downgrade sentinel {hex}; server is TLS 1.3-capable and downgraded deliberately"
            ),
        ));
    }
    None
}
