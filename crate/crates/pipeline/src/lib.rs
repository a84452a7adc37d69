//! Turns raw per-endpoint probe results into staged records, deduplicated
//! deployments, and per-protocol adoption summaries.
//!
//! Every probed endpoint walks a five-step validation funnel: it must answer
//! at the transport layer, reply with a valid ServerHello, tolerate our
//! client certificate, complete a handshake, and finally answer an
//! application-layer probe correctly. The funnel stages are strictly nested,
//! so per-stage counts are always monotone. Plaintext application validity
//! is tracked alongside the funnel and decides, per host, whether a service
//! is plaintext-only, TLS-only, or offers both.

mod aggregate;
mod dedup;

use audit_catalog::Endpoint;
use audit_codecs::ValidationVerdict;
use audit_prober::{
    classify_client_auth, ClientAuthClass, HandshakeOutcome, SuiteBattery, TransportState,
};
use serde::{Deserialize, Serialize};

pub use aggregate::{aggregate, annotate_asn, funnel_by_protocol, FunnelCounts, ProtocolSummary};
pub use dedup::{dedup, Adoption, Deployment};

/// Label describing how the deduplication step decides that a standard-port
/// and a secure-port service are the same deployment; recorded in report
/// metadata because other tools may merge differently.
pub const MERGE_PREDICATE: &str = "leaf_fingerprint+battery_outcomes";

/// The five validation steps an endpoint can pass, plus the zero stage for
/// endpoints that never answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunnelStage {
    None,
    Transport,
    TlsValid,
    AuthOk,
    TlsSuccess,
    Valid,
}

impl FunnelStage {
    /// The five countable stages in funnel order, excluding the zero stage.
    pub const STEPS: [FunnelStage; 5] = [
        FunnelStage::Transport,
        FunnelStage::TlsValid,
        FunnelStage::AuthOk,
        FunnelStage::TlsSuccess,
        FunnelStage::Valid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FunnelStage::None => "none",
            FunnelStage::Transport => "transport",
            FunnelStage::TlsValid => "tls_valid",
            FunnelStage::AuthOk => "auth_ok",
            FunnelStage::TlsSuccess => "tls_success",
            FunnelStage::Valid => "valid",
        }
    }
}

/// Everything learned about one probed endpoint, staged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub endpoint: Endpoint,
    pub transport: TransportState,
    /// Application probe result over the bare transport; only attempted on
    /// standard-variant ports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plain_verdict: Option<ValidationVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<SuiteBattery>,
    /// Application probe result over the established TLS channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_verdict: Option<ValidationVerdict>,
    pub stage: FunnelStage,
}

impl ProbeRecord {
    /// Builds a record and stages it.
    pub fn new(
        endpoint: Endpoint,
        transport: TransportState,
        plain_verdict: Option<ValidationVerdict>,
        battery: Option<SuiteBattery>,
        app_verdict: Option<ValidationVerdict>,
    ) -> ProbeRecord {
        let stage = classify_stage(transport, battery.as_ref(), app_verdict.as_ref());
        ProbeRecord { endpoint, transport, plain_verdict, battery, app_verdict, stage }
    }

    /// The endpoint answered the application probe in plaintext.
    pub fn plain_valid(&self) -> bool {
        self.plain_verdict.as_ref().is_some_and(|v| v.valid)
    }

    /// The endpoint's observable TLS configuration, when any handshake was
    /// accepted: leaf-certificate fingerprint plus the battery outcome
    /// vector.
    pub fn tls_config(&self) -> Option<TlsConfig> {
        let battery = self.battery.as_ref()?;
        if !battery.any_accepted() {
            return None;
        }
        let leaf_fingerprint = battery
            .iter()
            .find(|h| h.outcome == HandshakeOutcome::Accepted && !h.chain.is_empty())
            .map(|h| audit_certs::fingerprint(&h.chain[0]))
            .unwrap_or_default();
        let mut outcomes = [HandshakeOutcome::Timeout; 4];
        for (slot, h) in outcomes.iter_mut().zip(battery.iter()) {
            *slot = h.outcome;
        }
        Some(TlsConfig { leaf_fingerprint, outcomes })
    }
}

/// The comparable part of an endpoint's TLS posture, used to merge a
/// standard-port and a secure-port service into one deployment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TlsConfig {
    pub leaf_fingerprint: String,
    pub outcomes: [HandshakeOutcome; 4],
}

/// Assigns the greatest funnel stage whose predicate holds; predicates are
/// nested, so each stage requires all earlier ones.
pub fn classify_stage(
    transport: TransportState,
    battery: Option<&SuiteBattery>,
    app_verdict: Option<&ValidationVerdict>,
) -> FunnelStage {
    if transport != TransportState::Alive {
        return FunnelStage::None;
    }
    let Some(battery) = battery else {
        return FunnelStage::Transport;
    };
    if !battery.any_accepted() {
        return FunnelStage::Transport;
    }
    if classify_client_auth(&battery.handshakes) == ClientAuthClass::RequestedAndRejected {
        return FunnelStage::TlsValid;
    }
    if !battery.any_completed() {
        return FunnelStage::AuthOk;
    }
    match app_verdict {
        Some(verdict) if verdict.valid => FunnelStage::Valid,
        _ => FunnelStage::TlsSuccess,
    }
}
