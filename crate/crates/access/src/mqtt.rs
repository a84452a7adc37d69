//! MQTT anonymous-access check with an opt-in, capped root subscription.

use std::io::{Read, Write};
use std::time::Instant;

use audit_catalog::Protocol;

use crate::stream::{CountingReader, ReadStop};
use crate::{AccessLimits, AccessStatus, AccessVerdict};

/// The wildcard filter matching every topic on the broker.
pub const SUBSCRIBE_ROOT_TOPIC: &str = "#";

const PKT_CONNACK: u8 = 2;
const PKT_PUBLISH: u8 = 3;
const PKT_SUBSCRIBE: u8 = 8;
const PKT_SUBACK: u8 = 9;
const PKT_DISCONNECT: u8 = 14;

/// Checks whether the broker admits a client that presents no credentials,
/// and optionally how much it then hands out.
///
/// A credential-free CONNECT is sent; CONNACK code 0 means open, any other
/// code means protected, and a disconnect or timeout before the CONNACK is
/// indeterminate. When `subscribe_root` is set (operator opt-in) and the
/// broker is open, the check subscribes to [`SUBSCRIBE_ROOT_TOPIC`] and
/// reads messages until the byte or time cap in `limits` fires, the broker
/// goes quiet, or the stream ends. Received topic and payload text is
/// returned to the caller solely so contact extraction can run on it;
/// nothing is persisted here. `payload_bytes_read` counts only the
/// subscription phase and never exceeds `limits.max_read_bytes`.
pub fn mqtt_open_access<S: Read + Write>(
    stream: &mut S,
    subscribe_root: bool,
    limits: &AccessLimits,
) -> (AccessVerdict, Option<String>) {
    let connect = audit_codecs::build_probe(Protocol::Mqtt).payload;
    if stream.write_all(&connect).is_err() || stream.flush().is_err() {
        return (
            AccessVerdict::new(AccessStatus::Indeterminate, "write_failed", 0),
            None,
        );
    }

    let mut connack = [0u8; 4];
    let mut reader = CountingReader::new(&mut *stream, u64::MAX);
    match reader.read_exact_or_stop(&mut connack) {
        Ok(()) => {}
        Err(ReadStop::Timeout) => {
            return (
                AccessVerdict::new(AccessStatus::Indeterminate, "timeout", 0),
                None,
            );
        }
        Err(_) => {
            return (
                AccessVerdict::new(AccessStatus::Indeterminate, "closed_before_connack", 0),
                None,
            );
        }
    }
    drop(reader);
    if connack[0] != PKT_CONNACK << 4 || connack[1] != 2 {
        return (
            AccessVerdict::new(AccessStatus::Indeterminate, "malformed_connack", 0),
            None,
        );
    }
    let code = connack[3];
    if code != 0 {
        return (
            AccessVerdict::new(AccessStatus::Protected, format!("connack:{code}"), 0),
            None,
        );
    }
    if !subscribe_root {
        return (AccessVerdict::new(AccessStatus::Open, "connack:0", 0), None);
    }

    if stream.write_all(&subscribe_packet()).is_err() || stream.flush().is_err() {
        return (
            AccessVerdict::new(AccessStatus::Open, "connack:0 subscribe:write_failed", 0),
            None,
        );
    }
    let (evidence, bytes_read, captured) = subscription_loop(stream, limits);
    (
        AccessVerdict::new(AccessStatus::Open, format!("connack:0 {evidence}"), bytes_read),
        Some(captured),
    )
}

/// SUBSCRIBE packet 1 for the root wildcard at QoS 0.
fn subscribe_packet() -> Vec<u8> {
    let topic = SUBSCRIBE_ROOT_TOPIC.as_bytes();
    let mut variable = 1u16.to_be_bytes().to_vec();
    variable.extend_from_slice(&(topic.len() as u16).to_be_bytes());
    variable.extend_from_slice(topic);
    variable.push(0);
    let mut packet = vec![PKT_SUBSCRIBE << 4 | 0x02, variable.len() as u8];
    packet.extend_from_slice(&variable);
    packet
}

/// Reads broker traffic under the caps. Returns an evidence string, the
/// exact byte count consumed, and the captured topic/payload text.
fn subscription_loop<S: Read>(stream: &mut S, limits: &AccessLimits) -> (String, u64, String) {
    let started = Instant::now();
    let mut reader = CountingReader::new(stream, limits.max_read_bytes);
    let mut suback = String::from("suback:none");
    let mut messages = 0u64;
    let mut captured = String::new();

    let stop = loop {
        if started.elapsed() >= limits.max_duration {
            break "stop:time_cap";
        }
        match read_packet(&mut reader) {
            Ok((packet_type, body)) => match packet_type {
                PKT_SUBACK => {
                    if let Some(code) = body.get(2) {
                        suback = format!("suback:{code}");
                    }
                }
                PKT_PUBLISH => {
                    messages += 1;
                    if let Some((topic, payload)) = split_publish(&body) {
                        captured.push_str(&topic);
                        captured.push('\n');
                        captured.push_str(&String::from_utf8_lossy(payload));
                        captured.push('\n');
                    }
                }
                PKT_DISCONNECT => break "stop:disconnect",
                _ => {}
            },
            Err(ReadStop::BudgetExhausted) => break "stop:byte_cap",
            Err(ReadStop::Timeout) => break "stop:idle",
            Err(ReadStop::Eof) => break "stop:eof",
        }
    };

    (
        format!("subscribe:{SUBSCRIBE_ROOT_TOPIC} {suback} messages:{messages} {stop}"),
        reader.consumed(),
        captured,
    )
}

/// Reads one packet: fixed header, variable-length remaining count, body.
/// QoS flags on PUBLISH are preserved in the returned type's low bits.
fn read_packet<R: Read>(reader: &mut CountingReader<R>) -> Result<(u8, Vec<u8>), ReadStop> {
    let first = reader.read_u8()?;
    let mut remaining = 0usize;
    for i in 0..4 {
        let byte = reader.read_u8()?;
        remaining |= ((byte & 0x7F) as usize) << (7 * i);
        if byte & 0x80 == 0 {
            break;
        }
        if i == 3 {
            return Err(ReadStop::Eof);
        }
    }
    if remaining as u64 > reader.budget_left() {
        return Err(ReadStop::BudgetExhausted);
    }
    let mut body = vec![0u8; remaining];
    reader.read_exact_or_stop(&mut body)?;
    Ok((first >> 4, body))
}

/// Splits a QoS-0 PUBLISH body into topic and payload.
fn split_publish(body: &[u8]) -> Option<(String, &[u8])> {
    if body.len() < 2 {
        return None;
    }
    let topic_len = u16::from_be_bytes([body[0], body[1]]) as usize;
    let payload = body.get(2 + topic_len..)?;
    let topic = String::from_utf8_lossy(&body[2..2 + topic_len]).into_owned();
    Some((topic, payload))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::ScriptedStream;
    use std::time::Duration;

    fn connack(code: u8) -> Vec<u8> {
        vec![0x20, 0x02, 0x00, code]
    }

    fn suback_ok() -> Vec<u8> {
        vec![0x90, 0x03, 0x00, 0x01, 0x00]
    }

    fn publish(topic: &str, payload: &str) -> Vec<u8> {
        let mut body = (topic.len() as u16).to_be_bytes().to_vec();
        body.extend_from_slice(topic.as_bytes());
        body.extend_from_slice(payload.as_bytes());
        let mut packet = vec![0x30, body.len() as u8];
        packet.extend_from_slice(&body);
        packet
    }

    #[test]
    fn anonymous_acceptance_is_open() {
        let mut peer = ScriptedStream::replies(&connack(0));
        let (verdict, captured) = mqtt_open_access(&mut peer, false, &AccessLimits::default());
        assert_eq!(verdict.status, AccessStatus::Open);
        assert_eq!(verdict.evidence, "connack:0");
        assert_eq!(verdict.payload_bytes_read, 0);
        assert!(captured.is_none());
    }

    #[test]
    fn not_authorized_code_five_is_protected() {
        let mut peer = ScriptedStream::replies(&connack(5));
        let (verdict, _) = mqtt_open_access(&mut peer, false, &AccessLimits::default());
        assert_eq!(verdict.status, AccessStatus::Protected);
        assert_eq!(verdict.evidence, "connack:5");
    }

    #[test]
    fn disconnect_before_connack_is_indeterminate() {
        let mut peer = ScriptedStream::replies(&[]);
        let (verdict, _) = mqtt_open_access(&mut peer, false, &AccessLimits::default());
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "closed_before_connack");
    }

    #[test]
    fn silence_before_connack_is_indeterminate() {
        let mut peer = ScriptedStream::replies_then_silence(&[]);
        let (verdict, _) = mqtt_open_access(&mut peer, false, &AccessLimits::default());
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "timeout");
    }

    #[test]
    fn malformed_connack_is_indeterminate() {
        let mut peer = ScriptedStream::replies(&[0x55, 0x02, 0x00, 0x00]);
        let (verdict, _) = mqtt_open_access(&mut peer, false, &AccessLimits::default());
        assert_eq!(verdict.status, AccessStatus::Indeterminate);
        assert_eq!(verdict.evidence, "malformed_connack");
    }

    #[test]
    fn subscription_captures_messages_and_counts_bytes() {
        let mut script = connack(0);
        script.extend_from_slice(&suback_ok());
        script.extend_from_slice(&publish("plant/line4", "contact ops@example.org"));
        script.extend_from_slice(&publish("plant/line5", "temperature 42"));
        let subscription_bytes = (script.len() - 4) as u64;

        let mut peer = ScriptedStream::replies(&script);
        let (verdict, captured) = mqtt_open_access(&mut peer, true, &AccessLimits::default());
        assert_eq!(verdict.status, AccessStatus::Open);
        assert_eq!(
            verdict.evidence,
            "connack:0 subscribe:# suback:0 messages:2 stop:eof"
        );
        assert_eq!(verdict.payload_bytes_read, subscription_bytes);

        let text = captured.unwrap();
        assert!(text.contains("plant/line4"));
        assert!(text.contains("contact ops@example.org"));
        assert!(text.contains("temperature 42"));
    }

    #[test]
    fn byte_cap_closes_the_subscription_without_exceeding_the_limit() {
        let mut script = connack(0);
        script.extend_from_slice(&suback_ok());
        for i in 0..50 {
            script.extend_from_slice(&publish("t", &format!("message number {i:04}")));
        }
        let limits = AccessLimits {
            max_read_bytes: 64,
            max_duration: Duration::from_secs(60),
        };
        let mut peer = ScriptedStream::replies_then_silence(&script);
        let (verdict, captured) = mqtt_open_access(&mut peer, true, &limits);
        assert_eq!(verdict.status, AccessStatus::Open);
        assert!(verdict.payload_bytes_read <= 64);
        assert!(verdict.evidence.ends_with("stop:byte_cap"));
        assert!(captured.is_some());
    }

    #[test]
    fn time_cap_finalizes_the_verdict() {
        let limits = AccessLimits {
            max_read_bytes: 1024,
            max_duration: Duration::ZERO,
        };
        let mut peer = ScriptedStream::replies_then_silence(&connack(0));
        let (verdict, _) = mqtt_open_access(&mut peer, true, &limits);
        assert_eq!(verdict.status, AccessStatus::Open);
        assert_eq!(verdict.payload_bytes_read, 0);
        assert!(verdict.evidence.ends_with("stop:time_cap"));
    }

    #[test]
    fn a_quiet_broker_stops_on_idle_and_stays_open() {
        let mut script = connack(0);
        script.extend_from_slice(&suback_ok());
        let mut peer = ScriptedStream::replies_then_silence(&script);
        let (verdict, _) = mqtt_open_access(&mut peer, true, &AccessLimits::default());
        assert_eq!(verdict.status, AccessStatus::Open);
        assert!(verdict.evidence.contains("suback:0"));
        assert!(verdict.evidence.ends_with("stop:idle"));
    }

    #[test]
    fn no_publish_is_ever_sent() {
        let mut script = connack(0);
        script.extend_from_slice(&suback_ok());
        script.extend_from_slice(&publish("a/topic", "payload"));
        let mut peer = ScriptedStream::replies(&script);
        mqtt_open_access(&mut peer, true, &AccessLimits::default());

        let mut sent = peer.written.as_slice();
        let mut packet_types = Vec::new();
        while !sent.is_empty() {
            let packet_type = sent[0] >> 4;
            packet_types.push(packet_type);
            let mut remaining = 0usize;
            let mut used = 1;
            for (i, byte) in sent[1..5.min(sent.len())].iter().enumerate() {
                used += 1;
                remaining |= ((byte & 0x7F) as usize) << (7 * i);
                if byte & 0x80 == 0 {
                    break;
                }
            }
            sent = &sent[used + remaining..];
        }
        assert_eq!(packet_types, vec![1, PKT_SUBSCRIBE]);
        assert!(!packet_types.contains(&PKT_PUBLISH));
    }

    #[test]
    fn subscribe_packet_matches_golden_bytes() {
        assert_eq!(
            subscribe_packet(),
            [0x82, 0x06, 0x00, 0x01, 0x00, 0x01, b'#', 0x00]
        );
    }
}
