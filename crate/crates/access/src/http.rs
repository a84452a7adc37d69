//! Login-wall detection for Fox Platform web interfaces.

use std::io::{Read, Write};

use crate::stream::{CountingReader, ReadStop};
use crate::{AccessStatus, AccessVerdict};

/// Responses are read up to this many bytes; a dashboard or login page fits
/// comfortably and anything larger is judged on its first megabyte.
const MAX_RESPONSE: u64 = 1 << 20;

/// Fetches `/` with a plain GET and judges the answer.
///
/// Protected: any 4xx status, a 2xx with an empty body, or a 2xx whose body
/// contains a password form field. Open: a 2xx with content and no login
/// form. Anything else (redirects, server errors, unparsable responses,
/// silence) is indeterminate. Only the GET method is ever used.
pub fn http_login_check<S: Read + Write>(stream: &mut S, host: &str) -> AccessVerdict {
    let request = format!(
        "GET / HTTP/1.1\r\nHost: {host}\r\nUser-Agent: audit-scan\r\nAccept: */*\r\nConnection: close\r\n\r\n"
    );
    if stream.write_all(request.as_bytes()).is_err() || stream.flush().is_err() {
        return AccessVerdict::new(AccessStatus::Indeterminate, "write_failed", 0);
    }

    let mut reader = CountingReader::new(&mut *stream, MAX_RESPONSE);
    let mut response = Vec::new();
    let mut chunk = [0u8; 4096];
    loop {
        match reader.read_some(&mut chunk) {
            Ok(0) | Err(ReadStop::Eof) | Err(ReadStop::BudgetExhausted) => break,
            Ok(n) => response.extend_from_slice(&chunk[..n]),
            Err(ReadStop::Timeout) => {
                if response.is_empty() {
                    return AccessVerdict::new(AccessStatus::Indeterminate, "timeout", 0);
                }
                break;
            }
        }
    }
    let read = reader.consumed();
    judge(&response, read)
}

fn judge(response: &[u8], read: u64) -> AccessVerdict {
    let text = String::from_utf8_lossy(response);
    let Some((status_line, rest)) = text.split_once("\r\n") else {
        return AccessVerdict::new(AccessStatus::Indeterminate, "unparsable", read);
    };
    let Some(code) = parse_status(status_line) else {
        return AccessVerdict::new(AccessStatus::Indeterminate, "unparsable", read);
    };
    let body = rest.split_once("\r\n\r\n").map(|(_, b)| b).unwrap_or("");

    match code {
        400..=499 => AccessVerdict::new(AccessStatus::Protected, format!("http:{code}"), read),
        200..=299 => {
            if body.trim().is_empty() {
                AccessVerdict::new(
                    AccessStatus::Protected,
                    format!("http:{code} empty_body"),
                    read,
                )
            } else if has_password_field(body) {
                AccessVerdict::new(
                    AccessStatus::Protected,
                    format!("http:{code} password_form"),
                    read,
                )
            } else {
                AccessVerdict::new(AccessStatus::Open, format!("http:{code}"), read)
            }
        }
        _ => AccessVerdict::new(AccessStatus::Indeterminate, format!("http:{code}"), read),
    }
}

fn parse_status(line: &str) -> Option<u16> {
    let mut parts = line.split_whitespace();
    let version = parts.next()?;
    if !version.starts_with("HTTP/") {
        return None;
    }
    parts.next()?.parse().ok()
}

/// An input requesting a password, in any quoting style.
fn has_password_field(body: &str) -> bool {
    let lowered = body.to_ascii_lowercase();
    ["type=\"password\"", "type='password'", "type=password"]
        .iter()
        .any(|needle| lowered.contains(needle))
}
