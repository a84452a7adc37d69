//! Tridium Fox text-frame probe and Fox Platform HTTP probe.

use crate::{Reason, ValidationVerdict};

/// Fox session hello: text frame `fox a <channel> <seq> fox hello` followed
/// by a brace-delimited property block terminated by `};;`.
pub fn hello_frame() -> Vec<u8> {
    let frame = "fox a 0 -1 fox hello\n{\nfox.version=s:1.0\nid=i:1\n};;\n";
    frame.as_bytes().to_vec()
}

/// HTTP GET / against the Fox Platform daemon. The Host value is fixed;
/// platform daemons route by port, not virtual host.
pub fn platform_http_get() -> Vec<u8> {
    let request = "GET / HTTP/1.1\r\nHost: audit-probe\r\nUser-Agent: audit-scan\r\nAccept: */*\r\nConnection: close\r\n\r\n";
    request.as_bytes().to_vec()
}

/// Any frame opening with the `fox ` keyword proves a Fox peer.
pub fn validate_fox(bytes: &[u8]) -> ValidationVerdict {
    if !bytes.starts_with(b"fox ") {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    ValidationVerdict::ok(Some("fox:frame".to_string()))
}

/// Status-line check: `HTTP/1.x NNN`; the status code is recorded for the
/// access-control stage (login forms and error codes are judged there).
pub fn validate_http(bytes: &[u8]) -> ValidationVerdict {
    if !bytes.starts_with(b"HTTP/1.") {
        return ValidationVerdict::invalid(Reason::BadMagic);
    }
    let Some(code) = parse_status_code(bytes) else {
        return ValidationVerdict::invalid(Reason::Unparsable);
    };
    ValidationVerdict::ok(Some(format!("http:{code}")))
}

/// Extracts the three-digit status code from an HTTP/1.x status line.
pub fn parse_status_code(bytes: &[u8]) -> Option<u16> {
    // "HTTP/1.x NNN" — minor version digit, space, three digits.
    if bytes.len() < 12 || bytes[8] != b' ' {
        return None;
    }
    let digits = &bytes[9..12];
    if !digits.iter().all(u8::is_ascii_digit) {
        return None;
    }
    let code = (digits[0] - b'0') as u16 * 100
        + (digits[1] - b'0') as u16 * 10
        + (digits[2] - b'0') as u16;
    (100..600).contains(&code).then_some(code)
}

pub fn reparse_fox(bytes: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return false;
    };
    let Some(first_line) = text.lines().next() else {
        return false;
    };
    let words: Vec<&str> = first_line.split(' ').collect();
    words.len() >= 5
        && words[0] == "fox"
        && words[1] == "a"
        && words[2].parse::<i64>().is_ok()
        && words[3].parse::<i64>().is_ok()
        && text.contains("};;")
}

pub fn reparse_http(bytes: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return false;
    };
    text.starts_with("GET / HTTP/1.1\r\n") && text.ends_with("\r\n\r\n")
}
