//! Operator contact extraction from captured broker payloads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// An extracted operator contact address.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    pub address: String,
    /// True when the domain was positively confirmed to have an MX record;
    /// false when resolution itself failed and the address is kept
    /// unverified. Addresses whose domain positively has no MX record are
    /// dropped before this struct is built.
    pub mx_verified: bool,
}

/// Answers whether a mail domain has an MX record.
pub trait MxResolver {
    /// `Ok(true)`: record present. `Ok(false)`: positively absent.
    /// `Err`: resolution failed (timeout, server error).
    fn has_mx(&self, domain: &str) -> std::io::Result<bool>;
}

/// Fixed-table resolver for lab runs and tests: listed domains resolve to
/// their value, everything else fails as unreachable.
#[derive(Debug, Default, Clone)]
pub struct TableMxResolver {
    entries: BTreeMap<String, bool>,
}

impl TableMxResolver {
    pub fn new(entries: impl IntoIterator<Item = (String, bool)>) -> Self {
        TableMxResolver {
            entries: entries.into_iter().collect(),
        }
    }
}

impl MxResolver for TableMxResolver {
    fn has_mx(&self, domain: &str) -> std::io::Result<bool> {
        self.entries.get(domain).copied().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::NotFound, "domain not in table")
        })
    }
}

/// Scans free text for email-shaped tokens and keeps those whose domain has
/// an MX record. Domains that positively lack one are dropped; domains whose
/// lookup fails are kept with `mx_verified: false`. Results are deduplicated
/// (domains case-insensitively) and sorted.
pub fn extract_contacts(payload: &str, resolver: &dyn MxResolver) -> Vec<Contact> {
    let mut contacts: BTreeMap<String, bool> = BTreeMap::new();
    for (local, domain) in email_tokens(payload) {
        let address = format!("{local}@{domain}");
        match resolver.has_mx(&domain) {
            Ok(true) => {
                contacts.insert(address, true);
            }
            Ok(false) => {}
            Err(_) => {
                contacts.entry(address).or_insert(false);
            }
        }
    }
    contacts
        .into_iter()
        .map(|(address, mx_verified)| Contact {
            address,
            mx_verified,
        })
        .collect()
}

fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '%' | '+' | '-')
}

fn is_domain_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '.' | '-')
}

/// Non-overlapping `(local, domain)` pairs found in the text, domains
/// lowercased.
fn email_tokens(text: &str) -> Vec<(String, String)> {
    let bytes: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut cursor = 0;
    while let Some(offset) = bytes[cursor..].iter().position(|&c| c == '@') {
        let at = cursor + offset;
        let start = bytes[..at]
            .iter()
            .rposition(|&c| !is_local_char(c))
            .map(|p| p + 1)
            .unwrap_or(0);
        let end = bytes[at + 1..]
            .iter()
            .position(|&c| !is_domain_char(c))
            .map(|p| at + 1 + p)
            .unwrap_or(bytes.len());

        let local: String = bytes[start..at]
            .iter()
            .collect::<String>()
            .trim_matches('.')
            .to_string();
        let domain: String = bytes[at + 1..end]
            .iter()
            .collect::<String>()
            .trim_matches(|c| c == '.' || c == '-')
            .to_ascii_lowercase();

        if !local.is_empty() && valid_domain(&domain) {
            tokens.push((local, domain));
            cursor = end.max(at + 1);
        } else {
            cursor = at + 1;
        }
    }
    tokens
}

/// At least two labels, each nonempty, hyphens only interior, and an
/// alphabetic top-level label of two or more characters.
fn valid_domain(domain: &str) -> bool {
    let labels: Vec<&str> = domain.split('.').collect();
    if labels.len() < 2 {
        return false;
    }
    for label in &labels {
        if label.is_empty()
            || label.len() > 63
            || label.starts_with('-')
            || label.ends_with('-')
        {
            return false;
        }
    }
    let tld = labels.last().unwrap();
    tld.len() >= 2 && tld.chars().all(|c| c.is_ascii_alphabetic())
}
