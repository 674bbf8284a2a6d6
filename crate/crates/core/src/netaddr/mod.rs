//! Address handling: parsing and canonical text for IPv4/IPv6, prefix
//! truncation, EUI-64 interface identifiers and IEEE OUI vendor lookup.
//!
//! Addresses are plain [`std::net::IpAddr`] values. The standard library's
//! IPv6 formatter already produces RFC 5952 text (lowercase, longest zero run
//! compressed, leftmost on ties), so canonical text is simply `Display`.

mod eui64;
mod oui;
pub(crate) mod prefix;

use std::net::IpAddr;

pub use eui64::{embed_mac, extract_mac, is_eui64, Mac48, Oui};
pub use oui::{resolve_vendor, OuiDatabase, OuiError, OuiLoadStats, UNLISTED};
pub use prefix::Prefix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AddrError {
    #[error("not an IP address: {0:?}")]
    NotAnIp(String),
    #[error("prefix length {len} out of range for {family}")]
    BadLength { len: u8, family: &'static str },
    #[error("address {0} does not carry an EUI-64 interface identifier")]
    NotEui64(IpAddr),
    #[error("not a MAC address: {0:?}")]
    NotAMac(String),
    #[error("not a prefix: {0:?}")]
    NotAPrefix(String),
}

/// Parses IPv4 dotted-quad or any textual IPv6 form (upper/lowercase,
/// compressed or not). Zone indices, ports and CIDR suffixes are rejected.
pub fn parse_ip(text: &str) -> Result<IpAddr, AddrError> {
    // `IpAddr::from_str` already refuses `%zone`, `[..]:port` and `/len`.
    text.parse::<IpAddr>()
        .map_err(|_| AddrError::NotAnIp(text.to_string()))
}

/// RFC 5952 text for v6, dotted-quad for v4.
pub fn canonical_text(ip: &IpAddr) -> String {
    ip.to_string()
}

/// Version label used in report tables.
pub fn version_label(ip: &IpAddr) -> &'static str {
    match ip {
        IpAddr::V4(_) => "v4",
        IpAddr::V6(_) => "v6",
    }
}

/// Truncates `ip` to a prefix of `length` bits.
pub fn truncate(ip: IpAddr, length: u8) -> Result<Prefix, AddrError> {
    Prefix::new(ip, length)
}
