use std::fmt;
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};
use std::str::FromStr;

use super::AddrError;

/// A network prefix. Host bits beyond `len` are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix {
    network: IpAddr,
    len: u8,
}

pub(crate) fn max_len(ip: &IpAddr) -> u8 {
    match ip {
        IpAddr::V4(_) => 32,
        IpAddr::V6(_) => 128,
    }
}

/// Mask keeping the top `len` bits of a 128-bit value.
#[inline]
pub(crate) fn mask128(len: u8) -> u128 {
    if len == 0 {
        0
    } else {
        u128::MAX << (128 - u32::from(len))
    }
}

#[inline]
fn mask32(len: u8) -> u32 {
    if len == 0 {
        0
    } else {
        u32::MAX << (32 - u32::from(len))
    }
}

impl Prefix {
    pub fn new(ip: IpAddr, len: u8) -> Result<Prefix, AddrError> {
        let network = match ip {
            IpAddr::V4(a) if len <= 32 => IpAddr::V4(Ipv4Addr::from(u32::from(a) & mask32(len))),
            IpAddr::V6(a) if len <= 128 => {
                IpAddr::V6(Ipv6Addr::from(u128::from(a) & mask128(len)))
            }
            IpAddr::V4(_) => return Err(AddrError::BadLength { len, family: "IPv4" }),
            IpAddr::V6(_) => return Err(AddrError::BadLength { len, family: "IPv6" }),
        };
        Ok(Prefix { network, len })
    }

    pub fn network(&self) -> IpAddr {
        self.network
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_v6(&self) -> bool {
        self.network.is_ipv6()
    }

    /// Network bits left-aligned in a `u128` (v4 occupies the top 32 bits).
    pub fn aligned_bits(&self) -> u128 {
        aligned_bits(&self.network)
    }

    pub fn contains(&self, ip: &IpAddr) -> bool {
        ip.is_ipv6() == self.is_v6() && aligned_bits(ip) & mask128(self.len) == self.aligned_bits()
    }

    /// True when `other` lies inside (or equals) this prefix.
    pub fn covers(&self, other: &Prefix) -> bool {
        other.len >= self.len && self.contains(&other.network)
    }
}

/// Address bits left-aligned in a `u128`.
pub(crate) fn aligned_bits(ip: &IpAddr) -> u128 {
    match ip {
        IpAddr::V4(a) => u128::from(u32::from(*a)) << 96,
        IpAddr::V6(a) => u128::from(*a),
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.network, self.len)
    }
}

impl FromStr for Prefix {
    type Err = AddrError;

    /// Accepts `addr/len`, or a bare address taken as a host prefix.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AddrError::NotAPrefix(s.to_string());
        match s.split_once('/') {
            Some((addr, len)) => {
                let ip: IpAddr = addr.parse().map_err(|_| bad())?;
                if len.is_empty() || !len.bytes().all(|b| b.is_ascii_digit()) || len.len() > 3 {
                    return Err(bad());
                }
                let len: u8 = len.parse().map_err(|_| bad())?;
                Prefix::new(ip, len)
            }
            None => {
                let ip: IpAddr = s.parse().map_err(|_| bad())?;
                Prefix::new(ip, max_len(&ip))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let p: Prefix = "2001:db8::/32".parse().unwrap();
        assert_eq!(p.len(), 32);
        assert_eq!(p.to_string(), "2001:db8::/32");
        // host bits are masked off
        let p: Prefix = "2001:db8::1/32".parse().unwrap();
        assert_eq!(p.to_string(), "2001:db8::/32");
        let p: Prefix = "::/0".parse().unwrap();
        assert!(p.contains(&"2600::1".parse().unwrap()));
        assert!(!p.contains(&"10.0.0.1".parse().unwrap()));
        let host: Prefix = "2001:db8::1".parse().unwrap();
        assert_eq!(host.len(), 128);
        for bad in ["2001:db8::/", "2001:db8::/129", "10.0.0.0/33", "x/8", "10.0.0.0/+8"] {
            assert!(bad.parse::<Prefix>().is_err(), "{bad}");
        }
    }

    #[test]
    fn covers() {
        let p32: Prefix = "2001:db8::/32".parse().unwrap();
        let p48: Prefix = "2001:db8:5::/48".parse().unwrap();
        assert!(p32.covers(&p48));
        assert!(!p48.covers(&p32));
        assert!(p48.covers(&p48));
    }

    proptest! {
        #[test]
        fn truncation_idempotent_and_nested(raw in any::<u128>()) {
            let ip = IpAddr::V6(Ipv6Addr::from(raw));
            let p48 = Prefix::new(ip, 48).unwrap();
            let p56 = Prefix::new(ip, 56).unwrap();
            let p64 = Prefix::new(ip, 64).unwrap();
            prop_assert_eq!(Prefix::new(p48.network(), 48).unwrap(), p48);
            prop_assert!(p48.covers(&p56));
            prop_assert!(p56.covers(&p64));
            prop_assert!(p64.contains(&ip));
        }
    }
}
