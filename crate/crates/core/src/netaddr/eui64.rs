use std::fmt;
use std::net::{IpAddr, Ipv6Addr};
use std::str::FromStr;

use super::{AddrError, Prefix};

/// Universal/Local bit of the first MAC octet.
const UL_BIT: u8 = 0x02;
const GROUP_BIT: u8 = 0x01;

/// 48-bit hardware address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mac48(pub [u8; 6]);

/// 24-bit IEEE vendor prefix, the upper half of a [`Mac48`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Oui(pub [u8; 3]);

impl Mac48 {
    pub fn octets(&self) -> [u8; 6] {
        self.0
    }

    pub fn oui(&self) -> Oui {
        Oui([self.0[0], self.0[1], self.0[2]])
    }

    /// U/L bit set: the address was not assigned from an IEEE block,
    /// which is how randomized MACs present.
    pub fn is_locally_administered(&self) -> bool {
        self.0[0] & UL_BIT != 0
    }

    pub fn is_multicast(&self) -> bool {
        self.0[0] & GROUP_BIT != 0
    }
}

impl fmt::Display for Mac48 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

impl fmt::Display for Oui {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}:{:02x}:{:02x}", self.0[0], self.0[1], self.0[2])
    }
}

/// Strips `:`, `-`, `.` and spaces and decodes exactly `N` hex octets.
pub(crate) fn parse_hex_octets<const N: usize>(text: &str) -> Option<[u8; N]> {
    let digits: Vec<u8> = text
        .bytes()
        .filter(|b| !matches!(b, b':' | b'-' | b'.' | b' '))
        .collect();
    if digits.len() != N * 2 {
        return None;
    }
    let mut out = [0u8; N];
    for (i, pair) in digits.chunks(2).enumerate() {
        let hi = (pair[0] as char).to_digit(16)?;
        let lo = (pair[1] as char).to_digit(16)?;
        out[i] = (hi * 16 + lo) as u8;
    }
    Some(out)
}

impl FromStr for Mac48 {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex_octets::<6>(s)
            .map(Mac48)
            .ok_or_else(|| AddrError::NotAMac(s.to_string()))
    }
}

impl FromStr for Oui {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex_octets::<3>(s)
            .map(Oui)
            .ok_or_else(|| AddrError::NotAMac(s.to_string()))
    }
}

/// True iff `ip` is IPv6 with `ff:fe` at bytes 11 and 12.
///
/// Purely syntactic: coincidental `fffe` patterns in random interface
/// identifiers are counted too.
pub fn is_eui64(ip: &IpAddr) -> bool {
    match ip {
        IpAddr::V6(a) => {
            let b = a.octets();
            b[11] == 0xff && b[12] == 0xfe
        }
        IpAddr::V4(_) => false,
    }
}

/// Recovers the MAC embedded in an EUI-64 interface identifier. The U/L bit
/// is always flipped back.
pub fn extract_mac(ip: &IpAddr) -> Result<Mac48, AddrError> {
    match ip {
        IpAddr::V6(a) if is_eui64(ip) => {
            let b = a.octets();
            Ok(Mac48([b[8] ^ UL_BIT, b[9], b[10], b[13], b[14], b[15]]))
        }
        _ => Err(AddrError::NotEui64(*ip)),
    }
}

/// Builds the SLAAC EUI-64 address for `mac` inside a /64.
pub fn embed_mac(mac: Mac48, prefix64: &Prefix) -> Result<IpAddr, AddrError> {
    let IpAddr::V6(net) = prefix64.network() else {
        return Err(AddrError::BadLength { len: prefix64.len(), family: "IPv4" });
    };
    if prefix64.len() != 64 {
        return Err(AddrError::BadLength { len: prefix64.len(), family: "IPv6" });
    }
    let m = mac.0;
    let mut b = net.octets();
    b[8..16].copy_from_slice(&[m[0] ^ UL_BIT, m[1], m[2], 0xff, 0xfe, m[3], m[4], m[5]]);
    Ok(IpAddr::V6(Ipv6Addr::from(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Reference extraction written against the 64-bit interface identifier
    /// as an integer rather than byte slots.
    fn oracle_mac(ip: &str) -> Option<String> {
        let v: u128 = ip.parse::<Ipv6Addr>().ok()?.into();
        let iid = (v & 0xffff_ffff_ffff_ffff) as u64;
        if (iid >> 24) & 0xffff != 0xfffe {
            return None;
        }
        let upper = (iid >> 40) ^ 0x02_0000;
        let lower = iid & 0xff_ffff;
        let mac = (upper << 24) | lower;
        let hex = format!("{mac:012x}");
        Some(
            (0..6)
                .map(|i| &hex[i * 2..i * 2 + 2])
                .collect::<Vec<_>>()
                .join(":"),
        )
    }

    fn ip(s: &str) -> IpAddr {
        s.parse().unwrap()
    }

    #[test]
    fn oracle_agrees_on_examples() {
        assert_eq!(
            oracle_mac("2001:db8::0250:56ff:fe8a:0001").as_deref(),
            Some("00:50:56:8a:00:01")
        );
        assert_eq!(
            oracle_mac("fe80::5074:f2ff:feb1:a87f").as_deref(),
            Some("52:74:f2:b1:a8:7f")
        );
        assert_eq!(oracle_mac("2001:db8::1"), None);
    }

    #[test]
    fn detection() {
        assert!(is_eui64(&ip("2001:db8::0250:56ff:fe8a:0001")));
        assert!(!is_eui64(&ip("2001:db8::1")));
        assert!(is_eui64(&ip("fe80::5074:f2ff:feb1:a87f")));
        assert!(!is_eui64(&ip("192.0.2.1")));
        // ff:fe in the wrong slot
        assert!(!is_eui64(&ip("2001:db8::ff:fe00:0:1")));
    }

    #[test]
    fn extraction() {
        assert_eq!(
            extract_mac(&ip("2001:db8::0250:56ff:fe8a:0001")).unwrap().to_string(),
            "00:50:56:8a:00:01"
        );
        assert_eq!(
            extract_mac(&ip("2001:db8::5074:f2ff:feb1:a87f")).unwrap().to_string(),
            "52:74:f2:b1:a8:7f"
        );
        assert_eq!(
            extract_mac(&ip("2001:db8::0200:00ff:fe00:0000")).unwrap(),
            Mac48([0; 6])
        );
        assert!(matches!(
            extract_mac(&ip("2001:db8::1")),
            Err(AddrError::NotEui64(_))
        ));
    }

    #[test]
    fn embedding() {
        let mac: Mac48 = "52:74:f2:b1:a8:7f".parse().unwrap();
        let p: Prefix = "2001:db8::/64".parse().unwrap();
        assert_eq!(
            embed_mac(mac, &p).unwrap().to_string(),
            "2001:db8::5074:f2ff:feb1:a87f"
        );
        let fe80: Prefix = "fe80::/64".parse().unwrap();
        assert_eq!(
            embed_mac(Mac48([0; 6]), &fe80).unwrap().to_string(),
            "fe80::200:ff:fe00:0"
        );
        let p48: Prefix = "2001:db8::/48".parse().unwrap();
        assert!(matches!(
            embed_mac(mac, &p48),
            Err(AddrError::BadLength { len: 48, .. })
        ));
    }

    #[test]
    fn mac_flags_and_text() {
        let m: Mac48 = "52-74-F2-B1-A8-7F".parse().unwrap();
        assert!(m.is_locally_administered());
        assert!(!m.is_multicast());
        assert_eq!(m.oui().to_string(), "52:74:f2");
        assert!("52:74:f2:b1:a8".parse::<Mac48>().is_err());
        assert!("zz:74:f2:b1:a8:7f".parse::<Mac48>().is_err());
    }

    proptest! {
        #[test]
        fn embed_extract_roundtrip(octets in any::<[u8; 6]>(), net in any::<u64>()) {
            let mac = Mac48(octets);
            let p = Prefix::new(IpAddr::V6(Ipv6Addr::from(u128::from(net) << 64)), 64).unwrap();
            let addr = embed_mac(mac, &p).unwrap();
            prop_assert!(is_eui64(&addr));
            prop_assert_eq!(extract_mac(&addr).unwrap(), mac);
            prop_assert_eq!(oracle_mac(&addr.to_string()), Some(mac.to_string()));
        }

        #[test]
        fn parse_display_roundtrip(raw in any::<u128>()) {
            let a = IpAddr::V6(Ipv6Addr::from(raw));
            let text = super::super::canonical_text(&a);
            prop_assert_eq!(super::super::parse_ip(&text).unwrap(), a);
            prop_assert_eq!(super::super::canonical_text(&super::super::parse_ip(&text).unwrap()), text);
        }
    }
}
