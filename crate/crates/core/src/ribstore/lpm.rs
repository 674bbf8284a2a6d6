//! Path-compressed binary trie for longest-prefix match.

use std::net::IpAddr;

use super::{OriginAs, RibSnapshot};
use crate::netaddr::prefix::{aligned_bits, mask128};
use crate::netaddr::Prefix;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    bits: u128,
    len: u8,
    value: u32,
    child: [u32; 2],
}

impl Node {
    fn new(bits: u128, len: u8, value: u32) -> Node {
        Node { bits, len, value, child: [NONE; 2] }
    }
}

#[inline]
fn bit_at(x: u128, i: u8) -> usize {
    ((x >> (127 - u32::from(i))) & 1) as usize
}

#[inline]
fn common_len(a: u128, b: u128) -> u8 {
    (a ^ b).leading_zeros().min(128) as u8
}

/// Immutable longest-prefix-match index over one snapshot.
#[derive(Debug, Clone)]
pub struct LpmIndex {
    nodes: Vec<Node>,
    values: Vec<(Prefix, OriginAs)>,
}

const V4_ROOT: u32 = 0;
const V6_ROOT: u32 = 1;

impl Default for LpmIndex {
    fn default() -> Self {
        LpmIndex { nodes: vec![Node::new(0, 0, NONE), Node::new(0, 0, NONE)], values: Vec::new() }
    }
}

impl LpmIndex {
    pub fn new() -> LpmIndex {
        LpmIndex::default()
    }

    pub fn from_snapshot(snapshot: &RibSnapshot) -> LpmIndex {
        let mut idx = LpmIndex::new();
        for (prefix, origin) in &snapshot.entries {
            idx.insert(*prefix, origin.clone());
        }
        idx
    }

    /// Number of distinct prefixes stored.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn push(&mut self, node: Node) -> u32 {
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    /// Inserts or replaces the origin for `prefix`.
    pub fn insert(&mut self, prefix: Prefix, origin: OriginAs) {
        let key = prefix.aligned_bits();
        let klen = prefix.len();
        let mut cur = if prefix.is_v6() { V6_ROOT } else { V4_ROOT };
        loop {
            let node = &self.nodes[cur as usize];
            if node.len == klen {
                if node.value == NONE {
                    self.values.push((prefix, origin));
                    self.nodes[cur as usize].value = (self.values.len() - 1) as u32;
                } else {
                    self.values[node.value as usize].1 = origin;
                }
                return;
            }
            let side = bit_at(key, node.len);
            let c = node.child[side];
            if c == NONE {
                let leaf = self.new_leaf(key, klen, prefix, origin);
                self.nodes[cur as usize].child[side] = leaf;
                return;
            }
            let child = &self.nodes[c as usize];
            let common = common_len(child.bits, key).min(child.len).min(klen);
            if common == child.len {
                cur = c;
                continue;
            }
            let child_side = bit_at(child.bits, common);
            let mid = if common == klen {
                let mid = self.new_leaf(key, klen, prefix, origin);
                self.nodes[mid as usize].child[child_side] = c;
                mid
            } else {
                let mid = self.push(Node::new(key & mask128(common), common, NONE));
                let leaf = self.new_leaf(key, klen, prefix, origin);
                let m = &mut self.nodes[mid as usize];
                m.child[child_side] = c;
                m.child[1 - child_side] = leaf;
                mid
            };
            self.nodes[cur as usize].child[side] = mid;
            return;
        }
    }

    fn new_leaf(&mut self, key: u128, klen: u8, prefix: Prefix, origin: OriginAs) -> u32 {
        self.values.push((prefix, origin));
        let value = (self.values.len() - 1) as u32;
        self.push(Node::new(key, klen, value))
    }

    /// Most specific stored prefix containing `ip`, with its origin.
    pub fn longest_match(&self, ip: &IpAddr) -> Option<(Prefix, &OriginAs)> {
        let key = aligned_bits(ip);
        let max = if ip.is_ipv6() { 128 } else { 32 };
        let mut cur = &self.nodes[if ip.is_ipv6() { V6_ROOT } else { V4_ROOT } as usize];
        let mut best = cur.value;
        while cur.len < max {
            let c = cur.child[bit_at(key, cur.len)];
            if c == NONE {
                break;
            }
            let child = &self.nodes[c as usize];
            if key & mask128(child.len) != child.bits {
                break;
            }
            if child.value != NONE {
                best = child.value;
            }
            cur = child;
        }
        (best != NONE).then(|| {
            let (p, o) = &self.values[best as usize];
            (*p, o)
        })
    }

    /// Origin for `ip`; `Unrouted` when no prefix covers it.
    pub fn lookup(&self, ip: &IpAddr) -> OriginAs {
        self.longest_match(ip).map_or(OriginAs::Unrouted, |(_, o)| o.clone())
    }
}
