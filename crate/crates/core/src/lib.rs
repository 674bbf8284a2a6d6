//! Anonymous-edit address extraction and IPv6 adoption analysis over
//! MediaWiki history dumps.
//!
//! Stages hand off through plain TSV files: [`ingest`] turns dumps into
//! edit records, [`extsort`] orders them, [`ribstore`] attributes each
//! address to a BGP origin AS, and [`analytics`] builds the report tables.
//! [`netaddr`] holds the address, EUI-64 and OUI helpers they share.

pub mod analytics;
pub mod extsort;
pub mod ingest;
pub mod netaddr;
pub mod ribstore;
