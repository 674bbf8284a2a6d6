use std::collections::HashMap;
use std::io::Read;

use serde::Serialize;

use super::eui64::parse_hex_octets;
use super::{Mac48, Oui};

/// Vendor name for MACs whose OUI is not in the registry.
pub const UNLISTED: &str = "Unlisted";

#[derive(Debug, thiserror::Error)]
pub enum OuiError {
    #[error("OUI registry has no usable header (need Assignment and Organization Name columns)")]
    MissingHeader,
    #[error("reading OUI registry: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OuiLoadStats {
    pub rows: u64,
    pub loaded: u64,
    pub duplicates: u64,
    pub bad_rows: u64,
}

/// IEEE MA-L assignments keyed by OUI. Read-only once loaded.
#[derive(Debug, Clone, Default)]
pub struct OuiDatabase {
    vendors: HashMap<Oui, String>,
    stats: OuiLoadStats,
}

impl OuiDatabase {
    pub fn empty() -> OuiDatabase {
        OuiDatabase::default()
    }

    /// Loads the IEEE MA-L CSV export (`Registry,Assignment,Organization
    /// Name,Organization Address`). Columns are located by header name.
    /// Malformed rows are skipped and counted; a repeated assignment keeps
    /// its first organization.
    pub fn load<R: Read>(csv_bytes: R) -> Result<OuiDatabase, OuiError> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(csv_bytes);
        let headers = reader.headers()?.clone();
        let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let (Some(assignment), Some(organization)) =
            (find("Assignment"), find("Organization Name"))
        else {
            return Err(OuiError::MissingHeader);
        };

        let mut db = OuiDatabase::default();
        for row in reader.records() {
            db.stats.rows += 1;
            let row = match row {
                Ok(r) => r,
                Err(e) if e.is_io_error() => return Err(e.into()),
                Err(_) => {
                    db.stats.bad_rows += 1;
                    continue;
                }
            };
            let oui = row.get(assignment).and_then(parse_hex_octets::<3>);
            let name = row.get(organization).filter(|n| !n.is_empty());
            let (Some(oui), Some(name)) = (oui, name) else {
                db.stats.bad_rows += 1;
                continue;
            };
            match db.vendors.entry(Oui(oui)) {
                std::collections::hash_map::Entry::Occupied(_) => db.stats.duplicates += 1,
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(name.to_string());
                    db.stats.loaded += 1;
                }
            }
        }
        Ok(db)
    }

    pub fn insert(&mut self, oui: Oui, name: impl Into<String>) {
        self.vendors.entry(oui).or_insert_with(|| name.into());
    }

    pub fn get(&self, oui: &Oui) -> Option<&str> {
        self.vendors.get(oui).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.vendors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vendors.is_empty()
    }

    pub fn stats(&self) -> OuiLoadStats {
        self.stats
    }
}

/// Organization owning the MAC's OUI, or [`UNLISTED`]. Never fails.
pub fn resolve_vendor<'a>(mac: &Mac48, db: &'a OuiDatabase) -> &'a str {
    db.get(&mac.oui()).unwrap_or(UNLISTED)
}
