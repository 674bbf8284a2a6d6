use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::IngestError;

/// Wikimedia project family, derived from the database-name suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Wikipedia,
    Wiktionary,
    Wikibooks,
    Wikiquote,
    Wikisource,
    Wikimedia,
    Wikinews,
    Wikivoyage,
    Wikiversity,
    Other,
}

const SUFFIXES: [(&str, Family); 9] = [
    ("wiktionary", Family::Wiktionary),
    ("wikiversity", Family::Wikiversity),
    ("wikivoyage", Family::Wikivoyage),
    ("wikisource", Family::Wikisource),
    ("wikimedia", Family::Wikimedia),
    ("wikibooks", Family::Wikibooks),
    ("wikiquote", Family::Wikiquote),
    ("wikinews", Family::Wikinews),
    ("wiki", Family::Wikipedia),
];

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Wikipedia => "wikipedia",
            Family::Wiktionary => "wiktionary",
            Family::Wikibooks => "wikibooks",
            Family::Wikiquote => "wikiquote",
            Family::Wikisource => "wikisource",
            Family::Wikimedia => "wikimedia",
            Family::Wikinews => "wikinews",
            Family::Wikivoyage => "wikivoyage",
            Family::Wikiversity => "wikiversity",
            Family::Other => "other",
        };
        f.write_str(s)
    }
}

/// A Wikimedia site database name such as `enwiki` or `aswikiquote`.
///
/// Language and family are derived from the code on demand.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteId {
    code: String,
}

impl SiteId {
    /// Codes are non-empty lowercase ASCII alphanumerics; `_` is also
    /// allowed since real database names use it (`zh_yuewiki`).
    pub fn new(code: &str) -> Result<SiteId, IngestError> {
        let ok = !code.is_empty()
            && code
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_');
        if ok {
            Ok(SiteId { code: code.to_string() })
        } else {
            Err(IngestError::BadSiteId(code.to_string()))
        }
    }

    /// Site from a dump filename: the stem up to the first `-`
    /// (`enwiki-20241201-pages-meta-history1.xml` → `enwiki`).
    pub fn from_dump_filename(path: &Path) -> Result<SiteId, IngestError> {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| IngestError::BadSiteId(path.display().to_string()))?;
        let stem = name.split(['-', '.']).next().unwrap_or_default();
        SiteId::new(stem)
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    fn split(&self) -> (&str, Family) {
        for (suffix, family) in SUFFIXES {
            if let Some(head) = self.code.strip_suffix(suffix) {
                return (head, family);
            }
        }
        (self.code.as_str(), Family::Other)
    }

    pub fn family(&self) -> Family {
        self.split().1
    }

    /// ISO-639 code when the database-name prefix looks like one, else "".
    pub fn language(&self) -> &str {
        let (head, family) = self.split();
        if family == Family::Other {
            return "";
        }
        let lang = head.split('_').next().unwrap_or_default();
        if (2..=3).contains(&lang.len()) && lang.bytes().all(|b| b.is_ascii_lowercase()) {
            lang
        } else {
            ""
        }
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

impl FromStr for SiteId {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SiteId::new(s)
    }
}
