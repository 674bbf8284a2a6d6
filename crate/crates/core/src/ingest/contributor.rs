use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

/// Who authored a revision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContributorKind {
    /// Logged-out editor; carries the raw `<ip>` text, not yet validated.
    AnonymousIp(String),
    Registered(String),
    /// Suppressed (`deleted="deleted"`), empty, or unrecognised.
    Deleted,
}

/// Accumulates one `<contributor>` element's children.
#[derive(Debug, Default)]
pub(crate) struct ContributorBuilder {
    deleted: bool,
    ip: Option<String>,
    username: Option<String>,
}

impl ContributorBuilder {
    pub(crate) fn from_start(e: &BytesStart<'_>) -> ContributorBuilder {
        let deleted = e
            .try_get_attribute("deleted")
            .ok()
            .flatten()
            .is_some();
        ContributorBuilder { deleted, ..Default::default() }
    }

    pub(crate) fn set_ip(&mut self, text: String) {
        self.ip.get_or_insert(text);
    }

    pub(crate) fn set_username(&mut self, text: String) {
        self.username.get_or_insert(text);
    }

    /// `<ip>` is the only route to an anonymous classification; usernames
    /// are never inspected for IP-like text.
    pub(crate) fn finish(self) -> ContributorKind {
        if self.deleted {
            ContributorKind::Deleted
        } else if let Some(ip) = self.ip {
            ContributorKind::AnonymousIp(ip)
        } else if let Some(name) = self.username {
            ContributorKind::Registered(name)
        } else {
            ContributorKind::Deleted
        }
    }
}

/// Classifies a revision fragment holding zero or one `<contributor>`.
/// Anything unparseable or unrecognised is [`ContributorKind::Deleted`].
pub fn classify_contributor(fragment: &str) -> ContributorKind {
    #[derive(PartialEq)]
    enum Field {
        None,
        Ip,
        Username,
    }

    let mut reader = Reader::from_str(fragment);
    let mut builder: Option<ContributorBuilder> = None;
    let mut field = Field::None;
    let mut text = String::new();
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) => match (e.name().as_ref(), &builder) {
                ("contributor", None) => builder = Some(ContributorBuilder::from_start(&e)),
                ("ip", Some(_)) => field = Field::Ip,
                ("username", Some(_)) => field = Field::Username,
                _ => {}
            },
            Ok(Event::Empty(e)) => match (e.name().as_ref(), builder.as_mut()) {
                ("contributor", None) => {
                    return ContributorBuilder::from_start(&e).finish();
                }
                ("ip", Some(b)) => b.set_ip(String::new()),
                ("username", Some(b)) => b.set_username(String::new()),
                _ => {}
            },
            Ok(Event::Text(t)) if field != Field::None => text.push_str(&t),
            Ok(Event::GeneralRef(r)) if field != Field::None => {
                super::parser::push_entity(&mut text, &r)
            }
            Ok(Event::End(e)) => match (e.name().as_ref(), builder.as_mut()) {
                ("ip", Some(b)) if field == Field::Ip => {
                    b.set_ip(std::mem::take(&mut text).trim().to_string());
                    field = Field::None;
                }
                ("username", Some(b)) if field == Field::Username => {
                    b.set_username(std::mem::take(&mut text).trim().to_string());
                    field = Field::None;
                }
                ("contributor", Some(_)) => break,
                _ => {}
            },
            Ok(Event::Eof) | Err(_) => break,
            Ok(_) => {}
        }
    }
    builder.map_or(ContributorKind::Deleted, ContributorBuilder::finish)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deleted_attribute() {
        assert_eq!(
            classify_contributor(r#"<contributor deleted="deleted"/>"#),
            ContributorKind::Deleted
        );
        assert_eq!(
            classify_contributor(r#"<contributor deleted="deleted"></contributor>"#),
            ContributorKind::Deleted
        );
    }

    #[test]
    fn ip_contributor() {
        assert_eq!(
            classify_contributor("<contributor><ip>192.0.2.7</ip></contributor>"),
            ContributorKind::AnonymousIp("192.0.2.7".into())
        );
        assert_eq!(
            classify_contributor(
                "<revision><id>1</id><contributor>\n  <ip> 2001:DB8::1 </ip>\n</contributor></revision>"
            ),
            ContributorKind::AnonymousIp("2001:DB8::1".into())
        );
    }

    #[test]
    fn usernames_are_never_ip_parsed() {
        assert_eq!(
            classify_contributor("<contributor><username>2021 fan</username></contributor>"),
            ContributorKind::Registered("2021 fan".into())
        );
        assert_eq!(
            classify_contributor(
                "<contributor><username>10.0.0.1</username><id>9</id></contributor>"
            ),
            ContributorKind::Registered("10.0.0.1".into())
        );
        assert_eq!(
            classify_contributor(
                "<contributor><username>Tom &amp; Jerry</username><id>7</id></contributor>"
            ),
            ContributorKind::Registered("Tom & Jerry".into())
        );
    }

    #[test]
    fn empty_or_missing_is_deleted() {
        assert_eq!(classify_contributor("<contributor/>"), ContributorKind::Deleted);
        assert_eq!(
            classify_contributor("<contributor></contributor>"),
            ContributorKind::Deleted
        );
        assert_eq!(classify_contributor("<revision/>"), ContributorKind::Deleted);
        assert_eq!(classify_contributor(""), ContributorKind::Deleted);
        assert_eq!(classify_contributor("<contributor><ip>"), ContributorKind::Deleted);
    }
}
