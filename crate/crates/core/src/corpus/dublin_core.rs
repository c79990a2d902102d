//! Qualified Dublin Core record parsing.
//!
//! Two encodings are accepted: DSpace-style `<field element=".." qualifier="..">`
//! elements and one-element-per-field forms such as `<dc:description.abstract>`.
//! Namespace prefixes are ignored, so a record cut out of a page parses even
//! when its prefixes were declared on an ancestor.

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::record::{EtdRecord, DegreeLevel, EtdType};
use super::CorpusError;

/// Dotted field keys in document order, e.g. `("description.abstract", "...")`.
pub fn extract_fields(xml: &str) -> Result<Vec<(String, String)>, CorpusError> {
    let mut reader = Reader::from_str(xml);
    let mut stack: Vec<(Option<String>, String)> = Vec::new();
    let mut fields = Vec::new();
    let mut header_depth: Option<usize> = None;
    let mut deleted = false;
    let xml_err = |e: quick_xml::Error| CorpusError::Xml(e.to_string());

    loop {
        match reader.read_event().map_err(xml_err)? {
            Event::Start(e) => {
                let local = local_name(&e);
                if local == "header" && header_depth.is_none() {
                    header_depth = Some(stack.len());
                    deleted = attr(&e, "status").as_deref() == Some("deleted");
                }
                let key = if header_depth.is_some() { None } else { field_key(&e, &local) };
                stack.push((key, String::new()));
            }
            Event::Empty(e) => {
                if local_name(&e) == "header" && attr(&e, "status").as_deref() == Some("deleted") {
                    deleted = true;
                }
            }
            Event::Text(t) => {
                if let Some(top) = stack.last_mut() {
                    top.1.push_str(&t.decode().map_err(|e| CorpusError::Xml(e.to_string()))?);
                }
            }
            Event::CData(t) => {
                if let Some(top) = stack.last_mut() {
                    top.1.push_str(&t.decode().map_err(|e| CorpusError::Xml(e.to_string()))?);
                }
            }
            Event::GeneralRef(r) => {
                if let Some(top) = stack.last_mut() {
                    if let Some(c) = r.resolve_char_ref().map_err(xml_err)? {
                        top.1.push(c);
                    } else {
                        let name = r.decode().map_err(|e| CorpusError::Xml(e.to_string()))?;
                        match resolve_predefined_entity(&name) {
                            Some(s) => top.1.push_str(s),
                            None => {
                                return Err(CorpusError::Xml(format!("undefined entity &{name};")))
                            }
                        }
                    }
                }
            }
            Event::End(_) => {
                let (key, text) = stack
                    .pop()
                    .ok_or_else(|| CorpusError::Xml("unbalanced end tag".into()))?;
                if header_depth == Some(stack.len()) {
                    header_depth = None;
                }
                let text = text.trim();
                if let (Some(key), false) = (key, text.is_empty()) {
                    fields.push((key, text.to_string()));
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(CorpusError::Xml("unexpected end of input".into()));
    }
    if deleted {
        return Err(CorpusError::Deleted);
    }
    Ok(fields)
}

fn local_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.local_name().as_ref()).to_lowercase()
}

fn attr(e: &BytesStart<'_>, name: &str) -> Option<String> {
    e.attributes().flatten().find_map(|a| {
        (a.key.local_name().as_ref() == name.as_bytes())
            .then(|| a.unescape_value().ok().map(|v| v.into_owned()))
            .flatten()
    })
}

fn field_key(e: &BytesStart<'_>, local: &str) -> Option<String> {
    if local == "field" {
        let element = attr(e, "element")?;
        return Some(match attr(e, "qualifier") {
            Some(q) if !q.is_empty() && q != "none" => format!("{element}.{q}").to_lowercase(),
            _ => element.to_lowercase(),
        });
    }
    Some(local.to_string())
}

const ABSTRACT_KEYS: &[&str] = &["description.abstract", "abstract"];
const GENERAL_KEYS: &[&str] = &[
    "description.abstractgeneral",
    "description.abstract_general",
    "abstractgeneral",
    "abstract_general",
];

fn first<'a>(fields: &'a [(String, String)], keys: &[&str]) -> Option<&'a str> {
    keys.iter()
        .find_map(|k| fields.iter().find(|(key, _)| key == k))
        .map(|(_, v)| v.as_str())
}

/// Maps one OAI-PMH record to an [`EtdRecord`] without a college.
///
/// Records missing either abstract, the identifier, the degree level or the
/// document type are rejected with the name of the missing column.
pub fn parse_record(xml: &str) -> Result<EtdRecord, CorpusError> {
    let fields = extract_fields(xml)?;
    let required = |name: &'static str, keys: &[&str]| {
        first(&fields, keys).map(str::to_string).ok_or(CorpusError::MissingField(name))
    };
    let optional = |keys: &[&str]| first(&fields, keys).unwrap_or_default().to_string();

    let abstract_text = required("abstract", ABSTRACT_KEYS)?;
    let abstract_general = required("abstract_general", GENERAL_KEYS)?;
    let identifier_uri = first(&fields, &["identifier.uri"])
        .or_else(|| {
            fields
                .iter()
                .find(|(k, v)| k == "identifier" && v.starts_with("http"))
                .map(|(_, v)| v.as_str())
        })
        .map(str::to_string)
        .ok_or(CorpusError::MissingField("identifier_uri"))?;

    let level_raw = required("degree_level", &["degree.level"])?;
    let degree_level = level_raw.parse::<DegreeLevel>().map_err(|_| CorpusError::InvalidField {
        field: "degree_level",
        value: level_raw.clone(),
    })?;

    // `type` is often repeated (e.g. "Text" and "Dissertation"); take the first usable one.
    let types: Vec<&str> = fields
        .iter()
        .filter(|(k, _)| k == "type")
        .map(|(_, v)| v.as_str())
        .collect();
    if types.is_empty() {
        return Err(CorpusError::MissingField("type"));
    }
    let etd_type = types
        .iter()
        .find_map(|t| t.parse::<EtdType>().ok())
        .ok_or_else(|| CorpusError::InvalidField { field: "type", value: types.join("; ") })?;

    let subject_terms = fields
        .iter()
        .filter(|(k, _)| k == "subject" || k.starts_with("subject."))
        .map(|(_, v)| v.clone())
        .collect();

    Ok(EtdRecord {
        identifier_uri,
        title: optional(&["title"]),
        abstract_text,
        abstract_general,
        subject_terms,
        discipline: optional(&["degree.discipline", "discipline"]),
        department: optional(&["contributor.department", "department"]),
        degree: optional(&["degree.name", "degree"]),
        degree_level,
        etd_type,
        college: None,
    })
}
