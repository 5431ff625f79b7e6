//! Network documents: `{"members": [...], "preferences": {label: [...]}}`.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use prefcomm_core::PreferenceNetwork;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub members: Vec<String>,
    /// Ranked lists keyed by member label, best first.
    pub preferences: IndexMap<String, Vec<String>>,
}

/// One problem in a document. `field` is a JSON path such as
/// `preferences["3"][2]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl NetworkDocument {
    pub fn from_network(net: &PreferenceNetwork) -> Self {
        let members = net.labels().to_vec();
        let preferences = (0..net.n())
            .map(|m| (net.label(m).to_string(), net.order(m).list().iter().map(|&x| net.label(x).to_string()).collect()))
            .collect();
        NetworkDocument { members, preferences }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

/// Line of the first `"key":` after the `"preferences"` key, if any.
fn locate(text: &str, key: &str) -> Option<usize> {
    let start = text.find("\"preferences\"")?;
    let needle = serde_json::to_string(key).ok()?;
    let mut from = start;
    while let Some(off) = text[from..].find(&needle) {
        let at = from + off;
        let rest = text[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(text[..at].matches('\n').count() + 1);
        }
        from = at + needle.len();
    }
    None
}

/// Parses and validates a document, reporting every problem found.
pub fn parse_network(text: &str) -> Result<PreferenceNetwork, Vec<Diagnostic>> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic { line: Some(e.line()), field: format!("column {}", e.column()), message: e.to_string() }]
    })?;
    let mut diags = Vec::new();
    let mut push = |key: Option<&str>, field: String, message: String| {
        diags.push(Diagnostic { line: key.and_then(|k| locate(text, k)), field, message });
    };
    if doc.members.is_empty() {
        push(None, "members".into(), "no members".into());
    }
    let mut ids: HashMap<&str, usize> = HashMap::new();
    for (i, label) in doc.members.iter().enumerate() {
        if ids.insert(label.as_str(), i).is_some() {
            push(None, format!("members[{i}]"), format!("duplicate member {label:?}"));
        }
    }
    for key in doc.preferences.keys() {
        if !ids.contains_key(key.as_str()) {
            push(Some(key), format!("preferences[{key:?}]"), format!("{key:?} is not a member"));
        }
    }
    let mut lists = Vec::with_capacity(doc.members.len());
    for label in &doc.members {
        let Some(list) = doc.preferences.get(label) else {
            push(None, "preferences".into(), format!("no ranked list for member {label:?}"));
            continue;
        };
        let field = format!("preferences[{label:?}]");
        let mut seen = vec![false; doc.members.len()];
        let mut ranked = Vec::with_capacity(list.len());
        for (pos, x) in list.iter().enumerate() {
            match ids.get(x.as_str()) {
                None => push(Some(label), format!("{field}[{pos}]"), format!("{x:?} is not a member")),
                Some(&id) if seen[id] => push(Some(label), format!("{field}[{pos}]"), format!("duplicate member {x:?}")),
                Some(&id) => {
                    seen[id] = true;
                    ranked.push(id);
                }
            }
        }
        let missing: Vec<&str> = doc.members.iter().zip(&seen).filter(|(_, s)| !**s).map(|(m, _)| m.as_str()).collect();
        if !missing.is_empty() {
            push(Some(label), field, format!("missing member(s) {}", missing.join(", ")));
        }
        lists.push(ranked);
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    PreferenceNetwork::from_labeled_lists(doc.members, lists)
        .map_err(|e| vec![Diagnostic { line: None, field: "members".into(), message: e.to_string() }])
}
