//! TOML documents holding one `[[fact]]` table per fact.

use serde::{Deserialize, Serialize};

use super::{FactKey, FactKind, KbFact, KnowledgeBase, KnowledgeError};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    version: String,
    #[serde(default, rename = "fact", skip_serializing_if = "Vec::is_empty")]
    facts: Vec<Record>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    kind: String,
    key: String,
    value: String,
    cite: String,
}

/// Parses and validates a knowledge-base document.
pub fn load(source: &str) -> Result<KnowledgeBase, KnowledgeError> {
    let doc: Document =
        toml::from_str(source).map_err(|e| KnowledgeError::Document(e.message().to_string()))?;
    let mut facts = Vec::with_capacity(doc.facts.len());
    for (i, r) in doc.facts.into_iter().enumerate() {
        let schema = |message: String| KnowledgeError::Schema {
            index: i + 1,
            message,
        };
        let kind: FactKind = r.kind.parse().map_err(schema)?;
        let key =
            FactKey::parse(kind, &r.key).map_err(|m| schema(format!("{kind} `{}`: {m}", r.key)))?;
        let value = kind
            .parse_value(&r.value)
            .map_err(|m| schema(format!("{key}: {m}")))?;
        facts.push(KbFact {
            key,
            value,
            cite: r.cite,
        });
    }
    KnowledgeBase::from_facts(doc.version, facts)
}

/// Renders a knowledge base as a document that [`load`] reads back unchanged.
pub fn serialize(kb: &KnowledgeBase) -> String {
    let doc = Document {
        version: kb.version.clone(),
        facts: kb
            .facts()
            .map(|f| Record {
                kind: f.key.kind.to_string(),
                key: f.key.subject.to_string(),
                value: f.value.to_string(),
                cite: f.cite.clone(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("documents are plain tables of strings")
}
