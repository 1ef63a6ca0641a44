//! Parsing of the detector model's JSON entity list.
//!
//! Models rarely follow the requested shape exactly, so several shapes are
//! tried in a fixed order:
//!
//! 1. `{"entities": [{"<surface>": "<label>"}, ...]}`
//! 2. `{"entities": {"<surface>": "<label>", ...}}`
//! 3. the first JSON object embedded in prose or a markdown fence that has
//!    either of the shapes above
//! 4. the bracketed pair list used by the one-shot example,
//!    `{"entities": ["<surface>": "<label>", ...]}`, which is not valid JSON

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Ordered `(surface, label spelling)` pairs exactly as the model wrote them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLlmEntityList {
    pub pairs: Vec<(String, String)>,
}

impl RawLlmEntityList {
    /// Renders the list in the requested array-of-single-key-objects shape.
    pub fn to_reply_json(&self) -> String {
        let entities: Vec<Value> = self
            .pairs
            .iter()
            .map(|(surface, label)| {
                let mut obj = Map::new();
                obj.insert(surface.clone(), Value::String(label.clone()));
                Value::Object(obj)
            })
            .collect();
        serde_json::json!({ "entities": entities }).to_string()
    }
}

pub fn parse_entity_reply(raw: &str) -> Result<RawLlmEntityList> {
    let trimmed = raw.trim();

    if let Ok(value) = serde_json::from_str::<Value>(trimmed) {
        if let Some(list) = entities_from_value(&value) {
            return Ok(list);
        }
    }

    if let Some(list) = first_embedded_object(raw) {
        return Ok(list);
    }

    if let Some(list) = bracketed_pairs(raw) {
        return Ok(list);
    }

    Err(Error::MalformedReply {
        message: "no entity list found in reply".into(),
        raw: raw.to_string(),
    })
}

fn entities_from_value(value: &Value) -> Option<RawLlmEntityList> {
    match value.as_object()?.get("entities")? {
        Value::Array(items) => {
            let mut pairs = Vec::with_capacity(items.len());
            for item in items {
                let obj = item.as_object()?;
                if obj.is_empty() {
                    return None;
                }
                for (surface, label) in obj {
                    pairs.push((surface.clone(), label.as_str()?.to_string()));
                }
            }
            Some(RawLlmEntityList { pairs })
        }
        Value::Object(map) => {
            let pairs = map
                .iter()
                .map(|(surface, label)| Some((surface.clone(), label.as_str()?.to_string())))
                .collect::<Option<Vec<_>>>()?;
            Some(RawLlmEntityList { pairs })
        }
        _ => None,
    }
}

fn first_embedded_object(raw: &str) -> Option<RawLlmEntityList> {
    raw.match_indices('{').find_map(|(start, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(value)) => entities_from_value(&value),
            _ => None,
        }
    })
}

static ENTITIES_ARRAY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?s)"entities"\s*:\s*\[(.*?)\]\s*\}"#).expect("entities regex"));
static QUOTED_PAIR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#""((?:[^"\\]|\\.)*)"\s*:\s*"((?:[^"\\]|\\.)*)""#).expect("pair regex")
});

fn bracketed_pairs(raw: &str) -> Option<RawLlmEntityList> {
    let body = ENTITIES_ARRAY.captures(raw)?.get(1)?.as_str();
    let is_separator = |s: &str| s.chars().all(|c| c.is_whitespace() || c == ',');
    let mut pairs = Vec::new();
    let mut cursor = 0;
    for caps in QUOTED_PAIR.captures_iter(body) {
        let whole = caps.get(0)?;
        if !is_separator(&body[cursor..whole.start()]) {
            return None;
        }
        pairs.push((unescape(&caps[1])?, unescape(&caps[2])?));
        cursor = whole.end();
    }
    if pairs.is_empty() || !is_separator(&body[cursor..]) {
        return None;
    }
    Some(RawLlmEntityList { pairs })
}

fn unescape(quoted_inner: &str) -> Option<String> {
    serde_json::from_str(&format!("\"{quoted_inner}\"")).ok()
}
