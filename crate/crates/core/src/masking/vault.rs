use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::EntityLabel;
use crate::mention::PLACEHOLDER_TOKEN;

/// One placeholder binding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaultEntry {
    pub placeholder: String,
    pub surface: String,
    pub label: EntityLabel,
}

/// Per-session reversible dictionary between placeholders and
/// `(surface, label)` pairs.
///
/// Placeholders are `[<LABEL>_<k>]` with `k` counting up from 1 separately
/// for each label. Lookup is exact on the pair: the same surface under two
/// labels gets two placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vault {
    session_id: String,
    forward: BTreeMap<(String, EntityLabel), String>,
    reverse: BTreeMap<String, (String, EntityLabel)>,
    counters: BTreeMap<EntityLabel, u32>,
}

impl Vault {
    pub fn new(session_id: impl Into<String>) -> Self {
        Vault {
            session_id: session_id.into(),
            forward: BTreeMap::new(),
            reverse: BTreeMap::new(),
            counters: EntityLabel::ALL.into_iter().map(|l| (l, 1)).collect(),
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    /// Next index that would be minted for `label`.
    pub fn counter(&self, label: EntityLabel) -> u32 {
        self.counters.get(&label).copied().unwrap_or(1)
    }

    pub fn placeholder(&self, surface: &str, label: EntityLabel) -> Option<&str> {
        self.forward
            .get(&(surface.to_string(), label))
            .map(String::as_str)
    }

    pub fn lookup(&self, placeholder: &str) -> Option<(&str, EntityLabel)> {
        self.reverse
            .get(placeholder)
            .map(|(surface, label)| (surface.as_str(), *label))
    }

    /// Existing placeholder for the pair, or a freshly minted one.
    ///
    /// Returns the token and whether it was minted by this call.
    pub fn placeholder_for(&mut self, surface: &str, label: EntityLabel) -> (String, bool) {
        let key = (surface.to_string(), label);
        if let Some(existing) = self.forward.get(&key) {
            return (existing.clone(), false);
        }
        let counter = self.counters.entry(label).or_insert(1);
        let token = format_placeholder(label, *counter);
        *counter += 1;
        self.forward.insert(key.clone(), token.clone());
        self.reverse.insert(token.clone(), key);
        (token, true)
    }

    /// Entries ordered by label, then index.
    pub fn entries(&self) -> Vec<VaultEntry> {
        let mut entries: Vec<_> = self
            .reverse
            .iter()
            .map(|(placeholder, (surface, label))| VaultEntry {
                placeholder: placeholder.clone(),
                surface: surface.clone(),
                label: *label,
            })
            .collect();
        entries.sort_by_key(|e| (e.label, placeholder_index(&e.placeholder)));
        entries
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&VaultFile::from(self)).expect("vault serializes")
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        let file: VaultFile =
            serde_json::from_str(raw).map_err(|e| Error::CorruptVault(format!("unreadable vault: {e}")))?;
        Vault::try_from(file)
    }

    /// Writes the vault through a temporary file and an atomic rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
        Self::from_json(&raw)
    }
}

pub fn format_placeholder(label: EntityLabel, index: u32) -> String {
    format!("[{}_{}]", label.canonical_name(), index)
}

fn placeholder_index(token: &str) -> u32 {
    token
        .trim_end_matches(']')
        .rsplit('_')
        .next()
        .and_then(|n| n.parse().ok())
        .unwrap_or(0)
}

/// On-disk vault shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VaultFile {
    pub session_id: String,
    pub entries: Vec<VaultEntry>,
    pub counters: BTreeMap<EntityLabel, u32>,
}

impl From<&Vault> for VaultFile {
    fn from(vault: &Vault) -> Self {
        VaultFile {
            session_id: vault.session_id.clone(),
            entries: vault.entries(),
            counters: vault.counters.clone(),
        }
    }
}

impl TryFrom<VaultFile> for Vault {
    type Error = Error;

    fn try_from(file: VaultFile) -> Result<Self> {
        let corrupt = |msg: String| Err(Error::CorruptVault(msg));
        let mut vault = Vault::new(file.session_id);
        for (label, next) in file.counters {
            if next == 0 {
                return corrupt(format!("counter for {label} is 0"));
            }
            vault.counters.insert(label, next);
        }
        let mut seen: BTreeMap<EntityLabel, Vec<u32>> = BTreeMap::new();
        for entry in file.entries {
            if !PLACEHOLDER_TOKEN.is_match(&entry.placeholder) {
                return corrupt(format!("malformed placeholder {:?}", entry.placeholder));
            }
            let index = placeholder_index(&entry.placeholder);
            if entry.placeholder != format_placeholder(entry.label, index) || index == 0 {
                return corrupt(format!("{} does not belong to {}", entry.placeholder, entry.label));
            }
            if entry.surface.is_empty() {
                return corrupt(format!("{} has an empty surface", entry.placeholder));
            }
            let key = (entry.surface, entry.label);
            if vault.forward.contains_key(&key) || vault.reverse.contains_key(&entry.placeholder) {
                return corrupt(format!("duplicate binding for {}", entry.placeholder));
            }
            vault.forward.insert(key.clone(), entry.placeholder.clone());
            vault.reverse.insert(entry.placeholder, key);
            seen.entry(entry.label).or_default().push(index);
        }
        for label in EntityLabel::ALL {
            let mut indices = seen.remove(&label).unwrap_or_default();
            indices.sort_unstable();
            let next = vault.counter(label);
            let contiguous = indices.iter().copied().eq(1..next);
            if !contiguous {
                return corrupt(format!("{label} indices are not contiguous up to counter {next}"));
            }
        }
        Ok(vault)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::storage(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::storage(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::storage(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::storage(path, e.error))?;
    Ok(())
}
