use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use veilgate_core::detection::DetectorSettings;
use veilgate_core::masking::Vault;
use veilgate_core::EntityMention;

use crate::error::{GatewayError, Result};

pub const SESSION_FILE: &str = "session.json";
pub const VAULT_FILE: &str = "vault.json";
pub const TRANSCRIPT_FILE: &str = "transcript.json";

/// One completed round trip to the upstream model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub mask_hash: String,
    pub original_prompt: String,
    pub masked_prompt: String,
    pub masked_reply: String,
    pub reply: String,
    pub unresolved: Vec<String>,
    pub sent_at: DateTime<Utc>,
    pub received_at: DateTime<Utc>,
}

/// The last masked prompt awaiting review. Lives in memory only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingMask {
    pub prompt: String,
    pub mentions: Vec<EntityMention>,
    pub masked_text: String,
    pub mask_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SessionHeader {
    id: String,
    created_at: DateTime<Utc>,
    detector: DetectorSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub detector: DetectorSettings,
    pub vault: Vault,
    transcript: Vec<Exchange>,
    pub pending: Option<PendingMask>,
}

impl Session {
    pub fn new(detector: DetectorSettings) -> Self {
        let id = uuid::Uuid::new_v4().to_string();
        Session {
            vault: Vault::new(id.clone()),
            id,
            created_at: Utc::now(),
            detector,
            transcript: Vec::new(),
            pending: None,
        }
    }

    pub fn transcript(&self) -> &[Exchange] {
        &self.transcript
    }

    pub fn append(&mut self, exchange: Exchange) {
        self.transcript.push(exchange);
    }
}

/// Sessions on disk, one directory per id under `root`.
#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

impl SessionStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        SessionStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf> {
        // Ids are uuids; anything else could walk out of the vault directory.
        uuid::Uuid::parse_str(id).map_err(|_| GatewayError::NotFound(id.to_string()))?;
        Ok(self.root.join(id))
    }

    pub fn create(&self, detector: DetectorSettings) -> Result<Session> {
        let session = Session::new(detector);
        self.persist(&session)?;
        Ok(session)
    }

    pub fn persist(&self, session: &Session) -> Result<()> {
        let dir = self.dir(&session.id)?;
        std::fs::create_dir_all(&dir).map_err(|e| GatewayError::storage(&dir, e))?;
        let header = SessionHeader {
            id: session.id.clone(),
            created_at: session.created_at,
            detector: session.detector.clone(),
        };
        write_atomic(&dir.join(SESSION_FILE), &to_pretty(&header)?)?;
        write_atomic(&dir.join(VAULT_FILE), session.vault.to_json().as_bytes())?;
        write_atomic(&dir.join(TRANSCRIPT_FILE), &to_pretty(&session.transcript)?)
    }

    pub fn load(&self, id: &str) -> Result<Session> {
        let dir = self.dir(id)?;
        if !dir.join(SESSION_FILE).is_file() {
            return Err(GatewayError::NotFound(id.to_string()));
        }
        let header: SessionHeader = read_json(&dir.join(SESSION_FILE))?;
        let vault = Vault::from_json(&read(&dir.join(VAULT_FILE))?)?;
        let transcript: Vec<Exchange> = read_json(&dir.join(TRANSCRIPT_FILE))?;
        if header.id != id || vault.session_id() != id {
            return Err(corrupt(format!("files in {} belong to another session", dir.display())));
        }
        Ok(Session {
            id: header.id,
            created_at: header.created_at,
            detector: header.detector,
            vault,
            transcript,
            pending: None,
        })
    }
}

fn corrupt(message: String) -> GatewayError {
    GatewayError::Core(veilgate_core::Error::CorruptVault(message))
}

fn to_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(veilgate_core::Error::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| GatewayError::storage(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| corrupt(format!("{}: {e}", path.display())))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| GatewayError::storage(dir, e))?;
    tmp.write_all(bytes).map_err(|e| GatewayError::storage(path, e))?;
    tmp.persist(path).map_err(|e| GatewayError::storage(path, e.error))?;
    Ok(())
}
