//! Versioned binary checkpoint container: magic, format version, payload
//! length, SHA-256 of the payload, then the bincode payload.

use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"RCIMCKPT";
pub const FORMAT_VERSION: u32 = 1;
const HEADER: usize = 8 + 4 + 8 + 32;

pub fn encode<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let payload = bincode::serialize(value).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut out = Vec::with_capacity(HEADER + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    if bytes.len() < HEADER || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("missing checkpoint header".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let payload = &bytes[HEADER..];
    if payload.len() != len {
        return Err(Error::Checkpoint(format!(
            "payload is {} bytes, header says {len}",
            payload.len()
        )));
    }
    if Sha256::digest(payload).as_slice() != &bytes[20..52] {
        return Err(Error::Checkpoint("checksum mismatch".into()));
    }
    bincode::deserialize(payload).map_err(|e| Error::Checkpoint(e.to_string()))
}

/// Writes through a temporary file and renames, so a crash never leaves a
/// truncated checkpoint behind.
pub fn write_checkpoint<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = encode(value)?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<T> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_corruption() {
        let value = (vec![1u64, 2, 3], "state".to_string());
        let bytes = encode(&value).unwrap();
        let back: (Vec<u64>, String) = decode(&bytes).unwrap();
        assert_eq!(back, value);
        let mut bad = bytes.clone();
        *bad.last_mut().unwrap() ^= 1;
        assert!(matches!(decode::<(Vec<u64>, String)>(&bad), Err(Error::Checkpoint(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode::<(Vec<u64>, String)>(&bad).is_err());
        assert!(decode::<(Vec<u64>, String)>(&bytes[..bytes.len() - 1]).is_err());
    }
}
