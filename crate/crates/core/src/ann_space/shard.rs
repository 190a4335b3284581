//! On-disk lookup tables: little-endian binary shards plus a JSON manifest.
//!
//! Shard layout:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 4    | magic `EVLT`                           |
//! | 4      | 2    | format version (u16)                   |
//! | 6      | 8    | first compact id (u64)                 |
//! | 14     | 8    | record count (u64)                     |
//! | 22     | 10   | reserved, zero                         |
//! | 32     | 4·n  | records: niche u16, evolvability u8, flags u8 (bit 0 = valid) |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::genome::{GeneMask, Subspace};
use super::table::{LookupRecord, LookupTable};
use crate::error::{Error, Result};
use crate::maze::RobotParams;

pub const MAGIC: &[u8; 4] = b"EVLT";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
pub const RECORD_LEN: usize = 4;
const FLAG_VALID: u8 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn encode_shard(start: u64, records: &[LookupRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * records.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&start.to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    out.resize(HEADER_LEN, 0);
    for r in records {
        out.extend_from_slice(&r.niche.to_le_bytes());
        out.push(r.evolvability);
        out.push(FLAG_VALID);
    }
    out
}

/// Parses a shard, returning its first id and records. Records without the
/// valid flag are rejected.
pub fn decode_shard(bytes: &[u8]) -> Result<(u64, Vec<LookupRecord>)> {
    let bad = |m: String| Error::Integrity(m);
    if bytes.len() < HEADER_LEN || &bytes[0..4] != MAGIC {
        return Err(bad("not a lookup-table shard (bad magic)".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported shard format version {version}")));
    }
    let start = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let count = u64::from_le_bytes(bytes[14..22].try_into().expect("8 bytes"));
    let body = &bytes[HEADER_LEN..];
    if body.len() as u64 != count * RECORD_LEN as u64 {
        return Err(bad(format!(
            "shard declares {count} records but holds {} bytes of records",
            body.len()
        )));
    }
    let mut records = Vec::with_capacity(count as usize);
    for (i, chunk) in body.chunks_exact(RECORD_LEN).enumerate() {
        if chunk[3] & FLAG_VALID == 0 {
            return Err(bad(format!("record {} of shard at {start} is not valid", i)));
        }
        records.push(LookupRecord {
            niche: u16::from_le_bytes([chunk[0], chunk[1]]),
            evolvability: chunk[2],
        });
    }
    Ok((start, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardEntry {
    /// Path relative to the manifest's directory.
    pub file: String,
    pub start: u64,
    pub count: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableManifest {
    pub format_version: u16,
    pub mask: GeneMask,
    pub space_size: u64,
    pub maze_sha256: String,
    pub robot: RobotParams,
    pub steepness: f64,
    pub shards: Vec<ShardEntry>,
}

/// Checks that `(start, count)` spans tile `[0, size)` exactly once.
pub fn verify_coverage(spans: &[(u64, u64)], size: u64) -> Result<()> {
    let mut sorted = spans.to_vec();
    sorted.sort_unstable();
    let mut next = 0u64;
    for (start, count) in sorted {
        if start > next {
            return Err(Error::Integrity(format!("gap in table ids {next}..{start}")));
        }
        if start < next {
            return Err(Error::Integrity(format!("overlap in table ids at {start}")));
        }
        next = start + count;
    }
    if next != size {
        return Err(Error::Integrity(format!(
            "table covers ids 0..{next} but the space has {size}"
        )));
    }
    Ok(())
}

/// Splits `[0, size)` into `parts` contiguous near-equal spans.
pub fn partition(size: u64, parts: usize) -> Vec<(u64, u64)> {
    let parts = (parts.max(1) as u64).min(size.max(1));
    let base = size / parts;
    let extra = size % parts;
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let count = base + u64::from(i < extra);
            let span = (start, count);
            start += count;
            span
        })
        .collect()
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `table` into `dir` as `shards` shard files and a manifest.
pub fn write_table(
    dir: &Path,
    table: &LookupTable,
    shards: usize,
    maze_text: &str,
    robot: &RobotParams,
    steepness: f64,
) -> Result<TableManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let spans = partition(table.space().size(), shards);
    verify_coverage(&spans, table.space().size())?;
    let mut entries = Vec::with_capacity(spans.len());
    for (i, &(start, count)) in spans.iter().enumerate() {
        let bytes = encode_shard(
            start,
            &table.records()[start as usize..(start + count) as usize],
        );
        let file = format!("shard_{i:04}.evlt");
        let path = dir.join(&file);
        std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        entries.push(ShardEntry {
            file,
            start,
            count,
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = TableManifest {
        format_version: FORMAT_VERSION,
        mask: table.space().mask(),
        space_size: table.space().size(),
        maze_sha256: sha256_hex(maze_text.as_bytes()),
        robot: robot.clone(),
        steepness,
        shards: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<TableManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads a table, refusing it unless `maze_text` has the recorded digest,
/// every shard matches its checksum, and the shards tile the space.
pub fn load_table(manifest_path: &Path, maze_text: &str) -> Result<(TableManifest, LookupTable)> {
    let manifest = read_manifest(manifest_path)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Integrity(format!(
            "unsupported table format version {}",
            manifest.format_version
        )));
    }
    let digest = sha256_hex(maze_text.as_bytes());
    if digest != manifest.maze_sha256 {
        return Err(Error::Integrity(format!(
            "maze digest {digest} does not match the table's {}",
            manifest.maze_sha256
        )));
    }
    let space = Subspace::new(manifest.mask);
    if space.size() != manifest.space_size {
        return Err(Error::Integrity("manifest space size disagrees with its mask".into()));
    }
    let spans: Vec<(u64, u64)> = manifest.shards.iter().map(|s| (s.start, s.count)).collect();
    verify_coverage(&spans, space.size())?;

    let dir: PathBuf = manifest_path.parent().unwrap_or(Path::new(".")).into();
    let mut records = vec![LookupRecord::default(); space.size() as usize];
    for entry in &manifest.shards {
        let path = dir.join(&entry.file);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if sha256_hex(&bytes) != entry.sha256 {
            return Err(Error::Integrity(format!("checksum mismatch for {}", entry.file)));
        }
        let (start, recs) = decode_shard(&bytes)?;
        if start != entry.start || recs.len() as u64 != entry.count {
            return Err(Error::Integrity(format!(
                "{} header disagrees with the manifest",
                entry.file
            )));
        }
        records[start as usize..start as usize + recs.len()].copy_from_slice(&recs);
    }
    let table = LookupTable::from_records(space, records)?;
    Ok((manifest, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let bytes = encode_shard(
            7,
            &[LookupRecord {
                niche: 0x0102,
                evolvability: 9,
            }],
        );
        assert_eq!(bytes.len(), 36);
        assert_eq!(&bytes[0..4], b"EVLT");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..14], &7u64.to_le_bytes());
        assert_eq!(&bytes[14..22], &1u64.to_le_bytes());
        assert!(bytes[22..32].iter().all(|&b| b == 0));
        assert_eq!(&bytes[32..36], &[0x02, 0x01, 9, 1]);
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = encode_shard(0, &[LookupRecord::default(); 3]);
        assert!(decode_shard(&bytes[..30]).is_err());
        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(decode_shard(&wrong_magic).is_err());
        bytes[32 + 3] = 0;
        assert!(decode_shard(&bytes).is_err());
    }

    #[test]
    fn coverage_checks() {
        assert!(verify_coverage(&[(0, 5), (5, 5)], 10).is_ok());
        assert!(verify_coverage(&[(5, 5), (0, 5)], 10).is_ok());
        assert!(verify_coverage(&[(0, 4), (5, 5)], 10).is_err());
        assert!(verify_coverage(&[(0, 6), (5, 5)], 10).is_err());
        assert!(verify_coverage(&[(0, 5)], 10).is_err());
    }

    proptest! {
        #[test]
        fn shard_roundtrip(start in 0u64..1_000_000, recs in prop::collection::vec((0u16..400, 0u8..37), 0..64)) {
            let records: Vec<LookupRecord> = recs
                .into_iter()
                .map(|(niche, evolvability)| LookupRecord { niche, evolvability })
                .collect();
            let (s, back) = decode_shard(&encode_shard(start, &records)).unwrap();
            prop_assert_eq!(s, start);
            prop_assert_eq!(back, records);
        }

        #[test]
        fn partitions_tile(size in 1u64..10_000, parts in 1usize..17) {
            let spans = partition(size, parts);
            prop_assert!(verify_coverage(&spans, size).is_ok());
            prop_assert!(spans.iter().all(|s| s.1 > 0));
        }
    }
}
