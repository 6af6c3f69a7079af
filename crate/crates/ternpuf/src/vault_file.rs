// SPDX-License-Identifier: Apache-2.0

//! Vault file.
//!
//! ```text
//! header (26 bytes)
//!      0     4  magic "PVLT"
//!      4     2  version (u16 LE, currently 1)
//!      6     4  record count (u32 LE)
//!     10    16  device id of the ternary map the records were enrolled against
//! record (repeated)
//!      0     4  body length (u32 LE)
//!      4     1  user id length L (1..=64)
//!      5     L  user id
//!    5+L    32  SHA-256 of the 16-byte enrollment response
//!   37+L     8  created_at, seconds since the Unix epoch (u64 LE)
//!   45+L     1  expander variant tag, b'a' or b'b'
//! ```

use std::path::Path;

use ternpuf_core::vault::MAX_USER_ID_LEN;
use ternpuf_core::{ExpanderVariant, UserRecord, Vault};

use crate::codec::{read_file, write_atomic, Cursor};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PVLT";
pub const VERSION: u16 = 1;

pub fn encode(vault: &Vault) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(vault.len() as u32).to_le_bytes());
    out.extend_from_slice(&vault.map_id());
    for r in vault.records() {
        let body_len = 1 + r.user_id.len() + 32 + 8 + 1;
        out.extend_from_slice(&(body_len as u32).to_le_bytes());
        out.push(r.user_id.len() as u8);
        out.extend_from_slice(&r.user_id);
        out.extend_from_slice(&r.response_digest);
        out.extend_from_slice(&r.created_at.to_le_bytes());
        out.push(r.expander_variant.tag());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vault> {
    let mut cur = Cursor::new(bytes);
    if cur.array::<4>("magic")? != *MAGIC {
        return Err(Error::format(0, "bad magic, expected PVLT"));
    }
    let version = cur.u16("version")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: VERSION,
        });
    }
    let count = cur.u32("record count")?;
    let map_id = cur.array::<16>("map id")?;
    let mut records = Vec::new();
    for _ in 0..count {
        let start = cur.pos();
        let body_len = cur.u32("record length")? as usize;
        let body_start = cur.pos();
        let id_len = cur.u8("user id length")? as usize;
        if id_len == 0 || id_len > MAX_USER_ID_LEN {
            return Err(Error::format(
                body_start,
                format!("user id length {id_len}"),
            ));
        }
        if body_len != 1 + id_len + 32 + 8 + 1 {
            return Err(Error::format(
                start,
                format!("record length {body_len} inconsistent"),
            ));
        }
        let user_id = cur.take(id_len, "user id")?.to_vec();
        let response_digest = cur.array::<32>("response digest")?;
        let created_at = cur.u64("created_at")?;
        let tag_at = cur.pos();
        let expander_variant = ExpanderVariant::from_tag(cur.u8("variant")?)
            .ok_or_else(|| Error::format(tag_at, "unknown expander variant"))?;
        records.push(UserRecord {
            user_id,
            response_digest,
            created_at,
            expander_variant,
        });
    }
    if cur.remaining() > 0 {
        return Err(Error::format(cur.pos(), "trailing bytes after last record"));
    }
    Vault::from_records(map_id, records)
        .map_err(|_| Error::format(10, "duplicate user id in vault"))
}

pub fn save(path: &Path, vault: &Vault) -> Result<()> {
    write_atomic(path, &encode(vault))
}

pub fn load(path: &Path) -> Result<Vault> {
    decode(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &[u8], fill: u8) -> UserRecord {
        UserRecord {
            user_id: id.to_vec(),
            response_digest: [fill; 32],
            created_at: 1_700_000_000 + fill as u64,
            expander_variant: if fill.is_multiple_of(2) {
                ExpanderVariant::KeepOriginal
            } else {
                ExpanderVariant::RehashAll
            },
        }
    }

    #[test]
    fn round_trips() {
        let empty = Vault::new([3; 16]);
        assert_eq!(decode(&encode(&empty)).unwrap(), empty);

        let three = Vault::from_records(
            [4; 16],
            [record(b"alice", 1), record(b"bob", 2), record(b"carol", 3)],
        )
        .unwrap();
        let bytes = encode(&three);
        assert_eq!(&bytes[..4], b"PVLT");
        assert_eq!(&bytes[6..10], &[3, 0, 0, 0]);
        assert_eq!(decode(&bytes).unwrap(), three);
    }

    #[test]
    fn every_truncation_fails() {
        let v = Vault::from_records([4; 16], [record(b"alice", 1), record(b"bob", 2)]).unwrap();
        let bytes = encode(&v);
        for cut in 0..bytes.len() {
            assert!(
                matches!(decode(&bytes[..cut]), Err(Error::Format { .. })),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn rejects_bad_fields() {
        let v = Vault::from_records([4; 16], [record(b"alice", 1)]).unwrap();
        let good = encode(&v);

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(
            decode(&bad),
            Err(Error::UnsupportedVersion { found: 9, .. })
        ));

        let mut bad = good.clone();
        *bad.last_mut().unwrap() = b'z';
        assert!(matches!(decode(&bad), Err(Error::Format { .. })));

        let mut bad = good.clone();
        bad[26] = 99;
        assert!(matches!(
            decode(&bad),
            Err(Error::Format { offset: 26, .. })
        ));

        let mut bad = good;
        bad.extend_from_slice(&[0, 0]);
        assert!(matches!(decode(&bad), Err(Error::Format { .. })));
    }
}
