// SPDX-License-Identifier: Apache-2.0

//! Addressable PUF Generator.
//!
//! ```text
//! credentials --SHA-256--> MD (32 B)
//!             --expander--> long digest (8 x 32 B)
//!             --pairing---> 128 cell addresses
//!             --masking---> 128 addresses of stable cells
//!             --read------> 128-bit response
//! ```
//!
//! The expander rotates the leading 16-bit word of the digest (byte 0 is the
//! high byte) left by 0..=7 positions, leaving bytes 2..31 untouched, and
//! hashes the rotated variants: block `i` (0-based) is SHA-256 of the digest
//! rotated by `i`. [`ExpanderVariant::KeepOriginal`] replaces block 0 with
//! the original digest itself; [`ExpanderVariant::RehashAll`] hashes it too.

use core::fmt;

use sha2::{Digest, Sha256};

use crate::device::{PowerUpSnapshot, MAX_CELL_COUNT};
use crate::enrollment::TernaryMap;
use crate::error::{Error, Result};

pub const DIGEST_LEN: usize = 32;
pub const EXPANDER_ROUNDS: usize = 8;
pub const LONG_DIGEST_LEN: usize = DIGEST_LEN * EXPANDER_ROUNDS;
pub const ADDRESS_COUNT: usize = LONG_DIGEST_LEN / 2;
pub const RESPONSE_BITS: usize = ADDRESS_COUNT;
/// Size of the zero-filled password buffer hashed by [`HashInput::PaddedPassword`].
pub const PASSWORD_BLOCK: usize = 32;

/// A SHA-256 output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MessageDigest(pub [u8; DIGEST_LEN]);

impl MessageDigest {
    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    /// Bytes 0 and 1 as a big-endian word.
    pub fn leading_word(&self) -> u16 {
        u16::from_be_bytes([self.0[0], self.0[1]])
    }

    pub fn with_leading_word(mut self, word: u16) -> Self {
        self.0[..2].copy_from_slice(&word.to_be_bytes());
        self
    }
}

pub fn hash_sha256(message: &[u8]) -> MessageDigest {
    MessageDigest(Sha256::digest(message).into())
}

pub fn rotate_left16(word: u16, shifts: u32) -> u16 {
    word.rotate_left(shifts % 16)
}

/// The eight expander inputs: leading word rotated left by 0..=7.
pub fn rotated_variants(md: &MessageDigest) -> [MessageDigest; EXPANDER_ROUNDS] {
    let word = md.leading_word();
    core::array::from_fn(|i| md.with_leading_word(rotate_left16(word, i as u32)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ExpanderVariant {
    /// Every block is the hash of its rotated variant (`a`).
    RehashAll,
    /// Block 1 is the original digest; blocks 2..=8 hash variants 1..=7 (`b`).
    #[default]
    KeepOriginal,
}

impl ExpanderVariant {
    pub fn tag(self) -> u8 {
        match self {
            ExpanderVariant::RehashAll => b'a',
            ExpanderVariant::KeepOriginal => b'b',
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            b'a' => Some(ExpanderVariant::RehashAll),
            b'b' => Some(ExpanderVariant::KeepOriginal),
            _ => None,
        }
    }
}

/// The 256-byte expander output.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LongDigest([u8; LONG_DIGEST_LEN]);

impl LongDigest {
    pub fn from_bytes(bytes: [u8; LONG_DIGEST_LEN]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; LONG_DIGEST_LEN] {
        &self.0
    }

    /// Block `i` (0-based) as a digest.
    pub fn block(&self, i: usize) -> MessageDigest {
        let mut md = [0u8; DIGEST_LEN];
        md.copy_from_slice(&self.0[i * DIGEST_LEN..(i + 1) * DIGEST_LEN]);
        MessageDigest(md)
    }

    pub fn blocks(&self) -> impl Iterator<Item = MessageDigest> + '_ {
        (0..EXPANDER_ROUNDS).map(|i| self.block(i))
    }
}

impl fmt::Debug for LongDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LongDigest(")?;
        for b in self.0.iter().take(8) {
            write!(f, "{b:02X}")?;
        }
        f.write_str("..)")
    }
}

pub fn expand(md: &MessageDigest, variant: ExpanderVariant) -> LongDigest {
    let variants = rotated_variants(md);
    let mut out = [0u8; LONG_DIGEST_LEN];
    for (i, chunk) in out.chunks_exact_mut(DIGEST_LEN).enumerate() {
        let block = match (variant, i) {
            (ExpanderVariant::KeepOriginal, 0) => *md,
            _ => hash_sha256(&variants[i].0),
        };
        chunk.copy_from_slice(&block.0);
    }
    LongDigest(out)
}

/// Byte order used to pair long-digest bytes into addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Endianness {
    /// Byte `2j` is the high byte.
    #[default]
    Big,
    Little,
}

/// What the first digest is computed over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum HashInput {
    /// Password copied into a zero-filled 32-byte buffer; longer passwords
    /// are hashed as-is.
    #[default]
    PaddedPassword,
    /// Password bytes only.
    Password,
    /// User ID immediately followed by the password.
    IdPassword,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ApgConfig {
    pub hash_input: HashInput,
    pub expander: ExpanderVariant,
    pub endianness: Endianness,
}

impl ApgConfig {
    pub fn with_expander(self, expander: ExpanderVariant) -> Self {
        Self { expander, ..self }
    }

    pub fn credential_digest(&self, user_id: &[u8], password: &[u8]) -> MessageDigest {
        match self.hash_input {
            HashInput::PaddedPassword if password.len() <= PASSWORD_BLOCK => {
                let mut block = [0u8; PASSWORD_BLOCK];
                block[..password.len()].copy_from_slice(password);
                hash_sha256(&block)
            }
            HashInput::PaddedPassword | HashInput::Password => hash_sha256(password),
            HashInput::IdPassword => {
                let mut h = Sha256::new();
                h.update(user_id);
                h.update(password);
                MessageDigest(h.finalize().into())
            }
        }
    }

    /// Runs the full pipeline, keeping every intermediate value.
    pub fn trace<S: BitSource + ?Sized>(
        &self,
        user_id: &[u8],
        password: &[u8],
        map: &TernaryMap,
        source: &S,
    ) -> Result<PipelineTrace> {
        let digest = self.credential_digest(user_id, password);
        let variants = rotated_variants(&digest);
        let long = expand(&digest, self.expander);
        let addresses = derive_addresses(&long, map.cell_count(), self.endianness)?;
        let masked = mask_addresses(&addresses, map)?;
        let response = extract_response(&masked, source)?;
        Ok(PipelineTrace {
            digest,
            variants,
            long,
            addresses,
            masked,
            response,
        })
    }
}

/// Credentials to response: hash, expand, pair, mask, read.
pub fn generate_response<S: BitSource + ?Sized>(
    config: &ApgConfig,
    user_id: &[u8],
    password: &[u8],
    map: &TernaryMap,
    source: &S,
) -> Result<PufResponse> {
    config
        .trace(user_id, password, map, source)
        .map(|t| t.response)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineTrace {
    pub digest: MessageDigest,
    pub variants: [MessageDigest; EXPANDER_ROUNDS],
    pub long: LongDigest,
    pub addresses: AddressList,
    pub masked: AddressList,
    pub response: PufResponse,
}

/// 128 cell addresses, before or after masking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AddressList {
    addresses: [u16; ADDRESS_COUNT],
    masked: bool,
}

impl AddressList {
    /// An unmasked list.
    pub fn new(addresses: [u16; ADDRESS_COUNT]) -> Self {
        Self {
            addresses,
            masked: false,
        }
    }

    pub fn addresses(&self) -> &[u16; ADDRESS_COUNT] {
        &self.addresses
    }

    pub fn is_masked(&self) -> bool {
        self.masked
    }
}

pub fn derive_addresses(
    long: &LongDigest,
    cell_count: usize,
    endianness: Endianness,
) -> Result<AddressList> {
    if cell_count == 0 || cell_count > MAX_CELL_COUNT {
        return Err(Error::InvalidConfig("cell_count must lie in 1..=65536"));
    }
    let addresses = core::array::from_fn(|j| {
        let pair = [long.0[2 * j], long.0[2 * j + 1]];
        let word = match endianness {
            Endianness::Big => u16::from_be_bytes(pair),
            Endianness::Little => u16::from_le_bytes(pair),
        };
        (word as usize % cell_count) as u16
    });
    Ok(AddressList::new(addresses))
}

/// First non-fuzzy cell at or after `address`, wrapping at the end of the array.
pub fn mask_address(address: u16, map: &TernaryMap) -> Result<u16> {
    let n = map.cell_count();
    let start = address as usize;
    if start >= n {
        return Err(Error::AddressOutOfRange {
            address: start,
            cell_count: n,
        });
    }
    let states = map.states();
    (0..n)
        .map(|k| (start + k) % n)
        .find(|&a| !states[a].is_fuzzy())
        .map(|a| a as u16)
        .ok_or(Error::Unmaskable)
}

/// Replaces every fuzzy-cell address by the next stable one. Order and
/// duplicates are kept.
pub fn mask_addresses(list: &AddressList, map: &TernaryMap) -> Result<AddressList> {
    let mut addresses = list.addresses;
    for a in addresses.iter_mut() {
        *a = mask_address(*a, map)?;
    }
    Ok(AddressList {
        addresses,
        masked: true,
    })
}

/// Anything a response bit can be read from.
pub trait BitSource {
    fn cell_count(&self) -> usize;
    fn source_bit(&self, address: u16) -> Result<bool>;
}

/// Enrollment-time source: the stable value recorded in the map.
impl BitSource for TernaryMap {
    fn cell_count(&self) -> usize {
        TernaryMap::cell_count(self)
    }

    fn source_bit(&self, address: u16) -> Result<bool> {
        self.reference_bit(address)
    }
}

/// Verification-time source: a fresh power-up.
impl BitSource for PowerUpSnapshot {
    fn cell_count(&self) -> usize {
        PowerUpSnapshot::cell_count(self)
    }

    fn source_bit(&self, address: u16) -> Result<bool> {
        self.read_bit(address)
    }
}

pub fn extract_response<S: BitSource + ?Sized>(
    list: &AddressList,
    source: &S,
) -> Result<PufResponse> {
    if !list.masked {
        return Err(Error::Unmasked);
    }
    read_response(&list.addresses, source)
}

pub(crate) fn read_response<S: BitSource + ?Sized>(
    addresses: &[u16; ADDRESS_COUNT],
    source: &S,
) -> Result<PufResponse> {
    let mut value = 0u128;
    for &a in addresses {
        value = (value << 1) | source.source_bit(a)? as u128;
    }
    Ok(PufResponse(value))
}

/// 128 response bits; bit 0 is the most significant bit of the inner value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PufResponse(pub u128);

impl PufResponse {
    pub const ZERO: PufResponse = PufResponse(0);
    pub const ONES: PufResponse = PufResponse(u128::MAX);

    pub fn from_bits(bits: &[bool; RESPONSE_BITS]) -> Self {
        Self(bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128))
    }

    pub fn bit(&self, j: usize) -> bool {
        assert!(j < RESPONSE_BITS);
        (self.0 >> (RESPONSE_BITS - 1 - j)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..RESPONSE_BITS).map(|j| self.bit(j))
    }

    /// MSB-first packing into 16 bytes.
    pub fn to_bytes(&self) -> [u8; 16] {
        self.0.to_be_bytes()
    }

    pub fn len(&self) -> usize {
        RESPONSE_BITS
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for PufResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
