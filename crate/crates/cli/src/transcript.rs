//! Replayable binary transcripts of protocol runs.
//!
//! Container format: a header record followed by per-epoch records in
//! publication order. Each record is framed as `tag (1 byte) || length
//! (4 bytes big-endian) || payload`; payloads are compressed points and
//! canonical 32-byte scalars via the library's wire encodings. A
//! human-readable JSON index with per-epoch digests accompanies the binary.

use anyhow::{bail, Context, Result};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};

use ppol_core::apk::HelperValues;
use ppol_core::ppol::PpolBundle;
use ppol_core::pvc::SignedUpdate;

use crate::Curve;

pub const MAGIC: &[u8; 8] = b"PPOLTX01";
pub const TAG_HEADER: u8 = 0x01;
pub const TAG_REGISTRATION: u8 = 0x02;
pub const TAG_UPDATE: u8 = 0x03;
pub const TAG_BUNDLE: u8 = 0x04;

/// Fixed parameters of the run the transcript captures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptHeader {
    pub n: u64,
    pub range_bits: u32,
    pub insecure_srs: bool,
    pub srs_digest: [u8; 32],
}

/// One epoch's messages plus the published bundle.
#[derive(Clone, Debug)]
pub struct EpochRecord {
    pub registrations: Vec<HelperValues<Curve>>,
    pub updates: Vec<SignedUpdate<Curve>>,
    pub bundle: PpolBundle<Curve>,
}

/// A full replayable run.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub epochs: Vec<EpochRecord>,
}

fn write_record<W: Write>(w: &mut W, tag: u8, payload: &[u8]) -> Result<()> {
    w.write_all(&[tag])?;
    w.write_all(&(payload.len() as u32).to_be_bytes())?;
    w.write_all(payload)?;
    Ok(())
}

fn read_record<R: Read>(r: &mut R) -> Result<Option<(u8, Vec<u8>)>> {
    let mut tag = [0u8; 1];
    match r.read_exact(&mut tag) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut payload = vec![0u8; u32::from_be_bytes(len) as usize];
    r.read_exact(&mut payload)?;
    Ok(Some((tag[0], payload)))
}

fn ark_bytes<T: CanonicalSerialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    value.serialize_compressed(&mut buf)?;
    Ok(buf)
}

impl Transcript {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header = Vec::new();
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&self.header.n.to_be_bytes());
        header.extend_from_slice(&self.header.range_bits.to_be_bytes());
        header.push(self.header.insecure_srs as u8);
        header.extend_from_slice(&self.header.srs_digest);
        write_record(w, TAG_HEADER, &header)?;

        for record in &self.epochs {
            for reg in &record.registrations {
                write_record(w, TAG_REGISTRATION, &ark_bytes(reg)?)?;
            }
            for upd in &record.updates {
                write_record(w, TAG_UPDATE, &ark_bytes(upd)?)?;
            }
            write_record(w, TAG_BUNDLE, &ark_bytes(&record.bundle)?)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let Some((tag, payload)) = read_record(r)? else {
            bail!("empty transcript");
        };
        if tag != TAG_HEADER || payload.len() != 8 + 8 + 4 + 1 + 32 || &payload[..8] != MAGIC {
            bail!("bad transcript header");
        }
        let n = u64::from_be_bytes(payload[8..16].try_into().unwrap());
        let range_bits = u32::from_be_bytes(payload[16..20].try_into().unwrap());
        let insecure_srs = payload[20] != 0;
        let srs_digest: [u8; 32] = payload[21..53].try_into().unwrap();

        let mut epochs = Vec::new();
        let mut registrations = Vec::new();
        let mut updates = Vec::new();
        while let Some((tag, payload)) = read_record(r)? {
            match tag {
                TAG_REGISTRATION => registrations.push(
                    HelperValues::<Curve>::deserialize_compressed(&payload[..])
                        .context("registration record")?,
                ),
                TAG_UPDATE => updates.push(
                    SignedUpdate::<Curve>::deserialize_compressed(&payload[..])
                        .context("update record")?,
                ),
                TAG_BUNDLE => {
                    let bundle = PpolBundle::<Curve>::deserialize_compressed(&payload[..])
                        .context("bundle record")?;
                    epochs.push(EpochRecord {
                        registrations: std::mem::take(&mut registrations),
                        updates: std::mem::take(&mut updates),
                        bundle,
                    });
                }
                other => bail!("unknown record tag {other:#x}"),
            }
        }
        if !registrations.is_empty() || !updates.is_empty() {
            bail!("trailing records without a closing bundle");
        }
        Ok(Self {
            header: TranscriptHeader {
                n,
                range_bits,
                insecure_srs,
                srs_digest,
            },
            epochs,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut &bytes[..])
    }

    /// Human-readable index: per-epoch counts and record digests.
    pub fn json_index(&self) -> Result<JsonIndex> {
        let bytes = self.to_bytes()?;
        let mut epochs = Vec::new();
        for record in &self.epochs {
            let mut hasher = Sha256::new();
            for reg in &record.registrations {
                hasher.update(ark_bytes(reg)?);
            }
            for upd in &record.updates {
                hasher.update(ark_bytes(upd)?);
            }
            hasher.update(ark_bytes(&record.bundle)?);
            epochs.push(JsonEpoch {
                epoch: record.bundle.base.epoch,
                registrations: record.registrations.len(),
                updates: record.updates.len(),
                digest: hex::encode(hasher.finalize()),
            });
        }
        Ok(JsonIndex {
            n: self.header.n,
            range_bits: self.header.range_bits,
            insecure_srs: self.header.insecure_srs,
            srs_digest: hex::encode(self.header.srs_digest),
            transcript_sha256: hex::encode(Sha256::digest(&bytes)),
            epochs,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonEpoch {
    pub epoch: u64,
    pub registrations: usize,
    pub updates: usize,
    pub digest: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonIndex {
    pub n: u64,
    pub range_bits: u32,
    pub insecure_srs: bool,
    pub srs_digest: String,
    pub transcript_sha256: String,
    pub epochs: Vec<JsonEpoch>,
}
