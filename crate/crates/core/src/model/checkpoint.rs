//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//! `b"TEMPOCKP"`, `u32` version, `u64`-length-prefixed config JSON,
//! `u64`-length-prefixed vocabulary JSON, `u32` tensor count and per tensor
//! (`u32` name length, name, `u32` rank, `u64` dims, `f32` data), a `u8`
//! optimizer flag optionally followed by the optimizer config JSON, step
//! `u64` and both moment sets as `f64` data, the training step `u64`, and a
//! trailing SHA-256 of everything before it.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use sha2::{Digest, Sha256};

use super::config::EncoderConfig;
use super::encoder::Encoder;
use super::optim::AdamW;
use super::params::ParamSet;
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"TEMPOCKP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderCheckpoint {
    pub encoder: Encoder,
    pub vocab: Vocabulary,
    pub optimizer: Option<AdamW>,
    pub step: u64,
}

fn put_block(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(bytes);
}

fn put_tensors(out: &mut Vec<u8>, set: &ParamSet, wide: bool) {
    out.extend_from_slice(&(set.len() as u32).to_le_bytes());
    for (name, t) in set.iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&2u32.to_le_bytes());
        for d in t.shape() {
            out.extend_from_slice(&(*d as u64).to_le_bytes());
        }
        for &x in t.iter() {
            if wide {
                out.extend_from_slice(&x.to_le_bytes());
            } else {
                out.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::ChecksumFailure("checkpoint ends early".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn block(&mut self) -> Result<&'a [u8]> {
        let n = self.u64()? as usize;
        self.take(n)
    }

    fn tensors(&mut self, wide: bool) -> Result<ParamSet> {
        let count = self.u32()?;
        let mut set = ParamSet::new();
        for _ in 0..count {
            let len = self.u32()? as usize;
            let name = String::from_utf8(self.take(len)?.to_vec())
                .map_err(|_| Error::ChecksumFailure("tensor name is not UTF-8".into()))?;
            if self.u32()? != 2 {
                return Err(Error::ChecksumFailure(format!("tensor {name} has unsupported rank")));
            }
            let (r, c) = (self.u64()? as usize, self.u64()? as usize);
            let width = if wide { 8 } else { 4 };
            let bytes = self.take(r.checked_mul(c).and_then(|n| n.checked_mul(width)).unwrap_or(usize::MAX))?;
            let data: Vec<f64> = if wide {
                bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect()
            } else {
                bytes.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64).collect()
            };
            let t = Array2::from_shape_vec((r, c), data).expect("shape matches data length");
            set.push(name, t);
        }
        Ok(set)
    }
}

impl EncoderCheckpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        put_block(&mut out, &serde_json::to_vec(&self.encoder.config)?);
        put_block(&mut out, &serde_json::to_vec(&self.vocab)?);
        put_tensors(&mut out, &self.encoder.params, false);
        match &self.optimizer {
            Some(opt) => {
                out.push(1);
                put_block(&mut out, &serde_json::to_vec(&opt.config)?);
                out.extend_from_slice(&opt.t.to_le_bytes());
                put_tensors(&mut out, &opt.m, true);
                put_tensors(&mut out, &opt.v, true);
            }
            None => out.push(0),
        }
        out.extend_from_slice(&self.step.to_le_bytes());
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        if buf.len() < MAGIC.len() + 4 || &buf[..MAGIC.len()] != MAGIC {
            return Err(Error::ChecksumFailure("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(buf[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::IncompatibleCheckpoint { found: version, expected: FORMAT_VERSION });
        }
        if buf.len() < 12 + 32 {
            return Err(Error::ChecksumFailure("checkpoint ends early".into()));
        }
        let (body, digest) = buf.split_at(buf.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::ChecksumFailure("checksum mismatch".into()));
        }
        let mut r = Reader { buf: body, pos: 12 };
        let config: EncoderConfig = serde_json::from_slice(r.block()?)?;
        let vocab: Vocabulary = serde_json::from_slice(r.block()?)?;
        let params = r.tensors(false)?;
        let encoder = Encoder::from_params(config, params)?;
        let optimizer = match r.u8()? {
            0 => None,
            _ => {
                let config = serde_json::from_slice(r.block()?)?;
                let t = r.u64()?;
                let m = r.tensors(true)?;
                let v = r.tensors(true)?;
                if m.names() != encoder.params.names() || v.names() != encoder.params.names() {
                    return Err(Error::Config("optimizer state does not match the parameters".into()));
                }
                Some(AdamW { config, m, v, t })
            }
        };
        let step = r.u64()?;
        if r.pos != body.len() {
            return Err(Error::ChecksumFailure("trailing bytes after checkpoint body".into()));
        }
        Ok(EncoderCheckpoint { encoder, vocab, optimizer, step })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let mut f = fs::File::create(path)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
