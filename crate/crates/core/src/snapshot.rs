//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                        |
//! |--------|------|--------------------------------|
//! | 0      | 8    | magic `FDBOUSS1`               |
//! | 8      | 4    | dimension (u32)                |
//! | 12     | 4    | points on axis 0 (u32)         |
//! | 16     | 4    | points on axis 1, 1 in 1D (u32)|
//! | 20     | 4    | number of fields (u32)         |
//! | 24     | 8    | time (f64)                     |
//! | 32     | ...  | fields, each row-major f64     |

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"FDBOUSS1";
pub const HEADER_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: u32,
    pub n: [u32; 2],
    pub t: f64,
    pub fields: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn len(&self) -> usize {
        self.n[0] as usize * self.n[1] as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.len() * self.fields.len());
        out.extend_from_slice(MAGIC);
        for v in [self.dim, self.n[0], self.n[1], self.fields.len() as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.t.to_le_bytes());
        for f in &self.fields {
            for v in f {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
            return Err(Error::Format("not a snapshot: bad magic or short header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let (dim, n0, n1, nf) = (word(8), word(12), word(16), word(20) as usize);
        let t = f64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes"));
        if !(dim == 1 && n1 == 1 || dim == 2) {
            return Err(Error::Format(format!("inconsistent header: dim {dim}, n = ({n0}, {n1})")));
        }
        let len = n0 as usize * n1 as usize;
        if bytes.len() != HEADER_LEN + 8 * len * nf {
            return Err(Error::Format(format!(
                "expected {} bytes of field data, found {}",
                8 * len * nf,
                bytes.len() - HEADER_LEN
            )));
        }
        let fields = bytes[HEADER_LEN..]
            .chunks_exact(8 * len.max(1))
            .take(nf)
            .map(|c| {
                c.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                    .collect()
            })
            .collect();
        Ok(Snapshot {
            dim,
            n: [n0, n1],
            t,
            fields,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}
