//! Plain-text generating-vector files.
//!
//! ```text
//! n = 1024
//! s = 3
//! s_star = 2
//! kappa = 0.6
//! tail_seed = 7
//! b_hash = 3f1c…
//! 1
//! 389
//! 117
//! ```

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::cbc::GeneratingVector;
use crate::error::{Error, Result};

/// SHA-256 of the little-endian bytes of `b`, in hex.
pub fn b_hash(b: &[f64]) -> String {
    let mut h = Sha256::new();
    for x in b {
        h.update(x.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvFile {
    pub gv: GeneratingVector,
    pub kappa: f64,
    pub b_hash: String,
}

impl GvFile {
    pub fn to_text(&self) -> String {
        let gv = &self.gv;
        let mut out = String::new();
        writeln!(out, "n = {}", gv.n()).unwrap();
        writeln!(out, "s = {}", gv.s()).unwrap();
        writeln!(out, "s_star = {}", gv.s_star()).unwrap();
        writeln!(out, "kappa = {:?}", self.kappa).unwrap();
        writeln!(out, "tail_seed = {}", gv.tail_seed()).unwrap();
        writeln!(out, "b_hash = {}", self.b_hash).unwrap();
        for z in gv.z() {
            writeln!(out, "{z}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing header field {key}")))?;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("malformed header line {line:?}")))?;
            if k.trim() != key {
                return Err(Error::Format(format!("expected {key}, found {}", k.trim())));
            }
            Ok(v.trim().to_string())
        };
        fn num<T: std::str::FromStr>(key: &str, v: String) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Format(format!("bad value for {key}: {v:?}")))
        }
        let n: usize = num("n", field("n")?)?;
        let s: usize = num("s", field("s")?)?;
        let s_star: usize = num("s_star", field("s_star")?)?;
        let kappa: f64 = num("kappa", field("kappa")?)?;
        let tail_seed: u64 = num("tail_seed", field("tail_seed")?)?;
        let b_hash = field("b_hash")?;
        let z = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| num::<usize>("component", l.trim().to_string()))
            .collect::<Result<Vec<_>>>()?;
        if z.len() != s {
            return Err(Error::Format(format!(
                "header says s = {s} but {} components follow",
                z.len()
            )));
        }
        let gv = GeneratingVector::new(n, z, s_star, tail_seed)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self { gv, kappa, b_hash })
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
