//! Bit-exact matrix file format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   4 bytes   "ODNM"
//! version u32       1
//! n_rules u64
//! n_structures u64
//! rows    n_rules * ceil(n_structures / 64) u64 words, rule-ID order;
//!         bit j of a row lives in word j / 64 at position j % 64
//! checksum u64      XOR of all data words
//! ```
//!
//! The companion `rules.txt` (one canonical rule per line, line = rule ID)
//! defines what each row means.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{MatrixError, SemanticMatrix};
use crate::bits;

const MAGIC: &[u8; 4] = b"ODNM";
const VERSION: u32 = 1;

/// Words per io buffer; 64 KiB.
const BUFFER_WORDS: usize = 8192;

pub fn save_matrix(matrix: &SemanticMatrix, path: &Path) -> Result<(), MatrixError> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(matrix.n_rules as u64).to_le_bytes())?;
    out.write_all(&(matrix.n_structures as u64).to_le_bytes())?;
    let mut buffer = vec![0u8; BUFFER_WORDS * 8];
    for chunk in matrix.words.chunks(BUFFER_WORDS) {
        for (i, &w) in chunk.iter().enumerate() {
            buffer[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
        }
        out.write_all(&buffer[..chunk.len() * 8])?;
    }
    out.write_all(&matrix.checksum.to_le_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<SemanticMatrix, MatrixError> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(MatrixError::BadFile(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(MatrixError::BadFile(format!(
            "unsupported version {version}"
        )));
    }
    let n_rules = read_u64(&mut input)? as usize;
    let n_structures = read_u64(&mut input)? as usize;
    let words_per_row = bits::words_for(n_structures);
    let total_words = n_rules
        .checked_mul(words_per_row)
        .ok_or_else(|| MatrixError::BadFile("dimensions overflow".to_string()))?;

    let mut words: Vec<u64> = Vec::new();
    words
        .try_reserve_exact(total_words)
        .map_err(|_| MatrixError::OutOfMemory {
            rows: n_rules,
            words: words_per_row,
        })?;
    let mut buffer = vec![0u8; BUFFER_WORDS * 8];
    let mut remaining = total_words;
    let mut computed = 0u64;
    while remaining > 0 {
        let take = remaining.min(BUFFER_WORDS);
        input.read_exact(&mut buffer[..take * 8])?;
        for i in 0..take {
            let w = u64::from_le_bytes(buffer[i * 8..(i + 1) * 8].try_into().unwrap());
            computed ^= w;
            words.push(w);
        }
        remaining -= take;
    }
    let stored = read_u64(&mut input)?;
    if stored != computed {
        return Err(MatrixError::ChecksumMismatch { stored, computed });
    }
    let matrix = SemanticMatrix::from_words(n_rules, n_structures, words);
    debug_assert_eq!(matrix.checksum, stored);
    Ok(matrix)
}

fn read_u32(input: &mut impl Read) -> Result<u32, MatrixError> {
    let mut bytes = [0u8; 4];
    input.read_exact(&mut bytes)?;
    Ok(u32::from_le_bytes(bytes))
}

fn read_u64(input: &mut impl Read) -> Result<u64, MatrixError> {
    let mut bytes = [0u8; 8];
    input.read_exact(&mut bytes)?;
    Ok(u64::from_le_bytes(bytes))
}
