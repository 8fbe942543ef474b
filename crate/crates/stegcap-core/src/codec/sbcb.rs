//! Versioned binary container for stacked codebooks, plus a JSON debug
//! dump. Exact-equivalence tests compare codebooks byte for byte, so the
//! layout is fully deterministic: little-endian fixed-width integers,
//! length-prefixed JSON parameter block, arrays in stored order.

use super::stacked::{StackedCodebook, TypeArray};
use super::{CodecError, CodecParams};
use crate::typestat::Sequence;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"SBCB";
const VERSION: u16 = 1;

fn write_u16(w: &mut impl Write, v: u16) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64(w: &mut impl Write, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_exact<const K: usize>(r: &mut impl Read) -> std::io::Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u16(r: &mut impl Read) -> std::io::Result<u16> {
    Ok(u16::from_le_bytes(read_exact::<2>(r)?))
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    Ok(u32::from_le_bytes(read_exact::<4>(r)?))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    Ok(u64::from_le_bytes(read_exact::<8>(r)?))
}

fn read_f64(r: &mut impl Read) -> std::io::Result<f64> {
    Ok(f64::from_le_bytes(read_exact::<8>(r)?))
}

/// Serializes a codebook. The layout after the magic and version is the
/// JSON parameter block (u32 length prefix), the array count (u32), then
/// per array: type counts, rho, the optimized mutual information, the
/// auxiliary type, the per-covertext-symbol rows, the per-pair stegotext
/// rows, the row and column counts, and the codeword symbols packed one
/// byte per symbol in row-major order.
pub fn write_codebook(cb: &StackedCodebook, w: &mut impl Write) -> Result<(), CodecError> {
    let params = cb.params();
    let q = params.alphabet_size();
    let l = params.l;
    w.write_all(MAGIC)?;
    write_u16(w, VERSION)?;
    let params_json = serde_json::to_vec(params)
        .map_err(|e| CodecError::Format(format!("parameter encoding failed: {e}")))?;
    write_u32(w, params_json.len() as u32)?;
    w.write_all(&params_json)?;
    write_u32(w, cb.arrays().len() as u32)?;
    for array in cb.arrays() {
        for &c in array.type_counts() {
            write_u64(w, c)?;
        }
        write_f64(w, array.rho())?;
        write_f64(w, array.i_us())?;
        for &c in array.u_type() {
            write_u64(w, c)?;
        }
        for s in 0..q {
            for u in 0..l {
                write_u64(w, array.us_rows[s][u])?;
            }
        }
        for pair in 0..q * l {
            for x in 0..q {
                write_u64(w, array.xus_rows[pair][x])?;
            }
        }
        write_u64(w, array.rows() as u64)?;
        write_u64(w, array.cols() as u64)?;
        for row in 0..array.rows() {
            for col in 0..array.cols() {
                w.write_all(array.codeword(row, col).symbols())?;
            }
        }
    }
    Ok(())
}

/// Reads a codebook written by `write_codebook`, validating the magic,
/// version, and parameter block before touching array data.
pub fn read_codebook(r: &mut impl Read) -> Result<StackedCodebook, CodecError> {
    let magic = read_exact::<4>(r)?;
    if &magic != MAGIC {
        return Err(CodecError::Format("bad magic bytes".into()));
    }
    let version = read_u16(r)?;
    if version != VERSION {
        return Err(CodecError::Format(format!(
            "unsupported container version {version}"
        )));
    }
    let params_len = read_u32(r)? as usize;
    let mut params_buf = vec![0u8; params_len];
    r.read_exact(&mut params_buf)?;
    let params: CodecParams = serde_json::from_slice(&params_buf)
        .map_err(|e| CodecError::Format(format!("parameter decoding failed: {e}")))?;
    params.validate()?;
    let q = params.alphabet_size();
    let l = params.l;
    let n = params.n;

    let array_count = read_u32(r)? as usize;
    let mut arrays = Vec::with_capacity(array_count);
    for _ in 0..array_count {
        let mut type_counts = vec![0u64; q];
        for c in type_counts.iter_mut() {
            *c = read_u64(r)?;
        }
        if type_counts.iter().sum::<u64>() != n as u64 {
            return Err(CodecError::Format(format!(
                "type counts {type_counts:?} do not sum to the block length {n}"
            )));
        }
        let rho = read_f64(r)?;
        let i_us = read_f64(r)?;
        let mut u_type = vec![0u64; l];
        for c in u_type.iter_mut() {
            *c = read_u64(r)?;
        }
        let mut us_rows = vec![vec![0u64; l]; q];
        for row in us_rows.iter_mut() {
            for c in row.iter_mut() {
                *c = read_u64(r)?;
            }
        }
        let mut xus_rows = vec![vec![0u64; q]; q * l];
        for row in xus_rows.iter_mut() {
            for c in row.iter_mut() {
                *c = read_u64(r)?;
            }
        }
        let rows = read_u64(r)? as usize;
        let cols = read_u64(r)? as usize;
        let mut codewords = Vec::with_capacity(rows * cols);
        let mut buf = vec![0u8; n];
        for _ in 0..rows * cols {
            r.read_exact(&mut buf)?;
            codewords.push(Sequence::new(buf.clone(), l)?);
        }
        arrays.push(TypeArray {
            type_counts,
            rho,
            i_us,
            u_type,
            us_rows,
            xus_rows,
            rows,
            cols,
            codewords,
        });
    }
    Ok(StackedCodebook::assemble(params, arrays))
}

/// Human-readable dump of the whole codebook for inspection and diffing.
pub fn codebook_debug_json(cb: &StackedCodebook) -> serde_json::Value {
    let arrays: Vec<serde_json::Value> = cb
        .arrays()
        .iter()
        .map(|a| {
            let codewords: Vec<String> = a
                .codewords
                .iter()
                .map(|u| u.symbols().iter().map(|s| s.to_string()).collect())
                .collect();
            serde_json::json!({
                "type_counts": a.type_counts(),
                "rho": a.rho(),
                "i_us": a.i_us(),
                "u_type": a.u_type(),
                "us_rows": a.us_rows,
                "xus_rows": a.xus_rows,
                "rows": a.rows(),
                "cols": a.cols(),
                "codewords": codewords,
            })
        })
        .collect();
    serde_json::json!({
        "params": cb.params(),
        "arrays": arrays,
    })
}
