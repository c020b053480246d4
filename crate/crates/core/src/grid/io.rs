//! Flat binary and CSV forms of grid functions.
//!
//! Binary layout, little-endian: magic `MPSHGRD1`, `n` as u32, then for each
//! of the `2n` axes `lo` and `hi` as f64, then `h` as f64; then the node
//! values in storage order as f64 (`NaN` where undefined), then the validity
//! bitmask, least significant bit first, padded to a whole byte.
//! Exclusions are not stored; the mask carries their effect.

use std::io::{Read, Write};

use super::domain::GridDomain;
use super::function::GridFunction;
use crate::error::{LabError, Result};

const MAGIC: &[u8; 8] = b"MPSHGRD1";

/// Largest grid written as CSV.
pub const CSV_NODE_LIMIT: usize = 1_000_000;

pub fn write_binary(f: &GridFunction, mut w: impl Write) -> Result<()> {
    let d = f.domain();
    w.write_all(MAGIC)?;
    w.write_all(&(d.n() as u32).to_le_bytes())?;
    for axis in 0..d.dims() {
        w.write_all(&d.lo()[axis].to_le_bytes())?;
        w.write_all(&d.hi()[axis].to_le_bytes())?;
    }
    w.write_all(&d.h().to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * d.len());
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    let mut bits = vec![0u8; d.len().div_ceil(8)];
    for (i, &ok) in f.valid().iter().enumerate() {
        if ok {
            bits[i / 8] |= 1 << (i % 8);
        }
    }
    w.write_all(&bits)?;
    Ok(())
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary(mut r: impl Read) -> Result<GridFunction> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(LabError::Io("not a grid function file".into()));
    }
    let mut nb = [0u8; 4];
    r.read_exact(&mut nb)?;
    let n = u32::from_le_bytes(nb) as usize;
    if n != 1 && n != 2 {
        return Err(LabError::UnsupportedDimension(n));
    }
    let mut bounds = Vec::new();
    for _ in 0..2 * n {
        let lo = read_f64(&mut r)?;
        let hi = read_f64(&mut r)?;
        bounds.push([lo, hi]);
    }
    let h = read_f64(&mut r)?;
    let d = GridDomain::new(n, &bounds, h, Vec::new())?;
    let mut buf = vec![0u8; 8 * d.len()];
    r.read_exact(&mut buf)?;
    let values = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let mut bits = vec![0u8; d.len().div_ceil(8)];
    r.read_exact(&mut bits)?;
    let valid = (0..d.len()).map(|i| bits[i / 8] >> (i % 8) & 1 == 1).collect();
    GridFunction::with_mask(d, values, valid)
}

/// One row per node: coordinates, value, validity flag.
pub fn write_csv(f: &GridFunction, w: impl Write) -> Result<()> {
    let d = f.domain();
    if d.len() > CSV_NODE_LIMIT {
        return Err(LabError::InvalidParameter(format!("{} nodes exceed the CSV limit of {CSV_NODE_LIMIT}", d.len())));
    }
    let names = ["x1", "y1", "x2", "y2"];
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = names[..d.dims()].to_vec();
    header.extend(["value", "valid"]);
    out.write_record(&header).map_err(|e| LabError::Io(e.to_string()))?;
    for i in 0..d.len() {
        let x = d.coords(i);
        let mut rec: Vec<String> = x[..d.dims()].iter().map(|v| v.to_string()).collect();
        rec.push(f.value(i).to_string());
        rec.push((f.valid()[i] as u8).to_string());
        out.write_record(&rec).map_err(|e| LabError::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::PshSpec;
    use crate::grid::sample;

    #[test]
    fn binary_round_trip() {
        let g = GridDomain::cube(1, -1.0, 1.0, 0.25, vec![]).unwrap();
        let f = sample(&PshSpec::parse("log(z1)").unwrap(), &g).unwrap();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!(back.valid(), f.valid());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = GridDomain::cube(1, 0.0, 1.0, 0.25, vec![]).unwrap();
        let f = sample(&PshSpec::parse("abs2(z1)").unwrap(), &g).unwrap();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x1,y1,value,valid\n"));
        assert_eq!(text.lines().count(), 26);
    }
}
