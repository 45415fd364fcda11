//! Raw complex-array files.
//!
//! Layout (little endian): the magic bytes `GPEF`, a `u32` format version,
//! a `u64` sample count `n`, then `n` pairs of `f64` (real, imaginary).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GPEF";
pub const VERSION: u32 = 1;

pub fn encode(data: &[Complex<f64>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(data.len() as u64).to_le_bytes());
    for c in data {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<Complex<f64>>> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::Numeric("not a GPEF file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Numeric(format!("unsupported GPEF version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if body.len() != n.checked_mul(16).ok_or_else(|| Error::Numeric("GPEF length overflow".into()))? {
        return Err(Error::Numeric(format!("GPEF body has {} bytes for {n} samples", body.len())));
    }
    Ok(body
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
            let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
            Complex::new(re, im)
        })
        .collect())
}

/// Write atomically (temporary file, then rename).
pub fn write(path: &Path, data: &[Complex<f64>]) -> Result<()> {
    let tmp = path.with_extension("gpef.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(data))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Vec<Complex<f64>>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let b = encode(&[Complex::new(1.0, -2.0)]);
        assert_eq!(&b[..4], b"GPEF");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(b[16..24].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(b[24..32].try_into().unwrap()), -2.0);
        assert!(decode(&b[..20]).is_err());
        assert!(decode(b"XXXX0000000000000000").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.gpef");
        let data: Vec<_> = (0..100).map(|i| Complex::new(i as f64, -(i as f64) / 3.0)).collect();
        write(&p, &data).unwrap();
        assert_eq!(read(&p).unwrap(), data);
    }

    proptest! {
        #[test]
        fn round_trip(v in proptest::collection::vec((-1e300f64..1e300, -1e300f64..1e300), 0..64)) {
            let data: Vec<_> = v.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
            prop_assert_eq!(decode(&encode(&data)).unwrap(), data);
        }
    }
}
