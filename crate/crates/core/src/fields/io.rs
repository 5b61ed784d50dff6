//! Field files.
//!
//! A file is one line of JSON header followed by the payload:
//!
//! ```text
//! {"version":1,"kind":"sampled","n":1,"m":0,"grid":{"r_max":12.0,"radial":[96],"angular":[256]},
//!  "center":null,"metadata":"…","extension":"zero","encoding":"binary","count":24576}\n
//! <count × (re: f64 LE, im: f64 LE)>
//! ```
//!
//! With `"encoding":"base64"` the payload is the same byte string in
//! standard base64 on a single line. Values follow the in-memory row-major
//! order; periodic fields put the centre index slowest. Radial nodes are
//! not stored: they are the Gauss–Legendre nodes for the declared counts.

use super::{Extension, GridSpec, PeriodicField, PolarGrid, SampledField};
use crate::error::{Error, Result};
use crate::C64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Binary,
    Base64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Sampled,
    Periodic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    version: u64,
    kind: Kind,
    n: usize,
    m: usize,
    grid: GridSpec,
    center: Option<Vec<usize>>,
    metadata: String,
    #[serde(default)]
    extension: Extension,
    encoding: Encoding,
    count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Sampled(SampledField),
    Periodic(PeriodicField),
}

impl AnyField {
    pub fn into_sampled(self) -> Result<SampledField> {
        match self {
            AnyField::Sampled(f) => Ok(f),
            AnyField::Periodic(_) => Err(Error::InvalidArgument("expected a field on ℂⁿ, found a periodic field".into())),
        }
    }

    pub fn into_periodic(self) -> Result<PeriodicField> {
        match self {
            AnyField::Periodic(f) => Ok(f),
            AnyField::Sampled(_) => Err(Error::InvalidArgument("expected a periodic field".into())),
        }
    }
}

fn encode(header: &Header, values: &[C64]) -> Vec<u8> {
    let mut out = serde_json::to_vec(header).expect("header serializes");
    out.push(b'\n');
    let mut raw = Vec::with_capacity(values.len() * 16);
    for v in values {
        raw.extend_from_slice(&v.re.to_le_bytes());
        raw.extend_from_slice(&v.im.to_le_bytes());
    }
    match header.encoding {
        Encoding::Binary => out.extend_from_slice(&raw),
        Encoding::Base64 => {
            out.extend_from_slice(base64::engine::general_purpose::STANDARD.encode(&raw).as_bytes());
            out.push(b'\n');
        }
    }
    out
}

pub fn sampled_to_bytes(f: &SampledField, encoding: Encoding) -> Vec<u8> {
    let header = Header {
        version: FORMAT_VERSION,
        kind: Kind::Sampled,
        n: f.grid.n,
        m: 0,
        grid: f.grid.spec(),
        center: None,
        metadata: f.metadata.clone(),
        extension: f.extension,
        encoding,
        count: f.values.len(),
    };
    encode(&header, &f.values)
}

pub fn periodic_to_bytes(f: &PeriodicField, encoding: Encoding) -> Vec<u8> {
    let header = Header {
        version: FORMAT_VERSION,
        kind: Kind::Periodic,
        n: f.grid.n,
        m: f.m,
        grid: f.grid.spec(),
        center: Some(f.t_samples.clone()),
        metadata: f.metadata.clone(),
        extension: Extension::Zero,
        encoding,
        count: f.values.len(),
    };
    encode(&header, &f.values)
}

fn malformed(offset: usize, reason: impl Into<String>) -> Error {
    Error::MalformedFile {
        offset,
        reason: reason.into(),
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<AnyField> {
    let end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| malformed(bytes.len(), "missing header line"))?;
    let head = &bytes[..end];
    let value: serde_json::Value =
        serde_json::from_slice(head).map_err(|e| malformed(e.column().saturating_sub(1), format!("header: {e}")))?;
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(FORMAT_VERSION) => {}
        Some(found) => return Err(Error::VersionMismatch { found }),
        None => return Err(malformed(0, "header has no version")),
    }
    let header: Header = serde_json::from_value(value).map_err(|e| malformed(0, format!("header: {e}")))?;
    let grid = PolarGrid::from_spec(&header.grid).map_err(|e| malformed(0, format!("grid: {e}")))?;
    if grid.n != header.n {
        return Err(malformed(0, format!("n = {} but grid has {} coordinates", header.n, grid.n)));
    }
    let centre: usize = match (&header.kind, &header.center) {
        (Kind::Sampled, _) => 1,
        (Kind::Periodic, Some(t)) if t.len() == header.m => t.iter().product(),
        (Kind::Periodic, _) => return Err(malformed(0, "periodic field without a matching centre grid")),
    };
    let expected = grid.len() * centre;
    let start = end + 1;
    if header.count != expected {
        return Err(malformed(
            start,
            format!("declared count {} does not match the grid ({expected})", header.count),
        ));
    }
    let decoded;
    let raw: &[u8] = match header.encoding {
        Encoding::Binary => &bytes[start..],
        Encoding::Base64 => {
            let text = bytes[start..].trim_ascii_end();
            decoded = base64::engine::general_purpose::STANDARD
                .decode(text)
                .map_err(|e| malformed(start, format!("base64: {e}")))?;
            &decoded
        }
    };
    let need = header.count * 16;
    if raw.len() < need {
        return Err(malformed(start + raw.len(), format!("truncated payload: {} of {need} bytes", raw.len())));
    }
    if raw.len() > need {
        return Err(malformed(start + need, "trailing bytes after payload"));
    }
    let values: Vec<C64> = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    match header.kind {
        Kind::Sampled => Ok(AnyField::Sampled(
            SampledField::from_values(grid, values, header.metadata)?.with_extension(header.extension),
        )),
        Kind::Periodic => Ok(AnyField::Periodic(PeriodicField::new(
            grid,
            header.center.unwrap_or_default(),
            values,
            header.metadata,
        )?)),
    }
}

pub fn write_field(f: &SampledField, path: impl AsRef<Path>, encoding: Encoding) -> Result<()> {
    std::fs::write(path, sampled_to_bytes(f, encoding))?;
    Ok(())
}

pub fn write_periodic(f: &PeriodicField, path: impl AsRef<Path>, encoding: Encoding) -> Result<()> {
    std::fs::write(path, periodic_to_bytes(f, encoding))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<AnyField> {
    from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sample;

    fn field() -> SampledField {
        let g = PolarGrid::uniform(1, 6, 8, 3.0).unwrap();
        sample(|z| C64::new(z[0].re.sin(), z[0].im * 1e-300), &g).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let f = field();
        for enc in [Encoding::Binary, Encoding::Base64] {
            let back = from_bytes(&sampled_to_bytes(&f, enc)).unwrap().into_sampled().unwrap();
            assert_eq!(back, f);
            assert!(back.values.iter().zip(&f.values).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        }
        let g = PolarGrid::uniform(1, 3, 4, 1.0).unwrap();
        let p = PeriodicField::sample(|z, t| C64::new(z[0].re, t[0]), &g, &[4]).unwrap();
        let back = from_bytes(&periodic_to_bytes(&p, Encoding::Base64)).unwrap().into_periodic().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.field");
        let f = field();
        write_field(&f, &path, Encoding::Binary).unwrap();
        assert_eq!(read_field(&path).unwrap(), AnyField::Sampled(f));
    }

    #[test]
    fn truncated_file() {
        let bytes = sampled_to_bytes(&field(), Encoding::Binary);
        let cut = &bytes[..bytes.len() - 5];
        assert!(matches!(from_bytes(cut), Err(Error::MalformedFile { .. })));
        let head_only = &bytes[..20];
        assert!(matches!(from_bytes(head_only), Err(Error::MalformedFile { .. })));
    }

    #[test]
    fn mismatched_count() {
        let bytes = sampled_to_bytes(&field(), Encoding::Binary);
        let text = String::from_utf8_lossy(&bytes[..bytes.iter().position(|&b| b == b'\n').unwrap()]).to_string();
        let bad = text.replace("\"count\":48", "\"count\":47");
        let mut out = bad.into_bytes();
        out.extend_from_slice(&bytes[bytes.iter().position(|&b| b == b'\n').unwrap()..]);
        assert!(matches!(from_bytes(&out), Err(Error::MalformedFile { .. })));
    }

    #[test]
    fn version_mismatch() {
        let bytes = sampled_to_bytes(&field(), Encoding::Binary);
        let s = String::from_utf8_lossy(&bytes).replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(from_bytes(s.as_bytes()), Err(Error::VersionMismatch { found: 2 })));
    }
}
