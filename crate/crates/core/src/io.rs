//! Table file formats.
//!
//! Text form: `{"p": int, "n": int, "values": [[re, im], ...]}` in index order
//! (field-valued tables carry plain integer residues instead of pairs).
//!
//! Binary form: an 8-byte magic, little-endian u64 p, u64 n, then p^n values.
//! Complex tables use magic `GFTBL\0\0\x01` and f64 (re, im) pairs; field tables
//! use `GFFLD\0\0\x01` and one u8 residue per point.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Space;
use crate::table::{FieldTable, FunctionTable};

pub const TABLE_MAGIC: [u8; 8] = *b"GFTBL\0\0\x01";
pub const FIELD_MAGIC: [u8; 8] = *b"GFFLD\0\0\x01";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Json,
    Binary,
}

impl Encoding {
    /// `.gftbl` and `.bin` select binary; anything else is JSON.
    pub fn from_path(path: &Path) -> Encoding {
        match path.extension().and_then(|e| e.to_str()) {
            Some("gftbl") | Some("gffld") | Some("bin") => Encoding::Binary,
            _ => Encoding::Json,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TableDocument {
    pub p: u32,
    pub n: usize,
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldTableDocument {
    pub p: u32,
    pub n: usize,
    pub values: Vec<u32>,
}

impl From<&FunctionTable> for TableDocument {
    fn from(t: &FunctionTable) -> Self {
        TableDocument {
            p: t.space().p(),
            n: t.space().n(),
            values: t.values().iter().map(|v| [v.re, v.im]).collect(),
        }
    }
}

impl TryFrom<TableDocument> for FunctionTable {
    type Error = Error;

    fn try_from(doc: TableDocument) -> Result<Self> {
        let space = Space::of(doc.p, doc.n)?;
        FunctionTable::new(
            space,
            doc.values
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<&FieldTable> for FieldTableDocument {
    fn from(t: &FieldTable) -> Self {
        FieldTableDocument {
            p: t.space().p(),
            n: t.space().n(),
            values: t.values().to_vec(),
        }
    }
}

impl TryFrom<FieldTableDocument> for FieldTable {
    type Error = Error;

    fn try_from(doc: FieldTableDocument) -> Result<Self> {
        FieldTable::new(Space::of(doc.p, doc.n)?, doc.values)
    }
}

pub fn table_to_json(t: &FunctionTable) -> String {
    serde_json::to_string(&TableDocument::from(t)).expect("finite floats serialize")
}

pub fn table_from_json(s: &str) -> Result<FunctionTable> {
    let doc: TableDocument = serde_json::from_str(s)?;
    doc.try_into()
}

pub fn field_table_to_json(t: &FieldTable) -> String {
    serde_json::to_string(&FieldTableDocument::from(t)).expect("integers serialize")
}

pub fn field_table_from_json(s: &str) -> Result<FieldTable> {
    let doc: FieldTableDocument = serde_json::from_str(s)?;
    doc.try_into()
}

fn header(magic: &[u8; 8], space: Space) -> Vec<u8> {
    let mut out = Vec::with_capacity(24);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(space.p() as u64).to_le_bytes());
    out.extend_from_slice(&(space.n() as u64).to_le_bytes());
    out
}

fn read_header(bytes: &[u8], magic: &[u8; 8]) -> Result<Space> {
    if bytes.len() < 24 {
        return Err(Error::Format("file shorter than the 24-byte header".into()));
    }
    if &bytes[..8] != magic {
        return Err(Error::Format("bad magic".into()));
    }
    let p = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let n = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let p = u32::try_from(p).map_err(|_| Error::Format(format!("p = {p} too large")))?;
    let n = usize::try_from(n).map_err(|_| Error::Format(format!("n = {n} too large")))?;
    Space::of(p, n)
}

pub fn table_to_bytes(t: &FunctionTable) -> Vec<u8> {
    let mut out = header(&TABLE_MAGIC, t.space());
    out.reserve(16 * t.len());
    for v in t.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn table_from_bytes(bytes: &[u8]) -> Result<FunctionTable> {
    let space = read_header(bytes, &TABLE_MAGIC)?;
    let body = &bytes[24..];
    if body.len() != 16 * space.size() {
        return Err(Error::Format(format!(
            "expected {} value bytes, found {}",
            16 * space.size(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    FunctionTable::new(space, values)
}

pub fn field_table_to_bytes(t: &FieldTable) -> Result<Vec<u8>> {
    if t.space().p() > 256 {
        return Err(Error::Format(
            "binary field tables store u8 residues; p must be at most 256".into(),
        ));
    }
    let mut out = header(&FIELD_MAGIC, t.space());
    out.extend(t.values().iter().map(|&v| v as u8));
    Ok(out)
}

pub fn field_table_from_bytes(bytes: &[u8]) -> Result<FieldTable> {
    let space = read_header(bytes, &FIELD_MAGIC)?;
    let body = &bytes[24..];
    if body.len() != space.size() {
        return Err(Error::Format(format!(
            "expected {} residue bytes, found {}",
            space.size(),
            body.len()
        )));
    }
    FieldTable::new(space, body.iter().map(|&b| b as u32).collect())
}

/// Read a complex table, detecting the binary form by its magic.
pub fn read_table(path: &Path) -> Result<FunctionTable> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(&TABLE_MAGIC) {
        table_from_bytes(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Format("neither binary table nor UTF-8 text".into()))?;
        table_from_json(&text)
    }
}

pub fn write_table(path: &Path, t: &FunctionTable, encoding: Encoding) -> Result<()> {
    match encoding {
        Encoding::Json => fs::write(path, table_to_json(t))?,
        Encoding::Binary => fs::write(path, table_to_bytes(t))?,
    }
    Ok(())
}

pub fn read_field_table(path: &Path) -> Result<FieldTable> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(&FIELD_MAGIC) {
        field_table_from_bytes(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Format("neither binary table nor UTF-8 text".into()))?;
        field_table_from_json(&text)
    }
}

pub fn write_field_table(path: &Path, t: &FieldTable, encoding: Encoding) -> Result<()> {
    match encoding {
        Encoding::Json => fs::write(path, field_table_to_json(t))?,
        Encoding::Binary => fs::write(path, field_table_to_bytes(t)?)?,
    }
    Ok(())
}
