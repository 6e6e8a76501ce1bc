//! Spectrum and result documents.
//!
//! Text documents are JSON. A spectrum is either a table of Laurent
//! coefficients per entry or grid samples per entry; metadata `"form":
//! "factor"` marks a Laurent document holding a factor `A`, in which case the
//! spectrum is `A A*`. Large grids can be stored in a little-endian binary
//! format with a fixed header of eight `u64` fields:
//! `magic, version, N, d, G₁, G₂, G₃, G₄` (unused sizes are zero), followed by
//! `d²` row-major entries of interleaved `re, im` samples.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::driver::FactorizationReport;
use crate::error::{Error, Result};
use crate::harmonic::{GridFunction, LaurentMatrix, LaurentTable, MatrixFunction, MultiIndex};

pub const SCHEMA_VERSION: &str = "1.0";
pub const BINARY_MAGIC: u64 = u64::from_le_bytes(*b"NDSPEC\0\0");
pub const BINARY_VERSION: u64 = 1;
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Laurent,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub schema_version: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub representation: Representation,
    /// Laurent form: `entries[i][j]` lists the coefficients of entry `(i, j)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<Vec<Term>>>>,
    /// Grid form: per-axis sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// Grid form: `samples[i][j]` holds interleaved `re, im` values, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

impl SpectrumDocument {
    pub fn from_laurent(c: &LaurentMatrix) -> Self {
        let d = c.d();
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        c.entry(i, j)
                            .iter()
                            .map(|(k, v)| Term { k: k.as_slice().to_vec(), re: v.re, im: v.im })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        SpectrumDocument {
            schema_version: SCHEMA_VERSION.into(),
            n: c.dim(),
            d,
            representation: Representation::Laurent,
            entries: Some(entries),
            sizes: None,
            samples: None,
            metadata: Map::new(),
        }
    }

    pub fn from_grid(m: &MatrixFunction) -> Self {
        let d = m.d();
        let samples = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| m.entry(i, j).samples().iter().flat_map(|v| [v.re, v.im]).collect())
                    .collect()
            })
            .collect();
        SpectrumDocument {
            schema_version: SCHEMA_VERSION.into(),
            n: m.dim(),
            d,
            representation: Representation::Grid,
            entries: None,
            sizes: Some(m.sizes().to_vec()),
            samples: Some(samples),
            metadata: Map::new(),
        }
    }

    pub fn is_factor_form(&self) -> bool {
        self.metadata.get("form").and_then(Value::as_str) == Some("factor")
    }

    /// Coefficient form of a Laurent document, exactly as stored.
    pub fn laurent(&self) -> Result<LaurentMatrix> {
        if self.representation != Representation::Laurent {
            return Err(Error::Parse("document is not in Laurent form".into()));
        }
        let d = self.d;
        if d == 0 {
            return Err(Error::Parse("matrix size d must be positive".into()));
        }
        let rows = self.entries.as_deref().unwrap_or(&[]);
        let mut tables = vec![LaurentTable::new(self.n); d * d];
        if !rows.is_empty() {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Parse(format!("entries must form a {d}×{d} array")));
            }
            for (i, row) in rows.iter().enumerate() {
                for (j, terms) in row.iter().enumerate() {
                    for t in terms {
                        if t.k.len() != self.n {
                            return Err(Error::Parse(format!(
                                "entry ({i},{j}) has an index of length {} in an N = {} document",
                                t.k.len(),
                                self.n
                            )));
                        }
                        if !t.re.is_finite() || !t.im.is_finite() {
                            return Err(Error::Parse(format!("entry ({i},{j}) has a non-finite coefficient")));
                        }
                        tables[i * d + j].add_term(MultiIndex::new(t.k.clone()), Complex64::new(t.re, t.im));
                    }
                }
            }
        }
        LaurentMatrix::new(d, tables)
    }

    /// Grid form of a grid document.
    pub fn grid(&self) -> Result<MatrixFunction> {
        if self.representation != Representation::Grid {
            return Err(Error::Parse("document is not in grid form".into()));
        }
        let sizes = self.sizes.clone().ok_or_else(|| Error::Parse("grid document without sizes".into()))?;
        if sizes.len() != self.n {
            return Err(Error::Parse(format!("{} sizes for N = {}", sizes.len(), self.n)));
        }
        let total: usize = sizes.iter().product();
        let d = self.d;
        let rows = self.samples.as_deref().unwrap_or(&[]);
        if rows.is_empty() {
            return Ok(MatrixFunction::new(d, vec![GridFunction::zeros(&sizes); d * d])?);
        }
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Parse(format!("samples must form a {d}×{d} array")));
        }
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            for flat in row {
                if flat.len() != 2 * total {
                    return Err(Error::Parse(format!("expected {} interleaved values, found {}", 2 * total, flat.len())));
                }
                let v = flat.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
                entries.push(GridFunction::new(sizes.clone(), v)?);
            }
        }
        MatrixFunction::new(d, entries)
    }
}

/// Provenance of a result document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub orders: Vec<usize>,
    pub grid: Vec<usize>,
    pub axis_order: Vec<usize>,
    pub tool_version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultDocument {
    pub factor: SpectrumDocument,
    pub report: FactorizationReport,
    pub provenance: Provenance,
}

/// A loaded spectrum: grid samples plus the exact coefficients when known.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub grid: MatrixFunction,
    /// Coefficients of `S` for Laurent documents.
    pub laurent: Option<LaurentMatrix>,
    /// Coefficients of the stored factor for factor-form documents.
    pub factor: Option<LaurentMatrix>,
    pub metadata: Map<String, Value>,
}

/// Smallest power-of-two grid that holds a table of the given degrees.
pub fn minimal_grid(degrees: &[usize]) -> Vec<usize> {
    degrees.iter().map(|&k| (2 * k + 2).next_power_of_two()).collect()
}

fn check_hermitian_laurent(c: &LaurentMatrix) -> Result<()> {
    let defect = c.hermitian_defect();
    if defect > HERMITIAN_TOL * c.max_abs().max(1.0) {
        return Err(Error::Symmetry(format!("coefficient defect {defect:.3e}")));
    }
    Ok(())
}

fn check_hermitian_grid(m: &MatrixFunction) -> Result<()> {
    let scale = m.entries().iter().map(|e| e.max_abs()).fold(1.0, f64::max);
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::Symmetry(format!("sample defect {defect:.3e}")));
    }
    Ok(())
}

fn parse_document(bytes: &[u8]) -> Result<SpectrumDocument> {
    let doc: SpectrumDocument = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.n == 0 {
        return Err(Error::Parse("dimension N must be positive".into()));
    }
    Ok(doc)
}

/// Converts a document into a spectrum, validating Hermitian symmetry.
pub fn spectrum_from_document(doc: &SpectrumDocument, sizes: Option<&[usize]>) -> Result<Spectrum> {
    match doc.representation {
        Representation::Laurent => {
            let stored = doc.laurent()?;
            let (s, factor) = if doc.is_factor_form() {
                (stored.mul(&stored.adjoint()), Some(stored))
            } else {
                (stored, None)
            };
            check_hermitian_laurent(&s)?;
            let sizes = match sizes {
                Some(g) => g.to_vec(),
                None => minimal_grid(&s.degrees()),
            };
            if sizes.len() != doc.n {
                return Err(Error::Shape(format!("{} grid sizes for N = {}", sizes.len(), doc.n)));
            }
            let grid = MatrixFunction::evaluate(&s, &sizes)?;
            Ok(Spectrum { grid, laurent: Some(s), factor, metadata: doc.metadata.clone() })
        }
        Representation::Grid => {
            let grid = doc.grid()?;
            if let Some(g) = sizes {
                if g != grid.sizes() {
                    return Err(Error::Shape(format!("requested grid {g:?} but the document holds {:?}", grid.sizes())));
                }
            }
            let grid = if doc.is_factor_form() { grid.gram() } else { grid };
            check_hermitian_grid(&grid)?;
            Ok(Spectrum { grid, laurent: None, factor: None, metadata: doc.metadata.clone() })
        }
    }
}

/// Loads a spectrum from a JSON or binary document.
pub fn load_spectrum(path: impl AsRef<Path>, sizes: Option<&[usize]>) -> Result<Spectrum> {
    let bytes = fs::read(path)?;
    if is_binary(&bytes) {
        let grid = decode_binary(&bytes)?;
        if let Some(g) = sizes {
            if g != grid.sizes() {
                return Err(Error::Shape(format!("requested grid {g:?} but the file holds {:?}", grid.sizes())));
            }
        }
        check_hermitian_grid(&grid)?;
        return Ok(Spectrum { grid, laurent: None, factor: None, metadata: Map::new() });
    }
    spectrum_from_document(&parse_document(&bytes)?, sizes)
}

/// Loads a candidate factor (no symmetry requirement). Result documents are
/// accepted and their `factor` payload is used.
pub fn load_factor(path: impl AsRef<Path>, sizes: Option<&[usize]>) -> Result<MatrixFunction> {
    let bytes = fs::read(path)?;
    if is_binary(&bytes) {
        return decode_binary(&bytes);
    }
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let doc_value = match value.get("factor") {
        Some(f) if value.get("report").is_some() => f.clone(),
        _ => value,
    };
    let doc: SpectrumDocument = serde_json::from_value(doc_value).map_err(|e| Error::Parse(e.to_string()))?;
    match doc.representation {
        Representation::Laurent => {
            let c = doc.laurent()?;
            let sizes = match sizes {
                Some(g) => g.to_vec(),
                None => minimal_grid(&c.degrees()),
            };
            MatrixFunction::evaluate(&c, &sizes)
        }
        Representation::Grid => {
            let grid = doc.grid()?;
            match sizes {
                Some(g) if g != grid.sizes() => {
                    Err(Error::Shape(format!("requested grid {g:?} but the document holds {:?}", grid.sizes())))
                }
                _ => Ok(grid),
            }
        }
    }
}

pub fn save_document(path: impl AsRef<Path>, doc: &SpectrumDocument) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn save_result(path: impl AsRef<Path>, doc: &ResultDocument) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn is_binary(bytes: &[u8]) -> bool {
    bytes.len() >= 8 && u64::from_le_bytes(bytes[..8].try_into().unwrap()) == BINARY_MAGIC
}

pub fn encode_binary(m: &MatrixFunction) -> Result<Vec<u8>> {
    if m.dim() > 4 {
        return Err(Error::Shape("binary grids hold at most four variables".into()));
    }
    let mut header = [0u64; 8];
    header[0] = BINARY_MAGIC;
    header[1] = BINARY_VERSION;
    header[2] = m.dim() as u64;
    header[3] = m.d() as u64;
    for (h, &g) in header[4..].iter_mut().zip(m.sizes()) {
        *h = g as u64;
    }
    let mut out = Vec::with_capacity(64 + m.d() * m.d() * m.len() * 16);
    for h in header {
        out.extend_from_slice(&h.to_le_bytes());
    }
    for e in m.entries() {
        for v in e.samples() {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8]) -> Result<MatrixFunction> {
    if bytes.len() < 64 || !is_binary(bytes) {
        return Err(Error::Parse("missing binary grid header".into()));
    }
    let field = |i: usize| u64::from_le_bytes(bytes[i * 8..i * 8 + 8].try_into().unwrap());
    if field(1) != BINARY_VERSION {
        return Err(Error::Parse(format!("unsupported binary version {}", field(1))));
    }
    let (n, d) = (field(2) as usize, field(3) as usize);
    if n == 0 || n > 4 || d == 0 {
        return Err(Error::Parse(format!("invalid header: N = {n}, d = {d}")));
    }
    let sizes: Vec<usize> = (0..n).map(|i| field(4 + i) as usize).collect();
    let total: usize = sizes.iter().product();
    let body = &bytes[64..];
    if body.len() != d * d * total * 16 {
        return Err(Error::Parse(format!("expected {} payload bytes, found {}", d * d * total * 16, body.len())));
    }
    let values: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let entries = values
        .chunks(total)
        .map(|chunk| GridFunction::new(sizes.clone(), chunk.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    MatrixFunction::new(d, entries)
}

pub fn save_binary(path: impl AsRef<Path>, m: &MatrixFunction) -> Result<()> {
    fs::write(path, encode_binary(m)?)?;
    Ok(())
}
