//! `JSRB` binary matrices.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "JSRB"
//!      4     2  version (1)
//!      6     1  flags (bit 0: complex)
//!      7     8  rows
//!     15     8  cols
//!     23     -  row-major f64 entries; complex entries as (re, im)
//! ```
//!
//! All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Matrix;
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"JSRB";
pub const VERSION: u16 = 1;
pub const FLAG_COMPLEX: u8 = 1;
pub const HEADER_LEN: usize = 23;

/// Entry types that can be stored in a matrix file.
pub trait FileScalar: Scalar {
    const COMPLEX: bool;
    fn put(self, out: &mut Vec<u8>);
    fn take(bytes: &[u8]) -> Self;
    /// `None` when `Self` cannot hold a complex value.
    fn from_complex(z: Complex64) -> Option<Self>;
}

impl FileScalar for f64 {
    const COMPLEX: bool = false;

    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn take(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
    }

    fn from_complex(_: Complex64) -> Option<Self> {
        None
    }
}

impl FileScalar for Complex64 {
    const COMPLEX: bool = true;

    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.re.to_le_bytes());
        out.extend_from_slice(&self.im.to_le_bytes());
    }

    fn take(bytes: &[u8]) -> Self {
        Complex64::new(f64::take(&bytes[..8]), f64::take(&bytes[8..16]))
    }

    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }
}

fn entry_size(complex: bool) -> usize {
    if complex {
        16
    } else {
        8
    }
}

/// A matrix read from disk, real or complex per the header flag.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Real(Matrix<f64>),
    Complex(Matrix<Complex64>),
}

impl AnyMatrix {
    pub fn is_complex(&self) -> bool {
        matches!(self, AnyMatrix::Complex(_))
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Real(m) => m.shape(),
            AnyMatrix::Complex(m) => m.shape(),
        }
    }

    /// Real matrices widen to complex; complex matrices do not narrow.
    pub fn into_complex(self) -> Matrix<Complex64> {
        match self {
            AnyMatrix::Complex(m) => m,
            AnyMatrix::Real(m) => {
                let (r, c) = m.shape();
                let data = m.into_vec().into_iter().map(Complex64::from_real).collect();
                Matrix::new(r, c, data).expect("shape preserved")
            }
        }
    }
}

impl From<Matrix<f64>> for AnyMatrix {
    fn from(m: Matrix<f64>) -> Self {
        AnyMatrix::Real(m)
    }
}

impl From<Matrix<Complex64>> for AnyMatrix {
    fn from(m: Matrix<Complex64>) -> Self {
        AnyMatrix::Complex(m)
    }
}

pub fn encode<T: FileScalar>(matrix: &Matrix<T>) -> Vec<u8> {
    let (rows, cols) = matrix.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + rows * cols * entry_size(T::COMPLEX));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(if T::COMPLEX { FLAG_COMPLEX } else { 0 });
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for &x in matrix.as_slice() {
        x.put(&mut out);
    }
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

pub fn decode(bytes: &[u8]) -> Result<AnyMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(
            bytes.len(),
            format!("truncated header: expected {HEADER_LEN} bytes, found {}", bytes.len()),
        ));
    }
    if bytes[..4] != MAGIC {
        return Err(format_err(0, format!("bad magic {:?}", &bytes[..4])));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let flags = bytes[6];
    if flags & !FLAG_COMPLEX != 0 {
        return Err(format_err(6, format!("unknown flag bits {flags:#04x}")));
    }
    let rows = u64::from_le_bytes(bytes[7..15].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[15..23].try_into().expect("8 bytes"));
    let complex = flags & FLAG_COMPLEX != 0;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(entry_size(complex) as u64))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| format_err(7, format!("dimensions {rows}x{cols} overflow")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        let what = if payload.len() < expected { "truncated payload" } else { "trailing bytes" };
        return Err(format_err(
            HEADER_LEN + payload.len().min(expected),
            format!("{what}: expected {expected} payload bytes, found {}", payload.len()),
        ));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    if complex {
        let data = payload.chunks_exact(16).map(Complex64::take).collect();
        Ok(AnyMatrix::Complex(Matrix::new(rows, cols, data)?))
    } else {
        let data = payload.chunks_exact(8).map(f64::take).collect();
        Ok(AnyMatrix::Real(Matrix::new(rows, cols, data)?))
    }
}

pub fn write_matrix<T: FileScalar>(path: impl AsRef<Path>, matrix: &Matrix<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(matrix)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<AnyMatrix> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Reads a matrix with a fixed entry type. Real files may be read as
/// complex.
pub fn read_matrix_as<T: FileScalar>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    let path = path.as_ref();
    let any = read_matrix(path)?;
    let (rows, cols) = any.shape();
    let data: Vec<T> = match any {
        AnyMatrix::Real(m) => m.into_vec().into_iter().map(T::from_real).collect(),
        AnyMatrix::Complex(m) => m
            .into_vec()
            .into_iter()
            .map(T::from_complex)
            .collect::<Option<_>>()
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "{}: complex matrix where a real one is required",
                    path.display()
                ))
            })?,
    };
    Matrix::new(rows, cols, data)
}
