//! Problem instances as a directory of JSRB files.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::config::InstanceSource;
use crate::io::matrix_file::{read_matrix, read_matrix_as, write_matrix, FileScalar};
use crate::model::{Image, Matrix, Measurement, ProblemInstance, ProjectionMap};
use crate::testbed::generate_instance;

/// A real or complex instance, depending on the input files.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyInstance {
    Real(ProblemInstance<f64>),
    Complex(ProblemInstance<Complex64>),
}

fn column<T: FileScalar>(values: &[T]) -> Result<Matrix<T>> {
    Matrix::new(values.len(), 1, values.to_vec())
}

fn single_column<T: FileScalar>(m: Matrix<T>, path: &Path) -> Result<Vec<T>> {
    if m.cols() != 1 {
        return Err(Error::Invalid(format!(
            "{}: expected a single column, found {} columns",
            path.display(),
            m.cols()
        )));
    }
    Ok(m.into_vec())
}

/// Writes `s_mod`, `s_calib`, `q`, `u` and, when known, `s_true` and
/// `c_true` as `<name>.jsrb`. Vectors are stored as one-column matrices.
pub fn write_instance<T: FileScalar>(
    instance: &ProblemInstance<T>,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, write: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = dir.join(format!("{name}.jsrb"));
        write(&path)?;
        written.push(path);
        Ok(())
    };
    put("s_mod", &|p| write_matrix(p, &instance.s_mod))?;
    put("s_calib", &|p| write_matrix(p, &instance.s_calib))?;
    put("q", &|p| write_matrix(p, &instance.q.to_dense()))?;
    put("u", &|p| write_matrix(p, &column(&instance.u)?))?;
    if let Some(s_true) = &instance.s_true {
        put("s_true", &|p| write_matrix(p, s_true))?;
    }
    if let Some(c_true) = &instance.c_true {
        put("c_true", &|p| write_matrix(p, &column(c_true)?))?;
    }
    Ok(written)
}

fn load_files<T: FileScalar>(
    s_mod: &Path,
    s_calib: &Path,
    q: &Path,
    u: &Path,
    s_true: Option<&Path>,
    c_true: Option<&Path>,
) -> Result<ProblemInstance<T>> {
    let instance = ProblemInstance {
        s_true: s_true.map(read_matrix_as::<T>).transpose()?,
        s_mod: read_matrix_as(s_mod)?,
        s_calib: read_matrix_as(s_calib)?,
        q: ProjectionMap::from_dense(&read_matrix_as(q)?)?,
        c_true: c_true
            .map(|p| Image::new(single_column(read_matrix_as::<f64>(p)?, p)?))
            .transpose()?,
        u: Measurement::new(single_column(read_matrix_as(u)?, u)?)?,
        sigma: 0.0,
        seed: 0,
    };
    instance.ensure_valid()?;
    Ok(instance)
}

/// Builds the synthetic instance or reads the referenced files. Any complex
/// operator or measurement file makes the whole instance complex.
pub fn load_instance(source: &InstanceSource) -> Result<AnyInstance> {
    match source {
        InstanceSource::Synthetic {
            m,
            sigma,
            seed,
            phantom,
        } => Ok(AnyInstance::Real(generate_instance(*m, *sigma, *seed, phantom)?)),
        InstanceSource::Files {
            s_mod,
            s_calib,
            q,
            u,
            s_true,
            c_true,
        } => {
            let mut complex = false;
            for p in [Some(s_mod), Some(s_calib), Some(u), s_true.as_ref()].into_iter().flatten() {
                complex |= read_matrix(p)?.is_complex();
            }
            let (st, ct) = (s_true.as_deref(), c_true.as_deref());
            if complex {
                load_files(s_mod, s_calib, q, u, st, ct).map(AnyInstance::Complex)
            } else {
                load_files(s_mod, s_calib, q, u, st, ct).map(AnyInstance::Real)
            }
        }
    }
}
