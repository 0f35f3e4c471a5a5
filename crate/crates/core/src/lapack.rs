//! Safe wrappers over the LAPACK SVD drivers.
//!
//! `dgesdd` (divide and conquer) is tried first; if it reports
//! nonconvergence the QR-iteration driver `dgesvd` is used instead.

use std::os::raw::{c_char, c_int};

use crate::error::{CurError, Result};
use crate::linalg::Matrix;

#[link(name = "lapack")]
extern "C" {
    fn dgesdd_(
        jobz: *const c_char,
        m: *const c_int,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        s: *mut f64,
        u: *mut f64,
        ldu: *const c_int,
        vt: *mut f64,
        ldvt: *const c_int,
        work: *mut f64,
        lwork: *const c_int,
        iwork: *mut c_int,
        info: *mut c_int,
    );

    fn dgesvd_(
        jobu: *const c_char,
        jobvt: *const c_char,
        m: *const c_int,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        s: *mut f64,
        u: *mut f64,
        ldu: *const c_int,
        vt: *mut f64,
        ldvt: *const c_int,
        work: *mut f64,
        lwork: *const c_int,
        info: *mut c_int,
    );
}

/// Thin SVD output: `u` is `m × p`, `vt` is `p × n`, `p = min(m, n)`.
pub(crate) struct RawSvd {
    pub u: Option<Matrix>,
    pub s: Vec<f64>,
    pub vt: Option<Matrix>,
}

fn dim(x: usize) -> Result<c_int> {
    c_int::try_from(x).map_err(|_| CurError::domain(format!("dimension {x} exceeds the LAPACK index range")))
}

/// Singular values in nonincreasing order, with thin singular vectors when
/// `vectors` is set. `a` must be nonempty and finite.
pub(crate) fn thin_svd(a: &Matrix, vectors: bool) -> Result<RawSvd> {
    let (rows, cols) = a.shape();
    match gesdd(a, vectors)? {
        Some(out) => Ok(out),
        None => gesvd(a, vectors)?.ok_or(CurError::SvdNonConvergence { rows, cols }),
    }
}

fn gesdd(a: &Matrix, vectors: bool) -> Result<Option<RawSvd>> {
    let (rows, cols) = a.shape();
    let p = rows.min(cols);
    let (m, n, k) = (dim(rows)?, dim(cols)?, dim(p)?);
    // nalgebra storage is column-major with leading dimension `rows`.
    let mut data: Vec<f64> = a.as_slice().to_vec();
    let mut s = vec![0.0; p];
    let (mut u, mut vt) = if vectors {
        (vec![0.0; rows * p], vec![0.0; p * cols])
    } else {
        (vec![0.0; 1], vec![0.0; 1])
    };
    let jobz: c_char = if vectors { b'S' } else { b'N' } as c_char;
    let ldu = if vectors { m } else { 1 };
    let ldvt = if vectors { k } else { 1 };
    let mut iwork = vec![0 as c_int; 8 * p];
    let mut info: c_int = 0;
    let mut query = [0.0f64];
    // SAFETY: every buffer is sized per the LAPACK contract for jobz and the
    // leading dimensions passed alongside it.
    unsafe {
        dgesdd_(
            &jobz, &m, &n, data.as_mut_ptr(), &m, s.as_mut_ptr(), u.as_mut_ptr(), &ldu, vt.as_mut_ptr(), &ldvt,
            query.as_mut_ptr(), &-1, iwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(CurError::domain(format!("dgesdd workspace query failed with info {info}")));
    }
    let lwork = dim((query[0] as usize).max(1))?;
    let mut work = vec![0.0; lwork as usize];
    // SAFETY: as above, with `work` of the queried length.
    unsafe {
        dgesdd_(
            &jobz, &m, &n, data.as_mut_ptr(), &m, s.as_mut_ptr(), u.as_mut_ptr(), &ldu, vt.as_mut_ptr(), &ldvt,
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &mut info,
        );
    }
    if info > 0 {
        return Ok(None);
    }
    if info < 0 {
        return Err(CurError::domain(format!("dgesdd rejected argument {}", -info)));
    }
    Ok(Some(pack(rows, cols, vectors, u, s, vt)))
}

fn gesvd(a: &Matrix, vectors: bool) -> Result<Option<RawSvd>> {
    let (rows, cols) = a.shape();
    let p = rows.min(cols);
    let (m, n, k) = (dim(rows)?, dim(cols)?, dim(p)?);
    let mut data: Vec<f64> = a.as_slice().to_vec();
    let mut s = vec![0.0; p];
    let (mut u, mut vt) = if vectors {
        (vec![0.0; rows * p], vec![0.0; p * cols])
    } else {
        (vec![0.0; 1], vec![0.0; 1])
    };
    let job: c_char = if vectors { b'S' } else { b'N' } as c_char;
    let ldu = if vectors { m } else { 1 };
    let ldvt = if vectors { k } else { 1 };
    let mut info: c_int = 0;
    let mut query = [0.0f64];
    // SAFETY: buffers sized per the LAPACK contract for the chosen jobs.
    unsafe {
        dgesvd_(
            &job, &job, &m, &n, data.as_mut_ptr(), &m, s.as_mut_ptr(), u.as_mut_ptr(), &ldu, vt.as_mut_ptr(), &ldvt,
            query.as_mut_ptr(), &-1, &mut info,
        );
    }
    if info != 0 {
        return Err(CurError::domain(format!("dgesvd workspace query failed with info {info}")));
    }
    let lwork = dim((query[0] as usize).max(1))?;
    let mut work = vec![0.0; lwork as usize];
    // SAFETY: as above, with `work` of the queried length.
    unsafe {
        dgesvd_(
            &job, &job, &m, &n, data.as_mut_ptr(), &m, s.as_mut_ptr(), u.as_mut_ptr(), &ldu, vt.as_mut_ptr(), &ldvt,
            work.as_mut_ptr(), &lwork, &mut info,
        );
    }
    if info > 0 {
        return Ok(None);
    }
    if info < 0 {
        return Err(CurError::domain(format!("dgesvd rejected argument {}", -info)));
    }
    Ok(Some(pack(rows, cols, vectors, u, s, vt)))
}

fn pack(rows: usize, cols: usize, vectors: bool, u: Vec<f64>, s: Vec<f64>, vt: Vec<f64>) -> RawSvd {
    let p = rows.min(cols);
    if vectors {
        RawSvd {
            u: Some(Matrix::from_vec(rows, p, u)),
            s,
            vt: Some(Matrix::from_vec(p, cols, vt)),
        }
    } else {
        RawSvd { u: None, s, vt: None }
    }
}
