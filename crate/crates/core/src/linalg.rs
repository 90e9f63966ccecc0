//! Small complex linear-algebra helpers shared by the optimizer modules.

use nalgebra::DMatrix;
use rand::Rng;

use crate::{CMatrix, CVector, C64};

pub const ZERO: C64 = C64::new(0.0, 0.0);

/// `Σ_ij A_ij conj(B_ij)`, i.e. `Tr(A Bᴴ)`.
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Moore-Penrose pseudo-inverse via SVD with relative cutoff `rcond`.
pub fn pinv(a: &CMatrix, rcond: f64) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rcond * smax;
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut out = CMatrix::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let ui = u.column(i);
            let vi = vt.row(i).adjoint();
            out += (vi * ui.adjoint()) * C64::new(1.0 / s, 0.0);
        }
    }
    out
}

/// 2-norm condition number from singular values (∞ for rank-deficient input).
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn real_condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_cmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_cvector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| random_complex(rng))
}

/// Unit-modulus matrix with uniformly random phases.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
    })
}

/// Random Hermitian PSD matrix `B Bᴴ`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let b = random_cmatrix(rng, n, rank);
    &b * b.adjoint()
}

/// `n × n` DFT matrix with unit-modulus entries (no normalization).
pub fn dft_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        C64::from_polar(1.0, -std::f64::consts::TAU * (i * j) as f64 / n as f64)
    })
}
