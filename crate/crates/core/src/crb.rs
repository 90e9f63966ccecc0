//! Fisher information and Cramér–Rao bounds for target angle and range.
//!
//! Parameter order is `(θ, r, Re β̃, Im β̃)`. Trace terms `Tr(A PPᴴ Bᴴ)` are
//! evaluated as Frobenius inner products of the `M × (K+1)` products `AP`, `BP`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};

use crate::geometry::SensingModel;
use crate::linalg::frobenius_inner;
use crate::{CMatrix, Error, Result, C64};

/// Condition-number limit for the Schur complement of the FIM.
pub const SINGULAR_COND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrbParameter {
    Angle,
    Range,
}

impl CrbParameter {
    pub fn derivative<'a>(&self, sensing: &'a SensingModel) -> &'a CMatrix {
        match self {
            CrbParameter::Angle => &sensing.g_dtheta,
            CrbParameter::Range => &sensing.g_drange,
        }
    }
}

/// All `Tr(A R Bᴴ)` terms needed by the FIM, with `R = PPᴴ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceTerms {
    /// `Tr(G̃ R G̃ᴴ)`
    pub gg: f64,
    /// `Tr(Ġ_θ R Ġ_θᴴ)`, `Tr(Ġ_r R Ġ_rᴴ)`
    pub tt: f64,
    pub rr: f64,
    /// `Tr(Ġ_r R Ġ_θᴴ)`
    pub rt: C64,
    /// `Tr(G̃ R Ġ_θᴴ)`, `Tr(G̃ R Ġ_rᴴ)`
    pub gt: C64,
    pub gr: C64,
}

impl TraceTerms {
    pub fn new(p: &CMatrix, sensing: &SensingModel) -> Self {
        let gp = &sensing.g_tilde * p;
        let tp = &sensing.g_dtheta * p;
        let rp = &sensing.g_drange * p;
        Self {
            gg: gp.norm_squared(),
            tt: tp.norm_squared(),
            rr: rp.norm_squared(),
            rt: frobenius_inner(&rp, &tp),
            gt: frobenius_inner(&gp, &tp),
            gr: frobenius_inner(&gp, &rp),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub j: Matrix4<f64>,
    /// `2T / σ_e²`, already applied to `j`.
    pub scale: f64,
    pub singular: bool,
}

pub fn fim(p: &CMatrix, sensing: &SensingModel, noise: f64, slots: usize) -> Result<FisherMatrix> {
    if p.nrows() != sensing.g_tilde.ncols() {
        return Err(Error::Dimension(format!(
            "beamfocuser has {} rows, sensing matrix {} columns",
            p.nrows(),
            sensing.g_tilde.ncols()
        )));
    }
    if !(noise > 0.0) || slots == 0 {
        return Err(Error::InvalidParameter("noise must be > 0 and slots >= 1".into()));
    }
    let t = TraceTerms::new(p, sensing);
    let beta = sensing.gain;
    let b2 = beta.norm_sqr();
    let scale = 2.0 * slots as f64 / noise;
    let mut j = Matrix4::zeros();
    j[(0, 0)] = b2 * t.tt;
    j[(1, 1)] = b2 * t.rr;
    j[(0, 1)] = b2 * t.rt.re;
    j[(1, 0)] = j[(0, 1)];
    let iu = C64::new(0.0, 1.0);
    for (row, cross) in [(0, t.gt), (1, t.gr)] {
        let base = beta.conj() * cross;
        j[(row, 2)] = base.re;
        j[(row, 3)] = (base * iu).re;
        j[(2, row)] = j[(row, 2)];
        j[(3, row)] = j[(row, 3)];
    }
    j[(2, 2)] = t.gg;
    j[(3, 3)] = t.gg;
    j *= scale;
    Ok(FisherMatrix {
        j,
        scale,
        singular: t.gg == 0.0 || j.iter().all(|v| *v == 0.0),
    })
}

/// `(J_11 - J_12 J_22⁻¹ J_12ᵀ)⁻¹`; diagonal entries bound the angle and range MSE.
pub fn crb_joint(f: &FisherMatrix) -> Result<Matrix2<f64>> {
    if f.singular {
        return Err(Error::SingularGeometry(f64::INFINITY));
    }
    let j11 = f.j.fixed_view::<2, 2>(0, 0).into_owned();
    let j12 = f.j.fixed_view::<2, 2>(0, 2).into_owned();
    let j22 = f.j.fixed_view::<2, 2>(2, 2).into_owned();
    let j22_inv = j22.try_inverse().ok_or(Error::SingularGeometry(f64::INFINITY))?;
    let schur = j11 - j12 * j22_inv * j12.transpose();
    let schur = (schur + schur.transpose()) * 0.5;
    let eig = schur.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let cond = if lo <= 0.0 { f64::INFINITY } else { hi / lo };
    if cond > SINGULAR_COND {
        return Err(Error::SingularGeometry(cond));
    }
    schur.try_inverse().ok_or(Error::SingularGeometry(cond))
}

/// Upper-left 2×2 block of the pseudo-inverse of the full FIM. Agrees with
/// [`crb_joint`] when the Schur complement is well conditioned and stays
/// defined when a location derivative is zeroed.
///
/// The location and gain blocks differ by `|β̃|²` (often 1e-16), so the matrix
/// is equilibrated by its diagonal before the SVD cutoff is applied; zero
/// diagonal entries are left unscaled.
pub fn crb_joint_pinv(f: &FisherMatrix) -> Matrix2<f64> {
    let d = nalgebra::Vector4::from_fn(|i, _| {
        let v = f.j[(i, i)];
        if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }
    });
    let scaled = Matrix4::from_fn(|i, j| d[i] * f.j[(i, j)] * d[j]);
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let inv = svd
        .pseudo_inverse(1e-14 * smax.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| Matrix4::zeros());
    Matrix2::from_fn(|i, j| d[i] * inv[(i, j)] * d[j])
}

/// Per-parameter CRB with the other location parameter treated as known:
/// `σ² Tr(G̃RG̃ᴴ) / (2T|β̃|² [Tr(Ġ_s R Ġ_sᴴ) Tr(G̃RG̃ᴴ) - |Tr(G̃ R Ġ_sᴴ)|²])`.
pub fn crb_closed_form(
    p: &CMatrix,
    sensing: &SensingModel,
    noise: f64,
    slots: usize,
    which: CrbParameter,
) -> Result<f64> {
    let gp = &sensing.g_tilde * p;
    let dp = which.derivative(sensing) * p;
    let gg = gp.norm_squared();
    let ss = dp.norm_squared();
    let cross = frobenius_inner(&gp, &dp).norm_sqr();
    let gap = ss * gg - cross;
    // Cauchy–Schwarz gap; treat round-off level values as closed.
    if !(gap > 1e-13 * ss * gg) || !(gg > 0.0) {
        return Err(Error::DegenerateBeam(format!("Cauchy-Schwarz gap {gap:e}")));
    }
    let b2 = sensing.gain.norm_sqr();
    Ok(noise * gg / (2.0 * slots as f64 * b2 * gap))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSplit {
    pub m_plus: CMatrix,
    pub m_minus: CMatrix,
}

/// Splits the Hermitian part of `a` into positive and negative PSD parts, so
/// that `Re Tr(A X) = Tr(M₊X) - Tr(M₋X)` for Hermitian `X`.
pub fn hermitian_split(a: &CMatrix) -> HermitianSplit {
    let s = crate::linalg::hermitian_part(a);
    let n = s.nrows();
    let eig = SymmetricEigen::new(s);
    let mut m_plus = CMatrix::zeros(n, n);
    let mut m_minus = CMatrix::zeros(n, n);
    for (i, &d) in eig.eigenvalues.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let u = eig.eigenvectors.column(i);
        let outer = u * u.adjoint() * C64::new(d.abs(), 0.0);
        if d > 0.0 {
            m_plus += outer;
        } else {
            m_minus += outer;
        }
    }
    HermitianSplit { m_plus, m_minus }
}
