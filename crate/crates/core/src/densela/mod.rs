//! Dense linear algebra: factorizations, numerical kernels and pseudoinverses.
//!
//! Kernel detection compares singular values (or `|R_kk|` of a pivoted QR)
//! against a truncation parameter `ε`. By default the values are measured
//! relative to `max(1, σ_max)`, so matrices with large entries (small elements,
//! high derivative orders) are classified the same way as unit-scale ones,
//! while matrices that are already small are compared in absolute terms.

mod lu;
mod matrix;
mod qr;
mod svd;

pub use lu::{lu_solve, LuFactor};
pub use matrix::DenseMatrix;
pub use qr::{qr, qr_pivoted, PivotedQr, Qr};
pub use svd::{cond2, svd, Svd};

use crate::error::{Error, Result};
use crate::scalar::{norm2, Scalar};

/// Default truncation parameter.
pub const DEFAULT_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KernelMethod {
    #[default]
    Svd,
    Qr,
}

impl std::str::FromStr for KernelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svd" => Ok(Self::Svd),
            "qr" => Ok(Self::Qr),
            other => Err(Error::Config(format!(
                "unknown kernel method `{other}` (expected svd or qr)"
            ))),
        }
    }
}

impl std::fmt::Display for KernelMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Svd => "svd",
            Self::Qr => "qr",
        })
    }
}

/// How `ε` is compared against the spectrum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Threshold {
    /// `σ / max(1, σ_max) < ε`.
    #[default]
    Scaled,
    /// `σ < ε`.
    Absolute,
}

impl Threshold {
    fn scale(self, sigma_max: f64) -> f64 {
        match self {
            Self::Scaled if sigma_max > 1.0 => sigma_max,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelOptions {
    pub eps: f64,
    pub method: KernelMethod,
    pub threshold: Threshold,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            method: KernelMethod::Svd,
            threshold: Threshold::Scaled,
        }
    }
}

impl KernelOptions {
    pub fn new(eps: f64, method: KernelMethod) -> Self {
        Self {
            eps,
            method,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.eps > 0.0 && self.eps.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidEpsilon(self.eps))
        }
    }
}

/// Numerical kernel of a matrix together with the spectrum it was read from.
#[derive(Clone, Debug)]
pub struct KernelResult<S = f64> {
    /// `n x dim` with orthonormal columns.
    pub kernel_basis: DenseMatrix<S>,
    /// Singular values (svd mode) or `|R_kk|` (qr mode), unscaled, descending.
    pub singular_values: Vec<f64>,
    pub dim: usize,
    /// Largest value classified as zero, in threshold units.
    pub max_zero_sv: Option<f64>,
    /// Smallest value kept as nonzero, in threshold units.
    pub min_nonzero_sv: Option<f64>,
    /// Divisor applied to the spectrum before comparison with `ε`.
    pub scale: f64,
}

/// Kernel with the default (scaled) threshold.
pub fn kernel<S: Scalar>(
    m: &DenseMatrix<S>,
    eps: f64,
    method: KernelMethod,
) -> Result<KernelResult<S>> {
    kernel_with(m, &KernelOptions::new(eps, method))
}

pub fn kernel_with<S: Scalar>(m: &DenseMatrix<S>, opts: &KernelOptions) -> Result<KernelResult<S>> {
    opts.validate()?;
    match opts.method {
        KernelMethod::Svd => Ok(kernel_from_svd(
            &svd(&pad_to_tall(m))?,
            opts.eps,
            opts.threshold,
        )),
        KernelMethod::Qr => Ok(kernel_qr(m, opts)),
    }
}

/// Reads the kernel off an existing SVD with a full `V` factor.
pub fn kernel_from_svd<S: Scalar>(d: &Svd<S>, eps: f64, threshold: Threshold) -> KernelResult<S> {
    let n = d.v.rows();
    let scale = threshold.scale(d.sigma_max());
    // a thin SVD of a wide matrix lacks the trailing kernel columns
    debug_assert_eq!(d.v.cols(), n, "kernel extraction needs the full V factor");
    let rank = d.s.iter().take_while(|s| **s / scale >= eps).count();
    let zeros: Vec<f64> = d.s[rank..].iter().map(|s| s / scale).collect();
    KernelResult {
        kernel_basis: d.v.select_columns(rank..n),
        singular_values: d.s.clone(),
        dim: n - rank,
        max_zero_sv: zeros.iter().copied().reduce(f64::max),
        min_nonzero_sv: d.s[..rank].last().map(|s| s / scale),
        scale,
    }
}

fn kernel_qr<S: Scalar>(m: &DenseMatrix<S>, opts: &KernelOptions) -> KernelResult<S> {
    // Mᴴ P = Q R, so M = P Rᴴ Qᴴ and the trailing columns of Q span Ker(M).
    let f = qr_pivoted(&m.adjoint());
    let n = m.cols();
    let diag = f.diagonal_magnitudes();
    let scale = opts.threshold.scale(diag.first().copied().unwrap_or(0.0));
    let rank = diag.iter().take_while(|d| **d / scale >= opts.eps).count();
    KernelResult {
        kernel_basis: f.q.select_columns(rank..n),
        max_zero_sv: diag[rank..].iter().map(|d| d / scale).reduce(f64::max),
        min_nonzero_sv: diag[..rank].last().map(|d| d / scale),
        singular_values: diag,
        dim: n - rank,
        scale,
    }
}

fn pad_to_tall<S: Scalar>(m: &DenseMatrix<S>) -> DenseMatrix<S> {
    if m.rows() >= m.cols() {
        return m.clone();
    }
    let mut t = DenseMatrix::zeros(m.cols(), m.cols());
    for i in 0..m.rows() {
        t.row_mut(i).copy_from_slice(m.row(i));
    }
    t
}

/// Result of a truncated pseudoinverse application.
#[derive(Clone, Debug)]
pub struct PseudoSolution<S = f64> {
    pub x: Vec<S>,
    /// `‖M x − rhs‖`.
    pub residual: f64,
}

impl<S> PseudoSolution<S> {
    /// Whether `rhs` was (numerically) in the range of the matrix.
    pub fn is_consistent(&self, rhs_norm: f64, tol: f64) -> bool {
        self.residual <= tol * rhs_norm.max(f64::MIN_POSITIVE)
    }
}

/// `x = M† rhs` via the SVD, truncating singular values like [`kernel`].
pub fn pseudo_apply<S: Scalar>(
    m: &DenseMatrix<S>,
    rhs: &[S],
    eps: f64,
) -> Result<PseudoSolution<S>> {
    if eps <= 0.0 {
        return Err(Error::InvalidEpsilon(eps));
    }
    if rhs.len() != m.rows() {
        return Err(Error::Shape(format!(
            "rhs of length {} for a {}x{} matrix",
            rhs.len(),
            m.rows(),
            m.cols()
        )));
    }
    let d = svd(m)?;
    pseudo_apply_svd(m, &d, rhs, eps, Threshold::Scaled)
}

pub(crate) fn pseudo_apply_svd<S: Scalar>(
    m: &DenseMatrix<S>,
    d: &Svd<S>,
    rhs: &[S],
    eps: f64,
    threshold: Threshold,
) -> Result<PseudoSolution<S>> {
    let scale = threshold.scale(d.sigma_max());
    let x = d.apply_pseudo_inverse(rhs, eps * scale)?;
    let mx = m.matvec(&x)?;
    let r: Vec<S> = mx.iter().zip(rhs).map(|(a, b)| *a - *b).collect();
    Ok(PseudoSolution {
        residual: norm2(&r),
        x,
    })
}
