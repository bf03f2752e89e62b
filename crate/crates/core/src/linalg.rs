//! Dense complex matrix helpers shared by the dynamics and bound modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Hilbert-space dimension above which dense pipelines refuse to run.
pub const MAX_DENSE_DIM: usize = 4096;

/// Dimension up to which [`spectral_norm`] uses a full singular value decomposition.
pub const DENSE_NORM_DIM: usize = 4096;

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMat {
    CMat::zeros(dim, dim)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrices and a few named single-site operators.
pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Looks up a named qubit operator: `x`, `y`, `z` or `id`.
pub fn named_qubit_operator(name: &str) -> Option<CMat> {
    match name.to_ascii_lowercase().as_str() {
        "x" | "sx" | "sigma_x" => Some(pauli_x()),
        "y" | "sy" | "sigma_y" => Some(pauli_y()),
        "z" | "sz" | "sigma_z" => Some(pauli_z()),
        "id" | "i" | "identity" => Some(identity(2)),
        _ => None,
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `A·B` through a blocked complex GEMM kernel; several times faster than the generic
/// product for the 2^8-dimensional operators the sweeps use.
pub fn mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matrix product shape mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMat::zeros(m, n);
    if m == 0 || k == 0 || n == 0 {
        return out;
    }
    // Complex64 is repr(C) { re, im }, the layout of `[f64; 2]`; DMatrix storage is column-major
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

/// `A·B·C`
pub fn mul3(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    mul(&mul(a, b), c)
}

/// Largest entry-wise modulus of `A - A†`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `exp(-i h dt)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian(h: &CMat, dt: f64) -> CMat {
    let eig = HermitianEigen::new(h);
    eig.propagator(dt)
}

/// Cached eigendecomposition of a Hermitian matrix, reused for repeated exponentials.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(h: &CMat) -> Self {
        // symmetrise first; the eigensolver only reads one triangle
        let sym = (h + h.adjoint()) * c(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        Self { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    /// `exp(-i H dt)`.
    pub fn propagator(&self, dt: f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -lambda * dt);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        mul(&scaled, &self.vectors.adjoint())
    }
}

/// Largest singular value. Dense SVD up to [`DENSE_NORM_DIM`], power iteration on `A†A` above.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    if a.nrows().max(a.ncols()) <= DENSE_NORM_DIM {
        Ok(dense_spectral_norm(a))
    } else {
        power_iteration_norm(a, POWER_TOLERANCE, POWER_MAX_ITER)
    }
}

pub fn dense_spectral_norm(a: &CMat) -> f64 {
    a.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Power iteration on `A†A`; stops once successive estimates of `‖A‖` agree to `tol` (relative).
pub fn power_iteration_norm(a: &CMat, tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.ncols();
    // deterministic, non-degenerate start vector
    let mut v = nalgebra::DVector::<Complex64>::from_fn(n, |i, _| {
        c(1.0 + (i as f64 * 0.618_033_988_75).fract(), 0.25 * ((i % 7) as f64))
    });
    let norm = v.norm();
    v /= c(norm, 0.0);
    let mut estimate = 0.0f64;
    for _ in 0..max_iter {
        let av = a * &v;
        let w = a.adjoint() * &av;
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(0.0);
        }
        let next = wn.sqrt();
        v = w / c(wn, 0.0);
        if (next - estimate).abs() <= tol * next.max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NormNotConverged { iterations: max_iter, estimate })
}

/// `‖U†U − 1‖` in operator norm.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let g = mul(&u.adjoint(), u) - identity(u.ncols());
    dense_hermitian_norm(&g)
}

/// Operator norm of a Hermitian matrix via its spectrum.
pub fn dense_hermitian_norm(h: &CMat) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    HermitianEigen::new(h).values.iter().fold(0.0f64, |m, &l| m.max(l.abs()))
}

/// Nearest unitary in the polar decomposition, `U (U†U)^{-1/2}`.
pub fn reproject_unitary(u: &CMat) -> CMat {
    let gram = mul(&u.adjoint(), u);
    let eig = HermitianEigen::new(&gram);
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for (j, &lambda) in eig.values.iter().enumerate() {
        let f = c(1.0 / lambda.max(f64::MIN_POSITIVE).sqrt(), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    mul(u, &mul(&scaled, &eig.vectors.adjoint()))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    mul(a, b) - mul(b, a)
}
