//! Laplacian spectra, numerical rank and the eigenprojector at zero.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_unsorted, jacobi_svd, solve};
use crate::matrix::SquareMatrix;
use crate::scc::in_forest_dimension;

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Absolute floor for the zero-eigenvalue threshold.
pub const ZERO_TOL_FLOOR: f64 = 1e-12;

const PAIRING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues with modulus at most `zero_tol * max|L_ij|` (floored at
    /// [`ZERO_TOL_FLOOR`]) count as zero.
    pub zero_tol: f64,
    /// Singular values above `rank_tol * sigma_max` count toward the rank.
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_tol: DEFAULT_ZERO_TOL,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl Tolerances {
    /// Both tolerances must lie in (0, 1).
    pub fn new(zero_tol: f64, rank_tol: f64) -> Result<Self> {
        let tol = Tolerances { zero_tol, rank_tol };
        tol.validate()?;
        Ok(tol)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("zero_tol", self.zero_tol), ("rank_tol", self.rank_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All eigenvalues with multiplicity, sorted by real part then imaginary part.
pub fn eigenvalues(m: &SquareMatrix) -> Result<Vec<Complex64>> {
    let mut ev = eigenvalues_unsorted(m)?;
    ev.sort_by(cmp_complex);
    Ok(ev)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &SquareMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_svd(m)?.values)
}

/// Number of singular values exceeding `rank_tol` times the largest one.
pub fn numerical_rank(m: &SquareMatrix, rank_tol: f64) -> Result<usize> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rank_tol must be positive, got {rank_tol}"
        )));
    }
    let s = singular_values(m)?;
    let largest = s.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rank_tol * largest).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Complex64>,
    /// Number of eigenvalues classified as zero.
    pub zero_multiplicity: usize,
    pub numerical_rank: usize,
    /// Smallest real part among the nonzero eigenvalues, if there are any.
    pub min_nonzero_real_part: Option<f64>,
    /// Every nonzero eigenvalue has a positive real part.
    pub localization_holds: bool,
    /// Absolute threshold actually used to classify zero eigenvalues.
    pub zero_threshold: f64,
}

pub fn spectral_report(g: &Digraph, tol: Tolerances) -> Result<SpectralReport> {
    tol.validate()?;
    let l = g.laplacian();
    let eigenvalues = eigenvalues(&l)?;
    let zero_threshold = (tol.zero_tol * l.max_abs()).max(ZERO_TOL_FLOOR);

    let (zeros, nonzero): (Vec<&Complex64>, Vec<&Complex64>) =
        eigenvalues.iter().partition(|z| z.norm() <= zero_threshold);
    let min_nonzero_real_part = nonzero.iter().map(|z| z.re).min_by(f64::total_cmp);

    Ok(SpectralReport {
        zero_multiplicity: zeros.len(),
        numerical_rank: numerical_rank(&l, tol.rank_tol)?,
        localization_holds: nonzero.iter().all(|z| z.re > 0.0),
        min_nonzero_real_part,
        zero_threshold,
        eigenvalues,
    })
}

/// Whether `z` lies in the union of the Gershgorin row disks of `m`.
pub fn within_gershgorin(m: &SquareMatrix, z: Complex64, slack: f64) -> bool {
    (0..m.dim()).any(|i| {
        let radius: f64 = (0..m.dim())
            .filter(|&j| j != i)
            .map(|j| m[(i, j)].abs())
            .sum();
        (z - Complex64::new(m[(i, i)], 0.0)).norm() <= radius + slack
    })
}

/// Projection onto `ker L` along `range L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenprojector {
    pub matrix: SquareMatrix,
    /// Kernel dimension used (the in-forest dimension).
    pub d: usize,
    /// Largest singular value of `L` assigned to the kernel.
    pub kernel_sigma_max: f64,
    /// Smallest singular value of `L` assigned to the range (0 when `d = n`).
    pub range_sigma_min: f64,
}

/// Computes `Z (W^T Z)^{-1} W^T` with `Z` and `W` orthonormal bases of the
/// right and left null spaces of `L`.
///
/// The kernel dimension comes from the sink-component count rather than from
/// a singular-value threshold.
pub fn eigenprojector_at_zero(g: &Digraph) -> Result<Eigenprojector> {
    let n = g.order();
    let d = in_forest_dimension(g);
    let l = g.laplacian();
    let right = jacobi_svd(&l)?;
    let left = jacobi_svd(&l.transpose())?;

    // singular values are sorted decreasingly, so the kernel is the tail
    let kernel: Vec<usize> = (n - d..n).collect();
    let z: Vec<Vec<f64>> = kernel.iter().map(|&k| right.v.column(k)).collect();
    let w: Vec<Vec<f64>> = kernel.iter().map(|&k| left.v.column(k)).collect();

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut pairing = SquareMatrix::zeros(d);
    for (a, wa) in w.iter().enumerate() {
        for (b, zb) in z.iter().enumerate() {
            pairing[(a, b)] = dot(wa, zb);
        }
    }
    let pairing_sigma_min = jacobi_svd(&pairing)?.values.last().copied().unwrap_or(0.0);
    if !(pairing_sigma_min > PAIRING_TOL) {
        return Err(Error::SingularPairing(pairing_sigma_min));
    }
    // rows of (W^T Z)^{-1} W^T
    let coeffs = solve(&pairing, &w).ok_or(Error::SingularPairing(pairing_sigma_min))?;

    let mut projector = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            projector[(i, j)] = (0..d).map(|k| z[k][i] * coeffs[k][j]).sum();
        }
    }

    Ok(Eigenprojector {
        matrix: projector,
        d,
        kernel_sigma_max: right.values[n - d],
        range_sigma_min: if d < n { right.values[n - d - 1] } else { 0.0 },
    })
}
