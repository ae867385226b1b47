//! Dense kernels behind the spectral module: a nonsymmetric eigenvalue solver
//! (Householder reduction to Hessenberg form, then Francis double-shift QR)
//! and a one-sided Jacobi singular value decomposition.
//!
//! The QR iteration follows the EISPACK `orthes`/`hqr` pair as popularised by
//! JAMA, computing eigenvalues only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

const EPS: f64 = f64::EPSILON;
/// QR iterations allowed per deflated eigenvalue before giving up.
const MAX_QR_ITERATIONS: usize = 120;
const MAX_JACOBI_SWEEPS: usize = 80;

/// Reduces `h` (row-major, `n x n`) to upper Hessenberg form in place by
/// Householder similarity transforms.
fn reduce_to_hessenberg(h: &mut [Vec<f64>]) {
    let n = h.len();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f = (m..=high).rev().map(|i| ort[i] * h[i][j]).sum::<f64>() / hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut() {
            let f = (m..=high).rev().map(|j| ort[j] * row[j]).sum::<f64>() / hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m][m - 1] = scale * g;
    }
}

/// Eigenvalues of an upper Hessenberg matrix by shifted double QR steps.
fn hessenberg_qr(h: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let nn = h.len();
    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];
    let low = 0isize;
    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let (mut s, mut z, mut w, mut x, mut y): (f64, f64, f64, f64, f64);

    let mut norm = 0.0;
    for (i, row) in h.iter().enumerate() {
        for v in &row[i.saturating_sub(1)..] {
            norm += v.abs();
        }
    }

    let mut iter = 0;
    while n >= low {
        let nu = n as usize;
        // look for a single small subdiagonal element
        let mut l = n;
        while l > low {
            let lu = l as usize;
            s = h[lu - 1][lu - 1].abs() + h[lu][lu].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[lu][lu - 1].abs() <= EPS * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // one root
            h[nu][nu] += exshift;
            re[nu] = h[nu][nu];
            im[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // two roots
            w = h[nu][nu - 1] * h[nu - 1][nu];
            p = (h[nu - 1][nu - 1] - h[nu][nu]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[nu][nu] += exshift;
            h[nu - 1][nu - 1] += exshift;
            x = h[nu][nu];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = re[nu - 1];
                if z != 0.0 {
                    re[nu] = x - w / z;
                }
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[nu][nu];
            y = h[nu - 1][nu - 1];
            w = h[nu][nu - 1] * h[nu - 1][nu];

            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in (low as usize)..=nu {
                    h[i][i] -= x;
                }
                s = h[nu][nu - 1].abs() + h[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in (low as usize)..=nu {
                        h[i][i] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_QR_ITERATIONS {
                return Err(Error::ConvergenceFailure);
            }

            // look for two consecutive small subdiagonal elements
            let mut m = n - 2;
            while m >= l {
                let mu = m as usize;
                z = h[mu][mu];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[mu + 1][mu] + h[mu][mu + 1];
                q = h[mu + 1][mu + 1] - z - r - s;
                r = h[mu + 2][mu + 1];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[mu][mu - 1].abs() * (q.abs() + r.abs());
                let rhs =
                    EPS * (p.abs() * (h[mu - 1][mu - 1].abs() + z.abs() + h[mu + 1][mu + 1].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            let mu = m as usize;
            for i in (mu + 2)..=nu {
                h[i][i - 2] = 0.0;
                if i > mu + 2 {
                    h[i][i - 3] = 0.0;
                }
            }

            // double QR step on rows l..=n and columns m..=n
            for k in mu..nu {
                let notlast = k != nu - 1;
                if k != mu {
                    p = h[k][k - 1];
                    q = h[k + 1][k - 1];
                    r = if notlast { h[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != mu {
                    h[k][k - 1] = -s * x;
                } else if l != m {
                    h[k][k - 1] = -h[k][k - 1];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..nn {
                    p = h[k][j] + q * h[k + 1][j];
                    if notlast {
                        p += r * h[k + 2][j];
                        h[k + 2][j] -= p * z;
                    }
                    h[k][j] -= p * x;
                    h[k + 1][j] -= p * y;
                }
                for row in h.iter_mut().take(nu.min(k + 3) + 1) {
                    p = x * row[k] + y * row[k + 1];
                    if notlast {
                        p += z * row[k + 2];
                        row[k + 2] -= p * r;
                    }
                    row[k] -= p;
                    row[k + 1] -= p * q;
                }
            }
        }
    }

    Ok(re
        .into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

/// All eigenvalues of a real square matrix, unsorted.
pub fn eigenvalues_unsorted(m: &SquareMatrix) -> Result<Vec<Complex64>> {
    let mut h = m.to_rows();
    reduce_to_hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

/// Singular value decomposition `A = U diag(values) V^T`.
///
/// Values are sorted in decreasing order; column `k` of `u` and `v` belongs to
/// `values[k]`. Columns of `u` for zero singular values are left at zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Vec<f64>,
    pub u: SquareMatrix,
    pub v: SquareMatrix,
}

/// One-sided (Hestenes) Jacobi SVD: orthogonalizes the columns of `A` by plane
/// rotations accumulated into `V`.
pub fn jacobi_svd(a: &SquareMatrix) -> Result<Svd> {
    let n = a.dim();
    // column-major working copies
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let tol = EPS * (n.max(2) as f64);
    let frob2: f64 = cols.iter().flatten().map(|x| x * x).sum();
    // columns at or below this squared norm are numerically zero
    let negligible = EPS * EPS * frob2;
    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .fold((0.0, 0.0, 0.0), |(a, b, g), (x, y)| {
                        (a + x * x, b + y * y, g + x * y)
                    });
                if alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::ConvergenceFailure);
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = SquareMatrix::zeros(n);
    let mut v = SquareMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            v[(i, k)] = vcols[src][i];
            if norms[src] > 0.0 {
                u[(i, k)] = cols[src][i] / norms[src];
            }
        }
    }
    Ok(Svd {
        values: order.iter().map(|&k| norms[k]).collect(),
        u,
        v,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Solves `A X = B` for square `A` by Gaussian elimination with partial
/// pivoting; `b` holds the right-hand sides as rows of length `cols`.
/// Returns `None` for an exactly singular pivot.
pub fn solve(a: &SquareMatrix, b: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.dim();
    let mut m = a.to_rows();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col] == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            let (top, bottom) = rhs.split_at_mut(row);
            for (x, y) in bottom[0].iter_mut().zip(&top[col]) {
                *x -= f * y;
            }
        }
    }
    for col in (0..n).rev() {
        for row in 0..col {
            let f = m[row][col] / m[col][col];
            let (top, bottom) = rhs.split_at_mut(col);
            for (x, y) in top[row].iter_mut().zip(&bottom[0]) {
                *x -= f * y;
            }
        }
        let d = m[col][col];
        for x in rhs[col].iter_mut() {
            *x /= d;
        }
    }
    Some(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x - 1)(x - 2)(x - 3)
        let m = mat(&[&[6.0, -11.0, 6.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let ev = sorted(eigenvalues_unsorted(&m).unwrap());
        for (z, e) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn rotation_block_is_complex() {
        let m = mat(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = sorted(eigenvalues_unsorted(&m).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn values_of_a_nonnormal_matrix() {
        // eigenvalues frozen from numpy.linalg.eigvals
        let m = mat(&[
            &[4.0, -2.0, 1.0, 0.5],
            &[3.0, 1.0, -1.0, 2.0],
            &[0.0, 2.0, 5.0, -3.0],
            &[1.0, 0.0, 1.0, 2.0],
        ]);
        let ev = sorted(eigenvalues_unsorted(&m).unwrap());
        let expected = [
            Complex64::new(2.5634160419592718, -2.5251476830730986),
            Complex64::new(2.5634160419592718, 2.5251476830730986),
            Complex64::new(2.732908097652985, 0.0),
            Complex64::new(4.140259818428467, 0.0),
        ];
        for (z, e) in ev.iter().zip(expected) {
            assert!((z - e).norm() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn zero_and_one_by_one() {
        assert_eq!(
            eigenvalues_unsorted(&SquareMatrix::zeros(4)).unwrap(),
            vec![Complex64::new(0.0, 0.0); 4]
        );
        assert_eq!(
            eigenvalues_unsorted(&mat(&[&[3.5]])).unwrap(),
            vec![Complex64::new(3.5, 0.0)]
        );
        assert!(eigenvalues_unsorted(&SquareMatrix::zeros(0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn svd_reconstructs() {
        let a = mat(&[&[1.0, -1.0, 0.0], &[0.0, 1.0, -1.0], &[0.0, 0.0, 0.0]]);
        let svd = jacobi_svd(&a).unwrap();
        // singular values of the path Laplacian: sqrt(3), 1, 0
        assert!((svd.values[0] - 3f64.sqrt()).abs() < 1e-14);
        assert!((svd.values[1] - 1.0).abs() < 1e-14);
        assert!(svd.values[2].abs() < 1e-15);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3)
                    .map(|k| svd.u[(i, k)] * svd.values[k] * svd.v[(j, k)])
                    .sum();
                assert!((r - a[(i, j)]).abs() < 1e-14);
            }
        }
        // V is orthogonal
        let vtv = svd.v.transpose().mul(&svd.v);
        assert!(vtv.max_abs_diff(&SquareMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn solve_small_system() {
        let a = mat(&[&[0.0, 2.0], &[1.0, 1.0]]);
        let x = solve(&a, &[vec![2.0, 4.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(x, vec![vec![2.0, 3.0], vec![1.0, 2.0]]);
        assert!(solve(&mat(&[&[1.0, 1.0], &[1.0, 1.0]]), &[vec![1.0], vec![1.0]]).is_none());
    }
}
