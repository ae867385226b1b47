//! Continuous and discrete consensus dynamics on a fixed weighted digraph,
//! the Perron matrix checks, and the long-run transition matrix.

use std::io::{self, Write};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_CONTINUOUS_STRIDE: usize = 10;
pub const DEFAULT_DISCRETE_STRIDE: usize = 1;

/// Entry tolerance used when checking nonnegativity and row sums of `P`.
const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Continuous,
    Discrete,
}

/// Recorded agent states. Discrete runs use step indices as times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub mode: Mode,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory always holds x0")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,x0,...,x{n-1}`; values in scientific notation with
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let mut header = String::from("t");
        for i in 0..n {
            header.push_str(&format!(",x{i}"));
        }
        writeln!(out, "{header}")?;
        for (t, x) in self.times.iter().zip(&self.states) {
            write!(out, "{t:.16e}")?;
            for v in x {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn check_state(g: &Digraph, x0: &[f64]) -> Result<()> {
    if x0.len() != g.order() {
        return Err(Error::DimensionMismatch {
            expected: g.order(),
            actual: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "initial state must be finite".into(),
        ));
    }
    Ok(())
}

fn check_stride(stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1".into()));
    }
    Ok(())
}

/// `dx_i = sum_j a_ij (x_j - x_i)`, written into `out`.
fn consensus_rhs(g: &Digraph, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = g
            .out_neighbors(i)
            .iter()
            .map(|&(j, w)| w * (x[j] - x[i]))
            .sum();
    }
}

fn rk4_step(g: &Digraph, x: &mut [f64], h: f64, k: &mut [Vec<f64>; 4], tmp: &mut [f64]) {
    let n = x.len();
    consensus_rhs(g, x, &mut k[0]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k[0][i];
    }
    consensus_rhs(g, tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k[1][i];
    }
    consensus_rhs(g, tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = x[i] + h * k[2][i];
    }
    consensus_rhs(g, tmp, &mut k[3]);
    for i in 0..n {
        x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// One explicit Euler step of the continuous flow.
pub fn euler_step(g: &Digraph, x: &[f64], h: f64) -> Vec<f64> {
    let mut dx = vec![0.0; x.len()];
    consensus_rhs(g, x, &mut dx);
    x.iter().zip(dx).map(|(xi, di)| xi + h * di).collect()
}

/// Integrates `x' = -L x` with classical RK4, recording every 10th step.
pub fn simulate_continuous(g: &Digraph, x0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    simulate_continuous_strided(g, x0, t_end, dt, DEFAULT_CONTINUOUS_STRIDE)
}

/// Like [`simulate_continuous`] but records every `stride`-th step. The final
/// state is always recorded. If `dt` does not divide `t_end` the last step is
/// shortened to land on `t_end`.
pub fn simulate_continuous_strided(
    g: &Digraph,
    x0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::NonPositiveStepOrHorizon { dt, t_end });
    }
    check_state(g, x0)?;
    check_stride(stride)?;

    let ratio = t_end / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };

    let n = g.order();
    let mut x = x0.to_vec();
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x.clone()],
        mode: Mode::Continuous,
    };
    let mut t_prev = 0.0;
    for s in 1..=steps {
        let t = if s == steps { t_end } else { s as f64 * dt };
        rk4_step(g, &mut x, t - t_prev, &mut k, &mut tmp);
        t_prev = t;
        if s % stride == 0 || s == steps {
            traj.times.push(t);
            traj.states.push(x.clone());
        }
    }
    Ok(traj)
}

/// Iterates `x(k+1) = P x(k)` with `P = I - eps L`, recording every step.
pub fn simulate_discrete(g: &Digraph, eps: f64, x0: &[f64], steps: usize) -> Result<Trajectory> {
    simulate_discrete_strided(g, eps, x0, steps, DEFAULT_DISCRETE_STRIDE)
}

pub fn simulate_discrete_strided(
    g: &Digraph,
    eps: f64,
    x0: &[f64],
    steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    let p = g.perron_matrix(eps)?;
    check_state(g, x0)?;
    check_stride(stride)?;
    run_discrete(x0, steps, stride, |x| p.mul_vec(x))
}

/// Same iteration as [`simulate_discrete`], evaluated agent by agent as
/// `x_i += eps * sum_j a_ij (x_j - x_i)`.
pub fn simulate_discrete_elementwise(
    g: &Digraph,
    eps: f64,
    x0: &[f64],
    steps: usize,
) -> Result<Trajectory> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::NonPositiveStepSize(eps));
    }
    check_state(g, x0)?;
    let mut dx = vec![0.0; g.order()];
    run_discrete(x0, steps, 1, |x| {
        consensus_rhs(g, x, &mut dx);
        x.iter().zip(&dx).map(|(xi, di)| xi + eps * di).collect()
    })
}

fn run_discrete<F>(x0: &[f64], steps: usize, stride: usize, mut step: F) -> Result<Trajectory>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x.clone()],
        mode: Mode::Discrete,
    };
    for k in 1..=steps {
        x = step(&x);
        if k % stride == 0 || k == steps {
            traj.times.push(k as f64);
            traj.states.push(x.clone());
        }
    }
    Ok(traj)
}

/// `1 / (2 * max out-degree)`, or 0.5 for a graph without arcs.
pub fn default_step_size(g: &Digraph) -> f64 {
    let delta = g.max_out_degree();
    if delta > 0.0 {
        1.0 / (2.0 * delta)
    } else {
        0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerronProperties {
    pub nonnegative: bool,
    /// Nonnegative with every row summing to 1.
    pub row_stochastic: bool,
    /// Every diagonal entry of `P` is positive, i.e. `eps < 1 / max_degree`.
    pub positive_diagonal: bool,
    /// `eps <= 1 / max_degree`.
    pub within_threshold: bool,
}

pub fn perron_properties(g: &Digraph, eps: f64) -> Result<PerronProperties> {
    let p = g.perron_matrix(eps)?;
    let delta = g.max_out_degree();
    let n = g.order();

    let nonnegative = (0..n).all(|i| p.row(i).iter().all(|&v| v >= -STOCHASTIC_TOL));
    let sums_to_one = p
        .row_sums()
        .iter()
        .all(|s| (s - 1.0).abs() <= STOCHASTIC_TOL);
    let (within_threshold, positive_diagonal) = if delta == 0.0 {
        (true, true)
    } else {
        (eps <= 1.0 / delta, eps < 1.0 / delta)
    };
    Ok(PerronProperties {
        nonnegative,
        row_stochastic: nonnegative && sums_to_one,
        positive_diagonal,
        within_threshold,
    })
}

fn check_step_range(g: &Digraph, eps: f64, strict: bool) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::NonPositiveStepSize(eps));
    }
    let delta = g.max_out_degree();
    if delta == 0.0 {
        return Ok(());
    }
    let bound = 1.0 / delta;
    let inside = if strict { eps < bound } else { eps <= bound };
    if inside {
        Ok(())
    } else {
        Err(Error::StepSizeOutsideStochasticRange {
            eps,
            max_degree: delta,
        })
    }
}

/// Dense row-major `out = a * b`.
fn matmul(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            for (o, &bkj) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                *o += aik * bkj;
            }
        }
    }
}

fn flatten(m: &SquareMatrix) -> Vec<f64> {
    m.to_rows().concat()
}

fn unflatten(v: &[f64], n: usize) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = v[i * n + j];
        }
    }
    m
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc: f64, (x, y)| acc.max((x - y).abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongRunResult {
    /// `(1/m) * sum_{k=1..m} P^k`.
    pub matrix: SquareMatrix,
    pub m: usize,
    /// Max-norm distance between the averages after `m` and `m / 2` terms.
    pub residual: f64,
}

/// Cesaro average of the powers of `P`, accumulated one power at a time.
pub fn cesaro_limit(g: &Digraph, eps: f64, m: usize) -> Result<LongRunResult> {
    check_step_range(g, eps, false)?;
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 2, got {m}"
        )));
    }
    let n = g.order();
    let p = flatten(&g.perron_matrix(eps)?);
    let mut power = p.clone();
    let mut next = vec![0.0; n * n];
    let mut sum = p.clone();
    let mut half_avg = Vec::new();
    let half = m / 2;
    if half == 1 {
        half_avg = sum.clone();
    }
    for k in 2..=m {
        matmul(&power, &p, n, &mut next);
        std::mem::swap(&mut power, &mut next);
        for (s, v) in sum.iter_mut().zip(&power) {
            *s += v;
        }
        if k == half {
            half_avg = sum.iter().map(|s| s / k as f64).collect();
        }
    }
    let avg: Vec<f64> = sum.iter().map(|s| s / m as f64).collect();
    Ok(LongRunResult {
        residual: max_abs_diff(&avg, &half_avg),
        matrix: unflatten(&avg, n),
        m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLimit {
    pub matrix: SquareMatrix,
    /// Number of squarings performed; the result is `P^(2^doublings)`.
    pub doublings: usize,
    /// Max-norm change produced by the last squaring.
    pub residual: f64,
}

/// Limit of `P^k` by repeated squaring. Requires `eps < 1 / max_degree` so the
/// diagonal of `P` is positive and the plain powers converge.
pub fn power_limit(g: &Digraph, eps: f64, k_max: usize, tol: f64) -> Result<PowerLimit> {
    check_step_range(g, eps, true)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let n = g.order();
    let mut current = flatten(&g.perron_matrix(eps)?);
    let mut next = vec![0.0; n * n];
    let mut residual = f64::INFINITY;
    for doubling in 1..=k_max {
        matmul(&current, &current, n, &mut next);
        residual = max_abs_diff(&current, &next);
        std::mem::swap(&mut current, &mut next);
        if residual <= tol {
            return Ok(PowerLimit {
                matrix: unflatten(&current, n),
                doublings: doubling,
                residual,
            });
        }
    }
    Err(Error::NoConvergenceWithinBudget(k_max, residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> Digraph {
        Digraph::unit(2, [(0, 1), (1, 0)]).unwrap()
    }

    fn path3() -> Digraph {
        Digraph::unit(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn max_dev(a: &[f64], b: &[f64]) -> f64 {
        max_abs_diff(a, b)
    }

    #[test]
    fn continuous_on_empty_graph_is_constant() {
        let g = Digraph::empty(3).unwrap();
        let tr = simulate_continuous(&g, &[1.0, -2.0, 3.5], 1.0, 0.01).unwrap();
        assert!(tr.states.iter().all(|x| x == &[1.0, -2.0, 3.5]));
        assert_eq!(tr.len(), 11);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn continuous_two_cycle_matches_closed_form() {
        // x(t) = (1, 1) + exp(-2t) (-1, 1)
        let tr = simulate_continuous(&two_cycle(), &[0.0, 2.0], 20.0, 0.01).unwrap();
        assert!(max_dev(tr.final_state(), &[1.0, 1.0]) < 1e-6);
        let tr = simulate_continuous_strided(&two_cycle(), &[0.0, 2.0], 0.5, 0.01, 1).unwrap();
        let e = (-1.0f64).exp();
        assert!(max_dev(tr.final_state(), &[1.0 - e, 1.0 + e]) < 1e-9);
    }

    #[test]
    fn continuous_path_adopts_root_value() {
        let tr = simulate_continuous(&path3(), &[5.0, 3.0, 7.0], 50.0, 0.01).unwrap();
        assert!(max_dev(tr.final_state(), &[7.0, 7.0, 7.0]) < 1e-6);
    }

    #[test]
    fn continuous_zero_horizon_and_uneven_steps() {
        let tr = simulate_continuous(&two_cycle(), &[0.0, 2.0], 0.0, 0.01).unwrap();
        assert_eq!(tr.states, vec![vec![0.0, 2.0]]);
        let tr = simulate_continuous_strided(&two_cycle(), &[0.0, 2.0], 0.25, 0.1, 1).unwrap();
        assert_eq!(tr.times.len(), 4);
        assert_eq!(*tr.times.last().unwrap(), 0.25);
    }

    #[test]
    fn continuous_errors() {
        let g = two_cycle();
        assert!(matches!(
            simulate_continuous(&g, &[0.0, 1.0], 1.0, 0.0),
            Err(Error::NonPositiveStepOrHorizon { .. })
        ));
        assert!(matches!(
            simulate_continuous(&g, &[0.0, 1.0], -1.0, 0.1),
            Err(Error::NonPositiveStepOrHorizon { .. })
        ));
        assert_eq!(
            simulate_continuous(&g, &[0.0], 1.0, 0.1),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn discrete_examples() {
        let tr = simulate_discrete(&Digraph::empty(2).unwrap(), 0.3, &[4.0, -1.0], 5).unwrap();
        assert!(tr.states.iter().all(|x| x == &[4.0, -1.0]));

        let tr = simulate_discrete(&two_cycle(), 0.5, &[0.0, 2.0], 4).unwrap();
        for x in &tr.states[1..] {
            assert_eq!(x, &[1.0, 1.0]);
        }

        let tr = simulate_discrete(&two_cycle(), 1.0, &[0.0, 2.0], 4).unwrap();
        assert_eq!(
            tr.states,
            vec![
                vec![0.0, 2.0],
                vec![2.0, 0.0],
                vec![0.0, 2.0],
                vec![2.0, 0.0],
                vec![0.0, 2.0]
            ]
        );
        assert_eq!(tr.times, vec![0.0, 1.0, 2.0, 3.0, 4.0]);

        let tr = simulate_discrete(&two_cycle(), 0.5, &[0.0, 2.0], 0).unwrap();
        assert_eq!(tr.states, vec![vec![0.0, 2.0]]);
        assert!(matches!(
            simulate_discrete(&two_cycle(), 0.0, &[0.0, 2.0], 3),
            Err(Error::NonPositiveStepSize(_))
        ));
        assert!(matches!(
            simulate_discrete(&two_cycle(), 0.5, &[0.0, 2.0, 1.0], 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matrix_and_elementwise_forms_agree() {
        let g = Digraph::new(
            4,
            [
                (0, 1, 0.7),
                (1, 2, 1.3),
                (2, 0, 0.4),
                (3, 2, 2.0),
                (2, 3, 0.1),
            ],
        )
        .unwrap();
        let eps = default_step_size(&g);
        let x0 = [1.0, -3.0, 2.5, 8.0];
        let a = simulate_discrete(&g, eps, &x0, 200).unwrap();
        let b = simulate_discrete_elementwise(&g, eps, &x0, 200).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(max_dev(x, y) <= 1e-12);
        }
    }

    #[test]
    fn strided_recording_keeps_final_state() {
        let tr = simulate_discrete_strided(&two_cycle(), 0.25, &[0.0, 2.0], 7, 3).unwrap();
        assert_eq!(tr.times, vec![0.0, 3.0, 6.0, 7.0]);
        assert!(simulate_discrete_strided(&two_cycle(), 0.25, &[0.0, 2.0], 7, 0).is_err());
    }

    #[test]
    fn csv_export() {
        let tr = simulate_discrete(&two_cycle(), 1.0, &[0.0, 0.1], 1).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x0,x1"));
        assert_eq!(
            lines.next(),
            Some("0.0000000000000000e0,0.0000000000000000e0,1.0000000000000001e-1")
        );
        let last: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(last, vec![1.0, 0.1, 0.0]);
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn perron_property_examples() {
        let g = two_cycle();
        let p = perron_properties(&g, 0.5).unwrap();
        assert!(p.nonnegative && p.row_stochastic && p.positive_diagonal && p.within_threshold);

        let p = perron_properties(&g, 1.0).unwrap();
        assert!(p.nonnegative && p.row_stochastic && p.within_threshold);
        assert!(!p.positive_diagonal);

        let p = perron_properties(&g, 2.0).unwrap();
        assert!(!p.nonnegative && !p.within_threshold && !p.row_stochastic);

        let p = perron_properties(&Digraph::empty(2).unwrap(), 100.0).unwrap();
        assert!(p.within_threshold && p.positive_diagonal && p.row_stochastic);
        assert!(perron_properties(&g, 0.0).is_err());
    }

    #[test]
    fn cesaro_permutation_average_is_exact() {
        for m in [2, 10, 1000] {
            let r = cesaro_limit(&two_cycle(), 1.0, m).unwrap();
            assert_eq!(r.matrix.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
            assert_eq!(r.m, m);
        }
        let odd = cesaro_limit(&two_cycle(), 1.0, 3).unwrap();
        assert!((odd.matrix[(0, 1)] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cesaro_examples() {
        let r = cesaro_limit(&Digraph::empty(3).unwrap(), 0.7, 50).unwrap();
        assert_eq!(r.matrix, SquareMatrix::identity(3));
        assert_eq!(r.residual, 0.0);

        let r = cesaro_limit(&path3(), 0.5, 10_000).unwrap();
        let j = SquareMatrix::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(r.matrix.max_abs_diff(&j) < 1e-2);
        assert!(r.residual < 1e-2);

        assert!(matches!(
            cesaro_limit(&path3(), 1.5, 10),
            Err(Error::StepSizeOutsideStochasticRange { .. })
        ));
        assert!(matches!(
            cesaro_limit(&path3(), 0.5, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn power_limit_examples() {
        let r = power_limit(&Digraph::empty(3).unwrap(), 0.5, 64, 1e-12).unwrap();
        assert_eq!(r.matrix, SquareMatrix::identity(3));
        assert_eq!(r.doublings, 1);

        let r = power_limit(&two_cycle(), 0.5, 64, 1e-12).unwrap();
        assert_eq!(r.matrix.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!((r.doublings, r.residual), (1, 0.0));

        assert!(matches!(
            power_limit(&two_cycle(), 1.0, 64, 1e-12),
            Err(Error::StepSizeOutsideStochasticRange { .. })
        ));
        assert!(matches!(
            power_limit(&path3(), 0.01, 2, 1e-12),
            Err(Error::NoConvergenceWithinBudget(2, _))
        ));
    }

    #[test]
    fn euler_and_rk4_agree_to_second_order() {
        let g = Digraph::new(3, [(0, 1, 1.0), (1, 2, 0.5), (2, 0, 2.0)]).unwrap();
        let x0 = [1.0, -1.0, 4.0];
        let gap = |dt: f64| {
            let rk = simulate_continuous_strided(&g, &x0, dt, dt, 1).unwrap();
            max_dev(&euler_step(&g, &x0, dt), rk.final_state())
        };
        let ratio = gap(1e-2) / gap(1e-3);
        assert!((80.0..120.0).contains(&ratio), "ratio {ratio}");
        // one discrete step with eps = dt is one Euler step
        let d = simulate_discrete(&g, 1e-3, &x0, 1).unwrap();
        assert!(max_dev(d.final_state(), &euler_step(&g, &x0, 1e-3)) < 1e-15);
    }
}
