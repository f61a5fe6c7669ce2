//! Finite-difference discretization of `R_Q` and `A_R = -(R_Q ·)'' + a(t)·`
//! on a uniform vertex grid, used only to cross-check the exact machinery.
//!
//! The grid has `h = 1/n` and unknowns at the interior points
//! `t_p = p h`, `p = 1..n(N+1)-1`. Values at `0` and `N+1` are zero, so the
//! boundary conditions are built into the unknowns. Shifts by an integer `j`
//! become offsets by `j n` grid points.

use nalgebra::{Complex, DMatrix, DVector};
use num_traits::Zero;

use crate::difference::{eigenvalues, spectrum, ShiftMatrix};
use crate::error::{Error, Result};
use crate::piecewise::{PiecewisePoly, Side};
use crate::poly::Poly;
use crate::rational::{frac, int, to_f64, Rational};
use crate::solver::{solve, BvpProblem, SolutionStatus};
use crate::Stencil;

/// Relative singular-value threshold for numerical kernel dimensions.
pub const SVD_THRESHOLD: f64 = 1e-8;
/// Condition number above which a grid solve is flagged.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct GridOperators {
    pub stencil: Stencil,
    /// Subdivisions per unit interval.
    pub n: usize,
    pub h: f64,
    /// Number of interior points, `n(N+1) - 1`.
    pub size: usize,
    /// `R_Q^h`, square, zero fill outside the interior.
    pub rq: DMatrix<f64>,
    /// `R_Q^h` including the rows for `t = 0` and `t = N+1`, where `R_Q v`
    /// is generally nonzero. Shape `(size + 2) x size`.
    pub rq_full: DMatrix<f64>,
    /// Second difference over `h^2` from all `size + 2` points to the interior.
    pub d2: DMatrix<f64>,
    /// `A_R^h = -D2 R_Q^h + diag(a)`.
    pub ar: DMatrix<f64>,
    pub a: Option<Vec<f64>>,
}

impl GridOperators {
    pub fn big_n(&self) -> usize {
        self.stencil.n()
    }

    /// Interior grid points as exact rationals.
    pub fn points(&self) -> Vec<Rational> {
        (1..=self.size as i64).map(|p| frac(p, self.n as i64)).collect()
    }

    pub fn points_f64(&self) -> Vec<f64> {
        (1..=self.size).map(|p| p as f64 * self.h).collect()
    }

    /// Samples of `f` at the interior points; at a jump the two one-sided
    /// limits are averaged.
    pub fn sample(&self, f: &PiecewisePoly) -> Result<Vec<f64>> {
        sample_at(f, &self.points())
    }
}

pub(crate) fn sample_at(f: &PiecewisePoly, points: &[Rational]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|t| {
            let l = f.limit(t, 0, Side::Left);
            let r = f.limit(t, 0, Side::Right);
            match (l, r) {
                (Ok(l), Ok(r)) => Ok(to_f64(&((l + r) / int(2)))),
                (Ok(v), Err(_)) | (Err(_), Ok(v)) => Ok(to_f64(&v)),
                (Err(e), Err(_)) => Err(e),
            }
        })
        .collect()
}

pub fn assemble(stencil: &Stencil, n: usize, a: Option<&PiecewisePoly>) -> Result<GridOperators> {
    if n < 4 {
        return Err(Error::InvalidGrid(format!("need n >= 4 subdivisions, got {n}")));
    }
    let big_n = stencil.n();
    let last = n * (big_n + 1);
    let size = last - 1;
    let h = 1.0 / n as f64;
    let coeffs: Vec<(i64, f64)> = (-(big_n as i64)..=big_n as i64)
        .map(|j| (j, to_f64(stencil.coeff(j))))
        .filter(|(_, b)| *b != 0.0)
        .collect();

    // Row p of rq_full is grid point p = 0..=last; column q is interior point q (1-based).
    let mut rq_full = DMatrix::zeros(size + 2, size);
    for p in 0..=last as i64 {
        for &(j, b) in &coeffs {
            let q = p + j * n as i64;
            if q >= 1 && q <= size as i64 {
                rq_full[(p as usize, q as usize - 1)] += b;
            }
        }
    }
    let rq = rq_full.rows(1, size).into_owned();
    let mut d2 = DMatrix::zeros(size, size + 2);
    let inv_h2 = 1.0 / (h * h);
    for i in 0..size {
        d2[(i, i)] = inv_h2;
        d2[(i, i + 1)] = -2.0 * inv_h2;
        d2[(i, i + 2)] = inv_h2;
    }
    let mut ar = -(&d2 * &rq_full);
    let mut a_samples = None;
    if let Some(a) = a {
        a.expect_domain(&Rational::zero(), &int(big_n as i64 + 1))?;
        let pts: Vec<Rational> = (1..=size as i64).map(|p| frac(p, n as i64)).collect();
        let s = sample_at(a, &pts)?;
        for (i, v) in s.iter().enumerate() {
            ar[(i, i)] += v;
        }
        a_samples = Some(s);
    }
    Ok(GridOperators {
        stencil: stencil.clone(),
        n,
        h,
        size,
        rq,
        rq_full,
        d2,
        ar,
        a: a_samples,
    })
}

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    /// `σ_max / σ_min` of `A_R^h`.
    pub condition: f64,
    pub ill_conditioned: bool,
    /// Set when the values are a least-squares solution.
    pub least_squares: bool,
}

/// Solves `A_R^h v = rhs`. Falls back to the minimum-norm least-squares
/// solution when the condition estimate exceeds [`ILL_CONDITIONED`].
pub fn solve_grid(ops: &GridOperators, rhs: &[f64]) -> Result<GridSolution> {
    if rhs.len() != ops.size {
        return Err(Error::InvalidGrid(format!(
            "right-hand side has {} samples, grid has {}",
            rhs.len(),
            ops.size
        )));
    }
    let b = DVector::from_column_slice(rhs);
    let svd = ops.ar.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let ill_conditioned = condition > ILL_CONDITIONED;
    let (values, least_squares) = if ill_conditioned {
        let x = svd
            .solve(&b, SVD_THRESHOLD * smax)
            .map_err(|e| Error::InvalidGrid(e.to_string()))?;
        (x, true)
    } else {
        let x = ops
            .ar
            .clone()
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidGrid("LU solve failed".into()))?;
        (x, false)
    };
    Ok(GridSolution {
        points: ops.points_f64(),
        values: values.iter().copied().collect(),
        condition,
        ill_conditioned,
        least_squares,
    })
}

/// Grid solve of the problem with boundary data: `y = f1` at grid points
/// `<= 0`, `y = f2` at points `>= N+1`, unknowns in between.
pub fn solve_grid_with_boundary(
    ops: &GridOperators,
    f0: &[f64],
    f1: &Poly,
    f2: &Poly,
) -> Result<GridSolution> {
    let n = ops.n as i64;
    let big_n = ops.big_n() as i64;
    let last = n * (big_n + 1);
    let known = |p: i64| -> f64 {
        let t = frac(p, n);
        if p <= 0 {
            to_f64(&f1.eval(&t))
        } else if p >= last {
            to_f64(&f2.eval(&t))
        } else {
            0.0
        }
    };
    let mut w_known = DVector::zeros(ops.size + 2);
    for p in 0..=last {
        for j in -big_n..=big_n {
            let b = to_f64(ops.stencil.coeff(j));
            if b != 0.0 {
                w_known[p as usize] += b * known(p + j * n);
            }
        }
    }
    let correction = &ops.d2 * w_known;
    let rhs: Vec<f64> = f0.iter().zip(correction.iter()).map(|(f, c)| f + c).collect();
    solve_grid(ops, &rhs)
}

/// Eigenvalues of `R_Q^h` compared with those of `R1`.
///
/// Offsets are multiples of `n`, so grid points with the same fractional
/// position form invariant subspaces. The `n - 1` off-node classes each carry
/// a copy of `R1`. The class of integer nodes `1..N` carries the interior
/// `N x N` block, which in this regime is singular; it is reported
/// separately in `nodal`.
#[derive(Debug, Clone)]
pub struct SpectrumComparison {
    pub n: usize,
    pub reference: Vec<Complex<f64>>,
    pub full: Vec<Complex<f64>>,
    pub off_node: Vec<Complex<f64>>,
    pub nodal: Vec<Complex<f64>>,
    /// Largest distance from an off-node eigenvalue to the reference set and
    /// back.
    pub max_deviation: f64,
    /// Each reference eigenvalue appears `n - 1` times (times its own
    /// multiplicity) among the off-node eigenvalues.
    pub multiplicities_match: bool,
}

impl SpectrumComparison {
    pub fn agrees(&self, tol: f64) -> bool {
        self.max_deviation <= tol && self.multiplicities_match
    }
}

fn hausdorff(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let one_way = |x: &[Complex<f64>], y: &[Complex<f64>]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

pub fn compare_spectrum(stencil: &Stencil, n: usize) -> Result<SpectrumComparison> {
    let ops = assemble(stencil, n, None)?;
    let reference = spectrum(&ShiftMatrix::build(stencil));
    let full = eigenvalues(&ops.rq);
    let (nodes, off): (Vec<usize>, Vec<usize>) = (0..ops.size).partition(|i| (i + 1) % n == 0);
    let sub = |idx: &[usize]| {
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| ops.rq[(idx[r], idx[c])])
    };
    let off_node = eigenvalues(&sub(&off));
    let nodal = eigenvalues(&sub(&nodes));
    let max_deviation = hausdorff(&off_node, &reference);

    // Cluster the reference spectrum, then count nearest assignments.
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for z in &reference {
        match clusters.iter_mut().find(|(c, _)| (c - z).norm() < 1e-6) {
            Some(c) => c.1 += 1,
            None => clusters.push((*z, 1)),
        }
    }
    let mut counts = vec![0usize; clusters.len()];
    for z in &off_node {
        let best = clusters
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 .0 - z).norm().total_cmp(&(b.1 .0 - z).norm()))
            .map(|(i, _)| i)
            .expect("nonempty reference spectrum");
        counts[best] += 1;
    }
    let multiplicities_match = clusters
        .iter()
        .zip(&counts)
        .all(|((_, mult), count)| *count == mult * (n - 1));
    Ok(SpectrumComparison {
        n,
        reference,
        full,
        off_node,
        nodal,
        max_deviation,
        multiplicities_match,
    })
}

#[derive(Debug, Clone)]
pub struct IndexEstimate {
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
}

impl IndexEstimate {
    pub fn index(&self) -> i64 {
        self.kernel_dim as i64 - self.cokernel_dim as i64
    }
}

fn near_zero_count(m: &DMatrix<f64>, rel: f64) -> (Vec<f64>, f64, usize) {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let threshold = rel * s.first().copied().unwrap_or(0.0);
    let count = s.iter().filter(|&&x| x < threshold).count();
    (s, threshold, count)
}

/// Kernel dimension from `A_R^h` and cokernel dimension from its transpose,
/// each by counting singular values below [`SVD_THRESHOLD`] relative to the
/// largest. The cokernel of a square matrix is computed as a separate
/// decomposition of the transpose.
pub fn index_estimate(ops: &GridOperators) -> IndexEstimate {
    let (singular_values, threshold, kernel_dim) = near_zero_count(&ops.ar, SVD_THRESHOLD);
    let (_, _, cokernel_dim) = near_zero_count(&ops.ar.transpose(), SVD_THRESHOLD);
    IndexEstimate {
        singular_values,
        threshold,
        kernel_dim,
        cokernel_dim,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub max_error: f64,
    /// `log2(e_prev / e)` relative to the previous row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn min_order(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.order)
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn final_error(&self) -> f64 {
        self.rows.last().map(|r| r.max_error).unwrap_or(f64::NAN)
    }
}

/// Max-node error of the grid solution against the exact solution, for each
/// `n` in `ns` (doubling sequence expected for the order estimate).
pub fn convergence_study(problem: &BvpProblem, ns: &[usize]) -> Result<ConvergenceStudy> {
    let family = solve(problem)?;
    if family.status != SolutionStatus::Unique {
        return Err(Error::InvalidGrid(format!(
            "convergence study needs a unique exact solution, got {:?}",
            family.status
        )));
    }
    let exact = family.particular.expect("unique solution present");
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in ns {
        let ops = assemble(&problem.stencil, n, None)?;
        let f0 = ops.sample(&problem.f0)?;
        let sol = if problem.is_homogeneous() {
            solve_grid(&ops, &f0)?
        } else {
            solve_grid_with_boundary(&ops, &f0, &problem.f1, &problem.f2)?
        };
        let reference = sample_at(&exact, &ops.points())?;
        let max_error = sol
            .values
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let order = rows
            .last()
            .map(|prev| (prev.max_error / max_error).ln() / (n as f64 / prev.n as f64).ln());
        rows.push(ConvergenceRow { n, max_error, order });
    }
    Ok(ConvergenceStudy { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::apply_rq;

    fn stencil(b: &[i64]) -> Stencil {
        Stencil::from_ints(b).unwrap()
    }

    #[test]
    fn identity_stencil_gives_identity() {
        let ops = assemble(&stencil(&[0, 1, 0]), 4, None).unwrap();
        assert_eq!(ops.rq, DMatrix::identity(7, 7));
    }

    #[test]
    fn swap_stencil_small_matrix() {
        // n = 4 is the smallest admissible grid; offsets are ±4.
        let ops = assemble(&stencil(&[1, 0, 1]), 4, None).unwrap();
        for i in 0usize..7 {
            for j in 0..7 {
                let expected = if i.abs_diff(j) == 4 { 1.0 } else { 0.0 };
                assert_eq!(ops.rq[(i, j)], expected, "({i}, {j})");
            }
        }
        assert!(assemble(&stencil(&[1, 0, 1]), 2, None).is_err());
    }

    #[test]
    fn grid_rq_matches_exact_rq() {
        let s = stencil(&[0, 1, 1, 1, 2]);
        // Continuous, zero at both ends.
        let v = PiecewisePoly::from_global(
            vec![int(0), int(1), int(3)],
            vec![Poly::new(vec![int(0), int(2), int(-1)]), Poly::new(vec![int(3), int(-1)])],
        )
        .unwrap();
        let ops = assemble(&s, 8, None).unwrap();
        let sampled = DVector::from_vec(ops.sample(&v).unwrap());
        let grid = &ops.rq * sampled;
        let exact = ops.sample(&apply_rq(&s, &v).unwrap()).unwrap();
        for (a, b) in grid.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_zero_solution() {
        let ops = assemble(&stencil(&[1, 0, 1]), 8, None).unwrap();
        let sol = solve_grid(&ops, &vec![0.0; ops.size]).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
        assert!(!sol.ill_conditioned);
    }

    #[test]
    fn off_node_spectrum_matches() {
        for b in [&[1, 0, 1][..], &[0, 1, 1, 1, 2], &[1, 1, 2, 4, 4]] {
            for n in [8, 16] {
                let cmp = compare_spectrum(&stencil(b), n).unwrap();
                assert!(cmp.agrees(1e-8), "{b:?} n={n} dev={}", cmp.max_deviation);
                assert_eq!(cmp.full.len(), cmp.off_node.len() + cmp.nodal.len());
            }
        }
    }

    #[test]
    fn rank_one_instance_has_numerical_kernel() {
        let ops = assemble(&stencil(&[1, 0, -1]), 16, None).unwrap();
        let est = index_estimate(&ops);
        assert_eq!(est.kernel_dim, 1);
        assert_eq!(est.cokernel_dim, 1);
        let sol = solve_grid(&ops, &vec![1.0; ops.size]).unwrap();
        assert!(sol.ill_conditioned && sol.least_squares);
    }
}
