//! Shift matrix of a difference stencil and the structural constants of the
//! regime `det R1 != 0, det R2 = 0`.
//!
//! Indices in the public API are 1-based, matching the usual `r_ik`
//! notation for the `(N+1)x(N+1)` matrix `r_ik = b_{k-i}`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rational::{int, to_f64, Rational};

/// Coefficients `b_{-N}, ..., b_N` of `(Ry)(t) = Σ b_j y(t + j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stencil {
    n: usize,
    coeffs: Vec<Rational>,
}

impl Stencil {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() < 3 || coeffs.len() % 2 == 0 {
            return Err(Error::InvalidStencil(format!(
                "expected 2N+1 >= 3 coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            n: (coeffs.len() - 1) / 2,
            coeffs,
        })
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&b| int(b)).collect())
    }

    /// Number of shifts on each side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `b_j` for `-N <= j <= N`, zero outside.
    pub fn coeff(&self, j: i64) -> &Rational {
        static ZERO: std::sync::OnceLock<Rational> = std::sync::OnceLock::new();
        let idx = j + self.n as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            return ZERO.get_or_init(Rational::zero);
        }
        &self.coeffs[idx as usize]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// The stencil of `t ↦ (Ry)(N+1-t)`, i.e. `b_j ↦ b_{-j}`.
    pub fn reversed(&self) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().rev().cloned().collect(),
        }
    }
}

impl fmt::Display for Stencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// `R1` with `r_ik = b_{k-i}` together with `det R1` and `det R2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftMatrix {
    entries: Matrix,
    det_r1: Rational,
    det_r2: Rational,
}

impl ShiftMatrix {
    pub fn build(stencil: &Stencil) -> Self {
        let size = stencil.n() + 1;
        let entries = Matrix::from_fn(size, size, |i, k| {
            stencil.coeff(k as i64 - i as i64).clone()
        });
        Self::from_matrix(entries)
    }

    /// Wrap an arbitrary square matrix (used for diagnostics and tests; the
    /// Toeplitz property is not enforced here).
    pub fn from_matrix(entries: Matrix) -> Self {
        let n = entries.rows() - 1;
        let leading: Vec<usize> = (0..n).collect();
        let det_r2 = entries.select(&leading, &leading).determinant();
        let det_r1 = entries.determinant();
        Self {
            entries,
            det_r1,
            det_r2,
        }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// `N + 1`
    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    /// `N`
    pub fn n(&self) -> usize {
        self.size() - 1
    }

    pub fn det_r1(&self) -> &Rational {
        &self.det_r1
    }

    pub fn det_r2(&self) -> &Rational {
        &self.det_r2
    }

    /// `r_ik`, 1-based.
    pub fn r(&self, i: usize, k: usize) -> &Rational {
        &self.entries[(i - 1, k - 1)]
    }

    pub fn is_toeplitz(&self) -> bool {
        let s = self.size();
        (0..s - 1).all(|i| (0..s - 1).all(|k| self.entries[(i + 1, k + 1)] == self.entries[(i, k)]))
    }

    /// Read the stencil back off the first row and column.
    pub fn to_stencil(&self) -> Stencil {
        let n = self.n() as i64;
        let coeffs = (-n..=n)
            .map(|j| {
                if j >= 0 {
                    self.entries[(0, j as usize)].clone()
                } else {
                    self.entries[((-j) as usize, 0)].clone()
                }
            })
            .collect();
        Stencil::new(coeffs).expect("2N+1 coefficients")
    }

    /// Signed cofactor `B_ik = (-1)^{i+k} det(R1 without row i, column k)`.
    pub fn cofactor(&self, i: usize, k: usize) -> Result<Rational> {
        let size = self.size();
        if i == 0 || k == 0 || i > size || k > size {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: k,
                size,
            });
        }
        let minor = self.entries.minor_matrix(i - 1, k - 1).determinant();
        Ok(if (i + k) % 2 == 0 { minor } else { -minor })
    }

    fn ensure_paper_regime(&self) -> Result<()> {
        match classify_regime(self).regime {
            Regime::PaperRegime => Ok(()),
            other => Err(Error::NotPaperRegime(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `det R1 != 0`, `det R2 = 0`.
    PaperRegime,
    /// `det R1 != 0`, `det R2 != 0`.
    NonsingularBoth,
    /// `det R1 = 0`.
    Degenerate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::PaperRegime => "det R1 != 0, det R2 = 0",
            Regime::NonsingularBoth => "det R1 != 0, det R2 != 0",
            Regime::Degenerate => "det R1 = 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeReport {
    pub det_r1: Rational,
    pub det_r2: Rational,
    pub regime: Regime,
}

pub fn classify_regime(m: &ShiftMatrix) -> RegimeReport {
    let regime = if m.det_r1.is_zero() {
        Regime::Degenerate
    } else if m.det_r2.is_zero() {
        Regime::PaperRegime
    } else {
        Regime::NonsingularBoth
    };
    RegimeReport {
        det_r1: m.det_r1.clone(),
        det_r2: m.det_r2.clone(),
        regime,
    }
}

/// Anchor `m` and the coefficients of the node conditions
///
/// ```text
/// u(N+1) = Σ_{i != m+1} γ1_i u(i-1),    u(m) = Σ_{i != m} γ2_i u(i)
/// ```
///
/// cutting out the image of the zero-trace class under `R_Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaData {
    pub n: usize,
    pub m: usize,
    /// Keys `1..=N`, `m` excluded.
    pub gamma2: BTreeMap<usize, Rational>,
    /// Keys `1..=N+1`, `m+1` excluded.
    pub gamma1: BTreeMap<usize, Rational>,
}

/// Row `i` of `R1` with the last column removed (`g_i`).
fn row_without_last(m: &ShiftMatrix, i: usize) -> Vec<Rational> {
    (1..=m.n()).map(|k| m.r(i, k).clone()).collect()
}

/// Row `i` of `R1` with the first column removed (`e_i`).
fn row_without_first(m: &ShiftMatrix, i: usize) -> Vec<Rational> {
    (2..=m.size()).map(|k| m.r(i, k).clone()).collect()
}

pub fn find_structure(m: &ShiftMatrix) -> Result<GammaData> {
    m.ensure_paper_regime()?;
    let n = m.n();
    let leading: Vec<usize> = (0..n).collect();
    let r2 = m.entries.select(&leading, &leading);
    let deps = r2.left_null_space();
    if deps.len() != 1 {
        return Err(Error::InternalRankError(format!(
            "rows g_1..g_N have a {}-dimensional dependency space, expected 1",
            deps.len()
        )));
    }
    let c = &deps[0];
    let m_idx = c.iter().position(|x| !x.is_zero()).expect("nonzero null vector") + 1;
    let cm = c[m_idx - 1].clone();
    let gamma2: BTreeMap<usize, Rational> = (1..=n)
        .filter(|&i| i != m_idx)
        .map(|i| (i, -(&c[i - 1] / &cm)))
        .collect();

    let g_basis: Vec<Vec<Rational>> = (1..=n + 1)
        .filter(|&j| j != m_idx)
        .map(|j| row_without_last(m, j))
        .collect();
    if Matrix::from_rows(g_basis).rank() != n {
        return Err(Error::InternalRankError(
            "rows g_j (j != m) do not span".into(),
        ));
    }

    let e_idx: Vec<usize> = (1..=n + 1).filter(|&i| i != m_idx + 1).collect();
    let e_rows: Vec<Vec<Rational>> = e_idx.iter().map(|&i| row_without_first(m, i)).collect();
    let e = Matrix::from_rows(e_rows);
    if e.rank() != n {
        return Err(Error::InternalRankError(
            "rows e_i (i != m+1) do not form a basis".into(),
        ));
    }
    let target = row_without_last(m, n + 1);
    let coeffs = e
        .transpose()
        .solve(&target)
        .ok_or_else(|| Error::InternalRankError("g_{N+1} outside span of e_i".into()))?;
    let gamma1 = e_idx.into_iter().zip(coeffs).collect();

    Ok(GammaData {
        n,
        m: m_idx,
        gamma2,
        gamma1,
    })
}

impl GammaData {
    /// Residual of `g_m - Σ γ2_i g_i` (zero vector when consistent).
    pub fn residual_g(&self, m: &ShiftMatrix) -> Vec<Rational> {
        let mut r = row_without_last(m, self.m);
        for (&i, g) in &self.gamma2 {
            for (x, y) in r.iter_mut().zip(row_without_last(m, i)) {
                *x -= g * y;
            }
        }
        r
    }

    /// Residual of `g_{N+1} - Σ γ1_i e_i`.
    pub fn residual_e(&self, m: &ShiftMatrix) -> Vec<Rational> {
        let mut r = row_without_last(m, self.n + 1);
        for (&i, g) in &self.gamma1 {
            for (x, y) in r.iter_mut().zip(row_without_first(m, i)) {
                *x -= g * y;
            }
        }
        r
    }
}

/// Mirrored characterization anchored at the left end:
///
/// ```text
/// u(0) = Σ_{i != m'} γ1'_i u(i)   (i = 1..N+1),
/// u(m') = Σ_{i != m'} γ2'_i u(i)  (i = 1..N)
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltGammaData {
    pub n: usize,
    pub m_prime: usize,
    pub gamma1: BTreeMap<usize, Rational>,
    pub gamma2: BTreeMap<usize, Rational>,
}

/// Built from the reflected problem `t ↦ N+1-t`, whose shift matrix is `R1ᵀ`.
pub fn find_alt_structure(m: &ShiftMatrix) -> Result<AltGammaData> {
    m.ensure_paper_regime()?;
    let n = m.n();
    let mirrored = ShiftMatrix::from_matrix(m.entries.transpose());
    let g = find_structure(&mirrored)?;
    let m_prime = n + 1 - g.m;
    let gamma1 = g
        .gamma1
        .iter()
        .map(|(&i, v)| (n + 2 - i, v.clone()))
        .collect();
    let gamma2 = g
        .gamma2
        .iter()
        .map(|(&i, v)| (n + 1 - i, v.clone()))
        .collect();
    Ok(AltGammaData {
        n,
        m_prime,
        gamma1,
        gamma2,
    })
}

/// First column of `R1` without its first row, last column without its last
/// row, and how they depend on each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndColumnData {
    pub g1_first: Vec<Rational>,
    pub g2_last: Vec<Rational>,
    pub dependent: bool,
    /// `α1 G1 + α2 G2 = 0`, first nonzero component normalized to 1.
    pub alpha: Option<(Rational, Rational)>,
    pub l: Option<usize>,
}

pub fn end_columns(m: &ShiftMatrix, g: &GammaData) -> Result<EndColumnData> {
    m.ensure_paper_regime()?;
    let n = m.n();
    let g1_first: Vec<Rational> = (2..=n + 1).map(|i| m.r(i, 1).clone()).collect();
    let g2_last: Vec<Rational> = (1..=n).map(|i| m.r(i, n + 1).clone()).collect();
    if g1_first.iter().all(Zero::is_zero) || g2_last.iter().all(Zero::is_zero) {
        return Err(Error::InternalRankError(
            "an end column vanishes although det R1 != 0 and det R2 = 0".into(),
        ));
    }
    let pair = Matrix::from_fn(n, 2, |i, j| {
        if j == 0 {
            g1_first[i].clone()
        } else {
            g2_last[i].clone()
        }
    });
    let null = pair.null_space();
    if null.is_empty() {
        return Ok(EndColumnData {
            g1_first,
            g2_last,
            dependent: false,
            alpha: None,
            l: None,
        });
    }
    let mut a = null[0].clone();
    let lead = a
        .iter()
        .find(|x| !x.is_zero())
        .cloned()
        .expect("nonzero null vector");
    for x in &mut a {
        *x /= &lead;
    }
    let rows: Vec<usize> = (0..n).filter(|&i| i + 1 != g.m).collect();
    let l = (1..=n)
        .find(|&l| {
            let cols: Vec<usize> = (0..n).filter(|&j| j + 1 != l).collect();
            !m.entries.select(&rows, &cols).determinant().is_zero()
        })
        .ok_or(Error::NoValidL)?;
    Ok(EndColumnData {
        g1_first,
        g2_last,
        dependent: true,
        alpha: Some((a[0].clone(), a[1].clone())),
        l: Some(l),
    })
}

/// Closed-form codimension and index counts at smoothness order `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexTable {
    pub k: usize,
    pub codim_rq: i64,
    pub codim_ar: i64,
    pub codim_br: i64,
    pub ind_lb: i64,
    pub ind_la: i64,
}

pub fn index_table(ends: &EndColumnData, k: usize) -> IndexTable {
    index_table_for(ends.dependent, k)
}

pub fn index_table_for(dependent: bool, k: usize) -> IndexTable {
    let k1 = k as i64 + 1;
    let (codim_rq, codim_ar) = if dependent {
        (k1 + 2, k1)
    } else {
        (2 * (k1 + 1), 2 * k1)
    };
    IndexTable {
        k,
        codim_rq,
        codim_ar,
        codim_br: 2 * k1,
        ind_lb: -2 * k1,
        ind_la: -codim_ar,
    }
}

/// Eigenvalues of `R1` in double precision, sorted by real then imaginary
/// part. Diagnostic only.
pub fn spectrum(m: &ShiftMatrix) -> Vec<Complex<f64>> {
    let size = m.size();
    let a = DMatrix::from_fn(size, size, |i, j| to_f64(&m.entries[(i, j)]));
    eigenvalues(&a)
}

/// Sorted eigenvalues of a real matrix. nalgebra's Schur iteration with the
/// default tolerance can stall on matrices with heavily repeated
/// eigenvalues, so symmetric input goes to the symmetric solver and the
/// general case runs bounded iterations over a short tolerance ladder, then
/// retries after random orthogonal similarity transforms. If everything
/// fails the result is NaN, which no comparison accepts.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let size = a.nrows();
    let mut eig: Vec<Complex<f64>> = if a == &a.transpose() {
        a.clone()
            .symmetric_eigenvalues()
            .iter()
            .map(|&x| Complex::new(x, 0.0))
            .collect()
    } else {
        general_eigenvalues(a).unwrap_or_else(|| vec![Complex::new(f64::NAN, f64::NAN); size])
    };
    sort_complex(&mut eig);
    eig
}

fn general_eigenvalues(a: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let size = a.nrows();
    let max_iter = 500 * size.max(1);
    let ladder = [4.0 * f64::EPSILON, 16.0 * f64::EPSILON, 1e-13, 1e-12];
    let attempt = |m: &DMatrix<f64>| {
        ladder.iter().find_map(|&eps| {
            Schur::try_new(m.clone(), eps, max_iter)
                .map(|s| s.complex_eigenvalues().iter().cloned().collect::<Vec<_>>())
        })
    };
    if let Some(e) = attempt(a) {
        return Some(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(size as u64);
    (0..4).find_map(|_| {
        let q = DMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0))
            .qr()
            .q();
        attempt(&(q.transpose() * a * &q))
    })
}

pub(crate) fn sort_complex(v: &mut [Complex<f64>]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Everything the solver and the constraint assembly need about a stencil in
/// the `det R1 != 0, det R2 = 0` regime.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub stencil: Stencil,
    pub matrix: ShiftMatrix,
    pub regime: RegimeReport,
    pub gamma: GammaData,
    pub alt: AltGammaData,
    pub ends: EndColumnData,
}

impl StructureReport {
    pub fn analyze(stencil: &Stencil) -> Result<Self> {
        let matrix = ShiftMatrix::build(stencil);
        let regime = classify_regime(&matrix);
        if regime.regime != Regime::PaperRegime {
            return Err(Error::NotPaperRegime(regime.regime));
        }
        let gamma = find_structure(&matrix)?;
        let alt = find_alt_structure(&matrix)?;
        let ends = end_columns(&matrix, &gamma)?;
        Ok(Self {
            stencil: stencil.clone(),
            matrix,
            regime,
            gamma,
            alt,
            ends,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn index_table(&self, k: usize) -> IndexTable {
        index_table(&self.ends, k)
    }

    /// Boundary-condition matrix of the integration constants `(d1, d2)`:
    /// the `μ = 0` node conditions applied to `d1 t + d2`.
    pub fn m_matrix(&self) -> Matrix {
        let g = &self.gamma;
        let n = self.n() as i64;
        let mut row0 = [int(n + 1), Rational::one()];
        for (&i, c) in &g.gamma1 {
            row0[0] -= c * int(i as i64 - 1);
            row0[1] -= c;
        }
        let mut row1 = [int(g.m as i64), Rational::one()];
        for (&i, c) in &g.gamma2 {
            row1[0] -= c * int(i as i64);
            row1[1] -= c;
        }
        Matrix::from_rows(vec![row0.to_vec(), row1.to_vec()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn sm(b: &[i64]) -> ShiftMatrix {
        ShiftMatrix::build(&Stencil::from_ints(b).unwrap())
    }

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    fn map(pairs: &[(usize, Rational)]) -> BTreeMap<usize, Rational> {
        pairs.iter().cloned().collect()
    }

    #[test]
    fn stencil_validation() {
        assert!(Stencil::from_ints(&[1, 2]).is_err());
        assert!(Stencil::from_ints(&[1]).is_err());
        let s = Stencil::from_ints(&[1, 2, 3]).unwrap();
        assert_eq!(s.n(), 1);
        assert_eq!(s.coeff(-1), &int(1));
        assert_eq!(s.coeff(1), &int(3));
        assert_eq!(s.coeff(2), &int(0));
    }

    #[test]
    fn builds_shift_matrices() {
        let a = sm(&[1, 0, 1]);
        assert_eq!(a.entries(), &mat(&[&[0, 1], &[1, 0]]));
        assert_eq!(a.det_r1(), &int(-1));
        assert_eq!(a.det_r2(), &int(0));

        let b = sm(&[0, 1, 1, 1, 2]);
        assert_eq!(b.entries(), &mat(&[&[1, 1, 2], &[1, 1, 1], &[0, 1, 1]]));
        assert_eq!(b.det_r1(), &int(1));
        assert_eq!(b.det_r2(), &int(0));

        let c = sm(&[0, 1, 0]);
        assert_eq!(c.entries(), &Matrix::identity(2));
        assert_eq!((c.det_r1(), c.det_r2()), (&int(1), &int(1)));
        assert!(a.is_toeplitz() && b.is_toeplitz());
        assert_eq!(b.to_stencil(), Stencil::from_ints(&[0, 1, 1, 1, 2]).unwrap());
    }

    #[test]
    fn classifies_regimes() {
        assert_eq!(classify_regime(&sm(&[1, 0, 1])).regime, Regime::PaperRegime);
        assert_eq!(classify_regime(&sm(&[0, 1, 0])).regime, Regime::NonsingularBoth);
        assert_eq!(classify_regime(&sm(&[0, 0, 0])).regime, Regime::Degenerate);
    }

    #[test]
    fn structure_of_named_stencils() {
        let g = find_structure(&sm(&[1, 0, 1])).unwrap();
        assert_eq!(g.m, 1);
        assert!(g.gamma2.is_empty());
        assert_eq!(g.gamma1, map(&[(1, int(1))]));

        let g = find_structure(&sm(&[0, 1, 1, 1, 2])).unwrap();
        assert_eq!(g.m, 1);
        assert_eq!(g.gamma2, map(&[(2, int(1))]));
        assert_eq!(g.gamma1, map(&[(1, int(1)), (3, int(-1))]));

        let m = ShiftMatrix::from_matrix(mat(&[&[2, 4, 4], &[1, 2, 4], &[1, 1, 2]]));
        let g = find_structure(&m).unwrap();
        assert_eq!(g.m, 1);
        assert_eq!(g.gamma2, map(&[(2, int(2))]));
        assert_eq!(g.gamma1, map(&[(1, frac(1, 4)), (3, int(0))]));
        assert!(g.residual_g(&m).iter().all(Zero::is_zero));
        assert!(g.residual_e(&m).iter().all(Zero::is_zero));
    }

    #[test]
    fn structure_refuses_other_regimes() {
        assert_eq!(
            find_structure(&sm(&[0, 1, 0])),
            Err(Error::NotPaperRegime(Regime::NonsingularBoth))
        );
        assert_eq!(
            find_alt_structure(&sm(&[0, 1, 0])),
            Err(Error::NotPaperRegime(Regime::NonsingularBoth))
        );
        assert!(matches!(
            StructureReport::analyze(&Stencil::from_ints(&[0, 0, 0]).unwrap()),
            Err(Error::NotPaperRegime(Regime::Degenerate))
        ));
    }

    #[test]
    fn alt_structure_antidiagonal() {
        let a = find_alt_structure(&sm(&[1, 0, 1])).unwrap();
        assert_eq!(a.m_prime, 1);
        assert_eq!(a.gamma1, map(&[(2, int(1))]));
        assert!(a.gamma2.is_empty());
    }

    #[test]
    fn end_column_cases() {
        let m = sm(&[0, 1, 1, 1, 2]);
        let e = end_columns(&m, &find_structure(&m).unwrap()).unwrap();
        assert_eq!(e.g1_first, vec![int(1), int(0)]);
        assert_eq!(e.g2_last, vec![int(2), int(1)]);
        assert!(!e.dependent);
        assert_eq!((e.alpha, e.l), (None, None));

        let m = sm(&[1, 1, 2, 4, 4]);
        let e = end_columns(&m, &find_structure(&m).unwrap()).unwrap();
        assert_eq!(e.g1_first, vec![int(1), int(1)]);
        assert_eq!(e.g2_last, vec![int(4), int(4)]);
        assert!(e.dependent);
        assert_eq!(e.alpha, Some((int(1), frac(-1, 4))));
        assert_eq!(e.l, Some(1));

        let m = sm(&[1, 0, 1]);
        let e = end_columns(&m, &find_structure(&m).unwrap()).unwrap();
        assert_eq!(e.g1_first, vec![int(1)]);
        assert_eq!(e.g2_last, vec![int(1)]);
        assert_eq!(e.alpha, Some((int(1), int(-1))));
        assert_eq!(e.l, Some(1));
    }

    #[test]
    fn cofactors() {
        let m = sm(&[1, 1, 2, 4, 4]);
        assert_eq!(m.cofactor(1, 1).unwrap(), int(0));
        assert_eq!(m.cofactor(3, 3).unwrap(), int(0));
        assert_eq!(m.cofactor(3, 1).unwrap(), int(8));
        assert_eq!(sm(&[0, 1, 0]).cofactor(1, 2).unwrap(), int(0));
        assert!(matches!(m.cofactor(0, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(m.cofactor(1, 4), Err(Error::IndexOutOfRange { .. })));
        // Laplace expansion along the first row reproduces det R1.
        let det = (1..=3).fold(int(0), |acc, k| acc + m.r(1, k) * m.cofactor(1, k).unwrap());
        assert_eq!(&det, m.det_r1());
    }

    #[test]
    fn index_tables() {
        let t = index_table_for(false, 0);
        assert_eq!((t.codim_rq, t.codim_ar, t.codim_br, t.ind_lb, t.ind_la), (4, 2, 2, -2, -2));
        let t = index_table_for(true, 0);
        assert_eq!((t.codim_rq, t.codim_ar, t.codim_br, t.ind_lb, t.ind_la), (3, 1, 2, -2, -1));
        let t = index_table_for(true, 2);
        assert_eq!((t.codim_rq, t.codim_ar), (5, 3));
        assert_eq!(index_table_for(true, 2), index_table_for(true, 2));
    }

    #[test]
    fn spectra() {
        let s = spectrum(&sm(&[1, 0, 1]));
        assert!((s[0] - Complex::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((s[1] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        let s = spectrum(&sm(&[0, 1, 0]));
        assert!(s.iter().all(|z| (z - Complex::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn m_matrix_worked_example() {
        let r = StructureReport::analyze(&Stencil::from_ints(&[1, 0, 1]).unwrap()).unwrap();
        assert_eq!(r.m_matrix(), mat(&[&[2, 0], &[1, 1]]));
    }
}
