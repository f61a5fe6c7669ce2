//! Piecewise polynomials on an interval with rational breakpoints.
//!
//! Each piece is stored in the local coordinate `t - x_i` of its left
//! breakpoint `x_i`. Everything is exact; the only floating point entry
//! points are [`PiecewisePoly::sample`] and [`PiecewisePoly::eval_f64`].

use std::fmt;

use num_traits::{One, Zero};

use crate::difference::{ShiftMatrix, Stencil};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Poly;
use crate::rational::{int, to_f64, Rational};

/// Degree ceiling applied to solver inputs and intermediate results.
pub const DEFAULT_DEGREE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewisePoly {
    breaks: Vec<Rational>,
    pieces: Vec<Poly>,
}

/// Which one-sided limit to take at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl PiecewisePoly {
    /// Pieces are given in local coordinates.
    pub fn new(breaks: Vec<Rational>, pieces: Vec<Poly>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidPiecewise(
                "at least two breakpoints are required".into(),
            ));
        }
        if pieces.len() != breaks.len() - 1 {
            return Err(Error::InvalidPiecewise(format!(
                "{} breakpoints need {} pieces, got {}",
                breaks.len(),
                breaks.len() - 1,
                pieces.len()
            )));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPiecewise(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breaks, pieces })
    }

    /// Pieces are given in the global coordinate `t`.
    pub fn from_global(breaks: Vec<Rational>, global: Vec<Poly>) -> Result<Self> {
        let pieces = global
            .iter()
            .zip(&breaks)
            .map(|(p, x)| p.shift(x))
            .collect();
        Self::new(breaks, pieces)
    }

    /// A single global polynomial on `(start, end)`, split at `breaks`.
    pub fn from_poly(start: Rational, end: Rational, p: &Poly) -> Result<Self> {
        let piece = p.shift(&start);
        Self::new(vec![start, end], vec![piece])
    }

    pub fn zero(start: Rational, end: Rational) -> Result<Self> {
        Self::new(vec![start, end], vec![Poly::zero()])
    }

    pub fn constant(start: Rational, end: Rational, c: Rational) -> Result<Self> {
        Self::new(vec![start, end], vec![Poly::constant(c)])
    }

    /// Unit pieces on `(0, count)` from global-coordinate polynomials.
    pub fn on_unit_pieces(global: Vec<Poly>) -> Result<Self> {
        let breaks = (0..=global.len() as i64).map(int).collect();
        Self::from_global(breaks, global)
    }

    pub fn start(&self) -> &Rational {
        &self.breaks[0]
    }

    pub fn end(&self) -> &Rational {
        self.breaks.last().expect("nonempty")
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn check_degree_cap(&self, cap: usize) -> Result<()> {
        let degree = self.max_degree();
        if degree > cap {
            return Err(Error::DegreeCapExceeded { degree, cap });
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(Poly::is_zero)
    }

    /// Global-coordinate polynomial of piece `i`.
    pub fn global_piece(&self, i: usize) -> Poly {
        self.pieces[i].shift(&-&self.breaks[i])
    }

    fn check_same_domain(&self, other: &Self) -> Result<()> {
        if self.start() != other.start() || self.end() != other.end() {
            return Err(Error::DomainMismatch {
                expected_start: self.start().clone(),
                expected_end: self.end().clone(),
                found_start: other.start().clone(),
                found_end: other.end().clone(),
            });
        }
        Ok(())
    }

    pub fn expect_domain(&self, start: &Rational, end: &Rational) -> Result<()> {
        if self.start() != start || self.end() != end {
            return Err(Error::DomainMismatch {
                expected_start: start.clone(),
                expected_end: end.clone(),
                found_start: self.start().clone(),
                found_end: self.end().clone(),
            });
        }
        Ok(())
    }

    /// Insert extra breakpoints (points outside the open domain are ignored).
    pub fn refine(&self, points: &[Rational]) -> Self {
        let mut breaks = self.breaks.clone();
        breaks.extend(
            points
                .iter()
                .filter(|p| *p > self.start() && *p < self.end())
                .cloned(),
        );
        breaks.sort();
        breaks.dedup();
        if breaks.len() == self.breaks.len() {
            return self.clone();
        }
        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        let mut owner = 0;
        for left in &breaks[..breaks.len() - 1] {
            while &self.breaks[owner + 1] <= left {
                owner += 1;
            }
            pieces.push(self.pieces[owner].shift(&(left - &self.breaks[owner])));
        }
        Self { breaks, pieces }
    }

    /// Combine piecewise with another function on the same domain.
    pub fn zip_with(&self, other: &Self, f: impl Fn(&Poly, &Poly) -> Poly) -> Result<Self> {
        self.check_same_domain(other)?;
        let a = self.refine(&other.breaks);
        let b = other.refine(&self.breaks);
        let pieces = a.pieces.iter().zip(&b.pieces).map(|(p, q)| f(p, q)).collect();
        Ok(Self {
            breaks: a.breaks,
            pieces,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |p, q| p + q)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |p, q| p - q)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |p, q| p * q)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn map_pieces(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(f).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        self.map_pieces(Poly::derivative)
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        self.map_pieces(|p| p.nth_derivative(n))
    }

    /// Continuous antiderivative equal to `c0` at the left endpoint.
    pub fn antiderivative(&self, c0: Rational) -> Self {
        let mut running = c0;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let q = p.antiderivative(running.clone());
            running = q.eval(&(&self.breaks[i + 1] - &self.breaks[i]));
            pieces.push(q);
        }
        Self {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// `t ↦ ∫_start^t (t - τ) f(τ) dτ`, the second antiderivative vanishing
    /// with its derivative at the left endpoint.
    pub fn double_integral(&self) -> Self {
        self.antiderivative(Rational::zero())
            .antiderivative(Rational::zero())
    }

    pub fn definite_integral(&self, a: &Rational, b: &Rational) -> Result<Rational> {
        let anti = self.antiderivative(Rational::zero());
        Ok(anti.value_at(b, 0)? - anti.value_at(a, 0)?)
    }

    pub fn inner_product(&self, other: &Self) -> Result<Rational> {
        let prod = self.mul(other)?;
        prod.definite_integral(prod.start(), prod.end())
    }

    /// `∫_0^i (i - τ) f(τ) dτ` for a function on `(0, ·)`.
    pub fn moment_phi(&self, i: &Rational) -> Result<Rational> {
        if !self.start().is_zero() {
            return Err(Error::DomainMismatch {
                expected_start: Rational::zero(),
                expected_end: self.end().clone(),
                found_start: self.start().clone(),
                found_end: self.end().clone(),
            });
        }
        self.double_integral().value_at(i, 0)
    }

    fn piece_index(&self, x: &Rational, side: Side) -> Result<usize> {
        let n = self.pieces.len();
        let ok = match side {
            Side::Left => x > self.start() && x <= self.end(),
            Side::Right => x >= self.start() && x < self.end(),
        };
        if !ok {
            return Err(Error::OutOfDomain(x.clone()));
        }
        // Pieces are few; a linear scan keeps the tie-breaking explicit.
        let idx = (0..n)
            .find(|&i| match side {
                Side::Left => x > &self.breaks[i] && x <= &self.breaks[i + 1],
                Side::Right => x >= &self.breaks[i] && x < &self.breaks[i + 1],
            })
            .expect("x is inside the domain");
        Ok(idx)
    }

    /// One-sided limit of `f^{(order)}` at `x`.
    pub fn limit(&self, x: &Rational, order: usize, side: Side) -> Result<Rational> {
        let i = self.piece_index(x, side)?;
        Ok(self.pieces[i].derivative_at(order, &(x - &self.breaks[i])))
    }

    /// `f^{(order)}(x)`: one-sided at the endpoints, and at interior points the
    /// common value of both limits.
    pub fn value_at(&self, x: &Rational, order: usize) -> Result<Rational> {
        if x == self.start() {
            return self.limit(x, order, Side::Right);
        }
        if x == self.end() {
            return self.limit(x, order, Side::Left);
        }
        let left = self.limit(x, order, Side::Left)?;
        if self.breaks.binary_search(x).is_err() {
            return Ok(left);
        }
        let right = self.limit(x, order, Side::Right)?;
        if left != right {
            return Err(Error::DiscontinuousTrace {
                node: x.clone(),
                order,
            });
        }
        Ok(left)
    }

    /// Jump `f^{(order)}(x+0) - f^{(order)}(x-0)` at an interior point.
    pub fn jump(&self, x: &Rational, order: usize) -> Result<Rational> {
        Ok(self.limit(x, order, Side::Right)? - self.limit(x, order, Side::Left)?)
    }

    /// `t ↦ f(t + delta)`, defined on the domain shifted by `-delta`.
    pub fn translate(&self, delta: &Rational) -> Self {
        Self {
            breaks: self.breaks.iter().map(|b| b - delta).collect(),
            pieces: self.pieces.clone(),
        }
    }

    pub fn restrict(&self, a: &Rational, b: &Rational) -> Result<Self> {
        if a < self.start() || b > self.end() || a >= b {
            return Err(Error::DomainMismatch {
                expected_start: self.start().clone(),
                expected_end: self.end().clone(),
                found_start: a.clone(),
                found_end: b.clone(),
            });
        }
        let refined = self.refine(&[a.clone(), b.clone()]);
        let lo = refined.breaks.iter().position(|x| x == a).expect("refined");
        let hi = refined.breaks.iter().position(|x| x == b).expect("refined");
        Ok(Self {
            breaks: refined.breaks[lo..=hi].to_vec(),
            pieces: refined.pieces[lo..hi].to_vec(),
        })
    }

    /// Zero extension to `(a, b) ⊇ (start, end)`.
    pub fn extend_zero(&self, a: &Rational, b: &Rational) -> Result<Self> {
        if a > self.start() || b < self.end() {
            return Err(Error::DomainMismatch {
                expected_start: self.start().clone(),
                expected_end: self.end().clone(),
                found_start: a.clone(),
                found_end: b.clone(),
            });
        }
        let mut breaks = Vec::new();
        let mut pieces = Vec::new();
        if a < self.start() {
            breaks.push(a.clone());
            pieces.push(Poly::zero());
        }
        breaks.extend(self.breaks.iter().cloned());
        pieces.extend(self.pieces.iter().cloned());
        if b > self.end() {
            breaks.push(b.clone());
            pieces.push(Poly::zero());
        }
        Self::new(breaks, pieces)
    }

    /// Join functions on adjacent intervals.
    pub fn concat(parts: &[PiecewisePoly]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidPiecewise("nothing to concatenate".into()))?;
        let mut breaks = first.breaks.clone();
        let mut pieces = first.pieces.clone();
        for part in &parts[1..] {
            if breaks.last() != Some(part.start()) {
                return Err(Error::InvalidPiecewise(
                    "concatenated parts must be adjacent".into(),
                ));
            }
            breaks.extend(part.breaks[1..].iter().cloned());
            pieces.extend(part.pieces.iter().cloned());
        }
        Self::new(breaks, pieces)
    }

    /// Merge neighbouring pieces that are the same polynomial.
    pub fn simplify(&self) -> Self {
        let mut breaks = vec![self.breaks[0].clone()];
        let mut pieces: Vec<Poly> = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            if let Some(last) = pieces.last() {
                let last_start = &breaks[breaks.len() - 2];
                if last.shift(&(&self.breaks[i] - last_start)) == *p {
                    *breaks.last_mut().expect("nonempty") = self.breaks[i + 1].clone();
                    continue;
                }
            }
            pieces.push(p.clone());
            breaks.push(self.breaks[i + 1].clone());
        }
        Self { breaks, pieces }
    }

    /// Floating point value inside the domain (right-continuous at breakpoints,
    /// left limit at the right endpoint).
    pub fn eval_f64(&self, t: f64, order: usize) -> f64 {
        let n = self.pieces.len();
        let idx = (0..n)
            .find(|&i| t < to_f64(&self.breaks[i + 1]))
            .unwrap_or(n - 1);
        let local = t - to_f64(&self.breaks[idx]);
        self.pieces[idx].nth_derivative(order).eval_f64(local)
    }

    /// `(t, f(t))` on the grid `start, start + step, ...` up to the end.
    pub fn sample(&self, step: f64) -> Vec<(f64, f64)> {
        let a = to_f64(self.start());
        let b = to_f64(self.end());
        let count = ((b - a) / step).floor() as usize;
        let mut out: Vec<(f64, f64)> = (0..=count)
            .map(|i| a + i as f64 * step)
            .filter(|t| *t <= b)
            .map(|t| (t, self.eval_f64(t, 0)))
            .collect();
        if out.last().is_none_or(|(t, _)| (*t - b).abs() > 1e-12 * b.abs().max(1.0)) {
            out.push((b, self.eval_f64(b, 0)));
        }
        out
    }

    /// One-sided limits of orders `0..=max_order` at every breakpoint.
    pub fn node_traces(&self, max_order: usize) -> NodeTraces {
        let mut entries = Vec::new();
        for x in &self.breaks {
            for order in 0..=max_order {
                let left = self.limit(x, order, Side::Left).ok();
                let right = self.limit(x, order, Side::Right).ok();
                let jump = match (&left, &right) {
                    (Some(l), Some(r)) => Some(r - l),
                    _ => None,
                };
                entries.push(NodeTrace {
                    node: x.clone(),
                    order,
                    left,
                    right,
                    jump,
                });
            }
        }
        NodeTraces { entries }
    }

    /// Nonzero endpoint traces and interior jumps of orders `0..k`.
    ///
    /// An empty result means the function belongs to the zero-trace Sobolev
    /// class of order `k` (in piecewise-polynomial form).
    pub fn zero_trace_defects(&self, k: usize) -> Vec<TraceDefect> {
        let mut out = self.jump_defects(k);
        for order in 0..k {
            for (x, side) in [(self.start(), Side::Right), (self.end(), Side::Left)] {
                let v = self.limit(x, order, side).expect("endpoint");
                if !v.is_zero() {
                    out.push(TraceDefect {
                        node: x.clone(),
                        order,
                        kind: DefectKind::EndpointTrace,
                        value: v,
                    });
                }
            }
        }
        out
    }

    /// Nonzero interior jumps of orders `0..k` (empty iff globally `W^k`).
    pub fn jump_defects(&self, k: usize) -> Vec<TraceDefect> {
        let mut out = Vec::new();
        for x in &self.breaks[1..self.breaks.len() - 1] {
            for order in 0..k {
                let j = self.jump(x, order).expect("interior");
                if !j.is_zero() {
                    out.push(TraceDefect {
                        node: x.clone(),
                        order,
                        kind: DefectKind::Jump,
                        value: j,
                    });
                }
            }
        }
        out
    }

    pub fn in_zero_trace_class(&self, k: usize) -> bool {
        self.zero_trace_defects(k).is_empty()
    }

    pub fn is_globally_smooth(&self, k: usize) -> bool {
        self.jump_defects(k).is_empty()
    }
}

impl fmt::Display for PiecewisePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(
                f,
                "({}, {}): {} [local t - {}]",
                self.breaks[i],
                self.breaks[i + 1],
                p,
                self.breaks[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTrace {
    pub node: Rational,
    pub order: usize,
    pub left: Option<Rational>,
    pub right: Option<Rational>,
    /// `right - left`; absent at the endpoints.
    pub jump: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTraces {
    pub entries: Vec<NodeTrace>,
}

impl NodeTraces {
    pub fn get(&self, node: &Rational, order: usize) -> Option<&NodeTrace> {
        self.entries
            .iter()
            .find(|e| &e.node == node && e.order == order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    EndpointTrace,
    Jump,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDefect {
    pub node: Rational,
    pub order: usize,
    pub kind: DefectKind,
    pub value: Rational,
}

/// Split a function on `(0, N+1)` into its `N+1` unit-interval restrictions,
/// each expressed on `(0, 1)` with a common set of breakpoints.
pub fn vectorize(f: &PiecewisePoly) -> Result<Vec<PiecewisePoly>> {
    let count = unit_count(f)?;
    let integer_nodes: Vec<Rational> = (1..count as i64).map(int).collect();
    let f = f.refine(&integer_nodes);
    let mut local_breaks: Vec<Rational> = f
        .breaks
        .iter()
        .map(|x| x - x.floor())
        .filter(|x| !x.is_zero())
        .collect();
    local_breaks.sort();
    local_breaks.dedup();
    let components = (0..count)
        .map(|k| {
            let shift = int(k as i64);
            let shifted: Vec<Rational> = local_breaks.iter().map(|b| b + &shift).collect();
            f.restrict(&shift, &(&shift + Rational::one()))
                .expect("unit interval inside domain")
                .refine(&shifted)
                .translate(&shift)
        })
        .collect();
    Ok(components)
}

/// Inverse of [`vectorize`].
pub fn devectorize(components: &[PiecewisePoly]) -> Result<PiecewisePoly> {
    let parts: Vec<PiecewisePoly> = components
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.expect_domain(&Rational::zero(), &Rational::one())?;
            Ok(c.translate(&-int(k as i64)))
        })
        .collect::<Result<_>>()?;
    PiecewisePoly::concat(&parts)
}

fn unit_count(f: &PiecewisePoly) -> Result<usize> {
    let end = f.end();
    if !f.start().is_zero() || !end.is_integer() || end < &int(1) {
        return Err(Error::DomainMismatch {
            expected_start: Rational::zero(),
            expected_end: end.ceil(),
            found_start: f.start().clone(),
            found_end: end.clone(),
        });
    }
    Ok(end.to_integer().try_into().expect("small domain"))
}

/// Multiply the vectorized components by a square matrix.
pub fn apply_block_matrix(matrix: &Matrix, f: &PiecewisePoly) -> Result<PiecewisePoly> {
    let comps = vectorize(f)?;
    if comps.len() != matrix.rows() {
        return Err(Error::DomainMismatch {
            expected_start: Rational::zero(),
            expected_end: int(matrix.rows() as i64),
            found_start: f.start().clone(),
            found_end: f.end().clone(),
        });
    }
    let n = comps.len();
    let breaks = comps[0].breaks.clone();
    let out: Vec<PiecewisePoly> = (0..n)
        .map(|i| {
            let pieces = (0..breaks.len() - 1)
                .map(|p| {
                    (0..n).fold(Poly::zero(), |acc, k| {
                        &acc + &comps[k].pieces[p].scale(&matrix[(i, k)])
                    })
                })
                .collect();
            PiecewisePoly {
                breaks: breaks.clone(),
                pieces,
            }
        })
        .collect();
    devectorize(&out)
}

/// `R_Q f`: zero-extend, apply the difference operator, restrict.
pub fn apply_rq(stencil: &Stencil, f: &PiecewisePoly) -> Result<PiecewisePoly> {
    let m = ShiftMatrix::build(stencil);
    f.expect_domain(&Rational::zero(), &int(stencil.n() as i64 + 1))?;
    apply_block_matrix(m.entries(), f)
}

/// `R_Q^{-1} w`, blockwise multiplication by the inverse shift matrix.
pub fn apply_rq_inverse(stencil: &Stencil, w: &PiecewisePoly) -> Result<PiecewisePoly> {
    let m = ShiftMatrix::build(stencil);
    w.expect_domain(&Rational::zero(), &int(stencil.n() as i64 + 1))?;
    let inv = m.entries().inverse().ok_or(Error::SingularShiftMatrix)?;
    apply_block_matrix(&inv, w)
}

/// `(R y)(t) = Σ b_j y(t + j)` on `(0, N+1)` for `y` given on `(-N, 2N+1)`.
pub fn apply_r_extended(stencil: &Stencil, y: &PiecewisePoly) -> Result<PiecewisePoly> {
    let n = stencil.n() as i64;
    y.expect_domain(&int(-n), &int(2 * n + 1))?;
    let (lo, hi) = (Rational::zero(), int(n + 1));
    let mut acc = PiecewisePoly::zero(lo.clone(), hi.clone())?;
    for j in -n..=n {
        let b = stencil.coeff(j);
        if b.is_zero() {
            continue;
        }
        let term = y.translate(&int(j)).restrict(&lo, &hi)?.scale(b);
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn poly(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| int(x)).collect())
    }

    fn stencil(b: &[i64]) -> Stencil {
        Stencil::new(b.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(PiecewisePoly::new(vec![int(0)], vec![]).is_err());
        assert!(PiecewisePoly::new(vec![int(1), int(0)], vec![Poly::zero()]).is_err());
        assert!(PiecewisePoly::new(vec![int(0), int(1)], vec![]).is_err());
    }

    #[test]
    fn vectorize_shifts_components() {
        // f(t) = t^2 on (0, 3) -> (t^2, (t+1)^2, (t+2)^2)
        let f = PiecewisePoly::from_poly(int(0), int(3), &poly(&[0, 0, 1])).unwrap();
        let comps = vectorize(&f).unwrap();
        assert_eq!(comps.len(), 3);
        for (k, c) in comps.iter().enumerate() {
            let expected = poly(&[0, 0, 1]).shift(&int(k as i64));
            assert_eq!(c.simplify().pieces(), &[expected]);
        }
        assert_eq!(devectorize(&comps).unwrap().simplify(), f.refine(&[int(1), int(2)]).simplify());
    }

    #[test]
    fn vectorize_aligns_refinement() {
        let f = PiecewisePoly::from_global(
            vec![int(0), frac(1, 3), int(1), int(2)],
            vec![poly(&[1]), poly(&[2]), poly(&[0, 1])],
        )
        .unwrap();
        let comps = vectorize(&f).unwrap();
        assert_eq!(comps[0].breakpoints(), comps[1].breakpoints());
        assert_eq!(comps[1].breakpoints(), &[int(0), frac(1, 3), int(1)]);
        assert_eq!(devectorize(&comps).unwrap().simplify(), f.simplify());
    }

    #[test]
    fn vectorize_requires_unit_domain() {
        let f = PiecewisePoly::zero(int(0), frac(5, 2)).unwrap();
        assert!(matches!(vectorize(&f), Err(Error::DomainMismatch { .. })));
        let g = PiecewisePoly::zero(int(-1), int(2)).unwrap();
        assert!(vectorize(&g).is_err());
    }

    #[test]
    fn rq_swaps_for_antidiagonal_stencil() {
        let s = stencil(&[1, 0, 1]);
        let f = PiecewisePoly::from_poly(int(0), int(2), &poly(&[0, 1])).unwrap();
        let w = apply_rq(&s, &f).unwrap();
        // t + 1 on (0,1), t - 1 on (1,2)
        assert_eq!(w.global_piece(0), poly(&[1, 1]));
        assert_eq!(w.global_piece(1), poly(&[-1, 1]));
        let back = apply_rq_inverse(&s, &w).unwrap();
        assert_eq!(back.simplify(), f);
    }

    #[test]
    fn rq_row_sums_on_constants() {
        let s = stencil(&[0, 1, 1, 1, 2]);
        let f = PiecewisePoly::constant(int(0), int(3), int(1)).unwrap();
        let w = apply_rq(&s, &f).unwrap();
        let vals: Vec<Rational> = (0..3).map(|i| w.global_piece(i).eval(&int(0))).collect();
        assert_eq!(vals, vec![int(4), int(3), int(2)]);
    }

    #[test]
    fn identity_stencil_is_identity() {
        let s = stencil(&[0, 1, 0]);
        let f = PiecewisePoly::from_global(vec![int(0), int(1), int(2)], vec![poly(&[3, 1]), poly(&[0, 0, 2])]).unwrap();
        assert_eq!(apply_rq(&s, &f).unwrap(), f);
        assert_eq!(apply_rq_inverse(&s, &f).unwrap(), f);
    }

    #[test]
    fn inverse_of_singular_matrix_fails() {
        let s = stencil(&[0, 0, 0]);
        let f = PiecewisePoly::zero(int(0), int(2)).unwrap();
        assert_eq!(apply_rq_inverse(&s, &f), Err(Error::SingularShiftMatrix));
    }

    #[test]
    fn extended_application() {
        let s = stencil(&[1, 0, 1]);
        let y = PiecewisePoly::from_poly(int(-1), int(3), &poly(&[0, 1])).unwrap();
        let r = apply_r_extended(&s, &y).unwrap();
        assert_eq!(r.simplify().global_piece(0), poly(&[0, 2]));
        assert_eq!(r.simplify().pieces().len(), 1);

        // y supported in (N+1, 2N+1) with b_{-N} = 1 only: (Ry)(t) = y(t - N) = 0
        let s = stencil(&[1, 0, 0, 0, 0]);
        let y = PiecewisePoly::from_global(
            vec![int(-2), int(3), int(5)],
            vec![Poly::zero(), poly(&[1, 2, 3])],
        )
        .unwrap();
        assert!(apply_r_extended(&s, &y).unwrap().is_zero());
    }

    #[test]
    fn extended_matches_zero_extension() {
        let s = stencil(&[2, -1, 0, 3, 1]);
        let f = PiecewisePoly::from_global(
            vec![int(0), int(1), frac(3, 2), int(2), int(3)],
            vec![poly(&[1, 2]), poly(&[0, 0, 1]), poly(&[-1, 0, 0, 1]), poly(&[4])],
        )
        .unwrap();
        let y = f.extend_zero(&int(-2), &int(5)).unwrap();
        let lhs = apply_r_extended(&s, &y).unwrap().simplify();
        let rhs = apply_rq(&s, &f).unwrap().simplify();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn traces_of_worked_solution() {
        // -t^2/2 on (0,1); (t-1) - 1/2 - (t-1)^2/2 on (1,2)
        let v = PiecewisePoly::new(
            vec![int(0), int(1), int(2)],
            vec![
                Poly::new(vec![int(0), int(0), frac(-1, 2)]),
                Poly::new(vec![frac(-1, 2), int(1), frac(-1, 2)]),
            ],
        )
        .unwrap();
        let tr = v.node_traces(1);
        let at1 = tr.get(&int(1), 0).unwrap();
        assert_eq!(at1.left, Some(frac(-1, 2)));
        assert_eq!(at1.right, Some(frac(-1, 2)));
        assert_eq!(at1.jump, Some(int(0)));
        let d1 = tr.get(&int(1), 1).unwrap();
        assert_eq!(d1.left, Some(int(-1)));
        assert_eq!(d1.right, Some(int(1)));
        assert_eq!(d1.jump, Some(int(2)));
        assert_eq!(tr.get(&int(0), 0).unwrap().left, None);
        assert!(v.in_zero_trace_class(1));
        assert!(!v.in_zero_trace_class(2));
    }

    #[test]
    fn hermite_joined_pieces_have_no_jumps() {
        // t^2 on (0,1) joined C^1 to 1 + 2(t-1) + 5(t-1)^2 on (1,2)
        let v = PiecewisePoly::new(
            vec![int(0), int(1), int(2)],
            vec![poly(&[0, 0, 1]), poly(&[1, 2, 5])],
        )
        .unwrap();
        let tr = v.node_traces(2);
        assert_eq!(tr.get(&int(1), 0).unwrap().jump, Some(int(0)));
        assert_eq!(tr.get(&int(1), 1).unwrap().jump, Some(int(0)));
        assert_eq!(tr.get(&int(1), 2).unwrap().jump, Some(int(8)));
    }

    #[test]
    fn calculus() {
        let one = PiecewisePoly::constant(int(0), int(2), int(1)).unwrap();
        assert_eq!(one.moment_phi(&int(2)).unwrap(), int(2));
        assert_eq!(one.moment_phi(&int(1)).unwrap(), frac(1, 2));
        let zero = PiecewisePoly::zero(int(0), int(3)).unwrap();
        assert_eq!(zero.moment_phi(&int(3)).unwrap(), int(0));
        let f = PiecewisePoly::from_poly(int(0), int(2), &poly(&[0, 1])).unwrap();
        assert_eq!(f.definite_integral(&int(0), &int(2)).unwrap(), int(2));
        assert_eq!(f.inner_product(&f).unwrap(), frac(8, 3));
        let g = f.antiderivative(int(5));
        assert_eq!(g.derivative(), f);
        assert_eq!(g.value_at(&int(0), 0).unwrap(), int(5));
    }

    #[test]
    fn value_at_rejects_ambiguous_trace() {
        let v = PiecewisePoly::new(vec![int(0), int(1), int(2)], vec![poly(&[0]), poly(&[1])]).unwrap();
        assert!(matches!(v.value_at(&int(1), 0), Err(Error::DiscontinuousTrace { .. })));
        assert_eq!(v.value_at(&int(2), 0).unwrap(), int(1));
        assert!(matches!(v.value_at(&int(3), 0), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn sample_covers_domain() {
        let f = PiecewisePoly::from_poly(int(0), int(2), &poly(&[0, 1])).unwrap();
        let s = f.sample(0.5);
        assert_eq!(s.len(), 5);
        assert_eq!(s[4], (2.0, 2.0));
    }
}
