//! Node functionals `w ↦ Σ weight · w^{(order)}(node)` and the constraint
//! sets that describe images of `R_Q` and of `-(R_Q ·)''`.
//!
//! Codimension statements are checked as exact ranks: a finite set of
//! point-derivative functionals is linearly independent on a Sobolev space
//! iff it is independent on polynomials of high enough degree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::difference::{AltGammaData, GammaData, StructureReport};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::piecewise::PiecewisePoly;
use crate::poly::{falling_factorial, Poly};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTerm {
    pub node: Rational,
    pub order: usize,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeFunctional {
    pub terms: Vec<NodeTerm>,
    pub label: String,
}

impl NodeFunctional {
    /// Terms on the same `(node, order)` are merged and zero weights dropped.
    pub fn new(label: impl Into<String>, terms: impl IntoIterator<Item = NodeTerm>) -> Self {
        let mut merged: BTreeMap<(usize, Rational), Rational> = BTreeMap::new();
        for t in terms {
            *merged.entry((t.order, t.node)).or_insert_with(Rational::zero) += t.weight;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|((order, node), weight)| NodeTerm {
                node,
                order,
                weight,
            })
            .collect();
        Self {
            terms,
            label: label.into(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.order).max().unwrap_or(0)
    }

    pub fn nodes(&self) -> BTreeSet<Rational> {
        self.terms.iter().map(|t| t.node.clone()).collect()
    }

    /// Exact value on a piecewise polynomial. Interior nodes need a
    /// continuous derivative of the requested order.
    pub fn evaluate(&self, w: &PiecewisePoly) -> Result<Rational> {
        self.terms.iter().try_fold(Rational::zero(), |acc, t| {
            let v = w.value_at(&t.node, t.order).map_err(|e| match e {
                Error::OutOfDomain(x) => Error::DomainMismatch {
                    expected_start: w.start().clone(),
                    expected_end: w.end().clone(),
                    found_start: x.clone(),
                    found_end: x,
                },
                other => other,
            })?;
            Ok(acc + &t.weight * v)
        })
    }

    /// Value on a polynomial given in the global coordinate.
    pub fn apply_poly(&self, p: &Poly) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, t| {
            acc + &t.weight * p.derivative_at(t.order, &t.node)
        })
    }

    /// Value on the monomial `t^j`.
    pub fn apply_monomial(&self, j: usize) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, t| {
            if t.order > j {
                return acc;
            }
            let d = falling_factorial(j, t.order) * pow(&t.node, j - t.order);
            acc + &t.weight * d
        })
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(
            self.label.clone(),
            self.terms.iter().map(|t| NodeTerm {
                weight: &t.weight * s,
                ..t.clone()
            }),
        )
    }

    /// `Σ λ_j F_j`
    pub fn combine(label: impl Into<String>, parts: &[(Rational, &NodeFunctional)]) -> Self {
        Self::new(
            label,
            parts.iter().flat_map(|(lambda, f)| {
                f.terms.iter().map(move |t| NodeTerm {
                    weight: lambda * &t.weight,
                    ..t.clone()
                })
            }),
        )
    }
}

fn pow(x: &Rational, e: usize) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

impl fmt::Display for NodeFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let primes = match t.order {
                0 => String::new(),
                1 => "'".into(),
                2 => "''".into(),
                n => format!("^({n})"),
            };
            write!(f, "({})·w{}({})", t.weight, primes, t.node)?;
        }
        Ok(())
    }
}

fn term(node: Rational, order: usize, weight: Rational) -> NodeTerm {
    NodeTerm {
        node,
        order,
        weight,
    }
}

/// `F_{0μ}` and `F_{1μ}` for one derivative order.
pub fn gamma_pair(g: &GammaData, mu: usize) -> [NodeFunctional; 2] {
    let n = g.n as i64;
    let f0 = NodeFunctional::new(
        format!("F0[mu={mu}] right-end condition"),
        std::iter::once(term(int(n + 1), mu, Rational::one())).chain(
            g.gamma1
                .iter()
                .map(|(&i, c)| term(int(i as i64 - 1), mu, -c.clone())),
        ),
    );
    let f1 = NodeFunctional::new(
        format!("F1[mu={mu}] anchor condition at m={}", g.m),
        std::iter::once(term(int(g.m as i64), mu, Rational::one()))
            .chain(g.gamma2.iter().map(|(&i, c)| term(int(i as i64), mu, -c.clone()))),
    );
    [f0, f1]
}

/// The `2k` conditions cutting out the image of the zero-trace class of
/// order `k` under `R_Q` (`μ = 0..k-1`).
pub fn wgamma_functionals(g: &GammaData, k: usize) -> Vec<NodeFunctional> {
    (0..k).flat_map(|mu| gamma_pair(g, mu)).collect()
}

/// The same subspace described from the left end (reflected construction).
pub fn alt_wgamma_functionals(a: &AltGammaData, k: usize) -> Vec<NodeFunctional> {
    (0..k)
        .flat_map(|mu| {
            let f0 = NodeFunctional::new(
                format!("F0'[mu={mu}] left-end condition"),
                std::iter::once(term(int(0), mu, Rational::one()))
                    .chain(a.gamma1.iter().map(|(&i, c)| term(int(i as i64), mu, -c.clone()))),
            );
            let f1 = NodeFunctional::new(
                format!("F1'[mu={mu}] anchor condition at m'={}", a.m_prime),
                std::iter::once(term(int(a.m_prime as i64), mu, Rational::one()))
                    .chain(a.gamma2.iter().map(|(&i, c)| term(int(i as i64), mu, -c.clone()))),
            );
            [f0, f1]
        })
        .collect()
}

/// Cofactor condition expressing continuity of `v^{(μ)}` at the node `l`
/// through `w = R_Q v`:
///
/// ```text
/// B_{1,l+1} w(0) + Σ_{i=1..N} (B_{i+1,l+1} - B_{i,l}) w(i) - B_{N+1,l} w(N+1)
/// ```
///
/// The value equals `det R1 · [v^{(μ)}(l+0) - v^{(μ)}(l-0)]`.
pub fn jump_functional(core: &StructureReport, l: usize, mu: usize) -> Result<NodeFunctional> {
    let m = &core.matrix;
    let n = core.n();
    let b = |i: usize, k: usize| m.cofactor(i, k);
    let mut terms = vec![
        term(int(0), mu, b(1, l + 1)?),
        term(int(n as i64 + 1), mu, -b(n + 1, l)?),
    ];
    for i in 1..=n {
        terms.push(term(int(i as i64), mu, b(i + 1, l + 1)? - b(i, l)?));
    }
    Ok(NodeFunctional::new(
        format!("J[mu={mu}] continuity of v at l={l}"),
        terms,
    ))
}

/// Conditions on `w` for `R_Q v = w` to have a solution with
/// `v, R_Q v ∈ W^{k+2}` and `v` vanishing at both ends.
///
/// Independent end columns: `2(k+2)` functionals `F_{jμ}`, `μ = 0..k+1`.
/// Dependent end columns: the two `μ = 0` conditions plus one cofactor
/// condition per `μ = 1..k+1`, `k + 3` in total.
pub fn image_functionals_rqk(core: &StructureReport, k: usize) -> Result<Vec<NodeFunctional>> {
    let g = &core.gamma;
    if !core.ends.dependent {
        return Ok((0..=k + 1).flat_map(|mu| gamma_pair(g, mu)).collect());
    }
    let l = core.ends.l.expect("dependent end columns carry l");
    let n = core.n();
    if core.matrix.cofactor(n + 1, l)?.is_zero() {
        return Err(Error::InternalRankError(format!(
            "cofactor B_(N+1,l) vanishes for l={l}"
        )));
    }
    let mut out: Vec<NodeFunctional> = gamma_pair(g, 0).into();
    for mu in 1..=k + 1 {
        out.push(jump_functional(core, l, mu)?);
    }
    Ok(out)
}

/// Required probe degree for [`rank_of_functionals`].
pub fn probe_lower_bound(fns: &[NodeFunctional]) -> usize {
    fns.len() + fns.iter().map(NodeFunctional::max_order).max().unwrap_or(0)
}

/// Degree at which polynomials separate every point-derivative functional
/// over the nodes involved (Hermite interpolation bound).
fn hermite_bound(fns: &[NodeFunctional]) -> usize {
    let nodes: BTreeSet<Rational> = fns.iter().flat_map(NodeFunctional::nodes).collect();
    let orders = fns.iter().map(NodeFunctional::max_order).max().unwrap_or(0) + 1;
    (nodes.len() * orders).saturating_sub(1)
}

/// Default probe degree: `|fns| + k + 4`, raised to the Hermite bound when
/// that is larger.
pub fn default_probe_degree(fns: &[NodeFunctional], k: usize) -> usize {
    (fns.len() + k + 4)
        .max(hermite_bound(fns))
        .max(probe_lower_bound(fns))
}

/// Rows: functionals; columns: monomials `t^0..t^D`.
pub fn monomial_matrix(fns: &[NodeFunctional], degree: usize) -> Matrix {
    Matrix::from_fn(fns.len(), degree + 1, |i, j| fns[i].apply_monomial(j))
}

pub fn rank_of_functionals(fns: &[NodeFunctional], degree: usize) -> Result<usize> {
    let required = probe_lower_bound(fns);
    if degree < required {
        return Err(Error::ProbeTooSmall { degree, required });
    }
    Ok(monomial_matrix(fns, degree).rank())
}

/// A constraint on the right-hand side `f`, written as a node functional
/// acting on `∬f(t) = ∫_0^t (t - τ) f(τ) dτ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedConstraint {
    pub on_double_integral: NodeFunctional,
}

impl ReducedConstraint {
    pub fn evaluate(&self, f: &PiecewisePoly) -> Result<Rational> {
        self.on_double_integral.evaluate(&f.double_integral())
    }
}

/// Result of eliminating the integration constants `(d1, d2)` from a stack
/// of conditions on `w = d1 t + d2 - ∬f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    /// Rank of the `(d1, d2)` coefficient block.
    pub constants_rank: usize,
    pub residuals: Vec<ReducedConstraint>,
    /// Rank of the residual constraints as functionals of `f`.
    pub independent_count: usize,
}

/// Coefficients of `(d1, d2)` in `F(d1 t + d2)`.
pub fn constants_row(f: &NodeFunctional) -> [Rational; 2] {
    [f.apply_monomial(1), f.apply_monomial(0)]
}

pub fn eliminate_constants(fns: &[NodeFunctional], probe_degree: usize) -> Result<Elimination> {
    let block = Matrix::from_rows(fns.iter().map(|f| constants_row(f).to_vec()).collect());
    let constants_rank = block.rank();
    let residuals: Vec<ReducedConstraint> = block
        .left_null_space()
        .into_iter()
        .enumerate()
        .map(|(idx, lambda)| {
            let parts: Vec<(Rational, &NodeFunctional)> = lambda.into_iter().zip(fns).collect();
            ReducedConstraint {
                on_double_integral: NodeFunctional::combine(
                    format!("residual constraint #{}", idx + 1),
                    &parts,
                ),
            }
        })
        .collect();
    let fs: Vec<NodeFunctional> = residuals
        .iter()
        .map(|r| r.on_double_integral.clone())
        .collect();
    let required = probe_lower_bound(&fs) + 2;
    if probe_degree < required {
        return Err(Error::ProbeTooSmall {
            degree: probe_degree,
            required,
        });
    }
    // ∬f ranges over functions vanishing with their first derivative at 0,
    // i.e. the span of t^2, t^3, ...
    let independent_count = if fs.is_empty() {
        0
    } else {
        Matrix::from_fn(fs.len(), probe_degree - 1, |i, j| fs[i].apply_monomial(j + 2)).rank()
    };
    Ok(Elimination {
        constants_rank,
        residuals,
        independent_count,
    })
}

fn elimination_probe(fns: &[NodeFunctional], k: usize) -> usize {
    default_probe_degree(fns, k) + 2
}

/// Solvability conditions on `f` for `-(R_Q v)'' = f` with
/// `v, R_Q v ∈ W^{k+2}`, `v` vanishing at both ends.
pub fn image_functionals_ark(core: &StructureReport, k: usize) -> Result<Elimination> {
    let fns = image_functionals_rqk(core, k)?;
    eliminate_constants(&fns, elimination_probe(&fns, k))
}

/// Solvability conditions on `f` for `-(R_Q v)'' = f` with `v` in the
/// zero-trace class of order `k+2`.
pub fn image_functionals_brk(core: &StructureReport, k: usize) -> Result<Elimination> {
    let fns: Vec<NodeFunctional> = (0..=k + 1).flat_map(|mu| gamma_pair(&core.gamma, mu)).collect();
    eliminate_constants(&fns, elimination_probe(&fns, k))
}
