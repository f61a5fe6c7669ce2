//! Verification battery: exact structural checks on named and random
//! stencils plus finite-difference evidence. Shared by the CLI `verify`
//! command and the acceptance tests.

use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::difference::{classify_regime, Regime, ShiftMatrix, StructureReport};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::oracle::{assemble, compare_spectrum, convergence_study, index_estimate};
use crate::piecewise::{apply_rq, apply_rq_inverse, PiecewisePoly};
use crate::poly::Poly;
use crate::rational::{frac, int, Rational};
use crate::sobolev::{
    alt_wgamma_functionals, default_probe_degree, image_functionals_ark, image_functionals_brk,
    image_functionals_rqk, rank_of_functionals, wgamma_functionals, NodeFunctional,
};
use crate::solver::{
    check_equation, generalized_index, kernel_of_ark, solve, BvpProblem, SolutionStatus,
};
use crate::Stencil;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

/// Integer box for random stencil searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBox {
    pub max_n: usize,
    pub max_abs: i64,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self { max_n: 3, max_abs: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub level: Level,
    pub seed: u64,
    pub random_count: usize,
    pub search: SearchBox,
}

impl VerifyConfig {
    pub fn fast() -> Self {
        Self {
            level: Level::Fast,
            seed: 20240601,
            random_count: 0,
            search: SearchBox::default(),
        }
    }

    pub fn full() -> Self {
        Self {
            level: Level::Full,
            random_count: 20,
            ..Self::fast()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub id: String,
    pub claim: String,
    pub passed: bool,
    pub details: Vec<String>,
}

impl CheckLine {
    fn new(id: &str, claim: &str) -> Self {
        Self {
            id: id.into(),
            claim: claim.into(),
            passed: true,
            details: Vec::new(),
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.details.push(s.into());
    }

    fn fail(&mut self, s: impl Into<String>) {
        self.passed = false;
        self.details.push(format!("FAILED: {}", s.into()));
    }

    fn expect(&mut self, ok: bool, s: impl Into<String>) {
        if !ok {
            self.fail(s);
        }
    }

    fn error(&mut self, context: &str, e: Error) {
        self.fail(format!("{context}: {e}"));
    }

    /// One summary line.
    pub fn summary(&self) -> String {
        format!(
            "[{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.claim
        )
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for d in &self.details {
            writeln!(f, "    {d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Battery {
    pub lines: Vec<CheckLine>,
}

impl Battery {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for Battery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            write!(f, "{l}")?;
        }
        let passed = self.lines.iter().filter(|l| l.passed).count();
        writeln!(f, "{passed}/{} checks passed", self.lines.len())
    }
}

/// The three reference stencils: one independent, two dependent.
pub fn named_stencils() -> Vec<Stencil> {
    [&[1, 0, 1][..], &[0, 1, 1, 1, 2], &[1, 1, 2, 4, 4]]
        .iter()
        .map(|b| Stencil::from_ints(b).expect("valid stencil"))
        .collect()
}

/// Stencil whose `𝓜` has rank 1.
pub fn rank_one_stencil() -> Stencil {
    Stencil::from_ints(&[1, 0, -1]).expect("valid stencil")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub draws: usize,
    pub paper_regime: usize,
    /// In-scope stencils on which the structure computation failed.
    pub structure_failures: Vec<String>,
}

fn random_stencil(rng: &mut ChaCha8Rng, b: SearchBox) -> Stencil {
    let n = rng.gen_range(1..=b.max_n.max(1));
    let coeffs: Vec<i64> = (0..2 * n + 1)
        .map(|_| rng.gen_range(-b.max_abs..=b.max_abs))
        .collect();
    Stencil::from_ints(&coeffs).expect("odd length")
}

/// Distinct random in-scope stencils from the box, drawn with a seeded
/// generator, skipping any in `exclude`.
pub fn random_paper_stencils(
    seed: u64,
    count: usize,
    search: SearchBox,
    exclude: &[Stencil],
) -> (Vec<StructureReport>, SearchStats) {
    let mut rng = rng(seed);
    let mut stats = SearchStats::default();
    let mut out: Vec<StructureReport> = Vec::new();
    let max_draws = 200 * count.max(1);
    while out.len() < count && stats.draws < max_draws {
        stats.draws += 1;
        let s = random_stencil(&mut rng, search);
        if classify_regime(&ShiftMatrix::build(&s)).regime != Regime::PaperRegime {
            continue;
        }
        if exclude.contains(&s) || out.iter().any(|c| c.stencil == s) {
            continue;
        }
        stats.paper_regime += 1;
        match StructureReport::analyze(&s) {
            Ok(core) => out.push(core),
            Err(e) => stats.structure_failures.push(format!("{s}: {e}")),
        }
    }
    (out, stats)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    frac(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> Poly {
    Poly::new((0..=degree).map(|_| random_rational(rng)).collect())
}

/// `((t - a)(b - t))^k` on `[a, b]`, zero elsewhere in `(0, end)`.
fn bump(a: &Rational, b: &Rational, k: usize, end: &Rational) -> Result<PiecewisePoly> {
    let q = Poly::new(vec![-(a * b), a + b, -Rational::one()]).pow(k);
    let mut breaks = vec![Rational::zero()];
    let mut global = Vec::new();
    if !a.is_zero() {
        breaks.push(a.clone());
        global.push(Poly::zero());
    }
    breaks.push(b.clone());
    global.push(q);
    if b != end {
        breaks.push(end.clone());
        global.push(Poly::zero());
    }
    PiecewisePoly::from_global(breaks, global)
}

/// Random member of the zero-trace class of order `k` on `(0, N+1)`: a
/// global term vanishing to order `k` at both ends, unit-interval bumps with
/// polynomial weights, and one bump on a subinterval with non-integer ends.
pub fn random_zero_trace(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<PiecewisePoly> {
    let end = int(n as i64 + 1);
    let base = Poly::new(vec![Rational::zero(), end.clone(), -Rational::one()]).pow(k);
    let mut v = PiecewisePoly::from_poly(Rational::zero(), end.clone(), &(&random_poly(rng, 2) * &base))?;
    for s in 0..=n as i64 {
        let b = bump(&int(s), &int(s + 1), k, &end)?;
        let weight = PiecewisePoly::from_poly(Rational::zero(), end.clone(), &random_poly(rng, 1))?;
        v = v.add(&b.mul(&weight)?)?;
    }
    let s = rng.gen_range(0..=n as i64);
    let a = int(s) + frac(1, 4);
    let b = int(s) + frac(rng.gen_range(2..=3), 4);
    v = v.add(&bump(&a, &b, k, &end)?.scale(&random_rational(rng)))?;
    Ok(v)
}

/// Random `w` satisfying the given node functionals: a random `W^k`
/// function corrected by the least monomial combination that zeroes every
/// functional.
pub fn random_constrained(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    fns: &[NodeFunctional],
) -> Result<PiecewisePoly> {
    let end = int(n as i64 + 1);
    let w0 = PiecewisePoly::from_poly(Rational::zero(), end.clone(), &random_poly(rng, 5))?
        .add(&random_zero_trace(rng, n, k)?)?;
    let degree = default_probe_degree(fns, k);
    let m = Matrix::from_fn(fns.len(), degree + 1, |i, j| fns[i].apply_monomial(j));
    let rhs = fns
        .iter()
        .map(|f| f.evaluate(&w0))
        .collect::<Result<Vec<_>>>()?;
    let c = m.solve(&rhs).ok_or_else(|| {
        Error::InternalRankError("node functionals are dependent on monomials".into())
    })?;
    let correction = PiecewisePoly::from_poly(Rational::zero(), end, &Poly::new(c))?;
    w0.sub(&correction)
}

fn integers(n: usize) -> Vec<Rational> {
    (1..=n as i64).map(int).collect()
}

/// Forward and inverse image characterization of `R_Q` on the zero-trace
/// classes, exactly.
pub fn check_rq_image(
    line: &mut CheckLine,
    rng: &mut ChaCha8Rng,
    core: &StructureReport,
    k: usize,
    trials: usize,
) -> Result<()> {
    let n = core.n();
    let s = &core.stencil;
    let fns = wgamma_functionals(&core.gamma, k);
    for trial in 0..trials {
        let v = random_zero_trace(rng, n, k)?;
        if !v.in_zero_trace_class(k) {
            line.fail(format!("{s} k={k} #{trial}: generator left the zero-trace class"));
            continue;
        }
        let w = apply_rq(s, &v)?;
        let smooth = w.jump_defects(k).is_empty();
        let residuals = fns.iter().map(|f| f.evaluate(&w)).collect::<Result<Vec<_>>>()?;
        line.expect(
            smooth && residuals.iter().all(Zero::is_zero),
            format!("{s} k={k} #{trial}: forward residuals {residuals:?}, W^k jumps ok = {smooth}"),
        );

        let w = random_constrained(rng, n, k, &fns)?.refine(&integers(n));
        let v = apply_rq_inverse(s, &w)?;
        let defects = v.zero_trace_defects(k);
        line.expect(
            defects.is_empty(),
            format!("{s} k={k} #{trial}: inverse trace defects {defects:?}"),
        );
        line.expect(
            apply_rq(s, &v)?.sub(&w)?.is_zero(),
            format!("{s} k={k} #{trial}: round trip mismatch"),
        );
    }
    Ok(())
}

pub fn criterion_image_characterization(
    cores: &[StructureReport],
    ks: &[usize],
    trials: usize,
    seed: u64,
) -> CheckLine {
    let mut line = CheckLine::new(
        "image-of-RQ",
        "R_Q maps the zero-trace class of order k exactly onto the node-condition subspace",
    );
    let mut rng = rng(seed);
    for core in cores {
        for &k in ks {
            if let Err(e) = check_rq_image(&mut line, &mut rng, core, k, trials) {
                line.error(&format!("{} k={k}", core.stencil), e);
            }
        }
    }
    line.note(format!(
        "{} stencils x k in {ks:?} x {trials} trials, exact",
        cores.len()
    ));
    line
}

pub fn criterion_rq_codim(cores: &[StructureReport], ks: &[usize]) -> CheckLine {
    let mut line = CheckLine::new(
        "codim-RQ",
        "codim Im R_Q^k = 2(k+2) (independent end columns) or k+3 (dependent)",
    );
    for core in cores {
        for &k in ks {
            let expected = core.index_table(k).codim_rq;
            let res = image_functionals_rqk(core, k)
                .and_then(|f| rank_of_functionals(&f, default_probe_degree(&f, k)));
            match res {
                Ok(r) => {
                    line.note(format!(
                        "{} ({}) k={k}: rank {r}, expected {expected}",
                        core.stencil,
                        if core.ends.dependent { "dependent" } else { "independent" }
                    ));
                    line.expect(r as i64 == expected, format!("{} k={k}", core.stencil));
                }
                Err(e) => line.error(&format!("{} k={k}", core.stencil), e),
            }
        }
    }
    line
}

pub fn criterion_operator_codims(cores: &[StructureReport], ks: &[usize]) -> CheckLine {
    let mut line = CheckLine::new(
        "codim-AR-BR",
        "solvability conditions after eliminating (d1, d2): A_R^k 2(k+1) or k+1, B_R^k 2(k+1)",
    );
    for core in cores {
        for &k in ks {
            let t = core.index_table(k);
            match (image_functionals_ark(core, k), image_functionals_brk(core, k)) {
                (Ok(a), Ok(b)) => {
                    line.note(format!(
                        "{} k={k}: A {} (expected {}), B {} (expected {})",
                        core.stencil, a.independent_count, t.codim_ar, b.independent_count, t.codim_br
                    ));
                    line.expect(
                        a.independent_count as i64 == t.codim_ar
                            && b.independent_count as i64 == t.codim_br,
                        format!("{} k={k}", core.stencil),
                    );
                }
                (Err(e), _) | (_, Err(e)) => line.error(&format!("{} k={k}", core.stencil), e),
            }
        }
    }
    line
}

pub fn criterion_kernel(cores: &[StructureReport]) -> CheckLine {
    let mut line = CheckLine::new(
        "kernel-AR",
        "-(R_Q v)'' = 0 has only v = 0 among W^2 functions with zero traces (rank-2 certificate)",
    );
    for core in cores {
        match kernel_of_ark(core) {
            Ok(c) => line.expect(
                c.certifies_trivial_kernel(),
                format!("{}: rank {}, counterexample {:?}", core.stencil, c.rank, c.counterexample),
            ),
            Err(e) => line.error(&core.stencil.to_string(), e),
        }
    }
    line.note(format!("{} stencils certified", cores.len()));
    line
}

/// Closed form of the solution for stencil (1,0,1), f0 = 1.
pub fn worked_example_expected() -> PiecewisePoly {
    PiecewisePoly::from_global(
        vec![int(0), int(1), int(2)],
        vec![
            Poly::new(vec![int(0), int(0), frac(-1, 2)]),
            // (t-1) - 1/2 - (t-1)^2/2 in global form
            Poly::new(vec![int(-2), int(2), frac(-1, 2)]),
        ],
    )
    .expect("valid pieces")
}

pub fn worked_example_problem() -> BvpProblem {
    BvpProblem::new(
        Stencil::from_ints(&[1, 0, 1]).expect("valid"),
        0,
        PiecewisePoly::constant(int(0), int(2), int(1)).expect("valid"),
    )
    .expect("valid problem")
}

pub fn criterion_worked_example() -> CheckLine {
    let mut line = CheckLine::new(
        "worked-solution",
        "stencil (1,0,1), f0 = 1: v = (-t^2/2; (t-1) - 1/2 - (t-1)^2/2), v' jumps by 2 at t = 1",
    );
    match solve(&worked_example_problem()) {
        Ok(sol) => {
            line.expect(sol.status == SolutionStatus::Unique, format!("status {:?}", sol.status));
            if let Some(v) = &sol.particular {
                line.expect(v.simplify() == worked_example_expected().simplify(), format!("v = {v:?}"));
                match v.jump(&int(1), 1) {
                    Ok(j) => {
                        line.note(format!("v'(1+) - v'(1-) = {j}"));
                        line.expect(j == int(2), "derivative jump");
                    }
                    Err(e) => line.error("jump", e),
                }
            }
            line.note(format!("(d1, d2) = {:?}", sol.constants.map(|(a, b)| format!("({a}, {b})"))));
        }
        Err(e) => line.error("solve", e),
    }
    line
}

/// Kernel basis and violating data for one instance with the given rank of `𝓜`.
pub fn check_rank_case(line: &mut CheckLine, core: &StructureReport) -> Result<usize> {
    let s = &core.stencil;
    let n = core.n();
    let rank = core.m_matrix().rank();
    let end = int(n as i64 + 1);
    let zero = PiecewisePoly::zero(Rational::zero(), end.clone())?;
    let family = solve(&BvpProblem::new(s.clone(), 0, zero.clone())?)?;
    let (ker, codim) = generalized_index(core)?;
    line.expect(
        family.kernel_basis.len() == 2 - rank && ker == 2 - rank && codim == 2 - rank,
        format!(
            "{s}: rank {rank}, kernel basis {}, verified kernel {ker}, conditions {codim}",
            family.kernel_basis.len()
        ),
    );
    for v in &family.kernel_basis {
        line.expect(
            !v.is_zero() && v.in_zero_trace_class(1) && check_equation(s, v, &zero)?,
            format!("{s}: kernel element fails"),
        );
    }
    // Data violating exactly one condition at a time.
    let constraints = family.data_constraints.len();
    if constraints > 0 {
        let probe = 2 * constraints + 4;
        let values: Vec<Vec<Rational>> = (0..probe)
            .map(|j| {
                let f = PiecewisePoly::from_poly(Rational::zero(), end.clone(), &Poly::monomial(j, int(1)))?;
                let fam = solve(&BvpProblem::new(s.clone(), 0, f)?)?;
                Ok(fam.data_constraints.iter().map(|c| c.value.clone()).collect())
            })
            .collect::<Result<_>>()?;
        let m = Matrix::from_fn(constraints, probe, |i, j| values[j][i].clone());
        for target in 0..constraints {
            let e: Vec<Rational> = (0..constraints)
                .map(|i| if i == target { Rational::one() } else { Rational::zero() })
                .collect();
            let Some(c) = m.solve(&e) else {
                line.fail(format!("{s}: condition {target} cannot be violated alone"));
                continue;
            };
            let f = PiecewisePoly::from_poly(Rational::zero(), end.clone(), &Poly::new(c))?;
            let fam = solve(&BvpProblem::new(s.clone(), 0, f)?)?;
            let nonzero: Vec<usize> = fam
                .data_constraints
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.value.is_zero())
                .map(|(i, _)| i)
                .collect();
            line.expect(
                fam.status == SolutionStatus::Infeasible && nonzero == vec![target],
                format!("{s}: violating data for condition {target} gave {nonzero:?}"),
            );
        }
    }
    Ok(rank)
}

/// Instances of each rank of `𝓜` in the box (at most two per rank and `N`):
/// exhaustive for `N <= 2`, then seeded random draws for larger `N`.
pub fn search_rank_cases(search: SearchBox, seed: u64, random_draws: usize) -> [Vec<StructureReport>; 3] {
    let mut found: [Vec<StructureReport>; 3] = Default::default();
    let keep = 2;
    let consider = |s: Stencil, found: &mut [Vec<StructureReport>; 3]| {
        if classify_regime(&ShiftMatrix::build(&s)).regime != Regime::PaperRegime {
            return;
        }
        if let Ok(core) = StructureReport::analyze(&s) {
            let r = core.m_matrix().rank();
            if found[r].iter().filter(|c| c.n() == s.n()).count() < keep {
                found[r].push(core);
            }
        }
    };
    let range = 2 * search.max_abs + 1;
    for n in 1..=search.max_n.min(2) {
        let len = 2 * n + 1;
        let total = (range as u64).pow(len as u32);
        for code in 0..total {
            let mut c = code;
            let coeffs: Vec<i64> = (0..len)
                .map(|_| {
                    let d = (c % range as u64) as i64 - search.max_abs;
                    c /= range as u64;
                    d
                })
                .collect();
            consider(Stencil::from_ints(&coeffs).expect("odd"), &mut found);
        }
    }
    if search.max_n > 2 {
        let mut rng = rng(seed);
        let deep = SearchBox { max_n: search.max_n, max_abs: search.max_abs };
        for _ in 0..random_draws {
            let s = random_stencil(&mut rng, deep);
            if s.n() > 2 {
                consider(s, &mut found);
            }
        }
    }
    found
}

/// Search results merged with the fixed examples: the named stencils
/// (rank 2) and the rank-1 stencil.
pub fn rank_case_instances(search: SearchBox, seed: u64, random_draws: usize) -> [Vec<StructureReport>; 3] {
    let mut found = search_rank_cases(search, seed, random_draws);
    let fixed = named_stencils().into_iter().chain([rank_one_stencil()]);
    for s in fixed {
        let core = StructureReport::analyze(&s).expect("fixed examples are in scope");
        let r = core.m_matrix().rank();
        if !found[r].iter().any(|c| c.stencil == s) {
            found[r].insert(0, core);
        }
    }
    found
}

pub fn criterion_rank_cases(instances: &[Vec<StructureReport>; 3], searched: &str) -> CheckLine {
    let mut line = CheckLine::new(
        "rank-cases",
        "rank M = 2, 1, 0 gives (dim ker, #conditions) = (0,0), (1,1), (2,2)",
    );
    for (rank, list) in instances.iter().enumerate() {
        if list.is_empty() {
            line.note(format!("rank {rank}: no instance in {searched}"));
            continue;
        }
        for core in list {
            match check_rank_case(&mut line, core) {
                Ok(r) => line.note(format!("rank {r}: {} verified", core.stencil)),
                Err(e) => line.error(&core.stencil.to_string(), e),
            }
        }
    }
    line.expect(!instances[2].is_empty(), "no full-rank instance");
    line
}

pub fn criterion_spectrum(cores: &[StructureReport], ns: &[usize], tol: f64) -> CheckLine {
    let mut line = CheckLine::new(
        "spectrum",
        "eigenvalues of the grid R_Q^h coincide with those of R1",
    );
    let mut worst: f64 = 0.0;
    for core in cores {
        for &n in ns {
            match compare_spectrum(&core.stencil, n) {
                Ok(c) => {
                    worst = worst.max(c.max_deviation);
                    line.expect(
                        c.agrees(tol),
                        format!(
                            "{} n={n}: deviation {:.3e}, multiplicities ok = {}",
                            core.stencil, c.max_deviation, c.multiplicities_match
                        ),
                    );
                    if core.stencil == cores[0].stencil {
                        line.note(format!(
                            "{} n={n}: off-node block deviation {:.2e}; integer-node block eigenvalues {:?}",
                            core.stencil,
                            c.max_deviation,
                            c.nodal.iter().map(|z| format!("{:.3}", z)).collect::<Vec<_>>()
                        ));
                    }
                }
                Err(e) => line.error(&core.stencil.to_string(), e),
            }
        }
    }
    line.note(format!(
        "{} stencils, n in {ns:?}, worst deviation {worst:.3e} (tolerance {tol:e})",
        cores.len()
    ));
    line
}

/// Order estimates are meaningless once errors reach rounding level.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

pub fn criterion_convergence(ns: &[usize]) -> CheckLine {
    let mut line = CheckLine::new(
        "fd-convergence",
        "finite-difference solutions converge to the exact solution at second order",
    );
    let report = |line: &mut CheckLine, label: &str, p: &BvpProblem| -> Option<(f64, Option<f64>, bool)> {
        match convergence_study(p, ns) {
            Ok(st) => {
                let errs: Vec<String> = st.rows.iter().map(|r| format!("n={} {:.3e}", r.n, r.max_error)).collect();
                let exact = st.rows.iter().all(|r| r.max_error < ROUNDOFF_FLOOR);
                line.note(format!(
                    "{label}: max-node errors [{}], orders {:?}",
                    errs.join(", "),
                    st.rows.iter().filter_map(|r| r.order.map(|o| format!("{o:.3}"))).collect::<Vec<_>>()
                ));
                Some((st.final_error(), st.min_order(), exact))
            }
            Err(e) => {
                line.error(label, e);
                None
            }
        }
    };
    if let Some((err, order, exact)) = report(&mut line, "worked example f0 = 1", &worked_example_problem()) {
        line.expect(err < 1e-3, format!("final error {err:.3e} >= 1e-3"));
        if exact {
            line.note(
                "worked example: w is quadratic, so the second difference is exact and the grid \
                 solution matches to rounding; order not measurable there",
            );
        } else {
            line.expect(order.is_some_and(|o| o >= 1.8), format!("order {order:?} < 1.8"));
        }
    }
    // Same stencil with data whose w has nonzero fourth derivative.
    let s = Stencil::from_ints(&[1, 0, 1]).expect("valid");
    let f = PiecewisePoly::from_poly(int(0), int(2), &Poly::monomial(3, int(1))).expect("valid");
    let companion = BvpProblem::new(s, 0, f).expect("valid");
    if let Some((err, order, _)) = report(&mut line, "stencil (1,0,1), f0 = t^3", &companion) {
        line.expect(err < 1e-3, format!("companion final error {err:.3e}"));
        line.expect(order.is_some_and(|o| o >= 1.8), format!("companion order {order:?} < 1.8"));
    }
    line
}

/// Kernel/cokernel agreement of `A_R^h` with `a(t)` in {0, 1, t}. With
/// `a = 0`, the kernel estimate must also equal `2 - rank M`.
pub fn criterion_index(cores: &[StructureReport], n: usize) -> CheckLine {
    let mut line = CheckLine::new(
        "index-zero",
        "numerical kernel and cokernel dimensions of A_R^h agree (index 0)",
    );
    for core in cores {
        let end = int(core.n() as i64 + 1);
        let weights: [(&str, Option<Poly>); 3] = [
            ("a=0", None),
            ("a=1", Some(Poly::constant(int(1)))),
            ("a=t", Some(Poly::x())),
        ];
        let mut dims = Vec::new();
        for (label, a) in weights {
            let a = a.map(|p| PiecewisePoly::from_poly(int(0), end.clone(), &p).expect("valid"));
            match assemble(&core.stencil, n, a.as_ref()) {
                Ok(ops) => {
                    let est = index_estimate(&ops);
                    dims.push(format!("{label}: {}/{}", est.kernel_dim, est.cokernel_dim));
                    line.expect(
                        est.kernel_dim == est.cokernel_dim,
                        format!("{} {label}: ker {} coker {}", core.stencil, est.kernel_dim, est.cokernel_dim),
                    );
                    if a.is_none() {
                        let expected = 2 - core.m_matrix().rank();
                        line.expect(
                            est.kernel_dim == expected,
                            format!("{} a=0: kernel {} but 2 - rank M = {expected}", core.stencil, est.kernel_dim),
                        );
                    }
                }
                Err(e) => line.error(&core.stencil.to_string(), e),
            }
        }
        line.note(format!("{} n={n} ker/coker {}", core.stencil, dims.join(", ")));
    }
    line
}

pub fn criterion_alternative_structure(cores: &[StructureReport], ks: &[usize]) -> CheckLine {
    let mut line = CheckLine::new(
        "alt-structure",
        "node conditions from the two admissible anchor choices span the same space",
    );
    for core in cores {
        for &k in ks {
            let a = wgamma_functionals(&core.gamma, k);
            let b = alt_wgamma_functionals(&core.alt, k);
            let both: Vec<NodeFunctional> = a.iter().chain(&b).cloned().collect();
            let d = default_probe_degree(&both, k);
            let ranks = (
                rank_of_functionals(&a, d),
                rank_of_functionals(&b, d),
                rank_of_functionals(&both, d),
            );
            match ranks {
                (Ok(ra), Ok(rb), Ok(rab)) => line.expect(
                    ra == rb && rb == rab && ra == 2 * k,
                    format!("{} k={k}: ranks {ra}, {rb}, union {rab}", core.stencil),
                ),
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                    line.error(&format!("{} k={k}", core.stencil), e)
                }
            }
        }
    }
    line.note(format!("{} stencils x k in {ks:?}: equal ranks and equal span", cores.len()));
    line
}

/// Runs the battery at the configured level.
pub fn run(config: &VerifyConfig) -> Battery {
    let mut battery = Battery::default();
    let named: Vec<StructureReport> = named_stencils()
        .iter()
        .map(|s| StructureReport::analyze(s).expect("named stencils are in scope"))
        .collect();
    let mut pool = named.clone();
    let mut pool_line = CheckLine::new("random-pool", "random in-scope stencils");
    if config.level == Level::Full && config.random_count > 0 {
        let (random, stats) =
            random_paper_stencils(config.seed, config.random_count, config.search, &named_stencils());
        if random.is_empty() {
            pool_line.note(format!(
                "no instances: no in-scope stencil found in N <= {}, |b_j| <= {} after {} draws",
                config.search.max_n, config.search.max_abs, stats.draws
            ));
        } else {
            pool_line.note(format!(
                "{} stencils (seed {}, {} draws): {}",
                random.len(),
                config.seed,
                stats.draws,
                random.iter().map(|c| c.stencil.to_string()).collect::<Vec<_>>().join(" ")
            ));
        }
        for f in &stats.structure_failures {
            pool_line.fail(format!("structure computation failed on {f}"));
        }
        pool.extend(random);
        battery.lines.push(pool_line);
    }
    let trials = if config.level == Level::Full { 2 } else { 1 };
    battery
        .lines
        .push(criterion_image_characterization(&pool, &[1, 2, 3], trials, config.seed));
    battery.lines.push(criterion_rq_codim(&named, &[0, 1, 2]));
    battery.lines.push(criterion_operator_codims(&named, &[0, 1]));
    let mut kernel_pool = pool.clone();
    kernel_pool.push(StructureReport::analyze(&rank_one_stencil()).expect("in scope"));
    battery.lines.push(criterion_kernel(&kernel_pool));
    battery.lines.push(criterion_worked_example());
    if config.level == Level::Full {
        let found = rank_case_instances(config.search, config.seed, 4000);
        battery.lines.push(criterion_rank_cases(
            &found,
            &format!("N <= {}, |b_j| <= {}", config.search.max_n, config.search.max_abs),
        ));
        battery.lines.push(criterion_spectrum(&pool, &[8, 16], 1e-8));
        battery.lines.push(criterion_convergence(&[32, 64, 128]));
        let index_pool: Vec<StructureReport> =
            kernel_pool.iter().take(named.len() + 4).cloned().chain(kernel_pool.last().cloned()).collect();
        battery.lines.push(criterion_index(&index_pool, 64));
    } else {
        let known = [
            vec![],
            vec![StructureReport::analyze(&rank_one_stencil()).expect("in scope")],
            named.clone(),
        ];
        battery.lines.push(criterion_rank_cases(&known, "the fixed examples"));
    }
    battery.lines.push(criterion_alternative_structure(&pool, &[1, 2]));
    battery
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trace_generator() {
        let mut r = rng(7);
        for k in 1..=3 {
            let v = random_zero_trace(&mut r, 2, k).unwrap();
            assert!(v.in_zero_trace_class(k));
            assert!(!v.is_zero());
        }
    }

    #[test]
    fn empty_search_box_reports_no_instances() {
        let (found, stats) = random_paper_stencils(1, 5, SearchBox { max_n: 1, max_abs: 0 }, &[]);
        assert!(found.is_empty());
        assert!(stats.draws > 0);
        let config = VerifyConfig {
            random_count: 5,
            search: SearchBox { max_n: 1, max_abs: 0 },
            ..VerifyConfig::full()
        };
        let b = run(&config);
        assert!(b.all_passed(), "{b}");
        assert!(b.lines[0].details[0].starts_with("no instances"));
    }

    #[test]
    fn fast_battery_passes() {
        let b = run(&VerifyConfig::fast());
        assert!(b.all_passed(), "{b}");
    }
}
