//! Acceptance battery. Each criterion prints one PASS/FAIL line followed by
//! its details; the test fails if any criterion fails.

use ddbvp::rational::{frac, int};
use ddbvp::verify::{
    criterion_alternative_structure, criterion_convergence, criterion_image_characterization,
    criterion_index, criterion_kernel, criterion_operator_codims, criterion_rank_cases,
    criterion_rq_codim, criterion_spectrum, criterion_worked_example, named_stencils,
    random_paper_stencils, rank_case_instances, rank_one_stencil, worked_example_expected,
    worked_example_problem, CheckLine, SearchBox,
};
use ddbvp::{solver, PiecewisePoly, Poly, Rational, StructureReport};
use num_traits::{One, Zero};
use std::io::Write;

const SEED: u64 = 20240601;

/// Independent derivation of the worked example, using only rational
/// arithmetic on coefficient vectors.
mod symbolic {
    use super::*;

    pub type P = Vec<Rational>;

    pub fn eval(p: &P, x: &Rational) -> Rational {
        p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn integrate(p: &P) -> P {
        let mut out = vec![Rational::zero()];
        for (i, c) in p.iter().enumerate() {
            out.push(c / Rational::from_integer((i as i64 + 1).into()));
        }
        out
    }

    pub fn add(a: &P, b: &P) -> P {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| {
                a.get(i).cloned().unwrap_or_else(Rational::zero)
                    + b.get(i).cloned().unwrap_or_else(Rational::zero)
            })
            .collect()
    }

    pub fn scale(a: &P, s: &Rational) -> P {
        a.iter().map(|c| c * s).collect()
    }

    /// p(x + 1) via binomial expansion.
    pub fn shift_one(p: &P) -> P {
        let mut out = vec![Rational::zero(); p.len()];
        for (i, c) in p.iter().enumerate() {
            let mut binom = Rational::one();
            for j in 0..=i {
                out[j] += c * &binom;
                binom = binom * Rational::from_integer(((i - j) as i64).into())
                    / Rational::from_integer(((j + 1) as i64).into());
            }
        }
        out
    }

    /// N = 1 stencil (bm, b0, bp), f0 = constant c. Returns v on (0,1) and
    /// on (1,2), both in local coordinates on (0,1).
    pub fn solve_n1(bm: i64, b0: i64, bp: i64, c: i64) -> (P, P, Rational, Rational) {
        // w = d1 t + d2 - ∬c; represent the data part and the two unit modes.
        let f: P = vec![int(c)];
        let data = scale(&integrate(&integrate(&f)), &int(-1));
        let modes: [P; 2] = [vec![int(0), int(1)], vec![int(1)]];
        // (R1 U v) = U w, R1 = [[b0, bp], [bm, b0]]; invert the 2x2 matrix.
        let det = int(b0 * b0 - bp * bm);
        let inv = [
            [int(b0) / &det, int(-bp) / &det],
            [int(-bm) / &det, int(b0) / &det],
        ];
        // components of w on (0,1) and (1,2) in local coordinates
        let split = |w: &P| (w.clone(), shift_one(w));
        let v_of = |w: &P| {
            let (wa, wb) = split(w);
            (
                add(&scale(&wa, &inv[0][0]), &scale(&wb, &inv[0][1])),
                add(&scale(&wa, &inv[1][0]), &scale(&wb, &inv[1][1])),
            )
        };
        // Conditions: v1(0) = 0, v2(1) = 0, v1(1) = v2(0).
        let conds = |w: &P| {
            let (v1, v2) = v_of(w);
            [
                eval(&v1, &int(0)),
                eval(&v2, &int(1)),
                eval(&v1, &int(1)) - eval(&v2, &int(0)),
            ]
        };
        let cd = conds(&data);
        let c0 = conds(&modes[0]);
        let c1 = conds(&modes[1]);
        // Pick two independent conditions and solve by Cramer's rule.
        let pairs = [(0, 1), (0, 2), (1, 2)];
        for (i, j) in pairs {
            let det = &c0[i] * &c1[j] - &c1[i] * &c0[j];
            if det.is_zero() {
                continue;
            }
            let (ri, rj) = (-&cd[i], -&cd[j]);
            let d1 = (&ri * &c1[j] - &c1[i] * &rj) / &det;
            let d2 = (&c0[i] * &rj - &ri * &c0[j]) / &det;
            let w = add(&add(&scale(&modes[0], &d1), &scale(&modes[1], &d2)), &data);
            let all = conds(&w);
            assert!(all.iter().all(Zero::is_zero), "oracle conditions inconsistent");
            let (v1, v2) = v_of(&w);
            return (v1, v2, d1, d2);
        }
        panic!("oracle system singular");
    }

    pub fn derivative(p: &P) -> P {
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
            .collect()
    }
}

/// Writes through `io::stdout` rather than `println!`, so the lines appear
/// in `cargo test` output even when the test passes.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn print(n: usize, line: &CheckLine) -> bool {
    emit(&format!("criterion {n}: {}", line.summary()));
    for d in &line.details {
        emit(&format!("    {d}"));
    }
    line.passed
}

fn analyzed(stencils: &[ddbvp::Stencil]) -> Vec<StructureReport> {
    stencils.iter().map(|s| StructureReport::analyze(s).unwrap()).collect()
}

fn criterion_5_with_oracle() -> CheckLine {
    let mut line = criterion_worked_example();
    let (v1, v2, d1, d2) = symbolic::solve_n1(1, 0, 1, 1);
    line.details.push(format!(
        "independent oracle: d1 = {d1}, d2 = {d2}, v1 = {}, v2 = {} (local coordinates)",
        Poly::new(v1.clone()),
        Poly::new(v2.clone())
    ));
    let oracle_v = PiecewisePoly::new(vec![int(0), int(1), int(2)], vec![Poly::new(v1.clone()), Poly::new(v2.clone())])
        .unwrap();
    let expected = worked_example_expected();
    let crate_v = solver::solve(&worked_example_problem()).unwrap().particular.unwrap();
    let jump = symbolic::eval(&symbolic::derivative(&v2), &int(0))
        - symbolic::eval(&symbolic::derivative(&v1), &int(1));
    let agree = oracle_v.sub(&expected).unwrap().is_zero()
        && oracle_v.sub(&crate_v).unwrap().is_zero()
        && d1 == int(1)
        && d2 == frac(-1, 2)
        && jump == int(2);
    if !agree {
        line.passed = false;
        line.details.push("FAILED: oracle disagrees with the solver or the closed form".into());
    } else {
        line.details.push(format!("oracle matches the solver and the closed form; oracle jump {jump}"));
    }
    line
}

#[test]
fn acceptance_criteria() {
    emit("");
    let named = analyzed(&named_stencils());
    let (random, stats) = random_paper_stencils(SEED, 20, SearchBox { max_n: 3, max_abs: 3 }, &named_stencils());
    assert!(stats.structure_failures.is_empty(), "{:?}", stats.structure_failures);
    let mut pool = named.clone();
    pool.extend(random.iter().cloned());
    let rank_one = StructureReport::analyze(&rank_one_stencil()).unwrap();

    let mut results = Vec::new();

    let mut c1 = criterion_image_characterization(&pool, &[1, 2, 3], 2, SEED);
    if random.len() < 20 {
        c1.passed = false;
        c1.details.push(format!("FAILED: only {} random stencils found", random.len()));
    }
    c1.details.push(format!(
        "random pool ({} draws): {}",
        stats.draws,
        random.iter().map(|c| c.stencil.to_string()).collect::<Vec<_>>().join(" ")
    ));
    results.push(print(1, &c1));

    results.push(print(2, &criterion_rq_codim(&named, &[0, 1, 2])));
    results.push(print(3, &criterion_operator_codims(&named, &[0, 1])));

    let mut kernel_pool = pool.clone();
    kernel_pool.push(rank_one.clone());
    results.push(print(4, &criterion_kernel(&kernel_pool)));

    results.push(print(5, &criterion_5_with_oracle()));

    let found = rank_case_instances(SearchBox { max_n: 3, max_abs: 3 }, SEED, 4000);
    results.push(print(
        6,
        &criterion_rank_cases(&found, "N <= 3, |b_j| <= 3 (exhaustive for N <= 2, 4000 draws at N = 3)"),
    ));

    results.push(print(7, &criterion_spectrum(&pool, &[8, 16], 1e-8)));
    results.push(print(8, &criterion_convergence(&[32, 64, 128])));

    let mut index_pool = named.clone();
    index_pool.push(rank_one);
    index_pool.extend(random.iter().take(5).cloned());
    results.push(print(9, &criterion_index(&index_pool, 64)));

    results.push(print(10, &criterion_alternative_structure(&pool, &[1, 2])));

    let passed = results.iter().filter(|&&p| p).count();
    emit(&format!("acceptance: {passed}/{} criteria passed", results.len()));
    assert!(results.iter().all(|&p| p));
}
