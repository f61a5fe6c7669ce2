//! Text reports and CSV export.

use std::fmt::Write;

use ddbvp::difference::{spectrum, RegimeReport, ShiftMatrix};
use ddbvp::oracle::{assemble, compare_spectrum, convergence_study, index_estimate};
use ddbvp::piecewise::Side;
use ddbvp::rational::{int, to_f64};
use ddbvp::solver::{index_report_with, SmoothnessTarget, SolutionFamily, SolutionStatus};
use ddbvp::{PiecewisePoly, Rational, StructureReport};

use crate::problem::Loaded;

pub const INPUT_BEGIN: &str = "--- input ---";
pub const INPUT_END: &str = "--- end input ---";

fn complex(re: f64, im: f64) -> String {
    // Adding 0.0 turns -0.0 into 0.0.
    format!("{:.12} {:+.12}i", re + 0.0, im + 0.0)
}

fn list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn target_name(t: SmoothnessTarget) -> &'static str {
    match t {
        SmoothnessTarget::Generalized => "generalized",
        SmoothnessTarget::Interval => "interval",
        SmoothnessTarget::Full => "full",
    }
}

fn matrix_rows(out: &mut String, m: &ShiftMatrix) {
    let e = m.entries();
    for i in 0..e.rows() {
        let _ = writeln!(out, "    [{}]", list(e.row(i)));
    }
}

/// Header shared by every regime: the shift matrix and its determinants.
fn regime_header(out: &mut String, loaded: &Loaded, m: &ShiftMatrix, regime: &RegimeReport) {
    let p = &loaded.problem;
    let _ = writeln!(out, "stencil b = {}  (N = {}, k = {})", p.stencil, p.n(), p.k);
    let _ = writeln!(out, "regime: {:?} ({})", regime.regime, regime.regime);
    let _ = writeln!(out, "R1 ({0}x{0}):", m.size());
    matrix_rows(out, m);
    let _ = writeln!(out, "det R1 = {}", regime.det_r1);
    let _ = writeln!(out, "det R2 = {}", regime.det_r2);
}

/// Report for a stencil outside `det R1 != 0, det R2 = 0`.
pub fn other_regime(loaded: &Loaded, notice: &str) -> String {
    let m = ShiftMatrix::build(&loaded.problem.stencil);
    let regime = ddbvp::classify_regime(&m);
    let mut out = String::new();
    regime_header(&mut out, loaded, &m, &regime);
    let _ = writeln!(out, "notice: {notice}");
    out
}

pub fn analyze(loaded: &Loaded, core: &StructureReport) -> ddbvp::Result<String> {
    let mut out = String::new();
    let k = loaded.problem.k;
    regime_header(&mut out, loaded, &core.matrix, &core.regime);

    let g = &core.gamma;
    let _ = writeln!(out, "anchor m = {}", g.m);
    for (i, c) in &g.gamma1 {
        let _ = writeln!(out, "    gamma1_{i} = {c}");
    }
    for (i, c) in &g.gamma2 {
        let _ = writeln!(out, "    gamma2_{i} = {c}");
    }
    let a = &core.alt;
    let _ = writeln!(out, "alternative anchor m' = {}", a.m_prime);
    for (i, c) in &a.gamma1 {
        let _ = writeln!(out, "    gamma1'_{i} = {c}");
    }
    for (i, c) in &a.gamma2 {
        let _ = writeln!(out, "    gamma2'_{i} = {c}");
    }

    let e = &core.ends;
    let _ = writeln!(out, "G1 (first column, first row deleted) = ({})", list(&e.g1_first));
    let _ = writeln!(out, "G2 (last column, last row deleted) = ({})", list(&e.g2_last));
    if e.dependent {
        let _ = writeln!(out, "end columns: dependent");
        if let Some((a1, a2)) = &e.alpha {
            let _ = writeln!(out, "    alpha = ({a1}, {a2})");
        }
        if let Some(l) = e.l {
            let _ = writeln!(out, "    l = {l}");
        }
    } else {
        let _ = writeln!(out, "end columns: independent");
    }
    let mm = core.m_matrix();
    let _ = writeln!(out, "boundary matrix M = {mm}, rank {}", mm.rank());

    let _ = writeln!(out, "spectrum of R1:");
    for z in spectrum(&core.matrix) {
        let _ = writeln!(out, "    {}", complex(z.re, z.im));
    }

    let rep = index_report_with(core, k)?;
    let t = &rep.table;
    let _ = writeln!(out, "index table (k = {k}):");
    let _ = writeln!(out, "    codim R_Q   = {} (measured {})", t.codim_rq, rep.codim_rq);
    let _ = writeln!(out, "    codim A_R   = {} (measured {})", t.codim_ar, rep.codim_ar);
    let _ = writeln!(out, "    codim B_R   = {} (measured {})", t.codim_br, rep.codim_br);
    let _ = writeln!(out, "    ind L_B     = {} (measured {})", t.ind_lb, rep.ind_lb);
    let _ = writeln!(out, "    ind L_A     = {} (measured {})", t.ind_la, rep.ind_la);
    let _ = writeln!(out, "generalized problem: dim ker = {}, solvability conditions = {}", rep.ker_ar, rep.codim_ar_l2);
    let _ = writeln!(out, "kernel certificate rank = {}", rep.kernel_certificate_rank);
    for c in &rep.checks {
        let mark = if c.confirmed { "confirmed" } else { "NOT confirmed" };
        let _ = writeln!(out, "    [{mark}] {}: {}", c.claim, c.detail);
    }

    if !loaded.n_values.is_empty() {
        let _ = writeln!(out, "discrete index of A_R^h (singular values below 1e-8 relative):");
        for &n in &loaded.n_values {
            let ops = assemble(&core.stencil, n, loaded.a.as_ref())?;
            let est = index_estimate(&ops);
            let _ = writeln!(
                out,
                "    n = {n}: dim ker = {}, dim coker = {}, index = {}",
                est.kernel_dim,
                est.cokernel_dim,
                est.index()
            );
        }
    }
    Ok(out)
}

fn section_function(out: &mut String, title: &str, f: &PiecewisePoly) {
    let _ = writeln!(out, "{title}:");
    for (i, p) in f.pieces().iter().enumerate() {
        let b = f.breakpoints();
        let shift = if b[i] < int(0) {
            format!("t + {}", -&b[i])
        } else if b[i] == int(0) {
            "t".to_string()
        } else {
            format!("t - {}", b[i])
        };
        let _ = writeln!(out, "    ({}, {}): {}  [x = {shift}]", b[i], b[i + 1], p);
    }
}

pub fn solve(loaded: &Loaded, fam: &SolutionFamily) -> ddbvp::Result<String> {
    let p = &loaded.problem;
    let mut out = String::new();
    let _ = writeln!(out, "stencil b = {}  (N = {}, k = {}, target {})", p.stencil, p.n(), p.k, target_name(p.target));
    if p.is_homogeneous() {
        let _ = writeln!(out, "boundary data: zero");
    } else {
        let _ = writeln!(out, "boundary data: f1(t) = {} on [-N, 0], f2(t) = {} on [N+1, 2N+1]", p.f1, p.f2);
    }
    let status = match &fam.status {
        SolutionStatus::Unique => "unique".to_string(),
        SolutionStatus::Affine(d) => format!("affine family of dimension {d}"),
        SolutionStatus::Infeasible => "infeasible".to_string(),
    };
    let _ = writeln!(out, "status: {status}");
    let _ = writeln!(out, "M = {}, rank {}", fam.m_matrix, fam.m_rank);
    let _ = writeln!(
        out,
        "constraint stack: {} rows, rank {}",
        fam.constraint_matrix.rows(),
        fam.constraint_rank
    );
    if fam.data_constraints.is_empty() {
        let _ = writeln!(out, "data constraints: none");
    } else {
        let _ = writeln!(out, "data constraints:");
        for c in &fam.data_constraints {
            let _ = writeln!(out, "    {} = {}", c.label, c.value);
        }
    }
    if !fam.residuals.is_empty() {
        let _ = writeln!(out, "residuals:");
        for c in &fam.residuals {
            let _ = writeln!(out, "    {} = {}", c.label, c.value);
        }
    }
    if let Some((d1, d2)) = &fam.constants {
        let _ = writeln!(out, "constants: d1 = {d1}, d2 = {d2}");
    }
    if !p.is_homogeneous() {
        section_function(&mut out, "boundary extension psi", &fam.psi);
    }
    if let Some(v) = &fam.particular {
        section_function(&mut out, "solution v", v);
    }
    if let Some(w) = &fam.image {
        section_function(&mut out, "image w = R_Q v", w);
    }
    for (i, (b, (c1, c2))) in fam.kernel_basis.iter().zip(&fam.kernel_constants).enumerate() {
        section_function(&mut out, &format!("kernel element {} (c1 = {c1}, c2 = {c2})", i + 1), b);
    }
    if let Some(s) = &fam.smoothness {
        let _ = writeln!(out, "smoothness (order k+2 = {}):", s.k + 2);
        let pieces: Vec<&str> = s.piece_smooth.iter().map(|&b| if b { "yes" } else { "no" }).collect();
        let _ = writeln!(out, "    on each unit interval: {}", pieces.join(", "));
        let _ = writeln!(out, "    v on (0, N+1): {}", yes_no(s.interval_smooth));
        let _ = writeln!(out, "    R_Q v on (0, N+1): {}", yes_no(s.image_smooth));
        let _ = writeln!(out, "    y on (-N, 2N+1): {}", yes_no(s.full_smooth));
        if !s.jumps.is_empty() {
            let _ = writeln!(out, "    jumps at interior integers (node, order, value):");
            for j in &s.jumps {
                let _ = writeln!(out, "        {}, {}, {}", j.node, j.order, j.value);
            }
        }
        let mismatches: Vec<_> = s.endpoint_mismatches.iter().filter(|j| j.value != int(0)).collect();
        if !mismatches.is_empty() {
            let _ = writeln!(out, "    mismatches with the boundary data (node, order, value):");
            for j in mismatches {
                let _ = writeln!(out, "        {}, {}, {}", j.node, j.order, j.value);
            }
        }
    }
    if !loaded.n_values.is_empty() && fam.status == SolutionStatus::Unique {
        let study = convergence_study(p, &loaded.n_values)?;
        let _ = writeln!(out, "finite-difference cross-check:");
        for r in &study.rows {
            let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "    n = {}: max node error {:.3e}, order {order}", r.n, r.max_error);
        }
    }
    let _ = writeln!(out, "{INPUT_BEGIN}");
    out.push_str(&loaded.file.to_toml());
    let _ = writeln!(out, "{INPUT_END}");
    Ok(out)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn spectrum_report(core: &StructureReport, ns: &[usize]) -> ddbvp::Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "stencil b = {}  (N = {})", core.stencil, core.n());
    let _ = writeln!(out, "eigenvalues of R1:");
    for z in spectrum(&core.matrix) {
        let _ = writeln!(out, "    {}", complex(z.re, z.im));
    }
    for &n in ns {
        let c = compare_spectrum(&core.stencil, n)?;
        let _ = writeln!(out, "grid n = {n} ({} points):", c.full.len());
        let _ = writeln!(
            out,
            "    off-node block: {} eigenvalues, max deviation from R1 {:.3e}, multiplicities {}",
            c.off_node.len(),
            c.max_deviation,
            if c.multiplicities_match { "match" } else { "DIFFER" }
        );
        let _ = writeln!(out, "    integer-node block ({} eigenvalues):", c.nodal.len());
        for z in &c.nodal {
            let _ = writeln!(out, "        {}", complex(z.re, z.im));
        }
    }
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// CSV of `t, v, v', R_Q v, f0` on `[0, N+1]` at spacing `step`, with the
/// two one-sided limits at every breakpoint in place of a single row.
pub fn solution_csv(fam: &SolutionFamily, f0: &PiecewisePoly, n: usize, step: f64) -> ddbvp::Result<String> {
    let end = int(n as i64 + 1);
    let zero = || PiecewisePoly::zero(int(0), end.clone());
    let v = match &fam.particular {
        Some(v) => v.clone(),
        None => zero()?,
    };
    let w = match &fam.image {
        Some(w) => w.clone(),
        None => zero()?,
    };
    let dv = v.derivative();
    let fns = [&v, &dv, &w, f0];

    let mut breaks: Vec<Rational> = fns.iter().flat_map(|f| f.breakpoints().iter().cloned()).collect();
    breaks.sort();
    breaks.dedup();
    let break_f64: Vec<f64> = breaks.iter().map(to_f64).collect();

    // (t, side rank, values); side rank orders left limit < value < right limit.
    let mut rows: Vec<(f64, u8, [f64; 4])> = Vec::new();
    let last = to_f64(&end);
    let count = (last / step).floor() as usize;
    for i in 0..=count {
        let t = i as f64 * step;
        if break_f64.iter().any(|b| (b - t).abs() <= 1e-12 * last) {
            continue;
        }
        rows.push((t, 1, fns.map(|f| f.eval_f64(t, 0))));
    }
    for (x, xf) in breaks.iter().zip(&break_f64) {
        for (side, rank) in [(Side::Left, 0u8), (Side::Right, 2u8)] {
            if (side == Side::Left && x == &int(0)) || (side == Side::Right && x == &end) {
                continue;
            }
            let mut vals = [0.0; 4];
            for (slot, f) in vals.iter_mut().zip(fns) {
                *slot = to_f64(&f.limit(x, 0, side)?);
            }
            rows.push((*xf, rank, vals));
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut out = String::from("t,v,dv,w,f0\n");
    for (t, _, vals) in rows {
        let _ = writeln!(out, "{},{}", num(t), vals.map(num).join(","));
    }
    Ok(out)
}
