//! End-to-end pipeline (assemble, banded solve, reconstruct) plus
//! multi-mesh convergence studies and their serializers.

use crate::assembly::{assemble, AssembledSystem, AssemblyError};
use crate::banded::BandedError;
use crate::problem::{Bvp, KnotEvalError, ProblemError};
use crate::scalar::Real;
use crate::spline::SplineSolution;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linear(#[from] BandedError),
    #[error(transparent)]
    Knot(#[from] KnotEvalError),
    #[error(
        "the problem has no analytic reference; error tables and convergence studies need one"
    )]
    MissingReference,
    #[error("bad mesh ladder: {detail}")]
    BadLadder { detail: String },
}

/// Assemble the banded system on a k-subinterval mesh, solve it, and
/// reconstruct the full spline.
pub fn solve_bvp<R: Real>(p: &Bvp<R>, k: usize) -> Result<SplineSolution<R>, SolveError> {
    let mesh = p.mesh(k)?;
    let sys = assemble(p, &mesh)?;
    let y_interior = sys.matrix.lu()?.solve(&sys.rhs)?;
    Ok(SplineSolution::reconstruct(p, &mesh, &y_interior)?)
}

/// Max-absolute knot errors against the analytic reference, one entry per
/// derivative order 0..=4.
#[derive(Debug, Clone)]
pub struct ErrorTable<R> {
    pub k: usize,
    pub h: R,
    pub max_errors: [R; 5],
}

fn table_and_value_scale<R: Real>(
    p: &Bvp<R>,
    s: &SplineSolution<R>,
) -> Result<(ErrorTable<R>, R), SolveError> {
    let r = p.reference().ok_or(SolveError::MissingReference)?;
    let mesh = s.mesh();
    let seqs: [&[R]; 5] = [s.y(), s.m(), s.M(), s.n(), s.N()];
    let mut max_errors = [R::zero(); 5];
    let mut ymax = R::zero();
    for (i, &x) in mesh.knots().iter().enumerate() {
        for (order, seq) in seqs.iter().enumerate() {
            let exact = r.eval(order, x).map_err(|e| KnotEvalError {
                what: "reference",
                knot: i,
                x: format!("{x}"),
                source: e,
            })?;
            if order == 0 {
                ymax = ymax.max(exact.abs());
            }
            max_errors[order] = max_errors[order].max((seq[i] - exact).abs());
        }
    }
    Ok((ErrorTable { k: mesh.k(), h: mesh.h(), max_errors }, ymax))
}

/// Knot errors of a solution against its problem's analytic reference.
pub fn error_table<R: Real>(
    p: &Bvp<R>,
    s: &SplineSolution<R>,
) -> Result<ErrorTable<R>, SolveError> {
    table_and_value_scale(p, s).map(|(t, _)| t)
}

/// Error tables over a mesh ladder with observed orders between consecutive
/// rungs. `floor[j][d]` marks errors already dominated by roundoff (below
/// 1e3 * machine epsilon * max |y|); orders touching a floored rung are not
/// computed.
#[derive(Debug, Clone)]
pub struct ConvergenceReport<R> {
    pub rungs: Vec<ErrorTable<R>>,
    pub floor: Vec<[bool; 5]>,
    pub orders: Vec<[Option<R>; 5]>,
}

pub fn convergence_study<R: Real>(
    p: &Bvp<R>,
    ks: &[usize],
) -> Result<ConvergenceReport<R>, SolveError> {
    if ks.is_empty() {
        return Err(SolveError::BadLadder { detail: "ladder is empty".into() });
    }
    if let Some(&bad) = ks.iter().find(|&&k| k < 8) {
        return Err(SolveError::BadLadder {
            detail: format!("k = {bad} is below the minimum of 8"),
        });
    }
    if let Some(w) = ks.windows(2).find(|w| w[1] <= w[0]) {
        return Err(SolveError::BadLadder {
            detail: format!("ladder must be strictly increasing, got {} then {}", w[0], w[1]),
        });
    }
    if p.reference().is_none() {
        return Err(SolveError::MissingReference);
    }

    let mut rungs = Vec::with_capacity(ks.len());
    let mut floor = Vec::with_capacity(ks.len());
    for &k in ks {
        let s = solve_bvp(p, k)?;
        let (table, ymax) = table_and_value_scale(p, &s)?;
        let threshold = R::of(1e3) * R::epsilon() * ymax;
        floor.push(std::array::from_fn(|d| table.max_errors[d] < threshold));
        rungs.push(table);
    }

    let mut orders = Vec::with_capacity(rungs.len().saturating_sub(1));
    for j in 0..rungs.len() - 1 {
        orders.push(std::array::from_fn(|d| {
            let (e0, e1) = (rungs[j].max_errors[d], rungs[j + 1].max_errors[d]);
            if floor[j][d] || floor[j + 1][d] || e0 <= R::zero() || e1 <= R::zero() {
                None
            } else {
                Some((e0 / e1).ln() / (rungs[j].h / rungs[j + 1].h).ln())
            }
        }));
    }
    Ok(ConvergenceReport { rungs, floor, orders })
}

impl<R: Real> ConvergenceReport<R> {
    /// One row per rung. Order columns carry the observed order achieved
    /// arriving at that rung (blank on the first rung and where suppressed).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,h,err0,err1,err2,err3,err4,order0,order1,order2,order3,order4,floor0,floor1,floor2,floor3,floor4\n",
        );
        for (j, rung) in self.rungs.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}", rung.k, rung.h));
            for e in rung.max_errors {
                out.push_str(&format!(",{e:.16e}"));
            }
            for d in 0..5 {
                match (j > 0).then(|| self.orders[j - 1][d]).flatten() {
                    Some(o) => out.push_str(&format!(",{o:.16e}")),
                    None => out.push(','),
                }
            }
            for d in 0..5 {
                out.push_str(if self.floor[j][d] { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }

    /// Markdown table mirroring the published layout: h, then the five
    /// max-error columns, rounded to 4 significant digits.
    pub fn to_markdown(&self) -> String {
        let mut out =
            String::from("| h | y | y^(1) | y^(2) | y^(3) | y^(4) |\n|---|---|---|---|---|---|\n");
        for rung in &self.rungs {
            out.push_str(&format!("| {:.3e} |", rung.h));
            for e in rung.max_errors {
                out.push_str(&format!(" {e:.3e} |"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"rungs\": [");
        for (j, rung) in self.rungs.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "\n    {{\"k\": {}, \"h\": {:.16e}, \"max_errors\": [{}], \"floor\": [{}]}}",
                rung.k,
                rung.h,
                rung.max_errors.iter().map(|e| format!("{e:.16e}")).collect::<Vec<_>>().join(", "),
                self.floor[j].iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", "),
            ));
        }
        out.push_str("\n  ],\n  \"orders\": [");
        for (j, row) in self.orders.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "\n    [{}]",
                row.iter()
                    .map(|o| match o {
                        Some(v) => format!("{v:.16e}"),
                        None => "null".into(),
                    })
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        out.push_str("\n  ]\n}\n");
        out
    }
}

/// Flat JSON for one solved spline: mesh descriptor, knot sequences, and
/// (when a reference exists) exact values and errors per derivative order.
pub fn solution_json<R: Real>(p: &Bvp<R>, s: &SplineSolution<R>) -> Result<String, KnotEvalError> {
    let mesh = s.mesh();
    let arr = |v: &[R]| v.iter().map(|e| format!("{e:.16e}")).collect::<Vec<_>>().join(", ");
    let mut out = format!(
        "{{\n  \"k\": {},\n  \"h\": {:.16e},\n  \"x\": [{}],\n  \"y\": [{}],\n  \"m\": [{}],\n  \"M\": [{}],\n  \"n\": [{}],\n  \"N\": [{}]",
        mesh.k(),
        mesh.h(),
        arr(mesh.knots()),
        arr(s.y()),
        arr(s.m()),
        arr(s.M()),
        arr(s.n()),
        arr(s.N()),
    );
    if let Some(r) = p.reference() {
        let seqs: [&[R]; 5] = [s.y(), s.m(), s.M(), s.n(), s.N()];
        for (order, (name, seq)) in ["y", "m", "M", "n", "N"].into_iter().zip(seqs).enumerate() {
            let mut exact = Vec::with_capacity(seq.len());
            let mut err = Vec::with_capacity(seq.len());
            for (i, (&x, &v)) in mesh.knots().iter().zip(seq).enumerate() {
                let ex = r.eval(order, x).map_err(|e| KnotEvalError {
                    what: "reference",
                    knot: i,
                    x: format!("{x}"),
                    source: e,
                })?;
                exact.push(ex);
                err.push((v - ex).abs());
            }
            out.push_str(&format!(
                ",\n  \"exact_{name}\": [{}],\n  \"err_{name}\": [{}]",
                arr(&exact),
                arr(&err)
            ));
        }
    }
    out.push_str("\n}\n");
    Ok(out)
}

/// Markdown knot table, 4 significant digits; error columns appended when a
/// reference exists.
pub fn solution_markdown<R: Real>(
    p: &Bvp<R>,
    s: &SplineSolution<R>,
) -> Result<String, KnotEvalError> {
    let mesh = s.mesh();
    let seqs: [&[R]; 5] = [s.y(), s.m(), s.M(), s.n(), s.N()];
    let reference = p.reference();
    let mut out = String::from("| x | y | m | M | n | N |");
    if reference.is_some() {
        out.push_str(" err y | err m | err M | err n | err N |");
    }
    out.push('\n');
    out.push_str("|---|---|---|---|---|---|");
    if reference.is_some() {
        out.push_str("---|---|---|---|---|");
    }
    out.push('\n');
    for (i, &x) in mesh.knots().iter().enumerate() {
        out.push_str(&format!("| {x:.3e} |"));
        for seq in seqs {
            out.push_str(&format!(" {:.3e} |", seq[i]));
        }
        if let Some(r) = reference {
            for (order, seq) in seqs.iter().enumerate() {
                let exact = r.eval(order, x).map_err(|e| KnotEvalError {
                    what: "reference",
                    knot: i,
                    x: format!("{x}"),
                    source: e,
                })?;
                out.push_str(&format!(" {:.3e} |", (seq[i] - exact).abs()));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Dense dump of an assembled system: one row per equation, matrix entries
/// then the right-hand side as the final column.
pub fn system_csv<R: Real>(sys: &AssembledSystem<R>) -> String {
    let n = sys.matrix.n();
    let mut out = String::new();
    for j in 0..n {
        out.push_str(&format!("c{j},"));
    }
    out.push_str("rhs\n");
    for i in 0..n {
        for j in 0..n {
            out.push_str(&format!("{:.16e},", sys.matrix.get(i, j)));
        }
        out.push_str(&format!("{:.16e}\n", sys.rhs[i]));
    }
    out
}
