//! Problem instances: the uniform mesh, the BVP description with clamped
//! boundary values, optional analytic references, built-in examples, and the
//! JSON problem-file loader.
//!
//! The equation convention throughout is y'''' + f(x) y = g(x) on [a, b] with
//! y(a) = alpha0, y(b) = alpha1, y'(a) = beta0, y'(b) = beta1.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::expr::{parse, EvalError, Expr, ParseError};
use crate::scalar::Real;

/// Coefficient function. Expression-backed functions can fail pointwise
/// (domain errors), so evaluation is fallible.
pub type CoefFn<R> = Arc<dyn Fn(R) -> Result<R, EvalError> + Send + Sync>;

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("k = {k} is too small: the discretization needs at least 8 subintervals")]
    KTooSmall { k: usize },
    #[error("invalid interval: {detail}")]
    BadInterval { detail: String },
    #[error("boundary values must be finite: {detail}")]
    BadBoundary { detail: String },
    #[error("unknown example id {id}; available ids are 1, 2, 3")]
    UnknownExample { id: u32 },
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed problem file: {0}")]
    Malformed(String),
    #[error("bad `{which}` expression: {source}")]
    BadExpression { which: String, source: ParseError },
    #[error("reference solution rejected: {0}")]
    BadReference(String),
}

/// A coefficient evaluation that failed at a mesh knot, with enough context
/// to point at the offending input.
#[derive(Debug, Clone, thiserror::Error)]
#[error("cannot evaluate {what} at knot {knot} (x = {x}): {source}")]
pub struct KnotEvalError {
    pub what: &'static str,
    pub knot: usize,
    pub x: String,
    #[source]
    pub source: EvalError,
}

/// Uniform mesh of k subintervals on [a, b], knots x_i = a + i h.
#[derive(Debug, Clone)]
pub struct Mesh<R> {
    a: R,
    b: R,
    k: usize,
    h: R,
    knots: Vec<R>,
}

impl<R: Real> Mesh<R> {
    /// k >= 8 so the wide border rows and at least one pure interior row
    /// coexist without overlap.
    pub fn new(a: R, b: R, k: usize) -> Result<Self, ProblemError> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(ProblemError::BadInterval {
                detail: format!("need finite b > a, got a = {a}, b = {b}"),
            });
        }
        if k < 8 {
            return Err(ProblemError::KTooSmall { k });
        }
        let h = (b - a) / R::int(k as i64);
        let knots: Vec<R> = (0..=k).map(|i| a + R::int(i as i64) * h).collect();
        debug_assert!(
            (knots[k] - b).abs() <= R::int(4) * R::epsilon() * b.abs().max(a.abs()).max(R::one()),
            "accumulated knot drift at the right endpoint"
        );
        Ok(Mesh { a, b, k, h, knots })
    }

    pub fn a(&self) -> R {
        self.a
    }

    pub fn b(&self) -> R {
        self.b
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> R {
        self.h
    }

    pub fn knots(&self) -> &[R] {
        &self.knots
    }
}

/// The analytic solution and its first four derivatives, when known.
#[derive(Clone)]
pub struct AnalyticReference<R> {
    derivs: [CoefFn<R>; 5],
}

impl<R: Real> AnalyticReference<R> {
    pub fn new(derivs: [CoefFn<R>; 5]) -> Self {
        AnalyticReference { derivs }
    }

    /// Exact derivative of the given order, 0 through 4.
    pub fn deriv(&self, order: usize) -> &CoefFn<R> {
        &self.derivs[order]
    }

    pub fn eval(&self, order: usize, x: R) -> Result<R, EvalError> {
        (self.derivs[order])(x)
    }

    /// Self-consistency: the claimed solution must hit the boundary values
    /// (1e-12 relative, widened for narrow scalars) and satisfy the equation
    /// to 1e-10 relative at 100 uniform sample points.
    // comparisons stay negated so a NaN anywhere fails validation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn validate(&self, p: &Bvp<R>) -> Result<(), ProblemError> {
        let eps = R::epsilon();
        let tol_b = R::of(1e-12).max(R::of(4.5) * eps);
        let tol_r = R::of(1e-10).max(R::of(450.0) * eps);
        let reject = |msg: String| ProblemError::BadReference(msg);
        let ev = |order: usize, x: R| -> Result<R, ProblemError> {
            self.eval(order, x)
                .map_err(|e| reject(format!("cannot evaluate derivative {order} at x = {x}: {e}")))
        };

        let checks = [
            (0usize, p.a, p.alpha0, "y(a)"),
            (0, p.b, p.alpha1, "y(b)"),
            (1, p.a, p.beta0, "y'(a)"),
            (1, p.b, p.beta1, "y'(b)"),
        ];
        for (order, x, want, label) in checks {
            let got = ev(order, x)?;
            let tol = tol_b * want.abs().max(R::one());
            if !((got - want).abs() <= tol) {
                return Err(reject(format!(
                    "{label} = {got:e} but the boundary data says {want:e}"
                )));
            }
        }

        let n = 100;
        let step = (p.b - p.a) / R::int(n as i64 - 1);
        for j in 0..n {
            let x = if j == n - 1 { p.b } else { p.a + R::int(j as i64) * step };
            let y = ev(0, x)?;
            let y4 = ev(4, x)?;
            let fv = p.f_at(x).map_err(|e| reject(format!("cannot evaluate f at x = {x}: {e}")))?;
            let gv = p.g_at(x).map_err(|e| reject(format!("cannot evaluate g at x = {x}: {e}")))?;
            let residual = y4 + fv * y - gv;
            let scale = (y4.abs() + (fv * y).abs() + gv.abs()).max(R::one());
            if !(residual.abs() <= tol_r * scale) {
                return Err(reject(format!(
                    "equation residual {residual:e} at x = {x:e} exceeds {:e}",
                    tol_r * scale
                )));
            }
        }
        Ok(())
    }
}

impl<R> fmt::Debug for AnalyticReference<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticReference").finish_non_exhaustive()
    }
}

/// One boundary value problem. Boundary data lives here rather than on the
/// mesh so a single problem can be solved on many meshes.
#[derive(Clone)]
pub struct Bvp<R> {
    pub a: R,
    pub b: R,
    pub alpha0: R,
    pub alpha1: R,
    pub beta0: R,
    pub beta1: R,
    f: CoefFn<R>,
    g: CoefFn<R>,
    reference: Option<AnalyticReference<R>>,
}

impl<R: Real> Bvp<R> {
    #[allow(clippy::too_many_arguments)] // mirrors the six scalars of the problem statement
    pub fn new(
        a: R,
        b: R,
        alpha0: R,
        alpha1: R,
        beta0: R,
        beta1: R,
        f: CoefFn<R>,
        g: CoefFn<R>,
    ) -> Result<Self, ProblemError> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(ProblemError::BadInterval {
                detail: format!("need finite b > a, got a = {a}, b = {b}"),
            });
        }
        for (name, v) in
            [("alpha0", alpha0), ("alpha1", alpha1), ("beta0", beta0), ("beta1", beta1)]
        {
            if !v.is_finite() {
                return Err(ProblemError::BadBoundary { detail: format!("{name} = {v}") });
            }
        }
        Ok(Bvp { a, b, alpha0, alpha1, beta0, beta1, f, g, reference: None })
    }

    /// Attach an analytic reference after checking it against the boundary
    /// data and the differential equation.
    pub fn with_reference(mut self, r: AnalyticReference<R>) -> Result<Self, ProblemError> {
        r.validate(&self)?;
        self.reference = Some(r);
        Ok(self)
    }

    pub fn f(&self) -> &CoefFn<R> {
        &self.f
    }

    pub fn g(&self) -> &CoefFn<R> {
        &self.g
    }

    pub fn f_at(&self, x: R) -> Result<R, EvalError> {
        (self.f)(x)
    }

    pub fn g_at(&self, x: R) -> Result<R, EvalError> {
        (self.g)(x)
    }

    pub fn reference(&self) -> Option<&AnalyticReference<R>> {
        self.reference.as_ref()
    }

    pub fn mesh(&self, k: usize) -> Result<Mesh<R>, ProblemError> {
        Mesh::new(self.a, self.b, k)
    }
}

impl<R: Real> fmt::Debug for Bvp<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bvp")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("alpha0", &self.alpha0)
            .field("alpha1", &self.alpha1)
            .field("beta0", &self.beta0)
            .field("beta1", &self.beta1)
            .field("has_reference", &self.reference.is_some())
            .finish_non_exhaustive()
    }
}

fn coef_from_expr<R: Real>(e: Expr) -> CoefFn<R> {
    Arc::new(move |x| e.eval(x))
}

fn native<R: Real>(f: impl Fn(R) -> R + Send + Sync + 'static) -> CoefFn<R> {
    Arc::new(move |x| Ok(f(x)))
}

/// f and g of the built-in examples, as expression strings. These are the
/// exact sources the example problems are built from.
pub fn example_expressions(id: u32) -> Result<(&'static str, &'static str), ProblemError> {
    match id {
        1 => Ok(("4", "1")),
        2 => Ok(("x", "-(8+7*x+x^3)*exp(x)")),
        3 => Ok(("-1", "-4*(2*x*cos(x)+3*sin(x))")),
        _ => Err(ProblemError::UnknownExample { id }),
    }
}

/// The three built-in problems, each with its analytic solution attached.
///
/// 1. y'''' + 4y = 1 on [-1, 1], homogeneous values, antisymmetric slopes.
/// 2. y'''' + x y = -(8 + 7x + x^3) e^x on [0, 1], solution x(1-x)e^x.
/// 3. y'''' - y = -4(2x cos x + 3 sin x) on [-1, 1], solution (x^2 - 1) sin x.
pub fn example_problem<R: Real>(id: u32) -> Result<Bvp<R>, ProblemError> {
    let (f_src, g_src) = example_expressions(id)?;
    let f = coef_from_expr(parse(f_src).expect("built-in f parses"));
    let g = coef_from_expr(parse(g_src).expect("built-in g parses"));
    let (zero, one, two) = (R::zero(), R::one(), R::int(2));

    match id {
        1 => {
            // y = 1/4 - W/(2D) with D = cos 2 + cosh 2 and
            // W = sin1 sinh1 sin x sinh x + cos1 cosh1 cos x cosh x
            let beta = (two.sinh() - two.sin()) / (R::int(4) * (two.cosh() + two.cos()));
            let d = two.cos() + two.cosh();
            let sc = one.sin() * one.sinh();
            let cc = one.cos() * one.cosh();
            let half_d = two * d;
            let w = move |x: R| sc * x.sin() * x.sinh() + cc * x.cos() * x.cosh();
            let reference = AnalyticReference::new([
                native(move |x: R| R::rational(1, 4) - w(x) / half_d),
                native(move |x: R| {
                    let (s, c, sh, ch) = (x.sin(), x.cos(), x.sinh(), x.cosh());
                    -(sc * (c * sh + s * ch) + cc * (c * sh - s * ch)) / half_d
                }),
                native(move |x: R| {
                    -(two * sc * x.cos() * x.cosh() - two * cc * x.sin() * x.sinh()) / half_d
                }),
                native(move |x: R| {
                    let (s, c, sh, ch) = (x.sin(), x.cos(), x.sinh(), x.cosh());
                    -(two * sc * (c * sh - s * ch) - two * cc * (c * sh + s * ch)) / half_d
                }),
                native(move |x: R| two * w(x) / d),
            ]);
            Bvp::new(-one, one, zero, zero, beta, -beta, f, g)?.with_reference(reference)
        }
        2 => {
            // y = x(1-x)e^x
            let e1 = one.exp();
            let reference = AnalyticReference::new([
                native(|x: R| x * (R::one() - x) * x.exp()),
                native(|x: R| (R::one() - x - x * x) * x.exp()),
                native(|x: R| -(R::int(3) * x + x * x) * x.exp()),
                native(|x: R| -(x * x + R::int(5) * x + R::int(3)) * x.exp()),
                native(|x: R| -(R::int(8) + R::int(7) * x + x * x) * x.exp()),
            ]);
            Bvp::new(zero, one, zero, zero, one, -e1, f, g)?.with_reference(reference)
        }
        3 => {
            // y = (x^2 - 1) sin x
            let beta = two * one.sin();
            let reference = AnalyticReference::new([
                native(|x: R| (x * x - R::one()) * x.sin()),
                native(|x: R| R::int(2) * x * x.sin() + (x * x - R::one()) * x.cos()),
                native(|x: R| (R::int(3) - x * x) * x.sin() + R::int(4) * x * x.cos()),
                native(|x: R| (R::int(7) - x * x) * x.cos() - R::int(6) * x * x.sin()),
                native(|x: R| (x * x - R::int(13)) * x.sin() - R::int(8) * x * x.cos()),
            ]);
            Bvp::new(-one, one, zero, zero, beta, beta, f, g)?.with_reference(reference)
        }
        _ => unreachable!("example_expressions already rejected this id"),
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    a: f64,
    b: f64,
    alpha0: f64,
    alpha1: f64,
    beta0: f64,
    beta1: f64,
    f: String,
    g: String,
    #[serde(default)]
    reference: Option<[String; 5]>,
}

/// Load a user-defined problem from a JSON file. Keys: `a`, `b`, `alpha0`,
/// `alpha1`, `beta0`, `beta1` (numbers), `f`, `g` (expression strings), and
/// optionally `reference` (array of five expression strings: y through y'''').
/// A supplied reference is validated against the problem before it is kept.
pub fn load_problem(path: &Path) -> Result<Bvp<f64>, ProblemError> {
    let text = std::fs::read_to_string(path)?;
    let pf: ProblemFile =
        serde_json::from_str(&text).map_err(|e| ProblemError::Malformed(e.to_string()))?;
    let parse_field = |which: &str, src: &str| -> Result<Expr, ProblemError> {
        parse(src).map_err(|e| ProblemError::BadExpression { which: which.to_owned(), source: e })
    };
    let f = coef_from_expr(parse_field("f", &pf.f)?);
    let g = coef_from_expr(parse_field("g", &pf.g)?);
    let mut bvp = Bvp::new(pf.a, pf.b, pf.alpha0, pf.alpha1, pf.beta0, pf.beta1, f, g)?;
    if let Some(srcs) = &pf.reference {
        let mut ds = Vec::with_capacity(5);
        for (i, src) in srcs.iter().enumerate() {
            ds.push(coef_from_expr::<f64>(parse_field(&format!("reference[{i}]"), src)?));
        }
        let derivs: [CoefFn<f64>; 5] = match <[CoefFn<f64>; 5]>::try_from(ds) {
            Ok(a) => a,
            Err(_) => unreachable!("exactly five entries pushed"),
        };
        bvp = bvp.with_reference(AnalyticReference::new(derivs))?;
    }
    Ok(bvp)
}
