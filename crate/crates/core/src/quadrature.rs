//! Adaptive Gauss-Legendre quadrature carried out in log space.
//!
//! Each panel is integrated with a fixed Gauss-Legendre rule and, for the
//! error estimate, with the same rule on its two halves. Panel values are kept
//! as logarithms and combined with log-sum-exp, so integrands whose values
//! underflow `f64` (products of many small densities, far tails) still yield
//! a finite log-integral. The rule never samples the interval endpoints, which
//! makes it usable on integrable endpoint singularities.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

const ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Target error relative to the integral value.
    pub rel_tol: f64,
    /// Target absolute error on the linear scale. Zero disables the absolute
    /// criterion, leaving a purely relative rule that is meaningful however
    /// small the integral is.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_panels: 200,
        }
    }
}

impl QuadratureOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            ..Self::default()
        }
    }
}

struct Rule {
    nodes: [f64; ORDER],
    ln_weights: [f64; ORDER],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(ORDER);
        let mut r = Rule {
            nodes: [0.0; ORDER],
            ln_weights: [0.0; ORDER],
        };
        r.nodes.copy_from_slice(&nodes);
        for (lw, w) in r.ln_weights.iter_mut().zip(weights) {
            *lw = w.ln();
        }
        r
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn panel_log<F>(f: &mut F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let ln_half = half.ln();
    let mut terms = [0.0; ORDER];
    for ((term, &node), &ln_w) in terms.iter_mut().zip(&r.nodes).zip(&r.ln_weights) {
        let x = mid + half * node;
        let lf = f(x)?;
        if lf.is_nan() || lf == f64::INFINITY {
            return Err(Error::Domain(format!(
                "integrand is not finite at x = {x} (log value {lf})"
            )));
        }
        *term = ln_w + ln_half + lf;
    }
    Ok(log_sum_exp(&terms))
}

struct Panel {
    a: f64,
    b: f64,
    coarse: f64,
    left: f64,
    right: f64,
}

impl Panel {
    fn new<F>(f: &mut F, a: f64, b: f64, coarse: f64) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let m = 0.5 * (a + b);
        Ok(Self {
            a,
            b,
            coarse,
            left: panel_log(f, a, m)?,
            right: panel_log(f, m, b)?,
        })
    }

    fn fine(&self) -> f64 {
        log_sum_exp(&[self.left, self.right])
    }
}

/// `ln ∫_a^b exp(log_f(x)) dx` for an integrand supplied in log form.
///
/// Returns `-inf` when the integrand vanishes on every node.
pub fn integrate_log<F>(log_f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_log_breaks(log_f, a, b, &[], opts)
}

/// [`integrate_log`] with the interval pre-split at `breaks`, for integrands
/// with a known sharp feature. Breaks outside `(a, b)` are ignored.
pub fn integrate_log_breaks<F>(
    mut log_f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadratureOptions,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!(
            "integration bounds must be finite with a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(f64::NEG_INFINITY);
    }
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    let mut panels = Vec::with_capacity(opts.max_panels + 1);
    for e in edges.windows(2) {
        let coarse = panel_log(&mut log_f, e[0], e[1])?;
        panels.push(Panel::new(&mut log_f, e[0], e[1], coarse)?);
    }
    loop {
        let top = panels.iter().map(Panel::fine).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Ok(top);
        }
        let total = top + panels.iter().map(|p| (p.fine() - top).exp()).sum::<f64>().ln();
        let mut err_rel = 0.0;
        let mut worst = 0;
        let mut worst_err = -1.0;
        for (k, p) in panels.iter().enumerate() {
            let e = ((p.coarse - total).exp() - (p.fine() - total).exp()).abs();
            err_rel += e;
            if e > worst_err {
                worst_err = e;
                worst = k;
            }
        }
        let abs_allow = if opts.abs_tol > 0.0 {
            opts.abs_tol * (-total).exp()
        } else {
            0.0
        };
        if err_rel <= opts.rel_tol.max(abs_allow) {
            return Ok(total);
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                lower: a,
                upper: b,
                error: err_rel,
                panels: panels.len(),
            });
        }
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            return Err(Error::Quadrature {
                lower: a,
                upper: b,
                error: err_rel,
                panels: panels.len() + 1,
            });
        }
        panels.push(Panel::new(&mut log_f, p.a, m, p.left)?);
        panels.push(Panel::new(&mut log_f, m, p.b, p.right)?);
    }
}

/// `∫_a^b f(x) dx` for a nonnegative integrand.
pub fn integrate_nonneg<F>(mut f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_log(
        |x| {
            let y = f(x)?;
            if y < 0.0 {
                return Err(Error::Domain(format!("integrand is negative at x = {x}")));
            }
            Ok(y.ln())
        },
        a,
        b,
        opts,
    )
    .map(f64::exp)
}
