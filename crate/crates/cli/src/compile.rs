//! Expressions to spectral fields.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;
use toravg_core::{Error, Result, ScalarField, TorusBox};

use crate::expr::Expr;

/// Relative tail mass above which a compiled field carries a truncation warning.
pub const TRUNCATION_WARN: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    /// `sqrt(sum |c_k|^2 over max|k| > K / sum |c_k|^2)` measured with twice the truncation.
    pub tail: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn sample(e: &Expr, space: &TorusBox, eps: f64) -> Result<ScalarField> {
    let finite = AtomicBool::new(true);
    let f = ScalarField::from_fn(space, |th, act| {
        let v = e.eval(th, act, eps);
        if !v.is_finite() {
            finite.store(false, Ordering::Relaxed);
        }
        v
    });
    if !finite.load(Ordering::Relaxed) {
        return Err(Error::Precondition("expression is not finite on the sampling grid".into()));
    }
    Ok(f)
}

/// Samples on the `2K+1` angle grid and projects onto the retained modes.
pub fn compile_field(e: &Expr, space: &TorusBox, eps: f64) -> Result<ScalarField> {
    sample(e, space, eps)
}

/// Spectral mass of `e` beyond the truncation of `space`.
pub fn truncation_loss(e: &Expr, space: &TorusBox, eps: f64) -> Result<TruncationReport> {
    let k = space.truncation as i64;
    let wide = TorusBox::new(space.action_lo.clone(), space.action_hi.clone(), 2 * space.truncation, space.grid_points)?;
    let f = sample(e, &wide, eps)?;
    let (mut total, mut tail) = (0.0, 0.0);
    for (m, data) in f.modes() {
        let energy: f64 = data.iter().map(|c| c.norm_sqr()).sum();
        total += energy;
        if m.iter().any(|&v| v.abs() > k) {
            tail += energy;
        }
    }
    let tail = if total > 0.0 { (tail / total).sqrt() } else { 0.0 };
    let warning = (tail > TRUNCATION_WARN)
        .then(|| format!("relative spectral tail {tail:.3e} beyond |k| <= {k} is lost by truncation"));
    Ok(TruncationReport { tail, warning })
}
