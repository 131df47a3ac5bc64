//! Differentiable satisfaction objective.
//!
//! Each clause is scored by the smoothmax of its literal values; the loss is
//! the negative sum of the clause scores' logarithms.

use thiserror::Error;

use crate::cnf::{CnfFormula, Literal};

/// Lower clamp applied to clause scores before taking the logarithm.
pub const SCORE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LossError {
    #[error("smoothmax of an empty list")]
    Empty,
    #[error("temperature must be positive")]
    NonPositiveTau,
    #[error("non-finite value in loss computation")]
    NonFinite,
    #[error("{got} outputs for {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgePolarity {
    Positive,
    Negative,
}

impl EdgePolarity {
    pub fn sign(self) -> f64 {
        match self {
            EdgePolarity::Positive => 1.0,
            EdgePolarity::Negative => -1.0,
        }
    }
}

impl From<Literal> for EdgePolarity {
    fn from(l: Literal) -> Self {
        if l.is_positive() {
            EdgePolarity::Positive
        } else {
            EdgePolarity::Negative
        }
    }
}

/// `(1 − e)/2 + e·x`: `x` for a positive occurrence, `1 − x` for a negated one.
pub fn literal_value(x: f64, e: EdgePolarity) -> f64 {
    let e = e.sign();
    (1.0 - e) / 2.0 + e * x
}

/// `Σ xᵢ e^{τxᵢ} / Σ e^{τxᵢ}`, evaluated as `max + Σ (xᵢ − max) wᵢ / Σ wᵢ` with
/// `wᵢ = e^{τ(xᵢ − max)}`. Equal inputs therefore return their common value exactly.
pub fn smoothmax(values: &[f64], tau: f64) -> Result<f64, LossError> {
    smoothmax_with_grad(values, tau, None)
}

/// Smoothmax, optionally writing `∂S/∂xᵢ = wᵢ/W · (1 + τ(xᵢ − S))` into `grad`.
pub fn smoothmax_with_grad(values: &[f64], tau: f64, grad: Option<&mut Vec<f64>>) -> Result<f64, LossError> {
    if values.is_empty() {
        return Err(LossError::Empty);
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(LossError::NonPositiveTau);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LossError::NonFinite);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut offset = 0.0;
    for &v in values {
        let w = (tau * (v - max)).exp();
        total += w;
        offset += (v - max) * w;
    }
    let s = max + offset / total;
    if let Some(grad) = grad {
        grad.clear();
        grad.extend(values.iter().map(|&v| (tau * (v - max)).exp() / total * (1.0 + tau * (v - s))));
    }
    Ok(s)
}

fn check_len(x: &[f64], f: &CnfFormula) -> Result<(), LossError> {
    if x.len() != f.num_variables() {
        return Err(LossError::LengthMismatch { expected: f.num_variables(), got: x.len() });
    }
    Ok(())
}

/// Smoothmax score of every clause.
pub fn clause_scores(x: &[f64], f: &CnfFormula, tau: f64) -> Result<Vec<f64>, LossError> {
    check_len(x, f)?;
    let mut lits = Vec::new();
    f.clauses()
        .iter()
        .map(|c| {
            lits.clear();
            lits.extend(c.literals().iter().map(|&l| literal_value(x[l.var()], l.into())));
            smoothmax(&lits, tau)
        })
        .collect()
}

/// Product of clause scores: the smooth surrogate of the formula's truth value.
pub fn phi_approx(x: &[f64], f: &CnfFormula, tau: f64) -> Result<f64, LossError> {
    Ok(clause_scores(x, f, tau)?.into_iter().product())
}

pub fn neg_log_loss(x: &[f64], f: &CnfFormula, tau: f64) -> Result<f64, LossError> {
    let scores = clause_scores(x, f, tau)?;
    let loss: f64 = scores.iter().map(|&s| -s.max(SCORE_FLOOR).ln()).sum();
    if !loss.is_finite() {
        return Err(LossError::NonFinite);
    }
    Ok(loss)
}

/// Loss and its gradient with respect to `x`.
pub fn neg_log_loss_with_grad(x: &[f64], f: &CnfFormula, tau: f64) -> Result<(f64, Vec<f64>), LossError> {
    check_len(x, f)?;
    let mut grad = vec![0.0; x.len()];
    let mut lits = Vec::new();
    let mut dlits = Vec::new();
    let mut loss = 0.0;
    for clause in f.clauses() {
        lits.clear();
        lits.extend(clause.literals().iter().map(|&l| literal_value(x[l.var()], l.into())));
        let s = smoothmax_with_grad(&lits, tau, Some(&mut dlits))?;
        if s < SCORE_FLOOR {
            loss -= SCORE_FLOOR.ln();
            continue;
        }
        loss -= s.ln();
        for (lit, &d) in clause.literals().iter().zip(&dlits) {
            grad[lit.var()] -= d / s * EdgePolarity::from(*lit).sign();
        }
    }
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(LossError::NonFinite);
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::tests::example;

    #[test]
    fn literal_branches() {
        assert_eq!(literal_value(0.3, EdgePolarity::Positive), 0.3);
        assert_eq!(literal_value(0.3, EdgePolarity::Negative), 0.7);
        assert_eq!(literal_value(0.5, EdgePolarity::Positive), 0.5);
        assert_eq!(literal_value(0.5, EdgePolarity::Negative), 0.5);
    }

    #[test]
    fn smoothmax_examples() {
        for c in [0.0, 0.1, 0.37, 1.0, -2.5] {
            assert_eq!(smoothmax(&[c, c, c, c, c], 5.0).unwrap(), c);
        }
        let e5 = 5f64.exp();
        let s = smoothmax(&[0.0, 1.0], 5.0).unwrap();
        assert!((s - e5 / (1.0 + e5)).abs() < 1e-15);
        assert!((s - 0.993307).abs() < 1e-6);
        let gaps: Vec<f64> = [1.0, 5.0, 25.0].iter().map(|&t| 1.0 - smoothmax(&[0.0, 1.0], t).unwrap()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }

    #[test]
    fn smoothmax_errors() {
        assert_eq!(smoothmax(&[], 5.0), Err(LossError::Empty));
        assert_eq!(smoothmax(&[1.0], 0.0), Err(LossError::NonPositiveTau));
        assert_eq!(smoothmax(&[f64::NAN], 1.0), Err(LossError::NonFinite));
    }

    #[test]
    fn phi_examples() {
        let unit = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        assert_eq!(phi_approx(&[1.0], &unit, 5.0).unwrap(), 1.0);
        let scores = clause_scores(&[0.0, 1.0, 1.0, 1.0], &example(), 5.0).unwrap();
        // literal values per clause: (0,1,0), (1,1,0), (1,1)
        let e5 = 5f64.exp();
        let expected = [e5 / (2.0 + e5), 2.0 * e5 / (2.0 * e5 + 1.0), 1.0];
        for (s, e) in scores.iter().zip(expected) {
            assert!((s - e).abs() < 1e-12, "{scores:?}");
        }
        assert!(scores.iter().all(|&s| s > 0.98));
        let phi = phi_approx(&[0.0, 1.0, 1.0, 1.0], &example(), 5.0).unwrap();
        assert!((phi - scores.iter().product::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn example_half_loss() {
        let l = neg_log_loss(&[0.5; 4], &example(), 5.0).unwrap();
        assert!((l - (-3.0 * 0.5f64.ln())).abs() < 1e-12);
        assert!((l - 2.07944).abs() < 1e-5);
    }

    #[test]
    fn unit_clauses_satisfied_give_zero_loss() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1], &[-2]]).unwrap();
        assert_eq!(neg_log_loss(&[1.0, 0.0], &f, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_score_is_clamped() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        let (l, g) = neg_log_loss_with_grad(&[0.0], &f, 5.0).unwrap();
        assert_eq!(l, -SCORE_FLOOR.ln());
        assert_eq!(g, vec![0.0]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let f = example();
        let x = [0.2, 0.65, 0.4, 0.9];
        let (_, g) = neg_log_loss_with_grad(&x, &f, 5.0).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let mut up = x;
            up[i] += h;
            let mut down = x;
            down[i] -= h;
            let numeric = (neg_log_loss(&up, &f, 5.0).unwrap() - neg_log_loss(&down, &f, 5.0).unwrap()) / (2.0 * h);
            let rel = (numeric - g[i]).abs() / numeric.abs().max(g[i].abs()).max(1e-8);
            assert!(rel <= 1e-6, "coordinate {i}: {numeric} vs {}", g[i]);
        }
    }
}
