use super::{NumericError, ParamStore};

/// Relative error of one named parameter, `‖a − n‖₂ / max(‖a‖₂, ‖n‖₂, 1e-8)`
/// over all of its coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub relative_error: f64,
    pub analytic_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest coordinate-wise relative error.
    pub max_relative_error: f64,
    /// Parameter name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    pub coordinates_checked: usize,
    pub per_parameter: Vec<ParamCheck>,
}

impl GradCheckReport {
    /// Largest parameter-wise relative error.
    pub fn max_parameter_error(&self) -> f64 {
        self.per_parameter.iter().map(|p| p.relative_error).fold(0.0, f64::max)
    }

    pub fn worst_parameter(&self) -> Option<&ParamCheck> {
        self.per_parameter.iter().max_by(|a, b| a.relative_error.total_cmp(&b.relative_error))
    }
}

/// Compares each parameter's stored `gradient` against a central difference
/// `(L(θ+h) − L(θ−h)) / 2h`, coordinate by coordinate. The relative error of
/// a coordinate is `|a − b| / max(|a|, |b|, 1e-8)`; see [`ParamCheck`] for the
/// parameter-wise measure.
///
/// Parameter values are restored exactly after each probe.
pub fn grad_check(
    params: &mut ParamStore,
    h: f64,
    mut loss_fn: impl FnMut(&ParamStore) -> f64,
) -> Result<GradCheckReport, NumericError> {
    let mut report =
        GradCheckReport { max_relative_error: 0.0, worst: None, coordinates_checked: 0, per_parameter: Vec::new() };
    let ids: Vec<_> = params.iter().map(|(id, _)| id).collect();
    for id in ids {
        let (mut diff_sq, mut analytic_sq, mut numeric_sq) = (0.0, 0.0, 0.0);
        for idx in 0..params.get(id).value.len() {
            let original = params.get(id).value.data()[idx];
            params.get_mut(id).value.data_mut()[idx] = original + h;
            let up = loss_fn(params);
            params.get_mut(id).value.data_mut()[idx] = original - h;
            let down = loss_fn(params);
            params.get_mut(id).value.data_mut()[idx] = original;
            if !(up.is_finite() && down.is_finite()) {
                return Err(NumericError::NonFinite { op: "grad_check" });
            }
            let numeric = (up - down) / (2.0 * h);
            let analytic = params.get(id).gradient.data()[idx];
            diff_sq += (analytic - numeric) * (analytic - numeric);
            analytic_sq += analytic * analytic;
            numeric_sq += numeric * numeric;
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            let err = (analytic - numeric).abs() / denom;
            report.coordinates_checked += 1;
            if err > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = report.max_relative_error.max(err);
                report.worst = Some((params.get(id).name.clone(), idx));
            }
        }
        let analytic_norm = f64::sqrt(analytic_sq);
        report.per_parameter.push(ParamCheck {
            name: params.get(id).name.clone(),
            relative_error: diff_sq.sqrt() / analytic_norm.max(numeric_sq.sqrt()).max(1e-8),
            analytic_norm,
        });
    }
    Ok(report)
}
