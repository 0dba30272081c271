use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// `r_l · α^(T − l)`: a fixed decay of `α` per missing selection.
    Multiplicative,
    /// `r_l · (α · r_l / r_{l−1})^(T − l)`: the decay expected per missing
    /// selection is the one observed on the last step, scaled by `α`.
    AdaptiveMultiplicative,
}

/// Path cost used by A*OMP to compare partial supports of different length.
///
/// `target_length` is the horizon `T`: the true sparsity under the
/// sparsity rule, `K_max` under the residual rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub kind: CostKind,
    pub alpha: f64,
    pub target_length: usize,
}

impl CostModel {
    pub fn new(kind: CostKind, alpha: f64, target_length: usize) -> Self {
        Self {
            kind,
            alpha,
            target_length,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.alpha > 0.0 && self.alpha <= 1.0 && self.target_length >= 1
    }

    pub fn cost(&self, residual_norm: f64, previous_residual_norm: f64, path_len: usize) -> f64 {
        path_cost(residual_norm, previous_residual_norm, path_len, self)
    }
}

/// `previous_residual_norm` is the residual norm of the path's parent
/// (`‖y‖` for a single index); only the adaptive kind reads it.
pub fn path_cost(residual_norm: f64, previous_residual_norm: f64, path_len: usize, model: &CostModel) -> f64 {
    let remaining = model.target_length.saturating_sub(path_len);
    let remaining = i32::try_from(remaining).unwrap_or(i32::MAX);
    let decay = match model.kind {
        CostKind::Multiplicative => model.alpha,
        CostKind::AdaptiveMultiplicative => {
            let ratio = if previous_residual_norm > 0.0 {
                (residual_norm / previous_residual_norm).min(1.0)
            } else {
                0.0
            };
            model.alpha * ratio
        }
    };
    residual_norm * decay.powi(remaining)
}
