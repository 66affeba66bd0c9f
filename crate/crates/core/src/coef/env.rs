use std::collections::BTreeMap;
use std::sync::Arc;

/// Numeric settings shared by every evaluation routine.
#[derive(Debug, Clone)]
pub struct EvalEnv {
    /// Values of named symbolic parameters.
    pub params: BTreeMap<Arc<str>, f64>,
    /// Absolute tolerance for adaptive quadrature.
    pub tol: f64,
    /// Panel budget for adaptive quadrature and grid refinement.
    pub max_panels: usize,
    /// Starting panel count of the cumulative grid.
    pub grid_panels: usize,
}

impl Default for EvalEnv {
    fn default() -> Self {
        EvalEnv {
            params: BTreeMap::new(),
            tol: 1e-10,
            max_panels: 1 << 14,
            grid_panels: 32,
        }
    }
}

impl EvalEnv {
    pub fn with_params<I, S>(params: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<Arc<str>>,
    {
        EvalEnv {
            params: params.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            ..EvalEnv::default()
        }
    }
}
