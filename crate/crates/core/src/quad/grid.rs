use crate::coef::{real_pow, scalar_to_f64, CoefFn, EvalEnv};
use crate::error::EvalError;

const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Nodes and weights of 4-point Gauss–Legendre on `[0, 1]`.
fn unit_rule() -> ([f64; 4], [f64; 4]) {
    let mut s = [0.0; 4];
    let mut w = [0.0; 4];
    for i in 0..4 {
        s[i] = 0.5 * (GL_NODES[i] + 1.0);
        w[i] = 0.5 * GL_WEIGHTS[i];
    }
    (s, w)
}

fn lagrange(nodes: &[f64; 4], i: usize, s: f64) -> f64 {
    (0..4).filter(|&m| m != i).map(|m| (s - nodes[m]) / (nodes[i] - nodes[m])).product()
}

/// A shared quadrature grid on the path from `a` to `x`.
///
/// The path is parametrized as `t = a + (x - a) s²`, `s ∈ [0, 1]`, which
/// clusters nodes near the lower limit and removes `t^{-1/2}`-type endpoint
/// singularities. `s` is split into uniform panels with 4 Gauss–Legendre
/// nodes each; no node sits at either end. Values on the grid are stored
/// node by node with one extra trailing slot holding the value at `x`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub a: f64,
    pub x: f64,
    panels: usize,
    t: Vec<f64>,
    jac: Vec<f64>,
    weights: [f64; 4],
    cumw: [[f64; 4]; 4],
}

impl Grid {
    pub fn new(a: f64, x: f64, panels: usize) -> Grid {
        let (nodes, weights) = unit_rule();
        // cumw[j][i] = ∫_0^{s_j} L_i(s) ds, exact with the same rule rescaled
        let mut cumw = [[0.0; 4]; 4];
        for j in 0..4 {
            for i in 0..4 {
                cumw[j][i] = nodes[j] * (0..4).map(|m| weights[m] * lagrange(&nodes, i, nodes[j] * nodes[m])).sum::<f64>();
            }
        }
        let ds = 1.0 / panels as f64;
        let mut t = Vec::with_capacity(4 * panels + 1);
        let mut jac = Vec::with_capacity(4 * panels + 1);
        for p in 0..panels {
            for node in nodes {
                let s = (p as f64 + node) * ds;
                t.push(a + (x - a) * s * s);
                jac.push(2.0 * (x - a) * s);
            }
        }
        t.push(x);
        jac.push(0.0);
        Grid { a, x, panels, t, jac, weights, cumw }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Node positions, followed by `x`.
    pub fn points(&self) -> &[f64] {
        &self.t
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// `t_j ↦ ∫_a^{t_j} f`, given `f` at the nodes (the last slot is ignored
    /// on input and receives the full integral up to `x`).
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.t.len());
        let ds = 1.0 / self.panels as f64;
        let mut out = vec![0.0; self.t.len()];
        let mut running = 0.0;
        for p in 0..self.panels {
            let g: [f64; 4] = std::array::from_fn(|i| f[4 * p + i] * self.jac[4 * p + i]);
            for j in 0..4 {
                let partial: f64 = (0..4).map(|i| self.cumw[j][i] * g[i]).sum();
                out[4 * p + j] = running + ds * partial;
            }
            running += ds * (0..4).map(|i| self.weights[i] * g[i]).sum::<f64>();
        }
        *out.last_mut().unwrap() = running;
        out
    }

    /// Values of a coefficient function at every grid point. Integral nodes
    /// sharing the grid's lower limit are integrated cumulatively.
    pub fn coef(&self, f: &CoefFn, env: &EvalEnv) -> Result<Vec<f64>, EvalError> {
        let n = self.t.len();
        let v = match f {
            CoefFn::Const(q) => vec![scalar_to_f64(q); n],
            CoefFn::X => self.t.clone(),
            CoefFn::Param(p) => {
                let v = *env.params.get(p).ok_or_else(|| EvalError::UnknownParam(p.to_string()))?;
                vec![v; n]
            }
            CoefFn::Sum(ts) => {
                let mut acc = vec![0.0; n];
                for t in ts {
                    for (a, b) in acc.iter_mut().zip(self.coef(t, env)?) {
                        *a += b;
                    }
                }
                acc
            }
            CoefFn::Prod(fs) => {
                let mut acc = vec![1.0; n];
                for f in fs {
                    for (a, b) in acc.iter_mut().zip(self.coef(f, env)?) {
                        *a *= b;
                    }
                }
                acc
            }
            CoefFn::Pow(b, e) => self.coef(b, env)?.into_iter().map(|v| real_pow(v, e)).collect::<Result<_, _>>()?,
            CoefFn::Exp(a) => self.coef(a, env)?.into_iter().map(f64::exp).collect(),
            CoefFn::Sin(a) => self.coef(a, env)?.into_iter().map(f64::sin).collect(),
            CoefFn::Cos(a) => self.coef(a, env)?.into_iter().map(f64::cos).collect(),
            CoefFn::Recip(a) => self
                .coef(a, env)?
                .into_iter()
                .map(|v| {
                    if v == 0.0 {
                        Err(EvalError::Domain("division by zero".into()))
                    } else {
                        Ok(1.0 / v)
                    }
                })
                .collect::<Result<_, _>>()?,
            CoefFn::Int(op, g) => {
                if op.a_f64() == self.a {
                    let kernel = self.coef(op.check_kernel(), env)?;
                    let inner = self.coef(g, env)?;
                    let prod: Vec<f64> = kernel.iter().zip(&inner).map(|(k, g)| k * g).collect();
                    self.cumulative(&prod)
                } else {
                    self.t.iter().map(|&t| f.eval(t, env)).collect::<Result<_, _>>()?
                }
            }
        };
        if let Some(bad) = v.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::Domain(format!("non-finite value at t = {}", self.t[bad])));
        }
        Ok(v)
    }
}

/// Evaluates `eval` on grids of doubling resolution until two successive
/// values agree to `tol` (absolute, plus a relative rounding floor).
pub fn converge<F>(a: f64, x: f64, env: &EvalEnv, mut eval: F) -> Result<f64, EvalError>
where
    F: FnMut(&Grid) -> Result<f64, EvalError>,
{
    let mut panels = env.grid_panels.max(1);
    let mut prev = eval(&Grid::new(a, x, panels))?;
    loop {
        panels *= 2;
        let next = eval(&Grid::new(a, x, panels))?;
        let diff = (next - prev).abs();
        if diff <= env.tol + 1e-10 * next.abs() {
            return Ok(next);
        }
        if panels >= env.max_panels {
            return Err(EvalError::NoConvergence { panels, estimate: diff });
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_is_exact_for_cubics_in_s() {
        // with a = 0, x = 1: t = s², so ∫_0^t 1 dτ = t exactly
        let g = Grid::new(0.0, 1.0, 4);
        let ones = vec![1.0; g.len()];
        let cum = g.cumulative(&ones);
        for (c, t) in cum.iter().zip(g.points()) {
            assert!((c - t).abs() < 1e-14, "{c} vs {t}");
        }
    }

    #[test]
    fn singular_endpoint_is_smoothed() {
        let g = Grid::new(0.0, 1.0, 8);
        let f: Vec<f64> = g.points().iter().map(|t| t.powf(-0.5)).collect();
        let cum = g.cumulative(&f);
        assert!((cum.last().unwrap() - 2.0).abs() < 1e-12);
        let mid = cum[17];
        assert!((mid - 2.0 * g.points()[17].sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reversed_direction() {
        let g = Grid::new(2.0, 1.0, 16);
        let f: Vec<f64> = g.points().iter().map(|t| t.exp()).collect();
        let total = *g.cumulative(&f).last().unwrap();
        assert!((total - (1f64.exp() - 2f64.exp())).abs() < 1e-12);
    }
}
