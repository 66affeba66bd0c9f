use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::EvalError;

// Kronrod abscissae (descending, last one is the centre) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &mut F, lo: f64, hi: f64) -> Result<Panel, EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx)? + f(centre + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Panel { lo, hi, value, error })
}

/// `∫_a^x f(t) dt` by globally adaptive 15-point Gauss–Kronrod quadrature.
///
/// The integrand is never evaluated at `a` or `x`, so integrable endpoint
/// singularities are fine. Panels are bisected in order of decreasing error
/// estimate until the summed estimate drops below `tol` (or below the
/// rounding floor of the result), or `max_panels` is reached.
pub fn integrate<F>(mut f: F, a: f64, x: f64, tol: f64, max_panels: usize) -> Result<f64, EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    if a == x {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < x { (a, x, 1.0) } else { (x, a, -1.0) };
    let first = gk15(&mut f, lo, hi)?;
    let mut total = first.value;
    let mut err = first.error;
    let mut heap = BinaryHeap::from([first]);
    loop {
        let floor = 64.0 * f64::EPSILON * total.abs();
        if err <= tol.max(floor) {
            return Ok(sign * total);
        }
        if heap.len() >= max_panels {
            return Err(EvalError::NoConvergence { panels: heap.len(), estimate: err });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // cannot split further in floating point; accept this panel as is
            return Ok(sign * total);
        }
        let left = gk15(&mut f, worst.lo, mid)?;
        let right = gk15(&mut f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // refresh running sums against accumulated cancellation
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64, EvalError> {
        move |t| Ok(f(t))
    }

    #[test]
    fn constants_and_exponentials() {
        let v = integrate(ok(|_| 1.0), 0.0, 1.0, 1e-12, 1 << 14).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        let v = integrate(ok(f64::exp), 0.0, 1.0, 1e-12, 1 << 14).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-10);
        let v = integrate(ok(f64::exp), 1.0, 0.0, 1e-12, 1 << 14).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate(
            |t: f64| {
                assert!(t > 0.0, "evaluated at the endpoint");
                Ok(t.powf(-0.5))
            },
            0.0,
            1.0,
            1e-10,
            1 << 14,
        )
        .unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn reports_non_convergence() {
        let err = integrate(ok(|t: f64| 1.0 / t), 0.0, 1.0, 1e-10, 32).unwrap_err();
        assert!(matches!(err, EvalError::NoConvergence { .. }));
    }

    #[test]
    fn errors_propagate() {
        let err = integrate(|_| Err(EvalError::Domain("boom".into())), 0.0, 1.0, 1e-10, 16).unwrap_err();
        assert_eq!(err, EvalError::Domain("boom".into()));
    }
}
