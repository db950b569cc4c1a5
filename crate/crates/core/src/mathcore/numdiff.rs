use crate::error::{Error, Result};

/// Central-difference gradient `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_diff_grad<F>(mut f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain("finite_diff_grad", format!("step must be positive, got {h}")));
    }
    central_differences(&mut f, x, |_| h)
}

/// Central differences with a per-coordinate step `rel * max(|x_i|, rel)`.
/// Suited to positive arguments spanning many orders of magnitude.
pub fn finite_diff_grad_relative<F>(mut f: F, x: &[f64], rel: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(rel > 0.0 && rel.is_finite()) {
        return Err(Error::domain(
            "finite_diff_grad_relative",
            format!("relative step must be positive, got {rel}"),
        ));
    }
    central_differences(&mut f, x, |xi| rel * xi.abs().max(rel))
}

fn central_differences<F, S>(f: &mut F, x: &[f64], step: S) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
    S: Fn(f64) -> f64,
{
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = step(x[i]);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        for v in [up, down] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "finite_diff_grad",
                    coordinate: Some(i),
                    value: v,
                });
            }
        }
        // (x + h) - (x - h) is not exactly 2h in floating point
        grad.push((up - down) / ((x[i] + h) - (x[i] - h)));
    }
    Ok(grad)
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Golden-section search for the maximum of a unimodal function on
/// `[lo, hi]`. Returns `(argmax, max)` once the bracket is narrower than
/// `tol`.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    const MAX_ITER: usize = 500;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Search(format!("invalid bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_ITER {
        if hi - lo <= tol {
            let (x, fx) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if !fx.is_finite() {
                return Err(Error::Search(format!("non-finite maximum {fx} at {x}")));
            }
            return Ok((x, fx));
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    Err(Error::Search(format!(
        "bracket still [{lo}, {hi}] after {MAX_ITER} iterations"
    )))
}
