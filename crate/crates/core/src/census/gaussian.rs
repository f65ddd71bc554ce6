use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_traits::ToPrimitive;

use super::curve::binomial;
use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-8;
const MAX_DEPTH: u32 = 48;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let fc = f(c);
    (c, fc, (b - a) / 6.0 * (fa + 4.0 * fc + fb))
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    c: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let (lc, flc, left) = simpson(f, a, fa, c, fc);
    let (rc, frc, right) = simpson(f, c, fc, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *worst = worst.max(delta.abs() / 15.0);
        return left + right + delta / 15.0;
    }
    adapt(f, a, fa, c, fc, lc, flc, left, tol / 2.0, depth - 1, worst)
        + adapt(f, c, fc, b, fb, rc, frc, right, tol / 2.0, depth - 1, worst)
}

/// Expected `Lambda(A, m)` for an `m x n` Gaussian matrix, by quadrature,
/// together with the closed-form lower bound
/// `C(n, n-m) 2^n (arctan(1/sqrt(m)) / pi)^{n-m}`, which is exact for
/// `m = n - 1`.
pub fn expected_gaussian_maximal(m: usize, n: usize) -> Result<(f64, f64)> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("needs 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let mf = m as f64;
    let power = (n - m) as i32;
    let f = move |t: f64| (-0.5 * mf * t * t).exp() * libm::erf(t * FRAC_1_SQRT_2).powi(power);
    // exp(-m t^2 / 2) < 1e-16 beyond this point.
    let upper = (2.0 * 16.0 * std::f64::consts::LN_10 / mf).sqrt();

    // A coarse composite rule fixes the absolute tolerance.
    let pieces = 64;
    let h = upper / pieces as f64;
    let mut rough = 0.0;
    for i in 0..pieces {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        rough += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    }
    let tol = REL_TOL * rough.abs().max(f64::MIN_POSITIVE) / pieces as f64;
    let mut worst = 0.0f64;
    let mut integral = 0.0;
    for i in 0..pieces {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let (fa, fb) = (f(a), f(b));
        let (c, fc, whole) = simpson(&f, a, fa, b, fb);
        integral += adapt(&f, a, fa, b, fb, c, fc, whole, tol, MAX_DEPTH, &mut worst);
    }
    if integral > 0.0 && worst * pieces as f64 > REL_TOL * integral {
        return Err(Error::Quadrature { achieved: worst * pieces as f64 / integral });
    }
    let c_nm = binomial(n, m).to_f64().unwrap_or(f64::INFINITY);
    let exact = 2f64.powi(m as i32) * c_nm * (2.0 * mf / PI).sqrt() * integral;
    let lower = c_nm * 2f64.powi(n as i32) * ((1.0 / mf.sqrt()).atan() / PI).powi(power);
    Ok((exact, lower))
}
