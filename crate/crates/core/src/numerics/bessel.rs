//! Bessel functions of the first kind.
//!
//! Small arguments use the ascending series, where its terms decrease from
//! the start and nothing cancels. Everywhere else the value comes from
//! Miller's backward recurrence normalized by a Neumann-type sum, which stays
//! accurate for large `x` where the series would lose every digit.

use statrs::function::gamma::ln_gamma;

use super::NumericsError;

const RESCALE: f64 = 1e250;

/// `J_ν(x)` for `x ≥ 0`. Negative integer orders go through
/// `J_{-n} = (-1)^n J_n`; negative non-integer orders are rejected.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64, NumericsError> {
    if !(x >= 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(NumericsError::Domain(format!("J_{nu}({x})")));
    }
    if nu.fract() == 0.0 && nu.abs() <= i32::MAX as f64 {
        return Ok(bessel_jn(nu as i32, x));
    }
    if nu < 0.0 {
        return Err(NumericsError::Domain(format!("non-integer negative order {nu}")));
    }
    if x <= 12.0 {
        Ok(series(nu, x))
    } else {
        Ok(fractional_miller(nu, x))
    }
}

/// Integer order, any sign.
pub fn bessel_jn(n: i32, x: f64) -> f64 {
    let v = bessel_jn_nonneg(n.unsigned_abs(), x.abs());
    let odd_order = n < 0 && n % 2 != 0;
    let odd_arg = x < 0.0 && n % 2 != 0;
    if odd_order ^ odd_arg {
        -v
    } else {
        v
    }
}

fn bessel_jn_nonneg(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let q = 0.25 * x * x;
    if q <= 0.5 * (n as f64 + 1.0) {
        return series(n as f64, x);
    }
    let top = (n as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as u32;
    start += start % 2;

    let two_over_x = 2.0 / x;
    let (mut above, mut here) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * here - above;
        above = here;
        here = below;
        let idx = k - 1;
        if idx == n {
            wanted = here;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * here;
        }
        if here.abs() > RESCALE {
            here /= RESCALE;
            above /= RESCALE;
            norm /= RESCALE;
            wanted /= RESCALE;
        }
    }
    norm += here;
    wanted / norm
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let q = half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > half {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

/// Backward recurrence on `J_{f+k}` with `f = ν - ⌊ν⌋`, normalized by
/// `(x/2)^f = Σ_k c_k J_{f+2k}`, `c_0 = Γ(f+1)`, `c_k = (f+2k)Γ(f+k)/k!`.
fn fractional_miller(nu: f64, x: f64) -> f64 {
    let n = nu.floor() as usize;
    let f = nu - n as f64;
    let top = nu.max(x);
    let start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-30;
    for k in (1..=start).rev() {
        let v = 2.0 * (f + k as f64) / x * vals[k] - vals[k + 1];
        vals[k - 1] = v;
        if v.abs() > RESCALE {
            for w in vals[k - 1..].iter_mut() {
                *w /= RESCALE;
            }
        }
    }
    let mut norm = ln_gamma(f + 1.0).exp() * vals[0];
    for k in (1..).take_while(|k| 2 * k <= start) {
        let kf = k as f64;
        let c = (f + 2.0 * kf).ln() + ln_gamma(f + kf) - ln_gamma(kf + 1.0);
        norm += c.exp() * vals[2 * k];
    }
    vals[n] * (0.5 * x).powf(f) / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3.0, 0.0).unwrap(), 0.0);
        let j1 = bessel_j(1.0, 1.0).unwrap();
        assert!((j1 - 0.4400505857449335).abs() < 1e-16);
    }

    #[test]
    fn reflection_and_domain() {
        let a = bessel_j(-3.0, 2.5).unwrap();
        let b = bessel_j(3.0, 2.5).unwrap();
        assert_eq!(a, -b);
        assert!(bessel_j(-0.5, 1.0).is_err());
        assert!(bessel_j(1.0, -1.0).is_err());
    }

    #[test]
    fn half_order_is_elementary() {
        for x in [0.3, 2.0, 11.0, 15.0, 40.0] {
            let want = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
            let got = bessel_j(0.5, x).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(0.05), "x = {x}: {got} vs {want}");
        }
    }
}
