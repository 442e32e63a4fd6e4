use crate::error::{Error, Result};

/// Lower branch `W_{-1}(y)` restricted to solutions `x < -2`, i.e.
/// `-2 e^{-2} < y < 0`.
///
/// Solves `x + ln(-x) = ln(-y)` by safeguarded Newton inside
/// `[-2 ln(-1/y), -ln(-1/y)]`.
pub fn lambert_w_minus1(y: f64) -> Result<f64> {
    let lim = -2.0 * (-2.0f64).exp();
    if !(y < 0.0 && y > lim) {
        return Err(Error::Domain(format!(
            "W_-1 with x < -2 needs y in ({lim}, 0), got {y}"
        )));
    }
    let l = (-1.0 / y).ln();
    let target = (-y).ln();
    let g = |x: f64| x + (-x).ln() - target;
    let (mut lo, mut hi) = (-2.0 * l, (-l).min(-1.0 - 1e-12));
    if g(lo) > 0.0 {
        lo *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = gx / (1.0 + 1.0 / x);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_value() {
        let x = lambert_w_minus1(-0.05).unwrap();
        assert!((x + 4.499_4).abs() < 1e-3, "{x}");
        assert!((x * x.exp() + 0.05).abs() < 1e-15);
        assert!(20f64.ln() < -x && -x < 2.0 * 20f64.ln());
    }

    #[test]
    fn domain() {
        assert!(lambert_w_minus1(0.0).is_err());
        assert!(lambert_w_minus1(-0.3).is_err());
        assert!(lambert_w_minus1(-1e-300).is_ok());
    }
}
