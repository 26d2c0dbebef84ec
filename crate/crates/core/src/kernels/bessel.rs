//! Bessel functions `J_ν` of integer and half-integer order.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this argument the power series is used, above it the Hankel
/// asymptotic series.
pub const SERIES_LIMIT: f64 = 12.0;

fn check_order(nu: f64) -> Result<()> {
    let twice = 2.0 * nu;
    if nu < -0.5 || (twice - twice.round()).abs() > 1e-12 || nu > 64.0 {
        return Err(Error::Precondition(format!("unsupported Bessel order {nu}")));
    }
    Ok(())
}

/// `Γ(x)` for positive integer or half-integer `x`.
pub fn gamma_half_integer(x: f64) -> f64 {
    let (mut acc, mut t) = if (x - x.round()).abs() < 1e-12 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while t < x - 1e-9 {
        acc *= t;
        t += 1.0;
    }
    acc
}

/// `Σ_k (-1)^k (s/2)^{2k} / (k! Γ(k+ν+1))`, i.e. `J_ν(s)(s/2)^{-ν}`.
fn reduced_series(nu: f64, s: f64) -> f64 {
    let q = s * s / 4.0;
    let mut term = 1.0 / gamma_half_integer(nu + 1.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > q.sqrt() {
            break;
        }
        if k > 400.0 {
            break;
        }
    }
    sum
}

/// Power series for `J_ν(s)`.
pub fn bessel_series(nu: f64, s: f64) -> Result<f64> {
    check_order(nu)?;
    if s < 0.0 {
        return Err(Error::Precondition("negative Bessel argument".into()));
    }
    if s == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu < 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
    }
    Ok(reduced_series(nu, s) * (s / 2.0).powf(nu))
}

/// `(P(s), Q(s))` of the Hankel expansion, built from the coefficients
/// `a_k(ν) = Π_{i=1..k} (4ν² − (2i−1)²) / (k! 8^k)`. With `terms = None`
/// the series is cut at its smallest term (or once terms drop below
/// round-off); otherwise it keeps exactly `a_0 .. a_{terms-1}`.
pub fn hankel_pq(nu: f64, s: f64, terms: Option<usize>) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let count = terms.unwrap_or(120);
    let (mut p, mut q) = (0.0, 0.0);
    let mut last = f64::INFINITY;
    // t_k = a_k / s^k, by recurrence.
    let mut t = 1.0;
    for k in 0..count {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            t *= (mu - odd * odd) / (k as f64 * 8.0 * s);
        }
        if terms.is_none() {
            // Half-integer orders terminate exactly (t == 0).
            if t.abs() >= last || t == 0.0 {
                break;
            }
            if t.abs() < 1e-18 {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                if k % 2 == 0 {
                    p += sign * t;
                } else {
                    q += sign * t;
                }
                break;
            }
        }
        last = t.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * t;
        } else {
            q += sign * t;
        }
    }
    (p, q)
}

/// Hankel asymptotic series for `J_ν(s)` with optimal truncation.
pub fn bessel_asymptotic(nu: f64, s: f64) -> Result<f64> {
    check_order(nu)?;
    if !(s > 0.0) {
        return Err(Error::Precondition("asymptotic series needs s > 0".into()));
    }
    let (p, q) = hankel_pq(nu, s, None);
    let w = s - nu * PI / 2.0 - PI / 4.0;
    Ok((2.0 / (PI * s)).sqrt() * (p * w.cos() - q * w.sin()))
}

/// `J_ν(s)` for `ν ∈ {-1/2, 0, 1/2, 1, …}` and `s ≥ 0`.
pub fn bessel_j(nu: f64, s: f64) -> Result<f64> {
    if s <= SERIES_LIMIT {
        bessel_series(nu, s)
    } else {
        bessel_asymptotic(nu, s)
    }
}

/// `(2π)^{-n/2} J_ν(s) s^{-ν}` with `ν = (n−2)/2`, the radial profile
/// of the Fourier transform of surface measure; finite at `s = 0`.
pub fn radial_bessel_kernel(n: usize, s: f64) -> f64 {
    let c = (2.0 * PI).powf(-(n as f64) / 2.0);
    if n == 1 {
        return c * (2.0 / PI).sqrt() * s.cos();
    }
    let nu = (n as f64 - 2.0) / 2.0;
    if s <= SERIES_LIMIT {
        c * reduced_series(nu, s) * 2f64.powf(-nu)
    } else {
        let (p, q) = hankel_pq(nu, s, None);
        let w = s - nu * PI / 2.0 - PI / 4.0;
        c * (2.0 / (PI * s)).sqrt() * (p * w.cos() - q * w.sin()) * s.powf(-nu)
    }
}
