//! Angular partition of the circle at scale `2^{-j/2}` and the wave
//! packets it cuts out of a dyadic annulus.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{grid_resolving, inverse_fourier_transform, Field};
use crate::norms::lp_norm;
use crate::symbols::{smooth_step, CutoffKind, WavePhase};

/// Equally spaced directions on the unit circle with a smooth
/// telescoping partition of unity subordinate to them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularFrame {
    pub j: i32,
    pub count: usize,
    /// Angular spacing `2π / count`.
    pub gap: f64,
    pub centers: Vec<[f64; 2]>,
}

/// Frame with `⌈2π 2^{j/2}⌉` directions.
pub fn angular_frame(j: i32, n: usize) -> Result<AngularFrame> {
    if n != 2 {
        return Err(Error::Precondition(format!(
            "angular frames are implemented for n = 2, not n = {n}"
        )));
    }
    if !(2..=40).contains(&j) {
        return Err(Error::Precondition(format!(
            "angular frame needs 2 <= j <= 40, got {j}"
        )));
    }
    let count = (2.0 * PI * 2f64.powf(j as f64 / 2.0)).ceil() as usize;
    let gap = 2.0 * PI / count as f64;
    let centers = (0..count)
        .map(|k| {
            let t = k as f64 * gap;
            [t.cos(), t.sin()]
        })
        .collect();
    Ok(AngularFrame { j, count, gap, centers })
}

fn wrap_angle(t: f64) -> f64 {
    let mut t = t % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

impl AngularFrame {
    pub fn center_angle(&self, nu: usize) -> f64 {
        nu as f64 * self.gap
    }

    /// `χ_ν(ξ)`, homogeneous of degree zero, supported where the angle to
    /// the centre is below one gap.
    pub fn chi(&self, nu: usize, xi: &[f64]) -> f64 {
        let (x, y) = (xi[0], xi[1]);
        if x == 0.0 && y == 0.0 {
            return 0.0;
        }
        let u = wrap_angle(y.atan2(x) - self.center_angle(nu)) / self.gap;
        smooth_step(u + 1.0) - smooth_step(u)
    }

    /// `Σ_ν χ_ν(ξ)`, evaluated over the two or three pieces that can be
    /// nonzero.
    pub fn partition_sum(&self, xi: &[f64]) -> f64 {
        let t = xi[1].atan2(xi[0]).rem_euclid(2.0 * PI);
        let base = (t / self.gap).floor() as i64;
        (base - 2..=base + 2)
            .map(|k| self.chi(k.rem_euclid(self.count as i64) as usize, xi))
            .sum()
    }

    /// Sup over the unit circle of the largest `order`-th partial
    /// derivative of `χ_0`, by central differences (`order ≤ 2`).
    pub fn derivative_sup(&self, order: usize) -> f64 {
        let h = self.gap / 400.0;
        let chi = |x: f64, y: f64| self.chi(0, &[x, y]);
        let samples = 2000;
        let mut best = 0.0f64;
        for i in 0..samples {
            let t = -self.gap + 2.0 * self.gap * (i as f64 + 0.5) / samples as f64;
            let (x, y) = (t.cos(), t.sin());
            let vals: Vec<f64> = match order {
                0 => vec![chi(x, y)],
                1 => vec![
                    (chi(x + h, y) - chi(x - h, y)) / (2.0 * h),
                    (chi(x, y + h) - chi(x, y - h)) / (2.0 * h),
                ],
                _ => vec![
                    (chi(x + h, y) - 2.0 * chi(x, y) + chi(x - h, y)) / (h * h),
                    (chi(x, y + h) - 2.0 * chi(x, y) + chi(x, y - h)) / (h * h),
                    (chi(x + h, y + h) - chi(x + h, y - h) - chi(x - h, y + h) + chi(x - h, y - h)) / (4.0 * h * h),
                ],
            };
            best = vals.iter().fold(best, |b, v| b.max(v.abs()));
        }
        best
    }

    /// Lebesgue measure of `supp ψ(2^{-j}·) χ_ν`, counted on a Cartesian
    /// lattice with `per_width` points across the sector.
    pub fn piece_support_measure(&self, nu: usize, per_width: usize) -> f64 {
        let scale = 2f64.powi(self.j);
        let width = 2.0 * self.gap * 2.0 * scale;
        let h = width / per_width as f64;
        let c = self.center_angle(nu);
        let (e, f) = ([c.cos(), c.sin()], [-c.sin(), c.cos()]);
        let mut count = 0usize;
        let along = (2.0 * scale / h).ceil() as i64;
        let across = (width / h).ceil() as i64;
        for a in -1..=along {
            for b in -across..=across {
                let (s, t) = (a as f64 * h, b as f64 * h);
                let p = [s * e[0] + t * f[0], s * e[1] + t * f[1]];
                let rho = p[0].hypot(p[1]);
                if CutoffKind::Psi.eval(rho / scale) > 0.0 && self.chi(nu, &p) > 0.0 {
                    count += 1;
                }
            }
        }
        count as f64 * h * h
    }
}

/// Diagnostics of one packet `f_j^ν = (e^{-iφ} ψ(2^{-j}·) χ_ν)^∨`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceReport {
    pub nu: usize,
    pub l1: f64,
    pub peak: [f64; 2],
    /// `|peak − ∇φ(ξ_ν)|` in units of `2^{-j/2}`.
    pub peak_offset: f64,
    /// Smallest `C` in `|f| ≤ C 2^{3j/2} (1 + 2^{j/2}|x − x_ν|)^{-N}`.
    pub c_transverse: f64,
    /// Smallest `C` in `|f| ≤ C 2^{3j/2} (1 + 2^j|ξ_ν·(x − x_ν)|)^{-N}`.
    pub c_longitudinal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularReport {
    pub j: i32,
    pub count: usize,
    pub envelope_order: f64,
    pub pieces: Vec<PieceReport>,
    /// `count ·` mean sampled `L¹` norm.
    pub total_l1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularOptions {
    /// Number of packets to evaluate, spread evenly over the frame.
    pub pieces: usize,
    pub envelope_order: f64,
    pub max_samples: usize,
}

impl Default for AngularOptions {
    fn default() -> Self {
        Self {
            pieces: 3,
            envelope_order: 2.0,
            max_samples: 2048,
        }
    }
}

/// Evaluates sampled packets of the frame and their envelopes.
pub fn angular_piece_bounds(frame: &AngularFrame, phase: &WavePhase, opts: &AngularOptions) -> Result<AngularReport> {
    let j = frame.j;
    let scale = 2f64.powi(j);
    // Each packet is computed translated to its expected centre, on a box
    // of a fixed number of transverse decay lengths.
    let length = (48.0 / scale.sqrt()).min(8.0);
    let grid = grid_resolving(2, 2.0 * scale, 2.0, length, opts.max_samples)?;
    if grid.length() < length {
        return Err(Error::Aliasing {
            support: 2.0 * scale,
            guard: grid.guard(),
        });
    }
    let picks = opts.pieces.clamp(1, frame.count);
    let mut pieces = Vec::new();
    for k in 0..picks {
        let nu = k * frame.count / picks;
        let c = frame.centers[nu];
        let target = phase.gradient(&c);
        let spec = Field::from_fn_frequency(grid, |xi| {
            let rho = xi[0].hypot(xi[1]);
            let w = CutoffKind::Psi.eval(rho / scale);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let shift = xi[0] * target[0] + xi[1] * target[1];
            Complex64::from_polar(w * frame.chi(nu, xi), shift - phase.eval(xi))
        });
        let f = inverse_fourier_transform(&spec)?;
        let l1 = lp_norm(&f, 1.0)?.value;
        let amp = scale.powf(1.5);
        let (mut peak, mut best) = ([0.0, 0.0], 0.0);
        let (mut ct, mut cl) = (0.0f64, 0.0f64);
        for (i, v) in f.data().iter().enumerate() {
            let y = grid.point(i);
            let p = [y[0] + target[0], y[1] + target[1]];
            let m = v.norm();
            if m > best {
                best = m;
                peak = p;
            }
            let d = [p[0] - target[0], p[1] - target[1]];
            let trans = (1.0 + scale.sqrt() * d[0].hypot(d[1])).powf(opts.envelope_order);
            let long = (1.0 + scale * (c[0] * d[0] + c[1] * d[1]).abs()).powf(opts.envelope_order);
            ct = ct.max(m / amp * trans);
            cl = cl.max(m / amp * long);
        }
        if !(ct < 1e6 && cl < 1e6) {
            return Err(Error::Numerical(format!(
                "packet envelope fit failed at j = {j}, ν = {nu}"
            )));
        }
        let offset = (peak[0] - target[0]).hypot(peak[1] - target[1]) * scale.sqrt();
        pieces.push(PieceReport {
            nu,
            l1,
            peak,
            peak_offset: offset,
            c_transverse: ct,
            c_longitudinal: cl,
        });
    }
    let mean = pieces.iter().map(|p| p.l1).sum::<f64>() / pieces.len() as f64;
    Ok(AngularReport {
        j,
        count: frame.count,
        envelope_order: opts.envelope_order,
        total_l1: mean * frame.count as f64,
        pieces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_and_partition() {
        let f = angular_frame(6, 2).unwrap();
        assert_eq!(f.count, 51);
        for k in 0..200 {
            let t = k as f64 * 0.0317;
            let r = 0.1 + k as f64;
            let s = f.partition_sum(&[r * t.cos(), r * t.sin()]);
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(angular_frame(6, 1).is_err());
        assert!(angular_frame(1, 2).is_err());
    }

    #[test]
    fn support_within_gap() {
        let f = angular_frame(5, 2).unwrap();
        for k in 0..1000 {
            let t = k as f64 * 2.0 * PI / 1000.0;
            let x = [t.cos(), t.sin()];
            for nu in 0..f.count {
                if f.chi(nu, &x) > 0.0 {
                    let c = f.centers[nu];
                    let chord = (x[0] - c[0]).hypot(x[1] - c[1]);
                    assert!(chord < 2f64.powf(-2.5 + 1.0));
                }
            }
        }
    }
}
