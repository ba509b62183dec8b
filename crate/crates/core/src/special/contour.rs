//! Trapezoidal quadrature of `(1/2πi) ∫ g(u) du` along a vertical line or
//! a smoothly bent deformation of it.
//!
//! The path is `u(τ) = σ + iτ + κ(√(τ² + t₀²) − t₀)` and `τ = s·sinh(v)`;
//! the trapezoid runs in `v`. The sinh map turns algebraic tails in `τ`
//! into exponential tails in `v`, and a bend `κ ≠ 0` turns the oscillatory
//! algebraic decay of Mellin–Barnes integrands into exponential decay
//! whenever the integrand decays into the half-plane the path bends into.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::PrecisionConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPath {
    pub sigma: f64,
    /// κ: negative bends left, positive bends right, zero is the line.
    pub bend: f64,
    /// t₀: the bend is smooth on `|τ| ≲ t₀`.
    pub bend_scale: f64,
    /// s in `τ = s·sinh(v)`.
    pub tau_scale: f64,
}

impl ContourPath {
    pub fn vertical(sigma: f64) -> Self {
        Self {
            sigma,
            bend: 0.0,
            bend_scale: 1.0,
            tau_scale: 1.0,
        }
    }

    pub fn bent(sigma: f64, bend: f64, bend_scale: f64) -> Self {
        Self {
            sigma,
            bend,
            bend_scale,
            tau_scale: 1.0,
        }
    }

    fn offset(&self, tau: f64) -> f64 {
        let t0 = self.bend_scale;
        self.bend * ((tau * tau + t0 * t0).sqrt() - t0)
    }

    /// `u(τ)` and `du/dτ`.
    pub fn point(&self, tau: f64) -> (Complex64, Complex64) {
        let t0 = self.bend_scale;
        let root = (tau * tau + t0 * t0).sqrt();
        let u = Complex64::new(self.sigma + self.offset(tau), tau);
        let du = Complex64::new(self.bend * tau / root, 1.0);
        (u, du)
    }

    /// Shrinks the bend so that the region swept between the vertical line
    /// and the path stays clear of the given poles.
    pub fn keep_clear_of(&mut self, poles: &[Complex64]) -> Result<()> {
        for p in poles {
            let gap = p.re - self.sigma;
            if gap.abs() < 1e-9 {
                return Err(Error::Contour(format!(
                    "pole {p} lies on the line Re u = {}",
                    self.sigma
                )));
            }
            if gap.signum() != self.bend.signum() || self.bend == 0.0 {
                continue;
            }
            let margin = (0.25f64).min(gap.abs() / 2.0);
            let reach = self.offset(p.im).abs();
            if reach > gap.abs() - margin {
                let t0 = self.bend_scale;
                let shape = (p.im * p.im + t0 * t0).sqrt() - t0;
                self.bend = self.bend.signum() * (gap.abs() - margin) / shape;
            }
        }
        Ok(())
    }
}

/// How the integrand decays along the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `|g(u)| ~ C |Im u|^{−p}` with `p > 1`, used for the tail bound.
    Algebraic(f64),
    /// Faster than any power; the quadrature stops where terms vanish.
    Rapid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourResult {
    pub value: Complex64,
    /// Step-halving difference plus the truncation bound.
    pub error: f64,
    pub truncation: f64,
    pub step: f64,
    pub nodes: usize,
}

const MAX_HALVINGS: usize = 7;

/// `(1/2πi) ∫ g(u) du` along `path`. `poles` are singularities on the side
/// the path bends towards; the bend is reduced to avoid them.
pub fn integrate_path<G>(
    g: G,
    path: &ContourPath,
    decay: Decay,
    poles: &[Complex64],
    cfg: &PrecisionConfig,
) -> Result<ContourResult>
where
    G: Fn(Complex64) -> Complex64,
{
    cfg.validate()?;
    if let Decay::Algebraic(p) = decay {
        if !(p > 1.0) {
            return Err(Error::Contour(format!(
                "decay exponent {p} does not make the integral converge"
            )));
        }
    }
    let mut path = *path;
    path.keep_clear_of(poles)?;
    let s = path.tau_scale;
    let v_max = (cfg.contour_t / s).asinh();

    let weight = |v: f64| -> Complex64 {
        let tau = s * v.sinh();
        let (u, du) = path.point(tau);
        let val = g(u);
        if val.re.is_finite() && val.im.is_finite() {
            val * du * (s * v.cosh())
        } else {
            Complex64::new(f64::NAN, f64::NAN)
        }
    };

    // First level: walk outward from v = 0 until the terms die (rapid decay)
    // or the truncation point is reached.
    let mut h = cfg.contour_h;
    let mut sum = weight(0.0);
    let mut l1 = sum.norm();
    let mut nodes = 1usize;
    let mut v_stop = [v_max; 2];
    for (side, dir) in [1.0f64, -1.0].into_iter().enumerate() {
        let mut quiet = 0;
        let mut k = 1usize;
        loop {
            let v = dir * k as f64 * h;
            if v.abs() > v_max {
                break;
            }
            let w = weight(v);
            nodes += 1;
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::Contour(format!(
                    "integrand not finite at u = {}",
                    path.point(s * v.sinh()).0
                )));
            }
            sum += w;
            l1 += w.norm();
            if matches!(decay, Decay::Rapid) {
                if w.norm() < 1e-18 * l1 {
                    quiet += 1;
                    if quiet >= 8 {
                        v_stop[side] = v.abs();
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            k += 1;
        }
    }
    let mut estimate = sum * h;
    let mut diff = f64::INFINITY;
    let mut level = 0;
    while level < MAX_HALVINGS {
        let h_new = h / 2.0;
        let mut add = Complex64::new(0.0, 0.0);
        for (side, dir) in [1.0f64, -1.0].into_iter().enumerate() {
            let mut k = 1usize;
            loop {
                let v = dir * (2 * k - 1) as f64 * h_new;
                if v.abs() > v_stop[side] {
                    break;
                }
                let w = weight(v);
                nodes += 1;
                add += w;
                l1 += w.norm();
                k += 1;
            }
        }
        sum += add;
        h = h_new;
        let refined = sum * h;
        diff = (refined - estimate).norm();
        estimate = refined;
        level += 1;
        let scale = estimate.norm().max(1e-3 * l1 * h);
        if diff <= cfg.target_tol * scale && level >= 1 {
            break;
        }
    }
    let value = estimate / Complex64::new(0.0, 2.0 * PI);
    let diff = diff / (2.0 * PI);

    let truncation = match decay {
        Decay::Rapid => 0.0,
        Decay::Algebraic(p) => {
            let t = cfg.contour_t;
            let mut tail = 0.0;
            for tau in [t, -t] {
                let (u, du) = path.point(tau);
                tail += (g(u) * du).norm() * t / (p - 1.0);
            }
            tail / (2.0 * PI)
        }
    };
    let scale = value.norm().max(1e-3 * l1 * h / (2.0 * PI));
    if let Decay::Algebraic(p) = decay {
        if truncation > cfg.target_tol * scale {
            let factor = (truncation / (cfg.target_tol * scale)).powf(1.0 / (p - 1.0));
            return Err(Error::Truncation {
                bound: truncation,
                suggested_t: cfg.contour_t * factor,
            });
        }
    }
    Ok(ContourResult {
        value,
        error: diff + truncation,
        truncation,
        step: h,
        nodes,
    })
}

/// `(1/2πi) ∫_{Re u = σ} g(u) du` on the straight line.
pub fn contour_integral<G>(
    g: G,
    sigma: f64,
    decay: Decay,
    cfg: &PrecisionConfig,
) -> Result<ContourResult>
where
    G: Fn(Complex64) -> Complex64,
{
    integrate_path(g, &ContourPath::vertical(sigma), decay, &[], cfg)
}
