//! Modified Bessel functions of the second kind at half-integer order, and
//! the radial kernels `θ`, `θ_ν` built from them.
//!
//! Orders are addressed by the numerator `n ≥ 0` of `β = (n+1)/2`. Even `n`
//! gives a genuine half-integer order with the elementary closed form
//! `K_{m+1/2}(s) = sqrt(π/(2s)) e^{-s} Σ_j (m+j)!/(j!(m-j)!) (2s)^{-j}`;
//! odd `n` (integer order) is evaluated by quadrature of the integral
//! representation `K_β(s) = s^β/2^{β+1} ∫_0^∞ e^{-t - s²/(4t)} t^{-β-1} dt`.
//! Both evaluation paths are public so they can be cross-checked.

use crate::quad::{self, QuadSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecfunError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("quadrature failure: {0}")]
    Quad(#[from] quad::QuadError),
}

/// Arguments above this threshold underflow to zero in double precision
/// (`e^{-s}` is below the representable range well before the order-dependent
/// prefactors can compensate).
pub const UNDERFLOW_S: f64 = 700.0;

/// Value of `K_β(s)` with an explicit underflow marker.
#[derive(Clone, Copy, Debug)]
pub struct KBessel {
    pub value: f64,
    pub underflowed: bool,
}

/// Lanczos approximation (g = 7, 9 terms), valid here for `z ≥ 0.5`.
pub fn gamma_fn(z: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z >= 0.5);
    let zm1 = z - 1.0;
    let mut acc = G[0];
    for (i, &c) in G.iter().enumerate().skip(1) {
        acc += c / (zm1 + i as f64);
    }
    let t = zm1 + 7.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(zm1 + 0.5) * (-t).exp() * acc
}

/// Surface measure of the unit sphere `S^{d-1}` in `R^d`.
pub fn sphere_area(d: u32) -> f64 {
    debug_assert!(d >= 1);
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_fn(d as f64 / 2.0)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: u32) -> f64 {
    std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_fn(d as f64 / 2.0 + 1.0)
}

/// Closed form for half-integer order `β = m + 1/2`.
pub fn bessel_k_half_closed(m: u32, s: f64) -> f64 {
    let mut poly = 0.0;
    // (m+j)! / (j! (m-j)!) (2s)^{-j}
    let mut coeff = 1.0;
    for j in 0..=m {
        if j > 0 {
            let jm = j as f64;
            let mm = m as f64;
            coeff *= (mm + jm) * (mm - jm + 1.0) / jm;
        }
        poly += coeff / (2.0 * s).powi(j as i32);
    }
    (std::f64::consts::PI / (2.0 * s)).sqrt() * (-s).exp() * poly
}

/// Quadrature of the representation
/// `K_β(s) = s^β / 2^{β+1} ∫_0^∞ e^{-t - s²/(4t)} t^{-β-1} dt`
/// after the substitution `t = e^x`.
pub fn bessel_k_intrep00(beta: f64, s: f64) -> Result<f64, SpecfunError> {
    if s <= 0.0 {
        return Err(SpecfunError::Domain("K_beta requires s > 0"));
    }
    let q = 0.25 * s * s;
    // e^{-e^x} kills the right tail once e^x > ~710; e^{-q e^{-x}} kills the
    // left tail once q e^{-x} > ~710.
    let lo = (q / 745.0).ln() - 1.0;
    let hi = 745.0f64.ln() + 1.0;
    let integrand = |x: f64| {
        let t = x.exp();
        (-t - q / t - beta * x).exp()
    };
    let spec = QuadSpec::new(1e-300, 1e-13).with_subdivisions(4000);
    let r = quad::integrate(integrand, lo, hi, &spec)?;
    Ok(s.powf(beta) / 2f64.powf(beta + 1.0) * r.value)
}

/// Quadrature of the companion representation
/// `K_β(s) = sqrt(π)/Γ(β+1/2) (s/2)^β ∫_1^∞ e^{-st} (t²-1)^{β-1/2} dt`.
pub fn bessel_k_intrep01(beta: f64, s: f64) -> Result<f64, SpecfunError> {
    if s <= 0.0 {
        return Err(SpecfunError::Domain("K_beta requires s > 0"));
    }
    let pow = beta - 0.5;
    let spec = QuadSpec::new(1e-300, 1e-13)
        .with_subdivisions(4000)
        .with_decay(quad::DecayHint::Exponential(s));
    let r = quad::integrate_semi_infinite(
        |t| (-s * t).exp() * (t * t - 1.0).max(0.0).powf(pow),
        1.0,
        &spec,
    )?;
    Ok(std::f64::consts::PI.sqrt() / gamma_fn(beta + 0.5) * (0.5 * s).powf(beta) * r.value)
}

/// `K_{(n+1)/2}(s)` for integer numerator `n ≥ 0`.
///
/// Even `n` dispatches to the closed form, odd `n` (integer order) to the
/// integral representation.
pub fn bessel_k_half(n: u32, s: f64) -> Result<KBessel, SpecfunError> {
    if s <= 0.0 {
        return Err(SpecfunError::Domain("K_beta requires s > 0"));
    }
    if s > UNDERFLOW_S + n as f64 {
        return Ok(KBessel {
            value: 0.0,
            underflowed: true,
        });
    }
    let value = if n % 2 == 0 {
        bessel_k_half_closed(n / 2, s)
    } else {
        bessel_k_intrep00((n + 1) as f64 / 2.0, s)?
    };
    Ok(KBessel {
        value,
        underflowed: false,
    })
}

/// `d/ds K_β(s) = (β/s) K_β(s) - K_{β+1}(s)` for `β = (n+1)/2`.
pub fn bessel_k_derivative(n: u32, s: f64) -> Result<f64, SpecfunError> {
    let beta = (n + 1) as f64 / 2.0;
    let k = bessel_k_half(n, s)?;
    let k1 = bessel_k_half(n + 2, s)?;
    Ok(beta / s * k.value - k1.value)
}

/// Parameters of the rescaled kernel family `θ_ν`.
#[derive(Clone, Copy, Debug)]
pub struct KernelParams {
    pub d: u32,
    pub nu: f64,
}

impl KernelParams {
    pub fn new(d: u32, nu: f64) -> Result<Self, SpecfunError> {
        if d < 1 {
            return Err(SpecfunError::Domain("kernel dimension d must be >= 1"));
        }
        if !(nu > 0.0) {
            return Err(SpecfunError::Domain("kernel scale nu must be > 0"));
        }
        Ok(Self { d, nu })
    }
}

/// `θ_ν(t) = ν^{d+1} (2πνt)^{-(d+1)/2} K_{(d+1)/2}(νt)`, positive and
/// strictly decreasing in `t`.
pub fn theta_kernel(p: &KernelParams, t: f64) -> Result<f64, SpecfunError> {
    if !(t > 0.0) {
        return Err(SpecfunError::Domain("theta kernel requires t > 0"));
    }
    let s = p.nu * t;
    let k = bessel_k_half(p.d, s)?;
    let half = (p.d + 1) as f64 / 2.0;
    Ok(p.nu.powi(p.d as i32 + 1) * (2.0 * std::f64::consts::PI * s).powf(-half) * k.value)
}
