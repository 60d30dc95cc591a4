//! Weyl coefficients of the two-term expansion and the half-space boundary
//! layer kernel.
//!
//! The bulk coefficient is
//! `Λ_μ⁽¹⁾ = (2π)^{-d} ∫ (sqrt(|ξ|²+μ²) - μ - 1)_- dξ`,
//! evaluated both by quadrature of the radial reduction and by a closed
//! antiderivative. The boundary coefficient is `Λ_μ⁽²⁾ = ∫_0^∞ 𝒦_μ(t) dt`
//! with
//!
//! ```text
//! 𝒦_μ(t) = (2π)^{-(d-1)} |S^{d-2}| ∫_0^{sqrt(1+2μ)} ν^d (𝒥_{μ,ν} - 𝒥⁺_{μ,ν}(νt)) dν,
//! 𝒥_{μ,ν} - 𝒥⁺_{μ,ν}(s) = (1/π) ∫_0^Λ Ψ_ν(λ) (1 - 2 F_{μ/ν,λ}(s)²) dλ,
//! ```
//!
//! where `Ψ_ν(λ) = (ν^{-1} - ψ_{μ/ν}(λ²+1))_+` vanishes at the support edge
//! `Λ = sqrt((1+2μ)/ν² - 1)` and `1 - 2F² = cos 2β - 4 sin(β) G - 2G²` with
//! `β = λs + ϑ`.
//!
//! `Λ_μ⁽²⁾` is computed along two swapped integration orders that must agree:
//!
//! * t-first: the `u`-integral of `1 - 2F²` is carried out analytically under
//!   Abel regularization. The `ε → 0` limit does not commute with the
//!   λ-integral: `ε cos 2ϑ/(ε² + 4λ²)` carries a point mass `(π/4) δ(λ)`, so
//!   the channel value is `(π/4)Ψ_ν(0) + ∫ Ψ(λ) w(λ) dλ` with
//!   `w(λ) = -sin 2ϑ/(2λ) - 4 Σᵢ wᵢ Im[e^{iϑ}/(sᵢ-iλ)] - 2 Σᵢⱼ wᵢwⱼ/(sᵢ+sⱼ)`.
//!   Dropping the point mass flips the sign of the whole coefficient.
//! * t-outer: adaptive quadrature of `𝒦_μ` on `(0, T]` plus the closed-form
//!   completion of every channel on `(T, ∞)`.

use crate::halfline::{self, fit_g_machine, GCorrection, HalflineError, ModeCtx};
use crate::par::maybe_par_map;
use crate::quad::{self, QuadSpec};
use crate::specfun::{sphere_area, unit_ball_volume};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstantsError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("half-line evaluation failed: {0}")]
    Halfline(#[from] HalflineError),
    #[error("quadrature failure: {0}")]
    Quad(#[from] quad::QuadError),
    #[error("Λ² dual-path disagreement: t-first {t_first:.6e} vs t-outer {t_outer:.6e} (rel {rel_dev:.3e})")]
    DualPathMismatch {
        t_first: f64,
        t_outer: f64,
        rel_dev: f64,
    },
}

/// Parameters of the half-space symbol `a_μ(ξ', ξ_d) = |ξ'| ψ_{μ/|ξ'|}(ξ_d²+1)`.
#[derive(Clone, Copy, Debug)]
pub struct HalfSpaceSymbol {
    pub d: u32,
    pub mu: f64,
}

impl HalfSpaceSymbol {
    pub fn new(d: u32, mu: f64) -> Result<Self, ConstantsError> {
        if d < 2 {
            return Err(ConstantsError::Domain("half-space symbol requires d >= 2"));
        }
        if !(mu >= 0.0) {
            return Err(ConstantsError::Domain("mu must be >= 0"));
        }
        Ok(Self { d, mu })
    }
}

/// `C_d = ω_d/(2π)^d` with `ω_d` the unit-ball volume.
pub fn c_d(d: u32) -> f64 {
    unit_ball_volume(d) / (2.0 * std::f64::consts::PI).powi(d as i32)
}

/// `∫_0^R r^{d-1} sqrt(r²+μ²) dr` by the two-step recurrence
/// `(d+1) I_d = [r^{d-2}(r²+μ²)^{3/2}]_0^R - (d-2) μ² I_{d-2}`.
fn radial_sqrt_integral(d: u32, r: f64, mu: f64) -> f64 {
    let rho = (r * r + mu * mu).sqrt();
    match d {
        1 => {
            if mu == 0.0 {
                0.5 * r * r
            } else {
                0.5 * (r * rho + mu * mu * (r / mu).asinh())
            }
        }
        2 => (rho.powi(3) - mu.powi(3)) / 3.0,
        _ => {
            let boundary = r.powi(d as i32 - 2) * rho.powi(3);
            (boundary - (d as f64 - 2.0) * mu * mu * radial_sqrt_integral(d - 2, r, mu))
                / (d as f64 + 1.0)
        }
    }
}

/// Bulk Weyl coefficient `Λ_μ⁽¹⁾`, closed antiderivative path.
pub fn lambda1(d: u32, mu: f64) -> Result<f64, ConstantsError> {
    let sym = HalfSpaceSymbol::new(d, mu)?;
    let r = (1.0 + 2.0 * sym.mu).sqrt();
    let radial = (1.0 + sym.mu) * r.powi(d as i32) / d as f64 - radial_sqrt_integral(d, r, sym.mu);
    Ok(sphere_area(d) / (2.0 * std::f64::consts::PI).powi(d as i32) * radial)
}

/// Bulk Weyl coefficient by adaptive quadrature of the radial reduction;
/// agrees with [`lambda1`] to 1e-10 relative.
pub fn lambda1_quadrature(d: u32, mu: f64) -> Result<f64, ConstantsError> {
    let sym = HalfSpaceSymbol::new(d, mu)?;
    let r = (1.0 + 2.0 * sym.mu).sqrt();
    let spec = QuadSpec::new(1e-15, 1e-13).with_subdivisions(2000);
    let mu2 = sym.mu * sym.mu;
    let integrand =
        move |x: f64| (1.0 + sym.mu - (x * x + mu2).sqrt()) * x.powi(d as i32 - 1);
    let v = quad::integrate(integrand, 0.0, r, &spec)?;
    Ok(sphere_area(d) / (2.0 * std::f64::consts::PI).powi(d as i32) * v.value)
}

/// `|Λ_μ⁽¹⁾ - Λ_0⁽¹⁾ - C_d μ| / μ²`, the normalized first-constant gap.
pub fn first_constant_gap(d: u32, mu: f64) -> Result<f64, ConstantsError> {
    if !(mu > 0.0) {
        return Err(ConstantsError::Domain("first_constant_gap requires mu > 0"));
    }
    let gap = lambda1(d, mu)? - lambda1(d, 0.0)? - c_d(d) * mu;
    Ok(gap.abs() / (mu * mu))
}

/// `𝒥_{μ,ν} = (1/π) ∫_0^∞ (ψ_{μ/ν}(λ²+1) - ν^{-1})_- dλ`, closed form.
pub fn j_bulk(mu: f64, nu: f64) -> Result<f64, ConstantsError> {
    if !(nu > 0.0) || !(mu >= 0.0) {
        return Err(ConstantsError::Domain("j_bulk requires nu > 0, mu >= 0"));
    }
    let cap = (1.0 + 2.0 * mu).sqrt();
    if nu >= cap {
        return Ok(0.0);
    }
    let big_lambda = (cap * cap / (nu * nu) - 1.0).sqrt();
    let omega = mu / nu;
    let c = (1.0 + omega * omega).sqrt();
    let lin = (1.0 / nu + omega) * big_lambda;
    Ok((lin - radial_sqrt_integral(1, big_lambda, c)) / std::f64::consts::PI)
}

// Fixed Gauss-Kronrod nodes on [0, 1] used to lay out the deterministic
// ν- and λ-grids of the channel machinery.
fn gk_nodes_unit() -> Vec<(f64, f64)> {
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
        0.063_092_092_629_978_56,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    let mut out = Vec::with_capacity(15);
    for j in 0..7 {
        out.push((0.5 * (1.0 - XGK[j]), 0.5 * WGK[j]));
    }
    out.push((0.5, 0.5 * WGK[7]));
    for j in (0..7).rev() {
        out.push((0.5 * (1.0 + XGK[j]), 0.5 * WGK[j]));
    }
    out
}

/// One λ-node of a channel: the fitted mode plus everything the closed-form
/// Abel values need.
struct ModeNode {
    lambda: f64,
    /// quadrature weight, including the `λ = Λ sin u` jacobian
    wl: f64,
    /// `Ψ_ν(λ)`
    psi: f64,
    theta: f64,
    sin_th: f64,
    cos_th: f64,
    fit: GCorrection,
    /// closed Abel value of `∫_0^∞ (1-2F²) du` at this λ (without the δ mass)
    w_abel: f64,
}

/// One transverse frequency `ν = |ξ'|` with its λ-quadrature.
struct Channel {
    nu: f64,
    /// ν-quadrature weight
    wnu: f64,
    /// `Ψ_ν(0)`
    psi0: f64,
    modes: Vec<ModeNode>,
}

impl Channel {
    fn build(mu: f64, nu: f64, wnu: f64, lambda_panels: usize) -> Result<Self, ConstantsError> {
        let cap2 = 1.0 + 2.0 * mu;
        let big_lambda = (cap2 / (nu * nu) - 1.0).max(0.0).sqrt();
        let omega = mu / nu;
        let c2 = 1.0 + omega * omega;
        let edge = (1.0 + mu) / nu; // = sqrt(Λ² + c²)
        let psi_at = |lambda: f64| {
            // stable form of (1+μ)/ν - sqrt(λ²+c²)
            (big_lambda * big_lambda - lambda * lambda) / (edge + (lambda * lambda + c2).sqrt())
        };
        let psi0 = psi_at(0.0);

        let unit = gk_nodes_unit();
        let mut lambdas = Vec::with_capacity(2 * lambda_panels * unit.len());
        // The endpoint λ = Λ is handled by the λ = Λ sin u substitution
        // (Ψ vanishes linearly there). When Λ is large the phase shift's
        // variation near λ = 0 needs its own resolution: geometric panels
        // cover (0, b] before the substitution takes over on [b, Λ].
        let scale = c2.sqrt(); // ϑ varies on the scale λ ~ sqrt(1+ω²)
        if big_lambda <= 4.0 * scale {
            let du = std::f64::consts::FRAC_PI_2 / (2 * lambda_panels) as f64;
            for p in 0..2 * lambda_panels {
                let u0 = p as f64 * du;
                for &(x, w) in &unit {
                    let u = u0 + x * du;
                    lambdas.push((big_lambda * u.sin(), w * big_lambda * u.cos() * du));
                }
            }
        } else {
            let b = scale;
            let inner_depth = 6usize;
            let mut edges = vec![0.0, b * 0.5f64.powi(inner_depth as i32)];
            for k in (0..inner_depth).rev() {
                edges.push(b * 0.5f64.powi(k as i32));
            }
            for w in edges.windows(2) {
                let (a, bb) = (w[0], w[1]);
                for &(x, wq) in &unit {
                    lambdas.push((a + x * (bb - a), wq * (bb - a)));
                }
            }
            let u_b = (b / big_lambda).asin();
            let du = (std::f64::consts::FRAC_PI_2 - u_b) / lambda_panels as f64;
            for p in 0..lambda_panels {
                let u0 = u_b + p as f64 * du;
                for &(x, w) in &unit {
                    let u = u0 + x * du;
                    lambdas.push((big_lambda * u.sin(), w * big_lambda * u.cos() * du));
                }
            }
        }

        let modes: Vec<Result<ModeNode, ConstantsError>> =
            maybe_par_map(&lambdas, |&(lambda, wl)| {
                let ctx = ModeCtx::new(omega, lambda)?;
                let fit = fit_g_machine(&ctx)?;
                let w_abel = abel_one_minus_two_f_sq(&ctx, &fit);
                Ok(ModeNode {
                    lambda,
                    wl,
                    psi: psi_at(lambda),
                    theta: ctx.theta,
                    sin_th: ctx.sin_theta,
                    cos_th: ctx.cos_theta,
                    fit,
                    w_abel,
                })
            });
        let modes = modes.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            nu,
            wnu,
            psi0,
            modes,
        })
    }

    /// `(π/4) Ψ_ν(0) + ∫_0^Λ Ψ w_abel dλ`, the full Abel-regularized
    /// `∫_0^∞ (𝒥 - 𝒥⁺(u)) du` times π.
    fn t_first_inner(&self) -> f64 {
        let mut acc = std::f64::consts::FRAC_PI_4 * self.psi0;
        for m in &self.modes {
            acc += m.wl * m.psi * m.w_abel;
        }
        acc
    }

    /// `π (𝒥_{μ,ν} - 𝒥⁺_{μ,ν}(s))` at `s = ν t`.
    fn j_diff_at(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for m in &self.modes {
            let beta = m.lambda * s + m.theta;
            let g = m.fit.eval(s);
            acc += m.wl * m.psi * ((2.0 * beta).cos() - 4.0 * beta.sin() * g - 2.0 * g * g);
        }
        acc
    }

    /// Closed-form completion `π ∫_U^∞ (𝒥 - 𝒥⁺(u)) du` (contains the same
    /// δ mass as the full Abel value).
    fn tail_inner(&self, u_from: f64) -> f64 {
        let mut acc = std::f64::consts::FRAC_PI_4 * self.psi0;
        for m in &self.modes {
            let lambda = m.lambda;
            let phase = lambda * u_from + m.theta;
            let mut w = -(2.0 * phase).sin() / (2.0 * lambda);
            for &(s, wt) in &m.fit.nodes {
                let damp = (-s * u_from).exp();
                w -= 4.0 * wt * damp * (s * phase.sin() + lambda * phase.cos())
                    / (s * s + lambda * lambda);
            }
            let nodes = &m.fit.nodes;
            for &(si, wi) in nodes {
                for &(sj, wj) in nodes {
                    let ssum = si + sj;
                    w -= 2.0 * wi * wj * (-ssum * u_from).exp() / ssum;
                }
            }
            acc += m.wl * m.psi * w;
        }
        acc
    }

    /// Rigorous-style bound constant: `|𝒥 - 𝒥⁺(s)| ≤ C(ν)/s²` for large s.
    fn decay_bound(&self, omega_c2: f64, nu: f64) -> f64 {
        // cos-part after two integrations by parts, with the paper's
        // closed-form envelopes for ψ', ψ'', ϑ', ϑ''.
        let mut integrals = 0.0;
        for m in &self.modes {
            let l2c2 = m.lambda * m.lambda + omega_c2;
            let psi_p = m.lambda / l2c2.sqrt();
            let psi_pp = omega_c2 / l2c2.powf(1.5);
            let th_p = omega_c2.sqrt() / (std::f64::consts::PI * l2c2);
            let th_pp = 3.0 * omega_c2.sqrt() / (std::f64::consts::PI * l2c2.powf(1.5));
            integrals += m.wl
                * (psi_pp + 3.0 * psi_p * th_p + (2.0 * th_p * th_p + th_pp) / nu);
        }
        let cos_part = 0.25 * (1.0 + integrals);
        // G-part: G(s) ≤ 4 min(1, 1/λ)/s² from the first moment bound.
        let mut g_part = 0.0;
        for m in &self.modes {
            g_part += m.wl * m.psi * 24.0 * m.lambda.recip().min(1.0);
        }
        cos_part + g_part
    }
}

fn abel_one_minus_two_f_sq(ctx: &ModeCtx, fit: &GCorrection) -> f64 {
    let lambda = ctx.lambda;
    let mut w = -(2.0 * ctx.theta).sin() / (2.0 * lambda);
    for &(s, wt) in &fit.nodes {
        w -= 4.0 * wt * (s * ctx.sin_theta + lambda * ctx.cos_theta) / (s * s + lambda * lambda);
    }
    for &(si, wi) in &fit.nodes {
        for &(sj, wj) in &fit.nodes {
            w -= 2.0 * wi * wj / (si + sj);
        }
    }
    w
}

/// `𝒥⁺_{μ,ν}(t) = (2/π) ∫_0^Λ Ψ_ν(λ) F_{μ/ν,λ}(t)² dλ`.
pub fn j_plus(mu: f64, nu: f64, t: f64) -> Result<f64, ConstantsError> {
    if !(nu > 0.0) || !(t > 0.0) || !(mu >= 0.0) {
        return Err(ConstantsError::Domain("j_plus requires nu, t > 0, mu >= 0"));
    }
    if nu >= (1.0 + 2.0 * mu).sqrt() {
        return Ok(0.0);
    }
    let ch = Channel::build(mu, nu, 1.0, 8)?;
    let mut acc = 0.0;
    for m in &ch.modes {
        let f = (m.lambda * t + m.theta).sin() + m.fit.eval(t);
        acc += m.wl * m.psi * f * f;
    }
    Ok(2.0 / std::f64::consts::PI * acc)
}

/// The deterministic channel machinery behind `𝒦_μ` and `Λ_μ⁽²⁾`, reusable
/// across many `t` evaluations.
pub struct KmuMachine {
    pub d: u32,
    pub mu: f64,
    prefactor: f64,
    channels: Vec<Channel>,
}

const LAMBDA_PANELS: usize = 6;
const TOP_PANELS: usize = 3;
const GEOMETRIC_DEPTH: usize = 12;

impl KmuMachine {
    pub fn new(d: u32, mu: f64) -> Result<Self, ConstantsError> {
        if !(d == 2 || d == 3) {
            return Err(ConstantsError::Domain(
                "the boundary kernel is implemented for d in {2, 3}",
            ));
        }
        if !(mu >= 0.0) {
            return Err(ConstantsError::Domain("mu must be >= 0"));
        }
        let nu_max = (1.0 + 2.0 * mu).sqrt();
        // ν-panels: uniform split of the top octave, then geometric halving
        // toward ν = 0 where the integrand has an integrable logarithm.
        let mut panels = Vec::new();
        for i in 0..TOP_PANELS {
            let a = nu_max * (0.5 + 0.5 * i as f64 / TOP_PANELS as f64);
            let b = nu_max * (0.5 + 0.5 * (i + 1) as f64 / TOP_PANELS as f64);
            panels.push((a, b));
        }
        for k in 1..=GEOMETRIC_DEPTH {
            let b = nu_max * 0.5f64.powi(k as i32);
            panels.push((b * 0.5, b));
        }

        let unit = gk_nodes_unit();
        let mut layout = Vec::new();
        for &(a, b) in &panels {
            for &(x, w) in &unit {
                layout.push((a + x * (b - a), w * (b - a)));
            }
        }
        let channels: Vec<Result<Channel, ConstantsError>> = layout
            .iter()
            .map(|&(nu, wnu)| Channel::build(mu, nu, wnu, LAMBDA_PANELS))
            .collect();
        let channels = channels.into_iter().collect::<Result<Vec<_>, _>>()?;
        let prefactor = sphere_area(d - 1)
            / (2.0 * std::f64::consts::PI).powi(d as i32 - 1);
        Ok(Self {
            d,
            mu,
            prefactor,
            channels,
        })
    }

    /// Shared, memoized machines keyed on `(d, μ)`.
    pub fn shared(d: u32, mu: f64) -> Result<Arc<KmuMachine>, ConstantsError> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, u64), Arc<KmuMachine>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (d, mu.to_bits());
        if let Some(m) = cache.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let machine = Arc::new(KmuMachine::new(d, mu)?);
        cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| machine.clone());
        Ok(machine)
    }

    /// `𝒦_μ(t)`.
    pub fn k_at(&self, t: f64) -> f64 {
        let per: Vec<f64> = maybe_par_map(&self.channels, |ch| {
            let dpow = self.d as i32;
            ch.wnu * ch.nu.powi(dpow) * ch.j_diff_at(ch.nu * t)
        });
        self.prefactor / std::f64::consts::PI * per.iter().sum::<f64>()
    }

    /// `Λ_μ⁽²⁾` by the t-first route (analytic Abel values per channel).
    pub fn lambda2_t_first(&self) -> f64 {
        let per: Vec<f64> = maybe_par_map(&self.channels, |ch| {
            ch.wnu * ch.nu.powi(self.d as i32 - 1) * ch.t_first_inner()
        });
        self.prefactor / std::f64::consts::PI * per.iter().sum::<f64>()
    }

    /// `Λ_μ⁽²⁾` by the t-outer route: adaptive quadrature of `𝒦_μ` on
    /// `(0, T]` plus the closed-form channel completion on `(T, ∞)`.
    pub fn lambda2_t_outer(&self, t_split: f64) -> Result<f64, ConstantsError> {
        let spec = QuadSpec::new(1e-9, 2e-6).with_subdivisions(1600);
        let head = quad::integrate(|t| self.k_at(t), 0.0, t_split, &spec)?;
        let per: Vec<f64> = maybe_par_map(&self.channels, |ch| {
            // ∫_T^∞ (𝒥-𝒥⁺(νt)) dt = (1/ν) π^{-1} tail_inner(νT)
            ch.wnu * ch.nu.powi(self.d as i32 - 1) * ch.tail_inner(ch.nu * t_split)
        });
        let tail = self.prefactor / std::f64::consts::PI * per.iter().sum::<f64>();
        Ok(head.value + tail)
    }

    /// Upper bound constant `C` with `|𝒦_μ(t)| ≤ C/t²` for large `t`.
    pub fn decay_bound(&self) -> f64 {
        let per: Vec<f64> = maybe_par_map(&self.channels, |ch| {
            let omega = self.mu / ch.nu;
            let c2 = 1.0 + omega * omega;
            ch.wnu * ch.nu.powi(self.d as i32 - 2) * ch.decay_bound(c2, ch.nu)
        });
        self.prefactor / std::f64::consts::PI * per.iter().sum::<f64>()
    }
}

/// `𝒦_μ(t)`; builds the full channel machinery per call. Use
/// [`KmuMachine::shared`] for repeated evaluations.
pub fn k_mu(d: u32, mu: f64, t: f64) -> Result<f64, ConstantsError> {
    if !(t > 0.0) {
        return Err(ConstantsError::Domain("k_mu requires t > 0"));
    }
    Ok(KmuMachine::shared(d, mu)?.k_at(t))
}

/// Result of the dual-path boundary-coefficient computation.
#[derive(Clone, Copy, Debug)]
pub struct Lambda2 {
    /// t-first value (the reported coefficient).
    pub value: f64,
    /// order-swapped validation value
    pub t_outer: f64,
    pub rel_dev: f64,
}

const T_SPLIT: f64 = 40.0;

/// `Λ_μ⁽²⁾ = ∫_0^∞ 𝒦_μ(t) dt` with the order-swapped cross-check; fails if
/// the two routes disagree beyond 1e-2 relative.
pub fn lambda2(d: u32, mu: f64) -> Result<Lambda2, ConstantsError> {
    let machine = KmuMachine::shared(d, mu)?;
    let t_first = machine.lambda2_t_first();
    let t_outer = machine.lambda2_t_outer(T_SPLIT)?;
    let rel_dev = (t_first - t_outer).abs() / t_first.abs().max(1e-300);
    if rel_dev > 1e-2 {
        return Err(ConstantsError::DualPathMismatch {
            t_first,
            t_outer,
            rel_dev,
        });
    }
    Ok(Lambda2 {
        value: t_first,
        t_outer,
        rel_dev,
    })
}

/// Memoized `Λ_0⁽²⁾`-style lookup for the predictors (t-first value only).
pub fn lambda2_value(d: u32, mu: f64) -> Result<f64, ConstantsError> {
    Ok(KmuMachine::shared(d, mu)?.lambda2_t_first())
}

/// Weighted norm `∫_0^∞ t^δ |𝒦_μ(t)| dt` with the split-quadrature head and
/// an oscillation-bound tail.
#[derive(Clone, Copy, Debug)]
pub struct WeightedKNorm {
    pub value: f64,
    pub head: f64,
    pub tail_bound: f64,
    /// tail bound exceeded the head by 10x: accuracy degraded
    pub degraded: bool,
    /// value / (1+μ)^{(d-δ)/2}
    pub ratio_to_power: f64,
}

pub fn weighted_k_norm(d: u32, mu: f64, delta: f64) -> Result<WeightedKNorm, ConstantsError> {
    if !(0.0..1.0).contains(&delta) {
        return Err(ConstantsError::Domain(
            "weighted_k_norm requires 0 <= delta < 1 (the constant blows up at 1)",
        ));
    }
    let machine = KmuMachine::shared(d, mu)?;
    let spec = QuadSpec::new(1e-9, 1e-5).with_subdivisions(2400);
    let head = quad::integrate(
        |t| t.powf(delta) * machine.k_at(t).abs(),
        0.0,
        T_SPLIT,
        &spec,
    )?;
    let tail_bound = machine.decay_bound() * T_SPLIT.powf(delta - 1.0) / (1.0 - delta);
    let value = head.value + tail_bound;
    Ok(WeightedKNorm {
        value,
        head: head.value,
        tail_bound,
        degraded: tail_bound > 10.0 * head.value,
        ratio_to_power: value / (1.0 + mu).powf((d as f64 - delta) / 2.0),
    })
}

/// Convenience: `Ψ_ν(λ) = (ν^{-1} - ψ_{μ/ν}(λ²+1))_+`.
pub fn psi_nu(mu: f64, nu: f64, lambda: f64) -> Result<f64, ConstantsError> {
    let omega = mu / nu;
    let v = 1.0 / nu - halfline::psi(omega, lambda * lambda + 1.0)?;
    Ok(v.max(0.0))
}
