//! Numerical toolkit for two-term spectral asymptotics of the
//! pseudo-relativistic Dirichlet operator `(sqrt(-Δ + m²) - m)_D`.
//!
//! The crate is organized around the objects that enter the two-term Weyl
//! expansion of the Riesz mean `R(λ) = Σ (λ_n - λ)_-`:
//!
//! * [`quad`] — deterministic adaptive quadrature (finite, semi-infinite,
//!   Abel-regularized oscillatory), the substrate for every formula below.
//! * [`specfun`] — modified Bessel functions of the second kind at
//!   half-integer order and the kernels `θ`, `θ_ν` they induce.
//! * [`halfline`] — the one-dimensional model operator on `(0, ∞)`:
//!   phase shift `ϑ_ω`, correction `G_{ω,λ}`, generalized eigenfunctions
//!   `F_{ω,λ}(t) = sin(λt + ϑ) + G(t)` and the transform `Π_ω`.
//! * [`constants`] — the Weyl coefficients `Λ_μ⁽¹⁾`, `Λ_μ⁽²⁾`, `C_d` and the
//!   half-space boundary kernel `𝒦_μ(t)`.
//! * [`domains`] — bounded test domains with exact volume and surface measure.
//! * [`galerkin`] — Rayleigh–Ritz eigensolver for the operator via its
//!   Fourier-multiplier quadratic form on a torus embedding.
//! * [`stats`] — counting function, Riesz/Cesàro means, heat trace, and the
//!   asymptotic predictions they are verified against.
//!
//! Everything is deterministic: fixed quadrature rules, fixed node layouts,
//! and order-preserving parallel reductions (see [`par`]).

pub mod constants;
pub mod domains;
pub mod galerkin;
pub mod halfline;
pub mod io;
mod nnls;
pub mod par;
pub mod quad;
pub mod specfun;
pub mod stats;

pub use domains::Domain;
pub use galerkin::{BasisKind, BasisSpec, SpectralParams, Spectrum};
pub use quad::{DecayHint, QuadSpec};

/// Internal entry points exposed for white-box testing of numerically
/// delicate components.
#[doc(hidden)]
pub mod test_hooks {
    pub use crate::nnls::nnls;

    /// Table-based `φ_{ω,λ}` evaluation (the path the transform samples use).
    pub fn varphi_table(omega: f64, lambda: f64, u: f64) -> f64 {
        crate::halfline::ModeCtx::new(omega, lambda)
            .unwrap()
            .varphi_fast(u)
    }
}
