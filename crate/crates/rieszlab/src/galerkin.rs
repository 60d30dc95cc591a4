//! Rayleigh–Ritz eigensolver for `A_m^Ω = (sqrt(-Δ+m²) - m)_D` through its
//! Fourier-multiplier quadratic form.
//!
//! The domain is embedded in a torus of period `L ≥ 3 × diameter` per axis
//! and the form is assembled by summing the multiplier `ψ_m(|2πk/L|²)`
//! over the torus frequency lattice against the exact transforms of the
//! basis functions:
//!
//! ```text
//! q_m(b_i, b_j) = L^{-d} Σ_k ψ_m(|q_k|²) ĝ_k(b_i) conj(ĝ_k(b_j)),
//! ```
//!
//! For `m > 0` the kernel decays like `e^{-m|x|}`, making the periodization
//! error exponentially small; for `m = 0` the decay is `|x|^{-(d+1)}` and the
//! period is the accuracy knob. Two admissible bases are provided: tensor
//! sines on intervals/rectangles/boxes and tent (piecewise-linear) functions
//! on a grid for general domains, with cells touching the boundary dropped so
//! the trial space is conforming. Indicator bases are not offered at all:
//! their form energy diverges logarithmically (they fall outside `H^{1/2}`).
//!
//! The lattice sum is truncated at ≥ 8x the largest basis frequency per axis
//! and completed with per-axis analytic tails; Rayleigh–Ritz then gives
//! upper bounds for every eigenvalue, which is what the Berezin-type checks
//! downstream rely on.

use crate::domains::{Domain, DomainKind};
use crate::par::maybe_par_map_idx;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GalerkinError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("mass matrix numerically singular (condition > 1e12); refine or change the basis")]
    SingularMass,
    #[error("empty basis: no admissible interior cells; refine the grid")]
    EmptyBasis,
}

/// Scalars shared by every spectral formula: dimension, mass, and the
/// semiclassical parameter used as `μ = h·m` in the two-term expansion.
#[derive(Clone, Copy, Debug)]
pub struct SpectralParams {
    pub d: u32,
    pub m: f64,
    pub h: f64,
}

impl SpectralParams {
    pub fn new(d: u32, m: f64, h: f64) -> Result<Self, GalerkinError> {
        if !(1..=3).contains(&d) {
            return Err(GalerkinError::Invalid("d must be 1, 2, or 3".into()));
        }
        if !(m >= 0.0) {
            return Err(GalerkinError::Invalid("mass m must be >= 0".into()));
        }
        if !(h > 0.0) {
            return Err(GalerkinError::Invalid("h must be > 0".into()));
        }
        Ok(Self { d, m, h })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    TensorSine,
    TentGrid,
}

#[derive(Clone, Debug)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub counts: Vec<usize>,
    pub torus_period: f64,
}

impl BasisSpec {
    pub fn tensor_sine(counts: Vec<usize>, torus_period: f64) -> Self {
        Self {
            kind: BasisKind::TensorSine,
            counts,
            torus_period,
        }
    }

    pub fn tent_grid(counts: Vec<usize>, torus_period: f64) -> Self {
        Self {
            kind: BasisKind::TentGrid,
            counts,
            torus_period,
        }
    }

    fn validate(&self, dom: &Domain) -> Result<(), GalerkinError> {
        let d = dom.dim() as usize;
        if self.counts.len() != d || self.counts.iter().any(|&c| c == 0) {
            return Err(GalerkinError::Invalid(format!(
                "basis counts must give {d} positive entries"
            )));
        }
        if self.torus_period < 3.0 * dom.diameter() {
            return Err(GalerkinError::Invalid(
                "torus period must be at least 3x the domain diameter".into(),
            ));
        }
        if self.kind == BasisKind::TensorSine {
            match dom.kind {
                DomainKind::Interval { .. }
                | DomainKind::Rectangle { .. }
                | DomainKind::Box { .. } => {}
                _ => {
                    return Err(GalerkinError::Invalid(
                        "tensor_sine basis requires an interval, rectangle, or box".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Sorted Rayleigh–Ritz eigenvalues with their provenance.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub domain: Domain,
    pub m: f64,
    pub basis: BasisSpec,
    pub count: usize,
}

fn psi_multiplier(m: f64, q2: f64) -> f64 {
    // ψ_m(q²) = sqrt(q²+m²) - m, cancellation-free.
    if q2 == 0.0 {
        return 0.0;
    }
    q2 / ((q2 + m * m).sqrt() + m)
}

/// Exact transform of the zero-extended sine `sin(nπx/a)` on `[0, a]` at the
/// torus frequency `q = 2πk/L`; returns (re, im).
fn sine_transform(n: usize, a: f64, q: f64) -> (f64, f64) {
    let omega = n as f64 * PI / a;
    if omega == q {
        return (0.0, -0.5 * a);
    }
    let phase = q * a - n as f64 * PI;
    let half = 0.5 * phase;
    let num_re = 2.0 * half.sin() * half.sin();
    let num_im = phase.sin();
    let denom = (omega - q) * (omega + q);
    (num_re * omega / denom, num_im * omega / denom)
}

struct SineAxis {
    len: f64,
    count: usize,
    /// transform tables [k][n], k = 0..=kmax
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    kmax: usize,
}

impl SineAxis {
    fn build(len: f64, count: usize, torus: f64, lattice_factor: usize) -> Self {
        // lattice cutoff at >= factor x the largest basis frequency
        let kmax =
            ((lattice_factor as f64 * count as f64 * torus / (2.0 * len)).ceil() as usize).max(16);
        let mut re = Vec::with_capacity(kmax + 1);
        let mut im = Vec::with_capacity(kmax + 1);
        for k in 0..=kmax {
            let q = 2.0 * PI * k as f64 / torus;
            let mut rk = Vec::with_capacity(count);
            let mut ik = Vec::with_capacity(count);
            for n in 1..=count {
                let (r, i) = sine_transform(n, len, q);
                rk.push(r);
                ik.push(i);
            }
            re.push(rk);
            im.push(ik);
        }
        Self {
            len,
            count,
            re,
            im,
            kmax,
        }
    }

    /// `Re[ĝ_k(n) conj(ĝ_k(m))]`, doubled for k > 0 (conjugate lattice pair).
    fn pair_re(&self, k: usize, n: usize, m: usize) -> f64 {
        let v = self.re[k][n] * self.re[k][m] + self.im[k][n] * self.im[k][m];
        if k == 0 {
            v
        } else {
            2.0 * v
        }
    }

    /// 1D analytic tail `Σ_{|k| > kmax} ψ_m(q²) ĝ(n) conj(ĝ(m))` by extended
    /// summation plus the averaged-oscillation remainder.
    fn tail(&self, mass: f64, torus: f64, n: usize, m: usize) -> f64 {
        let k_ext = 16 * self.kmax;
        let mut acc = 0.0;
        for k in self.kmax + 1..=k_ext {
            let q = 2.0 * PI * k as f64 / torus;
            let (rn, i_n) = sine_transform(n + 1, self.len, q);
            let (rm, i_m) = sine_transform(m + 1, self.len, q);
            acc += 2.0 * psi_multiplier(mass, q * q) * (rn * rm + i_n * i_m);
        }
        // Beyond k_ext the numerators average to 2 for equal parity (0
        // otherwise) and the summand behaves like 2 ω_n ω_m q^{-3}.
        if (n + m) % 2 == 0 {
            let omega_n = (n + 1) as f64 * PI / self.len;
            let omega_m = (m + 1) as f64 * PI / self.len;
            let scale = (torus / (2.0 * PI)).powi(3);
            acc += 2.0 * omega_n * omega_m * scale / (k_ext as f64 * k_ext as f64);
        }
        acc
    }
}

fn tri_index(n: usize, m: usize) -> usize {
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    hi * (hi + 1) / 2 + lo
}

const LATTICE_FACTOR: usize = 8;

fn assemble_sine(
    dom: &Domain,
    m: f64,
    basis: &BasisSpec,
) -> Result<(DMatrix<f64>, DMatrix<f64>), GalerkinError> {
    let lens: Vec<f64> = match dom.kind {
        DomainKind::Interval { length } => vec![length],
        DomainKind::Rectangle { w, h } => vec![w, h],
        DomainKind::Box { w, h, depth } => vec![w, h, depth],
        _ => unreachable!("validated"),
    };
    let torus = basis.torus_period;
    let axes: Vec<SineAxis> = lens
        .iter()
        .zip(basis.counts.iter())
        .map(|(&len, &c)| SineAxis::build(len, c, torus, LATTICE_FACTOR))
        .collect();
    let n_total: usize = basis.counts.iter().product();

    // The same-interval sines are exactly orthogonal: diagonal mass.
    let mass_val: f64 = lens.iter().map(|l| l / 2.0).product();
    let mass = DMatrix::from_diagonal(&DVector::from_element(n_total, mass_val));

    let form = match axes.len() {
        1 => {
            let ax = &axes[0];
            let mut f = DMatrix::zeros(n_total, n_total);
            for n in 0..ax.count {
                for mm in n..ax.count {
                    let mut acc = 0.0;
                    for k in 0..=ax.kmax {
                        let q = 2.0 * PI * k as f64 / torus;
                        acc += psi_multiplier(m, q * q) * ax.pair_re(k, n, mm);
                    }
                    acc += ax.tail(m, torus, n, mm);
                    f[(n, mm)] = acc / torus;
                    f[(mm, n)] = acc / torus;
                }
            }
            f
        }
        2 => assemble_sine_2d(&axes, m, torus),
        3 => assemble_sine_3d(&axes, m, torus),
        _ => unreachable!(),
    };
    Ok((form, mass))
}

fn assemble_sine_2d(axes: &[SineAxis], m: f64, torus: f64) -> DMatrix<f64> {
    let (a1, a2) = (&axes[0], &axes[1]);
    let (n1, n2) = (a1.count, a2.count);
    let pairs1 = n1 * (n1 + 1) / 2;
    let pairs2 = n2 * (n2 + 1) / 2;

    // Stage 1: T[k1][pair2] = Σ_{k2 ∈ Z} ψ(q1²+q2²) (paired transforms).
    let t_rows = maybe_par_map_idx(a1.kmax + 1, |k1| {
        let q1 = 2.0 * PI * k1 as f64 / torus;
        let mut row = vec![0.0f64; pairs2];
        for k2 in 0..=a2.kmax {
            let q2 = 2.0 * PI * k2 as f64 / torus;
            let psi = psi_multiplier(m, q1 * q1 + q2 * q2);
            for n in 0..n2 {
                for mm in n..n2 {
                    row[tri_index(n, mm)] += psi * a2.pair_re(k2, n, mm);
                }
            }
        }
        row
    });
    // Stage 2: F_pairs = R1 · T as a real matrix product.
    let mut r1 = DMatrix::zeros(pairs1, a1.kmax + 1);
    for n in 0..n1 {
        for mm in n..n1 {
            let row = tri_index(n, mm);
            for k1 in 0..=a1.kmax {
                r1[(row, k1)] = a1.pair_re(k1, n, mm);
            }
        }
    }
    let mut t = DMatrix::zeros(a1.kmax + 1, pairs2);
    for (k1, row) in t_rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t[(k1, j)] = v;
        }
    }
    let f_pairs = &r1 * &t;

    // Per-axis analytic tails, weighted by the exact mass of the other axis.
    let mut tail1 = vec![0.0f64; pairs1];
    for n in 0..n1 {
        for mm in n..n1 {
            tail1[tri_index(n, mm)] = a1.tail(m, torus, n, mm);
        }
    }
    let mut tail2 = vec![0.0f64; pairs2];
    for n in 0..n2 {
        for mm in n..n2 {
            tail2[tri_index(n, mm)] = a2.tail(m, torus, n, mm);
        }
    }
    let (m1, m2) = (a1.len / 2.0, a2.len / 2.0);

    let n_total = n1 * n2;
    let mut f = DMatrix::zeros(n_total, n_total);
    let l2 = torus * torus;
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let i = i1 * n2 + i2;
            for j1 in 0..n1 {
                for j2 in 0..n2 {
                    let j = j1 * n2 + j2;
                    if j < i {
                        continue;
                    }
                    let mut v = f_pairs[(tri_index(i1, j1), tri_index(i2, j2))] / l2;
                    // tail regions |k1| > K (Σ_{k2 ∈ Z} collapses to L·mass)
                    if i2 == j2 {
                        v += tail1[tri_index(i1, j1)] * m2 / torus;
                    }
                    if i1 == j1 {
                        v += tail2[tri_index(i2, j2)] * m1 / torus;
                    }
                    f[(i, j)] = v;
                    f[(j, i)] = v;
                }
            }
        }
    }
    f
}

fn assemble_sine_3d(axes: &[SineAxis], m: f64, torus: f64) -> DMatrix<f64> {
    let (a1, a2, a3) = (&axes[0], &axes[1], &axes[2]);
    let (n1, n2, n3) = (a1.count, a2.count, a3.count);
    let pairs = |n: usize| n * (n + 1) / 2;
    let (p2, p3) = (pairs(n2), pairs(n3));

    // Stage 1+2 fused per k1: V[k1][pair2 * pair3].
    let v: Vec<Vec<f64>> = maybe_par_map_idx(a1.kmax + 1, |k1| {
        let q1 = 2.0 * PI * k1 as f64 / torus;
        let mut out = vec![0.0f64; p2 * p3];
        for k2 in 0..=a2.kmax {
            let q2 = 2.0 * PI * k2 as f64 / torus;
            let mut inner = vec![0.0f64; p3];
            for k3 in 0..=a3.kmax {
                let q3 = 2.0 * PI * k3 as f64 / torus;
                let psi = psi_multiplier(m, q1 * q1 + q2 * q2 + q3 * q3);
                for n in 0..n3 {
                    for mm in n..n3 {
                        inner[tri_index(n, mm)] += psi * a3.pair_re(k3, n, mm);
                    }
                }
            }
            for n in 0..n2 {
                for mm in n..n2 {
                    let w2 = a2.pair_re(k2, n, mm);
                    let base = tri_index(n, mm) * p3;
                    for (j, &uv) in inner.iter().enumerate() {
                        out[base + j] += w2 * uv;
                    }
                }
            }
        }
        out
    });

    let n_total = n1 * n2 * n3;
    let l3 = torus * torus * torus;
    let mut f = DMatrix::zeros(n_total, n_total);
    let idx = |i1: usize, i2: usize, i3: usize| (i1 * n2 + i2) * n3 + i3;
    for i1 in 0..n1 {
        for j1 in i1..n1 {
            let mut block = vec![0.0f64; p2 * p3];
            for (k1, vk) in v.iter().enumerate() {
                let w1 = a1.pair_re(k1, i1, j1);
                if w1 == 0.0 {
                    continue;
                }
                for (j, &vv) in vk.iter().enumerate() {
                    block[j] += w1 * vv;
                }
            }
            for i2 in 0..n2 {
                for j2 in 0..n2 {
                    for i3 in 0..n3 {
                        for j3 in 0..n3 {
                            let (i, j) = (idx(i1, i2, i3), idx(j1, j2, j3));
                            if i <= j {
                                let val = block[tri_index(i2, j2) * p3 + tri_index(i3, j3)] / l3;
                                f[(i, j)] += val;
                                if i != j {
                                    f[(j, i)] += val;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // Per-axis tails; the two collapsed axes contribute their exact mass.
    let (m1, m2, m3) = (a1.len / 2.0, a2.len / 2.0, a3.len / 2.0);
    let mut add_sym = |i: usize, j: usize, v: f64| {
        f[(i, j)] += v;
        if i != j {
            f[(j, i)] += v;
        }
    };
    for i1 in 0..n1 {
        for j1 in i1..n1 {
            let t1 = a1.tail(m, torus, i1, j1) * m2 * m3 / (torus * torus);
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    add_sym(idx(i1, i2, i3), idx(j1, i2, i3), t1);
                }
            }
        }
    }
    for i2 in 0..n2 {
        for j2 in i2..n2 {
            let t2 = a2.tail(m, torus, i2, j2) * m1 * m3 / (torus * torus);
            for i1 in 0..n1 {
                for i3 in 0..n3 {
                    add_sym(idx(i1, i2, i3), idx(i1, j2, i3), t2);
                }
            }
        }
    }
    for i3 in 0..n3 {
        for j3 in i3..n3 {
            let t3 = a3.tail(m, torus, i3, j3) * m1 * m2 / (torus * torus);
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    add_sym(idx(i1, i2, i3), idx(i1, i2, j3), t3);
                }
            }
        }
    }
    f
}

// ---- tent-grid path --------------------------------------------------------

fn segment_intersects_rect(a: (f64, f64), b: (f64, f64), lo: (f64, f64), hi: (f64, f64)) -> bool {
    // Liang-Barsky clip test.
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let clip = |p: f64, q: f64, t0: &mut f64, t1: &mut f64| -> bool {
        if p == 0.0 {
            return q >= 0.0;
        }
        let r = q / p;
        if p < 0.0 {
            if r > *t1 {
                return false;
            }
            if r > *t0 {
                *t0 = r;
            }
        } else {
            if r < *t0 {
                return false;
            }
            if r < *t1 {
                *t1 = r;
            }
        }
        true
    };
    clip(-dx, a.0 - lo.0, &mut t0, &mut t1)
        && clip(dx, hi.0 - a.0, &mut t0, &mut t1)
        && clip(-dy, a.1 - lo.1, &mut t0, &mut t1)
        && clip(dy, hi.1 - a.1, &mut t0, &mut t1)
        && t0 <= t1
}

fn cell_inside(dom: &Domain, lo: (f64, f64), hi: (f64, f64)) -> bool {
    let probes = [
        [lo.0, lo.1],
        [hi.0, lo.1],
        [lo.0, hi.1],
        [hi.0, hi.1],
        [0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1)],
    ];
    if probes.iter().any(|c| !dom.contains(c)) {
        return false;
    }
    if let DomainKind::Polygon { vertices } = &dom.kind {
        let n = vertices.len();
        for i in 0..n {
            if segment_intersects_rect(vertices[i], vertices[(i + 1) % n], lo, hi) {
                return false;
            }
        }
    }
    true
}

fn assemble_tent(
    dom: &Domain,
    m: f64,
    basis: &BasisSpec,
) -> Result<(DMatrix<f64>, DMatrix<f64>), GalerkinError> {
    if dom.dim() != 2 {
        return Err(GalerkinError::Invalid(
            "tent_grid basis is implemented for planar domains".into(),
        ));
    }
    let torus = basis.torus_period;
    let (c1, c2) = (basis.counts[0], basis.counts[1]);
    let bb = &dom.bounding_box;
    let d1 = (bb.hi[0] - bb.lo[0]) / c1 as f64;
    let d2 = (bb.hi[1] - bb.lo[1]) / c2 as f64;

    // Admissible cells, then interior nodes whose 4 surrounding cells are all
    // inside the domain (conforming subset: straddling cells dropped).
    let mut cells = vec![false; c1 * c2];
    for i in 0..c1 {
        for j in 0..c2 {
            let lo = (bb.lo[0] + i as f64 * d1, bb.lo[1] + j as f64 * d2);
            let hi = (lo.0 + d1, lo.1 + d2);
            cells[i * c2 + j] = cell_inside(dom, lo, hi);
        }
    }
    let mut nodes = Vec::new();
    for i in 1..c1 {
        for j in 1..c2 {
            let ok = cells[(i - 1) * c2 + (j - 1)]
                && cells[(i - 1) * c2 + j]
                && cells[i * c2 + (j - 1)]
                && cells[i * c2 + j];
            if ok {
                nodes.push((i, j));
            }
        }
    }
    if nodes.is_empty() {
        return Err(GalerkinError::EmptyBasis);
    }

    // Translation-invariant kernel κ(Δ) on integer offsets; the tent
    // transform factorizes per axis as δ sinc²(qδ/2) e^{-iqp}.
    let kf = |c: usize, side: f64| {
        ((LATTICE_FACTOR as f64 * c as f64 * torus / (2.0 * side)).ceil() as usize).max(16)
    };
    let kmax1 = kf(c1, bb.hi[0] - bb.lo[0]);
    let kmax2 = kf(c2, bb.hi[1] - bb.lo[1]);
    let sinc2 = |q: f64, delta: f64| {
        if q == 0.0 {
            delta
        } else {
            let z = 0.5 * q * delta;
            delta * (z.sin() / z).powi(2)
        }
    };
    let u_rows = maybe_par_map_idx(kmax1 + 1, |k1| {
        let q1 = 2.0 * PI * k1 as f64 / torus;
        let s1 = sinc2(q1, d1);
        let mut row = vec![0.0f64; c2 + 1];
        for k2 in 0..=kmax2 {
            let q2 = 2.0 * PI * k2 as f64 / torus;
            let s2 = sinc2(q2, d2);
            let psi = psi_multiplier(m, q1 * q1 + q2 * q2);
            let mult = if k2 == 0 { 1.0 } else { 2.0 };
            let w = psi * s2 * s2 * mult * s1 * s1;
            for (dj, r) in row.iter_mut().enumerate() {
                *r += w * (q2 * dj as f64 * d2).cos();
            }
        }
        row
    });
    let mut kappa = vec![vec![0.0f64; c2 + 1]; c1 + 1];
    for (k1, row) in u_rows.iter().enumerate() {
        let q1 = 2.0 * PI * k1 as f64 / torus;
        let mult = if k1 == 0 { 1.0 } else { 2.0 };
        for (di, krow) in kappa.iter_mut().enumerate() {
            let c = mult * (q1 * di as f64 * d1).cos();
            for (dj, kv) in krow.iter_mut().enumerate() {
                *kv += c * row[dj];
            }
        }
    }
    // Per-axis tails; the collapsed axis contributes its exact mass overlap.
    let mass_1d = |delta: f64, off: usize| match off {
        0 => 2.0 * delta / 3.0,
        1 => delta / 6.0,
        _ => 0.0,
    };
    let tail_axis = |kmax: usize, delta: f64, off: usize| {
        let mut acc = 0.0;
        for k in kmax + 1..=16 * kmax {
            let q = 2.0 * PI * k as f64 / torus;
            let s = sinc2(q, delta);
            acc += 2.0 * psi_multiplier(m, q * q) * s * s * (q * off as f64 * delta).cos();
        }
        acc
    };
    for di in 0..=c1 {
        for dj in 0..=c2 {
            if dj <= 1 {
                kappa[di][dj] += tail_axis(kmax1, d1, di) * mass_1d(d2, dj) * torus;
            }
            if di <= 1 {
                kappa[di][dj] += tail_axis(kmax2, d2, dj) * mass_1d(d1, di) * torus;
            }
        }
    }
    let l2 = torus * torus;

    let n = nodes.len();
    let mut form = DMatrix::zeros(n, n);
    let mut mass = DMatrix::zeros(n, n);
    for (i, &(pi, pj)) in nodes.iter().enumerate() {
        for (j, &(qi, qj)) in nodes.iter().enumerate().skip(i) {
            let di = pi.abs_diff(qi);
            let dj = pj.abs_diff(qj);
            let v = kappa[di][dj] / l2;
            form[(i, j)] = v;
            form[(j, i)] = v;
            let mv = mass_1d(d1, di) * mass_1d(d2, dj);
            if mv != 0.0 {
                mass[(i, j)] = mv;
                mass[(j, i)] = mv;
            }
        }
    }
    Ok((form, mass))
}

/// Assembles the multiplier form and the exact `L²` mass matrix for the
/// requested basis; both symmetric, the form positive definite.
pub fn assemble_form(
    dom: &Domain,
    m: f64,
    basis: &BasisSpec,
) -> Result<(DMatrix<f64>, DMatrix<f64>), GalerkinError> {
    if !(m >= 0.0) {
        return Err(GalerkinError::Invalid("mass m must be >= 0".into()));
    }
    basis.validate(dom)?;
    match basis.kind {
        BasisKind::TensorSine => assemble_sine(dom, m, basis),
        BasisKind::TentGrid => assemble_tent(dom, m, basis),
    }
}

/// Smallest `k` generalized eigenvalues of `F v = λ M v`, ascending.
pub fn solve_spectrum(
    form: &DMatrix<f64>,
    mass: &DMatrix<f64>,
    k: usize,
) -> Result<Vec<f64>, GalerkinError> {
    let n = form.nrows();
    if k == 0 || k > n {
        return Err(GalerkinError::Invalid(format!(
            "requested {k} eigenvalues from a basis of size {n}"
        )));
    }
    // Standard form via the Cholesky factor of the mass matrix.
    let chol = nalgebra::Cholesky::new(mass.clone()).ok_or(GalerkinError::SingularMass)?;
    let l = chol.l();
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for i in 0..n {
        dmin = dmin.min(l[(i, i)]);
        dmax = dmax.max(l[(i, i)]);
    }
    if (dmax / dmin).powi(2) > 1e12 {
        return Err(GalerkinError::SingularMass);
    }
    // C = L^{-1} F L^{-T}
    let mut c = form.clone();
    l.solve_lower_triangular_mut(&mut c);
    let mut ct = c.transpose();
    l.solve_lower_triangular_mut(&mut ct);
    let sym = 0.5 * (&ct + ct.transpose());
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.truncate(k);
    Ok(vals)
}

/// Composition: assemble the form for `(Ω, m)` and return the `k` smallest
/// Rayleigh–Ritz eigenvalues as a [`Spectrum`].
pub fn spectrum_for(
    dom: &Domain,
    params: &SpectralParams,
    basis: &BasisSpec,
    k: usize,
) -> Result<Spectrum, GalerkinError> {
    if params.d != dom.dim() {
        return Err(GalerkinError::Invalid(
            "params.d must match the domain dimension".into(),
        ));
    }
    let (form, mass) = assemble_form(dom, params.m, basis)?;
    let eigenvalues = solve_spectrum(&form, &mass, k.min(form.nrows()))?;
    Ok(Spectrum {
        count: eigenvalues.len(),
        eigenvalues,
        domain: dom.clone(),
        m: params.m,
        basis: basis.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_interval_basis(n: usize) -> (Domain, BasisSpec) {
        let dom = Domain::interval(1.0).unwrap();
        let basis = BasisSpec::tensor_sine(vec![n], 3.0);
        (dom, basis)
    }

    #[test]
    fn form_is_symmetric_positive() {
        let (dom, basis) = unit_interval_basis(12);
        let (f, m) = assemble_form(&dom, 0.0, &basis).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert!((f[(i, j)] - f[(j, i)]).abs() <= 1e-12 * f[(i, i)].abs().max(1.0));
            }
            assert!(f[(i, i)] > 0.0);
            assert!(m[(i, i)] > 0.0);
        }
        assert!(nalgebra::Cholesky::new(f).is_some());
    }

    #[test]
    fn large_mass_limit_matches_laplacian() {
        // ψ_m(t) ≈ t/(2m) for large m: diagonal entries approach the exact
        // sine Laplacian form (nπ/a)² (a/2) / (2m) on the interval.
        let (dom, basis) = unit_interval_basis(8);
        let mass = 100.0;
        let (f, _) = assemble_form(&dom, mass, &basis).unwrap();
        for n in 1..=8 {
            let laplace = (n as f64 * PI).powi(2) * 0.5;
            let expect = laplace / (2.0 * mass);
            let got = f[(n - 1, n - 1)];
            assert!(
                (got - expect).abs() <= 0.05 * expect,
                "n={n}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn multiplier_monotone_in_mass() {
        let (dom, basis) = unit_interval_basis(10);
        let (f0, _) = assemble_form(&dom, 0.0, &basis).unwrap();
        let (f1, _) = assemble_form(&dom, 1.0, &basis).unwrap();
        for n in 0..10 {
            assert!(f1[(n, n)] < f0[(n, n)]);
        }
    }

    #[test]
    fn solve_diagonal_toy() {
        let form = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let mass = DMatrix::identity(3, 3);
        let vals = solve_spectrum(&form, &mass, 2).unwrap();
        assert_relative_eq!(vals[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(vals[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn interval_self_convergence() {
        // λ_1 from N=64 within 2% of the N=128 value (interval of length π).
        let dom = Domain::interval(PI).unwrap();
        let params = SpectralParams::new(1, 0.0, 1.0).unwrap();
        let b64 = BasisSpec::tensor_sine(vec![64], 3.0 * PI);
        let b128 = BasisSpec::tensor_sine(vec![128], 3.0 * PI);
        let s64 = spectrum_for(&dom, &params, &b64, 6).unwrap();
        let s128 = spectrum_for(&dom, &params, &b128, 6).unwrap();
        for i in 0..6 {
            let rel = (s64.eigenvalues[i] - s128.eigenvalues[i]) / s128.eigenvalues[i];
            assert!(rel >= -1e-10, "refinement must not increase eigenvalues");
            assert!(rel < 0.02, "eigenvalue {i} off by {rel}");
        }
    }

    #[test]
    fn rayleigh_ritz_monotone_refinement() {
        let dom = Domain::interval(1.0).unwrap();
        let params = SpectralParams::new(1, 0.5, 1.0).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        for n in [16usize, 32, 64] {
            let b = BasisSpec::tensor_sine(vec![n], 3.0);
            let s = spectrum_for(&dom, &params, &b, 8).unwrap();
            if let Some(p) = prev {
                for i in 0..8 {
                    assert!(s.eigenvalues[i] <= p[i] * (1.0 + 1e-12));
                }
            }
            prev = Some(s.eigenvalues);
        }
    }

    #[test]
    fn eigenvalues_decrease_with_mass() {
        let dom = Domain::rectangle(1.0, 1.0).unwrap();
        let basis = BasisSpec::tensor_sine(vec![10, 10], 3.0 * 2.0f64.sqrt());
        let p0 = SpectralParams::new(2, 0.0, 1.0).unwrap();
        let p1 = SpectralParams::new(2, 1.0, 1.0).unwrap();
        let s0 = spectrum_for(&dom, &p0, &basis, 20).unwrap();
        let s1 = spectrum_for(&dom, &p1, &basis, 20).unwrap();
        for i in 0..20 {
            assert!(s1.eigenvalues[i] < s0.eigenvalues[i]);
        }
    }

    #[test]
    fn domain_monotonicity() {
        // Ω₁ ⊂ Ω₂ implies λ_n(Ω₁) ≥ λ_n(Ω₂).
        let small = Domain::rectangle(0.8, 0.8).unwrap();
        let big = Domain::rectangle(1.0, 1.0).unwrap();
        let params = SpectralParams::new(2, 0.0, 1.0).unwrap();
        let torus = 3.0 * 2.0f64.sqrt();
        let bs = BasisSpec::tensor_sine(vec![14, 14], torus);
        let ss = spectrum_for(&small, &params, &bs, 25).unwrap();
        let sb = spectrum_for(&big, &params, &bs, 25).unwrap();
        for i in 0..25 {
            assert!(ss.eigenvalues[i] >= sb.eigenvalues[i] * (1.0 - 1e-9));
        }
    }

    #[test]
    fn square_symmetry_degeneracies() {
        let dom = Domain::rectangle(1.0, 1.0).unwrap();
        let params = SpectralParams::new(2, 0.0, 1.0).unwrap();
        let basis = BasisSpec::tensor_sine(vec![16, 16], 3.0 * 2.0f64.sqrt());
        let s = spectrum_for(&dom, &params, &basis, 60).unwrap();
        // the swap symmetry of the square pairs most modes
        let mut clustered = 0;
        let v = &s.eigenvalues;
        for i in 0..v.len() {
            let near = (i > 0 && (v[i] - v[i - 1]).abs() <= 1e-6 * v[i])
                || (i + 1 < v.len() && (v[i + 1] - v[i]).abs() <= 1e-6 * v[i]);
            if near {
                clustered += 1;
            }
        }
        assert!(clustered >= v.len() / 2, "only {clustered} clustered modes");
    }

    #[test]
    fn tent_grid_on_disk() {
        let dom = Domain::disk(1.0).unwrap();
        let params = SpectralParams::new(2, 1.0, 1.0).unwrap();
        let basis = BasisSpec::tent_grid(vec![24, 24], 6.5);
        let s = spectrum_for(&dom, &params, &basis, 12).unwrap();
        assert!(s.eigenvalues[0] > 0.0);
        for w in s.eigenvalues.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn invalid_setups_rejected() {
        let disk = Domain::disk(1.0).unwrap();
        assert!(assemble_form(&disk, 0.0, &BasisSpec::tensor_sine(vec![4, 4], 7.0)).is_err());
        let dom = Domain::rectangle(1.0, 1.0).unwrap();
        // torus too small
        assert!(assemble_form(&dom, 0.0, &BasisSpec::tensor_sine(vec![4, 4], 2.0)).is_err());
        // wrong count arity
        assert!(assemble_form(&dom, 0.0, &BasisSpec::tensor_sine(vec![4], 6.0)).is_err());
    }
}
