// (1) quantization-heuristic Lambda2 (G-free): per channel
//     J*(nu) = Psi(0)/2 - (1/pi) int_0^L th(l) dE(l),  E = sqrt(1+l^2)
//     Lambda2* = (1/pi) int_0^1 nu J*(nu) dnu
// (2) careful eigenvalue extraction with c + b/l nuisance fit, m=0 and m=1
use rieszlab::constants::lambda1;
use rieszlab::domains::Domain;
use rieszlab::galerkin::*;
use rieszlab::halfline::phase_shift;
use rieszlab::quad::{self, QuadSpec};
use std::f64::consts::PI;

fn main() {
    let spec = QuadSpec::new(1e-11, 1e-10).with_subdivisions(4000);
    let q_of_nu = |nu: f64| -> f64 {
        let big = (1.0 / (nu * nu) - 1.0).max(0.0).sqrt();
        if big == 0.0 { return 0.0; }
        quad::integrate(|l| {
            let th = phase_shift(0.0, l).unwrap();
            th * l / (1.0 + l * l).sqrt()
        }, 0.0, big, &spec).unwrap().value / PI
    };
    let spec2 = QuadSpec::new(1e-9, 1e-8).with_subdivisions(3000);
    let l2_star = quad::integrate(|nu| {
        let psi0 = (1.0 - nu) / nu;
        nu * (0.5 * psi0 - q_of_nu(nu))
    }, 0.0, 1.0, &spec2).unwrap().value / PI;
    println!("quantization-heuristic Lambda2*(2,0) = {l2_star:+.6e}");

    // (2) extraction
    for m in [0.0f64, 1.0] {
        let dom = Domain::rectangle(1.0, 1.0).unwrap();
        let params = SpectralParams::new(2, m, 1.0).unwrap();
        let basis = BasisSpec::tensor_sine(vec![24, 24], 3.0 * 2.0f64.sqrt());
        let s = spectrum_for(&dom, &params, &basis, 240).unwrap();
        let l1v = lambda1(2, 0.0).unwrap();
        let r = |l: f64| -> f64 { s.eigenvalues.iter().map(|&e| (l - e).max(0.0)).sum() };
        // least squares y = c + b/l over window [lambda_40, lambda_140]
        let (lo, hi) = (s.eigenvalues[40], s.eigenvalues[140]);
        let n = 60;
        let (mut s1, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let l = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let y = (l1v * l * l * l - r(l)) / (l * l);
            let x = 1.0 / l;
            s1 += 1.0; sx += x; sxx += x * x; sy += y; sxy += x * y;
        }
        let det = s1 * sxx - sx * sx;
        let c = (sxx * sy - sx * sxy) / det;
        let b = (s1 * sxy - sx * sy) / det;
        println!("m={m}: extracted constant c = {c:+.5e} (slope {b:+.3e}); c should be 4*L2 - m/(4pi) = 4*L2 {}", 
                 if m > 0.0 { format!("- {:.5e}", m/(4.0*PI)) } else { String::new() });
    }
}
