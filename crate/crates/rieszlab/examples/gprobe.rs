use rieszlab::domains::Domain;
use rieszlab::galerkin::*;
fn main() {
    let dom = Domain::interval(1.0).unwrap();
    let basis = BasisSpec::tensor_sine(vec![12], 3.0);
    let (f, _m) = assemble_form(&dom, 0.0, &basis).unwrap();
    let mut worst = (0usize, 0usize, 0.0f64);
    for i in 0..12 { for j in 0..12 {
        let d = (f[(i,j)] - f[(j,i)]).abs();
        if d > worst.2 { worst = (i,j,d); }
    }}
    println!("worst asym: {:?}  f[ij]={:.6e} f[ji]={:.6e}", worst, f[(worst.0,worst.1)], f[(worst.1,worst.0)]);
    for i in 0..4 { for j in 0..4 { print!("{:+.4e} ", f[(i,j)]); } println!(); }
}
