//! κ(ω) from the one-pair Melnikov integrals, with quadrature certificates.
use nls_homoclinic::melnikov::{kappa_curve, QuadratureSpec};

fn main() {
    let omegas: Vec<f64> = (0..9).map(|i| 0.55 + 0.05 * i as f64).collect();
    println!("omega,kappa,alpha,estimated_error");
    for r in kappa_curve(&omegas, &QuadratureSpec::default()) {
        match (r.kappa, r.quadrature) {
            (Some(k), Some(q)) => println!(
                "{:.2},{k:.10},{:.10},{:.1e}",
                r.omega,
                1.0 / k,
                q.estimated_error()
            ),
            _ => println!("{:.2},,,{}", r.omega, r.flag.unwrap_or_default()),
        }
    }
}
