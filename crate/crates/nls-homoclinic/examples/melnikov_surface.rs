//! Two-pair Melnikov conditions: (χ̃, α, β, γ) over (ω, Δρ).
use nls_homoclinic::melnikov::{surface_two_pairs, QuadratureSpec};

fn main() {
    let omegas = [1.1, 1.2, 1.3, 1.4];
    let drs = [0.5, 1.0, 1.5];
    println!("omega,delta_rho,chi_tilde,alpha,beta,gamma,flag");
    for r in surface_two_pairs(&omegas, &drs, &QuadratureSpec::default()) {
        let f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.8}"));
        println!(
            "{},{},{},{},{},{},{}",
            r.omega,
            r.delta_rho.unwrap_or(f64::NAN),
            f(r.chi_tilde),
            f(r.alpha),
            f(r.beta_out),
            f(r.gamma),
            r.flag.unwrap_or_default()
        );
    }
}
