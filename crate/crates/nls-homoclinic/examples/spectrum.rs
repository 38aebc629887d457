//! Eigenvalues of L_ε and the split of a perturbation into unstable directions.
use nls_homoclinic::field::SpectralField;
use nls_homoclinic::linearization::{eigen_split, spectrum_l_epsilon};
use nls_homoclinic::Params;
use num_complex::Complex64 as C64;

fn main() -> anyhow::Result<()> {
    for w in [0.8, 1.2] {
        let p = Params::new(w, 1.0, 2.0, 1e-2);
        println!("ω = {w}");
        for s in spectrum_l_epsilon(&p, 4)? {
            println!(
                "  k = {}: μ± = {:.6} / {:.6}{}",
                s.k,
                s.mu_plus,
                s.mu_minus,
                if s.real_pair { "  (real)" } else { "" }
            );
        }
        let g = SpectralField::from_fn(64, |x| {
            C64::new(x.cos() + 0.3 * (2.0 * x).sin(), 0.1 * x.cos())
        })?;
        let split = eigen_split(&g, &p)?;
        println!(
            "  ξ⁺ = {:?}, ξ⁻ = {:?}, |h|∞ = {:.4}",
            split.xi_plus,
            split.xi_minus,
            split.h.sup_norm()
        );
    }
    Ok(())
}
