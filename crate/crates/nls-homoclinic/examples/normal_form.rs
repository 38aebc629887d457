//! Quadratic normal-form transform: coefficient residuals, apply and invert.
use nls_homoclinic::field::SpectralField;
use nls_homoclinic::normal_form::{denominator_scan, NormalFormTable};
use nls_homoclinic::Params;
use num_complex::Complex64 as C64;

fn main() -> anyhow::Result<()> {
    let p = Params::new(0.83, 1.0, 2.0, 1e-3);
    let table = NormalFormTable::build(&p, 16)?;
    println!("max coefficient residual {:.2e}", table.max_residual());

    let f = SpectralField::from_fn(64, |x| C64::new(0.02 * x.cos(), 0.01 * (3.0 * x).sin()))?;
    let g = table.apply(&f)?;
    let back = table.invert(&g, 1e-14, 200)?;
    println!(
        "|K(f,f)|₁ = {:.3e}, inversion error {:.1e}",
        (&g - &f).sobolev_norm(1),
        (&back - &f).sobolev_norm(1)
    );

    let omegas: Vec<f64> = (0..=90).map(|i| 0.55 + 0.01 * i as f64).collect();
    let scan = denominator_scan(&p, &omegas, 8)?;
    for (w, q, k, l) in scan.flagged.iter().take(10) {
        println!("vanishing {q} near ω = {w:.4} at (k, l) = ({k}, {l})");
    }
    Ok(())
}
