//! Closed-form homoclinic orbits: amplitude profile in time and the phase shift across the orbit.
use nls_homoclinic::integrable::{
    asymptotic_phase, homoclinic_one_pair, homoclinic_two_pair, DarbouxData,
};
use nls_homoclinic::Params;

fn main() -> anyhow::Result<()> {
    let p = Params::new(0.8, 0.0, 0.0, 0.0);
    let d = DarbouxData::new(0.8, 0.0, 0.0)?.even(false);
    println!("one pair, a = 0.8: σ = {:.6}, ν = {:.6}", d.sigma, d.nu);
    for t in [-6.0, -3.0, 0.0, 3.0, 6.0] {
        let q = homoclinic_one_pair(t, 128, &d, &p)?;
        println!(
            "  t = {t:+.1}: max|q| = {:.6}, |⟨q⟩| = {:.6}",
            q.sup_norm(),
            q.mean().norm()
        );
    }
    println!(
        "  phase gain {:.6}",
        asymptotic_phase(&d, 1, true) / asymptotic_phase(&d, 1, false)
    );

    let p2 = Params::new(1.2, 0.0, 0.0, 0.0);
    let d2 = DarbouxData::new(1.2, 0.0, 0.0)?
        .even(false)
        .with_second(0.5, 0.0)?
        .even_hat(false)?;
    println!("two pairs, a = 1.2");
    for t in [-6.0, 0.0, 6.0] {
        let q = homoclinic_two_pair(t, 128, &d2, &p2)?;
        println!("  t = {t:+.1}: max|q| = {:.6}", q.sup_norm());
    }
    Ok(())
}
