//! Split-step evolution from a homoclinic snapshot, with and without the perturbation.
use nls_homoclinic::evolution::{certify_run, evolve_from, EvolutionSpec};
use nls_homoclinic::integrable::{homoclinic_one_pair, DarbouxData};
use nls_homoclinic::Params;

fn main() -> anyhow::Result<()> {
    let p = Params::new(0.8, 1.0, 2.0, 1e-2);
    let d = DarbouxData::new(0.8, 0.0, 0.0)?.even(false);
    let q0 = homoclinic_one_pair(-4.0, 64, &d, &p)?;
    let spec = EvolutionSpec {
        dt: 2.5e-5,
        t_end: 8.0,
        record_stride: 40000,
    };
    for eps in [0.0, p.epsilon] {
        let tr = evolve_from(&q0, -4.0, &spec, &p, eps)?;
        println!("ε = {eps}");
        for (t, q) in tr.times.iter().zip(&tr.states) {
            println!(
                "  t = {t:+.1}: max|q| = {:.6}, ⟨|q|²⟩ = {:.8}",
                q.sup_norm(),
                q.mean_abs2()
            );
        }
        let c = certify_run(&q0, &spec, &p, eps)?;
        println!("  halving change {:.1e}, passed {}", c.halving_h1, c.passed);
    }
    Ok(())
}
