//! The singular level set of the leading-order resonance Hamiltonian.
use nls_homoclinic::plane::{fish_hamiltonian, fish_head, fish_polyline};
use nls_homoclinic::Params;

fn main() -> anyhow::Result<()> {
    let p = Params::new(0.8, 1.0, 2.0, 1e-3);
    let ts = p.theta_star()?;
    let head = fish_head(&p)?;
    println!(
        "θ_* = {ts:.10}, θ̂ = {head:.10}, level {:.10}",
        fish_hamiltonian(0.0, ts, &p)
    );
    println!("theta,j_upper,j_lower");
    for (th, u, s) in fish_polyline(&p, 21, 0.0)? {
        println!("{th:.6},{u:.6},{s:.6}");
    }
    Ok(())
}
