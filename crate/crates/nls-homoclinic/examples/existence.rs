//! Roots of the existence conditions (Melnikov zeros plus vanishing second distance).
use nls_homoclinic::melnikov::{
    melnikov_one_pair, melnikov_two_pairs, solve_one_pair, solve_two_pair, QuadratureSpec,
};
use nls_homoclinic::Params;

fn main() -> anyhow::Result<()> {
    let quad = QuadratureSpec::default();
    for (w, beta) in [(0.7, 2.0), (0.8, 2.5), (0.9, 3.0)] {
        let mel = melnikov_one_pair(&Params::new(w, 0.0, 0.0, 0.0), &quad)?;
        let s = solve_one_pair(&mel, beta)?;
        println!(
            "one pair ω = {w}: α = {:.10}, γ = {:.10}, residual {:.1e}, condition {:.1e}",
            s.alpha,
            s.gamma,
            s.max_residual(),
            s.condition
        );
    }
    let mel = melnikov_two_pairs(&Params::new(1.2, 0.0, 0.0, 0.0), 1.0, &quad)?;
    let s = solve_two_pair(&mel)?;
    println!(
        "two pairs ω = 1.2, Δρ = 1: α = {:.8}, β = {:.8}, γ = {:.8}, residual {:.1e}",
        s.alpha,
        s.beta,
        s.gamma,
        s.max_residual()
    );
    Ok(())
}
