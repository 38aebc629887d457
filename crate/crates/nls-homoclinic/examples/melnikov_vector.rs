//! Gradient of the Floquet invariant along the orbit: monodromy formula vs closed form.
use nls_homoclinic::integrable::{
    homoclinic_one_pair, melnikov_vector_explicit, melnikov_vector_generic, DarbouxData, VectorKind,
};
use nls_homoclinic::Params;

fn main() -> anyhow::Result<()> {
    let p = Params::new(0.8, 0.0, 0.0, 0.0);
    let d = DarbouxData::new(0.8, 0.0, 0.0)?;
    for t in [-2.0, 0.0, 1.0] {
        let q = homoclinic_one_pair(t, 64, &d, &p)?;
        let g = melnikov_vector_generic(&q, d.nu)?;
        let e = melnikov_vector_explicit(t, 64, &d, &p, VectorKind::OnePair)?;
        let diff =
            g.dq.iter()
                .zip(&e.dq)
                .chain(g.dqbar.iter().zip(&e.dqbar))
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
        println!(
            "t = {t:+.1}: |grad|∞ = {:.6}, monodromy vs closed form {:.2e}",
            e.sup_norm(),
            diff / e.sup_norm()
        );
    }
    Ok(())
}
