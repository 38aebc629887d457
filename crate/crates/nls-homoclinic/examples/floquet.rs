//! Floquet discriminant of a plane wave and of a homoclinic snapshot.
use nls_homoclinic::integrable::{
    critical_points, floquet_discriminant, homoclinic_one_pair, plane_wave_discriminant,
    DarbouxData, SearchRegion,
};
use nls_homoclinic::Params;
use num_complex::Complex64 as C64;

fn main() -> anyhow::Result<()> {
    let p = Params::new(0.8, 0.0, 0.0, 0.0);
    let d = DarbouxData::new(0.8, 0.0, 0.0)?.even(false);
    let q = homoclinic_one_pair(0.3, 256, &d, &p)?;
    println!("lambda,delta_orbit,delta_plane");
    for y in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let l = C64::new(0.1, y);
        println!(
            "{l},{:.10},{:.10}",
            floquet_discriminant(&q, l)?,
            plane_wave_discriminant(0.8, l)
        );
    }
    for c in critical_points(
        &q,
        &SearchRegion::ImaginaryAxis {
            y_min: 0.05,
            y_max: 1.0,
            samples: 40,
        },
    )? {
        println!(
            "critical point λ = {:.10}, Δ = {:.6}, converged {}",
            c.lambda, c.delta, c.converged
        );
    }
    println!("double point iν = {:.10}", d.nu);
    Ok(())
}
