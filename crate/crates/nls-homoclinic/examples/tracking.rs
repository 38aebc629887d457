//! ε|ln ε|² tracking of the perturbed orbit along the homoclinic orbit.
use nls_homoclinic::evolution::{tracking_experiment, TrackingSpec};
use nls_homoclinic::melnikov::QuadratureSpec;

fn main() -> anyhow::Result<()> {
    let t = std::time::Instant::now();
    let rep = tracking_experiment(
        &TrackingSpec {
            dt: std::env::args().nth(1).map_or(2e-3, |s| s.parse().unwrap()),
            record_stride: std::env::args().nth(2).map_or(10, |s| s.parse().unwrap()),
            ..TrackingSpec::default()
        },
        &QuadratureSpec::default(),
    )?;
    println!("epsilon,alpha,sup_h1,ratio,end_ratio,plane_distance_ratio,halving_change");
    for r in &rep.rows {
        println!(
            "{:e},{:.8},{:.4e},{:.4},{:.4},{:.4},{:.2e}",
            r.epsilon,
            r.alpha,
            r.sup_h1,
            r.ratio,
            r.end_ratio,
            r.plane_distance_ratio,
            r.halving_change.unwrap_or(f64::NAN)
        );
        if let Some(s) = &r.stopped {
            println!("  {s}");
        }
    }
    println!(
        "max ratio {:.3}, growth {:.3}, bounded {}, certified {}",
        rep.max_ratio, rep.growth, rep.bounded, rep.certified
    );
    eprintln!("{:.1?}", t.elapsed());
    Ok(())
}
