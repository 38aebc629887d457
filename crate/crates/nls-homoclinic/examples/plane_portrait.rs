//! Equilibria of the plane system and one orbit leaving the saddle Q_ε.
use nls_homoclinic::plane::{
    fixed_points, integrate_plane, FixedPointKind, PlaneState, PlaneSystem,
};
use nls_homoclinic::Params;

fn main() -> anyhow::Result<()> {
    let p = Params::new(0.8, 1.0, 2.0, 1e-3);
    let pts = fixed_points(&p)?;
    for f in &pts {
        println!(
            "{:?}: I = {:.6}, θ = {:.6}, eigenvalues {:.4} / {:.4}, mismatch {:.1e}",
            f.kind,
            f.action,
            f.theta,
            f.eigen_closed[0],
            f.eigen_closed[1],
            f.eigen_mismatch()
        );
    }
    let q = pts
        .iter()
        .find(|f| f.kind == FixedPointKind::SaddleQ)
        .expect("saddle exists");
    let start = PlaneState {
        j: q.action - p.omega * p.omega + 1e-6,
        theta: q.theta,
    };
    let tr = integrate_plane(start, (0.0, 400.0), 1e-2, 4000, PlaneSystem::Full, &p);
    println!("t,J,theta");
    for (t, s) in tr.times.iter().zip(&tr.states) {
        println!("{t:.1},{:.6e},{:.6}", s.j, s.theta);
    }
    Ok(())
}
