//! A Hamiltonian whose terms all commute carries no signal: the commutator
//! of two distant Z's stays at roundoff level for all times.

use lrlab::bounds::lr_velocity;
use lrlab::constants::compute_bound_constants;
use lrlab::dynamics::{commutator_norm_sweep, extract_velocity, DEFAULT_THRESHOLD};
use lrlab::model::{build_model, ModelSpec, NormMode, Observable};

fn main() -> lrlab::Result<()> {
    let h = build_model(&ModelSpec::commuting_ising(8, 1.0))?;
    let c = compute_bound_constants(&h, None, NormMode::Full)?;
    println!("K = {}, nu = {}, zero velocity: {}", c.k, c.nu, c.zero_velocity);
    println!("v_LR = {}", lr_velocity(&c));

    let op = Observable::named(&h, "z", 0)?;
    let q = Observable::named(&h, "z", 4)?;
    let ts: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let sweep = commutator_norm_sweep(&h, &op, &[q], &ts)?;
    let worst = sweep.points.iter().map(|p| p.norm).fold(0.0, f64::max);
    println!("max ||[Z0(t), Z4]|| over t in [0, 10]: {worst:.3e}");
    match extract_velocity(&sweep, DEFAULT_THRESHOLD) {
        Ok(v) => println!("empirical velocity {}", v.v_emp),
        Err(e) => println!("no cone: {e}"),
    }
    Ok(())
}
