//! Transverse-field Ising chain: exact ||[Z0(t), Zd]|| against the
//! closed-form and chain-series bounds, plus the empirical cone velocity.

use lrlab::bounds::BoundMethod;
use lrlab::dynamics::{commutator_norm_sweep, verify_bound, BoundSource};
use lrlab::model::{build_model, ModelSpec, NormMode, Observable};

fn main() -> lrlab::Result<()> {
    let n = 8;
    let h = build_model(&ModelSpec::tfim(n, 1.0, 1.0))?;
    let op = Observable::named(&h, "z", 0)?;
    let qs = (3..n).map(|s| Observable::named(&h, "z", s)).collect::<lrlab::Result<Vec<_>>>()?;
    let ts: Vec<f64> = (0..=30).map(|k| 0.1 * k as f64).collect();

    let sweep = commutator_norm_sweep(&h, &op, &qs, &ts)?;
    println!("  d     t=1.0        t=2.0        t=3.0");
    for (k, &d) in sweep.distances.iter().enumerate() {
        let at = |t: f64| sweep.series(k).find(|p| (p.t - t).abs() < 1e-9).map_or(f64::NAN, |p| p.norm);
        println!("{d:>3}  {:.4e}  {:.4e}  {:.4e}", at(1.0), at(2.0), at(3.0));
    }

    for method in [BoundMethod::ClosedForm, BoundMethod::SeriesExactCn] {
        let src = BoundSource::prepare(&h, &op, &qs, method, None, NormMode::Full, 3.0, 1e-12)?;
        let rep = verify_bound(&sweep, &src)?;
        println!(
            "{:<16} passed = {}, min margin = {:.3e}",
            method.name(),
            rep.passed,
            rep.min_margin.unwrap_or(f64::NAN)
        );
        if method == BoundMethod::ClosedForm {
            let v = rep.velocity.as_ref().map(|v| v.v_emp);
            println!("v_emp = {v:?}, v_LR = {:.4}", rep.v_lr);
        }
    }
    Ok(())
}
