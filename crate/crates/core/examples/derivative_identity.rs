//! Central differences of K(t) = [Phi_a^i(t), Phi_b^j] against the
//! closed expression for its time derivative.

use lrlab::derivative::{compare_derivative, DEFAULT_STEP};
use lrlab::model::{build_model, Family, ModelSpec};
use lrlab::operator::{decompose, spectral_norm};

fn main() -> lrlab::Result<()> {
    let h = build_model(&ModelSpec::tfim(6, 1.0, 0.7))?;
    let decomp = decompose(&h.total_hamiltonian()?)?;
    let cases = [
        (Family::Zero, 1, Family::One, 2, 0.3),
        (Family::One, 0, Family::Zero, 3, 1.1),
        (Family::Zero, 4, Family::Zero, 2, 0.0),
        (Family::One, 5, Family::One, 2, 2.4),
    ];
    for (a, i, b, j, t) in cases {
        let c = compare_derivative(&h, &decomp, a, i, b, j, t, DEFAULT_STEP)?;
        println!(
            "phi{a}[{i}] vs phi{b}[{j}] at t = {t}: ||K'|| = {:.6}, relative error = {:.2e}",
            spectral_norm(&c.analytic),
            c.relative_error
        );
    }
    Ok(())
}
