//! Finite-difference check of the time derivative of
//! `K(t) = [Φ_a^i(t), Φ_b^j]`.
//!
//! With `A(t) = e^{iHt} A e^{-iHt}` and `W = h_{a+1} Σ_{k ∈ Z_i} Φ_{a+1}^k`,
//! the derivative is `[K(t), -i W(t)] - i Σ_k [A(t), [W_k(t), B]]`.

use crate::error::{Error, Result};
use crate::model::{noncommuting_adjacency, Family, NormMode, TwoFamilyHamiltonian};
use crate::operator::{commutator, decompose, spectral_norm, FullOperator, SpectralDecomposition, C64};

pub const DEFAULT_STEP: f64 = 1e-4;

/// Both sides of the derivative identity at one time.
#[derive(Debug, Clone)]
pub struct DerivativeComparison {
    pub finite_difference: FullOperator,
    pub analytic: FullOperator,
    pub relative_error: f64,
}

/// Relative spectral-norm error between the central difference of `K(t)`
/// and the analytic right-hand side. Zero when both sides vanish; taken
/// relative to `||A|| ||B||` when only the analytic side does.
pub fn derivative_identity_check(
    h: &TwoFamilyHamiltonian,
    a: Family,
    i: usize,
    b: Family,
    j: usize,
    t: f64,
    step: f64,
) -> Result<f64> {
    let decomp = decompose(&h.total_hamiltonian()?)?;
    compare_derivative(h, &decomp, a, i, b, j, t, step).map(|c| c.relative_error)
}

#[allow(clippy::too_many_arguments)]
pub fn compare_derivative(
    h: &TwoFamilyHamiltonian,
    decomp: &SpectralDecomposition,
    a: Family,
    i: usize,
    b: Family,
    j: usize,
    t: f64,
    step: f64,
) -> Result<DerivativeComparison> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidArgument(format!("step must lie in (0, 0.1], got {step}")));
    }
    let ia = h.term_id(a, i)?;
    let ib = h.term_id(b, j)?;
    let a_op = h.embed_term(ia)?;
    let b_op = h.embed_term(ib)?;
    let a_eig = decomp.to_eigenbasis(&a_op)?;

    let k_at = |s: f64| -> Result<FullOperator> { commutator(&decomp.evolve_from_eigenbasis(&a_eig, s), &b_op) };
    let fd = k_at(t + step)?
        .sub(&k_at(t - step)?)?
        .scale(C64::new(0.5 / step, 0.0));

    let adj = noncommuting_adjacency(h, NormMode::Full)?;
    let h_other = h.coupling(a.other());
    let a_t = decomp.evolve_from_eigenbasis(&a_eig, t);
    let k_t = commutator(&a_t, &b_op)?;
    let minus_i = C64::new(0.0, -1.0);

    let mut w_t = FullOperator::zeros(h.total_dim());
    let mut second = FullOperator::zeros(h.total_dim());
    for &k in adj.neighbors(ia) {
        let wk = h.embed_term(k)?.scale(C64::new(h_other, 0.0));
        let wk_t = decomp.evolve_from_eigenbasis(&decomp.to_eigenbasis(&wk)?, t);
        let inner = commutator(&wk_t, &b_op)?;
        second.add_assign_scaled(&commutator(&a_t, &inner)?, minus_i)?;
        w_t.add_assign_scaled(&wk_t, C64::new(1.0, 0.0))?;
    }
    let mut analytic = commutator(&k_t, &w_t.scale(minus_i))?;
    analytic.add_assign_scaled(&second, C64::new(1.0, 0.0))?;

    let diff = spectral_norm(&fd.sub(&analytic)?);
    let an = spectral_norm(&analytic);
    let scale = spectral_norm(&fd).max(an);
    let ab = spectral_norm(&a_op) * spectral_norm(&b_op);
    // roundoff in K(t ± step) is amplified by 1/step in the difference
    let floor = (1e-12 * ab / step).max(1e-12);
    let relative_error = if scale <= floor {
        0.0
    } else if an <= floor {
        // exact derivative vanishes: what is left is the O(step²)
        // truncation of the difference, measured against ||A|| ||B||
        diff / ab
    } else {
        diff / scale
    };
    Ok(DerivativeComparison {
        finite_difference: fd,
        analytic,
        relative_error,
    })
}
