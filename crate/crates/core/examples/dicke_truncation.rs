//! Spin-boson chain with unbounded terms. The nearest-neighbour commutator
//! is 2 on the interior of the truncated Fock space for every truncation,
//! while the full truncated norm picks up the 2(m-1) corner artifact. The
//! chain can also be rewritten as one commuting family.

use lrlab::bounds::{bounded_reference_bound, observable_bound};
use lrlab::constants::{compute_bound_constants, observable_constants};
use lrlab::model::{build_model, validate_two_family, Family, ModelSpec, NormMode, Observable};
use lrlab::operator::spectral_norm;

fn main() -> lrlab::Result<()> {
    println!(" m   interior   full      K_full   observable B   reference B");
    for m in 2..=5 {
        let h = build_model(&ModelSpec::dicke(4, m, 1.0))?;
        let h0 = h.term(h.term_id(Family::Zero, 0)?)?.local();
        let h1 = h.term(h.term_id(Family::One, 0)?)?.local();
        let c = h0.commutator(&h1, h.sites())?;
        let interior = c.norm(NormMode::InteriorProjected, h.sites());
        let full = c.norm(NormMode::Full, h.sites());

        let ci = compute_bound_constants(&h, None, NormMode::InteriorProjected)?;
        let cf = compute_bound_constants(&h, None, NormMode::Full)?;
        let op = Observable::from_term(&h, h.term_id(Family::Zero, 0)?)?;
        let oq = Observable::from_term(&h, h.term_id(Family::One, 1)?)?;
        let obs = observable_constants(&h, &ci, &op, &oq)?;
        let b = observable_bound(&ci, &obs, 0.5, obs.d)?;
        let r = bounded_reference_bound(spectral_norm(&op.payload), spectral_norm(&oq.payload), &ci, obs.n_p, 0.5, obs.d);
        println!("{m:>2}   {interior:.6}   {full:.6}  {:.4}   {b:.6e}   {r:.6e}", cf.k);
    }

    let rewritten = build_model(&ModelSpec::dicke_commuting(3, 4, 1.0))?;
    let original = build_model(&ModelSpec::dicke(3, 4, 1.0))?;
    let diff = rewritten.total_hamiltonian()?.sub(&original.total_hamiltonian()?)?;
    println!("commuting rewrite: ||sum h~ - sum h|| = {:.2e}", spectral_norm(&diff));
    println!("rewrite validates as a two-family model: {}", validate_two_family(&rewritten).passed);
    Ok(())
}
