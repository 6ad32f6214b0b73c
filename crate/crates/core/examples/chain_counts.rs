//! Operator-chain counts on the Ising chain: dynamic programming against
//! explicit enumeration, and the (sqrt(2) nu)^n closed-form envelope.

use lrlab::chains::{closed_form_chain_bound, count_chains_bruteforce, count_chains_dp};
use lrlab::constants::compute_bound_constants;
use lrlab::graph::SupportRegion;
use lrlab::model::{build_model, noncommuting_adjacency, Family, ModelSpec, NormMode};

fn main() -> lrlab::Result<()> {
    let h = build_model(&ModelSpec::tfim(6, 1.0, 1.0))?;
    let c = compute_bound_constants(&h, None, NormMode::Full)?;
    let adj = noncommuting_adjacency(&h, NormMode::Full)?;
    let start = h.term_id(Family::One, 0)?;
    let target = SupportRegion::new(h.graph(), [4])?;
    let d = h.graph().region_distance(&h.term(start)?.support, &target)?;

    let dp = count_chains_dp(&adj, start, &target, 8)?;
    let brute = count_chains_bruteforce(&adj, start, &target, 8)?;
    println!("start {}, target {:?}, d = {d}, R = {}", h.term(start)?.label(), target.sites(), c.r);
    println!(" n   c_n (dp)  c_n (enum)  weighted   closed form");
    for n in 0..=8 {
        println!(
            "{n:>2}   {:>8}  {:>10}  {:>8}   {:.4e}",
            dp.counts[n],
            brute.counts[n],
            dp.weighted[n],
            closed_form_chain_bound(&c, n, d)
        );
    }
    Ok(())
}
