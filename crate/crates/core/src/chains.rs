//! Counting linking operator chains.
//!
//! A chain starts at a term `i1` and appends operators one at a time.
//! Writing positions from 1 (the start), the operator at an even position
//! must lie in `Z` of its predecessor; the operator at an odd position
//! (beyond the first) may lie in `Z` of its predecessor or of the operator
//! two steps back. Consecutive operators therefore always alternate family
//! across each (odd, even) pair.
//!
//! `c_n` counts chains with `n` appended operators whose end touches the
//! target: for even `n` the last operator must overlap it, for odd `n` the
//! last pair must. Two conventions are counted:
//!
//! * **multiplicity-free** (the default `c_n`): when an odd-position operator
//!   is taken from `Z` of the operator two back, the skipped operator in
//!   between is a dummy index and chains differing only in it count once;
//! * **weighted**: every sequence counts, dummy index included, which is the
//!   multiplicity produced by iterating the double sums literally.
//!
//! Every weighted count is at most `(√2 ν)^n`: even positions offer at most
//! ν choices and odd positions at most 2ν.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::constants::BoundConstants;
use crate::error::{Error, Result};
use crate::graph::SupportRegion;
use crate::model::NoncommutingAdjacency;

/// Exhaustive enumeration is capped here.
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// δ of two supports: 1 when they share a site.
pub fn overlaps(a: &SupportRegion, b: &SupportRegion) -> u8 {
    u8::from(a.overlaps(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

/// The last two operators of a partial chain and the parity of the last
/// position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainState {
    pub last: usize,
    pub penult: Option<usize>,
    pub parity: Parity,
}

impl ChainState {
    pub fn start(term: usize) -> Self {
        Self {
            last: term,
            penult: None,
            parity: Parity::Odd,
        }
    }

    /// Admissible next operators, each tagged with whether it was reached
    /// through the operator two back (the dummy-index route).
    pub fn successors<'a>(
        &self,
        adj: &'a NoncommutingAdjacency,
    ) -> impl Iterator<Item = (ChainState, bool)> + 'a {
        let me = *self;
        let next_parity = match me.parity {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        };
        let direct = adj.neighbors(me.last).iter().map(move |&n| {
            (
                ChainState {
                    last: n,
                    penult: Some(me.last),
                    parity: next_parity,
                },
                false,
            )
        });
        let skip: &'a [usize] = match (next_parity, me.penult) {
            (Parity::Odd, Some(p)) => adj.neighbors(p),
            _ => &[],
        };
        direct.chain(skip.iter().map(move |&n| {
            (
                ChainState {
                    last: n,
                    penult: Some(me.last),
                    parity: next_parity,
                },
                true,
            )
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainCountTable {
    pub start: usize,
    pub target: SupportRegion,
    /// Multiplicity-free counts, index n.
    pub counts: Vec<BigUint>,
    /// Weighted (recursion-faithful) counts, index n.
    pub weighted: Vec<BigUint>,
}

impl ChainCountTable {
    pub fn n_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, n: usize) -> Option<&BigUint> {
        self.counts.get(n)
    }

    pub fn weighted_count(&self, n: usize) -> Option<&BigUint> {
        self.weighted.get(n)
    }

    pub fn as_map(&self) -> BTreeMap<usize, BigUint> {
        self.counts.iter().cloned().enumerate().collect()
    }

    /// Pointwise maximum with another table (used to bound over several
    /// possible start terms).
    pub fn pointwise_max(&self, other: &ChainCountTable) -> ChainCountTable {
        let merge = |a: &[BigUint], b: &[BigUint]| -> Vec<BigUint> {
            (0..a.len().max(b.len()))
                .map(|n| {
                    let x = a.get(n).cloned().unwrap_or_default();
                    let y = b.get(n).cloned().unwrap_or_default();
                    x.max(y)
                })
                .collect()
        };
        ChainCountTable {
            start: self.start,
            target: self.target.clone(),
            counts: merge(&self.counts, &other.counts),
            weighted: merge(&self.weighted, &other.weighted),
        }
    }
}

pub fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn check_start(adj: &NoncommutingAdjacency, start: usize) -> Result<()> {
    if start >= adj.len() {
        Err(Error::UnknownTerm(start))
    } else {
        Ok(())
    }
}

/// Exact chain counts by dynamic programming over the last operator.
///
/// The state after an odd position only needs the last operator: the next
/// (even) step looks at it alone, and the step after that looks at it as
/// the operator two back. Cost is O(n_max · |E|).
pub fn count_chains_dp(
    adj: &NoncommutingAdjacency,
    start: usize,
    target: &SupportRegion,
    n_max: usize,
) -> Result<ChainCountTable> {
    check_start(adj, start)?;
    let terms = adj.len();
    let hits: Vec<bool> = (0..terms).map(|i| adj.support(i).overlaps(target)).collect();

    // per term: [multiplicity-free, weighted] tallies at the latest odd and
    // even positions
    let mut odd: Vec<[BigUint; 2]> = vec![[BigUint::zero(), BigUint::zero()]; terms];
    odd[start] = [BigUint::from(1u8), BigUint::from(1u8)];

    let mut counts = Vec::with_capacity(n_max + 1);
    let mut weighted = Vec::with_capacity(n_max + 1);
    counts.push(BigUint::from(u8::from(hits[start])));
    weighted.push(BigUint::from(u8::from(hits[start])));

    let mut even: Vec<[BigUint; 2]> = vec![[BigUint::zero(), BigUint::zero()]; terms];
    let mut n = 0;
    while n < n_max {
        // odd n + 1 = 2k+1 appended: next position is even
        for e in even.iter_mut() {
            *e = [BigUint::zero(), BigUint::zero()];
        }
        for i in 0..terms {
            if odd[i][0].is_zero() && odd[i][1].is_zero() {
                continue;
            }
            for &j in adj.neighbors(i) {
                for w in 0..2 {
                    even[j][w] += &odd[i][w];
                }
            }
        }
        n += 1;
        // chains ending on (odd i, even j) with i or j touching the target
        let mut c = [BigUint::zero(), BigUint::zero()];
        for i in 0..terms {
            let touching = adj.neighbors(i).iter().filter(|&&j| hits[i] || hits[j]).count();
            if touching > 0 {
                for w in 0..2 {
                    c[w] += &odd[i][w] * BigUint::from(touching);
                }
            }
        }
        let [cf, cw] = c;
        counts.push(cf);
        weighted.push(cw);
        if n == n_max {
            break;
        }

        // even n + 1 appended: next position is odd
        let mut next: Vec<[BigUint; 2]> = vec![[BigUint::zero(), BigUint::zero()]; terms];
        for j in 0..terms {
            if even[j][0].is_zero() && even[j][1].is_zero() {
                continue;
            }
            for &l in adj.neighbors(j) {
                for w in 0..2 {
                    next[l][w] += &even[j][w];
                }
            }
        }
        for i in 0..terms {
            if odd[i][0].is_zero() && odd[i][1].is_zero() {
                continue;
            }
            let degree = BigUint::from(adj.neighbors(i).len());
            for &l in adj.neighbors(i) {
                // multiplicity-free: the dummy in between counts once
                next[l][0] += &odd[i][0];
                next[l][1] += &odd[i][1] * &degree;
            }
        }
        n += 1;
        let mut c = [BigUint::zero(), BigUint::zero()];
        for (l, v) in next.iter().enumerate() {
            if hits[l] {
                for w in 0..2 {
                    c[w] += &v[w];
                }
            }
        }
        let [cf, cw] = c;
        counts.push(cf);
        weighted.push(cw);
        odd = next;
    }
    Ok(ChainCountTable {
        start,
        target: target.clone(),
        counts,
        weighted,
    })
}

/// Every admissible chain of exactly `n` appended operators, as the full
/// sequence of term ids (start included) plus, per position, whether it
/// was reached through the operator two back.
pub fn enumerate_chains(
    adj: &NoncommutingAdjacency,
    start: usize,
    n: usize,
) -> Result<Vec<(Vec<usize>, Vec<bool>)>> {
    check_start(adj, start)?;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::EnumerationTooLarge {
            requested: n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let mut out = Vec::new();
    let mut seq = vec![start];
    let mut skips = vec![false];
    extend(adj, ChainState::start(start), n, &mut seq, &mut skips, &mut out);
    Ok(out)
}

fn extend(
    adj: &NoncommutingAdjacency,
    state: ChainState,
    remaining: usize,
    seq: &mut Vec<usize>,
    skips: &mut Vec<bool>,
    out: &mut Vec<(Vec<usize>, Vec<bool>)>,
) {
    if remaining == 0 {
        out.push((seq.clone(), skips.clone()));
        return;
    }
    for (next, skip) in state.successors(adj) {
        seq.push(next.last);
        skips.push(skip);
        extend(adj, next, remaining - 1, seq, skips, out);
        seq.pop();
        skips.pop();
    }
}

fn reaches_target(adj: &NoncommutingAdjacency, seq: &[usize], n: usize, target: &SupportRegion) -> bool {
    let last = seq[n];
    if n % 2 == 0 {
        adj.support(last).overlaps(target)
    } else {
        adj.support(last).overlaps(target) || adj.support(seq[n - 1]).overlaps(target)
    }
}

/// Explicit enumeration; the oracle for [`count_chains_dp`].
pub fn count_chains_bruteforce(
    adj: &NoncommutingAdjacency,
    start: usize,
    target: &SupportRegion,
    n_max: usize,
) -> Result<ChainCountTable> {
    check_start(adj, start)?;
    if n_max > BRUTE_FORCE_MAX_N {
        return Err(Error::EnumerationTooLarge {
            requested: n_max,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let mut counts = Vec::with_capacity(n_max + 1);
    let mut weighted = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let chains = enumerate_chains(adj, start, n)?;
        let mut w = 0u64;
        let mut distinct: HashSet<Vec<Option<usize>>> = HashSet::new();
        for (seq, skips) in &chains {
            if !reaches_target(adj, seq, n, target) {
                continue;
            }
            w += 1;
            // blank out dummy indices skipped over
            let key: Vec<Option<usize>> = seq
                .iter()
                .enumerate()
                .map(|(p, &id)| {
                    if skips.get(p + 1).copied().unwrap_or(false) {
                        None
                    } else {
                        Some(id)
                    }
                })
                .collect();
            distinct.insert(key);
        }
        counts.push(BigUint::from(distinct.len()));
        weighted.push(BigUint::from(w));
    }
    Ok(ChainCountTable {
        start,
        target: target.clone(),
        counts,
        weighted,
    })
}

/// `(√2 ν)^n e^{λ(R n - d)}`, or 0 when `R n < d` (no chain can reach).
pub fn closed_form_chain_bound(consts: &BoundConstants, n: usize, d: usize) -> f64 {
    let reach = consts.r * n;
    if reach < d {
        return 0.0;
    }
    let growth = (std::f64::consts::SQRT_2 * consts.nu as f64).powi(n as i32);
    growth * (consts.lambda * (reach as f64 - d as f64)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::InteractionGraph;
    use crate::model::{build_model, noncommuting_adjacency, Family, ModelSpec, NormMode};

    fn tfim_adj(n: usize) -> (crate::model::TwoFamilyHamiltonian, NoncommutingAdjacency) {
        let h = build_model(&ModelSpec::tfim(n, 1.0, 1.0)).unwrap();
        let adj = noncommuting_adjacency(&h, NormMode::Full).unwrap();
        (h, adj)
    }

    #[test]
    fn overlap_symbol() {
        let g = InteractionGraph::path(5).unwrap();
        let r = |s: &[usize]| SupportRegion::new(&g, s.iter().copied()).unwrap();
        assert_eq!(overlaps(&r(&[0, 1]), &r(&[1, 2])), 1);
        assert_eq!(overlaps(&r(&[0, 1]), &r(&[3, 4])), 0);
        assert_eq!(overlaps(&r(&[2]), &r(&[2])), 1);
    }

    #[test]
    fn hand_counted_small_chain() {
        // TFIM N=3: bonds b0=(0,1), b1=(1,2); fields z0, z1, z2.
        // Z(b0) = {z0, z1}, Z(b1) = {z1, z2}, Z(z1) = {b0, b1}.
        let (h, adj) = tfim_adj(3);
        let b0 = h.term_id(Family::Zero, 0).unwrap();
        let target = SupportRegion::new(h.graph(), [2]).unwrap();
        let t = count_chains_dp(&adj, b0, &target, 2).unwrap();
        // n=0: b0 misses site 2
        assert_eq!(t.counts[0], BigUint::from(0u8));
        // n=1: pairs (b0, z0), (b0, z1): neither touches site 2
        assert_eq!(t.counts[1], BigUint::from(0u8));
        // n=2: (b0, z?, x) with x in Z(z?) or Z(b0). Only x = b1 touches
        // site 2, reached via z1: exactly one chain (b0, z1, b1).
        assert_eq!(t.counts[2], BigUint::from(1u8));
        assert_eq!(t.weighted[2], BigUint::from(1u8));
    }

    #[test]
    fn contact_term() {
        let (h, adj) = tfim_adj(4);
        let b1 = h.term_id(Family::Zero, 1).unwrap();
        let target = SupportRegion::new(h.graph(), [2]).unwrap();
        let t = count_chains_dp(&adj, b1, &target, 0).unwrap();
        assert_eq!(t.counts, vec![BigUint::from(1u8)]);
        let bf = count_chains_bruteforce(&adj, b1, &target, 0).unwrap();
        assert_eq!(bf, t);
    }

    #[test]
    fn dp_matches_bruteforce_tfim() {
        let (h, adj) = tfim_adj(6);
        let start = h.term_id(Family::Zero, 0).unwrap();
        let target = h.term(h.term_id(Family::One, 4).unwrap()).unwrap().support.clone();
        let dp = count_chains_dp(&adj, start, &target, 6).unwrap();
        let bf = count_chains_bruteforce(&adj, start, &target, 6).unwrap();
        assert_eq!(dp, bf);
        assert!(dp.counts.iter().any(|c| !c.is_zero()));
    }

    #[test]
    fn weighted_dominates_multiplicity_free() {
        let (h, adj) = tfim_adj(6);
        let start = h.term_id(Family::One, 2).unwrap();
        let target = SupportRegion::new(h.graph(), [5]).unwrap();
        let t = count_chains_dp(&adj, start, &target, 9).unwrap();
        for n in 0..=9 {
            assert!(t.counts[n] <= t.weighted[n]);
        }
        assert!(t.counts[9] < t.weighted[9]);
    }

    #[test]
    fn empty_adjacency_has_no_chains() {
        let h = build_model(&ModelSpec::commuting_ising(5, 1.0)).unwrap();
        let adj = noncommuting_adjacency(&h, NormMode::Full).unwrap();
        let target = SupportRegion::new(h.graph(), [1]).unwrap();
        let bf = count_chains_bruteforce(&adj, 0, &target, 4).unwrap();
        assert_eq!(bf.counts[0], BigUint::from(1u8));
        assert!(bf.counts[1..].iter().all(Zero::is_zero));
        assert_eq!(count_chains_dp(&adj, 0, &target, 4).unwrap(), bf);
    }

    #[test]
    fn errors() {
        let (h, adj) = tfim_adj(4);
        let target = SupportRegion::new(h.graph(), [3]).unwrap();
        assert!(matches!(count_chains_dp(&adj, 99, &target, 3), Err(Error::UnknownTerm(99))));
        assert!(matches!(
            count_chains_bruteforce(&adj, 0, &target, 11),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn closed_form_examples() {
        let c = BoundConstants::from_parts(1.0, 1.0, 2.0, 4.0, 2, 2, Some(1.0)).unwrap();
        let v = closed_form_chain_bound(&c, 3, 5);
        let expected = (2.0 * 2f64.sqrt()).powi(3) * 1f64.exp();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 61.5).abs() < 0.05);
        assert_eq!(closed_form_chain_bound(&c, 2, 5), 0.0);
        assert_eq!(closed_form_chain_bound(&c, 0, 0), 1.0);
    }

    #[test]
    fn chains_alternate_families() {
        let (h, adj) = tfim_adj(6);
        let start = h.term_id(Family::Zero, 2).unwrap();
        for n in 0..=7 {
            for (seq, _) in enumerate_chains(&adj, start, n).unwrap() {
                let zeros = seq.iter().filter(|&&id| adj.family(id) == Family::Zero).count() as i64;
                let ones = seq.len() as i64 - zeros;
                assert!((zeros - ones).abs() <= 1, "{seq:?}");
            }
        }
    }

    #[test]
    fn map_view() {
        let (h, adj) = tfim_adj(4);
        let target = SupportRegion::new(h.graph(), [0]).unwrap();
        let t = count_chains_dp(&adj, 0, &target, 3).unwrap();
        assert_eq!(t.as_map().len(), 4);
        assert_eq!(t.n_max(), 3);
    }
}
