//! Random instances shared by the property tests and the acceptance run.

#![allow(dead_code)]

use lrlab::graph::{InteractionGraph, SupportRegion};
use lrlab::model::{Family, NoncommutingAdjacency, SiteSpace, TwoFamilyHamiltonian};
use lrlab::operator::{FullOperator, C64};
use rand::Rng;

pub struct ChainInstance {
    pub graph: InteractionGraph,
    pub adj: NoncommutingAdjacency,
    /// 1 + max support diameter.
    pub r: usize,
    pub start: usize,
    pub target: SupportRegion,
}

/// Terms on a path graph with random interval supports (up to 3 sites) and
/// random families; each overlapping opposite-family pair is made adjacent
/// with probability `p_edge`.
pub fn random_chain_instance(rng: &mut impl Rng, max_terms: usize, p_edge: f64) -> ChainInstance {
    let sites = rng.gen_range(4..=10);
    let graph = InteractionGraph::path(sites).unwrap();
    let terms = rng.gen_range(2..=max_terms);
    let mut supports = Vec::with_capacity(terms);
    let mut families = Vec::with_capacity(terms);
    let mut r = 1;
    for _ in 0..terms {
        let s = rng.gen_range(0..sites);
        let w = rng.gen_range(1..=3.min(sites - s));
        r = r.max(w);
        supports.push(SupportRegion::new(&graph, s..s + w).unwrap());
        families.push(if rng.gen_bool(0.5) { Family::Zero } else { Family::One });
    }
    let mut zmap = vec![Vec::new(); terms];
    for i in 0..terms {
        for j in i + 1..terms {
            if families[i] != families[j] && supports[i].overlaps(&supports[j]) && rng.gen_bool(p_edge) {
                zmap[i].push(j);
            }
        }
    }
    let adj = NoncommutingAdjacency::from_parts(families, supports, zmap).unwrap();
    let start = rng.gen_range(0..terms);
    let a = rng.gen_range(0..sites);
    let b = rng.gen_range(a..sites.min(a + 2));
    let target = SupportRegion::new(&graph, a..=b).unwrap();
    ChainInstance {
        graph,
        adj,
        r,
        start,
        target,
    }
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> FullOperator {
    let raw = FullOperator::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    raw.add(&raw.adjoint()).unwrap()
}

/// A bounded two-family model on a qubit path: family 0 on bonds starting
/// at even sites, family 1 on bonds starting at odd sites, so each family
/// has disjoint supports. Payloads are random Hermitian 4x4 matrices.
pub fn random_bounded_model(rng: &mut impl Rng) -> TwoFamilyHamiltonian {
    let n = rng.gen_range(3..=6);
    let graph = InteractionGraph::path(n).unwrap();
    let mut f0 = Vec::new();
    let mut f1 = Vec::new();
    for i in 0..n - 1 {
        let term = (vec![i, i + 1], random_hermitian(rng, 4));
        if i % 2 == 0 {
            f0.push(term);
        } else {
            f1.push(term);
        }
    }
    let h0 = rng.gen_range(0.2..2.0);
    let h1 = rng.gen_range(0.2..2.0);
    TwoFamilyHamiltonian::new("random_bounded", graph, SiteSpace::qubits(n), f0, f1, h0, h1).unwrap()
}
