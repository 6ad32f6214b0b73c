//! Interaction graphs and the support regions that live on them.
//!
//! Sites are numbered `0..site_count`. Distances are hop counts computed by
//! breadth-first search from every site, so the table is exact for the
//! unweighted graphs used here.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InteractionGraph {
    site_count: usize,
    edges: BTreeSet<(usize, usize)>,
    #[serde(skip)]
    distances: Vec<Vec<usize>>,
}

impl InteractionGraph {
    /// Builds a connected graph and its all-pairs distance table.
    ///
    /// Edges are unordered; duplicates (in either orientation) collapse into
    /// one. Self-loops are dropped. A graph with a single site needs no edges.
    pub fn new(site_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if site_count == 0 {
            return Err(Error::InvalidArgument("graph needs at least one site".into()));
        }
        if edges.is_empty() && site_count > 1 {
            return Err(Error::InvalidArgument(
                "edge list is empty for a multi-site graph".into(),
            ));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            for s in [a, b] {
                if s >= site_count {
                    return Err(Error::SiteOutOfRange { site: s, site_count });
                }
            }
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }

        let mut adjacency = vec![Vec::new(); site_count];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }

        let mut distances = Vec::with_capacity(site_count);
        for source in 0..site_count {
            let row = bfs(&adjacency, source);
            if let Some(unreached) = row.iter().position(|d| d.is_none()) {
                return Err(Error::DisconnectedGraph(unreached));
            }
            distances.push(row.into_iter().map(|d| d.unwrap()).collect());
        }

        Ok(Self {
            site_count,
            edges: set,
            distances,
        })
    }

    /// Open chain `0 - 1 - ... - (n-1)`.
    pub fn path(site_count: usize) -> Result<Self> {
        let edges: Vec<_> = (1..site_count).map(|i| (i - 1, i)).collect();
        Self::new(site_count, &edges)
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn distance(&self, a: usize, b: usize) -> Result<usize> {
        self.check_site(a)?;
        self.check_site(b)?;
        Ok(self.distances[a][b])
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.site_count {
            Err(Error::SiteOutOfRange {
                site,
                site_count: self.site_count,
            })
        } else {
            Ok(())
        }
    }

    /// Minimum graph distance between any site of `a` and any site of `b`.
    /// Zero exactly when the regions share a site.
    pub fn region_distance(&self, a: &SupportRegion, b: &SupportRegion) -> Result<usize> {
        for &s in a.sites().iter().chain(b.sites()) {
            self.check_site(s)?;
        }
        let d = a
            .sites()
            .iter()
            .flat_map(|&x| b.sites().iter().map(move |&y| (x, y)))
            .map(|(x, y)| self.distances[x][y])
            .min()
            .expect("regions are nonempty");
        Ok(d)
    }
}

fn bfs(adjacency: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// A nonempty set of sites, kept sorted, with its graph diameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SupportRegion {
    sites: Vec<usize>,
    diameter: usize,
}

impl SupportRegion {
    pub fn new(graph: &InteractionGraph, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let sites: Vec<usize> = sites.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if sites.is_empty() {
            return Err(Error::EmptyRegion);
        }
        for &s in &sites {
            graph.check_site(s)?;
        }
        let mut diameter = 0;
        for (k, &a) in sites.iter().enumerate() {
            for &b in &sites[k + 1..] {
                diameter = diameter.max(graph.distances[a][b]);
            }
        }
        Ok(Self { sites, diameter })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    /// True when the two site sets intersect.
    pub fn overlaps(&self, other: &SupportRegion) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.sites.len() && j < other.sites.len() {
            match self.sites[i].cmp(&other.sites[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Sorted union of two regions' sites.
    pub fn union_sites(&self, other: &SupportRegion) -> Vec<usize> {
        self.sites
            .iter()
            .chain(&other.sites)
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_distances() {
        let g = InteractionGraph::path(5).unwrap();
        assert_eq!(g.distance(0, 4).unwrap(), 4);
        assert_eq!(g.distance(3, 1).unwrap(), 2);
    }

    #[test]
    fn single_site_graph() {
        let g = InteractionGraph::new(1, &[]).unwrap();
        assert_eq!(g.distance(0, 0).unwrap(), 0);
    }

    #[test]
    fn four_cycle() {
        let g = InteractionGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(g.distance(0, 2).unwrap(), 2);
        assert_eq!(g.distance(1, 3).unwrap(), 2);
        assert_eq!(g.distance(0, 3).unwrap(), 1);
    }

    #[test]
    fn duplicate_edges_ignored() {
        let g = InteractionGraph::new(3, &[(0, 1), (1, 0), (0, 1), (1, 2)]).unwrap();
        assert_eq!(g.edges().count(), 2);
    }

    #[test]
    fn disconnected_graph_rejected() {
        let err = InteractionGraph::new(4, &[(0, 1), (2, 3)]).unwrap_err();
        assert!(matches!(err, Error::DisconnectedGraph(2)));
    }

    #[test]
    fn out_of_range_edge_rejected() {
        assert!(matches!(
            InteractionGraph::new(3, &[(0, 3)]),
            Err(Error::SiteOutOfRange { site: 3, .. })
        ));
    }

    #[test]
    fn region_distances() {
        let g = InteractionGraph::path(5).unwrap();
        let r = |s: &[usize]| SupportRegion::new(&g, s.iter().copied()).unwrap();
        assert_eq!(g.region_distance(&r(&[0, 1]), &r(&[1, 2])).unwrap(), 0);
        assert_eq!(g.region_distance(&r(&[0, 1]), &r(&[3, 4])).unwrap(), 2);
        assert_eq!(g.region_distance(&r(&[2, 3]), &r(&[2, 3])).unwrap(), 0);
    }

    #[test]
    fn region_outside_graph() {
        let g = InteractionGraph::path(3).unwrap();
        assert!(SupportRegion::new(&g, [5]).is_err());
        assert!(matches!(SupportRegion::new(&g, []), Err(Error::EmptyRegion)));
    }

    #[test]
    fn diameter_and_overlap() {
        let g = InteractionGraph::path(6).unwrap();
        let a = SupportRegion::new(&g, [1, 3, 2]).unwrap();
        assert_eq!(a.sites(), &[1, 2, 3]);
        assert_eq!(a.diameter(), 2);
        let b = SupportRegion::new(&g, [3, 4]).unwrap();
        let c = SupportRegion::new(&g, [5]).unwrap();
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
        assert_eq!(a.union_sites(&b), vec![1, 2, 3, 4]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_connected() -> impl Strategy<Value = InteractionGraph> {
            (2usize..9)
                .prop_flat_map(|n| {
                    (
                        Just(n),
                        proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
                        proptest::collection::vec((0..n, 0..n), 0..6),
                    )
                })
                .prop_map(|(n, parents, extra)| {
                    // random spanning tree plus extra chords
                    let mut edges: Vec<_> = parents
                        .iter()
                        .enumerate()
                        .map(|(k, p)| (k + 1, p.index(k + 1)))
                        .collect();
                    edges.extend(extra);
                    InteractionGraph::new(n, &edges).unwrap()
                })
        }

        proptest! {
            #[test]
            fn metric_axioms(g in random_connected()) {
                let n = g.site_count();
                for a in 0..n {
                    prop_assert_eq!(g.distance(a, a).unwrap(), 0);
                    for b in 0..n {
                        let dab = g.distance(a, b).unwrap();
                        prop_assert_eq!(dab, g.distance(b, a).unwrap());
                        for c in 0..n {
                            prop_assert!(dab <= g.distance(a, c).unwrap() + g.distance(c, b).unwrap());
                        }
                    }
                }
            }
        }
    }
}
