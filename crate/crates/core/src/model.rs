//! Two-family lattice Hamiltonians `H = h0 Σ Φ0^i + h1 Σ Φ1^j`.
//!
//! Payloads are the bare Φ's; couplings are stored separately and only
//! enter through [`TwoFamilyHamiltonian::coupling`] and the full
//! Hamiltonian matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{InteractionGraph, SupportRegion};
use crate::operator::{commutator, embed_payload, local, spectral_norm, FullOperator, C64};

/// Spectral norms at or below this value count as "commuting".
pub const COMMUTATOR_THRESHOLD: f64 = 1e-12;

/// Tolerance for the intra-family commutation check.
pub const FAMILY_COMMUTATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    Spin,
    Boson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    Zero,
    One,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::Zero => Family::One,
            Family::One => Family::Zero,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Family::Zero => 0,
            Family::One => 1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// How commutator norms are measured.
///
/// `InteriorProjected` compresses the operator onto the subspace where no
/// boson mode in its support occupies its top Fock level, which removes the
/// corner term of the truncated `[b, b†] = I - m|m-1><m-1|`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    #[default]
    Full,
    InteriorProjected,
}

/// Per-site local Hilbert spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteSpace {
    kinds: Vec<SiteKind>,
    dims: Vec<usize>,
}

impl SiteSpace {
    pub fn new(kinds: Vec<SiteKind>, dims: Vec<usize>) -> Result<Self> {
        if kinds.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: kinds.len(),
                found: dims.len(),
            });
        }
        if let Some(s) = dims.iter().position(|&d| d < 2) {
            return Err(Error::InvalidModel(format!("site {s} has dimension < 2")));
        }
        Ok(Self { kinds, dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self {
            kinds: vec![SiteKind::Spin; n],
            dims: vec![2; n],
        }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kinds(&self) -> &[SiteKind] {
        &self.kinds
    }

    pub fn dim_of(&self, sites: &[usize]) -> usize {
        sites.iter().map(|&s| self.dims[s]).product()
    }

    /// Basis mask of the interior subspace over `space` (sorted sites).
    pub fn interior_mask(&self, space: &[usize]) -> Vec<bool> {
        let total = self.dim_of(space);
        (0..total)
            .map(|mut idx| {
                space.iter().all(|&s| {
                    let d = self.dims[s];
                    let digit = idx % d;
                    idx /= d;
                    self.kinds[s] != SiteKind::Boson || digit + 1 < d
                })
            })
            .collect()
    }
}

/// An operator together with the (sorted) sites it acts on.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    sites: Vec<usize>,
    op: FullOperator,
}

impl LocalOperator {
    pub fn new(sites: Vec<usize>, op: FullOperator, space: &SiteSpace) -> Result<Self> {
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != sites {
            return Err(Error::InvalidArgument(
                "local operator sites must be sorted and distinct".into(),
            ));
        }
        if let Some(&s) = sites.iter().find(|&&s| s >= space.len()) {
            return Err(Error::SiteOutOfRange {
                site: s,
                site_count: space.len(),
            });
        }
        let expected = space.dim_of(&sites);
        if op.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: op.dim(),
            });
        }
        Ok(Self { sites, op })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn op(&self) -> &FullOperator {
        &self.op
    }

    pub fn is_zero(&self) -> bool {
        self.op.max_abs() == 0.0
    }

    fn union(&self, other: &LocalOperator) -> Vec<usize> {
        let mut u: Vec<usize> = self.sites.iter().chain(&other.sites).copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    }

    pub fn embed_into(&self, space_sites: &[usize], space: &SiteSpace) -> Result<FullOperator> {
        embed_payload(&self.op, &self.sites, space_sites, space.dims())
    }

    /// `[self, other]` on the union of supports, with identity factors
    /// stripped from the result.
    pub fn commutator(&self, other: &LocalOperator, space: &SiteSpace) -> Result<LocalOperator> {
        if !self.sites.iter().any(|s| other.sites.contains(s)) {
            return Ok(LocalOperator {
                sites: self.sites.first().copied().into_iter().collect(),
                op: FullOperator::zeros(space.dims[self.sites[0]]),
            });
        }
        let u = self.union(other);
        let a = self.embed_into(&u, space)?;
        let b = other.embed_into(&u, space)?;
        let c = commutator(&a, &b)?;
        Ok(LocalOperator { sites: u, op: c }.reduce_support(space))
    }

    /// Removes sites on which the operator acts as the identity.
    pub fn reduce_support(mut self, space: &SiteSpace) -> LocalOperator {
        let scale = self.op.max_abs();
        if scale == 0.0 {
            let s = self.sites[0];
            return LocalOperator {
                sites: vec![s],
                op: FullOperator::zeros(space.dims[s]),
            };
        }
        let tol = 1e-14 * scale;
        let mut pos = 0;
        while pos < self.sites.len() && self.sites.len() > 1 {
            if let Some(reduced) = trace_out_if_trivial(&self, pos, space, tol) {
                self = reduced;
            } else {
                pos += 1;
            }
        }
        self
    }

    /// Spectral norm under the given convention.
    pub fn norm(&self, mode: NormMode, space: &SiteSpace) -> f64 {
        match mode {
            NormMode::Full => spectral_norm(&self.op),
            NormMode::InteriorProjected => {
                let mask = space.interior_mask(&self.sites);
                spectral_norm(&self.op.project(&mask).expect("mask matches dimension"))
            }
        }
    }
}

// Returns the operator with site at `pos` removed if it factorizes as A ⊗ I there.
fn trace_out_if_trivial(
    a: &LocalOperator,
    pos: usize,
    space: &SiteSpace,
    tol: f64,
) -> Option<LocalOperator> {
    let dims: Vec<usize> = a.sites.iter().map(|&s| space.dims[s]).collect();
    let stride: usize = dims[..pos].iter().product();
    let d = dims[pos];
    let n = a.op.dim();
    for c in 0..n {
        let dc = (c / stride) % d;
        let c0 = c - dc * stride;
        for r in 0..n {
            let dr = (r / stride) % d;
            let r0 = r - dr * stride;
            let v = a.op.get(r, c);
            let expected = if dr == dc { a.op.get(r0, c0) } else { C64::new(0.0, 0.0) };
            if (v - expected).norm() > tol {
                return None;
            }
        }
    }
    let reduced_dim = n / d;
    let op = FullOperator::from_fn(reduced_dim, |i, j| {
        let lift = |k: usize| (k / stride) * stride * d + k % stride;
        a.op.get(lift(i), lift(j))
    });
    let mut sites = a.sites.clone();
    sites.remove(pos);
    Some(LocalOperator { sites, op })
}

/// One Hamiltonian term Φ_a^i.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    pub family: Family,
    /// Index within the family.
    pub index: usize,
    pub support: SupportRegion,
    pub payload: FullOperator,
}

impl LocalTerm {
    pub fn local(&self) -> LocalOperator {
        LocalOperator {
            sites: self.support.sites().to_vec(),
            op: self.payload.clone(),
        }
    }

    pub fn label(&self) -> String {
        format!("phi{}[{}]", self.family, self.index)
    }
}

/// A local observable O_P or O_Q.
#[derive(Debug, Clone)]
pub struct Observable {
    pub label: String,
    pub support: SupportRegion,
    pub payload: FullOperator,
    /// Set when the observable is a Hamiltonian term's payload.
    pub term: Option<usize>,
}

impl Observable {
    pub fn new(
        label: impl Into<String>,
        h: &TwoFamilyHamiltonian,
        sites: &[usize],
        payload: FullOperator,
    ) -> Result<Self> {
        let support = SupportRegion::new(h.graph(), sites.iter().copied())?;
        let expected = h.sites().dim_of(support.sites());
        if payload.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: payload.dim(),
            });
        }
        if support.sites() != sites {
            return Err(Error::InvalidArgument(
                "observable sites must be sorted and distinct".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            support,
            payload,
            term: None,
        })
    }

    /// Built-in single-site observable by name: `x`, `y`, `z` on spins;
    /// `n` (number), `x` (b + b†), `p` (i(b† - b)) on bosons.
    pub fn named(h: &TwoFamilyHamiltonian, kind: &str, site: usize) -> Result<Self> {
        h.graph().check_site(site)?;
        let d = h.sites().dims()[site];
        let payload = match (h.sites().kinds()[site], kind) {
            (SiteKind::Spin, "x") => local::pauli_x(),
            (SiteKind::Spin, "y") => local::pauli_y(),
            (SiteKind::Spin, "z") => local::pauli_z(),
            (SiteKind::Boson, "n") => local::number(d),
            (SiteKind::Boson, "x") => local::quadrature_x(d),
            (SiteKind::Boson, "p") => local::quadrature_p(d),
            (k, _) => {
                return Err(Error::InvalidArgument(format!(
                    "observable \"{kind}\" is not defined on a {k:?} site"
                )))
            }
        };
        Self::new(format!("{kind}{site}"), h, &[site], payload)
    }

    /// The observable equal to a Hamiltonian term's payload.
    pub fn from_term(h: &TwoFamilyHamiltonian, id: usize) -> Result<Self> {
        let t = h.term(id)?;
        Ok(Self {
            label: t.label(),
            support: t.support.clone(),
            payload: t.payload.clone(),
            term: Some(id),
        })
    }

    pub fn local(&self) -> LocalOperator {
        LocalOperator {
            sites: self.support.sites().to_vec(),
            op: self.payload.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoFamilyHamiltonian {
    name: String,
    graph: InteractionGraph,
    sites: SiteSpace,
    terms: Vec<LocalTerm>,
    h0: f64,
    h1: f64,
    declared_range: Option<usize>,
    boundary: String,
}

/// Payload for one term: its sites and bare operator.
pub type TermSpec = (Vec<usize>, FullOperator);

impl TwoFamilyHamiltonian {
    pub fn new(
        name: impl Into<String>,
        graph: InteractionGraph,
        sites: SiteSpace,
        family0: Vec<TermSpec>,
        family1: Vec<TermSpec>,
        h0: f64,
        h1: f64,
    ) -> Result<Self> {
        if sites.len() != graph.site_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.site_count(),
                found: sites.len(),
            });
        }
        for (key, h) in [("h0", h0), ("h1", h1)] {
            if !(h.is_finite() && h >= 0.0) {
                return Err(Error::InvalidModel(format!("{key} must be a nonnegative real")));
            }
        }
        let mut terms = Vec::new();
        for (family, specs) in [(Family::Zero, family0), (Family::One, family1)] {
            for (index, (support_sites, payload)) in specs.into_iter().enumerate() {
                let support = SupportRegion::new(&graph, support_sites)?;
                let expected = sites.dim_of(support.sites());
                if payload.dim() != expected {
                    return Err(Error::DimensionMismatch {
                        expected,
                        found: payload.dim(),
                    });
                }
                terms.push(LocalTerm {
                    family,
                    index,
                    support,
                    payload,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            graph,
            sites,
            terms,
            h0,
            h1,
            declared_range: None,
            boundary: "open".into(),
        })
    }

    /// Declares an upper bound R that every support diameter must stay below.
    pub fn with_declared_range(mut self, r: usize) -> Self {
        self.declared_range = Some(r);
        self
    }

    pub fn with_boundary_note(mut self, note: impl Into<String>) -> Self {
        self.boundary = note.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graph(&self) -> &InteractionGraph {
        &self.graph
    }

    pub fn sites(&self) -> &SiteSpace {
        &self.sites
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn term(&self, id: usize) -> Result<&LocalTerm> {
        self.terms.get(id).ok_or(Error::UnknownTerm(id))
    }

    pub fn family(&self, f: Family) -> impl Iterator<Item = (usize, &LocalTerm)> {
        self.terms.iter().enumerate().filter(move |(_, t)| t.family == f)
    }

    /// Global id of term `index` in family `f`.
    pub fn term_id(&self, f: Family, index: usize) -> Result<usize> {
        self.family(f)
            .find(|(_, t)| t.index == index)
            .map(|(id, _)| id)
            .ok_or(Error::UnknownTerm(index))
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn coupling(&self, f: Family) -> f64 {
        match f {
            Family::Zero => self.h0,
            Family::One => self.h1,
        }
    }

    pub fn declared_range(&self) -> Option<usize> {
        self.declared_range
    }

    pub fn boundary(&self) -> &str {
        &self.boundary
    }

    pub fn max_support_diameter(&self) -> usize {
        self.terms.iter().map(|t| t.support.diameter()).max().unwrap_or(0)
    }

    /// The declared R if any, else `1 + max support diameter`.
    pub fn range(&self) -> usize {
        self.declared_range
            .unwrap_or_else(|| 1 + self.max_support_diameter())
    }

    pub fn total_dim(&self) -> usize {
        self.sites.dims().iter().product()
    }

    pub fn all_sites(&self) -> Vec<usize> {
        (0..self.sites.len()).collect()
    }

    /// A term's payload on the full space.
    pub fn embed_term(&self, id: usize) -> Result<FullOperator> {
        let t = self.term(id)?;
        embed_payload(&t.payload, t.support.sites(), &self.all_sites(), self.sites.dims())
    }

    pub fn embed_observable(&self, o: &Observable) -> Result<FullOperator> {
        embed_payload(&o.payload, o.support.sites(), &self.all_sites(), self.sites.dims())
    }

    /// `Σ h_a Φ_a^i` on the full space.
    pub fn total_hamiltonian(&self) -> Result<FullOperator> {
        let dim = self.total_dim();
        if dim > crate::operator::DENSE_DIM_CAP {
            return Err(Error::DimensionCap {
                dim,
                cap: crate::operator::DENSE_DIM_CAP,
            });
        }
        let mut h = FullOperator::zeros(dim);
        for (id, t) in self.terms.iter().enumerate() {
            let c = self.coupling(t.family);
            if c != 0.0 {
                h.add_assign_scaled(&self.embed_term(id)?, C64::new(c, 0.0))?;
            }
        }
        Ok(h)
    }
}

/// One failed check from [`validate_two_family`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotHermitian { term: String, deviation: f64 },
    FamilyNoncommuting { a: String, b: String, norm: f64 },
    DiameterTooLarge { term: String, diameter: usize, range: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub passed: bool,
    pub term_counts: [usize; 2],
    pub range: usize,
    pub range_definition: &'static str,
    pub boundary: String,
    pub violations: Vec<Violation>,
}

pub const RANGE_DEFINITION: &str = "R = 1 + max support diameter (hop count)";

/// Checks Hermiticity, intra-family commutation and the support-diameter
/// bound. Never aborts: every violation is listed.
pub fn validate_two_family(h: &TwoFamilyHamiltonian) -> ValidationReport {
    let mut violations = Vec::new();
    let range = h.range();
    for t in h.terms() {
        let dev = t.payload.hermiticity_error();
        let scale = t.payload.max_abs().max(1.0);
        if dev > 1e-12 * scale {
            violations.push(Violation::NotHermitian {
                term: t.label(),
                deviation: dev,
            });
        }
        if t.support.diameter() >= range {
            violations.push(Violation::DiameterTooLarge {
                term: t.label(),
                diameter: t.support.diameter(),
                range,
            });
        }
    }
    let terms = h.terms();
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let (a, b) = (&terms[i], &terms[j]);
            if a.family != b.family || !a.support.overlaps(&b.support) {
                continue;
            }
            let norm = a
                .local()
                .commutator(&b.local(), h.sites())
                .map(|c| c.norm(NormMode::Full, h.sites()))
                .unwrap_or(f64::INFINITY);
            if norm > FAMILY_COMMUTATION_TOL {
                violations.push(Violation::FamilyNoncommuting {
                    a: a.label(),
                    b: b.label(),
                    norm,
                });
            }
        }
    }
    let counts = [h.family(Family::Zero).count(), h.family(Family::One).count()];
    ValidationReport {
        model: h.name().to_string(),
        passed: violations.is_empty(),
        term_counts: counts,
        range,
        range_definition: RANGE_DEFINITION,
        boundary: h.boundary().to_string(),
        violations,
    }
}

/// `Z_i`: for each term, the opposite-family terms it fails to commute with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoncommutingAdjacency {
    families: Vec<Family>,
    supports: Vec<SupportRegion>,
    zmap: Vec<Vec<usize>>,
}

impl NoncommutingAdjacency {
    /// Builds an adjacency directly (used for synthetic chain-counting
    /// instances). `zmap` is symmetrized; entries must join different
    /// families with overlapping supports.
    pub fn from_parts(
        families: Vec<Family>,
        supports: Vec<SupportRegion>,
        zmap: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = families.len();
        if supports.len() != n || zmap.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: supports.len().min(zmap.len()),
            });
        }
        let mut sym = vec![Vec::new(); n];
        for (i, row) in zmap.iter().enumerate() {
            for &j in row {
                if j >= n {
                    return Err(Error::UnknownTerm(j));
                }
                if families[i] == families[j] || !supports[i].overlaps(&supports[j]) {
                    return Err(Error::InvalidArgument(format!(
                        "terms {i} and {j} cannot be adjacent"
                    )));
                }
                sym[i].push(j);
                sym[j].push(i);
            }
        }
        for row in &mut sym {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self {
            families,
            supports,
            zmap: sym,
        })
    }

    pub fn len(&self) -> usize {
        self.zmap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zmap.is_empty()
    }

    pub fn neighbors(&self, id: usize) -> &[usize] {
        &self.zmap[id]
    }

    pub fn family(&self, id: usize) -> Family {
        self.families[id]
    }

    pub fn support(&self, id: usize) -> &SupportRegion {
        &self.supports[id]
    }

    /// ν = max |Z_i|.
    pub fn max_degree(&self) -> usize {
        self.zmap.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Tests every overlapping opposite-family pair by explicit commutator.
pub fn noncommuting_adjacency(h: &TwoFamilyHamiltonian, mode: NormMode) -> Result<NoncommutingAdjacency> {
    let terms = h.terms();
    let mut zmap = vec![Vec::new(); terms.len()];
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let (a, b) = (&terms[i], &terms[j]);
            if a.family == b.family || !a.support.overlaps(&b.support) {
                continue;
            }
            let c = a.local().commutator(&b.local(), h.sites())?;
            if c.norm(mode, h.sites()) > COMMUTATOR_THRESHOLD {
                zmap[i].push(j);
                zmap[j].push(i);
            }
        }
    }
    Ok(NoncommutingAdjacency {
        families: terms.iter().map(|t| t.family).collect(),
        supports: terms.iter().map(|t| t.support.clone()).collect(),
        zmap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Φ0^i = X_i X_{i+1}, Φ1^i = Z_i.
    Tfim,
    /// Φ0^i = X_i X_{i+1} only.
    CommutingIsing,
    /// h_n = Z_n (b_n† + b_n + i b_{n+1}† - i b_{n+1}), split by parity of n.
    DickeChain,
    /// h̃_n = b_n (Z_n - i Z_{n-1}) + h.c. as a single commuting family.
    DickeCommuting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub length: usize,
    /// Boson truncation m (Dicke models only).
    pub truncation: usize,
    pub h0: f64,
    pub h1: f64,
}

impl ModelSpec {
    pub fn tfim(length: usize, j: f64, g: f64) -> Self {
        Self {
            kind: ModelKind::Tfim,
            length,
            truncation: 0,
            h0: j,
            h1: g,
        }
    }

    pub fn commuting_ising(length: usize, j: f64) -> Self {
        Self {
            kind: ModelKind::CommutingIsing,
            length,
            truncation: 0,
            h0: j,
            h1: 1.0,
        }
    }

    pub fn dicke(length: usize, truncation: usize, h: f64) -> Self {
        Self {
            kind: ModelKind::DickeChain,
            length,
            truncation,
            h0: h,
            h1: h,
        }
    }

    pub fn dicke_commuting(length: usize, truncation: usize, h: f64) -> Self {
        Self {
            kind: ModelKind::DickeCommuting,
            ..Self::dicke(length, truncation, h)
        }
    }
}

/// Dicke site layout along the path: mode n at `2n`, spin n at `2n + 1`.
pub fn dicke_mode_site(n: usize) -> usize {
    2 * n
}

pub fn dicke_spin_site(n: usize) -> usize {
    2 * n + 1
}

pub fn build_model(spec: &ModelSpec) -> Result<TwoFamilyHamiltonian> {
    let n = spec.length;
    if n < 2 {
        return Err(Error::InvalidModel("length must be >= 2".into()));
    }
    match spec.kind {
        ModelKind::Tfim | ModelKind::CommutingIsing => {
            let graph = InteractionGraph::path(n)?;
            let xx = local::tensor(&[local::pauli_x(), local::pauli_x()]);
            let bonds: Vec<TermSpec> = (0..n - 1).map(|i| (vec![i, i + 1], xx.clone())).collect();
            let fields: Vec<TermSpec> = if spec.kind == ModelKind::Tfim {
                (0..n).map(|i| (vec![i], local::pauli_z())).collect()
            } else {
                Vec::new()
            };
            let name = if spec.kind == ModelKind::Tfim { "tfim" } else { "commuting_ising" };
            Ok(TwoFamilyHamiltonian::new(
                name,
                graph,
                SiteSpace::qubits(n),
                bonds,
                fields,
                spec.h0,
                spec.h1,
            )?
            .with_boundary_note("open chain"))
        }
        ModelKind::DickeChain | ModelKind::DickeCommuting => {
            let m = spec.truncation;
            if m < 2 {
                return Err(Error::InvalidModel("truncation must be >= 2".into()));
            }
            let graph = InteractionGraph::path(2 * n)?;
            let mut kinds = Vec::with_capacity(2 * n);
            let mut dims = Vec::with_capacity(2 * n);
            for _ in 0..n {
                kinds.extend([SiteKind::Boson, SiteKind::Spin]);
                dims.extend([m, 2]);
            }
            let space = SiteSpace::new(kinds, dims)?;
            let z = local::pauli_z();
            let id_m = FullOperator::identity(m);
            let id_2 = FullOperator::identity(2);
            let xq = local::quadrature_x(m);
            let pq = local::quadrature_p(m);

            if spec.kind == ModelKind::DickeChain {
                let mut fams: [Vec<TermSpec>; 2] = [Vec::new(), Vec::new()];
                for k in 0..n {
                    let (spec_sites, payload) = if k + 1 < n {
                        let a = local::tensor(&[xq.clone(), z.clone(), id_m.clone()]);
                        let b = local::tensor(&[id_m.clone(), z.clone(), pq.clone()]);
                        (
                            vec![dicke_mode_site(k), dicke_spin_site(k), dicke_mode_site(k + 1)],
                            a.add(&b)?,
                        )
                    } else {
                        // last spin: no mode n+1 under open boundaries
                        (
                            vec![dicke_mode_site(k), dicke_spin_site(k)],
                            local::tensor(&[xq.clone(), z.clone()]),
                        )
                    };
                    fams[k % 2].push((spec_sites, payload));
                }
                let [f0, f1] = fams;
                Ok(TwoFamilyHamiltonian::new("dicke_chain", graph, space, f0, f1, spec.h0, spec.h1)?
                    .with_boundary_note(
                        "open chain: mode n at site 2n, spin n at site 2n+1; \
                         h_{N-1} omits the b_N terms; family 0 = even n, family 1 = odd n",
                    ))
            } else {
                let mut fam = Vec::new();
                for k in 0..n {
                    if k == 0 {
                        fam.push((
                            vec![dicke_mode_site(0), dicke_spin_site(0)],
                            local::tensor(&[xq.clone(), z.clone()]),
                        ));
                    } else {
                        // sites (spin k-1, mode k, spin k)
                        let a = local::tensor(&[id_2.clone(), xq.clone(), z.clone()]);
                        let b = local::tensor(&[z.clone(), pq.clone(), id_2.clone()]);
                        fam.push((
                            vec![dicke_spin_site(k - 1), dicke_mode_site(k), dicke_spin_site(k)],
                            a.add(&b)?,
                        ));
                    }
                }
                Ok(TwoFamilyHamiltonian::new(
                    "dicke_commuting",
                    graph,
                    space,
                    fam,
                    Vec::new(),
                    spec.h0,
                    spec.h1,
                )?
                .with_boundary_note(
                    "open chain: mode n at site 2n, spin n at site 2n+1; h~_0 omits the Z_{-1} term",
                ))
            }
        }
    }
}
