//! Exact small-system dynamics: commutator-norm sweeps, empirical cone
//! velocities and bound verification.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    bounded_reference_bound, closed_form_bound, lr_velocity, series_bound, observable_bound, observable_series_bound, required_order,
    BoundMethod,
};
use crate::chains::{count_chains_dp, ChainCountTable};
use crate::constants::{compute_bound_constants, observable_constants, BoundConstants, ObservableConditions};
use crate::error::{Error, Result};
use crate::model::{noncommuting_adjacency, NormMode, Observable, SiteKind, TwoFamilyHamiltonian, COMMUTATOR_THRESHOLD};
use faer::Mat;

use crate::operator::{block_norm, commutator, decompose, rect_norm, spectral_norm, FullOperator, C64, DENSE_DIM_CAP};

pub const DEFAULT_THRESHOLD: f64 = 1e-3;
pub const MARGIN_SLACK: f64 = 1e-9;
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Index into the sweep's placement list.
    pub placement: usize,
    pub d: usize,
    pub t: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSweep {
    pub model: String,
    pub o_p: String,
    pub o_q: Vec<String>,
    pub distances: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub hilbert_dim: usize,
    /// Ordered by placement, then time.
    pub points: Vec<SweepPoint>,
}

impl SimulationSweep {
    pub fn series(&self, placement: usize) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(move |p| p.placement == placement)
    }
}

/// How `O_Q` enters the norm: as a two-valued diagonal (fast block path) or
/// as a general matrix.
enum Probe {
    TwoLevel { low: Vec<usize>, high: Vec<usize>, gap: f64 },
    Dense(FullOperator),
}

fn probe(q: FullOperator, p_hermitian: bool) -> Probe {
    if p_hermitian && q.is_diagonal() {
        let diag: Vec<f64> = (0..q.dim()).map(|i| q.get(i, i).re).collect();
        let imag_free = (0..q.dim()).all(|i| q.get(i, i).im == 0.0);
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-14 * hi.abs().max(lo.abs()).max(1.0);
        if imag_free && diag.iter().all(|&x| (x - lo).abs() <= tol || (x - hi).abs() <= tol) {
            let (low, high): (Vec<usize>, Vec<usize>) = (0..diag.len()).partition(|&i| (diag[i] - lo).abs() <= tol);
            return Probe::TwoLevel { low, high, gap: hi - lo };
        }
    }
    Probe::Dense(q)
}

/// `||[O_P(t), O_Q]||` for every placement of `O_Q` and every time.
///
/// One eigendecomposition of `H` is shared by all times; times are
/// evaluated in parallel.
pub fn commutator_norm_sweep(
    h: &TwoFamilyHamiltonian,
    op: &Observable,
    placements: &[Observable],
    t_grid: &[f64],
) -> Result<SimulationSweep> {
    sweep_impl(h, op, placements, t_grid, None)
}

/// As [`commutator_norm_sweep`], but measures `||[O_P(t), O_Q] P||` for the
/// projector `P` onto the basis states selected by `mask`.
pub fn restricted_norm_sweep(
    h: &TwoFamilyHamiltonian,
    op: &Observable,
    placements: &[Observable],
    t_grid: &[f64],
    mask: &[bool],
) -> Result<SimulationSweep> {
    if mask.len() != h.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: h.total_dim(),
            found: mask.len(),
        });
    }
    sweep_impl(h, op, placements, t_grid, Some(mask))
}

fn sweep_impl(
    h: &TwoFamilyHamiltonian,
    op: &Observable,
    placements: &[Observable],
    t_grid: &[f64],
    mask: Option<&[bool]>,
) -> Result<SimulationSweep> {
    let dim = h.total_dim();
    if dim > DENSE_DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DENSE_DIM_CAP });
    }
    if t_grid.windows(2).any(|w| !(w[0] <= w[1])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("t_grid must be finite and sorted".into()));
    }
    let distances = placements
        .iter()
        .map(|q| h.graph().region_distance(&op.support, &q.support))
        .collect::<Result<Vec<_>>>()?;

    let decomp = decompose(&h.total_hamiltonian()?)?;
    let p_full = h.embed_observable(op)?;
    let p_hermitian = p_full.hermiticity_error() <= 1e-12 * p_full.max_abs().max(1.0);
    let p_eig = decomp.to_eigenbasis(&p_full)?;
    let probes = placements
        .iter()
        .map(|q| h.embed_observable(q).map(|m| probe(m, p_hermitian && mask.is_none())))
        .collect::<Result<Vec<_>>>()?;
    let cols: Option<Vec<usize>> = mask.map(|m| (0..dim).filter(|&i| m[i]).collect());
    let all_rows: Vec<usize> = (0..dim).collect();

    // Two-level probes only need the block A(t)[low, high] = V_low (Ã∘Φ) V_high†,
    // which beats forming all of A(t) when there are few placements.
    let n = dim as f64;
    let block_cost: f64 = probes
        .iter()
        .map(|pr| match pr {
            Probe::TwoLevel { low, high, .. } => (low.len() as f64 * n * (n + high.len() as f64)) / n.powi(3),
            Probe::Dense(_) => f64::INFINITY,
        })
        .sum();
    if block_cost < 2.0 {
        let rows: Vec<(Mat<C64>, Mat<C64>, f64)> = probes
            .iter()
            .map(|pr| match pr {
                Probe::TwoLevel { low, high, gap } => {
                    (decomp.eigenvector_rows(low), decomp.eigenvector_rows(high), gap.abs())
                }
                Probe::Dense(_) => unreachable!("block path needs two-level probes"),
            })
            .collect();
        let per_t: Vec<Vec<f64>> = t_grid
            .par_iter()
            .map(|&t| {
                let rotated = decomp.phase_rotate(&p_eig, t);
                rows.iter()
                    .map(|(vl, vh, gap)| {
                        let left = vl * &rotated;
                        gap * rect_norm(&(left * vh.adjoint()))
                    })
                    .collect()
            })
            .collect();
        return Ok(assemble(h, op, placements, t_grid, distances, per_t));
    }

    // Without a mask the norm is unitarily invariant, so dense probes are
    // compared in the eigenbasis of H: ||[Ã(t), Q̃]|| with Q̃ = V† Q V.
    let q_eigs: Vec<Option<FullOperator>> = probes
        .iter()
        .map(|pr| match pr {
            Probe::Dense(q) if cols.is_none() => decomp.to_eigenbasis(q).and_then(FullOperator::from_matrix).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    let need_eig = q_eigs.iter().any(Option::is_some);
    let need_full = q_eigs.iter().any(Option::is_none);

    let per_t: Vec<Vec<f64>> = t_grid
        .par_iter()
        .map(|&t| -> Result<Vec<f64>> {
            let a_t = if need_full { Some(decomp.evolve_from_eigenbasis(&p_eig, t)) } else { None };
            let rotated = if need_eig {
                Some(FullOperator::from_matrix(decomp.phase_rotate(&p_eig, t))?)
            } else {
                None
            };
            probes
                .iter()
                .zip(&q_eigs)
                .map(|(pr, q_eig)| match (pr, q_eig, &a_t, &rotated) {
                    (_, Some(qe), _, Some(r)) => Ok(spectral_norm(&commutator(r, qe)?)),
                    (Probe::TwoLevel { low, high, gap }, _, Some(a_t), _) => {
                        Ok(gap.abs() * block_norm(a_t.matrix(), low, high))
                    }
                    (Probe::Dense(q), _, Some(a_t), _) => {
                        let c = commutator(a_t, q)?;
                        Ok(match &cols {
                            Some(cols) => block_norm(c.matrix(), &all_rows, cols),
                            None => spectral_norm(&c),
                        })
                    }
                    _ => unreachable!("evolved operator prepared for every probe kind"),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(assemble(h, op, placements, t_grid, distances, per_t))
}

fn assemble(
    h: &TwoFamilyHamiltonian,
    op: &Observable,
    placements: &[Observable],
    t_grid: &[f64],
    distances: Vec<usize>,
    per_t: Vec<Vec<f64>>,
) -> SimulationSweep {
    let mut points = Vec::with_capacity(placements.len() * t_grid.len());
    for (k, &d) in distances.iter().enumerate() {
        for (ti, &t) in t_grid.iter().enumerate() {
            points.push(SweepPoint {
                placement: k,
                d,
                t,
                norm: per_t[ti][k],
            });
        }
    }
    SimulationSweep {
        model: h.name().to_string(),
        o_p: op.label.clone(),
        o_q: placements.iter().map(|q| q.label.clone()).collect(),
        distances,
        t_grid: t_grid.to_vec(),
        hilbert_dim: h.total_dim(),
        points,
    }
}

/// Basis states of the full space whose total boson occupation is at most
/// `max_total` (site 0 is the least-significant factor).
pub fn low_occupation_mask(h: &TwoFamilyHamiltonian, max_total: usize) -> Vec<bool> {
    let dims = h.sites().dims();
    let kinds = h.sites().kinds();
    (0..h.total_dim())
        .map(|mut idx| {
            let mut total = 0;
            for (s, &d) in dims.iter().enumerate() {
                let level = idx % d;
                idx /= d;
                if kinds[s] == SiteKind::Boson {
                    total += level;
                }
            }
            total <= max_total
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub d: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityEstimate {
    pub threshold: f64,
    pub crossings: Vec<Crossing>,
    pub v_emp: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit `d = v t + c`.
    pub residual: f64,
    pub method: &'static str,
}

/// First threshold crossing per distance (linear interpolation between grid
/// points), then a least-squares line `d = v t + c`.
pub fn extract_velocity(sweep: &SimulationSweep, threshold: f64) -> Result<VelocityEstimate> {
    let mut crossings: Vec<Crossing> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for k in 0..sweep.distances.len() {
        let d = sweep.distances[k];
        if !seen.insert(d) {
            continue;
        }
        let series: Vec<&SweepPoint> = sweep.series(k).collect();
        if let Some(idx) = series.iter().position(|p| p.norm >= threshold) {
            let t = if idx == 0 {
                series[0].t
            } else {
                let (a, b) = (series[idx - 1], series[idx]);
                a.t + (threshold - a.norm) / (b.norm - a.norm) * (b.t - a.t)
            };
            crossings.push(Crossing { d, t });
        }
    }
    if crossings.len() < 3 {
        return Err(Error::ConeNotResolved(format!(
            "{} distance(s) crossed threshold {threshold:e}, need 3",
            crossings.len()
        )));
    }
    let n = crossings.len() as f64;
    let mt = crossings.iter().map(|c| c.t).sum::<f64>() / n;
    let md = crossings.iter().map(|c| c.d as f64).sum::<f64>() / n;
    let stt: f64 = crossings.iter().map(|c| (c.t - mt).powi(2)).sum();
    let std: f64 = crossings.iter().map(|c| (c.t - mt) * (c.d as f64 - md)).sum();
    if stt <= 0.0 {
        return Err(Error::ConeNotResolved("all crossings at the same time".into()));
    }
    let v = std / stt;
    if v < 0.0 {
        return Err(Error::ConeNotResolved(format!("fitted slope {v} is negative")));
    }
    let c = md - v * mt;
    let residual = (crossings
        .iter()
        .map(|x| (x.d as f64 - v * x.t - c).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(VelocityEstimate {
        threshold,
        crossings,
        v_emp: v,
        intercept: c,
        residual,
        method: "threshold crossing + least-squares fit",
    })
}

#[derive(Debug, Clone)]
enum PlacementBound {
    Excluded { reason: String },
    Active {
        obs: ObservableConditions,
        /// Both observables are Hamiltonian terms: use the term bounds.
        term_pair: bool,
        table: Option<ChainCountTable>,
        norm_p: f64,
        norm_q: f64,
    },
}

/// Everything a bound method needs per `O_Q` placement.
#[derive(Debug, Clone)]
pub struct BoundSource {
    pub method: BoundMethod,
    pub consts: BoundConstants,
    pub tol: f64,
    /// Multiplies every bound value; 1 except in harness self-tests.
    pub scale: f64,
    placements: Vec<PlacementBound>,
}

impl BoundSource {
    /// Computes constants, observable conditions and (for the series) chain
    /// tables long enough to certify the tail up to `t_max`.
    ///
    /// Commuting models get the zero-velocity fallback `F_P = F_Q = 1` with
    /// `n_P` counted directly.
    #[allow(clippy::too_many_arguments)]
    pub fn prepare(
        h: &TwoFamilyHamiltonian,
        op: &Observable,
        placements: &[Observable],
        method: BoundMethod,
        lambda: Option<f64>,
        mode: NormMode,
        t_max: f64,
        tol: f64,
    ) -> Result<Self> {
        let consts = compute_bound_constants(h, lambda, mode)?;
        let adj = noncommuting_adjacency(h, mode)?;
        let sites = h.sites();
        let p_local = op.local();
        let z_p: Vec<usize> = h
            .terms()
            .iter()
            .enumerate()
            .filter_map(|(id, t)| match p_local.commutator(&t.local(), sites) {
                Ok(c) if c.norm(mode, sites) > COMMUTATOR_THRESHOLD => Some(Ok(id)),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?;
        let norm_p = spectral_norm(&op.payload);

        let mut out = Vec::with_capacity(placements.len());
        for q in placements {
            let d = h.graph().region_distance(&op.support, &q.support)?;
            let obs = match observable_constants(h, &consts, op, q) {
                Ok(o) => o,
                Err(Error::ConditionViolated { d, r }) => {
                    out.push(PlacementBound::Excluded {
                        reason: format!("condition (i) violated: d = {d} <= R = {r}"),
                    });
                    continue;
                }
                Err(Error::CommutingSystem) => ObservableConditions {
                    f_p: 1.0,
                    f_q: 1.0,
                    n_p: z_p.len(),
                    d,
                    r: consts.r,
                },
                Err(e) => return Err(e),
            };
            let term_pair = op.term.is_some() && q.term.is_some();
            let table = if method == BoundMethod::SeriesExactCn && term_pair {
                let n_max = required_order(&consts, t_max, tol, 1.0)?;
                Some(count_chains_dp(&adj, op.term.unwrap_or_default(), &q.support, n_max)?)
            } else if method == BoundMethod::SeriesExactCn {
                let pre = crate::bounds::observable_prefactor(&obs);
                let n_max = required_order(&consts, t_max, tol, pre.max(1.0))?;
                let mut acc: Option<ChainCountTable> = None;
                for &s in &z_p {
                    let tab = count_chains_dp(&adj, s, &q.support, n_max)?;
                    acc = Some(match acc {
                        Some(a) => a.pointwise_max(&tab),
                        None => tab,
                    });
                }
                acc
            } else {
                None
            };
            out.push(PlacementBound::Active {
                obs,
                term_pair,
                table,
                norm_p,
                norm_q: spectral_norm(&q.payload),
            });
        }
        Ok(Self {
            method,
            consts,
            tol,
            scale: 1.0,
            placements: out,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn placement_count(&self) -> usize {
        self.placements.len()
    }

    /// Bound value for placement `k` at time `t`; `None` when the placement
    /// is excluded.
    pub fn value(&self, k: usize, t: f64) -> Result<Option<f64>> {
        let pb = self
            .placements
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("no placement {k}")))?;
        let PlacementBound::Active { obs, term_pair, table, norm_p, norm_q } = pb else {
            return Ok(None);
        };
        let c = &self.consts;
        let b = match self.method {
            BoundMethod::ClosedForm if *term_pair => closed_form_bound(c, t, obs.d),
            BoundMethod::SeriesExactCn if *term_pair => match table {
                Some(tab) => series_bound(c, tab, t, self.tol)?,
                None => 0.0,
            },
            BoundMethod::ClosedForm | BoundMethod::Observable => observable_bound(c, obs, t, obs.d)?,
            BoundMethod::SeriesExactCn => match table {
                Some(tab) => observable_series_bound(c, obs, tab, t, self.tol)?,
                // no term touches O_P: it is conserved
                None => 0.0,
            },
            BoundMethod::BoundedReference => bounded_reference_bound(*norm_p, *norm_q, c, obs.n_p, t, obs.d),
        };
        Ok(Some(b * self.scale))
    }

    pub fn exclusion(&self, k: usize) -> Option<&str> {
        match self.placements.get(k) {
            Some(PlacementBound::Excluded { reason }) => Some(reason),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginPoint {
    pub d: usize,
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub placement: String,
    pub d: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub model: String,
    pub method: BoundMethod,
    pub o_p: String,
    pub passed: bool,
    pub slack: f64,
    pub min_margin: Option<f64>,
    pub negative_margins: Vec<MarginPoint>,
    pub excluded: Vec<Exclusion>,
    /// Measured norms nonincreasing in d at every time (data sanity only).
    pub monotone_in_d: bool,
    pub v_lr: f64,
    pub velocity: Option<VelocityEstimate>,
    pub velocity_note: Option<String>,
    pub constants: BoundConstants,
    pub points: Vec<MarginPoint>,
}

/// Compares every sampled `||[O_P(t), O_Q]||` against the bound; passes iff
/// all margins are at least `-1e-9`.
pub fn verify_bound(sweep: &SimulationSweep, source: &BoundSource) -> Result<VerificationReport> {
    if source.placement_count() != sweep.distances.len() {
        return Err(Error::InvalidArgument(format!(
            "bound source has {} placements, sweep has {}",
            source.placement_count(),
            sweep.distances.len()
        )));
    }
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for (k, &d) in sweep.distances.iter().enumerate() {
        if let Some(reason) = source.exclusion(k) {
            excluded.push(Exclusion {
                placement: sweep.o_q[k].clone(),
                d,
                reason: reason.to_string(),
            });
            continue;
        }
        for p in sweep.series(k) {
            let bound = source.value(k, p.t)?.unwrap_or(f64::INFINITY);
            points.push(MarginPoint {
                d,
                t: p.t,
                measured: p.norm,
                bound,
                margin: bound - p.norm,
            });
        }
    }
    let negative_margins: Vec<MarginPoint> = points.iter().filter(|p| p.margin < -MARGIN_SLACK).cloned().collect();
    let min_margin = points.iter().map(|p| p.margin).reduce(f64::min);

    let (velocity, velocity_note) = match extract_velocity(sweep, DEFAULT_THRESHOLD) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(VerificationReport {
        model: sweep.model.clone(),
        method: source.method,
        o_p: sweep.o_p.clone(),
        passed: negative_margins.is_empty(),
        slack: MARGIN_SLACK,
        min_margin,
        negative_margins,
        excluded,
        monotone_in_d: monotone_in_d(sweep, 1e-9),
        v_lr: lr_velocity(&source.consts),
        velocity,
        velocity_note,
        constants: source.consts.clone(),
        points,
    })
}

/// Whether, at every time, measured norms do not grow with distance.
pub fn monotone_in_d(sweep: &SimulationSweep, tol: f64) -> bool {
    let mut order: Vec<usize> = (0..sweep.distances.len()).collect();
    order.sort_by_key(|&k| sweep.distances[k]);
    let nt = sweep.t_grid.len();
    (0..nt).all(|ti| {
        order.windows(2).all(|w| {
            let a = sweep.points[w[0] * nt + ti].norm;
            let b = sweep.points[w[1] * nt + ti].norm;
            sweep.distances[w[0]] == sweep.distances[w[1]] || b <= a + tol
        })
    })
}
