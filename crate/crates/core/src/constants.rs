//! Constants consumed by the bounds: K, Q, ν, R, γ, ξ, λ and the
//! prefactors M, M̃, M̃̃, plus the observable conditions F_P, F_Q, n_P.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    noncommuting_adjacency, NoncommutingAdjacency, NormMode, Observable, TwoFamilyHamiltonian,
    COMMUTATOR_THRESHOLD, RANGE_DEFINITION,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundConstants {
    pub h0: f64,
    pub h1: f64,
    /// max h_a h_b ||[Φ_a^i, Φ_b^j]||
    pub k: f64,
    /// Q used by the bounds. Equals `q_measured` unless that vanishes while
    /// K > 0, in which case any positive value bounds the nested
    /// commutators and √K is used.
    pub q: f64,
    /// max h_a h_b h_c ||[[Φ_a^i, Φ_b^j], Φ_c^k]||
    pub q_measured: f64,
    pub nu: usize,
    pub r: usize,
    pub gamma: f64,
    pub xi: f64,
    pub lambda: f64,
    pub m: f64,
    pub m_tilde: f64,
    pub m_tilde_tilde: f64,
    /// max h_a ||Φ_a^i||, the uniform bound of the terms themselves.
    pub k_tilde: f64,
    pub zero_velocity: bool,
    pub norm_mode: NormMode,
    pub range_definition: &'static str,
}

impl BoundConstants {
    /// Assembles constants from already-known K, Q, ν and R. λ defaults to ξ.
    pub fn from_parts(
        h0: f64,
        h1: f64,
        k: f64,
        q: f64,
        nu: usize,
        r: usize,
        lambda: Option<f64>,
    ) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("R must be positive".into()));
        }
        for (name, v) in [("h0", h0), ("h1", h1), ("K", k), ("Q", q)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be a nonnegative real")));
            }
        }
        let xi = 1.0 / r as f64;
        let lambda = lambda.unwrap_or(xi);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        let zero_velocity = k <= COMMUTATOR_THRESHOLD;
        let q_eff = if !zero_velocity && q <= COMMUTATOR_THRESHOLD { k.sqrt() } else { q };
        let m = prefactor_m(h0, h1, k, q_eff);
        let m_tilde = 1.0;
        Ok(Self {
            h0,
            h1,
            k,
            q: q_eff,
            q_measured: q,
            nu,
            r,
            gamma: std::f64::consts::SQRT_2 * nu as f64,
            xi,
            lambda,
            m,
            m_tilde,
            m_tilde_tilde: m_tilde * m,
            k_tilde: 0.0,
            zero_velocity,
            norm_mode: NormMode::Full,
            range_definition: RANGE_DEFINITION,
        })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        Ok(Self {
            lambda,
            ..self.clone()
        })
    }

    /// √(2 h0 h1 K), the per-order growth rate of the series bound.
    pub fn series_rate(&self) -> f64 {
        (2.0 * self.h0 * self.h1 * self.k).sqrt()
    }
}

/// M = √2 · max{h0/h1, h1/h0} · max{1/K, 1} · max{√K/Q, 1}.
///
/// Degenerate factors (a vanishing coupling, K = 0) are taken as 1: every
/// series term they would multiply is itself zero.
pub fn prefactor_m(h0: f64, h1: f64, k: f64, q: f64) -> f64 {
    let ratio = if h0 > 0.0 && h1 > 0.0 { (h0 / h1).max(h1 / h0) } else { 1.0 };
    let k_factor = if k > 0.0 { (1.0 / k).max(1.0) } else { 1.0 };
    let q_factor = if k > 0.0 && q > 0.0 { (k.sqrt() / q).max(1.0) } else { 1.0 };
    std::f64::consts::SQRT_2 * ratio * k_factor * q_factor
}

/// Measures every constant of a validated Hamiltonian. `lambda` defaults to ξ.
pub fn compute_bound_constants(
    h: &TwoFamilyHamiltonian,
    lambda: Option<f64>,
    mode: NormMode,
) -> Result<BoundConstants> {
    let adj = noncommuting_adjacency(h, mode)?;
    compute_with_adjacency(h, &adj, lambda, mode)
}

pub fn compute_with_adjacency(
    h: &TwoFamilyHamiltonian,
    adj: &NoncommutingAdjacency,
    lambda: Option<f64>,
    mode: NormMode,
) -> Result<BoundConstants> {
    let sites = h.sites();
    let terms = h.terms();
    let locals: Vec<_> = terms.iter().map(|t| t.local()).collect();
    let scale = |id: usize| h.coupling(terms[id].family);

    let mut k = 0.0f64;
    let mut q = 0.0f64;
    for i in 0..terms.len() {
        for &j in adj.neighbors(i) {
            if j < i {
                continue;
            }
            let c = locals[i].commutator(&locals[j], sites)?;
            let hij = scale(i) * scale(j);
            k = k.max(hij * c.norm(mode, sites));
            for (l, t) in terms.iter().enumerate() {
                if !c.sites().iter().any(|&s| t.support.contains(s)) {
                    continue;
                }
                let cc = c.commutator(&locals[l], sites)?;
                q = q.max(hij * scale(l) * cc.norm(mode, sites));
            }
        }
    }
    let k_tilde = locals
        .iter()
        .enumerate()
        .map(|(id, lo)| scale(id) * lo.norm(mode, sites))
        .fold(0.0, f64::max);

    let mut consts = BoundConstants::from_parts(
        h.h0(),
        h.h1(),
        k,
        q,
        adj.max_degree(),
        h.range(),
        lambda,
    )?;
    consts.k_tilde = k_tilde;
    consts.norm_mode = mode;
    Ok(consts)
}

/// Quantities in the local observable conditions (i)-(iii).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableConditions {
    pub f_p: f64,
    pub f_q: f64,
    pub n_p: usize,
    pub d: usize,
    pub r: usize,
}

/// Measures F_P, F_Q and n_P for a pair of observables.
///
/// Commutators are taken against the bare payloads Φ_i, so F_P = 1 when O_P
/// is itself a term and the couplings are 1.
pub fn observable_constants(
    h: &TwoFamilyHamiltonian,
    consts: &BoundConstants,
    op: &Observable,
    oq: &Observable,
) -> Result<ObservableConditions> {
    let d = h.graph().region_distance(&op.support, &oq.support)?;
    if d <= consts.r {
        return Err(Error::ConditionViolated { d, r: consts.r });
    }
    if consts.zero_velocity {
        return Err(Error::CommutingSystem);
    }
    let mode = consts.norm_mode;
    let sites = h.sites();
    let (p_local, q_local) = (op.local(), oq.local());
    let terms = h.terms();
    let locals: Vec<_> = terms.iter().map(|t| t.local()).collect();

    let mut n_p = 0;
    let mut max_p = 0.0f64;
    let mut max_q = 0.0f64;
    for lo in &locals {
        let np = p_local.commutator(lo, sites)?.norm(mode, sites);
        if np > COMMUTATOR_THRESHOLD {
            n_p += 1;
        }
        max_p = max_p.max(np);
        max_q = max_q.max(q_local.commutator(lo, sites)?.norm(mode, sites));
    }

    let adj = noncommuting_adjacency(h, mode)?;
    let mut max_qq = 0.0f64;
    for i in 0..terms.len() {
        for &j in adj.neighbors(i) {
            let c = locals[i].commutator(&locals[j], sites)?;
            if !c.sites().iter().any(|&s| oq.support.contains(s)) {
                continue;
            }
            max_qq = max_qq.max(q_local.commutator(&c, sites)?.norm(mode, sites));
        }
    }

    let f_p = max_p / consts.k;
    let f_q = (max_q / consts.k).max(if consts.q > 0.0 { max_qq / consts.q } else { 0.0 });
    Ok(ObservableConditions {
        f_p,
        f_q,
        n_p,
        d,
        r: consts.r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Family, ModelSpec};

    fn tfim(n: usize, j: f64, g: f64) -> TwoFamilyHamiltonian {
        build_model(&ModelSpec::tfim(n, j, g)).unwrap()
    }

    #[test]
    fn tfim_constants() {
        let c = compute_bound_constants(&tfim(5, 1.0, 1.0), None, NormMode::Full).unwrap();
        assert!((c.k - 2.0).abs() < 1e-12);
        assert!((c.q - 4.0).abs() < 1e-12);
        assert_eq!(c.nu, 2);
        assert_eq!(c.r, 2);
        assert!((c.gamma - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.xi, 0.5);
        assert_eq!(c.lambda, 0.5);
        assert!((c.m - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(c.m_tilde, 1.0);
        assert_eq!(c.m_tilde_tilde, c.m_tilde * c.m);
        assert!(!c.zero_velocity);
    }

    #[test]
    fn coupling_scaling() {
        let c = compute_bound_constants(&tfim(5, 3.0, 3.0), None, NormMode::Full).unwrap();
        assert!((c.k - 18.0).abs() < 1e-10);
        assert!((c.q_measured - 108.0).abs() < 1e-9);
    }

    #[test]
    fn commuting_model_is_zero_velocity() {
        let h = build_model(&ModelSpec::commuting_ising(5, 1.0)).unwrap();
        let c = compute_bound_constants(&h, None, NormMode::Full).unwrap();
        assert_eq!(c.k, 0.0);
        assert_eq!(c.nu, 0);
        assert!(c.zero_velocity);
        assert!(c.m.is_finite());
    }

    #[test]
    fn dicke_interior_constants_are_truncation_free() {
        for m in 2..=4 {
            let h = build_model(&ModelSpec::dicke(4, m, 1.0)).unwrap();
            let c = compute_bound_constants(&h, None, NormMode::InteriorProjected).unwrap();
            assert!((c.k - 2.0).abs() < 1e-9, "m={m}: K={}", c.k);
            assert!(c.q_measured < 1e-9);
            assert!((c.q - 2f64.sqrt()).abs() < 1e-9);
            assert_eq!(c.nu, 2);
            assert_eq!(c.r, 3);
            let full = compute_bound_constants(&h, None, NormMode::Full).unwrap();
            assert!((full.k - 2.0 * (m as f64 - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_lambda() {
        assert!(compute_bound_constants(&tfim(3, 1.0, 1.0), Some(0.0), NormMode::Full).is_err());
        assert!(BoundConstants::from_parts(1.0, 1.0, 2.0, 4.0, 2, 2, Some(-1.0)).is_err());
    }

    #[test]
    fn prefactor_examples() {
        assert!((prefactor_m(1.0, 1.0, 2.0, 4.0) - 2f64.sqrt()).abs() < 1e-15);
        // h0/h1 = 2, K = 1/2 -> 1/K = 2, sqrt(K)/Q with Q = 0.1
        let expected = 2f64.sqrt() * 2.0 * 2.0 * (0.5f64.sqrt() / 0.1);
        assert!((prefactor_m(2.0, 1.0, 0.5, 0.1) - expected).abs() < 1e-12);
    }

    #[test]
    fn observable_conditions_tfim() {
        let h = tfim(10, 1.0, 1.0);
        let c = compute_bound_constants(&h, None, NormMode::Full).unwrap();
        let op = Observable::named(&h, "z", 1).unwrap();
        let oq = Observable::named(&h, "z", 5).unwrap();
        let oc = observable_constants(&h, &c, &op, &oq).unwrap();
        // only the bonds (0,1) and (1,2) fail to commute with Z_1
        assert_eq!(oc.n_p, 2);
        assert_eq!(oc.d, 4);
        assert!((oc.f_p - 1.0).abs() < 1e-12);
        assert!((oc.f_q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observable_equal_to_term_has_unit_fp() {
        let h = tfim(8, 1.0, 1.0);
        let c = compute_bound_constants(&h, None, NormMode::Full).unwrap();
        let op = Observable::from_term(&h, h.term_id(Family::Zero, 0).unwrap()).unwrap();
        let oq = Observable::named(&h, "z", 6).unwrap();
        let oc = observable_constants(&h, &c, &op, &oq).unwrap();
        assert!((oc.f_p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_i_enforced() {
        let h = tfim(6, 1.0, 1.0);
        let c = compute_bound_constants(&h, None, NormMode::Full).unwrap();
        let op = Observable::named(&h, "z", 1).unwrap();
        for q in [1, 2, 3] {
            let oq = Observable::named(&h, "z", q).unwrap();
            assert!(matches!(
                observable_constants(&h, &c, &op, &oq),
                Err(Error::ConditionViolated { .. })
            ));
        }
    }

    #[test]
    fn commuting_system_has_no_observable_constants() {
        let h = build_model(&ModelSpec::commuting_ising(8, 1.0)).unwrap();
        let c = compute_bound_constants(&h, None, NormMode::Full).unwrap();
        let op = Observable::named(&h, "z", 1).unwrap();
        let oq = Observable::named(&h, "z", 6).unwrap();
        assert!(matches!(
            observable_constants(&h, &c, &op, &oq),
            Err(Error::CommutingSystem)
        ));
    }
}
