//! Bound evaluators: the chain series, its closed form, the observable
//! version, the bounded-Hamiltonian reference and the cone velocity.

use serde::Serialize;

use crate::chains::{to_f64, ChainCountTable};
use crate::constants::{BoundConstants, ObservableConditions};
use crate::error::{Error, Result};
use crate::model::{NormMode, TwoFamilyHamiltonian};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    SeriesExactCn,
    ClosedForm,
    Observable,
    BoundedReference,
}

impl BoundMethod {
    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::SeriesExactCn => "series_exact_cn",
            BoundMethod::ClosedForm => "closed_form",
            BoundMethod::Observable => "observable",
            BoundMethod::BoundedReference => "bounded_reference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub d: usize,
    /// (t, B(t, d))
    pub samples: Vec<(f64, f64)>,
    pub method: BoundMethod,
}

impl BoundCurve {
    pub fn from_fn(
        method: BoundMethod,
        d: usize,
        ts: &[f64],
        mut f: impl FnMut(f64) -> Result<f64>,
    ) -> Result<Self> {
        let samples = ts
            .iter()
            .map(|&t| f(t).map(|b| (t, b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d, samples, method })
    }
}

/// Smallest truncation order N with `prefactor · M · Σ_{n>N} x^n/n! < tol`
/// for the envelope `x = √2 ν · √(2 h0 h1 K) · t`.
pub fn required_order(consts: &BoundConstants, t: f64, tol: f64, prefactor: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let x = std::f64::consts::SQRT_2 * consts.nu as f64 * consts.series_rate() * t.abs();
    let scale = prefactor * consts.m;
    if x == 0.0 || scale == 0.0 {
        return Ok(0);
    }
    // term = x^(N+1)/(N+1)!, tail <= term / (1 - x/(N+2)) once N+2 > x
    let mut n = 0usize;
    let mut term = x;
    loop {
        let ratio = x / (n as f64 + 2.0);
        if ratio < 1.0 {
            let tail = scale * term / (1.0 - ratio);
            if tail < tol {
                return Ok(n);
            }
        }
        n += 1;
        term *= x / (n as f64 + 1.0);
        if n > 100_000 {
            return Err(Error::InvalidArgument(format!(
                "series tail does not reach {tol:e} at t = {t}"
            )));
        }
    }
}

fn tail_bound(consts: &BoundConstants, t: f64, n: usize, prefactor: f64) -> f64 {
    let x = std::f64::consts::SQRT_2 * consts.nu as f64 * consts.series_rate() * t.abs();
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    for k in 1..=n + 1 {
        term *= x / k as f64;
    }
    prefactor * consts.m * term / (1.0 - x / (n as f64 + 2.0))
}

/// `M Σ_n √(2 h0 h1 K)^n |t|^n / n! · c_n`, truncated where the certified
/// tail drops below `tol`; returns partial sum + tail bound.
///
/// Uses the weighted chain counts, the multiplicity the iterated recursion
/// actually produces.
pub fn series_bound(
    consts: &BoundConstants,
    counts: &ChainCountTable,
    t: f64,
    tol: f64,
) -> Result<f64> {
    series_bound_scaled(consts, counts, t, tol, 1.0)
}

fn series_bound_scaled(
    consts: &BoundConstants,
    counts: &ChainCountTable,
    t: f64,
    tol: f64,
    prefactor: f64,
) -> Result<f64> {
    let n_req = required_order(consts, t, tol, prefactor)?;
    if n_req > counts.n_max() {
        return Err(Error::InsufficientChainTable {
            available: counts.n_max(),
            required: n_req,
        });
    }
    let y = consts.series_rate() * t.abs();
    let mut power = 1.0; // y^n / n!
    let mut sum = 0.0;
    for n in 0..=n_req {
        if n > 0 {
            power *= y / n as f64;
        }
        let c = to_f64(&counts.weighted[n]);
        if c > 0.0 {
            sum += power * c;
        }
    }
    let tail = if n_req == 0 && y == 0.0 { 0.0 } else { tail_bound(consts, t, n_req, prefactor) };
    Ok(prefactor * consts.m * sum + tail)
}

/// `M̃̃ exp(2 √(h0 h1 K) γ e^{λ/ξ} t - λ d)`.
pub fn closed_form_bound(consts: &BoundConstants, t: f64, d: usize) -> f64 {
    let rate = 2.0 * (consts.h0 * consts.h1 * consts.k).sqrt() * consts.gamma * (consts.lambda / consts.xi).exp();
    consts.m_tilde_tilde * (rate * t - consts.lambda * d as f64).exp()
}

/// `v_LR = 2 (γ/ξ) e √(h0 h1 K)`.
pub fn lr_velocity(consts: &BoundConstants) -> f64 {
    2.0 * consts.gamma / consts.xi * std::f64::consts::E * (consts.h0 * consts.h1 * consts.k).sqrt()
}

/// Minimizes the cone slope coefficient `e^{λ/ξ}/λ` over λ > 0 by golden
/// section search on its logarithm. Returns `(λ*, v_min)`.
pub fn optimize_lambda(consts: &BoundConstants) -> Result<(f64, f64)> {
    let xi = consts.xi;
    if !(xi > 0.0 && consts.gamma > 0.0) {
        return Err(Error::InvalidArgument("optimize_lambda needs γ, ξ > 0".into()));
    }
    let objective = |l: f64| l / xi - l.ln();

    // bracket: expand geometrically until the objective rises on both ends
    let (mut lo, mut mid, mut hi) = (0.5, 1.0, 2.0);
    for _ in 0..2000 {
        let (flo, fmid, fhi) = (objective(lo), objective(mid), objective(hi));
        if fmid <= flo && fmid <= fhi {
            break;
        }
        if flo < fmid {
            hi = mid;
            mid = lo;
            lo *= 0.5;
        } else {
            lo = mid;
            mid = hi;
            hi *= 2.0;
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while (b - a) > 1e-13 * (a + b) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let lambda_star = 0.5 * (a + b);
    let slope = (lambda_star / xi).exp() / lambda_star;
    let v_min = 2.0 * (consts.h0 * consts.h1 * consts.k).sqrt() * consts.gamma * slope;
    Ok((lambda_star, v_min))
}

/// `F_P F_Q n_P (n_P + 1) M̃̃ exp(...)`: the closed-form bound for general
/// observables.
pub fn observable_bound(
    consts: &BoundConstants,
    obs: &ObservableConditions,
    t: f64,
    d: usize,
) -> Result<f64> {
    if d <= consts.r {
        return Err(Error::ConditionViolated { d, r: consts.r });
    }
    Ok(observable_prefactor(obs) * closed_form_bound(consts, t, d))
}

pub fn observable_prefactor(obs: &ObservableConditions) -> f64 {
    let n = obs.n_p as f64;
    obs.f_p * obs.f_q * n * (n + 1.0)
}

/// The observable prefactor applied to the chain series, with chain counts
/// taken from the worst start term touching O_P.
pub fn observable_series_bound(
    consts: &BoundConstants,
    obs: &ObservableConditions,
    counts: &ChainCountTable,
    t: f64,
    tol: f64,
) -> Result<f64> {
    if obs.d <= consts.r {
        return Err(Error::ConditionViolated { d: obs.d, r: consts.r });
    }
    let pre = observable_prefactor(obs);
    if pre == 0.0 {
        return Ok(0.0);
    }
    series_bound_scaled(consts, counts, t, tol, pre)
}

/// Reference bound for bounded terms and observables:
/// `||O_P|| ||O_Q|| n_P M̃̃ exp(2 √(h0 h1) γ e^{λ/ξ} t - λ d)`.
pub fn bounded_reference_bound(
    norm_p: f64,
    norm_q: f64,
    consts: &BoundConstants,
    n_p: usize,
    t: f64,
    d: usize,
) -> f64 {
    let rate = 2.0 * (consts.h0 * consts.h1).sqrt() * consts.gamma * (consts.lambda / consts.xi).exp();
    norm_p * norm_q * n_p as f64 * consts.m_tilde_tilde * (rate * t - consts.lambda * d as f64).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub k_tilde: f64,
    pub k: f64,
    pub q: f64,
    pub k_limit: f64,
    pub q_limit: f64,
    pub k_margin: f64,
    pub q_margin: f64,
    pub passed: bool,
}

/// Checks `K <= 2 K̃²` and `Q <= 4 K̃³` for measured (full-norm) constants.
pub fn bounded_implies_cb_check(h: &TwoFamilyHamiltonian) -> Result<BoundednessReport> {
    let c = crate::constants::compute_bound_constants(h, None, NormMode::Full)?;
    Ok(boundedness_report(c.k_tilde, c.k, c.q_measured))
}

pub fn boundedness_report(k_tilde: f64, k: f64, q: f64) -> BoundednessReport {
    let k_limit = 2.0 * k_tilde * k_tilde;
    let q_limit = 4.0 * k_tilde.powi(3);
    let slack = |limit: f64| 1e-12 * limit.max(1.0);
    BoundednessReport {
        k_tilde,
        k,
        q,
        k_limit,
        q_limit,
        k_margin: k_limit - k,
        q_margin: q_limit - q,
        passed: k <= k_limit + slack(k_limit) && q <= q_limit + slack(q_limit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::count_chains_dp;
    use crate::constants::compute_bound_constants;
    use crate::graph::SupportRegion;
    use crate::model::{build_model, noncommuting_adjacency, Family, ModelSpec};

    fn tfim_consts() -> BoundConstants {
        BoundConstants::from_parts(1.0, 1.0, 2.0, 4.0, 2, 2, None).unwrap()
    }

    #[test]
    fn velocity_value() {
        let v = lr_velocity(&tfim_consts());
        assert!((v - 16.0 * std::f64::consts::E).abs() < 1e-12);
        assert!((v - 43.49).abs() < 0.01);
        let zero = BoundConstants::from_parts(1.0, 1.0, 0.0, 0.0, 0, 2, None).unwrap();
        assert_eq!(lr_velocity(&zero), 0.0);
    }

    #[test]
    fn velocity_scales_with_coupling_products() {
        // K carries h_a h_b, so doubling both couplings multiplies
        // sqrt(h0 h1 K) by four
        let h1 = build_model(&ModelSpec::tfim(6, 1.0, 1.0)).unwrap();
        let h2 = build_model(&ModelSpec::tfim(6, 2.0, 2.0)).unwrap();
        let v1 = lr_velocity(&compute_bound_constants(&h1, None, NormMode::Full).unwrap());
        let v2 = lr_velocity(&compute_bound_constants(&h2, None, NormMode::Full).unwrap());
        assert!((v2 / v1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_structure() {
        let c = tfim_consts();
        // t = 0: M̃̃ e^{-λ d}
        assert!((closed_form_bound(&c, 0.0, 6) - c.m_tilde_tilde * (-3.0f64).exp()).abs() < 1e-15);
        // rate 8e per unit time at λ = ξ
        let ratio = closed_form_bound(&c, 1.0, 4) / closed_form_bound(&c, 0.0, 4);
        assert!((ratio.ln() - 8.0 * std::f64::consts::E).abs() < 1e-10);
        // K = 0: time independent
        let z = BoundConstants::from_parts(1.0, 1.0, 0.0, 0.0, 0, 2, None).unwrap();
        assert_eq!(closed_form_bound(&z, 5.0, 3), closed_form_bound(&z, 0.0, 3));
        // decay rate in d is exactly λ
        let r = closed_form_bound(&c, 0.7, 5) / closed_form_bound(&c, 0.7, 6);
        assert!((r.ln() - c.lambda).abs() < 1e-12);
    }

    #[test]
    fn lambda_optimum() {
        for xi_r in [1usize, 2] {
            let c = BoundConstants::from_parts(1.0, 1.0, 2.0, 4.0, 2, xi_r, None).unwrap();
            let (l, v) = optimize_lambda(&c).unwrap();
            assert!((l - c.xi).abs() <= 1e-6 * c.xi);
            assert!((v - lr_velocity(&c)).abs() <= 1e-9 * v);
        }
    }

    #[test]
    fn series_edge_cases() {
        let h = build_model(&ModelSpec::tfim(6, 1.0, 1.0)).unwrap();
        let c = compute_bound_constants(&h, None, NormMode::Full).unwrap();
        let adj = noncommuting_adjacency(&h, NormMode::Full).unwrap();
        let start = h.term_id(Family::Zero, 0).unwrap();
        let target = SupportRegion::new(h.graph(), [4]).unwrap();
        let table = count_chains_dp(&adj, start, &target, 80).unwrap();
        assert_eq!(series_bound(&c, &table, 0.0, 1e-12).unwrap(), 0.0);

        let near = SupportRegion::new(h.graph(), [1]).unwrap();
        let t2 = count_chains_dp(&adj, start, &near, 4).unwrap();
        assert_eq!(series_bound(&c, &t2, 0.0, 1e-12).unwrap(), c.m);

        let short = count_chains_dp(&adj, start, &target, 3).unwrap();
        assert!(matches!(
            series_bound(&c, &short, 1.0, 1e-9),
            Err(Error::InsufficientChainTable { available: 3, .. })
        ));

        // series with exact counts sits under the closed form
        let d = h.graph().region_distance(&h.term(start).unwrap().support, &target).unwrap();
        for &t in &[0.1, 0.5, 1.0, 2.0] {
            let s = series_bound(&c, &table, t, 1e-12).unwrap();
            assert!(s <= closed_form_bound(&c, t, d), "t={t}");
        }
    }

    #[test]
    fn commuting_series_vanishes() {
        let h = build_model(&ModelSpec::commuting_ising(6, 1.0)).unwrap();
        let c = compute_bound_constants(&h, None, NormMode::Full).unwrap();
        let adj = noncommuting_adjacency(&h, NormMode::Full).unwrap();
        let target = SupportRegion::new(h.graph(), [5]).unwrap();
        let table = count_chains_dp(&adj, 0, &target, 2).unwrap();
        for &t in &[0.0, 1.0, 10.0] {
            assert_eq!(series_bound(&c, &table, t, 1e-12).unwrap(), 0.0);
        }
    }

    #[test]
    fn observable_bound_cases() {
        let c = tfim_consts();
        let obs = ObservableConditions { f_p: 1.0, f_q: 1.0, n_p: 2, d: 4, r: 2 };
        let b = observable_bound(&c, &obs, 0.3, 4).unwrap();
        assert!((b - 6.0 * closed_form_bound(&c, 0.3, 4)).abs() < 1e-12 * b);
        let frozen = ObservableConditions { n_p: 0, ..obs.clone() };
        assert_eq!(observable_bound(&c, &frozen, 2.0, 4).unwrap(), 0.0);
        assert!(matches!(observable_bound(&c, &obs, 0.3, 2), Err(Error::ConditionViolated { .. })));
    }

    #[test]
    fn reference_bound_rates() {
        let c = tfim_consts();
        assert!((bounded_reference_bound(1.0, 1.0, &c, 2, 0.0, 4) - 2.0 * c.m_tilde_tilde * (-2.0f64).exp()).abs() < 1e-15);
        let rate = |f: &dyn Fn(f64) -> f64| (f(1.0) / f(0.0)).ln();
        let obs = ObservableConditions { f_p: 1.0, f_q: 1.0, n_p: 2, d: 4, r: 2 };
        let r19 = rate(&|t| observable_bound(&c, &obs, t, 4).unwrap());
        let r21 = rate(&|t| bounded_reference_bound(1.0, 1.0, &c, 2, t, 4));
        assert!((r19 / r21 - c.k.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boundedness_tfim_saturates() {
        let h = build_model(&ModelSpec::tfim(6, 1.0, 1.0)).unwrap();
        let r = bounded_implies_cb_check(&h).unwrap();
        assert!(r.passed);
        assert!(r.k_margin.abs() < 1e-12 && r.q_margin.abs() < 1e-12);
        let h3 = build_model(&ModelSpec::tfim(6, 3.0, 3.0)).unwrap();
        let r3 = bounded_implies_cb_check(&h3).unwrap();
        assert!(r3.passed);
        assert!((r3.k - 18.0).abs() < 1e-10);
        assert!((r3.k_limit - 18.0).abs() < 1e-10);
        let r0 = boundedness_report(0.0, 0.0, 0.0);
        assert!(r0.passed);
    }

    #[test]
    fn required_order_grows_with_time() {
        let c = tfim_consts();
        let a = required_order(&c, 0.5, 1e-9, 1.0).unwrap();
        let b = required_order(&c, 3.0, 1e-9, 1.0).unwrap();
        assert!(a < b);
        assert_eq!(required_order(&c, 0.0, 1e-9, 1.0).unwrap(), 0);
    }
}
