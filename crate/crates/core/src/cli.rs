//! Command dispatch for the `lrlab` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::{lr_velocity, optimize_lambda, BoundCurve};
use crate::chains::count_chains_dp;
use crate::config::{ObservableSpec, RunConfig};
use crate::constants::{compute_bound_constants, BoundConstants};
use crate::dynamics::{commutator_norm_sweep, extract_velocity, verify_bound, BoundSource, VelocityEstimate, VerificationReport};
use crate::error::{Error, Result};
use crate::graph::SupportRegion;
use crate::model::{build_model, noncommuting_adjacency, validate_two_family, Family, Observable, TwoFamilyHamiltonian};
use crate::report::{chain_table, curve_table, emit_report, margins_table, sweep_table, Artifact, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Constants,
    Chains,
    Bound,
    Simulate,
    Verify,
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "check" => Command::Check,
            "constants" => Command::Constants,
            "chains" => Command::Chains,
            "bound" => Command::Bound,
            "simulate" => Command::Simulate,
            "verify" => Command::Verify,
            other => return Err(Error::InvalidArgument(format!("unknown command \"{other}\""))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Overrides the config's λ.
    pub lambda: Option<f64>,
    /// Overrides the config's output directory.
    pub out: Option<PathBuf>,
    /// Multiplies every bound value in `verify`; a harness self-test hook.
    pub bound_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            lambda: None,
            out: None,
            bound_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// 0 when every checked invariant holds, 1 otherwise.
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

/// Exit code for an error raised before or during a run: always a usage or
/// I/O problem.
pub const EXIT_USAGE: i32 = 2;

pub fn resolve_observable(h: &TwoFamilyHamiltonian, spec: &ObservableSpec) -> Result<Observable> {
    if spec.is_term() {
        let family = match spec.family {
            Some(0) => Family::Zero,
            _ => Family::One,
        };
        Observable::from_term(h, h.term_id(family, spec.index.unwrap_or_default())?)
    } else {
        Observable::named(h, &spec.kind, spec.site.unwrap_or_default())
    }
}

/// O_P plus the O_Q placements: the configured list, or by default the same
/// kind of observable at every distance beyond R.
pub fn resolve_observables(h: &TwoFamilyHamiltonian, cfg: &RunConfig) -> Result<(Observable, Vec<Observable>)> {
    let p_spec = &cfg.observables.p;
    let op = resolve_observable(h, p_spec)?;
    if let Some(qs) = &cfg.observables.q {
        let q = qs.iter().map(|s| resolve_observable(h, s)).collect::<Result<Vec<_>>>()?;
        return Ok((op, q));
    }
    let r = h.range();
    let mut out = Vec::new();
    if let Some(id) = op.term {
        let family = h.term(id)?.family;
        for (other, t) in h.family(family) {
            if h.graph().region_distance(&op.support, &t.support)? > r {
                out.push(Observable::from_term(h, other)?);
            }
        }
    } else {
        let kind_here = h.sites().kinds()[p_spec.site.unwrap_or_default()];
        for s in 0..h.graph().site_count() {
            if h.sites().kinds()[s] != kind_here {
                continue;
            }
            let q = Observable::named(h, &p_spec.kind, s)?;
            if h.graph().region_distance(&op.support, &q.support)? > r {
                out.push(q);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config {
            key: "observables.q".into(),
            message: format!("no default placement lies beyond R = {r}; list placements explicitly"),
        });
    }
    Ok((op, out))
}

fn out_dir(cfg: &RunConfig, opts: &RunOptions) -> Result<PathBuf> {
    let dir = opts.out.clone().unwrap_or_else(|| cfg.out.clone());
    fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir)
}

fn lambda(cfg: &RunConfig, opts: &RunOptions) -> Option<f64> {
    opts.lambda.or(cfg.lambda)
}

#[derive(Serialize)]
struct ConstantsReport<'a> {
    model: &'a str,
    constants: &'a BoundConstants,
    v_lr: f64,
    lambda_star: Option<f64>,
    v_min: Option<f64>,
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    model: &'a str,
    o_p: &'a str,
    passed: bool,
    v_lr: f64,
    v_emp: Option<f64>,
    velocity_ordering_holds: Option<bool>,
    velocity: Option<&'a VelocityEstimate>,
    velocity_note: Option<String>,
    reports: &'a [VerificationReport],
}

pub fn run_command(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    if let Some(l) = opts.lambda {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidArgument(format!("--lambda must be positive, got {l}")));
        }
    }
    let h = build_model(&cfg.model)?;
    let dir = out_dir(cfg, opts)?;
    let mut artifacts = Vec::new();
    let mut emit = |artifact: Artifact<'_>, format: Format, name: &str| -> Result<()> {
        let path = dir.join(name);
        emit_report(artifact, format, &path)?;
        artifacts.push(path);
        Ok(())
    };

    let (exit_code, summary) = match cmd {
        Command::Check => {
            let report = validate_two_family(&h);
            emit(Artifact::Json(&report), Format::Json, "check.json")?;
            let code = if report.passed { 0 } else { 1 };
            (code, format!("check: {} ({} violation(s))", pass_word(report.passed), report.violations.len()))
        }
        Command::Constants => {
            let c = compute_bound_constants(&h, lambda(cfg, opts), cfg.norm_mode)?;
            let opt = optimize_lambda(&c).ok();
            let report = ConstantsReport {
                model: h.name(),
                constants: &c,
                v_lr: lr_velocity(&c),
                lambda_star: opt.map(|o| o.0),
                v_min: opt.map(|o| o.1),
            };
            emit(Artifact::Json(&report), Format::Json, "constants.json")?;
            (0, format!("constants: K = {}, Q = {}, nu = {}, R = {}, v_LR = {}", c.k, c.q, c.nu, c.r, report.v_lr))
        }
        Command::Chains => {
            let c = compute_bound_constants(&h, lambda(cfg, opts), cfg.norm_mode)?;
            let adj = noncommuting_adjacency(&h, cfg.norm_mode)?;
            let start = match &cfg.chains.start {
                Some(s) => resolve_observable(&h, s)?.term.unwrap_or_default(),
                None => 0,
            };
            let target = match &cfg.chains.target {
                Some(sites) => SupportRegion::new(h.graph(), sites.iter().copied())?,
                None => {
                    let (op, qs) = resolve_observables(&h, cfg)?;
                    let mut far = qs[0].support.clone();
                    let mut best = 0;
                    for q in &qs {
                        let d = h.graph().region_distance(&op.support, &q.support)?;
                        if d > best {
                            best = d;
                            far = q.support.clone();
                        }
                    }
                    far
                }
            };
            let n_max = cfg.chains.n_max.unwrap_or(crate::config::DEFAULT_CHAIN_N_MAX);
            let table = count_chains_dp(&adj, start, &target, n_max)?;
            let d = h.graph().region_distance(&h.term(start)?.support, &target)?;
            emit(Artifact::Table(&chain_table(&table, &c, d, false)), Format::Csv, "chains.csv")?;
            emit(Artifact::Table(&chain_table(&table, &c, d, true)), Format::Csv, "chains_weighted.csv")?;
            (0, format!("chains: start term {start}, d = {d}, n_max = {n_max}"))
        }
        Command::Bound => {
            let (op, qs) = resolve_observables(&h, cfg)?;
            let ts = cfg.times();
            let t_max = ts.iter().cloned().fold(0.0, f64::max);
            for &method in &cfg.methods {
                let src = BoundSource::prepare(
                    &h,
                    &op,
                    &qs,
                    method,
                    lambda(cfg, opts),
                    cfg.norm_mode,
                    t_max,
                    cfg.tolerances.series_tol,
                )?;
                let mut curves = Vec::new();
                for (k, q) in qs.iter().enumerate() {
                    if src.exclusion(k).is_some() {
                        continue;
                    }
                    let d = h.graph().region_distance(&op.support, &q.support)?;
                    curves.push(BoundCurve::from_fn(method, d, &ts, |t| {
                        src.value(k, t).map(|v| v.unwrap_or(f64::INFINITY))
                    })?);
                }
                emit(Artifact::Table(&curve_table(&curves)), Format::Csv, &format!("bound_{}.csv", method.name()))?;
            }
            (0, format!("bound: {} method(s), {} placement(s)", cfg.methods.len(), qs.len()))
        }
        Command::Simulate => {
            let (op, qs) = resolve_observables(&h, cfg)?;
            let sweep = commutator_norm_sweep(&h, &op, &qs, &cfg.times())?;
            emit(Artifact::Table(&sweep_table(&sweep)), Format::Csv, "simulate.csv")?;
            (0, format!("simulate: dim {}, {} point(s)", sweep.hilbert_dim, sweep.points.len()))
        }
        Command::Verify => {
            let (op, qs) = resolve_observables(&h, cfg)?;
            let ts = cfg.times();
            let t_max = ts.iter().cloned().fold(0.0, f64::max);
            let sweep = commutator_norm_sweep(&h, &op, &qs, &ts)?;
            let mut reports = Vec::new();
            for &method in &cfg.methods {
                let src = BoundSource::prepare(
                    &h,
                    &op,
                    &qs,
                    method,
                    lambda(cfg, opts),
                    cfg.norm_mode,
                    t_max,
                    cfg.tolerances.series_tol,
                )?
                .with_scale(opts.bound_scale);
                let rep = verify_bound(&sweep, &src)?;
                emit(Artifact::Table(&margins_table(&rep)), Format::Csv, &format!("margins_{}.csv", method.name()))?;
                reports.push(rep);
            }
            let passed = reports.iter().all(|r| r.passed);
            let v_lr = reports[0].v_lr;
            let (velocity, velocity_note) = match extract_velocity(&sweep, cfg.tolerances.threshold) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let v_emp = velocity.as_ref().map(|v| v.v_emp);
            let summary = VerifySummary {
                model: h.name(),
                o_p: &op.label,
                passed,
                v_lr,
                v_emp,
                velocity_ordering_holds: v_emp.map(|v| v <= v_lr),
                velocity: velocity.as_ref(),
                velocity_note,
                reports: &reports,
            };
            emit(Artifact::Json(&summary), Format::Json, "verify.json")?;
            let v_text = v_emp.map_or("unresolved".to_string(), |v| v.to_string());
            (
                if passed { 0 } else { 1 },
                format!("verify: {} (v_emp = {v_text}, v_LR = {v_lr})", pass_word(passed)),
            )
        }
    };
    Ok(Outcome {
        exit_code,
        artifacts,
        summary,
    })
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Sets the rayon pool size from `LRLAB_THREADS` when present.
pub fn configure_threads_from_env() -> Result<()> {
    let Ok(v) = std::env::var("LRLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("LRLAB_THREADS must be a positive integer, got \"{v}\"")))?;
    if n == 0 {
        return Err(Error::InvalidArgument("LRLAB_THREADS must be at least 1".into()));
    }
    // a second initialisation (tests calling twice) is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Convenience for tests and examples: parse, run, and map errors to exit
/// code 2.
pub fn run_path(cmd: Command, config: &Path, opts: &RunOptions) -> (i32, Result<Outcome>) {
    let res = crate::config::parse_config(config).and_then(|cfg| run_command(cmd, &cfg, opts));
    let code = match &res {
        Ok(o) => o.exit_code,
        Err(_) => EXIT_USAGE,
    };
    (code, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    fn cfg(extra: &str, out: &Path) -> RunConfig {
        parse_config_str(&format!(
            r#"{{"model": {{"name": "tfim", "length": 6}}, "h0": 1.0, "t_grid": {{"start": 0, "stop": 1, "points": 11}}, "out": "{}"{extra}}}"#,
            out.display()
        ))
        .unwrap()
    }

    #[test]
    fn default_placements_beyond_range() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("", dir.path());
        let h = build_model(&c.model).unwrap();
        let (op, qs) = resolve_observables(&h, &c).unwrap();
        assert_eq!(op.label, "z0");
        let labels: Vec<_> = qs.iter().map(|q| q.label.as_str()).collect();
        assert_eq!(labels, ["z3", "z4", "z5"]);
    }

    #[test]
    fn every_command_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("", dir.path());
        for cmd in ["check", "constants", "chains", "bound", "simulate", "verify"] {
            let o = run_command(cmd.parse().unwrap(), &c, &RunOptions::default()).unwrap();
            assert_eq!(o.exit_code, 0, "{cmd}");
            assert!(o.artifacts.iter().all(|p| p.exists()));
        }
        let chains = fs::read_to_string(dir.path().join("chains.csv")).unwrap();
        assert!(chains.starts_with("n,c_n,closed_form\n"));
        let sim = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
        assert!(sim.starts_with("d,t,norm\n"));
        assert_eq!(sim.lines().count(), 1 + 3 * 11);
    }

    #[test]
    fn scaled_bound_fails_verify() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("", dir.path());
        let opts = RunOptions {
            bound_scale: 1e-6,
            ..RunOptions::default()
        };
        let o = run_command(Command::Verify, &c, &opts).unwrap();
        assert_eq!(o.exit_code, 1);
    }

    #[test]
    fn unknown_command() {
        assert!("plot".parse::<Command>().is_err());
    }
}
