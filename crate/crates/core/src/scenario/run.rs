//! Check dispatch and the report envelope.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schema::{CheckKind, CheckSpec, Defaults};
use super::{Scenario, DEFAULT_STEP};
use crate::action::{
    check_action, check_bimodule_composition, check_module, check_quasi_equivalence, check_strong_morita,
    leaf_action_check, tensor_distribution, unique_lift_action, BimoduleComposition,
};
use crate::algebroid::{check_algebroid_axioms, check_morphism, fibered_product_fiber, pullback_fiber};
use crate::apath::{check_transport_invariances, integrate_apath, psi_transport, validate_apath};
use crate::dirac::{check_dirac, check_dirac_map, gauge_transform, induced_dirac_action, DiracMapMode};
use crate::error::{Error, Result};
use crate::ode::IntegratorConfig;
use crate::report::{CheckOptions, CheckReport, ReportBuilder, Status};

const DEFAULT_TIME_SAMPLES: usize = 101;

/// Command-line overrides; they sit between per-check values and scenario
/// defaults.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub overrides: Defaults,
    /// Keep wall times; otherwise `ms` is zeroed so reports are reproducible.
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub reports: Vec<CheckReport>,
}

impl ScenarioReport {
    /// 0 if every check passed, 2 if any errored, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.reports.iter().map(|r| r.status).max() {
            None | Some(Status::Pass) => 0,
            Some(Status::Error) => 2,
            Some(_) => 1,
        }
    }
}

pub fn run_scenario(s: &Scenario, run: &RunOptions) -> ScenarioReport {
    ScenarioReport {
        scenario: s.name().to_string(),
        reports: run_checks(s, run),
    }
}

/// Runs every check in parallel; reports come back in declaration order.
pub fn run_checks(s: &Scenario, run: &RunOptions) -> Vec<CheckReport> {
    s.checks()
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let opts = s.options_for(c, &run.overrides);
            let id = c.id.clone().unwrap_or_else(|| format!("{}#{}", c.kind.as_str(), i + 1));
            let start = Instant::now();
            let mut report = match dispatch(s, c, &opts, run) {
                Ok(r) => r.with_id(id),
                Err(e) => CheckReport::error(id, c.kind.as_str(), opts.tol, &e),
            };
            report.kind = c.kind.as_str().to_string();
            report.ms = if run.timings {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            report
        })
        .collect()
}

fn label(v: &Option<String>) -> Result<&str> {
    v.as_deref()
        .ok_or_else(|| Error::SchemaViolation("check target missing".into()))
}

fn point(v: &Option<Vec<f64>>) -> Result<&[f64]> {
    v.as_deref()
        .ok_or_else(|| Error::SchemaViolation("check point missing".into()))
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn integrator(s: &Scenario, c: &CheckSpec, run: &RunOptions) -> Result<IntegratorConfig> {
    let step = c
        .step
        .or(run.overrides.step)
        .or(s.defaults().step)
        .unwrap_or(DEFAULT_STEP);
    let cfg = IntegratorConfig::with_step(step);
    cfg.validate()?;
    Ok(cfg)
}

fn horizon(c: &CheckSpec, run: &RunOptions) -> Option<f64> {
    c.horizon.or(run.overrides.horizon)
}

fn dispatch(s: &Scenario, c: &CheckSpec, opts: &CheckOptions, run: &RunOptions) -> Result<CheckReport> {
    use CheckKind as K;
    let tol = opts.tol;
    let witness = |l: &str| -> Result<_> {
        let w = s.witness(l)?;
        Ok(match horizon(c, run) {
            Some(h) => w.with_horizon(h),
            None => w,
        })
    };
    let action = |l: &str| -> Result<_> {
        let a = s.action(l)?;
        Ok(match horizon(c, run) {
            Some(h) => a.with_horizon(h),
            None => a,
        })
    };
    Ok(match c.kind {
        K::AlgebroidAxioms => check_algebroid_axioms(&*s.algebroid(label(&c.algebroid)?)?, opts),
        K::Morphism => check_morphism(&s.morphism(label(&c.morphism)?)?, opts),
        K::PullbackFiber => {
            let x = point(&c.point)?;
            let fiber = pullback_fiber(&*s.algebroid(label(&c.algebroid)?)?, &s.map(label(&c.map)?)?, x)?;
            let mut rep = ReportBuilder::new("pullback_fiber", tol);
            rep.flag_at("transversality", true, x, String::new);
            if let Some(e) = &c.expected {
                let dim = fiber.ncols();
                rep.flag_at("dimension", e.first() == Some(&(dim as f64)), x, || {
                    format!("fiber dimension {dim}, expected {e:?}")
                });
            }
            rep.finish()
        }
        K::FiberedProduct => {
            let m1 = s.morphism(&c.morphisms[0])?;
            let m2 = s.morphism(&c.morphisms[1])?;
            let (p, q) = (&c.points[0], &c.points[1]);
            let fiber = fibered_product_fiber(&m1, &m2, p, q, tol)?;
            let at: Vec<f64> = p.iter().chain(q).copied().collect();
            let mut rep = ReportBuilder::new("fibered_product", tol);
            rep.flag_at("surjectivity", true, &at, String::new);
            if let Some(e) = &c.expected {
                let dim = fiber.ncols();
                rep.flag_at("dimension", e.first() == Some(&(dim as f64)), &at, || {
                    format!("fiber dimension {dim}, expected {e:?}")
                });
            }
            rep.finish()
        }
        K::Dirac => check_dirac(&s.dirac(label(&c.dirac)?)?, opts),
        K::Gauge => {
            let d = s.dirac(label(&c.dirac)?)?;
            let (image, closed) = gauge_transform(&d, &s.two_form(label(&c.two_form)?)?, opts)?;
            let mut rep = ReportBuilder::new("gauge", tol);
            rep.absorb("two_form", &closed);
            rep.absorb("image", &check_dirac(&image, opts));
            rep.finish()
        }
        K::DiracMap => check_dirac_map(
            &s.dirac_map(label(&c.dirac_map)?)?,
            c.mode.unwrap_or(DiracMapMode::Strong),
            opts,
        ),
        K::InducedAction => check_action(&induced_dirac_action(&s.dirac_map(label(&c.dirac_map)?)?, opts)?, opts),
        K::Action => check_action(&action(label(&c.action)?)?, opts),
        K::Module => check_module(&action(label(&c.action)?)?, opts),
        K::UniqueLift => check_action(
            &unique_lift_action(s.algebroid(label(&c.algebroid)?)?, &s.map(label(&c.map)?)?, opts)?,
            opts,
        ),
        K::LeafAction => leaf_action_check(&action(label(&c.action)?)?, &s.quotient(label(&c.quotient)?)?, opts)?,
        K::QuasiEquivalence => check_quasi_equivalence(&witness(label(&c.witness)?)?, opts),
        K::StrongMorita => check_strong_morita(&witness(label(&c.witness)?)?, opts),
        K::TensorDistribution => {
            let first = witness(&c.witnesses[0])?;
            let second = witness(&c.witnesses[1])?;
            match &c.composition {
                Some(comp) => check_bimodule_composition(
                    &BimoduleComposition {
                        first,
                        second,
                        embedding: s.map(&comp.embedding)?,
                        quotient: s.quotient(&comp.quotient)?,
                    },
                    opts,
                )?,
                None => tensor_distribution(first.right(), second.left(), &c.points[0], &c.points[1], opts)?.report,
            }
        }
        K::ApathValid => validate_apath(
            &s.path(label(&c.path)?)?,
            opts,
            c.time_samples.unwrap_or(DEFAULT_TIME_SAMPLES),
        ),
        K::ApathIntegrate => {
            let x0 = point(&c.point)?;
            let t = integrate_apath(
                &s.path(label(&c.path)?)?,
                &action(label(&c.action)?)?,
                x0,
                &integrator(s, c, run)?,
            )?;
            let mut rep = ReportBuilder::new("apath_integrate", tol);
            rep.observe("tracking", t.tracking, t.end());
            if let Some(e) = &c.expected {
                rep.observe("endpoint", gap(t.end(), e), t.end());
            }
            rep.finish()
        }
        K::TransportInvariances => {
            let w = c.witness.as_deref().map(witness).transpose()?;
            check_transport_invariances(
                &s.path(label(&c.path)?)?,
                &action(label(&c.action)?)?,
                point(&c.point)?,
                &integrator(s, c, run)?,
                w.as_ref(),
                opts,
            )?
        }
        K::PsiTransport => {
            let w = witness(label(&c.witness)?)?;
            let morphism = c.module_morphism.as_deref().map(|l| s.map(l)).transpose()?;
            let n0 = point(&c.point)?;
            let out = psi_transport(
                &w,
                (&c.points[0], &c.points[1]),
                &s.path(label(&c.path)?)?,
                &action(label(&c.action)?)?,
                n0,
                &integrator(s, c, run)?,
                morphism.as_ref(),
                opts,
            )?;
            let mut rep = ReportBuilder::new("psi_transport", tol);
            rep.flag_at("connecting_path", true, n0, String::new);
            if let Some(e) = &c.expected {
                rep.observe("endpoint", gap(&out.point, e), &out.point);
            }
            if let Some(r) = out.morphism_residual {
                rep.observe("morphism", r, &out.point);
            }
            rep.finish()
        }
    })
}
