//! Check reports shared by every verification routine.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::calculus::Expr;
use crate::error::{Error, Result};

/// Residual stored for non-finite measurements; JSON has no infinity.
pub const NON_FINITE_RESIDUAL: f64 = f64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// Sampling and tolerance options common to all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: 1e-8,
            samples: 64,
            seed: 0,
        }
    }
}

impl CheckOptions {
    pub fn with_tol(tol: f64) -> Self {
        CheckOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub kind: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
    pub worst_point: Option<Vec<f64>>,
    pub ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<Detail>,
}

impl CheckReport {
    pub fn error(id: impl Into<String>, kind: impl Into<String>, tol: f64, err: &Error) -> Self {
        CheckReport {
            id: id.into(),
            kind: kind.into(),
            status: Status::Error,
            residual: 0.0,
            tolerance: tol,
            worst_point: None,
            ms: 0.0,
            message: Some(err.to_string()),
            details: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn detail(&self, name: &str) -> Option<&Detail> {
        self.details.iter().find(|d| d.name == name)
    }

    /// Renames the report, keeping its contents.
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

fn sanitize(r: f64) -> f64 {
    if r.is_finite() {
        r.abs()
    } else {
        NON_FINITE_RESIDUAL
    }
}

/// Accumulates sub-criteria into a [`CheckReport`].
///
/// Residual criteria pass iff their maximum stays below the tolerance; flag
/// criteria carry residual 0 on pass and 1 on failure.
pub struct ReportBuilder {
    id: String,
    kind: String,
    tol: f64,
    details: Vec<Detail>,
    message: Option<String>,
    start: Instant,
}

impl ReportBuilder {
    pub fn new(kind: impl Into<String>, tol: f64) -> Self {
        let kind = kind.into();
        ReportBuilder {
            id: kind.clone(),
            kind,
            tol,
            details: Vec::new(),
            message: None,
            start: Instant::now(),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn entry(&mut self, name: &str) -> &mut Detail {
        let pos = match self.details.iter().position(|d| d.name == name) {
            Some(p) => p,
            None => {
                self.details.push(Detail {
                    name: name.to_string(),
                    status: Status::Pass,
                    residual: 0.0,
                    worst_point: None,
                    note: None,
                });
                self.details.len() - 1
            }
        };
        &mut self.details[pos]
    }

    pub fn detail_status(&self, name: &str) -> Option<Status> {
        self.details.iter().find(|d| d.name == name).map(|d| d.status)
    }

    /// Declares a residual criterion so that it appears even with no samples.
    pub fn declare(&mut self, name: &str) {
        self.entry(name);
    }

    /// Records one residual measurement for criterion `name`.
    pub fn observe(&mut self, name: &str, residual: f64, point: &[f64]) {
        let tol = self.tol;
        let r = sanitize(residual);
        let d = self.entry(name);
        if r > d.residual || d.worst_point.is_none() && r > 0.0 {
            d.residual = r;
            d.worst_point = Some(point.to_vec());
        }
        if !(r < tol) && d.status < Status::Fail {
            d.status = Status::Fail;
        }
    }

    /// Records the Euclidean norm of `exprs` at every point under `name`.
    pub fn observe_exprs(&mut self, name: &str, exprs: &[Expr], points: &[Vec<f64>]) {
        self.declare(name);
        if exprs.iter().all(Expr::is_zero) {
            return;
        }
        for p in points {
            match exprs.iter().map(|e| e.eval(p)).collect::<Result<Vec<f64>>>() {
                Ok(v) => self.observe(name, v.iter().map(|x| x * x).sum::<f64>().sqrt(), p),
                Err(e) => self.observe_error(name, &e, p),
            }
        }
    }

    /// Records an evaluation error at a sample as a failure of `name`.
    pub fn observe_error(&mut self, name: &str, err: &Error, point: &[f64]) {
        let d = self.entry(name);
        d.status = Status::Fail;
        d.residual = NON_FINITE_RESIDUAL;
        d.worst_point = Some(point.to_vec());
        d.note.get_or_insert_with(|| err.to_string());
    }

    pub fn flag(&mut self, name: &str, ok: bool, note: Option<String>) {
        let d = self.entry(name);
        if ok {
            if d.note.is_none() {
                d.note = note;
            }
        } else {
            d.status = Status::Fail;
            d.residual = 1.0;
            if d.note.is_none() {
                d.note = note;
            }
        }
    }

    /// Records a flag failure located at `point`.
    pub fn flag_at(&mut self, name: &str, ok: bool, point: &[f64], note: impl FnOnce() -> String) {
        if ok {
            self.entry(name);
            return;
        }
        let d = self.entry(name);
        if d.status != Status::Fail {
            d.worst_point = Some(point.to_vec());
            d.note = Some(note());
        }
        d.status = Status::Fail;
        d.residual = 1.0;
    }

    /// Records a criterion with an externally decided status.
    pub fn status(&mut self, name: &str, status: Status, residual: f64, note: Option<String>) {
        let d = self.entry(name);
        d.status = d.status.max(status);
        d.residual = d.residual.max(sanitize(residual));
        if note.is_some() {
            d.note = note;
        }
    }

    /// Folds a sub-report into this one under a prefix.
    pub fn absorb(&mut self, prefix: &str, sub: &CheckReport) {
        if sub.details.is_empty() || sub.status == Status::Error {
            let status = sub.status.min(Status::Fail);
            self.status(prefix, status, sub.residual, sub.message.clone());
            return;
        }
        for d in &sub.details {
            let mut d = d.clone();
            d.name = format!("{prefix}.{}", d.name);
            self.details.push(d);
        }
    }

    pub fn message(&mut self, msg: impl Into<String>) {
        self.message = Some(msg.into());
    }

    pub fn finish(self) -> CheckReport {
        let status = self.details.iter().map(|d| d.status).max().unwrap_or(Status::Pass);
        let worst = self
            .details
            .iter()
            .filter(|d| d.status != Status::Inconclusive)
            .max_by(|a, b| a.residual.total_cmp(&b.residual));
        let residual = worst.map_or(0.0, |d| d.residual);
        let worst_point = worst.and_then(|d| d.worst_point.clone());
        CheckReport {
            id: self.id,
            kind: self.kind,
            status,
            residual,
            tolerance: self.tol,
            worst_point,
            ms: self.start.elapsed().as_secs_f64() * 1e3,
            message: self.message,
            details: self.details,
        }
    }
}

/// Human-readable rendering of a report list.
pub fn render_text(scenario: &str, reports: &[CheckReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {scenario}");
    for r in reports {
        let _ = writeln!(
            out,
            "[{:>12}] {} ({}) residual {:.3e} tol {:.1e}",
            r.status.as_str(),
            r.id,
            r.kind,
            r.residual,
            r.tolerance
        );
        if let Some(m) = &r.message {
            let _ = writeln!(out, "    {m}");
        }
        for d in r.details.iter().filter(|d| d.status != Status::Pass) {
            let _ = write!(out, "    {} {}: {:.3e}", d.status.as_str(), d.name, d.residual);
            if let Some(p) = &d.worst_point {
                let _ = write!(out, " at {p:?}");
            }
            if let Some(n) = &d.note {
                let _ = write!(out, " ({n})");
            }
            let _ = writeln!(out);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_aggregation() {
        let mut b = ReportBuilder::new("k", 1e-8);
        b.observe("a", 1e-12, &[0.0]);
        b.status("probe", Status::Inconclusive, 0.0, None);
        let r = b.finish();
        assert_eq!(r.status, Status::Inconclusive);

        let mut b = ReportBuilder::new("k", 1e-8);
        b.observe("a", 1e-3, &[0.5]);
        b.observe("a", 1e-4, &[0.1]);
        b.flag("f", true, None);
        let r = b.finish();
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.residual, 1e-3);
        assert_eq!(r.worst_point, Some(vec![0.5]));
    }

    #[test]
    fn pass_implies_residual_below_tolerance() {
        let mut b = ReportBuilder::new("k", 1e-8);
        b.observe("a", f64::NAN, &[]);
        let r = b.finish();
        assert_eq!(r.status, Status::Fail);
        assert!(r.residual.is_finite());
    }

    #[test]
    fn json_round_trip() {
        let mut b = ReportBuilder::new("k", 1e-8);
        b.observe("a", 2e-9, &[0.25, -1.0]);
        let mut r = b.finish();
        r.ms = 0.0;
        let s = serde_json::to_string(&r).unwrap();
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert!(s.contains("\"status\":\"pass\""));
    }
}
