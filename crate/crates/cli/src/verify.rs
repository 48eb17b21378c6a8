//! End-to-end checks of a built system, gathered into one report.

use std::fmt;

use chfif_core::attractor::{
    contraction_certificate, hausdorff_distance, iterate_to_tolerance, AttractorError, PointSet3,
    StepOptions, DEFAULT_MAX_POINTS, DEFAULT_SNAP_FRACTION,
};
use chfif_core::evaluator::{
    functional_residual, knot_error, solve_fixed_point, EvalError, SampledFunction,
    DEFAULT_GRID_DENSITY,
};
use chfif_core::model::{horizontal_ratios, GDIFSystem, HorizontalScope, JOIN_UP_TOLERANCE};
use chfif_core::solver::{oracle_discrepancy, SolveError};
use chfif_core::Point3;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub join_up: f64,
    pub oracle: f64,
    pub interpolation: f64,
    pub residual: f64,
    pub projection_gap: f64,
    /// Allowed excess of the empirical ratio over the conservative factor.
    pub ratio_margin: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            join_up: JOIN_UP_TOLERANCE,
            oracle: 1e-12,
            interpolation: 1e-6,
            residual: 1e-6,
            projection_gap: 1e-2,
            ratio_margin: 0.05,
        }
    }
}

/// Settings for the attractor-versus-function comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProjectionBudget {
    pub attractor_tol: f64,
    pub attractor_max_iters: usize,
    pub snap: f64,
    pub max_points: usize,
    /// Points per subinterval of the function samples compared against.
    pub grid_density: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ProjectionBudget {
    fn default() -> Self {
        Self {
            attractor_tol: 1e-3,
            attractor_max_iters: 60,
            snap: DEFAULT_SNAP_FRACTION,
            max_points: DEFAULT_MAX_POINTS,
            grid_density: 1 << 18,
            tol: 1e-4,
            max_iters: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budgets {
    pub grid_density: usize,
    pub tol: f64,
    pub max_iters: usize,
    /// `None` skips the attractor and projection checks.
    pub projection: Option<ProjectionBudget>,
    pub thresholds: Thresholds,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            grid_density: DEFAULT_GRID_DENSITY,
            tol: 1e-8,
            max_iters: 1000,
            projection: Some(ProjectionBudget::default()),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value < threshold`
    Below,
    /// `value <= threshold`
    AtMost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub threshold: f64,
    pub relation: Relation,
    pub outcome: Outcome,
}

impl Check {
    fn new(name: &str, value: f64, relation: Relation, threshold: f64) -> Self {
        let mut c = Self {
            name: name.to_string(),
            value: Some(value),
            threshold,
            relation,
            outcome: Outcome::Skipped,
        };
        c.outcome = c.recompute();
        c
    }

    fn skipped(name: &str, relation: Relation, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value: None,
            threshold,
            relation,
            outcome: Outcome::Skipped,
        }
    }

    /// Outcome implied by `value`, `relation` and `threshold`.
    pub fn recompute(&self) -> Outcome {
        match self.value {
            None => Outcome::Skipped,
            Some(v) => {
                let ok = match self.relation {
                    Relation::Below => v < self.threshold,
                    Relation::AtMost => v <= self.threshold,
                };
                if ok {
                    Outcome::Pass
                } else {
                    Outcome::Fail
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub join_up_residual: f64,
    /// `(vertex, subinterval, source, ratio)`, 1-based labels.
    pub horizontal_ratios: Vec<(usize, usize, usize, f64)>,
    pub oracle_discrepancy: Option<f64>,
    pub apriori_delta: f64,
    pub conservative_factor: f64,
    pub certificate_factor: f64,
    pub evaluator_iterations: Option<usize>,
    pub empirical_ratio: Option<f64>,
    /// Largest knot error per vertex, max over both components.
    pub interpolation_error: Vec<f64>,
    pub functional_residual: Option<f64>,
    pub attractor_iterations: Option<usize>,
    pub attractor_ratio: Option<f64>,
    pub projection_gap: Vec<f64>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"))
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a-priori factor       {:.6}", self.apriori_delta)?;
        writeln!(f, "conservative factor   {:.6}", self.conservative_factor)?;
        writeln!(f, "certificate factor    {:.6}", self.certificate_factor)?;
        if let Some(n) = self.evaluator_iterations {
            writeln!(f, "evaluator iterations  {n}")?;
        }
        if let Some(r) = self.empirical_ratio {
            writeln!(f, "empirical ratio       {r:.6}")?;
        }
        if let Some(n) = self.attractor_iterations {
            writeln!(f, "attractor iterations  {n}")?;
        }
        for (v, gap) in self.projection_gap.iter().enumerate() {
            writeln!(f, "projection gap v{}     {gap:.4e}", v + 1)?;
        }
        for c in &self.checks {
            let tag = match c.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Skipped => "SKIP",
            };
            let rel = match c.relation {
                Relation::Below => "<",
                Relation::AtMost => "<=",
            };
            writeln!(
                f,
                "{tag} {:<24} {} {rel} {:.4e}",
                c.name,
                fmt_opt(c.value),
                c.threshold
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stage {
    Evaluator,
    Attractor,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("{stage:?} did not converge")]
    NoConvergence {
        stage: Stage,
        report: Box<VerificationReport>,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eval(EvalError),
    #[error(transparent)]
    Attractor(AttractorError),
}

pub const JOIN_UP: &str = "join-up residual";
pub const HORIZONTAL: &str = "horizontal contraction";
pub const ORACLE: &str = "oracle agreement";
pub const APRIORI: &str = "a-priori factor";
pub const CERTIFICATE: &str = "contraction certificate";
pub const EVAL_CONVERGENCE: &str = "evaluator convergence";
pub const RATIO: &str = "empirical ratio";
pub const INTERPOLATION: &str = "interpolation error";
pub const RESIDUAL: &str = "functional residual";
pub const ATTRACTOR_CONVERGENCE: &str = "attractor convergence";
pub const PROJECTION: &str = "projection gap";

/// `(x, f1(x), 0)` for every grid point.
pub fn graph_points(f: &SampledFunction) -> Vec<Point3> {
    f.grid
        .iter()
        .zip(f.f1())
        .map(|(&x, y)| Point3::new(x, y, 0.0))
        .collect()
}

/// Runs the solver cross-check, the function evaluation and, when budgeted,
/// the attractor and projection comparison.
///
/// A system whose maps break the join-up conditions gets a report with that
/// check failed and every later check skipped.
pub fn verify(system: &GDIFSystem, budgets: &Budgets) -> Result<VerificationReport, VerifyError> {
    let t = &budgets.thresholds;
    let mut r = VerificationReport {
        join_up_residual: system.join_up_residual(),
        apriori_delta: system.apriori_delta(),
        conservative_factor: system.conservative_factor(),
        certificate_factor: contraction_certificate(system).factor,
        ..Default::default()
    };
    let ratios = horizontal_ratios(
        system.datasets(),
        system.graph(),
        HorizontalScope::UsedEdges,
    );
    r.horizontal_ratios = ratios
        .ratios
        .iter()
        .map(|h| (h.vertex + 1, h.subinterval + 1, h.source + 1, h.ratio))
        .collect();
    r.checks.push(Check::new(
        JOIN_UP,
        r.join_up_residual,
        Relation::AtMost,
        t.join_up,
    ));
    r.checks.push(Check::new(
        HORIZONTAL,
        ratios.max_ratio(),
        Relation::Below,
        1.0,
    ));
    r.checks
        .push(Check::new(APRIORI, r.apriori_delta, Relation::Below, 1.0));
    r.checks.push(Check::new(
        CERTIFICATE,
        r.certificate_factor,
        Relation::Below,
        1.0,
    ));

    let ratio_threshold = (r.conservative_factor + t.ratio_margin).min(1.0);
    if !r.passed() {
        for (name, rel, th) in [
            (ORACLE, Relation::AtMost, t.oracle),
            (EVAL_CONVERGENCE, Relation::Below, budgets.tol),
            (RATIO, Relation::AtMost, ratio_threshold),
            (INTERPOLATION, Relation::Below, t.interpolation),
            (RESIDUAL, Relation::AtMost, t.residual),
        ] {
            r.checks.push(Check::skipped(name, rel, th));
        }
        if let Some(p) = &budgets.projection {
            r.checks.push(Check::skipped(
                ATTRACTOR_CONVERGENCE,
                Relation::Below,
                p.attractor_tol,
            ));
            r.checks.push(Check::skipped(
                PROJECTION,
                Relation::Below,
                t.projection_gap,
            ));
        }
        return Ok(r);
    }

    let oracle = oracle_discrepancy(system)?;
    r.oracle_discrepancy = Some(oracle);
    r.checks
        .push(Check::new(ORACLE, oracle, Relation::AtMost, t.oracle));

    let fixed =
        match solve_fixed_point(system, budgets.grid_density, budgets.tol, budgets.max_iters) {
            Ok(fp) => fp,
            Err(EvalError::NoConvergence { report }) => {
                r.evaluator_iterations = Some(report.iterations);
                r.empirical_ratio = report.empirical_ratio();
                r.checks.push(Check::new(
                    EVAL_CONVERGENCE,
                    report.final_change(),
                    Relation::Below,
                    budgets.tol,
                ));
                return Err(VerifyError::NoConvergence {
                    stage: Stage::Evaluator,
                    report: Box::new(r),
                });
            }
            Err(e) => return Err(VerifyError::Eval(e)),
        };
    r.evaluator_iterations = Some(fixed.report.iterations);
    r.empirical_ratio = fixed.report.empirical_ratio();
    r.checks.push(Check::new(
        EVAL_CONVERGENCE,
        fixed.report.final_change(),
        Relation::Below,
        budgets.tol,
    ));
    r.checks.push(match r.empirical_ratio {
        Some(q) => Check::new(RATIO, q, Relation::AtMost, ratio_threshold),
        None => Check::skipped(RATIO, Relation::AtMost, ratio_threshold),
    });
    r.interpolation_error = fixed
        .functions
        .iter()
        .map(|f| {
            let (e1, e2) = knot_error(system, f);
            e1.max(e2)
        })
        .collect();
    let worst = r.interpolation_error.iter().copied().fold(0.0, f64::max);
    r.checks.push(Check::new(
        INTERPOLATION,
        worst,
        Relation::Below,
        t.interpolation,
    ));
    let residual = functional_residual(system, &fixed.functions).map_err(VerifyError::Eval)?;
    r.functional_residual = Some(residual);
    r.checks
        .push(Check::new(RESIDUAL, residual, Relation::AtMost, t.residual));

    let Some(p) = &budgets.projection else {
        return Ok(r);
    };
    let options = StepOptions {
        snap: Some(p.snap),
        max_points: p.max_points,
    };
    let attractor = match iterate_to_tolerance(
        system,
        PointSet3::knots(system),
        p.attractor_tol,
        p.attractor_max_iters,
        &options,
    ) {
        Ok((sets, trace)) => {
            r.attractor_iterations = Some(trace.distances.len());
            r.attractor_ratio = trace.estimated_ratio();
            r.checks.push(Check::new(
                ATTRACTOR_CONVERGENCE,
                trace.last().unwrap_or(0.0),
                Relation::Below,
                p.attractor_tol,
            ));
            sets
        }
        Err(AttractorError::NoConvergence { trace }) => {
            r.attractor_iterations = Some(trace.distances.len());
            r.attractor_ratio = trace.estimated_ratio();
            r.checks.push(Check::new(
                ATTRACTOR_CONVERGENCE,
                trace.last().unwrap_or(f64::MAX),
                Relation::Below,
                p.attractor_tol,
            ));
            return Err(VerifyError::NoConvergence {
                stage: Stage::Attractor,
                report: Box::new(r),
            });
        }
        Err(e) => return Err(VerifyError::Attractor(e)),
    };

    let dense = if p.grid_density == budgets.grid_density {
        fixed.functions
    } else {
        match solve_fixed_point(system, p.grid_density, p.tol, p.max_iters) {
            Ok(fp) => fp.functions,
            Err(EvalError::NoConvergence { .. }) => {
                r.checks.push(Check::skipped(
                    PROJECTION,
                    Relation::Below,
                    t.projection_gap,
                ));
                return Err(VerifyError::NoConvergence {
                    stage: Stage::Evaluator,
                    report: Box::new(r),
                });
            }
            Err(e) => return Err(VerifyError::Eval(e)),
        }
    };
    r.projection_gap = attractor
        .iter()
        .zip(&dense)
        .map(|(set, f)| {
            let projected = set.project_xy();
            hausdorff_distance(&projected.points, &graph_points(f)).unwrap_or(f64::INFINITY)
        })
        .collect();
    let worst = r.projection_gap.iter().copied().fold(0.0, f64::max);
    r.checks.push(Check::new(
        PROJECTION,
        worst,
        Relation::Below,
        t.projection_gap,
    ));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcomes_follow_relation() {
        assert_eq!(
            Check::new("x", 1.0, Relation::Below, 1.0).outcome,
            Outcome::Fail
        );
        assert_eq!(
            Check::new("x", 1.0, Relation::AtMost, 1.0).outcome,
            Outcome::Pass
        );
        assert_eq!(
            Check::new("x", f64::NAN, Relation::AtMost, 1.0).outcome,
            Outcome::Fail
        );
        assert_eq!(
            Check::skipped("x", Relation::Below, 1.0).recompute(),
            Outcome::Skipped
        );
    }

    #[test]
    fn skipped_checks_do_not_fail_a_report() {
        let r = VerificationReport {
            checks: vec![
                Check::new("a", 0.0, Relation::Below, 1.0),
                Check::skipped("b", Relation::Below, 1.0),
            ],
            ..Default::default()
        };
        assert!(r.passed());
    }
}
