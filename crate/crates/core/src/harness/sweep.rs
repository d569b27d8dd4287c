//! Willingness-factor sweeps over random instances.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::csv::{fmt_f64, fmt_opt};
use super::generate::{cell_seed, generate_linear_instance, generate_log_instance};
use super::worst_case::{extremal_valuations, WorstCaseKind};
use crate::bounds::BoundReport;
use crate::closed_form::solve_linear_ne;
use crate::equilibrium::EquilibriumResult;
use crate::error::{ContestError, Result};
use crate::instance::ContestInstance;
use crate::iterative::{solve_general_ne, SolverConfig};
use crate::measures::compute_measures;
use crate::optimum::social_optimum_utility;

/// Absolute tolerance on ratio-versus-bound comparisons.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

pub const SWEEP_CSV_HEADER: &str = "theta,seed,n_active,malicious_active,su_mal,su_nom,su_max,sv_mal,sv_nom,sv_max,sw_mal,sw_nom,sw_max,r1,r2,r3,r4,r5,r6,lb1,ub1,lb2,ub2_adv,lb3,ub3,lb4,lb5,ub5,lb6,violations";

/// Name of the advisory B2 upper bound in the violation list.
pub const ADVISORY_BOUND: &str = "ub2_adv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityFamily {
    Linear,
    #[serde(alias = "logarithmic")]
    Log,
}

fn default_cost() -> f64 {
    1.0
}

fn default_probes() -> bool {
    true
}

/// One sweep. `targeted` limits the attacker to the first `M` agents
/// (the top valuations for linear families). `include_probes` adds the
/// extremal constructions to every linear grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub theta_start: f64,
    pub theta_stop: f64,
    pub theta_step: f64,
    pub instances_per_theta: usize,
    pub seed: u64,
    pub family: UtilityFamily,
    #[serde(default)]
    pub targeted: Option<usize>,
    #[serde(default = "default_cost")]
    pub cost: f64,
    #[serde(default = "default_probes")]
    pub include_probes: bool,
    #[serde(default)]
    pub output: Option<std::path::PathBuf>,
}

impl SweepConfig {
    pub fn linear(
        n: usize,
        theta_stop: f64,
        theta_step: f64,
        instances_per_theta: usize,
        seed: u64,
    ) -> Self {
        SweepConfig {
            n,
            theta_start: 0.0,
            theta_stop,
            theta_step,
            instances_per_theta,
            seed,
            family: UtilityFamily::Linear,
            targeted: None,
            cost: 1.0,
            include_probes: true,
            output: None,
        }
    }

    pub fn log(
        n: usize,
        theta_stop: f64,
        theta_step: f64,
        instances_per_theta: usize,
        seed: u64,
    ) -> Self {
        SweepConfig {
            family: UtilityFamily::Log,
            include_probes: false,
            ..Self::linear(n, theta_stop, theta_step, instances_per_theta, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(ContestError::Usage("n must be at least 1".into()));
        }
        if !(self.theta_step.is_finite() && self.theta_step > 0.0) {
            return Err(ContestError::Usage("theta_step must be positive".into()));
        }
        if !(self.theta_start.is_finite() && self.theta_start >= 0.0) {
            return Err(ContestError::Usage(
                "theta_start must be finite and >= 0".into(),
            ));
        }
        if !(self.theta_stop.is_finite() && self.theta_stop >= self.theta_start) {
            return Err(ContestError::Usage(
                "theta_stop must be finite and >= theta_start".into(),
            ));
        }
        if self.instances_per_theta == 0 {
            return Err(ContestError::Usage(
                "instances_per_theta must be at least 1".into(),
            ));
        }
        if !(self.cost.is_finite() && self.cost > 0.0) {
            return Err(ContestError::Usage("cost must be positive".into()));
        }
        if let Some(m) = self.targeted {
            if m == 0 || m > self.n {
                return Err(ContestError::Usage(format!(
                    "targeted must lie in 1..={}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Grid points `start + k * step` up to `stop`, rounded to 12 decimals.
    pub fn theta_grid(&self) -> Vec<f64> {
        let count =
            ((self.theta_stop - self.theta_start) / self.theta_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| {
                let t = self.theta_start + k as f64 * self.theta_step;
                (t * 1e12).round() / 1e12
            })
            .collect()
    }
}

/// Identifies a record's instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceTag {
    Random(u64),
    Probe(WorstCaseKind),
}

impl std::fmt::Display for InstanceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InstanceTag::Random(s) => write!(f, "{s}"),
            InstanceTag::Probe(k) => write!(f, "probe:{k}"),
        }
    }
}

/// Values of `(mal, nom, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triple {
    pub mal: f64,
    pub nom: f64,
    pub max: Option<f64>,
}

/// Bound values that apply to this record's family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordBounds {
    pub lb1: f64,
    pub ub1: Option<f64>,
    pub lb2: f64,
    pub ub2_adv: Option<f64>,
    pub lb3: f64,
    pub ub3: Option<f64>,
    pub lb4: f64,
    pub lb5: Option<f64>,
    pub ub5: Option<f64>,
    pub lb6: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordData {
    pub n_active: usize,
    pub malicious_active: bool,
    pub su: Triple,
    pub sv: Triple,
    pub sw: Triple,
    /// B1..B6; `None` where the ratio is not defined for the family.
    pub ratios: [Option<f64>; 6],
    pub bounds: RecordBounds,
    /// Names of violated bounds, including the advisory one.
    pub violations: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub tag: InstanceTag,
    /// `None` when a solver did not converge.
    pub data: Option<RecordData>,
}

impl SweepRecord {
    pub fn is_probe(&self) -> bool {
        matches!(self.tag, InstanceTag::Probe(_))
    }

    pub fn csv_row(&self) -> String {
        let mut f = vec![fmt_f64(self.theta), self.tag.to_string()];
        match &self.data {
            None => {
                f.extend(std::iter::repeat_n(String::new(), 27));
                f.push("nonconverged".into());
            }
            Some(d) => {
                f.push(d.n_active.to_string());
                f.push(u8::from(d.malicious_active).to_string());
                for t in [d.su, d.sv, d.sw] {
                    f.push(fmt_f64(t.mal));
                    f.push(fmt_f64(t.nom));
                    f.push(fmt_opt(t.max));
                }
                f.extend(d.ratios.iter().map(|r| fmt_opt(*r)));
                let b = &d.bounds;
                f.extend([
                    fmt_f64(b.lb1),
                    fmt_opt(b.ub1),
                    fmt_f64(b.lb2),
                    fmt_opt(b.ub2_adv),
                    fmt_f64(b.lb3),
                    fmt_opt(b.ub3),
                    fmt_f64(b.lb4),
                    fmt_opt(b.lb5),
                    fmt_opt(b.ub5),
                    fmt_opt(b.lb6),
                ]);
                f.push(d.violations.join(";"));
            }
        }
        f.join(",")
    }
}

/// Minimum and maximum of each ratio at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaEnvelope {
    pub theta: f64,
    pub min: [Option<f64>; 6],
    pub max: [Option<f64>; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub records: usize,
    pub probes: usize,
    pub nonconverged: usize,
    /// Non-advisory violation counts per bound name.
    pub violations: BTreeMap<&'static str, usize>,
    pub advisory_violations: usize,
    pub envelopes: Vec<ThetaEnvelope>,
}

impl SweepSummary {
    pub fn total_violations(&self) -> usize {
        self.violations.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
}

impl SweepOutput {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

fn solve(instance: &ContestInstance, solver: &SolverConfig) -> Result<EquilibriumResult> {
    if instance.is_all_linear() {
        solve_linear_ne(instance)
    } else {
        solve_general_ne(instance, solver)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == den {
        1.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Solves MAL and NOM for one instance and checks every applicable bound.
///
/// Non-convergence of the iterative solver yields `Ok(None)`; other errors propagate.
pub fn evaluate_instance(
    instance: &ContestInstance,
    bounds: &BoundReport,
    solver: &SolverConfig,
) -> Result<Option<RecordData>> {
    let mal = match solve(instance, solver) {
        Ok(r) => r,
        Err(ContestError::NonConvergence { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let nom_instance = instance.without_malicious();
    let nom = match solve(&nom_instance, solver) {
        Ok(r) => r,
        Err(ContestError::NonConvergence { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let m_mal = compute_measures(instance, &mal.profile)?;
    let m_nom = compute_measures(&nom_instance, &nom.profile)?;
    let opt = social_optimum_utility(instance)?;
    let linear = instance.is_all_linear();

    let r1 = m_mal.su / opt.su_max;
    let r2 = ratio(m_mal.su, m_nom.su);
    let r3 = m_mal.sv / opt.sv_max;
    let r4 = ratio(m_mal.sv, m_nom.sv);
    let (r5, r6) = if linear {
        let sw_max = opt.sw_max.expect("linear instances have a revenue maximum");
        (
            Some(ratio(m_mal.sw, sw_max)),
            Some(ratio(m_mal.sw, m_nom.sw)),
        )
    } else {
        (None, None)
    };

    let rb = RecordBounds {
        lb1: bounds.lb_b1,
        ub1: linear.then_some(bounds.ub_b1),
        lb2: bounds.lb_b2,
        ub2_adv: linear.then_some(bounds.ub_b2_advisory),
        lb3: bounds.lb_b3,
        ub3: linear.then_some(bounds.ub_b3),
        lb4: bounds.lb_b4,
        lb5: linear.then_some(bounds.lb_b5),
        ub5: linear.then_some(bounds.ub_b5),
        lb6: linear.then_some(bounds.lb_b6),
    };

    let tol = VIOLATION_TOLERANCE;
    let mut violations = Vec::new();
    let mut below = |name: &'static str, value: f64, bound: f64| {
        if value < bound - tol {
            violations.push(name);
        }
    };
    below("lb1", r1, rb.lb1);
    below("lb2", r2, rb.lb2);
    below("lb3", r3, rb.lb3);
    below("lb4", r4, rb.lb4);
    if let (Some(r5), Some(lb5)) = (r5, rb.lb5) {
        below("lb5", r5, lb5);
    }
    if let (Some(r6), Some(lb6)) = (r6, rb.lb6) {
        // An unbounded ratio cannot violate a lower bound.
        if r6.is_finite() {
            below("lb6", r6, lb6);
        }
    }
    let mut above = |name: &'static str, value: f64, bound: f64| {
        if value > bound + tol {
            violations.push(name);
        }
    };
    if let Some(ub1) = rb.ub1 {
        above("ub1", r1, ub1);
    }
    if let Some(ub3) = rb.ub3 {
        above("ub3", r3, ub3);
    }
    if let (Some(r5), Some(ub5)) = (r5, rb.ub5) {
        above("ub5", r5, ub5);
    }
    above("su_max", m_mal.su, opt.su_max);
    above("sv_max", m_mal.sv, opt.sv_max);
    if let Some(ub2) = rb.ub2_adv {
        above(ADVISORY_BOUND, r2, ub2);
    }

    Ok(Some(RecordData {
        n_active: mal.participating_benign.len(),
        malicious_active: mal.malicious_active,
        su: Triple {
            mal: m_mal.su,
            nom: m_nom.su,
            max: Some(opt.su_max),
        },
        sv: Triple {
            mal: m_mal.sv,
            nom: m_nom.sv,
            max: Some(opt.sv_max),
        },
        sw: Triple {
            mal: m_mal.sw,
            nom: m_nom.sw,
            max: opt.sw_max,
        },
        ratios: [Some(r1), Some(r2), Some(r3), Some(r4), r5, r6],
        bounds: rb,
        violations,
    }))
}

enum Cell {
    Random(usize, u64),
    Probe(usize, WorstCaseKind),
}

fn prepare(config: &SweepConfig, base: ContestInstance, theta: f64) -> Result<ContestInstance> {
    let mut inst = base.with_theta(theta)?.with_cost(config.cost)?;
    if let Some(m) = config.targeted {
        inst = inst.with_targeting((0..inst.n()).map(|i| i < m).collect())?;
    }
    Ok(inst)
}

/// Runs the sweep. Records come out in grid order; within a grid point the
/// probes (if any) come first, then random instances by index. Output does
/// not depend on the number of threads.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let solver = SolverConfig::default();
    let grid = config.theta_grid();
    let bounds: Vec<BoundReport> = grid
        .iter()
        .map(|&t| BoundReport::new(config.n, t))
        .collect::<Result<_>>()?;
    let probes = config.include_probes && config.family == UtilityFamily::Linear;

    let mut cells = Vec::new();
    for (ti, _) in grid.iter().enumerate() {
        if probes {
            cells.extend(WorstCaseKind::ALL.into_iter().map(|k| Cell::Probe(ti, k)));
        }
        for ii in 0..config.instances_per_theta {
            cells.push(Cell::Random(
                ti,
                cell_seed(config.seed, ti as u64, ii as u64),
            ));
        }
    }

    let records: Vec<SweepRecord> = cells
        .par_iter()
        .map(|cell| {
            let (ti, tag, base) = match *cell {
                Cell::Random(ti, seed) => {
                    let base = match config.family {
                        UtilityFamily::Linear => generate_linear_instance(config.n, seed),
                        UtilityFamily::Log => generate_log_instance(config.n, seed),
                    };
                    (ti, InstanceTag::Random(seed), base)
                }
                Cell::Probe(ti, kind) => {
                    let base = ContestInstance::linear(&extremal_valuations(kind, config.n), 0.0)?;
                    (ti, InstanceTag::Probe(kind), base)
                }
            };
            let instance = prepare(config, base, grid[ti])?;
            let data = evaluate_instance(&instance, &bounds[ti], &solver)?;
            Ok(SweepRecord {
                theta: grid[ti],
                tag,
                data,
            })
        })
        .collect::<Result<_>>()?;

    let summary = summarize(&grid, &records);
    Ok(SweepOutput { records, summary })
}

fn summarize(grid: &[f64], records: &[SweepRecord]) -> SweepSummary {
    let mut violations = BTreeMap::new();
    let mut advisory_violations = 0;
    let mut nonconverged = 0;
    let mut envelopes: Vec<ThetaEnvelope> = grid
        .iter()
        .map(|&theta| ThetaEnvelope {
            theta,
            min: [None; 6],
            max: [None; 6],
        })
        .collect();
    let mut ti = 0;
    for r in records {
        while envelopes[ti].theta != r.theta {
            ti += 1;
        }
        let Some(d) = &r.data else {
            nonconverged += 1;
            continue;
        };
        for &v in &d.violations {
            if v == ADVISORY_BOUND {
                advisory_violations += 1;
            } else {
                *violations.entry(v).or_insert(0) += 1;
            }
        }
        let env = &mut envelopes[ti];
        for (k, value) in d.ratios.iter().enumerate() {
            if let Some(x) = value.filter(|x| x.is_finite()) {
                env.min[k] = Some(env.min[k].map_or(x, |m: f64| m.min(x)));
                env.max[k] = Some(env.max[k].map_or(x, |m: f64| m.max(x)));
            }
        }
    }
    SweepSummary {
        records: records.len(),
        probes: records.iter().filter(|r| r.is_probe()).count(),
        nonconverged,
        violations,
        advisory_violations,
        envelopes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let c = SweepConfig::linear(5, 3.0, 0.05, 1, 0);
        let g = c.theta_grid();
        assert_eq!(g.len(), 61);
        assert_eq!(g[3], 0.15);
        assert_eq!(*g.last().unwrap(), 3.0);
    }

    #[test]
    fn validation() {
        let mut c = SweepConfig::linear(5, 1.0, 0.1, 1, 0);
        assert!(c.validate().is_ok());
        c.theta_step = 0.0;
        assert!(c.validate().is_err());
        let mut c = SweepConfig::linear(5, 1.0, 0.1, 0, 0);
        assert!(c.validate().is_err());
        c.instances_per_theta = 1;
        c.targeted = Some(6);
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_linear_sweep() {
        let out = run_sweep(&SweepConfig::linear(5, 1.0, 0.25, 20, 7)).unwrap();
        assert_eq!(out.records.len(), 5 * 24);
        assert_eq!(out.summary.probes, 5 * 4);
        assert_eq!(
            out.summary.total_violations(),
            0,
            "{:?}",
            out.summary.violations
        );
        for r in out.records.iter().filter(|r| r.theta == 0.0) {
            let d = r.data.as_ref().unwrap();
            assert_eq!(d.ratios[1], Some(1.0));
            assert_eq!(d.ratios[3], Some(1.0));
            assert_eq!(d.ratios[5], Some(1.0));
        }
        let csv = out.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
        let width = SWEEP_CSV_HEADER.split(',').count();
        assert!(lines.all(|l| l.split(',').count() == width));
    }

    #[test]
    fn small_log_sweep() {
        let out = run_sweep(&SweepConfig::log(4, 2.0, 1.0, 10, 3)).unwrap();
        assert_eq!(out.records.len(), 30);
        assert_eq!(out.summary.nonconverged, 0);
        assert_eq!(
            out.summary.total_violations(),
            0,
            "{:?}",
            out.summary.violations
        );
        for r in out.records.iter().filter(|r| r.theta == 0.0) {
            let d = r.data.as_ref().unwrap();
            assert_eq!(d.ratios[1], Some(1.0));
            assert_eq!(d.ratios[3], Some(1.0));
            assert_eq!(d.ratios[4], None);
        }
    }

    #[test]
    fn single_agent_revenue_ratio_is_unbounded() {
        let out = run_sweep(&SweepConfig::linear(1, 1.0, 1.0, 2, 1)).unwrap();
        let last = out.records.last().unwrap();
        assert_eq!(last.data.as_ref().unwrap().ratios[5], Some(f64::INFINITY));
        assert!(last.csv_row().contains("+inf"));
    }

    #[test]
    fn config_json() {
        let json = r#"{"n":5,"theta_start":0,"theta_stop":3,"theta_step":0.05,"instances_per_theta":10,"seed":1,"family":"log"}"#;
        let c: SweepConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.family, UtilityFamily::Log);
        assert_eq!(c.cost, 1.0);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"n":5,"bogus":1}"#).is_err());
    }
}
