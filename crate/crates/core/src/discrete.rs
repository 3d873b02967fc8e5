//! The APP iteration on pairwise energy models and its power/smoothing
//! generalization.
//!
//! One synchronous step computes, for every variable `i` and value `x`,
//!
//! ```text
//! psi_i(x) <- S( e^{-e_i(x)/hbar} * prod_{j != i} sum_y e^{-e_ij(x,y)/hbar} |psi_j(y)|^alpha ) / Z_i
//! ```
//!
//! from the previous beliefs only. Products are accumulated as sums of
//! logarithms, and each inner sum is a log-sum-exp, so long products over
//! many neighbours cannot underflow before normalization.

use std::fmt::Write;

use crate::energy::{total_energy, Assignment, EnergyModel, SoftAssignmentSet};
use crate::error::{Error, Result};

/// Exhaustive search refuses models with more assignments than this.
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Uniform,
    Delta(Assignment),
    Explicit(SoftAssignmentSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Power applied to incoming beliefs; 1 is the plain APP update.
    pub alpha: f64,
    /// Smoothing factor in `[0, 1]`; 0 disables smoothing.
    pub beta: f64,
    pub max_iter: usize,
    /// Stop once the max-over-variables L1 change is at most this.
    pub tol: f64,
    pub init: Init,
    /// Keep the per-iteration residuals in [`RunReport::trace`].
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            max_iter: 1000,
            tol: 1e-10,
            init: Init::Uniform,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_params(self.alpha, self.beta)?;
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

fn check_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("beta must be in [0, 1], got {beta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub iterations: usize,
    pub converged: bool,
    /// Max over variables of the L1 change in the last step; infinite if no
    /// step was taken.
    pub final_residual: f64,
    pub trace: Option<Vec<f64>>,
    pub hard: Assignment,
    pub energy: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Normalizes `exp(log_f)` into a distribution, shifting by the maximum.
fn normalize_log(log_f: &[f64], var: usize) -> Result<Vec<f64>> {
    let m = log_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::Underflow { var });
    }
    let w: Vec<f64> = log_f.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / z).collect())
}

/// Unsmoothed, normalized update of variable `i`; `log_weight(p)` is the
/// logarithm of the factor a neighbour belief `p` contributes.
fn update_variable(
    model: &EnergyModel,
    psi: &SoftAssignmentSet,
    i: usize,
    log_weight: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let hbar = model.hbar();
    let mut log_f: Vec<f64> = model.unary(i).iter().map(|e| -e / hbar).collect();
    for nb in model.neighbors(i) {
        let j = nb.other;
        let w: Vec<f64> = psi.get(j).iter().map(|&p| log_weight(p)).collect();
        for (x, lf) in log_f.iter_mut().enumerate() {
            let terms = w
                .iter()
                .enumerate()
                .map(|(y, wy)| -model.neighbor_energy(i, nb, x, y) / hbar + wy);
            *lf += log_sum_exp(terms);
        }
    }
    normalize_log(&log_f, i)
}

fn check_inputs(model: &EnergyModel, psi: &SoftAssignmentSet) -> Result<()> {
    model.ensure_valid()?;
    if !psi.matches(model.domains()) {
        return Err(Error::InvalidArgument("beliefs do not match model domains".into()));
    }
    Ok(())
}

/// One synchronous APP step.
pub fn app_step(model: &EnergyModel, psi: &SoftAssignmentSet) -> Result<SoftAssignmentSet> {
    check_inputs(model, psi)?;
    let tables = (0..model.n())
        .map(|i| update_variable(model, psi, i, f64::ln))
        .collect::<Result<Vec<_>>>()?;
    Ok(SoftAssignmentSet::from_normalized(tables))
}

/// One synchronous step of the generalized update: incoming beliefs are
/// raised to `alpha`, and each normalized product is smoothed with `beta`.
pub fn gapp_step(model: &EnergyModel, psi: &SoftAssignmentSet, alpha: f64, beta: f64) -> Result<SoftAssignmentSet> {
    check_inputs(model, psi)?;
    check_params(alpha, beta)?;
    gapp_step_unchecked(model, psi, alpha, beta)
}

fn gapp_step_unchecked(
    model: &EnergyModel,
    psi: &SoftAssignmentSet,
    alpha: f64,
    beta: f64,
) -> Result<SoftAssignmentSet> {
    // |p|^0 = 1 even for p = 0
    let log_weight = |p: f64| if alpha == 0.0 { 0.0 } else { alpha * p.ln() };
    let tables = (0..model.n())
        .map(|i| {
            let t = update_variable(model, psi, i, log_weight)?;
            Ok(if beta == 0.0 { t } else { smooth(&t, beta, t.len()) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SoftAssignmentSet::from_normalized(tables))
}

/// `(1 - beta) psi + beta / |D|`.
pub fn smooth(psi_i: &[f64], beta: f64, domain_size: usize) -> Vec<f64> {
    let floor = beta / domain_size as f64;
    psi_i.iter().map(|p| (1.0 - beta) * p + floor).collect()
}

/// Per-variable argmax; ties go to the smallest index.
pub fn hard_decision(psi: &SoftAssignmentSet) -> Assignment {
    let values = psi
        .tables()
        .iter()
        .map(|t| {
            t.iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |best, (k, &p)| if p > best.1 { (k, p) } else { best },
                )
                .0
        })
        .collect();
    Assignment::new(values)
}

/// `max_i |psi_i - step(psi)_i|_1` for the generalized step.
pub fn fixed_point_residual(model: &EnergyModel, psi: &SoftAssignmentSet, alpha: f64, beta: f64) -> Result<f64> {
    Ok(psi.max_l1_distance(&gapp_step(model, psi, alpha, beta)?))
}

pub fn run_solver(model: &EnergyModel, config: &SolverConfig) -> Result<(SoftAssignmentSet, RunReport)> {
    run_solver_observed(model, config, |_, _| {})
}

/// [`run_solver`], calling `observe(t, psi)` on the initial beliefs (`t = 0`)
/// and after every step.
pub fn run_solver_observed(
    model: &EnergyModel,
    config: &SolverConfig,
    mut observe: impl FnMut(usize, &SoftAssignmentSet),
) -> Result<(SoftAssignmentSet, RunReport)> {
    config.validate()?;
    model.ensure_valid()?;
    let mut psi = match &config.init {
        Init::Uniform => SoftAssignmentSet::uniform(model.domains()),
        Init::Delta(a) => SoftAssignmentSet::delta(model.domains(), a)?,
        Init::Explicit(s) => {
            if !s.matches(model.domains()) {
                return Err(Error::InvalidArgument(
                    "initial beliefs do not match model domains".into(),
                ));
            }
            s.clone()
        }
    };
    observe(0, &psi);

    let mut trace = config.record_trace.then(Vec::new);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let next = gapp_step_unchecked(model, &psi, config.alpha, config.beta)?;
        residual = next.max_l1_distance(&psi);
        psi = next;
        iterations += 1;
        observe(iterations, &psi);
        if let Some(t) = trace.as_mut() {
            t.push(residual);
        }
        if residual <= config.tol {
            converged = true;
            break;
        }
    }

    let hard = hard_decision(&psi);
    let energy = total_energy(model, &hard)?;
    let report = RunReport {
        iterations,
        converged,
        final_residual: residual,
        trace,
        hard,
        energy,
    };
    Ok((psi, report))
}

/// Exhaustive global minimum; ties go to the lexicographically smallest
/// assignment.
pub fn brute_force_min(model: &EnergyModel) -> Result<(Assignment, f64)> {
    model.ensure_valid()?;
    let size: f64 = model.domains().iter().map(|&d| d as f64).product();
    if size > BRUTE_FORCE_LIMIT as f64 {
        return Err(Error::SearchSpaceTooLarge {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let n = model.n();
    let mut cur = vec![0usize; n];
    let mut best = (cur.clone(), f64::INFINITY);
    loop {
        let e = total_energy(model, &Assignment::new(cur.clone()))?;
        if e < best.1 {
            best = (cur.clone(), e);
        }
        // odometer, last variable fastest, so visits are in lexicographic order
        let mut k = n;
        loop {
            if k == 0 {
                return Ok((Assignment::new(best.0), best.1));
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < model.domain(k) {
                break;
            }
            cur[k] = 0;
        }
    }
}

/// Beliefs and the run summary as CSV: one row per (variable, value).
pub fn beliefs_csv(psi: &SoftAssignmentSet, report: &RunReport) -> String {
    let mut s = String::from("var,value,belief,hard\n");
    for (i, t) in psi.tables().iter().enumerate() {
        for (x, p) in t.iter().enumerate() {
            let _ = writeln!(s, "{i},{x},{p:?},{}", u8::from(report.hard.values()[i] == x));
        }
    }
    s
}

/// Single-row run summary CSV.
pub fn summary_csv(report: &RunReport) -> String {
    let hard: Vec<String> = report.hard.values().iter().map(ToString::to_string).collect();
    format!(
        "iterations,converged,final_residual,energy,hard\n{},{},{:?},{:?},{}\n",
        report.iterations,
        report.converged,
        report.final_residual,
        report.energy,
        hard.join(" ")
    )
}
