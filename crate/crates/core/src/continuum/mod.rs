//! The generalized APP update with `alpha = 2` on a 1D grid.
//!
//! Each step of particle `i` multiplies `psi_i(u)` by the unary factor
//! `e^{-(dt/hbar) e_i(u)}` and by one factor per interacting particle,
//!
//! ```text
//! sum_l e^{-(dt/hbar) e_ij(u, x_l)} |psi_j(x_l)|^2 h,
//! ```
//!
//! then convolves with a Gaussian of standard deviation `sigma_i sqrt(dt)`
//! (`sigma_i^2 = hbar / m_i`) and renormalizes to unit L2 norm. Iterated, this
//! is a first-order splitting of imaginary-time evolution under
//! `H_i = -(hbar sigma_i^2 / 2) d^2/dx^2 + V_i`, so it relaxes to the ground
//! state of the self-consistent (Hartree) single-particle Hamiltonians.
//!
//! Grid functions use the quadrature `<f, g> = sum_k f_k g_k h`.

mod oracle;

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};

pub use oracle::{eigensolver_oracle, ground_state};

/// Smallest allowed kernel width `sigma sqrt(dt)` in units of the grid spacing.
pub const KERNEL_MIN_WIDTH: f64 = 0.5;

/// Kernel support is truncated at this many standard deviations.
pub const KERNEL_SUPPORT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The grid is a ring of `points` nodes with period `points * h`.
    Periodic,
    /// Values beyond either end are zero.
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    points: usize,
    boundary: Boundary,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, points: usize, boundary: Boundary) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid needs finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if points < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 8 points, got {points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            points,
            boundary,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.x(k)).collect()
    }

    /// Ring length of a periodic grid.
    pub fn period(&self) -> f64 {
        self.points as f64 * self.h()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.points).map(|k| f(self.x(k))).collect()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.h()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// `f / ||f||`, or `None` if the norm vanished or is not finite.
    pub fn normalized(&self, f: &[f64]) -> Option<Vec<f64>> {
        let n = self.norm(f);
        (n > 0.0 && n.is_finite()).then(|| f.iter().map(|v| v / n).collect())
    }

    /// `|<a, b>|` for unit-norm grid functions.
    pub fn overlap(&self, a: &[f64], b: &[f64]) -> f64 {
        (self.inner(a, b) / (self.norm(a) * self.norm(b))).abs()
    }

    /// Three-point second difference with this grid's boundary rule.
    pub fn second_difference(&self, f: &[f64]) -> Vec<f64> {
        let n = self.points;
        let h2 = self.h() * self.h();
        (0..n)
            .map(|k| {
                let (left, right) = match self.boundary {
                    Boundary::Periodic => (f[(k + n - 1) % n], f[(k + 1) % n]),
                    Boundary::Truncated => (
                        if k == 0 { 0.0 } else { f[k - 1] },
                        if k + 1 == n { 0.0 } else { f[k + 1] },
                    ),
                };
                (left - 2.0 * f[k] + right) / h2
            })
            .collect()
    }
}

type PairFn<'a> = Box<dyn Fn(f64, f64) -> f64 + 'a>;

/// Particles on a shared grid with unary and pairwise potentials sampled at
/// the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumModel {
    grid: Grid1D,
    hbar: f64,
    masses: Vec<f64>,
    unary: Vec<Vec<f64>>,
    /// `(i < j)` -> row-major `e_ij(x_k, x_l)`, row `k` for particle `i`.
    pairwise: BTreeMap<(usize, usize), Vec<f64>>,
}

impl ContinuumModel {
    /// Particles with the given masses and zero potentials.
    pub fn new(grid: Grid1D, hbar: f64, masses: Vec<f64>) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        if masses.is_empty() {
            return Err(Error::InvalidArgument("need at least one particle".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidArgument(format!("masses must be positive, got {m}")));
        }
        let n = grid.points();
        let unary = vec![vec![0.0; n]; masses.len()];
        Ok(Self {
            grid,
            hbar,
            masses,
            unary,
            pairwise: BTreeMap::new(),
        })
    }

    pub fn with_unary(mut self, i: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.set_unary(i, self.grid.sample(f))?;
        Ok(self)
    }

    pub fn set_unary(&mut self, i: usize, values: Vec<f64>) -> Result<()> {
        self.check_particle(i)?;
        if values.len() != self.grid.points() {
            return Err(Error::InvalidArgument(format!(
                "potential has {} samples, grid has {}",
                values.len(),
                self.grid.points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "potential of particle {i} is not finite"
            )));
        }
        self.unary[i] = values;
        Ok(())
    }

    /// Samples `e_ij(x, y)` with `x` the coordinate of particle `i`.
    pub fn with_pair(mut self, i: usize, j: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_particle(i)?;
        self.check_particle(j)?;
        if i == j {
            return Err(Error::InvalidArgument(format!("self pair ({i}, {i})")));
        }
        let (lo, hi, f): (usize, usize, PairFn<'_>) = if i < j {
            (i, j, Box::new(f))
        } else {
            (j, i, Box::new(move |x, y| f(y, x)))
        };
        let xs = self.grid.xs();
        let table: Vec<f64> = xs
            .iter()
            .flat_map(|&x| xs.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pair ({i}, {j}) potential is not finite"
            )));
        }
        self.pairwise.insert((lo, hi), table);
        Ok(self)
    }

    fn check_particle(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::InvalidArgument(format!(
                "particle {i} out of range for {} particles",
                self.n()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    /// `sigma_i^2 = hbar / m_i`.
    pub fn sigma_sq(&self, i: usize) -> f64 {
        self.hbar / self.masses[i]
    }

    /// `hbar sigma_i^2 / 2 = hbar^2 / (2 m_i)`.
    pub fn kinetic_coefficient(&self, i: usize) -> f64 {
        self.hbar * self.sigma_sq(i) / 2.0
    }

    pub fn unary(&self, i: usize) -> &[f64] {
        &self.unary[i]
    }

    /// Particles interacting with `i`, ascending.
    pub fn partners(&self, i: usize) -> Vec<usize> {
        self.pairwise
            .keys()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// `e_ij(x_k, x_l)`; zero when the pair has no potential.
    pub fn pair_value(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.grid.points();
        if i < j {
            self.pairwise.get(&(i, j)).map_or(0.0, |t| t[k * n + l])
        } else {
            self.pairwise.get(&(j, i)).map_or(0.0, |t| t[l * n + k])
        }
    }
}

/// One grid function per particle, each with unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunctionSet {
    psi: Vec<Vec<f64>>,
    dt: f64,
}

impl WaveFunctionSet {
    /// Normalizes each function; `dt` records the step that produced the set.
    pub fn new(grid: &Grid1D, functions: Vec<Vec<f64>>, dt: f64) -> Result<Self> {
        let psi = functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if f.len() != grid.points() {
                    return Err(Error::InvalidArgument(format!(
                        "function {i} has {} samples, grid has {}",
                        f.len(),
                        grid.points()
                    )));
                }
                if f.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "function {i} has a negative or non-finite sample"
                    )));
                }
                grid.normalized(f).ok_or(Error::Underflow { var: i })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { psi, dt })
    }

    pub fn uniform(model: &ContinuumModel) -> Self {
        let grid = model.grid();
        let c = 1.0 / (grid.points() as f64 * grid.h()).sqrt();
        Self {
            psi: vec![vec![c; grid.points()]; model.n()],
            dt: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.psi[i]
    }

    pub fn functions(&self) -> &[Vec<f64>] {
        &self.psi
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Max over particles of `| ||psi_i|| - 1 |`, and whether all samples are
    /// finite and non-negative.
    pub fn normalization_error(&self, grid: &Grid1D) -> (f64, bool) {
        let mut worst = 0.0f64;
        let mut ok = true;
        for f in &self.psi {
            ok &= f.iter().all(|v| v.is_finite() && *v >= 0.0);
            worst = worst.max((grid.norm(f) - 1.0).abs());
        }
        (worst, ok)
    }

    /// `max_i ||self_i - other_i||`.
    pub fn max_distance(&self, other: &WaveFunctionSet, grid: &Grid1D) -> f64 {
        self.psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                grid.norm(&d)
            })
            .fold(0.0, f64::max)
    }
}

/// Discrete Gaussian smoothing kernel over offsets `-half..=half` grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    taps: Vec<f64>,
    half: usize,
}

impl Kernel {
    /// Value at offset `o` (in grid points).
    pub fn at(&self, o: isize) -> f64 {
        let idx = o + self.half as isize;
        if idx < 0 || idx as usize >= self.taps.len() {
            0.0
        } else {
            self.taps[idx as usize]
        }
    }

    pub fn half_width(&self) -> usize {
        self.half
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// `h * sum_m K(x_m) f(x_k - x_m)`, circular or truncated per the grid.
    pub fn convolve(&self, grid: &Grid1D, f: &[f64]) -> Vec<f64> {
        let n = grid.points() as isize;
        let h = grid.h();
        let half = self.half as isize;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for (t, w) in self.taps.iter().enumerate() {
                    let src = k + t as isize - half;
                    let v = match grid.boundary() {
                        Boundary::Periodic => f[src.rem_euclid(n) as usize],
                        Boundary::Truncated if (0..n).contains(&src) => f[src as usize],
                        Boundary::Truncated => continue,
                    };
                    acc += w * v;
                }
                acc * h
            })
            .collect()
    }
}

/// `K(x) = e^{-x^2 / (2 sigma^2 dt)} / (sqrt(2 pi dt) sigma)`.
pub fn gaussian_density(sigma: f64, dt: f64, x: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma * dt)).exp() / ((2.0 * std::f64::consts::PI * dt).sqrt() * sigma)
}

/// Samples `K` on grid offsets and rescales so that `sum_k K(x_k) h = 1`.
pub fn gaussian_kernel(sigma: f64, dt: f64, grid: &Grid1D) -> Result<Kernel> {
    if !(sigma > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kernel needs sigma > 0 and dt > 0, got sigma = {sigma}, dt = {dt}"
        )));
    }
    let h = grid.h();
    let width = sigma * dt.sqrt();
    if width < KERNEL_MIN_WIDTH * h {
        return Err(Error::KernelUnderResolved {
            width,
            min_ratio: KERNEL_MIN_WIDTH,
            min: KERNEL_MIN_WIDTH * h,
        });
    }
    let half = (KERNEL_SUPPORT * width / h).ceil() as usize;
    let mut taps: Vec<f64> = (-(half as isize)..=half as isize)
        .map(|o| gaussian_density(sigma, dt, o as f64 * h))
        .collect();
    let mass: f64 = taps.iter().sum::<f64>() * h;
    taps.iter_mut().for_each(|t| *t /= mass);
    Ok(Kernel { taps, half })
}

/// `V_i(x) = e_i(x) + sum_{j != i} sum_l e_ij(x, x_l) |psi_j(x_l)|^2 h`.
pub fn hartree_potential(model: &ContinuumModel, psi: &WaveFunctionSet, i: usize) -> Vec<f64> {
    let grid = model.grid();
    let n = grid.points();
    let h = grid.h();
    let mut v = model.unary(i).to_vec();
    for j in model.partners(i) {
        let density: Vec<f64> = psi.get(j).iter().map(|p| p * p * h).collect();
        for (k, vk) in v.iter_mut().enumerate() {
            *vk += (0..n).map(|l| model.pair_value(i, j, k, l) * density[l]).sum::<f64>();
        }
    }
    v
}

/// `H_i psi = -(hbar sigma_i^2 / 2) D^2 psi + V_i psi`, with `V_i` formed from
/// the other functions of `psi` and applied to `psi_i`.
pub fn hamiltonian_apply(model: &ContinuumModel, psi: &WaveFunctionSet, i: usize) -> Vec<f64> {
    let v = hartree_potential(model, psi, i);
    apply_hamiltonian(model.grid(), model.kinetic_coefficient(i), &v, psi.get(i))
}

/// `-c D^2 f + V f`.
pub fn apply_hamiltonian(grid: &Grid1D, kinetic: f64, potential: &[f64], f: &[f64]) -> Vec<f64> {
    grid.second_difference(f)
        .iter()
        .zip(potential)
        .zip(f)
        .map(|((d2, v), fk)| -kinetic * d2 + v * fk)
        .collect()
}

fn rayleigh(grid: &Grid1D, f: &[f64], hf: &[f64]) -> f64 {
    grid.inner(f, hf) / grid.inner(f, f)
}

fn residual(grid: &Grid1D, f: &[f64], hf: &[f64], e: f64) -> f64 {
    let r: Vec<f64> = hf.iter().zip(f).map(|(a, b)| a - e * b).collect();
    grid.norm(&r) / grid.norm(f)
}

/// `<psi_i, H_i psi_i> / <psi_i, psi_i>`.
pub fn rayleigh_energy(model: &ContinuumModel, psi: &WaveFunctionSet, i: usize) -> f64 {
    rayleigh(model.grid(), psi.get(i), &hamiltonian_apply(model, psi, i))
}

/// `||H_i psi_i - E_i psi_i|| / ||psi_i||` with `E_i` the Rayleigh energy.
pub fn stationarity_residual(model: &ContinuumModel, psi: &WaveFunctionSet, i: usize) -> f64 {
    let grid = model.grid();
    let hf = hamiltonian_apply(model, psi, i);
    residual(grid, psi.get(i), &hf, rayleigh(grid, psi.get(i), &hf))
}

/// Precomputed factors for repeated steps at a fixed `dt`.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    model: &'a ContinuumModel,
    dt: f64,
    kernels: Vec<Kernel>,
    /// `-(dt/hbar) e_i(x_k)` per particle.
    unary_log: Vec<Vec<f64>>,
    /// Ordered `(i, j)` -> (row shift `-(dt/hbar) min_l e_ij(x_k, x_l)`,
    /// row-major `e^{-(dt/hbar) e_ij(x_k, x_l)}` divided by `e^{shift_k}`).
    pair_factors: BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a ContinuumModel, dt: f64) -> Result<Self> {
        let grid = model.grid();
        let n = grid.points();
        let scale = dt / model.hbar();
        let kernels = (0..model.n())
            .map(|i| gaussian_kernel(model.sigma_sq(i).sqrt(), dt, grid))
            .collect::<Result<Vec<_>>>()?;
        let unary_log = (0..model.n())
            .map(|i| model.unary(i).iter().map(|e| -scale * e).collect())
            .collect();
        let mut pair_factors = BTreeMap::new();
        for i in 0..model.n() {
            for j in model.partners(i) {
                let mut shift = Vec::with_capacity(n);
                let mut table = Vec::with_capacity(n * n);
                for k in 0..n {
                    let row: Vec<f64> = (0..n).map(|l| model.pair_value(i, j, k, l)).collect();
                    let m = row.iter().copied().fold(f64::INFINITY, f64::min);
                    shift.push(-scale * m);
                    table.extend(row.iter().map(|e| (-scale * (e - m)).exp()));
                }
                pair_factors.insert((i, j), (shift, table));
            }
        }
        Ok(Self {
            model,
            dt,
            kernels,
            unary_log,
            pair_factors,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kernel(&self, i: usize) -> &Kernel {
        &self.kernels[i]
    }

    /// One synchronous step: every particle is updated from the previous set.
    pub fn step(&self, psi: &WaveFunctionSet) -> Result<WaveFunctionSet> {
        let grid = self.model.grid();
        let n = grid.points();
        let h = grid.h();
        let mut out = Vec::with_capacity(psi.n());
        for i in 0..self.model.n() {
            let mut log_f = self.unary_log[i].clone();
            for j in self.model.partners(i) {
                let (shift, table) = &self.pair_factors[&(i, j)];
                let density: Vec<f64> = psi.get(j).iter().map(|p| p * p * h).collect();
                for (k, lf) in log_f.iter_mut().enumerate() {
                    let row = &table[k * n..(k + 1) * n];
                    let s: f64 = row.iter().zip(&density).map(|(a, b)| a * b).sum();
                    *lf += shift[k] + s.ln();
                }
            }
            let top = log_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                return Err(Error::Underflow { var: i });
            }
            let weighted: Vec<f64> = psi
                .get(i)
                .iter()
                .zip(&log_f)
                .map(|(p, lf)| p * (lf - top).exp())
                .collect();
            let smoothed = self.kernels[i].convolve(grid, &weighted);
            out.push(grid.normalized(&smoothed).ok_or(Error::Underflow { var: i })?);
        }
        Ok(WaveFunctionSet { psi: out, dt: self.dt })
    }
}

/// One step at `dt`; see [`Propagator`] for repeated steps.
pub fn step(model: &ContinuumModel, psi: &WaveFunctionSet, dt: f64) -> Result<WaveFunctionSet> {
    Propagator::new(model, dt)?.step(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub dt: f64,
    /// Stop once `max_i ||psi_i(t+dt) - psi_i(t)|| <= tol * dt`.
    pub tol: f64,
    pub max_steps: usize,
    /// A run only counts as converged if every stationarity residual is at
    /// most this.
    pub residual_tol: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            tol: 1e-6,
            max_steps: 200_000,
            residual_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryReport {
    /// Rayleigh energies `E_i`.
    pub energies: Vec<f64>,
    /// `E_i / hbar`.
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
}

impl StationaryReport {
    pub fn compute(
        model: &ContinuumModel,
        psi: &WaveFunctionSet,
        steps: usize,
        settled: bool,
        residual_tol: f64,
    ) -> Self {
        let energies: Vec<f64> = (0..model.n()).map(|i| rayleigh_energy(model, psi, i)).collect();
        let residuals: Vec<f64> = (0..model.n()).map(|i| stationarity_residual(model, psi, i)).collect();
        let epsilons = energies.iter().map(|e| e / model.hbar()).collect();
        let converged = settled && residuals.iter().all(|r| *r <= residual_tol);
        Self {
            energies,
            epsilons,
            residuals,
            steps,
            converged,
        }
    }
}

/// Relaxes from uniform functions.
pub fn evolve_to_stationary(
    model: &ContinuumModel,
    config: &EvolveConfig,
) -> Result<(WaveFunctionSet, StationaryReport)> {
    evolve_from(model, WaveFunctionSet::uniform(model), config, |_, _| {})
}

/// Relaxes from `init`, calling `observe(t, psi)` on the initial set and
/// after every step.
pub fn evolve_from(
    model: &ContinuumModel,
    init: WaveFunctionSet,
    config: &EvolveConfig,
    mut observe: impl FnMut(usize, &WaveFunctionSet),
) -> Result<(WaveFunctionSet, StationaryReport)> {
    if !(config.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            config.tol
        )));
    }
    if init.n() != model.n() {
        return Err(Error::InvalidArgument(format!(
            "{} initial functions for {} particles",
            init.n(),
            model.n()
        )));
    }
    let prop = Propagator::new(model, config.dt)?;
    let grid = model.grid();
    let mut psi = init;
    observe(0, &psi);
    let mut steps = 0;
    let mut settled = false;
    while steps < config.max_steps {
        let next = prop.step(&psi)?;
        let change = next.max_distance(&psi, grid);
        psi = next;
        steps += 1;
        observe(steps, &psi);
        if change <= config.tol * config.dt {
            settled = true;
            break;
        }
    }
    let report = StationaryReport::compute(model, &psi, steps, settled, config.residual_tol);
    Ok((psi, report))
}

/// Columns `x, psi_0, V_0, psi_1, V_1, ...`.
pub fn grid_csv(model: &ContinuumModel, psi: &WaveFunctionSet) -> String {
    let grid = model.grid();
    let potentials: Vec<Vec<f64>> = (0..model.n()).map(|i| hartree_potential(model, psi, i)).collect();
    let mut s = String::from("x");
    for i in 0..model.n() {
        let _ = write!(s, ",psi_{i},V_{i}");
    }
    s.push('\n');
    for k in 0..grid.points() {
        let _ = write!(s, "{:?}", grid.x(k));
        for i in 0..model.n() {
            let _ = write!(s, ",{:?},{:?}", psi.get(i)[k], potentials[i][k]);
        }
        s.push('\n');
    }
    s
}

/// One row per particle: `particle, energy, epsilon, residual, steps, converged`.
pub fn report_csv(report: &StationaryReport) -> String {
    let mut s = String::from("particle,energy,epsilon,residual,steps,converged\n");
    for i in 0..report.energies.len() {
        let _ = writeln!(
            s,
            "{i},{:?},{:?},{:?},{},{}",
            report.energies[i], report.epsilons[i], report.residuals[i], report.steps, report.converged
        );
    }
    s
}
