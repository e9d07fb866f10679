//! Incremental brittle-damage evolution of the bar at a fixed scale ε.
//!
//! Each cell carries its sound volume fraction Θ and the homogenized
//! stiffness `a` of its sound/damaged laminate. A load step relaxes every
//! cell to the convex envelope of its two-well energy; the cells interact
//! only through the boundary jump, so the stress is one scalar found by
//! bisection on the total elongation.

use crate::datum::BoundaryDatum;
use crate::envelope::{gclosure_1d, StrainRange, TwoWellParams};
use crate::error::{Error, Result};
use crate::material::MaterialParams;

const SIGMA_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;
/// Relative tolerance for the stiffness identity and per-cell stress checks.
const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub sound_fraction: f64,
    pub stiffness: f64,
    pub strain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsState {
    pub epsilon: f64,
    pub length: f64,
    pub cells: Vec<Cell>,
    pub sigma: f64,
    pub jump: f64,
    pub step: usize,
}

/// Per-cell elastic strain, plastic strain and damage density.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedFields {
    pub elastic: Vec<f64>,
    pub plastic: Vec<f64>,
    pub damage: Vec<f64>,
}

/// Stiffness of a cell with sound fraction `theta` at scale `eps`.
pub fn laminate_stiffness(m: &MaterialParams, eps: f64, theta: f64) -> f64 {
    1.0 / ((1.0 - theta) / (eps * m.a0) + theta / m.a1)
}

impl EpsState {
    /// Undamaged, unloaded bar.
    pub fn pristine(m: &MaterialParams, eps: f64, n_cells: usize) -> Result<Self> {
        m.overshoot(eps)?;
        if n_cells == 0 {
            return Err(Error::InvalidParams("need at least one cell".into()));
        }
        Ok(EpsState {
            epsilon: eps,
            length: m.length,
            cells: vec![
                Cell {
                    sound_fraction: 1.0,
                    stiffness: m.a1,
                    strain: 0.0,
                };
                n_cells
            ],
            sigma: 0.0,
            jump: 0.0,
            step: 0,
        })
    }

    pub fn cell_width(&self) -> f64 {
        self.length / self.cells.len() as f64
    }

    pub fn elastic_energy(&self) -> f64 {
        let dx = self.cell_width();
        self.cells
            .iter()
            .map(|c| 0.5 * self.sigma * self.sigma / c.stiffness * dx)
            .sum()
    }

    /// Damage measure `∫ (1 - Θ)/ε dx`.
    pub fn damage_length(&self) -> f64 {
        let dx = self.cell_width();
        self.cells
            .iter()
            .map(|c| (1.0 - c.sound_fraction) / self.epsilon * dx)
            .sum()
    }

    /// Total energy: stored elastic energy plus `κ ∫ (1 - Θ)/ε dx`.
    pub fn energy(&self, m: &MaterialParams) -> f64 {
        self.elastic_energy() + m.kappa * self.damage_length()
    }

    pub fn theta_mean(&self) -> f64 {
        self.cells.iter().map(|c| c.sound_fraction).sum::<f64>() / self.cells.len() as f64
    }

    pub fn derived_fields(&self, m: &MaterialParams) -> DerivedFields {
        let s = self.sigma;
        let eps = self.epsilon;
        DerivedFields {
            elastic: self
                .cells
                .iter()
                .map(|c| s * c.sound_fraction / m.a1)
                .collect(),
            plastic: self
                .cells
                .iter()
                .map(|c| s * (1.0 - c.sound_fraction) / (eps * m.a0))
                .collect(),
            damage: self
                .cells
                .iter()
                .map(|c| (1.0 - c.sound_fraction) / eps)
                .collect(),
        }
    }

    /// Stiffness identity, stress homogeneity and the elongation constraint.
    pub fn check_invariants(&self, m: &MaterialParams) -> Result<()> {
        let dx = self.cell_width();
        let mut elongation = 0.0;
        for (i, c) in self.cells.iter().enumerate() {
            if !(0.0..=1.0).contains(&c.sound_fraction) {
                return Err(Error::Invariant(format!(
                    "cell {i}: sound fraction {} outside [0, 1]",
                    c.sound_fraction
                )));
            }
            let a = laminate_stiffness(m, self.epsilon, c.sound_fraction);
            if (a - c.stiffness).abs() > IDENTITY_TOL * a {
                return Err(Error::Invariant(format!(
                    "cell {i}: stiffness {} but laminate formula gives {a}",
                    c.stiffness
                )));
            }
            let local = c.stiffness * c.strain;
            if (local - self.sigma).abs() > IDENTITY_TOL * self.sigma.abs().max(1.0) {
                return Err(Error::Invariant(format!(
                    "cell {i}: local stress {local} differs from {}",
                    self.sigma
                )));
            }
            elongation += c.strain * dx;
        }
        let scale = self.jump.abs().max(self.length);
        if (elongation - self.jump).abs() > 1e-10 * scale {
            return Err(Error::Invariant(format!(
                "elongation {elongation} does not match jump {}",
                self.jump
            )));
        }
        Ok(())
    }

    pub fn is_homogeneous(&self, tol: f64) -> bool {
        let c0 = self.cells[0];
        self.cells.iter().all(|c| {
            (c.sound_fraction - c0.sound_fraction).abs() <= tol
                && (c.stiffness - c0.stiffness).abs() <= tol * c0.stiffness
        })
    }
}

/// Energy minimized by a load step: elastic energy of the new state plus the
/// cost of the damage created during the step.
pub fn incremental_energy(m: &MaterialParams, prev: &EpsState, next: &EpsState) -> f64 {
    let dx = next.cell_width();
    let created: f64 = prev
        .cells
        .iter()
        .zip(&next.cells)
        .map(|(p, n)| (p.sound_fraction - n.sound_fraction) * dx)
        .sum();
    next.elastic_energy() + m.kappa / next.epsilon * created
}

fn strain_range(well: &Option<TwoWellParams>, stiffness: f64, sigma: f64) -> StrainRange {
    match well {
        Some(w) => w.strain_at_stress(sigma),
        None => {
            let x = sigma / stiffness;
            StrainRange { lo: x, hi: x }
        }
    }
}

/// One load step: relax every cell against the new boundary jump.
pub fn incremental_step(prev: &EpsState, m: &MaterialParams, jump: f64) -> Result<EpsState> {
    let eps = prev.epsilon;
    let weak = eps * m.a0;
    let dx = prev.cell_width();
    let wells: Vec<Option<TwoWellParams>> = prev
        .cells
        .iter()
        .map(|c| TwoWellParams::damage_cell(m, eps, c.sound_fraction, c.stiffness))
        .collect();
    let bisect_err = |reason: String| Error::Bisection { jump, reason };

    let excess = |sigma: f64| -> f64 {
        prev.cells
            .iter()
            .zip(&wells)
            .map(|(c, w)| strain_range(w, c.stiffness, sigma).lo * dx)
            .sum::<f64>()
            - jump
    };

    let bound = m.yield_stress() * m.overshoot(eps)? + m.a1 * jump.abs() / m.length;
    let (mut lo, mut hi) = (-bound, bound);
    if excess(lo) > 0.0 || excess(hi) < 0.0 {
        return Err(bisect_err(format!("[-{bound}, {bound}] does not bracket")));
    }
    let mut iterations = 0;
    while hi - lo > SIGMA_TOL {
        if iterations == MAX_BISECTIONS {
            return Err(bisect_err(format!(
                "no convergence after {MAX_BISECTIONS} iterations, bracket width {}",
                hi - lo
            )));
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let sigma_b = 0.5 * (lo + hi);

    let strains = plateau_split(prev, &wells, jump, sigma_b)
        .unwrap_or_else(|| elastic_split(prev, &wells, jump, sigma_b));
    let (sigma, strains) = strains;

    let mut cells = Vec::with_capacity(prev.cells.len());
    for ((c, w), &xi) in prev.cells.iter().zip(&wells).zip(&strains) {
        let theta = w.map_or(0.0, |w| w.optimal_theta(xi));
        let stiffness = if theta == 0.0 {
            c.stiffness
        } else {
            gclosure_1d(theta, weak, c.stiffness)?.min(c.stiffness)
        };
        cells.push(Cell {
            sound_fraction: (1.0 - theta) * c.sound_fraction,
            stiffness,
            strain: xi,
        });
    }
    let next = EpsState {
        epsilon: eps,
        length: prev.length,
        cells,
        sigma,
        jump,
        step: prev.step + 1,
    };
    next.check_invariants(m)?;
    Ok(next)
}

/// Stress lands on the common plateau of some cells: those cells share the
/// remaining elongation in equal proportion of their plateau widths.
fn plateau_split(
    prev: &EpsState,
    wells: &[Option<TwoWellParams>],
    jump: f64,
    sigma_b: f64,
) -> Option<(f64, Vec<f64>)> {
    let dx = prev.cell_width();
    let on_plateau: Vec<bool> = wells
        .iter()
        .map(|w| {
            w.is_some_and(|w| {
                let s = w.kinks().plateau_slope;
                (s - sigma_b.abs()).abs() <= 1e-9 * s.max(1.0)
            })
        })
        .collect();
    let count = on_plateau.iter().filter(|&&p| p).count();
    if count == 0 {
        return None;
    }
    let slope = wells
        .iter()
        .zip(&on_plateau)
        .filter(|(_, &p)| p)
        .map(|(w, _)| w.unwrap().kinks().plateau_slope)
        .sum::<f64>()
        / count as f64;
    let sigma = slope.copysign(sigma_b);

    let mut fixed = 0.0;
    let (mut lo_sum, mut width_sum) = (0.0, 0.0);
    let mut ranges = Vec::with_capacity(wells.len());
    for ((c, w), &p) in prev.cells.iter().zip(wells).zip(&on_plateau) {
        let r = if p {
            // kinks directly: the averaged slope may sit an ulp off this cell's own
            let k = w.unwrap().kinks();
            let r = if sigma >= 0.0 {
                StrainRange {
                    lo: k.xi1,
                    hi: k.xi2,
                }
            } else {
                StrainRange {
                    lo: -k.xi2,
                    hi: -k.xi1,
                }
            };
            lo_sum += r.lo * dx;
            width_sum += (r.hi - r.lo) * dx;
            r
        } else {
            let r = strain_range(w, c.stiffness, sigma);
            fixed += r.lo * dx;
            r
        };
        ranges.push(r);
    }
    let target = jump - fixed;
    let tol = 1e-9 * jump.abs().max(prev.length);
    if target < lo_sum - tol || target > lo_sum + width_sum + tol {
        return None;
    }
    let lambda = if width_sum > 0.0 {
        ((target - lo_sum) / width_sum).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let strains = ranges
        .iter()
        .zip(&on_plateau)
        .map(|(r, &p)| {
            if p {
                r.lo + lambda * (r.hi - r.lo)
            } else {
                r.lo
            }
        })
        .collect();
    Some((sigma, strains))
}

/// Every cell sits on a single-valued branch: solve the series spring exactly.
fn elastic_split(
    prev: &EpsState,
    wells: &[Option<TwoWellParams>],
    jump: f64,
    sigma_b: f64,
) -> (f64, Vec<f64>) {
    let dx = prev.cell_width();
    let moduli: Vec<f64> = prev
        .cells
        .iter()
        .zip(wells)
        .map(|(c, w)| match w {
            Some(w) if sigma_b.abs() > w.kinks().plateau_slope => 2.0 * w.a,
            _ => c.stiffness,
        })
        .collect();
    let compliance: f64 = moduli.iter().map(|k| dx / k).sum();
    let sigma = jump / compliance;
    (sigma, moduli.iter().map(|k| sigma / k).collect())
}

/// Minimizer of the first incremental problem, started from the pristine bar.
pub fn initial_step(m: &MaterialParams, eps: f64, n_cells: usize, jump: f64) -> Result<EpsState> {
    let pristine = EpsState::pristine(m, eps, n_cells)?;
    let mut s = incremental_step(&pristine, m, jump)?;
    s.step = 0;
    Ok(s)
}

/// A time-indexed ε-model run with its energy bookkeeping.
#[derive(Clone, Debug)]
pub struct EpsTrajectory {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub states: Vec<EpsState>,
    pub energy: Vec<f64>,
    /// Cumulative external work with trapezoidal stress.
    pub work: Vec<f64>,
    /// `energy - energy[0] - work`.
    pub eb_residual: Vec<f64>,
}

impl EpsTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.sigma).collect()
    }

    pub fn damage_length(&self) -> Vec<f64> {
        self.states.iter().map(EpsState::damage_length).collect()
    }

    /// Monotone damage and stiffness between consecutive states.
    pub fn check_monotone(&self) -> Result<()> {
        for (k, w) in self.states.windows(2).enumerate() {
            for (i, (p, n)) in w[0].cells.iter().zip(&w[1].cells).enumerate() {
                if n.sound_fraction > p.sound_fraction || n.stiffness > p.stiffness {
                    return Err(Error::Invariant(format!(
                        "step {}: cell {i} healed ({} -> {}, a {} -> {})",
                        k + 1,
                        p.sound_fraction,
                        n.sound_fraction,
                        p.stiffness,
                        n.stiffness
                    )));
                }
            }
        }
        Ok(())
    }

    /// Uniform energy and stress bounds with `C = energy[0] + Σ max|σ| |ΔJ|`.
    pub fn check_uniform_bounds(&self, m: &MaterialParams) -> Result<()> {
        let mut c = self.energy[0];
        for w in self.states.windows(2) {
            c += w[0].sigma.abs().max(w[1].sigma.abs()) * (w[1].jump - w[0].jump).abs();
        }
        let sigma_max = (2.0 * m.a1 * c / m.length).sqrt();
        for (k, (s, e)) in self.states.iter().zip(&self.energy).enumerate() {
            if *e > c * (1.0 + 1e-12) + 1e-14 {
                return Err(Error::Invariant(format!(
                    "step {k}: energy {e} exceeds bound {c}"
                )));
            }
            if s.sigma.abs() > sigma_max * (1.0 + 1e-12) + 1e-14 {
                return Err(Error::Invariant(format!(
                    "step {k}: |sigma| {} exceeds bound {sigma_max}",
                    s.sigma
                )));
            }
        }
        Ok(())
    }

    /// `|σ| ≤ s* L_ε` while some cell is still stiffer than the damaged phase.
    pub fn check_stress_regime(&self, m: &MaterialParams) -> Result<()> {
        let cap = m.yield_stress() * m.overshoot(self.epsilon)?;
        let weak = self.epsilon * m.a0;
        for (k, s) in self.states.iter().enumerate() {
            let stiff = s.cells.iter().any(|c| c.stiffness > weak * (1.0 + 1e-12));
            if stiff && s.sigma.abs() > cap * (1.0 + 1e-12) {
                return Err(Error::Invariant(format!(
                    "step {k}: |sigma| {} above plateau stress {cap}",
                    s.sigma
                )));
            }
        }
        Ok(())
    }
}

/// Runs the ε-model along `grid`, which must refine the datum's samples.
pub fn run_eps(
    m: &MaterialParams,
    eps: f64,
    n_cells: usize,
    w: &BoundaryDatum,
    grid: &[f64],
) -> Result<EpsTrajectory> {
    w.check_grid(grid)?;
    let first = initial_step(m, eps, n_cells, w.jump(grid[0])).map_err(|e| Error::Step {
        index: 0,
        time: grid[0],
        source: Box::new(e),
    })?;
    let e0 = first.energy(m);
    let mut traj = EpsTrajectory {
        epsilon: eps,
        times: vec![grid[0]],
        states: vec![first],
        energy: vec![e0],
        work: vec![0.0],
        eb_residual: vec![0.0],
    };
    for (k, &t) in grid.iter().enumerate().skip(1) {
        let prev = traj.states.last().unwrap();
        let jump = w.jump(t);
        let next = incremental_step(prev, m, jump).map_err(|e| Error::Step {
            index: k,
            time: t,
            source: Box::new(e),
        })?;
        let work = traj.work.last().unwrap() + 0.5 * (prev.sigma + next.sigma) * (jump - prev.jump);
        let energy = next.energy(m);
        traj.eb_residual.push(energy - e0 - work);
        traj.energy.push(energy);
        traj.work.push(work);
        traj.times.push(t);
        traj.states.push(next);
    }
    Ok(traj)
}
