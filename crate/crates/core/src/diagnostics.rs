//! Certificates for a computed limit evolution.
//!
//! The limit evolution always satisfies the elastic/plastic bookkeeping
//! identity, but it is a perfect-plasticity evolution only when the plastic
//! dissipation `s* Var(p)` matches the external work. Whether it does can be
//! read off the boundary datum alone: the evolution is plastic unless `|J|`
//! ever decreases to a value still above the elastic threshold.

use serde::{Deserialize, Serialize};

use crate::datum::BoundaryDatum;
use crate::envelope::wbar_1d;
use crate::error::{Error, Result};
use crate::limit::{run_limit, LimitTrajectory};
use crate::material::MaterialParams;

/// Tolerance for saturation of the stress bound after damage onset.
pub const SATURATION_TOL: f64 = 1e-9;
/// Absolute floor for "the energy balance holds".
pub const BALANCE_TOL: f64 = 1e-6;
/// Tolerance for algebraic identities between residual routes.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PerfectPlasticity,
    DamageOnly,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// `(s, t)` with `s < t`, `|J(t)| < |J(s)|` and `|J(t)| > s* L / a1`.
    pub witness: Option<(f64, f64)>,
    pub t0: f64,
    pub t0_star: f64,
}

fn plastic_series(traj: &LimitTrajectory) -> Vec<f64> {
    traj.states
        .iter()
        .map(|s| s.plastic_total(&traj.material))
        .collect()
}

/// `s*` times the variation of the plastic mass over the recorded instants in `[s, t]`.
pub fn dissipation(traj: &LimitTrajectory, s: f64, t: f64) -> f64 {
    let p = plastic_series(traj);
    let tol = 1e-12 * traj.material.horizon.max(1.0);
    let mut var = 0.0;
    for k in 1..p.len() {
        let (ta, tb) = (traj.states[k - 1].t, traj.states[k].t);
        if ta >= s - tol && tb <= t + tol {
            var += (p[k] - p[k - 1]).abs();
        }
    }
    traj.material.yield_stress() * var
}

/// Cumulative dissipation from t = 0 at every recorded instant.
pub fn dissipation_series(traj: &LimitTrajectory) -> Vec<f64> {
    let s = traj.material.yield_stress();
    let p = plastic_series(traj);
    let mut out = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in p.windows(2) {
        acc += s * (w[1] - w[0]).abs();
        out.push(acc);
    }
    out
}

fn elastic_term(traj: &LimitTrajectory, k: usize) -> f64 {
    let m = &traj.material;
    let e = traj.states[k].elastic_strain(m);
    0.5 * m.length * m.a1 * e * e
}

fn work(traj: &LimitTrajectory, k: usize) -> f64 {
    traj.energy_integrated[k] - traj.energy_integrated[0]
}

/// Perfect-plasticity energy balance residual
/// `(L a1/2)(e(t)² - e(0)²) + Diss(0, t) - work(0, t)` at instant `k`.
pub fn energy_balance_residual(traj: &LimitTrajectory, k: usize) -> f64 {
    energy_balance_series(traj)[k]
}

pub fn energy_balance_series(traj: &LimitTrajectory) -> Vec<f64> {
    let diss = dissipation_series(traj);
    (0..traj.states.len())
        .map(|k| elastic_term(traj, k) - elastic_term(traj, 0) + diss[k] - work(traj, k))
        .collect()
}

/// Same balance with `∫ σ dp` in place of the dissipation; vanishes for any
/// limit evolution.
pub fn fake_energy_balance_series(traj: &LimitTrajectory) -> Vec<f64> {
    let p = plastic_series(traj);
    let mut sigma_dp = 0.0;
    let mut out = vec![0.0];
    for k in 1..traj.states.len() {
        let (a, b) = (&traj.states[k - 1], &traj.states[k]);
        sigma_dp += 0.5 * (a.sigma + b.sigma) * (p[k] - p[k - 1]);
        out.push(elastic_term(traj, k) - elastic_term(traj, 0) + sigma_dp - work(traj, k));
    }
    out
}

/// Closed form of the energy balance residual:
/// `Diss - s*(|p(t)| - |p(0)|) - (gap(t) - gap(0))`, before time discretization.
pub fn closed_form_residual(traj: &LimitTrajectory, k: usize) -> f64 {
    let m = &traj.material;
    let (s0, sk) = (&traj.states[0], &traj.states[k]);
    dissipation_series(traj)[k] - m.support(sk.plastic_total(m)) + m.support(s0.plastic_total(m))
        - sk.saturation_gap(m)
        + s0.saturation_gap(m)
}

/// `s*|Δp| - σ(t_k) Δp` over step `k`; nonnegative, zero iff the flow rule holds.
pub fn flow_rule_residual(traj: &LimitTrajectory, k: usize) -> Result<f64> {
    if k == 0 || k >= traj.states.len() {
        return Err(Error::InvalidParams(format!(
            "step index {k} outside 1..{}",
            traj.states.len()
        )));
    }
    let m = &traj.material;
    let dp = traj.states[k].plastic_total(m) - traj.states[k - 1].plastic_total(m);
    Ok(m.support(dp) - traj.states[k].sigma * dp)
}

/// Tolerance on the balance residual for a given time step: the trapezoidal
/// work misses at most `(a1/L) ΔJ²` at the step where damage starts.
pub fn balance_tolerance(traj: &LimitTrajectory) -> f64 {
    let m = &traj.material;
    let max_dj = traj
        .states
        .windows(2)
        .map(|w| (w[1].jump - w[0].jump).abs())
        .fold(0.0, f64::max);
    BALANCE_TOL + m.a1 / m.length * max_dj * max_dj
}

/// Does `(s, t)` witness a decrease of `|J|` that stays above the elastic threshold?
pub fn violates(w: &BoundaryDatum, m: &MaterialParams, s: f64, t: f64) -> bool {
    let (js, jt) = (w.jump(s).abs(), w.jump(t).abs());
    s < t && jt < js && jt > m.elastic_jump_threshold()
}

/// Earliest violation of the plasticity condition along the piecewise-linear
/// jump, scanning the grid samples and the interiors of grid intervals.
pub fn find_violation(w: &BoundaryDatum, m: &MaterialParams, grid: &[f64]) -> Option<(f64, f64)> {
    let thr = m.elastic_jump_threshold();
    // |J| is monotone between grid points and sign changes of J
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    for (k, &t) in grid.iter().enumerate() {
        if k > 0 {
            let (ta, ja) = (grid[k - 1], w.jump(grid[k - 1]));
            let jb = w.jump(t);
            if ja * jb < 0.0 {
                pts.push((ta + ja / (ja - jb) * (t - ta), 0.0));
            }
        }
        pts.push((t, w.jump(t).abs()));
    }
    let (mut peak_t, mut peak) = pts[0];
    for win in pts.windows(2) {
        let ((ta, va), (tb, vb)) = (win[0], win[1]);
        let at = |v: f64| ta + (v - va) / (vb - va) * (tb - ta);
        if vb < va {
            if va > thr {
                if vb > thr {
                    return Some((peak_t, tb));
                }
                return Some((peak_t, at(0.5 * (thr + va))));
            }
        } else if vb > va {
            let lo = va.max(thr);
            let hi = vb.min(peak);
            if hi > lo {
                if vb < peak {
                    return Some((peak_t, tb));
                }
                return Some((peak_t, at(0.5 * (lo + hi))));
            }
        }
        if vb > peak {
            peak = vb;
            peak_t = tb;
        }
    }
    None
}

/// Classifies the limit evolution driven by `w` and checks `t0 = t0*` up to
/// one time step.
pub fn cns_classify(w: &BoundaryDatum, m: &MaterialParams, grid: &[f64]) -> Result<Classification> {
    let traj = run_limit(m, w, grid)?;
    let witness = find_violation(w, m, grid);
    let verdict = if witness.is_some() {
        Verdict::DamageOnly
    } else {
        Verdict::PerfectPlasticity
    };
    if (traj.t0 - traj.t0_star).abs() > traj.max_step() * (1.0 + 1e-9) {
        return Err(Error::Inconsistent {
            time: traj.t0,
            reason: format!(
                "last undamaged instant {} and first elastic-limit crossing {} differ by more than one step",
                traj.t0, traj.t0_star
            ),
        });
    }
    Ok(Classification {
        verdict,
        witness,
        t0: traj.t0,
        t0_star: traj.t0_star,
    })
}

/// Cross-checks the verdict against stress saturation after damage onset and
/// against the energy balance residual, and the residual against its closed form.
pub fn classifier_consistency(traj: &LimitTrajectory, verdict: Verdict) -> Result<()> {
    let m = &traj.material;
    let residuals = energy_balance_series(traj);
    let tol = balance_tolerance(traj);

    for (k, s) in traj.states.iter().enumerate() {
        let predicted = closed_form_residual(traj, k) + (s.energy - traj.energy_integrated[k]);
        if (residuals[k] - predicted).abs() > IDENTITY_TOL * (1.0 + residuals[k].abs()) {
            return Err(Error::Inconsistent {
                time: s.t,
                reason: format!(
                    "balance residual {} differs from closed form {predicted}",
                    residuals[k]
                ),
            });
        }
        if residuals[k] < -IDENTITY_TOL {
            return Err(Error::Inconsistent {
                time: s.t,
                reason: format!("negative balance residual {}", residuals[k]),
            });
        }
    }

    let unsaturated = traj
        .states
        .iter()
        .find(|s| s.t > traj.t0 && (s.sigma.abs() - m.yield_stress()).abs() > SATURATION_TOL);
    let unbalanced = traj
        .states
        .iter()
        .zip(&residuals)
        .find(|(_, &r)| r > tol)
        .map(|(s, _)| s);
    let plastic = verdict == Verdict::PerfectPlasticity;
    match (plastic, unsaturated, unbalanced) {
        (true, None, None) | (false, Some(_), Some(_)) => Ok(()),
        (true, Some(s), _) => Err(Error::Inconsistent {
            time: s.t,
            reason: format!("verdict is plastic but |sigma| = {} < s*", s.sigma.abs()),
        }),
        (true, None, Some(s)) => Err(Error::Inconsistent {
            time: s.t,
            reason: "verdict is plastic but the energy balance fails".into(),
        }),
        (false, None, _) => Err(Error::Inconsistent {
            time: traj.t0,
            reason: "verdict is damage but the stress stays saturated".into(),
        }),
        (false, Some(s), None) => Err(Error::Inconsistent {
            time: s.t,
            reason: "stress leaves the yield bound but the energy balance holds".into(),
        }),
    }
}

/// Summary written by the `classify` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub verdict: Verdict,
    pub witness_pair: Option<(f64, f64)>,
    pub t0: f64,
    pub t0_star: f64,
    pub max_eb_residual: f64,
    pub flow_rule_violations: usize,
}

pub fn classify_report(
    w: &BoundaryDatum,
    m: &MaterialParams,
    grid: &[f64],
) -> Result<(ClassifyReport, LimitTrajectory)> {
    let c = cns_classify(w, m, grid)?;
    let traj = run_limit(m, w, grid)?;
    classifier_consistency(&traj, c.verdict)?;
    let max_eb_residual = energy_balance_series(&traj)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut flow_rule_violations = 0;
    for k in 1..traj.states.len() {
        if flow_rule_residual(&traj, k)? > IDENTITY_TOL {
            flow_rule_violations += 1;
        }
    }
    Ok((
        ClassifyReport {
            verdict: c.verdict,
            witness_pair: c.witness,
            t0: c.t0,
            t0_star: c.t0_star,
            max_eb_residual,
            flow_rule_violations,
        },
        traj,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub position: f64,
    pub amplitude: f64,
}

/// Displacement that is affine on each of `slopes.len()` equal cells, with
/// finitely many interior jumps.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDisplacement {
    pub length: f64,
    pub slopes: Vec<f64>,
    pub jumps: Vec<Jump>,
    /// Inner trace `u(0+)`.
    pub left: f64,
}

impl DiscreteDisplacement {
    pub fn new(length: f64, slopes: Vec<f64>, jumps: Vec<Jump>, left: f64) -> Result<Self> {
        if slopes.is_empty() || !(length > 0.0) {
            return Err(Error::InvalidParams("need at least one cell".into()));
        }
        if let Some(j) = jumps
            .iter()
            .find(|j| !(j.position > 0.0 && j.position < length))
        {
            return Err(Error::InvalidParams(format!(
                "jump at {} is not interior to (0, {length})",
                j.position
            )));
        }
        Ok(DiscreteDisplacement {
            length,
            slopes,
            jumps,
            left,
        })
    }

    /// Affine displacement from `left` with the given slope.
    pub fn affine(length: f64, n_cells: usize, left: f64, slope: f64) -> Self {
        DiscreteDisplacement {
            length,
            slopes: vec![slope; n_cells.max(1)],
            jumps: Vec::new(),
            left,
        }
    }

    pub fn cell_width(&self) -> f64 {
        self.length / self.slopes.len() as f64
    }

    /// Inner trace `u(L-)`.
    pub fn right(&self) -> f64 {
        let dx = self.cell_width();
        self.left
            + self.slopes.iter().map(|s| s * dx).sum::<f64>()
            + self.jumps.iter().map(|j| j.amplitude).sum::<f64>()
    }

    pub fn total_variation(&self) -> f64 {
        let dx = self.cell_width();
        self.slopes.iter().map(|s| s.abs() * dx).sum::<f64>()
            + self.jumps.iter().map(|j| j.amplitude.abs()).sum::<f64>()
    }
}

/// Static limit energy of `u` against boundary traces `(w(0), w(L))`:
/// bulk `∫ W̄(u')`, interior jumps, and boundary mismatch all priced at `s*`.
pub fn static_gamma_energy(
    u: &DiscreteDisplacement,
    m: &MaterialParams,
    traces: (f64, f64),
) -> f64 {
    let s = m.yield_stress();
    let dx = u.cell_width();
    let bulk: f64 = u.slopes.iter().map(|&g| wbar_1d(m, g) * dx).sum();
    let interior: f64 = u.jumps.iter().map(|j| j.amplitude.abs()).sum();
    bulk + s * interior + s * ((traces.1 - u.right()).abs() + (traces.0 - u.left).abs())
}
