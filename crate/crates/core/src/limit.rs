//! Effective evolution of the bar in the vanishing-ε limit.
//!
//! The stress is homogeneous and confined to `K = [-s*, s*]`; the damage mass
//! `l` only grows while the stress saturates the yield bound, and the boundary
//! jump is carried by the compliance `l/a0 + L/a1`. Between samples the update
//! is a return mapping on `l`.

use crate::datum::BoundaryDatum;
use crate::error::Result;
use crate::material::MaterialParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitState {
    pub t: f64,
    pub jump: f64,
    pub sigma: f64,
    /// Total damage mass `μ([0, L])`.
    pub l: f64,
    /// Closed-form energy `J σ / 2 + κ l`.
    pub energy: f64,
}

/// Affine displacement of the limit bar and its strain decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitFields {
    /// `u(0)`, the left trace of the datum.
    pub anchor: f64,
    pub slope: f64,
    /// Elastic strain density `σ / a1`.
    pub elastic: f64,
    /// Plastic strain density `σ l / (a0 L)`.
    pub plastic_density: f64,
    /// Compliance density `μ/a0 + 1/a1`.
    pub compliance: f64,
    /// Plastic mass sitting on the two boundary points (zero here).
    pub boundary_plastic: f64,
}

impl LimitState {
    pub fn elastic_strain(&self, m: &MaterialParams) -> f64 {
        self.sigma / m.a1
    }

    /// Total plastic mass `p([0, L]) = σ l / a0`.
    pub fn plastic_total(&self, m: &MaterialParams) -> f64 {
        self.sigma * self.l / m.a0
    }

    pub fn damage_density(&self, m: &MaterialParams) -> f64 {
        self.l / m.length
    }

    pub fn compliance_density(&self, m: &MaterialParams) -> f64 {
        self.damage_density(m) / m.a0 + 1.0 / m.a1
    }

    /// `(E/a0 + κL/a1)² - (2κ/a0) J²`, nonnegative along any evolution.
    pub fn delta(&self, m: &MaterialParams) -> f64 {
        (self.energy / m.a0 + m.kappa * m.length / m.a1).powi(2)
            - 2.0 * m.kappa / m.a0 * self.jump * self.jump
    }

    /// Damage mass recovered from the energy and the jump alone.
    pub fn l_from_energy(&self, m: &MaterialParams) -> f64 {
        let d = self.delta(m).max(0.0);
        m.a0 / (2.0 * m.kappa) * (self.energy / m.a0 - m.kappa * m.length / m.a1 + d.sqrt())
    }

    /// Elastic energy plus dissipated plastic energy `(L a1/2) e² + s*|p|`.
    pub fn plastic_energy(&self, m: &MaterialParams) -> f64 {
        let e = self.elastic_strain(m);
        0.5 * m.length * m.a1 * e * e + m.support(self.plastic_total(m))
    }

    /// `(s* - |σ|)² l / (2 a0)`: energy not accounted for by plasticity.
    pub fn saturation_gap(&self, m: &MaterialParams) -> f64 {
        (m.yield_stress() - self.sigma.abs()).powi(2) * self.l / (2.0 * m.a0)
    }

    pub fn is_saturated(&self, m: &MaterialParams) -> bool {
        (self.sigma.abs() - m.yield_stress()).abs() <= 1e-12 * m.yield_stress()
    }

    pub fn fields(&self, m: &MaterialParams, left_trace: f64) -> LimitFields {
        let elastic = self.elastic_strain(m);
        let plastic_density = self.plastic_total(m) / m.length;
        LimitFields {
            anchor: left_trace,
            slope: self.sigma * (self.l / (m.a0 * m.length) + 1.0 / m.a1),
            elastic,
            plastic_density,
            compliance: self.compliance_density(m),
            boundary_plastic: 0.0,
        }
    }
}

impl LimitFields {
    pub fn displacement(&self, x: f64) -> f64 {
        self.anchor + self.slope * x
    }
}

fn state(m: &MaterialParams, t: f64, jump: f64, l: f64, saturated: bool) -> LimitState {
    let sigma = if saturated {
        m.yield_stress().copysign(jump)
    } else {
        jump / (l / m.a0 + m.length / m.a1)
    };
    LimitState {
        t,
        jump,
        sigma,
        l,
        energy: 0.5 * jump * sigma + m.kappa * l,
    }
}

/// Relaxed initial state for the jump `J0`.
pub fn initial_limit_state(m: &MaterialParams, jump: f64) -> LimitState {
    limit_step(
        &LimitState {
            t: 0.0,
            jump: 0.0,
            sigma: 0.0,
            l: 0.0,
            energy: 0.0,
        },
        m,
        jump,
        0.0,
    )
}

/// Return mapping: damage grows only as far as needed to keep `|σ| ≤ s*`.
pub fn limit_step(prev: &LimitState, m: &MaterialParams, jump: f64, t: f64) -> LimitState {
    let needed = m.a0 * (jump.abs() / m.yield_stress() - m.length / m.a1);
    if needed > prev.l {
        state(m, t, jump, needed, true)
    } else {
        state(m, t, jump, prev.l, false)
    }
}

#[derive(Clone, Debug)]
pub struct LimitTrajectory {
    pub material: MaterialParams,
    pub states: Vec<LimitState>,
    /// `E(0) + Σ σ̄ ΔJ` with trapezoidal stress.
    pub energy_integrated: Vec<f64>,
    /// Last recorded instant with `l = 0` (0 if damaged from the start).
    pub t0: f64,
    /// First instant at which `|J|` exceeds `s* L / a1` (T if never).
    pub t0_star: f64,
}

impl LimitTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.sigma).collect()
    }

    pub fn damage(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.l).collect()
    }

    pub fn max_step(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| w[1].t - w[0].t)
            .fold(0.0, f64::max)
    }

    pub fn energy_route_gap(&self) -> f64 {
        self.states
            .iter()
            .zip(&self.energy_integrated)
            .map(|(s, e)| (s.energy - e).abs())
            .fold(0.0, f64::max)
    }
}

/// First time the piecewise-linear `|J|` exceeds `threshold`, or T.
pub fn first_exceedance(w: &BoundaryDatum, threshold: f64) -> f64 {
    let jumps = w.sample_jumps();
    for k in 0..jumps.len() {
        let a = jumps[k].abs();
        if a > threshold {
            return w.times[k];
        }
        if k + 1 < jumps.len() {
            let (j0, j1) = (jumps[k], jumps[k + 1]);
            if j1.abs() > threshold {
                // |J| crosses the threshold inside this segment
                let target = threshold.copysign(j1);
                let s = ((target - j0) / (j1 - j0)).clamp(0.0, 1.0);
                let (t0, t1) = (w.times[k], w.times[k + 1]);
                return t0 + s * (t1 - t0);
            }
        }
    }
    w.horizon()
}

pub fn run_limit(m: &MaterialParams, w: &BoundaryDatum, grid: &[f64]) -> Result<LimitTrajectory> {
    w.check_grid(grid)?;
    let mut s = initial_limit_state(m, w.jump(grid[0]));
    s.t = grid[0];
    let mut states = vec![s];
    let mut integrated = vec![s.energy];
    for &t in &grid[1..] {
        let prev = *states.last().unwrap();
        let next = limit_step(&prev, m, w.jump(t), t);
        integrated.push(
            integrated.last().unwrap() + 0.5 * (prev.sigma + next.sigma) * (next.jump - prev.jump),
        );
        states.push(next);
    }
    let t0 = if states[0].l > 0.0 {
        0.0
    } else {
        states
            .iter()
            .rev()
            .find(|s| s.l == 0.0)
            .map_or(0.0, |s| s.t)
    };
    let t0_star = first_exceedance(w, m.elastic_jump_threshold());
    Ok(LimitTrajectory {
        material: *m,
        states,
        energy_integrated: integrated,
        t0,
        t0_star,
    })
}
