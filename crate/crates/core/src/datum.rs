use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled boundary displacements `w(t)(0)` and `w(t)(L)`, linear in time
/// between samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDatum {
    pub times: Vec<f64>,
    pub w0: Vec<f64>,
    pub wl: Vec<f64>,
}

impl BoundaryDatum {
    pub fn new(times: Vec<f64>, w0: Vec<f64>, wl: Vec<f64>) -> Result<Self> {
        let d = BoundaryDatum { times, w0, wl };
        d.validate()?;
        Ok(d)
    }

    /// Datum with `w(t)(0) = 0`, so the jump is the right trace.
    pub fn from_jump(times: Vec<f64>, jump: Vec<f64>) -> Result<Self> {
        let w0 = vec![0.0; times.len()];
        BoundaryDatum::new(times, w0, jump)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n < 2 {
            return Err(Error::InvalidDatum("need at least two samples".into()));
        }
        if self.w0.len() != n || self.wl.len() != n {
            return Err(Error::InvalidDatum(format!(
                "{} times but {} left and {} right traces",
                n,
                self.w0.len(),
                self.wl.len()
            )));
        }
        if self.times[0] != 0.0 {
            return Err(Error::InvalidDatum("first sample must be at t = 0".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidDatum(
                "sample times must be strictly increasing".into(),
            ));
        }
        if self
            .times
            .iter()
            .chain(&self.w0)
            .chain(&self.wl)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidDatum("non-finite sample".into()));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[last] {
            return (last - 1, 1.0);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (a, b) = (self.times[k], self.times[k + 1]);
        (k, (t - a) / (b - a))
    }

    fn lerp(v: &[f64], k: usize, s: f64) -> f64 {
        if s == 0.0 {
            v[k]
        } else if s == 1.0 {
            v[k + 1]
        } else {
            v[k] + s * (v[k + 1] - v[k])
        }
    }

    pub fn left(&self, t: f64) -> f64 {
        let (k, s) = self.segment(t);
        Self::lerp(&self.w0, k, s)
    }

    pub fn right(&self, t: f64) -> f64 {
        let (k, s) = self.segment(t);
        Self::lerp(&self.wl, k, s)
    }

    /// Boundary jump `w(t)(L) - w(t)(0)`.
    pub fn jump(&self, t: f64) -> f64 {
        self.right(t) - self.left(t)
    }

    pub fn sample_jumps(&self) -> Vec<f64> {
        self.wl.iter().zip(&self.w0).map(|(r, l)| r - l).collect()
    }

    /// Uniform grid of `steps` intervals on `[0, T]` merged with the datum's
    /// own sample instants, so that `J` is affine on every grid interval.
    pub fn time_grid(&self, steps: usize) -> Result<Vec<f64>> {
        if steps == 0 {
            return Err(Error::InvalidDatum("need at least one time step".into()));
        }
        let t_end = self.horizon();
        let h = t_end / steps as f64;
        let mut grid: Vec<f64> = (0..=steps)
            .map(|k| k as f64 * t_end / steps as f64)
            .collect();
        for &t in &self.times {
            if grid.iter().all(|&g| (g - t).abs() > 1e-9 * h) {
                grid.push(t);
            }
        }
        grid.sort_by(f64::total_cmp);
        Ok(grid)
    }

    /// Checks that `grid` starts at 0, ends at T and contains every sample instant.
    pub fn check_grid(&self, grid: &[f64]) -> Result<()> {
        if grid.len() < 2 || grid[0] != 0.0 {
            return Err(Error::InvalidDatum("time grid must start at 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidDatum(
                "time grid must be strictly increasing".into(),
            ));
        }
        let t_end = self.horizon();
        if (grid[grid.len() - 1] - t_end).abs() > 1e-12 * t_end.max(1.0) {
            return Err(Error::InvalidDatum("time grid must end at T".into()));
        }
        for &t in &self.times {
            let k = grid.partition_point(|&g| g < t - 1e-12);
            if k >= grid.len() || (grid[k] - t).abs() > 1e-12 * t_end.max(1.0) {
                return Err(Error::InvalidDatum(format!(
                    "time grid does not contain datum sample t = {t}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> BoundaryDatum {
        BoundaryDatum::from_jump(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn interpolates_jump() {
        let d = tent();
        assert_eq!(d.jump(0.0), 0.0);
        assert_eq!(d.jump(0.5), 0.5);
        assert_eq!(d.jump(1.0), 1.0);
        assert!((d.jump(1.2) - 0.8).abs() < 1e-15);
        assert_eq!(d.jump(2.0), 0.0);
        assert_eq!(d.jump(5.0), 0.0);
    }

    #[test]
    fn jump_subtracts_left_trace() {
        let d = BoundaryDatum::new(vec![0.0, 1.0], vec![1.0, 2.0], vec![1.0, 4.0]).unwrap();
        assert_eq!(d.jump(0.0), 0.0);
        assert_eq!(d.jump(0.5), 1.0);
        assert_eq!(d.left(0.5), 1.5);
    }

    #[test]
    fn rejects_malformed() {
        assert!(BoundaryDatum::from_jump(vec![0.0], vec![0.0]).is_err());
        assert!(BoundaryDatum::from_jump(vec![0.1, 1.0], vec![0.0, 1.0]).is_err());
        assert!(BoundaryDatum::from_jump(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(BoundaryDatum::new(vec![0.0, 1.0], vec![0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn grid_contains_knots() {
        let d = BoundaryDatum::from_jump(vec![0.0, 0.7, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        let g = d.time_grid(4).unwrap();
        assert_eq!(g, vec![0.0, 0.5, 0.7, 1.0, 1.5, 2.0]);
        assert!(d.check_grid(&g).is_ok());
        assert!(d.check_grid(&[0.0, 1.0, 2.0]).is_err());
        assert_eq!(tent().time_grid(400).unwrap().len(), 401);
    }
}
