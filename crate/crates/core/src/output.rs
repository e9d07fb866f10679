//! CSV tables: one header row, `.` decimals, LF line endings. Numbers use the
//! shortest representation that reads back to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{dissipation_series, energy_balance_series};
use crate::envelope::TwoWellParams;
use crate::eps::EpsTrajectory;
use crate::error::Result;
use crate::limit::LimitTrajectory;
use crate::material::MaterialParams;

fn row<W: Write>(out: &mut W, values: &[f64]) -> std::io::Result<()> {
    let line: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    writeln!(out, "{}", line.join(","))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn write_eps_csv<W: Write>(out: &mut W, traj: &EpsTrajectory) -> Result<()> {
    writeln!(
        out,
        "t,J,sigma,Theta_mean,l_eps,energy,work_cum,eb_residual"
    )?;
    for (k, s) in traj.states.iter().enumerate() {
        row(
            out,
            &[
                traj.times[k],
                s.jump,
                s.sigma,
                s.theta_mean(),
                s.damage_length(),
                traj.energy[k],
                traj.work[k],
                traj.eb_residual[k],
            ],
        )?;
    }
    Ok(())
}

pub fn write_limit_csv<W: Write>(out: &mut W, traj: &LimitTrajectory) -> Result<()> {
    let m = &traj.material;
    writeln!(
        out,
        "t,J,sigma,l,E_closed,E_integrated,e,p_total,t0_flag,saturated"
    )?;
    for (s, ei) in traj.states.iter().zip(&traj.energy_integrated) {
        row(
            out,
            &[
                s.t,
                s.jump,
                s.sigma,
                s.l,
                s.energy,
                *ei,
                s.elastic_strain(m),
                s.plastic_total(m),
                flag(s.t <= traj.t0),
                flag(s.is_saturated(m)),
            ],
        )?;
    }
    Ok(())
}

/// Raw energy, convex envelope and optimal sound fraction on `n + 1` points of `[lo, hi]`.
pub fn write_envelope_table<W: Write>(
    out: &mut W,
    p: &TwoWellParams,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<()> {
    writeln!(out, "xi,raw,envelope,theta_star")?;
    let n = n.max(1);
    for k in 0..=n {
        let xi = lo + (hi - lo) * k as f64 / n as f64;
        row(
            out,
            &[
                xi,
                p.raw_energy(xi),
                p.convex_envelope(xi),
                p.optimal_theta(xi),
            ],
        )?;
    }
    Ok(())
}

/// Textbook perfect plasticity driven by the average strain `J/L`:
/// elastic predictor, return onto `[-s*, s*]`.
pub fn textbook_plasticity(m: &MaterialParams, jumps: &[f64]) -> Vec<f64> {
    let s = m.yield_stress();
    let mut p = 0.0;
    jumps
        .iter()
        .map(|&j| {
            let trial = m.a1 * (j / m.length - p);
            if trial.abs() > s {
                p += (trial.abs() - s) / m.a1 * trial.signum();
                s.copysign(trial)
            } else {
                trial
            }
        })
        .collect()
}

/// Textbook stiffness-degradation damage: linear hardening with slope
/// `a1/5` past the elastic limit, unloading along the secant to the origin.
pub fn textbook_damage(m: &MaterialParams, jumps: &[f64]) -> Vec<f64> {
    let ey = m.yield_stress() / m.a1;
    let h = m.a1 / 5.0;
    let envelope = |e: f64| {
        if e <= ey {
            m.a1 * e
        } else {
            m.yield_stress() + h * (e - ey)
        }
    };
    let mut reached: f64 = 0.0;
    jumps
        .iter()
        .map(|&j| {
            let e = j / m.length;
            reached = reached.max(e.abs());
            if reached <= ey {
                m.a1 * e
            } else {
                envelope(reached) / reached * e
            }
        })
        .collect()
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let f = File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

/// Writes the figure tables for a limit trajectory into `dir`.
pub fn emit_figures(traj: &LimitTrajectory, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let m = &traj.material;
    let mut written = Vec::new();

    let (path, mut f) = create(dir, "sigma_vs_t.csv")?;
    writeln!(f, "t,sigma")?;
    for s in &traj.states {
        row(&mut f, &[s.t, s.sigma])?;
    }
    f.flush()?;
    written.push(path);

    let (path, mut f) = create(dir, "sigma_vs_J.csv")?;
    writeln!(f, "J,sigma")?;
    for s in &traj.states {
        row(&mut f, &[s.jump, s.sigma])?;
    }
    f.flush()?;
    written.push(path);

    let (path, mut f) = create(dir, "l_vs_t.csv")?;
    writeln!(f, "t,l")?;
    for s in &traj.states {
        row(&mut f, &[s.t, s.l])?;
    }
    f.flush()?;
    written.push(path);

    let diss = dissipation_series(traj);
    let residual = energy_balance_series(traj);
    let (path, mut f) = create(dir, "energy_vs_t.csv")?;
    writeln!(f, "t,E_closed,E_integrated,dissipation,eb_residual")?;
    for (k, s) in traj.states.iter().enumerate() {
        row(
            &mut f,
            &[
                s.t,
                s.energy,
                traj.energy_integrated[k],
                diss[k],
                residual[k],
            ],
        )?;
    }
    f.flush()?;
    written.push(path);

    let jumps: Vec<f64> = traj.states.iter().map(|s| s.jump).collect();
    let plastic = textbook_plasticity(m, &jumps);
    let damage = textbook_damage(m, &jumps);
    let (path, mut f) = create(dir, "comparison.csv")?;
    writeln!(f, "t,J,effective,plasticity,damage")?;
    for (k, s) in traj.states.iter().enumerate() {
        row(&mut f, &[s.t, s.jump, s.sigma, plastic[k], damage[k]])?;
    }
    f.flush()?;
    written.push(path);

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::BoundaryDatum;
    use crate::limit::run_limit;

    fn tent_run(steps: usize) -> LimitTrajectory {
        let m = MaterialParams::default();
        let w = BoundaryDatum::from_jump(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        run_limit(&m, &w, &w.time_grid(steps).unwrap()).unwrap()
    }

    #[test]
    fn limit_table_format() {
        let mut buf = Vec::new();
        write_limit_csv(&mut buf, &tent_run(4)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "t,J,sigma,l,E_closed,E_integrated,e,p_total,t0_flag,saturated"
        );
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1], "0,0,0,0,0,0,0,0,1,0");
        assert_eq!(lines[2], "0.5,0.5,1,0,0.25,0.25,0.5,0,1,1");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn textbook_curves() {
        let m = MaterialParams::default();
        let j = [0.0, 0.25, 0.5, 1.0, 0.5, 0.0];
        let p = textbook_plasticity(&m, &j);
        assert_eq!(p, vec![0.0, 0.5, 1.0, 1.0, 0.0, -1.0]);
        let d = textbook_damage(&m, &j);
        assert_eq!(&d[..3], &[0.0, 0.5, 1.0]);
        assert!((d[3] - 1.2).abs() < 1e-15);
        assert!((d[4] - 0.6).abs() < 1e-15);
        assert_eq!(d[5], 0.0);
    }

    #[test]
    fn envelope_table_rows() {
        let p = TwoWellParams::new(1.0, 3.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_envelope_table(&mut buf, &p, -2.0, 2.0, 8).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.lines().nth(5).unwrap().starts_with("0,0,0,"));
    }
}
