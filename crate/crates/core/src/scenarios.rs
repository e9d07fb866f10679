use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::datum::BoundaryDatum;
use crate::eps::run_eps;
use crate::error::{Error, Result};
use crate::limit::run_limit;
use crate::material::MaterialParams;

pub const PRESETS: [&str; 4] = ["monotone", "constant", "loading-unloading", "high-unload"];

pub fn preset_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "monotone" => "J(t) = L t, increasing loading",
        "constant" => "J(t) = 0.8 s* L / a1, elastic throughout",
        "loading-unloading" => "J(t) = L t up to T/2, then L (T - t)",
        "high-unload" => "J rises to 2 s* L / a1 at T/2, then falls to 1.2 s* L / a1",
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatumSpec {
    Preset { name: String },
    Samples(BoundaryDatum),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub material: MaterialParams,
    pub datum: DatumSpec,
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u32,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_cells() -> usize {
    64
}

fn default_steps() -> usize {
    400
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        preset("loading-unloading").expect("default material admits the preset")
    }
}

/// Samples of the named preset on the given material's horizon.
pub fn preset_datum(name: &str, m: &MaterialParams) -> Result<BoundaryDatum> {
    m.validate()?;
    let t = m.horizon;
    let l = m.length;
    let jstar = m.elastic_jump_threshold();
    match name {
        "monotone" => BoundaryDatum::from_jump(vec![0.0, t], vec![0.0, l * t]),
        "constant" => BoundaryDatum::from_jump(vec![0.0, t], vec![0.8 * jstar; 2]),
        "loading-unloading" => {
            let needed = 2.0 * m.yield_stress() / m.a1;
            if t <= needed {
                return Err(Error::Config(format!(
                    "loading-unloading needs T > 2 s*/a1 = {needed}, got T = {t}"
                )));
            }
            BoundaryDatum::from_jump(vec![0.0, 0.5 * t, t], vec![0.0, 0.5 * l * t, 0.0])
        }
        "high-unload" => {
            BoundaryDatum::from_jump(vec![0.0, 0.5 * t, t], vec![0.0, 2.0 * jstar, 1.2 * jstar])
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Preset on the default material.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    preset_with(name, MaterialParams::default())
}

pub fn preset_with(name: &str, material: MaterialParams) -> Result<ScenarioConfig> {
    let datum = preset_datum(name, &material)?;
    Ok(ScenarioConfig {
        material,
        datum: DatumSpec::Samples(datum),
        eps_list: vec![0.1, 0.05, 0.02, 0.01],
        cells: default_cells(),
        steps: default_steps(),
        seed: 0,
        output: default_output(),
    })
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        let w = self.boundary_datum()?;
        if (w.horizon() - self.material.horizon).abs() > 1e-12 * self.material.horizon {
            return Err(Error::Config(format!(
                "datum ends at {} but the horizon is {}",
                w.horizon(),
                self.material.horizon
            )));
        }
        if self.cells == 0 || self.steps == 0 {
            return Err(Error::Config("cells and steps must be positive".into()));
        }
        for &e in &self.eps_list {
            self.material.overshoot(e)?;
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
        Ok(())
    }

    /// The datum with any preset expanded to explicit samples.
    pub fn boundary_datum(&self) -> Result<BoundaryDatum> {
        match &self.datum {
            DatumSpec::Preset { name } => preset_datum(name, &self.material),
            DatumSpec::Samples(w) => {
                w.validate()?;
                Ok(w.clone())
            }
        }
    }

    pub fn time_grid(&self) -> Result<Vec<f64>> {
        self.boundary_datum()?.time_grid(self.steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub sigma_dev: f64,
    pub l_dev: f64,
    pub energy_dev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub sigma_monotone: bool,
    pub l_monotone: bool,
    pub energy_monotone: bool,
}

impl SweepReport {
    pub fn monotone(&self) -> bool {
        self.sigma_monotone && self.l_monotone && self.energy_monotone
    }
}

fn nonincreasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

fn sup_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs every ε of the sweep (concurrently) against one limit run and reports
/// sup-in-time deviations.
pub fn sweep_eps(cfg: &ScenarioConfig) -> Result<SweepReport> {
    cfg.validate()?;
    if cfg.eps_list.is_empty() {
        return Err(Error::Config("eps_list is empty".into()));
    }
    let m = cfg.material;
    let w = cfg.boundary_datum()?;
    let grid = w.time_grid(cfg.steps)?;
    let lim = run_limit(&m, &w, &grid)?;
    let (sigma, l, energy) = (
        lim.sigma(),
        lim.damage(),
        lim.states.iter().map(|s| s.energy).collect::<Vec<_>>(),
    );

    let results: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .eps_list
            .iter()
            .map(|&eps| {
                let (w, grid) = (&w, &grid);
                let (sigma, l, energy) = (&sigma, &l, &energy);
                scope.spawn(move || {
                    let traj = run_eps(&m, eps, cfg.cells, w, grid).map_err(|e| Error::Sweep {
                        eps,
                        source: Box::new(e),
                    })?;
                    Ok(SweepRow {
                        eps,
                        sigma_dev: sup_dev(&traj.sigma(), sigma),
                        l_dev: sup_dev(&traj.damage_length(), l),
                        energy_dev: sup_dev(&traj.energy, energy),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        sigma_monotone: nonincreasing(rows.iter().map(|r| r.sigma_dev)),
        l_monotone: nonincreasing(rows.iter().map(|r| r.l_dev)),
        energy_monotone: nonincreasing(rows.iter().map(|r| r.energy_dev)),
        rows,
    })
}
