//! Scenario files: one TOML document describing a field, a robot run and
//! the verification settings.

use std::path::{Path, PathBuf};

use isokin::domain::SpaceTimeBox;
use isokin::kinematics::{Profile, RobotState, SteeringProgram};
use isokin::suites::{CampaignConfig, Suite};
use isokin::{FieldSpec, OracleSettings, Point2, Vec2};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub field: FieldSpec,
    #[serde(default)]
    pub robot: RobotConfig,
    #[serde(default)]
    pub steering: SteeringConfig,
    pub oracle: Option<OracleSettings>,
    #[serde(default)]
    pub verify: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub campaign: CampaignOverrides,
    #[serde(default, rename = "box")]
    pub boxes: Vec<BoxConfig>,
    #[serde(default)]
    pub export: ExportConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "one")]
    pub v_max: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        RobotConfig {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
            v_max: 1.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringConfig {
    #[serde(default = "one")]
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub theta_dot: Option<Profile>,
    /// Defaults to a constant `v_max`.
    pub speed: Option<Profile>,
}

fn default_dt() -> f64 {
    1e-3
}

impl Default for SteeringConfig {
    fn default() -> Self {
        SteeringConfig {
            duration: 1.0,
            dt: default_dt(),
            theta_dot: None,
            speed: None,
        }
    }
}

/// Optional sizes of the verification campaign.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignOverrides {
    pub points_per_family: Option<usize>,
    pub shift_points_per_family: Option<usize>,
    pub runs_per_family: Option<usize>,
    pub deviation_runs: Option<usize>,
    pub rotation_pairs: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub t_range: [f64; 2],
    pub region: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Isoline levels; by default seven levels evenly spaced inside the
    /// field's range on the export grid.
    pub levels: Option<Vec<f64>>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Plot window `(center, half_width)`; defaults to the field's
    /// sampling region.
    pub center: Option<[f64; 2]>,
    pub half_width: Option<f64>,
}

fn default_times() -> Vec<f64> {
    vec![0.0]
}

fn default_grid() -> usize {
    21
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            times: default_times(),
            levels: None,
            grid: default_grid(),
            center: None,
            half_width: None,
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: isokin::Error| CliError::Config(e.to_string());
        self.field.validate().map_err(cfg)?;
        if let Some(o) = &self.oracle {
            o.validate().map_err(cfg)?;
        }
        if !(self.robot.v_max.is_finite() && self.robot.v_max > 0.0) {
            return Err(CliError::Config(format!("robot.v_max must be positive, got {}", self.robot.v_max)));
        }
        self.program().validate(self.robot.v_max).map_err(cfg)?;
        if !(self.steering.dt > 0.0 && self.steering.dt <= self.steering.duration) {
            return Err(CliError::Config(format!(
                "steering.dt must lie in (0, duration], got {}",
                self.steering.dt
            )));
        }
        self.suites()?;
        for b in &self.boxes {
            self.space_time_box(b).map_err(cfg)?;
        }
        if self.export.grid < 2 {
            return Err(CliError::Config("export.grid must be at least 2".into()));
        }
        if self.export.times.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Config("export.times must be finite".into()));
        }
        Ok(())
    }

    pub fn suites(&self) -> Result<Vec<Suite>, CliError> {
        parse_suites(&self.verify)
    }

    pub fn program(&self) -> SteeringProgram {
        SteeringProgram {
            theta_dot: self.steering.theta_dot.clone().unwrap_or(Profile::constant(0.0)),
            speed: self
                .steering
                .speed
                .clone()
                .unwrap_or(Profile::constant(self.robot.v_max)),
            duration: self.steering.duration,
        }
    }

    pub fn initial_state(&self) -> RobotState {
        let v = self.program().speed.eval(0.0);
        RobotState {
            r: Point2::new(self.robot.x, self.robot.y),
            theta: self.robot.theta,
            v,
        }
    }

    fn space_time_box(&self, b: &BoxConfig) -> isokin::Result<SpaceTimeBox> {
        SpaceTimeBox::new(
            (b.t_range[0], b.t_range[1]),
            b.region.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
        )
    }

    /// Campaign over the catalog with this scenario's field in place of the
    /// catalog member of the same family, and its boxes added to the
    /// default rotation-bound boxes.
    pub fn campaign(&self, seed: u64) -> CampaignConfig {
        let mut cfg = CampaignConfig {
            seed,
            oracle: self.oracle,
            v_max: self.robot.v_max,
            ..CampaignConfig::default()
        }
        .with_field(self.field.clone());
        let o = &self.campaign;
        if let Some(n) = o.points_per_family {
            cfg.points_per_family = n;
        }
        if let Some(n) = o.shift_points_per_family {
            cfg.shift_points_per_family = n;
        }
        if let Some(n) = o.runs_per_family {
            cfg.runs_per_family = n;
        }
        if let Some(n) = o.deviation_runs {
            cfg.deviation_runs = n;
        }
        if let Some(n) = o.rotation_pairs {
            cfg.rotation_pairs = n;
        }
        for b in &self.boxes {
            if let Ok(bx) = self.space_time_box(b) {
                cfg.boxes.push((self.field.clone(), bx));
            }
        }
        cfg
    }
}

pub fn parse_suites(names: &[String]) -> Result<Vec<Suite>, CliError> {
    if names.is_empty() {
        return Ok(Suite::ALL.to_vec());
    }
    let mut out = Vec::new();
    for n in names {
        let s = Suite::parse(n).ok_or_else(|| {
            CliError::Config(format!(
                "unknown suite `{n}`; expected one of {}",
                Suite::ALL.map(|s| s.name()).join(", ")
            ))
        })?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}
