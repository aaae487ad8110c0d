//! `key = value` run configuration.

use std::fmt;
use std::path::Path;

use pqpd::{DeltaKernel, InterpKernelKind, LatitudeRule, PlaneSpec, QuadratureSpec, TruncatedState};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p1: f64,
    pub epsilon: f64,
    pub grid_step_deg: f64,
    pub pulses_per_setting: u64,
    pub seed: u64,
    pub kernel: InterpKernelKind,
    pub quad_step_deg: f64,
    pub quad_rule: LatitudeRule,
    pub threads: usize,
    pub plane: PlaneSpec,
    pub exclude_radius: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p1: TruncatedState::DEFAULT_P1,
            epsilon: 0.02,
            grid_step_deg: 8.0,
            pulses_per_setting: 100_000,
            seed: 42,
            kernel: InterpKernelKind::CubicSpline,
            quad_step_deg: 1.0,
            quad_rule: LatitudeRule::GaussLegendre,
            threads: 0,
            plane: PlaneSpec::phi_plane(0.0),
            exclude_radius: pqpd::analysis::DEFAULT_EXCLUDE_RADIUS,
        }
    }
}

fn usage(line: usize, msg: impl fmt::Display) -> CliError {
    CliError::Usage(format!("config line {line}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(idx + 1, format!("expected 'key = value', got '{line}'")))?;
            self.set(k.trim(), v.trim()).map_err(|m| usage(idx + 1, m))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("{key}: '{v}' is not a valid number"))
        }
        match key {
            "p1" => self.p1 = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "grid_step_deg" => self.grid_step_deg = num(key, value)?,
            "pulses_per_setting" | "pulses" => self.pulses_per_setting = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "kernel" => self.kernel = value.parse().map_err(|e| format!("{e}"))?,
            "quad_step_deg" => self.quad_step_deg = num(key, value)?,
            "quad_rule" => self.quad_rule = value.parse().map_err(|e| format!("{e}"))?,
            "threads" => self.threads = num(key, value)?,
            "plane" => self.plane = value.parse().map_err(|e| format!("{e}"))?,
            "exclude_radius" => self.exclude_radius = num(key, value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("p1", self.p1 >= 0.0 && self.p1 <= 1.0),
            ("epsilon", self.epsilon > 0.0 && self.epsilon.is_finite()),
            ("grid_step_deg", self.grid_step_deg > 0.0),
            ("pulses_per_setting", self.pulses_per_setting > 0),
            ("quad_step_deg", self.quad_step_deg > 0.0),
            ("exclude_radius", self.exclude_radius >= 0.0),
        ];
        if let Some((name, _)) = positive.iter().find(|p| !p.1) {
            return Err(CliError::Usage(format!("{name} is out of range")));
        }
        self.quadrature().validate()?;
        self.plane.validate()?;
        Ok(())
    }

    pub fn state(&self) -> Result<TruncatedState, CliError> {
        Ok(TruncatedState::new(self.p1)?)
    }

    pub fn delta_kernel(&self) -> Result<DeltaKernel, CliError> {
        Ok(DeltaKernel::new(self.epsilon)?)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec::from_degrees(self.quad_step_deg, self.quad_step_deg).with_rule(self.quad_rule)
    }

    /// Effective settings, written into output headers.
    pub fn provenance(&self) -> Vec<(String, String)> {
        [
            ("p1", self.p1.to_string()),
            ("grid_step_deg", self.grid_step_deg.to_string()),
            ("pulses_per_setting", self.pulses_per_setting.to_string()),
            ("seed", self.seed.to_string()),
            ("kernel", self.kernel.to_string()),
            ("quad_step_deg", self.quad_step_deg.to_string()),
            ("quad_rule", self.quad_rule.name().to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}
