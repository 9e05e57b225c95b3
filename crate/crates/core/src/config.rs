//! Run configuration: one flat set of key = value settings with defaults,
//! populated from an INI-style file, from command-line flags, or both. The
//! command line uses the same keys as the file, so either source can express
//! any run.

use std::path::PathBuf;
use std::str::FromStr;

use crate::correction::{
    CorrectionConfig, CorrectionMode, DetectionConfig, NadNeighbors, SmoothLevel,
};
use crate::error::{Error, Result};
use crate::presets::{KppInit, Preset, PresetOptions, Problem};
use crate::residual::VolumeFlux;
use crate::subdivision::{SchemeKind, SubdivisionScheme};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Preset,
    pub k: usize,
    pub scheme: SchemeKind,
    /// Mesh refinement parameter; each preset supplies its own default.
    pub resolution: Option<usize>,
    pub correction: CorrectionMode,
    pub pad: bool,
    pub nad: bool,
    /// Detection stencil override; the preset picks one otherwise.
    pub nad_neighbors: Option<NadNeighbors>,
    pub smooth_relax: bool,
    pub smooth_level: SmoothLevel,
    pub max_iter: usize,
    pub cfl: f64,
    pub t_end: Option<f64>,
    pub volume_flux: VolumeFlux,
    pub kpp_ic: KppInit,
    pub gamma_gas: f64,
    /// Steps between field dumps; zero writes only the final state.
    pub output_every: usize,
    pub output_dir: PathBuf,
    pub max_steps: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: Preset::AdvectionSine,
            k: 2,
            scheme: SchemeKind::StructuredUniform,
            resolution: None,
            correction: CorrectionMode::Blended,
            pad: true,
            nad: true,
            nad_neighbors: None,
            smooth_relax: true,
            smooth_level: SmoothLevel::Subcell,
            max_iter: 10,
            cfl: 0.95,
            t_end: None,
            volume_flux: VolumeFlux::Exact,
            kpp_ic: KppInit::Radial,
            gamma_gas: 1.4,
            output_every: 0,
            output_dir: PathBuf::from("out"),
            max_steps: None,
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" | "yes" => Ok(true),
        "false" | "off" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("{key} expects a boolean, got '{value}'"))),
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key} cannot parse '{value}'")))
}

impl RunConfig {
    /// Applies one key = value setting. Every configurable knob is reachable
    /// through here; the file parser and the command line both delegate.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "preset" => self.preset = value.parse()?,
            "k" => self.k = parse_num(key, value)?,
            "scheme" => {
                self.scheme = value.parse().map_err(|_| {
                    Error::InvalidConfig(format!("unknown subdivision scheme '{value}'"))
                })?
            }
            "resolution" => self.resolution = Some(parse_num(key, value)?),
            "correction" => {
                self.correction = match value {
                    "off" => CorrectionMode::Off,
                    "original" => CorrectionMode::Original,
                    "blended" => CorrectionMode::Blended,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "correction expects off | original | blended, got '{value}'"
                        )))
                    }
                }
            }
            "pad" => self.pad = parse_bool(key, value)?,
            "nad" => self.nad = parse_bool(key, value)?,
            "nad_neighbors" => {
                self.nad_neighbors = Some(match value {
                    "linear" => NadNeighbors::Linear,
                    "nonlinear" => NadNeighbors::Nonlinear,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "nad_neighbors expects linear | nonlinear, got '{value}'"
                        )))
                    }
                })
            }
            "smooth_relax" => self.smooth_relax = parse_bool(key, value)?,
            "smooth_level" => {
                self.smooth_level = match value {
                    "cell" => SmoothLevel::Cell,
                    "subcell" => SmoothLevel::Subcell,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "smooth_level expects cell | subcell, got '{value}'"
                        )))
                    }
                }
            }
            "max_iter" => self.max_iter = parse_num(key, value)?,
            "cfl" => self.cfl = parse_num(key, value)?,
            "t_end" => self.t_end = Some(parse_num(key, value)?),
            "volume_flux" => {
                self.volume_flux = match value {
                    "exact" => VolumeFlux::Exact,
                    "projected" => VolumeFlux::Projected,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "volume_flux expects exact | projected, got '{value}'"
                        )))
                    }
                }
            }
            "kpp_ic" => {
                self.kpp_ic = match value {
                    "radial" => KppInit::Radial,
                    "halfplane" => KppInit::Halfplane,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "kpp_ic expects radial | halfplane, got '{value}'"
                        )))
                    }
                }
            }
            "gamma_gas" => self.gamma_gas = parse_num(key, value)?,
            "output_every" => self.output_every = parse_num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "max_steps" => self.max_steps = Some(parse_num(key, value)?),
            _ => return Err(Error::InvalidConfig(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// Parses INI-style text: key = value lines, # or ; comments, optional
    /// [section] headers which are ignored because the key space is flat.
    pub fn apply_ini(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value, got '{line}'", idx + 1))
            })?;
            let value = value.split(['#', ';']).next().unwrap_or("");
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Serializes the full configuration in the key = value form `apply_ini`
    /// reads back, so an output bundle can embed a manifest that reproduces
    /// the run.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        put("preset", self.preset.name().into());
        put("k", self.k.to_string());
        put("scheme", self.scheme.name().into());
        if let Some(n) = self.resolution {
            put("resolution", n.to_string());
        }
        put(
            "correction",
            match self.correction {
                CorrectionMode::Off => "off",
                CorrectionMode::Original => "original",
                CorrectionMode::Blended => "blended",
            }
            .into(),
        );
        put("pad", self.pad.to_string());
        put("nad", self.nad.to_string());
        if let Some(n) = self.nad_neighbors {
            put(
                "nad_neighbors",
                match n {
                    NadNeighbors::Linear => "linear",
                    NadNeighbors::Nonlinear => "nonlinear",
                }
                .into(),
            );
        }
        put("smooth_relax", self.smooth_relax.to_string());
        put(
            "smooth_level",
            match self.smooth_level {
                SmoothLevel::Cell => "cell",
                SmoothLevel::Subcell => "subcell",
            }
            .into(),
        );
        put("max_iter", self.max_iter.to_string());
        put("cfl", self.cfl.to_string());
        if let Some(t) = self.t_end {
            put("t_end", t.to_string());
        }
        put(
            "volume_flux",
            match self.volume_flux {
                VolumeFlux::Exact => "exact",
                VolumeFlux::Projected => "projected",
            }
            .into(),
        );
        put(
            "kpp_ic",
            match self.kpp_ic {
                KppInit::Radial => "radial",
                KppInit::Halfplane => "halfplane",
            }
            .into(),
        );
        put("gamma_gas", self.gamma_gas.to_string());
        put("output_every", self.output_every.to_string());
        put("output_dir", self.output_dir.display().to_string());
        if let Some(n) = self.max_steps {
            put("max_steps", n.to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if self.k > self.scheme.max_order() {
            return Err(Error::InvalidConfig(format!(
                "scheme {} supports k up to {}, got k = {}",
                self.scheme.name(),
                self.scheme.max_order(),
                self.k
            )));
        }
        if self.gamma_gas <= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma_gas must exceed one, got {}",
                self.gamma_gas
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        Ok(())
    }

    pub fn preset_options(&self) -> PresetOptions {
        PresetOptions { gamma_gas: self.gamma_gas, kpp_ic: self.kpp_ic }
    }

    pub fn build_problem(&self) -> Result<Problem> {
        self.validate()?;
        self.preset.build(self.resolution, &self.preset_options())
    }

    pub fn scheme_struct(&self) -> SubdivisionScheme {
        SubdivisionScheme { kind: self.scheme, k: self.k }
    }

    /// Correction settings for a concrete problem; the problem supplies the
    /// admissible set and the default detection stencil.
    pub fn correction_config(&self, problem: &Problem) -> CorrectionConfig {
        CorrectionConfig {
            mode: self.correction,
            detection: DetectionConfig {
                pad: if self.pad { problem.pad.clone() } else { None },
                nad: self.nad,
                nad_neighbors: self.nad_neighbors.unwrap_or(problem.nad_neighbors),
                smooth_relax: self.smooth_relax,
                smooth_level: self.smooth_level,
            },
            max_iter: self.max_iter,
        }
    }

    pub fn final_time(&self, problem: &Problem) -> f64 {
        self.t_end.unwrap_or(problem.t_end)
    }
}
