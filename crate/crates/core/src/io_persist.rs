//! On-disk formats: snapshot and series CSVs with `#` header lines, JSON run
//! configs and JSON reports stamped with a hash of the resolved config.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back reproduces every sample bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::diagnostics::{Polarity, VirialSample};
use crate::emden_fowler::build_q;
use crate::error::{Error, Result};
use crate::experiments::{ChannelSample, GAUSSIAN_CENTER};
use crate::field::RadialField;
use crate::linear_wave::{data_from_radiation, RadiationProfile, Sign};
use crate::nonlinear_wave::{
    EvolutionConfig, Nonlinearity, Trajectory, DEFAULT_BLOWUP_THRESHOLD, DEFAULT_ENERGY_TOLERANCE,
};

pub const FORMAT_VERSION: u32 = 1;
pub const DATA_KINDS: [&str; 3] = ["gaussian", "stationary_k", "radiation_rebuilt"];
/// Default spacing between snapshots, in time units.
pub const DEFAULT_SNAPSHOT_INTERVAL: f64 = 0.5;
/// `Q_k` is sampled from a profile tabulated to at least this radius.
const STATIONARY_TABULATION: f64 = 1e3;

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Writes `field` as `r,u,ut` rows under a `#` header block.
pub fn write_snapshot(field: &RadialField, m: u32, path: &Path) -> Result<()> {
    field.validate()?;
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# format_version = {FORMAT_VERSION}")?;
    writeln!(w, "# m = {m}")?;
    writeln!(w, "# dr = {}", field.dr)?;
    writeln!(w, "# N = {}", field.n_intervals())?;
    writeln!(w, "# time_tag = {}", field.time)?;
    writeln!(w, "r,u,ut")?;
    for i in 0..field.len() {
        writeln!(w, "{},{},{}", field.r(i), field.u[i], field.ut[i])?;
    }
    w.flush()?;
    Ok(())
}

/// Header of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub format_version: u32,
    pub m: u32,
    pub dr: f64,
    pub n: usize,
    pub time_tag: f64,
}

/// Reads a file written by [`write_snapshot`], checking every invariant.
pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, RadialField)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();

    let mut version = None;
    let mut m = None;
    let mut dr = None;
    let mut n = None;
    let mut time_tag = None;
    while let Some(&(no, line)) = lines.peek() {
        let Some(body) = line.strip_prefix('#') else {
            break;
        };
        lines.next();
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| parse_err(path, no, format!("malformed header line `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| parse_err(path, no, format!("malformed {what} `{value}`"));
        match key {
            "format_version" => {
                let v: u32 = value.parse().map_err(|_| bad("format_version"))?;
                if v != FORMAT_VERSION {
                    return Err(parse_err(path, no, format!("unsupported format_version {v}")));
                }
                version = Some(v);
            }
            "m" => m = Some(value.parse::<u32>().map_err(|_| bad("m"))?),
            "dr" => dr = Some(value.parse::<f64>().map_err(|_| bad("dr"))?),
            "N" => n = Some(value.parse::<usize>().map_err(|_| bad("N"))?),
            "time_tag" => time_tag = Some(value.parse::<f64>().map_err(|_| bad("time_tag"))?),
            _ => return Err(parse_err(path, no, format!("unknown header key `{key}`"))),
        }
    }
    let header_end = lines.peek().map_or(text.lines().count() + 1, |&(no, _)| no);
    let missing = |k: &str| parse_err(path, header_end, format!("header lacks `{k}`"));
    let header = SnapshotHeader {
        format_version: version.ok_or_else(|| missing("format_version"))?,
        m: m.ok_or_else(|| missing("m"))?,
        dr: dr.ok_or_else(|| missing("dr"))?,
        n: n.ok_or_else(|| missing("N"))?,
        time_tag: time_tag.ok_or_else(|| missing("time_tag"))?,
    };
    if !(header.dr > 0.0 && header.dr.is_finite()) {
        return Err(parse_err(path, header_end, format!("dr = {}", header.dr)));
    }

    match lines.next() {
        Some((_, "r,u,ut")) => {}
        Some((no, other)) => {
            return Err(parse_err(path, no, format!("expected column line `r,u,ut`, found `{other}`")))
        }
        None => return Err(parse_err(path, header_end, "missing column line")),
    }

    let mut field = RadialField::zeros(header.dr, header.n);
    field.time = header.time_tag;
    let mut count = 0usize;
    let mut last_no = header_end;
    for (no, line) in lines {
        last_no = no;
        if count > header.n {
            return Err(parse_err(path, no, format!("more than N+1 = {} rows", header.n + 1)));
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(path, no, format!("expected 3 columns, found {}", cols.len())));
        }
        let mut vals = [0.0f64; 3];
        for (v, c) in vals.iter_mut().zip(&cols) {
            *v = c
                .trim()
                .parse()
                .map_err(|_| parse_err(path, no, format!("not a number: `{c}`")))?;
            if !v.is_finite() {
                return Err(parse_err(path, no, format!("non-finite value `{c}`")));
            }
        }
        let expect_r = field.r(count);
        if vals[0].to_bits() != expect_r.to_bits() {
            return Err(parse_err(path, no, format!("r = {} but 1 + i·dr = {expect_r}", vals[0])));
        }
        field.u[count] = vals[1];
        field.ut[count] = vals[2];
        count += 1;
    }
    if count != header.n + 1 {
        return Err(parse_err(
            path,
            last_no + 1,
            format!("truncated: expected N+1 = {} rows, found {count}", header.n + 1),
        ));
    }
    field
        .validate()
        .map_err(|e| parse_err(path, header_end, e.to_string()))?;
    Ok((header, field))
}

/// Writes a CSV with `#` comment lines, a column line and numeric rows.
pub fn write_series(path: &Path, comments: &[String], columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# format_version = {FORMAT_VERSION}")?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{}", columns.join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            write!(line, "{v}").expect("writing to a String");
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy_log(traj: &Trajectory, path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = traj.energy_log.iter().map(|&(t, e)| vec![t, e]).collect();
    write_series(path, &[format!("m = {}", traj.m)], &["t", "energy"], &rows)
}

pub fn write_virial(samples: &[VirialSample], path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| vec![s.t, s.y, s.y_prime, s.y_double_prime, s.surrogate])
        .collect();
    write_series(
        path,
        &[],
        &["t", "y", "y_prime", "y_double_prime", "surrogate"],
        &rows,
    )
}

pub fn write_channels(samples: &[ChannelSample], big_r: f64, path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| vec![s.t, s.exterior_ru, s.exterior_grad])
        .collect();
    write_series(
        path,
        &[format!("R = {big_r}")],
        &["t", "exterior_ru", "exterior_grad"],
        &rows,
    )
}

/// Writes every snapshot as `snapshot_#####.csv` plus `energy.csv` into `dir`.
pub fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        write_snapshot(s, traj.m, &dir.join(format!("snapshot_{i:05}.csv")))?;
    }
    write_energy_log(traj, &dir.join("energy.csv"))
}

/// Initial data description inside a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataRecipe {
    /// `A(1 − 1/r)exp(−(r − c)²/(2w²))` in `u₀`, `B(1 − 1/r)exp(−(r − c)²/(2w²))` in `u₁`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        velocity_amplitude: f64,
    },
    /// `(±Q_k, 0)`, optionally plus a perturbation rescaled to energy norm `delta`.
    StationaryK {
        k: usize,
        #[serde(default = "plus")]
        sign: Polarity,
        #[serde(default)]
        perturbation: Option<Box<DataRecipe>>,
        #[serde(default)]
        delta: Option<f64>,
    },
    /// Data whose outgoing radiation field is `G(η) = A·d/dη exp(−(η − c)²/(2w²))`.
    RadiationRebuilt {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_center() -> f64 {
    GAUSSIAN_CENTER
}

fn plus() -> Polarity {
    Polarity::Plus
}

impl DataRecipe {
    /// Builds the data on `[1, r_end]`.
    pub fn build(&self, m: u32, dr: f64, r_end: f64) -> Result<RadialField> {
        let n = ((r_end - 1.0) / dr).round() as usize;
        match self {
            DataRecipe::Gaussian {
                amplitude,
                center,
                width,
                velocity_amplitude,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!("gaussian width = {width}")));
                }
                let shape = |r: f64| (1.0 - 1.0 / r) * (-(r - center).powi(2) / (2.0 * width * width)).exp();
                Ok(RadialField::from_fn(
                    dr,
                    r_end,
                    |r| amplitude * shape(r),
                    |r| velocity_amplitude * shape(r),
                ))
            }
            DataRecipe::StationaryK {
                k,
                sign,
                perturbation,
                delta,
            } => {
                let q = build_q(m, *k, STATIONARY_TABULATION)?;
                let mut f = q.to_field(sign.factor(), dr, r_end);
                if let Some(p) = perturbation {
                    let mut p = p.build(m, dr, r_end)?;
                    if let Some(delta) = delta {
                        let norm = p.h_norm();
                        if norm > 0.0 {
                            p = p.scaled(delta / norm);
                        }
                    }
                    f = f.axpy(1.0, &p);
                }
                Ok(f.resized(n))
            }
            DataRecipe::RadiationRebuilt {
                amplitude,
                center,
                width,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!("radiation width = {width}")));
                }
                let n_g = n as i64;
                let g: Vec<f64> = (-n_g..=n_g)
                    .map(|j| {
                        let x = j as f64 * dr + 1.0 - center;
                        -amplitude * x / (width * width) * (-x * x / (2.0 * width * width)).exp()
                    })
                    .collect();
                let profile = RadiationProfile {
                    d_eta: dr,
                    offset: -n_g,
                    g,
                    sign: Sign::Plus,
                };
                let mut f = data_from_radiation(&profile)?.resized(n);
                f.truncate_support();
                Ok(f)
            }
        }
    }

    /// Support radius that the causal bound is measured from. For stationary
    /// data only the perturbation counts; the static tail stays put.
    pub fn support_radius(&self, m: u32, dr: f64) -> Result<f64> {
        match self {
            DataRecipe::Gaussian { center, width, .. } | DataRecipe::RadiationRebuilt { center, width, .. } => {
                let r_end = (center.abs() + 12.0 * width.abs()).max(2.0) + 1.0;
                Ok(self.build(m, dr, r_end)?.support_radius())
            }
            DataRecipe::StationaryK { perturbation, .. } => match perturbation {
                Some(p) => p.support_radius(m, dr),
                None => Ok(1.0),
            },
        }
    }
}

/// Knobs for the experiment subcommands; each has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_rel_width")]
    pub rel_width: f64,
    #[serde(default = "default_max_bisections")]
    pub max_bisections: usize,
    #[serde(default = "default_family_k_max")]
    pub family_k_max: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub t_extract: Option<f64>,
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilon_factor")]
    pub epsilon_factor: f64,
    #[serde(default = "one")]
    pub big_r: f64,
}

fn default_lambda_grid() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 1.3, 1.7, 2.0, 2.5]
}
fn default_rel_width() -> f64 {
    1e-3
}
fn default_max_bisections() -> usize {
    12
}
fn default_family_k_max() -> usize {
    crate::diagnostics::DEFAULT_FAMILY_K_MAX
}
fn default_theta() -> f64 {
    crate::diagnostics::DEFAULT_THRESHOLD
}
fn default_delta() -> f64 {
    1e-2
}
fn default_epsilon_factor() -> f64 {
    10.0
}

impl Default for ExperimentParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

/// Fully resolved run configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub evolution: EvolutionConfig,
    pub data: DataRecipe,
    pub params: ExperimentParams,
    /// Support radius the causal bound was checked against.
    pub support_radius: f64,
}

impl RunConfig {
    pub fn build_data(&self) -> Result<RadialField> {
        self.data
            .build(self.evolution.m, self.evolution.dr, self.evolution.domain_end)
    }

    /// Hex SHA-256 of the canonical JSON of the resolved config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

const EVOLUTION_KEYS: [&str; 8] = [
    "m",
    "dr",
    "domain_end",
    "t_final",
    "snapshot_stride",
    "blowup_threshold",
    "energy_tolerance",
    "nonlinearity",
];

/// Parses and resolves a JSON config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_str(&fs::read_to_string(path)?)
}

/// As [`parse_config`], from JSON text.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;

    let get_f64 = |key: &str| -> Result<Option<f64>> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::Config(format!("`{key}` must be a number"))),
        }
    };
    let m = match obj.get("m") {
        Some(v) => v
            .as_u64()
            .filter(|m| *m >= 1)
            .ok_or_else(|| Error::Config("`m` must be a positive integer".into()))? as u32,
        None => return Err(Error::Config("missing `m`".into())),
    };
    let dr = get_f64("dr")?.ok_or_else(|| Error::Config("missing `dr`".into()))?;
    let t_final = get_f64("t_final")?.ok_or_else(|| Error::Config("missing `t_final`".into()))?;
    if !(dr > 0.0) || !(t_final >= 0.0) {
        return Err(Error::Config(format!("need dr > 0 and t_final >= 0, got {dr}, {t_final}")));
    }

    let data_value = obj
        .get("data")
        .ok_or_else(|| Error::Config("missing `data`".into()))?;
    check_kind(data_value)?;
    let data: DataRecipe =
        serde_json::from_value(data_value.clone()).map_err(|e| Error::Config(format!("data: {e}")))?;

    let mut params_obj = serde_json::Map::new();
    for (k, v) in obj {
        if k != "data" && !EVOLUTION_KEYS.contains(&k.as_str()) {
            params_obj.insert(k.clone(), v.clone());
        }
    }
    let params: ExperimentParams = serde_json::from_value(Value::Object(params_obj))
        .map_err(|e| Error::Config(e.to_string()))?;

    let support = data.support_radius(m, dr)?;
    let minimal = EvolutionConfig::minimal_domain_end(support, t_final, dr);
    let domain_end = match get_f64("domain_end")? {
        Some(d) => {
            if d < minimal - 1e-9 * minimal {
                return Err(Error::Config(format!(
                    "domain_end = {d} violates the causal bound; minimal admissible domain_end = {minimal}"
                )));
            }
            d
        }
        None => minimal,
    };
    let snapshot_stride = match obj.get("snapshot_stride") {
        Some(v) => v
            .as_u64()
            .filter(|s| *s >= 1)
            .ok_or_else(|| Error::Config("`snapshot_stride` must be a positive integer".into()))?
            as usize,
        None => ((DEFAULT_SNAPSHOT_INTERVAL / dr).round() as usize).max(1),
    };
    let nonlinearity = match obj.get("nonlinearity") {
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| Error::Config(format!("nonlinearity: {e}")))?,
        None => Nonlinearity::Focusing,
    };
    let evolution = EvolutionConfig {
        m,
        dr,
        domain_end,
        t_final,
        snapshot_stride,
        blowup_threshold: get_f64("blowup_threshold")?.unwrap_or(DEFAULT_BLOWUP_THRESHOLD),
        energy_tolerance: get_f64("energy_tolerance")?.unwrap_or(DEFAULT_ENERGY_TOLERANCE),
        nonlinearity,
    };
    evolution.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(RunConfig {
        evolution,
        data,
        params,
        support_radius: support,
    })
}

fn check_kind(data: &Value) -> Result<()> {
    let kind = data
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Config(format!("data needs a `kind`; admissible kinds: {}", DATA_KINDS.join(", "))))?;
    if !DATA_KINDS.contains(&kind) {
        return Err(Error::Config(format!(
            "unknown data kind `{kind}`; admissible kinds: {}",
            DATA_KINDS.join(", ")
        )));
    }
    if let Some(p) = data.get("perturbation").filter(|p| !p.is_null()) {
        check_kind(p)?;
    }
    Ok(())
}

/// `{"config": …, "config_hash": …, "report": …}` as pretty JSON.
pub fn write_report<T: Serialize>(config: &RunConfig, report: &T, path: &Path) -> Result<()> {
    let value = serde_json::json!({
        "config": config,
        "config_hash": config.hash(),
        "report": report,
    });
    fs::write(path, serde_json::to_string_pretty(&value)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_stationary_config_resolves() {
        let c = parse_config_str(r#"{"m":3,"dr":1e-3,"t_final":10,"data":{"kind":"stationary_k","k":0}}"#).unwrap();
        assert_eq!(c.evolution.domain_end, EvolutionConfig::minimal_domain_end(1.0, 10.0, 1e-3));
        assert_eq!(c.evolution.snapshot_stride, 500);
        assert_eq!(c.params, ExperimentParams::default());
    }

    #[test]
    fn small_domain_reports_the_bound() {
        let err = parse_config_str(
            r#"{"m":3,"dr":1e-2,"t_final":10,"domain_end":12,"data":{"kind":"gaussian"}}"#,
        )
        .unwrap_err();
        let Error::Config(msg) = err else { panic!("{err:?}") };
        assert!(msg.contains("minimal admissible domain_end"), "{msg}");
    }

    #[test]
    fn unknown_kind_lists_admissible_kinds() {
        let err = parse_config_str(r#"{"m":3,"dr":1e-2,"t_final":1,"data":{"kind":"sech"}}"#).unwrap_err();
        let Error::Config(msg) = err else { panic!("{err:?}") };
        for k in DATA_KINDS {
            assert!(msg.contains(k), "{msg}");
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse_config_str(r#"{"m":3,"dr":1e-2,"t_final":1,"data":{"kind":"gaussian"}}"#).unwrap();
        let b = parse_config_str(r#"{"t_final":1,"dr":1e-2,"m":3,"data":{"kind":"gaussian"}}"#).unwrap();
        let c = parse_config_str(r#"{"m":3,"dr":1e-2,"t_final":2,"data":{"kind":"gaussian"}}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
