//! Run configuration files.
//!
//! ```text
//! # comment
//! preset = fig9              # optional, only before the first section
//!
//! [scenario]
//! width_m = 100
//! height_m = 100
//! ap_count = 4               # or: aps = 0 0; 100 0; 100 100; 0 100
//! rp_interval_m = 5
//! tx_power_mw = 30           # or: tx_power_dbm = 14.77
//!
//! [radio]
//! preset = mmwave60          # then any of the fields below override it
//! pl_ref_db = -75.3
//! ref_distance_m = 1
//! exponent = 1.68
//! shadow_std_db = 1.565
//!
//! [doa]
//! std_deg = 2
//!
//! [match]
//! methods = nn, knn, wknn@wifi24, doalf
//! k = 4
//!
//! [experiment]
//! test_points = 2000
//! samples_per_rp = 100
//! seed = 20190601
//! ```
//!
//! The full key list is in the README. Every key may appear at most once.
//! Settings are applied on top of the preset, or on top of the built-in
//! defaults when there is none, so a file only needs the keys it changes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use fingerloc::experiments::{self, Contender, ExperimentConfig, PresetKind, SweepAxis};
use fingerloc::fingerprint::place_aps;
use fingerloc::matching::{AngleUnit, FeatureScaling};
use fingerloc::radio::mw_to_dbm;
use fingerloc::{Area, DoaModel, MatchConfig, Method, Point, RadioModel};

use crate::CliError;

const SECTIONS: [(&str, &[&str]); 5] = [
    (
        "scenario",
        &[
            "width_m",
            "height_m",
            "side_m",
            "ap_count",
            "aps",
            "rp_interval_m",
            "tx_power_mw",
            "tx_power_dbm",
        ],
    ),
    (
        "radio",
        &[
            "preset",
            "pl_ref_db",
            "ref_distance_m",
            "exponent",
            "shadow_std_db",
        ],
    ),
    ("doa", &["std_deg"]),
    (
        "match",
        &[
            "methods",
            "k",
            "epsilon",
            "gamma",
            "feature_scaling",
            "angle_unit",
        ],
    ),
    (
        "experiment",
        &[
            "mode",
            "test_points",
            "samples_per_rp",
            "seed",
            "sweep_axis",
            "sweep_values",
            "series_axis",
            "series_values",
            "rssi_radios",
            "rssi_ap",
        ],
    ),
];

/// What a run produces.
pub type Job = PresetKind;

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub job: Job,
}

/// `section -> key -> (line, value)`; top-level keys live under "".
#[derive(Debug, Default)]
struct Raw {
    entries: BTreeMap<String, BTreeMap<String, (usize, String)>>,
}

impl Raw {
    fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut raw = Raw::default();
        let mut section = String::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let err = |msg: String| CliError::Config(format!("{origin}:{lineno}: {msg}"));
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(err(format!("malformed section header '{line}'")));
                };
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    let names: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
                    return Err(err(format!(
                        "unknown section [{name}] (valid sections: {})",
                        names.join(", ")
                    )));
                }
                section = name.to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected 'key = value', got '{line}'")));
            };
            let (key, value) = (key.trim(), value.trim());
            let allowed: &[&str] = if section.is_empty() {
                &["preset"]
            } else {
                SECTIONS.iter().find(|(s, _)| *s == section).unwrap().1
            };
            if !allowed.contains(&key) {
                let place = if section.is_empty() {
                    "before any section".to_string()
                } else {
                    format!("in [{section}]")
                };
                return Err(err(format!(
                    "unknown key '{key}' {place} (valid keys: {})",
                    allowed.join(", ")
                )));
            }
            let slot = raw.entries.entry(section.clone()).or_default();
            if slot
                .insert(key.to_string(), (lineno, value.to_string()))
                .is_some()
            {
                return Err(err(format!("duplicate key '{key}'")));
            }
        }
        Ok(raw)
    }

    fn get(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.entries.get(section).and_then(|s| s.get(key))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Typed access to one file's settings with located error messages.
struct Lookup<'a> {
    raw: &'a Raw,
    origin: &'a str,
}

impl Lookup<'_> {
    fn err(&self, line: usize, section: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{}:{line}: [{section}] {key}: {msg}", self.origin))
    }

    fn str(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.raw.get(section, key).map(|(l, v)| (*l, v.as_str()))
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.str(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| self.err(line, section, key, format!("'{v}': {e}"))),
        }
    }

    fn list<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
    ) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.str(section, key) {
            None => Ok(None),
            Some((line, v)) => parse_list(v)
                .map(Some)
                .map_err(|e| self.err(line, section, key, e)),
        }
    }
}

/// Comma-separated list; empty entries are skipped.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

fn parse_aps(text: &str) -> Result<Vec<Point>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let v: Vec<&str> = pair.split_whitespace().collect();
            match v.as_slice() {
                [x, y] => Ok(Point::new(
                    x.parse().map_err(|e| format!("'{x}': {e}"))?,
                    y.parse().map_err(|e| format!("'{y}': {e}"))?,
                )),
                _ => Err(format!("expected 'x y', got '{pair}'")),
            }
        })
        .collect()
}

/// `method` or `method@radio_preset`.
pub fn parse_contender(token: &str) -> Result<Contender, String> {
    let (method, radio) = match token.split_once('@') {
        Some((m, r)) => (m, Some(r.trim())),
        None => (token, None),
    };
    let method: Method = method
        .parse()
        .map_err(|e: fingerloc::Error| e.to_string())?;
    let matcher = MatchConfig::new(method, 4);
    match radio {
        None => Ok(Contender::new(matcher)),
        Some(r) => Ok(Contender::with_radio(
            matcher,
            RadioModel::preset(r).map_err(|e| e.to_string())?,
        )),
    }
}

fn contender_token(c: &Contender) -> String {
    match &c.radio {
        Some(r) => format!("{}@{}", c.matcher.method, r.name),
        None => c.matcher.method.to_string(),
    }
}

/// Starting point when no preset is named: DOALF with K = 4 on the
/// reference layout.
pub fn default_run(seed: u64) -> RunConfig {
    RunConfig {
        experiment: ExperimentConfig {
            scenario: experiments::reference_scenario(RadioModel::mmwave60()),
            contenders: vec![Contender::new(MatchConfig::new(Method::Doalf, 4))],
            num_test_points: experiments::DEFAULT_TEST_POINTS,
            samples_per_rp: experiments::DEFAULT_SAMPLES_PER_RP,
            master_seed: seed,
        },
        job: PresetKind::Compare,
    }
}

/// Options given on the command line, which take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
}

/// Read and resolve a config file. With no path, only the overrides apply.
pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    match path {
        None => resolve("", "<defaults>", overrides),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config file {}: {e}", p.display()))
            })?;
            resolve(&text, &p.display().to_string(), overrides)
        }
    }
}

pub fn resolve(text: &str, origin: &str, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let raw = Raw::parse(text, origin)?;
    let l = Lookup { raw: &raw, origin };

    let seed = match overrides.seed {
        Some(s) => s,
        None => l
            .parse::<u64>("experiment", "seed")?
            .unwrap_or(experiments::DEFAULT_SEED),
    };
    let preset_name = overrides
        .preset
        .clone()
        .or_else(|| l.str("", "preset").map(|(_, v)| v.to_string()));
    let mut run = match preset_name {
        Some(name) => {
            let p =
                experiments::preset(&name, seed).map_err(|e| CliError::Config(e.to_string()))?;
            RunConfig {
                experiment: p.config,
                job: p.kind,
            }
        }
        None => default_run(seed),
    };
    apply(&l, &mut run)?;
    run.experiment.master_seed = seed;
    if matches!(run.job, PresetKind::RssiComparison { .. }) {
        run.experiment.contenders.clear();
    }
    validate(&run)?;
    Ok(run)
}

fn apply(l: &Lookup<'_>, run: &mut RunConfig) -> Result<(), CliError> {
    let cfg = &mut run.experiment;
    let s = &mut cfg.scenario;

    // scenario
    let old_area = s.area;
    if let Some(side) = l.parse::<f64>("scenario", "side_m")? {
        s.area = Area::new(side, side);
    }
    if let Some(w) = l.parse::<f64>("scenario", "width_m")? {
        s.area.width_m = w;
    }
    if let Some(h) = l.parse::<f64>("scenario", "height_m")? {
        s.area.height_m = h;
    }
    let ap_count = l.parse::<usize>("scenario", "ap_count")?;
    match l.str("scenario", "aps") {
        Some((line, v)) => {
            if ap_count.is_some() {
                return Err(l.err(
                    line,
                    "scenario",
                    "aps",
                    "give either aps or ap_count, not both",
                ));
            }
            s.aps = parse_aps(v).map_err(|e| l.err(line, "scenario", "aps", e))?;
        }
        None => {
            if ap_count.is_some() || s.area != old_area {
                let n = ap_count.unwrap_or(s.aps.len());
                s.aps = place_aps(s.area, n).map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
    }
    if let Some(v) = l.parse::<f64>("scenario", "rp_interval_m")? {
        s.rp_interval_m = v;
    }
    match (
        l.parse::<f64>("scenario", "tx_power_mw")?,
        l.str("scenario", "tx_power_dbm"),
    ) {
        (Some(_), Some((line, _))) => {
            return Err(l.err(
                line,
                "scenario",
                "tx_power_dbm",
                "give either tx_power_mw or tx_power_dbm, not both",
            ))
        }
        (Some(mw), None) => s.tx_power_dbm = mw_to_dbm(mw),
        (None, Some(_)) => s.tx_power_dbm = l.parse("scenario", "tx_power_dbm")?.unwrap(),
        (None, None) => {}
    }

    // radio
    if let Some((line, name)) = l.str("radio", "preset") {
        s.radio = RadioModel::preset(name).map_err(|e| l.err(line, "radio", "preset", e))?;
    }
    if let Some(v) = l.parse("radio", "pl_ref_db")? {
        s.radio.pl_ref_db = v;
    }
    if let Some(v) = l.parse("radio", "ref_distance_m")? {
        s.radio.ref_distance_m = v;
    }
    if let Some(v) = l.parse("radio", "exponent")? {
        s.radio.exponent = v;
    }
    if let Some(v) = l.parse("radio", "shadow_std_db")? {
        s.radio.shadow_std_db = v;
    }

    // doa
    if let Some(v) = l.parse::<f64>("doa", "std_deg")? {
        s.doa = DoaModel::from_degrees(v);
    }

    // match
    if let Some((line, v)) = l.str("match", "methods") {
        cfg.contenders = v
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(parse_contender)
            .collect::<Result<_, _>>()
            .map_err(|e| l.err(line, "match", "methods", e))?;
    }
    let k = l.parse::<usize>("match", "k")?;
    let epsilon = l.parse::<f64>("match", "epsilon")?;
    let gamma = l.parse::<f64>("match", "gamma")?;
    let scaling = l.parse::<FeatureScaling>("match", "feature_scaling")?;
    let unit = l.parse::<AngleUnit>("match", "angle_unit")?;
    for c in &mut cfg.contenders {
        let m = &mut c.matcher;
        if let (Some(k), true) = (k, m.method != Method::Nn) {
            m.k = k;
        }
        m.epsilon = epsilon.unwrap_or(m.epsilon);
        m.gamma = gamma.unwrap_or(m.gamma);
        m.feature_scaling = scaling.unwrap_or(m.feature_scaling);
        m.angle_unit = unit.unwrap_or(m.angle_unit);
    }

    // experiment
    if let Some(v) = l.parse("experiment", "test_points")? {
        cfg.num_test_points = v;
    }
    if let Some(v) = l.parse("experiment", "samples_per_rp")? {
        cfg.samples_per_rp = v;
    }
    let mode = l.str("experiment", "mode");
    let axis = l.parse::<SweepAxis>("experiment", "sweep_axis")?;
    let values = l.list::<f64>("experiment", "sweep_values")?;
    let series_axis = l.parse::<SweepAxis>("experiment", "series_axis")?;
    let series_values = l.list::<f64>("experiment", "series_values")?;
    let rssi_radios = match l.str("experiment", "rssi_radios") {
        None => None,
        Some((line, v)) => Some(
            v.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(RadioModel::preset)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| l.err(line, "experiment", "rssi_radios", e))?,
        ),
    };
    let rssi_ap = l.parse::<usize>("experiment", "rssi_ap")?;

    let mode_name = match mode {
        Some((line, m)) => match m {
            "compare" | "sweep" | "rssi" => m,
            other => {
                return Err(l.err(
                    line,
                    "experiment",
                    "mode",
                    format!("'{other}' (expected compare, sweep or rssi)"),
                ))
            }
        },
        None if axis.is_some() || values.is_some() => "sweep",
        None if rssi_radios.is_some() || rssi_ap.is_some() => "rssi",
        None => match run.job {
            PresetKind::Compare => "compare",
            PresetKind::Sweep { .. } => "sweep",
            PresetKind::RssiComparison { .. } => "rssi",
        },
    };
    run.job = match mode_name {
        "compare" => PresetKind::Compare,
        "sweep" => {
            let (old_axis, old_values, old_series) = match &run.job {
                PresetKind::Sweep {
                    axis,
                    values,
                    series,
                } => (Some(*axis), Some(values.clone()), series.clone()),
                _ => (None, None, None),
            };
            let series = match (series_axis, series_values) {
                (Some(a), Some(v)) => Some((a, v)),
                (None, None) => old_series,
                _ => {
                    return Err(CliError::Config(format!(
                        "{}: series_axis and series_values go together",
                        l.origin
                    )))
                }
            };
            PresetKind::Sweep {
                axis: axis.or(old_axis).ok_or_else(|| {
                    CliError::Config(format!("{}: sweep mode needs sweep_axis", l.origin))
                })?,
                values: values.or(old_values).unwrap_or_default(),
                series,
            }
        }
        _ => {
            let (old_radios, old_ap) = match &run.job {
                PresetKind::RssiComparison { radios, ap } => (Some(radios.clone()), *ap),
                _ => (None, 0),
            };
            if rssi_ap == Some(0) {
                return Err(CliError::Config(format!(
                    "{}: rssi_ap counts from 1",
                    l.origin
                )));
            }
            PresetKind::RssiComparison {
                radios: rssi_radios
                    .or(old_radios)
                    .unwrap_or_else(|| vec![RadioModel::mmwave60(), RadioModel::wifi24()]),
                ap: rssi_ap.map(|a| a - 1).unwrap_or(old_ap),
            }
        }
    };
    Ok(())
}

fn validate(run: &RunConfig) -> Result<(), CliError> {
    let cfg = &run.experiment;
    let bad = |e: fingerloc::Error| CliError::Config(e.to_string());
    cfg.scenario.validate().map_err(bad)?;
    match &run.job {
        PresetKind::RssiComparison { radios, ap } => {
            if radios.is_empty() {
                return Err(CliError::Config("rssi_radios is empty".into()));
            }
            if *ap >= cfg.scenario.aps.len() {
                return Err(CliError::Config(format!(
                    "rssi_ap {} exceeds the AP count {}",
                    ap + 1,
                    cfg.scenario.aps.len()
                )));
            }
            if cfg.samples_per_rp == 0 {
                return Err(CliError::Config("samples_per_rp must be at least 1".into()));
            }
            Ok(())
        }
        _ => {
            if cfg.contenders.is_empty() {
                return Err(CliError::Config("the method list is empty".into()));
            }
            cfg.validate().map_err(bad)
        }
    }
}

fn num_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// The resolved configuration in the file grammar. Reading it back gives
/// the same run.
pub fn echo(run: &RunConfig) -> String {
    let cfg = &run.experiment;
    let s = &cfg.scenario;
    let mut out = String::new();
    let _ = writeln!(out, "[scenario]");
    let _ = writeln!(out, "width_m = {}", s.area.width_m);
    let _ = writeln!(out, "height_m = {}", s.area.height_m);
    let aps: Vec<String> = s.aps.iter().map(|p| format!("{} {}", p.x, p.y)).collect();
    let _ = writeln!(out, "aps = {}", aps.join("; "));
    let _ = writeln!(out, "rp_interval_m = {}", s.rp_interval_m);
    let _ = writeln!(out, "tx_power_dbm = {}", s.tx_power_dbm);
    let _ = writeln!(out, "[radio]");
    let _ = writeln!(out, "preset = {}", s.radio.name);
    let _ = writeln!(out, "pl_ref_db = {}", s.radio.pl_ref_db);
    let _ = writeln!(out, "ref_distance_m = {}", s.radio.ref_distance_m);
    let _ = writeln!(out, "exponent = {}", s.radio.exponent);
    let _ = writeln!(out, "shadow_std_db = {}", s.radio.shadow_std_db);
    let _ = writeln!(out, "[doa]");
    let _ = writeln!(out, "std_deg = {}", s.doa.doa_std_rad.to_degrees());
    if !cfg.contenders.is_empty() {
        let first = cfg.contenders[0].matcher;
        let k = cfg
            .contenders
            .iter()
            .find(|c| c.matcher.method != Method::Nn)
            .map_or(1, |c| c.matcher.k);
        let tokens: Vec<String> = cfg.contenders.iter().map(contender_token).collect();
        let _ = writeln!(out, "[match]");
        let _ = writeln!(out, "methods = {}", tokens.join(", "));
        let _ = writeln!(out, "k = {k}");
        let _ = writeln!(out, "epsilon = {}", first.epsilon);
        let _ = writeln!(out, "gamma = {}", first.gamma);
        let _ = writeln!(out, "feature_scaling = {}", first.feature_scaling);
        let _ = writeln!(out, "angle_unit = {}", first.angle_unit);
    }
    let _ = writeln!(out, "[experiment]");
    match &run.job {
        PresetKind::Compare => {
            let _ = writeln!(out, "mode = compare");
        }
        PresetKind::Sweep {
            axis,
            values,
            series,
        } => {
            let _ = writeln!(out, "mode = sweep");
            let _ = writeln!(out, "sweep_axis = {axis}");
            let _ = writeln!(out, "sweep_values = {}", num_list(values));
            if let Some((a, v)) = series {
                let _ = writeln!(out, "series_axis = {a}");
                let _ = writeln!(out, "series_values = {}", num_list(v));
            }
        }
        PresetKind::RssiComparison { radios, ap } => {
            let names: Vec<&str> = radios.iter().map(|r| r.name.as_str()).collect();
            let _ = writeln!(out, "mode = rssi");
            let _ = writeln!(out, "rssi_radios = {}", names.join(", "));
            let _ = writeln!(out, "rssi_ap = {}", ap + 1);
        }
    }
    let _ = writeln!(out, "test_points = {}", cfg.num_test_points);
    let _ = writeln!(out, "samples_per_rp = {}", cfg.samples_per_rp);
    let _ = writeln!(out, "seed = {}", cfg.master_seed);
    out
}
