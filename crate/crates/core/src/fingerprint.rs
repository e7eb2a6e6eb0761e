//! Scenario layout, offline fingerprint databases and their CSV form.
//!
//! A database row pairs a reference point (RP) with its averaged 2Q-feature
//! fingerprint: Q RSSI values followed by Q DoA values, one per AP.
//!
//! # File format
//!
//! ```text
//! # fingerloc fingerprint database
//! # area_width_m=100
//! # ...more key=value metadata...
//! x,y,s_1,s_2,s_3,s_4,phi_1,phi_2,phi_3,phi_4
//! 5,0,-61.2,...
//! ```
//!
//! Angles are written in degrees. Every number is printed in the shortest
//! form that parses back to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{angular_diff, bearing, distance, Angle, Point, COINCIDENCE_TOL_M};
use crate::radio::{self, DoaModel, RadioModel};
use crate::rng::{Domain, RngHandle};

/// Rectangular deployment area anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Area {
    pub const fn new(width_m: f64, height_m: f64) -> Self {
        Self { width_m, height_m }
    }

    pub fn contains(&self, p: Point) -> bool {
        const TOL: f64 = 1e-9;
        p.is_finite()
            && p.x >= -TOL
            && p.y >= -TOL
            && p.x <= self.width_m + TOL
            && p.y <= self.height_m + TOL
    }

    pub fn diagonal(&self) -> f64 {
        self.width_m.hypot(self.height_m)
    }

    pub fn size_m2(&self) -> f64 {
        self.width_m * self.height_m
    }

    fn validate(&self) -> Result<()> {
        if !(self.width_m > 0.0 && self.height_m > 0.0)
            || !self.width_m.is_finite()
            || !self.height_m.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "area must have positive finite sides, got {} x {}",
                self.width_m, self.height_m
            )));
        }
        Ok(())
    }
}

/// Uniform RP grid with spacing `interval`, anchored at the origin,
/// including both boundary rows. Row-major: x varies fastest.
pub fn deploy_grid(area: Area, interval: f64) -> Result<Vec<Point>> {
    area.validate()?;
    if !(interval > 0.0) || interval > area.width_m.min(area.height_m) {
        return Err(Error::InvalidParameter(format!(
            "RP interval {interval} must be in (0, {}]",
            area.width_m.min(area.height_m)
        )));
    }
    // the epsilon keeps 100/5 from landing on 19.999..
    let nx = (area.width_m / interval + 1e-9).floor() as usize + 1;
    let ny = (area.height_m / interval + 1e-9).floor() as usize + 1;
    let mut grid = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            grid.push(Point::new(ix as f64 * interval, iy as f64 * interval));
        }
    }
    Ok(grid)
}

/// AP positions on the area boundary.
///
/// Four APs go to the corners. Any other count is spread at equal
/// arc-length along the perimeter, counterclockwise from the origin.
pub fn place_aps(area: Area, count: usize) -> Result<Vec<Point>> {
    area.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter(
            "at least one AP is required".into(),
        ));
    }
    let (w, h) = (area.width_m, area.height_m);
    if count == 4 {
        return Ok(vec![
            Point::new(0.0, 0.0),
            Point::new(w, 0.0),
            Point::new(w, h),
            Point::new(0.0, h),
        ]);
    }
    let perimeter = 2.0 * (w + h);
    let on_perimeter = |s: f64| {
        if s <= w {
            Point::new(s, 0.0)
        } else if s <= w + h {
            Point::new(w, s - w)
        } else if s <= 2.0 * w + h {
            Point::new(w - (s - w - h), h)
        } else {
            Point::new(0.0, h - (s - 2.0 * w - h))
        }
    };
    Ok((0..count)
        .map(|k| on_perimeter(k as f64 * perimeter / count as f64))
        .collect())
}

/// Everything needed to synthesize measurements in an area.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub area: Area,
    pub aps: Vec<Point>,
    pub rp_interval_m: f64,
    pub tx_power_dbm: f64,
    pub radio: RadioModel,
    pub doa: DoaModel,
}

impl Scenario {
    /// Square area with APs from [`place_aps`].
    pub fn square(
        side_m: f64,
        ap_count: usize,
        rp_interval_m: f64,
        tx_power_dbm: f64,
        radio: RadioModel,
        doa: DoaModel,
    ) -> Result<Self> {
        let area = Area::new(side_m, side_m);
        let s = Self {
            area,
            aps: place_aps(area, ap_count)?,
            rp_interval_m,
            tx_power_dbm,
            radio,
            doa,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn ap_count(&self) -> usize {
        self.aps.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.area.validate()?;
        self.radio.validate()?;
        self.doa.validate()?;
        if self.aps.is_empty() {
            return Err(Error::InvalidParameter(
                "scenario needs at least one AP".into(),
            ));
        }
        if let Some(ap) = self.aps.iter().find(|ap| !self.area.contains(**ap)) {
            return Err(Error::InvalidParameter(format!(
                "AP {ap} lies outside the area"
            )));
        }
        if !(self.rp_interval_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rp_interval_m must be positive, got {}",
                self.rp_interval_m
            )));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::InvalidParameter(
                "tx_power_dbm must be finite".into(),
            ));
        }
        Ok(())
    }

    /// True when `p` is far enough from every AP for the channel model.
    pub fn is_measurable(&self, p: Point) -> bool {
        let min = self.radio.ref_distance_m.max(COINCIDENCE_TOL_M);
        self.aps.iter().all(|ap| distance(*ap, p) >= min)
    }

    /// The RP grid, minus points closer than the reference distance to an AP.
    pub fn reference_points(&self) -> Result<Vec<Point>> {
        Ok(deploy_grid(self.area, self.rp_interval_m)?
            .into_iter()
            .filter(|p| self.is_measurable(*p))
            .collect())
    }

    /// Same scenario under a different channel model.
    pub fn with_radio(&self, radio: RadioModel) -> Self {
        Self {
            radio,
            ..self.clone()
        }
    }
}

/// Per-AP RSSI (dBm) and DoA values observed at one location.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub rssi: Vec<f64>,
    pub doa: Vec<Angle>,
}

impl Fingerprint {
    pub fn new(rssi: Vec<f64>, doa: Vec<Angle>) -> Result<Self> {
        if rssi.len() != doa.len() {
            return Err(Error::DimensionError {
                expected: rssi.len(),
                actual: doa.len(),
            });
        }
        Ok(Self { rssi, doa })
    }

    /// Build from `2Q` values: Q RSSI values then Q DoA values in degrees.
    pub fn from_features_deg(values: &[f64]) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::DimensionError {
                expected: 2 * (values.len() / 2).max(1),
                actual: values.len(),
            });
        }
        let q = values.len() / 2;
        Self::new(
            values[..q].to_vec(),
            values[q..]
                .iter()
                .map(|d| Angle::from_degrees(*d))
                .collect(),
        )
    }

    /// Number of APs.
    pub fn q(&self) -> usize {
        self.rssi.len()
    }

    /// Expected fingerprint at `p` (no shadowing, no DoA error).
    pub fn noiseless(scenario: &Scenario, p: Point) -> Result<Self> {
        let mut rssi = Vec::with_capacity(scenario.ap_count());
        let mut doa = Vec::with_capacity(scenario.ap_count());
        for ap in &scenario.aps {
            doa.push(bearing(p, *ap)?);
            rssi.push(radio::mean_rssi(
                &scenario.radio,
                scenario.tx_power_dbm,
                distance(p, *ap),
            )?);
        }
        Ok(Self { rssi, doa })
    }

    /// One noisy measurement at `p`: Q RSSI draws, then Q DoA draws, from `rng`.
    pub fn measure(scenario: &Scenario, p: Point, rng: &mut RngHandle) -> Result<Self> {
        let truth = Self::noiseless(scenario, p)?;
        let rssi = scenario
            .aps
            .iter()
            .map(|ap| {
                radio::sample_rssi(
                    &scenario.radio,
                    scenario.tx_power_dbm,
                    distance(p, *ap),
                    rng,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let doa = truth
            .doa
            .iter()
            .map(|phi| radio::sample_doa(*phi, &scenario.doa, rng))
            .collect();
        Ok(Self { rssi, doa })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbRow {
    pub rp: Point,
    pub fp: Fingerprint,
}

/// Offline database: averaged fingerprints at every RP plus the scenario
/// that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintDatabase {
    pub scenario: Scenario,
    pub seed: u64,
    pub samples_per_rp: usize,
    pub rows: Vec<DbRow>,
}

impl FingerprintDatabase {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn q(&self) -> usize {
        self.scenario.ap_count()
    }
}

/// Survey every RP in `grid`, averaging `samples_per_rp` noisy measurements.
///
/// RSSI is averaged arithmetically, DoA by circular mean. Each draw uses the
/// substream `(seed, rp, ap, sample)`, so the result does not depend on how
/// rows are scheduled across threads.
pub fn build_database(
    scenario: &Scenario,
    grid: &[Point],
    samples_per_rp: usize,
    seed: u64,
) -> Result<FingerprintDatabase> {
    scenario.validate()?;
    if samples_per_rp == 0 {
        return Err(Error::InvalidParameter(
            "samples_per_rp must be at least 1".into(),
        ));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("RP grid is empty".into()));
    }
    if let Some(p) = grid.iter().find(|p| !scenario.area.contains(**p)) {
        return Err(Error::InvalidParameter(format!(
            "RP {p} lies outside the area"
        )));
    }
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, rp)| survey_rp(scenario, i, *rp, samples_per_rp, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(FingerprintDatabase {
        scenario: scenario.clone(),
        seed,
        samples_per_rp,
        rows,
    })
}

fn survey_rp(
    scenario: &Scenario,
    index: usize,
    rp: Point,
    samples: usize,
    seed: u64,
) -> Result<DbRow> {
    let truth = Fingerprint::noiseless(scenario, rp)?;
    let q = scenario.ap_count();
    let mut rssi = Vec::with_capacity(q);
    let mut doa = Vec::with_capacity(q);
    for (j, ap) in scenario.aps.iter().enumerate() {
        let d = distance(rp, *ap);
        // averaging deviations from the truth keeps the noiseless case exact
        let mut dev = 0.0;
        let (mut sin, mut cos) = (0.0, 0.0);
        for k in 0..samples {
            let coords = [index as u64, j as u64, k as u64];
            let mut r = RngHandle::derive(seed, Domain::OfflineRssi, &coords);
            dev += radio::sample_rssi(&scenario.radio, scenario.tx_power_dbm, d, &mut r)?
                - truth.rssi[j];
            let mut r = RngHandle::derive(seed, Domain::OfflineDoa, &coords);
            let delta = angular_diff(
                radio::sample_doa(truth.doa[j], &scenario.doa, &mut r),
                truth.doa[j],
            );
            sin += delta.sin();
            cos += delta.cos();
        }
        rssi.push(truth.rssi[j] + dev / samples as f64);
        let mean_dev = if sin.hypot(cos) > 0.0 {
            sin.atan2(cos)
        } else {
            0.0
        };
        doa.push(Angle::from_radians(truth.doa[j].radians() + mean_dev));
    }
    Ok(DbRow {
        rp,
        fp: Fingerprint { rssi, doa },
    })
}

const MAGIC: &str = "# fingerloc fingerprint database";

/// Metadata lines (without the leading `# `) describing a scenario.
pub fn scenario_metadata(s: &Scenario) -> Vec<(String, String)> {
    let mut meta = vec![
        ("area_width_m".to_string(), s.area.width_m.to_string()),
        ("area_height_m".into(), s.area.height_m.to_string()),
        ("ap_count".into(), s.ap_count().to_string()),
    ];
    for (i, ap) in s.aps.iter().enumerate() {
        meta.push((format!("ap_{}", i + 1), format!("{} {}", ap.x, ap.y)));
    }
    meta.extend([
        ("rp_interval_m".into(), s.rp_interval_m.to_string()),
        ("tx_power_dbm".into(), s.tx_power_dbm.to_string()),
        ("radio".into(), s.radio.name.clone()),
        ("pl_ref_db".into(), s.radio.pl_ref_db.to_string()),
        ("ref_distance_m".into(), s.radio.ref_distance_m.to_string()),
        ("exponent".into(), s.radio.exponent.to_string()),
        ("shadow_std_db".into(), s.radio.shadow_std_db.to_string()),
        (
            "doa_std_deg".into(),
            s.doa.doa_std_rad.to_degrees().to_string(),
        ),
    ]);
    meta
}

/// Serialize a database to its CSV text.
pub fn database_to_string(db: &FingerprintDatabase) -> String {
    let q = db.q();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    for (k, v) in scenario_metadata(&db.scenario) {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# seed={}", db.seed);
    let _ = writeln!(out, "# samples_per_rp={}", db.samples_per_rp);
    out.push_str("x,y");
    for j in 1..=q {
        let _ = write!(out, ",s_{j}");
    }
    for j in 1..=q {
        let _ = write!(out, ",phi_{j}");
    }
    out.push('\n');
    for row in &db.rows {
        let _ = write!(out, "{},{}", row.rp.x, row.rp.y);
        for s in &row.fp.rssi {
            let _ = write!(out, ",{s}");
        }
        for a in &row.fp.doa {
            let _ = write!(out, ",{}", a.degrees());
        }
        out.push('\n');
    }
    out
}

pub fn save_database(db: &FingerprintDatabase, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, database_to_string(db))?;
    Ok(())
}

pub fn load_database(path: impl AsRef<Path>) -> Result<FingerprintDatabase> {
    parse_database(&fs::read_to_string(path)?)
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, what: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| perr(line, format!("{what}: '{v}' is not a finite number")))
}

/// Parse the CSV text written by [`database_to_string`].
pub fn parse_database(text: &str) -> Result<FingerprintDatabase> {
    let mut meta: Vec<(usize, String, String)> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header = None;
    for (no, line) in lines.by_ref() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((no, k.trim().to_string(), v.trim().to_string()));
            }
        } else if !line.trim().is_empty() {
            header = Some((no, line));
            break;
        }
    }
    let (header_line, header) =
        header.ok_or_else(|| perr(text.lines().count(), "missing column header"))?;

    let get = |key: &str| -> Result<(usize, &str)> {
        meta.iter()
            .find(|(_, k, _)| k == key)
            .map(|(no, _, v)| (*no, v.as_str()))
            .ok_or_else(|| perr(header_line, format!("missing metadata key '{key}'")))
    };
    let num = |key: &str| -> Result<f64> {
        let (no, v) = get(key)?;
        parse_f64(no, key, v)
    };
    let int = |key: &str| -> Result<u64> {
        let (no, v) = get(key)?;
        v.parse()
            .map_err(|_| perr(no, format!("{key}: '{v}' is not an unsigned integer")))
    };

    let q = int("ap_count")? as usize;
    let mut aps = Vec::with_capacity(q);
    for i in 1..=q {
        let key = format!("ap_{i}");
        let (no, v) = get(&key)?;
        let mut it = v.split_whitespace();
        let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
            return Err(perr(no, format!("{key}: expected 'x y'")));
        };
        aps.push(Point::new(parse_f64(no, &key, x)?, parse_f64(no, &key, y)?));
    }
    let (_, radio_name) = get("radio")?;
    let scenario = Scenario {
        area: Area::new(num("area_width_m")?, num("area_height_m")?),
        aps,
        rp_interval_m: num("rp_interval_m")?,
        tx_power_dbm: num("tx_power_dbm")?,
        radio: RadioModel {
            name: radio_name.to_string(),
            pl_ref_db: num("pl_ref_db")?,
            ref_distance_m: num("ref_distance_m")?,
            exponent: num("exponent")?,
            shadow_std_db: num("shadow_std_db")?,
        },
        doa: DoaModel::from_degrees(num("doa_std_deg")?),
    };
    scenario
        .validate()
        .map_err(|e| perr(header_line, format!("invalid scenario metadata: {e}")))?;
    let seed = int("seed")?;
    let samples_per_rp = int("samples_per_rp")? as usize;

    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let mut expected = vec!["x".to_string(), "y".to_string()];
    expected.extend((1..=q).map(|j| format!("s_{j}")));
    expected.extend((1..=q).map(|j| format!("phi_{j}")));
    if columns != expected {
        return Err(perr(
            header_line,
            format!("header must be '{}' for {q} APs", expected.join(",")),
        ));
    }

    let mut rows = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + 2 * q {
            return Err(perr(
                no,
                format!(
                    "row {} has {} columns, expected {}",
                    rows.len() + 1,
                    fields.len(),
                    2 + 2 * q
                ),
            ));
        }
        let vals = fields
            .iter()
            .zip(&expected)
            .map(|(f, name)| parse_f64(no, name, f))
            .collect::<Result<Vec<_>>>()?;
        let rp = Point::new(vals[0], vals[1]);
        if !scenario.area.contains(rp) {
            return Err(perr(no, format!("RP {rp} lies outside the area")));
        }
        rows.push(DbRow {
            rp,
            fp: Fingerprint {
                rssi: vals[2..2 + q].to_vec(),
                doa: vals[2 + q..]
                    .iter()
                    .map(|d| Angle::from_degrees(*d))
                    .collect(),
            },
        });
    }
    if rows.is_empty() {
        return Err(perr(header_line, "database has no rows"));
    }
    Ok(FingerprintDatabase {
        scenario,
        seed,
        samples_per_rp,
        rows,
    })
}
