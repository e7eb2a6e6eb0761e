//! Monte Carlo harness: paired method comparisons and parameter sweeps.
//!
//! Every trial draws one test point uniformly over the area and one noisy
//! online measurement there. All contenders of an experiment see the same
//! test points and the same underlying normal variates, so differences in
//! their errors come from the estimator (and the channel model) only.

mod presets;
mod stats;

pub use presets::{preset, reference_scenario, Preset, PresetKind, PRESET_NAMES};
pub use stats::{cdf, even_grid, percentile, ErrorStats, CDF_POINTS};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::crlb::{crlb_at, CrlbParams};
use crate::error::{Error, Result};
use crate::fingerprint::{build_database, place_aps, Fingerprint, FingerprintDatabase, Scenario};
use crate::geometry::{distance, Point};
use crate::matching::{MatchConfig, Matcher, Method};
use crate::radio::{self, RadioModel};
use crate::rng::{Domain, RngHandle};

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 20_190_601;
pub const DEFAULT_TEST_POINTS: usize = 2000;
pub const DEFAULT_SAMPLES_PER_RP: usize = 100;
pub const DEFAULT_DOA_STD_DEG: f64 = 2.0;
pub const DEFAULT_TX_POWER_MW: f64 = 30.0;

const MAX_TEST_POINT_ATTEMPTS: usize = 10_000;

/// One estimator under one channel model.
#[derive(Debug, Clone, PartialEq)]
pub struct Contender {
    pub label: String,
    pub matcher: MatchConfig,
    /// Overrides the scenario's channel model when set.
    pub radio: Option<RadioModel>,
}

impl Contender {
    pub fn new(matcher: MatchConfig) -> Self {
        Self {
            label: matcher.method.to_string(),
            matcher,
            radio: None,
        }
    }

    pub fn with_radio(matcher: MatchConfig, radio: RadioModel) -> Self {
        Self {
            label: format!("{}-{}", matcher.method, radio.name),
            matcher,
            radio: Some(radio),
        }
    }

    pub fn radio<'a>(&'a self, scenario: &'a Scenario) -> &'a RadioModel {
        self.radio.as_ref().unwrap_or(&scenario.radio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub contenders: Vec<Contender>,
    pub num_test_points: usize,
    pub samples_per_rp: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.contenders.is_empty() {
            return Err(Error::InvalidParameter("no methods to compare".into()));
        }
        for c in &self.contenders {
            c.matcher.validate()?;
            c.radio(&self.scenario).validate()?;
        }
        let mut labels: Vec<&str> = self.contenders.iter().map(|c| c.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(
                "method labels must be unique".into(),
            ));
        }
        if self.num_test_points == 0 {
            return Err(Error::InvalidParameter(
                "num_test_points must be at least 1".into(),
            ));
        }
        if self.samples_per_rp == 0 {
            return Err(Error::InvalidParameter(
                "samples_per_rp must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome for one contender.
#[derive(Debug, Clone, PartialEq)]
pub struct ContenderResult {
    pub label: String,
    pub stats: ErrorStats,
    /// Mean Cramer-Rao bound (m²) over the test points, for hybrid matchers.
    pub mean_crlb_m2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub test_points: Vec<Point>,
    pub contenders: Vec<ContenderResult>,
}

impl ExperimentResult {
    pub fn get(&self, label: &str) -> Option<&ContenderResult> {
        self.contenders.iter().find(|c| c.label == label)
    }

    /// CDFs of every contender on one shared grid from 0 to the largest error.
    pub fn cdf_table(&self, points: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let max = self
            .contenders
            .iter()
            .map(|c| c.stats.max())
            .fold(0.0, f64::max);
        let grid = even_grid(max, points);
        let cols = self
            .contenders
            .iter()
            .map(|c| {
                cdf(&c.stats.errors, &grid)
                    .into_iter()
                    .map(|(_, p)| p)
                    .collect()
            })
            .collect();
        (grid, cols)
    }
}

/// Draw the test point of trial `index`: uniform over the area, redrawn
/// while it falls within the reference distance of an AP.
pub fn test_point(scenario: &Scenario, seed: u64, index: usize) -> Result<Point> {
    let mut rng = RngHandle::derive(seed, Domain::TestPoint, &[index as u64]);
    for _ in 0..MAX_TEST_POINT_ATTEMPTS {
        let p = Point::new(
            rng.uniform(0.0, scenario.area.width_m),
            rng.uniform(0.0, scenario.area.height_m),
        );
        if scenario.is_measurable(p) {
            return Ok(p);
        }
    }
    Err(Error::InvalidParameter(
        "could not place a test point away from the APs".into(),
    ))
}

/// The measurement stream of trial `index`. Cloned per contender.
pub fn trial_rng(seed: u64, index: usize) -> RngHandle {
    RngHandle::derive(seed, Domain::OnlineMeasurement, &[index as u64])
}

/// One trial: measure once at `test_point`, estimate, return the error in meters.
pub fn run_trial(
    db: &FingerprintDatabase,
    scenario: &Scenario,
    test_point: Point,
    cfg: &MatchConfig,
    rng: &mut RngHandle,
) -> Result<f64> {
    let matcher = Matcher::new(db, *cfg)?;
    trial_with(&matcher, scenario, test_point, rng)
}

fn trial_with(
    matcher: &Matcher<'_>,
    scenario: &Scenario,
    test_point: Point,
    rng: &mut RngHandle,
) -> Result<f64> {
    if !scenario.area.contains(test_point) {
        return Err(Error::InvalidParameter(format!(
            "test point {test_point} lies outside the area"
        )));
    }
    let measured = Fingerprint::measure(scenario, test_point, rng)?;
    Ok(distance(matcher.estimate(&measured)?, test_point))
}

/// Run every contender over the same test points and measurement noise.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let grid = cfg.scenario.reference_points()?;

    // one database per distinct channel model
    let mut radios: Vec<RadioModel> = Vec::new();
    for c in &cfg.contenders {
        let r = c.radio(&cfg.scenario);
        if !radios.contains(r) {
            radios.push(r.clone());
        }
    }
    let scenarios: Vec<Scenario> = radios
        .iter()
        .map(|r| cfg.scenario.with_radio(r.clone()))
        .collect();
    let dbs = scenarios
        .iter()
        .map(|s| build_database(s, &grid, cfg.samples_per_rp, cfg.master_seed))
        .collect::<Result<Vec<_>>>()?;

    let slots: Vec<usize> = cfg
        .contenders
        .iter()
        .map(|c| {
            radios
                .iter()
                .position(|r| r == c.radio(&cfg.scenario))
                .unwrap()
        })
        .collect();
    let matchers = cfg
        .contenders
        .iter()
        .zip(&slots)
        .map(|(c, &slot)| Matcher::new(&dbs[slot], c.matcher))
        .collect::<Result<Vec<_>>>()?;

    let test_points = (0..cfg.num_test_points)
        .into_par_iter()
        .map(|t| test_point(&cfg.scenario, cfg.master_seed, t))
        .collect::<Result<Vec<_>>>()?;

    let per_trial = test_points
        .par_iter()
        .enumerate()
        .map(|(t, tp)| {
            let base = trial_rng(cfg.master_seed, t);
            matchers
                .iter()
                .zip(&slots)
                .map(|(m, &slot)| trial_with(m, &scenarios[slot], *tp, &mut base.clone()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut contenders = Vec::with_capacity(cfg.contenders.len());
    for (ci, c) in cfg.contenders.iter().enumerate() {
        let errors = per_trial.iter().map(|row| row[ci]).collect();
        let mean_crlb_m2 = if c.matcher.use_doa() {
            mean_crlb(&scenarios[slots[ci]], &test_points)
        } else {
            None
        };
        contenders.push(ContenderResult {
            label: c.label.clone(),
            stats: ErrorStats::new(errors)?,
            mean_crlb_m2,
        });
    }
    Ok(ExperimentResult {
        test_points,
        contenders,
    })
}

fn mean_crlb(scenario: &Scenario, points: &[Point]) -> Option<f64> {
    let params = CrlbParams::from_scenario(scenario);
    params.validate().ok()?;
    let bounds = points
        .par_iter()
        .map(|p| crlb_at(*p, &params))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    Some(bounds.iter().sum::<f64>() / bounds.len() as f64)
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    RpInterval,
    ApCount,
    Exponent,
    /// Shadowing standard deviation, dB.
    ShadowStd,
    /// DoA error standard deviation, degrees.
    DoaStd,
    K,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::RpInterval,
        SweepAxis::ApCount,
        SweepAxis::Exponent,
        SweepAxis::ShadowStd,
        SweepAxis::DoaStd,
        SweepAxis::K,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::RpInterval => "rp_interval",
            SweepAxis::ApCount => "ap_count",
            SweepAxis::Exponent => "exponent",
            SweepAxis::ShadowStd => "shadow_std",
            SweepAxis::DoaStd => "doa_std",
            SweepAxis::K => "k",
        }
    }

    fn integral(self) -> bool {
        matches!(self, SweepAxis::ApCount | SweepAxis::K)
    }

    /// `cfg` with this axis set to `value`.
    pub fn apply(self, cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        if !value.is_finite() || (self.integral() && (value < 1.0 || value.fract() != 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "{value} is not a valid {} value",
                self.as_str()
            )));
        }
        let mut out = cfg.clone();
        let each_radio = |out: &mut ExperimentConfig, f: &dyn Fn(&mut RadioModel)| {
            f(&mut out.scenario.radio);
            for c in &mut out.contenders {
                if let Some(r) = c.radio.as_mut() {
                    f(r);
                }
            }
        };
        match self {
            SweepAxis::RpInterval => out.scenario.rp_interval_m = value,
            SweepAxis::ApCount => out.scenario.aps = place_aps(out.scenario.area, value as usize)?,
            SweepAxis::Exponent => each_radio(&mut out, &|r| r.exponent = value),
            SweepAxis::ShadowStd => each_radio(&mut out, &|r| r.shadow_std_db = value),
            SweepAxis::DoaStd => out.scenario.doa = radio::DoaModel::from_degrees(value),
            SweepAxis::K => {
                for c in &mut out.contenders {
                    if c.matcher.method != Method::Nn {
                        c.matcher.k = value as usize;
                    }
                }
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|a| a.as_str()).collect();
                Error::InvalidParameter(format!(
                    "unknown sweep axis '{s}' (valid axes: {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// One experiment result per axis value.
    pub points: Vec<ExperimentResult>,
}

impl SweepResult {
    /// `(value, mean error, mean CRLB)` for one contender.
    pub fn series(&self, label: &str) -> Vec<(f64, f64, Option<f64>)> {
        self.values
            .iter()
            .zip(&self.points)
            .filter_map(|(v, r)| r.get(label).map(|c| (*v, c.stats.mean, c.mean_crlb_m2)))
            .collect()
    }
}

/// Re-run the experiment once per value of `axis`, with a fixed master seed.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one value".into(),
        ));
    }
    let points = values
        .iter()
        .map(|v| run_experiment(&axis.apply(cfg, *v)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis,
        values: values.to_vec(),
        points,
    })
}

/// Averaged RSSI from AP `ap` at every RP, under several channel models.
#[derive(Debug, Clone, PartialEq)]
pub struct RssiComparison {
    pub radios: Vec<String>,
    /// `(rp, distance to the AP, RSSI per radio)`.
    pub rows: Vec<(Point, f64, Vec<f64>)>,
}

pub fn rssi_comparison(
    scenario: &Scenario,
    radios: &[RadioModel],
    ap: usize,
    samples_per_rp: usize,
    seed: u64,
) -> Result<RssiComparison> {
    let Some(ap_pos) = scenario.aps.get(ap).copied() else {
        return Err(Error::InvalidParameter(format!(
            "AP index {ap} out of range"
        )));
    };
    let grid = scenario.reference_points()?;
    let dbs = radios
        .iter()
        .map(|r| build_database(&scenario.with_radio(r.clone()), &grid, samples_per_rp, seed))
        .collect::<Result<Vec<_>>>()?;
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, rp)| {
            (
                *rp,
                distance(*rp, ap_pos),
                dbs.iter().map(|db| db.rows[i].fp.rssi[ap]).collect(),
            )
        })
        .collect();
    Ok(RssiComparison {
        radios: radios.iter().map(|r| r.name.clone()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::DoaModel;

    fn small(sigma_s: f64, sigma_phi_deg: f64, methods: &[Method], k: usize) -> ExperimentConfig {
        let mut radio = RadioModel::mmwave60();
        radio.shadow_std_db = sigma_s;
        let scenario = Scenario::square(
            40.0,
            4,
            5.0,
            radio::mw_to_dbm(30.0),
            radio,
            DoaModel::from_degrees(sigma_phi_deg),
        )
        .unwrap();
        ExperimentConfig {
            scenario,
            contenders: methods
                .iter()
                .map(|m| Contender::new(MatchConfig::new(*m, k)))
                .collect(),
            num_test_points: 60,
            samples_per_rp: 10,
            master_seed: 3,
        }
    }

    #[test]
    fn noiseless_trial_on_rp_is_exact() {
        let cfg = small(0.0, 0.0, &[Method::Nn], 1);
        let s = &cfg.scenario;
        let db = build_database(s, &s.reference_points().unwrap(), 1, 0).unwrap();
        let nn = MatchConfig::new(Method::Nn, 1);
        for rp in [Point::new(10.0, 15.0), Point::new(35.0, 5.0)] {
            assert_eq!(
                run_trial(&db, s, rp, &nn, &mut trial_rng(1, 0)).unwrap(),
                0.0
            );
        }
        assert!(run_trial(&db, s, Point::new(50.0, 5.0), &nn, &mut trial_rng(1, 0)).is_err());
    }

    #[test]
    fn trial_errors_are_bounded_and_reproducible() {
        let cfg = small(3.0, 10.0, &[Method::Wknn], 4);
        let s = &cfg.scenario;
        let db = build_database(s, &s.reference_points().unwrap(), 5, 0).unwrap();
        let m = MatchConfig::new(Method::Wknn, 4);
        for t in 0..50 {
            let tp = test_point(s, 9, t).unwrap();
            let e = run_trial(&db, s, tp, &m, &mut trial_rng(9, t)).unwrap();
            assert!(e >= 0.0 && e <= s.area.diagonal());
            assert_eq!(e, run_trial(&db, s, tp, &m, &mut trial_rng(9, t)).unwrap());
        }
    }

    #[test]
    fn experiment_validation() {
        let mut cfg = small(1.0, 1.0, &[Method::Wknn], 4);
        cfg.contenders.clear();
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = small(1.0, 1.0, &[Method::Wknn, Method::Wknn], 4);
        assert!(run_experiment(&cfg).is_err());
        cfg.contenders.pop();
        cfg.num_test_points = 0;
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn single_noiseless_on_rp_point_gives_zero_mean() {
        // a 10 m square with RPs every 10 m and a test point drawn on the grid
        // is unlikely; instead check the harness on an on-RP point directly
        let cfg = small(0.0, 0.0, &[Method::Nn], 1);
        let s = &cfg.scenario;
        let db = build_database(s, &s.reference_points().unwrap(), 1, 0).unwrap();
        let errs: Vec<f64> = db
            .rows
            .iter()
            .map(|r| {
                run_trial(
                    &db,
                    s,
                    r.rp,
                    &MatchConfig::new(Method::Nn, 1),
                    &mut trial_rng(0, 0),
                )
                .unwrap()
            })
            .collect();
        assert_eq!(ErrorStats::new(errs).unwrap().mean, 0.0);
    }

    #[test]
    fn paired_noise_across_methods() {
        let cfg = small(2.0, 3.0, &[Method::Knn, Method::Wknn, Method::Doalf], 3);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.contenders.len(), 3);
        assert!(a.get("doalf").unwrap().mean_crlb_m2.is_some());
        assert!(a.get("wknn").unwrap().mean_crlb_m2.is_none());

        // a method compared with itself under another label gives identical errors
        let mut twin = cfg.clone();
        let mut c = twin.contenders[1].clone();
        c.label = "wknn-again".into();
        twin.contenders.push(c);
        let r = run_experiment(&twin).unwrap();
        assert_eq!(
            r.get("wknn").unwrap().stats.errors,
            r.get("wknn-again").unwrap().stats.errors
        );
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small(2.0, 3.0, &[Method::Wknn, Method::Doalf], 4);
        let one = crate::with_workers(1, || run_experiment(&cfg))
            .unwrap()
            .unwrap();
        let many = crate::with_workers(6, || run_experiment(&cfg))
            .unwrap()
            .unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn sweep_axes() {
        let cfg = small(1.0, 2.0, &[Method::Nn, Method::Doalf], 4);
        assert!(sweep(&cfg, SweepAxis::K, &[]).is_err());
        let r = sweep(&cfg, SweepAxis::K, &[1.0, 3.0]).unwrap();
        assert_eq!(r.points.len(), 2);
        // NN ignores K
        assert_eq!(
            r.points[0].get("nn").unwrap().stats,
            r.points[1].get("nn").unwrap().stats
        );
        assert!(SweepAxis::ApCount.apply(&cfg, 2.5).is_err());
        assert_eq!(
            SweepAxis::ApCount
                .apply(&cfg, 6.0)
                .unwrap()
                .scenario
                .aps
                .len(),
            6
        );
        let d = SweepAxis::DoaStd.apply(&cfg, 5.0).unwrap();
        assert!((d.scenario.doa.doa_std_rad - 5f64.to_radians()).abs() < 1e-15);
        assert_eq!(
            "exponent".parse::<SweepAxis>().unwrap(),
            SweepAxis::Exponent
        );
        let err = "height".parse::<SweepAxis>().unwrap_err().to_string();
        assert!(err.contains("rp_interval") && err.contains("doa_std"));
    }

    #[test]
    fn rssi_comparison_shape() {
        let cfg = small(1.0, 1.0, &[Method::Wknn], 4);
        let cmp = rssi_comparison(
            &cfg.scenario,
            &[RadioModel::mmwave60(), RadioModel::wifi24()],
            0,
            5,
            1,
        )
        .unwrap();
        assert_eq!(
            cmp.rows.len(),
            cfg.scenario.reference_points().unwrap().len()
        );
        assert!(cmp.rows.iter().all(|(_, _, v)| v.len() == 2));
    }
}
