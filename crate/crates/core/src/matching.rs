//! Online matching: feature-space distance, K-nearest selection and the
//! NN / KNN / WKNN / hybrid estimators.
//!
//! WKNN weights each of the K nearest RPs by `γ / (dᵢ + ε)` and returns the
//! weighted mean of their coordinates. The hybrid matcher ([`Method::Doalf`])
//! is WKNN over the joint RSSI + DoA feature space; the other methods use
//! RSSI only.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fingerprint::{Fingerprint, FingerprintDatabase};
use crate::geometry::{angular_diff, circular_mean, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Nn,
    Knn,
    Wknn,
    Doalf,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Nn, Method::Knn, Method::Wknn, Method::Doalf];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Nn => "nn",
            Method::Knn => "knn",
            Method::Wknn => "wknn",
            Method::Doalf => "doalf",
        }
    }

    /// Only the hybrid matcher looks at DoA features.
    pub fn uses_doa(self) -> bool {
        self == Method::Doalf
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nn" => Ok(Method::Nn),
            "knn" => Ok(Method::Knn),
            "wknn" => Ok(Method::Wknn),
            "doalf" => Ok(Method::Doalf),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected nn, knn, wknn or doalf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureScaling {
    /// dB and angle values concatenated as they are.
    #[default]
    Raw,
    /// Every feature divided by its standard deviation across the database.
    PerDimensionStd,
}

impl FromStr for FeatureScaling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(Self::Raw),
            "per_dimension_std" => Ok(Self::PerDimensionStd),
            other => Err(Error::InvalidParameter(format!(
                "unknown feature scaling '{other}' (expected raw or per_dimension_std)"
            ))),
        }
    }
}

impl fmt::Display for FeatureScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Raw => "raw",
            Self::PerDimensionStd => "per_dimension_std",
        })
    }
}

/// Unit in which DoA differences enter the feature distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

impl AngleUnit {
    fn per_radian(self) -> f64 {
        match self {
            AngleUnit::Degrees => 180.0 / std::f64::consts::PI,
            AngleUnit::Radians => 1.0,
        }
    }
}

impl FromStr for AngleUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "degrees" | "deg" => Ok(Self::Degrees),
            "radians" | "rad" => Ok(Self::Radians),
            other => Err(Error::InvalidParameter(format!(
                "unknown angle unit '{other}'"
            ))),
        }
    }
}

impl fmt::Display for AngleUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Degrees => "degrees",
            Self::Radians => "radians",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    pub method: Method,
    pub k: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub feature_scaling: FeatureScaling,
    pub angle_unit: AngleUnit,
}

impl MatchConfig {
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    /// Defaults for everything but the method and K. NN always uses K = 1.
    pub fn new(method: Method, k: usize) -> Self {
        Self {
            method,
            k: if method == Method::Nn { 1 } else { k },
            epsilon: Self::DEFAULT_EPSILON,
            gamma: 1.0,
            feature_scaling: FeatureScaling::Raw,
            angle_unit: AngleUnit::Degrees,
        }
    }

    pub fn use_doa(&self) -> bool {
        self.method.uses_doa()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if self.method == Method::Nn && self.k != 1 {
            return Err(Error::InvalidParameter(format!(
                "NN uses K = 1, got K = {}",
                self.k
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// One selected RP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub feature_distance: f64,
    pub rp: Point,
}

/// Divisors applied to each feature difference (Q RSSI, then Q DoA).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScales {
    rssi: Vec<f64>,
    doa: Vec<f64>,
}

impl FeatureScales {
    pub fn unit(q: usize) -> Self {
        Self {
            rssi: vec![1.0; q],
            doa: vec![1.0; q],
        }
    }

    /// Scales for `cfg` over `db`. Raw scaling is all ones; per-dimension
    /// scaling uses sample standard deviations (circular for DoA), with
    /// constant dimensions left unscaled.
    pub fn for_database(db: &FingerprintDatabase, cfg: &MatchConfig) -> Self {
        let q = db.q();
        if cfg.feature_scaling == FeatureScaling::Raw || db.len() < 2 {
            return Self::unit(q);
        }
        let m = db.len() as f64;
        let guard = |sd: f64| if sd > 1e-12 { sd } else { 1.0 };
        let rssi = (0..q)
            .map(|j| {
                let mean = db.rows.iter().map(|r| r.fp.rssi[j]).sum::<f64>() / m;
                let var = db
                    .rows
                    .iter()
                    .map(|r| (r.fp.rssi[j] - mean).powi(2))
                    .sum::<f64>()
                    / (m - 1.0);
                guard(var.sqrt())
            })
            .collect();
        let doa = (0..q)
            .map(|j| {
                let Some(center) = circular_mean(db.rows.iter().map(|r| r.fp.doa[j])) else {
                    return 1.0;
                };
                let var = db
                    .rows
                    .iter()
                    .map(|r| {
                        (angular_diff(r.fp.doa[j], center) * cfg.angle_unit.per_radian()).powi(2)
                    })
                    .sum::<f64>()
                    / (m - 1.0);
                guard(var.sqrt())
            })
            .collect();
        Self { rssi, doa }
    }
}

fn check_dims(a: &Fingerprint, b: &Fingerprint) -> Result<()> {
    for len in [b.rssi.len(), a.doa.len(), b.doa.len()] {
        if len != a.rssi.len() {
            return Err(Error::DimensionError {
                expected: a.rssi.len(),
                actual: len,
            });
        }
    }
    Ok(())
}

/// Euclidean distance in feature space with explicit per-dimension scales.
pub fn feature_distance_scaled(
    a: &Fingerprint,
    b: &Fingerprint,
    cfg: &MatchConfig,
    scales: &FeatureScales,
) -> Result<f64> {
    check_dims(a, b)?;
    if scales.rssi.len() != a.q() {
        return Err(Error::DimensionError {
            expected: scales.rssi.len(),
            actual: a.q(),
        });
    }
    Ok(distance_unchecked(a, b, cfg, scales))
}

/// Euclidean distance in feature space, unscaled (raw dB and angle values).
pub fn feature_distance(a: &Fingerprint, b: &Fingerprint, cfg: &MatchConfig) -> Result<f64> {
    feature_distance_scaled(a, b, cfg, &FeatureScales::unit(a.q()))
}

fn distance_unchecked(
    a: &Fingerprint,
    b: &Fingerprint,
    cfg: &MatchConfig,
    scales: &FeatureScales,
) -> f64 {
    let mut sum = 0.0;
    for j in 0..a.rssi.len() {
        sum += ((a.rssi[j] - b.rssi[j]) / scales.rssi[j]).powi(2);
    }
    if cfg.use_doa() {
        let unit = cfg.angle_unit.per_radian();
        for j in 0..a.doa.len() {
            sum += (angular_diff(a.doa[j], b.doa[j]) * unit / scales.doa[j]).powi(2);
        }
    }
    sum.sqrt()
}

/// A database bound to a matching configuration.
#[derive(Debug, Clone)]
pub struct Matcher<'a> {
    db: &'a FingerprintDatabase,
    cfg: MatchConfig,
    scales: FeatureScales,
}

impl<'a> Matcher<'a> {
    pub fn new(db: &'a FingerprintDatabase, cfg: MatchConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.k > db.len() {
            return Err(Error::InvalidParameter(format!(
                "K = {} exceeds the {} database rows",
                cfg.k,
                db.len()
            )));
        }
        Ok(Self {
            scales: FeatureScales::for_database(db, &cfg),
            db,
            cfg,
        })
    }

    pub fn config(&self) -> &MatchConfig {
        &self.cfg
    }

    fn check_query(&self, query: &Fingerprint) -> Result<()> {
        let q = self.db.q();
        if query.rssi.len() != q || query.doa.len() != q {
            return Err(Error::DimensionError {
                expected: 2 * q,
                actual: query.rssi.len() + query.doa.len(),
            });
        }
        Ok(())
    }

    /// The K rows closest to `query`, ascending; ties go to the lower row index.
    pub fn k_nearest(&self, query: &Fingerprint) -> Result<Vec<Neighbor>> {
        self.check_query(query)?;
        let mut all: Vec<(f64, usize)> = self
            .db
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                (
                    distance_unchecked(query, &row.fp, &self.cfg, &self.scales),
                    i,
                )
            })
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.cfg.k;
        if k < all.len() {
            all.select_nth_unstable_by(k - 1, order);
            all.truncate(k);
        }
        all.sort_unstable_by(order);
        Ok(all
            .into_iter()
            .map(|(d, i)| Neighbor {
                index: i,
                feature_distance: d,
                rp: self.db.rows[i].rp,
            })
            .collect())
    }

    /// Position estimate together with the neighbors it was built from.
    pub fn locate(&self, query: &Fingerprint) -> Result<(Point, Vec<Neighbor>)> {
        let neighbors = self.k_nearest(query)?;
        let estimate = match self.cfg.method {
            Method::Nn => neighbors[0].rp,
            Method::Knn => {
                let n = neighbors.len() as f64;
                let (sx, sy) = neighbors
                    .iter()
                    .fold((0.0, 0.0), |(x, y), nb| (x + nb.rp.x, y + nb.rp.y));
                Point::new(sx / n, sy / n)
            }
            Method::Wknn | Method::Doalf => {
                // w = γ/(d + ε); γ cancels in the normalized mean, so it is
                // left out of the arithmetic and estimates agree exactly for any γ
                let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
                for nb in &neighbors {
                    let w = 1.0 / (nb.feature_distance + self.cfg.epsilon);
                    sw += w;
                    sx += w * nb.rp.x;
                    sy += w * nb.rp.y;
                }
                Point::new(sx / sw, sy / sw)
            }
        };
        Ok((estimate, neighbors))
    }

    pub fn estimate(&self, query: &Fingerprint) -> Result<Point> {
        Ok(self.locate(query)?.0)
    }
}

pub fn k_nearest(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    cfg: &MatchConfig,
) -> Result<Vec<Neighbor>> {
    Matcher::new(db, *cfg)?.k_nearest(query)
}

pub fn estimate(db: &FingerprintDatabase, query: &Fingerprint, cfg: &MatchConfig) -> Result<Point> {
    Matcher::new(db, *cfg)?.estimate(query)
}
