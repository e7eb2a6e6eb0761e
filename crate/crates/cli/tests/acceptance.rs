//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run a subset by passing criterion numbers: `cargo test --test acceptance -- 7 8`.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use fingerloc::crlb::{
    crlb_closed_form, crlb_numeric, fim, fim_aligned_cross_terms, log_likelihood, score,
    CrlbParams, FisherInfo, Observation,
};
use fingerloc::experiments::{
    self, even_grid, percentile, preset, run_experiment, sweep, ExperimentConfig, ExperimentResult,
    PresetKind, SweepAxis,
};
use fingerloc::fingerprint::{
    build_database, database_to_string, load_database, save_database, FingerprintDatabase,
};
use fingerloc::geometry::{angular_diff, bearing, distance};
use fingerloc::matching::{feature_distance_scaled, FeatureScales, FeatureScaling, Matcher};
use fingerloc::radio::{mean_rssi, mw_to_dbm};
use fingerloc::rng::{Domain, RngHandle};
use fingerloc::{Angle, DoaModel, Fingerprint, MatchConfig, Method, Point, RadioModel, Scenario};

const SEED: u64 = experiments::DEFAULT_SEED;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }
}

fn compare(name: &str) -> &'static ExperimentResult {
    static CACHE: OnceLock<std::sync::Mutex<BTreeMap<String, &'static ExperimentResult>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(name) {
        return r;
    }
    let cfg = preset(name, SEED).unwrap().config;
    let r: &'static ExperimentResult = Box::leak(Box::new(run_experiment(&cfg).unwrap()));
    cache.lock().unwrap().insert(name.to_string(), r);
    r
}

fn mean(r: &ExperimentResult, label: &str) -> f64 {
    r.get(label)
        .unwrap_or_else(|| panic!("no contender {label}"))
        .stats
        .mean
}

fn pct_below(better: f64, worse: f64) -> f64 {
    100.0 * (1.0 - better / worse)
}

// 1. frequency ordering

fn c1_frequency_ordering() -> Outcome {
    let cfg = preset("fig5", SEED).unwrap().config;
    let start = Instant::now();
    let r = fingerloc::with_workers(1, || run_experiment(&cfg))
        .unwrap()
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (mm, wifi) = (mean(&r, "wknn-mmwave60"), mean(&r, "wknn-wifi24"));
    let red = pct_below(mm, wifi);
    let pass = red >= 40.0 && secs < 60.0;
    let mut o = Outcome::new(
        pass,
        format!("WKNN mean {mm:.3} m (mmwave60) vs {wifi:.3} m (wifi24): {red:.1}% lower, need >= 40%; {secs:.1} s on one worker, need < 60 s"),
    );
    for m in ["nn", "knn"] {
        let (a, b) = (
            mean(&r, &format!("{m}-mmwave60")),
            mean(&r, &format!("{m}-wifi24")),
        );
        o = o.note(format!("{m}: {a:.3} m (mmwave60) vs {b:.3} m (wifi24)"));
    }
    o
}

// 2. DoA benefit

fn c2_doa_benefit() -> Outcome {
    let r = compare("fig9");
    let (d, w) = (mean(r, "doalf"), mean(r, "wknn"));
    let red = pct_below(d, w);
    Outcome::new(
        red >= 25.0 && (0.5..=3.0).contains(&d),
        format!(
            "DOALF {d:.3} m vs WKNN {w:.3} m: {red:.1}% lower, need >= 25%; DOALF in [0.5, 3.0] m"
        ),
    )
    .note(format!(
        "NN {:.3} m, KNN {:.3} m",
        mean(r, "nn"),
        mean(r, "knn")
    ))
}

// 3. three-way comparison

fn c3_three_way() -> Outcome {
    let r = compare("fig11");
    let (d, wm, ww) = (
        mean(r, "doalf-mmwave60"),
        mean(r, "wknn-mmwave60"),
        mean(r, "wknn-wifi24"),
    );
    Outcome::new(
        d < wm && wm < ww,
        format!(
            "DOALF(mmwave60) {d:.3} m {} WKNN(mmwave60) {wm:.3} m {} WKNN(wifi24) {ww:.3} m",
            if d < wm { "<" } else { ">=" },
            if wm < ww { "<" } else { ">=" }
        ),
    )
    .note(format!(
        "DOALF is {:.1}% below WKNN(mmwave60) and {:.1}% below WKNN(wifi24)",
        pct_below(d, wm),
        pct_below(d, ww)
    ))
}

// 4. CDF dominance

/// Grid points past the pooled 10th percentile where the better method's
/// CDF falls below the worse one's.
fn dominance_violations(better: &[f64], worse: &[f64]) -> (usize, usize) {
    let max = better.iter().chain(worse).copied().fold(0.0, f64::max);
    let grid = even_grid(max, experiments::CDF_POINTS);
    let pooled: Vec<f64> = better.iter().chain(worse).copied().collect();
    let p10 = percentile(&pooled, 10.0);
    let f =
        |errs: &[f64], e: f64| errs.iter().filter(|x| **x <= e).count() as f64 / errs.len() as f64;
    let checked: Vec<f64> = grid.into_iter().filter(|e| *e > p10).collect();
    let bad = checked
        .iter()
        .filter(|e| f(better, **e) < f(worse, **e))
        .count();
    (bad, checked.len())
}

fn c4_cdf_dominance() -> Outcome {
    let pairs: [(&str, &str, &str); 9] = [
        ("fig5", "nn-mmwave60", "nn-wifi24"),
        ("fig5", "knn-mmwave60", "knn-wifi24"),
        ("fig5", "wknn-mmwave60", "wknn-wifi24"),
        ("fig9", "doalf", "nn"),
        ("fig9", "doalf", "knn"),
        ("fig9", "doalf", "wknn"),
        ("fig11", "doalf-mmwave60", "wknn-mmwave60"),
        ("fig11", "doalf-mmwave60", "wknn-wifi24"),
        ("fig11", "wknn-mmwave60", "wknn-wifi24"),
    ];
    let mut notes = Vec::new();
    let mut failed = Vec::new();
    for (fig, better, worse) in pairs {
        let r = compare(fig);
        let (bad, n) = dominance_violations(
            &r.get(better).unwrap().stats.errors,
            &r.get(worse).unwrap().stats.errors,
        );
        let ok = bad <= 2;
        notes.push(format!(
            "{fig}: {better} over {worse}: {bad} of {n} grid points violate, {}",
            if ok { "ok" } else { "FAIL" }
        ));
        if !ok {
            failed.push(format!("{better}/{worse}"));
        }
    }
    let detail = if failed.is_empty() {
        "all 9 pairs dominate with at most 2 violating grid points".to_string()
    } else {
        format!(
            "{} of 9 pairs break dominance: {}",
            failed.len(),
            failed.join(", ")
        )
    };
    let mut o = Outcome::new(failed.is_empty(), detail);
    o.notes = notes;
    o
}

// 5. sweep monotonicities

fn adjacent_violations(ys: &[f64], increasing: bool) -> usize {
    ys.windows(2)
        .filter(|w| if increasing { w[1] < w[0] } else { w[1] > w[0] })
        .count()
}

fn c5_sweeps() -> Outcome {
    let base = preset("fig16", SEED).unwrap().config;
    let axes: [(SweepAxis, &[f64], bool); 5] = [
        (SweepAxis::RpInterval, &[5.0, 6.0, 7.0, 8.0], true),
        (SweepAxis::ApCount, &[3.0, 4.0, 5.0, 6.0], false),
        (SweepAxis::Exponent, &[1.5, 2.0, 2.5, 3.0], false),
        (SweepAxis::ShadowStd, &[1.0, 2.0, 3.0], true),
        (SweepAxis::DoaStd, &[1.0, 2.0, 5.0, 10.0], true),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (axis, values, increasing) in axes {
        let res = sweep(&base, axis, values).unwrap();
        let ys: Vec<f64> = res.series("doalf").iter().map(|(_, m, _)| *m).collect();
        let bad = adjacent_violations(&ys, increasing);
        pass &= bad <= 1;
        let pts: Vec<String> = values
            .iter()
            .zip(&ys)
            .map(|(v, y)| format!("{v}:{y:.3}"))
            .collect();
        notes.push(format!(
            "{axis} ({}): {} | {bad} adjacent violation(s)",
            if increasing {
                "nondecreasing"
            } else {
                "nonincreasing"
            },
            pts.join(" ")
        ));
    }
    let mut o = Outcome::new(
        pass,
        "DOALF on mmwave60, K = 4, at most one adjacent violation per axis",
    );
    o.notes = notes;
    o
}

// 6. optimal K

fn c6_optimal_k() -> Outcome {
    let p = preset("figk", SEED).unwrap();
    let PresetKind::Sweep { axis, values, .. } = p.kind else {
        unreachable!()
    };
    let res = sweep(&p.config, axis, &values).unwrap();
    let curve =
        |label: &str| -> Vec<f64> { res.series(label).iter().map(|(_, m, _)| *m).collect() };
    let (mm, wm, wifi) = (
        curve("doalf-mmwave60"),
        curve("wknn-mmwave60"),
        curve("wknn-wifi24"),
    );
    let (imin, min) =
        mm.iter().copied().enumerate().fold(
            (0, f64::INFINITY),
            |a, (i, v)| if v < a.1 { (i, v) } else { a },
        );
    let interior = imin != 0 && imin != mm.len() - 1 && min < mm[0] && min < *mm.last().unwrap();
    let below = mm.iter().zip(&wifi).all(|(a, b)| a < b);
    let fmt = |c: &[f64]| {
        c.iter()
            .map(|v| format!("{v:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Outcome::new(
        interior && below,
        format!(
            "DOALF(mmwave60) minimum {min:.3} m at K = {} (interior: {interior}); below WKNN(wifi24) at every K: {below}",
            values[imin]
        ),
    )
    .note(format!("DOALF(mmwave60) K=1..12: {}", fmt(&mm)))
    .note(format!("WKNN(mmwave60)  K=1..12: {}", fmt(&wm)))
    .note(format!("WKNN(wifi24)    K=1..12: {}", fmt(&wifi)))
    .note(format!(
        "WKNN(mmwave60) below WKNN(wifi24) at {} of 12 K values",
        wm.iter().zip(&wifi).filter(|(a, b)| a < b).count()
    ))
}

// 7. FIM oracle

fn reference_params() -> (Scenario, CrlbParams) {
    let s = experiments::reference_scenario(RadioModel::mmwave60());
    let p = CrlbParams::from_scenario(&s);
    (s, p)
}

/// One observation drawn in the signal domain: shadowed RSSI converted back
/// to a distance through the inverse path-loss law, plus a noisy bearing.
fn observe(s: &Scenario, theta: Point, rng: &mut RngHandle) -> Observation {
    let r = &s.radio;
    let mut obs = Observation {
        distances: Vec::new(),
        bearings: Vec::new(),
    };
    for ap in &s.aps {
        let d = distance(theta, *ap);
        let rssi =
            mean_rssi(r, s.tx_power_dbm, d).unwrap() + r.shadow_std_db * rng.standard_normal();
        let loss = s.tx_power_dbm - rssi;
        obs.distances
            .push(r.ref_distance_m * 10f64.powf((loss - r.pl_ref_db) / (10.0 * r.exponent)));
        let phi = bearing(theta, *ap).unwrap().radians();
        obs.bearings.push(Angle::from_radians(
            phi + s.doa.doa_std_rad * rng.standard_normal(),
        ));
    }
    obs
}

/// Negative Hessian of the log-likelihood by central differences.
fn neg_hessian(obs: &Observation, t: Point, p: &CrlbParams, h: f64) -> [f64; 3] {
    let f = |dx: f64, dy: f64| log_likelihood(obs, Point::new(t.x + dx, t.y + dy), p).unwrap();
    let f0 = f(0.0, 0.0);
    let hxx = (f(h, 0.0) - 2.0 * f0 + f(-h, 0.0)) / (h * h);
    let hyy = (f(0.0, h) - 2.0 * f0 + f(0.0, -h)) / (h * h);
    let hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
    [-hxx, -hxy, -hyy]
}

fn random_theta(s: &Scenario, rng: &mut RngHandle, min_gap: f64) -> Point {
    loop {
        let p = Point::new(
            rng.uniform(0.0, s.area.width_m),
            rng.uniform(0.0, s.area.height_m),
        );
        if s.aps.iter().all(|a| distance(p, *a) >= min_gap) {
            return p;
        }
    }
}

fn entries(f: &FisherInfo) -> [f64; 3] {
    [f.j_xx, f.j_xy, f.j_yy]
}

fn c7_fim_oracle() -> Outcome {
    const SAMPLES: usize = 100_000;
    let (s, p) = reference_params();
    let mut pick = RngHandle::derive(SEED, Domain::Oracle, &[7]);
    let mut worst = [0.0f64; 3];
    let mut worst_aligned_xy = 0.0f64;
    let mut notes = Vec::new();
    for t in 0..20u64 {
        let theta = random_theta(&s, &mut pick, 2.0);
        let mut rng = RngHandle::derive(SEED, Domain::Oracle, &[7, t]);
        let mut acc = [0.0; 3];
        for _ in 0..SAMPLES {
            let h = neg_hessian(&observe(&s, theta, &mut rng), theta, &p, 1e-3);
            for i in 0..3 {
                acc[i] += h[i];
            }
        }
        let mc = acc.map(|a| a / SAMPLES as f64);
        let an = entries(&fim(theta, &p).unwrap());
        let rel: Vec<f64> = (0..3)
            .map(|i| (mc[i] - an[i]).abs() / an[i].abs())
            .collect();
        for i in 0..3 {
            worst[i] = worst[i].max(rel[i]);
        }
        let al = entries(&fim_aligned_cross_terms(theta, &p).unwrap());
        worst_aligned_xy = worst_aligned_xy.max((mc[1] - al[1]).abs() / al[1].abs());
        if t < 3 {
            notes.push(format!(
                "theta ({:.2}, {:.2}): MC [{:.5e} {:.5e} {:.5e}] analytic [{:.5e} {:.5e} {:.5e}]",
                theta.x, theta.y, mc[0], mc[1], mc[2], an[0], an[1], an[2]
            ));
        }
    }
    notes.push(format!(
        "aligned-sign cross term for comparison: worst relative deviation of J_xy from MC {:.1}%",
        100.0 * worst_aligned_xy
    ));
    let pass = worst.iter().all(|w| *w <= 0.02);
    let mut o = Outcome::new(
        pass,
        format!(
            "worst relative error over 20 points, 1e5 draws each: J_xx {:.3}%, J_xy {:.3}%, J_yy {:.3}% (limit 2%)",
            100.0 * worst[0],
            100.0 * worst[1],
            100.0 * worst[2]
        ),
    );
    o.notes = notes;
    o
}

// 8. gradient oracle

fn c8_gradient_oracle() -> Outcome {
    let (s, p) = reference_params();
    let mut rng = RngHandle::derive(SEED, Domain::Oracle, &[8]);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let theta = random_theta(&s, &mut rng, 2.0);
        let obs = observe(&s, theta, &mut rng);
        let g = score(theta, &obs, &p).unwrap();
        let h = 1e-5;
        let f = |dx: f64, dy: f64| {
            log_likelihood(&obs, Point::new(theta.x + dx, theta.y + dy), &p).unwrap()
        };
        let fd = [
            (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
            (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
        ];
        let rel = (g[0] - fd[0]).hypot(g[1] - fd[1]) / fd[0].hypot(fd[1]);
        worst = worst.max(rel);
    }
    Outcome::new(
        worst <= 1e-6,
        format!("worst relative error of the score over 100 points: {worst:.2e} (limit 1e-6)"),
    )
}

// 9. single-AP algebra

fn c9_single_ap_algebra() -> Outcome {
    let (_, base) = reference_params();
    let mut rng = RngHandle::derive(SEED, Domain::Oracle, &[9]);
    let (mut checked, mut agree, mut agree_aligned, mut skipped) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    while checked < 1000 {
        let ap = Point::new(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0));
        let theta = Point::new(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0));
        if distance(ap, theta) < 1.0 {
            continue;
        }
        let phi = bearing(theta, ap).unwrap().radians();
        if (2.0 * phi).cos().abs() < 1e-3 {
            skipped += 1;
            continue;
        }
        let p = CrlbParams {
            aps: vec![ap],
            ..base.clone()
        };
        let closed = crlb_closed_form(theta, &p).unwrap();
        let numeric = crlb_numeric(&fim(theta, &p).unwrap()).unwrap();
        let aligned = crlb_numeric(&fim_aligned_cross_terms(theta, &p).unwrap()).unwrap();
        let rel = (closed - numeric).abs() / numeric.abs();
        worst = worst.max(rel);
        agree += usize::from(rel <= 1e-10);
        agree_aligned += usize::from((closed - aligned).abs() / aligned.abs() <= 1e-10);
        checked += 1;
    }
    let mut o = Outcome::new(
        agree == checked,
        format!(
            "closed form equals numeric bound of the expected information in {agree} of {checked} geometries; worst relative gap {worst:.3e} (limit 1e-10)"
        ),
    )
    .note(format!("{skipped} draws near a diagonal bearing skipped"))
    .note(format!(
        "closed form equals numeric bound of the aligned-sign information in {agree_aligned} of {checked} geometries"
    ));
    // four corner APs: reported only
    for theta in [
        Point::new(30.0, 20.0),
        Point::new(50.0, 70.0),
        Point::new(85.0, 40.0),
    ] {
        let n = crlb_numeric(&fim(theta, &base).unwrap()).unwrap();
        let c =
            crlb_closed_form(theta, &base).map_or("undefined".to_string(), |v| format!("{v:.4}"));
        o = o.note(format!(
            "four APs at ({}, {}): numeric {n:.4} m^2, closed form {c} m^2",
            theta.x, theta.y
        ));
    }
    o
}

// 10. matching oracles

fn oracle_db(side_steps: usize, seed: u64) -> FingerprintDatabase {
    let side = 5.0 * side_steps as f64;
    let mut s = Scenario::square(
        side,
        4,
        5.0,
        mw_to_dbm(30.0),
        RadioModel::mmwave60(),
        DoaModel::from_degrees(4.0),
    )
    .unwrap();
    s.aps = vec![
        Point::new(2.5, 2.5),
        Point::new(side - 2.5, 2.5),
        Point::new(side - 2.5, side - 2.5),
        Point::new(2.5, side - 2.5),
    ];
    build_database(&s, &s.reference_points().unwrap(), 3, seed).unwrap()
}

fn c10_matching_oracles() -> Outcome {
    let mut rng = RngHandle::derive(SEED, Domain::Oracle, &[10]);
    let (mut mismatches, mut gamma_breaks, mut queries, mut max_m) = (0, 0, 0, 0);
    for db_i in 0..10u64 {
        let db = oracle_db(3 + (db_i as usize % 7), db_i);
        let m = db.len();
        max_m = max_m.max(m);
        for _ in 0..100 {
            let theta = random_theta(&db.scenario, &mut rng, 1.0);
            let query = Fingerprint::measure(&db.scenario, theta, &mut rng).unwrap();
            let method = Method::ALL[(rng.next_u64() % 4) as usize];
            let k = 1 + (rng.next_u64() as usize % m);
            let mut cfg = MatchConfig::new(method, k);
            if rng.next_u64().is_multiple_of(2) {
                cfg.feature_scaling = FeatureScaling::PerDimensionStd;
            }
            let scales = FeatureScales::for_database(&db, &cfg);
            let mut all: Vec<(f64, usize)> = db
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    (
                        feature_distance_scaled(&query, &r.fp, &cfg, &scales).unwrap(),
                        i,
                    )
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let got = Matcher::new(&db, cfg).unwrap().k_nearest(&query).unwrap();
            let want = &all[..cfg.k];
            if got.len() != want.len()
                || got
                    .iter()
                    .zip(want)
                    .any(|(g, w)| g.index != w.1 || g.feature_distance != w.0)
            {
                mismatches += 1;
            }
            let est = |gamma: f64| {
                Matcher::new(&db, MatchConfig { gamma, ..cfg })
                    .unwrap()
                    .estimate(&query)
                    .unwrap()
            };
            let e1 = est(1.0);
            if est(0.1) != e1 || est(10.0) != e1 {
                gamma_breaks += 1;
            }
            queries += 1;
        }
    }

    // zero noise, query at an RP
    let mut s = experiments::reference_scenario(RadioModel::mmwave60().noiseless());
    s.doa = DoaModel::from_degrees(0.0);
    let db = build_database(&s, &s.reference_points().unwrap(), 1, SEED).unwrap();
    let mut inexact = 0;
    for cfg in [
        MatchConfig::new(Method::Nn, 1),
        MatchConfig::new(Method::Wknn, 1),
        MatchConfig::new(Method::Doalf, 1),
    ] {
        let matcher = Matcher::new(&db, cfg).unwrap();
        for row in &db.rows {
            let q = Fingerprint::noiseless(&s, row.rp).unwrap();
            if matcher.estimate(&q).unwrap() != row.rp {
                inexact += 1;
            }
        }
    }
    Outcome::new(
        mismatches == 0 && gamma_breaks == 0 && inexact == 0,
        format!(
            "{mismatches} k_nearest mismatches in {queries} queries (M <= {max_m}); {gamma_breaks} estimates changed with gamma; {inexact} of {} on-RP zero-noise estimates inexact",
            3 * db.len()
        ),
    )
}

// 11. determinism

fn run_cli(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_fingerloc"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "fingerloc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn c11_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("w1"), tmp.path().join("w8"));
    for (dir, w) in [(&a, "1"), (&b, "8")] {
        run_cli(&[
            "simulate",
            "--preset",
            "fig9",
            "--seed",
            "11",
            "--workers",
            w,
            "--out",
            dir.to_str().unwrap(),
        ]);
    }
    let (fa, fb) = (dir_bytes(&a), dir_bytes(&b));
    let same_outputs = !fa.is_empty() && fa == fb;

    let cfg: ExperimentConfig = preset("fig9", SEED).unwrap().config;
    let s = &cfg.scenario;
    let db = build_database(s, &s.reference_points().unwrap(), cfg.samples_per_rp, SEED).unwrap();
    let path = tmp.path().join("db.csv");
    save_database(&db, &path).unwrap();
    let first = std::fs::read_to_string(&path).unwrap();
    let back = load_database(&path).unwrap();
    let second = database_to_string(&back);
    let values_equal = back.rows.iter().zip(&db.rows).all(|(x, y)| {
        x.rp == y.rp
            && x.fp.rssi == y.fp.rssi
            && x.fp
                .doa
                .iter()
                .zip(&y.fp.doa)
                .all(|(p, q)| p.degrees() == q.degrees() && angular_diff(*p, *q).abs() < 1e-12)
    });
    Outcome::new(
        same_outputs && first == second && values_equal,
        format!(
            "simulate at --workers 1 and 8: {} files, byte-identical: {same_outputs}; database reload reprints identically: {}, values equal at printed precision: {values_equal}",
            fa.len(),
            first == second
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "frequency ordering", c1_frequency_ordering),
    (2, "DoA benefit", c2_doa_benefit),
    (3, "three-way comparison", c3_three_way),
    (4, "CDF dominance", c4_cdf_dominance),
    (5, "sweep monotonicities", c5_sweeps),
    (6, "optimal-K U-shape", c6_optimal_k),
    (7, "FIM oracle", c7_fim_oracle),
    (8, "gradient oracle", c8_gradient_oracle),
    (9, "single-AP algebra", c9_single_ap_algebra),
    (10, "matching oracles", c10_matching_oracles),
    (11, "determinism", c11_determinism),
];

fn main() {
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    println!("acceptance criteria");
    for (n, name, f) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        for note in &outcome.notes {
            println!("    {note}");
        }
        println!(
            "criterion {n:>2} {name}: {} | {} [{:.1} s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if !outcome.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("all criteria passed");
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
