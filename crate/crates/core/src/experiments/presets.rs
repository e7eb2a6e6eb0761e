//! Named experiment configurations.

use super::{
    Contender, ExperimentConfig, SweepAxis, DEFAULT_DOA_STD_DEG, DEFAULT_SAMPLES_PER_RP,
    DEFAULT_TEST_POINTS, DEFAULT_TX_POWER_MW,
};
use crate::error::{Error, Result};
use crate::fingerprint::Scenario;
use crate::matching::{MatchConfig, Method};
use crate::radio::{mw_to_dbm, DoaModel, RadioModel};

pub const PRESET_NAMES: [&str; 13] = [
    "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "figk", "fig12", "fig13", "fig14",
    "fig15", "fig16",
];

#[derive(Debug, Clone, PartialEq)]
pub enum PresetKind {
    /// Run all contenders once and compare CDFs and means.
    Compare,
    /// Vary one parameter. With `series`, the sweep is repeated for each
    /// value of a second parameter.
    Sweep {
        axis: SweepAxis,
        values: Vec<f64>,
        series: Option<(SweepAxis, Vec<f64>)>,
    },
    /// Averaged RSSI of one AP at every RP under several channel models.
    RssiComparison { radios: Vec<RadioModel>, ap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
    pub kind: PresetKind,
}

/// 100 m square, RPs every 5 m, 4 corner APs at 30 mW.
pub fn reference_scenario(radio: RadioModel) -> Scenario {
    Scenario::square(
        100.0,
        4,
        5.0,
        mw_to_dbm(DEFAULT_TX_POWER_MW),
        radio,
        DoaModel::from_degrees(DEFAULT_DOA_STD_DEG),
    )
    .expect("reference scenario is valid")
}

fn config(contenders: Vec<Contender>, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        scenario: reference_scenario(RadioModel::mmwave60()),
        contenders,
        num_test_points: DEFAULT_TEST_POINTS,
        samples_per_rp: DEFAULT_SAMPLES_PER_RP,
        master_seed: seed,
    }
}

fn on(method: Method, k: usize, radio: RadioModel) -> Contender {
    Contender::with_radio(MatchConfig::new(method, k), radio)
}

fn rssi_methods_both_bands(seed: u64) -> ExperimentConfig {
    let mut c = Vec::new();
    for radio in [RadioModel::mmwave60(), RadioModel::wifi24()] {
        for m in [Method::Nn, Method::Knn, Method::Wknn] {
            c.push(on(m, 6, radio.clone()));
        }
    }
    config(c, seed)
}

fn all_methods_mmwave(seed: u64) -> ExperimentConfig {
    config(
        Method::ALL
            .iter()
            .map(|m| Contender::new(MatchConfig::new(*m, 4)))
            .collect(),
        seed,
    )
}

fn three_way(k: usize, seed: u64) -> ExperimentConfig {
    config(
        vec![
            on(Method::Doalf, k, RadioModel::mmwave60()),
            on(Method::Wknn, k, RadioModel::mmwave60()),
            on(Method::Wknn, k, RadioModel::wifi24()),
        ],
        seed,
    )
}

fn doalf_only(seed: u64) -> ExperimentConfig {
    config(
        vec![Contender::new(MatchConfig::new(Method::Doalf, 4))],
        seed,
    )
}

fn sweep_kind(axis: SweepAxis, values: &[f64]) -> PresetKind {
    PresetKind::Sweep {
        axis,
        values: values.to_vec(),
        series: None,
    }
}

/// Look up a named preset, using `seed` as the master seed.
pub fn preset(name: &str, seed: u64) -> Result<Preset> {
    let (description, config, kind) = match name {
        "fig5" | "fig6" => (
            "NN, KNN and WKNN (RSSI only, K = 6) under both channel models",
            rssi_methods_both_bands(seed),
            PresetKind::Compare,
        ),
        "fig7" => (
            "averaged RSSI from the first AP at every RP, both channel models",
            config(Vec::new(), seed),
            PresetKind::RssiComparison {
                radios: vec![RadioModel::mmwave60(), RadioModel::wifi24()],
                ap: 0,
            },
        ),
        "fig8" | "fig9" => (
            "NN, KNN, WKNN and DOALF on mmwave60, K = 4",
            all_methods_mmwave(seed),
            PresetKind::Compare,
        ),
        "fig10" | "fig11" => (
            "DOALF on mmwave60 against WKNN on both channel models, K = 6",
            three_way(6, seed),
            PresetKind::Compare,
        ),
        "figk" => (
            "mean error against K for DOALF on mmwave60 and WKNN on both channel models",
            three_way(4, seed),
            sweep_kind(SweepAxis::K, &(1..=12).map(f64::from).collect::<Vec<_>>()),
        ),
        "fig12" => (
            "DOALF mean error against RP interval, one series per AP count",
            doalf_only(seed),
            PresetKind::Sweep {
                axis: SweepAxis::RpInterval,
                values: vec![5.0, 6.0, 7.0, 8.0],
                series: Some((SweepAxis::ApCount, vec![3.0, 4.0, 5.0, 6.0])),
            },
        ),
        "fig13" => (
            "DOALF mean error against AP count, one series per RP interval",
            doalf_only(seed),
            PresetKind::Sweep {
                axis: SweepAxis::ApCount,
                values: vec![3.0, 4.0, 5.0, 6.0],
                series: Some((SweepAxis::RpInterval, vec![5.0, 6.0, 7.0, 8.0])),
            },
        ),
        "fig14" => (
            "DOALF mean error against path loss exponent",
            doalf_only(seed),
            sweep_kind(SweepAxis::Exponent, &[1.5, 2.0, 2.5, 3.0]),
        ),
        "fig15" => (
            "DOALF mean error against shadowing standard deviation (dB)",
            doalf_only(seed),
            sweep_kind(SweepAxis::ShadowStd, &[1.0, 2.0, 3.0]),
        ),
        "fig16" => (
            "DOALF mean error against DoA error standard deviation (degrees)",
            doalf_only(seed),
            sweep_kind(SweepAxis::DoaStd, &[1.0, 2.0, 5.0, 10.0]),
        ),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown preset '{other}' (valid presets: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let name = PRESET_NAMES.iter().copied().find(|n| *n == name).unwrap();
    Ok(Preset {
        name,
        description,
        config,
        kind,
    })
}
