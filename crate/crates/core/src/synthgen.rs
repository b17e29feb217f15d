//! Seeded synthetic production line.
//!
//! Each record samples a scanning speed and a laser intensity; their ratio,
//! relative to the ratio at the window centres, is the light dosage that
//! decides the quality class. A fixed tenth of each stage passes through
//! untouched (intensity 0) and is labeled Original. Damaged records sit on
//! the far side of a "defect" channel, offset by `margin` times the larger
//! of the normal-class geometry diameter and the noise sigma, so they are
//! well separated from every other class by construction.
//!
//! With the default windows the dosage stays inside `[0.5, 2.05]`, below
//! `t_high`, so Damaged records only appear through [`inject_anomaly`].

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{records_to_cloud, Source, StageRecord};
use crate::types::{PointCloud, QualityClass};

/// Dosage of injected anomalies, as a multiple of `t_high`.
const INJECTED_DOSAGE: f64 = 1.2;
/// Relative jitter of the injected dosage.
const INJECTED_JITTER: f64 = 0.02;
const PASS_THROUGH_FRAC: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    pub n_stages: usize,
    pub records_per_stage: usize,
    /// Scanning speed window, mm/s.
    pub speed_range: [f64; 2],
    /// Laser intensity window, mW.
    pub intensity_range: [f64; 2],
    pub t_low: f64,
    pub t_high: f64,
    /// Damaged offset in multiples of the within-class spread; at least 3.
    pub margin: f64,
    pub noise_sigma: f64,
    /// Pure-noise feature channels after the four dosage features; the
    /// first one carries the Damaged offset.
    pub noise_channels: usize,
    /// Intensity window shift at the last stage, as a fraction of its width;
    /// intermediate stages shift linearly.
    pub stage_shift: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_stages: 8,
            records_per_stage: 200,
            speed_range: [60.0, 120.0],
            intensity_range: [10.0, 20.0],
            t_low: 0.9,
            t_high: 2.2,
            margin: 3.0,
            noise_sigma: 0.05,
            noise_channels: 2,
            stage_shift: 0.05,
            seed: 7,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadConfig(m.into()));
        if self.n_stages < 2 {
            return bad("n_stages must be at least 2");
        }
        if self.records_per_stage == 0 {
            return bad("records_per_stage must be at least 1");
        }
        for (name, [lo, hi]) in [("speed_range", self.speed_range), ("intensity_range", self.intensity_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
                return bad(&format!("{name} must satisfy 0 < lo < hi"));
            }
        }
        if !(self.t_low > 0.0 && self.t_low < self.t_high && self.t_high.is_finite()) {
            return bad("thresholds must satisfy 0 < t_low < t_high");
        }
        if !(self.margin >= 3.0 && self.margin.is_finite()) {
            return bad("margin must be at least 3");
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be positive");
        }
        if self.noise_channels == 0 {
            return bad("noise_channels must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.stage_shift) {
            return bad("stage_shift must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        4 + self.noise_channels
    }

    /// Intensity over speed at the window centres; dosage is measured relative to it.
    pub fn reference_ratio(&self) -> f64 {
        mid(self.intensity_range) / mid(self.speed_range)
    }

    pub fn dosage(&self, speed: f64, intensity: f64) -> f64 {
        intensity / speed / self.reference_ratio()
    }

    /// Label rule for non-pass-through records.
    pub fn classify(&self, dosage: f64) -> QualityClass {
        if dosage < self.t_low {
            QualityClass::Uncured
        } else if dosage <= self.t_high {
            QualityClass::Cured
        } else {
            QualityClass::Damaged
        }
    }

    /// Offset applied to the defect channel of Damaged records.
    pub fn damaged_offset(&self) -> f64 {
        // noise-free features of other classes lie in [-1,1]^2 x [0,1]^2 x {0}
        self.margin * 10f64.sqrt().max(self.noise_sigma)
    }

    fn intensity_window(&self, stage: usize) -> [f64; 2] {
        let [lo, hi] = self.intensity_range;
        let shift = self.stage_shift * (hi - lo) * (stage - 1) as f64 / (self.n_stages - 1) as f64;
        [lo + shift, hi + shift]
    }

    /// Noise-free feature vector.
    fn clean_features(&self, t: &RecordTruth) -> Vec<f64> {
        let [s_lo, s_hi] = self.speed_range;
        let [i_lo, i_hi] = self.intensity_range;
        let speed_n = (t.speed - mid(self.speed_range)) / ((s_hi - s_lo) / 2.0);
        let intensity_n = if t.pass_through {
            -1.0
        } else {
            (t.intensity - mid(self.intensity_range)) / ((i_hi - i_lo) / 2.0)
        };
        let r = t.dosage / self.t_high;
        let mut f = vec![speed_n, intensity_n, r, r * r];
        f.resize(self.dim(), 0.0);
        if t.label == QualityClass::Damaged {
            f[4] = self.damaged_offset();
        }
        f
    }
}

fn mid([lo, hi]: [f64; 2]) -> f64 {
    (lo + hi) / 2.0
}

/// Generating parameters of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordTruth {
    pub id: u64,
    pub stage: usize,
    pub speed: f64,
    pub intensity: f64,
    pub dosage: f64,
    pub pass_through: bool,
    pub injected: bool,
    pub label: QualityClass,
}

/// Ground truth exported for oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: GeneratorConfig,
    pub reference_ratio: f64,
    pub damaged_offset: f64,
    /// Mean noise-free feature vector per class present.
    pub class_centers: BTreeMap<QualityClass, Vec<f64>>,
    /// Root-mean-square distance of each class's features from its center.
    pub class_spreads: BTreeMap<QualityClass, f64>,
    pub injected: Vec<u64>,
    pub records: Vec<RecordTruth>,
}

impl GroundTruth {
    pub fn label_of(&self, id: u64) -> Option<&QualityClass> {
        self.records.iter().find(|r| r.id == id).map(|r| &r.label)
    }

    /// Smallest distance between the Damaged center and any other center.
    pub fn damaged_separation(&self) -> Option<f64> {
        let damaged = self.class_centers.get(&QualityClass::Damaged)?;
        self.class_centers
            .iter()
            .filter(|(c, _)| **c != QualityClass::Damaged)
            .map(|(_, v)| euclid(v, damaged))
            .min_by(f64::total_cmp)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ground truth serializes");
        s.push('\n');
        s
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageDataset {
    /// Grouped by stage, ascending.
    pub records: Vec<StageRecord>,
    pub truth: GroundTruth,
}

impl StageDataset {
    pub fn stage(&self, stage: usize) -> Vec<StageRecord> {
        self.records.iter().filter(|r| r.stage == stage).cloned().collect()
    }

    /// A stage as a labeled point cloud, for the CSV export.
    pub fn stage_cloud(&self, stage: usize) -> Result<PointCloud> {
        let refs: Vec<&StageRecord> = self.records.iter().filter(|r| r.stage == stage).collect();
        records_to_cloud(&refs, true)
    }

    fn next_id(&self) -> u64 {
        self.records.iter().map(|r| r.id + 1).max().unwrap_or(0)
    }

    fn refresh_geometry(&mut self) {
        let cfg = &self.truth.config;
        let mut by_class: BTreeMap<QualityClass, (Vec<Vec<f64>>, Vec<Vec<f64>>)> = BTreeMap::new();
        for (t, r) in self.truth.records.iter().zip(&self.records) {
            let entry = by_class.entry(t.label.clone()).or_default();
            entry.0.push(cfg.clean_features(t));
            entry.1.push(r.features.clone());
        }
        self.truth.class_centers.clear();
        self.truth.class_spreads.clear();
        for (class, (clean, noisy)) in by_class {
            let n = clean.len() as f64;
            let mut center = vec![0.0; cfg.dim()];
            for f in &clean {
                for (c, v) in center.iter_mut().zip(f) {
                    *c += v / n;
                }
            }
            let spread = (noisy.iter().map(|f| euclid(f, &center).powi(2)).sum::<f64>() / n).sqrt();
            self.truth.class_centers.insert(class.clone(), center);
            self.truth.class_spreads.insert(class, spread);
        }
    }
}

fn make_record(cfg: &GeneratorConfig, truth: &RecordTruth, rng: &mut ChaCha8Rng) -> StageRecord {
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
    let mut features = cfg.clean_features(truth);
    for (k, f) in features.iter_mut().enumerate() {
        let e = noise.sample(rng);
        // folded on the defect channel so Damaged never drifts back toward the others
        *f += if k == 4 && truth.label == QualityClass::Damaged { e.abs() } else { e };
    }
    StageRecord {
        id: truth.id,
        stage: truth.stage,
        source: Source::ALL[(truth.id % 5) as usize],
        features,
        true_label: Some(truth.label.clone()),
        timestamp: truth.id,
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<StageDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::new();
    let mut truths = Vec::new();
    let n = config.records_per_stage;
    let n_pass = (n as f64 * PASS_THROUGH_FRAC).round() as usize;
    for stage in 1..=config.n_stages {
        let pass: Vec<usize> = sample(&mut rng, n, n_pass).into_vec();
        let [i_lo, i_hi] = config.intensity_window(stage);
        for j in 0..n {
            let id = records.len() as u64;
            let speed = rng.gen_range(config.speed_range[0]..=config.speed_range[1]);
            let sampled = rng.gen_range(i_lo..=i_hi);
            let pass_through = pass.contains(&j);
            let intensity = if pass_through { 0.0 } else { sampled };
            let dosage = config.dosage(speed, intensity);
            let label = if pass_through {
                QualityClass::Original
            } else {
                config.classify(dosage)
            };
            let truth = RecordTruth {
                id,
                stage,
                speed,
                intensity,
                dosage,
                pass_through,
                injected: false,
                label,
            };
            records.push(make_record(config, &truth, &mut rng));
            truths.push(truth);
        }
    }
    let mut ds = StageDataset {
        records,
        truth: GroundTruth {
            config: config.clone(),
            reference_ratio: config.reference_ratio(),
            damaged_offset: config.damaged_offset(),
            class_centers: BTreeMap::new(),
            class_spreads: BTreeMap::new(),
            injected: Vec::new(),
            records: truths,
        },
    };
    ds.refresh_geometry();
    Ok(ds)
}

/// Appends `count` Damaged records to `stage`: speed at the window centre,
/// dosage about 1.2 · `t_high`. Deterministic given the dataset.
pub fn inject_anomaly(ds: &StageDataset, stage: usize, count: usize) -> Result<StageDataset> {
    let cfg = &ds.truth.config;
    if stage == 0 || stage > cfg.n_stages {
        return Err(Error::BadStage(stage));
    }
    if count == 0 {
        return Ok(ds.clone());
    }
    let first_id = ds.next_id();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ first_id.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let speed = mid(cfg.speed_range);
    let mut new_records = Vec::with_capacity(count);
    let mut new_truths = Vec::with_capacity(count);
    for j in 0..count as u64 {
        let jitter: f64 = Normal::new(0.0, INJECTED_JITTER).expect("constant").sample(&mut rng);
        let dosage = (INJECTED_DOSAGE * (1.0 + jitter)).max(1.0 + 1e-6) * cfg.t_high;
        let truth = RecordTruth {
            id: first_id + j,
            stage,
            speed,
            intensity: dosage * cfg.reference_ratio() * speed,
            dosage,
            pass_through: false,
            injected: true,
            label: QualityClass::Damaged,
        };
        new_records.push(make_record(cfg, &truth, &mut rng));
        new_truths.push(truth);
    }
    let mut out = ds.clone();
    let at = out.records.iter().rposition(|r| r.stage <= stage).map_or(0, |i| i + 1);
    out.records.splice(at..at, new_records);
    out.truth.records.splice(at..at, new_truths);
    out.truth.injected.extend(first_id..first_id + count as u64);
    out.refresh_geometry();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            records_per_stage: 50,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn validation() {
        assert!(GeneratorConfig::default().validate().is_ok());
        for cfg in [
            GeneratorConfig { n_stages: 1, ..small() },
            GeneratorConfig { t_low: 3.0, ..small() },
            GeneratorConfig { margin: 2.5, ..small() },
            GeneratorConfig { noise_channels: 0, ..small() },
        ] {
            assert!(matches!(generate(&cfg), Err(Error::BadConfig(_))));
        }
    }

    #[test]
    fn low_dosage_is_uncured() {
        let cfg = small();
        assert_eq!(cfg.classify(cfg.t_low - 1e-9), QualityClass::Uncured);
        assert_eq!(cfg.classify(cfg.t_low), QualityClass::Cured);
        assert_eq!(cfg.classify(cfg.t_high + 1e-9), QualityClass::Damaged);
        let ds = generate(&cfg).unwrap();
        for t in ds.truth.records.iter().filter(|t| !t.pass_through) {
            assert_eq!(t.label, cfg.classify(t.dosage));
        }
    }

    #[test]
    fn same_seed_same_data() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.truth.to_json(), b.truth.to_json());
        let c = generate(&GeneratorConfig { seed: 8, ..small() }).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn shape() {
        let ds = generate(&small()).unwrap();
        assert_eq!(ds.records.len(), 8 * 50);
        for s in 1..=8 {
            let stage = ds.stage(s);
            assert_eq!(stage.len(), 50);
            let originals = stage
                .iter()
                .filter(|r| r.true_label == Some(QualityClass::Original))
                .count();
            assert_eq!(originals, 5);
        }
        assert!(ds.records.iter().all(|r| r.features.len() == 6));
        assert!(!ds.truth.class_centers.contains_key(&QualityClass::Damaged));
    }

    #[test]
    fn injection() {
        let ds = generate(&small()).unwrap();
        assert_eq!(inject_anomaly(&ds, 8, 0).unwrap(), ds);
        assert_eq!(inject_anomaly(&ds, 9, 1), Err(Error::BadStage(9)));
        let out = inject_anomaly(&ds, 8, 5).unwrap();
        assert_eq!(out.stage(8).len(), 55);
        assert_eq!(out.truth.injected.len(), 5);
        let cfg = &out.truth.config;
        let sep = out.truth.damaged_separation().unwrap();
        assert!(sep >= cfg.margin * cfg.noise_sigma);
        for id in &out.truth.injected {
            let r = out.records.iter().find(|r| r.id == *id).unwrap();
            for (class, center) in &out.truth.class_centers {
                if *class != QualityClass::Damaged {
                    assert!(euclid(&r.features, center) >= cfg.margin * cfg.noise_sigma);
                }
            }
        }
        // injecting into an earlier stage keeps records grouped by stage
        let mid = inject_anomaly(&ds, 3, 2).unwrap();
        assert!(mid.records.windows(2).all(|w| w[0].stage <= w[1].stage));
    }
}
