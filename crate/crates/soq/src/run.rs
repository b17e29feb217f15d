//! File-producing commands and the headless stage loop.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use soq_core::csv_io::{parse_point_cloud_csv, write_point_cloud_csv};
use soq_core::mapper::{graph_to_dot, graph_to_json, mapper_graph, MapperParams};
use soq_core::persistence::{diagram_to_json, rips_persistence};
use soq_core::pipeline::{SoQReport, SoQState, Source, StageRecord};
use soq_core::representative::NoveltyReport;
use soq_core::synthgen::{generate, inject_anomaly, GroundTruth, StageDataset};
use soq_core::types::{distance_matrix, Metric, PointCloud, QualityClass};

use crate::config::RunConfig;
use crate::error::{Result, SoqError};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| SoqError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    let fail = |source| SoqError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(fail)?;
    }
    std::fs::write(path, text).map_err(fail)?;
    Ok(path.to_path_buf())
}

pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    Ok(parse_point_cloud_csv(&read_text(path)?)?)
}

/// The configured generator output, with the anomaly injection applied.
pub fn generated_dataset(cfg: &RunConfig) -> Result<StageDataset> {
    let gen = cfg.generator_config();
    let ds = generate(&gen)?;
    match &cfg.anomaly {
        Some(a) => Ok(inject_anomaly(&ds, a.stage.unwrap_or(gen.n_stages), a.count)?),
        None => Ok(ds),
    }
}

/// Stage records plus whatever ground truth came with them.
#[derive(Debug, Clone)]
pub struct LoadedStages {
    pub n_stages: usize,
    pub records: Vec<StageRecord>,
    pub truth: Option<GroundTruth>,
}

impl LoadedStages {
    pub fn stage(&self, stage: usize) -> Vec<StageRecord> {
        self.records.iter().filter(|r| r.stage == stage).cloned().collect()
    }
}

pub fn load_stages(cfg: &RunConfig) -> Result<LoadedStages> {
    let Some(input) = &cfg.input else {
        let ds = generated_dataset(cfg)?;
        return Ok(LoadedStages {
            n_stages: ds.truth.config.n_stages,
            records: ds.records,
            truth: Some(ds.truth),
        });
    };
    let mut records = Vec::new();
    for (i, path) in input.stages.iter().enumerate() {
        let cloud = read_cloud(path).map_err(|e| match e {
            SoqError::Core(source) => SoqError::Staged { stage: i + 1, source },
            other => other,
        })?;
        for row in 0..cloud.len() {
            let id = cloud.ids()[row];
            records.push(StageRecord {
                id,
                stage: i + 1,
                source: Source::ALL[(id % 5) as usize],
                features: cloud.point(row).to_vec(),
                true_label: cloud.label(row).cloned(),
                timestamp: records.len() as u64,
            });
        }
    }
    Ok(LoadedStages {
        n_stages: input.stages.len(),
        records,
        truth: None,
    })
}

/// Writes `stage_XX.csv` per stage and `ground_truth.json`.
pub fn gen(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let ds = generated_dataset(cfg)?;
    let mut written = Vec::new();
    for stage in 1..=ds.truth.config.n_stages {
        let cloud = ds.stage_cloud(stage)?;
        written.push(write_text(
            &out.join(format!("stage_{stage:02}.csv")),
            &write_point_cloud_csv(&cloud),
        )?);
    }
    written.push(write_text(&out.join("ground_truth.json"), &ds.truth.to_json())?);
    Ok(written)
}

/// Writes `graph.json` and `graph.dot` for one point-cloud CSV.
pub fn mapper(input: &Path, params: &MapperParams, out: &Path) -> Result<Vec<PathBuf>> {
    let cloud = read_cloud(input)?;
    let g = mapper_graph(&cloud, params)?;
    Ok(vec![
        write_text(&out.join("graph.json"), &graph_to_json(&g))?,
        write_text(&out.join("graph.dot"), &graph_to_dot(&g))?,
    ])
}

/// Writes the Rips diagram of one point-cloud CSV to `diagram.json`.
pub fn persist(input: &Path, metric: Metric, max_scale: f64, max_dim: usize, out: &Path) -> Result<PathBuf> {
    let cloud = read_cloud(input)?;
    let d = rips_persistence(&distance_matrix(&cloud, metric)?, max_scale, max_dim)?;
    write_text(&out.join("diagram.json"), &diagram_to_json(&d))
}

/// Most common ground-truth label among `members`; ties go to the earlier class.
fn majority_label(members: &[u64], label_of: &BTreeMap<u64, QualityClass>) -> Option<QualityClass> {
    let mut votes: BTreeMap<&QualityClass, usize> = BTreeMap::new();
    for id in members {
        if let Some(l) = label_of.get(id) {
            *votes.entry(l).or_default() += 1;
        }
    }
    votes
        .into_iter()
        .fold(None, |best: Option<(&QualityClass, usize)>, (c, n)| match best {
            Some((_, bn)) if bn >= n => best,
            _ => Some((c, n)),
        })
        .map(|(c, _)| c.clone())
}

pub struct RunOutcome {
    pub state: SoQState,
    /// Novelty report of the final stage as screened, before any adoption.
    pub novelty: NoveltyReport,
    pub report: SoQReport,
}

/// Stages `1..S-1` are predicted (from stage 2 on), ingested and analyzed in
/// turn. The last stage is predicted and screened for novelty; with
/// `oracle_labels` every candidate is adopted under its majority
/// ground-truth label. Then the last stage is ingested and analyzed.
pub fn run_pipeline(data: &LoadedStages, cfg: &RunConfig, oracle_labels: bool) -> Result<RunOutcome> {
    let mut state = SoQState::new(cfg.pipeline.clone())?;
    let params = cfg.pipeline.mapper;
    let last = data.n_stages;
    for stage in 1..last {
        let batch = data.stage(stage);
        if stage > 1 {
            state.predict_and_log(&batch).map_err(SoqError::staged(stage))?;
        }
        state.ingest_stage(stage, &batch).map_err(SoqError::staged(stage))?;
        state.analyze_stage(stage, &params).map_err(SoqError::staged(stage))?;
    }
    let batch = data.stage(last);
    let report = state
        .run_final_stage(&batch, cfg.pipeline.min_cluster)
        .map_err(SoqError::staged(last))?;
    if oracle_labels {
        let label_of: BTreeMap<u64, QualityClass> = data
            .records
            .iter()
            .filter_map(|r| r.true_label.clone().map(|l| (r.id, l)))
            .collect();
        for candidate in &report.candidates {
            let label = majority_label(&candidate.members, &label_of).ok_or_else(|| {
                SoqError::MissingGroundTruth(format!("candidate {} has no labeled members", candidate.id))
            })?;
            state
                .apply_label_update(candidate.id, label)
                .map_err(SoqError::staged(last))?;
        }
    }
    let novelty = report;
    state.ingest_stage(last, &batch).map_err(SoqError::staged(last))?;
    state.analyze_stage(last, &params).map_err(SoqError::staged(last))?;
    let report = state.soq_report()?;
    Ok(RunOutcome { state, novelty, report })
}

/// Runs the configured pipeline and writes `report.json` and `novelty.json`.
pub fn run(cfg: &RunConfig, oracle_labels: bool, out: &Path) -> Result<(RunOutcome, Vec<PathBuf>)> {
    let data = load_stages(cfg)?;
    let outcome = run_pipeline(&data, cfg, oracle_labels)?;
    let mut novelty = serde_json::to_string_pretty(&outcome.novelty).expect("novelty serializes");
    novelty.push('\n');
    let written = vec![
        write_text(&out.join("report.json"), &outcome.report.to_json())?,
        write_text(&out.join("novelty.json"), &novelty)?,
    ];
    Ok((outcome, written))
}
