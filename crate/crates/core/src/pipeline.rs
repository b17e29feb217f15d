//! The stream-of-quality loop: stages arrive one after another, each is
//! analyzed cumulatively (Mapper graph, cluster-quality metrics, fresh
//! representatives), arriving records are predicted before they are learned
//! from, and the final stage can surface novelty candidates for an operator
//! to label.
//!
//! [`SoQState`] is owned by a single writer. Every mutating method validates
//! its input first and leaves the state untouched on error.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::{mapper_graph, MapperGraph, MapperParams};
use crate::persistence::{bottleneck_distance, rips_persistence, PersistenceDiagram};
use crate::representative::{
    adopt_candidate, calibrate_tau_held_out, detect_novel, select_representatives, NoveltyReport, RepresentativeSet,
};
use crate::types::{points_distance_matrix, PointCloud, QualityClass, DEFAULT_MAX_POINTS};

/// Where a record came from on the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Man,
    Machine,
    Material,
    Method,
    Environment,
}

impl Source {
    pub const ALL: [Source; 5] = [
        Source::Man,
        Source::Machine,
        Source::Material,
        Source::Method,
        Source::Environment,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageRecord {
    pub id: u64,
    pub stage: usize,
    pub source: Source,
    pub features: Vec<f64>,
    #[serde(default)]
    pub true_label: Option<QualityClass>,
    /// Monotonic arrival count, not a wall-clock time.
    pub timestamp: u64,
}

/// Records as a point cloud, sorted by id. Labels are attached only when
/// `with_labels` is set and every record has one.
pub fn records_to_cloud(records: &[&StageRecord], with_labels: bool) -> Result<PointCloud> {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| r.id);
    let labels = if with_labels {
        sorted.iter().map(|r| r.true_label.clone()).collect::<Option<Vec<_>>>()
    } else {
        None
    };
    PointCloud::new(
        sorted.iter().map(|r| r.features.clone()).collect(),
        sorted.iter().map(|r| r.id).collect(),
        labels,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub mapper: MapperParams,
    /// Neighbours consulted by [`SoQState::predict`].
    pub k: usize,
    pub tau_quantile: f64,
    pub min_cluster: usize,
    pub budget: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mapper: MapperParams::default(),
            k: 3,
            tau_quantile: 0.95,
            min_cluster: 3,
            budget: 40,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::BadK);
        }
        if !(self.tau_quantile > 0.0 && self.tau_quantile < 1.0) {
            return Err(Error::BadQuantile(self.tau_quantile));
        }
        if self.budget == 0 {
            return Err(Error::BadConfig("budget must be at least 1".into()));
        }
        if self.mapper.n_intervals == 0 {
            return Err(Error::BadIntervals);
        }
        if !(0.0..=0.9).contains(&self.mapper.overlap_frac) {
            return Err(Error::BadOverlap(self.mapper.overlap_frac));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterQualityMetrics {
    pub stage: usize,
    pub n_records: usize,
    /// `Σ size · max fraction / Σ size`; `None` for unlabeled data.
    pub weighted_purity: Option<f64>,
    /// Mean node class entropy in nats; `None` for unlabeled data.
    pub mean_node_entropy: Option<f64>,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_components: usize,
    /// H0 bottleneck distance between this and the previous stage's
    /// representative diagrams; 0 at stage 1.
    pub drift_score: f64,
    pub n_reps: usize,
    pub tau: Option<f64>,
}

/// Purity and entropy of a labeled graph; `None` when nodes carry no labels.
pub fn purity_and_entropy(graph: &MapperGraph) -> Option<(f64, f64)> {
    if graph.nodes.is_empty() || graph.nodes.iter().any(|n| n.proportions.is_empty()) {
        return None;
    }
    let total = graph.total_size() as f64;
    let purity = graph
        .nodes
        .iter()
        .map(|n| n.size as f64 * n.majority().map_or(0.0, |(_, f)| f))
        .sum::<f64>()
        / total;
    let entropy = graph.nodes.iter().map(|n| n.entropy()).sum::<f64>() / graph.nodes.len() as f64;
    Some((purity, entropy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageAnalysis {
    pub stage: usize,
    pub graph: MapperGraph,
    pub metrics: ClusterQualityMetrics,
    /// Rips diagram (dims 0 and 1) of the representatives chosen at this stage.
    pub diagram: PersistenceDiagram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: QualityClass,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub record_id: u64,
    pub stage: usize,
    pub predicted: QualityClass,
    pub confidence: f64,
    pub true_label: Option<QualityClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateEvent {
    pub candidate: usize,
    pub label: QualityClass,
    pub stage: usize,
    pub members: usize,
    pub reps_added: usize,
    /// Filled in by the service layer only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionQuality {
    /// `correct / scored`; `None` when nothing has been scored.
    pub accuracy: Option<f64>,
    pub scored: usize,
    pub correct: usize,
    pub logged: usize,
    /// truth → predicted → count, scored entries only.
    pub confusion: BTreeMap<QualityClass, BTreeMap<QualityClass, usize>>,
    pub predicted_counts: BTreeMap<QualityClass, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoQReport {
    pub final_cluster_quality: ClusterQualityMetrics,
    pub final_prediction_quality: PredictionQuality,
    pub trajectory: Vec<ClusterQualityMetrics>,
    pub update_events: Vec<UpdateEvent>,
    pub n_reps: usize,
    pub tau: Option<f64>,
}

impl SoQReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SoQState {
    config: PipelineConfig,
    records: Vec<StageRecord>,
    ids: HashSet<u64>,
    dim: Option<usize>,
    last_stage: usize,
    history: Vec<StageAnalysis>,
    reps: RepresentativeSet,
    log: Vec<PredictionEntry>,
    pending: Option<NoveltyReport>,
    events: Vec<UpdateEvent>,
}

impl SoQState {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            ..Self::default()
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn records(&self) -> &[StageRecord] {
        &self.records
    }

    pub fn last_stage(&self) -> usize {
        self.last_stage
    }

    pub fn history(&self) -> &[StageAnalysis] {
        &self.history
    }

    pub fn analysis(&self, stage: usize) -> Option<&StageAnalysis> {
        stage.checked_sub(1).and_then(|i| self.history.get(i))
    }

    pub fn reps(&self) -> &RepresentativeSet {
        &self.reps
    }

    pub fn log(&self) -> &[PredictionEntry] {
        &self.log
    }

    pub fn pending(&self) -> Option<&NoveltyReport> {
        self.pending.as_ref()
    }

    pub fn events(&self) -> &[UpdateEvent] {
        &self.events
    }

    /// Appends `batch` to `stage`, which must be the open stage or the next one.
    pub fn ingest_stage(&mut self, stage: usize, batch: &[StageRecord]) -> Result<()> {
        if stage == 0 {
            return Err(Error::BadStage(stage));
        }
        if stage > self.last_stage + 1 {
            return Err(Error::StageGap {
                expected: self.last_stage + 1,
                got: stage,
            });
        }
        if stage < self.last_stage {
            return Err(Error::StageAlreadyAnalyzed(stage));
        }
        let mut dim = self.dim;
        let mut seen = HashSet::new();
        for r in batch {
            if r.stage != stage {
                return Err(Error::BadStage(r.stage));
            }
            let expected = *dim.get_or_insert(r.features.len());
            if r.features.len() != expected || expected == 0 {
                return Err(Error::DimensionMismatch {
                    expected: expected.max(1),
                    found: r.features.len(),
                });
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { id: r.id });
            }
            if self.ids.contains(&r.id) || !seen.insert(r.id) {
                return Err(Error::DuplicateId(r.id));
            }
        }
        self.dim = dim;
        self.ids.extend(seen);
        self.records.extend_from_slice(batch);
        self.last_stage = stage;
        Ok(())
    }

    /// Builds the cumulative Mapper graph for stages `1..=stage`, its metrics,
    /// fresh representatives and their Rips diagram. Re-analyzing the latest
    /// stage replaces its entry.
    pub fn analyze_stage(&mut self, stage: usize, params: &MapperParams) -> Result<&StageAnalysis> {
        if stage == 0 || stage > self.last_stage {
            return Err(Error::UnknownStage(stage));
        }
        if stage > self.history.len() + 1 {
            return Err(Error::UnanalyzedPredecessor(stage - 1));
        }
        if stage < self.history.len() {
            return Err(Error::StageAlreadyAnalyzed(stage));
        }
        let window: Vec<&StageRecord> = self.records.iter().filter(|r| r.stage <= stage).collect();
        let cloud = records_to_cloud(&window, true)?;
        let graph = mapper_graph(&cloud, params)?;
        let metric = params.metric;

        let reps = if cloud.labels().is_some() {
            let budget = self.config.budget.max(graph.nodes.len());
            let mut fresh = select_representatives(&graph, &cloud, metric, budget, stage)?;
            let taken: HashSet<u64> = fresh.reps.iter().map(|r| r.id).collect();
            fresh
                .reps
                .extend(self.reps.reps.iter().filter(|r| r.node.is_none() && !taken.contains(&r.id)).cloned());
            match calibrate_tau_held_out(&fresh, &cloud, metric, self.config.tau_quantile) {
                Ok(calibrated) => calibrated,
                Err(Error::DegenerateTau | Error::EmptyCalibration) => fresh,
                Err(e) => return Err(e),
            }
        } else {
            self.reps.clone()
        };

        let points: Vec<Vec<f64>> = reps.reps.iter().map(|r| r.vec.clone()).collect();
        let diagram = if points.is_empty() {
            PersistenceDiagram::default()
        } else {
            rips_persistence(&points_distance_matrix(&points, metric, DEFAULT_MAX_POINTS)?, f64::INFINITY, 1)?
        };
        let previous = stage.checked_sub(2).map(|i| &self.history[i].diagram);
        let drift_score = match previous {
            Some(prev) if !prev.pairs(0).is_empty() && !diagram.pairs(0).is_empty() => bottleneck_distance(prev, &diagram, 0)?,
            _ => 0.0,
        };
        let quality = purity_and_entropy(&graph);
        let metrics = ClusterQualityMetrics {
            stage,
            n_records: cloud.len(),
            weighted_purity: quality.map(|q| q.0),
            mean_node_entropy: quality.map(|q| q.1),
            n_nodes: graph.nodes.len(),
            n_edges: graph.edges.len(),
            n_components: graph.n_components(),
            drift_score,
            n_reps: reps.len(),
            tau: reps.tau,
        };

        self.history.truncate(stage - 1);
        self.history.push(StageAnalysis {
            stage,
            graph,
            metrics,
            diagram,
        });
        self.reps = reps;
        Ok(self.history.last().expect("just pushed"))
    }

    /// Majority label of the `k` nearest representatives. Confidence is the
    /// winning vote fraction; ties go to the earlier class.
    pub fn predict(&self, features: &[f64], k: usize) -> Result<Prediction> {
        if k == 0 {
            return Err(Error::BadK);
        }
        let Some(first) = self.reps.reps.first() else {
            return Err(Error::EmptyModel);
        };
        if first.vec.len() != features.len() {
            return Err(Error::DimensionMismatch {
                expected: first.vec.len(),
                found: features.len(),
            });
        }
        let nearest = self.reps.k_nearest(features, k, self.config.mapper.metric);
        let mut votes: BTreeMap<&QualityClass, usize> = BTreeMap::new();
        for (i, _) in &nearest {
            *votes.entry(&self.reps.reps[*i].label).or_default() += 1;
        }
        let (label, count) = votes
            .into_iter()
            .fold(None, |best: Option<(&QualityClass, usize)>, (c, n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((c, n)),
            })
            .expect("at least one vote");
        Ok(Prediction {
            label: label.clone(),
            confidence: count as f64 / nearest.len() as f64,
        })
    }

    pub fn score_and_log(&mut self, record: &StageRecord, prediction: &Prediction) {
        self.log.push(PredictionEntry {
            record_id: record.id,
            stage: record.stage,
            predicted: prediction.label.clone(),
            confidence: prediction.confidence,
            true_label: record.true_label.clone(),
        });
    }

    /// Predicts every record with the configured `k` and logs the outcome.
    pub fn predict_and_log(&mut self, batch: &[StageRecord]) -> Result<Vec<Prediction>> {
        let predictions = batch
            .iter()
            .map(|r| self.predict(&r.features, self.config.k))
            .collect::<Result<Vec<_>>>()?;
        for (r, p) in batch.iter().zip(&predictions) {
            self.score_and_log(r, p);
        }
        Ok(predictions)
    }

    /// Predicts and logs `batch`, then looks for novelty against the current
    /// representatives. The report replaces any pending one.
    pub fn run_final_stage(&mut self, batch: &[StageRecord], min_cluster: usize) -> Result<NoveltyReport> {
        let stage = batch.first().map_or(self.last_stage, |r| r.stage);
        let refs: Vec<&StageRecord> = batch.iter().collect();
        let cloud = records_to_cloud(&refs, false)?;
        let report = detect_novel(&cloud, &self.reps, self.config.mapper.metric, min_cluster, stage)?;
        self.predict_and_log(batch)?;
        self.pending = Some(report.clone());
        Ok(report)
    }

    /// Adopts a pending candidate under the operator's `label`.
    pub fn apply_label_update(&mut self, candidate: usize, label: QualityClass) -> Result<&UpdateEvent> {
        let report = self.pending.as_ref().ok_or(Error::NoPendingReport)?;
        let adopted = adopt_candidate(&self.reps, report, candidate, label.clone())?;
        let members = report.candidate(candidate).map_or(0, |c| c.members.len());
        let event = UpdateEvent {
            candidate,
            label,
            stage: report.stage,
            members,
            reps_added: adopted.len() - self.reps.len(),
            wall_time: None,
        };
        self.reps = adopted;
        if let Some(p) = self.pending.as_mut() {
            p.candidates.retain(|c| c.id != candidate);
        }
        self.events.push(event);
        Ok(self.events.last().expect("just pushed"))
    }

    pub fn prediction_quality(&self) -> PredictionQuality {
        let mut confusion: BTreeMap<QualityClass, BTreeMap<QualityClass, usize>> = BTreeMap::new();
        let mut predicted_counts: BTreeMap<QualityClass, usize> = BTreeMap::new();
        let (mut scored, mut correct) = (0, 0);
        for e in &self.log {
            *predicted_counts.entry(e.predicted.clone()).or_default() += 1;
            if let Some(truth) = &e.true_label {
                scored += 1;
                correct += usize::from(truth == &e.predicted);
                *confusion
                    .entry(truth.clone())
                    .or_default()
                    .entry(e.predicted.clone())
                    .or_default() += 1;
            }
        }
        PredictionQuality {
            accuracy: (scored > 0).then(|| correct as f64 / scored as f64),
            scored,
            correct,
            logged: self.log.len(),
            confusion,
            predicted_counts,
        }
    }

    pub fn soq_report(&self) -> Result<SoQReport> {
        let last = self.history.last().ok_or(Error::EmptyHistory)?;
        Ok(SoQReport {
            final_cluster_quality: last.metrics.clone(),
            final_prediction_quality: self.prediction_quality(),
            trajectory: self.history.iter().map(|h| h.metrics.clone()).collect(),
            update_events: self.events.clone(),
            n_reps: self.reps.len(),
            tau: self.reps.tau,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{ClusterMethod, Lens};
    use crate::representative::Representative;

    fn record(id: u64, stage: usize, features: Vec<f64>, label: Option<QualityClass>) -> StageRecord {
        StageRecord {
            id,
            stage,
            source: Source::ALL[id as usize % 5],
            features,
            true_label: label,
            timestamp: id,
        }
    }

    fn one_interval() -> MapperParams {
        MapperParams {
            lens: Lens::Coordinate { index: 0 },
            n_intervals: 1,
            cluster: ClusterMethod::FixedThreshold { eps: 100.0 },
            ..MapperParams::default()
        }
    }

    fn with_reps(reps: Vec<(Vec<f64>, QualityClass)>) -> SoQState {
        let mut s = SoQState::new(PipelineConfig::default()).unwrap();
        s.reps.reps = reps
            .into_iter()
            .enumerate()
            .map(|(i, (vec, label))| Representative {
                id: i as u64,
                vec,
                label,
                node: Some(0),
                stage: 1,
            })
            .collect();
        s
    }

    #[test]
    fn ingest_contract() {
        let mut s = SoQState::new(PipelineConfig::default()).unwrap();
        let batch: Vec<_> = (0..10).map(|i| record(i, 1, vec![i as f64], None)).collect();
        s.ingest_stage(1, &batch).unwrap();
        assert_eq!(s.records().len(), 10);
        let more: Vec<_> = (10..12).map(|i| record(i, 1, vec![0.0], None)).collect();
        s.ingest_stage(1, &more).unwrap();
        assert_eq!(s.records().len(), 12);
        assert_eq!(
            s.ingest_stage(3, &[record(20, 3, vec![0.0], None)]),
            Err(Error::StageGap { expected: 2, got: 3 })
        );
        assert_eq!(
            s.ingest_stage(2, &[record(20, 2, vec![0.0, 1.0], None)]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        );
        assert_eq!(s.ingest_stage(2, &[record(3, 2, vec![0.0], None)]), Err(Error::DuplicateId(3)));
        assert_eq!(s.records().len(), 12);
    }

    #[test]
    fn single_class_stage_is_pure() {
        let mut s = SoQState::new(PipelineConfig::default()).unwrap();
        let batch: Vec<_> = (0..30)
            .map(|i| record(i, 1, vec![i as f64 * 0.1, (i % 3) as f64], Some(QualityClass::Cured)))
            .collect();
        s.ingest_stage(1, &batch).unwrap();
        let m = s.analyze_stage(1, &MapperParams::default()).unwrap().metrics.clone();
        assert_eq!(m.weighted_purity, Some(1.0));
        assert_eq!(m.mean_node_entropy, Some(0.0));
        assert_eq!(m.drift_score, 0.0);
        assert!(m.tau.is_some());
        assert_eq!(s.analyze_stage(3, &MapperParams::default()).unwrap_err(), Error::UnknownStage(3));
    }

    #[test]
    fn uniform_four_class_node_has_quarter_purity() {
        let mut s = SoQState::new(PipelineConfig::default()).unwrap();
        let batch: Vec<_> = (0..40)
            .map(|i| record(i, 1, vec![(i / 4) as f64, 0.0], Some(QualityClass::BASE[i as usize % 4].clone())))
            .collect();
        s.ingest_stage(1, &batch).unwrap();
        let m = &s.analyze_stage(1, &one_interval()).unwrap().metrics;
        assert_eq!(m.n_nodes, 1);
        assert!((m.weighted_purity.unwrap() - 0.25).abs() < 1e-9);
        assert!((m.mean_node_entropy.unwrap() - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn stage_order_is_enforced() {
        let mut s = SoQState::new(PipelineConfig::default()).unwrap();
        let label = Some(QualityClass::Cured);
        s.ingest_stage(1, &[record(0, 1, vec![0.0], label.clone()), record(1, 1, vec![1.0], label.clone())])
            .unwrap();
        s.ingest_stage(2, &[record(2, 2, vec![2.0], label.clone())]).unwrap();
        assert_eq!(
            s.analyze_stage(2, &one_interval()).unwrap_err(),
            Error::UnanalyzedPredecessor(1)
        );
        s.analyze_stage(1, &one_interval()).unwrap();
        s.analyze_stage(2, &one_interval()).unwrap();
        assert_eq!(s.analyze_stage(1, &one_interval()).unwrap_err(), Error::StageAlreadyAnalyzed(1));
        s.analyze_stage(2, &one_interval()).unwrap();
        assert_eq!(s.history().len(), 2);
    }

    #[test]
    fn prediction_examples() {
        let c = QualityClass::Cured;
        let d = QualityClass::Damaged;
        let u = QualityClass::Uncured;
        let s = with_reps(vec![(vec![0.0], c.clone()), (vec![0.1], c.clone()), (vec![0.2], d.clone())]);
        assert_eq!(s.predict(&[0.0], 1).unwrap(), Prediction { label: c.clone(), confidence: 1.0 });
        let p = s.predict(&[0.0], 3).unwrap();
        assert_eq!(p.label, c);
        assert!((p.confidence - 2.0 / 3.0).abs() < 1e-12);
        let s = with_reps(vec![(vec![-1.0], d), (vec![1.0], u.clone())]);
        assert_eq!(s.predict(&[0.0], 2).unwrap().label, u);
        assert_eq!(s.predict(&[0.0], 0), Err(Error::BadK));
        let empty = SoQState::new(PipelineConfig::default()).unwrap();
        assert_eq!(empty.predict(&[0.0], 1), Err(Error::EmptyModel));
    }

    #[test]
    fn accuracy_bookkeeping() {
        let mut s = with_reps(vec![(vec![0.0], QualityClass::Cured)]);
        let p = Prediction {
            label: QualityClass::Cured,
            confidence: 1.0,
        };
        assert_eq!(s.prediction_quality().accuracy, None);
        for i in 0..100 {
            let truth = if i < 90 { QualityClass::Cured } else { QualityClass::Uncured };
            s.score_and_log(&record(i, 1, vec![0.0], Some(truth)), &p);
        }
        s.score_and_log(&record(100, 1, vec![0.0], None), &p);
        let q = s.prediction_quality();
        assert_eq!((q.scored, q.correct, q.logged), (100, 90, 101));
        assert_eq!(q.accuracy, Some(0.9));
        assert_eq!(q.confusion[&QualityClass::Uncured][&QualityClass::Cured], 10);
    }

    #[test]
    fn report_needs_history() {
        let s = SoQState::new(PipelineConfig::default()).unwrap();
        assert_eq!(s.soq_report(), Err(Error::EmptyHistory));
    }

    #[test]
    fn label_update_flow() {
        let mut s = SoQState::new(PipelineConfig::default()).unwrap();
        let batch: Vec<_> = (0..30)
            .map(|i| record(i, 1, vec![(i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1], Some(QualityClass::Cured)))
            .collect();
        s.ingest_stage(1, &batch).unwrap();
        s.analyze_stage(1, &MapperParams::default()).unwrap();
        assert_eq!(s.apply_label_update(0, QualityClass::Damaged).unwrap_err(), Error::NoPendingReport);

        let far: Vec<_> = (100..105)
            .map(|i| record(i, 2, vec![50.0 + (i - 100) as f64 * 0.01, 50.0], Some(QualityClass::Damaged)))
            .collect();
        let report = s.run_final_stage(&far, 3).unwrap();
        assert_eq!(report.candidates.len(), 1);
        assert_eq!(s.log().len(), 5);
        assert_eq!(s.apply_label_update(7, QualityClass::Damaged).unwrap_err(), Error::UnknownCandidate(7));

        let before = s.reps().len();
        let medoid = report.candidates[0].medoid.clone();
        s.apply_label_update(0, QualityClass::Damaged).unwrap();
        assert!(s.reps().len() > before);
        assert_eq!(
            s.predict(&medoid, 1).unwrap(),
            Prediction {
                label: QualityClass::Damaged,
                confidence: 1.0
            }
        );
        assert!(s.pending().unwrap().candidates.is_empty());
        assert_eq!(s.log().len(), 5);
        assert_eq!(s.soq_report().unwrap().update_events.len(), 1);
    }
}
