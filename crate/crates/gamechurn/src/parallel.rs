//! Rayon drivers for the per-account and per-tree work in the core crate.
//! Results are collected in input order, so output is independent of the
//! thread count.

use gamechurn_core::event::EventCatalog;
use gamechurn_core::features::{account_features, finish_matrix, Family, FeatureMatrix, Quantile, QuantileTransform};
use gamechurn_core::labeling::WindowLayout;
use gamechurn_core::models::{fit_tree, ExtraTreesModel, Model, Target, TrainConfig};
use gamechurn_core::synth::{assemble, churner_flags, generate_player, Dataset, GenConfig};
use gamechurn_core::timeline::{group_by_account, PlayerTimeline};
use gamechurn_core::{Event, WeekGrid};
use rayon::prelude::*;
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Runs `f` on a pool capped at `threads` workers, or rayon's default.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::config("threads must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::config(format!("cannot build thread pool: {e}"))),
    }
}

pub fn generate(cfg: &GenConfig) -> Result<Dataset> {
    let layout = cfg.layout()?;
    let flags = churner_flags(cfg);
    let players = flags.par_iter().enumerate().map(|(i, &c)| generate_player(cfg, &layout, i, c)).collect();
    Ok(assemble(layout, players))
}

pub fn build_timelines(events: Vec<Event>, grid: WeekGrid, gap_minutes: u32) -> Vec<PlayerTimeline> {
    group_by_account(events)
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(account, evs)| PlayerTimeline::new(account, evs, grid, gap_minutes))
        .collect()
}

pub fn build_matrix(
    timelines: &[PlayerTimeline],
    layout: &WindowLayout,
    catalog: &EventCatalog,
    families: &BTreeSet<Family>,
    quantile: Quantile<'_>,
) -> Result<(FeatureMatrix, Option<QuantileTransform>)> {
    if timelines.is_empty() {
        return Err(gamechurn_core::Error::Cardinality("feature cohort is empty".into()).into());
    }
    let rows = timelines
        .par_iter()
        .map(|t| (t.account_id().to_string(), account_features(t, layout, catalog, families)))
        .collect();
    Ok(finish_matrix(rows, quantile)?)
}

pub fn fit_extra_trees(x: &FeatureMatrix, target: Target<'_>, cfg: &TrainConfig) -> Result<ExtraTreesModel> {
    let task = match target {
        Target::Binary(_) => gamechurn_core::models::TreeTask::Classification,
        Target::Real(_) => gamechurn_core::models::TreeTask::Regression,
    };
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| fit_tree(x, target, cfg, t))
        .collect::<Result<Vec<_>, gamechurn_core::Error>>()?;
    Ok(ExtraTreesModel::from_trees(x, task, cfg, trees))
}

pub fn predict(model: &Model, x: &FeatureMatrix) -> Result<Vec<f64>> {
    model.check_schema(x)?;
    Ok(x.rows().par_iter().map(|r| model.predict_row(r)).collect())
}
