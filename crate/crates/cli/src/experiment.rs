use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use btlab_core::geometry::Scope;
use btlab_core::{closeness, Error};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    ball_graph, ball_stats, certificates, geometry_summary, germ_summary, BallStats, Certificates, Deadline,
    GeometrySummary, GermSummary,
};
use crate::cache::{BallCache, BALL_VERSION};
use crate::config::ExperimentConfig;

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub field: String,
    pub r: u32,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<BallStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Certificates>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub germs: Option<GermSummary>,
    /// First failure, if any; later stages are then skipped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<CellError>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellError {
    pub stage: &'static str,
    pub budget: bool,
    pub message: String,
}

fn cell_error(stage: &'static str, e: &anyhow::Error) -> CellError {
    CellError {
        stage,
        budget: e.downcast_ref::<Error>().is_some_and(Error::is_budget),
        message: e.to_string(),
    }
}

fn run_cell(cfg: &ExperimentConfig, field: usize, r: u32, cache: Option<&BallCache>) -> CellReport {
    let named = &cfg.fields[field];
    let mut cell = CellReport {
        field: named.name.clone(),
        r,
        d: cfg.d,
        stats: None,
        certificates: None,
        geometry: None,
        germs: None,
        error: None,
    };
    let deadline = Deadline::after(cfg.time_limit_secs);
    let budget = &cfg.budget;
    let g = match ball_graph(&named.descriptor, r, cfg.d, budget, cache) {
        Ok(g) => g,
        Err(e) => {
            cell.error = Some(cell_error("ball", &e));
            return cell;
        }
    };
    cell.stats = Some(ball_stats(&g));

    macro_rules! stage {
        ($name:literal, $slot:expr, $body:expr) => {
            match deadline.check().map_err(anyhow::Error::from).and_then(|_| $body.map_err(anyhow::Error::from)) {
                Ok(v) => $slot = v,
                Err(e) => {
                    cell.error = Some(cell_error($name, &e));
                    return cell;
                }
            }
        };
    }
    let seed = cfg.seed ^ (field as u64) << 32 ^ r as u64;
    stage!("certificates", cell.certificates, certificates(&g, budget, seed, cfg.shuffles).map(Some));
    stage!("geometry", cell.geometry, geometry_summary(&g, cfg.d, Scope::Interior));
    if cfg.d >= 3 {
        stage!("germs", cell.germs, germ_summary(&g, cfg.d, budget, cfg.certificate_k).map(Some));
    }
    cell
}

fn closeness_matrix(cfg: &ExperimentConfig) -> Vec<Vec<Value>> {
    let n = cfg.fields.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let values: Vec<Value> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&cfg.fields[i].descriptor, &cfg.fields[j].descriptor);
            if a == b {
                return json!("inf");
            }
            match closeness(a, b, cfg.r_max, &cfg.budget) {
                Ok(v) => json!(v),
                Err(e) => json!({ "error": e.to_string(), "budget": e.is_budget() }),
            }
        })
        .collect();
    values.chunks(n).map(<[Value]>::to_vec).collect()
}

fn comparisons(cfg: &ExperimentConfig, cells: &[CellReport], matrix: &[Vec<Value>]) -> Vec<Value> {
    let find = |f: usize, r: u32| {
        cells
            .iter()
            .find(|c| c.field == cfg.fields[f].name && c.r == r)
            .and_then(|c| c.certificates.as_ref())
    };
    let mut out = Vec::new();
    for i in 0..cfg.fields.len() {
        for j in i + 1..cfg.fields.len() {
            for r in cfg.r_min..=cfg.r_max {
                let rings_agree = match &matrix[i][j] {
                    Value::String(_) => Some(true),
                    Value::Number(n) => n.as_u64().map(|c| c >= r as u64),
                    _ => None,
                };
                let (a, b) = (find(i, r), find(j, r));
                out.push(json!({
                    "fields": [cfg.fields[i].name, cfg.fields[j].name],
                    "R": r,
                    "rings_isomorphic": rings_agree,
                    "balls_isomorphic": a.zip(b).map(|(a, b)| a.color_blind == b.color_blind),
                    "centered_isomorphic": a.zip(b).and_then(|(a, b)| Some(a.centered.as_ref()? == b.centered.as_ref()?)),
                }));
            }
        }
    }
    out
}

/// Runs every cell and writes `report.json` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(PathBuf, Value)> {
    cfg.validate()?;
    let cache = cfg.cache.then(|| BallCache::new(cfg.cache_path()));
    let jobs: Vec<(usize, u32)> = (0..cfg.fields.len())
        .flat_map(|f| (cfg.r_min..=cfg.r_max).map(move |r| (f, r)))
        .collect();
    let cells: Vec<CellReport> = jobs
        .par_iter()
        .map(|&(f, r)| run_cell(cfg, f, r, cache.as_ref()))
        .collect();
    let matrix = closeness_matrix(cfg);
    let comparisons = comparisons(cfg, &cells, &matrix);
    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "ball_version": BALL_VERSION,
        "config": cfg,
        "closeness": {
            "fields": cfg.fields.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
            "r_max": cfg.r_max,
            "matrix": matrix,
        },
        "cells": cells,
        "comparisons": comparisons,
    });
    let path = cfg.output_path().join("report.json");
    let tmp = cfg.output_path().join(".report.json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(&report)? + "\n")?;
    fs::rename(&tmp, &path)?;
    Ok((path, report))
}
