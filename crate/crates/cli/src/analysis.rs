//! Per-ball computations shared by the subcommands and the experiment runner.

use std::time::{Duration, Instant};

use btlab_core::building::build_ball;
use btlab_core::canon::{canonical_form, canonical_form_centered};
use btlab_core::geometry::{atilde_diagram, diagram_symmetries, verify_geometry, Scope};
use btlab_core::germs::{align_to_symmetry, is_single_orbit, propagate, short_cycle_certificate, GermAtlas, Propagation};
use btlab_core::graph::{LabeledGraph, ShapeStats};
use btlab_core::{Budget, Error, FieldDescriptor, ResidueRing, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::{ball_key, BallCache};

/// Builds the ball graph (or loads it from the cache) with its metadata set.
pub fn ball_graph(
    desc: &FieldDescriptor,
    r: u32,
    d: usize,
    budget: &Budget,
    cache: Option<&BallCache>,
) -> anyhow::Result<LabeledGraph> {
    let key = ball_key(desc, r, d);
    if let Some(g) = cache.and_then(|c| c.load(&key)) {
        return Ok(g);
    }
    let ring = ResidueRing::build(desc, r, budget)?;
    let mut g = build_ball(&ring, d, budget)?.graph;
    g.meta = Some(json!({ "descriptor": desc.to_json(), "R": r, "d": d }));
    if let Some(c) = cache {
        c.store(&key, &g)?;
    }
    Ok(g)
}

pub fn origin_of(g: &LabeledGraph) -> Option<usize> {
    g.dist.as_ref()?.iter().position(|&x| x == 0)
}

/// Radius recorded in the metadata, else the largest distance.
pub fn radius_of(g: &LabeledGraph) -> Option<u32> {
    g.meta
        .as_ref()
        .and_then(|m| m.get("R"))
        .and_then(Value::as_u64)
        .map(|r| r as u32)
        .or_else(|| g.dist.as_ref()?.iter().copied().max())
}

#[derive(Clone, Debug, Serialize)]
pub struct BallStats {
    pub vertices: usize,
    pub edges: usize,
    pub center_degree: Option<usize>,
    pub shape: ShapeStats,
}

pub fn ball_stats(g: &LabeledGraph) -> BallStats {
    BallStats {
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        center_degree: origin_of(g).map(|o| g.degree(o)),
        shape: g.shape_stats(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificates {
    pub color_blind: String,
    pub centered: Option<String>,
    /// Certificates of random relabellings all matched.
    pub relabel_checks: usize,
}

pub fn certificates(g: &LabeledGraph, budget: &Budget, seed: u64, shuffles: usize) -> Result<Certificates> {
    let mut plain = g.clone();
    plain.color = None;
    let base = canonical_form(&plain, false, budget)?;
    let centered = match plain.dist {
        Some(_) => Some(canonical_form_centered(&plain, budget)?.digest()),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shuffles {
        let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
        perm.shuffle(&mut rng);
        if canonical_form(&plain.relabel(&perm), false, budget)? != base {
            return Err(Error::Verification("certificate changed under relabelling".into()));
        }
    }
    Ok(Certificates {
        color_blind: base.digest(),
        centered,
        relabel_checks: shuffles,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometrySummary {
    pub scope: String,
    pub flags_checked: usize,
    pub violations: usize,
    pub passed: bool,
}

pub fn geometry_summary(g: &LabeledGraph, d: usize, scope: Scope) -> Result<Option<GeometrySummary>> {
    let Some(tau) = &g.color else {
        return Ok(None);
    };
    let m = atilde_diagram(d)?;
    let radius = radius_of(g).unwrap_or(0);
    let report = verify_geometry(g, tau, &m, &scope.predicate(g, radius))?;
    Ok(Some(GeometrySummary {
        scope: scope_name(scope),
        flags_checked: report.flags_checked,
        violations: report.violations.len(),
        passed: report.passed(),
    }))
}

pub fn scope_name(scope: Scope) -> String {
    match scope {
        Scope::Full => "full".into(),
        Scope::Interior => "interior".into(),
        Scope::Within(r) => format!("within:{r}"),
    }
}

pub fn parse_scope(s: &str) -> Result<Scope> {
    match s {
        "full" => Ok(Scope::Full),
        "interior" => Ok(Scope::Interior),
        _ => s
            .strip_prefix("within:")
            .and_then(|r| r.parse().ok())
            .map(Scope::Within)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scope `{s}`"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GermSummary {
    pub basepoint: usize,
    pub germs_at_basepoint: usize,
    pub single_orbit: bool,
    /// `labelling`, `obstruction` or `no-germ`.
    pub outcome: String,
    /// For labellings on colored balls: the diagram symmetry matching τ.
    pub symmetry_to_tau: Option<Vec<usize>>,
    pub obstruction_cycle: Option<Vec<usize>>,
    pub short_cycles: Option<Value>,
}

/// Germ scope on a ball: vertices whose full neighborhood is present.
pub fn germ_scope(g: &LabeledGraph) -> Vec<bool> {
    match (radius_of(g), &g.dist) {
        (Some(r), Some(_)) if r >= 1 => Scope::Within(r - 1).predicate(g, r),
        _ => vec![true; g.vertex_count()],
    }
}

pub fn germ_summary(g: &LabeledGraph, d: usize, budget: &Budget, k: usize) -> Result<GermSummary> {
    let m = atilde_diagram(d)?;
    let syms = diagram_symmetries(&m);
    let atlas = GermAtlas::new(g, &m, budget);
    let base = origin_of(g).unwrap_or(0);
    let scope = germ_scope(g);
    let germs = atlas.germs_at(base)?;
    let mut out = GermSummary {
        basepoint: base,
        germs_at_basepoint: germs.len(),
        single_orbit: is_single_orbit(&germs, &syms),
        outcome: "no-germ".into(),
        symmetry_to_tau: None,
        obstruction_cycle: None,
        short_cycles: None,
    };
    let Some(seed) = germs.first() else {
        return Ok(out);
    };
    match propagate(&atlas, seed, &scope)? {
        Propagation::Labelling { tau, .. } => {
            out.outcome = "labelling".into();
            if let Some(colors) = &g.color {
                let reference: Vec<Option<u32>> = colors.iter().zip(&tau).map(|(&c, t)| t.map(|_| c)).collect();
                out.symmetry_to_tau = align_to_symmetry(&reference, &tau, &syms);
            }
        }
        Propagation::Obstruction { cycle, .. } => {
            out.outcome = "obstruction".into();
            out.obstruction_cycle = Some(cycle);
        }
    }
    if k >= 2 {
        let cert = short_cycle_certificate(&atlas, k, &scope)?;
        out.short_cycles = Some(json!({
            "k": k,
            "passed": cert.passed(),
            "checked": cert.classes.iter().map(|(len, c)| (len.to_string(), json!(c.checked))).collect::<serde_json::Map<_, _>>(),
            "failures": cert.classes.values().map(|c| c.failures).sum::<usize>(),
        }));
    }
    Ok(out)
}

/// Wall-clock limit for one experiment cell.
pub struct Deadline {
    start: Instant,
    limit: Duration,
}

impl Deadline {
    pub fn after(secs: u64) -> Self {
        Deadline {
            start: Instant::now(),
            limit: Duration::from_secs(secs),
        }
    }

    pub fn check(&self) -> Result<()> {
        let spent = self.start.elapsed();
        if spent > self.limit {
            return Err(Error::budget("cell seconds", spent.as_secs(), self.limit.as_secs()));
        }
        Ok(())
    }
}
