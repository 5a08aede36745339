use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CloudSphereRep, OffsetField};
use crate::error::{Error, Result};
use crate::geometry::{AbstractionPyramid, Point3, SphereTemplate};
use crate::metrics::{nearest_assignments, pairwise_sum};
use crate::spatial::NearestNeighbors;

pub const DEFAULT_K_REG: usize = 8;

/// Smoothing added to `|d_i - d_j|` in the regularizer gradient denominator.
pub const REG_EPSILON: f64 = 1e-12;

const DEFAULT_ALPHA: [f64; 5] = [0.5, 0.2, 0.2, 0.2, 0.2];
const DEFAULT_BETA: [f64; 5] = [0.0, 0.0, 0.0, 1.0, 10.0];

/// Per-stage weights of the Chamfer (`alpha`) and regularizer (`beta`) terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LossWeights {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(Error::invalid(format!(
                "alpha and beta need one entry per stage, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        if alpha
            .iter()
            .chain(&beta)
            .any(|w| !(*w >= 0.0) || !w.is_finite())
        {
            return Err(Error::invalid(
                "loss weights must be finite and non-negative",
            ));
        }
        Ok(Self { alpha, beta })
    }

    /// The standard five-stage weights, truncated from the coarse end for
    /// fewer stages. Stages beyond the fifth reuse the coarsest weights.
    pub fn defaults(stage_count: usize) -> Self {
        let pick = |table: &[f64; 5], k: usize| table[k.min(4)];
        Self {
            alpha: (0..stage_count).map(|k| pick(&DEFAULT_ALPHA, k)).collect(),
            beta: (0..stage_count).map(|k| pick(&DEFAULT_BETA, k)).collect(),
        }
    }

    pub fn stage_count(&self) -> usize {
        self.alpha.len()
    }

    /// Same alphas with every beta set to zero.
    pub fn without_regularization(&self) -> Self {
        Self {
            alpha: self.alpha.clone(),
            beta: vec![0.0; self.beta.len()],
        }
    }
}

/// Symmetric k-nearest-neighbor graph on the template with weights
/// `exp(-|q_i - q_j|)`, stored as adjacency lists.
///
/// `j` is adjacent to `i` when either is among the other's `k_reg` nearest
/// template points, so every undirected edge appears in both lists.
#[derive(Clone, Debug, PartialEq)]
pub struct RegGraph {
    k_reg: usize,
    starts: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl RegGraph {
    pub fn build(template: &SphereTemplate, k_reg: usize) -> Result<Self> {
        let n = template.len();
        if k_reg == 0 {
            return Err(Error::invalid("k_reg must be positive"));
        }
        let pts = template.points();
        let index = NearestNeighbors::new(pts);
        let k = k_reg.min(n - 1);
        let knn: Vec<Vec<usize>> = pts
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                index
                    .k_nearest(q, k + 1)
                    .into_iter()
                    .map(|(j, _)| j)
                    .filter(|&j| j != i)
                    .take(k)
                    .collect()
            })
            .collect();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, list) in knn.iter().enumerate() {
            for &j in list {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        let mut starts = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        starts.push(0);
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &j in list.iter() {
                neighbors.push(j);
                weights.push((-(pts[i] - pts[j]).norm()).exp());
            }
            starts.push(neighbors.len());
        }
        Ok(Self {
            k_reg,
            starts,
            neighbors,
            weights,
        })
    }

    pub fn k_reg(&self) -> usize {
        self.k_reg
    }

    pub fn len(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of directed edges (twice the undirected count).
    pub fn edge_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.starts[i]..self.starts[i + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }
}

fn reg_value(graph: &RegGraph, d: &[Point3]) -> f64 {
    let partial: Vec<f64> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            graph
                .neighbors(i)
                .map(|(j, w)| w * (d[i] - d[j]).norm())
                .sum()
        })
        .collect();
    pairwise_sum(&partial)
}

fn reg_gradient(graph: &RegGraph, d: &[Point3], scale: f64, out: &mut [Point3]) {
    let grads: Vec<Point3> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            graph.neighbors(i).fold(Point3::zeros(), |acc, (j, w)| {
                let diff = d[i] - d[j];
                // (i, j) and (j, i) both contribute, hence the factor 2
                acc + diff * (2.0 * w / (diff.norm() + REG_EPSILON))
            })
        })
        .collect();
    for (o, g) in out.iter_mut().zip(grads) {
        *o += g * scale;
    }
}

/// Chamfer value and, optionally, its gradient with respect to the
/// reconstruction points, holding nearest-neighbor assignments fixed.
fn chamfer_term(
    recon: &[Point3],
    target: &[Point3],
    target_index: &NearestNeighbors,
    grad: Option<&mut [Point3]>,
    scale: f64,
) -> f64 {
    let recon_index = NearestNeighbors::new(recon);
    let forward = nearest_assignments(recon, target_index);
    let backward = nearest_assignments(target, &recon_index);
    let fwd: Vec<f64> = forward.iter().map(|&(_, d)| d).collect();
    let bwd: Vec<f64> = backward.iter().map(|&(_, d)| d).collect();
    let value = pairwise_sum(&fwd) / recon.len() as f64 + pairwise_sum(&bwd) / target.len() as f64;
    if let Some(grad) = grad {
        let a = 2.0 * scale / recon.len() as f64;
        let b = 2.0 * scale / target.len() as f64;
        for (i, &(j, _)) in forward.iter().enumerate() {
            grad[i] += (recon[i] - target[j]) * a;
        }
        for (j, &(i, _)) in backward.iter().enumerate() {
            grad[i] += (recon[i] - target[j]) * b;
        }
    }
    value
}

/// Result of one objective evaluation. Terms not requested are `None`.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub objective: f64,
    pub stage_cd: Vec<Option<f64>>,
    pub stage_reg: Vec<Option<f64>>,
    pub gradient: Option<Vec<OffsetField>>,
}

/// The weighted multi-stage objective for a fixed pyramid, weights and
/// graph, with spatial indices of the targets built once.
pub struct Objective<'a> {
    pyramid: &'a AbstractionPyramid,
    weights: &'a LossWeights,
    graph: &'a RegGraph,
    target_index: Vec<NearestNeighbors>,
}

impl<'a> Objective<'a> {
    pub fn new(
        pyramid: &'a AbstractionPyramid,
        weights: &'a LossWeights,
        graph: &'a RegGraph,
    ) -> Self {
        let target_index = pyramid
            .levels()
            .iter()
            .map(|l| NearestNeighbors::new(l.points()))
            .collect();
        Self {
            pyramid,
            weights,
            graph,
            target_index,
        }
    }

    pub fn check(&self, rep: &CloudSphereRep) -> Result<()> {
        let stages = rep.stage_count();
        if self.pyramid.levels().len() != stages {
            return Err(Error::invalid(format!(
                "representation has {stages} stages but the pyramid has {} levels",
                self.pyramid.levels().len()
            )));
        }
        if self.weights.stage_count() != stages {
            return Err(Error::invalid(format!(
                "weights cover {} stages, representation has {stages}",
                self.weights.stage_count()
            )));
        }
        if self.graph.len() != rep.len() || self.pyramid.cardinality() != rep.len() {
            return Err(Error::invalid(format!(
                "template has {} points, graph {} and pyramid {}",
                rep.len(),
                self.graph.len(),
                self.pyramid.cardinality()
            )));
        }
        Ok(())
    }

    /// Evaluates `sum_k alpha_k CD(R^k, P^k) + beta_k L_reg(D^k)` over the
    /// stages with `terms[k]` set.
    pub fn evaluate(
        &self,
        rep: &CloudSphereRep,
        terms: &[bool],
        with_gradient: bool,
    ) -> Evaluation {
        let stages = rep.stage_count();
        let n = rep.len();
        let finest = terms.iter().position(|&t| t).unwrap_or(stages);
        let mut stage_cd = vec![None; stages];
        let mut stage_reg = vec![None; stages];
        let mut objective_terms = Vec::new();
        // per-stage d(alpha_j CD_j)/dR^j, to be summed into every D^m with m >= j
        let mut recon_grads: Vec<Vec<Point3>> = Vec::new();
        let mut gradient: Option<Vec<OffsetField>> =
            with_gradient.then(|| vec![OffsetField::zeros(n); stages]);

        if finest < stages {
            let cascade = rep.cascade(finest);
            for (pos, k) in (finest..stages).rev().enumerate() {
                if !terms[k] {
                    continue;
                }
                let recon = &cascade[pos];
                let alpha = self.weights.alpha[k];
                let mut g = with_gradient.then(|| vec![Point3::zeros(); n]);
                let cd = chamfer_term(
                    recon,
                    self.pyramid.levels()[k].points(),
                    &self.target_index[k],
                    g.as_deref_mut(),
                    alpha,
                );
                stage_cd[k] = Some(cd);
                objective_terms.push(alpha * cd);
                if let Some(g) = g {
                    recon_grads.push(g);
                }

                let beta = self.weights.beta[k];
                let d = rep.offsets()[k].as_slice();
                let reg = reg_value(self.graph, d);
                stage_reg[k] = Some(reg);
                objective_terms.push(beta * reg);
                if let Some(grad) = gradient.as_mut() {
                    if beta != 0.0 {
                        reg_gradient(self.graph, d, beta, &mut grad[k].0);
                    }
                }
            }
        }

        if let Some(grad) = gradient.as_mut() {
            // recon_grads holds active stages coarse to fine; walk fine to coarse
            let active: Vec<usize> = (finest..stages).rev().filter(|&k| terms[k]).collect();
            let mut running = vec![Point3::zeros(); n];
            let mut next = active.len();
            for m in 0..stages {
                while next > 0 && active[next - 1] <= m {
                    next -= 1;
                    for (r, g) in running.iter_mut().zip(&recon_grads[next]) {
                        *r += g;
                    }
                }
                for (o, r) in grad[m].0.iter_mut().zip(&running) {
                    *o += r;
                }
            }
        }

        Evaluation {
            objective: objective_terms.iter().sum(),
            stage_cd,
            stage_reg,
            gradient,
        }
    }
}

fn check_graph(rep: &CloudSphereRep, graph: &RegGraph) -> Result<()> {
    if graph.len() != rep.len() {
        return Err(Error::invalid(format!(
            "graph has {} nodes, template has {} points",
            graph.len(),
            rep.len()
        )));
    }
    Ok(())
}

/// `CD(R^k, P^k)`.
pub fn loss_cd_stage(rep: &CloudSphereRep, pyramid: &AbstractionPyramid, k: usize) -> Result<f64> {
    rep.check_stage(k)?;
    let target = pyramid
        .level(k)
        .ok_or_else(|| Error::invalid(format!("pyramid has no level {k}")))?;
    if target.len() != rep.len() {
        return Err(Error::invalid(format!(
            "pyramid level {k} has {} points, template has {}",
            target.len(),
            rep.len()
        )));
    }
    let recon = rep.reconstruct(k)?;
    crate::metrics::chamfer(&recon, target)
}

/// `sum over directed graph edges (i, j) of w_ij |d_i^k - d_j^k|`.
pub fn loss_reg_stage(rep: &CloudSphereRep, graph: &RegGraph, k: usize) -> Result<f64> {
    rep.check_stage(k)?;
    check_graph(rep, graph)?;
    Ok(reg_value(graph, rep.offsets()[k].as_slice()))
}

pub fn total_loss(
    rep: &CloudSphereRep,
    pyramid: &AbstractionPyramid,
    weights: &LossWeights,
    graph: &RegGraph,
) -> Result<f64> {
    let objective = Objective::new(pyramid, weights, graph);
    objective.check(rep)?;
    Ok(objective
        .evaluate(rep, &vec![true; rep.stage_count()], false)
        .objective)
}

/// Gradient of [`total_loss`] with respect to every offset field.
pub fn grad_total_loss(
    rep: &CloudSphereRep,
    pyramid: &AbstractionPyramid,
    weights: &LossWeights,
    graph: &RegGraph,
) -> Result<Vec<OffsetField>> {
    let objective = Objective::new(pyramid, weights, graph);
    objective.check(rep)?;
    let eval = objective.evaluate(rep, &vec![true; rep.stage_count()], true);
    Ok(eval.gradient.expect("gradient was requested"))
}
