//! Hard EM over hub labels.
//!
//! Each restart alternates an M-step (closed-form `A` for the current labels)
//! with an E-step that relabels every group by its best-scoring feasible
//! component. The objective is the profile log-likelihood, which has no
//! `rho` term, so `rho` only enters the result after the fact.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{mle_given_labels, LabelEstimate};
use crate::model::{GroupedData, LabelAssignment, Variant};
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Debug, PartialEq)]
pub enum InitStrategy {
    /// Random feasible labels, drawn independently per restart.
    RandomFeasible,
    /// Start from the given labels; a single run is performed.
    Provided(LabelAssignment),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub variant: Variant,
    /// Probabilities are clamped to `[eps, 1 - eps]` when scoring labels.
    pub clamp_eps: f64,
    /// Pseudocount added to both outcomes of every entry of a non-empty
    /// cluster before scoring: `(s + a) / (t + 2a)`. Zero scores with the
    /// plain clamped estimate. Only the E-step sees it; the reported `A`
    /// and the objective use the unsmoothed estimate.
    pub smoothing: f64,
    pub seed: u64,
    /// Replicate index mixed into the restart streams.
    pub replicate: u64,
    pub init: InitStrategy,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iterations: 200,
            variant: Variant::Asymmetric,
            clamp_eps: 1e-9,
            smoothing: 1.0,
            seed: 0,
            replicate: 0,
            init: InitStrategy::RandomFeasible,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max iterations must be at least 1"));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return Err(Error::invalid(format!(
                "clamp eps {} outside (0, 0.5)",
                self.clamp_eps
            )));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::invalid(format!(
                "smoothing {} must be finite and non-negative",
                self.smoothing
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The E-step reproduced the current labels.
    Converged,
    /// The E-step proposed labels with a lower profile likelihood; the
    /// previous labels were kept. Only possible through clamping or
    /// smoothing.
    NoImprovement,
    MaxIterations,
}

/// Outcome of one EM run from one starting labelling.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartRun {
    pub labels: LabelAssignment,
    pub log_profile_lik: f64,
    /// Profile log-likelihood of every accepted labelling, starting with
    /// the initial one.
    pub trace: Vec<f64>,
    /// Number of E-steps performed.
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub log_profile_lik: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub labels: LabelAssignment,
    pub a_hat: Array2<f64>,
    pub rho_hat: Vec<f64>,
    /// Components left without groups (their `a_hat` rows hold the fill).
    pub empty_clusters: Vec<usize>,
    pub log_profile_lik: f64,
    pub trace: Vec<f64>,
    pub restart_index: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub restarts: Vec<RestartSummary>,
}

/// Precomputed clamped log-probabilities of one `A` estimate.
///
/// The score of component `c` for a group is
/// `base[c] + sum over present j of weight[c][j]`.
struct ScoreTable {
    variant: Variant,
    base: Vec<f64>,
    weight: Array2<f64>,
}

impl ScoreTable {
    fn new(a: &Array2<f64>, variant: Variant, eps: f64) -> Self {
        let mut weight = Array2::<f64>::zeros(a.raw_dim());
        let mut base = vec![0.0; a.nrows()];
        for (c, row) in a.rows().into_iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                let p = p.clamp(eps, 1.0 - eps);
                let absent = (1.0 - p).ln();
                base[c] += absent;
                weight[[c, j]] = p.ln() - absent;
            }
        }
        Self {
            variant,
            base,
            weight,
        }
    }

    #[inline]
    fn score(&self, c: usize, members: &[usize]) -> f64 {
        let w = self.weight.row(c);
        self.base[c] + members.iter().map(|&j| w[j]).sum::<f64>()
    }

    /// Best feasible component; ties go to the lowest index.
    fn best(&self, data: &GroupedData, t: usize, n_leaders: usize) -> Option<usize> {
        let members = data.members(t);
        let null = match self.variant {
            Variant::NullComponent => Some(0),
            Variant::Asymmetric => None,
        };
        let hubs = data
            .present_leaders(t, n_leaders)
            .iter()
            .map(|&node| self.variant.component_of_hub(node));
        let mut best: Option<(usize, f64)> = None;
        for c in null.into_iter().chain(hubs) {
            let s = self.score(c, members);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        best.map(|(c, _)| c)
    }
}

/// E-step scores of every component for one binary group vector: the
/// clamped log-likelihood of the group under each row of `a_hat`, or `-inf`
/// for a hub component whose hub is absent from the group.
pub fn e_step_scores(
    group: &[u8],
    a_hat: &Array2<f64>,
    variant: Variant,
    clamp_eps: f64,
) -> Vec<f64> {
    a_hat
        .rows()
        .into_iter()
        .enumerate()
        .map(|(c, row)| {
            if let Some(node) = variant.hub_node(c) {
                if group.get(node) != Some(&1) {
                    return f64::NEG_INFINITY;
                }
            }
            group
                .iter()
                .zip(row.iter())
                .map(|(&g, &p)| {
                    let p = p.clamp(clamp_eps, 1.0 - clamp_eps);
                    if g == 1 {
                        p.ln()
                    } else {
                        (1.0 - p).ln()
                    }
                })
                .sum()
        })
        .collect()
}

/// Index of the largest score, lowest index on ties; `None` if all are
/// `-inf`.
pub fn argmax_label(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (c, &s) in scores.iter().enumerate() {
        if s > f64::NEG_INFINITY && best.is_none_or(|(_, b)| s > b) {
            best = Some((c, s));
        }
    }
    best.map(|(c, _)| c)
}

fn check_fit_inputs(data: &GroupedData, n_leaders: usize, variant: Variant) -> Result<()> {
    if data.is_empty() {
        return Err(Error::invalid("no groups to fit"));
    }
    if variant == Variant::Asymmetric && n_leaders == 0 {
        return Err(Error::invalid(
            "the asymmetric model needs at least one leader",
        ));
    }
    if n_leaders > data.n() {
        return Err(Error::invalid(format!(
            "n_L = {n_leaders} exceeds the node count {}",
            data.n()
        )));
    }
    if variant == Variant::Asymmetric {
        if let Some(t) = (0..data.len()).find(|&t| data.present_leaders(t, n_leaders).is_empty()) {
            return Err(Error::Infeasible { group: t });
        }
    }
    Ok(())
}

/// The matrix the E-step scores with: each non-empty row shrunk towards
/// 1/2 by `smoothing` pseudo-observations per outcome. Empty rows keep their
/// fill.
pub fn scoring_matrix(est: &LabelEstimate, smoothing: f64) -> Array2<f64> {
    let mut a = est.a.clone();
    if smoothing > 0.0 {
        for (mut row, &t) in a.rows_mut().into_iter().zip(&est.counts) {
            if t > 0 {
                let t = t as f64;
                row.mapv_inplace(|p| (p * t + smoothing) / (t + 2.0 * smoothing));
            }
        }
    }
    a
}

/// Relabels every group given an estimate of `A`.
fn e_step(data: &GroupedData, est: &LabelEstimate, config: &FitConfig) -> Result<LabelAssignment> {
    let n_leaders = est.n_leaders();
    let table = ScoreTable::new(
        &scoring_matrix(est, config.smoothing),
        est.variant,
        config.clamp_eps,
    );
    let components = (0..data.len())
        .map(|t| {
            table
                .best(data, t, n_leaders)
                .ok_or(Error::Infeasible { group: t })
        })
        .collect::<Result<Vec<_>>>()?;
    LabelAssignment::new(est.variant, n_leaders, components)
}

/// One full EM iteration: M-step on `labels`, then E-step.
pub fn em_step(
    data: &GroupedData,
    labels: &LabelAssignment,
    config: &FitConfig,
) -> Result<LabelAssignment> {
    let est = mle_given_labels(data, labels)?;
    e_step(data, &est, config)
}

/// Random feasible labels: uniform over the leaders present in each group;
/// for the null variant label 0 with probability `1 / (n_L + 1)` (always
/// when no leader is present).
pub fn random_feasible_labels<R: Rng + ?Sized>(
    data: &GroupedData,
    variant: Variant,
    n_leaders: usize,
    rng: &mut R,
) -> Result<LabelAssignment> {
    let null_prob = 1.0 / (n_leaders as f64 + 1.0);
    let components = (0..data.len())
        .map(|t| {
            let present = data.present_leaders(t, n_leaders);
            match variant {
                Variant::Asymmetric => present
                    .choose(rng)
                    .map(|&node| variant.component_of_hub(node))
                    .ok_or(Error::Infeasible { group: t }),
                Variant::NullComponent => {
                    if present.is_empty() || rng.gen::<f64>() < null_prob {
                        Ok(0)
                    } else {
                        Ok(variant.component_of_hub(*present.choose(rng).unwrap()))
                    }
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    LabelAssignment::new(variant, n_leaders, components)
}

/// Runs hard EM from `init` until the labels stop changing, the profile
/// likelihood would decrease, or `config.max_iterations` E-steps have run.
pub fn run_restart(
    data: &GroupedData,
    init: LabelAssignment,
    config: &FitConfig,
) -> Result<RestartRun> {
    if init.len() != data.len() {
        return Err(Error::invalid(format!(
            "{} initial labels for {} groups",
            init.len(),
            data.len()
        )));
    }
    let mut labels = init;
    let mut est = mle_given_labels(data, &labels)?;
    let mut ll = current_profile(data, &labels, &est);
    let mut trace = vec![ll];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        let next = e_step(data, &est, config)?;
        iterations += 1;
        if next == labels {
            termination = Termination::Converged;
            break;
        }
        let next_est = mle_given_labels(data, &next)?;
        let next_ll = current_profile(data, &next, &next_est);
        if next_ll < ll {
            termination = Termination::NoImprovement;
            break;
        }
        labels = next;
        est = next_est;
        ll = next_ll;
        trace.push(ll);
    }
    Ok(RestartRun {
        labels,
        log_profile_lik: ll,
        trace,
        iterations,
        termination,
    })
}

fn current_profile(data: &GroupedData, labels: &LabelAssignment, est: &LabelEstimate) -> f64 {
    if labels.is_feasible(data) {
        est.profile_log_lik()
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximizes the profile likelihood over hub labels with hard EM, keeping
/// the best of `config.restarts` random starts (ties go to the lowest
/// restart index).
pub fn hard_em_fit(data: &GroupedData, n_leaders: usize, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let variant = config.variant;
    check_fit_inputs(data, n_leaders, variant)?;

    let runs: Vec<RestartRun> = match &config.init {
        InitStrategy::Provided(labels) => {
            if labels.variant() != variant || labels.n_leaders() != n_leaders {
                return Err(Error::invalid(
                    "provided labels do not match the fitted model",
                ));
            }
            vec![run_restart(data, labels.clone(), config)?]
        }
        InitStrategy::RandomFeasible => (0..config.restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(config.seed, config.replicate, Stream::Restart(r as u32));
                let init = random_feasible_labels(data, variant, n_leaders, &mut rng)?;
                run_restart(data, init, config)
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.log_profile_lik > runs[best].log_profile_lik {
            best = r;
        }
    }
    let restarts = runs
        .iter()
        .enumerate()
        .map(|(index, run)| RestartSummary {
            index,
            log_profile_lik: run.log_profile_lik,
            iterations: run.iterations,
            termination: run.termination,
        })
        .collect();
    let winner = runs.into_iter().nth(best).expect("at least one restart");
    let est = mle_given_labels(data, &winner.labels)?;
    Ok(FitResult {
        labels: winner.labels,
        a_hat: est.a,
        rho_hat: est.rho,
        empty_clusters: est.empty,
        log_profile_lik: winner.log_profile_lik,
        trace: winner.trace,
        restart_index: best,
        iterations: winner.iterations,
        termination: winner.termination,
        restarts,
    })
}

/// Brute-force maximum of the profile likelihood over every feasible
/// labelling, for checking the EM on small instances. Refuses when there are
/// more than `max_assignments` labellings. Ties keep the first labelling in
/// lexicographic order of components.
pub fn exhaustive_profile_max(
    data: &GroupedData,
    variant: Variant,
    n_leaders: usize,
    max_assignments: usize,
) -> Result<(LabelAssignment, f64)> {
    check_fit_inputs(data, n_leaders, variant)?;
    let options: Vec<Vec<usize>> = (0..data.len())
        .map(|t| {
            let null = (variant == Variant::NullComponent).then_some(0);
            let hubs = data
                .present_leaders(t, n_leaders)
                .iter()
                .map(|&node| variant.component_of_hub(node));
            null.into_iter().chain(hubs).collect()
        })
        .collect();
    let total = options
        .iter()
        .try_fold(1usize, |acc, o| acc.checked_mul(o.len()))
        .filter(|&k| k <= max_assignments)
        .ok_or_else(|| {
            Error::invalid(format!(
                "more than {max_assignments} labellings to enumerate"
            ))
        })?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut digits = vec![0usize; options.len()];
    for _ in 0..total {
        let comps: Vec<usize> = digits.iter().zip(&options).map(|(&d, o)| o[d]).collect();
        let z = LabelAssignment::new(variant, n_leaders, comps.clone())?;
        let ll = mle_given_labels(data, &z)?.profile_log_lik();
        if best.as_ref().is_none_or(|(_, b)| ll > *b) {
            best = Some((comps, ll));
        }
        // Odometer increment, last group fastest.
        for (d, o) in digits.iter_mut().zip(&options).rev() {
            *d += 1;
            if *d < o.len() {
                break;
            }
            *d = 0;
        }
    }
    let (comps, ll) = best.expect("at least one labelling");
    Ok((LabelAssignment::new(variant, n_leaders, comps)?, ll))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn data(n: usize, rows: &[&[u8]]) -> GroupedData {
        let rows: Vec<Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
        GroupedData::from_rows(n, &rows).unwrap()
    }

    #[test]
    fn score_examples() {
        let s = e_step_scores(&[1, 0], &array![[1.0, 0.5]], Variant::Asymmetric, 1e-9);
        assert_relative_eq!(s[0], -std::f64::consts::LN_2, epsilon = 1e-8);
        let s = e_step_scores(&[0, 1], &array![[1.0, 0.5]], Variant::Asymmetric, 1e-9);
        assert_eq!(s, vec![f64::NEG_INFINITY]);
        assert_eq!(argmax_label(&s), None);
        let s = e_step_scores(
            &[0, 1],
            &array![[0.1, 0.5], [1.0, 0.5]],
            Variant::NullComponent,
            1e-9,
        );
        assert!(s[0].is_finite());
        assert_eq!(s[1], f64::NEG_INFINITY);
    }

    #[test]
    fn smoothing_shrinks_non_empty_rows() {
        let d = data(3, &[&[1, 1, 0], &[1, 0, 0], &[1, 1, 1]]);
        let z = LabelAssignment::from_external(Variant::Asymmetric, 2, &[1, 1, 1]).unwrap();
        let est = mle_given_labels(&d, &z).unwrap();
        let a = scoring_matrix(&est, 1.0);
        // Row 1: counts (3, 2, 1) of 3 groups; row 2 is empty and keeps its fill.
        assert_relative_eq!(a[[0, 0]], 4.0 / 5.0);
        assert_relative_eq!(a[[0, 1]], 3.0 / 5.0);
        assert_relative_eq!(a[[0, 2]], 2.0 / 5.0);
        assert_eq!(a.row(1), est.a.row(1));
        assert_eq!(scoring_matrix(&est, 0.0), est.a);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(argmax_label(&[-1.0, -1.0, -2.0]), Some(0));
        assert_eq!(argmax_label(&[f64::NEG_INFINITY, -3.0, -3.0]), Some(1));
    }

    #[test]
    fn single_leader_fit_is_column_means() {
        let d = data(3, &[&[1, 1, 0], &[1, 0, 0], &[1, 1, 1], &[1, 0, 1]]);
        let cfg = FitConfig {
            restarts: 3,
            ..FitConfig::default()
        };
        let fit = hard_em_fit(&d, 1, &cfg).unwrap();
        assert_eq!(fit.labels.external(), vec![1; 4]);
        assert_eq!(fit.a_hat, array![[1.0, 0.5, 0.5]]);
        assert_eq!(fit.rho_hat, vec![1.0]);
        assert_eq!(fit.iterations, 1);
        assert_eq!(fit.termination, Termination::Converged);
    }

    #[test]
    fn asymmetric_requires_a_leader_per_group() {
        let d = data(3, &[&[1, 0, 1], &[0, 0, 1]]);
        let err = hard_em_fit(&d, 2, &FitConfig::default()).unwrap_err();
        assert_eq!(err, Error::Infeasible { group: 1 });

        let cfg = FitConfig {
            variant: Variant::NullComponent,
            ..FitConfig::default()
        };
        let fit = hard_em_fit(&d, 2, &cfg).unwrap();
        assert_eq!(fit.labels.get(1), 0);
    }

    #[test]
    fn separated_data_is_recovered() {
        // Leaders 1 and 2 with disjoint deterministic follower blocks.
        let g1: &[u8] = &[1, 0, 1, 1, 0, 0];
        let g2: &[u8] = &[0, 1, 0, 0, 1, 1];
        let both1: &[u8] = &[1, 1, 1, 1, 0, 0];
        let d = data(6, &[g1, g2, both1, g2, g1]);
        let fit = hard_em_fit(&d, 2, &FitConfig::default()).unwrap();
        assert_eq!(fit.labels.external(), vec![1, 2, 1, 2, 1]);
    }

    #[test]
    fn config_validation() {
        let d = data(2, &[&[1, 0]]);
        for cfg in [
            FitConfig {
                restarts: 0,
                ..FitConfig::default()
            },
            FitConfig {
                max_iterations: 0,
                ..FitConfig::default()
            },
            FitConfig {
                clamp_eps: 0.5,
                ..FitConfig::default()
            },
            FitConfig {
                smoothing: -1.0,
                ..FitConfig::default()
            },
        ] {
            assert!(matches!(
                hard_em_fit(&d, 1, &cfg),
                Err(Error::InvalidInput(_))
            ));
        }
    }

    #[test]
    fn provided_labels_single_run() {
        let d = data(3, &[&[1, 1, 0], &[1, 1, 1], &[0, 1, 1]]);
        let z = LabelAssignment::from_external(Variant::Asymmetric, 2, &[1, 1, 2]).unwrap();
        let cfg = FitConfig {
            init: InitStrategy::Provided(z),
            ..FitConfig::default()
        };
        let fit = hard_em_fit(&d, 2, &cfg).unwrap();
        assert_eq!(fit.restarts.len(), 1);
        assert!(fit.labels.is_feasible(&d));
    }
}
