//! Sufficient identifiability conditions for both hub models, and an
//! exhaustive outcome-distribution oracle for small node sets.
//!
//! Strict inequalities are checked against a tolerance: a value only counts
//! as strictly inside `(0, 1)` or as different from another value when it
//! clears the tolerance.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{HubParams, NullHubParams, Params, Variant};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_ENUMERATION_CAP: usize = 14;

/// Evidence attached to a condition. Hub labels and node numbers use the
/// external 1-based convention (label 0 is the null component).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    RhoNotInterior {
        label: u32,
        value: f64,
    },
    EntryNotBelowOne {
        label: u32,
        node: usize,
        value: f64,
    },
    PairSeparated {
        hub: u32,
        other: u32,
        follower: usize,
        gap: f64,
    },
    PairNotSeparated {
        hub: u32,
        other: u32,
    },
    NullSeparated {
        hub: u32,
        followers: [usize; 2],
    },
    NullNotSeparated {
        hub: u32,
        differing_followers: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub variant: Variant,
    pub tol: f64,
    pub passed: bool,
    pub conditions: Vec<ConditionResult>,
}

impl ConditionReport {
    fn new(variant: Variant, tol: f64, conditions: Vec<ConditionResult>) -> Self {
        let passed = conditions.iter().all(|c| c.passed);
        Self {
            variant,
            tol,
            passed,
            conditions,
        }
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

fn rho_interior(rho: &[f64], variant: Variant, tol: f64) -> ConditionResult {
    let witnesses: Vec<Witness> = rho
        .iter()
        .enumerate()
        .filter(|(_, &r)| !(r > tol && r < 1.0 - tol))
        .map(|(c, &value)| Witness::RhoNotInterior {
            label: variant.external_label(c),
            value,
        })
        .collect();
    ConditionResult {
        id: "i",
        description: "every mixing probability lies strictly inside (0, 1)",
        passed: witnesses.is_empty(),
        witnesses,
    }
}

fn off_diagonal_below_one(a: &Array2<f64>, variant: Variant, tol: f64) -> ConditionResult {
    let mut witnesses = Vec::new();
    for (c, row) in a.rows().into_iter().enumerate() {
        let hub = variant.hub_node(c);
        for (j, &value) in row.iter().enumerate() {
            if Some(j) != hub && value >= 1.0 - tol {
                witnesses.push(Witness::EntryNotBelowOne {
                    label: variant.external_label(c),
                    node: j + 1,
                    value,
                });
            }
        }
    }
    ConditionResult {
        id: "ii",
        description: "every off-diagonal membership probability is strictly below 1",
        passed: witnesses.is_empty(),
        witnesses,
    }
}

fn leaders_separated(
    a: &Array2<f64>,
    variant: Variant,
    n_leaders: usize,
    tol: f64,
) -> ConditionResult {
    let mut witnesses = Vec::new();
    let mut passed = true;
    for i in 0..n_leaders {
        for i2 in i + 1..n_leaders {
            let (ci, ci2) = (variant.component_of_hub(i), variant.component_of_hub(i2));
            let sep = (n_leaders..a.ncols())
                .map(|k| (k, (a[[ci, k]] - a[[ci2, k]]).abs()))
                .find(|&(_, gap)| gap > tol);
            let (hub, other) = (i as u32 + 1, i2 as u32 + 1);
            witnesses.push(match sep {
                Some((k, gap)) => Witness::PairSeparated {
                    hub,
                    other,
                    follower: k + 1,
                    gap,
                },
                None => {
                    passed = false;
                    Witness::PairNotSeparated { hub, other }
                }
            });
        }
    }
    ConditionResult {
        id: "iii",
        description: "every pair of leaders differs on at least one follower",
        passed,
        witnesses,
    }
}

fn null_separated(params: &NullHubParams, tol: f64) -> ConditionResult {
    let a = params.a();
    let n_l = params.n_leaders();
    let mut witnesses = Vec::new();
    let mut passed = true;
    for i in 0..n_l {
        let c = i + 1;
        let differing: Vec<usize> = (n_l..a.ncols())
            .filter(|&k| (a[[0, k]] - a[[c, k]]).abs() > tol)
            .collect();
        let hub = i as u32 + 1;
        if differing.len() >= 2 {
            witnesses.push(Witness::NullSeparated {
                hub,
                followers: [differing[0] + 1, differing[1] + 1],
            });
        } else {
            passed = false;
            witnesses.push(Witness::NullNotSeparated {
                hub,
                differing_followers: differing.iter().map(|k| k + 1).collect(),
            });
        }
    }
    ConditionResult {
        id: "iv",
        description: "every leader differs from the null component on two distinct followers",
        passed,
        witnesses,
    }
}

/// Checks the sufficient identifiability conditions of the asymmetric hub
/// model.
pub fn check_hub_conditions(params: &HubParams, tol: f64) -> ConditionReport {
    let v = Variant::Asymmetric;
    ConditionReport::new(
        v,
        tol,
        vec![
            rho_interior(params.rho(), v, tol),
            off_diagonal_below_one(params.a(), v, tol),
            leaders_separated(params.a(), v, params.n_leaders(), tol),
        ],
    )
}

/// Checks the sufficient identifiability conditions of the hub model with a
/// null component: the three hub-model conditions over rows `0..=n_L`
/// plus separation of each leader from the null component.
pub fn check_null_hub_conditions(params: &NullHubParams, tol: f64) -> ConditionReport {
    let v = Variant::NullComponent;
    ConditionReport::new(
        v,
        tol,
        vec![
            rho_interior(params.rho(), v, tol),
            off_diagonal_below_one(params.a(), v, tol),
            leaders_separated(params.a(), v, params.n_leaders(), tol),
            null_separated(params, tol),
        ],
    )
}

pub fn check_conditions(params: &Params, tol: f64) -> ConditionReport {
    match params {
        Params::Hub(p) => check_hub_conditions(p, tol),
        Params::NullHub(p) => check_null_hub_conditions(p, tol),
    }
}

/// Probability of every binary outcome of a single group. Outcome `g` is
/// stored at index `sum_j g_j 2^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeTable {
    n: usize,
    probs: Vec<f64>,
}

impl OutcomeTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: &[u8]) -> f64 {
        self.probs[outcome_index(outcome)]
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn outcome(&self, index: usize) -> Vec<u8> {
        outcome_vector(index, self.n)
    }
}

pub fn outcome_index(outcome: &[u8]) -> usize {
    outcome
        .iter()
        .enumerate()
        .filter(|(_, &g)| g == 1)
        .map(|(j, _)| 1usize << j)
        .sum()
}

pub fn outcome_vector(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((index >> j) & 1) as u8).collect()
}

/// Enumerates the marginal distribution of one group over all `2^n`
/// outcomes. Refuses when `n > cap`.
pub fn outcome_distribution(params: &Params, cap: usize) -> Result<OutcomeTable> {
    let n = params.n();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let mut probs = vec![0.0; 1 << n];
    let mut component = Vec::with_capacity(1 << n);
    for (c, &rho) in params.rho().iter().enumerate() {
        if rho == 0.0 {
            continue;
        }
        component.clear();
        component.push(rho);
        for &p in params.a().row(c) {
            let half = component.len();
            component.extend_from_within(..);
            for (lo, hi) in (0..half).map(|m| (m, m + half)) {
                component[hi] *= p;
                component[lo] *= 1.0 - p;
            }
        }
        for (acc, v) in probs.iter_mut().zip(&component) {
            *acc += v;
        }
    }
    Ok(OutcomeTable { n, probs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distinctness {
    pub distinct: bool,
    pub max_gap: f64,
    /// Outcome attaining the largest probability gap.
    pub outcome: Vec<u8>,
}

/// Whether two parameter sets induce different outcome distributions, up
/// to `tol` on the largest per-outcome probability gap.
pub fn distributions_distinct(
    p1: &Params,
    p2: &Params,
    tol: f64,
    cap: usize,
) -> Result<Distinctness> {
    if p1.n() != p2.n() || p1.variant() != p2.variant() {
        return Err(Error::invalid(format!(
            "cannot compare a {} model on {} nodes with a {} model on {} nodes",
            p1.variant(),
            p1.n(),
            p2.variant(),
            p2.n()
        )));
    }
    let d1 = outcome_distribution(p1, cap)?;
    let d2 = outcome_distribution(p2, cap)?;
    let (index, max_gap) = d1
        .probs
        .iter()
        .zip(&d2.probs)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold(
            (0, 0.0),
            |best, (i, g)| if g > best.1 { (i, g) } else { best },
        );
    Ok(Distinctness {
        distinct: max_gap > tol,
        max_gap,
        outcome: outcome_vector(index, p1.n()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn hub_conditions_pass_with_witness() {
        let p = HubParams::new(vec![0.5, 0.5], array![[1.0, 0.5, 0.2], [0.5, 1.0, 0.7]]).unwrap();
        let r = check_hub_conditions(&p, DEFAULT_TOL);
        assert!(r.passed);
        match r.condition("iii").unwrap().witnesses.as_slice() {
            [Witness::PairSeparated {
                hub: 1,
                other: 2,
                follower: 3,
                gap,
            }] => {
                assert_relative_eq!(*gap, 0.5, epsilon = 1e-12)
            }
            other => panic!("unexpected witnesses {other:?}"),
        }
    }

    #[test]
    fn identical_rows_fail_separation() {
        let p = HubParams::new(vec![0.5, 0.5], array![[1.0, 0.5, 0.3], [0.5, 1.0, 0.3]]).unwrap();
        let r = check_hub_conditions(&p, DEFAULT_TOL);
        assert!(!r.passed);
        let iii = r.condition("iii").unwrap();
        assert!(!iii.passed);
        assert_eq!(
            iii.witnesses,
            vec![Witness::PairNotSeparated { hub: 1, other: 2 }]
        );
        assert!(r.condition("i").unwrap().passed);
    }

    #[test]
    fn boundary_values_fail() {
        let p = HubParams::new(vec![1.0, 0.0], array![[1.0, 1.0, 0.3], [0.5, 1.0, 0.2]]).unwrap();
        let r = check_hub_conditions(&p, DEFAULT_TOL);
        assert_eq!(r.condition("i").unwrap().witnesses.len(), 2);
        assert_eq!(
            r.condition("ii").unwrap().witnesses,
            vec![Witness::EntryNotBelowOne {
                label: 1,
                node: 2,
                value: 1.0
            }]
        );
    }

    #[test]
    fn null_conditions() {
        let p =
            NullHubParams::new(vec![0.5, 0.5], array![[0.1, 0.1, 0.1], [1.0, 0.5, 0.5]]).unwrap();
        let r = check_null_hub_conditions(&p, DEFAULT_TOL);
        assert!(r.passed);
        assert_eq!(
            r.condition("iv").unwrap().witnesses,
            vec![Witness::NullSeparated {
                hub: 1,
                followers: [2, 3]
            }]
        );

        let p =
            NullHubParams::new(vec![0.5, 0.5], array![[0.1, 0.5, 0.5], [1.0, 0.5, 0.5]]).unwrap();
        let r = check_null_hub_conditions(&p, DEFAULT_TOL);
        assert!(!r.condition("iv").unwrap().passed);
    }

    #[test]
    fn distribution_examples() {
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 0.5]])
            .unwrap()
            .into();
        let d = outcome_distribution(&p, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(d.prob(&[1, 0]), 0.5);
        assert_eq!(d.prob(&[1, 1]), 0.5);
        assert_eq!(d.prob(&[0, 1]), 0.0);
        assert_eq!(d.prob(&[0, 0]), 0.0);

        let p: Params = NullHubParams::new(vec![1.0], array![[0.5, 0.5]])
            .unwrap()
            .into();
        let d = outcome_distribution(&p, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(d.probs().iter().all(|&q| (q - 0.25).abs() < 1e-15));
        assert_relative_eq!(d.total_mass(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let a = Array2::from_elem((1, 15), 0.5);
        let p: Params = NullHubParams::new(vec![1.0], a).unwrap().into();
        assert_eq!(
            outcome_distribution(&p, DEFAULT_ENUMERATION_CAP).unwrap_err(),
            Error::EnumerationCap { n: 15, cap: 14 }
        );
    }

    #[test]
    fn identical_params_are_not_distinct() {
        let p: Params = HubParams::new(vec![0.3, 0.7], array![[1.0, 0.2, 0.4], [0.1, 1.0, 0.6]])
            .unwrap()
            .into();
        let d = distributions_distinct(&p, &p, DEFAULT_TOL, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(!d.distinct);
        assert_eq!(d.max_gap, 0.0);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 0.2]])
            .unwrap()
            .into();
        let q: Params = HubParams::new(vec![1.0], array![[1.0, 0.2, 0.3]])
            .unwrap()
            .into();
        assert!(distributions_distinct(&p, &q, DEFAULT_TOL, 14).is_err());
        let q: Params = NullHubParams::new(vec![1.0], array![[0.5, 0.2]])
            .unwrap()
            .into();
        assert!(distributions_distinct(&p, &q, DEFAULT_TOL, 14).is_err());
    }
}
