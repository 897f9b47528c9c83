//! Likelihoods of grouped data under the hub models and the closed-form
//! estimates of `A` and `rho` for a fixed labelling.
//!
//! All log-likelihoods use `0 * ln 0 = 0`; a zero-probability event with a
//! nonzero coefficient yields `-inf` instead of an error.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::math::{bernoulli_ln, log_sum_exp, neg_entropy};
use crate::model::{GroupedData, LabelAssignment, Params, Variant};

/// Fill value for off-diagonal entries of a row with no assigned groups.
pub const EMPTY_ROW_FILL: f64 = 0.5;

fn check_data_params(data: &GroupedData, params: &Params) -> Result<()> {
    if data.n() != params.n() {
        return Err(Error::invalid(format!(
            "data has {} nodes but parameters have {}",
            data.n(),
            params.n()
        )));
    }
    Ok(())
}

fn check_labels(data: &GroupedData, z: &LabelAssignment) -> Result<()> {
    if z.len() != data.len() {
        return Err(Error::invalid(format!(
            "{} labels for {} groups",
            z.len(),
            data.len()
        )));
    }
    if z.n_leaders() > data.n() {
        return Err(Error::invalid(format!(
            "n_L = {} exceeds the node count {}",
            z.n_leaders(),
            data.n()
        )));
    }
    Ok(())
}

fn check_labels_params(z: &LabelAssignment, params: &Params) -> Result<()> {
    if z.variant() != params.variant() || z.n_leaders() != params.n_leaders() {
        return Err(Error::invalid(format!(
            "labels are for the {} model with n_L = {}, parameters for the {} model with n_L = {}",
            z.variant(),
            z.n_leaders(),
            params.variant(),
            params.n_leaders()
        )));
    }
    Ok(())
}

/// Log-likelihood of one binary row under one row of `A`.
pub fn row_log_lik(row: &[u8], probs: impl IntoIterator<Item = f64>) -> f64 {
    row.iter()
        .zip(probs)
        .map(|(&g, p)| bernoulli_ln(g == 1, p))
        .sum()
}

fn complete_log_lik_matrix(data: &GroupedData, z: &LabelAssignment, a: ArrayView2<f64>) -> f64 {
    data.rows()
        .enumerate()
        .map(|(t, row)| row_log_lik(row, a.row(z.get(t)).iter().copied()))
        .sum()
}

/// Complete-data log-likelihood `L_G(A | z)`.
pub fn complete_data_log_lik(
    data: &GroupedData,
    z: &LabelAssignment,
    params: &Params,
) -> Result<f64> {
    check_data_params(data, params)?;
    check_labels(data, z)?;
    check_labels_params(z, params)?;
    Ok(complete_log_lik_matrix(data, z, params.a().view()))
}

/// Log of the mixture probability of a single group.
pub fn group_marginal_log_lik(row: &[u8], params: &Params) -> f64 {
    let a = params.a();
    let terms: Vec<f64> = params
        .rho()
        .iter()
        .enumerate()
        .map(|(c, &r)| {
            if r == 0.0 {
                f64::NEG_INFINITY
            } else {
                r.ln() + row_log_lik(row, a.row(c).iter().copied())
            }
        })
        .collect();
    log_sum_exp(&terms)
}

/// Marginal log-likelihood with the hub labels integrated out.
pub fn marginal_log_lik(data: &GroupedData, params: &Params) -> Result<f64> {
    check_data_params(data, params)?;
    Ok(data
        .rows()
        .map(|row| group_marginal_log_lik(row, params))
        .sum())
}

/// Closed-form estimates of `A` and `rho` for a fixed labelling.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelEstimate {
    pub variant: Variant,
    /// Estimated membership matrix, one row per component.
    pub a: Array2<f64>,
    /// Label frequencies.
    pub rho: Vec<f64>,
    /// Number of groups assigned to each component.
    pub counts: Vec<usize>,
    /// Components with no assigned groups; their rows hold the fill vector.
    pub empty: Vec<usize>,
}

impl LabelEstimate {
    pub fn n_leaders(&self) -> usize {
        match self.variant {
            Variant::Asymmetric => self.counts.len(),
            Variant::NullComponent => self.counts.len() - 1,
        }
    }

    /// Profile log-likelihood of the labelling that produced this estimate.
    ///
    /// Each component contributes `t_c * sum_j h(A_cj)` with
    /// `h(p) = p ln p + (1 - p) ln(1 - p)`, because the column sums of the
    /// assigned rows are `t_c * A_cj`.
    pub fn profile_log_lik(&self) -> f64 {
        self.counts
            .iter()
            .zip(self.a.rows())
            .filter(|(&t, _)| t > 0)
            .map(|(&t, row)| t as f64 * row.iter().map(|&p| neg_entropy(p)).sum::<f64>())
            .sum()
    }

    /// Wraps the estimate as model parameters. Fails if the labelling was
    /// infeasible, since the diagonal is then not saturated.
    pub fn to_params(&self) -> Result<Params> {
        Params::new(self.variant, self.rho.clone(), self.a.clone())
    }
}

/// Fills the row of an empty component: 1 on the hub's own column, 0.5
/// elsewhere.
pub(crate) fn fill_empty_row(a: &mut Array2<f64>, variant: Variant, c: usize) {
    a.row_mut(c).fill(EMPTY_ROW_FILL);
    if let Some(node) = variant.hub_node(c) {
        a[[c, node]] = 1.0;
    }
}

/// Maximum-likelihood `A` and `rho` given labels: each row of `A` is the
/// column mean of the groups with that label and `rho` is the label
/// frequency.
pub fn mle_given_labels(data: &GroupedData, z: &LabelAssignment) -> Result<LabelEstimate> {
    check_labels(data, z)?;
    let variant = z.variant();
    let k = variant.components(z.n_leaders());
    let mut a = Array2::<f64>::zeros((k, data.n()));
    let mut counts = vec![0usize; k];
    for (t, &c) in z.components().iter().enumerate() {
        counts[c] += 1;
        let mut row = a.row_mut(c);
        for &j in data.members(t) {
            row[j] += 1.0;
        }
    }
    let mut empty = Vec::new();
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            fill_empty_row(&mut a, variant, c);
            empty.push(c);
        } else {
            let inv = count as f64;
            a.row_mut(c).mapv_inplace(|s| s / inv);
        }
    }
    let total = data.len() as f64;
    let rho = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(LabelEstimate {
        variant,
        a,
        rho,
        counts,
        empty,
    })
}

/// Profile log-likelihood `L_G(z) = max_A L_G(A | z)` over the constrained
/// parameter space; `-inf` when a hub label names a node absent from its
/// group.
pub fn profile_log_lik(data: &GroupedData, z: &LabelAssignment) -> Result<f64> {
    check_labels(data, z)?;
    if !z.is_feasible(data) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(mle_given_labels(data, z)?.profile_log_lik())
}

/// Population version of the profile log-likelihood: observations replaced
/// by their conditional means `A[true_z[t]]`.
pub fn population_profile_lik(
    assign: &LabelAssignment,
    true_z: &LabelAssignment,
    params: &Params,
) -> Result<f64> {
    if assign.len() != true_z.len() {
        return Err(Error::invalid(format!(
            "assignment has {} labels, truth has {}",
            assign.len(),
            true_z.len()
        )));
    }
    check_labels_params(assign, params)?;
    check_labels_params(true_z, params)?;
    let a = params.a();
    let k = params.components();
    let mut a_bar = Array2::<f64>::zeros((k, params.n()));
    let mut counts = vec![0usize; k];
    for (&c, &c_true) in assign.components().iter().zip(true_z.components()) {
        counts[c] += 1;
        let mut row = a_bar.row_mut(c);
        row += &a.row(c_true);
    }
    Ok(counts
        .iter()
        .zip(a_bar.rows())
        .filter(|(&t, _)| t > 0)
        .map(|(&t, row)| {
            let t = t as f64;
            t * row.iter().map(|&s| neg_entropy(s / t)).sum::<f64>()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    use crate::model::{HubParams, NullHubParams};

    fn data(n: usize, rows: &[&[u8]]) -> GroupedData {
        let rows: Vec<Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
        GroupedData::from_rows(n, &rows).unwrap()
    }

    fn asym(labels: &[i64], n_l: usize) -> LabelAssignment {
        LabelAssignment::from_external(Variant::Asymmetric, n_l, labels).unwrap()
    }

    #[test]
    fn complete_data_single_term() {
        let d = data(2, &[&[1, 0]]);
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 0.5]])
            .unwrap()
            .into();
        let v = complete_data_log_lik(&d, &asym(&[1], 1), &p).unwrap();
        assert_relative_eq!(v, -std::f64::consts::LN_2, epsilon = 1e-15);

        let d = data(2, &[&[1, 1]]);
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 1.0]])
            .unwrap()
            .into();
        assert_eq!(complete_data_log_lik(&d, &asym(&[1], 1), &p).unwrap(), 0.0);
    }

    #[test]
    fn complete_data_infeasible_is_neg_inf() {
        let d = data(2, &[&[0, 1]]);
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 0.5]])
            .unwrap()
            .into();
        let v = complete_data_log_lik(&d, &asym(&[1], 1), &p).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn complete_data_dimension_mismatch() {
        let d = data(3, &[&[1, 0, 0]]);
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 0.5]])
            .unwrap()
            .into();
        assert!(matches!(
            complete_data_log_lik(&d, &asym(&[1], 1), &p),
            Err(Error::InvalidInput(_))
        ));
        let d = data(2, &[&[1, 0], &[1, 1]]);
        assert!(complete_data_log_lik(&d, &asym(&[1], 1), &p).is_err());
    }

    #[test]
    fn marginal_examples() {
        let d = data(2, &[&[1, 1]]);
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 0.3]])
            .unwrap()
            .into();
        assert_relative_eq!(
            marginal_log_lik(&d, &p).unwrap(),
            0.3f64.ln(),
            epsilon = 1e-14
        );

        let d = data(2, &[&[1, 0]]);
        let p: Params = HubParams::new(vec![0.5, 0.5], array![[1.0, 0.0], [0.0, 1.0]])
            .unwrap()
            .into();
        assert_relative_eq!(
            marginal_log_lik(&d, &p).unwrap(),
            0.5f64.ln(),
            epsilon = 1e-14
        );

        // No component can produce an empty group.
        let d = data(2, &[&[0, 0]]);
        assert_eq!(marginal_log_lik(&d, &p).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn degenerate_null_model_is_independent_bernoulli() {
        let pi: [f64; 3] = [0.1, 0.7, 0.35];
        let a = array![[0.1, 0.7, 0.35], [1.0, 0.2, 0.9]];
        let p: Params = NullHubParams::new(vec![1.0, 0.0], a).unwrap().into();
        let d = data(3, &[&[1, 0, 1], &[0, 0, 0], &[1, 1, 1]]);
        let expected: f64 = d
            .rows()
            .map(|r| {
                r.iter()
                    .zip(pi)
                    .map(|(&g, p)| if g == 1 { p.ln() } else { (1.0 - p).ln() })
                    .sum::<f64>()
            })
            .sum();
        assert_relative_eq!(marginal_log_lik(&d, &p).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn mle_examples() {
        let d = data(2, &[&[1, 1], &[1, 0]]);
        let e = mle_given_labels(&d, &asym(&[1, 1], 1)).unwrap();
        assert_eq!(e.a, array![[1.0, 0.5]]);
        assert_eq!(e.rho, vec![1.0]);

        let d = data(2, &[&[1, 0], &[0, 1]]);
        let e = mle_given_labels(&d, &asym(&[1, 2], 2)).unwrap();
        assert_eq!(e.a, array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(e.rho, vec![0.5, 0.5]);
        assert!(e.empty.is_empty());
    }

    #[test]
    fn mle_empty_cluster_fill() {
        let d = data(3, &[&[1, 0, 1], &[1, 1, 0]]);
        let e = mle_given_labels(&d, &asym(&[1, 1], 2)).unwrap();
        assert_eq!(e.empty, vec![1]);
        assert_eq!(e.a.row(1).to_vec(), vec![0.5, 1.0, 0.5]);
        assert_eq!(e.rho, vec![1.0, 0.0]);

        let z = LabelAssignment::from_external(Variant::NullComponent, 1, &[1, 1]).unwrap();
        let e = mle_given_labels(&d, &z).unwrap();
        assert_eq!(e.empty, vec![0]);
        assert_eq!(e.a.row(0).to_vec(), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn profile_examples() {
        let d = data(2, &[&[1, 1], &[1, 1]]);
        assert_eq!(profile_log_lik(&d, &asym(&[1, 1], 1)).unwrap(), 0.0);

        let d = data(2, &[&[1, 0], &[1, 1]]);
        let v = profile_log_lik(&d, &asym(&[1, 1], 1)).unwrap();
        assert_relative_eq!(v, -4.0 * std::f64::consts::LN_2 / 2.0, epsilon = 1e-14);
        assert_relative_eq!(v, -1.386_294_361_119_890_6, epsilon = 1e-14);
    }

    #[test]
    fn profile_of_infeasible_labels_is_neg_inf() {
        let d = data(2, &[&[0, 1]]);
        assert_eq!(
            profile_log_lik(&d, &asym(&[1], 2)).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn population_single_group_collapse() {
        let p: Params = HubParams::new(vec![0.5, 0.5], array![[1.0, 0.3, 0.6], [0.2, 1.0, 0.9]])
            .unwrap()
            .into();
        let z = asym(&[2], 2);
        let v = population_profile_lik(&z, &z, &p).unwrap();
        let expected: f64 = [0.2, 1.0, 0.9].iter().map(|&q| neg_entropy(q)).sum();
        assert_relative_eq!(v, expected, epsilon = 1e-14);
    }

    #[test]
    fn population_rejects_mismatch() {
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 0.3]])
            .unwrap()
            .into();
        assert!(population_profile_lik(&asym(&[1], 1), &asym(&[1, 1], 1), &p).is_err());
        assert!(population_profile_lik(&asym(&[1], 2), &asym(&[1], 2), &p).is_err());
    }
}
