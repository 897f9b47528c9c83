//! Domain types shared by every part of the crate.
//!
//! Internally everything is 0-based. A *component* is a row of the
//! membership matrix `A`:
//!
//! * asymmetric model: component `c` is the hub node `c`, `c < n_L`;
//! * null-component model: component `0` is the hubless component (its row
//!   is `pi`) and component `c >= 1` is the hub node `c - 1`.
//!
//! Externally (files, reports) hubs use 1-based node numbers and the hubless
//! label is `0`, see [`Variant::external_label`].

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(rho) == 1`.
pub const RHO_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "asymmetric")]
    Asymmetric,
    #[serde(rename = "null", alias = "null-component")]
    NullComponent,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Asymmetric => "asymmetric",
            Variant::NullComponent => "null",
        }
    }

    /// Number of mixture components (rows of `A`).
    pub fn components(self, n_leaders: usize) -> usize {
        match self {
            Variant::Asymmetric => n_leaders,
            Variant::NullComponent => n_leaders + 1,
        }
    }

    /// The hub node owning `component`, or `None` for the null component.
    #[inline]
    pub fn hub_node(self, component: usize) -> Option<usize> {
        match self {
            Variant::Asymmetric => Some(component),
            Variant::NullComponent => component.checked_sub(1),
        }
    }

    /// The component whose hub is `node` (0-based leader index).
    #[inline]
    pub fn component_of_hub(self, node: usize) -> usize {
        match self {
            Variant::Asymmetric => node,
            Variant::NullComponent => node + 1,
        }
    }

    pub fn external_label(self, component: usize) -> u32 {
        match self {
            Variant::Asymmetric => component as u32 + 1,
            Variant::NullComponent => component as u32,
        }
    }

    pub fn component_from_external(self, label: i64, n_leaders: usize) -> Option<usize> {
        let c = match self {
            Variant::Asymmetric if label >= 1 => label - 1,
            Variant::NullComponent if label >= 0 => label,
            _ => return None,
        };
        let c = usize::try_from(c).ok()?;
        (c < self.components(n_leaders)).then_some(c)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymmetric" => Ok(Variant::Asymmetric),
            "null" | "null-component" => Ok(Variant::NullComponent),
            other => Err(Error::invalid(format!("unknown variant {other:?}"))),
        }
    }
}

/// `T` observed groups over `n` nodes, stored densely with a per-group list
/// of present nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupedData {
    n: usize,
    cells: Vec<u8>,
    members: Vec<Vec<usize>>,
}

impl GroupedData {
    /// Builds the dataset from dense 0/1 rows.
    pub fn from_rows(n: usize, rows: &[Vec<u8>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("node count must be positive"));
        }
        let mut cells = Vec::with_capacity(rows.len() * n);
        let mut members = Vec::with_capacity(rows.len());
        for (t, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "group {t} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let mut present = Vec::new();
            for (j, &g) in row.iter().enumerate() {
                match g {
                    0 => {}
                    1 => present.push(j),
                    other => {
                        return Err(Error::invalid(format!(
                            "group {t}, node {j}: entry {other} is not 0/1"
                        )))
                    }
                }
            }
            cells.extend_from_slice(row);
            members.push(present);
        }
        Ok(Self { n, cells, members })
    }

    /// Builds the dataset from per-group lists of present nodes.
    pub fn from_members(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("node count must be positive"));
        }
        let mut cells = vec![0u8; groups.len() * n];
        let mut members = Vec::with_capacity(groups.len());
        for (t, mut g) in groups.into_iter().enumerate() {
            g.sort_unstable();
            g.dedup();
            if let Some(&j) = g.last() {
                if j >= n {
                    return Err(Error::invalid(format!("group {t}: node {j} out of range")));
                }
            }
            for &j in &g {
                cells[t * n + j] = 1;
            }
            members.push(g);
        }
        Ok(Self { n, cells, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of groups `T`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn row(&self, t: usize) -> &[u8] {
        &self.cells[t * self.n..(t + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.cells.chunks_exact(self.n)
    }

    /// Sorted indices of the nodes present in group `t`.
    pub fn members(&self, t: usize) -> &[usize] {
        &self.members[t]
    }

    #[inline]
    pub fn contains(&self, t: usize, node: usize) -> bool {
        self.cells[t * self.n + node] == 1
    }

    /// Leaders (nodes `< n_leaders`) present in group `t`.
    pub fn present_leaders(&self, t: usize, n_leaders: usize) -> &[usize] {
        let m = &self.members[t];
        let end = m.partition_point(|&j| j < n_leaders);
        &m[..end]
    }
}

fn check_rho(rho: &[f64], expected: usize) -> Result<()> {
    if rho.len() != expected {
        return Err(Error::invalid(format!(
            "rho has length {}, expected {expected}",
            rho.len()
        )));
    }
    if let Some(r) = rho.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::invalid(format!(
            "rho entry {r} is negative or not finite"
        )));
    }
    let sum: f64 = rho.iter().sum();
    if (sum - 1.0).abs() > RHO_SUM_TOL {
        return Err(Error::invalid(format!("rho sums to {sum}, expected 1")));
    }
    Ok(())
}

fn check_matrix(a: &Array2<f64>, rows: usize, variant: Variant) -> Result<()> {
    if a.nrows() != rows {
        return Err(Error::invalid(format!(
            "A has {} rows, expected {rows}",
            a.nrows()
        )));
    }
    if let Some(((i, j), v)) = a
        .indexed_iter()
        .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
    {
        return Err(Error::invalid(format!(
            "A[{i}][{j}] = {v} is outside [0, 1]"
        )));
    }
    for c in 0..rows {
        if let Some(node) = variant.hub_node(c) {
            if node >= a.ncols() {
                return Err(Error::invalid("more leaders than nodes"));
            }
            if a[[c, node]] != 1.0 {
                return Err(Error::invalid(format!(
                    "diagonal entry for hub {} must be 1, found {}",
                    node + 1,
                    a[[c, node]]
                )));
            }
        }
    }
    Ok(())
}

/// Parameters of the asymmetric hub model: `rho` over the `n_L` leaders and
/// the `n_L x n` membership matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct HubParams {
    rho: Vec<f64>,
    a: Array2<f64>,
}

impl HubParams {
    pub fn new(rho: Vec<f64>, a: Array2<f64>) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::invalid(
                "the asymmetric model needs at least one leader",
            ));
        }
        check_rho(&rho, a.nrows())?;
        check_matrix(&a, rho.len(), Variant::Asymmetric)?;
        Ok(Self { rho, a })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn n_leaders(&self) -> usize {
        self.rho.len()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

/// Parameters of the hub model with a null component. Index 0 of `rho` is
/// the hubless probability and row 0 of `a` is `pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct NullHubParams {
    rho: Vec<f64>,
    a: Array2<f64>,
}

impl NullHubParams {
    pub fn new(rho: Vec<f64>, a: Array2<f64>) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::invalid(
                "rho must contain at least the null component",
            ));
        }
        check_rho(&rho, a.nrows())?;
        check_matrix(&a, rho.len(), Variant::NullComponent)?;
        Ok(Self { rho, a })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn pi(&self) -> ArrayView1<'_, f64> {
        self.a.row(0)
    }

    pub fn n_leaders(&self) -> usize {
        self.rho.len() - 1
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

/// Parameters of either model variant.
#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Hub(HubParams),
    NullHub(NullHubParams),
}

impl Params {
    /// Validates and wraps `(rho, a)` for the given variant.
    pub fn new(variant: Variant, rho: Vec<f64>, a: Array2<f64>) -> Result<Self> {
        Ok(match variant {
            Variant::Asymmetric => Params::Hub(HubParams::new(rho, a)?),
            Variant::NullComponent => Params::NullHub(NullHubParams::new(rho, a)?),
        })
    }

    pub fn variant(&self) -> Variant {
        match self {
            Params::Hub(_) => Variant::Asymmetric,
            Params::NullHub(_) => Variant::NullComponent,
        }
    }

    pub fn rho(&self) -> &[f64] {
        match self {
            Params::Hub(p) => p.rho(),
            Params::NullHub(p) => p.rho(),
        }
    }

    pub fn a(&self) -> &Array2<f64> {
        match self {
            Params::Hub(p) => p.a(),
            Params::NullHub(p) => p.a(),
        }
    }

    pub fn n(&self) -> usize {
        self.a().ncols()
    }

    pub fn n_leaders(&self) -> usize {
        match self {
            Params::Hub(p) => p.n_leaders(),
            Params::NullHub(p) => p.n_leaders(),
        }
    }

    pub fn components(&self) -> usize {
        self.rho().len()
    }
}

impl From<HubParams> for Params {
    fn from(p: HubParams) -> Self {
        Params::Hub(p)
    }
}

impl From<NullHubParams> for Params {
    fn from(p: NullHubParams) -> Self {
        Params::NullHub(p)
    }
}

/// Hub label of every group, stored as 0-based components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelAssignment {
    variant: Variant,
    n_leaders: usize,
    components: Vec<usize>,
}

impl LabelAssignment {
    pub fn new(variant: Variant, n_leaders: usize, components: Vec<usize>) -> Result<Self> {
        let k = variant.components(n_leaders);
        if let Some((t, c)) = components.iter().enumerate().find(|(_, &c)| c >= k) {
            return Err(Error::invalid(format!(
                "group {t}: component {c} outside 0..{k}"
            )));
        }
        Ok(Self {
            variant,
            n_leaders,
            components,
        })
    }

    /// Parses labels in the external convention (hubs 1..n_L, 0 = hubless).
    pub fn from_external(variant: Variant, n_leaders: usize, labels: &[i64]) -> Result<Self> {
        let components = labels
            .iter()
            .enumerate()
            .map(|(t, &l)| {
                variant.component_from_external(l, n_leaders).ok_or_else(|| {
                    Error::invalid(format!(
                        "group {t}: label {l} outside the {variant} label domain for n_L = {n_leaders}"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            variant,
            n_leaders,
            components,
        })
    }

    pub fn external(&self) -> Vec<u32> {
        self.components
            .iter()
            .map(|&c| self.variant.external_label(c))
            .collect()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n_leaders(&self) -> usize {
        self.n_leaders
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[usize] {
        &self.components
    }

    #[inline]
    pub fn get(&self, t: usize) -> usize {
        self.components[t]
    }

    /// First group whose hub label names a node absent from the group.
    pub fn first_infeasible(&self, data: &GroupedData) -> Option<usize> {
        self.components
            .iter()
            .enumerate()
            .find_map(|(t, &c)| match self.variant.hub_node(c) {
                Some(node) if node >= data.n() || !data.contains(t, node) => Some(t),
                _ => None,
            })
    }

    pub fn is_feasible(&self, data: &GroupedData) -> bool {
        self.first_infeasible(data).is_none()
    }
}
