//! Parameter generation for the simulation design and sampling of grouped
//! data from either model variant.

use std::ops::Range;

use ndarray::Array2;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroupedData, LabelAssignment, Params, Variant};
use crate::rng::{stream_rng, Stream};

/// Simulation design: sizes, probability ranges and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub n_leaders: usize,
    pub n: usize,
    /// Number of groups to sample.
    pub t: usize,
    pub variant: Variant,
    /// Hubless probability (null variant only).
    pub rho0: f64,
    /// Constant `pi_j` (null variant only).
    pub pi_const: f64,
    /// Range for followers preferring the row's leader.
    pub in_range: (f64, f64),
    /// Range for every other off-diagonal entry.
    pub out_range: (f64, f64),
    pub seed: u64,
}

impl Default for SimDesign {
    fn default() -> Self {
        Self {
            n_leaders: 10,
            n: 100,
            t: 1000,
            variant: Variant::Asymmetric,
            rho0: 0.2,
            pi_const: 0.05,
            in_range: (0.2, 0.4),
            out_range: (0.0, 0.2),
            seed: 0,
        }
    }
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        if self.n_leaders == 0 {
            return Err(Error::invalid("n_L must be at least 1"));
        }
        if self.n_leaders >= self.n {
            return Err(Error::invalid(format!(
                "n_L = {} must be smaller than n = {}",
                self.n_leaders, self.n
            )));
        }
        if self.n - self.n_leaders < self.n_leaders {
            return Err(Error::invalid(format!(
                "{} followers cannot be split into {} non-empty blocks",
                self.n - self.n_leaders,
                self.n_leaders
            )));
        }
        if self.t == 0 {
            return Err(Error::invalid("T must be at least 1"));
        }
        for (name, (lo, hi)) in [("in-range", self.in_range), ("out-range", self.out_range)] {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(Error::invalid(format!(
                    "{name} ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1"
                )));
            }
        }
        if self.out_range.1 > self.in_range.0 {
            return Err(Error::invalid(format!(
                "out-range {:?} must lie below in-range {:?}",
                self.out_range, self.in_range
            )));
        }
        if self.variant == Variant::NullComponent {
            if !(0.0..=1.0).contains(&self.rho0) {
                return Err(Error::invalid(format!(
                    "rho0 = {} outside [0, 1]",
                    self.rho0
                )));
            }
            if !(0.0..=1.0).contains(&self.pi_const) {
                return Err(Error::invalid(format!(
                    "pi = {} outside [0, 1]",
                    self.pi_const
                )));
            }
        }
        Ok(())
    }

    /// Preferred-follower block of each leader (0-based node ranges).
    pub fn follower_blocks(&self) -> Vec<Range<usize>> {
        follower_blocks(self.n_leaders, self.n)
    }
}

/// Splits the followers `n_leaders..n` into `n_leaders` contiguous blocks of
/// size `floor(m / n_leaders)`, the first `m % n_leaders` blocks taking one
/// extra follower.
pub fn follower_blocks(n_leaders: usize, n: usize) -> Vec<Range<usize>> {
    let m = n - n_leaders;
    let base = m / n_leaders;
    let extra = m % n_leaders;
    let mut start = n_leaders;
    (0..n_leaders)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Draws parameters from the design using its own parameter stream.
pub fn generate_params(design: &SimDesign) -> Result<Params> {
    generate_params_with(design, &mut stream_rng(design.seed, 0, Stream::Params))
}

/// Draws parameters: preferred followers from `in_range`, every other
/// off-diagonal entry (leader-to-leader included) from `out_range`, unit
/// diagonal, uniform `rho` over the leaders.
pub fn generate_params_with<R: Rng + ?Sized>(design: &SimDesign, rng: &mut R) -> Result<Params> {
    design.validate()?;
    let n_l = design.n_leaders;
    let n = design.n;
    let blocks = design.follower_blocks();
    let variant = design.variant;
    let k = variant.components(n_l);
    let mut a = Array2::<f64>::zeros((k, n));
    if variant == Variant::NullComponent {
        a.row_mut(0).fill(design.pi_const);
    }
    let (in_lo, in_hi) = design.in_range;
    let (out_lo, out_hi) = design.out_range;
    for (i, block) in blocks.iter().enumerate() {
        let c = variant.component_of_hub(i);
        for j in 0..n {
            a[[c, j]] = if j == i {
                1.0
            } else if block.contains(&j) {
                rng.gen_range(in_lo..in_hi)
            } else {
                rng.gen_range(out_lo..out_hi)
            };
        }
    }
    let rho = match variant {
        Variant::Asymmetric => vec![1.0 / n_l as f64; n_l],
        Variant::NullComponent => {
            let mut rho = vec![(1.0 - design.rho0) / n_l as f64; n_l + 1];
            rho[0] = design.rho0;
            rho
        }
    };
    Params::new(variant, rho, a)
}

/// Samples `t` groups and their true labels using the data stream of `seed`.
pub fn sample_data(params: &Params, t: usize, seed: u64) -> Result<(GroupedData, LabelAssignment)> {
    sample_data_with(params, t, &mut stream_rng(seed, 0, Stream::Data))
}

/// Samples `t` groups: a component from `rho`, then every node independently
/// with the probabilities of that component's row.
pub fn sample_data_with<R: Rng + ?Sized>(
    params: &Params,
    t: usize,
    rng: &mut R,
) -> Result<(GroupedData, LabelAssignment)> {
    if t == 0 {
        return Err(Error::invalid("T must be at least 1"));
    }
    let picker = WeightedIndex::new(params.rho())
        .map_err(|e| Error::invalid(format!("rho is not a valid distribution: {e}")))?;
    let a = params.a();
    let mut groups = Vec::with_capacity(t);
    let mut labels = Vec::with_capacity(t);
    for _ in 0..t {
        let c = picker.sample(rng);
        let members: Vec<usize> = a
            .row(c)
            .iter()
            .enumerate()
            .filter_map(|(j, &p)| (rng.gen::<f64>() < p).then_some(j))
            .collect();
        groups.push(members);
        labels.push(c);
    }
    let data = GroupedData::from_members(params.n(), groups)?;
    let z = LabelAssignment::new(params.variant(), params.n_leaders(), labels)?;
    Ok((data, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HubParams, NullHubParams};
    use ndarray::array;

    #[test]
    fn default_design_blocks() {
        let blocks = follower_blocks(10, 100);
        assert_eq!(blocks.len(), 10);
        assert!(blocks.iter().all(|b| b.len() == 9));
        assert_eq!(blocks[0], 10..19);
        assert_eq!(blocks[9], 91..100);
        assert_eq!(follower_blocks(1, 3), vec![1..3]);
        let uneven = follower_blocks(3, 14);
        assert_eq!(uneven, vec![3..7, 7..11, 11..14]);
    }

    #[test]
    fn generated_entries_respect_ranges() {
        let design = SimDesign {
            seed: 3,
            ..SimDesign::default()
        };
        let p = generate_params(&design).unwrap();
        let blocks = design.follower_blocks();
        for (i, block) in blocks.iter().enumerate() {
            for j in 0..design.n {
                let v = p.a()[[i, j]];
                if j == i {
                    assert_eq!(v, 1.0);
                } else if block.contains(&j) {
                    assert!((0.2..0.4).contains(&v), "A[{i}][{j}] = {v}");
                } else {
                    assert!((0.0..0.2).contains(&v), "A[{i}][{j}] = {v}");
                }
            }
        }
        assert!(p.rho().iter().all(|&r| r == 0.1));
    }

    #[test]
    fn single_leader_design() {
        let design = SimDesign {
            n_leaders: 1,
            n: 3,
            ..SimDesign::default()
        };
        let p = generate_params(&design).unwrap();
        assert_eq!(p.rho(), &[1.0]);
        assert_eq!(p.a()[[0, 0]], 1.0);
    }

    #[test]
    fn null_design_values() {
        let design = SimDesign {
            variant: Variant::NullComponent,
            ..SimDesign::default()
        };
        let p = generate_params(&design).unwrap();
        assert_eq!(p.rho()[0], 0.2);
        assert!(p.rho()[1..].iter().all(|&r| (r - 0.08).abs() < 1e-15));
        assert!(p.a().row(0).iter().all(|&v| v == 0.05));
        assert_eq!(p.a()[[1, 0]], 1.0);
    }

    #[test]
    fn invalid_designs() {
        let bad = [
            SimDesign {
                n_leaders: 0,
                ..SimDesign::default()
            },
            SimDesign {
                n_leaders: 100,
                ..SimDesign::default()
            },
            SimDesign {
                n_leaders: 60,
                ..SimDesign::default()
            },
            SimDesign {
                in_range: (0.1, 0.4),
                ..SimDesign::default()
            },
            SimDesign {
                out_range: (0.2, 0.2),
                ..SimDesign::default()
            },
            SimDesign {
                t: 0,
                ..SimDesign::default()
            },
        ];
        for d in bad {
            assert!(
                matches!(generate_params(&d), Err(Error::InvalidInput(_))),
                "{d:?}"
            );
        }
    }

    #[test]
    fn deterministic_generation() {
        let design = SimDesign {
            seed: 11,
            ..SimDesign::default()
        };
        assert_eq!(
            generate_params(&design).unwrap(),
            generate_params(&design).unwrap()
        );
        let p = generate_params(&design).unwrap();
        assert_eq!(
            sample_data(&p, 50, 5).unwrap(),
            sample_data(&p, 50, 5).unwrap()
        );
    }

    #[test]
    fn saturated_rows_sample_full_groups() {
        let p: Params = HubParams::new(vec![1.0], array![[1.0, 1.0, 1.0]])
            .unwrap()
            .into();
        let (d, z) = sample_data(&p, 20, 1).unwrap();
        assert!(d.rows().all(|r| r == [1, 1, 1]));
        assert!(z.components().iter().all(|&c| c == 0));

        let p: Params = NullHubParams::new(vec![1.0, 0.0], array![[0.0, 0.0], [1.0, 0.0]])
            .unwrap()
            .into();
        let (d, z) = sample_data(&p, 20, 1).unwrap();
        assert!((0..d.len()).all(|t| d.members(t).is_empty()));
        assert_eq!(z.external(), vec![0; 20]);
    }
}
