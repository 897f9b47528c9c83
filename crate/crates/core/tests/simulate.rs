use hubnet_core::rng::{stream_rng, Stream};
use hubnet_core::simulate::sample_data_with;
use hubnet_core::{generate_params, sample_data, HubParams, Params, SimDesign, Variant};
use ndarray::array;

#[test]
fn column_means_within_binomial_bands() {
    let params: Params = HubParams::new(vec![1.0], array![[1.0, 0.5, 0.5]])
        .unwrap()
        .into();
    let t = 100_000;
    let (data, _) = sample_data(&params, t, 9).unwrap();
    for (j, &p) in [1.0, 0.5, 0.5].iter().enumerate() {
        let mean = (0..t).filter(|&s| data.contains(s, j)).count() as f64 / t as f64;
        let band = 3.0 * (p * (1.0 - p) / t as f64).sqrt();
        assert!(
            (mean - p).abs() <= band,
            "node {j}: {mean} vs {p} +- {band}"
        );
    }
}

#[test]
fn label_frequencies_converge() {
    let t = 100_000;
    let mut inside = 0;
    let runs = 100;
    for variant in [Variant::Asymmetric, Variant::NullComponent] {
        let design = SimDesign {
            n_leaders: 3,
            n: 6,
            variant,
            ..SimDesign::default()
        };
        let params = generate_params(&design).unwrap();
        for seed in 0..runs {
            let (_, z) =
                sample_data_with(&params, t, &mut stream_rng(seed, 0, Stream::Data)).unwrap();
            let ok = params.rho().iter().enumerate().all(|(c, &r)| {
                let freq = z.components().iter().filter(|&&x| x == c).count() as f64 / t as f64;
                (freq - r).abs() <= 4.0 * (r * (1.0 - r) / t as f64).sqrt()
            });
            inside += usize::from(ok);
        }
    }
    assert!(
        inside as f64 >= 0.99 * 2.0 * runs as f64,
        "{inside} runs inside the band"
    );
}

#[test]
fn generated_groups_contain_their_hub() {
    for variant in [Variant::Asymmetric, Variant::NullComponent] {
        let design = SimDesign {
            variant,
            seed: 4,
            ..SimDesign::default()
        };
        let params = generate_params(&design).unwrap();
        let (data, z) = sample_data(&params, design.t, 4).unwrap();
        assert!(z.is_feasible(&data));
        assert_eq!(data.len(), 1000);
        assert_eq!(data.n(), 100);
    }
}

#[test]
fn streams_are_reproducible_and_independent() {
    let design = SimDesign {
        seed: 21,
        ..SimDesign::default()
    };
    let p1 = generate_params(&design).unwrap();
    let p2 = generate_params(&design).unwrap();
    assert_eq!(p1, p2);
    assert_eq!(
        sample_data(&p1, 200, 3).unwrap(),
        sample_data(&p2, 200, 3).unwrap()
    );
    assert_ne!(
        sample_data(&p1, 200, 3).unwrap(),
        sample_data(&p1, 200, 4).unwrap()
    );
    let other = generate_params(&SimDesign { seed: 22, ..design }).unwrap();
    assert_ne!(p1, other);
}
