use hubnet_core::{run_replicates, FitConfig, SimDesign, Variant};

fn summary_with_threads(threads: usize, variant: Variant) -> hubnet_core::ReplicateSummary {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    let design = SimDesign {
        n_leaders: 4,
        n: 40,
        t: 200,
        variant,
        seed: 17,
        ..SimDesign::default()
    };
    let fit = FitConfig {
        restarts: 5,
        ..FitConfig::default()
    };
    pool.install(|| run_replicates(&design, &fit, 6)).unwrap()
}

#[test]
fn summaries_do_not_depend_on_thread_count() {
    for variant in [Variant::Asymmetric, Variant::NullComponent] {
        let one = summary_with_threads(1, variant);
        let four = summary_with_threads(4, variant);
        assert_eq!(one, four);
        assert_eq!(one.records.len(), 6);
        assert!(one.records.iter().enumerate().all(|(i, r)| r.index == i));
        assert_eq!(
            one.rmse_includes_null_row,
            variant == Variant::NullComponent
        );
    }
}

#[test]
fn estimated_labels_do_not_beat_known_labels_on_average() {
    let design = SimDesign {
        n_leaders: 5,
        n: 50,
        t: 300,
        seed: 2,
        ..SimDesign::default()
    };
    let s = run_replicates(&design, &FitConfig::default(), 10).unwrap();
    let slack = 2.0 * (s.rmse.se(10) + s.rmse_star.se(10));
    assert!(s.rmse.mean >= s.rmse_star.mean - slack);
    assert!((0.0..=1.0).contains(&s.mislabel.mean));
}
