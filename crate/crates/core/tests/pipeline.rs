mod common;

use common::*;
use trackfda::experiment::{
    evaluate_clustered, evaluate_global, grid_search, length_study, window_storms, ExperimentConfig, KRange, ModelSet,
    ModelSource,
};
use trackfda::ingest::{
    build_matrices, filter_min_length, parse, parse_csv, parse_rsmc, train_test_split, windows_from_matrices,
    write_csv, DatasetMatrix, InputFormat, TrajectoryWindow,
};

fn lens(n: usize) -> Vec<usize> {
    (0..n).map(|i| 20 + (i * 7) % 45).collect()
}

#[test]
fn rsmc_text_round_trips_through_parser() {
    let storms = arc_storms(&lens(40), 1);
    let parsed = parse_rsmc(rsmc_text(&storms).as_bytes()).unwrap();
    assert_eq!(parsed.len(), storms.len());
    for (p, s) in parsed.iter().zip(&storms) {
        assert_eq!(p.storm_id, s.storm_id);
        assert_eq!(p.name, s.name);
        assert_eq!(p.len(), s.len());
        for (a, b) in p.records.iter().zip(&s.records) {
            assert_eq!(
                (a.time, a.lat, a.lon, a.central_pressure),
                (b.time, b.lat, b.lon, b.central_pressure)
            );
        }
    }
}

#[test]
fn csv_and_rsmc_agree() {
    let storms = arc_storms(&lens(25), 2);
    let from_rsmc = parse(rsmc_text(&storms).as_bytes(), InputFormat::Rsmc).unwrap();
    let mut buf = Vec::new();
    write_csv(&from_rsmc, &mut buf).unwrap();
    let from_csv = parse_csv(&buf[..]).unwrap();
    let w1 = window_storms(&from_rsmc, 32, 24).unwrap();
    let w2 = window_storms(&from_csv, 32, 24).unwrap();
    assert_eq!(w1, w2);
}

#[test]
fn matrices_survive_csv_files() {
    let storms = arc_storms(&lens(30), 3);
    let windows = window_storms(&storms, 32, 24).unwrap();
    assert_eq!(windows.len(), filter_min_length(&storms, 32).len());
    let (lat, lon) = build_matrices(&windows).unwrap();
    assert_eq!((lat.n_points(), lat.n_storms()), (32, windows.len()));
    let reread = |m: &DatasetMatrix| {
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        DatasetMatrix::read_csv(&buf[..]).unwrap()
    };
    let (lat2, lon2) = (reread(&lat), reread(&lon));
    assert_eq!(lat2, lat);
    assert_eq!(windows_from_matrices(&lat2, &lon2, 24).unwrap(), windows);
}

fn split(windows: &[TrajectoryWindow], seed: u64) -> (Vec<&TrajectoryWindow>, Vec<&TrajectoryWindow>) {
    let (tr, te) = train_test_split(windows.len(), 0.8, seed).unwrap();
    (
        tr.iter().map(|&i| &windows[i]).collect(),
        te.iter().map(|&i| &windows[i]).collect(),
    )
}

#[test]
fn sparse_pairs_fall_back_to_global() {
    let (windows, _) = two_regime(100, 32, 24, 0.05, 4);
    let (train, test) = split(&windows, 1);
    let config = ExperimentConfig {
        min_cluster_size: train.len() + 1,
        ..ExperimentConfig::default()
    };
    let global = evaluate_global(&train, &test, &config).unwrap();
    let clustered = evaluate_clustered(&train, &test, 3, 2, &config).unwrap();
    assert_eq!(global, clustered);
}

/// Source each coordinate should use, from training-label counts alone.
fn expected_sources(set: &ModelSet, lat_label: usize, lon_label: usize, min: usize) -> (ModelSource, ModelSource) {
    let c = set.clustered.as_ref().unwrap();
    let (la, lo) = (&c.lat_kmeans.labels, &c.lon_kmeans.labels);
    let pair = la
        .iter()
        .zip(lo)
        .filter(|&(&a, &b)| a == lat_label && b == lon_label)
        .count();
    if pair >= min {
        return (ModelSource::Pair, ModelSource::Pair);
    }
    let pick = |n: usize| {
        if n >= min {
            ModelSource::Cluster
        } else {
            ModelSource::Global
        }
    };
    (
        pick(la.iter().filter(|&&a| a == lat_label).count()),
        pick(lo.iter().filter(|&&b| b == lon_label).count()),
    )
}

#[test]
fn fallback_ladder_matches_label_counts() {
    let (windows, regimes) = two_regime(200, 32, 24, 0.05, 5);
    let refs: Vec<&TrajectoryWindow> = windows.iter().collect();
    let config = ExperimentConfig::default();
    let training = config.training().unwrap();
    let opts = config.kmeans_options(config.seed);
    let mut seen = std::collections::BTreeSet::new();
    for (k_lat, k_lon, min) in [(2, 2, 15), (2, 1, 150), (3, 4, 60), (4, 4, 90), (5, 5, 500)] {
        let set = ModelSet::fit_clustered(&refs, &training, config.ridge, k_lat, k_lon, opts, min).unwrap();
        for w in &windows {
            let f = set.forecast(w).unwrap();
            let (a, b) = f.pair.unwrap();
            assert_eq!((f.lat_source, f.lon_source), expected_sources(&set, a, b, min));
            assert_eq!(f.forecast.points.len(), 8);
            seen.insert(format!("{:?}/{:?}", f.lat_source, f.lon_source));
        }
    }
    for s in ["Pair/Pair", "Global/Cluster", "Global/Global"] {
        assert!(seen.contains(s), "{s} not exercised: {seen:?}");
    }

    // Lat clusters recover the regimes.
    let set = ModelSet::fit_clustered(&refs, &training, config.ridge, 2, 2, opts, 15).unwrap();
    let c = set.clustered.as_ref().unwrap();
    let label_of_regime0 = c.lat_kmeans.labels[regimes.iter().position(|&r| r == 0).unwrap()];
    for (l, r) in c.lat_kmeans.labels.iter().zip(&regimes) {
        assert_eq!(*l == label_of_regime0, *r == 0);
    }
}

#[test]
fn all_global_sources_match_global_model() {
    let (windows, _) = two_regime(80, 32, 24, 0.05, 9);
    let refs: Vec<&TrajectoryWindow> = windows.iter().collect();
    let config = ExperimentConfig::default();
    let training = config.training().unwrap();
    let clustered =
        ModelSet::fit_clustered(&refs, &training, config.ridge, 3, 3, config.kmeans_options(1), 1000).unwrap();
    let global = ModelSet::fit_global(&refs, &training, config.ridge).unwrap();
    for w in &windows {
        let (c, g) = (clustered.forecast(w).unwrap(), global.forecast(w).unwrap());
        assert_eq!((c.lat_source, c.lon_source), (ModelSource::Global, ModelSource::Global));
        assert_eq!(c.forecast, g.forecast);
    }
}

#[test]
fn model_set_json_round_trip() {
    let (windows, _) = two_regime(120, 32, 24, 0.05, 6);
    let refs: Vec<&TrajectoryWindow> = windows.iter().collect();
    let config = ExperimentConfig::default();
    let set = ModelSet::fit_clustered(
        &refs,
        &config.training().unwrap(),
        config.ridge,
        3,
        2,
        config.kmeans_options(7),
        10,
    )
    .unwrap();
    let json = serde_json::to_string(&set).unwrap();
    let back: ModelSet = serde_json::from_str(&json).unwrap();
    for w in &windows {
        assert_eq!(set.forecast(w).unwrap(), back.forecast(w).unwrap());
    }
}

#[test]
fn grid_over_arc_storms() {
    let storms = arc_storms(&lens(150), 7);
    let windows = window_storms(&storms, 32, 24).unwrap();
    let (train, test) = split(&windows, 42);
    let config = ExperimentConfig {
        k_lat: KRange::new(1, 4),
        k_lon: KRange::new(1, 4),
        min_cluster_size: 10,
        ..ExperimentConfig::default()
    };
    let report = grid_search(&train, &test, &config).unwrap();
    assert_eq!(report.mean.n_cells(), 16);
    assert_eq!(report.mean.get(1, 1), Some(report.global_mean_km));
    assert!(report.mean.km.iter().flatten().all(|v| v.is_finite() && *v >= 0.0));
    let csv = report.mean.to_csv();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("k_lon\\k_lat,1,2,3,4\n"));
}

#[test]
fn length_study_on_arc_storms() {
    let storms = arc_storms(&lens(200), 8);
    let config = ExperimentConfig {
        k_lat: KRange::new(1, 2),
        k_lon: KRange::new(1, 2),
        n_repetitions: 2,
        min_cluster_size: 10,
        ..ExperimentConfig::default()
    };
    let report = length_study(&storms, &[32, 40, 48], &config).unwrap();
    let expect = |m| filter_min_length(&storms, m).len();
    assert_eq!(report.entries.len(), 6);
    for e in &report.entries {
        assert_eq!(e.data_size, expect(e.min_len));
        assert_eq!(e.report.dataset_size, e.data_size);
        assert_eq!(e.total_len - e.predictor_len, 8);
        assert!(e.total_len <= e.min_len);
    }
}
