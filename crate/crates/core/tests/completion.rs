use std::io::Write;

use iogd::completion::{
    ingest_ratings, numerical_rank, run_mc_tracking, svt, synthetic_stream, ProxConfig,
};
use iogd::{Error, Matrix};
use proptest::prelude::*;

fn matrix(r: usize, c: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-3.0f64..3.0, r * c).prop_map(move |v| Matrix::from_vec(r, c, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn svt_is_nonexpansive((a, b) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| (matrix(r, c), matrix(r, c))), lambda in 0.0f64..3.0) {
        let d = (svt(&a, lambda).unwrap() - svt(&b, lambda).unwrap()).norm();
        prop_assert!(d <= (&a - &b).norm() + 1e-10);
    }

    #[test]
    fn rank_shrinks_as_threshold_grows(y in matrix(5, 4), l1 in 0.0f64..3.0, extra in 0.0f64..3.0) {
        let r1 = numerical_rank(&svt(&y, l1).unwrap(), 1e-9);
        let r2 = numerical_rank(&svt(&y, l1 + extra).unwrap(), 1e-9);
        prop_assert!(r2 <= r1);
    }

    #[test]
    fn rmse_scales_with_data(scale in 0.1f64..10.0, seed in 0u64..50) {
        let w = &synthetic_stream(6, 5, 2, 0.0, 0.6, 1, seed).unwrap()[0];
        prop_assume!(w.observed() > 0);
        let x = Matrix::zeros(6, 5);
        let base = iogd::completion::rmse(&x, &w.ratings, &w.mask).unwrap();
        let scaled = iogd::completion::rmse(&x, &(&w.ratings * scale), &w.mask).unwrap();
        prop_assert!((scaled - scale * base).abs() <= 1e-12 * scaled.max(1.0));
    }
}

#[test]
fn drifting_stream_error_decays() {
    let stream = synthetic_stream(20, 20, 2, 0.01, 0.4, 20, 3).unwrap();
    let tr = run_mc_tracking(&stream, &ProxConfig::default()).unwrap();
    assert!(tr.rmse[19] < tr.rmse[0] / 5.0, "{:?}", tr.rmse);
    assert!(tr.rank[19] <= 20);
    assert_eq!(tr.objective.len(), 20);
}

#[test]
fn ingests_file_with_stable_indices() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let day = 86_400;
    for (u, i, r, t) in [(1, 10, 5, 0), (2, 10, 3, day), (1, 20, 4, 40 * day), (3, 30, 1, 40 * day)] {
        writeln!(file, "{u}::{i}::{r}::{t}").unwrap();
    }
    let windows = ingest_ratings(file.path(), 30.0, 10, 10).unwrap();
    assert_eq!(windows.len(), 2);
    assert_eq!(windows[0].ratings.shape(), (3, 3));
    assert_eq!(windows[0].ratings[(0, 0)], 5.0);
    assert_eq!(windows[0].ratings[(1, 0)], 3.0);
    assert_eq!(windows[1].ratings[(0, 1)], 4.0);
    assert_eq!(windows[1].ratings[(2, 2)], 1.0);
    assert_eq!((windows[0].index, windows[1].index), (1, 2));
}

#[test]
fn missing_file_is_io_error() {
    let err = ingest_ratings("/nonexistent/ratings.dat".as_ref(), 30.0, 10, 10).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
}
