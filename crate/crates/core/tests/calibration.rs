mod common;

use chrono::NaiveDate;
use common::random_params;
use pairstop::calibration::{spd_sqrt, DEFAULT_DT};
use pairstop::simulator::{PathConfig, PathGenerator};
use pairstop::{estimate, load_csv, load_csv_from, Error, MarketParams, PriceSeries, ValidatedParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const YEARS: f64 = 10.0;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 4).unwrap()
}

/// Ten years of daily closes simulated from `v`.
fn synthetic(v: &ValidatedParams, seed: u64) -> PriceSeries {
    let cfg = PathConfig { x1_0: 50.0, x2_0: 70.0, dt: DEFAULT_DT, t_max: YEARS, n_paths: 1, seed };
    let path = PathGenerator::new(v, &cfg).unwrap().path(0);
    PriceSeries::on_weekdays(start(), path.x1(), path.x2()).unwrap()
}

fn covariance(p: &MarketParams) -> [[f64; 2]; 2] {
    let s = p.sigma;
    let dot = |i: usize, j: usize| s[i][0] * s[j][0] + s[i][1] * s[j][1];
    [[dot(0, 0), dot(0, 1)], [dot(1, 0), dot(1, 1)]]
}

#[test]
fn reference_round_trip() {
    let v = MarketParams::REFERENCE.validate().unwrap();
    let truth = covariance(v.params());
    let series = synthetic(&v, 2010);
    assert_eq!(series.len(), 2521);
    let got = estimate(&series, DEFAULT_DT, 0.5, 0.001).unwrap();
    let a = got.diagnostics.a;
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let rel = (a[i][j] - truth[i][j]).abs() / truth[i][j].abs();
        assert!(rel <= 0.05, "a{}{}: {} vs {} ({rel:.4})", i + 1, j + 1, a[i][j], truth[i][j]);
    }
    let p = v.params();
    assert!((got.params.mu1 - p.mu1).abs() <= 3.0 * (truth[0][0] / YEARS).sqrt());
    assert!((got.params.mu2 - p.mu2).abs() <= 3.0 * (truth[1][1] / YEARS).sqrt());
    assert_eq!((got.params.rho, got.params.k), (0.5, 0.001));
    assert_eq!(estimate(&synthetic(&v, 2010), DEFAULT_DT, 0.5, 0.001).unwrap(), got);
}

/// With a fixed relative tolerance meaningless when `a12` is near zero, the
/// random sets are held to four standard errors of each sample moment.
#[test]
fn random_round_trips_within_sampling_error() {
    for (i, (p, v)) in random_params(31, 20).into_iter().enumerate() {
        let series = synthetic(&v, 100 + i as u64);
        let rho = p.rho + 0.5;
        let got = estimate(&series, DEFAULT_DT, rho, p.k).unwrap();
        let n = (series.len() - 1) as f64;
        let t = covariance(&p);
        let a = got.diagnostics.a;
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let se = ((t[i][i] * t[j][j] + t[i][j] * t[i][j]) / n).sqrt();
            assert!((a[i][j] - t[i][j]).abs() <= 4.0 * se, "{p:?}: a{i}{j} {} vs {}", a[i][j], t[i][j]);
        }
        assert!((got.params.mu1 - p.mu1).abs() <= 4.0 * (t[0][0] / YEARS).sqrt(), "{p:?}");
        assert!((got.params.mu2 - p.mu2).abs() <= 4.0 * (t[1][1] / YEARS).sqrt(), "{p:?}");
        assert!(got.diagnostics.reconstruction_residual < 1e-10);
        assert_eq!(got.diagnostics.symmetry_residual, 0.0);
    }
}

#[test]
fn rescaling_one_asset_changes_nothing() {
    let v = MarketParams::REFERENCE.validate().unwrap();
    let series = synthetic(&v, 5);
    let base = estimate(&series, DEFAULT_DT, 0.5, 0.001).unwrap();
    let scaled = |c: f64| {
        let p1: Vec<f64> = series.price1().iter().map(|x| c * x).collect();
        let s = PriceSeries::new(series.dates().to_vec(), p1, series.price2().to_vec()).unwrap();
        estimate(&s, DEFAULT_DT, 0.5, 0.001).unwrap()
    };
    // A power of two scales exactly.
    assert_eq!(scaled(4.0).params, base.params);
    let other = scaled(3.7).params;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs();
    assert!(close(other.mu1, base.params.mu1) && close(other.mu2, base.params.mu2));
    for i in 0..2 {
        for j in 0..2 {
            assert!(close(other.sigma[i][j], base.params.sigma[i][j]));
        }
    }
}

#[test]
fn spd_square_root_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let (x, y, z) = (rng.random_range(0.01..2.0), rng.random_range(-1.0..1.0), rng.random_range(0.01..2.0));
        // A = M M^T for a random lower-triangular M is SPD.
        let a = [[x * x, x * y], [x * y, y * y + z * z]];
        let s = spd_sqrt(a).unwrap();
        assert_eq!(s[0][1], s[1][0]);
        assert!(s[0][0] > 0.0 && s[0][0] * s[1][1] - s[0][1] * s[1][0] > 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let back = s[i][0] * s[j][0] + s[i][1] * s[j][1];
                let scale = (a[i][i] * a[j][j]).sqrt();
                assert!((back - a[i][j]).abs() <= 1e-10 * scale);
            }
        }
    }
    // A symmetric positive-definite sigma is its own root of sigma sigma^T.
    let sigma = MarketParams::REFERENCE.sigma;
    let root = spd_sqrt(covariance(&MarketParams::REFERENCE)).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((root[i][j] - sigma[i][j]).abs() < 1e-14);
        }
    }
    assert!(spd_sqrt([[1.0, 1.0], [1.0, 1.0]]).is_err());
}

#[test]
fn degenerate_series_are_rejected() {
    let flat = PriceSeries::on_weekdays(start(), vec![100.0; 50], vec![100.0; 50]).unwrap();
    assert!(matches!(estimate(&flat, DEFAULT_DT, 0.5, 0.001), Err(Error::DegenerateDiffusion { .. })));

    let v = MarketParams::REFERENCE.validate().unwrap();
    let s = synthetic(&v, 9);
    let twin: Vec<f64> = s.price1().iter().map(|x| 2.0 * x).collect();
    let locked = PriceSeries::new(s.dates().to_vec(), s.price1().to_vec(), twin).unwrap();
    assert!(matches!(estimate(&locked, DEFAULT_DT, 0.5, 0.001), Err(Error::DegenerateDiffusion { .. })));

    assert!(matches!(estimate(&s, DEFAULT_DT, 0.0, 0.001), Err(Error::DiscountTooLow { .. })));
    assert!(estimate(&s, 0.0, 0.5, 0.001).is_err());
}

#[test]
fn csv_file_round_trip_and_split() {
    let v = MarketParams::REFERENCE.validate().unwrap();
    let s = synthetic(&v, 11);
    let path = std::env::temp_dir().join(format!("pairstop-calibration-{}.csv", std::process::id()));
    s.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let back = load_csv(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back, s);

    let first = s.head_fraction(0.5).unwrap();
    let second = s.tail_fraction(0.5).unwrap();
    assert_eq!(first.len(), s.len() / 2);
    assert_eq!(first.dates()[0], s.dates()[0]);
    assert!(second.dates()[0] > *first.dates().last().unwrap());
    assert!(load_csv(std::env::temp_dir().join("pairstop-does-not-exist.csv")).is_err());
}

#[test]
fn out_of_order_dates_are_rejected_with_line() {
    let text = "date,price1,price2\n2010-01-05,1,1\n2010-01-06,1,1\n2010-01-04,1,1\n";
    assert_eq!(load_csv_from(text.as_bytes()), Err(Error::Order { line: 4 }));
}
