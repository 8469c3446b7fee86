//! Shared fixtures for the criterion benches.

use mfkrig::{forrester, Dataset, ForresterLevel};

/// The 11-point low / 4-point high benchmark pair.
pub fn forrester_pair() -> (Dataset, Dataset) {
    let lf_x: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let lf_y: Vec<f64> = lf_x
        .iter()
        .map(|&x| forrester(x, ForresterLevel::Low).unwrap())
        .collect();
    let hf_x: Vec<f64> = vec![0.0, 0.4, 0.6, 1.0];
    let hf_y: Vec<f64> = hf_x
        .iter()
        .map(|&x| forrester(x, ForresterLevel::High).unwrap())
        .collect();
    (
        Dataset::from_1d(&lf_x, &lf_y, 1, "forrester-lf").unwrap(),
        Dataset::from_1d(&hf_x, &hf_y, 2, "forrester-hf").unwrap(),
    )
}

/// A smooth n-point, d-dimensional training set for kernel and fit benches.
pub fn synthetic(n: usize, d: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..d)
                .map(|j| ((i * d + j) as f64 * 0.7311).sin() * 2.0 + i as f64 * 0.05)
                .collect()
        })
        .collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|v| (0.8 * v).sin()).sum::<f64>())
        .collect();
    Dataset::from_rows(&rows, &ys, 2, "bench").unwrap()
}
