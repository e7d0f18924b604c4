//! Sweep plots: golden output, embedded data table and preconditions.

use std::path::PathBuf;

use hardylab_cli::plot::{emit_plot, parse_data_table, render_sweep_svg, PlotRow};
use hardylab_cli::CliError;

/// `ν_ε` quotients of the Euclidean point case in closed form.
fn euclid_rows() -> Vec<PlotRow> {
    [0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001]
        .into_iter()
        .map(|e: f64| {
            let (a, b) = ((1.0 + e) / 2.0, (1.0 + e / 2.0) / 2.0);
            PlotRow {
                epsilon: e,
                quotient: (a * a / (2.0 + e) + b * b * 2.0 / e) / (1.0 / (2.0 + e) + 2.0 / e),
                lower: 0.25,
                upper: a * a,
            }
        })
        .collect()
}

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/euclidean_sweep.svg")
}

#[test]
fn euclidean_sweep_matches_golden_file() {
    let svg = render_sweep_svg("euclidean-point sweep", &euclid_rows()).unwrap();
    if std::env::var_os("HARDYLAB_BLESS").is_some() {
        std::fs::write(golden(), &svg).unwrap();
    }
    assert_eq!(svg, std::fs::read_to_string(golden()).unwrap());
    assert_eq!(svg.matches("<polyline class=\"series\"").count(), 3);
}

#[test]
fn data_table_keeps_quotient_inside_bounds() {
    let svg = render_sweep_svg("euclidean-point sweep", &euclid_rows()).unwrap();
    let table = parse_data_table(&svg).unwrap();
    assert_eq!(table, euclid_rows());
    for r in &table {
        assert!(r.lower < r.quotient && r.quotient < r.upper, "{r:?}");
    }
    assert!(table.windows(2).all(|w| w[1].upper < w[0].upper));
}

#[test]
fn rendering_is_deterministic() {
    let a = render_sweep_svg("t", &euclid_rows()).unwrap();
    let b = render_sweep_svg("t", &euclid_rows()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_row_is_rejected() {
    let rows = &euclid_rows()[..1];
    assert!(matches!(render_sweep_svg("t", rows), Err(CliError::Plot(_))));
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("one.svg");
    assert!(emit_plot("t", rows, &path).is_err());
    assert!(!path.exists());
}
