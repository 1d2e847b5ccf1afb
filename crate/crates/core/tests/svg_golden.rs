use std::fs;
use std::path::PathBuf;

use xbar_margin::io::{render_svg, Chart, Scale, Series, Style};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(name: &str, svg: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, svg).unwrap();
    }
    let want = fs::read_to_string(&path).unwrap();
    assert!(svg == want, "{name} differs from golden file; rerun with UPDATE_GOLDEN=1 to accept");
}

#[test]
fn flat_unit_margin() {
    let mut chart = Chart::new("ideal", "R_on (ohm)", "k'/k", Scale::Log10);
    chart.push(Series::line("ideal", vec![(1e4, 1.0), (1e6, 1.0), (1e8, 1.0)]));
    check("flat.svg", &render_svg(&chart).unwrap());
}

#[test]
fn mixed_styles() {
    let mut chart = Chart::new("styles", "cells per column N", "k'/k", Scale::Log10);
    chart.x_ticks = Some(vec![64.0, 256.0, 1024.0, 4096.0]);
    chart.push(Series::line("line", vec![(64.0, 0.98), (256.0, 0.9), (1024.0, 0.7), (4096.0, 0.45)]));
    chart.push(
        Series::line("dashed", vec![(64.0, 0.99), (256.0, 0.95), (1024.0, 0.85), (4096.0, 0.6)])
            .with_style(Style::Dashed),
    );
    chart.push(
        Series::line("markers", vec![(64.0, 0.97), (1024.0, 0.72), (4096.0, 0.5)]).with_style(Style::Markers),
    );
    check("styles.svg", &render_svg(&chart).unwrap());
}
