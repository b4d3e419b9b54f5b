//! Identity suites behind `fractal-cli verify`: each check recomputes a
//! quantity along two independent routes and compares, or probes an
//! inequality on real data. Failures are collected, never panicked.

use fractal_contents::{
    basic_from_support, lens_area, rasterize, distance_transform, footprint_mt,
    covering_packing_counts, parallel_volume, FractalString, Result, SetModel,
    SteinerCoefficients,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(suite: &str, name: &str, pass: bool, detail: String) -> CheckResult {
    CheckResult { suite: suite.into(), name: name.into(), pass, detail }
}

/// Exact equality of the two tube-volume routes for one-dimensional
/// strings: the basic-function integral against the direct length count.
pub fn steiner1d(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut strings: Vec<(String, FractalString)> = vec![
        ("cantor".into(), FractalString::cantor()),
        ("svc4".into(), FractalString::svc(4.0)?),
        ("svc5".into(), FractalString::svc(5.0)?),
        ("svc10".into(), FractalString::svc(10.0)?),
        ("geometric".into(), FractalString::geometric(0.4, 2)?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..100 {
        let count = rng.gen_range(1..40);
        let lengths: Vec<f64> =
            (0..count).map(|_| 10f64.powf(rng.gen_range(-6.0..0.0))).collect();
        strings.push((format!("random{n}"), FractalString::explicit(&lengths)?));
    }
    for (name, string) in &strings {
        let mut worst = 0.0f64;
        let mut worst_eps = 0.0;
        for k in 0..50 {
            let eps = 0.8 * 0.85f64.powi(k);
            let (steiner, direct) = string.tube_volume(eps)?;
            let err = (steiner - direct).abs() / (1.0 + direct.abs());
            if err > worst {
                worst = err;
                worst_eps = eps;
            }
        }
        out.push(check(
            "steiner1d",
            name,
            worst < 1e-12,
            format!("worst relative residual {worst:.3e} at eps = {worst_eps:.6e}"),
        ));
    }
    Ok(out)
}

/// Coefficient matrices: C B = I and the pinned planar entries.
pub fn matrices(dmax: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for d in 2..=dmax {
        let coeffs = SteinerCoefficients::new(d)?;
        let c = coeffs.c_matrix();
        let b = coeffs.b_matrix();
        let mut worst = 0.0f64;
        for (i, ci) in c.iter().enumerate() {
            for j in 0..d {
                let mut entry = 0.0;
                for (k, bk) in b.iter().enumerate() {
                    entry += ci[k] * bk[j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((entry - expect).abs());
            }
        }
        out.push(check(
            "matrices",
            &format!("product_identity_d{d}"),
            worst < 1e-12,
            format!("max |C B - I| entry = {worst:.3e}"),
        ));
    }
    let planar = SteinerCoefficients::new(2)?;
    let c10 = planar.c(1, 0);
    let b10 = planar.b(1, 0);
    out.push(check(
        "matrices",
        "planar_entries",
        (c10 - std::f64::consts::PI).abs() < 1e-15 && (b10 + std::f64::consts::PI).abs() < 1e-15,
        format!("c(1,0) = {c10}, b(1,0) = {b10}"),
    ));
    Ok(out)
}

/// Support-mass round trip on random basic-function vectors.
pub fn roundtrip(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for d in [2usize, 3] {
        let coeffs = SteinerCoefficients::new(d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ d as u64);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let eps = 10f64.powf(rng.gen_range(-3.0..1.0));
            let beta: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let mu: Vec<f64> = (0..d)
                .map(|i| {
                    (0..=i)
                        .map(|j| coeffs.c(i, j) * eps.powi((i - j) as i32) * beta[j])
                        .sum()
                })
                .collect();
            let back = basic_from_support(&mu, &coeffs, eps)?;
            for (a, b) in beta.iter().zip(back.iter()) {
                worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            }
        }
        out.push(check(
            "roundtrip",
            &format!("basic_support_d{d}"),
            worst < 1e-12,
            format!("worst relative defect {worst:.3e} over 200 trials"),
        ));
    }
    Ok(out)
}

/// Covering/packing chain on a rasterized model:
/// theta at 4t <= packing at t <= theta at t.
pub fn theta(model: &SetModel, h: f64) -> Result<Vec<CheckResult>> {
    let pad = 0.3;
    let grid = rasterize(model, h, pad)?;
    let field = distance_transform(&grid)?;
    let mut out = Vec::new();
    for t in [8.0 * h, 16.0 * h, 32.0 * h, 64.0 * h] {
        if 4.0 * t + 2.0 * h > pad {
            break;
        }
        let fp = footprint_mt(&field, t, 2.0 * h)?;
        if fp.cells.is_empty() {
            continue;
        }
        let (theta_t, packing) = covering_packing_counts(&field, &fp, t)?;
        let (theta_4t, _) = covering_packing_counts(&field, &fp, 4.0 * t)?;
        out.push(check(
            "theta",
            &format!("chain_t_{t:.5}"),
            theta_4t <= packing && packing <= theta_t,
            format!("theta(4t) = {theta_4t}, packing(t) = {packing}, theta(t) = {theta_t}"),
        ));
    }
    if out.is_empty() {
        out.push(check(
            "theta",
            "chain",
            false,
            "no probe scale fit inside the rasterized pad".into(),
        ));
    }
    Ok(out)
}

/// Lens packing bound V(A_t \ A) >= packing * (2 pi/3 - sqrt(3)/2) t^2
/// on disc, square boundary, and gasket rasters.
pub fn lens() -> Result<Vec<CheckResult>> {
    let kappa = lens_area();
    let h = 1.0 / 256.0;
    let pad = 0.3;
    let models = [
        ("disc", SetModel::Disc { radius: 1.0 }),
        ("square", SetModel::SquareBoundary { side: 1.0 }),
        ("gasket", SetModel::SierpinskiGasket),
    ];
    let mut out = Vec::new();
    for (name, model) in models {
        let grid = rasterize(&model, h, pad)?;
        let field = distance_transform(&grid)?;
        let mut worst_margin = f64::INFINITY;
        let mut detail_t = 0.0;
        for t in [10.0 * h, 20.0 * h, 40.0 * h, 0.2] {
            if t + 2.0 * h > pad {
                continue;
            }
            let fp = footprint_mt(&field, t, 2.0 * h)?;
            let (_, packing) = covering_packing_counts(&field, &fp, t)?;
            let volume = parallel_volume(&field, t)?;
            let bound = packing as f64 * kappa * t * t;
            let margin = volume - bound;
            if margin < worst_margin {
                worst_margin = margin;
                detail_t = t;
            }
        }
        out.push(check(
            "lens",
            name,
            worst_margin >= 0.0,
            format!("worst margin {worst_margin:.6e} at t = {detail_t:.5}"),
        ));
    }
    Ok(out)
}

/// Agreement of the three geometric zeta routes, and the Cantor total
/// gap length at s = 1.
pub fn zeta() -> Result<Vec<CheckResult>> {
    let cases =
        [("cantor", FractalString::cantor()), ("svc4", FractalString::svc(4.0)?)];
    let mut out = Vec::new();
    for (name, string) in cases {
        let eps = string.first_length();
        let floor = string.abscissa().max(0.0) + 0.1;
        let mut worst = 0.0f64;
        for k in 0..10 {
            let s = floor + (3.0 - floor) * (k as f64) / 9.0;
            let values = string.geometric_zeta(num_complex::Complex64::new(s, 0.0), eps)?;
            worst = worst.max(values.max_pairwise_residual());
        }
        out.push(check(
            "zeta",
            &format!("routes_{name}"),
            worst < 1e-8,
            format!("max pairwise residual {worst:.3e} over 10 points"),
        ));
    }
    let cantor = FractalString::cantor();
    let at_one = cantor
        .geometric_zeta(num_complex::Complex64::new(1.0, 0.0), cantor.first_length())?;
    let err = (at_one.dirichlet.re - 1.0).abs();
    out.push(check(
        "zeta",
        "cantor_total_length",
        err < 1e-12 && at_one.dirichlet.im.abs() < 1e-15,
        format!("zeta(1) = {} (total gap length 1)", at_one.dirichlet.re),
    ));
    Ok(out)
}
