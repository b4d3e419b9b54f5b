//! Runtime survey of the estimator layer: exponent fits, support-mass
//! algebra, zeta routes, and a full dimension report, printed against
//! their known closed-form values.

use fractal_contents::{
    assembled_zeta, basic_from_support, default_grid, dimension_report, fit_exponent,
    sample_profile, support_masses, Result, ReportOptions, SetModel, SteinerCoefficients,
};
use num_complex::Complex64;

fn main() -> Result<()> {
    let coeffs = SteinerCoefficients::new(2)?;

    // Cantor set: similarity exponent log_3 2, staircase oscillation.
    let cantor = SetModel::CantorTernary;
    let profile = cantor.profile(0)?;
    let samples = sample_profile(&profile, &default_grid(&cantor), false)?;
    let report = fit_exponent(&samples, 0)?;
    let expect = 2.0f64.ln() / 3.0f64.ln();
    println!(
        "cantor m0: fit {:.6} expect {:.6} oscillation {} contents [{:.4}, {:.4}]",
        report.exponent, expect, report.oscillation_flag, report.lower_content,
        report.upper_content
    );

    // Disc: support masses mu = (1, pi (R + eps)) and their inverse.
    let disc = SetModel::Disc { radius: 1.0 };
    let profiles: Vec<_> = (0..2).map(|i| disc.profile(i)).collect::<Result<_>>()?;
    let eps = 0.25;
    let mu = support_masses(&profiles, &coeffs, eps)?;
    let beta = basic_from_support(&mu, &coeffs, eps)?;
    println!(
        "disc support masses at eps={eps}: mu0 {:.12} (expect 1), mu1 {:.12} (expect {:.12})",
        mu[0],
        mu[1],
        std::f64::consts::PI * (1.0 + eps)
    );
    println!(
        "round trip back to basic functions: beta0 {:.12}, beta1 {:.12} (expect 1, pi)",
        beta[0], beta[1]
    );

    // Zeta routes: assembled zeta at s = 2 must equal the tube volume.
    let (z, _) = assembled_zeta(&disc, Complex64::new(2.0, 0.0), eps)?;
    let tube = 2.0 * std::f64::consts::PI * eps + std::f64::consts::PI * eps * eps;
    println!("assembled zeta at s=2: {:.12} vs tube volume {:.12}", z.re, tube);

    // Full report on the gasket: every route near log_2 3.
    let gasket = dimension_report(&SetModel::SierpinskiGasket, &ReportOptions::default())?;
    println!(
        "gasket report: max basic exponent {:.5}, support top {:.5}, volume {:?}, flag {}",
        gasket.max_basic_exponent,
        gasket.support[1].exponent,
        gasket.volume_dimension.map(|v| (v * 1e5).round() / 1e5),
        gasket.discrepancy_flag
    );
    println!("expected dimension log2(3) = {:.5}", 3.0f64.ln() / 2.0f64.ln());
    Ok(())
}
