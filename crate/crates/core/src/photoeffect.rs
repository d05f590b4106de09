//! The electron-pair ejection model: an electron pair straddles the
//! conductor surface at separation delta, the surface charge splits with
//! fraction t on the inner sphere, and the work integral of the restoring
//! force across the gap gives the minimal ejection energy, which scales
//! like q e / r^4 for large conductors.

use crate::domain::{ChargeComponent, ChargeDistribution};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::report::fmt6;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// A configured pair model. `t` is the inner-sphere fraction of the
/// surface charge, fixed by the zero-force balance; values outside [0, 1]
/// are physically meaningless but carried with `t_in_range = false`.
#[derive(Debug, Clone, Copy)]
pub struct PairModel {
    pub r: f64,
    pub delta: f64,
    pub k: f64,
    pub q: f64,
    pub e: f64,
    pub t: f64,
    pub t_in_range: bool,
}

impl PairModel {
    pub fn new(r: f64, delta: f64, k: f64, q: f64, e: f64) -> Result<PairModel> {
        let t = pair_parameter_t(r, delta, k)?;
        Ok(PairModel {
            r,
            delta,
            k,
            q,
            e,
            t,
            t_in_range: (0.0..=1.0).contains(&t),
        })
    }
}

/// Solves the balance equation
/// (3t - 4 pi k^2 r^2) / (3 - 4 pi k^2 r^2) = -(r+d)^2 / (r+2d)^2
/// for the surface-charge fraction t. Linear in t; the residual of the
/// defining equation is zero to rounding.
pub fn pair_parameter_t(r: f64, delta: f64, k: f64) -> Result<f64> {
    let s = FOUR_PI * k * k * r * r;
    let denominator = 3.0 - s;
    if denominator <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let rhs = -((r + delta) / (r + 2.0 * delta)).powi(2);
    Ok((s + denominator * rhs) / 3.0)
}

/// Residual of the defining equation at a given t (diagnostic).
pub fn pair_equation_residual(r: f64, delta: f64, k: f64, t: f64) -> f64 {
    let s = FOUR_PI * k * k * r * r;
    (3.0 * t - s) / (3.0 - s) + ((r + delta) / (r + 2.0 * delta)).powi(2)
}

/// Restoring force on the outer electron at radius R in [r, r + delta]:
/// q e [1/(R+d)^2 - (r+d)^2 / ((r+2d)^2 R^2)]. Nonpositive on the whole
/// interval and zero exactly at R = r + delta (the pair is blocked).
pub fn restoring_force(big_r: f64, model: &PairModel) -> Result<f64> {
    let (r, d) = (model.r, model.delta);
    if !(r..=r + d).contains(&big_r) {
        return Err(Error::OutOfInterval(big_r));
    }
    let c = ((r + d) / (r + 2.0 * d)).powi(2);
    Ok(model.q * model.e * (1.0 / ((big_r + d) * (big_r + d)) - c / (big_r * big_r)))
}

/// The three force contributions at radius R: interior ions, inner-sphere
/// surface electrons, and the outer electron of the pair:
/// (-q e k^2 |E| / (R^2 (C - k^2 |E|)),  q e t C / (R^2 (C - k^2 |E|)),
///  q e / (R+d)^2). The three sum to `restoring_force` at the solved t.
pub fn pair_total_force_components(big_r: f64, model: &PairModel) -> Result<(f64, f64, f64)> {
    let (r, d) = (model.r, model.delta);
    if !(r..=r + d).contains(&big_r) {
        return Err(Error::OutOfInterval(big_r));
    }
    let capacity = r;
    let volume = FOUR_PI / 3.0 * r.powi(3);
    let den = capacity - model.k * model.k * volume;
    if den <= 0.0 {
        return Err(Error::DenominatorNonpositive);
    }
    let qe = model.q * model.e;
    let ion = -qe * model.k * model.k * volume / (big_r * big_r * den);
    let surface = qe * model.t * capacity / (big_r * big_r * den);
    let outer = qe / ((big_r + d) * (big_r + d));
    Ok((ion, surface, outer))
}

fn threshold_antiderivative(big_r: f64, r: f64, d: f64) -> f64 {
    let c = ((r + d) / (r + 2.0 * d)).powi(2);
    -1.0 / (big_r + d) + c / big_r
}

/// Minimal ejection energy: the work of the restoring force across the
/// gap, E = -q e \int_r^{r+d} (1/(R+d)^2 - (r+d)^2/((r+2d)^2 R^2)) dR,
/// by the closed-form antiderivative. Strictly positive.
pub fn threshold_energy(r: f64, delta: f64, q: f64, e: f64) -> f64 {
    -q * e * (threshold_antiderivative(r + delta, r, delta) - threshold_antiderivative(r, r, delta))
}

/// Same integral by adaptive quadrature (cross-check path).
pub fn threshold_energy_quadrature(r: f64, delta: f64, q: f64, e: f64) -> f64 {
    let c = ((r + delta) / (r + 2.0 * delta)).powi(2);
    let integrand =
        move |big_r: f64| 1.0 / ((big_r + delta) * (big_r + delta)) - c / (big_r * big_r);
    -q * e
        * adaptive_simpson(
            &integrand,
            r,
            r + delta,
            1e-14 * threshold_energy(r, delta, 1.0, 1.0).abs().max(1e-300),
        )
}

/// Least-squares slope of log E against log r over the given radii at
/// fixed delta; tends to -4 for r >> delta.
pub fn threshold_scaling(r_values: &[f64], delta: f64, q: f64, e: f64) -> f64 {
    let points: Vec<(f64, f64)> = r_values
        .iter()
        .map(|&r| (r.ln(), threshold_energy(r, delta, q, e).ln()))
        .collect();
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// The pair-displaced equilibrium distribution: uniform volume charge Q,
/// surface charge t q_hat at r, surface charge (1-t) q_hat at r + delta.
pub fn pair_distribution(
    r: f64,
    delta: f64,
    t: f64,
    q_hat: f64,
    q_interior: f64,
) -> Result<ChargeDistribution> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    Ok(ChargeDistribution::new(vec![
        ChargeComponent::VolumeShell { a: 0.0, b: r, charge: q_interior },
        ChargeComponent::SurfaceSphere { radius: r, charge: t * q_hat },
        ChargeComponent::SurfaceSphere { radius: r + delta, charge: (1.0 - t) * q_hat },
    ]))
}

/// Human-readable photoeffect report, 6 significant digits.
pub fn photoeffect_report(model: &PairModel, scan_radii: &[f64]) -> String {
    let e_min = threshold_energy(model.r, model.delta, model.q, model.e);
    let slope = threshold_scaling(scan_radii, model.delta, model.q, model.e);
    format!(
        "t = {}\nt_in_range = {}\nE_min = {}\nscaling_exponent = {}\n",
        fmt6(model.t),
        model.t_in_range,
        fmt6(e_min),
        fmt6(slope)
    )
}

/// Pair force-profile export: rows (R, F_total, ion, surface, outer),
/// 12 significant digits.
pub fn pair_force_table_csv(model: &PairModel, samples: usize) -> Result<String> {
    use crate::report::fmt12;
    let mut out = String::from("R,F_total,ion,surface,outer\n");
    for i in 0..samples {
        let big_r = model.r + model.delta * i as f64 / (samples - 1) as f64;
        let total = restoring_force(big_r, model)?;
        let (ion, surface, outer) = pair_total_force_components(big_r, model)?;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt12(big_r),
            fmt12(total),
            fmt12(ion),
            fmt12(surface),
            fmt12(outer)
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parameter_reference_value() {
        let t = pair_parameter_t(1.0, 0.1, 0.4).unwrap();
        assert!((t - 0.393_088).abs() < 1e-6, "t = {t}");
        assert!(pair_equation_residual(1.0, 0.1, 0.4, t).abs() <= 1e-12);
        // high-precision oracle: s = 4 pi 0.16, t = (s + (3-s)(-(1.1/1.2)^2))/3
        let s = FOUR_PI * 0.16;
        let oracle = (s - (3.0 - s) * (1.1f64 / 1.2).powi(2)) / 3.0;
        assert!((t - oracle).abs() < 1e-15);
    }

    #[test]
    fn small_k_admits_no_physical_t() {
        let model = PairModel::new(1.0, 0.1, 0.0, 1.0, 1.0).unwrap();
        // 3t = -3 (1.1/1.2)^2, so t = -0.840278
        assert!((model.t - -(1.1f64 / 1.2).powi(2)).abs() < 1e-12);
        assert!((model.t - -0.840_278).abs() < 1e-6);
        assert!(!model.t_in_range);
        let ok = PairModel::new(1.0, 0.1, 0.4, 1.0, 1.0).unwrap();
        assert!(ok.t_in_range);
    }

    #[test]
    fn degenerate_denominator_is_rejected() {
        // 4 pi k^2 r^2 >= 3 at k = 0.5, r = 1
        assert!(matches!(
            pair_parameter_t(1.0, 0.1, 0.5),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn t_monotone_in_k() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=44 {
            let k = 0.01 * i as f64;
            let t = pair_parameter_t(1.0, 0.1, k).unwrap();
            assert!(t > prev, "t not increasing at k = {k}");
            prev = t;
        }
    }

    #[test]
    fn restoring_force_reference_values() {
        let model = PairModel::new(1.0, 0.1, 0.4, 1.0, 1.0).unwrap();
        let at_r = restoring_force(1.0, &model).unwrap();
        assert!((at_r - -0.013_831).abs() < 1e-6, "F(r) = {at_r}");
        let at_balance = restoring_force(1.1, &model).unwrap();
        assert!(at_balance.abs() < 1e-15, "F(r+d) = {at_balance}");
        assert!(restoring_force(1.05, &model).unwrap() < 0.0);
        assert!(matches!(
            restoring_force(1.2, &model),
            Err(Error::OutOfInterval(_))
        ));
    }

    #[test]
    fn restoring_force_negative_across_parameter_scan() {
        for &r in &[0.5, 1.0, 2.0] {
            for &dr in &[0.05, 0.1] {
                for &kr in &[0.35, 0.44] {
                    let model = PairModel::new(r, dr * r, kr / r, 1.0, 1.0).unwrap();
                    for i in 0..100 {
                        let big_r = r + model.delta * i as f64 / 99.0;
                        let f = restoring_force(big_r, &model).unwrap();
                        assert!(
                            f <= 1e-15,
                            "positive restoring force at r={r}, d/r={dr}, kr={kr}, R={big_r}: {f}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn component_split_sums_to_the_total() {
        let model = PairModel::new(1.0, 0.1, 0.4, 1.0, 1.0).unwrap();
        for i in 0..=10 {
            let big_r = 1.0 + 0.1 * i as f64 / 10.0;
            let total = restoring_force(big_r, &model).unwrap();
            let (ion, surface, outer) = pair_total_force_components(big_r, &model).unwrap();
            assert!(
                (ion + surface + outer - total).abs() <= 1e-10,
                "split mismatch at R = {big_r}"
            );
        }
        // outer term at R = r
        let (_, _, outer) = pair_total_force_components(1.0, &model).unwrap();
        assert!((outer - 1.0 / 1.21).abs() < 1e-14);
    }

    #[test]
    fn ion_and_surface_terms_vanish_in_the_coulomb_limit() {
        // k = 0 with t forced to 0: no interior ions, no inner-sphere charge
        let model = PairModel { r: 1.0, delta: 0.1, k: 0.0, q: 1.0, e: 1.0, t: 0.0, t_in_range: true };
        let (ion, surface, outer) = pair_total_force_components(1.05, &model).unwrap();
        assert_eq!(ion, 0.0);
        assert_eq!(surface, 0.0);
        assert!(outer > 0.0);
    }

    #[test]
    fn threshold_energy_reference_value_and_quadrature_agreement() {
        let closed = threshold_energy(1.0, 0.1, 1.0, 1.0);
        assert!((closed - 6.3131e-4).abs() < 1e-8, "E = {closed}");
        let quad = threshold_energy_quadrature(1.0, 0.1, 1.0, 1.0);
        assert!(
            ((closed - quad) / closed).abs() <= 1e-10,
            "closed {closed} vs quadrature {quad}"
        );
        assert!(closed > 0.0);
        // linear in q e
        let doubled = threshold_energy(1.0, 0.1, 2.0, 1.0);
        assert!((doubled - 2.0 * closed).abs() < 1e-18);
    }

    #[test]
    fn integrand_vanishes_at_the_balance_point() {
        let model = PairModel::new(1.0, 0.1, 0.4, 1.0, 1.0).unwrap();
        assert!(restoring_force(1.1, &model).unwrap().abs() < 1e-15);
    }

    #[test]
    fn scaling_slope_is_minus_four() {
        let slope = threshold_scaling(&[10.0, 20.0, 40.0, 80.0], 0.1, 1.0, 1.0);
        assert!((slope - -4.0).abs() < 0.1, "slope = {slope}");
        // joint scaling of r and delta is an exact 1/length homogeneity
        let e1 = threshold_energy(1.0, 0.1, 1.0, 1.0);
        let e2 = threshold_energy(3.0, 0.3, 1.0, 1.0);
        assert!((e2 - e1 / 3.0).abs() < 1e-15 + 1e-12 * e1);
    }

    #[test]
    fn pair_distribution_structure_and_totals() {
        let d = pair_distribution(1.0, 0.1, 0.393_088, 3.032_201, -2.032_201).unwrap();
        assert_eq!(d.components.len(), 3);
        assert!((d.total() - 1.0).abs() < 1e-9);
        // t = 1 collapses the outer sphere charge to zero
        let d1 = pair_distribution(1.0, 0.1, 1.0, 3.0, -2.0).unwrap();
        assert_eq!(d1.components[2].charge(), 0.0);
        // t = 0 puts all surface charge at r + delta
        let d0 = pair_distribution(1.0, 0.1, 0.0, 3.0, -2.0).unwrap();
        assert_eq!(d0.components[1].charge(), 0.0);
        assert_eq!(d0.components[2].charge(), 3.0);
        assert!(matches!(
            pair_distribution(1.0, 0.1, -0.2, 3.0, -2.0),
            Err(Error::TOutOfRange(_))
        ));
    }

    #[test]
    fn report_and_table_shapes() {
        let model = PairModel::new(1.0, 0.1, 0.4, 1.0, 1.0).unwrap();
        let report = photoeffect_report(&model, &[10.0, 20.0, 40.0, 80.0]);
        assert!(report.contains("t = 0.393088"));
        assert!(report.contains("t_in_range = true"));
        assert!(report.contains("E_min = 0.000631313"));
        let table = pair_force_table_csv(&model, 11).unwrap();
        assert_eq!(table.lines().next().unwrap(), "R,F_total,ion,surface,outer");
        assert_eq!(table.lines().count(), 12);
    }
}
