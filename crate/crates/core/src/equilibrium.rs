//! Equilibrium charge distributions: the unique minimizer of the k-energy
//! over distributions with fixed total charge. Covers the screened ball
//! (closed forms A, Q, q-hat), the Coulombic nested-spheres construction
//! with its alternating induced charges, convexity and constancy checks,
//! and the equilibrium report/CSV exports.

use nalgebra::{DMatrix, DVector};

use crate::domain::{ChargeComponent, ChargeDistribution, ConductorGeometry, RadialGrid};
use crate::error::{Error, Result};
use crate::functional::{assemble_energy_matrix, energy};
use crate::radial::{coulomb_superposition, solve_radial_potential, PotentialField};
use crate::report::{fmt12, fmt6};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// A solved equilibrium: optimal charges, constant potential value A,
/// interior volume total Q, surface total q-hat, and energy W.
#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub charges: ChargeDistribution,
    pub potential: PotentialField,
    /// Constant potential value on the conductor.
    pub a: f64,
    /// Total interior (volume) charge.
    pub q_interior: f64,
    /// Total surface charge.
    pub q_surface: f64,
    /// Potential energy W = l(U) of the minimizer.
    pub energy: f64,
}

/// Closed forms for the ball: A = q/(C - k^2 |E|), Q = -q k^2 |E| / (C - k^2 |E|),
/// q_hat = q - Q, with C = r and |E| = 4 pi r^3 / 3. Q + q_hat = q exactly.
pub fn ball_closed_form(r: f64, q: f64, k: f64) -> Result<(f64, f64, f64)> {
    let volume = FOUR_PI / 3.0 * r.powi(3);
    let denominator = r - k * k * volume;
    if denominator <= 0.0 {
        return Err(Error::DenominatorNonpositive);
    }
    let a = q / denominator;
    let q_interior = -q * k * k * volume / denominator;
    Ok((a, q_interior, q - q_interior))
}

/// The ball equilibrium as an explicit distribution: uniform volume charge Q
/// plus surface charge q_hat at radius r. At k = 0 the volume component is
/// identically zero and omitted.
pub fn equilibrium_distribution_ball(r: f64, q: f64, k: f64) -> Result<ChargeDistribution> {
    let (_, q_interior, q_surface) = ball_closed_form(r, q, k)?;
    let mut components = Vec::new();
    if q_interior != 0.0 {
        components.push(ChargeComponent::VolumeShell { a: 0.0, b: r, charge: q_interior });
    }
    components.push(ChargeComponent::SurfaceSphere { radius: r, charge: q_surface });
    Ok(ChargeDistribution::new(components))
}

/// Default basis for a ball: equal-width volume shells covering [0, r]
/// plus the surface sphere at r. The minimizer must rediscover the
/// uniform-volume-plus-surface structure, which lies in this span.
pub fn ball_basis(r: f64, grid: &RadialGrid) -> Result<Vec<ChargeComponent>> {
    let h = grid.spacing()?;
    let max_shells = (r / (5.0 * h)).floor() as usize;
    if max_shells == 0 {
        return Err(Error::UnresolvedComponent(
            "grid too coarse for a volume-shell basis".into(),
        ));
    }
    let n_shells = max_shells.min(16);
    let w = r / n_shells as f64;
    let mut basis = Vec::with_capacity(n_shells + 1);
    for i in 0..n_shells {
        basis.push(ChargeComponent::VolumeShell {
            a: i as f64 * w,
            b: (i + 1) as f64 * w,
            charge: 1.0,
        });
    }
    basis.push(ChargeComponent::SurfaceSphere { radius: r, charge: 1.0 });
    Ok(basis)
}

fn scaled(component: &ChargeComponent, c: f64) -> ChargeComponent {
    match *component {
        ChargeComponent::VolumeShell { a, b, .. } => {
            ChargeComponent::VolumeShell { a, b, charge: c }
        }
        ChargeComponent::SurfaceSphere { radius, .. } => {
            ChargeComponent::SurfaceSphere { radius, charge: c }
        }
    }
}

/// Minimizes c^T G c over coefficients on the given unit-charge basis
/// subject to sum c = q, through the symmetric bordered (saddle) system
///
/// ```text
///     [ G   -1 ] [ c ]   [  0 ]
///     [ -1'  0 ] [ A ] = [ -q ]
/// ```
///
/// whose multiplier A is the constant conductor potential.
pub fn minimize_on_basis(
    basis: &[ChargeComponent],
    grid: &RadialGrid,
    k: f64,
    q: f64,
) -> Result<(Vec<f64>, f64)> {
    let g = assemble_energy_matrix(basis, grid, k)?;
    let m = basis.len();
    let mut saddle = DMatrix::zeros(m + 1, m + 1);
    saddle.view_mut((0, 0), (m, m)).copy_from(&g.entries);
    for i in 0..m {
        saddle[(i, m)] = -1.0;
        saddle[(m, i)] = -1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = -q;
    let solution = saddle
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("saddle system is singular".into()))?;
    let coefficients: Vec<f64> = solution.rows(0, m).iter().cloned().collect();
    Ok((coefficients, solution[m]))
}

/// Solves the k-equilibrium problem on the geometry. Balls use the
/// shell-plus-surface basis; nested shells are Coulombic (k = 0 only).
pub fn solve_equilibrium(
    geometry: &ConductorGeometry,
    q: f64,
    k: f64,
    grid: &RadialGrid,
) -> Result<EquilibriumSolution> {
    match geometry {
        ConductorGeometry::Ball { radius } => {
            let basis = ball_basis(*radius, grid)?;
            let (coefficients, a) = minimize_on_basis(&basis, grid, k, q)?;
            let components: Vec<ChargeComponent> = basis
                .iter()
                .zip(&coefficients)
                .map(|(b, &c)| scaled(b, c))
                .collect();
            let charges = ChargeDistribution::new(components);
            let potential = solve_radial_potential(grid, &charges, k)?;
            let q_interior: f64 = charges
                .components
                .iter()
                .filter(|c| matches!(c, ChargeComponent::VolumeShell { .. }))
                .map(|c| c.charge())
                .sum();
            let q_surface = charges.total() - q_interior;
            let energy = energy(&charges, grid, k)?;
            Ok(EquilibriumSolution { charges, potential, a, q_interior, q_surface, energy })
        }
        ConductorGeometry::NestedShells { .. } => {
            if k != 0.0 {
                return Err(Error::UnsupportedGeometry(
                    "nested-shell equilibrium is Coulombic; set k = 0".into(),
                ));
            }
            let face_charges = nested_spheres_charges(geometry, q)?;
            let components: Vec<ChargeComponent> = face_charges
                .iter()
                .map(|&(radius, charge)| ChargeComponent::SurfaceSphere { radius, charge })
                .collect();
            let charges = ChargeDistribution::new(components);
            let potential = coulomb_superposition(&face_charges, grid);
            // potential value on the innermost conductor
            let a = potential.eval(0.0);
            let energy: f64 = face_charges
                .iter()
                .map(|&(radius, charge)| charge * potential.eval(radius))
                .sum();
            Ok(EquilibriumSolution {
                charges,
                potential,
                a,
                q_interior: 0.0,
                q_surface: q,
                energy,
            })
        }
        ConductorGeometry::VoxelSet(_) => Err(Error::UnsupportedGeometry(
            "voxel equilibria are handled by the voxel solver".into(),
        )),
    }
}

/// Coulombic induced charges on nested conducting shells around a charged
/// core: solves {core carries q; each shell neutral; potential equal on the
/// two faces of each shell; a bare outer sphere stays neutral} with
/// U(rho) = sum q_n min(1/r_n, 1/rho). Returns (radius, charge) per face,
/// the core surface first.
pub fn nested_spheres_charges(
    geometry: &ConductorGeometry,
    q: f64,
) -> Result<Vec<(f64, f64)>> {
    let ConductorGeometry::NestedShells {
        inner_radius,
        shell_faces,
        outer_sphere_radius,
    } = geometry
    else {
        return Err(Error::UnsupportedGeometry(
            "nested-spheres solve requires a NestedShells geometry".into(),
        ));
    };
    let mut radii = Vec::new();
    for &(a, b) in shell_faces {
        radii.push(a);
        radii.push(b);
    }
    if let Some(r) = outer_sphere_radius {
        radii.push(*r);
    }
    let n = radii.len();
    if n == 0 {
        return Ok(vec![(*inner_radius, q)]);
    }
    // potential coefficient of a unit charge at radius r_j evaluated at rho
    let coef = |r_j: f64, rho: f64| (1.0 / r_j).min(1.0 / rho);
    let mut system = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut row = 0;
    for (i, &(a, b)) in shell_faces.iter().enumerate() {
        // neutrality of shell i
        system[(row, 2 * i)] = 1.0;
        system[(row, 2 * i + 1)] = 1.0;
        row += 1;
        // equal potential on the shell's two faces
        for (j, &r_j) in radii.iter().enumerate() {
            system[(row, j)] = coef(r_j, a) - coef(r_j, b);
        }
        rhs[row] = -q * (coef(*inner_radius, a) - coef(*inner_radius, b));
        row += 1;
    }
    if outer_sphere_radius.is_some() {
        // a bare isolated sphere carries no net charge
        system[(row, n - 1)] = 1.0;
    }
    let charges = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("nested-shell face system is singular".into()))?;
    let mut out = vec![(*inner_radius, q)];
    out.extend(radii.iter().zip(charges.iter()).map(|(&r, &s)| (r, s)));
    Ok(out)
}

/// Total variation sum |q_n| of a face-charge list.
pub fn total_variation(face_charges: &[(f64, f64)]) -> f64 {
    face_charges.iter().map(|&(_, s)| s.abs()).sum()
}

/// Energy convexity probe: returns (W((l1+l2)/2), (W(l1)+W(l2))/2).
/// For k below the Poincare constant the first never exceeds the second.
pub fn convexity_check(
    l1: &ChargeDistribution,
    l2: &ChargeDistribution,
    grid: &RadialGrid,
    k: f64,
) -> Result<(f64, f64)> {
    let mid = ChargeDistribution::linear_combination(0.5, l1, 0.5, l2);
    let w_mid = energy(&mid, grid, k)?;
    let w1 = energy(l1, grid, k)?;
    let w2 = energy(l2, grid, k)?;
    Ok((w_mid, 0.5 * (w1 + w2)))
}

/// Largest deviation |U - A| over interior conductor nodes, as a fraction
/// of |A|. Node radii within one cell of a material surface are skipped
/// (the interpolated potential kinks there).
pub fn constancy_check(
    solution: &EquilibriumSolution,
    geometry: &ConductorGeometry,
) -> Result<f64> {
    let grid = &solution.potential.grid;
    let h = grid.spacing()?;
    let faces = geometry.faces()?;
    let mut worst: f64 = 0.0;
    for i in 1..grid.len() {
        let rho = grid.radius(i);
        if !grid.is_conductor_node(i) {
            continue;
        }
        if faces.iter().any(|&f| (f - rho).abs() <= 1.5 * h) {
            continue;
        }
        worst = worst.max((solution.potential.values[i] - solution.a).abs());
    }
    Ok(worst / solution.a.abs().max(f64::MIN_POSITIVE))
}

/// Human-readable equilibrium report, 6 significant digits.
pub fn equilibrium_report(
    solution: &EquilibriumSolution,
    geometry: &ConductorGeometry,
) -> Result<String> {
    let deviation = constancy_check(solution, geometry)?;
    Ok(format!(
        "A = {}\nQ = {}\nq_hat = {}\nW = {}\nconstancy_deviation = {}\ngrid_nodes = {}\n",
        fmt6(solution.a),
        fmt6(solution.q_interior),
        fmt6(solution.q_surface),
        fmt6(solution.energy),
        fmt6(deviation),
        solution.potential.grid.len()
    ))
}

/// Charge-table export: rows (radius_or_shell, charge), 12 significant digits.
pub fn charge_table_csv(charges: &ChargeDistribution) -> String {
    let mut out = String::from("radius_or_shell,charge\n");
    for c in &charges.components {
        match *c {
            ChargeComponent::VolumeShell { a, b, charge } => {
                out.push_str(&format!("[{};{}],{}\n", fmt12(a), fmt12(b), fmt12(charge)));
            }
            ChargeComponent::SurfaceSphere { radius, charge } => {
                out.push_str(&format!("{},{}\n", fmt12(radius), fmt12(charge)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ball(r: f64) -> ConductorGeometry {
        ConductorGeometry::Ball { radius: r }
    }

    fn grid(r_max: f64, n: usize, g: &ConductorGeometry) -> RadialGrid {
        RadialGrid::uniform(r_max, n, g).unwrap()
    }

    #[test]
    fn closed_form_reference_values() {
        let (a, q_int, q_surf) = ball_closed_form(1.0, 1.0, 0.4).unwrap();
        // independent evaluation: |E| = 4 pi / 3, denominator 1 - 0.16 |E|
        let vol = FOUR_PI / 3.0;
        let den = 1.0 - 0.16 * vol;
        assert!((a - 1.0 / den).abs() < 1e-14);
        // 1 / (1 - 0.16 * 4 pi / 3) to 15 digits
        assert!((a - 3.032_199_834_540_518).abs() < 1e-12);
        assert!((q_int - -2.032_199_834_540_518).abs() < 1e-12);
        assert!((q_surf - 3.032_199_834_540_518).abs() < 1e-12);
        assert_eq!(q_int + q_surf, 1.0);

        let (a0, qi0, qs0) = ball_closed_form(1.0, 1.0, 0.0).unwrap();
        assert_eq!((a0, qi0, qs0), (1.0, 0.0, 1.0));

        let (a2, qi2, qs2) = ball_closed_form(2.0, 1.0, 0.1).unwrap();
        let vol2 = FOUR_PI / 3.0 * 8.0;
        let den2 = 2.0 - 0.01 * vol2;
        assert!((a2 - 1.0 / den2).abs() < 1e-14);
        assert!((qi2 - -0.01 * vol2 / den2).abs() < 1e-14);
        assert_eq!(qi2 + qs2, 1.0);
    }

    #[test]
    fn closed_form_rejects_nonpositive_denominator() {
        // k^2 |E| >= C: k = 0.5 on the unit ball crosses the bound
        assert!(matches!(
            ball_closed_form(1.0, 1.0, 0.5),
            Err(Error::DenominatorNonpositive)
        ));
    }

    #[test]
    fn ball_distribution_structure() {
        let d = equilibrium_distribution_ball(1.0, 1.0, 0.4).unwrap();
        assert_eq!(d.components.len(), 2);
        assert!((d.total() - 1.0).abs() < 1e-14);
        let d0 = equilibrium_distribution_ball(1.0, 1.0, 0.0).unwrap();
        assert_eq!(d0.components.len(), 1);
        assert!(matches!(d0.components[0], ChargeComponent::SurfaceSphere { .. }));
    }

    #[test]
    fn solve_matches_closed_form_at_k_04() {
        let g = ball(1.0);
        let grid = grid(10.0, 2001, &g);
        let sol = solve_equilibrium(&g, 1.0, 0.4, &grid).unwrap();
        let (a, q_int, q_surf) = ball_closed_form(1.0, 1.0, 0.4).unwrap();
        assert!((sol.a / a - 1.0).abs() < 0.02, "A = {}", sol.a);
        assert!((sol.q_interior / q_int - 1.0).abs() < 0.02, "Q = {}", sol.q_interior);
        assert!((sol.q_surface / q_surf - 1.0).abs() < 0.02, "q_hat = {}", sol.q_surface);
        assert!((sol.charges.total() - 1.0).abs() < 1e-9);
        // W = q A at equilibrium
        assert!((sol.energy / (1.0 * sol.a) - 1.0).abs() < 0.02, "W = {}", sol.energy);
        let deviation = constancy_check(&sol, &g).unwrap();
        assert!(deviation < 0.005, "potential deviation {deviation}");
    }

    #[test]
    fn coulomb_limit_puts_all_charge_on_the_surface() {
        let g = ball(1.0);
        let grid = grid(10.0, 2001, &g);
        let sol = solve_equilibrium(&g, 1.0, 0.0, &grid).unwrap();
        assert!(sol.q_interior.abs() < 0.02, "Q = {}", sol.q_interior);
        assert!((sol.a - 1.0).abs() < 0.02, "A = {}", sol.a);
    }

    #[test]
    fn faraday_refutation_interior_charge_is_nonzero_for_positive_k() {
        let g = ball(1.0);
        let grid = grid(10.0, 2001, &g);
        let sol = solve_equilibrium(&g, 1.0, 0.4, &grid).unwrap();
        assert!(sol.q_interior.abs() > 0.1 * sol.q_surface.abs());
    }

    #[test]
    fn zero_total_charge_gives_the_zero_solution() {
        let g = ball(1.0);
        let grid = grid(10.0, 2001, &g);
        let sol = solve_equilibrium(&g, 0.0, 0.3, &grid).unwrap();
        assert!(sol.a.abs() < 1e-10);
        assert!(sol.energy.abs() < 1e-10);
        assert!(sol.charges.total().abs() < 1e-10);
    }

    #[test]
    fn uniqueness_across_discretizations() {
        let g = ball(1.0);
        let s1 = solve_equilibrium(&g, 1.0, 0.3, &grid(10.0, 1601, &g)).unwrap();
        let s2 = solve_equilibrium(&g, 1.0, 0.3, &grid(12.0, 2401, &g)).unwrap();
        assert!((s1.a / s2.a - 1.0).abs() < 0.02);
        assert!((s1.q_interior / s2.q_interior - 1.0).abs() < 0.02);
        assert!((s1.q_surface / s2.q_surface - 1.0).abs() < 0.02);
    }

    #[test]
    fn minimality_against_zero_sum_perturbations() {
        let g = ball(1.0);
        let grid = grid(10.0, 1201, &g);
        let sol = solve_equilibrium(&g, 1.0, 0.35, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = 0.1 + 0.3 * rng.gen::<f64>();
            let b = a + 0.2 + 0.2 * rng.gen::<f64>();
            let zero_sum = ChargeDistribution::new(vec![
                ChargeComponent::VolumeShell { a: 0.0, b, charge: 1.0 },
                ChargeComponent::VolumeShell { a: 0.0, b: a.min(b - 0.15), charge: -1.0 },
            ]);
            for t in [-0.1, -0.01, 0.01, 0.1] {
                let perturbed =
                    ChargeDistribution::linear_combination(1.0, &sol.charges, t, &zero_sum);
                assert!((perturbed.total() - 1.0).abs() < 1e-12);
                let w = energy(&perturbed, &grid, 0.35).unwrap();
                // slack covers the discretization error of the minimizer
                assert!(
                    w >= sol.energy * (1.0 - 1e-3),
                    "perturbation lowered the energy: {w} < {}",
                    sol.energy
                );
            }
        }
    }

    #[test]
    fn convexity_probe_on_random_feasible_pairs() {
        let g = ball(1.0);
        let grid = grid(10.0, 1201, &g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let split1: f64 = rng.gen();
            let split2: f64 = rng.gen();
            let l1 = ChargeDistribution::new(vec![
                ChargeComponent::VolumeShell { a: 0.0, b: 1.0, charge: split1 },
                ChargeComponent::SurfaceSphere { radius: 1.0, charge: 1.0 - split1 },
            ]);
            let l2 = ChargeDistribution::new(vec![
                ChargeComponent::VolumeShell { a: 0.0, b: 1.0, charge: -split2 },
                ChargeComponent::SurfaceSphere { radius: 1.0, charge: 1.0 + split2 },
            ]);
            let (mid, avg) = convexity_check(&l1, &l2, &grid, 0.3).unwrap();
            assert!(mid <= avg + 1e-10, "mid {mid} > avg {avg}");
        }
        // identical inputs give equality
        let l = equilibrium_distribution_ball(1.0, 1.0, 0.3).unwrap();
        let (mid, avg) = convexity_check(&l, &l, &grid, 0.3).unwrap();
        assert!((mid - avg).abs() < 1e-12);
    }

    fn example_shells() -> ConductorGeometry {
        ConductorGeometry::NestedShells {
            inner_radius: 0.5,
            shell_faces: vec![(0.6, 0.7), (0.8, 0.9)],
            outer_sphere_radius: None,
        }
    }

    #[test]
    fn nested_spheres_alternating_charges() {
        let charges = nested_spheres_charges(&example_shells(), 1.0).unwrap();
        let expected = [(0.5, 1.0), (0.6, -1.0), (0.7, 1.0), (0.8, -1.0), (0.9, 1.0)];
        assert_eq!(charges.len(), expected.len());
        for ((r, s), (er, es)) in charges.iter().zip(expected) {
            assert_eq!(*r, er);
            assert!((s - es).abs() < 1e-8, "charge at {r}: {s}");
        }
        assert!((total_variation(&charges) - 5.0).abs() < 1e-8);
    }

    #[test]
    fn nested_spheres_shell_potential_value() {
        // on the shell [0.6, 0.7] the superposed potential is
        // 1/0.7 - 1/0.8 + 1/0.9
        let g = example_shells();
        let charges = nested_spheres_charges(&g, 1.0).unwrap();
        let grid = RadialGrid::uniform(5.0, 5001, &g).unwrap();
        let field = coulomb_superposition(&charges, &grid);
        let expected: f64 = 1.0 / 0.7 - 1.0 / 0.8 + 1.0 / 0.9;
        assert!((expected - 1.289_683).abs() < 1e-6);
        for &rho in &[0.62, 0.65, 0.68] {
            assert!((field.eval(rho) - expected).abs() < 1e-8, "rho {rho}");
        }
    }

    #[test]
    fn nested_total_variation_grows_linearly_with_shell_count() {
        let mut tvs = Vec::new();
        for m in 1..=4usize {
            let faces: Vec<(f64, f64)> = (0..m)
                .map(|i| (0.55 + 0.1 * i as f64, 0.6 + 0.1 * i as f64))
                .collect();
            let g = ConductorGeometry::NestedShells {
                inner_radius: 0.5,
                shell_faces: faces,
                outer_sphere_radius: None,
            };
            let charges = nested_spheres_charges(&g, 1.0).unwrap();
            tvs.push(total_variation(&charges));
        }
        for (m, tv) in tvs.iter().enumerate() {
            let expected = (2 * (m + 1) + 1) as f64;
            assert!((tv - expected).abs() < 1e-8, "m = {}: TV = {tv}", m + 1);
        }
    }

    #[test]
    fn bare_outer_sphere_stays_neutral() {
        let g = ConductorGeometry::NestedShells {
            inner_radius: 0.5,
            shell_faces: vec![(0.6, 0.7)],
            outer_sphere_radius: Some(0.95),
        };
        let charges = nested_spheres_charges(&g, 1.0).unwrap();
        assert_eq!(charges.len(), 4);
        assert!(charges[3].1.abs() < 1e-12);
        // the shell still alternates
        assert!((charges[1].1 + 1.0).abs() < 1e-8);
        assert!((charges[2].1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn no_shells_reduces_to_a_single_sphere() {
        let g = ConductorGeometry::NestedShells {
            inner_radius: 0.5,
            shell_faces: vec![],
            outer_sphere_radius: None,
        };
        let charges = nested_spheres_charges(&g, 1.0).unwrap();
        assert_eq!(charges, vec![(0.5, 1.0)]);
    }

    #[test]
    fn nested_equilibrium_through_the_generic_entry_point() {
        let g = example_shells();
        let grid = RadialGrid::uniform(5.0, 2001, &g).unwrap();
        let sol = solve_equilibrium(&g, 1.0, 0.0, &grid).unwrap();
        assert!((sol.charges.total() - 1.0).abs() < 1e-9);
        // constant 2 on the core: U(0) = 1/0.5 - 1/0.6 + 1/0.7 - 1/0.8 + 1/0.9
        let expected = 2.0 - 1.0 / 0.6 + 1.0 / 0.7 - 1.0 / 0.8 + 1.0 / 0.9;
        assert!((sol.a - expected).abs() < 1e-8, "A = {}", sol.a);
        // screened nested shells are unsupported
        assert!(matches!(
            solve_equilibrium(&g, 1.0, 0.2, &grid),
            Err(Error::UnsupportedGeometry(_))
        ));
    }

    #[test]
    fn report_and_csv_shapes() {
        let g = ball(1.0);
        let grid = grid(10.0, 1201, &g);
        let sol = solve_equilibrium(&g, 1.0, 0.4, &grid).unwrap();
        let report = equilibrium_report(&sol, &g).unwrap();
        assert!(report.starts_with("A = 3.0"));
        assert!(report.contains("grid_nodes = 1201"));
        let csv = charge_table_csv(&sol.charges);
        assert!(csv.starts_with("radius_or_shell,charge\n"));
        assert_eq!(csv.lines().count(), sol.charges.components.len() + 1);
    }
}
