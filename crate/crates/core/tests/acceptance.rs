//! End-to-end acceptance checks, one per release criterion. Each test
//! prints a single [PASS]/[FAIL] line (visible with --nocapture) and
//! asserts the same condition, so the suite doubles as a report.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use equipot::domain::{
    ChargeComponent, ChargeDistribution, ConductorGeometry, RadialGrid, VoxelSet,
};
use equipot::equilibrium::{
    ball_closed_form, constancy_check, convexity_check, nested_spheres_charges,
    solve_equilibrium, total_variation,
};
use equipot::forces::{gradient_force, mollified_force, MollifierNormalization};
use equipot::functional::{
    capacity, density_ball, density_tent, hardy_check, poincare_constant, rearrange,
    rearrangement_inequalities, SampledRadialFunction,
};
use equipot::photoeffect::{
    pair_equation_residual, pair_parameter_t, restoring_force, threshold_energy,
    threshold_energy_quadrature, threshold_scaling, PairModel,
};
use equipot::radial::solve_radial_potential;
use equipot::voxel::solve_voxel_equilibrium;

fn ball(r: f64) -> ConductorGeometry {
    ConductorGeometry::Ball { radius: r }
}

fn report(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn criterion_1_ball_capacity() {
    let mut pass = true;
    let mut parts = Vec::new();
    for &r in &[0.5, 1.0, 2.5] {
        let g = ball(r);
        let grid = RadialGrid::uniform(10.0 * r, 2000, &g).unwrap();
        let t = Instant::now();
        let c = capacity(&g, &grid).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let rel = (c / r - 1.0).abs();
        parts.push(format!("C(ball {r}) = {c:.6} ({rel:.1e} off, {secs:.2}s)"));
        pass &= rel < 0.01 && secs < 1.0;
    }
    report(
        "capacity of the ball",
        pass,
        format!("{}; bound 1%, under 1 s each", parts.join(", ")),
    );
}

#[test]
fn criterion_2_poincare_interval_and_scaling() {
    let g = ball(1.0);
    let grid = RadialGrid::uniform(12.0, 2401, &g).unwrap();
    let k = poincare_constant(&g, &grid).unwrap();
    let oracle = std::f64::consts::PI.sqrt() / 4.0;
    let in_interval = k >= 0.299207 && k <= 0.488602;
    let near_oracle = (k / oracle - 1.0).abs() < 0.01;
    let mut scale_ok = true;
    let mut scaled = Vec::new();
    for &r in &[0.5, 2.0, 4.0] {
        let gr = ball(r);
        let kr = poincare_constant(&gr, &RadialGrid::uniform(12.0 * r, 2401, &gr).unwrap())
            .unwrap()
            * r;
        scaled.push(format!("k(ball {r})*{r} = {kr:.6}"));
        scale_ok &= (kr / k - 1.0).abs() < 0.005;
    }
    report(
        "poincare constant interval",
        in_interval && near_oracle && scale_ok,
        format!(
            "k(ball 1) = {k:.6} in [0.299207, 0.488602], oracle {oracle:.6} within 1%; {}",
            scaled.join(", ")
        ),
    );
}

#[test]
fn criterion_3_ball_equilibrium_closed_forms() {
    let t = Instant::now();
    let (a, q_int, q_hat) = ball_closed_form(1.0, 1.0, 0.4).unwrap();
    let exact_sum = q_int + q_hat == 1.0;
    let g = ball(1.0);
    let grid = RadialGrid::uniform(10.0, 2001, &g).unwrap();
    let sol = solve_equilibrium(&g, 1.0, 0.4, &grid).unwrap();
    let rel_a = (sol.a / 3.032201 - 1.0).abs();
    let rel_q = (sol.q_interior / -2.032201 - 1.0).abs();
    let rel_s = (sol.q_surface / 3.032201 - 1.0).abs();
    let deviation = constancy_check(&sol, &g).unwrap();
    let secs = t.elapsed().as_secs_f64();
    report(
        "ball equilibrium closed forms",
        (a - 3.032201).abs() < 1e-5
            && exact_sum
            && rel_a < 0.02
            && rel_q < 0.02
            && rel_s < 0.02
            && deviation < 0.005
            && secs < 5.0,
        format!(
            "A = {:.6}, Q = {:.6}, q_hat = {:.6} (each within 2% of 3.032201/-2.032201/3.032201); \
             Q + q_hat = 1 exact; interior deviation {deviation:.2e} < 0.5%; {secs:.2}s",
            sol.a, sol.q_interior, sol.q_surface
        ),
    );
}

#[test]
fn criterion_4_nested_spheres() {
    let nested = ConductorGeometry::NestedShells {
        inner_radius: 0.5,
        shell_faces: vec![(0.6, 0.7), (0.8, 0.9)],
        outer_sphere_radius: None,
    };
    let charges = nested_spheres_charges(&nested, 1.0).unwrap();
    let expected = [1.0, -1.0, 1.0, -1.0, 1.0];
    let alternating = charges.len() == 5
        && charges
            .iter()
            .zip(&expected)
            .all(|(&(_, c), &e)| (c - e).abs() < 1e-8);
    // total variation grows linearly in the shell count: (2m+1)|q|
    let mut linear = true;
    let mut tvs = Vec::new();
    for m in 1..=4usize {
        let faces: Vec<(f64, f64)> = (0..m)
            .map(|i| (0.6 + 0.2 * i as f64, 0.7 + 0.2 * i as f64))
            .collect();
        let geom = ConductorGeometry::NestedShells {
            inner_radius: 0.5,
            shell_faces: faces,
            outer_sphere_radius: None,
        };
        let tv = total_variation(&nested_spheres_charges(&geom, 1.0).unwrap());
        linear &= (tv - (2 * m + 1) as f64).abs() < 1e-8;
        tvs.push(format!("TV({m} shells) = {tv:.6}"));
    }
    report(
        "nested spheres alternation",
        alternating && linear,
        format!(
            "face charges {:?} within 1e-8 of (+1,-1,+1,-1,+1); {}",
            charges.iter().map(|&(_, c)| format!("{c:.6}")).collect::<Vec<_>>(),
            tvs.join(", ")
        ),
    );
}

#[test]
fn criterion_5_convexity_and_discretization_agreement() {
    let g = ball(1.0);
    let grid = RadialGrid::uniform(10.0, 1201, &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let feasible = |rng: &mut ChaCha8Rng| {
            let s: f64 = rng.gen_range(0.2..0.9);
            let volume = ChargeComponent::VolumeShell {
                a: s * rng.gen_range(0.0..0.5),
                b: s,
                charge: rng.gen_range(-1.0..1.0),
            };
            let surface = ChargeComponent::SurfaceSphere {
                radius: 1.0,
                charge: 1.0 - volume.charge(),
            };
            ChargeDistribution::new(vec![volume, surface])
        };
        let l1 = feasible(&mut rng);
        let l2 = feasible(&mut rng);
        let (w_mid, w_avg) = convexity_check(&l1, &l2, &grid, 0.3).unwrap();
        if w_mid > w_avg + 1e-10 {
            violations += 1;
        }
    }
    // two independent discretizations of the same equilibrium
    let grid_a = RadialGrid::uniform(10.0, 1501, &g).unwrap();
    let grid_b = RadialGrid::uniform(12.0, 3001, &g).unwrap();
    let sa = solve_equilibrium(&g, 1.0, 0.4, &grid_a).unwrap();
    let sb = solve_equilibrium(&g, 1.0, 0.4, &grid_b).unwrap();
    let agree = (sa.a / sb.a - 1.0).abs() < 0.02
        && (sa.q_interior / sb.q_interior - 1.0).abs() < 0.02
        && (sa.q_surface / sb.q_surface - 1.0).abs() < 0.02;
    report(
        "energy convexity and uniqueness",
        violations == 0 && agree,
        format!(
            "{violations}/1000 midpoint violations; discretizations (1501 nodes, r_max 10) vs \
             (3001 nodes, r_max 12): A {:.6} vs {:.6}, Q {:.6} vs {:.6}, within 2%",
            sa.a, sb.a, sa.q_interior, sb.q_interior
        ),
    );
}

#[test]
fn criterion_6_forces() {
    let g = ball(1.0);
    let grid = RadialGrid::uniform(10.0, 2001, &g).unwrap();
    let sol0 = solve_equilibrium(&g, 1.0, 0.0, &grid).unwrap();
    let mut exterior_ok = true;
    for &rho in &[1.5, 2.0, 4.0] {
        let f = gradient_force(&sol0.potential, rho, 1.0).unwrap();
        exterior_ok &= (f * rho * rho - 1.0).abs() < 0.01;
    }
    let sol = solve_equilibrium(&g, 1.0, 0.4, &grid).unwrap();
    let surface_value = sol.potential.far_coefficient;
    let mut interior_worst = 0.0f64;
    for &rho in &[0.2, 0.35, 0.5, 0.65, 0.8] {
        interior_worst =
            interior_worst.max(gradient_force(&sol.potential, rho, 1.0).unwrap().abs());
    }
    let faraday_ok = interior_worst <= 0.005 * surface_value.abs();
    // mollified convergence on a smooth non-polynomial field
    let uniform = ChargeDistribution::new(vec![ChargeComponent::VolumeShell {
        a: 0.0,
        b: 1.0,
        charge: 1.0,
    }]);
    let screened = solve_radial_potential(&grid, &uniform, 0.4).unwrap();
    let exact = gradient_force(&screened, 0.5, 1.0).unwrap();
    let radii = [0.2, 0.1, 0.05];
    let errs: Vec<f64> = radii
        .iter()
        .map(|&rm| {
            (mollified_force(&screened, 0.5, 1.0, rm, MollifierNormalization::Limit) - exact)
                .abs()
        })
        .collect();
    let slope = (errs[0] / errs[2]).ln() / (radii[0] / radii[2]).ln();
    report(
        "forces",
        exterior_ok && faraday_ok && slope >= 1.9,
        format!(
            "exterior eq/rho^2 within 1% at rho in {{1.5, 2, 4}}; interior |F| = \
             {interior_worst:.2e} <= 0.5% of surface value; mollified slope {slope:.3} >= 1.9"
        ),
    );
}

#[test]
fn criterion_7_photoeffect() {
    let t = pair_parameter_t(1.0, 0.1, 0.4).unwrap();
    let residual = pair_equation_residual(1.0, 0.1, 0.4, t).abs();
    // independent oracle: bisect the defining equation
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pair_equation_residual(1.0, 0.1, 0.4, mid) * pair_equation_residual(1.0, 0.1, 0.4, lo)
            <= 0.0
        {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_bisect = 0.5 * (lo + hi);
    let t_ok = (t - t_bisect).abs() < 1e-9 && (t - 0.393088).abs() < 1e-6 && residual <= 1e-12;

    let e_closed = threshold_energy(1.0, 0.1, 1.0, 1.0);
    let e_quad = threshold_energy_quadrature(1.0, 0.1, 1.0, 1.0);
    let e_ok = (e_closed - 6.3131e-4).abs() < 1e-8
        && (e_closed - e_quad).abs() / e_closed <= 1e-10;

    let mut blocking = true;
    for &r in &[0.5, 1.0, 2.0] {
        for &dr in &[0.05, 0.1] {
            for &kr in &[0.35, 0.44] {
                let model = PairModel::new(r, dr * r, kr / r, 1.0, 1.0).unwrap();
                for i in 1..100 {
                    let big_r = r + dr * r * i as f64 / 100.0;
                    blocking &= restoring_force(big_r, &model).unwrap() < 0.0;
                }
            }
        }
    }
    let slope = threshold_scaling(&[10.0, 20.0, 40.0, 80.0], 0.1, 1.0, 1.0);
    report(
        "photoeffect thresholds",
        t_ok && e_ok && blocking && (slope + 4.0).abs() < 0.1,
        format!(
            "t = {t:.9} (bisection gap {:.1e}, residual {residual:.1e}); E_min = {e_closed:.6e} \
             (quadrature gap {:.1e}); restoring force negative across the gap; scaling slope \
             {slope:.4} = -4 +- 0.1",
            (t - t_bisect).abs(),
            (e_closed - e_quad).abs() / e_closed
        ),
    );
}

#[test]
fn criterion_8_inequality_suite() {
    // rearrangement: equimeasurable values, decreasing, Dirichlet never up
    let g = ball(1.0);
    let profiles: [fn(f64) -> f64; 3] = [
        |r| (-((r - 1.0) / 0.3).powi(2)).exp() + 0.6 * (-((r - 2.2) / 0.4).powi(2)).exp(),
        |r| 1.0 / (1.0 + r * r),
        |r| (-(r - 1.5) * (r - 1.5) * 4.0).exp() + 0.6 * (-(r - 4.0) * (r - 4.0) * 2.0).exp(),
    ];
    let mut rearr_ok = true;
    let mut worst_dirichlet = 0.0f64;
    for f in profiles {
        let grid = RadialGrid::uniform(8.0, 4001, &g).unwrap();
        let sampled = SampledRadialFunction::from_fn(grid, f);
        let fs = rearrange(&sampled).unwrap();
        // every output value is one of the input samples, in decreasing order
        let mut inputs = sampled.samples.clone();
        inputs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        rearr_ok &= fs.samples.windows(2).all(|w| w[1] <= w[0]);
        rearr_ok &= fs
            .samples
            .iter()
            .all(|v| *v == 0.0 || inputs.binary_search_by(|x| v.partial_cmp(x).unwrap()).is_ok());
        let (l2, dirichlet) = rearrangement_inequalities(&sampled).unwrap();
        rearr_ok &= (l2 - 1.0).abs() < 1e-3 && dirichlet <= 1.0 + 1e-3;
        worst_dirichlet = worst_dirichlet.max(dirichlet);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x: Vec<f64> = (0..400).map(|i| i as f64 / 399.0).collect();
    let mut hardy_worst = 0.0f64;
    for _ in 0..1000 {
        let gsamples: Vec<f64> = x.iter().map(|_| rng.gen::<f64>()).collect();
        hardy_worst = hardy_worst.max(hardy_check(&x, &gsamples));
    }

    let f3 = |y: [f64; 3]| y[0].sin() + y[1].cos() + y[2] * y[2];
    let x0 = [0.3, 0.2, 0.1];
    let radii = [0.1, 0.05, 0.025];
    let gaps: Vec<f64> = radii
        .iter()
        .map(|&r| (density_ball(&f3, x0, r) - density_tent(&f3, x0, r)).abs())
        .collect();
    let slope = (gaps[0] / gaps[2]).ln() / (radii[0] / radii[2]).ln();

    report(
        "inequality suite",
        rearr_ok && hardy_worst <= 1.0 && slope >= 1.9,
        format!(
            "rearrangement equimeasurable and decreasing on 3 profiles, worst Dirichlet ratio \
             {worst_dirichlet:.6} <= 1 + 1e-3; Hardy worst ratio {hardy_worst:.6} <= 1 over \
             1000 random inputs; density agreement slope {slope:.3} >= 1.9"
        ),
    );
}

#[test]
fn criterion_9_voxel_cross_check() {
    let t = Instant::now();
    let mask = VoxelSet::ball(1.0, 1.0 / 32.0);
    let eq = solve_voxel_equilibrium(&mask, 1.0, 0.4).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (a, _, _) = ball_closed_form(1.0, 1.0, 0.4).unwrap();
    let rel = (eq.a / a - 1.0).abs();
    report(
        "voxel cross-check",
        rel < 0.05 && secs < 60.0,
        format!(
            "A = {:.6} at spacing 1/32 vs closed form {a:.6}, relative gap {rel:.2e} < 5%; \
             {secs:.1}s < 60 s",
            eq.a
        ),
    );
}
