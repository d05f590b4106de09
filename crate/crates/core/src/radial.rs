//! Weak-form k-potential solver for spherically symmetric charge
//! distributions, plus analytic Coulomb superposition, field evaluation,
//! one-sided differentiation, and recovery of the source distribution
//! from a solved field.
//!
//! The solver works on the substituted unknown v = rho * U, which turns the
//! radial Laplacian into a plain second derivative and removes the 1/rho^2
//! coordinate singularity at the origin. Boundary conditions: v(0) = 0
//! (regularity of U) and the exact Robin closure U'(r_max) + U(r_max)/r_max
//! = 0, which reduces to v'(r_max) = 0 and is exact because all charge and
//! all screening live strictly inside r_max.

use crate::domain::{ChargeComponent, ChargeDistribution, ConductorGeometry, RadialGrid};
use crate::error::{Error, Result};
use crate::quad::integrate_pl_rho2;
use crate::report::fmt_sig;
use crate::tridiag;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Evaluation side for one-sided derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inner,
    Outer,
}

/// A sampled radial potential with its exact far-field tail coefficient:
/// U(rho) = far_coefficient / rho for rho >= r_max.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub grid: RadialGrid,
    /// U at the grid nodes.
    pub values: Vec<f64>,
    pub far_coefficient: f64,
    /// Node indices where U' is allowed to jump (surface charges).
    pub kink_nodes: Vec<usize>,
}

/// Per-node ring charges plus kink bookkeeping for the assembled system.
pub(crate) struct RingCharges {
    pub(crate) node_charge: Vec<f64>,
    pub(crate) kink_nodes: Vec<usize>,
}

/// Collapses a distribution onto grid nodes: surface spheres snap to the
/// nearest node, volume shells are mass-lumped with exact per-cell
/// rho^2-weighted shares so each component's total charge is preserved.
pub(crate) fn lump_charges(grid: &RadialGrid, dist: &ChargeDistribution) -> Result<RingCharges> {
    let n = grid.len();
    let h = grid.spacing()?;
    let mut node_charge = vec![0.0; n];
    let mut kink_nodes = Vec::new();

    for (ci, comp) in dist.components.iter().enumerate() {
        match *comp {
            ChargeComponent::SurfaceSphere { radius, charge } => {
                let j = grid.nearest_node(radius);
                if j == 0 || j + 1 >= n {
                    return Err(Error::UnresolvedComponent(format!(
                        "components[{ci}]: sphere radius {radius} not strictly inside the grid"
                    )));
                }
                node_charge[j] += charge;
                if charge != 0.0 {
                    kink_nodes.push(j);
                }
            }
            ChargeComponent::VolumeShell { a, b, charge } => {
                if b - a < 4.0 * h {
                    return Err(Error::UnresolvedComponent(format!(
                        "components[{ci}]: shell [{a}, {b}] spans fewer than 4 cells"
                    )));
                }
                if b >= grid.r_max() {
                    return Err(Error::UnresolvedComponent(format!(
                        "components[{ci}]: shell reaches r_max"
                    )));
                }
                // node i owns [rho_i - h/2, rho_i + h/2]
                let total_w = (b.powi(3) - a.powi(3)) / 3.0;
                for i in 0..n {
                    let rho = grid.radius(i);
                    let lo = (rho - 0.5 * h).max(0.0).max(a);
                    let hi = (rho + 0.5 * h).min(grid.r_max()).min(b);
                    if hi <= lo {
                        continue;
                    }
                    let w = (hi.powi(3) - lo.powi(3)) / 3.0;
                    let share = charge * w / total_w;
                    // v(0) is pinned; fold the centre cell's share into node 1
                    let target = if i == 0 { 1 } else { i };
                    node_charge[target] += share;
                }
            }
        }
    }
    kink_nodes.sort_unstable();
    kink_nodes.dedup();
    Ok(RingCharges { node_charge, kink_nodes })
}

/// Solves the discrete weak form (phi, U)_k = l(phi) on the grid.
///
/// The assembled system is the P1 Galerkin discretization in v = rho U:
/// stiffness sum (v_{i+1}-v_i)^2 / h minus the screened mass
/// 4 pi k^2 chi_E v^2 h, sourced by the lumped ring charges. Positive
/// definiteness is monitored through the elimination pivots; a
/// non-positive pivot reports `IndefiniteForm`.
pub fn solve_radial_potential(
    grid: &RadialGrid,
    dist: &ChargeDistribution,
    k: f64,
) -> Result<PotentialField> {
    let rings = lump_charges(grid, dist)?;
    let field = solve_from_rings(grid, &rings.node_charge, k, None)?;
    Ok(PotentialField { kink_nodes: rings.kink_nodes, ..field })
}

/// Shared kernel: solves for v given per-node ring charges, with optional
/// Dirichlet constraints (node index, v value) used by the capacity solve.
pub(crate) fn solve_from_rings(
    grid: &RadialGrid,
    node_charge: &[f64],
    k: f64,
    dirichlet: Option<&[(usize, f64)]>,
) -> Result<PotentialField> {
    let n = grid.len();
    let h = grid.spacing()?;
    let m = n - 1; // unknowns v_1 .. v_{n-1}; v_0 = 0

    let mut diag = vec![0.0; m];
    let mut off = vec![-1.0 / h; m - 1];
    let mut rhs = vec![0.0; m];
    let four_pi_k2 = FOUR_PI * k * k;
    for i in 1..n {
        // lumped mass over the node's half-cells, cell-resolved so the
        // conductor edge node carries exactly its interior half
        let mut chi_w = if grid.is_conductor_cell(i - 1) { 0.5 } else { 0.0 };
        if i + 1 < n && grid.is_conductor_cell(i) {
            chi_w += 0.5;
        }
        diag[i - 1] = if i + 1 == n { 1.0 / h } else { 2.0 / h } - four_pi_k2 * chi_w * h;
        rhs[i - 1] = node_charge[i] / grid.radius(i);
    }

    if let Some(constraints) = dirichlet {
        let mut fixed = vec![None; m];
        for &(node, value) in constraints {
            debug_assert!(node >= 1 && node < n);
            fixed[node - 1] = Some(value);
        }
        for i in 0..m {
            if let Some(v) = fixed[i] {
                diag[i] = 1.0;
                rhs[i] = v;
                if i > 0 {
                    if fixed[i - 1].is_none() {
                        rhs[i - 1] -= off[i - 1] * v;
                    }
                    off[i - 1] = 0.0;
                }
                if i + 1 < m {
                    if fixed[i + 1].is_none() {
                        rhs[i + 1] -= off[i] * v;
                    }
                    off[i] = 0.0;
                }
            }
        }
    }

    let (v_inner, min_pivot) = tridiag::solve_symmetric(&diag, &off, &rhs);
    if min_pivot <= 0.0 {
        return Err(Error::IndefiniteForm(format!(
            "minimum elimination pivot {min_pivot:.3e}; k = {k} is too large for this geometry"
        )));
    }

    let mut values = vec![0.0; n];
    for i in 1..n {
        values[i] = v_inner[i - 1] / grid.radius(i);
    }
    // U smooth with U'(0) = 0: quadratic extrapolation to the origin
    values[0] = (4.0 * values[1] - values[2]) / 3.0;
    let far_coefficient = v_inner[m - 1];
    Ok(PotentialField {
        grid: grid.clone(),
        values,
        far_coefficient,
        kink_nodes: Vec::new(),
    })
}

/// Exact Coulomb superposition of surface spheres:
/// U(rho) = sum q_i min(1/r_i, 1/rho), sampled at the grid nodes.
pub fn coulomb_superposition(spheres: &[(f64, f64)], grid: &RadialGrid) -> PotentialField {
    let values: Vec<f64> = grid
        .radii()
        .iter()
        .map(|&rho| {
            spheres
                .iter()
                .map(|&(r, q)| q * (1.0 / r).min(if rho > 0.0 { 1.0 / rho } else { f64::INFINITY }))
                .sum()
        })
        .collect();
    let far_coefficient: f64 = spheres.iter().map(|&(_, q)| q).sum();
    let mut kink_nodes: Vec<usize> = spheres
        .iter()
        .filter(|&&(_, q)| q != 0.0)
        .map(|&(r, _)| grid.nearest_node(r))
        .collect();
    kink_nodes.sort_unstable();
    kink_nodes.dedup();
    PotentialField {
        grid: grid.clone(),
        values,
        far_coefficient,
        kink_nodes,
    }
}

impl PotentialField {
    fn v(&self, i: usize) -> f64 {
        self.values[i] * self.grid.radius(i)
    }

    /// U at an arbitrary radius: linear interpolation in v = rho U between
    /// nodes, exact tail far_coefficient / rho beyond r_max.
    pub fn eval(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0);
        let radii = self.grid.radii();
        let n = radii.len();
        if rho >= self.grid.r_max() {
            return self.far_coefficient / rho;
        }
        if rho <= radii[1] {
            // U itself is smooth at the origin; interpolate U, not v
            let t = (rho - radii[0]) / (radii[1] - radii[0]);
            return self.values[0] + t * (self.values[1] - self.values[0]);
        }
        let i = radii.partition_point(|&r| r <= rho).min(n - 1) - 1;
        let t = (rho - radii[i]) / (radii[i + 1] - radii[i]);
        let v = self.v(i) + t * (self.v(i + 1) - self.v(i));
        v / rho
    }

    /// One-sided radial derivative of U. At grid nodes a second-order
    /// one-sided difference in v is used; off nodes, the slope of the
    /// containing cell. At kink radii the two sides differ by the
    /// surface-charge jump -s/a^2.
    pub fn eval_gradient(&self, rho: f64, side: Side) -> f64 {
        let radii = self.grid.radii();
        let n = radii.len();
        if rho >= self.grid.r_max() {
            return -self.far_coefficient / (rho * rho);
        }
        if rho == 0.0 {
            return 0.0;
        }
        let j = self.grid.nearest_node(rho);
        let h = radii[1] - radii[0];
        let on_node = (rho - radii[j]).abs() <= 1e-9 * self.grid.r_max();
        let vp = if on_node {
            match side {
                Side::Outer => {
                    if j + 2 < n {
                        (-3.0 * self.v(j) + 4.0 * self.v(j + 1) - self.v(j + 2)) / (2.0 * h)
                    } else if j + 1 < n {
                        (self.v(j + 1) - self.v(j)) / h
                    } else {
                        // node at r_max: exact tail
                        return -self.far_coefficient / (rho * rho);
                    }
                }
                Side::Inner => {
                    if j >= 2 {
                        (3.0 * self.v(j) - 4.0 * self.v(j - 1) + self.v(j - 2)) / (2.0 * h)
                    } else {
                        (self.v(j) - self.v(j.saturating_sub(1))) / h
                    }
                }
            }
        } else {
            let i = radii.partition_point(|&r| r <= rho).min(n - 1) - 1;
            (self.v(i + 1) - self.v(i)) / (radii[i + 1] - radii[i])
        };
        let u = self.eval(rho);
        vp / rho - u / rho
    }

    /// Integral of U over the conductor set, for the flux identity.
    pub fn integral_over(&self, geometry: &ConductorGeometry) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in geometry.radial_regions()? {
            total += FOUR_PI * integrate_pl_rho2(self.grid.radii(), &self.values, a, b);
        }
        Ok(total)
    }

    /// Far-field coefficient predicted by the flux identity
    /// A_far = l(1) + k^2 \int_E U dv.
    pub fn flux_far_coefficient(
        &self,
        geometry: &ConductorGeometry,
        k: f64,
        total_charge: f64,
    ) -> Result<f64> {
        Ok(total_charge + k * k * self.integral_over(geometry)?)
    }
}

/// Recovers the source distribution from a solved field: surface charges
/// from the normal-derivative jumps, volume densities from
/// -(1/4 pi) Lap U - k^2 U on the conductor regions. Second differences on
/// v are excluded on the two cells adjacent to each kink.
pub fn decompose_distribution(
    field: &PotentialField,
    geometry: &ConductorGeometry,
    k: f64,
) -> Result<ChargeDistribution> {
    let grid = &field.grid;
    let n = grid.len();
    let h = grid.spacing()?;
    let radii = grid.radii();
    let faces = geometry.faces()?;
    let regions = geometry.radial_regions()?;

    // slope jumps of U' at every interior node, read off the per-cell
    // slopes of v = rho U: [U'] = [v'] / rho since v is continuous. This is
    // exact for the piecewise-linear v and confined to a single node, unlike
    // wider one-sided difference stencils which smear a kink onto its
    // neighbours.
    let mut kinks: Vec<(usize, f64)> = Vec::new();
    let mut max_slope: f64 = field.far_coefficient.abs() / (grid.r_max() * grid.r_max());
    let mut jumps = vec![0.0; n];
    let vslope = |i: usize| (field.v(i + 1) - field.v(i)) / h;
    for j in 2..n - 2 {
        jumps[j] = (vslope(j) - vslope(j - 1)) / radii[j];
        let u_slope = (field.values[j + 1] - field.values[j]) / h;
        max_slope = max_slope.max(u_slope.abs());
    }
    let tol = 0.05 * max_slope + 1e-12;
    for j in 2..n - 2 {
        if jumps[j].abs() > tol {
            kinks.push((j, jumps[j]));
        }
    }

    let mut components = Vec::new();
    let mut magnitude: f64 = 0.0;
    for &(j, jump) in &kinks {
        let rho = radii[j];
        let near_face = faces.iter().any(|&f| (f - rho).abs() <= 1.5 * h);
        let on_support = geometry.contains_radius(rho)
            || regions.iter().any(|&(a, b)| rho >= a - h && rho <= b + h);
        if !near_face && !on_support {
            return Err(Error::NonConductorKink(rho));
        }
        let s = -rho * rho * jump;
        components.push(ChargeComponent::SurfaceSphere { radius: rho, charge: s });
        magnitude += s.abs();
    }

    // volume density on each conductor region, skipping 2 nodes around kinks
    let kink_idx: Vec<usize> = kinks.iter().map(|&(j, _)| j).collect();
    let excluded = |i: usize| kink_idx.iter().any(|&j| i.abs_diff(j) <= 2);
    for &(a, b) in &regions {
        let i_lo = ((a / h).ceil() as usize).max(1);
        let i_hi = ((b / h).floor() as usize).min(n - 2);
        if i_hi <= i_lo + 2 {
            continue;
        }
        let mut density = vec![f64::NAN; i_hi - i_lo + 1];
        for i in i_lo..=i_hi {
            if excluded(i) || i < 1 || i + 1 >= n {
                continue;
            }
            let lap = (field.v(i + 1) - 2.0 * field.v(i) + field.v(i - 1)) / (h * h) / radii[i];
            density[i - i_lo] = -lap / FOUR_PI - k * k * field.values[i];
        }
        fill_gaps(&mut density);
        let dr: Vec<f64> = (i_lo..=i_hi).map(|i| radii[i]).collect();
        // extend to the exact region bounds with the edge values
        let mut xs = vec![a];
        xs.extend_from_slice(&dr);
        xs.push(b);
        let mut ys = vec![density[0]];
        ys.extend_from_slice(&density);
        ys.push(density[density.len() - 1]);
        let charge = FOUR_PI * integrate_pl_rho2(&xs, &ys, a, b);
        components.push(ChargeComponent::VolumeShell { a, b, charge });
        magnitude += charge.abs();
    }

    let threshold = 1e-6 * (magnitude + field.far_coefficient.abs()) + 1e-12;
    components.retain(|c| c.charge().abs() > threshold);
    components.sort_by(|x, y| {
        let rx = match x {
            ChargeComponent::VolumeShell { a, .. } => *a,
            ChargeComponent::SurfaceSphere { radius, .. } => *radius,
        };
        let ry = match y {
            ChargeComponent::VolumeShell { a, .. } => *a,
            ChargeComponent::SurfaceSphere { radius, .. } => *radius,
        };
        rx.partial_cmp(&ry).unwrap()
    });
    Ok(ChargeDistribution::new(components))
}

/// Linear interpolation across NaN gaps; edge gaps copy the nearest value.
fn fill_gaps(values: &mut [f64]) {
    let n = values.len();
    let mut i = 0;
    while i < n {
        if values[i].is_nan() {
            let start = i;
            while i < n && values[i].is_nan() {
                i += 1;
            }
            let left = if start > 0 { Some(values[start - 1]) } else { None };
            let right = if i < n { Some(values[i]) } else { None };
            for (step, item) in values[start..i].iter_mut().enumerate() {
                *item = match (left, right) {
                    (Some(l), Some(r)) => {
                        let t = (step + 1) as f64 / (i - start + 1) as f64;
                        l + t * (r - l)
                    }
                    (Some(l), None) => l,
                    (None, Some(r)) => r,
                    (None, None) => 0.0,
                };
            }
        } else {
            i += 1;
        }
    }
}

/// Potential table export: rows (rho, U, dU_minus, dU_plus), 12 significant
/// digits, header included.
pub fn potential_table_csv(field: &PotentialField) -> String {
    let mut out = String::from("rho,U,dU_minus,dU_plus\n");
    for (i, &rho) in field.grid.radii().iter().enumerate() {
        let du_minus = field.eval_gradient(rho, Side::Inner);
        let du_plus = field.eval_gradient(rho, Side::Outer);
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig(rho, 12),
            fmt_sig(field.values[i], 12),
            fmt_sig(du_minus, 12),
            fmt_sig(du_plus, 12)
        ));
    }
    out
}
