//! Core value types shared by all solvers: conductor geometries, radial
//! grids, charge distributions, model parameters, and scenario validation.
//!
//! Unit convention: the potential of a unit point charge at distance `rho`
//! is exactly `1/rho`. Lengths are dimensionless; the pair separation
//! `delta` is supplied in the same length unit as every radius.

use crate::error::{Error, Result};

/// Pair separation used by the photoeffect model when the scenario declares
/// SI-like metre lengths and does not override it.
pub const DEFAULT_DELTA: f64 = 1.45e-8;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// A compact conductor set, radially symmetric or voxelized.
#[derive(Debug, Clone, PartialEq)]
pub enum ConductorGeometry {
    /// Solid ball of the given radius centred at the origin.
    Ball { radius: f64 },
    /// Solid inner ball plus concentric conducting shells, each occupying
    /// `[inner, outer]`, optionally capped by a zero-thickness sphere.
    NestedShells {
        inner_radius: f64,
        shell_faces: Vec<(f64, f64)>,
        outer_sphere_radius: Option<f64>,
    },
    /// Voxelized compact set on a uniform lattice.
    VoxelSet(VoxelSet),
}

/// Occupancy mask on a uniform 3D lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet {
    pub spacing: f64,
    pub dims: [usize; 3],
    /// x-fastest ordering: index = ix + nx * (iy + ny * iz).
    pub occupancy: Vec<bool>,
}

impl VoxelSet {
    pub fn cell_count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.dims[0] * (iy + self.dims[1] * iz)
    }

    /// Voxelize a ball of radius `r` on a lattice with the given spacing.
    /// A cell belongs to the set when its centre lies inside the ball.
    pub fn ball(radius: f64, spacing: f64) -> VoxelSet {
        let n = (2.0 * radius / spacing).ceil() as usize + 2;
        let mut occupancy = vec![false; n * n * n];
        let c = 0.5 * n as f64;
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let x = (ix as f64 + 0.5 - c) * spacing;
                    let y = (iy as f64 + 0.5 - c) * spacing;
                    let z = (iz as f64 + 0.5 - c) * spacing;
                    if x * x + y * y + z * z < radius * radius {
                        occupancy[ix + n * (iy + n * iz)] = true;
                    }
                }
            }
        }
        VoxelSet {
            spacing,
            dims: [n, n, n],
            occupancy,
        }
    }
}

impl ConductorGeometry {
    /// Radius of the outermost material point.
    pub fn outermost_radius(&self) -> f64 {
        match self {
            ConductorGeometry::Ball { radius } => *radius,
            ConductorGeometry::NestedShells {
                inner_radius,
                shell_faces,
                outer_sphere_radius,
            } => outer_sphere_radius.unwrap_or(
                shell_faces
                    .last()
                    .map(|&(_, b)| b)
                    .unwrap_or(*inner_radius),
            ),
            ConductorGeometry::VoxelSet(v) => {
                // circumscribed-box bound
                let e = v.dims.iter().cloned().fold(0usize, usize::max) as f64;
                e * v.spacing * (3.0f64).sqrt() / 2.0
            }
        }
    }

    /// Solid radial intervals `[a, b]` occupied by conductor material.
    /// Zero-thickness spheres are reported by `faces`, not here.
    pub fn radial_regions(&self) -> Result<Vec<(f64, f64)>> {
        match self {
            ConductorGeometry::Ball { radius } => Ok(vec![(0.0, *radius)]),
            ConductorGeometry::NestedShells {
                inner_radius,
                shell_faces,
                ..
            } => {
                let mut v = vec![(0.0, *inner_radius)];
                v.extend(shell_faces.iter().cloned());
                Ok(v)
            }
            ConductorGeometry::VoxelSet(_) => Err(Error::UnsupportedGeometry(
                "voxel sets have no radial cross-section".into(),
            )),
        }
    }

    /// All radii at which the conductor has a material surface.
    pub fn faces(&self) -> Result<Vec<f64>> {
        match self {
            ConductorGeometry::Ball { radius } => Ok(vec![*radius]),
            ConductorGeometry::NestedShells {
                inner_radius,
                shell_faces,
                outer_sphere_radius,
            } => {
                let mut v = vec![*inner_radius];
                for &(a, b) in shell_faces {
                    v.push(a);
                    v.push(b);
                }
                if let Some(r) = outer_sphere_radius {
                    v.push(*r);
                }
                Ok(v)
            }
            ConductorGeometry::VoxelSet(_) => Err(Error::UnsupportedGeometry(
                "voxel sets have no radial faces".into(),
            )),
        }
    }

    /// Whether the radius lies in the (closed) conductor set.
    pub fn contains_radius(&self, rho: f64) -> bool {
        match self {
            ConductorGeometry::Ball { radius } => rho <= *radius,
            ConductorGeometry::NestedShells {
                inner_radius,
                shell_faces,
                outer_sphere_radius,
            } => {
                rho <= *inner_radius
                    || shell_faces.iter().any(|&(a, b)| rho >= a && rho <= b)
                    || outer_sphere_radius.map_or(false, |r| rho == r)
            }
            ConductorGeometry::VoxelSet(_) => false,
        }
    }

    /// Lebesgue volume |E| of the conductor.
    pub fn volume(&self) -> f64 {
        match self {
            ConductorGeometry::Ball { radius } => FOUR_PI / 3.0 * radius.powi(3),
            ConductorGeometry::NestedShells {
                inner_radius,
                shell_faces,
                ..
            } => {
                let mut v = FOUR_PI / 3.0 * inner_radius.powi(3);
                for &(a, b) in shell_faces {
                    v += FOUR_PI / 3.0 * (b.powi(3) - a.powi(3));
                }
                v
            }
            ConductorGeometry::VoxelSet(vs) => {
                vs.cell_count() as f64 * vs.spacing.powi(3)
            }
        }
    }
}

/// 1D radial discretization of space with conductor-occupancy flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    node_radii: Vec<f64>,
    r_max: f64,
    /// per-node: node radius lies in the conductor set
    conductor_node: Vec<bool>,
    /// per-cell: cell midpoint lies in the conductor set (len = nodes - 1)
    conductor_cell: Vec<bool>,
    uniform_h: Option<f64>,
}

impl RadialGrid {
    /// Uniform grid on [0, r_max] with `node_count` nodes, flagged against
    /// the geometry's radial cross-section.
    pub fn uniform(
        r_max: f64,
        node_count: usize,
        geometry: &ConductorGeometry,
    ) -> Result<RadialGrid> {
        if node_count < 8 {
            return Err(Error::InvalidScenario("node_count must be at least 8".into()));
        }
        if r_max <= geometry.outermost_radius() {
            return Err(Error::InvalidScenario(
                "r_max must strictly exceed the outermost conductor radius".into(),
            ));
        }
        let h = r_max / (node_count - 1) as f64;
        let node_radii: Vec<f64> = (0..node_count).map(|i| i as f64 * h).collect();
        let conductor_node = node_radii
            .iter()
            .map(|&r| geometry.contains_radius(r))
            .collect();
        let conductor_cell = (0..node_count - 1)
            .map(|i| geometry.contains_radius((node_radii[i] + node_radii[i + 1]) * 0.5))
            .collect();
        Ok(RadialGrid {
            node_radii,
            r_max,
            conductor_node,
            conductor_cell,
            uniform_h: Some(h),
        })
    }

    /// Grid with explicit node radii and no conductor flags (used for
    /// rearranged profiles and free-standing sampled functions).
    pub fn from_radii(node_radii: Vec<f64>) -> Result<RadialGrid> {
        if node_radii.len() < 2 || node_radii[0] != 0.0 {
            return Err(Error::InvalidScenario(
                "node radii must start at 0 and hold at least 2 nodes".into(),
            ));
        }
        if node_radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidScenario(
                "node radii must be strictly increasing".into(),
            ));
        }
        let n = node_radii.len();
        let r_max = node_radii[n - 1];
        Ok(RadialGrid {
            node_radii,
            r_max,
            conductor_node: vec![false; n],
            conductor_cell: vec![false; n - 1],
            uniform_h: None,
        })
    }

    pub fn len(&self) -> usize {
        self.node_radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_radii.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn radii(&self) -> &[f64] {
        &self.node_radii
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.node_radii[i]
    }

    pub fn is_conductor_node(&self, i: usize) -> bool {
        self.conductor_node[i]
    }

    pub fn is_conductor_cell(&self, i: usize) -> bool {
        self.conductor_cell[i]
    }

    /// Spacing of a uniform grid; error for non-uniform grids.
    pub fn spacing(&self) -> Result<f64> {
        self.uniform_h
            .ok_or_else(|| Error::InvalidScenario("operation requires a uniform grid".into()))
    }

    /// Index of the node nearest to `rho`.
    pub fn nearest_node(&self, rho: f64) -> usize {
        match self.uniform_h {
            Some(h) => ((rho / h).round() as usize).min(self.len() - 1),
            None => {
                let mut best = 0;
                let mut bd = f64::INFINITY;
                for (i, &r) in self.node_radii.iter().enumerate() {
                    let d = (r - rho).abs();
                    if d < bd {
                        bd = d;
                        best = i;
                    }
                }
                best
            }
        }
    }

    /// Volume of the shell owned by node `i` (midpoint Voronoi shells).
    pub fn node_volume(&self, i: usize) -> f64 {
        let lo = if i == 0 {
            0.0
        } else {
            0.5 * (self.node_radii[i - 1] + self.node_radii[i])
        };
        let hi = if i + 1 == self.len() {
            self.r_max
        } else {
            0.5 * (self.node_radii[i] + self.node_radii[i + 1])
        };
        FOUR_PI / 3.0 * (hi.powi(3) - lo.powi(3))
    }
}

/// One component of a finite-rank charge distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChargeComponent {
    /// Uniform volume charge over the radial shell a < rho < b.
    VolumeShell { a: f64, b: f64, charge: f64 },
    /// Uniform surface charge on the sphere of the given radius.
    SurfaceSphere { radius: f64, charge: f64 },
}

impl ChargeComponent {
    pub fn charge(&self) -> f64 {
        match self {
            ChargeComponent::VolumeShell { charge, .. } => *charge,
            ChargeComponent::SurfaceSphere { charge, .. } => *charge,
        }
    }
}

/// Finite list of uniform volume shells and surface spheres; the
/// finite-rank representative of a charge distribution with l(1) = q.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChargeDistribution {
    pub components: Vec<ChargeComponent>,
}

impl ChargeDistribution {
    pub fn new(components: Vec<ChargeComponent>) -> ChargeDistribution {
        ChargeDistribution { components }
    }

    /// Algebraic sum of component charges (the constraint value l(1)).
    pub fn total(&self) -> f64 {
        self.components.iter().map(|c| c.charge()).sum()
    }

    /// Split the volume shell at `idx` at an interior radius `at`,
    /// dividing its charge in proportion to shell volume.
    pub fn split_shell(&self, idx: usize, at: f64) -> Result<ChargeDistribution> {
        let ChargeComponent::VolumeShell { a, b, charge } = self.components[idx] else {
            return Err(Error::InvalidScenario("split target is not a volume shell".into()));
        };
        if !(a < at && at < b) {
            return Err(Error::InvalidScenario("split radius outside the shell".into()));
        }
        let vol = b.powi(3) - a.powi(3);
        let lo = charge * (at.powi(3) - a.powi(3)) / vol;
        let mut components = self.components.clone();
        components[idx] = ChargeComponent::VolumeShell { a, b: at, charge: lo };
        components.insert(
            idx + 1,
            ChargeComponent::VolumeShell { a: at, b, charge: charge - lo },
        );
        Ok(ChargeDistribution { components })
    }

    /// Scaled sum alpha * self + beta * other (component lists concatenate).
    pub fn linear_combination(
        alpha: f64,
        d1: &ChargeDistribution,
        beta: f64,
        d2: &ChargeDistribution,
    ) -> ChargeDistribution {
        let scale = |c: &ChargeComponent, s: f64| match *c {
            ChargeComponent::VolumeShell { a, b, charge } => {
                ChargeComponent::VolumeShell { a, b, charge: s * charge }
            }
            ChargeComponent::SurfaceSphere { radius, charge } => {
                ChargeComponent::SurfaceSphere { radius, charge: s * charge }
            }
        };
        let mut components: Vec<ChargeComponent> =
            d1.components.iter().map(|c| scale(c, alpha)).collect();
        components.extend(d2.components.iter().map(|c| scale(c, beta)));
        ChargeDistribution { components }
    }
}

/// Screening and probe parameters of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Screening constant, 1/length.
    pub k: f64,
    /// Total conductor charge.
    pub q: f64,
    /// Probe (electron) charge.
    pub e: f64,
    /// Electron-pair separation.
    pub delta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { k: 0.0, q: 1.0, e: 1.0, delta: DEFAULT_DELTA }
    }
}

/// Report names a scenario may request.
pub const KNOWN_OUTPUTS: &[&str] = &[
    "capacity",
    "equilibrium",
    "potential",
    "forces",
    "photoeffect",
    "nested",
    "voxel",
    "verify",
];

/// Grid request carried by a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_max: f64,
    pub node_count: usize,
}

/// A full problem description: geometry, parameters, grid, outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: ConductorGeometry,
    pub params: ModelParams,
    pub grid: GridSpec,
    pub requested_outputs: Vec<String>,
}

/// Upper Poincare bound sqrt(C(E)/|E|) used for parameter validation.
/// For a ball this is sqrt(3/(4 pi))/r; for other radial geometries the
/// capacity is bounded by the outermost radius.
pub fn k_upper_bound(geometry: &ConductorGeometry) -> f64 {
    (geometry.outermost_radius() / geometry.volume()).sqrt()
}

/// Checks every type invariant; returns one message per violation.
/// An empty list means the scenario is valid. Pure and idempotent.
pub fn validate(scenario: &Scenario) -> Vec<String> {
    let mut v = Vec::new();
    validate_geometry(&scenario.geometry, &mut v);
    let p = &scenario.params;
    if p.k < 0.0 {
        v.push("params.k: screening constant must be nonnegative".into());
    }
    if p.delta <= 0.0 {
        v.push("params.delta: pair separation must be positive".into());
    }
    if matches!(
        scenario.geometry,
        ConductorGeometry::Ball { .. } | ConductorGeometry::NestedShells { .. }
    ) {
        let bound = k_upper_bound(&scenario.geometry);
        if p.k >= bound {
            v.push(format!(
                "params.k: k exceeds upper bound \u{221a}(C/|E|) \u{2248} {:.4}",
                bound
            ));
        }
    }
    if scenario.grid.node_count < 8 {
        v.push("grid.node_count: too few nodes".into());
    }
    if !matches!(scenario.geometry, ConductorGeometry::VoxelSet(_))
        && scenario.grid.r_max <= scenario.geometry.outermost_radius()
    {
        v.push("grid.r_max: must strictly exceed the outermost conductor radius".into());
    }
    for name in &scenario.requested_outputs {
        if !KNOWN_OUTPUTS.contains(&name.as_str()) {
            v.push(format!("requested_outputs: unknown report name '{name}'"));
        }
    }
    v
}

fn validate_geometry(geometry: &ConductorGeometry, v: &mut Vec<String>) {
    match geometry {
        ConductorGeometry::Ball { radius } => {
            if *radius <= 0.0 {
                v.push("geometry.radius: must be strictly positive".into());
            }
        }
        ConductorGeometry::NestedShells {
            inner_radius,
            shell_faces,
            outer_sphere_radius,
        } => {
            if *inner_radius <= 0.0 {
                v.push("geometry.inner_radius: must be strictly positive".into());
            }
            let mut prev = *inner_radius;
            for (i, &(a, b)) in shell_faces.iter().enumerate() {
                if a >= b {
                    v.push(format!("geometry.shell_faces[{i}]: shell bounds reversed"));
                }
                if a <= prev {
                    v.push(format!(
                        "geometry.shell_faces[{i}]: faces must be strictly increasing and disjoint"
                    ));
                }
                prev = b;
            }
            if let Some(r) = outer_sphere_radius {
                if *r <= prev {
                    v.push("geometry.outer_sphere_radius: must exceed the outermost shell face".into());
                }
            }
        }
        ConductorGeometry::VoxelSet(vs) => {
            if vs.spacing <= 0.0 {
                v.push("geometry.spacing: must be strictly positive".into());
            }
            if vs.occupancy.len() != vs.dims[0] * vs.dims[1] * vs.dims[2] {
                v.push("geometry.occupancy: length does not match dims".into());
            }
            if vs.cell_count() == 0 {
                v.push("geometry.occupancy: voxel set is empty".into());
            }
        }
    }
}

/// Checks a charge distribution against a geometry: shell bounds ordered,
/// support inside the conductor set.
pub fn validate_distribution(
    dist: &ChargeDistribution,
    geometry: &ConductorGeometry,
) -> Vec<String> {
    let mut v = Vec::new();
    for (i, c) in dist.components.iter().enumerate() {
        match *c {
            ChargeComponent::VolumeShell { a, b, .. } => {
                if a >= b {
                    v.push(format!("components[{i}]: shell bounds reversed"));
                } else if !(geometry.contains_radius(a.max(f64::MIN_POSITIVE))
                    && geometry.contains_radius(b)
                    && geometry.contains_radius(0.5 * (a + b)))
                {
                    v.push(format!("components[{i}]: shell support leaves the conductor set"));
                }
            }
            ChargeComponent::SurfaceSphere { radius, .. } => {
                if radius <= 0.0 {
                    v.push(format!("components[{i}]: sphere radius must be positive"));
                } else if !geometry.contains_radius(radius) {
                    v.push(format!("components[{i}]: sphere lies outside the conductor set"));
                }
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_scenario(k: f64) -> Scenario {
        Scenario {
            geometry: ConductorGeometry::Ball { radius: 1.0 },
            params: ModelParams { k, q: 1.0, e: 1.0, delta: 0.1 },
            grid: GridSpec { r_max: 10.0, node_count: 2000 },
            requested_outputs: vec!["equilibrium".into()],
        }
    }

    #[test]
    fn valid_ball_scenario_has_no_violations() {
        assert!(validate(&ball_scenario(0.4)).is_empty());
    }

    #[test]
    fn k_above_ball_bound_is_flagged() {
        // sqrt(3/(4 pi)) = 0.48860...
        let violations = validate(&ball_scenario(0.5));
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("k exceeds upper bound"));
        assert!(violations[0].contains("0.4886"));
    }

    #[test]
    fn reversed_shell_bounds_are_flagged() {
        let d = ChargeDistribution::new(vec![ChargeComponent::VolumeShell {
            a: 0.5,
            b: 0.4,
            charge: 1.0,
        }]);
        let v = validate_distribution(&d, &ConductorGeometry::Ball { radius: 1.0 });
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("shell bounds reversed"));
    }

    #[test]
    fn degenerate_zero_thickness_shell_is_rejected() {
        let d = ChargeDistribution::new(vec![ChargeComponent::VolumeShell {
            a: 0.4,
            b: 0.4,
            charge: 1.0,
        }]);
        let v = validate_distribution(&d, &ConductorGeometry::Ball { radius: 1.0 });
        assert!(!v.is_empty());
    }

    #[test]
    fn validate_is_idempotent() {
        let s = ball_scenario(0.5);
        assert_eq!(validate(&s), validate(&s));
    }

    #[test]
    fn split_shell_preserves_total() {
        let d = ChargeDistribution::new(vec![ChargeComponent::VolumeShell {
            a: 0.2,
            b: 0.8,
            charge: 3.0,
        }]);
        let s = d.split_shell(0, 0.5).unwrap();
        assert_eq!(s.components.len(), 2);
        assert!((s.total() - d.total()).abs() < 1e-15);
    }

    #[test]
    fn nested_geometry_volume_and_faces() {
        let g = ConductorGeometry::NestedShells {
            inner_radius: 0.5,
            shell_faces: vec![(0.6, 0.7), (0.8, 0.9)],
            outer_sphere_radius: None,
        };
        assert_eq!(g.faces().unwrap(), vec![0.5, 0.6, 0.7, 0.8, 0.9]);
        assert!(g.contains_radius(0.65));
        assert!(!g.contains_radius(0.75));
        let expected = FOUR_PI / 3.0
            * (0.5f64.powi(3) + (0.7f64.powi(3) - 0.6f64.powi(3))
                + (0.9f64.powi(3) - 0.8f64.powi(3)));
        assert!((g.volume() - expected).abs() < 1e-14);
    }
}
