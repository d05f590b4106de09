//! Scenario files: TOML with fields mirroring [`crate::domain::Scenario`].
//! Unknown keys are rejected (strict parsing) so a typo never silently
//! falls back to a default.

use std::path::Path;

use serde::Deserialize;

use crate::domain::{
    ConductorGeometry, GridSpec, ModelParams, Scenario, VoxelSet, DEFAULT_DELTA,
};
use crate::error::{Error, Result};
use crate::voxel::mask_from_rle;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    geometry: GeometryFile,
    #[serde(default)]
    params: ParamsFile,
    #[serde(default)]
    grid: Option<GridFile>,
    #[serde(default)]
    requested_outputs: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    /// "ball", "nested_shells", or "voxel".
    shape: String,
    radius: Option<f64>,
    inner_radius: Option<f64>,
    shell_faces: Option<Vec<[f64; 2]>>,
    outer_sphere_radius: Option<f64>,
    /// RLE mask file for voxel shapes, resolved against the scenario file.
    mask: Option<String>,
    /// Lattice spacing when voxelizing a ball in place of a mask file.
    spacing: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    k: Option<f64>,
    q: Option<f64>,
    e: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    r_max: f64,
    node_count: usize,
}

/// Default grid when a scenario omits the `[grid]` table.
pub const DEFAULT_GRID: GridSpec = GridSpec { r_max: 10.0, node_count: 2001 };

/// Parses scenario TOML. `base_dir` anchors relative mask paths; pass
/// `None` to forbid file references (e.g. when parsing untrusted text).
pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<Scenario> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
    let geometry = convert_geometry(&file.geometry, base_dir)?;
    let params = ModelParams {
        k: file.params.k.unwrap_or(0.0),
        q: file.params.q.unwrap_or(1.0),
        e: file.params.e.unwrap_or(1.0),
        delta: file.params.delta.unwrap_or(DEFAULT_DELTA),
    };
    let grid = file
        .grid
        .map(|g| GridSpec { r_max: g.r_max, node_count: g.node_count })
        .unwrap_or(DEFAULT_GRID);
    Ok(Scenario {
        geometry,
        params,
        grid,
        requested_outputs: file.requested_outputs,
    })
}

/// Loads and parses a scenario file; mask paths resolve relative to it.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text, path.parent())
}

fn convert_geometry(g: &GeometryFile, base_dir: Option<&Path>) -> Result<ConductorGeometry> {
    match g.shape.as_str() {
        "ball" => {
            let radius = g
                .radius
                .ok_or_else(|| missing("ball", "radius"))?;
            reject_irrelevant(g, &["radius"])?;
            Ok(ConductorGeometry::Ball { radius })
        }
        "nested_shells" => {
            let inner_radius = g
                .inner_radius
                .ok_or_else(|| missing("nested_shells", "inner_radius"))?;
            reject_irrelevant(g, &["inner_radius", "shell_faces", "outer_sphere_radius"])?;
            Ok(ConductorGeometry::NestedShells {
                inner_radius,
                shell_faces: g
                    .shell_faces
                    .clone()
                    .unwrap_or_default()
                    .into_iter()
                    .map(|[a, b]| (a, b))
                    .collect(),
                outer_sphere_radius: g.outer_sphere_radius,
            })
        }
        "voxel" => {
            reject_irrelevant(g, &["mask", "radius", "spacing"])?;
            let mask = match (&g.mask, g.radius, g.spacing) {
                (Some(path), None, _) => {
                    let dir = base_dir.ok_or_else(|| {
                        Error::InvalidScenario(
                            "geometry.mask: file references are not allowed here".into(),
                        )
                    })?;
                    mask_from_rle(&std::fs::read_to_string(dir.join(path))?)?
                }
                (None, Some(radius), Some(spacing)) => VoxelSet::ball(radius, spacing),
                _ => {
                    return Err(Error::InvalidScenario(
                        "voxel geometry needs either `mask` or `radius` + `spacing`".into(),
                    ))
                }
            };
            Ok(ConductorGeometry::VoxelSet(mask))
        }
        other => Err(Error::InvalidScenario(format!(
            "geometry.shape: unknown shape '{other}' (expected ball, nested_shells, or voxel)"
        ))),
    }
}

fn missing(shape: &str, field: &str) -> Error {
    Error::InvalidScenario(format!("geometry.{field}: required for shape '{shape}'"))
}

/// Strictness beyond serde: fields belonging to a different shape are
/// errors, not ignored leftovers.
fn reject_irrelevant(g: &GeometryFile, allowed: &[&str]) -> Result<()> {
    let present: &[(&str, bool)] = &[
        ("radius", g.radius.is_some()),
        ("inner_radius", g.inner_radius.is_some()),
        ("shell_faces", g.shell_faces.is_some()),
        ("outer_sphere_radius", g.outer_sphere_radius.is_some()),
        ("mask", g.mask.is_some()),
        ("spacing", g.spacing.is_some()),
    ];
    for &(name, set) in present {
        if set && !allowed.contains(&name) {
            return Err(Error::InvalidScenario(format!(
                "geometry.{name}: not a field of shape '{}'",
                g.shape
            )));
        }
    }
    Ok(())
}
