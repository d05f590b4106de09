//! 3D potential and equilibrium solves on voxelized compact sets.
//!
//! The conductor mask is embedded in a padded box (padding = one conductor
//! diameter per side, so the box spans three diameters); the 7-point
//! operator -(1/4 pi) Lap - k^2 chi_E is inverted matrix-free by conjugate
//! gradients with a geometric multigrid V-cycle preconditioner. Box faces
//! carry the monopole condition U = A_far/|x - c| with A_far from the flux
//! identity, iterated to a fixed point (the padded monopole makes the
//! result insensitive to the exact padding).
//!
//! Determinism: the parallel matvec writes disjoint slabs and reads a
//! frozen input vector; reductions run in a fixed sequential order, so
//! repeated runs are bit-identical. The box is always rebuilt from the
//! mask's bounding box, so whole-cell translations of the mask reproduce
//! the identical arrays bit for bit.

use rayon::prelude::*;

use crate::domain::VoxelSet;
use crate::error::{Error, Result};
use crate::report::fmt12;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const CG_TOL: f64 = 1e-8;
const CG_CAP: usize = 10_000;
const FAR_FIELD_ITERS: usize = 5;

/// A solved potential on the padded box.
#[derive(Debug, Clone)]
pub struct VoxelField {
    pub spacing: f64,
    /// Padded box dimensions (x-fastest storage).
    pub dims: [usize; 3],
    /// Mask-to-box index shift: box = mask + offset per axis.
    pub offset: [isize; 3],
    pub values: Vec<f64>,
    pub far_coefficient: f64,
}

impl VoxelField {
    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[ix + self.dims[0] * (iy + self.dims[1] * iz)]
    }

    /// Value at a mask cell (panics outside the box).
    pub fn at_mask_cell(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        let bx = (ix as isize + self.offset[0]) as usize;
        let by = (iy as isize + self.offset[1]) as usize;
        let bz = (iz as isize + self.offset[2]) as usize;
        self.at(bx, by, bz)
    }
}

/// A solved voxel equilibrium: per-mask-cell charges summing to q, the
/// constant conductor potential A, and the discrete capacity.
#[derive(Debug, Clone)]
pub struct VoxelEquilibrium {
    /// Charge per mask cell (zero off the conductor).
    pub cell_charges: Vec<f64>,
    pub a: f64,
    pub capacity: f64,
    pub field: VoxelField,
}

/// Mask cells with at least one non-mask face neighbor (the discrete
/// conductor surface), as mask indices.
pub fn surface_cells(mask: &VoxelSet) -> Vec<usize> {
    let [nx, ny, nz] = mask.dims;
    let occupied = |ix: isize, iy: isize, iz: isize| -> bool {
        ix >= 0
            && iy >= 0
            && iz >= 0
            && (ix as usize) < nx
            && (iy as usize) < ny
            && (iz as usize) < nz
            && mask.occupancy[ix as usize + nx * (iy as usize + ny * iz as usize)]
    };
    let mut out = Vec::new();
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                if !mask.occupancy[mask.index(ix, iy, iz)] {
                    continue;
                }
                let (x, y, z) = (ix as isize, iy as isize, iz as isize);
                if !occupied(x - 1, y, z)
                    || !occupied(x + 1, y, z)
                    || !occupied(x, y - 1, z)
                    || !occupied(x, y + 1, z)
                    || !occupied(x, y, z - 1)
                    || !occupied(x, y, z + 1)
                {
                    out.push(mask.index(ix, iy, iz));
                }
            }
        }
    }
    out
}

/// Box embedding of a mask: conductor flags on the padded box plus the
/// conductor centroid (box coordinates, cell units).
struct BoxProblem {
    dims: [usize; 3],
    spacing: f64,
    offset: [isize; 3],
    conductor: Vec<bool>,
    centroid: [f64; 3],
    conductor_cells: Vec<usize>,
}

impl BoxProblem {
    fn build(mask: &VoxelSet) -> Result<BoxProblem> {
        let [nx, ny, nz] = mask.dims;
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    if mask.occupancy[mask.index(ix, iy, iz)] {
                        let c = [ix, iy, iz];
                        for a in 0..3 {
                            lo[a] = lo[a].min(c[a]);
                            hi[a] = hi[a].max(c[a]);
                        }
                    }
                }
            }
        }
        if lo[0] == usize::MAX {
            return Err(Error::InvalidScenario("voxel mask is empty".into()));
        }
        let extent = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
        let pad = *extent.iter().max().expect("nonempty") ;
        let dims = [
            extent[0] + 2 * pad,
            extent[1] + 2 * pad,
            extent[2] + 2 * pad,
        ];
        let offset = [
            pad as isize - lo[0] as isize,
            pad as isize - lo[1] as isize,
            pad as isize - lo[2] as isize,
        ];
        let mut conductor = vec![false; dims[0] * dims[1] * dims[2]];
        let mut conductor_cells = Vec::new();
        let mut centroid = [0.0; 3];
        let mut count = 0usize;
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    if !mask.occupancy[mask.index(ix, iy, iz)] {
                        continue;
                    }
                    let b = [
                        (ix as isize + offset[0]) as usize,
                        (iy as isize + offset[1]) as usize,
                        (iz as isize + offset[2]) as usize,
                    ];
                    let idx = b[0] + dims[0] * (b[1] + dims[1] * b[2]);
                    conductor[idx] = true;
                    conductor_cells.push(idx);
                    for a in 0..3 {
                        centroid[a] += b[a] as f64 + 0.5;
                    }
                    count += 1;
                }
            }
        }
        for c in &mut centroid {
            *c /= count as f64;
        }
        Ok(BoxProblem {
            dims,
            spacing: mask.spacing,
            offset,
            conductor,
            centroid,
            conductor_cells,
        })
    }

    fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Distance from a box cell center to the conductor centroid.
    fn centroid_distance(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        let dx = ix as f64 + 0.5 - self.centroid[0];
        let dy = iy as f64 + 0.5 - self.centroid[1];
        let dz = iz as f64 + 0.5 - self.centroid[2];
        self.spacing * (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// y = A x for the operator (1/4 pi h^2)(6x - sum of free neighbors)
/// - k^2 chi x, with `fixed` cells acting as identity rows decoupled from
/// the rest (their couplings live in the right-hand side).
fn apply_operator(
    problem: &BoxProblem,
    k2chi: f64,
    fixed: Option<&[bool]>,
    x: &[f64],
    y: &mut [f64],
) {
    let [nx, ny, nz] = problem.dims;
    let plane = nx * ny;
    let inv = 1.0 / (FOUR_PI * problem.spacing * problem.spacing);
    let conductor = &problem.conductor;
    y.par_chunks_mut(plane).enumerate().for_each(|(iz, slab)| {
        for iy in 0..ny {
            for ix in 0..nx {
                let idx = ix + nx * (iy + ny * iz);
                if let Some(f) = fixed {
                    if f[idx] {
                        slab[ix + nx * iy] = x[idx];
                        continue;
                    }
                }
                let free = |j: usize| -> f64 {
                    match fixed {
                        Some(f) if f[j] => 0.0,
                        _ => x[j],
                    }
                };
                let xm = if ix > 0 { free(idx - 1) } else { 0.0 };
                let xp = if ix + 1 < nx { free(idx + 1) } else { 0.0 };
                let ym = if iy > 0 { free(idx - nx) } else { 0.0 };
                let yp = if iy + 1 < ny { free(idx + nx) } else { 0.0 };
                let zm = if iz > 0 { free(idx - plane) } else { 0.0 };
                let zp = if iz + 1 < nz { free(idx + plane) } else { 0.0 };
                // axis-paired sums keep mirror symmetry bitwise exact
                let nb = (xm + xp) + (ym + yp) + (zm + zp);
                let mut v = inv * (6.0 * x[idx] - nb);
                if k2chi != 0.0 && conductor[idx] {
                    v -= k2chi * x[idx];
                }
                slab[ix + nx * iy] = v;
            }
        }
    });
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Geometric multigrid V-cycle on the box Laplacian with zero-Dirichlet
/// faces, used as a CG preconditioner. Transfers are cell-centered
/// trilinear prolongation and its volume-scaled adjoint; smoothing is
/// damped Jacobi, which keeps the cycle symmetric positive definite.
/// Conductor rows and the screening term are left to the Krylov loop.
struct MgLevel {
    dims: [usize; 3],
    inv: f64, // 1/(4 pi h^2) at this level
    b: Vec<f64>,
    x: Vec<f64>,
    r: Vec<f64>,
}

struct Multigrid {
    levels: Vec<MgLevel>,
}

/// 7-point Laplacian (1/4 pi h^2)(6x - sum of neighbors), zero outside.
fn mg_laplace(dims: [usize; 3], inv: f64, x: &[f64], y: &mut [f64]) {
    let [nx, ny, nz] = dims;
    let plane = nx * ny;
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let idx = ix + nx * (iy + ny * iz);
                let xm = if ix > 0 { x[idx - 1] } else { 0.0 };
                let xp = if ix + 1 < nx { x[idx + 1] } else { 0.0 };
                let ym = if iy > 0 { x[idx - nx] } else { 0.0 };
                let yp = if iy + 1 < ny { x[idx + nx] } else { 0.0 };
                let zm = if iz > 0 { x[idx - plane] } else { 0.0 };
                let zp = if iz + 1 < nz { x[idx + plane] } else { 0.0 };
                y[idx] = inv * (6.0 * x[idx] - ((xm + xp) + (ym + yp) + (zm + zp)));
            }
        }
    }
}

/// Per-axis cell-center interpolation stencil from a coarse axis of nc
/// cells to a fine axis: fine center i maps to coarse coordinate i/2 - 1/4.
fn mg_axis_weights(nf: usize, nc: usize) -> Vec<(usize, usize, f64, f64)> {
    (0..nf)
        .map(|i| {
            let c = 0.5 * i as f64 - 0.25;
            let fl = c.floor();
            let w1 = c - fl;
            let i0 = (fl as isize).clamp(0, nc as isize - 1) as usize;
            let i1 = (fl as isize + 1).clamp(0, nc as isize - 1) as usize;
            (i0, i1, 1.0 - w1, w1)
        })
        .collect()
}

impl Multigrid {
    fn new(dims: [usize; 3], spacing: f64) -> Multigrid {
        let mut levels = Vec::new();
        let mut d = dims;
        let mut h = spacing;
        loop {
            let n = d[0] * d[1] * d[2];
            levels.push(MgLevel {
                dims: d,
                inv: 1.0 / (FOUR_PI * h * h),
                b: vec![0.0; n],
                x: vec![0.0; n],
                r: vec![0.0; n],
            });
            if d.iter().all(|&m| m <= 6) || levels.len() >= 8 {
                break;
            }
            d = [(d[0] + 1) / 2, (d[1] + 1) / 2, (d[2] + 1) / 2];
            h *= 2.0;
        }
        Multigrid { levels }
    }

    fn jacobi(level: &mut MgLevel, sweeps: usize) {
        let omega = 0.8;
        let diag = 6.0 * level.inv;
        for _ in 0..sweeps {
            mg_laplace(level.dims, level.inv, &level.x, &mut level.r);
            for i in 0..level.x.len() {
                level.x[i] += omega * (level.b[i] - level.r[i]) / diag;
            }
        }
    }

    fn v_cycle(&mut self) {
        let last = self.levels.len() - 1;
        for l in 0..last {
            let (lo, hi) = self.levels.split_at_mut(l + 1);
            let fine = &mut lo[l];
            let coarse = &mut hi[0];
            fine.x.iter_mut().for_each(|v| *v = 0.0);
            Multigrid::jacobi(fine, 2);
            mg_laplace(fine.dims, fine.inv, &fine.x, &mut fine.r);
            for i in 0..fine.r.len() {
                fine.r[i] = fine.b[i] - fine.r[i];
            }
            // restriction: volume-scaled adjoint of trilinear interpolation
            coarse.b.iter_mut().for_each(|v| *v = 0.0);
            let wx = mg_axis_weights(fine.dims[0], coarse.dims[0]);
            let wy = mg_axis_weights(fine.dims[1], coarse.dims[1]);
            let wz = mg_axis_weights(fine.dims[2], coarse.dims[2]);
            let (nxf, nxc) = (fine.dims[0], coarse.dims[0]);
            let nyc = coarse.dims[1];
            for iz in 0..fine.dims[2] {
                let (z0, z1, wz0, wz1) = wz[iz];
                for iy in 0..fine.dims[1] {
                    let (y0, y1, wy0, wy1) = wy[iy];
                    for ix in 0..fine.dims[0] {
                        let (x0, x1, wx0, wx1) = wx[ix];
                        let v = 0.125 * fine.r[ix + nxf * (iy + fine.dims[1] * iz)];
                        for &(zi, wzv) in &[(z0, wz0), (z1, wz1)] {
                            for &(yi, wyv) in &[(y0, wy0), (y1, wy1)] {
                                let base = nxc * (yi + nyc * zi);
                                coarse.b[x0 + base] += v * wzv * wyv * wx0;
                                coarse.b[x1 + base] += v * wzv * wyv * wx1;
                            }
                        }
                    }
                }
            }
        }
        {
            let bottom = &mut self.levels[last];
            bottom.x.iter_mut().for_each(|v| *v = 0.0);
            Multigrid::jacobi(bottom, 40);
        }
        for l in (0..last).rev() {
            let (lo, hi) = self.levels.split_at_mut(l + 1);
            let fine = &mut lo[l];
            let coarse = &hi[0];
            let wx = mg_axis_weights(fine.dims[0], coarse.dims[0]);
            let wy = mg_axis_weights(fine.dims[1], coarse.dims[1]);
            let wz = mg_axis_weights(fine.dims[2], coarse.dims[2]);
            let (nxf, nxc) = (fine.dims[0], coarse.dims[0]);
            let nyc = coarse.dims[1];
            for iz in 0..fine.dims[2] {
                let (z0, z1, wz0, wz1) = wz[iz];
                for iy in 0..fine.dims[1] {
                    let (y0, y1, wy0, wy1) = wy[iy];
                    for ix in 0..fine.dims[0] {
                        let (x0, x1, wx0, wx1) = wx[ix];
                        let mut v = 0.0;
                        for &(zi, wzv) in &[(z0, wz0), (z1, wz1)] {
                            for &(yi, wyv) in &[(y0, wy0), (y1, wy1)] {
                                let base = nxc * (yi + nyc * zi);
                                v += wzv * wyv * (wx0 * coarse.x[x0 + base] + wx1 * coarse.x[x1 + base]);
                            }
                        }
                        fine.x[ix + nxf * (iy + fine.dims[1] * iz)] += v;
                    }
                }
            }
            Multigrid::jacobi(fine, 2);
        }
    }

    /// z = M r, projected onto the free cells when a fixed set is given.
    fn precondition(&mut self, fixed: Option<&[bool]>, r: &[f64], z: &mut [f64]) {
        let free = |i: usize| fixed.map_or(true, |f| !f[i]);
        for i in 0..r.len() {
            self.levels[0].b[i] = if free(i) { r[i] } else { 0.0 };
        }
        self.v_cycle();
        for i in 0..r.len() {
            z[i] = if free(i) { self.levels[0].x[i] } else { r[i] };
        }
    }
}

/// Conjugate gradients with indefiniteness detection; `x` carries the
/// initial guess and the solution. Fixed cells must already hold their
/// values in `x` and zeros in `rhs` mismatch (identity rows).
fn conjugate_gradients(
    problem: &BoxProblem,
    k2chi: f64,
    fixed: Option<&[bool]>,
    mg: &mut Multigrid,
    rhs: &[f64],
    x: &mut [f64],
) -> Result<()> {
    let n = problem.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply_operator(problem, k2chi, fixed, x, &mut ap);
    for i in 0..n {
        r[i] = rhs[i] - ap[i];
    }
    let rhs_norm = dot(rhs, rhs).sqrt().max(f64::MIN_POSITIVE);
    if dot(&r, &r).sqrt() <= CG_TOL * rhs_norm {
        return Ok(());
    }
    mg.precondition(fixed, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..CG_CAP {
        apply_operator(problem, k2chi, fixed, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::IndefiniteForm(
                "voxel operator is not positive definite; k is too large".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= CG_TOL * rhs_norm {
            return Ok(());
        }
        mg.precondition(fixed, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence(CG_CAP, dot(&r, &r).sqrt() / rhs_norm))
}

/// Right-hand-side contribution of the monopole boundary values: ghost
/// cells just outside the box hold a_far / distance.
fn boundary_rhs(problem: &BoxProblem, a_far: f64, rhs: &mut [f64]) {
    let [nx, ny, nz] = problem.dims;
    let inv = 1.0 / (FOUR_PI * problem.spacing * problem.spacing);
    let mut add = |ix: isize, iy: isize, iz: isize, gx: isize, gy: isize, gz: isize| {
        let idx = ix as usize + nx * (iy as usize + ny * iz as usize);
        let dx = gx as f64 + 0.5 - problem.centroid[0];
        let dy = gy as f64 + 0.5 - problem.centroid[1];
        let dz = gz as f64 + 0.5 - problem.centroid[2];
        let dist = problem.spacing * (dx * dx + dy * dy + dz * dz).sqrt();
        rhs[idx] += inv * a_far / dist;
    };
    for iz in 0..nz as isize {
        for iy in 0..ny as isize {
            add(0, iy, iz, -1, iy, iz);
            add(nx as isize - 1, iy, iz, nx as isize, iy, iz);
        }
    }
    for iz in 0..nz as isize {
        for ix in 0..nx as isize {
            add(ix, 0, iz, ix, -1, iz);
            add(ix, ny as isize - 1, iz, ix, ny as isize, iz);
        }
    }
    for iy in 0..ny as isize {
        for ix in 0..nx as isize {
            add(ix, iy, 0, ix, iy, -1);
            add(ix, iy, nz as isize - 1, ix, iy, nz as isize);
        }
    }
}

/// Solves the discrete weak form on the padded box for per-mask-cell
/// charges. `charges` indexes the mask's occupancy array; all charge must
/// sit on mask cells.
pub fn solve_voxel_potential(mask: &VoxelSet, charges: &[f64], k: f64) -> Result<VoxelField> {
    if charges.len() != mask.occupancy.len() {
        return Err(Error::GridMismatch);
    }
    let problem = BoxProblem::build(mask)?;
    let [nx, ny, nz] = mask.dims;
    let h = mask.spacing;
    let h3 = h * h * h;
    let mut density = vec![0.0; problem.len()];
    let mut total_charge = 0.0;
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let c = charges[mask.index(ix, iy, iz)];
                if c == 0.0 {
                    continue;
                }
                if !mask.occupancy[mask.index(ix, iy, iz)] {
                    return Err(Error::InvalidScenario(
                        "charge placed outside the mask".into(),
                    ));
                }
                let idx = (ix as isize + problem.offset[0]) as usize
                    + problem.dims[0]
                        * ((iy as isize + problem.offset[1]) as usize
                            + problem.dims[1] * ((iz as isize + problem.offset[2]) as usize));
                density[idx] += c / h3;
                total_charge += c;
            }
        }
    }
    let k2 = k * k;
    let mut values = vec![0.0; problem.len()];
    let mut mg = Multigrid::new(problem.dims, problem.spacing);
    let mut a_far = total_charge;
    for _ in 0..FAR_FIELD_ITERS {
        let mut rhs = density.clone();
        boundary_rhs(&problem, a_far, &mut rhs);
        conjugate_gradients(&problem, k2, None, &mut mg, &rhs, &mut values)?;
        let integral: f64 = problem.conductor_cells.iter().map(|&i| values[i]).sum::<f64>() * h3;
        let a_new = total_charge + k2 * integral;
        let done = (a_new - a_far).abs() <= 1e-10 * a_new.abs().max(1e-300);
        a_far = a_new;
        if done || k2 == 0.0 {
            break;
        }
    }
    Ok(VoxelField {
        spacing: h,
        dims: problem.dims,
        offset: problem.offset,
        values,
        far_coefficient: a_far,
    })
}

/// Solves the k-equilibrium on a voxel conductor by the unit-potential
/// reduction: fix U = 1 on conductor cells, solve the exterior Laplace
/// problem, read off the cell charges from the full operator, then scale
/// so the total is q. The scale is the constant potential A, and the
/// discrete capacity comes out of the same pass.
pub fn solve_voxel_equilibrium(mask: &VoxelSet, q: f64, k: f64) -> Result<VoxelEquilibrium> {
    let problem = BoxProblem::build(mask)?;
    let [bx, by, bz] = problem.dims;
    let plane = bx * by;
    let h = mask.spacing;
    let h3 = h * h * h;
    let inv = 1.0 / (FOUR_PI * h * h);

    // unit-Dirichlet solve: monopole initial guess accelerates CG
    let volume = problem.conductor_cells.len() as f64 * h3;
    let r_eff = (3.0 * volume / FOUR_PI).cbrt();
    let mut values = vec![0.0; problem.len()];
    for iz in 0..bz {
        for iy in 0..by {
            for ix in 0..bx {
                let idx = ix + bx * (iy + by * iz);
                values[idx] = if problem.conductor[idx] {
                    1.0
                } else {
                    (r_eff / problem.centroid_distance(ix, iy, iz)).min(1.0)
                };
            }
        }
    }

    let fixed = problem.conductor.clone();
    let mut mg = Multigrid::new(problem.dims, problem.spacing);
    let mut a_far = r_eff; // capacity-of-a-ball first guess
    let mut capacity = 0.0;
    for _ in 0..FAR_FIELD_ITERS {
        let mut rhs = vec![0.0; problem.len()];
        boundary_rhs(&problem, a_far, &mut rhs);
        // couplings to the fixed unit values
        for &idx in &problem.conductor_cells {
            rhs[idx] = 1.0; // identity row
            let (ix, iy, iz) = (
                idx % bx,
                (idx / bx) % by,
                idx / plane,
            );
            let mut bump = |jx: usize, jy: usize, jz: usize| {
                let j = jx + bx * (jy + by * jz);
                if !problem.conductor[j] {
                    rhs[j] += inv;
                }
            };
            if ix > 0 {
                bump(ix - 1, iy, iz);
            }
            if ix + 1 < bx {
                bump(ix + 1, iy, iz);
            }
            if iy > 0 {
                bump(ix, iy - 1, iz);
            }
            if iy + 1 < by {
                bump(ix, iy + 1, iz);
            }
            if iz > 0 {
                bump(ix, iy, iz - 1);
            }
            if iz + 1 < bz {
                bump(ix, iy, iz + 1);
            }
        }
        conjugate_gradients(&problem, 0.0, Some(&fixed), &mut mg, &rhs, &mut values)?;
        // discrete capacity: (1/4 pi) flux out of the conductor cells
        let mut flux = 0.0;
        for &idx in &problem.conductor_cells {
            let (ix, iy, iz) = (idx % bx, (idx / bx) % by, idx / plane);
            let mut take = |jx: usize, jy: usize, jz: usize| {
                let j = jx + bx * (jy + by * jz);
                if !problem.conductor[j] {
                    flux += 1.0 - values[j];
                }
            };
            if ix > 0 {
                take(ix - 1, iy, iz);
            }
            if ix + 1 < bx {
                take(ix + 1, iy, iz);
            }
            if iy > 0 {
                take(ix, iy - 1, iz);
            }
            if iy + 1 < by {
                take(ix, iy + 1, iz);
            }
            if iz > 0 {
                take(ix, iy, iz - 1);
            }
            if iz + 1 < bz {
                take(ix, iy, iz + 1);
            }
        }
        capacity = flux * h / FOUR_PI;
        let done = (capacity - a_far).abs() <= 1e-10 * capacity.abs().max(1e-300);
        a_far = capacity;
        if done {
            break;
        }
    }

    let denominator = capacity - k * k * volume;
    if denominator <= 0.0 {
        return Err(Error::IndefiniteForm(format!(
            "k^2 |E| = {:.6} reaches the discrete capacity {:.6}",
            k * k * volume,
            capacity
        )));
    }
    let a = q / denominator;

    // cell charges from the full operator applied to the unit solution
    let mut cell_charges = vec![0.0; mask.occupancy.len()];
    let [nx, ny, nz] = mask.dims;
    let mut total = 0.0;
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let m = mask.index(ix, iy, iz);
                if !mask.occupancy[m] {
                    continue;
                }
                let b = [
                    (ix as isize + problem.offset[0]) as usize,
                    (iy as isize + problem.offset[1]) as usize,
                    (iz as isize + problem.offset[2]) as usize,
                ];
                let idx = b[0] + bx * (b[1] + by * b[2]);
                let nb = values[idx - 1]
                    + values[idx + 1]
                    + values[idx - bx]
                    + values[idx + bx]
                    + values[idx - plane]
                    + values[idx + plane];
                let f_hat = inv * (6.0 * values[idx] - nb) - k * k * values[idx];
                cell_charges[m] = a * f_hat * h3;
                total += cell_charges[m];
            }
        }
    }
    // exact constraint: distribute the quadrature residue proportionally
    if total != 0.0 {
        let scale = q / total;
        for c in &mut cell_charges {
            *c *= scale;
        }
    }

    let mut field_values = values;
    for v in &mut field_values {
        *v *= a;
    }
    Ok(VoxelEquilibrium {
        cell_charges,
        a,
        capacity,
        field: VoxelField {
            spacing: h,
            dims: problem.dims,
            offset: problem.offset,
            values: field_values,
            far_coefficient: a * a_far,
        },
    })
}

/// Conservative Poincare-type surrogate for a voxel set: square root of
/// the smallest eigenvalue of the discrete Dirichlet form against the
/// conductor-restricted mass, by inverse power iteration (the spacing
/// cancels from the quotient). A coarse screening bound, not a certified
/// constant.
pub fn voxel_poincare_estimate(mask: &VoxelSet) -> Result<f64> {
    let problem = BoxProblem::build(mask)?;
    let mut mg = Multigrid::new(problem.dims, problem.spacing);
    let n = problem.len();
    let mut x = vec![0.0; n];
    for &idx in &problem.conductor_cells {
        x[idx] = 1.0;
    }
    let mut lambda = 0.0;
    let mut ax = vec![0.0; n];
    for _ in 0..6 {
        let b: Vec<f64> = (0..n)
            .map(|i| if problem.conductor[i] { x[i] } else { 0.0 })
            .collect();
        let mut z = x.clone();
        conjugate_gradients(&problem, 0.0, None, &mut mg, &b, &mut z)?;
        let norm = dot(&z, &z).sqrt();
        if norm == 0.0 {
            return Err(Error::SingularSystem("voxel power iteration collapsed".into()));
        }
        for v in &mut z {
            *v /= norm;
        }
        x = z;
        apply_operator(&problem, 0.0, None, &x, &mut ax);
        let num = dot(&x, &ax);
        let den: f64 = problem.conductor_cells.iter().map(|&i| x[i] * x[i]).sum();
        lambda = num / den;
    }
    Ok(lambda.sqrt())
}

/// Mask export: header line `nx ny nz spacing`, then run lengths of the
/// x-fastest occupancy, alternating starting with an empty run (the first
/// run may be 0).
pub fn mask_to_rle(mask: &VoxelSet) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        mask.dims[0],
        mask.dims[1],
        mask.dims[2],
        fmt12(mask.spacing)
    );
    let mut runs: Vec<usize> = Vec::new();
    let mut current = false;
    let mut count = 0usize;
    runs.push(0); // leading empty run, possibly zero-length
    for &b in &mask.occupancy {
        if b == current {
            count += 1;
        } else {
            *runs.last_mut().expect("nonempty") = count;
            runs.push(0);
            current = b;
            count = 1;
        }
    }
    *runs.last_mut().expect("nonempty") = count;
    for (i, r) in runs.iter().enumerate() {
        if i > 0 {
            out.push(if i % 16 == 0 { '\n' } else { ' ' });
        }
        out.push_str(&r.to_string());
    }
    out.push('\n');
    out
}

/// Parses the RLE mask format written by `mask_to_rle`.
pub fn mask_from_rle(text: &str) -> Result<VoxelSet> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidScenario("empty mask file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::InvalidScenario(
            "mask header must be `nx ny nz spacing`".into(),
        ));
    }
    let nx: usize = parts[0].parse().map_err(|_| bad_header())?;
    let ny: usize = parts[1].parse().map_err(|_| bad_header())?;
    let nz: usize = parts[2].parse().map_err(|_| bad_header())?;
    let spacing: f64 = parts[3].parse().map_err(|_| bad_header())?;
    if spacing <= 0.0 {
        return Err(Error::InvalidScenario("mask spacing must be positive".into()));
    }
    let total = nx * ny * nz;
    let mut occupancy = Vec::with_capacity(total);
    let mut value = false;
    for token in lines.flat_map(|l| l.split_whitespace()) {
        let run: usize = token
            .parse()
            .map_err(|_| Error::InvalidScenario(format!("bad run length '{token}'")))?;
        occupancy.extend(std::iter::repeat(value).take(run));
        value = !value;
    }
    if occupancy.len() != total {
        return Err(Error::InvalidScenario(format!(
            "mask runs cover {} cells, expected {total}",
            occupancy.len()
        )));
    }
    Ok(VoxelSet { spacing, dims: [nx, ny, nz], occupancy })
}

fn bad_header() -> Error {
    Error::InvalidScenario("mask header must be `nx ny nz spacing`".into())
}

/// Field export: x-fastest 64-bit little-endian floats.
pub fn field_to_bytes(field: &VoxelField) -> Vec<u8> {
    let mut out = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Text sidecar describing the binary field layout.
pub fn field_sidecar(field: &VoxelField) -> String {
    format!(
        "dims {} {} {}\nspacing {}\nmask_offset {} {} {}\norder x-fastest\nencoding f64-le\nfar_coefficient {}\n",
        field.dims[0],
        field.dims[1],
        field.dims[2],
        fmt12(field.spacing),
        field.offset[0],
        field.offset[1],
        field.offset[2],
        fmt12(field.far_coefficient)
    )
}
