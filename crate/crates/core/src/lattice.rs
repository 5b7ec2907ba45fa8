//! Landscape analysis of periodic 2D potentials: grid sampling over a unit
//! cell, extremum location and Hessian classification, channel profiles,
//! bond barriers between adjacent minima, geometry classification, and a
//! bisection solver for phase knobs.
//!
//! Refinement is derivative-free: Nelder-Mead brings a grid seed close to a
//! critical point, then a finite-difference Newton polish on the gradient
//! drives the position to the requested tolerance without any analytic
//! derivatives.

use std::io::Write;

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::constants::H;
use crate::error::{Error, Result};
use crate::shift::recoil_energy;

/// Relative tolerance (of the landscape value range) below which two depths
/// count as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-6;

/// Fractional-coordinate convergence target of extremum refinement.
const REFINE_TOL: f64 = 1e-10;

/// Maximum refinement steps before reporting non-convergence.
const MAX_REFINE_STEPS: usize = 10_000;

/// Duplicate-merge radius in units of |a1|.
const MERGE_TOL: f64 = 1e-6;

/// A 2D periodic cell spanned by in-plane lattice vectors [m].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCell {
    pub a1: Vector3<f64>,
    pub a2: Vector3<f64>,
    pub origin: Vector3<f64>,
}

impl UnitCell {
    pub fn new(a1: Vector3<f64>, a2: Vector3<f64>, origin: Vector3<f64>) -> Result<UnitCell> {
        let area = a1.cross(&a2).norm();
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::Validation(
                "unit cell vectors must be linearly independent".into(),
            ));
        }
        Ok(UnitCell { a1, a2, origin })
    }

    /// Cartesian position of fractional coordinates (u, v).
    pub fn position(&self, u: f64, v: f64) -> Vector3<f64> {
        self.origin + self.a1 * u + self.a2 * v
    }

    /// Fractional coordinates of an (in-plane) point.
    pub fn fractional(&self, r: &Vector3<f64>) -> (f64, f64) {
        let d = r - self.origin;
        let det = self.a1.x * self.a2.y - self.a1.y * self.a2.x;
        let u = (d.x * self.a2.y - d.y * self.a2.x) / det;
        let v = (self.a1.x * d.y - self.a1.y * d.x) / det;
        (u, v)
    }

    /// Wrap a point into the fundamental cell (fractional [0, 1)).
    pub fn wrap(&self, r: &Vector3<f64>) -> Vector3<f64> {
        let (u, v) = self.fractional(r);
        self.position(u.rem_euclid(1.0), v.rem_euclid(1.0))
    }

    /// Shortest displacement from `a` to `b` under periodic images.
    pub fn min_image(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
        let (du, dv) = {
            let (ua, va) = self.fractional(a);
            let (ub, vb) = self.fractional(b);
            (ub - ua, vb - va)
        };
        let mut best = f64::INFINITY;
        let mut best_vec = Vector3::zeros();
        for nu in -1..=1 {
            for nv in -1..=1 {
                let w = self.a1 * (du - du.round() + nu as f64)
                    + self.a2 * (dv - dv.round() + nv as f64);
                let n = w.norm();
                if n < best {
                    best = n;
                    best_vec = w;
                }
            }
        }
        best_vec
    }

    /// Shortest distance between two points under periodic images.
    pub fn min_image_distance(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        self.min_image(a, b).norm()
    }
}

/// Sampled potential over a unit cell (row-major, `values[ix * ny + iy]`).
#[derive(Debug, Clone)]
pub struct PotentialGrid {
    pub cell: UnitCell,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl PotentialGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.ny + iy]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Max minus min of the sampled values.
    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }
}

/// Kind of a critical point as classified by the finite-difference Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Saddle,
}

impl CriticalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalKind::Minimum => "minimum",
            CriticalKind::Maximum => "maximum",
            CriticalKind::Saddle => "saddle",
        }
    }
}

/// A refined critical point of the landscape.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub position: Vector3<f64>,
    pub value: f64,
    pub kind: CriticalKind,
    pub label: Option<String>,
}

/// Saddle between two adjacent minima, with one-sided barrier heights.
#[derive(Debug, Clone, PartialEq)]
pub struct BondBarrier {
    /// Indices into the minima list handed to [`bond_barriers`].
    pub site_a: usize,
    pub site_b: usize,
    /// Periodic image of site_b relative to site_a, in cell coordinates.
    pub image_offset: [i32; 2],
    pub distance: f64,
    pub saddle_position: Vector3<f64>,
    pub saddle_value: f64,
    /// saddle_value - value(site_a); likewise for b. Both >= 0.
    pub barrier_a: f64,
    pub barrier_b: f64,
}

impl BondBarrier {
    /// The smaller of the two one-sided barriers: the hop height between the
    /// wells.
    pub fn height(&self) -> f64 {
        self.barrier_a.min(self.barrier_b)
    }
}

/// Geometry class of a landscape (see [`classify_geometry`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryLabel {
    DoubleWellLR,
    DoubleWellLL,
    DoubleWellLRt,
    IsolatedSquare,
    IsolatedTriangle,
    IsolatedHexagon,
    SimpleBravais,
    Unknown,
}

impl GeometryLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeometryLabel::DoubleWellLR => "DoubleWellLR",
            GeometryLabel::DoubleWellLL => "DoubleWellLL",
            GeometryLabel::DoubleWellLRt => "DoubleWellLRt",
            GeometryLabel::IsolatedSquare => "IsolatedSquare",
            GeometryLabel::IsolatedTriangle => "IsolatedTriangle",
            GeometryLabel::IsolatedHexagon => "IsolatedHexagon",
            GeometryLabel::SimpleBravais => "SimpleBravais",
            GeometryLabel::Unknown => "Unknown",
        }
    }
}

// ---------------------------------------------------------------------------
// Grid sampling
// ---------------------------------------------------------------------------

/// Sample `values[ix][iy] = U(origin + (ix/nx) a1 + (iy/ny) a2)`.
pub fn sample_grid(
    evaluator: impl Fn(&Vector3<f64>) -> f64,
    cell: &UnitCell,
    nx: usize,
    ny: usize,
) -> Result<PotentialGrid> {
    if nx < 8 || ny < 8 {
        return Err(Error::InvalidInput(format!(
            "grid must be at least 8x8, got {nx}x{ny}"
        )));
    }
    let mut values = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        for iy in 0..ny {
            let r = cell.position(ix as f64 / nx as f64, iy as f64 / ny as f64);
            let u = evaluator(&r);
            if !u.is_finite() {
                return Err(Error::Convergence(format!(
                    "potential is not finite at grid node ({ix}, {iy})"
                )));
            }
            values.push(u);
        }
    }
    Ok(PotentialGrid {
        cell: cell.clone(),
        nx,
        ny,
        values,
    })
}

// ---------------------------------------------------------------------------
// Extremum finding
// ---------------------------------------------------------------------------

struct Landscape<'a> {
    cell: &'a UnitCell,
    eval: &'a dyn Fn(&Vector3<f64>) -> f64,
    /// Finite-difference step for gradients/Hessians, fractional units of a1.
    h_frac: f64,
}

impl<'a> Landscape<'a> {
    fn at(&self, p: Vector2<f64>) -> f64 {
        (self.eval)(&self.cell.position(p.x, p.y))
    }

    fn gradient(&self, p: Vector2<f64>) -> Vector2<f64> {
        let h = self.h_frac;
        Vector2::new(
            (self.at(p + Vector2::new(h, 0.0)) - self.at(p - Vector2::new(h, 0.0))) / (2.0 * h),
            (self.at(p + Vector2::new(0.0, h)) - self.at(p - Vector2::new(0.0, h))) / (2.0 * h),
        )
    }

    fn hessian(&self, p: Vector2<f64>) -> Matrix2<f64> {
        let h = self.h_frac;
        let f0 = self.at(p);
        let fxx = (self.at(p + Vector2::new(h, 0.0)) - 2.0 * f0 + self.at(p - Vector2::new(h, 0.0)))
            / (h * h);
        let fyy = (self.at(p + Vector2::new(0.0, h)) - 2.0 * f0 + self.at(p - Vector2::new(0.0, h)))
            / (h * h);
        let fxy = (self.at(p + Vector2::new(h, h)) - self.at(p + Vector2::new(h, -h))
            - self.at(p + Vector2::new(-h, h))
            + self.at(p + Vector2::new(-h, -h)))
            / (4.0 * h * h);
        Matrix2::new(fxx, fxy, fxy, fyy)
    }

    fn grad_norm_sq(&self, p: Vector2<f64>) -> f64 {
        self.gradient(p).norm_squared()
    }
}

/// Nelder-Mead on a 2D box, returning the best vertex.
fn nelder_mead(
    f: &dyn Fn(Vector2<f64>) -> f64,
    start: Vector2<f64>,
    scale: f64,
    lo: Vector2<f64>,
    hi: Vector2<f64>,
    tol: f64,
    max_steps: usize,
) -> Result<Vector2<f64>> {
    let clamp = |p: Vector2<f64>| Vector2::new(p.x.clamp(lo.x, hi.x), p.y.clamp(lo.y, hi.y));
    let mut simplex = [
        start,
        clamp(start + Vector2::new(scale, 0.0)),
        clamp(start + Vector2::new(0.0, scale)),
    ];
    let mut values = simplex.map(|p| f(p));

    for _ in 0..max_steps {
        // Order best (0) to worst (2).
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = [simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]];
        values = [values[idx[0]], values[idx[1]], values[idx[2]]];

        let spread = (simplex[1] - simplex[0])
            .norm()
            .max((simplex[2] - simplex[0]).norm());
        if spread < tol {
            return Ok(simplex[0]);
        }

        let centroid = (simplex[0] + simplex[1]) / 2.0;
        let reflected = clamp(centroid + (centroid - simplex[2]));
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = clamp(centroid + (centroid - simplex[2]) * 2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = clamp(centroid + (simplex[2] - centroid) * 0.5);
            let fc = f(contracted);
            if fc < values[2] {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                // Shrink toward the best vertex.
                for k in 1..3 {
                    simplex[k] = clamp(simplex[0] + (simplex[k] - simplex[0]) * 0.5);
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    Err(Error::Convergence(format!(
        "Nelder-Mead did not converge within {max_steps} steps from ({:.6}, {:.6})",
        start.x, start.y
    )))
}

/// Finite-difference Newton polish toward grad U = 0. Falls back to the
/// input point if the Hessian is near-singular.
fn newton_polish(scape: &Landscape, start: Vector2<f64>, max_step: f64) -> Vector2<f64> {
    let mut p = start;
    for _ in 0..16 {
        let g = scape.gradient(p);
        let h = scape.hessian(p);
        let det = h.determinant();
        if det.abs() < f64::MIN_POSITIVE.sqrt() {
            break;
        }
        let step = -h.try_inverse().map(|hi| hi * g).unwrap_or_else(Vector2::zeros);
        let clipped = if step.norm() > max_step {
            step * (max_step / step.norm())
        } else {
            step
        };
        p += clipped;
        if clipped.norm() < REFINE_TOL * 0.01 {
            break;
        }
    }
    p
}

fn classify_by_hessian(h: &Matrix2<f64>) -> CriticalKind {
    // Eigenvalues of a symmetric 2x2.
    let tr = h.m11 + h.m22;
    let det = h.determinant();
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    if l1 > 0.0 && l2 > 0.0 {
        CriticalKind::Minimum
    } else if l1 < 0.0 && l2 < 0.0 {
        CriticalKind::Maximum
    } else {
        CriticalKind::Saddle
    }
}

fn strict_local_extrema(grid: &PotentialGrid, maxima: bool) -> Vec<(usize, usize)> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut seeds = Vec::new();
    for ix in 0..nx {
        for iy in 0..ny {
            let v = grid.value(ix, iy);
            let mut is_extremum = true;
            'neigh: for dx in -1i64..=1 {
                for dy in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let jx = (ix as i64 + dx).rem_euclid(nx as i64) as usize;
                    let jy = (iy as i64 + dy).rem_euclid(ny as i64) as usize;
                    let w = grid.value(jx, jy);
                    let better = if maxima { w >= v } else { w <= v };
                    if better {
                        is_extremum = false;
                        break 'neigh;
                    }
                }
            }
            if is_extremum {
                seeds.push((ix, iy));
            }
        }
    }
    seeds
}

/// Locate and classify all critical points of a periodic landscape.
///
/// Strict 8-neighbor grid extrema seed direct minimization (maximization);
/// saddle candidates come from local minima of the grid |grad U|^2 field and
/// are refined on the continuous |grad U|^2. Every refined point is
/// classified through the central-difference Hessian and reported inside the
/// fundamental cell; duplicates are merged.
pub fn find_extrema(
    grid: &PotentialGrid,
    evaluator: impl Fn(&Vector3<f64>) -> f64,
) -> Result<Vec<CriticalPoint>> {
    let cell = &grid.cell;
    let scape = Landscape {
        cell,
        eval: &evaluator,
        h_frac: 1e-4,
    };
    let range = grid.range();
    if range == 0.0 {
        // Perfectly flat landscape: no isolated critical points.
        return Ok(Vec::new());
    }
    let a1_len = cell.a1.norm();
    let grad_tol = 1e-6 * range; // fractional-gradient scale: dU per unit cell
    let spacing = 1.0 / grid.nx.min(grid.ny) as f64;

    let mut raw: Vec<(Vector2<f64>, &str)> = Vec::new();

    for (seed_kind, maxima) in [("minimum", false), ("maximum", true)] {
        for (ix, iy) in strict_local_extrema(grid, maxima) {
            let start = Vector2::new(ix as f64 / grid.nx as f64, iy as f64 / grid.ny as f64);
            let sign = if maxima { -1.0 } else { 1.0 };
            let objective = |p: Vector2<f64>| sign * scape.at(p);
            let lo = start - Vector2::new(1.5 * spacing, 1.5 * spacing);
            let hi = start + Vector2::new(1.5 * spacing, 1.5 * spacing);
            let coarse = nelder_mead(
                &objective,
                start,
                0.4 * spacing,
                lo,
                hi,
                1e-8,
                MAX_REFINE_STEPS,
            )
            .map_err(|e| {
                Error::Convergence(format!("{seed_kind} seed at grid ({ix}, {iy}): {e}"))
            })?;
            raw.push((newton_polish(&scape, coarse, spacing), seed_kind));
        }
    }

    // Saddle seeds: local minima of |grad U|^2 estimated from grid values.
    let mut grad_sq = PotentialGrid {
        cell: cell.clone(),
        nx: grid.nx,
        ny: grid.ny,
        values: vec![0.0; grid.nx * grid.ny],
    };
    for ix in 0..grid.nx {
        for iy in 0..grid.ny {
            let xp = grid.value((ix + 1) % grid.nx, iy);
            let xm = grid.value((ix + grid.nx - 1) % grid.nx, iy);
            let yp = grid.value(ix, (iy + 1) % grid.ny);
            let ym = grid.value(ix, (iy + grid.ny - 1) % grid.ny);
            let gx = (xp - xm) * grid.nx as f64 / 2.0;
            let gy = (yp - ym) * grid.ny as f64 / 2.0;
            grad_sq.values[ix * grid.ny + iy] = gx * gx + gy * gy;
        }
    }
    for (ix, iy) in strict_local_extrema(&grad_sq, false) {
        let start = Vector2::new(ix as f64 / grid.nx as f64, iy as f64 / grid.ny as f64);
        let objective = |p: Vector2<f64>| scape.grad_norm_sq(p);
        let lo = start - Vector2::new(1.5 * spacing, 1.5 * spacing);
        let hi = start + Vector2::new(1.5 * spacing, 1.5 * spacing);
        let coarse = nelder_mead(
            &objective,
            start,
            0.4 * spacing,
            lo,
            hi,
            1e-8,
            MAX_REFINE_STEPS,
        )
        .map_err(|e| Error::Convergence(format!("saddle seed at grid ({ix}, {iy}): {e}")))?;
        raw.push((newton_polish(&scape, coarse, spacing), "saddle"));
    }

    // Keep converged critical points, classify, wrap, merge duplicates.
    let mut points: Vec<CriticalPoint> = Vec::new();
    for (p, _origin) in raw {
        if scape.gradient(p).norm() > grad_tol {
            continue; // not a critical point (e.g. a |grad|^2 minimum off the zero set)
        }
        let kind = classify_by_hessian(&scape.hessian(p));
        let wrapped = Vector2::new(p.x.rem_euclid(1.0), p.y.rem_euclid(1.0));
        let position = cell.position(wrapped.x, wrapped.y);
        let duplicate = points.iter().any(|q| {
            cell.min_image_distance(&q.position, &position) < MERGE_TOL * a1_len
        });
        if !duplicate {
            points.push(CriticalPoint {
                position,
                value: (evaluator)(&position),
                kind,
                label: None,
            });
        }
    }
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(points)
}

// ---------------------------------------------------------------------------
// Channel profiles
// ---------------------------------------------------------------------------

/// One sample of a channel profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    /// Cumulative arclength [m].
    pub arclength: f64,
    pub position: Vector3<f64>,
    pub value: f64,
}

/// Potential profile along straight segments between labeled waypoints.
#[derive(Debug, Clone)]
pub struct PathProfile {
    pub samples: Vec<PathSample>,
    /// Arclength of each input waypoint.
    pub waypoint_arclengths: Vec<f64>,
}

/// Sample the potential on straight segments between consecutive waypoints.
pub fn path_potential(
    evaluator: impl Fn(&Vector3<f64>) -> f64,
    waypoints: &[(String, Vector3<f64>)],
    samples_per_segment: usize,
) -> Result<PathProfile> {
    if waypoints.is_empty() {
        return Err(Error::InvalidInput("path needs at least one waypoint".into()));
    }
    if waypoints.len() >= 2 && samples_per_segment < 2 {
        return Err(Error::InvalidInput(
            "samples_per_segment must be at least 2".into(),
        ));
    }
    let mut samples = Vec::new();
    let mut waypoint_arclengths = vec![0.0];
    let mut s = 0.0;
    let first = waypoints[0].1;
    samples.push(PathSample {
        arclength: 0.0,
        position: first,
        value: evaluator(&first),
    });
    for pair in waypoints.windows(2) {
        let (a, b) = (pair[0].1, pair[1].1);
        let seg = b - a;
        let len = seg.norm();
        if len == 0.0 {
            // Degenerate segment: register the waypoint without resampling.
            waypoint_arclengths.push(s);
            continue;
        }
        for n in 1..=samples_per_segment {
            let t = n as f64 / samples_per_segment as f64;
            let position = a + seg * t;
            samples.push(PathSample {
                arclength: s + len * t,
                position,
                value: evaluator(&position),
            });
        }
        s += len;
        waypoint_arclengths.push(s);
    }
    Ok(PathProfile {
        samples,
        waypoint_arclengths,
    })
}

// ---------------------------------------------------------------------------
// Bond barriers
// ---------------------------------------------------------------------------

/// For every pair of minima closer than `adjacency_radius` (periodic images
/// included), locate the bond saddle as the lowest saddle critical point in
/// the pair's perpendicular strip and report the one-sided barrier heights.
///
/// Pairs with a third minimum sitting between them (closer than the bond
/// length to both ends) are not adjacent and are skipped.
pub fn bond_barriers(
    cell: &UnitCell,
    critical_points: &[CriticalPoint],
    adjacency_radius: f64,
) -> Result<Vec<BondBarrier>> {
    let minima: Vec<(usize, &CriticalPoint)> = critical_points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.kind == CriticalKind::Minimum)
        .collect();
    let saddles: Vec<&CriticalPoint> = critical_points
        .iter()
        .filter(|p| p.kind == CriticalKind::Saddle)
        .collect();

    // All minima positions with periodic images, for the betweenness test.
    let mut blockers: Vec<Vector3<f64>> = Vec::new();
    for (_, m) in &minima {
        for nu in -1i32..=1 {
            for nv in -1i32..=1 {
                blockers.push(m.position + cell.a1 * nu as f64 + cell.a2 * nv as f64);
            }
        }
    }

    // Saddle search strip, in units of the bond length: the bond saddle
    // sits near mid-bond; endpoint zones belong to other bonds.
    const LATERAL_CAP: f64 = 0.45;
    const T_WINDOW: (f64, f64) = (0.1, 0.9);

    let mut bonds = Vec::new();
    for (ai, (ia, a)) in minima.iter().enumerate() {
        for (ib, b) in minima.iter().skip(ai) {
            for nu in -1i32..=1 {
                for nv in -1i32..=1 {
                    if ia == ib && (nu, nv) == (0, 0) {
                        continue;
                    }
                    // Canonicalize self-image bonds to one orientation.
                    if ia == ib && (nu < 0 || (nu == 0 && nv < 0)) {
                        continue;
                    }
                    let b_pos = b.position + cell.a1 * nu as f64 + cell.a2 * nv as f64;
                    let bond = b_pos - a.position;
                    let length = bond.norm();
                    if length >= adjacency_radius || length == 0.0 {
                        continue;
                    }
                    let cutoff = length * (1.0 - 1e-6);
                    let blocked = blockers.iter().any(|m| {
                        let da = (m - a.position).norm();
                        let db = (m - b_pos).norm();
                        da > 1e-9 * length && db > 1e-9 * length && da < cutoff && db < cutoff
                    });
                    if blocked {
                        continue;
                    }
                    let axis = bond / length;

                    // Lowest saddle inside the strip, scanning periodic images.
                    let mut best: Option<(&CriticalPoint, Vector3<f64>)> = None;
                    for s in &saddles {
                        for mu in -1i32..=1 {
                            for mv in -1i32..=1 {
                                let sp = s.position
                                    + cell.a1 * mu as f64
                                    + cell.a2 * mv as f64;
                                let rel = sp - a.position;
                                let t = rel.dot(&axis);
                                if t < T_WINDOW.0 * length || t > T_WINDOW.1 * length {
                                    continue;
                                }
                                let lateral = (rel - axis * t).norm();
                                if lateral > LATERAL_CAP * length {
                                    continue;
                                }
                                if s.value < a.value.max(b.value) {
                                    continue; // not a barrier for this pair
                                }
                                if best.map_or(true, |(bs, _)| s.value < bs.value) {
                                    best = Some((s, sp));
                                }
                            }
                        }
                    }
                    let (saddle, saddle_position) = best.ok_or_else(|| {
                        Error::Convergence(format!(
                            "no saddle found in the strip between minima {ia} and {ib} \
                             (image offset [{nu}, {nv}])"
                        ))
                    })?;
                    bonds.push(BondBarrier {
                        site_a: *ia,
                        site_b: *ib,
                        image_offset: [nu, nv],
                        distance: length,
                        saddle_position,
                        saddle_value: saddle.value,
                        barrier_a: saddle.value - a.value,
                        barrier_b: saddle.value - b.value,
                    });
                }
            }
        }
    }
    Ok(bonds)
}

// ---------------------------------------------------------------------------
// Geometry classification
// ---------------------------------------------------------------------------

struct DisjointSet {
    parent: Vec<usize>,
    /// Winding of each node relative to its parent, in cell coordinates.
    offset: Vec<[i32; 2]>,
    wraps: Vec<bool>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            offset: vec![[0, 0]; n],
            wraps: vec![false; n],
        }
    }

    fn find(&mut self, i: usize) -> (usize, [i32; 2]) {
        if self.parent[i] == i {
            return (i, [0, 0]);
        }
        let (root, parent_off) = self.find(self.parent[i]);
        self.offset[i] = [
            self.offset[i][0] + parent_off[0],
            self.offset[i][1] + parent_off[1],
        ];
        self.parent[i] = root;
        (root, self.offset[i])
    }

    /// Join i and j where j sits at `bond_offset` cells from i. Detects
    /// components that wrap around the torus.
    fn union(&mut self, i: usize, j: usize, bond_offset: [i32; 2]) {
        let (ri, oi) = self.find(i);
        let (rj, oj) = self.find(j);
        if ri == rj {
            let implied = [oi[0] + bond_offset[0], oi[1] + bond_offset[1]];
            if implied != oj {
                self.wraps[ri] = true;
            }
            return;
        }
        // offset of rj relative to ri so that j = i + bond_offset holds.
        self.parent[rj] = ri;
        self.offset[rj] = [
            oi[0] + bond_offset[0] - oj[0],
            oi[1] + bond_offset[1] - oj[1],
        ];
        self.wraps[ri] = self.wraps[ri] || self.wraps[rj];
    }
}

/// Classify the landscape geometry from its minima and bond barriers.
///
/// Bonds whose hop height lies below the geometric mean of the smallest and
/// largest heights form the "low" graph; the arrangement of its connected
/// components against the supercell determines the label.
pub fn classify_geometry(
    cell: &UnitCell,
    minima: &[CriticalPoint],
    barriers: &[BondBarrier],
) -> GeometryLabel {
    let n = minima.len();
    if n == 0 {
        return GeometryLabel::Unknown;
    }
    if n == 1 {
        return GeometryLabel::SimpleBravais;
    }
    if barriers.is_empty() {
        return GeometryLabel::Unknown;
    }

    let heights: Vec<f64> = barriers.iter().map(|b| b.height()).collect();
    let h_min = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let h_max = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<f64> = minima.iter().map(|m| m.value).collect();
    let v_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let v_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = h_max.abs().max(v_max - v_min);

    // Uniform barriers between equal-depth sites: a plain Bravais-like net.
    if (h_max - h_min) <= 0.05 * scale && (v_max - v_min) <= DEGENERACY_REL_TOL * scale {
        return GeometryLabel::SimpleBravais;
    }
    if h_min <= 0.0 {
        return GeometryLabel::Unknown;
    }

    let threshold = (h_min * h_max).sqrt();
    let low: Vec<&BondBarrier> = barriers
        .iter()
        .filter(|b| b.height() < threshold)
        .collect();
    if low.is_empty() {
        return GeometryLabel::Unknown;
    }

    let mut dsu = DisjointSet::new(n);
    for b in &low {
        dsu.union(b.site_a, b.site_b, b.image_offset);
    }
    let roots: Vec<usize> = (0..n).map(|i| dsu.find(i).0).collect();
    if (0..n).any(|i| dsu.wraps[roots[i]]) {
        return GeometryLabel::Unknown;
    }

    // Coherent (unwrapped) cluster coordinates from the union-find offsets.
    let mut clusters: std::collections::HashMap<usize, Vec<Vector3<f64>>> =
        std::collections::HashMap::new();
    for i in 0..n {
        let (root, off) = dsu.find(i);
        let pos =
            minima[i].position + cell.a1 * off[0] as f64 + cell.a2 * off[1] as f64;
        clusters.entry(root).or_default().push(pos);
    }

    let sizes: Vec<usize> = clusters.values().map(|c| c.len()).collect();
    if sizes.windows(2).any(|w| w[0] != sizes[0]) {
        return GeometryLabel::Unknown;
    }
    let size = sizes[0];

    match size {
        2 => {
            // Shared pairing direction selects the double-well orientation.
            let mut angles = Vec::new();
            for c in clusters.values() {
                let d = c[1] - c[0];
                let mut angle = d.y.atan2(d.x).to_degrees().rem_euclid(180.0);
                if angle >= 150.0 {
                    angle -= 180.0; // fold into [-30, 150)
                }
                angles.push(angle);
            }
            let mean = angles.iter().sum::<f64>() / angles.len() as f64;
            if angles.iter().any(|a| (a - mean).abs() > 15.0) {
                return GeometryLabel::Unknown;
            }
            if mean.abs() < 30.0 {
                GeometryLabel::DoubleWellLR
            } else if (mean - 60.0).abs() < 30.0 {
                GeometryLabel::DoubleWellLL
            } else {
                GeometryLabel::DoubleWellLRt
            }
        }
        3 if clusters.values().all(|c| is_near_equilateral(c)) => {
            GeometryLabel::IsolatedTriangle
        }
        4 if clusters.values().all(|c| is_near_square(c)) => GeometryLabel::IsolatedSquare,
        6 if clusters.values().all(|c| is_near_hexagon(c)) => GeometryLabel::IsolatedHexagon,
        _ => GeometryLabel::Unknown,
    }
}

const SHAPE_TOL: f64 = 0.25;

fn pairwise_distances(cluster: &[Vector3<f64>]) -> Vec<f64> {
    let mut d = Vec::new();
    for i in 0..cluster.len() {
        for j in (i + 1)..cluster.len() {
            d.push((cluster[i] - cluster[j]).norm());
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

fn within(values: &[f64], tol: f64) -> bool {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().all(|v| (v - mean).abs() <= tol * mean)
}

fn is_near_equilateral(cluster: &[Vector3<f64>]) -> bool {
    within(&pairwise_distances(cluster), SHAPE_TOL)
}

fn is_near_square(cluster: &[Vector3<f64>]) -> bool {
    let d = pairwise_distances(cluster);
    let edges = &d[..4];
    let diagonals = &d[4..];
    if !within(edges, SHAPE_TOL) || !within(diagonals, SHAPE_TOL) {
        return false;
    }
    let ratio = (diagonals[0] + diagonals[1]) / 2.0 / (edges.iter().sum::<f64>() / 4.0);
    (ratio - std::f64::consts::SQRT_2).abs() < 0.2
}

fn is_near_hexagon(cluster: &[Vector3<f64>]) -> bool {
    let centroid = cluster.iter().sum::<Vector3<f64>>() / cluster.len() as f64;
    let spokes: Vec<f64> = cluster.iter().map(|p| (p - centroid).norm()).collect();
    within(&spokes, SHAPE_TOL)
}

// ---------------------------------------------------------------------------
// Site labeling
// ---------------------------------------------------------------------------

/// Assign each anchor's label to the nearest found minimum (periodic
/// distance). Errors if two anchors claim the same minimum.
pub fn label_minima(
    cell: &UnitCell,
    points: &mut [CriticalPoint],
    anchors: &[(String, Vector3<f64>)],
) -> Result<()> {
    let minima_idx: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.kind == CriticalKind::Minimum)
        .map(|(i, _)| i)
        .collect();
    let mut claimed: Vec<Option<String>> = vec![None; points.len()];
    for (label, anchor) in anchors {
        let nearest = minima_idx
            .iter()
            .copied()
            .min_by(|&i, &j| {
                cell.min_image_distance(&points[i].position, anchor)
                    .total_cmp(&cell.min_image_distance(&points[j].position, anchor))
            })
            .ok_or_else(|| Error::Convergence("no minima available to label".into()))?;
        if let Some(existing) = &claimed[nearest] {
            return Err(Error::Convergence(format!(
                "labels {existing} and {label} both map to the minimum at \
                 ({:.4e}, {:.4e})",
                points[nearest].position.x, points[nearest].position.y
            )));
        }
        claimed[nearest] = Some(label.clone());
    }
    for (i, label) in claimed.into_iter().enumerate() {
        if label.is_some() {
            points[i].label = label;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Full landscape analysis
// ---------------------------------------------------------------------------

/// Result of a full landscape analysis over one cell.
#[derive(Debug, Clone)]
pub struct LandscapeReport {
    pub grid: PotentialGrid,
    /// All critical points, labeled where anchors matched.
    pub points: Vec<CriticalPoint>,
    pub barriers: Vec<BondBarrier>,
    pub geometry: GeometryLabel,
}

impl LandscapeReport {
    pub fn minima(&self) -> Vec<&CriticalPoint> {
        self.points
            .iter()
            .filter(|p| p.kind == CriticalKind::Minimum)
            .collect()
    }

    /// Potential value of the labeled site.
    pub fn depth(&self, label: &str) -> Result<f64> {
        self.points
            .iter()
            .find(|p| p.label.as_deref() == Some(label))
            .map(|p| p.value)
            .ok_or_else(|| Error::InvalidInput(format!("label not found: {label}")))
    }

    /// The barrier of the bond between two labeled sites, if analyzed.
    pub fn bond_between(&self, a: &str, b: &str) -> Option<&BondBarrier> {
        self.barriers.iter().find(|bond| {
            let la = self.points[bond.site_a].label.as_deref();
            let lb = self.points[bond.site_b].label.as_deref();
            (la == Some(a) && lb == Some(b)) || (la == Some(b) && lb == Some(a))
        })
    }
}

/// Sample, refine, label, bond, and classify a landscape in one pass.
/// Anchor labeling is best-effort: landscapes whose minima do not match the
/// anchors stay unlabeled.
pub fn analyze_landscape(
    evaluator: impl Fn(&Vector3<f64>) -> f64,
    cell: &UnitCell,
    anchors: &[(String, Vector3<f64>)],
    adjacency_radius: f64,
    n: usize,
) -> Result<LandscapeReport> {
    let grid = sample_grid(&evaluator, cell, n, n)?;
    let mut points = find_extrema(&grid, &evaluator)?;
    let _ = label_minima(cell, &mut points, anchors);
    let barriers = bond_barriers(cell, &points, adjacency_radius)?;
    let geometry = {
        let minima: Vec<CriticalPoint> = points
            .iter()
            .filter(|p| p.kind == CriticalKind::Minimum)
            .cloned()
            .collect();
        // bond indices refer to the full critical-point list; rebuild a
        // minima-indexed view for classification.
        let min_index: Vec<usize> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind == CriticalKind::Minimum)
            .map(|(i, _)| i)
            .collect();
        let remap: std::collections::HashMap<usize, usize> = min_index
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let remapped: Vec<BondBarrier> = barriers
            .iter()
            .map(|b| BondBarrier {
                site_a: remap[&b.site_a],
                site_b: remap[&b.site_b],
                ..b.clone()
            })
            .collect();
        classify_geometry(cell, &minima, &remapped)
    };
    Ok(LandscapeReport {
        grid,
        points,
        barriers,
        geometry,
    })
}

// ---------------------------------------------------------------------------
// Phase solving
// ---------------------------------------------------------------------------

/// Bisection solve of `objective(x) = target` over `bracket`.
///
/// The objective must be continuous with a sign change of
/// `objective - target` across the bracket; the solve stops when the
/// residual is below 1e-9 |target| (or the bracket collapses, for target 0)
/// or after 60 iterations.
pub fn solve_phase_offset(
    mut objective: impl FnMut(f64) -> Result<f64>,
    target: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!(
            "bracket must satisfy lo < hi, got ({lo}, {hi})"
        )));
    }
    let mut g_lo = objective(lo)? - target;
    let g_hi = objective(hi)? - target;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracketing(format!(
            "no sign change over [{lo}, {hi}]: residuals {g_lo:.6e} and {g_hi:.6e}"
        )));
    }
    let res_tol = 1e-9 * target.abs();
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..60 {
        mid = 0.5 * (lo + hi);
        let g_mid = objective(mid)? - target;
        if g_mid == 0.0 || g_mid.abs() <= res_tol || (hi - lo) < 1e-12 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("{:e},{:e},{:e}", v.x, v.y, v.z)
}

/// Write a sampled grid in the documented CSV layout: comment headers, then
/// `x,y,U_Hz,U_Er` rows. `omega_ref` sets the recoil-energy unit.
pub fn write_grid_csv(
    out: &mut dyn Write,
    grid: &PotentialGrid,
    mass: f64,
    omega_ref: f64,
    extra_headers: &[String],
) -> std::io::Result<()> {
    for line in extra_headers {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# a1={}", fmt_vec(&grid.cell.a1))?;
    writeln!(out, "# a2={}", fmt_vec(&grid.cell.a2))?;
    writeln!(out, "# origin={}", fmt_vec(&grid.cell.origin))?;
    writeln!(out, "# nx={}", grid.nx)?;
    writeln!(out, "# ny={}", grid.ny)?;
    writeln!(out, "# unit=U_Hz:Hz,U_Er:recoil")?;
    writeln!(out, "x,y,U_Hz,U_Er")?;
    let er = recoil_energy(mass, omega_ref);
    for ix in 0..grid.nx {
        for iy in 0..grid.ny {
            let r = grid
                .cell
                .position(ix as f64 / grid.nx as f64, iy as f64 / grid.ny as f64);
            let u = grid.value(ix, iy);
            writeln!(out, "{:e},{:e},{:e},{:e}", r.x, r.y, u / H, u / er)?;
        }
    }
    Ok(())
}

/// Write a channel profile as CSV with `s,x,y,U_Hz,U_Er` rows.
pub fn write_path_csv(
    out: &mut dyn Write,
    profile: &PathProfile,
    mass: f64,
    omega_ref: f64,
    extra_headers: &[String],
) -> std::io::Result<()> {
    for line in extra_headers {
        writeln!(out, "# {line}")?;
    }
    writeln!(
        out,
        "# waypoints_s={}",
        profile
            .waypoint_arclengths
            .iter()
            .map(|s| format!("{s:e}"))
            .collect::<Vec<_>>()
            .join(";")
    )?;
    writeln!(out, "# unit=U_Hz:Hz,U_Er:recoil")?;
    writeln!(out, "s,x,y,U_Hz,U_Er")?;
    let er = recoil_energy(mass, omega_ref);
    for s in &profile.samples {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            s.arclength,
            s.position.x,
            s.position.y,
            s.value / H,
            s.value / er
        )?;
    }
    Ok(())
}

/// JSON report of critical points, bond barriers, and the geometry label.
pub fn extrema_report(
    cell: &UnitCell,
    points: &[CriticalPoint],
    barriers: &[BondBarrier],
    label: GeometryLabel,
    mass: f64,
    omega_ref: f64,
) -> serde_json::Value {
    let er = recoil_energy(mass, omega_ref);
    let minima: Vec<&CriticalPoint> = points
        .iter()
        .filter(|p| p.kind == CriticalKind::Minimum)
        .collect();
    let depths: Vec<f64> = minima.iter().map(|p| p.value).collect();
    let equal_depths = if depths.is_empty() {
        true
    } else {
        let lo = depths.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = points
            .iter()
            .map(|p| p.value)
            .fold(f64::NEG_INFINITY, f64::max)
            - points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        (hi - lo) <= DEGENERACY_REL_TOL * range.max(f64::MIN_POSITIVE)
    };
    let point_json = |p: &CriticalPoint| {
        serde_json::json!({
            "label": p.label,
            "kind": p.kind.as_str(),
            "position_m": [p.position.x, p.position.y],
            "value_J": p.value,
            "value_Hz": p.value / H,
            "value_Er": p.value / er,
        })
    };
    serde_json::json!({
        "cell": {
            "a1_m": [cell.a1.x, cell.a1.y],
            "a2_m": [cell.a2.x, cell.a2.y],
            "origin_m": [cell.origin.x, cell.origin.y],
        },
        "classification": label.as_str(),
        "equal_depths": equal_depths,
        "minima_count": minima.len(),
        "critical_points": points.iter().map(point_json).collect::<Vec<_>>(),
        "bonds": barriers
            .iter()
            .map(|b| {
                serde_json::json!({
                    "site_a": points.get(b.site_a).and_then(|p| p.label.clone()),
                    "site_b": points.get(b.site_b).and_then(|p| p.label.clone()),
                    "index_a": b.site_a,
                    "index_b": b.site_b,
                    "image_offset": b.image_offset,
                    "distance_m": b.distance,
                    "saddle_value_J": b.saddle_value,
                    "saddle_value_Hz": b.saddle_value / H,
                    "barrier_a_J": b.barrier_a,
                    "barrier_b_J": b.barrier_b,
                    "height_J": b.height(),
                    "height_Hz": b.height() / H,
                })
            })
            .collect::<Vec<_>>(),
    })
}
