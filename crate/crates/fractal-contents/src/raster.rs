//! Grid-based numerical geometry for planar models: rasterization, an
//! exact Euclidean distance transform, parallel volumes, level-set
//! lengths, metric-projection footprints, and covering/packing counts.
//!
//! Everything here is the measurement side of the library: it never
//! consults the closed-form profiles, so the two routes stay independent
//! and can be cross-validated. Distances are computed in exact integer
//! cell arithmetic (squared distances between cell centers) and only
//! converted to world units on output, which makes every threshold
//! predicate deterministic.

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::SetModel;

/// Hard cap on grid cells; grids above this are refused with a
/// resolution error before any allocation happens.
pub const MAX_CELLS: usize = 1 << 24;

/// Area of a unit lens: the intersection of two unit discs whose centers
/// are unit distance apart. Scaled by `t^2` it lower-bounds the tube
/// volume captured by each ball of a radius-`t` packing centered on
/// boundary points witnessed at reach above `t`.
pub fn lens_area() -> f64 {
    2.0 * std::f64::consts::PI / 3.0 - 3.0f64.sqrt() / 2.0
}

/// Shared worker pool, sized by `FRACTAL_CONTENTS_THREADS` when set.
pub(crate) fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(v) = std::env::var("FRACTAL_CONTENTS_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                if n >= 1 {
                    builder = builder.num_threads(n);
                }
            }
        }
        builder.build().expect("worker pool construction cannot fail")
    })
}

/// A binary occupancy grid. `origin` is the world coordinate of the
/// lower-left corner of cell (0, 0); the center of cell `(ix, iy)` sits
/// at `origin + ((ix, iy) + 0.5) h`. `pad` records the margin (in world
/// units) kept free around the model's bounding box; probes beyond it
/// are refused by the measurement operations.
#[derive(Debug, Clone)]
pub struct GridSet {
    pub h: f64,
    pub origin: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub pad: f64,
    pub occ: Vec<bool>,
}

impl GridSet {
    fn empty(origin: (f64, f64), nx: usize, ny: usize, h: f64, pad: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain("grid extent must be positive".into()));
        }
        let cells = nx
            .checked_mul(ny)
            .ok_or_else(|| Error::Resolution("grid extent overflows".into()))?;
        if cells > MAX_CELLS {
            return Err(Error::Resolution(format!(
                "grid of {nx} x {ny} = {cells} cells exceeds the cap of {MAX_CELLS}; \
                 coarsen h or shrink pad"
            )));
        }
        Ok(GridSet { h, origin, nx, ny, pad, occ: vec![false; cells] })
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// World coordinates of a cell center.
    #[inline]
    pub fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + (ix as f64 + 0.5) * self.h,
            self.origin.1 + (iy as f64 + 0.5) * self.h,
        )
    }

    pub fn occupied_count(&self) -> usize {
        self.occ.iter().filter(|&&o| o).count()
    }

    /// Cell containing a world point, if inside the grid.
    fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = (x - self.origin.0) / self.h;
        let fy = (y - self.origin.1) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        if ix < self.nx && iy < self.ny {
            Some((ix, iy))
        } else {
            None
        }
    }

    fn mark(&mut self, ix: usize, iy: usize) {
        let i = self.idx(ix, iy);
        self.occ[i] = true;
    }

    /// Mark the cell containing the point (grid-snap for isolated points).
    fn mark_point(&mut self, x: f64, y: f64) {
        if let Some((ix, iy)) = self.cell_of(x, y) {
            self.mark(ix, iy);
        }
    }

    /// Mark every cell within h/2 of the segment, plus the cells the
    /// segment passes through. Samples at h/4 steps; a 3 x 3 stencil
    /// around each sample's cell covers every center within h/2.
    fn mark_segment(&mut self, a: (f64, f64), b: (f64, f64)) {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len = dx.hypot(dy);
        let steps = (len / (self.h / 4.0)).ceil() as usize + 1;
        let half = self.h / 2.0;
        for s in 0..=steps {
            let f = s as f64 / steps as f64;
            let (px, py) = (a.0 + f * dx, a.1 + f * dy);
            let Some((cx, cy)) = self.cell_of(px, py) else { continue };
            self.mark(cx, cy);
            for oy in -1i64..=1 {
                for ox in -1i64..=1 {
                    let (ix, iy) = (cx as i64 + ox, cy as i64 + oy);
                    if ix < 0 || iy < 0 || ix as usize >= self.nx || iy as usize >= self.ny {
                        continue;
                    }
                    let c = self.center(ix as usize, iy as usize);
                    if point_segment_distance(c, a, b) <= half {
                        self.mark(ix as usize, iy as usize);
                    }
                }
            }
        }
    }
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (abx, aby) = (b.0 - a.0, b.1 - a.1);
    let (apx, apy) = (p.0 - a.0, p.1 - a.1);
    let denom = abx * abx + aby * aby;
    let t = if denom > 0.0 { ((apx * abx + apy * aby) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let (qx, qy) = (a.0 + t * abx, a.1 + t * aby);
    (p.0 - qx).hypot(p.1 - qy)
}

/// A line segment in world coordinates.
pub type Segment = ((f64, f64), (f64, f64));

/// Rasterize explicit geometry: segments are thickened to at most one
/// cell, isolated points snap to their containing cell.
pub fn rasterize_geometry(
    segments: &[Segment],
    points: &[(f64, f64)],
    h: f64,
    pad: f64,
) -> Result<GridSet> {
    if segments.is_empty() && points.is_empty() {
        return Err(Error::Domain("nothing to rasterize".into()));
    }
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: (f64, f64)| {
        min.0 = min.0.min(p.0);
        min.1 = min.1.min(p.1);
        max.0 = max.0.max(p.0);
        max.1 = max.1.max(p.1);
    };
    for &(a, b) in segments {
        grow(a);
        grow(b);
    }
    for &p in points {
        grow(p);
    }
    let mut grid = grid_for_bbox(min, max, h, pad)?;
    for &(a, b) in segments {
        grid.mark_segment(a, b);
    }
    for &(x, y) in points {
        grid.mark_point(x, y);
    }
    Ok(grid)
}

fn grid_for_bbox(min: (f64, f64), max: (f64, f64), h: f64, pad: f64) -> Result<GridSet> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::Domain(format!("cell size h must be positive, got {h}")));
    }
    if !pad.is_finite() || pad < 0.0 {
        return Err(Error::Domain(format!("pad must be nonnegative, got {pad}")));
    }
    let margin = pad + 2.0 * h;
    // A fixed irrational sub-cell shift keeps model features (which tend
    // to sit at rational coordinates) away from center-equidistant lines,
    // where the h/2 occupancy band would tie on two rows at once.
    let jitter = (0.207_106_781_186_547_5 * h, 0.366_025_403_784_438_6 * h);
    let origin = (min.0 - margin - jitter.0, min.1 - margin - jitter.1);
    let nx = ((max.0 - min.0 + 2.0 * margin) / h).ceil() as usize + 2;
    let ny = ((max.1 - min.1 + 2.0 * margin) / h).ceil() as usize + 2;
    GridSet::empty(origin, nx, ny, h, pad)
}

/// Rasterize a planar model: cell centers within h/2 of the point set
/// are occupied (curves and points thicken by at most one cell).
/// One-dimensional string models have no planar raster and are refused.
pub fn rasterize(model: &SetModel, h: f64, pad: f64) -> Result<GridSet> {
    model.validate()?;
    match model {
        SetModel::Disc { radius } => {
            let r = *radius;
            let mut grid = grid_for_bbox((-r, -r), (r, r), h, pad)?;
            fill_analytic(&mut grid, |x, y| x.hypot(y) <= r + h / 2.0);
            Ok(grid)
        }
        SetModel::Circle { radius } => {
            let r = *radius;
            let mut grid = grid_for_bbox((-r, -r), (r, r), h, pad)?;
            fill_analytic(&mut grid, |x, y| (x.hypot(y) - r).abs() <= h / 2.0);
            Ok(grid)
        }
        SetModel::SquareBoundary { side } => {
            let s = side / 2.0;
            let corners = [(-s, -s), (s, -s), (s, s), (-s, s)];
            let segs: Vec<Segment> =
                (0..4).map(|i| (corners[i], corners[(i + 1) % 4])).collect();
            rasterize_geometry(&segs, &[], h, pad)
        }
        SetModel::ParallelSegments { length, gap } => {
            let y = gap / 2.0;
            let segs = [((0.0, -y), (*length, -y)), ((0.0, y), (*length, y))];
            rasterize_geometry(&segs, &[], h, pad)
        }
        SetModel::SierpinskiGasket => {
            let mut segs = Vec::new();
            let top = (0.5, 3.0f64.sqrt() / 2.0);
            segs.push(((0.0, 0.0), (1.0, 0.0)));
            segs.push(((1.0, 0.0), top));
            segs.push((top, (0.0, 0.0)));
            gasket_segments((0.0, 0.0), (1.0, 0.0), top, h, &mut segs);
            rasterize_geometry(&segs, &[], h, pad)
        }
        SetModel::FractalWindow { ratio, level } => {
            let mut segs = Vec::new();
            window_segments((0.0, 0.0), 1.0, *ratio, *level, &mut segs);
            rasterize_geometry(&segs, &[], h, pad)
        }
        SetModel::EnclosedDust { alpha, m, level } => {
            let (segs, pts) = dust_geometry(*alpha, *m, *level);
            rasterize_geometry(&segs, &pts, h, pad)
        }
        SetModel::StringSet { .. } | SetModel::CantorTernary | SetModel::Svc { .. } => {
            Err(Error::Domain(
                "string models are one-dimensional; use the string routines instead \
                 of a planar raster"
                    .into(),
            ))
        }
        SetModel::Scaled { base, factor } => {
            let mut grid = rasterize(base, h / factor, pad / factor)?;
            grid.h = h;
            grid.pad = pad;
            grid.origin = (grid.origin.0 * factor, grid.origin.1 * factor);
            Ok(grid)
        }
    }
}

fn fill_analytic(grid: &mut GridSet, inside: impl Fn(f64, f64) -> bool + Sync) {
    let (nx, h) = (grid.nx, grid.h);
    let origin = grid.origin;
    pool().install(|| {
        grid.occ.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
            let y = origin.1 + (iy as f64 + 0.5) * h;
            for (ix, cell) in row.iter_mut().enumerate() {
                let x = origin.0 + (ix as f64 + 0.5) * h;
                if inside(x, y) {
                    *cell = true;
                }
            }
        });
    });
}

/// Emit the outlines of all removed triangles down to cell scale.
fn gasket_segments(
    a: (f64, f64),
    b: (f64, f64),
    c: (f64, f64),
    h: f64,
    out: &mut Vec<Segment>,
) {
    let side = (b.0 - a.0).hypot(b.1 - a.1);
    let mab = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let mbc = ((b.0 + c.0) / 2.0, (b.1 + c.1) / 2.0);
    let mca = ((c.0 + a.0) / 2.0, (c.1 + a.1) / 2.0);
    out.push((mab, mbc));
    out.push((mbc, mca));
    out.push((mca, mab));
    if side / 2.0 > h / 2.0 {
        gasket_segments(a, mab, mca, h, out);
        gasket_segments(mab, b, mbc, h, out);
        gasket_segments(mca, mbc, c, h, out);
    }
}

/// Emit the frame outlines of the window construction.
fn window_segments(origin: (f64, f64), side: f64, r: f64, level: u32, out: &mut Vec<Segment>) {
    let (x, y) = origin;
    let s = side;
    out.push(((x, y), (x + s, y)));
    out.push(((x + s, y), (x + s, y + s)));
    out.push(((x + s, y + s), (x, y + s)));
    out.push(((x, y + s), (x, y)));
    if level == 0 {
        return;
    }
    let p = (1.0 - 2.0 * r) / 3.0;
    let (ps, rs) = (p * s, r * s);
    let far = s - ps - rs;
    for (cx, cy) in [(ps, ps), (far, ps), (ps, far), (far, far)] {
        window_segments((x + cx, y + cy), rs, r, level - 1, out);
    }
}

/// Frames and enclosed grid points of the dust construction, laid out
/// deterministically on shelves with quarter-side gaps so distinct
/// frames never interact at the scales the construction resolves.
fn dust_geometry(alpha: f64, m: u32, level: u32) -> (Vec<Segment>, Vec<(f64, f64)>) {
    let mut segments = Vec::new();
    let mut points = Vec::new();
    let mut cursor_x = 0.0f64;
    let mut cursor_y = 0.0f64;
    let mut shelf_height = 0.0f64;
    // Total width close to the square root of the summed frame areas.
    let total_area: f64 = (1..=level as u64)
        .map(|j| (j as f64).powf(-2.0 * alpha))
        .sum();
    let max_width = 1.3 * total_area.sqrt().max(1.0);
    for j in 1..=level as u64 {
        let jf = j as f64;
        let side = jf.powf(-alpha);
        let gap = 0.25 * side;
        if cursor_x > 0.0 && cursor_x + side + gap > max_width {
            cursor_y += shelf_height;
            cursor_x = 0.0;
            shelf_height = 0.0;
        }
        let (ox, oy) = (cursor_x + gap, cursor_y + gap);
        segments.push(((ox, oy), (ox + side, oy)));
        segments.push(((ox + side, oy), (ox + side, oy + side)));
        segments.push(((ox + side, oy + side), (ox, oy + side)));
        segments.push(((ox, oy + side), (ox, oy)));
        let n = (jf.powi(m as i32) - 1.0).max(0.0) as usize;
        let spacing = jf.powf(-(alpha + m as f64));
        for ky in 1..=n {
            for kx in 1..=n {
                points.push((ox + kx as f64 * spacing, oy + ky as f64 * spacing));
            }
        }
        cursor_x += side + 2.0 * gap;
        shelf_height = shelf_height.max(side + 2.0 * gap);
    }
    (segments, points)
}

/// Exact distance field over a grid: squared center-to-center cell
/// distances (integer) to the nearest occupied cell, with the witness
/// cell index. Ties are broken toward the lexicographically smallest
/// witness index (row major).
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub grid: GridSet,
    /// Squared distance in cell units; 0 exactly on occupied cells.
    pub d2: Vec<u64>,
    /// Row-major index of the nearest occupied cell.
    pub nearest: Vec<u32>,
}

impl DistanceField {
    /// Euclidean distance in world units at a cell.
    #[inline]
    pub fn dist(&self, ix: usize, iy: usize) -> f64 {
        self.grid.h * (self.d2[self.grid.idx(ix, iy)] as f64).sqrt()
    }

    #[inline]
    fn dist_at(&self, idx: usize) -> f64 {
        self.grid.h * (self.d2[idx] as f64).sqrt()
    }
}

/// Exact squared Euclidean distance transform by separable lower
/// envelopes: a row pass finds per-row nearest columns, a column pass
/// minimizes parabolas over rows. All comparisons are exact integer
/// arithmetic, so results are deterministic bit-for-bit.
pub fn distance_transform(grid: &GridSet) -> Result<DistanceField> {
    let (nx, ny) = (grid.nx, grid.ny);
    let cells = nx * ny;
    if grid.occ.iter().all(|&o| !o) {
        return Err(Error::Domain("distance transform of an empty grid".into()));
    }
    const INF: u64 = u64::MAX;
    // Row pass: nearest occupied column within each row, preferring the
    // smaller column on ties.
    let mut row_d2 = vec![INF; cells];
    let mut row_col = vec![u32::MAX; cells];
    pool().install(|| {
        row_d2
            .par_chunks_mut(nx)
            .zip(row_col.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(iy, (d_row, c_row))| {
                let occ_row = &grid.occ[iy * nx..(iy + 1) * nx];
                let mut last: Option<usize> = None;
                for ix in 0..nx {
                    if occ_row[ix] {
                        last = Some(ix);
                    }
                    if let Some(c) = last {
                        let d = (ix - c) as u64;
                        d_row[ix] = d * d;
                        c_row[ix] = c as u32;
                    }
                }
                let mut next: Option<usize> = None;
                for ix in (0..nx).rev() {
                    if occ_row[ix] {
                        next = Some(ix);
                    }
                    if let Some(c) = next {
                        let d = (c - ix) as u64;
                        let d2 = d * d;
                        // Strict improvement only: ties keep the left witness.
                        if d2 < d_row[ix] {
                            d_row[ix] = d2;
                            c_row[ix] = c as u32;
                        }
                    }
                }
            });
    });

    // Column pass: lower envelope of parabolas f(k) + (y - k)^2 over the
    // rows k that contain occupied cells. Regions are materialized as
    // first-winning integer rows, which resolves ties toward smaller k.
    let mut d2 = vec![0u64; cells];
    let mut nearest = vec![0u32; cells];
    let columns: Vec<usize> = (0..nx).collect();
    let results: Vec<Vec<(u64, u32)>> = pool().install(|| {
        columns
            .par_iter()
            .map(|&ix| {
                // Envelope stack: (row k, f value, first row where k wins).
                let mut hull: Vec<(i64, u64, i64)> = Vec::new();
                for k in 0..ny as i64 {
                    let f = row_d2[k as usize * nx + ix];
                    if f == INF {
                        continue;
                    }
                    let mut start = i64::MIN + 1;
                    while let Some(&(kp, fp, sp)) = hull.last() {
                        // First integer y where the new parabola strictly
                        // beats the stack top: floor of the crossing + 1.
                        let num = (f as i128 + (k as i128) * (k as i128))
                            - (fp as i128 + (kp as i128) * (kp as i128));
                        let den = 2 * (k - kp) as i128;
                        let w = num.div_euclid(den) as i64 + 1;
                        if w <= sp {
                            hull.pop();
                        } else {
                            start = w;
                            break;
                        }
                    }
                    if start < ny as i64 {
                        hull.push((k, f, start));
                    }
                }
                let mut out = Vec::with_capacity(ny);
                let mut ptr = 0usize;
                for y in 0..ny as i64 {
                    while ptr + 1 < hull.len() && hull[ptr + 1].2 <= y {
                        ptr += 1;
                    }
                    let (k, f, _) = hull[ptr];
                    let dy = (y - k).unsigned_abs();
                    let total = f + dy * dy;
                    let witness = k as u32 as u64 * nx as u64
                        + row_col[k as usize * nx + ix] as u64;
                    out.push((total, witness as u32));
                }
                out
            })
            .collect()
    });
    for (ix, col) in results.into_iter().enumerate() {
        for (iy, (dd, w)) in col.into_iter().enumerate() {
            let i = iy * nx + ix;
            d2[i] = dd;
            nearest[i] = w;
        }
    }
    Ok(DistanceField { grid: grid.clone(), d2, nearest })
}

/// Parallel volume `V(A_eps \ A)`: area of cells strictly outside the
/// set whose centers lie within `eps` of it.
pub fn parallel_volume(field: &DistanceField, eps: f64) -> Result<f64> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Domain(format!("parallel volume needs eps >= 0, got {eps}")));
    }
    if eps > field.grid.pad {
        return Err(Error::Domain(format!(
            "eps = {eps} exceeds the rasterized pad {}",
            field.grid.pad
        )));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let h = field.grid.h;
    let cut = (eps / h) * (eps / h);
    let count: usize = pool().install(|| {
        field
            .d2
            .par_iter()
            .filter(|&&d| d > 0 && (d as f64) <= cut)
            .count()
    });
    Ok(h * h * count as f64)
}

/// Length of the level set `{dist = r}` by marching squares over the
/// cell-center lattice with linear interpolation.
pub fn boundary_length(field: &DistanceField, r: f64) -> Result<f64> {
    let (nx, ny, h) = (field.grid.nx, field.grid.ny, field.grid.h);
    if r.is_nan() || r <= h {
        return Err(Error::Domain(format!(
            "level value must exceed one cell ({h}), got {r}"
        )));
    }
    if r >= field.grid.pad {
        return Err(Error::Domain(format!(
            "level value {r} reaches past the rasterized pad {}",
            field.grid.pad
        )));
    }
    // The contour must close inside the grid.
    let exits = (0..nx).any(|ix| {
        field.dist(ix, 0) <= r || field.dist(ix, ny - 1) <= r
    }) || (0..ny).any(|iy| {
        field.dist(0, iy) <= r || field.dist(nx - 1, iy) <= r
    });
    if exits {
        return Err(Error::Domain(format!(
            "the level set at {r} touches the grid boundary; increase pad"
        )));
    }
    let rows: Vec<usize> = (0..ny - 1).collect();
    let total: f64 = pool().install(|| {
        rows.par_iter()
            .map(|&iy| {
                let mut acc = 0.0;
                for ix in 0..nx - 1 {
                    acc += cell_contour_length(field, ix, iy, r);
                }
                acc
            })
            .sum()
    });
    Ok(total * h)
}

/// Marching-squares contour length inside one lattice square, in cell
/// units. Corners are the four surrounding cell centers.
fn cell_contour_length(field: &DistanceField, ix: usize, iy: usize, r: f64) -> f64 {
    let v = [
        field.dist(ix, iy),
        field.dist(ix + 1, iy),
        field.dist(ix + 1, iy + 1),
        field.dist(ix, iy + 1),
    ];
    let inside = [v[0] <= r, v[1] <= r, v[2] <= r, v[3] <= r];
    let code = inside[0] as usize
        | (inside[1] as usize) << 1
        | (inside[2] as usize) << 2
        | (inside[3] as usize) << 3;
    if code == 0 || code == 15 {
        return 0.0;
    }
    // Interpolated crossing points on the four edges, local coordinates.
    let lerp = |a: f64, b: f64| (r - a) / (b - a);
    let e = [
        (lerp(v[0], v[1]), 0.0), // bottom
        (1.0, lerp(v[1], v[2])), // right
        (lerp(v[3], v[2]), 1.0), // top
        (0.0, lerp(v[0], v[3])), // left
    ];
    let seg = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).hypot(p.1 - q.1);
    match code {
        1 | 14 => seg(e[3], e[0]),
        2 | 13 => seg(e[0], e[1]),
        4 | 11 => seg(e[1], e[2]),
        8 | 7 => seg(e[2], e[3]),
        3 | 12 => seg(e[3], e[1]),
        6 | 9 => seg(e[0], e[2]),
        5 | 10 => {
            // Saddle: resolve by the center value.
            let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
            let flip = (center <= r) == (code == 5);
            if flip {
                seg(e[3], e[0]) + seg(e[1], e[2])
            } else {
                seg(e[0], e[1]) + seg(e[2], e[3])
            }
        }
        _ => unreachable!("covered all 14 crossing codes"),
    }
}

/// Boundary cells witnessed as metric projections from distance above
/// `t`: the grid surrogate for the part of the boundary whose local
/// reach exceeds `t`.
#[derive(Debug, Clone)]
pub struct Footprint {
    /// Row-major indices of witnessed occupied cells, sorted, deduped.
    pub cells: Vec<u32>,
    /// Set when the probe shell contained no cells at all.
    pub empty_shell: bool,
}

/// Collect the projection targets of cells with `t < dist <= t + shell`.
pub fn footprint_mt(field: &DistanceField, t: f64, shell: f64) -> Result<Footprint> {
    if t.is_nan() || t < 0.0 || shell.is_nan() || shell <= 0.0 {
        return Err(Error::Domain(format!(
            "footprint needs t >= 0 and shell > 0, got t = {t}, shell = {shell}"
        )));
    }
    if t + shell > field.grid.pad {
        return Err(Error::Domain(format!(
            "probe shell [{t}, {}] exceeds the rasterized pad {}",
            t + shell,
            field.grid.pad
        )));
    }
    let h = field.grid.h;
    let lo = (t / h) * (t / h);
    let hi = ((t + shell) / h) * ((t + shell) / h);
    let mut cells: Vec<u32> = field
        .d2
        .iter()
        .enumerate()
        .filter(|&(_, &d)| (d as f64) > lo && (d as f64) <= hi)
        .map(|(i, _)| field.nearest[i])
        .collect();
    let empty_shell = cells.is_empty();
    cells.sort_unstable();
    cells.dedup();
    Ok(Footprint { cells, empty_shell })
}

/// Covering and packing counts of a footprint at scale `t`:
/// `theta` buckets the cells into axis-aligned boxes of side `t/sqrt(2)`
/// (diameter `t`); `theta_packing` greedily packs disjoint open balls of
/// radius `t` centered at footprint cells, scanning in index order.
pub fn covering_packing_counts(
    field: &DistanceField,
    footprint: &Footprint,
    t: f64,
) -> Result<(usize, usize)> {
    let h = field.grid.h;
    if t.is_nan() || t < 2.0 * h {
        return Err(Error::Resolution(format!(
            "count scale t = {t} is below two cells (h = {h}); coarsen t"
        )));
    }
    if footprint.cells.is_empty() {
        return Err(Error::Domain("covering counts need a nonempty footprint".into()));
    }
    let nx = field.grid.nx;
    let side = t / 2.0f64.sqrt();
    let mut buckets: Vec<(i64, i64)> = footprint
        .cells
        .iter()
        .map(|&c| {
            let (ix, iy) = ((c as usize) % nx, (c as usize) / nx);
            let (x, y) = field.grid.center(ix, iy);
            ((x / side).floor() as i64, (y / side).floor() as i64)
        })
        .collect();
    buckets.sort_unstable();
    buckets.dedup();
    let theta = buckets.len();

    // Greedy maximal packing: keep a cell if it is at least 2t from all
    // kept centers; a hash over 2t-sized tiles makes the scan linear.
    let tile = 2.0 * t;
    let mut kept: std::collections::HashMap<(i64, i64), Vec<(f64, f64)>> =
        std::collections::HashMap::new();
    let mut theta_packing = 0usize;
    let min_sep2 = (2.0 * t) * (2.0 * t);
    for &c in &footprint.cells {
        let (ix, iy) = ((c as usize) % nx, (c as usize) / nx);
        let p = field.grid.center(ix, iy);
        let key = ((p.0 / tile).floor() as i64, (p.1 / tile).floor() as i64);
        let mut ok = true;
        'scan: for oy in -1..=1 {
            for ox in -1..=1 {
                if let Some(list) = kept.get(&(key.0 + ox, key.1 + oy)) {
                    for q in list {
                        let d2 = (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
                        if d2 < min_sep2 {
                            ok = false;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if ok {
            kept.entry(key).or_default().push(p);
            theta_packing += 1;
        }
    }
    Ok((theta, theta_packing))
}

/// Write the grid as binary PGM (P5, 255 = occupied) with a JSON sidecar
/// `<path>.json` recording `h`, `origin`, and `pad`.
pub fn write_pgm(grid: &GridSet, path: &Path) -> Result<()> {
    let mut data = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    data.extend(grid.occ.iter().map(|&o| if o { 255u8 } else { 0u8 }));
    fs::write(path, data)?;
    let sidecar = serde_json::json!({
        "h": grid.h,
        "origin": [grid.origin.0, grid.origin.1],
        "pad": grid.pad,
    });
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar).unwrap())?;
    Ok(())
}

/// Read a grid written by [`write_pgm`].
pub fn read_pgm(path: &Path) -> Result<GridSet> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let header_err = || Error::Format("not a binary P5 PGM".into());
    // Parse "P5\n<nx> <ny>\n<max>\n" without assuming a single header layout.
    let mut fields = Vec::new();
    let mut pos = 0usize;
    while fields.len() < 4 && pos < bytes.len() {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| header_err())?);
    }
    if fields.len() != 4 || fields[0] != "P5" {
        return Err(header_err());
    }
    let nx: usize = fields[1].parse().map_err(|_| header_err())?;
    let ny: usize = fields[2].parse().map_err(|_| header_err())?;
    pos += 1; // single whitespace after maxval
    let pixels = bytes.get(pos..pos + nx * ny).ok_or_else(header_err)?;
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)
            .map_err(|e| Error::Format(format!("sidecar: {e}")))?;
    let h = sidecar["h"].as_f64().ok_or_else(|| Error::Format("sidecar h".into()))?;
    let ox = sidecar["origin"][0].as_f64().ok_or_else(|| Error::Format("sidecar origin".into()))?;
    let oy = sidecar["origin"][1].as_f64().ok_or_else(|| Error::Format("sidecar origin".into()))?;
    let pad = sidecar["pad"].as_f64().unwrap_or(0.0);
    let mut grid = GridSet::empty((ox, oy), nx, ny, h, pad)?;
    for (cell, &px) in grid.occ.iter_mut().zip(pixels) {
        *cell = px > 127;
    }
    Ok(grid)
}

/// Export distances as row-major little-endian f32 with a JSON sidecar.
pub fn write_distance_raw(field: &DistanceField, path: &Path) -> Result<()> {
    let mut out = fs::File::create(path)?;
    let mut buf = Vec::with_capacity(field.d2.len() * 4);
    for i in 0..field.d2.len() {
        buf.extend_from_slice(&(field.dist_at(i) as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    let sidecar = serde_json::json!({
        "h": field.grid.h,
        "origin": [field.grid.origin.0, field.grid.origin.1],
        "nx": field.grid.nx,
        "ny": field.grid.ny,
    });
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar).unwrap())?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    std::path::PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disc(r: f64, h: f64, pad: f64) -> GridSet {
        rasterize(&SetModel::Disc { radius: r }, h, pad).unwrap()
    }

    #[test]
    fn raster_counts_match_area_and_perimeter_oracles() {
        let h = 0.01;
        let g = disc(1.0, h, 0.05);
        let count = g.occupied_count() as f64;
        let expect = PI / (h * h);
        assert!((count - expect).abs() < 0.02 * expect, "{count} vs {expect}");

        let h = 0.005;
        let q = rasterize(&SetModel::SquareBoundary { side: 1.0 }, h, 0.05).unwrap();
        let count = q.occupied_count() as f64;
        let expect = 4.0 / h;
        assert!((count - expect).abs() < 0.05 * expect, "{count} vs {expect}");
    }

    #[test]
    fn single_point_occupies_exactly_one_cell() {
        let g = rasterize_geometry(&[], &[(0.3371, 0.7144)], 0.01, 0.05).unwrap();
        assert_eq!(g.occupied_count(), 1);
    }

    #[test]
    fn string_models_have_no_planar_raster() {
        assert!(rasterize(&SetModel::CantorTernary, 0.01, 0.1).is_err());
    }

    #[test]
    fn oversized_grids_are_refused() {
        let err = rasterize(&SetModel::Disc { radius: 1.0 }, 1e-5, 0.1).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
    }

    #[test]
    fn distance_transform_pythagoras() {
        let mut g = GridSet::empty((0.0, 0.0), 16, 16, 0.5, 1.0).unwrap();
        g.mark(4, 5);
        let f = distance_transform(&g).unwrap();
        assert_eq!(f.d2[g.idx(7, 9)], 25); // offset (3, 4)
        assert_eq!(f.dist(7, 9), 2.5); // 5 cells at h = 0.5
        assert_eq!(f.d2[g.idx(4, 5)], 0);
        assert_eq!(f.nearest[g.idx(11, 2)], g.idx(4, 5) as u32);
    }

    #[test]
    fn distance_transform_full_grid_is_zero() {
        let mut g = GridSet::empty((0.0, 0.0), 9, 7, 0.1, 0.0).unwrap();
        for c in g.occ.iter_mut() {
            *c = true;
        }
        let f = distance_transform(&g).unwrap();
        assert!(f.d2.iter().all(|&d| d == 0));
    }

    #[test]
    fn distance_matches_radial_oracle_outside_a_disc() {
        let h = 0.005;
        let g = disc(1.0, h, 0.6);
        let f = distance_transform(&g).unwrap();
        // A cell close to 0.5 outside the boundary.
        let (ix, iy) = g.cell_of(1.5, 0.0).unwrap();
        let (cx, cy) = g.center(ix, iy);
        let oracle = cx.hypot(cy) - 1.0;
        assert!((f.dist(ix, iy) - oracle).abs() <= 2.0 * h, "{}", f.dist(ix, iy));
    }

    #[test]
    fn transform_is_idempotent_on_its_zero_set() {
        let g = rasterize(&SetModel::SquareBoundary { side: 0.6 }, 0.01, 0.2).unwrap();
        let f = distance_transform(&g).unwrap();
        let mut again = g.clone();
        for (cell, &d) in again.occ.iter_mut().zip(f.d2.iter()) {
            *cell = d == 0;
        }
        let f2 = distance_transform(&again).unwrap();
        assert_eq!(f.d2, f2.d2);
        assert_eq!(f.nearest, f2.nearest);
    }

    #[test]
    fn parallel_volume_matches_annulus_oracle() {
        let h = 0.002;
        let g = disc(1.0, h, 0.12);
        let f = distance_transform(&g).unwrap();
        let v = parallel_volume(&f, 0.1).unwrap();
        let expect = 2.0 * PI * 0.1 + PI * 0.01;
        assert!((v - expect).abs() < 0.01 * expect, "{v} vs {expect}");
        assert_eq!(parallel_volume(&f, 0.0).unwrap(), 0.0);
        assert!(parallel_volume(&f, 0.2).is_err()); // beyond pad
    }

    #[test]
    fn thin_tube_volume_of_a_curve() {
        // For eps under h/2 the annulus cells hug the curve: V close to
        // 2 * length * eps within the one-cell quantization budget.
        let h = 0.004;
        let segs = [((0.0, 0.0), (1.0, 0.0))];
        let g = rasterize_geometry(&segs, &[], h, 0.1).unwrap();
        let f = distance_transform(&g).unwrap();
        let eps = 1.5 * h;
        let v = parallel_volume(&f, eps).unwrap();
        let expect = 2.0 * eps;
        assert!(
            (v - expect).abs() <= 2.5 * h,
            "thin tube {v} vs {expect} at budget {}",
            2.5 * h
        );
    }

    #[test]
    fn boundary_length_matches_circle_oracles() {
        let h = 0.004;
        let g = disc(1.0, h, 0.3);
        let f = distance_transform(&g).unwrap();
        let len = boundary_length(&f, 0.2).unwrap();
        let expect = 2.0 * PI * 1.2;
        assert!((len - expect).abs() < 0.02 * expect, "{len} vs {expect}");

        // A single point's level set is a circle of radius r.
        let gp = rasterize_geometry(&[], &[(0.0, 0.0)], 0.004, 0.3).unwrap();
        let fp = distance_transform(&gp).unwrap();
        let len = boundary_length(&fp, 0.2).unwrap();
        let expect = 2.0 * PI * 0.2;
        assert!((len - expect).abs() < 0.02 * expect, "{len} vs {expect}");

        // Contour exiting the grid is refused.
        assert!(boundary_length(&f, 0.35).is_err());
    }

    #[test]
    fn square_boundary_offset_curve_oracle() {
        // Exact offset geometry of a square boundary: outer contour
        // 4a + 2 pi r, inner contour 4(a - 2r) for r < a/2.
        let (a, r, h) = (1.0, 0.05, 0.002);
        let g = rasterize(&SetModel::SquareBoundary { side: a }, h, 0.12).unwrap();
        let f = distance_transform(&g).unwrap();
        let len = boundary_length(&f, r).unwrap();
        let expect = 4.0 * a + 2.0 * PI * r + 4.0 * (a - 2.0 * r);
        assert!((len - expect).abs() < 0.02 * expect, "{len} vs {expect}");
    }

    #[test]
    fn volume_increments_track_boundary_length() {
        let h = 0.002;
        let g = disc(1.0, h, 0.3);
        let f = distance_transform(&g).unwrap();
        let (eps, delta) = (0.15, 0.01);
        let dv = parallel_volume(&f, eps + delta).unwrap() - parallel_volume(&f, eps).unwrap();
        let len = boundary_length(&f, eps + delta / 2.0).unwrap();
        assert!(
            (dv - len * delta).abs() < 0.05 * dv,
            "dV = {dv} vs length * delta = {}",
            len * delta
        );
    }

    #[test]
    fn footprints_collect_projection_witnesses() {
        // Two isolated points two units apart, probed at t = 0.5.
        let g = rasterize_geometry(&[], &[(0.0, 0.0), (2.0, 0.0)], 0.02, 0.8).unwrap();
        let f = distance_transform(&g).unwrap();
        let fp = footprint_mt(&f, 0.5, 2.0 * g.h).unwrap();
        assert_eq!(fp.cells.len(), 2);
        assert!(!fp.empty_shell);

        // Past the inner reach the circle is seen from outside only, and
        // the witnesses still wrap the full circle exactly once: no wide
        // angular gaps, and never more than one cell per arc step. Locally
        // outermost cells shadow their neighbors at long range, so the
        // witness set is a sparse but complete sampling of the circle.
        let h = 0.004;
        let gc = rasterize(&SetModel::Circle { radius: 1.0 }, h, 1.8).unwrap();
        let fc = distance_transform(&gc).unwrap();
        let far = footprint_mt(&fc, 1.5, 2.0 * h).unwrap();
        let mut angles: Vec<f64> = far
            .cells
            .iter()
            .map(|&c| {
                let (ix, iy) = ((c as usize) % fc.grid.nx, (c as usize) / fc.grid.nx);
                let (x, y) = fc.grid.center(ix, iy);
                y.atan2(x)
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        let mut max_gap = 2.0 * PI + angles[0] - angles[angles.len() - 1];
        for w in angles.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        assert!(max_gap < 0.15, "angular gap {max_gap} leaves part of the circle unseen");
        assert!(far.cells.len() as f64 <= 1.2 * 2.0 * PI / h, "witnessed more than once around");
    }

    #[test]
    fn covering_and_packing_counts() {
        // One isolated point: a single bucket and a single ball.
        let g = rasterize_geometry(&[], &[(0.5, 0.5)], 0.01, 0.5).unwrap();
        let f = distance_transform(&g).unwrap();
        let fp = footprint_mt(&f, 0.1, 2.0 * g.h).unwrap();
        assert_eq!(covering_packing_counts(&f, &fp, 0.2).unwrap(), (1, 1));

        // Unit segment: bucket count tracks sqrt(2)/t.
        let gs = rasterize_geometry(&[((0.0, 0.0), (1.0, 0.0))], &[], 0.005, 0.3).unwrap();
        let fs = distance_transform(&gs).unwrap();
        let fps = footprint_mt(&fs, 0.05, 2.0 * gs.h).unwrap();
        for t in [0.05, 0.1, 0.2] {
            let (theta, _) = covering_packing_counts(&fs, &fps, t).unwrap();
            let expect = 2.0f64.sqrt() / t;
            assert!(
                (theta as f64 - expect).abs() <= 2.0,
                "t = {t}: theta {theta} vs {expect}"
            );
        }

        // Resolution guard.
        assert!(covering_packing_counts(&fs, &fps, 0.005).is_err());
    }

    #[test]
    fn covering_packing_chain_on_real_footprints() {
        // Packing at t dominates covering at 4t and is dominated by
        // covering at t, on every probed model footprint.
        let cases: Vec<(SetModel, f64, f64)> = vec![
            (SetModel::Disc { radius: 1.0 }, 1.0 / 128.0, 0.35),
            (SetModel::SquareBoundary { side: 1.0 }, 1.0 / 128.0, 0.35),
            (SetModel::Scaled {
                base: Box::new(SetModel::SierpinskiGasket),
                factor: 1.0,
            }, 1.0 / 256.0, 0.3),
        ];
        for (model, h, pad) in cases {
            let g = rasterize(&model, h, pad).unwrap();
            let f = distance_transform(&g).unwrap();
            for t in [8.0 * h, 16.0 * h, 32.0 * h] {
                let fp = footprint_mt(&f, t, 2.0 * h).unwrap();
                if fp.cells.is_empty() {
                    continue;
                }
                let (theta_t, packing) = covering_packing_counts(&f, &fp, t).unwrap();
                let (theta_4t, _) = covering_packing_counts(&f, &fp, 4.0 * t).unwrap();
                assert!(
                    packing <= theta_t,
                    "{model:?} t={t}: packing {packing} above covering {theta_t}"
                );
                assert!(
                    theta_4t <= packing,
                    "{model:?} t={t}: coarse covering {theta_4t} above packing {packing}"
                );
            }
        }
    }

    #[test]
    fn lens_packing_bound_holds() {
        let kappa = lens_area();
        for (model, h) in [
            (SetModel::Disc { radius: 1.0 }, 1.0 / 256.0),
            (SetModel::SquareBoundary { side: 1.0 }, 1.0 / 256.0),
        ] {
            let g = rasterize(&model, h, 0.3).unwrap();
            let f = distance_transform(&g).unwrap();
            for t in [10.0 * h, 20.0 * h, 0.2] {
                let fp = footprint_mt(&f, t, 2.0 * h).unwrap();
                let (_, packing) = covering_packing_counts(&f, &fp, t).unwrap();
                let v = parallel_volume(&f, t).unwrap();
                assert!(
                    v >= packing as f64 * kappa * t * t,
                    "{model:?} t={t}: V = {v} under lens bound {}",
                    packing as f64 * kappa * t * t
                );
            }
        }
    }

    #[test]
    fn pgm_round_trip_preserves_grid() {
        let g = rasterize(&SetModel::Disc { radius: 0.4 }, 0.01, 0.1).unwrap();
        let dir = std::env::temp_dir().join("fractal_contents_pgm_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("disc.pgm");
        write_pgm(&g, &path).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(g.occ, back.occ);
        assert_eq!(g.nx, back.nx);
        assert_eq!(g.ny, back.ny);
        assert!((g.h - back.h).abs() < 1e-15);
        assert!((g.origin.0 - back.origin.0).abs() < 1e-12);

        let f = distance_transform(&g).unwrap();
        let raw = dir.join("disc.dist");
        write_distance_raw(&f, &raw).unwrap();
        let bytes = fs::read(&raw).unwrap();
        assert_eq!(bytes.len(), 4 * g.nx * g.ny);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn dust_geometry_is_disjoint_and_counted() {
        let (segs, pts) = dust_geometry(17.0 / 32.0, 1, 5);
        assert_eq!(segs.len(), 4 * 5);
        // Frames j = 2..5 enclose (j - 1)^2 points each.
        let expect: usize = (2..=5).map(|j| (j - 1) * (j - 1)).sum();
        assert_eq!(pts.len(), expect);
        let g = rasterize(
            &SetModel::EnclosedDust { alpha: 17.0 / 32.0, m: 1, level: 5 },
            0.005,
            0.05,
        )
        .unwrap();
        assert!(g.occupied_count() > 0);
    }
}
