//! Worldline (closed Brownian loop) Monte Carlo for mutual and tripartite
//! Rényi-2 information between regions of the `tau = 0` plane.
//!
//! A unit loop `y(t)` is placed as `x_cm + sqrt(s) y(t)`; its crossings of the
//! plane decide which regions it touches. The Dirichlet weight of a loop is 1
//! when it touches every region; the Neumann weight additionally requires
//! that no crossing falls outside the regions. Both are integrated against
//! `ds s^{-5/2} d^3 x_cm`, leaving the overall normalization free.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A region of the `tau = 0` plane. All regions are closed sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanarRegion {
    Disk { center: [f64; 2], radius: f64 },
    /// `{p : normal . p >= boundary_offset}`.
    HalfPlane { boundary_offset: f64, normal: [f64; 2] },
    Union(Vec<PlanarRegion>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Rect {
    const EVERYTHING: Rect = Rect { lo: [f64::NEG_INFINITY; 2], hi: [f64::INFINITY; 2] };

    fn hull(self, other: Rect) -> Rect {
        Rect {
            lo: [self.lo[0].min(other.lo[0]), self.lo[1].min(other.lo[1])],
            hi: [self.hi[0].max(other.hi[0]), self.hi[1].max(other.hi[1])],
        }
    }
}

impl PlanarRegion {
    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidGeometry(format!("disk radius {radius} must be positive")));
        }
        Ok(PlanarRegion::Disk { center, radius })
    }

    /// The normal is normalized here; it points into the region.
    pub fn half_plane(boundary_offset: f64, normal: [f64; 2]) -> Result<Self> {
        let len = normal[0].hypot(normal[1]);
        if !(len > 0.0 && len.is_finite() && boundary_offset.is_finite()) {
            return Err(Error::InvalidGeometry("half-plane normal must be a nonzero vector".into()));
        }
        Ok(PlanarRegion::HalfPlane { boundary_offset, normal: [normal[0] / len, normal[1] / len] })
    }

    /// Union of pairwise disjoint members.
    pub fn union(members: Vec<PlanarRegion>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidGeometry("empty union".into()));
        }
        check_pairwise_disjoint(&members)?;
        Ok(PlanarRegion::Union(members))
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            PlanarRegion::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            PlanarRegion::HalfPlane { boundary_offset, normal } => {
                normal[0] * p[0] + normal[1] * p[1] >= *boundary_offset
            }
            PlanarRegion::Union(members) => members.iter().any(|m| m.contains(p)),
        }
    }

    fn bbox(&self) -> Rect {
        match self {
            PlanarRegion::Disk { center, radius } => Rect {
                lo: [center[0] - radius, center[1] - radius],
                hi: [center[0] + radius, center[1] + radius],
            },
            PlanarRegion::HalfPlane { boundary_offset: o, normal: n } => {
                let mut r = Rect::EVERYTHING;
                // only axis-aligned half-planes have a bounded side
                for axis in 0..2 {
                    if n[1 - axis] == 0.0 {
                        if n[axis] > 0.0 {
                            r.lo[axis] = o / n[axis];
                        } else {
                            r.hi[axis] = o / n[axis];
                        }
                    }
                }
                r
            }
            PlanarRegion::Union(members) => members
                .iter()
                .map(|m| m.bbox())
                .reduce(Rect::hull)
                .unwrap_or(Rect::EVERYTHING),
        }
    }

    /// Largest disk diameter inside the region; zero for pure half-planes.
    fn finite_size(&self) -> f64 {
        match self {
            PlanarRegion::Disk { radius, .. } => 2.0 * radius,
            PlanarRegion::HalfPlane { .. } => 0.0,
            PlanarRegion::Union(m) => m.iter().map(|r| r.finite_size()).fold(0.0, f64::max),
        }
    }

    /// Distance between two regions, negative or zero when they meet.
    pub fn gap(&self, other: &PlanarRegion) -> f64 {
        use PlanarRegion::*;
        match (self, other) {
            (Union(m), o) | (o, Union(m)) => m.iter().map(|r| r.gap(o)).fold(f64::INFINITY, f64::min),
            (Disk { center: a, radius: ra }, Disk { center: b, radius: rb }) => {
                (a[0] - b[0]).hypot(a[1] - b[1]) - ra - rb
            }
            (Disk { center, radius }, HalfPlane { boundary_offset, normal })
            | (HalfPlane { boundary_offset, normal }, Disk { center, radius }) => {
                boundary_offset - normal[0] * center[0] - normal[1] * center[1] - radius
            }
            (HalfPlane { boundary_offset: o1, normal: n1 }, HalfPlane { boundary_offset: o2, normal: n2 }) => {
                let antiparallel = (n1[0] + n2[0]).abs() < 1e-12 && (n1[1] + n2[1]).abs() < 1e-12;
                if antiparallel {
                    o1 + o2
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

fn check_pairwise_disjoint(regions: &[PlanarRegion]) -> Result<()> {
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            if regions[i].gap(&regions[j]) <= 0.0 {
                return Err(Error::InvalidGeometry(format!("regions {i} and {j} overlap or touch")));
            }
        }
    }
    Ok(())
}

/// A closed unit loop in `(x, y, tau)` with zero centroid; `points[n_points] == points[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldlineLoop {
    pub points: Vec<[f64; 3]>,
    pub n_points: usize,
}

impl WorldlineLoop {
    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for p in &self.points[..self.n_points] {
            for k in 0..3 {
                c[k] += p[k];
            }
        }
        c.map(|v| v / self.n_points as f64)
    }

    pub fn radius_of_gyration_sq(&self) -> f64 {
        self.points[..self.n_points]
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / self.n_points as f64
    }
}

fn check_n_points(n_points: usize) -> Result<()> {
    if n_points < 8 || !n_points.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("n_points = {n_points} must be a power of two >= 8")));
    }
    Ok(())
}

/// Gaussian noise for the Levy midpoint construction, addressed by dyadic node
/// `(level, index)` rather than drawn sequentially. The same node always gets the
/// same noise, so refining a segment of an `n`-point loop reproduces exactly the
/// midpoints a `2n`-point loop would have had.
#[derive(Clone, Copy)]
struct LevyNoise {
    loop_seed: u64,
}

impl LevyNoise {
    fn new(loop_seed: u64) -> Self {
        Self { loop_seed }
    }

    /// Indices are below `2^level` and levels below [`MAX_LEVEL`], so keys are
    /// distinct within a loop; the generator's seeding hashes the key.
    fn node(&self, level: u32, index: u64) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(self.loop_seed ^ ((level as u64) << 56 | index))
    }
}

/// Deepest dyadic level the refiner subdivides to.
const MAX_LEVEL: u32 = 56;

/// Resolution at which a loop's extent is measured.
const EXTENT_POINTS: usize = 256;

/// Discrete Brownian bridge with `<(y(t) - y(0))^2> = 2 t (1 - t)` per coordinate,
/// built by midpoint insertion. Closure is exact, and the loop with `2n` points
/// contains the one with `n` points (up to the centroid shift), which makes
/// point-count doubling a correlated comparison.
fn generate_loop(loop_seed: u64, n_points: usize) -> WorldlineLoop {
    let noise = LevyNoise::new(loop_seed);
    let mut pts = vec![[0.0f64; 3]; n_points + 1];
    let mut stride = n_points;
    let mut level = 0u32;
    while stride > 1 {
        let half = stride / 2;
        // a midpoint of a bridge over time h (variance rate 2) has variance h/2
        let sd = (0.5 * stride as f64 / n_points as f64).sqrt();
        for start in (0..n_points).step_by(stride) {
            let mut rng = noise.node(level, (start / stride) as u64);
            let (a, b) = (pts[start], pts[start + stride]);
            for k in 0..3 {
                let z: f64 = rng.sample(StandardNormal);
                pts[start + half][k] = 0.5 * (a[k] + b[k]) + sd * z;
            }
        }
        stride = half;
        level += 1;
    }
    let mut centroid = [0.0f64; 3];
    for p in &pts[..n_points] {
        for k in 0..3 {
            centroid[k] += p[k] / n_points as f64;
        }
    }
    for p in pts.iter_mut() {
        for k in 0..3 {
            p[k] -= centroid[k];
        }
    }
    pts[n_points] = pts[0];
    WorldlineLoop { points: pts, n_points }
}


/// `n_loops` independent unit loops, reproducible from `seed`.
pub fn sample_unit_loops(n_loops: usize, n_points: usize, seed: u64) -> Result<Vec<WorldlineLoop>> {
    check_n_points(n_points)?;
    if n_loops == 0 {
        return Err(Error::InvalidParameter("n_loops must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_loops).map(|_| generate_loop(rng.gen(), n_points)).collect())
}

/// Which regions a placed loop touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub hits: Vec<bool>,
    /// Some crossing lies outside the union of all listed regions.
    pub hits_complement: bool,
}

impl IntersectionReport {
    pub fn dirichlet(&self) -> bool {
        self.hits.iter().all(|&h| h)
    }

    pub fn neumann(&self) -> bool {
        self.dirichlet() && !self.hits_complement
    }
}

/// Crossing summary as a bitmask over at most 64 regions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Crossings {
    mask: u64,
    outside: bool,
}

fn classify(regions: &[PlanarRegion], p: [f64; 2], acc: &mut Crossings) {
    let mut inside = false;
    for (i, r) in regions.iter().enumerate() {
        if r.contains(p) {
            acc.mask |= 1 << i;
            inside = true;
        }
    }
    acc.outside |= !inside;
}

fn crossing_point(a: &[f64; 3], b: &[f64; 3], tau_cm: f64, x_cm: [f64; 2], scale: f64) -> [f64; 2] {
    let za = tau_cm + scale * a[2];
    let zb = tau_cm + scale * b[2];
    let f = za / (za - zb);
    [
        x_cm[0] + scale * (a[0] + f * (b[0] - a[0])),
        x_cm[1] + scale * (a[1] + f * (b[1] - a[1])),
    ]
}

#[inline]
fn straddles(za: f64, zb: f64) -> bool {
    (za >= 0.0) != (zb >= 0.0)
}

/// Places the loop at `x_cm` with size `sqrt(s)` and tests every crossing of `tau = 0`.
pub fn intersection_counts(
    lp: &WorldlineLoop,
    x_cm: [f64; 3],
    s: f64,
    regions: &[PlanarRegion],
) -> Result<IntersectionReport> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("loop length s = {s} must be positive")));
    }
    if regions.len() > 64 {
        return Err(Error::InvalidParameter("at most 64 regions".into()));
    }
    let scale = s.sqrt();
    let mut acc = Crossings::default();
    for w in lp.points.windows(2) {
        if straddles(x_cm[2] + scale * w[0][2], x_cm[2] + scale * w[1][2]) {
            classify(regions, crossing_point(&w[0], &w[1], x_cm[2], [x_cm[0], x_cm[1]], scale), &mut acc);
        }
    }
    Ok(IntersectionReport {
        hits: (0..regions.len()).map(|i| acc.mask & (1 << i) != 0).collect(),
        hits_complement: acc.outside,
    })
}

/// Bridge excursions beyond this many standard deviations are ignored (probability `e^{-2 K^2}`).
const EXCURSION_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoxClass {
    Inside,
    Outside,
    Mixed,
}

impl PlanarRegion {
    fn classify_box(&self, lo: [f64; 2], hi: [f64; 2]) -> BoxClass {
        match self {
            PlanarRegion::Disk { center, radius } => {
                let near = |k: usize| (center[k].clamp(lo[k], hi[k]) - center[k]).powi(2);
                let far = |k: usize| (center[k] - lo[k]).abs().max((hi[k] - center[k]).abs()).powi(2);
                let r2 = radius * radius;
                if far(0) + far(1) <= r2 {
                    BoxClass::Inside
                } else if near(0) + near(1) > r2 {
                    BoxClass::Outside
                } else {
                    BoxClass::Mixed
                }
            }
            PlanarRegion::HalfPlane { boundary_offset, normal } => {
                let span = |k: usize| {
                    let (a, b) = (normal[k] * lo[k], normal[k] * hi[k]);
                    (a.min(b), a.max(b))
                };
                let (x0, x1) = span(0);
                let (y0, y1) = span(1);
                if x0 + y0 >= *boundary_offset {
                    BoxClass::Inside
                } else if x1 + y1 < *boundary_offset {
                    BoxClass::Outside
                } else {
                    BoxClass::Mixed
                }
            }
            PlanarRegion::Union(members) => {
                let mut all_outside = true;
                for m in members {
                    match m.classify_box(lo, hi) {
                        BoxClass::Inside => return BoxClass::Inside,
                        BoxClass::Mixed => all_outside = false,
                        BoxClass::Outside => {}
                    }
                }
                if all_outside {
                    BoxClass::Outside
                } else {
                    BoxClass::Mixed
                }
            }
        }
    }

    /// Smallest length scale of the region (disk radius); infinite for half-planes.
    fn feature_size(&self) -> f64 {
        match self {
            PlanarRegion::Disk { radius, .. } => *radius,
            PlanarRegion::HalfPlane { .. } => f64::INFINITY,
            PlanarRegion::Union(m) => m.iter().map(|r| r.feature_size()).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Resolves which regions the continuous loop touches between two skeleton
/// points by sampling Brownian-bridge midpoints until every piece is either
/// clear of the plane or lies over a single membership class.
struct Refiner<'a> {
    regions: &'a [PlanarRegion],
    /// Segments whose standard deviation drops below this are treated as straight.
    min_sigma: f64,
    saturated: u64,
}

impl Refiner<'_> {
    fn done(&self, acc: &Crossings) -> bool {
        acc.mask == self.saturated && acc.outside
    }

    /// `var` is the per-coordinate variance of the displacement across the segment,
    /// whose midpoint is dyadic node `(level, index)` of the loop.
    #[allow(clippy::too_many_arguments)]
    fn segment(&self, a: [f64; 3], b: [f64; 3], var: f64, level: u32, index: u64, noise: &LevyNoise, acc: &mut Crossings) {
        if self.done(acc) {
            return;
        }
        let cross = straddles(a[2], b[2]);
        // probability that a bridge with same-sign ends reaches the plane
        let p_cross = if cross { 1.0 } else { (-2.0 * a[2] * b[2] / var).exp() };
        if p_cross < 1e-16 {
            return;
        }
        // the node's midpoint normals come first, then the crossing uniform
        let mut rng = noise.node(level, index);
        let mut z = [0.0f64; 3];
        for zk in z.iter_mut() {
            *zk = rng.sample(StandardNormal);
        }
        let pad = EXCURSION_SIGMAS * var.sqrt();
        let lo = [a[0].min(b[0]) - pad, a[1].min(b[1]) - pad];
        let hi = [a[0].max(b[0]) + pad, a[1].max(b[1]) + pad];
        let mut mask = 0u64;
        let mut mixed = false;
        for (i, r) in self.regions.iter().enumerate() {
            match r.classify_box(lo, hi) {
                BoxClass::Inside => mask |= 1 << i,
                BoxClass::Mixed => mixed = true,
                BoxClass::Outside => {}
            }
        }
        if !mixed {
            if cross || rng.gen::<f64>() < p_cross {
                acc.mask |= mask;
                acc.outside |= mask == 0;
            }
            return;
        }
        if var.sqrt() < self.min_sigma || level + 1 >= MAX_LEVEL {
            if cross {
                let f = a[2] / (a[2] - b[2]);
                classify(self.regions, [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])], acc);
            } else if rng.gen::<f64>() < p_cross {
                let p = if a[2].abs() < b[2].abs() { a } else { b };
                classify(self.regions, [p[0], p[1]], acc);
            }
            return;
        }
        let sd = (0.25 * var).sqrt();
        let m: [f64; 3] = std::array::from_fn(|k| 0.5 * (a[k] + b[k]) + sd * z[k]);
        self.segment(a, m, 0.5 * var, level + 1, 2 * index, noise, acc);
        self.segment(m, b, 0.5 * var, level + 1, 2 * index + 1, noise, acc);
    }
}

/// A loop skeleton with its segments bucketed by `tau` range (padded by the
/// bridge excursion scale), so the segments near a given level are found
/// without scanning the whole loop.
struct IndexedLoop {
    points: Vec<[f64; 3]>,
    noise: LevyNoise,
    /// Dyadic level of the skeleton segments.
    depth: u32,
    /// Per-coordinate variance of one skeleton step of the unit loop.
    step_var: f64,
    tau_min: f64,
    tau_max: f64,
    xy_lo: [f64; 2],
    xy_hi: [f64; 2],
    bucket_width: f64,
    offsets: Vec<u32>,
    segments: Vec<u32>,
}

impl IndexedLoop {
    fn new(lp: WorldlineLoop, loop_seed: u64) -> Self {
        let pts = lp.points;
        let n_seg = pts.len() - 1;
        let step_var = 2.0 / n_seg as f64;
        let pad = EXCURSION_SIGMAS * step_var.sqrt();
        // The placement domain is read off a fixed-resolution subsample, so loops
        // that differ only in point count get (almost) the same placements.
        let coarse = n_seg.min(EXTENT_POINTS);
        let extent_pad = EXCURSION_SIGMAS * (2.0 / coarse as f64).sqrt();
        let mut tau_min = f64::INFINITY;
        let mut tau_max = f64::NEG_INFINITY;
        let mut xy_lo = [f64::INFINITY; 2];
        let mut xy_hi = [f64::NEG_INFINITY; 2];
        for p in pts.iter().step_by(n_seg / coarse) {
            tau_min = tau_min.min(p[2]);
            tau_max = tau_max.max(p[2]);
            for k in 0..2 {
                xy_lo[k] = xy_lo[k].min(p[k]);
                xy_hi[k] = xy_hi[k].max(p[k]);
            }
        }
        // the continuous loop may wander beyond its skeleton
        tau_min -= extent_pad;
        tau_max += extent_pad;
        xy_lo = xy_lo.map(|v| v - extent_pad);
        xy_hi = xy_hi.map(|v| v + extent_pad);
        let n_buckets = (((tau_max - tau_min) / step_var.sqrt()).ceil() as usize).clamp(1, n_seg);
        let bucket_width = (tau_max - tau_min) / n_buckets as f64;
        let bucket = |t: f64| (((t - tau_min) / bucket_width).max(0.0) as usize).min(n_buckets - 1);
        let range = |k: usize| {
            let (a, b) = (pts[k][2], pts[k + 1][2]);
            (bucket(a.min(b) - pad), bucket(a.max(b) + pad))
        };
        let mut counts = vec![0u32; n_buckets + 1];
        for k in 0..n_seg {
            let (lo, hi) = range(k);
            for b in lo..=hi {
                counts[b + 1] += 1;
            }
        }
        for b in 0..n_buckets {
            counts[b + 1] += counts[b];
        }
        let mut fill = counts.clone();
        let mut segments = vec![0u32; counts[n_buckets] as usize];
        for k in 0..n_seg {
            let (lo, hi) = range(k);
            for b in lo..=hi {
                segments[fill[b] as usize] = k as u32;
                fill[b] += 1;
            }
        }
        Self {
            points: pts,
            noise: LevyNoise::new(loop_seed),
            depth: n_seg.trailing_zeros(),
            step_var,
            tau_min,
            tau_max,
            xy_lo,
            xy_hi,
            bucket_width,
            offsets: counts,
            segments,
        }
    }

    fn crossings(&self, refiner: &Refiner, x_cm: [f64; 3], scale: f64) -> Crossings {
        let mut acc = Crossings::default();
        let level = -x_cm[2] / scale;
        if level < self.tau_min || level > self.tau_max {
            return acc;
        }
        let n_buckets = self.offsets.len() - 1;
        let b = (((level - self.tau_min) / self.bucket_width) as usize).min(n_buckets - 1);
        let place = |p: &[f64; 3]| [x_cm[0] + scale * p[0], x_cm[1] + scale * p[1], x_cm[2] + scale * p[2]];
        let var = self.step_var * scale * scale;
        for &k in &self.segments[self.offsets[b] as usize..self.offsets[b + 1] as usize] {
            let k = k as usize;
            refiner.segment(place(&self.points[k]), place(&self.points[k + 1]), var, self.depth, k as u64, &self.noise, &mut acc);
            if refiner.done(&acc) {
                break;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl MCEstimate {
    pub fn rel_err(&self) -> f64 {
        self.stderr / self.mean.abs()
    }
}

/// Monte Carlo sizes and the proper-time range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    /// Fresh loops drawn in every stratum.
    pub loops_per_stratum: usize,
    pub placements_per_loop: usize,
    pub n_points: usize,
    pub n_strata: usize,
    /// `(s_min, s_max)`; chosen from the geometry when absent.
    pub s_range: Option<(f64, f64)>,
    /// Largest acceptable `stderr/|mean|` of the Dirichlet estimate.
    pub stderr_cap: Option<f64>,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            loops_per_stratum: 256,
            placements_per_loop: 64,
            n_points: 1024,
            n_strata: 24,
            s_range: None,
            stderr_cap: None,
            seed: 0x5eed,
        }
    }
}

impl SamplingParams {
    pub fn total_placements(&self) -> u64 {
        (self.loops_per_stratum * self.placements_per_loop * self.n_strata) as u64
    }

    fn validate(&self) -> Result<()> {
        check_n_points(self.n_points)?;
        if self.loops_per_stratum < 2 || self.placements_per_loop == 0 || self.n_strata == 0 {
            return Err(Error::InvalidParameter(
                "need at least 2 loops per stratum, one placement and one stratum".into(),
            ));
        }
        if let Some((lo, hi)) = self.s_range {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::InvalidParameter(format!("bad proper-time range ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// Contribution of one `ln s` stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumValue {
    pub s_lo: f64,
    pub s_hi: f64,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
}

/// Automatic proper-time range. Below `s_min` a loop is too small to bridge the
/// closest pair; the weight above `s_max` falls like `1/s` per e-fold and is
/// reported as the tail estimate.
fn auto_s_range(regions: &[PlanarRegion]) -> (f64, f64) {
    let mut gap = f64::INFINITY;
    let mut far = 0.0f64;
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            let g = regions[i].gap(&regions[j]);
            gap = gap.min(g);
            far = far.max(g + regions[i].finite_size() + regions[j].finite_size());
        }
    }
    // unit loops essentially never exceed a diameter of 8 (Gaussian tails ~ e^-30)
    ((gap / 8.0).powi(2), 400.0 * far * far)
}

struct Engine<'a> {
    regions: &'a [PlanarRegion],
    /// The first `n_domain` regions must all be touched for a nonzero score.
    n_domain: usize,
    params: &'a SamplingParams,
    s_range: (f64, f64),
    min_sigma: f64,
}

/// Per-sample scores plus a flag raised if a pointwise inequality is violated.
type ScoreFn<'a> = dyn Fn(Crossings) -> ([f64; 4], bool) + Sync + 'a;

impl<'a> Engine<'a> {
    fn new(regions: &'a [PlanarRegion], n_domain: usize, params: &'a SamplingParams) -> Result<Self> {
        params.validate()?;
        check_pairwise_disjoint(regions)?;
        let s_range = params.s_range.unwrap_or_else(|| auto_s_range(&regions[..n_domain]));
        let mut scale = regions.iter().map(|r| r.feature_size()).fold(f64::INFINITY, f64::min);
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                scale = scale.min(regions[i].gap(&regions[j]));
            }
        }
        let engine = Self { regions, n_domain, params, s_range, min_sigma: 1e-4 * scale };
        // boundedness does not depend on the loop size; a huge loop makes the set non-empty
        if let Some((lo, hi)) = engine.domain(1e6, [-1.0, -1.0], [1.0, 1.0]) {
            if !lo.iter().chain(hi.iter()).all(|v| v.is_finite()) {
                return Err(Error::InvalidGeometry(
                    "placements touching all regions do not form a bounded set".into(),
                ));
            }
        }
        Ok(engine)
    }

    /// Placements `x_cm` for which the loop's box meets every domain region's box.
    fn domain(&self, scale: f64, lo: [f64; 2], hi: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
        let mut dlo = [f64::NEG_INFINITY; 2];
        let mut dhi = [f64::INFINITY; 2];
        for r in &self.regions[..self.n_domain] {
            let b = r.bbox();
            for k in 0..2 {
                dlo[k] = dlo[k].max(b.lo[k] - scale * hi[k]);
                dhi[k] = dhi[k].min(b.hi[k] - scale * lo[k]);
            }
        }
        (dlo[0] < dhi[0] && dlo[1] < dhi[1]).then_some((dlo, dhi))
    }

    fn stratum(&self, index: usize, score: &ScoreFn) -> ([f64; 4], [f64; 4], u64) {
        let p = self.params;
        let (ln_lo, ln_hi) = (self.s_range.0.ln(), self.s_range.1.ln());
        let width = (ln_hi - ln_lo) / p.n_strata as f64;
        let u_lo = ln_lo + index as f64 * width;
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        rng.set_stream(index as u64 + 1);
        let mut sum = [0.0; 4];
        let mut sum_sq = [0.0; 4];
        let mut violations = 0u64;
        let refiner = Refiner {
            regions: self.regions,
            min_sigma: self.min_sigma,
            saturated: (1u64 << self.regions.len()) - 1,
        };
        for _ in 0..p.loops_per_stratum {
            let loop_seed: u64 = rng.gen();
            let lp = IndexedLoop::new(generate_loop(loop_seed, p.n_points), loop_seed);
            let mut per_loop = [0.0; 4];
            for _ in 0..p.placements_per_loop {
                // all four uniforms are drawn even when the placement is wasted,
                // so the sequence does not depend on the loop
                let v: [f64; 4] = rng.gen();
                let u = u_lo + width * v[0];
                let scale = (0.5 * u).exp();
                let Some((dlo, dhi)) = self.domain(scale, lp.xy_lo, lp.xy_hi) else {
                    continue;
                };
                let t_lo = -scale * lp.tau_max;
                let t_hi = -scale * lp.tau_min;
                let x = [
                    dlo[0] + (dhi[0] - dlo[0]) * v[1],
                    dlo[1] + (dhi[1] - dlo[1]) * v[2],
                    t_lo + (t_hi - t_lo) * v[3],
                ];
                let c = lp.crossings(&refiner, x, scale);
                let (vals, bad) = score(c);
                violations += bad as u64;
                // ds s^{-5/2} = d(ln s) s^{-3/2}
                let w = width * (-1.5 * u).exp() * (dhi[0] - dlo[0]) * (dhi[1] - dlo[1]) * (t_hi - t_lo);
                for k in 0..4 {
                    per_loop[k] += w * vals[k];
                }
            }
            for k in 0..4 {
                let m = per_loop[k] / p.placements_per_loop as f64;
                sum[k] += m;
                sum_sq[k] += m * m;
            }
        }
        let n = p.loops_per_stratum as f64;
        let mean = sum.map(|s| s / n);
        let mut var = [0.0; 4];
        for k in 0..4 {
            var[k] = ((sum_sq[k] / n - mean[k] * mean[k]).max(0.0) * n / (n - 1.0)) / n;
        }
        (mean, var, violations)
    }

    fn run(&self, score: &ScoreFn) -> RawRun {
        let strata: Vec<_> = (0..self.params.n_strata)
            .into_par_iter()
            .map(|i| self.stratum(i, score))
            .collect();
        let (ln_lo, ln_hi) = (self.s_range.0.ln(), self.s_range.1.ln());
        let width = (ln_hi - ln_lo) / self.params.n_strata as f64;
        let mut mean = [0.0; 4];
        let mut var = [0.0; 4];
        let mut violations = 0;
        let mut per_stratum = Vec::with_capacity(strata.len());
        for (i, (m, v, bad)) in strata.iter().enumerate() {
            for k in 0..4 {
                mean[k] += m[k];
                var[k] += v[k];
            }
            violations += bad;
            per_stratum.push(StratumValue {
                s_lo: (ln_lo + i as f64 * width).exp(),
                s_hi: (ln_lo + (i + 1) as f64 * width).exp(),
                values: m.to_vec(),
                stderrs: v.iter().map(|x| x.sqrt()).collect(),
            });
        }
        let last = strata.last().map(|s| s.0).unwrap_or([0.0; 4]);
        RawRun {
            mean,
            stderr: var.map(f64::sqrt),
            // density per e-fold at s_max, continued with its 1/s fall-off
            tail: last.map(|v| v / width),
            violations,
            strata: per_stratum,
        }
    }

    fn estimate(&self, raw: &RawRun, k: usize) -> MCEstimate {
        MCEstimate {
            mean: raw.mean[k],
            stderr: raw.stderr[k],
            n_samples: self.params.total_placements(),
            seed: self.params.seed,
        }
    }

    fn enforce_cap(&self, est: &MCEstimate) -> Result<()> {
        if let Some(cap) = self.params.stderr_cap {
            let rel_err = est.rel_err();
            if !(rel_err <= cap) {
                return Err(Error::InsufficientStatistics { rel_err, cap });
            }
        }
        Ok(())
    }
}

struct RawRun {
    mean: [f64; 4],
    stderr: [f64; 4],
    tail: [f64; 4],
    violations: u64,
    strata: Vec<StratumValue>,
}

/// A Dirichlet/Neumann pair of estimates in unnormalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEstimate {
    pub dirichlet: MCEstimate,
    pub neumann: MCEstimate,
    pub s_range: (f64, f64),
    /// Estimated Dirichlet contribution from `s > s_max` (not included in the mean).
    pub tail_estimate: f64,
    /// Stratum values `[dirichlet, neumann]`.
    pub strata: Vec<StratumValue>,
    /// Samples where the Neumann weight exceeded the Dirichlet one (always 0).
    pub dominance_violations: u64,
}

impl SectorEstimate {
    fn from_raw(engine: &Engine, raw: RawRun) -> Self {
        Self {
            dirichlet: engine.estimate(&raw, 0),
            neumann: engine.estimate(&raw, 1),
            s_range: engine.s_range,
            tail_estimate: raw.tail[0],
            strata: raw
                .strata
                .into_iter()
                .map(|mut s| {
                    s.values.truncate(2);
                    s.stderrs.truncate(2);
                    s
                })
                .collect(),
            dominance_violations: raw.violations,
        }
    }
}

/// Mutual information estimate `int ds s^{-5/2} int d^3x <N(A,B)>` and its Neumann analogue.
pub fn estimate_mutual(a: &PlanarRegion, b: &PlanarRegion, params: &SamplingParams) -> Result<SectorEstimate> {
    let regions = [a.clone(), b.clone()];
    let engine = Engine::new(&regions, 2, params)?;
    let raw = engine.run(&|c: Crossings| {
        let d = (c.mask == 0b11) as u8 as f64;
        let n = (c.mask == 0b11 && !c.outside) as u8 as f64;
        ([d, n, 0.0, 0.0], n > d)
    });
    let est = SectorEstimate::from_raw(&engine, raw);
    engine.enforce_cap(&est.dirichlet)?;
    Ok(est)
}

/// Tripartite estimate; the Neumann weight is `-1` so its estimate is never positive.
pub fn estimate_tripartite(
    a: &PlanarRegion,
    b: &PlanarRegion,
    c: &PlanarRegion,
    params: &SamplingParams,
) -> Result<SectorEstimate> {
    let regions = [a.clone(), b.clone(), c.clone()];
    let engine = Engine::new(&regions, 3, params)?;
    let raw = engine.run(&|c: Crossings| {
        let d = (c.mask == 0b111) as u8 as f64;
        let n = -((c.mask == 0b111 && !c.outside) as u8 as f64);
        ([d, n, 0.0, 0.0], n.abs() > d)
    });
    let est = SectorEstimate::from_raw(&engine, raw);
    engine.enforce_cap(&est.dirichlet)?;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub passed: bool,
    /// Distance from violation, in the estimate's units (positive when satisfied).
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub mutual_ab: SectorEstimate,
    pub tripartite: SectorEstimate,
    /// `I2(A,B)` = Dirichlet + Neumann mutual terms.
    pub i2_ab: f64,
    /// `I2(A,B,C)` = Dirichlet (+1) and Neumann (-1) tripartite terms.
    pub i2_abc: f64,
    pub samples: u64,
    /// Samples violating any of `N(A,B,C) <= N(A,B)`, `N'(A,B) <= N(A,B)`, `|N'(A,B,C)| <= N(A,B,C)`.
    pub pointwise_violations: u64,
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn all_passed(&self) -> bool {
        self.pointwise_violations == 0 && self.checks.iter().all(|c| c.passed)
    }
}

/// Checks `0 <= I2(A,B,C) <= I2(A,B)` on one correlated loop ensemble, sampled
/// over the placements that can touch both `A` and `B`.
pub fn inequality_suite(
    a: &PlanarRegion,
    b: &PlanarRegion,
    c: &PlanarRegion,
    params: &SamplingParams,
) -> Result<InequalityReport> {
    let regions = [a.clone(), b.clone(), c.clone()];
    let engine = Engine::new(&regions, 2, params)?;
    let raw = engine.run(&|x: Crossings| {
        let ab = x.mask & 0b11 == 0b11;
        let n_ab = ab as u8 as f64;
        // Neumann for the pair: nothing outside A and B, so a crossing in C disqualifies
        let n_ab_neu = (ab && !x.outside && x.mask & 0b100 == 0) as u8 as f64;
        let n_abc = (x.mask == 0b111) as u8 as f64;
        let n_abc_neu = -((x.mask == 0b111 && !x.outside) as u8 as f64);
        let bad = n_abc > n_ab || n_ab_neu > n_ab || n_abc_neu.abs() > n_abc;
        ([n_ab, n_ab_neu, n_abc, n_abc_neu], bad)
    });
    let mutual_ab = SectorEstimate {
        dirichlet: engine.estimate(&raw, 0),
        neumann: engine.estimate(&raw, 1),
        s_range: engine.s_range,
        tail_estimate: raw.tail[0],
        strata: raw.strata.iter().map(|s| pick(s, 0)).collect(),
        dominance_violations: raw.violations,
    };
    let tripartite = SectorEstimate {
        dirichlet: engine.estimate(&raw, 2),
        neumann: engine.estimate(&raw, 3),
        s_range: engine.s_range,
        tail_estimate: raw.tail[2],
        strata: raw.strata.iter().map(|s| pick(s, 2)).collect(),
        dominance_violations: raw.violations,
    };
    engine.enforce_cap(&mutual_ab.dirichlet)?;
    let i2_ab = raw.mean[0] + raw.mean[1];
    let i2_abc = raw.mean[2] + raw.mean[3];
    let checks = vec![
        InequalityCheck { name: "I2(A,B,C) >= 0".into(), passed: i2_abc >= 0.0, margin: i2_abc },
        InequalityCheck { name: "I2(A,B,C) <= I2(A,B)".into(), passed: i2_abc <= i2_ab, margin: i2_ab - i2_abc },
        InequalityCheck {
            name: "I2_Neu(A,B,C) <= 0".into(),
            passed: raw.mean[3] <= 0.0,
            margin: -raw.mean[3],
        },
        InequalityCheck {
            name: "|I2_Neu(A,B,C)| <= I2_Dir(A,B,C)".into(),
            passed: raw.mean[3].abs() <= raw.mean[2],
            margin: raw.mean[2] - raw.mean[3].abs(),
        },
    ];
    Ok(InequalityReport {
        mutual_ab,
        tripartite,
        i2_ab,
        i2_abc,
        samples: params.total_placements(),
        pointwise_violations: raw.violations,
        checks,
    })
}

fn pick(s: &StratumValue, k: usize) -> StratumValue {
    StratumValue {
        s_lo: s.s_lo,
        s_hi: s.s_hi,
        values: s.values[k..k + 2].to_vec(),
        stderrs: s.stderrs[k..k + 2].to_vec(),
    }
}

/// Two unit-radius disks with centers a distance `r_over_r` apart on the x axis.
pub fn two_disk_regions(r_over_r: f64) -> Result<(PlanarRegion, PlanarRegion)> {
    if !(r_over_r > 2.0) {
        return Err(Error::InvalidGeometry(format!("disks overlap for r/R = {r_over_r}")));
    }
    Ok((PlanarRegion::disk([-0.5 * r_over_r, 0.0], 1.0)?, PlanarRegion::disk([0.5 * r_over_r, 0.0], 1.0)?))
}

/// Factor turning raw worldline units into I2 units, fixed by one reference value.
pub fn calibration_factor(reference_value: f64, raw: &MCEstimate) -> Result<f64> {
    if !(raw.mean > 0.0) || !(reference_value > 0.0) {
        return Err(Error::InvalidParameter("calibration needs positive reference and estimate".into()));
    }
    Ok(reference_value / raw.mean)
}

/// Heat-kernel normalization `1/2 (4 pi)^{-3/2}` of the loop measure for loops
/// with `<dy^2> = 2 dt`; informational only, calibration is what tests rely on.
pub fn theoretical_prefactor() -> f64 {
    0.5 * (4.0 * PI).powf(-1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn small_params(seed: u64) -> SamplingParams {
        SamplingParams {
            loops_per_stratum: 16,
            placements_per_loop: 16,
            n_points: 256,
            n_strata: 8,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn loops_are_closed_and_centered() {
        for lp in sample_unit_loops(20, 64, 3).unwrap() {
            assert_eq!(lp.points.len(), 65);
            assert_eq!(lp.points[0], lp.points[64]);
            assert!(lp.centroid().iter().all(|c| c.abs() < 1e-12));
        }
        assert!(sample_unit_loops(1, 12, 0).is_err());
        assert!(sample_unit_loops(1, 4, 0).is_err());
        assert!(sample_unit_loops(0, 8, 0).is_err());
    }

    #[test]
    fn doubling_refines_the_same_loop() {
        let coarse = generate_loop(42, 16);
        let fine = generate_loop(42, 32);
        for k in 0..=16 {
            for c in 0..3 {
                let a = coarse.points[k][c] - coarse.points[0][c];
                let b = fine.points[2 * k][c] - fine.points[0][c];
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn radius_of_gyration_matches_mode_sum() {
        let n = 64;
        // each Fourier mode k of the discrete bridge carries variance sigma^2 / (4 sin^2(pi k/n)) per coordinate
        let sigma_sq = 2.0 / n as f64;
        let oracle: f64 = (1..n)
            .map(|k| sigma_sq / (4.0 * (PI * k as f64 / n as f64).sin().powi(2)))
            .sum::<f64>()
            * 3.0
            / n as f64;
        assert!((oracle - (n * n - 1) as f64 / (2.0 * (n * n) as f64)).abs() < 1e-12);
        let rg: Vec<f64> = sample_unit_loops(4000, n, 11).unwrap().iter().map(|l| l.radius_of_gyration_sq()).collect();
        let mean = rg.iter().sum::<f64>() / rg.len() as f64;
        let var = rg.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rg.len() - 1) as f64;
        let stderr = (var / rg.len() as f64).sqrt();
        assert!((mean - oracle).abs() < 3.0 * stderr, "{mean} vs {oracle} +- {stderr}");
    }

    #[test]
    fn bridge_increment_variance() {
        // <(y_k - y_0)^2> = 2 (k/n)(1 - k/n) per coordinate
        let n = 32;
        let loops = sample_unit_loops(6000, n, 5).unwrap();
        for &k in &[4usize, 16, 24] {
            let t = k as f64 / n as f64;
            let expect = 2.0 * t * (1.0 - t);
            let vals: Vec<f64> = loops.iter().map(|l| (l.points[k][2] - l.points[0][2]).powi(2)).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
            assert!((mean - expect).abs() < 3.0 * sd / (vals.len() as f64).sqrt(), "k={k}: {mean} vs {expect}");
        }
    }

    fn square_loop() -> WorldlineLoop {
        // crosses tau = 0 at (0, 0) and (2, 0) for a unit placement at the origin
        let pts = vec![[0.0, 0.0, -1.0], [0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [2.0, 0.0, -1.0]];
        let mut points = pts.clone();
        points.push(pts[0]);
        WorldlineLoop { points, n_points: 4 }
    }

    #[test]
    fn intersection_counts_on_a_hand_built_loop() {
        let lp = square_loop();
        let a = PlanarRegion::disk([0.0, 0.0], 0.5).unwrap();
        let b = PlanarRegion::disk([2.0, 0.0], 0.5).unwrap();
        let rep = intersection_counts(&lp, [0.0; 3], 1.0, &[a.clone(), b.clone()]).unwrap();
        assert!(rep.dirichlet() && rep.neumann());
        let above = intersection_counts(&lp, [0.0, 0.0, 5.0], 1.0, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(above.hits, vec![false, false]);
        assert!(!above.hits_complement);
        // crossing exactly on the boundary of a closed disk counts as inside
        let edge = PlanarRegion::disk([0.0, 1.0], 1.0).unwrap();
        let rep = intersection_counts(&lp, [0.0; 3], 1.0, &[edge, b.clone()]).unwrap();
        assert!(rep.dirichlet());
        let rep = intersection_counts(&lp, [0.0; 3], 1.0, &[a]).unwrap();
        assert!(rep.hits[0] && rep.hits_complement && !rep.neumann());
        assert!(intersection_counts(&lp, [0.0; 3], 0.0, &[b]).is_err());
    }

    #[test]
    fn region_geometry() {
        let a = PlanarRegion::disk([0.0, 0.0], 1.0).unwrap();
        let b = PlanarRegion::disk([3.0, 0.0], 1.0).unwrap();
        assert!((a.gap(&b) - 1.0).abs() < 1e-15);
        assert!(PlanarRegion::union(vec![a.clone(), b.clone()]).is_ok());
        assert!(PlanarRegion::union(vec![a.clone(), PlanarRegion::disk([1.5, 0.0], 1.0).unwrap()]).is_err());
        let h = PlanarRegion::half_plane(5.0, [2.0, 0.0]).unwrap();
        assert!(h.contains([5.0, 100.0]) && !h.contains([4.999, 0.0]));
        assert!((h.gap(&b) - 1.0).abs() < 1e-15);
        let h2 = PlanarRegion::half_plane(-4.0, [-1.0, 0.0]).unwrap();
        assert!(h.gap(&h2) > 0.0 && h.gap(&PlanarRegion::half_plane(0.0, [0.0, 1.0]).unwrap()) < 0.0);
        assert!(PlanarRegion::disk([0.0, 0.0], 0.0).is_err());
        assert!(PlanarRegion::half_plane(0.0, [0.0, 0.0]).is_err());
        let u = PlanarRegion::union(vec![a, b]).unwrap();
        assert!(u.contains([3.5, 0.0]) && !u.contains([1.5, 0.0]));
    }

    proptest! {
        #[test]
        fn box_classification_is_conservative(
            cx in -3.0f64..3.0, cy in -3.0f64..3.0, r in 0.1f64..3.0,
            x0 in -5.0f64..5.0, y0 in -5.0f64..5.0, w in 0.01f64..4.0, h in 0.01f64..4.0,
            nx in -1.0f64..1.0, ny in -1.0f64..1.0, off in -3.0f64..3.0,
        ) {
            let mut regions = vec![PlanarRegion::disk([cx, cy], r).unwrap()];
            if nx.hypot(ny) > 0.05 {
                regions.push(PlanarRegion::half_plane(off, [nx, ny]).unwrap());
            }
            let (lo, hi) = ([x0, y0], [x0 + w, y0 + h]);
            for reg in &regions {
                let class = reg.classify_box(lo, hi);
                for i in 0..=8 {
                    for j in 0..=8 {
                        let p = [x0 + w * i as f64 / 8.0, y0 + h * j as f64 / 8.0];
                        match class {
                            BoxClass::Inside => prop_assert!(reg.contains(p)),
                            BoxClass::Outside => prop_assert!(!reg.contains(p)),
                            BoxClass::Mixed => {}
                        }
                    }
                }
            }
        }
    }

    /// Fraction of bridges from `a` to `b` that touch `region`, resolved by the refiner.
    fn refined_hit_rate(a: [f64; 3], b: [f64; 3], var: f64, region: &PlanarRegion, trials: usize) -> f64 {
        let regions = std::slice::from_ref(region);
        let refiner = Refiner { regions, min_sigma: 1e-6, saturated: 1 };
        (0..trials as u64)
            .filter(|&t| {
                let mut acc = Crossings::default();
                refiner.segment(a, b, var, 0, 0, &LevyNoise::new(99 + t), &mut acc);
                acc.mask == 1
            })
            .count() as f64
            / trials as f64
    }

    #[test]
    fn refined_plane_crossing_probability() {
        // a region covering everything reduces the question to whether tau reaches 0:
        // exp(-2 z_a z_b / V) for a bridge of variance V
        let everything = PlanarRegion::half_plane(-1e9, [1.0, 0.0]).unwrap();
        let (za, zb, var) = (0.4f64, 0.3, 0.5);
        let expect = (-2.0 * za * zb / var).exp();
        let trials = 20000;
        let got = refined_hit_rate([0.0, 0.0, za], [0.1, 0.0, zb], var, &everything, trials);
        let sd = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((got - expect).abs() < 3.0 * sd, "{got} vs {expect}");
    }

    #[test]
    fn refinement_agrees_with_fine_discretization() {
        // brute force: a finely discretized bridge with linear-interpolated crossings
        let disk = PlanarRegion::disk([1.0, 0.0], 0.8).unwrap();
        let (a, b, var) = ([0.0, 0.0, 0.05], [0.3, 0.1, -0.2], 0.3f64);
        let trials = 6000;
        let n_fine = 1 << 12;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let mut hits = 0usize;
        for _ in 0..trials {
            // bridge by conditioning iid steps on the endpoint displacement
            let sd = (var / n_fine as f64).sqrt();
            let mut steps = vec![[0.0f64; 3]; n_fine];
            let mut sum = [0.0; 3];
            for st in steps.iter_mut() {
                for k in 0..3 {
                    let z: f64 = rng.sample(StandardNormal);
                    st[k] = sd * z;
                    sum[k] += st[k];
                }
            }
            let mut cur = a;
            let mut hit = false;
            for st in &steps {
                let mut next = cur;
                for k in 0..3 {
                    next[k] += st[k] + (b[k] - a[k] - sum[k]) / n_fine as f64;
                }
                if straddles(cur[2], next[2]) {
                    let f = cur[2] / (cur[2] - next[2]);
                    hit |= disk.contains([cur[0] + f * (next[0] - cur[0]), cur[1] + f * (next[1] - cur[1])]);
                }
                cur = next;
            }
            hits += hit as usize;
        }
        let brute = hits as f64 / trials as f64;
        let refined = refined_hit_rate(a, b, var, &disk, trials);
        let sd = (brute * (1.0 - brute) * 2.0 / trials as f64).sqrt();
        // the fine grid still misses a little, so allow its own resolution on top of the noise
        assert!((brute - refined).abs() < 3.0 * sd + 0.01, "{brute} vs {refined}");
        assert!(refined > 0.05 && refined < 0.95);
    }

    #[test]
    fn mutual_estimate_dominance_and_determinism() {
        let (a, b) = two_disk_regions(4.0).unwrap();
        let p = small_params(7);
        let e1 = estimate_mutual(&a, &b, &p).unwrap();
        let e2 = estimate_mutual(&a, &b, &p).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(e1.dominance_violations, 0);
        assert!(e1.dirichlet.mean > 0.0 && e1.dirichlet.stderr > 0.0);
        assert!(e1.dirichlet.mean >= e1.neumann.mean && e1.neumann.mean >= 0.0);
        for s in &e1.strata {
            assert!(s.values[0] >= s.values[1]);
        }
        assert_eq!(e1.dirichlet.n_samples, p.total_placements());
        let e3 = estimate_mutual(&a, &b, &small_params(8)).unwrap();
        assert_ne!(e1.dirichlet.mean, e3.dirichlet.mean);
    }

    #[test]
    fn distant_small_disks_suppress_neumann() {
        let a = PlanarRegion::disk([0.0, 0.0], 0.5).unwrap();
        let b = PlanarRegion::disk([6.0, 0.0], 0.5).unwrap();
        let p = SamplingParams { loops_per_stratum: 128, placements_per_loop: 64, ..small_params(1) };
        let e = estimate_mutual(&a, &b, &p).unwrap();
        assert!(e.dirichlet.mean > 3.0 * e.dirichlet.stderr, "{:?}", e.dirichlet);
        assert!(e.neumann.mean <= 3.0 * e.neumann.stderr + 1e-300);
    }

    #[test]
    fn tripartite_signs_and_suite() {
        let a = PlanarRegion::disk([-3.0, 0.0], 1.0).unwrap();
        let b = PlanarRegion::disk([0.0, 0.0], 1.0).unwrap();
        let c = PlanarRegion::disk([3.0, 0.0], 1.0).unwrap();
        let p = SamplingParams { loops_per_stratum: 64, placements_per_loop: 32, ..small_params(2) };
        let t = estimate_tripartite(&a, &b, &c, &p).unwrap();
        assert!(t.neumann.mean <= 0.0);
        assert!(t.neumann.mean.abs() <= t.dirichlet.mean);
        assert!(t.dirichlet.mean > 0.0);
        let rep = inequality_suite(&a, &c, &b, &p).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.checks);
        assert!(rep.i2_abc >= 0.0 && rep.i2_abc <= rep.i2_ab);
        let far = PlanarRegion::disk([1e3, 0.0], 1e-3).unwrap();
        let rep = inequality_suite(&a, &c, &far, &p).unwrap();
        assert!(rep.all_passed());
        assert_eq!(rep.i2_abc, 0.0);
        let overlapping = PlanarRegion::disk([0.5, 0.0], 1.0).unwrap();
        assert!(matches!(inequality_suite(&a, &b, &overlapping, &p), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn sampling_errors() {
        let (a, b) = two_disk_regions(4.0).unwrap();
        let p = SamplingParams { stderr_cap: Some(1e-9), ..small_params(3) };
        assert!(matches!(estimate_mutual(&a, &b, &p), Err(Error::InsufficientStatistics { .. })));
        let p = SamplingParams { n_points: 100, ..small_params(3) };
        assert!(matches!(estimate_mutual(&a, &b, &p), Err(Error::InvalidParameter(_))));
        // two parallel half-planes give an unbounded placement set
        let h1 = PlanarRegion::half_plane(1.0, [1.0, 0.0]).unwrap();
        let h2 = PlanarRegion::half_plane(1.0, [-1.0, 0.0]).unwrap();
        assert!(matches!(estimate_mutual(&h1, &h2, &small_params(0)), Err(Error::InvalidGeometry(_))));
        assert!(two_disk_regions(2.0).is_err());
    }

    #[test]
    fn disk_and_half_plane_are_supported() {
        let d = PlanarRegion::disk([0.0, 0.0], 1.0).unwrap();
        let h = PlanarRegion::half_plane(3.0, [1.0, 0.0]).unwrap();
        let e = estimate_mutual(&d, &h, &small_params(4)).unwrap();
        assert!(e.dirichlet.mean > 0.0 && e.dominance_violations == 0);
    }

    #[test]
    fn theoretical_prefactor_value() {
        assert!((theoretical_prefactor() - 0.011_224_0).abs() < 1e-6);
        let est = MCEstimate { mean: 2.0, stderr: 0.1, n_samples: 10, seed: 0 };
        assert_eq!(calibration_factor(1.0, &est).unwrap(), 0.5);
    }
}
