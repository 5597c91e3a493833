//! Arc-length path parameterization, corridor conflict detection and
//! line-of-sight occlusion shadows.
//!
//! All distances are meters, headings are radians. Conflict detection samples
//! the centerlines on a fixed arc-length grid, so interval endpoints are exact
//! multiples of the cell size; this keeps downstream observations invariant
//! under rigid transforms of the world geometry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{
    CONFLICT_CELL, SAME_PATH_MAX_HEADING, SAME_PATH_MIN_OVERLAP,
};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("polyline needs at least 2 vertices with distinct consecutive points")]
    DegeneratePolyline,
    #[error("arc position {0} outside [0, {1}]")]
    OutOfDomain(f64, f64),
    #[error("occluder polygon must be convex with at least 3 vertices and non-zero area")]
    BadOccluder,
}

/// 2D point / vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        self.sub(o).norm()
    }

    /// Rotate counterclockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Arc-length parameterized 2D centerline with a corridor width.
#[derive(Debug, Clone)]
pub struct PolylinePath {
    vertices: Vec<Vec2>,
    cum_length: Vec<f64>,
    width: f64,
}

impl PolylinePath {
    pub fn new(vertices: Vec<Vec2>, width: f64) -> Result<Self, GeometryError> {
        if vertices.len() < 2 || width <= 0.0 {
            return Err(GeometryError::DegeneratePolyline);
        }
        let mut cum_length = Vec::with_capacity(vertices.len());
        cum_length.push(0.0);
        for w in vertices.windows(2) {
            let d = w[0].dist(w[1]);
            if d <= 0.0 {
                return Err(GeometryError::DegeneratePolyline);
            }
            cum_length.push(cum_length.last().unwrap() + d);
        }
        Ok(Self { vertices, cum_length, width })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn total_length(&self) -> f64 {
        *self.cum_length.last().unwrap()
    }

    /// Index of the segment containing arc position `s` (clamped to the ends).
    fn segment_index(&self, s: f64) -> usize {
        match self
            .cum_length
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.vertices.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.vertices.len() - 2),
        }
    }

    /// Position and heading at arc position `s`.
    pub fn pose_at(&self, s: f64) -> Result<(Vec2, f64), GeometryError> {
        let len = self.total_length();
        if !(0.0..=len).contains(&s) {
            return Err(GeometryError::OutOfDomain(s, len));
        }
        Ok(self.pose_unchecked(s))
    }

    /// Like [`pose_at`](Self::pose_at), but extrapolates linearly beyond the
    /// ends. Used for vehicle footprints while a vehicle enters or exits.
    pub fn pose_extrapolated(&self, s: f64) -> (Vec2, f64) {
        self.pose_unchecked(s)
    }

    fn pose_unchecked(&self, s: f64) -> (Vec2, f64) {
        // Out-of-domain s extrapolates along the end segments.
        let i = self.segment_index(s.clamp(0.0, self.total_length()));
        let a = self.vertices[i];
        let b = self.vertices[i + 1];
        let d = b.sub(a);
        let seg_len = d.norm();
        let t = (s - self.cum_length[i]) / seg_len;
        let pos = a.add(d.scale(t));
        (pos, d.y.atan2(d.x))
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        self.pose_unchecked(s).0
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        self.pose_unchecked(s).1
    }

    /// Unit normal (left of the direction of travel) at `s`.
    pub fn normal_at(&self, s: f64) -> Vec2 {
        let h = self.heading_at(s);
        Vec2::new(-h.sin(), h.cos())
    }

    /// Nearest point on the centerline: returns (arc position, distance).
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for i in 0..self.vertices.len() - 1 {
            let a = self.vertices[i];
            let b = self.vertices[i + 1];
            let ab = b.sub(a);
            let t = (p.sub(a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            let q = a.add(ab.scale(t));
            let d = p.dist(q);
            if d < best.1 {
                best = (self.cum_length[i] + ab.norm() * t, d);
            }
        }
        best
    }

    /// Distance from `p` to the centerline.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.project(p).1
    }

    /// Copy of this path under a rigid transform (rotation then translation).
    pub fn transformed(&self, angle: f64, translation: Vec2) -> PolylinePath {
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.rotated(angle).add(translation))
            .collect();
        PolylinePath::new(vertices, self.width).unwrap()
    }
}

/// How two corridors overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// The paths cross at an angle; the overlap is traversed once.
    Crossing,
    /// The paths share a corridor (car following, merge).
    SamePath,
}

/// A maximal overlap of two width-inflated corridors, with matched arc
/// intervals on both paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictRegion {
    /// [s_a, s_b] on the ego path.
    pub ego_interval: (f64, f64),
    /// [u_a, u_b] on the other path.
    pub other_interval: (f64, f64),
    pub kind: RegionKind,
}

/// Convex occluder blocking the line of sight.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct OccluderPolygon {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<Vec2>> for OccluderPolygon {
    type Error = GeometryError;
    fn try_from(v: Vec<Vec2>) -> Result<Self, Self::Error> {
        OccluderPolygon::new(v)
    }
}

impl From<OccluderPolygon> for Vec<Vec2> {
    fn from(p: OccluderPolygon) -> Self {
        p.vertices
    }
}

impl OccluderPolygon {
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::BadOccluder);
        }
        let n = vertices.len();
        let area: f64 = (0..n)
            .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
            .sum::<f64>()
            / 2.0;
        if area.abs() < 1e-9 {
            return Err(GeometryError::BadOccluder);
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if b.sub(a).cross(c.sub(b)) < -1e-12 {
                return Err(GeometryError::BadOccluder);
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            b.sub(a).cross(p.sub(a)) >= 0.0
        })
    }

    /// Does the segment p..q touch this polygon?
    pub fn intersects_segment(&self, p: Vec2, q: Vec2) -> bool {
        if self.contains(p) || self.contains(q) {
            return true;
        }
        let n = self.vertices.len();
        (0..n).any(|i| {
            segments_intersect(p, q, self.vertices[i], self.vertices[(i + 1) % n])
        })
    }

    pub fn transformed(&self, angle: f64, translation: Vec2) -> OccluderPolygon {
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.rotated(angle).add(translation))
            .collect();
        OccluderPolygon::new(vertices).unwrap()
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

/// Segment intersection, touching counts.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Vec2, b: Vec2, c: Vec2, d: f64| {
        d == 0.0
            && c.x >= a.x.min(b.x)
            && c.x <= a.x.max(b.x)
            && c.y >= a.y.min(b.y)
            && c.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// All maximal corridor overlaps between `ego` and `other`, sorted by the
/// ego-side interval start.
///
/// The centerline of each path is sampled on a fixed arc grid; a sample is
/// part of the overlap when it lies inside the other corridor. Interval
/// endpoints therefore land on grid multiples of the cell size.
pub fn conflict_regions(ego: &PolylinePath, other: &PolylinePath) -> Vec<ConflictRegion> {
    let ego_clusters = overlap_clusters(ego, other);
    let other_clusters = overlap_clusters(other, ego);
    let mut regions = Vec::new();
    for ec in &ego_clusters {
        // Pair with the other-side cluster whose 2D midpoint is closest.
        let e_mid = ego.point_at(0.5 * (ec.0 + ec.1));
        let best = other_clusters
            .iter()
            .map(|oc| {
                let o_mid = other.point_at(0.5 * (oc.0 + oc.1));
                (e_mid.dist(o_mid), oc)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let oc = match best {
            Some((d, oc)) if d <= (ego.width() + other.width()) / 2.0 + 5.0 => oc,
            _ => continue,
        };
        let kind = classify(ego, other, ec);
        regions.push(ConflictRegion {
            ego_interval: (ec.0, ec.1),
            other_interval: (oc.0, oc.1),
            kind,
        });
    }
    regions.sort_by(|a, b| a.ego_interval.0.partial_cmp(&b.ego_interval.0).unwrap());
    regions
}

/// Maximal runs of grid samples on `a` lying inside the corridor of `b`.
/// Runs separated by less than 0.5 m are merged.
fn overlap_clusters(a: &PolylinePath, b: &PolylinePath) -> Vec<(f64, f64)> {
    let step = CONFLICT_CELL;
    // Slack absorbs the sub-nanometer error a rigid transform introduces when
    // a sample lands exactly on the corridor boundary, keeping the marking
    // decision (and hence all intervals) bit-stable under such transforms.
    let half = b.width() / 2.0 + 1e-9;
    let n = (a.total_length() / step).floor() as usize;
    let merge_gap = (0.5 / step) as usize;
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for k in 0..=n {
        let s = k as f64 * step;
        if b.distance_to(a.point_at(s)) <= half {
            match clusters.last_mut() {
                Some(last) if k - last.1 <= merge_gap => last.1 = k,
                _ => clusters.push((k, k)),
            }
        }
    }
    clusters
        .into_iter()
        .map(|(i, j)| (i as f64 * step, j as f64 * step))
        .collect()
}

fn classify(ego: &PolylinePath, other: &PolylinePath, interval: &(f64, f64)) -> RegionKind {
    if interval.1 - interval.0 < SAME_PATH_MIN_OVERLAP {
        return RegionKind::Crossing;
    }
    let step = CONFLICT_CELL * 10.0;
    let mut diffs: Vec<f64> = Vec::new();
    let mut s = interval.0;
    while s <= interval.1 {
        let p = ego.point_at(s);
        let (u, _) = other.project(p);
        let d = angle_diff(ego.heading_at(s), other.heading_at(u));
        diffs.push(d);
        s += step;
    }
    diffs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median = diffs[diffs.len() / 2];
    if median < SAME_PATH_MAX_HEADING {
        RegionKind::SamePath
    } else {
        RegionKind::Crossing
    }
}

/// Absolute heading difference wrapped to [0, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d = 2.0 * std::f64::consts::PI - d;
    }
    d
}

/// Occluded arc intervals on `lane`, as seen from `ego_pos`.
///
/// A lane position is occluded when the sight line from `ego_pos` crosses any
/// occluder. The lane is sampled at `sample_step`; runs of occluded samples
/// are merged and the endpoints are pushed outward by one step (conservative).
pub fn visibility_shadow(
    ego_pos: Vec2,
    occluders: &[OccluderPolygon],
    lane: &PolylinePath,
    sample_step: f64,
) -> Vec<(f64, f64)> {
    assert!(sample_step > 0.0, "sample_step must be positive");
    if occluders.is_empty() {
        return Vec::new();
    }
    let len = lane.total_length();
    let n = (len / sample_step).floor() as usize;
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    for k in 0..=n {
        let s = k as f64 * sample_step;
        let p = lane.point_at(s);
        let occluded = occluders.iter().any(|o| o.intersects_segment(ego_pos, p));
        if occluded {
            match intervals.last_mut() {
                Some(last) if k == last.1 + 1 => last.1 = k,
                _ => intervals.push((k, k)),
            }
        }
    }
    intervals
        .into_iter()
        .map(|(i, j)| {
            let lo = (i as f64 - 1.0).max(0.0) * sample_step;
            let hi = ((j as f64 + 1.0) * sample_step).min(len);
            (lo, hi)
        })
        .collect()
}

/// Oriented rectangle footprint used for collision checks.
#[derive(Debug, Clone, Copy)]
pub struct Obb {
    pub center: Vec2,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl Obb {
    fn axes(&self) -> [Vec2; 2] {
        let (s, c) = self.heading.sin_cos();
        [Vec2::new(c, s), Vec2::new(-s, c)]
    }

    fn corners(&self) -> [Vec2; 4] {
        let [fwd, left] = self.axes();
        let f = fwd.scale(self.length / 2.0);
        let l = left.scale(self.width / 2.0);
        [
            self.center.add(f).add(l),
            self.center.add(f).sub(l),
            self.center.sub(f).sub(l),
            self.center.sub(f).add(l),
        ]
    }

    /// Separating-axis overlap test.
    pub fn overlaps(&self, other: &Obb) -> bool {
        let ca = self.corners();
        let cb = other.corners();
        for axis in self.axes().into_iter().chain(other.axes()) {
            let proj = |cs: &[Vec2; 4]| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for c in cs {
                    let v = c.dot(axis);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (lo, hi)
            };
            let (alo, ahi) = proj(&ca);
            let (blo, bhi) = proj(&cb);
            if ahi < blo || bhi < alo {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn straight(a: (f64, f64), b: (f64, f64), w: f64) -> PolylinePath {
        PolylinePath::new(vec![Vec2::new(a.0, a.1), Vec2::new(b.0, b.1)], w).unwrap()
    }

    #[test]
    fn pose_on_straight_path() {
        let p = straight((0.0, 0.0), (100.0, 0.0), 2.0);
        let (pos, h) = p.pose_at(50.0).unwrap();
        assert_abs_diff_eq!(pos.x, 50.0);
        assert_abs_diff_eq!(pos.y, 0.0);
        assert_abs_diff_eq!(h, 0.0);
    }

    #[test]
    fn pose_at_start_is_first_vertex() {
        let p = straight((3.0, 4.0), (10.0, 4.0), 2.0);
        let (pos, _) = p.pose_at(0.0).unwrap();
        assert_eq!(pos, Vec2::new(3.0, 4.0));
    }

    #[test]
    fn pose_on_l_shaped_path() {
        let p = PolylinePath::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0), Vec2::new(10.0, 10.0)],
            2.0,
        )
        .unwrap();
        let (pos, h) = p.pose_at(15.0).unwrap();
        assert_abs_diff_eq!(pos.x, 10.0);
        assert_abs_diff_eq!(pos.y, 5.0);
        assert_abs_diff_eq!(h, std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn pose_outside_domain_errors() {
        let p = straight((0.0, 0.0), (10.0, 0.0), 2.0);
        assert!(p.pose_at(-1.0).is_err());
        assert!(p.pose_at(10.5).is_err());
    }

    #[test]
    fn degenerate_polyline_rejected() {
        assert!(PolylinePath::new(vec![Vec2::new(0.0, 0.0)], 2.0).is_err());
        assert!(PolylinePath::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0)],
            2.0
        )
        .is_err());
    }

    /// Test-only oracle: rasterize both corridors into cells and extract the
    /// overlap extents by projecting overlap cell centers onto each path.
    fn raster_oracle(
        a: &PolylinePath,
        b: &PolylinePath,
    ) -> Option<((f64, f64), (f64, f64))> {
        use std::collections::HashSet;
        let cell = CONFLICT_CELL;
        let cells_of = |p: &PolylinePath| {
            let mut set = HashSet::new();
            let n = (p.total_length() / cell) as usize;
            let m = (p.width() / 2.0 / cell) as i64;
            for k in 0..=n {
                let s = k as f64 * cell;
                let pos = p.point_at(s);
                let nrm = p.normal_at(s);
                for l in -m..=m {
                    let q = pos.add(nrm.scale(l as f64 * cell));
                    set.insert(((q.x / cell).floor() as i64, (q.y / cell).floor() as i64));
                }
            }
            set
        };
        let ca = cells_of(a);
        let cb = cells_of(b);
        let mut sa = f64::INFINITY;
        let mut sb = f64::NEG_INFINITY;
        let mut ua = f64::INFINITY;
        let mut ub = f64::NEG_INFINITY;
        let mut any = false;
        for c in ca.intersection(&cb) {
            any = true;
            let p = Vec2::new((c.0 as f64 + 0.5) * cell, (c.1 as f64 + 0.5) * cell);
            let (s, _) = a.project(p);
            let (u, _) = b.project(p);
            sa = sa.min(s);
            sb = sb.max(s);
            ua = ua.min(u);
            ub = ub.max(u);
        }
        any.then_some(((sa, sb), (ua, ub)))
    }

    #[test]
    fn perpendicular_corridors_cross_with_width_sized_intervals() {
        let ego = straight((0.0, 0.0), (160.0, 0.0), 2.0);
        let other = straight((100.0, -60.0), (100.0, 60.0), 2.0);
        let regions = conflict_regions(&ego, &other);
        assert_eq!(regions.len(), 1);
        let r = &regions[0];
        assert_eq!(r.kind, RegionKind::Crossing);
        assert_abs_diff_eq!(r.ego_interval.0, 99.0, epsilon = 0.06);
        assert_abs_diff_eq!(r.ego_interval.1, 101.0, epsilon = 0.06);
        assert_abs_diff_eq!(r.other_interval.0, 59.0, epsilon = 0.06);
        assert_abs_diff_eq!(r.other_interval.1, 61.0, epsilon = 0.06);
        // Interval length equals the other corridor width within one cell.
        let ((osa, osb), (oua, oub)) = raster_oracle(&ego, &other).unwrap();
        assert_abs_diff_eq!(r.ego_interval.0, osa, epsilon = 2.0 * CONFLICT_CELL);
        assert_abs_diff_eq!(r.ego_interval.1, osb, epsilon = 2.0 * CONFLICT_CELL);
        assert_abs_diff_eq!(r.other_interval.0, oua, epsilon = 2.0 * CONFLICT_CELL);
        assert_abs_diff_eq!(r.other_interval.1, oub, epsilon = 2.0 * CONFLICT_CELL);
    }

    #[test]
    fn parallel_distant_corridors_are_disjoint() {
        let a = straight((0.0, 0.0), (100.0, 0.0), 2.0);
        let b = straight((0.0, 10.0), (100.0, 10.0), 2.0);
        assert!(conflict_regions(&a, &b).is_empty());
    }

    #[test]
    fn identical_paths_share_full_domain() {
        let a = straight((0.0, 0.0), (100.0, 0.0), 2.0);
        let b = straight((0.0, 0.0), (100.0, 0.0), 2.0);
        let regions = conflict_regions(&a, &b);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].kind, RegionKind::SamePath);
        assert_abs_diff_eq!(regions[0].ego_interval.0, 0.0, epsilon = 0.06);
        assert_abs_diff_eq!(regions[0].ego_interval.1, 100.0, epsilon = 0.06);
    }

    #[test]
    fn conflict_regions_are_symmetric() {
        let a = straight((0.0, 0.0), (160.0, 0.0), 1.8);
        let b = straight((110.0, -80.0), (110.0, 40.0), 1.8);
        let ab = conflict_regions(&a, &b);
        let ba = conflict_regions(&b, &a);
        assert_eq!(ab.len(), ba.len());
        for (r1, r2) in ab.iter().zip(ba.iter()) {
            assert_eq!(r1.ego_interval, r2.other_interval);
            assert_eq!(r1.other_interval, r2.ego_interval);
            assert_eq!(r1.kind, r2.kind);
        }
    }

    #[test]
    fn rigid_transform_preserves_conflict_intervals() {
        let a = straight((0.0, 0.0), (160.0, 0.0), 1.8);
        let b = straight((110.0, -80.0), (110.0, 40.0), 1.8);
        let base = conflict_regions(&a, &b);
        for (angle, tx, ty) in [(0.7, 12.0, -5.0), (-2.1, 100.0, 33.0), (3.0, -7.5, 0.1)] {
            let t = Vec2::new(tx, ty);
            let moved = conflict_regions(&a.transformed(angle, t), &b.transformed(angle, t));
            assert_eq!(base.len(), moved.len());
            for (r1, r2) in base.iter().zip(moved.iter()) {
                assert_abs_diff_eq!(r1.ego_interval.0, r2.ego_interval.0, epsilon = 1e-9);
                assert_abs_diff_eq!(r1.ego_interval.1, r2.ego_interval.1, epsilon = 1e-9);
                assert_abs_diff_eq!(r1.other_interval.0, r2.other_interval.0, epsilon = 1e-9);
                assert_abs_diff_eq!(r1.other_interval.1, r2.other_interval.1, epsilon = 1e-9);
            }
        }
    }

    fn square(cx: f64, cy: f64, half: f64) -> OccluderPolygon {
        OccluderPolygon::new(vec![
            Vec2::new(cx - half, cy - half),
            Vec2::new(cx + half, cy - half),
            Vec2::new(cx + half, cy + half),
            Vec2::new(cx - half, cy + half),
        ])
        .unwrap()
    }

    #[test]
    fn no_occluders_no_shadow() {
        let lane = straight((0.0, 10.0), (100.0, 10.0), 2.0);
        assert!(visibility_shadow(Vec2::new(50.0, 0.0), &[], &lane, 0.5).is_empty());
    }

    #[test]
    fn occluder_between_ego_and_lane_casts_shadow() {
        let lane = straight((0.0, 10.0), (100.0, 10.0), 2.0);
        let ego = Vec2::new(50.0, 0.0);
        let occ = square(50.0, 5.0, 2.0);
        let step = 0.5;
        let shadow = visibility_shadow(ego, &[occ.clone()], &lane, step);
        assert_eq!(shadow.len(), 1);
        // Dense ray-cast oracle at 0.01 m.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut s = 0.0;
        while s <= lane.total_length() {
            if occ.intersects_segment(ego, lane.point_at(s)) {
                lo = lo.min(s);
                hi = hi.max(s);
            }
            s += 0.01;
        }
        assert!(shadow[0].0 <= lo && shadow[0].0 >= lo - 2.0 * step);
        assert!(shadow[0].1 >= hi && shadow[0].1 <= hi + 2.0 * step);
    }

    #[test]
    fn occluder_behind_ego_casts_no_shadow() {
        let lane = straight((0.0, 10.0), (100.0, 10.0), 2.0);
        let ego = Vec2::new(50.0, 0.0);
        let occ = square(50.0, -5.0, 2.0);
        assert!(visibility_shadow(ego, &[occ], &lane, 0.5).is_empty());
    }

    #[test]
    fn growing_occluder_never_shrinks_shadow() {
        let lane = straight((0.0, 12.0), (100.0, 12.0), 2.0);
        let ego = Vec2::new(30.0, 0.0);
        let small = square(45.0, 6.0, 1.5);
        let big = square(45.0, 6.0, 3.0);
        let cover = |sh: &[(f64, f64)], s: f64| sh.iter().any(|&(a, b)| a <= s && s <= b);
        let sh_small = visibility_shadow(ego, &[small], &lane, 0.5);
        let sh_big = visibility_shadow(ego, &[big], &lane, 0.5);
        let mut s = 0.0;
        while s <= lane.total_length() {
            if cover(&sh_small, s) {
                assert!(cover(&sh_big, s), "shadow lost at {s}");
            }
            s += 0.25;
        }
    }

    #[test]
    fn non_convex_occluder_rejected() {
        let res = OccluderPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 4.0),
        ]);
        assert!(res.is_err());
    }

    #[test]
    fn obb_overlap_basic() {
        let a = Obb { center: Vec2::new(0.0, 0.0), heading: 0.0, length: 5.0, width: 2.0 };
        let b = Obb { center: Vec2::new(4.0, 0.0), heading: 0.0, length: 5.0, width: 2.0 };
        let c = Obb { center: Vec2::new(10.0, 0.0), heading: 1.0, length: 5.0, width: 2.0 };
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
    }
}
