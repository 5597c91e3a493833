//! Ego-relative patch observation.
//!
//! The ego's driving path ahead is partitioned into 50 one-meter patches.
//! Each patch carries the time until other traffic occupies it (tto), until
//! the occupant clears it (ttv), the time until the next occupancy after the
//! current union of vehicles (tto_next), the ego's own arrival time (tto_ego)
//! and a bit marking the first patch of a crossing conflict. All times are
//! clamped to 10 s and normalized to [0, 1]. The encoding depends only on
//! arc-length quantities, so it is invariant under rigid transforms of the
//! world and independent of the road layout.

use crate::constants::{N_PATCHES, PATCH_LEN, T_MAX, UNION_MARGIN};
use crate::geometry::{ConflictRegion, RegionKind};

/// One patch of the observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub tto: f64,
    pub ttv: f64,
    pub tto_next: f64,
    pub tto_ego: f64,
    pub i_int: bool,
}

impl Patch {
    fn empty() -> Self {
        Self { tto: 1.0, ttv: 1.0, tto_next: 1.0, tto_ego: 1.0, i_int: false }
    }
}

/// Fixed-size observation frame: 50 patches starting at the ego front.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub patches: [Patch; N_PATCHES],
}

/// A vehicle reduced to its longitudinal state on some path.
#[derive(Debug, Clone, Copy)]
pub struct LongitudinalVehicle {
    pub s_front: f64,
    pub v: f64,
    pub length: f64,
}

/// Worst-case stand-in for an occluded lane interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomVehicle {
    pub path_id: usize,
    pub s_front: f64,
    pub v: f64,
    pub length: f64,
}

/// Everything the encoder needs about one conflicting path: its conflict
/// regions with the ego route and the (visible) vehicles driving on it.
#[derive(Debug, Clone)]
pub struct PathView {
    pub regions: Vec<ConflictRegion>,
    pub vehicles: Vec<LongitudinalVehicle>,
}

/// Time until a vehicle front reaches a boundary `s_start` meters ahead.
/// Infinite for a standing vehicle; clamped downstream.
pub fn compute_tto(s_start: f64, v: f64) -> f64 {
    assert!(s_start >= 0.0, "s_start must be non-negative");
    if s_start == 0.0 {
        // Already occupying, whatever the speed.
        0.0
    } else if v <= 0.0 {
        f64::INFINITY
    } else {
        s_start / v
    }
}

/// Time until a vehicle rear clears a boundary `s_end` meters ahead of the
/// front (the vehicle length is already folded into `s_end`).
pub fn compute_ttv(s_end: f64, v: f64) -> f64 {
    if v <= 0.0 {
        f64::INFINITY
    } else {
        s_end / v
    }
}

/// Clamp to `T_MAX` and normalize into [0, 1].
pub fn normalize_time(t: f64) -> f64 {
    t.min(T_MAX) / T_MAX
}

/// An occupancy union after merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyUnion {
    pub tto: f64,
    pub ttv: f64,
    pub tto_next: f64,
}

/// Merge consecutive occupancies whose time gap is below `gap_threshold`.
/// Input must be sorted by tto. Each union's `tto_next` is the tto of the
/// first occupancy after it (infinite when none follows).
pub fn merge_unions(occupancies: &[(f64, f64)], gap_threshold: f64) -> Vec<OccupancyUnion> {
    debug_assert!(occupancies.windows(2).all(|w| w[0].0 <= w[1].0), "input must be sorted");
    let mut unions: Vec<(f64, f64)> = Vec::new();
    for &(tto, ttv) in occupancies {
        match unions.last_mut() {
            Some(last) if tto - last.1 < gap_threshold => last.1 = last.1.max(ttv),
            _ => unions.push((tto, ttv)),
        }
    }
    (0..unions.len())
        .map(|i| OccupancyUnion {
            tto: unions[i].0,
            ttv: unions[i].1,
            tto_next: unions.get(i + 1).map_or(f64::INFINITY, |u| u.0),
        })
        .collect()
}

/// Gap below which two vehicles cannot be passed between: the time the gap
/// needs to fit the ego plus clearance at the current ego speed.
pub fn union_gap_threshold(ego_length: f64, ego_v: f64) -> f64 {
    (ego_length + 2.0 * UNION_MARGIN) / ego_v.max(1.0)
}

/// One phantom per maximal occluded interval on a lane: front at the
/// downstream end, length equal to the interval, driving at the speed limit.
pub fn phantoms_from_occlusion(
    path_id: usize,
    occluded_intervals: &[(f64, f64)],
    speed_limit: f64,
) -> Vec<PhantomVehicle> {
    occluded_intervals
        .iter()
        .filter(|(a, b)| b > a)
        .map(|&(a, b)| PhantomVehicle {
            path_id,
            s_front: b,
            v: speed_limit,
            length: b - a,
        })
        .collect()
}

/// Is a real vehicle hidden by an occluded interval? The whole footprint must
/// lie inside one interval; partially visible vehicles stay visible.
pub fn is_hidden(rear: f64, front: f64, occluded: &[(f64, f64)]) -> bool {
    occluded.iter().any(|&(a, b)| rear >= a && front <= b)
}

/// Build the observation frame.
///
/// Crossing conflicts write the earliest occupancy union onto the region's
/// first patch only; same-path corridors write per-patch occupancy for every
/// patch a vehicle covers or will cover inside the shared interval.
pub fn encode(
    views: &[PathView],
    ego_front: f64,
    ego_v: f64,
    ego_length: f64,
    route_len: f64,
    include_ibit: bool,
) -> Frame {
    let mut patches = [Patch::empty(); N_PATCHES];
    let threshold = union_gap_threshold(ego_length, ego_v);

    // tto_ego: constant-velocity arrival at each patch start.
    for (k, patch) in patches.iter_mut().enumerate() {
        patch.tto_ego = if ego_v <= 0.0 {
            1.0
        } else {
            normalize_time(k as f64 * PATCH_LEN / ego_v)
        };
    }

    // Per-patch same-path occupancies are gathered across all views before
    // merging, so vehicles on different merging paths form unions too.
    let mut same_path: Vec<Vec<(f64, f64)>> = vec![Vec::new(); N_PATCHES];
    // Candidate (tto, ttv, tto_next) per patch from crossing regions.
    let mut crossing: Vec<Option<OccupancyUnion>> = vec![None; N_PATCHES];

    for view in views {
        for region in &view.regions {
            match region.kind {
                RegionKind::Crossing => {
                    let first = region.ego_interval.0 - ego_front;
                    let idx = (first / PATCH_LEN).floor();
                    if idx < 0.0 || idx >= N_PATCHES as f64 {
                        continue;
                    }
                    let idx = idx as usize;
                    if include_ibit {
                        patches[idx].i_int = true;
                    }
                    let mut occ: Vec<(f64, f64)> = Vec::new();
                    for veh in &view.vehicles {
                        let rear = veh.s_front - veh.length;
                        if rear >= region.other_interval.1 {
                            continue; // already cleared the region
                        }
                        if veh.v <= 0.0 && veh.s_front <= region.other_interval.0 {
                            continue; // stopped short of the region
                        }
                        let s_start = (region.other_interval.0 - veh.s_front).max(0.0);
                        let s_end = region.other_interval.1 + veh.length - veh.s_front;
                        occ.push((compute_tto(s_start, veh.v), compute_ttv(s_end, veh.v)));
                    }
                    occ.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    if let Some(first_union) = merge_unions(&occ, threshold).first() {
                        let better = crossing[idx].map_or(true, |c| first_union.tto < c.tto);
                        if better {
                            crossing[idx] = Some(*first_union);
                        }
                    }
                }
                RegionKind::SamePath => {
                    for veh in &view.vehicles {
                        // Map onto ego arc coordinates via the region offset.
                        let mapped_front = region.ego_interval.0
                            + (veh.s_front - region.other_interval.0);
                        let mapped_rear = mapped_front - veh.length;
                        // Only vehicles ahead of the ego, or vehicles that
                        // enter the shared corridor ahead of the ego (merge).
                        if mapped_rear <= ego_front && region.ego_interval.0 <= ego_front {
                            continue;
                        }
                        for (k, occ) in same_path.iter_mut().enumerate() {
                            let p_a = ego_front + k as f64 * PATCH_LEN;
                            let p_b = p_a + PATCH_LEN;
                            // Patch must intersect the shared corridor.
                            if p_b <= region.ego_interval.0 || p_a >= region.ego_interval.1 {
                                continue;
                            }
                            if mapped_rear >= p_b {
                                continue; // already past this patch
                            }
                            // A standing vehicle that has not entered the
                            // patch never will.
                            if veh.v <= 0.0 && mapped_front <= p_a {
                                continue;
                            }
                            let s_start = (p_a - mapped_front).max(0.0);
                            let s_end = p_b - mapped_rear;
                            occ.push((compute_tto(s_start, veh.v), compute_ttv(s_end, veh.v)));
                        }
                    }
                }
            }
        }
    }

    for (k, patch) in patches.iter_mut().enumerate() {
        let mut best: Option<OccupancyUnion> = crossing[k];
        let mut occ = std::mem::take(&mut same_path[k]);
        if !occ.is_empty() {
            occ.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if let Some(u) = merge_unions(&occ, threshold).first() {
                if best.map_or(true, |b| u.tto < b.tto) {
                    best = Some(*u);
                }
            }
        }
        if let Some(u) = best {
            patch.tto = normalize_time(u.tto);
            patch.ttv = normalize_time(u.ttv);
            patch.tto_next = normalize_time(u.tto_next);
        }
    }

    // Patches beyond the route end are reported empty.
    for (k, patch) in patches.iter_mut().enumerate() {
        if ego_front + k as f64 * PATCH_LEN >= route_len {
            *patch = Patch::empty();
        }
    }

    Frame { patches }
}

/// Patch-major flat layout: [tto, ttv, tto_next, tto_ego (, i_int)] x 50.
pub fn flatten(frame: &Frame, include_ibit: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(frame.patches.len() * if include_ibit { 5 } else { 4 });
    for p in &frame.patches {
        out.push(p.tto);
        out.push(p.ttv);
        out.push(p.tto_next);
        out.push(p.tto_ego);
        if include_ibit {
            out.push(if p.i_int { 1.0 } else { 0.0 });
        }
    }
    out
}

/// Inverse of [`flatten`] on valid frames.
pub fn unflatten(obs: &[f64], include_ibit: bool) -> Frame {
    let stride = if include_ibit { 5 } else { 4 };
    assert_eq!(obs.len(), N_PATCHES * stride);
    let mut patches = [Patch::empty(); N_PATCHES];
    for (k, patch) in patches.iter_mut().enumerate() {
        let o = &obs[k * stride..];
        *patch = Patch {
            tto: o[0],
            ttv: o[1],
            tto_next: o[2],
            tto_ego: o[3],
            i_int: include_ibit && o[4] != 0.0,
        };
    }
    Frame { patches }
}

/// Observation width for a given flag combination.
pub fn observation_len(include_ibit: bool) -> usize {
    N_PATCHES * if include_ibit { 5 } else { 4 }
}
