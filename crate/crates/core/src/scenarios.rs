//! Builtin scenario catalog: thirteen junction layouts covering car
//! following, straight and curved crossings, unprotected turns, merges and
//! multi-lane junctions.
//!
//! Builders are the source of truth; the JSON files under `data/` are
//! exported from them and checked for consistency in tests.

use crate::geometry::{OccluderPolygon, Vec2};
use crate::sim::{
    EgoRoute, FlowSpec, LeaderSpec, OccluderSide, OccluderSlot, PathSpec, Scenario, ScenarioError,
    ScenarioSpec,
};

/// 50 km/h as an exact rational.
pub const FLOW_FAST: f64 = 125.0 / 9.0;
/// 30 km/h.
pub const FLOW_SLOW: f64 = 25.0 / 3.0;

const EMIT_INITIAL: f64 = 0.10;
const EMIT_REDUCED: f64 = 0.05;
const REDUCTION_TIME: f64 = 30.0;

/// Junction center along the ego lane for the straight-road layouts.
const JX: f64 = 111.0;
const LANE_GAP: f64 = 3.5;
const PATH_WIDTH: f64 = 1.8;
/// Crossing lanes extend this far upstream of the junction so the pre-roll
/// can populate them.
const UPSTREAM: f64 = 150.0;
const DOWNSTREAM: f64 = 60.0;

pub struct ScenarioLibrary {
    specs: Vec<ScenarioSpec>,
}

impl ScenarioLibrary {
    pub fn builtin() -> Self {
        Self {
            specs: vec![
                sc01(),
                sc02(),
                sc03(),
                sc04(),
                sc05(),
                sc06(),
                sc07(),
                sc08(),
                sc09(),
                sc10(),
                sc11(),
                sc12(),
                sc13(),
            ],
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn spec(&self, name: &str) -> Option<&ScenarioSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn get(&self, name: &str) -> Result<Scenario, ScenarioError> {
        let spec = self
            .spec(name)
            .ok_or_else(|| ScenarioError::UnknownPath(name.to_string()))?;
        Scenario::from_spec(spec.clone())
    }
}

fn flow(path_id: &str, speed: f64) -> FlowSpec {
    FlowSpec {
        path_id: path_id.to_string(),
        emit_prob_initial: EMIT_INITIAL,
        emit_prob_reduced: EMIT_REDUCED,
        reduction_time: REDUCTION_TIME,
        flow_speed: speed,
    }
}

/// A flow with custom emission probabilities for lanes that should stay busy.
fn flow_at(path_id: &str, speed: f64, p_initial: f64, p_reduced: f64) -> FlowSpec {
    FlowSpec {
        path_id: path_id.to_string(),
        emit_prob_initial: p_initial,
        emit_prob_reduced: p_reduced,
        reduction_time: REDUCTION_TIME,
        flow_speed: speed,
    }
}

fn path(id: &str, vertices: Vec<[f64; 2]>) -> PathSpec {
    PathSpec { id: id.to_string(), vertices, width: PATH_WIDTH }
}

fn straight(id: &str, a: [f64; 2], b: [f64; 2]) -> PathSpec {
    path(id, vec![a, b])
}

/// Southbound lane crossing the ego road at `x`.
fn lane_south(id: &str, x: f64) -> PathSpec {
    straight(id, [x, UPSTREAM], [x, -DOWNSTREAM])
}

/// Northbound lane crossing the ego road at `x`.
fn lane_north(id: &str, x: f64) -> PathSpec {
    straight(id, [x, -UPSTREAM], [x, DOWNSTREAM])
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> OccluderPolygon {
    OccluderPolygon::new(vec![
        Vec2::new(x0, y0),
        Vec2::new(x1, y0),
        Vec2::new(x1, y1),
        Vec2::new(x0, y1),
    ])
    .expect("rectangle is convex")
}

fn slot(side: OccluderSide, x0: f64, y0: f64, x1: f64, y1: f64) -> OccluderSlot {
    OccluderSlot { side, polygon: rect(x0, y0, x1, y1) }
}

/// Corner buildings next to a straight-road junction at `jx`. Two candidate
/// footprints per side; one is drawn per side at reset.
fn corner_slots(jx: f64) -> Vec<OccluderSlot> {
    vec![
        slot(OccluderSide::Left, jx - 20.0, 3.5, jx - 8.0, 9.5),
        slot(OccluderSide::Left, jx - 26.0, 3.5, jx - 10.0, 7.5),
        slot(OccluderSide::Right, jx - 20.0, -9.5, jx - 8.0, -3.5),
        slot(OccluderSide::Right, jx - 26.0, -7.5, jx - 10.0, -3.5),
    ]
}

/// Buildings hugging the corner, leaving sight of the cross traffic only
/// close to the junction.
fn tight_corner_slots(jx: f64) -> Vec<OccluderSlot> {
    vec![
        slot(OccluderSide::Left, jx - 18.0, 2.5, jx - 2.0, 8.5),
        slot(OccluderSide::Left, jx - 30.0, 2.5, jx - 4.0, 6.5),
        slot(OccluderSide::Right, jx - 18.0, -8.5, jx - 2.0, -2.5),
        slot(OccluderSide::Right, jx - 30.0, -6.5, jx - 4.0, -2.5),
    ]
}

/// Quarter-circle polyline from angle `t0` to `t1` around `center`,
/// sampled finely enough that chord error is far below the conflict grid.
fn arc(center: [f64; 2], radius: f64, t0: f64, t1: f64, n: usize) -> Vec<[f64; 2]> {
    (0..=n)
        .map(|i| {
            let t = t0 + (t1 - t0) * i as f64 / n as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect()
}

fn ego_route(start_s: f64, goal_s: f64) -> EgoRoute {
    EgoRoute { path_id: "ego".to_string(), start_s, goal_s }
}

/// Car following behind a speed-varying leader; no junction.
fn sc01() -> ScenarioSpec {
    ScenarioSpec {
        name: "Sc01".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![straight("ego", [0.0, 0.0], [420.0, 0.0])],
        flows: vec![],
        ego_route: ego_route(10.0, 360.0),
        occluder_slots: vec![],
        leader: Some(LeaderSpec {
            spawn_gap: 40.0,
            speeds: vec![25.0 / 3.0, 100.0 / 9.0, 125.0 / 9.0],
            resample_period: 10.0,
        }),
    }
}

/// Two-lane crossing, one flow from each side.
fn sc02() -> ScenarioSpec {
    ScenarioSpec {
        name: "Sc02".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            straight("ego", [0.0, 0.0], [160.0, 0.0]),
            lane_south("south1", JX),
            lane_north("north1", JX + LANE_GAP),
        ],
        flows: vec![
            flow_at("south1", FLOW_FAST, 0.25, 0.16),
            flow_at("north1", FLOW_FAST, 0.25, 0.16),
        ],
        ego_route: ego_route(10.0, 135.0),
        occluder_slots: corner_slots(JX),
        leader: None,
    }
}

/// Ego approaches the junction through a left-hand 90 degree bend.
fn sc03() -> ScenarioSpec {
    let mut ego = vec![[0.0, 0.0]];
    ego.extend(arc([61.0, 50.0], 50.0, -std::f64::consts::FRAC_PI_2, 0.0, 90));
    ego.push([111.0, 90.0]);
    ScenarioSpec {
        name: "Sc03".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            path("ego", ego),
            straight("east1", [111.0 - UPSTREAM, 60.0], [111.0 + DOWNSTREAM, 60.0]),
            straight("east2", [111.0 - UPSTREAM, 63.5], [111.0 + DOWNSTREAM, 63.5]),
            straight("west1", [111.0 + UPSTREAM, 67.0], [111.0 - DOWNSTREAM, 67.0]),
            straight("west2", [111.0 + UPSTREAM, 70.5], [111.0 - DOWNSTREAM, 70.5]),
        ],
        flows: vec![
            flow("east1", FLOW_FAST),
            flow("east2", FLOW_FAST),
            flow("west1", FLOW_FAST),
            flow("west2", FLOW_FAST),
        ],
        ego_route: ego_route(10.0, 170.0),
        occluder_slots: vec![
            slot(OccluderSide::Left, 103.0, 44.0, 109.0, 54.0),
            slot(OccluderSide::Right, 113.0, 44.0, 119.0, 54.0),
        ],
        leader: None,
    }
}

/// Unprotected left turn across an oncoming lane.
fn sc04() -> ScenarioSpec {
    let mut ego = vec![[0.0, 0.0]];
    ego.extend(arc([109.0, 12.0], 12.0, -std::f64::consts::FRAC_PI_2, 0.0, 45));
    ego.push([121.0, 80.0]);
    ScenarioSpec {
        name: "Sc04".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            path("ego", ego),
            straight("oncoming1", [271.0, 3.5], [61.0, 3.5]),
            straight("oncoming2", [271.0, 7.0], [61.0, 7.0]),
        ],
        flows: vec![flow("oncoming1", FLOW_FAST), flow("oncoming2", FLOW_FAST)],
        ego_route: ego_route(10.0, 150.0),
        occluder_slots: vec![slot(OccluderSide::Right, 101.0, -9.5, 113.0, -3.5)],
        leader: None,
    }
}

/// 30 degree on-ramp merging onto the ego lane.
fn sc05() -> ScenarioSpec {
    let dx = UPSTREAM * (30.0f64.to_radians()).cos();
    let dy = UPSTREAM * (30.0f64.to_radians()).sin();
    ScenarioSpec {
        name: "Sc05".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            straight("ego", [0.0, 0.0], [160.0, 0.0]),
            path("ramp", vec![[JX - dx, dy], [JX, 0.0], [160.0, 0.0]]),
        ],
        flows: vec![flow("ramp", FLOW_FAST)],
        ego_route: ego_route(10.0, 135.0),
        occluder_slots: vec![],
        leader: None,
    }
}

/// Merge followed by a crossing lane further downstream.
fn sc06() -> ScenarioSpec {
    let dx = UPSTREAM * (30.0f64.to_radians()).cos();
    let dy = UPSTREAM * (30.0f64.to_radians()).sin();
    ScenarioSpec {
        name: "Sc06".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            straight("ego", [0.0, 0.0], [170.0, 0.0]),
            path("ramp", vec![[JX - dx, dy], [JX, 0.0], [170.0, 0.0]]),
            lane_south("south1", 150.0),
            lane_north("north1", 153.5),
        ],
        flows: vec![
            flow("ramp", FLOW_FAST),
            flow("south1", FLOW_FAST),
            flow("north1", FLOW_FAST),
        ],
        ego_route: ego_route(10.0, 158.0),
        occluder_slots: vec![
            slot(OccluderSide::Left, 132.0, 2.8, 146.0, 8.8),
            slot(OccluderSide::Right, 132.0, -8.8, 146.0, -2.8),
        ],
        leader: None,
    }
}

/// Six-lane bidirectional crossing.
fn sc07() -> ScenarioSpec {
    let mut paths = vec![straight("ego", [0.0, 0.0], [160.0, 0.0])];
    let mut flows = Vec::new();
    for i in 0..3 {
        let id = format!("south{}", i + 1);
        paths.push(lane_south(&id, JX + i as f64 * LANE_GAP));
        flows.push(flow(&id, FLOW_FAST));
    }
    for i in 0..3 {
        let id = format!("north{}", i + 1);
        paths.push(lane_north(&id, JX + (3 + i) as f64 * LANE_GAP));
        flows.push(flow(&id, FLOW_FAST));
    }
    ScenarioSpec {
        name: "Sc07".to_string(),
        speed_limit: FLOW_FAST,
        paths,
        flows,
        ego_route: ego_route(10.0, 140.0),
        occluder_slots: tight_corner_slots(JX),
        leader: None,
    }
}

/// Right-hand 90 degree bend into a crossing.
fn sc08() -> ScenarioSpec {
    let mut ego = vec![[0.0, 0.0]];
    ego.extend(arc([61.0, -50.0], 50.0, std::f64::consts::FRAC_PI_2, 0.0, 90));
    ego.push([111.0, -90.0]);
    ScenarioSpec {
        name: "Sc08".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            path("ego", ego),
            straight("east1", [111.0 - UPSTREAM, -60.0], [111.0 + DOWNSTREAM, -60.0]),
            straight("east2", [111.0 - UPSTREAM, -63.5], [111.0 + DOWNSTREAM, -63.5]),
            straight("west1", [111.0 + UPSTREAM, -67.0], [111.0 - DOWNSTREAM, -67.0]),
            straight("west2", [111.0 + UPSTREAM, -70.5], [111.0 - DOWNSTREAM, -70.5]),
        ],
        flows: vec![
            flow("east1", FLOW_FAST),
            flow("east2", FLOW_FAST),
            flow("west1", FLOW_FAST),
            flow("west2", FLOW_FAST),
        ],
        ego_route: ego_route(10.0, 170.0),
        occluder_slots: vec![
            slot(OccluderSide::Left, 113.0, -54.0, 119.0, -44.0),
            slot(OccluderSide::Right, 103.0, -54.0, 109.0, -44.0),
        ],
        leader: None,
    }
}

/// Two junctions in sequence: the six-lane crossing plus a second, smaller
/// one 60 m further on.
fn sc09() -> ScenarioSpec {
    let mut base = sc07();
    base.name = "Sc09".to_string();
    base.paths[0] = straight("ego", [0.0, 0.0], [220.0, 0.0]);
    let j2 = JX + 60.0;
    for i in 0..3 {
        let id = format!("south{}b", i + 1);
        base.paths.push(lane_south(&id, j2 + i as f64 * LANE_GAP));
        base.flows.push(flow(&id, FLOW_FAST));
    }
    for i in 0..3 {
        let id = format!("north{}b", i + 1);
        base.paths.push(lane_north(&id, j2 + (3 + i) as f64 * LANE_GAP));
        base.flows.push(flow(&id, FLOW_FAST));
    }
    base.occluder_slots.extend(corner_slots(j2).into_iter().take(2).map(|mut s| {
        // Second-junction slots sit between the two crossings.
        s.polygon = match s.side {
            OccluderSide::Left => rect(j2 - 20.0, 3.5, j2 - 11.0, 9.5),
            OccluderSide::Right => rect(j2 - 20.0, -9.5, j2 - 11.0, -3.5),
        };
        s
    }));
    base.ego_route = ego_route(10.0, 195.0);
    base
}

/// Car following at 30 km/h.
fn sc10() -> ScenarioSpec {
    let mut base = sc01();
    base.name = "Sc10".to_string();
    base.speed_limit = FLOW_SLOW;
    base.leader = Some(LeaderSpec {
        spawn_gap: 40.0,
        speeds: vec![50.0 / 9.0, 125.0 / 18.0, 25.0 / 3.0],
        resample_period: 10.0,
    });
    base
}

/// Slow-traffic merge.
fn sc11() -> ScenarioSpec {
    let mut base = sc05();
    base.name = "Sc11".to_string();
    base.speed_limit = FLOW_SLOW;
    for f in &mut base.flows {
        f.flow_speed = FLOW_SLOW;
    }
    base
}

/// Y junction: a 45 degree ramp merging at the junction and a parallel
/// 45 degree lane crossing further on.
fn sc12() -> ScenarioSpec {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let d = UPSTREAM * c;
    ScenarioSpec {
        name: "Sc12".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            straight("ego", [0.0, 0.0], [160.0, 0.0]),
            path("ramp", vec![[JX - d, d], [JX, 0.0], [160.0, 0.0]]),
            straight("cross1", [130.0 - d, d], [130.0 + DOWNSTREAM * c, -DOWNSTREAM * c]),
            straight(
                "cross2",
                [135.0 - d, d],
                [135.0 + DOWNSTREAM * c, -DOWNSTREAM * c],
            ),
        ],
        flows: vec![
            flow("ramp", FLOW_FAST),
            flow("cross1", FLOW_FAST),
            flow("cross2", FLOW_FAST),
        ],
        ego_route: ego_route(10.0, 140.0),
        occluder_slots: vec![
            slot(OccluderSide::Left, 112.0, 2.8, 121.0, 6.8),
            slot(OccluderSide::Right, 110.0, -9.5, 122.0, -3.5),
        ],
        leader: None,
    }
}

/// Asymmetric crossing: two lanes from the left, one from the right.
fn sc13() -> ScenarioSpec {
    ScenarioSpec {
        name: "Sc13".to_string(),
        speed_limit: FLOW_FAST,
        paths: vec![
            straight("ego", [0.0, 0.0], [160.0, 0.0]),
            lane_south("south1", JX),
            lane_south("south2", JX + LANE_GAP),
            lane_south("south3", JX + 2.0 * LANE_GAP),
            lane_north("north1", JX + 3.0 * LANE_GAP),
            lane_north("north2", JX + 4.0 * LANE_GAP),
        ],
        flows: vec![
            flow("south1", FLOW_FAST),
            flow("south2", FLOW_FAST),
            flow("south3", FLOW_FAST),
            flow("north1", FLOW_FAST),
            flow("north2", FLOW_FAST),
        ],
        ego_route: ego_route(10.0, 135.0),
        occluder_slots: tight_corner_slots(JX),
        leader: None,
    }
}
