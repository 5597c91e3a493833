//! Shared physical and environment constants.
//!
//! Velocities are stored as exact rationals in m/s (50 km/h = 125/9 m/s and
//! so on) so closed-form checks hold to the last bit.

/// Simulation step length in seconds.
pub const DT: f64 = 0.4;
/// Maximum number of steps per episode.
pub const MAX_STEPS: u32 = 250;
/// Magnitude of the accelerate/decelerate actions in m/s^2.
pub const ACTION_ACCEL: f64 = 3.0;
/// Size of the discrete action set.
pub const N_ACTIONS: usize = 3;
/// Speed limit, 50 km/h.
pub const SPEED_LIMIT: f64 = 125.0 / 9.0;
/// Hard cap on the ego speed, 70 km/h.
pub const EGO_V_MAX: f64 = 175.0 / 9.0;

/// Collision / near-collision penalty weight.
pub const K_COLLISION: f64 = 115.0;
/// Velocity penalty weight above `V_UPPER`.
pub const K_V_UPPER: f64 = 0.03;
/// Velocity penalty weight below `V_LOWER`.
pub const K_V_LOWER: f64 = 0.01;
/// Acceleration penalty weight.
pub const K_ACCEL: f64 = 0.002;
/// Upper edge of the penalty-free speed band, 14.4 periodic m/s.
pub const V_UPPER: f64 = 130.0 / 9.0;
/// Lower edge of the penalty-free speed band, 13.3 periodic m/s.
pub const V_LOWER: f64 = 40.0 / 3.0;

/// Normalization horizon for all time channels, seconds.
pub const T_MAX: f64 = 10.0;
/// Patch length in meters.
pub const PATCH_LEN: f64 = 1.0;
/// Number of patches ahead of the ego vehicle.
pub const N_PATCHES: usize = 50;

/// Default vehicle footprint.
pub const VEHICLE_LENGTH: f64 = 5.0;
/// Default vehicle width.
pub const VEHICLE_WIDTH: f64 = 1.8;

/// Rasterization cell size for conflict detection, meters.
pub const CONFLICT_CELL: f64 = 0.05;
/// Default sampling step for occlusion shadows, meters.
pub const SHADOW_STEP: f64 = 0.5;

/// Lateral clearance below which crossing in front of a vehicle counts as a
/// near-collision, meters along the conflicting vehicle's path.
pub const NEAR_COLLISION_CROSS: f64 = 10.0;
/// Longitudinal gap to a same-path leader below which a near-collision is
/// declared, meters.
pub const NEAR_COLLISION_LEAD: f64 = 1.0;

/// Minimum headway kept free when spawning a vehicle, meters.
pub const SPAWN_HEADWAY: f64 = 8.0;
/// Traffic-only warm-up simulated before the ego's first observation, s.
pub const PREROLL_SECONDS: f64 = 60.0;

/// Front and rear clearance used by the velocity-dependent union gap
/// threshold, meters.
pub const UNION_MARGIN: f64 = 1.0;

/// Threshold parameters separating same-path corridors from crossings.
pub const SAME_PATH_MIN_OVERLAP: f64 = 5.0;
/// Maximum heading difference for a same-path classification, radians (15 deg).
pub const SAME_PATH_MAX_HEADING: f64 = 15.0 * std::f64::consts::PI / 180.0;
