//! A wheeled robot with rangefinders in a walled 2D maze, and the mapping of
//! where a trial ends to one of 20×20 behavioral niche cells.

mod geometry;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use geometry::{Bounds, Segment, Vec2};

use crate::error::{Error, Result};

/// Cells per side of the behavioral niche grid.
pub const GRID_SIDE: usize = 20;
/// Total behavioral niche cells.
pub const GRID_CELLS: usize = GRID_SIDE * GRID_SIDE;

const DEFAULT_MAZE: &str = include_str!("../../data/hard_maze.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maze {
    walls: Vec<Segment>,
    start: Pose,
    bounds: Bounds,
}

impl Maze {
    /// Builds a maze whose bounds are the hull of all walls and the start,
    /// expanded by `robot_radius`.
    pub fn new(walls: Vec<Segment>, start: Pose, robot_radius: f64) -> Result<Self> {
        let mut min = start.position;
        let mut max = start.position;
        for w in &walls {
            for p in [w.a, w.b] {
                min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
                max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
            }
        }
        let pad = Vec2::new(robot_radius, robot_radius);
        let bounds = Bounds {
            min: min.sub(pad),
            max: max.add(pad),
        };
        let ext = bounds.extent();
        if !(ext.x > 0.0 && ext.y > 0.0) {
            return Err(Error::invalid("maze bounds have zero area"));
        }
        if let Some(w) = walls
            .iter()
            .find(|w| w.distance_to_point(start.position) < robot_radius)
        {
            return Err(Error::invalid(format!(
                "start position overlaps wall ({}, {})-({}, {})",
                w.a.x, w.a.y, w.b.x, w.b.y
            )));
        }
        Ok(Maze {
            walls,
            start,
            bounds,
        })
    }

    /// Parses the plain-text maze format: a `start x y heading` line and any
    /// number of `wall x1 y1 x2 y2` lines; `#` starts a comment.
    pub fn parse(text: &str, robot_radius: f64) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Format {
            path: "<maze>".into(),
            message: format!("line {line}: {msg}"),
        };
        let mut start = None;
        let mut walls = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let kind = fields.next().unwrap_or_default();
            let nums: Vec<f64> = fields
                .map(|f| f.parse::<f64>().map_err(|_| bad(i + 1, "expected a number")))
                .collect::<Result<_>>()?;
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(bad(i + 1, "non-finite coordinate"));
            }
            match (kind, nums.as_slice()) {
                ("start", &[x, y, h]) => {
                    if start.is_some() {
                        return Err(bad(i + 1, "duplicate start line"));
                    }
                    start = Some(Pose {
                        position: Vec2::new(x, y),
                        heading: h,
                    });
                }
                ("wall", &[x1, y1, x2, y2]) => {
                    walls.push(Segment::new(Vec2::new(x1, y1), Vec2::new(x2, y2)))
                }
                ("start", _) => return Err(bad(i + 1, "start takes x y heading")),
                ("wall", _) => return Err(bad(i + 1, "wall takes x1 y1 x2 y2")),
                _ => return Err(bad(i + 1, &format!("unknown directive `{kind}`"))),
            }
        }
        let start = start.ok_or_else(|| bad(0, "missing start line"))?;
        Maze::new(walls, start, robot_radius)
    }

    pub fn load(path: &Path, robot_radius: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Maze::parse(&text, robot_radius).map_err(|e| match e {
            Error::Format { message, .. } => Error::Format {
                path: path.into(),
                message,
            },
            other => other,
        })
    }

    /// Text of the bundled default maze.
    pub fn default_text() -> &'static str {
        DEFAULT_MAZE
    }

    pub fn default_maze(robot_radius: f64) -> Self {
        Maze::parse(DEFAULT_MAZE, robot_radius).expect("bundled maze is valid")
    }

    pub fn walls(&self) -> &[Segment] {
        &self.walls
    }

    pub fn start(&self) -> Pose {
        self.start
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Reflection about the x-axis.
    pub fn mirrored(&self, robot_radius: f64) -> Self {
        let flip = |p: Vec2| Vec2::new(p.x, -p.y);
        let walls = self
            .walls
            .iter()
            .map(|w| Segment::new(flip(w.a), flip(w.b)))
            .collect();
        let start = Pose {
            position: flip(self.start.position),
            heading: -self.start.heading,
        };
        Maze::new(walls, start, robot_radius).expect("mirror of a valid maze")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotParams {
    /// Sensor directions in radians relative to the heading.
    pub sensor_angles: Vec<f64>,
    pub sensor_range: f64,
    pub max_speed: f64,
    pub max_turn: f64,
    pub radius: f64,
    pub timesteps: u32,
}

impl RobotParams {
    /// Three rangefinders at -45°, 0°, +45°.
    pub fn three_sensor() -> Self {
        let q = std::f64::consts::FRAC_PI_4;
        RobotParams {
            sensor_angles: vec![-q, 0.0, q],
            sensor_range: 100.0,
            max_speed: 3.0,
            max_turn: 0.25,
            radius: 4.0,
            timesteps: 400,
        }
    }

    /// Six rangefinders at -90°, -45°, 0°, +45°, +90°, 180°.
    pub fn six_sensor() -> Self {
        let q = std::f64::consts::FRAC_PI_4;
        RobotParams {
            sensor_angles: vec![-2.0 * q, -q, 0.0, q, 2.0 * q, 4.0 * q],
            ..Self::three_sensor()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sensor_range > 0.0) {
            return Err(Error::config("sensor_range must be positive"));
        }
        if self.timesteps < 1 {
            return Err(Error::config("timesteps must be at least 1"));
        }
        if !(self.radius >= 0.0 && self.max_speed >= 0.0 && self.max_turn >= 0.0) {
            return Err(Error::config("radius, max_speed and max_turn must be non-negative"));
        }
        if self.sensor_angles.is_empty() {
            return Err(Error::config("at least one sensor is required"));
        }
        Ok(())
    }
}

impl Default for RobotParams {
    fn default() -> Self {
        Self::three_sensor()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Vec2,
    pub heading: f64,
    pub radius: f64,
}

impl RobotState {
    pub fn at_start(maze: &Maze, params: &RobotParams) -> Self {
        RobotState {
            position: maze.start.position,
            heading: maze.start.heading,
            radius: params.radius,
        }
    }
}

/// Normalized distance to the nearest wall along a ray, clamped to the
/// sensor range: 1.0 means nothing within range.
pub fn raycast(maze: &Maze, origin: Vec2, direction: f64, sensor_range: f64) -> f64 {
    let dir = Vec2::from_angle(direction);
    let nearest = maze
        .walls
        .iter()
        .filter_map(|w| w.ray_hit(origin, dir))
        .fold(sensor_range, f64::min);
    nearest / sensor_range
}

fn path_is_clear(maze: &Maze, from: Vec2, to: Vec2, radius: f64) -> bool {
    let path = Segment::new(from, to);
    maze.walls
        .iter()
        .all(|w| w.distance_to_segment(&path) >= radius)
}

/// Differential-drive kinematics with axis-separable sliding on collision.
pub fn step_robot(
    maze: &Maze,
    state: &RobotState,
    left: f64,
    right: f64,
    params: &RobotParams,
) -> RobotState {
    let left = if left.is_nan() { 0.0 } else { left.clamp(0.0, 1.0) };
    let right = if right.is_nan() { 0.0 } else { right.clamp(0.0, 1.0) };
    let heading = state.heading + (left - right) * params.max_turn;
    let speed = (left + right) / 2.0 * params.max_speed;
    let mut next = RobotState { heading, ..*state };
    if speed == 0.0 {
        return next;
    }
    let delta = Vec2::from_angle(heading).scale(speed);
    let from = state.position;
    let candidates = [
        from.add(delta),
        Vec2::new(from.x + delta.x, from.y),
        Vec2::new(from.x, from.y + delta.y),
    ];
    if let Some(&to) = candidates
        .iter()
        .find(|&&to| path_is_clear(maze, from, to, state.radius))
    {
        next.position = to;
    }
    next
}

/// A behavioral niche: a cell of the 20×20 grid over the maze bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BehaviorNiche {
    pub col: u8,
    pub row: u8,
}

impl BehaviorNiche {
    /// Dense id `row * 20 + col`.
    pub fn id(self) -> u16 {
        self.row as u16 * GRID_SIDE as u16 + self.col as u16
    }

    pub fn from_id(id: u16) -> Option<Self> {
        ((id as usize) < GRID_CELLS).then(|| BehaviorNiche {
            col: (id as usize % GRID_SIDE) as u8,
            row: (id as usize / GRID_SIDE) as u8,
        })
    }
}

pub fn niche_of(position: Vec2, bounds: &Bounds) -> BehaviorNiche {
    let ext = bounds.extent();
    let axis = |v: f64, lo: f64, span: f64| -> u8 {
        let f = (GRID_SIDE as f64 * (v - lo) / span).floor();
        f.clamp(0.0, (GRID_SIDE - 1) as f64) as u8
    };
    BehaviorNiche {
        col: axis(position.x, bounds.min.x, ext.x),
        row: axis(position.y, bounds.min.y, ext.y),
    }
}

/// A stateful mapping from a sensor vector to a (left, right) motor pair in [0, 1].
pub trait Controller {
    fn reset(&mut self);
    fn activate(&mut self, sensors: &[f64]) -> Result<[f64; 2]>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub final_position: Vec2,
    pub niche: BehaviorNiche,
}

/// Runs one trial from the maze's start pose: sense, activate, step, for
/// `params.timesteps` steps.
pub fn evaluate_controller<C: Controller + ?Sized>(
    maze: &Maze,
    controller: &mut C,
    params: &RobotParams,
) -> Result<TrialOutcome> {
    controller.reset();
    let mut state = RobotState::at_start(maze, params);
    let mut sensors = vec![0.0; params.sensor_angles.len()];
    for _ in 0..params.timesteps {
        for (s, &angle) in sensors.iter_mut().zip(&params.sensor_angles) {
            *s = raycast(maze, state.position, state.heading + angle, params.sensor_range);
        }
        let [left, right] = controller.activate(&sensors)?;
        state = step_robot(maze, &state, left, right, params);
    }
    Ok(TrialOutcome {
        final_position: state.position,
        niche: niche_of(state.position, &maze.bounds),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::seed_stream;
    use rand::Rng;

    fn open_arena() -> Maze {
        let w = |a: (f64, f64), b: (f64, f64)| Segment::new(Vec2::new(a.0, a.1), Vec2::new(b.0, b.1));
        Maze::new(
            vec![
                w((0.0, 0.0), (1000.0, 0.0)),
                w((1000.0, 0.0), (1000.0, 1000.0)),
                w((1000.0, 1000.0), (0.0, 1000.0)),
                w((0.0, 1000.0), (0.0, 0.0)),
            ],
            Pose {
                position: Vec2::new(500.0, 500.0),
                heading: 0.0,
            },
            4.0,
        )
        .unwrap()
    }

    struct Constant([f64; 2]);

    impl Controller for Constant {
        fn reset(&mut self) {}
        fn activate(&mut self, _: &[f64]) -> Result<[f64; 2]> {
            Ok(self.0)
        }
    }

    #[test]
    fn parses_default_maze() {
        let m = Maze::default_maze(4.0);
        assert_eq!(m.walls().len(), 12);
        assert_eq!(m.start().position, Vec2::new(20.0, 25.0));
        assert_eq!(m.bounds().min, Vec2::new(-4.0, -4.0));
        assert_eq!(m.bounds().max, Vec2::new(204.0, 204.0));
    }

    #[test]
    fn parse_errors() {
        assert!(Maze::parse("wall 0 0 1 1\n", 1.0).is_err());
        assert!(Maze::parse("start 0 0\n", 1.0).is_err());
        assert!(Maze::parse("start 0 0 0\nwall 0 0 x 1\n", 1.0).is_err());
        assert!(Maze::parse("start 0 0 0\ndoor 0 0 1 1\n", 1.0).is_err());
        // start on top of a wall
        assert!(Maze::parse("start 5 0 0\nwall 0 0 10 0\nwall 0 10 10 10\n", 1.0).is_err());
        let ok = Maze::parse("# c\nstart 5 5 0 # trailing\n\nwall 0 0 10 0\n", 1.0).unwrap();
        assert_eq!(ok.walls().len(), 1);
    }

    #[test]
    fn raycast_perpendicular_wall() {
        // wall at x = 510, origin 10 units away, range 100 -> 0.1
        let m = Maze::new(
            vec![Segment::new(Vec2::new(510.0, 400.0), Vec2::new(510.0, 600.0))],
            Pose {
                position: Vec2::new(500.0, 500.0),
                heading: 0.0,
            },
            4.0,
        )
        .unwrap();
        let d = raycast(&m, Vec2::new(500.0, 500.0), 0.0, 100.0);
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn raycast_clamps_to_range() {
        let m = open_arena();
        assert_eq!(raycast(&m, Vec2::new(500.0, 500.0), 0.0, 100.0), 1.0);
        // parallel to the bottom wall, not touching it
        assert_eq!(raycast(&m, Vec2::new(500.0, 50.0), std::f64::consts::PI, 100.0), 1.0);
    }

    #[test]
    fn zero_command_is_identity() {
        let m = open_arena();
        let p = RobotParams::default();
        let s = RobotState::at_start(&m, &p);
        assert_eq!(step_robot(&m, &s, 0.0, 0.0, &p), s);
    }

    #[test]
    fn full_command_moves_max_speed() {
        let m = open_arena();
        let p = RobotParams::default();
        let s = RobotState {
            heading: 0.7,
            ..RobotState::at_start(&m, &p)
        };
        let n = step_robot(&m, &s, 1.0, 1.0, &p);
        assert!((n.position.distance(s.position) - p.max_speed).abs() < 1e-12);
        assert_eq!(n.heading, 0.7);
    }

    #[test]
    fn blocked_move_stays_clear_of_wall() {
        // body edge 1 unit from a wall straight ahead; a full step would overlap it
        let wall = Segment::new(Vec2::new(505.0, 400.0), Vec2::new(505.0, 600.0));
        let m = Maze::new(
            vec![wall],
            Pose {
                position: Vec2::new(500.0, 500.0),
                heading: 0.0,
            },
            4.0,
        )
        .unwrap();
        let p = RobotParams::default();
        let s = RobotState::at_start(&m, &p);
        let n = step_robot(&m, &s, 1.0, 1.0, &p);
        assert!(n.position.distance(s.position) < p.max_speed);
        assert!(wall.distance_to_point(n.position) >= p.radius);
    }

    #[test]
    fn slides_along_wall() {
        // heading 45° into a wall on the right: x is blocked, y slides
        let wall = Segment::new(Vec2::new(505.0, 0.0), Vec2::new(505.0, 1000.0));
        let m = Maze::new(
            vec![wall],
            Pose {
                position: Vec2::new(500.0, 500.0),
                heading: std::f64::consts::FRAC_PI_4,
            },
            4.0,
        )
        .unwrap();
        let p = RobotParams::default();
        let s = RobotState::at_start(&m, &p);
        let n = step_robot(&m, &s, 1.0, 1.0, &p);
        assert_eq!(n.position.x, 500.0);
        assert!(n.position.y > 500.0);
    }

    #[test]
    fn fuzzed_commands_never_penetrate_walls() {
        let m = Maze::default_maze(4.0);
        let p = RobotParams::default();
        let mut rng = seed_stream(11, 0);
        for _ in 0..50 {
            let mut s = RobotState::at_start(&m, &p);
            for _ in 0..400 {
                s = step_robot(&m, &s, rng.random(), rng.random(), &p);
                assert!(m.walls().iter().all(|w| w.distance_to_point(s.position) >= p.radius));
                assert!(m.bounds().contains(s.position));
            }
        }
    }

    #[test]
    fn niche_boundaries() {
        let b = Bounds {
            min: Vec2::new(-4.0, -4.0),
            max: Vec2::new(204.0, 204.0),
        };
        assert_eq!(niche_of(b.min, &b), BehaviorNiche { col: 0, row: 0 });
        assert_eq!(niche_of(b.max, &b), BehaviorNiche { col: 19, row: 19 });
        assert_eq!(niche_of(Vec2::new(100.0, 100.0), &b), BehaviorNiche { col: 10, row: 10 });
        let n = BehaviorNiche { col: 7, row: 3 };
        assert_eq!(n.id(), 67);
        assert_eq!(BehaviorNiche::from_id(67), Some(n));
        assert_eq!(BehaviorNiche::from_id(400), None);
    }

    #[test]
    fn stationary_controller_ends_at_start_niche() {
        let m = Maze::default_maze(4.0);
        let p = RobotParams::default();
        let out = evaluate_controller(&m, &mut Constant([0.0, 0.0]), &p).unwrap();
        assert_eq!(out.final_position, m.start().position);
        assert_eq!(out.niche, niche_of(m.start().position, &m.bounds()));
    }

    #[test]
    fn mirrored_maze_mirrors_sensors() {
        let m = Maze::default_maze(4.0);
        let mm = m.mirrored(4.0);
        let p = RobotParams::six_sensor();
        let origin = Vec2::new(37.0, 71.0);
        let heading = 0.3;
        for &a in &p.sensor_angles {
            let d = raycast(&m, origin, heading + a, p.sensor_range);
            let dm = raycast(&mm, Vec2::new(origin.x, -origin.y), -heading - a, p.sensor_range);
            assert!((d - dm).abs() < 1e-12, "angle {a}: {d} vs {dm}");
        }
    }
}
