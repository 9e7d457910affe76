//! Prioritized multi-robot path planning for equal disk robots on grids.
//!
//! The core types are generic over the scalar (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod interval;
pub mod prioritized;
pub mod rng;
pub mod scalar;
pub mod sipp;
pub mod trajectory;

pub use error::{Error, Result};
pub use grid::{Cell, Connectivity, GridMap};
pub use prioritized::{Clock, Method, OrderingPolicy, PriorityOrdering, Robot, Status, TimeCap};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type MotionSegment = geometry::MotionSegment<f64>;
pub type Interval = interval::Interval<f64>;
pub type IntervalSet = interval::IntervalSet<f64>;
pub type MoveModel = grid::MoveModel<f64>;
pub type MoveGraph = grid::MoveGraph<f64>;
pub type Waypoint = trajectory::Waypoint<f64>;
pub type Trajectory = trajectory::Trajectory<f64>;
pub type DynamicObstacle = sipp::DynamicObstacle<f64>;
pub type SafeIntervalTable = sipp::SafeIntervalTable<f64>;
pub type Instance = prioritized::Instance<f64>;
pub type PlanOutcome = prioritized::PlanOutcome<f64>;
pub type SolveResult = prioritized::SolveResult<f64>;
pub type ExperimentConfig = harness::ExperimentConfig<f64>;
pub type RunRecord = harness::RunRecord<f64>;
