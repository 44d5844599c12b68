//! Exact ellipse/polygon distance in SE(2) and CLF-CBF safe control for a
//! polygonal unicycle and a planar arm among moving elliptical obstacles.

pub mod control;
pub mod distance;
pub mod ellipse;
pub mod error;
pub mod quartic;
pub mod robots;
pub mod scenario;
pub mod se2;
pub mod sim;

pub use distance::{ConvexPolygon, DistanceResult, PlacedEllipse, RobotShape};
pub use ellipse::EllipseShape;
pub use error::{ControlError, GeometryError};
pub use se2::{Rot2, SE2Pose, Vec2};
