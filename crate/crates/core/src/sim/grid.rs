use rayon::prelude::*;

use crate::distance::{disc_ellipse_distance, polygon_ellipse_distance, ConvexPolygon, PlacedEllipse};
use crate::se2::SE2Pose;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMode {
    /// Exact polygon/ellipse distance at the given orientation.
    Se2,
    /// Point/ellipse distance minus an encapsulating radius.
    Circle { radius: f64 },
}

/// `nx × ny` nodes spanning `[x_min, x_max] × [y_min, y_max]` inclusively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(center_x: f64, center_y: f64, half_width: f64, resolution: usize) -> Self {
        Self {
            x_min: center_x - half_width,
            x_max: center_x + half_width,
            y_min: center_y - half_width,
            y_max: center_y + half_width,
            nx: resolution,
            ny: resolution,
        }
    }

    fn node(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        Self::node(self.x_min, self.x_max, self.nx, i)
    }

    pub fn y(&self, j: usize) -> f64 {
        Self::node(self.y_min, self.y_max, self.ny, j)
    }

    pub fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
            && self.nx >= 2
            && self.ny >= 2
    }
}

/// Values at grid nodes, row-major in `y` (index `j * nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridValues {
    pub spec: GridSpec,
    pub theta: f64,
    pub values: Vec<f64>,
}

impl GridValues {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    /// `(x, y, value)` triples in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, v)| {
            let (i, j) = (k % self.spec.nx, k / self.spec.nx);
            (self.spec.x(i), self.spec.y(j), *v)
        })
    }
}

/// Distance from the robot placed at every grid node (orientation `theta`)
/// to the ellipse. Overlapping placements carry the negative surrogate.
pub fn grid_evaluate(
    shape: &ConvexPolygon,
    spec: &GridSpec,
    theta: f64,
    ellipse: &PlacedEllipse,
    mode: GridMode,
) -> GridValues {
    let values = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|k| {
            let pose = SE2Pose::from_xy_theta(spec.x(k % spec.nx), spec.y(k / spec.nx), theta);
            match mode {
                GridMode::Se2 => polygon_ellipse_distance(ellipse, shape, &pose).value,
                GridMode::Circle { radius } => disc_ellipse_distance(ellipse, radius, &pose).value,
            }
        })
        .collect();
    GridValues {
        spec: *spec,
        theta,
        values,
    }
}
