//! Coordinate charts and points.
//!
//! Every geometry in the catalog lives on a single four-dimensional chart
//! with a rectangular (possibly unbounded) domain. Points remember which
//! chart they belong to so that field evaluators can reject foreign points
//! cheaply in debug builds.

use crate::error::{Error, Result};

/// Identifier of a chart. Families use static names such as
/// `"euclidean"` or `"instanton"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChartId(pub &'static str);

impl std::fmt::Display for ChartId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0)
    }
}

/// A rectangular coordinate domain. Half-open in no direction: bounds are
/// inclusive, and `f64::INFINITY` / `NEG_INFINITY` mark unbounded axes.
#[derive(Clone, Copy, Debug)]
pub struct Chart {
    pub id: ChartId,
    /// `[lo, hi]` per coordinate.
    pub domain: [[f64; 2]; 4],
}

impl Chart {
    pub fn new(id: &'static str, domain: [[f64; 2]; 4]) -> Self {
        Chart {
            id: ChartId(id),
            domain,
        }
    }

    /// Chart with all four coordinates unbounded.
    pub fn unbounded(id: &'static str) -> Self {
        Chart::new(id, [[f64::NEG_INFINITY, f64::INFINITY]; 4])
    }

    pub fn contains(&self, coords: &[f64; 4]) -> bool {
        coords
            .iter()
            .zip(self.domain.iter())
            .all(|(x, [lo, hi])| *x >= *lo && *x <= *hi)
    }

    /// Validated point construction.
    pub fn point(&self, coords: [f64; 4]) -> Result<Point> {
        for (index, (x, [lo, hi])) in coords.iter().zip(self.domain.iter()).enumerate() {
            if !(*x >= *lo && *x <= *hi) {
                return Err(Error::OutsideChart { index, value: *x });
            }
        }
        Ok(Point {
            chart: self.id,
            coords,
        })
    }

    /// Distance from `coords` to the nearest domain face along axis `i`
    /// (infinite for unbounded axes). Used to check finite-difference
    /// stencils stay inside the chart.
    pub fn margin(&self, coords: &[f64; 4], i: usize) -> f64 {
        let [lo, hi] = self.domain[i];
        (coords[i] - lo).min(hi - coords[i])
    }
}

/// A point of the four-manifold in a specific chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub chart: ChartId,
    pub coords: [f64; 4],
}

impl Point {
    pub fn new(chart: ChartId, coords: [f64; 4]) -> Self {
        Point { chart, coords }
    }

    /// The point displaced by `delta` along coordinate `i`.
    pub fn shifted(&self, i: usize, delta: f64) -> Point {
        let mut coords = self.coords;
        coords[i] += delta;
        Point {
            chart: self.chart,
            coords,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_validation_respects_domain() {
        let chart = Chart::new("test", [[-1.0, 1.0], [0.0, 2.0], [-5.0, 5.0], [0.0, 1.0]]);
        assert!(chart.point([0.0, 1.0, 0.0, 0.5]).is_ok());
        let err = chart.point([0.0, 3.0, 0.0, 0.5]).unwrap_err();
        match err {
            Error::OutsideChart { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn margin_is_distance_to_nearest_face() {
        let chart = Chart::new(
            "test",
            [
                [-1.0, 1.0],
                [f64::NEG_INFINITY, f64::INFINITY],
                [0.0, 4.0],
                [0.0, 1.0],
            ],
        );
        let coords = [0.25, 10.0, 1.0, 0.5];
        assert!((chart.margin(&coords, 0) - 0.75).abs() < 1e-15);
        assert!(chart.margin(&coords, 1).is_infinite());
        assert!((chart.margin(&coords, 2) - 1.0).abs() < 1e-15);
    }
}
