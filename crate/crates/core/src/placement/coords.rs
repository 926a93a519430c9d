use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// End nodes (fixed) and repeaters (free) in the plane, in km.
///
/// Node indices run over end nodes first, then repeaters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub end_nodes: Vec<Point>,
    pub repeaters: Vec<Point>,
}

impl Coordinates {
    pub fn new(end_nodes: Vec<Point>, repeaters: Vec<Point>) -> Result<Self> {
        let c = Coordinates { end_nodes, repeaters };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.end_nodes.len() < 2 {
            return Err(Error::Config("at least two end nodes are required".into()));
        }
        if self
            .end_nodes
            .iter()
            .chain(&self.repeaters)
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::Config("coordinates must be finite".into()));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.end_nodes.len() + self.repeaters.len()
    }

    pub fn is_end_node(&self, i: usize) -> bool {
        i < self.end_nodes.len()
    }

    pub fn point(&self, i: usize) -> Point {
        if i < self.end_nodes.len() {
            self.end_nodes[i]
        } else {
            self.repeaters[i - self.end_nodes.len()]
        }
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.point(a).dist(&self.point(b))
    }

    /// `(min_x, min_y, max_x, max_y)` of the end nodes.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.end_nodes {
            b.0 = b.0.min(p.x);
            b.1 = b.1.min(p.y);
            b.2 = b.2.max(p.x);
            b.3 = b.3.max(p.y);
        }
        b
    }

    /// Smallest distance between two end nodes.
    pub fn min_end_distance(&self) -> f64 {
        let e = &self.end_nodes;
        let mut d = f64::INFINITY;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                d = d.min(e[i].dist(&e[j]));
            }
        }
        d
    }

    /// Repeater coordinates flattened as `[x0, y0, x1, y1, ...]`.
    pub fn repeater_vector(&self) -> Vec<f64> {
        self.repeaters.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub fn set_repeater_vector(&mut self, v: &[f64]) {
        for (p, c) in self.repeaters.iter_mut().zip(v.chunks(2)) {
            p.x = c[0];
            p.y = c[1];
        }
    }

    /// Applies an isometry of the plane to every node.
    pub fn transformed(&self, f: impl Fn(Point) -> Point) -> Self {
        Coordinates {
            end_nodes: self.end_nodes.iter().map(|&p| f(p)).collect(),
            repeaters: self.repeaters.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Four end nodes on the corners of a square of side `d`.
pub fn square(d: f64) -> Vec<Point> {
    vec![
        Point::new(0.0, 0.0),
        Point::new(d, 0.0),
        Point::new(d, d),
        Point::new(0.0, d),
    ]
}
