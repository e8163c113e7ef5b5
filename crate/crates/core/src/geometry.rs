//! Screen-plane primitives. All rectangles are half-open: `[x0, x1) × [y0, y1)`.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: T, dy: T) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn distance(self, other: Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned rectangle with inclusive left/top and exclusive right/bottom edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Rect<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(x0: T, y0: T, x1: T, y1: T) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn from_origin_size(x: T, y: T, w: T, h: T) -> Self {
        Self::new(x, y, x + w, y + h)
    }

    /// Rectangle centred on `c` with the given half extents.
    pub fn centered(c: Point<T>, half_w: T, half_h: T) -> Self {
        Self::new(c.x - half_w, c.y - half_h, c.x + half_w, c.y + half_h)
    }

    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Point<T> {
        Point::new(
            (self.x0 + self.x1) * T::half(),
            (self.y0 + self.y1) * T::half(),
        )
    }

    #[inline]
    pub fn contains(&self, p: Point<T>) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }

    pub fn contains_rect(&self, other: &Rect<T>) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn intersects(&self, other: &Rect<T>) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    pub fn is_valid(&self) -> bool {
        self.x0.is_finite() && self.y0.is_finite() && self.x1 > self.x0 && self.y1 > self.y0
    }
}

/// Membership test against a union of rectangles.
#[inline]
pub fn union_contains<T: Scalar>(region: &[Rect<T>], p: Point<T>) -> bool {
    region.iter().any(|r| r.contains(p))
}
