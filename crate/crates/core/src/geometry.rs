//! Planar primitives: segments, convex windows, intersection tests and the
//! Minkowski/Steiner area formulas used by the reference measure.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Collinearity tolerance for the orientation test. Cross products with
/// absolute value at or below this are treated as zero so that the
/// intersection predicate is deterministic and symmetric.
pub const ORIENTATION_EPS: f64 = 1e-12;

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn translated(self, dx: f64, dy: f64) -> Self {
        Point::new(self.x + dx, self.y + dy)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A closed line segment given by its midpoint, direction angle in `[0, pi)`
/// and positive length. The midpoint is the centre of the circumscribed
/// ball, whose radius is `length / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    center: Point,
    angle: f64,
    length: f64,
}

impl Segment {
    /// Builds a segment; the angle is reduced modulo pi.
    ///
    /// Panics on non-finite input or a non-positive length (degenerate
    /// segments are outside the reference shape distribution's support).
    pub fn new(center: Point, angle: f64, length: f64) -> Self {
        assert!(
            center.x.is_finite() && center.y.is_finite() && angle.is_finite(),
            "segment coordinates must be finite"
        );
        assert!(
            length.is_finite() && length > 0.0,
            "segment length must be positive, got {length}"
        );
        let mut a = angle.rem_euclid(PI);
        if a >= PI {
            a = 0.0; // rem_euclid can return exactly pi after rounding
        }
        Segment {
            center,
            angle: a,
            length,
        }
    }

    /// Builds the segment with the given endpoints.
    pub fn from_endpoints(a: Point, b: Point) -> Self {
        let center = Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
        let length = a.dist(b);
        let angle = (b.y - a.y).atan2(b.x - a.x);
        Segment::new(center, angle, length)
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.length
    }

    pub fn endpoints(&self) -> (Point, Point) {
        let (s, c) = self.angle.sin_cos();
        let hx = 0.5 * self.length * c;
        let hy = 0.5 * self.length * s;
        (
            Point::new(self.center.x - hx, self.center.y - hy),
            Point::new(self.center.x + hx, self.center.y + hy),
        )
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Segment {
            center: self.center.translated(dx, dy),
            angle: self.angle,
            length: self.length,
        }
    }
}

fn orientation(p: Point, q: Point, r: Point) -> i8 {
    let v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    if v > ORIENTATION_EPS {
        1
    } else if v < -ORIENTATION_EPS {
        -1
    } else {
        0
    }
}

/// Given collinear p, q, r, does q lie on the closed segment pr?
fn on_segment(p: Point, q: Point, r: Point) -> bool {
    q.x <= p.x.max(r.x) && q.x >= p.x.min(r.x) && q.y <= p.y.max(r.y) && q.y >= p.y.min(r.y)
}

/// True iff the closed segments share at least one point. Non-degenerate
/// crossings are decided by orientation tests; collinear overlap counts.
pub fn segments_intersect(a: &Segment, b: &Segment) -> bool {
    let (p1, q1) = a.endpoints();
    let (p2, q2) = b.endpoints();
    let o1 = orientation(p1, q1, p2);
    let o2 = orientation(p1, q1, q2);
    let o3 = orientation(p2, q2, p1);
    let o4 = orientation(p2, q2, q1);

    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, q2, q1))
        || (o3 == 0 && on_segment(p2, p1, q2))
        || (o4 == 0 && on_segment(p2, q1, q2))
}

/// Convex observation window: a square or a disk, both centred at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Square { side: f64 },
    Disk { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub shape: Shape,
    pub center: Point,
}

impl Window {
    pub fn square(side: f64) -> Result<Self> {
        Window::square_at(side, Point::new(0.0, 0.0))
    }

    pub fn square_at(side: f64, center: Point) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "square side must be positive, got {side}"
            )));
        }
        Ok(Window {
            shape: Shape::Square { side },
            center,
        })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Window::disk_at(radius, Point::new(0.0, 0.0))
    }

    pub fn disk_at(radius: f64, center: Point) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Window {
            shape: Shape::Disk { radius },
            center,
        })
    }

    pub fn area(&self) -> f64 {
        match self.shape {
            Shape::Square { side } => side * side,
            Shape::Disk { radius } => PI * radius * radius,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.shape {
            Shape::Square { side } => 4.0 * side,
            Shape::Disk { radius } => 2.0 * PI * radius,
        }
    }

    /// Length of the projection of the window onto a line of direction
    /// `theta` (the window's width measured along that direction).
    pub fn width(&self, theta: f64) -> f64 {
        match self.shape {
            Shape::Square { side } => side * (theta.cos().abs() + theta.sin().abs()),
            Shape::Disk { radius } => 2.0 * radius,
        }
    }

    /// Support function in the unit direction `(ux, uy)`.
    pub fn support(&self, ux: f64, uy: f64) -> f64 {
        let base = match self.shape {
            Shape::Square { side } => 0.5 * side * (ux.abs() + uy.abs()),
            Shape::Disk { radius } => radius,
        };
        self.center.x * ux + self.center.y * uy + base
    }

    /// Euclidean distance from `p` to the window (zero inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        let rx = p.x - self.center.x;
        let ry = p.y - self.center.y;
        match self.shape {
            Shape::Square { side } => {
                let h = 0.5 * side;
                let dx = (rx.abs() - h).max(0.0);
                let dy = (ry.abs() - h).max(0.0);
                dx.hypot(dy)
            }
            Shape::Disk { radius } => (rx.hypot(ry) - radius).max(0.0),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.distance_to(p) <= 0.0
    }

    /// Area of the Minkowski dilation `window ⊕ B(0, r)` (Steiner formula).
    pub fn dilated_area(&self, r: f64) -> f64 {
        self.area() + self.perimeter() * r + PI * r * r
    }

    /// Axis-aligned bounding box of `window ⊕ B(0, r)`.
    pub fn dilated_bbox(&self, r: f64) -> (Point, Point) {
        let reach = match self.shape {
            Shape::Square { side } => 0.5 * side + r,
            Shape::Disk { radius } => radius + r,
        };
        (
            Point::new(self.center.x - reach, self.center.y - reach),
            Point::new(self.center.x + reach, self.center.y + reach),
        )
    }

    /// Uniform point on `window ⊕ B(0, r)`; rejection from the bounding box
    /// for squares, direct radial sampling for disks.
    pub fn sample_point_in_dilation<R: rand::Rng + ?Sized>(&self, r: f64, rng: &mut R) -> Point {
        match self.shape {
            Shape::Square { .. } => {
                let (lo, hi) = self.dilated_bbox(r);
                loop {
                    let p = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
                    if self.distance_to(p) <= r {
                        return p;
                    }
                }
            }
            Shape::Disk { radius } => {
                let rho = (radius + r) * rng.gen_range(0.0f64..1.0).sqrt();
                let phi = rng.gen_range(0.0..(2.0 * PI));
                Point::new(
                    self.center.x + rho * phi.cos(),
                    self.center.y + rho * phi.sin(),
                )
            }
        }
    }
}

/// True iff the closed segment intersects the closed window.
pub fn segment_hits_window(s: &Segment, w: &Window) -> bool {
    match w.shape {
        Shape::Square { side } => {
            let h = 0.5 * side;
            let (a, b) = s.endpoints();
            let ax = a.x - w.center.x;
            let ay = a.y - w.center.y;
            let dx = b.x - a.x;
            let dy = b.y - a.y;
            // Liang-Barsky clip of the segment against [-h,h]^2.
            let mut t0 = 0.0f64;
            let mut t1 = 1.0f64;
            let checks = [
                (-dx, ax + h),
                (dx, h - ax),
                (-dy, ay + h),
                (dy, h - ay),
            ];
            for (p, q) in checks {
                if p == 0.0 {
                    if q < 0.0 {
                        return false;
                    }
                } else {
                    let t = q / p;
                    if p < 0.0 {
                        if t > t0 {
                            t0 = t;
                        }
                    } else if t < t1 {
                        t1 = t;
                    }
                    if t0 > t1 {
                        return false;
                    }
                }
            }
            true
        }
        Shape::Disk { radius } => {
            let (a, b) = s.endpoints();
            point_segment_distance(w.center, a, b) <= radius
        }
    }
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let vx = b.x - a.x;
    let vy = b.y - a.y;
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * vx, a.y + t * vy))
}

/// Lebesgue measure of the set of centres `x` such that the segment
/// `(x, angle, length)` hits `w`. For a convex window this is the Minkowski
/// sum area `Leb(W) + length * width(W, angle ⊥)`.
pub fn hit_region_area(length: f64, angle: f64, w: &Window) -> f64 {
    assert!(length > 0.0, "hit_region_area needs a positive length");
    w.area() + length * w.width(angle + 0.5 * PI)
}

/// Average of [`hit_region_area`] over a uniform direction in `[0, pi)`:
/// `Leb(W) + length * U(W) / pi` with `U` the perimeter.
pub fn mean_hit_region_area(length: f64, w: &Window) -> f64 {
    assert!(length > 0.0, "mean_hit_region_area needs a positive length");
    w.area() + length * w.perimeter() / PI
}

/// Observation window plus a margin: the simulation region is
/// `window ⊕ B(0, margin)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub window: Window,
    pub margin: f64,
}

impl Domain {
    pub fn new(window: Window, margin: f64) -> Result<Self> {
        if !(margin.is_finite() && margin >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "margin must be nonnegative, got {margin}"
            )));
        }
        Ok(Domain { window, margin })
    }

    /// Area of the simulation region (Steiner formula).
    pub fn sim_area(&self) -> f64 {
        self.window.dilated_area(self.margin)
    }

    pub fn sim_bbox(&self) -> (Point, Point) {
        self.window.dilated_bbox(self.margin)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.window.distance_to(p) <= self.margin
    }

    /// Uniform point on the simulation region.
    pub fn sample_center<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.window.sample_point_in_dilation(self.margin, rng)
    }

    /// True iff `w ⊕ B(0, r)` is contained in the simulation region,
    /// decided by comparing support functions over a direction grid.
    pub fn contains_dilated_window(&self, w: &Window, r: f64) -> bool {
        const DIRS: usize = 720;
        for i in 0..DIRS {
            let phi = 2.0 * PI * (i as f64) / (DIRS as f64);
            let (uy, ux) = phi.sin_cos();
            if w.support(ux, uy) + r > self.window.support(ux, uy) + self.margin + 1e-9 {
                return false;
            }
        }
        true
    }
}
