use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    #[inline]
    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec2) -> f64 {
        self.sub(o).length()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        let ab = self.b.sub(self.a);
        let len2 = ab.dot(ab);
        let t = if len2 > 0.0 {
            (p.sub(self.a).dot(ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        p.distance(self.a.add(ab.scale(t)))
    }

    /// Parameter along the ray `origin + t * dir` (t >= 0) where it meets
    /// this segment, if it does.
    #[inline]
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        let seg = self.b.sub(self.a);
        let denom = dir.cross(seg);
        if denom == 0.0 {
            return None;
        }
        let diff = self.a.sub(origin);
        let t = diff.cross(seg) / denom;
        let u = diff.cross(dir) / denom;
        (t >= 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
    }

    pub fn intersects(&self, other: &Segment) -> bool {
        let d1 = other.b.sub(other.a).cross(self.a.sub(other.a));
        let d2 = other.b.sub(other.a).cross(self.b.sub(other.a));
        let d3 = self.b.sub(self.a).cross(other.a.sub(self.a));
        let d4 = self.b.sub(self.a).cross(other.b.sub(self.a));
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        (d1 == 0.0 && self.distance_to_point(other.a) == 0.0)
            || (d2 == 0.0 && self.distance_to_point(other.b) == 0.0)
            || (d3 == 0.0 && other.distance_to_point(self.a) == 0.0)
            || (d4 == 0.0 && other.distance_to_point(self.b) == 0.0)
    }

    pub fn distance_to_segment(&self, other: &Segment) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        self.distance_to_point(other.a)
            .min(self.distance_to_point(other.b))
            .min(other.distance_to_point(self.a))
            .min(other.distance_to_point(self.b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn extent(&self) -> Vec2 {
        self.max.sub(self.min)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}
