use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Point2D, t: f64) -> Point2D {
        Point2D::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    /// Identity key at micrometer resolution. Formation nodes that sit on the
    /// same spot are treated as the same node when comparing formations.
    pub fn key(&self) -> (i64, i64) {
        ((self.x * 1e6).round() as i64, (self.y * 1e6).round() as i64)
    }
}

impl Serialize for Point2D {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point2D {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        Ok(Point2D { x, y })
    }
}

/// Euclidean distance.
pub fn distance(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_four_five() {
        assert_eq!(
            distance(Point2D::new(0.0, 0.0), Point2D::new(3.0, 4.0)),
            5.0
        );
    }

    #[test]
    fn identity_and_range() {
        let p = Point2D::new(12.5, -3.25);
        assert_eq!(distance(p, p), 0.0);
        assert_eq!(
            distance(Point2D::new(0.0, 0.0), Point2D::new(16.0, 0.0)),
            16.0
        );
    }

    #[test]
    fn serializes_as_pair() {
        let p = Point2D::new(1.5, 2.0);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1.5,2.0]");
        let back: Point2D = serde_json::from_str("[1.5, 2]").unwrap();
        assert_eq!(back, p);
    }

    fn pt() -> impl Strategy<Value = Point2D> {
        (-500.0..500.0f64, -500.0..500.0f64).prop_map(|(x, y)| Point2D::new(x, y))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn metric_axioms(a in pt(), b in pt(), c in pt()) {
            let ab = distance(a, b);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, distance(b, a));
            prop_assert!(distance(a, c) <= ab + distance(b, c) + 1e-9);
        }
    }
}
