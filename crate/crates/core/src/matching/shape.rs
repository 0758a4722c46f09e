use crate::error::{Error, Result};
use crate::geometry::{BBox, Point, Polyline, Similarity};

/// One or more polylines to embed in the map. The anchor polyline, the one
/// holding the vertex nearest the top-left corner, drives route matching.
#[derive(Debug, Clone, PartialEq)]
pub struct GuideShape {
    pub polylines: Vec<Polyline>,
    pub anchor: usize,
}

impl GuideShape {
    pub fn new(polylines: Vec<Polyline>) -> Result<Self> {
        if polylines.is_empty() {
            return Err(Error::InvalidParameter(
                "guide shape has no polyline".into(),
            ));
        }
        let bbox = polylines
            .iter()
            .map(Polyline::bbox)
            .reduce(BBox::union)
            .expect("non-empty");
        // y grows upwards, so the top-left corner is (min x, max y)
        let corner = Point::new(bbox.min.x, bbox.max.y);
        let mut anchor = 0;
        let mut best = f64::INFINITY;
        for (i, p) in polylines.iter().enumerate() {
            for v in p.vertices() {
                let d = v.dist(corner);
                if d < best {
                    best = d;
                    anchor = i;
                }
            }
        }
        Ok(Self { polylines, anchor })
    }

    pub fn anchor_polyline(&self) -> &Polyline {
        &self.polylines[self.anchor]
    }

    pub fn bbox(&self) -> BBox {
        self.polylines
            .iter()
            .map(Polyline::bbox)
            .reduce(BBox::union)
            .expect("non-empty")
    }

    pub fn transformed(&self, t: &Similarity) -> GuideShape {
        GuideShape {
            polylines: self.polylines.iter().map(|p| p.transformed(t)).collect(),
            anchor: self.anchor,
        }
    }

    /// Closest point over all polylines: `(point, polyline index, arc fraction)`.
    pub fn closest_point(&self, p: Point) -> (Point, usize, f64) {
        let mut best = (p, 0, 0.0);
        let mut best_d = f64::INFINITY;
        for (i, line) in self.polylines.iter().enumerate() {
            let (q, f) = line.closest_point(p);
            let d = q.dist(p);
            if d < best_d {
                best_d = d;
                best = (q, i, f);
            }
        }
        best
    }

    /// All polyline segments, with their polyline index.
    pub fn segments(&self) -> impl Iterator<Item = (usize, Point, Point)> + '_ {
        self.polylines
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.segments().map(move |(a, b)| (i, a, b)))
    }
}
