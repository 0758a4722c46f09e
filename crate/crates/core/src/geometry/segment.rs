use super::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    fn min_x(&self) -> f64 {
        self.a.x.min(self.b.x)
    }

    fn max_x(&self) -> f64 {
        self.a.x.max(self.b.x)
    }
}

/// Whether two segments are known to meet at a common endpoint (graph adjacency).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharedEndpoint {
    None,
    Declared,
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn closed_intersect(s1: Segment, s2: Segment) -> bool {
    let d1 = sign(orient(s2.a, s2.b, s1.a));
    let d2 = sign(orient(s2.a, s2.b, s1.b));
    let d3 = sign(orient(s1.a, s1.b, s2.a));
    let d4 = sign(orient(s1.a, s1.b, s2.b));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(s2.a, s2.b, s1.a))
        || (d2 == 0 && on_segment(s2.a, s2.b, s1.b))
        || (d3 == 0 && on_segment(s1.a, s1.b, s2.a))
        || (d4 == 0 && on_segment(s1.a, s1.b, s2.b))
}

/// True iff the closed segments share a point. With a declared shared endpoint,
/// touching only at that endpoint does not count; collinear overlap still does.
pub fn segments_intersect(s1: Segment, s2: Segment, shared: SharedEndpoint) -> bool {
    if shared == SharedEndpoint::Declared {
        let common = [(s1.a, s1.b), (s1.b, s1.a)]
            .into_iter()
            .find_map(|(c, o1)| {
                if c == s2.a {
                    Some((c, o1, s2.b))
                } else if c == s2.b {
                    Some((c, o1, s2.a))
                } else {
                    None
                }
            });
        if let Some((c, o1, o2)) = common {
            if o1 == c || o2 == c {
                // a degenerate segment only touches at the shared point
                return false;
            }
            if orient(c, o1, o2) != 0.0 {
                return false;
            }
            return (o1 - c).dot(o2 - c) > 0.0;
        }
    }
    closed_intersect(s1, s2)
}

/// Intersection point of two properly crossing (non-parallel) segments.
pub fn segment_intersection_point(s1: Segment, s2: Segment) -> Option<Point> {
    let r = s1.b - s1.a;
    let s = s2.b - s2.a;
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let t = (s2.a - s1.a).cross(s) / denom;
    let u = (s2.a - s1.a).cross(r) / denom;
    if !(-1e-12..=1.0 + 1e-12).contains(&t) || !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    Some(s1.a + r * t.clamp(0.0, 1.0))
}

/// Closest point on segment `ab` to `p` and its parameter in [0, 1].
pub fn closest_point_on_segment(p: Point, a: Point, b: Point) -> (Point, f64) {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (a + ab * t, t)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    closest_point_on_segment(p, a, b).0.dist(p)
}

fn shares_vertex(x: [usize; 2], y: [usize; 2]) -> bool {
    x[0] == y[0] || x[0] == y[1] || x[1] == y[0] || x[1] == y[1]
}

/// All intersecting pairs `(i, j)` with `i < j`. Segments carry their endpoint
/// vertex ids; pairs sharing a vertex id are tested with a declared shared endpoint.
/// Uses an x-interval sweep to prune candidates.
pub fn crossing_pairs(segs: &[(Segment, [usize; 2])]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..segs.len()).collect();
    order.sort_by(|&i, &j| {
        segs[i]
            .0
            .min_x()
            .total_cmp(&segs[j].0.min_x())
            .then(i.cmp(&j))
    });
    let mut active: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for &i in &order {
        let (si, vi) = segs[i];
        let x0 = si.min_x();
        active.retain(|&j| segs[j].0.max_x() >= x0);
        for &j in &active {
            let (sj, vj) = segs[j];
            let shared = if shares_vertex(vi, vj) {
                SharedEndpoint::Declared
            } else {
                SharedEndpoint::None
            };
            if segments_intersect(si, sj, shared) {
                out.push((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    out.sort_unstable();
    out
}

/// Brute-force crossing count over all pairs; used as an independent check.
pub fn count_crossings(segs: &[(Segment, [usize; 2])]) -> usize {
    let mut n = 0;
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let shared = if shares_vertex(segs[i].1, segs[j].1) {
                SharedEndpoint::Declared
            } else {
                SharedEndpoint::None
            };
            if segments_intersect(segs[i].0, segs[j].0, shared) {
                n += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point::new(ax, ay), Point::new(bx, by))
    }

    #[test]
    fn crossing_diagonals() {
        assert!(segments_intersect(
            seg(0.0, 0.0, 1.0, 1.0),
            seg(0.0, 1.0, 1.0, 0.0),
            SharedEndpoint::None
        ));
    }

    #[test]
    fn parallel_disjoint() {
        assert!(!segments_intersect(
            seg(0.0, 0.0, 1.0, 0.0),
            seg(0.0, 1.0, 1.0, 1.0),
            SharedEndpoint::None
        ));
    }

    #[test]
    fn shared_endpoint_excluded() {
        let a = seg(0.0, 0.0, 1.0, 0.0);
        let b = seg(1.0, 0.0, 2.0, 0.0);
        assert!(!segments_intersect(a, b, SharedEndpoint::Declared));
        assert!(segments_intersect(a, b, SharedEndpoint::None));
    }

    #[test]
    fn shared_endpoint_with_overlap_counts() {
        let a = seg(0.0, 0.0, 2.0, 0.0);
        let b = seg(0.0, 0.0, 1.0, 0.0);
        assert!(segments_intersect(a, b, SharedEndpoint::Declared));
    }

    #[test]
    fn touching_t_junction() {
        assert!(segments_intersect(
            seg(0.0, 0.0, 2.0, 0.0),
            seg(1.0, 0.0, 1.0, 1.0),
            SharedEndpoint::None
        ));
    }

    #[test]
    fn intersection_point_of_diagonals() {
        let p =
            segment_intersection_point(seg(0.0, 0.0, 2.0, 2.0), seg(0.0, 2.0, 2.0, 0.0)).unwrap();
        assert_eq!(p, Point::new(1.0, 1.0));
    }

    // Independent brute force: a shared point exists iff the parametric
    // system has a solution or the segments are collinear and overlap.
    fn oracle(s1: Segment, s2: Segment) -> bool {
        let r = s1.b - s1.a;
        let s = s2.b - s2.a;
        let denom = r.cross(s);
        let qp = s2.a - s1.a;
        if denom != 0.0 {
            let t = qp.cross(s) / denom;
            let u = qp.cross(r) / denom;
            return (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u);
        }
        if qp.cross(r) != 0.0 {
            return false;
        }
        let rr = r.dot(r);
        let t0 = qp.dot(r) / rr;
        let t1 = t0 + s.dot(r) / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        hi >= 0.0 && lo <= 1.0
    }

    #[test]
    fn agrees_with_parametric_oracle_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        // integer coordinates make touching and collinear cases common and exact
        let mut mismatches = 0;
        for _ in 0..10_000 {
            let mut c = || rng.gen_range(-4i32..=4) as f64;
            let s1 = seg(c(), c(), c(), c());
            let s2 = seg(c(), c(), c(), c());
            if s1.a == s1.b || s2.a == s2.b {
                continue;
            }
            if segments_intersect(s1, s2, SharedEndpoint::None) != oracle(s1, s2) {
                mismatches += 1;
            }
        }
        assert_eq!(mismatches, 0);
    }

    proptest! {
        #[test]
        fn sweep_matches_brute_force(raw in proptest::collection::vec((-10i32..10, -10i32..10, -10i32..10, -10i32..10), 1..40)) {
            let segs: Vec<(Segment, [usize; 2])> = raw
                .iter()
                .enumerate()
                .map(|(i, &(a, b, c, d))| (seg(a as f64, b as f64, c as f64, d as f64), [2 * i, 2 * i + 1]))
                .collect();
            prop_assert_eq!(crossing_pairs(&segs).len(), count_crossings(&segs));
        }
    }
}
