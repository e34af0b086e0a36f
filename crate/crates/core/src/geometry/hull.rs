//! Exact convex hulls and separation for small lattice point sets.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use super::{Direction, IntVec2};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Degeneracy {
    Point,
    Segment,
    Polygon,
}

/// Convex lattice polygon with vertices in counterclockwise order and no three
/// consecutive vertices collinear. Points and segments are kept as 1- and
/// 2-vertex polygons with an explicit flag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticePolygon {
    vertices: Vec<IntVec2>,
    degeneracy: Degeneracy,
}

impl LatticePolygon {
    pub fn vertices(&self) -> &[IntVec2] {
        &self.vertices
    }

    pub fn degeneracy(&self) -> Degeneracy {
        self.degeneracy
    }

    /// Edge vectors in counterclockwise order. A segment yields its direction
    /// and the antipode; a point yields nothing.
    pub fn edges(&self) -> Vec<IntVec2> {
        match self.degeneracy {
            Degeneracy::Point => Vec::new(),
            Degeneracy::Segment => {
                let d = self.vertices[1] - self.vertices[0];
                vec![d, -d]
            }
            Degeneracy::Polygon => {
                let n = self.vertices.len();
                (0..n)
                    .map(|i| self.vertices[(i + 1) % n] - self.vertices[i])
                    .collect()
            }
        }
    }

    pub fn face_directions(&self) -> Vec<Direction> {
        self.edges()
            .into_iter()
            .map(|e| Direction::from_vec(e).expect("edges are nonzero"))
            .collect()
    }

    /// Squared Euclidean diameter (attained between two vertices).
    pub fn diameter_sq(&self) -> i64 {
        let mut best = 0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max((*a - *b).norm_sq());
            }
        }
        best
    }

    /// Closed containment.
    pub fn contains(&self, p: IntVec2) -> bool {
        match self.degeneracy {
            Degeneracy::Point => self.vertices[0] == p,
            Degeneracy::Segment => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                (b - a).cross(p - a) == 0 && (p - a).dot(b - a) >= 0 && (p - b).dot(a - b) >= 0
            }
            Degeneracy::Polygon => {
                let n = self.vertices.len();
                (0..n).all(|i| {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    (b - a).cross(p - a) >= 0
                })
            }
        }
    }

    /// Every lattice point of the closed polygon.
    pub fn lattice_points(&self) -> Vec<IntVec2> {
        let xmin = self.vertices.iter().map(|v| v.x).min().unwrap();
        let xmax = self.vertices.iter().map(|v| v.x).max().unwrap();
        let ymin = self.vertices.iter().map(|v| v.y).min().unwrap();
        let ymax = self.vertices.iter().map(|v| v.y).max().unwrap();
        let mut out = Vec::new();
        for y in ymin..=ymax {
            for x in xmin..=xmax {
                let p = IntVec2::new(x, y);
                if self.contains(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Builds a polygon from vertices already known to be in convex position,
    /// counterclockwise.
    pub(crate) fn from_ccw_vertices(vertices: Vec<IntVec2>) -> Self {
        let degeneracy = match vertices.len() {
            1 => Degeneracy::Point,
            2 => Degeneracy::Segment,
            _ => Degeneracy::Polygon,
        };
        LatticePolygon { vertices, degeneracy }
    }
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[IntVec2]) -> Result<LatticePolygon> {
    let mut pts: Vec<IntVec2> = points.to_vec();
    if pts.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    pts.sort();
    pts.dedup();
    if pts.len() == 1 {
        return Ok(LatticePolygon::from_ccw_vertices(pts));
    }
    let mut lower: Vec<IntVec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(p - lower[lower.len() - 2]) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<IntVec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(p - upper[upper.len() - 2]) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    Ok(LatticePolygon::from_ccw_vertices(lower))
}

pub fn hull_contains_origin(hull: &LatticePolygon) -> bool {
    hull.contains(IntVec2::ZERO)
}

/// Closed rational half-plane `{z : z . normal <= threshold}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfPlane {
    pub normal: IntVec2,
    pub threshold: Ratio<i64>,
}

impl HalfPlane {
    pub fn contains(&self, z: IntVec2) -> bool {
        Ratio::from_integer(z.dot(self.normal)) <= self.threshold
    }
}

/// Finds a closed rational half-plane containing `a` and missing `b`.
///
/// Candidate normals are the edge normals of both polygons and the differences
/// of vertex pairs; for disjoint polytopes the closest-point direction is
/// always one of them.
pub fn separating_halfplane(a: &LatticePolygon, b: &LatticePolygon) -> Result<HalfPlane> {
    let mut candidates: Vec<IntVec2> = Vec::new();
    for poly in [a, b] {
        for e in poly.edges() {
            candidates.push(e.rot_cw());
            candidates.push(e.rot_ccw());
        }
    }
    for &p in a.vertices() {
        for &q in b.vertices() {
            candidates.push(q - p);
        }
    }
    for n in candidates {
        if n.is_zero() {
            continue;
        }
        let n = Direction::from_vec(n)?.vec();
        let hi_a = a.vertices().iter().map(|v| v.dot(n)).max().unwrap();
        let lo_b = b.vertices().iter().map(|v| v.dot(n)).min().unwrap();
        if hi_a < lo_b {
            return Ok(HalfPlane {
                normal: n,
                threshold: Ratio::new(hi_a + lo_b, 2),
            });
        }
    }
    Err(Error::NotSeparable)
}

/// Primitive `v` such that the hull lies strictly on one side of the line
/// through the origin spanned by `v`.
pub fn nice_vector(hull: &LatticePolygon) -> Result<Direction> {
    let origin = LatticePolygon::from_ccw_vertices(vec![IntVec2::ZERO]);
    let h = separating_halfplane(&origin, hull).map_err(|_| Error::OriginInHull)?;
    Ok(Direction::from_vec(h.normal)?.rot_ccw())
}

/// Integer 2x2 matrix `[[a, b], [c, d]]` acting on column vectors, with
/// determinant +1 or -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UnimodularMap {
    pub matrix: [[i64; 2]; 2],
    pub shear_power: i64,
}

impl UnimodularMap {
    pub fn det(&self) -> i64 {
        let m = self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: IntVec2) -> IntVec2 {
        let m = self.matrix;
        IntVec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }
}

/// Result of [`normalize_growth_set`]: `basis` holds the columns `v`, `w` of
/// the Bezout matrix, `map` sends the input set into `Z>=0 x Z>0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Normalization {
    pub basis: [[i64; 2]; 2],
    pub map: UnimodularMap,
    pub image: Vec<IntVec2>,
}

fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Moves an origin-free growth set into the quadrant `Z>=0 x Z>0` with a
/// Bezout change of basis followed by a shear `(1 t; 0 1)`.
pub fn normalize_growth_set(n_set: &[IntVec2]) -> Result<Normalization> {
    let hull = convex_hull(n_set)?;
    let v = nice_vector(&hull)?.vec();
    // a*x1 + b*y1 = 1, so w = (-b, a) gives det(v, w) = 1.
    let ext = v.x.extended_gcd(&v.y);
    let (mut a, mut b) = (ext.x, ext.y);
    if ext.gcd < 0 {
        a = -a;
        b = -b;
    }
    let mut w = IntVec2::new(-b, a);
    // T = [v w]; T^-1 = adj(T) / det(T).
    let inverse = |v: IntVec2, w: IntVec2| -> [[i64; 2]; 2] {
        let det = v.cross(w);
        [[w.y * det, -w.x * det], [-v.y * det, v.x * det]]
    };
    let mut tinv = inverse(v, w);
    let second = |m: [[i64; 2]; 2], p: IntVec2| m[1][0] * p.x + m[1][1] * p.y;
    if n_set.iter().any(|&p| second(tinv, p) <= 0) {
        w = -w;
        tinv = inverse(v, w);
    }
    debug_assert!(n_set.iter().all(|&p| second(tinv, p) > 0));
    let first = |m: [[i64; 2]; 2], p: IntVec2| m[0][0] * p.x + m[0][1] * p.y;
    let mut t = 0i64;
    for &p in n_set {
        let (x, y) = (first(tinv, p), second(tinv, p));
        if x < 0 {
            t = t.max(Integer::div_ceil(&(-x), &y));
        }
    }
    let matrix = mat_mul([[1, t], [0, 1]], tinv);
    let map = UnimodularMap { matrix, shear_power: t };
    let image = n_set.iter().map(|&p| map.apply(p)).collect();
    Ok(Normalization {
        basis: [[v.x, w.x], [v.y, w.y]],
        map,
        image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<IntVec2> {
        v.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn hull_examples() {
        let seg = convex_hull(&pts(&[(0, 1), (1, 1)])).unwrap();
        assert_eq!(seg.degeneracy(), Degeneracy::Segment);
        assert_eq!(seg.vertices(), &pts(&[(0, 1), (1, 1)])[..]);

        let p = convex_hull(&pts(&[(0, 0)])).unwrap();
        assert_eq!(p.degeneracy(), Degeneracy::Point);

        let tri = convex_hull(&pts(&[(0, 0), (2, 0), (1, 1), (1, 0)])).unwrap();
        assert_eq!(tri.vertices(), &pts(&[(0, 0), (2, 0), (1, 1)])[..]);

        assert!(matches!(convex_hull(&[]), Err(Error::EmptyPointSet)));
    }

    #[test]
    fn collinear_input_gives_segment() {
        let seg = convex_hull(&pts(&[(0, 0), (2, 2), (1, 1), (3, 3)])).unwrap();
        assert_eq!(seg.degeneracy(), Degeneracy::Segment);
        assert_eq!(seg.vertices(), &pts(&[(0, 0), (3, 3)])[..]);
    }

    #[test]
    fn origin_containment() {
        let h = |v: &[(i64, i64)]| hull_contains_origin(&convex_hull(&pts(v)).unwrap());
        assert!(h(&[(-1, 0), (1, 0)]));
        assert!(!h(&[(0, 1), (1, 1)]));
        assert!(h(&[(1, 0), (0, 1), (-1, -1)]));
        assert!(!h(&[(1, 0), (0, 1), (2, 2)]));
    }

    #[test]
    fn separation_examples() {
        let a = convex_hull(&pts(&[(0, 0)])).unwrap();
        let b = convex_hull(&pts(&[(0, 1), (1, 1)])).unwrap();
        let h = separating_halfplane(&a, &b).unwrap();
        assert!(a.vertices().iter().all(|&v| h.contains(v)));
        assert!(b.vertices().iter().all(|&v| !h.contains(v)));

        let b = convex_hull(&pts(&[(5, 0)])).unwrap();
        let h = separating_halfplane(&a, &b).unwrap();
        assert_eq!(h.normal, IntVec2::new(1, 0));
        assert!(h.threshold > Ratio::from_integer(0) && h.threshold < Ratio::from_integer(5));

        let b = convex_hull(&pts(&[(0, 0), (3, 3)])).unwrap();
        assert!(matches!(separating_halfplane(&a, &b), Err(Error::NotSeparable)));
    }

    #[test]
    fn nice_vector_examples() {
        let hull = convex_hull(&pts(&[(0, 1), (1, 1)])).unwrap();
        let v = nice_vector(&hull).unwrap();
        assert!(v.vec() == IntVec2::new(1, 0) || v.vec() == IntVec2::new(-1, 0));

        let hull = convex_hull(&pts(&[(3, 0)])).unwrap();
        let v = nice_vector(&hull).unwrap();
        assert!(v.vec() == IntVec2::new(0, 1) || v.vec() == IntVec2::new(0, -1));

        let hull = convex_hull(&pts(&[(-1, 0), (1, 0)])).unwrap();
        assert!(matches!(nice_vector(&hull), Err(Error::OriginInHull)));
    }

    #[test]
    fn normalize_examples() {
        let n = normalize_growth_set(&pts(&[(0, 1), (1, 1)])).unwrap();
        assert_eq!(n.basis, [[-1, 0], [0, 1]]);
        assert_eq!(n.map.shear_power, 1);
        assert_eq!(n.image, pts(&[(1, 1), (0, 1)]));
        assert_eq!(n.map.det().abs(), 1);

        let n = normalize_growth_set(&pts(&[(0, 1)])).unwrap();
        assert_eq!(n.image, pts(&[(0, 1)]));
        assert_eq!(n.map.shear_power, 0);

        assert!(matches!(
            normalize_growth_set(&pts(&[(-1, 0), (1, 0)])),
            Err(Error::OriginInHull)
        ));
    }
}
