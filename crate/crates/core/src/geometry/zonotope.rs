use num_rational::Ratio;

use super::{Direction, IntVec2, LatticePolygon};

/// Smallest `m >= 0` with `m * |g| >= len`, decided exactly on squares.
fn ceil_ratio_over_norm(len: Ratio<i64>, g: IntVec2) -> i64 {
    let (p, q) = (*len.numer(), *len.denom());
    if p <= 0 {
        return 0;
    }
    let n2 = g.norm_sq() as i128;
    let (p2, q2) = ((p as i128) * (p as i128), (q as i128) * (q as i128));
    let mut m = ((p as f64 / q as f64) / (n2 as f64).sqrt()).floor().max(0.0) as i64;
    while (m as i128) * (m as i128) * n2 * q2 < p2 {
        m += 1;
    }
    while m > 0 && ((m - 1) as i128) * ((m - 1) as i128) * n2 * q2 >= p2 {
        m -= 1;
    }
    m
}

/// Centrally symmetric lattice polygon whose faces are parallel or
/// antiparallel to the given directions, each strictly longer than
/// `min_face_length`.
///
/// One generator per antipodal class, all scaled by
/// `k = ceil(min_face_length / min generator norm) + 1`. A perpendicular
/// generator is added when only one class is present; the empty input gives
/// an axis-aligned square.
pub fn build_zonotope(directions: &[Direction], min_face_length: Ratio<i64>) -> LatticePolygon {
    // canonical representative of each antipodal class: angle in [0, pi)
    let mut gens: Vec<Direction> = directions
        .iter()
        .map(|&d| {
            let v = d.vec();
            if v.y > 0 || (v.y == 0 && v.x > 0) {
                d
            } else {
                d.antipode()
            }
        })
        .collect();
    gens.sort();
    gens.dedup();
    match gens.len() {
        0 => {
            gens.push(Direction::new(1, 0).unwrap());
            gens.push(Direction::new(0, 1).unwrap());
        }
        1 => {
            let p = gens[0].rot_ccw();
            let p = if p.vec().y > 0 || (p.vec().y == 0 && p.vec().x > 0) { p } else { p.antipode() };
            gens.push(p);
            gens.sort();
        }
        _ => {}
    }
    let shortest = gens.iter().min_by_key(|g| g.vec().norm_sq()).unwrap().vec();
    let k = ceil_ratio_over_norm(min_face_length, shortest) + 1;
    let mut vertices = Vec::with_capacity(2 * gens.len());
    let mut p = IntVec2::ZERO;
    for g in &gens {
        vertices.push(p);
        p = p + g.vec() * k;
    }
    for g in &gens {
        vertices.push(p);
        p = p - g.vec() * k;
    }
    debug_assert_eq!(p, IntVec2::ZERO);
    LatticePolygon::from_ccw_vertices(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::convex_hull;
    use proptest::prelude::*;

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(x, y).unwrap()
    }

    fn square(side: i64) -> Vec<IntVec2> {
        vec![
            IntVec2::new(0, 0),
            IntVec2::new(side, 0),
            IntVec2::new(side, side),
            IntVec2::new(0, side),
        ]
    }

    #[test]
    fn single_direction_gives_square_of_side_three() {
        let z = build_zonotope(&[d(1, 0)], Ratio::from_integer(2));
        assert_eq!(z.vertices(), &square(3)[..]);
    }

    #[test]
    fn axis_pair_gives_two_square() {
        let z = build_zonotope(&[d(1, 0), d(0, 1)], Ratio::from_integer(1));
        assert_eq!(z.vertices(), &square(2)[..]);
        let z = build_zonotope(&[], Ratio::from_integer(1));
        assert_eq!(z.vertices(), &square(2)[..]);
    }

    #[test]
    fn vertices_are_the_hull() {
        let z = build_zonotope(&[d(1, 2), d(-3, 1), d(1, -2)], Ratio::new(7, 2));
        let hull = convex_hull(z.vertices()).unwrap();
        assert_eq!(hull.vertices().len(), z.vertices().len());
    }

    proptest! {
        #[test]
        fn every_direction_has_long_parallel_and_antiparallel_faces(
            raw in prop::collection::vec((-6i64..=6, -6i64..=6), 1..5),
            num in 1i64..40, den in 1i64..5,
        ) {
            let dirs: Vec<Direction> = raw.into_iter().filter(|&(x, y)| (x, y) != (0, 0))
                .map(|(x, y)| d(x, y)).collect();
            let len = Ratio::new(num, den);
            let z = build_zonotope(&dirs, len);
            let edges = z.edges();
            let l2 = len * len;
            for e in &edges {
                prop_assert!(Ratio::from_integer(e.norm_sq()) > l2);
            }
            for dir in &dirs {
                for target in [*dir, dir.antipode()] {
                    prop_assert!(edges.iter().any(|e| Direction::from_vec(*e).unwrap() == target));
                }
            }
        }
    }
}
