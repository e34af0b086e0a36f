//! Criticality classification of binary freezing monotone rules by arcs of
//! stable directions, obstacle construction and the dual condition.

use num_rational::Ratio;
use serde::Serialize;

use crate::engine::{check_fixed_point_family, step, Boundary, Window};
use crate::error::{Error, Result};
use crate::geometry::{build_zonotope, convex_hull, Arc, ArcSet, Direction, IntVec2};
use crate::rules::{rule_from_family, split_fg, Alphabet, NeighborFamily, NeighborSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CriticalityTag {
    StronglySubcritical,
    WeaklySubcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for CriticalityTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Finite zero set fixed by the rule.
    Obstacle(Vec<IntVec2>),
    /// Maximal arc of unstable directions containing an open semicircle.
    UnstableArc(Arc),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Criticality {
    pub tag: CriticalityTag,
    #[serde(rename = "stable_arcs")]
    pub stable_set: ArcSet,
    #[serde(rename = "strongly_stable_arcs")]
    pub strongly_stable_set: ArcSet,
    pub witness: Option<Witness>,
}

/// Directions `v` with `n . v < 0` for every `n` in the set; empty exactly
/// when the origin lies in the hull.
pub fn unstable_arc(n_set: &NeighborSet) -> ArcSet {
    n_set
        .cells()
        .iter()
        .fold(ArcSet::full(), |acc, &n| acc.intersect(&ArcSet::open_half_circle(n)))
}

/// Union of the unstable arcs of all member sets.
pub fn unstable_set(e: &NeighborFamily) -> ArcSet {
    e.sets().iter().fold(ArcSet::empty(), |acc, s| acc.union(&unstable_arc(s)))
}

pub fn is_stable_direction(e: &NeighborFamily, v: Direction) -> bool {
    !e.sets().iter().any(|s| s.cells().iter().all(|n| n.dot(v.vec()) < 0))
}

/// Steps the rule once on a window holding the half-plane configuration
/// (1 where `z . v < 0`) and reports whether the exact region is unchanged.
pub fn halfplane_fixed_by_simulation(e: &NeighborFamily, v: Direction) -> bool {
    let r = e.radius().max(1) as usize;
    let half = (v.x().abs() + v.y().abs()) as usize + 2 * r + 2;
    let side = 2 * half + 1;
    let w = Window::from_fn(side, side, &Alphabet::binary(), Boundary::Zero, |i, j| {
        let z = IntVec2::new(i as i64 - half as i64, j as i64 - half as i64);
        (z.dot(v.vec()) < 0) as u8
    });
    let next = step(&w, &rule_from_family(e)).expect("binary window");
    next.exact_region().cells().all(|(i, j)| next.get(i as usize, j as usize) == w.get(i as usize, j as usize))
}

pub fn classify(e: &NeighborFamily) -> Criticality {
    let unstable = unstable_set(e);
    let stable = unstable.complement();
    let strongly = stable.interior();
    let no_f = split_fg(e).f_sets.is_empty();
    assert_eq!(unstable.is_empty(), no_f, "arc test and hull test disagree for {e:?}");
    let (tag, witness) = if unstable.is_empty() {
        let c = obstacle_for(e).expect("strongly subcritical family admits an obstacle");
        (CriticalityTag::StronglySubcritical, Some(Witness::Obstacle(c)))
    } else if stable.max_gap_at_least_pi() {
        let arc = unstable.arcs().into_iter().find(Arc::contains_open_semicircle).expect("long unstable arc");
        (CriticalityTag::Supercritical, Some(Witness::UnstableArc(arc)))
    } else if !strongly.max_gap_at_least_pi() {
        (CriticalityTag::WeaklySubcritical, None)
    } else {
        (CriticalityTag::Critical, None)
    };
    Criticality { tag, stable_set: stable, strongly_stable_set: strongly, witness }
}

fn obstacle_for(e: &NeighborFamily) -> Result<Vec<IntVec2>> {
    let mut dirs = Vec::new();
    let mut diam_sq = 0i64;
    for s in e.sets() {
        let hull = convex_hull(s.cells())?;
        dirs.extend(hull.face_directions());
        diam_sq = diam_sq.max(hull.diameter_sq());
    }
    let len = Ratio::from_integer(ceil_sqrt(diam_sq));
    let c = build_zonotope(&dirs, len).lattice_points();
    if c.is_empty() || !check_fixed_point_family(&c, e) {
        return Err(Error::ObstacleVerificationFailed);
    }
    Ok(c)
}

fn ceil_sqrt(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// Finite zero set `C` whose configuration is fixed by `f_E`.
pub fn build_obstacle(e: &NeighborFamily) -> Result<Vec<IntVec2>> {
    if !split_fg(e).f_sets.is_empty() {
        return Err(Error::NotStronglySubcritical);
    }
    obstacle_for(e)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualCondition {
    pub holds: bool,
    pub witness: Option<(IntVec2, IntVec2)>,
}

/// `G = empty` and some independent `n, m` with every set containing
/// `{n, m}` or `{-n, -m}`.
pub fn dual_noneven_condition(e: &NeighborFamily) -> DualCondition {
    let fail = DualCondition { holds: false, witness: None };
    if !split_fg(e).g_sets.is_empty() {
        return fail;
    }
    if e.is_empty() {
        return DualCondition { holds: true, witness: Some((IntVec2::new(1, 0), IntVec2::new(0, 1))) };
    }
    let upper = |v: &IntVec2| v.y > 0 || (v.y == 0 && v.x > 0);
    let mut cand: Vec<IntVec2> = crate::rules::support(e).into_iter().collect();
    cand.sort_by_key(|v| (!upper(v), *v));
    for (a, &n) in cand.iter().enumerate() {
        for &m in &cand[a + 1..] {
            if n.cross(m) == 0 {
                continue;
            }
            let ok = e.sets().iter().all(|s| (s.contains(n) && s.contains(m)) || (s.contains(-n) && s.contains(-m)));
            if ok {
                return DualCondition { holds: true, witness: Some((n, m)) };
            }
        }
    }
    fail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::canonicalize_family;

    fn fam(sets: &[&[(i64, i64)]]) -> NeighborFamily {
        canonicalize_family(sets.iter().map(|s| s.iter().map(|&p| p.into()).collect()).collect()).unwrap()
    }

    fn set(cells: &[(i64, i64)]) -> NeighborSet {
        NeighborSet::new(cells.iter().map(|&p| p.into())).unwrap()
    }

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(x, y).unwrap()
    }

    fn von_neumann_pairs() -> NeighborFamily {
        let vn = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        let mut sets: Vec<Vec<IntVec2>> = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                sets.push(vec![vn[a].into(), vn[b].into()]);
            }
        }
        canonicalize_family(sets).unwrap()
    }

    #[test]
    fn unstable_arc_examples() {
        let a = unstable_arc(&set(&[(1, 1)]));
        assert_eq!(a, ArcSet::arc(d(-1, 1), d(1, -1), false, false));
        assert!(a.contains(d(-1, -1)));
        let a = unstable_arc(&set(&[(0, 1), (1, 1)]));
        assert_eq!(a, ArcSet::arc(d(-1, 0), d(1, -1), false, false));
        assert!(a.contains(d(0, -1)));
        assert!(unstable_arc(&set(&[(-1, 0), (1, 0)])).is_empty());
    }

    #[test]
    fn stable_direction_examples() {
        let h = fam(&[&[(0, 1), (1, 1)]]);
        assert!(is_stable_direction(&h, d(1, 0)));
        assert!(!is_stable_direction(&h, d(0, -1)));
        let g = fam(&[&[(-1, 0), (1, 0)]]);
        assert!(Direction::all_within_norm(5).into_iter().all(|v| is_stable_direction(&g, v)));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&fam(&[&[(1, 1)]]));
        assert_eq!(c.tag, CriticalityTag::Supercritical);
        assert!(matches!(c.witness, Some(Witness::UnstableArc(_))));
        assert_eq!(classify(&fam(&[&[(0, 1), (1, 1)]])).tag, CriticalityTag::WeaklySubcritical);
        let c = classify(&von_neumann_pairs());
        assert_eq!(c.tag, CriticalityTag::Critical);
        assert!(c.strongly_stable_set.is_empty());
        assert_eq!(c.stable_set.arcs().len(), 4);
        let c = classify(&fam(&[&[(-1, 0), (1, 0)]]));
        assert_eq!(c.tag, CriticalityTag::StronglySubcritical);
        assert_eq!(classify(&NeighborFamily::default()).tag, CriticalityTag::StronglySubcritical);
    }

    #[test]
    fn three_way_agreement_on_canonical_families() {
        let families = [fam(&[&[(1, 1)]]), fam(&[&[(0, 1), (1, 1)]]), von_neumann_pairs(), fam(&[&[(-1, 0), (1, 0)]])];
        for e in &families {
            let u = unstable_set(e);
            for v in Direction::all_within_norm(13) {
                let a = is_stable_direction(e, v);
                assert_eq!(a, !u.contains(v));
                assert_eq!(a, halfplane_fixed_by_simulation(e, v), "{e:?} {v}");
            }
        }
    }

    #[test]
    fn obstacle_examples() {
        let c = build_obstacle(&fam(&[&[(-1, 0), (1, 0)]])).unwrap();
        let mut want: Vec<IntVec2> = (0..4).flat_map(|y| (0..4).map(move |x| IntVec2::new(x, y))).collect();
        let mut got = c.clone();
        got.sort();
        want.sort();
        assert_eq!(got, want);
        let e = fam(&[&[(-1, 0), (1, 0)], &[(0, -1), (0, 1)]]);
        let c = build_obstacle(&e).unwrap();
        assert!(check_fixed_point_family(&c, &e));
        assert!(c.len() >= 16);
        assert!(matches!(build_obstacle(&fam(&[&[(1, 1)]])), Err(Error::NotStronglySubcritical)));
    }

    #[test]
    fn dual_condition_examples() {
        let r = dual_noneven_condition(&fam(&[&[(0, 1), (1, 1)]]));
        assert_eq!(r.witness, Some((IntVec2::new(0, 1), IntVec2::new(1, 1))));
        let r = dual_noneven_condition(&fam(&[&[(0, 1), (1, 1)], &[(0, -1), (-1, -1)]]));
        assert_eq!(r.witness, Some((IntVec2::new(0, 1), IntVec2::new(1, 1))));
        assert!(!dual_noneven_condition(&fam(&[&[(-1, 0), (1, 0)]])).holds);
        assert!(!dual_noneven_condition(&fam(&[&[(0, 1)], &[(1, 0)]])).holds);
    }

    #[test]
    fn negation_symmetry() {
        for e in [fam(&[&[(1, 1)]]), fam(&[&[(0, 1), (1, 1)]]), fam(&[&[(2, 1), (1, -1)], &[(0, -1)]])] {
            assert_eq!(unstable_set(&e.negated()), unstable_set(&e).negate());
            assert_eq!(classify(&e.negated()).tag, classify(&e).tag);
        }
    }
}
