//! Finite unions of circular arcs with rational endpoints.
//!
//! A set is stored as its sorted breakpoints together with the membership of
//! each breakpoint and of each open gap between consecutive breakpoints. The
//! representation is canonical: a breakpoint is kept only if its membership
//! differs from one of the two adjacent gaps.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{Direction, IntVec2};

/// A maximal connected piece of an [`ArcSet`], traversed counterclockwise
/// from `start` to `end`.
///
/// `start == end` with both endpoints closed is a single point; with both
/// endpoints open it is the circle minus that point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arc {
    Full,
    Span {
        start: Direction,
        end: Direction,
        start_closed: bool,
        end_closed: bool,
    },
}

/// Exact comparison of an arc's angular length against pi.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LengthVsPi {
    Less,
    Equal,
    Greater,
}

impl Arc {
    pub fn length_vs_pi(&self) -> LengthVsPi {
        match *self {
            Arc::Full => LengthVsPi::Greater,
            Arc::Span { start, end, start_closed, .. } => {
                if start == end {
                    if start_closed {
                        LengthVsPi::Less
                    } else {
                        LengthVsPi::Greater
                    }
                } else {
                    match start.vec().cross(end.vec()) {
                        c if c > 0 => LengthVsPi::Less,
                        0 => LengthVsPi::Equal,
                        _ => LengthVsPi::Greater,
                    }
                }
            }
        }
    }

    /// True if the arc contains some open semicircle.
    pub fn contains_open_semicircle(&self) -> bool {
        self.length_vs_pi() != LengthVsPi::Less
    }

    /// True if the arc contains some closed semicircle.
    pub fn contains_closed_semicircle(&self) -> bool {
        match *self {
            Arc::Full => true,
            Arc::Span { start_closed, end_closed, .. } => match self.length_vs_pi() {
                LengthVsPi::Greater => true,
                LengthVsPi::Equal => start_closed && end_closed,
                LengthVsPi::Less => false,
            },
        }
    }
}

impl Serialize for Arc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Arc::Full => s.serialize_str("full"),
            Arc::Span { start, end, start_closed, end_closed } => {
                let mut st = s.serialize_struct("Arc", 4)?;
                st.serialize_field("start", &start)?;
                st.serialize_field("end", &end)?;
                st.serialize_field("start_closed", &start_closed)?;
                st.serialize_field("end_closed", &end_closed)?;
                st.end()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcSet {
    /// Breakpoints in angular order with point membership.
    points: Vec<(Direction, bool)>,
    /// `gaps[i]` is the membership of the open arc from `points[i]` to
    /// `points[i + 1]` (cyclically). With no breakpoints, `gaps` holds one
    /// entry for the whole circle.
    gaps: Vec<bool>,
}

impl ArcSet {
    pub fn empty() -> Self {
        ArcSet { points: Vec::new(), gaps: vec![false] }
    }

    pub fn full() -> Self {
        ArcSet { points: Vec::new(), gaps: vec![true] }
    }

    pub fn point(d: Direction) -> Self {
        ArcSet { points: vec![(d, true)], gaps: vec![false] }
    }

    /// Counterclockwise arc from `start` to `end`.
    pub fn arc(start: Direction, end: Direction, start_closed: bool, end_closed: bool) -> Self {
        if start == end {
            let s = if start_closed || end_closed {
                ArcSet::full()
            } else {
                ArcSet { points: vec![(start, false)], gaps: vec![true] }
            };
            return s.normalized();
        }
        let mut s = if start < end {
            ArcSet { points: vec![(start, start_closed), (end, end_closed)], gaps: vec![true, false] }
        } else {
            ArcSet { points: vec![(end, end_closed), (start, start_closed)], gaps: vec![false, true] }
        };
        s = s.normalized();
        s
    }

    /// The open half-circle `{v : v . normal < 0}`.
    pub fn open_half_circle(normal: IntVec2) -> Self {
        let d = Direction::from_vec(normal).expect("nonzero normal");
        ArcSet::arc(d.rot_ccw(), d.rot_cw(), false, false)
    }

    pub fn from_arc(a: &Arc) -> Self {
        match *a {
            Arc::Full => ArcSet::full(),
            Arc::Span { start, end, start_closed, end_closed } => {
                if start == end && start_closed && end_closed {
                    ArcSet::point(start)
                } else {
                    ArcSet::arc(start, end, start_closed, end_closed)
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && !self.gaps[0]
    }

    pub fn is_full(&self) -> bool {
        self.points.is_empty() && self.gaps[0]
    }

    /// Membership of the open interval immediately counterclockwise of `d`.
    fn after(&self, d: Direction) -> bool {
        if self.points.is_empty() {
            return self.gaps[0];
        }
        // last breakpoint <= d, cyclically
        let idx = self.points.partition_point(|(p, _)| *p <= d);
        if idx == 0 {
            self.gaps[self.points.len() - 1]
        } else {
            self.gaps[idx - 1]
        }
    }

    pub fn contains(&self, d: Direction) -> bool {
        match self.points.binary_search_by(|(p, _)| p.cmp(&d)) {
            Ok(i) => self.points[i].1,
            Err(_) => self.after(d),
        }
    }

    fn normalized(mut self) -> Self {
        loop {
            let k = self.points.len();
            if k == 0 {
                return self;
            }
            let drop = (0..k).find(|&i| {
                let before = self.gaps[(i + k - 1) % k];
                let after = self.gaps[i];
                self.points[i].1 == before && before == after
            });
            let Some(i) = drop else { return self };
            if k == 1 {
                let v = self.gaps[0];
                return ArcSet { points: Vec::new(), gaps: vec![v] };
            }
            // merging gap i-1 and gap i (equal values): remove point i and gap i
            self.points.remove(i);
            self.gaps.remove(i);
        }
    }

    fn combine(&self, other: &ArcSet, op: impl Fn(bool, bool) -> bool) -> ArcSet {
        let mut bps: Vec<Direction> = self
            .points
            .iter()
            .chain(other.points.iter())
            .map(|(d, _)| *d)
            .collect();
        bps.sort();
        bps.dedup();
        if bps.is_empty() {
            return ArcSet { points: Vec::new(), gaps: vec![op(self.gaps[0], other.gaps[0])] };
        }
        let points = bps
            .iter()
            .map(|&d| (d, op(self.contains(d), other.contains(d))))
            .collect();
        let gaps = bps.iter().map(|&d| op(self.after(d), other.after(d))).collect();
        ArcSet { points, gaps }.normalized()
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &ArcSet) -> ArcSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> ArcSet {
        ArcSet {
            points: self.points.iter().map(|&(d, m)| (d, !m)).collect(),
            gaps: self.gaps.iter().map(|g| !g).collect(),
        }
    }

    pub fn interior(&self) -> ArcSet {
        let k = self.points.len();
        let points = (0..k)
            .map(|i| {
                let (d, m) = self.points[i];
                (d, m && self.gaps[(i + k - 1) % k] && self.gaps[i])
            })
            .collect();
        ArcSet { points, gaps: self.gaps.clone() }.normalized()
    }

    pub fn closure(&self) -> ArcSet {
        self.complement().interior().complement()
    }

    /// Image under `v -> -v`.
    pub fn negate(&self) -> ArcSet {
        if self.points.is_empty() {
            return self.clone();
        }
        let k = self.points.len();
        let mut items: Vec<(Direction, bool, bool)> = (0..k)
            .map(|i| (self.points[i].0.antipode(), self.points[i].1, self.gaps[i]))
            .collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));
        ArcSet {
            points: items.iter().map(|&(d, m, _)| (d, m)).collect(),
            gaps: items.iter().map(|&(_, _, g)| g).collect(),
        }
    }

    /// Maximal arcs in counterclockwise order, starting from the first
    /// breakpoint at or after angle 0 that begins a component.
    pub fn arcs(&self) -> Vec<Arc> {
        if self.points.is_empty() {
            return if self.gaps[0] { vec![Arc::Full] } else { Vec::new() };
        }
        let k = self.points.len();
        // Cyclic sequence: point 0, gap 0, point 1, gap 1, ...
        let elem = |j: usize| -> bool {
            let j = j % (2 * k);
            if j % 2 == 0 {
                self.points[j / 2].1
            } else {
                self.gaps[j / 2]
            }
        };
        let all_true = (0..2 * k).all(elem);
        if all_true {
            return vec![Arc::Full];
        }
        let start_idx = (0..2 * k).find(|&j| !elem(j)).unwrap();
        let mut out = Vec::new();
        let mut j = start_idx + 1;
        let end_idx = start_idx + 2 * k;
        while j < end_idx {
            if !elem(j) {
                j += 1;
                continue;
            }
            let run_start = j;
            while j < end_idx && elem(j) {
                j += 1;
            }
            let run_end = j - 1;
            let (start, start_closed) = if run_start % 2 == 0 {
                (self.points[(run_start % (2 * k)) / 2].0, true)
            } else {
                (self.points[(run_start % (2 * k)) / 2].0, false)
            };
            let (end, end_closed) = if run_end % 2 == 0 {
                (self.points[(run_end % (2 * k)) / 2].0, true)
            } else {
                (self.points[((run_end % (2 * k)) / 2 + 1) % k].0, false)
            };
            out.push(Arc::Span { start, end, start_closed, end_closed });
        }
        out.sort_by(|a, b| match (a, b) {
            (Arc::Span { start: s1, .. }, Arc::Span { start: s2, .. }) => s1.cmp(s2),
            _ => std::cmp::Ordering::Equal,
        });
        out
    }

    /// True if some maximal arc of the complement has angular length >= pi,
    /// i.e. the complement contains an open semicircle.
    pub fn max_gap_at_least_pi(&self) -> bool {
        self.complement().arcs().iter().any(Arc::contains_open_semicircle)
    }

    pub fn contains_closed_semicircle_in_complement(&self) -> bool {
        self.complement().arcs().iter().any(Arc::contains_closed_semicircle)
    }

    /// Some maximal arc of the set itself contains an open semicircle.
    pub fn contains_open_semicircle(&self) -> bool {
        self.arcs().iter().any(Arc::contains_open_semicircle)
    }
}

impl Serialize for ArcSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.arcs().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(x, y).unwrap()
    }

    #[test]
    fn complement_of_full_is_empty() {
        assert!(ArcSet::full().complement().is_empty());
        assert!(ArcSet::empty().complement().is_full());
    }

    #[test]
    fn interior_of_closed_arc_is_open_arc() {
        let closed = ArcSet::arc(d(1, 0), d(0, 1), true, true);
        let open = ArcSet::arc(d(1, 0), d(0, 1), false, false);
        assert_eq!(closed.interior(), open);
        assert_eq!(
            open.arcs(),
            vec![Arc::Span { start: d(1, 0), end: d(0, 1), start_closed: false, end_closed: false }]
        );
    }

    #[test]
    fn three_quarter_arc_has_small_complement_gap() {
        // open arc from (0,1) counterclockwise to (1,0): length 3pi/2
        let a = ArcSet::arc(d(0, 1), d(1, 0), false, false);
        assert_eq!(a.arcs()[0].length_vs_pi(), LengthVsPi::Greater);
        assert!(!a.max_gap_at_least_pi());
        assert!(a.complement().max_gap_at_least_pi());
    }

    #[test]
    fn semicircle_queries() {
        let half = ArcSet::open_half_circle(IntVec2::new(1, 1));
        assert!(half.contains(d(-1, 0)));
        assert!(!half.contains(d(1, -1)));
        assert!(!half.contains(d(1, 0)));
        assert_eq!(half.arcs()[0].length_vs_pi(), LengthVsPi::Equal);
        assert!(half.contains_open_semicircle());
        // complement is a closed semicircle
        assert!(half.complement().arcs()[0].contains_closed_semicircle());
        assert!(!half.arcs()[0].contains_closed_semicircle());
        assert!(half.contains_closed_semicircle_in_complement());
    }

    #[test]
    fn point_and_punctured_circle() {
        let p = ArcSet::point(d(0, 1));
        assert_eq!(p.arcs().len(), 1);
        let punct = p.complement();
        assert_eq!(
            punct.arcs(),
            vec![Arc::Span { start: d(0, 1), end: d(0, 1), start_closed: false, end_closed: false }]
        );
        assert_eq!(punct.arcs()[0].length_vs_pi(), LengthVsPi::Greater);
        assert!(p.max_gap_at_least_pi());
        assert_eq!(ArcSet::from_arc(&punct.arcs()[0]), punct);
    }

    #[test]
    fn wrapping_arc() {
        let a = ArcSet::arc(d(0, -1), d(0, 1), true, false);
        assert!(a.contains(d(1, 0)));
        assert!(a.contains(d(0, -1)));
        assert!(!a.contains(d(0, 1)));
        assert!(!a.contains(d(-1, 0)));
        assert_eq!(
            a.arcs(),
            vec![Arc::Span { start: d(0, -1), end: d(0, 1), start_closed: true, end_closed: false }]
        );
    }

    fn prim_dirs() -> Vec<Direction> {
        Direction::all_within_norm(10)
    }

    fn arb_arcset() -> impl Strategy<Value = ArcSet> {
        let n = prim_dirs().len();
        prop::collection::vec((0..n, 0..n, any::<bool>(), any::<bool>()), 0..4).prop_map(move |v| {
            let dirs = prim_dirs();
            v.into_iter().fold(ArcSet::empty(), |acc, (i, j, a, b)| {
                acc.union(&ArcSet::arc(dirs[i], dirs[j], a, b))
            })
        })
    }

    proptest! {
        #[test]
        fn de_morgan_and_idempotence(a in arb_arcset(), b in arb_arcset()) {
            prop_assert_eq!(a.union(&b).complement(), a.complement().intersect(&b.complement()));
            prop_assert_eq!(a.intersect(&b).complement(), a.complement().union(&b.complement()));
            prop_assert_eq!(a.union(&a), a.clone());
            prop_assert_eq!(a.intersect(&a), a.clone());
            prop_assert_eq!(a.complement().complement(), a.clone());
            prop_assert_eq!(a.interior().interior(), a.interior());
        }

        #[test]
        fn arcs_roundtrip_and_membership(a in arb_arcset()) {
            let rebuilt = a.arcs().iter().fold(ArcSet::empty(), |acc, arc| acc.union(&ArcSet::from_arc(arc)));
            prop_assert_eq!(&rebuilt, &a);
            for dir in Direction::all_within_norm(4) {
                prop_assert_eq!(a.negate().contains(dir), a.contains(dir.antipode()));
            }
        }
    }
}
