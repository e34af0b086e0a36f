//! Rule representations: neighbor families for binary freezing monotone
//! automata and a general finite-alphabet local rule interface.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, hull_contains_origin, IntVec2};
use crate::grid::{Grid, Rect};

/// Partial order on a finite state set used by the freezing validator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateOrder {
    /// `0 < 1 < ... < n-1`.
    Chain,
    /// Distinct states are incomparable except that every state is below `top`.
    FlatWithTop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    top: u8,
    order: StateOrder,
}

impl Alphabet {
    pub fn binary() -> Self {
        Alphabet { names: vec!["0".into(), "1".into()], top: 1, order: StateOrder::Chain }
    }

    pub fn flat(names: Vec<String>, top: u8) -> Self {
        assert!((top as usize) < names.len() && names.len() <= 256);
        Alphabet { names, top, order: StateOrder::FlatWithTop }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.names.len() == 2 && self.order == StateOrder::Chain
    }

    /// The designated maximal state.
    pub fn top(&self) -> u8 {
        self.top
    }

    pub fn name(&self, s: u8) -> &str {
        &self.names[s as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<u8> {
        self.names.iter().position(|n| n == name).map(|i| i as u8)
    }

    pub fn le(&self, a: u8, b: u8) -> bool {
        match self.order {
            StateOrder::Chain => a <= b,
            StateOrder::FlatWithTop => a == b || b == self.top,
        }
    }
}

/// Offsets read by a rule, per axis, inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Reach {
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

impl Reach {
    pub fn symmetric(r: i64) -> Self {
        Reach { x_min: -r, x_max: r, y_min: -r, y_max: r }
    }

    /// Reach of applying `self` after `first`.
    pub fn then(self, first: Reach) -> Reach {
        Reach {
            x_min: self.x_min + first.x_min,
            x_max: self.x_max + first.x_max,
            y_min: self.y_min + first.y_min,
            y_max: self.y_max + first.y_max,
        }
    }

    /// Cells of `r` whose reads stay inside `r`.
    pub fn interior(&self, r: Rect) -> Rect {
        r.expand(self.x_min.min(0), -self.x_max.max(0), self.y_min.min(0), -self.y_max.max(0))
    }

    pub fn radius(&self) -> i64 {
        self.x_min.abs().max(self.x_max.abs()).max(self.y_min.abs()).max(self.y_max.abs())
    }
}

/// A local update rule. Implementations read neighbors relative to the cell
/// being updated; `radius` bounds the offsets read in the infinity norm.
pub trait LocalRule: Send + Sync {
    fn name(&self) -> String;
    fn alphabet(&self) -> &Alphabet;
    fn radius(&self) -> usize;

    /// New state of cell `(x, y)`; `src` covers at least the cell's
    /// radius-neighborhood.
    fn eval(&self, src: &Grid, x: i64, y: i64) -> u8;

    /// New states for every cell of `region`, row-major. `src` must cover
    /// `region` grown by the radius.
    fn step_region(&self, src: &Grid, region: Rect) -> Vec<u8> {
        region.cells().map(|(x, y)| self.eval(src, x, y)).collect()
    }

    /// Binary patches packed row-major into bits, bit `(dy + r)(2r + 1) + dx + r`.
    fn eval_mask(&self, mask: u64) -> u8 {
        let r = self.radius() as i64;
        let side = 2 * r + 1;
        let g = Grid::from_fn(Rect::new(-r, -r, side as usize, side as usize), |x, y| {
            ((mask >> ((y + r) * side + x + r)) & 1) as u8
        });
        self.eval(&g, 0, 0)
    }

    /// The neighbor family, when the rule is given by one.
    fn family(&self) -> Option<&NeighborFamily> {
        None
    }

    /// Offsets actually read; defaults to the radius square.
    fn reach(&self) -> Reach {
        Reach::symmetric(self.radius() as i64)
    }
}

/// Shared handle to a local rule.
#[derive(Clone)]
pub struct RuleKernel(Arc<dyn LocalRule>);

impl RuleKernel {
    pub fn new(rule: impl LocalRule + 'static) -> Self {
        RuleKernel(Arc::new(rule))
    }

    pub fn rule(&self) -> &dyn LocalRule {
        &*self.0
    }
}

impl std::ops::Deref for RuleKernel {
    type Target = dyn LocalRule;
    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl fmt::Debug for RuleKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RuleKernel({}, radius {})", self.0.name(), self.0.radius())
    }
}

/// Default bound on neighbor offsets accepted from user input.
pub const MAX_NEIGHBOR_RADIUS: i64 = 64;

/// Nonempty finite set of nonzero offsets, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<IntVec2>", into = "Vec<IntVec2>")]
pub struct NeighborSet(Vec<IntVec2>);

impl NeighborSet {
    pub fn new(cells: impl IntoIterator<Item = IntVec2>) -> Result<Self> {
        let mut v: Vec<IntVec2> = cells.into_iter().collect();
        v.sort();
        v.dedup();
        if v.is_empty() {
            return Err(Error::EmptySetMeansConstant);
        }
        for &c in &v {
            if c.is_zero() {
                return Err(Error::OriginInNeighborSet);
            }
            if c.norm_inf() > MAX_NEIGHBOR_RADIUS {
                return Err(Error::CellOutOfRange { cell: c, bound: MAX_NEIGHBOR_RADIUS });
            }
        }
        Ok(NeighborSet(v))
    }

    pub fn cells(&self) -> &[IntVec2] {
        &self.0
    }

    pub fn radius(&self) -> i64 {
        self.0.iter().map(|c| c.norm_inf()).max().unwrap_or(0)
    }

    pub fn is_subset(&self, other: &NeighborSet) -> bool {
        self.0.iter().all(|c| other.0.binary_search(c).is_ok())
    }

    pub fn contains(&self, c: IntVec2) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    /// Whether the origin lies in the closed convex hull.
    pub fn hull_contains_origin(&self) -> bool {
        hull_contains_origin(&convex_hull(&self.0).expect("nonempty"))
    }

    pub fn negated(&self) -> NeighborSet {
        NeighborSet::new(self.0.iter().map(|&c| -c)).expect("negation keeps validity")
    }
}

impl TryFrom<Vec<IntVec2>> for NeighborSet {
    type Error = Error;
    fn try_from(v: Vec<IntVec2>) -> Result<Self> {
        NeighborSet::new(v)
    }
}

impl From<NeighborSet> for Vec<IntVec2> {
    fn from(s: NeighborSet) -> Self {
        s.0
    }
}

/// Antichain of neighbor sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NeighborFamily(Vec<NeighborSet>);

impl NeighborFamily {
    pub fn sets(&self) -> &[NeighborSet] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn radius(&self) -> i64 {
        self.0.iter().map(|s| s.radius()).max().unwrap_or(0)
    }

    pub fn negated(&self) -> NeighborFamily {
        NeighborFamily(canonical_order(self.0.iter().map(|s| s.negated()).collect()))
    }

    /// Parses the `{"neighbor_sets": [[[dx,dy],...], ...]}` format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(text)?;
        canonicalize_family(file.neighbor_sets)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FamilyFile {
            neighbor_sets: self.0.iter().map(|s| s.cells().to_vec()).collect(),
        })
        .expect("serializable")
    }
}

impl Serialize for NeighborFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyFile { neighbor_sets: self.0.iter().map(|n| n.cells().to_vec()).collect() }.serialize(s)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    neighbor_sets: Vec<Vec<IntVec2>>,
}

fn canonical_order(mut sets: Vec<NeighborSet>) -> Vec<NeighborSet> {
    sets.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    sets
}

/// Validates the raw sets and removes every set that contains another.
pub fn canonicalize_family(raw: Vec<Vec<IntVec2>>) -> Result<NeighborFamily> {
    let sets = raw.into_iter().map(NeighborSet::new).collect::<Result<Vec<_>>>()?;
    let sets = canonical_order(sets);
    let mut kept: Vec<NeighborSet> = Vec::new();
    // sorted by size, so any subset of a set comes before it
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    Ok(NeighborFamily(kept))
}

/// `f_E`: a cell becomes 1 iff it is 1 or some member set is all-1 around it.
#[derive(Debug, Clone)]
pub struct FamilyRule {
    family: NeighborFamily,
    alphabet: Alphabet,
    radius: usize,
    masks: Vec<u64>,
}

impl FamilyRule {
    pub fn new(family: NeighborFamily) -> Self {
        let radius = family.radius() as usize;
        let r = radius as i64;
        let side = 2 * r + 1;
        let masks = if side * side <= 64 {
            family
                .sets()
                .iter()
                .map(|s| s.cells().iter().fold(0u64, |m, c| m | 1 << ((c.y + r) * side + c.x + r)))
                .collect()
        } else {
            Vec::new()
        };
        FamilyRule { family, alphabet: Alphabet::binary(), radius, masks }
    }
}

impl LocalRule for FamilyRule {
    fn name(&self) -> String {
        format!("family{}", self.family.to_json())
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn radius(&self) -> usize {
        self.radius
    }

    fn eval(&self, src: &Grid, x: i64, y: i64) -> u8 {
        if src.get(x, y) == 1 {
            return 1;
        }
        let fires = self
            .family
            .sets()
            .iter()
            .any(|s| s.cells().iter().all(|c| src.get(x + c.x, y + c.y) == 1));
        fires as u8
    }

    fn eval_mask(&self, mask: u64) -> u8 {
        let r = self.radius as u64;
        let center = r * (2 * r + 1) + r;
        if self.masks.len() != self.family.len() {
            // radius too large for packed masks; fall back to the grid path
            let side = 2 * self.radius as i64 + 1;
            let ri = self.radius as i64;
            let g = Grid::from_fn(Rect::new(-ri, -ri, side as usize, side as usize), |x, y| {
                ((mask >> ((y + ri) * side + x + ri)) & 1) as u8
            });
            return self.eval(&g, 0, 0);
        }
        if (mask >> center) & 1 == 1 {
            return 1;
        }
        self.masks.iter().any(|&m| mask & m == m) as u8
    }

    fn family(&self) -> Option<&NeighborFamily> {
        Some(&self.family)
    }
}

pub fn rule_from_family(e: &NeighborFamily) -> RuleKernel {
    RuleKernel::new(FamilyRule::new(e.clone()))
}

/// Largest radius accepted by [`family_from_rule`].
pub const MAX_EXTRACTION_RADIUS: usize = 2;

/// Bitset over `2^n` entries.
struct TruthTable {
    n: usize,
    words: Vec<u64>,
}

impl TruthTable {
    fn build(n: usize, mut f: impl FnMut(u64) -> bool) -> Self {
        let total = 1u64 << n;
        let mut words = vec![0u64; ((total + 63) / 64) as usize];
        for s in 0..total {
            if f(s) {
                words[(s / 64) as usize] |= 1 << (s % 64);
            }
        }
        TruthTable { n, words }
    }

    fn get(&self, s: u64) -> bool {
        (self.words[(s / 64) as usize] >> (s % 64)) & 1 == 1
    }

    /// Returns the first `S` with `t[S \ i] && !t[S]`, if any.
    fn monotone_violation(&self) -> Option<(u64, usize)> {
        for i in 0..self.n {
            if let Some(s) = self.scan_var(i, |lower, upper| lower & !upper) {
                return Some((s, i));
            }
        }
        None
    }

    /// Sets `S` with `t[S]` and `!t[S \ i]` for every `i in S`.
    fn minimal_points(&self) -> Vec<u64> {
        let mut minimal = self.words.clone();
        let total = 1u64 << self.n;
        if total < 64 {
            minimal[0] &= (1u64 << total) - 1;
        }
        for i in 0..self.n {
            if i < 6 {
                let shift = 1u32 << i;
                let upper_mask = var_mask(i);
                for (w, m) in self.words.iter().zip(minimal.iter_mut()) {
                    *m &= !((w << shift) & upper_mask);
                }
            } else {
                let stride = 1usize << (i - 6);
                for j in 0..self.words.len() {
                    if j & stride != 0 {
                        minimal[j] &= !self.words[j - stride];
                    }
                }
            }
        }
        let mut out = Vec::new();
        for (j, &w) in minimal.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                out.push(j as u64 * 64 + b);
                w &= w - 1;
            }
        }
        out
    }

    fn scan_var(&self, i: usize, viol: impl Fn(u64, u64) -> u64) -> Option<u64> {
        let total = 1u64 << self.n;
        let valid = if total < 64 { (1u64 << total) - 1 } else { u64::MAX };
        if i < 6 {
            let shift = 1u32 << i;
            let upper_mask = var_mask(i) & valid;
            for (j, &w) in self.words.iter().enumerate() {
                let bad = viol(w << shift, w) & upper_mask;
                if bad != 0 {
                    return Some(j as u64 * 64 + bad.trailing_zeros() as u64);
                }
            }
        } else {
            let stride = 1usize << (i - 6);
            for j in 0..self.words.len() {
                if j & stride != 0 {
                    let bad = viol(self.words[j - stride], self.words[j]);
                    if bad != 0 {
                        return Some(j as u64 * 64 + bad.trailing_zeros() as u64);
                    }
                }
            }
        }
        None
    }
}

/// Bits of a 64-bit word whose index has bit `i` set (`i < 6`).
fn var_mask(i: usize) -> u64 {
    (0..64u64).filter(|b| (b >> i) & 1 == 1).fold(0, |m, b| m | 1 << b)
}

/// Inserts a zero bit at position `pos`.
fn spread(s: u64, pos: u32) -> u64 {
    let low = s & ((1u64 << pos) - 1);
    let high = s >> pos;
    low | (high << (pos + 1))
}

/// Recovers the minimal neighbor family of a binary freezing monotone kernel
/// by exhaustive evaluation over its patch lattice.
pub fn family_from_rule(k: &RuleKernel) -> Result<NeighborFamily> {
    if !k.alphabet().is_binary() {
        return Err(Error::NotMonotoneFreezing("alphabet is not binary".into()));
    }
    let r = k.radius();
    if r > MAX_EXTRACTION_RADIUS {
        return Err(Error::RadiusTooLarge { radius: r, max: MAX_EXTRACTION_RADIUS });
    }
    let side = 2 * r as i64 + 1;
    let m = (side * side) as usize;
    let center = (r as i64 * side + r as i64) as u32;
    let n = m - 1;
    for s in 0..(1u64 << n) {
        if k.eval_mask(spread(s, center) | 1 << center) != 1 {
            return Err(Error::NotMonotoneFreezing(format!(
                "center 1 decreases on patch {:#x}",
                spread(s, center) | 1 << center
            )));
        }
    }
    let table = TruthTable::build(n, |s| k.eval_mask(spread(s, center)) == 1);
    if let Some((s, i)) = table.monotone_violation() {
        return Err(Error::NotMonotoneFreezing(format!(
            "adding cell {} to patch {:#x} turns the output off",
            i,
            spread(s & !(1 << i), center)
        )));
    }
    let offset = |bit: u32| -> IntVec2 {
        let b = bit as i64;
        IntVec2::new(b % side - r as i64, b / side - r as i64)
    };
    let mut raw = Vec::new();
    for s in table.minimal_points() {
        if s == 0 {
            return Err(Error::EmptySetMeansConstant);
        }
        let full = spread(s, center);
        let cells = (0..m as u32).filter(|b| (full >> b) & 1 == 1).map(offset).collect();
        raw.push(cells);
    }
    debug_assert!(table.get(0) || !raw.is_empty() || table.minimal_points().is_empty());
    canonicalize_family(raw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Randomized { trials: u64, seed: u64 },
}

/// Result of a property check; `witness` holds patch states (row-major over
/// the `(2r+1)^2` neighborhood) that violate the property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub holds: bool,
    pub checked: u64,
    pub witness: Option<Vec<u8>>,
    pub witness_upper: Option<Vec<u8>>,
}

impl CheckReport {
    fn pass(checked: u64) -> Self {
        CheckReport { holds: true, checked, witness: None, witness_upper: None }
    }
}

/// Largest patch count handled by exhaustive checks.
pub const MAX_EXHAUSTIVE_PATCHES: u64 = 1 << 25;

fn patch_grid(r: i64, states: &[u8]) -> Grid {
    let side = (2 * r + 1) as usize;
    Grid::from_vec(Rect::new(-r, -r, side, side), states.to_vec())
}

fn random_patch(rng: &mut impl Rng, cells: usize, alphabet: &Alphabet) -> Vec<u8> {
    if alphabet.is_binary() {
        let p: f64 = rng.gen();
        (0..cells).map(|_| rng.gen_bool(p) as u8).collect()
    } else {
        let n = alphabet.len() as u8;
        (0..cells).map(|_| rng.gen_range(0..n)).collect()
    }
}

/// Checks `x <= f(x)` at the center cell.
pub fn is_freezing(k: &RuleKernel, mode: CheckMode) -> CheckReport {
    let r = k.radius() as i64;
    let cells = ((2 * r + 1) * (2 * r + 1)) as usize;
    let center = cells / 2;
    let a = k.alphabet();
    match mode {
        CheckMode::Exhaustive => {
            let q = a.len() as u64;
            let total = q.checked_pow(cells as u32).filter(|&t| t <= MAX_EXHAUSTIVE_PATCHES);
            let Some(total) = total else {
                return is_freezing(k, CheckMode::Randomized { trials: MAX_EXHAUSTIVE_PATCHES, seed: 0 });
            };
            if a.is_binary() {
                for mask in 0..total {
                    let c = ((mask >> center) & 1) as u8;
                    if !a.le(c, k.eval_mask(mask)) {
                        let states = (0..cells).map(|b| ((mask >> b) & 1) as u8).collect();
                        return CheckReport { holds: false, checked: mask + 1, witness: Some(states), witness_upper: None };
                    }
                }
                return CheckReport::pass(total);
            }
            let mut states = vec![0u8; cells];
            for idx in 0..total {
                let g = patch_grid(r, &states);
                if !a.le(states[center], k.eval(&g, 0, 0)) {
                    return CheckReport { holds: false, checked: idx + 1, witness: Some(states), witness_upper: None };
                }
                for s in states.iter_mut() {
                    *s += 1;
                    if (*s as u64) < q {
                        break;
                    }
                    *s = 0;
                }
            }
            CheckReport::pass(total)
        }
        CheckMode::Randomized { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for t in 0..trials {
                let states = random_patch(&mut rng, cells, a);
                let g = patch_grid(r, &states);
                if !a.le(states[center], k.eval(&g, 0, 0)) {
                    return CheckReport { holds: false, checked: t + 1, witness: Some(states), witness_upper: None };
                }
            }
            CheckReport::pass(trials)
        }
    }
}

/// Checks `x <= y => f(x) <= f(y)` at the center cell of binary patches.
pub fn is_monotone(k: &RuleKernel, mode: CheckMode) -> CheckReport {
    let a = k.alphabet();
    assert!(a.is_binary(), "monotonicity is checked on binary alphabets");
    let r = k.radius() as i64;
    let cells = ((2 * r + 1) * (2 * r + 1)) as usize;
    match mode {
        CheckMode::Exhaustive if (1u64 << cells.min(63)) <= MAX_EXHAUSTIVE_PATCHES => {
            let table = TruthTable::build(cells, |mask| k.eval_mask(mask) == 1);
            match table.monotone_violation() {
                None => CheckReport::pass(1 << cells),
                Some((s, i)) => {
                    let lower = s & !(1 << i);
                    let bits = |m: u64| (0..cells).map(|b| ((m >> b) & 1) as u8).collect();
                    CheckReport { holds: false, checked: 1 << cells, witness: Some(bits(lower)), witness_upper: Some(bits(s)) }
                }
            }
        }
        CheckMode::Exhaustive => is_monotone(k, CheckMode::Randomized { trials: MAX_EXHAUSTIVE_PATCHES, seed: 0 }),
        CheckMode::Randomized { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for t in 0..trials {
                let lower = random_patch(&mut rng, cells, a);
                let q: f64 = rng.gen::<f64>() * rng.gen::<f64>();
                let upper: Vec<u8> = lower.iter().map(|&v| v | rng.gen_bool(q) as u8).collect();
                let fl = k.eval(&patch_grid(r, &lower), 0, 0);
                let fu = k.eval(&patch_grid(r, &upper), 0, 0);
                if fl > fu {
                    return CheckReport { holds: false, checked: t + 1, witness: Some(lower), witness_upper: Some(upper) };
                }
            }
            CheckReport::pass(trials)
        }
    }
}

/// Partition of a family by whether the origin lies in each set's hull.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FGSplit {
    pub f_sets: Vec<NeighborSet>,
    pub g_sets: Vec<NeighborSet>,
}

pub fn split_fg(e: &NeighborFamily) -> FGSplit {
    let (g_sets, f_sets): (Vec<_>, Vec<_>) = e.sets().iter().cloned().partition(|s| s.hull_contains_origin());
    FGSplit { f_sets, g_sets }
}

/// All cells used by any member set.
pub fn support(e: &NeighborFamily) -> BTreeSet<IntVec2> {
    e.sets().iter().flat_map(|s| s.cells().iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fam(sets: &[&[(i64, i64)]]) -> NeighborFamily {
        canonicalize_family(sets.iter().map(|s| s.iter().map(|&p| p.into()).collect()).collect()).unwrap()
    }

    fn set(cells: &[(i64, i64)]) -> NeighborSet {
        NeighborSet::new(cells.iter().map(|&p| p.into())).unwrap()
    }

    #[test]
    fn canonicalize_removes_supersets() {
        assert_eq!(fam(&[&[(0, 1)], &[(0, 1), (1, 1)]]).sets(), &[set(&[(0, 1)])]);
        assert_eq!(fam(&[&[(0, 1), (1, 1)]]).sets(), &[set(&[(0, 1), (1, 1)])]);
        let e = fam(&[&[(1, 0)], &[(0, 1)], &[(1, 0), (0, 1)]]);
        assert_eq!(e.len(), 2);
        // same rule as the raw family on every radius-1 patch
        let raw = NeighborFamily(vec![set(&[(1, 0)]), set(&[(0, 1)]), set(&[(1, 0), (0, 1)])]);
        let (a, b) = (rule_from_family(&e), rule_from_family(&raw));
        for mask in 0..512u64 {
            assert_eq!(a.eval_mask(mask), b.eval_mask(mask));
        }
    }

    #[test]
    fn canonicalize_rejects_bad_sets() {
        let r = canonicalize_family(vec![vec![IntVec2::new(0, 0)]]);
        assert!(matches!(r, Err(Error::OriginInNeighborSet)));
        let r = canonicalize_family(vec![vec![]]);
        assert!(matches!(r, Err(Error::EmptySetMeansConstant)));
    }

    #[test]
    fn canonicalize_is_order_independent() {
        let a = fam(&[&[(1, 1), (0, 1)], &[(2, 0)], &[(2, 0), (0, 1)]]);
        let b = fam(&[&[(2, 0), (0, 1)], &[(0, 1), (1, 1)], &[(2, 0)]]);
        assert_eq!(a, b);
    }

    #[test]
    fn family_rule_on_patches() {
        let h = rule_from_family(&fam(&[&[(0, 1), (1, 1)]]));
        // center 0, (0,1)=1, (1,1)=1; radius 1 bits: (dy+1)*3 + dx+1
        let mask = 1 << (2 * 3 + 1) | 1 << (2 * 3 + 2);
        assert_eq!(h.eval_mask(mask), 1);
        assert_eq!(h.eval_mask(0), 0);
        assert_eq!(h.eval_mask(1 << 4), 1);
        assert_eq!(h.eval_mask(1 << 7), 0);
    }

    #[test]
    fn extraction_examples() {
        let e = fam(&[&[(0, 1), (1, 1)]]);
        assert_eq!(family_from_rule(&rule_from_family(&e)).unwrap(), e);

        let identity = rule_from_family(&NeighborFamily::default());
        assert!(family_from_rule(&identity).unwrap().is_empty());

        let vn = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        let or_rule = fam(&[&vn[0..1], &vn[1..2], &vn[2..3], &vn[3..4]]);
        let got = family_from_rule(&rule_from_family(&or_rule)).unwrap();
        assert_eq!(got.len(), 4);
        assert!(got.sets().iter().all(|s| s.cells().len() == 1));
    }

    struct Decreasing;
    impl LocalRule for Decreasing {
        fn name(&self) -> String {
            "decreasing".into()
        }
        fn alphabet(&self) -> &Alphabet {
            static A: std::sync::OnceLock<Alphabet> = std::sync::OnceLock::new();
            A.get_or_init(Alphabet::binary)
        }
        fn radius(&self) -> usize {
            1
        }
        fn eval(&self, src: &Grid, x: i64, y: i64) -> u8 {
            // a 1 with a 1 to its east dies
            if src.get(x, y) == 1 && src.get(x + 1, y) == 1 {
                0
            } else {
                src.get(x, y)
            }
        }
    }

    #[test]
    fn freezing_checker_finds_witness() {
        let k = RuleKernel::new(Decreasing);
        let rep = is_freezing(&k, CheckMode::Exhaustive);
        assert!(!rep.holds);
        let w = rep.witness.unwrap();
        assert_eq!(w[4], 1);
        assert_eq!(w[5], 1);
        assert!(matches!(family_from_rule(&k), Err(Error::NotMonotoneFreezing(_))));
        let rep = is_freezing(&k, CheckMode::Randomized { trials: 1000, seed: 3 });
        assert!(!rep.holds);
    }

    #[test]
    fn family_rules_are_freezing_and_monotone() {
        let e = fam(&[&[(0, 1), (1, 1)], &[(-1, -1)], &[(1, 0), (-1, 0)]]);
        let k = rule_from_family(&e);
        assert!(is_freezing(&k, CheckMode::Exhaustive).holds);
        assert!(is_monotone(&k, CheckMode::Exhaustive).holds);
        assert!(is_monotone(&k, CheckMode::Randomized { trials: 2000, seed: 1 }).holds);
        let id = rule_from_family(&NeighborFamily::default());
        assert!(is_monotone(&id, CheckMode::Exhaustive).holds);
    }

    #[test]
    fn fg_split_examples() {
        let s = split_fg(&fam(&[&[(0, 1), (1, 1)]]));
        assert_eq!((s.f_sets.len(), s.g_sets.len()), (1, 0));
        let s = split_fg(&fam(&[&[(-1, 0), (1, 0)]]));
        assert_eq!((s.f_sets.len(), s.g_sets.len()), (0, 1));
        let s = split_fg(&fam(&[&[(1, 1)], &[(-1, 0), (1, 0)]]));
        assert_eq!(s.f_sets, vec![set(&[(1, 1)])]);
        assert_eq!(s.g_sets, vec![set(&[(-1, 0), (1, 0)])]);
    }

    #[test]
    fn family_json_roundtrip() {
        let e = NeighborFamily::from_json(r#"{"neighbor_sets": [[[0,1],[1,1]], [[0,1]]]}"#).unwrap();
        assert_eq!(e, fam(&[&[(0, 1)]]));
        assert_eq!(NeighborFamily::from_json(&e.to_json()).unwrap(), e);
        assert!(NeighborFamily::from_json("{\"neighbor_sets\": [[[0,0]]]}").is_err());
    }
}
