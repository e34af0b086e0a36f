//! The freezing, non-monotone automaton `f = h o g` built from a density
//! trigger `g'`, a block filler `g` and the block percolation rule `h`.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::step_exact;
use crate::error::{Error, Result};
use crate::grid::{Grid, PrefixSum, Rect};
use crate::percolation::{koenig_bound, threshold, uniform_field, PathBound, Probability};
use crate::rules::{Alphabet, LocalRule, Reach, RuleKernel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwoPhaseParams {
    pub n_block: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub eps1: Ratio<i64>,
    #[serde(serialize_with = "ser_ratio")]
    pub eps2: Ratio<i64>,
    #[serde(serialize_with = "ser_ratio")]
    pub delta: Ratio<i64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

impl Default for TwoPhaseParams {
    fn default() -> Self {
        TwoPhaseParams {
            n_block: 4,
            eps1: Ratio::new(1, 4),
            eps2: Ratio::new(1, 2),
            delta: Ratio::new(1, 8),
        }
    }
}

impl TwoPhaseParams {
    pub fn new(n_block: usize, eps1: Ratio<i64>, eps2: Ratio<i64>, delta: Ratio<i64>) -> Result<Self> {
        let p = TwoPhaseParams { n_block, eps1, eps2, delta };
        p.validate()?;
        Ok(p)
    }

    /// `eps2 = eps / 2`, `eps1 = eps2 / 2`, `delta = eps2 / 4`.
    pub fn from_epsilon(n_block: usize, eps: Ratio<i64>) -> Result<Self> {
        let eps2 = eps / 2;
        Self::new(n_block, eps2 / 2, eps2, eps2 / 4)
    }

    pub fn validate(&self) -> Result<()> {
        let zero = Ratio::from_integer(0);
        let one = Ratio::from_integer(1);
        if self.n_block == 0 {
            return Err(Error::InvalidParams("block size must be positive".into()));
        }
        if !(zero < self.delta && self.delta < self.eps1 && self.eps1 < self.eps2 - self.delta && self.eps2 < one) {
            return Err(Error::InvalidParams("need 0 < delta < eps1 < eps2 - delta and eps2 < 1".into()));
        }
        Ok(())
    }

    fn n(&self) -> i64 {
        self.n_block as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Trigger,
    Fill,
    Percolate,
    Composite,
}

/// Procedural kernel for one of `g'`, `g`, `h` or `f`.
#[derive(Clone, Debug)]
pub struct TwoPhaseRule {
    params: TwoPhaseParams,
    phase: Phase,
    alphabet: Alphabet,
}

pub fn gprime_reach(p: &TwoPhaseParams) -> Reach {
    let n = p.n();
    Reach { x_min: -4 * n, x_max: 4 * n - 1, y_min: -4 * n, y_max: 4 * n - 1 }
}

pub fn g_reach(p: &TwoPhaseParams) -> Reach {
    let n = p.n();
    Reach { x_min: -n + 1, x_max: n - 1, y_min: -n + 1, y_max: n - 1 }.then(gprime_reach(p))
}

pub fn h_reach(p: &TwoPhaseParams) -> Reach {
    let n = p.n();
    Reach { x_min: -n + 1, x_max: 2 * n - 1, y_min: 0, y_max: 2 * n - 1 }
}

pub fn f_reach(p: &TwoPhaseParams) -> Reach {
    h_reach(p).then(g_reach(p))
}

/// For every `v` in `out`, whether some `u` in `v + [a0, a1] x [b0, b1]` has
/// `mark[u]`; `mark` must cover those offsets.
fn any_in_window(mark: &Grid, out: Rect, a0: i64, a1: i64, b0: i64, b1: i64) -> Vec<bool> {
    let ps = PrefixSum::new(mark, |v| v == 1);
    out.cells()
        .map(|(x, y)| ps.count(x + a0, y + b0, a1 - a0 + 1, b1 - b0 + 1) > 0)
        .collect()
}

/// For every `v` in `out`, whether `src` is all-1 on `v + [0, w) x [0, h)`.
fn all_ones(src: &Grid, out: Rect, w: i64, h: i64) -> Grid {
    let ps = PrefixSum::new(src, |v| v == 1);
    let full = (w * h) as u32;
    Grid::from_fn(out, |x, y| (ps.count(x, y, w, h) == full) as u8)
}

impl TwoPhaseRule {
    fn gprime_region(&self, src: &Grid, region: Rect) -> Grid {
        let n = self.params.n();
        // N-squares of ones with lower-left corner in region + [-4N, 3N]^2
        let sq_rect = region.expand(4 * n, 3 * n, 4 * n, 3 * n);
        let squares = all_ones(src, sq_rect, n, n);
        let no_square = any_in_window(&squares, region, -4 * n, 3 * n, -4 * n, 3 * n);
        let ps = PrefixSum::new(src, |v| v == 1);
        let side = 2 * n + 1;
        let area = Ratio::from_integer(side * side);
        let lo = (self.params.eps1 - self.params.delta) * area;
        let hi = (self.params.eps1 + self.params.delta) * area;
        let data = region
            .cells()
            .zip(no_square)
            .map(|((x, y), blocked)| {
                let k = Ratio::from_integer(ps.count(x - n, y - n, side, side) as i64);
                (!blocked && lo < k && k < hi) as u8
            })
            .collect();
        Grid::from_vec(region, data)
    }

    fn g_region(&self, src: &Grid, region: Rect) -> Grid {
        let n = self.params.n();
        let gp_rect = region.expand(n - 1, n - 1, n - 1, n - 1);
        let gp = self.gprime_region(src, gp_rect);
        // g' all-1 on z + [0,N-1]^2 for z in region + [-N+1, 0]^2
        let sq_rect = region.expand(n - 1, 0, n - 1, 0);
        let sq = all_ones(&gp, sq_rect, n, n);
        let fire = any_in_window(&sq, region, -n + 1, 0, -n + 1, 0);
        let data = region.cells().zip(fire).map(|((x, y), f)| (src.get(x, y) == 1 || f) as u8).collect();
        Grid::from_vec(region, data)
    }

    fn h_region(&self, src: &Grid, region: Rect) -> Grid {
        let n = self.params.n();
        // x all-1 on z + [0,2N-1] x [N,2N-1]; index rectangles by their lower-left corner
        let corners = region.expand(n - 1, 0, -1, n);
        let full = all_ones(src, corners, 2 * n, n);
        let fire = any_in_window(&full, region, -n + 1, 0, 1, n);
        let data = region.cells().zip(fire).map(|((x, y), f)| (src.get(x, y) == 1 || f) as u8).collect();
        Grid::from_vec(region, data)
    }
}

impl LocalRule for TwoPhaseRule {
    fn name(&self) -> String {
        let tag = match self.phase {
            Phase::Trigger => "gprime",
            Phase::Fill => "g",
            Phase::Percolate => "h",
            Phase::Composite => "f",
        };
        format!("twophase-{tag}(N={},eps1={},eps2={},delta={})", self.params.n_block, self.params.eps1, self.params.eps2, self.params.delta)
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn radius(&self) -> usize {
        self.reach().radius() as usize
    }

    fn reach(&self) -> Reach {
        match self.phase {
            Phase::Trigger => gprime_reach(&self.params),
            Phase::Fill => g_reach(&self.params),
            Phase::Percolate => h_reach(&self.params),
            Phase::Composite => f_reach(&self.params),
        }
    }

    fn eval(&self, src: &Grid, x: i64, y: i64) -> u8 {
        self.step_region(src, Rect::new(x, y, 1, 1))[0]
    }

    fn step_region(&self, src: &Grid, region: Rect) -> Vec<u8> {
        match self.phase {
            Phase::Trigger => self.gprime_region(src, region).into_data(),
            Phase::Fill => self.g_region(src, region).into_data(),
            Phase::Percolate => self.h_region(src, region).into_data(),
            Phase::Composite => {
                let hr = h_reach(&self.params);
                let mid = region.expand(-hr.x_min, hr.x_max, -hr.y_min, hr.y_max);
                let g = self.g_region(src, mid);
                self.h_region(&g, region).into_data()
            }
        }
    }
}

fn kernel(p: &TwoPhaseParams, phase: Phase) -> Result<RuleKernel> {
    p.validate()?;
    Ok(RuleKernel::new(TwoPhaseRule { params: *p, phase, alphabet: Alphabet::binary() }))
}

pub fn gprime_kernel(p: &TwoPhaseParams) -> Result<RuleKernel> {
    kernel(p, Phase::Trigger)
}

pub fn g_kernel(p: &TwoPhaseParams) -> Result<RuleKernel> {
    kernel(p, Phase::Fill)
}

pub fn h_kernel(p: &TwoPhaseParams) -> Result<RuleKernel> {
    kernel(p, Phase::Percolate)
}

pub fn f_kernel(p: &TwoPhaseParams) -> Result<RuleKernel> {
    kernel(p, Phase::Composite)
}

/// Coarse fields on block coordinates: cell `(a, b)` of `A` is 1 iff
/// `g(x)` is 0 at `(aN, bN)`, and of `B` iff `g(x)` is all-1 on the block
/// `(aN, bN) + [0, N-1]^2`. Only blocks determined by `x` are kept.
pub fn coarse_fields(x: &Grid, p: &TwoPhaseParams) -> Result<(Grid, Grid)> {
    let gx = step_exact(x, &g_kernel(p)?);
    coarse_from_g(&gx, p)
}

fn coarse_from_g(gx: &Grid, p: &TwoPhaseParams) -> Result<(Grid, Grid)> {
    let n = p.n();
    let r = gx.rect();
    let a0 = r.x0.div_euclid(n) + (r.x0.rem_euclid(n) != 0) as i64;
    let b0 = r.y0.div_euclid(n) + (r.y0.rem_euclid(n) != 0) as i64;
    let a1 = (r.x1() - n).div_euclid(n);
    let b1 = (r.y1() - n).div_euclid(n);
    if r.is_empty() || a1 < a0 || b1 < b0 {
        return Err(Error::ExactnessViolated);
    }
    let coarse = Rect::new(a0, b0, (a1 - a0 + 1) as usize, (b1 - b0 + 1) as usize);
    let a = Grid::from_fn(coarse, |a, b| (gx.get(a * n, b * n) == 0) as u8);
    let bg = Grid::from_fn(coarse, |a, b| {
        let all = (0..n).all(|dy| (0..n).all(|dx| gx.get(a * n + dx, b * n + dy) == 1));
        all as u8
    });
    Ok((a, bg))
}

pub fn coarse_field_a(x: &Grid, p: &TwoPhaseParams) -> Result<Grid> {
    coarse_fields(x, p).map(|(a, _)| a)
}

pub fn coarse_field_b(x: &Grid, p: &TwoPhaseParams) -> Result<Grid> {
    coarse_fields(x, p).map(|(_, b)| b)
}

/// Bernoulli sample on a lattice rectangle, keyed like window samples.
pub fn sample_grid(rect: Rect, p: Probability, seed: u64, trial: u64) -> Grid {
    let field = uniform_field(seed, trial, rect.width, rect.height);
    let t = threshold(p);
    Grid::from_fn(rect, |x, y| {
        let (i, j) = ((x - rect.x0) as usize, (y - rect.y0) as usize);
        ((field[j * rect.width + i] as u128) < t) as u8
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IdempotenceReport {
    pub samples: u64,
    pub comparisons: u64,
    pub cells_compared: u64,
    pub counterexamples: Vec<IdempotenceCounterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdempotenceCounterexample {
    pub density: String,
    pub trial: u64,
    pub n: usize,
    pub cell: (i64, i64),
}

/// Checks `g(h^n(g(x))) = h^n(g(x))` on every determined cell, for samples
/// of side `window` at each density and every `n <= horizon`.
pub fn verify_idempotence(
    p: &TwoPhaseParams,
    densities: &[Probability],
    trials: u64,
    window: usize,
    horizon: usize,
    seed: u64,
) -> Result<IdempotenceReport> {
    let (g, h) = (g_kernel(p)?, h_kernel(p)?);
    let rect = Rect::new(0, 0, window, window);
    let jobs: Vec<(usize, u64)> = (0..densities.len()).flat_map(|d| (0..trials).map(move |t| (d, t))).collect();
    let parts: Vec<IdempotenceReport> = jobs
        .par_iter()
        .map(|&(d, t)| {
            let mut rep = IdempotenceReport { samples: 1, ..Default::default() };
            let x = sample_grid(rect, densities[d], seed ^ (d as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15), t);
            let mut y = step_exact(&x, &g);
            for n in 0..=horizon {
                let gy = step_exact(&y, &g);
                rep.comparisons += 1;
                for (cx, cy) in gy.rect().cells() {
                    rep.cells_compared += 1;
                    if gy.get(cx, cy) != y.get(cx, cy) {
                        rep.counterexamples.push(IdempotenceCounterexample {
                            density: crate::percolation::format_probability(densities[d]),
                            trial: t,
                            n,
                            cell: (cx, cy),
                        });
                        break;
                    }
                }
                if n < horizon {
                    y = step_exact(&y, &h);
                }
            }
            rep
        })
        .collect();
    let mut total = IdempotenceReport::default();
    for r in parts {
        total.samples += r.samples;
        total.comparisons += r.comparisons;
        total.cells_compared += r.cells_compared;
        total.counterexamples.extend(r.counterexamples);
    }
    Ok(total)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PathClaimReport {
    pub windows: u64,
    /// Windows where an `A` 1-path from the origin block was checked.
    pub blocking_checked: u64,
    /// Windows where a finite `B` bound was checked.
    pub filling_checked: u64,
    pub failures: Vec<String>,
}

/// Outcome of both path checks on one configuration, origin at `(0, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathCheck {
    /// Longest `A` 1-path from the origin block and whether the origin stayed
    /// 0 through step `len - 1`.
    pub blocking: Option<(usize, bool)>,
    /// `B` bound and whether the origin is 1 after that many steps.
    pub filling: Option<(usize, bool)>,
}

/// Lattice rectangle for path checks with `steps` steps of `h` after `g`.
pub fn path_window(p: &TwoPhaseParams, steps: usize) -> Rect {
    let gr = g_reach(p);
    let hr = h_reach(p);
    let t = steps as i64;
    let n = p.n();
    let x0 = gr.x_min + hr.x_min * t;
    let y0 = gr.y_min + hr.y_min * t;
    let x1 = gr.x_max + hr.x_max * t + n * (t + 2);
    let y1 = gr.y_max + hr.y_max * t + n * 2;
    Rect::new(x0, y0, (x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize)
}

/// Runs both finite path checks on `x`, whose rectangle must contain the
/// origin with room for `steps` steps.
pub fn check_paths(x: &Grid, p: &TwoPhaseParams, steps: usize) -> Result<PathCheck> {
    let (g, h) = (g_kernel(p)?, h_kernel(p)?);
    let gx = step_exact(x, &g);
    let (a, b) = coarse_from_g(&gx, p)?;
    if !a.rect().contains(0, 0) {
        return Err(Error::ExactnessViolated);
    }
    let bin = Alphabet::binary();
    let to_window = |c: &Grid| crate::engine::Window::from_grid(c, &bin, crate::engine::Boundary::Zero);
    let origin = (-a.rect().x0 as usize, -a.rect().y0 as usize);
    // orbit of the origin under h after g
    let mut orbit = Vec::with_capacity(steps + 1);
    let mut y = gx.clone();
    for t in 0..=steps {
        if !y.rect().contains(0, 0) {
            return Err(Error::ExactnessViolated);
        }
        orbit.push(y.get(0, 0));
        if t < steps {
            y = step_exact(&y, &h);
        }
    }
    let aw = to_window(&a);
    let blocking = match koenig_bound(&aw, 1, origin) {
        PathBound::Finite(0) => None,
        PathBound::Finite(l) => Some(l),
        PathBound::Infinite => Some(aw.height() - origin.1),
    }
    .map(|l| {
        let upto = (l - 1).min(steps);
        (l, orbit[..=upto].iter().all(|&v| v == 0))
    });
    let bw = to_window(&b);
    let filling = match koenig_bound(&bw, 0, origin) {
        PathBound::Infinite => None,
        PathBound::Finite(beta) => {
            // the bound must not be cut short by the right edge
            let touches_edge = (origin.1..bw.height()).any(|j| bw.get(bw.width() - 1, j) == 0 && reaches(&bw, origin, (bw.width() - 1, j)));
            if touches_edge || beta > steps {
                None
            } else {
                Some((beta, orbit[beta] == 1))
            }
        }
    };
    Ok(PathCheck { blocking, filling })
}

/// Whether `target` is on a directed 0-path from `origin`.
fn reaches(w: &crate::engine::Window, origin: (usize, usize), target: (usize, usize)) -> bool {
    let (ox, oy) = origin;
    let (tx, ty) = target;
    if ty < oy || tx < ox {
        return false;
    }
    let mut cur = vec![false; w.width()];
    cur[ox] = w.get(ox, oy) == 0;
    for j in oy + 1..=ty {
        let mut next = vec![false; w.width()];
        for i in ox..w.width() {
            next[i] = w.get(i, j) == 0 && (cur[i] || (i > 0 && cur[i - 1]));
        }
        cur = next;
    }
    cur[tx]
}

/// Blocks `(0,0)`, `(0,1)`, `(1,2)` all-0, every other block all-1: the
/// `B` bound at the origin is 3.
pub fn constructed_path_window(p: &TwoPhaseParams, steps: usize) -> Grid {
    let n = p.n();
    let zeros = [(0, 0), (0, 1), (1, 2)];
    Grid::from_fn(path_window(p, steps), |x, y| {
        let blk = (x.div_euclid(n), y.div_euclid(n));
        (!zeros.contains(&blk)) as u8
    })
}

/// Samples windows at each density (plus the constructed window and the
/// all-0 window) and checks both path claims wherever they apply.
pub fn verify_path_claims(
    p: &TwoPhaseParams,
    densities: &[Probability],
    trials: u64,
    steps: usize,
    seed: u64,
) -> Result<PathClaimReport> {
    let rect = path_window(p, steps);
    let mut inputs: Vec<(String, Grid)> = vec![
        ("constructed".into(), constructed_path_window(p, steps)),
        ("all-zero".into(), Grid::new(rect, 0)),
        ("all-one".into(), Grid::new(rect, 1)),
    ];
    for (d, &q) in densities.iter().enumerate() {
        for t in 0..trials {
            let g = sample_grid(rect, q, seed.wrapping_add(d as u64), t);
            inputs.push((format!("p={} trial {t}", crate::percolation::format_probability(q)), g));
        }
    }
    let results: Vec<Result<(String, PathCheck)>> =
        inputs.par_iter().map(|(name, g)| check_paths(g, p, steps).map(|c| (name.clone(), c))).collect();
    let mut rep = PathClaimReport::default();
    for r in results {
        let (name, c) = r?;
        rep.windows += 1;
        if let Some((l, ok)) = c.blocking {
            rep.blocking_checked += 1;
            if !ok {
                rep.failures.push(format!("{name}: A path of length {l} but the origin turned 1"));
            }
        }
        if let Some((beta, ok)) = c.filling {
            rep.filling_checked += 1;
            if !ok {
                rep.failures.push(format!("{name}: B bound {beta} but the origin is still 0"));
            }
        }
    }
    Ok(rep)
}

/// Searches random comparable patch pairs for `x <= y` with
/// `k(x)_0 > k(y)_0`; returns the pair as grids.
pub fn find_monotonicity_witness(k: &RuleKernel, trials: u64, seed: u64) -> Option<(Grid, Grid)> {
    let r = k.radius() as i64;
    let side = (2 * r + 1) as usize;
    let rect = Rect::new(-r, -r, side, side);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let p: f64 = rng.gen_range(0.05..0.5);
        let q: f64 = rng.gen_range(0.0..0.5);
        let lower = Grid::from_fn(rect, |_, _| rng.gen_bool(p) as u8);
        let mut upper = lower.clone();
        for (x, y) in rect.cells() {
            if rng.gen_bool(q) {
                upper.set(x, y, 1);
            }
        }
        if k.eval(&lower, 0, 0) > k.eval(&upper, 0, 0) {
            return Some((lower, upper));
        }
    }
    None
}
