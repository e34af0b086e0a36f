//! Bernoulli sampling, directed paths and Monte Carlo estimators.

use num_rational::Ratio;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{step_counted, Boundary, Window};
use crate::error::{Error, Result};
use crate::grid::Rect;
use crate::rules::RuleKernel;

pub type Probability = Ratio<u64>;

/// Parses `"0.35"`, `"7/20"`, `"1"` and similar into an exact probability.
pub fn parse_probability(s: &str) -> Result<Probability> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid probability {s:?}"));
    let p = if let Some((a, b)) = s.split_once('/') {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        Ratio::new(a, b)
    } else {
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || (int.is_empty() && frac.is_empty()) || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let f: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        Ratio::new(int.checked_mul(den).and_then(|v| v.checked_add(f)).ok_or_else(bad)?, den)
    };
    if p > Ratio::from_integer(1) {
        return Err(Error::InvalidParams(format!("probability {s} exceeds 1")));
    }
    Ok(p)
}

pub fn probability_to_f64(p: Probability) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// Short decimal form used in reports.
pub fn format_probability(p: Probability) -> String {
    let mut s = format!("{:.6}", probability_to_f64(p));
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BernoulliSpec {
    pub p: Probability,
    pub seed: u64,
}

/// `floor(p * 2^64)`; a cell is 1 iff its uniform word is below this.
pub fn threshold(p: Probability) -> u128 {
    ((*p.numer() as u128) << 64) / *p.denom() as u128
}

/// Uniform 64-bit words for cells of a window, row-major. Cell `(i, j)` of
/// trial `t` always receives the same word, whatever the window size.
pub fn uniform_field(seed: u64, trial: u64, width: usize, height: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut out = Vec::with_capacity(width * height);
    for j in 0..height as u64 {
        rng.set_word_pos(2 * ((j as u128) << 32));
        for _ in 0..width {
            out.push(rng.next_u64());
        }
    }
    out
}

pub fn window_from_field(field: &[u64], width: usize, height: usize, p: Probability, boundary: Boundary) -> Window {
    let t = threshold(p);
    Window::from_fn(width, height, &crate::rules::Alphabet::binary(), boundary, |i, j| {
        ((field[j * width + i] as u128) < t) as u8
    })
}

pub fn sample_window_trial(spec: BernoulliSpec, trial: u64, width: usize, height: usize, boundary: Boundary) -> Window {
    let field = uniform_field(spec.seed, trial, width, height);
    window_from_field(&field, width, height, spec.p, boundary)
}

pub fn sample_window(spec: BernoulliSpec, width: usize, height: usize) -> Window {
    sample_window_trial(spec, 0, width, height, Boundary::Zero)
}

/// Cells reachable from `origin` by steps `(0,1)` and `(1,1)` through cells in
/// state `symbol`, one row at a time.
fn reach_rows(w: &Window, symbol: u8, origin: (usize, usize), mut row_hook: impl FnMut(usize, &[bool]) -> bool) {
    let (ox, oy) = origin;
    assert!(ox < w.width() && oy < w.height(), "origin outside window");
    let mut cur = vec![false; w.width()];
    cur[ox] = w.get(ox, oy) == symbol;
    if !row_hook(oy, &cur) {
        return;
    }
    for j in oy + 1..w.height() {
        let mut next = vec![false; w.width()];
        let mut any = false;
        for i in ox..w.width() {
            let from = cur[i] || (i > 0 && cur[i - 1]);
            if from && w.get(i, j) == symbol {
                next[i] = true;
                any = true;
            }
        }
        if !any || !row_hook(j, &next) {
            return;
        }
        cur = next;
    }
}

/// Whether a directed `symbol`-path joins `origin` to the top row.
pub fn directed_crossing(w: &Window, symbol: u8, origin: (usize, usize)) -> bool {
    let top = w.height() - 1;
    let mut hit = false;
    reach_rows(w, symbol, origin, |j, row| {
        if j == top && row.iter().any(|&b| b) {
            hit = true;
        }
        row.iter().any(|&b| b)
    });
    hit
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathBound {
    Finite(usize),
    Infinite,
}

/// Longest directed `symbol`-path from `origin` counted in cells; `Infinite`
/// when it reaches the top row.
pub fn koenig_bound(w: &Window, symbol: u8, origin: (usize, usize)) -> PathBound {
    let (_, oy) = origin;
    let top = w.height() - 1;
    let mut highest: Option<usize> = None;
    reach_rows(w, symbol, origin, |j, row| {
        let any = row.iter().any(|&b| b);
        if any {
            highest = Some(j);
        }
        any
    });
    match highest {
        None => PathBound::Finite(0),
        Some(j) if j == top => PathBound::Infinite,
        Some(j) => PathBound::Finite(j - oy + 1),
    }
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let ph = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (ph + z2 / (2.0 * n)) / denom;
    let half = z / denom * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, ph), (center + half).clamp(ph, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    #[serde(serialize_with = "ser_prob")]
    pub p: Probability,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub wilson_ci_low: f64,
    pub wilson_ci_high: f64,
}

fn ser_prob<S: serde::Serializer>(p: &Probability, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(probability_to_f64(*p))
}

impl ScanRow {
    pub fn new(p: Probability, successes: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(successes, trials, Z95);
        let estimate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        ScanRow { p, trials, successes, estimate, wilson_ci_low: lo, wilson_ci_high: hi }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanMetadata {
    pub width: usize,
    pub height: usize,
    pub horizon: usize,
    pub boundary: Boundary,
    pub seed: u64,
    pub trials: u64,
    pub central_square: usize,
    pub caveats: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub metadata: ScanMetadata,
}

pub const CSV_HEADER: &str = "p,trials,estimate,ci_low,ci_high";

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6}\n",
                format_probability(r.p),
                r.trials,
                r.estimate,
                r.wilson_ci_low,
                r.wilson_ci_high
            ));
        }
        s
    }

    /// First grid point whose estimate reaches `level`, linearly
    /// interpolated against the previous point.
    pub fn crossover(&self, level: f64) -> Option<f64> {
        let mut prev: Option<&ScanRow> = None;
        for r in &self.rows {
            if r.estimate >= level {
                return Some(match prev {
                    Some(q) if r.estimate > q.estimate => {
                        let (p0, p1) = (probability_to_f64(q.p), probability_to_f64(r.p));
                        p0 + (level - q.estimate) / (r.estimate - q.estimate) * (p1 - p0)
                    }
                    _ => probability_to_f64(r.p),
                });
            }
            prev = Some(r);
        }
        None
    }
}

/// Frequency of a directed `symbol`-crossing from the bottom-left cell.
pub fn survival_estimate(symbol: u8, p: Probability, width: usize, height: usize, trials: u64, seed: u64) -> ScanRow {
    let spec = BernoulliSpec { p, seed };
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| directed_crossing(&sample_window_trial(spec, t, width, height, Boundary::Zero), symbol, (0, 0)) as u64)
        .sum();
    ScanRow::new(p, hits, trials)
}

/// Side of the central square inspected by [`fixation_scan`].
pub fn central_square_side(k: &RuleKernel, width: usize, height: usize) -> usize {
    k.radius().max(width / 8).clamp(1, width.min(height))
}

fn central_square(w: &Window, side: usize) -> Rect {
    let (ox, oy) = w.origin();
    Rect::new(ox as i64 - (side / 2) as i64, oy as i64 - (side / 2) as i64, side, side)
}

/// Runs one coupled trial for every `p`; entry `i` tells whether the central
/// square is all maximal at the horizon for `p_grid[i]`.
pub fn fixation_trial(
    k: &RuleKernel,
    p_grid: &[Probability],
    width: usize,
    height: usize,
    horizon: usize,
    seed: u64,
    trial: u64,
) -> Result<Vec<bool>> {
    let field = uniform_field(seed, trial, width, height);
    let side = central_square_side(k, width, height);
    p_grid
        .iter()
        .map(|&p| {
            let mut w = window_from_field(&field, width, height, p, Boundary::Periodic);
            for _ in 0..horizon {
                let (next, changed) = step_counted(&w, k)?;
                if changed == 0 {
                    break;
                }
                w = next;
            }
            let sq = central_square(&w, side);
            Ok(w.all_in(sq, k.alphabet().top()))
        })
        .collect()
}

/// Fraction of periodic windows whose central square is all maximal at the
/// horizon, per density, with the same uniforms thresholded at every `p`.
pub fn fixation_scan(
    k: &RuleKernel,
    p_grid: &[Probability],
    width: usize,
    height: usize,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<ScanResult> {
    if !k.alphabet().is_binary() {
        return Err(Error::AlphabetMismatch { window: 2, kernel: k.alphabet().len() });
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidParams("window dimensions must be positive".into()));
    }
    let outcomes: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| fixation_trial(k, p_grid, width, height, horizon, seed, t))
        .collect::<Result<_>>()?;
    let rows = p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| ScanRow::new(p, outcomes.iter().filter(|o| o[i]).count() as u64, trials))
        .collect();
    let side = central_square_side(k, width, height);
    Ok(ScanResult {
        rows,
        metadata: ScanMetadata {
            width,
            height,
            horizon,
            boundary: Boundary::Periodic,
            seed,
            trials,
            central_square: side,
            caveats: vec![
                "finite periodic window stands in for the shift-invariant lattice".into(),
                "success at a finite horizon only bounds fixation from below".into(),
                "crossing-to-top truncation overestimates survival of infinite paths".into(),
            ],
        },
    })
}

/// Coarse field whose cell `a` reads fine coordinates
/// `[a * block + lo, a * block + hi]` along each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DependenceField {
    pub block: usize,
    pub lo: i64,
    pub hi: i64,
}

/// Least `k` such that cells at infinity-distance `> k` read disjoint sets.
pub fn dependence_radius(field: DependenceField) -> Result<usize> {
    if field.block == 0 || field.hi < field.lo {
        return Err(Error::InvalidParams("dependence field needs block >= 1 and lo <= hi".into()));
    }
    Ok(((field.hi - field.lo) as usize) / field.block)
}

/// `2 exp(-2 eps^2 n)`.
pub fn hoeffding_bound(n: u64, epsilon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("sample size must be at least 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParams("epsilon must be positive".into()));
    }
    Ok(2.0 * (-2.0 * epsilon * epsilon * n as f64).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationRow {
    pub n: u64,
    pub epsilon: f64,
    pub frequency: f64,
    pub bound: f64,
}

/// Empirical frequency of `|mean - p| > eps` over `trials` samples of size `n`.
pub fn deviation_frequencies(
    p: Probability,
    ns: &[u64],
    epsilons: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<DeviationRow>> {
    let t = threshold(p);
    let pf = probability_to_f64(p);
    let mut out = Vec::new();
    for (ni, &n) in ns.iter().enumerate() {
        let means: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|tr| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((ni as u64) << 48) | tr);
                let ones = (0..n).filter(|_| (rng.next_u64() as u128) < t).count();
                ones as f64 / n as f64
            })
            .collect();
        for &eps in epsilons {
            let bad = means.iter().filter(|&&m| (m - pf).abs() > eps).count();
            out.push(DeviationRow { n, epsilon: eps, frequency: bad as f64 / trials as f64, bound: hoeffding_bound(n, eps)? });
        }
    }
    Ok(out)
}
