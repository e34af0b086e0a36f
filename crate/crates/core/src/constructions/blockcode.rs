//! Binary block encoding of a multi-state automaton and the binary rule
//! simulating it block by block.

use std::collections::HashMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ft::{CompiledFT, ObstacleReport};
use crate::engine::{step, step_exact, Boundary, Window};
use crate::error::{Error, Result};
use crate::grid::{Grid, Rect};
use crate::rules::{Alphabet, LocalRule, RuleKernel};

/// Largest block side; blocks are hashed into a `u64`.
pub const MAX_BLOCK_SIDE: usize = 8;

/// `M` is the all-1 block; state `k < M` is a 1-ring, a 0-ring and the
/// binary digits of `k` row-major in the `(n-4)^2` payload.
#[derive(Clone, Debug, Serialize)]
pub struct BlockCode {
    n: usize,
    states: usize,
    top: u8,
    #[serde(skip)]
    book: HashMap<u64, u8>,
}

impl BlockCode {
    /// Smallest side `n >= 5` fitting `states - 1` payloads.
    pub fn minimal(states: usize, top: u8) -> Result<Self> {
        let n = (5..=MAX_BLOCK_SIDE)
            .find(|&n| (states - 1) as u128 <= 1u128 << ((n - 4) * (n - 4)))
            .ok_or_else(|| Error::InvalidParams(format!("{states} states need blocks wider than {MAX_BLOCK_SIDE}")))?;
        Self::with_side(n, states, top)
    }

    pub fn with_side(n: usize, states: usize, top: u8) -> Result<Self> {
        if !(5..=MAX_BLOCK_SIDE).contains(&n) || (states - 1) as u128 > 1u128 << ((n - 4) * (n - 4)) {
            return Err(Error::InvalidParams(format!("block side {n} cannot code {states} states")));
        }
        if top as usize != states - 1 {
            return Err(Error::InvalidParams("the maximal state must be the last one".into()));
        }
        let mut code = BlockCode { n, states, top, book: HashMap::new() };
        for s in 0..states {
            let key = code.key(&code.block(s as u8));
            code.book.insert(key, s as u8);
        }
        Ok(code)
    }

    pub fn for_ft(ft: &CompiledFT) -> Result<Self> {
        Self::minimal(ft.num_states(), ft.m())
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// Block bits row-major from the bottom row.
    pub fn block(&self, s: u8) -> Vec<u8> {
        let n = self.n;
        if s == self.top {
            return vec![1; n * n];
        }
        let p = n - 4;
        let mut out = vec![0; n * n];
        for j in 0..n {
            for i in 0..n {
                let ring = i.min(j).min(n - 1 - i).min(n - 1 - j);
                out[j * n + i] = match ring {
                    0 => 1,
                    1 => 0,
                    _ => {
                        let bit = (j - 2) * p + (i - 2);
                        ((s as usize >> bit) & 1) as u8
                    }
                };
            }
        }
        out
    }

    fn key(&self, bits: &[u8]) -> u64 {
        bits.iter().enumerate().fold(0u64, |k, (i, &b)| k | ((b as u64) << i))
    }

    /// State of the block with lower-left corner `(x, y)`, or `None` when
    /// the block is not a codeword.
    pub fn decode_at(&self, g: &Grid, x: i64, y: i64) -> Option<u8> {
        let n = self.n as i64;
        let mut k = 0u64;
        for j in 0..n {
            for i in 0..n {
                k |= (g.get(x + i, y + j) as u64) << (j * n + i);
            }
        }
        self.book.get(&k).copied()
    }

    /// Coarse cell `(a, b)` becomes the block at `(a n, b n)`.
    pub fn encode(&self, coarse: &Grid) -> Grid {
        let n = self.n as i64;
        let r = coarse.rect();
        let fine = Rect::new(r.x0 * n, r.y0 * n, r.width * self.n, r.height * self.n);
        let blocks: Vec<Vec<u8>> = (0..self.states).map(|s| self.block(s as u8)).collect();
        Grid::from_fn(fine, |x, y| {
            let s = coarse.get(x.div_euclid(n), y.div_euclid(n));
            blocks[s as usize][(y.rem_euclid(n) * n + x.rem_euclid(n)) as usize]
        })
    }

    /// Inverse of `encode` on aligned blocks fully inside `fine`.
    pub fn decode(&self, fine: &Grid) -> BlockDecode {
        let n = self.n as i64;
        let r = fine.rect();
        let a0 = r.x0.div_euclid(n) + (r.x0.rem_euclid(n) != 0) as i64;
        let b0 = r.y0.div_euclid(n) + (r.y0.rem_euclid(n) != 0) as i64;
        let a1 = r.x1().div_euclid(n);
        let b1 = r.y1().div_euclid(n);
        let rect = Rect::new(a0, b0, (a1 - a0).max(0) as usize, (b1 - b0).max(0) as usize);
        let cells = rect.cells().map(|(a, b)| self.decode_at(fine, a * n, b * n)).collect();
        BlockDecode { rect, cells }
    }

    pub fn encode_window(&self, coarse: &Window, boundary: Boundary) -> Window {
        let g = self.encode(&coarse.to_grid());
        Window::from_grid(&g, &Alphabet::binary(), boundary)
    }
}

/// Coarse result of decoding; `None` marks an invalid block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecode {
    pub rect: Rect,
    pub cells: Vec<Option<u8>>,
}

impl BlockDecode {
    pub fn get(&self, a: i64, b: i64) -> Option<u8> {
        let r = self.rect;
        self.cells[((b - r.y0) as usize) * r.width + (a - r.x0) as usize]
    }

    /// The coarse grid when every block is valid.
    pub fn to_grid(&self) -> Option<Grid> {
        let data: Option<Vec<u8>> = self.cells.iter().copied().collect();
        data.map(|d| Grid::from_vec(self.rect, d))
    }
}

struct GtRule {
    code: BlockCode,
    ft: RuleKernel,
    alphabet: Alphabet,
}

impl GtRule {
    /// Output at a 0-cell given block lookups by lower-left corner.
    fn zero_cell(&self, x: i64, y: i64, at: impl Fn(i64, i64) -> Option<u8>) -> u8 {
        let n = self.code.n as i64;
        let top = self.code.top;
        let mut origin = None;
        'search: for dy in 0..n {
            for dx in 0..n {
                if matches!(at(x - dx, y - dy), Some(s) if s != top) {
                    origin = Some((x - dx, y - dy));
                    break 'search;
                }
            }
        }
        let Some((ox, oy)) = origin else { return 1 };
        let mut patch = Grid::new(Rect::new(-1, -1, 3, 3), 0);
        for b in -1..=1 {
            for a in -1..=1 {
                match at(ox + a * n, oy + b * n) {
                    Some(s) => patch.set(a, b, s),
                    None => return 1,
                }
            }
        }
        (self.ft.eval(&patch, 0, 0) == top) as u8
    }
}

impl LocalRule for GtRule {
    fn name(&self) -> String {
        format!("block-sim(n={}, states={})", self.code.n, self.code.states)
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn radius(&self) -> usize {
        2 * self.code.n - 1
    }

    fn eval(&self, src: &Grid, x: i64, y: i64) -> u8 {
        if src.get(x, y) == 1 {
            return 1;
        }
        self.zero_cell(x, y, |bx, by| self.code.decode_at(src, bx, by))
    }

    fn step_region(&self, src: &Grid, region: Rect) -> Vec<u8> {
        let n = self.code.n as i64;
        // every block corner any cell of region may look at
        let corners = region.expand(2 * n - 1, n, 2 * n - 1, n);
        let decoded: Vec<Option<u8>> = corners.cells().map(|(x, y)| self.code.decode_at(src, x, y)).collect();
        let at = |x: i64, y: i64| decoded[((y - corners.y0) as usize) * corners.width + (x - corners.x0) as usize];
        region
            .cells()
            .map(|(x, y)| if src.get(x, y) == 1 { 1 } else { self.zero_cell(x, y, at) })
            .collect()
    }
}

/// Binary rule running `ft` on block-encoded configurations.
pub fn gt_kernel(code: &BlockCode, ft: &CompiledFT) -> Result<RuleKernel> {
    if code.states != ft.num_states() || code.top != ft.m() {
        return Err(Error::InvalidParams("block code does not match the automaton".into()));
    }
    Ok(RuleKernel::new(GtRule { code: code.clone(), ft: ft.kernel().clone(), alphabet: Alphabet::binary() }))
}

/// Encoded `obstacle` inside random binary periodic contexts; counts the
/// contexts where some encoded cell changed within `steps` steps.
pub fn verify_encoded_obstacle(
    ft: &CompiledFT,
    code: &BlockCode,
    obstacle: &Grid,
    contexts: usize,
    steps: usize,
    seed: u64,
) -> Result<ObstacleReport> {
    let gt = gt_kernel(code, ft)?;
    let fine = code.encode(obstacle);
    let fr = fine.rect();
    let margin = 2 * code.side();
    let (w, h) = (fr.width + 2 * margin, fr.height + 2 * margin);
    let failures = (0..contexts)
        .into_par_iter()
        .filter(|&c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let inside = |i: usize, j: usize| (i as i64 - margin as i64 + fr.x0, j as i64 - margin as i64 + fr.y0);
            let mut win = Window::from_fn(w, h, &Alphabet::binary(), Boundary::Periodic, |i, j| {
                let (x, y) = inside(i, j);
                if fr.contains(x, y) { fine.get(x, y) } else { rng.gen_range(0..2) }
            });
            (0..steps).any(|_| {
                win = step(&win, &gt).expect("binary window");
                fr.cells().any(|(x, y)| {
                    win.get((x - fr.x0) as usize + margin, (y - fr.y0) as usize + margin) != fine.get(x, y)
                })
            })
        })
        .count();
    Ok(ObstacleReport { contexts, steps, failures })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CommutationReport {
    pub windows: usize,
    pub cells_compared: usize,
    pub mismatches: usize,
}

/// Random coarse windows, half built around `obstacle` with a few random
/// corruptions and half uniformly random; compares stepping the encoding
/// with encoding the step on every determined cell.
pub fn verify_commutation(
    ft: &CompiledFT,
    code: &BlockCode,
    obstacle: Option<&Grid>,
    windows: usize,
    side: usize,
    seed: u64,
) -> Result<CommutationReport> {
    let gt = gt_kernel(code, ft)?;
    let q = ft.num_states() as u8;
    let parts: Vec<(usize, usize)> = (0..windows)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let coarse = match obstacle {
                Some(obs) if k % 4 == 0 => {
                    let r = obs.rect();
                    let rect = Rect::new(r.x0 - 2, r.y0 - 2, r.width + 4, r.height + 4);
                    let mut c = Grid::from_fn(rect, |x, y| if r.contains(x, y) { obs.get(x, y) } else { ft.m() });
                    for _ in 0..k % 7 {
                        let (x, y) = (rng.gen_range(rect.x0..rect.x1()), rng.gen_range(rect.y0..rect.y1()));
                        c.set(x, y, rng.gen_range(0..q));
                    }
                    c
                }
                _ if k % 4 == 1 => Grid::from_fn(Rect::new(0, 0, side, side), |_, _| rng.gen_range(0..q)),
                _ => super::ft::valid_window(ft, Rect::new(0, 0, side, side), &mut rng),
            };
            let lhs = step_exact(&code.encode(&coarse), &gt);
            let rhs = code.encode(&step_exact(&coarse, ft.kernel()));
            let bad = lhs.rect().cells().filter(|&(x, y)| lhs.get(x, y) != rhs.get(x, y)).count();
            (lhs.rect().width * lhs.rect().height, bad)
        })
        .collect();
    Ok(CommutationReport {
        windows,
        cells_compared: parts.iter().map(|p| p.0).sum(),
        mismatches: parts.iter().map(|p| p.1).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::ft::{compile_tm, halting_obstacle};
    use super::super::tm::three_step_machine;
    use super::*;

    fn setup() -> (CompiledFT, BlockCode) {
        let ft = compile_tm(&three_step_machine()).unwrap();
        let code = BlockCode::for_ft(&ft).unwrap();
        (ft, code)
    }

    #[test]
    fn minimal_side() {
        let (ft, code) = setup();
        // 17 non-M states need 5 payload bits
        assert_eq!(ft.num_states(), 18);
        assert_eq!(code.side(), 7);
        assert_eq!(BlockCode::minimal(2, 1).unwrap().side(), 5);
        assert_eq!(BlockCode::minimal(3, 2).unwrap().side(), 5);
        assert_eq!(BlockCode::minimal(4, 3).unwrap().side(), 6);
        assert!(BlockCode::with_side(5, 4, 3).is_err());
    }

    #[test]
    fn blocks_have_rings() {
        let (_, code) = setup();
        let b = code.block(5);
        let n = 7;
        assert!((0..n).all(|i| b[i] == 1 && b[(n - 1) * n + i] == 1 && b[i * n] == 1 && b[i * n + n - 1] == 1));
        assert!((1..n - 1).all(|i| b[n + i] == 0 && b[(n - 2) * n + i] == 0));
        // payload 5 = 0b101: bits 0 and 2 of the bottom payload row
        assert_eq!((b[2 * n + 2], b[2 * n + 3], b[2 * n + 4]), (1, 0, 1));
        assert!(code.block(code.top).iter().all(|&v| v == 1));
    }

    #[test]
    fn round_trip_and_invalid_marker() {
        let (ft, code) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = ft.num_states() as u8;
        for _ in 0..20 {
            let coarse = Grid::from_fn(Rect::new(-2, 1, 5, 4), |_, _| rng.gen_range(0..q));
            let fine = code.encode(&coarse);
            assert_eq!(code.decode(&fine).to_grid().unwrap(), coarse);
        }
        let all_m = Grid::new(Rect::new(0, 0, 3, 3), ft.m());
        assert!(code.encode(&all_m).all(1));
        let mut fine = code.encode(&Grid::new(Rect::new(0, 0, 2, 1), 3));
        fine.set(7 + 3, 1, 1);
        let d = code.decode(&fine);
        assert_eq!(d.get(0, 0), Some(3));
        assert_eq!(d.get(1, 0), None);
        assert!(d.to_grid().is_none());
    }

    #[test]
    fn at_most_one_alignment_per_zero_cell() {
        for states in [2usize, 3, 18, 40] {
            let code = BlockCode::minimal(states, (states - 1) as u8).unwrap();
            let n = code.side() as i64;
            let words: Vec<Vec<u8>> = (0..states - 1).map(|s| code.block(s as u8)).collect();
            for a in &words {
                for b in &words {
                    for sy in -n + 1..n {
                        for sx in -n + 1..n {
                            if (sx, sy) == (0, 0) {
                                continue;
                            }
                            let mut consistent = true;
                            let mut shared_zero = false;
                            for y in 0..n {
                                for x in 0..n {
                                    let (u, v) = (x - sx, y - sy);
                                    if (0..n).contains(&u) && (0..n).contains(&v) {
                                        let (p, q) = (a[(y * n + x) as usize], b[(v * n + u) as usize]);
                                        consistent &= p == q;
                                        shared_zero |= p == 0 && q == 0;
                                    }
                                }
                            }
                            assert!(!(consistent && shared_zero), "n={n} shift ({sx},{sy})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn region_step_matches_eval() {
        let (ft, code) = setup();
        let gt = gt_kernel(&code, &ft).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let obs = halting_obstacle(&ft, 10).unwrap();
        let coarse = Grid::from_fn(obs.rect().grow(1), |x, y| {
            if obs.rect().contains(x, y) && rng.gen_bool(0.95) { obs.get(x, y) } else { rng.gen_range(0..ft.num_states() as u8) }
        });
        let fine = code.encode(&coarse);
        let region = gt.reach().interior(fine.rect());
        let fast = gt.step_region(&fine, region);
        let slow: Vec<u8> = region.cells().map(|(x, y)| gt.eval(&fine, x, y)).collect();
        assert_eq!(fast, slow);
    }

    #[test]
    fn commutes_with_encoding() {
        let (ft, code) = setup();
        let gt = gt_kernel(&code, &ft).unwrap();
        let obs = halting_obstacle(&ft, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 0..10 {
            let mut coarse = Grid::from_fn(obs.rect().grow(2), |x, y| if obs.rect().contains(x, y) { obs.get(x, y) } else { ft.m() });
            for _ in 0..t {
                let r = coarse.rect();
                let (x, y) = (rng.gen_range(r.x0..r.x1()), rng.gen_range(r.y0..r.y1()));
                coarse.set(x, y, rng.gen_range(0..ft.num_states() as u8));
            }
            let lhs = step_exact(&code.encode(&coarse), &gt);
            let rhs = code.encode(&step_exact(&coarse, ft.kernel()));
            for (x, y) in lhs.rect().cells() {
                assert_eq!(lhs.get(x, y), rhs.get(x, y), "corruptions {t} at ({x},{y})");
            }
        }
    }

    #[test]
    fn commutation_campaign() {
        let (ft, code) = setup();
        let obs = halting_obstacle(&ft, 10).unwrap();
        let rep = verify_commutation(&ft, &code, Some(&obs), 12, 8, 5).unwrap();
        assert_eq!(rep.mismatches, 0);
        assert!(rep.cells_compared > 0);
    }

    #[test]
    fn encoded_obstacle_is_fixed() {
        let (ft, code) = setup();
        let obs = halting_obstacle(&ft, 10).unwrap();
        let rep = verify_encoded_obstacle(&ft, &code, &obs, 3, 4, 1).unwrap();
        assert_eq!(rep.failures, 0);
    }

    #[test]
    fn random_bits_become_one() {
        let (ft, code) = setup();
        let gt = gt_kernel(&code, &ft).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Grid::from_fn(Rect::new(0, 0, 60, 60), |_, _| rng.gen_range(0..2));
        assert!(step_exact(&g, &gt).all(1));
        let ones = Grid::new(Rect::new(0, 0, 30, 30), 1);
        assert!(step_exact(&ones, &gt).all(1));
    }
}
