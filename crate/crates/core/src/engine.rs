//! Finite-window stepping of rule kernels with boundary handling and
//! light-cone exactness tracking.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IntVec2;
use crate::grid::{Grid, Rect};
use crate::rules::{Alphabet, NeighborFamily, RuleKernel};

/// Values read outside the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// State 0 outside.
    Zero,
    /// The maximal state outside.
    One,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(Boundary::Zero),
            "one" => Ok(Boundary::One),
            "periodic" => Ok(Boundary::Periodic),
            _ => Err(Error::Parse(format!("unknown boundary {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Storage {
    /// One bit per cell, `words_per_row` words per row; bits past `width` are 0.
    Bits(Vec<u64>),
    Bytes(Vec<u8>),
}

/// Finite rectangular window. Cell `(i, j)` has `i` in `0..width` (east) and
/// `j` in `0..height` (north). The lattice origin sits at `(width/2, height/2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    width: usize,
    height: usize,
    num_states: usize,
    top: u8,
    storage: Storage,
    boundary: Boundary,
    exact_margin: usize,
}

fn words_per_row(width: usize) -> usize {
    (width + 63) / 64
}

impl Window {
    /// Window filled with `fill`. `top` is the state used by [`Boundary::One`].
    pub fn new(width: usize, height: usize, alphabet: &Alphabet, fill: u8, boundary: Boundary) -> Self {
        assert!(width > 0 && height > 0, "window dimensions must be positive");
        assert!((fill as usize) < alphabet.len());
        let storage = if alphabet.is_binary() {
            let wpr = words_per_row(width);
            let mut bits = vec![0u64; wpr * height];
            if fill == 1 {
                for j in 0..height {
                    for k in 0..wpr {
                        bits[j * wpr + k] = tail_mask(width, k);
                    }
                }
            }
            Storage::Bits(bits)
        } else {
            Storage::Bytes(vec![fill; width * height])
        };
        Window { width, height, num_states: alphabet.len(), top: alphabet.top(), storage, boundary, exact_margin: 0 }
    }

    pub fn binary(width: usize, height: usize, fill: u8, boundary: Boundary) -> Self {
        Window::new(width, height, &Alphabet::binary(), fill, boundary)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        alphabet: &Alphabet,
        boundary: Boundary,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Self {
        let mut w = Window::new(width, height, alphabet, 0, boundary);
        for j in 0..height {
            for i in 0..width {
                let v = f(i, j);
                if v != 0 {
                    w.set(i, j, v);
                }
            }
        }
        w
    }

    /// Window whose cell `(i, j)` is `g[(x0 + i, y0 + j)]`.
    pub fn from_grid(g: &Grid, alphabet: &Alphabet, boundary: Boundary) -> Self {
        let r = g.rect();
        Window::from_fn(r.width, r.height, alphabet, boundary, |i, j| g.get(r.x0 + i as i64, r.y0 + j as i64))
    }

    /// Grid over `[0, width) x [0, height)`.
    pub fn to_grid(&self) -> Grid {
        Grid::from_fn(Rect::new(0, 0, self.width, self.height), |x, y| self.get(x as usize, y as usize))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn top(&self) -> u8 {
        self.top
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn set_boundary(&mut self, b: Boundary) {
        self.boundary = b;
    }

    /// Cells at border distance `>= exact_margin` agree with the infinite
    /// lattice evolution of the embedded configuration.
    pub fn exact_margin(&self) -> usize {
        self.exact_margin
    }

    pub fn reset_exact_margin(&mut self) {
        self.exact_margin = 0;
    }

    pub fn border_distance(&self, i: usize, j: usize) -> usize {
        i.min(self.width - 1 - i).min(j).min(self.height - 1 - j)
    }

    pub fn is_exact(&self, i: usize, j: usize) -> bool {
        self.border_distance(i, j) >= self.exact_margin
    }

    /// Exact region in window coordinates (possibly empty).
    pub fn exact_region(&self) -> Rect {
        let m = self.exact_margin as i64;
        Rect::new(0, 0, self.width, self.height).expand(-m, -m, -m, -m)
    }

    pub fn origin(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    /// Window coordinates of lattice point `z`, if inside.
    pub fn lattice_to_cell(&self, z: IntVec2) -> Option<(usize, usize)> {
        let (ox, oy) = self.origin();
        let i = ox as i64 + z.x;
        let j = oy as i64 + z.y;
        (i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height).then_some((i as usize, j as usize))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        debug_assert!(i < self.width && j < self.height);
        match &self.storage {
            Storage::Bits(b) => {
                let wpr = words_per_row(self.width);
                ((b[j * wpr + i / 64] >> (i % 64)) & 1) as u8
            }
            Storage::Bytes(v) => v[j * self.width + i],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, s: u8) {
        assert!(i < self.width && j < self.height);
        assert!((s as usize) < self.num_states, "state {s} outside alphabet");
        let width = self.width;
        match &mut self.storage {
            Storage::Bits(b) => {
                let wpr = words_per_row(width);
                let w = &mut b[j * wpr + i / 64];
                if s == 1 {
                    *w |= 1 << (i % 64);
                } else {
                    *w &= !(1 << (i % 64));
                }
            }
            Storage::Bytes(v) => v[j * width + i] = s,
        }
    }

    /// Value seen at `(x, y)`, which may lie outside the window.
    pub fn read(&self, x: i64, y: i64) -> u8 {
        let (w, h) = (self.width as i64, self.height as i64);
        if (0..w).contains(&x) && (0..h).contains(&y) {
            return self.get(x as usize, y as usize);
        }
        match self.boundary {
            Boundary::Zero => 0,
            Boundary::One => self.top,
            Boundary::Periodic => self.get(x.rem_euclid(w) as usize, y.rem_euclid(h) as usize),
        }
    }

    pub fn count(&self, s: u8) -> usize {
        match &self.storage {
            Storage::Bits(b) => {
                let ones: usize = b.iter().map(|w| w.count_ones() as usize).sum();
                if s == 1 {
                    ones
                } else {
                    self.width * self.height - ones
                }
            }
            Storage::Bytes(v) => v.iter().filter(|&&x| x == s).count(),
        }
    }

    pub fn all(&self, s: u8) -> bool {
        self.count(s) == self.width * self.height
    }

    /// Whether every cell of the window rectangle `r` is in state `s`.
    pub fn all_in(&self, r: Rect, s: u8) -> bool {
        r.cells().all(|(x, y)| self.get(x as usize, y as usize) == s)
    }

    /// Number of cells that differ from `other`.
    pub fn diff_count(&self, other: &Window) -> usize {
        assert_eq!((self.width, self.height), (other.width, other.height));
        match (&self.storage, &other.storage) {
            (Storage::Bits(a), Storage::Bits(b)) => a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum(),
            (Storage::Bytes(a), Storage::Bytes(b)) => a.iter().zip(b).filter(|(x, y)| x != y).count(),
            _ => panic!("storage kinds differ"),
        }
    }

    /// Cellwise `self <= other` in the binary order.
    pub fn le(&self, other: &Window) -> bool {
        match (&self.storage, &other.storage) {
            (Storage::Bits(a), Storage::Bits(b)) => a.iter().zip(b).all(|(x, y)| x & !y == 0),
            _ => panic!("cellwise order is defined for binary windows"),
        }
    }

    /// Padded copy covering `[-pad, width+pad) x [-pad, height+pad)`.
    fn padded_grid(&self, pad: i64) -> Grid {
        let r = Rect::new(0, 0, self.width, self.height).grow(pad);
        Grid::from_fn(r, |x, y| self.read(x, y))
    }

    fn check_kernel(&self, k: &RuleKernel) -> Result<()> {
        if k.alphabet().len() != self.num_states {
            return Err(Error::AlphabetMismatch { window: self.num_states, kernel: k.alphabet().len() });
        }
        Ok(())
    }

    fn advance_margin(&mut self, r: usize) {
        if self.boundary != Boundary::Periodic {
            let cap = (self.width.min(self.height) + 1) / 2;
            self.exact_margin = (self.exact_margin + r).min(cap);
        }
    }

    /// PBM image, top row first, 1 drawn black.
    pub fn write_pbm(&self, mut out: impl Write, plain: bool) -> Result<()> {
        if self.num_states != 2 {
            return Err(Error::Parse("PBM export needs a binary window".into()));
        }
        if plain {
            writeln!(out, "P1\n{} {}", self.width, self.height)?;
            for j in (0..self.height).rev() {
                let line: Vec<&str> = (0..self.width).map(|i| if self.get(i, j) == 1 { "1" } else { "0" }).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        } else {
            write!(out, "P4\n{} {}\n", self.width, self.height)?;
            let mut row = vec![0u8; (self.width + 7) / 8];
            for j in (0..self.height).rev() {
                row.iter_mut().for_each(|b| *b = 0);
                for i in 0..self.width {
                    if self.get(i, j) == 1 {
                        row[i / 8] |= 0x80 >> (i % 8);
                    }
                }
                out.write_all(&row)?;
            }
        }
        Ok(())
    }

    pub fn to_pbm(&self, plain: bool) -> Vec<u8> {
        let mut v = Vec::new();
        self.write_pbm(&mut v, plain).expect("in-memory write");
        v
    }

    /// Reads P1 or P4 data.
    pub fn from_pbm(data: &[u8], boundary: Boundary) -> Result<Window> {
        let mut pos = 0usize;
        let mut token = |data: &[u8]| -> Result<String> {
            loop {
                while pos < data.len() && data[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < data.len() && data[pos] == b'#' {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < data.len() && !data[pos].is_ascii_whitespace() && data[pos] != b'#' {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Parse("truncated PBM header".into()));
            }
            Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
        };
        let magic = token(data)?;
        let num = |s: String| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad PBM dimension {s:?}")));
        let width = num(token(data)?)?;
        let height = num(token(data)?)?;
        if width == 0 || height == 0 {
            return Err(Error::Parse("PBM dimensions must be positive".into()));
        }
        let mut w = Window::binary(width, height, 0, boundary);
        match magic.as_str() {
            "P1" => {
                let mut cells = data[pos..].iter().filter(|c| **c == b'0' || **c == b'1');
                for j in (0..height).rev() {
                    for i in 0..width {
                        match cells.next() {
                            Some(b'1') => w.set(i, j, 1),
                            Some(_) => {}
                            None => return Err(Error::Parse("truncated PBM data".into())),
                        }
                    }
                }
            }
            "P4" => {
                let body = &data[pos + 1..];
                let stride = (width + 7) / 8;
                if body.len() < stride * height {
                    return Err(Error::Parse("truncated PBM data".into()));
                }
                for (r, j) in (0..height).rev().enumerate() {
                    for i in 0..width {
                        if body[r * stride + i / 8] & (0x80 >> (i % 8)) != 0 {
                            w.set(i, j, 1);
                        }
                    }
                }
            }
            m => return Err(Error::Parse(format!("unsupported PBM magic {m:?}"))),
        }
        Ok(w)
    }

    /// JSON state grid with state names, top row first.
    pub fn to_json(&self, alphabet: &Alphabet) -> serde_json::Value {
        let rows: Vec<Vec<&str>> = (0..self.height)
            .rev()
            .map(|j| (0..self.width).map(|i| alphabet.name(self.get(i, j))).collect())
            .collect();
        serde_json::json!({
            "width": self.width,
            "height": self.height,
            "alphabet": alphabet.names(),
            "rows": rows,
        })
    }

    pub fn from_json(v: &serde_json::Value, alphabet: &Alphabet, boundary: Boundary) -> Result<Window> {
        let rows = v
            .get("rows")
            .and_then(|r| r.as_array())
            .ok_or_else(|| Error::Parse("state grid needs a \"rows\" array".into()))?;
        let height = rows.len();
        let width = rows.first().and_then(|r| r.as_array()).map(|r| r.len()).unwrap_or(0);
        if width == 0 {
            return Err(Error::Parse("empty state grid".into()));
        }
        let mut w = Window::new(width, height, alphabet, 0, boundary);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_array().filter(|a| a.len() == width).ok_or_else(|| Error::Parse("ragged state grid".into()))?;
            for (i, cell) in row.iter().enumerate() {
                let s = match cell {
                    serde_json::Value::String(name) => alphabet.index_of(name),
                    serde_json::Value::Number(n) => n.as_u64().filter(|&n| (n as usize) < alphabet.len()).map(|n| n as u8),
                    _ => None,
                }
                .ok_or_else(|| Error::Parse(format!("unknown state {cell}")))?;
                w.set(i, height - 1 - r, s);
            }
        }
        Ok(w)
    }
}

fn tail_mask(width: usize, k: usize) -> u64 {
    let lo = k * 64;
    if lo + 64 <= width {
        u64::MAX
    } else if lo >= width {
        0
    } else {
        (1u64 << (width - lo)) - 1
    }
}

/// Largest family radius handled by the word-parallel stepper.
const MAX_BIT_RADIUS: i64 = 63;

/// Bit rows padded by one word on each side and `r` rows above and below.
struct PaddedPlane {
    stride: usize,
    r: usize,
    words: Vec<u64>,
}

impl PaddedPlane {
    fn new(w: &Window, bits: &[u64], r: usize) -> Self {
        let wpr = words_per_row(w.width);
        let stride = wpr + 2;
        let rows = w.height + 2 * r;
        let mut words = vec![0u64; stride * rows];
        for pj in 0..rows {
            let y = pj as i64 - r as i64;
            let row = &mut words[pj * stride..(pj + 1) * stride];
            let inside = (0..w.height as i64).contains(&y);
            if inside {
                row[1..=wpr].copy_from_slice(&bits[y as usize * wpr..(y as usize + 1) * wpr]);
            } else if w.boundary == Boundary::Periodic {
                let yy = y.rem_euclid(w.height as i64) as usize;
                row[1..=wpr].copy_from_slice(&bits[yy * wpr..(yy + 1) * wpr]);
            } else if w.boundary == Boundary::One {
                row.iter_mut().for_each(|x| *x = u64::MAX);
                continue;
            } else {
                continue;
            }
            // left pad word and the columns from width up to the end of the row
            let pad_cols = (-64i64..0).chain(w.width as i64..(wpr as i64 * 64 + 64));
            for x in pad_cols {
                let v = w.read(x, y.rem_euclid(w.height as i64)) as u64;
                if v == 1 {
                    let b = (x + 64) as usize;
                    row[b / 64] |= 1 << (b % 64);
                }
            }
        }
        PaddedPlane { stride, r, words }
    }

    /// Bits for columns `x..x+64` of row `y`.
    #[inline]
    fn fetch(&self, y: i64, x: i64) -> u64 {
        let row = (y + self.r as i64) as usize * self.stride;
        let b = (x + 64) as usize;
        let (k, off) = (b / 64, b % 64);
        let lo = self.words[row + k];
        if off == 0 {
            lo
        } else {
            (lo >> off) | (self.words[row + k + 1] << (64 - off))
        }
    }
}

fn step_family_bits(w: &Window, bits: &[u64], family: &NeighborFamily) -> Vec<u64> {
    let r = family.radius() as usize;
    let plane = PaddedPlane::new(w, bits, r);
    let wpr = words_per_row(w.width);
    let mut out = vec![0u64; bits.len()];
    for j in 0..w.height {
        for k in 0..wpr {
            let x = (k * 64) as i64;
            let mut acc = bits[j * wpr + k];
            for set in family.sets() {
                let mut a = u64::MAX;
                for c in set.cells() {
                    a &= plane.fetch(j as i64 + c.y, x + c.x);
                    if a == 0 {
                        break;
                    }
                }
                acc |= a;
            }
            out[j * wpr + k] = acc & tail_mask(w.width, k);
        }
    }
    out
}

fn pack_bits(width: usize, height: usize, cells: &[u8]) -> Vec<u64> {
    let wpr = words_per_row(width);
    let mut bits = vec![0u64; wpr * height];
    for j in 0..height {
        for i in 0..width {
            if cells[j * width + i] == 1 {
                bits[j * wpr + i / 64] |= 1 << (i % 64);
            }
        }
    }
    bits
}

/// One synchronous step, also returning the number of changed cells.
pub fn step_counted(w: &Window, k: &RuleKernel) -> Result<(Window, usize)> {
    w.check_kernel(k)?;
    let r = k.radius();
    let mut next = w.clone();
    match (&w.storage, k.family()) {
        (Storage::Bits(bits), Some(fam)) if fam.radius() <= MAX_BIT_RADIUS => {
            next.storage = Storage::Bits(step_family_bits(w, bits, fam));
        }
        _ => {
            let g = w.padded_grid(r as i64);
            let cells = k.step_region(&g, Rect::new(0, 0, w.width, w.height));
            next.storage = match w.storage {
                Storage::Bits(_) => Storage::Bits(pack_bits(w.width, w.height, &cells)),
                Storage::Bytes(_) => Storage::Bytes(cells),
            };
        }
    }
    next.advance_margin(r);
    let changed = w.diff_count(&next);
    Ok((next, changed))
}

pub fn step(w: &Window, k: &RuleKernel) -> Result<Window> {
    step_counted(w, k).map(|(n, _)| n)
}

/// Applies `k` to a lattice grid, keeping only the cells whose reads lie
/// inside it; the result is exact for every extension of `src`.
pub fn step_exact(src: &Grid, k: &RuleKernel) -> Grid {
    let region = k.reach().interior(src.rect());
    if region.is_empty() {
        return Grid::from_vec(Rect::new(region.x0, region.y0, 0, 0), Vec::new());
    }
    Grid::from_vec(region, k.step_region(src, region))
}

/// Per-cell reference stepper built only on `LocalRule::eval`.
pub fn step_scalar(w: &Window, k: &RuleKernel) -> Result<Window> {
    w.check_kernel(k)?;
    let r = k.radius();
    let g = w.padded_grid(r as i64);
    let mut next = w.clone();
    for j in 0..w.height {
        for i in 0..w.width {
            next.set(i, j, k.eval(&g, i as i64, j as i64));
        }
    }
    next.advance_margin(r);
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    /// Steps that changed at least one cell.
    pub steps_taken: usize,
    /// A step produced no change before the horizon.
    pub fixed: bool,
    pub changed_cells_per_step: Vec<usize>,
}

/// Default horizon for a window.
pub fn default_horizon(w: &Window) -> usize {
    w.width * w.height
}

/// Steps until nothing changes or `horizon` changing steps have run.
pub fn run_until_fixed(w: &Window, k: &RuleKernel, horizon: usize) -> Result<(Window, RunReport)> {
    let mut cur = w.clone();
    let mut report = RunReport { steps_taken: 0, fixed: false, changed_cells_per_step: Vec::new() };
    while report.steps_taken < horizon {
        let (next, changed) = step_counted(&cur, k)?;
        if changed == 0 {
            report.fixed = true;
            return Ok((cur, report));
        }
        report.steps_taken += 1;
        report.changed_cells_per_step.push(changed);
        cur = next;
    }
    // one more probe so a window fixed exactly at the horizon is reported as such
    let (_, changed) = step_counted(&cur, k)?;
    report.fixed = changed == 0;
    Ok((cur, report))
}

/// First time the origin cell holds the maximal state, `None` if it does not
/// within `horizon` steps.
pub fn origin_fixation_time(w: &Window, k: &RuleKernel, horizon: usize) -> Result<Option<usize>> {
    let (ox, oy) = w.origin();
    let top = k.alphabet().top();
    let dist = w.border_distance(ox, oy);
    let r = k.radius();
    let periodic = w.boundary == Boundary::Periodic;
    let exact_at = |t: usize, m0: usize| periodic || m0 + r * t <= dist;
    let m0 = w.exact_margin;
    let mut cur = w.clone();
    for t in 0..=horizon {
        if !exact_at(t, m0) {
            return Err(Error::ExactnessViolated);
        }
        if cur.get(ox, oy) == top {
            return Ok(Some(t));
        }
        if t == horizon {
            break;
        }
        let (next, changed) = step_counted(&cur, k)?;
        if changed == 0 {
            return if exact_at(horizon, m0) { Ok(None) } else { Err(Error::ExactnessViolated) };
        }
        cur = next;
    }
    Ok(None)
}

/// Whether the configuration with 0 exactly on `zero_cells` is fixed by `f_E`.
pub fn check_fixed_point_family(zero_cells: &[IntVec2], e: &NeighborFamily) -> bool {
    let c: HashSet<IntVec2> = zero_cells.iter().copied().collect();
    c.iter().all(|&z| e.sets().iter().all(|n| n.cells().iter().any(|&d| c.contains(&(z + d)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{canonicalize_family, rule_from_family, LocalRule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam(sets: &[&[(i64, i64)]]) -> NeighborFamily {
        canonicalize_family(sets.iter().map(|s| s.iter().map(|&p| p.into()).collect()).collect()).unwrap()
    }

    fn h() -> RuleKernel {
        rule_from_family(&fam(&[&[(0, 1), (1, 1)]]))
    }

    fn random_family(rng: &mut impl Rng, r: i64) -> NeighborFamily {
        loop {
            let sets: Vec<Vec<IntVec2>> = (0..rng.gen_range(1..=4))
                .map(|_| {
                    (0..rng.gen_range(1..=4))
                        .map(|_| loop {
                            let c = IntVec2::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r));
                            if !c.is_zero() {
                                break c;
                            }
                        })
                        .collect()
                })
                .collect();
            if let Ok(f) = canonicalize_family(sets) {
                return f;
            }
        }
    }

    fn random_window(rng: &mut impl Rng, w: usize, h: usize, p: f64, b: Boundary) -> Window {
        Window::from_fn(w, h, &Alphabet::binary(), b, |_, _| rng.gen_bool(p) as u8)
    }

    #[test]
    fn step_examples() {
        let w = Window::binary(9, 7, 1, Boundary::Zero);
        assert!(step(&w, &h()).unwrap().all(1));

        let w = Window::from_fn(8, 5, &Alphabet::binary(), Boundary::One, |_, j| (j >= 1) as u8);
        let n = step(&w, &h()).unwrap();
        assert!(n.all(1));

        let mut w = Window::binary(5, 5, 1, Boundary::One);
        w.set(2, 2, 0);
        let e = rule_from_family(&fam(&[&[(-1, 0), (1, 0)]]));
        assert!(step(&w, &e).unwrap().all(1));
    }

    #[test]
    fn run_examples() {
        let w = Window::binary(16, 16, 0, Boundary::Zero);
        let (out, rep) = run_until_fixed(&w, &h(), 256).unwrap();
        assert!(rep.fixed && rep.steps_taken == 0 && out == w);

        let mut w = Window::binary(10, 10, 1, Boundary::One);
        w.set(4, 4, 0);
        w.set(5, 4, 0);
        let e = rule_from_family(&fam(&[&[(-1, 0), (1, 0)]]));
        let (out, rep) = run_until_fixed(&w, &e, 100).unwrap();
        assert!(rep.fixed && rep.steps_taken == 0);
        assert_eq!(out.count(0), 2);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = random_window(&mut rng, 64, 64, 0.9, Boundary::One);
        let (out, rep) = run_until_fixed(&w, &h(), 64 * 64).unwrap();
        assert!(rep.fixed && out.all(1));
        assert!(rep.steps_taken <= 64);
    }

    #[test]
    fn origin_time_examples() {
        let w = Window::binary(9, 9, 1, Boundary::One);
        assert_eq!(origin_fixation_time(&w, &h(), 2).unwrap(), Some(0));

        // 0-path of length 3 above the origin: (0,0),(0,1),(1,2)
        let mut w = Window::binary(21, 21, 1, Boundary::One);
        for z in [(0, 0), (0, 1), (1, 2)] {
            let (i, j) = w.lattice_to_cell(z.into()).unwrap();
            w.set(i, j, 0);
        }
        assert_eq!(origin_fixation_time(&w, &h(), 6).unwrap(), Some(3));

        let w = Window::binary(16, 16, 0, Boundary::Periodic);
        assert_eq!(origin_fixation_time(&w, &h(), 100).unwrap(), None);

        let w = Window::binary(9, 9, 0, Boundary::Zero);
        assert!(matches!(origin_fixation_time(&w, &h(), 10), Err(Error::ExactnessViolated)));
    }

    #[test]
    fn fixed_point_family_examples() {
        let e = fam(&[&[(-1, 0), (1, 0)]]);
        assert!(check_fixed_point_family(&[IntVec2::new(0, 0), IntVec2::new(1, 0)], &e));
        assert!(!check_fixed_point_family(&[IntVec2::new(0, 0)], &e));
        assert!(check_fixed_point_family(&[], &e));
    }

    #[test]
    fn bit_and_scalar_steppers_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bounds = [Boundary::Zero, Boundary::One, Boundary::Periodic];
        for t in 0..1000 {
            let r = rng.gen_range(1..=3);
            let e = random_family(&mut rng, r);
            let k = rule_from_family(&e);
            let (w, hgt) = (rng.gen_range(1..150), rng.gen_range(1..12));
            let p = rng.gen();
            let win = random_window(&mut rng, w, hgt, p, bounds[t % 3]);
            let a = step(&win, &k).unwrap();
            let b = step_scalar(&win, &k).unwrap();
            assert_eq!(a, b, "family {e:?} width {w}");
        }
    }

    #[test]
    fn generic_path_matches_bit_path() {
        // a wrapper without family() goes through step_region
        struct Opaque(RuleKernel);
        impl LocalRule for Opaque {
            fn name(&self) -> String {
                "opaque".into()
            }
            fn alphabet(&self) -> &Alphabet {
                self.0.alphabet()
            }
            fn radius(&self) -> usize {
                self.0.radius()
            }
            fn eval(&self, src: &Grid, x: i64, y: i64) -> u8 {
                self.0.eval(src, x, y)
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 0..100 {
            let k = rule_from_family(&random_family(&mut rng, 2));
            let o = RuleKernel::new(Opaque(k.clone()));
            let b = [Boundary::Zero, Boundary::One, Boundary::Periodic][t % 3];
            let win = random_window(&mut rng, 70, 9, 0.6, b);
            assert_eq!(step(&win, &k).unwrap(), step(&win, &o).unwrap());
        }
    }

    #[test]
    fn step_is_monotone_and_freezing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = rule_from_family(&random_family(&mut rng, 2));
            let x = random_window(&mut rng, 40, 20, 0.5, Boundary::Periodic);
            let mut y = x.clone();
            for _ in 0..100 {
                y.set(rng.gen_range(0..40), rng.gen_range(0..20), 1);
            }
            let (fx, fy) = (step(&x, &k).unwrap(), step(&y, &k).unwrap());
            assert!(fx.le(&fy));
            assert!(x.le(&fx));
        }
    }

    #[test]
    fn exact_region_matches_padded_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let e = random_family(&mut rng, 2);
            let k = rule_from_family(&e);
            let r = k.radius();
            let steps = 4;
            let big = random_window(&mut rng, 60, 60, 0.55, Boundary::Zero);
            let pad = r * steps;
            let small = Window::from_fn(60 - 2 * pad, 60 - 2 * pad, &Alphabet::binary(), Boundary::One, |i, j| {
                big.get(i + pad, j + pad)
            });
            let (mut a, mut b) = (big.clone(), small);
            for _ in 0..steps {
                a = step(&a, &k).unwrap();
                b = step(&b, &k).unwrap();
            }
            assert_eq!(b.exact_margin(), (r * steps).min((b.width() + 1) / 2));
            let ex = b.exact_region();
            for (i, j) in ex.cells() {
                assert_eq!(b.get(i as usize, j as usize), a.get(i as usize + pad, j as usize + pad));
            }
        }
    }

    #[test]
    fn pbm_and_json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_window(&mut rng, 13, 7, 0.5, Boundary::Zero);
        for plain in [true, false] {
            let back = Window::from_pbm(&w.to_pbm(plain), Boundary::Zero).unwrap();
            assert_eq!(back, w);
        }
        let a = Alphabet::binary();
        let back = Window::from_json(&w.to_json(&a), &a, Boundary::Zero).unwrap();
        assert_eq!(back, w);
        assert!(Window::from_pbm(b"P1\n2 2\n1 0", Boundary::Zero).is_err());
    }

    #[test]
    fn alphabet_mismatch() {
        let a = Alphabet::flat(vec!["a".into(), "b".into(), "M".into()], 2);
        let w = Window::new(4, 4, &a, 0, Boundary::Zero);
        assert!(matches!(step(&w, &h()), Err(Error::AlphabetMismatch { .. })));
    }
}
