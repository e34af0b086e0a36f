//! Multi-state freezing automaton checking a Turing machine space-time
//! diagram inside rectangular frames, with a maximal error state `M`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::tm::{Computation, Move, TMSpec};
use crate::engine::{step, Boundary, Window};
use crate::error::{Error, Result};
use crate::grid::{Grid, Rect};
use crate::rules::{Alphabet, LocalRule, RuleKernel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Arrival {
    Start,
    FromLeft,
    FromRight,
}

/// Space-time cell: a tape symbol, possibly under the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Tile {
    pub symbol: usize,
    pub head: Option<(usize, Arrival)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Dir {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

pub const DIRS: [Dir; 8] = [Dir::N, Dir::NE, Dir::E, Dir::SE, Dir::S, Dir::SW, Dir::W, Dir::NW];

impl Dir {
    pub fn name(self) -> &'static str {
        match self {
            Dir::N => "N",
            Dir::NE => "NE",
            Dir::E => "E",
            Dir::SE => "SE",
            Dir::S => "S",
            Dir::SW => "SW",
            Dir::W => "W",
            Dir::NW => "NW",
        }
    }

    /// Active neighbors `[north, east, south, west]`.
    fn active(self) -> [bool; 4] {
        let n = self.name();
        [!n.contains('N'), !n.contains('E'), !n.contains('S'), !n.contains('W')]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Tile(Tile),
    Dir(Dir),
    M,
}

/// Per-state facts used by the 2x2 predicate.
#[derive(Clone, Copy, Debug)]
struct Info {
    kind: Kind,
    /// For tiles under a head with a transition: move and next state.
    leaves: Option<(Move, usize)>,
}

/// Compiled automaton for a machine: states are the tiles, then the eight
/// directions, then `M`.
#[derive(Clone)]
pub struct CompiledFT {
    tm: TMSpec,
    alphabet: Alphabet,
    tiles: Vec<Tile>,
    rule: Arc<FtRule>,
    kernel: RuleKernel,
}

struct FtRule {
    alphabet: Alphabet,
    info: Vec<Info>,
    h_ok: Vec<bool>,
    v_ok: Vec<bool>,
    q0: usize,
    qh: usize,
    m: u8,
}

impl FtRule {
    fn q(&self) -> usize {
        self.info.len()
    }

    fn tile(&self, s: u8) -> Option<Tile> {
        match self.info[s as usize].kind {
            Kind::Tile(t) => Some(t),
            _ => None,
        }
    }

    fn dir(&self, s: u8) -> Option<Dir> {
        match self.info[s as usize].kind {
            Kind::Dir(d) => Some(d),
            _ => None,
        }
    }

    fn valid(&self, tl: u8, tr: u8, bl: u8, br: u8) -> bool {
        let q = self.q();
        let (tl, tr, bl, br) = (tl as usize, tr as usize, bl as usize, br as usize);
        if !(self.h_ok[bl * q + br] && self.h_ok[tl * q + tr] && self.v_ok[bl * q + tl] && self.v_ok[br * q + tr]) {
            return false;
        }
        let (tl, tr, bl, br) = (tl as u8, tr as u8, bl as u8, br as u8);
        let head = |s: u8| self.tile(s).and_then(|t| t.head);
        // initial row
        match (self.dir(bl), self.dir(br)) {
            (Some(Dir::SW), Some(Dir::S)) => {
                if head(tr) != Some((self.q0, Arrival::Start)) {
                    return false;
                }
            }
            (Some(Dir::S), Some(Dir::S)) => {
                if head(tr).is_some() {
                    return false;
                }
            }
            _ => {}
        }
        // head moving right lands top-right, moving left lands top-left
        let right_in = match self.info[bl as usize].leaves {
            Some((Move::R, n)) => Some((n, Arrival::FromLeft)),
            _ => None,
        };
        let tr_arrival = head(tr).filter(|h| h.1 == Arrival::FromLeft);
        if right_in != tr_arrival {
            return false;
        }
        let left_in = match self.info[br as usize].leaves {
            Some((Move::L, n)) => Some((n, Arrival::FromRight)),
            _ => None,
        };
        let tl_arrival = head(tl).filter(|h| h.1 == Arrival::FromRight);
        if left_in != tl_arrival {
            return false;
        }
        // the computation ends in the upper-right interior cell
        if self.tile(bl).is_some()
            && self.dir(br) == Some(Dir::E)
            && self.dir(tl) == Some(Dir::N)
            && self.dir(tr) == Some(Dir::NE)
            && head(bl).map(|h| h.0) != Some(self.qh)
        {
            return false;
        }
        true
    }
}

fn h_pair(l: Kind, r: Kind) -> bool {
    use Dir::*;
    use Kind::Dir as D;
    match (l, r) {
        (Kind::M, Kind::M) | (Kind::M, D(W | SW | NW)) | (D(E | SE | NE), Kind::M) => true,
        (D(SW), D(S)) | (D(S), D(S)) | (D(S), D(SE)) => true,
        (D(NW), D(N)) | (D(N), D(N)) | (D(N), D(NE)) => true,
        (D(W), Kind::Tile(_)) | (Kind::Tile(_), D(E)) => true,
        (Kind::Tile(a), Kind::Tile(b)) => a.head.is_none() || b.head.is_none(),
        _ => false,
    }
}

fn v_pair(tm: &TMSpec, b: Kind, t: Kind) -> bool {
    use Dir::*;
    use Kind::Dir as D;
    match (b, t) {
        (Kind::M, Kind::M) | (Kind::M, D(SW | S | SE)) | (D(NW | N | NE), Kind::M) => true,
        (D(SW), D(W)) | (D(W), D(W)) | (D(W), D(NW)) => true,
        (D(SE), D(E)) | (D(E), D(E)) | (D(E), D(NE)) => true,
        (D(S), Kind::Tile(t)) => t.symbol == 0 && matches!(t.head, None | Some((_, Arrival::Start))),
        (Kind::Tile(b), D(N)) => b.head.is_none_or(|h| h.0 == tm.halt()),
        (Kind::Tile(b), Kind::Tile(t)) => {
            if matches!(t.head, Some((_, Arrival::Start))) {
                return false;
            }
            match b.head {
                Some((q, _)) => match tm.action(q, b.symbol) {
                    Some((w, _, _)) => t.symbol == w && t.head.is_none(),
                    None => false,
                },
                None => t.symbol == b.symbol,
            }
        }
        _ => false,
    }
}

fn enumerate_tiles(tm: &TMSpec) -> Vec<Tile> {
    let mut tiles = Vec::new();
    for s in 0..tm.symbols().len() {
        tiles.push(Tile { symbol: s, head: None });
        for q in 0..tm.states().len() {
            let arrivals = [
                (Arrival::Start, s == 0 && q == tm.initial()),
                (Arrival::FromLeft, tm.enters(q, Move::R)),
                (Arrival::FromRight, tm.enters(q, Move::L)),
            ];
            for (a, ok) in arrivals {
                if ok {
                    tiles.push(Tile { symbol: s, head: Some((q, a)) });
                }
            }
        }
    }
    tiles
}

fn tile_name(tm: &TMSpec, t: &Tile) -> String {
    let sym = &tm.symbols()[t.symbol];
    match t.head {
        None => format!("t:{sym}"),
        Some((q, a)) => {
            let mark = match a {
                Arrival::Start => '^',
                Arrival::FromLeft => '>',
                Arrival::FromRight => '<',
            };
            format!("t:{sym}|{}{mark}", tm.states()[q])
        }
    }
}

pub fn compile_tm(tm: &TMSpec) -> Result<CompiledFT> {
    let tiles = enumerate_tiles(tm);
    let q = tiles.len() + DIRS.len() + 1;
    if q > 256 {
        return Err(Error::InvalidMachine(format!("{q} automaton states exceed 256")));
    }
    let mut names: Vec<String> = tiles.iter().map(|t| tile_name(tm, t)).collect();
    names.extend(DIRS.iter().map(|d| d.name().to_string()));
    names.push("M".into());
    let mut info: Vec<Info> = tiles
        .iter()
        .map(|&t| Info {
            kind: Kind::Tile(t),
            leaves: t.head.and_then(|(q, _)| tm.action(q, t.symbol)).map(|(_, m, n)| (m, n)),
        })
        .collect();
    info.extend(DIRS.iter().map(|&d| Info { kind: Kind::Dir(d), leaves: None }));
    info.push(Info { kind: Kind::M, leaves: None });
    let mut h_ok = vec![false; q * q];
    let mut v_ok = vec![false; q * q];
    for a in 0..q {
        for b in 0..q {
            h_ok[a * q + b] = h_pair(info[a].kind, info[b].kind);
            v_ok[a * q + b] = v_pair(tm, info[a].kind, info[b].kind);
        }
    }
    let alphabet = Alphabet::flat(names, (q - 1) as u8);
    let rule = Arc::new(FtRule {
        alphabet: alphabet.clone(),
        info,
        h_ok,
        v_ok,
        q0: tm.initial(),
        qh: tm.halt(),
        m: (q - 1) as u8,
    });
    let kernel = RuleKernel::new(FtKernel(rule.clone()));
    Ok(CompiledFT { tm: tm.clone(), alphabet, tiles, rule, kernel })
}

struct FtKernel(Arc<FtRule>);

impl LocalRule for FtKernel {
    fn name(&self) -> String {
        format!("tm-frame({} states)", self.0.q())
    }

    fn alphabet(&self) -> &Alphabet {
        &self.0.alphabet
    }

    fn radius(&self) -> usize {
        1
    }

    fn eval(&self, src: &Grid, x: i64, y: i64) -> u8 {
        let r = &self.0;
        let s = src.get(x, y);
        if s == r.m {
            return s;
        }
        let at = |dx: i64, dy: i64| src.get(x + dx, y + dy);
        for (ox, oy) in [(-1, -1), (0, -1), (-1, 0), (0, 0)] {
            if !r.valid(at(ox, oy + 1), at(ox + 1, oy + 1), at(ox, oy), at(ox + 1, oy)) {
                return r.m;
            }
        }
        let active = r.dir(s).map_or([true; 4], Dir::active);
        let nbrs = [at(0, 1), at(1, 0), at(0, -1), at(-1, 0)];
        if active.iter().zip(nbrs).any(|(&a, v)| a && v == r.m) {
            return r.m;
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FtSummary {
    pub states: usize,
    pub tiles: usize,
    pub tape_symbols: usize,
    pub machine_states: usize,
    pub valid_2x2: usize,
}

impl CompiledFT {
    pub fn tm(&self) -> &TMSpec {
        &self.tm
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kernel(&self) -> &RuleKernel {
        &self.kernel
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn num_states(&self) -> usize {
        self.rule.q()
    }

    pub fn m(&self) -> u8 {
        self.rule.m
    }

    pub fn dir_state(&self, d: Dir) -> u8 {
        (self.tiles.len() + DIRS.iter().position(|&x| x == d).unwrap()) as u8
    }

    pub fn tile_state(&self, t: Tile) -> Option<u8> {
        self.tiles.iter().position(|&x| x == t).map(|i| i as u8)
    }

    pub fn kind(&self, s: u8) -> Kind {
        self.rule.info[s as usize].kind
    }

    /// Whether the pattern `[tl tr / bl br]` is allowed.
    pub fn is_valid_2x2(&self, tl: u8, tr: u8, bl: u8, br: u8) -> bool {
        self.rule.valid(tl, tr, bl, br)
    }

    /// Every allowed pattern as `[tl, tr, bl, br]`, in index order.
    pub fn valid_2x2(&self) -> Vec<[u8; 4]> {
        let q = self.num_states() as u16;
        let mut out = Vec::new();
        for tl in 0..q {
            for tr in 0..q {
                for bl in 0..q {
                    for br in 0..q {
                        let p = [tl as u8, tr as u8, bl as u8, br as u8];
                        if self.rule.valid(p[0], p[1], p[2], p[3]) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn summary(&self) -> FtSummary {
        FtSummary {
            states: self.num_states(),
            tiles: self.tiles.len(),
            tape_symbols: self.tm.symbols().len(),
            machine_states: self.tm.states().len(),
            valid_2x2: self.valid_2x2().len(),
        }
    }

    /// Frame around the space-time diagram of `c`, with a ring of `M`
    /// outside. Cell `(0, 0)` is the lower-left `M`; interior cell for tape
    /// position `x` at time `t` is `(x + 2, t + 2)`.
    pub fn frame_pattern(&self, c: &Computation) -> Grid {
        let (w, h) = (c.max_visited as i64 + 1, c.rows.len() as i64);
        self.frame_region(c, Rect::new(0, 0, (w + 4) as usize, (h + 4) as usize), w, true)
    }

    /// Frame of an unfinished run: M ring and W/S borders only, tape width
    /// `width`, cut off at the top and right edges of the result.
    pub fn open_frame_pattern(&self, c: &Computation, width: usize) -> Grid {
        let h = c.rows.len();
        self.frame_region(c, Rect::new(0, 0, width + 2, h + 2), width as i64, false)
    }

    fn frame_region(&self, c: &Computation, rect: Rect, w: i64, closed: bool) -> Grid {
        let h = c.rows.len() as i64;
        Grid::from_fn(rect, |x, y| {
            let (fx, fy) = (x - 1, y - 1);
            if fx < 0 || fy < 0 || fx > w + 1 || fy > h + 1 {
                return self.m();
            }
            let d = match (fx, fy) {
                (0, 0) => Some(Dir::SW),
                _ if !closed && fx == 0 => Some(Dir::W),
                _ if !closed && fy == 0 => Some(Dir::S),
                _ if !closed => None,
                (0, y) if y == h + 1 => Some(Dir::NW),
                (x, 0) if x == w + 1 => Some(Dir::SE),
                (x, y) if x == w + 1 && y == h + 1 => Some(Dir::NE),
                (0, _) => Some(Dir::W),
                (x, _) if x == w + 1 => Some(Dir::E),
                (_, 0) => Some(Dir::S),
                (_, y) if y == h + 1 => Some(Dir::N),
                _ => None,
            };
            if let Some(d) = d {
                return self.dir_state(d);
            }
            let (pos, t) = ((fx - 1) as usize, (fy - 1) as usize);
            let row = &c.rows[t];
            let head = (row.head == pos).then(|| {
                let a = if t == 0 {
                    Arrival::Start
                } else if c.rows[t - 1].head < pos {
                    Arrival::FromLeft
                } else {
                    Arrival::FromRight
                };
                (row.state, a)
            });
            self.tile_state(Tile { symbol: c.symbol_at(t, pos), head }).expect("tiles cover every reachable pair")
        })
    }

    /// Random pattern on `rect` whose 2x2 windows are all valid. Rows are
    /// drawn exactly from those compatible with the row below, non-M states
    /// weighted 4:1 over M; a row with no successor is redrawn. `None` if the
    /// row budget runs out.
    pub fn random_valid_window(&self, rect: Rect, rng: &mut impl Rng) -> Option<Grid> {
        let (w, h) = (rect.width, rect.height);
        if w == 0 || h == 0 {
            return Some(Grid::new(rect, self.m()));
        }
        let mut up = HashSet::new(); // (bl, br) with something above
        for [_, _, bl, br] in self.valid_2x2() {
            up.insert((bl, br));
        }
        let q = self.num_states() as u8;
        let m = self.m();
        let compat = |below: Option<&[u8]>, x: usize, u: u8, v: u8, last: bool| {
            below.map_or(true, |b| self.rule.valid(u, v, b[x - 1], b[x])) && (last || up.contains(&(u, v)))
        };
        // forward reachability of each state at each column
        let feasible = |below: Option<&[u8]>, last: bool| -> Vec<Vec<bool>> {
            let mut f = vec![vec![false; q as usize]; w];
            f[0] = vec![true; q as usize];
            for x in 1..w {
                for v in 0..q {
                    f[x][v as usize] = (0..q).any(|u| f[x - 1][u as usize] && compat(below, x, u, v, last));
                }
            }
            f
        };
        let weight = |v: u8| if v == m { 1u32 } else { 4 };
        let pick = |rng: &mut dyn rand::RngCore, ok: &dyn Fn(u8) -> bool| -> Option<u8> {
            let total: u32 = (0..q).filter(|&v| ok(v)).map(weight).sum();
            if total == 0 {
                return None;
            }
            let mut r = rng.gen_range(0..total);
            (0..q).filter(|&v| ok(v)).find(|&v| {
                if r < weight(v) {
                    true
                } else {
                    r -= weight(v);
                    false
                }
            })
        };
        let mut rows: Vec<Vec<u8>> = Vec::with_capacity(h);
        let mut budget = 40 * h + 200;
        let mut fails = 0;
        while rows.len() < h {
            budget = budget.checked_sub(1)?;
            let y = rows.len();
            let below = rows.last().map(|r| r.as_slice());
            let last = y + 1 == h;
            let f = feasible(below, last);
            let row = pick(rng, &|v| f[w - 1][v as usize]).map(|end| {
                let mut row = vec![end; w];
                for x in (1..w).rev() {
                    let v = row[x];
                    row[x - 1] = pick(rng, &|u| f[x - 1][u as usize] && compat(below, x, u, v, last)).expect("forward pass");
                }
                row
            });
            // a row is kept only if some row fits above it
            let keep = row.filter(|r| last || feasible(Some(r), y + 2 == h)[w - 1].iter().any(|&b| b));
            match keep {
                Some(r) => {
                    rows.push(r);
                    fails = 0;
                }
                None => {
                    fails += 1;
                    if fails >= 8 {
                        rows.pop()?;
                        fails = 0;
                    }
                }
            }
        }
        Some(Grid::from_vec(rect, rows.concat()))
    }

    /// Random `width x height` crop of the machine's space-time frame sitting
    /// in an M background. Halting runs give the closed frame; otherwise the
    /// open frame of a prefix long enough that the crop never reaches its cut
    /// edges.
    pub fn random_valid_crop(&self, width: usize, height: usize, budget: usize, rng: &mut impl Rng) -> Result<Grid> {
        let (frame, cut) = match self.tm.simulate(budget) {
            Ok(c) => (self.frame_pattern(&c), false),
            Err(Error::BudgetExceeded(_)) => {
                let c = self.tm.simulate_prefix(2 * height)?;
                (self.open_frame_pattern(&c, c.max_visited + 1 + 2 * width), true)
            }
            Err(e) => return Err(e),
        };
        let fr = frame.rect();
        // crops always meet the border ring at offset 1
        let (w, h) = (width as i64, height as i64);
        let (hi_x, hi_y) = if cut { (fr.x1() - w, fr.y1() - h) } else { (fr.x1() - 2, fr.y1() - 2) };
        let x0 = rng.gen_range(fr.x0 + 2 - w..=hi_x.max(fr.x0 + 2 - w));
        let y0 = rng.gen_range(fr.y0 + 2 - h..=hi_y.max(fr.y0 + 2 - h));
        let rect = Rect::new(x0, y0, width, height);
        Ok(Grid::from_fn(rect, |x, y| if fr.contains(x, y) { frame.get(x, y) } else { self.m() }))
    }

    /// Whether every 2x2 window of `g` is allowed.
    pub fn all_windows_valid(&self, g: &Grid) -> bool {
        let r = g.rect();
        (r.y0..r.y1() - 1).all(|y| {
            (r.x0..r.x1() - 1).all(|x| self.rule.valid(g.get(x, y + 1), g.get(x + 1, y + 1), g.get(x, y), g.get(x + 1, y)))
        })
    }
}

/// Halting computation framed and bordered by `M`; checked to be fixed by
/// stepping inside a few random contexts.
pub fn halting_obstacle(ft: &CompiledFT, step_budget: usize) -> Result<Grid> {
    let c = ft.tm().check_normal_form(step_budget)?;
    let pat = ft.frame_pattern(&c);
    let rep = verify_obstacle(ft, &pat, 4, 3, 0x0b57);
    if rep.failures > 0 {
        return Err(Error::ObstacleVerificationFailed);
    }
    Ok(pat)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ObstacleReport {
    pub contexts: usize,
    pub steps: usize,
    pub failures: usize,
}

/// Embeds `pattern` in random periodic contexts and checks it is unchanged
/// for `steps` steps.
pub fn verify_obstacle(ft: &CompiledFT, pattern: &Grid, contexts: usize, steps: usize, seed: u64) -> ObstacleReport {
    let pr = pattern.rect();
    let margin = 6;
    let (w, h) = (pr.width + 2 * margin, pr.height + 2 * margin);
    let q = ft.num_states() as u8;
    let failures = (0..contexts)
        .into_par_iter()
        .filter(|&c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut win = Window::from_fn(w, h, ft.alphabet(), Boundary::Periodic, |i, j| {
                let (x, y) = (i as i64 - margin as i64 + pr.x0, j as i64 - margin as i64 + pr.y0);
                if pr.contains(x, y) {
                    pattern.get(x, y)
                } else {
                    rng.gen_range(0..q)
                }
            });
            for _ in 0..steps {
                win = step(&win, ft.kernel()).expect("alphabet matches");
                let same = pr.cells().all(|(x, y)| {
                    win.get((x - pr.x0) as usize + margin, (y - pr.y0) as usize + margin) == pattern.get(x, y)
                });
                if !same {
                    return true;
                }
            }
            false
        })
        .count();
    ObstacleReport { contexts, steps, failures }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FillReport {
    pub windows: usize,
    pub width: usize,
    pub height: usize,
    pub filled: usize,
    pub max_steps: usize,
}

/// Random windows over all states with an `M` border, stepped until all
/// `M` or `width * height` steps.
pub fn verify_fill(ft: &CompiledFT, windows: usize, width: usize, height: usize, seed: u64) -> FillReport {
    let q = ft.num_states() as u8;
    let m = ft.m();
    let times: Vec<Option<usize>> = (0..windows)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            // odd windows carry a locally valid interior, even ones noise
            let inner = Rect::new(1, 1, width.saturating_sub(2), height.saturating_sub(2));
            let valid = (k % 2 == 1).then(|| valid_window(ft, inner, &mut rng));
            let mut win = Window::from_fn(width, height, ft.alphabet(), Boundary::Periodic, |i, j| {
                if i == 0 || j == 0 || i + 1 == width || j + 1 == height {
                    m
                } else if let Some(g) = &valid {
                    g.get(i as i64, j as i64)
                } else {
                    rng.gen_range(0..q)
                }
            });
            for t in 0..=width * height {
                if win.all(m) {
                    return Some(t);
                }
                win = step(&win, ft.kernel()).expect("alphabet matches");
            }
            None
        })
        .collect();
    FillReport {
        windows,
        width,
        height,
        filled: times.iter().filter(|t| t.is_some()).count(),
        max_steps: times.iter().flatten().copied().max().unwrap_or(0),
    }
}

const FRAME_BUDGET: usize = 10_000;

/// Locally valid window on `rect`: the row sampler when it succeeds,
/// otherwise a frame crop, otherwise all M.
pub(crate) fn valid_window(ft: &CompiledFT, rect: Rect, rng: &mut impl Rng) -> Grid {
    if let Some(g) = (0..4).find_map(|_| ft.random_valid_window(rect, rng)) {
        return g;
    }
    match ft.random_valid_crop(rect.width, rect.height, FRAME_BUDGET, rng) {
        Ok(g) => Grid::from_vec(rect, g.into_data()),
        Err(_) => Grid::new(rect, ft.m()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::tm::{looping_machine, three_step_machine};
    use super::*;
    use crate::rules::{is_freezing, CheckMode};

    fn ft() -> CompiledFT {
        compile_tm(&three_step_machine()).unwrap()
    }

    #[test]
    fn alphabet_layout() {
        let f = ft();
        let names = f.alphabet().names();
        assert_eq!(names.last().unwrap(), "M");
        assert_eq!(f.alphabet().top(), f.m());
        assert_eq!(f.alphabet().name(f.dir_state(Dir::SW)), "SW");
        assert!(names.contains(&"t:_|A^".to_string()));
        assert!(names.contains(&"t:_|B>".to_string()));
        assert!(!names.contains(&"t:_|B<".to_string()));
        // 2 symbols x (1 + A^ + B> + C> + H>) tiles, minus A^ on the non-blank
        assert_eq!(f.tiles().len(), 9);
        assert_eq!(f.num_states(), 18);
    }

    #[test]
    fn frame_matches_simulation() {
        let f = ft();
        let c = f.tm().simulate(10).unwrap();
        let g = f.frame_pattern(&c);
        assert_eq!(g.rect(), Rect::new(0, 0, 8, 8));
        assert!(f.all_windows_valid(&g));
        let name = |x, y| f.alphabet().name(g.get(x, y)).to_string();
        assert_eq!(name(2, 2), "t:_|A^");
        assert_eq!(name(3, 3), "t:_|B>");
        assert_eq!(name(2, 3), "t:1");
        assert_eq!(name(5, 5), "t:_|H>");
        assert_eq!(name(1, 1), "SW");
        assert_eq!(name(6, 6), "NE");
        // padding with one more ring of M keeps every window valid
        let wide = Grid::from_fn(g.rect().grow(1), |x, y| if g.rect().contains(x, y) { g.get(x, y) } else { f.m() });
        assert!(f.all_windows_valid(&wide));
    }

    #[test]
    fn truncated_or_wrong_frames_are_invalid() {
        let f = ft();
        let mut c = f.tm().simulate(10).unwrap();
        c.rows.pop();
        c.max_visited = 2;
        assert!(!f.all_windows_valid(&f.frame_pattern(&c)));
        // wider frame than the tape actually used
        let mut c = f.tm().simulate(10).unwrap();
        c.max_visited = 4;
        assert!(!f.all_windows_valid(&f.frame_pattern(&c)));
    }

    #[test]
    fn dynamics_clauses() {
        let f = ft();
        let k = f.kernel();
        let m = f.m();
        let all_m = Grid::new(Rect::new(-1, -1, 3, 3), m);
        assert_eq!(k.eval(&all_m, 0, 0), m);
        // W with M to the east: invalid pair
        let mut g = all_m.clone();
        let w = f.dir_state(Dir::W);
        g.set(0, 0, w);
        assert_eq!(k.eval(&g, 0, 0), m);
        // NE corner in the obstacle has M north and east and stays
        let obs = halting_obstacle(&f, 10).unwrap();
        let ne = f.dir_state(Dir::NE);
        assert_eq!(obs.get(6, 6), ne);
        assert_eq!(obs.get(6, 7), m);
        assert_eq!(k.eval(&obs, 6, 6), ne);
        // an interior tile with a neighboring M becomes M
        let mut g2 = obs.clone();
        g2.set(3, 2, m);
        assert_eq!(k.eval(&g2, 2, 2), m);
    }

    #[test]
    fn corrupted_tile_turns_m() {
        let f = ft();
        let obs = halting_obstacle(&f, 10).unwrap();
        let blank = f.tile_state(Tile { symbol: 0, head: None }).unwrap();
        let mut g = obs.clone();
        g.set(2, 3, blank);
        let w = Window::from_grid(&g, f.alphabet(), Boundary::Zero);
        let mut w = Window::from_fn(g.rect().width, g.rect().height, f.alphabet(), Boundary::Periodic, |i, j| w.get(i, j));
        for _ in 0..2 {
            w = step(&w, f.kernel()).unwrap();
        }
        assert_eq!(w.get(2, 3), f.m());
    }

    #[test]
    fn obstacle_fixed_in_random_contexts() {
        let f = ft();
        let obs = halting_obstacle(&f, 10).unwrap();
        let rep = verify_obstacle(&f, &obs, 8, 20, 3);
        assert_eq!(rep.failures, 0);
        assert!(matches!(
            halting_obstacle(&compile_tm(&looping_machine()).unwrap(), 200),
            Err(Error::BudgetExceeded(200))
        ));
    }

    #[test]
    fn looper_windows_fill() {
        let f = compile_tm(&looping_machine()).unwrap();
        let rep = verify_fill(&f, 6, 20, 20, 5);
        assert_eq!(rep.filled, 6);
    }

    #[test]
    fn normalized_machine_obstacle() {
        let f = compile_tm(&three_step_machine().normalize()).unwrap();
        let obs = halting_obstacle(&f, 50).unwrap();
        assert_eq!(verify_obstacle(&f, &obs, 4, 10, 9).failures, 0);
    }

    #[test]
    fn freezing_in_flat_order() {
        let f = ft();
        assert!(is_freezing(f.kernel(), CheckMode::Randomized { trials: 20_000, seed: 4 }).holds);
    }

    #[test]
    fn valid_pattern_count_is_stable() {
        let f = ft();
        let v = f.valid_2x2();
        assert!(v.contains(&[f.m(); 4]));
        assert_eq!(v.len(), f.summary().valid_2x2);
    }

    #[test]
    fn sampled_windows_are_valid() {
        for f in [ft(), compile_tm(&looping_machine()).unwrap()] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut distinct = std::collections::BTreeSet::new();
            for _ in 0..20 {
                let g = valid_window(&f, Rect::new(1, 1, 38, 38), &mut rng);
                assert!(f.all_windows_valid(&g));
                assert!(g.data().iter().any(|&v| v != f.m()));
                distinct.insert(g.into_data());
            }
            assert!(distinct.len() > 1);
            for _ in 0..20 {
                let g = f.random_valid_crop(12, 9, 1000, &mut rng).unwrap();
                assert!(f.all_windows_valid(&g));
            }
            assert!(f.random_valid_window(Rect::new(0, 0, 6, 6), &mut rng).is_some_and(|g| f.all_windows_valid(&g)));
        }
    }
}
