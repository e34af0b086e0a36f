//! Dense state arrays over rectangular lattice regions.

/// Axis-aligned lattice rectangle `[x0, x0 + width) x [y0, y0 + height)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, width: usize, height: usize) -> Self {
        Rect { x0, y0, width, height }
    }

    pub fn x1(&self) -> i64 {
        self.x0 + self.width as i64
    }

    pub fn y1(&self) -> i64 {
        self.y0 + self.height as i64
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x < self.x1() && y >= self.y0 && y < self.y1()
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    /// Grows the rectangle by the given amounts on each side (negative values
    /// shrink it). Collapses to an empty rectangle if it would invert.
    pub fn expand(&self, left: i64, right: i64, down: i64, up: i64) -> Rect {
        let x0 = self.x0 - left;
        let y0 = self.y0 - down;
        let w = (self.width as i64 + left + right).max(0) as usize;
        let h = (self.height as i64 + down + up).max(0) as usize;
        Rect::new(x0, y0, w, h)
    }

    pub fn grow(&self, r: i64) -> Rect {
        self.expand(r, r, r, r)
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (x0, x1) = (self.x0, self.x1());
        (self.y0..self.y1()).flat_map(move |y| (x0..x1).map(move |x| (x, y)))
    }
}

/// Row-major `u8` states over a [`Rect`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    rect: Rect,
    data: Vec<u8>,
}

impl Grid {
    pub fn new(rect: Rect, fill: u8) -> Self {
        Grid { rect, data: vec![fill; rect.width * rect.height] }
    }

    pub fn from_fn(rect: Rect, mut f: impl FnMut(i64, i64) -> u8) -> Self {
        let mut data = Vec::with_capacity(rect.width * rect.height);
        for y in rect.y0..rect.y1() {
            for x in rect.x0..rect.x1() {
                data.push(f(x, y));
            }
        }
        Grid { rect, data }
    }

    pub fn from_vec(rect: Rect, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), rect.width * rect.height);
        Grid { rect, data }
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn idx(&self, x: i64, y: i64) -> usize {
        debug_assert!(self.rect.contains(x, y), "({x},{y}) outside {:?}", self.rect);
        (y - self.rect.y0) as usize * self.rect.width + (x - self.rect.x0) as usize
    }

    #[inline]
    pub fn get(&self, x: i64, y: i64) -> u8 {
        self.data[self.idx(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: i64, y: i64, v: u8) {
        let i = self.idx(x, y);
        self.data[i] = v;
    }

    /// Copy of the sub-rectangle `r`, which must lie inside this grid.
    pub fn crop(&self, r: Rect) -> Grid {
        Grid::from_fn(r, |x, y| self.get(x, y))
    }

    pub fn all(&self, v: u8) -> bool {
        self.data.iter().all(|&s| s == v)
    }
}

/// 2D prefix sums of an indicator over a grid, for O(1) rectangle counts.
pub struct PrefixSum {
    rect: Rect,
    stride: usize,
    sums: Vec<u32>,
}

impl PrefixSum {
    pub fn new(g: &Grid, pred: impl Fn(u8) -> bool) -> Self {
        let r = g.rect();
        let stride = r.width + 1;
        let mut sums = vec![0u32; stride * (r.height + 1)];
        for j in 0..r.height {
            let mut row = 0u32;
            for i in 0..r.width {
                row += pred(g.data()[j * r.width + i]) as u32;
                sums[(j + 1) * stride + i + 1] = sums[j * stride + i + 1] + row;
            }
        }
        PrefixSum { rect: r, stride, sums }
    }

    /// Number of marked cells in `[x0, x0+w) x [y0, y0+h)`; the rectangle must
    /// lie within the source grid.
    #[inline]
    pub fn count(&self, x0: i64, y0: i64, w: i64, h: i64) -> u32 {
        let i0 = (x0 - self.rect.x0) as usize;
        let j0 = (y0 - self.rect.y0) as usize;
        let i1 = i0 + w as usize;
        let j1 = j0 + h as usize;
        debug_assert!(i1 <= self.rect.width && j1 <= self.rect.height);
        self.sums[j1 * self.stride + i1] + self.sums[j0 * self.stride + i0]
            - self.sums[j0 * self.stride + i1]
            - self.sums[j1 * self.stride + i0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_counts_match_brute_force() {
        let r = Rect::new(-3, 2, 9, 7);
        let g = Grid::from_fn(r, |x, y| ((x * 7 + y * 3).rem_euclid(5) < 2) as u8);
        let ps = PrefixSum::new(&g, |v| v == 1);
        for x0 in r.x0..r.x1() {
            for y0 in r.y0..r.y1() {
                for w in 0..=(r.x1() - x0) {
                    for h in 0..=(r.y1() - y0) {
                        let brute = Rect::new(x0, y0, w as usize, h as usize)
                            .cells()
                            .filter(|&(x, y)| g.get(x, y) == 1)
                            .count() as u32;
                        assert_eq!(ps.count(x0, y0, w, h), brute);
                    }
                }
            }
        }
    }
}
