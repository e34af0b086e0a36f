use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the integer lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct IntVec2 {
    pub x: i64,
    pub y: i64,
}

impl IntVec2 {
    pub const ZERO: IntVec2 = IntVec2 { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        IntVec2 { x, y }
    }

    pub fn dot(self, o: IntVec2) -> i64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: IntVec2) -> i64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> i64 {
        self.dot(self)
    }

    pub fn norm_inf(self) -> i64 {
        self.x.abs().max(self.y.abs())
    }

    /// Rotation by +90 degrees.
    pub fn rot_ccw(self) -> IntVec2 {
        IntVec2::new(-self.y, self.x)
    }

    /// Rotation by -90 degrees.
    pub fn rot_cw(self) -> IntVec2 {
        IntVec2::new(self.y, -self.x)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }
}

impl From<[i64; 2]> for IntVec2 {
    fn from(a: [i64; 2]) -> Self {
        IntVec2::new(a[0], a[1])
    }
}

impl From<IntVec2> for [i64; 2] {
    fn from(v: IntVec2) -> Self {
        [v.x, v.y]
    }
}

impl From<(i64, i64)> for IntVec2 {
    fn from((x, y): (i64, i64)) -> Self {
        IntVec2::new(x, y)
    }
}

impl Add for IntVec2 {
    type Output = IntVec2;
    fn add(self, o: IntVec2) -> IntVec2 {
        IntVec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for IntVec2 {
    type Output = IntVec2;
    fn sub(self, o: IntVec2) -> IntVec2 {
        IntVec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for IntVec2 {
    type Output = IntVec2;
    fn neg(self) -> IntVec2 {
        IntVec2::new(-self.x, -self.y)
    }
}

impl Mul<i64> for IntVec2 {
    type Output = IntVec2;
    fn mul(self, k: i64) -> IntVec2 {
        IntVec2::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for IntVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A rational direction on the unit circle, stored as its primitive lattice
/// representative (`gcd(|x|,|y|) = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct Direction(IntVec2);

impl Direction {
    /// Reduces `(x, y)` to its primitive representative.
    pub fn new(x: i64, y: i64) -> Result<Self> {
        Self::from_vec(IntVec2::new(x, y))
    }

    pub fn from_vec(v: IntVec2) -> Result<Self> {
        if v.is_zero() {
            return Err(Error::ZeroDirection);
        }
        let g = v.x.gcd(&v.y);
        Ok(Direction(IntVec2::new(v.x / g, v.y / g)))
    }

    /// Accepts only vectors that are already primitive.
    pub fn primitive(v: IntVec2) -> Result<Self> {
        let d = Self::from_vec(v)?;
        if d.0 != v {
            return Err(Error::NotPrimitive(v));
        }
        Ok(d)
    }

    pub fn vec(self) -> IntVec2 {
        self.0
    }

    pub fn x(self) -> i64 {
        self.0.x
    }

    pub fn y(self) -> i64 {
        self.0.y
    }

    pub fn antipode(self) -> Direction {
        Direction(-self.0)
    }

    pub fn rot_ccw(self) -> Direction {
        Direction(self.0.rot_ccw())
    }

    pub fn rot_cw(self) -> Direction {
        Direction(self.0.rot_cw())
    }

    /// 0 for angles in [0, pi), 1 for [pi, 2 pi).
    fn half(self) -> u8 {
        if self.0.y > 0 || (self.0.y == 0 && self.0.x > 0) {
            0
        } else {
            1
        }
    }

    /// Total order by polar angle in [0, 2 pi), starting at (1, 0).
    pub fn angle_cmp(self, other: Direction) -> Ordering {
        match self.half().cmp(&other.half()) {
            Ordering::Equal => 0.cmp(&self.0.cross(other.0)),
            o => o,
        }
    }

    /// Every primitive direction with Euclidean norm at most `r`, in angular order.
    pub fn all_within_norm(r: i64) -> Vec<Direction> {
        let mut out = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                let v = IntVec2::new(x, y);
                if !v.is_zero() && v.norm_sq() <= r * r && x.gcd(&y) == 1 {
                    out.push(Direction(v));
                }
            }
        }
        out.sort_by(|a, b| a.angle_cmp(*b));
        out
    }
}

impl Ord for Direction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.angle_cmp(*other)
    }
}

impl PartialOrd for Direction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<[i64; 2]> for Direction {
    type Error = Error;
    fn try_from(a: [i64; 2]) -> Result<Self> {
        Direction::primitive(IntVec2::from(a))
    }
}

impl From<Direction> for [i64; 2] {
    fn from(d: Direction) -> Self {
        d.0.into()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
