//! Geometry of `R^m x T^n` and its discretization.
//!
//! Axes are ordered with the `m` line directions first and the `n` circle
//! directions last. A line direction is truncated to a circle of
//! circumference `box_length`, so every axis carries a uniform grid and a
//! frequency lattice of spacing `2 pi / length`. Grid values are stored in
//! row-major order with axis 0 slowest; frequency indices use FFT order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};

/// Largest supported total dimension.
pub const MAX_DIM: usize = 4;

/// Whether an axis is a (truncated) line or a circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisKind {
    Line,
    Circle,
}

/// The `(m, n)` split of `R^m x T^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Geometry {
    pub m: usize,
    pub n: usize,
}

impl Geometry {
    pub const fn new(m: usize, n: usize) -> Self {
        Self { m, n }
    }

    pub const fn dim(&self) -> usize {
        self.m + self.n
    }

    /// Geometries for which an `L^4` bound with a gain is known to hold:
    /// four dimensions with at most two periodic directions.
    pub fn is_settled(&self) -> bool {
        self.dim() == 4 && self.n <= 2
    }

    /// Gain exponent associated with a settled geometry, if any.
    pub fn known_gain(&self) -> Option<f64> {
        match (self.m, self.n) {
            (3, 1) => Some(0.25),
            (2, 2) => Some(1.0 / 12.0),
            (4, 0) => Some(0.25),
            _ => None,
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}xT{}", self.m, self.n)
    }
}

/// Domain `R^m x T^n` with its discretization parameters.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawDomainSpec"))]
pub struct DomainSpec {
    m: usize,
    n: usize,
    periods: Vec<f64>,
    box_length: Vec<f64>,
    grid: Vec<usize>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawDomainSpec {
    m: usize,
    n: usize,
    periods: Vec<f64>,
    box_length: Vec<f64>,
    grid: Vec<usize>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawDomainSpec> for DomainSpec {
    type Error = Error;

    fn try_from(raw: RawDomainSpec) -> Result<Self> {
        DomainSpec::new(raw.m, raw.n, raw.periods, raw.box_length, raw.grid)
    }
}

impl DomainSpec {
    pub fn new(m: usize, n: usize, periods: Vec<f64>, box_length: Vec<f64>, grid: Vec<usize>) -> Result<Self> {
        let d = m + n;
        if d == 0 || d > MAX_DIM {
            return Err(Error::Config(format!("dimension m+n={d} must lie in 1..=4")));
        }
        if periods.len() != n {
            return Err(Error::Config(format!("expected {n} circle periods, found {}", periods.len())));
        }
        if box_length.len() != m {
            return Err(Error::Config(format!("expected {m} box lengths, found {}", box_length.len())));
        }
        if grid.len() != d {
            return Err(Error::Config(format!("expected {d} grid sizes, found {}", grid.len())));
        }
        if let Some(g) = grid.iter().find(|&&g| g < 4 || g % 2 != 0) {
            return Err(Error::Config(format!("grid size {g} must be even and at least 4")));
        }
        if let Some(l) = box_length.iter().chain(&periods).find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Config(format!("lengths must be positive, found {l}")));
        }
        Ok(Self { m, n, periods, box_length, grid })
    }

    /// `R^m x T^n` with `2 pi` periods, a common box length and a cubic grid.
    pub fn uniform(m: usize, n: usize, box_length: f64, points: usize) -> Result<Self> {
        Self::new(m, n, vec![2.0 * PI; n], vec![box_length; m], vec![points; m + n])
    }

    /// The flat torus `T^d` with `2 pi` periods.
    pub fn torus(d: usize, points: usize) -> Result<Self> {
        Self::uniform(0, d, 1.0, points)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::new(self.m, self.n)
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn box_length(&self) -> &[f64] {
        &self.box_length
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.grid.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_kind(&self, axis: usize) -> AxisKind {
        if axis < self.m {
            AxisKind::Line
        } else {
            AxisKind::Circle
        }
    }

    /// Physical length of an axis (box length or period).
    pub fn length(&self, axis: usize) -> f64 {
        if axis < self.m {
            self.box_length[axis]
        } else {
            self.periods[axis - self.m]
        }
    }

    /// Frequency lattice spacing `2 pi / length` of an axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.length(axis)
    }

    /// Volume element of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.length(a) / self.grid[a] as f64).product()
    }

    /// Volume of the (periodized) physical domain.
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.length(a)).product()
    }

    /// Measure carried by one node of the frequency lattice: Lebesgue
    /// weight `2 pi / L` on line axes, counting measure on `2 pi`-circles.
    pub fn lattice_weight(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Row-major strides.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut s = [0usize; MAX_DIM];
        let d = self.dim();
        let mut acc = 1;
        for a in (0..d).rev() {
            s[a] = acc;
            acc *= self.grid[a];
        }
        s
    }

    /// Signed lattice index of position `j` along an axis (FFT order).
    pub fn wavenumber(&self, axis: usize, j: usize) -> i64 {
        let n = self.grid[axis];
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Position along an axis holding the signed lattice index `k`.
    pub fn position_of(&self, axis: usize, k: i64) -> Option<usize> {
        let n = self.grid[axis] as i64;
        if k < -n / 2 || k >= n / 2 {
            None
        } else {
            Some(k.rem_euclid(n) as usize)
        }
    }

    /// Multi-index of a flat offset.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.grid[a];
            flat /= self.grid[a];
        }
        idx
    }

    /// Signed lattice indices of a flat offset.
    pub fn lattice_index(&self, flat: usize) -> [i64; MAX_DIM] {
        let pos = self.unflatten(flat);
        let mut out = [0i64; MAX_DIM];
        for a in 0..self.dim() {
            out[a] = self.wavenumber(a, pos[a]);
        }
        out
    }

    /// Flat offset of signed lattice indices, if representable on the grid.
    pub fn flat_of_lattice(&self, k: &[i64]) -> Option<usize> {
        let mut flat = 0;
        for (a, &ka) in k.iter().enumerate().take(self.dim()) {
            flat = flat * self.grid[a] + self.position_of(a, ka)?;
        }
        Some(flat)
    }

    /// Frequency vector `xi` of a flat offset, padded with zeros.
    pub fn frequency(&self, flat: usize) -> [f64; MAX_DIM] {
        let k = self.lattice_index(flat);
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            xi[a] = k[a] as f64 * self.spacing(a);
        }
        xi
    }

    /// Per-axis frequency values in grid order.
    pub fn axis_frequencies(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.grid[axis]).map(|j| self.wavenumber(axis, j) as f64 * h).collect()
    }

    /// Frequency vectors of all nodes, `dim` values per node.
    pub fn frequency_table(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.len() * d);
        for flat in 0..self.len() {
            out.extend_from_slice(&self.frequency(flat)[..d]);
        }
        out
    }

    /// `|xi|^2` of all nodes.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.axis_frequencies(a)).collect();
        (0..self.len())
            .map(|flat| {
                let pos = self.unflatten(flat);
                axes.iter().enumerate().map(|(a, f)| f[pos[a]] * f[pos[a]]).sum()
            })
            .collect()
    }

    /// Largest representable `|xi|`.
    pub fn max_frequency(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim() {
            let k = (self.grid[a] / 2) as f64 * self.spacing(a);
            s += k * k;
        }
        num_traits::Float::sqrt(s)
    }

    /// Returns the same domain with every line-direction truncation scaled.
    pub fn with_box_scale(&self, factor: f64) -> Result<Self> {
        let lengths = self.box_length.iter().map(|l| l * factor).collect();
        Self::new(self.m, self.n, self.periods.clone(), lengths, self.grid.clone())
    }

    /// Returns the same domain with a different grid.
    pub fn with_grid(&self, grid: Vec<usize>) -> Result<Self> {
        Self::new(self.m, self.n, self.periods.clone(), self.box_length.clone(), grid)
    }
}
