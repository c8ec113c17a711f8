use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Spatial dimension of the periodic box. The 1-d mode exists for fast
/// smoke tests and reuses every formula with a scalar frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    One,
    Three,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Three => 3,
        }
    }
}

/// Uniform periodic grid on `[-L/2, L/2)^d` with `n` points per axis.
///
/// Frequencies follow the usual FFT layout: index `i` maps to the signed
/// integer `i` for `i < n/2` and `i - n` otherwise, scaled by `2π/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_per_axis: usize,
    box_length: f64,
    dim: Dim,
}

fn smooth_235(mut n: usize) -> bool {
    for p in [2usize, 3, 5] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

impl Grid {
    pub fn new(n_per_axis: usize, box_length: f64, dim: Dim) -> Result<Self> {
        // Even 2/3/5-smooth sizes keep the transform fast and the frequency
        // lattice symmetric; refinement ladders need 48 and 96, so the size
        // rule is smoothness rather than strictly powers of two.
        if n_per_axis < 4 || !n_per_axis.is_multiple_of(2) || !smooth_235(n_per_axis) {
            return Err(Error::BadGridSize(n_per_axis));
        }
        if box_length <= 0.0 || !box_length.is_finite() {
            return Err(Error::BadBoxLength(box_length));
        }
        Ok(Grid { n_per_axis, box_length, dim })
    }

    pub fn new_3d(n_per_axis: usize, box_length: f64) -> Result<Self> {
        Self::new(n_per_axis, box_length, Dim::Three)
    }

    pub fn new_1d(n_per_axis: usize, box_length: f64) -> Result<Self> {
        Self::new(n_per_axis, box_length, Dim::One)
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Total number of grid points `n^d`.
    pub fn len(&self) -> usize {
        match self.dim {
            Dim::One => self.n_per_axis,
            Dim::Three => self.n_per_axis * self.n_per_axis * self.n_per_axis,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n_per_axis as f64
    }

    /// Volume element `h^d`; discrete sums weighted by this approximate box integrals.
    pub fn cell_volume(&self) -> f64 {
        match self.dim {
            Dim::One => self.spacing(),
            Dim::Three => self.spacing().powi(3),
        }
    }

    /// Signed lattice integer for FFT index `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        debug_assert!(i < self.n_per_axis);
        if i < self.n_per_axis / 2 {
            i as i64
        } else {
            i as i64 - self.n_per_axis as i64
        }
    }

    /// Frequency component `ξ_i = 2π·signed(i)/L` for one axis.
    pub fn freq(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.signed_index(i) as f64 / self.box_length
    }

    /// All per-axis frequencies in FFT order.
    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n_per_axis).map(|i| self.freq(i)).collect()
    }

    /// Physical coordinate of index `i` on one axis: `-L/2 + h·i`.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.box_length + self.spacing() * i as f64
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_per_axis).map(|i| self.coord(i)).collect()
    }

    /// Decompose a flat index into per-axis indices (x fastest).
    pub fn index3(&self, flat: usize) -> (usize, usize, usize) {
        let n = self.n_per_axis;
        match self.dim {
            Dim::One => (flat, 0, 0),
            Dim::Three => (flat % n, (flat / n) % n, flat / (n * n)),
        }
    }

    /// Physical position of a flat index; unused components are zero in 1-d.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.index3(flat);
        match self.dim {
            Dim::One => [self.coord(ix), 0.0, 0.0],
            Dim::Three => [self.coord(ix), self.coord(iy), self.coord(iz)],
        }
    }

    /// `|ξ|²` for every flat index, in storage order.
    pub fn xi_sq_table(&self) -> Vec<f64> {
        let freqs = self.freqs();
        let sq: Vec<f64> = freqs.iter().map(|f| f * f).collect();
        match self.dim {
            Dim::One => sq,
            Dim::Three => {
                let n = self.n_per_axis;
                let mut out = Vec::with_capacity(n * n * n);
                for iz in 0..n {
                    for iy in 0..n {
                        let yz = sq[iy] + sq[iz];
                        for sx in &sq {
                            out.push(sx + yz);
                        }
                    }
                }
                out
            }
        }
    }

    /// `|x|` with the singular cell regularized to `h/2`, for every flat index.
    pub fn radius_table(&self) -> Vec<f64> {
        let half_h = 0.5 * self.spacing();
        (0..self.len())
            .map(|j| {
                let p = self.position(j);
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                r.max(half_h)
            })
            .collect()
    }
}
