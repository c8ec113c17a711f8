use crate::error::{Error, Result};
use crate::grid::{Dim, Grid};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Physical,
    Spectral,
}

/// A complex scalar field on a [`Grid`], stored either as point values or as
/// unitary-DFT coefficients. The two representations are exchanged by
/// [`Field::to_spectral`] / [`Field::to_physical`]; both directions carry a
/// `1/√N` factor so the round trip is the identity and `Σ|v|²` is preserved.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    representation: Representation,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, representation: Representation, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Field { grid, representation, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            representation: Representation::Physical,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Sample a function of position into a physical-space field.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> Complex64 + Sync) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        values.par_iter_mut().enumerate().for_each(|(j, v)| {
            *v = f(grid.position(j));
        });
        Field { grid, representation: Representation::Physical, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Unitary forward transform; identity if already spectral.
    pub fn to_spectral(&self) -> Field {
        let mut out = self.clone();
        out.make_spectral();
        out
    }

    /// Unitary inverse transform; identity if already physical.
    pub fn to_physical(&self) -> Field {
        let mut out = self.clone();
        out.make_physical();
        out
    }

    pub(crate) fn make_spectral(&mut self) {
        if self.representation == Representation::Physical {
            transform(&mut self.values, self.grid, FftDirection::Forward);
            self.representation = Representation::Spectral;
        }
    }

    pub(crate) fn make_physical(&mut self) {
        if self.representation == Representation::Spectral {
            transform(&mut self.values, self.grid, FftDirection::Inverse);
            self.representation = Representation::Physical;
        }
    }

    /// `(h^d Σ |v|²)^(1/2)`; representation-independent by unitarity.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `‖u‖₂²`, the conserved charge.
    pub fn charge(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `h^d Σ conj(self)·other`, conjugate-linear in `self`. Both fields must
    /// share a grid; the representation of `other` is matched to `self`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let converted;
        let rhs = if other.representation == self.representation {
            other
        } else {
            converted = match self.representation {
                Representation::Physical => other.to_physical(),
                Representation::Spectral => other.to_spectral(),
            };
            &converted
        };
        let sum: Complex64 = self
            .values
            .iter()
            .zip(rhs.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, alpha: Complex64) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum FftDirection {
    Forward,
    Inverse,
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap();
    match direction {
        FftDirection::Forward => p.plan_fft_forward(n),
        FftDirection::Inverse => p.plan_fft_inverse(n),
    }
}

/// In-place unitary DFT along every axis.
pub(crate) fn transform(values: &mut [Complex64], grid: Grid, direction: FftDirection) {
    let n = grid.n_per_axis();
    let fft = plan(n, direction);
    match grid.dim() {
        Dim::One => {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(values, &mut scratch);
        }
        Dim::Three => {
            axis_pass_x(values, n, &fft);
            axis_pass_y(values, n, &fft);
            axis_pass_z(values, n, &fft);
        }
    }
    let scale = 1.0 / (grid.len() as f64).sqrt();
    values.par_iter_mut().for_each(|v| *v *= scale);
}

fn axis_pass_x(values: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    values.par_chunks_mut(n * n).for_each_init(
        || vec![Complex64::default(); fft.get_inplace_scratch_len()],
        |scratch, plane| fft.process_with_scratch(plane, scratch),
    );
}

fn axis_pass_y(values: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    values.par_chunks_mut(n * n).for_each_init(
        || {
            (
                vec![Complex64::default(); n],
                vec![Complex64::default(); fft.get_inplace_scratch_len()],
            )
        },
        |(line, scratch), plane| {
            for ix in 0..n {
                for iy in 0..n {
                    line[iy] = plane[ix + n * iy];
                }
                fft.process_with_scratch(line, scratch);
                for iy in 0..n {
                    plane[ix + n * iy] = line[iy];
                }
            }
        },
    );
}

/// The z stride crosses plane boundaries, so run the pass on an x↔z
/// transposed copy where those lines are contiguous again.
fn axis_pass_z(values: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut scratch_vol = vec![Complex64::default(); values.len()];
    transpose_xz(values, &mut scratch_vol, n);
    axis_pass_x(&mut scratch_vol, n, fft);
    transpose_xz(&scratch_vol, values, n);
}

fn transpose_xz(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    dst.par_chunks_mut(n * n).enumerate().for_each(|(iz, plane)| {
        for ix in 0..n {
            let base = iz + n * n * ix;
            for iy in 0..n {
                plane[ix + n * iy] = src[base + n * iy];
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(grid, Representation::Physical, values).unwrap()
    }

    #[test]
    fn constant_field_concentrates_on_zero_mode() {
        for grid in [Grid::new_1d(32, 5.0).unwrap(), Grid::new_3d(16, 8.0).unwrap()] {
            let c = Complex64::new(0.7, -0.2);
            let f = Field::from_fn(grid, |_| c);
            let s = f.to_spectral();
            let expect = c * (grid.len() as f64).sqrt();
            assert_relative_eq!(s.values()[0].re, expect.re, max_relative = 1e-12);
            assert_relative_eq!(s.values()[0].im, expect.im, max_relative = 1e-12);
            let off: f64 = s.values()[1..].iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(off < 1e-12 * expect.norm());
        }
    }

    #[test]
    fn plane_wave_hits_single_mode() {
        let grid = Grid::new_3d(16, 4.0).unwrap();
        let k = [grid.freq(3), grid.freq(14), 0.0];
        let f = Field::from_fn(grid, |x| {
            (Complex64::i() * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2])).exp()
        });
        let s = f.to_spectral();
        let n = grid.n_per_axis();
        let mode = 3 + n * 14;
        assert_relative_eq!(s.values()[mode].norm(), (grid.len() as f64).sqrt(), max_relative = 1e-12);
        let rest: f64 = s
            .values()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != mode)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        assert!(rest.sqrt() < 1e-10);
    }

    #[test]
    fn round_trip_and_parseval() {
        for grid in [Grid::new_1d(48, 3.0).unwrap(), Grid::new_3d(24, 6.0).unwrap()] {
            let f = random_field(grid, 11);
            let back = f.to_spectral().to_physical();
            let num: f64 = f
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let den: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(num / den < 1e-12, "round-trip error {}", num / den);
            assert_relative_eq!(f.l2_norm(), f.to_spectral().l2_norm(), max_relative = 1e-12);
        }
    }

    #[test]
    fn inner_product_matches_norm_and_representation() {
        let grid = Grid::new_3d(16, 8.0).unwrap();
        let f = random_field(grid, 3);
        let g = random_field(grid, 4);
        let ip_phys = f.inner(&g).unwrap();
        let ip_spec = f.to_spectral().inner(&g.to_spectral()).unwrap();
        assert_relative_eq!(ip_phys.re, ip_spec.re, max_relative = 1e-11, epsilon = 1e-13);
        assert_relative_eq!(ip_phys.im, ip_spec.im, max_relative = 1e-11, epsilon = 1e-13);
        let self_ip = f.inner(&f).unwrap();
        assert_relative_eq!(self_ip.re, f.charge(), max_relative = 1e-12);
        assert!(self_ip.im.abs() < 1e-12 * f.charge());
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = Field::zeros(Grid::new_3d(16, 8.0).unwrap());
        let b = Field::zeros(Grid::new_3d(16, 4.0).unwrap());
        assert!(a.inner(&b).is_err());
    }
}
