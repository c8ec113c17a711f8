//! Soliton profiles of the focusing half-wave Hartree model: a normalized
//! fixed-point solver for `√(-Δ)Q + |ω|Q = |λ|(|x|^{-1} ∗ Q²)Q`, the exact
//! discrete scaling family those profiles generate, and the variational
//! functionals (`k_functional`, `energy_scaling_check`) used to certify them.
//!
//! The convolution inside the solver is the torus Coulomb solve with its
//! zero mode restored as the constant `ν·m/L` (see the Hartree module). That
//! choice does two things at once: it normalizes the eigenvalue to the
//! whole-space convention, and it keeps the potential strictly positive for
//! nonnegative iterates, which the normalized iteration relies on. The same
//! shift makes the whole discrete equation exactly covariant under the joint
//! rescaling `(Q, L) ↦ (a^{3/2}Q(a·), L/a)`, which is what
//! `scale_ground_state` exploits.

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use crate::grid::{Dim, Grid};
use crate::hartree::{
    density, density_moments, free_coulomb_energy, free_half_kinetic_form, shifted_coulomb,
};
use crate::operators::{half_kinetic_form, sobolev_norm};
use num_complex::Complex64;
use rayon::prelude::*;

/// A numerically converged soliton profile `Q` solving
/// `√(-Δ)Q + |ω|Q = |λ|(|x|^{-1} ∗ Q²)Q` on its grid, together with the
/// invariants that identify it.
#[derive(Debug, Clone)]
pub struct GroundState {
    /// The profile itself: real, positive at the center, physical-space.
    pub q: Field,
    /// `∫Q²`.
    pub mass: f64,
    /// The critical interaction constant this profile defines: `mass/2`.
    /// Pairing the equation with `Q` and the virial identity force
    /// `K[Q] = mass/2` exactly in the continuum, so the threshold mass for
    /// the a-priori bound is `2·k_const = mass` by construction.
    /// `k_functional(&q)` measures the same number independently through
    /// the kinetic and pair-energy quadratures (it agrees to ≲1%).
    pub k_const: f64,
    /// Chemical potential ω < 0; `-1` for a direct solve, `-a` after
    /// rescaling by `a`.
    pub eigenvalue: f64,
    /// `‖(√(-Δ) + |ω|)Q − |λ|Ψ₊Q‖_{H^{1/2}}` at return, where `Ψ₊` is the
    /// zero-mode-restored torus Coulomb potential of `Q²`.
    pub residual: f64,
    /// Coupling the profile was solved at (λ < 0).
    pub lambda: f64,
}

/// `(√(-Δ) + shift)u`, physical space.
fn apply_operator(u: &Field, shift: f64) -> Field {
    let mut f = u.to_spectral();
    let xi_sq = f.grid().xi_sq_table();
    f.values_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(j, v)| *v *= xi_sq[j].sqrt() + shift);
    f.make_physical();
    f
}

/// `(√(-Δ) + shift)^{-1}u`, physical space. Requires `shift > 0`.
fn apply_resolvent(u: &Field, shift: f64) -> Field {
    debug_assert!(shift > 0.0);
    let mut f = u.to_spectral();
    let xi_sq = f.grid().xi_sq_table();
    f.values_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(j, v)| *v /= xi_sq[j].sqrt() + shift);
    f.make_physical();
    f
}

/// Left side `(√(-Δ)+shift)q`, right side `|λ|Ψ₊q`, and the `H^{1/2}` norm
/// of their difference — the equation defect of `q` at chemical potential
/// `-shift`.
fn equation_parts(q: &Field, lambda: f64, shift: f64) -> (Field, Field, f64) {
    let grid = q.grid();
    let rho = density(q);
    let psi = shifted_coulomb(&rho, grid);
    let qp = q.to_physical();
    let lam = lambda.abs();
    let w_values: Vec<Complex64> = psi
        .values()
        .iter()
        .zip(qp.values())
        .map(|(p, v)| lam * p.re * v)
        .collect();
    let w = Field::new(grid, Representation::Physical, w_values).unwrap();
    let lq = apply_operator(q, shift);
    let r_values: Vec<Complex64> =
        lq.values().iter().zip(w.values()).map(|(a, b)| a - b).collect();
    let r = Field::new(grid, Representation::Physical, r_values).unwrap();
    let residual = sobolev_norm(&r, 0.5);
    (lq, w, residual)
}

fn assemble(q: Field, residual: f64, eigenvalue: f64, lambda: f64) -> GroundState {
    let mass = q.charge();
    let k_const = 0.5 * mass;
    GroundState { q, mass, k_const, eigenvalue, residual, lambda }
}

/// Finds the ground-state profile at chemical potential `-1` by normalized
/// fixed-point iteration (Petviashvili-type, exponent 3/2 for the cubic
/// homogeneity): starting from a unit-mass Gaussian,
///
/// ```text
/// W = |λ|Ψ₊[Q²]·Q,   M = ⟨Q, (√(-Δ)+1)Q⟩ / ⟨Q, W⟩,
/// Q ← M^{3/2} · (√(-Δ)+1)^{-1} W,
/// ```
///
/// with every iterate projected back to the real subspace, until the
/// equation defect drops to `tol` in `H^{1/2}`. 3-d grids and focusing
/// couplings (λ < 0) only.
pub fn solve_ground_state(grid: Grid, lambda: f64, tol: f64, max_iter: usize) -> Result<GroundState> {
    if grid.dim() != Dim::Three {
        return Err(Error::Config("ground-state solve requires a 3-d grid".into()));
    }
    if lambda >= 0.0 || lambda.is_nan() {
        return Err(Error::Config(format!(
            "ground-state solve requires a focusing coupling λ < 0, got {lambda}"
        )));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let mut q = crate::probes::gaussian(grid, 1.5, 1.0);
    let initial_norm = q.l2_norm();
    let mut last_residual = f64::INFINITY;
    for _ in 0..max_iter {
        let (lq, w, residual) = equation_parts(&q, lambda, 1.0);
        if residual <= tol {
            // The zero-mode shift in the potential admits a second, spatially
            // constant fixed point on small boxes. A converged iterate with
            // essentially no kinetic content sits on that delocalized branch,
            // not on the soliton branch this solver promises.
            if half_kinetic_form(&q) < 0.2 * q.charge() {
                return Err(Error::CollapseToZero);
            }
            return Ok(assemble(q, residual, -1.0, lambda));
        }
        last_residual = residual;
        let num = q.inner(&lq).unwrap().re;
        let den = q.inner(&w).unwrap().re;
        if !(den > 0.0 && num > 0.0) {
            return Err(Error::CollapseToZero);
        }
        let gain = (num / den).powf(1.5);
        let mut next = apply_resolvent(&w, 1.0);
        next.values_mut()
            .par_iter_mut()
            .for_each(|v| *v = Complex64::new(gain * v.re, 0.0));
        if next.l2_norm() < 1e-12 * initial_norm {
            return Err(Error::CollapseToZero);
        }
        q = next;
    }
    Err(Error::NoConvergence { iters: max_iter, tol, residual: last_residual })
}

/// The exact discrete scaling map on a converged profile: the grid becomes
/// `(n, L/a)`, the stored values become `a^{3/2}·Q` at the same indices, the
/// eigenvalue moves to `a·ω`. Every term of the discrete equation — spectral
/// sums, lattice shift, quadrature weights — transforms covariantly, so mass
/// and `k_const` are preserved to rounding and the defect grows by at most
/// `a^{3/2}` (for `a ≥ 1`; it shrinks for `a < 1`). The returned residual is
/// recomputed on the new grid, not inferred.
///
/// Errors with `UnresolvedScale` if the rescaled profile would have fewer
/// than 8 grid points per decay length, with the decay length read off the
/// profile itself as `4·r_rms` of its density.
pub fn scale_ground_state(gs: &GroundState, a: f64) -> Result<GroundState> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config(format!("scaling ratio must be positive and finite, got {a}")));
    }
    let old = gs.q.grid();
    let grid = Grid::new(old.n_per_axis(), old.box_length() / a, old.dim())?;
    let factor = a.powf(1.5);
    let qp = gs.q.to_physical();
    let values: Vec<Complex64> = qp.values().iter().map(|v| factor * v).collect();
    let q = Field::new(grid, Representation::Physical, values).unwrap();
    let rho = density(&q);
    let mo = density_moments(&rho, grid);
    if mo.mass <= 0.0 {
        return Err(Error::ZeroField);
    }
    let dipole_sq =
        mo.dipole[0] * mo.dipole[0] + mo.dipole[1] * mo.dipole[1] + mo.dipole[2] * mo.dipole[2];
    let r_rms = (mo.second / mo.mass - dipole_sq / (mo.mass * mo.mass)).max(0.0).sqrt();
    let pts = 4.0 * r_rms / grid.spacing();
    if pts < 8.0 {
        return Err(Error::UnresolvedScale {
            a,
            detail: format!("{pts:.1} grid points per decay length 4·r_rms, need at least 8"),
        });
    }
    let eigenvalue = gs.eigenvalue * a;
    let (_, _, residual) = equation_parts(&q, gs.lambda, eigenvalue.abs());
    Ok(assemble(q, residual, eigenvalue, gs.lambda))
}

/// The scale- and translation-invariant quotient
/// `K[u] = ‖(-Δ)^{1/4}u‖₂² · ‖u‖₂² / P(u)` with
/// `P(u) = ∫∫|u(x)|²|u(y)|²/|x−y|` the whole-space pair energy. Both
/// quadratic forms are whole-space reference values reconstructed from the
/// torus solve: the pair energy through the density's moments, the kinetic
/// form through its origin-cell correction.
///
/// For fields localized well inside the box the quotient is bounded below by
/// `2/π` (the sharp constant of the pointwise kernel bound), and its true
/// infimum `mass(Q)/2` is attained exactly on the ground-state family.
/// Errors on the zero field; delocalized inputs (for which the whole-space
/// reconstruction is meaningless) are outside its contract.
pub fn k_functional(u: &Field) -> Result<f64> {
    let t2 = free_half_kinetic_form(u);
    let n = u.charge();
    if n <= 0.0 || t2 <= 0.0 {
        return Err(Error::ZeroField);
    }
    let p = free_coulomb_energy(&density(u), u.grid());
    Ok(t2 * n / p)
}

/// Evaluation matrix of the one-axis trigonometric interpolant at the
/// dilated points `a·x_j`: `D[j,k] = n^{-1/2}·e^{iξ_k(a·x_j + L/2)}`, with
/// the unpaired Nyquist column taken as a cosine so real fields stay real.
///
/// Rows whose evaluation point `a·x_j` falls outside the fundamental domain
/// `[-L/2, L/2)` are zero: the periodic interpolant would wrap the center of
/// the box back in at the edges there, which is never what a whole-space
/// dilation of a localized field means. For such fields the clamped samples
/// differ from the true dilation only by the field's own value beyond the
/// box edge.
fn dilation_matrix(grid: Grid, a: f64) -> Vec<Complex64> {
    let n = grid.n_per_axis();
    let el = grid.box_length();
    let scale = 1.0 / (n as f64).sqrt();
    let nyquist = -(n as i64) / 2;
    let mut d = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let target = a * grid.coord(j) + 0.5 * el;
        if !(0.0..el).contains(&target) {
            continue;
        }
        for k in 0..n {
            let phase = grid.freq(k) * target;
            d[j * n + k] = if grid.signed_index(k) == nyquist {
                Complex64::new(scale * phase.cos(), 0.0)
            } else {
                Complex64::from_polar(scale, phase)
            };
        }
    }
    d
}

/// Applies the same `n×n` matrix along one axis of the flat array: for each
/// line `{base + k·stride}` the line is replaced by `D·line`. Lines run in
/// parallel; the dot products themselves stay sequential so results are
/// bit-reproducible.
fn apply_along(values: &mut [Complex64], d: &[Complex64], n: usize, stride: usize, bases: &[usize]) {
    let results: Vec<Vec<Complex64>> = bases
        .par_iter()
        .map(|&b| {
            let line: Vec<Complex64> = (0..n).map(|k| values[b + k * stride]).collect();
            (0..n)
                .map(|j| {
                    let row = &d[j * n..(j + 1) * n];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (rk, lk) in row.iter().zip(&line) {
                        acc += rk * lk;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    for (b, out) in bases.iter().zip(results) {
        for (j, v) in out.into_iter().enumerate() {
            values[*b + j * stride] = v;
        }
    }
}

/// The mass-preserving dilation `u_a(x) = a^{d/2}·u(a·x)` about the box
/// center, evaluated by spectral interpolation and sampled back on the same
/// grid. Evaluation points that a compression (`a > 1`) pushes past the box
/// edge read zero rather than the wrapped periodic copy, so the result is
/// the whole-space dilation of a box-localized field. Content pushed past
/// the Nyquist frequency by `a > 1` still aliases; callers that need a
/// guarantee should check the spectral tail first, as
/// `energy_scaling_check` does.
pub fn rescale_field(u: &Field, a: f64) -> Result<Field> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config(format!("dilation ratio must be positive and finite, got {a}")));
    }
    let grid = u.grid();
    let n = grid.n_per_axis();
    let d = dilation_matrix(grid, a);
    let spec = u.to_spectral();
    let mut values = spec.into_values();
    match grid.dim() {
        Dim::One => {
            apply_along(&mut values, &d, n, 1, &[0]);
        }
        Dim::Three => {
            let bases_x: Vec<usize> = (0..n * n).map(|l| l * n).collect();
            apply_along(&mut values, &d, n, 1, &bases_x);
            let bases_y: Vec<usize> =
                (0..n * n).map(|l| (l % n) + n * n * (l / n)).collect();
            apply_along(&mut values, &d, n, n, &bases_y);
            let bases_z: Vec<usize> = (0..n * n).collect();
            apply_along(&mut values, &d, n, n * n, &bases_z);
        }
    }
    let amp = match grid.dim() {
        Dim::One => a.sqrt(),
        Dim::Three => a.powf(1.5),
    };
    values.par_iter_mut().for_each(|v| *v *= amp);
    Ok(Field::new(grid, Representation::Physical, values).unwrap())
}

/// Fraction of spectral mass that the dilation by `a` would push past the
/// Nyquist box: modes with any per-axis index beyond `n/(2a)`.
fn aliased_tail_fraction(spec: &Field, a: f64) -> f64 {
    if a <= 1.0 {
        return 0.0;
    }
    let grid = spec.grid();
    let cut = (grid.n_per_axis() as f64 / (2.0 * a)).floor() as i64;
    let mut tail = 0.0;
    let mut total = 0.0;
    for (j, v) in spec.values().iter().enumerate() {
        let w = v.norm_sqr();
        total += w;
        let (ix, iy, iz) = grid.index3(j);
        if grid.signed_index(ix).abs() > cut
            || grid.signed_index(iy).abs() > cut
            || grid.signed_index(iz).abs() > cut
        {
            tail += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// The massless unscreened unit-coupling energy
/// `E[v] = ½‖(-Δ)^{1/4}v‖² − ¼P(v)`, with both terms taken as whole-space
/// reference values (corrected kinetic form, moment-corrected pair energy).
pub(crate) fn halfwave_energy(u: &Field) -> f64 {
    0.5 * free_half_kinetic_form(u) - 0.25 * free_coulomb_energy(&density(u), u.grid())
}

/// Evaluates both sides of the exact dilation law `E[u_α] = α·E[u]` for
/// `u_α = α^{3/2}u(α·)` against the massless unscreened λ = −1 energy
/// `E[v] = ½‖(-Δ)^{1/4}v‖² − ¼P(v)`, and returns the pair
/// `(E[u_α], α·E[u])`. The dilated field is built by same-grid spectral
/// interpolation; both energies use the whole-space reference quadratures.
/// On well-resolved fields the two numbers agree to about 1e-4 of the size
/// of the energy's individual terms (they can cancel, so compare against
/// `½T₂ + ¼P`, not against `E` itself).
///
/// Dilations with `α > 1` compress the field and stretch its spectrum: if
/// more than 1e-8 of the spectral mass sits beyond the post-dilation
/// Nyquist box the check errors with `UnresolvedScale` instead of
/// returning a polluted number. 3-d grids only.
pub fn energy_scaling_check(u: &Field, alpha: f64) -> Result<(f64, f64)> {
    if u.grid().dim() != Dim::Three {
        return Err(Error::Config("energy scaling check requires a 3-d grid".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!(
            "scaling ratio must be positive and finite, got {alpha}"
        )));
    }
    let spec = u.to_spectral();
    let tail = aliased_tail_fraction(&spec, alpha);
    if tail > 1e-8 {
        return Err(Error::UnresolvedScale {
            a: alpha,
            detail: format!(
                "spectral mass fraction {tail:.2e} beyond the post-dilation Nyquist box (limit 1e-8)"
            ),
        });
    }
    let ua = rescale_field(u, alpha)?;
    Ok((halfwave_energy(&ua), alpha * halfwave_energy(u)))
}

/// One profile solved once and shared across the crate's test modules
/// (48³ box of side 24, λ = −1, tolerance 1e−8).
#[cfg(test)]
pub(crate) fn cached_test_profile() -> &'static GroundState {
    use std::sync::OnceLock;
    static SOLVED: OnceLock<GroundState> = OnceLock::new();
    SOLVED.get_or_init(|| {
        solve_ground_state(Grid::new_3d(48, 24.0).unwrap(), -1.0, 1e-8, 400).unwrap()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn solved() -> &'static GroundState {
        cached_test_profile()
    }

    /// `½T₂ + ¼P`: the magnitude of the energy's two (possibly cancelling)
    /// terms, the honest denominator for scaling-law defects.
    fn parts_scale(u: &Field) -> f64 {
        0.5 * free_half_kinetic_form(u) + 0.25 * free_coulomb_energy(&density(u), u.grid())
    }

    #[test]
    fn rescale_is_exact_on_lattice_aligned_waves() {
        // The dilation evaluates the trigonometric interpolant exactly, so
        // for a field made of a few plane waves the result has a closed
        // form: the same waves at the dilated points, zeroed wherever the
        // evaluation point leaves the box.
        let grid = Grid::new_3d(24, 10.0).unwrap();
        let el = grid.box_length();
        let k1 = [2.0, -4.0, 6.0];
        let k2 = [-6.0, 2.0, 0.0];
        let wave = move |p: [f64; 3], k: [f64; 3], amp: Complex64| {
            let phase = 2.0 * PI / el * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2]);
            amp * Complex64::from_polar(1.0, phase)
        };
        let a1 = Complex64::new(0.7, -0.2);
        let a2 = Complex64::new(-0.3, 0.55);
        let u = Field::from_fn(grid, move |p| wave(p, k1, a1) + wave(p, k2, a2));
        let a = 1.5;
        let got = rescale_field(&u, a).unwrap();
        let amp = a.powf(1.5);
        let want = Field::from_fn(grid, move |p| {
            let q = [a * p[0], a * p[1], a * p[2]];
            if q.iter().any(|c| !(-0.5 * el..0.5 * el - 1e-12).contains(c)) {
                Complex64::new(0.0, 0.0)
            } else {
                amp * (wave(q, k1, a1) + wave(q, k2, a2))
            }
        });
        let scale = want.max_abs();
        let worst = got
            .values()
            .iter()
            .zip(want.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12 * scale, "worst deviation {worst:.3e}");
        // a = 1 reproduces the samples identically.
        let same = rescale_field(&u, 1.0).unwrap();
        let worst1 = same
            .values()
            .iter()
            .zip(u.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst1 <= 1e-12 * scale);
    }

    #[test]
    fn rescale_keeps_real_fields_real() {
        let grid = Grid::new_3d(16, 8.0).unwrap();
        let mix = probes::random_localized(grid, 5).to_physical();
        let real = Field::new(
            grid,
            Representation::Physical,
            mix.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        )
        .unwrap();
        let out = rescale_field(&real, 1.3).unwrap();
        let max_re = out.values().iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        let max_im = out.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(max_im <= 1e-12 * max_re, "imaginary leakage {max_im:.3e}");
    }

    #[test]
    fn rescale_compression_clamps_instead_of_wrapping() {
        // At a = 2 the evaluation points 2·x cover the box twice; the
        // periodic interpolant would fold the central peak onto the box
        // edge. The dilation must instead read zero there, and then a
        // localized field keeps its mass through the compression.
        let grid = Grid::new_3d(48, 24.0).unwrap();
        let u = probes::gaussian(grid, 1.5, 1.0);
        let u2 = rescale_field(&u, 2.0).unwrap();
        let peak = u2.max_abs();
        let mut edge_worst = 0.0f64;
        for (j, v) in u2.values().iter().enumerate() {
            let (ix, iy, iz) = grid.index3(j);
            let far = [ix, iy, iz].iter().any(|&i| grid.coord(i).abs() >= 10.0);
            if far {
                edge_worst = edge_worst.max(v.norm());
            }
        }
        assert!(
            edge_worst <= 1e-10 * peak,
            "edge contamination {edge_worst:.3e} vs peak {peak:.3e}"
        );
        assert_relative_eq!(u2.charge(), u.charge(), max_relative = 1e-8);
    }

    #[test]
    fn k_functional_gaussian_is_sqrt_two() {
        // For any isotropic Gaussian, T₂ = 2/(√π σ), N = 1, P = √2/(√π σ),
        // so K = √2 exactly, at every width — a two-sided oracle for the
        // corrected kinetic form and the pair-energy reconstruction at once.
        let grid = Grid::new_3d(48, 24.0).unwrap();
        for sigma in [0.8, 1.3] {
            let u = probes::gaussian(grid, sigma, 1.0);
            let k = k_functional(&u).unwrap();
            assert_relative_eq!(k, 2.0_f64.sqrt(), max_relative = 1e-4);
        }
        assert!(matches!(k_functional(&Field::zeros(grid)), Err(Error::ZeroField)));
    }

    #[test]
    fn k_functional_is_scale_invariant() {
        let grid = Grid::new_3d(48, 24.0).unwrap();
        let u = probes::gaussian(grid, 1.3, 1.0);
        let k = k_functional(&u).unwrap();
        // The exact lattice realization of u_a = a^{3/2}u(a·) keeps the
        // same samples on the shrunk box; all three quadratures scale by
        // matching powers of a, so K is invariant to rounding.
        let a = 2.0;
        let shrunk = Grid::new_3d(grid.n_per_axis(), grid.box_length() / a).unwrap();
        let values: Vec<Complex64> =
            u.to_physical().values().iter().map(|v| a.powf(1.5) * v).collect();
        let ua = Field::new(shrunk, Representation::Physical, values).unwrap();
        assert_relative_eq!(k_functional(&ua).unwrap(), k, max_relative = 1e-6);
        // The same-grid resampled dilation adds interpolation and clamp
        // error on top; it stays invariant at the quadrature level.
        let resampled = rescale_field(&probes::gaussian(grid, 1.5, 1.0), 2.0).unwrap();
        let k15 = k_functional(&probes::gaussian(grid, 1.5, 1.0)).unwrap();
        assert_relative_eq!(k_functional(&resampled).unwrap(), k15, max_relative = 1e-4);
    }

    #[test]
    fn solver_converges_and_satisfies_virial_identities() {
        let gs = solved();
        assert!(gs.residual <= 1e-8, "residual {:.3e}", gs.residual);
        assert_eq!(gs.eigenvalue, -1.0);
        assert_eq!(gs.lambda, -1.0);
        // Profile is real (projected every iterate) and strictly positive.
        let max_im = gs.q.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert_eq!(max_im, 0.0);
        let min_re = gs.q.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        let max_re = gs.q.values().iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re > 0.0 && min_re > 0.0, "min/max {min_re:.3e}/{max_re:.3e}");
        // Multiplying the equation by Q and the virial identity pin
        // T₂ = mass and P = 2·mass on the whole space; the box quadratures
        // reproduce them to the profile's tail truncation.
        let t2 = half_kinetic_form(&gs.q);
        let p = free_coulomb_energy(&density(&gs.q), gs.q.grid());
        assert_relative_eq!(t2, gs.mass, max_relative = 2.5e-2);
        assert_relative_eq!(p, 2.0 * gs.mass, max_relative = 2.5e-2);
        // The stored constant is mass/2 by construction, so the threshold
        // coefficient vanishes identically at the threshold mass...
        assert_eq!(gs.k_const, 0.5 * gs.mass);
        assert!((0.5 - gs.mass / (4.0 * gs.k_const)).abs() <= 1e-6);
        // ...and the independently measured quotient agrees within 1%.
        let k = k_functional(&gs.q).unwrap();
        assert_relative_eq!(k, gs.k_const, max_relative = 1e-2);
        assert!(gs.mass > 4.0 / PI, "mass {:.4} not above 4/π", gs.mass);
    }

    #[test]
    fn profile_is_octant_symmetric() {
        // Everything in the iteration is invariant under x ↦ -x per axis,
        // so the converged profile must be too (up to rounding; the spec
        // for this symmetry is 1e-8, measured ~1e-14).
        let gs = solved();
        let qp = gs.q.to_physical();
        let n = qp.grid().n_per_axis();
        let refl = |j: usize| (n - j) % n;
        let peak = qp.max_abs();
        let mut worst = 0.0f64;
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let a = qp.values()[(iz * n + iy) * n + ix].re;
                    let b = qp.values()[(refl(iz) * n + refl(iy)) * n + refl(ix)].re;
                    worst = worst.max((a - b).abs());
                }
            }
        }
        assert!(worst <= 1e-8 * peak, "octant asymmetry {:.3e}", worst / peak);
    }

    #[test]
    fn euler_lagrange_pairing_vanishes_at_tolerance() {
        // Pairing the solved equation with Q itself:
        // ⟨Q,√(-Δ)Q⟩ + ‖Q‖² − |λ|⟨Q,Ψ₊Q⟩ = ⟨Q, r⟩, which Cauchy–Schwarz
        // bounds by ‖Q‖₂·‖r‖ ≤ ‖Q‖₂·tol.
        let gs = solved();
        let grid = gs.q.grid();
        let rho = density(&gs.q);
        let psi = shifted_coulomb(&rho, grid);
        let qp = gs.q.to_physical();
        let mut pairing = 0.0;
        for (p, v) in psi.values().iter().zip(qp.values()) {
            pairing += p.re * v.norm_sqr();
        }
        pairing *= grid.cell_volume() * gs.lambda.abs();
        let t2 = half_kinetic_form(&gs.q);
        let defect = (t2 + gs.mass - pairing).abs();
        let bound = 1e-8 * gs.q.l2_norm();
        assert!(defect <= bound, "pairing defect {defect:.3e} above {bound:.3e}");
    }

    #[test]
    fn coupling_strength_scales_out_exactly() {
        // Q_λ = Q/√|λ| solves the λ-equation iff Q solves the unit one, as
        // an identity of the discrete fixed-point map, so the masses must
        // match to solver tolerance and the invariant quotient exactly.
        let grid = Grid::new_3d(32, 16.0).unwrap();
        let a = solve_ground_state(grid, -1.0, 1e-8, 400).unwrap();
        let b = solve_ground_state(grid, -2.5, 1e-8, 400).unwrap();
        assert_relative_eq!(b.mass, a.mass / 2.5, max_relative = 1e-6);
        assert_relative_eq!(b.k_const, a.k_const / 2.5, max_relative = 1e-6);
        assert_relative_eq!(
            k_functional(&b.q).unwrap(),
            k_functional(&a.q).unwrap(),
            max_relative = 1e-7
        );
    }

    #[test]
    fn small_box_constant_branch_is_refused() {
        // On a small box the zero-mode shift admits an exactly constant
        // fixed point (mass L/(ν|λ|) ≈ 4.23 here) that attracts the
        // iteration; the solver must refuse it rather than return a
        // delocalized "profile".
        let grid = Grid::new_3d(24, 12.0).unwrap();
        assert!(matches!(
            solve_ground_state(grid, -1.0, 1e-7, 600),
            Err(Error::CollapseToZero)
        ));
    }

    #[test]
    fn solver_rejects_bad_inputs() {
        let grid = Grid::new_3d(16, 8.0).unwrap();
        assert!(matches!(solve_ground_state(grid, 1.0, 1e-6, 10), Err(Error::Config(_))));
        assert!(matches!(
            solve_ground_state(Grid::new_1d(64, 8.0).unwrap(), -1.0, 1e-6, 10),
            Err(Error::Config(_))
        ));
        assert!(matches!(solve_ground_state(grid, -1.0, 0.0, 10), Err(Error::Config(_))));
        assert!(matches!(
            solve_ground_state(grid, -1.0, 1e-14, 2),
            Err(Error::NoConvergence { iters: 2, .. })
        ));
    }

    #[test]
    fn scaling_map_is_exactly_covariant() {
        let gs = solved();
        for a in [2.0, 0.5] {
            let scaled = scale_ground_state(gs, a).unwrap();
            assert_relative_eq!(scaled.mass, gs.mass, max_relative = 1e-12);
            assert_relative_eq!(scaled.k_const, gs.k_const, max_relative = 1e-12);
            assert_eq!(scaled.eigenvalue, -a);
            assert_eq!(scaled.q.grid().box_length(), gs.q.grid().box_length() / a);
            // Index by index the residual transforms by a^{5/2} while the
            // Sobolev weight gains at most a factor a, so the recomputed
            // defect obeys the covariant bound up to rounding.
            let bound = a.powf(1.5).max(1.0) * gs.residual * (1.0 + 1e-9) + 1e-15;
            assert!(
                scaled.residual <= bound,
                "a = {a}: residual {:.3e} above covariant bound {:.3e}",
                scaled.residual,
                bound
            );
        }
    }

    #[test]
    fn scaling_map_guards_resolution() {
        let gs = solved();
        // A synthetic profile much narrower than the grid spacing allows
        // (4·r_rms under two grid cells) must be refused at any ratio.
        let narrow = probes::gaussian(gs.q.grid(), 0.3, 1.0);
        let fake = GroundState {
            q: narrow,
            mass: 1.0,
            k_const: 0.5,
            eigenvalue: -1.0,
            residual: 1.0,
            lambda: -1.0,
        };
        assert!(matches!(scale_ground_state(&fake, 2.0), Err(Error::UnresolvedScale { .. })));
        assert!(matches!(scale_ground_state(gs, -1.0), Err(Error::Config(_))));
    }

    #[test]
    fn energy_pair_is_exact_at_unit_ratio() {
        let gs = solved();
        let (lhs, rhs) = energy_scaling_check(&gs.q, 1.0).unwrap();
        assert!(
            (lhs - rhs).abs() <= 1e-13 * parts_scale(&gs.q),
            "unit ratio pair differs: {lhs:.6e} vs {rhs:.6e}"
        );
    }

    #[test]
    fn energy_scaling_law_holds_for_gaussian_compression() {
        // E[u_2] against 2·E[u] for a wide Gaussian: the two sides are each
        // O(1) and must agree to 1e-4 of the energy's term size.
        let grid = Grid::new_3d(48, 24.0).unwrap();
        let u = probes::gaussian(grid, 1.5, 1.0);
        let (lhs, rhs) = energy_scaling_check(&u, 2.0).unwrap();
        let defect = (lhs - rhs).abs() / (2.0 * parts_scale(&u));
        assert!(defect <= 1e-4, "defect {defect:.3e}");
    }

    #[test]
    fn energy_scaling_law_holds_for_profile_expansion() {
        // Expanding the converged profile (a < 1 — no spectral tail is
        // created) probes the cancellation between kinetic and interaction
        // energy on the dilation family. The fine spectral mesh keeps the
        // residual quadrature error of both sides below 1e-4 of the terms.
        let gs = solve_ground_state(Grid::new_3d(80, 40.0).unwrap(), -1.0, 1e-8, 400).unwrap();
        let scale = parts_scale(&gs.q);
        for a in [0.5, 0.8] {
            let (lhs, rhs) = energy_scaling_check(&gs.q, a).unwrap();
            let defect = (lhs - rhs).abs() / (a * scale);
            assert!(defect <= 1e-4, "a = {a}: defect {defect:.3e}");
        }
    }

    #[test]
    fn energy_check_refuses_unresolved_ratios() {
        let gs = solved();
        // The profile's spectral tail aliases already at a = 1.25 on this
        // grid; the guard must catch it, and also plainly bad ratios and
        // grids.
        assert!(matches!(
            energy_scaling_check(&gs.q, 1.25),
            Err(Error::UnresolvedScale { .. })
        ));
        assert!(matches!(
            energy_scaling_check(&gs.q, 40.0),
            Err(Error::UnresolvedScale { .. })
        ));
        assert!(matches!(energy_scaling_check(&gs.q, -1.0), Err(Error::Config(_))));
        let line = probes::gaussian(Grid::new_1d(64, 16.0).unwrap(), 1.0, 1.0);
        assert!(matches!(energy_scaling_check(&line, 2.0), Err(Error::Config(_))));
    }
}
