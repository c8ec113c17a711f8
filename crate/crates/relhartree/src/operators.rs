//! Fourier multipliers: the kinetic symbol and its relatives, Sobolev norms,
//! the bounded regularizer, and the decay semigroup. Every symbol here is a
//! radial function of `|ξ|²`, so application is a pointwise product in the
//! spectral representation.

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use num_complex::Complex64;
use rayon::prelude::*;

/// Relative size of the zero mode above which a symbol that is singular at
/// `ξ = 0` refuses to act.
const MEAN_ZERO_TOL: f64 = 1e-10;

/// Diagonal operators in the frequency representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierSpec {
    /// `√(|ξ|² + m²)` — the kinetic operator.
    SqrtLaplacianMass { m: f64 },
    /// `(|ξ|²)^(s/2)` — fractional Laplacian of order `s`.
    Riesz { s: f64 },
    /// `(μ² + |ξ|²)^(s/2)` — screened fractional order `s`.
    Bessel { mu: f64, s: f64 },
    /// `1/(ε√(|ξ|²+m²) + 1)` — bounded smoothing approximation of the identity.
    Regularizer { eps: f64, m: f64 },
    /// `e^(-t|ξ|)` — decay semigroup of the massless kinetic operator.
    PoissonSemigroup { t: f64 },
    /// `e^(-it√(|ξ|²+m²))` — unitary free propagator.
    Propagator { t: f64, m: f64 },
}

impl MultiplierSpec {
    /// Symbol value at squared frequency `|ξ|²`.
    pub fn eval(&self, xi_sq: f64) -> Complex64 {
        match *self {
            MultiplierSpec::SqrtLaplacianMass { m } => ((xi_sq + m * m).sqrt()).into(),
            MultiplierSpec::Riesz { s } => {
                if xi_sq == 0.0 {
                    // Convention: 0 at the zero mode for every s; callers must
                    // hand in mean-zero data when s < 0.
                    if s == 0.0 { 1.0.into() } else { 0.0.into() }
                } else {
                    xi_sq.powf(0.5 * s).into()
                }
            }
            MultiplierSpec::Bessel { mu, s } => {
                let base = mu * mu + xi_sq;
                if base == 0.0 {
                    if s == 0.0 { 1.0.into() } else { 0.0.into() }
                } else {
                    base.powf(0.5 * s).into()
                }
            }
            MultiplierSpec::Regularizer { eps, m } => {
                (1.0 / (eps * (xi_sq + m * m).sqrt() + 1.0)).into()
            }
            MultiplierSpec::PoissonSemigroup { t } => (-t * xi_sq.sqrt()).exp().into(),
            MultiplierSpec::Propagator { t, m } => {
                (-Complex64::i() * t * (xi_sq + m * m).sqrt()).exp()
            }
        }
    }

    /// True when the symbol blows up as `ξ → 0`, in which case the zero mode
    /// is defined as 0 and the input must be mean-free.
    pub fn singular_at_zero(&self) -> bool {
        match *self {
            MultiplierSpec::Riesz { s } => s < 0.0,
            MultiplierSpec::Bessel { mu, s } => mu == 0.0 && s < 0.0,
            _ => false,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            MultiplierSpec::Regularizer { eps, .. } if eps <= 0.0 || eps.is_nan() => {
                Err(Error::NonPositiveEps(eps))
            }
            MultiplierSpec::PoissonSemigroup { t } if t <= 0.0 || t.is_nan() => {
                Err(Error::NonPositiveTime(t))
            }
            _ => Ok(()),
        }
    }
}

/// Apply a diagonal symbol. The output comes back in the representation the
/// input arrived in.
pub fn apply_multiplier(f: &Field, spec: &MultiplierSpec) -> Result<Field> {
    spec.validate()?;
    let original = f.representation();
    let mut out = f.to_spectral();
    if spec.singular_at_zero() {
        let total: f64 = out.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let zero_mode = out.values()[0].norm();
        if total > 0.0 && zero_mode > MEAN_ZERO_TOL * total {
            return Err(Error::SingularSymbol(zero_mode / total));
        }
    }
    let grid = f.grid();
    let xi_sq = grid.xi_sq_table();
    out.values_mut()
        .par_iter_mut()
        .zip(xi_sq.par_iter())
        .for_each(|(v, &q)| *v *= spec.eval(q));
    if original == Representation::Physical {
        out.make_physical();
    }
    Ok(out)
}

/// `H^s` norm: `(h^d Σ_ξ (1+|ξ|²)^s |û(ξ)|²)^(1/2)`. At `s = 0` this is the
/// `L²` norm; a plane wave of amplitude `c` at lattice frequency `k` gives
/// `c·L^(d/2)·(1+|k|²)^(s/2)`.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    // Sequential accumulation: results feed persisted outputs, which must be
    // bit-reproducible regardless of thread count.
    let spec = f.to_spectral();
    let xi_sq = f.grid().xi_sq_table();
    let sum: f64 = spec
        .values()
        .iter()
        .zip(xi_sq.iter())
        .map(|(v, &q)| (1.0 + q).powf(s) * v.norm_sqr())
        .sum();
    (f.grid().cell_volume() * sum).sqrt()
}

/// Squared seminorm `‖(-Δ)^(1/4) u‖₂²`, the quadratic form of the massless
/// kinetic operator.
pub fn half_kinetic_form(f: &Field) -> f64 {
    let spec = f.to_spectral();
    let xi_sq = f.grid().xi_sq_table();
    let sum: f64 = spec
        .values()
        .iter()
        .zip(xi_sq.iter())
        .map(|(v, &q)| q.sqrt() * v.norm_sqr())
        .sum();
    f.grid().cell_volume() * sum
}

/// Smooth a field with the bounded approximation `1/(ε√(-Δ+m²)+1)`.
/// Contracts every `H^s` norm and gains one derivative at scale `1/ε`.
pub fn regularize(f: &Field, eps: f64, m: f64) -> Result<Field> {
    apply_multiplier(f, &MultiplierSpec::Regularizer { eps, m })
}

/// Apply the decay semigroup `e^(-t√(-Δ))`, `t > 0`. Positivity improving:
/// nonnegative data of any size comes out strictly positive.
pub fn poisson_semigroup(f: &Field, t: f64) -> Result<Field> {
    apply_multiplier(f, &MultiplierSpec::PoissonSemigroup { t })
}
