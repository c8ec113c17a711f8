//! Time integration of the semi-relativistic Hartree flow
//! `i∂ₜu = √(−Δ+m²)u + (λe^{−μ|x|}/|x| ∗ |u|²)u + Vu`.
//!
//! The workhorse is a Strang splitting whose nonlinear substep is an exact
//! phase rotation (the potential `Ψ + V` is real and `|u|` is invariant under
//! the substep, so freezing `Ψ` incurs no error inside the substep). An
//! independent Picard iteration on the integral (Duhamel) form of the
//! equation provides a cross-check that shares no code with the splitting.
//! Energy and charge are monitored spectrally; blow-up is reported through a
//! numerical surrogate (norm threshold, or a collapsing adaptive step while
//! the energy-space norm grows monotonically), never claimed as proof.

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use crate::grid::{Dim, Grid};
use crate::hartree::{hartree_potential_opts, interaction_energy};
use crate::params::Params;
use num_complex::Complex64;
use rayon::prelude::*;

/// Relative spectral-tail size above which a field no longer resolves the
/// flow and stepping refuses to continue.
const RESOLUTION_TAIL_TOL: f64 = 1e-8;

/// The monotone-growth surrogate requires this many consecutive completed
/// steps with strictly increasing `H^(1/2)` norm.
const GROWTH_WINDOW: usize = 10;

/// How many recent per-step norms a state retains.
const RECENT_CAP: usize = 16;

/// Relative single-step energy jump that makes the adaptive driver halve the
/// step size.
const ENERGY_JUMP_REL: f64 = 1e-7;

/// Number of consecutive quiet (no-jump) steps after which the adaptive
/// driver doubles the step size again, capped at the configured initial step.
const QUIET_STEPS_TO_DOUBLE: usize = 50;

/// The adaptive driver reads a step size that has collapsed below the
/// configured maximum by this factor — while the `H^(1/2)` norm grows
/// monotonically — as blow-up. During genuine collapse the dynamics stiffen
/// without bound, so waits for an absolute floor would grind through
/// millions of steps; resolved globally bounded runs never trip the energy
/// monitor at all, which makes seven consecutive halvings decisive.
const DT_COLLAPSE_FACTOR: f64 = 128.0;

/// Energy and charge functionals of a state at one instant. All entries are
/// evaluated spectrally on the grid the field lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `½⟨u, √(−Δ+m²)u⟩`.
    pub kinetic: f64,
    /// `¼∫(λe^{−μ|x|}/|x| ∗ |u|²)|u|²` in the periodic convention (the
    /// Coulomb zero mode is dropped, matching what the flow conserves).
    pub interaction: f64,
    /// `½∫V|u|²`; zero when no external potential is supplied.
    pub external: f64,
    /// `kinetic + interaction + external`, summed in that order.
    pub total: f64,
    /// `N[u] = ‖u‖₂²`.
    pub charge: f64,
    /// Simulation time the report refers to.
    pub time: f64,
}

/// Where a run currently stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Running,
    Completed,
    BlowupDetected,
    Aborted,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RunStatus::Running => "running",
            RunStatus::Completed => "completed",
            RunStatus::BlowupDetected => "blowup_detected",
            RunStatus::Aborted => "aborted",
        };
        f.write_str(name)
    }
}

/// A field being evolved, together with its clock, bookkeeping and the
/// monitoring trail the detectors read.
#[derive(Debug, Clone)]
pub struct RunState {
    /// Current field. Kept in the spectral representation between steps.
    pub field: Field,
    /// Current simulation time.
    pub time: f64,
    /// Completed steps (retried steps are not counted).
    pub step_count: u64,
    pub status: RunStatus,
    /// Sampled conservation reports, strictly increasing in time.
    pub history: Vec<EnergyReport>,
    /// Human-readable reason when the run ended abnormally.
    pub fault: Option<String>,
    /// Step size the integration is currently using: the last step taken, or
    /// the adaptive proposal for the next one. Infinite before any step.
    current_dt: f64,
    /// `H^(1/2)` norms after each recent completed step, oldest first.
    recent_h_half: Vec<f64>,
}

impl RunState {
    /// Wrap initial data at time zero.
    pub fn new(field: Field) -> Self {
        RunState {
            field,
            time: 0.0,
            step_count: 0,
            status: RunStatus::Running,
            history: Vec::new(),
            fault: None,
            current_dt: f64::INFINITY,
            recent_h_half: Vec::new(),
        }
    }

    /// Step size the integration is currently using.
    pub fn current_dt(&self) -> f64 {
        self.current_dt
    }

    fn push_recent(&mut self, h: f64) {
        if self.recent_h_half.len() == RECENT_CAP {
            self.recent_h_half.remove(0);
        }
        self.recent_h_half.push(h);
    }
}

/// `H^(1/2)` norm from spectral coefficients: `√(h³ Σ √(1+|ξ|²) |û|²)`.
fn h_half_from_spectral(values: &[Complex64], xi_sq: &[f64], cell: f64) -> f64 {
    let sum: f64 = values
        .iter()
        .zip(xi_sq.iter())
        .map(|(v, &q)| (1.0 + q).sqrt() * v.norm_sqr())
        .sum();
    (cell * sum).sqrt()
}

/// True when the mode at flat index `j` lies strictly outside the 2/3-rule
/// ball (some axis has signed index beyond `n/3`). These are the modes the
/// dealiasing projection zeroes.
fn beyond_ball(grid: Grid, j: usize) -> bool {
    let cut = grid.n_per_axis() as i64 / 3;
    match grid.dim() {
        Dim::Three => {
            let (ix, iy, iz) = grid.index3(j);
            grid.signed_index(ix).abs() > cut
                || grid.signed_index(iy).abs() > cut
                || grid.signed_index(iz).abs() > cut
        }
        Dim::One => grid.signed_index(j).abs() > cut,
    }
}

fn tail_fraction_of(values: &[Complex64], grid: Grid) -> f64 {
    let mut peak = 0.0_f64;
    let mut tail = 0.0_f64;
    for (j, v) in values.iter().enumerate() {
        let a = v.norm_sqr();
        peak = peak.max(a);
        if beyond_ball(grid, j) {
            tail = tail.max(a);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        (tail / peak).sqrt()
    }
}

/// Resolution diagnostic: the largest spectral coefficient strictly outside
/// the 2/3-rule ball (some axis index beyond `n/3`), relative to the overall
/// peak coefficient. Zero for the zero field. Time stepping refuses fields
/// where this exceeds `1e−8`: content out there is either unresolved data or
/// accumulated alias images, and neither can be trusted. Runs with
/// dealiasing on keep the region empty by construction, so for them the
/// check guards the supplied initial data.
pub fn spectral_tail_fraction(u: &Field) -> f64 {
    let spec = u.to_spectral();
    tail_fraction_of(spec.values(), spec.grid())
}

fn monotone_growth(recent: &[f64]) -> bool {
    if recent.len() < GROWTH_WINDOW + 1 {
        return false;
    }
    let tail = &recent[recent.len() - (GROWTH_WINDOW + 1)..];
    tail.windows(2).all(|w| w[1] > w[0])
}

/// One Strang step of size `dt` (which may be negative: the scheme is time
/// reversible). Splitting: half a free flight `e^{−i(dt/2)√(−Δ+m²)}`, a full
/// phase rotation `e^{−i·dt·(Ψ+V)}` with `Ψ` computed from the current `|u|²`
/// (exact, since the rotation leaves `|u|` untouched), half a free flight.
/// Every substep is an `L²` isometry, so charge is conserved to roundoff.
///
/// `v` is an external potential sampled on the same grid (real part used).
/// Refuses to step a field whose spectral tail exceeds `1e−8` of its peak.
pub fn step_strang(
    state: &mut RunState,
    dt: f64,
    params: &Params,
    v: Option<&Field>,
) -> Result<()> {
    step_strang_opts(state, dt, params, v, false)
}

/// [`step_strang`] with an explicit choice for 2/3-rule dealiasing. With
/// `dealias` the quadratically generated density is truncated inside the
/// potential solve and the field itself is projected back onto the retained
/// ball (axis indices up to `n/3`) after the phase rotation, so alias images
/// of the products can never accumulate over long runs. The projection makes
/// the step no longer exactly reversible (the discarded content cannot be
/// restored), so reversibility checks belong with the plain variant.
pub fn step_strang_opts(
    state: &mut RunState,
    dt: f64,
    params: &Params,
    v: Option<&Field>,
    dealias: bool,
) -> Result<()> {
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::ZeroStep);
    }
    let grid = state.field.grid();
    if let Some(pot) = v {
        if pot.grid() != grid {
            return Err(Error::GridMismatch);
        }
    }
    state.field.make_spectral();
    let tail = tail_fraction_of(state.field.values(), grid);
    if tail > RESOLUTION_TAIL_TOL {
        return Err(Error::ResolutionLoss { tail, threshold: RESOLUTION_TAIL_TOL });
    }

    let xi_sq = grid.xi_sq_table();
    let msq = params.m() * params.m();
    let half = -0.5 * dt;
    let half_flight = |values: &mut [Complex64]| {
        values
            .par_iter_mut()
            .zip(xi_sq.par_iter())
            .for_each(|(u, &q)| *u *= Complex64::from_polar(1.0, half * (q + msq).sqrt()));
    };

    half_flight(state.field.values_mut());

    if params.lambda() != 0.0 || v.is_some() {
        state.field.make_physical();
        let psi = if params.lambda() != 0.0 {
            Some(hartree_potential_opts(&state.field, params, dealias))
        } else {
            None
        };
        let owned_pot: Option<Field> = v.and_then(|p| {
            (p.representation() != Representation::Physical).then(|| p.to_physical())
        });
        let pot_values: Option<&[Complex64]> = match (v, &owned_pot) {
            (Some(_), Some(owned)) => Some(owned.values()),
            (Some(p), None) => Some(p.values()),
            (None, _) => None,
        };
        let psi_values = psi.as_ref().map(|f| f.values());
        state
            .field
            .values_mut()
            .par_iter_mut()
            .enumerate()
            .for_each(|(j, u)| {
                let mut phase = 0.0;
                if let Some(pv) = psi_values {
                    phase += pv[j].re;
                }
                if let Some(xv) = pot_values {
                    phase += xv[j].re;
                }
                *u *= Complex64::from_polar(1.0, -dt * phase);
            });
        state.field.make_spectral();
        if dealias {
            state
                .field
                .values_mut()
                .par_iter_mut()
                .enumerate()
                .for_each(|(j, u)| {
                    if beyond_ball(grid, j) {
                        *u = Complex64::new(0.0, 0.0);
                    }
                });
        }
    }

    half_flight(state.field.values_mut());

    state.time += dt;
    state.step_count += 1;
    state.current_dt = dt;
    let h = h_half_from_spectral(state.field.values(), &xi_sq, grid.cell_volume());
    state.push_recent(h);
    Ok(())
}

/// All conservation functionals of `u` at the given time, without touching
/// any run state. `v` must live on the same grid (physical reading).
pub fn energy_report(u: &Field, time: f64, params: &Params, v: Option<&Field>) -> EnergyReport {
    let grid = u.grid();
    if let Some(pot) = v {
        assert!(pot.grid() == grid, "external potential must live on the field's grid");
    }
    let spec = u.to_spectral();
    let xi_sq = grid.xi_sq_table();
    let msq = params.m() * params.m();
    let mut charge = 0.0;
    let mut kinetic = 0.0;
    for (vhat, &q) in spec.values().iter().zip(xi_sq.iter()) {
        let w = vhat.norm_sqr();
        charge += w;
        kinetic += (q + msq).sqrt() * w;
    }
    let cell = grid.cell_volume();
    charge *= cell;
    kinetic *= 0.5 * cell;
    let interaction = interaction_energy(u, params);
    let external = match v {
        None => 0.0,
        Some(pot) => {
            let pot_phys = pot.to_physical();
            let phys = u.to_physical();
            let sum: f64 = pot_phys
                .values()
                .iter()
                .zip(phys.values())
                .map(|(p, uu)| p.re * uu.norm_sqr())
                .sum();
            0.5 * cell * sum
        }
    };
    EnergyReport {
        kinetic,
        interaction,
        external,
        total: kinetic + interaction + external,
        charge,
        time,
    }
}

/// Measure the state and append the report to its history. Re-measuring at
/// the same instant replaces the last entry; measuring after the clock moved
/// backward first drops the entries it passed, so history times stay
/// strictly increasing.
pub fn measure(state: &mut RunState, params: &Params, v: Option<&Field>) -> EnergyReport {
    let report = energy_report(&state.field, state.time, params, v);
    while state.history.last().is_some_and(|r| r.time >= report.time) {
        state.history.pop();
    }
    state.history.push(report);
    report
}

/// Picard iteration on the integral form of the flow,
/// `u(t) = e^{−itA}u₀ − i∫₀ᵗ e^{−i(t−τ)A}F(u(τ))dτ` with `A = √(−Δ+m²)` and
/// `F(u) = Ψ[u]u`: an integrator-independent short-time reference for the
/// splitting scheme.
///
/// The iterates live on `n_quad` uniformly spaced time nodes spanning
/// `[0, t]` (endpoints included) and the integral is the cumulative
/// trapezoidal rule over those nodes, applied to `g(τ) = e^{iτA}F(u(τ))` so
/// each update is `u(τ_k) ← e^{−iτ_k A}(u₀ − i·I_k)`. With `λ = 0` the first
/// iteration already returns the free flight exactly. The nonlinearity is
/// evaluated with 2/3-rule dealiasing, matching the splitting scheme's
/// evolution convention.
///
/// Errors with `NoContraction` when the distance between successive final
/// iterates grows three times in a row while still above the rounding floor;
/// distances at that floor mean the fixed point has converged.
pub fn picard_duhamel(
    u0: &Field,
    t: f64,
    n_quad: usize,
    n_iter: usize,
    params: &Params,
) -> Result<Field> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Config(format!(
            "integral-equation horizon must be finite and nonnegative, got {t}"
        )));
    }
    if n_quad < 2 {
        return Err(Error::Config(format!(
            "quadrature needs at least 2 nodes, got {n_quad}"
        )));
    }
    if n_iter == 0 {
        return Err(Error::Config("need at least one fixed-point iteration".into()));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }

    let grid = u0.grid();
    let original = u0.representation();
    let u0s = u0.to_spectral();
    let xi_sq = grid.xi_sq_table();
    let msq = params.m() * params.m();
    let cell = grid.cell_volume();

    let mut taus: Vec<f64> = (0..n_quad)
        .map(|k| t * k as f64 / (n_quad - 1) as f64)
        .collect();
    taus[n_quad - 1] = t;
    let dtau = t / (n_quad - 1) as f64;

    // e^{−iτA} applied to spectral values.
    let flight = |values: &[Complex64], tau: f64| -> Vec<Complex64> {
        values
            .iter()
            .zip(xi_sq.iter())
            .map(|(v, &q)| v * Complex64::from_polar(1.0, -tau * (q + msq).sqrt()))
            .collect()
    };
    // g = e^{+iτA}F(u) for a spectral node value.
    let twisted_nonlinearity = |node: &[Complex64], tau: f64| -> Vec<Complex64> {
        let mut u = Field::new(grid, Representation::Spectral, node.to_vec()).unwrap();
        u.make_physical();
        let psi = hartree_potential_opts(&u, params, true);
        let f_values: Vec<Complex64> = psi
            .values()
            .iter()
            .zip(u.values())
            .map(|(p, uu)| p.re * uu)
            .collect();
        let mut f = Field::new(grid, Representation::Physical, f_values).unwrap();
        f.make_spectral();
        let mut fv = f.into_values();
        for (j, x) in fv.iter_mut().enumerate() {
            if beyond_ball(grid, j) {
                *x = Complex64::new(0.0, 0.0);
            }
        }
        flight(&fv, -tau)
    };
    let l2_dist = |a: &[Complex64], b: &[Complex64]| -> f64 {
        let sum: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
        (cell * sum).sqrt()
    };

    let mut nodes: Vec<Vec<Complex64>> =
        taus.iter().map(|&tau| flight(u0s.values(), tau)).collect();
    // Successive-iterate distances at the rounding floor mean the fixed point
    // has converged; only growth above this floor counts toward divergence.
    let u0_norm: f64 = (cell * u0s.values().iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    let rounding_floor = 1e-14 * u0_norm;
    let mut last_dist = f64::INFINITY;
    let mut growth_streak = 0;
    for iter in 1..=n_iter {
        let twisted: Vec<Vec<Complex64>> = nodes
            .iter()
            .zip(taus.iter())
            .map(|(node, &tau)| twisted_nonlinearity(node, tau))
            .collect();
        let mut integral = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut new_nodes: Vec<Vec<Complex64>> = Vec::with_capacity(n_quad);
        new_nodes.push(u0s.values().to_vec());
        for k in 1..n_quad {
            let w = 0.5 * dtau;
            for ((acc, lo), hi) in integral
                .iter_mut()
                .zip(twisted[k - 1].iter())
                .zip(twisted[k].iter())
            {
                *acc += w * (lo + hi);
            }
            let shifted: Vec<Complex64> = u0s
                .values()
                .iter()
                .zip(integral.iter())
                .map(|(u, i)| u - Complex64::i() * i)
                .collect();
            new_nodes.push(flight(&shifted, taus[k]));
        }
        let dist = l2_dist(&new_nodes[n_quad - 1], &nodes[n_quad - 1]);
        nodes = new_nodes;
        if dist <= rounding_floor {
            break;
        }
        if dist > last_dist {
            growth_streak += 1;
            if growth_streak >= 3 {
                return Err(Error::NoContraction(iter));
            }
        } else {
            growth_streak = 0;
        }
        if dist == 0.0 {
            break;
        }
        last_dist = dist;
    }

    let mut out = Field::new(grid, Representation::Spectral, nodes.pop().unwrap()).unwrap();
    if original == Representation::Physical {
        out.make_physical();
    }
    Ok(out)
}

/// Numerical blow-up surrogate. Fires when the `H^(1/2)` norm exceeds
/// `threshold`, or when the adaptive step has collapsed to `dt_floor` or
/// below while the norm grew on each of the last ten completed steps.
/// Anything else is `Running`. A verdict here is evidence, not proof.
pub fn detect_blowup(state: &RunState, threshold: f64, dt_floor: f64) -> RunStatus {
    let current = state
        .recent_h_half
        .last()
        .copied()
        .unwrap_or_else(|| crate::operators::sobolev_norm(&state.field, 0.5));
    if current > threshold {
        return RunStatus::BlowupDetected;
    }
    if state.current_dt <= dt_floor && monotone_growth(&state.recent_h_half) {
        return RunStatus::BlowupDetected;
    }
    RunStatus::Running
}

/// The two sides of the coercivity lower bound
/// `E[u] ≥ (½ − N[u]/(4·k_const))·⟨u, √(−Δ+m²)u⟩`: returns
/// `(E[u], coefficient·2·kinetic)`. For focusing runs with
/// `charge < 2·k_const` the first component dominates the second up to
/// roundoff; at `m = 0` the quadratic form is exactly `‖(−Δ)^{1/4}u‖₂²`, and
/// for `m > 0` the massive form only strengthens the claim.
pub fn apriori_bound_check(report: EnergyReport, k_const: f64) -> (f64, f64) {
    let coefficient = 0.5 - report.charge / (4.0 * k_const);
    (report.total, coefficient * 2.0 * report.kinetic)
}

/// Knobs for [`evolve`]. `new(t_final, dt)` fills in the defaults: adaptive
/// stepping on, dealiasing on, blow-up threshold `10³·‖u₀‖_{H^{1/2}}`,
/// step floor `1e−9`, one sample every 10 steps.
#[derive(Debug, Clone)]
pub struct EvolveOpts {
    pub t_final: f64,
    /// Initial (and maximal) step size.
    pub dt: f64,
    /// Halve the step on an energy jump; double it back after quiet spells.
    pub adaptive: bool,
    /// 2/3-rule dealiasing of the nonlinear products (default on; switch
    /// off only for pure operator studies).
    pub dealias: bool,
    /// `H^(1/2)` blow-up threshold; `None` means `10³` times the initial norm.
    pub blowup_threshold: Option<f64>,
    /// Hard floor: the run aborts rather than step finer than this. The
    /// blow-up verdict itself triggers earlier, once the step has collapsed
    /// 128-fold below `dt` with monotone norm growth.
    pub dt_floor: f64,
    /// Steps between history samples.
    pub sample_stride: usize,
}

impl EvolveOpts {
    pub fn new(t_final: f64, dt: f64) -> Self {
        EvolveOpts {
            t_final,
            dt,
            adaptive: true,
            dealias: true,
            blowup_threshold: None,
            dt_floor: 1e-9,
            sample_stride: 10,
        }
    }
}

/// One emitted time-series sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub report: EnergyReport,
    pub h_half_norm: f64,
    /// Step size in use when the sample was taken.
    pub dt: f64,
}

/// Drive a state to `t_final` with [`step_strang_opts`], sampling the
/// conservation functionals every `sample_stride` steps (plus the initial
/// and final instants). Returns the sampled rows; the same reports land in
/// `state.history`.
pub fn evolve(
    state: &mut RunState,
    params: &Params,
    v: Option<&Field>,
    opts: &EvolveOpts,
) -> Result<Vec<TimeSeriesRow>> {
    evolve_with(state, params, v, opts, |_, _| Ok(()))
}

/// [`evolve`] with a callback invoked on every emitted sample — the hook for
/// streaming CSV rows or writing snapshots mid-run. An error from the
/// callback aborts the run and is passed through.
///
/// Adaptive policy: after each step the total energy is compared with the
/// previous accepted value; a relative jump above `1e−7` rejects the step
/// and halves `dt`, while 50 consecutive quiet steps double `dt` back up to
/// the configured maximum. A step size that has collapsed 128-fold below
/// the configured maximum while the `H^(1/2)` norm grew monotonically over
/// the last ten steps is reported as `BlowupDetected`; falling below the
/// hard floor without that growth pattern is `Aborted`. Losing spectral
/// resolution mid-run is classified by the same growth criterion.
pub fn evolve_with(
    state: &mut RunState,
    params: &Params,
    v: Option<&Field>,
    opts: &EvolveOpts,
    mut on_sample: impl FnMut(&RunState, &TimeSeriesRow) -> Result<()>,
) -> Result<Vec<TimeSeriesRow>> {
    if opts.dt <= 0.0 || !opts.dt.is_finite() {
        return Err(Error::Config(format!(
            "initial step size must be positive and finite, got {}",
            opts.dt
        )));
    }
    if opts.dt_floor <= 0.0 || !opts.dt_floor.is_finite() {
        return Err(Error::Config(format!(
            "step-size floor must be positive and finite, got {}",
            opts.dt_floor
        )));
    }
    if !opts.t_final.is_finite() || opts.t_final < state.time {
        return Err(Error::Config(format!(
            "final time {} must be finite and at least the current time {}",
            opts.t_final, state.time
        )));
    }
    if opts.sample_stride == 0 {
        return Err(Error::Config("sample stride must be at least 1".into()));
    }

    state.field.make_spectral();
    let grid = state.field.grid();
    let xi_sq = grid.xi_sq_table();
    let cell = grid.cell_volume();
    let initial_h = h_half_from_spectral(state.field.values(), &xi_sq, cell);
    let threshold = opts.blowup_threshold.unwrap_or(1e3 * initial_h);
    if threshold <= initial_h {
        return Err(Error::Config(format!(
            "blow-up threshold {threshold:.6e} must exceed the initial H^(1/2) norm {initial_h:.6e}"
        )));
    }

    state.status = RunStatus::Running;
    state.fault = None;
    let mut dt_cur = opts.dt;
    state.current_dt = dt_cur;
    let mut rows: Vec<TimeSeriesRow> = Vec::new();

    let report0 = measure(state, params, v);
    let row0 = TimeSeriesRow { report: report0, h_half_norm: initial_h, dt: dt_cur };
    on_sample(state, &row0)?;
    rows.push(row0);

    let mut last_total = report0.total;
    let mut parts_scale =
        report0.kinetic.abs() + report0.interaction.abs() + report0.external.abs();
    let mut quiet = 0usize;
    let mut since_sample = 0usize;
    let time_tol = 1e-12 * opts.t_final.abs().max(1.0);

    loop {
        let remaining = opts.t_final - state.time;
        if remaining <= time_tol {
            state.status = RunStatus::Completed;
            break;
        }
        let dt_eff = dt_cur.min(remaining);
        let saved = opts.adaptive.then(|| {
            (state.field.clone(), state.time, state.step_count, state.recent_h_half.clone())
        });

        match step_strang_opts(state, dt_eff, params, v, opts.dealias) {
            Ok(()) => {}
            Err(Error::ResolutionLoss { .. }) => {
                if monotone_growth(&state.recent_h_half) {
                    state.status = RunStatus::BlowupDetected;
                    state.fault = Some(format!(
                        "spectral resolution lost at t = {:.6} while the H^(1/2) norm grew monotonically",
                        state.time
                    ));
                } else {
                    state.status = RunStatus::Aborted;
                    state.fault = Some(format!(
                        "spectral resolution lost at t = {:.6} without monotone norm growth",
                        state.time
                    ));
                }
                break;
            }
            Err(e) => return Err(e),
        }

        if opts.adaptive {
            let rep = energy_report(&state.field, state.time, params, v);
            let scale = last_total.abs().max(1e-3 * parts_scale).max(f64::MIN_POSITIVE);
            if (rep.total - last_total).abs() > ENERGY_JUMP_REL * scale {
                quiet = 0;
                dt_cur *= 0.5;
                if dt_cur >= opts.dt_floor {
                    let (field, time, steps, recent) = saved.unwrap();
                    state.field = field;
                    state.time = time;
                    state.step_count = steps;
                    state.recent_h_half = recent;
                    state.current_dt = dt_cur;
                    continue;
                }
                // Below the floor: keep the step and let the detector decide.
            } else {
                last_total = rep.total;
                parts_scale = rep.kinetic.abs() + rep.interaction.abs() + rep.external.abs();
                quiet += 1;
                if quiet >= QUIET_STEPS_TO_DOUBLE {
                    dt_cur = (2.0 * dt_cur).min(opts.dt);
                    quiet = 0;
                }
            }
        }

        state.current_dt = dt_cur;
        let collapse_floor = (opts.dt / DT_COLLAPSE_FACTOR).max(opts.dt_floor);
        if detect_blowup(state, threshold, collapse_floor) == RunStatus::BlowupDetected {
            state.status = RunStatus::BlowupDetected;
            break;
        }
        if dt_cur < opts.dt_floor {
            state.status = RunStatus::Aborted;
            state.fault = Some(format!(
                "adaptive step collapsed below the floor {:.3e} at t = {:.6} without monotone norm growth",
                opts.dt_floor, state.time
            ));
            break;
        }

        since_sample += 1;
        if since_sample >= opts.sample_stride {
            since_sample = 0;
            let report = measure(state, params, v);
            let h = *state.recent_h_half.last().unwrap();
            let row = TimeSeriesRow { report, h_half_norm: h, dt: dt_cur };
            on_sample(state, &row)?;
            rows.push(row);
        }
    }

    if rows.last().is_none_or(|r| r.report.time != state.time) {
        let report = measure(state, params, v);
        state.field.make_spectral();
        let h = h_half_from_spectral(state.field.values(), &xi_sq, cell);
        let row = TimeSeriesRow { report, h_half_norm: h, dt: dt_cur };
        on_sample(state, &row)?;
        rows.push(row);
    }
    Ok(rows)
}
