//! Self-consistent mean-field steady states of the driven dispersive cavity.
//!
//! In the frame rotating at the drive, the steady amplitude obeys
//!
//! ```text
//! A_s = −iΩ / (κ + i[Δ_d − s(N̄)]),   s(N̄) = g²σ_z/E(N̄),   N̄ = |A_s|²
//! ```
//!
//! Taking the modulus gives a scalar equation for x = N̄,
//!
//! ```text
//! f(x) = h(x) − |Ω|²,   h(x) = x·[κ² + (Δ_d − s(x))²]
//! ```
//!
//! which is solved by bracketing on a grid that includes every turning point
//! of h (so f is monotone between breakpoints and no root can be missed), then
//! bisection. The turning points satisfy h'(x) = κ² + u² + 4g⁴σ_z x u/E³ = 0
//! with u = Δ_d − s(x); solving that quadratic in u gives the closed-form
//! boundary Δ_±(x) of the bistable region.
//!
//! The slope h'(x) is also the stability margin: with the linearized
//! coefficients Δ̃_d = u + 2g⁴σ_z x/E³ and |α| = 2g⁴x/E³,
//! κ² + Δ̃_d² − |α|² = h'(x). Roots on a falling stretch of the S-curve are
//! therefore exactly the unstable ones.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::logspace;
use crate::model::{energy_unchecked, frequency_pull, upper_bound_photons, SystemParams};
use crate::scalar::{cis, csqrt, imag, modulus, norm_sqr, real, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The only root at this drive.
    Single,
    Lower,
    Middle,
    Upper,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Single => "single",
            Branch::Lower => "lower",
            Branch::Middle => "middle",
            Branch::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateRoot<T> {
    pub a_s: Complex<T>,
    /// |A_s|².
    pub n_bar: T,
    pub stable: bool,
    pub branch: Branch,
}

/// Linear drift of the fluctuation pair (A_f, A_f†) about a mean-field root:
/// dA_f/dt = −(κ + iΔ̃_d)A_f − iα A_f†.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift<T> {
    pub kappa: T,
    pub delta_tilde: T,
    pub delta_omega: T,
    pub alpha: Complex<T>,
}

impl<T: Real> Drift<T> {
    pub fn at(params: &SystemParams<T>, a_s: Complex<T>) -> Self {
        let x = norm_sqr(a_s);
        let e = energy_unchecked(params, x);
        let g2 = params.g * params.g;
        let sigma = params.sigma_z();
        let e3 = e * e * e;
        let two = T::lit(2.0);
        let delta_omega = g2 * sigma / e3 * (e * e - two * g2 * x);
        let alpha = a_s * a_s * (two * g2 * g2 * sigma / e3);
        Drift { kappa: params.kappa, delta_tilde: params.delta_d - delta_omega, delta_omega, alpha }
    }

    /// κ² + Δ̃_d² − |α|².
    pub fn stability_margin(&self) -> T {
        self.kappa * self.kappa + self.delta_tilde * self.delta_tilde - norm_sqr(self.alpha)
    }

    /// Eigenvalues −κ ± sqrt(|α|² − Δ̃_d²) of the 2×2 drift matrix.
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        let root = csqrt(real(norm_sqr(self.alpha) - self.delta_tilde * self.delta_tilde));
        let k = real(-self.kappa);
        [k + root, k - root]
    }

    pub fn is_stable(&self) -> bool {
        self.eigenvalues().iter().all(|l| l.re < T::zero())
    }
}

/// f(x) = x·[κ² + (Δ_d − s(x))²] − |Ω|².
pub fn modulus_residual<T: Real>(params: &SystemParams<T>, x: T) -> T {
    drive_response(params, x) - norm_sqr(params.omega)
}

/// h(x) = x·[κ² + (Δ_d − s(x))²], the |Ω|² that sustains N̄ = x.
pub fn drive_response<T: Real>(params: &SystemParams<T>, x: T) -> T {
    let u = params.delta_d - frequency_pull(params, x);
    x * (params.kappa * params.kappa + u * u)
}

/// h'(x).
pub fn response_slope<T: Real>(params: &SystemParams<T>, x: T) -> T {
    let e = energy_unchecked(params, x);
    let u = params.delta_d - params.g * params.g * params.sigma_z() / e;
    let g2 = params.g * params.g;
    params.kappa * params.kappa + u * u + T::lit(4.0) * g2 * g2 * params.sigma_z() * x * u / (e * e * e)
}

const ROOT_GRID_POINTS: usize = 1024;
const ROOT_GRID_REFINEMENTS: u32 = 4;

fn bisect<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T) -> T {
    let mut fa = f(a);
    for _ in 0..400 {
        let mid = (a + b) * T::lit(0.5);
        if !(mid > a && mid < b) || (b - a) <= T::lit(2.0) * T::EPS * b.abs() {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    (a + b) * T::lit(0.5)
}

/// Golden-section search for the minimum of `f` on [a, b].
fn golden_min<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= T::lit(4.0) * T::EPS * b.abs().max(a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn merged_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    let mut grid = logspace(lo, hi, points).expect("positive endpoints");
    let step = (hi - lo) / T::count(points - 1);
    grid.extend((1..points - 1).map(|i| lo + step * T::count(i)));
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    grid
}

/// Zeros of a smooth function on [lo, hi]: sign changes on the grid, plus
/// pairs of zeros hidden between grid points, found by polishing every grid
/// extremum of the function.
fn zeros_on_grid<T: Real, F: Fn(T) -> T + Copy>(func: F, grid: &[T]) -> Vec<T> {
    let values: Vec<T> = grid.iter().map(|&x| func(x)).collect();
    let mut zeros = Vec::new();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == T::zero() {
            zeros.push(grid[i]);
        } else if (fa < T::zero()) != (fb < T::zero()) && fb != T::zero() {
            zeros.push(bisect(func, grid[i], grid[i + 1]));
        }
    }
    if let Some(&last) = values.last() {
        if last == T::zero() {
            zeros.push(grid[grid.len() - 1]);
        }
    }
    for i in 1..grid.len() - 1 {
        let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
        let is_min = m <= l && m <= r && m > T::zero();
        let is_max = m >= l && m >= r && m < T::zero();
        if !(is_min || is_max) {
            continue;
        }
        let sign = if is_min { T::one() } else { -T::one() };
        let (x_ext, v) = golden_min(|x| sign * func(x), grid[i - 1], grid[i + 1]);
        if v < T::zero() {
            zeros.push(bisect(func, grid[i - 1], x_ext));
            zeros.push(bisect(func, x_ext, grid[i + 1]));
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).expect("finite zero"));
    zeros.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-12) * b.abs());
    zeros
}

/// Bracket [x_lo, x_hi] containing every root: κ²x ≤ |Ω|² and
/// x·[κ² + (|Δ_d| + |s(0)|)²] ≥ |Ω|².
fn root_bracket<T: Real>(params: &SystemParams<T>, omega_sq: T) -> (T, T) {
    let k2 = params.kappa * params.kappa;
    let u_max = params.delta_d.abs() + frequency_pull(params, T::zero()).abs();
    (omega_sq / (k2 + u_max * u_max), omega_sq / k2)
}

/// Turning points of h inside [lo, hi], ascending.
pub fn turning_points<T: Real>(params: &SystemParams<T>, lo: T, hi: T) -> Vec<T> {
    if !(hi > lo && lo > T::zero()) || params.g == T::zero() {
        return Vec::new();
    }
    let grid = merged_grid(lo, hi, ROOT_GRID_POINTS);
    zeros_on_grid(|x| response_slope(params, x), &grid)
}

/// All real non-negative photon numbers N̄ solving the self-consistency
/// condition, ascending.
pub fn photon_number_roots<T: Real>(params: &SystemParams<T>) -> Result<Vec<T>> {
    let omega_sq = norm_sqr(params.omega);
    if omega_sq == T::zero() {
        return Ok(vec![T::zero()]);
    }
    let (lo, hi) = root_bracket(params, omega_sq);
    if !(hi > lo) {
        return Ok(vec![hi]);
    }
    let f = |x: T| modulus_residual(params, x);
    let tangent_tol = T::lit(1e-12) * omega_sq;

    let mut points = ROOT_GRID_POINTS;
    for _ in 0..=ROOT_GRID_REFINEMENTS {
        let grid = if params.g == T::zero() { vec![lo, hi] } else { merged_grid(lo, hi, points) };
        let critical = if params.g == T::zero() {
            Vec::new()
        } else {
            zeros_on_grid(|x| response_slope(params, x), &grid)
        };
        let mut breaks = Vec::with_capacity(critical.len() + 2);
        breaks.push(lo);
        breaks.extend(critical.iter().copied().filter(|&c| c > lo && c < hi));
        breaks.push(hi);

        let mut roots = Vec::new();
        let mut tangent = false;
        for w in breaks.windows(2) {
            let (fa, fb) = (f(w[0]), f(w[1]));
            if fa == T::zero() {
                roots.push(w[0]);
            } else if (fa < T::zero()) != (fb < T::zero()) && fb != T::zero() {
                roots.push(bisect(f, w[0], w[1]));
            }
        }
        if f(hi) == T::zero() {
            roots.push(hi);
        }
        for &c in &critical {
            if f(c).abs() <= tangent_tol {
                roots.push(c);
                tangent = true;
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).expect("finite root"));
        roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-10) * b.abs());

        // f(lo) ≤ 0 ≤ f(hi): without a tangency the count must be odd.
        if roots.len() % 2 == 1 || tangent {
            return Ok(roots);
        }
        points *= 2;
    }
    Err(Error::RootGrid { refinements: ROOT_GRID_REFINEMENTS, near: lo.to_f64_lossy() })
}

/// A_s = −iΩ / (κ + i[Δ_d − s(N̄)]).
pub fn amplitude_from_number<T: Real>(params: &SystemParams<T>, n_bar: T) -> Complex<T> {
    let u = params.delta_d - frequency_pull(params, n_bar);
    imag(-T::one()) * params.omega / Complex::new(params.kappa, u)
}

/// |A_s(κ + i[Δ_d − s(|A_s|²)]) + iΩ|.
pub fn self_consistency_residual<T: Real>(params: &SystemParams<T>, a_s: Complex<T>) -> T {
    let u = params.delta_d - frequency_pull(params, norm_sqr(a_s));
    modulus(a_s * Complex::new(params.kappa, u) + imag(T::one()) * params.omega)
}

pub fn classify_stability<T: Real>(root: &SteadyStateRoot<T>, params: &SystemParams<T>) -> bool {
    Drift::at(params, root.a_s).is_stable()
}

/// Roots with amplitudes, stability flags and branch labels.
pub fn steady_states<T: Real>(params: &SystemParams<T>) -> Result<Vec<SteadyStateRoot<T>>> {
    let xs = photon_number_roots(params)?;
    let count = xs.len();
    Ok(xs
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let a_s = amplitude_from_number(params, x);
            let branch = match (count, i) {
                (1, _) => Branch::Single,
                (_, 0) => Branch::Lower,
                (n, i) if i + 1 == n => Branch::Upper,
                _ => Branch::Middle,
            };
            let drift = Drift::at(params, a_s);
            SteadyStateRoot { a_s, n_bar: norm_sqr(a_s), stable: drift.is_stable(), branch }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMethod {
    /// Root counting over Δ_d, authoritative.
    Sweep,
    /// Extremes of the closed-form turning-point locus Δ_±(x).
    Formula,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BistabilityWindow<T> {
    /// (Δ−, Δ+), or `None` when no drive produces three roots.
    pub bounds: Option<(T, T)>,
    pub method: WindowMethod,
}

impl<T: Real> BistabilityWindow<T> {
    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn contains(&self, delta_d: T) -> bool {
        self.bounds.is_some_and(|(lo, hi)| delta_d > lo && delta_d < hi)
    }
}

/// Range of drive strengths |Ω| over which three roots are looked for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaRange<T> {
    pub min: T,
    pub max: T,
}

impl<T: Real> OmegaRange<T> {
    /// [1e-4, 1e4]·κ.
    pub fn default_for(params: &SystemParams<T>) -> Self {
        OmegaRange { min: params.kappa * T::lit(1e-4), max: params.kappa * T::lit(1e4) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig<T> {
    pub omega: OmegaRange<T>,
    /// Log-spaced Δ_d probes between 1e-7·s(0) and s(0).
    pub detuning_points: usize,
    /// Relative accuracy of the refined edges.
    pub rel_tol: T,
}

impl<T: Real> WindowConfig<T> {
    pub fn default_for(params: &SystemParams<T>) -> Self {
        WindowConfig { omega: OmegaRange::default_for(params), detuning_points: 400, rel_tol: T::lit(1e-3) }
    }
}

/// A drive strength in `range` giving three roots at the detuning in `params`,
/// if one exists. The candidate sits between the local maximum and minimum of
/// h and is confirmed by [`photon_number_roots`].
pub fn three_root_drive<T: Real>(params: &SystemParams<T>, range: &OmegaRange<T>) -> Result<Option<T>> {
    if params.g == T::zero() {
        return Ok(None);
    }
    let (lo, _) = root_bracket(params, range.min * range.min);
    let hi = range.max * range.max / (params.kappa * params.kappa);
    let crit = turning_points(params, lo, hi);
    let phase = if norm_sqr(params.omega) > T::zero() {
        params.omega / modulus(params.omega)
    } else {
        real(T::one())
    };
    for pair in crit.windows(2) {
        let (h_max, h_min) = (drive_response(params, pair[0]), drive_response(params, pair[1]));
        if !(h_max > h_min) {
            continue;
        }
        let lo_sq = h_min.max(range.min * range.min);
        let hi_sq = h_max.min(range.max * range.max);
        if !(hi_sq > lo_sq) {
            continue;
        }
        let omega = ((lo_sq + hi_sq) * T::lit(0.5)).sqrt();
        let probe = params.with_drive(phase * omega);
        if photon_number_roots(&probe)?.len() >= 3 {
            return Ok(Some(omega));
        }
    }
    Ok(None)
}

/// Interval of Δ_d (the value in `params` is ignored) in which some drive
/// strength produces three roots.
pub fn bistability_window<T: Real>(
    params: &SystemParams<T>,
    config: &WindowConfig<T>,
    method: WindowMethod,
) -> Result<BistabilityWindow<T>> {
    let bounds = match method {
        WindowMethod::Sweep => sweep_window(params, config)?,
        WindowMethod::Formula => formula_window(params),
    };
    Ok(BistabilityWindow { bounds, method })
}

fn sweep_window<T: Real>(params: &SystemParams<T>, config: &WindowConfig<T>) -> Result<Option<(T, T)>> {
    let s0 = frequency_pull(params, T::zero());
    if s0 == T::zero() {
        return Ok(None);
    }
    let bistable = |t: T| -> Result<bool> {
        Ok(three_root_drive(&params.with_detuning(s0 * t), &config.omega)?.is_some())
    };
    let ts = logspace(T::lit(1e-7), T::one(), config.detuning_points.max(2))?;
    let flags = ts.par_iter().map(|&t| bistable(t)).collect::<Result<Vec<bool>>>()?;
    let (Some(first), Some(last)) = (flags.iter().position(|&b| b), flags.iter().rposition(|&b| b)) else {
        return Ok(None);
    };

    // Bisect in log t between a non-bistable and a bistable probe.
    let refine = |mut outside: T, mut inside: T| -> Result<T> {
        while (outside.ln() - inside.ln()).abs() > config.rel_tol {
            let mid = (outside.ln() * T::lit(0.5) + inside.ln() * T::lit(0.5)).exp();
            if bistable(mid)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(inside)
    };
    let t_lo = if first == 0 { ts[0] } else { refine(ts[first - 1], ts[first])? };
    let t_hi = if last + 1 == ts.len() { ts[last] } else { refine(ts[last + 1], ts[last])? };
    let (a, b) = (s0 * t_lo, s0 * t_hi);
    Ok(Some(if a < b { (a, b) } else { (b, a) }))
}

/// Δ_±(x) = σ_z(|s(x)| − β) ± sqrt(β² − κ²) with β = 2g⁴x/E³(x), defined where β ≥ κ.
pub fn window_edges_at<T: Real>(params: &SystemParams<T>, x: T) -> Option<(T, T)> {
    let e = energy_unchecked(params, x);
    let g2 = params.g * params.g;
    let beta = T::lit(2.0) * g2 * g2 * x / (e * e * e);
    if beta < params.kappa {
        return None;
    }
    let root = (beta * beta - params.kappa * params.kappa).sqrt();
    let centre = params.sigma_z() * (g2 / e - beta);
    Some((centre - root, centre + root))
}

fn formula_window<T: Real>(params: &SystemParams<T>) -> Option<(T, T)> {
    if params.g == T::zero() {
        return None;
    }
    // β(x) peaks where E² = 6g²x.
    let g2 = params.g * params.g;
    let m = params.qubit.excitation::<T>();
    let x_peak = (params.delta * params.delta + T::lit(4.0) * g2 * m) / (T::lit(2.0) * g2);
    window_edges_at(params, x_peak)?;
    let grid = logspace(x_peak * T::lit(1e-14), x_peak * T::lit(1e14), 8001).expect("positive");
    let big = T::lit(f64::MAX);
    let lower = |x: T| window_edges_at(params, x).map_or(big, |e| e.0);
    let upper = |x: T| window_edges_at(params, x).map_or(big, |e| -e.1);
    let polish = |f: &dyn Fn(T) -> T| -> T {
        let (i, _) = grid
            .iter()
            .enumerate()
            .map(|(i, &x)| (i, f(x)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .expect("non-empty grid");
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        golden_min(f, a, b).1
    };
    Some((polish(&lower), -polish(&upper)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub omega_abs: T,
    pub roots: Vec<SteadyStateRoot<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisSweep<T> {
    pub points: Vec<SweepPoint<T>>,
    /// |A_s| followed while increasing |Ω|.
    pub up: Vec<T>,
    /// |A_s| followed while decreasing |Ω|.
    pub down: Vec<T>,
    pub n_up: T,
    pub warnings: Vec<String>,
}

pub const DEFAULT_JUMP_FACTOR: f64 = 4.0;

/// Roots over a monotone grid of drive strengths (phase taken from
/// `params.omega`), plus up- and down-sweep curves selected by continuity.
pub fn hysteresis_sweep<T: Real>(
    params: &SystemParams<T>,
    omega_grid: &[T],
    jump_factor: T,
) -> Result<HysteresisSweep<T>> {
    if omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("omega_grid", "must be strictly increasing"));
    }
    if omega_grid.first().is_some_and(|&w| w < T::zero()) {
        return Err(Error::param("omega_grid", "drive strengths must be non-negative"));
    }
    let phase = if norm_sqr(params.omega) > T::zero() { params.omega / modulus(params.omega) } else { cis(T::zero()) };
    let points = omega_grid
        .par_iter()
        .map(|&w| Ok(SweepPoint { omega_abs: w, roots: steady_states(&params.with_drive(phase * w))? }))
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let mut follow = |order: &mut dyn Iterator<Item = usize>, label: &str, start_low: bool| -> Vec<T> {
        let mut out = vec![T::zero(); points.len()];
        let mut prev: Option<T> = None;
        for i in order {
            let stable = points[i].roots.iter().filter(|r| r.stable).map(|r| r.n_bar);
            let pick = match prev {
                None if start_low => stable.fold(None, |m: Option<T>, x| Some(m.map_or(x, |m| m.min(x)))),
                None => stable.fold(None, |m: Option<T>, x| Some(m.map_or(x, |m| m.max(x)))),
                Some(p) => stable.fold(None, |m: Option<T>, x| match m {
                    Some(m) if (m - p).abs() <= (x - p).abs() => Some(m),
                    _ => Some(x),
                }),
            };
            let Some(n) = pick else { continue };
            if let Some(p) = prev {
                let (a, b) = (n.max(p), n.min(p));
                if b > T::zero() && a / b > jump_factor {
                    warnings.push(format!(
                        "{label}-sweep: branch jump at |omega| = {:e} (n_bar {:e} -> {:e})",
                        points[i].omega_abs.to_f64_lossy(),
                        p.to_f64_lossy(),
                        n.to_f64_lossy()
                    ));
                }
            }
            out[i] = n.sqrt();
            prev = Some(n);
        }
        out
    };
    let up = follow(&mut (0..points.len()), "up", true);
    let down = follow(&mut (0..points.len()).rev(), "down", false);
    Ok(HysteresisSweep { points, up, down, n_up: upper_bound_photons(params)?, warnings })
}
