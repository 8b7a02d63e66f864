//! Linearized quantum fluctuations about a stable mean-field root.
//!
//! Writing a = A_s + A_f and keeping terms linear in A_f gives
//!
//! ```text
//! dA_f/dt = −(κ + iΔ̃_d)A_f − iα A_f† − sqrt(2κ) A_in
//! ```
//!
//! whose Fourier solution (kernel e^{+iωt}) is
//! A_f(ω) = c_in(ω)A_in(ω) + c_conj(ω)A_in†(ω). With vacuum input only the
//! ⟨A_in A_in†⟩ contraction survives, so
//!
//! ```text
//! ⟨A_f†(t)A_f(t+τ)⟩ = (1/2π) ∫ e^{iωτ} |c_conj(ω)|² dω
//! ⟨A_f(t)A_f(t+τ)⟩  = (1/2π) ∫ e^{−iωτ} c_in(ω) c_conj(−ω) dω
//! ```
//!
//! The equal-time values are computed by adaptive quadrature of these
//! integrals. Their τ dependence is then carried by the drift matrix itself:
//! for a linear system the two-time correlators obey the same equations as
//! the fluctuation operators, and the 2×2 drift exponential has a closed form.
//! [`correlators_by_quadrature`] evaluates the frequency integrals at
//! arbitrary τ directly and is kept as a cross-check.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::model::SystemParams;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::scalar::{cexp, cis, csqrt, imag, modulus, norm_sqr, real, Real};
use crate::steady_state::{steady_states, Branch, Drift, SteadyStateRoot};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedCoefficients<T> {
    pub delta_tilde: T,
    pub alpha: Complex<T>,
    pub delta_omega: T,
    pub a_s: Complex<T>,
    pub kappa: T,
}

impl<T: Real> LinearizedCoefficients<T> {
    /// κ² + Δ̃_d² − |α|².
    pub fn stability_margin(&self) -> T {
        self.kappa * self.kappa + self.delta_tilde * self.delta_tilde - norm_sqr(self.alpha)
    }

    /// Closed-form ⟨A_f†A_f⟩ = |α|² / (2(κ² + Δ̃_d² − |α|²)).
    pub fn occupation(&self) -> T {
        norm_sqr(self.alpha) / (T::lit(2.0) * self.stability_margin())
    }

    fn scale(&self) -> T {
        self.kappa + self.delta_tilde.abs() + modulus(self.alpha)
    }
}

pub fn linearize<T: Real>(root: &SteadyStateRoot<T>, params: &SystemParams<T>) -> Result<LinearizedCoefficients<T>> {
    let drift = Drift::at(params, root.a_s);
    if !root.stable || !drift.is_stable() {
        return Err(Error::UnstableRoot {
            n_bar: root.n_bar.to_f64_lossy(),
            margin: drift.stability_margin().to_f64_lossy(),
        });
    }
    Ok(LinearizedCoefficients {
        delta_tilde: drift.delta_tilde,
        alpha: drift.alpha,
        delta_omega: drift.delta_omega,
        a_s: root.a_s,
        kappa: params.kappa,
    })
}

fn denominator<T: Real>(c: &LinearizedCoefficients<T>, omega: T) -> Complex<T> {
    let z = Complex::new(c.kappa, omega);
    z * z + real(c.delta_tilde * c.delta_tilde - norm_sqr(c.alpha))
}

/// (c_in(ω), c_conj(ω)).
pub fn fluctuation_transfer<T: Real>(c: &LinearizedCoefficients<T>, omega: T) -> (Complex<T>, Complex<T>) {
    let d = denominator(c, omega);
    assert!(norm_sqr(d) > T::zero(), "d(omega) vanished on the real axis; coefficients are not stable");
    let k = imag((T::lit(2.0) * c.kappa).sqrt());
    let c_in = k * Complex::new(c.delta_tilde - omega, c.kappa) / d;
    let c_conj = k * c.alpha / d;
    (c_in, c_conj)
}

/// Zeros of d(ω): iκ ± sqrt(Δ̃_d² − |α|²).
pub fn poles<T: Real>(c: &LinearizedCoefficients<T>) -> [Complex<T>; 2] {
    let s = csqrt(real(c.delta_tilde * c.delta_tilde - norm_sqr(c.alpha)));
    let centre = imag(c.kappa);
    [centre + s, centre - s]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSet<T> {
    pub n_f: T,
    pub tau: Vec<T>,
    /// ⟨A_f†(t)A_f(t+τ)⟩.
    pub normal: Vec<Complex<T>>,
    /// ⟨A_f(t)A_f(t+τ)⟩.
    pub anomalous: Vec<Complex<T>>,
    /// ⟨A_f(t+τ)A_f(t)⟩, the anomalous correlator at −τ.
    pub anomalous_rev: Vec<Complex<T>>,
}

const TAIL_REL_TOL: f64 = 1e-10;

fn quadrature_config<T: Real>() -> QuadratureConfig<T> {
    QuadratureConfig { abs_tol: T::zero(), rel_tol: T::lit(1e-12).max(T::EPS * T::lit(64.0)), max_intervals: 20_000 }
}

/// Equal-time (⟨A_f†A_f⟩, ⟨A_f A_f⟩) from the frequency integrals. The cutoff
/// W is doubled until the analytic ω⁻⁴ tail bound drops below 1e-10 of the
/// integral.
pub fn equal_time_moments<T: Real>(c: &LinearizedCoefficients<T>) -> Result<(T, Complex<T>)> {
    let zero = Complex::new(T::zero(), T::zero());
    if norm_sqr(c.alpha) == T::zero() {
        return Ok((T::zero(), zero));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let scale = c.scale();
    let cfg = quadrature_config();
    let mut w = scale * T::lit(64.0);
    loop {
        let normal = integrate(
            |x| {
                let (_, cc) = fluctuation_transfer(c, x);
                real(norm_sqr(cc))
            },
            -w,
            w,
            &cfg,
        )?;
        let anomalous = integrate(
            |x| {
                let (ci, _) = fluctuation_transfer(c, x);
                let (_, cc) = fluctuation_transfer(c, -x);
                ci * cc
            },
            -w,
            w,
            &cfg,
        )?;
        let n_f = normal.value.re / two_pi;
        let m = anomalous.value / two_pi;
        // |c_conj|² ≤ 2κ|α|²/(ω² − r)² and |c_in(ω)c_conj(−ω)| has the same
        // decay once the odd ω⁻³ part cancels between ±ω.
        let w3 = w * w * w;
        let tail = T::lit(4.0) * T::lit(2.0) * c.kappa * modulus(c.alpha) * (modulus(c.alpha) + scale)
            / (T::lit(3.0) * w3 * two_pi);
        if tail <= T::lit(TAIL_REL_TOL) * n_f.max(modulus(m)) || w > scale * T::lit(1e9) {
            return Ok((n_f, m));
        }
        w = w * T::lit(2.0);
    }
}

/// e^{Mτ} for the drift M = −κ + K, K = [[−iΔ̃, −iα], [iα*, iΔ̃]], using K² = (|α|² − Δ̃²)·1.
fn drift_propagator<T: Real>(c: &LinearizedCoefficients<T>, tau: T) -> [[Complex<T>; 2]; 2] {
    let s = csqrt(real(norm_sqr(c.alpha) - c.delta_tilde * c.delta_tilde));
    let st = s * tau;
    let decay = |x: Complex<T>| cexp(x - real(c.kappa * tau));
    let half = T::lit(0.5);
    let cosh = (decay(st) + decay(-st)) * half;
    let sinh_over_s = if modulus(st) < T::lit(1e-4) {
        real(tau) * (real(T::one()) + st * st / T::lit(6.0)) * decay(real(T::zero()))
    } else {
        (decay(st) - decay(-st)) * half / s
    };
    let i = imag(T::one());
    [
        [cosh - i * sinh_over_s * c.delta_tilde, -i * sinh_over_s * c.alpha],
        [i * sinh_over_s * c.alpha.conj(), cosh + i * sinh_over_s * c.delta_tilde],
    ]
}

/// Correlators on `tau_grid` (any sign) from the quadrature equal-time values
/// propagated with the drift.
pub fn stationary_correlators<T: Real>(c: &LinearizedCoefficients<T>, tau_grid: &[T]) -> Result<CorrelationSet<T>> {
    if tau_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("tau_grid", "must be finite"));
    }
    let (n_f, m) = equal_time_moments(c)?;
    // Rows of C(0) = ⟨v_i v_j⟩ for v = (A_f, A_f†).
    let c0 = [[m, real(n_f + T::one())], [real(n_f), m.conj()]];
    let mut normal = Vec::with_capacity(tau_grid.len());
    let mut anomalous = Vec::with_capacity(tau_grid.len());
    let mut anomalous_rev = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        // C(τ) = C(0)·e^{Mᵀτ}, so C(τ)_ij = Σ_k C(0)_ik e^{Mτ}_jk.
        let p = drift_propagator(c, tau.abs());
        let at = |i: usize, j: usize| c0[i][0] * p[j][0] + c0[i][1] * p[j][1];
        let (nrm, anom, rev) = (at(1, 0), at(0, 0), at(1, 1).conj());
        if tau < T::zero() {
            normal.push(nrm.conj());
            anomalous.push(rev);
            anomalous_rev.push(anom);
        } else {
            normal.push(nrm);
            anomalous.push(anom);
            anomalous_rev.push(rev);
        }
    }
    Ok(CorrelationSet { n_f, tau: tau_grid.to_vec(), normal, anomalous, anomalous_rev })
}

/// (⟨A_f†(t)A_f(t+τ)⟩, ⟨A_f(t)A_f(t+τ)⟩) by direct quadrature of the frequency
/// integrals over [−W, W]. Slow for τ ≫ 1/κ.
pub fn correlators_by_quadrature<T: Real>(
    c: &LinearizedCoefficients<T>,
    tau: T,
    w: T,
    config: &QuadratureConfig<T>,
) -> Result<(Complex<T>, Complex<T>)> {
    let two_pi = T::lit(2.0) * T::PI();
    let normal = integrate(
        |x| {
            let (_, cc) = fluctuation_transfer(c, x);
            cis(x * tau) * norm_sqr(cc)
        },
        -w,
        w,
        config,
    )?;
    let anomalous = integrate(
        |x| {
            let (ci, _) = fluctuation_transfer(c, x);
            let (_, cc) = fluctuation_transfer(c, -x);
            ci * cc * cis(-x * tau)
        },
        -w,
        w,
        config,
    )?;
    Ok((normal.value / two_pi, anomalous.value / two_pi))
}

/// g²(τ) from the correlators and the mean amplitude:
/// 1 + [2Re(A_s²X + |A_s|²N) + |X|² + |N|²] / (|A_s|² + n_f)²
/// with N = ⟨A_f†(t)A_f(t+τ)⟩ and X = ⟨A_f†(t)A_f†(t+τ)⟩.
pub fn g2_from_correlators<T: Real>(a_s: Complex<T>, set: &CorrelationSet<T>) -> Result<Vec<T>> {
    let n_s = norm_sqr(a_s);
    let total = n_s + set.n_f;
    if !(total > T::zero()) {
        return Err(Error::Undefined("g2 with zero mean amplitude and zero fluctuation occupation"));
    }
    let a2 = a_s * a_s;
    Ok(set
        .normal
        .iter()
        .zip(&set.anomalous_rev)
        .map(|(&n, &rev)| {
            let x = rev.conj();
            let num = T::lit(2.0) * (a2 * x + n * n_s).re + norm_sqr(x) + norm_sqr(n);
            T::one() + num / (total * total)
        })
        .collect())
}

/// g²(τ) on `tau_grid`. The intensity correlation is time ordered, so it is
/// evaluated at |τ|.
pub fn g2<T: Real>(c: &LinearizedCoefficients<T>, tau_grid: &[T]) -> Result<Vec<T>> {
    let abs: Vec<T> = tau_grid.iter().map(|t| t.abs()).collect();
    g2_from_correlators(c.a_s, &stationary_correlators(c, &abs)?)
}

/// 1001 uniform points over [0, 10/κ].
pub fn default_tau_grid<T: Real>(kappa: T) -> Vec<T> {
    linspace(T::zero(), T::lit(10.0) / kappa, 1001).expect("valid grid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanAxis {
    /// Values are Δ_d.
    Detuning,
    /// Values are |Ω|; the phase of `params.omega` is kept.
    Drive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchG2<T> {
    pub branch: Branch,
    pub n_bar: T,
    pub g2: T,
    pub n_f: T,
    pub anomalous: Complex<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow<T> {
    pub coordinate: T,
    /// One entry per stable root; empty where none exists.
    pub branches: Vec<BranchG2<T>>,
}

/// g²(0) for every stable root at each grid point.
pub fn g2_zero_scan<T: Real>(params: &SystemParams<T>, axis: ScanAxis, grid: &[T]) -> Result<Vec<ScanRow<T>>> {
    let phase = if norm_sqr(params.omega) > T::zero() {
        params.omega / modulus(params.omega)
    } else {
        real(T::one())
    };
    grid.par_iter()
        .map(|&x| {
            let p = match axis {
                ScanAxis::Detuning => params.with_detuning(x),
                ScanAxis::Drive => params.with_drive(phase * x),
            };
            let mut branches = Vec::new();
            for root in steady_states(&p)?.iter().filter(|r| r.stable) {
                let coeffs = linearize(root, &p)?;
                let set = stationary_correlators(&coeffs, &[T::zero()])?;
                let g2 = match g2_from_correlators(root.a_s, &set) {
                    Ok(v) => v[0],
                    Err(Error::Undefined(_)) => T::lit(f64::NAN),
                    Err(e) => return Err(e),
                };
                branches.push(BranchG2 { branch: root.branch, n_bar: root.n_bar, g2, n_f: set.n_f, anomalous: set.anomalous[0] });
            }
            Ok(ScanRow { coordinate: x, branches })
        })
        .collect()
}
