//! Output field for a weak monochromatic probe.
//!
//! A probe a_in(t) = ξe^{−iωt} replaces the vacuum input. In the drive frame it
//! oscillates at ω′ = ω_d − ω, so the intracavity response to it is
//! c_in(ω′)ξ, with a four-wave-mixing partner c_conj(ω′)ξ* from the A_in† term.
//! The output a_out = a_in + sqrt(2κ)a adds the coherent component
//! (2κA_s + iΩ)/sqrt(2κ) at the drive frequency.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fluctuations::{fluctuation_transfer, LinearizedCoefficients};
use crate::grid::linspace;
use crate::model::SystemParams;
use crate::scalar::{imag, real, Real};
use crate::units::mhz_to_angular;

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSpectrum<T> {
    pub omega_prime_grid: Vec<T>,
    /// Re c_in(ω′).
    pub a_r: Vec<T>,
    /// Im c_in(ω′).
    pub a_i: Vec<T>,
    /// 1 + sqrt(2κ)c_in(ω′).
    pub s_out: Vec<Complex<T>>,
    /// sqrt(2κ)c_conj(ω′).
    pub fwm: Vec<Complex<T>>,
    pub coherent_amplitude: Complex<T>,
    pub kappa: T,
}

/// 2001 points over ω′/2π ∈ [−2, 2] MHz.
pub fn default_omega_prime_grid<T: Real>() -> Vec<T> {
    let edge = mhz_to_angular(T::lit(2.0));
    linspace(-edge, edge, 2001).expect("valid grid")
}

pub fn response_spectrum<T: Real>(
    coeffs: &LinearizedCoefficients<T>,
    params: &SystemParams<T>,
    omega_prime_grid: &[T],
) -> Result<ResponseSpectrum<T>> {
    if omega_prime_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::param("omega_prime_grid", "must be finite"));
    }
    let k = (T::lit(2.0) * params.kappa).sqrt();
    let n = omega_prime_grid.len();
    let mut spectrum = ResponseSpectrum {
        omega_prime_grid: omega_prime_grid.to_vec(),
        a_r: Vec::with_capacity(n),
        a_i: Vec::with_capacity(n),
        s_out: Vec::with_capacity(n),
        fwm: Vec::with_capacity(n),
        coherent_amplitude: (coeffs.a_s * (T::lit(2.0) * params.kappa) + imag(T::one()) * params.omega) / k,
        kappa: params.kappa,
    };
    for &w in omega_prime_grid {
        let (c_in, c_conj) = fluctuation_transfer(coeffs, w);
        spectrum.a_r.push(c_in.re);
        spectrum.a_i.push(c_in.im);
        spectrum.s_out.push(real(T::one()) + c_in * k);
        spectrum.fwm.push(c_conj * k);
    }
    Ok(spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lineshape {
    Lorentzian,
    Window,
}

impl Lineshape {
    pub fn as_str(self) -> &'static str {
        match self {
            Lineshape::Lorentzian => "lorentzian",
            Lineshape::Window => "window",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineshapeReport<T> {
    pub shape: Lineshape,
    /// ω′ of each local extremum of A_R.
    pub extrema: Vec<T>,
    pub warnings: Vec<String>,
}

/// One extremum of A_R means a single absorption line; two or more means the
/// line is split by a transparency window.
pub fn classify_lineshape<T: Real>(spectrum: &ResponseSpectrum<T>) -> Result<LineshapeReport<T>> {
    let grid = &spectrum.omega_prime_grid;
    let y = &spectrum.a_r;
    if grid.len() < 3 {
        return Err(Error::param("omega_prime_grid", "needs at least 3 points"));
    }
    let span = grid[grid.len() - 1] - grid[0];
    if span < T::lit(20.0) * spectrum.kappa {
        return Err(Error::param("omega_prime_grid", "must span at least 20 linewidths"));
    }
    let peak = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = peak * T::lit(1e-12);
    // Sign of each step, with steps below the noise floor inheriting the last sign.
    let mut extrema_idx = Vec::new();
    let mut last_sign = 0i8;
    for i in 0..y.len() - 1 {
        let dy = y[i + 1] - y[i];
        let sign = if dy > floor {
            1
        } else if dy < -floor {
            -1
        } else {
            0
        };
        if sign == 0 {
            continue;
        }
        if last_sign != 0 && sign != last_sign {
            extrema_idx.push(i);
        }
        last_sign = sign;
    }
    let mut warnings = Vec::new();
    if extrema_idx.windows(2).any(|w| w[1] - w[0] <= 2) {
        warnings.push("grid too coarse: extrema of A_R lie within 2 grid cells".to_string());
    }
    let shape = if extrema_idx.len() >= 2 { Lineshape::Window } else { Lineshape::Lorentzian };
    Ok(LineshapeReport { shape, extrema: extrema_idx.into_iter().map(|i| grid[i]).collect(), warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::linearize;
    use crate::scalar::cis;
    use crate::steady_state::steady_states;

    fn coeffs_for(params: &SystemParams<f64>) -> LinearizedCoefficients<f64> {
        let roots = steady_states(params).unwrap();
        linearize(roots.iter().find(|r| r.stable).unwrap(), params).unwrap()
    }

    fn fig4(delta_d_mhz: f64) -> SystemParams<f64> {
        SystemParams::from_mhz(100.0, 1000.0, 0.1)
            .unwrap()
            .with_detuning(mhz_to_angular(delta_d_mhz))
            .with_drive_strength(mhz_to_angular(0.1))
    }

    #[test]
    fn linear_cavity_response() {
        let p = SystemParams::from_mhz(0.0, 1000.0, 0.1)
            .unwrap()
            .with_detuning(mhz_to_angular(0.05))
            .with_drive(cis(0.3) * mhz_to_angular(0.02));
        let c = coeffs_for(&p);
        let grid = default_omega_prime_grid::<f64>();
        let s = response_spectrum(&c, &p, &grid).unwrap();
        for (k, &w) in grid.iter().enumerate() {
            let expect = Complex::new(1.0, 0.0) - 2.0 * p.kappa / Complex::new(p.kappa, w + p.delta_d);
            assert!((s.s_out[k] - expect).norm() < 1e-12);
            assert_eq!(s.fwm[k], Complex::new(0.0, 0.0));
        }
        // A_s = −iΩ/(κ + iΔ_d) leaves the reflected coherent field on the unit circle times Ω/sqrt(2κ).
        let r = s.coherent_amplitude * (2.0 * p.kappa).sqrt() / (Complex::<f64>::i() * p.omega);
        assert!((r.norm() - 1.0).abs() < 1e-12);
        assert_eq!(classify_lineshape(&s).unwrap().shape, Lineshape::Lorentzian);
    }

    #[test]
    fn off_resonant_transparency_and_fwm_magnitude() {
        let p = fig4(9.74);
        let c = coeffs_for(&p);
        let far = [-1e12, 1e12];
        let s = response_spectrum(&c, &p, &far).unwrap();
        for k in 0..2 {
            assert!((s.s_out[k] - 1.0).norm() < 1e-4);
            assert!(s.fwm[k].norm() < 1e-8);
        }
        let grid = default_omega_prime_grid::<f64>();
        let s = response_spectrum(&c, &p, &grid).unwrap();
        for (k, &w) in grid.iter().enumerate() {
            let d = Complex::new(c.kappa, w).powi(2) + (c.delta_tilde.powi(2) - c.alpha.norm_sqr());
            // |c_conj| = sqrt(2κ)|α|/|d| and the output carries one more sqrt(2κ).
            let expect = 2.0 * c.kappa * c.alpha.norm() / d.norm();
            assert!((s.fwm[k].norm() / expect - 1.0).abs() < 1e-9, "{}", s.fwm[k].norm() / expect - 1.0);
        }
    }

    #[test]
    fn fwm_vanishes_quadratically_with_amplitude() {
        let base = fig4(9.96);
        let at = |w: f64| {
            let p = base.with_drive_strength(w);
            let c = coeffs_for(&p);
            let s = response_spectrum(&c, &p, &[0.0]).unwrap();
            (s.fwm[0].norm(), c.a_s.norm())
        };
        let (f1, a1) = at(1e3);
        let (f2, a2) = at(1e2);
        let ratio = (f1 / f2) / (a1 / a2).powi(2);
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn kramers_kronig_consistency() {
        // c_in is analytic in the lower half-plane: Re c = −(1/π) PV∫ Im c(ω′)/(ω′ − ω) dω′.
        let c = LinearizedCoefficients {
            delta_tilde: 2.0,
            alpha: Complex::new(0.8, 0.4),
            delta_omega: 0.0,
            a_s: Complex::new(0.5, 0.0),
            kappa: 1.0,
        };
        let h = 0.01;
        let n = 400_000;
        let nodes: Vec<f64> = (0..=n).map(|k| -2000.0 + h * k as f64).collect();
        let im: Vec<f64> = nodes.iter().map(|&w| fluctuation_transfer(&c, w).0.im).collect();
        let peak = (-500..=500).map(|k| fluctuation_transfer(&c, k as f64 * 0.02).0.re.abs()).fold(0.0, f64::max);
        for k in -20..=20 {
            // Midpoints keep the principal-value sum symmetric about the pole.
            let w = k as f64 * 0.25 + h / 2.0;
            let pv: f64 = nodes.iter().zip(&im).map(|(&x, &y)| y / (x - w)).sum::<f64>() * h;
            let re = fluctuation_transfer(&c, w).0.re;
            assert!((re + pv / std::f64::consts::PI).abs() < 1e-2 * peak, "w {w}: {re} vs {}", -pv / std::f64::consts::PI);
        }
    }

    #[test]
    fn transparency_window_versus_single_line() {
        let grid = default_omega_prime_grid::<f64>();
        let p = fig4(9.74);
        let window = classify_lineshape(&response_spectrum(&coeffs_for(&p), &p, &grid).unwrap()).unwrap();
        assert_eq!(window.shape, Lineshape::Window);
        assert!(window.warnings.is_empty());
        let p = fig4(9.96);
        let single = classify_lineshape(&response_spectrum(&coeffs_for(&p), &p, &grid).unwrap()).unwrap();
        assert_eq!(single.shape, Lineshape::Lorentzian);
        assert_eq!(single.extrema.len(), 1);
    }

    #[test]
    fn rejects_narrow_grid() {
        let p = fig4(9.96);
        let c = coeffs_for(&p);
        let s = response_spectrum(&c, &p, &[-0.1, 0.0, 0.1]).unwrap();
        assert!(classify_lineshape(&s).is_err());
    }
}
