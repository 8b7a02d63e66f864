//! Physical parameters of the driven qubit–cavity system and the scalar
//! quantities derived from them.
//!
//! Everything here is in angular frequency (rad/s, ħ = 1). The qubit only
//! enters through the frozen sign σ_z; its decay and dephasing rates are kept
//! so that [`validate_regime`] can report on realistic inputs.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, modulus, Real};
use crate::units::{angular_to_mhz, mhz_to_angular};

/// Frozen qubit state. The qubit is never a dynamical variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QubitState {
    /// σ_z = +1.
    #[default]
    Excited,
    /// σ_z = −1.
    Ground,
}

impl QubitState {
    pub fn sigma_z<T: Real>(self) -> T {
        match self {
            QubitState::Excited => T::one(),
            QubitState::Ground => -T::one(),
        }
    }

    /// (1 + σ_z)/2, the qubit's contribution to the total excitation number.
    pub fn excitation<T: Real>(self) -> T {
        match self {
            QubitState::Excited => T::one(),
            QubitState::Ground => T::zero(),
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(QubitState::Excited),
            -1 => Ok(QubitState::Ground),
            other => Err(Error::param("sigma_z", format!("must be +1 or -1, got {other}"))),
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            QubitState::Excited => 1,
            QubitState::Ground => -1,
        }
    }
}

/// Parameter set of the dispersive circuit-QED model, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    /// Qubit–cavity coupling g.
    pub g: T,
    /// Qubit–cavity detuning Δ = ω₀ − ω_q.
    pub delta: T,
    /// Cavity amplitude decay rate κ.
    pub kappa: T,
    /// Complex drive amplitude Ω.
    pub omega: Complex<T>,
    /// Drive–cavity detuning Δ_d = ω₀ − ω_d.
    pub delta_d: T,
    pub qubit: QubitState,
    pub gamma: T,
    pub gamma_phi: T,
}

impl<T: Real> SystemParams<T> {
    /// Undriven parameter set with Δ_d = 0, σ_z = +1 and a noiseless qubit.
    pub fn new(g: T, delta: T, kappa: T) -> Result<Self> {
        let params = SystemParams {
            g,
            delta,
            kappa,
            omega: Complex::new(T::zero(), T::zero()),
            delta_d: T::zero(),
            qubit: QubitState::Excited,
            gamma: T::zero(),
            gamma_phi: T::zero(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Same as [`SystemParams::new`] with every rate given as ν = ω/2π in MHz.
    pub fn from_mhz(g: T, delta: T, kappa: T) -> Result<Self> {
        Self::new(mhz_to_angular(g), mhz_to_angular(delta), mhz_to_angular(kappa))
    }

    pub fn with_drive(mut self, omega: Complex<T>) -> Self {
        self.omega = omega;
        self
    }

    /// Real, positive drive of the given strength.
    pub fn with_drive_strength(self, omega_abs: T) -> Self {
        self.with_drive(Complex::new(omega_abs, T::zero()))
    }

    pub fn with_detuning(mut self, delta_d: T) -> Self {
        self.delta_d = delta_d;
        self
    }

    pub fn with_qubit(mut self, qubit: QubitState) -> Self {
        self.qubit = qubit;
        self
    }

    pub fn with_qubit_rates(mut self, gamma: T, gamma_phi: T) -> Self {
        self.gamma = gamma;
        self.gamma_phi = gamma_phi;
        self
    }

    /// Checks the structural invariants. g = 0 is accepted as the decoupled
    /// (linear cavity) limit.
    pub fn validate(&self) -> Result<()> {
        let finite = |x: T| x.is_finite();
        if !(finite(self.g) && self.g >= T::zero()) {
            return Err(Error::param("g", "must be finite and non-negative"));
        }
        if !finite(self.delta) || self.delta == T::zero() {
            return Err(Error::param("delta", "must be finite and non-zero"));
        }
        if !(finite(self.kappa) && self.kappa > T::zero()) {
            return Err(Error::param("kappa", "must be finite and positive"));
        }
        if !(finite(self.omega.re) && finite(self.omega.im)) {
            return Err(Error::param("omega", "must be finite"));
        }
        if !finite(self.delta_d) {
            return Err(Error::param("delta_d", "must be finite"));
        }
        if !(self.gamma >= T::zero() && self.gamma_phi >= T::zero()) {
            return Err(Error::param("gamma", "qubit rates must be non-negative"));
        }
        Ok(())
    }

    pub fn sigma_z(&self) -> T {
        self.qubit.sigma_z()
    }

    pub fn omega_abs(&self) -> T {
        modulus(self.omega)
    }
}

/// Kerr strength χ = g⁴/Δ³ (signed, positive for Δ > 0).
pub fn kerr_strength<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if params.delta == T::zero() {
        return Err(Error::param("delta", "dispersive expansion is singular at delta = 0"));
    }
    let g2 = params.g * params.g;
    Ok(g2 * g2 / (params.delta * params.delta * params.delta))
}

/// Rescaled detuning n_c = (χ − Δ_d)/(2χ).
pub fn rescaled_detuning<T: Real>(params: &SystemParams<T>) -> Result<T> {
    let chi = kerr_strength(params)?;
    if chi == T::zero() {
        return Err(Error::param("g", "n_c is undefined for chi = 0"));
    }
    Ok((chi - params.delta_d) / (T::lit(2.0) * chi))
}

/// E(N̄) = sqrt(Δ² + 4g²[N̄ + (1 + σ_z)/2]).
pub fn excitation_energy<T: Real>(params: &SystemParams<T>, n_bar: T) -> Result<T> {
    if !(n_bar >= T::zero()) {
        return Err(Error::param("n_bar", "photon number must be non-negative"));
    }
    Ok(energy_unchecked(params, n_bar))
}

#[inline]
pub(crate) fn energy_unchecked<T: Real>(params: &SystemParams<T>, n_bar: T) -> T {
    let total = n_bar + params.qubit.excitation::<T>();
    (params.delta * params.delta + T::lit(4.0) * params.g * params.g * total).sqrt()
}

/// Mean-field frequency pull g²σ_z/E(N̄).
#[inline]
pub(crate) fn frequency_pull<T: Real>(params: &SystemParams<T>, n_bar: T) -> T {
    params.g * params.g * params.sigma_z() / energy_unchecked(params, n_bar)
}

/// Upper-bound photon number N_up = χ/κ for observing blockade.
pub fn upper_bound_photons<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if !(params.kappa > T::zero()) {
        return Err(Error::param("kappa", "must be positive"));
    }
    Ok(kerr_strength(params)? / params.kappa)
}

pub const DEFAULT_REGIME_RATIO: f64 = 0.25;

/// One link of the ordering γ, γ_φ ≪ κ ≪ g²/Δ ≪ g ≪ Δ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub relation: &'static str,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub threshold: f64,
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RegimeCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Human-readable warnings, one per failed relation.
    pub fn warnings(&self) -> Vec<String> {
        self.failures()
            .map(|c| {
                format!(
                    "regime: `{}` violated (ratio {:.4e} > {})",
                    c.relation, c.ratio, self.threshold
                )
            })
            .collect()
    }
}

/// Reports which links of the strong-dispersive bad-cavity ordering hold,
/// each "≪" being tested as `ratio <= regime_ratio`. Only warns.
pub fn validate_regime<T: Real>(params: &SystemParams<T>, regime_ratio: f64) -> Result<RegimeReport> {
    if !(regime_ratio > 0.0 && regime_ratio < 1.0) {
        return Err(Error::param("regime_ratio", "must lie in (0, 1)"));
    }
    let g = params.g.to_f64_lossy();
    let delta = params.delta.to_f64_lossy().abs();
    let kappa = params.kappa.to_f64_lossy();
    let pull = g * g / delta;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let links = [
        ("gamma << kappa", ratio(params.gamma.to_f64_lossy(), kappa)),
        ("gamma_phi << kappa", ratio(params.gamma_phi.to_f64_lossy(), kappa)),
        ("kappa << g^2/delta", ratio(kappa, pull)),
        ("g^2/delta << g", ratio(pull, g)),
        ("g << delta", ratio(g, delta)),
    ];
    Ok(RegimeReport {
        threshold: regime_ratio,
        checks: links
            .into_iter()
            .map(|(relation, ratio)| RegimeCheck { relation, ratio, pass: ratio <= regime_ratio })
            .collect(),
    })
}

fn default_sigma_z() -> i32 {
    1
}

/// Flat JSON form of a parameter set, in MHz of ν = ω/2π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub g_mhz: f64,
    pub delta_mhz: f64,
    pub kappa_mhz: f64,
    #[serde(default)]
    pub omega_mhz: f64,
    #[serde(default)]
    pub omega_phase_rad: f64,
    #[serde(default)]
    pub delta_d_mhz: f64,
    #[serde(default = "default_sigma_z")]
    pub sigma_z: i32,
    #[serde(default)]
    pub gamma_mhz: f64,
    #[serde(default)]
    pub gamma_phi_mhz: f64,
}

impl ParamsRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn to_params(&self) -> Result<SystemParams<f64>> {
        if self.omega_mhz < 0.0 {
            return Err(Error::param("omega_mhz", "drive magnitude must be non-negative"));
        }
        let params = SystemParams {
            g: mhz_to_angular(self.g_mhz),
            delta: mhz_to_angular(self.delta_mhz),
            kappa: mhz_to_angular(self.kappa_mhz),
            omega: cis(self.omega_phase_rad) * mhz_to_angular(self.omega_mhz),
            delta_d: mhz_to_angular(self.delta_d_mhz),
            qubit: QubitState::from_sign(self.sigma_z)?,
            gamma: mhz_to_angular(self.gamma_mhz),
            gamma_phi: mhz_to_angular(self.gamma_phi_mhz),
        };
        params.validate()?;
        Ok(params)
    }
}

impl From<&SystemParams<f64>> for ParamsRecord {
    fn from(p: &SystemParams<f64>) -> Self {
        ParamsRecord {
            g_mhz: angular_to_mhz(p.g),
            delta_mhz: angular_to_mhz(p.delta),
            kappa_mhz: angular_to_mhz(p.kappa),
            omega_mhz: angular_to_mhz(p.omega.norm()),
            omega_phase_rad: p.omega.arg(),
            delta_d_mhz: angular_to_mhz(p.delta_d),
            sigma_z: p.qubit.sign(),
            gamma_mhz: angular_to_mhz(p.gamma),
            gamma_phi_mhz: angular_to_mhz(p.gamma_phi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig2() -> SystemParams<f64> {
        SystemParams::from_mhz(200.0, 1000.0, 0.1).unwrap()
    }

    #[test]
    fn kerr_strength_examples() {
        // 200⁴/1000³ = 1.6 and 100⁴/1000³ = 0.1, exact in MHz.
        let chi = kerr_strength(&fig2()).unwrap();
        assert_relative_eq!(angular_to_mhz(chi), 1.6, max_relative = 1e-14);
        let p = SystemParams::from_mhz(100.0, 1000.0, 0.1).unwrap();
        assert_relative_eq!(angular_to_mhz(kerr_strength(&p).unwrap()), 0.1, max_relative = 1e-14);
        let p = SystemParams::from_mhz(0.0, 1000.0, 0.1).unwrap();
        assert_eq!(kerr_strength(&p).unwrap(), 0.0);
    }

    #[test]
    fn kerr_strength_rejects_zero_detuning() {
        let mut p = fig2();
        p.delta = 0.0;
        assert!(matches!(kerr_strength(&p), Err(Error::InvalidParameter { name: "delta", .. })));
        assert!(SystemParams::<f64>::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn rescaled_detuning_examples() {
        let p = fig2();
        let chi = kerr_strength(&p).unwrap();
        assert_eq!(rescaled_detuning(&p).unwrap(), 0.5);
        assert_eq!(rescaled_detuning(&p.with_detuning(chi)).unwrap(), 0.0);
        assert_eq!(rescaled_detuning(&p.with_detuning(-chi)).unwrap(), 1.0);
        let p0 = SystemParams::from_mhz(0.0, 1000.0, 0.1).unwrap();
        assert!(rescaled_detuning(&p0).is_err());
    }

    #[test]
    fn excitation_energy_examples() {
        let p0 = SystemParams::from_mhz(0.0, 1000.0, 0.1).unwrap();
        assert_relative_eq!(excitation_energy(&p0, 3.0).unwrap(), p0.delta, max_relative = 1e-15);
        // sqrt(1000² + 4·200²) = 1077.0329614...
        let e = excitation_energy(&fig2(), 0.0).unwrap();
        assert_relative_eq!(angular_to_mhz(e), 1_160_000f64.sqrt(), max_relative = 1e-14);
        assert!((angular_to_mhz(e) - 1077.03).abs() < 5e-3);
        assert!(excitation_energy(&fig2(), -1.0).is_err());
    }

    #[test]
    fn pull_vanishes_for_large_photon_number() {
        let p = fig2();
        let small = frequency_pull(&p, 0.0);
        let large = frequency_pull(&p, 1e12);
        assert!(large / small < 1e-3);
    }

    #[test]
    fn upper_bound_examples() {
        let n_up = upper_bound_photons(&fig2()).unwrap();
        assert_relative_eq!(n_up, 16.0, max_relative = 1e-12);
        assert_relative_eq!(n_up.sqrt(), 4.0, max_relative = 1e-12);
        let mut p = fig2();
        p.kappa = kerr_strength(&p).unwrap();
        assert_relative_eq!(upper_bound_photons(&p).unwrap(), 1.0, max_relative = 1e-15);
        let p0 = SystemParams::from_mhz(0.0, 1000.0, 0.1).unwrap();
        assert_eq!(upper_bound_photons(&p0).unwrap(), 0.0);
    }

    #[test]
    fn regime_examples() {
        let report = validate_regime(&fig2(), DEFAULT_REGIME_RATIO).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_relative_eq!(report.checks[2].ratio, 0.0025, max_relative = 1e-12);
        assert_relative_eq!(report.checks[3].ratio, 0.2, max_relative = 1e-12);
        assert_relative_eq!(report.checks[4].ratio, 0.2, max_relative = 1e-12);

        let mut p = fig2();
        p.kappa = p.g;
        let report = validate_regime(&p, DEFAULT_REGIME_RATIO).unwrap();
        let failed: Vec<_> = report.failures().map(|c| c.relation).collect();
        assert_eq!(failed, vec!["kappa << g^2/delta"]);

        let p = fig2().with_qubit_rates(fig2().kappa, 0.0);
        let report = validate_regime(&p, DEFAULT_REGIME_RATIO).unwrap();
        assert_eq!(report.failures().next().unwrap().relation, "gamma << kappa");
        assert_eq!(report.warnings().len(), 1);

        assert!(validate_regime(&fig2(), 1.5).is_err());
    }

    #[test]
    fn record_defaults_and_round_trip() {
        let rec = ParamsRecord::from_json(r#"{"g_mhz": 200, "delta_mhz": 1000, "kappa_mhz": 0.1}"#).unwrap();
        assert_eq!(rec.sigma_z, 1);
        assert_eq!(rec.omega_mhz, 0.0);
        let p = rec.to_params().unwrap();
        assert_eq!(p.qubit, QubitState::Excited);
        let back = ParamsRecord::from(&p);
        assert_relative_eq!(back.g_mhz, 200.0, max_relative = 1e-14);

        assert!(ParamsRecord::from_json(r#"{"g_mhz": 1, "delta_mhz": 1, "kappa_mhz": 1, "sigma_z": 0}"#)
            .unwrap()
            .to_params()
            .is_err());
        assert!(ParamsRecord::from_json(r#"{"g_mhz": 1}"#).is_err());
    }

    proptest! {
        #[test]
        fn kerr_is_odd_in_delta_and_quartic_in_g(g in 1.0f64..500.0, delta in 100.0f64..5000.0) {
            let p = SystemParams::from_mhz(g, delta, 0.1).unwrap();
            let mut q = p;
            q.delta = -p.delta;
            let chi = kerr_strength(&p).unwrap();
            prop_assert!((kerr_strength(&q).unwrap() + chi).abs() <= 1e-12 * chi.abs());
            let mut r = p;
            r.g = 2.0 * p.g;
            prop_assert!((kerr_strength(&r).unwrap() - 16.0 * chi).abs() <= 1e-12 * 16.0 * chi.abs());
        }

        #[test]
        fn energy_identity_and_qubit_shift(g in 0.0f64..500.0, n in 0.0f64..1e4) {
            let p = SystemParams::from_mhz(g, 1000.0, 0.1).unwrap();
            let e = excitation_energy(&p, n).unwrap();
            let lhs = e * e - p.delta * p.delta;
            let rhs = 4.0 * p.g * p.g * (n + 1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (e * e));
            let ground = p.with_qubit(QubitState::Ground);
            let shifted = excitation_energy(&ground, n + 1.0).unwrap();
            prop_assert!((shifted - e).abs() <= 1e-13 * e);
            prop_assert!(excitation_energy(&p, n + 1.0).unwrap() >= e);
        }

        #[test]
        fn derived_quantities_ignore_drive_phase(phase in -3.2f64..3.2) {
            let p = fig2().with_drive_strength(1e6);
            let q = p.with_drive(p.omega * cis(phase));
            prop_assert_eq!(kerr_strength(&p).unwrap(), kerr_strength(&q).unwrap());
            prop_assert_eq!(upper_bound_photons(&p).unwrap(), upper_bound_photons(&q).unwrap());
            prop_assert!((p.omega_abs() - q.omega_abs()).abs() <= 1e-9 * p.omega_abs());
        }
    }
}
