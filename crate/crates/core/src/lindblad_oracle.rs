//! Exact truncated master equation for the driven cavity, used to check the
//! linearized theory.
//!
//! In the frame rotating at the drive,
//!
//! ```text
//! dρ/dt = −i[H, ρ] + 2κ(aρa† − ½{a†a, ρ}),   H = Σ_n h_n |n⟩⟨n| + Ω a† + Ω* a
//! ```
//!
//! with σ_z frozen. The full variant keeps h_n = Δ_d n − (σ_z/2)E(n); the Kerr
//! variant keeps h_n = Δ′_d n + σ_zχ n(n − 1), which equals σ_zχ(n − n_c)² up
//! to a constant, where Δ′_d = Δ_d − (σ_z/2)[E(1) − E(0)] is the detuning from
//! the dressed 0→1 line so both variants share that transition.
//!
//! The density matrix is vectorized as ρ_mn ↦ m·dim + n. Every term of the
//! generator couples ρ_mn only to neighbours at offsets 0, ±1, ±dim and
//! dim + 1, so the steady-state system is banded and solved by banded LU.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::model::{energy_unchecked, kerr_strength, SystemParams};
use crate::scalar::{modulus, norm_sqr, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Kerr,
    FullDispersive,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Kerr => "kerr",
            Variant::FullDispersive => "full_dispersive",
        }
    }

    /// Label used in CSV `source` columns.
    pub fn source(self) -> &'static str {
        match self {
            Variant::Kerr => "oracle_kerr",
            Variant::FullDispersive => "oracle_full",
        }
    }
}

pub const DEFAULT_DIM: usize = 30;
pub const MAX_DIM: usize = 120;
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperatorSet<T: Real> {
    pub dim: usize,
    pub variant: Variant,
    pub a: DMatrix<Complex<T>>,
    pub hamiltonian: DMatrix<Complex<T>>,
    pub kappa: T,
    diag: Vec<T>,
    omega: Complex<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    pub rho: DMatrix<Complex<T>>,
}

/// (σ_z/2)[E(1) − E(0)], the offset of the dressed 0→1 line from the bare
/// cavity in the drive frame.
pub fn dressed_line_offset<T: Real>(params: &SystemParams<T>) -> T {
    params.sigma_z() * T::lit(0.5) * (energy_unchecked(params, T::one()) - energy_unchecked(params, T::zero()))
}

pub fn build_liouvillian<T: Real>(params: &SystemParams<T>, variant: Variant, dim: usize) -> Result<FockOperatorSet<T>> {
    if dim < 3 {
        return Err(Error::param("dim", format!("oracle needs dim >= 3, got {dim}")));
    }
    params.validate()?;
    let sigma = params.sigma_z();
    let diag: Vec<T> = match variant {
        Variant::FullDispersive => {
            let e0 = energy_unchecked(params, T::zero());
            (0..dim)
                .map(|n| {
                    let x = T::count(n);
                    params.delta_d * x - sigma * T::lit(0.5) * (energy_unchecked(params, x) - e0)
                })
                .collect()
        }
        Variant::Kerr => {
            let chi = kerr_strength(params)?;
            let detuning = params.delta_d - dressed_line_offset(params);
            (0..dim)
                .map(|n| {
                    let x = T::count(n);
                    detuning * x + sigma * chi * x * (x - T::one())
                })
                .collect()
        }
    };
    let zero = Complex::new(T::zero(), T::zero());
    let mut a = DMatrix::from_element(dim, dim, zero);
    let mut hamiltonian = DMatrix::from_element(dim, dim, zero);
    for n in 0..dim {
        hamiltonian[(n, n)] = Complex::new(diag[n], T::zero());
        if n + 1 < dim {
            let amp = T::count(n + 1).sqrt();
            a[(n, n + 1)] = Complex::new(amp, T::zero());
            hamiltonian[(n + 1, n)] = params.omega * amp;
            hamiltonian[(n, n + 1)] = params.omega.conj() * amp;
        }
    }
    Ok(FockOperatorSet { dim, variant, a, hamiltonian, kappa: params.kappa, diag, omega: params.omega })
}

impl<T: Real> FockOperatorSet<T> {
    /// Coefficients of d(ρ_mn)/dt on the neighbouring elements ρ_pq.
    fn couplings(&self, m: usize, n: usize) -> impl Iterator<Item = (usize, usize, Complex<T>)> {
        let d = self.dim;
        let k = self.kappa;
        let (w, wc) = (self.omega, self.omega.conj());
        let i = Complex::new(T::zero(), T::one());
        let sq = |x: usize| T::count(x).sqrt();
        let terms = [
            Some((m, n, -i * (self.diag[m] - self.diag[n]) - Complex::new(k * T::count(m + n), T::zero()))),
            (m > 0).then(|| (m - 1, n, -i * w * sq(m))),
            (m + 1 < d).then(|| (m + 1, n, -i * wc * sq(m + 1))),
            (n > 0).then(|| (m, n - 1, i * wc * sq(n))),
            (n + 1 < d).then(|| (m, n + 1, i * w * sq(n + 1))),
            (m + 1 < d && n + 1 < d)
                .then(|| (m + 1, n + 1, Complex::new(T::lit(2.0) * k * sq((m + 1) * (n + 1)), T::zero()))),
        ];
        terms.into_iter().flatten()
    }

    /// `L[ρ]`.
    pub fn apply(&self, rho: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |m, n| {
            self.couplings(m, n).fold(Complex::new(T::zero(), T::zero()), |acc, (p, q, c)| acc + c * rho[(p, q)])
        })
    }

    /// Dense dim²×dim² generator on vec(ρ)_{m·dim+n} = ρ_mn.
    pub fn liouvillian_dense(&self) -> DMatrix<Complex<T>> {
        let d = self.dim;
        let mut l = DMatrix::from_element(d * d, d * d, Complex::new(T::zero(), T::zero()));
        for m in 0..d {
            for n in 0..d {
                for (p, q, c) in self.couplings(m, n) {
                    l[(m * d + n, p * d + q)] += c;
                }
            }
        }
        l
    }

    /// Maximum absolute row sum of the generator.
    pub fn norm(&self) -> T {
        let d = self.dim;
        let mut best = T::zero();
        for m in 0..d {
            for n in 0..d {
                best = best.max(self.couplings(m, n).fold(T::zero(), |acc, (_, _, c)| acc + modulus(c)));
            }
        }
        best
    }
}

/// Band storage with room for pivoting fill-in: row i keeps columns
/// [i − kl, i + kl + ku].
struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Banded<T> {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        Banded { n, kl, ku, data: vec![Complex::new(T::zero(), T::zero()); n * (2 * kl + ku + 1)] }
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        (j + self.kl >= i && j <= i + self.kl + self.ku).then(|| i * (2 * self.kl + self.ku + 1) + j + self.kl - i)
    }

    fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.slot(i, j).map_or(Complex::new(T::zero(), T::zero()), |s| self.data[s])
    }

    fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    /// Gaussian elimination with partial pivoting. On a vanishing pivot returns
    /// its column.
    fn solve(mut self, mut rhs: Vec<Complex<T>>, tiny: T) -> std::result::Result<Vec<Complex<T>>, usize> {
        let n = self.n;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let p = (k..=last)
                .max_by(|&x, &y| norm_sqr(self.get(x, k)).partial_cmp(&norm_sqr(self.get(y, k))).expect("finite"))
                .expect("non-empty");
            if modulus(self.get(p, k)) <= tiny {
                return Err(k);
            }
            let right = (k + reach).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (x, y) = (self.get(k, j), self.get(p, j));
                    self.set(k, j, y);
                    self.set(p, j, x);
                }
                rhs.swap(k, p);
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let l = self.get(i, k) / pivot;
                if norm_sqr(l) == T::zero() {
                    continue;
                }
                self.set(i, k, Complex::new(T::zero(), T::zero()));
                for j in k + 1..=right {
                    let v = self.get(i, j) - l * self.get(k, j);
                    self.set(i, j, v);
                }
                let r = rhs[k];
                rhs[i] -= l * r;
            }
        }
        let mut x = vec![Complex::new(T::zero(), T::zero()); n];
        for k in (0..n).rev() {
            let right = (k + reach).min(n - 1);
            let s = (k + 1..=right).fold(rhs[k], |acc, j| acc - self.get(k, j) * x[j]);
            x[k] = s / self.get(k, k);
        }
        Ok(x)
    }
}

impl<T: Real> DensityMatrix<T> {
    pub fn trace(&self) -> Complex<T> {
        self.rho.trace()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> T {
        let d = self.rho.nrows();
        let mut worst = T::zero();
        for i in 0..d {
            for j in 0..d {
                worst = worst.max(modulus(self.rho[(i, j)] - self.rho[(j, i)].conj()));
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        let herm = (&self.rho + self.rho.adjoint()) * Complex::new(T::lit(0.5), T::zero());
        SymmetricEigen::new(herm).eigenvalues.iter().copied().collect()
    }

    pub fn mean_photon(&self) -> T {
        number_trace(&self.rho)
    }
}

/// Re Tr(a†a·m).
fn number_trace<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    (0..m.nrows()).fold(T::zero(), |acc, n| acc + T::count(n) * m[(n, n)].re)
}

fn jump<T: Real>(ops: &FockOperatorSet<T>, rho: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    &ops.a * rho * ops.a.adjoint()
}

/// `‖L[ρ]‖` as the largest element magnitude.
pub fn residual<T: Real>(ops: &FockOperatorSet<T>, rho: &DensityMatrix<T>) -> T {
    ops.apply(&rho.rho).iter().fold(T::zero(), |m, z| m.max(modulus(*z)))
}

pub fn steady_state_dm<T: Real>(ops: &FockOperatorSet<T>) -> Result<DensityMatrix<T>> {
    let d = ops.dim;
    let n = d * d;
    let norm = ops.norm();
    let mut band = Banded::new(n, d, d + 1);
    for m in 0..d {
        for q in 0..d {
            for (p, r, c) in ops.couplings(m, q) {
                let (row, col) = (m * d + q, p * d + r);
                let v = band.get(row, col) + c;
                band.set(row, col, v);
            }
        }
    }
    // The ρ_00 equation is redundant with trace preservation; pin ρ_00 = 1 instead.
    for col in 0..=(2 * d + 1).min(n - 1) {
        band.set(0, col, Complex::new(T::zero(), T::zero()));
    }
    band.set(0, 0, Complex::new(T::one(), T::zero()));
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); n];
    rhs[0] = Complex::new(T::one(), T::zero());

    let tiny = norm * T::EPS * T::lit(16.0);
    let x = match band.solve(rhs, tiny) {
        Ok(x) => x,
        Err(_) => return Err(degenerate(ops, norm)),
    };
    let mut rho = DMatrix::from_fn(d, d, |i, j| x[i * d + j]);
    rho = (&rho + rho.adjoint()) * Complex::new(T::lit(0.5), T::zero());
    let tr = rho.trace().re;
    rho /= Complex::new(tr, T::zero());
    let dm = DensityMatrix { rho };
    let res = residual(ops, &dm);
    let tol = T::lit(1e-10).max(T::EPS * T::lit(64.0)) * norm;
    if res > tol {
        return Err(Error::Residual { residual: res.to_f64_lossy(), tolerance: tol.to_f64_lossy() });
    }
    Ok(dm)
}

/// Null space of the dense generator, for the error report.
fn degenerate<T: Real>(ops: &FockOperatorSet<T>, norm: T) -> Error {
    let dense = ops.liouvillian_dense().map(|z| Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()));
    let svd = dense.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let cutoff = norm.to_f64_lossy() * 1e-10;
    let basis: Vec<Vec<Complex64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| v_t.row(k).iter().map(|z| z.conj()).collect())
        .collect();
    Error::DegenerateSteadyState { null_dim: basis.len(), basis }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables<T> {
    pub mean_n: T,
    pub g2_zero: T,
}

pub fn observables<T: Real>(rho: &DensityMatrix<T>, ops: &FockOperatorSet<T>) -> Result<Observables<T>> {
    let mean_n = rho.mean_photon();
    if !(mean_n > T::zero()) {
        return Err(Error::Undefined("g2(0) is undefined at zero mean photon number"));
    }
    let g2_zero = number_trace(&jump(ops, &rho.rho)) / (mean_n * mean_n);
    Ok(Observables { mean_n, g2_zero })
}

fn rk4<T: Real>(ops: &FockOperatorSet<T>, rho: &DMatrix<Complex<T>>, h: T) -> DMatrix<Complex<T>> {
    let half = Complex::new(h * T::lit(0.5), T::zero());
    let full = Complex::new(h, T::zero());
    let k1 = ops.apply(rho);
    let k2 = ops.apply(&(rho + &k1 * half));
    let k3 = ops.apply(&(rho + &k2 * half));
    let k4 = ops.apply(&(rho + &k3 * full));
    rho + (k1 + (k2 + k3) * Complex::new(T::lit(2.0), T::zero()) + k4) * Complex::new(h / T::lit(6.0), T::zero())
}

fn max_abs<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(modulus(*z)))
}

const STEP_TOL: f64 = 1e-10;
const MAX_HALVINGS: u32 = 40;

/// e^{Lτ}ρ₀ at each τ of an ascending, non-negative grid, by RK4 with
/// step-doubling error control.
pub fn propagate<T: Real>(
    ops: &FockOperatorSet<T>,
    rho0: &DMatrix<Complex<T>>,
    tau_grid: &[T],
) -> Result<Vec<DMatrix<Complex<T>>>> {
    if tau_grid.first().is_some_and(|&t| t < T::zero()) || tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("tau_grid", "must be ascending and non-negative"));
    }
    let tol = T::lit(STEP_TOL);
    let mut h = T::one() / ops.norm();
    let mut t = T::zero();
    let mut rho = rho0.clone();
    let mut out = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let mut halvings = 0u32;
        while t < tau {
            let step = h.min(tau - t);
            let coarse = rk4(ops, &rho, step);
            let half = step * T::lit(0.5);
            let fine = rk4(ops, &rk4(ops, &rho, half), half);
            let scale = max_abs(&fine).max(T::EPS);
            let err = max_abs(&(&fine - &coarse)) / scale;
            if err <= tol {
                rho = fine;
                t = if step == tau - t { tau } else { t + step };
                halvings = 0;
                if step == h && err < tol / T::lit(64.0) {
                    h = h * T::lit(2.0);
                }
            } else {
                h = step * T::lit(0.5);
                halvings += 1;
                if halvings > MAX_HALVINGS || !(h > T::zero()) {
                    return Err(Error::Propagation {
                        tau: tau.to_f64_lossy(),
                        step: h.to_f64_lossy(),
                        halvings,
                        error: err.to_f64_lossy(),
                    });
                }
            }
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// g²(τ) = Tr[a†a·e^{Lτ}(aρa†)]/⟨a†a⟩² by the quantum regression theorem.
pub fn g2_tau_regression<T: Real>(rho_ss: &DensityMatrix<T>, ops: &FockOperatorSet<T>, tau_grid: &[T]) -> Result<Vec<T>> {
    let mean_n = rho_ss.mean_photon();
    if !(mean_n > T::zero()) {
        return Err(Error::Undefined("g2 is undefined at zero mean photon number"));
    }
    let start = jump(ops, &rho_ss.rho);
    let norm = mean_n * mean_n;
    Ok(propagate(ops, &start, tau_grid)?.iter().map(|m| number_trace(m) / norm).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSteadyState<T: Real> {
    pub ops: FockOperatorSet<T>,
    pub rho: DensityMatrix<T>,
}

/// Steady state at the smallest truncation in 30, 60, 120 whose ⟨n⟩ agrees
/// with the next doubling to 1e-8.
pub fn converged_steady_state<T: Real>(params: &SystemParams<T>, variant: Variant) -> Result<OracleSteadyState<T>> {
    let solve = |dim| -> Result<OracleSteadyState<T>> {
        let ops = build_liouvillian(params, variant, dim)?;
        let rho = steady_state_dm(&ops)?;
        Ok(OracleSteadyState { ops, rho })
    };
    let mut current = solve(DEFAULT_DIM)?;
    loop {
        let dim = current.ops.dim;
        let next = solve(dim * 2)?;
        let (a, b) = (current.rho.mean_photon(), next.rho.mean_photon());
        let change = (a - b).abs();
        if change <= T::lit(CONVERGENCE_TOL) * b.max(T::one()) {
            return Ok(current);
        }
        if dim * 2 >= MAX_DIM {
            return Err(Error::Truncation { dim: dim * 2, change: change.to_f64_lossy() });
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cis;
    use crate::units::mhz_to_angular;
    use approx::assert_relative_eq;

    fn linear(delta_d_mhz: f64, omega_mhz: f64) -> SystemParams<f64> {
        SystemParams::from_mhz(0.0, 1000.0, 0.1)
            .unwrap()
            .with_detuning(mhz_to_angular(delta_d_mhz))
            .with_drive(cis(0.7) * mhz_to_angular(omega_mhz))
    }

    fn blockade(g_mhz: f64, offset_mhz: f64) -> SystemParams<f64> {
        let p = SystemParams::from_mhz(g_mhz, 1000.0, 0.1).unwrap().with_drive_strength(mhz_to_angular(0.01));
        p.with_detuning(dressed_line_offset(&p) + mhz_to_angular(offset_mhz))
    }

    #[test]
    fn rejects_small_dim() {
        assert!(build_liouvillian(&linear(0.0, 0.1), Variant::Kerr, 2).is_err());
    }

    #[test]
    fn operator_structure() {
        let ops = build_liouvillian(&blockade(100.0, 0.0), Variant::FullDispersive, 6).unwrap();
        for n in 1..6 {
            assert_eq!(ops.a[(n - 1, n)].re, (n as f64).sqrt());
        }
        assert_eq!(ops.a.iter().filter(|z| z.norm() > 0.0).count(), 5);
        assert_eq!(ops.hamiltonian, ops.hamiltonian.adjoint());
        // vec(I) is a left null vector of the generator.
        let l = ops.liouvillian_dense();
        for col in 0..36 {
            let s: Complex<f64> = (0..6).map(|n| l[(n * 6 + n, col)]).sum();
            assert!(s.norm() < 1e-9 * ops.norm(), "col {col}: {s}");
        }
    }

    #[test]
    fn dense_generator_matches_commutator_form() {
        let ops = build_liouvillian(&blockade(100.0, 0.05).with_drive(cis(1.1) * 1e5), Variant::Kerr, 5).unwrap();
        let rho = DMatrix::from_fn(5, 5, |i, j| Complex::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        let h = &ops.hamiltonian;
        let a = &ops.a;
        let num = a.adjoint() * a;
        let i = Complex::new(0.0, 1.0);
        let expect = (h * &rho - &rho * h) * (-i)
            + (a * &rho * a.adjoint() - (&num * &rho + &rho * &num) * Complex::new(0.5, 0.0)) * Complex::new(2.0 * ops.kappa, 0.0);
        let got = ops.apply(&rho);
        assert!((&got - &expect).iter().all(|z| z.norm() < 1e-6 * ops.norm()));
        let vec: nalgebra::DVector<Complex<f64>> = nalgebra::DVector::from_fn(25, |k, _| rho[(k / 5, k % 5)]);
        let dense = ops.liouvillian_dense() * vec;
        for k in 0..25 {
            assert!((dense[k] - got[(k / 5, k % 5)]).norm() < 1e-9 * ops.norm());
        }
    }

    #[test]
    fn undriven_steady_state_is_vacuum() {
        let p = blockade(100.0, 0.0).with_drive_strength(0.0);
        let ops = build_liouvillian(&p, Variant::FullDispersive, 8).unwrap();
        let rho = steady_state_dm(&ops).unwrap();
        assert_eq!(rho.rho[(0, 0)], Complex::new(1.0, 0.0));
        assert!(rho.rho.iter().skip(1).all(|z| z.norm() == 0.0));
        assert!(observables(&rho, &ops).is_err());
    }

    #[test]
    fn linear_cavity_is_coherent() {
        for (dd, w) in [(0.0, 0.1), (0.15, 0.2), (-0.3, 0.05)] {
            let p = linear(dd, w);
            let expect = p.omega.norm_sqr() / (p.kappa.powi(2) + p.delta_d.powi(2));
            let dim = (10.0 * expect + 10.0).ceil() as usize + 10;
            let ops = build_liouvillian(&p, Variant::FullDispersive, dim).unwrap();
            let rho = steady_state_dm(&ops).unwrap();
            let obs = observables(&rho, &ops).unwrap();
            assert_relative_eq!(obs.mean_n, expect, max_relative = 1e-8);
            assert!((obs.g2_zero - 1.0).abs() < 1e-8);
            let g2 = g2_tau_regression(&rho, &ops, &[0.0, 1.0 / p.kappa, 5.0 / p.kappa]).unwrap();
            assert!(g2.iter().all(|v| (v - 1.0).abs() < 1e-8), "{g2:?}");
        }
    }

    #[test]
    fn density_matrix_invariants() {
        let p = blockade(100.0, 0.02);
        let ops = build_liouvillian(&p, Variant::FullDispersive, 12).unwrap();
        let rho = steady_state_dm(&ops).unwrap();
        assert!((rho.trace() - 1.0).norm() < 1e-10);
        assert!(rho.hermiticity_error() < 1e-10);
        assert!(rho.eigenvalues().iter().all(|&l| l >= -1e-8));
        assert!(residual(&ops, &rho) <= 1e-10 * ops.norm());
        assert!(rho.rho[(0, 1)].norm() > 1e-6);
    }

    #[test]
    fn truncation_self_convergence() {
        let p = blockade(100.0, 0.0);
        let n = |dim| {
            let ops = build_liouvillian(&p, Variant::FullDispersive, dim).unwrap();
            steady_state_dm(&ops).unwrap().mean_photon()
        };
        assert!((n(10) - n(15)).abs() < 1e-8);
        let conv = converged_steady_state(&p, Variant::Kerr).unwrap();
        assert_eq!(conv.ops.dim, DEFAULT_DIM);
    }

    #[test]
    fn thermal_state_g2() {
        let ops = build_liouvillian(&linear(0.0, 0.0), Variant::FullDispersive, 400).unwrap();
        let q: f64 = 0.4;
        let rho = DMatrix::from_fn(400, 400, |i, j| {
            if i == j {
                Complex::new((1.0 - q) * q.powi(i as i32), 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let obs = observables(&DensityMatrix { rho }, &ops).unwrap();
        assert_relative_eq!(obs.mean_n, q / (1.0 - q), max_relative = 1e-10);
        assert!((obs.g2_zero - 2.0).abs() < 1e-8);
    }

    #[test]
    fn deep_blockade_antibunches() {
        // Two-level-plus-one truncation: the 1→2 step is detuned by 2χ, so
        // g²(0) ≈ κ²/(κ² + χ²) for a resonant weak drive.
        let p = blockade(200.0, 0.0);
        let chi = kerr_strength(&p).unwrap();
        let ops = build_liouvillian(&p, Variant::Kerr, 10).unwrap();
        let obs = observables(&steady_state_dm(&ops).unwrap(), &ops).unwrap();
        let estimate = p.kappa.powi(2) / (p.kappa.powi(2) + chi.powi(2));
        assert!(obs.g2_zero < 0.05);
        assert!((obs.g2_zero / estimate - 1.0).abs() < 0.2, "{} vs {estimate}", obs.g2_zero);
    }

    #[test]
    fn regression_limits_and_trace() {
        let p = blockade(100.0, 0.03);
        let ops = build_liouvillian(&p, Variant::Kerr, 10).unwrap();
        let rho = steady_state_dm(&ops).unwrap();
        let obs = observables(&rho, &ops).unwrap();
        let taus = [0.0, 0.5 / p.kappa, 2.0 / p.kappa, 40.0 / p.kappa];
        let g2 = g2_tau_regression(&rho, &ops, &taus).unwrap();
        assert_eq!(g2[0], obs.g2_zero);
        assert!((g2[3] - 1.0).abs() < 1e-6, "{}", g2[3]);
        let start = DMatrix::from_fn(10, 10, |i, j| if i == j && i < 3 { Complex::new(1.0 / 3.0, 0.0) } else { Complex::new(0.0, 0.0) });
        for r in propagate(&ops, &start, &taus).unwrap() {
            assert!((r.trace() - 1.0).norm() <= 1e-9);
        }
        assert!(propagate(&ops, &start, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn variants_agree_and_converge() {
        let pair = |g| {
            let p = blockade(g, 0.02);
            let k_ops = build_liouvillian(&p, Variant::Kerr, 10).unwrap();
            let k = observables(&steady_state_dm(&k_ops).unwrap(), &k_ops).unwrap();
            let f_ops = build_liouvillian(&p, Variant::FullDispersive, 10).unwrap();
            let f = observables(&steady_state_dm(&f_ops).unwrap(), &f_ops).unwrap();
            (k, f)
        };
        let (k1, f1) = pair(100.0);
        assert!((k1.mean_n / f1.mean_n - 1.0).abs() < 0.05);
        let (k2, f2) = pair(50.0);
        let gap1 = (k1.g2_zero - f1.g2_zero).abs();
        let gap2 = (k2.g2_zero - f2.g2_zero).abs();
        assert!(gap2 * 4.0 <= gap1, "{gap1} -> {gap2}");
    }

    #[test]
    fn generic_over_f32() {
        let p = SystemParams::<f32>::from_mhz(0.0, 1000.0, 0.1).unwrap().with_drive_strength(mhz_to_angular(0.05f32));
        let ops = build_liouvillian(&p, Variant::FullDispersive, 8).unwrap();
        let n = steady_state_dm(&ops).unwrap().mean_photon();
        assert!((n - 0.25).abs() < 1e-4);
    }
}
