//! Truncated Fock-space spectrum of the effective Kerr Hamiltonian
//! H = χ(n − n_c)² + Ω a† + Ω* a, in the frame rotating at the drive frequency.
//!
//! Produces the level curves E_k(n_c), the ground-state photon staircase
//! ⟨n⟩(n_c), and the two-level avoided crossing around n_c = 1/2.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{modulus, norm_sqr, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedKerrHamiltonian<T: Real> {
    pub chi: T,
    pub n_c: T,
    pub omega: Complex<T>,
    pub matrix: DMatrix<Complex<T>>,
}

impl<T: Real> TruncatedKerrHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Sorted spectrum; column `k` of `eigenvectors` belongs to `eigenvalues[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: DMatrix<Complex<T>>,
}

impl<T: Real> EigenSystem<T> {
    pub fn ground_state(&self) -> Vec<Complex<T>> {
        self.eigenvectors.column(0).iter().copied().collect()
    }

    /// ⟨n⟩ in eigenstate `k`.
    pub fn mean_photon(&self, k: usize) -> T {
        self.eigenvectors
            .column(k)
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (n, &c)| acc + T::count(n) * norm_sqr(c))
    }
}

pub fn build_hamiltonian<T: Real>(
    chi: T,
    n_c: T,
    omega: Complex<T>,
    dim: usize,
) -> Result<TruncatedKerrHamiltonian<T>> {
    if dim < 2 {
        return Err(Error::param("dim", format!("Fock truncation needs dim >= 2, got {dim}")));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut matrix = DMatrix::from_element(dim, dim, zero);
    for n in 0..dim {
        let x = T::count(n) - n_c;
        matrix[(n, n)] = Complex::new(chi * x * x, T::zero());
        if n + 1 < dim {
            let amp = T::count(n + 1).sqrt();
            // ⟨n+1|Ω a†|n⟩ and its Hermitian partner.
            matrix[(n + 1, n)] = omega * amp;
            matrix[(n, n + 1)] = omega.conj() * amp;
        }
    }
    Ok(TruncatedKerrHamiltonian { chi, n_c, omega, matrix })
}

/// Full sorted spectrum. Eigenvector phases are fixed so the largest-magnitude
/// amplitude is real and positive; degenerate levels are ordered by their
/// dominant Fock index.
pub fn eigensystem<T: Real>(h: &TruncatedKerrHamiltonian<T>) -> Result<EigenSystem<T>> {
    let dim = h.dim();
    let failure = || Error::Eigen {
        chi: h.chi.to_f64_lossy(),
        n_c: h.n_c.to_f64_lossy(),
        omega_abs: modulus(h.omega).to_f64_lossy(),
        dim,
    };
    let eig = nalgebra::SymmetricEigen::try_new(h.matrix.clone(), T::EPS, 0).ok_or_else(failure)?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(failure());
    }

    let mut columns: Vec<(T, usize, Vec<Complex<T>>)> = (0..dim)
        .map(|k| {
            let mut v: Vec<Complex<T>> = eig.eigenvectors.column(k).iter().copied().collect();
            let (dominant, _) = v.iter().enumerate().fold((0, T::zero()), |best, (i, &c)| {
                let m = norm_sqr(c);
                if m > best.1 {
                    (i, m)
                } else {
                    best
                }
            });
            let norm = v.iter().fold(T::zero(), |acc, &c| acc + norm_sqr(c)).sqrt();
            let pivot = v[dominant];
            let phase = pivot.conj() / modulus(pivot);
            for c in v.iter_mut() {
                *c = *c * phase / norm;
            }
            (eig.eigenvalues[k], dominant, v)
        })
        .collect();

    let scale = h.matrix.iter().fold(T::zero(), |acc, &c| acc.max(modulus(c)));
    let tie = T::lit(1e-12) * scale.max(T::EPS);
    columns.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= tie {
            a.1.cmp(&b.1)
        } else {
            a.0.partial_cmp(&b.0).expect("finite eigenvalues")
        }
    });

    let eigenvalues = columns.iter().map(|c| c.0).collect();
    let eigenvectors =
        DMatrix::from_fn(dim, dim, |row, col| columns[col].2[row]);
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

/// Default truncation for a scan reaching `n_c_max`.
pub fn default_dim(n_c_max: f64) -> usize {
    (4.0 * (n_c_max.max(0.0) + 1.0)).ceil() as usize + 20
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanPhoton<T> {
    pub value: T,
    /// Set when doubling the truncation changed the result by more than the
    /// tolerance; holds (value at dim, value at 2·dim).
    pub truncation_warning: Option<(T, T)>,
}

pub const TRUNCATION_TOL: f64 = 1e-8;

/// Ground-state ⟨n⟩ of H/|Ω| = (χ/|Ω|)(n − n_c)² + a + a†.
pub fn ground_state_mean_photon<T: Real>(chi_over_omega: T, n_c: T, dim: usize) -> Result<MeanPhoton<T>> {
    if !(chi_over_omega > T::zero()) {
        return Err(Error::param("chi_over_omega", "must be positive"));
    }
    let mean_at = |d: usize| -> Result<T> {
        let h = build_hamiltonian(chi_over_omega, n_c, Complex::new(T::one(), T::zero()), d)?;
        Ok(eigensystem(&h)?.mean_photon(0))
    };
    let value = mean_at(dim)?;
    let check = mean_at(2 * dim)?;
    let truncation_warning =
        ((value - check).abs() > T::lit(TRUNCATION_TOL)).then_some((value, check));
    Ok(MeanPhoton { value, truncation_warning })
}

/// Eigenvalues ∓sqrt(χ²(n_c − ½)² + |Ω|²) of the reduced two-level Hamiltonian
/// χ(n_c − ½)(|1⟩⟨1| − |0⟩⟨0|) + Ω|1⟩⟨0| + Ω*|0⟩⟨1|.
pub fn avoided_crossing_two_level<T: Real>(chi: T, n_c: T, omega: Complex<T>) -> (T, T) {
    let bias = chi * (n_c - T::lit(0.5));
    let half_gap = (bias * bias + norm_sqr(omega)).sqrt();
    (-half_gap, half_gap)
}

/// Undriven two-level energies for |0⟩ and |1⟩ in the same frame.
pub fn free_two_level<T: Real>(chi: T, n_c: T) -> (T, T) {
    let bias = chi * (n_c - T::lit(0.5));
    (-bias, bias)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaircasePoint<T> {
    pub n_c: T,
    /// Lowest eigenvalues, in units of |Ω|.
    pub energies: Vec<T>,
    pub mean_n: T,
    pub truncation_warning: Option<(T, T)>,
}

/// Level curves and ground-state ⟨n⟩ over an n_c grid at fixed χ/|Ω|.
/// Grid points are evaluated in parallel and returned in input order.
pub fn staircase<T: Real>(
    chi_over_omega: T,
    n_c_grid: &[T],
    dim: usize,
    levels: usize,
) -> Result<Vec<StaircasePoint<T>>> {
    n_c_grid
        .par_iter()
        .map(|&n_c| {
            let h = build_hamiltonian(chi_over_omega, n_c, Complex::new(T::one(), T::zero()), dim)?;
            let sys = eigensystem(&h)?;
            let mean = ground_state_mean_photon(chi_over_omega, n_c, dim)?;
            Ok(StaircasePoint {
                n_c,
                energies: sys.eigenvalues.iter().take(levels).copied().collect(),
                mean_n: mean.value,
                truncation_warning: mean.truncation_warning,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cis;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn diagonal_case() {
        let h = build_hamiltonian(1.0, 0.0, c(0.0), 3).unwrap();
        for n in 0..3 {
            assert_eq!(h.matrix[(n, n)].re, (n * n) as f64);
        }
        assert_eq!(eigensystem(&h).unwrap().eigenvalues, vec![0.0, 1.0, 4.0]);
    }

    #[test]
    fn resonant_pair_is_degenerate_and_ordered_by_fock_index() {
        let h = build_hamiltonian(1.0, 0.5, c(0.0), 2).unwrap();
        let sys = eigensystem(&h).unwrap();
        assert_eq!(sys.eigenvalues, vec![0.25, 0.25]);
        assert_eq!(sys.eigenvectors[(0, 0)], c(1.0));
        assert_eq!(sys.eigenvectors[(1, 1)], c(1.0));
    }

    #[test]
    fn two_by_two_splitting() {
        // [[0.25, 0.1], [0.1, 0.25]] has eigenvalues 0.25 ∓ 0.1.
        let h = build_hamiltonian(1.0, 0.5, c(0.1), 2).unwrap();
        let sys = eigensystem(&h).unwrap();
        assert!((sys.eigenvalues[0] - 0.15).abs() < 1e-15);
        assert!((sys.eigenvalues[1] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn rejects_tiny_basis() {
        assert!(matches!(
            build_hamiltonian(1.0, 0.0, c(0.0), 1),
            Err(Error::InvalidParameter { name: "dim", .. })
        ));
    }

    #[test]
    fn structure_invariants() {
        let omega = Complex::new(0.3, -0.4);
        let h = build_hamiltonian(2.0, 1.3, omega, 12).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let a = h.matrix[(i, j)];
                let b = h.matrix[(j, i)].conj();
                assert!(modulus(a - b) <= 1e-12 * (1.0 + modulus(a)));
                if i.abs_diff(j) > 1 {
                    assert_eq!(a, c(0.0));
                }
            }
            if i + 1 < 12 {
                assert!(modulus(h.matrix[(i + 1, i)] - omega * ((i + 1) as f64).sqrt()) < 1e-15);
            }
        }
    }

    #[test]
    fn residuals_and_normalization() {
        let h = build_hamiltonian(10.0, 2.2, Complex::new(0.6, 0.8), 30).unwrap();
        let sys = eigensystem(&h).unwrap();
        let norm_h = h.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for k in 0..30 {
            let v = sys.eigenvectors.column(k).into_owned();
            let r = &h.matrix * &v - v.map(|z| z * sys.eigenvalues[k]);
            assert!(r.norm() <= 1e-9 * norm_h);
            assert!((v.norm() - 1.0).abs() <= 1e-12);
            let dominant = v.iter().copied().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
            assert!(dominant.im.abs() < 1e-14 && dominant.re > 0.0);
        }
        assert!(sys.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn lowest_levels_converge_with_truncation() {
        for &n_c in &[0.0, 1.4, 3.0] {
            let lo = eigensystem(&build_hamiltonian(1.0, n_c, c(1.0), default_dim(3.0)).unwrap()).unwrap();
            let hi = eigensystem(&build_hamiltonian(1.0, n_c, c(1.0), default_dim(3.0) + 10).unwrap()).unwrap();
            for k in 0..4 {
                assert!((lo.eigenvalues[k] - hi.eigenvalues[k]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn level_curves_anticross_at_half_integers() {
        // χ/|Ω| = 10: gap between the two lowest levels is smallest at n_c = m + ½.
        let gap = |n_c: f64| {
            let sys = eigensystem(&build_hamiltonian(10.0, n_c, c(1.0), 30).unwrap()).unwrap();
            sys.eigenvalues[1] - sys.eigenvalues[0]
        };
        for m in 0..3 {
            let centre = m as f64 + 0.5;
            assert!(gap(centre) < gap(centre - 0.2));
            assert!(gap(centre) < gap(centre + 0.2));
            assert!(gap(centre) > 0.0);
        }
    }

    #[test]
    fn staircase_examples() {
        // Exact in the two-level subspace; the admixture of |2⟩ shifts it by ~|Ω|²/χ² at full dim.
        let mut last = f64::INFINITY;
        for ratio in [1.0f64, 10.0, 100.0, 1000.0] {
            assert!((ground_state_mean_photon(ratio, 0.5, 2).unwrap().value - 0.5).abs() < 1e-12);
            let dev = (ground_state_mean_photon(ratio, 0.5, 40).unwrap().value - 0.5).abs();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-3);
        let plateau = ground_state_mean_photon(100.0f64, 1.0, 40).unwrap();
        assert!((plateau.value - 1.0).abs() < 0.05);
        assert!(plateau.truncation_warning.is_none());
        let smooth = ground_state_mean_photon(1.0f64, 1.0, 40).unwrap();
        assert!((smooth.value - 1.0).abs() > 0.05);
        assert!(ground_state_mean_photon(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn truncation_warning_fires_for_undersized_basis() {
        let m = ground_state_mean_photon(0.01, 3.0, 3).unwrap();
        assert!(m.truncation_warning.is_some());
    }

    #[test]
    fn two_level_model() {
        let (lo, hi) = avoided_crossing_two_level(1.0f64, 0.5, Complex::new(0.0, 0.2));
        assert!((hi - lo - 0.4).abs() < 1e-15);
        assert_eq!(avoided_crossing_two_level(1.0, 0.5, c(0.0)), (0.0, 0.0));
        let (lo, hi) = avoided_crossing_two_level(1.0, 40.5, c(1e-3));
        assert!(((hi - lo) - 80.0).abs() < 1e-6);
        // Matches the 2×2 block of the full Hamiltonian up to its constant shift.
        let h = build_hamiltonian(3.0, 0.8, c(0.25), 2).unwrap();
        let sys = eigensystem(&h).unwrap();
        let (lo, hi) = avoided_crossing_two_level(3.0, 0.8, c(0.25));
        assert!(((sys.eigenvalues[1] - sys.eigenvalues[0]) - (hi - lo)).abs() < 1e-13);
        assert_eq!(free_two_level(2.0, 1.0), (-1.0, 1.0));
    }

    #[test]
    fn staircase_symmetry_about_half_integers() {
        for ratio in [100.0, 1000.0] {
            for m in 0..3 {
                for x in [0.1, 0.25, 0.4] {
                    let centre = m as f64 + 0.5;
                    let a = ground_state_mean_photon(ratio, centre + x, 40).unwrap().value;
                    let b = ground_state_mean_photon(ratio, centre - x, 40).unwrap().value;
                    assert!((a + b - (2 * m + 1) as f64).abs() < 1e-2, "ratio {ratio} m {m} x {x}");
                }
            }
        }
    }

    #[test]
    fn staircase_monotone_and_sharper_for_larger_ratio() {
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 3.5 / 200.0).collect();
        let mut slopes = Vec::new();
        for ratio in [1.0f64, 10.0, 100.0] {
            let pts = staircase(ratio, &grid, default_dim(3.5), 4).unwrap();
            assert!(pts.windows(2).all(|w| w[1].mean_n >= w[0].mean_n - 1e-9));
            let slope = pts
                .windows(2)
                .map(|w| (w[1].mean_n - w[0].mean_n) / (w[1].n_c - w[0].n_c))
                .fold(0.0, f64::max);
            slopes.push(slope);
        }
        assert!(slopes[2] > slopes[1] && slopes[1] > slopes[0], "{slopes:?}");
    }

    #[test]
    fn generic_over_f32() {
        let h = build_hamiltonian(1.0f32, 0.5, Complex::new(0.1f32, 0.0), 2).unwrap();
        let sys = eigensystem(&h).unwrap();
        assert!((sys.eigenvalues[0] - 0.15).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn spectrum_ignores_drive_phase(phase in -3.2f64..3.2, n_c in -0.5f64..3.5) {
            let a = eigensystem(&build_hamiltonian(4.0, n_c, c(0.7), 16).unwrap()).unwrap();
            let b = eigensystem(&build_hamiltonian(4.0, n_c, cis(phase) * 0.7, 16).unwrap()).unwrap();
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
