//! Globally adaptive 15-point Gauss–Kronrod quadrature for complex-valued
//! integrands on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{modulus, Real};

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights at the odd positions.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        QuadratureConfig { abs_tol: T::zero(), rel_tol: T::lit(1e-10), max_intervals: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: Complex<T>,
    pub error: T,
    pub intervals: usize,
}

struct Segment<T> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
}

fn kronrod<T: Real, F>(f: &F, a: T, b: T) -> Segment<T>
where
    F: Fn(T) -> Complex<T>,
{
    let half = (b - a) * T::lit(0.5);
    let centre = (a + b) * T::lit(0.5);
    let f0 = f(centre);
    let mut kron = f0 * T::lit(WGK[7]);
    let mut gauss = f0 * T::lit(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * T::lit(x);
        let pair = f(centre - dx) + f(centre + dx);
        kron += pair * T::lit(w);
        if j % 2 == 1 {
            gauss += pair * T::lit(WG[j / 2]);
        }
    }
    let value = kron * half;
    let error = modulus((kron - gauss) * half);
    Segment { a, b, value, error }
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<T: Real> Eq for Segment<T> {}

impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// ∫_a^b f(x) dx by bisecting the worst segment until the summed error
/// estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real, F>(f: F, a: T, b: T, config: &QuadratureConfig<T>) -> Result<Integral<T>>
where
    F: Fn(T) -> Complex<T>,
{
    let first = kronrod(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    loop {
        if heap.len() % 64 == 0 {
            // Resum to keep the running totals from drifting.
            value = heap.iter().fold(Complex::new(T::zero(), T::zero()), |acc, s| acc + s.value);
            error = heap.iter().fold(T::zero(), |acc, s| acc + s.error);
        }
        let target = config.abs_tol.max(config.rel_tol * modulus(value));
        if error <= target {
            return Ok(Integral { value, error, intervals: heap.len() });
        }
        let fail = Error::Quadrature { estimate: error.to_f64_lossy(), tolerance: target.to_f64_lossy() };
        if heap.len() >= config.max_intervals {
            return Err(fail);
        }
        let seg = heap.pop().expect("non-empty");
        let mid = (seg.a + seg.b) * T::lit(0.5);
        if !(mid > seg.a && mid < seg.b) {
            // Segment cannot be split further in this precision.
            return Err(fail);
        }
        let (left, right) = (kronrod(&f, seg.a, mid), kronrod(&f, mid, seg.b));
        value = value - seg.value + left.value + right.value;
        error = (error - seg.error + left.error + right.error).max(T::zero());
        heap.push(left);
        heap.push(right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| Complex::new(x.powi(5) - 2.0 * x, x * x), -1.0, 2.0, &Default::default()).unwrap();
        assert!((r.value.re - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-13);
        assert!((r.value.im - 3.0).abs() < 1e-13);
    }

    #[test]
    fn lorentzian_with_oscillation() {
        // ∫ e^{ixt}/(1+x²) dx over [−L, L]: 2·atan(L) at t = 0, and π e^{−t}
        // up to a tail of order 1/(tL²) otherwise.
        let l = 1e4;
        let cfg = QuadratureConfig { abs_tol: 1e-11, rel_tol: 1e-12, max_intervals: 100_000 };
        let f = |t: f64| move |x: f64| Complex::new((x * t).cos(), (x * t).sin()) / (1.0 + x * x);
        let r = integrate(f(0.0), -l, l, &cfg).unwrap();
        assert!((r.value.re - 2.0 * l.atan()).abs() < 1e-10);
        for t in [1.0, 2.5] {
            let r = integrate(f(t), -l, l, &cfg).unwrap();
            assert!((r.value.re - PI * (-t).exp()).abs() < 1e-7, "t={t}: {}", r.value);
            assert!(r.value.im.abs() < 1e-10);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 4 };
        let r = integrate(|x: f64| Complex::new(x.sqrt().recip(), 0.0), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
