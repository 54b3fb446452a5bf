//! Adaptive Gauss–Kronrod quadrature and the singular-integral oracle.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Seven-point Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// G7–K15 on one interval: (Kronrod value, |K − G|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive integration over consecutive `breakpoints`.
///
/// The interval with the largest error estimate is bisected until the total
/// estimate falls below `rtol * |value|` (or an absolute floor of 1e−300).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rtol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let mut work: Vec<(f64, f64, f64, f64)> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let value: f64 = work.iter().map(|w| w.2).sum();
        let error: f64 = work.iter().map(|w| w.3).sum();
        if error <= rtol * value.abs() || error < 1e-300 {
            return Ok(Quadrature {
                value,
                error,
                intervals: work.len(),
            });
        }
        let (idx, worst) = work
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .map(|(i, w)| (i, *w))
            .expect("non-empty interval list");
        let (a, b) = (worst.0, worst.1);
        let mid = 0.5 * (a + b);
        if work.len() >= max_intervals || mid <= a || mid >= b {
            return Err(Error::Quadrature { error, a, b });
        }
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        work[idx] = (a, mid, v1, e1);
        work.push((mid, b, v2, e2));
    }
}

/// ∫₀^R r^k / (ε + κ₀ r^m)^p dr.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularIntegral {
    pub k: f64,
    pub m: f64,
    pub p: f64,
    pub kappa0: f64,
    pub upper: f64,
}

/// Relative accuracy of the oracle.
pub const ORACLE_RTOL: f64 = 1e-8;

impl SingularIntegral {
    pub fn new(k: f64, m: f64, p: f64, upper: f64) -> Self {
        Self {
            k,
            m,
            p,
            kappa0: 1.0,
            upper,
        }
    }

    pub fn integrand(&self, epsilon: f64, r: f64) -> f64 {
        r.powf(self.k) / (epsilon + self.kappa0 * r.powf(self.m)).powf(self.p)
    }

    /// Geometric breakpoints from `upper` down past the neck scale (ε/κ₀)^{1/m}.
    fn breakpoints(&self, epsilon: f64) -> Vec<f64> {
        let scale = (epsilon / self.kappa0).powf(1.0 / self.m);
        let floor = (scale * 1e-3).min(self.upper * 1e-3);
        let mut pts = vec![self.upper];
        let mut x = self.upper;
        while x > floor {
            x *= 0.5;
            pts.push(x);
        }
        pts.push(0.0);
        pts.reverse();
        pts
    }

    pub fn eval(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0)
            || self.k < 0.0
            || self.m < 2.0
            || !(self.p > 0.0)
            || !(self.upper > 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "singular integral {self:?} at ε = {epsilon}"
            )));
        }
        let q = integrate(
            |r| self.integrand(epsilon, r),
            &self.breakpoints(epsilon),
            ORACLE_RTOL,
            20_000,
        )?;
        Ok(q.value)
    }

    /// ε-exponent of the integral as ε → 0 and whether a |log ε| factor appears.
    pub fn exponent(&self) -> (f64, bool) {
        let e = (self.k + 1.0 - self.m * self.p) / self.m;
        if e.abs() < 1e-12 {
            (0.0, true)
        } else {
            (e.min(0.0), false)
        }
    }
}

/// ∫₀^R r^k / (ε + r^m)^p dr with κ₀ = 1.
pub fn singular_integral_oracle(k: f64, m: f64, p: f64, epsilon: f64, upper: f64) -> Result<f64> {
    SingularIntegral::new(k, m, p, upper).eval(epsilon)
}
