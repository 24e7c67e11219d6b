//! Adaptive Gauss–Kronrod quadrature and the λ-integral oracle for the
//! predictive quantities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::lifetime::{ScaleBelief, WeibullShape};
use crate::special::{choose, ln_gamma};

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
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Integrates `f` over the finite interval `[a, b]`, always bisecting the
/// piece with the largest error estimate, until the total error is within
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_intervals: usize) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param("integration range", format!("[{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let (mut value, mut error) = (first.value, first.error);
    heap.push(first);
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::INFINITY,
                requested: rel_tol,
            });
        }
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Integral {
                value,
                abs_error: error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= max_intervals {
            return Err(Error::Quadrature {
                achieved: if value != 0.0 { error / value.abs() } else { error },
                requested: rel_tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // recompute the running error now and then against drift
        if heap.len() % 64 == 0 {
            error = heap.iter().map(|p| p.error).sum();
            value = heap.iter().map(|p| p.value).sum();
        }
    }
}

/// Integrates `f` over `[a, ∞)` via `x = a + s·u/(1-u)`, `u ∈ [0, 1)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, rel_tol: f64, abs_tol: f64, max_intervals: usize) -> Result<Integral> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        let v = f(a + scale * u / w) * scale / (w * w);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, rel_tol, abs_tol, max_intervals)
}

/// What to integrate against the inverse-gamma belief on λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictiveQuery {
    /// P(T > t).
    Reliability { t: f64 },
    /// Lifetime density at t.
    Density { t: f64 },
    /// P(exactly `l` of `at_risk` components still work at `t`, given all
    /// of them worked at `t_now`).
    CountMass { t_now: f64, t: f64, at_risk: usize, l: usize },
}

pub const ORACLE_REL_TOL: f64 = 1e-8;

/// Integrates the query over λ ~ IG(n+1, n·y) by quadrature. With
/// `u = 1/λ` the belief becomes a gamma density in `u`, which is smooth at
/// the origin.
pub fn quadrature_predictive_oracle<P: ScaleBelief<f64>>(
    params: &P,
    shape: WeibullShape<f64>,
    query: PredictiveQuery,
) -> Result<f64> {
    let a = params.ig_shape();
    let b = params.ig_scale();
    let beta = shape.value();
    let log_norm = a * b.ln() - ln_gamma(a);
    let gamma_pdf = move |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        (log_norm + (a - 1.0) * u.ln() - b * u).exp()
    };
    let kernel: Box<dyn Fn(f64) -> f64> = match query {
        PredictiveQuery::Reliability { t } => {
            check_time(t)?;
            let tb = shape.pow(t);
            Box::new(move |u| (-tb * u).exp())
        }
        PredictiveQuery::Density { t } => {
            check_time(t)?;
            if t == 0.0 {
                return Err(Error::param("time", "density oracle needs t > 0"));
            }
            let tb = shape.pow(t);
            let front = beta * t.powf(beta - 1.0);
            Box::new(move |u| front * u * (-tb * u).exp())
        }
        PredictiveQuery::CountMass { t_now, t, at_risk, l } => {
            check_time(t_now)?;
            if !(t >= t_now) {
                return Err(Error::param("time", format!("t = {t} precedes t_now = {t_now}")));
            }
            if l > at_risk {
                return Err(Error::IndexOutOfRange {
                    index: vec![l as i64],
                    bounds: vec![at_risk],
                });
            }
            let delta = shape.pow(t) - shape.pow(t_now);
            let c = choose(at_risk as u64, l as u64) as f64;
            let m = at_risk as i32;
            let l = l as i32;
            Box::new(move |u| {
                let s = (-delta * u).exp();
                c * s.powi(l) * (-(-delta * u).exp_m1()).powi(m - l)
            })
        }
    };
    let integrand = |u: f64| kernel(u) * gamma_pdf(u);
    let split = a / b;
    let tol = ORACLE_REL_TOL * 0.1;
    let head = integrate(integrand, 0.0, split, tol, 1e-300, 4000)?;
    let tail = integrate_half_line(integrand, split, split, tol, 1e-300, 4000)?;
    let value = head.value + tail.value;
    let err = head.abs_error + tail.abs_error;
    if err > ORACLE_REL_TOL * value.abs().max(1e-300) && err > 1e-15 {
        return Err(Error::Quadrature {
            achieved: err / value.abs().max(1e-300),
            requested: ORACLE_REL_TOL,
        });
    }
    Ok(value)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param("time", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}
