//! Per-antenna Gaussian bookkeeping: cavity division, tilted moments,
//! moment matching and precision-domain damping.

use num_complex::Complex64;

use crate::constellation::{Constellation, SymbolPrior};
use crate::error::{Error, Result};

/// Relative guard on `var_factor - var_marginal` below which the cavity is
/// treated as undefined.
pub const CAVITY_GUARD: f64 = 1e-12;

/// A scalar complex Gaussian `CN(mean, var)`. `var` may be negative for
/// unnormalizable intermediate messages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: Complex64,
    pub var: f64,
}

impl Gaussian {
    pub fn new(mean: Complex64, var: f64) -> Self {
        Self { mean, var }
    }

    /// Normalized product of two Gaussian densities.
    pub fn product(&self, other: &Gaussian) -> Gaussian {
        let prec = 1.0 / self.var + 1.0 / other.var;
        let var = 1.0 / prec;
        Gaussian {
            mean: (self.mean / self.var + other.mean / other.var) * var,
            var,
        }
    }

    pub fn is_proper(&self) -> bool {
        self.var > 0.0 && self.var.is_finite() && self.mean.re.is_finite() && self.mean.im.is_finite()
    }
}

/// Divides the factor `N(factor)` out of the marginal `N(marginal)`.
pub fn cavity(marginal: Gaussian, factor: Gaussian) -> Result<Gaussian> {
    let denom = factor.var - marginal.var;
    if !(denom > CAVITY_GUARD * factor.var) {
        return Err(Error::InvalidCavity(denom));
    }
    Ok(Gaussian {
        mean: (marginal.mean * factor.var - factor.mean * marginal.var) / denom,
        var: marginal.var * factor.var / denom,
    })
}

/// Mean and variance of `cavity(u) * prior(u)` restricted to the alphabet,
/// with the variance floored at `epsilon`.
pub fn tilted_moments(
    cavity: Gaussian,
    prior: &SymbolPrior,
    constellation: &Constellation,
    epsilon: f64,
) -> Gaussian {
    let points = constellation.points();
    let mut logw: Vec<f64> = points
        .iter()
        .zip(&prior.probs)
        .map(|(&s, &p)| p.ln() - (s - cavity.mean).norm_sqr() / cavity.var)
        .collect();
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let s = points[constellation.nearest(cavity.mean)];
        return Gaussian::new(s, epsilon);
    }
    let mut total = 0.0;
    for l in logw.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    let mean: Complex64 = logw.iter().zip(points).map(|(&w, &s)| s * w).sum::<Complex64>() / total;
    let var = logw
        .iter()
        .zip(points)
        .map(|(&w, &s)| w * (s - mean).norm_sqr())
        .sum::<f64>()
        / total;
    Gaussian::new(mean, var.max(epsilon))
}

/// Factor whose product with the cavity has the tilted moments. `None` when
/// the tilted and cavity variances coincide (infinite factor variance).
pub fn moment_match(tilted: Gaussian, cavity: Gaussian) -> Option<Gaussian> {
    let denom = cavity.var - tilted.var;
    if denom == 0.0 {
        return None;
    }
    let var = tilted.var * cavity.var / denom;
    Some(Gaussian {
        mean: (tilted.mean / tilted.var - cavity.mean / cavity.var) * var,
        var,
    })
}

/// Convex combination in the precision domain with weight `beta` on `new`.
pub fn damp(new: Gaussian, old: Gaussian, beta: f64) -> Gaussian {
    if beta == 1.0 {
        return new;
    }
    if beta == 0.0 {
        return old;
    }
    let prec = beta / new.var + (1.0 - beta) / old.var;
    let var = 1.0 / prec;
    Gaussian {
        mean: (new.mean * (beta / new.var) + old.mean * ((1.0 - beta) / old.var)) * var,
        var,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g(re: f64, var: f64) -> Gaussian {
        Gaussian::new(Complex64::new(re, 0.0), var)
    }

    /// Division of Gaussians in natural parameters, independent of `cavity`.
    fn divide(num: Gaussian, den: Gaussian) -> Gaussian {
        let prec = 1.0 / num.var - 1.0 / den.var;
        Gaussian::new((num.mean / num.var - den.mean / den.var) / prec, 1.0 / prec)
    }

    #[test]
    fn cavity_example() {
        let e = cavity(g(1.0, 0.5), g(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(e.var, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.mean.re, 2.0, epsilon = 1e-15);
        let o = divide(g(1.0, 0.5), g(0.0, 1.0));
        assert_abs_diff_eq!(e.var, o.var, epsilon = 1e-14);
        assert_abs_diff_eq!((e.mean - o.mean).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cavity_identity_and_recombination() {
        let mk = Complex64::new(0.3, -0.7);
        let e = cavity(Gaussian::new(mk, 0.4), Gaussian::new(mk, 0.8)).unwrap();
        assert_abs_diff_eq!((e.mean - mk).norm(), 0.0, epsilon = 1e-15);
        let back = e.product(&Gaussian::new(mk, 0.8));
        assert_abs_diff_eq!(back.var, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn cavity_guard() {
        assert!(matches!(cavity(g(0.0, 1.0), g(0.0, 1.0)), Err(Error::InvalidCavity(_))));
        assert!(cavity(g(0.0, 2.0), g(0.0, 1.0)).is_err());
    }

    #[test]
    fn tilted_examples() {
        let qpsk = Constellation::qam(4).unwrap();
        let t = tilted_moments(g(0.0, 1e6), &SymbolPrior::uniform(4), &qpsk, 0.0);
        assert!(t.mean.norm() < 1e-12);
        assert_abs_diff_eq!(t.var, 1.0, epsilon = 1e-5);

        let s = qpsk.points()[3];
        let t = tilted_moments(g(0.2, 0.5), &SymbolPrior::delta(4, 3), &qpsk, 1e-8);
        assert_eq!(t.mean, s);
        assert_eq!(t.var, 1e-8);

        let bpsk = Constellation::qam(2).unwrap();
        let t = tilted_moments(g(0.5, 1.0), &SymbolPrior::uniform(2), &bpsk, 0.0);
        // w(+1)/w(-1) = exp(-(0.25) + 2.25) = e^2
        assert_abs_diff_eq!(t.mean.re, 1f64.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(t.var, 1.0 - 1f64.tanh().powi(2), epsilon = 1e-12);
    }

    #[test]
    fn tilted_underflow_falls_back_to_nearest_point() {
        let bpsk = Constellation::qam(2).unwrap();
        let t = tilted_moments(g(-0.3, 0.0), &SymbolPrior::uniform(2), &bpsk, 1e-8);
        assert_eq!(t.mean.re, -1.0);
        assert_eq!(t.var, 1e-8);
    }

    #[test]
    fn moment_match_examples() {
        let m = moment_match(g(0.5, 0.2), g(2.0, 1.0)).unwrap();
        assert_abs_diff_eq!(m.var, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.mean.re, 0.125, epsilon = 1e-15);
        let back = m.product(&g(2.0, 1.0));
        assert_abs_diff_eq!(back.var, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(back.mean.re, 0.5, epsilon = 1e-12);

        assert!(moment_match(g(0.0, 1.5), g(0.0, 1.0)).unwrap().var < 0.0);
        assert!(moment_match(g(0.0, 1.0), g(0.0, 1.0)).is_none());
    }

    #[test]
    fn damping_examples() {
        let new = g(2.0, 1.0);
        let old = g(0.0, 1.0 / 3.0);
        assert_eq!(damp(new, old, 1.0), new);
        assert_eq!(damp(new, old, 0.0), old);
        let d = damp(new, old, 0.5);
        assert_abs_diff_eq!(d.var, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mean.re, 0.5, epsilon = 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cplx() -> impl Strategy<Value = Complex64> {
            (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b))
        }

        proptest! {
            #[test]
            fn damping_precision_lies_between(
                m1 in cplx(), m2 in cplx(), v1 in 0.01f64..10.0, v2 in 0.01f64..10.0, beta in 0.001f64..0.999
            ) {
                let d = damp(Gaussian::new(m1, v1), Gaussian::new(m2, v2), beta);
                let (lo, hi) = if v1 < v2 { (1.0 / v2, 1.0 / v1) } else { (1.0 / v1, 1.0 / v2) };
                let p = 1.0 / d.var;
                prop_assert!(p >= lo * (1.0 - 1e-12) && p <= hi * (1.0 + 1e-12));
            }

            #[test]
            fn cavity_round_trip(mk in cplx(), mt in cplx(), vk in 0.01f64..1.0, extra in 0.01f64..5.0) {
                let vt = vk + extra;
                let e = cavity(Gaussian::new(mk, vk), Gaussian::new(mt, vt)).unwrap();
                let back = e.product(&Gaussian::new(mt, vt));
                prop_assert!((back.var - vk).abs() < 1e-10 * (1.0 + vk));
                prop_assert!((back.mean - mk).norm() < 1e-9 * (1.0 + mk.norm()));
            }

            #[test]
            fn matched_factor_reproduces_tilted(mp in cplx(), me in cplx(), vp in 0.01f64..1.0, extra in 0.01f64..5.0) {
                let ve = vp + extra;
                let f = moment_match(Gaussian::new(mp, vp), Gaussian::new(me, ve)).unwrap();
                let back = f.product(&Gaussian::new(me, ve));
                prop_assert!((back.var - vp).abs() < 1e-10);
                prop_assert!((back.mean - mp).norm() < 1e-9);
            }
        }
    }
}
