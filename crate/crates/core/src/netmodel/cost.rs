use serde::{Deserialize, Serialize};

/// Travel-time function of a link or transfer, evaluated at a flow argument.
///
/// `Poly` is the BPR-like family `t0 + alpha * (v / kappa)^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LinkCostFn {
    Constant {
        t0: f64,
    },
    Poly {
        t0: f64,
        alpha: f64,
        kappa: f64,
        beta: f64,
    },
}

impl LinkCostFn {
    pub fn constant(t0: f64) -> Self {
        LinkCostFn::Constant { t0 }
    }

    pub fn poly(t0: f64, alpha: f64, kappa: f64, beta: f64) -> Self {
        LinkCostFn::Poly {
            t0,
            alpha,
            kappa,
            beta,
        }
    }

    pub fn free_flow(&self) -> f64 {
        match *self {
            LinkCostFn::Constant { t0 } | LinkCostFn::Poly { t0, .. } => t0,
        }
    }

    pub fn time(&self, v: f64) -> f64 {
        match *self {
            LinkCostFn::Constant { t0 } => t0,
            LinkCostFn::Poly {
                t0,
                alpha,
                kappa,
                beta,
            } => t0 + alpha * powf(v.max(0.0) / kappa, beta),
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match *self {
            LinkCostFn::Constant { .. } => 0.0,
            LinkCostFn::Poly {
                alpha, kappa, beta, ..
            } => {
                if beta == 0.0 {
                    0.0
                } else {
                    alpha * beta / kappa * powf(v.max(0.0) / kappa, beta - 1.0)
                }
            }
        }
    }

    /// `∫_0^v t(x) dx` in closed form.
    pub fn integral(&self, v: f64) -> f64 {
        match *self {
            LinkCostFn::Constant { t0 } => t0 * v,
            LinkCostFn::Poly {
                t0,
                alpha,
                kappa,
                beta,
            } => {
                let u = v.max(0.0);
                t0 * v + alpha * kappa / (beta + 1.0) * powf(u / kappa, beta + 1.0)
            }
        }
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        match *self {
            LinkCostFn::Constant { t0 } => {
                if !(t0.is_finite() && t0 >= 0.0) {
                    return Err(format!("constant time must be finite and >= 0, got {t0}"));
                }
            }
            LinkCostFn::Poly {
                t0,
                alpha,
                kappa,
                beta,
            } => {
                if !(t0.is_finite() && t0 >= 0.0) {
                    return Err(format!("t0 must be finite and >= 0, got {t0}"));
                }
                if !(alpha.is_finite() && alpha >= 0.0) {
                    return Err(format!("alpha must be finite and >= 0, got {alpha}"));
                }
                if !(kappa.is_finite() && kappa > 0.0) {
                    return Err(format!("kappa must be finite and > 0, got {kappa}"));
                }
                if !(beta.is_finite() && beta >= 1.0) {
                    return Err(format!("beta must be finite and >= 1, got {beta}"));
                }
            }
        }
        Ok(())
    }
}

// Small integer powers dominate the shipped scenarios; `powi` keeps them exact.
fn powf(x: f64, p: f64) -> f64 {
    if p == p.trunc() && p.abs() <= 16.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_time_and_integral() {
        let f = LinkCostFn::poly(4.0, 1.0, 500.0, 2.0);
        assert!((f.time(500.0) - 5.0).abs() < 1e-12);
        assert!((f.integral(500.0) - (2000.0 + 500.0 / 3.0)).abs() < 1e-9);
        assert_eq!(f.integral(0.0), 0.0);
    }

    #[test]
    fn constant_ignores_flow() {
        let f = LinkCostFn::constant(25.0);
        assert_eq!(f.time(1e6), 25.0);
        assert_eq!(f.derivative(3.0), 0.0);
        assert_eq!(f.integral(2.0), 50.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LinkCostFn::poly(1.0, 1.0, 0.0, 2.0).check().is_err());
        assert!(LinkCostFn::poly(1.0, 1.0, 10.0, 0.5).check().is_err());
        assert!(LinkCostFn::constant(-1.0).check().is_err());
    }
}
