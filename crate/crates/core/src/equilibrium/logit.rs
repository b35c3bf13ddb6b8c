use crate::numeric::log_sum_exp;

/// Expected minimum cost `-(1/s) ln Σ exp(-s c)`; `+inf` for no options.
pub fn logsum(costs: &[f64], scale: f64) -> f64 {
    -log_sum_exp(costs.iter().map(|&c| -scale * c)) / scale
}

/// Multinomial logit shares of `costs` at dispersion `scale`.
pub fn logit_split(costs: &[f64], scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; costs.len()];
    logit_split_into(costs, scale, &mut out);
    out
}

pub(crate) fn logit_split_into(costs: &[f64], scale: f64, out: &mut [f64]) {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        out.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let mut total = 0.0;
    for (o, &c) in out.iter_mut().zip(costs) {
        *o = (-scale * (c - min)).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_alternatives() {
        let s = logit_split(&[46.19, 54.0], 0.9);
        let p1 = 1.0 / (1.0 + (0.9f64 * (54.0 - 46.19)).exp());
        assert!((s[1] - p1).abs() < 1e-15);
        assert!((s[0] + s[1] - 1.0).abs() < 1e-15);
        assert!((s[1] - 0.000886).abs() < 1e-6);
    }

    #[test]
    fn logsum_below_min() {
        let c = [3.0, 4.0, 10.0];
        let l = logsum(&c, 1.0);
        assert!(l < 3.0);
        assert!((l - (-((-3f64).exp() + (-4f64).exp() + (-10f64).exp()).ln())).abs() < 1e-12);
        assert_eq!(logsum(&[], 1.0), f64::INFINITY);
    }
}
