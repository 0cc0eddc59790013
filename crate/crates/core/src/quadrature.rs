//! Fixed composite quadrature rules.

/// Five-point Gauss-Legendre nodes on [-1, 1].
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];

const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss-Legendre rule with `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let mut s = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Trapezoidal weights for `n + 1` equispaced samples with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n + 1];
    w[0] = 0.5 * h;
    w[n] = 0.5 * h;
    if n == 0 {
        w[0] = 0.0;
    }
    w
}

/// Rounds `span / step` to an integer, failing when they are not
/// commensurate to a relative tolerance of `1e-9`.
pub fn commensurate_steps(span: f64, step: f64) -> Option<usize> {
    if !(step > 0.0) || !span.is_finite() || span < 0.0 {
        return None;
    }
    let ratio = span / step;
    let n = ratio.round();
    ((ratio - n).abs() <= 1e-9 * n.max(1.0)).then_some(n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_degree_nine() {
        let f = |x: f64| x.powi(9) - 3.0 * x.powi(4) + 1.0;
        let exact = |x: f64| x.powi(10) / 10.0 - 3.0 * x.powi(5) / 5.0 + x;
        let got = gauss_legendre(f, -0.3, 1.7, 1);
        assert!((got - (exact(1.7) - exact(-0.3))).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let w = trapezoid_weights(10, 0.1);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn commensurate() {
        assert_eq!(commensurate_steps(0.025, 0.0005), Some(50));
        assert_eq!(commensurate_steps(0.0265, 0.0001), Some(265));
        assert_eq!(commensurate_steps(0.3, 0.07), None);
        assert_eq!(commensurate_steps(0.0, 0.1), Some(0));
        assert_eq!(commensurate_steps(1.0, 0.0), None);
    }
}
