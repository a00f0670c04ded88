//! Finite-difference stencils on uniform lattices.

use num_complex::Complex64;

/// Number of nodes in the sixth-order first-derivative stencil.
pub const STENCIL_WIDTH: usize = 7;

const CENTERED_6: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];

/// Fornberg's recursion for finite-difference weights.
///
/// Returns `w[d][j]`, the weight of `nodes[j]` in the approximation of the
/// `d`-th derivative at `x0`, for `d = 0..=max_order`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut w = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return w;
    }
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    w[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    w
}

/// First derivative of uniformly spaced samples, sixth order everywhere.
///
/// Interior rows use the centered 7-point stencil; the three rows at each
/// edge use one-sided 7-point stencils. Requires at least 7 samples.
pub fn derivative(values: &[Complex64], spacing: f64) -> Vec<Complex64> {
    let n = values.len();
    assert!(
        n >= STENCIL_WIDTH,
        "derivative needs at least {STENCIL_WIDTH} samples"
    );
    let inv_h = 1.0 / spacing;
    let mut out = vec![Complex64::new(0.0, 0.0); n];

    for i in 3..n - 3 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, c) in CENTERED_6.iter().enumerate() {
            if *c != 0.0 {
                acc += values[i + s - 3] * *c;
            }
        }
        out[i] = acc * inv_h;
    }

    let nodes: Vec<f64> = (0..STENCIL_WIDTH).map(|j| j as f64).collect();
    for i in 0..3 {
        let w = &fornberg_weights(i as f64, &nodes, 1)[1];
        let mut left = Complex64::new(0.0, 0.0);
        let mut right = Complex64::new(0.0, 0.0);
        for j in 0..STENCIL_WIDTH {
            left += values[j] * w[j];
            // mirrored row: odd derivative flips sign
            right -= values[n - 1 - j] * w[j];
        }
        out[i] = left * inv_h;
        out[n - 1 - i] = right * inv_h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_centered_stencil() {
        let nodes: Vec<f64> = (-3..=3).map(|j| j as f64).collect();
        let w = fornberg_weights(0.0, &nodes, 1);
        for (a, b) in w[1].iter().zip(CENTERED_6.iter()) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        // zeroth derivative at a node is the identity
        assert!((w[0][3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fornberg_third_derivative_of_cubic() {
        let nodes = [0.5, 1.5, 2.5, 3.5, 4.5];
        let w = fornberg_weights(0.0, &nodes, 3);
        let f = |x: f64| x * x * x - 2.0 * x;
        let d1: f64 = nodes.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d3: f64 = nodes.iter().zip(&w[3]).map(|(x, c)| c * f(*x)).sum();
        assert!((d1 + 2.0).abs() < 1e-12);
        assert!((d3 - 6.0).abs() < 1e-11);
    }

    #[test]
    fn derivative_exact_on_sextic_polynomials() {
        let h = 0.1;
        let xs: Vec<f64> = (0..20).map(|j| j as f64 * h).collect();
        let vals: Vec<Complex64> = xs
            .iter()
            .map(|x| Complex64::new(x.powi(6), -x.powi(3)))
            .collect();
        let d = derivative(&vals, h);
        for (x, dv) in xs.iter().zip(&d) {
            let exact = Complex64::new(6.0 * x.powi(5), -3.0 * x * x);
            assert!((dv - exact).norm() < 1e-9, "x = {x}: {dv} vs {exact}");
        }
    }

    #[test]
    fn derivative_sixth_order_convergence() {
        let err = |n: usize| {
            let h = 2.0 / n as f64;
            let xs: Vec<f64> = (0..n).map(|j| -1.0 + (j as f64 + 0.5) * h).collect();
            let vals: Vec<Complex64> = xs
                .iter()
                .map(|x| Complex64::new((3.0 * x).sin(), 0.0))
                .collect();
            let d = derivative(&vals, h);
            xs.iter()
                .zip(&d)
                .map(|(x, dv)| (dv.re - 3.0 * (3.0 * x).cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(40), err(80));
        let order = (e1 / e2).log2();
        assert!(order > 5.5, "observed order {order}");
    }
}
