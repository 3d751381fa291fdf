//! Gauss quadrature rules and a few exact constants of round spheres.
//!
//! The axisymmetric measure on `S^{n-1}` is `omega_{n-2} (1 - x^2)^{(n-3)/2} dx`
//! with `x = cos(theta)`, so the natural rule is Gauss-Gegenbauer with
//! parameter `mu = (n - 2) / 2`. For `n = 3` this is plain Gauss-Legendre.

use std::f64::consts::PI;

/// `Gamma(k / 2)` for a positive integer `k`, by the half-integer recursion.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "gamma_half needs k >= 1");
    let (mut g, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Area of the unit sphere `S^k` in `R^{k+1}`: `2 pi^{(k+1)/2} / Gamma((k+1)/2)`.
pub fn sphere_area(k: usize) -> f64 {
    2.0 * PI.powf((k as f64 + 1.0) / 2.0) / gamma_half(k + 1)
}

/// `int_{-1}^{1} (1 - x^2)^{mu - 1/2} dx` for `mu = j / 2`, `j >= 1`.
fn gegenbauer_mass(two_mu: usize) -> f64 {
    // B(1/2, mu + 1/2) = sqrt(pi) Gamma(mu + 1/2) / Gamma(mu + 1)
    PI.sqrt() * gamma_half(two_mu + 1) / gamma_half(two_mu + 2)
}

/// Gegenbauer polynomial `C_N^mu(x)` and its derivative, via the three-term recurrence.
fn gegenbauer_with_derivative(n: usize, mu: f64, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = 2.0 * mu * x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 * x * (kf + mu - 1.0) * p - (kf + 2.0 * mu - 2.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    // (1 - x^2) C_N' = -N x C_N + (N + 2 mu - 1) C_{N-1}
    let dp = (-nf * x * p + (nf + 2.0 * mu - 1.0) * p_prev) / (1.0 - x * x);
    (p, dp)
}

/// Gauss-Gegenbauer rule with `count` nodes for the weight `(1 - x^2)^{mu - 1/2}`,
/// `mu = two_mu / 2`. Nodes are returned in ascending order; weights sum to the
/// exact mass of the weight function.
pub fn gauss_gegenbauer(count: usize, two_mu: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count >= 1 && two_mu >= 1);
    let mu = two_mu as f64 / 2.0;
    let alpha = mu - 0.5;
    let nf = count as f64;
    let mut nodes = Vec::with_capacity(count);
    let mut raw = Vec::with_capacity(count);
    for k in 0..count {
        // Largest root first: theta_k ~ (k + 1 + alpha/2 - 1/4) pi / (N + alpha + 1/2).
        let theta = PI * (k as f64 + 0.75 + alpha / 2.0) / (nf + alpha + 0.5);
        let mut x = theta.cos();
        for _ in 0..100 {
            let (p, dp) = gegenbauer_with_derivative(count, mu, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                break;
            }
        }
        let (_, dp) = gegenbauer_with_derivative(count, mu, x);
        nodes.push(x);
        raw.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    // Roots come out descending; the rule is symmetric so reverse both.
    nodes.reverse();
    raw.reverse();
    let scale = gegenbauer_mass(two_mu) / raw.iter().sum::<f64>();
    let weights = raw.into_iter().map(|w| w * scale).collect();
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_gegenbauer(count, 1)
}

/// Neumaier compensated sum, evaluated strictly left to right.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
