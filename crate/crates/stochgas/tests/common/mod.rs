//! Test-side numerics kept independent of the library's quadrature path:
//! fixed-grid Simpson rules and a small Gauss-Legendre rule for bin
//! averages.

#![allow(dead_code)]

/// Composite Simpson on n panels (n even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n % 2 == 0, "simpson needs an even panel count");
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Iterated Simpson over a rectangle.
pub fn simpson2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    nx: usize,
    ny: usize,
) -> f64 {
    simpson(|x| simpson(|y| f(x, y), ay, by, ny), ax, bx, nx)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// 5-point Gauss-Legendre average of f over [a, b].
pub fn gauss5_mean<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
        acc += weight * f(mid + half * node);
    }
    acc * 0.5
}

/// Density of the exact time-t transition started at (s, u0): bivariate
/// normal with mean (s + u0 t, u0) and the SDE covariance. Written from
/// the covariance directly, independent of the library's factorization.
pub fn transition_density(
    t: f64,
    sigma1: f64,
    sigma2: f64,
    s: f64,
    u0: f64,
    x: f64,
    u: f64,
) -> f64 {
    let a = sigma1 * sigma1 * t + sigma2 * sigma2 * t * t * t / 3.0;
    let b = sigma2 * sigma2 * t;
    let c = sigma2 * sigma2 * t * t / 2.0;
    let det = a * b - c * c;
    let dx = x - s - u0 * t;
    let du = u - u0;
    let q = (b * dx * dx - 2.0 * c * dx * du + a * du * du) / det;
    (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
}
