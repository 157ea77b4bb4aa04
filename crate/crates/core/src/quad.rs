//! Composite quadrature rules.

use std::ops::{Add, Mul};

// 5-point Gauss-Legendre on [-1, 1].
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_42,
    0.478_628_670_499_366_2,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_2,
    0.236_926_885_056_189_42,
];

/// Composite 5-point Gauss-Legendre over `panels` equal panels of `[a, b]`.
pub fn gauss_legendre<T, F>(f: F, a: f64, b: f64, panels: usize, zero: T) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = zero;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut panel = zero;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            panel = panel + f(mid + 0.5 * h * x) * w;
        }
        acc = acc + panel * (0.5 * h);
    }
    acc
}

/// Composite trapezoid rule with `n` panels.
pub fn trapezoid<T, F>(f: F, a: f64, b: f64, n: usize) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let n = n.max(1);
    let h = (b - a) / n as f64;
    let mut acc = (f(a) + f(b)) * 0.5;
    for k in 1..n {
        acc = acc + f(a + k as f64 * h);
    }
    acc * h
}
