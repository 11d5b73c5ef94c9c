//! Grid scanning and bracketed root polishing for the characteristic
//! relation g(s) = u0(s) t + s - x and its relatives.

use crate::scalar::Real;

/// One pass of g over a uniform grid; nodes and values are kept so that
/// sign changes and |g| minima can be read off without re-evaluation.
pub(crate) struct GridScan<T> {
    pub nodes: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> GridScan<T> {
    pub fn new(g: &mut dyn FnMut(T) -> T, lo: T, hi: T, cells: usize) -> Self {
        let cells = cells.max(2);
        let width = (hi - lo) / T::from_usize(cells).expect("cell count fits in scalar");
        let mut nodes = Vec::with_capacity(cells + 1);
        let mut values = Vec::with_capacity(cells + 1);
        for i in 0..=cells {
            let s = if i == cells { hi } else { lo + width * T::from_usize(i).unwrap() };
            nodes.push(s);
            values.push(g(s));
        }
        GridScan { nodes, values }
    }

    /// Brackets (a, b) with a strict sign change, plus exact grid zeros as
    /// zero-width brackets.
    pub fn sign_change_brackets(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut skip_next_cell = false;
        for i in 0..self.nodes.len() {
            let v = self.values[i];
            if v == T::zero() {
                out.push((self.nodes[i], self.nodes[i]));
                skip_next_cell = true;
                continue;
            }
            if i + 1 < self.nodes.len() {
                let w = self.values[i + 1];
                if skip_next_cell {
                    skip_next_cell = false;
                } else if w != T::zero() && (v > T::zero()) != (w > T::zero()) {
                    out.push((self.nodes[i], self.nodes[i + 1]));
                }
            }
        }
        out
    }

    /// Grid nodes where |g| attains a local minimum (candidates for
    /// near-miss maxima of the Gaussian exponent).
    pub fn abs_minima(&self) -> Vec<T> {
        let n = self.nodes.len();
        let mut out = Vec::new();
        for i in 0..n {
            let here = self.values[i].abs();
            let left_ok = i == 0 || self.values[i - 1].abs() >= here;
            let right_ok = i + 1 == n || self.values[i + 1].abs() > here;
            if left_ok && right_ok {
                out.push(self.nodes[i]);
            }
        }
        out
    }
}

/// Polish a bracketed root with Newton steps safeguarded by bisection.
/// `gp` is the derivative when the profile is C1; without it the routine
/// is plain bisection. Stops at |g| <= tol or at machine resolution.
pub(crate) fn polish_root<T: Real>(
    g: &mut dyn FnMut(T) -> T,
    gp: Option<&dyn Fn(T) -> T>,
    bracket: (T, T),
    tol: T,
    max_iter: usize,
) -> T {
    let (mut a, mut b) = bracket;
    if a == b {
        return a;
    }
    let mut ga = g(a);
    if ga == T::zero() {
        return a;
    }
    let gb = g(b);
    if gb == T::zero() {
        return b;
    }
    debug_assert!((ga > T::zero()) != (gb > T::zero()), "polish_root needs a sign change");

    let half = T::of(0.5);
    let mut s = half * (a + b);
    for _ in 0..max_iter {
        let gs = g(s);
        if gs.abs() <= tol {
            return s;
        }
        // shrink the bracket around the sign change
        if (gs > T::zero()) == (ga > T::zero()) {
            a = s;
            ga = gs;
        } else {
            b = s;
        }
        if (b - a).abs() <= T::epsilon() * (a.abs() + b.abs() + T::one()) {
            return half * (a + b);
        }
        let mut next = None;
        if let Some(dg) = gp {
            let d = dg(s);
            if d.abs() > T::epsilon() {
                let candidate = s - gs / d;
                if candidate > a && candidate < b {
                    next = Some(candidate);
                }
            }
        }
        s = next.unwrap_or(half * (a + b));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brackets_catch_all_roots_of_a_cubic() {
        // roots at -1, 0, 2
        let mut f = |s: f64| s * (s + 1.0) * (s - 2.0);
        let scan = GridScan::new(&mut f, -3.0, 3.0, 600);
        let brackets = scan.sign_change_brackets();
        assert_eq!(brackets.len(), 3);
        let mut roots: Vec<f64> = brackets
            .into_iter()
            .map(|b| polish_root(&mut f, None, b, 1e-13, 200))
            .collect();
        roots.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for (root, expect) in roots.iter().zip([-1.0, 0.0, 2.0]) {
            assert!((root - expect).abs() < 1e-10, "{root} vs {expect}");
        }
    }

    #[test]
    fn exact_grid_zero_is_reported_once() {
        let mut f = |s: f64| s;
        let scan = GridScan::new(&mut f, -1.0, 1.0, 10);
        let brackets = scan.sign_change_brackets();
        assert_eq!(brackets.len(), 1);
        assert_eq!(brackets[0].0, 0.0);
        assert_eq!(brackets[0].1, 0.0);
    }

    #[test]
    fn newton_polish_uses_derivative() {
        let mut f = |s: f64| s.exp() - 2.0;
        let fp = |s: f64| s.exp();
        let root = polish_root(&mut f, Some(&fp), (0.0, 1.0), 1e-15, 100);
        assert!((root - std::f64::consts::LN_2).abs() < 1e-14);
    }

    #[test]
    fn abs_minima_find_near_miss() {
        // |s^2 + 0.5| has a local min at s = 0 and no roots
        let mut f = |s: f64| s * s + 0.5;
        let scan = GridScan::new(&mut f, -2.0, 2.0, 400);
        assert!(scan.sign_change_brackets().is_empty());
        let minima = scan.abs_minima();
        assert!(minima.iter().any(|s| s.abs() < 0.02), "{minima:?}");
    }
}
