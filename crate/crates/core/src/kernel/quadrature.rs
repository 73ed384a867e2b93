//! Gauss rules and the fractional trigonometric moments of the sine basis.

use nalgebra::{DMatrix, SymmetricEigen};

/// Points per interval; the integrands vary by at most a quarter period per interval.
const POINTS: usize = 16;

/// Nodes and weights of a Gauss rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss rule for `∫_0^1 z^β g(z) dz`, `β > −1`, by Golub–Welsch on the Jacobi matrix
/// of the weight `(1+x)^β` on `[−1, 1]`.
pub(crate) fn gauss_jacobi_unit(beta: f64, m: usize) -> GaussRule {
    assert!(beta > -1.0 && m > 0);
    let b = beta;
    let mut jacobi = DMatrix::zeros(m, m);
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + b;
        jacobi[(k, k)] = if k == 0 { b / (b + 2.0) } else { b * b / (s * (s + 2.0)) };
        if k + 1 < m {
            let j = kf + 1.0;
            let s = 2.0 * j + b;
            let beta_j = 4.0 * j * j * (j + b) * (j + b) / (s * s * (s + 1.0) * (s - 1.0));
            jacobi[(k, k + 1)] = beta_j.sqrt();
            jacobi[(k + 1, k)] = beta_j.sqrt();
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mass = 1.0 / (b + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (1.0 + eig.eigenvalues[i]), mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Composite Gauss–Legendre rule on `[0, T]` for integrands oscillating at angular
/// frequency up to `max_freq` with algebraic endpoint singularities.
///
/// Uniform panels resolve the oscillation; the panels at both ends are refined
/// geometrically. The right half is the exact mirror of the left half, so the
/// mirror of node `p` is node `len − 1 − p`.
pub(crate) fn graded_rule(t_end: f64, max_freq: f64) -> GaussRule {
    const RATIO: f64 = 0.15;
    const LEVELS: i32 = 20;
    let half = 0.5 * t_end;
    let width = (1.5 / max_freq.max(1e-300)).min(half / 2.0);
    let panels = (half / width).ceil() as usize;
    let h = half / panels as f64;
    let mut cuts = vec![0.0];
    cuts.extend((0..LEVELS).rev().map(|l| h * RATIO.powi(l + 1)));
    cuts.extend((1..panels).map(|p| p as f64 * h));
    cuts.push(half);
    let legendre = gauss_jacobi_unit(0.0, POINTS);
    let mut nodes = Vec::with_capacity(2 * POINTS * cuts.len());
    let mut weights = Vec::with_capacity(2 * POINTS * cuts.len());
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        for (z, q) in legendre.nodes.iter().zip(&legendre.weights) {
            nodes.push(w[0] + len * z);
            weights.push(len * q);
        }
    }
    let left = nodes.len();
    for p in (0..left).rev() {
        nodes.push(t_end - nodes[p]);
        weights.push(weights[p]);
    }
    GaussRule { nodes, weights }
}

/// Moments `C(x) = ∫_0^x y^{γ−1} cos(ωy) dy` and `S(x)` (with `sin`) at sorted points.
///
/// The segment from the origin carries the singular weight and uses a
/// Gauss–Jacobi rule; every later segment `[x_{p−1}, x_p]` must lie at least
/// its own length away from the origin and uses Gauss–Legendre.
pub(crate) struct TrigMoments {
    gamma: f64,
    head_len: f64,
    head: GaussRule,
    first: usize,
    /// Per later segment: abscissae and weights already multiplied by `y^{γ−1}`.
    tail_x: Vec<[f64; POINTS]>,
    tail_w: Vec<[f64; POINTS]>,
}

impl TrigMoments {
    pub(crate) fn new(points: &[f64], gamma: f64) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] <= w[1]) && points[0] >= 0.0);
        let first = points.iter().position(|&x| x > 0.0).unwrap_or(points.len());
        let legendre = gauss_jacobi_unit(0.0, POINTS);
        let mut tail_x = Vec::new();
        let mut tail_w = Vec::new();
        if first < points.len() {
            for w in points[first..].windows(2) {
                let len = w[1] - w[0];
                let mut xs = [0.0; POINTS];
                let mut ws = [0.0; POINTS];
                for l in 0..POINTS {
                    xs[l] = w[0] + len * legendre.nodes[l];
                    ws[l] = len * legendre.weights[l] * xs[l].powf(gamma - 1.0);
                }
                tail_x.push(xs);
                tail_w.push(ws);
            }
        }
        TrigMoments {
            gamma,
            head_len: points.get(first).copied().unwrap_or(0.0),
            head: gauss_jacobi_unit(gamma - 1.0, POINTS),
            first,
            tail_x,
            tail_w,
        }
    }

    /// `(C, S)` at every point for angular frequency `omega`.
    pub(crate) fn moments(&self, omega: f64) -> (Vec<f64>, Vec<f64>) {
        let total = self.first + usize::from(self.head_len > 0.0) + self.tail_x.len();
        let mut c = vec![0.0; self.first];
        let mut s = vec![0.0; self.first];
        c.reserve(total - self.first);
        s.reserve(total - self.first);
        if self.head_len == 0.0 {
            return (c, s);
        }
        let scale = self.head_len.powf(self.gamma);
        let (mut acc_c, mut acc_s) = (0.0, 0.0);
        for (z, w) in self.head.nodes.iter().zip(&self.head.weights) {
            let (sn, cs) = (omega * self.head_len * z).sin_cos();
            acc_c += scale * w * cs;
            acc_s += scale * w * sn;
        }
        c.push(acc_c);
        s.push(acc_s);
        for (xs, ws) in self.tail_x.iter().zip(&self.tail_w) {
            let (mut dc, mut ds) = (0.0, 0.0);
            for l in 0..POINTS {
                let (sn, cs) = (omega * xs[l]).sin_cos();
                dc += ws[l] * cs;
                ds += ws[l] * sn;
            }
            acc_c += dc;
            acc_s += ds;
            c.push(acc_c);
            s.push(acc_s);
        }
        (c, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Grid;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = gauss_jacobi_unit(0.0, 8);
        for p in 0..16 {
            let q: f64 = rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * z.powi(p)).sum();
            assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn jacobi_rule_integrates_weighted_polynomials() {
        for beta in [-0.9, -0.5, -0.25, 0.5] {
            let rule = gauss_jacobi_unit(beta, 10);
            for p in 0..20 {
                let q: f64 = rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * z.powi(p)).sum();
                let exact = 1.0 / (p as f64 + beta + 1.0);
                assert!(((q - exact) / exact).abs() < 1e-13, "β={beta} degree {p}");
            }
        }
    }

    #[test]
    fn zero_frequency_moment_is_a_power() {
        let grid = Grid::new(2.0, 64).unwrap();
        let nodes: Vec<f64> = grid.nodes().collect();
        for gamma in [0.1, 0.3, 0.5] {
            let (c, s) = TrigMoments::new(&nodes, gamma).moments(0.0);
            for (i, &t) in nodes.iter().enumerate() {
                let exact = t.powf(gamma) / gamma;
                assert!((c[i] - exact).abs() < 1e-13 * (1.0 + exact));
                assert_eq!(s[i], 0.0);
            }
        }
    }

    #[test]
    fn matches_reference_moments() {
        // ∫_0^1 x^{-1/2} cos(πx) dx and the sine counterpart (mpmath, 30 digits)
        let nodes: Vec<f64> = Grid::new(1.0, 32).unwrap().nodes().collect();
        let (c, s) = TrigMoments::new(&nodes, 0.5).moments(std::f64::consts::PI);
        let rule = graded_rule(1.0, 2.0 * std::f64::consts::PI);
        let (gc, gs) = TrigMoments::new(&[rule.nodes.as_slice(), &[1.0]].concat(), 0.5).moments(std::f64::consts::PI);
        assert!((gc.last().unwrap() - 0.747_965_666_831_464_6).abs() < 1e-13);
        assert!((gs.last().unwrap() - 1.009_709_188_227_373).abs() < 1e-13);
        assert!((c[32] - 0.747_965_666_831_464_6).abs() < 1e-13, "{}", c[32]);
        assert!((s[32] - 1.009_709_188_227_373).abs() < 1e-13, "{}", s[32]);
    }

    #[test]
    fn graded_rule_handles_endpoint_singularities() {
        let rule = graded_rule(2.0, 50.0);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13, "{total}");
        for beta in [0.02, 0.1, 0.5, 0.9] {
            // ∫_0^2 t^β (2−t)^β dt = 2^{2β+1} B(β+1, β+1)
            let q: f64 = rule.nodes.iter().zip(&rule.weights).map(|(t, w)| w * (t * (2.0 - t)).powf(beta)).sum();
            let g = crate::kernel::gamma_unchecked(beta + 1.0);
            let exact = 2f64.powf(2.0 * beta + 1.0) * g * g / crate::kernel::gamma_unchecked(2.0 * beta + 2.0);
            assert!(((q - exact) / exact).abs() < 1e-12, "β = {beta}");
        }
        let osc: f64 = rule.nodes.iter().zip(&rule.weights).map(|(t, w)| w * (50.0 * t).cos()).sum();
        assert!((osc - (100.0f64).sin() / 50.0).abs() < 1e-13);
    }
}
