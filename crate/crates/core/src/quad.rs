//! Quadrature helpers: Gauss-Legendre rules, piecewise-linear radial
//! integrals with the 4 pi rho^2 weight, and adaptive Simpson.

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative at x by recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn segment_overlap(x0: f64, x1: f64, a: f64, b: f64) -> Option<(f64, f64)> {
    let lo = x0.max(a);
    let hi = x1.min(b);
    (hi > lo).then_some((lo, hi))
}

/// Integral of f(rho) * rho^2 over [a, b] for piecewise-linear f on the
/// node radii. Exact per segment (2-point Gauss on a cubic integrand).
pub fn integrate_pl_rho2(radii: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    const G: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)
    let mut total = 0.0;
    for i in 0..radii.len() - 1 {
        let (x0, x1) = (radii[i], radii[i + 1]);
        if x1 <= a {
            continue;
        }
        if x0 >= b {
            break;
        }
        if let Some((lo, hi)) = segment_overlap(x0, x1, a, b) {
            let m = (values[i + 1] - values[i]) / (x1 - x0);
            let f = |x: f64| (values[i] + m * (x - x0)) * x * x;
            let c = 0.5 * (lo + hi);
            let hw = 0.5 * (hi - lo);
            total += hw * (f(c - hw * G) + f(c + hw * G));
        }
    }
    total
}

/// Integral of f(rho) * g(rho) * rho^2 over [a, b] for piecewise-linear f, g
/// sharing the node radii. Exact per segment (3-point Gauss on a quartic).
pub fn integrate_pl_product_rho2(
    radii: &[f64],
    f_values: &[f64],
    g_values: &[f64],
    a: f64,
    b: f64,
) -> f64 {
    const G: f64 = 0.774_596_669_241_483_4; // sqrt(3/5)
    const W0: f64 = 8.0 / 9.0;
    const W1: f64 = 5.0 / 9.0;
    let mut total = 0.0;
    for i in 0..radii.len() - 1 {
        let (x0, x1) = (radii[i], radii[i + 1]);
        if x1 <= a {
            continue;
        }
        if x0 >= b {
            break;
        }
        if let Some((lo, hi)) = segment_overlap(x0, x1, a, b) {
            let dx = x1 - x0;
            let mf = (f_values[i + 1] - f_values[i]) / dx;
            let mg = (g_values[i + 1] - g_values[i]) / dx;
            let fg = |x: f64| {
                (f_values[i] + mf * (x - x0)) * (g_values[i] + mg * (x - x0)) * x * x
            };
            let c = 0.5 * (lo + hi);
            let hw = 0.5 * (hi - lo);
            total += hw * (W0 * fg(c) + W1 * (fg(c - hw * G) + fg(c + hw * G)));
        }
    }
    total
}

/// Adaptive Simpson quadrature to the given absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}
