//! Gauss–Legendre quadrature rules used for the linearization path integrals.

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are found by Newton iteration on the Legendre polynomial starting
/// from the Chebyshev-angle estimates; weights use the standard derivative
/// formula. Accurate to machine precision for orders up to a few hundred.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // initial guess: Chebyshev angle
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_and_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Same rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let (nodes, weights) = gauss_legendre(order);
    let nodes = nodes.into_iter().map(|x| 0.5 * (x + 1.0)).collect();
    let weights = weights.into_iter().map(|w| 0.5 * w).collect();
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` with a fixed-order rule.
pub fn integrate(order: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Composite rule: split `[a, b]` into panels no wider than `max_panel` and
/// apply the fixed-order rule on each. Used for the strip geodesic integrals
/// whose range in conformal time can be large.
pub fn integrate_composite(
    order: usize,
    a: f64,
    b: f64,
    max_panel: f64,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    assert!(max_panel > 0.0);
    if a == b {
        return 0.0;
    }
    let span = (b - a).abs();
    let panels = (span / max_panel).ceil().max(1.0) as usize;
    let (nodes, weights) = gauss_legendre(order);
    let mut total = 0.0;
    for k in 0..panels {
        let pa = a + (b - a) * (k as f64) / (panels as f64);
        let pb = a + (b - a) * ((k + 1) as f64) / (panels as f64);
        let mid = 0.5 * (pa + pb);
        let half = 0.5 * (pb - pa);
        for (&x, &w) in nodes.iter().zip(&weights) {
            total += w * f(mid + half * x) * half;
        }
    }
    total
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (x, 1.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
