//! Quadrature rules shared by the solvers.

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = even_panels(panels);
    if a == b {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

pub(crate) fn even_panels(panels: usize) -> usize {
    let n = panels.max(2);
    n + n % 2
}

/// Running integral `I[k] = ∫ f` from node 0 to node `k` for samples on a
/// uniform grid with spacing `h`.
///
/// Even nodes use composite Simpson; odd nodes add a three-point
/// half-panel rule to the preceding even node.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (values[0] + values[1]);
        return out;
    }
    let mut k = 2;
    while k < n {
        out[k] = out[k - 2] + h / 3.0 * (values[k - 2] + 4.0 * values[k - 1] + values[k]);
        k += 2;
    }
    let mut k = 1;
    while k < n {
        out[k] = if k + 1 < n {
            out[k - 1] + h / 12.0 * (5.0 * values[k - 1] + 8.0 * values[k] - values[k + 1])
        } else {
            out[k - 1] + h / 12.0 * (-values[k - 2] + 8.0 * values[k - 1] + 5.0 * values[k])
        };
        k += 2;
    }
    out
}

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

/// Five-point Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss5_nodes(a: f64, b: f64) -> [(f64, f64); 5] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 5];
    for i in 0..5 {
        out[i] = (mid + half * GL5_NODES[i], half * GL5_WEIGHTS[i]);
    }
    out
}

/// Composite five-point Gauss-Legendre over `[a, b]`, splitting at every
/// breakpoint inside the interval and using `sub` panels per piece.
pub fn gauss_piecewise<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], sub: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let sub = sub.max(1);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for s in 0..sub {
            let lo = w[0] + s as f64 * h;
            for (x, wt) in gauss5_nodes(lo, lo + h) {
                acc += wt * f(x);
            }
        }
    }
    acc
}
