//! Truncated power series / polynomials with `f64` coefficients, lowest
//! order first.

/// Product truncated at `order`.
pub fn mul(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut c = vec![0.0; order + 1];
    for (i, &x) in a.iter().enumerate().take(order + 1) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(order + 1 - i) {
            c[i + j] += x * y;
        }
    }
    c
}

/// Full product (no truncation).
pub fn mul_full(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    mul(a, b, a.len() + b.len() - 2)
}

/// exp(a) for a series with a[0] = 0.
pub fn exp(a: &[f64], order: usize) -> Vec<f64> {
    assert!(a.first().is_none_or(|&x| x == 0.0), "exp needs a zero constant term");
    // e' = a' e, solved order by order
    let mut e = vec![0.0; order + 1];
    e[0] = 1.0;
    for k in 1..=order {
        let mut s = 0.0;
        for j in 1..=k {
            if let Some(&aj) = a.get(j) {
                s += j as f64 * aj * e[k - j];
            }
        }
        e[k] = s / k as f64;
    }
    e
}

/// f(g(x)) for g[0] = 0, truncated at `order` (Horner).
pub fn compose(f: &[f64], g: &[f64], order: usize) -> Vec<f64> {
    assert!(g.first().is_none_or(|&x| x == 0.0), "inner series must vanish at 0");
    let mut acc = vec![0.0; order + 1];
    for &c in f.iter().take(order + 1).rev() {
        acc = mul(&acc, g, order);
        acc[0] += c;
    }
    acc
}

/// Compositional inverse of f (f[0] = 0, f[1] ≠ 0) to `order`.
pub fn revert(f: &[f64], order: usize) -> Vec<f64> {
    assert!(f.len() > 1 && f[0] == 0.0 && f[1] != 0.0, "reversion needs f(0) = 0, f'(0) != 0");
    let mut g = vec![0.0; order + 1];
    if order == 0 {
        return g;
    }
    g[1] = 1.0 / f[1];
    for m in 2..=order {
        let c = compose(f, &g, m);
        g[m] -= c[m] / f[1];
    }
    g
}

pub fn derivative(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

pub fn eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of Π_k (x − r_k).
pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    roots.iter().fold(vec![1.0], |acc, &r| mul_full(&acc, &[-r, 1.0]))
}
