/// k-th Dirichlet eigenvalue of `−ψ'' + Vψ` by Sturm counts on the
/// three-point Laplacian with `n` interior nodes.
pub fn fd_eigenvalue(v: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, k: usize) -> f64 {
    let h = (b - a) / (n + 1) as f64;
    let diag: Vec<f64> = (1..=n).map(|i| 2.0 / (h * h) + v(a + i as f64 * h)).collect();
    let off = 1.0 / (h * h);
    let below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for (i, di) in diag.iter().enumerate() {
            d = di - x - if i == 0 { 0.0 } else { off * off / d };
            if d == 0.0 {
                d = 1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (-1e3, 1e3);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
