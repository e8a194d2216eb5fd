//! Brute-force references for the test suite. Deliberately slow, fixed-step
//! and free of any engine code.
#![allow(dead_code)]

/// `c0 + c1 x + c2 x² + c3 x³` with `c3 < 0`.
#[derive(Debug, Clone, Copy)]
pub struct AutonomousCubic {
    pub c: [f64; 4],
}

impl AutonomousCubic {
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        assert!(c3 < 0.0, "leading coefficient must be negative");
        Self { c: [c0, c1, c2, c3] }
    }

    pub fn p(&self, x: f64) -> f64 {
        let [c0, c1, c2, c3] = self.c;
        ((c3 * x + c2) * x + c1) * x + c0
    }

    pub fn dp(&self, x: f64) -> f64 {
        let [_, c1, c2, c3] = self.c;
        (3.0 * c3 * x + 2.0 * c2) * x + c1
    }
}

#[derive(Debug, Clone)]
pub struct RootCensus {
    pub roots: Vec<f64>,
    /// Sign of `p'` at each root; 0 where the root is flagged degenerate.
    pub stabilities: Vec<i8>,
    pub degenerate: bool,
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Real roots of `p`, bracketed between the critical points and a Cauchy
/// bound, then bisected.
pub fn root_census(p: &AutonomousCubic) -> RootCensus {
    let [c0, c1, c2, c3] = p.c;
    let bound = 1.0 + (c0.abs().max(c1.abs()).max(c2.abs())) / c3.abs();
    // critical points of p, where p' = 3c3 x² + 2c2 x + c1 vanishes
    let (a, b, c) = (3.0 * c3, 2.0 * c2, c1);
    let disc = b * b - 4.0 * a * c;
    let mut knots = vec![-bound];
    if disc > 0.0 {
        let r = disc.sqrt();
        let mut k = [(-b - r) / (2.0 * a), (-b + r) / (2.0 * a)];
        k.sort_by(f64::total_cmp);
        knots.extend(k);
    }
    knots.push(bound);
    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (l, r) = (w[0], w[1]);
        let (pl, pr) = (p.p(l), p.p(r));
        let root = if pl == 0.0 {
            Some(l)
        } else if pr == 0.0 {
            Some(r)
        } else if (pl < 0.0) != (pr < 0.0) {
            Some(bisect(|x| p.p(x), l, r))
        } else if pl.abs() < 1e-9 {
            // a critical point touching zero: double root
            Some(l)
        } else {
            None
        };
        if let Some(x) = root {
            if roots.last().is_none_or(|y| (x - y).abs() > 1e-9) {
                roots.push(x);
            }
        }
    }
    let stabilities: Vec<i8> = roots
        .iter()
        .map(|&x| {
            let d = p.dp(x);
            if d.abs() < 1e-9 {
                0
            } else if d < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect();
    let degenerate = stabilities.contains(&0);
    RootCensus {
        roots,
        stabilities,
        degenerate,
    }
}

/// `(ε/(4 l²))·min_{x∈J_ε}{2f_x(x) − f_x(x−ε/2) − f_x(x+ε/2)}` on an
/// `n`-point grid.
pub fn module_grid_oracle(fx: impl Fn(f64) -> f64, lo: f64, hi: f64, eps: f64, n: usize) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    let l = hi - lo;
    let (a, b) = (lo + 0.5 * eps, hi - 0.5 * eps);
    let mut best = f64::INFINITY;
    for i in 0..n {
        let x = a + (b - a) * i as f64 / (n - 1) as f64;
        let v = 2.0 * fx(x) - fx(x - 0.5 * eps) - fx(x + 0.5 * eps);
        best = best.min(v);
    }
    eps / (4.0 * l * l) * best
}

/// `f_x` of the deadzone cubic with half-width `w`.
pub fn deadzone_fx(w: f64, x: f64) -> f64 {
    if x > w {
        -3.0 * (x - w).powi(2)
    } else if x < -w {
        -3.0 * (x + w).powi(2)
    } else {
        0.0
    }
}

/// Lebesgue measure of `{θ ∈ [0,1): g(θ)}` by the midpoint rule.
pub fn indicator_quadrature(g: impl Fn(f64) -> bool, n: usize) -> f64 {
    (0..n).filter(|&i| g((i as f64 + 0.5) / n as f64)).count() as f64 / n as f64
}
