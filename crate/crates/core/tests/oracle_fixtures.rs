//! Pinned reference values for the four reference configurations, checked
//! against independent computations written out here: hand-derived scale
//! densities integrated by composite Simpson, and a finite-difference solve
//! of `1/2 sigma^2 u'' + mu u' = -1` in original coordinates.

use exitsim::oracle::{exit_probability, mean_exit_time};
use exitsim::{Cir, OrnsteinUhlenbeck, Sinusoidal};

struct Fixture {
    name: &'static str,
    a: f64,
    b: f64,
    x: f64,
    drift: fn(f64) -> f64,
    variance: fn(f64) -> f64,
    log_scale_density: fn(f64) -> f64,
    p: f64,
    u: f64,
}

fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "sin",
            a: 0.0,
            b: 7.0,
            x: 3.0,
            drift: |y| 2.0 + y.sin(),
            variance: |_| 1.0,
            log_scale_density: |y| -4.0 * y - 2.0 * (1.0 - y.cos()),
            p: 0.999_999_863_114_264_4,
            u: 2.748_603_118_896_257,
        },
        Fixture {
            name: "ou1",
            a: 0.0,
            b: 7.0,
            x: 3.0,
            drift: |y| -y,
            variance: |_| 1.0,
            log_scale_density: |y| y * y,
            p: 1.049_249_466_463_338_1e-17,
            u: 2.106_167_800_031_189_4,
        },
        Fixture {
            name: "ou2",
            a: -2.0,
            b: 2.0,
            x: 0.5,
            drift: |y| -2.0 * y,
            variance: |_| 1.0,
            log_scale_density: |y| 2.0 * y * y,
            p: 0.500_741_252_087_589_9,
            u: 503.787_655_002_371,
        },
        Fixture {
            name: "cir",
            a: 1.0,
            b: 6.0,
            x: 3.0,
            drift: |x| 3.0 * (7.0 - x),
            variance: |x| x,
            log_scale_density: |x| -42.0 * x.ln() + 6.0 * x,
            p: 0.999_999_999_999_993,
            u: 0.392_901_147_481_242_94,
        },
    ]
}

fn model_values(f: &Fixture) -> (f64, f64) {
    match f.name {
        "sin" => (
            exit_probability(&Sinusoidal, f.x, f.a, f.b).unwrap(),
            mean_exit_time(&Sinusoidal, f.x, f.a, f.b).unwrap(),
        ),
        "ou1" | "ou2" => {
            let m = OrnsteinUhlenbeck::new(if f.name == "ou1" { 1.0 } else { 2.0 }).unwrap();
            (
                exit_probability(&m, f.x, f.a, f.b).unwrap(),
                mean_exit_time(&m, f.x, f.a, f.b).unwrap(),
            )
        }
        _ => {
            let m = Cir::new(3.0, 7.0, 1.0).unwrap();
            (
                exit_probability(&m, f.x, f.a, f.b).unwrap(),
                mean_exit_time(&m, f.x, f.a, f.b).unwrap(),
            )
        }
    }
}

/// `∫ exp(g - shift)` over `[lo, hi]` by composite Simpson.
fn simpson_exp(g: fn(f64) -> f64, lo: f64, hi: f64, shift: f64) -> f64 {
    let n = 400_000;
    let h = (hi - lo) / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * (g(lo + h * i as f64) - shift).exp();
    }
    s * h / 3.0
}

/// Mean exit time by central differences and the Thomas algorithm.
fn finite_difference_mean_time(f: &Fixture) -> f64 {
    let n = 200_000;
    let h = (f.b - f.a) / n as f64;
    let m = n - 1;
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![-1.0; m]);
    for i in 0..m {
        let y = f.a + h * (i + 1) as f64;
        let d = 0.5 * (f.variance)(y) / (h * h);
        let c = (f.drift)(y) / (2.0 * h);
        lower[i] = d - c;
        diag[i] = -2.0 * d;
        upper[i] = d + c;
    }
    for i in 1..m {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut u = vec![0.0; m];
    u[m - 1] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        u[i] = (rhs[i] - upper[i] * u[i + 1]) / diag[i];
    }
    // x lies on the grid for every fixture
    let k = ((f.x - f.a) / h).round() as usize;
    u[k - 1]
}

#[test]
fn pinned_values_reproduce() {
    for f in fixtures() {
        let (p, u) = model_values(&f);
        assert!(((p - f.p) / f.p).abs() < 1e-9, "{}: p {p} vs {}", f.name, f.p);
        assert!(((u - f.u) / f.u).abs() < 1e-9, "{}: u {u} vs {}", f.name, f.u);
    }
}

#[test]
fn probabilities_match_direct_scale_integrals() {
    for f in fixtures() {
        let g = f.log_scale_density;
        let shift = (0..=1000)
            .map(|i| g(f.a + (f.b - f.a) * i as f64 / 1000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let below = simpson_exp(g, f.a, f.x, shift);
        let above = simpson_exp(g, f.x, f.b, shift);
        let p = below / (below + above);
        let q = above / (below + above);
        let (got, _) = model_values(&f);
        assert!(((got - p) / p).abs() < 1e-7, "{}: {got} vs {p}", f.name);
        // 1 - got carries an absolute error of a few ulps of one
        assert!(((1.0 - got) - q).abs() < 1e-5 * q + 1e-15, "{}: 1 - p", f.name);
    }
}

#[test]
fn mean_times_match_finite_differences() {
    for f in fixtures() {
        let fd = finite_difference_mean_time(&f);
        assert!(((fd - f.u) / f.u).abs() < 1e-5, "{}: fd {fd} vs {}", f.name, f.u);
    }
}
