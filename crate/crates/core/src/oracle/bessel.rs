//! Integer-order Bessel functions of the first kind and their zeros.

use std::f64::consts::PI;

/// J_m(x) from Bessel's integral (1/π)∫₀^π cos(mτ − x sin τ) dτ.
///
/// The integrand is smooth and periodic, so the trapezoid rule converges
/// geometrically once the node count exceeds |x| + m.
pub fn bessel_j(m: i32, x: f64) -> f64 {
    let n = 64 + 2 * (x.abs() as usize + m.unsigned_abs() as usize);
    let h = PI / n as f64;
    let f = |t: f64| (m as f64 * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for k in 1..n {
        s += f(k as f64 * h);
    }
    s * h / PI
}

pub fn bessel_j_prime(m: i32, x: f64) -> f64 {
    0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))
}

fn nth_root(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    assert!(n >= 1, "roots are counted from one");
    let step = 0.05;
    let mut x = 1e-6;
    let mut fx = f(x);
    let mut found = 0;
    loop {
        let y = x + step;
        let fy = f(y);
        if fx == 0.0 || fx * fy < 0.0 {
            found += 1;
            if found == n {
                let (mut a, mut b, mut fa) = (x, y, fx);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    let fm = f(mid);
                    if fa * fm <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                return 0.5 * (a + b);
            }
        }
        x = y;
        fx = fy;
    }
}

/// n-th positive zero χ_mn of J_m (n ≥ 1).
pub fn bessel_j_zero(m: u32, n: usize) -> f64 {
    nth_root(|x| bessel_j(m as i32, x), n)
}

/// n-th positive zero χ'_mn of J'_m (n ≥ 1), excluding x = 0.
pub fn bessel_j_prime_zero(m: u32, n: usize) -> f64 {
    nth_root(|x| bessel_j_prime(m as i32, x), n)
}
