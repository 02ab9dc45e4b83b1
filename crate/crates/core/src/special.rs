//! Closed-form heat flow of the degree `-1` fields `x/|x|²` and
//! `(-x₂, x₁, 0)/|x|²`.
//!
//! Both are mapped by `e^{Δ}` to the same vector times the radial factor
//! `F(r) = (1 - 2D(r/2)/r)/r² = ₁F₁(1; 5/2; -r²/4)/6`, with `D` Dawson's
//! integral.

/// Radial factor of `e^{Δ}` acting on `x/|x|²`.
pub fn heat_factor(r: f64) -> f64 {
    let z = 0.25 * r * r;
    if z <= 50.0 {
        kummer_series(z) / 6.0
    } else {
        let x = 0.5 * r;
        (1.0 - 2.0 * dawson_asymptotic(x) / r) / (r * r)
    }
}

/// `₁F₁(1; 5/2; -z) = e^{-z} Σ 3/(2n+3) zⁿ/n!`, all terms positive.
fn kummer_series(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0usize;
    loop {
        n += 1;
        term *= z / n as f64;
        let contribution = term * 3.0 / (2.0 * n as f64 + 3.0);
        sum += contribution;
        if contribution < 1e-17 * sum || n > 500 {
            break;
        }
    }
    // the leading term carries 3/(2·0+3) = 1
    (-z).exp() * sum
}

/// `D(x) ~ Σ (2n-1)!! / (2^{n+1} x^{2n+1})` for large `x`.
fn dawson_asymptotic(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let mut term = 0.5 / x;
    let mut sum = term;
    for n in 1..40 {
        let next = term * (2 * n - 1) as f64 * 0.5 * inv2;
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}
