//! Fourth-order finite differences for fields that are not periodic.
//!
//! Interior nodes use centered five-point stencils; the two outermost nodes
//! on each side fall back to one-sided formulas of the same order for first
//! derivatives and second order for second derivatives.

use crate::grid::{Grid, ScalarField, VectorField};

fn line_derivative(vals: &[f64], h: f64, out: &mut [f64]) {
    let n = vals.len();
    let c = 1.0 / (12.0 * h);
    if n < 5 {
        for i in 0..n {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            out[i] = (vals[b] - vals[a]) / ((b - a) as f64 * h);
        }
        return;
    }
    for i in 2..n - 2 {
        out[i] = (-vals[i + 2] + 8.0 * vals[i + 1] - 8.0 * vals[i - 1] + vals[i - 2]) * c;
    }
    out[0] = (-25.0 * vals[0] + 48.0 * vals[1] - 36.0 * vals[2] + 16.0 * vals[3] - 3.0 * vals[4]) * c;
    out[1] = (-3.0 * vals[0] - 10.0 * vals[1] + 18.0 * vals[2] - 6.0 * vals[3] + vals[4]) * c;
    let m = n - 1;
    out[m] = -(-25.0 * vals[m] + 48.0 * vals[m - 1] - 36.0 * vals[m - 2] + 16.0 * vals[m - 3] - 3.0 * vals[m - 4]) * c;
    out[m - 1] =
        -(-3.0 * vals[m] - 10.0 * vals[m - 1] + 18.0 * vals[m - 2] - 6.0 * vals[m - 3] + vals[m - 4]) * c;
}

fn line_second_derivative(vals: &[f64], h: f64, out: &mut [f64]) {
    let n = vals.len();
    let h2 = h * h;
    if n < 5 {
        for i in 0..n {
            let c = i.clamp(1, n - 2);
            out[i] = (vals[c + 1] - 2.0 * vals[c] + vals[c - 1]) / h2;
        }
        return;
    }
    for i in 2..n - 2 {
        out[i] = (-vals[i + 2] + 16.0 * vals[i + 1] - 30.0 * vals[i] + 16.0 * vals[i - 1] - vals[i - 2]) / (12.0 * h2);
    }
    out[1] = (vals[2] - 2.0 * vals[1] + vals[0]) / h2;
    out[0] = (2.0 * vals[0] - 5.0 * vals[1] + 4.0 * vals[2] - vals[3]) / h2;
    let m = n - 1;
    out[m - 1] = (vals[m] - 2.0 * vals[m - 1] + vals[m - 2]) / h2;
    out[m] = (2.0 * vals[m] - 5.0 * vals[m - 1] + 4.0 * vals[m - 2] - vals[m - 3]) / h2;
}

fn along_axis(grid: &Grid, data: &[f64], axis: usize, kernel: fn(&[f64], f64, &mut [f64])) -> Vec<f64> {
    let n = grid.n();
    let h = grid.spacing();
    let stride = [1, n, n * n][axis];
    let mut out = vec![0.0; data.len()];
    let mut line = vec![0.0; n];
    let mut res = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            let base = match axis {
                0 => n * (a + n * b),
                1 => a + n * n * b,
                _ => a + n * b,
            };
            for t in 0..n {
                line[t] = data[base + t * stride];
            }
            kernel(&line, h, &mut res);
            for t in 0..n {
                out[base + t * stride] = res[t];
            }
        }
    }
    out
}

pub fn derivative(grid: &Grid, data: &[f64], axis: usize) -> Vec<f64> {
    along_axis(grid, data, axis, line_derivative)
}

pub fn second_derivative(grid: &Grid, data: &[f64], axis: usize) -> Vec<f64> {
    along_axis(grid, data, axis, line_second_derivative)
}

pub fn gradient(grid: &Grid, data: &[f64]) -> [Vec<f64>; 3] {
    [
        derivative(grid, data, 0),
        derivative(grid, data, 1),
        derivative(grid, data, 2),
    ]
}

/// `jac[c][d] = ∂_d v_c`.
pub fn jacobian(field: &VectorField) -> [[Vec<f64>; 3]; 3] {
    let g = field.grid;
    [
        gradient(&g, &field.comps[0]),
        gradient(&g, &field.comps[1]),
        gradient(&g, &field.comps[2]),
    ]
}

pub fn laplacian(grid: &Grid, data: &[f64]) -> Vec<f64> {
    let mut out = second_derivative(grid, data, 0);
    for axis in 1..3 {
        for (o, v) in out.iter_mut().zip(second_derivative(grid, data, axis)) {
            *o += v;
        }
    }
    out
}

pub fn laplacian_vector(field: &VectorField) -> VectorField {
    let g = field.grid;
    VectorField {
        grid: g,
        comps: [
            laplacian(&g, &field.comps[0]),
            laplacian(&g, &field.comps[1]),
            laplacian(&g, &field.comps[2]),
        ],
    }
}

pub fn divergence(field: &VectorField) -> ScalarField {
    let g = field.grid;
    let mut data = derivative(&g, &field.comps[0], 0);
    for d in 1..3 {
        for (o, v) in data.iter_mut().zip(derivative(&g, &field.comps[d], d)) {
            *o += v;
        }
    }
    ScalarField { grid: g, data }
}
