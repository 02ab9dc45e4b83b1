//! Integrating-factor RK2 for `b' = Λb + F(s, b)` with diagonal `Λ ≤ 0`.

use crate::error::{Error, Result};

use super::tensors::GalerkinTensors;

/// An ODE split into a diagonal stiff part and an explicit remainder.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    /// Diagonal of `Λ`.
    fn stiff(&self) -> &[f64];
    /// `F(s, b)`, the right-hand side minus `Λb`.
    fn explicit(&self, s: f64, b: &[f64], out: &mut [f64]);
    /// A bound on the Lipschitz constant of the linear part of `F`.
    fn explicit_bound(&self) -> f64;
}

impl OdeSystem for GalerkinTensors {
    fn dim(&self) -> usize {
        self.k
    }

    fn stiff(&self) -> &[f64] {
        &self.stiff
    }

    fn explicit(&self, s: f64, b: &[f64], out: &mut [f64]) {
        self.full_rhs(s, b, out);
        for ((o, l), x) in out.iter_mut().zip(&self.stiff).zip(b) {
            *o -= l * x;
        }
    }

    fn explicit_bound(&self) -> f64 {
        GalerkinTensors::explicit_bound(self)
    }
}

/// Samples `b(s_n)` at `s_n = n·dt`, including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub s: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.b.last().expect("trajectory has at least the initial point")
    }

    /// Samples at `n_s` equally spaced nodes of `[0, T)`.
    pub fn at_nodes(&self, n_s: usize) -> Result<Vec<Vec<f64>>> {
        let steps = self.s.len() - 1;
        if n_s == 0 || steps % n_s != 0 {
            return Err(Error::config(format!("{steps} steps are not a multiple of {n_s} profile nodes")));
        }
        Ok((0..n_s).map(|k| self.b[k * steps / n_s].clone()).collect())
    }
}

/// Number of steps over `period`: `dt ≤ 0.5 / bound`, at most `dt_max`,
/// rounded up to a multiple of `multiple_of`.
pub fn step_count(period: f64, bound: f64, dt_max: f64, multiple_of: usize) -> usize {
    let mut dt = dt_max;
    if bound > 0.0 {
        dt = dt.min(0.5 / bound);
    }
    let raw = (period / dt).ceil().max(1.0) as usize;
    let m = multiple_of.max(1);
    raw.div_ceil(m) * m
}

/// Integrates over `[0, period]` in `steps` equal steps.
pub fn integrate<S: OdeSystem + ?Sized>(system: &S, b0: &[f64], period: f64, steps: usize) -> Result<Trajectory> {
    let k = system.dim();
    if b0.len() != k {
        return Err(Error::config(format!("initial vector has length {}, expected {k}", b0.len())));
    }
    if steps == 0 {
        return Err(Error::config("need at least one time step"));
    }
    let dt = period / steps as f64;
    let decay: Vec<f64> = system.stiff().iter().map(|l| (l * dt).exp()).collect();
    let mut s_values = Vec::with_capacity(steps + 1);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut b = b0.to_vec();
    let mut k1 = vec![0.0; k];
    let mut k2 = vec![0.0; k];
    let mut stage = vec![0.0; k];
    s_values.push(0.0);
    samples.push(b.clone());
    for n in 0..steps {
        let s = n as f64 * dt;
        system.explicit(s, &b, &mut k1);
        for i in 0..k {
            stage[i] = decay[i] * (b[i] + dt * k1[i]);
        }
        system.explicit(s + dt, &stage, &mut k2);
        for i in 0..k {
            b[i] = decay[i] * (b[i] + 0.5 * dt * k1[i]) + 0.5 * dt * k2[i];
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowUp { step: n + 1, s: s + dt });
        }
        s_values.push(s + dt);
        samples.push(b.clone());
    }
    Ok(Trajectory { s: s_values, b: samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Relax {
        stiff: Vec<f64>,
        mu: f64,
        forcing: f64,
    }

    impl OdeSystem for Relax {
        fn dim(&self) -> usize {
            1
        }
        fn stiff(&self) -> &[f64] {
            &self.stiff
        }
        fn explicit(&self, s: f64, b: &[f64], out: &mut [f64]) {
            out[0] = -self.mu * b[0] + self.forcing * s.cos();
        }
        fn explicit_bound(&self) -> f64 {
            self.mu
        }
    }

    fn exact(sys: &Relax, b0: f64, s: f64) -> f64 {
        // b' = -(μ+ν)b + c cos s
        let lam = sys.mu - sys.stiff[0];
        let c = sys.forcing;
        let part = |s: f64| c * (lam * s.cos() + s.sin()) / (lam * lam + 1.0);
        part(s) + (b0 - part(0.0)) * (-lam * s).exp()
    }

    #[test]
    fn second_order_convergence() {
        let sys = Relax {
            stiff: vec![-3.0],
            mu: 0.7,
            forcing: 1.3,
        };
        let errs: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|&n| {
                let tr = integrate(&sys, &[0.9], 2.0, n).unwrap();
                (tr.last()[0] - exact(&sys, 0.9, 2.0)).abs()
            })
            .collect();
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        assert!(o1 > 1.8 && o2 > 1.9, "{errs:?}");
    }

    #[test]
    fn stiff_part_is_exact() {
        let sys = Relax {
            stiff: vec![-400.0],
            mu: 0.0,
            forcing: 0.0,
        };
        let tr = integrate(&sys, &[1.0], 1.0, 4).unwrap();
        let exact = (-400.0f64).exp();
        assert!((tr.last()[0] - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn blow_up_and_step_counts() {
        let sys = Relax {
            stiff: vec![0.0],
            mu: -1e200,
            forcing: 0.0,
        };
        let err = integrate(&sys, &[1e200], 1.0, 2).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
        assert_eq!(step_count(1.0, 10.0, 0.1, 4), 20);
        assert_eq!(step_count(1.0, 0.0, 0.3, 4), 4);
        let tr = integrate(
            &Relax {
                stiff: vec![-1.0],
                mu: 0.0,
                forcing: 0.0,
            },
            &[1.0],
            1.0,
            8,
        )
        .unwrap();
        assert_eq!(tr.at_nodes(4).unwrap().len(), 4);
        assert!(tr.at_nodes(3).is_err());
    }
}
