//! Exact mild solution of the decoupled equation without ruptures, built
//! from the closed-form stationary profile plus Fourier modes of the
//! deviation. Used to check the time stepper.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::{Mode, ModelConfig};
use crate::error::{Error, Result};
use crate::solver::grid::Field;
use crate::stationary::solve_stationary;

/// `eta(t) = s + sum_m exp(-(sigma k_m^2 + alpha) t) c_m e^{i k_m x}`,
/// with `c_m` the discrete Fourier coefficients of `eta0 - s` on the grid
/// (modes `|m| <= N/2`).
pub fn fourier_reference(config: &ModelConfig, eta0: &Field, t: f64) -> Result<Field> {
    if config.mode != Mode::Decoupled {
        return Err(Error::Unsupported(
            "the Fourier reference solves the decoupled equation only".into(),
        ));
    }
    if config.alpha <= 0.0 {
        return Err(Error::Unsupported(
            "the Fourier reference needs alpha > 0".into(),
        ));
    }
    let params = config.decoupled_params();
    let profile = solve_stationary(config)?;
    let grid = eta0.grid;
    let n = grid.n;
    let s = profile.sample(grid.nodes());

    let mut buf: Vec<Complex64> = eta0
        .values
        .iter()
        .zip(&s)
        .map(|(e, s)| Complex64::new(e - s, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (i, c) in buf.iter_mut().enumerate() {
        let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
        let k = 2.0 * PI * m / grid.omega;
        *c *= (-(params.sigma * k * k + params.alpha) * t).exp();
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let values = buf
        .iter()
        .zip(&s)
        .map(|(c, s)| s + c.re / n as f64)
        .collect();
    Ok(Field::new(grid, values, eta0.time + t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::grid::{sup_diff, Grid};

    fn setup() -> (ModelConfig, Grid, Vec<f64>) {
        let c = ModelConfig::preset("ex1").unwrap();
        let g = Grid::new(1.0, 256).unwrap();
        let s = solve_stationary(&c).unwrap().sample(g.nodes());
        (c, g, s)
    }

    #[test]
    fn stationary_input_is_preserved() {
        let (c, g, s) = setup();
        let f = Field::new(g, s.clone(), 0.0);
        for t in [0.0, 0.01, 1.0, 10.0] {
            let out = fourier_reference(&c, &f, t).unwrap();
            assert!(sup_diff(&out.values, &s) < 1e-10);
        }
    }

    #[test]
    fn single_mode_decays_in_closed_form() {
        let (c, g, s) = setup();
        let cosine: Vec<f64> = g.nodes().map(|x| (2.0 * PI * x).cos()).collect();
        let f = Field::new(g, s.iter().zip(&cosine).map(|(a, b)| a + b).collect(), 0.0);
        let t = 0.037;
        let out = fourier_reference(&c, &f, t).unwrap();
        let rate = 4.0 * PI * PI + 1.0;
        let expected: Vec<f64> = s
            .iter()
            .zip(&cosine)
            .map(|(s, c)| s + (-rate * t).exp() * c)
            .collect();
        assert!(sup_diff(&out.values, &expected) < 1e-10);
        assert_eq!(out.time, t);
    }

    #[test]
    fn zero_time_reproduces_nodes() {
        let (c, g, _) = setup();
        let f = Field::from_fn(g, |x| 0.03 + 0.01 * (x * 17.0).sin() + x * x);
        let out = fourier_reference(&c, &f, 0.0).unwrap();
        assert!(sup_diff(&out.values, &f.values) < 1e-10);
    }

    #[test]
    fn rejects_coupled_and_alpha_zero() {
        let (c, g, s) = setup();
        let f = Field::new(g, s, 0.0);
        let mut coupled = c.clone();
        coupled.mode = Mode::Coupled;
        assert!(matches!(
            fourier_reference(&coupled, &f, 0.1),
            Err(Error::Unsupported(_))
        ));
        let mut flat = c;
        flat.alpha = 0.0;
        assert!(matches!(
            fourier_reference(&flat, &f, 0.1),
            Err(Error::Unsupported(_))
        ));
    }
}
