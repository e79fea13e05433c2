//! Closed-form spectral route for the longitudinal branches.
//!
//! Each odd layer decouples (at zero core shear) into
//! `rho v_tt = E v_xx` with `v(0) = 0` and `v'(L) + gamma lambda v(L) = 0`.
//! With `c = sqrt(E/rho)` and `v = e^{lambda t} sin(theta x)`, the boundary
//! condition becomes `cos(theta L) + i gamma c sin(theta L) = 0`, i.e.
//! `e^{2 i theta L} = (gamma c - 1)/(gamma c + 1)`, which is solvable in
//! closed form. Every eigenvalue has the same real part `-c cw` with
//! `cw = ln((gamma c + 1)/|gamma c - 1|) / (2 L)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::OddLayer;

/// Near-unity window around the inadmissible longitudinal gain.
const DEGENERATE_GAIN_TOL: f64 = 1e-9;

fn speed_gain(layer: &OddLayer, gamma: f64) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::InvalidParameter("negative longitudinal gain".into()));
    }
    let gc = gamma * layer.wave_speed();
    if (gc - 1.0).abs() <= DEGENERATE_GAIN_TOL {
        return Err(Error::DegenerateFrequency(format!(
            "longitudinal gain {gamma} sits at the impedance-matched value sqrt(rho/E)"
        )));
    }
    Ok(gc)
}

/// `n`-th root of the longitudinal characteristic equation in the wavenumber
/// plane, `n >= 0`.
///
/// `theta_n = kappa_n + i cw` with `kappa_n = n pi / L` above the
/// impedance-matched gain and `kappa_n = (n + 1/2) pi / L` below it; the
/// `n = 0` member of the upper family is a purely real eigenvalue.
pub fn wave_theta(layer: &OddLayer, length: f64, gamma: f64, n: usize) -> Result<Complex64> {
    let gc = speed_gain(layer, gamma)?;
    let kappa = if gc > 1.0 {
        n as f64 * std::f64::consts::PI / length
    } else {
        (n as f64 + 0.5) * std::f64::consts::PI / length
    };
    let cw = ((gc + 1.0) / (gc - 1.0).abs()).ln() / (2.0 * length);
    Ok(Complex64::new(kappa, cw))
}

/// `n`-th eigenvalue `lambda_n = i c theta_n` of one longitudinal branch.
pub fn wave_lambda(layer: &OddLayer, length: f64, gamma: f64, n: usize) -> Result<Complex64> {
    Ok(Complex64::i() * layer.wave_speed() * wave_theta(layer, length, gamma, n)?)
}

/// Normalized residual of the longitudinal characteristic equation at an
/// eigenvalue candidate `lambda`.
pub fn wave_residual(layer: &OddLayer, length: f64, gamma: f64, lambda: Complex64) -> Result<f64> {
    let gc = speed_gain(layer, gamma)?;
    let c = layer.wave_speed();
    let theta = lambda / (Complex64::i() * c);
    let f = (theta * length).cos() + Complex64::i() * gc * (theta * length).sin();
    let scale = (theta.im * length).cosh() * (1.0 + gc);
    Ok(f.norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_layer() -> OddLayer {
        OddLayer { rho: 1.0, h: 1.0, young: 1.0 }
    }

    #[test]
    fn unit_layer_family_is_half_log_two_plus_integer_pi() {
        let l = unit_layer();
        for n in 0..6 {
            let lam = wave_lambda(&l, 1.0, 3.0, n).unwrap();
            assert_relative_eq!(lam.re, -0.5 * 2.0_f64.ln(), max_relative = 1e-15);
            assert_relative_eq!(
                lam.im,
                n as f64 * std::f64::consts::PI,
                max_relative = 1e-15,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn below_matched_gain_the_family_shifts_half_step() {
        let lam = wave_lambda(&unit_layer(), 1.0, 1.0 / 3.0, 0).unwrap();
        assert_relative_eq!(lam.re, -0.5 * 2.0_f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(lam.im, 0.5 * std::f64::consts::PI, max_relative = 1e-15);
    }

    #[test]
    fn slow_layer_decay_scales_with_speed() {
        // rho = 4, E = 1: c = 1/2, gamma c = 3/2, cw = ln(5)/2.
        let l = OddLayer { rho: 4.0, h: 1.0, young: 1.0 };
        let lam = wave_lambda(&l, 1.0, 3.0, 0).unwrap();
        assert_relative_eq!(lam.re, -5.0_f64.ln() / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn residual_vanishes_on_the_family_only() {
        let l = unit_layer();
        for n in 0..8 {
            let lam = wave_lambda(&l, 1.0, 3.0, n).unwrap();
            assert!(wave_residual(&l, 1.0, 3.0, lam).unwrap() < 1e-14);
            let off = lam + Complex64::new(0.05, 0.0);
            assert!(wave_residual(&l, 1.0, 3.0, off).unwrap() > 1e-4);
        }
    }

    #[test]
    fn impedance_matched_gain_has_no_spectrum() {
        assert!(matches!(
            wave_lambda(&unit_layer(), 1.0, 1.0, 0),
            Err(Error::DegenerateFrequency(_))
        ));
    }
}
