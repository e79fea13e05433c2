//! Discrete spectral route: generator eigenvalues and mode extraction.

use nalgebra::linalg::{Schur, LU};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::assembly::{standard_generator, DiscretizedSystem};
use crate::error::{Error, Result};

/// Default cap on the first-order dimension `2 n` for dense eigensolves.
pub const DEFAULT_DENSE_LIMIT: usize = 4000;

/// All eigenvalues of the semi-discrete generator, sorted by `(Im, Re)`.
///
/// Costs a dense real Schur decomposition of the `2n x 2n` generator, hence
/// the size cap.
pub fn discrete_spectrum(sys: &DiscretizedSystem, dense_limit: usize) -> Result<Vec<Complex64>> {
    let n2 = 2 * sys.total_dofs();
    if n2 > dense_limit {
        return Err(Error::SizeLimit { got: n2, limit: dense_limit });
    }
    let t = standard_generator(sys)?;
    let schur = Schur::try_new(t, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let mut eigs: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(eigs)
}

/// Largest real part over a set of eigenvalues.
pub fn spectral_abscissa(eigs: &[Complex64]) -> f64 {
    eigs.iter().fold(f64::NEG_INFINITY, |m, e| m.max(e.re))
}

/// Controls for inverse iteration on the quadratic pencil.
#[derive(Debug, Clone)]
pub struct ModeOptions {
    /// Relative residual threshold on `(lambda^2 M + lambda D + S) x`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iters: 40 }
    }
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Hermitian quadratic form `x^H A x` of a real symmetric `A`; real-valued.
fn quad_form(a: &DMatrix<f64>, x: &DVector<Complex64>) -> f64 {
    let mut acc = Complex64::ZERO;
    for (j, col) in a.column_iter().enumerate() {
        let mut dot = Complex64::ZERO;
        for (i, aij) in col.iter().enumerate() {
            dot += x[i].conj() * *aij;
        }
        acc += dot * x[j];
    }
    acc.re
}

fn diag_quad_form(d: &DVector<f64>, x: &DVector<Complex64>) -> f64 {
    (0..d.len()).map(|i| d[i] * x[i].norm_sqr()).sum()
}

/// Root of `(x^H M x) l^2 + (x^H D x) l + (x^H S x) = 0` nearest `shift`.
fn rayleigh_quotient(sys: &DiscretizedSystem, x: &DVector<Complex64>, shift: Complex64) -> Complex64 {
    let a = Complex64::new(quad_form(&sys.mass, x), 0.0);
    let b = Complex64::new(diag_quad_form(&sys.damping, x), 0.0);
    let c = Complex64::new(quad_form(&sys.stiffness, x), 0.0);
    let disc = (b * b - 4.0 * a * c).sqrt();
    let r1 = (-b + disc) / (2.0 * a);
    let r2 = (-b - disc) / (2.0 * a);
    if (r1 - shift).norm() <= (r2 - shift).norm() {
        r1
    } else {
        r2
    }
}

/// Eigenpair of `(lambda^2 M + lambda D + S) x = 0` nearest the shift.
///
/// Inverse iteration on the equivalent first-order pencil, with the linear
/// solves reduced to the displacement block, followed by a Rayleigh-quotient
/// eigenvalue estimate. The returned vector is normalized in the energy
/// metric, `x^H S x + |lambda|^2 x^H M x = 1`, with its largest entry rotated
/// to the positive real axis.
pub fn mode_near(
    sys: &DiscretizedSystem,
    shift: Complex64,
    opts: &ModeOptions,
) -> Result<(Complex64, DVector<Complex64>)> {
    let n = sys.total_dofs();
    // Keep the factored matrix comfortably nonsingular even when the shift
    // is an eigenvalue to machine precision.
    let sigma = shift + Complex64::new(1e-10, 1e-10) * shift.norm().max(1.0);
    let m_c = to_complex(&sys.mass);
    let s_c = to_complex(&sys.stiffness);
    let d_c: DVector<Complex64> = sys.damping.map(|v| Complex64::new(v, 0.0));

    let mut q = &s_c + &m_c * (sigma * sigma);
    for i in 0..n {
        q[(i, i)] += sigma * d_c[i];
    }
    let lu = LU::new(q);

    // Pencil iterate (x1, x2); converged states have x2 = lambda x1.
    let mut x1: DVector<Complex64> =
        DVector::from_fn(n, |i, _| Complex64::new(1.0, 0.3 + i as f64 / n as f64));
    let mut x2: DVector<Complex64> = &x1 * sigma;
    let norm0 = (x1.norm_squared() + x2.norm_squared()).sqrt();
    x1 /= Complex64::new(norm0, 0.0);
    x2 /= Complex64::new(norm0, 0.0);

    let scale_m = sys.mass.norm();
    let scale_s = sys.stiffness.norm();
    let scale_d = sys.damping.norm();

    for _ in 0..opts.max_iters {
        // Solve (A - sigma E) y = E x on the block structure: the velocity
        // row gives y2 = x1 + sigma y1, which reduces the displacement row to
        // a single solve with Q(sigma).
        let mut rhs = -(&m_c * (&x2 + &x1 * sigma));
        for i in 0..n {
            rhs[i] -= d_c[i] * x1[i];
        }
        let y1 = lu
            .solve(&rhs)
            .ok_or_else(|| Error::NumericalFailure("singular shifted pencil".into()))?;
        let y2 = &x1 + &y1 * sigma;
        let norm = (y1.norm_squared() + y2.norm_squared()).sqrt();
        x1 = &y1 / Complex64::new(norm, 0.0);
        x2 = &y2 / Complex64::new(norm, 0.0);

        let lambda = rayleigh_quotient(sys, &x1, sigma);
        let mut res = &s_c * &x1 + &m_c * &x1 * (lambda * lambda);
        for i in 0..n {
            res[i] += lambda * d_c[i] * x1[i];
        }
        let scale = lambda.norm_sqr() * scale_m + lambda.norm() * scale_d + scale_s;
        if res.norm() / (scale * x1.norm()) < opts.tol {
            let energy = quad_form(&sys.stiffness, &x1)
                + lambda.norm_sqr() * quad_form(&sys.mass, &x1);
            let mut x = x1 / Complex64::new(energy.sqrt(), 0.0);
            let imax = (0..n).fold(0, |b, i| if x[i].norm() > x[b].norm() { i } else { b });
            let phase = x[imax] / x[imax].norm();
            x /= phase;
            return Ok((lambda, x));
        }
    }
    Err(Error::NotAnEigenvalue(format!(
        "inverse iteration stalled near shift {shift}"
    )))
}

/// The `count` slowest-oscillating eigenpairs (smallest `|Im lambda|`,
/// upper half plane plus the real axis), refined by inverse iteration.
pub fn lowest_modes(
    sys: &DiscretizedSystem,
    count: usize,
    dense_limit: usize,
    opts: &ModeOptions,
) -> Result<Vec<(Complex64, DVector<Complex64>)>> {
    let eigs = discrete_spectrum(sys, dense_limit)?;
    let scale = eigs.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let mut upper: Vec<Complex64> = eigs
        .into_iter()
        .filter(|e| e.im >= -1e-10 * scale)
        .collect();
    upper.sort_by(|a, b| {
        a.im.abs()
            .total_cmp(&b.im.abs())
            .then(a.re.abs().total_cmp(&b.re.abs()))
    });
    if upper.len() < count {
        return Err(Error::IncompleteSpectrum(format!(
            "requested {count} modes, spectrum holds {}",
            upper.len()
        )));
    }
    upper
        .iter()
        .take(count)
        .map(|e| mode_near(sys, *e, opts))
        .collect()
}
