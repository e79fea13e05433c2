//! Closed-form spectral route for the transverse branch.
//!
//! Separating `z = e^{lambda t} u(x)` in the rotary-inertia beam equation
//! gives `K u'''' - alpha lambda^2 u'' + lambda^2 u = 0` plus the boundary
//! rows `u(0) = u'(0) = u(L) = 0` and `u''(L) + gamma0 lambda u'(L) = 0`.
//! Eigenvalues are the zeros of a 4x4 boundary determinant. To keep that
//! determinant free of branch cuts it is built on the basis
//! `cosh(mu x)` and `sinh(mu x)/mu` with `mu^2` running over the two roots of
//! the exponent quadratic: both basis functions are entire in `mu^2`, and the
//! determinant is symmetric under swapping the roots, hence an entire
//! function of the spectral variable.
//!
//! Root finding works in the variable `s` with `lambda = i s`, so the damped
//! families sit just above the positive real `s` axis.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::BeamParams;

use super::contour::{count_roots_in_box, ContourOptions};

/// Near-unity window around the inadmissible transverse gain.
const DEGENERATE_GAIN_TOL: f64 = 1e-9;

/// Characteristic exponents squared `(theta0, xi0)` at spectral variable `s`.
///
/// They are the two roots of `K zeta^2 - alpha s^2 zeta - s^2 = 0` up to
/// sign: `theta0` is the oscillatory branch (`~ alpha s^2 / K` for large
/// real `s`), `xi0` the saturating one (`-> 1/alpha`). Exact identities:
/// `K theta0 xi0 = s^2` and `K (theta0 - xi0) = alpha s^2`.
///
/// The labels are meaningful for `s` away from the segment
/// `[0, 2 i sqrt(K)/alpha]` of the imaginary axis where the two branches
/// collide; the boundary determinant below does not depend on the labeling.
pub fn theta_xi(params: &BeamParams, s: Complex64) -> (Complex64, Complex64) {
    let s2 = s * s;
    if s2 == Complex64::ZERO {
        return (Complex64::ZERO, Complex64::ZERO);
    }
    let a = params.alpha;
    let k = params.bending;
    let disc = a * a * s2 * s2 + 4.0 * k * s2;
    let theta = (a * s2 + disc.sqrt()) / (2.0 * k);
    let xi = s2 / (k * theta);
    (theta, xi)
}

/// `sinh(z)/z`, stable near the origin.
fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        Complex64::ONE + z2 / 6.0 * (Complex64::ONE + z2 / 20.0)
    } else {
        z.sinh() / z
    }
}

/// Boundary determinant from the two exponent roots; symmetric in
/// `(zeta1, zeta2)`.
fn boundary_matrix(
    zeta1: Complex64,
    zeta2: Complex64,
    length: f64,
    gamma_lambda: Complex64,
) -> Matrix4<Complex64> {
    let one = Complex64::ONE;
    let zero = Complex64::ZERO;
    let mu1 = zeta1.sqrt();
    let mu2 = zeta2.sqrt();
    // Basis per root: f(x) = cosh(mu x), g(x) = sinh(mu x)/mu; both entire
    // in zeta = mu^2. f' = zeta g, g' = f, f'' = zeta f, g'' = zeta g.
    let c1 = (mu1 * length).cosh();
    let s1 = length * sinhc(mu1 * length);
    let c2 = (mu2 * length).cosh();
    let s2 = length * sinhc(mu2 * length);
    Matrix4::new(
        one,
        zero,
        one,
        zero,
        zero,
        one,
        zero,
        one,
        c1,
        s1,
        c2,
        s2,
        zeta1 * (c1 + gamma_lambda * s1),
        zeta1 * s1 + gamma_lambda * c1,
        zeta2 * (c2 + gamma_lambda * s2),
        zeta2 * s2 + gamma_lambda * c2,
    )
}

/// One evaluation of the characteristic function at `s`.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicEval {
    /// Raw determinant value; entire in `s`, used for phase and Newton.
    pub det: Complex64,
    /// Determinant scaled by the product of row norms; dimensionless and in
    /// `[0, 1]`-ish range, used for convergence tests and reporting.
    pub residual: f64,
}

/// Evaluates the transverse characteristic function at `s` (`lambda = i s`).
pub fn characteristic(params: &BeamParams, gamma0: f64, s: Complex64) -> CharacteristicEval {
    let (theta, xi) = theta_xi(params, s);
    let lambda = Complex64::i() * s;
    let m = boundary_matrix(-theta, xi, params.length, gamma0 * lambda);
    let det = m.determinant();
    let mut scale = 1.0;
    for r in 0..4 {
        let norm = m.row(r).iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        scale *= norm.max(f64::MIN_POSITIVE);
    }
    CharacteristicEval {
        det,
        residual: det.norm() / scale,
    }
}

/// Ratio of the transverse gain to its inadmissible value `sqrt(alpha/K)`.
fn gain_ratio(params: &BeamParams, gamma0: f64) -> f64 {
    gamma0 * (params.bending / params.alpha).sqrt()
}

/// Asymptotic root location for mode `n >= 1` in the `s` plane.
///
/// The quantization happens in the oscillatory wavenumber: with
/// `ghat = gamma0 sqrt(K/alpha)` the roots approach `w_n = kappa_n + i c`
/// where `c = ln((ghat + 1)/|ghat - 1|) / (2 L)` and the lattice is
/// `kappa_n = (n + 1) pi / L` above the impedance-matched gain,
/// `kappa_n = (n + 1/2) pi / L` below it (offsets chosen so that seed `n`
/// pairs with the `n`-th root of the family by increasing real part). The
/// wavenumber then maps to the spectral variable through the dispersion
/// relation `s^2 (1 + alpha theta) = K theta^2`, `theta = w^2`; skipping
/// that map misplaces low seeds by `O(1/n)`. At `ghat = 1` the family
/// degenerates and no asymptote exists.
pub fn rayleigh_seed(params: &BeamParams, gamma0: f64, n: usize) -> Result<Complex64> {
    let ghat = gain_ratio(params, gamma0);
    if (ghat - 1.0).abs() <= DEGENERATE_GAIN_TOL {
        return Err(Error::DegenerateFrequency(format!(
            "transverse gain {gamma0} sits at the impedance-matched value sqrt(alpha/K)"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("mode index starts at 1".into()));
    }
    let l = params.length;
    let kappa = if ghat > 1.0 {
        (n as f64 + 1.0) * std::f64::consts::PI / l
    } else {
        (n as f64 + 0.5) * std::f64::consts::PI / l
    };
    let c = ((ghat + 1.0) / (ghat - 1.0).abs()).ln() / (2.0 * l);
    let theta = Complex64::new(kappa, c).powu(2);
    Ok(params.bending.sqrt() * theta / (Complex64::ONE + params.alpha * theta).sqrt())
}

/// Options for the transverse root search.
#[derive(Debug, Clone)]
pub struct RootSearchOptions {
    /// Convergence threshold on the normalized residual.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Highest mode index handled by the dense grid stage instead of
    /// asymptotic seeding.
    pub crossover: usize,
    /// Verify each root and the whole strip by contour counting.
    pub certify: bool,
    pub contour: ContourOptions,
}

impl Default for RootSearchOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            newton_max_iters: 50,
            crossover: 5,
            certify: true,
            contour: ContourOptions::default(),
        }
    }
}

/// A located zero of the transverse characteristic function.
#[derive(Debug, Clone, Copy)]
pub struct RayleighRoot {
    /// Position in the family, counted from 1 by increasing `Re s`.
    pub n: usize,
    pub s: Complex64,
    /// Eigenvalue `lambda = i s`.
    pub lambda: Complex64,
    /// Asymptotic prediction for the same index.
    pub seed: Complex64,
    /// Normalized residual at the root.
    pub residual: f64,
    /// True when a contour count around this root found exactly one zero.
    pub certified: bool,
}

fn newton(
    params: &BeamParams,
    gamma0: f64,
    start: Complex64,
    opts: &RootSearchOptions,
) -> Result<(Complex64, f64)> {
    let mut s = start;
    for _ in 0..opts.newton_max_iters {
        let eval = characteristic(params, gamma0, s);
        if eval.residual < opts.newton_tol {
            return Ok((s, eval.residual));
        }
        let h = 1e-7 * s.norm().max(1.0);
        let gp = (characteristic(params, gamma0, s + h).det
            - characteristic(params, gamma0, s - h).det)
            / (2.0 * h);
        if gp == Complex64::ZERO {
            return Err(Error::RootFailure(format!(
                "flat characteristic derivative at s = {s}"
            )));
        }
        let step = eval.det / gp;
        s -= step;
        if step.norm() <= 1e-15 * s.norm().max(1.0) {
            break;
        }
    }
    let eval = characteristic(params, gamma0, s);
    if eval.residual < opts.newton_tol {
        Ok((s, eval.residual))
    } else {
        Err(Error::RootFailure(format!(
            "no convergence from start {start}: residual {} after {} iterations",
            eval.residual, opts.newton_max_iters
        )))
    }
}

/// Local minima of the normalized residual on a rectangular grid.
fn grid_minima(
    params: &BeamParams,
    gamma0: f64,
    re: (f64, f64),
    im: (f64, f64),
    pitch: f64,
) -> Vec<Complex64> {
    let nx = (((re.1 - re.0) / pitch).ceil() as usize).max(2) + 1;
    let ny = (((im.1 - im.0) / pitch).ceil() as usize).max(2) + 1;
    let mut vals = vec![0.0; nx * ny];
    let point = |i: usize, j: usize| {
        Complex64::new(
            re.0 + (re.1 - re.0) * i as f64 / (nx - 1) as f64,
            im.0 + (im.1 - im.0) * j as f64 / (ny - 1) as f64,
        )
    };
    for i in 0..nx {
        for j in 0..ny {
            vals[i * ny + j] = characteristic(params, gamma0, point(i, j)).residual;
        }
    }
    let mut minima = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let v = vals[i * ny + j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64
                    {
                        continue;
                    }
                    if vals[ii as usize * ny + jj as usize] <= v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                minima.push(point(i, j));
            }
        }
    }
    minima
}

/// Finds the first `n_max` zeros of the transverse characteristic function in
/// the right half of the `s` plane.
///
/// Low modes come from a dense residual grid followed by Newton polish; high
/// modes start from the asymptotic seeds. With `certify` set, every root is
/// isolated by a winding-number count and the count over the whole search
/// strip must match the number of roots found.
pub fn find_rayleigh_roots(
    params: &BeamParams,
    gamma0: f64,
    n_max: usize,
    opts: &RootSearchOptions,
) -> Result<Vec<RayleighRoot>> {
    params.validate()?;
    if gamma0 < 0.0 {
        return Err(Error::InvalidParameter("negative transverse gain".into()));
    }
    if n_max == 0 {
        return Ok(Vec::new());
    }
    // Also rejects the impedance-matched gain.
    let first_seed = rayleigh_seed(params, gamma0, 1)?;
    let last_seed = rayleigh_seed(params, gamma0, n_max)?;

    let spacing = (params.bending / params.alpha).sqrt() * std::f64::consts::PI / params.length;
    let im_top = first_seed.im + 2.0 * spacing;
    let im_bottom = -0.3 * spacing;
    // The lower edge keeps clear of the spurious determinant zero at s = 0
    // while staying below the lowest family member.
    let re_lo = 0.3 * spacing;
    let re_hi = last_seed.re + 0.45 * spacing;

    let mut roots: Vec<(Complex64, f64)> = Vec::new();
    let push_unique = |roots: &mut Vec<(Complex64, f64)>, cand: (Complex64, f64)| {
        let tol = 1e-6 * cand.0.norm().max(1.0);
        if roots.iter().all(|(r, _)| (r - cand.0).norm() > tol) {
            roots.push(cand);
        }
    };

    // Dense stage over the non-asymptotic region.
    let grid_n = opts.crossover.min(n_max);
    let grid_hi = rayleigh_seed(params, gamma0, grid_n)?.re + 0.45 * spacing;
    for start in grid_minima(
        params,
        gamma0,
        (re_lo, grid_hi),
        (im_bottom + 1e-3 * spacing, im_top),
        0.25 * spacing,
    ) {
        if let Ok(root) = newton(params, gamma0, start, opts) {
            if root.0.re > re_lo
                && root.0.re < grid_hi
                && root.0.im > im_bottom
                && root.0.im < im_top
            {
                push_unique(&mut roots, root);
            }
        }
    }

    // Seeded stage for the asymptotic tail.
    for n in (grid_n + 1)..=n_max {
        let seed = rayleigh_seed(params, gamma0, n)?;
        let root = newton(params, gamma0, seed, opts)?;
        push_unique(&mut roots, root);
    }

    roots.retain(|(s, _)| s.re > re_lo && s.re < re_hi && s.im > im_bottom && s.im < im_top);
    roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));

    let mut out: Vec<RayleighRoot> = Vec::with_capacity(roots.len());
    for (i, (s, residual)) in roots.iter().enumerate() {
        out.push(RayleighRoot {
            n: i + 1,
            s: *s,
            lambda: Complex64::i() * s,
            seed: rayleigh_seed(params, gamma0, i + 1)?,
            residual: *residual,
            certified: false,
        });
    }

    if opts.certify {
        let mut copts = opts.contour.clone();
        copts.max_segment = Some(copts.max_segment.unwrap_or(0.2 * spacing));
        let f = |z: Complex64| characteristic(params, gamma0, z).det;
        for i in 0..out.len() {
            let s = out[i].s;
            let mut half = 0.4 * spacing;
            for (j, other) in out.iter().enumerate() {
                if j != i {
                    half = half.min(0.45 * (other.s - s).norm());
                }
            }
            let count = count_roots_in_box(
                &f,
                s - Complex64::new(half, half),
                s + Complex64::new(half, half),
                &copts,
            )?;
            out[i].certified = count == 1;
        }
        let strip = count_roots_in_box(
            &f,
            Complex64::new(re_lo, im_bottom),
            Complex64::new(re_hi, im_top),
            &copts,
        )?;
        if strip != out.len() {
            return Err(Error::IncompleteSpectrum(format!(
                "strip contour count {strip} but {} roots located",
                out.len()
            )));
        }
    }
    Ok(out)
}

/// Closed-form eigenfunction of the transverse branch at a characteristic
/// root `s`.
#[derive(Debug, Clone)]
pub struct RayleighMode {
    zeta1: Complex64,
    zeta2: Complex64,
    /// Coefficients on `[cosh(mu1 x), sinh(mu1 x)/mu1, cosh(mu2 x), sinh(mu2 x)/mu2]`.
    pub coeffs: [Complex64; 4],
}

impl RayleighMode {
    pub fn evaluate(&self, x: f64) -> Complex64 {
        let mu1 = self.zeta1.sqrt();
        let mu2 = self.zeta2.sqrt();
        self.coeffs[0] * (mu1 * x).cosh()
            + self.coeffs[1] * x * sinhc(mu1 * x)
            + self.coeffs[2] * (mu2 * x).cosh()
            + self.coeffs[3] * x * sinhc(mu2 * x)
    }
}

/// Null vector of the boundary matrix at a root; fails off the spectrum.
pub fn rayleigh_mode_shape(params: &BeamParams, gamma0: f64, s: Complex64) -> Result<RayleighMode> {
    let eval = characteristic(params, gamma0, s);
    if eval.residual > 1e-8 {
        return Err(Error::NotAnEigenvalue(format!(
            "characteristic residual {} at s = {s}",
            eval.residual
        )));
    }
    let (theta, xi) = theta_xi(params, s);
    let (zeta1, zeta2) = (-theta, xi);
    let m = boundary_matrix(zeta1, zeta2, params.length, gamma0 * Complex64::i() * s);
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD of boundary matrix failed".into()))?;
    let row = v_t.row(3);
    Ok(RayleighMode {
        zeta1,
        zeta2,
        coeffs: [row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj()],
    })
}
