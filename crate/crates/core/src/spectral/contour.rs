//! Zero counting by the argument principle on rectangles.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Controls for the adaptive boundary walk.
#[derive(Debug, Clone)]
pub struct ContourOptions {
    /// Bisection depth limit per boundary segment.
    pub max_depth: usize,
    /// Retries with a 1% inflated box when the walk hits a near-zero value
    /// or an unresolvable phase jump.
    pub max_dilations: usize,
    /// Longest accepted boundary segment. Defaults to an eighth of the
    /// shorter box edge; callers that know the root spacing should set it
    /// below that spacing, since a long segment can hide a full phase wrap
    /// between two samples.
    pub max_segment: Option<f64>,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            max_depth: 26,
            max_dilations: 4,
            max_segment: None,
        }
    }
}

/// Phase increment of `f` along the segment `[a, b]`.
///
/// A segment is accepted only when it is short, its endpoint phases differ
/// by at most `pi/2`, and its endpoint magnitudes stay within a factor four;
/// anything else is bisected. The magnitude test guards against a root close
/// to the segment whose symmetric phase contribution would alias away.
fn phase_sweep(
    f: &dyn Fn(Complex64) -> Complex64,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: usize,
    max_len: f64,
) -> Result<f64> {
    if fa == Complex64::ZERO || fb == Complex64::ZERO {
        return Err(Error::ContourResolutionFailure(
            "zero of the function on the contour".into(),
        ));
    }
    let turn = (fb / fa).arg();
    let calm = turn.abs() <= std::f64::consts::FRAC_PI_2;
    let short = (b - a).norm() <= max_len;
    let flat = (fb.norm() / fa.norm()).ln().abs() <= 4.0_f64.ln();
    if calm && short && flat {
        return Ok(turn);
    }
    if depth == 0 {
        if calm {
            return Ok(turn);
        }
        return Err(Error::ContourResolutionFailure(format!(
            "phase jump {turn:.3} rad not resolved between {a} and {b}"
        )));
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    Ok(phase_sweep(f, a, mid, fa, fm, depth - 1, max_len)?
        + phase_sweep(f, mid, b, fm, fb, depth - 1, max_len)?)
}

fn try_count(
    f: &dyn Fn(Complex64) -> Complex64,
    lo: Complex64,
    hi: Complex64,
    opts: &ContourOptions,
) -> Result<usize> {
    let corners = [
        lo,
        Complex64::new(hi.re, lo.im),
        hi,
        Complex64::new(lo.re, hi.im),
    ];
    let values: Vec<Complex64> = corners.iter().map(|c| f(*c)).collect();
    let max_len = opts
        .max_segment
        .unwrap_or_else(|| 0.125 * (hi.re - lo.re).min(hi.im - lo.im));
    let mut total = 0.0;
    for i in 0..4 {
        let j = (i + 1) % 4;
        total += phase_sweep(
            f,
            corners[i],
            corners[j],
            values[i],
            values[j],
            opts.max_depth,
            max_len,
        )?;
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let count = winding.round();
    if (winding - count).abs() > 0.25 || count < 0.0 {
        return Err(Error::ContourResolutionFailure(format!(
            "winding number {winding:.6} is not a nonnegative integer"
        )));
    }
    Ok(count as usize)
}

/// Number of zeros (with multiplicity) of an analytic function inside the
/// axis-aligned rectangle with corners `lo` and `hi`.
///
/// A zero sitting on or very near the boundary makes the phase walk fail;
/// the rectangle is then inflated by 1% about its center and the count is
/// retried, so such zeros end up strictly inside.
pub fn count_roots_in_box(
    f: &dyn Fn(Complex64) -> Complex64,
    lo: Complex64,
    hi: Complex64,
    opts: &ContourOptions,
) -> Result<usize> {
    if !(lo.re < hi.re && lo.im < hi.im) {
        return Err(Error::InvalidParameter(format!(
            "degenerate contour box {lo} .. {hi}"
        )));
    }
    let center = 0.5 * (lo + hi);
    let mut scale = 1.0;
    let mut last = None;
    for _ in 0..=opts.max_dilations {
        let result = try_count(
            f,
            center + scale * (lo - center),
            center + scale * (hi - center),
            opts,
        );
        match result {
            Ok(count) => return Ok(count),
            Err(e) => last = Some(e),
        }
        scale *= 1.01;
    }
    Err(last.unwrap())
}
