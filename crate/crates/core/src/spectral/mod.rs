//! Two independent routes to the spectrum.
//!
//! The discrete route takes eigenvalues of the assembled generator; the
//! closed-form route solves the per-branch characteristic equations of the
//! decoupled model (transverse by certified root finding, longitudinal
//! exactly). Agreement between the two is the main correctness check of the
//! whole pipeline.

pub mod contour;
pub mod modes;
pub mod rayleigh;
pub mod wave;

use std::io::Write as IoWrite;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BeamParams, Gains, LayerStack};

pub use contour::{count_roots_in_box, ContourOptions};
pub use modes::{
    discrete_spectrum, lowest_modes, mode_near, spectral_abscissa, ModeOptions,
    DEFAULT_DENSE_LIMIT,
};
pub use rayleigh::{
    characteristic, find_rayleigh_roots, rayleigh_mode_shape, rayleigh_seed, theta_xi,
    CharacteristicEval, RayleighMode, RayleighRoot, RootSearchOptions,
};
pub use wave::{wave_lambda, wave_residual, wave_theta};

/// Origin of one spectrum entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Dense eigensolve of the assembled generator.
    Pencil,
    /// Transverse closed-form characteristic roots.
    Rayleigh,
    /// Longitudinal closed-form family of odd layer with list index `k`.
    Wave(usize),
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Pencil => write!(f, "pencil"),
            Branch::Rayleigh => write!(f, "rayleigh"),
            // Physical layer number: odd layers are 1, 3, 5, ...
            Branch::Wave(k) => write!(f, "wave{}", 2 * k + 1),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumEntry {
    pub branch: Branch,
    /// Index within its branch family.
    pub n: usize,
    pub lambda: Complex64,
    /// Normalized characteristic residual; zero for pencil entries, whose
    /// accuracy is set by the dense eigensolver instead.
    pub residual: f64,
    pub certified: bool,
}

/// An ordered collection of eigenvalues with provenance.
#[derive(Debug, Clone, Default)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    pub fn from_eigenvalues(eigs: &[Complex64]) -> Self {
        let entries = eigs
            .iter()
            .enumerate()
            .map(|(i, e)| SpectrumEntry {
                branch: Branch::Pencil,
                n: i + 1,
                lambda: *e,
                residual: 0.0,
                certified: false,
            })
            .collect();
        Self { entries }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn abscissa(&self) -> f64 {
        self.entries
            .iter()
            .fold(f64::NEG_INFINITY, |m, e| m.max(e.lambda.re))
    }

    pub fn certified_count(&self) -> usize {
        self.entries.iter().filter(|e| e.certified).count()
    }

    /// CSV with the fixed header
    /// `branch,n,re_lambda,im_lambda,residual,certified`.
    pub fn write_csv<W: IoWrite>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "branch,n,re_lambda,im_lambda,residual,certified")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{}",
                e.branch,
                e.n,
                e.lambda.re,
                e.lambda.im,
                e.residual,
                u8::from(e.certified)
            )?;
        }
        Ok(())
    }
}

/// Closed-form spectrum of the decoupled model: certified transverse roots
/// (modes `1..=n_max`) followed by each longitudinal family
/// (modes `0..n_max`, conjugates not listed).
///
/// Rejects coupled stacks; with nonzero core shear no closed form exists.
pub fn closed_form_spectrum(
    params: &BeamParams,
    stack: &LayerStack,
    gains: &Gains,
    n_max: usize,
    opts: &RootSearchOptions,
) -> Result<Spectrum> {
    params.validate()?;
    stack.validate()?;
    gains.validate(stack)?;
    if !stack.is_decoupled() {
        return Err(Error::InvalidParameter(
            "closed-form route needs zero shear in every even layer".into(),
        ));
    }
    let mut entries = Vec::new();
    for root in find_rayleigh_roots(params, gains.gamma0, n_max, opts)? {
        entries.push(SpectrumEntry {
            branch: Branch::Rayleigh,
            n: root.n,
            lambda: root.lambda,
            residual: root.residual,
            certified: root.certified,
        });
    }
    for (k, layer) in stack.odd.iter().enumerate() {
        for n in 0..n_max {
            let lambda = wave_lambda(layer, params.length, gains.gamma_odd[k], n)?;
            let residual = wave_residual(layer, params.length, gains.gamma_odd[k], lambda)?;
            entries.push(SpectrumEntry {
                branch: Branch::Wave(k),
                n,
                lambda,
                residual,
                certified: true,
            });
        }
    }
    Ok(Spectrum { entries })
}
