//! Parameters of the layered beam and the coupling data derived from them.
//!
//! The structure is a laminated beam with `2m + 1` alternating layers. Odd
//! layers are stiff, share one transverse deflection `z`, and each carries a
//! longitudinal displacement `v_k`; even layers are compliant cores that
//! deform in shear. Transverse motion has bending stiffness `K` and rotary
//! inertia coefficient `alpha`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for the admissibility check.
pub const ASSUMPTION_TOL: f64 = 1e-12;

/// Transverse beam parameters on the interval `(0, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamParams {
    /// Rotary inertia coefficient, `alpha > 0`.
    pub alpha: f64,
    /// Bending stiffness, `K > 0`.
    #[serde(rename = "K")]
    pub bending: f64,
    /// Beam length, `L > 0`.
    #[serde(rename = "L")]
    pub length: f64,
}

impl BeamParams {
    pub fn new(alpha: f64, bending: f64, length: f64) -> Result<Self> {
        let p = Self { alpha, bending, length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("K", self.bending), ("L", self.length)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Asymptotic transverse wave speed `sqrt(K / alpha)`.
    pub fn transverse_speed(&self) -> f64 {
        (self.bending / self.alpha).sqrt()
    }
}

/// One stiff (odd) layer: density, thickness, Young modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OddLayer {
    pub rho: f64,
    pub h: f64,
    #[serde(rename = "E")]
    pub young: f64,
}

impl OddLayer {
    /// Longitudinal wave speed `sqrt(E / rho)`.
    pub fn wave_speed(&self) -> f64 {
        (self.young / self.rho).sqrt()
    }
}

/// One compliant (even) layer: thickness and shear modulus.
///
/// `G = 0` is allowed and removes the shear coupling through this core,
/// which is how the decoupled comparison system is expressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvenLayer {
    pub h: f64,
    #[serde(rename = "G")]
    pub shear: f64,
}

/// The full layer stack: `m + 1` odd layers interleaved with `m` even cores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerStack {
    pub odd: Vec<OddLayer>,
    pub even: Vec<EvenLayer>,
}

impl LayerStack {
    pub fn new(odd: Vec<OddLayer>, even: Vec<EvenLayer>) -> Result<Self> {
        let s = Self { odd, even };
        s.validate()?;
        Ok(s)
    }

    /// Uniform stack of `2m + 1` unit layers with shear modulus `g` in every core.
    pub fn uniform_unit(m: usize, g: f64) -> Result<Self> {
        Self::new(
            vec![OddLayer { rho: 1.0, h: 1.0, young: 1.0 }; m + 1],
            vec![EvenLayer { h: 1.0, shear: g }; m],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.even.len();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "a sandwich stack needs at least one core layer (m >= 1)".into(),
            ));
        }
        if self.odd.len() != m + 1 {
            return Err(Error::InvalidParameter(format!(
                "layer counts must interleave: {} odd layers for {} cores (want {})",
                self.odd.len(),
                m,
                m + 1
            )));
        }
        for (i, l) in self.odd.iter().enumerate() {
            for (name, v) in [("rho", l.rho), ("h", l.h), ("E", l.young)] {
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "odd layer {i}: {name} must be positive and finite, got {v}"
                    )));
                }
            }
        }
        for (i, l) in self.even.iter().enumerate() {
            if !l.h.is_finite() || l.h <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "even layer {i}: h must be positive and finite, got {}",
                    l.h
                )));
            }
            if !l.shear.is_finite() || l.shear < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "even layer {i}: G must be nonnegative and finite, got {}",
                    l.shear
                )));
            }
        }
        Ok(())
    }

    /// Number of core layers `m`.
    pub fn m(&self) -> usize {
        self.even.len()
    }

    /// Copy of the stack with every core shear modulus set to zero.
    pub fn decoupled(&self) -> Self {
        let mut s = self.clone();
        for l in &mut s.even {
            l.shear = 0.0;
        }
        s
    }

    /// True when every core has `G = 0`.
    pub fn is_decoupled(&self) -> bool {
        self.even.iter().all(|l| l.shear == 0.0)
    }
}

/// Boundary feedback gains: `gamma0` acts on the transverse slope at `x = L`,
/// `gamma_odd[k]` on the longitudinal velocity of odd layer `k` at `x = L`.
/// All gains are nonnegative; zero gains give the conservative limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub gamma0: f64,
    pub gamma_odd: Vec<f64>,
}

impl Gains {
    pub fn new(gamma0: f64, gamma_odd: Vec<f64>) -> Result<Self> {
        let g = Self { gamma0, gamma_odd };
        g.validate_standalone()?;
        Ok(g)
    }

    /// Same gain on every damped end: `gamma0 = gamma_odd[k] = g`.
    pub fn uniform(m: usize, g: f64) -> Result<Self> {
        Self::new(g, vec![g; m + 1])
    }

    pub fn zero(m: usize) -> Self {
        Self { gamma0: 0.0, gamma_odd: vec![0.0; m + 1] }
    }

    fn validate_standalone(&self) -> Result<()> {
        if !self.gamma0.is_finite() || self.gamma0 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma0 must be nonnegative and finite, got {}",
                self.gamma0
            )));
        }
        for (k, g) in self.gamma_odd.iter().enumerate() {
            if !g.is_finite() || *g < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "gamma_odd[{k}] must be nonnegative and finite, got {g}"
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self, stack: &LayerStack) -> Result<()> {
        self.validate_standalone()?;
        if self.gamma_odd.len() != stack.odd.len() {
            return Err(Error::DimensionMismatch {
                expected: stack.odd.len(),
                got: self.gamma_odd.len(),
            });
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma0 == 0.0 && self.gamma_odd.iter().all(|g| *g == 0.0)
    }
}

/// Layer coupling matrices.
///
/// `A` is `m x (m+1)` with `a_ij = 1/2` for `j = i, i+1`; it averages adjacent
/// odd-layer quantities onto core `i`. `B` is `m x (m+1)` with `b_ii = -1`,
/// `b_i,i+1 = +1`; it differences adjacent odd-layer displacements. Rows of
/// `A` sum to one, rows of `B` to zero.
pub fn build_coupling_matrices(m: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if m == 0 {
        return Err(Error::InvalidParameter("coupling matrices need m >= 1".into()));
    }
    let mut a = DMatrix::zeros(m, m + 1);
    let mut b = DMatrix::zeros(m, m + 1);
    for i in 0..m {
        a[(i, i)] = 0.5;
        a[(i, i + 1)] = 0.5;
        b[(i, i)] = -1.0;
        b[(i, i + 1)] = 1.0;
    }
    Ok((a, b))
}

/// Shear kinematics vector `N`, one entry per core:
/// `N_j = (h_odd[j] + h_odd[j+1]) / (2 h_even[j]) + 1`.
///
/// Every entry is strictly greater than one.
pub fn compute_n(stack: &LayerStack) -> Result<DVector<f64>> {
    stack.validate()?;
    let m = stack.m();
    let mut n = DVector::zeros(m);
    for j in 0..m {
        n[j] = (stack.odd[j].h + stack.odd[j + 1].h) / (2.0 * stack.even[j].h) + 1.0;
    }
    Ok(n)
}

/// Bundle of `A`, `B`, and `N` for one stack.
#[derive(Debug, Clone)]
pub struct CouplingData {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub n_vec: DVector<f64>,
}

impl CouplingData {
    pub fn for_stack(stack: &LayerStack) -> Result<Self> {
        let (a, b) = build_coupling_matrices(stack.m())?;
        let n_vec = compute_n(stack)?;
        Ok(Self { a, b, n_vec })
    }
}

/// One flagged admissibility violation.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionViolation {
    /// Which constraint failed, e.g. `"gamma0 != sqrt(alpha/K)"`.
    pub constraint: String,
    pub gain: f64,
    pub forbidden_value: f64,
}

/// Result of the admissibility check.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub violations: Vec<AssumptionViolation>,
}

impl AssumptionReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            let list: Vec<String> =
                self.violations.iter().map(|v| v.constraint.clone()).collect();
            Err(Error::AssumptionViolation(list.join("; ")))
        }
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Checks the gain admissibility conditions `gamma0 != sqrt(alpha/K)` and,
/// for every odd layer `k`, `gamma_k != sqrt(rho_k/E_k)`.
///
/// Equality within relative tolerance `tol` is flagged. These are the values
/// at which the damped end absorbs its wave family exactly and the closed-form
/// spectral branches degenerate.
pub fn validate_assumption(
    params: &BeamParams,
    stack: &LayerStack,
    gains: &Gains,
    tol: f64,
) -> Result<AssumptionReport> {
    params.validate()?;
    stack.validate()?;
    gains.validate(stack)?;
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {tol}")));
    }

    let mut violations = Vec::new();
    let beam_critical = (params.alpha / params.bending).sqrt();
    if relative_gap(gains.gamma0, beam_critical) <= tol {
        violations.push(AssumptionViolation {
            constraint: format!("gamma0 != sqrt(alpha/K) = {beam_critical:.6e}"),
            gain: gains.gamma0,
            forbidden_value: beam_critical,
        });
    }
    for (k, layer) in stack.odd.iter().enumerate() {
        let critical = (layer.rho / layer.young).sqrt();
        if relative_gap(gains.gamma_odd[k], critical) <= tol {
            violations.push(AssumptionViolation {
                constraint: format!(
                    "gamma_odd[{k}] != sqrt(rho/E) = {critical:.6e}"
                ),
                gain: gains.gamma_odd[k],
                forbidden_value: critical,
            });
        }
    }
    Ok(AssumptionReport { violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coupling_matrices_m1() {
        let (a, b) = build_coupling_matrices(1).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(1, 2, &[0.5, 0.5]));
        assert_eq!(b, DMatrix::from_row_slice(1, 2, &[-1.0, 1.0]));
    }

    #[test]
    fn coupling_matrices_m2() {
        let (a, b) = build_coupling_matrices(2).unwrap();
        assert_eq!(
            a,
            DMatrix::from_row_slice(2, 3, &[0.5, 0.5, 0.0, 0.0, 0.5, 0.5])
        );
        assert_eq!(
            b,
            DMatrix::from_row_slice(2, 3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0])
        );
    }

    #[test]
    fn coupling_matrices_reject_m0() {
        assert!(build_coupling_matrices(0).is_err());
    }

    #[test]
    fn n_vector_unit_thicknesses() {
        let stack = LayerStack::uniform_unit(1, 1.0).unwrap();
        let n = compute_n(&stack).unwrap();
        assert_eq!(n[0], 2.0);
    }

    #[test]
    fn n_vector_mixed_thicknesses() {
        // h1 = h3 = 2, h2 = 1 gives N = [3].
        let stack = LayerStack::new(
            vec![
                OddLayer { rho: 1.0, h: 2.0, young: 1.0 },
                OddLayer { rho: 1.0, h: 2.0, young: 1.0 },
            ],
            vec![EvenLayer { h: 1.0, shear: 1.0 }],
        )
        .unwrap();
        let n = compute_n(&stack).unwrap();
        assert_eq!(n[0], 3.0);
    }

    #[test]
    fn n_vector_matches_matrix_product() {
        // Independent route: N = h_E^{-1} A h_O 1 + 1.
        let stack = LayerStack::new(
            vec![
                OddLayer { rho: 1.0, h: 0.7, young: 2.0 },
                OddLayer { rho: 2.0, h: 1.3, young: 1.0 },
                OddLayer { rho: 0.5, h: 0.4, young: 3.0 },
            ],
            vec![EvenLayer { h: 0.2, shear: 1.0 }, EvenLayer { h: 0.9, shear: 0.5 }],
        )
        .unwrap();
        let (a, _) = build_coupling_matrices(stack.m()).unwrap();
        let h_odd = DVector::from_iterator(3, stack.odd.iter().map(|l| l.h));
        let prod = &a * h_odd;
        let n = compute_n(&stack).unwrap();
        for j in 0..stack.m() {
            let expected = prod[j] / stack.even[j].h + 1.0;
            assert!((n[j] - expected).abs() <= 1e-15 * expected.abs());
            assert!(n[j] > 1.0);
        }
    }

    #[test]
    fn stack_validation_rejects_bad_counts() {
        let err = LayerStack::new(
            vec![OddLayer { rho: 1.0, h: 1.0, young: 1.0 }],
            vec![EvenLayer { h: 1.0, shear: 1.0 }],
        );
        assert!(err.is_err());
    }

    #[test]
    fn stack_validation_rejects_nonpositive() {
        let err = LayerStack::new(
            vec![
                OddLayer { rho: 1.0, h: 1.0, young: 1.0 },
                OddLayer { rho: -1.0, h: 1.0, young: 1.0 },
            ],
            vec![EvenLayer { h: 1.0, shear: 1.0 }],
        );
        assert!(err.is_err());
    }

    #[test]
    fn gains_reject_negative() {
        assert!(Gains::new(-0.1, vec![1.0, 1.0]).is_err());
        assert!(Gains::new(1.0, vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn assumption_flags_critical_beam_gain() {
        let params = BeamParams::new(1.0, 1.0, 1.0).unwrap();
        let stack = LayerStack::uniform_unit(1, 1.0).unwrap();
        // sqrt(alpha/K) = 1, so gamma0 = 1 is forbidden.
        let gains = Gains::new(1.0, vec![3.0, 3.0]).unwrap();
        let report = validate_assumption(&params, &stack, &gains, ASSUMPTION_TOL).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert!(!report.is_admissible());
        assert!(report.into_result().is_err());
    }

    #[test]
    fn assumption_flags_near_critical_within_tolerance() {
        let params = BeamParams::new(1.0, 1.0, 1.0).unwrap();
        let stack = LayerStack::uniform_unit(1, 1.0).unwrap();
        let gains = Gains::new(1.0 + 1e-15, vec![3.0, 3.0]).unwrap();
        let report = validate_assumption(&params, &stack, &gains, 1e-12).unwrap();
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn assumption_flags_critical_wave_gain() {
        let params = BeamParams::new(1.0, 1.0, 1.0).unwrap();
        // rho/E = 4 in the first layer, so gamma_odd[0] = 2 is forbidden.
        let stack = LayerStack::new(
            vec![
                OddLayer { rho: 4.0, h: 1.0, young: 1.0 },
                OddLayer { rho: 1.0, h: 1.0, young: 1.0 },
            ],
            vec![EvenLayer { h: 1.0, shear: 1.0 }],
        )
        .unwrap();
        let gains = Gains::new(3.0, vec![2.0, 3.0]).unwrap();
        let report = validate_assumption(&params, &stack, &gains, ASSUMPTION_TOL).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].constraint.contains("gamma_odd[0]"));
    }

    #[test]
    fn assumption_accepts_benchmark_gains() {
        let params = BeamParams::new(1.0, 1.0, std::f64::consts::PI).unwrap();
        let stack = LayerStack::uniform_unit(1, 1.0).unwrap();
        let gains = Gains::uniform(1, 3.0).unwrap();
        let report = validate_assumption(&params, &stack, &gains, ASSUMPTION_TOL).unwrap();
        assert!(report.is_admissible());
    }

    #[test]
    fn zero_gains_are_admissible() {
        let params = BeamParams::new(1.0, 1.0, 1.0).unwrap();
        let stack = LayerStack::uniform_unit(2, 0.0).unwrap();
        let gains = Gains::zero(2);
        let report = validate_assumption(&params, &stack, &gains, ASSUMPTION_TOL).unwrap();
        assert!(report.is_admissible());
    }

    proptest! {
        #[test]
        fn coupling_row_sums_exact(m in 1usize..8) {
            let (a, b) = build_coupling_matrices(m).unwrap();
            let ones = DVector::from_element(m + 1, 1.0);
            let a_rows = &a * &ones;
            let b_rows = &b * &ones;
            for i in 0..m {
                // 1/2 + 1/2 and -1 + 1 are exact in binary floating point.
                prop_assert_eq!(a_rows[i], 1.0);
                prop_assert_eq!(b_rows[i], 0.0);
            }
        }

        #[test]
        fn n_entries_exceed_one(
            m in 1usize..6,
            h_seed in proptest::collection::vec(0.05f64..20.0, 12),
        ) {
            let odd: Vec<OddLayer> = (0..=m)
                .map(|i| OddLayer { rho: 1.0, h: h_seed[i], young: 1.0 })
                .collect();
            let even: Vec<EvenLayer> = (0..m)
                .map(|i| EvenLayer { h: h_seed[i + 6], shear: 1.0 })
                .collect();
            let stack = LayerStack::new(odd, even).unwrap();
            let n = compute_n(&stack).unwrap();
            for j in 0..m {
                prop_assert!(n[j] > 1.0);
            }
        }
    }
}
