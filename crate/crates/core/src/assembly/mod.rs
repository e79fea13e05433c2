//! Conforming finite-element discretization of the layered beam.
//!
//! The transverse deflection `z` uses cubic Hermite elements (value and slope
//! unknowns), which keeps the bending form `K <z'', w''>` conforming. Each
//! longitudinal displacement `v_k` uses nodal Lagrange elements of order one
//! or two. Essential constraints `z(0) = z'(0) = z(L) = 0` and `v_k(0) = 0`
//! are eliminated from the unknown set; the slope at `x = L` stays free and
//! is where the transverse feedback acts. The remaining boundary conditions
//! are natural and enter through the damping matrix.
//!
//! Semi-discrete system: `M u'' + D u' + S u = 0` with `M, S` symmetric
//! positive definite and `D` diagonal nonnegative.

pub(crate) mod elements;

use std::io::Write as IoWrite;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{BeamParams, CouplingData, Gains, LayerStack};

use elements::{hermite, lagrange, GAUSS};

/// Polynomial order of the longitudinal elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementOrder {
    Linear,
    Quadratic,
}

impl ElementOrder {
    pub fn as_usize(self) -> usize {
        match self {
            ElementOrder::Linear => 1,
            ElementOrder::Quadratic => 2,
        }
    }

    pub fn from_usize(order: usize) -> Result<Self> {
        match order {
            1 => Ok(ElementOrder::Linear),
            2 => Ok(ElementOrder::Quadratic),
            other => Err(Error::InvalidMesh(format!(
                "element order must be 1 or 2, got {other}"
            ))),
        }
    }

    /// Unknowns per longitudinal layer after eliminating `v(0)`.
    fn dofs_per_layer(self, n_elems: usize) -> usize {
        self.as_usize() * n_elems
    }
}

/// Uniform 1-D mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    pub n_elems: usize,
    pub order: ElementOrder,
}

impl Mesh {
    pub fn new(n_elems: usize, order: ElementOrder) -> Result<Self> {
        if n_elems < 4 {
            return Err(Error::InvalidMesh(format!(
                "need at least 4 elements, got {n_elems}"
            )));
        }
        Ok(Self { n_elems, order })
    }
}

/// Index layout of the global unknown vector.
///
/// Ordering: the `z` block first (interior node pairs `(z_i, z'_i)` followed
/// by the end slope `z'(L)`), then one contiguous block per odd layer with
/// nodal values ordered left to right. The damped unknowns are always the
/// last entry of their block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    z_dofs: usize,
    v_dofs: usize,
    v_layers: usize,
}

impl DofMap {
    fn for_mesh(mesh: &Mesh, v_layers: usize) -> Self {
        Self {
            z_dofs: 2 * mesh.n_elems - 1,
            v_dofs: mesh.order.dofs_per_layer(mesh.n_elems),
            v_layers,
        }
    }

    pub fn total(&self) -> usize {
        self.z_dofs + self.v_dofs * self.v_layers
    }

    pub fn z_dofs(&self) -> usize {
        self.z_dofs
    }

    pub fn v_dofs_per_layer(&self) -> usize {
        self.v_dofs
    }

    pub fn v_layers(&self) -> usize {
        self.v_layers
    }

    pub fn z_range(&self) -> Range<usize> {
        0..self.z_dofs
    }

    pub fn v_range(&self, layer: usize) -> Range<usize> {
        let start = self.z_dofs + layer * self.v_dofs;
        start..start + self.v_dofs
    }

    /// Global index of `z'(L)`, if the transverse block is present.
    pub fn z_slope_at_end(&self) -> Option<usize> {
        (self.z_dofs > 0).then(|| self.z_dofs - 1)
    }

    /// Global index of `v_k(L)`.
    pub fn v_end(&self, layer: usize) -> usize {
        self.v_range(layer).end - 1
    }

    /// Indices that receive boundary damping, in block order.
    pub fn damped_dofs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(i) = self.z_slope_at_end() {
            out.push(i);
        }
        for k in 0..self.v_layers {
            out.push(self.v_end(k));
        }
        out
    }
}

/// Closed-form scalar field for nodal interpolation.
///
/// The derivative feeds slope unknowns directly; without it a centered
/// difference with step `h/100` is used, so `value` must be evaluable
/// slightly outside `[0, L]`.
pub struct SampledField<'a> {
    pub value: &'a dyn Fn(f64) -> f64,
    pub derivative: Option<&'a dyn Fn(f64) -> f64>,
}

impl<'a> SampledField<'a> {
    pub fn new(value: &'a dyn Fn(f64) -> f64) -> Self {
        Self { value, derivative: None }
    }

    pub fn with_derivative(
        value: &'a dyn Fn(f64) -> f64,
        derivative: &'a dyn Fn(f64) -> f64,
    ) -> Self {
        Self { value, derivative: Some(derivative) }
    }

    fn slope(&self, x: f64, h: f64) -> f64 {
        match self.derivative {
            Some(d) => d(x),
            None => {
                let e = h / 100.0;
                ((self.value)(x + e) - (self.value)(x - e)) / (2.0 * e)
            }
        }
    }
}

/// Marker for a diagonal block of the decoupled system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// The transverse (bending) block.
    Transverse,
    /// The longitudinal block of odd layer `k` (list index, `0..=m`).
    Longitudinal(usize),
}

/// Assembled semi-discrete system together with the model it came from.
#[derive(Debug, Clone)]
pub struct DiscretizedSystem {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Diagonal of the damping matrix; only boundary unknowns are nonzero.
    pub damping: DVector<f64>,
    pub dof_map: DofMap,
    pub params: BeamParams,
    pub stack: LayerStack,
    pub gains: Gains,
    pub mesh: Mesh,
    /// `Some` when this system is a diagonal block extracted from a larger
    /// decoupled system; parameters then still describe the parent model.
    pub block: Option<Block>,
}

impl DiscretizedSystem {
    pub fn total_dofs(&self) -> usize {
        self.dof_map.total()
    }

    pub fn damping_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.damping)
    }

    /// Slowest wave speed among all branches of the model.
    pub fn min_wave_speed(&self) -> f64 {
        let mut c = self.params.transverse_speed();
        for l in &self.stack.odd {
            c = c.min(l.wave_speed());
        }
        c
    }

    /// Largest `|Im lambda|` considered mesh-resolved when comparing against
    /// spectra: a quarter of the smallest wavelength the mesh can carry.
    pub fn resolution_cutoff(&self) -> f64 {
        std::f64::consts::PI * self.mesh.n_elems as f64 * self.min_wave_speed()
            / (4.0 * self.params.length)
    }

    /// Nodal interpolant of closed-form fields as one coefficient vector.
    ///
    /// `z` is the transverse field, present exactly when the system carries
    /// a transverse block; `v[k]` is the longitudinal field of odd layer `k`
    /// (in this system's layer list). Constrained end values are never
    /// sampled, so fields violating the essential conditions are silently
    /// projected onto the discrete space.
    pub fn interpolate(
        &self,
        z: Option<&SampledField>,
        v: &[SampledField],
    ) -> Result<DVector<f64>> {
        let map = &self.dof_map;
        if (map.z_dofs() > 0) != z.is_some() {
            return Err(Error::InvalidParameter(
                "transverse field must be given exactly when a transverse block exists".into(),
            ));
        }
        if v.len() != map.v_layers() {
            return Err(Error::DimensionMismatch {
                expected: map.v_layers(),
                got: v.len(),
            });
        }
        let n = self.mesh.n_elems;
        let h = self.params.length / n as f64;
        let mut out = DVector::zeros(map.total());
        if let Some(field) = z {
            for node in 1..=n {
                let x = node as f64 * h;
                if let Some(i) = z_value_index(node, n) {
                    out[i] = (field.value)(x);
                }
                if let Some(i) = z_slope_index(node, n) {
                    out[i] = field.slope(x, h);
                }
            }
        }
        for (k, field) in v.iter().enumerate() {
            let base = map.v_range(k).start;
            for e in 0..n {
                let right = (e as f64 + 1.0) * h;
                match self.mesh.order {
                    ElementOrder::Quadratic => {
                        out[base + 2 * e] = (field.value)((e as f64 + 0.5) * h);
                        out[base + 2 * e + 1] = (field.value)(right);
                    }
                    ElementOrder::Linear => out[base + e] = (field.value)(right),
                }
            }
        }
        Ok(out)
    }
}

fn z_value_index(node: usize, n_elems: usize) -> Option<usize> {
    if node == 0 || node == n_elems {
        None
    } else {
        Some(2 * (node - 1))
    }
}

fn z_slope_index(node: usize, n_elems: usize) -> Option<usize> {
    if node == 0 {
        None
    } else if node == n_elems {
        Some(2 * n_elems - 2)
    } else {
        Some(2 * (node - 1) + 1)
    }
}

/// Global indices of one Hermite element's local unknowns.
fn z_element_dofs(e: usize, n_elems: usize) -> [Option<usize>; 4] {
    [
        z_value_index(e, n_elems),
        z_slope_index(e, n_elems),
        z_value_index(e + 1, n_elems),
        z_slope_index(e + 1, n_elems),
    ]
}

/// Block-relative indices of one Lagrange element's local unknowns.
fn v_element_dofs(e: usize, order: ElementOrder) -> [Option<usize>; 3] {
    match order {
        ElementOrder::Linear => [
            if e == 0 { None } else { Some(e - 1) },
            Some(e),
            None,
        ],
        ElementOrder::Quadratic => [
            if e == 0 { None } else { Some(2 * e - 1) },
            Some(2 * e),
            Some(2 * e + 1),
        ],
    }
}

/// Accumulates `w * row ⊗ row` into `mat` for the active indices.
fn scatter(mat: &mut DMatrix<f64>, idx: &[Option<usize>], row: &[f64], w: f64) {
    for (a, ga) in idx.iter().enumerate() {
        let Some(ga) = ga else { continue };
        for (b, gb) in idx.iter().enumerate() {
            let Some(gb) = gb else { continue };
            // Grouping keeps the accumulated matrix bitwise symmetric.
            mat[(*ga, *gb)] += w * (row[a] * row[b]);
        }
    }
}

fn validated_inputs(
    params: &BeamParams,
    stack: &LayerStack,
    gains: &Gains,
    mesh: &Mesh,
) -> Result<()> {
    params.validate()?;
    stack.validate()?;
    gains.validate(stack)?;
    Mesh::new(mesh.n_elems, mesh.order)?;
    Ok(())
}

/// Mass matrix and the shear-free part of the stiffness matrix.
fn assemble_base(
    params: &BeamParams,
    stack: &LayerStack,
    mesh: &Mesh,
    map: &DofMap,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let nd = map.total();
    let mut mass = DMatrix::zeros(nd, nd);
    let mut stiff = DMatrix::zeros(nd, nd);
    let h = params.length / mesh.n_elems as f64;
    let order = mesh.order.as_usize();

    for e in 0..mesh.n_elems {
        let zidx = z_element_dofs(e, mesh.n_elems);
        let vidx_rel = v_element_dofs(e, mesh.order);
        for &(xi, w) in &GAUSS {
            let wq = w * h;
            let hm = hermite(xi, h);
            // Transverse: <z, w> + alpha <z', w'> into mass, K <z'', w''> into stiffness.
            scatter(&mut mass, &zidx, &hm.n, wq);
            scatter(&mut mass, &zidx, &hm.dn, wq * params.alpha);
            scatter(&mut stiff, &zidx, &hm.d2n, wq * params.bending);

            let lg = lagrange(order, xi, h);
            for (k, layer) in stack.odd.iter().enumerate() {
                let base = map.v_range(k).start;
                let vidx: [Option<usize>; 3] =
                    std::array::from_fn(|i| vidx_rel[i].map(|r| r + base));
                scatter(&mut mass, &vidx, &lg.n, wq * layer.h * layer.rho);
                scatter(&mut stiff, &vidx, &lg.dn, wq * layer.h * layer.young);
            }
        }
    }
    (mass, stiff)
}

/// Shear contribution to the stiffness matrix.
///
/// For each core `j` the shear angle is
/// `phi_j = (v_{j+1} - v_j) / h_j + N_j z'`
/// and the form contributes `G_j h_j <phi_j, psi_j>`. This couples the `z`
/// block with the two adjacent longitudinal blocks; it vanishes identically
/// when `G_j = 0`, which is the decoupled system.
fn assemble_shear(
    params: &BeamParams,
    stack: &LayerStack,
    mesh: &Mesh,
    map: &DofMap,
) -> Result<DMatrix<f64>> {
    let coupling = CouplingData::for_stack(stack)?;
    let nd = map.total();
    let mut shear = DMatrix::zeros(nd, nd);
    let h = params.length / mesh.n_elems as f64;
    let order = mesh.order.as_usize();
    let lcount = order + 1;

    // Combined local row: 4 Hermite slots then the two layers' nodal slots.
    let mut idx = vec![None; 4 + 2 * lcount];
    let mut row = vec![0.0; 4 + 2 * lcount];

    for e in 0..mesh.n_elems {
        let zidx = z_element_dofs(e, mesh.n_elems);
        let vidx_rel = v_element_dofs(e, mesh.order);
        for &(xi, w) in &GAUSS {
            let hm = hermite(xi, h);
            let lg = lagrange(order, xi, h);
            for j in 0..stack.m() {
                let core = &stack.even[j];
                let nj = coupling.n_vec[j];
                let inv_hj = 1.0 / core.h;
                let lower = map.v_range(j).start;
                let upper = map.v_range(j + 1).start;
                for i in 0..4 {
                    idx[i] = zidx[i];
                    row[i] = nj * hm.dn[i];
                }
                for i in 0..lcount {
                    idx[4 + i] = vidx_rel[i].map(|r| r + lower);
                    row[4 + i] = -inv_hj * lg.n[i];
                    idx[4 + lcount + i] = vidx_rel[i].map(|r| r + upper);
                    row[4 + lcount + i] = inv_hj * lg.n[i];
                }
                scatter(&mut shear, &idx, &row, w * h * core.shear * core.h);
            }
        }
    }
    Ok(shear)
}

fn assemble_damping(stack: &LayerStack, gains: &Gains, params: &BeamParams, map: &DofMap) -> DVector<f64> {
    let mut d = DVector::zeros(map.total());
    if let Some(i) = map.z_slope_at_end() {
        d[i] += params.bending * gains.gamma0;
    }
    for (k, layer) in stack.odd.iter().enumerate() {
        d[map.v_end(k)] += layer.h * layer.young * gains.gamma_odd[k];
    }
    d
}

/// Assembles the full semi-discrete system.
///
/// The stiffness matrix is built as `S_base + S_shear` in one final addition,
/// with `S_shear` assembled along the same code path whether or not any core
/// shear modulus is zero. Consequently the coupled system equals the
/// decoupled system plus the embedded [`coupling_block`] exactly, entry for
/// entry.
pub fn assemble(
    params: &BeamParams,
    stack: &LayerStack,
    gains: &Gains,
    mesh: &Mesh,
) -> Result<DiscretizedSystem> {
    validated_inputs(params, stack, gains, mesh)?;
    let map = DofMap::for_mesh(mesh, stack.odd.len());
    let (mass, base) = assemble_base(params, stack, mesh, &map);
    let shear = assemble_shear(params, stack, mesh, &map)?;
    let stiffness = &base + &shear;
    let damping = assemble_damping(stack, gains, params, &map);
    Ok(DiscretizedSystem {
        mass,
        stiffness,
        damping,
        dof_map: map,
        params: params.clone(),
        stack: stack.clone(),
        gains: gains.clone(),
        mesh: *mesh,
        block: None,
    })
}

/// The shear coupling matrix `S_c` on displacement unknowns.
///
/// Embedded into the first-order pencil as `[[0, 0], [-S_c, 0]]`, this is the
/// exact difference between the coupled and decoupled pencils.
pub fn coupling_block(
    params: &BeamParams,
    stack: &LayerStack,
    mesh: &Mesh,
) -> Result<DMatrix<f64>> {
    params.validate()?;
    stack.validate()?;
    Mesh::new(mesh.n_elems, mesh.order)?;
    let map = DofMap::for_mesh(mesh, stack.odd.len());
    assemble_shear(params, stack, mesh, &map)
}

/// First-order generalized pencil `(E, A)`:
/// `E = blockdiag(I, M)`, `A = [[0, I], [-S, -D]]`.
///
/// Eigenpairs of `A Y = lambda E Y` are exactly the solutions of the
/// quadratic problem `(lambda^2 M + lambda D + S) u = 0` with `Y = (u, lambda u)`.
pub fn first_order_pencil(sys: &DiscretizedSystem) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = sys.total_dofs();
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    e.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
    e.view_mut((n, n), (n, n)).copy_from(&sys.mass);

    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&DMatrix::identity(n, n));
    a.view_mut((n, 0), (n, n)).copy_from(&(-&sys.stiffness));
    a.view_mut((n, n), (n, n)).copy_from(&(-sys.damping_dense()));
    (e, a)
}

/// Dense standard-form generator `[[0, I], [-M^{-1}S, -M^{-1}D]]`, the matrix
/// of `Y' = T Y`. Shares its spectrum with the pencil since `M` is positive
/// definite.
pub fn standard_generator(sys: &DiscretizedSystem) -> Result<DMatrix<f64>> {
    let n = sys.total_dofs();
    let chol = sys
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("mass matrix is not positive definite".into()))?;
    let minv_s = chol.solve(&sys.stiffness);
    let minv_d = chol.solve(&sys.damping_dense());
    let mut t = DMatrix::zeros(2 * n, 2 * n);
    t.view_mut((0, n), (n, n)).copy_from(&DMatrix::identity(n, n));
    t.view_mut((n, 0), (n, n)).copy_from(&(-&minv_s));
    t.view_mut((n, n), (n, n)).copy_from(&(-&minv_d));
    Ok(t)
}

/// Extracts one diagonal block of a decoupled system as a standalone system.
///
/// Fails when the stiffness matrix carries coupling between blocks, i.e. when
/// any core has nonzero shear modulus.
pub fn sub_block(sys: &DiscretizedSystem, block: Block) -> Result<DiscretizedSystem> {
    let map = &sys.dof_map;
    let range = match block {
        Block::Transverse => {
            if map.z_dofs() == 0 {
                return Err(Error::InvalidParameter(
                    "system has no transverse block".into(),
                ));
            }
            map.z_range()
        }
        Block::Longitudinal(k) => {
            if k >= map.v_layers() {
                return Err(Error::InvalidParameter(format!(
                    "longitudinal block {k} out of range ({} layers)",
                    map.v_layers()
                )));
            }
            map.v_range(k)
        }
    };

    let n = sys.total_dofs();
    for r in 0..n {
        for c in 0..n {
            let inside = range.contains(&r) == range.contains(&c);
            if !inside && sys.stiffness[(r, c)] != 0.0 {
                return Err(Error::InvalidParameter(
                    "sub-block extraction requires a decoupled system (zero shear moduli)".into(),
                ));
            }
        }
    }

    let len = range.len();
    let sub_map = match block {
        Block::Transverse => DofMap { z_dofs: len, v_dofs: 0, v_layers: 0 },
        Block::Longitudinal(_) => DofMap { z_dofs: 0, v_dofs: len, v_layers: 1 },
    };
    Ok(DiscretizedSystem {
        mass: sys.mass.view((range.start, range.start), (len, len)).into_owned(),
        stiffness: sys
            .stiffness
            .view((range.start, range.start), (len, len))
            .into_owned(),
        damping: sys.damping.rows(range.start, len).into_owned(),
        dof_map: sub_map,
        params: sys.params.clone(),
        stack: sys.stack.clone(),
        gains: sys.gains.clone(),
        mesh: sys.mesh,
        block: Some(block),
    })
}

/// Mass-weighted operator norms of the generator split `A = A_d + C`:
/// `(norm of the decoupled generator A_d, norm of the coupling block C)`,
/// both in the metric `W = blockdiag(M, M)` weighting displacement and
/// velocity components alike.
///
/// Power iteration on the W-self-adjoint products `A_d* A_d` and `C* C`.
/// Under mesh refinement the decoupled norm grows like the square of the top
/// discrete frequency while the coupling norm stays bounded; the gap is the
/// discrete trace of the coupling being a relatively compact perturbation.
pub fn split_operator_norms(
    params: &BeamParams,
    stack: &LayerStack,
    gains: &Gains,
    mesh: &Mesh,
) -> Result<(f64, f64)> {
    let sys = assemble(params, &stack.decoupled(), gains, mesh)?;
    let s_c = assemble_shear(params, stack, mesh, &sys.dof_map)?;
    let n = sys.total_dofs();
    let chol = sys
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("mass matrix is not positive definite".into()))?;
    let w_norm = |u: &DVector<f64>, v: &DVector<f64>| -> f64 {
        (u.dot(&(&sys.mass * u)) + v.dot(&(&sys.mass * v))).sqrt()
    };
    let seed_vec = || DVector::from_fn(n, |i, _| 1.0 + (i as f64).sin() * 0.5);

    // A_d (u, v) = (v, -M^{-1}(S u + D v)); its W-adjoint swaps the blocks:
    // A_d* (u, v) = (-M^{-1} S v, u - M^{-1} D v).
    let apply = |u: &DVector<f64>, v: &DVector<f64>| {
        let mut f = &sys.stiffness * u;
        for i in 0..n {
            f[i] += sys.damping[i] * v[i];
        }
        (v.clone(), -chol.solve(&f))
    };
    let apply_adj = |u: &DVector<f64>, v: &DVector<f64>| {
        let su = -chol.solve(&(&sys.stiffness * v));
        let mut w = u.clone();
        let dv = chol.solve(&DVector::from_fn(n, |i, _| sys.damping[i] * v[i]));
        w -= dv;
        (su, w)
    };

    let mut u = seed_vec();
    let mut v = seed_vec();
    let mut lambda = 0.0f64;
    for _ in 0..300 {
        let (au, av) = apply(&u, &v);
        let (bu, bv) = apply_adj(&au, &av);
        let scale = w_norm(&bu, &bv);
        if scale == 0.0 {
            break;
        }
        u = bu / scale;
        v = bv / scale;
        let (au, av) = apply(&u, &v);
        let next = w_norm(&au, &av).powi(2);
        let done = (next - lambda).abs() <= 1e-10 * next;
        lambda = next;
        if done {
            break;
        }
    }
    let generator_norm = lambda.sqrt();

    // C (u, v) = (0, -M^{-1} S_c u), so |C| is the largest generalized
    // eigenvalue of (S_c, M).
    let coupling_norm = if s_c.amax() == 0.0 {
        0.0
    } else {
        let mut x = seed_vec();
        let mut nu = 0.0f64;
        for _ in 0..300 {
            let y = chol.solve(&(&s_c * &x));
            let scale = y.dot(&(&sys.mass * &y)).sqrt();
            if scale == 0.0 {
                break;
            }
            x = y / scale;
            let next = x.dot(&(&s_c * &x)) / x.dot(&(&sys.mass * &x));
            let done = (next - nu).abs() <= 1e-10 * next.abs();
            nu = next;
            if done {
                break;
            }
        }
        nu
    };
    Ok((generator_norm, coupling_norm))
}

/// Writes a dense matrix in the plain-text triplet format:
/// a header `rows cols nnz`, then one `row col value` line per structurally
/// nonzero entry in row-major order. Indices are zero-based and values carry
/// 17 significant digits.
pub fn write_matrix<W: IoWrite>(mat: &DMatrix<f64>, out: &mut W) -> Result<()> {
    let nnz = mat.iter().filter(|v| **v != 0.0).count();
    writeln!(out, "{} {} {}", mat.nrows(), mat.ncols(), nnz)?;
    for r in 0..mat.nrows() {
        for c in 0..mat.ncols() {
            let v = mat[(r, c)];
            if v != 0.0 {
                writeln!(out, "{} {} {:.16e}", r, c, v)?;
            }
        }
    }
    Ok(())
}
