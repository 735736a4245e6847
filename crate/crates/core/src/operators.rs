//! Discrete divergence-form radial operators, distributional/weak pairings,
//! inequality certificates, norms and the bottom of the spectrum.
//!
//! The operator `L = Delta - lambda(x)` acts on nodal values through the
//! half-node flux form
//!
//! ```text
//! (L u)_i = ( w_{i+1/2} (u_{i+1}-u_i)/h - w_{i-1/2} (u_i-u_{i-1})/h ) / (h s_i)
//!           - lambda_i u_i
//! ```
//!
//! with conduction weight `w = S` for the Laplacian (and `alpha^2 S` for the
//! ground-state-weighted operator). All pairings are computed from the
//! mu-weighted flux form with zero-flux closure at the ends, which makes
//! summation by parts *exact*: `pair_distributional` and `weak_form_pair`
//! agree to machine precision for every end-vanishing test function, so the
//! distributional and weak notions of subsolution coincide identically at
//! the discrete level. The weak form's zero-order term enters as
//! `lambda * u` paired against the test function, consistent with that
//! identity.
//!
//! Subsolution certificates quantify over the hat-function family: every
//! nonnegative piecewise-linear test function is a nonnegative combination
//! of hats, so hats are the extreme rays of the test cone and checking them
//! is both sufficient and necessary. On pole-complete models the pole is an
//! interior point of the manifold, not a boundary, and the family includes
//! the one-sided hat at the pole node; without it, energy arguments that
//! integrate across the pole are unsound.

use crate::error::{Error, Result};
use crate::geometry::{LeftKind, RadialGrid, RightKind};
use std::sync::Arc;

/// Sampled function on a radial grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(grid: &Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample {bad}")));
        }
        Ok(GridFunction {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Arc<RadialGrid>, f: F) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        GridFunction {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<RadialGrid>, c: f64) -> Self {
        GridFunction {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_norm_on(&self, region: Region) -> f64 {
        self.values[region.lo..=region.hi]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Positive part max(u, 0).
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// u + c.
    pub fn shifted(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Self {
        assert!(Arc::ptr_eq(&self.grid, other.grid()), "grid mismatch");
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(other.values())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Boundary treatment of one grid end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Pole at r = 0: ghost-node reflection enforcing u'(0) = 0; the strong
    /// action there is `2n (u_1 - u_0)/h^2 - lambda_0 u_0`.
    PoleNeumann,
    /// Value pinned at the end (homogeneous in solves unless supplied).
    Dirichlet,
    /// Zero flux through the outer face of the end half-cell.
    Natural,
}

/// Inclusive node-index range `[lo, hi]` of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub lo: usize,
    pub hi: usize,
}

impl Region {
    pub fn new(lo: usize, hi: usize) -> Self {
        assert!(lo < hi, "degenerate region [{lo}, {hi}]");
        Region { lo, hi }
    }

    pub fn all(grid: &RadialGrid) -> Self {
        Region {
            lo: 0,
            hi: grid.len() - 1,
        }
    }

    /// Smallest node range containing `[r_lo, r_hi]` intersected with the grid.
    pub fn from_radii(grid: &RadialGrid, r_lo: f64, r_hi: f64) -> Result<Self> {
        if !(r_lo < r_hi) {
            return Err(Error::InvalidArgument(format!(
                "empty radius range [{r_lo}, {r_hi}]"
            )));
        }
        let lo = grid.nearest_index(r_lo);
        let hi = grid.nearest_index(r_hi);
        if hi <= lo + 1 {
            return Err(Error::InvalidArgument(format!(
                "region [{r_lo}, {r_hi}] resolves to fewer than 3 nodes"
            )));
        }
        Ok(Region { lo, hi })
    }

    pub fn node_count(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }
}

/// Symmetric divergence-form tridiagonal operator `L = Delta_w - lambda`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Arc<RadialGrid>,
    /// Conduction weight at half-nodes; entry i couples nodes i and i+1.
    w_half: Vec<f64>,
    /// Zero-order coefficient per node (>= 0 for Schrodinger operators).
    lambda: Vec<f64>,
    pub left: BoundaryTag,
    pub right: BoundaryTag,
}

impl DiscreteOperator {
    /// Laplace-Beltrami operator of the model: weight S, lambda = 0,
    /// boundary tags derived from the manifold's end flags.
    pub fn laplacian(grid: &Arc<RadialGrid>) -> Self {
        let m = grid.manifold();
        DiscreteOperator {
            grid: Arc::clone(grid),
            w_half: grid.area_half_samples().to_vec(),
            lambda: vec![0.0; grid.len()],
            left: match m.left {
                LeftKind::Pole => BoundaryTag::PoleNeumann,
                LeftKind::Open => BoundaryTag::Dirichlet,
            },
            right: match m.right {
                RightKind::Truncation => BoundaryTag::Natural,
                RightKind::Boundary => BoundaryTag::Dirichlet,
            },
        }
    }

    /// Schrodinger operator `Delta - lambda(x)` with `lambda >= 0`.
    pub fn schrodinger(grid: &Arc<RadialGrid>, lambda: &GridFunction) -> Result<Self> {
        if let Some((i, &l)) = lambda.values().iter().enumerate().find(|(_, &l)| l < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "negative zero-order coefficient lambda({}) = {l}",
                grid.node(i)
            )));
        }
        let mut op = Self::laplacian(grid);
        op.lambda = lambda.values().to_vec();
        Ok(op)
    }

    /// Schrodinger operator with constant lambda >= 0.
    pub fn schrodinger_const(grid: &Arc<RadialGrid>, lambda: f64) -> Result<Self> {
        Self::schrodinger(grid, &GridFunction::constant(grid, lambda))
    }

    /// Divergence-form operator with a caller-supplied conduction weight and
    /// zero zero-order term (used by the ground-state transform).
    pub fn weighted(
        grid: &Arc<RadialGrid>,
        w_half: Vec<f64>,
        left: BoundaryTag,
        right: BoundaryTag,
    ) -> Result<Self> {
        if w_half.len() != grid.len() - 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} half-node weights, got {}",
                grid.len() - 1,
                w_half.len()
            )));
        }
        if w_half.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "conduction weights must be positive and finite".to_string(),
            ));
        }
        Ok(DiscreteOperator {
            grid: Arc::clone(grid),
            w_half,
            lambda: vec![0.0; grid.len()],
            left,
            right,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.w_half
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn has_zero_order(&self) -> bool {
        self.lambda.iter().any(|&l| l != 0.0)
    }

    /// Same weights and tags with the zero-order term dropped.
    pub fn without_zero_order(&self) -> DiscreteOperator {
        DiscreteOperator {
            grid: Arc::clone(&self.grid),
            w_half: self.w_half.clone(),
            lambda: vec![0.0; self.grid.len()],
            left: self.left,
            right: self.right,
        }
    }

    /// Fluxes `g_{i+1/2} = w_{i+1/2} (u_{i+1} - u_i) / h`.
    fn fluxes(&self, u: &[f64]) -> Vec<f64> {
        let h = self.grid.spacing();
        (0..u.len() - 1)
            .map(|i| self.w_half[i] * (u[i + 1] - u[i]) / h)
            .collect()
    }

    /// mu-weighted action with zero-flux closure at both ends:
    /// `B_i(u) = g_{i+1/2} - g_{i-1/2} - lambda_i u_i mu_i`, with the
    /// missing outer fluxes set to zero. This is the form entering every
    /// pairing; it makes `sum_i v_i B_i(u)` exactly symmetric in u and v.
    pub fn mu_action(&self, u: &[f64]) -> Vec<f64> {
        let g = self.fluxes(u);
        let mu = self.grid.measure();
        let n = u.len();
        let mut b = vec![0.0; n];
        b[0] = g[0] - self.lambda[0] * u[0] * mu[0];
        for i in 1..n - 1 {
            b[i] = g[i] - g[i - 1] - self.lambda[i] * u[i] * mu[i];
        }
        b[n - 1] = -g[n - 2] - self.lambda[n - 1] * u[n - 1] * mu[n - 1];
        b
    }

    /// Measure weight carried by the hat at node j in zero-order terms.
    /// At a pole node the one-sided hat covers the half-cell `[0, h/2]`,
    /// whose volume is `w_{1/2} h / (2n)` to leading order; this choice
    /// makes the pole-hat pairing agree exactly with the reflection row
    /// used by the solvers. Elsewhere it is the trapezoid weight `mu_j`.
    pub fn hat_measure(&self, j: usize) -> f64 {
        if j == 0 && self.left == BoundaryTag::PoleNeumann {
            let dim = self.grid.manifold().n as f64;
            self.w_half[0] * self.grid.spacing() / (2.0 * dim)
        } else {
            self.grid.measure()[j]
        }
    }

    /// Pairing of u against the hat at node j (the one-sided hat when j is
    /// a pole node). Equals `mu_j (A u)_j` at interior nodes.
    pub fn hat_pairing(&self, u: &[f64], j: usize) -> f64 {
        let h = self.grid.spacing();
        let n = u.len();
        let right = if j + 1 < n {
            self.w_half[j] * (u[j + 1] - u[j]) / h
        } else {
            0.0
        };
        let left = if j > 0 {
            self.w_half[j - 1] * (u[j] - u[j - 1]) / h
        } else {
            0.0
        };
        right - left - self.lambda[j] * u[j] * self.hat_measure(j)
    }

    /// Strong nodal action. Interior nodes use the flux form divided by the
    /// measure; end rows follow the boundary tags (Dirichlet rows are not
    /// part of the operator and return 0).
    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        let vals = u.values();
        let n = vals.len();
        let h = self.grid.spacing();
        let mu = self.grid.measure();
        let b = self.mu_action(vals);
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = b[i] / mu[i];
        }
        out[0] = match self.left {
            BoundaryTag::PoleNeumann => {
                let dim = self.grid.manifold().n as f64;
                2.0 * dim * (vals[1] - vals[0]) / (h * h) - self.lambda[0] * vals[0]
            }
            BoundaryTag::Natural => b[0] / mu[0],
            BoundaryTag::Dirichlet => 0.0,
        };
        out[n - 1] = match self.right {
            BoundaryTag::Natural => b[n - 1] / mu[n - 1],
            BoundaryTag::Dirichlet => 0.0,
            BoundaryTag::PoleNeumann => 0.0,
        };
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: out,
        }
    }
}

fn require_same_grid(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> Result<()> {
    if !Arc::ptr_eq(a, b) {
        return Err(Error::InvalidArgument(
            "functions live on different grids".to_string(),
        ));
    }
    Ok(())
}

fn require_end_vanishing(phi: &GridFunction) -> Result<()> {
    let v = phi.values();
    let scale = phi.sup_norm().max(1.0);
    if v[0].abs() > 1e-14 * scale || v[v.len() - 1].abs() > 1e-14 * scale {
        return Err(Error::PreconditionFailed(
            "test function must vanish at both grid ends".to_string(),
        ));
    }
    Ok(())
}

/// Distributional pairing `sum_i u_i (A phi)_i mu_i` for an end-vanishing
/// test function `phi`.
pub fn pair_distributional(
    u: &GridFunction,
    phi: &GridFunction,
    op: &DiscreteOperator,
) -> Result<f64> {
    require_same_grid(u.grid(), phi.grid())?;
    require_same_grid(u.grid(), op.grid())?;
    require_end_vanishing(phi)?;
    let b = op.mu_action(phi.values());
    Ok(u.values().iter().zip(&b).map(|(&ui, &bi)| ui * bi).sum())
}

/// Weak-form pairing
/// `-sum w_{i+1/2} (Du)_{i+1/2} (Dphi)_{i+1/2} h - sum lambda_i u_i phi_i mu_i`.
///
/// Agrees with [`pair_distributional`] exactly (discrete Green identity).
pub fn weak_form_pair(u: &GridFunction, phi: &GridFunction, op: &DiscreteOperator) -> Result<f64> {
    require_same_grid(u.grid(), phi.grid())?;
    require_same_grid(u.grid(), op.grid())?;
    require_end_vanishing(phi)?;
    let h = u.grid().spacing();
    let uv = u.values();
    let pv = phi.values();
    let mu = u.grid().measure();
    let mut acc = 0.0;
    for i in 0..uv.len() - 1 {
        let du = (uv[i + 1] - uv[i]) / h;
        let dphi = (pv[i + 1] - pv[i]) / h;
        acc -= op.w_half[i] * du * dphi * h;
    }
    for i in 0..uv.len() {
        acc -= op.lambda[i] * uv[i] * pv[i] * mu[i];
    }
    Ok(acc)
}

/// Outcome of testing `int u L phi >= 0` against the complete hat family.
#[derive(Debug, Clone)]
pub struct IneqCertificate {
    /// Minimum hat pairing over the tested family.
    pub min_pairing: f64,
    /// Node whose hat achieved the minimum.
    pub worst_node: usize,
    /// Tolerance the verdict used.
    pub tolerance: f64,
    /// Number of hats tested.
    pub tested: usize,
    pub pass: bool,
}

/// Default certificate tolerance scale `10 h^2 sup|u| max(w)`, calibrated
/// so closed-form solutions pass (their pairing residual is O(h^3) per
/// hat) while order-one violations (pairing deficit O(h) per hat) fail.
pub fn default_tolerance(u: &GridFunction, op: &DiscreteOperator, region: Region) -> f64 {
    let h = u.grid().spacing();
    let sup = u.sup_norm_on(region);
    let wmax = op.w_half[region.lo..region.hi]
        .iter()
        .fold(0.0f64, |m, &w| m.max(w));
    10.0 * h * h * sup.max(1e-300) * wmax
}

/// Tests whether u is a distributional subsolution (`pair >= -tol` for every
/// admissible hat) on the region, at the default tolerance.
///
/// Hats at nodes `lo+1 ..= hi-1` are always tested; when the region starts
/// at a pole node the one-sided pole hat is included as well, since the pole
/// is an interior point of the manifold. Each hat is held to its own local
/// tolerance `10 h^2 sup_loc|u| max(w_{j-1/2}, w_{j+1/2})`, where `sup_loc`
/// runs over the hat's support: both the weight and the function scale can
/// vary by orders of magnitude across a truncated domain, and a single
/// global scale would mask violations where either is small. The reported
/// tolerance is the local one at the worst node, so the pass condition
/// `min_pairing >= -tolerance` reads off the certificate unchanged.
pub fn check_subsolution(
    u: &GridFunction,
    op: &DiscreteOperator,
    region: Region,
) -> IneqCertificate {
    let h = u.grid().spacing();
    let vals = u.values();
    let start = hat_family_start(op, region);
    let mut worst_margin = f64::INFINITY;
    let mut worst = region.lo + 1;
    let mut worst_pairing = f64::INFINITY;
    let mut worst_tol = 0.0;
    let mut tested = 0;
    for j in start..region.hi {
        let w_loc = if j == 0 {
            op.w_half[0]
        } else {
            op.w_half[j - 1].max(op.w_half[j])
        };
        let lo = j.saturating_sub(1).max(region.lo);
        let hi = (j + 1).min(region.hi);
        let sup_loc = vals[lo..=hi].iter().fold(1e-300f64, |m, &v| m.max(v.abs()));
        let tol_j = 10.0 * h * h * sup_loc * w_loc;
        let p = op.hat_pairing(vals, j);
        tested += 1;
        if p + tol_j < worst_margin {
            worst_margin = p + tol_j;
            worst = j;
            worst_pairing = p;
            worst_tol = tol_j;
        }
    }
    IneqCertificate {
        min_pairing: worst_pairing,
        worst_node: worst,
        tolerance: worst_tol,
        tested,
        pass: worst_margin >= 0.0,
    }
}

/// First node of the hat family on a region: interior hats always, plus
/// the one-sided pole hat when the region starts at a pole node.
pub(crate) fn hat_family_start(op: &DiscreteOperator, region: Region) -> usize {
    let pole_hat = region.lo == 0
        && op.grid().manifold().left == LeftKind::Pole
        && op.left == BoundaryTag::PoleNeumann;
    if pole_hat {
        region.lo
    } else {
        region.lo + 1
    }
}

/// Same as [`check_subsolution`] with an explicit tolerance.
pub fn check_subsolution_with_tol(
    u: &GridFunction,
    op: &DiscreteOperator,
    region: Region,
    tol: f64,
) -> IneqCertificate {
    let vals = u.values();
    let mut min_pairing = f64::INFINITY;
    let mut worst = region.lo + 1;
    let mut tested = 0;
    let start = hat_family_start(op, region);
    for j in start..region.hi {
        let p = op.hat_pairing(vals, j);
        tested += 1;
        if p < min_pairing {
            min_pairing = p;
            worst = j;
        }
    }
    IneqCertificate {
        min_pairing,
        worst_node: worst,
        tolerance: tol,
        tested,
        pass: min_pairing >= -tol,
    }
}

/// mu-weighted `L^p` norm over a region.
pub fn lp_norm(u: &GridFunction, p: f64, region: Region) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= p < inf, got {p}"
        )));
    }
    let mu = u.grid().measure();
    let mut acc = 0.0;
    for i in region.lo..=region.hi {
        acc += u.values()[i].abs().powf(p) * mu[i];
    }
    Ok(acc.powf(1.0 / p))
}

/// Discrete `W^{1,2}` seminorm `(sum w_{i+1/2} (Du)^2 h)^{1/2}` over the
/// half-nodes interior to a region.
pub fn w12_seminorm(u: &GridFunction, op: &DiscreteOperator, region: Region) -> f64 {
    let h = u.grid().spacing();
    let v = u.values();
    let mut acc = 0.0;
    for i in region.lo..region.hi {
        let du = (v[i + 1] - v[i]) / h;
        acc += op.w_half[i] * du * du * h;
    }
    acc.sqrt()
}

/// Solves the tridiagonal system (sub, diag, sup) x = rhs by the Thomas
/// algorithm. The shipped systems are diagonally dominant M-matrices or
/// SPD, so no pivoting is needed; a vanishing pivot is reported.
pub(crate) fn tridiag_solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(sub.len(), n - 1);
    debug_assert_eq!(sup.len(), n - 1);
    debug_assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n - 1];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return Err(Error::SolveFailed("zero pivot at row 0".to_string()));
    }
    c[0] = sup[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i - 1] * c[i - 1];
        if piv.abs() < 1e-300 {
            return Err(Error::SolveFailed(format!("zero pivot at row {i}")));
        }
        if i < n - 1 {
            c[i] = sup[i] / piv;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Solves `(A u)_i = f_i` on the interior of `region` with Dirichlet values
/// at the region ends. When the region starts at a pole node the left end
/// is an interior point of the manifold: the pole reflection row
/// `2n (u_1 - u_0)/h^2 - lambda_0 u_0 = f_0` replaces the Dirichlet pin
/// there and `left_value` is ignored.
pub(crate) fn solve_dirichlet(
    op: &DiscreteOperator,
    region: Region,
    left_value: f64,
    right_value: f64,
    f: &[f64],
) -> Result<Vec<f64>> {
    let h = op.grid.spacing();
    let mu = op.grid.measure();
    let m = region.node_count();
    if m < 3 {
        return Err(Error::InvalidArgument(
            "region too small to solve".to_string(),
        ));
    }
    let mut sub = vec![0.0; m - 1];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m - 1];
    let mut rhs = vec![0.0; m];
    if region.lo == 0 && op.left == BoundaryTag::PoleNeumann {
        let dim = op.grid.manifold().n as f64;
        diag[0] = -2.0 * dim / (h * h) - op.lambda[0];
        sup[0] = 2.0 * dim / (h * h);
        rhs[0] = f[0];
    } else {
        diag[0] = 1.0;
        rhs[0] = left_value;
    }
    diag[m - 1] = 1.0;
    rhs[m - 1] = right_value;
    for k in 1..m - 1 {
        let i = region.lo + k;
        let wl = op.w_half[i - 1] / h;
        let wr = op.w_half[i] / h;
        sub[k - 1] = wl;
        diag[k] = -(wl + wr) - op.lambda[i] * mu[i];
        sup[k] = wr;
        rhs[k] = mu[i] * f[i];
    }
    tridiag_solve(&sub, &diag, &sup, &rhs)
}

/// Solves `(-A + shift) u = f` on the whole grid, honoring the operator's
/// boundary tags (Dirichlet ends are homogeneous).
pub(crate) fn solve_shifted_full(op: &DiscreteOperator, shift: f64, f: &[f64]) -> Result<Vec<f64>> {
    let grid = &op.grid;
    let n = grid.len();
    let h = grid.spacing();
    let mu = grid.measure();
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let wl = op.w_half[i - 1] / h;
        let wr = op.w_half[i] / h;
        sub[i - 1] = -wl;
        diag[i] = wl + wr + (op.lambda[i] + shift) * mu[i];
        sup[i] = -wr;
        rhs[i] = mu[i] * f[i];
    }
    match op.left {
        BoundaryTag::PoleNeumann => {
            let dim = grid.manifold().n as f64;
            diag[0] = 2.0 * dim / (h * h) + op.lambda[0] + shift;
            sup[0] = -2.0 * dim / (h * h);
            rhs[0] = f[0];
        }
        BoundaryTag::Natural => {
            let wr = op.w_half[0] / h;
            diag[0] = wr + (op.lambda[0] + shift) * mu[0];
            sup[0] = -wr;
            rhs[0] = mu[0] * f[0];
        }
        BoundaryTag::Dirichlet => {
            diag[0] = 1.0;
            sup[0] = 0.0;
            rhs[0] = 0.0;
        }
    }
    match op.right {
        BoundaryTag::Natural => {
            let wl = op.w_half[n - 2] / h;
            diag[n - 1] = wl + (op.lambda[n - 1] + shift) * mu[n - 1];
            sub[n - 2] = -wl;
            rhs[n - 1] = mu[n - 1] * f[n - 1];
        }
        BoundaryTag::Dirichlet | BoundaryTag::PoleNeumann => {
            diag[n - 1] = 1.0;
            sub[n - 2] = 0.0;
            rhs[n - 1] = 0.0;
        }
    }
    tridiag_solve(&sub, &diag, &sup, &rhs)
}

/// Bottom of the spectrum of `-A` on a subdomain with Dirichlet conditions,
/// by inverse iteration on the symmetric mu-weighted tridiagonal form.
///
/// Returns the smallest eigenvalue to relative accuracy 1e-8 (of the
/// discrete problem; the h -> 0 bias is the caller's concern).
pub fn spectral_bottom(op: &DiscreteOperator, region: Region) -> Result<f64> {
    let m = region.node_count();
    if m < 5 {
        return Err(Error::InvalidArgument(
            "need at least 3 interior nodes".to_string(),
        ));
    }
    let h = op.grid.spacing();
    let mu = op.grid.measure();
    let k = m - 2; // interior unknowns
    let mut sub = vec![0.0; k - 1];
    let mut diag = vec![0.0; k];
    let mut sup = vec![0.0; k - 1];
    let mut mass = vec![0.0; k];
    for j in 0..k {
        let i = region.lo + 1 + j;
        let wl = op.w_half[i - 1] / h;
        let wr = op.w_half[i] / h;
        diag[j] = wl + wr + op.lambda[i] * mu[i];
        if j > 0 {
            sub[j - 1] = -wl;
        }
        if j + 1 < k {
            sup[j] = -wr;
        }
        mass[j] = mu[i];
    }
    // Inverse iteration: y = C^{-1} M x, Rayleigh quotient from C y = M x.
    let mut x: Vec<f64> = (0..k)
        .map(|j| {
            let s = (j + 1) as f64 / (k + 1) as f64;
            (std::f64::consts::PI * s).sin()
        })
        .collect();
    let mnorm = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&mass)
            .map(|(&vi, &mi)| vi * vi * mi)
            .sum::<f64>()
            .sqrt()
    };
    let nx = mnorm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut lambda_old = f64::INFINITY;
    for iter in 0..2000 {
        let mx: Vec<f64> = x.iter().zip(&mass).map(|(&xi, &mi)| xi * mi).collect();
        let y = tridiag_solve(&sub, &diag, &sup, &mx)?;
        let ymy: f64 = y.iter().zip(&mass).map(|(&yi, &mi)| yi * yi * mi).sum();
        let ymx: f64 = y.iter().zip(&mx).map(|(&yi, &mxi)| yi * mxi).sum();
        if !(ymy > 0.0) || !ymx.is_finite() {
            return Err(Error::Stagnation(format!(
                "inverse iteration degenerated at step {iter}"
            )));
        }
        let lambda = ymx / ymy;
        let ny = ymy.sqrt();
        x = y.iter().map(|&yi| yi / ny).collect();
        if (lambda - lambda_old).abs() <= 1e-11 * lambda.abs().max(1e-300) {
            return Ok(lambda);
        }
        lambda_old = lambda;
    }
    Err(Error::Stagnation(
        "inverse iteration did not converge in 2000 steps".to_string(),
    ))
}

/// Report of the entrywise-positivity check for `(-Delta + shift)^{-1}`.
#[derive(Debug, Clone)]
pub struct ResolventReport {
    /// Whether the matrix has the M-matrix sign pattern with nonnegative
    /// row sums (guaranteeing an entrywise nonnegative inverse).
    pub m_matrix_pattern: bool,
    /// Smallest entry of the inverse found by solving against every basis
    /// function.
    pub min_entry: f64,
    /// (row, column) of the smallest entry.
    pub witness: (usize, usize),
    pub pass: bool,
}

/// Verifies entrywise nonnegativity of `(-Delta + shift)^{-1}` with the
/// manifold's boundary tags, by direct solves against each basis function.
pub fn resolvent_positivity(grid: &Arc<RadialGrid>, shift: f64) -> Result<ResolventReport> {
    let op = DiscreteOperator::laplacian(grid);
    let n = grid.len();
    let h = grid.spacing();
    let mu = grid.measure();
    // Sign-pattern check on the assembled rows.
    let mut pattern = shift >= 0.0;
    for i in 1..n - 1 {
        let wl = op.w_half[i - 1] / h;
        let wr = op.w_half[i] / h;
        if wl + wr + shift * mu[i] <= 0.0 {
            pattern = false;
        }
    }
    let mut min_entry = f64::INFINITY;
    let mut witness = (0, 0);
    let mut basis = vec![0.0; n];
    for j in 0..n {
        basis[j] = 1.0;
        let col = solve_shifted_full(&op, shift, &basis)?;
        basis[j] = 0.0;
        for (i, &v) in col.iter().enumerate() {
            if v < min_entry {
                min_entry = v;
                witness = (i, j);
            }
        }
    }
    let scale = 1.0 / shift.abs().max(1.0);
    Ok(ResolventReport {
        m_matrix_pattern: pattern,
        min_entry,
        witness,
        pass: min_entry >= -1e-10 * scale,
    })
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::geometry::{make_model, DomainSpec, WarpingProfile};
    use proptest::prelude::*;

    fn grid_for(n_nodes: usize) -> Arc<RadialGrid> {
        make_model(
            WarpingProfile::Hyperbolic,
            2,
            DomainSpec::ball(3.0),
            n_nodes,
        )
        .unwrap()
        .1
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Summation by parts holds for arbitrary samples, not just smooth
        /// ones.
        #[test]
        fn green_identity_for_arbitrary_samples(
            raw in prop::collection::vec(-1.0f64..1.0, 64),
            lambda in 0.0f64..2.0,
        ) {
            let grid = grid_for(32);
            let u = GridFunction::from_values(&grid, raw[0..32].to_vec()).unwrap();
            let mut phi_vals = raw[32..64].to_vec();
            phi_vals[0] = 0.0;
            phi_vals[31] = 0.0;
            let phi = GridFunction::from_values(&grid, phi_vals).unwrap();
            let op = DiscreteOperator::schrodinger_const(&grid, lambda).unwrap();
            let a = pair_distributional(&u, &phi, &op).unwrap();
            let b = weak_form_pair(&u, &phi, &op).unwrap();
            let scale: f64 = op
                .mu_action(phi.values())
                .iter()
                .map(|x| x.abs())
                .sum::<f64>()
                .max(1.0);
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }

        /// Pass/fail of the zero-tolerance certificate is invariant under
        /// positive rescaling.
        #[test]
        fn certificate_scale_invariance(
            raw in prop::collection::vec(-1.0f64..1.0, 32),
            factor in 0.01f64..100.0,
        ) {
            let grid = grid_for(32);
            let op = DiscreteOperator::laplacian(&grid);
            let region = Region::all(&grid);
            let u = GridFunction::from_values(&grid, raw).unwrap();
            // Rounding moves pairings near zero across the boundary, so
            // compare strictly signed pairings away from zero.
            let c1 = check_subsolution_with_tol(&u, &op, region, 0.0);
            if c1.min_pairing.abs() > 1e-9 * op_scale_prop(&op, &grid) {
                let c2 = check_subsolution_with_tol(&u.scaled(factor), &op, region, 0.0);
                prop_assert_eq!(c1.pass, c2.pass);
            }
        }
    }

    fn op_scale_prop(op: &DiscreteOperator, grid: &RadialGrid) -> f64 {
        op.weights().iter().fold(0.0f64, |m, &w| m.max(w)) / grid.spacing()
    }
}
