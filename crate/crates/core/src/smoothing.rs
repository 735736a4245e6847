//! Monotone smooth approximation of rough subsolutions on an inner domain.
//!
//! The construction runs entirely in the Green coordinate
//! `t(r) = int dr / w(r)` of the working operator (the conjugated weighted
//! operator when a zero-order term is present, the operator itself
//! otherwise). In that coordinate the divergence-form inequality
//! `(w v')' >= 0` says exactly that the nodal values are convex as a
//! function of t, so the pipeline is
//!
//! 1. divide by the ground state (skipped when lambda = 0),
//! 2. reparametrize by t,
//! 3. mollify the piecewise-linear interpolant in t with a symmetric
//!    kernel of radius `eps_k = eps_0 2^{-k}`,
//! 4. map back and multiply by alpha.
//!
//! Mollification of a convex function is convex (preserves the
//! subsolution certificate), dominates the function (Jensen), and is
//! monotone in the kernel radius; with the kernel realized as a symmetric
//! normalized point mass family and the interpolant evaluated exactly,
//! all three properties hold to rounding accuracy, not merely to
//! discretization accuracy. The inner domain is the region shrunk by
//! `eps_0` in the t metric so every evaluation stays inside the data.

use crate::error::{Error, Result};
use crate::geometry::LeftKind;
use crate::groundstate::{solve_dirichlet_ground, GroundState};
use crate::operators::{
    check_subsolution, default_tolerance, DiscreteOperator, GridFunction, IneqCertificate, Region,
};
use crate::sampling::green_nodes;

/// Monotone map `t(r) = int_{r_0}^r d rho / w(rho)` over the region,
/// accumulated with the half-node conduction weights (`t_{k+1} - t_k =
/// h / w_{k+1/2}`), which is the parametrization under which hat pairings
/// are exactly second differences.
pub fn green_coordinate(op: &DiscreteOperator, region: Region) -> Result<Vec<f64>> {
    let grid = op.grid();
    if region.lo == 0 && grid.manifold().left == LeftKind::Pole {
        return Err(Error::PreconditionFailed(
            "green coordinate rejects regions touching a pole (w vanishes there)".to_string(),
        ));
    }
    Ok(green_nodes(op, region))
}

/// Quartic B-spline bump on [-1, 1] (Irwin-Hall density of order five,
/// rescaled): piecewise quartic, C^3, symmetric, compactly supported.
fn quartic_bspline(s: f64) -> f64 {
    let x = 2.5 * (s + 1.0);
    if !(0.0..=5.0).contains(&x) {
        return 0.0;
    }
    let binom = [1.0, 5.0, 10.0, 10.0, 5.0];
    let mut acc = 0.0;
    let mut sign = 1.0;
    for (k, b) in binom.iter().enumerate() {
        let d = x - k as f64;
        if d <= 0.0 {
            break;
        }
        acc += sign * b * d.powi(4);
        sign = -sign;
    }
    2.5 * acc / 24.0
}

/// Symmetric discrete kernel: lattice `s_q = q/Q`, weights proportional to
/// the quartic bump, normalized so constants are reproduced exactly.
#[derive(Debug, Clone)]
struct DiscreteKernel {
    /// Weight at s = 0.
    w0: f64,
    /// Weights at s = q/Q, q = 1..Q (applied symmetrically).
    side: Vec<f64>,
    q: usize,
}

impl DiscreteKernel {
    fn new(q: usize) -> Self {
        let raw0 = quartic_bspline(0.0);
        let side_raw: Vec<f64> = (1..=q)
            .map(|k| quartic_bspline(k as f64 / q as f64))
            .collect();
        let total = raw0 + 2.0 * side_raw.iter().sum::<f64>();
        DiscreteKernel {
            w0: raw0 / total,
            side: side_raw.iter().map(|r| r / total).collect(),
            q,
        }
    }

    /// Mollified value at t, evaluating the interpolant in symmetric pairs
    /// so that convexity, domination and radius-monotonicity are exact.
    fn apply(&self, interp: &Interpolant<'_>, t: f64, eps: f64) -> f64 {
        let mut acc = self.w0 * interp.eval(t);
        for (k, &wq) in self.side.iter().enumerate() {
            let s = (k + 1) as f64 / self.q as f64 * eps;
            acc += wq * (interp.eval(t + s) + interp.eval(t - s));
        }
        acc
    }
}

/// Piecewise-linear interpolant of values on a strictly increasing
/// coordinate vector.
struct Interpolant<'a> {
    t: &'a [f64],
    v: &'a [f64],
}

impl Interpolant<'_> {
    fn eval(&self, x: f64) -> f64 {
        let t = self.t;
        let n = t.len();
        if x <= t[0] {
            return self.v[0];
        }
        if x >= t[n - 1] {
            return self.v[n - 1];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let frac = (x - t[lo]) / (t[lo + 1] - t[lo]);
        self.v[lo] + frac * (self.v[lo + 1] - self.v[lo])
    }
}

/// Monotone approximating sequence of a subsolution.
#[derive(Debug, Clone)]
pub struct ApproxSequence {
    /// Operator the certificates refer to.
    pub op: DiscreteOperator,
    /// Ground state used for the reduction, when lambda != 0.
    pub groundstate: Option<GroundState>,
    /// The approximated function.
    pub base: GridFunction,
    /// Domain the construction ran on.
    pub region: Region,
    /// Inner domain (region shrunk by eps_0 in the t metric) on which the
    /// approximation properties hold.
    pub inner: Region,
    /// Smoothing radii, one per iterate.
    pub eps: Vec<f64>,
    /// Iterates u_k; they coincide with `base` outside the inner domain.
    pub iterates: Vec<GridFunction>,
    /// Whether the two-grid-cell radius floor clipped any eps_k.
    pub floor_bound: bool,
}

/// Builds the monotone smooth approximation of `u` on `region`.
///
/// Preconditions: `u` passes the subsolution certificate for `op` on the
/// region (default tolerance) and `k_len >= 2`. `eps0` defaults to one
/// tenth of the t-diameter of the region; radii are floored at two grid
/// cells in t, and the floor is reported when it binds.
pub fn monotone_smooth_approx(
    u: &GridFunction,
    op: &DiscreteOperator,
    region: Region,
    k_len: usize,
    eps0: Option<f64>,
) -> Result<ApproxSequence> {
    if k_len < 2 {
        return Err(Error::InvalidArgument(format!(
            "sequence length must be >= 2, got {k_len}"
        )));
    }
    let cert = check_subsolution(u, op, region);
    if !cert.pass {
        return Err(Error::PreconditionFailed(format!(
            "input is not a certified subsolution (min pairing {} < -{} at node {})",
            cert.min_pairing, cert.tolerance, cert.worst_node
        )));
    }
    let gs = if op.has_zero_order() {
        Some(solve_dirichlet_ground(op, region, 1.0)?)
    } else {
        None
    };
    let working = match &gs {
        Some(g) => g.weighted_operator(),
        None => op.clone(),
    };
    let v: GridFunction = match &gs {
        Some(g) => crate::groundstate::ground_transform(u, g),
        None => u.clone(),
    };
    let t = green_coordinate(&working, region)?;
    let diam = t[t.len() - 1] - t[0];
    let eps0 = eps0.unwrap_or(diam / 10.0);
    if !(eps0 > 0.0) || eps0 >= 0.5 * diam {
        return Err(Error::InvalidArgument(format!(
            "eps0 = {eps0} must lie in (0, t-diameter/2 = {})",
            0.5 * diam
        )));
    }
    // Inner domain: region shrunk by eps0 in t.
    let mut lo_in = None;
    let mut hi_in = None;
    for (k, &tk) in t.iter().enumerate() {
        if tk - t[0] >= eps0 && lo_in.is_none() {
            lo_in = Some(region.lo + k);
        }
        if t[t.len() - 1] - tk >= eps0 {
            hi_in = Some(region.lo + k);
        }
    }
    let (lo_in, hi_in) = match (lo_in, hi_in) {
        (Some(a), Some(b)) if b >= a + 2 => (a, b),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "region too small for eps0 = {eps0}; shrink eps0 or enlarge the region"
            )))
        }
    };
    let inner = Region::new(lo_in, hi_in);
    let max_cell = t.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    let floor = 2.0 * max_cell;
    let kernel = DiscreteKernel::new(16);
    let interp = Interpolant {
        t: &t,
        v: &v.values()[region.lo..=region.hi],
    };
    let mut eps = Vec::with_capacity(k_len);
    let mut iterates = Vec::with_capacity(k_len);
    let mut floor_bound = false;
    let alpha = gs.as_ref().map(|g| g.alpha().clone());
    for k in 1..=k_len {
        let nominal = eps0 * 0.5f64.powi(k as i32);
        let ek = if nominal < floor {
            floor_bound = true;
            floor
        } else {
            nominal
        };
        let mut vals = u.values().to_vec();
        for i in inner.lo..=inner.hi {
            let vk = kernel.apply(&interp, t[i - region.lo], ek);
            vals[i] = match &alpha {
                Some(a) => vk * a.values()[i],
                None => vk,
            };
        }
        eps.push(ek);
        iterates.push(GridFunction::from_values(u.grid(), vals)?);
    }
    Ok(ApproxSequence {
        op: op.clone(),
        groundstate: gs,
        base: u.clone(),
        region,
        inner,
        eps,
        iterates,
        floor_bound,
    })
}

/// Verification record of the four approximation properties.
#[derive(Debug, Clone)]
pub struct ApproxReport {
    /// a) `u <= u_{k+1} <= u_k` nodewise on the inner domain.
    pub monotone_pass: bool,
    /// First violation of a): (iterate index, node, gap).
    pub monotone_witness: Option<(usize, usize, f64)>,
    /// Tolerance used for a): 1e-12 times the data scale.
    pub monotone_tol: f64,
    /// c) subsolution certificate of every iterate on the inner domain.
    pub certificates: Vec<IneqCertificate>,
    pub certificates_pass: bool,
    /// d) `L^1(inner)` errors per iterate and their consecutive ratios.
    pub l1_errors: Vec<f64>,
    pub l1_ratios: Vec<f64>,
    pub decay_pass: bool,
    /// b) nodewise convergence at every inner node.
    pub nodewise_pass: bool,
    pub floor_bound: bool,
}

impl ApproxReport {
    pub fn all_pass(&self) -> bool {
        self.monotone_pass && self.certificates_pass && self.decay_pass && self.nodewise_pass
    }
}

/// Checks properties a)-d) of an approximating sequence.
pub fn verify_approx_properties(seq: &ApproxSequence) -> ApproxReport {
    let inner = seq.inner;
    let base = seq.base.values();
    let scale = seq
        .iterates
        .iter()
        .map(|it| it.sup_norm_on(inner))
        .fold(seq.base.sup_norm_on(inner), f64::max)
        .max(1e-300);
    let tol_a = 1e-12 * scale;

    // a) u <= u_{k+1} <= u_k nodewise.
    let mut monotone_pass = true;
    let mut witness = None;
    'outer: for k in 0..seq.iterates.len() {
        let uk = seq.iterates[k].values();
        for i in inner.lo..=inner.hi {
            let below = base[i] - uk[i];
            if below > tol_a {
                monotone_pass = false;
                witness = Some((k, i, below));
                break 'outer;
            }
            if k + 1 < seq.iterates.len() {
                let gap = seq.iterates[k + 1].values()[i] - uk[i];
                if gap > tol_a {
                    monotone_pass = false;
                    witness = Some((k + 1, i, gap));
                    break 'outer;
                }
            }
        }
    }

    // c) certificates per iterate.
    let certificates: Vec<IneqCertificate> = seq
        .iterates
        .iter()
        .map(|uk| {
            let tol = default_tolerance(uk, &seq.op, inner);
            crate::operators::check_subsolution_with_tol(uk, &seq.op, inner, tol)
        })
        .collect();
    let certificates_pass = certificates.iter().all(|c| c.pass);

    // d) L^1 decay on the inner domain.
    let mu = seq.base.grid().measure();
    let l1_errors: Vec<f64> = seq
        .iterates
        .iter()
        .map(|uk| {
            (inner.lo..=inner.hi)
                .map(|i| (uk.values()[i] - base[i]).abs() * mu[i])
                .sum()
        })
        .collect();
    let l1_ratios: Vec<f64> = l1_errors
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let e_first = l1_errors[0];
    let e_last = l1_errors[l1_errors.len() - 1];
    let decay_pass = e_first <= tol_a || e_last <= 0.5 * e_first + tol_a;

    // b) nodewise convergence: the final error at each node is well below
    // the first (monotone by a), so halving suffices), up to rounding.
    let first = seq.iterates[0].values();
    let last = seq.iterates[seq.iterates.len() - 1].values();
    let tol_b = 1e-10 * scale;
    let mut nodewise_pass = true;
    for i in inner.lo..=inner.hi {
        let e1 = (first[i] - base[i]).abs();
        let ek = (last[i] - base[i]).abs();
        if ek > 0.5 * e1 + tol_b {
            nodewise_pass = false;
            break;
        }
    }

    ApproxReport {
        monotone_pass,
        monotone_witness: witness,
        monotone_tol: tol_a,
        certificates,
        certificates_pass,
        l1_errors,
        l1_ratios,
        decay_pass,
        nodewise_pass,
        floor_bound: seq.floor_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_model, DomainSpec, RadialGrid, WarpingProfile};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn euclid3(r_max: f64, n_nodes: usize) -> Arc<RadialGrid> {
        make_model(
            WarpingProfile::Euclidean,
            3,
            DomainSpec::ball(r_max),
            n_nodes,
        )
        .unwrap()
        .1
    }

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = DiscreteKernel::new(16);
        let total = k.w0 + 2.0 * k.side.iter().sum::<f64>();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
        assert!(k.side.iter().all(|&w| w >= 0.0));
        // Bump integrates to one in the continuum too.
        let m = 20000;
        let quad: f64 = (0..m)
            .map(|j| quartic_bspline(-1.0 + 2.0 * (j as f64 + 0.5) / m as f64) * 2.0 / m as f64)
            .sum();
        assert_abs_diff_eq!(quad, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn green_coordinate_flat_weight() {
        let grid = euclid3(2.0, 101);
        let flat = DiscreteOperator::weighted(
            &grid,
            vec![1.0; grid.len() - 1],
            crate::operators::BoundaryTag::Dirichlet,
            crate::operators::BoundaryTag::Dirichlet,
        )
        .unwrap();
        let region = Region::from_radii(&grid, 0.5, 1.5).unwrap();
        let t = green_coordinate(&flat, region).unwrap();
        for (k, &tk) in t.iter().enumerate() {
            assert_abs_diff_eq!(tk, k as f64 * grid.spacing(), epsilon = 1e-12);
        }
    }

    #[test]
    fn green_coordinate_euclidean_closed_form() {
        // t(r) = (1 - 1/r) / (4 pi) from r0 = 1 when w = S.
        let mut errs = Vec::new();
        for n_nodes in [201usize, 401] {
            let grid = euclid3(2.0, n_nodes);
            let op = DiscreteOperator::laplacian(&grid);
            let region = Region::from_radii(&grid, 1.0, 2.0).unwrap();
            let t = green_coordinate(&op, region).unwrap();
            let exact = (1.0 - 1.0 / 2.0) / (4.0 * PI);
            errs.push((t[t.len() - 1] - exact).abs());
        }
        assert!(errs[0] / errs[1] > 3.5, "not O(h^2): {errs:?}");
    }

    #[test]
    fn green_coordinate_hyperbolic_closed_form() {
        let (_, grid) =
            make_model(WarpingProfile::Hyperbolic, 2, DomainSpec::ball(3.0), 801).unwrap();
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 1.0, 2.5).unwrap();
        let t = green_coordinate(&op, region).unwrap();
        let r0 = grid.node(region.lo);
        let exact = |r: f64| ((r / 2.0).tanh().ln() - (r0 / 2.0).tanh().ln()) / (2.0 * PI);
        let mid = region.lo + region.node_count() / 2;
        assert_relative_eq!(
            t[mid - region.lo],
            exact(grid.node(mid)),
            max_relative = 1e-5
        );
    }

    #[test]
    fn green_coordinate_rejects_pole() {
        let grid = euclid3(2.0, 101);
        let op = DiscreteOperator::laplacian(&grid);
        assert!(green_coordinate(&op, Region::all(&grid)).is_err());
    }

    #[test]
    fn constants_are_fixed_points() {
        let grid = euclid3(2.0, 401);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 1.8).unwrap();
        let u = GridFunction::constant(&grid, 3.25);
        let seq = monotone_smooth_approx(&u, &op, region, 3, None).unwrap();
        for uk in &seq.iterates {
            for i in seq.inner.lo..=seq.inner.hi {
                assert_abs_diff_eq!(uk.values()[i], 3.25, epsilon = 1e-12);
            }
        }
        let rep = verify_approx_properties(&seq);
        assert!(rep.all_pass());
        assert!(rep.l1_errors.iter().all(|&e| e < 1e-12));
    }

    /// Kink subsolution linear in the grid Green coordinate: the discrete
    /// analogue of max(-1, -1/r) (which is linear in t in the continuum).
    fn green_kink(grid: &Arc<RadialGrid>, region: Region) -> GridFunction {
        let op = DiscreteOperator::laplacian(grid);
        let t = green_coordinate(&op, region).unwrap();
        let t_star = 0.5 * t[t.len() - 1];
        let slope = 4.0 * PI;
        let mut vals = vec![-1.0; grid.len()];
        for i in region.lo..=region.hi {
            vals[i] = (-1.0f64).max(-1.0 + slope * (t[i - region.lo] - t_star));
        }
        for i in region.hi..grid.len() {
            vals[i] = vals[region.hi];
        }
        GridFunction::from_values(grid, vals).unwrap()
    }

    #[test]
    fn kink_sequence_has_all_four_properties() {
        let grid = euclid3(2.0, 4001);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
        let u = green_kink(&grid, region);
        let seq = monotone_smooth_approx(&u, &op, region, 3, None).unwrap();
        assert!(!seq.floor_bound);
        let rep = verify_approx_properties(&seq);
        assert!(rep.monotone_pass, "witness {:?}", rep.monotone_witness);
        assert!(rep.certificates_pass);
        assert!(rep.decay_pass);
        assert!(rep.nodewise_pass);
        // eps-halving quarters the L^1 error.
        for ratio in &rep.l1_ratios {
            assert!(
                (*ratio - 0.25).abs() < 0.075,
                "L1 ratio {ratio} not within 30% of 1/4: {:?}",
                rep.l1_errors
            );
        }
        // The kink is rounded only inside a shrinking t-neighborhood.
        let t = green_coordinate(&op, region).unwrap();
        let t_star = 0.5 * t[t.len() - 1];
        let last = seq.iterates.last().unwrap().values();
        let ek = *seq.eps.last().unwrap();
        for i in seq.inner.lo..=seq.inner.hi {
            if (t[i - region.lo] - t_star).abs() > ek {
                assert_abs_diff_eq!(last[i], u.values()[i], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn radial_kink_smooths_with_certified_iterates() {
        // The r-space kink max(-1, -1/r) carries an O(h^3) convexity
        // deficit relative to the grid Green coordinate, so its sequence is
        // monotone only up to that scale; certificates still pass at the
        // default tolerance.
        let grid = euclid3(2.0, 2001);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
        let u = GridFunction::from_fn(&grid, |r| if r < 1.0 { -1.0 } else { -1.0 / r });
        let seq = monotone_smooth_approx(&u, &op, region, 3, None).unwrap();
        let rep = verify_approx_properties(&seq);
        assert!(rep.certificates_pass);
        assert!(rep.decay_pass);
        let h = grid.spacing();
        for k in 0..seq.iterates.len() {
            for i in seq.inner.lo..=seq.inner.hi {
                assert!(seq.iterates[k].values()[i] >= u.values()[i] - 50.0 * h * h);
            }
        }
    }

    #[test]
    fn smooth_convex_input_with_ground_state() {
        // v = quadratic in the weighted Green coordinate, u = alpha v:
        // exactly certified, smooth in r; errors decay like eps^2.
        let grid = euclid3(2.0, 2001);
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::from_radii(&grid, 0.4, 1.8).unwrap();
        let gs = solve_dirichlet_ground(&op, region, 1.0).unwrap();
        let weighted = gs.weighted_operator();
        let t = green_coordinate(&weighted, region).unwrap();
        let t_mid = 0.5 * t[t.len() - 1];
        let t_scale = t[t.len() - 1];
        let mut vals = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            let ti = if i <= region.lo {
                t[0]
            } else if i >= region.hi {
                t[t.len() - 1]
            } else {
                t[i - region.lo]
            };
            let z = (ti - t_mid) / t_scale;
            vals[i] = (1.0 + z * z) * gs.alpha().values()[i];
        }
        let u = GridFunction::from_values(&grid, vals).unwrap();
        let seq = monotone_smooth_approx(&u, &op, region, 3, None).unwrap();
        let rep = verify_approx_properties(&seq);
        assert!(rep.monotone_pass, "witness {:?}", rep.monotone_witness);
        assert!(rep.certificates_pass);
        for ratio in &rep.l1_ratios {
            assert!((*ratio - 0.25).abs() < 0.05, "ratio {ratio}");
        }
    }

    #[test]
    fn shuffled_sequence_fails_monotonicity_with_witness() {
        let grid = euclid3(2.0, 1001);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
        let u = green_kink(&grid, region);
        let mut seq = monotone_smooth_approx(&u, &op, region, 3, None).unwrap();
        seq.iterates.reverse();
        let rep = verify_approx_properties(&seq);
        assert!(!rep.monotone_pass);
        assert!(rep.monotone_witness.is_some());
    }

    #[test]
    fn two_step_sequence_is_accepted() {
        let grid = euclid3(2.0, 1001);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
        let u = green_kink(&grid, region);
        let seq = monotone_smooth_approx(&u, &op, region, 2, None).unwrap();
        let rep = verify_approx_properties(&seq);
        assert!(rep.all_pass());
        assert_eq!(rep.l1_errors.len(), 2);
    }

    #[test]
    fn radius_floor_binds_on_coarse_grids() {
        let grid = euclid3(2.0, 101);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
        let u = green_kink(&grid, region);
        let seq = monotone_smooth_approx(&u, &op, region, 6, None).unwrap();
        assert!(seq.floor_bound);
        let last_two: Vec<f64> = seq.eps.iter().rev().take(2).cloned().collect();
        assert_eq!(last_two[0], last_two[1]);
    }

    #[test]
    fn oversized_eps0_is_rejected() {
        let grid = euclid3(2.0, 501);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
        let u = green_kink(&grid, region);
        assert!(monotone_smooth_approx(&u, &op, region, 3, Some(1e9)).is_err());
    }

    #[test]
    fn non_subsolution_input_is_refused() {
        let grid = euclid3(2.0, 501);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
        let bad = GridFunction::from_fn(&grid, |r| -r * r);
        assert!(monotone_smooth_approx(&bad, &op, region, 3, None).is_err());
    }

    #[test]
    fn convexity_is_equivalent_to_hat_positivity() {
        // Keystone, both directions: hat pairings are differences of
        // consecutive divided differences in t.
        let grid = euclid3(2.0, 301);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 1.9).unwrap();
        let t = green_coordinate(&op, region).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let mut vals = vec![0.0; grid.len()];
            for i in region.lo..=region.hi {
                vals[i] = rng.gen_range(-1.0..1.0);
            }
            let u = GridFunction::from_values(&grid, vals).unwrap();
            for j in region.lo + 1..region.hi {
                let p = op.hat_pairing(u.values(), j);
                let k = j - region.lo;
                let dd_right = (u.values()[j + 1] - u.values()[j]) / (t[k + 1] - t[k]);
                let dd_left = (u.values()[j] - u.values()[j - 1]) / (t[k] - t[k - 1]);
                let diff = dd_right - dd_left;
                assert_abs_diff_eq!(p, diff, epsilon = 1e-9 * diff.abs().max(1.0));
            }
        }
    }
}
