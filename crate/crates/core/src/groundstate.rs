//! Positive solutions of `L alpha = 0` and the reduction of L-subsolutions
//! to subsolutions of the weighted Laplacian `Delta_alpha`.
//!
//! Dividing by a positive solution alpha of `L alpha = 0` turns the
//! Schrodinger operator into a pure divergence form: `u` is an
//! L-subsolution iff `u/alpha` is a `Delta_alpha`-subsolution, with
//! `Delta_alpha v = alpha^{-2} div(alpha^2 w grad v)` and the weighted
//! measure `alpha^2 mu`.
//!
//! Two discrete realizations of `Delta_alpha` coexist on purpose:
//!
//! * [`GroundState::weighted_operator`] uses the conjugated conduction
//!   weight `w_{i+1/2} alpha_i alpha_{i+1}`. Because alpha solves the
//!   discrete equation exactly, this operator satisfies the pairing-level
//!   identity `sum v B_alpha(phi/alpha) = sum (alpha v) B_L(phi)` to
//!   machine precision and transports subsolution certificates exactly in
//!   both directions. All certificate work goes through it.
//! * [`GroundState::averaged_operator`] discretizes the weight as
//!   `((alpha_i + alpha_{i+1})/2)^2 w_{i+1/2}`, the direct reading of
//!   `alpha^2 w` at half-nodes. The resulting *pointwise* identity
//!   `alpha (Delta_alpha (phi/alpha)) = L phi` then holds only to O(h^2),
//!   which is what [`verify_pw_identity`] measures as convergence
//!   evidence.

use crate::error::{Error, Result};
use crate::operators::{
    check_subsolution_with_tol, solve_dirichlet, DiscreteOperator, GridFunction, IneqCertificate,
    Region,
};

/// Positive solution of `L alpha = 0` on a region, together with the
/// induced weighted operators.
#[derive(Debug, Clone)]
pub struct GroundState {
    op: DiscreteOperator,
    region: Region,
    alpha: GridFunction,
    /// Max interior residual of the strong equation `(L alpha)_i = 0`
    /// (solver roundoff; the system is solved directly).
    pub residual: f64,
}

impl GroundState {
    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// alpha, extended by its boundary value outside the region.
    pub fn alpha(&self) -> &GridFunction {
        &self.alpha
    }

    /// Exactly conjugated weighted operator: weight `w alpha_i alpha_{i+1}`,
    /// no zero-order term.
    pub fn weighted_operator(&self) -> DiscreteOperator {
        let a = self.alpha.values();
        let w: Vec<f64> = self
            .op
            .weights()
            .iter()
            .enumerate()
            .map(|(i, &wi)| wi * a[i] * a[i + 1])
            .collect();
        DiscreteOperator::weighted(self.op.grid(), w, self.op.left, self.op.right)
            .expect("positive alpha yields positive weights")
    }

    /// Half-node-averaged weighted operator: weight
    /// `((alpha_i + alpha_{i+1})/2)^2 w`.
    pub fn averaged_operator(&self) -> DiscreteOperator {
        let a = self.alpha.values();
        let w: Vec<f64> = self
            .op
            .weights()
            .iter()
            .enumerate()
            .map(|(i, &wi)| {
                let am = 0.5 * (a[i] + a[i + 1]);
                wi * am * am
            })
            .collect();
        DiscreteOperator::weighted(self.op.grid(), w, self.op.left, self.op.right)
            .expect("positive alpha yields positive weights")
    }

    /// Weighted measure `alpha_i^2 mu_i`.
    pub fn weighted_measure(&self) -> Vec<f64> {
        let a = self.alpha.values();
        self.op
            .grid()
            .measure()
            .iter()
            .enumerate()
            .map(|(i, &mi)| a[i] * a[i] * mi)
            .collect()
    }
}

/// Solves the Dirichlet problem `L alpha = 0` on the region with constant
/// boundary value `c > 0` and verifies positivity a posteriori (the
/// maximum principle guarantees it; a violation means the grid is too
/// coarse for this lambda).
pub fn solve_dirichlet_ground(
    op: &DiscreteOperator,
    region: Region,
    boundary_value: f64,
) -> Result<GroundState> {
    if !(boundary_value > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "boundary value must be positive, got {boundary_value}"
        )));
    }
    if op.lambda().iter().any(|&l| l < 0.0) {
        return Err(Error::PreconditionFailed(
            "ground-state solve requires lambda >= 0".to_string(),
        ));
    }
    let grid = op.grid();
    let zero = vec![0.0; grid.len()];
    let sol = solve_dirichlet(op, region, boundary_value, boundary_value, &zero)?;
    if let Some(k) = sol.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::DiscretizationFailure(format!(
            "ground state not positive at node {} (grid too coarse for this lambda)",
            region.lo + k
        )));
    }
    // Extend by the boundary constant so downstream weights stay positive.
    let mut full = vec![boundary_value; grid.len()];
    full[region.lo..=region.hi].copy_from_slice(&sol);
    let alpha = GridFunction::from_values(grid, full)?;
    let b = op.mu_action(alpha.values());
    let mu = grid.measure();
    let residual = (region.lo + 1..region.hi)
        .map(|i| (b[i] / mu[i]).abs())
        .fold(0.0f64, f64::max);
    Ok(GroundState {
        op: op.clone(),
        region,
        alpha,
        residual,
    })
}

/// Protter-Weinberger division `v = u / alpha` (pointwise; alpha > 0).
pub fn ground_transform(u: &GridFunction, gs: &GroundState) -> GridFunction {
    u.zip_with(gs.alpha(), |ui, ai| ui / ai)
}

/// Residuals of the ground-state identity, in strong and pairing form.
#[derive(Debug, Clone)]
pub struct PwIdentityReport {
    /// `max_i |alpha_i (Delta_alpha (phi/alpha))_i - (L phi)_i|` over the
    /// region interior, with the averaged-weight operator: O(h^2).
    pub strong_residual: f64,
    /// `|sum v B_alpha(phi/alpha) - sum (alpha v) B_L(phi)|` with the
    /// conjugated operator, maximized over probe functions v: machine
    /// precision.
    pub adjoint_residual: f64,
    /// Magnitude the adjoint residual should be compared against.
    pub adjoint_scale: f64,
}

/// mu-weighted flux action restricted to a region, with zero-flux closure
/// at the region ends.
pub(crate) fn mu_action_region(op: &DiscreteOperator, vals: &[f64], region: Region) -> Vec<f64> {
    let h = op.grid().spacing();
    let mu = op.grid().measure();
    let lam = op.lambda();
    let w = op.weights();
    let m = region.node_count();
    let flux = |k: usize| w[k] * (vals[k + 1] - vals[k]) / h;
    let mut b = vec![0.0; m];
    b[0] = flux(region.lo) - lam[region.lo] * vals[region.lo] * mu[region.lo];
    for j in 1..m - 1 {
        let i = region.lo + j;
        b[j] = flux(i) - flux(i - 1) - lam[i] * vals[i] * mu[i];
    }
    b[m - 1] = -flux(region.hi - 1) - lam[region.hi] * vals[region.hi] * mu[region.hi];
    b
}

/// Verifies the identity `alpha Delta_alpha(phi/alpha) = L phi` in both its
/// strong (pointwise, O(h^2)) and pairing (exact) forms, for a phi that
/// vanishes at the region ends.
pub fn verify_pw_identity(gs: &GroundState, phi: &GridFunction) -> Result<PwIdentityReport> {
    let region = gs.region();
    let grid = gs.operator().grid();
    let scale = phi.sup_norm().max(1e-300);
    if phi.values()[region.lo].abs() > 1e-13 * scale
        || phi.values()[region.hi].abs() > 1e-13 * scale
    {
        return Err(Error::PreconditionFailed(
            "phi must vanish at the region ends".to_string(),
        ));
    }
    let a = gs.alpha().values();
    let psi: Vec<f64> = phi.values().iter().zip(a).map(|(&p, &ai)| p / ai).collect();

    // Strong form with averaged weights.
    let avg = gs.averaged_operator();
    let b_avg = mu_action_region(&avg, &psi, region);
    let b_l = mu_action_region(gs.operator(), phi.values(), region);
    let mu = grid.measure();
    let mut strong = 0.0f64;
    for j in 1..region.node_count() - 1 {
        let i = region.lo + j;
        let mu_w = a[i] * a[i] * mu[i];
        let lhs = a[i] * (b_avg[j] / mu_w);
        let rhs = b_l[j] / mu[i];
        strong = strong.max((lhs - rhs).abs());
    }

    // Pairing form with conjugated weights, over probe functions v.
    let exact = gs.weighted_operator();
    let b_ex = mu_action_region(&exact, &psi, region);
    let m = region.node_count();
    let probes: Vec<Vec<f64>> = vec![
        vec![1.0; m],
        (0..m).map(|j| j as f64 / (m - 1) as f64).collect(),
        psi[region.lo..=region.hi].to_vec(),
    ];
    let mut adjoint = 0.0f64;
    let mut adj_scale = 0.0f64;
    for v in &probes {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        let mut mag = 0.0;
        for j in 0..m {
            let i = region.lo + j;
            lhs += v[j] * b_ex[j];
            rhs += a[i] * v[j] * b_l[j];
            mag += (a[i] * v[j] * b_l[j]).abs();
        }
        adjoint = adjoint.max((lhs - rhs).abs());
        adj_scale = adj_scale.max(mag);
    }
    Ok(PwIdentityReport {
        strong_residual: strong,
        adjoint_residual: adjoint,
        adjoint_scale: adj_scale.max(1e-300),
    })
}

/// Checks `u` under `L` and `u/alpha` under the conjugated `Delta_alpha`,
/// with the weighted tolerance matched by the largest alpha factor.
pub fn transport_certificates(
    u: &GridFunction,
    gs: &GroundState,
    tol: f64,
) -> (IneqCertificate, IneqCertificate) {
    let region = gs.region();
    let direct = check_subsolution_with_tol(u, gs.operator(), region, tol);
    let v = ground_transform(u, gs);
    let a_max = gs.alpha().values().iter().fold(0.0f64, |m, &ai| m.max(ai));
    let weighted = check_subsolution_with_tol(&v, &gs.weighted_operator(), region, tol * a_max);
    (direct, weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_model, DomainSpec, RadialGrid, WarpingProfile};
    use crate::operators::check_subsolution;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
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
    fn zero_lambda_ground_state_is_constant() {
        let grid = euclid3(2.0, 101);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 1.5).unwrap();
        let gs = solve_dirichlet_ground(&op, region, 1.0).unwrap();
        for &a in &gs.alpha().values()[region.lo..=region.hi] {
            assert!((a - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_interval_ground_state_is_cosh() {
        // alpha'' = alpha on an interval of length 2 with boundary cosh(1):
        // alpha = cosh(x - center), realized on the flat part of linear-cap.
        let (_, grid) =
            make_model(WarpingProfile::LinearCap, 2, DomainSpec::ball(5.0), 2001).unwrap();
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::from_radii(&grid, 2.0, 4.0).unwrap();
        let gs = solve_dirichlet_ground(&op, region, 1.0f64.cosh()).unwrap();
        let center = 0.5 * (grid.node(region.lo) + grid.node(region.hi));
        let mut worst = 0.0f64;
        for i in region.lo..=region.hi {
            let exact = (grid.node(i) - center).cosh();
            worst = worst.max((gs.alpha().values()[i] - exact).abs());
        }
        assert!(worst < 2e-6, "cosh mismatch {worst}");
    }

    #[test]
    fn euclidean_ball_ground_state_is_sinhr_over_r() {
        let grid = euclid3(1.0, 1001);
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::all(&grid);
        let gs = solve_dirichlet_ground(&op, region, 1.0f64.sinh()).unwrap();
        let mut worst = 0.0f64;
        for i in 1..grid.len() - 1 {
            let r = grid.node(i);
            worst = worst.max((gs.alpha().values()[i] - r.sinh() / r).abs());
        }
        assert!(worst < 5e-6, "sinh r / r mismatch {worst}");
    }

    #[test]
    fn ground_transform_examples() {
        let grid = euclid3(1.0, 301);
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::from_radii(&grid, 0.2, 0.9).unwrap();
        let gs = solve_dirichlet_ground(&op, region, 1.0).unwrap();
        let v = ground_transform(gs.alpha(), &gs);
        for &vi in v.values() {
            assert_eq!(vi, 1.0);
        }
        let z = ground_transform(&GridFunction::constant(&grid, 0.0), &gs);
        assert_eq!(z.sup_norm(), 0.0);
    }

    #[test]
    fn alpha_scale_covariance_is_exact() {
        let grid = euclid3(1.0, 301);
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::from_radii(&grid, 0.2, 0.9).unwrap();
        let g1 = solve_dirichlet_ground(&op, region, 1.0).unwrap();
        let g2 = solve_dirichlet_ground(&op, region, 2.0).unwrap();
        for (a, b) in g1.alpha().values().iter().zip(g2.alpha().values()) {
            assert_eq!(2.0 * a, *b);
        }
        // u/alpha is invariant under the joint rescaling.
        let u = GridFunction::from_fn(&grid, |r| 1.0 + r);
        let v1 = ground_transform(&u.scaled(2.0), &g2);
        let v2 = ground_transform(&u, &g1);
        for (a, b) in v1.values().iter().zip(v2.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pw_identity_exact_when_lambda_vanishes() {
        let grid = euclid3(2.0, 201);
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::from_radii(&grid, 0.5, 1.5).unwrap();
        let gs = solve_dirichlet_ground(&op, region, 1.0).unwrap();
        let a = grid.node(region.lo);
        let b = grid.node(region.hi);
        let phi = GridFunction::from_fn(&grid, |r| ((r - a) * (b - r)).max(0.0));
        let rep = verify_pw_identity(&gs, &phi).unwrap();
        assert!(
            rep.strong_residual < 1e-9,
            "residual {}",
            rep.strong_residual
        );
        assert!(rep.adjoint_residual <= 1e-13 * rep.adjoint_scale);
    }

    #[test]
    fn pw_adjoint_exact_for_hat_test_function() {
        let (_, grid) =
            make_model(WarpingProfile::Hyperbolic, 2, DomainSpec::ball(2.0), 401).unwrap();
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::from_radii(&grid, 0.5, 1.5).unwrap();
        let gs = solve_dirichlet_ground(&op, region, 1.0).unwrap();
        let mut v = vec![0.0; grid.len()];
        v[(region.lo + region.hi) / 2] = 1.0;
        let hat = GridFunction::from_values(&grid, v).unwrap();
        let rep = verify_pw_identity(&gs, &hat).unwrap();
        assert!(
            rep.adjoint_residual <= 1e-13 * rep.adjoint_scale,
            "adjoint residual {} vs scale {}",
            rep.adjoint_residual,
            rep.adjoint_scale
        );
    }

    #[test]
    fn pw_strong_residual_second_order() {
        for (profile, dim) in [
            (WarpingProfile::Euclidean, 3usize),
            (WarpingProfile::Hyperbolic, 2),
        ] {
            let mut errs = Vec::new();
            for n_nodes in [401usize, 801, 1601] {
                let (_, grid) =
                    make_model(profile.clone(), dim, DomainSpec::ball(2.0), n_nodes).unwrap();
                let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
                let region = Region::from_radii(&grid, 0.5, 1.5).unwrap();
                let gs = solve_dirichlet_ground(&op, region, 1.0).unwrap();
                let a = grid.node(region.lo);
                let b = grid.node(region.hi);
                let phi = GridFunction::from_fn(&grid, |r| ((r - a) * (b - r)).max(0.0).powi(2));
                let rep = verify_pw_identity(&gs, &phi).unwrap();
                errs.push(rep.strong_residual);
                assert!(rep.adjoint_residual <= 1e-12 * rep.adjoint_scale);
            }
            let slope = (errs[0] / errs[2]).log2() / 2.0;
            assert!(slope > 1.9, "strong-residual slope {slope}: {errs:?}");
        }
    }

    #[test]
    fn subsolution_transport_both_directions() {
        let grid = euclid3(2.0, 401);
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::from_radii(&grid, 0.3, 1.8).unwrap();
        let gs = solve_dirichlet_ground(&op, region, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let tol = 1e-9;
        for _ in 0..20 {
            let u = sampling::random_certified_subsolution(&gs, region, &mut rng);
            let (direct, weighted) = transport_certificates(&u, &gs, tol);
            assert!(
                direct.pass,
                "direct certificate failed: {}",
                direct.min_pairing
            );
            assert!(
                weighted.pass,
                "weighted certificate failed: {}",
                weighted.min_pairing
            );
        }
        // A genuine violation fails on both sides.
        let bad = GridFunction::from_fn(&grid, |r| -(r - 1.0) * (r - 1.0));
        let (direct, weighted) = transport_certificates(&bad, &gs, tol);
        assert!(!direct.pass && !weighted.pass);
        let c = check_subsolution(&bad, &op, region);
        assert!(!c.pass);
    }
}
