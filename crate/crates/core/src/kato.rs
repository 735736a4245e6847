//! Positive-part inequality for Schrodinger subsolutions: if `L u >= 0`
//! distributionally then `L u_+ >= 0`, verified along two independent
//! routes.
//!
//! The regularization route follows the smooth convex approximation
//! `H_eps(t) = (t + sqrt(t^2 + eps))/2` of the positive part: for each
//! rung of a decreasing eps ladder it checks
//! `int H_eps(u) Delta phi >= int lambda u H'_eps(u) phi` against the hat
//! family, then emits the limiting certificate for `u_+`. Discretely every
//! rung is implied by the input certificate because `H_eps` is convex and
//! `0 < H'_eps < 1`:
//! `B^Delta(H_eps(u))_j >= H'_eps(u_j) B^Delta(u)_j` nodewise.
//!
//! The appendix route removes the zero-order term by solving the
//! Dirichlet problem `Delta g = lambda u`, smoothing the subharmonic
//! remainder `w = u - g` with the monotone approximation, and checking the
//! pointwise-indicator inequality `Delta (u_k)_+ >= 1_{u_k > 0} lambda u`
//! for every iterate before passing to the limit. The indicator is
//! evaluated nodewise with strict inequality, so nodes where `u_k`
//! vanishes exactly contribute nothing to the right side.

use crate::error::{Error, Result};
use crate::operators::{
    check_subsolution, check_subsolution_with_tol, hat_family_start, solve_dirichlet,
    DiscreteOperator, GridFunction, IneqCertificate, Region,
};
use crate::smoothing::monotone_smooth_approx;

/// `H_eps(t) = (t + sqrt(t^2 + eps)) / 2`.
pub fn h_epsilon(t: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be positive, got {eps}"
        )));
    }
    Ok(0.5 * (t + (t * t + eps).sqrt()))
}

/// `H'_eps(t) = (1 + t / sqrt(t^2 + eps)) / 2`, strictly inside (0, 1).
pub fn h_epsilon_prime(t: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be positive, got {eps}"
        )));
    }
    Ok(0.5 * (1.0 + t / (t * t + eps).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KatoRoute {
    Regularization,
    Appendix,
}

/// One rung of the eps ladder (or one smoothing iterate on the appendix
/// route): the minimum hat value of the regularized inequality.
#[derive(Debug, Clone, Copy)]
pub struct LadderRow {
    pub eps: f64,
    pub min_pairing: f64,
}

/// Agreement of the two routes on a common region.
#[derive(Debug, Clone, Copy)]
pub struct RouteAgreement {
    pub regularization_min: f64,
    pub appendix_min: f64,
    pub agree: bool,
}

/// Outcome of a positive-part check.
#[derive(Debug, Clone)]
pub struct KatoReport {
    pub route: KatoRoute,
    /// Region the output certificate refers to (the inner smoothing domain
    /// on the appendix route).
    pub region: Region,
    pub input_cert: IneqCertificate,
    pub output_cert: IneqCertificate,
    pub ladder: Vec<LadderRow>,
    pub pass: bool,
    pub agreement: Option<RouteAgreement>,
}

/// Minimum over the hat family of `B^Delta_j(q) - rhs(j) * hat_measure(j)`.
fn min_split_pairing(
    lap: &DiscreteOperator,
    q: &[f64],
    rhs_node: impl Fn(usize) -> f64,
    region: Region,
) -> f64 {
    let start = hat_family_start(lap, region);
    let mut min = f64::INFINITY;
    for j in start..region.hi {
        let p = lap.hat_pairing(q, j) - rhs_node(j) * lap.hat_measure(j);
        min = min.min(p);
    }
    min
}

/// Default eps ladder `{1, 1/4, 1/16, 1/64, 1/256} * scale^2`; the
/// geometric spacing exposes the O(sqrt(eps)) convergence envelope.
pub fn default_ladder(scale: f64) -> Vec<f64> {
    let s2 = (scale * scale).max(1e-30);
    [1.0, 0.25, 0.0625, 0.015625, 0.00390625]
        .iter()
        .map(|f| f * s2)
        .collect()
}

/// Positive-part check along the regularization route.
///
/// Requires `u` to pass the subsolution certificate for `op` on the
/// region (a failure is a precondition error, not a fail verdict).
pub fn brezis_kato_check(
    u: &GridFunction,
    op: &DiscreteOperator,
    region: Region,
) -> Result<KatoReport> {
    let input_cert = check_subsolution(u, op, region);
    if !input_cert.pass {
        return Err(Error::PreconditionFailed(format!(
            "input certificate fails (min pairing {} at node {})",
            input_cert.min_pairing, input_cert.worst_node
        )));
    }
    let lap = op.without_zero_order();
    let lambda = op.lambda();
    let vals = u.values();
    let scale = u.sup_norm_on(region);
    let mut ladder = Vec::new();
    if scale > 0.0 {
        for eps in default_ladder(scale) {
            let q: Vec<f64> = vals.iter().map(|&t| h_epsilon(t, eps).unwrap()).collect();
            let min = min_split_pairing(
                &lap,
                &q,
                |j| lambda[j] * vals[j] * h_epsilon_prime(vals[j], eps).unwrap(),
                region,
            );
            ladder.push(LadderRow {
                eps,
                min_pairing: min,
            });
        }
    }
    let u_plus = u.positive_part();
    let output_cert = check_subsolution_with_tol(&u_plus, op, region, input_cert.tolerance);
    let pass = output_cert.pass;
    Ok(KatoReport {
        route: KatoRoute::Regularization,
        region,
        input_cert,
        output_cert,
        ladder,
        pass,
        agreement: None,
    })
}

/// Positive-part check along the Dirichlet-problem route.
///
/// Solves `Delta g = lambda u` with zero boundary data, smooths the
/// subharmonic remainder `w = u - g`, checks the indicator inequality for
/// each iterate `u_k = w_k + g`, and emits the limiting `u_+` certificate
/// on the smoothing inner domain, together with the cross-route agreement
/// record. The region must stay away from a pole (the smoothing reduction
/// needs the Green coordinate there).
pub fn kato_via_appendix(
    u: &GridFunction,
    op: &DiscreteOperator,
    region: Region,
    k_len: usize,
) -> Result<KatoReport> {
    let input_cert = check_subsolution(u, op, region);
    if !input_cert.pass {
        return Err(Error::PreconditionFailed(format!(
            "input certificate fails (min pairing {} at node {})",
            input_cert.min_pairing, input_cert.worst_node
        )));
    }
    let grid = u.grid();
    let lap = op.without_zero_order();
    let lambda = op.lambda();
    // Dirichlet problem Delta g = lambda u, g = 0 on the region boundary;
    // the plain Laplacian sits on the left-hand side.
    let rhs: Vec<f64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, &ui)| lambda[i] * ui)
        .collect();
    let g_vals = solve_dirichlet(&lap, region, 0.0, 0.0, &rhs)?;
    let mut g_full = vec![0.0; grid.len()];
    g_full[region.lo..=region.hi].copy_from_slice(&g_vals);
    let g = GridFunction::from_values(grid, g_full)?;
    let w = u.zip_with(&g, |a, b| a - b);

    let seq = monotone_smooth_approx(&w, &lap, region, k_len, None)?;
    let inner = seq.inner;
    let vals = u.values();
    let mut ladder = Vec::new();
    for (k, wk) in seq.iterates.iter().enumerate() {
        let uk = wk.zip_with(&g, |a, b| a + b);
        let uk_vals = uk.values().to_vec();
        let uk_plus = uk.positive_part();
        let min = min_split_pairing(
            &lap,
            uk_plus.values(),
            |j| {
                if uk_vals[j] > 0.0 {
                    lambda[j] * vals[j]
                } else {
                    0.0
                }
            },
            inner,
        );
        ladder.push(LadderRow {
            eps: seq.eps[k],
            min_pairing: min,
        });
    }
    let u_plus = u.positive_part();
    let output_cert = check_subsolution_with_tol(&u_plus, op, inner, input_cert.tolerance);
    // Cross-check against the regularization route on the same region.
    let reg = brezis_kato_check(u, op, inner)?;
    let tol = input_cert.tolerance + reg.input_cert.tolerance;
    let agreement = RouteAgreement {
        regularization_min: reg.output_cert.min_pairing,
        appendix_min: output_cert.min_pairing,
        agree: reg.pass == output_cert.pass
            && (reg.output_cert.min_pairing - output_cert.min_pairing).abs() <= tol.max(1e-12),
    };
    let pass = output_cert.pass
        && ladder
            .iter()
            .all(|r| r.min_pairing >= -input_cert.tolerance);
    Ok(KatoReport {
        route: KatoRoute::Appendix,
        region: inner,
        input_cert,
        output_cert,
        ladder,
        pass,
        agreement: Some(agreement),
    })
}
