//! Rotationally symmetric model manifolds and their radial grids.
//!
//! A model manifold is `[r_min, r_max] x S^{n-1}` with metric
//! `dr^2 + sigma(r)^2 g_{S^{n-1}}`. All integrals against the Riemannian
//! measure reduce to one-dimensional integrals weighted by the area
//! density `S(r) = omega_{n-1} sigma(r)^{n-1}`, which is what the grid
//! tabulates. The constant `omega_{n-1}` is kept inside `S` so that the
//! discrete norms are genuine `L^p` norms of the manifold, comparable
//! across dimensions.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Gamma(m/2) for integer m >= 1, by the recursion from Gamma(1/2) and Gamma(1).
fn gamma_half(m: usize) -> f64 {
    match m {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (m as f64 / 2.0 - 1.0) * gamma_half(m - 2),
    }
}

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Quintic smoothstep on [0, 1]: C^2 join with zero first and second
/// derivatives at both ends.
fn smoothstep5(x: f64) -> f64 {
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

fn smoothstep5_prime(x: f64) -> f64 {
    30.0 * x * x * (x - 1.0) * (x - 1.0)
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Warping function `sigma(r)` of a model manifold.
///
/// Presets:
/// * `Euclidean`: sigma(r) = r.
/// * `Hyperbolic`: sigma(r) = sinh r.
/// * `SuperExp { a }`: sigma = r near 0, `exp(a r^3)` for r >= 1, joined by
///   a quintic blend on [1/2, 1] so sigma is C^2. Volume grows fast enough
///   that the model is stochastically incomplete.
/// * `LinearCap`: sigma = r near 0, constant 1 for r >= 1 (same blend).
///   Past the cap the area density is constant, so operators reduce to
///   flat-interval ones there; volume grows linearly.
/// * `Custom`: caller-supplied evaluators for sigma and sigma'.
#[derive(Clone)]
pub enum WarpingProfile {
    Euclidean,
    Hyperbolic,
    SuperExp {
        a: f64,
    },
    LinearCap,
    Custom {
        label: String,
        sigma: ProfileFn,
        dsigma: ProfileFn,
    },
}

impl fmt::Debug for WarpingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarpingProfile::Euclidean => write!(f, "Euclidean"),
            WarpingProfile::Hyperbolic => write!(f, "Hyperbolic"),
            WarpingProfile::SuperExp { a } => write!(f, "SuperExp(a={a})"),
            WarpingProfile::LinearCap => write!(f, "LinearCap"),
            WarpingProfile::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl WarpingProfile {
    pub fn superexp(a: f64) -> Self {
        WarpingProfile::SuperExp { a }
    }

    /// Finite-volume complete profile sigma(r) = r / (1 + r^2).
    ///
    /// With n = 3 the area density decays like 1/r^2, so the total volume is
    /// finite and constants lie in every L^p; used by Liouville experiments
    /// that need a nontrivial "constant" verdict.
    pub fn finite_volume() -> Self {
        WarpingProfile::Custom {
            label: "finite-volume".to_string(),
            sigma: Arc::new(|r| r / (1.0 + r * r)),
            dsigma: Arc::new(|r| {
                let d = 1.0 + r * r;
                (1.0 - r * r) / (d * d)
            }),
        }
    }

    pub fn custom<F, G>(label: &str, sigma: F, dsigma: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        WarpingProfile::Custom {
            label: label.to_string(),
            sigma: Arc::new(sigma),
            dsigma: Arc::new(dsigma),
        }
    }

    pub fn sigma(&self, r: f64) -> f64 {
        match self {
            WarpingProfile::Euclidean => r,
            WarpingProfile::Hyperbolic => r.sinh(),
            WarpingProfile::SuperExp { a } => {
                if r <= 0.5 {
                    r
                } else if r >= 1.0 {
                    (a * r * r * r).exp()
                } else {
                    let x = 2.0 * r - 1.0;
                    let s = smoothstep5(x);
                    (1.0 - s) * r + s * (a * r * r * r).exp()
                }
            }
            WarpingProfile::LinearCap => {
                if r <= 0.5 {
                    r
                } else if r >= 1.0 {
                    1.0
                } else {
                    let x = 2.0 * r - 1.0;
                    let s = smoothstep5(x);
                    (1.0 - s) * r + s
                }
            }
            WarpingProfile::Custom { sigma, .. } => sigma(r),
        }
    }

    pub fn sigma_prime(&self, r: f64) -> f64 {
        match self {
            WarpingProfile::Euclidean => 1.0,
            WarpingProfile::Hyperbolic => r.cosh(),
            WarpingProfile::SuperExp { a } => {
                if r <= 0.5 {
                    1.0
                } else if r >= 1.0 {
                    3.0 * a * r * r * (a * r * r * r).exp()
                } else {
                    let x = 2.0 * r - 1.0;
                    let s = smoothstep5(x);
                    let e = (a * r * r * r).exp();
                    (1.0 - s) + s * 3.0 * a * r * r * e + 2.0 * smoothstep5_prime(x) * (e - r)
                }
            }
            WarpingProfile::LinearCap => {
                if r <= 0.5 {
                    1.0
                } else if r >= 1.0 {
                    0.0
                } else {
                    let x = 2.0 * r - 1.0;
                    (1.0 - smoothstep5(x)) + 2.0 * smoothstep5_prime(x) * (1.0 - r)
                }
            }
            WarpingProfile::Custom { dsigma, .. } => dsigma(r),
        }
    }

    /// ln sigma(r), stable where sigma itself overflows f64 (superexp tails).
    pub fn ln_sigma(&self, r: f64) -> f64 {
        match self {
            WarpingProfile::SuperExp { a } if r >= 1.0 => a * r * r * r,
            _ => self.sigma(r).ln(),
        }
    }

    /// Logarithmic derivative sigma'/sigma, in a form that stays finite
    /// where sigma itself overflows.
    pub fn dlog_sigma(&self, r: f64) -> f64 {
        match self {
            WarpingProfile::Euclidean => 1.0 / r,
            WarpingProfile::Hyperbolic => 1.0 / r.tanh(),
            WarpingProfile::SuperExp { a } if r >= 1.0 => 3.0 * a * r * r,
            _ => self.sigma_prime(r) / self.sigma(r),
        }
    }

    pub fn kind_name(&self) -> &str {
        match self {
            WarpingProfile::Euclidean => "euclidean",
            WarpingProfile::Hyperbolic => "hyperbolic",
            WarpingProfile::SuperExp { .. } => "superexp",
            WarpingProfile::LinearCap => "linear-cap",
            WarpingProfile::Custom { label, .. } => label,
        }
    }
}

/// Nature of the left end of the radial domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftKind {
    /// r_min = 0 is a pole: an interior point of the manifold, not a boundary.
    Pole,
    /// r_min > 0 with the manifold genuinely incomplete there (punctured).
    Open,
}

/// Nature of the right end of the radial domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightKind {
    /// Computational truncation of a noncompact end; gets a natural
    /// (zero-flux) treatment so no artificial boundary data is injected.
    Truncation,
    /// Genuine boundary of an incomplete manifold; gets Dirichlet data.
    Boundary,
}

#[derive(Debug, Clone, Copy)]
pub struct DomainSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub left: LeftKind,
    pub right: RightKind,
}

impl DomainSpec {
    /// Ball of radius `r_max` around the pole, truncated noncompact end.
    pub fn ball(r_max: f64) -> Self {
        DomainSpec {
            r_min: 0.0,
            r_max,
            left: LeftKind::Pole,
            right: RightKind::Truncation,
        }
    }

    /// Punctured domain (r_min, r_max) with genuine boundaries at both ends.
    pub fn punctured(r_min: f64, r_max: f64) -> Self {
        DomainSpec {
            r_min,
            r_max,
            left: LeftKind::Open,
            right: RightKind::Boundary,
        }
    }
}

/// A rotationally symmetric model manifold of dimension `n`.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    pub n: usize,
    pub profile: WarpingProfile,
    pub r_min: f64,
    pub r_max: f64,
    pub left: LeftKind,
    pub right: RightKind,
    omega: f64,
}

impl ModelManifold {
    pub fn new(profile: WarpingProfile, n: usize, domain: DomainSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDomain(format!("dimension n = {n} < 2")));
        }
        if !(domain.r_max > domain.r_min) || domain.r_min < 0.0 {
            return Err(Error::InvalidDomain(format!(
                "need 0 <= r_min < r_max, got [{}, {}]",
                domain.r_min, domain.r_max
            )));
        }
        match domain.left {
            LeftKind::Pole => {
                if domain.r_min != 0.0 {
                    return Err(Error::InvalidDomain("pole requires r_min = 0".to_string()));
                }
                if profile.sigma(0.0).abs() > 1e-12 {
                    return Err(Error::InvalidProfile(format!(
                        "pole requires sigma(0) = 0, got {}",
                        profile.sigma(0.0)
                    )));
                }
                if (profile.sigma_prime(0.0) - 1.0).abs() > 1e-8 {
                    return Err(Error::InvalidProfile(format!(
                        "pole requires sigma'(0) = 1, got {}",
                        profile.sigma_prime(0.0)
                    )));
                }
            }
            LeftKind::Open => {
                if domain.r_min <= 0.0 {
                    return Err(Error::InvalidDomain(
                        "open left end requires r_min > 0".to_string(),
                    ));
                }
            }
        }
        // sigma must be strictly positive away from a pole.
        let samples = 1024;
        for j in 1..samples {
            let r = domain.r_min + (domain.r_max - domain.r_min) * j as f64 / samples as f64;
            if !(profile.sigma(r) > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "sigma({r}) = {} <= 0 inside the domain",
                    profile.sigma(r)
                )));
            }
        }
        let omega = unit_sphere_area(n);
        Ok(ModelManifold {
            n,
            profile,
            r_min: domain.r_min,
            r_max: domain.r_max,
            left: domain.left,
            right: domain.right,
            omega,
        })
    }

    /// omega_{n-1}, the area of the unit (n-1)-sphere.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Area density S(r) = omega_{n-1} sigma(r)^{n-1}.
    pub fn area_density(&self, r: f64) -> f64 {
        self.omega * self.profile.sigma(r).powi(self.n as i32 - 1)
    }

    /// ln S(r); finite wherever sigma(r) > 0, even when S overflows.
    pub fn ln_area_density(&self, r: f64) -> f64 {
        self.omega.ln() + (self.n as f64 - 1.0) * self.profile.ln_sigma(r)
    }
}

/// Uniform radial grid with warped measure weights.
///
/// Nodes `r_i = r_min + i h`, area-density samples `s_i = S(r_i)` and
/// half-node samples `s_{i+1/2} = S(r_i + h/2)`, and trapezoid-consistent
/// measure weights `mu_i` (interior `h s_i`, halved at the two ends), so
/// that `sum mu_i` reproduces the trapezoid quadrature of `int S dr`
/// exactly.
#[derive(Debug)]
pub struct RadialGrid {
    manifold: ModelManifold,
    h: f64,
    r: Vec<f64>,
    s: Vec<f64>,
    s_half: Vec<f64>,
    mu: Vec<f64>,
}

impl RadialGrid {
    pub fn new(manifold: ModelManifold, n_nodes: usize) -> Result<Arc<Self>> {
        if n_nodes < 8 {
            return Err(Error::InvalidArgument(format!(
                "need at least 8 nodes, got {n_nodes}"
            )));
        }
        let h = (manifold.r_max - manifold.r_min) / (n_nodes - 1) as f64;
        let r: Vec<f64> = (0..n_nodes)
            .map(|i| manifold.r_min + i as f64 * h)
            .collect();
        let s: Vec<f64> = r.iter().map(|&ri| manifold.area_density(ri)).collect();
        let s_half: Vec<f64> = (0..n_nodes - 1)
            .map(|i| manifold.area_density(r[i] + 0.5 * h))
            .collect();
        for (i, &si) in s.iter().enumerate() {
            let at_pole = i == 0 && manifold.left == LeftKind::Pole;
            if !si.is_finite() || (!at_pole && !(si > 0.0)) {
                return Err(Error::InvalidProfile(format!(
                    "area density S({}) = {si} not positive and finite",
                    r[i]
                )));
            }
        }
        for (i, &sh) in s_half.iter().enumerate() {
            if !sh.is_finite() || !(sh > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "area density at half-node {i} not positive and finite"
                )));
            }
        }
        let mut mu: Vec<f64> = s.iter().map(|&si| h * si).collect();
        mu[0] *= 0.5;
        mu[n_nodes - 1] *= 0.5;
        Ok(Arc::new(RadialGrid {
            manifold,
            h,
            r,
            s,
            s_half,
            mu,
        }))
    }

    pub fn manifold(&self) -> &ModelManifold {
        &self.manifold
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.r[i]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn area_samples(&self) -> &[f64] {
        &self.s
    }

    /// S at half-nodes; entry i sits between nodes i and i+1.
    pub fn area_half_samples(&self) -> &[f64] {
        &self.s_half
    }

    pub fn measure(&self) -> &[f64] {
        &self.mu
    }

    /// Largest node index with r_i <= r (clamped to the grid).
    pub fn index_at(&self, r: f64) -> usize {
        if r <= self.r[0] {
            return 0;
        }
        let i = ((r - self.r[0]) / self.h).floor() as usize;
        i.min(self.len() - 1)
    }

    /// Nearest node index to r.
    pub fn nearest_index(&self, r: f64) -> usize {
        let i = ((r - self.r[0]) / self.h).round();
        (i.max(0.0) as usize).min(self.len() - 1)
    }
}

/// Builds a model manifold together with its radial grid.
pub fn make_model(
    profile: WarpingProfile,
    n: usize,
    domain: DomainSpec,
    n_nodes: usize,
) -> Result<(ModelManifold, Arc<RadialGrid>)> {
    let manifold = ModelManifold::new(profile, n, domain)?;
    let grid = RadialGrid::new(manifold.clone(), n_nodes)?;
    Ok((manifold, grid))
}

/// `L^p` norm of `u` over the annulus `k <= r <= 2k`.
pub fn annulus_norm(u: &crate::operators::GridFunction, p: f64, k: f64) -> Result<f64> {
    let grid = u.grid();
    if !(1.0 <= p) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= p < inf, got {p}"
        )));
    }
    if 2.0 * k > grid.manifold().r_max + 1e-12 * grid.spacing() {
        return Err(Error::InvalidArgument(format!(
            "annulus [{}, {}] leaves the domain (r_max = {})",
            k,
            2.0 * k,
            grid.manifold().r_max
        )));
    }
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let r = grid.node(i);
        if r >= k && r <= 2.0 * k {
            acc += u.values()[i].abs().powf(p) * grid.measure()[i];
        }
    }
    Ok(acc.powf(1.0 / p))
}

/// Advisory verdict of the volume-growth test for stochastic completeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletenessVerdict {
    CompleteLike,
    IncompleteLike,
    Inconclusive,
}

/// Report of the classical model criterion: the manifold is stochastically
/// complete iff `int^inf V(r)/S(r) dr` diverges, where `V(r) = int_0^r S`.
#[derive(Debug, Clone)]
pub struct CompletenessIndicator {
    /// Trapezoid value of `int_1^R V/S dr`.
    pub partial_integral: f64,
    /// Fitted slope of `ln(V/S)` against `ln r` over the tail `[R/2, R]`.
    pub tail_slope: f64,
    pub verdict: CompletenessVerdict,
}

/// Probes `int_1^R V/S dr` and classifies the tail by its log-log slope:
/// the integral diverges when `V/S` decays slower than `1/r`.
///
/// The accumulation works with `ln S` differences only, so profiles whose
/// area density overflows f64 (superexp) are handled. The verdict is
/// advisory; it is never used as a proof.
pub fn stochastic_completeness_indicator(
    m: &ModelManifold,
    probe_radius: f64,
) -> Result<CompletenessIndicator> {
    if m.left != LeftKind::Pole {
        return Err(Error::PreconditionFailed(
            "completeness probe requires a pole (punctured models rejected)".to_string(),
        ));
    }
    if probe_radius > m.r_max + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "probe radius {probe_radius} exceeds r_max = {}",
            m.r_max
        )));
    }
    if probe_radius < 2.0 {
        return Err(Error::InvalidArgument(
            "probe radius must be >= 2 (integral starts at r = 1)".to_string(),
        ));
    }
    let steps = ((probe_radius * 400.0).ceil() as usize).clamp(16_000, 800_000);
    let dr = probe_radius / steps as f64;

    // g = V/S, updated through ratios of S so only ln S enters. Each step
    // models ln S as linear, which integrates exponentially growing
    // densities exactly and is second order otherwise.
    // Near the pole S ~ omega r^{n-1}, so g(dr) = dr/n to leading order.
    let mut g = dr / m.n as f64;
    let mut ln_s_prev = m.ln_area_density(dr);
    let mut integral = 0.0;
    let mut g_prev = g;
    let mut tail: Vec<(f64, f64)> = Vec::new();
    for j in 2..=steps {
        let r = j as f64 * dr;
        let ln_s = m.ln_area_density(r);
        let ratio = (ln_s_prev - ln_s).exp();
        let slope = (ln_s - ln_s_prev) / dr;
        let incr = if (slope * dr).abs() > 1e-12 {
            -(-slope * dr).exp_m1() / slope
        } else {
            dr
        };
        g = g * ratio + incr;
        ln_s_prev = ln_s;
        if r > 1.0 {
            let lo = (r - dr).max(1.0);
            integral += (r - lo) * 0.5 * (g_prev + g);
        }
        if r >= 0.5 * probe_radius && g > 0.0 {
            tail.push((r.ln(), g.ln()));
        }
        g_prev = g;
    }

    // Least-squares slope of ln g vs ln r over the tail.
    let n_t = tail.len() as f64;
    let mean_x: f64 = tail.iter().map(|p| p.0).sum::<f64>() / n_t;
    let mean_y: f64 = tail.iter().map(|p| p.1).sum::<f64>() / n_t;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;

    let margin = 0.2;
    let verdict = if slope >= -1.0 + margin {
        CompletenessVerdict::CompleteLike
    } else if slope <= -1.0 - margin {
        CompletenessVerdict::IncompleteLike
    } else {
        CompletenessVerdict::Inconclusive
    };
    Ok(CompletenessIndicator {
        partial_integral: integral,
        tail_slope: slope,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::GridFunction;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn euclidean_grid_matches_preset_formula() {
        let (_, grid) =
            make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(1.0), 101).unwrap();
        assert_relative_eq!(grid.spacing(), 0.01, max_relative = 1e-14);
        for i in 0..grid.len() {
            let r = grid.node(i);
            assert_relative_eq!(
                grid.area_samples()[i],
                4.0 * PI * r * r,
                max_relative = 1e-13,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn hyperbolic_grid_matches_preset_formula() {
        let (_, grid) =
            make_model(WarpingProfile::Hyperbolic, 2, DomainSpec::ball(10.0), 1001).unwrap();
        for i in (0..grid.len()).step_by(100) {
            let r = grid.node(i);
            assert_relative_eq!(
                grid.area_samples()[i],
                2.0 * PI * r.sinh(),
                max_relative = 1e-13,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn punctured_model_left_open() {
        let (m, grid) = make_model(
            WarpingProfile::Euclidean,
            3,
            DomainSpec::punctured(0.01, 1.0),
            100,
        )
        .unwrap();
        assert_eq!(m.left, LeftKind::Open);
        assert_relative_eq!(grid.node(0), 0.01);
        assert!(grid.area_samples()[0] > 0.0);
    }

    #[test]
    fn measure_reproduces_trapezoid_exactly() {
        for profile in [
            WarpingProfile::Euclidean,
            WarpingProfile::Hyperbolic,
            WarpingProfile::LinearCap,
            WarpingProfile::finite_volume(),
        ] {
            let (_, grid) = make_model(profile, 3, DomainSpec::ball(4.0), 257).unwrap();
            let h = grid.spacing();
            let s = grid.area_samples();
            let mut trap = 0.5 * (s[0] + s[s.len() - 1]);
            for &si in &s[1..s.len() - 1] {
                trap += si;
            }
            trap *= h;
            let total: f64 = grid.measure().iter().sum();
            assert_relative_eq!(total, trap, max_relative = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_constructions() {
        // Too few nodes.
        assert!(make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(1.0), 4).is_err());
        // Pole flag with sigma(0) != 0.
        let shifted = WarpingProfile::custom("shifted", |r| 1.0 + r, |_| 1.0);
        assert!(make_model(shifted, 3, DomainSpec::ball(1.0), 64).is_err());
        // sigma <= 0 inside the domain.
        let sine = WarpingProfile::custom("sine", |r| r.sin(), |r| r.cos());
        assert!(make_model(sine, 2, DomainSpec::ball(4.0), 64).is_err());
        // Open left end with r_min = 0.
        assert!(ModelManifold::new(
            WarpingProfile::Euclidean,
            3,
            DomainSpec {
                r_min: 0.0,
                r_max: 1.0,
                left: LeftKind::Open,
                right: RightKind::Boundary,
            },
        )
        .is_err());
    }

    #[test]
    fn annulus_norm_examples() {
        // Constant 1, p = 2, euclidean n = 3: sqrt(vol(B_2 \ B_1)).
        let (_, grid) =
            make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(2.0), 2001).unwrap();
        let one = GridFunction::from_fn(&grid, |_| 1.0);
        let got = annulus_norm(&one, 2.0, 1.0).unwrap();
        let exact = (4.0 * PI / 3.0 * 7.0).sqrt();
        assert_relative_eq!(got, exact, max_relative = 2e-4);

        let zero = GridFunction::from_fn(&grid, |_| 0.0);
        assert_eq!(annulus_norm(&zero, 1.5, 0.7).unwrap(), 0.0);

        // u(r) = r, p = 1, n = 2 euclidean: int_1^2 r * 2 pi r dr = 14 pi / 3.
        let (_, grid2) =
            make_model(WarpingProfile::Euclidean, 2, DomainSpec::ball(2.0), 4001).unwrap();
        let lin = GridFunction::from_fn(&grid2, |r| r);
        let got2 = annulus_norm(&lin, 1.0, 1.0).unwrap();
        assert_relative_eq!(got2, 14.0 * PI / 3.0, max_relative = 2e-4);

        // Annulus escaping the truncated domain is rejected.
        assert!(annulus_norm(&one, 2.0, 1.5).is_err());
    }

    #[test]
    fn annulus_mass_monotone_for_nondecreasing_density() {
        let (_, grid) =
            make_model(WarpingProfile::Hyperbolic, 2, DomainSpec::ball(8.0), 1601).unwrap();
        let one = GridFunction::from_fn(&grid, |_| 1.0);
        let mut prev = 0.0;
        for k in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
            let mass = annulus_norm(&one, 2.0, k).unwrap().powi(2);
            assert!(mass >= prev, "annulus mass not monotone at k = {k}");
            prev = mass;
        }
    }

    #[test]
    fn euclidean_ball_volume_second_order() {
        let exact = 4.0 * PI / 3.0;
        let mut errs = Vec::new();
        for n_nodes in [51usize, 101, 201] {
            let (_, grid) =
                make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(1.0), n_nodes).unwrap();
            let vol: f64 = grid.measure().iter().sum();
            errs.push((vol - exact).abs());
        }
        // Trapezoid error shrinks by ~4x per doubling.
        assert!(errs[0] / errs[1] > 3.0);
        assert!(errs[1] / errs[2] > 3.0);
    }

    #[test]
    fn completeness_indicator_euclidean() {
        let m = ModelManifold::new(WarpingProfile::Euclidean, 3, DomainSpec::ball(100.0)).unwrap();
        let ind = stochastic_completeness_indicator(&m, 100.0).unwrap();
        // V/S = r/3 exactly, so the integral is (R^2 - 1)/6.
        assert_relative_eq!(
            ind.partial_integral,
            (100.0f64.powi(2) - 1.0) / 6.0,
            max_relative = 1e-3
        );
        assert_eq!(ind.verdict, CompletenessVerdict::CompleteLike);
    }

    #[test]
    fn completeness_indicator_hyperbolic() {
        let m = ModelManifold::new(WarpingProfile::Hyperbolic, 2, DomainSpec::ball(50.0)).unwrap();
        let ind = stochastic_completeness_indicator(&m, 50.0).unwrap();
        // V/S = (cosh r - 1)/sinh r -> 1; the integral grows ~ R.
        assert!(ind.partial_integral > 40.0);
        assert_eq!(ind.verdict, CompletenessVerdict::CompleteLike);
    }

    #[test]
    fn completeness_indicator_superexp() {
        let m =
            ModelManifold::new(WarpingProfile::superexp(1.0), 2, DomainSpec::ball(50.0)).unwrap();
        let ind = stochastic_completeness_indicator(&m, 50.0).unwrap();
        assert!(
            ind.partial_integral < 2.0,
            "integral = {}",
            ind.partial_integral
        );
        assert_eq!(ind.verdict, CompletenessVerdict::IncompleteLike);
        // Tail behaves like 1/(3r^2).
        assert!(
            (ind.tail_slope + 2.0).abs() < 0.2,
            "slope = {}",
            ind.tail_slope
        );
    }

    #[test]
    fn completeness_indicator_rejects_punctured() {
        let m = ModelManifold::new(
            WarpingProfile::Euclidean,
            3,
            DomainSpec::punctured(0.1, 10.0),
        )
        .unwrap();
        assert!(stochastic_completeness_indicator(&m, 5.0).is_err());
    }
}
