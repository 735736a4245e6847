//! Randomized inputs for the certificate suites.
//!
//! Subharmonicity in the Green coordinate of a divergence-form operator is
//! convexity of the nodal values, so drawing a random convex
//! piecewise-linear function of that coordinate produces a function whose
//! subsolution certificate holds *exactly* (up to floating-point
//! rounding), not merely up to discretization error. With a ground state
//! attached, multiplying back by alpha yields exactly certified
//! L-subsolutions.
//!
//! On pole-complete domains the generated functions are additionally
//! nondecreasing in the Green coordinate, which is the discrete condition
//! for subharmonicity *through* the pole (no negative point mass at the
//! origin).

use crate::geometry::{LeftKind, RadialGrid};
use crate::groundstate::GroundState;
use crate::operators::{DiscreteOperator, GridFunction, Region};
use rand::Rng;
use std::sync::Arc;

/// Discrete Green coordinate of `op` over the region: `t_0 = 0`,
/// `t_{k+1} = t_k + h / w_{k+1/2}`.
pub fn green_nodes(op: &DiscreteOperator, region: Region) -> Vec<f64> {
    let h = op.grid().spacing();
    let w = op.weights();
    let mut t = Vec::with_capacity(region.node_count());
    t.push(0.0);
    for i in region.lo..region.hi {
        let last = *t.last().unwrap();
        t.push(last + h / w[i]);
    }
    t
}

/// Shape parameters for the random convex generator.
#[derive(Debug, Clone)]
pub struct ConvexOpts {
    /// Number of random upward kinks.
    pub kinks: usize,
    /// Force a nonnegative initial slope (required through a pole).
    pub nondecreasing: bool,
    /// Lower bound enforced on the values.
    pub floor: f64,
    /// Rough amplitude of the values.
    pub scale: f64,
}

impl Default for ConvexOpts {
    fn default() -> Self {
        ConvexOpts {
            kinks: 6,
            nondecreasing: false,
            floor: 0.1,
            scale: 1.0,
        }
    }
}

/// Random convex piecewise-linear function of the operator's Green
/// coordinate, extended constantly outside the region. The result passes
/// `check_subsolution` under `op` on the region exactly (rounding aside).
pub fn random_convex_in_green<R: Rng>(
    op: &DiscreteOperator,
    region: Region,
    rng: &mut R,
    opts: &ConvexOpts,
) -> GridFunction {
    let t = green_nodes(op, region);
    let diam = t[t.len() - 1] - t[0];
    let slope_scale = opts.scale / diam;
    let m0 = if opts.nondecreasing {
        rng.gen_range(0.0..slope_scale)
    } else {
        rng.gen_range(-slope_scale..slope_scale)
    };
    let kinks: Vec<(f64, f64)> = (0..opts.kinks)
        .map(|_| {
            (
                rng.gen_range(0.0..diam),
                rng.gen_range(0.0..2.0 * slope_scale / opts.kinks.max(1) as f64),
            )
        })
        .collect();
    let v0 = rng.gen_range(0.0..opts.scale);
    let eval = |tk: f64| -> f64 {
        let mut v = v0 + m0 * tk;
        for &(pos, inc) in &kinks {
            if tk > pos {
                v += inc * (tk - pos);
            }
        }
        v
    };
    let vals_region: Vec<f64> = t.iter().map(|&tk| eval(tk)).collect();
    let min = vals_region.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let lift = if min < opts.floor {
        opts.floor - min
    } else {
        0.0
    };
    let grid = op.grid();
    let mut full = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let v = if i <= region.lo {
            vals_region[0]
        } else if i >= region.hi {
            vals_region[region.node_count() - 1]
        } else {
            vals_region[i - region.lo]
        };
        full[i] = v + lift;
    }
    GridFunction::from_values(grid, full).expect("finite samples")
}

fn pole_region(grid: &RadialGrid, region: Region) -> bool {
    region.lo == 0 && grid.manifold().left == LeftKind::Pole
}

/// Exactly certified positive subsolution of a lambda = 0 operator on the
/// region (nondecreasing through a pole when the region starts there).
pub fn random_positive_subharmonic<R: Rng>(
    op: &DiscreteOperator,
    region: Region,
    rng: &mut R,
) -> GridFunction {
    let opts = ConvexOpts {
        nondecreasing: pole_region(op.grid(), region),
        ..ConvexOpts::default()
    };
    random_convex_in_green(op, region, rng, &opts)
}

/// Exactly certified positive L-subsolution `alpha * v` with `v` convex in
/// the Green coordinate of the conjugated operator.
pub fn random_certified_subsolution<R: Rng>(
    gs: &GroundState,
    region: Region,
    rng: &mut R,
) -> GridFunction {
    let weighted = gs.weighted_operator();
    let opts = ConvexOpts {
        nondecreasing: pole_region(weighted.grid(), region),
        ..ConvexOpts::default()
    };
    let v = random_convex_in_green(&weighted, region, rng, &opts);
    v.zip_with(gs.alpha(), |vi, ai| vi * ai)
}

/// Sign-changing certified L-subsolution: `alpha (v - c)` with `c` between
/// the extremes of `v`. Subtracting a multiple of alpha does not perturb
/// the certificate.
pub fn random_sign_changing_subsolution<R: Rng>(
    gs: &GroundState,
    region: Region,
    rng: &mut R,
) -> GridFunction {
    let weighted = gs.weighted_operator();
    let opts = ConvexOpts {
        nondecreasing: pole_region(weighted.grid(), region),
        ..ConvexOpts::default()
    };
    let v = random_convex_in_green(&weighted, region, rng, &opts);
    let slice = &v.values()[region.lo..=region.hi];
    let lo = slice.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let hi = slice.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let c = lo + (hi - lo) * rng.gen_range(0.35..0.65);
    v.zip_with(gs.alpha(), |vi, ai| (vi - c) * ai)
}

/// Random samples vanishing at both grid ends (admissible test function).
pub fn random_end_vanishing<R: Rng>(grid: &Arc<RadialGrid>, rng: &mut R) -> GridFunction {
    let mut vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    vals[0] = 0.0;
    let n = vals.len();
    vals[n - 1] = 0.0;
    GridFunction::from_values(grid, vals).expect("finite samples")
}

/// Random nonnegative samples.
pub fn random_nonneg<R: Rng>(grid: &Arc<RadialGrid>, rng: &mut R) -> GridFunction {
    let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    GridFunction::from_values(grid, vals).expect("finite samples")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_model, DomainSpec, WarpingProfile};
    use crate::operators::check_subsolution_with_tol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_subharmonics_are_certified_through_the_pole() {
        let (_, grid) =
            make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(17.0), 1201).unwrap();
        let op = DiscreteOperator::laplacian(&grid);
        let region = Region::all(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let u = random_positive_subharmonic(&op, region, &mut rng);
            assert!(u.min_value() > 0.0);
            let cert = check_subsolution_with_tol(&u, &op, region, 1e-8 * u.sup_norm());
            assert!(cert.pass, "min pairing {}", cert.min_pairing);
            // Nondecreasing through the pole.
            assert!(u.values()[1] >= u.values()[0] - 1e-14);
        }
    }
}
