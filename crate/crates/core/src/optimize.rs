//! Derivative-free minimization used by the hyperparameter search:
//! box-constrained Nelder–Mead restarted from a seeded, rotated Halton
//! sequence. Everything here is deterministic given the seed.

use rand_core::{RngCore, SeedableRng};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical-inverse of `i` in base `b`, in [0, 1).
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let bf = b as f64;
    while i > 0 {
        f /= bf;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `count` low-discrepancy points in the box `[lo, hi]^dim`, Cranley–Patterson
/// rotated by a ChaCha20 stream so different seeds explore different offsets.
pub(crate) fn halton_starts(
    count: usize,
    lo: &[f64],
    hi: &[f64],
    seed: u64,
) -> Vec<Vec<f64>> {
    let dim = lo.len();
    assert!(dim <= PRIMES.len(), "search dimension too large");
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let rot: Vec<f64> = (0..dim)
        .map(|_| ((rng.next_u64() >> 11) as f64) * (1.0 / 9007199254740992.0))
        .collect();
    (0..count)
        .map(|i| {
            (0..dim)
                .map(|l| {
                    let u = (radical_inverse(i as u64 + 1, PRIMES[l]) + rot[l]).fract();
                    lo[l] + u * (hi[l] - lo[l])
                })
                .collect()
        })
        .collect()
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for l in 0..x.len() {
        x[l] = x[l].clamp(lo[l], hi[l]);
    }
}

/// Treat NaN as worse than anything so the simplex ordering stays total.
fn value_key(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimize `f` over the box `[lo, hi]` with Nelder–Mead starting at `x0`.
/// Returns the best point and value seen.
pub(crate) fn nelder_mead_box(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_iters: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    // Initial simplex: x0 plus a 10%-of-box step along each axis, reflected
    // inward when the step would leave the box.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut start = x0.to_vec();
    clamp(&mut start, lo, hi);
    simplex.push((start.clone(), f(&start)));
    for l in 0..dim {
        let mut p = start.clone();
        let step = 0.10 * (hi[l] - lo[l]).max(1e-8);
        p[l] = if p[l] + step <= hi[l] {
            p[l] + step
        } else {
            p[l] - step
        };
        clamp(&mut p, lo, hi);
        let v = f(&p);
        simplex.push((p, v));
    }

    for _ in 0..max_iters {
        simplex.sort_by(|a, b| {
            value_key(a.1)
                .partial_cmp(&value_key(b.1))
                .expect("keys are never NaN")
        });
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if value_key(worst) - value_key(best) < ftol
            && worst.is_finite()
            && best.is_finite()
        {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; dim];
        for vertex in &simplex[..dim] {
            for l in 0..dim {
                centroid[l] += vertex.0[l];
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let worst_point = simplex[dim].0.clone();
        let mut reflected: Vec<f64> = (0..dim)
            .map(|l| centroid[l] + alpha * (centroid[l] - worst_point[l]))
            .collect();
        clamp(&mut reflected, lo, hi);
        let fr = f(&reflected);

        if value_key(fr) < value_key(simplex[0].1) {
            let mut expanded: Vec<f64> = (0..dim)
                .map(|l| centroid[l] + gamma * (reflected[l] - centroid[l]))
                .collect();
            clamp(&mut expanded, lo, hi);
            let fe = f(&expanded);
            simplex[dim] = if value_key(fe) < value_key(fr) {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if value_key(fr) < value_key(simplex[dim - 1].1) {
            simplex[dim] = (reflected, fr);
            continue;
        }

        let mut contracted: Vec<f64> = (0..dim)
            .map(|l| centroid[l] + rho * (worst_point[l] - centroid[l]))
            .collect();
        clamp(&mut contracted, lo, hi);
        let fc = f(&contracted);
        if value_key(fc) < value_key(simplex[dim].1) {
            simplex[dim] = (contracted, fc);
            continue;
        }

        // shrink toward the best vertex
        let best_point = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for l in 0..dim {
                vertex.0[l] = best_point[l] + sigma * (vertex.0[l] - best_point[l]);
            }
            clamp(&mut vertex.0, lo, hi);
            vertex.1 = f(&vertex.0);
        }
    }

    simplex.sort_by(|a, b| {
        value_key(a.1)
            .partial_cmp(&value_key(b.1))
            .expect("keys are never NaN")
    });
    let (x, v) = simplex.swap_remove(0);
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_shifted_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.3).powi(2) + (x[1] + 0.4).powi(2) + 2.0;
        let (x, v) = nelder_mead_box(&f, &[0.0, 0.0], &[-5.0, -5.0], &[5.0, 5.0], 500, 1e-12);
        assert!((x[0] - 1.3).abs() < 1e-4, "{x:?}");
        assert!((x[1] + 0.4).abs() < 1e-4, "{x:?}");
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn respects_box_bounds() {
        // unconstrained optimum at 10, box caps at 2
        let f = |x: &[f64]| (x[0] - 10.0).powi(2);
        let (x, _) = nelder_mead_box(&f, &[0.0], &[-2.0], &[2.0], 300, 1e-12);
        assert!(x[0] <= 2.0 + 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_search_works() {
        let f = |x: &[f64]| (x[0].powi(2) - 2.0).powi(2);
        let (x, _) = nelder_mead_box(&f, &[0.5], &[0.0], &[3.0], 300, 1e-14);
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn survives_infinite_regions() {
        // objective undefined (infinite) left of 0.5
        let f = |x: &[f64]| {
            if x[0] < 0.5 {
                f64::INFINITY
            } else {
                (x[0] - 1.0).powi(2)
            }
        };
        let (x, v) = nelder_mead_box(&f, &[0.6], &[0.0], &[4.0], 300, 1e-12);
        assert!(v.is_finite());
        assert!((x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn halton_is_deterministic_and_in_box() {
        let a = halton_starts(10, &[-10.0, -10.0], &[7.0, 7.0], 3);
        let b = halton_starts(10, &[-10.0, -10.0], &[7.0, 7.0], 3);
        assert_eq!(a, b);
        let c = halton_starts(10, &[-10.0, -10.0], &[7.0, 7.0], 4);
        assert_ne!(a, c);
        for p in &a {
            for &v in p {
                assert!((-10.0..=7.0).contains(&v));
            }
        }
    }
}
