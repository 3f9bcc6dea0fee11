//! Tight state-independent lower bounds for sums of variances and standard
//! deviations, with a brute-force minimizer over pure states as the
//! verification oracle.

use rayon::prelude::*;

use crate::numeric::{self, Vec3};
use crate::observables::{decompose, second_moment, QubitObservable, RANK_TOL};
use crate::regions::RegionPoint;
use crate::states::{variance, BlochState};
use crate::{Error, Result};

/// Which functional of the uncertainties is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    VarianceSum,
    DeviationSum,
}

/// How the bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EigenvalueFormula,
    CrossProductFormula,
    BruteForce,
}

/// Objective minimized by the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    SumOfSquares,
    Sum,
}

/// A lower bound together with a witness point achieving it.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub argmin_point: RegionPoint,
    pub method: Method,
    pub note: Option<String>,
}

fn require_nondegenerate(family: &[QubitObservable]) -> Result<()> {
    if family.iter().any(|o| o.is_degenerate()) {
        Err(Error::DegenerateObservable)
    } else {
        Ok(())
    }
}

/// Uncertainty tuple of the pure state along `dir`.
fn tuple_at(family: &[QubitObservable], dir: Vec3) -> Vec<f64> {
    let st = BlochState::pure_along(dir);
    family.iter().map(|o| variance(o, &st).sqrt()).collect()
}

/// The top unit eigenvector of the second-moment matrix `sum a_i a_i^T`; the
/// pure state along it attains the variance-sum bound.
fn top_direction(family: &[QubitObservable]) -> Vec3 {
    let (_, vecs) = numeric::eig_sym3(&second_moment(family));
    vecs[2]
}

/// Variance-sum bound for a pair: the minimal eigenvalue of the 2x2 Gram
/// matrix, `(|a|^2 + |b|^2 - sqrt((|a|^2-|b|^2)^2 + 4 <a,b>^2))/2`.
///
/// Linearly dependent pairs degenerate to bound 0 (a common eigenstate
/// attains it) and are reported with a note instead of an error.
pub fn variance_sum_bound_pair(a: &QubitObservable, b: &QubitObservable) -> Result<BoundReport> {
    let fam = [*a, *b];
    require_nondegenerate(&fam)?;
    let d = decompose(&fam, RANK_TOL);
    if d.rank < 2 {
        return Ok(BoundReport {
            kind: BoundKind::VarianceSum,
            value: 0.0,
            argmin_point: RegionPoint::new(vec![0.0, 0.0]),
            method: Method::EigenvalueFormula,
            note: Some("linearly dependent pair: common eigenstate attains zero".into()),
        });
    }
    let (la2, lb2) = (numeric::dot3(a.vec, a.vec), numeric::dot3(b.vec, b.vec));
    let ip = numeric::dot3(a.vec, b.vec);
    let value = 0.5 * (la2 + lb2 - ((la2 - lb2).powi(2) + 4.0 * ip * ip).sqrt());
    Ok(BoundReport {
        kind: BoundKind::VarianceSum,
        value,
        argmin_point: RegionPoint::new(tuple_at(&fam, top_direction(&fam))),
        method: Method::EigenvalueFormula,
        note: None,
    })
}

/// Deviation-sum bound for a pair: `|a x b| / max(|a|, |b|)`, attained at
/// the axis intercept of the shorter observable (the lexicographically
/// smaller intercept on ties).
pub fn deviation_sum_bound_pair(a: &QubitObservable, b: &QubitObservable) -> Result<BoundReport> {
    let fam = [*a, *b];
    require_nondegenerate(&fam)?;
    let (la, lb) = (a.vec_norm(), b.vec_norm());
    let cross_norm = numeric::norm3(numeric::cross3(a.vec, b.vec));
    let value = cross_norm / la.max(lb);
    let sin_t = cross_norm / (la * lb);
    let argmin = if la < lb {
        vec![la * sin_t, 0.0]
    } else {
        vec![0.0, lb * sin_t]
    };
    Ok(BoundReport {
        kind: BoundKind::DeviationSum,
        value,
        argmin_point: RegionPoint::new(argmin),
        method: Method::CrossProductFormula,
        note: None,
    })
}

/// Variance-sum bound for an independent triple: `Tr T - lambda_max(T)`.
pub fn variance_sum_bound_triple(
    a: &QubitObservable,
    b: &QubitObservable,
    c: &QubitObservable,
) -> Result<BoundReport> {
    let fam = [*a, *b, *c];
    require_nondegenerate(&fam)?;
    let d = decompose(&fam, RANK_TOL);
    if d.rank < 3 {
        return Err(Error::LinearlyDependentFamily {
            rank: d.rank,
            need: 3,
        });
    }
    Ok(bound_from_moment(&fam))
}

/// Variance-sum bound for an arbitrary family:
/// `sum |a_i|^2 - lambda_max`, with the largest eigenvalue taken from the
/// 3x3 second-moment matrix (same nonzero spectrum as the n x n Gram).
pub fn variance_sum_bound_n(family: &[QubitObservable]) -> Result<BoundReport> {
    if family.is_empty() {
        return Err(Error::DomainError("empty family".into()));
    }
    Ok(bound_from_moment(family))
}

fn bound_from_moment(family: &[QubitObservable]) -> BoundReport {
    let trace: f64 = family.iter().map(|o| numeric::dot3(o.vec, o.vec)).sum();
    let (vals, vecs) = numeric::eig_sym3(&second_moment(family));
    let value = (trace - vals[2]).max(0.0);
    BoundReport {
        kind: BoundKind::VarianceSum,
        value,
        argmin_point: RegionPoint::new(tuple_at(family, vecs[2])),
        method: Method::EigenvalueFormula,
        note: None,
    }
}

/// Brute-force minimization of the uncertainty functional over pure states:
/// `resolution^2` Fibonacci-sphere directions plus one Nelder-Mead
/// refinement from the best grid point. Pure states suffice because both
/// objectives attain their minimum on the Bloch sphere.
pub fn brute_force_min(
    family: &[QubitObservable],
    objective: Objective,
    resolution: usize,
) -> Result<BoundReport> {
    if family.is_empty() {
        return Err(Error::DomainError("empty family".into()));
    }
    let fam = family.to_vec();
    let eval_dir = |dir: Vec3| -> f64 {
        let st = BlochState::pure_along(dir);
        fam.iter()
            .map(|o| {
                let v = variance(o, &st);
                match objective {
                    Objective::SumOfSquares => v,
                    Objective::Sum => v.sqrt(),
                }
            })
            .sum()
    };

    let n_points = resolution * resolution;
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    // Ties broken by grid index so the parallel reduction is deterministic.
    let best = (0..n_points)
        .into_par_iter()
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n_points as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * k as f64;
            let dir = [r * phi.cos(), r * phi.sin(), z];
            (eval_dir(dir), k, dir)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, [0.0, 0.0, 1.0]),
            |a, b| {
                if (a.0, a.1) <= (b.0, b.1) {
                    a
                } else {
                    b
                }
            },
        );

    // Refine in spherical coordinates around the best grid point.
    let theta0 = best.2[2].clamp(-1.0, 1.0).acos();
    let phi0 = best.2[1].atan2(best.2[0]);
    let step = 4.0 * std::f64::consts::PI / resolution as f64;
    let (opt, value) = numeric::nelder_mead(
        &mut |ang: &[f64]| {
            eval_dir([
                ang[0].sin() * ang[1].cos(),
                ang[0].sin() * ang[1].sin(),
                ang[0].cos(),
            ])
        },
        &[theta0, phi0],
        step,
        300,
        1e-15,
    );
    let dir = [
        opt[0].sin() * opt[1].cos(),
        opt[0].sin() * opt[1].sin(),
        opt[0].cos(),
    ];
    Ok(BoundReport {
        kind: match objective {
            Objective::SumOfSquares => BoundKind::VarianceSum,
            Objective::Sum => BoundKind::DeviationSum,
        },
        value,
        argmin_point: RegionPoint::new(tuple_at(&fam, dir)),
        method: Method::BruteForce,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{sigma_x, sigma_y, sigma_z};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn obs(a0: f64, v: Vec3) -> QubitObservable {
        QubitObservable::new(a0, v)
    }

    fn unit_at(theta: f64) -> QubitObservable {
        obs(0.0, [theta.cos(), theta.sin(), 0.0])
    }

    fn random_obs(rng: &mut ChaCha8Rng) -> QubitObservable {
        loop {
            let o = obs(
                rng.gen_range(-1.0..1.0),
                [
                    rng.gen_range(-1.5..1.5),
                    rng.gen_range(-1.5..1.5),
                    rng.gen_range(-1.5..1.5),
                ],
            );
            if o.vec_norm() > 0.3 {
                return o;
            }
        }
    }

    #[test]
    fn variance_pair_examples() {
        for theta in [0.3, 0.8, 1.4] {
            let r = variance_sum_bound_pair(&unit_at(0.0), &unit_at(theta)).unwrap();
            assert!((r.value - (1.0 - theta.cos().abs())).abs() < 1e-14);
        }
        let r = variance_sum_bound_pair(&sigma_x(), &sigma_z()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        let r = variance_sum_bound_pair(&obs(0.0, [2.0, 0.0, 0.0]), &obs(0.0, [0.0, 1.0, 0.0]))
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn variance_pair_monotone_in_angle() {
        let mut prev = -1.0;
        for i in 0..=40 {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / 40.0;
            let v = variance_sum_bound_pair(&unit_at(0.0), &unit_at(theta))
                .unwrap()
                .value;
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn variance_pair_degenerate_family() {
        let r = variance_sum_bound_pair(&sigma_z(), &obs(1.0, [0.0, 0.0, -2.0])).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.note.is_some());
    }

    #[test]
    fn deviation_pair_examples() {
        for theta in [0.3, 0.8, 1.4] {
            let r = deviation_sum_bound_pair(&unit_at(0.0), &unit_at(theta)).unwrap();
            assert!((r.value - theta.sin().abs()).abs() < 1e-14);
        }
        let r = deviation_sum_bound_pair(&sigma_x(), &sigma_z()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        let r = deviation_sum_bound_pair(&obs(0.0, [2.0, 0.0, 0.0]), &sigma_y()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        // Tie between lengths picks the lexicographically smaller intercept.
        let r = deviation_sum_bound_pair(&sigma_x(), &sigma_z()).unwrap();
        assert_eq!(r.argmin_point.coords(), &[0.0, 1.0]);
    }

    #[test]
    fn variance_triple_cases() {
        // Symmetric triple at pairwise angle theta.
        let symmetric = |theta: f64| -> [QubitObservable; 3] {
            let s2 = 2.0 * (1.0 - theta.cos()) / 3.0;
            let s = s2.sqrt();
            let h = (1.0 - s2).sqrt();
            let mut fam = [obs(0.0, [0.0; 3]); 3];
            for (i, f) in fam.iter_mut().enumerate() {
                let ang = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                *f = obs(0.0, [s * ang.cos(), s * ang.sin(), h]);
            }
            fam
        };
        for theta in [0.4, 0.9, std::f64::consts::FRAC_PI_2] {
            let fam = symmetric(theta);
            let r = variance_sum_bound_triple(&fam[0], &fam[1], &fam[2]).unwrap();
            assert!(
                (r.value - 2.0 * (1.0 - theta.cos())).abs() < 1e-12,
                "theta {theta}: {}",
                r.value
            );
        }

        // Orthogonal-to-first pair at angle alpha between the other two.
        for alpha in [0.3f64, 1.0, 1.5] {
            let a = sigma_z();
            let b = sigma_x();
            let c = obs(0.0, [alpha.cos(), alpha.sin(), 0.0]);
            let r = variance_sum_bound_triple(&a, &b, &c).unwrap();
            assert!((r.value - (2.0 - alpha.cos())).abs() < 1e-12);
        }

        let r = variance_sum_bound_triple(&sigma_x(), &sigma_y(), &sigma_z()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
        assert!(matches!(
            variance_sum_bound_triple(&sigma_x(), &sigma_y(), &obs(0.0, [1.0, 1.0, 0.0])),
            Err(Error::LinearlyDependentFamily { .. })
        ));
    }

    #[test]
    fn variance_n_examples() {
        // Reduces to the pair and triple formulas.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let a = random_obs(&mut rng);
            let b = random_obs(&mut rng);
            let pair = variance_sum_bound_pair(&a, &b).unwrap().value;
            let n = variance_sum_bound_n(&[a, b]).unwrap().value;
            assert!((pair - n).abs() < 1e-10, "{pair} vs {n}");
        }

        let r = variance_sum_bound_n(&[sigma_x(), sigma_y(), sigma_z(), sigma_z()]).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);

        let copies = vec![sigma_z(); 5];
        let r = variance_sum_bound_n(&copies).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn bound_invariant_under_offsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let a = random_obs(&mut rng);
            let b = random_obs(&mut rng);
            let v1 = variance_sum_bound_pair(&a, &b).unwrap().value;
            let v2 = variance_sum_bound_pair(&obs(5.0, a.vec), &obs(-3.0, b.vec))
                .unwrap()
                .value;
            assert_eq!(v1, v2);
            let d1 = deviation_sum_bound_pair(&a, &b).unwrap().value;
            let d2 = deviation_sum_bound_pair(&obs(5.0, a.vec), &obs(-3.0, b.vec))
                .unwrap()
                .value;
            assert_eq!(d1, d2);
        }
    }

    #[test]
    fn brute_force_examples() {
        let r = brute_force_min(&[sigma_x(), sigma_z()], Objective::SumOfSquares, 400).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4);
        let r = brute_force_min(
            &[sigma_x(), sigma_y(), sigma_z()],
            Objective::SumOfSquares,
            400,
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-4);
        let r = brute_force_min(&[sigma_x(), sigma_z()], Objective::Sum, 400).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn brute_force_agrees_with_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let a = random_obs(&mut rng);
            let b = random_obs(&mut rng);
            let analytic = variance_sum_bound_pair(&a, &b).unwrap().value;
            let brute = brute_force_min(&[a, b], Objective::SumOfSquares, 200)
                .unwrap()
                .value;
            assert!((analytic - brute).abs() < 1e-3);
            assert!(analytic <= brute + 1e-9, "analytic must lower-bound");

            let analytic = deviation_sum_bound_pair(&a, &b).unwrap().value;
            let brute = brute_force_min(&[a, b], Objective::Sum, 200).unwrap().value;
            assert!((analytic - brute).abs() < 1e-3);
            // The refiner settles into the square-root kink with noise at
            // the sqrt(machine epsilon) scale.
            assert!(analytic <= brute + 1e-6);
        }
    }

    #[test]
    fn witness_points_lie_in_region() {
        use crate::regions::RegionSpec;
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..50 {
            let fam: Vec<QubitObservable> = (0..rng.gen_range(2..=4usize))
                .map(|_| random_obs(&mut rng))
                .collect();
            let r = variance_sum_bound_n(&fam).unwrap();
            assert!(r.value >= 0.0);
            let spec = RegionSpec::new(fam.clone()).unwrap();
            assert!(spec.contains_n(&r.argmin_point).unwrap());

            if fam.len() == 2 {
                let d = deviation_sum_bound_pair(&fam[0], &fam[1]).unwrap();
                assert!(d.value >= 0.0);
                assert!(spec.contains_pair(&d.argmin_point).unwrap());
            }
        }
    }
}
