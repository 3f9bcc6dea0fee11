//! Larger-scale oracle comparisons: analytic formulas against brute force,
//! Monte Carlo volumes against quadrature, marginals against joint
//! densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use quncert::bounds::{self, Objective};
use quncert::densities;
use quncert::numeric;
use quncert::observables::{sigma_x, sigma_y, sigma_z, QubitObservable};
use quncert::regions::{area_pair, RegionSpec};
use quncert::states::BlochState;
use quncert::witness::{self, CompositeObservable, MultipartiteState};

fn random_obs(rng: &mut ChaCha8Rng) -> QubitObservable {
    loop {
        let o = QubitObservable::new(
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
fn triple_bound_vs_brute_force_100() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut triples = Vec::new();
    while triples.len() < 100 {
        let fam = [
            random_obs(&mut rng),
            random_obs(&mut rng),
            random_obs(&mut rng),
        ];
        if bounds::variance_sum_bound_triple(&fam[0], &fam[1], &fam[2]).is_ok() {
            triples.push(fam);
        }
    }
    let worst = triples
        .par_iter()
        .map(|fam| {
            let analytic = bounds::variance_sum_bound_triple(&fam[0], &fam[1], &fam[2])
                .unwrap()
                .value;
            let brute = bounds::brute_force_min(fam, Objective::SumOfSquares, 400)
                .unwrap()
                .value;
            assert!(analytic <= brute + 1e-6);
            (analytic - brute).abs()
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst < 1e-3, "worst triple gap {worst}");
}

#[test]
fn n5_bound_vs_brute_force_50() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let families: Vec<Vec<QubitObservable>> = (0..50)
        .map(|_| (0..5).map(|_| random_obs(&mut rng)).collect())
        .collect();
    let worst = families
        .par_iter()
        .map(|fam| {
            let analytic = bounds::variance_sum_bound_n(fam).unwrap().value;
            let brute = bounds::brute_force_min(fam, Objective::SumOfSquares, 400)
                .unwrap()
                .value;
            assert!(analytic <= brute + 1e-6);
            (analytic - brute).abs()
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst < 1e-3, "worst n=5 gap {worst}");
}

#[test]
fn volume_mc_matches_quadrature_oracles() {
    // Pair at theta = pi/4: closed-form area.
    let theta = std::f64::consts::FRAC_PI_4;
    let spec = RegionSpec::new(vec![
        QubitObservable::new(0.0, [1.0, 0.0, 0.0]),
        QubitObservable::new(0.0, [theta.cos(), theta.sin(), 0.0]),
    ])
    .unwrap();
    let (est, err) = spec.volume_mc(10_000_000, 42).unwrap();
    let exact = area_pair(theta).unwrap();
    assert!((exact - 0.5706).abs() < 1e-4);
    assert!((est - exact).abs() < 3.0 * err, "{est} vs {exact} +- {err}");

    // Pauli triple: complement of the radius-sqrt(2) ball in the unit cube,
    // by independent quadrature.
    let spec = RegionSpec::new(vec![sigma_x(), sigma_y(), sigma_z()]).unwrap();
    let (est, err) = spec.volume_mc(10_000_000, 43).unwrap();
    let m = 4000usize;
    let complement: f64 = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) / m as f64;
            let mut acc = 0.0;
            for j in 0..m {
                let y = (j as f64 + 0.5) / m as f64;
                acc += (2.0 - x * x - y * y).max(0.0).sqrt().min(1.0);
            }
            acc / (m * m) as f64
        })
        .sum();
    let exact = 1.0 - complement;
    assert!((est - exact).abs() < 3.0 * err, "{est} vs {exact} +- {err}");
}

#[test]
fn mean_pair_marginal_matches_single() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..5 {
        let a = random_obs(&mut rng);
        let b = random_obs(&mut rng);
        let pair = match densities::pdf_mean_pair(&a, &b) {
            Ok(d) if d.kind() == densities::Kind::Continuous => d,
            _ => continue,
        };
        let single = densities::pdf_mean(&a).unwrap();
        let (alo, ahi) = a.eigenvalues();
        let (blo, bhi) = b.eigenvalues();
        // For fixed r the slice through the support ellipse is an interval;
        // locating its endpoints by bisection keeps the quadrature honest
        // while the sine substitution absorbs the square-root ends.
        let marginal = |r: f64| -> f64 {
            let inside = |s: f64| pair.eval(&[r, s]) > 0.0;
            let mut probe = None;
            let nscan = 512;
            for k in 0..nscan {
                let s = blo + (bhi - blo) * (k as f64 + 0.5) / nscan as f64;
                if inside(s) {
                    probe = Some(s);
                    break;
                }
            }
            let Some(s0) = probe else { return 0.0 };
            let bisect = |mut out: f64, mut inn: f64| -> f64 {
                for _ in 0..80 {
                    let mid = 0.5 * (out + inn);
                    if inside(mid) {
                        inn = mid;
                    } else {
                        out = mid;
                    }
                }
                0.5 * (out + inn)
            };
            let lo = bisect(blo - 1.0, s0);
            let hi = bisect(bhi + 1.0, s0);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            numeric::gl_integrate(
                &mut |t: f64| pair.eval(&[r, mid + half * t.sin()]) * half * t.cos(),
                -std::f64::consts::FRAC_PI_2,
                std::f64::consts::FRAC_PI_2,
                32,
            )
        };
        let mut l1 = 0.0;
        let panels = 32;
        for i in 0..panels {
            let r0 = alo + (ahi - alo) * i as f64 / panels as f64;
            let r1 = alo + (ahi - alo) * (i + 1) as f64 / panels as f64;
            l1 +=
                numeric::gl_integrate(&mut |r| (marginal(r) - single.eval(&[r])).abs(), r0, r1, 8);
        }
        assert!(l1 < 1e-4, "marginal L1 {l1}");
    }
}

#[test]
fn dependent_families_contain_sampled_states() {
    // Rank-deficient families route membership through the sign-resolved
    // dependence constraints; every physical state must still pass.
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    for trial in 0..20 {
        let rank = rng.gen_range(1..=2usize);
        let n = rng.gen_range(rank.max(2)..=5usize);
        let basis: Vec<QubitObservable> = (0..rank).map(|_| random_obs(&mut rng)).collect();
        let mut fam = basis.clone();
        while fam.len() < n {
            let mut v = [0.0; 3];
            for b in &basis {
                let c = rng.gen_range(-2.0..2.0f64);
                v = numeric::add3(v, numeric::scale3(b.vec, c));
            }
            if numeric::norm3(v) < 0.05 {
                continue;
            }
            fam.push(QubitObservable::new(rng.gen_range(-1.0..1.0), v));
        }
        let spec = RegionSpec::new(fam.clone()).unwrap();
        assert_eq!(spec.decomposition().rank, rank, "trial {trial}");
        let mut srng = ChaCha8Rng::seed_from_u64(66 + trial);
        for _ in 0..5000 {
            let s = if srng.gen_bool(0.5) {
                quncert::states::sample_purified(&mut srng)
            } else {
                quncert::states::sample_spectral(&mut srng)
            };
            let coords: Vec<f64> = fam
                .iter()
                .map(|o| quncert::states::variance(o, &s).sqrt())
                .collect();
            assert!(
                spec.contains_n(&quncert::regions::RegionPoint::new(coords))
                    .unwrap(),
                "trial {trial}: state escaped a rank-{rank} region"
            );
        }
    }
}

#[test]
fn product_vs_dense_agreement_1000() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..1000 {
        let sites = rng.gen_range(2..=3usize);
        let state = witness::random_separable(sites, rng.gen_range(1..=4), &mut rng);
        let m =
            CompositeObservable::new((0..sites).map(|_| random_obs(&mut rng)).collect()).unwrap();
        let via_mixture = witness::composite_variance(&m, &state).unwrap();
        let dense = MultipartiteState::Dense(state.to_dense().unwrap());
        let via_dense = witness::composite_variance(&m, &dense).unwrap();
        assert!(
            (via_mixture - via_dense).abs() < 1e-10,
            "{via_mixture} vs {via_dense}"
        );
    }
}

#[test]
fn boundary_points_attained_by_bloch_states() {
    // Every boundary point is reached by a pure state found by projected
    // search, residual below 1e-6.
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..3 {
        let a = random_obs(&mut rng);
        let b = random_obs(&mut rng);
        let spec = match RegionSpec::new(vec![a, b]) {
            Ok(s) if s.decomposition().rank == 2 => s,
            _ => continue,
        };
        for p in spec.boundary_pair(17).unwrap() {
            let target = p.coords().to_vec();
            let objective = |ang: &[f64]| -> f64 {
                let dir = [
                    ang[0].sin() * ang[1].cos(),
                    ang[0].sin() * ang[1].sin(),
                    ang[0].cos(),
                ];
                let st = BlochState::pure_along(dir);
                [a, b]
                    .iter()
                    .zip(&target)
                    .map(|(o, &t)| (quncert::states::variance(o, &st).sqrt() - t).powi(2))
                    .sum()
            };
            let mut best = (f64::INFINITY, [0.0, 0.0]);
            for i in 0..96 {
                for j in 0..96 {
                    let th = std::f64::consts::PI * (i as f64 + 0.5) / 96.0;
                    let ph = 2.0 * std::f64::consts::PI * j as f64 / 96.0;
                    let v = objective(&[th, ph]);
                    if v < best.0 {
                        best = (v, [th, ph]);
                    }
                }
            }
            let (_, residual) =
                numeric::nelder_mead(&mut |x| objective(x), &best.1, 0.05, 500, 1e-18);
            assert!(residual.sqrt() < 1e-6, "residual {}", residual.sqrt());
        }
    }
}
