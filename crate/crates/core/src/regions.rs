//! Uncertainty-region membership predicates, boundary sampling, the
//! two-observable area formula with its maximizer, and Monte Carlo volume
//! estimation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::numeric;
use crate::observables::{
    angles, decompose, gram, FamilyDecomposition, GramMatrix, QubitObservable, RANK_TOL,
};
use crate::{Error, Result};

/// Slack accepted on quadratic-form membership tests.
const MEMBERSHIP_EPS: f64 = 1e-9;
/// Slack accepted on axis-box coordinates before `OutOfBox`.
const BOX_EPS: f64 = 1e-9;

/// An ordered family of observables with its derived Gram matrix and
/// rank/decomposition data.
#[derive(Debug, Clone)]
pub struct RegionSpec {
    family: Vec<QubitObservable>,
    gram: GramMatrix,
    decomposition: FamilyDecomposition,
}

/// A candidate tuple of uncertainties, one non-negative coordinate per
/// observable.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    coords: Vec<f64>,
}

impl RegionPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// `phi(t1, t2, t3) = cos t1 - cos t2 cos t3`, the angle combination
/// appearing in the trigonometric form of the triple membership test. The
/// quadratic form is the production path; the trigonometric form backed by
/// this helper serves as its test oracle.
#[cfg(test)]
fn phi(t1: f64, t2: f64, t3: f64) -> f64 {
    t1.cos() - t2.cos() * t3.cos()
}

impl RegionSpec {
    /// Builds the spec, rejecting degenerate observables.
    pub fn new(family: Vec<QubitObservable>) -> Result<Self> {
        let gram = gram(&family)?;
        let decomposition = decompose(&family, RANK_TOL);
        Ok(Self {
            family,
            gram,
            decomposition,
        })
    }

    pub fn family(&self) -> &[QubitObservable] {
        &self.family
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn decomposition(&self) -> &FamilyDecomposition {
        &self.decomposition
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    /// Axis box upper limits `|a_k|`.
    pub fn box_limits(&self) -> Vec<f64> {
        self.family.iter().map(|o| o.vec_norm()).collect()
    }

    /// Validates coordinates against the axis boxes and returns them clamped
    /// into `[0, |a_k|]`.
    fn clamped_coords(&self, p: &RegionPoint) -> Result<Vec<f64>> {
        if p.coords.len() != self.family.len() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, family has {}",
                p.coords.len(),
                self.family.len()
            )));
        }
        let mut out = Vec::with_capacity(p.coords.len());
        for (k, (&x, obs)) in p.coords.iter().zip(&self.family).enumerate() {
            let limit = obs.vec_norm();
            if x < -BOX_EPS || x > limit + BOX_EPS {
                return Err(Error::OutOfBox {
                    index: k,
                    value: x,
                    limit,
                });
            }
            out.push(x.clamp(0.0, limit));
        }
        Ok(out)
    }

    /// Two-observable membership: the closed inequality
    /// `|b|^2 x^2 + |a|^2 y^2 + 2|<a,b>| sqrt((|a|^2-x^2)(|b|^2-y^2))
    ///  >= |a|^2 |b|^2 + <a,b>^2`.
    pub fn contains_pair(&self, p: &RegionPoint) -> Result<bool> {
        if self.family.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "contains_pair needs 2 observables, got {}",
                self.family.len()
            )));
        }
        if self.decomposition.rank < 2 {
            return Err(Error::LinearlyDependentFamily {
                rank: self.decomposition.rank,
                need: 2,
            });
        }
        let c = self.clamped_coords(p)?;
        let (la2, lb2) = (self.gram.get(0, 0), self.gram.get(1, 1));
        let ip = self.gram.get(0, 1);
        let lhs = lb2 * c[0] * c[0]
            + la2 * c[1] * c[1]
            + 2.0 * ip.abs() * ((la2 - c[0] * c[0]) * (lb2 - c[1] * c[1])).max(0.0).sqrt();
        let rhs = la2 * lb2 + ip * ip;
        Ok(lhs >= rhs - MEMBERSHIP_EPS * la2.max(lb2).powi(2))
    }

    /// Three-observable membership via the sign-branch union of the
    /// quadratic form `u_eps T^{-1} u_eps^T <= 1`.
    pub fn contains_triple(&self, p: &RegionPoint) -> Result<bool> {
        if self.family.len() != 3 {
            return Err(Error::DimensionMismatch(format!(
                "contains_triple needs 3 observables, got {}",
                self.family.len()
            )));
        }
        if self.decomposition.rank < 3 {
            return Err(Error::LinearlyDependentFamily {
                rank: self.decomposition.rank,
                need: 3,
            });
        }
        let t = angles(&[self.family[0], self.family[1], self.family[2]])?;
        let sum = t.alpha + t.beta + t.gamma;
        if t.alpha >= t.beta + t.gamma + 1e-12
            || t.beta >= t.gamma + t.alpha + 1e-12
            || t.gamma >= t.alpha + t.beta + 1e-12
            || sum >= 2.0 * std::f64::consts::PI - 1e-12
        {
            return Err(Error::AngleConstraintViolated);
        }
        let c = self.clamped_coords(p)?;
        let tinv = numeric::mat3_inv(&self.gram.as_3x3())
            .ok_or(Error::LinearlyDependentFamily { rank: 2, need: 3 })?;
        let mut roots = [0.0; 3];
        for i in 0..3 {
            roots[i] = (self.gram.get(i, i) - c[i] * c[i]).max(0.0).sqrt();
        }
        for sb in [1.0, -1.0] {
            for sc in [1.0, -1.0] {
                let u = [roots[0], sb * roots[1], sc * roots[2]];
                if numeric::quadform3(&tinv, u) <= 1.0 + MEMBERSHIP_EPS {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// General membership: some sign assignment must satisfy the basis
    /// quadratic form and every sign-resolved dependence constraint.
    pub fn contains_n(&self, p: &RegionPoint) -> Result<bool> {
        let c = self.clamped_coords(p)?;
        let d = &self.decomposition;
        let r = d.rank;
        if r == 0 {
            return Err(Error::DegenerateObservable);
        }
        let roots: Vec<f64> = (0..self.family.len())
            .map(|i| (self.gram.get(i, i) - c[i] * c[i]).max(0.0).sqrt())
            .collect();
        let max_len = self
            .family
            .iter()
            .map(|o| o.vec_norm())
            .fold(0.0f64, f64::max);
        let ctol = MEMBERSHIP_EPS * max_len.max(1e-300);

        // Basis Gram inverse, sized by the rank.
        let basis = &d.basis_indices;
        let quad_ok = |signs: &[f64]| -> bool {
            match r {
                1 => {
                    let u = roots[basis[0]];
                    u * u / self.gram.get(basis[0], basis[0]) <= 1.0 + MEMBERSHIP_EPS
                }
                2 => {
                    let t = [
                        [
                            self.gram.get(basis[0], basis[0]),
                            self.gram.get(basis[0], basis[1]),
                        ],
                        [
                            self.gram.get(basis[1], basis[0]),
                            self.gram.get(basis[1], basis[1]),
                        ],
                    ];
                    let tinv = match numeric::mat2_inv(&t) {
                        Some(m) => m,
                        None => return false,
                    };
                    let u = [signs[0] * roots[basis[0]], signs[1] * roots[basis[1]]];
                    numeric::quadform2(&tinv, u) <= 1.0 + MEMBERSHIP_EPS
                }
                3 => {
                    let mut t = [[0.0; 3]; 3];
                    for i in 0..3 {
                        for j in 0..3 {
                            t[i][j] = self.gram.get(basis[i], basis[j]);
                        }
                    }
                    let tinv = match numeric::mat3_inv(&t) {
                        Some(m) => m,
                        None => return false,
                    };
                    let u = [
                        signs[0] * roots[basis[0]],
                        signs[1] * roots[basis[1]],
                        signs[2] * roots[basis[2]],
                    ];
                    numeric::quadform3(&tinv, u) <= 1.0 + MEMBERSHIP_EPS
                }
                _ => unreachable!(),
            }
        };

        // Enumerate basis signs with the first fixed (a global flip changes
        // nothing); non-basis signs are determined by their constraints.
        let combos = 1usize << (r - 1);
        for mask in 0..combos {
            let mut signs = vec![1.0; r];
            for j in 1..r {
                if mask >> (j - 1) & 1 == 1 {
                    signs[j] = -1.0;
                }
            }
            if !quad_ok(&signs) {
                continue;
            }
            let mut all_ok = true;
            for (l, kappa) in &d.coefficients {
                let target: f64 = basis
                    .iter()
                    .enumerate()
                    .map(|(j, &bi)| kappa[j] * signs[j] * roots[bi])
                    .sum();
                // Compare the squares: near the axis-box edge the roots carry
                // sqrt-amplified rounding that the squared form does not.
                let gap = (target * target - roots[*l] * roots[*l]).abs();
                let allowed =
                    ctol * (target.abs() + roots[*l]) + 64.0 * f64::EPSILON * max_len * max_len;
                if gap > allowed {
                    all_ok = false;
                    break;
                }
            }
            if all_ok {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Evenly sampled points of the tight boundary branch
    /// `y = (|b|/|a|)(-cos t x + sin t sqrt(|a|^2 - x^2))` over
    /// `x in [0, |a| sin t]`, plus the same branch with roles swapped.
    /// Returns `samples` points in total.
    pub fn boundary_pair(&self, samples: usize) -> Result<Vec<RegionPoint>> {
        if self.family.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "boundary_pair needs 2 observables, got {}",
                self.family.len()
            )));
        }
        if self.decomposition.rank < 2 {
            return Err(Error::LinearlyDependentFamily {
                rank: self.decomposition.rank,
                need: 2,
            });
        }
        let la = self.family[0].vec_norm();
        let lb = self.family[1].vec_norm();
        let cos_t = (self.gram.get(0, 1) / (la * lb)).clamp(-1.0, 1.0).abs();
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let n1 = samples - samples / 2;
        let n2 = samples / 2;
        let mut out = Vec::with_capacity(samples);
        for i in 0..n1 {
            let frac = if n1 == 1 {
                0.0
            } else {
                i as f64 / (n1 - 1) as f64
            };
            let x = la * sin_t * frac;
            let y = lb / la * (-cos_t * x + sin_t * (la * la - x * x).max(0.0).sqrt());
            out.push(RegionPoint::new(vec![x, y.max(0.0)]));
        }
        for i in 0..n2 {
            let frac = if n2 == 1 {
                0.0
            } else {
                i as f64 / (n2 - 1) as f64
            };
            let y = lb * sin_t * frac;
            let x = la / lb * (-cos_t * y + sin_t * (lb * lb - y * y).max(0.0).sqrt());
            out.push(RegionPoint::new(vec![x.max(0.0), y]));
        }
        Ok(out)
    }

    /// Monte Carlo estimate of the region's Lebesgue volume inside the axis
    /// box, with the binomial standard error. Sample chunks are distributed
    /// over workers, each seeded as `seed ^ chunk_index`.
    pub fn volume_mc(&self, samples: u64, seed: u64) -> Result<(f64, f64)> {
        if self.decomposition.rank < 2 {
            return Err(Error::LinearlyDependentFamily {
                rank: self.decomposition.rank,
                need: 2,
            });
        }
        let limits = self.box_limits();
        let box_vol: f64 = limits.iter().product();
        const CHUNK: u64 = 1 << 16;
        let n_chunks = samples.div_ceil(CHUNK);
        let hits: u64 = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ chunk);
                let count = CHUNK.min(samples - chunk * CHUNK);
                let mut hits = 0u64;
                let mut coords = vec![0.0; limits.len()];
                for _ in 0..count {
                    for (c, &l) in coords.iter_mut().zip(&limits) {
                        *c = rng.gen_range(0.0..l);
                    }
                    if self
                        .contains_n(&RegionPoint::new(coords.clone()))
                        .expect("coords inside box")
                    {
                        hits += 1;
                    }
                }
                hits
            })
            .sum();
        let p = hits as f64 / samples as f64;
        let stderr = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
        Ok((box_vol * p, stderr))
    }
}

/// Area of the unit-vector uncertainty region at angle `theta`:
/// `(pi - 3 theta) sin(theta)/2 - cos(theta) + 1` on `[0, pi/2]`. General
/// lengths scale the area by `|a||b|`. Use the `theta -> pi - theta`
/// symmetry before calling for obtuse angles.
pub fn area_pair(theta: f64) -> Result<f64> {
    if !(-1e-12..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::DomainError(format!(
            "theta = {theta} outside [0, pi/2]"
        )));
    }
    Ok(0.5 * (std::f64::consts::PI - 3.0 * theta) * theta.sin() - theta.cos() + 1.0)
}

/// Golden-section maximization of [`area_pair`] over `[0, pi/2]` to 1e-8.
/// Returns the maximizing angle and the maximal area.
pub fn max_area() -> (f64, f64) {
    numeric::golden_section_max(
        |t| area_pair(t).expect("bracket inside domain"),
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-8,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Vec3;
    use crate::observables::{sigma_x, sigma_y, sigma_z};
    use crate::states::{sample_purified, variance, BlochState};
    use rand::Rng;

    fn obs(a0: f64, v: Vec3) -> QubitObservable {
        QubitObservable::new(a0, v)
    }

    fn unit_pair(theta: f64) -> RegionSpec {
        RegionSpec::new(vec![
            obs(0.0, [1.0, 0.0, 0.0]),
            obs(0.0, [theta.cos(), theta.sin(), 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn contains_pair_examples() {
        let spec = unit_pair(std::f64::consts::FRAC_PI_2);
        assert!(spec
            .contains_pair(&RegionPoint::new(vec![1.0, 0.0]))
            .unwrap());
        assert!(!spec
            .contains_pair(&RegionPoint::new(vec![0.5, 0.5]))
            .unwrap());
        for theta in [0.3, 0.9, 1.2] {
            let spec = unit_pair(theta);
            let p = RegionPoint::new(vec![theta.sin(), 0.0]);
            assert!(spec.contains_pair(&p).unwrap(), "boundary at theta {theta}");
        }
        assert!(matches!(
            spec.contains_pair(&RegionPoint::new(vec![2.0, 0.0])),
            Err(Error::OutOfBox { index: 0, .. })
        ));
        let dep = RegionSpec::new(vec![sigma_z(), obs(0.0, [0.0, 0.0, 2.0])]).unwrap();
        assert!(matches!(
            dep.contains_pair(&RegionPoint::new(vec![0.1, 0.1])),
            Err(Error::LinearlyDependentFamily { .. })
        ));
    }

    #[test]
    fn contains_pair_offset_and_scaling_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let a = obs(
                rng.gen_range(-1.0..1.0),
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
            );
            let b = obs(
                rng.gen_range(-1.0..1.0),
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
            );
            let spec = match RegionSpec::new(vec![a, b]) {
                Ok(s) if s.decomposition().rank == 2 => s,
                _ => continue,
            };
            let p = RegionPoint::new(vec![
                rng.gen_range(0.0..a.vec_norm()),
                rng.gen_range(0.0..b.vec_norm()),
            ]);
            let inside = spec.contains_pair(&p).unwrap();

            // Offset shifts leave membership unchanged.
            let shifted =
                RegionSpec::new(vec![obs(a.offset + 3.0, a.vec), obs(b.offset - 1.0, b.vec)])
                    .unwrap();
            assert_eq!(shifted.contains_pair(&p).unwrap(), inside);

            // Scaling both the observable and the coordinate agrees too.
            let c = rng.gen_range(0.5..2.0);
            let scaled =
                RegionSpec::new(vec![obs(a.offset, numeric::scale3(a.vec, c)), b]).unwrap();
            let ps = RegionPoint::new(vec![c * p.coords()[0], p.coords()[1]]);
            assert_eq!(scaled.contains_pair(&ps).unwrap(), inside);
        }
    }

    #[test]
    fn contains_triple_examples() {
        let spec = RegionSpec::new(vec![sigma_x(), sigma_y(), sigma_z()]).unwrap();
        assert!(spec
            .contains_triple(&RegionPoint::new(vec![1.0, 1.0, 0.0]))
            .unwrap());
        assert!(!spec
            .contains_triple(&RegionPoint::new(vec![0.8, 0.8, 0.1]))
            .unwrap());
        let b = (2.0f64 / 3.0).sqrt();
        assert!(spec
            .contains_triple(&RegionPoint::new(vec![b, b, b]))
            .unwrap());
        let dep = RegionSpec::new(vec![sigma_x(), sigma_y(), obs(0.0, [1.0, 1.0, 0.0])]).unwrap();
        assert!(matches!(
            dep.contains_triple(&RegionPoint::new(vec![0.1, 0.1, 0.1])),
            Err(Error::LinearlyDependentFamily { .. })
        ));
    }

    /// Trigonometric oracle for the triple membership test: normalizes the
    /// vectors, rescales coordinates, and evaluates the angle form directly.
    fn contains_triple_trig(family: &[QubitObservable; 3], p: &[f64; 3]) -> bool {
        let t = angles(family).unwrap();
        let (al, be, ga) = (t.alpha, t.beta, t.gamma);
        let scaled: Vec<f64> = p
            .iter()
            .zip(family.iter())
            .map(|(&x, o)| (x / o.vec_norm()).clamp(0.0, 1.0))
            .collect();
        let rx = (1.0 - scaled[0] * scaled[0]).max(0.0).sqrt();
        let ry = (1.0 - scaled[1] * scaled[1]).max(0.0).sqrt();
        let rz = (1.0 - scaled[2] * scaled[2]).max(0.0).sqrt();
        let rhs = 1.0 - al.cos() * be.cos() * ga.cos();
        for eps in [1.0, -1.0] {
            let lhs = (phi(ga, al, be) * rx + eps * phi(al, be, ga) * rz).abs() * ry
                + eps * phi(be, ga, al) * rz * rx
                + 0.5
                    * (al.sin().powi(2) * scaled[0] * scaled[0]
                        + be.sin().powi(2) * scaled[1] * scaled[1]
                        + ga.sin().powi(2) * scaled[2] * scaled[2]);
            if lhs >= rhs - 1e-12 {
                return true;
            }
        }
        false
    }

    #[test]
    fn contains_triple_matches_trig_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(32);
        let mut checked = 0usize;
        while checked < 5000 {
            let fam: Vec<QubitObservable> = (0..3)
                .map(|_| {
                    obs(
                        rng.gen_range(-1.0..1.0),
                        [
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        ],
                    )
                })
                .collect();
            let spec = match RegionSpec::new(fam.clone()) {
                Ok(s) if s.decomposition().rank == 3 => s,
                _ => continue,
            };
            let p = [
                rng.gen_range(0.0..fam[0].vec_norm()),
                rng.gen_range(0.0..fam[1].vec_norm()),
                rng.gen_range(0.0..fam[2].vec_norm()),
            ];
            let quad = spec.contains_triple(&RegionPoint::new(p.to_vec())).unwrap();
            let trig = contains_triple_trig(&[fam[0], fam[1], fam[2]], &p);
            assert_eq!(quad, trig, "family {fam:?} point {p:?}");
            checked += 1;
        }
    }

    #[test]
    fn contains_n_examples() {
        // Specialization agrees with the triple test on random points.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let spec = RegionSpec::new(vec![sigma_x(), sigma_y(), sigma_z()]).unwrap();
        for _ in 0..10_000 {
            let p = RegionPoint::new(vec![rng.gen(), rng.gen(), rng.gen()]);
            assert_eq!(
                spec.contains_n(&p).unwrap(),
                spec.contains_triple(&p).unwrap()
            );
        }

        // Identical observables share their uncertainty.
        let spec = RegionSpec::new(vec![sigma_z(), sigma_z()]).unwrap();
        assert!(spec.contains_n(&RegionPoint::new(vec![0.6, 0.6])).unwrap());
        assert!(!spec.contains_n(&RegionPoint::new(vec![0.6, 0.7])).unwrap());

        // Maximally mixed state attains the full-uncertainty corner.
        let s = 1.0 / 3.0f64.sqrt();
        let spec =
            RegionSpec::new(vec![sigma_x(), sigma_y(), sigma_z(), obs(0.0, [s, s, s])]).unwrap();
        let mixed = BlochState::maximally_mixed();
        let coords: Vec<f64> = spec
            .family()
            .iter()
            .map(|o| variance(o, &mixed).sqrt())
            .collect();
        assert!(coords.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(spec.contains_n(&RegionPoint::new(coords)).unwrap());
    }

    #[test]
    fn sampled_states_always_inside() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(34);
        for _ in 0..5 {
            let n = rng.gen_range(2..=5usize);
            let fam: Vec<QubitObservable> = (0..n)
                .map(|_| {
                    obs(
                        rng.gen_range(-1.0..1.0),
                        [
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        ],
                    )
                })
                .collect();
            let spec = match RegionSpec::new(fam.clone()) {
                Ok(s) => s,
                Err(_) => continue,
            };
            for _ in 0..2000 {
                let st = sample_purified(&mut rng);
                let coords: Vec<f64> = fam.iter().map(|o| variance(o, &st).sqrt()).collect();
                assert!(spec.contains_n(&RegionPoint::new(coords)).unwrap());
            }
        }
    }

    #[test]
    fn boundary_pair_examples() {
        // Quarter circle for orthogonal unit vectors.
        let spec = unit_pair(std::f64::consts::FRAC_PI_2);
        let pts = spec.boundary_pair(64).unwrap();
        assert_eq!(pts.len(), 64);
        for p in &pts {
            let r2 = p.coords()[0].powi(2) + p.coords()[1].powi(2);
            assert!((r2 - 1.0).abs() < 1e-12);
        }

        for theta in [0.4, 1.0, std::f64::consts::FRAC_PI_2] {
            let spec = unit_pair(theta);
            let pts = spec.boundary_pair(33).unwrap();
            let has = |x: f64, y: f64| {
                pts.iter()
                    .any(|p| (p.coords()[0] - x).abs() < 1e-12 && (p.coords()[1] - y).abs() < 1e-12)
            };
            assert!(has(theta.sin(), 0.0));
            assert!(has(0.0, theta.sin()));
            for p in &pts {
                assert!(spec.contains_pair(p).unwrap());
                // Lemma-1 residual vanishes on the boundary.
                let (x, y) = (p.coords()[0], p.coords()[1]);
                let ip: f64 = spec.gram().get(0, 1);
                let lhs = x * x
                    + y * y
                    + 2.0 * ip.abs() * ((1.0 - x * x) * (1.0 - y * y)).max(0.0).sqrt();
                assert!((lhs - (1.0 + ip * ip)).abs() < 1e-9);
                // Inward perturbation leaves the region.
                let shrunk = RegionPoint::new(vec![x * 0.999, y * 0.999]);
                assert!(!spec.contains_pair(&shrunk).unwrap(), "theta {theta}");
            }
        }
    }

    #[test]
    fn boundary_points_attained_by_states() {
        // Projected search over pure states reaches each boundary point.
        for theta in [0.5, 1.1] {
            let spec = unit_pair(theta);
            let fam = spec.family().to_vec();
            for p in spec.boundary_pair(9).unwrap() {
                let target = p.coords().to_vec();
                let objective = |ang: &[f64]| -> f64 {
                    let r = [
                        ang[0].sin() * ang[1].cos(),
                        ang[0].sin() * ang[1].sin(),
                        ang[0].cos(),
                    ];
                    let st = BlochState::pure_along(r);
                    fam.iter()
                        .zip(&target)
                        .map(|(o, &t)| (variance(o, &st).sqrt() - t).powi(2))
                        .sum()
                };
                let mut best = (f64::INFINITY, [0.0, 0.0]);
                for i in 0..64 {
                    for j in 0..64 {
                        let th = std::f64::consts::PI * (i as f64 + 0.5) / 64.0;
                        let ph = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
                        let v = objective(&[th, ph]);
                        if v < best.0 {
                            best = (v, [th, ph]);
                        }
                    }
                }
                let (_, residual) =
                    numeric::nelder_mead(&mut |x| objective(x), &best.1, 0.05, 400, 1e-18);
                assert!(residual.sqrt() < 1e-6, "residual {}", residual.sqrt());
            }
        }
    }

    #[test]
    fn area_pair_examples() {
        assert_eq!(area_pair(0.0).unwrap(), 0.0);
        let q = area_pair(std::f64::consts::FRAC_PI_2).unwrap();
        assert!((q - (1.0 - std::f64::consts::PI / 4.0)).abs() < 1e-15);
        assert!((area_pair(0.741758).unwrap() - 0.572244).abs() < 1e-5);
        assert!(area_pair(2.0).is_err());
        assert!(area_pair(-0.5).is_err());
    }

    #[test]
    fn area_pair_matches_grid() {
        // Coarser grid than the acceptance run; same oracle.
        let n = 500usize;
        for theta in [
            std::f64::consts::PI / 16.0,
            std::f64::consts::PI / 4.0,
            std::f64::consts::FRAC_PI_2,
        ] {
            let spec = unit_pair(theta);
            let mut hits = 0usize;
            for i in 0..n {
                for j in 0..n {
                    let p = RegionPoint::new(vec![
                        (i as f64 + 0.5) / n as f64,
                        (j as f64 + 0.5) / n as f64,
                    ]);
                    if spec.contains_pair(&p).unwrap() {
                        hits += 1;
                    }
                }
            }
            let grid = hits as f64 / (n * n) as f64;
            assert!((grid - area_pair(theta).unwrap()).abs() < 5e-3);
        }
    }

    #[test]
    fn max_area_example() {
        let (theta, value) = max_area();
        assert!((theta - 0.741758).abs() < 1e-4);
        assert!((value - 0.572244).abs() < 1e-4);
    }

    #[test]
    fn volume_mc_examples() {
        let spec = unit_pair(std::f64::consts::FRAC_PI_4);
        let (est, err) = spec.volume_mc(2_000_000, 7).unwrap();
        let exact = area_pair(std::f64::consts::FRAC_PI_4).unwrap();
        assert!((est - exact).abs() < 4.0 * err, "{est} vs {exact} pm {err}");

        // Independent quadrature oracle for the Pauli triple: complement of
        // the radius-sqrt(2) ball in the unit cube.
        let pauli = RegionSpec::new(vec![sigma_x(), sigma_y(), sigma_z()]).unwrap();
        let (est, err) = pauli.volume_mc(2_000_000, 8).unwrap();
        let mut complement = 0.0;
        let m = 2000;
        for i in 0..m {
            for j in 0..m {
                let x = (i as f64 + 0.5) / m as f64;
                let y = (j as f64 + 0.5) / m as f64;
                let h = (2.0 - x * x - y * y).max(0.0).sqrt().min(1.0);
                complement += h / (m * m) as f64;
            }
        }
        let exact = 1.0 - complement;
        assert!((exact - 0.034931).abs() < 1e-4, "oracle {exact}");
        assert!((est - exact).abs() < 4.0 * err, "{est} vs {exact} pm {err}");

        // Tiny angle: the region collapses.
        let spec = unit_pair(1e-4);
        let (est, _) = spec.volume_mc(200_000, 9).unwrap();
        assert!(est < 2e-3);
    }

    #[test]
    fn volume_mc_deterministic() {
        let spec = unit_pair(0.9);
        let a = spec.volume_mc(300_000, 42).unwrap();
        let b = spec.volume_mc(300_000, 42).unwrap();
        assert_eq!(a, b);
    }
}
