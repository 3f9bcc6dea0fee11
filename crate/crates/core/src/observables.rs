//! Qubit observable algebra: parametrization, eigenvalues, Gram matrices,
//! pair/triple angles, and linear-dependence decomposition of families.

use crate::numeric::{self, Vec3};
use crate::{Error, Result};

/// Default singular-value ratio below which a direction counts as linearly
/// dependent.
pub const RANK_TOL: f64 = 1e-9;

/// A qubit observable `A = offset * I + vec . sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitObservable {
    pub offset: f64,
    pub vec: Vec3,
}

impl QubitObservable {
    pub fn new(offset: f64, vec: Vec3) -> Self {
        Self { offset, vec }
    }

    /// Length |a| of the Bloch vector; half the spectral gap.
    pub fn vec_norm(&self) -> f64 {
        numeric::norm3(self.vec)
    }

    /// An observable proportional to the identity has no spectral gap; such
    /// observables are representable but rejected by analytic operations.
    pub fn is_degenerate(&self) -> bool {
        self.vec_norm() == 0.0
    }

    /// The two eigenvalues `(offset - |a|, offset + |a|)`, ascending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let n = self.vec_norm();
        (self.offset - n, self.offset + n)
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateObservable)
        } else {
            Ok(())
        }
    }
}

/// Shorthand constructors for the Pauli observables.
pub fn sigma_x() -> QubitObservable {
    QubitObservable::new(0.0, [1.0, 0.0, 0.0])
}
pub fn sigma_y() -> QubitObservable {
    QubitObservable::new(0.0, [0.0, 1.0, 0.0])
}
pub fn sigma_z() -> QubitObservable {
    QubitObservable::new(0.0, [0.0, 0.0, 1.0])
}

/// Symmetric matrix of pairwise inner products of the family's Bloch vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn as_2x2(&self) -> [[f64; 2]; 2] {
        assert_eq!(self.dim, 2);
        [
            [self.get(0, 0), self.get(0, 1)],
            [self.get(1, 0), self.get(1, 1)],
        ]
    }

    pub fn as_3x3(&self) -> [[f64; 3]; 3] {
        assert_eq!(self.dim, 3);
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.get(i, j);
            }
        }
        m
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.get(0, 0),
            2 => numeric::mat2_det(&self.as_2x2()),
            3 => numeric::mat3_det(&self.as_3x3()),
            _ => panic!("det only for dim <= 3"),
        }
    }

    /// Smallest eigenvalue. For more than three observables the Gram matrix
    /// is rank-deficient (the vectors live in R^3), so the value is 0.
    pub fn lambda_min(&self) -> f64 {
        match self.dim {
            1 => self.get(0, 0),
            2 => numeric::eig_sym2(&self.as_2x2()).0[0],
            3 => numeric::eig_sym3(&self.as_3x3()).0[0],
            _ => 0.0,
        }
    }

    /// Largest eigenvalue. For dim > 3 computed by power iteration on the
    /// Gram matrix itself (the nonzero spectrum matches the 3x3 second-moment
    /// matrix, but no vectors are stored here).
    pub fn lambda_max(&self) -> f64 {
        match self.dim {
            1 => self.get(0, 0),
            2 => numeric::eig_sym2(&self.as_2x2()).0[1],
            3 => numeric::eig_sym3(&self.as_3x3()).0[2],
            n => {
                let mut v = vec![1.0 / (n as f64).sqrt(); n];
                let mut lam = 0.0;
                for _ in 0..200 {
                    let mut w = vec![0.0; n];
                    for i in 0..n {
                        for j in 0..n {
                            w[i] += self.get(i, j) * v[j];
                        }
                    }
                    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        return 0.0;
                    }
                    for x in &mut w {
                        *x /= norm;
                    }
                    lam = norm;
                    v = w;
                }
                lam
            }
        }
    }
}

/// Gram matrix of a family; every observable must have a nonzero vector.
pub fn gram(family: &[QubitObservable]) -> Result<GramMatrix> {
    if family.is_empty() {
        return Err(Error::DomainError("empty family".into()));
    }
    for obs in family {
        obs.require_nondegenerate()?;
    }
    let k = family.len();
    let mut entries = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            entries[i * k + j] = numeric::dot3(family[i].vec, family[j].vec);
        }
    }
    Ok(GramMatrix { dim: k, entries })
}

/// Second-moment matrix `M M^T = sum_i a_i a_i^T` of the stacked vectors.
/// Its nonzero spectrum equals that of the Gram matrix `M^T M`.
pub fn second_moment(family: &[QubitObservable]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for obs in family {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += obs.vec[i] * obs.vec[j];
            }
        }
    }
    m
}

/// Largest squared singular value of the stacked 3xn vector matrix.
pub fn gram_lambda_max(family: &[QubitObservable]) -> f64 {
    numeric::eig_sym3(&second_moment(family)).0[2]
}

/// Basis selection and expansion coefficients for a family of Bloch vectors.
///
/// `basis_indices` points at a linearly independent sub-family of size
/// `rank`; every other vector `a_l` is stored as the coefficient triple with
/// `a_l = sum_j kappa_lj * a_{basis_j}` (trailing entries zero when
/// rank < 3).
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDecomposition {
    pub basis_indices: Vec<usize>,
    pub coefficients: Vec<(usize, [f64; 3])>,
    pub rank: usize,
}

impl FamilyDecomposition {
    /// Coefficients of a non-basis member, if `index` is not in the basis.
    pub fn coefficients_for(&self, index: usize) -> Option<&[f64; 3]> {
        self.coefficients
            .iter()
            .find(|(l, _)| *l == index)
            .map(|(_, k)| k)
    }
}

/// Rank and expansion coefficients of a family by pivoted elimination in
/// index order: a vector joins the basis when its residual against the
/// already-chosen basis stays above `tol * sigma_max`, so the earliest
/// independent sub-family wins.
///
/// The largest singular value comes from the 3x3 second-moment matrix; the
/// small ones are probed through the pivot residuals, which stay accurate
/// at machine precision where a squared-matrix eigenvalue would not.
pub fn decompose(family: &[QubitObservable], tol: f64) -> FamilyDecomposition {
    let n = family.len();
    let smax = {
        let (vals, _) = numeric::eig_sym3(&second_moment(family));
        vals[2].max(0.0).sqrt()
    };

    let mut basis_indices: Vec<usize> = Vec::new();
    let mut ortho: Vec<Vec3> = Vec::new();
    if smax > 0.0 {
        for (i, obs) in family.iter().enumerate() {
            if basis_indices.len() == 3 {
                break;
            }
            let mut r = obs.vec;
            // Two projection passes keep orthogonality at machine precision.
            for _ in 0..2 {
                for q in &ortho {
                    r = numeric::sub3(r, numeric::scale3(*q, numeric::dot3(r, *q)));
                }
            }
            if numeric::norm3(r) > tol * smax {
                basis_indices.push(i);
                ortho.push(numeric::normalize3(r));
            }
        }
    }
    let rank = basis_indices.len();

    let coefficients = (0..n)
        .filter(|i| !basis_indices.contains(i))
        .map(|l| (l, solve_in_basis(family, &basis_indices, family[l].vec)))
        .collect();

    FamilyDecomposition {
        basis_indices,
        coefficients,
        rank,
    }
}

/// Least-squares coefficients expressing `target` in the chosen basis,
/// polished by two rounds of iterative refinement on the normal equations.
fn solve_in_basis(family: &[QubitObservable], basis: &[usize], target: Vec3) -> [f64; 3] {
    let r = basis.len();
    if r == 0 {
        return [0.0; 3];
    }
    let b: Vec<Vec3> = basis.iter().map(|&i| family[i].vec).collect();
    if r == 1 {
        let mut k = numeric::dot3(target, b[0]) / numeric::dot3(b[0], b[0]);
        for _ in 0..2 {
            let resid = numeric::sub3(target, numeric::scale3(b[0], k));
            k += numeric::dot3(resid, b[0]) / numeric::dot3(b[0], b[0]);
        }
        return [k, 0.0, 0.0];
    }
    let solve = |rhs: &[f64]| -> [f64; 3] {
        let mut out = [0.0; 3];
        if r == 2 {
            let g = [
                [numeric::dot3(b[0], b[0]), numeric::dot3(b[0], b[1])],
                [numeric::dot3(b[1], b[0]), numeric::dot3(b[1], b[1])],
            ];
            let gi = numeric::mat2_inv(&g).expect("independent basis");
            out[0] = gi[0][0] * rhs[0] + gi[0][1] * rhs[1];
            out[1] = gi[1][0] * rhs[0] + gi[1][1] * rhs[1];
        } else {
            let mut g = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] = numeric::dot3(b[i], b[j]);
                }
            }
            let gi = numeric::mat3_inv(&g).expect("independent basis");
            for i in 0..3 {
                out[i] = gi[i][0] * rhs[0] + gi[i][1] * rhs[1] + gi[i][2] * rhs[2];
            }
        }
        out
    };
    let rhs: Vec<f64> = b.iter().map(|&v| numeric::dot3(target, v)).collect();
    let mut k = solve(&rhs);
    for _ in 0..2 {
        let mut rec = [0.0; 3];
        for (j, &v) in b.iter().enumerate() {
            rec = numeric::add3(rec, numeric::scale3(v, k[j]));
        }
        let resid = numeric::sub3(target, rec);
        let rhs: Vec<f64> = b.iter().map(|&v| numeric::dot3(resid, v)).collect();
        let delta = solve(&rhs);
        for j in 0..r {
            k[j] += delta[j];
        }
    }
    k
}

/// Pairwise angles of a triple, each in [0, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleAngles {
    /// Angle between the second and third vectors.
    pub alpha: f64,
    /// Angle between the first and third vectors.
    pub beta: f64,
    /// Angle between the first and second vectors.
    pub gamma: f64,
}

/// Angles of a triple of observables from normalized inner products, clamped
/// to [-1, 1] before `acos`.
pub fn angles(family: &[QubitObservable; 3]) -> Result<TripleAngles> {
    for obs in family {
        obs.require_nondegenerate()?;
    }
    let angle = |u: Vec3, v: Vec3| -> f64 {
        let c = numeric::dot3(u, v) / (numeric::norm3(u) * numeric::norm3(v));
        c.clamp(-1.0, 1.0).acos()
    };
    Ok(TripleAngles {
        alpha: angle(family[1].vec, family[2].vec),
        beta: angle(family[0].vec, family[2].vec),
        gamma: angle(family[0].vec, family[1].vec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn obs(a0: f64, v: Vec3) -> QubitObservable {
        QubitObservable::new(a0, v)
    }

    #[test]
    fn eigenvalues_examples() {
        assert_eq!(sigma_z().eigenvalues(), (-1.0, 1.0));
        assert_eq!(obs(2.0, [3.0, 0.0, 4.0]).eigenvalues(), (-3.0, 7.0));
        let degenerate = obs(0.0, [0.0, 0.0, 0.0]);
        assert_eq!(degenerate.eigenvalues(), (0.0, 0.0));
        assert!(degenerate.is_degenerate());
    }

    #[test]
    fn eigenvalue_midpoint_and_halfgap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let o = obs(
                rng.gen_range(-2.0..2.0),
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
            );
            let (lo, hi) = o.eigenvalues();
            assert!((0.5 * (lo + hi) - o.offset).abs() < 1e-14);
            assert!((0.5 * (hi - lo) - o.vec_norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn gram_examples() {
        let g = gram(&[sigma_x(), sigma_z()]).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(0, 1), 0.0);
        assert_eq!(g.get(1, 1), 1.0);

        let theta = std::f64::consts::PI / 3.0;
        let g = gram(&[
            obs(0.0, [1.0, 0.0, 0.0]),
            obs(0.0, [theta.cos(), theta.sin(), 0.0]),
        ])
        .unwrap();
        assert!((g.get(0, 1) - 0.5).abs() < 1e-15);

        let g = gram(&[sigma_x(), sigma_y(), sigma_z()]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }

        assert!(matches!(
            gram(&[obs(1.0, [0.0; 3])]),
            Err(Error::DegenerateObservable)
        ));
    }

    #[test]
    fn gram_lambda_max_matches_singular_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let n = rng.gen_range(2..=3usize);
            let family: Vec<_> = (0..n)
                .map(|_| {
                    obs(
                        0.0,
                        [
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        ],
                    )
                })
                .collect();
            if family.iter().any(|o| o.vec_norm() < 1e-3) {
                continue;
            }
            let g = gram(&family).unwrap();
            let via_gram = g.lambda_max();
            let via_singular = gram_lambda_max(&family);
            assert!(
                (via_gram - via_singular).abs() < 1e-10,
                "{via_gram} vs {via_singular}"
            );
        }
    }

    #[test]
    fn decompose_examples() {
        let fam = [
            obs(0.0, [1.0, 0.0, 0.0]),
            obs(0.0, [0.0, 1.0, 0.0]),
            obs(0.0, [1.0, 1.0, 0.0]),
        ];
        let d = decompose(&fam, RANK_TOL);
        assert_eq!(d.rank, 2);
        assert_eq!(d.basis_indices, vec![0, 1]);
        let k = d.coefficients_for(2).unwrap();
        assert!((k[0] - 1.0).abs() < 1e-12 && (k[1] - 1.0).abs() < 1e-12);

        let fam = [obs(0.0, [1.0, 0.0, 0.0]), obs(0.0, [2.0, 0.0, 0.0])];
        let d = decompose(&fam, RANK_TOL);
        assert_eq!(d.rank, 1);
        assert_eq!(d.basis_indices, vec![0]);
        assert!((d.coefficients_for(1).unwrap()[0] - 2.0).abs() < 1e-12);

        let fam = [sigma_x(), sigma_y(), sigma_z(), obs(0.0, [1.0, 1.0, 1.0])];
        let d = decompose(&fam, RANK_TOL);
        assert_eq!(d.rank, 3);
        assert_eq!(d.basis_indices, vec![0, 1, 2]);
        let k = d.coefficients_for(3).unwrap();
        for v in k {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=6usize);
            let force_dependent = rng.gen_bool(0.4);
            let mut family: Vec<QubitObservable> = Vec::new();
            for i in 0..n {
                let v = if force_dependent && i >= 2 && rng.gen_bool(0.5) {
                    let j = rng.gen_range(0..i);
                    let k = rng.gen_range(0..i);
                    numeric::add3(
                        numeric::scale3(family[j].vec, rng.gen_range(-2.0..2.0)),
                        numeric::scale3(family[k].vec, rng.gen_range(-2.0..2.0)),
                    )
                } else {
                    [
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                    ]
                };
                family.push(obs(rng.gen_range(-1.0..1.0), v));
            }
            let d = decompose(&family, RANK_TOL);
            let max_len = family.iter().map(|o| o.vec_norm()).fold(0.0f64, f64::max);
            for (l, k) in &d.coefficients {
                let mut rec = [0.0; 3];
                for (j, &bi) in d.basis_indices.iter().enumerate() {
                    rec = numeric::add3(rec, numeric::scale3(family[bi].vec, k[j]));
                }
                let err = numeric::norm3(numeric::sub3(rec, family[*l].vec));
                assert!(err <= 1e-12 * max_len.max(1.0), "reconstruction err {err}");
            }
        }
    }

    #[test]
    fn angles_examples() {
        let t = angles(&[sigma_x(), sigma_y(), sigma_z()]).unwrap();
        let h = std::f64::consts::FRAC_PI_2;
        assert!((t.alpha - h).abs() < 1e-15);
        assert!((t.beta - h).abs() < 1e-15);
        assert!((t.gamma - h).abs() < 1e-15);

        let deg = std::f64::consts::PI / 180.0;
        let at = |d: f64| obs(0.0, [(d * deg).cos(), (d * deg).sin(), 0.0]);
        let t = angles(&[at(0.0), at(60.0), at(120.0)]).unwrap();
        assert!((t.gamma - 60.0 * deg).abs() < 1e-12);
        assert!((t.beta - 120.0 * deg).abs() < 1e-12);
        assert!((t.alpha - 60.0 * deg).abs() < 1e-12);

        let a = obs(0.0, [0.3, -0.2, 0.9]);
        let t = angles(&[a, a, a]).unwrap();
        // acos near 1 resolves zero angles only to sqrt(machine epsilon).
        assert!(t.alpha < 1e-7 && t.beta < 1e-7 && t.gamma < 1e-7);

        assert!(matches!(
            angles(&[a, a, obs(0.0, [0.0; 3])]),
            Err(Error::DegenerateObservable)
        ));
    }
}
