//! Closed-form probability densities of mean values and uncertainties of
//! observable families under the partial-trace random-state ensemble.
//!
//! Linearly dependent families confine the probability to an affine
//! submanifold; those delta factors are kept symbolically as
//! [`AffineRelation`] constraints next to a lower-dimensional continuous
//! density, never evaluated as spikes.

use crate::numeric::{self, Vec3};
use crate::observables::{decompose, gram, QubitObservable, RANK_TOL};
use crate::{Error, Result};

/// Whether the descriptor carries delta constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Continuous,
    Constrained,
}

/// Coordinates the delta factors act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintCoords {
    /// Plain affine relations between the point's coordinates.
    MeanValues,
    /// Relations between sign-resolved roots `eps_i * sqrt(len_i^2 - p_i^2)`;
    /// a point satisfies the relation if some sign assignment zeroes it.
    SignedRoots,
}

/// One delta factor: `sum_i coefficients[i] * (p_i - offsets[i]) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRelation {
    pub coefficients: Vec<f64>,
    pub offsets: Vec<f64>,
}

/// Continuous density component, defined over the basis coordinates.
#[derive(Debug, Clone)]
enum Form {
    /// Mean value of one observable: `6 (r - lo)(hi - r)/V^3` on `[lo, hi]`.
    Mean1 { lo: f64, hi: f64 },
    /// Uncertainty of one observable: `3 x^3 / (2 len^3 sqrt(len^2 - x^2))`.
    Unc1 { len: f64 },
    /// Joint mean density of an independent pair.
    MeanPair {
        offs: [f64; 2],
        tinv: [[f64; 2]; 2],
        /// Cholesky factor of the Gram matrix; whitens the support ellipse
        /// into the unit disk for the normalization quadrature.
        chol: [[f64; 2]; 2],
        norm_const: f64,
    },
    /// Joint uncertainty density of an independent pair.
    UncPair {
        lens: [f64; 2],
        tinv: [[f64; 2]; 2],
        norm_const: f64,
    },
    /// Joint mean density of an independent triple (piecewise constant).
    MeanTriple {
        offs: [f64; 3],
        tinv: [[f64; 3]; 3],
        chol: [[f64; 3]; 3],
        norm_const: f64,
    },
    /// Joint uncertainty density of an independent triple.
    UncTriple {
        lens: [f64; 3],
        tinv: [[f64; 3]; 3],
        norm_const: f64,
    },
}

/// An analytic probability density: a continuous component over a support
/// set, plus optional affine delta constraints for degenerate families.
#[derive(Debug, Clone)]
pub struct DensityDescriptor {
    kind: Kind,
    dim: usize,
    /// Indices of the coordinates the continuous component lives on.
    basis: Vec<usize>,
    form: Form,
    /// Per-coordinate vector lengths `|a_i|` (axis boxes, signed roots).
    lengths: Vec<f64>,
    constraints: Vec<AffineRelation>,
    constraint_coords: ConstraintCoords,
}

const BOUNDARY_EPS: f64 = 1e-12;

impl Form {
    fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Form::Mean1 { lo, hi } => {
                if p[0] < *lo || p[0] > *hi {
                    0.0
                } else {
                    let v = hi - lo;
                    6.0 * (p[0] - lo) * (hi - p[0]) / (v * v * v)
                }
            }
            Form::Unc1 { len } => {
                let x = p[0];
                if x < 0.0 || x >= *len {
                    return 0.0;
                }
                let root = (len * len - x * x).sqrt();
                1.5 * x * x * x / (len.powi(3) * root)
            }
            Form::MeanPair {
                offs,
                tinv,
                norm_const,
                ..
            } => {
                let d = [p[0] - offs[0], p[1] - offs[1]];
                let w2 = numeric::quadform2(tinv, d);
                if w2 <= 1.0 {
                    norm_const * (1.0 - w2).max(0.0).sqrt()
                } else {
                    0.0
                }
            }
            Form::UncPair {
                lens,
                tinv,
                norm_const,
            } => {
                let (x, y) = (p[0], p[1]);
                if x < 0.0 || y < 0.0 || x >= lens[0] || y >= lens[1] {
                    return 0.0;
                }
                let rx = (lens[0] * lens[0] - x * x).sqrt();
                let ry = (lens[1] * lens[1] - y * y).sqrt();
                let mut acc = 0.0;
                for sy in [1.0, -1.0] {
                    let w2 = numeric::quadform2(tinv, [rx, sy * ry]);
                    if w2 <= 1.0 {
                        acc += norm_const * (1.0 - w2).max(0.0).sqrt();
                    }
                }
                2.0 * x * y / (rx * ry) * acc
            }
            Form::MeanTriple {
                offs,
                tinv,
                norm_const,
                ..
            } => {
                let d = [p[0] - offs[0], p[1] - offs[1], p[2] - offs[2]];
                let w2 = numeric::quadform3(tinv, d);
                // sign(0) takes the middle branch: value halved on the shell.
                if (w2 - 1.0).abs() <= BOUNDARY_EPS {
                    0.5 * norm_const
                } else if w2 < 1.0 {
                    *norm_const
                } else {
                    0.0
                }
            }
            Form::UncTriple {
                lens,
                tinv,
                norm_const,
            } => {
                let mut roots = [0.0; 3];
                for i in 0..3 {
                    if p[i] < 0.0 || p[i] >= lens[i] {
                        return 0.0;
                    }
                    roots[i] = (lens[i] * lens[i] - p[i] * p[i]).sqrt();
                }
                let mut acc = 0.0;
                for sy in [1.0, -1.0] {
                    for sz in [1.0, -1.0] {
                        let w2 = numeric::quadform3(tinv, [roots[0], sy * roots[1], sz * roots[2]]);
                        if (w2 - 1.0).abs() <= BOUNDARY_EPS {
                            acc += 0.5 * norm_const;
                        } else if w2 < 1.0 {
                            acc += norm_const;
                        }
                    }
                }
                2.0 * p[0] * p[1] * p[2] / (roots[0] * roots[1] * roots[2]) * acc
            }
        }
    }

    fn supports(&self, p: &[f64]) -> bool {
        match self {
            Form::Mean1 { lo, hi } => p[0] >= *lo && p[0] <= *hi,
            Form::Unc1 { len } => p[0] >= 0.0 && p[0] <= *len,
            Form::MeanPair { offs, tinv, .. } => {
                let d = [p[0] - offs[0], p[1] - offs[1]];
                numeric::quadform2(tinv, d) <= 1.0 + BOUNDARY_EPS
            }
            Form::UncPair { lens, tinv, .. } => {
                if p.iter().zip(lens).any(|(&x, &l)| x < 0.0 || x > l) {
                    return false;
                }
                let rx = (lens[0] * lens[0] - p[0] * p[0]).max(0.0).sqrt();
                let ry = (lens[1] * lens[1] - p[1] * p[1]).max(0.0).sqrt();
                [1.0f64, -1.0]
                    .iter()
                    .any(|&s| numeric::quadform2(tinv, [rx, s * ry]) <= 1.0 + BOUNDARY_EPS)
            }
            Form::MeanTriple { offs, tinv, .. } => {
                let d = [p[0] - offs[0], p[1] - offs[1], p[2] - offs[2]];
                numeric::quadform3(tinv, d) <= 1.0 + BOUNDARY_EPS
            }
            Form::UncTriple { lens, tinv, .. } => {
                if p.iter().zip(lens).any(|(&x, &l)| x < 0.0 || x > l) {
                    return false;
                }
                let mut roots = [0.0; 3];
                for i in 0..3 {
                    roots[i] = (lens[i] * lens[i] - p[i] * p[i]).max(0.0).sqrt();
                }
                for sy in [1.0, -1.0] {
                    for sz in [1.0, -1.0] {
                        let u = [roots[0], sy * roots[1], sz * roots[2]];
                        if numeric::quadform3(tinv, u) <= 1.0 + BOUNDARY_EPS {
                            return true;
                        }
                    }
                }
                false
            }
        }
    }
}

impl DensityDescriptor {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate indices the continuous component is defined on.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// Per-coordinate vector lengths `|a_i|`.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn constraints(&self) -> &[AffineRelation] {
        &self.constraints
    }

    pub fn constraint_coords(&self) -> ConstraintCoords {
        self.constraint_coords
    }

    /// Continuous density value at `point` (evaluated on the basis
    /// coordinates for constrained descriptors). Never negative or NaN.
    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.dim, "point dimension");
        let p: Vec<f64> = self.basis.iter().map(|&i| point[i]).collect();
        self.form.eval(&p)
    }

    /// Closed support predicate, constraints included.
    pub fn supports(&self, point: &[f64]) -> bool {
        assert_eq!(point.len(), self.dim, "point dimension");
        let p: Vec<f64> = self.basis.iter().map(|&i| point[i]).collect();
        if !self.form.supports(&p) {
            return false;
        }
        let scale = self.lengths.iter().cloned().fold(1.0f64, f64::max);
        let tol = match self.constraint_coords {
            ConstraintCoords::MeanValues => 1e-9 * scale,
            // Roots near the axis-box edge carry rounding amplified to the
            // square root of machine epsilon.
            ConstraintCoords::SignedRoots => {
                let coeff_sum = self
                    .constraints
                    .iter()
                    .map(|r| r.coefficients.iter().map(|c| c.abs()).sum::<f64>())
                    .fold(1.0f64, f64::max);
                1e-7 * scale * coeff_sum
            }
        };
        self.constraint_residual(point) <= tol
    }

    /// Largest absolute residual of the delta constraints at `point`;
    /// 0 for continuous descriptors.
    pub fn constraint_residual(&self, point: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for rel in &self.constraints {
            let res = match self.constraint_coords {
                ConstraintCoords::MeanValues => rel
                    .coefficients
                    .iter()
                    .zip(point)
                    .zip(&rel.offsets)
                    .map(|((c, p), o)| c * (p - o))
                    .sum::<f64>()
                    .abs(),
                ConstraintCoords::SignedRoots => {
                    let active: Vec<(f64, f64)> = rel
                        .coefficients
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| **c != 0.0)
                        .map(|(i, &c)| {
                            let u = (self.lengths[i] * self.lengths[i] - point[i] * point[i])
                                .max(0.0)
                                .sqrt();
                            (c, u)
                        })
                        .collect();
                    let mut best = f64::INFINITY;
                    // Global sign flips are irrelevant; fix the first sign.
                    let free = active.len().saturating_sub(1);
                    for mask in 0..(1usize << free) {
                        let mut s = 0.0;
                        for (k, (c, u)) in active.iter().enumerate() {
                            let sign = if k == 0 {
                                1.0
                            } else if mask >> (k - 1) & 1 == 1 {
                                -1.0
                            } else {
                                1.0
                            };
                            s += c * sign * u;
                        }
                        best = best.min(s.abs());
                    }
                    if best.is_finite() {
                        best
                    } else {
                        0.0
                    }
                }
            };
            worst = worst.max(res);
        }
        worst
    }

    /// Numerical integral of the continuous component over its support (the
    /// basis density for constrained descriptors). Converges to 1.
    pub fn normalization(&self) -> f64 {
        match &self.form {
            Form::Mean1 { lo, hi } => {
                numeric::gl_integrate(&mut |r| self.form.eval(&[r]), *lo, *hi, 32)
            }
            Form::Unc1 { len } => {
                // x = len sin(phi) removes the inverse-root endpoint.
                let l = *len;
                numeric::gl_integrate(
                    &mut |phi| self.form.eval(&[l * phi.sin()]) * l * phi.cos(),
                    0.0,
                    std::f64::consts::FRAC_PI_2,
                    64,
                )
            }
            Form::MeanPair { offs, chol, .. } => {
                // Whitened polar coordinates: (r, s) = offs + chol * (rho n)
                // turn the support into the unit disk, and rho = sin(tau)
                // absorbs the square-root vanishing at the rim.
                let jac = chol[0][0] * chol[1][1];
                let mut total = 0.0;
                let panels = 8;
                for ip in 0..panels {
                    let t0 = 2.0 * std::f64::consts::PI * ip as f64 / panels as f64;
                    let t1 = 2.0 * std::f64::consts::PI * (ip + 1) as f64 / panels as f64;
                    total += numeric::gl_integrate(
                        &mut |th: f64| {
                            let n = [th.cos(), th.sin()];
                            numeric::gl_integrate(
                                &mut |tau: f64| {
                                    let rho = tau.sin();
                                    let u = [rho * n[0], rho * n[1]];
                                    let p = [
                                        offs[0] + chol[0][0] * u[0],
                                        offs[1] + chol[1][0] * u[0] + chol[1][1] * u[1],
                                    ];
                                    self.form.eval(&p) * rho * tau.cos()
                                },
                                0.0,
                                std::f64::consts::FRAC_PI_2,
                                16,
                            )
                        },
                        t0,
                        t1,
                        8,
                    ) * jac;
                }
                total
            }
            Form::MeanTriple { offs, chol, .. } => {
                // Whitened spherical coordinates: the support becomes the
                // unit ball, so the ray hits the jump at rho = 1 exactly and
                // the radial rule sees a plain quadratic.
                let jac = chol[0][0] * chol[1][1] * chol[2][2];
                let mut total = 0.0;
                let panels = 6;
                for iz in 0..panels {
                    let z0 = -1.0 + 2.0 * iz as f64 / panels as f64;
                    let z1 = -1.0 + 2.0 * (iz + 1) as f64 / panels as f64;
                    total += numeric::gl_integrate(
                        &mut |z: f64| {
                            let s = (1.0 - z * z).max(0.0).sqrt();
                            let mut inner = 0.0;
                            for ip in 0..panels {
                                let p0 = 2.0 * std::f64::consts::PI * ip as f64 / panels as f64;
                                let p1 =
                                    2.0 * std::f64::consts::PI * (ip + 1) as f64 / panels as f64;
                                inner += numeric::gl_integrate(
                                    &mut |ph: f64| {
                                        let n = [s * ph.cos(), s * ph.sin(), z];
                                        numeric::gl_integrate(
                                            &mut |rho| {
                                                let u = [rho * n[0], rho * n[1], rho * n[2]];
                                                let p = [
                                                    offs[0] + chol[0][0] * u[0],
                                                    offs[1] + chol[1][0] * u[0] + chol[1][1] * u[1],
                                                    offs[2]
                                                        + chol[2][0] * u[0]
                                                        + chol[2][1] * u[1]
                                                        + chol[2][2] * u[2],
                                                ];
                                                self.form.eval(&p) * rho * rho
                                            },
                                            0.0,
                                            1.0,
                                            8,
                                        )
                                    },
                                    p0,
                                    p1,
                                    6,
                                );
                            }
                            inner
                        },
                        z0,
                        z1,
                        6,
                    ) * jac;
                }
                total
            }
            Form::UncPair { lens, tinv, .. } => {
                // Substitute x_i = len_i sqrt(1 - u_i^2) and integrate the
                // u-square in polar coordinates, splitting each ray at the
                // analytic support breakpoints.
                let lens = *lens;
                let tinv = *tinv;
                let eval_u = |u: [f64; 2]| -> f64 {
                    let mut p = [0.0; 2];
                    let mut jac = 1.0;
                    for i in 0..2 {
                        let c = (1.0 - u[i] * u[i]).max(0.0);
                        p[i] = lens[i] * c.sqrt();
                        jac *= lens[i] * u[i] / c.sqrt();
                    }
                    self.form.eval(&p) * jac
                };
                let mut total = 0.0;
                let panels = 64;
                for ip in 0..panels {
                    let a0 = std::f64::consts::FRAC_PI_2 * ip as f64 / panels as f64;
                    let a1 = std::f64::consts::FRAC_PI_2 * (ip + 1) as f64 / panels as f64;
                    total += numeric::gl_integrate(
                        &mut |psi: f64| {
                            let n = [psi.cos(), psi.sin()];
                            let rho_max = (1.0 / n[0].max(1e-300)).min(1.0 / n[1].max(1e-300));
                            let mut brs = Vec::new();
                            for s in [1.0, -1.0] {
                                let w = [lens[0] * n[0], s * lens[1] * n[1]];
                                let q = numeric::quadform2(&tinv, w);
                                if q > 0.0 {
                                    let r = 1.0 / q.sqrt();
                                    if r > 0.0 && r < rho_max {
                                        brs.push(r);
                                    }
                                }
                            }
                            radial_segments(&brs, rho_max, &mut |rho| {
                                eval_u([rho * n[0], rho * n[1]]) * rho
                            })
                        },
                        a0,
                        a1,
                        8,
                    );
                }
                total
            }
            Form::UncTriple { lens, tinv, .. } => {
                let lens = *lens;
                let tinv = *tinv;
                let eval_u = |u: Vec3| -> f64 {
                    let mut p = [0.0; 3];
                    let mut jac = 1.0;
                    for i in 0..3 {
                        let c = (1.0 - u[i] * u[i]).max(0.0);
                        p[i] = lens[i] * c.sqrt();
                        jac *= lens[i] * u[i] / c.sqrt();
                    }
                    self.form.eval(&p) * jac
                };
                let mut total = 0.0;
                let panels = 24;
                for it in 0..panels {
                    let t0 = std::f64::consts::FRAC_PI_2 * it as f64 / panels as f64;
                    let t1 = std::f64::consts::FRAC_PI_2 * (it + 1) as f64 / panels as f64;
                    total += numeric::gl_integrate(
                        &mut |th: f64| {
                            let (st, ct) = (th.sin(), th.cos());
                            let mut inner = 0.0;
                            for ip in 0..panels {
                                let p0 = std::f64::consts::FRAC_PI_2 * ip as f64 / panels as f64;
                                let p1 =
                                    std::f64::consts::FRAC_PI_2 * (ip + 1) as f64 / panels as f64;
                                inner += numeric::gl_integrate(
                                    &mut |ph: f64| {
                                        let n = [st * ph.cos(), st * ph.sin(), ct];
                                        let rho_max = n
                                            .iter()
                                            .map(|&c| 1.0 / c.max(1e-300))
                                            .fold(f64::INFINITY, f64::min);
                                        let mut brs = Vec::new();
                                        for sy in [1.0, -1.0] {
                                            for sz in [1.0, -1.0] {
                                                let w = [
                                                    lens[0] * n[0],
                                                    sy * lens[1] * n[1],
                                                    sz * lens[2] * n[2],
                                                ];
                                                let q = numeric::quadform3(&tinv, w);
                                                if q > 0.0 {
                                                    let r = 1.0 / q.sqrt();
                                                    if r > 0.0 && r < rho_max {
                                                        brs.push(r);
                                                    }
                                                }
                                            }
                                        }
                                        radial_segments(&brs, rho_max, &mut |rho| {
                                            eval_u([rho * n[0], rho * n[1], rho * n[2]]) * rho * rho
                                        }) * st
                                    },
                                    p0,
                                    p1,
                                    4,
                                );
                            }
                            inner
                        },
                        t0,
                        t1,
                        4,
                    );
                }
                total
            }
        }
    }
}

/// Integrate `f` over `[0, rho_max]` split at `breaks`; segments ending at a
/// breakpoint get the `rho = R - (R-L) s^2` substitution that turns the
/// square-root kink there into an analytic integrand.
fn radial_segments(breaks: &[f64], rho_max: f64, f: &mut dyn FnMut(f64) -> f64) -> f64 {
    let mut pts: Vec<f64> = vec![0.0];
    let mut sorted = breaks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for b in sorted {
        if b > 1e-14 && b < rho_max - 1e-14 && (b - pts.last().unwrap()).abs() > 1e-14 {
            pts.push(b);
        }
    }
    pts.push(rho_max);
    let mut total = 0.0;
    for k in 0..pts.len() - 1 {
        let (lo, hi) = (pts[k], pts[k + 1]);
        let ends_at_break = breaks.iter().any(|&b| (b - hi).abs() <= 1e-14);
        if ends_at_break {
            total += numeric::gl_integrate(
                &mut |s| f(hi - (hi - lo) * s * s) * 2.0 * (hi - lo) * s,
                0.0,
                1.0,
                16,
            );
        } else {
            total += numeric::gl_integrate(f, lo, hi, 16);
        }
    }
    total
}

fn require_nondegenerate(family: &[QubitObservable]) -> Result<()> {
    if family.iter().any(|o| o.is_degenerate()) {
        Err(Error::DegenerateObservable)
    } else {
        Ok(())
    }
}

fn mean1_form(obs: &QubitObservable) -> Form {
    let (lo, hi) = obs.eigenvalues();
    Form::Mean1 { lo, hi }
}

fn mean_pair_form(a: &QubitObservable, b: &QubitObservable) -> Result<Form> {
    let g = gram(&[*a, *b])?;
    let t = g.as_2x2();
    let det = numeric::mat2_det(&t);
    let tinv = numeric::mat2_inv(&t).ok_or(Error::LinearlyDependentFamily { rank: 1, need: 2 })?;
    let chol = numeric::cholesky2(&t).ok_or(Error::LinearlyDependentFamily { rank: 1, need: 2 })?;
    Ok(Form::MeanPair {
        offs: [a.offset, b.offset],
        tinv,
        chol,
        norm_const: 3.0 / (2.0 * std::f64::consts::PI * det.sqrt()),
    })
}

fn mean_triple_form(fam: &[QubitObservable; 3]) -> Result<Form> {
    let g = gram(fam)?;
    let t = g.as_3x3();
    let det = numeric::mat3_det(&t);
    let tinv = numeric::mat3_inv(&t).ok_or(Error::LinearlyDependentFamily { rank: 2, need: 3 })?;
    let chol = numeric::cholesky3(&t).ok_or(Error::LinearlyDependentFamily { rank: 2, need: 3 })?;
    Ok(Form::MeanTriple {
        offs: [fam[0].offset, fam[1].offset, fam[2].offset],
        tinv,
        chol,
        norm_const: 3.0 / (4.0 * std::f64::consts::PI * det.sqrt()),
    })
}

fn continuous(dim: usize, basis: Vec<usize>, form: Form, lengths: Vec<f64>) -> DensityDescriptor {
    DensityDescriptor {
        kind: Kind::Continuous,
        dim,
        basis,
        form,
        lengths,
        constraints: Vec::new(),
        constraint_coords: ConstraintCoords::MeanValues,
    }
}

/// Density of the mean value `<A>`: `6 (r - l1)(l2 - r)/V^3` on the spectral
/// interval.
pub fn pdf_mean(obs: &QubitObservable) -> Result<DensityDescriptor> {
    require_nondegenerate(std::slice::from_ref(obs))?;
    Ok(continuous(
        1,
        vec![0],
        mean1_form(obs),
        vec![obs.vec_norm()],
    ))
}

/// Density of the uncertainty (standard deviation) of one observable:
/// `3 x^3 / (2 |a|^3 sqrt(|a|^2 - x^2))` on `[0, |a|)`.
pub fn pdf_uncertainty(obs: &QubitObservable) -> Result<DensityDescriptor> {
    require_nondegenerate(std::slice::from_ref(obs))?;
    Ok(continuous(
        1,
        vec![0],
        Form::Unc1 {
            len: obs.vec_norm(),
        },
        vec![obs.vec_norm()],
    ))
}

/// Joint density of `(<A>, <B>)`. Independent pairs get the continuous
/// ellipse density; dependent pairs reduce to the single-observable density
/// plus one affine delta.
pub fn pdf_mean_pair(a: &QubitObservable, b: &QubitObservable) -> Result<DensityDescriptor> {
    pdf_mean_n(&[*a, *b])
}

/// Joint density of `(dA, dB)` for a linearly independent pair.
pub fn pdf_uncertainty_pair(a: &QubitObservable, b: &QubitObservable) -> Result<DensityDescriptor> {
    let fam = [*a, *b];
    require_nondegenerate(&fam)?;
    let d = decompose(&fam, RANK_TOL);
    if d.rank < 2 {
        return Err(Error::LinearlyDependentFamily {
            rank: d.rank,
            need: 2,
        });
    }
    let g = gram(&fam)?;
    let tinv = numeric::mat2_inv(&g.as_2x2()).unwrap();
    Ok(continuous(
        2,
        vec![0, 1],
        Form::UncPair {
            lens: [a.vec_norm(), b.vec_norm()],
            tinv,
            norm_const: 3.0 / (2.0 * std::f64::consts::PI * g.det().sqrt()),
        },
        vec![a.vec_norm(), b.vec_norm()],
    ))
}

/// Joint density of `(<A>, <B>, <C>)` with rank-dependent delta structure.
pub fn pdf_mean_triple(
    a: &QubitObservable,
    b: &QubitObservable,
    c: &QubitObservable,
) -> Result<DensityDescriptor> {
    pdf_mean_n(&[*a, *b, *c])
}

/// Joint density of `(dA, dB, dC)` for a linearly independent triple.
pub fn pdf_uncertainty_triple(
    a: &QubitObservable,
    b: &QubitObservable,
    c: &QubitObservable,
) -> Result<DensityDescriptor> {
    let fam = [*a, *b, *c];
    require_nondegenerate(&fam)?;
    let d = decompose(&fam, RANK_TOL);
    if d.rank < 3 {
        return Err(Error::LinearlyDependentFamily {
            rank: d.rank,
            need: 3,
        });
    }
    let g = gram(&fam)?;
    let tinv = numeric::mat3_inv(&g.as_3x3()).unwrap();
    Ok(continuous(
        3,
        vec![0, 1, 2],
        Form::UncTriple {
            lens: [a.vec_norm(), b.vec_norm(), c.vec_norm()],
            tinv,
            norm_const: 3.0 / (4.0 * std::f64::consts::PI * g.det().sqrt()),
        },
        vec![a.vec_norm(), b.vec_norm(), c.vec_norm()],
    ))
}

fn basis_form(family: &[QubitObservable], basis: &[usize], uncertainty: bool) -> Result<Form> {
    let sub: Vec<QubitObservable> = basis.iter().map(|&i| family[i]).collect();
    match (basis.len(), uncertainty) {
        (1, false) => Ok(mean1_form(&sub[0])),
        (1, true) => Ok(Form::Unc1 {
            len: sub[0].vec_norm(),
        }),
        (2, false) => mean_pair_form(&sub[0], &sub[1]),
        (2, true) => {
            let g = gram(&sub)?;
            Ok(Form::UncPair {
                lens: [sub[0].vec_norm(), sub[1].vec_norm()],
                tinv: numeric::mat2_inv(&g.as_2x2())
                    .ok_or(Error::LinearlyDependentFamily { rank: 1, need: 2 })?,
                norm_const: 3.0 / (2.0 * std::f64::consts::PI * g.det().sqrt()),
            })
        }
        (3, false) => mean_triple_form(&[sub[0], sub[1], sub[2]]),
        (3, true) => {
            let g = gram(&sub)?;
            Ok(Form::UncTriple {
                lens: [sub[0].vec_norm(), sub[1].vec_norm(), sub[2].vec_norm()],
                tinv: numeric::mat3_inv(&g.as_3x3())
                    .ok_or(Error::LinearlyDependentFamily { rank: 2, need: 3 })?,
                norm_const: 3.0 / (4.0 * std::f64::consts::PI * g.det().sqrt()),
            })
        }
        _ => unreachable!("rank bounded by 3"),
    }
}

fn constrained_descriptor(
    family: &[QubitObservable],
    uncertainty: bool,
) -> Result<DensityDescriptor> {
    require_nondegenerate(family)?;
    if family.is_empty() {
        return Err(Error::DomainError("empty family".into()));
    }
    let n = family.len();
    let d = decompose(family, RANK_TOL);
    let form = basis_form(family, &d.basis_indices, uncertainty)?;
    let mut constraints = Vec::new();
    for (l, kappa) in &d.coefficients {
        let mut coefficients = vec![0.0; n];
        coefficients[*l] = 1.0;
        for (j, &bi) in d.basis_indices.iter().enumerate() {
            coefficients[bi] = -kappa[j];
        }
        constraints.push(AffineRelation {
            coefficients,
            offsets: family.iter().map(|o| o.offset).collect(),
        });
    }
    Ok(DensityDescriptor {
        kind: if constraints.is_empty() {
            Kind::Continuous
        } else {
            Kind::Constrained
        },
        dim: n,
        basis: d.basis_indices,
        form,
        lengths: family.iter().map(|o| o.vec_norm()).collect(),
        constraints,
        constraint_coords: if uncertainty {
            ConstraintCoords::SignedRoots
        } else {
            ConstraintCoords::MeanValues
        },
    })
}

/// Joint mean-value density of an n-tuple: the basis density of rank r plus
/// `n - r` affine delta constraints.
pub fn pdf_mean_n(family: &[QubitObservable]) -> Result<DensityDescriptor> {
    constrained_descriptor(family, false)
}

/// Joint uncertainty density of an n-tuple: the basis uncertainty density
/// plus the decomposition's constraints in sign-resolved square-root form.
pub fn pdf_uncertainty_n(family: &[QubitObservable]) -> Result<DensityDescriptor> {
    constrained_descriptor(family, true)
}

/// Numerically evaluates `int_0^inf (sin q - q cos q)/q^2 J0(lambda q) dq`
/// by exponentially damped quadrature with Richardson extrapolation in the
/// damping parameter. Equals `sqrt(1 - lambda^2)` for `lambda < 1` and 0 for
/// `lambda >= 1` to about 1e-3.
pub fn bessel_identity_check(lambda: f64) -> f64 {
    let damped = |eps: f64| -> f64 {
        let q_max = 40.0 / eps;
        let panel = std::f64::consts::FRAC_PI_4;
        let n_panels = (q_max / panel).ceil() as usize;
        let mut total = 0.0;
        for i in 0..n_panels {
            total += numeric::gl_integrate(
                &mut |q: f64| {
                    let kernel = if q < 1e-3 {
                        q / 3.0 - q * q * q / 30.0
                    } else {
                        (q.sin() - q * q.cos()) / (q * q)
                    };
                    (-eps * q).exp() * kernel * numeric::bessel_j0(lambda * q)
                },
                i as f64 * panel,
                (i + 1) as f64 * panel,
                8,
            );
        }
        total
    };
    let i0 = damped(0.05);
    let i1 = damped(0.025);
    let i2 = damped(0.0125);
    let r1 = 2.0 * i1 - i0;
    let r2 = 2.0 * i2 - i1;
    (4.0 * r2 - r1) / 3.0
}
