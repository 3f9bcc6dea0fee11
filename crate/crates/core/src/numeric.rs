//! Small dense linear algebra and numerical helpers shared across the crate.
//!
//! Everything here works on fixed-size 2x2/3x3 symmetric matrices and
//! `[f64; 3]` vectors, so no external solver is pulled in. Eigenvalues use
//! closed forms (quadratic / Cardano with the trigonometric method) and are
//! polished by one Rayleigh-quotient step.

pub type Vec3 = [f64; 3];

pub fn dot3(u: Vec3, v: Vec3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub fn cross3(u: Vec3, v: Vec3) -> Vec3 {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub fn norm3(v: Vec3) -> f64 {
    dot3(v, v).sqrt()
}

pub fn scale3(v: Vec3, s: f64) -> Vec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn sub3(u: Vec3, v: Vec3) -> Vec3 {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

pub fn add3(u: Vec3, v: Vec3) -> Vec3 {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

pub fn normalize3(v: Vec3) -> Vec3 {
    let n = norm3(v);
    if n == 0.0 {
        v
    } else {
        scale3(v, 1.0 / n)
    }
}

pub fn mat3_vec(m: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

pub fn mat3_det(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse of a 3x3 matrix via the adjugate. Returns `None` if the
/// determinant is exactly zero.
pub fn mat3_inv(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = mat3_det(m);
    if det == 0.0 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut adj = [[0.0; 3]; 3];
    adj[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    adj[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
    adj[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    adj[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    adj[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
    adj[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
    adj[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    adj[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
    adj[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = adj[i][j] * inv_det;
        }
    }
    Some(out)
}

pub fn mat2_det(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mat2_inv(m: &[[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = mat2_det(m);
    if det == 0.0 {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

pub fn quadform2(m: &[[f64; 2]; 2], v: [f64; 2]) -> f64 {
    v[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + v[1] * (m[1][0] * v[0] + m[1][1] * v[1])
}

pub fn quadform3(m: &[[f64; 3]; 3], v: Vec3) -> f64 {
    dot3(v, mat3_vec(m, v))
}

/// Lower-triangular Cholesky factor of a symmetric positive definite 2x2
/// matrix.
pub fn cholesky2(m: &[[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    if m[0][0] <= 0.0 {
        return None;
    }
    let l00 = m[0][0].sqrt();
    let l10 = m[1][0] / l00;
    let d = m[1][1] - l10 * l10;
    if d <= 0.0 {
        return None;
    }
    Some([[l00, 0.0], [l10, d.sqrt()]])
}

pub fn cholesky3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns paired with
/// the values) of a symmetric 2x2 matrix.
pub fn eig_sym2(m: &[[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let tr = m[0][0] + m[1][1];
    let diff = m[0][0] - m[1][1];
    let disc = (diff * diff + 4.0 * m[0][1] * m[0][1]).sqrt();
    let lo = 0.5 * (tr - disc);
    let hi = 0.5 * (tr + disc);
    let vec_for = |lam: f64| -> [f64; 2] {
        let c1 = [m[0][1], lam - m[0][0]];
        let c2 = [lam - m[1][1], m[1][0]];
        let v = if c1[0] * c1[0] + c1[1] * c1[1] >= c2[0] * c2[0] + c2[1] * c2[1] {
            c1
        } else {
            c2
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if n == 0.0 {
            [1.0, 0.0]
        } else {
            [v[0] / n, v[1] / n]
        }
    };
    let vlo = vec_for(lo);
    let vhi = if (hi - lo).abs() < 1e-14 * tr.abs().max(1.0) {
        [-vlo[1], vlo[0]]
    } else {
        vec_for(hi)
    };
    ([lo, hi], [[vlo[0], vhi[0]], [vlo[1], vhi[1]]])
}

fn column3(m: &[[f64; 3]; 3], j: usize) -> Vec3 {
    [m[0][j], m[1][j], m[2][j]]
}

fn largest_of3(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let (na, nb, nc) = (dot3(a, a), dot3(b, b), dot3(c, c));
    if na >= nb && na >= nc {
        a
    } else if nb >= nc {
        b
    } else {
        c
    }
}

/// Eigenvalues (ascending) of a symmetric 3x3 matrix by the trigonometric
/// form of Cardano's method.
fn eig_sym3_values(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return d;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let r = mat3_det(&b) / 2.0;
    let phi = if r <= -1.0 {
        std::f64::consts::PI / 3.0
    } else if r >= 1.0 {
        0.0
    } else {
        r.acos() / 3.0
    };
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

fn eigvec_sym3(m: &[[f64; 3]; 3], lam: f64, scale: f64) -> Vec3 {
    // Columns of (M - lam I) span the orthogonal complement of the
    // eigenspace; cross products of two of them give an eigenvector.
    let mut a = *m;
    for i in 0..3 {
        a[i][i] -= lam;
    }
    let (u, v, w) = (column3(&a, 0), column3(&a, 1), column3(&a, 2));
    let q = largest_of3(cross3(u, v), cross3(v, w), cross3(w, u));
    let tol = 1e-22 * scale * scale * scale * scale;
    if dot3(q, q) > tol {
        return normalize3(q);
    }
    // Degenerate pair: the complement is one-dimensional, spanned by the
    // largest column; any unit vector orthogonal to it works.
    let p = largest_of3(u, v, w);
    if dot3(p, p) <= tol {
        return [1.0, 0.0, 0.0];
    }
    let mut x = cross3(p, [1.0, 0.0, 0.0]);
    if dot3(x, x) < 1e-12 * dot3(p, p) {
        x = cross3(p, [0.0, 1.0, 0.0]);
    }
    normalize3(x)
}

/// Eigenvalues (ascending) and matching unit eigenvectors of a symmetric 3x3
/// matrix. Each eigenvalue gets one Rayleigh-quotient polish step.
pub fn eig_sym3(m: &[[f64; 3]; 3]) -> ([f64; 3], [Vec3; 3]) {
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    let raw = eig_sym3_values(m);
    let mut vals = [0.0; 3];
    let mut vecs = [[0.0; 3]; 3];
    for k in 0..3 {
        let v = eigvec_sym3(m, raw[k], scale);
        vals[k] = dot3(v, mat3_vec(m, v));
        vecs[k] = v;
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Re-pair vectors after the sort (polish can reorder near-degenerate values).
    let mut paired = [[0.0; 3]; 3];
    let mut used = [false; 3];
    for k in 0..3 {
        let mut best = usize::MAX;
        let mut best_err = f64::INFINITY;
        for j in 0..3 {
            if used[j] {
                continue;
            }
            let err = (dot3(vecs[j], mat3_vec(m, vecs[j])) - vals[k]).abs();
            if err < best_err {
                best_err = err;
                best = j;
            }
        }
        used[best] = true;
        paired[k] = vecs[best];
    }
    (vals, paired)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration from Chebyshev initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Integrate `f` over [a, b] with an `n`-point Gauss-Legendre rule.
pub fn gl_integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    xs.iter()
        .zip(&ws)
        .map(|(&x, &w)| w * half * f(mid + half * x))
        .sum()
}

/// Golden-section search for the maximum of a unimodal `f` on [a, b].
///
/// Returns `(x_max, f_max)` once the bracket shrinks below `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Derivative-free Nelder-Mead minimization.
///
/// `step` sets the initial simplex size around `x0`. Stops after `max_iter`
/// iterations or when the simplex value spread drops below `ftol`.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if simplex[n].1 - simplex[0].1 < ftol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for i in 0..n {
                centroid[i] += p.0[i] / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let combine = |alpha: f64| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i]))
                .collect()
        };
        let refl = combine(1.0);
        let f_refl = f(&refl);
        if f_refl < simplex[0].1 {
            let exp = combine(2.0);
            let f_exp = f(&exp);
            simplex[n] = if f_exp < f_refl {
                (exp, f_exp)
            } else {
                (refl, f_refl)
            };
        } else if f_refl < simplex[n - 1].1 {
            simplex[n] = (refl, f_refl);
        } else {
            let contr = combine(-0.5);
            let f_contr = f(&contr);
            if f_contr < simplex[n].1 {
                simplex[n] = (contr, f_contr);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        p.0[i] = best[i] + 0.5 * (p.0[i] - best[i]);
                    }
                    p.1 = f(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0)
}

/// Bessel function J0 via the Abramowitz-Stegun rational approximations
/// (absolute error below 2e-8 on the real line).
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.0 {
        let t = (ax / 3.0) * (ax / 3.0);
        1.0 + t
            * (-2.249_999_7
                + t * (1.265_620_8
                    + t * (-0.316_386_6
                        + t * (0.044_447_9 + t * (-0.003_944_4 + t * 0.000_210_0)))))
    } else {
        let t = 3.0 / ax;
        let f0 = 0.797_884_56
            + t * (-0.000_000_77
                + t * (-0.005_527_40
                    + t * (-0.000_095_12
                        + t * (0.001_372_37 + t * (-0.000_728_05 + t * 0.000_144_76)))));
        let th = ax - 0.785_398_164
            + t * (-0.041_663_97
                + t * (-0.000_039_54
                    + t * (0.002_625_73
                        + t * (-0.000_541_25 + t * (-0.000_293_33 + t * 0.000_135_58)))));
        f0 * th.cos() / ax.sqrt()
    }
}
