//! Restarted GMRES and preconditioned conjugate gradients.

use crate::error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of an iterative linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovSolution {
    pub x: Vec<f64>,
    /// Operator applications spent.
    pub iterations: usize,
    /// Final residual norm in the norm the solver monitors.
    pub residual: f64,
}

/// GMRES(m) for `A x = b`, stopping once `‖b − A x‖₂ ≤ tol`.
///
/// `apply(v, out)` writes `A v` into `out`. `max_iter` bounds the total number
/// of operator applications across restarts.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<KrylovSolution> {
    let n = b.len();
    let restart = restart.clamp(1, n.max(1));
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut work = vec![0.0; n];
    let mut iterations = 0;

    loop {
        // True residual at the start of every cycle.
        let mut r = b.to_vec();
        if x.iter().any(|&v| v != 0.0) {
            apply(&x, &mut work);
            iterations += 1;
            for (ri, wi) in r.iter_mut().zip(&work) {
                *ri -= wi;
            }
        }
        let beta = norm2(&r);
        if beta <= tol {
            return Ok(KrylovSolution {
                x,
                iterations,
                residual: beta,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                solver: "GMRES",
                iterations,
                residual: beta,
                target: tol,
            });
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut estimate = beta;
        let mut steps = 0;

        while steps < restart && iterations < max_iter {
            let j = steps;
            let mut w = vec![0.0; n];
            apply(&basis[j], &mut w);
            iterations += 1;

            let mut col = vec![0.0; j + 2];
            // Modified Gram-Schmidt with one reorthogonalization pass.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(&w, v);
                    col[i] += hij;
                    for (wk, vk) in w.iter_mut().zip(v) {
                        *wk -= hij * vk;
                    }
                }
            }
            let wnorm = norm2(&w);
            col[j + 1] = wnorm;

            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / denom, col[j + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            col[j] = denom;
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            estimate = g[j + 1].abs();
            hess.push(col);
            steps += 1;

            if estimate <= tol || wnorm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wnorm).collect());
        }

        // Back substitution on the triangularized Hessenberg matrix.
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for (k, yk) in y.iter().enumerate().skip(i + 1) {
                acc -= hess[k][i] * yk;
            }
            y[i] = acc / hess[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&basis[i]) {
                *xk += yi * vk;
            }
        }

        if estimate <= tol {
            // Confirm with the true residual.
            apply(&x, &mut work);
            iterations += 1;
            let resid = norm2(
                &b.iter()
                    .zip(&work)
                    .map(|(bi, wi)| bi - wi)
                    .collect::<Vec<_>>(),
            );
            if resid <= tol {
                return Ok(KrylovSolution {
                    x,
                    iterations,
                    residual: resid,
                });
            }
        }
    }
}

/// Conjugate gradients for a symmetric positive definite `A x = b`, with an
/// SPD preconditioner `M⁻¹`. Stops when the preconditioned residual norm
/// `sqrt(rᵀ M⁻¹ r)` drops below `rtol` times its initial value.
///
/// Each new residual is re-orthogonalized against all previous ones in the
/// `M⁻¹` inner product. Without this, operators whose spectrum is a few
/// clusters spread over many decades (small-`α` normal equations) lose
/// orthogonality and stagnate well above `rtol`.
pub fn preconditioned_cg(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precondition: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> Result<KrylovSolution> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = precondition(&r);
    let mut rz = dot(&r, &z);
    let initial = rz.max(0.0).sqrt();
    if initial == 0.0 {
        return Ok(KrylovSolution {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = rtol * initial;
    let mut p = z.clone();
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = vec![(r.clone(), z.clone(), rz)];
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotConverged {
                solver: "CG (operator not positive definite)",
                iterations: it,
                residual: rz.max(0.0).sqrt(),
                target,
            });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for (rj, zj, rzj) in &history {
            let c = dot(&r, zj) / rzj;
            for i in 0..n {
                r[i] -= c * rj[i];
            }
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let resid = rz_new.max(0.0).sqrt();
        if resid <= target {
            return Ok(KrylovSolution {
                x,
                iterations: it,
                residual: resid / initial,
            });
        }
        let beta = rz_new / rz;
        rz = rz_new;
        history.push((r.clone(), z.clone(), rz));
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        solver: "CG",
        iterations: max_iter,
        residual: rz.max(0.0).sqrt() / initial,
        target: rtol,
    })
}
