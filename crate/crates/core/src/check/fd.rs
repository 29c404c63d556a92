//! Finite differences, Jacobians by basis probing, and the transpose identity.

use serde::Serialize;

use super::{dot, rel_err, CheckError, Compiled, Result};

/// `(f(x + hv) − f(x − hv)) / 2h` for an arbitrary vector function.
pub fn central_difference_fn<F>(f: F, x: &[f64], v: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if x.len() != v.len() {
        return Err(CheckError::ShapeMismatch { expected: x.len(), found: v.len() });
    }
    let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let (fp, fm) = (f(&plus)?, f(&minus)?);
    Ok(fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * h)).collect())
}

/// Central difference of a compiled program's source semantics.
pub fn central_difference(program: &Compiled, x: &[f64], v: &[f64], h: f64) -> Result<Vec<f64>> {
    central_difference_fn(|p| program.eval(p), x, v, h)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct JacobianReport {
    pub point: Vec<f64>,
    /// Row-major `m × n` matrices.
    pub jac_fwd: Vec<Vec<f64>>,
    pub jac_rev: Vec<Vec<f64>>,
    #[serde(rename = "jacFD")]
    pub jac_fd: Vec<Vec<f64>>,
    pub max_rel_err_fwd_rev: f64,
    #[serde(rename = "maxRelErrFwdFD")]
    pub max_rel_err_fwd_fd: f64,
}

fn basis(n: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    e
}

fn matrix_err(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(&x, &y)| rel_err(x, y))).fold(0.0, f64::max)
}

/// Forward Jacobian (columns from basis tangents), reverse Jacobian (rows
/// from basis cotangents) and the central-difference Jacobian at `x`.
pub fn jacobian_report(program: &Compiled, x: &[f64], h: f64) -> Result<JacobianReport> {
    let (n, m) = program.widths();
    if x.len() != n {
        return Err(CheckError::ShapeMismatch { expected: n, found: x.len() });
    }
    let mut jac_fwd = vec![vec![0.0; n]; m];
    let mut jac_fd = vec![vec![0.0; n]; m];
    let fwd = program.fwd_linear(x)?;
    for j in 0..n {
        let e = basis(n, j);
        let col = program.apply_linear(&fwd, &program.program.arg_type, &e)?;
        let fd = central_difference(program, x, &e, h)?;
        for i in 0..m {
            jac_fwd[i][j] = col[i];
            jac_fd[i][j] = fd[i];
        }
    }
    let rev = program.rev_linear(x)?;
    let jac_rev = (0..m)
        .map(|i| program.apply_linear(&rev, &program.result_type, &basis(m, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(JacobianReport {
        point: x.to_vec(),
        max_rel_err_fwd_rev: matrix_err(&jac_fwd, &jac_rev),
        max_rel_err_fwd_fd: matrix_err(&jac_fwd, &jac_fd),
        jac_fwd,
        jac_rev,
        jac_fd,
    })
}

/// `(⟨w, Df(x)v⟩, ⟨Dᵀf(x)w, v⟩)`.
pub fn transpose_consistency(program: &Compiled, x: &[f64], v: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let (n, m) = program.widths();
    if v.len() != n {
        return Err(CheckError::ShapeMismatch { expected: n, found: v.len() });
    }
    if w.len() != m {
        return Err(CheckError::ShapeMismatch { expected: m, found: w.len() });
    }
    let lhs = dot(w, &program.jvp(x, v)?);
    let rhs = dot(&program.vjp(x, w)?, v);
    Ok((lhs, rhs))
}
