//! Numeric front end: read a normal form off a real symplectic matrix, and
//! realize a normal form as a matrix.
//!
//! Coordinates are `(x_1..x_n, y_1..y_n)` with `J = [[0, -I], [I, 0]]`; the
//! ⋄-sum interleaves blocks accordingly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::normal_form::{BasicBlock, NormalForm, Sign};
use crate::rotation::{RotationNumber, MIN_DIGITS};

pub fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

fn block_matrix(b: &BasicBlock) -> Result<DMatrix<f64>> {
    Ok(match b {
        BasicBlock::N1 { lambda, b } => {
            DMatrix::from_row_slice(2, 2, &[*lambda as f64, *b as f64, 0.0, *lambda as f64])
        }
        BasicBlock::D { sign } => {
            let s = if *sign == Sign::Plus { 1.0 } else { -1.0 };
            DMatrix::from_row_slice(2, 2, &[2.0 * s, 0.0, 0.0, 0.5 * s])
        }
        BasicBlock::R { rho } => {
            let t = 2.0 * PI * rho.to_f64();
            DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
        }
        BasicBlock::N2 { .. } => {
            return Err(Error::Invalid("N2 blocks have no canonical numeric realization here".into()))
        }
        BasicBlock::OffCircle { half_dim } => {
            if half_dim % 2 != 0 {
                return Err(Error::Invalid("OffCircle realization needs an even half dimension".into()));
            }
            let d = *half_dim as usize;
            let mut m = DMatrix::zeros(2 * d, 2 * d);
            for q in 0..d / 2 {
                // A = 2 R(φ) on the x-plane, A^{-T} on the y-plane
                let phi = 0.7 + 0.3 * q as f64;
                let (c, s) = (phi.cos(), phi.sin());
                let a = [2.0 * c, -2.0 * s, 2.0 * s, 2.0 * c];
                let ainvt = [0.5 * c, -0.5 * s, 0.5 * s, 0.5 * c];
                let o = 2 * q;
                for r in 0..2 {
                    for k in 0..2 {
                        m[(o + r, o + k)] = a[2 * r + k];
                        m[(d + o + r, d + o + k)] = ainvt[2 * r + k];
                    }
                }
            }
            m
        }
    })
}

/// The ⋄-sum of the block representatives as a `2n × 2n` matrix.
pub fn realize(nf: &NormalForm) -> Result<DMatrix<f64>> {
    let n = nf.half_dim() as usize;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    let mut off = 0;
    for b in &nf.blocks {
        let bm = block_matrix(b)?;
        let d = b.half_dim() as usize;
        for r in 0..2 * d {
            for c in 0..2 * d {
                let gr = if r < d { off + r } else { n + off + r - d };
                let gc = if c < d { off + c } else { n + off + c - d };
                m[(gr, gc)] = bm[(r, c)];
            }
        }
        off += d;
    }
    Ok(m)
}

fn cplx(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Right singular vectors belonging to the `k` smallest singular values,
/// with all singular values in ascending order.
fn null_vectors(a: &DMatrix<Complex64>, k: usize) -> (Vec<DVector<Complex64>>, Vec<f64>) {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
    let sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let vecs = idx
        .iter()
        .take(k)
        .map(|&i| vt.row(i).transpose().map(|z| z.conj()))
        .collect();
    (vecs, sv)
}

fn real_null_vectors(a: &DMatrix<f64>, k: usize) -> (Vec<DVector<f64>>, Vec<f64>) {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
    let sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let vecs = idx.iter().take(k).map(|&i| vt.row(i).transpose()).collect();
    (vecs, sv)
}

/// Classify a real symplectic matrix whose circle spectrum is semisimple
/// except for an optional `N1(±1, b)` factor.
pub fn classify_matrix(m: &DMatrix<f64>, tol: f64) -> Result<NormalForm> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Invalid(format!("tolerance must lie in (0,1), got {}", tol)));
    }
    let dim = m.nrows();
    if dim != m.ncols() || !dim.is_multiple_of(2) || dim == 0 {
        return Err(Error::Invalid(format!("expected a 2n x 2n matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    let n = dim / 2;
    let j = standard_j(n);
    let scale = 1.0 + m.norm() * m.norm();
    let defect = (m.transpose() * &j * m - &j).norm();
    if defect > tol * scale {
        return Err(Error::Invalid(format!("matrix is not symplectic: |M^T J M - J| = {:e}", defect)));
    }
    let eig = m.complex_eigenvalues();
    let cluster = 10.0 * tol.sqrt();
    let mut blocks_one = Vec::new();
    let mut blocks_rot = Vec::new();
    let mut blocks_d = Vec::new();
    let mut blocks_off = Vec::new();
    let mut used = vec![false; dim];

    for lambda in [1.0f64, -1.0] {
        let members: Vec<usize> = (0..dim)
            .filter(|&k| (eig[k] - Complex64::new(lambda, 0.0)).norm() < cluster)
            .collect();
        for &k in &members {
            used[k] = true;
        }
        match members.len() {
            0 => {}
            2 => blocks_one.push(classify_unit_real(m, &j, lambda, tol)?),
            c => {
                return Err(Error::Invalid(format!(
                    "eigenvalue {} has algebraic multiplicity {}; only 0 or 2 is supported",
                    lambda, c
                )))
            }
        }
    }

    let digits = (-tol.log10()).floor() as u32;
    let on_circle = tol.sqrt();
    for k in 0..dim {
        if used[k] {
            continue;
        }
        let z = eig[k];
        let gap = (z.norm() - 1.0).abs();
        if gap > on_circle && gap < 10.0 * on_circle {
            return Err(Error::Invalid(format!("eigenvalue {} is too close to the unit circle to classify", z)));
        }
        if gap <= on_circle {
            if z.im <= 0.0 {
                continue;
            }
            let twins = (0..dim).filter(|&i| !used[i] && (eig[i] - z).norm() < cluster).count();
            if twins > 1 {
                return Err(Error::Invalid(format!(
                    "eigenvalue {} on the unit circle is not simple (N2 and multiple rotations are not recovered)",
                    z
                )));
            }
            if digits < MIN_DIGITS {
                return Err(Error::Invalid(format!(
                    "tolerance {:e} too coarse to emit rotation numbers with {} digits",
                    tol, MIN_DIGITS
                )));
            }
            let a = cplx(m) - DMatrix::<Complex64>::identity(dim, dim) * z;
            let (v, _) = null_vectors(&a, 1);
            let v = &v[0];
            let jc = cplx(&j);
            let krein = (v.adjoint() * (&jc * v))[(0, 0)] * Complex64::new(0.0, -1.0);
            if krein.re.abs() < tol.sqrt() * v.norm_squared() {
                return Err(Error::Invalid(format!("Krein sign of eigenvalue {} is undecidable", z)));
            }
            let phi = z.im.atan2(z.re) / (2.0 * PI);
            let rho = if krein.re > 0.0 { phi } else { 1.0 - phi };
            let dec = format!("{:.*}", digits as usize, rho);
            blocks_rot.push(BasicBlock::r(RotationNumber::irrational(&dec, digits)?)?);
        } else if z.im.abs() <= on_circle {
            if z.norm() > 1.0 {
                let sign = if z.re > 0.0 { Sign::Plus } else { Sign::Minus };
                blocks_d.push(BasicBlock::D { sign });
            }
        } else if z.norm() > 1.0 && z.im > 0.0 {
            blocks_off.push(BasicBlock::off_circle(2)?);
        }
    }
    blocks_rot.sort_by(|a, b| {
        let x = a.rotation().map(|r| r.to_f64()).unwrap_or(0.0);
        let y = b.rotation().map(|r| r.to_f64()).unwrap_or(0.0);
        x.partial_cmp(&y).unwrap()
    });
    let mut blocks = blocks_one;
    blocks.extend(blocks_rot);
    blocks.extend(blocks_d);
    blocks.extend(blocks_off);
    let nf = NormalForm::new(blocks);
    if nf.half_dim() as usize != n {
        return Err(Error::Invalid(format!(
            "spectrum does not split into supported blocks (found half-dimension {} of {})",
            nf.half_dim(),
            n
        )));
    }
    Ok(nf)
}

/// `N1(λ, b)` from the generalized eigenspace at `λ = ±1`.
fn classify_unit_real(m: &DMatrix<f64>, j: &DMatrix<f64>, lambda: f64, tol: f64) -> Result<BasicBlock> {
    let dim = m.nrows();
    let a = m - DMatrix::<f64>::identity(dim, dim) * lambda;
    let (_, sv) = real_null_vectors(&a, 0);
    let thresh = tol.sqrt() * (1.0 + m.norm());
    let kernel = sv.iter().filter(|&&s| s < thresh).count();
    let l = lambda as i8;
    if kernel >= 2 {
        return BasicBlock::n1(l, 0);
    }
    let (gen, _) = real_null_vectors(&(&a * &a), 2);
    let w = gen
        .into_iter()
        .max_by(|x, y| (&a * x).norm().partial_cmp(&(&a * y).norm()).unwrap())
        .expect("two vectors");
    let s = (w.transpose() * j * &a * &w)[(0, 0)];
    if s.abs() < thresh * w.norm_squared() {
        return Err(Error::Invalid(format!("sign of the N1({}, b) factor is undecidable", lambda)));
    }
    BasicBlock::n1(l, if s > 0.0 { 1 } else { -1 })
}

/// `[[I, S], [0, I]]` and `[[I, 0], [S, I]]` for symmetric `S`.
pub fn shear(s: &DMatrix<f64>, upper: bool) -> DMatrix<f64> {
    let n = s.nrows();
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            if upper {
                m[(r, n + c)] = s[(r, c)];
            } else {
                m[(n + r, c)] = s[(r, c)];
            }
        }
    }
    m
}
