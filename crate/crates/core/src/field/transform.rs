//! Separable trigonometric transforms between dense mode arrays and angle samples.
//!
//! Data layout is `[axis 0][axis 1]...[axis d-1][action grid]`, action index innermost.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

/// `mat[out * len_in + in]` applied along one axis.
fn along_axis(input: &[Complex64], shape: &[usize], axis: usize, tail: usize, mat: &[Complex64], len_out: usize) -> Vec<Complex64> {
    let len_in = shape[axis];
    let before: usize = shape[..axis].iter().product();
    let after: usize = shape[axis + 1..].iter().product::<usize>() * tail;
    let mut out = vec![Complex64::new(0.0, 0.0); before * len_out * after];
    out.par_chunks_mut(len_out * after).enumerate().for_each(|(b, chunk)| {
        let src = &input[b * len_in * after..(b + 1) * len_in * after];
        let live: Vec<usize> =
            (0..len_in).filter(|&i| src[i * after..(i + 1) * after].iter().any(|c| c.re != 0.0 || c.im != 0.0)).collect();
        for o in 0..len_out {
            let dst = &mut chunk[o * after..(o + 1) * after];
            for &i in &live {
                let w = mat[o * len_in + i];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &src[i * after..(i + 1) * after];
                for (x, y) in dst.iter_mut().zip(row) {
                    *x += w * y;
                }
            }
        }
    });
    out
}

/// Dense modes `(2K+1)^d x npts` to real samples on an `m`-point angle grid per axis.
pub(crate) fn synthesize(dense: &[Complex64], d: usize, truncation: usize, m: usize, npts: usize) -> Vec<f64> {
    let nk = 2 * truncation + 1;
    let mat: Vec<Complex64> = (0..m)
        .flat_map(|t| {
            (0..nk).map(move |i| {
                let k = i as f64 - truncation as f64;
                Complex64::from_polar(1.0, TAU * k * t as f64 / m as f64)
            })
        })
        .collect();
    let mut shape = vec![nk; d];
    let mut cur = dense.to_vec();
    for axis in 0..d {
        cur = along_axis(&cur, &shape, axis, npts, &mat, m);
        shape[axis] = m;
    }
    cur.into_iter().map(|c| c.re).collect()
}

/// Real samples on an `m`-point angle grid per axis to dense modes `|k_j| <= K`.
///
/// Exact when the sampled function is a trigonometric polynomial of degree `< m - K`
/// in each angle, in particular for degree `K` when `m >= 2K+1`.
pub(crate) fn analyze(samples: &[f64], d: usize, truncation: usize, m: usize, npts: usize) -> Vec<Complex64> {
    let nk = 2 * truncation + 1;
    let scale = 1.0 / m as f64;
    let mat: Vec<Complex64> = (0..nk)
        .flat_map(|i| {
            (0..m).map(move |t| {
                let k = i as f64 - truncation as f64;
                Complex64::from_polar(scale, -TAU * k * t as f64 / m as f64)
            })
        })
        .collect();
    let mut shape = vec![m; d];
    let mut cur: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for axis in 0..d {
        cur = along_axis(&cur, &shape, axis, npts, &mat, nk);
        shape[axis] = nk;
    }
    cur
}

/// Angles of flat index `a` on the `m`-point uniform angle grid (axis 0 slowest).
pub(crate) fn angle_node(a: usize, d: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    let mut rest = a;
    for j in (0..d).rev() {
        out[j] = (rest % m) as f64 / m as f64;
        rest /= m;
    }
    out
}
