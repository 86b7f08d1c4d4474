//! Finite-difference and interpolation stencils on the uniform action grid.

use num_complex::Complex64;

use crate::space::TorusBox;

pub(crate) const MAX_DIM: usize = 4;

/// 4th-order first derivative along `axis` of grid data laid out as in [`TorusBox`].
///
/// Central 5-point stencil in the interior, one-sided 5-point stencils on the two
/// nodes next to each edge. All variants are exact on quartic polynomials.
pub(crate) fn fd_axis(data: &[Complex64], space: &TorusBox, axis: usize) -> Vec<Complex64> {
    let n = space.grid_points;
    let stride = space.action_stride(axis);
    let inv = 1.0 / (12.0 * space.spacing(axis));
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for (p, o) in out.iter_mut().enumerate() {
        let i = (p / stride) % n;
        let base = p - i * stride;
        let f = |q: usize| data[base + q * stride];
        let v = if i >= 2 && i + 2 < n {
            f(i - 2) - f(i - 1) * 8.0 + f(i + 1) * 8.0 - f(i + 2)
        } else if i == 0 {
            f(0) * -25.0 + f(1) * 48.0 - f(2) * 36.0 + f(3) * 16.0 - f(4) * 3.0
        } else if i == 1 {
            f(0) * -3.0 - f(1) * 10.0 + f(2) * 18.0 - f(3) * 6.0 + f(4)
        } else if i == n - 1 {
            f(n - 1) * 25.0 - f(n - 2) * 48.0 + f(n - 3) * 36.0 - f(n - 4) * 16.0 + f(n - 5) * 3.0
        } else {
            f(n - 1) * 3.0 + f(n - 2) * 10.0 - f(n - 3) * 18.0 + f(n - 4) * 6.0 - f(n - 5)
        };
        *o = v * inv;
    }
    out
}

/// Cubic Lagrange weights on four consecutive nodes and their x-derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cubic1d {
    pub start: usize,
    pub w: [f64; 4],
    pub dw: [f64; 4],
}

pub(crate) fn cubic_1d(x: f64, lo: f64, h: f64, n: usize) -> Cubic1d {
    let t = (x - lo) / h;
    let cell = (t.floor().max(0.0) as usize).min(n - 2);
    let start = cell.saturating_sub(1).min(n - 4);
    let u = t - start as f64;
    let (a, b, c, e) = (u, u - 1.0, u - 2.0, u - 3.0);
    let w = [-b * c * e / 6.0, a * c * e / 2.0, -a * b * e / 2.0, a * b * c / 6.0];
    let dw = [
        -(c * e + b * e + b * c) / (6.0 * h),
        (c * e + a * e + a * c) / (2.0 * h),
        -(b * e + a * e + a * b) / (2.0 * h),
        (b * c + a * c + a * b) / (6.0 * h),
    ];
    Cubic1d { start, w, dw }
}

/// Tensor-product cubic stencil at one action point.
#[derive(Debug, Clone)]
pub(crate) struct InterpStencil {
    axes: [Cubic1d; MAX_DIM],
    d: usize,
    n: usize,
}

impl InterpStencil {
    pub fn new(space: &TorusBox, actions: &[f64]) -> Self {
        let d = space.d;
        let n = space.grid_points;
        let mut axes = [Cubic1d { start: 0, w: [0.0; 4], dw: [0.0; 4] }; MAX_DIM];
        for (j, ax) in axes.iter_mut().enumerate().take(d) {
            *ax = cubic_1d(actions[j], space.action_lo[j], space.spacing(j), n);
        }
        Self { axes, d, n }
    }

    /// `sum_s w_s data[node_s]`, with the weights of axis `deriv` differentiated.
    fn contract(&self, data: &[Complex64], deriv: Option<usize>) -> Complex64 {
        let weight = |j: usize, i: usize| if deriv == Some(j) { self.axes[j].dw[i] } else { self.axes[j].w[i] };
        match self.d {
            1 => (0..4).map(|i| data[self.axes[0].start + i] * weight(0, i)).sum(),
            2 => {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..4 {
                    let row = (self.axes[0].start + i) * self.n + self.axes[1].start;
                    let inner: Complex64 = (0..4).map(|k| data[row + k] * weight(1, k)).sum();
                    acc += inner * weight(0, i);
                }
                acc
            }
            d => {
                let mut acc = Complex64::new(0.0, 0.0);
                for combo in 0..4usize.pow(d as u32) {
                    let mut rest = combo;
                    let mut p = 0usize;
                    let mut w = 1.0;
                    let mut digits = [0usize; MAX_DIM];
                    for j in (0..d).rev() {
                        digits[j] = rest % 4;
                        rest /= 4;
                    }
                    for j in 0..d {
                        p = p * self.n + self.axes[j].start + digits[j];
                        w *= weight(j, digits[j]);
                    }
                    acc += data[p] * w;
                }
                acc
            }
        }
    }

    pub fn apply(&self, data: &[Complex64]) -> Complex64 {
        self.contract(data, None)
    }

    pub fn apply_deriv(&self, data: &[Complex64], axis: usize) -> Complex64 {
        self.contract(data, Some(axis))
    }
}
