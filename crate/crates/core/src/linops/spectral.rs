//! Diagonalisation of the ghost-point Neumann Laplacian by the type-I cosine
//! transform.
//!
//! On `n` nodes the vectors `cos(pi j k / (n-1))` are eigenvectors of the
//! reflection stencil with eigenvalues `-(4/h^2) sin^2(pi k / (2(n-1)))`. Any
//! function of the operator (heat propagator, resolvent) is therefore a
//! pointwise multiplier in transform space. The transform is computed with an
//! FFT of the even extension, length `2(n-1)`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// Unnormalised DCT-I on a fixed length. Applying it twice multiplies by `2(n-1)`.
#[derive(Clone)]
struct Dct1 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dct1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dct1").field("n", &self.n).finish()
    }
}

impl Dct1 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dct1 {
            n,
            fft: planner.plan_fft_forward(2 * (n - 1)),
        }
    }

    fn transform(&self, data: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        let n = self.n;
        let m = 2 * (n - 1);
        buf.clear();
        buf.extend(data.iter().map(|&v| Complex::new(v, 0.0)));
        buf.extend(data[1..n - 1].iter().rev().map(|&v| Complex::new(v, 0.0)));
        debug_assert_eq!(buf.len(), m);
        self.fft.process(buf);
        for (d, c) in data.iter_mut().zip(buf.iter()) {
            *d = c.re;
        }
    }
}

/// Eigenvalues of the 1D reflection-stencil Laplacian, in transform order.
pub(crate) fn axis_eigenvalues(n: usize, h: f64) -> Vec<f64> {
    let m = 2.0 * (n - 1) as f64;
    (0..n)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / m).sin();
            -4.0 * s * s / (h * h)
        })
        .collect()
}

/// Transform-space representation of the Laplacian on a grid.
#[derive(Debug, Clone)]
pub(crate) struct SpectralBasis {
    grid: Arc<Grid>,
    dct_x: Dct1,
    dct_y: Option<Dct1>,
    eig_x: Vec<f64>,
    eig_y: Vec<f64>,
}

impl SpectralBasis {
    pub(crate) fn new(grid: &Arc<Grid>) -> Self {
        let [nx, ny] = grid.nodes();
        let [hx, hy] = grid.spacing();
        let two_d = grid.dimension() == 2;
        SpectralBasis {
            grid: grid.clone(),
            dct_x: Dct1::new(nx),
            dct_y: two_d.then(|| Dct1::new(ny)),
            eig_x: axis_eigenvalues(nx, hx),
            eig_y: if two_d {
                axis_eigenvalues(ny, hy)
            } else {
                vec![0.0]
            },
        }
    }

    pub(crate) fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Replace `values` by `g(L) values`, where `symbol(lambda)` is `g` evaluated
    /// on the Laplacian eigenvalue `lambda`.
    ///
    /// When `g(0) == 1` constants are reproduced bit-for-bit: the first value is
    /// subtracted before transforming and added back after.
    pub(crate) fn apply(&self, values: &mut [f64], symbol: impl Fn(f64) -> f64) {
        let [nx, ny] = self.grid.nodes();
        debug_assert_eq!(values.len(), nx * ny);
        let offset = if symbol(0.0) == 1.0 { values[0] } else { 0.0 };
        if offset != 0.0 {
            values.iter_mut().for_each(|v| *v -= offset);
        }
        if values.iter().all(|&v| v == 0.0) {
            values.iter_mut().for_each(|v| *v = offset);
            return;
        }
        let mut buf = Vec::with_capacity(2 * nx.max(ny));
        // forward
        for row in values.chunks_mut(nx) {
            self.dct_x.transform(row, &mut buf);
        }
        let mut col = vec![0.0; ny];
        if let Some(dct_y) = &self.dct_y {
            for i in 0..nx {
                for j in 0..ny {
                    col[j] = values[j * nx + i];
                }
                dct_y.transform(&mut col, &mut buf);
                for j in 0..ny {
                    values[j * nx + i] = col[j];
                }
            }
        }
        // multiply
        for (j, &ey) in self.eig_y.iter().enumerate() {
            for (i, &ex) in self.eig_x.iter().enumerate() {
                values[j * nx + i] *= symbol(ex + ey);
            }
        }
        // inverse (DCT-I is an involution up to scale)
        for row in values.chunks_mut(nx) {
            self.dct_x.transform(row, &mut buf);
        }
        let mut scale = 2.0 * (nx - 1) as f64;
        if let Some(dct_y) = &self.dct_y {
            for i in 0..nx {
                for j in 0..ny {
                    col[j] = values[j * nx + i];
                }
                dct_y.transform(&mut col, &mut buf);
                for j in 0..ny {
                    values[j * nx + i] = col[j];
                }
            }
            scale *= 2.0 * (ny - 1) as f64;
        }
        let inv = 1.0 / scale;
        values.iter_mut().for_each(|v| *v = *v * inv + offset);
    }
}
