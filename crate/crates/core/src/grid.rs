//! Uniform node-centred grids on intervals and rectangles, nodal fields,
//! trapezoidal quadrature and pointwise field algebra.
//!
//! Nodes include the endpoints of every axis, so the spacing along an axis is
//! `extent / (nodes - 1)`. In 2D, values are stored row-major with `x`
//! varying fastest: node `(i, j)` lives at index `j * nx + i`.

use std::io::{self, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::envdsl::{EvalError, Profile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 3 nodes per axis, got {0}")]
    TooFewNodes(usize),
    #[error("extent must be finite and positive, got {0}")]
    BadExtent(f64),
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(u8),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("fields live on different grids")]
    Mismatch,
    #[error("profile is {profile}D but grid is {grid}D")]
    DimensionMismatch { profile: u8, grid: u8 },
    #[error("evaluating profile at node {coords:?}: {source}")]
    Sample {
        coords: Vec<f64>,
        #[source]
        source: EvalError,
    },
}

/// Uniform tensor-product grid over `[0, Lx]` or `[0, Lx] x [0, Ly]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dimension: u8,
    extents: [f64; 2],
    nodes: [usize; 2],
    spacing: [f64; 2],
    weights: Vec<f64>,
}

impl Grid {
    pub fn new_1d(length: f64, nodes: usize) -> Result<Arc<Grid>, GridError> {
        Self::build(1, [length, 1.0], [nodes, 1])
    }

    pub fn new_2d(extents: [f64; 2], nodes: [usize; 2]) -> Result<Arc<Grid>, GridError> {
        Self::build(2, extents, nodes)
    }

    /// Construct from a dimension and per-axis data; the second axis is ignored in 1D.
    pub fn new(
        dimension: u8,
        extents: [f64; 2],
        nodes: [usize; 2],
    ) -> Result<Arc<Grid>, GridError> {
        match dimension {
            1 => Self::new_1d(extents[0], nodes[0]),
            2 => Self::new_2d(extents, nodes),
            d => Err(GridError::BadDimension(d)),
        }
    }

    fn build(dimension: u8, extents: [f64; 2], nodes: [usize; 2]) -> Result<Arc<Grid>, GridError> {
        let axes = dimension as usize;
        let mut spacing = [1.0; 2];
        for ax in 0..axes {
            if nodes[ax] < 3 {
                return Err(GridError::TooFewNodes(nodes[ax]));
            }
            if !(extents[ax].is_finite() && extents[ax] > 0.0) {
                return Err(GridError::BadExtent(extents[ax]));
            }
            spacing[ax] = extents[ax] / (nodes[ax] - 1) as f64;
        }
        let axis_weights = |ax: usize| -> Vec<f64> {
            let n = nodes[ax];
            let h = spacing[ax];
            (0..n)
                .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
                .collect()
        };
        let wx = axis_weights(0);
        let weights = if dimension == 1 {
            wx
        } else {
            let wy = axis_weights(1);
            wy.iter()
                .flat_map(|&b| wx.iter().map(move |&a| a * b))
                .collect()
        };
        Ok(Arc::new(Grid {
            dimension,
            extents,
            nodes,
            spacing,
            weights,
        }))
    }

    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    /// Physical length per axis (only the first entry is meaningful in 1D).
    pub fn extents(&self) -> [f64; 2] {
        self.extents
    }

    pub fn nodes(&self) -> [usize; 2] {
        self.nodes
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes[0] * self.nodes[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Trapezoidal quadrature weights, one per node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match self.dimension {
            1 => self.extents[0],
            _ => self.extents[0] * self.extents[1],
        }
    }

    /// Coordinates of node `index`; the length of the returned vector is the dimension.
    pub fn coords(&self, index: usize) -> Vec<f64> {
        let nx = self.nodes[0];
        let i = index % nx;
        let x = i as f64 * self.spacing[0];
        if self.dimension == 1 {
            vec![x]
        } else {
            let j = index / nx;
            vec![x, j as f64 * self.spacing[1]]
        }
    }
}

/// Nodal values of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite { index, value });
        }
        Ok(ScalarField { grid, values })
    }

    /// Wrap values without the finiteness scan. Length is still checked.
    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length does not match grid");
        ScalarField { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Self {
        let n = grid.len();
        ScalarField::from_raw(grid, vec![value; n])
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_grid(&self, other: &ScalarField) -> Result<(), GridError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(GridError::Mismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_raw(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(
        &self,
        other: &ScalarField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<ScalarField, GridError> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ScalarField::from_raw(self.grid.clone(), values))
    }

    /// `alpha * self + beta * other`.
    pub fn axpby(
        &self,
        alpha: f64,
        other: &ScalarField,
        beta: f64,
    ) -> Result<ScalarField, GridError> {
        self.zip_map(other, |a, b| alpha * a + beta * b)
    }

    /// Trapezoidal quadrature over the domain (tensor-product in 2D).
    pub fn integrate(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Pointwise `max(0, value)`.
    pub fn positive_part(&self) -> ScalarField {
        self.map(|v| v.max(0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |f - g|` over nodes.
    pub fn sup_diff(&self, other: &ScalarField) -> Result<f64, GridError> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Write `x[,y],value` rows with round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.grid.dimension() == 1 {
            writeln!(out, "x,value")?;
        } else {
            writeln!(out, "x,y,value")?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let c = self.grid.coords(i);
            for x in &c {
                write!(out, "{x:?},")?;
            }
            writeln!(out, "{v:?}")?;
        }
        Ok(())
    }
}

/// Sample a profile at every node of `grid`.
pub fn sample(profile: &Profile, grid: &Arc<Grid>) -> Result<ScalarField, GridError> {
    if profile.dimension() != grid.dimension() {
        return Err(GridError::DimensionMismatch {
            profile: profile.dimension(),
            grid: grid.dimension(),
        });
    }
    let values = (0..grid.len())
        .map(|i| {
            let c = grid.coords(i);
            profile
                .eval(&c)
                .map_err(|source| GridError::Sample { coords: c, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScalarField::from_raw(grid.clone(), values))
}

/// The sampled growth-rate profile `a` with its cached extrema and sink classification.
#[derive(Debug, Clone)]
pub struct Environment {
    profile: Option<Profile>,
    field: ScalarField,
    a_min: f64,
    a_sup: f64,
    sink_set_nonempty: bool,
}

impl Environment {
    pub fn new(profile: Profile, grid: &Arc<Grid>) -> Result<Self, GridError> {
        let field = sample(&profile, grid)?;
        let mut env = Self::from_field(field);
        env.profile = Some(profile);
        Ok(env)
    }

    /// Environment from an already sampled field (no source profile).
    pub fn from_field(field: ScalarField) -> Self {
        let a_min = field.min_value();
        let a_sup = field.sup_norm();
        let sink_set_nonempty = field.values().iter().any(|&a| a <= 0.0);
        Environment {
            profile: None,
            field,
            a_min,
            a_sup,
            sink_set_nonempty,
        }
    }

    pub fn profile(&self) -> Option<&Profile> {
        self.profile.as_ref()
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.field.grid()
    }

    pub fn a_min(&self) -> f64 {
        self.a_min
    }

    /// `max |a|` over nodes.
    pub fn a_sup(&self) -> f64 {
        self.a_sup
    }

    /// Whether some node has `a <= 0`.
    pub fn sink_set_nonempty(&self) -> bool {
        self.sink_set_nonempty
    }
}
