use crate::error::{Error, Result};
use crate::flowfield::grid::GridSpec;

/// Space-time velocity with optional pressure and force on a periodic grid.
///
/// Layout: time-major, then x1, x2, x3, vector components interleaved last.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFlow {
    grid: GridSpec,
    velocity: Vec<f64>,
    pressure: Option<Vec<f64>>,
    force: Option<Vec<f64>>,
    metadata: String,
}

fn check_field(name: &str, data: &[f64], expected: usize) -> Result<()> {
    if data.len() != expected {
        return Err(Error::ExtentMismatch { expected, actual: data.len() });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(name.to_string()));
    }
    Ok(())
}

impl SampledFlow {
    pub fn new(
        grid: GridSpec,
        velocity: Vec<f64>,
        pressure: Option<Vec<f64>>,
        force: Option<Vec<f64>>,
        metadata: impl Into<String>,
    ) -> Result<Self> {
        grid.validate()?;
        let scalar_len = grid.n_times * grid.points();
        check_field("velocity", &velocity, 3 * scalar_len)?;
        if let Some(p) = &pressure {
            check_field("pressure", p, scalar_len)?;
        }
        if let Some(f) = &force {
            check_field("force", f, 3 * scalar_len)?;
        }
        Ok(Self { grid, velocity, pressure, force, metadata: metadata.into() })
    }

    pub fn zeros(grid: GridSpec) -> Result<Self> {
        let len = grid.n_times * grid.points();
        Self::new(grid, vec![0.0; 3 * len], Some(vec![0.0; len]), None, "zero")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn pressure(&self) -> Option<&[f64]> {
        self.pressure.as_deref()
    }

    pub fn force(&self) -> Option<&[f64]> {
        self.force.as_deref()
    }

    pub fn has_pressure(&self) -> bool {
        self.pressure.is_some()
    }

    pub fn has_force(&self) -> bool {
        self.force.is_some()
    }

    pub fn velocity_slice(&self, j: usize) -> &[f64] {
        let m = 3 * self.grid.points();
        &self.velocity[j * m..(j + 1) * m]
    }

    pub fn pressure_slice(&self, j: usize) -> Option<&[f64]> {
        let m = self.grid.points();
        self.pressure.as_ref().map(|p| &p[j * m..(j + 1) * m])
    }

    pub fn force_slice(&self, j: usize) -> Option<&[f64]> {
        let m = 3 * self.grid.points();
        self.force.as_ref().map(|f| &f[j * m..(j + 1) * m])
    }

    pub fn with_pressure(mut self, pressure: Vec<f64>) -> Result<Self> {
        check_field("pressure", &pressure, self.grid.n_times * self.grid.points())?;
        self.pressure = Some(pressure);
        Ok(self)
    }

    pub fn without_pressure(mut self) -> Self {
        self.pressure = None;
        self
    }

    pub fn with_force(mut self, force: Vec<f64>) -> Result<Self> {
        check_field("force", &force, 3 * self.grid.n_times * self.grid.points())?;
        self.force = Some(force);
        Ok(self)
    }

    pub fn with_metadata(mut self, metadata: impl Into<String>) -> Self {
        self.metadata = metadata.into();
        self
    }

    /// v → αv, p → α²p, f → α²f.
    pub fn scale_amplitude(&self, alpha: f64) -> Result<Self> {
        let a2 = alpha * alpha;
        Self::new(
            self.grid,
            self.velocity.iter().map(|v| alpha * v).collect(),
            self.pressure.as_ref().map(|p| p.iter().map(|v| a2 * v).collect()),
            self.force.as_ref().map(|f| f.iter().map(|v| a2 * v).collect()),
            format!("{} scaled by {alpha}", self.metadata),
        )
    }

    /// Adds a global constant to the pressure.
    pub fn shift_pressure(&self, c: f64) -> Result<Self> {
        let p = self.pressure.as_ref().ok_or(Error::PressureRequired)?;
        self.clone().with_pressure(p.iter().map(|v| v + c).collect())
    }

    pub fn max_speed(&self) -> f64 {
        self.velocity
            .chunks_exact(3)
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max)
    }
}

/// ∇v per slice; component `3a + b` holds ∂v_a/∂x_b.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl TensorField {
    pub fn new(grid: GridSpec, data: Vec<f64>) -> Result<Self> {
        check_field("gradient", &data, 9 * grid.n_times * grid.points())?;
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        let m = 9 * self.grid.points();
        &self.data[j * m..(j + 1) * m]
    }
}
