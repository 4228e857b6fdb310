/// Numerical tolerances shared by the integrator and the stationary solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Max-norm bound on the implicit-step residual, in velocity units.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Max-norm bound on the strong stationary residual.
    pub stationary_tol: f64,
    pub stationary_max_iter: usize,
    /// Keep every `output_stride`-th state in a trajectory (the final state
    /// is always kept). Energies are recorded at every step.
    pub output_stride: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            newton_tol: 1e-10,
            newton_max_iter: 50,
            stationary_tol: 1e-10,
            stationary_max_iter: 50,
            output_stride: 10,
        }
    }
}
