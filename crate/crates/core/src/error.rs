use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid soil parameters: {0}")]
    InvalidParams(String),

    #[error("saturation table did not reach 1 - 1e-12 within {steps} integration steps (theta = {theta})")]
    TableBuild { steps: usize, theta: f64 },

    #[error("saturation {0} lies outside [0, 1]")]
    SaturationOutOfRange(f64),

    #[error("pressure head is singular (-inf) at zero saturation")]
    SingularPressure,

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing Dirichlet value for boundary node {0}")]
    MissingBoundaryValue(usize),

    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("L-scheme did not converge at step {step} after {iterations} iterations (last increment {increment:e})")]
    LschemeNotConverged {
        step: usize,
        iterations: usize,
        increment: f64,
    },

    #[error("invalid study parameters: {0}")]
    InvalidStudy(String),
}
