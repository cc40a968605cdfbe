use thiserror::Error;

/// Errors surfaced by the library. Variant names follow the failing
/// precondition rather than the module that raised it.
#[derive(Debug, Error)]
pub enum WfError {
    #[error("chart point ({0}, {1}) outside the chart domain")]
    PointOutsideChart(f64, f64),
    #[error("target point outside the injectivity ball (dist {dist:.6e}, radius {radius:.6e})")]
    OutsideInjectivityRadius { dist: f64, radius: f64 },
    #[error("zero covector not admissible")]
    ZeroCovector,
    #[error("ODE integrator diverged: {0}")]
    IntegratorDivergence(String),
    #[error("non-analytic operation on jet: {0}")]
    NonAnalyticCall(&'static str),
    #[error("derivative order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
    #[error("evaluation point outside the geodesic neighbourhood of the flow")]
    OutsideGeodesicNeighbourhood,
    #[error("phase Hessian phi_x_eta singular at the evaluation point")]
    SingularPhaseHessian,
    #[error("jet order {have} insufficient, need {need}")]
    JetOrderInsufficient { have: usize, need: usize },
    #[error("branch of det^2 phi_x_eta degenerates at t = {0}")]
    BranchDegenerate(f64),
    #[error("trajectory is not a loop: {0}")]
    NotALoop(String),
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
    #[error("identity-symbol order {0} unsupported for d = {1}")]
    UnsupportedOrder(usize, usize),
    #[error("spectrum truncated: l_max {l_max} too small for lambda {lambda}")]
    SpectrumTruncated { l_max: usize, lambda: f64 },
    #[error("spectral truncation insufficient: tail bound {0:.3e} >= 1e-12")]
    TruncationInsufficient(f64),
    #[error("no angular direction with active cut-off (x too far from the wavefront)")]
    NoStationaryDirection,
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("model load error: {0}")]
    ModelLoad(String),
}

pub type Result<T> = std::result::Result<T, WfError>;
