use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("unknown node `{0}`")]
    NotFound(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormationError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("energy model configuration: {0}")]
    Config(String),
}

/// Why the planner found no route, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierSummary {
    pub expanded: usize,
    pub generated: usize,
    pub pruned: usize,
    /// Nodes reached by at least one surviving state, sorted.
    pub reached: Vec<String>,
    /// Reached node with the smallest remaining straight-line time to the destination.
    pub closest: Option<(String, f64)>,
}

impl std::fmt::Display for FrontierSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "expanded {} states ({} generated, {} pruned), reached {} node(s)",
            self.expanded,
            self.generated,
            self.pruned,
            self.reached.len()
        )?;
        if let Some((id, h)) = &self.closest {
            write!(f, ", closest `{id}` at {h:.1} s straight-line from destination")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no route from `{src}` to `{dst}`: {summary}")]
    NoRoute {
        src: String,
        dst: String,
        summary: Box<FrontierSummary>,
    },
    #[error("infeasible action: {0}")]
    InfeasibleAction(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Formation(#[from] FormationError),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("drone `{drone}` ran out of battery at t={time:.3} s")]
    Fault { drone: String, time: f64 },
    #[error("plan does not fit the inputs: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Formation(#[from] FormationError),
}
