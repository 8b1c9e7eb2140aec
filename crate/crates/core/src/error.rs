use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Fewer than three vertices were given for a surface.
    TooFewVertices { count: usize },
    /// A vertex lies farther than the coplanarity tolerance from the fitted plane.
    NonPlanar { vertex: usize, residual: f64 },
    /// The vertex loop is not a convex polygon.
    NonConvex { vertex: usize },
    /// The fitted normal is (close to) horizontal, or the loop has no area.
    DegenerateNormal,
    /// Inconsistent dimensions or non-finite data in a linear program.
    MalformedProblem(String),
    /// A phase has no candidate surface.
    EmptyCandidates { phase: usize },
    /// A candidate surface fails the quasi-flat test for the instance friction.
    NonQuasiFlatCandidate { phase: usize, surface: usize },
    /// The initial or goal conditions admit no solution on their own.
    InfeasibleBoundary(&'static str),
    /// Structural problem with an instance (bad ids, gait mismatch, ...).
    InvalidInstance(String),
    /// An assignment does not match the phase candidate sets.
    InvalidAssignment { phase: usize, surface: usize },
    /// Enumeration would exceed its cap.
    CapExceeded { combinations: u128, cap: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooFewVertices { count } => {
                write!(f, "surface needs at least 3 vertices, got {count}")
            }
            Error::NonPlanar { vertex, residual } => {
                write!(f, "vertex {vertex} is {residual:e} m off the surface plane")
            }
            Error::NonConvex { vertex } => write!(f, "polygon is not convex at vertex {vertex}"),
            Error::DegenerateNormal => write!(f, "surface normal is degenerate or vertical"),
            Error::MalformedProblem(msg) => write!(f, "malformed linear program: {msg}"),
            Error::EmptyCandidates { phase } => write!(f, "phase {phase} has no candidate surface"),
            Error::NonQuasiFlatCandidate { phase, surface } => {
                write!(f, "candidate surface {surface} of phase {phase} is not quasi-flat")
            }
            Error::InfeasibleBoundary(which) => {
                write!(f, "{which} conditions are infeasible on their own")
            }
            Error::InvalidInstance(msg) => write!(f, "invalid instance: {msg}"),
            Error::InvalidAssignment { phase, surface } => {
                write!(f, "surface {surface} is not a candidate of phase {phase}")
            }
            Error::CapExceeded { combinations, cap } => {
                write!(f, "{combinations} combinations exceed the enumeration cap of {cap}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
