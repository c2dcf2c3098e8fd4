use std::process::ExitCode;

use vrpkit_agents::PipelineErrorKind;
use vrpkit_core::SolverError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Parse = 1,
    Infeasible = 2,
    Defect = 3,
    Config = 4,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

impl Exit {
    pub fn for_solver(e: &SolverError) -> Exit {
        match e {
            SolverError::Construction { .. } | SolverError::Insertion { .. } | SolverError::NoCustomers => {
                Exit::Infeasible
            }
            SolverError::Distance(_) => Exit::Parse,
            SolverError::Config(_) => Exit::Config,
            SolverError::Defect { .. } | SolverError::StepOutOfRange { .. } => Exit::Defect,
        }
    }

    pub fn for_pipeline(e: &PipelineErrorKind) -> Exit {
        match e {
            PipelineErrorKind::Io(_) | PipelineErrorKind::Parse(_) => Exit::Parse,
            PipelineErrorKind::SolveFailed { last, .. } => Exit::for_solver(last),
            PipelineErrorKind::Config(_)
            | PipelineErrorKind::Provider(_)
            | PipelineErrorKind::Unparseable { .. }
            | PipelineErrorKind::DescriptionRejected { .. }
            | PipelineErrorKind::Buffer(_) => Exit::Config,
        }
    }
}
