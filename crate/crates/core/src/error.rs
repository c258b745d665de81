//! Crate-wide error with a stable machine-readable kind and an exit category.

use std::fmt::Debug;

use thiserror::Error;

use crate::formulas::FormulaError;
use crate::gap::GapError;
use crate::graph::GraphError;
use crate::io::IoError;
use crate::metric::MetricError;
use crate::paths::PathError;
use crate::report::ReportError;
use crate::spectral::SpectralError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Usage(String),
}

/// How a failure should be reported to a batch caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Malformed or out-of-domain input.
    Input,
    /// A configured size or work cap was hit.
    ResourceCap,
    /// Results contradict each other or a numerical routine failed.
    Internal,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Input => 2,
            Category::ResourceCap => 3,
            Category::Internal => 4,
        }
    }
}

/// `SomeVariant(..)` → `some_variant`.
fn variant_name(e: &impl Debug) -> String {
    let dbg = format!("{e:?}");
    let head: String = dbg.chars().take_while(|c| c.is_alphanumeric()).collect();
    let mut out = String::new();
    for (i, c) in head.chars().enumerate() {
        if c.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

impl Error {
    /// Innermost variant name in snake case, e.g. `reject_disconnected`.
    pub fn kind(&self) -> String {
        match self {
            Error::Graph(e) => variant_name(e),
            Error::Metric(e) => variant_name(e),
            Error::Spectral(e) => variant_name(e),
            Error::Path(e) => variant_name(e),
            Error::Gap(GapError::Metric(e)) => variant_name(e),
            Error::Gap(e) => variant_name(e),
            Error::Formula(FormulaError::Metric(e)) => variant_name(e),
            Error::Formula(e) => variant_name(e),
            Error::Io(e) => match e {
                IoError::Graph(g) => variant_name(g),
                IoError::Metric(m) => variant_name(m),
                IoError::Path(p) => variant_name(p),
                IoError::Syntax { .. } => "parse_error".into(),
                IoError::Read { .. } => "read_error".into(),
            },
            Error::Report(ReportError::Entry { source, .. }) => source.kind(),
            Error::Report(e) => variant_name(e),
            Error::Usage(_) => "usage".into(),
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Error::Graph(GraphError::SizeCapExceeded { .. } | GraphError::PairingFailed(_))
            | Error::Io(IoError::Graph(GraphError::SizeCapExceeded { .. }))
            | Error::Spectral(SpectralError::SizeCapExceeded { .. })
            | Error::Gap(GapError::SearchSpaceTooLarge { .. }) => Category::ResourceCap,
            Error::Spectral(_) | Error::Report(ReportError::InconsistentBounds { .. }) => Category::Internal,
            Error::Report(ReportError::Entry { source, .. }) => source.category(),
            _ => Category::Input,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category().exit_code()
    }
}
