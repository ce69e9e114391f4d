//! File formats, reports and drawings.

pub mod format;
pub mod report;
pub mod svg;

pub use format::{
    parse_framework, parse_matrix_space, serialize_framework, FormatError, FrameworkFile,
};
pub use report::{analyze, emit_report, AnalysisOptions, AnalysisReport, ReportFormat};
pub use svg::{render_svg, SvgOptions};
