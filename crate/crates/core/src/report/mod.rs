//! Trace capture and the file artifacts written after a run.

mod csv_io;
mod markdown;
mod svg;
mod traces;

pub use csv_io::{read_csv, write_csv, CsvTable};
pub use markdown::{render_report, RunSummary};
pub use svg::{render_svg, Figure};
pub use traces::TraceSet;
