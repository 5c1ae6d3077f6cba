//! Transition-probability matrices, evaluation aggregates and trace plots.

pub mod plot;
pub mod report;
pub mod transition;

pub use plot::{emit_traces, heatmap_svg, mode_bands, traces_csv, traces_svg, ModeBand, PLOTTABLE};
pub use report::{aggregate, aggregate_over, format_table, write_reports, EpisodeRow, RunReport, REPORT_COLUMNS};
pub use transition::{transition_matrix, transition_matrix_over, TransitionMatrix};
