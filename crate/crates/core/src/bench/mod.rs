//! Monte Carlo BER sweeps, bit-count schedules, spectrograms and plots.

mod record;
mod schedule;
mod spectrogram;
mod svg;
mod sweep;

pub use record::{
    append_ber_csv, clopper_pearson, load_ber_csv, read_ber_csv, write_ber_csv, BerRecord, CellKey, Scheme, COLUMNS,
};
pub use schedule::{adapt_bits, BitSchedule, Scale, ScheduleRow, DESK_CAP, MIN_BITS};
pub use spectrogram::{
    centroid_boundary_test, hann, spectrogram, welch_t_test, CentroidTest, Spectrogram, WelchTest, DEFAULT_OVERLAP,
    DEFAULT_WINDOW,
};
pub use svg::{ber_svg, spectrogram_svg};
pub use sweep::{
    ber_sweep, pending_cells, run_cell, run_cells, BaselineSpec, Cell, CellFailure, CellOutcome, ScheduleChoice,
    SweepConfig, SweepSpec,
};
