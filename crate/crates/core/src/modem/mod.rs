//! Symbol encoding, transmission and the energy-threshold detector.

mod covert;
mod detect;
mod transmit;

pub use covert::{covertness, CovertnessReport, WindowStat};
pub use detect::{
    detect, detect_segment, detect_with, error_energy, reference_matrix, sync_matrix, threshold, DetectionFrame,
    DetectionRule,
};
pub use transmit::{
    schedule_controls, transmit, ObservedTraces, ScheduleSegment, SymbolMap, Transmission, TransmitSettings,
    Transmitter,
};
