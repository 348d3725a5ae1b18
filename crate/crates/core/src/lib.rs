//! Simulation and verification of clocked threshold logic built from
//! molecular rectifying diodes, resonant tunneling diodes and transistors.
//!
//! * [`netlist`]: SPICE-subset netlists, subcircuit flattening.
//! * [`devices`]: diode, RTD and transistor terminal models.
//! * [`solver`]: MNA assembly, DC operating point, sweeps, transient.
//! * [`gates`]: MOBILE threshold-gate and adder generators.
//! * [`harness`]: truth-table verification and I-V shape analysis.

pub mod devices;
pub mod gates;
pub mod harness;
pub mod netlist;
pub mod solver;
