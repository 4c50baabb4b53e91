//! Spectral coexistence of multicarrier systems sharing a licensed band.
//!
//! The crate models the out-of-band emission of OFDM, FBMC and UFMC
//! subcarriers, integrates it over a neighbouring system's band to obtain
//! per-subcarrier interference coefficients, and solves the throughput
//! maximising power allocation under a total power budget and an
//! interference cap toward the neighbour.
//!
//! Module map:
//!
//! - [`psd`]: per-subcarrier and per-resource-block spectral densities,
//!   Dolph-Chebyshev window synthesis.
//! - [`quadrature`]: adaptive Simpson integration with breakpoint hints.
//! - [`interference`]: band integrals, interference profiles and their cache.
//! - [`allocation`]: nested-bisection water-filling with two linear constraints.
//! - [`scenario`]: the two-system shared-band scenario and threshold sweeps.
//! - [`config`] and [`cli`]: TOML run configuration and the `psd`, `alloc`
//!   and `sweep` commands.

pub mod allocation;
pub mod cli;
pub mod config;
pub mod interference;
pub mod psd;
pub mod quadrature;
pub mod scenario;
pub mod units;

pub use allocation::{
    power_loss_percent, solve_power_allocation, throughput, AllocationError, AllocationProblem,
    AllocationResult, SolverOptions,
};
pub use interference::{
    integrate_psd, interference_coefficient, interference_profile, BandSpec, InterferenceError,
    InterferenceProfile, ProfileCache, RasterLayout,
};
pub use psd::{
    chebyshev_window, psd_fbmc_subcarrier, psd_ofdm_subcarrier, psd_resource_block,
    psd_ufmc_subcarrier, FbmcParams, OfdmParams, PsdCurve, PsdError, ResourceBlockSpec,
    SubcarrierPlacement, UfmcParams, Waveform, WaveformKind,
};
pub use scenario::{
    build_default_scenario, run_threshold_sweep, sample_psd_comparison, GridSpec, Scenario,
    SweepResult, SystemSpec,
};
