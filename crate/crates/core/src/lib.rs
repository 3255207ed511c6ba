//! Time-truncated attribute acceptance sampling.
//!
//! Operating-characteristic (OC) functions for single (SASIP), group
//! (GASIP), modified chain (MChSP) and modified chain group (MChGSP) plans,
//! the two-point AQL/LQL design search, a Monte Carlo validator of the
//! chained lot-acceptance rule, and regeneration of the published MChGSP
//! design tables.

pub mod designer;
pub mod error;
pub mod oc;
pub mod simulator;
pub mod tables;

pub use designer::{
    design, design_gasip, design_mchgsp, design_sasip, feasible, DesignRequest, PlanDesign,
    PlanKind, SearchBounds, TieBreak,
};
pub use error::{Error, Result};
pub use life_test::{fraction_nonconforming, DistSpec, Family};
pub use oc::{binom_cdf, binom_pmf, oc_mchgsp, oc_mchsp, oc_single, PlanParams, Probability};
pub use simulator::{compare_to_analytic, simulate_chain, Comparison, SimConfig, SimResult};
pub use tables::{reproduce_table1, reproduce_table2, MatchKind, Table1Row, Table2Row, TableReport};
