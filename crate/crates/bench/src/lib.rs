//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use richards_core::constitutive::DEFAULT_TABLE_SAMPLES;
use richards_core::{BoundaryTag, Field, Mesh, Scenario, SoilModel, SoilParams};

pub fn soil() -> Arc<SoilModel> {
    Arc::new(SoilModel::new(SoilParams::default(), DEFAULT_TABLE_SAMPLES).expect("default soil is valid"))
}

/// Dry column wetted from the top at `u*`.
pub fn infiltration(model: Arc<SoilModel>, cells: usize, final_time: f64, steps: usize) -> Scenario {
    let us = model.u_star();
    let mesh = Arc::new(Mesh::uniform_interval(cells, 0.0, 1.0).expect("valid mesh"));
    Scenario::new(model, mesh, final_time, steps).with_boundary(BoundaryTag::Top, Field::constant(us))
}
