pub mod actions;
pub mod arith;
pub mod bounds;
pub mod codes;
pub mod counting;
pub mod error;
pub mod fields;
pub mod oracle;
pub mod tower_poly;

pub use error::{Error, Result};
pub use fields::{build_tower, BackendHint, FieldElement, FieldTower, Level, TowerConfig, TowerParams};
