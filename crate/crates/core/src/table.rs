//! Full-precision JSON dump of the coefficient tables, for inspection.

use serde::{Deserialize, Serialize};

use crate::config::{derive_with_table, DerivedParams, SystemConfig};
use crate::error::Result;
use crate::order_stats::{CoefficientTable, TermSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDump {
    pub config: SystemConfig,
    pub derived: DerivedParams,
    pub table: CoefficientTable,
    pub term_count: usize,
    pub term_set: TermSet,
}

pub fn dump_table(cfg: &SystemConfig) -> Result<TableDump> {
    let (derived, table) = derive_with_table(cfg)?;
    let term_set = table.build_term_set(cfg.rho1, cfg.rho2)?;
    Ok(TableDump { config: *cfg, derived, term_count: term_set.terms.len(), table, term_set })
}

pub fn to_json(dump: &TableDump) -> String {
    serde_json::to_string_pretty(dump).expect("table serializes")
}
