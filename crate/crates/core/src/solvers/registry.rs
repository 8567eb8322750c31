use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::methods::{BaselineSwitching, ConditionalSwitching, EpsSwitching, PolyakUnitConstraint, SwitchingMethod};
use crate::error::{Error, Result};

type Table = RwLock<BTreeMap<String, Arc<dyn SwitchingMethod>>>;

static METHODS: OnceLock<Table> = OnceLock::new();

fn table() -> &'static Table {
    METHODS.get_or_init(|| {
        let builtin: [Arc<dyn SwitchingMethod>; 4] = [
            Arc::new(EpsSwitching),
            Arc::new(ConditionalSwitching),
            Arc::new(BaselineSwitching),
            Arc::new(PolyakUnitConstraint),
        ];
        RwLock::new(builtin.into_iter().map(|m| (m.name().to_string(), m)).collect())
    })
}

/// Add or replace a method under its own name.
pub fn register_method(method: Arc<dyn SwitchingMethod>) {
    table()
        .write()
        .expect("method registry poisoned")
        .insert(method.name().to_string(), method);
}

pub fn get_method(name: &str) -> Result<Arc<dyn SwitchingMethod>> {
    table()
        .read()
        .expect("method registry poisoned")
        .get(name)
        .cloned()
        .ok_or_else(|| Error::UnknownName {
            kind: "algorithm",
            name: name.to_string(),
        })
}

/// Registered names in sorted order.
pub fn list_methods() -> Vec<String> {
    table()
        .read()
        .expect("method registry poisoned")
        .keys()
        .cloned()
        .collect()
}
