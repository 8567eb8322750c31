use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::{GeneratorSpec, GeometricProgram, KlConstrained, RatioDistances, SyntheticSharp, TrussDesign};
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;

/// A named instance generator.
pub trait ProblemFamily: Send + Sync {
    fn name(&self) -> &str;

    /// Accepted values of [`GeneratorSpec::variant`]; the first is the default.
    fn variants(&self) -> &[&str] {
        &[]
    }

    fn generate(&self, spec: &GeneratorSpec) -> Result<ProblemInstance>;
}

type Table = RwLock<BTreeMap<String, Arc<dyn ProblemFamily>>>;

static FAMILIES: OnceLock<Table> = OnceLock::new();

fn table() -> &'static Table {
    FAMILIES.get_or_init(|| {
        let builtin: [Arc<dyn ProblemFamily>; 5] = [
            Arc::new(GeometricProgram),
            Arc::new(RatioDistances),
            Arc::new(TrussDesign),
            Arc::new(KlConstrained),
            Arc::new(SyntheticSharp),
        ];
        RwLock::new(builtin.into_iter().map(|f| (f.name().to_string(), f)).collect())
    })
}

pub fn register_family(family: Arc<dyn ProblemFamily>) {
    table()
        .write()
        .expect("family registry poisoned")
        .insert(family.name().to_string(), family);
}

pub fn get_family(name: &str) -> Result<Arc<dyn ProblemFamily>> {
    table()
        .read()
        .expect("family registry poisoned")
        .get(name)
        .cloned()
        .ok_or_else(|| Error::UnknownName {
            kind: "problem family",
            name: name.to_string(),
        })
}

pub fn list_families() -> Vec<String> {
    table()
        .read()
        .expect("family registry poisoned")
        .keys()
        .cloned()
        .collect()
}

/// Build the instance described by `spec` through the registered family.
pub fn generate(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let family = get_family(&spec.family)?;
    if let Some(v) = &spec.variant {
        if !family.variants().contains(&v.as_str()) {
            return Err(Error::UnknownName {
                kind: "variant",
                name: format!("{}/{v}", spec.family),
            });
        }
    }
    family.generate(spec)
}
