//! The data migration functors along a mapping `F : S -> T`:
//! [`delta`] pulls `T`-instances back to `S`, [`sigma`] and [`pi`] push
//! `S`-instances forward as its left and right adjoints.

mod delta;
mod pi;
mod sigma;
mod unionfind;

pub use delta::delta;
pub use pi::{pi, pi_with};
pub use sigma::sigma;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::kernel::Schema;

fn expect_schema(expected: &Schema, inst: &Instance) -> Result<()> {
    if expected != &**inst.schema() {
        return Err(Error::SchemaMismatch {
            expected: expected.name().to_owned(),
            found: inst.schema().name().to_owned(),
        });
    }
    Ok(())
}
