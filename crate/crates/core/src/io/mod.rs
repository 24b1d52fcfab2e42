//! File formats: design and netlist JSON, long-format scattering CSV, and
//! nonreciprocity CSV. Frequencies are in Hz and phases in degrees here.

mod design;
mod netlist;
mod table;

pub use design::{
    read_design, write_design, DesignFile, EdgeRecord, ModeRecord, PrototypeRecord, ReducedRecord,
    SynthesisFile,
};
pub use netlist::{read_netlist, write_netlist, ElementRecord, NetlistFile};
pub use table::{
    format_float, read_scatter_csv, write_nonreciprocity_csv, write_scatter_csv,
    NONRECIPROCITY_HEADER, SCATTER_HEADER,
};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub(crate) fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
