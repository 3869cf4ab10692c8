//! Instance files, solver exports, reports and the instance library.

pub mod json;
pub mod library;
pub mod report;
pub mod sedumi;

pub use json::{from_json_str, load, save, to_json_string};
pub use library::{build_library, library_instances, Manifest, ManifestEntry};
pub use sedumi::{export_sdpa, export_sedumi, import_sedumi, to_sdpa, to_sedumi, SedumiTriple};
