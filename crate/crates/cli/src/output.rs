//! Atomic artifact writing: results land under their final name only after
//! the full payload has been flushed, so a crash can never leave a partial
//! file behind.

use std::io::{self, Write};
use std::path::Path;

/// Write `fill`'s output to `path` via a sibling temp file and rename.
///
/// If `fill` or any I/O step fails, the temp file is removed and the
/// destination is left exactly as it was.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
