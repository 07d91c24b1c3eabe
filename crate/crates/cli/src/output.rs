//! Artifacts are written all-or-nothing: if any file fails, the ones
//! already written by the same command are removed.

use std::path::{Path, PathBuf};

use crate::error::{io_error, CliError, CliResult};

#[derive(Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, path: impl AsRef<Path>, contents: impl Into<Vec<u8>>) {
        self.files
            .push((path.as_ref().to_path_buf(), contents.into()));
    }

    pub fn commit(self) -> CliResult<()> {
        let mut written: Vec<&Path> = Vec::new();
        for (path, contents) in &self.files {
            let result = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map_or(Ok(()), std::fs::create_dir_all)
                .and_then(|_| std::fs::write(path, contents));
            if let Err(e) = result {
                for done in written {
                    let _ = std::fs::remove_file(done);
                }
                let _ = std::fs::remove_file(path);
                return Err(io_error(path)(e));
            }
            written.push(path);
        }
        Ok(())
    }
}

/// Refuses to let a command write over one of its own inputs.
pub fn ensure_distinct(inputs: &[&Path], outputs: &[&Path]) -> CliResult<()> {
    for out in outputs {
        let Ok(out_real) = std::fs::canonicalize(out) else {
            continue;
        };
        for input in inputs {
            if std::fs::canonicalize(input).is_ok_and(|p| p == out_real) {
                return Err(CliError::Usage(format!(
                    "output {} would overwrite an input file",
                    out.display()
                )));
            }
        }
    }
    Ok(())
}
