use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cnf::{parse_dimacs, write_dimacs, CnfFormula, DimacsError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: DimacsError },
    #[error("no .cnf files in {}", .0.display())]
    Empty(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

/// Every `*.cnf` file in `dir`, sorted by file name.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<(PathBuf, CnfFormula)>, DatasetError> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "cnf") {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(DatasetError::Empty(dir.to_path_buf()));
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            let f = parse_dimacs(&bytes).map_err(|source| DatasetError::Parse { path: path.clone(), source })?;
            Ok((path, f))
        })
        .collect()
}

/// Writes `{prefix}_{i:05}.cnf` files into `dir`, creating it if needed.
pub fn write_dataset(dir: impl AsRef<Path>, prefix: &str, formulas: &[CnfFormula]) -> Result<Vec<PathBuf>, DatasetError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    formulas
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(format!("{prefix}_{i:05}.cnf"));
            fs::write(&path, write_dimacs(f)).map_err(io_err(&path))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_random_3sat;

    #[test]
    fn round_trip_through_directory() {
        let dir = tempfile::tempdir().unwrap();
        let formulas: Vec<_> = (0..3).map(|s| gen_random_3sat(10, 20, s).unwrap()).collect();
        write_dataset(dir.path(), "r", &formulas).unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded.len(), 3);
        for ((path, f), g) in loaded.iter().zip(&formulas) {
            assert_eq!(f, g, "{}", path.display());
        }
    }

    #[test]
    fn empty_and_malformed() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(DatasetError::Empty(_))));
        fs::write(dir.path().join("bad.cnf"), "1 2 0\n").unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(DatasetError::Parse { .. })));
    }
}
