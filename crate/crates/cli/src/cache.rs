//! On-disk cache of triangle/edge tables, one CSV file per `n`.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use lclt_core::oracle::build_table_with_ceiling;
use lclt_core::TriangleEdgeTable;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
    /// The file existed but failed validation.
    Rebuilt,
}

pub fn cache_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("triangle_table_n{n}.csv"))
}

/// Writes the table through a temporary file and a rename.
pub fn cache(dir: &Path, table: &TriangleEdgeTable) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, table.n());
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, table.to_csv())?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Reads and validates the cached table for `n`, building and caching it
/// when missing or corrupt.
pub fn load_cache(dir: &Path, n: usize, ceiling: usize) -> Result<(TriangleEdgeTable, CacheStatus)> {
    let path = cache_path(dir, n);
    let status = match fs::File::open(&path) {
        Ok(file) => match TriangleEdgeTable::from_csv(BufReader::new(file)) {
            Ok(table) if table.n() == n => return Ok((table, CacheStatus::Hit)),
            Ok(_) | Err(_) => CacheStatus::Rebuilt,
        },
        Err(_) => CacheStatus::Built,
    };
    let table = build_table_with_ceiling(n, ceiling)?;
    cache(dir, &table)?;
    Ok((table, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lclt_core::build_table;

    #[test]
    fn round_trip_and_rebuild() {
        let dir = tempfile::tempdir().unwrap();
        let table = build_table(5).unwrap();
        let path = cache(dir.path(), &table).unwrap();
        let (loaded, status) = load_cache(dir.path(), 5, 7).unwrap();
        assert_eq!(status, CacheStatus::Hit);
        assert_eq!(loaded, table);
        assert_eq!(fs::read_to_string(&path).unwrap(), table.to_csv());

        // bump one count so the cells no longer sum to 2^C(n,2)
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let last = lines.last_mut().unwrap();
        let (head, count) = last.rsplit_once(',').unwrap();
        *last = format!("{head},{}", count.parse::<u64>().unwrap() + 1);
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        let (fixed, status) = load_cache(dir.path(), 5, 7).unwrap();
        assert_eq!(status, CacheStatus::Rebuilt);
        assert_eq!(fixed, table);
        assert_eq!(load_cache(dir.path(), 5, 7).unwrap().1, CacheStatus::Hit);

        let (small, status) = load_cache(dir.path(), 4, 7).unwrap();
        assert_eq!(status, CacheStatus::Built);
        assert_eq!(small.total(), 64);
    }
}
