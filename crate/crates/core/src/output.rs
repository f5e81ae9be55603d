//! CSV emission shared by every table writer.

use std::io::Write;

use sha2::{Digest, Sha256};

/// Writes `# config-hash: <hash>`, a header row and the data rows, LF-terminated.
pub fn write_csv<W: Write, I, R>(mut w: W, config_hash: &str, header: &[&str], rows: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    writeln!(w, "# config-hash: {config_hash}")?;
    let mut c = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    c.write_record(header)?;
    for r in rows {
        c.write_record(r)?;
    }
    c.flush()?;
    Ok(())
}

/// Short digest of a JSON value. Object keys are sorted by `serde_json`, so
/// equal configurations hash equally regardless of key order.
pub fn config_hash(config: &serde_json::Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    hex::encode(digest)[..16].to_string()
}
