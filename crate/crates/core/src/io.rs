//! File formats.
//!
//! Feature tables come as CSV (`image_id,category_id,f0,...,f{d-1}`) or as a
//! packed little-endian binary:
//!
//! ```text
//! b"DSIM" | u32 version=1 | u32 dim | u64 records
//! per record: u32 len | image_id | u32 len | category_id | dim × f32
//! ```
//!
//! Centroid files use the same framing with magic `b"DCEN"` and per
//! category `u32 len | category_id | u64 count | dim × f64`, ids strictly
//! ascending.
//!
//! Index CSVs feed the rebalance tools. A header starting
//! `image_id,category_id` lists one image per row (extra columns are
//! ignored, so a feature CSV doubles as an index); a header
//! `category_id,count` gives counts only.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::domain::{Domain, FeatureRecord};
use crate::error::{Error, Position, Result};
use crate::rebalance::{CategoryCounts, SubsetManifest};

pub const FEATURE_MAGIC: [u8; 4] = *b"DSIM";
pub const CENTROID_MAGIC: [u8; 4] = *b"DCEN";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureFormat {
    /// Binary if the file starts with the feature magic, CSV otherwise.
    #[default]
    Auto,
    Csv,
    Binary,
}

/// Writes through a temporary file in the destination directory and renames
/// it into place once `write` succeeds.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write(&mut out)?;
        out.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// feature tables

pub fn load_features(path: &Path, format: FeatureFormat) -> Result<Vec<FeatureRecord>> {
    let mut file = BufReader::new(File::open(path)?);
    let format = match format {
        FeatureFormat::Auto => {
            let head = {
                use std::io::BufRead;
                file.fill_buf()?
            };
            if head.starts_with(&FEATURE_MAGIC) {
                FeatureFormat::Binary
            } else {
                FeatureFormat::Csv
            }
        }
        f => f,
    };
    match format {
        FeatureFormat::Binary => read_features_binary(file),
        _ => read_features_csv(file),
    }
}

pub fn save_features(path: &Path, records: &[FeatureRecord], format: FeatureFormat) -> Result<()> {
    write_atomic(path, |w| match format {
        FeatureFormat::Binary => write_features_binary(w, records),
        _ => write_features_csv(w, records),
    })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse_at(Position::Line(line), format!("{kind:?}")),
    }
}

pub fn read_features_csv<R: Read>(reader: R) -> Result<Vec<FeatureRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.len() < 3 || &header[0] != "image_id" || &header[1] != "category_id" {
        return Err(Error::parse_at(
            Position::Line(1),
            "header must be image_id,category_id,f0,...",
        ));
    }
    let dim = header.len() - 2;
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len().saturating_sub(2),
            });
        }
        let vector = row
            .iter()
            .skip(2)
            .enumerate()
            .map(|(k, field)| {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::parse_at(Position::Line(line), format!("f{k}: not a number: {field:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let record = FeatureRecord {
            image_id: row[0].to_string(),
            category_id: row[1].to_string(),
            vector,
        };
        record.validate().map_err(|e| match e {
            Error::NonFiniteValue { context } => Error::NonFiniteValue {
                context: format!("line {line}: {context}"),
            },
            e => Error::parse_at(Position::Line(line), e.to_string()),
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_features_csv(writer: &mut dyn Write, records: &[FeatureRecord]) -> Result<()> {
    let dim = common_dim(records)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["image_id".to_string(), "category_id".to_string()];
    header.extend((0..dim).map(|k| format!("f{k}")));
    w.write_record(&header).map_err(csv_error)?;
    for r in records {
        let mut row = vec![r.image_id.clone(), r.category_id.clone()];
        row.extend(r.vector.iter().map(|v| format!("{v:?}")));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn common_dim(records: &[FeatureRecord]) -> Result<usize> {
    let dim = records.first().ok_or(Error::EmptyInput("no feature records"))?.dim();
    for r in records {
        r.validate()?;
        if r.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.dim(),
            });
        }
    }
    Ok(dim)
}

/// Reader that remembers how many bytes it has consumed so truncation and
/// corruption can be reported with an offset.
struct Framed<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Framed<R> {
    fn new(inner: R) -> Self {
        Framed { inner, offset: 0 }
    }

    fn bytes(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        let start = self.offset;
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(Error::parse_at(
                        Position::Offset(start + filled as u64),
                        format!("unexpected end of file reading {what}"),
                    ))
                }
                Ok(k) => filled += k,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.bytes(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.bytes(&mut b, what)?;
        Ok(u64::from_le_bytes(b))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let at = self.offset;
        let len = self.u32(what)? as u64;
        let mut buf = Vec::new();
        let got = (&mut self.inner).take(len).read_to_end(&mut buf)? as u64;
        if got < len {
            return Err(Error::parse_at(
                Position::Offset(self.offset + got),
                format!("unexpected end of file reading {what}"),
            ));
        }
        self.offset += len;
        String::from_utf8(buf).map_err(|_| Error::parse_at(Position::Offset(at), format!("{what} is not UTF-8")))
    }

    fn header(&mut self, magic: [u8; 4]) -> Result<(usize, u64)> {
        let mut found = [0u8; 4];
        self.bytes(&mut found, "magic")?;
        if found != magic {
            return Err(Error::BadMagic { expected: magic, found });
        }
        let version = self.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::BadVersion(version));
        }
        let dim = self.u32("dimension")?;
        if dim == 0 {
            return Err(Error::parse_at(Position::Offset(8), "dimension is zero"));
        }
        Ok((dim as usize, self.u64("record count")?))
    }

    fn expect_end(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        loop {
            match self.inner.read(&mut probe) {
                Ok(0) => return Ok(()),
                Ok(_) => {
                    return Err(Error::parse_at(
                        Position::Offset(self.offset),
                        "trailing bytes after the declared records",
                    ))
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
}

pub fn read_features_binary<R: Read>(reader: R) -> Result<Vec<FeatureRecord>> {
    let mut r = Framed::new(reader);
    let (dim, count) = r.header(FEATURE_MAGIC)?;
    let mut records = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    for _ in 0..count {
        let at = r.offset;
        let image_id = r.string("image_id")?;
        let category_id = r.string("category_id")?;
        r.bytes(&mut raw, "feature vector")?;
        let vector = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let record = FeatureRecord {
            image_id,
            category_id,
            vector,
        };
        record
            .validate()
            .map_err(|e| Error::parse_at(Position::Offset(at), e.to_string()))?;
        records.push(record);
    }
    r.expect_end()?;
    Ok(records)
}

/// Components are stored as `f32`.
pub fn write_features_binary(writer: &mut dyn Write, records: &[FeatureRecord]) -> Result<()> {
    let dim = common_dim(records)?;
    writer.write_all(&FEATURE_MAGIC)?;
    writer.write_all(&FORMAT_VERSION.to_le_bytes())?;
    writer.write_all(&dim_u32(dim)?.to_le_bytes())?;
    writer.write_all(&(records.len() as u64).to_le_bytes())?;
    for r in records {
        write_string(writer, &r.image_id)?;
        write_string(writer, &r.category_id)?;
        for v in &r.vector {
            writer.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

fn dim_u32(dim: usize) -> Result<u32> {
    u32::try_from(dim).map_err(|_| Error::InvalidParameter(format!("dimension {dim} exceeds u32")))
}

fn write_string(w: &mut dyn Write, s: &str) -> Result<()> {
    let len = u32::try_from(s.len()).map_err(|_| Error::InvalidRecord("identifier too long".into()))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// centroid files

pub fn write_centroids(writer: &mut dyn Write, domain: &Domain) -> Result<()> {
    writer.write_all(&CENTROID_MAGIC)?;
    writer.write_all(&FORMAT_VERSION.to_le_bytes())?;
    writer.write_all(&dim_u32(domain.dim())?.to_le_bytes())?;
    writer.write_all(&(domain.len() as u64).to_le_bytes())?;
    for c in domain.centroids() {
        write_string(writer, &c.category_id)?;
        writer.write_all(&c.count.to_le_bytes())?;
        for v in &c.mean {
            writer.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_centroids<R: Read>(reader: R) -> Result<Domain> {
    let mut r = Framed::new(reader);
    let (dim, count) = r.header(CENTROID_MAGIC)?;
    let mut parts: Vec<(String, Vec<f64>, u64)> = Vec::new();
    let mut raw = vec![0u8; dim * 8];
    for _ in 0..count {
        let at = r.offset;
        let id = r.string("category_id")?;
        if let Some(prev) = parts.last() {
            if prev.0 >= id {
                return Err(Error::parse_at(
                    Position::Offset(at),
                    format!("category `{id}` is not in strictly ascending order"),
                ));
            }
        }
        let n = r.u64("count")?;
        r.bytes(&mut raw, "mean")?;
        let mean: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        parts.push((id, mean, n));
    }
    r.expect_end()?;
    Domain::from_parts(dim, parts)
}

pub fn save_centroids(domain: &Domain, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_centroids(w, domain))
}

pub fn load_centroids(path: &Path) -> Result<Domain> {
    read_centroids(BufReader::new(File::open(path)?))
}

// ---------------------------------------------------------------------------
// index and manifest CSVs

pub fn read_index<R: Read>(reader: R) -> Result<CategoryCounts> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let columns: Vec<&str> = header.iter().collect();
    match columns.as_slice() {
        ["image_id", "category_id", ..] => {
            let mut pairs = Vec::new();
            for row in rdr.records() {
                let row = row.map_err(csv_error)?;
                if row.len() < 2 {
                    let line = row.position().map(|p| p.line()).unwrap_or(0);
                    return Err(Error::parse_at(Position::Line(line), "expected image_id,category_id"));
                }
                pairs.push((row[1].to_string(), row[0].to_string()));
            }
            CategoryCounts::from_images(pairs)
        }
        ["category_id", "count"] => {
            let mut entries = Vec::new();
            for row in rdr.records() {
                let row = row.map_err(csv_error)?;
                let line = row.position().map(|p| p.line()).unwrap_or(0);
                if row.len() != 2 {
                    return Err(Error::parse_at(Position::Line(line), "expected category_id,count"));
                }
                let count = row[1].trim().parse::<u64>().map_err(|_| {
                    Error::parse_at(Position::Line(line), format!("bad count {:?}", &row[1]))
                })?;
                entries.push((row[0].to_string(), count));
            }
            CategoryCounts::from_counts(entries)
        }
        _ => Err(Error::parse_at(
            Position::Line(1),
            "index header must start with image_id,category_id or be category_id,count",
        )),
    }
}

pub fn load_index(path: &Path) -> Result<CategoryCounts> {
    read_index(BufReader::new(File::open(path)?))
}

pub fn write_manifest_csv(writer: &mut dyn Write, manifest: &SubsetManifest) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(["category_id", "image_id"]).map_err(csv_error)?;
    for (category, image) in manifest.rows() {
        w.write_record([category, image]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
