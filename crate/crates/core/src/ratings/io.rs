use std::io::{Read, Write};
use std::path::Path;

use super::{validate_records, RatingRecord, RatingsError};

const HEADER: [&str; 7] = [
    "rater_id",
    "rater_affiliation",
    "system_id",
    "prompt_id",
    "foreground_fit",
    "background_fit",
    "quality",
];

/// Parses the ratings CSV, checking header, score ranges and uniqueness.
pub fn read_ratings<R: Read>(source: R) -> Result<Vec<RatingRecord>, RatingsError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| RatingsError::Csv { row: 1, message: e.to_string() })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(RatingsError::Csv {
            row: 1,
            message: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<RatingRecord>().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| RatingsError::Csv { row, message: e.to_string() })?;
        rec.validate()
            .map_err(|e| RatingsError::Csv { row, message: e.to_string() })?;
        out.push(rec);
    }
    validate_records(&out)?;
    Ok(out)
}

pub fn read_ratings_file(path: &Path) -> Result<Vec<RatingRecord>, RatingsError> {
    let f = std::fs::File::open(path).map_err(|e| RatingsError::Io(format!("{}: {e}", path.display())))?;
    read_ratings(f)
}

pub fn write_ratings<W: Write>(records: &[RatingRecord], sink: W) -> Result<(), RatingsError> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| RatingsError::Io(e.to_string());
    if records.is_empty() {
        w.write_record(HEADER).map_err(io)?;
    }
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| RatingsError::Io(e.to_string()))
}
