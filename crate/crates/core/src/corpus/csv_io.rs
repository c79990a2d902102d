use std::io::{Read, Write};

use super::record::EtdRecord;
use super::CorpusError;

pub const HEADER: [&str; 11] = [
    "identifier_uri",
    "title",
    "abstract",
    "abstract_general",
    "subject_terms",
    "discipline",
    "department",
    "degree",
    "degree_level",
    "type",
    "college",
];

pub const SUBJECT_SEPARATOR: &str = "; ";

pub fn write_csv<W: Write>(out: W, records: &[EtdRecord]) -> Result<(), CorpusError> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        let subjects = r.subject_terms.join(SUBJECT_SEPARATOR);
        let college = r.college.map(|c| c.code()).unwrap_or("");
        w.write_record([
            r.identifier_uri.as_str(),
            &r.title,
            &r.abstract_text,
            &r.abstract_general,
            &subjects,
            &r.discipline,
            &r.department,
            &r.degree,
            r.degree_level.as_str(),
            r.etd_type.as_str(),
            college,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<EtdRecord>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CorpusError::Schema(format!(
            "expected header {:?}, found {:?}",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or_default().to_string();
        let invalid = |field: &'static str, value: String| CorpusError::InvalidField { field, value };
        let subjects = get(4);
        let level = get(8);
        let kind = get(9);
        let college = get(10);
        records.push(EtdRecord {
            identifier_uri: get(0),
            title: get(1),
            abstract_text: get(2),
            abstract_general: get(3),
            subject_terms: if subjects.is_empty() {
                Vec::new()
            } else {
                subjects.split(SUBJECT_SEPARATOR).map(str::to_string).collect()
            },
            discipline: get(5),
            department: get(6),
            degree: get(7),
            degree_level: level.parse().map_err(|_| invalid("degree_level", level.clone()))?,
            etd_type: kind.parse().map_err(|_| invalid("type", kind.clone()))?,
            college: if college.is_empty() {
                None
            } else {
                Some(college.parse().map_err(|_| invalid("college", college.clone()))?)
            },
        });
        tracing::trace!(row = line + 1, "read csv row");
    }
    Ok(records)
}

pub fn write_csv_file(path: &std::path::Path, records: &[EtdRecord]) -> Result<(), CorpusError> {
    let file = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), records)
}

pub fn read_csv_file(path: &std::path::Path) -> Result<Vec<EtdRecord>, CorpusError> {
    read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
}
