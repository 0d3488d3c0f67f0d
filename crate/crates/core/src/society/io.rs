//! Flat-file event formats.
//!
//! CSV: header `time,initiator,receiver,kind,strength,tags`, tags joined
//! with `;`. JSON lines: one object per line with the same field names and
//! `tags` as an array.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::event::{EventKind, InteractionEvent, Timestamp};
use super::log::InteractionLog;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["time", "initiator", "receiver", "kind", "strength", "tags"];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    time: Timestamp,
    initiator: String,
    receiver: String,
    kind: String,
    strength: f64,
    #[serde(default)]
    tags: String,
}

fn row_to_event(row: CsvRow) -> Result<InteractionEvent> {
    let kind: EventKind = row.kind.parse()?;
    let tags = row
        .tags
        .split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect();
    let e = InteractionEvent {
        time: row.time,
        initiator: row.initiator.into(),
        receiver: row.receiver.into(),
        kind,
        strength: row.strength,
        tags,
    };
    e.validate()?;
    Ok(e)
}

/// Read CSV events and bulk-load them (sorted).
pub fn read_csv<R: Read>(reader: R) -> Result<InteractionLog> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers
        .iter()
        .take(5)
        .ne(CSV_HEADER.iter().take(5).copied())
    {
        return Err(Error::Parse(format!(
            "expected header {}, got {}",
            CSV_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut events = Vec::new();
    for (line, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
        events.push(row_to_event(row)?);
    }
    InteractionLog::from_events(events)
}

pub fn write_csv<W: Write>(events: &[InteractionEvent], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for e in events {
        wtr.write_record([
            e.time.to_string(),
            e.initiator.to_string(),
            e.receiver.to_string(),
            e.kind.to_string(),
            e.strength.to_string(),
            e.tags.join(";"),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<InteractionLog> {
    let mut events = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: InteractionEvent = serde_json::from_str(&line)
            .map_err(|err| Error::Parse(format!("line {}: {err}", n + 1)))?;
        events.push(e);
    }
    InteractionLog::from_events(events)
}

pub fn write_jsonl<W: Write>(events: &[InteractionEvent], mut writer: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut writer, e)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Load a CSV or JSON-lines file, chosen by extension (`.jsonl`/`.ndjson`
/// mean JSON lines, anything else CSV).
pub fn read_path(path: &std::path::Path) -> Result<InteractionLog> {
    let file = std::fs::File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") => read_jsonl(std::io::BufReader::new(file)),
        _ => read_csv(file),
    }
}

pub fn to_csv_string(events: &[InteractionEvent]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(events, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}
