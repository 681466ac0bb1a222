//! Time-tag file formats.
//!
//! Binary (`.qtt`): a 16-byte header followed by one little-endian `u64`
//! timestamp per record.
//!
//! | offset | size | field                      |
//! |--------|------|----------------------------|
//! | 0      | 4    | magic `QTT1`               |
//! | 4      | 4    | channel id, `u32` LE       |
//! | 8      | 8    | duration in ps, `u64` LE   |
//!
//! Text: one decimal timestamp per line. An optional comment line
//! `# channel=<id> duration=<ps>` carries the header; other `#` lines and
//! blank lines are ignored. Without a duration the largest tag (or 1 for an
//! empty file) is used.

use std::io::{BufRead, Read, Write};

use super::TimeTagStream;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"QTT1";
pub const HEADER_LEN: usize = 16;

pub fn write_binary<W: Write>(stream: &TimeTagStream, mut w: W) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4..8].copy_from_slice(&stream.channel().to_le_bytes());
    header[8..].copy_from_slice(&stream.duration().to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(stream.len() * 8);
    for &t in stream.tags() {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<TimeTagStream> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| Error::format("time-tag file shorter than its 16-byte header"))?;
    if header[..4] != MAGIC {
        return Err(Error::format("bad magic, expected QTT1"));
    }
    let channel = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let duration = u64::from_le_bytes(header[8..].try_into().unwrap());
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 8 != 0 {
        return Err(Error::format(format!(
            "record section is {} bytes, not a multiple of 8",
            body.len()
        )));
    }
    let tags: Vec<u64> = body
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    TimeTagStream::from_tags(tags, channel, duration)
}

pub fn write_text<W: Write>(stream: &TimeTagStream, mut w: W) -> Result<()> {
    writeln!(w, "# channel={} duration={}", stream.channel(), stream.duration())?;
    for &t in stream.tags() {
        writeln!(w, "{t}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_text<R: BufRead>(r: R) -> Result<TimeTagStream> {
    let mut channel = 0u32;
    let mut duration = None;
    let mut tags = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for field in comment.split_whitespace() {
                if let Some(v) = field.strip_prefix("channel=") {
                    channel = v
                        .parse()
                        .map_err(|_| Error::format(format!("line {}: bad channel `{v}`", lineno + 1)))?;
                } else if let Some(v) = field.strip_prefix("duration=") {
                    duration = Some(
                        v.parse::<u64>()
                            .map_err(|_| Error::format(format!("line {}: bad duration `{v}`", lineno + 1)))?,
                    );
                }
            }
            continue;
        }
        let t = line
            .parse::<u64>()
            .map_err(|_| Error::format(format!("line {}: `{line}` is not a ps timestamp", lineno + 1)))?;
        tags.push(t);
    }
    let duration = duration.unwrap_or_else(|| tags.iter().copied().max().unwrap_or(1).max(1));
    TimeTagStream::from_tags(tags, channel, duration)
}
