//! JSON analysis reports.
//!
//! Keys appear in struct declaration order and every real is written with
//! 17 significant digits (`d.dddddddddddddddde±x`), so two reports with the
//! same numbers are byte-identical and parse back to the same bits.

use std::io::{self, Write};
use std::path::Path;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::SessionIoError;
use crate::lattice::MeanObservation;
use crate::maxent::EntropyReport;
use crate::stats::{ChiSquareReport, DeviationReport};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct SessionIdentity {
    pub treatment_id: u32,
    pub group_id: u32,
    /// Where the session came from: a file path or an in-process label.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct AnalysisReport {
    pub session: SessionIdentity,
    pub n: u32,
    pub rounds: u64,
    pub mean: MeanObservation,
    pub entropy: EntropyReport,
    pub chi_square: ChiSquareReport,
    pub deviation: DeviationReport,
    pub tool_version: String,
    /// SHA-256 of the session's canonical CSV text.
    pub input_digest: String,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self, SessionIoError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Pretty printing with fixed-width reals.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes any report type with the fixed number format, LF-terminated.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize + ?Sized>(
    value: &T,
    path: impl AsRef<Path>,
) -> Result<(), SessionIoError> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(value)).map_err(|e| SessionIoError::io(path, e))
}
