//! Deterministic file output: every float carries 17 significant digits and
//! every document embeds the hash of the configuration that produced it.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use chol_lag::coords::EulerianPair;

use crate::error::CliError;

/// Pretty JSON with floats written as `d.dddddddddddddddde±x`.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", f64::from(value))
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

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, FullPrecision(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("in-memory serialization does not fail");
    out.push(b'\n');
    out
}

/// SHA-256 of the compact JSON form of `value`, hex encoded.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("in-memory serialization does not fail");
    hex::encode(Sha256::digest(&bytes))
}

/// A document tagged with the hash of its configuration.
#[derive(Serialize)]
pub struct Tagged<'a, T: Serialize> {
    pub config_hash: &'a str,
    #[serde(flatten)]
    pub body: T,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Columns `x, u, density`; the density of a node is that of the cell to its
/// right (the last node repeats the last cell). Atoms are not representable
/// here and are left to the JSON snapshot.
pub fn write_pair_csv(path: &Path, p: &EulerianPair) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(path, io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["x", "u", "density"]).map_err(io)?;
    let cells = p.mu.density.len();
    for i in 0..p.n() {
        let d = p.mu.density[i.min(cells - 1)];
        w.write_record([
            format!("{:.16e}", p.x[i]),
            format!("{:.16e}", p.u[i]),
            format!("{d:.16e}"),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::Config(format!("{} is empty", path.display())));
    }
    Ok(text)
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
