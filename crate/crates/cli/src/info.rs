use std::fs;
use std::io::Write;

use serde::Serialize;
use tensorinf_core::io::{parse_dataset_header, parse_tensor, TNSR_MAGIC};
use tensorinf_simlab::GENERATOR_ID;

use crate::args::{InfoArgs, InfoFormat};
use crate::error::CliResult;
use crate::output::json_bytes;

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum FileInfo {
    Tensor { dims: [usize; 3], entries: usize, frobenius_norm: f64 },
    Dataset { dims: [usize; 3], n: usize, sigma: Option<f64> },
}

#[derive(Serialize)]
struct InfoReport {
    generator: &'static str,
    seed: u64,
    input: String,
    file: FileInfo,
}

pub fn run(a: &InfoArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let bytes = fs::read(&a.input)?;
    let file = if bytes.starts_with(TNSR_MAGIC) {
        let t = parse_tensor(&bytes)?;
        FileInfo::Tensor { dims: t.dims(), entries: t.len(), frobenius_norm: t.frobenius_norm() }
    } else {
        let (header, _) = parse_dataset_header(&bytes)?;
        FileInfo::Dataset { dims: header.dims, n: header.n, sigma: header.sigma }
    };
    match a.format {
        InfoFormat::Json => {
            let report = InfoReport { generator: GENERATOR_ID, seed: 0, input: a.input.display().to_string(), file };
            stdout.write_all(&json_bytes(&report)?)?;
        }
        InfoFormat::Text => match file {
            FileInfo::Tensor { dims, entries, frobenius_norm } => {
                writeln!(stdout, "kind: tensor")?;
                writeln!(stdout, "dims: ({}, {}, {})", dims[0], dims[1], dims[2])?;
                writeln!(stdout, "entries: {entries}")?;
                writeln!(stdout, "frobenius_norm: {frobenius_norm}")?;
            }
            FileInfo::Dataset { dims, n, sigma } => {
                writeln!(stdout, "kind: dataset")?;
                writeln!(stdout, "dims: ({}, {}, {})", dims[0], dims[1], dims[2])?;
                writeln!(stdout, "n: {n}")?;
                match sigma {
                    Some(s) => writeln!(stdout, "sigma: {s}")?,
                    None => writeln!(stdout, "sigma: unknown")?,
                }
            }
        },
    }
    Ok(())
}
