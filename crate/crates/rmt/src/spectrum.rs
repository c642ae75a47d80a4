//! Eigenvalue samples and their on-disk form: an `re,im` CSV plus a JSON
//! metadata sidecar.

use std::fmt;
use std::io::{BufRead, Write};

use brown_core::export::format_number;
use brown_core::measure::MeasureFile;
use brown_core::SpectralMeasure;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Additive,
    Multiplicative,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Additive => "additive",
            Model::Multiplicative => "multiplicative",
        })
    }
}

/// How a spectrum was produced. `measure` is the initial law, so that a
/// spectrum file can be compared without a separate measure file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub model: Model,
    pub n: usize,
    pub t: f64,
    pub seed: u64,
    pub steps: Option<usize>,
    pub measure: MeasureFile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub meta: SpectrumMeta,
}

impl EmpiricalSpectrum {
    pub fn model(&self) -> Model {
        self.meta.model
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn t(&self) -> f64 {
        self.meta.t
    }

    pub fn measure(&self) -> Result<SpectralMeasure> {
        Ok(self.meta.measure.clone().into_measure()?)
    }

    pub fn mean(&self) -> Complex64 {
        self.eigenvalues.iter().sum::<Complex64>() / self.eigenvalues.len() as f64
    }

    /// Fraction of eigenvalues whose modulus satisfies `pred`.
    pub fn fraction_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        let hits = self.eigenvalues.iter().filter(|z| pred(z.norm())).count();
        hits as f64 / self.eigenvalues.len() as f64
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "re,im")?;
        for z in &self.eigenvalues {
            writeln!(out, "{},{}", format_number(z.re), format_number(z.im))?;
        }
        Ok(())
    }

    pub fn write_meta<W: Write>(&self, out: &mut W) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.meta)?;
        writeln!(out)?;
        Ok(())
    }

    /// Reads an `re,im` CSV and checks it against the metadata.
    pub fn read<R: BufRead>(csv: R, meta: SpectrumMeta) -> Result<Self> {
        let mut lines = csv.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("re,im") {
            return Err(Error::MalformedSpectrum("missing header \"re,im\"".into()));
        }
        let mut eigenvalues = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::MalformedSpectrum(format!("line {}: {line:?}", i + 2));
            let (re, im) = line.split_once(',').ok_or_else(bad)?;
            let re: f64 = re.trim().parse().map_err(|_| bad())?;
            let im: f64 = im.trim().parse().map_err(|_| bad())?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(bad());
            }
            eigenvalues.push(Complex64::new(re, im));
        }
        if eigenvalues.len() != meta.n {
            return Err(Error::MalformedSpectrum(format!(
                "{} eigenvalues for n = {}",
                eigenvalues.len(),
                meta.n
            )));
        }
        Ok(EmpiricalSpectrum { eigenvalues, meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmpiricalSpectrum {
        EmpiricalSpectrum {
            eigenvalues: vec![Complex64::new(0.5, -1.0 / 3.0), Complex64::new(-2.0, 1e-17)],
            meta: SpectrumMeta {
                model: Model::Additive,
                n: 2,
                t: 1.0,
                seed: 9,
                steps: None,
                measure: SpectralMeasure::point_mass(0.0).unwrap().to_file_format(),
            },
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = EmpiricalSpectrum::read(&buf[..], s.meta.clone()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn meta_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_meta(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["model"], "additive");
        assert_eq!(v["steps"], serde_json::Value::Null);
        let meta: SpectrumMeta = serde_json::from_slice(&buf).unwrap();
        assert_eq!(meta, s.meta);
    }

    #[test]
    fn rejects_bad_files() {
        let meta = sample().meta;
        assert!(EmpiricalSpectrum::read(&b"x,y\n1,2\n2,3\n"[..], meta.clone()).is_err());
        assert!(EmpiricalSpectrum::read(&b"re,im\n1,2\n"[..], meta.clone()).is_err());
        assert!(EmpiricalSpectrum::read(&b"re,im\n1,2\n1,nan\n"[..], meta.clone()).is_err());
        assert!(EmpiricalSpectrum::read(&b"re,im\n1;2\n1,2\n"[..], meta).is_err());
    }
}
