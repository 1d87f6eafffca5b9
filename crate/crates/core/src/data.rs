//! Paired observations of two variables and their file formats.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::stats;

pub const MIN_SAMPLES: usize = 3;

/// Paired samples of observed variables A and B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateDataset {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl BivariateDataset {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { a: a.len(), b: b.len() });
        }
        if a.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: a.len() });
        }
        if let Some(i) = a
            .iter()
            .zip(&b)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(BivariateDataset { a, b })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.a.iter().copied().zip(self.b.iter().copied())
    }

    /// Dataset with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        BivariateDataset { a: self.b.clone(), b: self.a.clone() }
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let a = indices.iter().map(|&i| self.a[i]).collect();
        let b = indices.iter().map(|&i| self.b[i]).collect();
        BivariateDataset::new(a, b)
    }
}

/// Shift each column to mean 0 and scale it to unit sample variance.
pub fn normalize_unit_variance(d: &BivariateDataset) -> Result<BivariateDataset> {
    let a = stats::standardize(&d.a).ok_or(Error::ZeroVariance("a"))?;
    let b = stats::standardize(&d.b).ok_or(Error::ZeroVariance("b"))?;
    Ok(BivariateDataset { a, b })
}

/// Number of rows kept by [`subsample`] for a dataset of `n` rows.
pub fn subsample_size(n: usize, fraction: f64) -> usize {
    (fraction * n as f64).floor() as usize
}

/// `floor(fraction * n)` rows drawn uniformly without replacement.
pub fn subsample(d: &BivariateDataset, fraction: f64, seed: RngSeed) -> Result<BivariateDataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("subsample fraction {fraction} not in (0, 1]")));
    }
    let m = subsample_size(d.len(), fraction);
    if m < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: m });
    }
    let idx = seed.rng().sample_indices(d.len(), m);
    d.select(&idx)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairFormat {
    /// Two whitespace-separated numeric columns, no header.
    TwoColumnWhitespace,
    /// Comma-separated with a header row; the two named columns are read.
    CsvWithHeader { col_a: String, col_b: String },
}

#[derive(Debug, Clone)]
pub struct LoadedPair {
    pub data: BivariateDataset,
    pub skipped: usize,
}

pub fn load_pair_file(path: impl AsRef<Path>, format: &PairFormat) -> Result<LoadedPair> {
    let text = fs::read_to_string(path)?;
    parse_pairs(&text, format)
}

pub fn parse_pairs(text: &str, format: &PairFormat) -> Result<LoadedPair> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut skipped = 0;
    let mut push = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) if x.is_finite() && y.is_finite() => {
            a.push(x);
            b.push(y);
        }
        _ => skipped += 1,
    };
    match format {
        PairFormat::TwoColumnWhitespace => {
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let mut fields = line.split_whitespace().map(|f| f.parse::<f64>().ok());
                push(fields.next().flatten(), fields.next().flatten());
            }
        }
        PairFormat::CsvWithHeader { col_a, col_b } => {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let headers = reader
                .headers()
                .map_err(|e| Error::Format(e.to_string()))?
                .clone();
            let find = |name: &str| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Format(format!("column `{name}` not in header")))
            };
            let (ia, ib) = (find(col_a)?, find(col_b)?);
            for record in reader.records() {
                match record {
                    Ok(r) => {
                        let get = |i: usize| r.get(i).and_then(|f| f.parse::<f64>().ok());
                        push(get(ia), get(ib));
                    }
                    Err(_) => push(None, None),
                }
            }
        }
    }
    if a.len() < MIN_SAMPLES {
        return Err(Error::Format(format!(
            "only {} valid rows, need at least {MIN_SAMPLES}",
            a.len()
        )));
    }
    Ok(LoadedPair { data: BivariateDataset::new(a, b)?, skipped })
}

/// Write as two whitespace-separated columns with 17 significant digits.
pub fn write_pair_file(path: impl AsRef<Path>, d: &BivariateDataset) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    f.write_all(format_pairs(d).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn format_pairs(d: &BivariateDataset) -> String {
    let mut out = String::with_capacity(d.len() * 48);
    for (x, y) in d.rows() {
        out.push_str(&format!("{x:.16e} {y:.16e}\n"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictTag {
    AtoB,
    BtoA,
    CommonCause,
    Undecided,
}

impl VerdictTag {
    /// Tag after exchanging the roles of A and B.
    pub fn mirrored(self) -> Self {
        match self {
            VerdictTag::AtoB => VerdictTag::BtoA,
            VerdictTag::BtoA => VerdictTag::AtoB,
            t => t,
        }
    }
}

impl fmt::Display for VerdictTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictTag::AtoB => "A->B",
            VerdictTag::BtoA => "B->A",
            VerdictTag::CommonCause => "common cause",
            VerdictTag::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalVerdict {
    pub tag: VerdictTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CausalVerdict {
    pub fn new(tag: VerdictTag) -> Self {
        CausalVerdict { tag, detail: None }
    }

    pub fn with_detail(tag: VerdictTag, detail: impl Into<String>) -> Self {
        CausalVerdict { tag, detail: Some(detail.into()) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(a: &[f64], b: &[f64]) -> BivariateDataset {
        BivariateDataset::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            BivariateDataset::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            BivariateDataset::new(vec![1.0, 2.0], vec![1.0, 2.0]),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            BivariateDataset::new(vec![1.0, f64::NAN, 3.0], vec![1.0, 2.0, 3.0]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn two_point_standardization() {
        // construct directly: two rows is below the dataset minimum
        let d = BivariateDataset { a: vec![0.0, 2.0], b: vec![1.0, 3.0] };
        let n = normalize_unit_variance(&d).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (got, want) in n.a().iter().chain(n.b()).zip([-h, h, -h, h]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let d = ds(&[1.0, 5.0, 2.0, 9.0], &[0.5, -1.0, 3.0, 2.0]);
        let once = normalize_unit_variance(&d).unwrap();
        let twice = normalize_unit_variance(&once).unwrap();
        for (x, y) in once.a().iter().chain(once.b()).zip(twice.a().iter().chain(twice.b())) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(stats::mean(once.a()).abs() < 1e-12);
        assert!((stats::variance(once.b()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_zero_variance() {
        let d = ds(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]);
        assert!(matches!(normalize_unit_variance(&d), Err(Error::ZeroVariance("a"))));
    }

    #[test]
    fn subsample_sizes_and_determinism() {
        let a: Vec<f64> = (0..250).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 1.0).collect();
        let d = ds(&a, &b);
        let s = subsample(&d, 0.95, RngSeed(11)).unwrap();
        assert_eq!(s.len(), 237);
        assert_eq!(s, subsample(&d, 0.95, RngSeed(11)).unwrap());
        assert!(s.rows().all(|(x, y)| y == 2.0 * x + 1.0));

        let full = subsample(&d, 1.0, RngSeed(2)).unwrap();
        let mut rows: Vec<_> = full.rows().map(|(x, y)| (x as i64, y as i64)).collect();
        rows.sort_unstable();
        let mut orig: Vec<_> = d.rows().map(|(x, y)| (x as i64, y as i64)).collect();
        orig.sort_unstable();
        assert_eq!(rows, orig);
    }

    #[test]
    fn subsample_too_small() {
        let d = ds(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(subsample(&d, 0.5, RngSeed(0)), Err(Error::TooFewSamples { .. })));
        assert!(subsample(&d, 0.0, RngSeed(0)).is_err());
    }

    #[test]
    fn parse_whitespace() {
        let p = parse_pairs("1 2\n3 4\n5 6\n", &PairFormat::TwoColumnWhitespace).unwrap();
        assert_eq!(p.data.a(), &[1.0, 3.0, 5.0]);
        assert_eq!(p.data.b(), &[2.0, 4.0, 6.0]);
        assert_eq!(p.skipped, 0);
    }

    #[test]
    fn parse_skips_bad_rows() {
        let p = parse_pairs("1 2\nx 4\n5\n\n7 8\n9 10\n", &PairFormat::TwoColumnWhitespace).unwrap();
        assert_eq!(p.data.a(), &[1.0, 7.0, 9.0]);
        assert_eq!(p.skipped, 2);
    }

    #[test]
    fn parse_csv_columns() {
        let text = "mpg,cylinders,acceleration\n18,8,12.0\n15,8,11.5\n?,4,19\n36,4,17.8\n";
        let fmt = PairFormat::CsvWithHeader { col_a: "mpg".into(), col_b: "acceleration".into() };
        let p = parse_pairs(text, &fmt).unwrap();
        assert_eq!(p.data.a(), &[18.0, 15.0, 36.0]);
        assert_eq!(p.data.b(), &[12.0, 11.5, 17.8]);
        assert_eq!(p.skipped, 1);
        let missing = PairFormat::CsvWithHeader { col_a: "mpg".into(), col_b: "weight".into() };
        assert!(matches!(parse_pairs(text, &missing), Err(Error::Format(_))));
    }

    #[test]
    fn empty_file_is_format_error() {
        assert!(matches!(parse_pairs("", &PairFormat::TwoColumnWhitespace), Err(Error::Format(_))));
    }

    #[test]
    fn verdict_mirror() {
        assert_eq!(VerdictTag::AtoB.mirrored(), VerdictTag::BtoA);
        assert_eq!(VerdictTag::CommonCause.mirrored(), VerdictTag::CommonCause);
    }
}
