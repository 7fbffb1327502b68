//! Evaluation statistics: frequency consolidation of elicited goals,
//! Wilcoxon signed-rank test (normal approximation and exact
//! enumeration), Cohen's kappa and mean/SD preference summaries.

use std::collections::{BTreeMap, HashMap};

use statrs::distribution::{ContinuousCDF, Normal};

use crate::diag::Diagnostic;
use crate::model::AttachmentDriver;

/// One raw elicited emotional goal, already assigned to its canonical
/// group by the analysts.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRecord {
    pub raw_text: String,
    pub group: String,
    pub sub_group: Option<String>,
    pub driver: AttachmentDriver,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub group: String,
    pub sub_group: Option<String>,
    pub frequency: u32,
    pub driver: AttachmentDriver,
}

/// Consolidated grouping, sorted by frequency descending then group name.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub rows: Vec<FrequencyRow>,
}

impl FrequencyTable {
    pub fn total(&self) -> u32 {
        self.rows.iter().map(|r| r.frequency).sum()
    }
}

/// Groups raw records by (group, sub-group, driver) and counts them.
pub fn group_frequencies(records: &[FrequencyRecord]) -> Result<FrequencyTable, Diagnostic> {
    if records.is_empty() {
        return Err(Diagnostic::error("S001", "no frequency records to group"));
    }
    let mut counts: Vec<(FrequencyRow, u32)> = Vec::new();
    for record in records {
        let key = (&record.group, &record.sub_group, record.driver);
        match counts
            .iter_mut()
            .find(|(row, _)| (&row.group, &row.sub_group, row.driver) == key)
        {
            Some((_, n)) => *n += 1,
            None => counts.push((
                FrequencyRow {
                    group: record.group.clone(),
                    sub_group: record.sub_group.clone(),
                    frequency: 0,
                    driver: record.driver,
                },
                1,
            )),
        }
    }
    let mut rows: Vec<FrequencyRow> = counts
        .into_iter()
        .map(|(mut row, n)| {
            row.frequency = n;
            row
        })
        .collect();
    rows.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then_with(|| a.group.cmp(&b.group))
            .then_with(|| a.sub_group.cmp(&b.sub_group))
    });
    Ok(FrequencyTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedSample {
    pub baseline: f64,
    pub treatment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    NormalApprox,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    pub n_input: usize,
    /// Pairs remaining after zero differences are discarded.
    pub n_effective: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// min(w_plus, w_minus).
    pub statistic_t: f64,
    /// Standard normal deviate; set for the normal method only.
    pub z: Option<f64>,
    pub p_two_sided: f64,
    pub method: WilcoxonMethod,
}

/// Exact enumeration is limited to this many effective pairs.
pub const EXACT_LIMIT: usize = 20;

/// Paired two-sided Wilcoxon signed-rank test.
///
/// Differences are treatment − baseline; zero differences are discarded;
/// tied magnitudes get mid-ranks. The normal method uses
/// z = (T − n(n+1)/4) / sqrt(n(n+1)(2n+1)/24) without continuity
/// correction and p = 2·Φ(z). With `tie_corrected_variance` the variance
/// subtracts Σ(t³−t)/48 over tie groups. The exact method enumerates the
/// distribution of W+ over all 2ⁿ sign assignments of the observed ranks
/// and reports p = 2·P(W+ ≤ T), capped at 1.
pub fn wilcoxon_signed_rank(
    pairs: &[PairedSample],
    method: WilcoxonMethod,
    tie_corrected_variance: bool,
) -> Result<WilcoxonResult, Diagnostic> {
    let n_input = pairs.len();
    let mut diffs: Vec<f64> = pairs
        .iter()
        .map(|p| p.treatment - p.baseline)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Diagnostic::error(
            "S002",
            "all paired differences are zero; the signed-rank test is undefined",
        ));
    }
    let n = diffs.len();
    if method == WilcoxonMethod::Exact && n > EXACT_LIMIT {
        return Err(Diagnostic::error(
            "S003",
            format!("exact method supports at most {EXACT_LIMIT} nonzero pairs, got {n}"),
        ));
    }

    // Ranks in doubled units so mid-ranks stay integral.
    diffs.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite differences"));
    let mut doubled_ranks: Vec<(u64, bool)> = Vec::with_capacity(n); // (2*rank, positive?)
    let mut tie_sizes: Vec<u64> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && diffs[j].abs() == diffs[i].abs() {
            j += 1;
        }
        let doubled_mid = (i as u64 + 1) + (j as u64); // (first + last) of 1-based run
        for d in &diffs[i..j] {
            doubled_ranks.push((doubled_mid, *d > 0.0));
        }
        tie_sizes.push((j - i) as u64);
        i = j;
    }

    let w_plus: f64 = doubled_ranks
        .iter()
        .filter(|(_, pos)| *pos)
        .fold(0.0, |acc, (r, _)| acc + *r as f64)
        / 2.0;
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic_t = w_plus.min(w_minus);

    match method {
        WilcoxonMethod::NormalApprox => {
            let nf = n as f64;
            let mean = nf * (nf + 1.0) / 4.0;
            let mut variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
            if tie_corrected_variance {
                let correction: f64 = tie_sizes
                    .iter()
                    .map(|&t| (t * t * t - t) as f64)
                    .sum::<f64>()
                    / 48.0;
                variance -= correction;
            }
            if variance <= 0.0 {
                return Err(Diagnostic::error(
                    "S002",
                    "variance of the rank sum is zero; the normal approximation is undefined",
                ));
            }
            let z = (statistic_t - mean) / variance.sqrt();
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            let p = (2.0 * normal.cdf(z)).min(1.0);
            Ok(WilcoxonResult {
                n_input,
                n_effective: n,
                w_plus,
                w_minus,
                statistic_t,
                z: Some(z),
                p_two_sided: p,
                method,
            })
        }
        WilcoxonMethod::Exact => {
            let p = exact_p(&doubled_ranks.iter().map(|(r, _)| *r).collect::<Vec<_>>(), statistic_t);
            Ok(WilcoxonResult {
                n_input,
                n_effective: n,
                w_plus,
                w_minus,
                statistic_t,
                z: None,
                p_two_sided: p,
                method,
            })
        }
    }
}

/// Exact two-sided p by dynamic programming over the distribution of the
/// doubled positive rank sum.
fn exact_p(doubled_ranks: &[u64], statistic_t: f64) -> f64 {
    let n = doubled_ranks.len();
    let max_sum: u64 = doubled_ranks.iter().sum();
    // counts[s] = number of sign assignments with doubled W+ equal to s
    let mut counts = vec![0u64; max_sum as usize + 1];
    counts[0] = 1;
    for &r in doubled_ranks {
        for s in (r as usize..counts.len()).rev() {
            counts[s] += counts[s - r as usize];
        }
    }
    let threshold = (2.0 * statistic_t).round() as usize;
    let at_or_below: u64 = counts[..=threshold.min(counts.len() - 1)].iter().sum();
    let total = (1u64) << n;
    (2.0 * at_or_below as f64 / total as f64).min(1.0)
}

pub const KAPPA_THRESHOLD: f64 = 0.70;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

impl Verdict {
    pub fn from_kappa(kappa: f64) -> Verdict {
        if kappa >= KAPPA_THRESHOLD {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaResult {
    /// Observed agreement.
    pub p_o: f64,
    /// Chance agreement from the raters' marginals.
    pub p_e: f64,
    pub kappa: f64,
    pub categories: Vec<String>,
    pub verdict: Verdict,
    /// Both raters constant and equal: kappa is 1 by convention.
    pub degenerate: bool,
}

/// Chance-corrected inter-rater agreement over two equal-length label
/// sequences. The consistency verdict uses the 0.70 threshold.
pub fn cohens_kappa(rater_a: &[String], rater_b: &[String]) -> Result<KappaResult, Diagnostic> {
    if rater_a.is_empty() || rater_a.len() != rater_b.len() {
        return Err(Diagnostic::error(
            "S004",
            format!(
                "rater label sequences must have equal nonzero lengths, got {} and {}",
                rater_a.len(),
                rater_b.len()
            ),
        ));
    }
    let n = rater_a.len() as f64;
    let agree = rater_a.iter().zip(rater_b).filter(|(a, b)| a == b).count() as f64;
    let p_o = agree / n;

    let mut categories: Vec<String> = rater_a.iter().chain(rater_b).cloned().collect();
    categories.sort();
    categories.dedup();

    fn marginal<'a>(labels: &'a [String], n: f64) -> HashMap<&'a str, f64> {
        let mut m: HashMap<&str, f64> = HashMap::new();
        for l in labels {
            *m.entry(l.as_str()).or_insert(0.0) += 1.0 / n;
        }
        m
    }
    let ma = marginal(rater_a, n);
    let mb = marginal(rater_b, n);
    let p_e: f64 = categories
        .iter()
        .map(|c| ma.get(c.as_str()).unwrap_or(&0.0) * mb.get(c.as_str()).unwrap_or(&0.0))
        .sum();

    let (kappa, degenerate) = if p_e >= 1.0 {
        (1.0, true)
    } else {
        ((p_o - p_e) / (1.0 - p_e), false)
    };
    Ok(KappaResult {
        p_o,
        p_e,
        kappa,
        categories,
        verdict: Verdict::from_kappa(kappa),
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceRow {
    pub item: String,
    pub mean: f64,
    /// Sample standard deviation (n−1); absent for a single score.
    pub sd: Option<f64>,
    pub n: usize,
}

/// Mean and sample SD per item, ordered by item id.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceSummary {
    pub rows: Vec<PreferenceRow>,
}

pub fn preference_summary(scores: &BTreeMap<String, Vec<f64>>) -> PreferenceSummary {
    let rows = scores
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(item, values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let sd = (n >= 2).then(|| {
                let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
                (ss / (n as f64 - 1.0)).sqrt()
            });
            PreferenceRow { item: item.clone(), mean, sd, n }
        })
        .collect();
    PreferenceSummary { rows }
}

// ---------------------------------------------------------------------------
// CSV input (RFC 4180, header row required)

/// `raw_text,group,sub_group,driver,source`; empty sub_group/source cells
/// mean absent.
pub fn read_frequency_records_csv(data: &str) -> Result<Vec<FrequencyRecord>, Diagnostic> {
    let mut reader = csv::Reader::from_reader(data.as_bytes());
    expect_headers(&mut reader, &["raw_text", "group", "sub_group", "driver", "source"])?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_err(i, &e.to_string()))?;
        let field = |j: usize| row.get(j).unwrap_or("").trim().to_string();
        let driver = AttachmentDriver::from_surface_name(&field(3))
            .ok_or_else(|| csv_err(i, &format!("unknown driver `{}`", field(3))))?;
        let (raw_text, group) = (field(0), field(1));
        if raw_text.is_empty() || group.is_empty() {
            return Err(csv_err(i, "raw_text and group must be non-empty"));
        }
        out.push(FrequencyRecord {
            raw_text,
            group,
            sub_group: Some(field(2)).filter(|s| !s.is_empty()),
            driver,
            source: Some(field(4)).filter(|s| !s.is_empty()),
        });
    }
    Ok(out)
}

/// `unit,baseline,treatment`.
pub fn read_paired_samples_csv(data: &str) -> Result<Vec<PairedSample>, Diagnostic> {
    let mut reader = csv::Reader::from_reader(data.as_bytes());
    expect_headers(&mut reader, &["unit", "baseline", "treatment"])?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_err(i, &e.to_string()))?;
        let num = |j: usize, name: &str| -> Result<f64, Diagnostic> {
            let text = row.get(j).unwrap_or("").trim();
            let v: f64 = text
                .parse()
                .map_err(|_| csv_err(i, &format!("{name} `{text}` is not a number")))?;
            if !v.is_finite() {
                return Err(csv_err(i, &format!("{name} must be finite")));
            }
            Ok(v)
        };
        out.push(PairedSample {
            baseline: num(1, "baseline")?,
            treatment: num(2, "treatment")?,
        });
    }
    Ok(out)
}

/// `unit,rater_a,rater_b`.
pub fn read_ratings_csv(data: &str) -> Result<(Vec<String>, Vec<String>), Diagnostic> {
    let mut reader = csv::Reader::from_reader(data.as_bytes());
    expect_headers(&mut reader, &["unit", "rater_a", "rater_b"])?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_err(i, &e.to_string()))?;
        a.push(row.get(1).unwrap_or("").trim().to_string());
        b.push(row.get(2).unwrap_or("").trim().to_string());
    }
    Ok((a, b))
}

fn expect_headers(reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), Diagnostic> {
    let headers = reader
        .headers()
        .map_err(|e| Diagnostic::error("S005", format!("cannot read CSV header: {e}")))?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Diagnostic::error(
            "S005",
            format!("expected CSV header `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn csv_err(row: usize, message: &str) -> Diagnostic {
    Diagnostic::error("S005", format!("CSV data row {}: {message}", row + 1))
}
